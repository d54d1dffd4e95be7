"""Independent reference computations used only by the tests."""

import math

import numpy as np

from shifthsic.kernels import evaluate
from shifthsic.statistic import core_h


def naive_gram(x, sigma):
    n = len(x)
    out = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            out[a, b] = math.exp(-((x[a] - x[b]) ** 2) / (2 * sigma * sigma))
    return out


def explicit_center(g):
    n = g.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return h @ g @ h


def explicit_trace_hsic(k, l):
    n = k.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return np.trace(h @ k @ h @ l) / n ** 2


class DiscreteProduct:
    """Product distribution of two finite marginals, support = all (x_i, y_j)."""

    def __init__(self, xs, px, ys, py):
        self.xs, self.px = np.asarray(xs, float), np.asarray(px, float)
        self.ys, self.py = np.asarray(ys, float), np.asarray(py, float)
        self.ix = np.repeat(np.arange(self.xs.size), self.ys.size)
        self.iy = np.tile(np.arange(self.ys.size), self.xs.size)
        self.zx = self.xs[self.ix]
        self.zy = self.ys[self.iy]
        self.prob = self.px[self.ix] * self.py[self.iy]

    @property
    def size(self):
        return self.prob.size

    def core_tensor(self, kx, ky):
        m = self.size
        idx = np.indices((m,) * 4).reshape(4, -1)
        vals = core_h(*[(self.zx[i], self.zy[i]) for i in idx], kx, ky)
        return vals.reshape((m,) * 4)

    def hoeffding_h2(self, kx, ky):
        """h2 = g2 - g1(z1) - g1(z2) + theta by exact enumeration."""
        h = self.core_tensor(kx, ky)
        p = self.prob
        g2 = np.einsum("abcd,c,d->ab", h, p, p)
        g1 = g2 @ p
        theta = p @ g1
        return g2 - g1[:, None] - g1[None, :] + theta, g1, theta

    def s_kernel(self, kx, ky):
        """k~(x1, x2) l~(y1, y2) with centering by exact expectations."""

        def tilde(spec, v, p):
            k = evaluate(spec, v[:, None], v[None, :])
            m = k @ p
            return k - m[:, None] - m[None, :] + p @ k @ p

        kt = tilde(kx, self.xs, self.px)
        lt = tilde(ky, self.ys, self.py)
        return kt[np.ix_(self.ix, self.ix)] * lt[np.ix_(self.iy, self.iy)]
