"""HSIC V-statistic, the symmetric core h and brute-force oracles."""

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional

import numpy as np

from .errors import InvalidInput, TooLarge
from .kernels import KernelSpec, as_series, center_array, evaluate, gram_array

BRUTEFORCE_LIMIT = 14
_PERMS4 = tuple(permutations(range(4)))


@dataclass
class SeriesPair:
    """Two aligned real sequences (x_t, y_t)."""

    x: np.ndarray
    y: np.ndarray
    labels: tuple = ("x", "y")
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x = as_series(self.x, "x")
        self.y = as_series(self.y, "y")
        if self.x.size != self.y.size:
            raise InvalidInput(f"length mismatch: {self.x.size} vs {self.y.size}")
        if self.timestamps is not None:
            self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
            if self.timestamps.size != self.x.size:
                raise InvalidInput("timestamps length does not match the series")

    @property
    def n(self):
        return self.x.size

    def swapped(self):
        return SeriesPair(self.y, self.x, self.labels[::-1], self.timestamps)


@dataclass
class HsicValue:
    """Biased HSIC estimate. ``raw`` keeps the unclamped value."""

    value: float
    n: int
    raw: float = field(default=None, repr=False)

    def __float__(self):
        return self.value


def _clamp(raw):
    return max(float(raw), 0.0)


def resolve_kernels(pair, kx, ky, seed=0):
    """Fix data-dependent bandwidths once, from the unshifted data."""
    return kx.resolve(pair.x, seed=seed), ky.resolve(pair.y, seed=seed)


def centered_grams(pair, kx=KernelSpec(), ky=KernelSpec(), seed=0):
    """Return (HKH, L) with L left uncentered; bandwidths resolved per side."""
    kx, ky = resolve_kernels(pair, kx, ky, seed)
    return center_array(gram_array(pair.x, kx)), gram_array(pair.y, ky)


def hsic_from_grams(kc, l):
    """n^-2 tr(HKH L) given centered K and any L (centering L is redundant)."""
    n = kc.shape[0]
    return float(np.einsum("ij,ij->", kc, l)) / (n * n)


def hsic_v(pair, kx=KernelSpec(), ky=KernelSpec(), seed=0):
    """Biased HSIC: n^-2 tr(HKH L), evaluated as n^-2 <HKH, HLH>.

    Both factors are centered so the elementwise sum is a Frobenius inner
    product of two PSD matrices; tiny negative roundoff is clamped to 0.
    """
    if pair.n < 2:
        raise InvalidInput("hsic_v needs n >= 2")
    kc, l = centered_grams(pair, kx, ky, seed)
    raw = hsic_from_grams(kc, center_array(l))
    return HsicValue(_clamp(raw), pair.n, raw)


def core_h(z1, z2, z3, z4, kx, ky):
    """Symmetric HSIC core h(z1, z2, z3, z4).

    Literal average over the 24 permutations of
    k(x_a, x_b) * [l(y_a, y_b) + l(y_c, y_d) - 2 l(y_b, y_c)].
    Each z is an (x, y) pair; components may be arrays, in which case the
    core is evaluated elementwise with broadcasting.
    """
    if not (kx.explicit and ky.explicit):
        raise InvalidInput("core_h needs explicit bandwidths")
    zs = (z1, z2, z3, z4)
    xs = [np.asarray(z[0], dtype=float) for z in zs]
    ys = [np.asarray(z[1], dtype=float) for z in zs]
    # cache pairwise kernel values; k(i, j) == k(j, i) for both families
    kxx = {}
    lyy = {}
    for i in range(4):
        for j in range(i, 4):
            kxx[i, j] = kxx[j, i] = evaluate(kx, xs[i], xs[j])
            lyy[i, j] = lyy[j, i] = evaluate(ky, ys[i], ys[j])
    if all(np.ndim(v) == 0 for v in xs + ys):
        # scalar inputs: exact sum of the 72 products, so identical monomials
        # cancel exactly (e.g. h(z, z, z, w) == 0.0)
        terms = []
        for a, b, c, d in _PERMS4:
            k = float(kxx[a, b])
            terms += [k * float(lyy[a, b]), k * float(lyy[c, d]), -2.0 * (k * float(lyy[b, c]))]
        return math.fsum(terms) / 24.0
    total = 0.0
    for a, b, c, d in _PERMS4:
        total = total + kxx[a, b] * (lyy[a, b] + lyy[c, d] - 2.0 * lyy[b, c])
    return total / 24.0


def hsic_v_bruteforce(pair, kx=KernelSpec(), ky=KernelSpec(), seed=0):
    """n^-4 times the sum of core_h over all n^4 ordered index quadruples."""
    n = pair.n
    if n > BRUTEFORCE_LIMIT:
        raise TooLarge(f"brute force limited to n <= {BRUTEFORCE_LIMIT}, got {n}")
    kx, ky = resolve_kernels(pair, kx, ky, seed)
    idx = np.indices((n,) * 4).reshape(4, -1)
    zs = [(pair.x[i], pair.y[i]) for i in idx]
    raw = float(np.sum(core_h(*zs, kx, ky))) / n ** 4
    return HsicValue(_clamp(raw), n, raw)


def s_kernel_empirical(pair, a, b, kx=KernelSpec(), ky=KernelSpec(), seed=0):
    """(HKH)_ab * (HLH)_ab: centered-product kernel with empirical centering."""
    if pair.n < 2:
        raise InvalidInput("s_kernel_empirical needs n >= 2")
    kc, l = centered_grams(pair, kx, ky, seed)
    return float(kc[a, b] * center_array(l)[a, b])
