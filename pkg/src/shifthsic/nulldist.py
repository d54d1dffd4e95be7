"""Null distributions (Shift HSIC, Bootstrap HSIC), p-values and the correlation baseline.

The shift null rotates the y series circularly, which keeps the serial
dependence inside each series intact. The permutation ("bootstrap") null
scrambles time and is only valid for i.i.d. data; it is kept as a baseline.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._random import make_rng
from .errors import DegenerateSeries, InvalidInput, InvalidShift
from .kernels import KernelSpec, center_array, gram_array
from .statistic import HsicValue, SeriesPair, centered_grams, hsic_from_grams, resolve_kernels

SHIFT = "shift"
PERMUTATION = "permutation"
DEFAULT_RESAMPLES = 299


def default_shift_range(n):
    """A = max(20, ceil(0.1 n)), B = ceil(0.5 n), clipped to 1 <= A <= B < n."""
    hi = min(math.ceil(0.5 * n), n - 1)
    lo = min(max(20, math.ceil(0.1 * n)), hi)
    if lo < 1:
        raise InvalidInput(f"series too short for a shift null (n={n})")
    return lo, hi


@dataclass(frozen=True)
class NullMethod:
    """How the null sample is built.

    For ``kind="shift"`` the bounds default to :func:`default_shift_range`
    once n is known; ``resamples`` and ``seed`` only matter for permutations.
    """

    kind: str = SHIFT
    shift_lo: Optional[int] = None
    shift_hi: Optional[int] = None
    resamples: int = DEFAULT_RESAMPLES
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (SHIFT, PERMUTATION):
            raise InvalidInput(f"unknown null method {self.kind!r}")
        if self.kind == PERMUTATION and self.resamples < 100:
            raise InvalidInput("permutation null needs resamples >= 100")

    def bounds(self, n):
        lo, hi = default_shift_range(n) if self.kind == SHIFT else (None, None)
        lo = lo if self.shift_lo is None else int(self.shift_lo)
        hi = hi if self.shift_hi is None else int(self.shift_hi)
        if not 1 <= lo <= hi < n:
            raise InvalidShift(f"need 1 <= A <= B < n, got A={lo}, B={hi}, n={n}")
        return lo, hi

    def to_dict(self, n=None):
        out = {"kind": self.kind, "seed": self.seed}
        if self.kind == SHIFT:
            lo, hi = self.bounds(n) if n is not None else (self.shift_lo, self.shift_hi)
            out.update(shift_lo=lo, shift_hi=hi)
        else:
            out["resamples"] = self.resamples
        return out


@dataclass
class TestResult:
    statistic: HsicValue
    null_samples: np.ndarray
    p_value: float
    method: NullMethod
    n: int
    kernels: tuple = ()
    test: str = "hsic"
    labels: tuple = ("x", "y")
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self):
        out = {
            "test": self.test,
            "labels": list(self.labels),
            "n": self.n,
            "statistic": self.statistic.value,
            "p_value": self.p_value,
            "method": self.method.to_dict(self.n),
            "kernels": [k.to_dict() for k in self.kernels],
            "null_samples": [float(v) for v in self.null_samples],
        }
        out.update(self.extra)
        return out


def shifted_pair(pair, c):
    """x unchanged, y rotated: y'_t = y_{(t + c) mod n}."""
    if not 0 <= c < pair.n:
        raise InvalidShift(f"shift {c} outside [0, {pair.n})")
    return SeriesPair(pair.x, np.roll(pair.y, -c), pair.labels, pair.timestamps)


def p_value(statistic, null_samples):
    """(1 + #{null >= statistic}) / (1 + m); ties count against rejection."""
    null = np.asarray(null_samples, dtype=float)
    if null.size == 0:
        raise InvalidInput("empty null sample")
    return (1.0 + np.count_nonzero(null >= float(statistic))) / (1.0 + null.size)


def _diagonals(m):
    """D[d, a] = m[a, (a + d) mod n]; rotating both indices of m by k
    becomes rotating every row of D by k."""
    n = m.shape[0]
    a = np.arange(n)
    return m[a[None, :], (a[None, :] + a[:, None]) % n]


def shift_statistics(kc, l, lo, hi, engine="fft"):
    """n^-2 sum_ab kc[a,b] l[a+k, b+k] for k = lo..hi (indices mod n).

    ``engine="direct"`` re-indexes l per shift; ``engine="fft"`` computes all
    shifts at once as a circular cross-correlation along the diagonals of
    both matrices, O(n^2 log n) in total.
    """
    n = kc.shape[0]
    if engine == "direct":
        out = np.empty(hi - lo + 1)
        base = np.arange(n)
        for i, k in enumerate(range(lo, hi + 1)):
            idx = (base + k) % n
            out[i] = hsic_from_grams(kc, l[np.ix_(idx, idx)])
    elif engine == "fft":
        dk = np.fft.rfft(_diagonals(kc), axis=1)
        dl = np.fft.rfft(_diagonals(l), axis=1)
        spec = np.einsum("da,da->a", dk.conj(), dl)
        out = np.fft.irfft(spec, n)[lo : hi + 1] / (n * n)
    else:
        raise InvalidInput(f"unknown engine {engine!r}")
    return np.maximum(out, 0.0)


def shift_null(pair, kx=KernelSpec(), ky=KernelSpec(), lo=None, hi=None, engine="fft", seed=0):
    """HSIC of (x, y rotated by k) for every k in [lo, hi].

    Both Gram matrices are built once; bandwidths come from the unshifted
    data (rotation does not change the marginal sample).
    """
    lo, hi = NullMethod(SHIFT, lo, hi).bounds(pair.n)
    kc, l = centered_grams(pair, kx, ky, seed)
    return shift_statistics(kc, l, lo, hi, engine)


def draw_permutations(n, resamples, seed):
    """Permutation r comes from its own substream (seed, r)."""
    return [make_rng(seed, r).permutation(n) for r in range(resamples)]


def permuted_statistics(kc, l, perms):
    out = np.empty(len(perms))
    for i, p in enumerate(perms):
        out[i] = hsic_from_grams(kc, l[np.ix_(p, p)])
    return np.maximum(out, 0.0)


def permutation_null(pair, kx=KernelSpec(), ky=KernelSpec(), resamples=DEFAULT_RESAMPLES, seed=0):
    """HSIC of (x, pi_r(y)) for r = 1..resamples; L is permuted, never rebuilt."""
    if resamples < 1:
        raise InvalidInput("resamples must be >= 1")
    kc, l = centered_grams(pair, kx, ky, seed)
    return permuted_statistics(kc, l, draw_permutations(pair.n, resamples, seed))


def hsic_test(pair, kx=KernelSpec(), ky=KernelSpec(), method=NullMethod(), engine="fft"):
    """Run the HSIC independence test with the requested null."""
    if pair.n < 3:
        raise InvalidInput("test needs n >= 3")
    kx, ky = resolve_kernels(pair, kx, ky, method.seed)
    kc, l = centered_grams(pair, kx, ky)
    raw = hsic_from_grams(kc, center_array(l))
    stat = HsicValue(max(raw, 0.0), pair.n, raw)
    if method.kind == SHIFT:
        lo, hi = method.bounds(pair.n)
        null = shift_statistics(kc, l, lo, hi, engine)
    else:
        null = permuted_statistics(kc, l, draw_permutations(pair.n, method.resamples, method.seed))
    return TestResult(stat, null, p_value(stat.value, null), method, pair.n, (kx, ky), "hsic", pair.labels)


def _standardize(v, name):
    sd = v.std()
    if not sd > 0 or not np.isfinite(sd):
        raise DegenerateSeries(f"{name} has zero variance")
    return (v - v.mean()) / sd


def correlation_test(pair, method=NullMethod()):
    """|Pearson r| with a null built by the same shift/permutation machinery."""
    n = pair.n
    if n < 3:
        raise InvalidInput("correlation test needs n >= 3")
    xs = _standardize(pair.x, pair.labels[0])
    ys = _standardize(pair.y, pair.labels[1])
    raw = float(np.dot(xs, ys)) / n
    stat = min(abs(raw), 1.0)
    if method.kind == SHIFT:
        lo, hi = method.bounds(n)
        idx = (np.arange(n)[None, :] + np.arange(lo, hi + 1)[:, None]) % n
    else:
        idx = np.asarray(draw_permutations(n, method.resamples, method.seed))
    null = np.minimum(np.abs(ys[idx] @ xs) / n, 1.0)
    value = HsicValue(stat, n, raw)
    return TestResult(value, null, p_value(stat, null), method, n, (), "correlation", pair.labels)
