"""Kernel functions, Gram matrices, centering and bandwidth selection."""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._random import make_rng
from .errors import DegenerateSeries, InvalidInput

FAMILIES = ("gaussian", "linear")
MEDIAN_HEURISTIC = "median-heuristic"
MEDIAN_EXACT_LIMIT = 2000


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth.

    ``bandwidth`` is either a positive float or the marker
    ``"median-heuristic"``; it is ignored by the linear kernel.
    """

    family: str = "gaussian"
    bandwidth: Union[float, str] = MEDIAN_HEURISTIC

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInput(f"unknown kernel family {self.family!r}")
        if self.bandwidth != MEDIAN_HEURISTIC:
            try:
                bw = float(self.bandwidth)
            except (TypeError, ValueError):
                raise InvalidInput(f"bad bandwidth {self.bandwidth!r}") from None
            if not (np.isfinite(bw) and bw > 0):
                raise InvalidInput(f"bandwidth must be positive, got {self.bandwidth!r}")
            object.__setattr__(self, "bandwidth", bw)

    @property
    def explicit(self):
        return self.family == "linear" or self.bandwidth != MEDIAN_HEURISTIC

    def resolve(self, series, seed=0):
        """Return a spec with an explicit bandwidth chosen for ``series``."""
        if self.explicit:
            return self
        return KernelSpec(self.family, median_heuristic(series, seed=seed))

    def to_dict(self):
        return {"family": self.family, "bandwidth": self.bandwidth}


@dataclass
class GramMatrix:
    values: np.ndarray
    centered: bool = False

    @property
    def n(self):
        return self.values.shape[0]


def as_series(series, name="series"):
    """Validate a 1-d finite float array."""
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1:
        raise InvalidInput(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInput(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite values")
    return arr


def evaluate(spec, a, b):
    """Elementwise kernel value k(a, b) for broadcastable arrays.

    Needs an explicit bandwidth for the gaussian family.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if spec.family == "linear":
        return a * b
    if not spec.explicit:
        raise InvalidInput("pointwise kernel evaluation needs an explicit bandwidth")
    d = a - b
    return np.exp(-(d * d) / (2.0 * spec.bandwidth ** 2))


def gram_array(series, spec, seed=0):
    """Uncentered Gram matrix as a bare ndarray (hot path)."""
    x = as_series(series)
    spec = spec.resolve(x, seed=seed)
    if spec.family == "linear":
        return np.multiply.outer(x, x)
    d = np.subtract.outer(x, x)
    d *= d
    d *= -1.0 / (2.0 * spec.bandwidth ** 2)
    return np.exp(d, out=d)


def gram(series, spec=KernelSpec(), seed=0):
    """Gram matrix K[a, b] = k(x_a, x_b), uncentered."""
    return GramMatrix(gram_array(series, spec, seed=seed), centered=False)


def center_array(values):
    """Double-center a square matrix: subtract row and column means, add grand mean."""
    values = np.asarray(values, dtype=float)
    row = values.mean(axis=1)
    col = values.mean(axis=0)
    out = values - row[:, None]
    out -= col[None, :]
    out += row.mean()
    return out


def center(g):
    """Return H g H without ever forming H."""
    values = g.values if isinstance(g, GramMatrix) else g
    return GramMatrix(center_array(values), centered=True)


def median_heuristic(series, seed=0, max_points=MEDIAN_EXACT_LIMIT):
    """Lower median of the pairwise distances |x_a - x_b|, a < b.

    Above ``max_points`` samples the median is taken over a seeded uniform
    subsample of ``max_points`` points. If more than half of the distances
    are zero (heavily tied data) the median of the nonzero distances is
    returned instead, so the bandwidth stays positive.
    """
    x = as_series(series)
    if x.size < 2:
        raise InvalidInput("median heuristic needs at least two points")
    if x.size > max_points:
        idx = make_rng(seed).choice(x.size, size=max_points, replace=False)
        x = x[np.sort(idx)]
    iu = np.triu_indices(x.size, k=1)
    dist = np.abs(x[iu[0]] - x[iu[1]])
    med = _lower_median(dist)
    if med > 0:
        return float(med)
    positive = dist[dist > 0]
    if positive.size == 0:
        raise DegenerateSeries("all pairwise distances are zero; supply an explicit bandwidth")
    return float(_lower_median(positive))


def _lower_median(values):
    k = (values.size - 1) // 2
    return np.partition(values, k)[k]
