"""Synthetic AR(1) pairs driven by Extinct Gaussian innovations.

An Extinct Gaussian draw is a bivariate standard normal point that, when
it lands inside the ball of radius r, is discarded with probability p.
The two coordinates stay uncorrelated but become dependent for p > 0.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import lfilter

from ._random import make_rng
from .errors import GeneratorStall, InvalidInput, NonStationary
from .statistic import SeriesPair

DEPENDENT = "dependent"
INDEPENDENT = "independent"
MAX_TRIES = 10 ** 6


@dataclass(frozen=True)
class ProcessConfig:
    ar_coeff: float = 0.2
    extinction_rate: float = 0.5
    radius: float = 1.0
    length: int = 600
    burn_in: int = 1000
    seed: int = 0
    coupling: str = DEPENDENT

    def __post_init__(self):
        if not abs(self.ar_coeff) < 1:
            raise NonStationary(f"|a| must be < 1 for stationarity, got {self.ar_coeff}")
        if not 0 <= self.extinction_rate <= 1:
            raise InvalidInput(f"extinction rate must lie in [0, 1], got {self.extinction_rate}")
        if not self.radius >= 0:
            raise InvalidInput(f"radius must be >= 0, got {self.radius}")
        if self.length < 1:
            raise InvalidInput("length must be positive")
        if self.burn_in < 0:
            raise InvalidInput("burn_in must be >= 0")
        if self.coupling not in (DEPENDENT, INDEPENDENT):
            raise InvalidInput(f"unknown coupling {self.coupling!r}")

    def to_dict(self):
        return asdict(self)


def extinct_gaussian(p, r, rng, max_tries=MAX_TRIES):
    """One (eps, eta) innovation pair by literal rejection.

    Draw eta, eps ~ N(0, 1) and d ~ U[0, 1]; accept when the point lies
    outside the radius-r ball or when d > p.
    """
    r2 = r * r
    for _ in range(max_tries):
        eta, eps = rng.standard_normal(2)
        d = rng.random()
        if eta * eta + eps * eps > r2 or d > p:
            return eps, eta
    raise GeneratorStall(f"no acceptance after {max_tries} draws (p={p}, r={r})")


def extinct_gaussian_batch(size, p, r, rng, max_tries=MAX_TRIES):
    """``size`` innovation pairs as an array of shape (size, 2), columns (eps, eta).

    Same acceptance rule as :func:`extinct_gaussian`, vectorized in rounds.
    """
    r2 = r * r
    out = np.empty((size, 2))
    filled = 0
    wasted = 0
    while filled < size:
        need = size - filled
        chunk = max(64, int(need * 1.25) + 16)
        eta = rng.standard_normal(chunk)
        eps = rng.standard_normal(chunk)
        d = rng.random(chunk)
        keep = (eta * eta + eps * eps > r2) | (d > p)
        k = min(int(keep.sum()), need)
        if k == 0:
            wasted += chunk
            if wasted >= max_tries:
                raise GeneratorStall(f"no acceptance after {wasted} draws (p={p}, r={r})")
            continue
        wasted = 0
        out[filled : filled + k, 0] = eps[keep][:k]
        out[filled : filled + k, 1] = eta[keep][:k]
        filled += k
    return out


def _ar_filter(innovations, a):
    # X_t = a X_{t-1} + e_t with X_0 = 0
    if a == 0:
        return innovations.copy()
    return lfilter([1.0], [1.0, -a], innovations)


def _dependent_pair(cfg, rng):
    total = cfg.burn_in + cfg.length
    innov = extinct_gaussian_batch(total, cfg.extinction_rate, cfg.radius, rng)
    x = _ar_filter(innov[:, 0], cfg.ar_coeff)[cfg.burn_in :]
    y = _ar_filter(innov[:, 1], cfg.ar_coeff)[cfg.burn_in :]
    return x, y


def simulate_pair(cfg):
    """Simulate (X_t, Y_t) under ``cfg``.

    Dependent coupling drives both recursions with one innovation stream.
    Independent coupling simulates two dependent pairs and keeps X from the
    first and Y from the second.
    """
    rng = make_rng(cfg.seed)
    x, y = _dependent_pair(cfg, rng)
    if cfg.coupling == INDEPENDENT:
        _, y = _dependent_pair(cfg, rng)
    return SeriesPair(x, y, ("x", "y"), np.arange(cfg.length, dtype=np.int64))
