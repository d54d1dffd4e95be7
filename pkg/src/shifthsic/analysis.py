"""Lagged residual-dependence scans and pairwise dependence graphs."""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSeries, InvalidInput, SingularDesign
from .ingest import align
from .kernels import KernelSpec
from .nulldist import DEFAULT_RESAMPLES, PERMUTATION, SHIFT, NullMethod, correlation_test, hsic_test
from .statistic import SeriesPair

CORRELATION = "correlation"
METHODS = (SHIFT, PERMUTATION, CORRELATION)
PERFECT_FIT_RTOL = 1e-10


def run_method(pair, method, kernel=KernelSpec(), seed=0, resamples=DEFAULT_RESAMPLES, shift_range=(None, None)):
    """One independence test by method name; returns a TestResult."""
    lo, hi = shift_range
    if method == SHIFT:
        return hsic_test(pair, kernel, kernel, NullMethod(SHIFT, lo, hi, seed=seed))
    if method == PERMUTATION:
        return hsic_test(pair, kernel, kernel, NullMethod(PERMUTATION, resamples=resamples, seed=seed))
    if method == CORRELATION:
        return correlation_test(pair, NullMethod(SHIFT, lo, hi, seed=seed))
    raise InvalidInput(f"unknown method {method!r}")


@dataclass
class LagFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    intercept: float = 0.0

    @property
    def max_lag(self):
        return self.coefficients.size - 1


def _lag_design(x, q):
    n = x.size
    return np.column_stack([x[q - j : n - j] for j in range(q + 1)])


def ols_lag_fit(pair, max_lag=6, intercept=False):
    """OLS of y_t on (x_t, ..., x_{t-q}) for t = q+1..n.

    Residuals are returned for those same t, i.e. aligned to the last
    n - q entries of the input.
    """
    q = int(max_lag)
    n = pair.n
    if q < 0 or n <= q + 2:
        raise InvalidInput(f"need n > q + 2, got n={n}, q={q}")
    design = _lag_design(pair.x, q)
    if intercept:
        design = np.column_stack([design, np.ones(design.shape[0])])
    target = pair.y[q:]
    gram = design.T @ design
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularDesign("lag design matrix is rank deficient")
    beta = scipy.linalg.solve(gram, design.T @ target, assume_a="sym")
    resid = target - design @ beta
    if intercept:
        return LagFit(beta[:-1], resid, float(beta[-1]))
    return LagFit(beta, resid)


@dataclass
class LagScanResult:
    lags: np.ndarray
    p_values: dict
    statistics: dict
    standing: dict
    coefficients: np.ndarray = None
    sample_sizes: np.ndarray = None

    def exceedances(self, method, level):
        return int(np.count_nonzero(self.p_values[method] <= level))

    def best_lag(self, method):
        """Lag with the smallest p-value; ties go to the statistic that sits
        furthest above its own null sample."""
        order = np.lexsort((-self.standing[method], self.p_values[method]))
        return int(self.lags[order[0]])

    def to_csv(self, fh):
        fh.write("lag,method,p_value\n")
        for method, ps in self.p_values.items():
            for lag, p in zip(self.lags, ps):
                fh.write(f"{int(lag)},{method},{p:.17g}\n")


def expected_exceedances(level, count):
    """Number of p-values <= level expected under the null, e.g. 0.06 * 30 = 1.8."""
    return level * count


def lag_scan(residuals, x, max_lag=30, methods=(SHIFT,), kernel=KernelSpec(), seed=0,
             resamples=DEFAULT_RESAMPLES, start=None, coefficients=None):
    """Test residuals R_t against x_{t-k} for k = 0..max_lag.

    ``residuals[i]`` belongs to time ``start + i`` (default: aligned to the
    end of ``x``). Lag k uses t = max(k, start)..n-1, so every method sees
    the same sample at a given lag.
    """
    r = np.asarray(residuals, dtype=float)
    x = np.asarray(x, dtype=float)
    n = x.size
    start = n - r.size if start is None else int(start)
    if not 0 <= max_lag < n / 4:
        raise InvalidInput(f"max lag {max_lag} must be below n/4 = {n / 4}")
    # roundoff-level residuals come from an exact fit; nothing left to test
    if r.std() <= PERFECT_FIT_RTOL * max(x.std(), np.finfo(float).tiny):
        raise DegenerateSeries("residuals are constant (perfect fit)")
    lags = np.arange(max_lag + 1)
    p = {m: np.empty(lags.size) for m in methods}
    stats = {m: np.empty(lags.size) for m in methods}
    standing = {m: np.empty(lags.size) for m in methods}
    sizes = np.empty(lags.size, dtype=int)
    for i, k in enumerate(lags):
        t0 = max(k, start)
        pair = SeriesPair(r[t0 - start :], x[t0 - k : n - k], ("residual", f"x_lag{k}"))
        sizes[i] = pair.n
        for m in methods:
            res = run_method(pair, m, kernel, seed=seed + i, resamples=resamples)
            p[m][i] = res.p_value
            stats[m][i] = res.statistic.value
            sd = res.null_samples.std()
            standing[m][i] = (res.statistic.value - res.null_samples.mean()) / sd if sd > 0 else 0.0
    return LagScanResult(lags, p, stats, standing, coefficients, sizes)


@dataclass
class DependenceGraph:
    """Undirected graph; ``edges`` keeps only pairs with p <= alpha, ``tests`` all pairs."""

    nodes: list
    tests: list
    alpha: float
    method: str
    edges: list = field(init=False)

    def __post_init__(self):
        self.edges = [t for t in self.tests if t[2] <= self.alpha]

    def p_value(self, a, b):
        for i, j, p, _ in self.tests:
            if {i, j} == {a, b}:
                return p
        raise KeyError((a, b))

    def to_dot(self, name=None):
        name = name or f"{self.method}_dependence"
        lines = [f'graph "{name}" {{']
        for node in self.nodes:
            lines.append(f'  "{node}";')
        for i, j, p, _ in self.edges:
            lines.append(f'  "{i}" -- "{j}" [label="{p:.4g}", p_value={p:.17g}];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "method": self.method,
            "alpha": self.alpha,
            "nodes": list(self.nodes),
            "edges": [{"source": i, "target": j, "p_value": p, "method": m} for i, j, p, m in self.edges],
            "tests": [{"source": i, "target": j, "p_value": p, "method": m} for i, j, p, m in self.tests],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _unique_names(names):
    seen = {}
    out = []
    for name in names:
        seen[name] = seen.get(name, 0) + 1
        out.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    return out


def _pairs_of(series):
    """Accept a mapping name -> series, a list of (name, series) or RegularSeries objects."""
    if isinstance(series, dict):
        items = list(series.items())
    else:
        items = [(s.name, s) if hasattr(s, "name") and hasattr(s, "interval") else tuple(s) for s in series]
    names = _unique_names([str(name) for name, _ in items])
    return names, [s for _, s in items]


def _pair_for(a, b, na, nb):
    if hasattr(a, "interval"):
        pair = align(a, b)
        return SeriesPair(pair.x, pair.y, (na, nb), pair.timestamps)
    return SeriesPair(a, b, (na, nb))


def dependence_graph(series, method=SHIFT, alpha=0.05, kernel=KernelSpec(), seed=0,
                     resamples=DEFAULT_RESAMPLES, shift_range=(None, None)):
    """Test every unordered pair once; return (method graph, correlation graph)."""
    names, values = _pairs_of(series)
    if len(names) < 2:
        raise InvalidInput("need at least two series")
    tests, corr = [], []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            pair = _pair_for(values[i], values[j], names[i], names[j])
            key = seed + i * len(names) + j
            tests.append((names[i], names[j], run_method(pair, method, kernel, key, resamples, shift_range).p_value, method))
            corr.append((names[i], names[j], run_method(pair, CORRELATION, kernel, key, resamples, shift_range).p_value, CORRELATION))
    return DependenceGraph(names, tests, alpha, method), DependenceGraph(names, corr, alpha, CORRELATION)


def serial_dependence_check(series, lags=(1,), method=SHIFT, kernel=KernelSpec(), seed=0, resamples=DEFAULT_RESAMPLES):
    """Advisory p-values for dependence between X_t and X_{t+m}, one per lag m."""
    x = np.asarray(series, dtype=float)
    n = x.size
    out = {}
    for m in lags:
        if not 1 <= m < n / 4:
            raise InvalidInput(f"lag {m} must lie in [1, n/4)")
        pair = SeriesPair(x[: n - m], x[m:], ("x_t", f"x_t+{m}"))
        if not np.any(pair.x != pair.x[0]):
            raise DegenerateSeries("series is constant")
        out[int(m)] = run_method(pair, method, kernel, seed + m, resamples).p_value
    return out
