"""Batch harness for the synthetic power and false-positive studies.

Two designs are supported:

``tp_vs_extinction``
    Dependent AR(1) pairs (a = 0.2, r = 1 by default), sweeping the
    extinction rate p. Rejections are true positives once p > 0.
``fp_vs_ar``
    Independent pairs (p = 0.5, r = 1), sweeping the AR coefficient a.
    Every rejection is a false positive.

Repetition ``r`` at grid index ``g`` simulates from
``derive_seed(master_seed, g, r)``, so results do not depend on the
execution order or on the number of worker processes.
"""

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from ._random import derive_seed
from .analysis import CORRELATION, run_method
from .errors import HsicError, SpecError
from .kernels import KernelSpec
from .nulldist import DEFAULT_RESAMPLES, PERMUTATION, SHIFT
from .synth import DEPENDENT, INDEPENDENT, ProcessConfig, simulate_pair

log = logging.getLogger(__name__)

TP = "tp_vs_extinction"
FP = "fp_vs_ar"
DESIGNS = (TP, FP)
METHOD_NAMES = {"shift_hsic": SHIFT, "bootstrap_hsic": PERMUTATION, "correlation": CORRELATION}
CSV_COLUMNS = ("grid_value", "method", "rejections", "repetitions", "rate", "stderr")
DESK_SCALE = {"n": 600, "repetitions": 100}
PAPER_SCALE = {"n": 1200, "repetitions": 300}


@dataclass
class ExperimentSpec:
    design: str
    grid: list
    n: int = DESK_SCALE["n"]
    repetitions: int = DESK_SCALE["repetitions"]
    alpha: float = 0.05
    methods: list = field(default_factory=lambda: ["shift_hsic", "bootstrap_hsic", "correlation"])
    master_seed: int = 0
    parallelism: int = 1
    ar_coeff: float = 0.2
    extinction_rate: float = 0.5
    radius: float = 1.0
    burn_in: int = 1000
    resamples: int = DEFAULT_RESAMPLES
    bandwidth: object = "median-heuristic"
    kernel: str = "gaussian"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.design not in DESIGNS:
            raise SpecError("design", f"must be one of {DESIGNS}, got {self.design!r}")
        if not isinstance(self.grid, list) or not self.grid:
            raise SpecError("grid", "must be a nonempty list")
        for v in self.grid:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SpecError("grid", f"non-numeric grid value {v!r}")
        _positive_int(self.n, "n", minimum=3)
        _positive_int(self.repetitions, "repetitions")
        _positive_int(self.parallelism, "parallelism")
        _positive_int(self.burn_in, "burn_in", minimum=0)
        _positive_int(self.resamples, "resamples", minimum=100)
        if isinstance(self.alpha, bool) or not isinstance(self.alpha, (int, float)) or not 0 < self.alpha < 1:
            raise SpecError("alpha", f"must lie in (0, 1), got {self.alpha!r}")
        if not isinstance(self.methods, list) or not self.methods:
            raise SpecError("methods", "must be a nonempty list")
        for m in self.methods:
            if m not in METHOD_NAMES:
                raise SpecError("methods", f"unknown method {m!r}; choose from {sorted(METHOD_NAMES)}")
        if not isinstance(self.master_seed, int) or isinstance(self.master_seed, bool):
            raise SpecError("master_seed", "must be an integer")
        try:
            KernelSpec(self.kernel, self.bandwidth)
        except HsicError as exc:
            raise SpecError("bandwidth", str(exc)) from None
        try:
            for g in range(len(self.grid)):
                self.process_config(g, 0)
        except HsicError as exc:
            raise SpecError("grid", str(exc)) from None

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise SpecError("spec", "top level must be a JSON object")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise SpecError(key, "unknown field")
        for key in ("design", "grid"):
            if key not in data:
                raise SpecError(key, "missing required field")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError("spec", f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

    def process_config(self, g, r):
        value = self.grid[g]
        seed = derive_seed(self.master_seed, g, r)
        if self.design == TP:
            return ProcessConfig(self.ar_coeff, value, self.radius, self.n, self.burn_in, seed, DEPENDENT)
        return ProcessConfig(value, self.extinction_rate, self.radius, self.n, self.burn_in, seed, INDEPENDENT)


def _positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise SpecError(name, f"must be an integer >= {minimum}, got {value!r}")


@dataclass
class Cell:
    grid_value: float
    method: str
    rejections: int
    repetitions: int

    @property
    def rate(self):
        return self.rejections / self.repetitions if self.repetitions else 0.0

    @property
    def stderr(self):
        if not self.repetitions:
            return 0.0
        p = self.rate
        return math.sqrt(p * (1 - p) / self.repetitions)


@dataclass
class ExperimentReport:
    """Rejection counts per (grid value, method).

    Wall-clock timings live in ``timings`` and are kept out of the
    serialized report so reruns compare byte for byte.
    """

    spec: ExperimentSpec
    cells: list
    complete: bool = True
    timings: dict = field(default_factory=dict)

    def cell(self, grid_value, method):
        for c in self.cells:
            if c.grid_value == grid_value and c.method == method:
                return c
        raise KeyError((grid_value, method))

    def rate(self, grid_value, method):
        return self.cell(grid_value, method).rate

    def to_dict(self):
        config = self.spec.to_dict()
        # execution detail only; must not change report bytes
        config.pop("parallelism")
        return {
            "config": config,
            "complete": self.complete,
            "cells": [
                {
                    "grid_value": c.grid_value,
                    "method": c.method,
                    "rejections": c.rejections,
                    "repetitions": c.repetitions,
                    "rate": c.rate,
                    "stderr": c.stderr,
                }
                for c in self.cells
            ],
        }


def _one_repetition(spec, g, r):
    cfg = spec.process_config(g, r)
    pair = simulate_pair(cfg)
    kernel = KernelSpec(spec.kernel, spec.bandwidth)
    out = {}
    for name in spec.methods:
        res = run_method(pair, METHOD_NAMES[name], kernel, seed=cfg.seed, resamples=spec.resamples)
        out[name] = res.p_value <= spec.alpha
    return g, r, out


def _job(args):
    spec_dict, g, r = args
    return _one_repetition(ExperimentSpec(**spec_dict), g, r)


def run_experiment(spec, parallelism=None, progress=None):
    """Simulate ``repetitions`` datasets per grid point and count rejections.

    ``parallelism`` overrides ``spec.parallelism``. On KeyboardInterrupt the
    counts gathered so far are returned with ``complete=False``.
    """
    workers = spec.parallelism if parallelism is None else parallelism
    counts = {(g, m): 0 for g in range(len(spec.grid)) for m in spec.methods}
    done = {g: 0 for g in range(len(spec.grid))}
    elapsed = {g: 0.0 for g in range(len(spec.grid))}
    jobs = [(g, r) for g in range(len(spec.grid)) for r in range(spec.repetitions)]
    complete = True
    t_start = time.perf_counter()

    def absorb(result, seconds):
        g, _, rejected = result
        done[g] += 1
        elapsed[g] += seconds
        for m, hit in rejected.items():
            counts[g, m] += int(hit)
        if progress is not None:
            progress(sum(done.values()), len(jobs))

    try:
        if workers <= 1:
            for g, r in jobs:
                t0 = time.perf_counter()
                absorb(_one_repetition(spec, g, r), time.perf_counter() - t0)
        else:
            spec_dict = spec.to_dict()
            with ProcessPoolExecutor(max_workers=workers) as pool:
                chunk = max(1, len(jobs) // (8 * workers))
                for result in pool.map(_job, [(spec_dict, g, r) for g, r in jobs], chunksize=chunk):
                    absorb(result, 0.0)
    except KeyboardInterrupt:
        log.warning("interrupted after %d of %d repetitions; report is partial", sum(done.values()), len(jobs))
        complete = False

    cells = [
        Cell(spec.grid[g], m, counts[g, m], done[g])
        for g in range(len(spec.grid))
        for m in spec.methods
    ]
    timings = {"total_seconds": time.perf_counter() - t_start, "per_grid_seconds": [elapsed[g] for g in range(len(spec.grid))]}
    return ExperimentReport(spec, cells, complete, timings)


def _fmt(v):
    return f"{v:.17g}"


def report_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.cells:
        w.writerow([_fmt(c.grid_value), c.method, c.rejections, c.repetitions, _fmt(c.rate), _fmt(c.stderr)])
    return buf.getvalue()


def report_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def report_gnuplot(report):
    """Long format, one blank-line separated block per method (gnuplot ``index``)."""
    blocks = []
    for m in report.spec.methods:
        rows = [f"# method {m}", "# grid_value rate stderr"]
        rows += [f"{_fmt(c.grid_value)} {_fmt(c.rate)} {_fmt(c.stderr)}" for c in report.cells if c.method == m]
        blocks.append("\n".join(rows))
    return "\n\n\n".join(blocks) + "\n"


FORMATTERS = {"csv": report_csv, "json": report_json, "gnuplot": report_gnuplot}


def emit_report(report, path=None, format="csv"):
    """Serialize ``report``; write to ``path`` when given, return the text."""
    if format not in FORMATTERS:
        raise ValueError(f"unknown format {format!r}")
    text = FORMATTERS[format](report)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def report_from_dict(data):
    spec = ExperimentSpec.from_dict(data["config"])
    cells = [Cell(c["grid_value"], c["method"], c["rejections"], c["repetitions"]) for c in data["cells"]]
    return ExperimentReport(spec, cells, data["complete"])


def load_report(text):
    return report_from_dict(json.loads(text))
