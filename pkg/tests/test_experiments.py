import json

import pytest

from shifthsic.errors import SpecError
from shifthsic.experiments import (
    Cell,
    ExperimentReport,
    ExperimentSpec,
    emit_report,
    load_report,
    run_experiment,
)

SMALL = dict(design="fp_vs_ar", grid=[0.2, 0.8], n=120, repetitions=3, burn_in=50, resamples=100, master_seed=7)


def test_single_cell():
    spec = ExperimentSpec(design="tp_vs_extinction", grid=[0.9], n=100, repetitions=1, methods=["shift_hsic", "correlation"],
                          burn_in=20)
    report = run_experiment(spec)
    assert [(c.grid_value, c.method) for c in report.cells] == [(0.9, "shift_hsic"), (0.9, "correlation")]
    assert all(c.repetitions == 1 for c in report.cells)
    assert report.complete


def test_csv_columns_and_rate():
    report = run_experiment(ExperimentSpec(**SMALL))
    lines = emit_report(report, format="csv").splitlines()
    assert lines[0] == "grid_value,method,rejections,repetitions,rate,stderr"
    assert len(lines) == 1 + 2 * 3
    for line in lines[1:]:
        _, _, rej, reps, rate, se = line.split(",")
        assert float(rate) == int(rej) / int(reps)
        assert float(se) == pytest.approx((float(rate) * (1 - float(rate)) / int(reps)) ** 0.5)


def test_empty_report_is_header_only():
    report = ExperimentReport(ExperimentSpec(**SMALL), [])
    assert emit_report(report, format="csv") == "grid_value,method,rejections,repetitions,rate,stderr\n"


def test_json_roundtrip_byte_identical(tmp_path):
    report = run_experiment(ExperimentSpec(**SMALL))
    text = emit_report(report, tmp_path / "r.json", format="json")
    assert (tmp_path / "r.json").read_text() == text
    assert emit_report(load_report(text), format="json") == text


def test_gnuplot_blocks():
    report = ExperimentReport(ExperimentSpec(**SMALL), [Cell(0.2, "shift_hsic", 1, 4), Cell(0.8, "shift_hsic", 0, 4)])
    text = emit_report(report, format="gnuplot")
    assert "# method shift_hsic" in text
    assert "0.20000000000000001 0.25 0.21650635094610965" in text


def test_reproducible_across_parallelism():
    spec = ExperimentSpec(**SMALL)
    a = emit_report(run_experiment(spec, parallelism=1), format="json")
    b = emit_report(run_experiment(spec, parallelism=3), format="json")
    assert a == b


def test_stderr_formula():
    c = Cell(0.5, "m", 30, 100)
    assert c.rate == 0.3
    assert c.stderr == pytest.approx((0.3 * 0.7 / 100) ** 0.5)


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"design": "tp"}, "design"),
        ({"grid": []}, "grid"),
        ({"grid": [1.5]}, "grid"),
        ({"repetitions": 0}, "repetitions"),
        ({"alpha": 1.0}, "alpha"),
        ({"methods": ["kcsd"]}, "methods"),
        ({"resamples": 10}, "resamples"),
        ({"colour": "red"}, "colour"),
    ],
)
def test_spec_validation(patch, field):
    with pytest.raises(SpecError) as info:
        ExperimentSpec.from_dict({**SMALL, **patch})
    assert info.value.field == field


def test_spec_missing_and_bad_json():
    with pytest.raises(SpecError, match="design"):
        ExperimentSpec.from_dict({"grid": [0.1]})
    with pytest.raises(SpecError, match="spec"):
        ExperimentSpec.from_json("{not json")


def test_seed_derivation_stable():
    spec = ExperimentSpec(**SMALL)
    assert spec.process_config(1, 2).seed == ExperimentSpec(**SMALL).process_config(1, 2).seed
    assert spec.process_config(1, 0).seed != spec.process_config(0, 1).seed
    assert spec.process_config(0, 0).coupling == "independent"
    assert spec.process_config(1, 0).ar_coeff == 0.8


def test_interrupt_returns_partial(monkeypatch):
    import shifthsic.experiments as ex

    calls = {"n": 0}
    real = ex._one_repetition

    def flaky(spec, g, r):
        calls["n"] += 1
        if calls["n"] == 3:
            raise KeyboardInterrupt
        return real(spec, g, r)

    monkeypatch.setattr(ex, "_one_repetition", flaky)
    report = run_experiment(ExperimentSpec(**SMALL))
    assert not report.complete
    assert sum(c.repetitions for c in report.cells if c.method == "shift_hsic") == 2
