import numpy as np
import pytest
from numpy.testing import assert_array_equal

from shifthsic.errors import EmptyInput, NoOverlap, OrderError, ParseError, TooShort
from shifthsic.ingest import (
    RegularSeries,
    TickSeries,
    align,
    difference,
    granulate,
    load_csv,
    load_pair_csv,
    product,
    write_pair_csv,
)
from shifthsic.statistic import SeriesPair


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_well_formed(tmp_path):
    ticks = load_csv(write(tmp_path, "eurusd.csv", "timestamp_ms,price\n10,1.5\n20,1.6\n35,1.4\n"))
    assert ticks.name == "eurusd"
    assert_array_equal(ticks.timestamps, [10, 20, 35])
    assert_array_equal(ticks.prices, [1.5, 1.6, 1.4])


def test_load_without_header(tmp_path):
    ticks = load_csv(write(tmp_path, "a.csv", "10,1.5\n20,1.6\n"))
    assert ticks.prices.size == 2


def test_bad_price_names_line(tmp_path):
    with pytest.raises(ParseError, match="line 3") as info:
        load_csv(write(tmp_path, "a.csv", "timestamp_ms,price\n10,1.5\n20,abc\n"))
    assert info.value.line == 3


def test_negative_price_rejected(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        load_csv(write(tmp_path, "a.csv", "10,1.5\n20,-1\n"))


def test_duplicate_timestamp(tmp_path):
    with pytest.raises(OrderError):
        load_csv(write(tmp_path, "a.csv", "10,1.5\n10,1.6\n"))


def test_granulate_windows():
    ticks = TickSeries([10, 50, 130], [1.0, 2.0, 3.0])
    drop = granulate(ticks, 60, "drop")
    assert drop.start == 0
    assert_array_equal(drop.values[[0, 2]], [2.0, 3.0])
    assert np.isnan(drop.values[1])
    carry = granulate(ticks, 60)
    assert_array_equal(carry.values, [2.0, 2.0, 3.0])
    assert carry.meta["gap_policy"] == "carry_forward"


def test_granulate_one_tick_per_window_is_identity():
    prices = [1.0, 1.1, 0.9, 1.3]
    reg = granulate(TickSeries([0, 125, 240, 399], prices), 120)
    assert_array_equal(reg.values, prices)


def test_granulate_idempotent_on_regular_series():
    reg = granulate(TickSeries([120, 240, 360, 480], [1.0, 2.0, 1.5, 1.2]), 120)
    again = granulate(TickSeries(reg.timestamps, reg.values), 120)
    assert again.start == reg.start
    assert_array_equal(again.values, reg.values)


def test_granulate_empty():
    with pytest.raises(EmptyInput):
        granulate(TickSeries([], []), 60)


def test_difference():
    s = RegularSeries(0, 10, [1.0, 3.0, 6.0])
    d = difference(s)
    assert_array_equal(d.values, [2.0, 3.0])
    assert d.start == 10
    assert_array_equal(difference(RegularSeries(0, 1, [4.0] * 5)).values, np.zeros(4))
    with pytest.raises(TooShort):
        difference(RegularSeries(0, 1, [1.0]))


def test_difference_cumsum_inverse(rng):
    v = rng.standard_normal(20)
    d = difference(RegularSeries(0, 1, v)).values
    np.testing.assert_allclose(np.concatenate([[0], np.cumsum(d)]), v - v[0], atol=1e-12)


def test_align_identical_grids():
    a = RegularSeries(0, 10, [1.0, 2.0, 3.0], "a")
    b = RegularSeries(0, 10, [4.0, 5.0, 6.0], "b")
    pair = align(a, b)
    assert pair.n == 3
    assert pair.labels == ("a", "b")
    assert_array_equal(pair.timestamps, [0, 10, 20])


def test_align_partial_and_disjoint():
    a = RegularSeries(0, 10, [1.0, 2.0, 3.0])
    assert align(a, RegularSeries(20, 10, [9.0, 8.0])).n == 1
    with pytest.raises(NoOverlap):
        align(a, RegularSeries(100, 10, [1.0]))


def test_align_drops_gap_slots():
    a = granulate(TickSeries([10, 130, 190], [1.0, 3.0, 4.0]), 60, "drop")
    b = RegularSeries(0, 60, [5.0, 6.0, 7.0, 8.0])
    pair = align(a, b)
    assert_array_equal(pair.x, [1.0, 3.0, 4.0])
    assert_array_equal(pair.y, [5.0, 7.0, 8.0])
    assert_array_equal(pair.timestamps, [0, 120, 180])


def test_product_then_difference():
    a = RegularSeries(0, 10, [1.0, 2.0, 4.0], "audcad")
    b = RegularSeries(0, 10, [3.0, 3.0, 0.5], "cadjpy")
    p = product(a, b)
    assert_array_equal(p.values, [3.0, 6.0, 2.0])
    assert_array_equal(difference(p).values, [3.0, -4.0])


def test_pipeline_determinism_and_roundtrip(tmp_path, rng):
    stamps = np.cumsum(rng.integers(1, 90000, 300))
    text = "timestamp_ms,price\n" + "".join(f"{t},{float(p)!r}\n" for t, p in zip(stamps, 1 + rng.random(300)))
    path = write(tmp_path, "t.csv", text)

    def run(out):
        s = difference(granulate(load_csv(path), 120000))
        pair = align(s, s)
        write_pair_csv(out, pair)
        return out.read_bytes()

    first = run(tmp_path / "a.csv")
    assert first == run(tmp_path / "b.csv")
    back = load_pair_csv(tmp_path / "a.csv")
    s = difference(granulate(load_csv(path), 120000))
    assert_array_equal(back.x, s.values)


def test_write_pair_without_timestamps(tmp_path):
    write_pair_csv(tmp_path / "p.csv", SeriesPair([0.1, 0.2], [1.0, 2.0]))
    assert (tmp_path / "p.csv").read_text().splitlines()[1] == "0,0.10000000000000001,1"
