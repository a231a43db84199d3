import numpy as np
import pytest

from qlgawalk.analysis import (
    Distribution,
    emit_csv,
    fmt,
    position_distribution,
    spread_series,
    write_atomic,
)
from qlgawalk.correspondence import embed, embedding_for
from qlgawalk.matrices import conference_coin
from qlgawalk.state import SparseState
from qlgawalk.walks import StandardLabel, TwoDLabel, build_2d, build_standard, symmetric_initial


def test_distribution_examples():
    assert position_distribution(SparseState({StandardLabel(0, 1): 1})).support == ((0, 1.0),)
    s = SparseState({StandardLabel(2, 1): 0.5, StandardLabel(0, -1): 0.5j,
                     StandardLabel(0, 1): -0.5, StandardLabel(-2, -1): 0.5j})
    assert position_distribution(s).support == ((-2, 0.25), (0, 0.5), (2, 0.25))


def test_distribution_of_configuration_state():
    model = build_standard(0.3)
    e = embedding_for(model)
    s = embed(e, SparseState({StandardLabel(4, -1): 0.6, StandardLabel(1, 1): 0.8}))
    d = position_distribution(s, e)
    assert d.as_dict() == pytest.approx({1: 0.64, 4: 0.36})
    with pytest.raises(ValueError):
        position_distribution(s)


def test_2d_distribution():
    s = SparseState({TwoDLabel(0, 1, "n"): 0.6, TwoDLabel(-1, 0, "w"): 0.8})
    d = position_distribution(s)
    assert d.dims == 2
    assert d.support == (((-1, 0), pytest.approx(0.64)), ((0, 1), pytest.approx(0.36)))
    with pytest.raises(ValueError):
        d.moments()


def test_moments():
    d = Distribution(((-1, 0.5), (1, 0.5)))
    assert d.moments() == (0.0, 1.0)
    assert Distribution(()).moments() == (0.0, 0.0)


def test_theta_zero_has_no_spread():
    series = spread_series(build_standard(0.0), SparseState({StandardLabel(0, 1): 1}), 20)
    assert all(sd == 0 for _, _, sd in series.rows)
    assert all(m == t for t, m, _ in series.rows)


def test_spread_slope_matches_asymptotic_velocity():
    # for the coin with |diagonal| = cos(theta) and a parity-symmetric start,
    # stddev / t tends to sqrt(1 - cos(theta))
    theta = np.pi / 4
    series = spread_series(build_standard(theta), symmetric_initial(), 200, (50, 200))
    assert series.slope == pytest.approx(np.sqrt(1 - np.cos(theta)), abs=2e-3)
    assert series.r2 > 0.9999
    assert series.stddev(200) / series.stddev(50) == pytest.approx(4, abs=0.05)
    # a sqrt(t) curve would only double over the same window
    assert np.sqrt(200) / np.sqrt(50) == pytest.approx(2)


def test_spread_window_validation():
    with pytest.raises(ValueError):
        spread_series(build_standard(0.1), symmetric_initial(), 10, (5, 11))


def test_csv_formats(tmp_path):
    emit_csv(Distribution(((0, 1.0),)), tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_bytes() == b"position,probability\n0,1\n"
    emit_csv(Distribution(()), tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_text() == "position,probability\n"
    emit_csv(Distribution((((0, 1), 0.25),), dims=2), tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text() == "x,y,probability\n0,1,0.25\n"
    series = spread_series(build_standard(0.5), symmetric_initial(), 4)
    emit_csv(series, tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "t,mean,stddev"
    with pytest.raises(TypeError):
        emit_csv(object(), tmp_path / "e.csv")


def test_csv_is_deterministic(tmp_path):
    model = build_2d("non_reversing", conference_coin())
    outs = []
    for k in range(2):
        state = model.fresh().run(SparseState({TwoDLabel(0, 0, "e"): 1}), 12)
        emit_csv(position_distribution(state), tmp_path / f"{k}.csv")
        outs.append((tmp_path / f"{k}.csv").read_bytes())
    assert outs[0] == outs[1]


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, 2.0):
        assert float(fmt(v)) == v


def test_write_atomic_leaves_no_temp(tmp_path):
    write_atomic(tmp_path / "sub" / "x.txt", "hello\n")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["x.txt"]
