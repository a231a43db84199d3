import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlgawalk.errors import RuleError
from qlgawalk.matrices import conference_coin, random_zero_diagonal_unitary
from qlgawalk.qlga import (
    CellSpec,
    Lattice,
    QlgaRule,
    advect,
    build_2d_rule,
    build_meyer_rule,
    build_particle_history_rule,
    build_site_history_rule,
    configuration,
    global_step,
    pair_spec,
    particle_history_memory,
    particle_history_ricochet,
    particle_number,
    scatter_cells,
    sector_mass,
    site_history_memory,
    site_history_ricochet,
)
from qlgawalk.state import LocalUnitary, SparseState, max_deviation

R01, L10, BOTH = 1, 2, 3  # Meyer cell indices |01>, |10>, |11>
VACUUM = SparseState({(): 1})


def cell(x, idx):
    return SparseState({((x, idx),): 1})


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice("ring", 0)
    with pytest.raises(ValueError):
        Lattice("cube")
    assert Lattice.torus(3, 4).wrap((-1, 5)) == (2, 1)


def test_cellspec_validation():
    with pytest.raises(ValueError):
        CellSpec((2, 2), (1,))
    with pytest.raises(ValueError):
        CellSpec((2, 2), ((1, 0), (0, 1)))  # 2D offsets on a line
    with pytest.raises(ValueError):
        CellSpec((2, 2), (1, -1), quiescent_index=3)
    spec = CellSpec((2, 2, 2), (0, 1, -1), occupancy=(None, 1, 1))
    assert spec.cell_dim == 8
    assert spec.digits(5) == (1, 0, 1)
    assert spec.index((1, 0, 1)) == 5
    assert spec.moves == (0, -1, 1)


def test_configuration_canonical_form():
    spec = pair_spec(Lattice.ring(4))
    assert configuration({5: 1, 2: 0, 0: 3}, spec) == ((0, 3), (1, 1))
    with pytest.raises(ValueError):
        configuration({0: 7}, spec)


def test_advection_examples(backend):
    spec = pair_spec(Lattice.line())
    assert advect(cell(4, R01), spec) == cell(5, R01)
    assert advect(cell(4, L10), spec) == cell(3, L10)
    # a doubly occupied cell splits into two movers
    assert advect(cell(0, BOTH), spec) == SparseState({((-1, L10), (1, R01)): 1})
    assert advect(VACUUM, spec) == VACUUM


def test_advection_wraps_on_ring(backend):
    spec = pair_spec(Lattice.ring(5))
    assert advect(cell(4, R01), spec) == cell(0, R01)
    assert advect(cell(0, L10), spec) == cell(4, L10)


def test_site_memory_does_not_move(backend):
    spec = build_site_history_rule(0.1, 0.2, Lattice.ring(6)).spec
    # memory bit at cell 2, right mover at cell 2
    out = advect(cell(2, 0b101), spec)
    assert out == SparseState({((2, 0b100), (3, 0b001)): 1})


def test_meyer_scattering_examples(backend):
    th = 0.8
    rule = build_meyer_rule(th)
    out = scatter_cells(cell(0, R01), rule)
    expect = SparseState({((0, R01),): 1j * np.sin(th), ((0, L10),): np.cos(th)})
    assert max_deviation(out, expect) < 1e-15
    assert scatter_cells(cell(0, BOTH), rule) == cell(0, BOTH)
    assert scatter_cells(VACUUM, rule) == VACUUM


def test_meyer_global_step_examples(backend):
    assert global_step(cell(0, R01), build_meyer_rule(0.0)) == cell(-1, L10)
    out = global_step(cell(0, R01), build_meyer_rule(np.pi / 2))
    assert max_deviation(out, SparseState({((1, R01),): 1j})) < 1e-15


def test_particle_number_examples():
    spec = pair_spec(Lattice.line())
    assert particle_number(((0, 0),), spec) == 0
    assert particle_number(((0, R01),), spec) == 1
    assert particle_number(((0, BOTH),), spec) == 2
    site = build_site_history_rule(0.1, 0.2).spec
    assert particle_number(((0, 0b100),), site) == 0
    assert particle_number(((0, 0b110),), site) == 1


def test_rule_must_fix_quiescent():
    spec = pair_spec(Lattice.line())
    bad = LocalUnitary(np.eye(4)[[1, 0, 2, 3]], ("00", "01", "10", "11"))
    with pytest.raises(RuleError):
        QlgaRule(spec, bad)
    with pytest.raises(RuleError):
        QlgaRule(spec, LocalUnitary(np.eye(8), tuple(range(8))))


def _history_index(n, occ_l, tail_l, occ_r, tail_r):
    """Cell index from occupancy bits and tails (+1 -> bit 0, first slot most significant)."""
    t = 1 << n

    def bits(tail):
        return int("".join("1" if p == -1 else "0" for p in tail), 2)

    return (occ_l * t + bits(tail_l)) * 2 * t + occ_r * t + bits(tail_r)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_history_memory_table_rows(n):
    m = particle_history_memory(n).m
    for u in itertools.product((1, -1), repeat=n):
        for v_front in itertools.product((1, -1), repeat=n - 1):
            # right mover whose scattered slot is +1 keeps moving right
            src = _history_index(n, 0, u, 1, v_front + (1,))
            dst = _history_index(n, 0, u, 1, (1,) + v_front)
            assert m[dst, src] == 1
            # left mover whose scattered slot is +1 turns right, -1 enters its tail
            src = _history_index(n, 1, v_front + (1,), 0, u)
            dst = _history_index(n, 0, u, 1, (-1,) + v_front)
            assert m[dst, src] == 1
            # mirror rows
            src = _history_index(n, 0, u, 1, v_front + (-1,))
            dst = _history_index(n, 1, (1,) + v_front, 0, u)
            assert m[dst, src] == 1
            src = _history_index(n, 1, v_front + (-1,), 0, u)
            dst = _history_index(n, 1, (-1,) + v_front, 0, u)
            assert m[dst, src] == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_history_memory_is_single_particle_permutation(n):
    m = particle_history_memory(n).m
    spec = build_particle_history_rule(n, theta=0.0).spec
    single = [i for i in range(spec.cell_dim) if particle_number(((0, i),), spec) == 1]
    assert len(single) == 2 * 4 ** n
    sub = m[np.ix_(single, single)]
    assert set(np.unique(sub)) <= {0.0, 1.0}
    assert np.all(sub.sum(axis=0) == 1) and np.all(sub.sum(axis=1) == 1)


@pytest.mark.parametrize("n", [1, 2])
def test_history_ricochet_identity_off_single_sector(n):
    m = particle_history_ricochet(n, 0.6).m
    spec = build_particle_history_rule(n, theta=0.0).spec
    for i in range(spec.cell_dim):
        if particle_number(((0, i),), spec) != 1:
            assert m[i, i] == 1 and np.count_nonzero(m[:, i]) == 1


def test_site_history_tables():
    m = site_history_memory(np.pi / 2).m
    for mem in (0, 1):
        assert m[mem * 4, mem * 4] == 1
    # |0>|0>|1> -> i |1>|0>|1>
    assert m[0b101, 0b001] == pytest.approx(1j)
    r = site_history_ricochet(0.3).m
    inv = 1 / np.sqrt(2)
    # unvisited cells use the balanced coin on the mover block
    assert r[0b001, 0b001] == pytest.approx(inv)
    assert r[0b010, 0b001] == pytest.approx(1j * inv)


def test_2d_rule_block_embedding():
    assert np.array_equal(build_2d_rule(LocalUnitary(np.eye(4), tuple("wesn"))).local_s.m,
                          np.eye(16))
    c = conference_coin()
    s = build_2d_rule(c).local_s.m
    assert s[0, 0] == 1
    assert s[0b1000, 0b1000] == c.m[0, 0]
    assert s[0b0100, 0b1000] == c.m[1, 0]
    assert s[0b0001, 0b0010] == c.m[3, 2]
    # multi-particle cells are left alone
    assert s[0b1100, 0b1100] == 1


def _rules():
    rng = np.random.default_rng(3)
    yield build_meyer_rule(0.4, 0.3, 1.1, Lattice.ring(7))
    yield build_particle_history_rule(2, theta=0.7, lattice=Lattice.ring(7))
    yield build_particle_history_rule(1, thetas=[0.2, 0.9], lattice=Lattice.ring(7))
    yield build_site_history_rule(0.5, 0.9, Lattice.ring(5))
    yield build_2d_rule(random_zero_diagonal_unitary(rng), Lattice.torus(4, 4))


@pytest.mark.parametrize("rule", list(_rules()), ids=["meyer", "ph2", "ph1-sched", "site", "2d"])
def test_quiescent_fixed_and_particles_conserved(rule, backend):
    for k in range(3):
        assert global_step(VACUUM, rule, k) == VACUUM
    rng = np.random.default_rng(0)
    spec = rule.spec
    # arbitrary configurations, including multi-particle ones
    amps = {}
    for _ in range(4):
        cells = {}
        for _ in range(2):
            if spec.lattice.ndim == 1:
                xy = int(rng.integers(spec.lattice.size))
            else:
                xy = tuple(int(rng.integers(s)) for s in spec.lattice.size)
            cells[xy] = int(rng.integers(1, spec.cell_dim))
        amps[configuration(cells)] = complex(*rng.standard_normal(2))
    state = SparseState(amps).normalized()
    before = sector_mass(state, spec)
    # multi-particle supports grow combinatorially; a few steps suffice
    for k in range(4):
        state = global_step(state, rule, k)
    after = sector_mass(state, spec)
    assert before.keys() == after.keys()
    for n in before:
        assert after[n] == pytest.approx(before[n], abs=1e-12)


@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi),
       st.lists(st.tuples(st.integers(-5, 5), st.integers(1, 3)), min_size=1, max_size=4,
                unique_by=lambda c: c[0]))
@settings(max_examples=40, deadline=None)
def test_meyer_step_is_unitary_on_configurations(theta, alpha, beta, cells):
    rule = build_meyer_rule(theta, alpha, beta)
    s = SparseState({configuration(dict(cells)): 1})
    out = global_step(s, rule)
    assert out.norm2() == pytest.approx(1, abs=1e-12)
    assert sector_mass(out, rule.spec) == pytest.approx(sector_mass(s, rule.spec), abs=1e-12)


def test_time_schedule_cycles():
    rule = build_particle_history_rule(1, thetas=[0.1, 0.2, 0.3])
    assert rule.matrix_for_step(4) is rule.time_schedule[1]
    with pytest.raises(ValueError):
        build_particle_history_rule(1)
    with pytest.raises(ValueError):
        build_particle_history_rule(1, thetas=[])
