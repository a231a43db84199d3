"""Fixed desk-scale property suites behind ``qlgawalk verify``."""

from __future__ import annotations

import time
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .correspondence import check_equivalence, embed, embedding_for, project
from .matrices import (
    back_action,
    balanced,
    conference_coin,
    direction_swap,
    memory_update,
    meyer_scattering,
    non_repeating,
    non_reversing,
    random_zero_diagonal_unitary,
    symmetric_scattering,
)
from .oracle import compare_basis_columns
from .qlga import (
    Lattice,
    build_2d_rule,
    build_meyer_rule,
    build_particle_history_rule,
    build_site_history_rule,
    configuration,
    global_step,
    particle_history_memory,
    particle_history_ricochet,
    sector_mass,
    site_history_memory,
    site_history_ricochet,
)
from .state import SparseState, unitarity_error
from .walks import (
    build_2d,
    build_mcgettrick,
    build_particle_history,
    build_site_history,
    build_standard,
    site_scattering,
)

__all__ = ["Check", "SUITES", "run_suite", "format_table", "random_single_particle"]

SEED = 20240611
UNITARY_TOL = 1e-12
LEAK_TOL = 1e-12
EQUIV_TOL = 1e-10
ORACLE_TOL = 1e-12


class Check(NamedTuple):
    suite: str
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        # tol 0 means the check must hold exactly
        return bool(self.value <= self.tol if self.tol == 0 else self.value < self.tol)


def _rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


def local_unitaries() -> Iterator[tuple[str, np.ndarray]]:
    """Every builder's matrices at fixed sample parameters."""
    rng = _rng()
    for th in np.linspace(0, 2 * np.pi, 20, endpoint=False):
        yield f"S(theta={th:.3f})", symmetric_scattering(th).m
    for th in (0.0, np.pi / 4, np.pi / 3, 1.0):
        yield f"U_M({th:.3f})", memory_update(th).m
        yield f"U_1({th:.3f})", back_action(th).m
    yield "U_0", balanced().m
    grid = np.linspace(0, 2 * np.pi, 4, endpoint=False)
    for th in grid:
        for a in grid:
            for b in grid:
                yield f"Meyer({th:.2f},{a:.2f},{b:.2f})", meyer_scattering(th, a, b).m
    for n in (1, 2, 3):
        yield f"history M (tail {n})", particle_history_memory(n).m
        yield f"history R (tail {n})", particle_history_ricochet(n, np.pi / 5).m
    for tm, tb in ((np.pi / 4, np.pi / 3), (0.3, 1.1)):
        yield f"site RM ({tm:.2f},{tb:.2f})", site_scattering(tm, tb).m
        yield f"site M cell ({tm:.2f})", site_history_memory(tm).m
        yield f"site R cell ({tb:.2f})", site_history_ricochet(tb).m
    yield "J", direction_swap().m
    yield "conference C", non_repeating(conference_coin()).m
    for k in range(5):
        c = random_zero_diagonal_unitary(rng)
        yield f"random C^rep #{k}", non_repeating(c).m
        yield f"random C^rev #{k}", non_reversing(c).m
        yield f"2D cell #{k}", build_2d_rule(c).local_s.m


def suite_unitarity() -> list[Check]:
    return [Check("unitarity", name, unitarity_error(m), UNITARY_TOL)
            for name, m in local_unitaries()]


def conservation_rules():
    """``(name, rule)`` for each lattice-gas rule at desk scale."""
    rng = _rng()
    yield "meyer", build_meyer_rule(np.pi / 3, 0.4, -0.7, Lattice.ring(16))
    yield "particle-history tail 1", build_particle_history_rule(1, theta=np.pi / 4,
                                                                 lattice=Lattice.ring(16))
    yield "particle-history tail 2 cycled", build_particle_history_rule(
        2, thetas=[np.pi / 4, 0.3, 1.2], lattice=Lattice.ring(16))
    yield "site-history", build_site_history_rule(np.pi / 4, np.pi / 3, Lattice.ring(8))
    yield "2D", build_2d_rule(random_zero_diagonal_unitary(rng), Lattice.torus(8, 8))


def _cell_kind(spec, idx: int) -> str:
    """``single``, ``memory`` (no particle, static subcells only) or ``other``."""
    n = 0
    for dg, d, occ in zip(spec.digits(idx), spec.subcell_dims, spec.occupancy):
        if occ is None:
            continue
        bit = (dg // occ) % 2
        if not bit and dg:
            return "other"  # empty subcell carrying a tail: a free vacuum excitation
        n += bit
    return {0: "memory", 1: "single"}.get(n, "other")


def random_single_particle(rule, rng: np.random.Generator, terms: int = 4) -> SparseState:
    """Random normalized superposition of single-particle configurations.

    Empty subcells are quiescent; static cell values (site memory) are
    sprinkled on other cells when the rule has any.
    """
    spec = rule.spec
    kinds: dict[str, list[int]] = {}
    for i in range(1, spec.cell_dim):
        kinds.setdefault(_cell_kind(spec, i), []).append(i)
    singles, dressing = kinds["single"], kinds.get("memory", [])
    size = spec.lattice.size

    def coord():
        if spec.lattice.ndim == 1:
            return int(rng.integers(size))
        return tuple(int(rng.integers(s)) for s in size)

    amps: dict = {}
    for _ in range(terms):
        cells = {}
        if dressing:
            for _ in range(int(rng.integers(3))):
                cells[coord()] = int(rng.choice(dressing))
        cells[coord()] = int(rng.choice(singles))
        amps[configuration(cells)] = complex(*rng.standard_normal(2))
    return SparseState(amps).normalized()


def suite_conservation(steps: int = 100) -> list[Check]:
    rng = _rng()
    out = []
    for name, rule in conservation_rules():
        vac = SparseState({(): 1.0})
        moved = max(abs(global_step(vac, rule, k).amplitude(()) - 1) for k in range(3))
        out.append(Check("conservation", f"{name}: quiescent fixed", moved, 0.0))
        state = random_single_particle(rule, rng)
        leak = 0.0
        norm = 0.0
        for k in range(steps):
            state = global_step(state, rule, k)
            mass = sector_mass(state, rule.spec)
            leak = max(leak, sum(v for n, v in mass.items() if n != 1))
            norm = max(norm, abs(state.norm2() - 1))
        out.append(Check("conservation", f"{name}: leakage over {steps} steps", leak, LEAK_TOL))
        out.append(Check("conservation", f"{name}: |norm - 1|", norm, 1e-9))
    return out


def equivalence_models():
    rng = _rng()
    c = random_zero_diagonal_unitary(rng)
    yield "standard pi/4", build_standard(np.pi / 4)
    yield "particle-history N=2", build_particle_history(2, [np.pi / 4])
    yield "particle-history N=3 cycled", build_particle_history(3, [np.pi / 4, 0.3, 1.0],
                                                                 "cycled")
    yield "site-history n=8", build_site_history(8, np.pi / 4, np.pi / 3)
    yield "2D non-repeating", build_2d("non_repeating", c)
    yield "2D non-reversing", build_2d("non_reversing", c)


def suite_equivalence(steps: int = 30, n_states: int = 3) -> list[Check]:
    rng = _rng()
    out = []
    for name, model in equivalence_models():
        e = embedding_for(model)
        worst = 0.0
        for _ in range(n_states):
            rep = check_equivalence(model, e, model.random_state(rng), steps, EQUIV_TOL)
            worst = max(worst, rep.max_deviation, rep.max_leakage,
                        np.inf if rep.diagnosis else 0.0)
        out.append(Check("equivalence", f"{name}: {steps} steps x {n_states} states",
                         worst, EQUIV_TOL))
        # round trip through the sector
        init = model.random_state(rng)
        back = project(e, embed(e, init)).state
        out.append(Check("equivalence", f"{name}: embed/project round trip",
                         max(abs(back.amplitude(k) - v) for k, v in init.items()), 0.0))
    return out


def oracle_models():
    yield "standard ring-8", build_standard(np.pi / 4, period=8)
    yield "particle-history N=2 ring-8", build_particle_history(2, [np.pi / 4], period=8)
    yield "particle-history N=3 cycled ring-5", build_particle_history(
        3, [np.pi / 4, 0.3, 1.0], "cycled", period=5)
    yield "mcgettrick N=1 ring-8", build_mcgettrick(1, symmetric_scattering(np.pi / 3, ("0", "1")),
                                                    period=8)
    yield "site-history n=4", build_site_history(4, np.pi / 4, np.pi / 3)
    yield "2D torus 6x6", build_2d("non_reversing", conference_coin(), torus=(6, 6))


def suite_oracle() -> list[Check]:
    out = []
    for name, model in oracle_models():
        worst = max(compare_basis_columns(model, k) for k in range(3))
        out.append(Check("oracle", name, worst, ORACLE_TOL))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "unitarity": suite_unitarity,
    "conservation": suite_conservation,
    "equivalence": suite_equivalence,
    "oracle": suite_oracle,
}


def run_suite(name: str) -> tuple[list[Check], float]:
    """Run one suite (or ``all``); return the checks and elapsed seconds."""
    if name != "all" and name not in SUITES:
        raise KeyError(name)
    names = list(SUITES) if name == "all" else [name]
    t0 = time.perf_counter()
    checks = [c for n in names for c in SUITES[n]()]
    return checks, time.perf_counter() - t0


def format_table(checks: list[Check]) -> str:
    width = max((len(c.name) for c in checks), default=10)
    lines = [f"{'suite':<12} {'check':<{width}} {'value':>10} {'tol':>8}  result"]
    for c in checks:
        lines.append(f"{c.suite:<12} {c.name:<{width}} {c.value:>10.2e} {c.tol:>8.0e}  "
                     f"{'PASS' if c.passed else 'FAIL'}")
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} passed")
    return "\n".join(lines)
