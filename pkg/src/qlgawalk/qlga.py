"""Quantum lattice-gas automata on finite configurations.

A cell is a tensor product of subcells; the cell basis index is the
lexicographic product of subcell digits with subcell 0 the most significant
digit. Index 0 (every subcell in its 0 state) is the quiescent cell.

A configuration is a tuple of ``(coord, cell_index)`` pairs, sorted by
coordinate, listing only the active (non-quiescent) cells. One evolution
step scatters every cell with the local unitary and then moves the value of
subcell ``j`` at cell ``x + e_j`` into cell ``x``, so occupied subcells
travel by ``-e_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _backend
from .errors import RuleError
from .matrices import (
    balanced,
    back_action,
    memory_update,
    meyer_scattering,
    pair_ricochet,
    symmetric_scattering,
)
from .state import LocalUnitary, SparseState

__all__ = [
    "Lattice",
    "CellSpec",
    "QlgaRule",
    "configuration",
    "advect",
    "scatter_cells",
    "global_step",
    "evolve",
    "particle_number",
    "sector_mass",
    "pair_spec",
    "build_meyer_rule",
    "ONE_HOT_2D",
    "build_particle_history_rule",
    "build_site_history_rule",
    "build_2d_rule",
    "particle_history_ricochet",
    "particle_history_memory",
    "site_history_memory",
    "site_history_ricochet",
]


@dataclass(frozen=True)
class Lattice:
    """Cell lattice: ``line`` (Z), ``ring`` (Z_n), ``plane`` (Z^2) or ``torus``."""

    kind: str = "line"
    size: int | tuple[int, int] | None = None

    def __post_init__(self):
        if self.kind in ("line", "plane"):
            if self.size is not None:
                raise ValueError(f"{self.kind} lattice takes no size")
        elif self.kind == "ring":
            if not isinstance(self.size, (int, np.integer)) or self.size < 1:
                raise ValueError("ring lattice needs a positive integer size")
        elif self.kind == "torus":
            if (not isinstance(self.size, tuple) or len(self.size) != 2
                    or min(self.size) < 1):
                raise ValueError("torus lattice needs a (nx, ny) size")
        else:
            raise ValueError(f"unknown lattice kind {self.kind!r}")

    @classmethod
    def line(cls):
        return cls("line")

    @classmethod
    def ring(cls, n: int):
        return cls("ring", int(n))

    @classmethod
    def plane(cls):
        return cls("plane")

    @classmethod
    def torus(cls, nx: int, ny: int):
        return cls("torus", (int(nx), int(ny)))

    @property
    def ndim(self) -> int:
        return 1 if self.kind in ("line", "ring") else 2

    @property
    def period(self):
        return self.size

    def wrap(self, coord):
        if self.kind == "ring":
            return coord % self.size
        if self.kind == "torus":
            return (coord[0] % self.size[0], coord[1] % self.size[1])
        return coord


@dataclass(frozen=True)
class CellSpec:
    """Subcell layout and neighborhood of a QLGA cell.

    ``occupancy[j]`` is the place value of the occupancy bit inside subcell
    ``j``'s digit, or ``None`` for subcells that carry no particle (site
    memory). ``particle_number`` counts only occupancy bits.
    """

    subcell_dims: tuple[int, ...]
    neighborhood: tuple
    lattice: Lattice = field(default_factory=Lattice.line)
    quiescent_index: int = 0
    occupancy: tuple | None = None
    subcell_names: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subcell_dims)
        if not dims or min(dims) < 1:
            raise ValueError("subcell dims must be positive")
        object.__setattr__(self, "subcell_dims", dims)
        if len(self.neighborhood) != len(dims):
            raise ValueError(
                f"neighborhood has {len(self.neighborhood)} offsets for {len(dims)} subcells")
        nb = tuple(tuple(e) if isinstance(e, (tuple, list)) else int(e)
                   for e in self.neighborhood)
        for e in nb:
            if isinstance(e, tuple) != (self.lattice.ndim == 2):
                raise ValueError(f"offset {e!r} does not match a {self.lattice.kind} lattice")
        object.__setattr__(self, "neighborhood", nb)
        if self.quiescent_index != 0:
            raise ValueError("the quiescent cell must be the all-zero subcell assignment (index 0)")
        occ = self.occupancy if self.occupancy is not None else (1,) * len(dims)
        if len(occ) != len(dims):
            raise ValueError("occupancy needs one entry per subcell")
        object.__setattr__(self, "occupancy", tuple(occ))
        strides = []
        s = 1
        for d in reversed(dims):
            strides.append(s)
            s *= d
        object.__setattr__(self, "_strides", tuple(reversed(strides)))
        object.__setattr__(self, "_cell_dim", s)
        if isinstance(nb[0], tuple):
            moves = tuple((-e[0], -e[1]) for e in nb)
        else:
            moves = tuple(-e for e in nb)
        object.__setattr__(self, "_moves", moves)

    @property
    def strides(self) -> tuple[int, ...]:
        return self._strides

    @property
    def cell_dim(self) -> int:
        return self._cell_dim

    @property
    def moves(self):
        """Displacement of each subcell's value per advection step (``-e_j``)."""
        return self._moves

    def digits(self, idx: int) -> tuple[int, ...]:
        return tuple((idx // s) % d for s, d in zip(self._strides, self.subcell_dims))

    def index(self, digits: Sequence[int]) -> int:
        if len(digits) != len(self.subcell_dims):
            raise ValueError("wrong number of subcell digits")
        idx = 0
        for dg, s, d in zip(digits, self._strides, self.subcell_dims):
            if not 0 <= dg < d:
                raise ValueError(f"digit {dg} out of range for subcell dim {d}")
            idx += dg * s
        return idx


@dataclass(frozen=True, eq=False)
class QlgaRule:
    """Cell specification plus the local scattering.

    ``time_schedule``, when nonempty, replaces ``local_s`` with
    ``time_schedule[step_index % len]`` at each step.
    """

    spec: CellSpec
    local_s: LocalUnitary
    time_schedule: tuple[LocalUnitary, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "time_schedule", tuple(self.time_schedule))
        for u in (self.local_s,) + self.time_schedule:
            if u.dim != self.spec.cell_dim:
                raise RuleError(f"local unitary dim {u.dim} != cell dim {self.spec.cell_dim}")
            q = self.spec.quiescent_index
            col = u.m[:, q]
            row = u.m[q, :]
            e = np.zeros(u.dim)
            e[q] = 1
            if not (np.array_equal(col, e) and np.array_equal(row, e)):
                raise RuleError("local scattering must fix the quiescent cell exactly")

    def matrix_for_step(self, step_index: int) -> LocalUnitary:
        if self.time_schedule:
            return self.time_schedule[step_index % len(self.time_schedule)]
        return self.local_s


def configuration(cells: Mapping, spec: CellSpec | None = None) -> tuple:
    """Canonical configuration label from ``{coord: cell_index}``.

    Quiescent entries are dropped; coordinates are wrapped on periodic
    lattices when ``spec`` is given.
    """
    items = {}
    for coord, idx in cells.items():
        if isinstance(coord, list):
            coord = tuple(coord)
        if spec is not None:
            if not 0 <= idx < spec.cell_dim:
                raise ValueError(f"cell index {idx} out of range")
            coord = spec.lattice.wrap(coord)
        if idx:
            if coord in items:
                raise ValueError(f"duplicate coordinate {coord!r}")
            items[coord] = int(idx)
    return tuple(sorted(items.items()))


def advect(config_state: SparseState, spec: CellSpec) -> SparseState:
    """Shift every subcell value by ``-e_j``; a pure basis permutation."""
    out = _backend.kernels.advect(
        config_state._entries, spec.strides, spec.subcell_dims, spec.moves,
        spec.lattice.period)
    return config_state.with_entries(out)


def scatter_cells(config_state: SparseState, rule: QlgaRule, step_index: int = 0) -> SparseState:
    """Apply the (scheduled) local scattering at every active cell."""
    u = rule.matrix_for_step(step_index)
    return config_state.with_entries(
        _backend.kernels.scatter_cells(config_state._entries, u.columns))


def global_step(config_state: SparseState, rule: QlgaRule, step_index: int = 0) -> SparseState:
    """One step of the global evolution: scatter, then advect."""
    out = advect(scatter_cells(config_state, rule, step_index), rule.spec)
    if out.prune_epsilon > 0:
        out = out.with_entries(_backend.kernels.prune(out._entries, out.prune_epsilon))
    return out


def evolve(config_state: SparseState, rule: QlgaRule, steps: int, start: int = 0):
    """Yield the state after each of ``steps`` global steps."""
    s = config_state
    for k in range(start, start + steps):
        s = global_step(s, rule, k)
        yield s


def particle_number(config: tuple, spec: CellSpec) -> int:
    """Total count of occupied occupancy bits over all cells."""
    n = 0
    for _, idx in config:
        for s, d, occ in zip(spec.strides, spec.subcell_dims, spec.occupancy):
            if occ is None:
                continue
            n += ((idx // s) % d // occ) % 2
    return n


def sector_mass(config_state: SparseState, spec: CellSpec) -> dict[int, float]:
    """Probability mass per particle number."""
    out: dict[int, float] = {}
    for cfg, a in config_state.items():
        n = particle_number(cfg, spec)
        out[n] = out.get(n, 0.0) + abs(a) ** 2
    return out


# -- concrete rules ----------------------------------------------------------

def pair_spec(lattice: Lattice) -> CellSpec:
    """Two-subcell cell (left mover, right mover) used by the Meyer rule."""
    return CellSpec((2, 2), (1, -1), lattice, occupancy=(1, 1), subcell_names=("l", "r"))


def build_meyer_rule(theta: float, alpha: float = 0.0, beta: float = 0.0,
                     lattice: Lattice | None = None) -> QlgaRule:
    """Two-subcell rule with the particle-conserving 4x4 scattering.

    Subcell ``l`` has offset +1 (its particle moves left), subcell ``r``
    offset -1 (moves right).
    """
    return QlgaRule(pair_spec(lattice or Lattice.line()), meyer_scattering(theta, alpha, beta))


def _tail_str(bits: int, n: int) -> str:
    return "".join("-" if (bits >> (n - 1 - k)) & 1 else "+" for k in range(n))


def _history_basis(n: int) -> tuple[str, ...]:
    t = 1 << n
    names = []
    for w1 in range(2 * t):
        for w2 in range(2 * t):
            names.append(f"{w1 // t}{_tail_str(w1 % t, n)}|{w2 // t}{_tail_str(w2 % t, n)}")
    return tuple(names)


def particle_history_ricochet(n: int, theta: float) -> LocalUnitary:
    """Scatter the oldest tail slot of the occupied subcell of a single-particle cell.

    Cell layout ``W1 (x) W2`` with ``W = C^2 (x) (C^2)^n``: an occupancy bit
    followed by an ``n``-slot velocity tail (bit 0 = +1, bit 1 = -1).
    Identity on empty and doubly occupied cells.
    """
    if n < 1:
        raise ValueError("tail length must be >= 1")
    ub = symmetric_scattering(theta).m
    t = 1 << n
    w = 2 * t
    dim = w * w
    m = np.zeros((dim, dim), dtype=np.complex128)
    for idx in range(dim):
        w1, w2 = divmod(idx, w)
        l, u = divmod(w1, t)
        r, v = divmod(w2, t)
        if (l, r) == (0, 1):
            b = v & 1
            for b2 in (0, 1):
                out = w1 * w + r * t + (v & ~1) + b2
                m[out, idx] += ub[b2, b]
        elif (l, r) == (1, 0):
            b = u & 1
            for b2 in (0, 1):
                out = (l * t + (u & ~1) + b2) * w + w2
                m[out, idx] += ub[b2, b]
        else:
            m[idx, idx] = 1
    return LocalUnitary(m, _history_basis(n))


def _history_memory_image(idx: int, n: int) -> int:
    t = 1 << n
    w = 2 * t
    w1, w2 = divmod(idx, w)
    l, u = divmod(w1, t)
    r, v = divmod(w2, t)
    minus_front = 1 << (n - 1)
    if (l, r) == (0, 1):
        if v & 1 == 0:
            # right mover keeps moving right, +1 enters the tail
            return w1 * w + t + (v >> 1)
        # right mover turns left; its tail becomes (+1, v_1..v_{n-1})
        return (t + (v >> 1)) * w + u
    if (l, r) == (1, 0):
        if u & 1 == 0:
            return v * w + t + minus_front + (u >> 1)
        return (t + minus_front + (u >> 1)) * w + v
    return idx


def particle_history_memory(n: int) -> LocalUnitary:
    """Basis permutation promoting the scattered tail slot to the current velocity."""
    if n < 1:
        raise ValueError("tail length must be >= 1")
    dim = (2 << n) ** 2
    m = np.zeros((dim, dim))
    for idx in range(dim):
        m[_history_memory_image(idx, n), idx] = 1
    return LocalUnitary(m, _history_basis(n))


def build_particle_history_rule(n: int, theta: float | None = None,
                                thetas: Sequence[float] | None = None,
                                lattice: Lattice | None = None) -> QlgaRule:
    """Rule whose walkers carry an ``n``-slot velocity tail.

    Pass ``theta`` for a fixed ricochet or ``thetas`` for a per-step
    schedule (step ``k`` uses ``thetas[k % len(thetas)]``).
    """
    if (theta is None) == (thetas is None):
        raise ValueError("give exactly one of theta or thetas")
    t = 1 << n
    spec = CellSpec((2 * t, 2 * t), (1, -1), lattice or Lattice.line(),
                    occupancy=(t, t), subcell_names=("l+tail", "r+tail"))
    mem = particle_history_memory(n)
    if thetas is not None:
        sched = tuple(mem @ particle_history_ricochet(n, th) for th in thetas)
        if not sched:
            raise ValueError("thetas must be nonempty")
        return QlgaRule(spec, sched[0], sched)
    return QlgaRule(spec, mem @ particle_history_ricochet(n, theta))


_SITE_BASIS = tuple(f"{m}{l}{r}" for m in "01" for l in "01" for r in "01")


def site_history_memory(theta_m: float) -> LocalUnitary:
    """Rotate the memory subcell when exactly one walker is present."""
    single = np.diag([0, 1, 1, 0]).astype(np.complex128)
    other = np.diag([1, 0, 0, 1]).astype(np.complex128)
    m = np.kron(memory_update(theta_m).m, single) + np.kron(np.eye(2), other)
    return LocalUnitary(m, _SITE_BASIS)


def site_history_ricochet(theta_b: float) -> LocalUnitary:
    """Balanced ricochet on unvisited cells, back-action ricochet on visited ones."""
    p0 = np.diag([1, 0]).astype(np.complex128)
    p1 = np.diag([0, 1]).astype(np.complex128)
    m = np.kron(p0, pair_ricochet(balanced()).m) + np.kron(p1, pair_ricochet(back_action(theta_b)).m)
    return LocalUnitary(m, _SITE_BASIS)


def build_site_history_rule(theta_m: float, theta_b: float,
                            lattice: Lattice | None = None) -> QlgaRule:
    """Three-subcell rule: static memory ``m`` (offset 0) and movers ``l``, ``r``."""
    spec = CellSpec((2, 2, 2), (0, 1, -1), lattice or Lattice.line(),
                    occupancy=(None, 1, 1), subcell_names=("m", "l", "r"))
    s = site_history_ricochet(theta_b) @ site_history_memory(theta_m)
    return QlgaRule(spec, s)


# one-hot cell indices of the four movers, subcell order (w, e, s, n)
ONE_HOT_2D = (8, 4, 2, 1)


def build_2d_rule(c: LocalUnitary, lattice: Lattice | None = None) -> QlgaRule:
    """Four-subcell rule acting as ``c`` on the one-hot block, identity elsewhere."""
    if not isinstance(c, LocalUnitary):
        c = LocalUnitary(c)
    if c.dim != 4:
        raise ValueError("direction coin must be 4x4")
    m = np.eye(16, dtype=np.complex128)
    idx = np.array(ONE_HOT_2D)
    m[np.ix_(idx, idx)] = c.m
    basis = tuple(format(k, "04b") for k in range(16))
    spec = CellSpec((2, 2, 2, 2), ((1, 0), (-1, 0), (0, 1), (0, -1)),
                    lattice or Lattice.plane(), occupancy=(1, 1, 1, 1),
                    subcell_names=("w", "e", "s", "n"))
    return QlgaRule(spec, LocalUnitary(m, basis))

