"""Walks as the single-particle sector of lattice-gas automata.

An :class:`Embedding` relabels walk basis states as QLGA configurations
holding one particle, and maps single-particle configurations back. With
both sides scattering before advecting, evolving a walk state and
evolving its embedding must agree amplitude for amplitude.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Hashable, NamedTuple

import numpy as np

from . import _backend
from .errors import SectorLeakageError
from .qlga import (
    ONE_HOT_2D,
    Lattice,
    QlgaRule,
    build_2d_rule,
    build_meyer_rule,
    build_particle_history_rule,
    build_site_history_rule,
    configuration,
    global_step,
    pair_spec,
)
from .matrices import pair_ricochet
from .state import SparseState, max_deviation
from .walks import (
    ParticleHistoryLabel,
    ParticleHistoryWalk,
    SiteHistoryLabel,
    SiteHistoryWalk,
    StandardLabel,
    StandardWalk,
    TwoDLabel,
    TwoDWalk,
    WalkModel,
)

__all__ = [
    "Embedding",
    "Projection",
    "EquivalenceRow",
    "EquivalenceReport",
    "meyer_parameters",
    "embedding_for",
    "embed",
    "project",
    "check_equivalence",
]

LEAKAGE_TOL = 1e-10
_DIRS = ("w", "e", "s", "n")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Walk label <-> single-particle configuration, plus the matching rule.

    ``backward`` returns ``None`` for configurations outside the image of
    ``forward`` (other particle numbers, stray active cells).
    """

    kind: str
    forward: Callable[[Hashable], tuple]
    backward: Callable[[tuple], Hashable | None]
    rule: QlgaRule


class Projection(NamedTuple):
    state: SparseState
    leakage: float


def meyer_parameters(theta: float) -> tuple[float, float]:
    """``(theta', alpha)`` making the Meyer block equal the symmetric coin ``S(theta)``.

    The Meyer middle block with ``alpha = 0`` is ``i S(theta' - pi/2)``;
    ``theta' = theta + pi/2`` and ``alpha = -pi/2`` cancel both the shift
    and the phase.
    """
    return theta + np.pi / 2, -np.pi / 2


def _lattice_1d(period):
    return Lattice.line() if period is None else Lattice.ring(period)


def _standard_embedding(model: StandardWalk) -> Embedding:
    lattice = _lattice_1d(model.period)
    if model.theta is not None:
        th, alpha = meyer_parameters(model.theta)
        rule = build_meyer_rule(th, alpha, 0.0, lattice)
    else:
        rule = QlgaRule(pair_spec(lattice), pair_ricochet(model.coin))

    def forward(label):
        return ((label.x, 1 if label.p == 1 else 2),)

    def backward(config):
        if len(config) != 1:
            return None
        x, idx = config[0]
        if idx == 1:
            return StandardLabel(x, 1)
        if idx == 2:
            return StandardLabel(x, -1)
        return None

    return Embedding("standard", forward, backward, rule)


def _tail_bits(tail) -> int:
    bits = 0
    for p in tail:
        bits = (bits << 1) | (p == -1)
    return bits


def _bits_tail(bits: int, n: int) -> tuple:
    return tuple(-1 if (bits >> (n - 1 - k)) & 1 else 1 for k in range(n))


def _particle_history_embedding(model: ParticleHistoryWalk) -> Embedding:
    if model.n < 2:
        raise ValueError("a one-slot tail is the standard walk; use its Meyer embedding")
    n = model.n - 1
    t = 1 << n
    w = 2 * t
    lattice = _lattice_1d(model.period)
    if model.variant == "cycled":
        rule = build_particle_history_rule(n, thetas=model.thetas, lattice=lattice)
    else:
        rule = build_particle_history_rule(n, theta=model.thetas[0], lattice=lattice)

    def forward(label):
        sub = t + _tail_bits(label.tail[1:])
        # right movers live in W2, left movers in W1; the empty side is quiescent
        return ((label.x, sub if label.tail[0] == 1 else sub * w),)

    def backward(config):
        if len(config) != 1:
            return None
        x, idx = config[0]
        w1, w2 = divmod(idx, w)
        if w1 == 0 and w2 >= t:
            return ParticleHistoryLabel(x, (1,) + _bits_tail(w2 - t, n))
        if w2 == 0 and w1 >= t:
            return ParticleHistoryLabel(x, (-1,) + _bits_tail(w1 - t, n))
        return None

    return Embedding("particle_history", forward, backward, rule)


def _site_history_embedding(model: SiteHistoryWalk) -> Embedding:
    n = model.n_sites
    rule = build_site_history_rule(model.theta_m, model.theta_b, Lattice.ring(n))

    def forward(label):
        cells = {y: 4 * m for y, m in enumerate(label.mem)}
        cells[label.x] += 1 if label.p == 1 else 2
        return configuration(cells)

    def backward(config):
        mem = [0] * n
        walker = None
        for x, idx in config:
            if not 0 <= x < n:
                return None
            m, lr = divmod(idx, 4)
            mem[x] = m
            if lr:
                if walker is not None or lr == 3:
                    return None
                walker = (x, 1 if lr == 1 else -1)
        if walker is None:
            return None
        return SiteHistoryLabel(walker[0], walker[1], tuple(mem))

    return Embedding("site_history", forward, backward, rule)


def _two_d_embedding(model: TwoDWalk) -> Embedding:
    lattice = Lattice.plane() if model.torus is None else Lattice.torus(*model.torus)
    rule = build_2d_rule(model.coin, lattice)
    one_hot = dict(zip(_DIRS, ONE_HOT_2D))
    from_hot = {v: k for k, v in one_hot.items()}

    def forward(label):
        return (((label.x, label.y), one_hot[label.dir]),)

    def backward(config):
        if len(config) != 1:
            return None
        (x, y), idx = config[0]
        d = from_hot.get(idx)
        return None if d is None else TwoDLabel(x, y, d)

    return Embedding("two_d", forward, backward, rule)


def embedding_for(model: WalkModel) -> Embedding:
    """Embedding and QLGA rule matching ``model``.

    Particle-history walks with an ``n``-velocity memory map to the rule
    whose subcells carry ``n - 1`` tail slots: the occupancy bit already
    stores the current velocity.
    """
    if isinstance(model, StandardWalk):
        return _standard_embedding(model)
    if isinstance(model, ParticleHistoryWalk):
        return _particle_history_embedding(model)
    if isinstance(model, SiteHistoryWalk):
        return _site_history_embedding(model)
    if isinstance(model, TwoDWalk):
        return _two_d_embedding(model)
    raise ValueError(f"no lattice-gas construction for the {model.kind} walk")


def embed(e: Embedding, walk_state: SparseState) -> SparseState:
    """Relabel a walk state into the single-particle sector."""
    return walk_state.with_entries(_backend.kernels.permute(walk_state._entries, e.forward))


def project(e: Embedding, config_state: SparseState,
            tol: float = LEAKAGE_TOL, strict: bool = True) -> Projection:
    """Map a configuration state back onto walk labels.

    Mass on configurations outside the sector is reported as ``leakage``.

    Raises
    ------
    SectorLeakageError
        If ``strict`` and the leakage exceeds ``tol``.
    """
    out = {}
    leak = 0.0
    for cfg, a in config_state.items():
        label = e.backward(cfg)
        if label is None:
            leak += a.real * a.real + a.imag * a.imag
        else:
            out[label] = a
    if strict and leak > tol:
        raise SectorLeakageError(
            f"{leak:.3e} of probability outside the single-particle sector", leak)
    return Projection(config_state.with_entries(out), leak)


class EquivalenceRow(NamedTuple):
    t: int
    max_deviation: float
    sector_leakage: float


@dataclass
class EquivalenceReport:
    kind: str
    tol: float
    rows: list[EquivalenceRow] = field(default_factory=list)
    diagnosis: str = ""

    @property
    def max_deviation(self) -> float:
        return max((r.max_deviation for r in self.rows), default=0.0)

    @property
    def max_leakage(self) -> float:
        return max((r.sector_leakage for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return (not self.diagnosis and self.max_deviation < self.tol
                and self.max_leakage <= LEAKAGE_TOL)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "max_deviation", "sector_leakage"])
        for r in self.rows:
            writer.writerow([r.t, f"{r.max_deviation:.17g}", f"{r.sector_leakage:.17g}"])
        return buf.getvalue()


def check_equivalence(model: WalkModel, e: Embedding, init: SparseState,
                      t_max: int, tol: float = 1e-10) -> EquivalenceReport:
    """Evolve ``init`` as a walk and as a QLGA; compare after every step.

    The model's own step counter is left untouched (a fresh copy runs).
    """
    walk = model.fresh()
    report = EquivalenceReport(e.kind, tol)
    w_state = init
    g_state = embed(e, init)
    for t in range(t_max + 1):
        if t:
            w_state = walk.step(w_state)
            g_state = global_step(g_state, e.rule, t - 1)
        proj = project(e, g_state, strict=False)
        report.rows.append(EquivalenceRow(t, max_deviation(w_state, proj.state), proj.leakage))
        if proj.leakage > LEAKAGE_TOL:
            report.diagnosis = (f"sector leakage {proj.leakage:.3e} at t={t}: "
                                "the rule does not conserve particle number")
            break
    return report
