"""History-dependent discrete-time quantum walks in first-quantized form.

Each model's step is ``scatter`` on the internal factors followed by a
basis permutation (memory cycling, controlled reflection, advection), all
acting on a :class:`~qlgawalk.state.SparseState` keyed by the model's label
type. Positions live on ``Z`` by default; pass ``period`` (1D) or ``torus``
(2D) to work on a finite periodic lattice, which is what the dense oracle
needs.

Velocity basis order is ``(+1, -1)`` and the 2D direction order is
``(w, e, s, n)`` throughout.
"""

from __future__ import annotations

import copy
from typing import NamedTuple, Sequence

import numpy as np

from .errors import LabelMismatchError
from .matrices import (
    DIRECTIONS,
    back_action,
    balanced,
    memory_update,
    non_repeating,
    non_reversing,
    symmetric_scattering,
)
from .state import LocalUnitary, SparseState, permute, prune, scatter

__all__ = [
    "StandardLabel",
    "ParticleHistoryLabel",
    "McGettrickLabel",
    "SiteHistoryLabel",
    "TwoDLabel",
    "WalkModel",
    "build_standard",
    "build_particle_history",
    "build_mcgettrick",
    "build_site_history",
    "build_2d",
    "step",
    "evolve",
    "symmetric_initial",
]

VELOCITIES = (1, -1)
_VIDX = {1: 0, -1: 1}
_DIDX = {d: i for i, d in enumerate(DIRECTIONS)}
_DIR_MOVES = {"w": (-1, 0), "e": (1, 0), "s": (0, -1), "n": (0, 1)}


class StandardLabel(NamedTuple):
    x: int
    p: int


class ParticleHistoryLabel(NamedTuple):
    x: int
    tail: tuple  # (p_1, ..., p_N); p_1 is the velocity used for advection


class McGettrickLabel(NamedTuple):
    x: int
    c: int
    tail: tuple


class SiteHistoryLabel(NamedTuple):
    x: int
    p: int
    mem: tuple  # visit qubit per site, indexed by position


class TwoDLabel(NamedTuple):
    x: int
    y: int
    dir: str


class WalkModel:
    """Base class: a step operator plus the step counter it schedules on."""

    kind = "abstract"
    label_type: type = tuple
    period = None

    def __init__(self, prune_epsilon: float = 0.0):
        self.step_index = 0
        self.prune_epsilon = prune_epsilon

    def _apply(self, state: SparseState, k: int) -> SparseState:
        raise NotImplementedError

    def step(self, state: SparseState) -> SparseState:
        for label in state.labels():
            if not isinstance(label, self.label_type):
                raise LabelMismatchError(
                    f"{self.kind} walk expects {self.label_type.__name__} labels, "
                    f"got {type(label).__name__}")
            break
        out = self._apply(state, self.step_index)
        self.step_index += 1
        eps = max(self.prune_epsilon, state.prune_epsilon)
        if eps > 0:
            out = prune(out, eps)
        return out

    def evolve(self, state: SparseState, steps: int):
        """Yield the state after each of ``steps`` steps."""
        for _ in range(steps):
            state = self.step(state)
            yield state

    def run(self, state: SparseState, steps: int) -> SparseState:
        for state in self.evolve(state, steps):
            pass
        return state

    def fresh(self) -> "WalkModel":
        """Copy with the step counter reset to zero."""
        other = copy.copy(self)
        other.step_index = 0
        return other

    def position(self, label):
        return label.x

    def _wrap(self, x):
        return x if self.period is None else x % self.period

    def origin_label(self, x=0):
        """Basis label at ``x`` with velocity +1 and zeroed memory."""
        raise NotImplementedError

    def random_label(self, rng: np.random.Generator, radius: int = 3):
        raise NotImplementedError

    def random_state(self, rng: np.random.Generator, size: int = 4,
                     radius: int = 3) -> SparseState:
        """Normalized superposition of up to ``size`` random labels near the origin."""
        amps: dict = {}
        for _ in range(size):
            label = self.random_label(rng, radius)
            z = complex(rng.standard_normal(), rng.standard_normal())
            amps[label] = amps.get(label, 0j) + z
        return SparseState(amps, self.prune_epsilon).normalized()


class StandardWalk(WalkModel):
    kind = "standard"
    label_type = StandardLabel

    def __init__(self, coin: LocalUnitary, period: int | None = None, theta=None, **kw):
        super().__init__(**kw)
        if coin.dim != 2:
            raise ValueError("velocity coin must be 2x2")
        self.coin = coin
        self.theta = theta
        self.period = period

    def _apply(self, state, k):
        s = scatter(state, lambda l: (l.x, _VIDX[l.p]), self.coin,
                    lambda x, i: StandardLabel(x, VELOCITIES[i]))
        wrap = self._wrap
        return permute(s, lambda l: StandardLabel(wrap(l.x + l.p), l.p))

    def origin_label(self, x=0):
        return StandardLabel(x, 1)

    def random_label(self, rng, radius=3):
        x = self._wrap(int(rng.integers(-radius, radius + 1)))
        return StandardLabel(x, VELOCITIES[rng.integers(2)])


def build_standard(theta: float | None = None, coin: LocalUnitary | None = None,
                   period: int | None = None, prune_epsilon: float = 0.0) -> StandardWalk:
    """Walk with a single velocity qubit.

    ``theta`` selects the symmetric coin ``[[cos, i sin], [i sin, cos]]``;
    alternatively pass any 2x2 ``coin`` in the ``(+1, -1)`` basis.
    """
    if (theta is None) == (coin is None):
        raise ValueError("give exactly one of theta or coin")
    if coin is None:
        coin = symmetric_scattering(theta)
    return StandardWalk(coin, period, theta=theta, prune_epsilon=prune_epsilon)


class ParticleHistoryWalk(WalkModel):
    """Velocity-tail walk, ``U = A~ (I (x) M R)``.

    ``R`` scatters the oldest slot ``p_N`` with the scheduled coin, ``M``
    rotates it to the front, and the walker moves by the new ``p_1``.
    """

    kind = "particle_history"
    label_type = ParticleHistoryLabel

    def __init__(self, n: int, coins: Sequence[LocalUnitary], variant: str,
                 period: int | None = None, thetas=None, **kw):
        super().__init__(**kw)
        self.n = n
        self.coins = tuple(coins)
        self.variant = variant
        self.thetas = None if thetas is None else tuple(thetas)
        self.period = period

    def coin_for_step(self, k: int) -> LocalUnitary:
        return self.coins[k % len(self.coins)]

    def _apply(self, state, k):
        s = scatter(state,
                    lambda l: ((l.x, l.tail[:-1]), _VIDX[l.tail[-1]]),
                    self.coin_for_step(k),
                    lambda cls, i: ParticleHistoryLabel(cls[0], cls[1] + (VELOCITIES[i],)))
        wrap = self._wrap

        def memory_then_advect(l):
            tail = (l.tail[-1],) + l.tail[:-1]
            return ParticleHistoryLabel(wrap(l.x + tail[0]), tail)

        return permute(s, memory_then_advect)

    def origin_label(self, x=0):
        return ParticleHistoryLabel(x, (1,) * self.n)

    def random_label(self, rng, radius=3):
        x = self._wrap(int(rng.integers(-radius, radius + 1)))
        return ParticleHistoryLabel(x, tuple(VELOCITIES[b] for b in rng.integers(2, size=self.n)))


def build_particle_history(n: int, thetas: Sequence[float], variant: str = "uniform",
                           period: int | None = None,
                           prune_epsilon: float = 0.0) -> ParticleHistoryWalk:
    """Walk carrying the last ``n`` velocities.

    ``variant="uniform"`` takes one angle used every step; ``"cycled"``
    takes ``n`` angles, step ``k`` using ``thetas[k % n]``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    thetas = list(thetas)
    if variant == "uniform":
        if len(thetas) != 1:
            raise ValueError(f"uniform variant takes 1 angle, got {len(thetas)}")
    elif variant == "cycled":
        if len(thetas) != n:
            raise ValueError(f"cycled variant takes n={n} angles, got {len(thetas)}")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    coins = [symmetric_scattering(t) for t in thetas]
    return ParticleHistoryWalk(n, coins, variant, period, thetas=thetas,
                               prune_epsilon=prune_epsilon)


class McGettrickWalk(WalkModel):
    """Ricochet-control walk, ``U = A (I (x) R C M)``.

    ``C`` applies ``u_s`` to the control bit; ``R`` reflects (Pauli X) or
    transmits ``p_1`` according to the mode selected by the control.
    """

    kind = "mcgettrick"
    label_type = McGettrickLabel

    def __init__(self, n: int, u_s: LocalUnitary, mode0: str, mode1: str,
                 period: int | None = None, **kw):
        super().__init__(**kw)
        for mode in (mode0, mode1):
            if mode not in ("transmit", "reflect"):
                raise ValueError(f"mode must be 'transmit' or 'reflect', got {mode!r}")
        if u_s.dim != 2:
            raise ValueError("control scattering must be 2x2")
        self.n = n
        self.u_s = u_s
        self.modes = (mode0, mode1)
        self.period = period

    def _apply(self, state, k):
        s = scatter(state, lambda l: ((l.x, l.tail), l.c), self.u_s,
                    lambda cls, c: McGettrickLabel(cls[0], c, cls[1]))
        reflect = tuple(m == "reflect" for m in self.modes)
        wrap = self._wrap

        def ricochet_then_advect(l):
            tail = (l.tail[-1],) + l.tail[:-1]
            if reflect[l.c]:
                tail = (-tail[0],) + tail[1:]
            return McGettrickLabel(wrap(l.x + tail[0]), l.c, tail)

        return permute(s, ricochet_then_advect)

    def origin_label(self, x=0):
        return McGettrickLabel(x, 0, (1,) * self.n)

    def random_label(self, rng, radius=3):
        x = self._wrap(int(rng.integers(-radius, radius + 1)))
        tail = tuple(VELOCITIES[b] for b in rng.integers(2, size=self.n))
        return McGettrickLabel(x, int(rng.integers(2)), tail)


def build_mcgettrick(n: int, u_s: LocalUnitary, mode0: str = "transmit",
                     mode1: str = "reflect", period: int | None = None,
                     prune_epsilon: float = 0.0) -> McGettrickWalk:
    if n < 1:
        raise ValueError("n must be >= 1")
    return McGettrickWalk(n, u_s, mode0, mode1, period, prune_epsilon=prune_epsilon)


def site_scattering(theta_m: float, theta_b: float) -> LocalUnitary:
    """Generalized scattering on ``(m_x, p)``: memory update, then controlled coin.

    Local basis ``(m, p)`` with ``m`` most significant:
    ``0+, 0-, 1+, 1-``.
    """
    mem = np.kron(memory_update(theta_m).m, np.eye(2))
    ric = (np.kron(np.diag([1, 0]), balanced().m)
           + np.kron(np.diag([0, 1]), back_action(theta_b).m))
    return LocalUnitary(ric @ mem, ("0+", "0-", "1+", "1-"))


class SiteHistoryWalk(WalkModel):
    """Walk on a ring whose sites record visits, ``U = A R M``."""

    kind = "site_history"
    label_type = SiteHistoryLabel

    def __init__(self, n_sites: int, theta_m: float, theta_b: float, **kw):
        super().__init__(**kw)
        self.n_sites = n_sites
        self.period = n_sites
        self.theta_m = theta_m
        self.theta_b = theta_b
        self.local = site_scattering(theta_m, theta_b)

    def _apply(self, state, k):
        def classify(l):
            mem = l.mem
            m = mem[l.x]
            if m:
                mem = mem[:l.x] + (0,) + mem[l.x + 1:]
            return (l.x, mem), 2 * m + _VIDX[l.p]

        def compose(cls, i):
            x, mem = cls
            m, pi = divmod(i, 2)
            if m:
                mem = mem[:x] + (1,) + mem[x + 1:]
            return SiteHistoryLabel(x, VELOCITIES[pi], mem)

        s = scatter(state, classify, self.local, compose)
        n = self.n_sites
        return permute(s, lambda l: SiteHistoryLabel((l.x + l.p) % n, l.p, l.mem))

    def origin_label(self, x=0):
        return SiteHistoryLabel(x % self.n_sites, 1, (0,) * self.n_sites)

    def random_label(self, rng, radius=3):
        x = int(rng.integers(self.n_sites))
        mem = tuple(int(b) for b in rng.integers(2, size=self.n_sites))
        return SiteHistoryLabel(x, VELOCITIES[rng.integers(2)], mem)


def build_site_history(n_sites: int, theta_m: float, theta_b: float,
                       prune_epsilon: float = 0.0) -> SiteHistoryWalk:
    if n_sites < 2:
        raise ValueError("n_sites must be >= 2")
    return SiteHistoryWalk(n_sites, theta_m, theta_b, prune_epsilon=prune_epsilon)


class TwoDWalk(WalkModel):
    kind = "two_d"
    label_type = TwoDLabel

    def __init__(self, coin: LocalUnitary, variant: str, torus=None, **kw):
        super().__init__(**kw)
        self.coin = coin
        self.variant = variant
        self.torus = None if torus is None else (int(torus[0]), int(torus[1]))
        self.period = self.torus

    def _apply(self, state, k):
        s = scatter(state, lambda l: ((l.x, l.y), _DIDX[l.dir]), self.coin,
                    lambda xy, i: TwoDLabel(xy[0], xy[1], DIRECTIONS[i]))
        torus = self.torus

        def advect(l):
            dx, dy = _DIR_MOVES[l.dir]
            x, y = l.x + dx, l.y + dy
            if torus is not None:
                x, y = x % torus[0], y % torus[1]
            return TwoDLabel(x, y, l.dir)

        return permute(s, advect)

    def position(self, label):
        return (label.x, label.y)

    def origin_label(self, x=0):
        return TwoDLabel(x, 0, "e")

    def random_label(self, rng, radius=3):
        x, y = (int(v) for v in rng.integers(-radius, radius + 1, size=2))
        if self.torus is not None:
            x, y = x % self.torus[0], y % self.torus[1]
        return TwoDLabel(x, y, DIRECTIONS[rng.integers(4)])


def build_2d(variant: str, c, torus=None, prune_epsilon: float = 0.0) -> TwoDWalk:
    """2D walk whose coin is ``c`` (non-repeating) or ``c . J`` (non-reversing).

    ``c`` must be a 4x4 unitary with zero diagonal in the ``(w, e, s, n)``
    basis; anything else is rejected.
    """
    if variant == "non_repeating":
        coin = non_repeating(c)
    elif variant == "non_reversing":
        coin = non_reversing(c)
    else:
        raise ValueError(f"unknown 2D variant {variant!r}")
    return TwoDWalk(coin, variant, torus, prune_epsilon=prune_epsilon)


def step(model: WalkModel, state: SparseState) -> SparseState:
    """Apply one full transition and advance the model's step counter."""
    return model.step(state)


def evolve(model: WalkModel, state: SparseState, steps: int):
    return model.evolve(state, steps)


def symmetric_initial(x: int = 0, phase: complex = 1.0) -> SparseState:
    """``(|x,+1> + phase |x,-1>)/sqrt 2``.

    The default ``phase=1`` is parity symmetric, so under any symmetric coin
    the position distribution stays symmetric about ``x``. (``phase=1j`` is
    the symmetric choice for a Hadamard coin, not for this convention.)
    """
    r = 1 / np.sqrt(2)
    return SparseState({StandardLabel(x, 1): r, StandardLabel(x, -1): phase * r})
