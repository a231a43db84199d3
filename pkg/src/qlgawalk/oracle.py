"""Dense one-step operators for finite periodic walks.

Built from Kronecker products of shift, projector and coin matrices (never
by stepping basis vectors through the sparse code), so comparing the two is
a genuine cross-check. The basis order is the Kronecker order: position
first, then internal factors left to right, each in its documented order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product

import numpy as np
import scipy.sparse as sp

from .errors import TruncationError
from .matrices import DIRECTIONS, back_action, balanced, memory_update
from .state import LocalUnitary, SparseState, max_deviation, to_vector
from .walks import (
    McGettrickLabel,
    McGettrickWalk,
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

__all__ = ["DenseOperator", "dense_operator", "compare_basis_columns", "windowed_comparison"]

MAX_DIM = 1 << 16
VEL = (1, -1)
P_PLUS = sp.csr_matrix(np.diag([1.0, 0.0]))
P_MINUS = sp.csr_matrix(np.diag([0.0, 1.0]))
SWAP = sp.csr_matrix(np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                              dtype=float))


@dataclass
class DenseOperator:
    """One-step matrix (stored sparse) and the labels of its basis."""

    matrix: sp.csr_matrix
    basis: list

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def to_local_unitary(self) -> LocalUnitary:
        return LocalUnitary(self.toarray(), tuple(repr(b) for b in self.basis))

    def apply(self, state: SparseState) -> np.ndarray:
        return self.matrix @ to_vector(state, self.basis)

    def vector_to_state(self, vec: np.ndarray) -> SparseState:
        return SparseState({b: v for b, v in zip(self.basis, vec) if v != 0})


def _kron(*ms):
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), ms)


def _eye(n):
    return sp.identity(n, dtype=np.complex128, format="csr")


def _shift(n, d):
    """``|x> -> |x+d mod n>``."""
    rows = [(x + d) % n for x in range(n)]
    return sp.csr_matrix((np.ones(n), (rows, list(range(n)))), shape=(n, n))


def _proj(n, k):
    m = sp.lil_matrix((n, n))
    m[k, k] = 1
    return m.tocsr()


def _cycle_via_swaps(n):
    """``|p_1..p_n> -> |p_n p_1..p_{n-1}>``: bubble the last slot to the front."""
    out = _eye(1 << n)
    for k in reversed(range(n - 1)):
        out = _kron(_eye(1 << k), SWAP, _eye(1 << (n - k - 2))) @ out
    return out


def _require_period(model):
    if model.period is None:
        raise TruncationError(
            f"{model.kind} model is on an unbounded lattice; build it with a period "
            "or use windowed_comparison")


def _standard(model: StandardWalk):
    n = model.period
    coin = sp.csr_matrix(model.coin.m)
    a = _kron(_shift(n, 1), P_PLUS) + _kron(_shift(n, -1), P_MINUS)
    u = a @ _kron(_eye(n), coin)
    basis = [StandardLabel(x, p) for x in range(n) for p in VEL]
    return u, basis


def _tails(n):
    return list(product(VEL, repeat=n))


def _particle_history(model: ParticleHistoryWalk, step_index: int):
    n, nx = model.n, model.period
    coin = sp.csr_matrix(model.coin_for_step(step_index).m)
    r = _kron(_eye(nx), _eye(1 << (n - 1)), coin)
    m = _kron(_eye(nx), _cycle_via_swaps(n))
    rest = _eye(1 << (n - 1))
    a = _kron(_shift(nx, 1), P_PLUS, rest) + _kron(_shift(nx, -1), P_MINUS, rest)
    u = a @ m @ r
    basis = [ParticleHistoryLabel(x, t) for x in range(nx) for t in _tails(n)]
    return u, basis


def _mcgettrick(model: McGettrickWalk):
    n, nx = model.n, model.period
    cyc = _kron(_eye(nx), _eye(2), _cycle_via_swaps(n))
    c = _kron(_eye(nx), sp.csr_matrix(model.u_s.m), _eye(1 << n))
    x_gate = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    modes = [x_gate if m == "reflect" else _eye(2) for m in model.modes]
    ctrl = _kron(_proj(2, 0), modes[0]) + _kron(_proj(2, 1), modes[1])
    r = _kron(_eye(nx), ctrl, _eye(1 << (n - 1)))
    rest = _eye(1 << (n - 1))
    a = (_kron(_shift(nx, 1), _eye(2), P_PLUS, rest)
         + _kron(_shift(nx, -1), _eye(2), P_MINUS, rest))
    u = a @ r @ c @ cyc
    basis = [McGettrickLabel(x, cb, t) for x in range(nx) for cb in (0, 1) for t in _tails(n)]
    return u, basis


def _site_history(model: SiteHistoryWalk):
    n = model.n_sites
    um = sp.csr_matrix(memory_update(model.theta_m).m)
    u0 = sp.csr_matrix(balanced().m)
    u1 = sp.csr_matrix(back_action(model.theta_b).m)

    def at_site(x, op):
        return _kron(_eye(1 << x), op, _eye(1 << (n - x - 1)))

    dim_mem = 1 << n
    m_op = sp.csr_matrix((2 * n * dim_mem,) * 2, dtype=np.complex128)
    r_op = sp.csr_matrix((2 * n * dim_mem,) * 2, dtype=np.complex128)
    for x in range(n):
        m_op = m_op + _kron(_proj(n, x), _eye(2), at_site(x, um))
        r_op = r_op + _kron(_proj(n, x), u0, at_site(x, _proj(2, 0)))
        r_op = r_op + _kron(_proj(n, x), u1, at_site(x, _proj(2, 1)))
    a = (_kron(_shift(n, 1), P_PLUS, _eye(dim_mem))
         + _kron(_shift(n, -1), P_MINUS, _eye(dim_mem)))
    u = a @ r_op @ m_op
    basis = [SiteHistoryLabel(x, p, mem) for x in range(n) for p in VEL
             for mem in product((0, 1), repeat=n)]
    return u, basis


def _two_d(model: TwoDWalk):
    nx, ny = model.torus
    pw, pe, ps, pn = (_proj(4, k) for k in range(4))
    a = (_kron(_shift(nx, -1), _eye(ny), pw) + _kron(_shift(nx, 1), _eye(ny), pe)
         + _kron(_eye(nx), _shift(ny, -1), ps) + _kron(_eye(nx), _shift(ny, 1), pn))
    u = a @ _kron(_eye(nx), _eye(ny), sp.csr_matrix(model.coin.m))
    basis = [TwoDLabel(x, y, d) for x in range(nx) for y in range(ny) for d in DIRECTIONS]
    return u, basis


def dense_operator(model: WalkModel, step_index: int | None = None) -> DenseOperator:
    """Explicit one-step matrix of a periodic walk.

    ``step_index`` matters only for scheduled coins; it defaults to the
    model's current counter.

    Raises
    ------
    TruncationError
        If the model has no finite period or the space exceeds ``2**16``.
    """
    _require_period(model)
    k = model.step_index if step_index is None else step_index
    if isinstance(model, StandardWalk):
        dim = 2 * model.period
    elif isinstance(model, ParticleHistoryWalk):
        dim = model.period << model.n
    elif isinstance(model, McGettrickWalk):
        dim = model.period << (model.n + 1)
    elif isinstance(model, SiteHistoryWalk):
        dim = model.n_sites << (model.n_sites + 1)
    elif isinstance(model, TwoDWalk):
        dim = 4 * model.torus[0] * model.torus[1]
    else:
        raise TypeError(f"no dense construction for {type(model).__name__}")
    if dim > MAX_DIM:
        raise TruncationError(f"dimension {dim} exceeds {MAX_DIM}")
    if isinstance(model, StandardWalk):
        u, basis = _standard(model)
    elif isinstance(model, ParticleHistoryWalk):
        u, basis = _particle_history(model, k)
    elif isinstance(model, McGettrickWalk):
        u, basis = _mcgettrick(model)
    elif isinstance(model, SiteHistoryWalk):
        u, basis = _site_history(model)
    else:
        u, basis = _two_d(model)
    return DenseOperator(sp.csr_matrix(u, dtype=np.complex128), basis)


def compare_basis_columns(model: WalkModel, step_index: int = 0) -> float:
    """Max deviation between sparse stepping and the dense matrix over all basis vectors."""
    op = dense_operator(model, step_index)
    dense = op.toarray()
    worst = 0.0
    for j, label in enumerate(op.basis):
        m = model.fresh()
        m.step_index = step_index
        out = m.step(SparseState.basis(label))
        col = dense[:, j]
        expect = op.vector_to_state(col)
        worst = max(worst, max_deviation(out, expect))
    return worst


def windowed_comparison(model: WalkModel, init: SparseState, steps: int,
                        radius: int) -> list[float]:
    """Compare a walk on ``Z`` against the dense operator on a ring of ``2*radius+1`` sites.

    Positions ``-radius..radius`` are identified with ring sites mod
    ``2*radius+1``. Returns the max deviation after each step.

    Raises
    ------
    TruncationError
        If the sparse support reaches ``|x| >= radius``, where wrap-around
        would make the comparison meaningless.
    """
    if not isinstance(model, (StandardWalk, ParticleHistoryWalk, McGettrickWalk)):
        raise TypeError("windowed comparison supports 1D line models")
    n = 2 * radius + 1
    ring = model.fresh()
    ring.period = n
    line = model.fresh()

    def to_ring(label):
        return label._replace(x=label.x % n)

    devs = []
    state = init
    for label in state.labels():
        if abs(label.x) >= radius:
            raise TruncationError(f"initial support at x={label.x} outside window")
    vec_state = SparseState({to_ring(k): v for k, v in init.items()})
    for t in range(steps):
        op = dense_operator(ring, line.step_index)
        state = line.step(state)
        for label in state.labels():
            if abs(label.x) >= radius:
                raise TruncationError(
                    f"walker support reached x={label.x} at step {t + 1}; enlarge the window")
        vec = op.apply(vec_state)
        vec_state = op.vector_to_state(vec)
        devs.append(max_deviation(SparseState({to_ring(k): v for k, v in state.items()}),
                                  vec_state))
    return devs
