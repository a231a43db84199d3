"""Sparse complex state vectors over hashable basis labels.

A :class:`SparseState` is an immutable map from basis labels to complex
amplitudes. Every model step in the package is a composition of two
primitive unitary actions defined here:

* :func:`permute` relabels the basis (advection, memory cycles);
* :func:`scatter` applies a dense local unitary blockwise (scattering).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import _backend
from .errors import NotUnitaryError

__all__ = [
    "SparseState",
    "LocalUnitary",
    "norm2",
    "inner_product",
    "permute",
    "scatter",
    "prune",
    "max_deviation",
    "UNITARY_TOL",
]

UNITARY_TOL = 1e-12


class SparseState:
    """Immutable sparse state vector.

    Parameters
    ----------
    entries : mapping
        Basis label -> amplitude. Values are coerced to ``complex``.
    prune_epsilon : float, optional
        Amplitudes with modulus at or below this threshold are dropped by
        the evolution drivers after each step. ``0`` keeps everything
        except exact zeros.
    """

    __slots__ = ("_entries", "prune_epsilon")

    def __init__(self, entries: Mapping[Hashable, complex] | None = None,
                 prune_epsilon: float = 0.0):
        if prune_epsilon < 0:
            raise ValueError("prune_epsilon must be >= 0")
        data = {} if entries is None else {k: complex(v) for k, v in entries.items()}
        for k, v in data.items():
            if not (np.isfinite(v.real) and np.isfinite(v.imag)):
                raise ValueError(f"non-finite amplitude for label {k!r}")
        self._entries = data
        self.prune_epsilon = float(prune_epsilon)

    @classmethod
    def _wrap(cls, entries: dict, prune_epsilon: float = 0.0) -> "SparseState":
        # trusted constructor for kernel output
        obj = cls.__new__(cls)
        obj._entries = entries
        obj.prune_epsilon = prune_epsilon
        return obj

    @classmethod
    def basis(cls, label: Hashable, prune_epsilon: float = 0.0) -> "SparseState":
        return cls._wrap({label: 1 + 0j}, prune_epsilon)

    @property
    def entries(self) -> Mapping[Hashable, complex]:
        return self._entries

    def items(self):
        return self._entries.items()

    def labels(self):
        return self._entries.keys()

    def amplitude(self, label: Hashable) -> complex:
        return self._entries.get(label, 0j)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __contains__(self, label) -> bool:
        return label in self._entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseState):
            return NotImplemented
        return self._entries == other._entries

    __hash__ = None

    def __repr__(self) -> str:
        n = len(self._entries)
        return f"SparseState({n} entr{'y' if n == 1 else 'ies'}, norm2={self.norm2():.6g})"

    def norm2(self) -> float:
        return norm2(self)

    def scaled(self, factor: complex) -> "SparseState":
        return SparseState._wrap({k: v * factor for k, v in self._entries.items()},
                                 self.prune_epsilon)

    def normalized(self) -> "SparseState":
        n = self.norm2()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.scaled(1 / np.sqrt(n))

    def with_entries(self, entries: dict) -> "SparseState":
        """New state sharing this one's pruning configuration."""
        return SparseState._wrap(entries, self.prune_epsilon)

    def sorted_items(self, key: Callable[[Any], Any] | None = None):
        """Entries in canonical label order (for serialization)."""
        return sorted(self._entries.items(), key=(lambda kv: kv[0]) if key is None
                      else (lambda kv: key(kv[0])))


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """Dense unitary on a small local space with a documented basis order.

    The matrix acts on column vectors: ``out = m @ in``. ``basis`` names the
    basis vectors in index order. Unitarity is checked at construction to
    ``tol`` in the max norm of ``m^dagger m - I``.
    """

    m: np.ndarray
    basis: tuple[str, ...] = ()
    tol: float = UNITARY_TOL
    columns: tuple = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.m, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"expected a nonempty square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        basis = tuple(self.basis) if self.basis else tuple(str(i) for i in range(m.shape[0]))
        if len(basis) != m.shape[0]:
            raise ValueError(f"basis has {len(basis)} names for dim {m.shape[0]}")
        object.__setattr__(self, "basis", basis)
        err = unitarity_error(m)
        if not err < self.tol:
            raise NotUnitaryError(f"||U^dagger U - I||_max = {err:.3e} exceeds {self.tol:g}")
        cols = tuple(
            tuple((int(i), complex(m[i, j])) for i in np.flatnonzero(m[:, j]))
            for j in range(m.shape[0])
        )
        object.__setattr__(self, "columns", cols)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def __matmul__(self, other: "LocalUnitary") -> "LocalUnitary":
        if self.basis != other.basis:
            raise ValueError("basis orders differ")
        return LocalUnitary(self.m @ other.m, self.basis)

    def entry(self, row: str, col: str) -> complex:
        return complex(self.m[self.basis.index(row), self.basis.index(col)])


def unitarity_error(m: np.ndarray) -> float:
    """``max |(m^dagger m - I)_ij|``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def _entries(state) -> dict:
    return state._entries if isinstance(state, SparseState) else dict(state)


def norm2(state: SparseState) -> float:
    """Squared norm, the sum of ``|amplitude|^2``."""
    return _backend.kernels.norm2(_entries(state))


def inner_product(a: SparseState, b: SparseState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    return _backend.kernels.inner(_entries(a), _entries(b))


def permute(state: SparseState, f: Callable[[Hashable], Hashable]) -> SparseState:
    """Relabel the basis with an injective map ``f``.

    Raises
    ------
    LabelCollisionError
        If two labels in the support share an image.
    """
    return state.with_entries(_backend.kernels.permute(state._entries, f))


def scatter(state: SparseState,
            classify: Callable[[Hashable], tuple[Hashable, int]],
            u_for_class: Callable[[Hashable], LocalUnitary] | LocalUnitary,
            compose: Callable[[Hashable, int], Hashable]) -> SparseState:
    """Blockwise dense scattering.

    ``classify`` splits a label into ``(class_id, local_index)`` and
    ``compose`` is its inverse. Within each class the amplitude vector is
    multiplied by the class's unitary. A single :class:`LocalUnitary` may be
    passed in place of ``u_for_class`` when every class shares it.
    """
    if isinstance(u_for_class, LocalUnitary):
        cols = u_for_class.columns
        columns_of = lambda _cls: cols  # noqa: E731
    else:
        columns_of = lambda cls: u_for_class(cls).columns  # noqa: E731
    return state.with_entries(
        _backend.kernels.scatter(state._entries, classify, compose, columns_of))


def prune(state: SparseState, epsilon: float) -> SparseState:
    """Drop entries with modulus ``<= epsilon`` (only exact zeros if 0)."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return state.with_entries(_backend.kernels.prune(state._entries, float(epsilon)))


def max_deviation(a: SparseState, b: SparseState) -> float:
    """Largest ``|a_l - b_l|`` over the union of supports."""
    ea, eb = _entries(a), _entries(b)
    worst = 0.0
    for k in ea.keys() | eb.keys():
        d = abs(ea.get(k, 0j) - eb.get(k, 0j))
        if d > worst:
            worst = d
    return worst


def from_pairs(pairs: Iterable[tuple[Hashable, complex]],
               prune_epsilon: float = 0.0) -> SparseState:
    """Build a state from ``(label, amplitude)`` pairs, summing repeats."""
    acc: dict = {}
    for k, v in pairs:
        acc[k] = acc.get(k, 0j) + complex(v)
    return SparseState(acc, prune_epsilon)


def to_vector(state: SparseState, basis: Sequence[Hashable]) -> np.ndarray:
    """Dense amplitude vector in the given basis order.

    Raises ``KeyError`` if the state has support outside ``basis``.
    """
    index = {b: i for i, b in enumerate(basis)}
    vec = np.zeros(len(basis), dtype=np.complex128)
    for k, v in _entries(state).items():
        vec[index[k]] = v
    return vec
