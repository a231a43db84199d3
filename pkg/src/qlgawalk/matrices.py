"""Local scattering matrices.

Basis conventions used everywhere in the package:

* 1D velocity qubit: ``(+1, -1)``;
* site memory qubit: ``(0, 1)`` = (not visited, visited);
* 2D direction: ``(w, e, s, n)``;
* two-subcell occupancy ``|l r>``: ``(00, 01, 10, 11)``, ``l`` most significant.
"""

from __future__ import annotations

import numpy as np

from .state import LocalUnitary

VELOCITY_BASIS = ("+1", "-1")
MEMORY_BASIS = ("0", "1")
DIRECTIONS = ("w", "e", "s", "n")
PAIR_BASIS = ("00", "01", "10", "11")

# reversal pairs w<->e, s<->n
REVERSE = {"w": "e", "e": "w", "s": "n", "n": "s"}


def symmetric_scattering(theta: float, basis=VELOCITY_BASIS) -> LocalUnitary:
    """``[[cos t, i sin t], [i sin t, cos t]]``.

    Parity-symmetric 2x2 scattering used for the velocity coin, the
    per-slot ricochets, the site-memory update and the back-action coin.
    """
    c, s = np.cos(theta), np.sin(theta)
    return LocalUnitary(np.array([[c, 1j * s], [1j * s, c]]), basis)


def memory_update(theta_m: float) -> LocalUnitary:
    """Site-memory rotation with memory strength ``theta_m``."""
    return symmetric_scattering(theta_m, MEMORY_BASIS)


def balanced() -> LocalUnitary:
    """Coin used at unvisited sites: ``(1/sqrt 2) [[1, i], [i, 1]]``."""
    return LocalUnitary(np.array([[1, 1j], [1j, 1]]) / np.sqrt(2), VELOCITY_BASIS)


def back_action(theta_b: float) -> LocalUnitary:
    """Coin used at visited sites."""
    return symmetric_scattering(theta_b)


def pauli_x(basis=VELOCITY_BASIS) -> LocalUnitary:
    return LocalUnitary(np.array([[0, 1], [1, 0]]), basis)


def identity(dim: int, basis=()) -> LocalUnitary:
    return LocalUnitary(np.eye(dim), basis)


def meyer_scattering(theta: float, alpha: float = 0.0, beta: float = 0.0) -> LocalUnitary:
    """Particle-conserving two-subcell scattering on ``|00>,|01>,|10>,|11>``."""
    c, s = np.cos(theta), np.sin(theta)
    ea = np.exp(1j * alpha)
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0, 0] = 1
    m[1, 1] = m[2, 2] = 1j * ea * s
    m[1, 2] = m[2, 1] = ea * c
    m[3, 3] = np.exp(1j * beta)
    return LocalUnitary(m, PAIR_BASIS)


def pair_ricochet(block: LocalUnitary) -> LocalUnitary:
    """Embed a 2x2 velocity block on ``span{|01>, |10>}``; identity on ``|00>, |11>``.

    ``|01>`` (right mover) pairs with velocity ``+1`` and ``|10>`` with ``-1``.
    """
    m = np.eye(4, dtype=np.complex128)
    m[1:3, 1:3] = block.m
    return LocalUnitary(m, PAIR_BASIS)


def direction_swap() -> LocalUnitary:
    """Permutation exchanging w<->e and s<->n."""
    m = np.array([[0, 1, 0, 0],
                  [1, 0, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 1, 0]])
    return LocalUnitary(m, DIRECTIONS)


def has_zero_diagonal(u: LocalUnitary, tol: float = 1e-12) -> bool:
    return bool(np.all(np.abs(np.diag(u.m)) <= tol))


def non_repeating(c) -> LocalUnitary:
    """Validate a 4x4 direction coin with zero diagonal.

    Raises
    ------
    ValueError
        If any diagonal entry exceeds ``1e-12`` in modulus.
    """
    u = c if isinstance(c, LocalUnitary) else LocalUnitary(c, DIRECTIONS)
    if u.dim != 4:
        raise ValueError("direction coin must be 4x4")
    if not has_zero_diagonal(u):
        raise ValueError(f"non-repeating coin needs a zero diagonal, got {np.diag(u.m)}")
    return LocalUnitary(u.m, DIRECTIONS)


def non_reversing(c) -> LocalUnitary:
    """``c . J`` for a zero-diagonal ``c``: never reverses direction."""
    rep = non_repeating(c)
    return LocalUnitary(rep.m @ direction_swap().m, DIRECTIONS)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_zero_diagonal_unitary(rng: np.random.Generator) -> LocalUnitary:
    """Random 4x4 unitary with an all-zero diagonal.

    Draws two Haar 2x2 blocks placed off-diagonally, conjugates by a random
    permutation (which permutes the diagonal) and applies random phases on
    both sides.
    """
    a = haar_unitary(2, rng)
    b = haar_unitary(2, rng)
    m = np.zeros((4, 4), dtype=np.complex128)
    m[0:2, 2:4] = a
    m[2:4, 0:2] = b
    p = np.eye(4)[rng.permutation(4)]
    m = p @ m @ p.T
    left = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    right = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    m = left[:, None] * m * right[None, :]
    return non_repeating(m)


def conference_coin() -> LocalUnitary:
    """Real orthogonal zero-diagonal direction coin built from a 4x4 conference matrix."""
    m = np.array([
        [0, 1, 1, 1],
        [1, 0, -1, 1],
        [1, 1, 0, -1],
        [1, -1, 1, 0],
    ]) / np.sqrt(3)
    return non_repeating(m)
