import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlgawalk.errors import LabelCollisionError, MalformedClassifierError, NotUnitaryError
from qlgawalk.matrices import symmetric_scattering
from qlgawalk.state import (
    LocalUnitary,
    SparseState,
    from_pairs,
    inner_product,
    max_deviation,
    norm2,
    permute,
    prune,
    scatter,
    to_vector,
    unitarity_error,
)

R2 = 1 / np.sqrt(2)

amplitudes = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
states = st.dictionaries(st.integers(-20, 20), amplitudes, max_size=12)


def test_norm2_examples(backend):
    assert norm2(SparseState()) == 0
    assert norm2(SparseState({0: 1})) == 1
    assert norm2(SparseState({0: R2, 1: 1j * R2})) == pytest.approx(1, abs=1e-15)


def test_inner_product_examples(backend):
    a = SparseState({0: 1})
    assert inner_product(a, a) == 1
    assert inner_product(a, SparseState({1: 1})) == 0
    assert inner_product(SparseState({0: 1j}), a) == -1j


def test_permute_examples(backend):
    s = SparseState({0: 0.6, 1: 0.8j})
    assert permute(s, lambda x: x) == s
    assert permute(SparseState({0: 1}), lambda x: x + 1) == SparseState({1: 1})
    # oldest tail slot moves to the front
    tail = SparseState({(1, -1): 1})
    assert permute(tail, lambda t: (t[-1],) + t[:-1]) == SparseState({(-1, 1): 1})


def test_permute_collision(backend):
    with pytest.raises(LabelCollisionError):
        permute(SparseState({0: 1, 1: 1}), lambda x: 0)


def test_scatter_examples(backend):
    def classify(label):
        return "site", 0 if label == "+" else 1

    def compose(_, i):
        return "+-"[i]

    s = SparseState({"+": 1})
    out = scatter(s, classify, LocalUnitary(np.eye(2), ("+1", "-1")), compose)
    assert out == s
    out = scatter(s, classify, symmetric_scattering(np.pi / 4), compose)
    assert max_deviation(out, SparseState({"+": R2, "-": 1j * R2})) < 1e-15
    out = scatter(s, classify, symmetric_scattering(np.pi / 2), compose)
    assert out.amplitude("-") == pytest.approx(1j, abs=1e-15)
    assert abs(out.amplitude("+")) < 1e-15


def test_scatter_rejects_bad_local_index(backend):
    with pytest.raises(MalformedClassifierError):
        scatter(SparseState({0: 1}), lambda l: (0, 5), symmetric_scattering(0.3),
                lambda c, i: i)


def test_scatter_per_class_unitaries(backend):
    coins = {0: symmetric_scattering(0.0), 1: symmetric_scattering(np.pi / 2)}
    s = SparseState({(0, 0): 1, (1, 0): 1})
    out = scatter(s, lambda l: l, lambda c: coins[c], lambda c, i: (c, i))
    assert out.amplitude((0, 0)) == 1
    assert out.amplitude((1, 1)) == pytest.approx(1j)


def test_prune_examples(backend):
    assert prune(SparseState({0: 1, 1: 0}), 0).entries == {0: 1}
    assert prune(SparseState({0: 1e-20, 1: 1}), 1e-15).entries == {1: 1}
    assert prune(SparseState({0: 0.5}), 0.6).entries == {}
    with pytest.raises(ValueError):
        prune(SparseState({0: 1}), -1)


def test_local_unitary_validation():
    with pytest.raises(NotUnitaryError):
        LocalUnitary(np.array([[1, 1], [0, 1]]), ("a", "b"))
    with pytest.raises(ValueError):
        LocalUnitary(np.eye(2), ("a",))
    u = symmetric_scattering(0.4)
    assert unitarity_error(u.m) < 1e-15
    assert u.entry("+1", "-1") == pytest.approx(1j * np.sin(0.4))


def test_local_unitary_product_needs_same_basis():
    u = symmetric_scattering(0.4)
    assert np.allclose((u @ u).m, symmetric_scattering(0.8).m)
    with pytest.raises(ValueError):
        u @ symmetric_scattering(0.4, ("0", "1"))


def test_state_rejects_non_finite():
    with pytest.raises(ValueError):
        SparseState({0: float("nan")})


def test_from_pairs_and_vector():
    s = from_pairs([(0, 1), (0, 1j), (2, 3)])
    assert s.amplitude(0) == 1 + 1j
    assert np.array_equal(to_vector(s, [2, 0, 1]), np.array([3, 1 + 1j, 0]))


@given(states)
@settings(max_examples=60, deadline=None)
def test_inner_product_is_hermitian(entries):
    a = SparseState(entries)
    b = SparseState({k + 1: v * 0.5j for k, v in entries.items()})
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)), abs=1e-9)
    assert inner_product(a, a).real == pytest.approx(norm2(a), rel=1e-12, abs=1e-12)


@given(states, st.floats(0, 2 * np.pi))
@settings(max_examples=60, deadline=None)
def test_scatter_preserves_norm(entries, theta):
    s = SparseState(entries)
    out = scatter(s, lambda x: (x // 2, x % 2), symmetric_scattering(theta),
                  lambda c, i: 2 * c + i)
    assert norm2(out) == pytest.approx(norm2(s), rel=1e-12, abs=1e-12)


@given(states, st.integers(-5, 5))
@settings(max_examples=60, deadline=None)
def test_permute_is_invertible(entries, shift):
    s = SparseState(entries)
    back = permute(permute(s, lambda x: x + shift), lambda x: x - shift)
    assert back == s
