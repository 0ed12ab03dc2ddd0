import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holevolab.errors import DimensionError, InvalidOperatorError
from holevolab.spectral import entropy
from holevolab.states import (
    BlockOperator,
    Ensemble,
    HybridState,
    QuantumBlock,
    UniformClassicalBlock,
    UniformHybridState,
    average_state,
    hjw_ensemble,
    random_ensemble,
    random_isometry,
    random_state,
)

from conftest import ket


def test_average_of_single_member():
    rho = random_state(2, None, 3)
    assert np.allclose(average_state(Ensemble.from_items([(1.0, rho)])), rho)


def test_average_of_basis_states():
    e = Ensemble.from_items([(0.5, ket(1, 0)), (0.5, ket(0, 1))])
    assert np.allclose(e.average(), np.eye(2) / 2)


def test_average_matches_direct_summation():
    e = random_ensemble(2, 5, 11)
    direct = np.zeros((2, 2), dtype=complex)
    for i in range(len(e)):
        direct += e.probs[i] * e.states[i]
    assert np.allclose(e.average(), direct, atol=1e-14)


def test_ensemble_validation():
    with pytest.raises(InvalidOperatorError):
        Ensemble(np.array([0.6, 0.6]), (ket(1, 0), ket(0, 1)))
    with pytest.raises(DimensionError):
        Ensemble(np.array([0.5, 0.5]), (ket(1, 0), np.eye(3) / 3))


def test_hjw_identity_mix_gives_eigen_ensemble():
    e = hjw_ensemble(np.eye(2) / 2, 2, np.eye(2))
    assert np.allclose(e.probs, [0.5, 0.5])
    projs = sorted(np.real(np.diag(s)).tolist() for s in e.states)
    assert np.allclose(projs, [[0, 1], [1, 0]])


def test_hjw_pure_state_members_all_equal():
    rho = ket(1, 1j)
    e = hjw_ensemble(rho, 3, random_isometry(3, 1, 4))
    for p, s in e:
        if p > 1e-12:
            assert np.allclose(s, rho)


def test_hjw_recombines_to_input():
    rho = np.diag([0.75, 0.25])
    e = hjw_ensemble(rho, 3, random_isometry(3, 2, 5))
    assert len(e) <= 3
    assert np.allclose(e.average(), rho, atol=1e-12)


def test_random_state_rank_and_determinism():
    pure = random_state(2, 1, 42)
    assert entropy(pure) == pytest.approx(0.0, abs=1e-10)
    assert entropy(random_state(4, 4, 42)) > 0
    assert np.array_equal(random_state(3, 2, 9), random_state(3, 2, 9))
    a, b = random_ensemble(3, 4, 9), random_ensemble(3, 4, 9)
    assert np.array_equal(a.probs, b.probs)
    assert all(np.array_equal(x, y) for x, y in zip(a.states, b.states))


def test_uniform_classical_block_closed_form():
    blk = UniformClassicalBlock(0.4, 2**30)
    expected = 0.4 * 30 - 0.4 * np.log2(0.4)
    assert blk.entropy() == pytest.approx(expected, rel=1e-12)
    small = UniformClassicalBlock(0.4, 8)
    assert small.entropy() == pytest.approx(entropy(np.eye(8) * 0.05), abs=1e-12)


def test_block_operator_entropy_is_concatenated_spectrum():
    a, b = random_state(2, None, 1), random_state(3, None, 2)
    op = BlockOperator((QuantumBlock(a), QuantumBlock(b)), (0.3, 0.7))
    dense = np.zeros((5, 5), dtype=complex)
    dense[:2, :2], dense[2:, 2:] = 0.3 * a, 0.7 * b
    assert op.entropy() == pytest.approx(entropy(dense), abs=1e-12)
    assert op.trace() == pytest.approx(1.0)


def test_hybrid_delta_and_uniform():
    rho = random_state(2, None, 3)
    h = HybridState.delta(rho, 1, 3)
    assert h.d == 3
    assert np.allclose(h.parts[1], rho) and np.allclose(h.parts[0], 0)
    u = UniformHybridState(rho, 4).materialize()
    assert all(np.allclose(p, rho / 4) for p in u.parts)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(1, 6), st.integers(0, 2**31))
def test_random_ensemble_average_is_state(dim, n, seed):
    avg = random_ensemble(dim, n, seed).average()
    assert np.trace(avg).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(avg).min() > -1e-12
