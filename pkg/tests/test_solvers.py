import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from holevolab.channels import ConstraintSet, holevo_quantity, make_channel
from holevolab.errors import InfeasibleError, SlaterError
from holevolab.solvers import (
    certify_optimal,
    chi_function,
    conjugate_H,
    constrained_capacity,
    eof,
    kkt_certificate,
    min_output_entropy,
    nu_H,
    penalized_capacity,
    wootters_eof,
)
from holevolab.spectral import entropy, h2
from holevolab.states import Ensemble, random_state

from conftest import bell, ket

ID2 = make_channel("identity", dim=2)
P0 = np.diag([1.0, 0.0])


def _bloch_state(theta, phi):
    v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return np.outer(v, v.conj())


def _bloch_min(fun, n=4000):
    """Fibonacci-sphere grid followed by a local refinement: an oracle independent of the solvers."""
    k = np.arange(n) + 0.5
    thetas, phis = np.arccos(1 - 2 * k / n), np.pi * (1 + 5**0.5) * k
    vals = [fun(_bloch_state(t, p)) for t, p in zip(thetas, phis)]
    i = int(np.argmin(vals))
    res = minimize(lambda x: fun(_bloch_state(*x)), [thetas[i], phis[i]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13})
    return min(res.fun, vals[i])


def _chi_brute(channel, rho, members=4, samples=20000, seed=0):
    """Random decompositions sqrt(rho) V^T of rho, polished by Nelder-Mead."""
    d = rho.shape[0]
    vals, vecs = np.linalg.eigh(rho)
    root = vecs @ np.diag(np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T

    def chi_of(x):
        z = (x[: members * d] + 1j * x[members * d:]).reshape(members, d)
        q, _ = np.linalg.qr(z)
        psi = q @ root.T  # rows: unnormalised members
        probs = np.einsum("ij,ij->i", psi.conj(), psi).real
        out = 0.0
        for p, v in zip(probs, psi):
            if p > 1e-14:
                out -= p * entropy(channel.apply(np.outer(v, v.conj()) / p))
        return out + entropy(channel.apply(rho))

    rng = np.random.default_rng(seed)
    xs = rng.normal(size=(samples, 2 * members * d))
    scores = np.array([chi_of(x) for x in xs])
    best = -np.inf
    for i in np.argsort(-scores)[:5]:
        res = minimize(lambda x: -chi_of(x), xs[i], method="Nelder-Mead",
                       options={"maxiter": 20000, "xatol": 1e-10, "fatol": 1e-13})
        best = max(best, -res.fun, scores[i])
    return best


def test_chi_identity_at_maximally_mixed(fast):
    assert chi_function(ID2, np.eye(2) / 2, fast).value == pytest.approx(1.0, abs=1e-6)


def test_chi_constant_channel_is_zero(fast):
    ch = make_channel("depolarizing", p=1.0)
    assert chi_function(ch, random_state(2, None, 3), fast).value == pytest.approx(0.0, abs=1e-7)


def test_chi_amplitude_damping_against_brute_force(fast):
    ch = make_channel("amplitude_damping", gamma=0.3)
    rep = chi_function(ch, np.eye(2) / 2, fast)
    oracle = _chi_brute(ch, np.eye(2) / 2, samples=3000)
    assert rep.value >= oracle - 1e-7
    assert rep.value - oracle < 1e-3
    assert np.allclose(rep.argopt.average(), np.eye(2) / 2, atol=1e-8)
    assert holevo_quantity(ch, rep.argopt) == pytest.approx(rep.value, abs=1e-9)


def test_capacity_identity_and_constraints(fast):
    assert constrained_capacity(ID2, None, fast).value == pytest.approx(1.0, abs=1e-6)
    zero = ConstraintSet.linear([P0], [0.0])
    assert constrained_capacity(ID2, zero, fast).value == pytest.approx(0.0, abs=1e-6)
    quarter = ConstraintSet.linear([P0], [0.25])
    oracle = -minimize_scalar(lambda a: -h2(a), bounds=(0, 0.25), method="bounded",
                              options={"xatol": 1e-12}).fun
    assert oracle == pytest.approx(0.811278, abs=1e-6)
    assert constrained_capacity(ID2, quarter, fast).value == pytest.approx(oracle, abs=1e-4)


def test_min_output_entropy_values(fast):
    assert min_output_entropy(ID2, fast).value == pytest.approx(0.0, abs=1e-7)
    assert min_output_entropy(make_channel("depolarizing", p=1.0), fast).value == pytest.approx(1.0, abs=1e-7)
    dep = make_channel("depolarizing", p=0.5)
    oracle = _bloch_min(lambda r: entropy(dep.apply(r)))
    assert min_output_entropy(dep, fast).value == pytest.approx(oracle, abs=1e-4)


def test_nu_h_values(fast):
    dep = make_channel("depolarizing", p=0.5)
    assert nu_H(dep, np.zeros((2, 2)), fast).value == pytest.approx(min_output_entropy(dep, fast).value, abs=1e-7)
    assert nu_H(ID2, np.diag([0.2, 0.7]), fast).value == pytest.approx(0.2, abs=1e-7)
    a = np.array([[0.5, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    oracle = _bloch_min(lambda r: entropy(dep.apply(r)) + np.trace(a @ r).real)
    assert nu_H(dep, a, fast).value == pytest.approx(oracle, abs=1e-4)


def test_conjugate_h_values(fast):
    x = np.diag([1.0, 3.0])
    assert conjugate_H(ID2, x, fast).value == pytest.approx(3.0, abs=1e-7)
    assert conjugate_H(make_channel("depolarizing", p=1.0), x, fast).value == pytest.approx(2.0, abs=1e-7)
    dep = make_channel("depolarizing", p=0.3)
    assert conjugate_H(dep, np.zeros((2, 2)), fast).value == pytest.approx(
        -min_output_entropy(dep, fast).value, abs=1e-7)


def test_penalized_capacity_values(fast):
    dep = make_channel("amplitude_damping", gamma=0.4)
    assert penalized_capacity(dep, P0, 0.0, fast).value == pytest.approx(
        constrained_capacity(dep, None, fast).value, abs=1e-6)
    assert penalized_capacity(ID2, np.eye(2), 1.0, fast).value == pytest.approx(2.0, abs=1e-6)
    oracle = -minimize_scalar(lambda a: -(h2(a) + a), bounds=(0, 1), method="bounded",
                              options={"xatol": 1e-12}).fun
    assert oracle == pytest.approx(np.log2(3), abs=1e-8)
    assert penalized_capacity(ID2, P0, 1.0, fast).value == pytest.approx(oracle, abs=1e-4)


def test_certify_optimal_identity(fast):
    full = ConstraintSet.full(2)
    eig = Ensemble.from_items([(0.5, ket(1, 0)), (0.5, ket(0, 1))])
    good = certify_optimal(ID2, full, eig, 1e-4, fast)
    assert good.passed and good.details["adversary"] == pytest.approx(1.0, abs=1e-6)
    bad = certify_optimal(ID2, full, Ensemble.from_items([(1.0, ket(1, 0))]), 1e-4, fast)
    assert not bad.passed
    # the reference is pure, so any other pure state sits at infinite distance
    assert bad.worst_violation >= 1.0
    assert isinstance(bad.witness, Ensemble)
    fixed = certify_optimal(ID2, ConstraintSet.fixed(np.eye(2) / 2), eig, 1e-4, fast)
    assert fixed.passed


def test_certify_rejects_infeasible_average(fast):
    cs = ConstraintSet.linear([P0], [0.25])
    with pytest.raises(InfeasibleError):
        certify_optimal(ID2, cs, Ensemble.from_items([(1.0, ket(1, 0))]), 1e-4, fast)


def test_kkt_multiplier_matches_stationarity(fast):
    cs = ConstraintSet.linear([P0], [0.25])
    cert = kkt_certificate(ID2, cs, np.diag([0.25, 0.75]), 1e-4, fast)
    assert cert.passed
    assert cert.witness[0] == pytest.approx(np.log2(3), abs=1e-4)


def test_kkt_inactive_constraint(fast):
    cs = ConstraintSet.linear([P0], [0.9])
    cert = kkt_certificate(ID2, cs, np.eye(2) / 2, 1e-4, fast)
    assert cert.passed and cert.witness[0] == 0.0
    off = kkt_certificate(ID2, cs, np.diag([0.2, 0.8]), 1e-4, fast)
    assert not off.passed


def test_kkt_errors(fast):
    with pytest.raises(InfeasibleError):
        kkt_certificate(ID2, ConstraintSet.linear([P0], [0.25]), np.eye(2) / 2, 1e-4, fast)
    with pytest.raises(SlaterError):
        kkt_certificate(ID2, ConstraintSet.linear([P0], [0.0]), np.diag([0.0, 1.0]), 1e-4, fast)


def test_eof_endpoints(fast):
    assert eof(bell(), (2, 2), fast).value == pytest.approx(1.0, abs=1e-6)
    prod = np.kron(ket(1, 1), ket(1, 1j))
    assert eof(prod, (2, 2), fast).value == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_eof_matches_wootters(seed, fast):
    sigma = random_state(4, 2, 100 + seed)
    assert eof(sigma, (2, 2), fast.with_(restarts=8)).value == pytest.approx(wootters_eof(sigma), abs=1e-4)
