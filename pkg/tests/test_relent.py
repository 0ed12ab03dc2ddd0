import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holevolab.channels import make_channel
from holevolab.errors import ParameterError
from holevolab.relent import (
    derivative,
    fixed_point_deviation,
    integral_of_g,
    mixture_curve,
    prop5_suite,
    sample_curves,
    transform_power_check,
    write_curves_csv,
)
from holevolab.spectral import relative_entropy
from holevolab.states import Ensemble, random_ensemble, random_state

from conftest import bell, ket

DIAG = np.diag([0.9, 0.1])


def _kl(p, q):
    return float((p * np.log2(p / q)).sum())


def test_equal_states_give_zero_curves():
    rho = random_state(3, None, 2)
    pair = sample_curves(rho, rho)
    assert np.allclose(pair.f_samples, 0, atol=1e-12) and np.allclose(pair.g_samples, 0, atol=1e-12)
    assert prop5_suite(rho, rho).passed


def test_diagonal_pair_endpoint_value():
    pair = sample_curves(DIAG, np.eye(2) / 2, [0.0, 0.5, 1.0])
    kl = _kl(np.array([0.9, 0.1]), np.array([0.5, 0.5]))
    assert pair.f_samples[-1] == pytest.approx(kl, abs=1e-12)
    assert pair.f_samples[-1] == pytest.approx(0.53100, abs=1e-5)


def test_diagonal_pair_slope_at_one():
    rep = prop5_suite(DIAG, np.eye(2) / 2)
    both = _kl(np.array([0.9, 0.1]), np.array([0.5, 0.5])) + _kl(np.array([0.5, 0.5]), np.array([0.9, 0.1]))
    assert both == pytest.approx(1.26797, abs=1e-5)
    assert rep.checks["slope_at_1"]["value"] == pytest.approx(both, abs=1e-12)
    assert rep.passed


def test_pure_state_g_diverges_but_integrates():
    sigma = ket(1, 0.3)
    vs = random_state(2, None, 4)
    pair = sample_curves(sigma, vs, [0.9, 0.99, 0.999])
    assert pair.g_samples[0] < pair.g_samples[1] < pair.g_samples[2]
    assert not pair.equal_support
    # refining the quadrature upper limit converges
    total = integral_of_g(sigma, vs)
    assert np.isfinite(total) and total > 0


def test_integral_of_g_matches_trapezoid_on_full_rank():
    sigma, vs = random_state(2, None, 5), random_state(2, None, 6)
    xs = np.linspace(0, 1, 4001)
    gs = [relative_entropy(vs, x * sigma + (1 - x) * vs) for x in xs]
    assert integral_of_g(sigma, vs) == pytest.approx(np.trapezoid(gs, xs), abs=1e-5)


@pytest.mark.parametrize("dim,seed", [(2, 0), (2, 1), (3, 2), (3, 3)])
def test_prop5_suite_random_full_rank(dim, seed):
    rep = prop5_suite(random_state(dim, None, seed), random_state(dim, None, seed + 100))
    failing = {k: v for k, v in rep.checks.items() if v["passed"] is False}
    assert not failing


def test_prop5_suite_unequal_support_skips_slope_at_one():
    rep = prop5_suite(ket(1, 0), random_state(2, None, 9))
    assert rep.checks["slope_at_1"]["passed"] is None
    assert rep.passed


def test_transform_of_powers_has_eigenvalue_alpha_minus_one():
    for alpha in (0.5, 2.0, 3.5):
        assert transform_power_check(alpha) < 1e-8


def test_fixed_point_near_zero():
    sigma, vs = random_state(3, None, 7), random_state(3, None, 8)
    assert fixed_point_deviation(sigma, vs, 0.01) < 0.05


def test_derivative_of_polynomial():
    assert derivative(lambda x: x**3, 0.5, 1, 1e-3) == pytest.approx(0.75, abs=1e-9)
    assert derivative(lambda x: x**3, 0.5, 2, 1e-3) == pytest.approx(3.0, abs=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_curves_are_convex_and_nonnegative(seed):
    pair = sample_curves(random_state(2, None, seed), random_state(2, None, seed + 1))
    assert pair.convex
    assert pair.f_samples.min() >= -1e-12 and pair.g_samples.min() >= -1e-12


def test_csv_columns(tmp_path):
    pair = sample_curves(DIAG, np.eye(2) / 2, [0.0, 0.5])
    path = tmp_path / "c.csv"
    write_curves_csv(pair, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["x", "f", "g", "bound"]
    assert float(rows[2][3]) == pytest.approx(pair.pinsker_constant() * 0.25 / np.log(2))


def test_mixture_product_probe_is_flat():
    phi, psi = make_channel("amplitude_damping", gamma=0.3), make_channel("depolarizing", p=0.2)
    e1, e2 = random_ensemble(2, 2, 1), random_ensemble(2, 3, 2)
    rep = mixture_curve(phi, psi, e1, e2, e1.tensor(e2))
    assert rep.delta == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(rep.h, 0, atol=1e-10) and rep.passed


def test_mixture_identity_bell_probe():
    idc = make_channel("identity", dim=2)
    eig = Ensemble.from_items([(0.5, ket(1, 0)), (0.5, ket(0, 1))])
    probe = Ensemble.from_items([(1.0, bell())])
    rep = mixture_curve(idc, idc, eig, eig, probe)
    assert rep.delta == pytest.approx(0.0, abs=1e-12)
    # x Bell + (1-x) I/4 has spectrum (x + (1-x)/4, (1-x)/4 x3); the reference is I/4
    lam = np.array([[x + (1 - x) / 4] + [(1 - x) / 4] * 3 for x in rep.grid])
    closed = 2 + np.array([np.sum(v[v > 0] * np.log2(v[v > 0])) for v in lam])
    assert np.allclose(rep.f, closed, atol=1e-12)
    assert np.allclose(rep.h, -rep.f, atol=1e-10)
    assert rep.max_residual < 1e-8


@pytest.mark.parametrize("seed", range(3))
def test_mixture_identity_random_channels(seed):
    phi = make_channel("random", dim_in=2, dim_out=2, seed=seed)
    psi = make_channel("random", dim_in=2, dim_out=2, seed=seed + 10)
    e1, e2 = random_ensemble(2, 3, seed), random_ensemble(2, 3, seed + 1)
    # a probe with the same marginals: correlate the two ensembles' members
    probe = Ensemble(e1.probs, tuple(np.kron(s, e2.average()) for s in e1.states))
    rep = mixture_curve(phi, psi, e1, e2, probe)
    assert len(rep.grid) == 11 and rep.max_residual < 1e-8


def test_mixture_rejects_wrong_marginals():
    idc = make_channel("identity", dim=2)
    e = random_ensemble(2, 2, 3)
    with pytest.raises(ParameterError):
        mixture_curve(idc, idc, e, e, Ensemble.from_items([(1.0, bell())]))
