import numpy as np
import pytest

from holevolab.additivity import (
    GapReport,
    asymp_probe,
    cor6_check,
    corollary7_bound,
    glo_gap,
    inequality_report,
    prop2_check,
    prop3_check,
    relaxation_sequence,
    s_c_add_check,
    theorem2_gap,
    theorem3_ii_gap,
    tilde_moe_probe,
)
from holevolab.channels import ConstraintSet, make_channel, measurement_channel
from holevolab.errors import ParameterError
from holevolab.solvers import min_output_entropy, constrained_capacity
from holevolab.spectral import entropy
from holevolab.states import random_positive_contraction, random_state

from conftest import bell, ket

ID2 = make_channel("identity", dim=2)
DEP1 = make_channel("depolarizing", p=1.0)


def cq_channel():
    return make_channel("cq_measure_prepare", povm=[np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
                        states=[ket(1, 0), np.diag([0.3, 0.7])])


def test_gap_report_senses():
    assert GapReport("x", 0, 0, 0.1, 0.2, "abs").within_bound
    assert not GapReport("x", 0, 0, -0.3, 0.2, "abs").within_bound
    assert GapReport("x", 0, 0, 0.0, -0.1, "ge").within_bound
    assert not GapReport("x", 0, 0, np.nan, 1.0, "abs").within_bound
    assert GapReport("x", 0, 0, 5.0).within_bound


def test_inequality_identity_product_state(fast):
    sigma = np.kron(random_state(2, None, 1), random_state(2, None, 2))
    reps = inequality_report(ID2, ID2, sigma, fast)
    assert reps["subadditivity"].gap == pytest.approx(0.0, abs=1e-6)
    assert all(r.within_bound for r in reps.values())


def test_inequality_identity_bell(fast):
    reps = inequality_report(ID2, ID2, bell(), fast, include_product=False)
    assert reps["subadditivity"].lhs == pytest.approx(0.0, abs=1e-7)
    assert reps["subadditivity"].gap == pytest.approx(2.0, abs=1e-6)


def test_inequality_entanglement_breaking_factor(fast):
    psi = make_channel("random", dim_in=2, dim_out=2, seed=5)
    reps = inequality_report(cq_channel(), psi, random_state(4, None, 6), fast, include_product=False)
    assert reps["subadditivity"].gap >= -2e-3


def test_glo_gap_nonnegative():
    m = measurement_channel(np.eye(2), 2)
    for s in range(5):
        assert glo_gap(random_state(4, None, s), m) >= -1e-10


def test_theorem2_trivial_cases(fast):
    rep = theorem2_gap(ID2, ID2, np.eye(2) / 2, np.eye(2) / 2, fast)
    assert rep.lhs == pytest.approx(0.0, abs=1e-6) and rep.rhs == pytest.approx(0.0, abs=1e-6)
    rep = theorem2_gap(DEP1, DEP1, random_state(2, None, 1), random_state(2, None, 2), fast)
    assert rep.lhs == pytest.approx(2.0, abs=1e-6) and rep.rhs == pytest.approx(2.0, abs=1e-6)


def test_theorem2_cq_with_identity(fast):
    rep = theorem2_gap(cq_channel(), ID2, random_state(2, None, 3), random_state(2, None, 4), fast)
    assert abs(rep.gap) <= 2e-3


def test_corollary7_cases(fast):
    rho, vr = random_state(2, None, 5), random_state(2, None, 6)
    rep = corollary7_bound(ID2, ID2, rho, vr, fast)
    assert rep.provenance["relative_entropy"] == pytest.approx(0.0, abs=1e-6)
    assert rep.gap == pytest.approx(0.0, abs=1e-5)
    rep = corollary7_bound(DEP1, DEP1, rho, vr, fast)
    assert rep.lhs == pytest.approx(rep.rhs, abs=1e-6)
    rep = corollary7_bound(make_channel("random", dim_in=2, dim_out=2, seed=1),
                           make_channel("random", dim_in=2, dim_out=2, seed=2), rho, vr, fast)
    assert rep.within_bound


def test_prop3_zero_weight(fast):
    phi = make_channel("amplitude_damping", gamma=0.3)
    psi = make_channel("depolarizing", p=0.2)
    rep = prop3_check(phi, psi, np.diag([0.4, 0.6]), 0.0, 4, None, fast)
    assert rep.gap == pytest.approx(0.0, abs=1e-6)
    assert rep.bound == pytest.approx(2e-3)


def test_prop3_trivial_partner_bound(fast):
    rep = prop3_check(make_channel("amplitude_damping", gamma=0.3), None, np.eye(2), 0.3, 8, None, fast)
    assert rep.bound == pytest.approx(0.3 + 2e-3)
    assert rep.within_bound


def test_prop3_qubit_pair(fast):
    rng = np.random.default_rng(3)
    rep = prop3_check(make_channel("random", dim_in=2, dim_out=2, seed=3), make_channel("depolarizing", p=0.3),
                      random_positive_contraction(2, rng), 0.25, 8, None, fast)
    assert rep.bound == pytest.approx(0.5 + 2e-3)
    assert rep.within_bound


def test_prop3_symbolic_register(fast):
    rep = prop3_check(ID2, None, np.eye(2), 0.5, "2^30", None, fast)
    assert np.isfinite(rep.lhs) and rep.within_bound


def test_asymp_probe_zero_rate(fast):
    phi = make_channel("amplitude_damping", gamma=0.4)
    reps = asymp_probe(phi, np.diag([0.3, 0.9]), 0.0, [2, 8], None, fast)
    assert all(abs(r.gap) < 1e-6 for r in reps)


def test_asymp_probe_identity(fast):
    reps = asymp_probe(ID2, np.eye(2), 1.0, [2, 4, 16, "2^30"], None, fast)
    assert all(r.rhs == pytest.approx(2.0, abs=1e-6) for r in reps)
    assert all(r.within_bound for r in reps)
    gaps = [r.gap for r in reps]
    assert gaps == sorted(gaps, reverse=True)
    assert reps[-1].gap < 0.07


def test_asymp_probe_rejects_large_rate(fast):
    with pytest.raises(ParameterError):
        asymp_probe(ID2, np.eye(2), 2.0, [2], None, fast)


def test_theorem3_ii_identity(fast):
    a, b = np.diag([0.3, 0.8]), np.array([[0.5, 0.1], [0.1, 0.2]])
    rep = theorem3_ii_gap(ID2, ID2, a, b, fast)
    assert rep.lhs == pytest.approx(np.linalg.eigvalsh(np.kron(a, np.eye(2)) + np.kron(np.eye(2), b)).min(), abs=1e-7)
    assert rep.gap == pytest.approx(0.0, abs=1e-7)


def test_theorem3_ii_zero_penalty_is_moe_additivity(fast):
    phi, psi = make_channel("amplitude_damping", gamma=0.3), make_channel("depolarizing", p=0.4)
    z = np.zeros((2, 2))
    rep = theorem3_ii_gap(phi, psi, z, z, fast)
    assert rep.rhs == pytest.approx(min_output_entropy(phi, fast).value + min_output_entropy(psi, fast).value,
                                    abs=1e-7)
    assert abs(rep.gap) <= 2e-3


def test_theorem3_ii_cq(fast):
    rng = np.random.default_rng(4)
    rep = theorem3_ii_gap(cq_channel(), make_channel("random", dim_in=2, dim_out=2, seed=9),
                          random_positive_contraction(2, rng), random_positive_contraction(2, rng), fast)
    assert abs(rep.gap) <= 2e-3


def test_tilde_moe_zero_rates(fast):
    phi, psi = make_channel("amplitude_damping", gamma=0.3), make_channel("depolarizing", p=0.4)
    reps = tilde_moe_probe(phi, psi, np.eye(2), 0.0, np.eye(2), 0.0, [2], [2], fast)
    moe = min_output_entropy(phi, fast).value + min_output_entropy(psi, fast).value
    assert reps[0].rhs == pytest.approx(moe, abs=1e-6)
    assert reps[0].lhs == pytest.approx(moe, abs=1e-6)


def test_tilde_moe_identity_limits(fast):
    reps = tilde_moe_probe(ID2, ID2, np.eye(2), 1.0, np.eye(2), 1.0, [4, "2^30"], [8], fast)
    assert all(r.rhs == pytest.approx(2.0, abs=1e-7) for r in reps)
    assert reps[0].provenance["limit_phi"] == pytest.approx(1.0, abs=1e-7)
    assert all(r.within_bound for r in reps)


def test_s_c_add(fast):
    psi = make_channel("amplitude_damping", gamma=0.35)
    rho = random_state(2, None, 8)
    rep = s_c_add_check(psi, rho, fast)
    assert rep.rhs == pytest.approx(entropy(rho) + constrained_capacity(psi, None, fast).value, abs=1e-6)
    assert rep.within_bound


def test_cor6_product_of_bells(fast):
    sigma = np.kron(bell(), bell())
    rep = cor6_check(sigma, (2, 2, 2, 2), fast.with_(restarts=2))
    assert rep.rhs == pytest.approx(2.0, abs=1e-8)
    assert rep.lhs == pytest.approx(2.0, abs=1e-4)
    assert rep.within_bound


def test_relaxation_sequence_decreases(fast):
    cs = ConstraintSet.linear([np.diag([1.0, 0.0])], [0.1])
    seq = relaxation_sequence(ID2, cs, [2, 5, 20], fast)
    vals = [seq[m].value for m in (2, 5, 20)]
    assert vals[0] >= vals[1] >= vals[2] >= seq["limit"].value - 1e-6
    assert seq["limit"].value == pytest.approx(0.468996, abs=1e-4)


def test_prop2_probes(fast):
    cs = ConstraintSet.linear([np.diag([1.0, 0.0])], [0.3])
    probes = [np.diag([0.1, 0.9]), np.diag([0.3, 0.7]), np.diag([0.2, 0.8])]
    reps = prop2_check(make_channel("amplitude_damping", gamma=0.2), cs, probes, fast)
    assert all(r.within_bound for r in reps)
    with pytest.raises(ParameterError):
        prop2_check(ID2, cs, [np.eye(2) / 2], fast)
