"""Built-in self test.

``quick`` checks identities whose values are known exactly (about ten seconds);
``full`` runs the acceptance suite.
"""

from __future__ import annotations

import numpy as np

from . import acceptance
from .additivity import asymp_probe
from .channels import (
    ConstraintSet,
    direct_sum_mixture,
    donald_residual,
    holevo_quantity,
    holevo_relent_form,
    make_channel,
    output_entropy,
)
from .relent import prop5_suite, transform_power_check
from .shor import LiftedEnsemble, lifted_holevo, shor_hat, shor_tilde_dp, tilde_entropy_closed_form
from .solvers import SolverOptions, constrained_capacity, eof, penalized_capacity, wootters_eof
from .spectral import entropy, h2, partial_trace, relative_entropy, trace_distance
from .states import random_ensemble, random_state

QUICK = SolverOptions(restarts=4)


def _bell():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v)


def check_entropy_values():
    got = (entropy(np.eye(2) / 2), entropy(np.diag([1.0, 0.0])), entropy(np.eye(4) / 4))
    return np.allclose(got, (1.0, 0.0, 2.0), atol=1e-12), {"values": got}


def check_relative_entropy_zero():
    rho = random_state(3, None, 1)
    val = relative_entropy(rho, rho)
    return abs(val) < 1e-12, {"S(rho||rho)": val}


def check_trace_distance():
    val = trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    return abs(val - 2.0) < 1e-12, {"distance": val}


def check_partial_trace_product():
    a, b = random_state(2, None, 2), random_state(3, None, 3)
    dev = np.abs(partial_trace(np.kron(a, b), (2, 3), 0) - a).max()
    return dev < 1e-12, {"max_dev": dev}


def check_donald_identity():
    worst = 0.0
    for s in range(10):
        ch = make_channel("random", dim_in=3, dim_out=2, n_kraus=2, seed=s)
        e = random_ensemble(3, 3, 100 + s)
        worst = max(worst, abs(donald_residual(ch, e, random_state(3, None, 200 + s))))
    return worst < 1e-8, {"max_residual": worst}


def check_chi_relent_form():
    ch = make_channel("amplitude_damping", gamma=0.4)
    e = random_ensemble(2, 4, 7)
    dev = abs(holevo_quantity(ch, e) - holevo_relent_form(ch, e))
    return dev < 1e-9, {"dev": dev}


def check_direct_sum_entropy():
    idc = make_channel("identity", dim=2)
    val = output_entropy(direct_sum_mixture([idc, idc], [0.5, 0.5]).apply(np.eye(2) / 2))
    return abs(val - 2.0) < 1e-12, {"entropy": val}


def check_identity_capacity():
    val = constrained_capacity(make_channel("identity", dim=2), None, QUICK).value
    return abs(val - 1.0) < 1e-6, {"capacity": val}


def check_linear_constraint_value():
    idc = make_channel("identity", dim=2)
    val = constrained_capacity(idc, ConstraintSet.linear([np.diag([1.0, 0.0])], [0.25]), QUICK).value
    return abs(val - h2(0.25)) < 1e-4, {"capacity": val, "expected": h2(0.25)}


def check_penalized_value():
    val = penalized_capacity(make_channel("identity", dim=2), np.diag([1.0, 0.0]), 1.0, QUICK).value
    return abs(val - np.log2(3)) < 1e-4, {"value": val, "expected": np.log2(3)}


def check_eof_endpoints():
    bell = eof(_bell(), (2, 2), QUICK).value
    prod = eof(np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2), (2, 2), QUICK).value
    ok = abs(bell - 1) < 1e-6 and abs(prod) < 1e-6 and abs(wootters_eof(_bell()) - 1) < 1e-9
    return ok, {"bell": bell, "product": prod}


def check_tilde_closed_form():
    phi = make_channel("depolarizing", p=0.3, dim=2)
    a = np.diag([0.2, 0.9])
    rho = random_state(2, None, 5)
    direct = shor_tilde_dp(phi, a, 1.0, "2^30").apply(rho).entropy()
    dev = abs(direct - tilde_entropy_closed_form(phi, a, 1.0, "2^30", rho))
    return dev < 1e-10, {"dev": dev}


def check_lifted_matches_materialized():
    ext = shor_hat(make_channel("amplitude_damping", gamma=0.2), np.diag([0.3, 0.8]), 0.4, 3)
    e = random_ensemble(2, 3, 11)
    lifted = LiftedEnsemble(e, 3)
    sym = lifted_holevo(ext, lifted)
    mat = lifted.materialize()
    avg = ext.apply(mat.average()).entropy()
    direct = avg - sum(p * ext.apply(s).entropy() for p, s in mat)
    return abs(sym - direct) < 1e-10, {"symbolic": sym, "materialized": direct}


def check_asymp_smallest_register():
    rep = asymp_probe(make_channel("identity", dim=2), np.eye(2), 1.0, [2], None, QUICK)[0]
    return abs(rep.lhs - 1.0) < 1e-6 and abs(rep.rhs - 2.0) < 1e-6, {"lhs": rep.lhs, "limit": rep.rhs}


def check_curves_degenerate():
    rho = random_state(3, None, 4)
    rep = prop5_suite(rho, rho)
    return rep.passed, {k: c["worst"] for k, c in rep.checks.items()}


def check_power_transform():
    worst = max(transform_power_check(a) for a in (0.5, 2.0, 3.0))
    return worst < 1e-8, {"max_dev": worst}


QUICK_CHECKS = {name[len("check_"):]: fn for name, fn in sorted(globals().items()) if name.startswith("check_")}


def run(level: str = "quick", echo=print) -> int:
    """0 when every check passes, 1 otherwise; failures are echoed with witness values."""
    if level == "full":
        results = acceptance.run_all(echo=echo)
        return 0 if all(r.passed for r in results) else 1
    if level != "quick":
        raise ValueError(f"unknown self-test level {level!r}")
    failed = 0
    for name, fn in QUICK_CHECKS.items():
        try:
            ok, witness = fn()
        except Exception as exc:  # a crashing invariant is a failing invariant
            ok, witness = False, {"error": repr(exc)}
        if not ok:
            failed += 1
        if echo:
            echo(f"[{'PASS' if ok else 'FAIL'}] {name}" + ("" if ok else f" {witness}"))
    return 0 if failed == 0 else 1
