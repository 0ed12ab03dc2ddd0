"""The acceptance suite: twelve numbered criteria, each a seeded sweep with a stated tolerance.

Every criterion returns a :class:`CriterionResult`; ``run_all`` prints one
pass/fail line per criterion. Expected values come from independent oracles
(closed forms, one-dimensional maximisations, classical formulas), never from
the solvers under test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .additivity import asymp_probe, cor6_check, inequality_report, prop3_check, s_c_add_check, theorem3_ii_gap
from .channels import (
    ConstraintSet,
    direct_sum_mixture,
    donald_residual,
    holevo_quantity,
    holevo_relent_form,
    make_channel,
    mixed_ensemble_bounds,
    random_cq_channel,
)
from .relent import prop5_suite
from .shor import shor_tilde_dp, tilde_entropy_closed_form
from .solvers import (
    SolverOptions,
    certify_optimal,
    chi_function,
    constrained_capacity,
    eof,
    penalized_capacity,
    wootters_eof,
)
from .spectral import h2
from .states import Ensemble, random_ensemble, random_positive_contraction, random_state

ROOT_SEED = 20240917


def _seed(criterion: int, i: int, k: int = 0) -> int:
    return int(np.random.SeedSequence([ROOT_SEED, criterion, i, k]).generate_state(1, np.uint64)[0])


def _rng(criterion: int, i: int) -> np.random.Generator:
    return np.random.default_rng(_seed(criterion, i, 99))


def _random_channel(dim_in, dim_out, seed, rng=None):
    rng = rng or np.random.default_rng(seed)
    n_min = int(np.ceil(dim_in / dim_out))
    nk = int(rng.integers(max(n_min, 1), 4))
    return make_channel("random", dim_in=dim_in, dim_out=dim_out, n_kraus=max(nk, n_min), seed=seed)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    seconds: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.title} | {self.summary} ({self.seconds:.1f} s)"


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _triples(n=200):
    for i in range(n):
        rng = _rng(1, i)
        din, dout = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        if din * dout == 1:
            din = 2
        ch = _random_channel(din, dout, _seed(1, i, 1), rng)
        ens = random_ensemble(din, int(rng.integers(1, 6)), _seed(1, i, 2))
        omega = random_state(din, None, _seed(1, i, 3))
        yield i, rng, ch, ens, omega


@_timed
def criterion_1(n: int = 200) -> CriterionResult:
    worst = 0.0
    for _, _, ch, ens, omega in _triples(n):
        worst = max(worst, abs(donald_residual(ch, ens, omega)))
    res = CriterionResult(1, "Donald identity", worst < 1e-8, f"max |residual| = {worst:.2e} over {n} triples", 0.0)
    return res


@_timed
def criterion_2(n: int = 200) -> CriterionResult:
    worst_rel, worst_sum = 0.0, 0.0
    for i, rng, ch, ens, _ in _triples(n):
        worst_rel = max(worst_rel, abs(holevo_quantity(ch, ens) - holevo_relent_form(ch, ens)))
        k = int(rng.integers(2, 4))
        parts = [ch] + [_random_channel(ch.dim_in, int(rng.integers(1, 4)), _seed(2, i, j), rng) for j in range(1, k)]
        probs = rng.dirichlet(np.ones(k))
        mix = direct_sum_mixture(parts, probs)
        split = sum(q * holevo_quantity(c, ens) for q, c in zip(probs, parts))
        worst_sum = max(worst_sum, abs(holevo_quantity(mix, ens) - split))
    ok = worst_rel <= 1e-9 and worst_sum <= 1e-9
    return CriterionResult(2, "chi relative-entropy form and direct-sum split", ok,
                           f"max dev {worst_rel:.2e} (relent), {worst_sum:.2e} (direct sum)", 0.0)


@_timed
def criterion_3(n: int = 100) -> CriterionResult:
    worst = np.inf
    for i in range(n):
        rng = _rng(3, i)
        din, dout = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        ch = _random_channel(din, dout, _seed(3, i, 1), rng)
        e = random_ensemble(din, int(rng.integers(1, 5)), _seed(3, i, 2))
        o = random_ensemble(din, int(rng.integers(1, 5)), _seed(3, i, 3))
        for eta in np.linspace(0.1, 1.0, 10):
            lo, delta, hi = mixed_ensemble_bounds(ch, e, o, eta)
            worst = min(worst, delta - lo, hi - delta)
    return CriterionResult(3, "mixed-ensemble double inequality", worst >= -1e-9,
                           f"min slack {worst:.2e} over {n} pairs x 10 eta", 0.0)


@_timed
def criterion_4(n: int = 25, adversary: int = 1000) -> CriterionResult:
    opts = SolverOptions(restarts=16)
    adv = SolverOptions(restarts=adversary)
    fails, worst, sub_caught = [], -np.inf, 0
    for i in range(n):
        ch = _random_channel(2, 2, _seed(4, i, 1))
        opt = constrained_capacity(ch, None, opts.with_(seed=_seed(4, i, 2)))
        c1 = certify_optimal(ch, ConstraintSet.full(2), opt.argopt, 1e-4, adv.with_(seed=_seed(4, i, 3)))
        rho = random_state(2, None, _seed(4, i, 4))
        fx = chi_function(ch, rho, opts.with_(seed=_seed(4, i, 5)))
        c2 = certify_optimal(ch, ConstraintSet.fixed(rho), fx.argopt, 1e-4, adv.with_(seed=_seed(4, i, 6)))
        worst = max(worst, c1.worst_violation, c2.worst_violation)
        if not (c1.passed and c2.passed):
            fails.append(i)
        single = Ensemble(np.ones(1), (opt.argopt.average(),))
        c3 = certify_optimal(ch, ConstraintSet.full(2), single, 1e-4, SolverOptions(restarts=64, seed=_seed(4, i, 7)))
        if not c3.passed and c3.witness is not None:
            sub_caught += 1
    ok = not fails and sub_caught == n
    return CriterionResult(4, "maximal-distance certificate", ok,
                           f"worst violation {worst:.2e}; suboptimal rejected {sub_caught}/{n}; failing {fails}", 0.0)


@_timed
def criterion_5(n: int = 20, d_list=(2, 4, 8, 16), restarts: int = 8) -> CriterionResult:
    bad, worst = [], -np.inf
    for i in range(n):
        rng = _rng(5, i)
        phi = _random_channel(2, 2, _seed(5, i, 1), rng)
        psi = _random_channel(2, 2, _seed(5, i, 2), rng)
        e = random_positive_contraction(2, _seed(5, i, 3))
        q = float(rng.uniform(0.05, 0.95))
        for d in d_list:
            g = prop3_check(phi, psi, e, q, d, None, SolverOptions(restarts=restarts, seed=_seed(5, i, d)))
            worst = max(worst, abs(g.gap) - (g.bound - 2e-3))
            if not g.within_bound:
                bad.append((i, d))
    return CriterionResult(5, "extension capacity bound", not bad,
                           f"max(|gap| - raw bound) = {worst:.2e}; violations {bad}", 0.0)


@_timed
def criterion_6(d_list=None) -> CriterionResult:
    d_list = list(d_list) if d_list is not None else list(range(2, 1025)) + ["2^30"]
    idc = make_channel("identity", dim=2)
    reps = asymp_probe(idc, np.eye(2), 1.0, d_list, None, SolverOptions(restarts=4))
    limit = reps[0].rhs
    bad = [r.provenance["d"] for r in reps if not r.within_bound]
    last = reps[-1]
    ok = not bad and abs(last.gap) < 0.07 and abs(limit - 2.0) <= 1e-6
    return CriterionResult(6, "asymptotic probe", ok,
                           f"limit {limit:.9f}; gap at d={last.provenance['d']}: {last.gap:.4f}; "
                           f"{len(reps)} sizes, out of bound {bad}", 0.0)


@_timed
def criterion_7(n: int = 50, restarts: int = 32) -> CriterionResult:
    worst = np.inf
    for i in range(n):
        rng = _rng(7, i)
        phi = random_cq_channel(2, 2, int(rng.integers(2, 4)), _seed(7, i, 1))
        psi = _random_channel(2, 2, _seed(7, i, 2), rng)
        sigma = random_state(4, None, _seed(7, i, 3))
        rep = inequality_report(phi, psi, sigma, SolverOptions(restarts=restarts, seed=_seed(7, i, 4)),
                                include_product=False)["subadditivity"]
        worst = min(worst, rep.gap)
    return CriterionResult(7, "subadditivity with an entanglement-breaking factor", worst >= -2e-3,
                           f"min gap {worst:.2e} over {n} states", 0.0)


@_timed
def criterion_8(n: int = 10) -> CriterionResult:
    worst = 0.0
    for i in range(n):
        psi = _random_channel(2, 2, _seed(8, i, 1))
        rho = random_state(2, None, _seed(8, i, 2))
        g = s_c_add_check(psi, rho, SolverOptions(restarts=8, seed=_seed(8, i, 3)))
        worst = max(worst, abs(g.gap))
    return CriterionResult(8, "noiseless-factor capacity split", worst <= 2e-3, f"max |gap| {worst:.2e}", 0.0)


@_timed
def criterion_9(n: int = 50, n_cor6: int = 50) -> CriterionResult:
    worst = 0.0
    for i in range(n):
        sigma = random_state(4, 1 + i % 4, _seed(9, i, 1))
        val = eof(sigma, (2, 2), SolverOptions(restarts=8, seed=_seed(9, i, 2))).value
        worst = max(worst, abs(val - wootters_eof(sigma)))
    violations = []
    for i in range(n_cor6):
        sigma = random_state(16, 2 + i % 3, _seed(9, 1000 + i, 1))
        g = cor6_check(sigma, (2, 2, 2, 2), SolverOptions(restarts=2, seed=_seed(9, 1000 + i, 2)), n_members=16)
        if not g.within_bound:
            violations.append(i)
    ok = worst <= 1e-4 and not violations
    return CriterionResult(9, "entanglement of formation", ok,
                           f"max |eof - wootters| {worst:.2e}; certified violations {violations}", 0.0)


@_timed
def criterion_10(n: int = 30) -> CriterionResult:
    fails = []
    for d in (2, 3):
        for i in range(n):
            rep = prop5_suite(random_state(d, None, _seed(10, i, d)), random_state(d, None, _seed(10, i, 10 + d)))
            if not rep.passed:
                fails.append((d, i, [k for k, c in rep.checks.items() if c["passed"] is False]))
    return CriterionResult(10, "relative-entropy curve relations", not fails,
                           f"{2 * n} pairs; failures {fails}", 0.0)


@_timed
def criterion_11(n_pairs: int = 10, n_tilde: int = 100) -> CriterionResult:
    worst_gap = 0.0
    for i in range(n_pairs):
        rng = _rng(11, i)
        psi = _random_channel(2, 2, _seed(11, i, 1), rng)
        a = 2.0 * random_positive_contraction(2, _seed(11, i, 2))
        b = 2.0 * random_positive_contraction(2, _seed(11, i, 3))
        for phi in (make_channel("identity", dim=2), random_cq_channel(2, 2, 2, _seed(11, i, 4))):
            g = theorem3_ii_gap(phi, psi, a, b, SolverOptions(restarts=8, seed=_seed(11, i, 5)))
            worst_gap = max(worst_gap, abs(g.gap))
    worst_tilde = 0.0
    for i in range(n_tilde):
        rng = _rng(11, 100 + i)
        din = int(rng.integers(2, 4))
        phi = _random_channel(din, int(rng.integers(2, 4)), _seed(11, 100 + i, 1), rng)
        a = random_positive_contraction(din, _seed(11, 100 + i, 2))
        d = ["2^20", 2, 5, 64][i % 4]
        dd = 2**20 if d == "2^20" else d
        p = float(rng.uniform(0.0, np.log2(dd)))
        rho = random_state(din, None, _seed(11, 100 + i, 3))
        direct = shor_tilde_dp(phi, a, p, d).apply(rho).entropy()
        worst_tilde = max(worst_tilde, abs(direct - tilde_entropy_closed_form(phi, a, p, d, rho)))
    ok = worst_gap <= 2e-3 and worst_tilde <= 1e-10
    return CriterionResult(11, "modified output purity additivity and tilde entropy", ok,
                           f"max |gap| {worst_gap:.2e}; tilde closed form dev {worst_tilde:.2e}", 0.0)


def _oracle_max(fun, lo, hi) -> float:
    res = minimize_scalar(lambda a: -fun(a), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return max(-res.fun, fun(lo), fun(hi))


@_timed
def criterion_12() -> CriterionResult:
    idc = make_channel("identity", dim=2)
    proj = np.diag([1.0, 0.0])
    c_free = constrained_capacity(idc).value
    c_lin = constrained_capacity(idc, ConstraintSet.linear([proj], [0.25])).value
    c_pen = penalized_capacity(idc, proj, 1.0).value
    want_lin = _oracle_max(h2, 0.0, 0.25)
    want_pen = _oracle_max(lambda a: h2(a) + a, 0.0, 1.0)
    ok = abs(c_free - 1.0) <= 1e-6 and abs(c_lin - want_lin) <= 1e-4 and abs(c_pen - want_pen) <= 1e-4
    return CriterionResult(12, "known exact values", ok,
                           f"C(Id) = {c_free:.7f}; linear {c_lin:.6f} vs {want_lin:.6f}; "
                           f"penalised {c_pen:.6f} vs {want_pen:.6f}", 0.0)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


def run_all(numbers=None, echo=print) -> list:
    results = []
    for k in numbers or sorted(CRITERIA):
        res = CRITERIA[k]()
        if echo:
            echo(res.line())
        results.append(res)
    return results
