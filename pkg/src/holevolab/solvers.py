"""Optimisation problems over ensembles and pure states, and optimality certificates.

Maximisation reports are achieved values (lower bounds); minimisation reports
are achieved values (upper bounds). ``gap_estimate`` is the spread of the top
quartile of restart values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import nnls

from . import _optim
from .channels import FEASIBILITY_TOL, Channel, ConstraintSet, holevo_quantity, make_channel, output_entropy
from .errors import DimensionError, InfeasibleError, InvalidOperatorError, ParameterError, SlaterError
from .spectral import (
    density_matrix,
    entropy,
    h2,
    hermitian,
    in_unit_interval,
    is_positive,
    relative_entropy,
)
from .states import Ensemble

DEFAULT_RESTARTS = 16


@dataclass(frozen=True)
class SolverOptions:
    restarts: int = DEFAULT_RESTARTS
    tol: float = 1e-13
    max_iters: int = 3000
    seed: Any = 0

    @classmethod
    def coerce(cls, opts) -> "SolverOptions":
        if opts is None:
            return cls()
        if isinstance(opts, cls):
            return opts
        return cls(**dict(opts))

    def with_(self, **kw) -> "SolverOptions":
        vals = dict(restarts=self.restarts, tol=self.tol, max_iters=self.max_iters, seed=self.seed)
        vals.update(kw)
        return SolverOptions(**vals)


@dataclass
class SolveReport:
    value: float
    argopt: Any
    restarts_used: int
    converged: bool
    gap_estimate: float
    extra: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


@dataclass
class Certificate:
    kind: str
    passed: bool
    worst_violation: float
    witness: Any
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def ensemble_from_psi(psi, tol: float = 1e-14) -> Ensemble:
    """Normalised pure-state ensemble from unnormalised member vectors."""
    psi = np.asarray(psi)
    probs = np.einsum("ni,ni->n", psi.conj(), psi).real
    keep = probs > tol
    states = tuple(np.outer(v, v.conj()) / p for v, p in zip(psi[keep], probs[keep]))
    probs = probs[keep]
    return Ensemble(probs / probs.sum(), states)


def psi_from_ensemble(ensemble: Ensemble) -> np.ndarray:
    """Unnormalised pure members with the same average (mixed members are split into eigenvectors)."""
    rows = []
    for p, s in ensemble:
        vals, vecs = np.linalg.eigh(s)
        for lam, v in zip(vals, vecs.T):
            if p * lam > 1e-14:
                rows.append(np.sqrt(p * lam) * v)
    return np.array(rows)


def _chi_objective(channel: Channel, linear=None) -> _optim.EnsembleObjective:
    return _optim.EnsembleObjective(channel.dim_in, (channel.kraus,), (channel.kraus,), 1.0, linear)


def _report_from(res: _optim.OptResult, value: float, argopt, **extra) -> SolveReport:
    return SolveReport(float(value), argopt, res.restarts_used, bool(res.converged), res.gap_estimate, dict(extra))


def _log2_psd(op, floor: float = 1e-300) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hermitian(op))
    return (vecs * np.log2(np.maximum(vals, floor))) @ vecs.conj().T


# ---------------------------------------------------------------------------
# chi-function and capacities
# ---------------------------------------------------------------------------


def chi_function(channel: Channel, rho, opts=None, inits=(), n_members: int = None) -> SolveReport:
    """Maximum Holevo quantity over pure decompositions of ``rho``.

    ``extra['convex_closure']`` is ``H(Phi(rho)) - chi``, the convex closure of
    the output entropy at ``rho``.
    """
    opts = SolverOptions.coerce(opts)
    try:
        rho = density_matrix(rho)
    except InvalidOperatorError as exc:
        raise InfeasibleError(f"chi_function needs a state: {exc}") from exc
    if rho.shape[0] != channel.dim_in:
        raise DimensionError("state does not match the channel input")
    d = channel.dim_in
    h_out = output_entropy(channel.apply(rho))
    param = _optim.MarginalParam(rho, (d, 1), 0, n_members or d * d)
    if param.r == 1:
        e = Ensemble(np.ones(1), (rho,))
        return SolveReport(0.0, e, 0, True, 0.0, {"convex_closure": h_out, "output_entropy": h_out})
    res = _optim.maximize(
        # the average is fixed, so its output entropy is a constant and is left out
        _optim.EnsembleObjective(d, (), (channel.kraus,), 1.0), param, opts.restarts, opts.seed, opts.max_iters, opts.tol,
        inits=[np.asarray(i) for i in inits],
    )
    e = ensemble_from_psi(res.psi)
    value = holevo_quantity(channel, e)
    return _report_from(res, value, e, convex_closure=h_out - value, output_entropy=h_out)


def _free_capacity(channel: Channel, linear, opts, inits=(), constraints=None, n_members=None) -> tuple:
    d = channel.dim_in
    param = _optim.FreeParam(n_members or d * d, d)
    res = _optim.maximize(
        _chi_objective(channel, linear), param, opts.restarts, opts.seed, opts.max_iters, opts.tol,
        inits=[np.asarray(i) for i in inits], constraints=constraints,
    )
    e = ensemble_from_psi(res.psi)
    return res, e


def constrained_capacity(channel: Channel, constraint: ConstraintSet = None, opts=None, inits=()) -> SolveReport:
    """``max chi_Phi(rho)`` over average states in the constraint set.

    The average state and its decomposition are optimised jointly.
    """
    opts = SolverOptions.coerce(opts)
    constraint = constraint or ConstraintSet.full(channel.dim_in)
    if constraint.dim != channel.dim_in:
        raise DimensionError("constraint set does not match the channel input")
    if constraint.variant == "fixed":
        return chi_function(channel, constraint.state, opts, inits)
    cons = None
    if constraint.variant == "linear":
        if constraint.slack() > FEASIBILITY_TOL:
            raise InfeasibleError("constraint set is empty")
        cons = list(zip(constraint.ops, constraint.alphas))
    res, e = _free_capacity(channel, None, opts, inits, cons)
    if not np.isfinite(res.value):
        raise InfeasibleError("no feasible ensemble found")
    return _report_from(res, holevo_quantity(channel, e), e, average=e.average())


def penalized_capacity(channel: Channel, a, p: float, opts=None, inits=()) -> SolveReport:
    """``max_rho [chi_Phi(rho) + p Tr A rho]`` for ``0 <= A <= I`` and ``p >= 0``."""
    a = hermitian(a)
    if not in_unit_interval(a):
        raise InvalidOperatorError("A must satisfy 0 <= A <= I")
    if p < 0:
        raise ParameterError("p must be nonnegative")
    return _linear_capacity(channel, p * a, opts, inits)


def _linear_capacity(channel: Channel, x, opts=None, inits=()) -> SolveReport:
    opts = SolverOptions.coerce(opts)
    x = hermitian(x)
    res, e = _free_capacity(channel, x, opts, inits)
    avg = e.average()
    chi = holevo_quantity(channel, e)
    lin = float(np.trace(x @ avg).real)
    return _report_from(res, chi + lin, e, chi=chi, linear=lin, average=avg)


def _pure_search(channel: Channel, x, opts, inits=()) -> tuple:
    """Maximise ``Tr X psi psi^dag - H(Phi(psi psi^dag))`` over unit vectors."""
    opts = SolverOptions.coerce(opts)
    obj = _optim.EnsembleObjective(channel.dim_in, (), (channel.kraus,), 0.0, x)
    res = _optim.maximize(obj, _optim.FreeParam(1, channel.dim_in), opts.restarts, opts.seed, opts.max_iters,
                          opts.tol, inits=[np.asarray(v).reshape(1, -1) for v in inits])
    v = res.psi[0] / np.linalg.norm(res.psi[0])
    return res, np.outer(v, v.conj())


def min_output_entropy(channel: Channel, opts=None, inits=()) -> SolveReport:
    res, state = _pure_search(channel, None, opts, inits)
    return _report_from(res, entropy(channel.apply_matrix(state)), state)


def nu_H(channel: Channel, a, opts=None, inits=()) -> SolveReport:
    """``min_rho [H(Phi(rho)) + Tr A rho]`` over pure states, ``A >= 0``."""
    a = hermitian(a)
    if not is_positive(a):
        raise InvalidOperatorError("A must be positive")
    res, state = _pure_search(channel, -a, opts, inits)
    value = entropy(channel.apply_matrix(state)) + float(np.trace(a @ state).real)
    return _report_from(res, value, state)


def conjugate_H(channel: Channel, x, opts=None, inits=()) -> SolveReport:
    """``max_rho [Tr X rho - H(Phi(rho))]`` over pure states."""
    x = hermitian(x)
    res, state = _pure_search(channel, x, opts, inits)
    value = float(np.trace(x @ state).real) - entropy(channel.apply_matrix(state))
    return _report_from(res, value, state)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def max_distance(channel: Channel, constraint: ConstraintSet, reference, opts=None) -> SolveReport:
    """``sup sum_j mu_j S(Phi(w_j) || Phi(reference))`` over pure ensembles with average in the set."""
    opts = SolverOptions.coerce(opts)
    d = channel.dim_in
    ref_out = channel.apply_matrix(reference)
    x = -channel.adjoint(_log2_psd(ref_out))
    obj = _optim.EnsembleObjective(d, (), (channel.kraus,), 1.0, hermitian(x, tol=1e-6))
    cons = None
    if constraint.variant == "full":
        param = _optim.FreeParam(1, d)
    elif constraint.variant == "fixed":
        param = _optim.MarginalParam(constraint.state, (d, 1), 0, d * d)
    else:
        param = _optim.FreeParam(d * d, d)
        cons = list(zip(constraint.ops, constraint.alphas))
    res = _optim.maximize(obj, param, opts.restarts, opts.seed, opts.max_iters, opts.tol, constraints=cons)
    e = ensemble_from_psi(res.psi)
    value = float(sum(p * relative_entropy(channel.apply_matrix(s), ref_out) for p, s in e))
    return _report_from(res, value, e)


def certify_optimal(channel: Channel, constraint: ConstraintSet, ensemble: Ensemble, tol: float = 1e-4,
                    opts=None) -> Certificate:
    """Maximal-distance test of optimality of ``ensemble`` for the constrained channel.

    Passes when no ensemble with average in the set is found whose mean output
    distance to ``Phi(rho_av)`` exceeds ``chi_Phi(ensemble) + tol``.
    """
    opts = SolverOptions.coerce(opts)
    avg = ensemble.average()
    if not constraint.contains(avg):
        raise InfeasibleError("ensemble average lies outside the constraint set")
    chi = holevo_quantity(channel, ensemble)
    adv = max_distance(channel, constraint, avg, opts)
    violation = adv.value - chi
    return Certificate(
        "max_distance", bool(violation <= tol), float(violation), adv.argopt,
        {"chi": chi, "adversary": adv.value, "restarts": adv.restarts_used, "tol": tol},
    )


def kkt_certificate(channel: Channel, constraint: ConstraintSet, rho_av, tol: float = 1e-4, opts=None,
                    ensemble: Ensemble = None) -> Certificate:
    """Multipliers ``p_k`` for a linear constraint set and the Lagrangian global check.

    ``p_k`` are fitted from stationarity on the members of an optimal ensemble for
    ``rho_av``; the certificate passes when complementary slackness holds and no
    state beats ``rho_av`` on ``chi_Phi(rho) - sum_k p_k Tr A_k rho`` by more than ``tol``.
    """
    opts = SolverOptions.coerce(opts)
    if constraint.variant != "linear":
        raise ParameterError("KKT certificate needs a linear constraint set")
    rho_av = density_matrix(rho_av)
    if not constraint.contains(rho_av, tol=1e-9):
        raise InfeasibleError("rho_av violates the constraints")
    if not constraint.has_interior():
        raise SlaterError("constraint set has empty interior; use relaxation_sequence")
    if ensemble is None:
        ensemble = chi_function(channel, rho_av, opts).argopt
    chi = holevo_quantity(channel, ensemble)
    ref = channel.apply_matrix(rho_av)
    loads = np.array([np.trace(a @ rho_av).real for a in constraint.ops])
    active = np.where(loads >= np.array(constraint.alphas) - 1e-7)[0]
    mults = np.zeros(len(constraint.ops))
    if active.size:
        rows, rhs = [], []
        for p, s in ensemble:
            rows.append([np.trace(constraint.ops[k] @ s).real - loads[k] for k in active])
            rhs.append(relative_entropy(channel.apply_matrix(s), ref) - chi)
        w = np.sqrt(ensemble.probs)
        sol, _ = nnls(np.array(rows) * w[:, None], np.array(rhs) * w)
        mults[active] = sol
    slackness = float(max(abs(m * (l - a)) for m, l, a in zip(mults, loads, constraint.alphas)))
    x = -sum(m * a for m, a in zip(mults, constraint.ops))
    probe = _linear_capacity(channel, x, opts)
    own = chi + float(np.trace(x @ rho_av).real)
    violation = max(probe.value - own, slackness)
    return Certificate(
        "kkt", bool(violation <= tol), float(violation), mults,
        {"chi": chi, "lagrangian_at_rho": own, "lagrangian_probe": probe.value, "slackness": slackness},
    )


def capacity_estimate(channel: Channel, rho_av, rho, opts=None) -> float:
    """Lower estimate ``chi_Phi(rho) + S(Phi(rho) || Phi(rho_av))`` used against an optimal ``rho_av``."""
    chi = chi_function(channel, rho, opts).value
    return chi + relative_entropy(channel.apply_matrix(rho), channel.apply_matrix(rho_av))


# ---------------------------------------------------------------------------
# entanglement of formation
# ---------------------------------------------------------------------------


def eof(sigma, dims, opts=None, n_members: int = None, inits=()) -> SolveReport:
    """Entanglement of formation ``H(Tr_K sigma) - chi`` of the partial-trace channel.

    The value is an achieved decomposition, i.e. an upper bound.
    """
    dims = tuple(int(x) for x in dims)
    sigma = density_matrix(sigma)
    if len(dims) != 2 or dims[0] * dims[1] != sigma.shape[0]:
        raise DimensionError(f"dims {dims} do not factor dimension {sigma.shape[0]}")
    channel = make_channel("partial_trace_channel", dims=dims, traced=1)
    rep = chi_function(channel, sigma, opts, inits, n_members)
    value = max(rep.extra["output_entropy"] - rep.value, 0.0)
    return SolveReport(value, rep.argopt, rep.restarts_used, rep.converged, rep.gap_estimate, {"chi": rep.value})


def top_eigvec(state) -> np.ndarray:
    vals, vecs = np.linalg.eigh(state)
    return vecs[:, -1]


def concurrence(sigma) -> float:
    """Two-qubit concurrence from the spin-flipped state."""
    sigma = density_matrix(sigma)
    if sigma.shape != (4, 4):
        raise DimensionError("concurrence needs a two-qubit state")
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    flipped = yy @ sigma.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(sigma @ flipped).real)[::-1], 0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def wootters_eof(sigma) -> float:
    """Closed-form two-qubit entanglement of formation."""
    c = concurrence(sigma)
    return h2((1 + np.sqrt(max(1 - c * c, 0.0))) / 2)
