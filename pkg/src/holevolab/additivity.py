"""Both sides of additivity and subadditivity statements, with explicit error bounds.

Equalities are checked as two one-sided solver values plus a combined slack
(``SLACK``, 2e-3 bits by default). A ``GapReport`` records the two sides, their
difference, the bound it is compared with and how.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _optim
from .channels import (
    Channel,
    ConstraintSet,
    Measurement,
    holevo_quantity,
    make_channel,
    psi_sub_A,
    tensor_channels,
)
from .errors import DimensionError, ParameterError
from .shor import LiftedEnsemble, ShorHatChannel, lifted_holevo, parse_d
from .solvers import (
    SolverOptions,
    capacity_estimate,
    chi_function,
    constrained_capacity,
    ensemble_from_psi,
    eof,
    nu_H,
    penalized_capacity,
    psi_from_ensemble,
    top_eigvec,
    wootters_eof,
)
from .spectral import (
    density_matrix,
    entropy,
    h2,
    hermitian,
    in_unit_interval,
    is_positive,
    partial_trace,
    permute_factors,
    psd_sqrt,
    relative_entropy,
)
from .states import Ensemble

SLACK = 2e-3


@dataclass
class GapReport:
    """``sense`` is ``"abs"`` (``|gap| <= bound``), ``"ge"`` (``gap >= bound``) or ``"le"`` (``gap <= bound``)."""

    name: str
    lhs: float
    rhs: float
    gap: float
    bound: float = None
    sense: str = "abs"
    provenance: dict = field(default_factory=dict)

    @property
    def within_bound(self) -> bool:
        if self.bound is None:
            return True
        if not np.isfinite(self.gap):
            return False
        if self.sense == "abs":
            return bool(abs(self.gap) <= self.bound)
        if self.sense == "ge":
            return bool(self.gap >= self.bound)
        return bool(self.gap <= self.bound)

    def row(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "gap": self.gap, "bound": self.bound,
                "within_bound": self.within_bound}


def _dims(phi: Channel, psi: Channel) -> tuple:
    return phi.dim_in, psi.dim_in


def _marginals(sigma, dims):
    return partial_trace(sigma, dims, 0), partial_trace(sigma, dims, 1)


def _product_psi(e1: Ensemble, e2: Ensemble) -> np.ndarray:
    a, b = psi_from_ensemble(e1), psi_from_ensemble(e2)
    return np.array([np.kron(x, y) for x in a for y in b])


# ---------------------------------------------------------------------------
# subadditivity of the chi-function
# ---------------------------------------------------------------------------


def inequality_report(phi: Channel, psi: Channel, sigma, opts=None, slack: float = SLACK,
                      include_product: bool = True) -> dict:
    """Subadditivity gap, the entropy-gap comparison and the product-state residual for ``sigma``."""
    opts = SolverOptions.coerce(opts)
    dims = _dims(phi, psi)
    sigma = density_matrix(sigma)
    if sigma.shape[0] != dims[0] * dims[1]:
        raise DimensionError("joint state does not match the channels")
    joint = tensor_channels(phi, psi)
    s_phi, s_psi = _marginals(sigma, dims)
    r_phi = chi_function(phi, s_phi, opts)
    r_psi = chi_function(psi, s_psi, opts)
    inits = []
    if np.abs(sigma - np.kron(s_phi, s_psi)).max() < 1e-10:
        inits = [_product_psi(r_phi.argopt, r_psi.argopt)]
    r_joint = chi_function(joint, sigma, opts, inits)
    rhs = r_phi.value + r_psi.value
    chi_gap = rhs - r_joint.value
    prov = {"phi": r_phi, "psi": r_psi, "joint": r_joint}
    out = {"subadditivity": GapReport("subadditivity", r_joint.value, rhs, chi_gap, -slack, "ge", prov)}
    ent_gap = (r_phi.extra["output_entropy"] + r_psi.extra["output_entropy"]
               - entropy(joint.apply_matrix(sigma)))
    out["entropy_gap"] = GapReport("entropy_gap", ent_gap, chi_gap, chi_gap - ent_gap, -slack, "ge", prov)
    if include_product:
        prod = np.kron(s_phi, s_psi)
        r_prod = chi_function(joint, prod, opts, [_product_psi(r_phi.argopt, r_psi.argopt)])
        out["product"] = GapReport("product_additivity", r_prod.value, rhs, r_prod.value - rhs, slack, "abs",
                                   {"joint": r_prod})
    return out


def glo_gap(sigma, measurement: Measurement) -> float:
    """``H(sigma) - sum_j p_j H(sigma_j)`` for the post-measurement ensemble.

    Nonnegative: a measurement with one Kraus operator per outcome does not
    raise the average entropy. The reverse inequality fails already for
    ``sigma = I/4`` measured on one qubit (2 against 1).
    """
    post = measurement.apply(sigma)
    return float(entropy(sigma) - sum(p * entropy(s) for p, s in post))


# ---------------------------------------------------------------------------
# both marginals fixed
# ---------------------------------------------------------------------------


def _two_marginal_solve(joint: Channel, rho, varrho, dims, opts, inits, chi: bool):
    """Optimise over ensembles whose average has marginals ``rho`` and ``varrho``.

    ``chi=True`` maximises the Holevo quantity; otherwise it minimises the mean
    output entropy of the members.
    """
    d = dims[0] * dims[1]
    param = _optim.MarginalParam(rho, dims, 0, d * d)
    obj = _optim.EnsembleObjective(d, (joint.kraus,) if chi else (), (joint.kraus,), 1.0)
    obj.penalty = _optim.Penalty(dims, 1, hermitian(varrho))
    res = _optim.maximize(obj, param, opts.restarts, opts.seed, opts.max_iters, opts.tol, inits=inits)
    e = ensemble_from_psi(res.psi)
    return res, e


def theorem2_gap(phi: Channel, psi: Channel, rho, varrho, opts=None, slack: float = SLACK) -> GapReport:
    """Minimal mean output entropy with both marginals fixed versus the sum of convex closures.

    ``gap = rhs - lhs`` is zero exactly when capacity is additive for the two
    fixed-state constraints; the capacity residual is reported alongside.
    """
    opts = SolverOptions.coerce(opts)
    dims = _dims(phi, psi)
    rho, varrho = density_matrix(rho), density_matrix(varrho)
    joint = tensor_channels(phi, psi)
    r_phi = chi_function(phi, rho, opts)
    r_psi = chi_function(psi, varrho, opts)
    warm = [_product_psi(r_phi.argopt, r_psi.argopt)]
    res, e = _two_marginal_solve(joint, rho, varrho, dims, opts, warm, chi=False)
    lhs = float(sum(p * entropy(joint.apply_matrix(s)) for p, s in e))
    rhs = r_phi.extra["convex_closure"] + r_psi.extra["convex_closure"]
    cres, ce = _two_marginal_solve(joint, rho, varrho, dims, opts, warm, chi=True)
    cap = holevo_quantity(joint, ce)
    prov = {"phi": r_phi, "psi": r_psi, "mismatch": res.mismatch, "ensemble": e,
            "capacity": cap, "capacity_residual": cap - r_phi.value - r_psi.value}
    return GapReport("theorem2", lhs, rhs, rhs - lhs, slack, "abs", prov)


def fixed_marginals_capacity(phi: Channel, psi: Channel, rho, varrho, opts=None):
    """Capacity of ``phi (x) psi`` over averages with marginals ``rho`` and ``varrho``: (value, ensemble, mismatch)."""
    opts = SolverOptions.coerce(opts)
    dims = _dims(phi, psi)
    joint = tensor_channels(phi, psi)
    r_phi = chi_function(phi, rho, opts)
    r_psi = chi_function(psi, varrho, opts)
    res, e = _two_marginal_solve(joint, density_matrix(rho), density_matrix(varrho), dims, opts,
                                 [_product_psi(r_phi.argopt, r_psi.argopt)], chi=True)
    return holevo_quantity(joint, e), e, res.mismatch, r_phi, r_psi


def corollary7_bound(phi: Channel, psi: Channel, rho, varrho, opts=None, slack: float = SLACK) -> GapReport:
    """``C(phi x psi; {rho},{varrho}) >= chi_phi(rho) + chi_psi(varrho) + S(phi(rho) x psi(varrho) || out(sigma_av))``."""
    cap, e, mismatch, r_phi, r_psi = fixed_marginals_capacity(phi, psi, rho, varrho, opts)
    joint = tensor_channels(phi, psi)
    prod_out = np.kron(phi.apply_matrix(rho), psi.apply_matrix(varrho))
    rel = relative_entropy(prod_out, joint.apply_matrix(e.average()))
    rhs = r_phi.value + r_psi.value + rel
    prov = {"relative_entropy": rel, "support_failure": not np.isfinite(rel), "mismatch": mismatch, "ensemble": e}
    return GapReport("corollary7", cap, rhs, cap - rhs, -slack, "ge", prov)


# ---------------------------------------------------------------------------
# noiseless partner, entanglement of formation
# ---------------------------------------------------------------------------


def s_c_add_check(psi: Channel, rho, opts=None, slack: float = SLACK) -> GapReport:
    """``C(Id x Psi, {rho} x S(K)) = H(rho) + C(Psi)`` for the noiseless channel on the first factor."""
    opts = SolverOptions.coerce(opts)
    rho = density_matrix(rho)
    dh, dk = rho.shape[0], psi.dim_in
    joint = tensor_channels(make_channel("identity", dim=dh), psi)
    cap_psi = constrained_capacity(psi, None, opts)
    vals, vecs = np.linalg.eigh(rho)
    keep = vals > 1e-14
    eig = Ensemble(vals[keep] / vals[keep].sum(), tuple(np.outer(v, v.conj()) for v in vecs[:, keep].T))
    d = dh * dk
    param = _optim.MarginalParam(rho, (dh, dk), 0, d * d)
    obj = _optim.EnsembleObjective(d, (joint.kraus,), (joint.kraus,), 1.0)
    res = _optim.maximize(obj, param, opts.restarts, opts.seed, opts.max_iters, opts.tol,
                          inits=[_product_psi(eig, cap_psi.argopt)])
    e = ensemble_from_psi(res.psi)
    lhs = holevo_quantity(joint, e)
    rhs = entropy(rho) + cap_psi.value
    return GapReport("s_c_add", lhs, rhs, lhs - rhs, slack, "abs", {"psi_capacity": cap_psi, "ensemble": e})


def cor6_check(sigma, dims=(2, 2, 2, 2), opts=None, n_members: int = None, tol: float = 1e-4) -> GapReport:
    """Strong superadditivity probe for the entanglement of formation.

    ``sigma`` lives on ``(H1 (x) K1) (x) (H2 (x) K2)`` with ``dims = (h1, k1, h2, k2)``.
    A violation is certified only when an achieved decomposition of ``sigma``
    (an upper bound) lies more than ``tol`` below the sum of the parts.
    """
    opts = SolverOptions.coerce(opts)
    h1, k1, h2, k2 = (int(x) for x in dims)
    sigma = density_matrix(sigma)
    if sigma.shape[0] != h1 * k1 * h2 * k2:
        raise DimensionError("dims do not factor the state")
    parts = []
    for keep in ((0, 1), (2, 3)):
        s = partial_trace(sigma, (h1, k1, h2, k2), keep)
        hk = (h1, k1) if keep == (0, 1) else (h2, k2)
        parts.append(wootters_eof(s) if hk == (2, 2) else eof(s, hk, opts).value)
    reordered = permute_factors(sigma, (h1, k1, h2, k2), (0, 2, 1, 3))
    rep = eof(reordered, (h1 * h2, k1 * k2), opts, n_members or 2 * sigma.shape[0])
    rhs = float(sum(parts))
    return GapReport("cor6", rep.value, rhs, rep.value - rhs, -tol, "ge", {"parts": parts, "eof": rep})


# ---------------------------------------------------------------------------
# Shor extensions
# ---------------------------------------------------------------------------


def _lifted_solve(ext: ShorHatChannel, constraint, opts, inits=()):
    """Maximise the Holevo quantity of ``ext`` over lifted symmetric ensembles."""
    d = ext.joint_dim
    blocks = ext.reduced_blocks()
    x = ext.classical_rate() * np.kron(ext.e, np.eye(ext.dim_k))
    obj = _optim.EnsembleObjective(d, blocks, blocks, 1.0, x)
    return _joint_solve(obj, ext, constraint, opts, inits)


def _joint_solve(obj, ext, constraint, opts, inits):
    d = ext.joint_dim
    cons = None
    if constraint is None or constraint.variant == "full":
        param = _optim.FreeParam(d * d, d)
    elif constraint.variant == "fixed":
        param = _optim.MarginalParam(constraint.state, (ext.dim_h, ext.dim_k), 1, d * d)
    else:
        param = _optim.FreeParam(d * d, d)
        cons = [(np.kron(np.eye(ext.dim_h), a), alpha) for a, alpha in zip(constraint.ops, constraint.alphas)]
    res = _optim.maximize(obj, param, opts.restarts, opts.seed, opts.max_iters, opts.tol, inits=inits,
                          constraints=cons)
    return res, ensemble_from_psi(res.psi)


def _reference_solve(ext: ShorHatChannel, constraint, opts, inits=(), full_weight: bool = False):
    """``max [(1-q) chi_{Phi x Psi}(sigma) + q log2 d Tr (E x I) sigma]`` (or with weight 1 on chi)."""
    d = ext.joint_dim
    w = 1.0 if full_weight else 1.0 - ext.q
    k = np.sqrt(w) * ext.quantum_map().kraus
    x = ext.classical_rate() * np.kron(ext.e, np.eye(ext.dim_k))
    obj = _optim.EnsembleObjective(d, (k,), (k,), w, x)
    res, e = _joint_solve(obj, ext, constraint, opts, inits)
    avg = e.average()
    value = w * holevo_quantity(ext.quantum_map(), e) + float(np.trace(x @ avg).real)
    return value, e


def prop3_check(phi: Channel, psi: Channel, e_op, q: float, d, constraint: ConstraintSet = None, opts=None,
                slack: float = SLACK) -> GapReport:
    """Capacity of the extension tensored with ``psi`` versus the reference maximum.

    ``lhs`` is evaluated on the achieved lifted ensemble with block arithmetic, so
    symbolic ``d`` never materialises. ``bound = q (log2 dim K' + 1)``.
    """
    opts = SolverOptions.coerce(opts)
    psi = psi if psi is not None else make_channel("identity", dim=1)
    ext = ShorHatChannel(phi, e_op, float(q), parse_d(d)).tensor(psi) if psi.dim_in > 1 or psi.dim_out > 1 \
        else ShorHatChannel(phi, e_op, float(q), parse_d(d))
    rhs, e_ref = _reference_solve(ext, constraint, opts)
    warm = [psi_from_ensemble(e_ref)]
    res, e_lhs = _lifted_solve(ext, constraint, opts, warm)
    lhs = lifted_holevo(ext, LiftedEnsemble(e_lhs, ext.d))
    bound = ext.q * (np.log2(psi.dim_out) + 1)
    prov = {"solver_value": res.value, "ensemble": e_lhs, "reference_ensemble": e_ref, "q": ext.q, "d": ext.d}
    return GapReport("prop3", lhs, rhs, lhs - rhs, bound + slack, "abs", prov)


def asymp_probe(phi: Channel, a, p: float, d_list, psi: Channel = None, opts=None,
                slack: float = SLACK) -> list:
    """Capacities of ``Phi_d(A, p)`` (tensored with ``psi`` if given) against the penalised limit.

    The per-d bound is ``q max(log2 dim K' + 1, log2 dim(H' K'))`` with ``q = p / log2 d``:
    the extension can exceed the reference maximum by at most the first term and
    fall below the limit by at most ``q`` times the largest possible chi.
    """
    opts = SolverOptions.coerce(opts)
    a = hermitian(a)
    if not in_unit_interval(a):
        raise ParameterError("A must satisfy 0 <= A <= I")
    ds = [parse_d(d) for d in d_list]
    if p > 0 and (min(ds) < 2 or p > np.log2(min(ds)) + 1e-12):
        raise ParameterError("p exceeds log2 d for some d in the list")
    partner = psi if psi is not None else make_channel("identity", dim=1)
    base = ShorHatChannel(phi, a, 0.0, 2, partner if partner.dim_in > 1 or partner.dim_out > 1 else None)
    limit, e_lim = _reference_solve(base, None, opts, full_weight=True) if psi is not None else (None, None)
    if psi is None:
        rep = penalized_capacity(phi, a, p, opts)
        limit, e_lim = rep.value, rep.argopt
    out_dim = phi.dim_out * partner.dim_out
    reports = []
    for d in ds:
        q = 0.0 if p == 0 else min(p / np.log2(d), 1.0)
        ext = ShorHatChannel(phi, a, q, d, base.partner)
        res, e = _lifted_solve(ext, None, opts, [psi_from_ensemble(e_lim)])
        lhs = lifted_holevo(ext, LiftedEnsemble(e, d))
        bound = q * max(np.log2(partner.dim_out) + 1, np.log2(out_dim))
        reports.append(GapReport(f"asymp_d={d}", lhs, limit, limit - lhs, bound + slack, "abs",
                                 {"d": d, "q": q, "solver_value": res.value, "raw_bound": bound}))
    return reports


# ---------------------------------------------------------------------------
# modified output purity and its asymptotic form
# ---------------------------------------------------------------------------


def theorem3_ii_gap(phi: Channel, psi: Channel, a, b, opts=None, slack: float = SLACK) -> GapReport:
    """``nu_H(phi x psi, A x I + I x B) - nu_H(phi, A) - nu_H(psi, B)`` (never positive beyond solver error)."""
    opts = SolverOptions.coerce(opts)
    a, b = hermitian(a), hermitian(b)
    if not (is_positive(a) and is_positive(b)):
        raise ParameterError("A and B must be positive")
    r_a = nu_H(phi, a, opts)
    r_b = nu_H(psi, b, opts)
    x = np.kron(a, np.eye(psi.dim_in)) + np.kron(np.eye(phi.dim_in), b)
    warm = [np.kron(top_eigvec(r_a.argopt), top_eigvec(r_b.argopt))]
    r_j = nu_H(tensor_channels(phi, psi), x, opts, warm)
    rhs = r_a.value + r_b.value
    return GapReport("theorem3_ii", r_j.value, rhs, r_j.value - rhs, slack, "abs",
                     {"phi": r_a, "psi": r_b, "joint": r_j})


def _rows(op) -> np.ndarray:
    """Kraus stack of the functional ``rho -> Tr op rho`` (rows of ``sqrt(op)``)."""
    root = psd_sqrt(op)
    return root[:, None, :]


def _phi_sub_b(phi: Channel, b) -> np.ndarray:
    """Kraus stack of ``sigma -> Tr_K((I x B)(phi x Id)(sigma))``."""
    root = psd_sqrt(b)
    return np.array([np.kron(k, root[l][None, :]) for k in phi.kraus for l in range(root.shape[0])])


def tilde_output_blocks(phi: Channel, a, q: float, d: int):
    """Blocks and linear term with ``H(tilde channel(psi)) = sum_b H(block_b(psi)) + Tr X psi psi^dag``."""
    dim = phi.dim_in
    abar = np.eye(dim) - a
    blocks = (np.sqrt(1 - q) * phi.kraus, np.sqrt(q) * _rows(abar), np.sqrt(q) * _rows(a))
    return blocks, q * np.log2(d) * a


def tilde_pair_blocks(phi: Channel, a, q1: float, d: int, psi: Channel, b, q2: float, e: int):
    """Same decomposition for the tensor product of two tilde channels."""
    dh, dk = phi.dim_in, psi.dim_in
    abar, bbar = np.eye(dh) - a, np.eye(dk) - b
    ld, le = np.log2(d), np.log2(e)
    w1, w2, w3, w4 = (1 - q1) * (1 - q2), q1 * (1 - q2), (1 - q1) * q2, q1 * q2
    blocks = [np.sqrt(w1) * tensor_channels(phi, psi).kraus,
              np.sqrt(w2) * psi_sub_A(psi, abar, dh).kraus,
              np.sqrt(w2) * psi_sub_A(psi, a, dh).kraus,
              np.sqrt(w3) * _phi_sub_b(phi, bbar),
              np.sqrt(w3) * _phi_sub_b(phi, b)]
    for x, y in itertools.product((abar, a), (bbar, b)):
        blocks.append(np.sqrt(w4) * _rows(np.kron(x, y)))
    lin = (w2 * ld * np.kron(a, np.eye(dk)) + w3 * le * np.kron(np.eye(dh), b)
           + w4 * (le * np.kron(abar, b) + ld * np.kron(a, bbar) + (ld + le) * np.kron(a, b)))
    return tuple(blocks), lin


def _min_blocks(blocks, lin, dim, opts, inits=()):
    obj = _optim.EnsembleObjective(dim, (), blocks, 0.0, -lin)
    res = _optim.maximize(obj, _optim.FreeParam(1, dim), opts.restarts, opts.seed, opts.max_iters, opts.tol,
                          inits=[np.asarray(v).reshape(1, -1) for v in inits])
    v = res.psi[0] / np.linalg.norm(res.psi[0])
    return -res.value, v


def tilde_moe_probe(phi: Channel, psi: Channel, a, p: float, b, r: float, d_list, e_list, opts=None,
                    slack: float = SLACK) -> list:
    """Finite-size minimum output entropies of the tilde channels against their limits.

    For every pair ``(d, e)`` the joint minimum is compared with
    ``min [H(phi x psi(sigma)) + p Tr A sigma_1 + r Tr B sigma_2]``; the bound is the
    uniform remainder of the block expansion. Single-channel minima and the
    finite-size additivity gap are kept in the provenance.
    """
    opts = SolverOptions.coerce(opts)
    a, b = hermitian(a), hermitian(b)
    dh, dk = phi.dim_in, psi.dim_in
    lim_phi = nu_H(phi, p * a, opts)
    lim_psi = nu_H(psi, r * b, opts)
    xj = p * np.kron(a, np.eye(dk)) + r * np.kron(np.eye(dh), b)
    warm = np.kron(top_eigvec(lim_phi.argopt), top_eigvec(lim_psi.argopt))
    lim_joint = nu_H(tensor_channels(phi, psi), xj, opts, [warm])
    reports = []
    for d, e in itertools.product([parse_d(x) for x in d_list], [parse_d(x) for x in e_list]):
        for size, rate in ((d, p), (e, r)):
            if rate > 0 and (size < 2 or rate > np.log2(size) + 1e-12):
                raise ParameterError("rate exceeds log2 of the register size")
        q1 = 0.0 if p == 0 else p / np.log2(d)
        q2 = 0.0 if r == 0 else r / np.log2(e)
        m_phi, v_phi = _min_blocks(*tilde_output_blocks(phi, a, q1, d), dh, opts, [top_eigvec(lim_phi.argopt)])
        m_psi, v_psi = _min_blocks(*tilde_output_blocks(psi, b, q2, e), dk, opts, [top_eigvec(lim_psi.argopt)])
        blocks, lin = tilde_pair_blocks(phi, a, q1, d, psi, b, q2, e)
        m_joint, _ = _min_blocks(blocks, lin, dh * dk, opts, [np.kron(v_phi, v_psi), warm])
        h4 = h2(q1) + h2(q2)
        cross = 0.0
        if p and r:
            cross = p * r * (np.log2(d + 1) + np.log2(e + 1)) / (np.log2(d) * np.log2(e))
        bound = (h4 + (q1 + q2) * np.log2(phi.dim_out * psi.dim_out) + q2 * p + q1 * r
                 + q1 * (np.log2(psi.dim_out) + 1) + q2 * (np.log2(phi.dim_out) + 1) + cross)
        prov = {"d": d, "e": e, "min_phi": m_phi, "min_psi": m_psi, "limit_phi": lim_phi.value,
                "limit_psi": lim_psi.value, "finite_additivity_gap": m_joint - m_phi - m_psi,
                "raw_bound": bound}
        reports.append(GapReport(f"tilde_moe_d={d}_e={e}", m_joint, lim_joint.value, m_joint - lim_joint.value,
                                 bound + slack, "abs", prov))
    return reports


# ---------------------------------------------------------------------------
# constrained-capacity helpers
# ---------------------------------------------------------------------------


def relaxation_sequence(phi: Channel, constraint: ConstraintSet, m_list, opts=None) -> dict:
    """Capacities under the relaxed constraints ``Tr A_k rho <= alpha_k + 1/m`` and the limit set itself."""
    opts = SolverOptions.coerce(opts)
    out = {m: constrained_capacity(phi, constraint.relaxed(1.0 / m), opts) for m in m_list}
    out["limit"] = constrained_capacity(phi, constraint, opts)
    return out


def prop2_check(phi: Channel, constraint: ConstraintSet, probes, opts=None, slack: float = SLACK) -> list:
    """``C(Phi; A) >= chi_Phi(rho) + S(Phi(rho) || Phi(rho_av))`` for probe states in the set."""
    opts = SolverOptions.coerce(opts)
    cap = constrained_capacity(phi, constraint, opts)
    rho_av = cap.argopt.average()
    reports = []
    for i, rho in enumerate(probes):
        if not constraint.contains(rho):
            raise ParameterError(f"probe {i} lies outside the constraint set")
        est = capacity_estimate(phi, rho_av, rho, opts)
        reports.append(GapReport(f"prop2_{i}", cap.value, est, cap.value - est, -slack, "ge"))
    return reports
