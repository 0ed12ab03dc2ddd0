"""Channels in Kraus form, their constructors and combinators, constraint sets,
and the Holevo quantity."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ChannelError, DimensionError, InfeasibleError, InvalidOperatorError, ParameterError
from .spectral import (
    density_matrix,
    entropy,
    hermitian,
    in_unit_interval,
    psd_sqrt,
    relative_entropy,
)
from .states import BlockOperator, Ensemble, HybridState, QuantumBlock, random_isometry, random_state, rng_from

KRAUS_TOL = 1e-10
FEASIBILITY_TOL = 1e-7
INTERIOR_TOL = 1e-6
N_PROBES = 8


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive map given by a stack of Kraus operators.

    ``kraus`` has shape ``(k, dim_out, dim_in)``. Trace preservation is checked
    at construction unless ``trace_preserving=False`` (used for the
    sub-normalised maps of Shor's construction). Channels built by
    :func:`direct_sum_mixture` keep their components so that :meth:`apply`
    can return a :class:`BlockOperator`.
    """

    kraus: np.ndarray
    name: str = "kraus"
    trace_preserving: bool = True
    components: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise ChannelError("Kraus operators must form a (k, dout, din) stack")
        object.__setattr__(self, "kraus", k)
        gram = np.einsum("kai,kaj->ij", k.conj(), k)
        eye = np.eye(k.shape[2])
        if self.trace_preserving:
            err = np.abs(gram - eye).max()
            if err > KRAUS_TOL:
                raise ChannelError(f"{self.name}: Kraus set is not complete (deviation {err:.2e})")
            self._probe_trace()
        elif np.linalg.eigvalsh(eye - gram).min() < -KRAUS_TOL:
            raise ChannelError(f"{self.name}: map is trace increasing")

    def _probe_trace(self):
        rng = np.random.default_rng(0)
        for _ in range(N_PROBES):
            rho = random_state(self.dim_in, seed=rng)
            tr = np.trace(self.apply_matrix(rho)).real
            if abs(tr - 1.0) > KRAUS_TOL:
                raise ChannelError(f"{self.name}: trace not preserved on probe ({tr!r})")

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def is_direct_sum(self) -> bool:
        return bool(self.components)

    def apply_matrix(self, rho) -> np.ndarray:
        """Output as a dense matrix (block-diagonal for direct sums)."""
        rho = np.asarray(rho)
        if isinstance(rho, HybridState) or rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(f"{self.name}: input must be {self.dim_in}x{self.dim_in}, got {rho.shape}")
        return np.einsum("kai,ij,kbj->ab", self.kraus, rho, self.kraus.conj())

    def apply(self, rho):
        if isinstance(rho, HybridState):
            raise DimensionError(f"{self.name}: hybrid input requires a Shor extension")
        if self.is_direct_sum:
            return BlockOperator(
                tuple(QuantumBlock(ch.apply_matrix(rho)) for _, ch in self.components),
                tuple(q for q, _ in self.components),
            )
        return self.apply_matrix(rho)

    __call__ = apply

    def adjoint(self, y) -> np.ndarray:
        """Heisenberg-picture map ``Y -> sum_k K_k^dag Y K_k``."""
        return np.einsum("kai,ab,kbj->ij", self.kraus.conj(), np.asarray(y), self.kraus)

    def choi(self) -> np.ndarray:
        d = self.dim_in
        omega = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d))
                e[i, j] = 1.0
                omega += np.kron(e, self.apply_matrix(e))
        return omega


def output_entropy(out) -> float:
    """Entropy of a channel output, dense or block-structured."""
    if isinstance(out, BlockOperator):
        return out.entropy()
    return entropy(out)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def _weyl_operators(d: int) -> list:
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a in range(d) for b in range(d)]


def _measure_prepare_kraus(povm, states) -> np.ndarray:
    ops = []
    for m, s in zip(povm, states):
        mv, mu = np.linalg.eigh(hermitian(m))
        sv, su = np.linalg.eigh(density_matrix(s))
        for a in range(mv.size):
            if mv[a] <= 1e-15:
                continue
            for b in range(sv.size):
                if sv[b] <= 1e-15:
                    continue
                ops.append(np.sqrt(sv[b] * mv[a]) * np.outer(su[:, b], mu[:, a].conj()))
    return np.array(ops)


def make_channel(kind: str, **params) -> Channel:
    """Build a channel by name.

    Kinds: ``identity(dim)``, ``depolarizing(p, dim=2)``, ``dephasing(p, dim=2)``,
    ``amplitude_damping(gamma)``, ``cq_measure_prepare(povm, states)``,
    ``partial_trace_channel(dims, traced=1)``, ``kraus(kraus)``,
    ``unitary(u)`` and ``random(dim_in, dim_out, n_kraus, seed)``.
    """
    kind = kind.lower()
    if kind == "identity":
        d = int(params.get("dim", 2))
        return Channel(np.eye(d)[None], name=f"identity({d})", params={"dim": d})
    if kind == "depolarizing":
        p, d = float(params["p"]), int(params.get("dim", 2))
        if not 0.0 <= p <= 1.0 + 1.0 / (d * d - 1):
            raise ParameterError(f"depolarizing parameter {p} out of range")
        weyl = _weyl_operators(d)
        coefs = [np.sqrt(1 - p + p / d**2)] + [np.sqrt(p) / d] * (d * d - 1)
        return Channel(np.array([c * w for c, w in zip(coefs, weyl)]), name=f"depolarizing({p})", params={"p": p, "dim": d})
    if kind == "dephasing":
        p, d = float(params["p"]), int(params.get("dim", 2))
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"dephasing parameter {p} out of range")
        ops = [np.sqrt(1 - p) * np.eye(d)] + [np.sqrt(p) * np.diag(np.eye(d)[k]) for k in range(d)]
        return Channel(np.array(ops), name=f"dephasing({p})", params={"p": p, "dim": d})
    if kind == "amplitude_damping":
        g = float(params["gamma"])
        if not 0.0 <= g <= 1.0:
            raise ParameterError(f"damping rate {g} out of range")
        k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
        k1 = np.array([[0, np.sqrt(g)], [0, 0]])
        return Channel(np.array([k0, k1]), name=f"amplitude_damping({g})", params={"gamma": g})
    if kind == "cq_measure_prepare":
        povm = [np.asarray(m, dtype=complex) for m in params["povm"]]
        states = [np.asarray(s, dtype=complex) for s in params["states"]]
        if len(povm) != len(states):
            raise ChannelError("one output state per POVM element required")
        for m in povm:
            if np.linalg.eigvalsh(hermitian(m)).min() < -1e-12:
                raise ChannelError("POVM element is not positive")
        if np.abs(sum(povm) - np.eye(povm[0].shape[0])).max() > KRAUS_TOL:
            raise ChannelError("POVM elements do not sum to the identity")
        return Channel(_measure_prepare_kraus(povm, states), name="cq_measure_prepare", params={"povm": povm, "states": states})
    if kind == "partial_trace_channel":
        dims = tuple(int(x) for x in params["dims"])
        traced = int(params.get("traced", 1))
        if len(dims) != 2 or traced not in (0, 1):
            raise ChannelError("partial_trace_channel needs two factors and traced in {0, 1}")
        da, db = dims
        if traced == 1:
            ops = [np.kron(np.eye(da), np.eye(db)[k][None, :]) for k in range(db)]
        else:
            ops = [np.kron(np.eye(da)[k][None, :], np.eye(db)) for k in range(da)]
        return Channel(np.array(ops), name=f"partial_trace{dims}[{traced}]", params={"dims": dims, "traced": traced})
    if kind == "kraus":
        return Channel(np.asarray(params["kraus"], dtype=complex), name=params.get("name", "kraus"))
    if kind == "unitary":
        u = np.asarray(params["u"], dtype=complex)
        return Channel(u[None], name="unitary")
    if kind == "random":
        din, dout = int(params["dim_in"]), int(params.get("dim_out", params["dim_in"]))
        nk = int(params.get("n_kraus", 2))
        v = random_isometry(nk * dout, din, params.get("seed"))
        return Channel(v.reshape(nk, dout, din), name=f"random({din}->{dout})", params=dict(params))
    raise ChannelError(f"unknown channel kind {kind!r}")


def random_cq_channel(dim_in: int = 2, dim_out: int = 2, n_outcomes: int = 2, seed=None) -> Channel:
    """Random entanglement-breaking channel: random POVM, random output states."""
    rng = rng_from(seed)
    v = random_isometry(n_outcomes * dim_in, dim_in, rng).reshape(n_outcomes, dim_in, dim_in)
    povm = [k.conj().T @ k for k in v]
    povm[-1] = povm[-1] + (np.eye(dim_in) - sum(povm))
    states = [random_state(dim_out, seed=rng) for _ in range(n_outcomes)]
    return make_channel("cq_measure_prepare", povm=povm, states=states)


def tensor_channels(phi, psi):
    """Tensor product of two channels (pairwise Kronecker products of Kraus operators).

    A Shor extension as first factor yields its hybrid tensor product.
    """
    if hasattr(phi, "tensor"):
        return phi.tensor(psi)
    if not isinstance(phi, Channel) or not isinstance(psi, Channel):
        raise ChannelError("unsupported channel combination for tensoring")
    ka, kb = phi.kraus, psi.kraus
    ops = np.einsum("aij,bkl->abikjl", ka, kb).reshape(
        ka.shape[0] * kb.shape[0], ka.shape[1] * kb.shape[1], ka.shape[2] * kb.shape[2]
    )
    tp = phi.trace_preserving and psi.trace_preserving
    return Channel(ops, name=f"({phi.name} x {psi.name})", trace_preserving=tp)


def direct_sum_mixture(channels: Sequence[Channel], probs: Sequence[float]) -> Channel:
    """The channel ``omega -> (+)_j q_j Phi_j(omega)`` with block-diagonal output."""
    channels = list(channels)
    probs = np.asarray(probs, dtype=float)
    if len(channels) != probs.size or probs.size == 0:
        raise DimensionError("one probability per channel required")
    if probs.min() < -1e-12 or abs(probs.sum() - 1) > 1e-10:
        raise ParameterError("mixture weights must be a probability distribution")
    if len({c.dim_in for c in channels}) != 1:
        raise DimensionError("mixed channels must share an input space")
    total = sum(c.dim_out for c in channels)
    ops, offset = [], 0
    for q, c in zip(probs, channels):
        for k in c.kraus:
            big = np.zeros((total, c.dim_in), dtype=complex)
            big[offset : offset + c.dim_out] = np.sqrt(max(q, 0.0)) * k
            ops.append(big)
        offset += c.dim_out
    tp = all(c.trace_preserving for c in channels)
    return Channel(
        np.array(ops),
        name="(+)".join(c.name for c in channels),
        trace_preserving=tp,
        components=tuple(zip(probs.tolist(), channels)),
    )


def psi_sub_A(psi: Channel, a, dim_h: int = None) -> Channel:
    """The CP map ``Psi_A(s) = Tr_H((A (x) I)(Id (x) Psi)(s))`` from H(x)K to K'.

    Kraus operators are ``<k| sqrt(A) (x) K_a``; ``Tr Psi_A(s) = Tr (A (x) I) s``.
    """
    a = hermitian(a)
    if not in_unit_interval(a):
        raise InvalidOperatorError("A must satisfy 0 <= A <= I")
    dh = a.shape[0] if dim_h is None else int(dim_h)
    root = psd_sqrt(a)
    ops = [np.kron(root[k][None, :], kp) for k in range(dh) for kp in psi.kraus]
    return Channel(np.array(ops), name=f"{psi.name}_A", trace_preserving=False)


def holevo_quantity(channel, ensemble: Ensemble) -> float:
    """``H(sum_i p_i Phi(rho_i)) - sum_i p_i H(Phi(rho_i))`` in bits."""
    avg = ensemble.average()
    value = output_entropy(channel.apply(avg))
    for p, s in ensemble:
        if p > 0:
            value -= p * output_entropy(channel.apply(s))
    return 0.0 if -1e-12 < value < 0 else float(value)


def holevo_relent_form(channel: Channel, ensemble: Ensemble) -> float:
    """``sum_i p_i S(Phi(rho_i) || Phi(rho_av))``, the relative-entropy form of chi."""
    ref = channel.apply_matrix(ensemble.average())
    return float(sum(p * relative_entropy(channel.apply_matrix(s), ref) for p, s in ensemble if p > 0))


def donald_residual(channel: Channel, ensemble: Ensemble, omega) -> float:
    """``sum_i p_i S(Phi(rho_i)||Phi(w)) - chi - S(Phi(rho_av)||Phi(w))``; zero in exact arithmetic.

    Returns ``inf`` if some relative entropy is infinite (support violation).
    """
    ref = channel.apply_matrix(omega)
    lhs = sum(p * relative_entropy(channel.apply_matrix(s), ref) for p, s in ensemble if p > 0)
    tail = relative_entropy(channel.apply_matrix(ensemble.average()), ref)
    if not np.isfinite(lhs) or not np.isfinite(tail):
        return float("inf")
    return float(lhs - holevo_quantity(channel, ensemble) - tail)


@dataclass(frozen=True, eq=False)
class Measurement:
    """Projective measurement ``{|e_j><e_j| (x) I_K}`` on the first factor of H (x) K."""

    basis: np.ndarray
    dim_k: int

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or np.abs(b.conj().T @ b - np.eye(b.shape[1])).max() > 1e-10 or b.shape[0] != b.shape[1]:
            raise ChannelError("measurement basis must be orthonormal and complete")
        object.__setattr__(self, "basis", b)

    def apply(self, sigma) -> Ensemble:
        sigma = np.asarray(sigma)
        dh = self.basis.shape[0]
        if sigma.shape != (dh * self.dim_k,) * 2:
            raise DimensionError("state does not match measurement dimensions")
        probs, states = [], []
        for j in range(dh):
            proj = np.kron(np.outer(self.basis[:, j], self.basis[:, j].conj()), np.eye(self.dim_k))
            post = proj @ sigma @ proj
            p = np.trace(post).real
            if p > 1e-14:
                probs.append(p)
                states.append(post / p)
        probs = np.array(probs)
        return Ensemble(probs / probs.sum(), tuple(states))

    __call__ = apply


def measurement_channel(basis, dim_k: int = 1) -> Measurement:
    return Measurement(np.asarray(basis), int(dim_k))


# ---------------------------------------------------------------------------
# Constraint sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Admissible average states: ``full``, ``fixed`` (one state) or ``linear``.

    The linear variant is ``{rho : Tr A_k rho <= alpha_k}`` with ``0 <= A_k <= I``.
    """

    variant: str
    dim: int
    state: np.ndarray = None
    ops: tuple = ()
    alphas: tuple = ()

    @classmethod
    def full(cls, dim: int) -> "ConstraintSet":
        return cls("full", int(dim))

    @classmethod
    def fixed(cls, rho) -> "ConstraintSet":
        rho = density_matrix(rho)
        return cls("fixed", rho.shape[0], state=rho)

    @classmethod
    def linear(cls, ops, alphas, check: bool = True) -> "ConstraintSet":
        ops = tuple(hermitian(a) for a in ops)
        alphas = tuple(float(x) for x in alphas)
        if not ops or len(ops) != len(alphas):
            raise InfeasibleError("one bound per operator required")
        for a in ops:
            if not in_unit_interval(a):
                raise InvalidOperatorError("constraint operators must satisfy 0 <= A <= I")
        if any(not -1e-12 <= x <= 1 + 1e-12 for x in alphas):
            raise ParameterError("constraint bounds must lie in [0, 1]")
        cs = cls("linear", ops[0].shape[0], ops=ops, alphas=alphas)
        if check and cs.slack() > FEASIBILITY_TOL:
            raise InfeasibleError("linear constraint set is empty")
        return cs

    def contains(self, rho, tol: float = 1e-8) -> bool:
        rho = np.asarray(rho)
        if self.variant == "full":
            return rho.shape == (self.dim, self.dim)
        if self.variant == "fixed":
            return bool(np.abs(rho - self.state).max() <= tol)
        return all(np.trace(a @ rho).real <= x + tol for a, x in zip(self.ops, self.alphas))

    def slack(self) -> float:
        """``min_rho max_k (Tr A_k rho - alpha_k)``: nonpositive iff feasible, negative iff Slater holds."""
        if self.variant != "linear":
            return 0.0 if self.variant == "fixed" else -np.inf
        return _linear_slack(self.ops, self.alphas)

    def has_interior(self) -> bool:
        return self.variant == "full" or (self.variant == "linear" and self.slack() < -INTERIOR_TOL)

    def relaxed(self, eps: float) -> "ConstraintSet":
        if self.variant != "linear":
            raise ParameterError("only linear constraint sets can be relaxed")
        return ConstraintSet.linear(self.ops, [min(x + eps, 1.0) for x in self.alphas])


def _linear_slack(ops, alphas) -> float:
    import cvxpy as cp

    d = ops[0].shape[0]
    rho = cp.Variable((d, d), hermitian=True)
    t = cp.Variable()
    cons = [rho >> 0, cp.real(cp.trace(rho)) == 1]
    cons += [cp.real(cp.trace(a @ rho)) - x <= t for a, x in zip(ops, alphas)]
    prob = cp.Problem(cp.Minimize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise InfeasibleError(f"feasibility problem failed: {prob.status}")
    return float(t.value)


def mixed_ensemble_bounds(channel: Channel, ensemble: Ensemble, other: Ensemble, eta: float) -> tuple:
    """Two-sided bound on ``chi^eta - chi`` when ``other`` is mixed in with weight ``eta``.

    Returns ``(lower, delta, upper)`` with ``lower <= delta <= upper`` in exact arithmetic:
    ``eta [sum_j mu_j S(Phi(w_j)||Phi(rho^eta)) - chi] <= delta <= eta [sum_j mu_j S(Phi(w_j)||Phi(rho_av)) - chi]``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError("eta must lie in [0, 1]")
    chi = holevo_quantity(channel, ensemble)
    mixed = ensemble.mix(other, eta)
    delta = holevo_quantity(channel, mixed) - chi
    out_eta = channel.apply_matrix(mixed.average())
    out_av = channel.apply_matrix(ensemble.average())
    d_eta = sum(m * relative_entropy(channel.apply_matrix(w), out_eta) for m, w in other)
    d_av = sum(m * relative_entropy(channel.apply_matrix(w), out_av) for m, w in other)
    return eta * (d_eta - chi), delta, eta * (d_av - chi)
