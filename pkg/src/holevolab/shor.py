"""Shor-type channel extensions with a symbolic classical register.

``ShorHatChannel`` acts on hybrid states ``{rho_j}_{j=1..d}``::

    {rho_j} -> (1-q) Phi(rho) (+) q [Tr rho E', Tr rho_1 E, ..., Tr rho_d E]

with ``rho = sum_j rho_j`` and ``E' = I - E``. Tensored with a partner channel
``Psi`` on K the classical entries become the CP maps ``Psi_E'`` and ``Psi_E``.
``ShorTildeChannel`` is the same map restricted to inputs ``rho (x) tau`` with
``tau`` uniform on d letters.

The register size ``d`` may be huge (``2**30``): uniform parts are kept as
blocks with a multiplicity, so entropies cost O(1) in ``d``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .channels import Channel, make_channel, psi_sub_A, tensor_channels
from .errors import DimensionError, InvalidOperatorError, ParameterError
from .spectral import h2, hermitian, in_unit_interval, entropy
from .states import (
    MATERIALIZE_LIMIT,
    BlockOperator,
    Ensemble,
    HybridState,
    QuantumBlock,
    UniformHybridState,
)


def parse_d(d) -> int:
    """Register size from an int or a ``"2^k"`` string."""
    if isinstance(d, str):
        m = re.fullmatch(r"\s*(\d+)\s*\^\s*(\d+)\s*", d)
        d = int(m.group(1)) ** int(m.group(2)) if m else int(d)
    d = int(d)
    if d < 1:
        raise ParameterError("register size d must be positive")
    return d


def _check_e(e):
    e = hermitian(e)
    if not in_unit_interval(e):
        raise InvalidOperatorError("E must satisfy 0 <= E <= I")
    return e


def _trivial(dim: int = 1) -> Channel:
    return make_channel("identity", dim=dim)


@dataclass(frozen=True, eq=False)
class ShorHatChannel:
    """The extension of ``base`` by a measurement ``{E', E}`` with weight q and register size d.

    ``partner`` (default: the trivial channel on C^1) is the channel this
    extension is tensored with; see :meth:`tensor`.
    """

    base: Channel
    e: np.ndarray
    q: float
    d: int
    partner: Channel = None

    def __post_init__(self):
        e = _check_e(self.e)
        if e.shape[0] != self.base.dim_in:
            raise DimensionError("E must act on the input space of the base channel")
        if not 0.0 <= self.q <= 1.0:
            raise ParameterError(f"q = {self.q} outside [0, 1]")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "d", parse_d(self.d))
        if self.partner is None:
            object.__setattr__(self, "partner", _trivial())

    # -- derived maps on H (x) K --------------------------------------------

    @property
    def dim_h(self) -> int:
        return self.base.dim_in

    @property
    def dim_k(self) -> int:
        return self.partner.dim_in

    @property
    def joint_dim(self) -> int:
        return self.dim_h * self.dim_k

    def quantum_map(self) -> Channel:
        """``Phi (x) Psi`` on the joint input."""
        return tensor_channels(self.base, self.partner)

    def psi_e(self) -> Channel:
        return psi_sub_A(self.partner, self.e, self.dim_h)

    def psi_ebar(self) -> Channel:
        return psi_sub_A(self.partner, np.eye(self.dim_h) - self.e, self.dim_h)

    def reduced_blocks(self) -> tuple:
        """Kraus stacks of ``(1-q) Phi(x)Psi``, ``q Psi_E'`` and ``q Psi_E`` (weights folded in)."""
        q = self.q
        return (
            np.sqrt(1 - q) * self.quantum_map().kraus,
            np.sqrt(q) * self.psi_ebar().kraus,
            np.sqrt(q) * self.psi_e().kraus,
        )

    def classical_rate(self) -> float:
        """Coefficient ``q log2 d`` of ``Tr (E (x) I) sigma_av`` in the lifted Holevo quantity."""
        return self.q * np.log2(self.d)

    def tensor(self, psi: Channel) -> "ShorHatChannel":
        if self.partner.dim_in != 1:
            raise DimensionError("extension is already tensored with a partner")
        return ShorHatChannel(self.base, self.e, self.q, self.d, psi)

    # -- action ---------------------------------------------------------------

    def apply(self, state) -> BlockOperator:
        q = self.q
        qm = self.quantum_map()
        pe, pb = self.psi_e(), self.psi_ebar()
        if isinstance(state, UniformHybridState):
            if state.d != self.d:
                raise DimensionError("register sizes differ")
            rho = np.asarray(state.rho)
            return BlockOperator(
                (
                    QuantumBlock(qm.apply_matrix(rho)),
                    QuantumBlock(pb.apply_matrix(rho)),
                    QuantumBlock(pe.apply_matrix(rho), self.d),
                ),
                (1 - q, q, q),
            )
        if isinstance(state, SymbolicDelta):
            if state.d != self.d:
                raise DimensionError("register sizes differ")
            rho = np.asarray(state.state)
            # the other d - 1 classical slots are zero and carry no entropy
            return BlockOperator(
                (QuantumBlock(qm.apply_matrix(rho)), QuantumBlock(pb.apply_matrix(rho)), QuantumBlock(pe.apply_matrix(rho))),
                (1 - q, q, q),
            )
        if isinstance(state, HybridState):
            if state.d != self.d:
                raise DimensionError(f"hybrid state has {state.d} slots, channel expects {self.d}")
            rho = state.flatten()
            blocks = [QuantumBlock(qm.apply_matrix(rho)), QuantumBlock(pb.apply_matrix(rho))]
            blocks += [QuantumBlock(pe.apply_matrix(p)) for p in state.parts]
            return BlockOperator(tuple(blocks), (1 - q, q) + (q,) * state.d)
        raise DimensionError("Shor extension expects a hybrid state")

    __call__ = apply

    def lifted_ensemble(self, ensemble: Ensemble) -> "LiftedEnsemble":
        return LiftedEnsemble(ensemble, self.d)


@dataclass(frozen=True, eq=False)
class SymbolicDelta:
    """Hybrid state with ``state`` in one slot and zeros elsewhere (slot index irrelevant by symmetry)."""

    state: np.ndarray
    d: int

    def materialize(self, j: int = 0) -> HybridState:
        if self.d > MATERIALIZE_LIMIT:
            raise ParameterError(f"d = {self.d} exceeds materialisation limit {MATERIALIZE_LIMIT}")
        return HybridState.delta(self.state, j, self.d)


@dataclass(frozen=True, eq=False)
class LiftedEnsemble:
    """The symmetric ensemble ``{mu_i / d, delta_j(sigma_i)}`` over ``i`` and all ``d`` slots."""

    base: Ensemble
    d: int

    def average(self) -> UniformHybridState:
        return UniformHybridState(self.base.average(), self.d)

    def members(self):
        """``(mu_i, SymbolicDelta)`` representatives; each stands for d equiprobable slots."""
        return [(p, SymbolicDelta(s, self.d)) for p, s in self.base]

    def materialize(self) -> Ensemble:
        if self.d > MATERIALIZE_LIMIT:
            raise ParameterError(f"d = {self.d} exceeds materialisation limit {MATERIALIZE_LIMIT}")
        items = [(p / self.d, HybridState.delta(s, j, self.d)) for p, s in self.base for j in range(self.d)]
        return Ensemble.from_items(items)


def lifted_holevo(channel: ShorHatChannel, lifted: LiftedEnsemble) -> float:
    """Holevo quantity of ``channel`` on a lifted symmetric ensemble, without materialising d."""
    value = channel.apply(lifted.average()).entropy()
    for p, member in lifted.members():
        if p > 0:
            value -= p * channel.apply(member).entropy()
    return float(value)


def shor_hat(phi: Channel, e, q: float, d) -> ShorHatChannel:
    return ShorHatChannel(phi, e, float(q), parse_d(d))


def _q_from_p(p: float, d: int) -> float:
    d = parse_d(d)
    if p < 0:
        raise ParameterError("p must be nonnegative")
    if p == 0:
        return 0.0
    if d < 2 or p > np.log2(d) + 1e-12:
        raise ParameterError(f"p = {p} exceeds log2 d = {np.log2(d) if d > 0 else 0}")
    return min(p / np.log2(d), 1.0)


def shor_hat_dp(phi: Channel, a, p: float, d) -> ShorHatChannel:
    """Extension with ``q = p / log2 d``."""
    return shor_hat(phi, a, _q_from_p(p, d), d)


@dataclass(frozen=True, eq=False)
class ShorTildeChannel:
    """``rho -> (1-q) Phi(rho) (+) q [Tr rho E', Tr E rho / d (x d)]`` on plain states."""

    base: Channel
    e: np.ndarray
    q: float
    d: int

    def __post_init__(self):
        object.__setattr__(self, "_hat", ShorHatChannel(self.base, self.e, self.q, self.d))
        object.__setattr__(self, "e", self._hat.e)
        object.__setattr__(self, "d", self._hat.d)

    @property
    def hat(self) -> ShorHatChannel:
        return self._hat

    def apply(self, rho) -> BlockOperator:
        return self._hat.apply(UniformHybridState(np.asarray(rho), self.d))

    __call__ = apply


def shor_tilde(phi: Channel, e, q: float, d) -> ShorTildeChannel:
    return ShorTildeChannel(phi, e, float(q), parse_d(d))


def shor_tilde_dp(phi: Channel, a, p: float, d) -> ShorTildeChannel:
    return shor_tilde(phi, a, _q_from_p(p, d), d)


def tilde_entropy_closed_form(phi: Channel, a, p: float, d, rho) -> float:
    """Output entropy of the tilde extension ``shor_tilde_dp(phi, a, p, d)`` at ``rho``.

    Equals ``h2(q) + (1-q) H(Phi(rho)) + p Tr A rho + q h2(Tr A rho)`` with ``q = p / log2 d``.
    """
    q = _q_from_p(p, d)
    a = _check_e(a)
    t = float(np.clip(np.trace(a @ rho).real, 0.0, 1.0))
    return h2(q) + (1 - q) * entropy(phi.apply_matrix(rho)) + p * t + q * h2(t)
