"""Ensembles, block (direct-sum) operators, hybrid quantum-classical states and
seeded random generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DimensionError, InvalidOperatorError, ParameterError
from .spectral import (
    KERNEL_EIG,
    TRACE_TOL,
    ZERO_EIG,
    density_matrix,
    hermitian,
    partial_trace,
    shannon_entropy,
    spectrum,
)

MATERIALIZE_LIMIT = 4096
PROB_TOL = 1e-10


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, str):
        seed = int(seed)
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# Block operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumBlock:
    """Positive operator block; ``op`` may be a matrix or a 1-D diagonal.

    With ``multiplicity`` m the block stands for m identical copies of
    ``op / m`` (used for uniform classical registers of symbolic size).
    """

    op: np.ndarray
    multiplicity: int = 1

    def __post_init__(self):
        op = np.asarray(self.op)
        if op.ndim == 1:
            op = op.astype(float)
        object.__setattr__(self, "op", op)
        if int(self.multiplicity) < 1:
            raise ParameterError("block multiplicity must be >= 1")

    @property
    def diagonal(self) -> bool:
        return self.op.ndim == 1

    @property
    def size(self) -> int:
        return self.op.shape[0] * int(self.multiplicity)

    def spectrum(self) -> np.ndarray:
        if self.diagonal:
            vals = self.op
            if vals.size and vals.min() < -1e-12:
                raise InvalidOperatorError(f"negative entry {vals.min():.3e}")
            vals = np.clip(vals, 0.0, None)
        else:
            vals = spectrum(self.op)
        return vals

    def trace(self) -> float:
        return float(self.op.sum().real if self.diagonal else np.trace(self.op).real)

    def entropy(self) -> float:
        # m copies of S/m: H(S) + Tr S log2 m
        return shannon_entropy(self.spectrum()) + self.trace() * np.log2(self.multiplicity)

    def full_spectrum(self) -> np.ndarray:
        m = int(self.multiplicity)
        if self.op.shape[0] * m > MATERIALIZE_LIMIT * 4:
            raise ParameterError("block too large to materialise")
        return np.repeat(self.spectrum() / m, m)

    def scaled(self, w: float) -> "QuantumBlock":
        return QuantumBlock(self.op * w, self.multiplicity)


@dataclass(frozen=True)
class UniformClassicalBlock:
    """Classical vector ``[w/m, ..., w/m]`` of length m, kept symbolic."""

    total_weight: float
    multiplicity: int

    def __post_init__(self):
        if self.total_weight < -1e-12:
            raise InvalidOperatorError("negative classical weight")
        if int(self.multiplicity) < 1:
            raise ParameterError("block multiplicity must be >= 1")

    @property
    def size(self) -> int:
        return int(self.multiplicity)

    def trace(self) -> float:
        return float(max(self.total_weight, 0.0))

    def entropy(self) -> float:
        w = self.trace()
        if w <= ZERO_EIG:
            return 0.0
        return float(w * np.log2(self.multiplicity) - w * np.log2(w))

    def full_spectrum(self) -> np.ndarray:
        if self.multiplicity > MATERIALIZE_LIMIT * 4:
            raise ParameterError("block too large to materialise")
        return np.full(int(self.multiplicity), self.trace() / self.multiplicity)

    def scaled(self, w: float) -> "UniformClassicalBlock":
        return UniformClassicalBlock(self.total_weight * w, self.multiplicity)


Block = Union[QuantumBlock, UniformClassicalBlock]


@dataclass(frozen=True)
class BlockOperator:
    """Positive operator on a direct sum of spaces: ``sum_k weights[k] * blocks[k]``."""

    blocks: tuple
    weights: tuple = None

    def __post_init__(self):
        blocks = tuple(self.blocks)
        weights = tuple(float(w) for w in (self.weights or [1.0] * len(blocks)))
        if len(weights) != len(blocks):
            raise DimensionError("one weight per block required")
        if any(w < 0 for w in weights):
            raise ParameterError("block weights must be nonnegative")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "weights", weights)

    def weighted_blocks(self) -> list:
        return [b.scaled(w) for b, w in zip(self.blocks, self.weights)]

    def trace(self) -> float:
        return float(sum(w * b.trace() for b, w in zip(self.blocks, self.weights)))

    def entropy(self) -> float:
        """Entropy of the concatenated spectrum, computed block by block."""
        return float(sum(b.entropy() for b in self.weighted_blocks()))

    def spectrum(self) -> np.ndarray:
        return np.concatenate([b.full_spectrum() for b in self.weighted_blocks()])

    def dims(self) -> tuple:
        return tuple(b.size for b in self.blocks)

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        if not isinstance(other, BlockOperator):
            return NotImplemented
        a, b = self.weighted_blocks(), other.weighted_blocks()
        if len(a) != len(b):
            raise DimensionError("block structures differ")
        out = []
        for x, y in zip(a, b):
            if type(x) is not type(y) or x.size != y.size:
                raise DimensionError("block structures differ")
            if isinstance(x, UniformClassicalBlock):
                out.append(UniformClassicalBlock(x.total_weight + y.total_weight, x.multiplicity))
            else:
                if x.multiplicity != y.multiplicity or x.diagonal != y.diagonal:
                    raise DimensionError("block structures differ")
                out.append(QuantumBlock(x.op + y.op, x.multiplicity))
        return BlockOperator(tuple(out))

    def __mul__(self, w: float) -> "BlockOperator":
        return BlockOperator(self.blocks, tuple(x * float(w) for x in self.weights))

    __rmul__ = __mul__

    def allclose(self, other: "BlockOperator", atol: float = 1e-10) -> bool:
        """Compare as positive operators up to block relabelling (sorted spectra)."""
        if abs(self.trace() - other.trace()) > atol:
            return False
        if abs(self.entropy() - other.entropy()) > atol * 10:
            return False
        try:
            s, t = np.sort(self.spectrum()), np.sort(other.spectrum())
        except ParameterError:
            return True
        if s.size != t.size:
            # zero padding is irrelevant for the operator's nonzero spectrum
            n = max(s.size, t.size)
            s = np.sort(np.pad(s, (n - s.size, 0)))
            t = np.sort(np.pad(t, (n - t.size, 0)))
        return bool(np.allclose(s, t, atol=atol))


# ---------------------------------------------------------------------------
# Hybrid states  {rho_j}_{j=1..d}
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HybridState:
    """State on B(H) (x) C^d as an array of d positive operators."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(hermitian(p) for p in self.parts)
        if not parts:
            raise DimensionError("hybrid state needs at least one part")
        shapes = {p.shape for p in parts}
        if len(shapes) != 1:
            raise DimensionError("hybrid parts must share one dimension")
        object.__setattr__(self, "parts", parts)

    @property
    def d(self) -> int:
        return len(self.parts)

    @property
    def dim(self) -> int:
        return self.parts[0].shape[0]

    def flatten(self) -> np.ndarray:
        return sum(self.parts)

    def validate(self) -> "HybridState":
        for p in self.parts:
            spectrum(p)
        tr = sum(np.trace(p).real for p in self.parts)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidOperatorError(f"hybrid trace {tr!r} differs from one")
        return self

    def __add__(self, other):
        if not isinstance(other, HybridState) or other.d != self.d:
            return NotImplemented
        return HybridState(tuple(a + b for a, b in zip(self.parts, other.parts)))

    def __mul__(self, w: float):
        return HybridState(tuple(p * w for p in self.parts))

    __rmul__ = __mul__

    @classmethod
    def delta(cls, state, j: int, d: int) -> "HybridState":
        """The array with ``state`` at position ``j`` (0-based) and zeros elsewhere."""
        state = np.asarray(state, dtype=complex)
        zero = np.zeros_like(state)
        return cls(tuple(state if k == j else zero for k in range(d)))


@dataclass(frozen=True, eq=False)
class UniformHybridState:
    """Symbolic ``rho (x) tau`` with tau the uniform classical state on C^d."""

    rho: np.ndarray
    d: int

    def flatten(self) -> np.ndarray:
        return np.asarray(self.rho)

    def materialize(self) -> HybridState:
        if self.d > MATERIALIZE_LIMIT:
            raise ParameterError(f"d = {self.d} exceeds materialisation limit {MATERIALIZE_LIMIT}")
        part = np.asarray(self.rho) / self.d
        return HybridState(tuple(part for _ in range(self.d)))

    def __add__(self, other):
        if not isinstance(other, UniformHybridState) or other.d != self.d:
            return NotImplemented
        return UniformHybridState(np.asarray(self.rho) + np.asarray(other.rho), self.d)

    def __mul__(self, w: float):
        return UniformHybridState(np.asarray(self.rho) * w, self.d)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite ensemble ``{p_i, rho_i}``; states may be matrices or hybrid states."""

    probs: np.ndarray
    states: tuple = field(default=())

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        states = tuple(
            s if isinstance(s, (HybridState, UniformHybridState)) else density_matrix(s)
            for s in self.states
        )
        if probs.size == 0 or probs.size != len(states):
            raise DimensionError("ensemble needs one probability per state and at least one member")
        if probs.min() < -PROB_TOL or abs(probs.sum() - 1.0) > PROB_TOL:
            raise InvalidOperatorError("ensemble probabilities must be nonnegative and sum to one")
        probs = np.clip(probs, 0.0, None)
        dims = {_dim_of(s) for s in states}
        if len(dims) != 1:
            raise DimensionError("ensemble states must share one dimension")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_items(cls, items) -> "Ensemble":
        items = list(items)
        return cls(np.array([p for p, _ in items]), tuple(s for _, s in items))

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.probs, self.states))

    @property
    def dim(self) -> int:
        return _dim_of(self.states[0])

    def average(self):
        return average_state(self)

    def mix(self, other: "Ensemble", eta: float) -> "Ensemble":
        """``(1-eta) * self`` followed by ``eta * other`` as one ensemble."""
        return Ensemble(
            np.concatenate([(1 - eta) * self.probs, eta * other.probs]),
            self.states + other.states,
        )

    def tensor(self, other: "Ensemble") -> "Ensemble":
        probs = np.outer(self.probs, other.probs).ravel()
        states = tuple(np.kron(a, b) for a in self.states for b in other.states)
        return Ensemble(probs, states)

    def pruned(self, tol: float = 1e-14) -> "Ensemble":
        keep = self.probs > tol
        probs = self.probs[keep]
        return Ensemble(probs / probs.sum(), tuple(s for s, k in zip(self.states, keep) if k))


def _dim_of(state) -> int:
    if isinstance(state, (HybridState,)):
        return state.dim * state.d
    if isinstance(state, UniformHybridState):
        return np.asarray(state.rho).shape[0] * state.d
    return np.asarray(state).shape[0]


def average_state(ensemble: Ensemble):
    """Probability-weighted mixture of the ensemble members."""
    out = None
    for p, s in ensemble:
        term = s * p
        out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# Decompositions and random generators
# ---------------------------------------------------------------------------


def eigen_support(rho, tol: float = KERNEL_EIG):
    """Nonzero eigenpairs of a state: (values, vectors as columns)."""
    vals, vecs = np.linalg.eigh(hermitian(rho))
    keep = vals > tol
    return vals[keep], vecs[:, keep]


def hjw_ensemble(rho, n: int, mix) -> Ensemble:
    """Pure-state decomposition of ``rho`` labelled by an isometry.

    Member ``i`` is proportional to ``sum_k mix[i, k] sqrt(lambda_k) |v_k>`` where
    ``lambda_k, v_k`` are the nonzero eigenpairs of ``rho``. Every length-n pure
    decomposition of ``rho`` arises this way for some n x r isometry.
    """
    rho = density_matrix(rho)
    vals, vecs = eigen_support(rho)
    r = vals.size
    mix = np.asarray(mix, dtype=complex)
    if n < r:
        raise ParameterError(f"n = {n} is below rank {r}")
    if mix.shape != (n, r):
        raise DimensionError(f"mix must have shape {(n, r)}, got {mix.shape}")
    if np.abs(mix.conj().T @ mix - np.eye(r)).max() > 1e-10:
        raise ParameterError("mix columns are not orthonormal")
    w = vecs * np.sqrt(vals)  # D x r
    members = mix @ w.T  # row i is psi_i (unnormalised)
    probs = np.einsum("ij,ij->i", members.conj(), members).real
    keep = probs > 1e-14
    states = tuple(np.outer(m, m.conj()) / p for m, p in zip(members[keep], probs[keep]))
    probs = probs[keep]
    return Ensemble(probs / probs.sum(), states)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase fix)."""
    rng = rng_from(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    if cols > rows:
        raise ParameterError("isometry needs rows >= cols")
    return random_unitary(rows, seed)[:, :cols]


def random_pure(dim: int, seed=None) -> np.ndarray:
    """Haar-random unit vector."""
    rng = rng_from(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_state(dim: int, rank: int = None, seed=None) -> np.ndarray:
    """Random density matrix: partial trace of a Haar pure state on dim x rank."""
    rank = dim if rank is None else int(rank)
    if rank > dim or rank < 1:
        raise ParameterError(f"rank {rank} must lie in [1, {dim}]")
    psi = random_pure(dim * rank, seed)
    rho = partial_trace(np.outer(psi, psi.conj()), (dim, rank), keep=0)
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_ensemble(dim: int, n: int, seed=None, rank: int = None) -> Ensemble:
    """Random ensemble of n states with Dirichlet(1) weights."""
    rng = rng_from(seed)
    probs = rng.dirichlet(np.ones(n))
    states = tuple(random_state(dim, rank, rng) for _ in range(n))
    return Ensemble(probs, states)


def random_positive_contraction(dim: int, seed=None) -> np.ndarray:
    """Random operator with ``0 <= E <= I`` (uniform eigenvalues, Haar basis)."""
    rng = rng_from(seed)
    u = random_unitary(dim, rng)
    vals = rng.uniform(0.0, 1.0, dim)
    return (u * vals) @ u.conj().T
