"""Dense Hermitian linear algebra and entropy primitives.

Every entropy in the package is measured in bits. Operators are plain
``numpy.ndarray`` objects; validation helpers turn them into clean Hermitian
matrices and raise :class:`~holevolab.errors.InvalidOperatorError` on bad input.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidOperatorError

HERMITIAN_TOL = 1e-12
NEGATIVE_TOL = 1e-12
TRACE_TOL = 1e-10
ZERO_EIG = 1e-15
KERNEL_EIG = 1e-12
SUPPORT_MASS_TOL = 1e-10


def hermitian(op, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``op`` as a complex Hermitian matrix, symmetrised.

    The deviation from Hermiticity is judged relative to the largest entry so
    that products of several random matrices still pass.
    """
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidOperatorError(f"expected a square matrix, got shape {op.shape}")
    scale = max(1.0, float(np.abs(op).max(initial=0.0)))
    if np.abs(op - op.conj().T).max(initial=0.0) > tol * scale:
        raise InvalidOperatorError("operator is not Hermitian")
    return (op + op.conj().T) / 2


def spectrum(op) -> np.ndarray:
    """Eigenvalues of a positive operator, tiny negatives clamped to zero."""
    evals = np.linalg.eigvalsh(hermitian(op))
    scale = max(1.0, float(np.abs(evals).max(initial=0.0)))
    if evals.size and evals.min() < -NEGATIVE_TOL * scale:
        raise InvalidOperatorError(f"negative eigenvalue {evals.min():.3e}")
    return np.clip(evals, 0.0, None)


def is_positive(op, tol: float = NEGATIVE_TOL) -> bool:
    try:
        evals = np.linalg.eigvalsh(hermitian(op))
    except InvalidOperatorError:
        return False
    return bool(evals.size == 0 or evals.min() >= -tol)


def density_matrix(op) -> np.ndarray:
    """Validate that ``op`` is a state (positive, unit trace) and return it."""
    op = hermitian(op)
    spectrum(op)
    tr = np.trace(op).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidOperatorError(f"trace {tr!r} differs from one")
    return op


def shannon_entropy(probs) -> float:
    """Shannon entropy in bits of a nonnegative vector (need not sum to one)."""
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > ZERO_EIG]
    return float(-(p * np.log2(p)).sum())


def h2(x: float) -> float:
    """Binary entropy ``-x log2 x - (1-x) log2 (1-x)``."""
    return shannon_entropy([x, 1.0 - x])


def entropy(op) -> float:
    """Von Neumann entropy ``-Tr S log2 S`` of a positive operator.

    The operator need not have unit trace, which is what the block formulas
    for direct sums require.

    >>> entropy(np.diag([0.5, 0.5]))
    1.0
    """
    return shannon_entropy(spectrum(op))


def _support_projector_mass(a: np.ndarray, b_vecs: np.ndarray, b_vals: np.ndarray) -> float:
    ker = b_vecs[:, b_vals < KERNEL_EIG]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.trace(ker.conj().T @ a @ ker).real)


def relative_entropy(a, b) -> float:
    """Quantum relative entropy ``Tr a (log2 a - log2 b)`` in bits.

    Returns ``inf`` when the support of ``a`` is not contained in the support of
    ``b`` (mass of ``a`` on the kernel of ``b`` above 1e-10).
    """
    a = hermitian(a)
    b = hermitian(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    a_vals, a_vecs = np.linalg.eigh(a)
    b_vals, b_vecs = np.linalg.eigh(b)
    for vals in (a_vals, b_vals):
        if vals.min() < -NEGATIVE_TOL * max(1.0, float(np.abs(vals).max())):
            raise InvalidOperatorError(f"negative eigenvalue {vals.min():.3e}")
    a_vals = np.clip(a_vals, 0.0, None)
    b_vals = np.clip(b_vals, 0.0, None)
    if _support_projector_mass(a, b_vecs, b_vals) > SUPPORT_MASS_TOL:
        return float("inf")
    keep = a_vals > ZERO_EIG
    term_a = float((a_vals[keep] * np.log2(a_vals[keep])).sum())
    # Tr a log b evaluated in the eigenbasis of b, restricted to its support.
    overlap = np.abs(a_vecs[:, keep].conj().T @ b_vecs) ** 2
    supp = b_vals >= KERNEL_EIG
    log_b = np.zeros_like(b_vals)
    log_b[supp] = np.log2(b_vals[supp])
    term_b = float((a_vals[keep] @ overlap[:, supp]) @ log_b[supp])
    value = term_a - term_b
    if -1e-12 < value < 0.0:
        return 0.0
    return value


def trace_norm(op) -> float:
    return float(np.abs(np.linalg.eigvalsh(hermitian(op))).sum())


def trace_distance(a, b) -> float:
    """Trace norm ``||a - b||_1`` (no factor 1/2)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return trace_norm(a - b)


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, [np.asarray(o) for o in ops])


def partial_trace(op, dims: Sequence[int], keep) -> np.ndarray:
    """Partial trace of ``op`` on a tensor product with factor sizes ``dims``.

    ``keep`` is a factor index or a sequence of indices; the kept factors stay
    in their original order.

    >>> bell = np.zeros((4, 4)); bell[np.ix_([0, 3], [0, 3])] = 0.5
    >>> np.allclose(partial_trace(bell, (2, 2), keep=0), np.eye(2) / 2)
    True
    """
    op = np.asarray(op)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if op.shape != (total, total):
        raise DimensionError(f"dims {dims} do not factor an operator of shape {op.shape}")
    keep = [keep] if np.isscalar(keep) else list(keep)
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep index out of range for {len(dims)} factors")
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    t = op.reshape(dims + dims)
    # Contract traced factors pairwise, highest index first so axes stay valid.
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in sorted(keep)])) if keep else 1
    return t.reshape(d_keep, d_keep)


def permute_factors(op, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator (``order`` lists old indices)."""
    op = np.asarray(op)
    dims = list(dims)
    n = len(dims)
    t = op.reshape(dims + dims)
    perm = list(order) + [n + i for i in order]
    new = int(np.prod(dims))
    return t.transpose(perm).reshape(new, new)


def psd_sqrt(op) -> np.ndarray:
    vals, vecs = np.linalg.eigh(hermitian(op))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def operator_norm(op) -> float:
    return float(np.abs(np.linalg.eigvalsh(hermitian(op))).max())


def in_unit_interval(op, tol: float = 1e-10) -> bool:
    """True when ``0 <= op <= I``."""
    try:
        vals = np.linalg.eigvalsh(hermitian(op))
    except InvalidOperatorError:
        return False
    return bool(vals.min() >= -tol and vals.max() <= 1 + tol)
