"""Multi-start ascent over pure-state ensembles.

Every optimisation in the package is phrased as maximising a smooth function of
an ensemble of unnormalised pure vectors ``psi_i`` (``p_i = |psi_i|^2``,
``sigma_av = sum_i psi_i psi_i^dag``). The objective has the form

    sum_b H(G_b(sigma_av)) - c_mem sum_i sum_b H(F_b(psi_i psi_i^dag))
        - c_plogp sum_i p_i log p_i + Tr X sigma_av

with CP maps ``G_b``, ``F_b`` given by Kraus stacks. For a trace-preserving
direct sum of blocks and ``c_plogp = 1`` this is exactly the Holevo quantity.
Entropies are computed in nats internally and reported in bits.

Parameterisations map an unconstrained complex array ``z`` to ``psi``:

* :class:`FreeParam` normalises ``z``; the average state is unconstrained.
* :class:`MarginalParam` fixes one marginal of the average state through a
  polar (isometry) factor, which reduces to the usual decomposition
  parameterisation when the second factor is trivial.

All array operations are batched over leading axes so that many restarts can
ascend simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .states import eigen_support, rng_from

LN2 = np.log(2.0)
LOG_FLOOR = 1e-14
BATCH_THRESHOLD = 16
POLISH_TOP = 16


def _entropy_and_dlog(x):
    """Batched entropy (nats) and ``log x + I`` (floored) of Hermitian PSD matrices."""
    vals, vecs = np.linalg.eigh(x)
    vals = np.clip(vals, 0.0, None)
    safe = np.where(vals > 1e-15, vals, 1.0)
    h = -np.sum(np.where(vals > 1e-15, vals * np.log(safe), 0.0), axis=-1)
    lg = np.log(np.maximum(vals, LOG_FLOOR)) + 1.0
    m = (vecs * lg[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)
    return h, m


def marginal(sigma, dims, factor):
    """Batched partial trace keeping ``factor`` of a bipartite operator."""
    d1, d2 = dims
    t = sigma.reshape(sigma.shape[:-2] + (d1, d2, d1, d2))
    if factor == 0:
        return np.einsum("...aibi->...ab", t)
    return np.einsum("...iaib->...ab", t)


def lift(y, dims, factor):
    d1, d2 = dims
    return np.kron(y, np.eye(d2)) if factor == 0 else np.kron(np.eye(d1), y)


@dataclass
class Penalty:
    """Augmented-Lagrangian term ``-Re Tr(L D) - mu/2 ||D||^2`` with ``D`` a marginal mismatch."""

    dims: tuple
    factor: int
    target: np.ndarray
    multiplier: np.ndarray = None
    mu: float = 10.0

    def __post_init__(self):
        if self.multiplier is None:
            self.multiplier = np.zeros_like(self.target, dtype=complex)

    def mismatch(self, sigma):
        return marginal(sigma, self.dims, self.factor) - self.target


@dataclass
class EnsembleObjective:
    dim: int
    avg_blocks: tuple = ()
    mem_blocks: tuple = ()
    plogp: float = 1.0
    linear: np.ndarray = None
    penalty: Penalty = None

    def __post_init__(self):
        self.avg_blocks = tuple(np.asarray(k, dtype=complex) for k in self.avg_blocks)
        self.mem_blocks = tuple(np.asarray(k, dtype=complex) for k in self.mem_blocks)

    def value_grad(self, psi, with_grad: bool = True):
        psi = np.asarray(psi)
        sigma = np.einsum("...ni,...nj->...ij", psi, psi.conj())
        val = np.zeros(psi.shape[:-2])
        grad = np.zeros_like(psi) if with_grad else None
        for k in self.avg_blocks:
            out = np.einsum("kai,...ij,kbj->...ab", k, sigma, k.conj(), optimize=True)
            h, m = _entropy_and_dlog(out)
            val = val + h
            if with_grad:
                adj = np.einsum("kai,...ab,kbj->...ij", k.conj(), m, k, optimize=True)
                grad -= 2.0 * np.einsum("...ij,...nj->...ni", adj, psi)
        for k in self.mem_blocks:
            kpsi = np.einsum("kai,...ni->...nka", k, psi)
            out = np.einsum("...nka,...nkb->...nab", kpsi, kpsi.conj())
            h, m = _entropy_and_dlog(out)
            val = val - h.sum(-1)
            if with_grad:
                grad += 2.0 * np.einsum("kai,...nab,...nkb->...ni", k.conj(), m, kpsi, optimize=True)
        if self.plogp:
            p = np.einsum("...ni,...ni->...n", psi.conj(), psi).real
            safe = np.where(p > 1e-300, p, 1.0)
            val = val - self.plogp * np.sum(np.where(p > 1e-300, p * np.log(safe), 0.0), axis=-1)
            if with_grad:
                grad -= 2.0 * self.plogp * (np.log(np.maximum(p, LOG_FLOOR)) + 1.0)[..., None] * psi
        val = val / LN2
        if with_grad:
            grad /= LN2
        if self.linear is not None:
            val = val + np.einsum("ij,...ji->...", self.linear, sigma).real
            if with_grad:
                grad += 2.0 * np.einsum("ij,...nj->...ni", self.linear, psi)
        if self.penalty is not None:
            pen = self.penalty
            d = pen.mismatch(sigma)
            val = val - np.einsum("ij,...ji->...", pen.multiplier, d).real - 0.5 * pen.mu * np.sum(np.abs(d) ** 2, axis=(-1, -2))
            if with_grad:
                y = pen.multiplier + pen.mu * d
                if y.ndim == 2:
                    ly = lift(y, pen.dims, pen.factor)
                else:
                    flat = y.reshape(-1, *y.shape[-2:])
                    ly = np.stack([lift(yy, pen.dims, pen.factor) for yy in flat]).reshape(y.shape[:-2] + (self.dim, self.dim))
                grad -= 2.0 * np.einsum("...ij,...nj->...ni", ly, psi)
        return val, grad


class FreeParam:
    """``psi = z / ||z||``: ensembles of n pure states with unconstrained average."""

    def __init__(self, n: int, dim: int):
        self.n, self.dim = int(n), int(dim)
        self.shape = (self.n, self.dim)

    def random(self, rng, batch=()):
        return rng.standard_normal(batch + self.shape) + 1j * rng.standard_normal(batch + self.shape)

    def psi(self, z):
        nrm = np.sqrt(np.sum(np.abs(z) ** 2, axis=(-1, -2), keepdims=True))
        return z / nrm

    def pullback(self, z, g):
        nrm = np.sqrt(np.sum(np.abs(z) ** 2, axis=(-1, -2), keepdims=True))
        psi = z / nrm
        radial = np.sum((psi.conj() * g).real, axis=(-1, -2), keepdims=True)
        return (g - radial * psi) / nrm

    def encode(self, psi):
        psi = np.asarray(psi, dtype=complex)
        if psi.shape[-2] < self.n:
            pad = np.zeros((self.n - psi.shape[-2], self.dim), dtype=complex)
            psi = np.concatenate([psi, pad])
        return psi.reshape(self.shape)


class MarginalParam:
    """Ensembles on ``C^d1 (x) C^d2`` whose average has a fixed marginal on ``factor``.

    With ``W`` a square-root factor of the fixed marginal (``W W^dag = rho``) the
    members are ``T_i[a, b] = sum_l W[a, l] U[(i, b), l]`` for an isometry ``U``
    obtained as the polar factor of ``z``. ``dims = (D, 1)`` gives ensembles with
    a fixed average state.
    """

    def __init__(self, rho, dims, factor: int, n: int):
        vals, vecs = eigen_support(rho)
        self.w = vecs * np.sqrt(vals)
        self.r = vals.size
        self.dims = tuple(int(x) for x in dims)
        self.factor = int(factor)
        self.d_fixed = self.dims[self.factor]
        self.d_other = self.dims[1 - self.factor]
        self.n = int(n)
        self.shape = (self.n * self.d_other, self.r)
        self.dim = self.dims[0] * self.dims[1]
        if self.w.shape[0] != self.d_fixed:
            raise ValueError("marginal does not match the fixed factor dimension")
        if self.n * self.d_other < self.r:
            raise ValueError("too few members for the rank of the fixed marginal")

    def random(self, rng, batch=()):
        return rng.standard_normal(batch + self.shape) + 1j * rng.standard_normal(batch + self.shape)

    @staticmethod
    def _polar(z):
        s = np.swapaxes(z.conj(), -1, -2) @ z
        ev, q = np.linalg.eigh(s)
        ev = np.maximum(ev, 1e-300)
        t = (q * ev[..., None, :] ** -0.5) @ np.swapaxes(q.conj(), -1, -2)
        return z @ t, ev, q, t

    def _to_psi(self, u):
        u = u.reshape(u.shape[:-2] + (self.n, self.d_other, self.r))
        t = np.einsum("al,...ibl->...iab", self.w, u)
        if self.factor == 1:
            t = np.swapaxes(t, -1, -2)
        return t.reshape(t.shape[:-2] + (self.dim,))

    def psi(self, z):
        return self._to_psi(self._polar(z)[0])

    def pullback(self, z, g):
        g = g.reshape(g.shape[:-1] + ((self.dims[0], self.dims[1])))
        if self.factor == 1:
            g = np.swapaxes(g, -1, -2)
        gu = np.einsum("...iab,al->...ibl", g, self.w.conj())
        gu = gu.reshape(gu.shape[:-3] + self.shape)
        u, ev, q, t = self._polar(z)
        rs = np.sqrt(ev)
        lmat = -1.0 / (rs[..., :, None] * rs[..., None, :] * (rs[..., :, None] + rs[..., None, :]))
        c = np.swapaxes(gu.conj(), -1, -2) @ z
        c = 0.5 * (c + np.swapaxes(c.conj(), -1, -2))
        qh = np.swapaxes(q.conj(), -1, -2)
        k = q @ (lmat * (qh @ c @ q)) @ qh
        return gu @ t + 2.0 * z @ k

    def encode(self, psi):
        """Isometry reproducing ``psi`` (members must match the fixed marginal)."""
        psi = np.asarray(psi, dtype=complex)
        m = psi.shape[0]
        t = psi.reshape(m, self.dims[0], self.dims[1])
        if self.factor == 1:
            t = np.swapaxes(t, -1, -2)
        u = np.einsum("la,iab->ibl", np.linalg.pinv(self.w), t).reshape(m * self.d_other, self.r)
        if m < self.n:
            u = np.concatenate([u, np.zeros(((self.n - m) * self.d_other, self.r), dtype=complex)])
        # re-orthonormalise to absorb rounding
        u = self._polar(u[: self.n * self.d_other])[0]
        return u


@dataclass
class OptResult:
    value: float
    psi: np.ndarray
    restarts_used: int
    converged: bool
    gap_estimate: float
    values: np.ndarray = field(default=None, repr=False)
    mismatch: float = 0.0


def _to_real(z):
    return np.concatenate([z.real.ravel(), z.imag.ravel()])


def _to_complex(x, shape):
    half = x.size // 2
    return (x[:half] + 1j * x[half:]).reshape(shape)


def _lbfgs(obj, param, z0, max_iter, tol):
    shape = z0.shape

    def fun(x):
        z = _to_complex(x, shape)
        v, g = obj.value_grad(param.psi(z))
        gz = param.pullback(z, g)
        return -float(v), -_to_real(gz)

    res = minimize(fun, _to_real(z0), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-10, "maxcor": 30})
    z = _to_complex(res.x, shape)
    ok = bool(res.success) or res.status == 0 or "ABNORMAL" in str(res.message)
    return z, -float(res.fun), ok


def _slsqp(obj, param, z0, constraints, max_iter, tol):
    shape = z0.shape

    def fun(x):
        z = _to_complex(x, shape)
        v, g = obj.value_grad(param.psi(z))
        return -float(v), -_to_real(param.pullback(z, g))

    cons = []
    for a, alpha in constraints:
        def cf(x, a=a, alpha=alpha):
            psi = param.psi(_to_complex(x, shape))
            return alpha - np.einsum("ij,nj,ni->", a, psi, psi.conj()).real

        def cj(x, a=a):
            z = _to_complex(x, shape)
            psi = param.psi(z)
            return -_to_real(param.pullback(z, 2.0 * psi @ a.T))

        cons.append({"type": "ineq", "fun": cf, "jac": cj})
    res = minimize(fun, _to_real(z0), jac=True, method="SLSQP", constraints=cons,
                   options={"maxiter": max_iter, "ftol": tol})
    z = _to_complex(res.x, shape)
    psi = param.psi(z)
    viol = max([0.0] + [-c["fun"](res.x) for c in cons])
    return z, float(obj.value_grad(psi, with_grad=False)[0]), bool(res.success), viol


def _batched_ascent(obj, param, z, steps=300, lr=0.05):
    """Adam ascent on all restarts at once; used to screen large restart pools."""
    m = np.zeros_like(z)
    v = np.zeros(z.shape)
    b1, b2 = 0.9, 0.999
    for t in range(1, steps + 1):
        val, g = obj.value_grad(param.psi(z))
        gz = param.pullback(z, g)
        m = b1 * m + (1 - b1) * gz
        v = b2 * v + (1 - b2) * np.abs(gz) ** 2
        step = lr * (0.98 ** (t / 10))
        z = z + step * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + 1e-12)
    val, _ = obj.value_grad(param.psi(z), with_grad=False)
    return z, val


def _gap_estimate(values):
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return float("inf")
    top = vals[: max(1, int(np.ceil(vals.size / 4)))]
    return float(top[0] - top[-1])


def _polish_count(n: int) -> int:
    return int(min(POLISH_TOP, max(4, n // 8)))


def maximize(obj: EnsembleObjective, param, restarts: int = 16, seed=0, max_iter: int = 3000,
             tol: float = 1e-13, inits=(), constraints=None, penalty_tol: float = 1e-8) -> OptResult:
    """Multi-start maximisation of ``obj`` over the parameterisation ``param``.

    ``inits`` are warm-start ``psi`` arrays (encoded through ``param.encode``).
    ``constraints`` is a list of ``(X, alpha)`` pairs meaning ``Tr X sigma_av <= alpha``
    and switches to SLSQP (free parameterisation only). If ``obj.penalty`` is set
    the augmented-Lagrangian loop drives the marginal mismatch below ``penalty_tol``.
    Ties between restarts go to the lowest index.
    """
    rng = rng_from(seed)
    restarts = max(int(restarts), 1)
    # warm starts get a small perturbation so padded (zero) members can move
    starts = []
    for p in inits:
        z = param.encode(p)
        scale = np.sqrt(np.mean(np.abs(z) ** 2))
        starts.append(z + 1e-4 * scale * param.random(rng))
    n_random = max(restarts - len(starts), 0)
    zs = list(starts)
    if n_random:
        zs.extend(list(param.random(rng, (n_random,))))
    zs = np.array(zs)

    if constraints is None and obj.penalty is None and len(zs) > BATCH_THRESHOLD:
        zb, screened = _batched_ascent(obj, param, zs)
        order = np.argsort(-screened, kind="stable")[:_polish_count(len(zs))]
        # warm starts are always polished
        order = list(dict.fromkeys(list(range(len(starts))) + list(order)))
        candidates = [(i, zb[i]) for i in order]
        values = screened.astype(float).copy()
    else:
        candidates = list(enumerate(zs))
        values = np.full(len(zs), -np.inf)

    best = None
    for idx, z0 in candidates:
        mismatch = 0.0
        if constraints is not None:
            z, val, ok, viol = _slsqp(obj, param, z0, constraints, max_iter, tol)
            if viol > 1e-8:
                val, ok = -np.inf, False
        elif obj.penalty is not None:
            z, val, ok, mismatch = _augmented(obj, param, z0, max_iter, tol, penalty_tol)
        else:
            z, val, ok = _lbfgs(obj, param, z0, max_iter, tol)
        values[idx] = val
        if best is None or val > best[1] + 1e-15 or (abs(val - best[1]) <= 1e-15 and idx < best[0]):
            best = (idx, val, z, ok, mismatch)
    idx, val, z, ok, mismatch = best
    return OptResult(float(val), param.psi(z), len(zs), ok, _gap_estimate(values), values, mismatch)


def _augmented(obj, param, z0, max_iter, tol, penalty_tol):
    pen = obj.penalty
    base = Penalty(pen.dims, pen.factor, pen.target, None, pen.mu)
    obj.penalty = base
    z = z0
    prev = np.inf
    mism = np.inf
    ok = False
    try:
        for _ in range(25):
            z, _, ok = _lbfgs(obj, param, z, max_iter, tol)
            psi = param.psi(z)
            sigma = np.einsum("ni,nj->ij", psi, psi.conj())
            d = base.mismatch(sigma)
            mism = float(np.abs(d).max())
            if mism < penalty_tol:
                break
            base.multiplier = base.multiplier + base.mu * d
            if mism > 0.25 * prev:
                base.mu *= 10.0
            prev = mism
        obj.penalty = None
        val = float(obj.value_grad(param.psi(z), with_grad=False)[0])
    finally:
        obj.penalty = pen
    return z, val, ok and mism < penalty_tol, mism
