"""Relative-entropy curves along a segment of states.

For states ``sigma`` and ``vs`` with ``supp sigma`` inside ``supp vs``::

    f(x) = S(x sigma + (1-x) vs || vs)      g(x) = S(vs || x sigma + (1-x) vs)

Both are reported in bits. Finite differences evaluate the curves slightly
outside ``[0, 1]`` where ``x sigma + (1-x) vs`` stays positive definite on the
support of ``vs``; five-point stencils are the Richardson extrapolation of the
plain central difference at steps ``h`` and ``2h``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .channels import Channel, holevo_quantity, output_entropy, tensor_channels
from .errors import DimensionError, ParameterError, SupportError
from .spectral import density_matrix, partial_trace, relative_entropy, trace_norm
from .states import Ensemble, eigen_support

LN2 = np.log(2.0)
DEFAULT_GRID = (0.0, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
SUPPORT_TOL = 1e-10
TRANSFORM_TOL = 1e-5
QUAD_TOL = 1e-4
ENDPOINT_TOL = 1e-4
PINSKER_TOL = 1e-12
CONVEXITY_TOL = 1e-9


class _OutOfDomain(Exception):
    pass


class _Segment:
    """Curves evaluated in the eigenbasis of ``vs`` restricted to its support."""

    def __init__(self, sigma, vs):
        sigma, vs = density_matrix(sigma), density_matrix(vs)
        if sigma.shape != vs.shape:
            raise DimensionError("states must have the same dimension")
        vals, vecs = eigen_support(vs)
        s = vecs.conj().T @ sigma @ vecs
        outside = 1.0 - np.trace(s).real
        if outside > SUPPORT_TOL:
            raise SupportError(f"sigma has weight {outside:.3e} outside the support of the reference")
        self.vs_vals = vals
        self.log_vs = np.log(vals)
        self.s = 0.5 * (s + s.conj().T)
        self.delta = self.s - np.diag(vals)
        s_vals = np.linalg.eigvalsh(sigma)
        self.equal_support = int(np.sum(s_vals > SUPPORT_TOL)) == vals.size
        # omega_x is singular exactly at x = -1/mu for the eigenvalues mu of vs^-1/2 delta vs^-1/2
        r = 1.0 / np.sqrt(vals)
        mu = np.linalg.eigvalsh(r[:, None] * self.delta * r[None, :])
        self.singular = np.array([-1.0 / m for m in mu if abs(m) > 1e-300])

    def radius(self, x: float) -> float:
        """Distance from x to the nearest point where omega_x is singular."""
        return float(np.min(np.abs(self.singular - x))) if self.singular.size else np.inf

    def step(self, x: float, h: float, n: int) -> float:
        """``h`` shrunk so that a central stencil for the n-th derivative stays well inside the domain."""
        reach = max(_CENTRAL[n])
        return float(min(h, 0.05 * self.radius(x) / reach))

    def _omega(self, x, strict):
        w, u = np.linalg.eigh(np.diag(self.vs_vals) + x * self.delta)
        if strict and w.min() <= 0:
            raise _OutOfDomain(x)
        return w, u

    def f(self, x, strict=True):
        w, u = self._omega(x, strict)
        w = np.clip(w, 0.0, None)
        wlogw = np.sum(w[w > 0] * np.log(w[w > 0]))
        cross = np.einsum("i,ki,k->", w, np.abs(u) ** 2, self.log_vs)
        return float(wlogw - cross) / LN2

    def g(self, x, strict=True):
        w, u = self._omega(x, strict)
        if w.min() <= 0:
            return np.inf
        mass = np.einsum("k,ki->i", self.vs_vals, np.abs(u) ** 2)
        return float(np.sum(self.vs_vals * self.log_vs) - np.sum(mass * np.log(w))) / LN2

    def fprime(self, x):
        w, u = self._omega(x, True)
        log_w = (u * np.log(w)) @ u.conj().T
        return float(np.trace(self.delta @ (log_w - np.diag(self.log_vs))).real) / LN2


def _fd_weights(offsets, n):
    """Finite-difference weights for the n-th derivative on integer ``offsets``."""
    s = np.asarray(offsets, dtype=float)
    m = np.vander(s, increasing=True).T
    rhs = np.zeros(len(s))
    rhs[n] = float(np.prod(np.arange(1, n + 1)))
    return np.linalg.solve(m, rhs)


_CENTRAL = {1: (-2, -1, 0, 1, 2), 2: (-2, -1, 0, 1, 2), 3: (-3, -2, -1, 0, 1, 2, 3)}


def derivative(fun, x: float, n: int = 1, h: float = 1e-4) -> float:
    """n-th derivative by a fourth-order stencil; one-sided near a domain edge."""
    for offsets in (_CENTRAL[n], tuple(range(n + 4)), tuple(-k for k in range(n + 4))):
        try:
            vals = [fun(x + k * h) for k in offsets]
        except _OutOfDomain:
            continue
        return float(np.dot(_fd_weights(offsets, n), vals) / h**n)
    raise ParameterError(f"no finite-difference stencil fits the domain at x = {x}")


@dataclass
class CurvePair:
    sigma: np.ndarray
    varsigma: np.ndarray
    grid: np.ndarray
    f_samples: np.ndarray
    g_samples: np.ndarray
    equal_support: bool
    convex: bool = True

    def pinsker_constant(self) -> float:
        """``c = 1/2 ||sigma - vs||_1^2`` (the floor ``c x^2`` is in nats)."""
        return 0.5 * trace_norm(self.sigma - self.varsigma) ** 2


def _second_differences(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 3:
        return np.zeros(0)
    s = np.diff(y) / np.diff(x)
    return np.diff(s)


def sample_curves(sigma, vs, grid=None) -> CurvePair:
    """Evaluate f and g on ``grid`` with :func:`relative_entropy` and verify convexity of the samples."""
    seg = _Segment(sigma, vs)
    sigma, vs = density_matrix(sigma), density_matrix(vs)
    if grid is None:
        grid = DEFAULT_GRID + ((1.0,) if seg.equal_support else ())
    grid = np.asarray(sorted(set(float(x) for x in grid)))
    if grid.size and (grid.min() < 0 or grid.max() > 1):
        raise ParameterError("grid points must lie in [0, 1]")
    if grid.size and grid.max() == 1.0 and not seg.equal_support:
        raise ParameterError("x = 1 is only admissible when the supports are equal")
    f = np.array([relative_entropy(x * sigma + (1 - x) * vs, vs) for x in grid])
    g = np.array([relative_entropy(vs, x * sigma + (1 - x) * vs) for x in grid])
    convex = bool(all((_second_differences(grid, y) >= -CONVEXITY_TOL).all() for y in (f, g)))
    return CurvePair(sigma, vs, grid, f, g, seg.equal_support, convex)


@dataclass
class Prop5Report:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values() if c["passed"] is not None)


def _g_over_t2(seg: _Segment, t0: float = 1e-3):
    """``g(t)/t^2``; below ``t0`` the cancellation-prone ratio is replaced by its linear extrapolation."""
    if np.abs(seg.delta).max() < 1e-13:
        return lambda t: 0.0  # sigma == vs: g is roundoff only
    t0 = min(t0, 0.01 * seg.radius(0.0))
    a, b = seg.g(t0) / t0**2, seg.g(2 * t0) / (2 * t0) ** 2

    def fun(t):
        if t < t0:
            return a + (a - b) * (t0 - t) / t0
        return seg.g(t, strict=False) / t**2

    return fun


def prop5_suite(sigma, vs, grid=None) -> Prop5Report:
    """Transform, integral, endpoint, Pinsker and derivative relations between f and g.

    Each entry of ``checks`` holds the worst deviation, the tolerance and a
    ``passed`` flag (``None`` when the check does not apply).
    """
    seg = _Segment(sigma, vs)
    pair = sample_curves(sigma, vs, grid)
    xs = pair.grid
    rep = Prop5Report()

    dev = [abs(pair.g_samples[i] - (x * derivative(seg.f, x, 1, seg.step(x, 1e-4, 1)) - pair.f_samples[i])) for i, x in enumerate(xs)]
    rep.checks["transform"] = _check(max(dev, default=0.0), TRANSFORM_TOL)

    integrand = _g_over_t2(seg)
    dev = []
    for i, x in enumerate(xs):
        if x == 0:
            dev.append(abs(pair.f_samples[i]))
            continue
        val, _ = quad(integrand, 0.0, x, limit=200, epsabs=1e-12, epsrel=1e-10)
        dev.append(abs(pair.f_samples[i] - x * val))
    rep.checks["integral"] = _check(max(dev, default=0.0), QUAD_TOL)

    rep.checks["slope_at_0"] = _check(abs(derivative(seg.f, 0.0, 1, seg.step(0.0, 1e-4, 1))), ENDPOINT_TOL)

    if seg.equal_support:
        target = relative_entropy(pair.sigma, pair.varsigma) + relative_entropy(pair.varsigma, pair.sigma)
        rep.checks["slope_at_1"] = _check(abs(derivative(seg.f, 1.0, 1, seg.step(1.0, 1e-4, 1)) - target), ENDPOINT_TOL, value=target)
    else:
        rep.checks["slope_at_1"] = {"worst": None, "tol": ENDPOINT_TOL, "passed": None}

    c = pair.pinsker_constant()
    floor = c * xs**2
    margins = [np.min(y * LN2 - floor) for y in (pair.f_samples, pair.g_samples)]
    worst = float(min(margins))
    rep.checks["pinsker"] = {"worst": worst, "tol": PINSKER_TOL, "passed": worst >= -PINSKER_TOL, "c": c}

    dev = []
    for n, h in ((2, 1e-3), (3, 5e-3)):
        h = seg.step(0.0, h, n)
        dg = derivative(seg.g, 0.0, n, h)
        df = derivative(seg.f, 0.0, n, h)
        dev.append(abs(dg - (n - 1) * df) / max(1.0, abs(df)))
    rep.checks["derivatives_at_0"] = _check(max(dev), QUAD_TOL)
    rep.checks["convexity"] = {"worst": None, "tol": CONVEXITY_TOL, "passed": pair.convex}
    return rep


def _check(worst, tol, **extra):
    return {"worst": float(worst), "tol": tol, "passed": bool(worst <= tol), **extra}


def integral_of_g(sigma, vs) -> float:
    """``int_0^1 g(x) dx`` (finite even when g diverges at 1)."""
    seg = _Segment(sigma, vs)
    val, _ = quad(lambda t: seg.g(t, strict=False) if t < 1 else 0.0, 0.0, 1.0, limit=400)
    return float(val)


# ---------------------------------------------------------------------------
# the transformation f -> x f' - f
# ---------------------------------------------------------------------------


def transform(fun, x: float, h: float = 1e-4) -> float:
    """``x f'(x) - f(x)`` by finite differences."""
    return x * derivative(fun, x, 1, h) - fun(x)


def transform_power_check(alpha: float, grid=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)) -> float:
    """Largest deviation of ``T(x^alpha)`` from ``(alpha - 1) x^alpha`` over ``grid``."""

    def power(x):
        if x < 0:
            raise _OutOfDomain(x)
        return x**alpha

    return float(max(abs(transform(power, x) - (alpha - 1) * x**alpha) for x in grid))


def fixed_point_deviation(sigma, vs, x_max: float = 0.05, n: int = 10) -> float:
    """Largest ``|g - f| / f`` for ``0 < x <= x_max``; small when ``f`` is close to ``c x^2``."""
    seg = _Segment(sigma, vs)
    xs = np.linspace(x_max / n, x_max, n)
    return float(max(abs(seg.g(x) - seg.f(x)) / seg.f(x) for x in xs))


def write_curves_csv(pair: CurvePair, path) -> None:
    """Columns x, f, g, bound; all in bits (bound is ``c x^2 / ln 2``)."""
    c = pair.pinsker_constant()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "f", "g", "bound"])
        for x, f, g in zip(pair.grid, pair.f_samples, pair.g_samples):
            w.writerow([repr(float(x)), repr(float(f)), repr(float(g)), repr(float(c * x * x / LN2))])


# ---------------------------------------------------------------------------
# mixing an ensemble into the product of optimal ensembles
# ---------------------------------------------------------------------------


@dataclass
class MixtureReport:
    delta: float
    grid: np.ndarray
    h: np.ndarray
    f: np.ndarray
    max_residual: float
    fprime_at_1: float
    optimality_ok: bool = None

    @property
    def passed(self) -> bool:
        return self.max_residual <= 1e-8 and self.optimality_ok is not False


def mixture_curve(phi: Channel, psi: Channel, ens_phi: Ensemble, ens_psi: Ensemble, probe: Ensemble,
                  grid=None, optimal: bool = False, slack: float = 2e-3) -> MixtureReport:
    """Holevo quantity of ``x * probe + (1 - x) * (ens_phi x ens_psi)`` against ``x Delta - f(x)``.

    ``f`` is the curve with ``sigma = (phi x psi)(probe average)`` and reference
    ``phi(rho) x psi(varrho)``. With ``optimal=True`` (probe is the joint
    optimum) ``f'(1) <= Delta`` is checked up to ``slack``.
    """
    joint = tensor_channels(phi, psi)
    rho, varrho = ens_phi.average(), ens_psi.average()
    s_av = probe.average()
    dims = (phi.dim_in, psi.dim_in)
    if s_av.shape[0] != dims[0] * dims[1]:
        raise DimensionError("probe ensemble does not live on the joint input")
    for k, target in ((0, rho), (1, varrho)):
        if np.abs(partial_trace(s_av, dims, k) - target).max() > 1e-8:
            raise ParameterError("probe average does not have the required marginals")
    base = ens_phi.tensor(ens_psi)
    delta = (_mean_output_entropy(phi, ens_phi) + _mean_output_entropy(psi, ens_psi)
             - _mean_output_entropy(joint, probe))
    sig = joint.apply_matrix(s_av)
    ref = np.kron(phi.apply_matrix(rho), psi.apply_matrix(varrho))
    seg = _Segment(sig, ref)
    if grid is None:
        grid = np.linspace(0.0, 1.0, 11) if seg.equal_support else np.linspace(0.0, 0.99, 11)
    grid = np.asarray(grid, dtype=float)
    chi0 = holevo_quantity(joint, base)
    h = np.array([holevo_quantity(joint, base.mix(probe, x)) - chi0 for x in grid])
    f = np.array([relative_entropy(x * sig + (1 - x) * ref, ref) for x in grid])
    resid = float(np.max(np.abs(h - (grid * delta - f))))
    fp1 = derivative(seg.f, 1.0, 1, seg.step(1.0, 1e-4, 1)) if seg.equal_support else np.inf
    ok = bool(fp1 <= delta + slack) if optimal else None
    return MixtureReport(float(delta), grid, h, f, resid, float(fp1), ok)


def _mean_output_entropy(channel: Channel, ensemble: Ensemble) -> float:
    return float(sum(p * output_entropy(channel.apply(s)) for p, s in ensemble if p > 0))
