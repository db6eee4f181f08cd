"""Bessel-transform checks for kernels supported on [0, pi] and the transfer to odd-dimensional spheres.

Throughout, g_(alpha)(w) = sqrt(pi)/2^{alpha+1} int_0^pi g(x) J_alpha(w x)/w^alpha x^{alpha+1} dx
with alpha a half-integer.  J_alpha(z)/z^alpha is entire, so the transform is
evaluated through that ratio and is finite at w = 0.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from . import _accel
from .coefficients import DEFAULT_TOL
from .kernels import FULL
from .spaces import REAL_PROJECTIVE, SPHERE, Space
from .special import gauss_legendre, jacobi_eval
from .validity import VALID, validate_on_space

PANEL_NODES = 64


def _half_integer(alpha, name="alpha"):
    k = alpha + 0.5
    if abs(k - round(k)) > 1e-12 or round(k) < 0:
        raise ValueError(f"{name} must be a half-integer >= -1/2, got {alpha}")
    return int(round(k))


def _as_scalar_function(g):
    if hasattr(g, "func") and hasattr(g, "m"):
        if g.m != 1:
            raise ValueError("a scalar function is required; project matrix kernels onto a direction first")
        f = g.func
        return lambda x: np.asarray(f(np.asarray(x, dtype=float)), dtype=float)[:, 0, 0]
    return lambda x: np.asarray(g(np.asarray(x, dtype=float)), dtype=float) * np.ones_like(x)


def _breakpoints(g):
    bps = tuple(getattr(g, "breakpoints", ()))
    sb = getattr(g, "support_bound", FULL)
    if sb != FULL and sb < np.pi:
        bps = bps + (sb,)
    return bps


def panel_rule(omega_max, breakpoints=(), lo=0.0, hi=np.pi):
    """Composite 64-point Gauss-Legendre rule on [lo, hi], about one panel per unit of omega."""
    n = max(8, int(np.ceil(omega_max)))
    edges = set(np.linspace(lo, hi, n + 1).tolist())
    edges.update(b for b in breakpoints if lo < b < hi)
    edges = np.array(sorted(edges))
    x0, w0 = gauss_legendre(PANEL_NODES)
    a, b = edges[:-1, None], edges[1:, None]
    x = (0.5 * (b - a) * x0 + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * w0).ravel()
    return x, w


def _transform_matrix(values_fn, alpha, omega, breakpoints, omega_rule=None):
    """Columns of values_fn(x) transformed: shape (len(omega), n_columns).

    The quadrature is sized for ``omega_rule`` (default max(omega)); pinning it
    makes separate calls use the same rule.
    """
    k = _half_integer(alpha) - 1
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(omega < 0):
        raise ValueError("omega must be nonnegative")
    if omega_rule is None:
        omega_rule = float(np.max(omega)) if omega.size else 0.0
    x, w = panel_rule(omega_rule, breakpoints)
    F = values_fn(x)
    if F.ndim == 1:
        F = F[:, None]
    F = F * (w * x ** (2 * alpha + 1))[:, None]
    # sqrt(pi)/2^{alpha+1} times sqrt(2/pi) from J_alpha(z)/z^alpha = sqrt(2/pi) j_k(z)/z^k
    const = np.sqrt(2.0) / 2.0 ** (alpha + 1)
    return const * _accel.bessel_sum(omega, x, np.ascontiguousarray(F), k)


def g_alpha_transform(g, alpha, omega, omega_rule=None):
    """g_(alpha)(omega) for a scalar function or scalar kernel g on [0, pi]."""
    f = _as_scalar_function(g)
    vals = _transform_matrix(f, alpha, omega, _breakpoints(g), omega_rule)[:, 0]
    return float(vals[0]) if np.ndim(omega) == 0 else vals


# ---------------------------------------------------------------- spectral positivity


@dataclass
class SpectralCheckResult:
    d: int
    omega_grid: list
    transform_values: list
    probes: list
    min_value: float
    max_abs: float
    tol: float
    passed: bool
    sign_change: bool
    vanishes_at_pi: bool

    def to_dict(self):
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def probe_directions(m):
    """e_i for every i, then e_i + e_j for i < j."""
    eye = np.eye(m)
    dirs = [eye[i] for i in range(m)]
    dirs += [eye[i] + eye[j] for i in range(m) for j in range(i + 1, m)]
    return np.array(dirs)


def vanishes_at_pi(kernel, rtol=1e-12):
    end = np.asarray(kernel.func(np.array([np.pi])), dtype=float)[0]
    ref = max(1.0, float(np.max(np.abs(kernel.func(np.array([0.0]))))))
    return bool(kernel.support_bound != FULL or np.max(np.abs(end)) <= rtol * ref)


def euclid_spectral_check(kernel, d, omega_max=None, grid_points=2048, tol=DEFAULT_TOL):
    """Positivity of the order-(d-2)/2 Bessel transform of a' C a for each probe direction a.

    The kernel is extended by zero beyond pi.  Values are reported in the
    normalized form g_(alpha)(omega), which differs from the plain Bessel
    integral by the positive factor omega^alpha and stays finite at 0.
    """
    if int(d) != d or d < 1 or d % 2 == 0:
        raise ValueError("d must be an odd positive integer")
    d = int(d)
    alpha = (d - 2) / 2
    if omega_max is None:
        omega_max = 40.0 * d
    if omega_max <= 0 or grid_points < 2:
        raise ValueError("need omega_max > 0 and at least two grid points")
    omega = np.linspace(0.0, float(omega_max), int(grid_points))
    dirs = probe_directions(kernel.m)

    def projected(x):
        C = np.asarray(kernel.func(x), dtype=float)
        return np.einsum("pi,qij,pj->qp", dirs, C, dirs)

    vals = _transform_matrix(projected, alpha, omega, _breakpoints(kernel))
    max_abs = float(np.max(np.abs(vals)))
    min_value = float(np.min(vals))
    passed = bool(min_value >= -tol * max_abs)
    return SpectralCheckResult(d, omega.tolist(), vals.tolist(), dirs.tolist(), min_value, max_abs, tol,
                               passed, not passed, vanishes_at_pi(kernel))


# ---------------------------------------------------------------- xi brackets


@dataclass
class XiBracket:
    n: int
    alpha: float
    beta: float
    interval: tuple
    xi: float = None
    lhs: float = 0.0
    residual: float = float("nan")
    scale: float = 0.0
    status: str = "not found"

    @property
    def found(self):
        return self.xi is not None

    def to_dict(self):
        return asdict(self)


def jacobi_moment(g, alpha, beta, n, omega_hint=None):
    """int_0^pi g(t) P_n(cos t) sin^{2a+1}(t/2) cos^{2b+1}(t/2) dt on the 64-point panel rule."""
    f = _as_scalar_function(g)
    x, w = panel_rule(max(n + 8.0, omega_hint or 0.0), _breakpoints(g))
    weight = np.sin(x / 2) ** (2 * alpha + 1) * np.cos(x / 2) ** (2 * beta + 1)
    return float(np.sum(w * f(x) * jacobi_eval(n, alpha, beta, np.cos(x)) * weight))


def xi_bracket_verify(g, alpha, beta, n, scan_points=512, tangent_tol=1e-9):
    """Locate xi in [n, n+alpha+beta+1] where the scaled Bessel transform equals the Jacobi moment."""
    _half_integer(alpha)
    _half_integer(beta, "beta")
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    n = int(n)
    lhs = jacobi_moment(g, alpha, beta, n)
    # Gamma(n+a+1)/(2^{a+1} n!) int J_a(xi x)/xi^a g x^{a+1} dx = Gamma(n+a+1)/(n! sqrt(pi)) g_(a)(xi)
    factor = float(np.exp(gammaln(n + alpha + 1) - gammaln(n + 1))) / np.sqrt(np.pi)
    lo, hi = float(n), float(n + alpha + beta + 1)

    def resid(xi):
        return factor * g_alpha_transform(g, alpha, np.atleast_1d(xi), omega_rule=hi + 8.0) - lhs

    res = XiBracket(n, alpha, beta, (lo, hi), lhs=lhs)
    if hi <= lo:
        r = float(resid(lo)[0])
        res.scale = max(abs(lhs), abs(r + lhs))
        res.xi, res.residual, res.status = lo, abs(r), "degenerate"
        return res
    grid = np.linspace(lo, hi, scan_points)
    r = resid(grid)
    res.scale = float(max(abs(lhs), np.max(np.abs(r + lhs))))
    zero = np.nonzero(r == 0.0)[0]
    change = np.nonzero(np.signbit(r[:-1]) != np.signbit(r[1:]))[0]
    if zero.size:
        res.xi, res.residual, res.status = float(grid[zero[0]]), 0.0, "root"
    elif change.size:
        i = change[0]
        xi = brentq(lambda s: float(resid(s)[0]), grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14)
        res.xi, res.residual, res.status = float(xi), abs(float(resid(xi)[0])), "root"
    else:
        j = int(np.argmin(np.abs(r)))
        if abs(r[j]) <= tangent_tol * max(res.scale, 1e-300):
            res.xi, res.residual, res.status = float(grid[j]), float(abs(r[j])), "tangential"
        else:
            res.residual = float(np.min(np.abs(r)))
    return res


def divided_difference(values):
    """Highest-order divided difference of [(node, value), ...] by the Newton table."""
    pts = list(values)
    if not pts:
        raise ValueError("need at least one node")
    x = np.array([float(p[0]) for p in pts])
    y = np.array([float(p[1]) for p in pts])
    if np.unique(x).size != x.size:
        raise ValueError("divided difference needs distinct nodes")
    for k in range(1, x.size):
        y = (y[1:] - y[:-1]) / (x[k:] - x[:-k])
    return float(y[0])


def divided_difference_moment(g, alpha, n):
    """The beta = -1/2 Jacobi moment of g rebuilt from the cosine transform h(w) = g_(-1/2)(sqrt w).

    g_n = (-1)^{a+1/2} (a+1/2)! D[n^2, ..., (n+a+1/2)^2] h, then
    h_n = Gamma(n+a+1)/(n! sqrt(pi)) g_n.
    """
    k = _half_integer(alpha)
    nodes = np.arange(n, n + k + 1, dtype=float)
    hv = g_alpha_transform(g, -0.5, nodes)
    dd = divided_difference(list(zip(nodes**2, hv)))
    gn = (-1) ** k * float(np.exp(gammaln(k + 1))) * dd
    return float(np.exp(gammaln(n + alpha + 1) - gammaln(n + 1))) / np.sqrt(np.pi) * gn


# ---------------------------------------------------------------- transfer to S^d, P^d(R)


@dataclass
class EuclidTransferResult:
    d: int
    spectral: SpectralCheckResult
    sphere: object = None
    projective: object = None
    claim_applies: bool = False
    claim_holds: bool = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "d": self.d,
            "spectral_pass": self.spectral.passed,
            "spectral_min": self.spectral.min_value,
            "sphere": self.sphere.to_dict() if self.sphere else None,
            "projective": self.projective.to_dict() if self.projective else None,
            "claim_applies": self.claim_applies,
            "claim_holds": self.claim_holds,
            "notes": self.notes,
        }


def euclid_to_sphere_validate(kernel, d, n_max=40, tol=DEFAULT_TOL, omega_max=None):
    """Spectral check in R^d, then validation on S^d and (d >= 3) P^d(R).

    When the spectral check passes and the kernel vanishes at pi, both
    validations are expected to come out valid; ``claim_holds`` records
    whether they did.
    """
    if int(d) != d or d < 1 or d % 2 == 0:
        raise ValueError("d must be an odd positive integer")
    d = int(d)
    spec = euclid_spectral_check(kernel, d, omega_max, tol=tol)
    out = EuclidTransferResult(d, spec)
    if not spec.passed:
        out.notes.append("spectral check failed; no transfer claim")
        return out
    out.sphere = validate_on_space(kernel, Space(SPHERE, d), n_max, tol)
    if d >= 3:
        out.projective = validate_on_space(kernel, Space(REAL_PROJECTIVE, d), n_max, tol)
    else:
        out.notes.append("P^1(R) is not a space of the family; only S^1 checked")
    out.claim_applies = spec.vanishes_at_pi
    if not out.claim_applies:
        out.notes.append("kernel does not vanish at pi; its zero extension is discontinuous")
    reports = [r for r in (out.sphere, out.projective) if r is not None]
    if out.claim_applies:
        out.claim_holds = all(r.verdict == VALID for r in reports)
    return out
