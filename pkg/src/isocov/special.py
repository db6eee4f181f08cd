"""Jacobi polynomials, Gauss quadrature, and half-integer Bessel functions."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln, gammaln

from . import _accel

__all__ = [
    "QuadratureRule",
    "jacobi_eval",
    "jacobi_table",
    "jacobi_at_one",
    "jacobi_norm",
    "jacobi_explicit_sum",
    "gauss_jacobi_rule",
    "gauss_legendre",
    "theta_rule",
    "bessel_j_half_integer",
    "bessel_ratio",
    "omega_d",
    "contiguous_coeffs",
    "log_norm_denominator",
    "contiguous_pointwise_residuals",
]


def _check_params(alpha, beta):
    if not (alpha > -1 and beta > -1):
        raise ValueError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")


def jacobi_eval(n, alpha, beta, x):
    """P_n^{(alpha, beta)}(x) by the three-term recurrence.

    ``x`` may be a scalar or an array in [-1, 1].
    """
    if n < 0 or int(n) != n:
        raise ValueError("degree must be a nonnegative integer")
    _check_params(alpha, beta)
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 1e-12):
        raise ValueError("x must lie in [-1, 1]")
    val = _accel.jacobi_table_numpy(int(n), alpha, beta, xa)[int(n)]
    return float(val) if np.ndim(x) == 0 else val


def jacobi_table(n_max, alpha, beta, x):
    """Array of shape (n_max + 1, len(x)) holding P_0..P_{n_max} at x.

    No range check on x, so complex arguments (used for analytic
    continuation of Jacobi-series kernels) are accepted.
    """
    _check_params(alpha, beta)
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return _accel.jacobi_table_numpy(int(n_max), alpha, beta, x)
    flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    return _accel.jacobi_table(int(n_max), alpha, beta, flat).reshape((n_max + 1,) + x.shape)


def jacobi_explicit_sum(n, alpha, beta, x):
    """Finite-sum formula for P_n; loses accuracy quickly, test oracle only."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for k in range(n + 1):
        logc = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
                + gammaln(alpha + beta + n + k + 1) - gammaln(alpha + k + 1))
        total = total + np.exp(logc) * ((x - 1.0) / 2.0) ** k
    lead = gammaln(alpha + n + 1) - gammaln(n + 1) - gammaln(alpha + beta + n + 1)
    return np.exp(lead) * total


def jacobi_at_one(n, alpha, beta):
    """P_n^{(alpha, beta)}(1) = Gamma(n+alpha+1) / (n! Gamma(alpha+1))."""
    _check_params(alpha, beta)
    return float(np.exp(gammaln(n + alpha + 1) - gammaln(n + 1) - gammaln(alpha + 1)))


def log_norm_denominator(n, alpha, beta):
    """log of (2n+alpha+beta+1) * Gamma(n+alpha+beta+1), finite at n = 0, alpha+beta = -1."""
    if n == 0:
        return float(gammaln(alpha + beta + 2))
    return float(np.log(2 * n + alpha + beta + 1) + gammaln(n + alpha + beta + 1))


def jacobi_norm(n, alpha, beta):
    """Integral of P_n^2 (1-x)^alpha (1+x)^beta over [-1, 1]."""
    _check_params(alpha, beta)
    logv = ((alpha + beta + 1) * np.log(2.0) + gammaln(n + alpha + 1) + gammaln(n + beta + 1)
            - gammaln(n + 1) - log_norm_denominator(n, alpha, beta))
    return float(np.exp(logv))


@dataclass(frozen=True)
class QuadratureRule:
    order: int
    alpha: float
    beta: float
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Weighted sum over the leading axis of ``values``."""
        return np.tensordot(self.weights, values, axes=(0, 0))


@lru_cache(maxsize=64)
def _gauss_jacobi_cached(order, alpha, beta):
    k = np.arange(order, dtype=float)
    ab = alpha + beta
    diag = np.empty(order)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[:] = (beta**2 - alpha**2) / ((2 * k + ab) * (2 * k + ab + 2))
    diag[0] = (beta - alpha) / (ab + 2)
    kk = np.arange(1, order, dtype=float)
    off = np.empty(order - 1)
    if order > 1:
        num = 4 * kk * (kk + alpha) * (kk + beta) * (kk + ab)
        den = (2 * kk + ab) ** 2 * (2 * kk + ab + 1) * (2 * kk + ab - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            off[:] = np.sqrt(num / den)
        off[0] = np.sqrt(4 * (1 + alpha) * (1 + beta) / ((2 + ab) ** 2 * (3 + ab)))
    nodes, vecs = eigh_tridiagonal(diag, off)
    mu0 = np.exp((ab + 1) * np.log(2.0) + betaln(alpha + 1, beta + 1))
    weights = mu0 * vecs[0] ** 2
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_jacobi_rule(order, alpha, beta):
    """Gauss-Jacobi rule for weight (1-x)^alpha (1+x)^beta via Golub-Welsch."""
    if order < 1 or int(order) != order:
        raise ValueError("quadrature order must be a positive integer")
    _check_params(alpha, beta)
    nodes, weights = _gauss_jacobi_cached(int(order), float(alpha), float(beta))
    return QuadratureRule(int(order), float(alpha), float(beta), nodes, weights)


@lru_cache(maxsize=256)
def gauss_legendre(q):
    x, w = np.polynomial.legendre.leggauss(q)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def theta_rule(resolution, breakpoints=(), levels=36, lo=0.0, hi=np.pi):
    """Composite Gauss-Legendre rule on [lo, hi] for integrands of angle.

    Panels are graded geometrically toward both ends and split at
    ``breakpoints``; each panel carries enough nodes to resolve cos(resolution * t).
    """
    width = hi - lo
    edges = {lo, hi}
    for j in range(2, levels + 1):
        edges.add(lo + width * 2.0**-j)
        edges.add(hi - width * 2.0**-j)
    n_mid = max(1, int(np.ceil(resolution / 32)))
    for t in np.linspace(lo + width / 4, hi - width / 4, n_mid + 1):
        edges.add(float(t))
    for b in breakpoints:
        if lo < b < hi:
            edges.add(float(b))
    edges = np.array(sorted(edges))
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        q = 20 + int(np.ceil(resolution * (b - a) / 2))
        x, w = gauss_legendre(q)
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _half_integer_index(order):
    k = order - 0.5
    if abs(k - round(k)) > 1e-12 or round(k) < -1:
        raise ValueError(f"order must be a half-integer >= -1/2, got {order}")
    return int(round(k))


def bessel_ratio(order, z):
    """J_order(z) / z**order for half-integer order; entire, finite at z = 0."""
    k = _half_integer_index(order)
    return np.sqrt(2.0 / np.pi) * _accel.sph_ratio(k, np.abs(np.asarray(z, dtype=float)))


def bessel_j_half_integer(order, x):
    """J_order(x) for order in {-1/2, 1/2, 3/2, ...} and x > 0."""
    _half_integer_index(order)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError("x must be positive")
    val = xa**order * bessel_ratio(order, xa)
    return float(val) if np.ndim(x) == 0 else val


def omega_d(d, omega):
    """2^{d/2-1} Gamma(d/2) w^{1-d/2} J_{d/2-1}(w), equal to 1 at w = 0.

    Odd d goes through the closed half-integer forms; even d uses scipy.
    """
    if d < 1 or int(d) != d:
        raise ValueError("d must be a positive integer")
    w = np.abs(np.asarray(omega, dtype=float))
    nu = d / 2 - 1
    const = 2.0**nu * np.exp(gammaln(d / 2))
    if d % 2 == 1:
        out = const * bessel_ratio(nu, w)
    else:
        from scipy.special import jv

        with np.errstate(divide="ignore", invalid="ignore"):
            out = const * jv(nu, w) / w**nu
        small = w < 1e-6
        # three-term series of the removable singularity
        ws = w[small] if np.ndim(out) else w
        series = 1 - ws**2 / (2 * d) + ws**4 / (8 * d * (d + 2))
        if np.ndim(out):
            out[small] = series
        elif small:
            out = series
    return float(out) if np.ndim(omega) == 0 else out


def contiguous_coeffs(kind, alpha, beta, n, j):
    """Positive coefficient of P_{n+j} in the expansion of ((1-x)/2)^k P_n^{(alpha, beta)}.

    ``kind='integer-ladder'`` expands in P^{(0, beta)} with k = alpha (integer alpha);
    ``kind='half-ladder'`` expands in P^{(-1/2, beta)} with k = alpha + 1/2.
    """
    if kind == "integer-ladder":
        top = alpha
        if abs(alpha - round(alpha)) > 1e-12 or alpha < 0:
            raise ValueError("integer ladder needs a nonnegative integer alpha")
        top = int(round(alpha))
        if not 0 <= j <= top:
            raise ValueError(f"j must lie in [0, {top}]")
        logv = (gammaln(alpha + 1) + gammaln(n + alpha + 1) + np.log(2 * n + 2 * j + beta + 1)
                + gammaln(2 * n + j + beta + 1) - gammaln(j + 1) - gammaln(alpha - j + 1)
                - gammaln(n + 1) - gammaln(2 * n + j + alpha + beta + 2))
        return float(np.exp(logv))
    if kind == "half-ladder":
        if abs(alpha + 0.5 - round(alpha + 0.5)) > 1e-12 or alpha < -0.5:
            raise ValueError("half ladder needs alpha + 1/2 a nonnegative integer")
        top = int(round(alpha + 0.5))
        if not 0 <= j <= top:
            raise ValueError(f"j must lie in [0, {top}]")
        if j == 0:
            # (2n+beta+1/2) Gamma(2n+beta+1/2) = Gamma(2n+beta+3/2) survives n = 0, beta = -1/2
            log_pair = gammaln(2 * n + beta + 1.5)
        else:
            log_pair = np.log(2 * n + 2 * j + beta + 0.5) + gammaln(2 * n + j + beta + 0.5)
        logv = (gammaln(alpha + 1.5) + gammaln(n + j + 1) + gammaln(n + alpha + 1) + log_pair
                - gammaln(j + 1) - gammaln(alpha - j + 1.5) - gammaln(n + 1)
                - gammaln(n + j + 0.5) - gammaln(2 * n + j + alpha + beta + 2))
        return float(np.exp(logv))
    raise ValueError(f"unknown ladder kind {kind!r}")


def contiguous_pointwise_residuals(alpha, beta, n_max=20, x=None):
    """Max residual of each polynomial identity linking (alpha, beta) to lower parameters.

    alpha_step: (2n+a+b+1)/2 (1-x) P_n^{(a,b)} = (n+a) P_n^{(a-1,b)} - (n+1) P_{n+1}^{(a-1,b)}
    beta_step:  (2n+a+b+1)/2 (1+x) P_n^{(a,b)} = (n+b) P_n^{(a,b-1)} + (n+1) P_{n+1}^{(a,b-1)}
    integer_ladder / half_ladder: the expansions of contiguous_coeffs.
    Residuals are relative to the largest term magnitude at each degree, since
    P_n(1) grows like n^alpha.  Only identities whose lower parameters stay
    above -1 are reported.
    """
    if x is None:
        x = np.cos(np.linspace(0.05, np.pi - 0.05, 20))
    x = np.asarray(x, dtype=float)
    P = jacobi_table(n_max + 1, alpha, beta, x)
    out = {}

    def rel(lhs, *terms):
        scale = max(1.0, max(float(np.max(np.abs(t))) for t in (lhs,) + terms))
        return float(np.max(np.abs(lhs - sum(terms)))) / scale

    if alpha > 0:
        L = jacobi_table(n_max + 1, alpha - 1, beta, x)
        res = 0.0
        for n in range(n_max + 1):
            lhs = (2 * n + alpha + beta + 1) / 2 * (1 - x) * P[n]
            res = max(res, rel(lhs, (n + alpha) * L[n], -(n + 1) * L[n + 1]))
        out["alpha_step"] = res
    if beta > 0:
        L = jacobi_table(n_max + 1, alpha, beta - 1, x)
        res = 0.0
        for n in range(n_max + 1):
            lhs = (2 * n + alpha + beta + 1) / 2 * (1 + x) * P[n]
            res = max(res, rel(lhs, (n + beta) * L[n], (n + 1) * L[n + 1]))
        out["beta_step"] = res
    for kind, base, top in (("integer-ladder", 0.0, alpha), ("half-ladder", -0.5, alpha + 0.5)):
        if top < 0 or abs(top - round(top)) > 1e-12:
            continue
        top = int(round(top))
        L = jacobi_table(n_max + top, base, beta, x)
        res = 0.0
        for n in range(n_max + 1):
            terms = [(-1) ** j * contiguous_coeffs(kind, alpha, beta, n, j) * L[n + j] for j in range(top + 1)]
            res = max(res, rel(((1 - x) / 2) ** top * P[n], *terms))
        out[kind.replace("-", "_")] = res
    return out
