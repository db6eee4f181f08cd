"""Jacobi coefficient matrices H_n of a kernel and the H <-> B conversion."""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .kernels import jacobi_series_kernel
from .special import contiguous_coeffs, gauss_jacobi_rule, jacobi_table, log_norm_denominator, theta_rule

DEFAULT_TOL = 1e-9


def default_quad_order(n_max):
    return max(64, 2 * int(n_max) + 16)


@dataclass
class CoefficientSequence:
    alpha: float
    beta: float
    m: int
    H: np.ndarray
    B: np.ndarray
    quad_order: int
    method: str = "theta"

    @property
    def n_max(self):
        return self.H.shape[0] - 1

    @property
    def scale(self):
        """Largest spectral norm among the H_n (0 for the zero sequence)."""
        if self.H.size == 0:
            return 0.0
        return float(max(np.max(np.abs(np.linalg.eigvalsh(h))) for h in self.H))

    def to_dict(self):
        return {
            "alpha": self.alpha, "beta": self.beta, "m": self.m, "n_max": self.n_max,
            "quad_order": self.quad_order, "method": self.method,
            "H": self.H.tolist(), "B": self.B.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        H = np.asarray(d["H"], dtype=float)
        B = np.asarray(d["B"], dtype=float)
        return cls(float(d["alpha"]), float(d["beta"]), int(d["m"]), H, B, int(d["quad_order"]),
                   d.get("method", "theta"))

    def to_json(self):
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_eigenvalue: float
    scale: float


def conversion_factor(n, alpha, beta):
    """n! (2n+a+b+1) Gamma(n+a+b+1) / (Gamma(n+a+1) Gamma(n+b+1)), finite at n = 0, a+b = -1."""
    return float(np.exp(gammaln(n + 1) + log_norm_denominator(n, alpha, beta)
                        - gammaln(n + alpha + 1) - gammaln(n + beta + 1)))


def h_to_b(H_n, alpha, beta, n):
    return conversion_factor(n, alpha, beta) * np.asarray(H_n, dtype=float)


def b_to_h(B_n, alpha, beta, n):
    return np.asarray(B_n, dtype=float) / conversion_factor(n, alpha, beta)


def _sym(M):
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def _theta_nodes(kernel, alpha, beta, quad_order):
    bps = tuple(kernel.breakpoints)
    if kernel.compact and kernel.support_bound < np.pi:
        bps = bps + (kernel.support_bound,)
    t, w = theta_rule(quad_order, bps)
    w = w * np.sin(t / 2) ** (2 * alpha + 1) * np.cos(t / 2) ** (2 * beta + 1)
    return t, w


def compute_H(kernel, alpha, beta, n_max, quad_order=None, method="auto"):
    """H_n = int_0^pi C(t) P_n(cos t) sin^{2a+1}(t/2) cos^{2b+1}(t/2) dt for n = 0..n_max.

    method 'theta' uses a composite Gauss-Legendre rule in the angle, graded
    toward both ends and split at kernel breakpoints; it handles kernels with
    square-root type behaviour at the ends and needs alpha, beta >= -1/2.
    method 'gauss-jacobi' integrates in u = cos t against the Jacobi weight
    and covers any alpha, beta > -1.  'auto' picks 'theta' when it applies.
    """
    if n_max < 0 or int(n_max) != n_max:
        raise ValueError("n_max must be a nonnegative integer")
    n_max = int(n_max)
    if quad_order is None:
        quad_order = default_quad_order(n_max)
    if quad_order < n_max:
        raise ValueError(f"quad_order {quad_order} < n_max {n_max}: coefficients would alias")
    if method == "auto":
        method = "theta" if alpha >= -0.5 and beta >= -0.5 else "gauss-jacobi"
    if method == "theta":
        if alpha < -0.5 or beta < -0.5:
            raise ValueError("theta quadrature needs alpha, beta >= -1/2")
        t, w = _theta_nodes(kernel, alpha, beta, quad_order)
        u = np.cos(t)
    elif method == "gauss-jacobi":
        rule = gauss_jacobi_rule(int(quad_order), alpha, beta)
        u = rule.nodes
        t = np.arccos(u)
        w = rule.weights * 2.0 ** -(alpha + beta + 1)
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    C = np.asarray(kernel.func(t), dtype=float)
    if not np.all(np.isfinite(C)):
        raise FloatingPointError("kernel evaluation produced non-finite values")
    P = jacobi_table(n_max, alpha, beta, u)
    H = _sym(np.einsum("nq,qij->nij", P * w, C))
    B = np.stack([h_to_b(H[n], alpha, beta, n) for n in range(n_max + 1)])
    return CoefficientSequence(float(alpha), float(beta), kernel.m, H, B, int(quad_order), method)


def sequence_from_B(B, alpha, beta, quad_order=0):
    B = _sym(np.asarray(B, dtype=float))
    if B.ndim == 1:
        B = B[:, None, None]
    H = np.stack([b_to_h(B[n], alpha, beta, n) for n in range(B.shape[0])])
    return CoefficientSequence(float(alpha), float(beta), B.shape[1], H, B, quad_order, "exact")


def reconstruct_kernel(seq):
    return jacobi_series_kernel(seq.alpha, seq.beta, seq.B)


def is_psd(M, tol=DEFAULT_TOL, scale=None):
    """Nonnegative-definiteness test: min eigenvalue >= -tol * max(scale, 1).

    ``scale`` defaults to the largest absolute eigenvalue of M; callers
    testing a whole sequence pass a common scale.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    mag = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * mag):
        raise ValueError("matrix must be symmetric")
    ev = np.linalg.eigvalsh(_sym(M))
    own = float(np.max(np.abs(ev)))
    s = own if scale is None else float(scale)
    lam = float(ev[0])
    return PsdVerdict(bool(lam >= -tol * max(s, 1.0)), lam, own)


@dataclass
class TailDiagnostic:
    partial_sums: list
    ratio: float
    warning: bool


def tail_diagnostic(seq, threshold=0.5):
    """Partial sums of n^{alpha+1} ||H_n|| and a non-decay flag.

    The flag is raised when the increments over the last quarter of the
    indices sum to more than ``threshold`` times those over the first quarter.
    """
    n = np.arange(seq.n_max + 1, dtype=float)
    norms = np.array([np.max(np.abs(np.linalg.eigvalsh(h))) if h.size else 0.0 for h in seq.H])
    terms = n ** (seq.alpha + 1) * norms
    q = max(1, (seq.n_max + 1) // 4)
    first = float(np.sum(terms[:q]))
    last = float(np.sum(terms[-q:]))
    if first == 0.0:
        ratio = 0.0 if last == 0.0 else np.inf
    else:
        ratio = last / first
    return TailDiagnostic(np.cumsum(terms).tolist(), float(ratio), bool(ratio > threshold))


@dataclass
class IdentityResidual:
    identity: str
    residual: float
    scale: float
    tol: float
    ok: bool = field(init=False)

    def __post_init__(self):
        self.ok = bool(self.residual <= self.tol * max(self.scale, 1e-300) or self.residual == 0.0)


IDENTITIES = ("alpha_step", "beta_step", "integer_ladder", "half_ladder")


def applicable_identities(alpha, beta):
    out = []
    if alpha > 0:
        out.append("alpha_step")
    if beta > 0:
        out.append("beta_step")
    if alpha >= 0 and abs(alpha - round(alpha)) < 1e-12:
        out.append("integer_ladder")
    if alpha >= -0.5 and abs(alpha + 0.5 - round(alpha + 0.5)) < 1e-12:
        out.append("half_ladder")
    return out


def identity_checks(kernel, alpha, beta, n_max=20, identities=None, tol=DEFAULT_TOL, quad_order=None):
    """Residuals of the coefficient identities linking H^{(alpha, beta)} to lower parameters.

    Both sides come from compute_H on different weights, so each identity
    exercises two independent quadratures.
    """
    avail = applicable_identities(alpha, beta)
    if identities is None:
        identities = avail
    for name in identities:
        if name not in IDENTITIES:
            raise ValueError(f"unknown identity {name!r}")
        if name not in avail:
            raise ValueError(f"identity {name!r} does not apply to (alpha, beta) = ({alpha}, {beta})")
    top = int(round(alpha + 0.5)) if "half_ladder" in identities else 1
    if "integer_ladder" in identities:
        top = max(top, int(round(alpha)))
    n_low = n_max + max(top, 1)
    qo = quad_order or default_quad_order(n_low)
    target = compute_H(kernel, alpha, beta, n_max, qo).H
    out = []
    for name in identities:
        if name == "alpha_step":
            low = compute_H(kernel, alpha - 1, beta, n_max + 1, qo).H
            rhs = np.stack([((n + alpha) * low[n] - (n + 1) * low[n + 1]) / (2 * n + alpha + beta + 1)
                            for n in range(n_max + 1)])
        elif name == "beta_step":
            low = compute_H(kernel, alpha, beta - 1, n_max + 1, qo).H
            rhs = np.stack([((n + beta) * low[n] + (n + 1) * low[n + 1]) / (2 * n + alpha + beta + 1)
                            for n in range(n_max + 1)])
        else:
            kind, base = ("integer-ladder", 0.0) if name == "integer_ladder" else ("half-ladder", -0.5)
            k = int(round(alpha)) if name == "integer_ladder" else int(round(alpha + 0.5))
            low = compute_H(kernel, base, beta, n_max + k, qo).H
            rhs = np.stack([sum((-1) ** j * contiguous_coeffs(kind, alpha, beta, n, j) * low[n + j]
                                for j in range(k + 1)) for n in range(n_max + 1)])
        scale = float(max(np.max(np.abs(target)), np.max(np.abs(low))))
        res = float(np.max(np.abs(target - rhs)))
        out.append(IdentityResidual(name, res, scale, tol))
    return out


def cosine_coefficients(kernel, n_max, quad_order=None):
    """int_0^pi C(t) cos(n t) dt, n = 0..n_max, on the same angle rule."""
    qo = quad_order or default_quad_order(n_max)
    t, w = _theta_nodes(kernel, -0.5, -0.5, qo)
    C = kernel.func(t)
    return np.einsum("q,nq,qij->nij", w, np.cos(np.outer(np.arange(n_max + 1), t)), C)
