"""Gaussian vector fields on a space via the random Jacobi series

    Z(x) = sum_n B_n^{1/2} V_n P_n^{(alpha, beta)}(cos rho(x, U)),

with U uniform and V_n independent N(0, a_n^2 I_m).  Replicate r draws U and
all V_n from its own stream ``stream.split(r)``, and replicates are grouped
into fixed-size chunks, so the output does not depend on the worker count.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _accel
from .coefficients import is_psd
from .special import gauss_legendre, jacobi_at_one, jacobi_eval, log_norm_denominator
from .spaces import UnsupportedOperation, geodesic_distance, sample_uniform
from .streams import RandomStream

CHUNK = 256
TRUNCATION_TOL = 1e-3

__all__ = [
    "RandomStream", "FieldEnsemble", "a_n_coeff", "psd_sqrt", "simulate_field", "auto_truncation",
    "empirical_cov_check", "addition_formula_residual", "sphere_quadrature",
]


def a_n_coeff(alpha, beta, n):
    """Positive a_n with a_n^2 = Gamma(b+1)(2n+a+b+1)Gamma(n+a+b+1) / (Gamma(a+b+2)Gamma(n+b+1))."""
    log_sq = (gammaln(beta + 1) + log_norm_denominator(n, alpha, beta)
              - gammaln(alpha + beta + 2) - gammaln(n + beta + 1))
    return float(np.exp(0.5 * log_sq))


def psd_sqrt(M, tol=1e-10, scale=None):
    """Symmetric square root; eigenvalues down to -tol*scale are clipped to 0.

    ``scale`` defaults to the largest absolute eigenvalue of M.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, float(np.max(np.abs(M))))):
        raise ValueError("matrix must be symmetric")
    lam, Q = np.linalg.eigh(0.5 * (M + M.T))
    if scale is None:
        scale = float(np.max(np.abs(lam))) if lam.size else 0.0
    if lam.size and lam[0] < -tol * scale:
        raise ValueError(f"matrix is indefinite (min eigenvalue {lam[0]:.3e})")
    root = np.sqrt(np.clip(lam, 0.0, None))
    S = (Q * root) @ Q.T
    return 0.5 * (S + S.T)


def auto_truncation(B, alpha, beta, tol=TRUNCATION_TOL):
    """Smallest n_max with sum_{n > n_max} ||B_n|| P_n(1) < tol * sum_n ||B_n|| P_n(1)."""
    norms = np.array([np.max(np.abs(np.linalg.eigvalsh(b))) for b in B])
    w = norms * np.array([jacobi_at_one(n, alpha, beta) for n in range(len(B))])
    total = float(np.sum(w))
    if total == 0.0:
        return 0, 0.0
    tail = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
    n_max = int(np.argmax(tail < tol * total))
    return n_max, float(tail[n_max] / total)


@dataclass
class FieldEnsemble:
    space: object
    points: np.ndarray
    m: int
    replicates: int
    values: np.ndarray
    seed: int
    path: tuple
    n_max: int
    truncation_tail: float = 0.0
    metadata: dict = field(default_factory=dict)

    def meta(self):
        return {
            "space": str(self.space), "alpha": self.space.alpha, "beta": self.space.beta,
            "m": self.m, "replicates": self.replicates, "n_points": int(self.points.shape[0]),
            "seed": self.seed, "path": list(self.path), "n_max": self.n_max,
            "truncation_tail": self.truncation_tail, **self.metadata,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["replicate", "point"] + [f"z{k + 1}" for k in range(self.m)])
            for r in range(self.replicates):
                for i in range(self.points.shape[0]):
                    w.writerow([r, i] + [repr(float(v)) for v in self.values[r, i]])

    def write_metadata(self, path):
        with open(path, "w") as fh:
            json.dump(self.meta(), fh, indent=2, sort_keys=True)


def _chunk_values(space, S, a, points, stream, r0, r1, alpha, beta):
    n_terms, m = S.shape[0], S.shape[1]
    R = r1 - r0
    U = np.empty((R,) + space.point_shape)
    V = np.empty((R, n_terms, m))
    for r in range(R):
        gen = stream.split(r0 + r).generator()
        U[r] = sample_uniform(space, gen)
        V[r] = gen.standard_normal((n_terms, m)) * a[:, None]
    # W[r, n, i] = sum_j S[n, i, j] V[r, n, j], accumulated in a fixed order
    W = np.zeros((R, n_terms, m))
    for j in range(m):
        W += S[None, :, :, j] * V[:, :, None, j]
    x = np.cos(geodesic_distance(space, points[None, :], U[:, None]))
    return _accel.series_accumulate(x, W, alpha, beta)


def simulate_field(space, B_seq, points, replicates, stream, n_max=None, workers=1, chunk=CHUNK):
    """Simulate ``replicates`` independent realisations at ``points``."""
    if not space.sampleable:
        raise UnsupportedOperation(f"cannot simulate on {space}: no point model")
    B = np.asarray(B_seq, dtype=float)
    if B.ndim == 1:
        B = B[:, None, None]
    alpha, beta = space.alpha, space.beta
    tail = 0.0
    if n_max is None:
        n_max, tail = auto_truncation(B, alpha, beta)
    if n_max > B.shape[0] - 1:
        raise ValueError(f"n_max {n_max} exceeds the {B.shape[0]} coefficients supplied")
    B = B[: n_max + 1]
    scale = max(float(np.max(np.abs(np.linalg.eigvalsh(b)))) for b in B)
    for n, b in enumerate(B):
        v = is_psd(b, 1e-10, scale)
        if not v.is_psd:
            raise ValueError(f"B_{n} is indefinite (min eigenvalue {v.min_eigenvalue:.3e})")
    S = np.stack([psd_sqrt(b, 1e-10, scale) for b in B])
    a = np.array([a_n_coeff(alpha, beta, n) for n in range(n_max + 1)])
    pts = np.asarray(points, dtype=float)
    if pts.ndim == len(space.point_shape):
        pts = pts[None]
    if pts.shape[1:] != space.point_shape:
        raise ValueError(f"points must have shape (N,) + {space.point_shape}")
    if not isinstance(stream, RandomStream):
        raise TypeError("stream must be a RandomStream")
    m = B.shape[1]
    values = np.empty((replicates, pts.shape[0], m))
    bounds = [(s, min(s + chunk, replicates)) for s in range(0, replicates, chunk)]

    def run(bound):
        values[bound[0]:bound[1]] = _chunk_values(space, S, a, pts, stream, bound[0], bound[1], alpha, beta)

    if workers <= 1:
        for b in bounds:
            run(b)
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            list(ex.map(run, bounds))
    return FieldEnsemble(space, pts, m, int(replicates), values, stream.seed, stream.path, int(n_max), tail)


@dataclass
class CovarianceCheck:
    rows: list
    n_entries: int
    n_flagged: int
    multiplier: float
    max_flag_fraction: float

    @property
    def fraction_flagged(self):
        return self.n_flagged / self.n_entries if self.n_entries else 0.0

    @property
    def passed(self):
        return self.fraction_flagged <= self.max_flag_fraction

    def to_dict(self):
        return {"n_entries": self.n_entries, "n_flagged": self.n_flagged,
                "fraction_flagged": self.fraction_flagged, "multiplier": self.multiplier,
                "pass": self.passed}

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "a", "b", "rho", "empirical", "theoretical", "std_error", "flagged"])
            for row in self.rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def empirical_cov_check(ensemble, kernel, confidence_multiplier=4.0, max_flag_fraction=0.01):
    """Compare replicate-mean products Z_a(x_i) Z_b(x_j) with C(rho(x_i, x_j))_{ab}."""
    R = ensemble.replicates
    if R < 100:
        raise ValueError("at least 100 replicates are needed for a standard error")
    if kernel.m != ensemble.m:
        raise ValueError("kernel and ensemble disagree on m")
    N, m = ensemble.points.shape[0], ensemble.m
    Y = ensemble.values.reshape(R, N * m)
    mean = Y.T @ Y / R
    Y2 = Y * Y
    second = Y2.T @ Y2 / R
    var = np.clip(second - mean * mean, 0.0, None) * R / (R - 1)
    se = np.sqrt(var / R)
    rho = geodesic_distance(ensemble.space, ensemble.points[:, None], ensemble.points[None, :])
    C = np.asarray(kernel.func(rho.ravel()), dtype=float).reshape(N, N, m, m)
    rows = []
    flagged = 0
    for i in range(N):
        for j in range(i, N):
            for a in range(m):
                for b in range(a if i == j else 0, m):
                    emp = float(mean[i * m + a, j * m + b])
                    th = float(C[i, j, a, b])
                    s = float(se[i * m + a, j * m + b])
                    flag = abs(emp - th) > confidence_multiplier * s
                    flagged += flag
                    rows.append((i, j, a, b, float(rho[i, j]), emp, th, s, int(flag)))
    return CovarianceCheck(rows, len(rows), int(flagged), float(confidence_multiplier), float(max_flag_fraction))


def sphere_quadrature(order):
    """Product rule on S^2 normalized to mass 1: Gauss-Legendre in cos(polar), trapezoid in azimuth."""
    x, w = gauss_legendre(order)
    phi = 2 * np.pi * np.arange(2 * order) / (2 * order)
    ct, ph = np.meshgrid(x, phi, indexing="ij")
    st = np.sqrt(1 - ct**2)
    pts = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    wts = np.repeat(w, 2 * order) / (2 * (2 * order))
    return pts, wts


def addition_formula_residual(n, rho12, order=64):
    """Relative gap between a_n^2 E_U[P_n(cos rho(x1, U)) P_n(cos rho(x2, U))] and P_n(cos rho12) on S^2."""
    pts, wts = sphere_quadrature(order)
    x1 = np.array([0.0, 0.0, 1.0])
    x2 = np.array([np.sin(rho12), 0.0, np.cos(rho12)])
    p1 = jacobi_eval(n, 0.0, 0.0, np.clip(pts @ x1, -1, 1))
    p2 = jacobi_eval(n, 0.0, 0.0, np.clip(pts @ x2, -1, 1))
    lhs = a_n_coeff(0.0, 0.0, n) ** 2 * float(np.sum(wts * p1 * p2))
    rhs = jacobi_eval(n, 0.0, 0.0, np.cos(rho12))
    # P_n is bounded by 1 on S^2, so an absolute gap is also relative to the scale
    return abs(lhs - rhs) / max(abs(rhs), 1.0)
