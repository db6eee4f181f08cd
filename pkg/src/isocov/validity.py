"""Validity decisions on a single space and on all spaces at once."""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .coefficients import DEFAULT_TOL, compute_H, is_psd, tail_diagnostic
from .kernels import FULL, MatrixKernel
from .spaces import parse_space

M_INFINITY = "M_infinity"
MINF_DEGREE_CAP = 30

VALID, INVALID, INCONCLUSIVE = "valid", "invalid", "inconclusive"


@dataclass
class ValidityReport:
    verdict: str
    space: str
    n_max: int
    tol: float
    scale: float
    first_failure: dict = None
    tail_warning: bool = False
    trace: list = field(default_factory=list)
    label: str = ""
    details: dict = field(default_factory=dict)

    @property
    def valid(self):
        return self.verdict == VALID

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), default=_default)


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _space(space):
    return parse_space(space) if isinstance(space, str) else space


def validate_on_space(kernel, space, n_max=40, tol=DEFAULT_TOL, quad_order=None):
    """Test every H_n, n <= n_max, for nonnegative definiteness on one space."""
    space = _space(space)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    try:
        with np.errstate(all="raise"):
            seq = compute_H(kernel, space.alpha, space.beta, n_max, quad_order)
    except (FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        return ValidityReport(INCONCLUSIVE, str(space), n_max, tol, float("nan"),
                              details={"error": f"kernel evaluation failed: {exc}"})
    scale = seq.scale
    trace_h, trace_b = [], []
    first = None
    for n in range(n_max + 1):
        v = is_psd(seq.H[n], tol, scale)
        trace_h.append(v.min_eigenvalue)
        trace_b.append(float(np.linalg.eigvalsh(seq.B[n])[0]))
        if not v.is_psd and first is None:
            first = {"n": n, "min_eigenvalue": v.min_eigenvalue, "min_eigenvalue_B": trace_b[-1]}
    tail = tail_diagnostic(seq)
    return ValidityReport(
        INVALID if first else VALID, str(space), n_max, tol, scale, first, tail.warning, trace_h,
        label=f"checked n <= {n_max}",
        details={"alpha": space.alpha, "beta": space.beta, "quad_order": seq.quad_order,
                 "method": seq.method, "trace_B": trace_b, "tail_ratio": tail.ratio},
    )


# ---------------------------------------------------------------- all spaces at once


def _contour_coeffs(kernel, N, radius, points):
    k = np.arange(points)
    z = radius * np.exp(2j * np.pi * k / points)
    vals = kernel.eval_complex(np.pi - 2 * np.arcsin(z))
    c = np.fft.fft(vals, axis=0)[: N + 1] / points
    c = c / radius ** np.arange(N + 1)[:, None, None]
    return c.real


def _chebyshev_coeffs(kernel, N):
    from numpy.polynomial import chebyshev as cheb
    from scipy.fft import dct

    if N == 0:
        return np.asarray(kernel.func(np.array([np.pi])), dtype=float)
    x = np.cos(np.pi * np.arange(N + 1) / N)
    # even extension through |x|
    vals = np.asarray(kernel.func(np.pi - 2 * np.arcsin(np.abs(x))), dtype=float)
    # interpolant at the extrema: a DCT-I of the samples
    ch = dct(vals, type=1, axis=0) / N
    ch[0] /= 2
    ch[N] /= 2
    m = kernel.m
    out = np.empty((N + 1, m, m))
    for i in range(m):
        for j in range(m):
            poly = cheb.cheb2poly(ch[:, i, j])
            out[:, i, j] = 0.0
            out[: poly.size, i, j] = poly
    return out


def minf_series_coeffs(kernel, N, method="auto", radius=0.8, points=512):
    """Maclaurin coefficients of g(x) = C(pi - 2 arcsin x) up to degree N, shape (N+1, m, m).

    'contour' reads them off a discrete Cauchy integral on |x| = radius and
    needs a kernel with an analytic continuation.  'chebyshev' interpolates
    the even extension g(|x|) at N+1 Chebyshev extrema and converts to the
    monomial basis; it cannot see odd coefficients and converges slowly for
    kernels that are not smooth in x.
    """
    if int(N) != N or N < 0:
        raise ValueError("degree must be a nonnegative integer")
    if N > MINF_DEGREE_CAP:
        raise ValueError(f"degree {N} exceeds the cap {MINF_DEGREE_CAP}")
    if method == "auto":
        method = "contour" if kernel.analytic else "chebyshev"
    if method == "contour":
        if points < 2 * (N + 1):
            raise ValueError("too few contour points for the requested degree")
        return _contour_coeffs(kernel, int(N), radius, points)
    if method == "chebyshev":
        return _chebyshev_coeffs(kernel, int(N))
    raise ValueError(f"unknown method {method!r}")


def validate_minf(kernel, N=MINF_DEGREE_CAP, tol=DEFAULT_TOL, method="auto"):
    """Valid iff odd coefficients vanish and even ones are nonnegative definite (degrees <= N)."""
    if method == "auto":
        method = "contour" if kernel.analytic else "chebyshev"
    coeffs = minf_series_coeffs(kernel, N, method)
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    thresh = tol * scale
    first = None
    trace = []
    for deg in range(N + 1):
        c = 0.5 * (coeffs[deg] + coeffs[deg].T)
        if deg % 2:
            mag = float(np.max(np.abs(c)))
            trace.append(-mag)
            if mag > thresh and first is None:
                first = {"n": deg, "kind": "odd", "max_abs": mag}
        else:
            lam = float(np.linalg.eigvalsh(c)[0])
            trace.append(lam)
            if lam < -thresh and first is None:
                first = {"n": deg, "kind": "even", "min_eigenvalue": lam}
    mags = np.max(np.abs(coeffs), axis=(1, 2))
    q = max(1, (N + 1) // 4)
    head = float(np.sum(mags[:q]))
    ratio = float(np.sum(mags[-q:]) / head) if head > 0 else 0.0
    B = [(coeffs[2 * n] / 2.0**n).tolist() for n in range(N // 2 + 1)]
    return ValidityReport(
        INVALID if first else VALID, M_INFINITY, int(N), tol, scale, first, ratio > 0.5, trace,
        label=f"valid up to degree {N}" if not first else f"invalid at degree {first['n']}",
        details={"method": method, "coefficients": coeffs.tolist(), "B": B, "tail_ratio": ratio},
    )


def corollary_checks(kernel, grid_points=50, tol=DEFAULT_TOL):
    """Pointwise consequences of validity on all spaces.

    Returns the smallest eigenvalue of C(t) over the grid and of
    C(t1) - C(t2) over grid pairs t1 <= t2, both relative to max |C|.
    """
    t = np.linspace(0, np.pi, grid_points)
    C = np.asarray(kernel.func(t), dtype=float)
    scale = max(float(np.max(np.abs(C))), 1e-300)
    pointwise = float(np.min(np.linalg.eigvalsh(C)))
    i, j = np.triu_indices(grid_points, 1)
    diffs = C[i] - C[j]
    monotone = float(np.min(np.linalg.eigvalsh(diffs))) if diffs.size else 0.0
    return {"pointwise_min": pointwise / scale, "monotone_min": monotone / scale,
            "ok": pointwise >= -tol * scale and monotone >= -tol * scale}


# ---------------------------------------------------------------- transfers


def projective_constructions(kernel):
    """(K+, K-) with K+(r) = C(r/2) + C(pi - r/2) and K-(r) = (C(r/2) - C(pi - r/2)) cos(r/2)."""
    base = kernel.func
    bps = set()
    for b in kernel.breakpoints + ((kernel.support_bound,) if kernel.support_bound != FULL else ()):
        for r in (2 * b, 2 * (np.pi - b)):
            if 0 < r < np.pi:
                bps.add(float(r))
    bps = tuple(sorted(bps))

    def plus(r):
        return base(r / 2) + base(np.pi - r / 2)

    def minus(r):
        return (base(r / 2) - base(np.pi - r / 2)) * np.cos(r / 2)[:, None, None]

    mk = lambda f, tag: MatrixKernel(kernel.m, f, family=tag, params={"base": kernel.family},
                                     breakpoints=bps, analytic=kernel.analytic)
    return mk(plus, "projective_plus"), mk(minus, "projective_minus")


# (source, target) pairs at the test dimensions
TRANSFER_PAIRS = (("PR:3", "S:3"), ("PR:4", "S:3"), ("PC:4", "S:4"), ("PC:8", "PH:8"), ("PH:8", "S:8"))


@dataclass
class TransferRecord:
    source: str
    target: str
    source_verdict: str
    target_verdict: str
    holds: bool


def transfer_implications(kernel, n_max=40, tol=DEFAULT_TOL, pairs=TRANSFER_PAIRS):
    """Validate each side of every transfer pair independently; record whether the implication holds."""
    cache = {}

    def verdict(sp):
        if sp not in cache:
            cache[sp] = validate_on_space(kernel, sp, n_max, tol).verdict
        return cache[sp]

    out = []
    for src, tgt in pairs:
        sv, tv = verdict(src), verdict(tgt)
        out.append(TransferRecord(src, tgt, sv, tv, not (sv == VALID and tv != VALID)))
    return out

