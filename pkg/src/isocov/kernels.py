"""Matrix kernels C(theta) on [0, pi] and the built-in families.

A kernel's ``func`` maps a 1-D array of angles to an array of shape
(T, m, m).  Kernels flagged ``analytic`` also accept complex angles, which
is what the series test on the union of all spaces uses to read off Taylor
coefficients by a contour integral.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .special import gauss_jacobi_rule, jacobi_at_one, jacobi_norm, jacobi_table, log_norm_denominator

FULL = "full"
_EDGE_TOL = 1e-12


class KernelSpecError(ValueError):
    pass


@dataclass(frozen=True)
class MatrixKernel:
    m: int
    func: object = field(repr=False, compare=False)
    support_bound: object = FULL
    family: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    breakpoints: tuple = ()
    analytic: bool = False

    def __call__(self, theta):
        return eval_kernel(self, theta)

    @property
    def compact(self):
        return self.support_bound != FULL

    def eval_complex(self, theta):
        if not self.analytic:
            raise ValueError(f"kernel family {self.family!r} has no analytic continuation")
        t = np.atleast_1d(np.asarray(theta, dtype=complex))
        return self.func(t)


@dataclass
class KernelSpec:
    family: str
    params: dict = field(default_factory=dict)
    csv_path: str = None

    def to_dict(self):
        out = {"family": self.family, "params": _jsonable(self.params)}
        if self.csv_path is not None:
            out["csv"] = self.csv_path
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "family" not in data:
            raise KernelSpecError("kernel spec must be an object with a 'family' field")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise KernelSpecError("'params' must be an object")
        return cls(str(data["family"]), dict(params), data.get("csv"))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise KernelSpecError(f"kernel spec is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def eval_kernel(kernel, theta):
    """C(theta) as an (m, m) matrix, or (T, m, m) for array input."""
    t = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < -_EDGE_TOL) or np.any(t > np.pi + _EDGE_TOL):
        raise ValueError("theta must lie in [0, pi]")
    t = np.clip(t, 0.0, np.pi)
    vals = np.asarray(kernel.func(np.atleast_1d(t).ravel()), dtype=float)
    if t.ndim == 0:
        return vals[0]
    return vals.reshape(t.shape + (kernel.m, kernel.m))


# ---------------------------------------------------------------- parameters


def _matrix(value, name, m=None):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise KernelSpecError(f"parameter {name!r} is not numeric") from None
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise KernelSpecError(f"parameter {name!r} must be a square matrix")
    if not np.allclose(arr, arr.T, rtol=0, atol=1e-12 * max(1.0, np.abs(arr).max())):
        raise KernelSpecError(f"parameter {name!r} must be symmetric")
    if m is not None and arr.shape[0] != m:
        raise KernelSpecError(f"parameter {name!r} has size {arr.shape[0]}, expected {m}")
    return 0.5 * (arr + arr.T)


def _real(params, name, default=None):
    if name not in params:
        if default is None:
            raise KernelSpecError(f"missing parameter {name!r}")
        return float(default)
    try:
        val = float(params[name])
    except (TypeError, ValueError):
        raise KernelSpecError(f"parameter {name!r} must be a number") from None
    if not np.isfinite(val):
        raise KernelSpecError(f"parameter {name!r} must be finite")
    return val


def _lincomb(t, mats, fns):
    """sum_k fns[k](t)[:, None, None] * mats[k]."""
    dtype = complex if np.iscomplexobj(t) else float
    out = np.zeros((t.shape[0],) + mats[0].shape, dtype=dtype)
    for mat, fn in zip(mats, fns):
        out += fn(t)[:, None, None] * mat
    return out


def _compact_cut(t, support, vals):
    if np.iscomplexobj(t):
        return vals
    return np.where((t <= support)[:, None, None], vals, 0.0)


# ---------------------------------------------------------------- families


def constant_kernel(c):
    c = _matrix(c, "c")
    return MatrixKernel(c.shape[0], lambda t: np.broadcast_to(c, (t.shape[0],) + c.shape).astype(t.dtype),
                        family="constant", params={"c": c.tolist()}, analytic=True)


def polynomial_kernel(B0, B1, B2):
    """B0 + B1 theta + B2 theta^2."""
    B0 = _matrix(B0, "B0")
    B1 = _matrix(B1, "B1", B0.shape[0])
    B2 = _matrix(B2, "B2", B0.shape[0])

    def f(t):
        return _lincomb(t, [B0, B1, B2], [np.ones_like, lambda s: s, lambda s: s * s])

    return MatrixKernel(B0.shape[0], f, family="polynomial",
                        params={"B0": B0.tolist(), "B1": B1.tolist(), "B2": B2.tolist()}, analytic=True)


def exp_pair_kernel(B1, B2):
    """B1 exp(theta/2) + B2 exp(-theta/2)."""
    B1 = _matrix(B1, "B1")
    B2 = _matrix(B2, "B2", B1.shape[0])

    def f(t):
        return _lincomb(t, [B1, B2], [lambda s: np.exp(s / 2), lambda s: np.exp(-s / 2)])

    return MatrixKernel(B1.shape[0], f, family="exp_pair",
                        params={"B1": B1.tolist(), "B2": B2.tolist()}, analytic=True)


def cosh_cos_kernel(B):
    """Entries exp(b_ij cos(theta/2)) + exp(-b_ij cos(theta/2))."""
    B = _matrix(B, "B")

    def f(t):
        c = np.cos(t / 2)[:, None, None] * B
        return np.exp(c) + np.exp(-c)

    return MatrixKernel(B.shape[0], f, family="cosh_cos", params={"B": B.tolist()}, analytic=True)


def powered_sine_kernel(nu):
    """Entries 1 - sin(theta/2)^max(nu_i, nu_j), each nu_i in (0, 2]."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if nu.ndim != 1 or nu.size == 0:
        raise KernelSpecError("nu must be a number or a list of numbers")
    if np.any(~(nu > 0)) or np.any(nu > 2):
        raise KernelSpecError("each nu must lie in (0, 2]")
    expo = np.maximum.outer(nu, nu)

    def f(t):
        s = np.sin(t / 2)
        if not np.iscomplexobj(t):
            s = np.maximum(s, 0.0)
        return 1.0 - s[:, None, None] ** expo

    return MatrixKernel(nu.size, f, family="powered_sine", params={"nu": nu.tolist()}, analytic=True)


def power_kernel(n, scale=1.0):
    """scale * ((1 + cos theta) / 2)^n."""
    if int(n) != n or n < 0:
        raise KernelSpecError("power kernel needs a nonnegative integer n")
    n = int(n)

    def f(t):
        return (scale * np.cos(t / 2) ** (2 * n))[:, None, None]

    return MatrixKernel(1, f, family="power", params={"n": n, "scale": scale}, analytic=True)


def jacobi_series_kernel(alpha, beta, B):
    """sum_n B_n P_n^{(alpha, beta)}(cos theta)."""
    mats = [np.atleast_2d(np.asarray(b, dtype=float)) for b in B]
    if not mats:
        raise KernelSpecError("jacobi_series needs at least one coefficient")
    m = mats[0].shape[0]
    mats = [_matrix(b, f"B[{i}]", m) for i, b in enumerate(mats)]
    W = np.stack(mats)
    n_max = len(mats) - 1

    def f(t):
        P = jacobi_table(n_max, alpha, beta, np.cos(t))
        return np.tensordot(P.T, W, axes=(1, 0))

    return MatrixKernel(m, f, family="jacobi_series",
                        params={"alpha": alpha, "beta": beta, "B": W.tolist()}, analytic=True)


def exponential_kernel(rate, sill=1.0):
    """sill * exp(-rate * theta)."""
    def f(t):
        return (sill * np.exp(-rate * t))[:, None, None]

    return MatrixKernel(1, f, family="exponential", params={"rate": rate, "sill": sill}, analytic=True)


def cosine_kernel(k, sill=1.0):
    """sill * cos(k theta)."""
    def f(t):
        return (sill * np.cos(k * t))[:, None, None]

    return MatrixKernel(1, f, family="cosine", params={"k": k, "sill": sill}, analytic=True)


def _check_support(support):
    if not 0 < support <= np.pi + _EDGE_TOL:
        raise KernelSpecError("support must lie in (0, pi]")
    return min(float(support), np.pi)


def triangle_kernel(support=np.pi, sill=1.0):
    """sill * max(1 - theta/support, 0)."""
    a = _check_support(support)

    def f(t):
        return _compact_cut(t, a, (sill * (1 - t / a))[:, None, None])

    full = a >= np.pi
    return MatrixKernel(1, f, support_bound=a, family="triangle", params={"support": a, "sill": sill},
                        breakpoints=() if full else (a,), analytic=full)


def spherical_kernel(support=np.pi, sill=1.0):
    """sill * (1 - 1.5 r + 0.5 r^3) with r = theta/support, zero beyond."""
    a = _check_support(support)

    def f(t):
        r = t / a
        return _compact_cut(t, a, (sill * (1 - 1.5 * r + 0.5 * r**3))[:, None, None])

    full = a >= np.pi
    return MatrixKernel(1, f, support_bound=a, family="spherical", params={"support": a, "sill": sill},
                        breakpoints=() if full else (a,), analytic=full)


def tabulated_kernel(theta, values):
    """Piecewise-linear interpolation of (theta_k, C(theta_k)).

    ``values`` has shape (T, m, m).
    """
    theta = np.asarray(theta, dtype=float)
    values = np.asarray(values, dtype=float)
    if theta.ndim != 1 or theta.size < 2:
        raise KernelSpecError("tabulated kernel needs at least two grid points")
    if np.any(np.diff(theta) <= 0):
        raise KernelSpecError("tabulated theta must be strictly increasing")
    if abs(theta[0]) > 1e-9 or abs(theta[-1] - np.pi) > 1e-9:
        raise KernelSpecError("tabulated theta must run from 0 to pi")
    theta = theta.copy()
    theta[0], theta[-1] = 0.0, np.pi
    m = values.shape[1]
    flat = values.reshape(theta.size, m * m)

    def f(t):
        out = np.empty((t.shape[0], m * m))
        for k in range(m * m):
            out[:, k] = np.interp(t, theta, flat[:, k])
        return out.reshape(t.shape[0], m, m)

    zero_tail = np.all(values[-1] == 0)
    support = FULL
    if zero_tail:
        nz = np.nonzero(np.any(flat != 0, axis=1))[0]
        support = float(theta[nz[-1] + 1]) if nz.size else float(theta[1])
    return MatrixKernel(m, f, support_bound=support, family="tabulated",
                        params={"theta": theta.tolist(), "values": values.tolist()},
                        breakpoints=tuple(theta[1:-1].tolist()))


def read_tabulated_csv(path):
    """Read a kernel table with header theta,c11,c12,...,c1m,c22,...,cmm."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise KernelSpecError(f"cannot read kernel table: {exc}") from None
    if len(rows) < 3 or rows[0][0].strip().lower() != "theta":
        raise KernelSpecError("kernel table must start with a 'theta,...' header row")
    n_entries = len(rows[0]) - 1
    m = int(round((np.sqrt(8 * n_entries + 1) - 1) / 2))
    if m < 1 or m * (m + 1) // 2 != n_entries:
        raise KernelSpecError("kernel table must hold the upper triangle of a square matrix")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError:
        raise KernelSpecError("kernel table contains non-numeric entries") from None
    if data.shape[1] != n_entries + 1:
        raise KernelSpecError("kernel table rows have inconsistent lengths")
    iu = np.triu_indices(m)
    values = np.zeros((data.shape[0], m, m))
    values[:, iu[0], iu[1]] = data[:, 1:]
    values[:, iu[1], iu[0]] = data[:, 1:]
    return data[:, 0], values


def write_tabulated_csv(path, theta, values):
    values = np.asarray(values, dtype=float)
    m = values.shape[1]
    iu = np.triu_indices(m)
    header = ["theta"] + [f"c{i + 1}{j + 1}" for i, j in zip(*iu)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t, v in zip(theta, values):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in v[iu]])


def hadamard_power(kernel, ell):
    """Entrywise ell-th power."""
    if int(ell) != ell or ell < 1:
        raise ValueError("Hadamard exponent must be a positive integer")
    ell = int(ell)
    if ell == 1:
        return kernel
    base = kernel.func
    return MatrixKernel(kernel.m, lambda t: base(t) ** ell, support_bound=kernel.support_bound,
                        family="hadamard_power", params={"ell": ell, "base": kernel.family},
                        breakpoints=kernel.breakpoints, analytic=kernel.analytic)


def rescale_kernel(kernel, factor):
    """K(theta) = C(factor * theta) for 0 < factor <= 1."""
    if not 0 < factor <= 1:
        raise ValueError("rescale factor must lie in (0, 1]")
    base = kernel.func
    support = kernel.support_bound
    if support != FULL:
        support = min(np.pi, support / factor)
    bps = tuple(sorted({b / factor for b in kernel.breakpoints if b / factor < np.pi}))
    return MatrixKernel(kernel.m, lambda t: base(factor * t), support_bound=support,
                        family="rescaled", params={"factor": factor, "base": kernel.family},
                        breakpoints=bps, analytic=kernel.analytic and not bps and factor == 1)


def zero_kernel(m=1):
    return constant_kernel(np.zeros((m, m)))


def make_kernel(spec, base_dir=None):
    """Build a MatrixKernel from a KernelSpec (or its dict form)."""
    if isinstance(spec, dict):
        spec = KernelSpec.from_dict(spec)
    p = spec.params
    fam = spec.family
    try:
        if fam == "constant":
            return constant_kernel(p.get("c", 1.0))
        if fam == "polynomial":
            k = polynomial_kernel(p["B0"], p["B1"], p["B2"])
            return hadamard_power(k, p.get("ell", 1))
        if fam == "exp_pair":
            return exp_pair_kernel(p["B1"], p["B2"])
        if fam == "cosh_cos":
            return cosh_cos_kernel(p["B"])
        if fam == "powered_sine":
            return powered_sine_kernel(p["nu"])
        if fam == "power":
            return power_kernel(p["n"], _real(p, "scale", 1.0))
        if fam == "jacobi_series":
            return jacobi_series_kernel(_real(p, "alpha"), _real(p, "beta"), p["B"])
        if fam == "exponential":
            return exponential_kernel(_real(p, "rate"), _real(p, "sill", 1.0))
        if fam == "cosine":
            return cosine_kernel(_real(p, "k", 1.0), _real(p, "sill", 1.0))
        if fam == "triangle":
            return triangle_kernel(_real(p, "support", np.pi), _real(p, "sill", 1.0))
        if fam == "spherical":
            return spherical_kernel(_real(p, "support", np.pi), _real(p, "sill", 1.0))
        if fam == "tabulated":
            if spec.csv_path is not None:
                import os

                path = spec.csv_path
                if base_dir is not None and not os.path.isabs(path):
                    path = os.path.join(base_dir, path)
                theta, values = read_tabulated_csv(path)
            else:
                theta = p["theta"]
                values = np.asarray(p["values"], dtype=float)
                if values.ndim == 1:
                    values = values[:, None, None]
            return tabulated_kernel(theta, values)
        if fam == "hadamard_power":
            return hadamard_power(make_kernel(p["base"], base_dir), p["ell"])
        if fam == "rescaled":
            return rescale_kernel(make_kernel(p["base"], base_dir), _real(p, "factor"))
    except KeyError as exc:
        raise KernelSpecError(f"kernel family {fam!r} is missing parameter {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, KernelSpecError):
            raise
        raise KernelSpecError(str(exc)) from None
    raise KernelSpecError(f"unknown kernel family {fam!r}")


def load_kernel(path):
    import os

    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise KernelSpecError(f"cannot read kernel spec: {exc}") from None
    return make_kernel(KernelSpec.from_json(text), base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------- power-kernel coefficients


def power_kernel_coeffs(n, alpha, beta):
    """phi_k with ((1+x)/2)^n = sum_k phi_k P_k^{(alpha, beta)}(x), by projection.

    The Gauss-Jacobi rule with n+1 nodes integrates the degree-2n products
    exactly, so this is exact up to roundoff.
    """
    if int(n) != n or n < 0:
        raise ValueError("n must be a nonnegative integer")
    n = int(n)
    rule = gauss_jacobi_rule(n + 1, alpha, beta)
    P = jacobi_table(n, alpha, beta, rule.nodes)
    f = ((1 + rule.nodes) / 2) ** n
    proj = P @ (rule.weights * f)
    norms = np.array([jacobi_norm(k, alpha, beta) for k in range(n + 1)])
    return proj / norms


def power_kernel_coeffs_closed(n, alpha, beta):
    """Closed form of the same coefficients, normalized by P_k(1)."""
    out = np.empty(n + 1)
    for k in range(n + 1):
        logv = (gammaln(n + beta + 1) + gammaln(n + 1) + log_norm_denominator(k, alpha, beta)
                + gammaln(k + alpha + 1) - gammaln(k + n + alpha + beta + 2) - gammaln(k + beta + 1)
                - gammaln(k + 1) - gammaln(n - k + 1) - gammaln(alpha + 1)
                - np.log(jacobi_at_one(k, alpha, beta)))
        out[k] = np.exp(logv)
    return out
