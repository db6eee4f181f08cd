"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same operation order.  The numpy
path is used when numba is missing or when ``ISOCOV_DISABLE_NUMBA`` is set to
a non-empty value other than ``0``; complex inputs always take the numpy path.
"""

import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    # an old system TBB makes numba fall back to another threading layer, noisily
    warnings.filterwarnings("ignore", message="The TBB threading layer")
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ISOCOV_DISABLE_NUMBA", "") in ("", "0")


def jacobi_recurrence_coeffs(n_max, alpha, beta):
    """Coefficients of P_{n+1} = (A_n x + B_n) P_n - C_n P_{n-1} for n = 1..n_max-1.

    Index 0 of each array is unused.
    """
    size = max(n_max, 1)
    A = np.zeros(size)
    B = np.zeros(size)
    C = np.zeros(size)
    a, b = float(alpha), float(beta)
    for n in range(1, n_max):
        c = 2.0 * n + a + b
        den = 2.0 * (n + 1) * (n + a + b + 1.0)
        A[n] = (c + 1.0) * (c + 2.0) / den
        B[n] = (c + 1.0) * (a * a - b * b) / (den * c)
        C[n] = 2.0 * (n + a) * (n + b) * (c + 2.0) / (den * c)
    return A, B, C


# ---------------------------------------------------------------- numpy twins


def jacobi_table_numpy(n_max, alpha, beta, x):
    x = np.asarray(x)
    out = np.empty((n_max + 1,) + x.shape, dtype=np.result_type(x.dtype, np.float64))
    out[0] = 1.0
    if n_max == 0:
        return out
    out[1] = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) * 0.5
    A, B, C = jacobi_recurrence_coeffs(n_max, alpha, beta)
    for n in range(1, n_max):
        out[n + 1] = (A[n] * x + B[n]) * out[n] - C[n] * out[n - 1]
    return out


def series_accumulate_numpy(x, W, alpha, beta):
    """out[r, i, :] = sum_n P_n(x[r, i]) * W[r, n, :]."""
    R, I = x.shape
    n_terms, m = W.shape[1], W.shape[2]
    out = np.zeros((R, I, m))
    p_prev = np.ones((R, I))
    out += p_prev[:, :, None] * W[:, None, 0, :]
    if n_terms == 1:
        return out
    p_cur = (alpha + 1.0) + (alpha + beta + 2.0) * (x - 1.0) * 0.5
    out += p_cur[:, :, None] * W[:, None, 1, :]
    A, B, C = jacobi_recurrence_coeffs(n_terms - 1, alpha, beta)
    for n in range(1, n_terms - 1):
        p_next = (A[n] * x + B[n]) * p_cur - C[n] * p_prev
        out += p_next[:, :, None] * W[:, None, n + 1, :]
        p_prev, p_cur = p_cur, p_next
    return out


def _series_threshold(k):
    return 1.0 + 1.5 * k if k > 0 else 0.5


def sph_ratio_numpy(k, z):
    """j_k(z) / z**k for integer k >= -1 (j_{-1}(z) = cos(z)/z), z >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < _series_threshold(k)
    zs = z[small]
    # power series: sum_i (-z^2/2)^i / (i! (2k+2i+1)!!)
    term = np.full_like(zs, 1.0 / _double_factorial(2 * k + 1))
    acc = term.copy()
    for i in range(1, 200):
        term = term * (-0.5 * zs * zs) / (i * (2 * k + 2 * i + 1))
        acc += term
        if not np.any(np.abs(term) > 1e-17 * np.abs(acc)):
            break
    out[small] = acc
    zl = z[~small]
    f_prev = np.cos(zl)
    if k == -1:
        out[~small] = f_prev
        return out
    f_cur = np.sin(zl) / zl
    for j in range(0, k):
        f_prev, f_cur = f_cur, ((2 * j + 1) * f_cur - f_prev) / (zl * zl)
    out[~small] = f_cur
    return out


def bessel_sum_numpy(omega, x, F, k, chunk=256):
    """out[w, :] = sum_q F[q, :] * sph_ratio(k, omega[w] * x[q])."""
    omega = np.asarray(omega, dtype=float)
    out = np.empty((omega.size, F.shape[1]))
    for s in range(0, omega.size, chunk):
        z = np.outer(omega[s:s + chunk], x)
        vals = sph_ratio_numpy(k, z.ravel()).reshape(z.shape)
        out[s:s + chunk] = vals @ F
    return out


def _double_factorial(n):
    r = 1.0
    while n > 1:
        r *= n
        n -= 2
    return r


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True)
    def _jacobi_table_nb(n_max, alpha, beta, x, A, B, C):
        M = x.shape[0]
        out = np.empty((n_max + 1, M))
        for i in range(M):
            out[0, i] = 1.0
        if n_max == 0:
            return out
        for i in range(M):
            out[1, i] = (alpha + 1.0) + (alpha + beta + 2.0) * (x[i] - 1.0) * 0.5
        for n in range(1, n_max):
            for i in range(M):
                out[n + 1, i] = (A[n] * x[i] + B[n]) * out[n, i] - C[n] * out[n - 1, i]
        return out

    @njit(parallel=True, cache=True, nogil=True)
    def _series_accumulate_nb(x, W, alpha, beta, A, B, C):
        R, I = x.shape
        n_terms = W.shape[1]
        m = W.shape[2]
        out = np.zeros((R, I, m))
        for r in prange(R):
            for i in range(I):
                xv = x[r, i]
                p_prev = 1.0
                for k in range(m):
                    out[r, i, k] += p_prev * W[r, 0, k]
                if n_terms == 1:
                    continue
                p_cur = (alpha + 1.0) + (alpha + beta + 2.0) * (xv - 1.0) * 0.5
                for k in range(m):
                    out[r, i, k] += p_cur * W[r, 1, k]
                for n in range(1, n_terms - 1):
                    p_next = (A[n] * xv + B[n]) * p_cur - C[n] * p_prev
                    for k in range(m):
                        out[r, i, k] += p_next * W[r, n + 1, k]
                    p_prev = p_cur
                    p_cur = p_next
        return out

    @njit(cache=True, nogil=True)
    def _sph_ratio_scalar_nb(k, z, thresh, lead):
        if z < thresh:
            term = lead
            acc = term
            for i in range(1, 200):
                term = term * (-0.5 * z * z) / (i * (2 * k + 2 * i + 1))
                acc += term
                if abs(term) <= 1e-17 * abs(acc):
                    break
            return acc
        f_prev = np.cos(z)
        if k == -1:
            return f_prev
        f_cur = np.sin(z) / z
        for j in range(0, k):
            f_next = ((2 * j + 1) * f_cur - f_prev) / (z * z)
            f_prev = f_cur
            f_cur = f_next
        return f_cur

    @njit(parallel=True, cache=True, nogil=True)
    def _bessel_sum_nb(omega, x, F, k, thresh, lead):
        W = omega.shape[0]
        Q = x.shape[0]
        K = F.shape[1]
        out = np.zeros((W, K))
        for w in prange(W):
            for q in range(Q):
                v = _sph_ratio_scalar_nb(k, omega[w] * x[q], thresh, lead)
                for j in range(K):
                    out[w, j] += F[q, j] * v
        return out


# ---------------------------------------------------------------- dispatch


def jacobi_table(n_max, alpha, beta, x):
    """Rows P_0..P_{n_max} of the Jacobi family evaluated at ``x``."""
    x = np.asarray(x)
    if USE_NUMBA and x.ndim == 1 and x.dtype == np.float64:
        A, B, C = jacobi_recurrence_coeffs(n_max, alpha, beta)
        return _jacobi_table_nb(int(n_max), float(alpha), float(beta), x, A, B, C)
    return jacobi_table_numpy(n_max, alpha, beta, x)


def series_accumulate(x, W, alpha, beta):
    if USE_NUMBA:
        A, B, C = jacobi_recurrence_coeffs(W.shape[1] - 1, alpha, beta)
        return _series_accumulate_nb(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(W, dtype=np.float64),
            float(alpha), float(beta), A, B, C,
        )
    return series_accumulate_numpy(x, W, alpha, beta)


def bessel_sum(omega, x, F, k):
    if USE_NUMBA:
        return _bessel_sum_nb(
            np.ascontiguousarray(omega, dtype=np.float64),
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(F, dtype=np.float64),
            int(k), _series_threshold(k), 1.0 / _double_factorial(2 * k + 1),
        )
    return bessel_sum_numpy(omega, x, F, k)


def sph_ratio(k, z):
    return sph_ratio_numpy(k, z)
