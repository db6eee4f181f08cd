import mpmath
import numpy as np
import pytest

from isocov.coefficients import cosine_coefficients
from isocov.kernels import (
    MatrixKernel, constant_kernel, cosh_cos_kernel, cosine_kernel, exp_pair_kernel, exponential_kernel,
    polynomial_kernel, power_kernel, powered_sine_kernel, zero_kernel,
)
from isocov.validity import (
    INCONCLUSIVE, INVALID, VALID, corollary_checks, minf_series_coeffs, projective_constructions,
    transfer_implications, validate_minf, validate_on_space,
)

SPACES = ["S:2", "PR:3", "PC:4", "PH:8", "CAY:16"]
EX2_B1 = np.array([[2.0, 1.0], [1.0, 2.0]])


def asin_exp_taylor(N):
    """Maclaurin coefficients of exp(arcsin x) by mpmath differentiation."""
    with mpmath.workdps(40):
        return [float(c) for c in mpmath.taylor(lambda x: mpmath.exp(mpmath.asin(x)), 0, N)]


def test_example4_on_sphere():
    assert validate_on_space(powered_sine_kernel([1.0]), "S:2").verdict == VALID


def test_cos2_invalid_at_zero():
    rep = validate_on_space(cosine_kernel(2.0), "S:2")
    assert rep.verdict == INVALID
    assert rep.first_failure["n"] == 0
    assert rep.first_failure["min_eigenvalue_B"] == pytest.approx(-1 / 3, rel=1e-12)


def test_exp_on_circle():
    rep = validate_on_space(exponential_kernel(0.5), "S:1", n_max=60)
    assert rep.verdict == VALID
    # cosine coefficients c(1 - (-1)^n e^{-c pi})/(c^2 + n^2), positive for c = 1/2
    c = 0.5
    got = cosine_coefficients(exponential_kernel(c), 20)[:, 0, 0]
    n = np.arange(21)
    ref = c * (1 - (-1.0) ** n * np.exp(-c * np.pi)) / (c * c + n * n)
    assert np.allclose(got, ref, rtol=1e-12)


def test_inconclusive_on_overflow():
    bad = MatrixKernel(1, lambda t: np.exp(1e3 * np.cos(t))[:, None, None] * 1e300)
    assert validate_on_space(bad, "S:2", n_max=4).verdict == INCONCLUSIVE


def test_trace_and_serialization():
    rep = validate_on_space(powered_sine_kernel([1.5, 1.5]), "PC:4", n_max=10)
    assert len(rep.trace) == 11
    assert '"verdict": "valid"' in rep.to_json()


def test_minf_constant():
    c = minf_series_coeffs(constant_kernel(3.0), 12)
    assert c[0, 0, 0] == pytest.approx(3.0, rel=1e-13)
    assert np.max(np.abs(c[1:])) <= 1e-12


def test_minf_example2_coefficients():
    k = exp_pair_kernel([[1.0]], [[np.exp(np.pi)]])
    c = minf_series_coeffs(k, 10)[:, 0, 0]
    a = asin_exp_taylor(10)
    for n in range(0, 11, 2):
        assert c[n] == pytest.approx(2 * np.exp(np.pi / 2) * a[n], rel=1e-9)
    assert np.max(np.abs(c[1::2])) <= 1e-12 * c[0]


def test_minf_exp_odd_coefficient():
    c = minf_series_coeffs(exponential_kernel(0.5), 6)[:, 0, 0]
    # e^{-t/2} at t = pi - 2 arcsin x is e^{-pi/2} exp(arcsin x)
    assert c[1] == pytest.approx(np.exp(-np.pi / 2), rel=1e-10)


def test_minf_chebyshev_route_agrees_on_even_part():
    k = cosh_cos_kernel([[1.0]])
    a = minf_series_coeffs(k, 16, "contour")[:, 0, 0]
    b = minf_series_coeffs(k, 16, "chebyshev")[:, 0, 0]
    assert np.allclose(a[:9:2], b[:9:2], atol=1e-8)


def test_minf_verdicts():
    assert validate_minf(exp_pair_kernel(EX2_B1, np.exp(np.pi) * EX2_B1)).verdict == VALID
    assert validate_minf(exponential_kernel(0.5)).verdict == INVALID
    assert validate_minf(cosh_cos_kernel([[1.0]])).verdict == VALID
    assert validate_minf(zero_kernel(2)).verdict == VALID


def test_minf_degree_cap():
    with pytest.raises(ValueError):
        minf_series_coeffs(constant_kernel(1.0), 31)


def test_example1_boundary():
    pi = np.pi
    good = polynomial_kernel([[pi**2 + 0.5]], [[-2 * pi]], [[1.0]])
    bad = polynomial_kernel([[pi**2 - 0.5]], [[-2 * pi]], [[1.0]])
    assert validate_minf(good).verdict == VALID
    assert validate_minf(bad).verdict == INVALID
    skew = polynomial_kernel([[pi**2 + 0.5]], [[-pi]], [[1.0]])
    rep = validate_minf(skew)
    assert rep.verdict == INVALID and rep.first_failure["kind"] == "odd"
    for sp in SPACES:
        assert validate_on_space(good, sp).verdict == VALID, sp


def test_corollary_checks():
    assert corollary_checks(powered_sine_kernel([1.0]))["ok"]
    assert not corollary_checks(cosine_kernel(1.0))["ok"]


def test_projective_constructions():
    kp, km = projective_constructions(constant_kernel(2.0))
    t = np.linspace(0, np.pi, 9)
    assert np.allclose(kp(t), 4.0) and np.allclose(km(t), 0.0)
    kp, km = projective_constructions(cosine_kernel(1.0))
    assert np.max(np.abs(kp(t))) <= 1e-15
    assert np.allclose(km(t)[:, 0, 0], 1 + np.cos(t), atol=1e-15)
    kp, km = projective_constructions(powered_sine_kernel([1.0]))
    assert validate_on_space(kp, "PR:3").verdict == VALID
    assert validate_on_space(km, "PR:3").verdict == VALID


def test_transfer_implications():
    recs = transfer_implications(powered_sine_kernel([1.0]), n_max=20)
    assert all(r.holds and r.source_verdict == VALID for r in recs)
    recs = transfer_implications(cosine_kernel(2.0), n_max=20)
    assert all(r.holds for r in recs)
    assert recs[0].source_verdict == INVALID
    assert all(r.holds for r in transfer_implications(zero_kernel(1), n_max=10))


def test_power_kernel_valid_everywhere():
    for sp in SPACES:
        assert validate_on_space(power_kernel(3), sp).verdict == VALID
    assert validate_minf(power_kernel(3)).verdict == VALID


def test_powered_sine_matrix_with_distinct_exponents():
    # 1 - (1 - x^2)^{nu/2} has x^2 coefficient nu/2, so the degree-2 matrix has
    # entries max(nu_i, nu_j)/2, which is indefinite for nu = (1/2, 2)
    with mpmath.workdps(30):
        taylor = {nu: [float(c) for c in mpmath.taylor(lambda x: 1 - (1 - x**2) ** (nu / 2), 0, 4)]
                  for nu in (0.5, 2.0)}
    ref = np.array([[taylor[0.5][2], taylor[2.0][2]], [taylor[2.0][2], taylor[2.0][2]]])
    rep = validate_minf(powered_sine_kernel([0.5, 2.0]))
    got = np.array(rep.details["coefficients"])[2]
    assert np.allclose(got, ref, atol=1e-12)
    assert rep.verdict == INVALID and rep.first_failure["n"] == 2
    assert rep.first_failure["min_eigenvalue"] == pytest.approx(np.linalg.eigvalsh(ref)[0], rel=1e-9)
    assert validate_on_space(powered_sine_kernel([0.5, 2.0]), "S:2").verdict == INVALID
    assert validate_minf(powered_sine_kernel([1.0, 1.0])).verdict == VALID
