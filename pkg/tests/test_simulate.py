import mpmath
import numpy as np
import pytest

from isocov.kernels import jacobi_series_kernel, zero_kernel
from isocov.simulate import (
    a_n_coeff, addition_formula_residual, auto_truncation, empirical_cov_check, psd_sqrt, simulate_field,
)
from isocov.spaces import UnsupportedOperation, parse_space, sample_uniform
from isocov.streams import RandomStream

S2 = parse_space("S:2")


@pytest.fixture(scope="module")
def one_plus_cos():
    pts = sample_uniform(S2, RandomStream(99), 20)
    ens = simulate_field(S2, [1.0, 1.0], pts, 20_000, RandomStream(2024))
    return ens, jacobi_series_kernel(0, 0, [1.0, 1.0])


def test_a_n_values():
    for a, b in [(0, 0), (0.5, -0.5), (7, 3), (-0.5, -0.5)]:
        assert a_n_coeff(a, b, 0) == pytest.approx(1.0, rel=1e-14)
    assert a_n_coeff(0, 0, 1) == pytest.approx(np.sqrt(3.0), rel=1e-14)
    with mpmath.workdps(30):
        a = b = mpmath.mpf(-0.5)
        n = 2
        sq = (mpmath.gamma(b + 1) * (2 * n + a + b + 1) * mpmath.gamma(n + a + b + 1)
              / (mpmath.gamma(a + b + 2) * mpmath.gamma(n + b + 1)))
        ref = float(mpmath.sqrt(sq))
    assert a_n_coeff(-0.5, -0.5, 2) == pytest.approx(ref, rel=1e-13)


def test_psd_sqrt():
    assert np.allclose(psd_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 4))
    M = A.T @ A
    S = psd_sqrt(M)
    assert np.allclose(S @ S, M, atol=1e-12 * np.max(np.abs(M)))
    # roundoff-level negative eigenvalues are clipped, real ones are refused
    assert np.all(np.isfinite(psd_sqrt(np.diag([1.0, -1e-13]))))
    with pytest.raises(ValueError):
        psd_sqrt([[1.0, 2.0], [2.0, 1.0]])


def test_zero_ensemble():
    pts = sample_uniform(S2, RandomStream(1), 5)
    ens = simulate_field(S2, np.zeros((3, 2, 2)), pts, 200, RandomStream(2), n_max=2)
    assert np.all(ens.values == 0)
    assert empirical_cov_check(ens, zero_kernel(2)).passed


def test_constant_term_gives_constant_field():
    pts = sample_uniform(S2, RandomStream(1), 6)
    ens = simulate_field(S2, [1.0], pts, 5000, RandomStream(3))
    assert np.allclose(ens.values, ens.values[:, :1, :])
    assert np.var(ens.values[:, 0, 0]) == pytest.approx(1.0, abs=0.1)


def test_variance_band(one_plus_cos):
    ens, _ = one_plus_cos
    var = np.mean(ens.values[:, :, 0] ** 2, axis=0)
    assert np.all(np.abs(var - 2.0) <= 0.06)


def test_covariance_check(one_plus_cos):
    ens, kernel = one_plus_cos
    chk = empirical_cov_check(ens, kernel, 4.0)
    assert chk.passed and chk.fraction_flagged <= 0.01
    wrong = empirical_cov_check(ens, jacobi_series_kernel(0, 0, [2.0, 2.0]), 4.0)
    diag = [r for r in wrong.rows if r[0] == r[1]]
    assert all(r[-1] for r in diag)


def test_worker_count_does_not_change_output():
    pts = sample_uniform(S2, RandomStream(5), 7)
    B = np.array([[[1.0, 0.3], [0.3, 0.5]], [[0.4, 0.0], [0.0, 0.2]], [[0.1, 0.05], [0.05, 0.1]]])
    runs = [simulate_field(S2, B, pts, 1000, RandomStream(8), workers=w, chunk=64).values for w in (1, 3, 8)]
    assert all(np.array_equal(runs[0], r) for r in runs[1:])
    again = simulate_field(S2, B, pts, 1000, RandomStream(8)).values
    assert np.array_equal(runs[0], again)


@pytest.mark.parametrize("text", ["PR:3", "PC:4", "PH:8", "S:5"])
def test_other_spaces(text):
    sp = parse_space(text)
    pts = sample_uniform(sp, RandomStream(6), 5)
    B = [1.0, 0.6, 0.3]
    ens = simulate_field(sp, B, pts, 5000, RandomStream(7))
    assert empirical_cov_check(ens, jacobi_series_kernel(sp.alpha, sp.beta, B)).passed


def test_addition_formula():
    for n in range(0, 9):
        for r in (0.3, np.pi / 2, 2.5):
            assert addition_formula_residual(n, r) <= 1e-6


def test_guards():
    pts = sample_uniform(S2, RandomStream(1), 3)
    ens = simulate_field(S2, [1.0], pts, 50, RandomStream(1))
    with pytest.raises(ValueError):
        empirical_cov_check(ens, jacobi_series_kernel(0, 0, [1.0]))
    with pytest.raises(UnsupportedOperation):
        simulate_field(parse_space("CAY:16"), [1.0], pts, 10, RandomStream(1))
    with pytest.raises(ValueError):
        simulate_field(S2, [1.0, -0.5], pts, 10, RandomStream(1), n_max=1)
    with pytest.raises(ValueError):
        simulate_field(S2, [1.0], pts[:, :2], 10, RandomStream(1))


def test_auto_truncation():
    B = np.array([1.0, 0.5, 1e-5, 1e-9])[:, None, None]
    n, tail = auto_truncation(B, 0, 0)
    assert n == 1 and tail < 1e-3


def test_csv_and_metadata(tmp_path):
    pts = sample_uniform(S2, RandomStream(1), 3)
    ens = simulate_field(S2, [1.0, 1.0], pts, 120, RandomStream(4))
    ens.write_csv(str(tmp_path / "e.csv"))
    ens.write_metadata(str(tmp_path / "m.json"))
    rows = (tmp_path / "e.csv").read_text().splitlines()
    assert rows[0] == "replicate,point,z1" and len(rows) == 1 + 120 * 3
    assert float(rows[1].split(",")[2]) == ens.values[0, 0, 0]
    assert '"seed": 4' in (tmp_path / "m.json").read_text()
