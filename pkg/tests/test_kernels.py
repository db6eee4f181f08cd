import json

import numpy as np
import pytest

from isocov.kernels import (
    KernelSpec, KernelSpecError, constant_kernel, cosh_cos_kernel, eval_kernel, exp_pair_kernel,
    hadamard_power, jacobi_series_kernel, load_kernel, make_kernel, polynomial_kernel, power_kernel,
    power_kernel_coeffs, power_kernel_coeffs_closed, powered_sine_kernel, read_tabulated_csv,
    rescale_kernel, spherical_kernel, tabulated_kernel, triangle_kernel, write_tabulated_csv,
    zero_kernel,
)
from isocov.special import jacobi_at_one, jacobi_eval

T = np.linspace(0, np.pi, 33)


def test_polynomial_at_zero():
    B0 = np.array([[2.0, 0.5], [0.5, 1.0]])
    k = polynomial_kernel(B0, -2 * np.pi * np.eye(2), np.eye(2))
    assert np.array_equal(k(0.0), B0)
    assert k(T).shape == (33, 2, 2)


def test_powered_sine_values():
    k = powered_sine_kernel([2.0])
    assert k(np.pi)[0, 0] == pytest.approx(0.0, abs=1e-15)
    k = powered_sine_kernel([0.5, 1.0])
    v = k(1.0)
    assert v[0, 1] == pytest.approx(1 - np.sin(0.5) ** 1.0)
    assert v[0, 0] == pytest.approx(1 - np.sin(0.5) ** 0.5)


def test_power_kernel_at_zero():
    for n in (0, 1, 4):
        assert power_kernel(n)(0.0)[0, 0] == 1.0


def test_exp_pair_at_pi():
    k = exp_pair_kernel([[1.0]], [[np.exp(np.pi)]])
    assert k(np.pi)[0, 0] == pytest.approx(2 * np.exp(np.pi / 2), rel=1e-14)


def test_cosh_cos():
    k = cosh_cos_kernel([[1.0]])
    assert k(0.7)[0, 0] == pytest.approx(2 * np.cosh(np.cos(0.35)))


def test_constant_and_zero():
    c = 3.0 * np.eye(2)
    k = constant_kernel(c)
    assert np.array_equal(k(T), np.broadcast_to(c, (33, 2, 2)))
    assert np.all(zero_kernel(3)(T) == 0)


def test_tabulated_nodes_exact():
    th = np.linspace(0, np.pi, 9)
    vals = np.cos(th)[:, None, None] ** 3
    k = tabulated_kernel(th, vals)
    assert np.array_equal(k(th), vals)
    mid = 0.5 * (th[2] + th[3])
    assert k(mid)[0, 0] == pytest.approx(0.5 * (vals[2, 0, 0] + vals[3, 0, 0]))


def test_hadamard_power():
    k = powered_sine_kernel([1.0])
    assert np.array_equal(hadamard_power(k, 1)(T), k(T))
    ones = constant_kernel(np.ones((2, 2)))
    assert np.all(hadamard_power(ones, 5)(T) == 1)
    assert np.allclose(hadamard_power(k, 2)(T), k(T) ** 2)


def test_compact_families():
    tri = triangle_kernel(1.0)
    assert tri.compact
    assert tri(1.5)[0, 0] == 0.0
    assert tri(0.5)[0, 0] == pytest.approx(0.5)
    sph = spherical_kernel()
    assert sph(np.pi)[0, 0] == pytest.approx(0.0, abs=1e-15)
    assert sph.support_bound == pytest.approx(np.pi) and sph.analytic
    assert not spherical_kernel(2.0).analytic


def test_rescale():
    k = powered_sine_kernel([1.0])
    r = rescale_kernel(k, 0.5)
    assert r(2.0)[0, 0] == pytest.approx(k(1.0)[0, 0])
    with pytest.raises(ValueError):
        rescale_kernel(k, 1.5)


def test_eval_range_check():
    with pytest.raises(ValueError):
        eval_kernel(constant_kernel(1.0), 4.0)
    with pytest.raises(ValueError):
        eval_kernel(constant_kernel(1.0), -0.1)


def test_jacobi_series_kernel_matches_direct_sum():
    B = [np.eye(2), 0.5 * np.ones((2, 2)), np.diag([0.1, 0.2])]
    k = jacobi_series_kernel(0.5, -0.5, B)
    x = np.cos(T)
    ref = sum(b[None] * jacobi_eval(n, 0.5, -0.5, x)[:, None, None] for n, b in enumerate(B))
    assert np.allclose(k(T), ref, atol=1e-14)


def test_power_coeffs_examples():
    assert np.allclose(power_kernel_coeffs(0, 0.3, 0.1), [1.0])
    assert np.allclose(power_kernel_coeffs(1, 0, 0), [0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("n,a,b", [(3, 0, 0), (6, 0.5, -0.5), (8, 3, 1), (10, 7, 3), (5, -0.5, -0.5)])
def test_power_coeffs_identities(n, a, b):
    phi = power_kernel_coeffs(n, a, b)
    assert np.all(phi > 0)
    # phi_k are the B_k of ((1 + cos t)/2)^n, so sum_k phi_k P_k(1) = 1
    assert sum(phi[k] * jacobi_at_one(k, a, b) for k in range(n + 1)) == pytest.approx(1.0, rel=1e-12)
    assert np.allclose(phi, power_kernel_coeffs_closed(n, a, b), rtol=1e-10)
    x = np.linspace(-1, 1, 11)
    recon = sum(phi[k] * jacobi_eval(k, a, b, x) for k in range(n + 1))
    assert np.allclose(recon, ((1 + x) / 2) ** n, atol=1e-12)


def test_spec_json_round_trip(tmp_path):
    spec = KernelSpec("powered_sine", {"nu": [0.5, 1.0]})
    again = KernelSpec.from_json(spec.to_json())
    assert again == spec
    p = tmp_path / "k.json"
    p.write_text(spec.to_json())
    k = load_kernel(str(p))
    assert k.m == 2


def test_spec_errors(tmp_path):
    with pytest.raises(KernelSpecError):
        make_kernel({"family": "nope"})
    with pytest.raises(KernelSpecError):
        make_kernel({"family": "exp_pair", "params": {"B1": [[1.0]]}})
    with pytest.raises(KernelSpecError):
        KernelSpec.from_json("{not json")
    with pytest.raises(KernelSpecError):
        load_kernel(str(tmp_path / "missing.json"))


def test_tabulated_csv(tmp_path):
    th = np.linspace(0, np.pi, 5)
    vals = np.stack([np.array([[1 + t, 0.1 * t], [0.1 * t, 2 - t / 4]]) for t in th])
    p = tmp_path / "table.csv"
    write_tabulated_csv(str(p), th, vals)
    t2, v2 = read_tabulated_csv(str(p))
    assert np.array_equal(t2, th)
    assert np.array_equal(v2, vals)
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"family": "tabulated", "csv": "table.csv"}))
    k = load_kernel(str(spec))
    assert np.array_equal(k(th), vals)


def test_nested_specs():
    k = make_kernel({"family": "hadamard_power", "params": {"ell": 2, "base": {"family": "cosine",
                                                                              "params": {"k": 1}}}})
    assert k(0.3)[0, 0] == pytest.approx(np.cos(0.3) ** 2)
