import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from isocov.spaces import (
    CAYLEY, COMPLEX_PROJECTIVE, QUATERNION_PROJECTIVE, REAL_PROJECTIVE, SPHERE, Space, UnsupportedOperation,
    basis_point, distance_cdf, distance_density, geodesic_distance, inner_modulus, parse_space,
    quaternion_conj_mul, same_point, sample_uniform,
)
from isocov.streams import RandomStream

SAMPLEABLE = ["S:1", "S:2", "S:5", "PR:2", "PR:3", "PC:4", "PC:6", "PH:8", "PH:12"]


def test_table_parameters():
    assert (parse_space("S:2").alpha, parse_space("S:2").beta) == (0.0, 0.0)
    assert (parse_space("CAY:16").alpha, parse_space("CAY:16").beta) == (7.0, 3.0)
    assert (parse_space("PH:8").alpha, parse_space("PH:8").beta) == (3.0, 1.0)
    assert (parse_space("PC:4").alpha, parse_space("PC:4").beta) == (1.0, 0.0)
    assert (parse_space("PR:3").alpha, parse_space("PR:3").beta) == (0.5, -0.5)


@pytest.mark.parametrize("text", ["X:9", "S:0", "PC:5", "PH:6", "CAY:8", "PR:1", "S", "S:-2"])
def test_bad_space_strings(text):
    with pytest.raises(ValueError):
        parse_space(text)


def test_round_trip_string():
    for t in SAMPLEABLE + ["CAY:16"]:
        assert str(parse_space(t)) == t


def test_point_shapes_and_cayley():
    assert parse_space("PC:4").point_shape == (3, 2)
    assert parse_space("PH:8").point_shape == (3, 4)
    assert parse_space("S:2").point_shape == (3, 1)
    cay = Space(CAYLEY, 16)
    assert not cay.sampleable
    with pytest.raises(UnsupportedOperation):
        sample_uniform(cay, RandomStream(1))


def test_distance_examples():
    s2 = parse_space("S:2")
    e1, e2 = basis_point(s2, 0), basis_point(s2, 1)
    assert geodesic_distance(s2, e1, e1) == 0.0
    assert geodesic_distance(s2, e1, e2) == pytest.approx(np.pi / 2, abs=1e-15)
    assert geodesic_distance(s2, e1, -e1) == pytest.approx(np.pi, abs=1e-15)
    pr = parse_space("PR:2")
    p = sample_uniform(pr, RandomStream(3))
    assert geodesic_distance(pr, p, -p) == pytest.approx(0.0, abs=1e-15)
    assert geodesic_distance(pr, p, p) == 0.0


@pytest.mark.parametrize("text", SAMPLEABLE)
def test_distance_matches_arccos_form(text):
    sp = parse_space(text)
    p = sample_uniform(sp, RandomStream(11), 200)
    q = sample_uniform(sp, RandomStream(12), 200)
    got = geodesic_distance(sp, p, q)
    if sp.family == SPHERE:
        ref = np.arccos(np.clip(np.sum(p * q, axis=(-2, -1)), -1, 1))
    else:
        ref = 2 * np.arccos(np.clip(inner_modulus(p, q), 0, 1))
    assert np.allclose(got, ref, atol=1e-7)
    assert np.all((got >= 0) & (got <= np.pi))
    assert np.allclose(got, geodesic_distance(sp, q, p), atol=1e-14)


def test_phase_invariance():
    rng = np.random.default_rng(0)
    pc = parse_space("PC:4")
    p = sample_uniform(pc, rng)
    q = sample_uniform(pc, rng)
    ph = np.exp(1j * 0.7)
    qc = (q[:, 0] + 1j * q[:, 1]) * ph
    q2 = np.stack([qc.real, qc.imag], axis=-1)
    assert geodesic_distance(pc, p, q2) == pytest.approx(geodesic_distance(pc, p, q), abs=1e-13)
    assert same_point(pc, q, q2)
    ph8 = parse_space("PH:8")
    p = sample_uniform(ph8, rng)
    q = sample_uniform(ph8, rng)
    u = rng.standard_normal(4)
    u /= np.linalg.norm(u)
    # right multiplication q -> q u: conj(conj(q)) u
    qu = quaternion_conj_mul(q * np.array([1, -1, -1, -1]), np.broadcast_to(u, q.shape))
    assert geodesic_distance(ph8, p, qu) == pytest.approx(geodesic_distance(ph8, p, q), abs=1e-13)


def test_quaternion_product_is_associative_and_normed():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((2, 4))
    conj = np.array([1, -1, -1, -1])
    ab = quaternion_conj_mul(a * conj, b)
    assert np.linalg.norm(ab) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b))


@pytest.mark.parametrize("text", SAMPLEABLE)
def test_samples_are_unit(text):
    sp = parse_space(text)
    x = sample_uniform(sp, RandomStream(5), 100)
    assert np.allclose(np.sum(x * x, axis=(-2, -1)), 1.0)


def test_sphere_mean_cosine():
    s2 = parse_space("S:2")
    u = sample_uniform(s2, RandomStream(7), 100_000)
    c = np.cos(geodesic_distance(s2, basis_point(s2), u))
    assert abs(np.mean(c)) <= 0.01


@pytest.mark.parametrize("text", ["PR:2", "S:3", "PC:4", "PH:8"])
def test_distance_law(text):
    sp = parse_space(text)
    u = sample_uniform(sp, RandomStream(9), 100_000)
    rho = geodesic_distance(sp, basis_point(sp), u)
    ks = stats.kstest(rho, lambda t: distance_cdf(sp, t)).statistic
    assert ks <= 0.01


def test_density_integrates_to_cdf():
    sp = parse_space("PH:8")
    for t in (0.5, 1.5, 3.0):
        mass = quad(lambda s: distance_density(sp, s), 0, t)[0]
        assert mass == pytest.approx(distance_cdf(sp, t), rel=1e-10)


def test_streams_are_independent_of_order():
    root = RandomStream(42)
    a = root.split(3).generator().standard_normal(5)
    root.split(1).generator().standard_normal(100)
    b = root.split(3).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, root.split(4).generator().standard_normal(5))
    with pytest.raises(ValueError):
        RandomStream(-1)


def test_families_constant_names():
    assert {SPHERE, REAL_PROJECTIVE, COMPLEX_PROJECTIVE, QUATERNION_PROJECTIVE, CAYLEY} == {
        parse_space(t).family for t in ("S:2", "PR:2", "PC:4", "PH:8", "CAY:16")}
