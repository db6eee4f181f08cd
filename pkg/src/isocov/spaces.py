"""Compact two-point homogeneous spaces: parameters, distances, sampling.

Points are real arrays of shape (K, c): K coordinates over the base field,
each stored as c real components (c = 1 for the reals, 2 for the complex
numbers, 4 for the quaternions).  Projective points are unit representatives
taken modulo a unit scalar of the base field.
"""

import re
from dataclasses import dataclass

import numpy as np

SPHERE = "Sphere"
REAL_PROJECTIVE = "RealProjective"
COMPLEX_PROJECTIVE = "ComplexProjective"
QUATERNION_PROJECTIVE = "QuaternionProjective"
CAYLEY = "Cayley"

FAMILIES = (SPHERE, REAL_PROJECTIVE, COMPLEX_PROJECTIVE, QUATERNION_PROJECTIVE, CAYLEY)

_PREFIX = {"S": SPHERE, "PR": REAL_PROJECTIVE, "PC": COMPLEX_PROJECTIVE,
           "PH": QUATERNION_PROJECTIVE, "CAY": CAYLEY}
_CODE = {v: k for k, v in _PREFIX.items()}

# real components per base-field scalar
_FIELD_DIM = {SPHERE: 1, REAL_PROJECTIVE: 1, COMPLEX_PROJECTIVE: 2, QUATERNION_PROJECTIVE: 4}


class UnsupportedOperation(NotImplementedError):
    pass


@dataclass(frozen=True)
class Space:
    family: str
    d: int

    def __post_init__(self):
        d = self.d
        if int(d) != d:
            raise ValueError("dimension must be an integer")
        object.__setattr__(self, "d", int(d))
        ok = {
            SPHERE: d >= 1,
            REAL_PROJECTIVE: d >= 2,
            COMPLEX_PROJECTIVE: d >= 4 and d % 2 == 0,
            QUATERNION_PROJECTIVE: d >= 8 and d % 4 == 0,
            CAYLEY: d == 16,
        }
        if self.family not in ok:
            raise ValueError(f"unknown space family {self.family!r}")
        if not ok[self.family]:
            raise ValueError(f"dimension {d} not admissible for {self.family}")

    @property
    def alpha(self):
        return (self.d - 2) / 2 if self.family != CAYLEY else 7.0

    @property
    def beta(self):
        return {SPHERE: (self.d - 2) / 2, REAL_PROJECTIVE: -0.5, COMPLEX_PROJECTIVE: 0.0,
                QUATERNION_PROJECTIVE: 1.0, CAYLEY: 3.0}[self.family]

    @property
    def sampleable(self):
        return self.family != CAYLEY

    @property
    def point_shape(self):
        """(K, c) for sampleable families."""
        if not self.sampleable:
            raise UnsupportedOperation("points on the Cayley plane are not modelled")
        c = _FIELD_DIM[self.family]
        return (self.d // c + 1, c)

    def __str__(self):
        return f"{_CODE[self.family]}:{self.d}"


def parse_space(text):
    """Parse 'S:d', 'PR:d', 'PC:d', 'PH:d' or 'CAY:16'."""
    m = re.fullmatch(r"\s*([A-Za-z]+)\s*:\s*(\d+)\s*", str(text))
    if not m or m.group(1).upper() not in _PREFIX:
        raise ValueError(f"unrecognised space {text!r}; expected S:d, PR:d, PC:d, PH:d or CAY:16")
    return Space(_PREFIX[m.group(1).upper()], int(m.group(2)))


def space_params(space):
    return space.alpha, space.beta


def quaternion_conj_mul(a, b):
    """conj(a) * b for quaternion arrays with last axis (w, x, y, z)."""
    a0, a1, a2, a3 = a[..., 0], -a[..., 1], -a[..., 2], -a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ], axis=-1)


def inner_modulus(p, q):
    """|<p, q>| for arrays (..., K, c) under the base-field Hermitian product."""
    c = p.shape[-1]
    if c == 1:
        return np.abs(np.sum(p[..., 0] * q[..., 0], axis=-1))
    if c == 2:
        re_ = np.sum(p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1], axis=-1)
        im_ = np.sum(p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0], axis=-1)
        return np.hypot(re_, im_)
    if c == 4:
        s = np.sum(quaternion_conj_mul(p, q), axis=-2)
        return np.sqrt(np.sum(s * s, axis=-1))
    raise ValueError(f"unsupported component count {c}")


def _check_points(space, *pts):
    shape = space.point_shape
    out = []
    for p in pts:
        p = np.asarray(p, dtype=float)
        if p.ndim == len(shape) - 1 and shape[1] == 1:
            p = p[..., None]
        if p.shape[-2:] != shape:
            raise ValueError(f"point shape {p.shape[-2:]} does not match {space} (expected {shape})")
        out.append(p)
    return out


def _aligned(p, q):
    """q multiplied on the right by the unit scalar making <p, q> real and >= 0."""
    c = p.shape[-1]
    if c == 1:
        s = np.sum(p[..., 0] * q[..., 0], axis=-1)
        return q * np.where(s < 0, -1.0, 1.0)[..., None, None]
    if c == 2:
        s = np.stack([np.sum(p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1], axis=-1),
                      np.sum(p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0], axis=-1)], axis=-1)
        conj = np.array([1.0, -1.0])
    else:
        s = np.sum(quaternion_conj_mul(p, q), axis=-2)
        conj = np.array([1.0, -1.0, -1.0, -1.0])
    mod = np.sqrt(np.sum(s * s, axis=-1, keepdims=True))
    unit = np.where(mod > 0, s / np.where(mod > 0, mod, 1.0), np.eye(c)[0])
    mu = np.broadcast_to((unit * conj)[..., None, :], q.shape)
    if c == 2:
        return np.stack([q[..., 0] * mu[..., 0] - q[..., 1] * mu[..., 1],
                         q[..., 0] * mu[..., 1] + q[..., 1] * mu[..., 0]], axis=-1)
    # q * mu written as conj(conj(q)) * mu
    return quaternion_conj_mul(q * conj, mu)


def geodesic_distance(space, p, q):
    """Normalized geodesic distance in [0, pi]; broadcasts over leading axes.

    Sphere: arccos <p, q>.  Projective: 2 arccos |<p, q>|.  Both are
    evaluated through the chord length, which stays accurate near 0.
    """
    p, q = np.broadcast_arrays(*_check_points(space, p, q))
    if space.family != SPHERE:
        q = _aligned(p, q)
    diff = p - q
    chord = np.sqrt(np.sum(diff * diff, axis=(-2, -1)))
    angle = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    return angle if space.family == SPHERE else 2.0 * angle


def same_point(space, p, q, atol=1e-10):
    if space.family == SPHERE:
        return bool(np.allclose(np.asarray(p, float).ravel(), np.asarray(q, float).ravel(), atol=atol))
    p, q = _check_points(space, p, q)
    return bool(abs(inner_modulus(p, q) - 1.0) <= atol)


def normalize_point(space, p):
    (p,) = _check_points(space, p)
    norm = np.sqrt(np.sum(p * p, axis=(-2, -1), keepdims=True))
    if np.any(norm == 0):
        raise ValueError("zero vector is not a point")
    return p / norm


def sample_uniform(space, stream, size=None):
    """Uniform point(s): normalized standard Gaussian vectors over the base field."""
    if not space.sampleable:
        raise UnsupportedOperation("uniform sampling on the Cayley plane is not supported")
    shape = space.point_shape if size is None else (int(size),) + space.point_shape
    gen = stream if isinstance(stream, np.random.Generator) else stream.generator()
    g = gen.standard_normal(shape)
    return g / np.sqrt(np.sum(g * g, axis=(-2, -1), keepdims=True))


def basis_point(space, k=0):
    """The k-th coordinate unit vector as a point."""
    shape = space.point_shape
    p = np.zeros(shape)
    p[k, 0] = 1.0
    return p


def distance_density(space, theta):
    """Normalized density of rho(x, U) for uniform U."""
    from scipy.special import betaln

    a, b = space.alpha, space.beta
    t = np.asarray(theta, dtype=float)
    logc = betaln(a + 1, b + 1)
    return np.sin(t / 2) ** (2 * a + 1) * np.cos(t / 2) ** (2 * b + 1) / np.exp(logc)


def distance_cdf(space, theta):
    """CDF of rho(x, U): regularized incomplete beta in sin^2(theta/2)."""
    from scipy.special import betainc

    return betainc(space.alpha + 1, space.beta + 1, np.sin(np.asarray(theta, float) / 2) ** 2)
