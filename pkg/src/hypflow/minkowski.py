"""Linear algebra over Minkowski 3-space and the hyperboloid isometry group.

The ambient space is R^3 with the quadratic form eta = diag(1, 1, -1) and
coordinates (x, y, z).  Hyperbolic 2-space is the upper sheet (z >= 1) of
x^2 + y^2 - z^2 = -1.  The proper orthochronous group SO+(2,1) preserves
the sheet; its one-parameter subgroups are generated by boosts in the x
and y directions and rotations about the z axis.

Vectors are plain numpy arrays of shape (3,); isometries are 3x3 arrays.
Every function here is pure, so everything is safe to share across threads.

Orientation convention for moving frames (T, N, X) along hyperboloid
curves: N = eta (T x X), where x is the Euclidean cross product.  With
this choice {T, N, -X} is right-handed, i.e. det[T N X] = -1.  It is the
unique choice under which a curve of positive geodesic curvature bends
toward +N and the horocycle identities (tau, nu, mu) = (1, -s, s) hold.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DegenerateFrame, NotOrthonormal, ZeroVector

ETA = np.diag([1.0, 1.0, -1.0])
ETA.setflags(write=False)

TOL_GROUP = 1e-10
TOL_CONSTRAINT = 1e-10
TOL_CAUSAL = 1e-9


class CausalType(Enum):
    SPACELIKE = "SPACELIKE"
    TIMELIKE = "TIMELIKE"
    NULL = "NULL"


def vec(x, y, z):
    """Build a Minkowski vector as a float array."""
    return np.array([float(x), float(y), float(z)])


def inner(u, w):
    """Minkowski inner product <u, w> = u_x w_x + u_y w_y - u_z w_z.

    Accepts stacked arrays; the product is taken over the last axis.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    return u[..., 0] * w[..., 0] + u[..., 1] * w[..., 1] - u[..., 2] * w[..., 2]


def minkowski_cross(u, w):
    """eta-twisted cross product eta (u x w).

    For eta-orthonormal T (unit spacelike) and X (unit future-timelike)
    this returns the unit principal normal completing the frame in the
    package orientation convention.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.cross(u, w) * np.array([1.0, 1.0, -1.0])


def hyperbolic_distance(p, q):
    """Geodesic distance between hyperboloid points: arccosh(-<p, q>)."""
    c = -inner(p, q)
    return np.arccosh(np.maximum(c, 1.0))


def causal_type(v, tol=TOL_CAUSAL):
    """Classify v by the sign of <v, v> with a symmetric null band of width tol.

    Raises ZeroVector for the zero vector.  Callers classifying user input
    should surface a NULL verdict instead of snapping it to a side.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ZeroVector("cannot classify the zero vector")
    q = inner(v, v)
    if q > tol:
        return CausalType.SPACELIKE
    if q < -tol:
        return CausalType.TIMELIKE
    return CausalType.NULL


# ---------------------------------------------------------------------------
# group elements and generators
# ---------------------------------------------------------------------------

def boost_x(zeta):
    """Boost in the x direction by rapidity zeta."""
    ch, sh = math.cosh(zeta), math.sinh(zeta)
    return np.array([[ch, 0.0, -sh], [0.0, 1.0, 0.0], [-sh, 0.0, ch]])


def boost_y(xi):
    """Boost in the y direction by rapidity xi."""
    ch, sh = math.cosh(xi), math.sinh(xi)
    return np.array([[1.0, 0.0, 0.0], [0.0, ch, -sh], [0.0, -sh, ch]])


def rot_z(theta):
    """Rotation about the z axis by angle theta."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


_GENERATORS = {
    "boost_x": np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]),
    "boost_y": np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]]),
    "rot_z": np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
}


def generator(kind):
    """Lie-algebra generator for kind in {'boost_x', 'boost_y', 'rot_z'}."""
    try:
        return _GENERATORS[kind].copy()
    except KeyError:
        raise ValueError(f"unknown generator kind {kind!r}") from None


class GeneratorVelocity(NamedTuple):
    """Rates (zeta_dot, xi_dot, theta_dot) of the Euler-angle factors."""

    zeta_dot: float
    xi_dot: float
    theta_dot: float


def velocity_to_vtilde(g):
    """Map rates to the axis vector v~ = (zeta_dot, -xi_dot, theta_dot)."""
    return np.array([g[0], -g[1], g[2]], dtype=float)


def vtilde_to_velocity(vtilde):
    """Inverse of velocity_to_vtilde; exact round trip."""
    v = np.asarray(vtilde, dtype=float)
    return GeneratorVelocity(v[0], -v[1], v[2])


def generator_matrix_of(vtilde):
    """Velocity matrix B of the isometry family with axis vector v~.

    B = [[0, -theta_dot, -xi_dot],
         [theta_dot, 0, -zeta_dot],
         [-xi_dot, -zeta_dot, 0]]

    eta B is antisymmetric, and B^3 = <v~, v~> B, which drives the
    closed-form exponential in one_parameter_subgroup.
    """
    zd, xd, td = vtilde_to_velocity(vtilde)
    return np.array([[0.0, -td, -xd], [td, 0.0, -zd], [-xd, -zd, 0.0]])


def _exp_coeffs(x):
    # c1 = sum x^k/(2k+1)!, c2 = sum x^k/(2k+2)!; smooth across x = 0
    if abs(x) < 1e-6:
        return 1.0 + x / 6.0 + x * x / 120.0, 0.5 + x / 24.0 + x * x / 720.0
    if x > 0.0:
        w = math.sqrt(x)
        return math.sinh(w) / w, (math.cosh(w) - 1.0) / x
    w = math.sqrt(-x)
    return math.sin(w) / w, (1.0 - math.cos(w)) / (-x)


def one_parameter_subgroup(vtilde, t):
    """exp(t B) for B = generator_matrix_of(vtilde), in closed form.

    Uses B^3 = q B with q = <v~, v~>: trigonometric for timelike axes,
    hyperbolic for spacelike ones, and the exact quadratic polynomial
    I + tB + t^2 B^2 / 2 in the parabolic (null) case.
    """
    vtilde = np.asarray(vtilde, dtype=float)
    B = generator_matrix_of(vtilde)
    q = float(inner(vtilde, vtilde))
    c1, c2 = _exp_coeffs(q * t * t)
    return np.eye(3) + (t * c1) * B + (t * t * c2) * (B @ B)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def lorentz_defect(m):
    """Max-norm of m^T eta m - eta."""
    m = np.asarray(m, dtype=float)
    return float(np.abs(m.T @ ETA @ m - ETA).max())


def check_lorentz(m, tol=TOL_GROUP):
    """Validate m as proper orthochronous; raises NotOrthonormal."""
    m = np.asarray(m, dtype=float)
    d = lorentz_defect(m)
    if d > tol:
        raise NotOrthonormal(f"m^T eta m - eta defect {d:.3e} exceeds {tol:.1e}")
    det = float(np.linalg.det(m))
    if abs(det - 1.0) > tol:
        raise NotOrthonormal(f"det {det} != 1")
    if m[2, 2] < 1.0 - tol:
        raise NotOrthonormal(f"not orthochronous: m33 = {m[2, 2]}")
    return m


def check_hyperboloid_point(p, tol=TOL_CONSTRAINT):
    """Validate p on the upper sheet x^2+y^2-z^2 = -1; raises ValueError."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite components")
    r = float(inner(p, p) + 1.0)
    if abs(r) > tol:
        raise ValueError(f"hyperboloid constraint residual {r:.3e} exceeds {tol:.1e}")
    if p[2] < 1.0 - tol:
        raise ValueError(f"point not on the upper sheet: z = {p[2]}")
    return p


def basis_defect(T, N, X):
    """Max deviation of (T, N, X) from eta-orthonormality (signature +,+,-)."""
    vals = (
        inner(T, T) - 1.0,
        inner(N, N) - 1.0,
        inner(X, X) + 1.0,
        inner(T, N),
        inner(T, X),
        inner(N, X),
    )
    return float(max(abs(v) for v in vals))


# ---------------------------------------------------------------------------
# frame repair and Euler decomposition
# ---------------------------------------------------------------------------

def reorthonormalize(T, N, X):
    """eta Gram-Schmidt repair of a drifted frame; idempotent.

    X is normalized first (to <X, X> = -1, z > 0), then T is projected
    eta-orthogonal to X and normalized, and N is forced to eta (T x X)
    so the result is exactly orthonormal in the package orientation.
    Raises DegenerateFrame when a normalization denominator is < 1e-6.
    """
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    xx = -inner(X, X)
    if xx < 1e-12:
        raise DegenerateFrame("X is not timelike enough to normalize")
    X = X / math.sqrt(xx)
    if X[2] < 0:
        X = -X
    T = T + inner(T, X) * X
    tt = inner(T, T)
    if tt < 1e-12:
        raise DegenerateFrame("T degenerate after projection")
    T = T / math.sqrt(tt)
    N = minkowski_cross(T, X)
    return T, N, X


def euler_decompose(basis_from, basis_to, tol=TOL_GROUP):
    """Euler angles (zeta, xi, theta) with A1(zeta) A2(xi) A3(theta) mapping one basis to the other.

    Both arguments are 3x3 matrices whose columns form eta-orthonormal
    bases with future-timelike third column and equal orientation.  Only
    the frame map is pinned down; the parameters themselves are whatever
    this particular factorization produces.
    """
    mf = np.asarray(basis_from, dtype=float)
    mt = np.asarray(basis_to, dtype=float)
    for m in (mf, mt):
        d = float(np.abs(m.T @ ETA @ m - ETA).max())
        if d > 1e-8:
            raise NotOrthonormal(f"input basis defect {d:.3e}")
        if m[2, 2] <= 0:
            raise NotOrthonormal("third basis vector is not future-timelike")
    # A = mt mf^{-1}, with mf^{-1} = eta mf^T eta for eta-orthonormal columns
    A = mt @ (ETA @ mf.T @ ETA)
    if np.linalg.det(A) < 0:
        raise NotOrthonormal("bases have opposite orientations")
    # third column of A1 A2 A3 is (-sh z ch x, -sh x, ch z ch x)
    xi = math.asinh(-A[1, 2])
    chx = math.cosh(xi)
    zeta = math.asinh(-A[0, 2] / chx)
    R = boost_y(-xi) @ boost_x(-zeta) @ A
    theta = math.atan2(R[1, 0], R[0, 0])
    D = boost_x(zeta) @ boost_y(xi) @ rot_z(theta)
    # hyperbolic functions amplify rounding by ~|A|, so scale the guard
    scale = (1.0 + float(np.abs(A).max())) * (1.0 + float(np.abs(mf).max()))
    if float(np.abs(D @ mf - mt).max()) > max(tol, 1e-9) * scale:
        raise NotOrthonormal("Euler decomposition failed to reproduce the map")
    return zeta, xi, theta
