"""Spherical harmonic analysis on S^2 and uniform rotations.

Complex orthonormal harmonics with the Condon-Shortley phase:
Y_l^m(theta, phi) = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(cos theta) e^{i m phi},
stored flat at column ``l*l + l + m``.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .spectra import BlockLabel, PowerByBlock, SpectralCoefficients, predict_variance

FOUR_PI = 4.0 * np.pi
UNIT_TOL = 1e-12


def sh_index(l, m):
    return l * l + l + m


def n_coeffs(lmax):
    return (lmax + 1) ** 2


def _points(pattern):
    pts = np.asarray(getattr(pattern, "points", pattern), dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[-1] != 3:
        raise ValueError("sphere points are 3-vectors")
    return pts


def check_unit(points, tol=UNIT_TOL):
    norms = np.linalg.norm(points, axis=1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ValueError("sphere points must be unit vectors")
    return points


def normalize(points):
    points = np.asarray(points, dtype=np.float64)
    return points / np.linalg.norm(points, axis=-1, keepdims=True)


def to_spherical(points):
    """(cos theta, sin theta, phi) with colatitude theta and longitude phi in [0, 2pi)."""
    pts = _points(points)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    rho = np.hypot(x, y)
    r = np.hypot(rho, z)
    return z / r, rho / r, np.mod(np.arctan2(y, x), 2 * np.pi)


def from_spherical(theta, phi):
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=np.float64),
                                     np.asarray(phi, dtype=np.float64))
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def sh_matrix(points, lmax):
    """Y_l^m at every point, shape (N, (lmax+1)^2)."""
    ct, st, phi = to_spherical(points)
    return _kernels.sh_table(ct, st, phi, lmax)


def eval_sh(l, m, points):
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid degree/order ({l}, {m})")
    return sh_matrix(points, l)[:, sh_index(l, m)]


@dataclass(frozen=True)
class SphericalSpectrum:
    """Coefficients F_l^m for l <= lmax; ``tail`` is the L2 mass above lmax if known."""

    lmax: int
    coeffs: np.ndarray
    tail: float | None = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size != n_coeffs(self.lmax):
            raise ValueError("need (lmax+1)^2 coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def degree(self, l):
        return self.coeffs[l * l:(l + 1) ** 2]

    def coefficient(self, l, m):
        if l > self.lmax:
            return 0j
        return complex(self.coeffs[sh_index(l, m)])

    def degree_power(self):
        return np.array([np.sum(np.abs(self.degree(l)) ** 2) for l in range(self.lmax + 1)])

    def power(self):
        return power_block(self.lmax, self.degree_power(), tail=self.tail)

    def spectral_coefficients(self):
        blocks = {BlockLabel("sphere", (l,)): self.degree(l) for l in range(self.lmax + 1)}
        return SpectralCoefficients("sphere", blocks, self.lmax, BlockLabel.trivial("sphere"))

    def evaluate(self, points):
        return sh_matrix(points, self.lmax) @ self.coeffs

    def __call__(self, points):
        return self.evaluate(points)

    def mean_value(self):
        return self.coeffs[0] / np.sqrt(FOUR_PI)

    def restrict(self, lmax):
        new = np.zeros(n_coeffs(lmax), dtype=np.complex128)
        keep = min(lmax, self.lmax)
        new[:n_coeffs(keep)] = self.coeffs[:n_coeffs(keep)]
        dropped = float(np.sum(np.abs(self.coeffs[n_coeffs(keep):]) ** 2))
        tail = None if self.tail is None else self.tail + dropped
        return SphericalSpectrum(lmax, new, tail=tail)

    def scaled(self, c):
        return SphericalSpectrum(self.lmax, c * self.coeffs,
                                 tail=None if self.tail is None else abs(c) ** 2 * self.tail)


def harmonic(l, m, lmax=None):
    lmax = l if lmax is None else lmax
    c = np.zeros(n_coeffs(lmax), dtype=np.complex128)
    c[sh_index(l, m)] = 1.0
    return SphericalSpectrum(lmax, c)


def power_block(lmax, power, tail=None, stderr=None):
    labels = tuple(BlockLabel("sphere", (l,)) for l in range(lmax + 1))
    dims = 2.0 * np.arange(lmax + 1) + 1.0
    return PowerByBlock("sphere", labels, power, dims, lmax, BlockLabel.trivial("sphere"),
                        tail=tail, stderr=stderr)


def pattern_coefficients_sphere(pattern, lmax):
    """S_l^m = (1/N) sum_j conj(Y_l^m(s_j))."""
    pts = check_unit(_points(pattern))
    if pts.shape[0] < 1:
        raise ValueError("empty pattern")
    return SphericalSpectrum(lmax, sh_matrix(pts, lmax).conj().mean(axis=0), tail=None)


def pattern_power_sphere(pattern, lmax):
    return pattern_coefficients_sphere(pattern, lmax).power()


def quadrature_grid(n_theta, n_phi):
    """Gauss-Legendre in cos(theta) times the trapezoid rule in phi."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(x)
    pts = from_spherical(theta[:, None], phi[None, :]).reshape(-1, 3)
    weights = np.repeat(w * (2 * np.pi / n_phi), n_phi)
    return pts, weights


def function_coefficients_sphere(f, lmax, Q, n_phi=None):
    """F_l^m = <f, Y_l^m> by product quadrature with Q nodes in theta.

    Exact for band-limited f of degree <= lmax when Q >= lmax + 1 and
    ``n_phi`` >= 2 lmax + 1 (default 2Q - 1).
    """
    n_phi = 2 * Q - 1 if n_phi is None else n_phi
    if Q < lmax + 1 or n_phi < 2 * lmax + 1:
        raise ValueError(f"quadrature ({Q}, {n_phi}) too coarse for lmax={lmax}")
    pts, w = quadrature_grid(Q, n_phi)
    vals = np.asarray(f(pts), dtype=np.complex128)
    Y = sh_matrix(pts, lmax)
    return SphericalSpectrum(lmax, Y.conj().T @ (w * vals), tail=None)


def mc_estimate_sphere(f, pattern):
    pts = check_unit(_points(pattern))
    return complex(np.mean(f(pts)))


def sphere_variance_formula(F, E_S):
    for p in (F, E_S):
        if p.domain != "sphere":
            raise ValueError("sphere formula needs sphere spectra")
    if F.truncation != E_S.truncation:
        raise ValueError(f"lmax mismatch: {F.truncation} vs {E_S.truncation}")
    return predict_variance(F, E_S)


def iid_expected_power_sphere(lmax, N):
    """E sum_m |S_l^m|^2 = (2l+1) / (4 pi N) for l >= 1 (addition theorem)."""
    l = np.arange(lmax + 1)
    p = (2.0 * l + 1.0) / (FOUR_PI * N)
    p[0] = 1.0 / FOUR_PI
    return power_block(lmax, p)


# ---------------------------------------------------------------------------
# rotations
# ---------------------------------------------------------------------------

def random_quaternion(rng):
    """Uniform unit quaternion (w, x, y, z) by Shoemake's subgroup construction."""
    u1, u2, u3 = rng.random(3)
    a, b = np.sqrt(1.0 - u1), np.sqrt(u1)
    t2, t3 = 2 * np.pi * u2, 2 * np.pi * u3
    return np.array([b * np.cos(t3), a * np.sin(t2), a * np.cos(t2), b * np.sin(t3)])


def quat_to_matrix(q):
    w, x, y, z = np.asarray(q, dtype=np.float64) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotate(points, q):
    return _points(points) @ quat_to_matrix(q).T


def fibonacci_sphere(N):
    """Spherical Fibonacci point set with N points."""
    i = np.arange(N) + 0.5
    z = 1.0 - 2.0 * i / N
    golden = np.pi * (3.0 - np.sqrt(5.0))
    phi = np.mod(golden * np.arange(N), 2 * np.pi)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return normalize(np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1))
