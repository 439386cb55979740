"""Fourier analysis on the torus [0, 2pi)^d.

Basis: b_lam(p) = exp(i <p, lam>) / (2pi)^(d/2) for integer lam. Frequencies
are the box ``|lam|_inf <= L`` enumerated in lexicographic order.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .spectra import BlockLabel, PowerByBlock, SpectralCoefficients, predict_variance

TWO_PI = 2.0 * np.pi


def _points(pattern):
    pts = getattr(pattern, "points", pattern)
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def wrap(points):
    return np.mod(points, TWO_PI)


def torus_frequencies(d, L):
    """All lam in Z^d with max |lam_a| <= L, shape ((2L+1)^d, d)."""
    if d < 1 or L < 0:
        raise ValueError("need d >= 1 and L >= 0")
    axes = np.indices((2 * L + 1,) * d).reshape(d, -1).T - L
    return np.ascontiguousarray(axes, dtype=np.int64)


def frequency_labels(d, L):
    return tuple(BlockLabel("torus", tuple(k)) for k in torus_frequencies(d, L))


def trivial_index(d, L):
    # lexicographic position of the origin in the box
    return ((2 * L + 1) ** d - 1) // 2


def pattern_coefficient_array(pattern, L):
    """S_lam = (2pi)^(-d/2) (1/N) sum_j exp(-i <lam, s_j>) for every lam in the box."""
    pts = _points(pattern)
    N, d = pts.shape
    if N < 1:
        raise ValueError("empty pattern")
    freqs = torus_frequencies(d, L).astype(np.float64)
    w = np.full(N, 1.0 / N, dtype=np.complex128)
    return _kernels.nudft(pts, w, freqs) / TWO_PI ** (d / 2)


def pattern_coefficients(pattern, L):
    pts = _points(pattern)
    d = pts.shape[1]
    c = pattern_coefficient_array(pts, L)
    blocks = dict(zip(frequency_labels(d, L), c[:, None]))
    return SpectralCoefficients("torus", blocks, L, BlockLabel.trivial("torus", d))


def pattern_power(pattern, L):
    pts = _points(pattern)
    d = pts.shape[1]
    c = pattern_coefficient_array(pts, L)
    return power_block(d, L, np.abs(c) ** 2)


def power_block(d, L, power, tail=None, stderr=None):
    labels = frequency_labels(d, L)
    return PowerByBlock("torus", labels, power, np.ones(len(labels)), L,
                        BlockLabel.trivial("torus", d), tail=tail, stderr=stderr)


@dataclass(frozen=True)
class BandlimitedTorusFunction:
    """Trigonometric polynomial given by its coefficients on the box ``|lam|_inf <= L``.

    ``tail`` is the squared L2 mass of the function outside the box when it is
    known analytically (0 for genuinely band-limited functions).
    """

    d: int
    L: int
    coeffs: np.ndarray
    real: bool = False
    tail: float | None = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.size != (2 * self.L + 1) ** self.d:
            raise ValueError("coefficient count does not match (2L+1)^d")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def freqs(self):
        return torus_frequencies(self.d, self.L)

    def coefficient(self, lam):
        lam = np.atleast_1d(lam)
        if np.any(np.abs(lam) > self.L):
            return 0j
        flat = np.ravel_multi_index(tuple(lam + self.L), (2 * self.L + 1,) * self.d)
        return complex(self.coeffs[flat])

    def evaluate(self, points):
        pts = _points(points)
        if pts.shape[1] != self.d:
            raise ValueError(f"points are {pts.shape[1]}-dimensional, function is {self.d}-dimensional")
        # sum_lam c_lam exp(+i <lam, p>) = nudft over "points" lam at frequencies -p
        vals = _kernels.nudft(self.freqs.astype(np.float64), self.coeffs, -pts)
        return vals / TWO_PI ** (self.d / 2)

    def __call__(self, points):
        return self.evaluate(points)

    def mean_value(self):
        """(1/|Omega|) * integral, the quantity an MC average converges to."""
        return self.coeffs[trivial_index(self.d, self.L)] / TWO_PI ** (self.d / 2)

    def conjugate_symmetric(self, tol=1e-12):
        return bool(np.allclose(self.coeffs, self.coeffs[::-1].conj(), atol=tol, rtol=0))

    def spectral_coefficients(self):
        blocks = dict(zip(frequency_labels(self.d, self.L), self.coeffs[:, None]))
        return SpectralCoefficients("torus", blocks, self.L, BlockLabel.trivial("torus", self.d))

    def power(self):
        return power_block(self.d, self.L, np.abs(self.coeffs) ** 2, tail=self.tail)

    def restrict(self, L):
        """Same function on the box of bandwidth L; dropped mass moves into ``tail``."""
        new = np.array([self.coefficient(k) for k in torus_frequencies(self.d, L)],
                       dtype=np.complex128)
        outside = np.any(np.abs(self.freqs) > L, axis=1)
        dropped = float(np.sum(np.abs(self.coeffs[outside]) ** 2))
        tail = None if self.tail is None else self.tail + dropped
        return BandlimitedTorusFunction(self.d, L, new, real=self.real, tail=tail)

    def scaled(self, c):
        return BandlimitedTorusFunction(self.d, self.L, c * self.coeffs,
                                        real=self.real and np.isreal(c),
                                        tail=None if self.tail is None else abs(c) ** 2 * self.tail)


def basis_function(lam):
    lam = np.atleast_1d(np.asarray(lam, dtype=np.int64))
    d = lam.size
    L = int(np.abs(lam).max())
    c = np.zeros((2 * L + 1) ** d, dtype=np.complex128)
    c[np.ravel_multi_index(tuple(lam + L), (2 * L + 1,) * d)] = 1.0
    return BandlimitedTorusFunction(d, L, c)


def function_coefficients(f, d, L, M, real=False):
    """Analyse ``f`` on a regular M^d grid with an FFT.

    Exact for trigonometric polynomials of bandwidth <= L provided M > 2L.
    ``f`` takes an (n, d) array of points and returns n values.
    """
    if M <= 2 * L:
        raise ValueError(f"grid resolution M={M} must exceed 2L={2 * L}")
    g = TWO_PI * np.arange(M) / M
    mesh = np.stack(np.meshgrid(*([g] * d), indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.asarray(f(mesh), dtype=np.complex128).reshape((M,) * d)
    spec = np.fft.fftn(vals) * (TWO_PI ** (d / 2) / M ** d)
    idx = np.mod(torus_frequencies(d, L), M)
    coeffs = spec[tuple(idx.T)]
    return BandlimitedTorusFunction(d, L, coeffs, real=real, tail=None)


def mc_estimate(f, pattern):
    """(1/N) sum_i f(s_i)."""
    pts = _points(pattern)
    d = getattr(f, "d", pts.shape[1])
    if pts.shape[1] != d:
        raise ValueError("pattern and integrand dimensions differ")
    return complex(np.mean(f(pts)))


def spectral_dot(f, pattern):
    """sum_lam F_lam conj(S_lam); equals mc_estimate for band-limited f."""
    s = pattern_coefficient_array(pattern, f.L)
    return complex(np.sum(f.coeffs * s.conj()))


def torus_variance_formula(F, E_S):
    for p in (F, E_S):
        if p.domain != "torus":
            raise ValueError("torus formula needs torus spectra")
        if np.any(p.dim != 1):
            raise ValueError("torus blocks are one-dimensional")
    return predict_variance(F, E_S)


# ---------------------------------------------------------------------------
# analytic expected power of the built-in samplers
# ---------------------------------------------------------------------------

def iid_expected_power(d, L, N):
    """E|S_lam|^2 = 1 / (N (2pi)^d) for lam != 0 (cross terms vanish)."""
    p = np.full((2 * L + 1) ** d, 1.0 / (N * TWO_PI ** d))
    p[trivial_index(d, L)] = 1.0 / TWO_PI ** d
    return power_block(d, L, p)


def lattice_expected_power(d, L, N, generator=None):
    """Rank-1 lattice {j g / N}: |S_lam|^2 = (2pi)^-d if <lam, g> = 0 mod N, else 0."""
    g = np.ones(d, dtype=np.int64) if generator is None else np.asarray(generator, dtype=np.int64)
    dots = torus_frequencies(d, L) @ g
    p = np.where(np.mod(dots, N) == 0, 1.0 / TWO_PI ** d, 0.0)
    return power_block(d, L, p)


def jittered_expected_power(d, L, strata):
    """Jittered grid with ``strata[a]`` cells per axis, N = prod(strata).

    E|S_lam|^2 = (1 - |phi(lam)|^2) / (N (2pi)^d) for lam != 0, where
    phi(lam) = prod_a sinc(lam_a / M_a) is the characteristic function of
    the uniform jitter inside one cell.
    """
    strata = np.broadcast_to(np.asarray(strata, dtype=np.int64), (d,))
    N = int(np.prod(strata))
    k = torus_frequencies(d, L)
    phi2 = np.prod(np.sinc(k / strata) ** 2, axis=1)
    p = (1.0 - phi2) / (N * TWO_PI ** d)
    p[trivial_index(d, L)] = 1.0 / TWO_PI ** d
    return power_block(d, L, np.maximum(p, 0.0))
