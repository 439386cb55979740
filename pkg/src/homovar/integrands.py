"""Analytically known integrands, addressable from JSON configs.

An integrand spec is ``{"kind": ..., **params}``. Torus and sphere kinds
resolve to coefficient objects (``BandlimitedTorusFunction`` /
``SphericalSpectrum``); Euclidean kinds resolve to ``WindowIntegrand``
objects that carry a closed-form Fourier transform.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import euclidean, sphere, torus

TWO_PI = 2.0 * np.pi


class IntegrandError(ValueError):
    pass


def _params(spec, allowed):
    extra = set(spec) - set(allowed) - {"kind"}
    if extra:
        raise IntegrandError(f"unknown integrand parameters for {spec['kind']!r}: {sorted(extra)}")
    return {k: spec[k] for k in allowed if k in spec}


# ---------------------------------------------------------------------------
# torus
# ---------------------------------------------------------------------------

def torus_constant(d, value=1.0):
    c = np.array([complex(value) * TWO_PI ** (d / 2)])
    return torus.BandlimitedTorusFunction(d, 0, c, real=np.isreal(value))


def torus_cos(d, frequency=None, amplitude=1.0, phase=0.0):
    """amplitude * cos(<k, p> + phase)."""
    k = np.ones(d, dtype=np.int64) if frequency is None else np.asarray(frequency, dtype=np.int64)
    if k.shape != (d,):
        raise IntegrandError("frequency length must equal d")
    L = int(np.abs(k).max())
    c = np.zeros((2 * L + 1) ** d, dtype=np.complex128)
    shape = (2 * L + 1,) * d
    half = amplitude * TWO_PI ** (d / 2) / 2
    c[np.ravel_multi_index(tuple(k + L), shape)] += half * np.exp(1j * phase)
    c[np.ravel_multi_index(tuple(-k + L), shape)] += half * np.exp(-1j * phase)
    return torus.BandlimitedTorusFunction(d, L, c, real=True)


def torus_trig(d, coefficients):
    """Explicit coefficients: list of ``[lam_1, ..., lam_d, re, im]``."""
    rows = [list(r) for r in coefficients]
    if any(len(r) != d + 2 for r in rows):
        raise IntegrandError("each coefficient row is d integers then re, im")
    L = max(int(max(abs(int(v)) for v in r[:d])) for r in rows) if rows else 0
    c = np.zeros((2 * L + 1) ** d, dtype=np.complex128)
    for r in rows:
        lam = np.array(r[:d], dtype=np.int64)
        c[np.ravel_multi_index(tuple(lam + L), (2 * L + 1,) * d)] += complex(r[d], r[d + 1])
    f = torus.BandlimitedTorusFunction(d, L, c)
    return torus.BandlimitedTorusFunction(d, L, c, real=f.conjugate_symmetric())


def torus_exp_cos(d, scale=1.0, L=24):
    """prod_a exp(scale cos p_a): coefficients (2pi)^(d/2) prod_a I_{k_a}(scale).

    The tail uses sum_k I_k(a)^2 = I_0(2a).
    """
    k = torus.torus_frequencies(d, L)
    c = TWO_PI ** (d / 2) * np.prod(special.iv(k, scale), axis=1)
    total = TWO_PI ** d * special.iv(0, 2 * scale) ** d
    tail = max(total - float(np.sum(np.abs(c) ** 2)), 0.0)
    return torus.BandlimitedTorusFunction(d, L, c.astype(np.complex128), real=True, tail=tail)


# ---------------------------------------------------------------------------
# sphere
# ---------------------------------------------------------------------------

def sphere_constant(value=1.0):
    return sphere.SphericalSpectrum(0, [complex(value) * np.sqrt(4 * np.pi)])


def sphere_ylm(l, m):
    return sphere.harmonic(int(l), int(m))


def sphere_exp_z(scale=1.0, lmax=24):
    """exp(scale z) = sum_l sqrt(4pi (2l+1)) i_l(scale) Y_l^0."""
    l = np.arange(lmax + 1)
    c = np.zeros(sphere.n_coeffs(lmax), dtype=np.complex128)
    c[l * l + l] = np.sqrt(4 * np.pi * (2 * l + 1)) * special.spherical_in(l, scale)
    total = 2 * np.pi * np.sinh(2 * scale) / scale
    tail = max(total - float(np.sum(np.abs(c) ** 2)), 0.0)
    return sphere.SphericalSpectrum(lmax, c, tail=tail)


# ---------------------------------------------------------------------------
# euclidean window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowIntegrand:
    """A function on R^d that is (numerically) supported inside the window."""

    name: str
    d: int
    func: Callable
    transform: Callable

    def evaluate(self, points):
        pts = np.asarray(getattr(points, "points", points), dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        return np.asarray(self.func(pts), dtype=np.complex128)

    def __call__(self, points):
        return self.evaluate(points)

    def integral(self):
        return complex(self.transform(np.zeros((1, self.d)))[0])

    def mean_value(self, window):
        return self.integral() / window.volume

    def radial_power(self, shells, order=64):
        return euclidean.transform_radial_power(self.transform, self.d, shells, order)


def mexican_hat(d, sigma, center):
    """(1 - r^2/(d sigma^2)) exp(-r^2 / (2 sigma^2)); zero integral, isotropic."""
    c = np.asarray(center, dtype=np.float64)

    def func(p):
        r2 = np.sum((p - c) ** 2, axis=1)
        return (1 - r2 / (d * sigma ** 2)) * np.exp(-r2 / (2 * sigma ** 2))

    def transform(q):
        q = np.atleast_2d(q)
        q2 = np.sum(q * q, axis=1)
        amp = (TWO_PI * sigma ** 2) ** (d / 2) * (sigma ** 2 * q2 / d) * np.exp(-sigma ** 2 * q2 / 2)
        return amp * np.exp(-1j * (q @ c))

    return WindowIntegrand("mexican_hat", d, func, transform)


def gabor(d, sigma, center, frequency, phase=0.0):
    """exp(-r^2 / (2 sigma^2)) cos(<w, p - c> + phase)."""
    c = np.asarray(center, dtype=np.float64)
    w = np.asarray(frequency, dtype=np.float64)

    def func(p):
        x = p - c
        return np.exp(-np.sum(x * x, axis=1) / (2 * sigma ** 2)) * np.cos(x @ w + phase)

    def transform(q):
        q = np.atleast_2d(q)
        g = lambda u: (TWO_PI * sigma ** 2) ** (d / 2) * np.exp(-sigma ** 2 * np.sum(u * u, axis=1) / 2)
        val = 0.5 * (np.exp(1j * phase) * g(q - w) + np.exp(-1j * phase) * g(q + w))
        return val * np.exp(-1j * (q @ c))

    return WindowIntegrand("gabor", d, func, transform)


def box(d, T):
    """Indicator of [0, T)^d."""

    def func(p):
        return np.all((p >= 0) & (p < T), axis=1).astype(np.float64)

    def transform(q):
        q = np.atleast_2d(q)
        out = np.ones(q.shape[0], dtype=np.complex128)
        for a in range(d):
            qa = q[:, a]
            small = np.abs(qa) < 1e-12
            safe = np.where(small, 1.0, qa)
            out *= np.where(small, T, (np.exp(-1j * safe * T) - 1) / (-1j * safe))
        return out

    return WindowIntegrand("box", d, func, transform)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def build(domain, spec, d=1, window=None):
    """Resolve an integrand spec for a domain."""
    if "kind" not in spec:
        raise IntegrandError("integrand spec needs a 'kind'")
    kind = spec["kind"]
    if domain == "torus":
        if kind == "constant":
            return torus_constant(d, **_params(spec, ["value"]))
        if kind == "cos":
            return torus_cos(d, **_params(spec, ["frequency", "amplitude", "phase"]))
        if kind == "trig":
            return torus_trig(d, **_params(spec, ["coefficients"]))
        if kind == "exp_cos":
            return torus_exp_cos(d, **_params(spec, ["scale", "L"]))
    elif domain == "sphere":
        if kind == "constant":
            return sphere_constant(**_params(spec, ["value"]))
        if kind == "ylm":
            return sphere_ylm(**_params(spec, ["l", "m"]))
        if kind == "exp_z":
            return sphere_exp_z(**_params(spec, ["scale", "lmax"]))
    elif domain == "euclidean":
        if window is None:
            raise IntegrandError("euclidean integrands need a window")
        p = None
        if kind == "mexican_hat":
            p = _params(spec, ["sigma", "center"])
            return mexican_hat(d, p.get("sigma", window.T / 12),
                               p.get("center", [window.T / 2] * d))
        if kind == "gabor":
            p = _params(spec, ["sigma", "center", "frequency", "phase"])
            return gabor(d, p.get("sigma", window.T / 10), p.get("center", [window.T / 2] * d),
                         p.get("frequency", [1.0] * d), p.get("phase", 0.0))
        if kind == "box":
            _params(spec, [])
            return box(d, window.T)
    else:
        raise IntegrandError(f"unknown domain {domain!r}")
    raise IntegrandError(f"unknown integrand kind {kind!r} for domain {domain!r}")
