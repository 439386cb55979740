"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version. The numba path is used when numba imports cleanly and the
environment variable ``HOMOVAR_NUMBA`` is not set to ``0``. Both paths
compute the same quantities; they are compared against each other in the
test-suite and in ``benchmarks/bench_kernels.py``.
"""
import os

import numpy as np

_FLAG = os.environ.get("HOMOVAR_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "no", "off")

try:
    if not _WANT_NUMBA:
        raise ImportError
    import numba
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"

# elements of the (rows, freqs, points) phase tensor materialised per numpy chunk
_CHUNK = 1 << 21

FOUR_PI = 4.0 * np.pi


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def nudft_numpy(points, weights, freqs):
    points = np.ascontiguousarray(points, dtype=np.float64)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    K = freqs.shape[0]
    N = points.shape[0]
    out = np.empty(K, dtype=np.complex128)
    step = max(1, _CHUNK // max(N, 1))
    for k0 in range(0, K, step):
        phase = freqs[k0:k0 + step] @ points.T
        out[k0:k0 + step] = (np.cos(phase) - 1j * np.sin(phase)) @ weights
    return out


def nudft_batch_numpy(points, freqs):
    points = np.ascontiguousarray(points, dtype=np.float64)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    R, N, _ = points.shape
    K = freqs.shape[0]
    out = np.empty((R, K), dtype=np.complex128)
    step = max(1, _CHUNK // max(N * K, 1))
    for r0 in range(0, R, step):
        phase = np.einsum("kd,rnd->rkn", freqs, points[r0:r0 + step])
        out[r0:r0 + step] = (np.cos(phase) - 1j * np.sin(phase)).sum(axis=2) / N
    return out


def legendre_table_numpy(ct, st, lmax):
    """Orthonormalised associated Legendre values y_l^m(cos theta), m >= 0.

    Returns an ``(n, lmax+1, lmax+1)`` array indexed ``[point, l, m]`` with
    the Condon-Shortley phase and the factor sqrt((2l+1)/(4pi) (l-m)!/(l+m)!)
    folded in, so that Y_l^m = y_l^m e^{i m phi}.
    """
    ct = np.asarray(ct, dtype=np.float64)
    st = np.asarray(st, dtype=np.float64)
    n = ct.shape[0]
    y = np.zeros((n, lmax + 1, lmax + 1))
    y[:, 0, 0] = 1.0 / np.sqrt(FOUR_PI)
    for m in range(1, lmax + 1):
        y[:, m, m] = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * y[:, m - 1, m - 1]
    for m in range(0, lmax):
        y[:, m + 1, m] = np.sqrt(2.0 * m + 3.0) * ct * y[:, m, m]
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            y[:, l, m] = a * (ct * y[:, l - 1, m] - b * y[:, l - 2, m])
    return y


def sh_table_numpy(ct, st, phi, lmax):
    y = legendre_table_numpy(ct, st, lmax)
    n = y.shape[0]
    out = np.empty((n, (lmax + 1) ** 2), dtype=np.complex128)
    for m in range(0, lmax + 1):
        e = np.exp(1j * m * phi)
        sign = -1.0 if m % 2 else 1.0
        for l in range(m, lmax + 1):
            pos = y[:, l, m] * e
            out[:, l * l + l + m] = pos
            if m:
                out[:, l * l + l - m] = sign * np.conj(pos)
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def nudft_numba(points, weights, freqs):
        K, d = freqs.shape
        N = points.shape[0]
        out = np.empty(K, dtype=np.complex128)
        for k in range(K):
            re = 0.0
            im = 0.0
            for j in range(N):
                ph = 0.0
                for a in range(d):
                    ph += freqs[k, a] * points[j, a]
                c = np.cos(ph)
                s = np.sin(ph)
                wr = weights[j].real
                wi = weights[j].imag
                # w * e^{-i ph}
                re += wr * c + wi * s
                im += wi * c - wr * s
            out[k] = complex(re, im)
        return out

    @numba.njit(cache=True, nogil=True)
    def nudft_batch_numba(points, freqs):
        R, N, d = points.shape
        K = freqs.shape[0]
        out = np.empty((R, K), dtype=np.complex128)
        for r in range(R):
            for k in range(K):
                re = 0.0
                im = 0.0
                for j in range(N):
                    ph = 0.0
                    for a in range(d):
                        ph += freqs[k, a] * points[r, j, a]
                    re += np.cos(ph)
                    im -= np.sin(ph)
                out[r, k] = complex(re / N, im / N)
        return out

    @numba.njit(cache=True, nogil=True)
    def sh_table_numba(ct, st, phi, lmax):
        n = ct.shape[0]
        nc = (lmax + 1) * (lmax + 1)
        out = np.empty((n, nc), dtype=np.complex128)
        y = np.empty((lmax + 1, lmax + 1))
        inv = 1.0 / np.sqrt(FOUR_PI)
        for p in range(n):
            x = ct[p]
            s = st[p]
            y[0, 0] = inv
            for m in range(1, lmax + 1):
                y[m, m] = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * y[m - 1, m - 1]
            for m in range(0, lmax):
                y[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * y[m, m]
                for l in range(m + 2, lmax + 1):
                    a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                    b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                    y[l, m] = a * (x * y[l - 1, m] - b * y[l - 2, m])
            for m in range(0, lmax + 1):
                c = np.cos(m * phi[p])
                sn = np.sin(m * phi[p])
                sign = -1.0 if m % 2 else 1.0
                for l in range(m, lmax + 1):
                    v = y[l, m]
                    out[p, l * l + l + m] = complex(v * c, v * sn)
                    if m > 0:
                        out[p, l * l + l - m] = complex(sign * v * c, -sign * v * sn)
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def nudft(points, weights, freqs):
    """``out[k] = sum_j weights[j] * exp(-i <freqs[k], points[j]>)``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    if points.ndim != 2 or freqs.ndim != 2 or points.shape[1] != freqs.shape[1]:
        raise ValueError("points (N, d) and freqs (K, d) must share d")
    if HAS_NUMBA:
        return nudft_numba(points, weights, freqs)
    return nudft_numpy(points, weights, freqs)


def nudft_batch(points, freqs):
    """Delta-average transforms of R patterns: ``out[r, k] = mean_j exp(-i <q_k, p_rj>)``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    if points.ndim != 3 or freqs.ndim != 2 or points.shape[2] != freqs.shape[1]:
        raise ValueError("points (R, N, d) and freqs (K, d) must share d")
    if HAS_NUMBA:
        return nudft_batch_numba(points, freqs)
    return nudft_batch_numpy(points, freqs)


def sh_table(ct, st, phi, lmax):
    """Complex orthonormal Y_l^m at n points; column ``l*l + l + m``."""
    ct = np.ascontiguousarray(ct, dtype=np.float64)
    st = np.ascontiguousarray(st, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    lmax = int(lmax)
    if HAS_NUMBA:
        return sh_table_numba(ct, st, phi, lmax)
    return sh_table_numpy(ct, st, phi, lmax)
