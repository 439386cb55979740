"""Formal shell-spectrum variance predictor on Euclidean space.

Spectra are radial: for each shell radius lam_k on a uniform grid we keep
the direction-averaged squared transform ``<|F(q)|^2>_{|q|=lam_k}`` together
with the shell size lam^(d-1) |S^(d-1)|, so the shell integral is
``power * size``. Transforms use the unnormalised kernel exp(-i <q, p>);
point patterns are delta averages (weights 1/N).

The non-compact domain is replaced by a box window [0, T)^d. In a periodic
window a point pattern is periodic, so its spectrum lives on the lattice
(2pi/T) Z^d; those lattice powers are deposited onto the shell grid with
linear (hat) weights, the dual of the trapezoid rule used for the radial
integral. Results are flagged FORMAL.
"""
from dataclasses import dataclass
from math import gamma

import numpy as np

from . import _kernels
from .spectra import BlockLabel, PowerByBlock, VariancePrediction, predict_variance

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class EuclideanWindow:
    d: int
    T: float
    periodic: bool = True

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("window dimension must be 1, 2 or 3")
        if not self.T > 0:
            raise ValueError("window side must be positive")

    @property
    def volume(self):
        return float(self.T) ** self.d

    @property
    def spacing(self):
        """Lattice spacing 2pi/T of the periodic window's frequencies."""
        return TWO_PI / self.T

    @property
    def cell(self):
        """Frequency-space volume per lattice point, (2pi)^d / |W|."""
        return self.spacing ** self.d

    def wrap(self, points):
        return np.mod(points, self.T)


@dataclass(frozen=True)
class ShellGrid:
    dlam: float
    K: int

    def __post_init__(self):
        if not self.dlam > 0:
            raise ValueError("shell spacing must be positive")
        if self.K < 1:
            raise ValueError("need at least one non-trivial shell")

    @classmethod
    def covering(cls, lam_max, dlam):
        return cls(float(dlam), int(np.ceil(lam_max / dlam - 1e-9)))

    @property
    def radii(self):
        return np.arange(self.K + 1) * self.dlam

    @property
    def lam_max(self):
        return self.K * self.dlam

    @property
    def weights(self):
        w = np.full(self.K + 1, self.dlam)
        w[0] = w[-1] = 0.5 * self.dlam
        return w

    def refined(self):
        return ShellGrid(self.dlam / 2, 2 * self.K)


def sphere_area(d):
    """|S^(d-1)|: 2, 2pi, 4pi for d = 1, 2, 3."""
    return 2.0 * np.pi ** (d / 2) / gamma(d / 2)


def shell_sizes(shells, d):
    return shells.radii ** (d - 1) * sphere_area(d)


def directions(d, order):
    """Unit directions and weights (summing to 1) for averaging over S^(d-1)."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if d == 2:
        if order < 8:
            raise ValueError("d=2 needs at least 8 directions")
        a = TWO_PI * np.arange(order) / order
        return np.stack([np.cos(a), np.sin(a)], axis=1), np.full(order, 1.0 / order)
    if d == 3:
        if order < 26:
            raise ValueError("d=3 needs at least 26 directions")
        n_theta = int(np.ceil(np.sqrt(order / 2.0)))
        n_phi = 2 * n_theta
        x, w = np.polynomial.legendre.leggauss(n_theta)
        phi = TWO_PI * np.arange(n_phi) / n_phi
        st = np.sqrt(1.0 - x * x)
        dirs = np.stack([
            (st[:, None] * np.cos(phi)[None, :]).ravel(),
            (st[:, None] * np.sin(phi)[None, :]).ravel(),
            np.repeat(x, n_phi),
        ], axis=1)
        return dirs, np.repeat(w / (2.0 * n_phi), n_phi)
    raise ValueError("d must be 1, 2 or 3")


@dataclass(frozen=True)
class RadialSpectrum:
    """Direction-averaged power per shell; ``power[0]`` is the squared DC term.

    ``lattice`` marks spectra built from a periodic lattice: their DC term is
    a point mass at the origin rather than being smeared over small shells.
    """

    d: int
    shells: ShellGrid
    power: np.ndarray
    n_directions: int
    lattice: bool = False
    stderr: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.power, dtype=np.float64).copy()
        if p.shape != (self.shells.K + 1,):
            raise ValueError("one power value per shell node")
        if np.any(p < 0):
            raise ValueError("shell powers must be nonnegative")
        object.__setattr__(self, "power", p)

    @property
    def radii(self):
        return self.shells.radii

    @property
    def shell_size(self):
        return shell_sizes(self.shells, self.d)

    @property
    def dc(self):
        return float(self.power[0])

    def shell_integrals(self):
        """int_{|q|=lam} |F(q)|^2 dq at every node."""
        return self.power * self.shell_size

    def to_csv(self):
        lines = ["lambda,power,shell_size"]
        for lam, p, s in zip(self.radii, self.power, self.shell_size):
            lines.append(f"{lam!r},{p!r},{s!r}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        out = {"d": self.d, "dlam": self.shells.dlam, "K": self.shells.K,
               "n_directions": self.n_directions, "lattice": self.lattice,
               "power": self.power.tolist()}
        if self.stderr is not None:
            out["stderr"] = self.stderr.tolist()
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(obj["d"], ShellGrid(obj["dlam"], obj["K"]), obj["power"], obj["n_directions"],
                   obj.get("lattice", False),
                   None if "stderr" not in obj else np.asarray(obj["stderr"]))


# ---------------------------------------------------------------------------
# building radial spectra
# ---------------------------------------------------------------------------

def lattice_frequencies(window, lam_max):
    """Integer vectors k != 0 with |2pi k / T| <= lam_max."""
    kmax = int(np.floor(lam_max / window.spacing + 1e-9))
    axes = np.indices((2 * kmax + 1,) * window.d).reshape(window.d, -1).T - kmax
    r = np.linalg.norm(axes, axis=1) * window.spacing
    keep = (r <= lam_max * (1 + 1e-12)) & np.any(axes != 0, axis=1)
    return np.ascontiguousarray(axes[keep], dtype=np.int64)


def deposit(window, shells, k, values):
    """Spread lattice powers onto shell nodes with hat weights.

    Returns the direction-averaged power per node implied by treating each
    lattice value as a point mass of weight (2pi/T)^d in frequency space.
    """
    if window.d > 0 and shells.dlam > window.spacing * (1 + 1e-12):
        raise ValueError("periodic windows need dlam <= 2pi/T so no lattice frequency "
                         "falls into the trivial shell")
    r = np.linalg.norm(k, axis=1) * window.spacing / shells.dlam
    i0 = np.floor(r + 1e-12).astype(np.int64)
    frac = np.clip(r - i0, 0.0, 1.0)
    ok = i0 <= shells.K
    i0, frac, vals = i0[ok], frac[ok], np.asarray(values, dtype=np.float64)[ok]
    acc = np.zeros(shells.K + 2)
    np.add.at(acc, i0, vals * (1.0 - frac))
    np.add.at(acc, i0 + 1, vals * frac)
    acc = acc[:shells.K + 1] * window.cell
    size = shell_sizes(shells, window.d)
    out = np.zeros(shells.K + 1)
    out[1:] = acc[1:] / (shells.weights[1:] * size[1:])
    return out


def radial_power(points, window, shells, order=64, weights=None, mode="auto"):
    """Radially averaged |sum_j w_j exp(-i <q, p_j>)|^2 on each shell.

    ``weights`` default to 1/N (a point pattern). ``mode`` is ``"lattice"``
    (periodic pattern: lattice frequencies deposited on shells),
    ``"continuous"`` (direct evaluation on shell x direction grid), or
    ``"auto"`` (lattice for unweighted patterns in periodic windows).
    """
    pts = np.asarray(getattr(points, "points", points), dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise ValueError("empty input")
    if pts.shape[1] != window.d:
        raise ValueError("point dimension does not match window")
    pattern = weights is None
    w = np.full(pts.shape[0], 1.0 / pts.shape[0], dtype=np.complex128) if pattern \
        else np.asarray(weights, dtype=np.complex128)
    if mode == "auto":
        mode = "lattice" if (pattern and window.periodic) else "continuous"
    dc = abs(complex(np.sum(w))) ** 2
    if mode == "lattice":
        k = lattice_frequencies(window, shells.lam_max)
        vals = np.abs(_kernels.nudft(pts, w, k * window.spacing)) ** 2
        power = deposit(window, shells, k, vals)
        power[0] = dc
        return RadialSpectrum(window.d, shells, power, 0, lattice=True)
    if mode != "continuous":
        raise ValueError(f"unknown mode {mode!r}")
    dirs, dw = directions(window.d, order)
    q = (shells.radii[:, None, None] * dirs[None, :, :]).reshape(-1, window.d)
    vals = np.abs(_kernels.nudft(pts, w, q)) ** 2
    power = vals.reshape(shells.K + 1, -1) @ dw
    power[0] = dc
    return RadialSpectrum(window.d, shells, power, len(dw))


def transform_radial_power(fhat, d, shells, order=64):
    """Radial power of an analytically known transform ``fhat(q) -> complex``."""
    dirs, dw = directions(d, order)
    q = (shells.radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    vals = np.abs(np.asarray(fhat(q), dtype=np.complex128)) ** 2
    power = vals.reshape(shells.K + 1, -1) @ dw
    power[0] = abs(complex(np.asarray(fhat(np.zeros((1, d))))[0])) ** 2
    return RadialSpectrum(d, shells, power, len(dw))


def function_samples(f, window, M):
    """Midpoint-rule nodes and weights f(p) h^d for transforming f over the window."""
    h = window.T / M
    g = (np.arange(M) + 0.5) * h
    mesh = np.stack(np.meshgrid(*([g] * window.d), indexing="ij"), axis=-1).reshape(-1, window.d)
    return mesh, np.asarray(f(mesh), dtype=np.complex128) * h ** window.d


def function_radial_power(f, window, shells, M=64, order=64):
    pts, w = function_samples(f, window, M)
    return radial_power(pts, window, shells, order=order, weights=w, mode="continuous")


def lattice_radial_spectrum(window, shells, expected):
    """Radial spectrum from per-lattice-frequency expected powers ``expected(k)``.

    ``expected`` maps an integer array (n, d) to E|S_k|^2 (delta-average
    normalisation, so the DC value is 1).
    """
    k = lattice_frequencies(window, shells.lam_max)
    power = deposit(window, shells, k, expected(k))
    power[0] = float(np.asarray(expected(np.zeros((1, window.d), dtype=np.int64)))[0])
    return RadialSpectrum(window.d, shells, power, 0, lattice=True)


def iid_radial_spectrum(window, shells, N):
    def expected(k):
        k = np.atleast_2d(k)
        return np.where(np.any(k != 0, axis=1), 1.0 / N, 1.0)
    return lattice_radial_spectrum(window, shells, expected)


def jittered_radial_spectrum(window, shells, strata):
    strata = np.broadcast_to(np.asarray(strata, dtype=np.int64), (window.d,))
    N = int(np.prod(strata))

    def expected(k):
        k = np.atleast_2d(k)
        phi2 = np.prod(np.sinc(k / strata) ** 2, axis=1)
        return np.where(np.any(k != 0, axis=1), (1.0 - phi2) / N, 1.0)
    return lattice_radial_spectrum(window, shells, expected)


# ---------------------------------------------------------------------------
# the formal predictor
# ---------------------------------------------------------------------------

def _blocks(spec, power):
    labels = [BlockLabel("euclidean", (k,)) for k in range(spec.shells.K + 1)]
    dim = spec.shell_size.copy()
    dim[0] = 1.0  # trivial block; excluded from the sum, any positive value
    return PowerByBlock("euclidean", labels, power, dim, spec.shells.lam_max,
                        BlockLabel.trivial("euclidean"))


def euclidean_variance_formula(F, E_S, window=None, normalize=True):
    """Trapezoid discretisation of

        int_0^inf [shell_F(lam) shell_S(lam) / (lam^(d-1) |S^(d-1)|)] dlam - |F_0|^2 E|S_0|^2.

    The lam = 0 node contributes nothing to the integral. With ``normalize``
    the result is the variance of the MC mean over ``window``: the integral
    is scaled by 1/((2pi)^d |W|) and the DC product carries the lattice-cell
    weight (2pi)^d/|W|. For lattice sampler spectra the DC term is a point
    mass at the origin that belongs to the integral, so it cancels against
    the subtraction. Without ``normalize`` the expression is evaluated as
    written, in raw transform units.
    """
    if F.d != E_S.d or F.shells != E_S.shells:
        raise ValueError("shell grids differ")
    if normalize:
        if window is None or window.d != F.d:
            raise ValueError("normalised prediction needs the matching window")
        scale = 1.0 / (TWO_PI ** F.d * window.volume)
        cell = window.cell
    else:
        scale, cell = 1.0, 1.0
    size = F.shell_size
    w = F.shells.weights
    fp = scale * w * F.power * size
    fp[0] = F.power[0]
    sp = E_S.power * size
    sp[0] = E_S.power[0]
    pred = predict_variance(_blocks(F, fp), _blocks(E_S, sp))
    dc = F.power[0] * E_S.power[0]
    atom = cell * dc if E_S.lattice else 0.0
    offset = float(scale * (atom - cell * dc))
    return VariancePrediction(float(pred.variance + offset), pred.labels, pred.contributions,
                              tail_estimate=0.0, tail_known=False, offset=offset, formal=True,
                              integrand=pred.integrand, sampler=pred.sampler)
