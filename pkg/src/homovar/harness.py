"""Brute-force estimation and prediction-vs-simulation comparison.

Realizations are processed in fixed-size chunks. Each chunk is a pure
function of ``(config, chunk start)``, results are stored by realization
index and reduced in that fixed order, so every statistic is bit-identical
for any number of workers.
"""
import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels, euclidean, integrands, sphere, torus
from .samplers import SamplerSpec, base_points, draw_batch
from .spectra import PowerByBlock, predict_expected

SCHEMA_VERSION = 1
CHUNK = 1024
Z_THRESHOLD = 4.0
TAIL_FRACTION = 0.1
EXACT_ZERO = 1e-20

MC_STREAM = 0
SPECTRUM_STREAM = 1

_TOP_KEYS = {"schema_version", "domain", "d", "window", "sampler", "integrand", "truncation",
             "realizations", "seed", "sampler_spectrum", "spectrum_realizations"}
_TRUNCATION_KEYS = {"torus": {"L"}, "sphere": {"lmax"}, "euclidean": {"dlam", "lam_max", "order"}}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    domain: str
    sampler: SamplerSpec
    integrand: dict
    truncation: dict
    realizations: int
    seed: int = 0
    d: int = 1
    window: dict | None = None
    sampler_spectrum: object = "analytic"
    spectrum_realizations: int | None = None

    def __post_init__(self):
        if self.domain not in _TRUNCATION_KEYS:
            raise ConfigError(f"unknown domain {self.domain!r}")
        if int(self.realizations) < 2:
            raise ConfigError("need at least 2 realizations")
        if self.sampler.domain != self.domain:
            raise ConfigError("sampler domain differs from experiment domain")
        keys = set(self.truncation)
        allowed = _TRUNCATION_KEYS[self.domain]
        if keys - allowed:
            raise ConfigError(f"unknown truncation keys {sorted(keys - allowed)}")
        if self.domain == "torus":
            if "L" not in keys or int(self.truncation["L"]) < 0:
                raise ConfigError("torus truncation needs L >= 0")
        elif self.domain == "sphere":
            if "lmax" not in keys or int(self.truncation["lmax"]) < 0:
                raise ConfigError("sphere truncation needs lmax >= 0")
        else:
            if not {"dlam", "lam_max"} <= keys or not self.truncation["dlam"] > 0 \
                    or not self.truncation["lam_max"] > 0:
                raise ConfigError("euclidean truncation needs dlam > 0 and lam_max > 0")
            if self.window is None or set(self.window) - {"T", "periodic"} or "T" not in self.window:
                raise ConfigError("euclidean experiments need window {T, periodic}")
        src = self.sampler_spectrum
        if not (src in ("analytic", "estimated") or (isinstance(src, dict) and set(src) == {"file"})):
            raise ConfigError("sampler_spectrum must be 'analytic', 'estimated' or {'file': path}")
        if self.spectrum_realizations is not None and int(self.spectrum_realizations) < 2:
            raise ConfigError("spectrum_realizations must be at least 2")

    @property
    def R(self):
        return int(self.realizations)

    @property
    def window_obj(self):
        if self.window is None:
            return None
        return euclidean.EuclideanWindow(self.d, float(self.window["T"]),
                                         bool(self.window.get("periodic", True)))

    @property
    def shells(self):
        t = self.truncation
        return euclidean.ShellGrid.covering(float(t["lam_max"]), float(t["dlam"]))

    @property
    def order(self):
        return int(self.truncation.get("order", 64))

    def to_json(self):
        out = {
            "schema_version": SCHEMA_VERSION,
            "domain": self.domain,
            "sampler": self.sampler.to_json(),
            "integrand": self.integrand,
            "truncation": self.truncation,
            "realizations": self.R,
            "seed": int(self.seed),
            "sampler_spectrum": self.sampler_spectrum,
        }
        if self.domain != "sphere":
            out["d"] = self.d
        if self.window is not None:
            out["window"] = self.window
        if self.spectrum_realizations is not None:
            out["spectrum_realizations"] = int(self.spectrum_realizations)
        return out

    @classmethod
    def from_json(cls, obj, base_dir=None):
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        extra = set(obj) - _TOP_KEYS
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
        for key in ("domain", "sampler", "integrand", "truncation", "realizations"):
            if key not in obj:
                raise ConfigError(f"missing config key {key!r}")
        domain = obj["domain"]
        d = 3 if domain == "sphere" else int(obj.get("d", 1))
        window = obj.get("window")
        T = window.get("T") if isinstance(window, dict) else None
        try:
            sampler = SamplerSpec.from_json(obj["sampler"], domain=domain, d=d, T=T)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        src = obj.get("sampler_spectrum", "analytic")
        if isinstance(src, dict) and "file" in src and base_dir is not None:
            src = {"file": os.path.join(base_dir, src["file"])}
        return cls(domain, sampler, obj["integrand"], obj["truncation"], obj["realizations"],
                   obj.get("seed", 0), d, window, src, obj.get("spectrum_realizations"))

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_json(obj, base_dir=os.path.dirname(os.path.abspath(path)))

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


# ---------------------------------------------------------------------------
# integrand and analytic spectra
# ---------------------------------------------------------------------------

def build_integrand(cfg):
    try:
        f = integrands.build(cfg.domain, cfg.integrand, cfg.d, cfg.window_obj)
    except TypeError as exc:
        raise ConfigError(f"bad integrand parameters: {exc}") from exc
    if cfg.domain == "torus":
        if f.d != cfg.d:
            raise ConfigError("integrand dimension differs from d")
        return f.restrict(int(cfg.truncation["L"]))
    if cfg.domain == "sphere":
        return f.restrict(int(cfg.truncation["lmax"]))
    return f


def integrand_power(cfg, f):
    if cfg.domain == "euclidean":
        return f.radial_power(cfg.shells, cfg.order)
    return f.power()


def analytic_sampler_power(cfg):
    s = cfg.sampler
    if cfg.domain == "torus":
        L = int(cfg.truncation["L"])
        if s.kind == "iid-uniform":
            return torus.iid_expected_power(s.d, L, s.n)
        if s.kind == "jittered-grid":
            return torus.jittered_expected_power(s.d, L, s.strata)
        if s.kind == "shifted-lattice":
            return torus.lattice_expected_power(s.d, L, s.n, s.generator)
        return torus.pattern_power(base_points(s), L)
    if cfg.domain == "sphere":
        lmax = int(cfg.truncation["lmax"])
        if s.kind == "iid-uniform":
            return sphere.iid_expected_power_sphere(lmax, s.n)
        return sphere.pattern_power_sphere(base_points(s), lmax)
    window, shells = cfg.window_obj, cfg.shells
    if s.kind == "iid-uniform":
        return euclidean.iid_radial_spectrum(window, shells, s.n)
    if s.kind == "jittered-grid":
        return euclidean.jittered_radial_spectrum(window, shells, s.strata)
    return euclidean.radial_power(base_points(s), window, shells, cfg.order)


def load_spectrum(path):
    with open(path) as fh:
        obj = json.load(fh)
    if "shells" in obj or "dlam" in obj:
        return euclidean.RadialSpectrum.from_json(obj)
    return PowerByBlock.from_json(obj)


def _trivial_sampler_coefficient(cfg):
    if cfg.domain == "torus":
        return (2 * np.pi) ** (-cfg.d / 2)
    if cfg.domain == "sphere":
        return 1.0 / np.sqrt(4 * np.pi)
    return 1.0


def predicted_mean(cfg, f):
    if cfg.domain == "torus":
        w0 = f.coeffs[torus.trivial_index(f.d, f.L)]
        return predict_expected(w0, _trivial_sampler_coefficient(cfg))
    if cfg.domain == "sphere":
        return predict_expected(f.coeffs[0], _trivial_sampler_coefficient(cfg))
    return predict_expected(f.integral(), 1.0) / cfg.window_obj.volume


def predict(cfg, f=None, sampler_power=None):
    """Closed-form prediction for ``cfg``; returns (VariancePrediction, integrand power)."""
    f = build_integrand(cfg) if f is None else f
    F = integrand_power(cfg, f)
    if sampler_power is None:
        src = cfg.sampler_spectrum
        if src == "analytic":
            sampler_power = analytic_sampler_power(cfg)
        elif src == "estimated":
            sampler_power = estimate_expected_power(cfg)
        else:
            sampler_power = load_spectrum(src["file"])
    if cfg.domain == "torus":
        pred = torus.torus_variance_formula(F, sampler_power)
    elif cfg.domain == "sphere":
        pred = sphere.sphere_variance_formula(F, sampler_power)
    else:
        pred = euclidean.euclidean_variance_formula(F, sampler_power, cfg.window_obj)
    pred.expected_value = predicted_mean(cfg, f)
    return pred, F, sampler_power


# ---------------------------------------------------------------------------
# chunked execution
# ---------------------------------------------------------------------------

def _run_chunks(fn, R, workers=1, chunk=CHUNK):
    starts = list(range(0, R, chunk))
    jobs = [(s, min(chunk, R - s)) for s in starts]
    if workers <= 1 or len(jobs) == 1:
        parts = [fn(s, c) for s, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.concatenate(parts, axis=0)


def _block_powers(cfg, pts):
    """Per-realization block powers, shape (count, n_blocks)."""
    if cfg.domain == "torus":
        L = int(cfg.truncation["L"])
        freqs = torus.torus_frequencies(cfg.d, L).astype(np.float64)
        c = _kernels.nudft_batch(pts, freqs)
        return np.abs(c) ** 2 / (2 * np.pi) ** cfg.d
    if cfg.domain == "sphere":
        lmax = int(cfg.truncation["lmax"])
        count, N, _ = pts.shape
        Y = sphere.sh_matrix(pts.reshape(-1, 3), lmax).reshape(count, N, -1)
        a2 = np.abs(Y.mean(axis=1)) ** 2
        l = np.repeat(np.arange(lmax + 1), 2 * np.arange(lmax + 1) + 1)
        out = np.zeros((count, lmax + 1))
        for deg in range(lmax + 1):
            out[:, deg] = a2[:, l == deg].sum(axis=1)
        return out
    window, shells = cfg.window_obj, cfg.shells
    return np.stack([euclidean.radial_power(p, window, shells, cfg.order).power for p in pts])


def _spectrum_like(cfg, mean, stderr):
    if cfg.domain == "torus":
        return torus.power_block(cfg.d, int(cfg.truncation["L"]), mean, stderr=stderr)
    if cfg.domain == "sphere":
        return sphere.power_block(int(cfg.truncation["lmax"]), mean, stderr=stderr)
    window = cfg.window_obj
    lattice = window.periodic
    n_dir = 0 if lattice else len(euclidean.directions(cfg.d, cfg.order)[1])
    return euclidean.RadialSpectrum(cfg.d, cfg.shells, mean, n_dir, lattice=lattice,
                                    stderr=stderr)


def realization_powers(cfg, workers=1, R=None, stream=SPECTRUM_STREAM):
    R = cfg.R if R is None else int(R)

    def chunk(start, count):
        return _block_powers(cfg, draw_batch(cfg.sampler, cfg.seed, start, count, stream))
    return _run_chunks(chunk, R, workers)


def estimate_expected_power(cfg, workers=1, R=None, powers=None):
    """Per-block sample mean of the pattern power with its standard error."""
    R = (cfg.spectrum_realizations or cfg.R) if R is None else int(R)
    if R < 2:
        raise ConfigError("need at least 2 realizations")
    P = realization_powers(cfg, workers, R) if powers is None else powers
    mean = P.mean(axis=0)
    se = P.std(axis=0, ddof=1) / np.sqrt(P.shape[0])
    return _spectrum_like(cfg, mean, se)


# ---------------------------------------------------------------------------
# empirical moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCStatistics:
    mean: complex
    variance: float
    se_mean: float
    se_variance: float
    R: int

    def to_json(self):
        return {"mean": [self.mean.real, self.mean.imag], "variance": self.variance,
                "se_mean": self.se_mean, "se_variance": self.se_variance, "realizations": self.R}


def moments(x):
    """Sample mean, unbiased variance and their standard errors for complex samples.

    The variance SE uses the fourth central moment:
    Var(s^2) ~ (m4 - (R-3)/(R-1) s^4) / R.
    """
    x = np.asarray(x, dtype=np.complex128)
    R = x.size
    if R < 2:
        raise ValueError("need at least 2 samples")
    mean = x.mean()
    dev2 = np.abs(x - mean) ** 2
    var = float(dev2.sum() / (R - 1))
    m4 = float(np.mean(dev2 * dev2))
    var_s2 = max((m4 - (R - 3) / (R - 1) * var * var) / R, 0.0)
    return complex(mean), var, float(np.sqrt(var / R)), float(np.sqrt(var_s2))


def mc_estimates(cfg, workers=1, f=None, stream=MC_STREAM):
    """(1/N) sum f(s_i) for every realization, in index order."""
    f = build_integrand(cfg) if f is None else f
    N, dim = cfg.sampler.n, cfg.sampler.d

    def chunk(start, count):
        pts = draw_batch(cfg.sampler, cfg.seed, start, count, stream)
        vals = np.asarray(f.evaluate(pts.reshape(-1, dim)), dtype=np.complex128)
        return vals.reshape(count, N).mean(axis=1)
    return _run_chunks(chunk, cfg.R, workers)


def empirical_mc_statistics(cfg, workers=1, f=None):
    est = mc_estimates(cfg, workers, f)
    return MCStatistics(*moments(est), cfg.R)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

def _linear_weights(cfg, F):
    """c with predicted variance = sum_k c_k E[S_k] + const, for propagating SEs."""
    if cfg.domain == "euclidean":
        window = cfg.window_obj
        c = F.shells.weights * F.power * F.shell_size / ((2 * np.pi) ** cfg.d * window.volume)
        c[0] = 0.0
        return c
    c = F.power / F.dim
    c[F.index()[F.trivial]] = 0.0
    return c


def _z(diff, se, scale):
    floor = max(se, 1e-15 * scale, 1e-300)
    return float(diff / floor)


@dataclass
class VarianceReport:
    domain: str
    formal: bool
    predicted_mean: complex
    predicted_variance: float
    prediction_se: float
    tail_estimate: float
    tail_known: bool
    empirical: MCStatistics
    z_mean: float
    z_variance: float
    passed: bool
    spectrum_source: str
    seed: int
    rows: list = field(default_factory=list)

    @property
    def status(self):
        return "PASS" if self.passed else "FAIL"

    def to_json(self):
        return {
            "domain": self.domain,
            "formal": self.formal,
            "status": self.status,
            "seed": self.seed,
            "spectrum_source": self.spectrum_source,
            "predicted": {
                "mean": [self.predicted_mean.real, self.predicted_mean.imag],
                "variance": self.predicted_variance,
                "variance_se": self.prediction_se,
                "tail_estimate": self.tail_estimate,
                "tail_known": self.tail_known,
            },
            "empirical": self.empirical.to_json(),
            "z_mean": self.z_mean,
            "z_variance": self.z_variance,
            "blocks": self.rows,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["label", "dim", "power_F", "power_S_hat", "se", "contribution"]
        w.writerow(cols)
        for r in self.rows:
            w.writerow([r["label"]] + [repr(float(r[c])) for c in cols[1:]])
        return buf.getvalue()


def _rows(cfg, F, S, pred):
    if cfg.domain == "euclidean":
        dims = F.shell_size
        labels = [str(k) for k in range(F.shells.K + 1)]
    else:
        dims = F.dim
        labels = [str(lab) for lab in F.labels]
    by_label = {str(lab): c for lab, c in zip(pred.labels, pred.contributions)}
    contrib = [by_label.get(lab, 0.0) for lab in labels]
    se = S.stderr if S.stderr is not None else np.zeros(len(labels))
    return [{"label": lab, "dim": float(dm), "power_F": float(pf), "power_S_hat": float(ps),
             "se": float(e), "contribution": float(c)}
            for lab, dm, pf, ps, e, c in zip(labels, dims, F.power, S.power, se, contrib)]


def compare(cfg, workers=1):
    """Predicted vs simulated mean and variance for one experiment."""
    f = build_integrand(cfg)
    src = cfg.sampler_spectrum
    pred_se = 0.0
    if src == "estimated":
        P = realization_powers(cfg, workers, cfg.spectrum_realizations or cfg.R)
        S = estimate_expected_power(cfg, powers=P)
    else:
        P, S = None, None
    pred, F, S = predict(cfg, f, S)
    if P is not None:
        per_real = P @ _linear_weights(cfg, F)
        pred_se = float(per_real.std(ddof=1) / np.sqrt(P.shape[0]))
    stats = empirical_mc_statistics(cfg, workers, f)

    scale = max(abs(pred.variance), stats.variance)
    diff_v = abs(pred.variance - stats.variance)
    se_v = float(np.hypot(stats.se_variance, pred_se))
    z_v = 0.0 if diff_v <= EXACT_ZERO else _z(diff_v, se_v, scale)
    diff_m = abs(pred.expected_value - stats.mean)
    z_m = 0.0 if diff_m <= EXACT_ZERO else _z(diff_m, stats.se_mean, max(abs(stats.mean), 1.0))
    tail_ok = (not pred.tail_known) or pred.tail_estimate <= TAIL_FRACTION * max(pred.variance, 0.0)
    passed = abs(z_v) <= Z_THRESHOLD and abs(z_m) <= Z_THRESHOLD and tail_ok
    name = src if isinstance(src, str) else "file"
    return VarianceReport(cfg.domain, pred.formal, complex(pred.expected_value), pred.variance,
                          pred_se, pred.tail_estimate, pred.tail_known, stats, z_m, z_v, passed,
                          name, int(cfg.seed), _rows(cfg, F, S, pred))
