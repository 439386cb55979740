"""Homogeneous sampling patterns on the torus, the sphere and a periodic window.

Every draw composes the kind-specific construction with one uniformly random
group element (a toroidal/cyclic shift or a rotation), so all built-in kinds
are homogeneous. Randomness comes from a counter-based generator keyed by
``(seed, realization index)``: realizations are reproducible and can be
generated in any order or in parallel.
"""
from dataclasses import dataclass, field

import numpy as np

from . import sphere

TWO_PI = 2.0 * np.pi
KINDS = ("iid-uniform", "jittered-grid", "shifted-lattice", "fibonacci-rotated",
         "fixed-pattern-randomized")
_DOMAIN_KINDS = {
    "torus": ("iid-uniform", "jittered-grid", "shifted-lattice", "fixed-pattern-randomized"),
    "sphere": ("iid-uniform", "fibonacci-rotated", "fixed-pattern-randomized"),
    "euclidean": ("iid-uniform", "jittered-grid", "shifted-lattice", "fixed-pattern-randomized"),
}
_MASK64 = (1 << 64) - 1


class SamplerError(ValueError):
    pass


@dataclass(frozen=True)
class SamplePattern:
    domain: str
    points: np.ndarray
    group_element: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SamplerSpec:
    """Distribution over N-point patterns.

    ``strata`` (jittered-grid) is the per-axis cell count, ``generator``
    (shifted-lattice) the rank-1 lattice generator, ``base``
    (fixed-pattern-randomized) the explicit point list, and ``T`` the window
    side for the euclidean domain.
    """

    domain: str
    kind: str
    n: int
    d: int = 1
    strata: tuple | None = None
    generator: tuple | None = None
    base: tuple | None = None
    T: float | None = None

    def __post_init__(self):
        if self.domain not in _DOMAIN_KINDS:
            raise SamplerError(f"unknown domain {self.domain!r}")
        if self.kind not in _DOMAIN_KINDS[self.domain]:
            raise SamplerError(f"kind {self.kind!r} is not available on the {self.domain}")
        if int(self.n) < 1:
            raise SamplerError("N must be at least 1")
        object.__setattr__(self, "n", int(self.n))
        d = 3 if self.domain == "sphere" else int(self.d)
        if d < 1:
            raise SamplerError("dimension must be positive")
        object.__setattr__(self, "d", d)
        if self.domain == "euclidean":
            if self.T is None or not float(self.T) > 0:
                raise SamplerError("euclidean samplers need a window side T > 0")
            if d > 3:
                raise SamplerError("euclidean windows support d <= 3")
            object.__setattr__(self, "T", float(self.T))
        if self.kind == "jittered-grid":
            strata = self.strata
            if strata is None:
                m = round(self.n ** (1.0 / d))
                if m ** d != self.n:
                    raise SamplerError(f"N={self.n} is not a perfect {d}-th power; give strata")
                strata = (m,) * d
            strata = tuple(int(s) for s in np.broadcast_to(np.asarray(strata), (d,)))
            if any(s < 1 for s in strata) or int(np.prod(strata)) != self.n:
                raise SamplerError(f"strata {strata} must multiply to N={self.n}")
            object.__setattr__(self, "strata", strata)
        if self.kind == "shifted-lattice":
            g = (1,) * d if self.generator is None else tuple(int(x) for x in self.generator)
            if len(g) != d:
                raise SamplerError("lattice generator length must equal d")
            object.__setattr__(self, "generator", g)
        if self.kind == "fixed-pattern-randomized":
            if self.base is None:
                raise SamplerError("fixed-pattern-randomized needs a base pattern")
            base = np.asarray(self.base, dtype=np.float64)
            if base.ndim == 1:
                base = base[:, None]
            if base.shape != (self.n, d):
                raise SamplerError(f"base pattern must have shape ({self.n}, {d})")
            if self.domain == "sphere":
                sphere.check_unit(base)
            object.__setattr__(self, "base", tuple(map(tuple, base.tolist())))

    @property
    def period(self):
        return self.T if self.domain == "euclidean" else TWO_PI

    def lattice_coprime(self):
        """Whether every generator entry is coprime to N (full projections)."""
        return all(np.gcd(g, self.n) == 1 for g in (self.generator or ()))

    def to_json(self):
        out = {"domain": self.domain, "kind": self.kind, "n": self.n}
        if self.domain != "sphere":
            out["d"] = self.d
        for key in ("strata", "generator"):
            if getattr(self, key) is not None:
                out[key] = list(getattr(self, key))
        if self.base is not None:
            out["base"] = [list(p) for p in self.base]
        if self.T is not None:
            out["T"] = self.T
        return out

    @classmethod
    def from_json(cls, obj, domain=None, d=None, T=None):
        allowed = {"domain", "kind", "n", "d", "strata", "generator", "base", "T"}
        extra = set(obj) - allowed
        if extra:
            raise SamplerError(f"unknown sampler keys {sorted(extra)}")
        if "kind" not in obj or "n" not in obj:
            raise SamplerError("sampler needs 'kind' and 'n'")
        return cls(obj.get("domain", domain), obj["kind"], obj["n"], obj.get("d", d or 1),
                   obj.get("strata"), obj.get("generator"), obj.get("base"), obj.get("T", T))


def realization_rng(seed, index, stream=0):
    """Counter-based generator for one realization; pure function of its arguments."""
    if index < 0 or index >= 1 << 56 or not 0 <= stream < 256:
        raise ValueError("realization index or stream out of range")
    key = [int(seed) & _MASK64, (int(stream) << 56) | int(index)]
    return np.random.Generator(np.random.Philox(key=np.array(key, dtype=np.uint64)))


# ---------------------------------------------------------------------------
# group actions
# ---------------------------------------------------------------------------

def random_group_element(domain, rng, d=1):
    """A uniform shift in [0, period)^d as a fraction of the period, or a unit quaternion."""
    if domain == "sphere":
        return sphere.random_quaternion(rng)
    return rng.random(d)


def apply_group_element(pattern, element, period=None):
    if pattern.domain == "sphere":
        pts = sphere.rotate(pattern.points, element)
    else:
        period = TWO_PI if period is None else period
        pts = np.mod(pattern.points + np.asarray(element) * period, period)
    return SamplePattern(pattern.domain, pts, np.asarray(element))


def homogenize(base, rng, period=None):
    """Apply one uniformly random group element to ``base``."""
    d = base.points.shape[1]
    return apply_group_element(base, random_group_element(base.domain, rng, d), period)


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def _unit_cube(spec, rng):
    """Points in [0, 1)^d before scaling to the period."""
    if spec.kind == "iid-uniform":
        return rng.random((spec.n, spec.d))
    if spec.kind == "jittered-grid":
        strata = np.asarray(spec.strata)
        cells = np.indices(spec.strata).reshape(spec.d, -1).T
        return (cells + rng.random((spec.n, spec.d))) / strata
    if spec.kind == "shifted-lattice":
        j = np.arange(spec.n)[:, None]
        return np.mod(j * np.asarray(spec.generator)[None, :], spec.n) / spec.n
    return np.asarray(spec.base, dtype=np.float64) / spec.period


def base_points(spec, rng=None):
    """The pattern before homogenization (random for iid and jittered kinds)."""
    if spec.domain == "sphere":
        if spec.kind == "iid-uniform":
            return sphere.normalize(rng.standard_normal((spec.n, 3)))
        if spec.kind == "fibonacci-rotated":
            return sphere.fibonacci_sphere(spec.n)
        return np.asarray(spec.base, dtype=np.float64)
    return _unit_cube(spec, rng) * spec.period


def draw(spec, seed, index, stream=0):
    """Realization ``index`` of ``spec`` under master ``seed``."""
    rng = realization_rng(seed, index, stream)
    base = SamplePattern(spec.domain, base_points(spec, rng))
    return homogenize(base, rng, None if spec.domain == "sphere" else spec.period)


def draw_batch(spec, seed, start, count, stream=0):
    """Points of realizations start..start+count-1 stacked as (count, N, dim)."""
    return np.stack([draw(spec, seed, start + i, stream).points for i in range(count)])
