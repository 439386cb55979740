"""Spectra over irreducible blocks and the closed-form mean/variance predictors.

A spectrum is a collection of blocks, one per irreducible subspace of the
function space. Labels are ``(domain, index)`` pairs: a lattice point for the
torus, ``(l,)`` for the sphere, ``(k,)`` (shell number) for Euclidean shells.
All coefficients use orthonormal bases, so every factor of the domain measure
lives inside the coefficients and the predictors are convention-free.
"""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

DOMAINS = ("torus", "sphere", "euclidean")


class SpectrumMismatch(ValueError):
    pass


@dataclass(frozen=True, order=True)
class BlockLabel:
    domain: str
    index: tuple

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "index", tuple(int(i) for i in self.index))

    def __str__(self):
        return ",".join(str(i) for i in self.index)

    @classmethod
    def trivial(cls, domain, d=1):
        return cls(domain, (0,) * (d if domain == "torus" else 1))


def block_dim(label):
    if label.domain == "torus":
        return 1
    if label.domain == "sphere":
        return 2 * label.index[0] + 1
    raise ValueError("euclidean shell sizes depend on the shell grid")


@dataclass(frozen=True)
class SpectralCoefficients:
    """Complex coefficient vectors per block, plus a truncation descriptor."""

    domain: str
    blocks: dict
    truncation: float
    trivial: BlockLabel

    def __post_init__(self):
        clean = {}
        for lab, c in self.blocks.items():
            if lab.domain != self.domain:
                raise SpectrumMismatch("mixed domain tags in one spectrum")
            c = np.atleast_1d(np.asarray(c, dtype=np.complex128))
            if lab.domain != "euclidean" and c.shape != (block_dim(lab),):
                raise ValueError(f"block {lab} needs {block_dim(lab)} coefficients, got {c.shape}")
            clean[lab] = c
        if self.trivial not in clean:
            raise ValueError("spectrum must contain the trivial block")
        object.__setattr__(self, "blocks", clean)

    def __getitem__(self, label):
        return self.blocks[label]

    def __len__(self):
        return len(self.blocks)

    def trivial_coefficient(self):
        return complex(self.blocks[self.trivial][0])

    def to_json(self):
        return {
            "domain": self.domain,
            "truncation": self.truncation,
            "blocks": [
                {"label": list(lab.index), "dim": int(c.size),
                 "coefficients": [[float(z.real), float(z.imag)] for z in c]}
                for lab, c in sorted(self.blocks.items())
            ],
        }

    @classmethod
    def from_json(cls, obj):
        domain = obj["domain"]
        blocks = {}
        for b in obj["blocks"]:
            lab = BlockLabel(domain, tuple(b["label"]))
            blocks[lab] = np.array([complex(re, im) for re, im in b["coefficients"]])
        d = len(obj["blocks"][0]["label"]) if obj["blocks"] else 1
        return cls(domain, blocks, obj["truncation"], BlockLabel.trivial(domain, d))


@dataclass(frozen=True)
class PowerByBlock:
    """Per-block power ||pi_lambda(v)||^2 and block dimension.

    ``tail`` is the power outside the truncation when it is known (``None``
    otherwise); ``stderr`` holds standard errors for estimated spectra.
    """

    domain: str
    labels: tuple
    power: np.ndarray
    dim: np.ndarray
    truncation: float
    trivial: BlockLabel
    tail: float | None = None
    stderr: np.ndarray | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        power = np.asarray(self.power, dtype=np.float64).copy()
        dim = np.asarray(self.dim, dtype=np.float64).copy()
        if power.shape != (len(labels),) or dim.shape != (len(labels),):
            raise ValueError("labels, power and dim must have equal length")
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate block labels")
        if any(lab.domain != self.domain for lab in labels):
            raise SpectrumMismatch("mixed domain tags in one spectrum")
        if np.any(power < 0) or np.any(~np.isfinite(power)):
            raise ValueError("block powers must be finite and nonnegative")
        if np.any(dim <= 0):
            raise ValueError("block dimensions must be positive")
        if self.trivial not in labels:
            raise ValueError("spectrum must contain the trivial block")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "dim", dim)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=np.float64).copy())

    def __len__(self):
        return len(self.labels)

    def index(self):
        return {lab: i for i, lab in enumerate(self.labels)}

    def __getitem__(self, label):
        return float(self.power[self.index()[label]])

    def as_dict(self):
        return dict(zip(self.labels, self.power.tolist()))

    def total(self):
        return float(self.power.sum())

    def to_json(self):
        out = {"domain": self.domain, "truncation": self.truncation, "blocks": []}
        for i, lab in enumerate(self.labels):
            b = {"label": list(lab.index), "dim": float(self.dim[i]), "power": float(self.power[i])}
            if self.stderr is not None:
                b["stderr"] = float(self.stderr[i])
            out["blocks"].append(b)
        if self.tail is not None:
            out["tail"] = self.tail
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "dim", "power", "se"])
        se = self.stderr if self.stderr is not None else np.zeros(len(self.labels))
        for lab, dm, p, e in zip(self.labels, self.dim, self.power, se):
            w.writerow([str(lab), repr(float(dm)), repr(float(p)), repr(float(e))])
        return buf.getvalue()

    @classmethod
    def from_json(cls, obj):
        domain = obj["domain"]
        blocks = obj["blocks"]
        labels = [BlockLabel(domain, tuple(b["label"])) for b in blocks]
        d = len(blocks[0]["label"]) if blocks else 1
        stderr = None
        if blocks and all("stderr" in b for b in blocks):
            stderr = [b["stderr"] for b in blocks]
        return cls(domain, labels, [b["power"] for b in blocks], [b["dim"] for b in blocks],
                   obj["truncation"], BlockLabel.trivial(domain, d),
                   tail=obj.get("tail"), stderr=stderr)


def power_from_coefficients(c, tail=None):
    labels = sorted(c.blocks)
    power = [float(np.sum(np.abs(c.blocks[lab]) ** 2)) for lab in labels]
    dim = [c.blocks[lab].size for lab in labels]
    return PowerByBlock(c.domain, labels, power, dim, c.truncation, c.trivial, tail=tail)


def predict_expected(w_trivial, mean_sampler_trivial):
    """Expected dot product: trivial coefficient times conj of the sampler's mean one."""
    return complex(w_trivial) * np.conj(complex(mean_sampler_trivial))


@dataclass
class VariancePrediction:
    variance: float
    labels: tuple
    contributions: np.ndarray
    expected_value: complex | None = None
    tail_estimate: float = 0.0
    tail_known: bool = False
    offset: float = 0.0
    formal: bool = False
    integrand: PowerByBlock | None = field(default=None, repr=False)
    sampler: PowerByBlock | None = field(default=None, repr=False)

    def to_json(self):
        out = {
            "variance": self.variance,
            "expected_value": None if self.expected_value is None
            else [self.expected_value.real, self.expected_value.imag],
            "tail_estimate": self.tail_estimate,
            "tail_known": self.tail_known,
            "formal": self.formal,
            "blocks": [{"label": list(lab.index), "contribution": float(c)}
                       for lab, c in zip(self.labels, self.contributions)],
        }
        if self.offset:
            out["offset"] = self.offset
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "dim", "power_F", "power_S", "contribution"])
        fi = self.integrand.index() if self.integrand is not None else {}
        si = self.sampler.index() if self.sampler is not None else {}
        for lab, c in zip(self.labels, self.contributions):
            i, j = fi.get(lab), si.get(lab)
            w.writerow([
                str(lab),
                repr(float(self.integrand.dim[i])) if i is not None else "",
                repr(float(self.integrand.power[i])) if i is not None else "",
                repr(float(self.sampler.power[j])) if j is not None else "",
                repr(float(c)),
            ])
        return buf.getvalue()


def _aligned(integrand, sampler):
    if integrand.domain != sampler.domain:
        raise SpectrumMismatch(f"domain {integrand.domain} vs {sampler.domain}")
    if integrand.truncation != sampler.truncation:
        raise SpectrumMismatch(f"truncation {integrand.truncation} vs {sampler.truncation}")
    if set(integrand.labels) != set(sampler.labels):
        raise SpectrumMismatch("block label sets differ")
    if integrand.trivial != sampler.trivial:
        raise SpectrumMismatch("trivial labels differ")
    idx = sampler.index()
    perm = np.array([idx[lab] for lab in integrand.labels])
    return sampler.power[perm], sampler.dim[perm]


def predict_variance(integrand, sampler_expected):
    """Sum over non-trivial blocks of power_F * E[power_S] / dim.

    The trivial block is excluded by label, never by thresholding. The tail
    estimate is the integrand power beyond the truncation (when known) times
    the largest non-trivial sampler power inside it.
    """
    s_power, s_dim = _aligned(integrand, sampler_expected)
    if not np.allclose(s_dim, integrand.dim, rtol=1e-12, atol=0):
        raise SpectrumMismatch("block dimensions differ between spectra")
    order = sorted(range(len(integrand.labels)), key=lambda i: integrand.labels[i])
    keep = [i for i in order if integrand.labels[i] != integrand.trivial]
    labels = tuple(integrand.labels[i] for i in keep)
    keep = np.array(keep, dtype=np.int64)
    contrib = integrand.power[keep] * s_power[keep] / integrand.dim[keep]
    variance = float(np.sum(contrib)) if contrib.size else 0.0

    tail_known = integrand.tail is not None
    smax = float(s_power[keep].max()) if keep.size else 0.0
    tail = float(integrand.tail) * smax if tail_known else 0.0
    return VariancePrediction(variance, labels, contrib, tail_estimate=tail, tail_known=tail_known,
                              integrand=integrand, sampler=sampler_expected)


def dumps(obj):
    """Deterministic JSON text for spectra and reports."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
