"""Acceptance suite: one test per criterion, each prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``; a summary table is also
printed at the end of any pytest session that includes these tests.
"""
import json
import time
from contextlib import contextmanager
from itertools import combinations

import numpy as np
import pytest
from scipy import special

from homovar import cli, euclidean as eu, harness, integrands, repcheck, samplers, sphere, torus

TWO_PI = 2 * np.pi
criterion = pytest.mark.criterion


@contextmanager
def report(number, title):
    started = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - started
        print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}  ({dt:.2f} s)")


def _cfg(domain="torus", sampler=None, integrand=None, truncation=None, R=10000, seed=2024,
         **extra):
    obj = {"schema_version": 1, "domain": domain,
           "sampler": sampler or {"kind": "iid-uniform", "n": 8},
           "integrand": integrand or {"kind": "cos"},
           "truncation": truncation or {"L": 4}, "realizations": R, "seed": seed, **extra}
    return harness.ExperimentConfig.from_json(obj)


def _vec(rng, dim):
    return repcheck.random_vector(rng, dim)


# ---------------------------------------------------------------------------
# group identities
# ---------------------------------------------------------------------------

@criterion(1, "Schur average equals (1/dim)<x,v>conj(<y,w>) on every catalog irrep")
def test_criterion_01_schur_average_exact():
    with report(1, "Schur bilinear average"):
        rng = np.random.default_rng(101)
        t0 = time.perf_counter()
        worst = 0.0
        for entry in repcheck.builtin_group_catalog():
            for rep in entry.irreps:
                for _ in range(64):
                    x, y, v, w = (_vec(rng, rep.dim) for _ in range(4))
                    err = abs(repcheck.schur_bilinear_average(rep, x, y, v, w)
                              - repcheck.schur_prediction(rep, x, y, v, w))
                    worst = max(worst, err)
        elapsed = time.perf_counter() - t0
        print(f"  max abs error {worst:.2e}, {elapsed:.3f} s")
        assert worst < 1e-12
        assert elapsed < 1.0


@criterion(2, "cross average vanishes for every non-isomorphic irrep pair")
def test_criterion_02_cross_average_vanishes():
    with report(2, "non-isomorphic pairs"):
        rng = np.random.default_rng(102)
        t0 = time.perf_counter()
        worst, pairs = 0.0, 0
        for entry in repcheck.builtin_group_catalog():
            for r1, r2 in combinations(entry.irreps, 2):
                pairs += 1
                for _ in range(64):
                    v1, w1 = _vec(rng, r1.dim), _vec(rng, r1.dim)
                    v2, w2 = _vec(rng, r2.dim), _vec(rng, r2.dim)
                    worst = max(worst, abs(repcheck.cross_rep_average(r1, r2, v1, w1, v2, w2)))
        elapsed = time.perf_counter() - t0
        print(f"  {pairs} pairs, max |average| {worst:.2e}, {elapsed:.3f} s")
        # 1+3+6+28 cyclic pairs and 10 for D4
        assert pairs == 48
        assert worst < 1e-12
        assert elapsed < 1.0


@criterion(3, "sum of |character|^2 equals the group order")
def test_criterion_03_character_orthogonality():
    with report(3, "character norm"):
        worst = 0.0
        for entry in repcheck.builtin_group_catalog():
            n = entry.group.order
            for rep in entry.irreps:
                worst = max(worst, abs(repcheck.character_norm(rep) - n) / n)
        print(f"  max relative error {worst:.2e}")
        assert worst < 1e-9


# ---------------------------------------------------------------------------
# torus closed form
# ---------------------------------------------------------------------------

@criterion(4, "cos, d=1, iid: predicted variance equals 1/(2N)")
def test_criterion_04_torus_closed_form():
    with report(4, "torus predictor vs 1/(2N)"):
        for N in (4, 8, 32):
            pred, _, _ = harness.predict(_cfg(sampler={"kind": "iid-uniform", "n": N}))
            rel = abs(pred.variance - 1 / (2 * N)) * 2 * N
            print(f"  N={N:>2}: {pred.variance!r}  rel err {rel:.1e}")
            assert rel < 1e-10


@criterion(5, "cos, d=1, iid, R=1e5: |z| <= 4 against brute force")
def test_criterion_05_torus_brute_force():
    with report(5, "torus brute force"):
        t0 = time.perf_counter()
        for N in (4, 8, 32):
            rep = harness.compare(_cfg(sampler={"kind": "iid-uniform", "n": N}, R=100_000))
            print(f"  N={N:>2}: predicted {rep.predicted_variance:.6g}, "
                  f"empirical {rep.empirical.variance:.6g}, z {rep.z_variance:+.2f}")
            assert abs(rep.z_variance) <= 4
            assert rep.passed
        elapsed = time.perf_counter() - t0
        print(f"  {elapsed:.1f} s")
        assert elapsed < 30


@criterion(6, "shifted lattice N=8 integrates bandwidth-3 functions exactly")
def test_criterion_06_exact_integration():
    with report(6, "exact integration"):
        coeffs = [[0, 1.0, 0.0], [1, 0.5, 0.25], [-1, 0.5, -0.25], [2, -0.3, 0.1],
                  [-2, -0.3, -0.1], [3, 0.0, 0.7], [-3, 0.0, -0.7]]
        cfg = _cfg(sampler={"kind": "shifted-lattice", "n": 8},
                   integrand={"kind": "trig", "coefficients": coeffs},
                   truncation={"L": 3}, R=10000)
        rep = harness.compare(cfg)
        print(f"  predicted {rep.predicted_variance!r}, empirical {rep.empirical.variance!r}")
        assert rep.predicted_variance == 0.0
        assert rep.empirical.variance <= 1e-20
        assert rep.passed


# ---------------------------------------------------------------------------
# sphere
# ---------------------------------------------------------------------------

@criterion(7, "sphere Y_1^0, iid N=10: 1/(40 pi) and |z| <= 4 at R=1e5")
def test_criterion_07_sphere():
    with report(7, "sphere"):
        t0 = time.perf_counter()
        cfg = _cfg("sphere", sampler={"kind": "iid-uniform", "n": 10},
                   integrand={"kind": "ylm", "l": 1, "m": 0}, truncation={"lmax": 4},
                   R=100_000, seed=11)
        rep = harness.compare(cfg)
        rel = abs(rep.predicted_variance * 40 * np.pi - 1)
        elapsed = time.perf_counter() - t0
        print(f"  predicted {rep.predicted_variance!r} (rel err {rel:.1e}), "
              f"empirical {rep.empirical.variance:.6g}, z {rep.z_variance:+.2f}, {elapsed:.1f} s")
        assert rel < 1e-10
        assert abs(rep.z_variance) <= 4
        assert elapsed < 60


# ---------------------------------------------------------------------------
# unbiasedness and invariance
# ---------------------------------------------------------------------------

_T = TWO_PI
_UNBIASED = [
    ("torus iid exp_cos", _cfg(sampler={"kind": "iid-uniform", "n": 6},
                               integrand={"kind": "exp_cos", "scale": 0.8}, truncation={"L": 24},
                               R=20000, d=1)),
    ("torus jittered 2-D exp_cos", _cfg(sampler={"kind": "jittered-grid", "n": 9},
                                        integrand={"kind": "exp_cos", "scale": 0.6},
                                        truncation={"L": 24}, R=20000, d=2)),
    ("torus lattice 2-D cos", _cfg(sampler={"kind": "shifted-lattice", "n": 13, "generator": [1, 5]},
                                   integrand={"kind": "cos", "frequency": [3, 1]},
                                   truncation={"L": 4}, R=20000, d=2)),
    ("sphere iid exp_z", _cfg("sphere", sampler={"kind": "iid-uniform", "n": 10},
                              integrand={"kind": "exp_z", "scale": 1.0},
                              truncation={"lmax": 24}, R=20000)),
    ("sphere fibonacci exp_z", _cfg("sphere", sampler={"kind": "fibonacci-rotated", "n": 20},
                                    integrand={"kind": "exp_z", "scale": 1.5},
                                    truncation={"lmax": 24}, R=20000)),
    ("euclidean jittered gabor", _cfg("euclidean", sampler={"kind": "jittered-grid", "n": 16},
                                      integrand={"kind": "gabor"}, d=2,
                                      window={"T": _T, "periodic": True},
                                      truncation={"dlam": 0.5, "lam_max": 8.0}, R=20000)),
]


@criterion(8, "empirical mean within 4 SE of the true mean on 6 combinations")
def test_criterion_08_unbiasedness():
    with report(8, "unbiasedness"):
        for name, cfg in _UNBIASED:
            f = harness.build_integrand(cfg)
            truth = f.mean_value(cfg.window_obj) if cfg.domain == "euclidean" else f.mean_value()
            pred = harness.predicted_mean(cfg, f)
            st = harness.empirical_mc_statistics(cfg)
            gap = abs(st.mean - truth)
            print(f"  {name:<28} gap {gap:.2e}  4 SE {4 * st.se_mean:.2e}")
            assert abs(pred - truth) < 1e-12 * max(1.0, abs(truth))
            assert gap <= 4 * st.se_mean + 1e-14


@criterion(9, "block power is invariant under the group action")
def test_criterion_09_invariance():
    with report(9, "invariance of power"):
        rng = np.random.default_rng(109)
        # torus: translations
        pts = rng.uniform(0, TWO_PI, (12, 2))
        base = torus.pattern_power(pts, 5).power
        worst_t = 0.0
        for _ in range(20):
            moved = samplers.homogenize(samplers.SamplePattern("torus", pts), rng).points
            worst_t = max(worst_t, np.abs(torus.pattern_power(moved, 5).power - base).max())
        # sphere: rotations
        sp = sphere.normalize(rng.standard_normal((12, 3)))
        base = sphere.pattern_power_sphere(sp, 10).power
        worst_s = 0.0
        for _ in range(20):
            moved = sphere.rotate(sp, sphere.random_quaternion(rng))
            worst_s = max(worst_s, np.abs(sphere.pattern_power_sphere(moved, 10).power - base).max())
        # euclidean lattice mode: translations are exact
        W = eu.EuclideanWindow(2, TWO_PI)
        shells = eu.ShellGrid(0.5, 16)
        ep = rng.uniform(0, TWO_PI, (12, 2))
        base = eu.radial_power(ep, W, shells).power
        worst_e = 0.0
        for _ in range(20):
            moved = W.wrap(ep + rng.uniform(-10, 10, 2))
            worst_e = max(worst_e, np.abs(eu.radial_power(moved, W, shells).power - base).max())
        # euclidean continuous mode: rotations. The n-direction trapezoid rule on the
        # circle is exact except for angular modes at multiples of n, and the mode-m
        # coefficient of exp(i lam r cos(theta)) is J_m(lam r), so each pair (i, j)
        # contributes at most 2 sum_k |J_kn(lam r_ij)| / N^2 to the error of a shell.
        Wo = eu.EuclideanWindow(2, TWO_PI, periodic=False)
        c = np.full(2, np.pi)
        cp = rng.uniform(1, 5, (12, 2))
        order = 32
        r = np.linalg.norm(cp[:, None, :] - cp[None, :, :], axis=-1).ravel()
        lam = shells.radii[:, None]
        alias = sum(np.abs(special.jv(k * order, lam * r)) for k in range(1, 20))
        bound = 2 * alias.sum(axis=1) / len(cp) ** 2
        ref = eu.radial_power(cp, Wo, shells, order).power
        worst_r, excess = 0.0, -np.inf
        for _ in range(20):
            a = rng.uniform(0, TWO_PI)
            R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
            moved = (cp - c) @ R.T + c
            diff = np.abs(eu.radial_power(moved, Wo, shells, order).power - ref)
            worst_r = max(worst_r, diff.max())
            # both evaluations can be off by the bound in opposite directions
            excess = max(excess, (diff - 2 * bound - 1e-12).max())
        print(f"  torus {worst_t:.1e}, sphere {worst_s:.1e}, euclidean shift {worst_e:.1e}, "
              f"euclidean rotation {worst_r:.1e} (quadrature bound {2 * bound.max():.1e})")
        assert worst_t < 1e-10 and worst_s < 1e-10 and worst_e < 1e-10
        assert excess <= 0


# ---------------------------------------------------------------------------
# convergence, euclidean consistency, determinism
# ---------------------------------------------------------------------------

@criterion(10, "variance slopes: iid -1.0 +- 0.3, jittered <= -2.0")
def test_criterion_10_convergence_slopes():
    with report(10, "convergence slopes"):
        t0 = time.perf_counter()
        Ns = np.array([8, 16, 32, 64, 128])
        slopes = {}
        for kind in ("iid-uniform", "jittered-grid"):
            v = [harness.empirical_mc_statistics(
                _cfg(sampler={"kind": kind, "n": int(N)}, integrand={"kind": "exp_cos", "scale": 1.0},
                     truncation={"L": 24}, R=10000, seed=10)).variance for N in Ns]
            slopes[kind] = np.polyfit(np.log(Ns), np.log(v), 1)[0]
        elapsed = time.perf_counter() - t0
        print(f"  iid {slopes['iid-uniform']:+.3f}, jittered {slopes['jittered-grid']:+.3f}, "
              f"{elapsed:.1f} s")
        assert abs(slopes["iid-uniform"] + 1.0) <= 0.3
        assert slopes["jittered-grid"] <= -2.0
        assert elapsed < 300


def _euclid_vs_torus(kind, dlam):
    f = integrands.mexican_hat(2, TWO_PI / 12, [np.pi, np.pi])
    W = eu.EuclideanWindow(2, TWO_PI)
    shells = eu.ShellGrid.covering(30.0, dlam)
    Ft = torus.function_coefficients(f.func, 2, 20, 64).power()
    if kind == "iid":
        St, Se = torus.iid_expected_power(2, 20, 16), eu.iid_radial_spectrum(W, shells, 16)
    else:
        St, Se = torus.jittered_expected_power(2, 20, [4, 4]), eu.jittered_radial_spectrum(W, shells, [4, 4])
    vt = torus.torus_variance_formula(Ft, St).variance
    ve = eu.euclidean_variance_formula(f.radial_power(shells, 32), Se, W).variance
    return abs(ve - vt) / abs(vt)


@criterion(11, "euclidean predictor on a periodic window matches the torus within 5%")
def test_criterion_11_euclidean_consistency():
    with report(11, "euclidean vs torus"):
        for kind in ("iid", "jittered"):
            gaps = [_euclid_vs_torus(kind, dlam) for dlam in (0.5, 0.25)]
            print(f"  {kind:<8} gaps {gaps[0]:.2e} -> {gaps[1]:.2e}")
            assert max(gaps) < 0.05
            assert gaps[1] < gaps[0]


@criterion(12, "compare is byte-identical on rerun and worker-count invariant")
def test_criterion_12_determinism(tmp_path):
    with report(12, "determinism"):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(_cfg(sampler={"kind": "jittered-grid", "n": 8},
                                       integrand={"kind": "exp_cos", "scale": 0.7},
                                       truncation={"L": 12}, R=5000,
                                       sampler_spectrum="estimated").to_json()))
        outs = {}
        for name, workers in (("a", 1), ("b", 1), ("w2", 2), ("w8", 8)):
            out = tmp_path / name
            assert cli.main(["compare", "--config", str(cfg), "--workers", str(workers),
                             "--out", str(out)]) in (0, 1)
            outs[name] = out
        for fname in ("report.json", "report.csv"):
            assert (outs["a"] / fname).read_bytes() == (outs["b"] / fname).read_bytes()
        ref = json.loads((outs["a"] / "report.json").read_text())
        for name in ("w2", "w8"):
            other = json.loads((outs[name] / "report.json").read_text())
            for key in ("variance", "mean"):
                np.testing.assert_allclose(other["empirical"][key], ref["empirical"][key],
                                           rtol=0, atol=1e-12)
            np.testing.assert_allclose(other["predicted"]["variance"], ref["predicted"]["variance"],
                                       rtol=0, atol=1e-12)
        print("  reruns byte-identical; workers 1/2/8 agree")
