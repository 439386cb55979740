import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from homovar import integrands, torus

TWO_PI = 2 * np.pi


def test_frequency_box_and_trivial_index():
    k = torus.torus_frequencies(2, 2)
    assert k.shape == (25, 2)
    assert tuple(k[torus.trivial_index(2, 2)]) == (0, 0)
    assert len({tuple(r) for r in k}) == 25


@pytest.mark.parametrize("d", [1, 2, 3])
def test_pattern_trivial_coefficient(d):
    pts = np.random.default_rng(d).uniform(0, TWO_PI, (7, d))
    c = torus.pattern_coefficient_array(pts, 2)
    assert c[torus.trivial_index(d, 2)] == pytest.approx(TWO_PI ** (-d / 2), rel=1e-14)


def test_pattern_coefficient_examples():
    c = torus.pattern_coefficients(np.array([[0.0]]), 1)
    from homovar.spectra import BlockLabel
    assert c[BlockLabel("torus", (1,))][0] == pytest.approx(1 / np.sqrt(TWO_PI))
    c = torus.pattern_coefficient_array(np.array([[0.0], [np.pi]]), 1)
    assert abs(c[2]) < 1e-16


def test_empty_pattern_rejected():
    with pytest.raises(ValueError):
        torus.pattern_coefficient_array(np.zeros((0, 1)), 2)


def test_function_coefficients_examples():
    one = torus.function_coefficients(lambda p: np.ones(len(p)), 1, 3, 8)
    expected = np.zeros(7, dtype=complex)
    expected[3] = np.sqrt(TWO_PI)
    np.testing.assert_allclose(one.coeffs, expected, atol=1e-14)

    cos = torus.function_coefficients(lambda p: np.cos(p[:, 0]), 1, 3, 8)
    expected[:] = 0
    expected[[2, 4]] = np.pi / np.sqrt(TWO_PI)
    np.testing.assert_allclose(cos.coeffs, expected, atol=1e-14)
    # oracle: high-resolution midpoint rule of int cos(p) e^{-ip} dp
    p = (np.arange(4096) + 0.5) * TWO_PI / 4096
    assert np.sum(np.cos(p) * np.exp(-1j * p)) * TWO_PI / 4096 == pytest.approx(np.pi)

    b = torus.basis_function([1, -2])
    got = torus.function_coefficients(b, 2, 3, 8)
    target = np.zeros(49, dtype=complex)
    idx = np.ravel_multi_index((1 + 3, -2 + 3), (7, 7))
    target[idx] = 1
    np.testing.assert_allclose(got.coeffs, target, atol=1e-14)


def test_function_coefficients_aliasing_guard():
    with pytest.raises(ValueError, match="exceed"):
        torus.function_coefficients(np.cos, 1, 4, 8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 2), st.integers(0, 4))
def test_roundtrip_analyse_evaluate(seed, d, L):
    rng = np.random.default_rng(seed)
    n = (2 * L + 1) ** d
    f = torus.BandlimitedTorusFunction(d, L, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    back = torus.function_coefficients(f, d, L, 2 * L + 3)
    np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-10)


def test_parseval_on_grid():
    rng = np.random.default_rng(5)
    f = torus.BandlimitedTorusFunction(2, 3, rng.standard_normal(49) + 1j * rng.standard_normal(49))
    M = 16
    g = TWO_PI * np.arange(M) / M
    mesh = np.stack(np.meshgrid(g, g, indexing="ij"), -1).reshape(-1, 2)
    quad = np.sum(np.abs(f(mesh)) ** 2) * (TWO_PI / M) ** 2
    assert f.power().total() == pytest.approx(quad, rel=1e-8)


def test_mc_estimate_examples():
    one = integrands.torus_constant(1)
    cos = integrands.torus_cos(1)
    pts = np.random.default_rng(0).uniform(0, TWO_PI, (5, 1))
    assert torus.mc_estimate(one, pts) == pytest.approx(1.0)
    assert torus.mc_estimate(cos, np.array([[0.0]])) == pytest.approx(1.0)
    square = np.array([[0.0], [np.pi / 2], [np.pi], [3 * np.pi / 2]])
    assert abs(torus.mc_estimate(cos, square)) < 1e-15


def test_mc_estimate_dimension_mismatch():
    with pytest.raises(ValueError):
        torus.mc_estimate(integrands.torus_cos(2), np.zeros((3, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 20))
def test_spectral_identity(seed, d, N):
    rng = np.random.default_rng(seed)
    L = 2
    n = (2 * L + 1) ** d
    f = torus.BandlimitedTorusFunction(d, L, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    pts = rng.uniform(0, TWO_PI, (N, d))
    assert abs(torus.mc_estimate(f, pts) - torus.spectral_dot(f, pts)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 2), elements=st.floats(0, TWO_PI, exclude_max=True)),
       arrays(np.float64, 2, elements=st.floats(-10, 10)))
def test_translation_invariance_of_power(pts, shift):
    a = torus.pattern_power(pts, 3).power
    b = torus.pattern_power(torus.wrap(pts + shift), 3).power
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_real_flag_conjugate_symmetry():
    f = integrands.torus_exp_cos(2, 0.5, L=5)
    assert f.real and f.conjugate_symmetric()
    g = torus.basis_function([1, 0])
    assert not g.conjugate_symmetric()
    vals = f(np.random.default_rng(0).uniform(0, TWO_PI, (10, 2)))
    assert np.abs(vals.imag).max() < 1e-13


def test_variance_formula_examples():
    S = torus.iid_expected_power(1, 2, 8)
    assert torus.torus_variance_formula(integrands.torus_constant(1).restrict(2).power(),
                                        S).variance == 0
    assert torus.torus_variance_formula(integrands.torus_cos(1).restrict(2).power(),
                                        S).variance == pytest.approx(1 / 16, rel=1e-13)
    grid = torus.lattice_expected_power(1, 2, 4)
    assert torus.torus_variance_formula(integrands.torus_cos(1).restrict(2).power(),
                                        grid).variance == 0.0


def test_shifted_four_point_rule_integrates_cos_exactly():
    for shift in np.linspace(0, TWO_PI, 101):
        pts = shift + TWO_PI * np.arange(4) / 4
        assert abs(np.cos(pts).mean()) < 1e-15


def test_variance_formula_rejects_sphere():
    from homovar import sphere
    with pytest.raises(ValueError):
        torus.torus_variance_formula(sphere.iid_expected_power_sphere(2, 3),
                                     sphere.iid_expected_power_sphere(2, 3))


def test_iid_expected_power_values():
    S = torus.iid_expected_power(2, 3, 5)
    trivial = torus.trivial_index(2, 3)
    assert S.power[trivial] == pytest.approx(1 / TWO_PI ** 2)
    assert np.allclose(np.delete(S.power, trivial), 1 / (5 * TWO_PI ** 2))


def test_iid_expected_power_brute_force():
    rng = np.random.default_rng(11)
    pts = rng.uniform(0, TWO_PI, (20_000, 4, 1))
    p = np.array([torus.pattern_power(x, 2).power for x in pts])
    se = p.std(axis=0, ddof=1) / np.sqrt(len(p))
    ref = torus.iid_expected_power(1, 2, 4).power
    assert np.all(np.abs(p.mean(axis=0) - ref) <= 4 * se + 1e-12)


def test_jittered_expected_power_brute_force():
    rng = np.random.default_rng(12)
    M = np.array([2, 3])
    cells = np.indices(M).reshape(2, -1).T
    p = []
    for _ in range(20_000):
        pts = (cells + rng.random(cells.shape)) / M * TWO_PI + rng.random(2) * TWO_PI
        p.append(torus.pattern_power(pts, 3).power)
    p = np.array(p)
    se = p.std(axis=0, ddof=1) / np.sqrt(len(p))
    ref = torus.jittered_expected_power(2, 3, M).power
    assert np.all(np.abs(p.mean(axis=0) - ref) <= 4 * se + 1e-12)


def test_lattice_expected_power_matches_pattern():
    g = (1, 5)
    N = 13
    j = np.arange(N)[:, None]
    pts = np.mod(j * np.array(g), N) / N * TWO_PI
    np.testing.assert_allclose(torus.pattern_power(pts, 6).power,
                               torus.lattice_expected_power(2, 6, N, g).power, atol=1e-14)


def test_restrict_tracks_tail():
    f = integrands.torus_exp_cos(1, 1.0, L=20)
    r = f.restrict(3)
    assert r.power().total() + r.tail == pytest.approx(f.power().total() + f.tail, rel=1e-14)
    assert r.coefficient([2]) == f.coefficient([2])
    assert r.restrict(20).coefficient([7]) == 0
