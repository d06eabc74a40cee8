import math

import numpy as np
import pytest

from fracharm import (GridFunction, GridSpec, QuadratureConfig,
                      TestFunctionDescriptor, frac_laplacian,
                      frac_laplacian_constant, frac_laplacian_quadrature,
                      frac_laplacian_tail_bound, hilbert_pv_quadrature,
                      make_function, mean_projected, riesz_potential,
                      riesz_potential_constant, riesz_potential_quadrature,
                      riesz_transform)

PERIODIZED = QuadratureConfig(treat_as_compact=False)


def _gaussian(spec, width_frac=20.0):
    return make_function(TestFunctionDescriptor(
        kind="gaussian", center=(spec.L / 2,) * spec.n,
        width=spec.L / width_frac), spec)


def test_normalization_constants_closed_form():
    # n = 1, s = 1: the half Laplacian kernel is 1/(pi y^2)
    assert frac_laplacian_constant(1, 1.0) == pytest.approx(1 / np.pi, rel=1e-12)
    # n = 1, s = 1/2: potential constant Gamma(1/4)/(2^{1/2} pi^{1/2} Gamma(1/4))
    assert riesz_potential_constant(1, 0.5) == pytest.approx(
        1 / math.sqrt(2 * np.pi), rel=1e-12)


@pytest.mark.parametrize("s", [0.3, 0.7, 1.5])
def test_periodized_quadrature_matches_multiplier(s):
    spec = GridSpec(n=1, N=512, L=1.0)
    f = _gaussian(spec)
    a = frac_laplacian(f, s).values
    b = frac_laplacian_quadrature(f, s, PERIODIZED).values
    assert np.max(np.abs(a - b)) <= 4e-3 * np.max(np.abs(a))


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_periodized_error_decreases_with_refinement(s):
    errs = []
    for N in (128, 256, 512):
        spec = GridSpec(n=1, N=N, L=1.0)
        f = _gaussian(spec)
        a = frac_laplacian(f, s).values
        b = frac_laplacian_quadrature(f, s, PERIODIZED).values
        errs.append(np.max(np.abs(a - b)) / np.max(np.abs(a)))
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("s", [0.7, 1.5])
def test_compact_treatment_agrees_at_moderate_order(s):
    spec = GridSpec(n=1, N=1024, L=1.0)
    f = _gaussian(spec)
    a = frac_laplacian(f, s).values
    b = frac_laplacian_quadrature(f, s).values
    assert np.max(np.abs(a - b)) <= 5e-2 * np.max(np.abs(a))


def test_compact_treatment_2d_sanity():
    spec = GridSpec(n=2, N=64, L=1.0)
    f = _gaussian(spec, width_frac=12.0)
    a = frac_laplacian(f, 1.0).values
    b = frac_laplacian_quadrature(f, 1.0).values
    assert np.max(np.abs(a - b)) <= 0.1 * np.max(np.abs(a))


def test_quadrature_of_constant_is_zero_periodized():
    spec = GridSpec(n=1, N=64, L=1.0)
    c = GridFunction(spec, np.full(64, 2.5))
    out = frac_laplacian_quadrature(c, 0.6, PERIODIZED).values
    assert np.max(np.abs(out)) <= 1e-12


def test_singular_rule_improves_on_exclusion():
    spec = GridSpec(n=1, N=256, L=1.0)
    f = _gaussian(spec)
    a = frac_laplacian(f, 1.5).values
    scale = np.max(np.abs(a))
    errs = {}
    for rule in ("exclude", "second-difference-regular"):
        cfg = QuadratureConfig(treat_as_compact=False, singular_rule=rule)
        b = frac_laplacian_quadrature(f, 1.5, cfg).values
        errs[rule] = np.max(np.abs(a - b)) / scale
    assert errs["second-difference-regular"] < errs["exclude"]


def test_tail_bound_reported_not_added():
    spec = GridSpec(n=1, N=128, L=1.0)
    f = _gaussian(spec)
    bound = frac_laplacian_tail_bound(f, 0.5)
    assert bound > 0
    # doubling the data doubles the bound; it is an estimate, not a term
    f2 = GridFunction(spec, 2 * f.values)
    assert frac_laplacian_tail_bound(f2, 0.5) == pytest.approx(2 * bound)
    a = frac_laplacian_quadrature(f, 0.5).values
    b = frac_laplacian_quadrature(f2, 0.5).values
    assert np.max(np.abs(b - 2 * a)) <= 1e-10 * np.max(np.abs(a))


def test_quadrature_rejects_bad_parameters():
    spec = GridSpec(n=1, N=32, L=1.0)
    f = GridFunction(spec, np.zeros(32))
    with pytest.raises(ValueError, match="singular rule"):
        QuadratureConfig(singular_rule="bogus")
    with pytest.raises(ValueError):
        frac_laplacian_quadrature(f, 2.0)
    with pytest.raises(ValueError):
        riesz_potential_quadrature(f, 1.0)


def test_hilbert_quadrature_matches_multiplier():
    spec = GridSpec(n=1, N=1024, L=1.0)
    x = spec.coords()[0]
    cos = GridFunction(spec, np.cos(2 * np.pi * 2 * x))
    err_cos = np.max(np.abs(
        hilbert_pv_quadrature(cos).values - riesz_transform(cos, 1).values))
    assert err_cos <= 5e-3
    g = _gaussian(spec)
    hm = riesz_transform(g, 1).values
    hq = hilbert_pv_quadrature(g).values
    assert np.max(np.abs(hq - hm)) <= 1e-2 * np.max(np.abs(hm))


def test_hilbert_quadrature_first_order_convergence():
    errs = []
    for N in (256, 512, 1024):
        spec = GridSpec(n=1, N=N, L=1.0)
        g = _gaussian(spec)
        hm = riesz_transform(g, 1).values
        hq = hilbert_pv_quadrature(g).values
        errs.append(np.max(np.abs(hq - hm)) / np.max(np.abs(hm)))
    assert errs[1] <= 0.6 * errs[0]
    assert errs[2] <= 0.6 * errs[1]


def test_hilbert_quadrature_rejects_2d():
    spec = GridSpec(n=2, N=16, L=1.0)
    f = GridFunction(spec, np.zeros(spec.shape))
    with pytest.raises(ValueError, match="n = 1"):
        hilbert_pv_quadrature(f)


@pytest.mark.parametrize("s", [0.3, 0.5])
def test_potential_quadrature_matches_multiplier(s):
    spec = GridSpec(n=1, N=256, L=1.0)
    f = mean_projected(make_function(TestFunctionDescriptor(
        kind="random-bandlimited", seed=21, max_k=5), spec))[0]
    a = riesz_potential(f, s).values
    cfg = QuadratureConfig(treat_as_compact=False,
                           singular_rule="analytic-cell-average")
    b = riesz_potential_quadrature(f, s, cfg).values
    assert np.max(np.abs(a - b)) <= 2e-2 * np.max(np.abs(a))


def test_compact_potential_positive_kernel():
    spec = GridSpec(n=1, N=128, L=1.0)
    bump = make_function(TestFunctionDescriptor(
        kind="smooth-bump", center=(0.5,), radius=0.1), spec)
    out = riesz_potential_quadrature(bump, 0.5).values
    assert np.all(out >= 0)
    assert np.max(out) > 0


def test_periodized_weights_match_direct_image_sum():
    from fracharm.singular_ops import _offsets, _periodized_weights
    spec = GridSpec(n=1, N=32, L=1.0)
    offsets, dist = _offsets(spec)
    power = -1.5
    w = _periodized_weights(spec, offsets, dist, power, images=16)
    # brute-force lattice sum plus the analytic tail of the truncated part
    kmax = 200_000
    k = np.arange(-kmax, kmax + 1) * spec.L
    tail = 2 * (kmax * spec.L) ** (power + 1) / (-(power + 1))
    for idx in (1, 5, 16, 31):
        y = (offsets[idx, 0] * spec.h) % spec.L
        d = np.abs(y + k)
        direct = np.sum(np.where(d > 0, d, np.inf) ** power) + tail
        assert w[idx] == pytest.approx(direct, rel=1e-8)
