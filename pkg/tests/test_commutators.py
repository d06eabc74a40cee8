import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracharm import (CATALOG, EstimateDescriptor, GridFunction, GridSpec,
                      TestFunctionDescriptor, crw_commutator,
                      double_commutator_1d, fl_commutator, frac_laplacian,
                      hardy_duality_check, jacobian_pairing, l2_norm,
                      leibniz_defect, make_function, make_tlevels,
                      mean_projected, riesz_potential_commutator,
                      standard_family, verify_estimate)


def _bandlimited(spec, seed, max_k=6):
    return make_function(TestFunctionDescriptor(
        kind="random-bandlimited", seed=seed, max_k=max_k), spec)


def _bump(spec, center, radius):
    return make_function(TestFunctionDescriptor(
        kind="smooth-bump", center=center, radius=radius), spec)


SPEC1 = GridSpec(n=1, N=128, L=1.0)


def test_commutators_vanish_for_constant_multiplier():
    c = GridFunction(SPEC1, np.full(128, 2.5))
    f = _bandlimited(SPEC1, 4)
    assert l2_norm(crw_commutator(c, f, 1)) <= 1e-12
    assert l2_norm(fl_commutator(c, f, 0.5)) <= 1e-12
    u = mean_projected(f)[0]
    assert l2_norm(riesz_potential_commutator(c, u, 0.5)) <= 1e-12
    assert l2_norm(leibniz_defect(c, f, 0.5)) <= 1e-12
    d1, d2 = double_commutator_1d(c, f)
    assert l2_norm(d1) <= 1e-11
    assert l2_norm(d2) <= 1e-11


def test_fl_commutator_on_unit_function_is_frac_laplacian():
    phi = _bump(SPEC1, (0.5,), 0.2)
    one = GridFunction(SPEC1, np.ones(128))
    out = fl_commutator(phi, one, 0.7)
    exact = frac_laplacian(phi, 0.7)
    assert l2_norm(GridFunction(SPEC1, out.values - exact.values)) <= (
        1e-12 * l2_norm(exact))


def test_order_validation():
    phi = _bump(SPEC1, (0.5,), 0.2)
    f = _bandlimited(SPEC1, 1)
    with pytest.raises(ValueError):
        fl_commutator(phi, f, 1.0)
    with pytest.raises(ValueError):
        leibniz_defect(phi, f, 1.5)


def test_potential_commutator_records_masses():
    phi = _bump(SPEC1, (0.5,), 0.2)
    u = _bandlimited(SPEC1, 8)
    masses: list = []
    riesz_potential_commutator(phi, u, 0.5, masses=masses)
    assert len(masses) == 2
    assert masses[0] == pytest.approx(np.mean(phi.values * u.values))
    assert masses[1] == pytest.approx(np.mean(u.values))


def test_leibniz_defect_is_symmetric():
    f = _bandlimited(SPEC1, 2)
    g = _bump(SPEC1, (0.4,), 0.25)
    a = leibniz_defect(f, g, 0.6)
    b = leibniz_defect(g, f, 0.6)
    assert np.max(np.abs(a.values - b.values)) <= 1e-12


def test_double_commutator_symmetries():
    phi = _bump(SPEC1, (0.45,), 0.2)
    f = _bandlimited(SPEC1, 5)
    d1, d2 = double_commutator_1d(phi, f)
    e1, e2 = double_commutator_1d(f, phi)
    assert np.max(np.abs(d1.values + e1.values)) <= 1e-10
    assert np.max(np.abs(d2.values - e2.values)) <= 1e-10
    z1, _ = double_commutator_1d(phi, phi)
    assert l2_norm(z1) <= 1e-12
    spec2 = GridSpec(n=2, N=16, L=1.0)
    zero2 = GridFunction(spec2, np.zeros(spec2.shape))
    with pytest.raises(ValueError, match="n = 1"):
        double_commutator_1d(zero2, zero2)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 5000), a=st.floats(-3.0, 3.0), b=st.floats(-3.0, 3.0))
def test_commutator_bilinearity_property(seed, a, b):
    phi = _bump(SPEC1, (0.5,), 0.2)
    f1 = _bandlimited(SPEC1, seed)
    f2 = _bandlimited(SPEC1, seed + 1)
    combo = GridFunction(SPEC1, a * f1.values + b * f2.values)
    lhs = crw_commutator(phi, combo, 1).values
    rhs = (a * crw_commutator(phi, f1, 1).values
           + b * crw_commutator(phi, f2, 1).values)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(np.max(np.abs(rhs)), 1.0)


def test_jacobian_pairing_structure():
    spec = GridSpec(n=2, N=64, L=1.0)
    phi = _bump(spec, (0.5, 0.5), 0.25)
    u1 = _bandlimited(spec, 3, max_k=4)
    u2 = _bandlimited(spec, 9, max_k=4)
    # det(grad u) integrates to zero, so constant multipliers pair to zero
    const = GridFunction(spec, np.full(spec.shape, 1.7))
    assert abs(jacobian_pairing(const, (u1, u2))) <= 1e-10
    # equal (or parallel) components give a vanishing determinant
    assert abs(jacobian_pairing(phi, (u1, u1))) <= 1e-12
    # antisymmetry in the pair
    ab = jacobian_pairing(phi, (u1, u2))
    ba = jacobian_pairing(phi, (u2, u1))
    assert ab == pytest.approx(-ba, rel=1e-12)
    with pytest.raises(ValueError, match="method"):
        jacobian_pairing(phi, (u1, u2), method="volume")
    with pytest.raises(ValueError, match="n = 2"):
        jacobian_pairing(GridFunction(SPEC1, np.zeros(128)),
                         (GridFunction(SPEC1, np.zeros(128)),) * 2)


def test_jacobian_two_routes_agree():
    spec = GridSpec(n=2, N=64, L=1.0)
    phi = _bump(spec, (0.5, 0.5), 0.25)
    u1 = _bandlimited(spec, 3, max_k=4)
    u2 = _bandlimited(spec, 9, max_k=4)
    boundary = jacobian_pairing(phi, (u1, u2), method="boundary")
    details: dict = {}
    ext = jacobian_pairing(phi, (u1, u2), method="extension",
                           levels=make_tlevels(spec, M=48), details=details)
    assert ext == pytest.approx(boundary, rel=0.10)
    assert details["per_level"].shape == (48,)
    assert details["tail_estimate"] <= 1e-6 * np.max(np.abs(details["per_level"]))


def test_hardy_duality_check_values():
    phi = _bump(SPEC1, (0.45,), 0.2)
    f = _bandlimited(SPEC1, 6)
    g = _bandlimited(SPEC1, 7)
    ratio = hardy_duality_check(phi, f, g)
    assert 0 < ratio < 10
    # constant g has zero BMO norm and zero pairing (the integrand has mean 0)
    const = GridFunction(SPEC1, np.full(128, 3.0))
    assert hardy_duality_check(phi, f, const) == 0.0
    with pytest.raises(ValueError):
        hardy_duality_check(phi, f, g, p=1.0)


def test_estimate_descriptor_validation():
    with pytest.raises(ValueError, match="unknown estimate id"):
        EstimateDescriptor(id="not-an-estimate")
    with pytest.raises(ValueError, match="unknown parameters"):
        EstimateDescriptor(id="crw-bmo", params={"bogus": 1.0})
    # defaults are merged into the stored parameter set
    d = EstimateDescriptor(id="fl-comm-lorentz", params={"s": 0.4})
    assert d.params["s"] == 0.4
    assert d.params["sigma"] == 0.75
    assert d.arity == 2
    # inconsistent exponent relations are rejected by the validator
    with pytest.raises(ValueError, match="s1 \\+ s2"):
        EstimateDescriptor(id="double-comm-1d", params={"s1": 0.5, "s2": 0.7})


def test_standard_family_shape_and_determinism():
    fam = standard_family(2, SPEC1, n_members=12)
    assert len(fam) == 12
    assert all(len(tup) == 2 for tup in fam)
    fam2 = standard_family(2, SPEC1, n_members=12)
    assert fam == fam2
    # members are realizable on the grid
    for tup in fam:
        for t in tup:
            make_function(t, SPEC1)


def test_verify_estimate_requires_enough_samples():
    d = EstimateDescriptor(id="crw-bmo")
    fam = standard_family(2, SPEC1, n_members=4)
    with pytest.raises(ValueError, match="at least 8"):
        verify_estimate(d, fam, SPEC1)


def test_verify_estimate_report_and_determinism():
    d = EstimateDescriptor(id="crw-bmo")
    fam = standard_family(2, SPEC1, n_members=10)
    r1 = verify_estimate(d, fam, SPEC1)
    r2 = verify_estimate(d, fam, SPEC1)
    assert r1.passed
    assert r1.fitted_constant > 0
    assert r1.validation_max_ratio <= 1.5 * r1.fitted_constant
    assert set(r1.dilation_ratios) == {0.5, 2.0}
    assert r1.dilation_stability < 0.25
    assert r1.fitted_constant == r2.fitted_constant
    assert r1.dilation_ratios == r2.dilation_ratios
    assert [s["ratio"] for s in r1.samples] == [s["ratio"] for s in r2.samples]


def test_verify_estimate_zero_rhs_protocol():
    d = EstimateDescriptor(id="crw-bmo")
    fam = standard_family(2, SPEC1, n_members=10)
    # replace one multiplier by a constant: BMO RHS vanishes and the
    # commutator LHS must vanish with it
    const_phi = TestFunctionDescriptor(kind="constant", amplitude=2.0)
    fam[3] = (const_phi, fam[3][1])
    report = verify_estimate(d, fam, SPEC1)
    assert len(report.zero_rhs_samples) == 1
    assert report.zero_rhs_samples[0]["index"] == 3
    assert report.passed


def test_catalog_entries_are_well_formed():
    for eid, entry in CATALOG.items():
        assert entry["arity"] in (2, 3)
        d = EstimateDescriptor(id=eid)
        assert d.params.keys() == entry["defaults"].keys()
