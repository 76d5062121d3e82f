import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonomy_instantons import gauge
from holonomy_instantons.exterior import ONE, Quaternion, coefficient_norm, relative_residual
from holonomy_instantons.models.forms import bundle_frame, spin7_forms
from holonomy_instantons.models.structure import (
    G2_SPINOR,
    NEARLY_KAHLER,
    SPIN7_SPINOR,
    DomainError,
    FiberPoint,
    build_model,
    random_bundle_point,
    random_link_point,
    random_unit_quaternion,
)

G2 = build_model(G2_SPINOR)
SPIN7 = build_model(SPIN7_SPINOR)
LINK = build_model(NEARLY_KAHLER)
INSTANTON_KEYS = ("psi_wedge_F", "star_gamma_wedge_F_minus_F")


def point_at(rng, r):
    return FiberPoint(a=random_unit_quaternion(rng) * math.sqrt(r))


def points(seed, n, r_range=(1e-2, 1e2)):
    rng = np.random.default_rng(seed)
    return [random_bundle_point(rng, r_range) for _ in range(n)]


# -- connections and curvature ---------------------------------------------------------------


def test_zero_connection_is_flat():
    conn = gauge.GaugeConnection(G2)
    pt = points(0, 1)[0]
    assert gauge.connection_form(conn)(pt).is_zero()
    assert coefficient_norm(gauge.curvature(conn)(pt)) == 0.0


def test_A1_at_unit_a():
    conn = gauge.GaugeConnection(G2, "zero", gauge.explicit(lambda r: 1.0 + 0.0 * r))
    pt = FiberPoint(a=ONE)
    fr = bundle_frame(G2, pt)
    assert relative_residual(gauge.connection_form(conn)(pt), -1.0 * fr.alpha.im()) == 0.0


def test_connection_is_imaginary_and_basic():
    from holonomy_instantons.models.cone import change_basis

    conn = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(1.0), gauge.explicit(lambda r: 0.3 / (1.0 + r)))
    for pt in points(1, 3):
        A = gauge.connection_form(conn)(pt)
        assert coefficient_norm(A.re()) <= 1e-15
        Aa = change_basis(A.to_float(), "da->alpha", G2, pt)
        vertical = [G2.gens.index(f"p{u}") for u in (1, 2, 3)]
        worst = max((c.norm() for m, c in Aa.terms.items() if any(m >> v & 1 for v in vertical)), default=0.0)
        assert worst <= 1e-12 * max(1.0, coefficient_norm(Aa))


def test_spin7_phi_base_with_zero_profile():
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi")
    for pt in points(2, 3):
        F = gauge.curvature(conn)(pt)
        assert relative_residual(F, 0.5 * spin7_forms(bundle_frame(SPIN7, pt))["Omega"]) <= 1e-14


def test_inverse_radius_profile_matches_singular_base():
    flat = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(0.0))
    singular = gauge.GaugeConnection(SPIN7, "singular_phi")
    for pt in points(3, 3):
        A, B = gauge.connection_form(flat)(pt), gauge.connection_form(singular)(pt)
        assert relative_residual(A, B) <= 1e-14


def test_guard_below_r_min():
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(1.0))
    with pytest.raises(DomainError):
        gauge.connection_form(conn)(FiberPoint(a=Quaternion(0.01)))


def test_connection_argument_checks():
    with pytest.raises(ValueError):
        gauge.GaugeConnection(G2, "weird")
    with pytest.raises(DomainError):
        gauge.GaugeConnection(LINK)
    with pytest.raises(ValueError):
        gauge.GaugeConnection(SPIN7, "zero", gauge.zero(), gauge.zero())


# -- closed-form decomposition -------------------------------------------------------------------


def test_g2_decomposition_at_origin():
    conn = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(0.0))
    c = gauge.curvature_decomposition(conn, 0.0).coefficients
    assert c[0] == pytest.approx(4.0 / 3.0, rel=1e-15)
    assert c[1] == pytest.approx(2.0 / 9.0, rel=1e-15)
    assert c[2] == pytest.approx(-1.0 / 3.0, rel=1e-15)
    assert c[3] == 0.0 and c[4] == 0.0


@given(st.floats(min_value=1e-2, max_value=1e2), st.floats(min_value=-2.9, max_value=10.0))
def test_spin7_first_coefficient_vanishes_on_solution(r, D):
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(D))
    one = gauge.curvature_decomposition(conn, r).coefficients[0]
    # (kappa/2)(1 - r f) is not zero in general; it is the Omega coefficient
    f = gauge.spin7_f(D).value(r)
    assert one == pytest.approx(0.5 * (1.0 - r * f), abs=1e-12)


def test_decomposition_gram_is_nonsingular():
    for model in (G2, SPIN7):
        for pt in points(4, 3):
            assert np.linalg.matrix_rank(gauge.decomposition_gram(model, pt)) == (5 if model is G2 else 3)


@pytest.mark.parametrize("C", [-2.9, 0.0, 1.0, 10.0])
def test_g2_curvature_matches_decomposition(C):
    conn = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(C))
    for pt in points(5, 3):
        F = gauge.curvature(conn)(pt)
        assert relative_residual(F, gauge.assemble_decomposition(conn, pt)) <= 1e-9
    assert gauge.curvature_decomposition(conn, 2.0).coefficients[3:] == (0.0, 0.0)


@given(st.floats(0.2, 2.0), st.floats(-1.0, 1.0), st.floats(-0.8, 0.3), st.integers(0, 2 ** 31))
@settings(max_examples=15)
def test_curvature_match_for_arbitrary_profiles(a, b, e, seed):
    conn = gauge.GaugeConnection(G2, "zero", gauge.explicit(lambda r: a * (1.0 + r) ** e),
                                 gauge.explicit(lambda r: b / (1.5 + r)))
    pt = points(seed, 1)[0]
    assert relative_residual(gauge.curvature(conn)(pt), gauge.assemble_decomposition(conn, pt)) <= 1e-9


def test_spin7_curvature_matches_decomposition():
    for base in ("levi_civita_phi", "singular_phi"):
        conn = gauge.GaugeConnection(SPIN7, base, gauge.explicit(lambda r: 0.7 / (1.0 + r)))
        for pt in points(6, 3):
            F = gauge.curvature(conn)(pt)
            assert relative_residual(F, gauge.assemble_decomposition(conn, pt)) <= 1e-9


# -- wedge tables ----------------------------------------------------------------------------


def test_identity_tables():
    for pt in points(7, 5):
        for table in (gauge.g2_connection_identities(G2, pt), gauge.psi_wedge_table(G2, pt)):
            assert max(table.values()) <= 1e-12, table
        for table in (gauge.spin7_connection_identities(SPIN7, pt), gauge.Psi_wedge_table(SPIN7, pt)):
            assert max(table.values()) <= 1e-12, table


# -- instanton residuals ---------------------------------------------------------------------


@pytest.mark.parametrize("kappa", [1.0, 2.0])
@pytest.mark.parametrize("C", [-2.9, 0.0, 1.0, 10.0])
def test_g2_instanton(C, kappa):
    model = build_model(G2_SPINOR, kappa)
    conn = gauge.GaugeConnection(model, "zero", gauge.g2_solution(C, kappa))
    rng = np.random.default_rng(8)
    for r in [0.0, 1e-2, 1.0, 1e2]:
        rep = gauge.g2_instanton_residual(conn, point_at(rng, r))
        assert rep.worst(INSTANTON_KEYS) <= 1e-9
        assert rep.residuals["coefficient_route"] <= 1e-9
        assert rep.residuals["instanton_coefficient_1"] <= 1e-12 * max(1.0, r)


def test_g2_residual_reacts_to_shift():
    conn = gauge.GaugeConnection(G2, "zero", gauge.shifted(gauge.g2_solution(1.0), 0.1))
    rep = gauge.g2_instanton_residual(conn, FiberPoint(a=Quaternion(1.0)))
    assert rep.worst(INSTANTON_KEYS) >= 1e-3


def test_g2_instanton_is_nontrivial():
    conn = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(1.0))
    assert gauge.curvature(conn)(FiberPoint(a=Quaternion(1.0))).norm() >= 0.01


@pytest.mark.parametrize("D", [1.0, 10.0])
def test_spin7_instanton(D):
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(D))
    rng = np.random.default_rng(9)
    for r in [1e-2, 1.0, 1e2]:
        rep = gauge.spin7_instanton_residual(conn, point_at(rng, r))
        assert rep.worst(("numeric", "closed_form")) <= 1e-9
        assert rep.residuals["coincidence"] <= 1e-12
    assert gauge.curvature(conn)(FiberPoint(a=Quaternion(1.0))).norm() >= 0.01


def test_spin7_residual_reacts_to_shift():
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.shifted(gauge.spin7_f(1.0), 0.1))
    assert gauge.spin7_instanton_residual(conn, FiberPoint(a=Quaternion(1.0))).residuals["numeric"] >= 1e-3


def test_spin7_inverse_radius_is_flat():
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(0.0))
    for pt in points(10, 3):
        assert coefficient_norm(gauge.curvature(conn)(pt)) <= 1e-12


@pytest.mark.xfail(strict=True, reason="with D = 0 the connection is Im(a^-1 da), which is flat")
def test_spin7_inverse_radius_is_nontrivial():
    conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(0.0))
    assert gauge.curvature(conn)(FiberPoint(a=Quaternion(1.0))).norm() >= 0.01


def test_spin7_requires_spin7_model():
    with pytest.raises(DomainError):
        gauge.spin7_instanton_residual(gauge.GaugeConnection(G2), FiberPoint(a=ONE))
    with pytest.raises(DomainError):
        gauge.g2_instanton_residual(gauge.GaugeConnection(SPIN7), FiberPoint(a=ONE))


# -- spectra ---------------------------------------------------------------------------------


@pytest.mark.parametrize("model,expected", [(G2, {-2.0: 7, 1.0: 14}), (SPIN7, {-3.0: 7, 1.0: 21})],
                         ids=["G2", "Spin7"])
def test_two_form_spectrum(model, expected):
    for pt in points(11, 2):
        spec = gauge.two_form_spectrum(model, pt)
        assert spec.multiplicities == expected
        assert max(min(abs(w - lam) for lam in expected) for w in spec.eigenvalues) <= 1e-9
        Ps = list(spec.projectors.values())
        n = Ps[0].shape[0]
        assert np.allclose(sum(Ps), np.eye(n), atol=1e-12)
        assert np.max(np.abs(Ps[0] @ Ps[1])) <= 1e-12


def test_instantons_have_no_seven_dimensional_part():
    g2 = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(1.0))
    sp = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(1.0))
    bad = gauge.GaugeConnection(G2, "zero", gauge.shifted(gauge.g2_solution(1.0), 0.3))
    for pt in points(12, 2):
        assert gauge.projected_fraction(g2, pt, -2.0) <= 1e-8
        assert gauge.projected_fraction(sp, pt, -3.0) <= 1e-8
        assert gauge.projected_fraction(bad, pt, -2.0) >= 1e-3


def test_flat_connection_has_zero_fraction():
    flat = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(0.0))
    assert gauge.projected_fraction(flat, points(13, 1)[0], -3.0) == 0.0


# -- nearly-Kaehler limit ----------------------------------------------------------------------


def test_limit_connection_is_hym():
    A = gauge.link_connection(LINK)
    rng = np.random.default_rng(14)
    for _ in range(3):
        rep = gauge.hym_residual(A, random_link_point(rng))
        assert rep.worst(("F^varpi2", "F^Omega1", "F^Omega2")) <= 1e-9
        assert rep.residuals["norm_F"] >= 0.01


def test_trivial_link_connection_is_flat():
    A = gauge.link_connection(LINK, 0.0)
    pt = random_link_point(np.random.default_rng(15))
    assert gauge.hym_residual(A, pt).residuals["norm_F"] == 0.0


def test_wrong_scale_is_not_hym():
    A = gauge.link_connection(LINK, -1.0)
    pt = random_link_point(np.random.default_rng(16))
    assert gauge.hym_residual(A, pt).worst(("F^varpi2", "F^Omega1", "F^Omega2")) >= 1e-3


def test_closed_form_limit_curvature():
    F = gauge.link_curvature(gauge.link_connection(LINK))
    rng = np.random.default_rng(17)
    for _ in range(3):
        pt = random_link_point(rng)
        assert relative_residual(F(pt), gauge.closed_form_limit_curvature(LINK, pt)) <= 1e-12


def test_link_connection_needs_link_model():
    with pytest.raises(DomainError):
        gauge.link_connection(G2)


def test_limit_coefficient_example():
    gap = gauge.limit_coefficient_scalar(1.0, 10.0) - gauge.LIMIT_SCALE
    assert gap == pytest.approx(0.036893203883495145, rel=1e-12)
    assert gauge.limit_coefficient_scalar(0.0, 1e8) == pytest.approx(-2.0 / 3.0, rel=1e-6)


def test_limit_connection_converges():
    devs = []
    rhos = np.geomspace(10.0, 1000.0, 16)
    for rho in rhos:
        _, _, dev = gauge.limit_connection(1.0, rho)
        devs.append(dev)
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert gauge.convergence_fit(list(zip(rhos, devs))) >= 2.9
    with pytest.raises(DomainError):
        gauge.limit_connection(1.0, 3.0)
