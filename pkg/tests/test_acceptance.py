"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""

import json
import math

import numpy as np
import pytest

from holonomy_instantons import gauge, profiles
from holonomy_instantons.cli import emit_report, main
from holonomy_instantons.exterior import Form, GeneratorSet, Quaternion, coefficient_norm, relative_residual, wedge
from holonomy_instantons.models.cone import decay_fit, metric_deviation, nk_residuals
from holonomy_instantons.models.forms import fundamental_form, general_profile_residuals
from holonomy_instantons.models.structure import (
    G2_SPINOR,
    NEARLY_KAHLER,
    SPIN7_SPINOR,
    FiberPoint,
    build_model,
    random_bundle_point,
    random_link_point,
    random_unit_quaternion,
)
from holonomy_instantons.suites import SuiteConfig, run_suite

SEED = 20240611
G2 = build_model(G2_SPINOR)
SPIN7 = build_model(SPIN7_SPINOR)
LINK = build_model(NEARLY_KAHLER)


def verdict(number, title, checks):
    """checks: (label, observed, bound, kind) with kind 'le' or 'ge'."""
    failed = [c for c in checks if not (c[1] <= c[2] if c[3] == "le" else c[1] >= c[2])]
    detail = "; ".join(f"{lab} {obs:.3e} {'<=' if k == 'le' else '>='} {b:.3g}" for lab, obs, b, k in checks)
    print(f"\n{'PASS' if not failed else 'FAIL'} criterion {number}: {title} [{detail}]")
    assert not failed, [c[0] for c in failed]


def rng_for(tag):
    return np.random.default_rng([SEED, sum(map(ord, tag))])


def point_at(rng, r):
    return FiberPoint(a=random_unit_quaternion(rng) * math.sqrt(r))


def worst(d, keys=None):
    return max(float(d[k]) for k in (keys or d))


# -- 1 ----------------------------------------------------------------------------------


def test_criterion_01_quaternionic_identities():
    gens = GeneratorSet.of([f"e{k}" for k in range(7)])
    rng = rng_for("algebra")
    sq = tri = 0.0
    for _ in range(1000):
        phi = Form(gens, 1, {1 << k: Quaternion(*rng.uniform(-1, 1, 4)) for k in range(7)})
        pp, pb = wedge(phi, phi), phi.conj()
        sq = max(sq, relative_residual(wedge(phi.im(), phi.im()), pp), relative_residual(pp, wedge(pb, pb)))
        tri = max(tri, relative_residual(wedge(wedge(pb, phi), pb).im(), -3.0 * wedge(pp, pb).im()))
    verdict(1, "quaternionic 1-form identities over 1000 forms",
            [("squares", sq, 1e-13, "le"), ("triple", tri, 1e-13, "le")])


# -- 2 ----------------------------------------------------------------------------------


def test_criterion_02_connection_identities():
    rng = rng_for("identities")
    g2 = sp = 0.0
    for _ in range(100):
        g2 = max(g2, worst(gauge.g2_connection_identities(G2, random_bundle_point(rng, (1e-3, 1e3)))))
        sp = max(sp, worst(gauge.spin7_connection_identities(SPIN7, random_bundle_point(rng, (1e-3, 1e3)))))
    verdict(2, "connection-form identities at 100 points each", [("G2 (6)", g2, 1e-12, "le"), ("Spin(7) (3)", sp, 1e-12, "le")])


# -- 3 ----------------------------------------------------------------------------------


def test_criterion_03_closedness():
    rng = rng_for("closed")
    out = []
    for kappa in (1.0, 2.0):
        gamma, psi, _ = fundamental_form(build_model(G2_SPINOR, kappa))
        pts = [random_bundle_point(rng) for _ in range(10)]
        out.append((f"d gamma k={kappa:g}", max(coefficient_norm(gamma.d()(p)) for p in pts), 1e-10, "le"))
        out.append((f"d *gamma k={kappa:g}", max(coefficient_norm(psi.d()(p)) for p in pts), 1e-10, "le"))
    Psi, _, _ = fundamental_form(SPIN7)
    out.append(("d Psi", max(coefficient_norm(Psi.d()(random_bundle_point(rng))) for _ in range(10)), 1e-10, "le"))
    general = 0.0
    for _ in range(20):
        c1, c2 = rng.uniform(0.3, 3.0, 2)
        e1, e2 = rng.uniform(-0.7, 0.7, 2)
        kappa = float(rng.choice([1.0, 2.0]))
        res = general_profile_residuals(build_model(G2_SPINOR, kappa), lambda x: c1 * (1.0 + x) ** e1,
                                        lambda x: c2 * (2.0 + x) ** e2, random_bundle_point(rng, (1e-2, 1e2)))
        general = max(general, worst(res))
    out.append(("general profiles", general, 1e-9, "le"))
    verdict(3, "closedness and general-profile formulas", out)


# -- 4 ----------------------------------------------------------------------------------


def _match(conn, pt):
    return relative_residual(gauge.curvature(conn)(pt), gauge.assemble_decomposition(conn, pt))


def test_criterion_04_curvature_equivalence():
    rng = rng_for("curvature")
    sol = {"G2": 0.0, "Spin7": 0.0}
    rand = {"G2": 0.0, "Spin7": 0.0}
    cs, ds = (-2.9, -1.0, 0.0, 1.0, 10.0), (0.0, 1.0, 10.0)
    for k in range(100):
        pt = random_bundle_point(rng, (1e-2, 1e2))
        conn = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(cs[k % 5]))
        sol["G2"] = max(sol["G2"], _match(conn, pt))
        conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(ds[k % 3]))
        sol["Spin7"] = max(sol["Spin7"], _match(conn, pt))
        a, b, e = rng.uniform(0.2, 2.0), rng.uniform(-1.0, 1.0), rng.uniform(-0.8, 0.3)
        conn = gauge.GaugeConnection(G2, "zero", gauge.explicit(lambda r: a * (1.0 + r) ** e),
                                     gauge.explicit(lambda r: b / (1.5 + r)))
        rand["G2"] = max(rand["G2"], _match(conn, pt))
        conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.explicit(lambda r: a * (1.0 + r) ** e))
        rand["Spin7"] = max(rand["Spin7"], _match(conn, pt))
    verdict(4, "numeric curvature equals the closed decomposition at 100 points",
            [(f"{m} {kind}", d[m], 1e-10, "le") for kind, d in (("solution", sol), ("random", rand)) for m in d])


# -- 5 ----------------------------------------------------------------------------------


def test_criterion_05_instanton_residuals():
    rng = rng_for("instanton")
    g2_grid = [0.0] + [float(x) for x in np.geomspace(1e-2, 100.0, 12)]
    psi_f = star = route = 0.0
    for C in (-2.9, -1.0, 0.0, 1.0, 10.0):
        conn = gauge.GaugeConnection(G2, "zero", gauge.g2_solution(C))
        for r in g2_grid:
            rep = gauge.g2_instanton_residual(conn, point_at(rng, r)).residuals
            psi_f = max(psi_f, rep["psi_wedge_F"])
            star = max(star, rep["star_gamma_wedge_F_minus_F"])
            route = max(route, rep["coefficient_route"])
    sp = closed = 0.0
    for D in (0.0, 1.0, 10.0):
        conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(D))
        for r in np.geomspace(1e-2, 100.0, 12):
            rep = gauge.spin7_instanton_residual(conn, point_at(rng, float(r))).residuals
            sp, closed = max(sp, rep["numeric"]), max(closed, rep["closed_form"])
    one = FiberPoint(a=Quaternion(1.0))
    sensor_g2 = min(worst(gauge.g2_instanton_residual(
        gauge.GaugeConnection(G2, "zero", gauge.shifted(gauge.g2_solution(C), 0.1)), one).residuals,
        ("psi_wedge_F", "star_gamma_wedge_F_minus_F")) for C in (-2.9, -1.0, 0.0, 1.0, 10.0))
    sensor_sp = min(gauge.spin7_instanton_residual(
        gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.shifted(gauge.spin7_f(D), 0.1)), one).residuals["numeric"]
        for D in (0.0, 1.0, 10.0))
    verdict(5, "instanton residuals on the r-grids, with sensors", [
        ("G2 psi^F", psi_f, 1e-9, "le"), ("G2 *(gamma^F)-F", star, 1e-8, "le"), ("G2 coefficient route", route, 1e-9, "le"),
        ("Spin7 *(Psi^F)-F", sp, 1e-8, "le"), ("Spin7 closed form", closed, 1e-8, "le"),
        ("G2 sensor", sensor_g2, 1e-3, "ge"), ("Spin7 sensor", sensor_sp, 1e-3, "ge")])


# -- 6 ----------------------------------------------------------------------------------


def test_criterion_06_non_triviality():
    one = FiberPoint(a=Quaternion(1.0))
    g2 = gauge.curvature(gauge.GaugeConnection(G2, "zero", gauge.g2_solution(0.0)))(one).norm()
    sp = gauge.curvature(gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(0.0)))(one).norm()
    FA = gauge.link_curvature(gauge.link_connection(LINK))
    rng = rng_for("link")
    nk = min(FA(random_link_point(rng)).norm() for _ in range(5))
    # with D = 0 the profile is 1/r and the connection is Im(a^-1 da), which is flat
    verdict(6, "curvatures are non-zero", [("G2 C=0", g2, 0.01, "ge"), ("Spin7 D=0", sp, 0.01, "ge"),
                                           ("link F_tilde", nk, 0.01, "ge")])


# -- 7 ----------------------------------------------------------------------------------


def test_criterion_07_spectra():
    rng = rng_for("spectra")
    out = []
    for model, expected, lam7 in ((G2, {-2.0: 7, 1.0: 14}, -2.0), (SPIN7, {-3.0: 7, 1.0: 21}, -3.0)):
        ev = idem = 0.0
        mult_ok = True
        for _ in range(5):
            spec = gauge.two_form_spectrum(model, random_bundle_point(rng, (1e-2, 1e2)))
            mult_ok &= spec.multiplicities == expected
            ev = max(ev, max(min(abs(w - lam) for lam in expected) for w in spec.eigenvalues))
            idem = max(idem, max(float(np.max(np.abs(P @ P - P))) for P in spec.projectors.values()))
        out += [(f"{model.name} eigenvalues", ev if mult_ok else math.inf, 1e-9, "le"),
                (f"{model.name} idempotent", idem, 1e-12, "le")]
    frac = 0.0
    for _ in range(3):
        pt = random_bundle_point(rng, (1e-2, 1e2))
        for C in (-2.9, 0.0, 1.0, 10.0):
            frac = max(frac, gauge.projected_fraction(gauge.GaugeConnection(G2, "zero", gauge.g2_solution(C)), pt, -2.0))
        for D in (0.0, 1.0, 10.0):
            conn = gauge.GaugeConnection(SPIN7, "levi_civita_phi", gauge.spin7_f(D))
            frac = max(frac, gauge.projected_fraction(conn, pt, -3.0))
    out.append(("|P7 F|/|F|", frac, 1e-8, "le"))
    verdict(7, "two-form spectra and projections", out)


# -- 8 ----------------------------------------------------------------------------------


def test_criterion_08_nearly_kahler():
    rng = rng_for("nk")
    A = gauge.link_connection(LINK)
    su3 = hym = 0.0
    for _ in range(100):
        pt = random_link_point(rng)
        su3 = max(su3, worst(nk_residuals(LINK, pt)))
        hym = max(hym, worst(gauge.hym_residual(A, pt).residuals, ("F^varpi2", "F^Omega1", "F^Omega2")))
    verdict(8, "SU(3) structure and HYM limit at 100 link points",
            [("structure", su3, 1e-10, "le"), ("HYM", hym, 1e-10, "le")])


# -- 9 ----------------------------------------------------------------------------------


def test_criterion_09_asymptotics():
    rhos = [float(x) for x in np.geomspace(10.0, 1000.0, 16)]
    metric = decay_fit([(rho, metric_deviation(rho)) for rho in rhos])
    out = [("|metric exponent - 3|", abs(metric - 3.0), 0.05, "le")]
    for C in (1.0, 10.0):
        exp_c = gauge.convergence_fit([(rho, gauge.limit_connection(C, rho)[2]) for rho in rhos])
        out.append((f"connection exponent C={C:g}", exp_c, 2.9, "ge"))
    verdict(9, "decay rates on rho in [10, 1000]", out)


# -- 10 ---------------------------------------------------------------------------------


def test_criterion_10_ode():
    lin = list(np.linspace(0.0, 100.0, 401))
    log = list(np.geomspace(1e-2, 100.0, 401))
    closed = 0.0
    for C in (-2.9, -1.0, 0.0, 1.0, 10.0):
        closed = max(closed, profiles.ode_residual(profiles.G2_RICCATI, lambda r: profiles.closed_form("g2", r, C), lin))
    identity = 0.0
    for D in (0.0, 1.0, 10.0):
        closed = max(closed, profiles.ode_residual(profiles.SPIN7_F_RICCATI,
                                                   lambda r: profiles.closed_form("spin7_f", r, D), log))
        closed = max(closed, profiles.ode_residual(profiles.SPIN7_G_RICCATI,
                                                   lambda r: profiles.closed_form("spin7_g", r, D / 5), log))
        identity = max(identity, max(abs(profiles.closed_form("spin7_f", r, D)[0] - 1.0 / r
                                         - profiles.closed_form("spin7_g", r, D / 5)[0]) for r in log))
    exact0 = lambda r: profiles.closed_form("g2", r, 0.0)[0]  # noqa: E731
    sample = profiles.integrate(profiles.G2_RICCATI, 2.0 / 3.0, profiles.IntegratorConfig(1e-3, 0.0, 50.0))
    rk4 = profiles.sup_error(sample, exact0)
    # at h = 1e-3 the error is at roundoff level, so the order is measured where truncation dominates
    ratio = profiles.order_ratio(profiles.G2_RICCATI, 2.0 / 3.0, exact0, 0.0, 50.0, 0.1)
    coupled = 0.0
    for C in (-2.9, 0.0, 1.0, 10.0):
        _, y, _ = profiles.integrate_coupled(profiles.closed_form("g2", 0.1, C)[0], 0.0,
                                             profiles.IntegratorConfig(1e-2, 0.1, 50.0))
        coupled = max(coupled, float(np.max(np.abs(y[:, 1]))))
    verdict(10, "ODE profiles", [
        ("closed-form residual", closed, 1e-10, "le"), ("RK4 sup error", rk4, 1e-6, "le"),
        ("|order ratio - 16|", abs(ratio - 16.0), 4.0, "le"), ("D = 5C identity", identity, 1e-12, "le"),
        ("g = 0 invariance", coupled, 1e-12, "le")])


# -- 11 ---------------------------------------------------------------------------------


def test_criterion_11_singularity_scans():
    hits = profiles.singularity_scan("g2", [-4.0])
    root = (4.0 / 3.0) ** 1.5 - 1.0
    gap = abs(hits[0].radius - root) if len(hits) == 1 else math.inf
    smooth = profiles.singularity_scan("g2", [-2.9, 0.0, 1.0, 10.0])
    rep = run_suite(SuiteConfig(suite="ode", samples=1).validate())
    scan = next(c for c in rep.cases if c.case_id.startswith("scan.spin7_f"))
    flagged = scan.passed and "contradicts" in scan.notes
    verdict(11, "singularity scans", [("C=-4 root error", gap, 1e-8, "le"), ("roots for smooth C", len(smooth), 0, "le"),
                                      ("D in (-1,0) family flagged", float(flagged), 1.0, "ge")])


# -- 12 ---------------------------------------------------------------------------------


def test_criterion_12_cli(tmp_path, capsys):
    cfg = SuiteConfig(suite="algebra", samples=20).validate()
    a = emit_report(run_suite(cfg), "json", include_wall_time=False)
    b = emit_report(run_suite(cfg), "json", include_wall_time=False)
    json.loads(a)
    ok = main(["--suite", "ode", "--samples", "1", "--d", "1"])
    fail = main(["--suite", "ode", "--samples", "1", "--d", "1", "--tol", "1e-300"])
    bad = main(["--suite", "ode", "--samples", "0"])
    with pytest.raises(SystemExit) as usage:
        main(["--suite", "nope"])
    capsys.readouterr()
    verdict(12, "deterministic JSON and exit codes", [
        ("byte differences", float(a != b), 0.0, "le"), ("exit pass", abs(ok - 0), 0, "le"),
        ("exit fail", abs(fail - 1), 0, "le"), ("exit config", abs(bad - 2), 0, "le"),
        ("exit usage", abs(usage.value.code - 2), 0, "le")])
