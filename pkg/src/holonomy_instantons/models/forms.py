"""Canonical invariant forms, Bryant-Salamon profiles and fundamental forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..dual import sqrt
from ..exterior import Form, Quaternion, module_action, wedge, wedge_all
from .structure import (
    G2_CONE,
    G2_SPINOR,
    NEARLY_KAHLER,
    SPIN7_SPINOR,
    DomainError,
    FiberPoint,
    FieldForm,
    StructureModel,
    qform,
)


@dataclass
class Frame:
    """Quaternionic building blocks of a bundle model at one point.

    ``omega`` and ``phi`` are the tautological and connection forms, ``a`` the
    fibre coordinate and ``alpha = da - a phi``.  The same blocks can be
    expressed over a different coframe (see :func:`polar_frame`), and all
    canonical forms are computed from them alone.
    """

    a: Quaternion
    omega: Form
    phi: Form
    alpha: Form
    kappa: float

    @property
    def gens(self):
        return self.omega.gens

    @property
    def r(self):
        return self.a.norm2()

    @property
    def dr(self) -> Form:
        """d(a abar) = alpha abar + a alphabar."""
        return self.alpha * self.a.conj() + self.a * self.alpha.conj()


def bundle_frame(model: StructureModel, pt: FiberPoint) -> Frame:
    if not model.is_bundle:
        raise DomainError(f"{model.name} is not a spinor-bundle model")
    a = pt.a
    omega = model.qform("w", imaginary=model.name == G2_SPINOR)
    phi = model.qform("p")
    da = model.qform("da", imaginary=False)
    return Frame(a, omega, phi, da - a * phi, model.kappa)


@dataclass
class LinkFrame:
    """theta_1, theta_2, theta_3 recombined as omega, phi and tau = theta_3 - phi."""

    omega: Form
    phi: Form
    tau: Form


def link_frame(model: StructureModel) -> LinkFrame:
    t1, t2, t3 = (qform(model.gens, f"t{i}_") for i in (1, 2, 3))
    # omega = theta_1 - theta_2 gives dphi + phi^phi = -(1/4) omega^omega, i.e. kappa = 1
    omega = t1 - t2
    phi = 0.5 * (t1 + t2)
    return LinkFrame(omega, phi, t3 - phi)


def polar_radius(rho):
    """The fibre radius |a| of the cone model: |a|^2 = (rho/3)^3 - 1."""
    return sqrt((rho / 3.0) ** 3 - 1.0)


def polar_frame(model: StructureModel, pt: FiberPoint) -> Frame:
    """The G2 bundle blocks in cone coordinates: a = |a| g3, alpha = g3 (d|a| + |a| tau)."""
    if model.name != G2_CONE:
        raise DomainError("polar frame needs the G2Cone model")
    link = link_frame(model)
    rho, g3 = pt.rho, pt.g3
    s = polar_radius(rho)
    ds = Form.generator(model.gens, "drho", rho * rho / (18.0 * s))
    alpha = g3 * (ds + s * link.tau)
    return Frame(s * g3, link.omega, link.phi, alpha, 1.0)


# ---------------------------------------------------------------------------
# G2 spinor bundle of S^3


def components(form: Form, units=range(4)) -> list[Form]:
    return [form.component(u) for u in units]


def g2_forms(fr: Frame) -> dict[str, Form]:
    omega, alpha, a = fr.omega, fr.alpha, fr.a
    Omega = 0.5 * wedge(omega, omega)
    B = 0.5 * wedge(alpha.conj(), alpha)
    w = components(omega, (1, 2, 3))
    al = components(alpha)
    gamma1 = wedge_all(*w)
    psi1 = wedge_all(*al)
    return {
        "alpha": alpha,
        "Omega": Omega,
        "B": B,
        "gamma1": gamma1,
        "gamma2": -wedge(omega, B).re(),
        "psi1": psi1,
        "psi2": -wedge(Omega, B).re(),
        "A1": (a * alpha.conj()).im(),
        "A2": module_action(a, omega, "sandwich"),
        "dr": fr.dr,
        "r": Form.scalar(fr.gens, fr.r),
        "aOmegaabar": module_action(a, Omega, "sandwich"),
    }


def spin7_forms(fr: Frame) -> dict[str, Form]:
    omega, alpha, a = fr.omega, fr.alpha, fr.a
    Omega = 0.5 * wedge(omega.conj(), omega)
    B = 0.5 * wedge(alpha.conj(), alpha)
    return {
        "alpha": alpha,
        "Omega": Omega,
        "B": B,
        "Psi1": wedge_all(*components(alpha)),
        "Psi2": -wedge(B, Omega).re(),
        "Psi3": wedge_all(*components(omega)),
        "A1": (a.conj() * alpha).im(),
        "dr": fr.dr,
        "r": Form.scalar(fr.gens, fr.r),
    }


# ---------------------------------------------------------------------------
# profiles


@dataclass
class BSProfiles:
    """Bryant-Salamon radial functions and their r-derivatives (r = |a|^2)."""

    sigma: object
    tau: object
    dsigma: object
    dtau: object
    f: object = None
    g: object = None
    df: object = None
    dg: object = None


def bs_profiles(model_name: str, kappa: float, r) -> BSProfiles:
    if _less_than_zero(r):
        raise DomainError("r must be non-negative")
    s = 1.0 + r
    if model_name in (G2_SPINOR, G2_CONE):
        c = math.sqrt(3.0 * kappa)
        f = c * s ** (1.0 / 3.0)
        g = 2.0 * s ** (-1.0 / 6.0)
        return BSProfiles(
            sigma=16.0 * s ** (-2.0 / 3.0),
            tau=-12.0 * kappa * s ** (1.0 / 3.0),
            dsigma=-(32.0 / 3.0) * s ** (-5.0 / 3.0),
            dtau=-4.0 * kappa * s ** (-2.0 / 3.0),
            f=f, g=g,
            df=(c / 3.0) * s ** (-2.0 / 3.0),
            dg=-(1.0 / 3.0) * s ** (-7.0 / 6.0),
        )
    if model_name == SPIN7_SPINOR:
        return BSProfiles(
            sigma=4.0 * s ** (-2.0 / 5.0),
            tau=5.0 * kappa * s ** (3.0 / 5.0),
            dsigma=-1.6 * s ** (-7.0 / 5.0),
            dtau=3.0 * kappa * s ** (-2.0 / 5.0),
        )
    raise DomainError(f"no Bryant-Salamon profiles for {model_name}")


def _less_than_zero(r) -> bool:
    from ..dual import standard_part
    import numpy as np
    return bool(np.any(np.asarray(standard_part(r)) < 0))


# ---------------------------------------------------------------------------
# fields


def canonical_forms(model: StructureModel) -> dict[str, FieldForm]:
    """Named invariant forms of a model as fields over its generators."""
    if model.name == G2_SPINOR:
        names = ("alpha", "Omega", "B", "gamma1", "gamma2", "psi1", "psi2", "A1", "A2", "dr", "r",
                 "aOmegaabar")
        return {n: FieldForm(model, _picker(g2_forms, bundle_frame, model, n), n) for n in names}
    if model.name == SPIN7_SPINOR:
        names = ("alpha", "Omega", "B", "Psi1", "Psi2", "Psi3", "A1", "dr", "r")
        return {n: FieldForm(model, _picker(spin7_forms, bundle_frame, model, n), n) for n in names}
    if model.name == NEARLY_KAHLER:
        from .nearly_kahler import nk_forms
        out = {n: FieldForm(model, (lambda pt, n=n: nk_forms(model)[n]), n)
               for n in nk_forms(model)}
        out["limit_coefficient"] = FieldForm(model, lambda pt: limit_coefficient(model, pt),
                                             "limit_coefficient")
        return out
    if model.name == G2_CONE:
        names = ("alpha", "Omega", "B", "gamma1", "gamma2", "psi1", "psi2", "A1", "A2", "dr", "r",
                 "aOmegaabar")
        return {n: FieldForm(model, _picker(g2_forms, polar_frame, model, n), n) for n in names}
    raise DomainError(model.name)


def _picker(builder, framer, model, name):
    def fn(pt):
        return builder(framer(model, pt))[name]
    fn.__name__ = name
    return fn


def limit_coefficient(model: StructureModel, pt: FiberPoint) -> Form:
    """g3 (theta_3 - phi) g3^{-1} on the link (or cone) model."""
    return module_action(pt.g3, link_frame(model).tau, "sandwich")


def fundamental_form(model: StructureModel, profiles=None):
    """(gamma, *gamma) for G2, (Psi, Psi) for Spin(7), as fields; plus the coframe builder.

    ``profiles`` maps r to an object with ``f, g`` (G2) or ``sigma, tau``
    (Spin(7)); defaults to the Bryant-Salamon solution.
    """
    from .hodge import metric_coframe

    prof = profiles or (lambda r: bs_profiles(model.name, model.kappa, r))
    framer = polar_frame if model.name == G2_CONE else bundle_frame

    if model.name in (G2_SPINOR, G2_CONE):
        def gamma(pt):
            fr = framer(model, pt)
            forms = g2_forms(fr)
            p = prof(fr.r)
            return p.f ** 3 * forms["gamma1"] + p.f * p.g ** 2 * forms["gamma2"]

        def psi(pt):
            fr = framer(model, pt)
            forms = g2_forms(fr)
            p = prof(fr.r)
            return p.g ** 4 * forms["psi1"] - p.f ** 2 * p.g ** 2 * forms["psi2"]

        return (FieldForm(model, gamma, "gamma"), FieldForm(model, psi, "psi"),
                lambda pt: metric_coframe(model, pt, prof))

    if model.name == SPIN7_SPINOR:
        def Psi(pt):
            fr = bundle_frame(model, pt)
            forms = spin7_forms(fr)
            p = prof(fr.r)
            return (p.sigma ** 2 * forms["Psi1"] + p.sigma * p.tau * forms["Psi2"]
                    + p.tau ** 2 * forms["Psi3"])

        F = FieldForm(model, Psi, "Psi")
        return F, F, lambda pt: metric_coframe(model, pt, prof)

    raise DomainError(f"{model.name} has no fundamental form")


@dataclass
class GeneralProfiles:
    f: object
    g: object


def general_profile_residuals(model: StructureModel, f, g, pt: FiberPoint) -> dict[str, float]:
    """Compare d gamma, d*gamma for arbitrary radial f, g with their closed coefficient formulas.

    dgamma = [(f^3)' - (3 kappa/4) f g^2] dr^gamma1 + (f g^2)' dr^gamma2 and
    d*gamma = [-(f^2 g^2)' + (kappa/4) g^4] dr^psi2; f and g are callables of r.
    """
    from ..dual import derivative, standard_part
    from ..exterior import relative_residual

    if model.name != G2_SPINOR:
        raise DomainError("the general-profile formulas are stated on the G2 model")
    gamma, psi, _ = fundamental_form(model, lambda r: GeneralProfiles(f(r), g(r)))
    forms = g2_forms(bundle_frame(model, pt))
    r = float(standard_part(pt.r))
    k = model.kappa
    fr, gr = f(r), g(r)
    c1 = derivative(lambda x: f(x) ** 3, r) - 0.75 * k * fr * gr ** 2
    c2 = derivative(lambda x: f(x) * g(x) ** 2, r)
    c3 = -derivative(lambda x: f(x) ** 2 * g(x) ** 2, r) + 0.25 * k * gr ** 4
    dr = forms["dr"]
    expected = c1 * wedge(dr, forms["gamma1"]) + c2 * wedge(dr, forms["gamma2"])
    return {
        "d_gamma": relative_residual(gamma.d()(pt), expected.to_float()),
        "d_star_gamma": relative_residual(psi.d()(pt), (c3 * wedge(dr, forms["psi2"])).to_float()),
    }
