"""Conical end of the G2 metric, basis changes and per-model structure residuals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dual import standard_part
from ..exterior import Form, GeneratorSet, coefficient_norm, relative_residual, substitute, wedge, wedge_all
from .forms import canonical_forms, fundamental_form
from .hodge import _rows_matrix, cone_coframe, hodge_star, link_coframe, metric_coframe
from .nearly_kahler import eta_coframe, nk_forms
from .structure import (
    G2_CONE,
    G2_SPINOR,
    NEARLY_KAHLER,
    SPIN7_SPINOR,
    DomainError,
    FieldForm,
    FiberPoint,
    StructureModel,
    build_model,
    exterior_derivative,
    random_bundle_point,
    random_cone_point,
    random_link_point,
)


def rho_from_radius(r):
    """Cone radius for fibre radius r (r^2 = a abar): rho = 3 (1 + r^2)^(1/3)."""
    return 3.0 * (1.0 + r * r) ** (1.0 / 3.0)


def radius_from_rho(rho):
    if np.any(np.asarray(standard_part(rho)) < 3.0):
        raise DomainError("rho must be at least 3")
    return math.sqrt((rho / 3.0) ** 3 - 1.0)


# ---------------------------------------------------------------------------
# conical model


@dataclass
class ConeStructure:
    rho: float
    gamma: Form
    star_gamma: Form
    metric: dict[str, float]
    varpi: Form
    Omega1: Form
    Omega2: Form


def _cone_forms(model: StructureModel, pt: FiberPoint) -> dict[str, Form]:
    nk = nk_forms(model)
    rho = pt.rho
    drho = model.generator("drho")
    varpi, O1, O2 = nk["varpi"], nk["Omega1"], nk["Omega2"]
    return {
        "gamma": rho ** 2 * wedge(drho, varpi) + rho ** 3 * O1,
        "star_gamma": -(rho ** 3) * wedge(drho, O2) + rho ** 4 * nk["half_varpi_sq"],
        "varpi": varpi,
        "Omega1": O1,
        "Omega2": O2,
    }


def cone_fields(model: StructureModel) -> dict[str, FieldForm]:
    """gamma_con and *gamma_con as fields on the cone model (rho is a coordinate)."""
    _require_cone(model)
    return {
        name: FieldForm(model, (lambda pt, name=name: _cone_forms(model, pt)[name]), name + "_con")
        for name in ("gamma", "star_gamma")
    }


def cone_structure(model: StructureModel, rho: float, g3=None) -> ConeStructure:
    _require_cone(model)
    if not rho > 0:
        raise DomainError("rho must be positive")
    from ..exterior import ONE

    # the conical model makes sense for every rho > 0, so skip the rho > 3 check
    pt = _with_rho(FiberPoint(g3=g3 or ONE), rho)
    forms = _cone_forms(model, pt)
    metric = {"drho2": 1.0, "omega2": rho ** 2 / 3.0, "tau2": 4.0 * rho ** 2 / 9.0}
    return ConeStructure(rho, forms["gamma"], forms["star_gamma"], metric,
                         forms["varpi"], forms["Omega1"], forms["Omega2"])


def bs_metric_coefficients(rho: float) -> dict[str, float]:
    """g_gamma = drho^2/(1-x) + (rho^2/3) omega^2 + (4/9) rho^2 (1-x) tau^2 with x = (3/rho)^3."""
    if rho <= 3.0:
        raise DomainError("rho must exceed 3")
    x = (3.0 / rho) ** 3
    return {"drho2": 1.0 / (1.0 - x), "omega2": rho ** 2 / 3.0, "tau2": 4.0 * rho ** 2 * (1.0 - x) / 9.0}


def _with_rho(pt: FiberPoint, rho: float) -> FiberPoint:
    from .structure import _unchecked
    return _unchecked(pt, rho=rho)


def _require_cone(model: StructureModel):
    if model.name != G2_CONE:
        raise DomainError("needs the G2Cone model")


def metric_deviation(rho: float, model: StructureModel | None = None, g3=None) -> float:
    """Operator norm of g_con^{-1}(g_gamma - g_con), computed from the two coframes."""
    if rho <= 3.0:
        raise DomainError("metric deviation needs rho > 3")
    from ..exterior import ONE

    model = model or build_model(G2_CONE)
    pt = FiberPoint(g3=g3 or ONE, rho=rho)
    con = cone_coframe(model, pt)
    bs = metric_coframe(model, pt)
    T = _rows_matrix(con.forms + con.vertical)
    S = _rows_matrix(bs.forms)
    # rows of S in the basis of the cone coframe (plus vertical completion)
    M = np.linalg.solve(T.T, S.T).T
    if np.max(np.abs(M[:, con.dim:])) > 1e-9 * max(1.0, np.max(np.abs(M))):
        raise DomainError("metric coframes do not span the same horizontal space")
    M = M[:, :con.dim]
    G = M.T @ M
    return float(np.linalg.norm(G - np.eye(con.dim), 2))


def decay_fit(samples: Sequence[tuple[float, float]]) -> float:
    """Negated least-squares slope of log(deviation) against log(rho)."""
    if len(samples) < 8:
        raise ValueError("decay fit needs at least 8 samples")
    x = np.log([s[0] for s in samples])
    y = np.log([s[1] for s in samples])
    if x.max() - x.min() < math.log(10.0) - 1e-12:
        raise ValueError("samples must span at least one decade in rho")
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# basis changes


def change_basis(A: Form, direction: str, model: StructureModel, pt: FiberPoint | None = None) -> Form:
    """Invertible substitution of generator 1-forms.

    ``"da->alpha"``: rewrite over (omega, phi, alpha) using da = alpha + a phi.
    ``"alpha->da"``: the inverse, with alpha = da - a phi.
    ``"theta->omega"``: rewrite a link/cone form over (omega, phi, tau).
    """
    if direction in ("da->alpha", "alpha->da"):
        if not model.is_bundle:
            raise DomainError("alpha/da substitution needs a bundle model")
        old_names = model.gens.names
        new_names = tuple(("al" + n[2:]) if n.startswith("da") else n for n in old_names)
        if direction == "da->alpha":
            src, dst, sign = model.gens, GeneratorSet.of(new_names), 1.0
        else:
            src, dst, sign = GeneratorSet.of(new_names), model.gens, -1.0
        if A.gens != src:
            raise ValueError("form is not over the expected generator set")
        phi = Form.quaternionic(dst, [None, "p1", "p2", "p3"])
        shift = pt.a * phi
        images = []
        for name in src.names:
            if name.startswith(("da", "al")):
                u = int(name[2:])
                target = ("al" if direction == "da->alpha" else "da") + str(u)
                images.append(Form.generator(dst, target) + sign * shift.component(u).to_float())
            else:
                images.append(Form.generator(dst, name))
        return substitute(A.to_float(), images, dst)

    if direction == "theta->omega":
        if model.name not in (NEARLY_KAHLER, G2_CONE):
            raise DomainError("theta substitution needs the link or cone model")
        names = [f"w{u}" for u in (1, 2, 3)] + [f"p{u}" for u in (1, 2, 3)] + [f"tau{u}" for u in (1, 2, 3)]
        if model.name == G2_CONE:
            names.append("drho")
        dst = GeneratorSet.of(names)
        images = []
        for name in model.gens.names:
            if name == "drho":
                images.append(Form.generator(dst, "drho"))
                continue
            i, u = int(name[1]), name.split("_")[1]
            w, p, t = (Form.generator(dst, f"{k}{u}") for k in ("w", "p", "tau"))
            # theta_1 = phi + omega/2, theta_2 = phi - omega/2, theta_3 = tau + phi
            images.append({1: p + 0.5 * w, 2: p - 0.5 * w, 3: t + p}[i])
        return substitute(A.to_float(), images, dst)

    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# structure residuals


def _norm(A: Form) -> float:
    return coefficient_norm(A, "max")


def d_squared_residual(model: StructureModel, pt: FiberPoint) -> float:
    worst = 0.0
    for idx, name in enumerate(model.gens.names):
        F = FieldForm(model, lambda p, idx=idx: model.d_generator(idx), "d" + name)
        worst = max(worst, _norm(exterior_derivative(F)(pt)))
    return worst


def _default_point(model: StructureModel, rng) -> FiberPoint:
    if model.is_bundle:
        return random_bundle_point(rng)
    if model.name == NEARLY_KAHLER:
        return random_link_point(rng)
    return random_cone_point(rng)


def structure_residuals(model: StructureModel, pt: FiberPoint | None = None, rng=None) -> dict[str, float]:
    """Named residuals of the structure identities of ``model`` at one point."""
    rng = rng if rng is not None else np.random.default_rng(0)
    pt = pt or _default_point(model, rng)
    out = {"d_squared": d_squared_residual(model, pt)}
    if model.name in (G2_SPINOR, SPIN7_SPINOR):
        fund, star, _ = fundamental_form(model)
        out["d_fund"] = _norm(fund.d()(pt))
        if model.name == G2_SPINOR:
            out["d_star_fund"] = _norm(star.d()(pt))
    elif model.name == NEARLY_KAHLER:
        out.update(nk_residuals(model, pt))
    else:
        # forms grow like rho^3 and rho^4 here, so residuals are relative
        fields = cone_fields(model)
        gam, star_gam = fields["gamma"](pt), fields["star_gamma"](pt)
        out["d_gamma_con"] = _norm(fields["gamma"].d()(pt)) / max(1.0, _norm(gam))
        out["d_star_gamma_con"] = _norm(fields["star_gamma"].d()(pt)) / max(1.0, _norm(star_gam))
        coframe = cone_coframe(model, pt)
        out["hodge_gamma_con"] = relative_residual(hodge_star(gam, coframe), star_gam)
        fund, star, _ = fundamental_form(model)
        out["d_fund"] = _norm(fund.d()(pt)) / max(1.0, _norm(fund(pt)))
        out["d_star_fund"] = _norm(star.d()(pt)) / max(1.0, _norm(star(pt)))
    return out


def nk_residuals(model: StructureModel, pt: FiberPoint) -> dict[str, float]:
    F = canonical_forms(model)
    v, O1, O2 = F["varpi"](pt), F["Omega1"](pt), F["Omega2"](pt)
    vol = F["dvol"](pt)
    v3 = wedge_all(v, v, v) / 6.0
    coframe = link_coframe(model)
    from .hodge import to_orthonormal

    Om = wedge_all(*eta_coframe(coframe.frame_gens))
    return {
        "d_varpi_minus_3_Omega1": _norm(F["varpi"].d()(pt) - 3.0 * O1),
        "d_Omega2_plus_2_varpi2": _norm(F["Omega2"].d()(pt) + 2.0 * wedge(v, v)),
        "varpi_wedge_Omega1": _norm(wedge(v, O1)),
        "varpi_wedge_Omega2": _norm(wedge(v, O2)),
        # the chain varpi^3/3! = (1/4) Omega1 ^ Omega2 = dvol, worst link
        "volume": max(_norm(v3 - 0.25 * wedge(O1, O2)), _norm(0.25 * wedge(O1, O2) - vol)),
        "eta_Omega": max(_norm(to_orthonormal(O1, coframe) - Om.re()),
                         _norm(to_orthonormal(O2, coframe) - Om.component(1))),
    }
