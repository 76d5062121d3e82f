"""SU(2) connections on the spinor-bundle models: curvature, decompositions and instanton residuals."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import profiles as _profiles
from .dual import derivative, standard_part
from .exterior import (
    Form,
    Quaternion,
    coefficient_norm,
    module_action,
    relative_residual,
    wedge,
    wedge_all,
)
from .models.cone import decay_fit
from .models.forms import (
    bs_profiles,
    bundle_frame,
    canonical_forms,
    fundamental_form,
    link_frame,
    polar_frame,
)
from .models.hodge import cone_coframe, frame_hodge, hodge_star, to_orthonormal
from .models.nearly_kahler import nk_forms
from .models.structure import (
    G2_CONE,
    G2_SPINOR,
    NEARLY_KAHLER,
    SPIN7_SPINOR,
    DomainError,
    FiberPoint,
    FieldForm,
    StructureModel,
    build_model,
    exterior_derivative,
)

R_MIN = 1e-2
FLAT_TOL = 1e-12
BASES = ("zero", "levi_civita_phi", "singular_phi")


# ---------------------------------------------------------------------------
# radial profiles


@dataclass(frozen=True)
class RadialProfile:
    """A function of the squared radius r with its derivative.

    ``family`` is one of g2_solution, spin7_f, spin7_g, explicit, zero.
    Values accept dual numbers, so profiles can sit inside differentiated fields.
    """

    family: str
    params: tuple = ()
    func: Callable | None = field(default=None, compare=False)
    dfunc: Callable | None = field(default=None, compare=False)

    def __call__(self, r):
        return self.value(r), self.derivative(r)

    def value(self, r):
        if self.family == "zero":
            return 0.0 * r
        if self.family == "explicit":
            return self.func(r)
        return _closed(self, r)[0]

    def derivative(self, r):
        if self.family == "zero":
            return 0.0 * r
        if self.family == "explicit":
            if self.dfunc is not None:
                return self.dfunc(r)
            return derivative(self.func, r)
        return _closed(self, r)[1]

    @property
    def singular_at_zero(self) -> bool:
        return self.family == "spin7_f"


def _closed(p: RadialProfile, r):
    name = {"g2_solution": "g2", "spin7_f": "spin7_f", "spin7_g": "spin7_g"}[p.family]
    return _profiles.closed_form(name, r, p.params[0])


def g2_solution(C: float, kappa: float = 1.0) -> RadialProfile:
    """f = 2/(3(r+1) + C (r+1)^(1/3)); the equation it solves does not involve kappa."""
    return RadialProfile("g2_solution", (float(C), float(kappa)))


def spin7_f(D: float) -> RadialProfile:
    return RadialProfile("spin7_f", (float(D),))


def spin7_g(C: float) -> RadialProfile:
    return RadialProfile("spin7_g", (float(C),))


def explicit(func: Callable, dfunc: Callable | None = None, label: str = "") -> RadialProfile:
    return RadialProfile("explicit", (label,), func, dfunc)


def zero() -> RadialProfile:
    return RadialProfile("zero")


def shifted(profile: RadialProfile, delta: float) -> RadialProfile:
    """profile + delta (a non-solution used to test that residuals react)."""
    return explicit(lambda r: profile.value(r) + delta, profile.derivative, f"{profile.family}+{delta}")


# ---------------------------------------------------------------------------
# connections


@dataclass(frozen=True)
class GaugeConnection:
    """A = base + f A1 (+ g A2 on the G2 model)."""

    model: StructureModel
    base: str = "zero"
    f: RadialProfile = field(default_factory=zero)
    g: RadialProfile | None = None
    r_min: float = R_MIN

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}")
        if not self.model.is_bundle:
            raise DomainError("connections are built on the spinor-bundle models")
        if self.g is not None and self.model.name != G2_SPINOR:
            raise ValueError("the A2 term exists on the G2 model only")

    @property
    def guarded(self) -> bool:
        return self.base == "singular_phi" or self.f.singular_at_zero or (
            self.g is not None and self.g.singular_at_zero)


def _check_radius(conn: GaugeConnection, r) -> None:
    # allow roundoff from r = |a|^2 so a point built at r_min is accepted
    if conn.guarded and float(standard_part(r)) < conn.r_min * (1.0 - 1e-12):
        raise DomainError(f"r = {float(standard_part(r)):.3g} is below r_min = {conn.r_min}")


def _a1(model: StructureModel, fr) -> Form:
    if model.name == G2_SPINOR:
        return (fr.a * fr.alpha.conj()).im()
    return (fr.a.conj() * fr.alpha).im()


def _base_form(conn: GaugeConnection, pt: FiberPoint) -> Form | None:
    if conn.base == "zero":
        return None
    if conn.base == "levi_civita_phi":
        return conn.model.qform("p")
    da = conn.model.qform("da", imaginary=False)
    return (pt.a.inverse() * da).im()


def connection_form(conn: GaugeConnection) -> FieldForm:
    model = conn.model

    def A(pt: FiberPoint) -> Form:
        fr = bundle_frame(model, pt)
        r = fr.r
        _check_radius(conn, r)
        out = conn.f.value(r) * _a1(model, fr)
        if conn.g is not None:
            out = out + conn.g.value(r) * module_action(fr.a, fr.omega, "sandwich")
        base = _base_form(conn, pt)
        return out if base is None else base + out

    return FieldForm(model, A, "A")


def curvature(conn: GaugeConnection) -> FieldForm:
    """F = dA + A ^ A, with dA from the structure equations and exact partials."""
    A = connection_form(conn)
    dA = exterior_derivative(A)

    def F(pt: FiberPoint) -> Form:
        a = A(pt)
        return dA(pt) + wedge(a, a)

    return FieldForm(conn.model, F, "F")


# ---------------------------------------------------------------------------
# closed-form curvature decomposition


G2_TAGS = ("half alpha^alphabar", "half a alphabar^alpha abar", "a Omega abar", "dr^A2", "dA2")
SPIN7_TAGS = ("Omega", "half alphabar^alpha", "abar (half alpha^alphabar) a")


@dataclass(frozen=True)
class CurvatureDecomposition:
    tags: tuple[str, ...]
    coefficients: tuple[float, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.tags, self.coefficients))


def _effective_spin7_profile(conn: GaugeConnection, r):
    """phi + f A1 written for either base: Im(a^{-1} da) = phi + A1 / r."""
    f, df = conn.f.value(r), conn.f.derivative(r)
    if conn.base == "levi_civita_phi":
        return f, df
    if conn.base == "singular_phi":
        return f + 1.0 / r, df - 1.0 / (r * r)
    raise ValueError("the closed-form Spin(7) decomposition needs a phi or singular-phi base")


def curvature_decomposition(conn: GaugeConnection, r) -> CurvatureDecomposition:
    kappa = conn.model.kappa
    if conn.model.name == G2_SPINOR:
        if conn.base != "zero":
            raise ValueError("the closed-form G2 decomposition is for A = f A1 + g A2")
        f, df = conn.f.value(r), conn.f.derivative(r)
        g = conn.g.value(r) if conn.g is not None else 0.0
        dg = conn.g.derivative(r) if conn.g is not None else 0.0
        coeffs = (
            r * df + 2 * f - r * f * f,
            -df - f * f,
            -kappa * f / 2 + 2 * r * g * g,
            dg + f * g,
            g - f * g * r,
        )
        return CurvatureDecomposition(G2_TAGS, tuple(float(standard_part(c)) for c in coeffs))
    f, df = _effective_spin7_profile(conn, r)
    coeffs = (
        (kappa / 2) * (1 - r * f),
        r * df + 2 * f - r * f * f,
        -(df + f * f),
    )
    return CurvatureDecomposition(SPIN7_TAGS, tuple(float(standard_part(c)) for c in coeffs))


def decomposition_basis(model: StructureModel, pt: FiberPoint) -> list[Form]:
    """The 2-forms F_i of the closed-form curvature decomposition at ``pt``."""
    fr = bundle_frame(model, pt)
    a, alpha, omega = fr.a, fr.alpha, fr.omega
    abar = a.conj()
    if model.name == G2_SPINOR:
        Omega = 0.5 * wedge(omega, omega)
        A2 = module_action(a, omega, "sandwich")
        return [
            0.5 * wedge(alpha, alpha.conj()),
            module_action(a, 0.5 * wedge(alpha.conj(), alpha), "sandwich"),
            module_action(a, Omega, "sandwich"),
            wedge(fr.dr, A2),
            wedge(alpha, omega * abar) - wedge(a * omega, alpha.conj()),
        ]
    if model.name == SPIN7_SPINOR:
        return [
            0.5 * wedge(omega.conj(), omega),
            0.5 * wedge(alpha.conj(), alpha),
            module_action(abar, 0.5 * wedge(alpha, alpha.conj()), "sandwich"),
        ]
    raise DomainError(model.name)


def assemble_decomposition(conn: GaugeConnection, pt: FiberPoint) -> Form:
    """sum_i c_i(r) F_i: the curvature from the closed form."""
    r = pt.r
    _check_radius(conn, r)
    dec = curvature_decomposition(conn, r)
    basis = decomposition_basis(conn.model, pt)
    out = Form.zero(conn.model.gens, 2)
    for c, F in zip(dec.coefficients, basis):
        out = out + c * F
    return out


def _flatten(forms: Sequence[Form]) -> np.ndarray:
    masks = sorted({m for F in forms for m in F.terms})
    rows = []
    for F in forms:
        v = []
        for m in masks:
            q = F.terms.get(m, Quaternion())
            v.extend(float(standard_part(x)) for x in q.components)
        rows.append(v)
    return np.array(rows)


def decomposition_gram(model: StructureModel, pt: FiberPoint) -> np.ndarray:
    X = _flatten(decomposition_basis(model, pt))
    return X @ X.T


# ---------------------------------------------------------------------------
# residual reports


@dataclass
class ResidualReport:
    residuals: dict[str, float]
    norm: str = "max"
    provenance: dict = field(default_factory=dict)

    def worst(self, keys: Sequence[str] | None = None) -> float:
        keys = keys or list(self.residuals)
        return max(self.residuals[k] for k in keys)

    def merge(self, other: "ResidualReport") -> "ResidualReport":
        keys = set(self.residuals) | set(other.residuals)
        return ResidualReport({k: max(self.residuals.get(k, 0.0), other.residuals.get(k, 0.0)) for k in keys},
                              self.norm, {})


def _norm(A: Form) -> float:
    return coefficient_norm(A, "max")


def _point_provenance(pt: FiberPoint) -> dict:
    out = {}
    if pt.a is not None:
        out["r"] = float(standard_part(pt.r))
    if pt.rho is not None:
        out["rho"] = float(standard_part(pt.rho))
    return out


def g2_instanton_residual(conn: GaugeConnection, pt: FiberPoint) -> ResidualReport:
    """psi^F and *(gamma^F) - F (normalised by max(1, |F|)) plus the two instanton coefficients."""
    model = conn.model
    if model.name != G2_SPINOR:
        raise DomainError("G2 residuals need the G2Spinor model")
    F = curvature(conn)(pt)
    gamma, psi, coframe = fundamental_form(model)
    cof = coframe(pt)
    scale = max(1.0, _norm(F))
    r1 = _norm(wedge(psi(pt), F)) / scale
    r2 = _norm(hodge_star(wedge(gamma(pt), F), cof) - F) / scale

    r = standard_part(pt.r)
    kappa = model.kappa
    bs = bs_profiles(model.name, kappa, r)
    f, df = conn.f.value(r), conn.f.derivative(r)
    g = conn.g.value(r) if conn.g is not None else 0.0
    dg = conn.g.derivative(r) if conn.g is not None else 0.0
    L1 = bs.sigma * (g * g * r - f * kappa / 4) + bs.tau * (df + f * f)
    L2 = bs.tau * ((dg + f * g) * r / 3 + g - r * f * g)

    # the same 6-form from its coefficients: L1 Phi1 + L2 Phi2
    fr = bundle_frame(model, pt)
    forms = canonical_forms_at(model, pt)
    Phi1 = 2.0 * wedge(forms["aOmegaabar"], forms["psi1"])
    Phi2 = wedge(_im_aaa(fr), forms["gamma1"])
    coefficient_form = L1 * Phi1 + L2 * Phi2
    coefficient_route = _norm(wedge(psi(pt), F) - coefficient_form) / scale
    return ResidualReport(
        {"psi_wedge_F": r1, "star_gamma_wedge_F_minus_F": r2, "instanton_coefficient_1": abs(float(L1)),
         "instanton_coefficient_2": abs(float(L2)), "coefficient_route": coefficient_route, "norm_F": _norm(F)},
        "max", _point_provenance(pt),
    )


def _im_aaa(fr) -> Form:
    """Im(alpha ^ alphabar ^ alpha abar)."""
    alpha = fr.alpha
    return wedge_all(alpha, alpha.conj(), alpha * fr.a.conj()).im()


def canonical_forms_at(model: StructureModel, pt: FiberPoint) -> dict[str, Form]:
    from .models.forms import g2_forms, spin7_forms

    fr = bundle_frame(model, pt)
    return g2_forms(fr) if model.name == G2_SPINOR else spin7_forms(fr)


SPIN7_SIX_FORM_TAGS = ("Omega^alpha0123", "B^omega0123", "abar(half alpha^alphabar)a^omega0123")


def spin7_six_forms(model: StructureModel, pt: FiberPoint) -> list[Form]:
    forms = canonical_forms_at(model, pt)
    basis = decomposition_basis(model, pt)
    return [wedge(basis[0], forms["Psi1"]), wedge(basis[1], forms["Psi3"]), wedge(basis[2], forms["Psi3"])]


def spin7_closed_form_coefficients(conn: GaugeConnection, r) -> tuple[tuple, tuple]:
    """Coefficients of Psi^F_A and of *F_A on the three 6-forms, in closed form."""
    kappa = conn.model.kappa
    bs = bs_profiles(SPIN7_SPINOR, kappa, r)
    s, t = bs.sigma, bs.tau
    f, df = _effective_spin7_profile(conn, r)
    X = r * df + 2 * f - r * f * f
    Y = df + f * f
    one = (kappa / 2) * (1 - r * f)
    wedge_c = (s * s * one - 2 * s * t * X, -2 * s * t * one + t * t * X, -t * t * Y)
    star_c = (-s * s * one, -t * t * X, -t * t * Y)
    return wedge_c, star_c


def six_form_coefficients(A: Form, basis: Sequence[Form]) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``A`` on ``basis`` and the relative fit residual."""
    X = _flatten(list(basis) + [A])
    M, b = X[:-1].T, X[-1]
    c, *_ = np.linalg.lstsq(M, b, rcond=None)
    resid = float(np.max(np.abs(M @ c - b))) / max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    return c, resid


def spin7_instanton_residual(conn: GaugeConnection, pt: FiberPoint) -> ResidualReport:
    """|*(Psi^F) - F| / max(1, |F|), numerically and from the closed-form coefficients."""
    model = conn.model
    if model.name != SPIN7_SPINOR:
        raise DomainError("Spin(7) residuals need the Spin7Spinor model")
    r = standard_part(pt.r)
    _check_radius(conn, r)
    F = curvature(conn)(pt)
    Psi, _, coframe = fundamental_form(model)
    cof = coframe(pt)
    scale = max(1.0, _norm(F))
    numeric = _norm(hodge_star(wedge(Psi(pt), F), cof) - F) / scale

    wedge_c, star_c = spin7_closed_form_coefficients(conn, r)
    six = spin7_six_forms(model, pt)
    diff = Form.zero(model.gens, 6)
    for cw, cs, S in zip(wedge_c, star_c, six):
        diff = diff + float(cw - cs) * S
    closed = _norm(hodge_star(diff, cof)) / max(1.0, _norm(assemble_decomposition(conn, pt)))
    return ResidualReport(
        {"numeric": numeric, "closed_form": closed, "norm_F": _norm(F),
         "coincidence": abs(float(wedge_c[2] - star_c[2]))},
        "max", _point_provenance(pt),
    )


# ---------------------------------------------------------------------------
# identity tables


def g2_connection_identities(model: StructureModel, pt: FiberPoint) -> dict[str, float]:
    fields = canonical_forms(model)
    fr = bundle_frame(model, pt)
    a, alpha, omega, r, kappa = fr.a, fr.alpha, fr.omega, fr.r, model.kappa
    A1, A2, dr = fields["A1"](pt), fields["A2"](pt), fr.dr
    aOa = module_action(a, 0.5 * wedge(omega, omega), "sandwich")
    aBa = module_action(a, 0.5 * wedge(alpha.conj(), alpha), "sandwich")
    dA1, dA2 = fields["A1"].d()(pt), fields["A2"].d()(pt)
    aa = wedge(alpha, alpha.conj())
    return {
        "dA1": relative_residual(dA1, aa - (kappa / 2) * aOa),
        "dA2": relative_residual(dA2, wedge(alpha, omega * a.conj()) - wedge(a * omega, alpha.conj())),
        "A1^A1": relative_residual(wedge(A1, A1), (-r / 2) * aa - aBa),
        "A2^A2": relative_residual(wedge(A2, A2), (2 * r) * aOa),
        "A1^A2+A2^A1": relative_residual(wedge(A1, A2) + wedge(A2, A1), wedge(dr, A2) - r * dA2),
        "dr^A1": relative_residual(wedge(dr, A1), (r / 2) * aa - aBa),
    }


def spin7_connection_identities(model: StructureModel, pt: FiberPoint) -> dict[str, float]:
    fields = canonical_forms(model)
    fr = bundle_frame(model, pt)
    a, alpha, omega, phi, r, kappa = fr.a, fr.alpha, fr.omega, fr.phi, fr.r, model.kappa
    A1, dr = fields["A1"](pt), fr.dr
    Omega = 0.5 * wedge(omega.conj(), omega)
    ba = wedge(alpha.conj(), alpha)
    aAa = module_action(a.conj(), 0.5 * wedge(alpha, alpha.conj()), "sandwich")
    dA1 = fields["A1"].d()(pt)
    return {
        "dA1+A1phi+phiA1": relative_residual(dA1 + wedge(A1, phi) + wedge(phi, A1), ba - (r * kappa / 2) * Omega),
        "A1^A1": relative_residual(wedge(A1, A1), (-r / 2) * ba - aAa),
        "dr^A1": relative_residual(wedge(dr, A1), (r / 2) * ba - aAa),
    }


def _product_residual(X: Form, Y: Form, lhs: Form, rhs: Form) -> float:
    # cancellations in X ^ Y leave roundoff of size |X| |Y|, so measure against that
    scale = max(1.0, _norm(X) * _norm(Y), _norm(lhs), _norm(rhs))
    return _norm(lhs - rhs) / scale


def psi_wedge_table(model: StructureModel, pt: FiberPoint) -> dict[str, float]:
    """psi_j ^ F_i against the closed-form table (G2)."""
    forms = canonical_forms_at(model, pt)
    fr = bundle_frame(model, pt)
    Fs = decomposition_basis(model, pt)
    psi1, psi2, aOa, g1 = forms["psi1"], forms["psi2"], forms["aOmegaabar"], forms["gamma1"]
    im = _im_aaa(fr)
    r = fr.r
    expected = {
        (1, 3): wedge(aOa, psi1),
        (2, 2): -2.0 * wedge(aOa, psi1),
        (2, 4): (r / 3) * wedge(im, g1),
        (2, 5): wedge(im, g1),
    }
    out = {}
    for j, psi in ((1, psi1), (2, psi2)):
        for i, F in enumerate(Fs, start=1):
            lhs = wedge(psi, F)
            rhs = expected.get((j, i), Form.zero(model.gens, 6))
            out[f"psi{j}^F{i}"] = _product_residual(psi, F, lhs, rhs)
    return out


def Psi_wedge_table(model: StructureModel, pt: FiberPoint) -> dict[str, float]:
    """Psi_j ^ F_i against the closed-form table (Spin(7))."""
    forms = canonical_forms_at(model, pt)
    Fs = decomposition_basis(model, pt)
    P1, P2, P3, B = forms["Psi1"], forms["Psi2"], forms["Psi3"], forms["B"]
    Omega = Fs[0]
    expected = {
        (1, 1): wedge(Omega, P1),
        (2, 2): -2.0 * wedge(Omega, P1),
        (2, 1): -2.0 * wedge(B, P3),
        (3, 2): wedge(B, P3),
        (3, 3): wedge(Fs[2], P3),
    }
    zeros = {(1, 2), (1, 3), (2, 3), (3, 1)}
    out = {}
    for j, Psi in ((1, P1), (2, P2), (3, P3)):
        for i, F in enumerate(Fs, start=1):
            if (j, i) not in expected and (j, i) not in zeros:
                continue
            rhs = expected.get((j, i), Form.zero(model.gens, 6))
            out[f"Psi{j}^F{i}"] = _product_residual(Psi, F, wedge(Psi, F), rhs)
    return out


# ---------------------------------------------------------------------------
# spectra


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    multiplicities: dict[float, int]
    projectors: dict[float, np.ndarray]
    matrix: np.ndarray
    pairs: list[tuple[int, int]]


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def two_form_operator(fund: Form, orientation: int, n: int) -> tuple[np.ndarray, list]:
    """Matrix of beta -> *(fund ^ beta) on 2-forms of an orthonormal frame (fund given in that frame)."""
    pairs = _pairs(n)
    index = {(1 << i) | (1 << j): k for k, (i, j) in enumerate(pairs)}
    M = np.zeros((len(pairs), len(pairs)))
    for k, (i, j) in enumerate(pairs):
        beta = Form(fund.gens, 2, {(1 << i) | (1 << j): 1.0})
        image = frame_hodge(wedge(fund, beta), orientation)
        for mask, c in image.terms.items():
            M[index[mask], k] = float(standard_part(c.x0))
    return M, pairs


def two_form_spectrum(model: StructureModel, pt: FiberPoint, cluster_tol: float = 1e-6) -> Spectrum:
    fund, _, coframe = fundamental_form(model)
    cof = coframe(pt)
    F = to_orthonormal(fund(pt), cof)
    M, pairs = two_form_operator(F, cof.orientation, cof.dim)
    # M is symmetric in an orthonormal frame; symmetrise against roundoff
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    groups: list[list[int]] = []
    for k in np.argsort(w):
        if groups and abs(w[k] - w[groups[-1][0]]) <= cluster_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    mult, proj = {}, {}
    for g in groups:
        lam = float(np.mean(w[g]))
        key = round(lam, 6)
        mult[key] = len(g)
        proj[key] = V[:, g] @ V[:, g].T
    return Spectrum(w, mult, proj, M, pairs)


def two_form_components(F: Form, coframe, pairs) -> np.ndarray:
    """Rows: the i, j, k parts of an Im-valued 2-form in the orthonormal 2-form basis."""
    G = to_orthonormal(F, coframe)
    out = np.zeros((3, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        q = G.terms.get((1 << i) | (1 << j))
        if q is not None:
            out[:, k] = [float(standard_part(x)) for x in q.components[1:]]
    return out


def projected_fraction(conn: GaugeConnection, pt: FiberPoint, eigenvalue: float) -> float:
    """|P F| / |F| for the projector onto the given eigenspace (0 if F = 0)."""
    spec = two_form_spectrum(conn.model, pt)
    _, _, coframe = fundamental_form(conn.model)
    comps = two_form_components(curvature(conn)(pt), coframe(pt), spec.pairs)
    total = np.linalg.norm(comps)
    # a numerically flat curvature has no meaningful direction
    if total <= FLAT_TOL:
        return 0.0
    P = spec.projectors[round(eigenvalue, 6)]
    return float(np.linalg.norm(comps @ P.T) / total)


# ---------------------------------------------------------------------------
# nearly-Kaehler limit


LIMIT_SCALE = -2.0 / 3.0



def link_connection(model: StructureModel, scale: float = LIMIT_SCALE) -> FieldForm:
    """scale * g3 (theta_3 - phi) g3^{-1} on the link."""
    if model.name != NEARLY_KAHLER:
        raise DomainError("link connections live on the NearlyKahlerTriple model")
    lf = link_frame(model)
    return FieldForm(model, lambda pt: scale * module_action(pt.g3, lf.tau, "sandwich"), "A_link")


def link_curvature(A: FieldForm) -> FieldForm:
    dA = exterior_derivative(A)
    return FieldForm(A.model, lambda pt: dA(pt) + wedge(A(pt), A(pt)), "F_link")


def closed_form_limit_curvature(model: StructureModel, pt: FiberPoint) -> Form:
    """(-2/9) g tau^2 g^{-1} - (1/6) g omega^2 g^{-1}."""
    lf = link_frame(model)
    g = pt.g3
    return (module_action(g, (-2.0 / 9.0) * wedge(lf.tau, lf.tau), "sandwich")
            + module_action(g, (-1.0 / 6.0) * wedge(lf.omega, lf.omega), "sandwich"))


def hym_residual(A: FieldForm, pt: FiberPoint) -> ResidualReport:
    """|F^varpi^2|, |F^Omega1|, |F^Omega2| and |F| for a connection on the link."""
    model = A.model
    F = link_curvature(A)(pt)
    nk = nk_forms(model)
    v2 = wedge(nk["varpi"], nk["varpi"])
    return ResidualReport(
        {"F^varpi2": _norm(wedge(F, v2)), "F^Omega1": _norm(wedge(F, nk["Omega1"])),
         "F^Omega2": _norm(wedge(F, nk["Omega2"])), "norm_F": _norm(F)},
        "max", {"g3": [float(x) for x in pt.g3.components]},
    )


def limit_coefficient_scalar(C: float, rho: float) -> float:
    """c(rho) = -2((rho/3)^3 - 1) / (rho^3/9 + C rho/3), the multiple of g(theta_3 - phi)g^{-1}."""
    return -2.0 * ((rho / 3.0) ** 3 - 1.0) / (rho ** 3 / 9.0 + C * rho / 3.0)


def limit_connection(C: float, rho: float, g3: Quaternion | None = None,
                     model: StructureModel | None = None) -> tuple[Form, Form, float]:
    """(A at rho, the limit A~, their distance in the cone metric).

    A = f(r) A1 is evaluated in cone coordinates with the bundle radius
    r = |a|^2 = (rho/3)^3 - 1; the distance is the largest coefficient in the
    orthonormal cone coframe, so link 1-forms are weighted by 1/rho.
    """
    if rho <= 3.0:
        raise DomainError("the limit connection is compared for rho > 3")
    from .exterior import ONE

    model = model or build_model(G2_CONE)
    pt = FiberPoint(g3=g3 or ONE, rho=rho)
    fr = polar_frame(model, pt)
    r_bundle = fr.r
    f = _profiles.closed_form("g2", r_bundle, C)[0]
    A1 = (fr.a * fr.alpha.conj()).im()
    A = f * A1
    tilde = LIMIT_SCALE * module_action(pt.g3, link_frame(model).tau, "sandwich")
    dev = _norm(to_orthonormal(A - tilde, cone_coframe(model, pt)))
    return A, tilde, dev


def convergence_fit(samples: Sequence[tuple[float, float]]) -> float:
    return decay_fit(samples)
