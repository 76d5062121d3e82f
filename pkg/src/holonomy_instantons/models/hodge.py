"""Orthonormal coframes, basis changes and the Hodge star.

All routines here act on point-evaluated forms with plain float
coefficients (dual parts are dropped).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dual import standard_part
from ..exterior import Form, GeneratorSet, _bits, substitute, wedge_sign
from .structure import (
    G2_CONE,
    G2_SPINOR,
    NEARLY_KAHLER,
    SPIN7_SPINOR,
    DomainError,
    FiberPoint,
    StructureModel,
)

BASIC_TOL = 1e-9


class NonBasicFormError(ValueError):
    """A form has components along the vertical (fibre) directions."""


@dataclass(frozen=True)
class MetricCoframe:
    """Orthonormal coframe ``forms`` (1-forms over the model generators).

    ``vertical`` completes the coframe to a basis of all generators;
    ``orientation`` is +1 if vol = e^1 ^ ... ^ e^n and -1 otherwise.
    """

    forms: tuple[Form, ...]
    vertical: tuple[Form, ...]
    orientation: int = 1

    @property
    def dim(self) -> int:
        return len(self.forms)

    @property
    def gens(self) -> GeneratorSet:
        return self.forms[0].gens

    @property
    def frame_gens(self) -> GeneratorSet:
        return _frame_gens(self.dim)

    def matrix(self) -> np.ndarray:
        return _rows_matrix(self.forms + self.vertical)

    def volume(self) -> Form:
        full = (1 << self.dim) - 1
        return Form(self.frame_gens, self.dim, {full: float(self.orientation)})


def _frame_gens(n: int, extra: int = 0) -> GeneratorSet:
    return GeneratorSet.of([f"e{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(extra)])


def _rows_matrix(rows: Sequence[Form]) -> np.ndarray:
    n = len(rows[0].gens)
    T = np.zeros((len(rows), n))
    for k, row in enumerate(rows):
        for mask, c in row.terms.items():
            T[k, _bits(mask)[0]] = float(standard_part(c.x0))
    return T


def _float(A: Form) -> Form:
    return A.map_scalars(lambda x: float(standard_part(x)))


def frame_change(A: Form, rows: Sequence[Form], names: Sequence[str]) -> Form:
    """Re-express ``A`` in the basis of 1-forms ``rows`` (labelled ``names``)."""
    T = _rows_matrix(rows)
    if T.shape[0] != T.shape[1]:
        raise ValueError("basis change needs as many 1-forms as generators")
    S = np.linalg.inv(T)
    new = GeneratorSet.of(names)
    images = []
    for g in range(T.shape[1]):
        images.append(Form(new, 1, {1 << k: float(S[g, k]) for k in range(len(names)) if S[g, k] != 0.0}))
    return substitute(_float(A), images, new)


def to_orthonormal(A: Form, coframe: MetricCoframe, tol: float = BASIC_TOL) -> Form:
    """Components of a basic form in the orthonormal coframe (over generators e1..en)."""
    n, m = coframe.dim, len(coframe.vertical)
    names = _frame_gens(n, m).names
    B = frame_change(A, coframe.forms + coframe.vertical, names)
    horizontal = (1 << n) - 1
    scale = max(1.0, B.norm())
    terms = {}
    worst = 0.0
    for mask, c in B.terms.items():
        if mask & ~horizontal:
            worst = max(worst, c.magnitude())
        else:
            terms[mask] = c
    if worst > tol * scale:
        raise NonBasicFormError(f"vertical component of size {worst:.3e}")
    return Form(_frame_gens(n), A.degree, terms)


def from_orthonormal(A: Form, coframe: MetricCoframe) -> Form:
    return substitute(A, [_float(f) for f in coframe.forms], coframe.gens)


def frame_hodge(A: Form, orientation: int = 1) -> Form:
    """Hodge star of a form written in an orthonormal frame with vol = orientation * e_1..n."""
    n = len(A.gens)
    full = (1 << n) - 1
    terms = {}
    for mask, c in A.terms.items():
        comp = full & ~mask
        s = wedge_sign(mask, comp) * orientation
        terms[comp] = c * float(s)
    return Form(A.gens, n - A.degree, terms)


def hodge_star(A: Form, coframe: MetricCoframe) -> Form:
    """Hodge dual of a basic form, returned over the model generators."""
    return from_orthonormal(frame_hodge(to_orthonormal(A, coframe), coframe.orientation), coframe)


# ---------------------------------------------------------------------------
# coframes of the models


def metric_coframe(model: StructureModel, pt: FiberPoint, profiles=None) -> MetricCoframe:
    """Orthonormal coframe of the Bryant-Salamon metric (or of a supplied profile pair)."""
    from .forms import bs_profiles, bundle_frame, components, polar_frame

    prof = profiles or (lambda r: bs_profiles(model.name, model.kappa, r))
    if model.name in (G2_SPINOR, G2_CONE):
        fr = (polar_frame if model.name == G2_CONE else bundle_frame)(model, pt)
        p = prof(fr.r)
        f, g = float(standard_part(p.f)), float(standard_part(p.g))
        forms = [f * w for w in components(fr.omega, (1, 2, 3))]
        forms += [g * al for al in components(fr.alpha)]
        vertical = components(fr.phi, (1, 2, 3))
        return MetricCoframe(tuple(_float(x) for x in forms), tuple(_float(x) for x in vertical),
                             G2_ORIENTATION)
    if model.name == SPIN7_SPINOR:
        fr = bundle_frame(model, pt)
        p = prof(fr.r)
        s, t = math.sqrt(float(standard_part(p.sigma))), math.sqrt(float(standard_part(p.tau)))
        forms = [s * al for al in components(fr.alpha)] + [t * w for w in components(fr.omega)]
        vertical = [model.generator(n) for n in model.vertical]
        return MetricCoframe(tuple(_float(x) for x in forms), tuple(vertical), SPIN7_ORIENTATION)
    if model.name == NEARLY_KAHLER:
        return link_coframe(model)
    raise DomainError(model.name)


def link_coframe(model: StructureModel) -> MetricCoframe:
    """sigma^b = omega^b / sqrt(3), sigma^(b+3) = (2/3) tau^b on the nearly-Kaehler link."""
    from .forms import components, link_frame

    lf = link_frame(model)
    forms = [w / math.sqrt(3.0) for w in components(lf.omega, (1, 2, 3))]
    forms += [(2.0 / 3.0) * t for t in components(lf.tau, (1, 2, 3))]
    vertical = components(lf.phi, (1, 2, 3))
    return MetricCoframe(tuple(forms), tuple(vertical), NK_ORIENTATION)


def cone_coframe(model: StructureModel, pt: FiberPoint) -> MetricCoframe:
    """d rho, rho sigma^1..6: orthonormal for d rho^2 + rho^2 g_link."""
    from .forms import components, link_frame

    if model.name != G2_CONE:
        raise DomainError("cone coframe needs the G2Cone model")
    lf = link_frame(model)
    rho = float(standard_part(pt.rho))
    forms = [model.generator("drho")]
    forms += [(rho / math.sqrt(3.0)) * w for w in components(lf.omega, (1, 2, 3))]
    forms += [(2.0 * rho / 3.0) * t for t in components(lf.tau, (1, 2, 3))]
    vertical = components(lf.phi, (1, 2, 3))
    return MetricCoframe(tuple(forms), tuple(vertical), CONE_ORIENTATION)


# Orientation signs, calibrated against *gamma = g^4 psi1 - f^2 g^2 psi2 (G2),
# *(omegabar^omega) = -sigma^2 omegabar^omega^alpha^0123 (Spin(7)) and the
# SU(3) orientation varpi^3/6 of the link.  Frozen here; tests re-derive them.
G2_ORIENTATION = 1
SPIN7_ORIENTATION = 1
NK_ORIENTATION = 1
CONE_ORIENTATION = 1
