"""Structure models: coframes, structure equations, and the exterior derivative.

Each model is a coframe of real generator 1-forms on a principal bundle (or
Lie group) together with the value of ``d`` on every generator.  Coefficient
fields depend on a handful of coordinates (the fibre quaternion ``a`` for the
spinor-bundle models, the group element ``g3`` and the cone radius ``rho``
for the nearly-Kaehler models); their partial derivatives are taken exactly
with dual numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from ..dual import Dual, new_tag, part, standard_part
from ..exterior import (
    IMAGINARY_UNITS,
    UNITS,
    Form,
    GeneratorSet,
    Quaternion,
    _bits,
    wedge,
)

G2_SPINOR = "G2Spinor"
SPIN7_SPINOR = "Spin7Spinor"
NEARLY_KAHLER = "NearlyKahlerTriple"
G2_CONE = "G2Cone"
MODEL_NAMES = (G2_SPINOR, SPIN7_SPINOR, NEARLY_KAHLER, G2_CONE)


class UnknownModelError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class FiberPoint:
    """Where coefficient fields are evaluated.

    Bundle models use ``a`` (r = |a|^2); the nearly-Kaehler model uses the
    unit quaternion ``g3``; the cone model uses ``g3`` and ``rho``.
    """

    a: Quaternion | None = None
    g3: Quaternion | None = None
    rho: float | None = None

    @property
    def r(self):
        """Squared fibre radius a*conj(a) (bundle convention)."""
        return self.a.norm2()

    def __post_init__(self):
        if self.g3 is not None:
            n = standard_part(self.g3.norm2())
            if np.max(np.abs(np.sqrt(n) - 1.0)) > 1e-12:
                raise DomainError("g3 must be a unit quaternion")
        if self.rho is not None and np.any(standard_part(self.rho) <= 3.0):
            raise DomainError("cone evaluations need rho > 3")


@dataclass(frozen=True)
class Coordinate:
    """A coordinate direction: generator carrying its differential and how to perturb a point."""

    generator: str
    perturb: Callable[[FiberPoint, Dual], FiberPoint]


def _bundle_coordinate(u: int) -> Coordinate:
    unit = UNITS[u]

    def perturb(pt: FiberPoint, eps: Dual) -> FiberPoint:
        return replace(pt, a=pt.a + unit * eps)

    return Coordinate(f"da{u}", perturb)


def _group_coordinate(mu: int) -> Coordinate:
    unit = IMAGINARY_UNITS[mu]

    def perturb(pt: FiberPoint, eps: Dual) -> FiberPoint:
        # right translation by exp(eps e_mu); exact because eps**2 = 0
        return _unchecked(pt, g3=pt.g3 * (1.0 + unit * eps))

    return Coordinate(f"t3_{mu + 1}", perturb)


def _radial_coordinate() -> Coordinate:
    def perturb(pt: FiberPoint, eps: Dual) -> FiberPoint:
        return _unchecked(pt, rho=pt.rho + eps)

    return Coordinate("drho", perturb)


def _unchecked(pt: FiberPoint, **changes) -> FiberPoint:
    new = object.__new__(FiberPoint)
    for name in ("a", "g3", "rho"):
        object.__setattr__(new, name, changes.get(name, getattr(pt, name)))
    return new


def qform(gens: GeneratorSet, prefix: str, imaginary: bool = True) -> Form:
    """The quaternion 1-form sum_u prefix^u * unit_u (Im-valued: u = 1..3)."""
    if imaginary:
        return Form.quaternionic(gens, [None] + [f"{prefix}{u}" for u in (1, 2, 3)])
    return Form.quaternionic(gens, [f"{prefix}{u}" for u in range(4)])


@dataclass(eq=False)
class StructureModel:
    name: str
    kappa: float
    gens: GeneratorSet
    structure_table: dict[int, Form]
    vertical: tuple[str, ...]
    orientation: tuple[str, ...]
    coordinates: tuple[Coordinate, ...]
    _dcache: dict = field(default_factory=dict, repr=False)

    def d_generator(self, index: int) -> Form:
        return self.structure_table.get(index, Form.zero(self.gens, 2))

    def d_monomial(self, mask: int) -> Form:
        """d(e_I) by the Leibniz rule from the structure table (cached)."""
        if mask in self._dcache:
            return self._dcache[mask]
        idx = _bits(mask)
        out = Form.zero(self.gens, len(idx) + 1)
        for j, g in enumerate(idx):
            before = Form.monomial(self.gens, [self.gens.names[i] for i in idx[:j]])
            after = Form.monomial(self.gens, [self.gens.names[i] for i in idx[j + 1:]])
            term = wedge(wedge(before, self.d_generator(g)), after)
            out = out - term if j & 1 else out + term
        self._dcache[mask] = out
        return out

    def generator(self, name: str) -> Form:
        return Form.generator(self.gens, name)

    def qform(self, prefix: str, imaginary: bool = True) -> Form:
        return qform(self.gens, prefix, imaginary)

    @property
    def is_bundle(self) -> bool:
        return self.name in (G2_SPINOR, SPIN7_SPINOR)

    @cached_property
    def fiber_generators(self) -> tuple[str, ...]:
        return tuple(c.generator for c in self.coordinates)


def _table_from_quaternion(gens: GeneratorSet, prefix: str, value: Form, units: Sequence[int]) -> dict[int, Form]:
    table = {}
    for u in units:
        name = f"{prefix}{u}"
        table[gens.index(name)] = value.component(u)
    return table


def build_model(name: str, kappa: float = 1.0) -> StructureModel:
    """Generators, structure equations, vertical subset and orientation of a named model."""
    if not kappa > 0:
        raise DomainError("kappa must be positive")

    if name == G2_SPINOR:
        gens = GeneratorSet.of([f"w{u}" for u in (1, 2, 3)] + [f"p{u}" for u in (1, 2, 3)]
                               + [f"da{u}" for u in range(4)])
        omega, phi = qform(gens, "w"), qform(gens, "p")
        Omega = 0.5 * wedge(omega, omega)
        d_omega = -wedge(phi, omega) - wedge(omega, phi)
        d_phi = -wedge(phi, phi) - (kappa / 2) * Omega
        table = {}
        table.update(_table_from_quaternion(gens, "w", d_omega, (1, 2, 3)))
        table.update(_table_from_quaternion(gens, "p", d_phi, (1, 2, 3)))
        return StructureModel(
            name, kappa, gens, table,
            vertical=("p1", "p2", "p3"),
            orientation=("w1", "w2", "w3", "a0", "a1", "a2", "a3"),
            coordinates=tuple(_bundle_coordinate(u) for u in range(4)),
        )

    if name == SPIN7_SPINOR:
        gens = GeneratorSet.of([f"w{u}" for u in range(4)] + [f"x{u}" for u in (1, 2, 3)]
                               + [f"p{u}" for u in (1, 2, 3)] + [f"da{u}" for u in range(4)])
        omega = qform(gens, "w", imaginary=False)
        xi, phi = qform(gens, "x"), qform(gens, "p")
        omega_bar = omega.conj()
        d_omega = -wedge(xi, omega) - wedge(omega, phi)
        d_phi = -wedge(phi, phi) + (kappa / 2) * (0.5 * wedge(omega_bar, omega))
        d_xi = -wedge(xi, xi) + (kappa / 2) * (0.5 * wedge(omega, omega_bar))
        table = {}
        table.update(_table_from_quaternion(gens, "w", d_omega, range(4)))
        table.update(_table_from_quaternion(gens, "x", d_xi, (1, 2, 3)))
        table.update(_table_from_quaternion(gens, "p", d_phi, (1, 2, 3)))
        return StructureModel(
            name, kappa, gens, table,
            vertical=("x1", "x2", "x3", "p1", "p2", "p3"),
            orientation=("a0", "a1", "a2", "a3", "w0", "w1", "w2", "w3"),
            coordinates=tuple(_bundle_coordinate(u) for u in range(4)),
        )

    if name in (NEARLY_KAHLER, G2_CONE):
        names = [f"t{i}_{mu}" for i in (1, 2, 3) for mu in (1, 2, 3)]
        if name == G2_CONE:
            names.append("drho")
        gens = GeneratorSet.of(names)
        table = {}
        for i in (1, 2, 3):
            theta = qform(gens, f"t{i}_")
            table.update(_table_from_quaternion(gens, f"t{i}_", -wedge(theta, theta), (1, 2, 3)))
        coords = tuple(_group_coordinate(mu) for mu in range(3))
        if name == G2_CONE:
            coords = (_radial_coordinate(),) + coords
        # the nearly-Kaehler analysis is carried out at kappa = 1 only
        return StructureModel(
            name, 1.0, gens, table,
            vertical=("phi1", "phi2", "phi3"),
            orientation=(),
            coordinates=coords,
        )

    raise UnknownModelError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


# ---------------------------------------------------------------------------
# fields


class FieldForm:
    """A form-valued function of a :class:`FiberPoint` over a model's generators."""

    def __init__(self, model: StructureModel, fn: Callable[[FiberPoint], Form], label: str = ""):
        self.model = model
        self.fn = fn
        self.label = label

    def __call__(self, pt: FiberPoint) -> Form:
        return self.fn(pt)

    def __repr__(self):
        return f"FieldForm({self.model.name}, {self.label or self.fn.__name__})"

    def __add__(self, other: "FieldForm") -> "FieldForm":
        return FieldForm(self.model, lambda pt: self(pt) + other(pt), f"({self.label}+{other.label})")

    def __sub__(self, other: "FieldForm") -> "FieldForm":
        return FieldForm(self.model, lambda pt: self(pt) - other(pt), f"({self.label}-{other.label})")

    def __xor__(self, other: "FieldForm") -> "FieldForm":
        return FieldForm(self.model, lambda pt: wedge(self(pt), other(pt)), f"({self.label}^{other.label})")

    def partial(self, pt: FiberPoint, mu: int) -> Form:
        """Exact partial derivative of every coefficient along coordinate ``mu``."""
        coord = self.model.coordinates[mu]
        tag = new_tag()
        perturbed = self(coord.perturb(pt, Dual(tag, 0.0, 1.0)))
        return perturbed.map_scalars(lambda x: part(x, tag))

    def d(self) -> "FieldForm":
        return exterior_derivative(self, self.model)


def exterior_derivative(F: FieldForm, model: StructureModel | None = None) -> FieldForm:
    """d(c e_I) = sum_mu partial_mu(c) dx^mu ^ e_I + c d(e_I)."""
    model = model or F.model

    def dF(pt: FiberPoint) -> Form:
        value = F(pt)
        terms: dict[int, Quaternion] = {}
        for mask, c in value.terms.items():
            for m2, r in model.d_monomial(mask).terms.items():
                v = c * r.x0
                terms[m2] = terms[m2] + v if m2 in terms else v
        out = Form(model.gens, value.degree + 1, terms)
        for mu, coord in enumerate(model.coordinates):
            dx = Form.generator(model.gens, coord.generator)
            out = out + wedge(dx, F.partial(pt, mu))
        return out

    return FieldForm(model, dF, f"d{F.label}")


def constant_field(model: StructureModel, form: Form, label: str = "") -> FieldForm:
    return FieldForm(model, lambda pt: form, label)


def derivative_residual(F: FieldForm, pt: FiberPoint, h: float = 1e-5) -> float:
    """Largest relative gap between exact partials and central differences."""
    worst = 0.0
    for mu, coord in enumerate(F.model.coordinates):
        exact = F.partial(pt, mu)
        plus = F(_finite_step(coord, pt, h))
        minus = F(_finite_step(coord, pt, -h))
        fd = (plus - minus) / (2 * h)
        scale = max(1.0, exact.norm(), fd.norm())
        worst = max(worst, (exact - fd).norm() / scale)
    return worst


def _finite_step(coord: Coordinate, pt: FiberPoint, h: float) -> FiberPoint:
    if coord.generator.startswith("da"):
        u = int(coord.generator[2:])
        return replace(pt, a=pt.a + UNITS[u] * h)
    if coord.generator == "drho":
        return replace(pt, rho=pt.rho + h)
    mu = int(coord.generator.split("_")[1]) - 1
    step = IMAGINARY_UNITS[mu] * math.sin(h) + math.cos(h)
    return replace(pt, g3=pt.g3 * step)


# ---------------------------------------------------------------------------
# sampling


def random_bundle_point(rng: np.random.Generator, r_range=(1e-3, 1e3)) -> FiberPoint:
    """Gaussian direction with log-uniform squared radius r in ``r_range``."""
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    r = math.exp(rng.uniform(math.log(r_range[0]), math.log(r_range[1])))
    v *= math.sqrt(r)
    return FiberPoint(a=Quaternion(*map(float, v)))


def random_unit_quaternion(rng: np.random.Generator) -> Quaternion:
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    return Quaternion(*map(float, v))


def random_link_point(rng: np.random.Generator) -> FiberPoint:
    return FiberPoint(g3=random_unit_quaternion(rng))


def random_cone_point(rng: np.random.Generator, rho_range=(3.5, 50.0)) -> FiberPoint:
    rho = math.exp(rng.uniform(math.log(rho_range[0]), math.log(rho_range[1])))
    return FiberPoint(g3=random_unit_quaternion(rng), rho=rho)
