"""Quaternions and quaternion-valued exterior forms over a finite coframe.

Forms are sparse maps from bitmask-packed, strictly increasing multi-indices
to :class:`Quaternion` coefficients.  The generator order *is* the
orientation: wedge signs come from counting inversions of bit positions.
Quaternion components are duck-typed scalars (floats, numpy arrays, or
:class:`~holonomy_instantons.dual.Dual`), so the same code evaluates a form,
a batch of forms, or its exact derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dual import magnitude

PRUNE = 1e-300
MAX_GENERATORS = 16


class Quaternion:
    """x0 + x1 i + x2 j + x3 k."""

    __slots__ = ("x0", "x1", "x2", "x3")
    __array_ufunc__ = None

    def __init__(self, x0=0.0, x1=0.0, x2=0.0, x3=0.0):
        self.x0 = x0
        self.x1 = x1
        self.x2 = x2
        self.x3 = x3

    @classmethod
    def coerce(cls, value) -> "Quaternion":
        if isinstance(value, Quaternion):
            return value
        return cls(value)

    @property
    def components(self) -> tuple:
        return (self.x0, self.x1, self.x2, self.x3)

    def __iter__(self):
        return iter(self.components)

    def __repr__(self):
        return "Quaternion(%r, %r, %r, %r)" % self.components

    def __add__(self, other):
        if type(other) is not Quaternion:
            return Quaternion(self.x0 + other, self.x1, self.x2, self.x3)
        return Quaternion(self.x0 + other.x0, self.x1 + other.x1,
                          self.x2 + other.x2, self.x3 + other.x3)

    __radd__ = __add__

    def __neg__(self):
        return Quaternion(-self.x0, -self.x1, -self.x2, -self.x3)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if type(other) is not Quaternion:
            if isinstance(other, Form):
                return NotImplemented
            return Quaternion(self.x0 * other, self.x1 * other,
                              self.x2 * other, self.x3 * other)
        a0, a1, a2, a3 = self.x0, self.x1, self.x2, self.x3
        b0, b1, b2, b3 = other.x0, other.x1, other.x2, other.x3
        return Quaternion(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    def __rmul__(self, other):
        # scalars commute with everything
        return Quaternion(other * self.x0, other * self.x1,
                          other * self.x2, other * self.x3)

    def __truediv__(self, scalar):
        return Quaternion(self.x0 / scalar, self.x1 / scalar,
                          self.x2 / scalar, self.x3 / scalar)

    def conj(self) -> "Quaternion":
        return Quaternion(self.x0, -self.x1, -self.x2, -self.x3)

    def norm2(self):
        return self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if magnitude(n2) == 0.0:
            raise ZeroDivisionError("inverse of the zero quaternion")
        return self.conj() / n2

    @property
    def real(self):
        return self.x0

    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x1, self.x2, self.x3)

    def magnitude(self) -> float:
        """Largest absolute component, including derivative parts."""
        return max(magnitude(c) for c in self.components)

    def to_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.components])

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return (self - other).magnitude() <= tol


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
UNITS = (ONE, I, J, K)
IMAGINARY_UNITS = (I, J, K)


def quaternion_from_array(v: Sequence) -> Quaternion:
    return Quaternion(*v)


# ---------------------------------------------------------------------------
# generators and multi-indices


@dataclass(frozen=True)
class GeneratorSet:
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator labels must be unique")
        if len(self.names) > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators are supported")

    @classmethod
    def of(cls, names: Iterable[str]) -> "GeneratorSet":
        return cls(tuple(names))

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def mask(self, *names: str) -> int:
        m = 0
        for n in names:
            m |= 1 << self.index(n)
        return m


def bits(mask: int) -> tuple[int, ...]:
    return _bits(mask)


@lru_cache(maxsize=None)
def _bits(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def wedge_sign(a: int, b: int) -> int:
    """Sign of e_A ^ e_B relative to e_{A|B}; 0 if A and B overlap."""
    if a & b:
        return 0
    inversions = 0
    for j in _bits(b):
        inversions += (a >> (j + 1)).bit_count()
    return -1 if inversions & 1 else 1


def _negligible(q: Quaternion) -> bool:
    for c in (q.x0, q.x1, q.x2, q.x3):
        if (abs(c) if type(c) is float else magnitude(c)) >= PRUNE:
            return False
    return True


# ---------------------------------------------------------------------------
# forms


class Form:
    """Homogeneous degree-``degree`` form with quaternion coefficients.

    Immutable by convention: every operation returns a new form.
    """

    __slots__ = ("gens", "degree", "terms")

    def __init__(self, gens: GeneratorSet, degree: int, terms: Mapping[int, Quaternion] | None = None):
        self.gens = gens
        self.degree = degree
        clean = {}
        n = len(gens)
        for mask, c in (terms or {}).items():
            if mask >> n or mask.bit_count() != degree:
                raise ValueError(f"index {mask:b} is not a degree-{degree} index over {n} generators")
            c = Quaternion.coerce(c)
            if not _negligible(c):
                clean[mask] = c
        self.terms = clean

    @classmethod
    def _trusted(cls, gens: GeneratorSet, degree: int, terms: dict) -> "Form":
        # indices and coefficient types already valid; only prune
        out = object.__new__(cls)
        out.gens, out.degree = gens, degree
        out.terms = {m: c for m, c in terms.items() if not _negligible(c)}
        return out

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, gens: GeneratorSet, degree: int) -> "Form":
        return cls(gens, degree)

    @classmethod
    def scalar(cls, gens: GeneratorSet, q) -> "Form":
        return cls(gens, 0, {0: Quaternion.coerce(q)})

    @classmethod
    def generator(cls, gens: GeneratorSet, name_or_index, coeff=1.0) -> "Form":
        i = name_or_index if isinstance(name_or_index, int) else gens.index(name_or_index)
        return cls(gens, 1, {1 << i: Quaternion.coerce(coeff)})

    @classmethod
    def monomial(cls, gens: GeneratorSet, names: Sequence, coeff=1.0) -> "Form":
        """coeff * e_{n1} ^ e_{n2} ^ ... in the given (not necessarily sorted) order."""
        out = cls.scalar(gens, coeff)
        for n in names:
            out = out ^ cls.generator(gens, n)
        return out

    @classmethod
    def quaternionic(cls, gens: GeneratorSet, names: Sequence[str | None]) -> "Form":
        """1-form sum_u e_{names[u]} * unit_u; ``None`` skips a unit (e.g. Im-valued forms)."""
        terms = {}
        for unit, name in zip(UNITS, names):
            if name is not None:
                terms[1 << gens.index(name)] = unit
        return cls(gens, 1, terms)

    # -- basic protocol -------------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return f"Form(0, degree={self.degree})"
        parts = []
        for mask in sorted(self.terms):
            label = "^".join(self.gens.names[i] for i in _bits(mask)) or "1"
            parts.append(f"{self.terms[mask]!r}*{label}")
        return " + ".join(parts)

    def coefficient(self, *names: str) -> Quaternion:
        """Coefficient of e_{names} in the given order (sign-adjusted)."""
        mono = Form.monomial(self.gens, names)
        (mask, unit), = mono.terms.items()
        c = self.terms.get(mask, Quaternion())
        return c * unit.x0

    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError(f"expected a Form, got {type(other).__name__}")
        if other.gens != self.gens:
            raise ValueError("forms live over different generator sets")

    def __add__(self, other):
        if isinstance(other, (int, float)) and other == 0:
            return self
        self._check(other)
        if other.degree != self.degree and other.terms and self.terms:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        degree = self.degree if self.terms else other.degree
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return Form(self.gens, degree, terms)

    __radd__ = __add__

    def __neg__(self):
        return Form(self.gens, self.degree, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        """Right multiplication of every coefficient by a scalar or quaternion."""
        if isinstance(scalar, Form):
            raise TypeError("use ^ (wedge) to multiply forms")
        return Form(self.gens, self.degree, {m: c * scalar for m, c in self.terms.items()})

    def __rmul__(self, scalar):
        """Left multiplication of every coefficient."""
        if isinstance(scalar, Quaternion):
            return Form(self.gens, self.degree, {m: scalar * c for m, c in self.terms.items()})
        return Form(self.gens, self.degree, {m: scalar * c for m, c in self.terms.items()})

    def __truediv__(self, scalar):
        return Form(self.gens, self.degree, {m: c / scalar for m, c in self.terms.items()})

    def __xor__(self, other):
        return wedge(self, other)

    def map(self, fn) -> "Form":
        return Form(self.gens, self.degree, {m: fn(c) for m, c in self.terms.items()})

    def map_scalars(self, fn) -> "Form":
        return self.map(lambda q: Quaternion(*(fn(x) for x in q.components)))

    def conj(self) -> "Form":
        return self.map(Quaternion.conj)

    def re(self) -> "Form":
        return self.map(lambda q: Quaternion(q.x0))

    def im(self) -> "Form":
        return self.map(Quaternion.imag)

    def component(self, u: int) -> "Form":
        """Real form given by the u-th quaternion component (0=real, 1=i, 2=j, 3=k)."""
        return self.map(lambda q: Quaternion(q.components[u]))

    def is_zero(self) -> bool:
        return not self.terms

    def norm(self, kind: str = "max") -> float:
        return coefficient_norm(self, kind)

    def to_float(self) -> "Form":
        """Strip dual parts (standard part of every coefficient)."""
        from .dual import standard_part
        return self.map_scalars(lambda x: float(standard_part(x)))


# ---------------------------------------------------------------------------
# operations


def wedge(A: Form, B: Form) -> Form:
    """A ^ B with coefficient products taken in the order coeff_A * coeff_B."""
    A._check(B)
    if A.degree + B.degree > len(A.gens):
        return Form.zero(A.gens, A.degree + B.degree)
    terms: dict[int, Quaternion] = {}
    for ma, ca in A.terms.items():
        for mb, cb in B.terms.items():
            s = wedge_sign(ma, mb)
            if not s:
                continue
            prod = ca * cb
            if s < 0:
                prod = -prod
            m = ma | mb
            terms[m] = terms[m] + prod if m in terms else prod
    return Form._trusted(A.gens, A.degree + B.degree, terms)


def wedge_all(*forms: Form) -> Form:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def module_action(a, A: Form, mode: str = "left") -> Form:
    """Multiply each coefficient of ``A`` by ``a`` on the left, right, or a*c*conj(a)."""
    a = Quaternion.coerce(a)
    if mode == "left":
        return A.map(lambda c: a * c)
    if mode == "right":
        return A.map(lambda c: c * a)
    if mode == "sandwich":
        ac = a.conj()
        return A.map(lambda c: a * c * ac)
    raise ValueError(f"unknown module action mode {mode!r}")


def conj_re_im(A: Form) -> tuple[Form, Form, Form]:
    return A.conj(), A.re(), A.im()


def interior_product(v: Sequence[float], A: Form) -> Form:
    """Contract the first slot of ``A`` with the vector whose generator components are ``v``."""
    n = len(A.gens)
    if len(v) != n:
        raise ValueError(f"vector has {len(v)} components, expected {n}")
    if A.degree == 0:
        raise ValueError("cannot contract a 0-form")
    terms: dict[int, Quaternion] = {}
    for mask, c in A.terms.items():
        idx = _bits(mask)
        for pos, g in enumerate(idx):
            vg = v[g]
            if isinstance(vg, (int, float)) and vg == 0:
                continue
            m = mask & ~(1 << g)
            val = c * vg
            if pos & 1:
                val = -val
            terms[m] = terms[m] + val if m in terms else val
    return Form(A.gens, A.degree - 1, terms)


def coefficient_norm(A: Form, kind: str = "max") -> float:
    """``max`` = largest quaternion norm over stored indices; ``frobenius`` = l2 over all."""
    if not A.terms:
        return 0.0
    sq = [_norm2_float(c) for c in A.terms.values()]
    if kind == "max":
        return math.sqrt(max(sq))
    if kind == "frobenius":
        return math.sqrt(sum(sq))
    raise ValueError(f"unknown norm kind {kind!r}")


def _norm2_float(q: Quaternion) -> float:
    from .dual import standard_part
    total = 0.0
    for x in q.components:
        x = standard_part(x)
        total = total + x * x
    return float(np.max(total))


def relative_residual(lhs: Form, rhs: Form) -> float:
    """||L - R||_max / max(1, ||L||_max, ||R||_max)."""
    num = coefficient_norm(lhs - rhs, "max")
    return num / max(1.0, coefficient_norm(lhs, "max"), coefficient_norm(rhs, "max"))


def substitute(A: Form, images: Sequence[Form], target: GeneratorSet | None = None) -> Form:
    """Pull a form back along a linear substitution of generators.

    ``images[g]`` is the 1-form (over ``target``) that replaces generator ``g``.
    Images must have real (scalar) coefficients so that substitution commutes
    with the quaternion coefficients.
    """
    gens = target or images[0].gens
    rows = [{m: c.x0 for m, c in im.terms.items()} for im in images]
    cache: dict[int, dict[int, float]] = {0: {0: 1.0}}

    def image(mask: int) -> dict[int, float]:
        # real coefficients only, so plain scalar products suffice
        if mask in cache:
            return cache[mask]
        idx = _bits(mask)
        low = image(mask & ~(1 << idx[-1]))
        out: dict[int, float] = {}
        for ma, ca in low.items():
            for mb, cb in rows[idx[-1]].items():
                s = wedge_sign(ma, mb)
                if s:
                    m = ma | mb
                    out[m] = out.get(m, 0.0) + (ca * cb if s > 0 else -(ca * cb))
        cache[mask] = out
        return out

    acc: dict[int, list] = {}
    for mask, c in A.terms.items():
        q = (c.x0, c.x1, c.x2, c.x3)
        for m2, r in image(mask).items():
            slot = acc.get(m2)
            if slot is None:
                acc[m2] = [q[0] * r, q[1] * r, q[2] * r, q[3] * r]
            else:
                slot[0] += q[0] * r
                slot[1] += q[1] * r
                slot[2] += q[2] * r
                slot[3] += q[3] * r
    return Form._trusted(gens, A.degree, {m: Quaternion(*v) for m, v in acc.items()})
