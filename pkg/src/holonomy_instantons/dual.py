"""Tagged dual numbers for exact first derivatives, nestable to any order.

A ``Dual(tag, re, du)`` stands for ``re + du * eps_tag`` with ``eps_tag**2 = 0``.
Parts may themselves be duals carrying *smaller* tags, so a value built by
nested differentiation is a canonical tree with the largest tag outermost.
This keeps perturbations of different nesting levels apart.

Components may be Python floats or numpy arrays (evaluation at many points
at once).
"""

from __future__ import annotations

import itertools
import math
import numbers

import numpy as np

_tags = itertools.count(1)
_SCALARS = (numbers.Number, np.ndarray)


def new_tag() -> int:
    return next(_tags)


class Dual:
    __slots__ = ("tag", "re", "du")
    # keep numpy from broadcasting over us; defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, tag: int, re, du):
        self.tag = tag
        self.re = re
        self.du = du

    @classmethod
    def seed(cls, tag: int | None = None) -> "Dual":
        """The infinitesimal ``eps`` itself (re=0, du=1)."""
        return cls(new_tag() if tag is None else tag, 0.0, 1.0)

    def __repr__(self):
        return f"Dual[{self.tag}]({self.re!r} + {self.du!r} eps)"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        t = type(other)
        if t is float or t is int:
            return Dual(self.tag, self.re + other, self.du)
        if t is Dual:
            if other.tag == self.tag:
                return Dual(self.tag, self.re + other.re, self.du + other.du)
            if other.tag > self.tag:
                return Dual(other.tag, self + other.re, other.du)
            return Dual(self.tag, self.re + other, self.du)
        if not isinstance(other, _SCALARS):
            return NotImplemented
        return Dual(self.tag, self.re + other, self.du)

    __radd__ = __add__

    def __neg__(self):
        return Dual(self.tag, -self.re, -self.du)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        t = type(other)
        if t is float or t is int:
            return Dual(self.tag, self.re * other, self.du * other)
        if t is Dual:
            if other.tag == self.tag:
                return Dual(self.tag, self.re * other.re,
                            self.re * other.du + self.du * other.re)
            if other.tag > self.tag:
                return Dual(other.tag, self * other.re, self * other.du)
            return Dual(self.tag, self.re * other, self.du * other)
        if not isinstance(other, _SCALARS):
            return NotImplemented
        return Dual(self.tag, self.re * other, self.du * other)

    __rmul__ = __mul__

    def reciprocal(self):
        inv = 1.0 / self.re
        return Dual(self.tag, inv, -self.du * inv * inv)

    def __truediv__(self, other):
        if not isinstance(other, _SCALARS):
            if not isinstance(other, Dual):
                return NotImplemented
            if other.tag >= self.tag:
                return self * other.reciprocal()
            return Dual(self.tag, self.re / other, self.du / other)
        return Dual(self.tag, self.re / other, self.du / other)

    def __rtruediv__(self, other):
        return other * self.reciprocal()

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError("dual exponents are not supported")
        if p == 0:
            return Dual(self.tag, self.re ** 0, self.du * 0)
        return Dual(self.tag, self.re ** p, p * self.re ** (p - 1) * self.du)

    def sqrt(self):
        return self ** 0.5

    # comparisons look at the standard part only
    def __lt__(self, other):
        return standard_part(self) < standard_part(other)

    def __gt__(self, other):
        return standard_part(self) > standard_part(other)

    def __abs__(self):
        return self if standard_part(self) >= 0 else -self


def standard_part(x):
    while isinstance(x, Dual):
        x = x.re
    return x


def part(x, tag: int):
    """Coefficient of ``eps_tag`` in ``x`` (zero when ``x`` does not carry it)."""
    if not isinstance(x, Dual) or x.tag < tag:
        return 0.0
    if x.tag == tag:
        return x.du
    return Dual(x.tag, part(x.re, tag), part(x.du, tag))


def magnitude(x) -> float:
    """Largest absolute value over every component of a (nested) dual / array."""
    if isinstance(x, Dual):
        return max(magnitude(x.re), magnitude(x.du))
    if isinstance(x, np.ndarray):
        return float(np.max(np.abs(x))) if x.size else 0.0
    return abs(x)


def sqrt(x):
    if isinstance(x, Dual):
        return x.sqrt()
    if isinstance(x, np.ndarray):
        return np.sqrt(x)
    return math.sqrt(x)


def derivative(f, x0, order: int = 1):
    """``order``-th derivative of a scalar function at ``x0`` via nested duals."""
    if order == 0:
        return f(x0)
    tag = new_tag()
    return part(derivative(f, Dual(tag, x0, 1.0), order - 1), tag)
