"""Radial profile ODEs: closed forms, Riccati residuals, RK4 integration and singularity scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as sp_integrate
from scipy.optimize import brentq

from .dual import standard_part
from .models.structure import DomainError

FAMILIES = ("g2", "spin7_f", "spin7_g")


class SingularRadiusError(DomainError):
    """A closed-form profile was evaluated at a zero of its denominator."""

    def __init__(self, family: str, root: float):
        super().__init__(f"{family} profile is singular at r = {root!r}")
        self.family = family
        self.root = root


class BlowUpError(ArithmeticError):
    """Integration hit a pole of the solution."""

    def __init__(self, radius: float, sample: "TrajectorySample"):
        super().__init__(f"solution blows up at r = {radius!r}")
        self.radius = radius
        self.sample = sample


# ---------------------------------------------------------------------------
# closed forms


def _any(mask) -> bool:
    return bool(np.any(np.asarray(standard_part(mask))))


def singular_radius(family: str, param: float) -> float | None:
    """The positive zero of the denominator, if there is one (r >= 0)."""
    if family == "g2":
        # 3u + C u^(1/3) = 0  <=>  u^(2/3) = -C/3
        if param >= 0:
            return None
        root = (-param / 3.0) ** 1.5 - 1.0
    elif family in ("spin7_f", "spin7_g"):
        # 1 + D u^(3/5) = 0 with D = 5C for spin7_g
        D = param if family == "spin7_f" else 5.0 * param
        if D >= 0:
            return None
        root = (-1.0 / D) ** (5.0 / 3.0) - 1.0
    else:
        raise ValueError(f"unknown family {family!r}")
    return root if root >= 0 else None


def _check_pole(family: str, param: float, r, den, scale) -> None:
    den = np.abs(np.asarray(standard_part(den), dtype=float))
    if np.any(den <= 1e-13 * np.abs(np.asarray(standard_part(scale), dtype=float))):
        root = singular_radius(family, param)
        raise SingularRadiusError(family, root if root is not None else float(np.min(standard_part(r))))


def g2_closed_form(r, C: float):
    """f = 2 / (3(r+1) + C (r+1)^(1/3)) and f'."""
    u = 1.0 + r
    u13 = u ** (1.0 / 3.0)
    den = 3.0 * u + C * u13
    _check_pole("g2", C, r, den, 3.0 * u)
    dden = 3.0 + (C / 3.0) * u13 / u
    return 2.0 / den, -2.0 * dden / (den * den)


def spin7_g_closed_form(r, C: float):
    """g = -3C / ((1+r)^(2/5) (1 + 5C (1+r)^(3/5))) and g'."""
    u = 1.0 + r
    u25 = u ** 0.4
    E = 1.0 + 5.0 * C * u ** 0.6
    _check_pole("spin7_g", C, r, E, 1.0)
    den = u25 + 5.0 * C * u
    dden = 0.4 * u25 / u + 5.0 * C
    return -3.0 * C / den, 3.0 * C * dden / (den * den)


def spin7_f_closed_form(r, D: float):
    """The two-term solution of the Spin(7) profile equation and its derivative."""
    if _any(np.asarray(standard_part(r)) <= 0):
        raise DomainError("spin7_f needs r > 0")
    u = 1.0 + r
    u25 = u ** 0.4
    E = 1.0 + D * u ** 0.6
    _check_pole("spin7_f", D, r, E, 1.0)
    dE = 0.6 * D / u25
    first = 1.0 / (r * E)
    d_first = -(E + r * dE) / (r * E) ** 2
    N = 2.0 * r + 5.0
    M = r * u25 * E
    dM = u25 * E + r * 0.4 * (u25 / u) * E + r * u25 * dE
    second = D * N / (5.0 * M)
    d_second = (D / 5.0) * (2.0 * M - N * dM) / (M * M)
    return first + second, d_first + d_second


def closed_form(family: str, r, param: float = 0.0):
    """(value, derivative) of a closed-form profile family at r."""
    if _any(np.asarray(standard_part(r)) < 0):
        raise DomainError("r must be non-negative")
    if family == "g2":
        return g2_closed_form(r, param)
    if family == "spin7_f":
        return spin7_f_closed_form(r, param)
    if family == "spin7_g":
        return spin7_g_closed_form(r, param)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


# ---------------------------------------------------------------------------
# Riccati equations f' + p f + q f^2 = s


@dataclass(frozen=True)
class RiccatiSpec:
    name: str
    p: Callable
    q: Callable
    s: Callable
    domain: tuple[float, float] = (0.0, math.inf)

    def rhs(self, r, f):
        return self.s(r) - self.p(r) * f - self.q(r) * f * f

    def residual(self, r, f, df):
        return df + self.p(r) * f + self.q(r) * f * f - self.s(r)


def _const(c):
    return lambda r: c * np.ones_like(r) if isinstance(r, np.ndarray) else c


G2_RICCATI = RiccatiSpec("g2", lambda r: 1.0 / (3.0 * (r + 1.0)), _const(1.0), _const(0.0))
# r f' + (12r+10)/(5(1+r)) f - r f^2 = 2/(5(1+r)), divided through by r
SPIN7_F_RICCATI = RiccatiSpec(
    "spin7_f",
    lambda r: (12.0 * r + 10.0) / (5.0 * r * (1.0 + r)),
    _const(-1.0),
    lambda r: 2.0 / (5.0 * r * (1.0 + r)),
    (0.0, math.inf),
)
SPIN7_G_RICCATI = RiccatiSpec("spin7_g", lambda r: 2.0 / (5.0 * (1.0 + r)), _const(-1.0), _const(0.0))

SPECS = {spec.name: spec for spec in (G2_RICCATI, SPIN7_F_RICCATI, SPIN7_G_RICCATI)}


def ode_residual(spec: RiccatiSpec, profile: Callable, grid: Sequence[float]) -> float:
    """max |f' + p f + q f^2 - s| over the grid; ``profile(r)`` returns (f, f')."""
    worst = 0.0
    for r in grid:
        f, df = profile(r)
        worst = max(worst, abs(float(spec.residual(r, f, df))))
    return worst


def bs_ratio(r, kappa: float = 1.0):
    """sigma/tau of the G2 Bryant-Salamon metric: -4/(3 kappa (1+r))."""
    return -4.0 / (3.0 * kappa * (1.0 + r))


def coupled_rhs(r, y, kappa: float = 1.0):
    """(f', g') of f' + f^2 + (sigma/tau)(g^2 r - f kappa/4) = 0, g' + fg + (3/r)(g - r f g) = 0."""
    f, g = y[0], y[1]
    df = -f * f - bs_ratio(r, kappa) * (g * g * r - f * kappa / 4.0)
    dg = -f * g - (3.0 / r) * (g - r * f * g)
    return np.array([df, dg])


def coupled_residual(f_profile: Callable, g_profile: Callable, grid: Sequence[float],
                     kappa: float = 1.0) -> tuple[float, float]:
    """Worst residuals of the two coupled equations (r > 0 on the grid)."""
    e1 = e2 = 0.0
    for r in grid:
        f, df = f_profile(r)
        g, dg = g_profile(r)
        lhs = np.array([df, dg]) - coupled_rhs(r, (f, g), kappa)
        e1, e2 = max(e1, abs(lhs[0])), max(e2, abs(lhs[1]))
    return float(e1), float(e2)


# ---------------------------------------------------------------------------
# integration


@dataclass(frozen=True)
class IntegratorConfig:
    h: float
    r0: float
    r1: float
    method: str = "rk4"

    def __post_init__(self):
        if self.method != "rk4":
            raise ValueError("only the classical rk4 method is provided")
        if not self.h > 0:
            raise ValueError("step must be positive")
        if self.h > abs(self.r1 - self.r0) / 10.0 + 1e-15:
            raise ValueError("step must be at most a tenth of the range")


@dataclass
class TrajectorySample:
    r: np.ndarray
    f: np.ndarray
    error_estimate: float = math.nan
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.r) != len(self.f):
            raise ValueError("r and f must have equal length")


def _rk4_step(rhs, r, y, h):
    k1 = rhs(r, y)
    k2 = rhs(r + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(r + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(r + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _grid(config: IntegratorConfig, h: float) -> np.ndarray:
    n = int(round(abs(config.r1 - config.r0) / h))
    return config.r0 + np.sign(config.r1 - config.r0) * h * np.arange(n + 1)


def _riccati_run(spec: RiccatiSpec, f0: float, config: IntegratorConfig, h: float) -> TrajectorySample:
    """Fixed-step RK4 for a scalar Riccati equation.

    Near a pole the state is switched to u = 1/f, which solves
    u' = p u + q - s u^2 and crosses zero where f blows up.
    """
    rs = _grid(config, h)
    step = float(rs[1] - rs[0])
    p, q, s = spec.p, spec.q, spec.s

    def f_rhs(r, y):
        return s(r) - p(r) * y - q(r) * y * y

    def u_rhs(r, y):
        return p(r) * y + q(r) - s(r) * y * y

    out = np.empty_like(rs)
    out[0] = f0
    inverted = abs(f0) > 1.0
    y = 1.0 / f0 if inverted else float(f0)
    for i in range(len(rs) - 1):
        r = float(rs[i])
        y_new = _rk4_step(u_rhs if inverted else f_rhs, r, y, step)
        if not math.isfinite(y_new):
            raise BlowUpError(r, TrajectorySample(rs[: i + 1], out[: i + 1]))
        if inverted and (y_new == 0.0 or (y_new > 0) != (y > 0)):
            radius = _hermite_root(u_rhs, r, y, step, y_new)
            raise BlowUpError(radius, TrajectorySample(rs[: i + 1], out[: i + 1]))
        y = y_new
        # keep the integrated variable bounded by 2 in magnitude
        if inverted and abs(y) > 2.0:
            inverted, y = False, 1.0 / y
        elif not inverted and abs(y) > 2.0:
            inverted, y = True, 1.0 / y
        out[i + 1] = 1.0 / y if inverted else y
    return TrajectorySample(rs, out)


def _hermite_root(rhs, r, y0, h, y1) -> float:
    """Zero of the cubic Hermite interpolant of u on [r, r+h]."""
    d0, d1 = float(rhs(r, y0)) * h, float(rhs(r + h, y1)) * h

    def u(t):
        h00, h10 = 2 * t ** 3 - 3 * t ** 2 + 1, t ** 3 - 2 * t ** 2 + t
        h01, h11 = -2 * t ** 3 + 3 * t ** 2, t ** 3 - t ** 2
        return h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1

    if y1 == 0.0:
        return float(r + h)
    t = brentq(u, 0.0, 1.0, xtol=1e-15)
    return float(r + t * h)


def integrate(spec: RiccatiSpec, f0: float, config: IntegratorConfig) -> TrajectorySample:
    """RK4 from f(r0) = f0, with a step-halving error estimate at the common nodes.

    Raises :class:`BlowUpError` carrying the pole location if the solution is
    not finite on the range.
    """
    coarse = _riccati_run(spec, f0, config, config.h)
    fine = _riccati_run(spec, f0, config, config.h / 2.0)
    coarse.error_estimate = float(np.max(np.abs(coarse.f - fine.f[::2])) / 15.0)
    return coarse


def integrate_system(rhs: Callable, y0: Sequence[float], config: IntegratorConfig) -> tuple[np.ndarray, np.ndarray, float]:
    """RK4 for a vector system; returns (r, y, step-halving error estimate)."""

    def run(h):
        rs = _grid(config, h)
        step = rs[1] - rs[0]
        ys = np.empty((len(rs), len(y0)))
        ys[0] = y0
        for i in range(len(rs) - 1):
            ys[i + 1] = _rk4_step(rhs, rs[i], ys[i], step)
            if not np.all(np.isfinite(ys[i + 1])):
                raise BlowUpError(float(rs[i]), TrajectorySample(rs[: i + 1], ys[: i + 1, 0]))
        return rs, ys

    rs, ys = run(config.h)
    _, fine = run(config.h / 2.0)
    return rs, ys, float(np.max(np.abs(ys - fine[::2])) / 15.0)


def integrate_coupled(f0: float, g0: float, config: IntegratorConfig, kappa: float = 1.0):
    """The coupled (f, g) system; needs r0 > 0 because of the 3/r coefficient."""
    if min(config.r0, config.r1) <= 0:
        raise DomainError("the coupled system is integrated on r > 0 only")
    return integrate_system(lambda r, y: coupled_rhs(r, y, kappa), np.array([f0, g0], dtype=float), config)


def sup_error(sample: TrajectorySample, exact: Callable) -> float:
    return float(np.max(np.abs(sample.f - np.array([exact(r) for r in sample.r]))))


def order_ratio(spec: RiccatiSpec, f0: float, exact: Callable, r0: float, r1: float, h: float) -> float:
    """Sup-error at step h divided by sup-error at h/2 (about 16 for a fourth-order method)."""
    e1 = sup_error(_riccati_run(spec, f0, IntegratorConfig(h, r0, r1), h), exact)
    e2 = sup_error(_riccati_run(spec, f0, IntegratorConfig(h / 2, r0, r1), h / 2), exact)
    return e1 / e2


# ---------------------------------------------------------------------------
# linearization


@dataclass(frozen=True)
class LinearizedRiccati:
    """y'' + p y' = 0 with f = sign * y'/y."""

    spec: RiccatiSpec
    sign: float
    dy: Callable  # y'(r; c1)
    y: Callable  # y(r; c1, c2)

    def reconstruct(self, c1: float, c2: float) -> Callable:
        """Profile r -> (f, f') built from the basis solution with constants c1, c2."""

        def profile(r):
            y, dy = self.y(r, c1, c2), self.dy(r, c1)
            ddy = -self.spec.p(r) * dy
            f = self.sign * dy / y
            df = self.sign * (ddy / y - dy * dy / (y * y))
            return f, df

        return profile


def linearize(spec: RiccatiSpec) -> LinearizedRiccati:
    probe = np.array([0.5, 1.0, 2.0, 7.0])
    if np.any(np.abs(spec.s(probe)) > 0):
        raise ValueError("linearization needs a homogeneous equation (s = 0)")
    qs = spec.q(probe)
    if not (np.allclose(qs, 1.0) or np.allclose(qs, -1.0)):
        raise ValueError("linearization needs q = +1 or q = -1")
    sign = float(qs[0])
    if spec.name == "g2":
        return LinearizedRiccati(spec, sign,
                                 lambda r, c1: c1 * (r + 1.0) ** (-1.0 / 3.0),
                                 lambda r, c1, c2: 1.5 * c1 * (r + 1.0) ** (2.0 / 3.0) + c2)
    if spec.name == "spin7_g":
        # y = A (1+r)^(3/5) + B with A = c1 / (3/5)
        return LinearizedRiccati(spec, sign,
                                 lambda r, c1: c1 * (1.0 + r) ** (-0.4),
                                 lambda r, c1, c2: (c1 / 0.6) * (1.0 + r) ** 0.6 + c2)
    lo = spec.domain[0]

    def P(r):
        return sp_integrate.quad(spec.p, lo, r)[0]

    def dy(r, c1):
        return c1 * math.exp(-P(r))

    def y(r, c1, c2):
        return sp_integrate.quad(lambda t: dy(t, c1), lo, r)[0] + c2

    return LinearizedRiccati(spec, sign, dy, y)


def g2_constant_from_basis(c1: float, c2: float) -> float:
    """Matching f(0): c1 / (1.5 c1 + c2) = 2 / (3 + C)  gives  C = 2 c2 / c1."""
    return 2.0 * c2 / c1


# ---------------------------------------------------------------------------
# singularity scans


@dataclass(frozen=True)
class ScanHit:
    family: str
    parameter: float
    radius: float
    note: str = ""


def denominator(family: str, param: float) -> Callable[[np.ndarray], np.ndarray]:
    if family == "g2":
        return lambda r: 3.0 * (1.0 + r) + param * (1.0 + r) ** (1.0 / 3.0)
    if family == "spin7_f":
        return lambda r: 1.0 + param * (1.0 + r) ** 0.6
    if family == "spin7_g":
        return lambda r: 1.0 + 5.0 * param * (1.0 + r) ** 0.6
    raise ValueError(f"unknown family {family!r}")


def scan_grid(r_range: tuple[float, float], per_decade: int = 64) -> np.ndarray:
    lo, hi = r_range
    start = max(lo, 1e-6)
    decades = max(math.log10(hi / start), 1.0 / per_decade)
    pts = np.logspace(math.log10(start), math.log10(hi), int(math.ceil(decades * per_decade)) + 1)
    if lo < start:
        pts = np.concatenate([[lo], pts])
    return pts


def _note(family: str, param: float) -> str:
    if family == "spin7_f" and -1.0 < param < 0.0:
        return "pole for D in (-1, 0): the claimed D > -1 smoothness range is too wide"
    if family == "spin7_g" and -0.2 < param < 0.0:
        return "pole for C in (-1/5, 0), i.e. D = 5C in (-1, 0)"
    return ""


def singularity_scan(family: str, params: Sequence[float], r_range: tuple[float, float] = (0.0, 1e6),
                     per_decade: int = 64, xtol: float = 1e-10) -> list[ScanHit]:
    """Bracket and refine the denominator zeros of a profile family for each parameter."""
    grid = scan_grid(r_range, per_decade)
    hits: list[ScanHit] = []
    for param in params:
        den = denominator(family, param)
        vals = den(grid)
        roots: list[float] = []
        for k in range(len(grid)):
            if vals[k] == 0.0:
                roots.append(float(grid[k]))
        for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            roots.append(float(brentq(den, grid[k], grid[k + 1], xtol=xtol * 1e-2, rtol=4 * np.finfo(float).eps)))
        roots.sort()
        unique: list[float] = []
        for x in roots:
            if not unique or abs(x - unique[-1]) > 1e-8:
                unique.append(x)
        hits.extend(ScanHit(family, float(param), x, _note(family, param)) for x in unique)
    return hits
