"""SU(3) data of the nearly-Kaehler link S^3 x S^3 and its G2 cone.

Sign conventions: the SU(3) orientation is the one of varpi^3/6, which is
+sigma^123456 in the orthonormal link coframe.  The compatible complex
coframe is eta^b = sigma^b - i sigma^(b+3), so varpi = (i/2) sum eta^b ^ conj(eta^b)
and Omega1 + i Omega2 = eta^1 ^ eta^2 ^ eta^3.
"""

from __future__ import annotations

import math

from ..exterior import Form, wedge, wedge_all
from .structure import StructureModel

SQRT3 = math.sqrt(3.0)
VOLUME_SCALE = (1.0 / (3.0 * SQRT3)) * (2.0 / 3.0) ** 3


def nk_forms(model: StructureModel) -> dict[str, Form]:
    from .forms import components, link_frame

    lf = link_frame(model)
    omega, tau = lf.omega, lf.tau
    tau2 = wedge(tau, tau)
    omega2 = wedge(omega, omega)
    w = components(omega, (1, 2, 3))
    t = components(tau, (1, 2, 3))
    varpi = (2.0 / (3.0 * SQRT3)) * wedge(omega, tau).re()
    Omega1 = (1.0 / (3.0 * SQRT3)) * wedge_all(*w) + (2.0 / (9.0 * SQRT3)) * wedge(omega, tau2).re()
    Omega2 = (-4.0 / 81.0) * wedge(tau2, tau) + (1.0 / 9.0) * wedge(omega2, tau).re()
    w123t123 = wedge(wedge_all(*w), wedge_all(*t))
    return {
        "omega": omega,
        "phi": lf.phi,
        "tau": tau,
        "varpi": varpi,
        "Omega1": Omega1,
        "Omega2": Omega2.re(),
        "half_varpi_sq": 0.5 * wedge(varpi, varpi),
        "half_varpi_sq_quaternionic": (1.0 / 27.0) * wedge(omega2, tau2).re(),
        "dvol": VOLUME_SCALE * w123t123,
        # the literal coefficient -1/(3 sqrt 3) (2/3)^3; equals -dvol (kept for comparison)
        "dvol_opposite": -VOLUME_SCALE * w123t123,
    }


def eta_coframe(frame_gens) -> list[Form]:
    """eta^b = e_b - i e_(b+3) over an orthonormal frame e1..e6."""
    from ..exterior import I

    e = [Form.generator(frame_gens, k) for k in range(6)]
    return [e[b] + e[b + 3] * (-1.0 * I) for b in range(3)]
