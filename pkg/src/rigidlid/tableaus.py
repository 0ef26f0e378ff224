"""Butcher tableau registry for the explicit and additive (IMEX) schemes.

Registered schemes:

* ``rk2``  - Heun's second-order method.
* ``rk3``  - Kutta's third-order method.
* ``rk4``  - the classical fourth-order method.
* ``ark2`` - the three-stage, second-order additive pair of
  Giraldo, Kelly & Constantinescu (2013).
* ``ark3`` - ARK3(2)4L[2]SA of Kennedy & Carpenter (2003).
* ``ark4`` - ARK4(3)6L[2]SA of Kennedy & Carpenter (2003).

The explicit schemes are registered as degenerate additive pairs whose
implicit tableau equals the explicit one, so a single driver covers both.
Every tableau carries a dense-output matrix b* with B*_i(theta) =
sum_j bstar[i, j] theta^j; for ark2 the published matrix is used, for the
other schemes b* is solved from the interpolation order conditions together
with the endpoint constraint B*_i(1) = b_i.

All registry invariants (row sums, sum(b) = 1, b = b_tilde, c = c_tilde,
order conditions of the additive pair up to the declared order, dense-output
moment and endpoint conditions) are verified at load time to 1e-13.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import TableauError

_TOL = 1e-13


@dataclass(frozen=True)
class IMEXTableau:
    """Paired explicit/implicit Butcher coefficients plus dense output.

    a, b, c are the explicit coefficients; a_tilde, b_tilde, c_tilde the
    implicit ones (ESDIRK for the additive pairs). bstar has shape
    (s, pstar).
    """

    name: str
    order: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    a_tilde: np.ndarray
    b_tilde: np.ndarray
    c_tilde: np.ndarray
    bstar: np.ndarray

    @property
    def stages(self) -> int:
        return len(self.b)

    @property
    def pstar(self) -> int:
        return self.bstar.shape[1]

    @property
    def is_explicit(self) -> bool:
        """True when the pair degenerates to a single explicit method."""
        return np.array_equal(self.a, self.a_tilde) or not self.a_tilde.any()

    def bstar_at(self, theta: float) -> np.ndarray:
        """Dense-output weights B*_i(theta) = sum_j bstar[i, j] theta^j."""
        powers = theta ** np.arange(1, self.pstar + 1)
        return self.bstar @ powers


def dense_output_matrix(c, b, pstar) -> np.ndarray:
    """Solve for a dense-output matrix of interpolation order pstar.

    The conditions are the quadrature moments
        sum_i bstar[i, j] c_i^(k-1) = delta_{jk} / k   (j, k = 1..pstar)
    plus the endpoint identity sum_j bstar[i, j] = b_i. The system is
    solved in least-squares sense and the residual is required to vanish
    to near machine precision.
    """
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    s = len(b)
    rows = []
    rhs = []
    for k in range(1, pstar + 1):
        for j in range(1, pstar + 1):
            row = np.zeros((s, pstar))
            row[:, j - 1] = c ** (k - 1)
            rows.append(row.ravel())
            rhs.append(1.0 / k if j == k else 0.0)
    for i in range(s):
        row = np.zeros((s, pstar))
        row[i, :] = 1.0
        rows.append(row.ravel())
        rhs.append(b[i])
    A = np.array(rows)
    y = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    if np.max(np.abs(A @ sol - y)) > 1e-12:
        raise TableauError(
            f"no dense output of order {pstar} exists for abscissae {c}"
        )
    return sol.reshape(s, pstar)


def _order_conditions(tab: IMEXTableau):
    """Additive order conditions up to tab.order for a pair sharing b, c.

    Returns a list of (description, residual) pairs. The coupling
    conditions enumerate both tableau colourings of each rooted tree.
    """
    b, c = tab.b, tab.c
    mats = {"E": tab.a, "I": tab.a_tilde}
    conds = [("sum(b) = 1", b.sum() - 1.0)]
    if tab.order >= 2:
        conds.append(("b.c = 1/2", b @ c - 0.5))
    if tab.order >= 3:
        conds.append(("b.c^2 = 1/3", b @ c**2 - 1.0 / 3.0))
        for k, A in mats.items():
            conds.append((f"b.A{k}.c = 1/6", b @ (A @ c) - 1.0 / 6.0))
    if tab.order >= 4:
        conds.append(("b.c^3 = 1/4", b @ c**3 - 0.25))
        for k, A in mats.items():
            conds.append((f"b.(c*A{k}c) = 1/8", b @ (c * (A @ c)) - 0.125))
            conds.append((f"b.A{k}.c^2 = 1/12", b @ (A @ c**2) - 1.0 / 12.0))
        for k1, A1 in mats.items():
            for k2, A2 in mats.items():
                conds.append(
                    (f"b.A{k1}.A{k2}.c = 1/24", b @ (A1 @ (A2 @ c)) - 1.0 / 24.0)
                )
    if tab.order >= 5:
        raise TableauError("order conditions implemented up to order 4")
    return conds


def validate_tableau(tab: IMEXTableau, tol: float = _TOL):
    """Check every registry invariant; raise TableauError listing failures."""
    failures = []

    def check(name, residual):
        if abs(residual) > tol:
            failures.append(f"{name} (residual {residual:.3e})")

    s = tab.stages
    if tab.a.shape != (s, s) or tab.a_tilde.shape != (s, s):
        raise TableauError(f"{tab.name}: coefficient matrices must be {s}x{s}")
    if np.any(np.triu(tab.a, k=0) != 0.0):
        failures.append("explicit tableau not strictly lower triangular")
    if np.any(np.triu(tab.a_tilde, k=1) != 0.0):
        failures.append("implicit tableau not lower triangular")
    check("row sums of a equal c", np.max(np.abs(tab.a.sum(axis=1) - tab.c)))
    check("row sums of a_tilde equal c_tilde",
          np.max(np.abs(tab.a_tilde.sum(axis=1) - tab.c_tilde)))
    check("sum(b) = 1", tab.b.sum() - 1.0)
    check("sum(b_tilde) = 1", tab.b_tilde.sum() - 1.0)
    check("b = b_tilde (mass conservation)", np.max(np.abs(tab.b - tab.b_tilde)))
    check("c = c_tilde", np.max(np.abs(tab.c - tab.c_tilde)))
    check("dense-output endpoint B*(1) = b",
          np.max(np.abs(tab.bstar.sum(axis=1) - tab.b)))
    for k in range(1, tab.pstar + 1):
        for j in range(1, tab.pstar + 1):
            target = 1.0 / k if j == k else 0.0
            check(
                f"dense-output moment (j={j}, k={k})",
                tab.bstar[:, j - 1] @ tab.c ** (k - 1) - target,
            )
    for name, residual in _order_conditions(tab):
        check(name, residual)
    if failures:
        raise TableauError(f"{tab.name}: " + "; ".join(failures))


def _explicit_pair(name, order, a, b, c, pstar) -> IMEXTableau:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    return IMEXTableau(
        name=name, order=order, a=a, b=b, c=c,
        a_tilde=a.copy(), b_tilde=b.copy(), c_tilde=c.copy(),
        bstar=dense_output_matrix(c, b, pstar),
    )


def _make_rk2():
    return _explicit_pair(
        "rk2", 2,
        a=[[0.0, 0.0], [1.0, 0.0]],
        b=[0.5, 0.5],
        c=[0.0, 1.0],
        pstar=2,
    )


def _make_rk3():
    return _explicit_pair(
        "rk3", 3,
        a=[[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-1.0, 2.0, 0.0]],
        b=[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        c=[0.0, 0.5, 1.0],
        pstar=2,
    )


def _make_rk4():
    return _explicit_pair(
        "rk4", 4,
        a=[
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        b=[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        c=[0.0, 0.5, 0.5, 1.0],
        pstar=3,
    )


def _make_ark2():
    # Giraldo, Kelly & Constantinescu (2013): 3-stage, order 2,
    # gamma = 1 - 1/sqrt(2), shared weights b = (delta, delta, gamma).
    gam = 1.0 - 1.0 / sqrt(2.0)
    delta = 1.0 / (2.0 * sqrt(2.0))
    a32 = (3.0 + 2.0 * sqrt(2.0)) / 6.0
    a = np.array([
        [0.0, 0.0, 0.0],
        [2.0 * gam, 0.0, 0.0],
        [1.0 - a32, a32, 0.0],
    ])
    a_tilde = np.array([
        [0.0, 0.0, 0.0],
        [gam, gam, 0.0],
        [delta, delta, gam],
    ])
    b = np.array([delta, delta, gam])
    c = np.array([0.0, 2.0 * gam, 1.0])
    # published dense-output matrix (s = 3, p* = 2)
    bstar = np.array([
        [1.0 / sqrt(2.0), -1.0 / (2.0 * sqrt(2.0))],
        [1.0 / sqrt(2.0), -1.0 / (2.0 * sqrt(2.0))],
        [1.0 - sqrt(2.0), 1.0 / sqrt(2.0)],
    ])
    return IMEXTableau(
        name="ark2", order=2, a=a, b=b, c=c,
        a_tilde=a_tilde, b_tilde=b.copy(), c_tilde=c.copy(), bstar=bstar,
    )


def _make_ark3():
    # ARK3(2)4L[2]SA, Kennedy & Carpenter (2003): 4 stages, order 3,
    # stiffly accurate ESDIRK part with gamma = 1767732205903/4055673282236.
    gam = 1767732205903.0 / 4055673282236.0
    b = np.array([
        1471266399579.0 / 7840856788654.0,
        -4482444167858.0 / 7529755066697.0,
        11266239266428.0 / 11593286722821.0,
        gam,
    ])
    c = np.array([0.0, 2.0 * gam, 3.0 / 5.0, 1.0])
    a = np.zeros((4, 4))
    a[1, 0] = 2.0 * gam
    a[2, 0] = 5535828885825.0 / 10492691773637.0
    a[2, 1] = 788022342437.0 / 10882634858940.0
    a[3, 0] = 6485989280629.0 / 16251701735622.0
    a[3, 1] = -4246266847089.0 / 9704473918619.0
    a[3, 2] = 10755448449292.0 / 10357097424841.0
    a_tilde = np.zeros((4, 4))
    a_tilde[1, 0] = gam
    a_tilde[1, 1] = gam
    a_tilde[2, 0] = 2746238789719.0 / 10658868560708.0
    a_tilde[2, 1] = -640167445237.0 / 6845629431997.0
    a_tilde[2, 2] = gam
    a_tilde[3, :] = b
    return IMEXTableau(
        name="ark3", order=3, a=a, b=b, c=c,
        a_tilde=a_tilde, b_tilde=b.copy(), c_tilde=c.copy(),
        bstar=dense_output_matrix(c, b, pstar=2),
    )


def _make_ark4():
    # ARK4(3)6L[2]SA, Kennedy & Carpenter (2003): 6 stages, order 4,
    # stiffly accurate ESDIRK part with gamma = 1/4.
    b = np.array([
        82889.0 / 524892.0,
        0.0,
        15625.0 / 83664.0,
        69875.0 / 102672.0,
        -2260.0 / 8211.0,
        0.25,
    ])
    c = np.array([0.0, 0.5, 83.0 / 250.0, 31.0 / 50.0, 17.0 / 20.0, 1.0])
    a = np.zeros((6, 6))
    a[1, 0] = 0.5
    a[2, 0] = 13861.0 / 62500.0
    a[2, 1] = 6889.0 / 62500.0
    a[3, 0] = -116923316275.0 / 2393684061468.0
    a[3, 1] = -2731218467317.0 / 15368042101831.0
    a[3, 2] = 9408046702089.0 / 11113171139209.0
    a[4, 0] = -451086348788.0 / 2902428689909.0
    a[4, 1] = -2682348792572.0 / 7519795681897.0
    a[4, 2] = 12662868775082.0 / 11960479115383.0
    a[4, 3] = 3355817975965.0 / 11060851509271.0
    a[5, 0] = 647845179188.0 / 3216320057751.0
    a[5, 1] = 73281519250.0 / 8382639484533.0
    a[5, 2] = 552539513391.0 / 3454668386233.0
    a[5, 3] = 3354512671639.0 / 8306763924573.0
    a[5, 4] = 4040.0 / 17871.0
    a_tilde = np.zeros((6, 6))
    a_tilde[1, 0] = 0.25
    a_tilde[1, 1] = 0.25
    a_tilde[2, 0] = 8611.0 / 62500.0
    a_tilde[2, 1] = -1743.0 / 31250.0
    a_tilde[2, 2] = 0.25
    a_tilde[3, 0] = 5012029.0 / 34652500.0
    a_tilde[3, 1] = -654441.0 / 2922500.0
    a_tilde[3, 2] = 174375.0 / 388108.0
    a_tilde[3, 3] = 0.25
    a_tilde[4, 0] = 15267082809.0 / 155376265600.0
    a_tilde[4, 1] = -71443401.0 / 120774400.0
    a_tilde[4, 2] = 730878875.0 / 902184768.0
    a_tilde[4, 3] = 2285395.0 / 8070912.0
    a_tilde[4, 4] = 0.25
    a_tilde[5, :] = b
    return IMEXTableau(
        name="ark4", order=4, a=a, b=b, c=c,
        a_tilde=a_tilde, b_tilde=b.copy(), c_tilde=c.copy(),
        bstar=dense_output_matrix(c, b, pstar=3),
    )


_FACTORIES = {
    "rk2": _make_rk2,
    "rk3": _make_rk3,
    "rk4": _make_rk4,
    "ark2": _make_ark2,
    "ark3": _make_ark3,
    "ark4": _make_ark4,
}

_CACHE: dict = {}


def tableau_names():
    return tuple(_FACTORIES)


def tableau(name: str) -> IMEXTableau:
    """Return the validated tableau registered under ``name``."""
    key = name.lower()
    if key not in _FACTORIES:
        raise TableauError(
            f"unknown scheme {name!r}; available: {', '.join(_FACTORIES)}"
        )
    if key not in _CACHE:
        tab = _FACTORIES[key]()
        validate_tableau(tab)
        _CACHE[key] = tab
    return _CACHE[key]
