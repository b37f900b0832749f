"""Split-form metrics whose conformal factor inverts to a plane-affine function.

When 1/factor = m*u + n*v with constant nonzero slopes, the scaled geometry
admits closed forms: the scalar curvature part from a double plane gradient
of the weighted block, the mixed Ricci components from second block
derivatives, and a potential ansatz for the block that kills the aligned
Ricci components. The potential is then constrained by one scalar equation,
expressed here as a residual: the symmetrized plane gradient of an
auxiliary covector, which must vanish, or equivalently a generating scalar
that must be affine in the plane coordinates.

Everything closed-form is paired with direct recomputation on the scaled
metric; the direct route is the oracle throughout.
"""

from dataclasses import dataclass

import numpy as np

from . import conventions
from .conformal import ConformalSpec, hatted_curvature_direct
from .geometry import JetField, WalkerSpec, as_field, as_point
from .jets import MAX_ORDER, Jet

__all__ = [
    "HHData",
    "HHBlock",
    "RicciAlignment",
    "ScalarPair",
    "MixedRicciPair",
    "HHReport",
    "hh_walker_spec",
    "hh_metric",
    "ricci_alignment_residual",
    "scalar_hat",
    "phi_mixed",
    "x_vector",
    "sym_x_gradient",
    "hh_lagrangian",
    "hh_residual",
]

# plane derivatives carry a lower dyad index; their raised versions and the
# non-plane pair follow from the antisymmetric metric on dyad indices
def _dlo(j, a):
    return j.diff(0) if a == 0 else j.diff(1)


def _dup(j, a):
    return j.diff(1) if a == 0 else -j.diff(0)


def _plo(j, b):
    return -j.diff(3) if b == 0 else j.diff(2)


def _pup(j, b):
    return j.diff(2) if b == 0 else j.diff(3)


class HHData:
    """Inputs for the plane-affine family.

    m, n: slopes of the inverse conformal factor over the plane coordinates.
    theta: generating potential for the block (any coordinates).
    mu: leaf density coupled to the unscaled scalar curvature; must depend
        on the non-plane coordinates only.
    shat: constant target scalar curvature of the scaled metric.
    """

    def __init__(self, m, n, theta=0.0, mu=0.0, shat=0.0):
        self.m = float(m)
        self.n = float(n)
        if self.m * self.n == 0.0:
            raise ValueError("both plane slopes of the inverse factor must be nonzero")
        self.theta = as_field(theta)
        self.mu = as_field(mu)
        self.shat = float(shat)
        # exact skew pairing of the two frame covectors fixed by the slopes
        ku = self.k_upper
        if (ku[0] * self.j_upper[1] - ku[1] * self.j_upper[0]) + self.tau != 0.0:
            raise ValueError("frame covector pairing failed; slopes are inconsistent")

    @property
    def tau(self):
        return -2.0 * self.m * self.n

    @property
    def j_lower(self):
        return (self.m, self.n)

    @property
    def j_upper(self):
        return (self.n, -self.m)

    @property
    def k_lower(self):
        return (self.m, -self.n)

    @property
    def k_upper(self):
        return (-self.n, -self.m)

    def factor_spec(self) -> ConformalSpec:
        return ConformalSpec("1/(({0!r})*u + ({1!r})*v)".format(self.m, self.n))

    def inverse_factor(self, point) -> float:
        p = as_point(point)
        return self.m * p[0] + self.n * p[1]

    def _jets(self, point, order):
        """Coordinate, factor, potential, and density jets at one point."""
        p = as_point(point)
        u = Jet.variable("u", p[0], order)
        v = Jet.variable("v", p[1], order)
        w = self.m * u + self.n * v
        if abs(w.value) < 1e-12:
            raise ValueError("inverse factor vanishes at the base point")
        th = self.theta.jet(p, order)
        mu = self.mu.jet(p, order)
        bad = 0.0
        if order >= 1:
            bad = max(np.max(np.abs(mu.diff(0).coeffs)), np.max(np.abs(mu.diff(1).coeffs)))
        if bad > 1e-10 * (1.0 + abs(mu.value)):
            raise ValueError("leaf density must not depend on the plane coordinates")
        return u, v, w, 1.0 / w, th, mu


def _block(data: HHData, point, order):
    """Block jets of the potential ansatz, exact to the requested order."""
    k = order + 2
    if k > MAX_ORDER:
        raise ValueError(f"block order {order} needs potential jets beyond {MAX_ORDER}")
    u, v, w, om, th, mu = data._jets(point, k)
    om2 = om * om
    tau = data.tau
    coef = (12.0 * mu * (w * w * w) + data.shat) * (1.0 / (12.0 * tau * tau))

    def sym(a, b):
        return 0.5 * (_dup(om2 * _dup(th, b), a) + _dup(om2 * _dup(th, a), b))

    w3 = w * w * w
    a = w3 * sym(0, 0) + coef * (data.n * data.n)
    c = w3 * sym(0, 1) + coef * (data.m * data.n)
    b = w3 * sym(1, 1) + coef * (data.m * data.m)
    return a.truncate(order), b.truncate(order), c.truncate(order)


def hh_walker_spec(data: HHData) -> WalkerSpec:
    """Split-form metric generated by the potential ansatz."""
    return WalkerSpec(
        a=JetField(lambda p, o: _block(data, p, o)[0]),
        b=JetField(lambda p, o: _block(data, p, o)[1]),
        c=JetField(lambda p, o: _block(data, p, o)[2]),
    )


@dataclass(frozen=True)
class HHBlock:
    a: Jet
    b: Jet
    c: Jet
    alt_residual: float


def hh_metric(data: HHData, point, order=3) -> HHBlock:
    """Block jets at a point plus the mutual residual of the two expansions.

    The ansatz has a raised-index form (symmetrized raised plane gradient of
    the weighted potential gradient) and an expanded lowered-index form; both
    are computed and their disagreement reported.
    """
    a, b, c = _block(data, point, order)
    u, v, w, om, th, mu = data._jets(point, order + 2)
    tau = data.tau
    coef = (12.0 * mu * (w * w * w) + data.shat) * (1.0 / (12.0 * tau * tau))
    jl, kl = data.j_lower, data.k_lower
    omth = om * th
    low = [[None] * 2 for _ in range(2)]
    for i in range(2):
        for j in range(2):
            low[i][j] = (
                (w * w) * _dlo(_dlo(omth, j), i)
                - 2.0 * om * jl[i] * jl[j] * th
                + coef * kl[i] * kl[j]
            )
    alt = max(
        abs(a.value - low[1][1].value),
        abs(b.value - low[0][0].value),
        abs(c.value + low[0][1].value),
    )
    return HHBlock(a=a, b=b, c=c, alt_residual=alt)


@dataclass(frozen=True)
class RicciAlignment:
    """Plane-aligned Ricci components of a scaled split-form metric.

    plane: the three doubly plane-contracted components, computed from the
        log-factor formula (product of plane gradients minus plane second
        derivatives, times the factor).
    affine: second plane derivatives of the inverse factor; zero exactly
        when the plane components vanish.
    """

    plane: tuple
    affine: tuple

    @property
    def max_abs(self) -> float:
        return max(abs(t) for t in self.plane + self.affine)


def ricci_alignment_residual(cs: ConformalSpec, point, order=3) -> RicciAlignment:
    p = as_point(point)
    lnj = cs.log_jet(p, order)
    g0, g1 = lnj.diff(0).value, lnj.diff(1).value
    om = cs.value(p)
    plane = (
        om * (g0 * g0 - lnj.derivative((2, 0, 0, 0))),
        om * (g0 * g1 - lnj.derivative((1, 1, 0, 0))),
        om * (g1 * g1 - lnj.derivative((0, 2, 0, 0))),
    )
    inv = 1.0 / cs.jet(p, order)
    affine = (
        inv.derivative((2, 0, 0, 0)),
        inv.derivative((1, 1, 0, 0)),
        inv.derivative((0, 2, 0, 0)),
    )
    return RicciAlignment(plane=plane, affine=affine)


@dataclass(frozen=True)
class ScalarPair:
    formula: float
    direct: float


def scalar_hat(ws: WalkerSpec, data: HHData, point, order=4) -> ScalarPair:
    """Scalar curvature part of the scaled metric, closed form vs direct.

    The closed form is a double plane gradient of the block weighted by the
    factor cubed; it requires only second block derivatives.
    """
    p = as_point(point)
    aj, bj, cj = ws.block(p, max(order, 2))
    u = Jet.variable("u", p[0], max(order, 2))
    v = Jet.variable("v", p[1], max(order, 2))
    w = data.m * u + data.n * v
    if abs(w.value) < 1e-12:
        raise ValueError("inverse factor vanishes at the base point")
    om = 1.0 / w
    h3 = om * om * om
    ddh = (
        (h3 * aj).derivative((2, 0, 0, 0))
        + 2.0 * (h3 * cj).derivative((1, 1, 0, 0))
        + (h3 * bj).derivative((0, 2, 0, 0))
    )
    formula = -(w.value ** 5 / 24.0) * ddh
    direct = hatted_curvature_direct(ws, data.factor_spec(), p, order=order).lam
    return ScalarPair(formula=formula, direct=direct)


@dataclass(frozen=True)
class MixedRicciPair:
    formula: tuple
    direct: tuple


def phi_mixed(ws: WalkerSpec, data: HHData, point, order=4) -> MixedRicciPair:
    """Mixed-contraction Ricci components: block closed form vs direct.

    Components are ordered by unprimed pair (00, 01, 11) and measured in
    the scale-normalized frames of the degenerate plane.
    """
    p = as_point(point)
    aj, bj, cj = ws.block(p, 2)
    om = 1.0 / data.inverse_factor(p)
    m, n = data.m, data.n
    aU, aV = aj.derivative((1, 0, 0, 0)), aj.derivative((0, 1, 0, 0))
    bU, bV = bj.derivative((1, 0, 0, 0)), bj.derivative((0, 1, 0, 0))
    cU, cV = cj.derivative((1, 0, 0, 0)), cj.derivative((0, 1, 0, 0))
    f00 = -(om ** -2 / 4.0) * (
        cj.derivative((2, 0, 0, 0)) + bj.derivative((1, 1, 0, 0))
        - 2.0 * om * (m * cU + n * bU)
    )
    f11 = (om ** -2 / 4.0) * (
        aj.derivative((1, 1, 0, 0)) + cj.derivative((0, 2, 0, 0))
        - 2.0 * om * (m * aV + n * cV)
    )
    f01 = -(om ** -2 / 8.0) * (
        bj.derivative((0, 2, 0, 0)) - aj.derivative((2, 0, 0, 0))
        + 2.0 * om * ((aU - cV) * m + (cU - bV) * n)
    )
    hc = hatted_curvature_direct(ws, data.factor_spec(), p, order=order)
    direct = tuple(om ** -2 * hc.phi[r][1] for r in range(3))
    return MixedRicciPair(formula=(f00, f01, f11), direct=direct)


def x_vector(data: HHData, point, order=1, shifted=True):
    """Auxiliary covector whose symmetrized plane gradient is the residual.

    With `shifted` the density-gradient multiple of the plane position
    covector is included, making the covector an exact plane gradient of
    the generating scalar; without it the symmetrized gradient is the same.
    """
    k = order + 3
    u, v, w, om, th, mu = data._jets(point, k)
    a, b, c = _block(data, point, order + 1)
    om2 = om * om
    tau = data.tau
    ku, ju = data.k_upper, data.j_upper
    upper = [[a, c], [c, b]]
    lower = [[b, -c], [-c, a]]
    tk = data.m * u - data.n * v
    lup = [om2 * _dup(th, cc) + (mu * (1.0 / (tau * tau))) * tk * ku[cc] for cc in range(2)]
    llo = [-lup[1], lup[0]]
    tlo = [-v, u]
    kdmu = data.n * mu.diff(3) - data.m * mu.diff(2)
    out = []
    for bb in range(2):
        grad = None
        for cc in range(2):
            for dd in range(2):
                t = upper[cc][dd] * _dlo(lower[bb][cc], dd)
                grad = t if grad is None else grad + t
        div = _pup(lower[bb][0], 0) + _pup(lower[bb][1], 1)
        jdl = ju[0] * _plo(llo[bb], 0) + ju[1] * _plo(llo[bb], 1)
        xb = om2 * grad + 2.0 * (-om2 * div + jdl)
        if shifted:
            xb = xb - (1.0 / tau) * kdmu * tlo[bb]
        out.append(xb.truncate(order))
    return tuple(out)


def sym_x_gradient(data: HHData, point, shifted=True):
    """Symmetrized plane gradient of the auxiliary covector, pair order (00, 01, 11)."""
    x0, x1 = x_vector(data, point, order=1, shifted=shifted)
    return (
        x0.diff(0).value,
        0.5 * (x1.diff(0).value + x0.diff(1).value),
        x1.diff(1).value,
    )


def _lagrangian_jet(data: HHData, point, order):
    k = order + 2
    u, v, w, om, th, mu = data._jets(point, k)
    a, b, c = _block(data, point, order)
    om2 = om * om
    tau = data.tau
    ku, ju = data.k_upper, data.j_upper

    # the affine-parameter derivative, calibrated against the covector form
    def ddw(j):
        d = ku[0] * j.diff(0) + ku[1] * j.diff(1)
        if conventions.AFFINE_DERIV_NORMALIZED:
            d = d * (1.0 / tau)
        return conventions.AFFINE_DERIV_SIGN * d

    quad = om2 * (a * b - c * c)
    omth = om * th
    jd = ju[0] * omth.diff(0) + ju[1] * omth.diff(1)
    cross = jd * jd
    leaf = 2.0 * om * (-th.diff(1).diff(3) - th.diff(0).diff(2))
    dens = -mu * (w * w * w * w) * ddw(om * om2 * th)
    tk = data.m * u - data.n * v
    brack = (2.0 * w * ku[0] - tau * u) * (-mu.diff(3)) + (2.0 * w * ku[1] - tau * v) * mu.diff(2)
    dmu = (1.0 / (tau * tau)) * tk * brack
    scal = (data.shat / 6.0) * om2 * ddw(th)
    return quad + cross + leaf + dens + dmu + scal


def hh_lagrangian(data: HHData, point) -> float:
    """Generating scalar of the residual equation at one point."""
    return _lagrangian_jet(data, point, 0).value


@dataclass(frozen=True)
class HHReport:
    """Residual summary over a sample of points.

    max_second: worst second plane derivative of the generating scalar; the
        equation holds iff this vanishes.
    eta, constant: affine fit of the scalar over the sample (slope pair and
        offset), meaningful when max_second is small and the coefficients do
        not drift across leaves.
    fit_residual: worst deviation of the scalar from the fitted affine form.
    condition: condition number of the fit design matrix.
    curvature_residual: worst disagreement between the symmetrized-gradient
        closed form and direct curvature, over the checked subsample.
    solved: max_second below the requested tolerance.
    """

    max_second: float
    eta: tuple
    constant: float
    fit_residual: float
    condition: float
    curvature_residual: float
    solved: bool


def hh_residual(data: HHData, points, tol=1e-9, curvature_checks=3) -> HHReport:
    pts = [as_point(p) for p in points]
    if len(pts) < 6:
        raise ValueError("need at least six sample points")
    seconds = []
    values = []
    for p in pts:
        lj = _lagrangian_jet(data, p, 2)
        seconds.append(
            max(
                abs(lj.derivative((2, 0, 0, 0))),
                abs(lj.derivative((1, 1, 0, 0))),
                abs(lj.derivative((0, 2, 0, 0))),
            )
        )
        values.append(lj.value)
    design = np.array([[p[0], p[1], 1.0] for p in pts])
    rhs = np.array(values)
    if np.linalg.matrix_rank(design) < 3:
        raise ValueError("sample points are degenerate for the affine fit")
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    sv = np.linalg.svd(design, compute_uv=False)
    fit_res = float(np.max(np.abs(design @ sol - rhs)))
    worst_curv = 0.0
    for p in pts[: max(0, curvature_checks)]:
        om = 1.0 / data.inverse_factor(p)
        sym = sym_x_gradient(data, p)
        hc = hatted_curvature_direct(hh_walker_spec(data), data.factor_spec(), p, order=4)
        for r in range(3):
            diff = abs((om ** -6 / 4.0) * sym[r] - om ** -4 * hc.phi[r][2])
            worst_curv = max(worst_curv, diff)
    return HHReport(
        max_second=float(max(seconds)),
        eta=(float(sol[0]), float(sol[1])),
        constant=float(sol[2]),
        fit_residual=fit_res,
        condition=float(sv[0] / sv[-1]),
        curvature_residual=worst_curv,
        solved=bool(max(seconds) < tol),
    )
