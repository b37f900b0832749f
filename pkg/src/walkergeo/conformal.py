"""Conformal rescaling machinery for split-form metrics.

A positive factor multiplies the metric as its square. Frames respond
through a four-tuple of weights, one per dyad element; the two presets in
the conventions module keep the rescaled frames normalized. This module
computes the log-gradient of the factor in frame components, predicts the
rescaled named coefficient tables and curvature spinors in closed form,
recomputes both directly from the scaled metric for cross-checking,
decides whether the factor is constant along the null-plane leaves, and
rebuilds honest split-form coordinates for the scaled metric when it is.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exprlang import evaluate
from .geometry import (
    ConstField,
    ExprField,
    WalkerSpec,
    as_field,
    as_point,
    assemble_metric,
    box_scalar,
    christoffel,
    covariant_deriv_covector,
    JetField,
)
from .jets import Jet
from .spinor import (
    CurvatureSpinors,
    SpinCoefficientTables,
    WalkerFrames,
    _weight_tuple,
    curvature_spinors,
    dyad_values,
    metric_and_frames,
    raise_spinor,
    rescaled_connection,
    spin_coefficients,
    spin_connection,
)

__all__ = [
    "ConformalSpec",
    "RescaleWeights",
    "upsilon",
    "predicted_hatted_tables",
    "direct_hatted_tables",
    "hatted_curvature_predicted",
    "hatted_curvature_direct",
    "WalkerCriterion",
    "walker_criterion",
    "conformally_walker_residual",
    "BoxPiTerms",
    "box_pi_terms",
    "box_pi_identity_check",
    "RescaledChart",
    "rescaled_walker_chart",
]


class ConformalSpec:
    """Conformal factor to apply to a split-form metric.

    The factor must be strictly positive wherever jets are requested; the
    scale carried by each spinor family is the factor itself, with no
    leftover one-form freedom.
    """

    __slots__ = ("field",)

    def __init__(self, factor):
        self.field = as_field(factor)

    def jet(self, point, order: int) -> Jet:
        j = self.field.jet(as_point(point), order)
        if not j.value > 0.0:
            raise ValueError("conformal factor must be positive at the base point")
        return j

    def log_jet(self, point, order: int) -> Jet:
        return self.jet(point, order).ln()

    def value(self, point) -> float:
        return self.jet(point, 0).value

    def __repr__(self) -> str:
        return "ConformalSpec({!r})".format(self.field)


class RescaleWeights(NamedTuple):
    """Scale exponents for the four dyad elements (two per family)."""

    v0: float
    v1: float
    w0: float
    w1: float

    @classmethod
    def preset(cls, name: str) -> "RescaleWeights":
        return cls(*_weight_tuple(name))

    @property
    def sigma_power(self) -> float:
        # boost factor between the two unprimed elements
        return self.v0 - self.v1

    @property
    def sigma_tilde_power(self) -> float:
        return self.w0 - self.w1


def upsilon(cs: ConformalSpec, frames: WalkerFrames):
    """Log-gradient of the factor along the frame directions.

    Returns four jets in soldering order, i.e. the derivative of the log
    of the factor along each tetrad row in turn.
    """
    lj = cs.log_jet(frames.point, frames.order)
    d = [lj.diff(c) for c in range(4)]
    out = []
    for k in range(4):
        tot = frames.tetrad[k][0] * d[0]
        for c in range(1, 4):
            tot = tot + frames.tetrad[k][c] * d[c]
        out.append(tot)
    return tuple(out)


def predicted_hatted_tables(tables: SpinCoefficientTables, ups, weights,
                            omega_value: float) -> SpinCoefficientTables:
    """Closed-form rescaling law for the named coefficient tables.

    tables holds the unscaled named values, ups the four directional
    log-derivatives of the factor in soldering order, omega_value the
    factor at the point. Output entries are jets whose base values are
    the predictions; compare them against a direct recomputation on the
    scaled metric with the same weights.
    """
    v0, v1, w0, w1 = _weight_tuple(weights)
    om = float(omega_value)
    if not om > 0.0:
        raise ValueError("factor value must be positive")
    sig = om ** (v0 - v1)
    sigt = om ** (w0 - w1)
    # ups comes in soldering order; the grids mix the directions
    d0, d1, d2, d3 = ups
    u = tables.unprimed
    p = tables.primed
    pu = (om ** (w0 + v1), om ** (w0 + v1), om ** (v0 + w1), om ** (v0 + w1))
    pp = (om ** (v0 + w1), om ** (v0 + w1), om ** (w0 + v1), om ** (w0 + v1))

    unp = {
        "epsilon": pu[0] * ((u["epsilon"] + (v0 + 1) * d0) * sig),
        "kappa": pu[0] * (u["kappa"] * sig ** 2),
        "tau_prime": pu[0] * (u["tau_prime"] + d2),
        "gamma_prime": pu[0] * ((u["gamma_prime"] + v1 * d0) * sig),
        "alpha": pu[1] * (u["alpha"] + v0 * d2),
        "rho": pu[1] * ((u["rho"] + d0) * sig),
        "sigma_prime": pu[1] * (u["sigma_prime"] * (1.0 / sig)),
        "beta_prime": pu[1] * (u["beta_prime"] + (v1 + 1) * d2),
        "beta": pu[2] * (u["beta"] + (v0 + 1) * d1),
        "sigma": pu[2] * (u["sigma"] * sig),
        "rho_prime": pu[2] * ((u["rho_prime"] + d3) * (1.0 / sig)),
        "alpha_prime": pu[2] * (u["alpha_prime"] + v1 * d1),
        "gamma": pu[3] * ((u["gamma"] + v0 * d3) * (1.0 / sig)),
        "tau": pu[3] * (u["tau"] + d1),
        "kappa_prime": pu[3] * (u["kappa_prime"] * sig ** -2),
        "epsilon_prime": pu[3] * ((u["epsilon_prime"] + (v1 + 1) * d3) * (1.0 / sig)),
    }
    pri = {
        "epsilon_tilde": pp[0] * ((p["epsilon_tilde"] + (w0 + 1) * d0) * sigt),
        "kappa_tilde": pp[0] * (p["kappa_tilde"] * sigt ** 2),
        "tau_prime_tilde": pp[0] * (p["tau_prime_tilde"] + d1),
        "gamma_prime_tilde": pp[0] * ((p["gamma_prime_tilde"] + w1 * d0) * sigt),
        "alpha_tilde": pp[1] * (p["alpha_tilde"] + w0 * d1),
        "rho_tilde": pp[1] * ((p["rho_tilde"] + d0) * sigt),
        "sigma_prime_tilde": pp[1] * (p["sigma_prime_tilde"] * (1.0 / sigt)),
        "beta_prime_tilde": pp[1] * (p["beta_prime_tilde"] + (w1 + 1) * d1),
        "beta_tilde": pp[2] * (p["beta_tilde"] + (w0 + 1) * d2),
        "sigma_tilde": pp[2] * (p["sigma_tilde"] * sigt),
        "rho_prime_tilde": pp[2] * ((p["rho_prime_tilde"] + d3) * (1.0 / sigt)),
        "alpha_prime_tilde": pp[2] * (p["alpha_prime_tilde"] + w1 * d2),
        "gamma_tilde": pp[3] * ((p["gamma_tilde"] + w0 * d3) * (1.0 / sigt)),
        "tau_tilde": pp[3] * (p["tau_tilde"] + d2),
        "kappa_prime_tilde": pp[3] * (p["kappa_prime_tilde"] * sigt ** -2),
        "epsilon_prime_tilde": pp[3] * ((p["epsilon_prime_tilde"] + (w1 + 1) * d3)
                                        * (1.0 / sigt)),
    }
    return SpinCoefficientTables(unprimed=unp, primed=pri, order=tables.order)


def direct_hatted_tables(ws: WalkerSpec, cs: ConformalSpec, weights, point,
                         order: int = 3) -> SpinCoefficientTables:
    """Named tables of the scaled metric in the weight-rescaled frames."""
    return spin_coefficients(ws, point, order, omega=cs.field, weights=weights)


def hatted_curvature_predicted(curv: CurvatureSpinors, ws: WalkerSpec,
                               cs: ConformalSpec, point,
                               order: int = 4) -> CurvatureSpinors:
    """Rescaling law for the curvature spinors.

    Both quartic parts are untouched. The mixed part shifts by the
    symmetrized square-minus-derivative of the log-gradient, the scalar
    part by the wave operator of the factor. Everything is evaluated on
    the unscaled geometry.
    """
    m, frames = metric_and_frames(ws, point, order)
    wj = cs.jet(m.point, order)
    lj = wj.ln()
    ups = [lj.diff(c) for c in range(4)]
    nab = covariant_deriv_covector(christoffel(m), ups)
    uval = np.array([[(ups[a] * ups[b]).value for b in range(4)]
                     for a in range(4)])
    nval = np.array([[nab[a][b].value for b in range(4)] for a in range(4)])
    corr = dyad_values(frames, uval - nval).reshape(2, 2, 2, 2)
    pairs = ((0, 0), (0, 1), (1, 1))
    phi = tuple(
        tuple(
            curv.phi[r][c]
            + 0.5 * (corr[a, ap, b, bp] + corr[a, bp, b, ap])
            for c, (ap, bp) in enumerate(pairs)
        )
        for r, (a, b) in enumerate(pairs)
    )
    om = wj.value
    lam = om ** -2 * (curv.lam + 0.25 * box_scalar(m, wj) / om)
    return CurvatureSpinors(psi_minus=curv.psi_minus, psi_plus=curv.psi_plus,
                            phi=phi, lam=lam)


def hatted_curvature_direct(ws: WalkerSpec, cs: ConformalSpec, point,
                            order: int = 4) -> CurvatureSpinors:
    """Curvature spinors computed on the scaled metric itself."""
    m, frames = metric_and_frames(ws, point, order, omega=cs.field)
    return curvature_spinors(m, frames)


@dataclass(frozen=True)
class WalkerCriterion:
    is_walker: bool
    residual: float


def walker_criterion(cs: ConformalSpec, point, tol: float = 1e-9
                     ) -> WalkerCriterion:
    """Whether the scaled metric keeps the split form in these coordinates.

    Holds exactly when the factor is constant along the null-plane leaves,
    i.e. has no derivative along the first two coordinates.
    """
    lj = cs.log_jet(point, 1)
    residual = abs(lj.diff(0).value) + abs(lj.diff(1).value)
    return WalkerCriterion(is_walker=residual < tol, residual=residual)


def conformally_walker_residual(ws: WalkerSpec, cs: ConformalSpec, point,
                                order: int = 4) -> float:
    """Obstruction to rebuilding a split form from the scaled metric.

    The primed quartic contracted three times with the distinguished
    spinor must vanish; its two surviving components are returned as a
    max-abs residual. Zero (to tolerance) certifies that a flattening
    factor exists locally.
    """
    hc = hatted_curvature_direct(ws, cs, point, order=order)
    return max(abs(hc.psi_plus[0]), abs(hc.psi_plus[1]))


@dataclass(frozen=True)
class BoxPiTerms:
    """Two-component pieces of the wave identity for the plane spinor.

    lhs holds the distinguished spinor times the contracted wave operator
    of itself; scalar_part the coefficient-spinor contraction term;
    quartic_part the thrice-contracted primed quartic. The identity reads
    lhs = 2 * (scalar_part + quartic_part) componentwise.
    """

    lhs: tuple
    scalar_part: tuple
    quartic_part: tuple

    @property
    def residual(self) -> float:
        scale = 1.0
        worst = 0.0
        for k in range(2):
            rhs = 2.0 * (self.scalar_part[k] + self.quartic_part[k])
            worst = max(worst, abs(self.lhs[k] - rhs))
            scale = max(scale, abs(self.lhs[k]), abs(rhs))
        return worst / scale


def box_pi_terms(ws: WalkerSpec, cs: ConformalSpec, point,
                 order: int = 4) -> BoxPiTerms:
    """Evaluate the wave identity for the plane spinor on the scaled metric.

    All ingredients are computed in the normalized rescaled frames, whose
    first primed element serves as the distinguished spinor: its covariant
    derivative supplies the two coefficient spinors, and the wave operator
    is assembled from the rescaled connection plus the coordinate
    connection of the scaled metric.
    """
    if order < 3:
        raise ValueError("wave identity needs jets of order >= 3")
    m, frames = metric_and_frames(ws, point, order, omega=cs.field)
    conn = spin_connection(m, frames)
    weights = _weight_tuple("plane-up")
    v0, v1, w0, w1 = weights
    gh, ght = rescaled_connection(conn, frames, weights)

    lnj = frames.scale.ln()
    rowpows = [(v0, v1)[k >> 1] + (w0, w1)[k & 1] for k in range(4)]
    erows = []
    for k in range(4):
        rf = (lnj * rowpows[k]).exp()
        erows.append([rf * frames.tetrad[k][c] for c in range(4)])

    # derivative of the distinguished spinor: upper components (1, 0)
    grad_pi = [ght[c][0][1] for c in range(4)]
    omega_b = []
    eta_b = []
    for bb in range(2):
        tot = erows[2 * bb + 1][0] * grad_pi[0]
        eta = erows[2 * bb][0] * ght[0][0][0]
        for c in range(1, 4):
            tot = tot + erows[2 * bb + 1][c] * grad_pi[c]
            eta = eta + erows[2 * bb][c] * ght[c][0][0]
        omega_b.append(tot)
        eta_b.append(eta)
    eta_up = raise_spinor(eta_b)
    scalar = (eta_up[0] * omega_b[0] + eta_up[1] * omega_b[1]).value

    # wave operator on the lower components (0, 1)
    low = [[-ght[c][cp][1] for cp in range(2)] for c in range(4)]
    gam = christoffel(m)
    box = [0.0, 0.0]
    for cp in range(2):
        tot = 0.0
        for a in range(4):
            for b in range(4):
                hess = low[b][cp].diff(a).value
                corr = sum(gam[e][a][b].value * low[e][cp].value
                           for e in range(4))
                spin = sum(ght[a][cp][dp].value * low[b][dp].value
                           for dp in range(2))
                tot += m.ginv[a][b].value * (hess - corr - spin)
        box[cp] = tot
    lhs = (0.0, box[0])  # lower components of the spinor are (0, 1)

    hc = curvature_spinors(m, frames)
    om = frames.scale_value
    quartic = tuple(om ** ((4 - k) * w0 + k * w1) * hc.psi_plus[k]
                    for k in range(2))
    scalar_part = (0.0, scalar)
    return BoxPiTerms(lhs=lhs, scalar_part=scalar_part, quartic_part=quartic)


def box_pi_identity_check(ws: WalkerSpec, cs: ConformalSpec, point,
                          order: int = 4) -> float:
    """Scale-relative residual of the wave identity at the point."""
    return box_pi_terms(ws, cs, point, order=order).residual


# ---------------------------------------------------------------------------
# split-form coordinates for the scaled metric


@dataclass(frozen=True)
class RescaledChart:
    """Split-form chart data for a scaled metric.

    point is the image of source_point; w_hat the three block entries of
    the scaled metric there; spec evaluates those entries as fields of the
    new coordinates. The residuals compare the congruence-transformed
    metric against the expected block structure and the transformed
    second-pair covector frame against its closed form; frame_scales
    records the dyad rescalings tying the old frames to the new ones.
    """

    source_point: tuple
    point: tuple
    omega: float
    w_hat: tuple
    spec: WalkerSpec
    block_residual: float
    frame_residual: float
    frame_scales: dict


def _compose_field(field, env, order: int):
    # substitute jets for the coordinates inside a block expression
    if isinstance(field, ConstField):
        return field.jet((0.0, 0.0, 0.0, 0.0), order)
    if isinstance(field, ExprField):
        return evaluate(field.expr, env)
    raise ValueError("chart rebuild needs expression or constant block components")


def _plane_independent(j: Jet, tol: float) -> bool:
    du = float(np.max(np.abs(j.diff(0).coeffs)))
    dv = float(np.max(np.abs(j.diff(1).coeffs)))
    return du + dv <= tol * (1.0 + abs(j.value))


def rescaled_walker_chart(ws: WalkerSpec, cs: ConformalSpec, point,
                          order: int = 4, tol: float = 1e-8) -> RescaledChart:
    """Build split-form coordinates for the scaled metric.

    Requires the factor to be constant along the null-plane leaves. The
    first two coordinates are multiplied by the squared factor; the last
    two survive. The new block entries pick up corrections linear in the
    new plane coordinates, and the construction is verified numerically
    at the point by congruence-transforming the scaled metric.
    """
    point = as_point(point)
    wj = cs.jet(point, order)
    if not _plane_independent(wj, tol):
        raise ValueError("factor must be constant along the plane coordinates")

    u0, v0, x0, y0 = point
    om = wj.value
    wx = wj.diff(2).value
    wy = wj.diff(3).value
    uh0 = om ** 2 * u0
    vh0 = om ** 2 * v0
    target = (uh0, vh0, x0, y0)

    aj, bj, cj = ws.block(point, order)
    a0, b0, c0 = aj.value, bj.value, cj.value
    a_hat = om ** 2 * (a0 - 4.0 * om ** -3 * wx * uh0)
    c_hat = om ** 2 * (c0 - 2.0 * om ** -3 * (wx * vh0 + wy * uh0))
    b_hat = om ** 2 * (b0 - 4.0 * om ** -3 * wy * vh0)

    # congruence transform of the scaled metric by the printed jacobian
    m = assemble_metric(ws, point, order, omega=cs.field)
    G = m.value_matrix()
    J = np.array([
        [om ** -2, 0.0, -2.0 * om ** -3 * wx * uh0, -2.0 * om ** -3 * wy * uh0],
        [0.0, om ** -2, -2.0 * om ** -3 * wx * vh0, -2.0 * om ** -3 * wy * vh0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    T = J.T @ G @ J
    expected = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, a_hat, c_hat],
        [0.0, 1.0, c_hat, b_hat],
    ])
    block_residual = float(np.max(np.abs(T - expected)))

    # transformed second-pair covectors against their closed form
    mix = om * (wy * u0 - wx * v0)
    duh = np.array([om ** 2, 0.0, 2.0 * om * wx * u0, 2.0 * om * wy * u0])
    dvh = np.array([0.0, om ** 2, 2.0 * om * wx * v0, 2.0 * om * wy * v0])
    ex = np.array([0.0, 0.0, 1.0, 0.0])
    ey = np.array([0.0, 0.0, 0.0, 1.0])
    n_co = np.array([1.0, 0.0, a0 / 2.0, c0 / 2.0])
    m_co = np.array([0.0, -1.0, -c0 / 2.0, -b0 / 2.0])
    second_null = duh + (a_hat / 2.0) * ex + (c_hat / 2.0) * ey
    cross = -(dvh + (c_hat / 2.0) * ex + (b_hat / 2.0) * ey)
    frame_residual = float(max(
        np.max(np.abs(second_null - (om ** 2 * n_co + mix * ey))),
        np.max(np.abs(cross - (om ** 2 * m_co + mix * ex))),
    ))

    def block_jets(ph, jorder: int):
        # the factor loses one order to differentiation, so work one higher
        ph = as_point(ph)
        k = jorder + 1
        w = cs.jet((0.0, 0.0, ph[2], ph[3]), k)
        if not _plane_independent(w, tol):
            raise ValueError("factor must be constant along the plane coordinates")
        w2 = w * w
        uhj = Jet.variable("u", ph[0], k)
        vhj = Jet.variable("v", ph[1], k)
        env = {
            "u": uhj / w2,
            "v": vhj / w2,
            "x": Jet.variable("x", ph[2], k),
            "y": Jet.variable("y", ph[3], k),
        }
        av = _compose_field(ws.a, env, k)
        bv = _compose_field(ws.b, env, k)
        cv = _compose_field(ws.c, env, k)
        wxj = w.diff(2)
        wyj = w.diff(3)
        return (
            (w2 * av - 4.0 * (wxj / w) * uhj).truncate(jorder),
            (w2 * bv - 4.0 * (wyj / w) * vhj).truncate(jorder),
            (w2 * cv - 2.0 * ((wxj * vhj + wyj * uhj) / w)).truncate(jorder),
        )

    spec_hat = WalkerSpec(
        a=JetField(lambda p, o: block_jets(p, o)[0]),
        b=JetField(lambda p, o: block_jets(p, o)[1]),
        c=JetField(lambda p, o: block_jets(p, o)[2]),
    )

    frame_scales = {
        "alpha": om ** -0.5,
        "beta": om ** -0.5,
        "pi": om ** -1.5,
        "xi": om ** 0.5,
        "xi_mix": om ** -0.5 * (wy * u0 - wx * v0),
    }
    return RescaledChart(
        source_point=tuple(point),
        point=target,
        omega=om,
        w_hat=(a_hat, b_hat, c_hat),
        spec=spec_hat,
        block_residual=block_residual,
        frame_residual=frame_residual,
        frame_scales=frame_scales,
    )
