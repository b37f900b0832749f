"""Null-plane obstruction covector and the nested distribution checks.

When a split-form metric is conformally scaled, the distinguished primed
spinor stops being parallel; its covariant derivative contracts to a null
covector that factors through the spinor itself. This module extracts
that covector, the spinor coefficient in the factorization, and the
orthogonality and containment facts the scaled geometry guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import conventions
from .conformal import ConformalSpec, hatted_curvature_direct
from .geometry import WalkerSpec, as_point
from .jets import Jet
from .spinor import metric_and_frames, primed_covariant_deriv, spin_connection

__all__ = [
    "AlphaInvariants",
    "DistributionReport",
    "FactorOverlap",
    "s_vector",
    "distribution_report",
    "factor_overlap",
]

# inverse pairing of the reference tetrad rows (covector slots ell, m,
# mtilde, n); self-inverse
_PAIR = ((0, 3, 1.0), (3, 0, 1.0), (1, 2, -1.0), (2, 1, -1.0))


def _co_product(v, w, om_value: float) -> float:
    total = 0.0
    for j, k, s in _PAIR:
        total += s * v[j] * w[k]
    return total / om_value**2


@dataclass(frozen=True)
class AlphaInvariants:
    """Obstruction covector of a scaled split-form geometry at a point.

    s_covector holds reference-tetrad components; omega_a is normalized
    so its components equal factor^(-1/2) times the plane gradient of the
    factor, and gradient_residual records how well the independently
    computed gradient reproduces it. eta_b is the coefficient of the
    distinguished spinor inside its own covariant derivative; no closed
    form is pinned for it, only the factorization.
    """

    s_covector: tuple
    omega_a: tuple
    eta_b: tuple
    integrability_residual: float
    gradient_residual: float

    @property
    def max_s(self) -> float:
        return max(abs(t) for t in self.s_covector)


def s_vector(ws: WalkerSpec, cs: ConformalSpec, point, order: int = 3,
             tol: float = 1e-9) -> AlphaInvariants:
    """Covariant-derivative contraction of the distinguished spinor.

    Builds the scaled metric, differentiates the constant spinor with the
    scaled connection, and reads off the covector and its factorization.
    Raises when the covector fails to factor through the spinor, which
    the scaled split form never produces.
    """
    point = as_point(point)
    m, frames = metric_and_frames(ws, point, order, omega=cs.field)
    conn = spin_connection(m, frames)
    k = conn.order
    d1 = primed_covariant_deriv(conn, (Jet.const(1.0, k), Jet.const(0.0, k)))
    ev = frames.values()
    s_co = [d1[a][1].value for a in range(4)]
    s_tet = tuple(float(sum(ev[j][a] * s_co[a] for a in range(4)))
                  for j in range(4))
    eta = tuple(float(sum(ev[j][a] * d1[a][0].value for a in range(4)))
                for j in (0, 2))
    scale = 1.0 + max(abs(t) for t in s_tet)
    integ = max(abs(s_tet[0]), abs(s_tet[2]))
    if integ > tol * scale:
        raise ValueError(
            "obstruction covector does not factor through the "
            "distinguished spinor")

    om = cs.jet(point, 1)
    ov = om.value
    # extraction carries the calibrated factor power; renormalize to the
    # square-root gradient convention
    shift = 0.5 - conventions.SVECTOR_OMEGA_POWER - 1.0
    omega = (s_tet[1] * ov**shift, s_tet[3] * ov**shift)
    target = (om.diff(0).value * ov**-0.5, om.diff(1).value * ov**-0.5)
    grad_res = max(abs(omega[0] - target[0]), abs(omega[1] - target[1]))
    return AlphaInvariants(s_covector=s_tet, omega_a=omega, eta_b=eta,
                           integrability_residual=integ,
                           gradient_residual=grad_res)


@dataclass(frozen=True)
class DistributionReport:
    """Containment and orthogonality facts for the nested null planes.

    grad_product contracts the factor gradient with the obstruction
    vector (zero means the gradient stays inside the larger plane);
    null_residual is the self-pairing of the obstruction covector;
    span_residual measures the component of the obstruction vector
    outside the distinguished two-plane. The cited_* entries evaluate
    externally quoted curvature criteria as residuals without
    re-deriving them.
    """

    degenerate: bool
    grad_product: float
    null_residual: float
    span_residual: float
    aligned_alpha: bool
    aligned_beta: bool
    plane_derivatives: tuple
    cited_auto_parallel: float
    cited_h_integrability: float
    invariants: AlphaInvariants


def distribution_report(ws: WalkerSpec, cs: ConformalSpec, point,
                        order: int = 4, tol: float = 1e-9
                        ) -> DistributionReport:
    """Evaluate every plane-nesting check at one point."""
    point = as_point(point)
    inv = s_vector(ws, cs, point, order=max(order, 3), tol=tol)
    s = inv.s_covector
    om = cs.jet(point, 1)
    ov = om.value
    grad_co = [om.diff(a).value for a in range(4)]
    ev = metric_and_frames(ws, point, 1)[1].values()
    grad_tet = [float(sum(ev[j][a] * grad_co[a] for a in range(4)))
                for j in range(4)]
    grad_product = _co_product(grad_tet, s, ov)
    null_residual = abs(_co_product(s, s, ov))
    # raised obstruction vector in tetrad basis: (s3, -s2, -s1, s0)/ov^2;
    # containment in the distinguished plane kills the m and n slots
    span_residual = max(abs(s[2]), abs(s[0])) / ov**2

    w = inv.omega_a
    wscale = 1.0 + max(abs(w[0]), abs(w[1]))
    degenerate = max(abs(w[0]), abs(w[1])) < tol * wscale
    aligned_alpha = (not degenerate) and abs(w[0]) < tol * wscale
    aligned_beta = (not degenerate) and abs(w[1]) < tol * wscale

    hc = hatted_curvature_direct(ws, cs, point, order=max(order, 4))
    mat = ((hc.phi[0][0], hc.phi[1][0]), (hc.phi[1][0], hc.phi[2][0]))
    w_up = (w[1], -w[0])
    rows = [mat[a][0] * w_up[0] + mat[a][1] * w_up[1] for a in range(2)]
    cited_h = max(abs(rows[0]), abs(rows[1]))
    cited_auto = abs(rows[0] * w_up[0] + rows[1] * w_up[1])
    return DistributionReport(
        degenerate=degenerate,
        grad_product=grad_product,
        null_residual=null_residual,
        span_residual=span_residual,
        aligned_alpha=aligned_alpha,
        aligned_beta=aligned_beta,
        plane_derivatives=(om.diff(0).value, om.diff(1).value),
        cited_auto_parallel=cited_auto,
        cited_h_integrability=cited_h,
        invariants=inv)


@dataclass(frozen=True)
class FactorOverlap:
    """Comparison of two conformal factors scaling the same split form."""

    ratio_residual: float
    omega_relation_residual: float

    @property
    def consistent(self) -> bool:
        return max(self.ratio_residual, self.omega_relation_residual) < 1e-9


def factor_overlap(ws: WalkerSpec, base: ConformalSpec, other: ConformalSpec,
                   point, order: int = 3) -> FactorOverlap:
    """Check that two factors differ by a leaf-constant multiple.

    The plane gradient of the log ratio vanishes exactly when the ratio
    is constant on the null-plane leaves; the obstruction spinors then
    differ by the square root of the ratio.
    """
    point = as_point(point)
    lb = base.log_jet(point, 1)
    lo = other.log_jet(point, 1)
    ratio_res = max(abs(lo.diff(0).value - lb.diff(0).value),
                    abs(lo.diff(1).value - lb.diff(1).value))
    wb = s_vector(ws, base, point, order=order).omega_a
    wo = s_vector(ws, other, point, order=order).omega_a
    root = (other.value(point) / base.value(point)) ** 0.5
    rel_res = max(abs(wo[0] - root * wb[0]), abs(wo[1] - root * wb[1]))
    return FactorOverlap(ratio_residual=ratio_res,
                         omega_relation_residual=rel_res)
