"""Change of split-form chart: block transform, frame maps, operator laws.

An oriented change of split-form coordinates has a block-triangular
Jacobian: a 2x2 block coupling the fiber pair, an arbitrary 2x2 coupling
block, and the inverse transpose on the base pair. Everything downstream
(the transformed metric block, the induced frame maps, the derivative
operator laws, and the affine-slope transport) is determined by those two
matrices, and this module verifies each printed law numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import conventions
from .geometry import JetField, WalkerSpec, as_field, as_point
from .jets import Jet
from .spinor import pair_commutator_residual

__all__ = [
    "ChartTransform",
    "TransformedBlock",
    "FrameRelation",
    "OperatorCheck",
    "AffineSlopes",
    "transform_metric_check",
    "derived_spec",
    "frame_relation",
    "operator_transform_check",
    "affine_slope_transform",
    "commutation_after_transform",
]


def _mat2(entries):
    rows = tuple(tuple(as_field(entries[i][j]) for j in range(2))
                 for i in range(2))
    return rows


class ChartTransform:
    """The two matrix blocks of an oriented split-form chart change.

    d and e are 2x2 nests of expressions or constants written with the
    standard four variable names, read as the target chart's coordinates.
    d must have positive determinant on the working domain; e is free.
    """

    __slots__ = ("d", "e")

    def __init__(self, d, e=None):
        if e is None:
            e = ((0.0, 0.0), (0.0, 0.0))
        self.d = _mat2(d)
        self.e = _mat2(e)

    @classmethod
    def from_flat(cls, d_entries, e_entries=None):
        """Build from row-major length-4 sequences (scenario file form)."""
        d = ((d_entries[0], d_entries[1]), (d_entries[2], d_entries[3]))
        e = None
        if e_entries is not None:
            e = ((e_entries[0], e_entries[1]), (e_entries[2], e_entries[3]))
        return cls(d, e)

    def jets(self, point, order: int):
        point = as_point(point)
        dj = [[self.d[i][j].jet(point, order) for j in range(2)]
              for i in range(2)]
        ej = [[self.e[i][j].jet(point, order) for j in range(2)]
              for i in range(2)]
        return dj, ej

    def values(self, point):
        dj, ej = self.jets(point, 0)
        dv = [[dj[i][j].value for j in range(2)] for i in range(2)]
        ev = [[ej[i][j].value for j in range(2)] for i in range(2)]
        return dv, ev

    def root(self, point) -> float:
        """Signed square root of det(d), on the recorded sign branch."""
        dv, _ = self.values(point)
        det = dv[0][0] * dv[1][1] - dv[0][1] * dv[1][0]
        if not det > 0.0:
            raise ValueError("chart change needs positive block determinant")
        return conventions.CHI_SIGN_BRANCH * math.sqrt(det)


def _matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(2)),
                 start=Jet.const(0.0, _order_of(a, b)))
             for j in range(2)] for i in range(2)]


def _order_of(a, b):
    probe = a[0][0] if isinstance(a[0][0], Jet) else b[0][0]
    return probe.order


def _transpose(a):
    return [[a[j][i] for j in range(2)] for i in range(2)]


def _inv2(a):
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if not det.value > 0.0:
        raise ValueError("chart change needs positive block determinant")
    idet = 1.0 / det
    return [[a[1][1] * idet, a[0][1] * -idet],
            [a[1][0] * -idet, a[0][0] * idet]]


def _block_transform(ws: WalkerSpec, ct: ChartTransform, point, order: int):
    point = as_point(point)
    dj, ej = ct.jets(point, order)
    aj, bj, cj = ws.block(point, order)
    w = [[aj, cj], [cj, bj]]
    dinv = _inv2(dj)
    dinv_t = _transpose(dinv)
    part = _matmul(_transpose(ej), dinv_t)
    mid = _matmul(dinv, ej)
    tail = _matmul(_matmul(dinv, w), dinv_t)
    wc = [[part[i][j] + mid[i][j] + tail[i][j] for j in range(2)]
          for i in range(2)]
    return dj, ej, dinv, w, wc


@dataclass(frozen=True)
class TransformedBlock:
    """Transformed metric block and its congruence residual."""

    a: Jet
    b: Jet
    c: Jet
    congruence_residual: float


def transform_metric_check(ws: WalkerSpec, ct: ChartTransform, point,
                           order: int = 2) -> TransformedBlock:
    """Transform the block and confirm the full metric congruence.

    The transformed block comes from the closed 2x2 formula; the check
    conjugates the whole 4x4 split form by the assembled Jacobian and
    compares against the split form built from the transformed block.
    """
    dj, ej, dinv, w, wc = _block_transform(ws, ct, point, order)
    k = dj[0][0].order
    zero = Jet.const(0.0, k)
    one = Jet.const(1.0, k)
    dt_inv = _transpose(dinv)
    jac = [[dj[0][0], dj[0][1], ej[0][0], ej[0][1]],
           [dj[1][0], dj[1][1], ej[1][0], ej[1][1]],
           [zero, zero, dt_inv[0][0], dt_inv[0][1]],
           [zero, zero, dt_inv[1][0], dt_inv[1][1]]]
    g = [[zero, zero, one, zero],
         [zero, zero, zero, one],
         [one, zero, w[0][0], w[0][1]],
         [zero, one, w[1][0], w[1][1]]]
    gc = [[zero, zero, one, zero],
          [zero, zero, zero, one],
          [one, zero, wc[0][0], wc[0][1]],
          [zero, one, wc[1][0], wc[1][1]]]
    resid = 0.0
    for i in range(4):
        for j in range(4):
            lhs = sum((jac[p][i] * g[p][q] * jac[q][j]
                       for p in range(4) for q in range(4)),
                      start=zero)
            resid = max(resid, abs(lhs.value - gc[i][j].value))
    return TransformedBlock(a=wc[0][0], b=wc[1][1], c=wc[0][1],
                            congruence_residual=resid)


def derived_spec(ws: WalkerSpec, ct: ChartTransform) -> WalkerSpec:
    """Walker spec whose block is the transformed one, jet-evaluable."""

    def entry(i, j):
        def fn(point, order):
            return _block_transform(ws, ct, point, order)[4][i][j]
        return JetField(fn)

    return WalkerSpec(a=entry(0, 0), b=entry(1, 1), c=entry(0, 1))


@dataclass(frozen=True)
class FrameRelation:
    """Frame maps induced by a chart change at a point.

    mixing is the off-diagonal entry coupling the primed frame pair; the
    two printed cross-term expressions for it must agree, which is the
    off-diagonal part of the block transform law.
    """

    root: float
    mixing: float
    mixing_gap: float
    frame_map: tuple
    primed_frame_map: tuple

    @property
    def det_residual(self) -> float:
        fm, pm = self.frame_map, self.primed_frame_map
        d1 = fm[0][0] * fm[1][1] - fm[0][1] * fm[1][0]
        d2 = pm[0][0] * pm[1][1] - pm[0][1] * pm[1][0]
        return max(abs(d1 - 1.0), abs(d2 - 1.0))


def _mixing_lines(ct: ChartTransform, ws: WalkerSpec, check_c: float, point):
    dv, ev = ct.values(point)
    root = ct.root(point)
    aj, bj, cj = ws.block(as_point(point), 0)
    a, b, c = aj.value, bj.value, cj.value
    det = root * root
    cross = ((dv[0][0] * dv[1][1] + dv[1][0] * dv[0][1]) * c
             - dv[0][0] * dv[0][1] * b - dv[1][1] * dv[1][0] * a)
    line1 = (cross / (2.0 * det) - det * check_c / 2.0
             + dv[0][0] * ev[1][0] - dv[1][0] * ev[0][0])
    line2 = (det * check_c / 2.0 - cross / (2.0 * det)
             + dv[0][1] * ev[1][1] - dv[1][1] * ev[0][1])
    return root, dv, line1, line2


def frame_relation(ct: ChartTransform, ws: WalkerSpec, check: WalkerSpec,
                   point, tol: float = 1e-9) -> FrameRelation:
    """Evaluate the induced frame maps, cross-validating the mixing term.

    check supplies the transformed block; its off-diagonal entry feeds
    both printed expressions for the mixing term, and a disagreement
    beyond tol means the two block specs are inconsistent.
    """
    point = as_point(point)
    check_c = check.block(point, 0)[2].value
    root, dv, line1, line2 = _mixing_lines(ct, ws, check_c, point)
    gap = abs(line1 - line2)
    scale = 1.0 + abs(line1) + abs(line2)
    if gap > tol * scale:
        raise ValueError(
            "mixing-term expressions disagree; the supplied blocks are "
            "not related by this chart change")
    mixing = 0.5 * (line1 + line2)
    inv_root = 1.0 / root
    frame_map = tuple(tuple(dv[i][j] * inv_root for j in range(2))
                      for i in range(2))
    primed = ((root, mixing * inv_root), (0.0, inv_root))
    return FrameRelation(root=root, mixing=mixing, mixing_gap=gap,
                         frame_map=frame_map, primed_frame_map=primed)


@dataclass(frozen=True)
class OperatorCheck:
    """Residuals of the derivative-operator transformation laws."""

    plane_residual: float
    transverse_residual: float


def operator_transform_check(ct: ChartTransform, ws: WalkerSpec, f, point,
                             order: int = 2) -> OperatorCheck:
    """Apply both charts' intrinsic operators to a test function.

    The function is given in the source chart; its target-chart partials
    come from the Jacobian, the target block from the transform law, and
    the mixing term from the frame relation. The plane operators must
    match through the d block alone; the transverse pair shifts by the
    mixing times the plane derivative and then mixes through the d block
    over its determinant (the frame map carries the free index, which
    the compressed one-line form of the law leaves implicit).
    """
    point = as_point(point)
    fj = as_field(f).jet(point, order)
    fu, fv = fj.diff(0).value, fj.diff(1).value
    fx, fy = fj.diff(2).value, fj.diff(3).value
    dj, ej, dinv, w, wc = _block_transform(ws, ct, point, 0)
    dv = [[dj[i][j].value for j in range(2)] for i in range(2)]
    ev = [[ej[i][j].value for j in range(2)] for i in range(2)]
    tv = [[dinv[j][i].value for j in range(2)] for i in range(2)]
    a, c = w[0][0].value, w[0][1].value
    b = w[1][1].value
    ac, cc = wc[0][0].value, wc[0][1].value
    bc = wc[1][1].value

    # target-chart partials of the composed function
    fp = fu * dv[0][0] + fv * dv[1][0]
    fq = fu * dv[0][1] + fv * dv[1][1]
    fr = fu * ev[0][0] + fv * ev[1][0] + fx * tv[0][0] + fy * tv[1][0]
    fs = fu * ev[0][1] + fv * ev[1][1] + fx * tv[0][1] + fy * tv[1][1]

    root, _, line1, line2 = _mixing_lines(ct, ws, cc, point)
    mixing = 0.5 * (line1 + line2)

    plane_res = max(abs(fp - (dv[0][0] * fu + dv[1][0] * fv)),
                    abs(fq - (dv[0][1] * fu + dv[1][1] * fv)))

    # transverse pair in each chart, then the printed relation
    sig0 = 0.5 * c * fu + 0.5 * b * fv - fy
    sig1 = -0.5 * a * fu - 0.5 * c * fv + fx
    sig0_t = 0.5 * cc * fp + 0.5 * bc * fq - fs
    sig1_t = -0.5 * ac * fp - 0.5 * cc * fq + fr
    shifted = (sig0 + mixing * fu, sig1 + mixing * fv)
    det = root * root
    want0 = (dv[0][0] * shifted[0] + dv[1][0] * shifted[1]) / det
    want1 = (dv[0][1] * shifted[0] + dv[1][1] * shifted[1]) / det
    trans_res = max(abs(sig0_t - want0), abs(sig1_t - want1))
    return OperatorCheck(plane_residual=plane_res,
                         transverse_residual=trans_res)


@dataclass(frozen=True)
class AffineSlopes:
    """Transport of affine-factor slopes across a chart change."""

    slopes: tuple
    kernel_residual: float


def affine_slope_transform(ct: ChartTransform, slopes, point
                           ) -> AffineSlopes:
    """Push a pair of affine slopes through the chart change.

    The transposed d block carries the slope covector; the transposed e
    block must annihilate it for the affine form to survive.
    """
    m, n = float(slopes[0]), float(slopes[1])
    dv, ev = ct.values(point)
    out = (dv[0][0] * m + dv[1][0] * n, dv[0][1] * m + dv[1][1] * n)
    kernel = max(abs(ev[0][0] * m + ev[1][0] * n),
                 abs(ev[0][1] * m + ev[1][1] * n))
    return AffineSlopes(slopes=out, kernel_residual=kernel)


def commutation_after_transform(ws: WalkerSpec, ct: ChartTransform, f,
                                point, order: int = 3) -> float:
    """Symmetrized commutation residual rerun on the transformed block."""
    return pair_commutator_residual(derived_spec(ws, ct), f, point,
                                    order=order)
