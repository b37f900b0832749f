"""Pointwise tensor calculus for split-form neutral metrics, over jets.

Coordinates are always (u, v, x, y), mapped to indices 0..3.  The metric
family handled here has the block shape

        [ 0   0   1   0 ]
    g = [ 0   0   0   1 ]          W = [ a  c ]
        [ 1   0   a   c ]              [ c  b ]
        [ 0   1   c   b ]

optionally multiplied by the square of a positive conformal factor.  The
functions a, b, c and the factor are scalar fields given as expression
strings, parsed ASTs, plain numbers, or jet-producing callables.

Everything is evaluated at one base point as truncated Taylor data, so
curvature components come out exact up to floating-point rounding; there
is no symbolic algebra and no finite differencing anywhere in this path.
Derived objects track how many derivative orders remain valid and raise
InsufficientOrderError rather than silently degrade.

Sign conventions (fixed once, here):

    Gamma^a_bc = (1/2) g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    R^a_bcd    = d_c Gamma^a_db - d_d Gamma^a_cb
                 + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    R_bd       = R^a_bad ,   S = g^bd R_bd

With these choices a pure split-form metric satisfies the operational pin

    S = a_uu + b_vv + 2 c_uv        at every point,

which the test suite enforces.  The trace normalization S/(-24) is
exposed alongside S because the spinor decomposition is built on it.
"""

from __future__ import annotations

import itertools
import typing
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .exprlang import Expr, parse, to_str
from .jets import InsufficientOrderError, Jet, jet_matrix_inverse, lift

_EXPR_NODES = typing.get_args(Expr)


class Point(NamedTuple):
    u: float
    v: float
    x: float
    y: float


def as_point(p: Sequence[float]) -> Point:
    q = Point(*(float(t) for t in p))
    if not all(np.isfinite(q)):
        raise ValueError("point coordinates must be finite")
    return q


# ---------------------------------------------------------------------------
# scalar fields

class ExprField:
    """Scalar field defined by an expression in the coordinates."""

    __slots__ = ("expr", "source")

    def __init__(self, source: Union[str, Expr]):
        if isinstance(source, str):
            self.source = source
            self.expr = parse(source)
        else:
            self.expr = source
            self.source = to_str(source)

    def jet(self, point: Sequence[float], order: int) -> Jet:
        return lift(self.expr, point, order)

    def __repr__(self) -> str:
        return "ExprField({!r})".format(self.source)


class ConstField:
    """Scalar field with one constant value."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def jet(self, point: Sequence[float], order: int) -> Jet:
        return Jet.const(self.value, order)

    def __repr__(self) -> str:
        return "ConstField({!r})".format(self.value)


class JetField:
    """Scalar field backed by a callable (point, order) -> Jet.

    Escape hatch for components produced by other computations (say a
    metric block rebuilt from a potential) rather than written down in
    closed form.
    """

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[[Sequence[float], int], Jet]):
        self.fn = fn

    def jet(self, point: Sequence[float], order: int) -> Jet:
        j = self.fn(point, order)
        if not isinstance(j, Jet):
            raise TypeError("field callable must return a Jet")
        return j


ScalarField = Union[ExprField, ConstField, JetField]


def as_field(obj) -> ScalarField:
    """Coerce a string/AST, number, or callable into a scalar field."""
    if isinstance(obj, (ExprField, ConstField, JetField)):
        return obj
    if isinstance(obj, (str, *_EXPR_NODES)):
        return ExprField(obj)
    if isinstance(obj, (int, float)):
        return ConstField(obj)
    if callable(obj):
        return JetField(obj)
    raise TypeError("cannot interpret {!r} as a scalar field".format(obj))


# ---------------------------------------------------------------------------
# metric assembly

class WalkerSpec:
    """The three entries of the symmetric 2x2 block W = [[a, c], [c, b]]."""

    __slots__ = ("a", "b", "c")

    def __init__(self, a=0.0, b=0.0, c=0.0):
        self.a = as_field(a)
        self.b = as_field(b)
        self.c = as_field(c)

    def block(self, point: Sequence[float], order: int):
        """Jets of (a, b, c) at the point."""
        return (self.a.jet(point, order),
                self.b.jet(point, order),
                self.c.jet(point, order))

    def __repr__(self) -> str:
        return "WalkerSpec(a={!r}, b={!r}, c={!r})".format(self.a, self.b, self.c)


def jet_det(mat) -> Jet:
    """Determinant of a small square matrix of jets (permanent-style expansion)."""
    n = len(mat)
    total = None
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = mat[0][perm[0]]
        for i in range(1, n):
            term = term * mat[i][perm[i]]
        if inv % 2:
            term = -term
        total = term if total is None else total + term
    return total


class MetricJet:
    """Metric components at one base point, held to a fixed jet order.

    Attributes:
        point: base point,
        order: jet order of every stored component,
        g:     4x4 nested list of Jets, lower indices, symmetric,
        ginv:  4x4 nested list of Jets, upper indices,
        detg:  Jet of det(g),
        block: (a, b, c) jets of the split block when assembled from a
               WalkerSpec, else None,
        conformal: Jet of the conformal factor (the factor itself, not its
               square) when one was applied, else None.
    """

    def __init__(self, g, point, block=None, conformal=None):
        self.point = as_point(point)
        self.g = g
        self.order = min(g[i][j].order for i in range(4) for j in range(4))
        self.ginv = jet_matrix_inverse(g)
        self.detg = jet_det(g)
        self.block = block
        self.conformal = conformal

    @classmethod
    def from_components(cls, g, point) -> "MetricJet":
        """Wrap an arbitrary symmetric 4x4 matrix of jets as a metric."""
        return cls(g, point)

    def value_matrix(self) -> np.ndarray:
        return np.array([[self.g[i][j].value for j in range(4)] for i in range(4)])

    def signature(self):
        """(positive, negative) eigenvalue counts of g at the base point."""
        ev = np.linalg.eigvalsh(self.value_matrix())
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def assemble_metric(ws: WalkerSpec, point, order: int, omega=None) -> MetricJet:
    """Build the split-form metric (times omega^2 when given) at a point.

    omega may be anything as_field accepts; it must be positive at the
    point.  The returned MetricJet keeps the block jets and the omega jet
    so frame constructions downstream can reuse them.
    """
    point = as_point(point)
    aj, bj, cj = ws.block(point, order)
    one = Jet.const(1.0, order)
    zero = Jet.const(0.0, order)
    g = [[zero, zero, one, zero],
         [zero, zero, zero, one],
         [one, zero, aj, cj],
         [zero, one, cj, bj]]
    wj = None
    if omega is not None:
        wj = as_field(omega).jet(point, order)
        if not wj.value > 0.0:
            raise ValueError("conformal factor must be positive at the base point")
        w2 = wj * wj
        g = [[w2 * g[i][j] for j in range(4)] for i in range(4)]
    return MetricJet(g, point, block=(aj, bj, cj), conformal=wj)


# ---------------------------------------------------------------------------
# connection and curvature

def christoffel(m: MetricJet):
    """Levi-Civita connection coefficients Gamma[a][b][c] = Gamma^a_bc.

    Output jets sit at order m.order - 1.
    """
    if m.order < 1:
        raise InsufficientOrderError("christoffel needs metric jets of order >= 1")
    g, ginv = m.g, m.ginv
    # d[i][j][k] = d_k g_ij
    d = [[[g[i][j].diff(k) for k in range(4)] for j in range(4)] for i in range(4)]
    gam = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for b in range(4):
        for c in range(b, 4):
            low = [d[e][c][b] + d[e][b][c] - d[b][c][e] for e in range(4)]
            for a in range(4):
                s = ginv[a][0] * low[0]
                for e in range(1, 4):
                    s = s + ginv[a][e] * low[e]
                s = s * 0.5
                gam[a][b][c] = s
                gam[a][c][b] = s
    return gam


@dataclass
class CurvatureJets:
    """Curvature data at a point; all jets share one order.

    riemann[a][b][c][d]      = R^a_bcd
    riemann_lower[a][b][c][d] = R_abcd = g_ae R^e_bcd
    ricci[b][d]              = R_bd
    scalar                   = S
    phi_lower[a][b]          = (R_ab - (S/4) g_ab)/2   (trace-free part, halved)
    lam                      = -S/24
    """

    riemann: list
    riemann_lower: list
    ricci: list
    scalar: Jet
    phi_lower: list
    order: int

    @property
    def lam(self) -> Jet:
        return self.scalar * (-1.0 / 24.0)


def riemann_ricci(m: MetricJet) -> CurvatureJets:
    """Riemann, Ricci, scalar curvature and friends at m's base point.

    Output jets sit at order m.order - 2.
    """
    if m.order < 2:
        raise InsufficientOrderError("riemann_ricci needs metric jets of order >= 2")
    gam = christoffel(m)
    out_order = m.order - 2
    zero = Jet.const(0.0, out_order)
    # dgam[k][a][b][c] = d_k Gamma^a_bc
    dgam = [[[[gam[a][b][c].diff(k) for c in range(4)] for b in range(4)]
             for a in range(4)] for k in range(4)]
    R = [[[[zero] * 4 for _ in range(4)] for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for dd in range(c + 1, 4):
                    term = dgam[c][a][dd][b] - dgam[dd][a][c][b]
                    for e in range(4):
                        term = term + gam[a][c][e] * gam[e][dd][b]
                        term = term - gam[a][dd][e] * gam[e][c][b]
                    R[a][b][c][dd] = term
                    R[a][b][dd][c] = -term
    ricci = [[None] * 4 for _ in range(4)]
    for b in range(4):
        for dd in range(4):
            s = R[0][b][0][dd]
            for a in range(1, 4):
                s = s + R[a][b][a][dd]
            ricci[b][dd] = s
    scalar = None
    for b in range(4):
        for dd in range(4):
            term = m.ginv[b][dd] * ricci[b][dd]
            scalar = term if scalar is None else scalar + term
    lower = [[[[None] * 4 for _ in range(4)] for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for dd in range(4):
                    s = m.g[a][0] * R[0][b][c][dd]
                    for e in range(1, 4):
                        s = s + m.g[a][e] * R[e][b][c][dd]
                    lower[a][b][c][dd] = s
    phi = [[None] * 4 for _ in range(4)]
    quarter_s = scalar * 0.25
    for a in range(4):
        for b in range(4):
            phi[a][b] = (ricci[a][b] - quarter_s * m.g[a][b]) * 0.5
    return CurvatureJets(riemann=R, riemann_lower=lower, ricci=ricci,
                         scalar=scalar, phi_lower=phi, order=out_order)


def box_scalar(m: MetricJet, f: Jet) -> float:
    """Wave operator g^ab (d_a d_b f - Gamma^c_ab d_c f) at the base point.

    f must be a jet lifted at the same point as m, order >= 2.
    """
    if f.order < 2:
        raise InsufficientOrderError("box_scalar needs f of order >= 2")
    if m.order < 1:
        raise InsufficientOrderError("box_scalar needs metric jets of order >= 1")
    gam = christoffel(m)
    df = [f.diff(a) for a in range(4)]
    total = 0.0
    for a in range(4):
        for b in range(4):
            hess = df[a].diff(b).value
            corr = sum(gam[c][a][b].value * df[c].value for c in range(4))
            total += m.ginv[a][b].value * (hess - corr)
    return total


def covariant_deriv_covector(gam, w):
    """nabla_a w_b for a covector of jets w, given Christoffel jets.

    Output[a][b] sits at min(gam order, w order - 1).
    """
    out = [[None] * 4 for _ in range(4)]
    for a in range(4):
        for b in range(4):
            s = w[b].diff(a)
            for c in range(4):
                s = s - gam[c][a][b] * w[c]
            out[a][b] = s
    return out
