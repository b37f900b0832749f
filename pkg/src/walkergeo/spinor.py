"""Null frames, two-spinor conversions, and dyad-level curvature data.

The split-form chart carries a canonical null tetrad whose first and third
vectors span the distinguished parallel null plane. Soldering labels follow
k = 2A + A' over the dyad pair (A, A'), so the tetrad rows sit in the order
(first null, cross, second null, transverse) and the same row order is used
for every directional table in this module.

Spinor components are always taken relative to the fixed reference dyads
alpha = (1,0), beta = (0,1) (unprimed) and pi = (1,0), xi = (0,1) (primed),
with eps_{01} = +1 and the lowering/raising conventions of the conventions
module. Rescaled metrics keep the same reference dyads; the scale enters
only through explicit factors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import conventions
from .geometry import (
    MetricJet,
    WalkerSpec,
    as_field,
    assemble_metric,
    christoffel,
    riemann_ricci,
)
from .jets import Jet, jet_matrix_inverse

_EPS = np.array(conventions.EPSILON)  # same matrix for upper and lower


def lower_spinor(up: Sequence[float]) -> tuple[float, float]:
    # xi_A = xi^B eps_{BA}
    return (
        up[0] * conventions.EPSILON[0][0] + up[1] * conventions.EPSILON[1][0],
        up[0] * conventions.EPSILON[0][1] + up[1] * conventions.EPSILON[1][1],
    )


def raise_spinor(low: Sequence[float]) -> tuple[float, float]:
    # xi^A = eps^{AB} xi_B
    return (
        conventions.EPSILON[0][0] * low[0] + conventions.EPSILON[0][1] * low[1],
        conventions.EPSILON[1][0] * low[0] + conventions.EPSILON[1][1] * low[1],
    )


@dataclass(frozen=True)
class SpinFramePair:
    """Reference dyads and their normalizations.

    The primed family lists the null-plane spinor first; both normalization
    scalars are unity for the reference frames.
    """

    alpha_up: tuple[float, float] = conventions.ALPHA_UP
    beta_up: tuple[float, float] = conventions.BETA_UP
    pi_up: tuple[float, float] = conventions.PI_UP
    xi_up: tuple[float, float] = conventions.XI_UP
    chi: float = 1.0
    chi_tilde: float = 1.0

    @property
    def alpha_low(self):
        return lower_spinor(self.alpha_up)

    @property
    def beta_low(self):
        return lower_spinor(self.beta_up)

    @property
    def pi_low(self):
        return lower_spinor(self.pi_up)

    @property
    def xi_low(self):
        return lower_spinor(self.xi_up)


@dataclass(frozen=True)
class NullTetrad:
    """Tetrad vectors and their metric-lowered covectors, jet-valued.

    Pairings are relative to the underlying split-form block: first/second
    null product +1, cross/transverse product -1, everything else zero. A
    conformal scale multiplies all pairings by its square.
    """

    ell: tuple
    m: tuple
    mtilde: tuple
    n: tuple
    ell_co: tuple
    m_co: tuple
    mtilde_co: tuple
    n_co: tuple


class WalkerFrames:
    """Tetrad rows, dual coframe, and optional conformal scale at a point."""

    __slots__ = ("point", "order", "tetrad", "coframe", "scale", "block",
                 "_values", "_dual_values")

    def __init__(self, m: MetricJet):
        if m.block is None:
            raise ValueError("frames need a metric assembled from block form")
        aj, bj, cj = m.block
        k = m.order
        one = Jet.const(1.0, k)
        zero = Jet.const(0.0, k)
        half = 0.5
        self.point = m.point
        self.order = k
        self.block = (aj, bj, cj)
        self.scale = m.conformal
        self.tetrad = (
            (one, zero, zero, zero),
            (cj * half, bj * half, zero, -one),
            (zero, one, zero, zero),
            (-aj * half, -cj * half, one, zero),
        )
        # dual rows: coframe[j] . tetrad[k] = delta_jk
        tmat = [[self.tetrad[r][c] for r in range(4)] for c in range(4)]
        inv = jet_matrix_inverse(tmat)
        self.coframe = tuple(tuple(inv[j][c] for c in range(4)) for j in range(4))
        self._values = None
        self._dual_values = None

    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = np.array(
                [[e.value for e in row] for row in self.tetrad])
        return self._values

    def dual_values(self) -> np.ndarray:
        if self._dual_values is None:
            self._dual_values = np.array(
                [[e.value for e in row] for row in self.coframe])
        return self._dual_values

    @property
    def scale_value(self) -> float:
        return 1.0 if self.scale is None else self.scale.value

    def null_tetrad(self) -> NullTetrad:
        aj, bj, cj = self.block
        k = self.order
        one = Jet.const(1.0, k)
        zero = Jet.const(0.0, k)
        return NullTetrad(
            ell=self.tetrad[0],
            m=self.tetrad[1],
            mtilde=self.tetrad[2],
            n=self.tetrad[3],
            ell_co=(zero, zero, one, zero),
            m_co=(zero, -one, cj * -0.5, bj * -0.5),
            mtilde_co=(zero, zero, zero, one),
            n_co=(one, zero, aj * 0.5, cj * 0.5),
        )

    spin_frames = SpinFramePair()


def walker_frames(m: MetricJet) -> WalkerFrames:
    """Canonical tetrad and coframe for a split-form metric jet."""
    return WalkerFrames(m)


def metric_and_frames(ws: WalkerSpec, point, order: int, omega=None):
    """Assemble the metric and its frames in one step."""
    m = assemble_metric(ws, point, order, omega=omega)
    return m, walker_frames(m)


# ---------------------------------------------------------------------------
# tensor <-> dyad conversion


def _valence(tensor) -> int:
    depth = 0
    probe = tensor
    while isinstance(probe, (list, tuple)):
        depth += 1
        probe = probe[0]
    return depth


def _entry(tensor, idx):
    node = tensor
    for i in idx:
        node = node[i]
    return node


def _convert(tensor, rows):
    valence = _valence(tensor)
    if not 1 <= valence <= 4:
        raise ValueError("tensor valence must be between 1 and 4")

    def build(depth, prefix):
        if depth == valence:
            total = None
            for src in itertools.product(range(4), repeat=valence):
                term = _entry(tensor, src)
                for j, c in zip(prefix, src):
                    term = term * rows[j][c]
                total = term if total is None else total + term
            return total
        return tuple(build(depth + 1, prefix + (j,)) for j in range(4))

    return tuple(build(1, (j,)) for j in range(4))


def tensor_to_dyad(frames: WalkerFrames, tensor):
    """All-lower coordinate tensor to soldering-label components.

    Each slot is contracted with the tetrad rows, so entry [j][k] of a
    valence-2 result is the tensor evaluated on tetrad vectors j and k.
    """
    return _convert(tensor, frames.tetrad)


def dyad_to_tensor(frames: WalkerFrames, dyad):
    # inverse conversion: contract each slot with the dual coframe
    dual = frames.coframe
    cols = tuple(tuple(dual[j][c] for j in range(4)) for c in range(4))
    return _convert(dyad, cols)


def dyad_values(frames: WalkerFrames, tensor_values: np.ndarray) -> np.ndarray:
    """Fast value-level dyad conversion for an all-lower numpy tensor."""
    e = frames.values()
    out = np.asarray(tensor_values, dtype=float)
    for axis in range(out.ndim):
        out = np.tensordot(e, out, axes=(1, axis))
        out = np.moveaxis(out, 0, axis)
    return out


# ---------------------------------------------------------------------------
# spin connection


@dataclass
class SpinConnection:
    """Connection components in the reference dyads.

    gamma[a][B][C] is the C-component of the derivative of unprimed frame
    element B along coordinate a; gamma_tilde is the primed counterpart.
    trace[a] holds the common trace forced by compatibility with the scaled
    eps spinors (zero for an unscaled metric).
    """

    gamma: tuple
    gamma_tilde: tuple
    trace: tuple
    christoffel: tuple
    residual: float
    order: int


def spin_connection(m: MetricJet, frames: WalkerFrames) -> SpinConnection:
    """Solve for the dyad connection reproducing the tetrad derivatives.

    The covariant derivative of each tetrad vector is expanded in the
    tetrad itself and split into unprimed and primed blocks. The split is
    unique once the trace of each block is pinned, and compatibility with
    the (possibly scaled) eps spinors pins both traces to the logarithmic
    derivative of the scale.
    """
    gam = christoffel(m)
    k = m.order - 1
    e = frames.tetrad
    dual = frames.coframe

    big = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for a in range(4):
        for kk in range(4):
            nabla = []
            for c in range(4):
                term = e[kk][c].diff(a)
                for d in range(4):
                    term = term + gam[c][a][d] * e[kk][d]
                nabla.append(term)
            for j in range(4):
                tot = dual[j][0] * nabla[0]
                for c in range(1, 4):
                    tot = tot + dual[j][c] * nabla[c]
                big[a][j][kk] = tot

    if frames.scale is None:
        trace = tuple(Jet.const(0.0, k) for _ in range(4))
    else:
        lns = frames.scale.ln()
        trace = tuple(lns.diff(a).truncate(k) for a in range(4))

    gamma = [[[None] * 2 for _ in range(2)] for _ in range(4)]
    gamma_t = [[[None] * 2 for _ in range(2)] for _ in range(4)]
    for a in range(4):
        for bb in range(2):
            for cc in range(2):
                p = big[a][2 * cc][2 * bb] + big[a][2 * cc + 1][2 * bb + 1]
                if bb == cc:
                    p = p - trace[a]
                gamma[a][bb][cc] = p * 0.5
                q = big[a][cc][bb] + big[a][2 + cc][2 + bb]
                if bb == cc:
                    q = q - trace[a]
                gamma_t[a][bb][cc] = q * 0.5

    resid = 0.0
    scale = 1.0
    for a in range(4):
        for j in range(4):
            for kk in range(4):
                cj, cpj = j >> 1, j & 1
                bk, bpk = kk >> 1, kk & 1
                rebuilt = None
                if cpj == bpk:
                    rebuilt = gamma[a][bk][cj]
                if cj == bk:
                    add = gamma_t[a][bpk][cpj]
                    rebuilt = add if rebuilt is None else rebuilt + add
                if rebuilt is None:
                    rebuilt = Jet.const(0.0, k)
                diffc = (big[a][j][kk] - rebuilt).coeffs
                resid = max(resid, float(np.max(np.abs(diffc))))
                scale = max(scale, float(np.max(np.abs(big[a][j][kk].coeffs))))
    if resid > 1e-8 * scale:
        raise ValueError(
            "connection split residual %.3e exceeds tolerance; "
            "the frame or scale data are inconsistent" % resid)

    return SpinConnection(
        gamma=tuple(tuple(tuple(r) for r in g) for g in gamma),
        gamma_tilde=tuple(tuple(tuple(r) for r in g) for g in gamma_t),
        trace=trace,
        christoffel=gam,
        residual=resid / scale,
        order=k,
    )


def frame_directions(conn: SpinConnection, frames: WalkerFrames):
    """Contract the coordinate index of both blocks with the tetrad rows."""
    gd = []
    gdt = []
    for kk in range(4):
        row = [[None] * 2 for _ in range(2)]
        rowt = [[None] * 2 for _ in range(2)]
        for bb in range(2):
            for cc in range(2):
                tot = frames.tetrad[kk][0] * conn.gamma[0][bb][cc]
                tott = frames.tetrad[kk][0] * conn.gamma_tilde[0][bb][cc]
                for a in range(1, 4):
                    tot = tot + frames.tetrad[kk][a] * conn.gamma[a][bb][cc]
                    tott = tott + frames.tetrad[kk][a] * conn.gamma_tilde[a][bb][cc]
                row[bb][cc] = tot
                rowt[bb][cc] = tott
        gd.append(row)
        gdt.append(rowt)
    return gd, gdt


def _weight_tuple(weights) -> tuple[float, float, float, float]:
    if isinstance(weights, str):
        try:
            return conventions.WEIGHT_PRESETS[weights]
        except KeyError:
            raise ValueError("unknown weight preset %r" % weights) from None
    w = tuple(float(x) for x in weights)
    if len(w) != 4:
        raise ValueError("weights must be four exponents")
    return w


def rescaled_connection(conn: SpinConnection, frames: WalkerFrames, weights):
    """Coordinate-indexed connection blocks for weight-rescaled dyads.

    Rescaling each dyad element by a power of the conformal scale shifts
    the connection by the exact closed form: off-diagonal components pick
    up the power difference, diagonal ones an additive log-derivative.
    """
    if frames.scale is None:
        raise ValueError("rescaled frames need a conformal scale")
    v0, v1, w0, w1 = _weight_tuple(weights)
    lns = frames.scale.ln()
    dlns = tuple(lns.diff(a) for a in range(4))

    def power(p: float):
        if p == 0.0:
            return Jet.const(1.0, lns.order)
        return (lns * p).exp()

    vv = (v0, v1)
    ww = (w0, w1)
    gh = [[[None] * 2 for _ in range(2)] for _ in range(4)]
    ght = [[[None] * 2 for _ in range(2)] for _ in range(4)]
    for a in range(4):
        for bb in range(2):
            for cc in range(2):
                g = conn.gamma[a][bb][cc] * power(vv[bb] - vv[cc])
                gt = conn.gamma_tilde[a][bb][cc] * power(ww[bb] - ww[cc])
                if bb == cc:
                    g = g + dlns[a] * vv[bb]
                    gt = gt + dlns[a] * ww[bb]
                gh[a][bb][cc] = g
                ght[a][bb][cc] = gt
    return gh, ght


def rescaled_frame_directions(conn: SpinConnection, frames: WalkerFrames,
                              weights):
    """Directional connection blocks for weight-rescaled frames.

    Both dyads are rescaled by the given powers of the conformal scale and
    the rows are contracted with the correspondingly rescaled tetrad. The
    scale must be present on the frames.
    """
    gh, ght = rescaled_connection(conn, frames, weights)
    v0, v1, w0, w1 = _weight_tuple(weights)
    lns = frames.scale.ln()

    def power(p: float):
        if p == 0.0:
            return Jet.const(1.0, lns.order)
        return (lns * p).exp()

    vv = (v0, v1)
    ww = (w0, w1)
    gd = []
    gdt = []
    for kk in range(4):
        rf = power(vv[kk >> 1] + ww[kk & 1])
        row = [[None] * 2 for _ in range(2)]
        rowt = [[None] * 2 for _ in range(2)]
        for bb in range(2):
            for cc in range(2):
                tot = frames.tetrad[kk][0] * gh[0][bb][cc]
                tott = frames.tetrad[kk][0] * ght[0][bb][cc]
                for a in range(1, 4):
                    tot = tot + frames.tetrad[kk][a] * gh[a][bb][cc]
                    tott = tott + frames.tetrad[kk][a] * ght[a][bb][cc]
                row[bb][cc] = rf * tot
                rowt[bb][cc] = rf * tott
        gd.append(row)
        gdt.append(rowt)
    return gd, gdt


@dataclass
class SpinCoefficientTables:
    """The two 4x4 named tables, jet-valued.

    Rows are frame directions in soldering order; the name grids and the
    slot layout behind them live in the conventions module.
    """

    unprimed: dict
    primed: dict
    order: int

    def value(self, name: str) -> float:
        table = self.primed if name.endswith("_tilde") else self.unprimed
        return table[name].value

    def values(self) -> dict:
        out = {n: j.value for n, j in self.unprimed.items()}
        out.update((n, j.value) for n, j in self.primed.items())
        return out

    def matrix(self, primed: bool = False):
        names = conventions.PRIMED_NAMES if primed else conventions.UNPRIMED_NAMES
        table = self.primed if primed else self.unprimed
        return [[table[n].value for n in row] for row in names]


def named_tables(gdir, gdir_tilde, order: int) -> SpinCoefficientTables:
    """Apply the frozen naming map to directional connection blocks."""
    unp = {}
    pri = {}
    for r in range(4):
        ku = conventions.UNPRIMED_ROW_PERM[r]
        kp = conventions.PRIMED_ROW_PERM[r]
        for c in range(4):
            bb, cc = conventions.COLUMN_SLOTS[c]
            if conventions.TABLES_TRANSPOSED:
                bb, cc = cc, bb
            unp[conventions.UNPRIMED_NAMES[r][c]] = (
                gdir[ku][bb][cc] * conventions.UNPRIMED_COLUMN_SIGNS[c])
            pri[conventions.PRIMED_NAMES[r][c]] = (
                gdir_tilde[kp][bb][cc] * conventions.PRIMED_COLUMN_SIGNS[c])
    return SpinCoefficientTables(unprimed=unp, primed=pri, order=order)


def spin_coefficients(ws: WalkerSpec, point, order: int, omega=None,
                      weights=None) -> SpinCoefficientTables:
    """Named coefficient tables for a spec, optionally scaled and reframed.

    With a conformal factor and no weights the tables describe the scaled
    metric in the unscaled reference frames; adding weights rescales the
    frames themselves.
    """
    m, frames = metric_and_frames(ws, point, order, omega=omega)
    conn = spin_connection(m, frames)
    if weights is None:
        gd, gdt = frame_directions(conn, frames)
    else:
        gd, gdt = rescaled_frame_directions(conn, frames, weights)
    return named_tables(gd, gdt, conn.order)


# ---------------------------------------------------------------------------
# curvature spinors


@dataclass(frozen=True)
class CurvatureSpinors:
    """Irreducible curvature parts in the reference dyads.

    psi_minus and psi_plus hold the five totally symmetric components of
    the unprimed and primed quartic parts, indexed by the number of 1-type
    dyad labels. phi is the trace-free mixed block over symmetric pairs
    (00, 01, 11) x (0'0', 0'1', 1'1'), and lam the scalar part.
    """

    psi_minus: tuple
    psi_plus: tuple
    phi: tuple
    lam: float


def _sym4(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    for perm in itertools.permutations(range(4)):
        out += arr.transpose(perm)
    return out / 24.0


def _five(sym: np.ndarray) -> tuple:
    return (
        float(sym[0, 0, 0, 0]),
        float(sym[0, 0, 0, 1]),
        float(sym[0, 0, 1, 1]),
        float(sym[0, 1, 1, 1]),
        float(sym[1, 1, 1, 1]),
    )


def curvature_spinors(m: MetricJet, frames: WalkerFrames) -> CurvatureSpinors:
    """Extract the curvature spinors of the assembled metric.

    Components refer to the fixed reference dyads even when the metric
    carries a conformal scale; the scale appears only via the explicit
    factors of the frozen decomposition conventions.
    """
    curv = riemann_ricci(m)
    rl = np.array([[[[curv.riemann_lower[a][b][c][d].value
                      for d in range(4)] for c in range(4)]
                    for b in range(4)] for a in range(4)])
    rd = dyad_values(frames, rl)
    r8 = rd.reshape((2,) * 8)
    th2 = frames.scale_value ** 2
    f = conventions.WEYL_PAIR_FACTOR / th2

    x_unp = f * np.einsum("aibjckdl,ij,kl->abcd", r8, _EPS, _EPS)
    x_pri = f * np.einsum("aibjckdl,ab,cd->ijkl", r8, _EPS, _EPS)
    psi_minus = _five(_sym4(x_unp))
    psi_plus = _five(_sym4(x_pri))

    sval = curv.scalar.value
    lam = -sval / 24.0

    gval = np.array([[m.g[i][j].value for j in range(4)] for i in range(4)])
    ric = np.array([[curv.ricci[i][j].value for j in range(4)]
                    for i in range(4)])
    phi_t = conventions.RICCI_SPINOR_FACTOR * (ric - 0.25 * sval * gval)
    pd = dyad_values(frames, phi_t).reshape(2, 2, 2, 2)
    # reorder from (A,A',B,B') to (A,B,A',B')
    pd = pd.transpose(0, 2, 1, 3)
    pairs = ((0, 0), (0, 1), (1, 1))
    phi = tuple(tuple(float(pd[a, b, ap, bp]) for ap, bp in pairs)
                for a, b in pairs)

    return CurvatureSpinors(psi_minus=psi_minus, psi_plus=psi_plus,
                            phi=phi, lam=lam)


def _sym4_from_five(five: Sequence[float]) -> np.ndarray:
    out = np.empty((2, 2, 2, 2))
    for idx in np.ndindex(2, 2, 2, 2):
        out[idx] = five[sum(idx)]
    return out


def _phi_array(phi) -> np.ndarray:
    pairs = {(0, 0): (0, 0), (0, 1): (0, 1), (1, 0): (0, 1), (1, 1): (1, 1)}
    look = {(0, 0): 0, (0, 1): 1, (1, 1): 2}
    out = np.empty((2, 2, 2, 2))
    for a, b, ap, bp in np.ndindex(2, 2, 2, 2):
        r = look[pairs[(a, b)]]
        c = look[pairs[(ap, bp)]]
        out[a, b, ap, bp] = phi[r][c]
    return out


def reassemble_riemann_dyad(cs: CurvatureSpinors, frames: WalkerFrames
                            ) -> np.ndarray:
    """Rebuild the dyadized Riemann tensor from its irreducible parts.

    The scalar part is stored unscaled, so inside the dyad blocks it picks
    up the squared conformal scale along with the overall prefactor.
    """
    s = conventions.CURVATURE_TRACE_SIGN
    eps = _EPS
    th2 = frames.scale_value ** 2
    lam_block = s * th2 * cs.lam * (np.einsum("ac,bd->abcd", eps, eps)
                                    + np.einsum("ad,bc->abcd", eps, eps))
    x_unp = _sym4_from_five(cs.psi_minus) + lam_block
    x_pri = _sym4_from_five(cs.psi_plus) + lam_block
    phi = _phi_array(cs.phi) * conventions.MIXED_BLOCK_FACTOR
    r8 = (np.einsum("abcd,ij,kl->aibjckdl", x_unp, eps, eps)
          + np.einsum("ijkl,ab,cd->aibjckdl", x_pri, eps, eps)
          + np.einsum("abkl,ij,cd->aibjckdl", phi, eps, eps)
          + np.einsum("cdij,ab,kl->aibjckdl", phi, eps, eps))
    return th2 * r8.reshape(4, 4, 4, 4)


# ---------------------------------------------------------------------------
# covariant derivatives of primed spinor fields


def primed_covariant_deriv(conn: SpinConnection, comps):
    """First covariant derivative of an upper primed spinor field.

    comps is a pair of jets; the result d1[a][C'] is jet-valued with the
    coordinate index first.
    """
    out = []
    for a in range(4):
        row = []
        for cp in range(2):
            term = comps[cp].diff(a)
            for bp in range(2):
                term = term + conn.gamma_tilde[a][bp][cp] * comps[bp]
            row.append(term)
        out.append(row)
    return out


def primed_second_deriv(conn: SpinConnection, first):
    """Second covariant derivative given the first; index order (a, b, C')."""
    gam = conn.christoffel
    out = []
    for a in range(4):
        plane = []
        for b in range(4):
            row = []
            for cp in range(2):
                term = first[b][cp].diff(a)
                for dp in range(2):
                    term = term + conn.gamma_tilde[a][dp][cp] * first[b][dp]
                for c in range(4):
                    term = term - gam[c][a][b] * first[c][cp]
                row.append(term)
            plane.append(row)
        out.append(plane)
    return out


# ---------------------------------------------------------------------------
# intrinsic operators


def delta_op(f, point=None, order: int = 3):
    """Derivative along the parallel null plane, components (d/du, d/dv).

    Accepts a jet directly, or anything as_field accepts together with a
    point. The result components live in the unprimed dyad.
    """
    if isinstance(f, Jet):
        fj = f
    else:
        fj = as_field(f).jet(point, order + 1)
    return (fj.diff(0), fj.diff(1))


def sigma_op(f, ws: WalkerSpec, point=None, order: int = 3):
    """Transverse companion of delta_op; components in the unprimed dyad."""
    if point is None:
        raise ValueError("a base point is required to evaluate the block")
    if isinstance(f, Jet):
        fj = f
        aj, bj, cj = ws.block(point, fj.order)
    else:
        fj = as_field(f).jet(point, order + 1)
        aj, bj, cj = ws.block(point, order + 1)
    fu, fv, fx, fy = (fj.diff(i) for i in range(4))
    s0 = (cj * fu + bj * fv) * 0.5 - fy
    s1 = fx - (aj * fu + cj * fv) * 0.5
    return (s0, s1)


def pair_commutator_residual(ws: WalkerSpec, f, point, order: int = 4) -> float:
    """Symmetrized commutation defect of the two intrinsic operators.

    On scalars, composing the plane operator with the transverse one in
    either order agrees after symmetrization up to a correction built from
    the covariant derivative of the distinguished primed spinor:

        sym_AB[ delta_A sigma_B f ] = sym_AB[ sigma_A delta_B f ]
                                      - sym_AB[ (sigma_A pi)^{B'} D_{B B'} f ]

    The compositions are covariant on the dangling unprimed index, so each
    side also carries the directional connection acting on that index (the
    plane-direction rows of which vanish for the split form). Returns the
    scale-relative maximum defect over the symmetric components at the
    base point. The identity holds for unscaled split-form metrics.
    """
    m, frames = metric_and_frames(ws, point, order)
    conn = spin_connection(m, frames)
    gd, gdt = frame_directions(conn, frames)
    fj = as_field(f).jet(point, order)

    d = delta_op(fj)
    s = sigma_op(fj, ws, point)
    ds = [[delta_op(s[b])[a] for b in range(2)] for a in range(2)]
    sd = [[sigma_op(d[b], ws, point)[a] for b in range(2)] for a in range(2)]

    # covariant compositions: subtract the connection along the applied
    # direction acting on the free index of the inner operator
    for aa in range(2):
        for bb in range(2):
            for cc in range(2):
                ds[aa][bb] = ds[aa][bb] - gd[2 * aa][bb][cc] * s[cc]
                sd[aa][bb] = sd[aa][bb] - gd[2 * aa + 1][bb][cc] * d[cc]

    # (sigma_A pi)^{B'}: derivative of pi along the transverse dyad rows
    spi = [[gdt[2 * aa + 1][0][bp] for bp in range(2)] for aa in range(2)]
    # D_{B B'} f: directional derivatives of f along the dyad rows
    df = [[None] * 2 for _ in range(2)]
    for bb in range(2):
        for bp in range(2):
            tot = frames.tetrad[2 * bb + bp][0] * fj.diff(0)
            for c in range(1, 4):
                tot = tot + frames.tetrad[2 * bb + bp][c] * fj.diff(c)
            df[bb][bp] = tot

    resid = 0.0
    scale = 1.0
    for aa in range(2):
        for bb in range(2):
            corr_ab = spi[aa][0] * df[bb][0] + spi[aa][1] * df[bb][1]
            corr_ba = spi[bb][0] * df[aa][0] + spi[bb][1] * df[aa][1]
            lhs = (ds[aa][bb].value + ds[bb][aa].value) * 0.5
            rhs = (sd[aa][bb].value + sd[bb][aa].value) * 0.5
            corr = (corr_ab.value + corr_ba.value) * 0.5
            resid = max(resid, abs(lhs - rhs + corr))
            scale = max(scale, abs(lhs), abs(rhs), abs(corr))
    return resid / scale


# ---------------------------------------------------------------------------
# quartic classification


@dataclass(frozen=True)
class QuarticClassification:
    """Multiplicity structure of a binary quartic.

    directions pairs each root cluster with a primed dyad direction: a
    finite root z maps to (1, z), the root at infinity to (0, 1). gap is
    the smallest distance between distinct cluster centers (infinite when
    fewer than two clusters survive).
    """

    label: str
    roots: tuple
    directions: tuple
    gap: float


_CLUSTER_TOL = 1e-5
_BINOM = (1.0, 4.0, 6.0, 4.0, 1.0)


def _durand_kerner(coeffs):
    """All complex roots of a monic polynomial given low-to-high coeffs."""
    n = len(coeffs) - 1
    roots = [(0.4 + 0.9j) ** kk for kk in range(1, n + 1)]
    for _ in range(400):
        shift = 0.0
        new = []
        for i, z in enumerate(roots):
            num = sum(c * z ** kk for kk, c in enumerate(coeffs[:-1])) + z ** n
            den = 1.0 + 0.0j
            for jj, w in enumerate(roots):
                if jj != i:
                    den *= (z - w)
            if den == 0:
                den = 1e-300
            step = num / den
            new.append(z - step)
            shift = max(shift, abs(step))
        roots = new
        if shift < 1e-15:
            break
    return roots


def _poly_eval(asc, z):
    tot = 0.0 + 0.0j
    for c in reversed(asc):
        tot = tot * z + c
    return tot


def _polish_root(asc, z0, m):
    """Newton-refine an m-fold root estimate of the ascending-coefficient
    polynomial by working on its (m-1)-th derivative, where the root is
    simple. Returns z0 unchanged if the iteration stalls or wanders."""
    p = list(asc)
    for _ in range(m - 1):
        p = [k * p[k] for k in range(1, len(p))]
    if len(p) < 2:
        return z0
    dp = [k * p[k] for k in range(1, len(p))]
    z = z0
    for _ in range(40):
        d = _poly_eval(dp, z)
        if abs(d) < 1e-300:
            return z0
        step = _poly_eval(p, z) / d
        z = z - step
        if abs(z - z0) > 0.05 * (1 + abs(z0)):
            return z0
        if abs(step) <= 1e-14 * (1 + abs(z)):
            break
    return z


def _contraction_multiplicity(t: np.ndarray, scale: float, direction,
                              tol: float) -> int:
    d = np.array([complex(direction[0]), complex(direction[1])])
    d = d / math.sqrt(abs(d[0]) ** 2 + abs(d[1]) ** 2)
    cur = t
    mags = []
    for _ in range(4):
        cur = np.tensordot(cur, d, axes=(0, 0))
        mags.append(float(np.max(np.abs(cur))))
    for r in (4, 3, 2, 1):
        if mags[4 - r] < tol * scale:
            return r
    return 0


def classify_quartic(q: Sequence[float]) -> QuarticClassification:
    """Multiplicity partition of the symmetric quartic with components q.

    q lists the five symmetric components indexed by the number of 1-type
    primed labels; the associated polynomial carries binomial weights, so
    the first reference direction is a root of order (number of leading
    vanishing components).

    Approximate roots of an m-fold root scatter like (machine eps)^(1/m),
    which outruns the cluster window for m >= 3, so nearby clusters are
    merged only when contracting the symmetric tensor against their joint
    center confirms the combined multiplicity. Centers are refined by
    Newton iteration on the (m-1)-th derivative, where an m-fold root is
    simple, recovering machine accuracy from the scattered cloud.
    """
    q = [float(x) for x in q]
    scale = max(abs(x) for x in q)
    if scale == 0.0:
        return QuarticClassification(label="O", roots=(), directions=(),
                                     gap=math.inf)
    # classification is projective: normalize so huge or denormal inputs
    # behave like their unit-scale representative
    q = [x / scale for x in q]
    scale = 1.0
    coeffs = [b * x for b, x in zip(_BINOM, q)]
    cut = 1e-12 * max(abs(c) for c in coeffs)
    deg = 4
    while deg > 0 and abs(coeffs[deg]) <= cut:
        deg -= 1
    inf_mult = 4 - deg

    finite = []
    if deg > 0:
        monic = [c / coeffs[deg] for c in coeffs[: deg + 1]]
        finite = _durand_kerner(monic)

    # proximity clustering
    parent = list(range(len(finite)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            if abs(finite[i] - finite[j]) < _CLUSTER_TOL * (1 + abs(finite[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i, z in enumerate(finite):
        groups.setdefault(find(i), []).append(z)
    clusters = list(groups.values())

    # contraction-confirmed merging of near clusters
    tensor = _sym4_from_five(q).astype(complex)
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                ci = sum(clusters[i]) / len(clusters[i])
                cj = sum(clusters[j]) / len(clusters[j])
                if abs(ci - cj) > 1e-2 * (1 + abs(ci)):
                    continue
                joint = clusters[i] + clusters[j]
                center = _polish_root(monic, sum(joint) / len(joint),
                                      len(joint))
                mult = _contraction_multiplicity(tensor, scale, (1.0, center),
                                                 tol=1e-6)
                if mult >= len(joint):
                    clusters[i] = joint
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break

    roots = []
    for members in clusters:
        center = _polish_root(monic, sum(members) / len(members),
                              len(members))
        real = abs(center.imag) <= 1e-7 * (1 + abs(center.real))
        if real:
            center = complex(center.real, 0.0)
        roots.append((center, len(members), real))
    if inf_mult:
        roots.append((None, inf_mult, True))
    roots.sort(key=lambda r: (-r[1], 0.0 if r[0] is None else abs(r[0])))

    directions = tuple(
        ((0.0, 1.0) if z is None else (1.0, z), mult, real)
        for z, mult, real in roots)
    centers = [z for z, _, _ in roots if z is not None]
    gap = math.inf
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            gap = min(gap, abs(centers[i] - centers[j]))
    label = "".join(str(mult) for _, mult, _ in roots)
    return QuarticClassification(label=label, roots=tuple(roots),
                                 directions=directions, gap=gap)


def wps_multiplicity(psitilde: Sequence[float], direction: Sequence[float],
                     tol: float = 1e-9) -> int:
    """Root order of a primed dyad direction in the symmetric quartic."""
    d = np.array([complex(direction[0]), complex(direction[1])])
    norm = np.sqrt(abs(d[0]) ** 2 + abs(d[1]) ** 2)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    d = d / norm
    t = _sym4_from_five([float(x) for x in psitilde]).astype(complex)
    scale = float(np.max(np.abs(t)))
    if scale < 1e-300:
        return 4
    contractions = []
    cur = t
    for _ in range(4):
        cur = np.tensordot(cur, d, axes=(0, 0))
        contractions.append(float(np.max(np.abs(cur))))
    # contractions[m-1] used m copies; order r means 5-r copies annihilate
    for r in (4, 3, 2, 1):
        if contractions[5 - r - 1] < tol * scale:
            return r
    return 0
