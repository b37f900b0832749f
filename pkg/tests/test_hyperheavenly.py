"""Plane-affine factor family: ansatz block, closed forms, residual equation.

Direct curvature on the scaled metric is the oracle for every closed form;
hand-derived constant cases are frozen as literals.
"""

import numpy as np
import pytest

from walkergeo.conformal import ConformalSpec, hatted_curvature_direct
from walkergeo.geometry import WalkerSpec
from walkergeo.hyperheavenly import (
    HHData,
    hh_lagrangian,
    hh_metric,
    hh_residual,
    hh_walker_spec,
    phi_mixed,
    ricci_alignment_residual,
    scalar_hat,
    sym_x_gradient,
    x_vector,
    _lagrangian_jet,
)
from walkergeo.spinor import curvature_spinors, metric_and_frames

GENERIC = WalkerSpec(a="u*u*y + x + 0.3*v", b="v*x*x - u + 0.1*u*v", c="u*v + x*y")

THETA = "0.3*u^2*v + 0.2*u*x - 0.1*v*y^2 + 0.15*x^2*y + 0.05*u*v*x*y"
MU = "0.4 + 0.3*x - 0.2*x*y"


def full_data():
    return HHData(0.7, -1.3, theta=THETA, mu=MU, shat=0.6)


def hh_point(rng, data, lo=0.25):
    while True:
        p = tuple(float(t) for t in rng.uniform(-0.55, 0.55, 4))
        if data.inverse_factor(p) > lo:
            return p


def sample(rng, data, count):
    return [hh_point(rng, data) for _ in range(count)]


# ---------------------------------------------------------------------------
# construction and validation


def test_rejects_zero_slope():
    with pytest.raises(ValueError):
        HHData(0.0, 1.0)
    with pytest.raises(ValueError):
        HHData(1.0, 0.0)


def test_rejects_plane_dependent_density():
    bad = HHData(1.0, 1.0, mu="u*x")
    with pytest.raises(ValueError):
        hh_metric(bad, (0.3, 0.4, 0.0, 0.0))


def test_rejects_singular_factor_point():
    data = HHData(1.0, -1.0)
    with pytest.raises(ValueError):
        hh_metric(data, (0.3, 0.3, 0.0, 0.0))


def test_frame_covector_tables():
    d = HHData(0.7, -1.3)
    assert d.tau == pytest.approx(1.82)
    assert d.j_lower == (0.7, -1.3)
    assert d.j_upper == (-1.3, -0.7)
    assert d.k_upper == (1.3, -0.7)
    assert d.k_lower == (0.7, 1.3)


# ---------------------------------------------------------------------------
# the ansatz block


def test_zero_data_gives_flat_block():
    blk = hh_metric(HHData(1.0, 1.0), (0.4, 0.35, 0.1, -0.2))
    assert blk.a.value == 0.0 and blk.b.value == 0.0 and blk.c.value == 0.0
    assert blk.alt_residual == 0.0


def test_constant_curvature_block_frozen():
    # potential and density off: block is the rank-one frame square, constant
    blk = hh_metric(HHData(1.0, 1.0, shat=1.2), (0.4, 0.35, 0.1, -0.2))
    assert blk.a.value == pytest.approx(0.025, abs=1e-15)
    assert blk.b.value == pytest.approx(0.025, abs=1e-15)
    assert blk.c.value == pytest.approx(0.025, abs=1e-15)
    assert abs(blk.a.diff(0).value) < 1e-15 and abs(blk.a.diff(2).value) < 1e-15


def test_linear_potential_block_frozen():
    # theta linear in the first plane coordinate: hand expansion gives
    # a = 0, b = -2m, c = n, a constant block
    blk = hh_metric(HHData(0.7, -1.3, theta="u"), (0.3, -0.2, 0.1, 0.4))
    assert blk.a.value == pytest.approx(0.0, abs=1e-14)
    assert blk.b.value == pytest.approx(-1.4)
    assert blk.c.value == pytest.approx(-1.3)


def test_leaf_only_potential_leaves_block_unchanged():
    d0 = HHData(0.7, -1.3, mu="x", shat=0.4)
    d1 = HHData(0.7, -1.3, theta="x^2*y", mu="x", shat=0.4)
    p = (0.3, -0.2, 0.15, 0.4)
    b0, b1 = hh_metric(d0, p), hh_metric(d1, p)
    assert b1.a.value == pytest.approx(b0.a.value, abs=1e-14)
    assert b1.b.value == pytest.approx(b0.b.value, abs=1e-14)
    assert b1.c.value == pytest.approx(b0.c.value, abs=1e-14)


def test_both_block_expansions_agree():
    rng = np.random.default_rng(11)
    data = full_data()
    for p in sample(rng, data, 8):
        assert hh_metric(data, p).alt_residual < 1e-12


def test_block_scalar_curvature_tracks_density():
    # unscaled scalar curvature of the ansatz equals six times the density
    # over the factor
    rng = np.random.default_rng(13)
    data = full_data()
    spec = hh_walker_spec(data)
    for p in sample(rng, data, 4):
        m, fr = metric_and_frames(spec, p, 4)
        s = -24.0 * curvature_spinors(m, fr).lam
        want = 6.0 * data.mu.jet(p, 0).value * data.inverse_factor(p)
        assert s == pytest.approx(want, rel=1e-9, abs=1e-11)


# ---------------------------------------------------------------------------
# scalar curvature closed form


def test_scalar_hat_generic_metric():
    rng = np.random.default_rng(17)
    data = full_data()
    for p in sample(rng, data, 8):
        pair = scalar_hat(GENERIC, data, p)
        assert pair.formula == pytest.approx(pair.direct, rel=1e-9, abs=1e-12)


def test_scalar_hat_flat_block():
    pair = scalar_hat(WalkerSpec(), HHData(1.0, 1.0), (0.3, 0.4, 0.0, 0.1))
    assert pair.formula == 0.0
    assert abs(pair.direct) < 1e-14


def test_scalar_hat_on_ansatz_hits_target():
    rng = np.random.default_rng(19)
    for shat in (0.0, 1.0, -1.0, 0.6):
        data = HHData(0.7, -1.3, theta="0.2*u*v + 0.1*u*x", mu="0.3*x", shat=shat)
        p = hh_point(rng, data)
        pair = scalar_hat(hh_walker_spec(data), data, p)
        assert pair.direct == pytest.approx(-shat / 24.0, abs=1e-7)
        assert pair.formula == pytest.approx(-shat / 24.0, abs=1e-9)


def test_unscaled_curvature_quadratic_block():
    # one plane-quadratic entry pins the curvature normalization
    m, fr = metric_and_frames(WalkerSpec(a="u^2"), (0.2, 0.3, 0.1, 0.4), 4)
    assert -24.0 * curvature_spinors(m, fr).lam == pytest.approx(2.0, rel=1e-12)


# ---------------------------------------------------------------------------
# mixed Ricci components


def test_phi_mixed_generic_metric():
    rng = np.random.default_rng(23)
    data = full_data()
    for p in sample(rng, data, 8):
        pair = phi_mixed(GENERIC, data, p)
        for f, d in zip(pair.formula, pair.direct):
            assert f == pytest.approx(d, rel=1e-8, abs=1e-10)


def test_phi_mixed_vanishes_on_ansatz():
    rng = np.random.default_rng(29)
    for theta in ("u*v", "u^2*v + 0.3*x*u", THETA):
        data = HHData(0.7, -1.3, theta=theta, mu=MU, shat=-0.4)
        spec = hh_walker_spec(data)
        p = hh_point(rng, data)
        pair = phi_mixed(spec, data, p)
        assert max(abs(t) for t in pair.formula) < 1e-8
        assert max(abs(t) for t in pair.direct) < 1e-8


def test_ansatz_is_doubly_aligned():
    # both plane-contracted Ricci columns vanish and the quartic spinor has
    # a repeated plane root
    rng = np.random.default_rng(31)
    data = full_data()
    spec = hh_walker_spec(data)
    for p in sample(rng, data, 3):
        hc = hatted_curvature_direct(spec, data.factor_spec(), p, order=4)
        assert max(abs(hc.phi[r][0]) for r in range(3)) < 1e-8
        assert max(abs(hc.phi[r][1]) for r in range(3)) < 1e-8
        assert abs(hc.psi_plus[0]) < 1e-8 and abs(hc.psi_plus[1]) < 1e-8


# ---------------------------------------------------------------------------
# alignment residual


def test_alignment_affine_factor():
    ra = ricci_alignment_residual(ConformalSpec("1/(1 + 2*u + 3*v)"), (0.1, 0.05, 0.3, 0.4))
    assert ra.max_abs < 1e-12


def test_alignment_trivial_factor():
    ra = ricci_alignment_residual(ConformalSpec(1.0), (0.1, 0.05, 0.3, 0.4))
    assert ra.max_abs == 0.0


def test_alignment_nonaffine_factor():
    ra = ricci_alignment_residual(ConformalSpec("exp(u^2)"), (0.3, 0.1, 0.0, 0.0))
    assert ra.max_abs > 0.5
    assert abs(ra.affine[0]) > 0.5


def test_alignment_formula_matches_direct_curvature():
    # the plane components equal the factor times the first stored column
    rng = np.random.default_rng(37)
    for src in ("1/(0.7*u - 1.3*v + 2)", "exp(0.2*u - 0.1*v + 0.3*x)"):
        cs = ConformalSpec(src)
        p = tuple(float(t) for t in rng.uniform(-0.4, 0.4, 4))
        ra = ricci_alignment_residual(cs, p)
        hc = hatted_curvature_direct(GENERIC, cs, p, order=4)
        om = cs.value(p)
        for r in range(3):
            assert ra.plane[r] == pytest.approx(om * hc.phi[r][0], rel=1e-9, abs=1e-12)


def test_alignment_iff_direct_column():
    p = (0.2, -0.1, 0.3, 0.4)
    good = ConformalSpec("1/(0.7*u - 1.3*v + 2)")
    hc = hatted_curvature_direct(GENERIC, good, p, order=4)
    assert max(abs(hc.phi[r][0]) for r in range(3)) < 1e-9
    bad = ConformalSpec("exp(u*v)")
    hc = hatted_curvature_direct(GENERIC, bad, p, order=4)
    assert max(abs(hc.phi[r][0]) for r in range(3)) > 1e-3


# ---------------------------------------------------------------------------
# auxiliary covector and generating scalar


def test_covector_is_gradient_of_scalar():
    rng = np.random.default_rng(41)
    data = full_data()
    for p in sample(rng, data, 5):
        x0, x1 = x_vector(data, p)
        lj = _lagrangian_jet(data, p, 1)
        scale = 1.0 + abs(x0.value) + abs(x1.value)
        assert abs(x0.value - lj.diff(0).value) / scale < 1e-12
        assert abs(x1.value - lj.diff(1).value) / scale < 1e-12


def test_shift_leaves_symmetrized_gradient():
    rng = np.random.default_rng(43)
    data = full_data()
    for p in sample(rng, data, 4):
        with_shift = sym_x_gradient(data, p, shifted=True)
        without = sym_x_gradient(data, p, shifted=False)
        for a, b in zip(with_shift, without):
            assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_constant_density_drops_shift_term():
    data0 = HHData(0.7, -1.3, theta="u*v", mu=0.2, shat=0.0)
    p = (0.3, -0.2, 0.1, 0.4)
    x_on = x_vector(data0, p, shifted=True)
    x_off = x_vector(data0, p, shifted=False)
    assert x_on[0].value == x_off[0].value
    assert x_on[1].value == x_off[1].value


def test_zero_data_zero_covector():
    x0, x1 = x_vector(HHData(1.0, 1.0), (0.4, 0.3, 0.1, 0.2))
    assert x0.value == 0.0 and x1.value == 0.0


def test_second_derivatives_equal_symmetrized_gradient():
    data = full_data()
    p = (0.21, -0.34, 0.41, 0.27)
    lj = _lagrangian_jet(data, p, 2)
    second = (
        lj.derivative((2, 0, 0, 0)),
        lj.derivative((1, 1, 0, 0)),
        lj.derivative((0, 2, 0, 0)),
    )
    for s, g in zip(second, sym_x_gradient(data, p)):
        assert s == pytest.approx(g, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# the residual equation


def test_report_flat_case():
    rng = np.random.default_rng(47)
    data = HHData(1.0, 1.0)
    pts = sample(rng, data, 7)
    rep = hh_residual(data, pts)
    assert rep.solved and rep.max_second == 0.0
    assert rep.eta == (0.0, 0.0) and rep.constant == 0.0
    assert rep.curvature_residual < 1e-12
    hc = hatted_curvature_direct(hh_walker_spec(data), data.factor_spec(), pts[0], order=4)
    assert max(abs(hc.phi[r][c]) for r in range(3) for c in range(3)) < 1e-12
    assert abs(hc.lam) < 1e-12


def test_linear_potential_solves_and_is_ricci_flat():
    rng = np.random.default_rng(53)
    data = HHData(0.7, -1.3, theta="u")
    pts = sample(rng, data, 7)
    rep = hh_residual(data, pts)
    assert rep.solved and rep.max_second < 1e-12
    assert abs(rep.eta[0]) < 1e-12 and abs(rep.eta[1]) < 1e-12
    assert abs(rep.constant) < 1e-12
    hc = hatted_curvature_direct(hh_walker_spec(data), data.factor_spec(), pts[0], order=4)
    assert max(abs(hc.phi[r][c]) for r in range(3) for c in range(3)) < 1e-9
    assert abs(hc.lam) < 1e-9


def test_product_potential_is_exact_solution():
    # hand expansion: the scalar collapses to
    # factor^2 * (4*m*n*u*v + (n*v - m*u)^2) = 1, so the fit constant is one
    rng = np.random.default_rng(59)
    data = HHData(0.7, -1.3, theta="u*v")
    pts = sample(rng, data, 7)
    rep = hh_residual(data, pts)
    assert rep.solved and rep.max_second < 1e-10
    assert rep.constant == pytest.approx(1.0, abs=1e-12)
    assert abs(rep.eta[0]) < 1e-12 and abs(rep.eta[1]) < 1e-12


def test_sum_of_solutions_need_not_solve():
    # the equation is quadratic in the potential: u*v and u^2*v each solve
    # it, their sum does not
    rng = np.random.default_rng(59)
    data = HHData(0.7, -1.3, theta="u*v + 0.5*u^2*v")
    pts = sample(rng, data, 7)
    rep = hh_residual(data, pts)
    assert not rep.solved and rep.max_second > 1.0
    # the curvature identity holds whether or not the equation does
    assert rep.curvature_residual < 1e-7


def test_curvature_identity_across_grid():
    rng = np.random.default_rng(61)
    for theta in ("u*v", "u^2*v", "0.3*u^2*v + 0.2*u*x - 0.1*v*y^2"):
        for mu in (0.0, "x", "0.2*x*y"):
            data = HHData(0.7, -1.3, theta=theta, mu=mu, shat=0.5)
            pts = sample(rng, data, 6)
            rep = hh_residual(data, pts, curvature_checks=2)
            assert rep.curvature_residual < 1e-7


def test_report_needs_enough_points():
    data = HHData(1.0, 1.0)
    with pytest.raises(ValueError):
        hh_residual(data, [(0.3, 0.3, 0.0, 0.0)] * 5)


def test_report_rejects_degenerate_sample():
    data = HHData(1.0, 1.0)
    pts = [(0.2 + 0.05 * i, 0.3 + 0.05 * i, 0.1 * i, 0.0) for i in range(7)]
    with pytest.raises(ValueError):
        hh_residual(data, pts)


def test_lagrangian_zero_for_rank_one_block():
    # with only the constant-curvature term the block squares to zero
    val = hh_lagrangian(HHData(1.0, 1.0, shat=1.2), (0.4, 0.35, 0.1, -0.2))
    assert val == 0.0
