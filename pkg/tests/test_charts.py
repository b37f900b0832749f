"""Chart-change block transform, frame maps, and operator laws."""

import numpy as np
import pytest

from walkergeo.charts import (
    ChartTransform,
    affine_slope_transform,
    commutation_after_transform,
    derived_spec,
    frame_relation,
    operator_transform_check,
    transform_metric_check,
)
from walkergeo.geometry import WalkerSpec

WS = WalkerSpec(a="u*u*y + x", b="v*x*x - u", c="u*v + x*y")
P = (0.23, -0.11, 0.37, 0.41)

IDENT = ChartTransform(((1.0, 0.0), (0.0, 1.0)))
GENERIC = ChartTransform(
    (("2 + x*x", "0.3*x*y"), ("0.1*y", "1 + y*y")),
    (("u*y", "0.2*v"), ("x + y", "0.4*u*x")))


def rand_points(seed, count):
    rng = np.random.default_rng(seed)
    return [tuple(float(t) for t in rng.uniform(-0.45, 0.45, 4))
            for _ in range(count)]


def test_identity_transform_is_trivial():
    tb = transform_metric_check(WS, IDENT, P)
    aj, bj, cj = WS.block(P, 0)
    assert tb.congruence_residual == 0.0
    assert tb.a.value == aj.value
    assert tb.b.value == bj.value
    assert tb.c.value == cj.value


def test_skew_coupling_block_keeps_metric_block():
    ct = ChartTransform(((1.0, 0.0), (0.0, 1.0)), ((0.0, 0.7), (-0.7, 0.0)))
    tb = transform_metric_check(WS, ct, P)
    assert tb.congruence_residual == 0.0
    assert tb.a.value == WS.block(P, 0)[0].value
    assert tb.c.value == WS.block(P, 0)[2].value


def test_diagonal_rescale_constant_block():
    ws = WalkerSpec(a=1.3, b=-0.4, c=0.2)
    ct = ChartTransform(((2.0, 0.0), (0.0, 0.5)))
    tb = transform_metric_check(ws, ct, P)
    assert tb.congruence_residual < 1e-12
    assert tb.a.value == pytest.approx(1.3 / 4.0)
    assert tb.b.value == pytest.approx(-0.4 * 4.0)
    assert tb.c.value == pytest.approx(0.2)


def test_congruence_random_transform():
    for p in rand_points(3, 5):
        tb = transform_metric_check(WS, GENERIC, p, order=2)
        assert tb.congruence_residual < 1e-12


def test_orientation_guard():
    with pytest.raises(ValueError):
        transform_metric_check(WS, ChartTransform(((0.0, 0.0), (0.0, 1.0))), P)
    with pytest.raises(ValueError):
        transform_metric_check(WS, ChartTransform(((-1.0, 0.0), (0.0, 1.0))), P)


def test_derived_spec_matches_pointwise_transform():
    spec = derived_spec(WS, GENERIC)
    for p in rand_points(5, 3):
        tb = transform_metric_check(WS, GENERIC, p)
        aj, bj, cj = spec.block(p, 0)
        assert aj.value == pytest.approx(tb.a.value, rel=1e-12)
        assert bj.value == pytest.approx(tb.b.value, rel=1e-12)
        assert cj.value == pytest.approx(tb.c.value, rel=1e-12)


def test_frame_relation_identity():
    fr = frame_relation(IDENT, WS, WS, P)
    assert fr.root == 1.0
    assert fr.mixing == 0.0
    assert fr.frame_map == ((1.0, 0.0), (0.0, 1.0))
    assert fr.primed_frame_map == ((1.0, 0.0), (0.0, 1.0))


def test_frame_maps_are_unimodular():
    spec = derived_spec(WS, GENERIC)
    for p in rand_points(7, 4):
        fr = frame_relation(GENERIC, WS, spec, p)
        assert fr.root > 0.0
        assert fr.mixing_gap < 1e-10
        assert fr.det_residual < 1e-12


def test_frame_relation_rejects_inconsistent_blocks():
    # feeding the untransformed block as the target spec must trip the
    # cross-term comparison
    with pytest.raises(ValueError):
        frame_relation(GENERIC, WS, WS, P)


def test_operator_laws_identity():
    oc = operator_transform_check(IDENT, WS, "u*v + x*y", P)
    assert oc.plane_residual == 0.0
    assert oc.transverse_residual == 0.0


def test_operator_laws_diagonal():
    ct = ChartTransform(((2.0, 0.0), (0.0, 0.5)))
    oc = operator_transform_check(ct, WS, "u*v", P)
    assert oc.plane_residual < 1e-10
    assert oc.transverse_residual < 1e-10


def test_operator_laws_generic():
    for f in ("u*v", "0.3*u^2*v + x*y*u - 0.2*v*y", "exp(0.2*u) + x*v"):
        for p in rand_points(11, 3):
            oc = operator_transform_check(GENERIC, WS, f, p)
            assert oc.plane_residual < 1e-12
            assert oc.transverse_residual < 1e-10


def test_affine_slope_transport():
    ct = ChartTransform(((2.0, 1.0), (0.0, 0.5)),
                        ((1.3, 0.0), (0.7, 0.0)))
    asl = affine_slope_transform(ct, (0.7, -1.3), P)
    assert asl.slopes[0] == pytest.approx(1.4)
    assert asl.slopes[1] == pytest.approx(0.05)
    # coupling block annihilates the slope covector
    assert asl.kernel_residual < 1e-15


def test_affine_slope_kernel_detects_breakage():
    ct = ChartTransform(((2.0, 0.0), (0.0, 0.5)), ((1.0, 0.0), (0.0, 0.0)))
    asl = affine_slope_transform(ct, (0.7, -1.3), P)
    assert asl.kernel_residual == pytest.approx(0.7)


def test_base_dependent_unimodular_chart():
    # determinant-one block varying over the base pair
    ct = ChartTransform((("exp(x)", 0.0), (0.0, "exp(0 - x)")))
    tb = transform_metric_check(WS, ct, P, order=2)
    assert tb.congruence_residual < 1e-12
    spec = derived_spec(WS, ct)
    fr = frame_relation(ct, WS, spec, P)
    assert fr.root == pytest.approx(1.0, abs=1e-12)


def test_commutation_survives_transform():
    for f in ("u*v + 0.3*x*u", "u^2*y - v*x"):
        assert commutation_after_transform(WS, GENERIC, f, P) < 1e-8
