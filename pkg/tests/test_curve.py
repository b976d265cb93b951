"""Kernel polynomial, discriminants, branch points and curve tracing."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import qpwalk as q
from qpwalk.curve import (
    boundary_h,
    boundary_v,
    disc_x_coeffs,
    disc_y_coeffs,
    quartic_real_roots,
    x_quadratic,
    y_quadratic,
)
from qpwalk.errors import ComplexRoots, EmptyComponent, InconsistentSingularity

from conftest import random_walk, product_form_walk


# --- kernel polynomial ---


def test_kernel_coefficients_fig2a(fig2a):
    # Q(x,y) = (3/5) x^2 y^2 + (1/5) y + (1/5) x - x y
    ker = q.kernel(fig2a)
    c = ker.c
    assert c[2, 2] == pytest.approx(0.6, abs=1e-15)
    assert c[0, 1] == pytest.approx(0.2, abs=1e-15)
    assert c[1, 0] == pytest.approx(0.2, abs=1e-15)
    assert c[1, 1] == pytest.approx(-1.0, abs=1e-15)
    for idx in ((0, 0), (2, 0), (0, 2), (1, 2), (2, 1)):
        assert c[idx] == 0.0


def test_kernel_coefficients_fig2d(fig2d):
    # Q(x,y) = x^2/4 + y^2/4 + x^2 y^2 / 2 - x y
    ker = q.kernel(fig2d)
    c = ker.c
    assert c[2, 0] == pytest.approx(0.25, abs=1e-15)
    assert c[0, 2] == pytest.approx(0.25, abs=1e-15)
    assert c[2, 2] == pytest.approx(0.5, abs=1e-15)
    assert c[1, 1] == pytest.approx(-1.0, abs=1e-15)


def test_kernel_coefficient_layout():
    rng = np.random.default_rng(21)
    spec = random_walk(rng)
    c = q.kernel(spec).c
    for a in range(3):
        for b in range(3):
            if (a, b) == (1, 1):
                assert c[a, b] == spec.p(0, 0) - 1.0
            else:
                assert c[a, b] == spec.p(1 - a, 1 - b)


def test_kernel_vanishes_at_one_one():
    rng = np.random.default_rng(22)
    for _ in range(25):
        ker = q.kernel(random_walk(rng))
        assert abs(ker.value(1.0, 1.0)) <= 1e-14 * ker.scale


def test_kernel_value_broadcasts(fig2d):
    ker = q.kernel(fig2d)
    xs = np.array([0.2, 0.5, 1.0])
    vals = ker.value(xs, 0.5)
    assert vals.shape == (3,)
    assert vals[2] == pytest.approx(ker.value(1.0, 0.5))


# --- quadratic sections ---


def test_y_quadratic_fig2d_at_one(fig2d):
    A, B, C = y_quadratic(q.kernel(fig2d), 1.0)
    assert (A, B, C) == pytest.approx((0.75, -1.0, 0.25), abs=1e-15)


def test_y_quadratic_fig2a_at_zero(fig2a):
    A, B, C = y_quadratic(q.kernel(fig2a), 0.0)
    assert (A, B, C) == pytest.approx((0.0, 0.2, 0.0), abs=1e-15)


@given(x=st.floats(0.01, 1.5), y=st.floats(0.01, 1.5))
def test_quadratic_sections_reproduce_kernel(x, y):
    rng = np.random.default_rng(23)
    spec = random_walk(rng)
    ker = q.kernel(spec)
    A, B, C = y_quadratic(ker, x)
    direct = ker.value(x, y)
    assert A * y * y + B * y + C == pytest.approx(direct, abs=1e-13 * ker.scale)
    A2, B2, C2 = x_quadratic(ker, y)
    assert A2 * x * x + B2 * x + C2 == pytest.approx(direct, abs=1e-13 * ker.scale)


def test_x_quadratic_is_y_quadratic_of_transpose():
    rng = np.random.default_rng(24)
    spec = random_walk(rng)
    for z in (0.1, 0.6, 1.0):
        a = x_quadratic(q.kernel(spec), z)
        b = y_quadratic(q.kernel(spec.transpose()), z)
        assert a == pytest.approx(b, abs=1e-15)


# --- discriminants ---


def test_disc_y_fig2d_exact(fig2d):
    # Delta_y(x) = x^2 (3/4 - x^2/2)
    coeffs = disc_y_coeffs(q.kernel(fig2d))
    assert np.allclose(coeffs, [0.0, 0.0, 0.75, 0.0, -0.5], atol=1e-15)


def test_disc_matches_pointwise_evaluation():
    rng = np.random.default_rng(25)
    spec = random_walk(rng)
    ker = q.kernel(spec)
    dy = disc_y_coeffs(ker)
    dx = disc_x_coeffs(ker)
    for z in np.linspace(0.05, 1.4, 7):
        A, B, C = y_quadratic(ker, z)
        assert np.polyval(dy[::-1], z) == pytest.approx(B * B - 4 * A * C, rel=1e-12, abs=1e-14)
        A, B, C = x_quadratic(ker, z)
        assert np.polyval(dx[::-1], z) == pytest.approx(B * B - 4 * A * C, rel=1e-12, abs=1e-14)


def test_disc_degree_at_most_four():
    rng = np.random.default_rng(26)
    for _ in range(5):
        assert len(disc_y_coeffs(q.kernel(random_walk(rng)))) == 5


# --- quartic root finder ---


def test_quartic_known_roots():
    # (x - 0.3)(x - 0.8)(x - 1.25)(x - 2.0), expanded
    roots = [0.3, 0.8, 1.25, 2.0]
    coeffs = np.poly(roots)[::-1]  # ascending order
    found, n_inf = quartic_real_roots(tuple(coeffs))
    assert n_inf == 0
    assert found == pytest.approx(sorted(roots), rel=1e-9)


def test_quartic_degree_drop_reports_roots_at_infinity():
    # cubic disguised as a quartic: leading coefficient zero
    roots = [0.2, 0.7, 1.5]
    coeffs = list(np.poly(roots)[::-1]) + [0.0]
    found, n_inf = quartic_real_roots(tuple(coeffs))
    assert n_inf == 1
    assert len(found) == 3
    assert found == pytest.approx(sorted(roots), rel=1e-9)


def test_quartic_rejects_complex_pairs():
    with pytest.raises(ComplexRoots):
        quartic_real_roots((1.0, 0.0, 0.0, 0.0, 1.0))  # x^4 + 1


def test_quartic_repeated_root():
    coeffs = np.poly([0.5, 0.5, 1.2, 2.0])[::-1]
    found, n_inf = quartic_real_roots(tuple(coeffs))
    assert n_inf == 0
    assert found[0] == pytest.approx(0.5, abs=1e-6)
    assert found[1] == pytest.approx(0.5, abs=1e-6)


# --- branch points ---


def test_branch_points_fig2c_closed_form(fig2c):
    rep = q.branch_points(fig2c)
    x_l = math.sqrt((27.0 - math.sqrt(645.0)) / 42.0)
    x_r = math.sqrt((27.0 + math.sqrt(645.0)) / 42.0)
    assert rep.x_l == pytest.approx(x_l, abs=1e-12)
    assert rep.x_r == pytest.approx(x_r, abs=1e-12)


def test_branch_points_fig2d_report(fig2d):
    rep = q.branch_points(fig2d)
    assert rep.roots_x == pytest.approx((-math.sqrt(1.5), 0.0, 0.0, math.sqrt(1.5)), abs=1e-12)
    assert rep.x_l == pytest.approx(0.0, abs=1e-12)
    assert rep.x_r == pytest.approx(math.sqrt(1.5), abs=1e-12)
    assert rep.case_x_inner == "b"
    assert rep.case_x_outer == "c"
    assert rep.consistent_x and rep.consistent_y
    # corners: two at the origin crossing, two on the outer rim
    assert rep.corners[2][0] == pytest.approx(math.sqrt(1.5), abs=1e-12)
    assert rep.corners[2][1] == pytest.approx(math.sqrt(1.5) / 2.0, abs=1e-12)


def test_branch_points_fig2b_unit_root(fig2b):
    # zero vertical drift puts a discriminant root exactly at 1
    rep = q.branch_points(fig2b)
    roots = rep.roots_x
    assert roots[2] == pytest.approx(1.0, abs=1e-8)
    assert roots[0] == pytest.approx(0.15240294919944813, abs=1e-10)
    assert roots[1] == pytest.approx(0.41009705080055203, abs=1e-10)
    assert math.isinf(roots[3])
    assert rep.x_l == pytest.approx(roots[1], abs=1e-12)
    assert rep.x_r == pytest.approx(1.0, abs=1e-8)
    assert rep.consistent_x


def test_branch_points_interval_brackets_one():
    rng = np.random.default_rng(27)
    for _ in range(20):
        spec = random_walk(rng, neg_drift=True)
        rep = q.branch_points(spec)
        assert 0.0 <= rep.x_l < 1.0 < rep.x_r
        assert 0.0 <= rep.y_b < 1.0 < rep.y_t


def test_branch_point_labels_carry_modulus():
    rng = np.random.default_rng(28)
    rep = q.branch_points(random_walk(rng))
    for lab in rep.labels_x:
        d = lab.to_dict()
        assert set(d) >= {"value", "modulus", "sign"}


def test_report_to_dict_round_trips_floats(fig2c):
    d = q.branch_points(fig2c).to_dict()
    assert set(d) >= {"roots_x", "roots_y", "labels", "interval", "corners"}
    assert d["interval"]["x_l"] == pytest.approx(q.branch_points(fig2c).x_l)


# --- singularity detection ---


def test_singularity_on_switch(switch):
    assert q.detect_singularity(switch) == (0.0, 0.0)


def test_singularity_on_fig2d(fig2d):
    assert q.detect_singularity(fig2d) == (0.0, 0.0)


@pytest.mark.parametrize("name", ["fig2a", "fig2b", "fig2c"])
def test_no_singularity_on_generic_presets(name):
    assert q.detect_singularity(q.presets.load(name)) is None


def test_singularity_symbolic_numeric_disagreement():
    rng = np.random.default_rng(29)
    spec = random_walk(rng, forced=True)
    w = spec.interior.copy()
    w[1, 2] = 1e-13  # nonzero symbolically, zero numerically
    w[1, 1] -= 1e-13
    tweaked = q.WalkSpec(w, spec.horizontal, spec.vertical)
    with pytest.raises(InconsistentSingularity):
        q.detect_singularity(tweaked)


def test_forced_class_always_crosses_at_origin():
    rng = np.random.default_rng(30)
    for _ in range(50):
        spec = random_walk(rng, forced=True)
        assert q.detect_singularity(spec) == (0.0, 0.0)


# --- tracing ---


def test_trace_fig2a_structure(fig2a):
    tr = q.trace_qplus(fig2a, 2048)
    assert len(tr.points) >= 2048
    assert set(tr.arcs) == {"Q00", "Q10", "Q11", "Q01"}
    ker = q.kernel(fig2a)
    res = np.abs(ker.value(tr.points[:, 0], tr.points[:, 1])) / ker.scale
    assert res.max() <= 1e-10
    rep = tr.report
    assert tr.points[:, 0].min() == pytest.approx(rep.x_l, abs=1e-9)
    assert tr.points[:, 0].max() == pytest.approx(rep.x_r, abs=1e-9)


def test_trace_starts_at_left_corner_with_y_decreasing(fig2a):
    tr = q.trace_qplus(fig2a, 512)
    first = tr.arc_points("Q00")
    assert first[0, 0] == pytest.approx(tr.report.x_l, abs=1e-9)
    assert first[1, 1] <= first[0, 1] + 1e-12


def test_trace_touches_one_one(fig2b):
    tr = q.trace_qplus(fig2b, 512)
    d = np.hypot(tr.points[:, 0] - 1.0, tr.points[:, 1] - 1.0).min()
    assert d <= 1e-9


def test_trace_singular_walk_raises(fig2d):
    w = np.zeros((3, 3))
    w[2] = (0.2, 0.2, 0.1)
    w[1] = (0.2, 0.1, 0.2)
    spec = q.WalkSpec(w, w[:, 0] + w[:, 1], w[1] + w[0])
    with pytest.raises(q.errors.SingularWalk):
        q.trace_qplus(spec, 256)


def test_trace_point_count_scales(fig2c):
    small = q.trace_qplus(fig2c, 256)
    big = q.trace_qplus(fig2c, 1024)
    assert len(big.points) > len(small.points)


# --- axis boundary polynomials and seeds ---


def test_boundary_polynomials_vanish_on_product_form():
    rng = np.random.default_rng(31)
    for _ in range(10):
        spec, rho, sigma = product_form_walk(rng)
        assert abs(boundary_h(spec, rho, sigma)) <= 1e-14
        assert abs(boundary_v(spec, rho, sigma)) <= 1e-14
        ker = q.kernel(spec)
        assert abs(ker.value(rho, sigma)) <= 1e-13 * ker.scale


def test_switch_seed_coordinates(switch_seeds):
    assert [s.which for s in switch_seeds] == ["H", "V"]
    h, v = switch_seeds
    assert h.x == pytest.approx(162.0 / 437.0, abs=1e-12)
    assert h.y == pytest.approx(0.1528279001512407, abs=1e-12)
    assert v.x == pytest.approx(0.21886727713323773, abs=1e-12)
    assert v.y == pytest.approx(63.0 / 88.0, abs=1e-12)


def test_seeds_lie_on_curve_and_named_boundary(switch, switch_seeds):
    ker = q.kernel(switch)
    for s in switch_seeds:
        assert abs(ker.value(s.x, s.y)) <= 1e-10 * ker.scale
        poly = boundary_h if s.which == "H" else boundary_v
        assert abs(poly(switch, s.x, s.y)) <= 1e-10
        assert 0.0 < s.x < 1.0 and 0.0 < s.y < 1.0


def test_seed_dicts_are_serializable(switch_seeds):
    d = switch_seeds[0].to_dict()
    assert d["which"] == "H"
    assert isinstance(d["x"], float)
