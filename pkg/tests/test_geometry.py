import warnings

import numpy as np
import numpy.testing as npt
import pytest

from conftest import axis_subspace, ball, span_subspace
from saddlekit.errors import BadSignature, NonUniqueWarning, SliceEmpty, ZeroGradient
from saddlekit.geometry import (
    AffineSubspace,
    TrustRegion,
    brute_force_diameter,
    closest_point_on_slice,
    inner_max_diameter,
    isosceles_min_segment,
    isosceles_segment_length,
    opposite_gradient_residual,
    quadratic_minmax_exact,
)
from saddlekit.linalg import Frame
from saddlekit.objectives import (
    ObjectiveFunction,
    failure_3d_problem,
    four_lines_function,
    make_diagonal_quadratic,
    make_perturbed_quadratic,
)


def golden_section_min(fun, lo, hi, tol=1e-10):
    """Independent 1-d minimization oracle."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


class TestInnerMaxDiameter:
    def test_saddle_slice_pair(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        s = axis_subspace(2, [1])
        t = inner_max_diameter(f, s, -1.0, ball(2, 2.0))
        assert t.diameter == pytest.approx(2.0, abs=1e-9)
        pair = {tuple(np.round(t.x, 6)), tuple(np.round(t.y, 6))}
        assert pair == {(0.0, 1.0), (0.0, -1.0)}
        assert t.kkt_residual <= 1e-6
        assert t.converged and not t.empty and not t.non_unique

    def test_degenerate_point_slice(self):
        # at the critical level the slice on the downhill axis is one point
        f = make_diagonal_quadratic([1.0, -1.0])
        t = inner_max_diameter(f, axis_subspace(2, [1]), 0.0, ball(2, 2.0))
        assert t.diameter <= 3e-6

    def test_empty_slice(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        t = inner_max_diameter(f, axis_subspace(2, [1]), 0.5, ball(2, 2.0))
        assert t.empty and t.diameter == 0.0

    def test_isotropic_disc_non_unique(self):
        prob = failure_3d_problem()
        base, cols = prob.naive_subspace
        s = AffineSubspace(base, Frame(cols))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            t = inner_max_diameter(prob.objective, s, -1.0, ball(3, 2.0))
        assert t.diameter == pytest.approx(2.0, abs=1e-9)
        assert t.non_unique
        assert any(issubclass(w.category, NonUniqueWarning) for w in caught)

    def test_ellipse_unique_pair(self):
        f = make_diagonal_quadratic([1.0, -1.0, -3.0])
        t = inner_max_diameter(f, axis_subspace(3, [1, 2]), -1.0, ball(3, 2.0))
        assert t.diameter == pytest.approx(2.0, abs=1e-9)
        assert not t.non_unique
        assert t.kkt_residual <= 1e-6
        # the pair sits on the axis of the least negative coefficient
        assert abs(t.x[1]) == pytest.approx(1.0, abs=1e-6)

    def test_warm_start(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        s = axis_subspace(2, [1])
        warm = (np.array([0.0, 0.8]), np.array([0.0, -0.9]))
        t = inner_max_diameter(f, s, -1.0, ball(2, 2.0), warm_pair=warm)
        assert t.diameter == pytest.approx(2.0, abs=1e-9)

    def test_swap_invariance(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        s = axis_subspace(2, [1])
        t = inner_max_diameter(f, s, -1.0, ball(2, 2.0))
        r1 = opposite_gradient_residual(f, t.x, t.y).residual
        r2 = opposite_gradient_residual(f, t.y, t.x).residual
        assert r1 == pytest.approx(r2, abs=1e-14)
        assert np.linalg.norm(t.x - t.y) == pytest.approx(t.diameter, abs=1e-12)

    def test_boundary_hit_flag(self):
        # slice wider than the trust region: the pair pins to the ball
        f = make_diagonal_quadratic([1.0, -1.0])
        t = inner_max_diameter(f, axis_subspace(2, [1]), -9.0, ball(2, 2.0))
        assert t.boundary_hit
        assert t.diameter == pytest.approx(4.0, abs=1e-6)

    def test_no_intersection_raises(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        s = axis_subspace(2, [1], base=[5.0, 0.0])
        with pytest.raises(ValueError):
            inner_max_diameter(f, s, -1.0, ball(2, 2.0))

    def test_envelope_diameter_sandwich(self):
        # on a coefficient-perturbed quadratic the slice diameter stays
        # between the closed forms of the two envelope halves
        coeffs = np.array([1.0, -1.0, -3.0])
        delta = 1e-2
        h = make_perturbed_quadratic(coeffs, delta)
        lvl = -0.5
        t = inner_max_diameter(h, axis_subspace(3, [1, 2]), lvl, ball(3, 2.0))
        lo = 2.0 * np.sqrt(lvl / (coeffs[1] - delta))
        hi = 2.0 * np.sqrt(lvl / (coeffs[1] + delta))
        assert lo - 1e-9 <= t.diameter <= hi + 1e-9


class TestClosestPoint:
    def test_downhill_axis(self):
        f = make_diagonal_quadratic([1.0, -1.0, -3.0])
        p = closest_point_on_slice(f, np.zeros(3), -1.0, axis_subspace(3, [2]))
        assert np.linalg.norm(p) == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-9)
        assert abs(p[2]) == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-9)

    def test_already_inside(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        z = np.array([0.0, 2.0])  # f = -4 <= -1
        p = closest_point_on_slice(f, z, -1.0, axis_subspace(2, [1], base=z))
        npt.assert_array_equal(p, z)

    def test_distance_two(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        p = closest_point_on_slice(f, np.zeros(2), -4.0, axis_subspace(2, [1]))
        assert np.linalg.norm(p) == pytest.approx(2.0, abs=1e-9)

    def test_slice_empty(self):
        f = make_diagonal_quadratic([1.0, 1.0])  # positive definite
        with pytest.raises(SliceEmpty):
            closest_point_on_slice(f, np.zeros(2), -1.0, axis_subspace(2, [1]), radius=3.0)

    def test_off_subspace_query_rejected(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        with pytest.raises(ValueError):
            closest_point_on_slice(f, np.array([1.0, 0.0]), -1.0, axis_subspace(2, [1]))


class TestOppositeGradientCertificate:
    def test_symmetric_pair_residual_zero(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        cert = opposite_gradient_residual(f, np.array([0.0, 1.0]), np.array([0.0, -1.0]))
        assert cert.residual <= 1e-14
        assert cert.lambda1 == pytest.approx(2.0)
        assert cert.lambda2 == pytest.approx(2.0)
        assert cert.lambda3 == pytest.approx(0.0, abs=1e-14)
        assert cert.lambda4 == pytest.approx(0.0, abs=1e-14)

    def test_four_lines_pair_fails_certificate(self):
        f = four_lines_function().objective
        x = np.array([1.0, 0.0, 0.0])
        y = np.array([-1.0, 0.0, 0.0])
        cert = opposite_gradient_residual(f, x, y)
        # expected value from the known gradients (-8/3, 0, 8/3), (8/3, 0, 8/3)
        expected = 2.0 * np.linalg.norm(
            np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0) - np.array([-1.0, 0.0, 0.0])
        )
        assert cert.residual == pytest.approx(expected, abs=1e-12)
        assert cert.residual > 0.7

    def test_zero_gradient_raises(self):
        f = ObjectiveFunction(dim=2, f=lambda x: 1.0, grad=lambda x: np.zeros(2))
        with pytest.raises(ZeroGradient):
            opposite_gradient_residual(f, np.zeros(2), np.ones(2))

    def test_coincident_points_rejected(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        with pytest.raises(ValueError):
            opposite_gradient_residual(f, np.ones(2), np.ones(2))


class TestIsosceles:
    def test_right_angle_bisector(self):
        assert isosceles_min_segment(np.pi / 4.0, 1.0) == pytest.approx(np.pi / 4.0)

    def test_thirty_degrees(self):
        assert isosceles_min_segment(np.pi / 6.0, 2.5) == pytest.approx(np.pi / 3.0)

    @pytest.mark.parametrize("alpha", [0.3, np.pi / 4.0, 1.2])
    def test_against_golden_section(self, alpha):
        d = 1.7
        theta_opt = isosceles_min_segment(alpha, d)
        lo, hi = 1e-6, np.pi - 2.0 * alpha - 1e-6
        theta_num = golden_section_min(lambda t: isosceles_segment_length(alpha, d, t), lo, hi)
        assert theta_num == pytest.approx(theta_opt, abs=1e-6)

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            isosceles_min_segment(0.0, 1.0)
        with pytest.raises(ValueError):
            isosceles_min_segment(np.pi / 4.0, -1.0)


class TestQuadraticMinmaxExact:
    def test_two_dim(self):
        t = quadratic_minmax_exact([1.0, -1.0], -1.0)
        assert t.diameter == pytest.approx(2.0)
        npt.assert_allclose(t.x, [0.0, 1.0])
        npt.assert_allclose(t.y, [0.0, -1.0])

    def test_three_dim(self):
        t = quadratic_minmax_exact([1.0, -1.0, -3.0], -0.25)
        assert t.diameter == pytest.approx(1.0)
        assert t.subspace.dim == 2

    def test_level_to_zero_limit(self):
        d_prev = np.inf
        for lvl in (-1e-2, -1e-4, -1e-6):
            d = quadratic_minmax_exact([2.0, -5.0], lvl).diameter
            assert d < d_prev
            d_prev = d
        assert d_prev < 1e-3

    def test_signature_validation(self):
        with pytest.raises(BadSignature):
            quadratic_minmax_exact([1.0, 2.0, -1.0], -1.0)  # not descending
        with pytest.raises(BadSignature):
            quadratic_minmax_exact([1.0, 0.0, -1.0], -1.0)  # zero entry
        with pytest.raises(BadSignature):
            quadratic_minmax_exact([3.0, 2.0, 1.0], -1.0)  # no negative block
        with pytest.raises(ValueError):
            quadratic_minmax_exact([1.0, -1.0], 0.5)  # level not negative


class TestBruteForce:
    def test_matches_exact_formula(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        t = brute_force_diameter(f, axis_subspace(2, [1]), -1.0, ball(2, 2.0), 128)
        assert abs(t.diameter - 2.0) <= 2.0 * (4.0 / 128.0)

    def test_empty_slice(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        t = brute_force_diameter(f, axis_subspace(2, [1]), 0.5, ball(2, 2.0), 64)
        assert t.empty and t.diameter == 0.0

    def test_cross_validates_inner_solver(self):
        prob = failure_3d_problem()
        base, cols = prob.naive_subspace
        s = AffineSubspace(base, Frame(cols))
        region = ball(3, 2.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            t_inner = inner_max_diameter(prob.objective, s, -1.0, region)
        t_bf = brute_force_diameter(prob.objective, s, -1.0, region, 64)
        grid_tol = 2.0 * np.sqrt(2.0) * (2.0 * 2.0 / 63.0)
        assert abs(t_inner.diameter - t_bf.diameter) <= grid_tol
        assert t_inner.diameter >= t_bf.diameter - 1e-9

    def test_validation(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        with pytest.raises(ValueError):
            brute_force_diameter(f, axis_subspace(2, [1]), -1.0, ball(2, 2.0), 16)


class TestContainers:
    def test_trust_region_validation(self):
        with pytest.raises(ValueError):
            TrustRegion(np.zeros(2), 0.0)
        with pytest.raises(ValueError):
            TrustRegion(np.zeros(2), float("inf"))

    def test_subspace_roundtrip(self, rng):
        s = span_subspace([1.0, 2.0, 3.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0])
        w = rng.standard_normal(2)
        p = s.from_local(w)
        npt.assert_allclose(s.to_local(p), w, atol=1e-12)
        assert s.contains(p)
        assert not s.contains(p + np.array([1.0, 0.0, -1.0]))

    def test_base_dimension_check(self):
        with pytest.raises(ValueError):
            AffineSubspace(np.zeros(2), Frame(np.eye(3)[:, :1]))
