import numpy as np
import numpy.testing as npt
import pytest

from conftest import axis_subspace, ball
from saddlekit.errors import InsufficientData, LowerBoundViolated, SliceEmpty, Unbounded
from saddlekit.geometry import AffineSubspace, OptimizingTriple, inner_max_diameter
from saddlekit.linalg import Frame
from saddlekit.local import (
    classify_gaps,
    estimate_negative_eigenspace,
    fast_local_solve,
    measure_convergence_rate,
    orthogonal_space_lower_bound,
)
from saddlekit.objectives import (
    cubic_saddle_problem,
    failure_3d_problem,
    make_diagonal_quadratic,
    make_perturbed_quadratic,
)
from saddlekit.outer import outer_min_subspace
from saddlekit.trace import SolverTrace, TraceRecord


def principal_angle(frame_a, frame_b):
    """Largest principal angle between two orthonormal column spans."""
    sv = np.linalg.svd(frame_a.T @ frame_b, compute_uv=False)
    return float(np.arccos(np.clip(sv[-1], -1.0, 1.0)))


def trace_from_levels(levels):
    t = SolverTrace()
    for i, l in enumerate(levels):
        t.append(TraceRecord(
            iter=i, l=float(l), u=None, diameter=0.1, kkt_residual=0.0,
            z=np.zeros(2), grad_norm=0.0, ratio=None,
        ))
    return t


class TestOrthogonalSpaceLowerBound:
    def test_positive_definite_through_origin(self):
        f = make_diagonal_quadratic([1.0, 2.0, -1.0])
        s = axis_subspace(3, [2])
        val = orthogonal_space_lower_bound(f, np.zeros(3), s, ball(3, 2.0))
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_one_dimensional_offset(self):
        # restriction to {(0.1 + t, 0.05)} of x1^2 - x2^2 has minimum -0.0025
        f = make_diagonal_quadratic([1.0, -1.0])
        s = axis_subspace(2, [1], base=[0.1, 0.05])
        val = orthogonal_space_lower_bound(f, np.array([0.1, 0.05]), s, ball(2, 2.0))
        assert val == pytest.approx(-0.0025, abs=1e-9)

    def test_concave_restriction_unbounded(self):
        prob = failure_3d_problem()
        base, cols = prob.naive_subspace
        s = AffineSubspace(base, Frame(cols))
        with pytest.raises(Unbounded):
            orthogonal_space_lower_bound(prob.objective, np.zeros(3), s, ball(3, 2.0))

    def test_matrix_norm_lower_bound(self):
        # certified restricted minimum respects the closed-form matrix bound
        # -1/2 |A| (1 + |(V'AV)^-1| |V'| |A|)^2 |z|^2 for the exact quadratic
        f = make_diagonal_quadratic([1.0, -1.0, -3.0])
        a = 2.0 * np.diag([1.0, -1.0, -3.0])
        z = np.array([0.1, 0.2, 0.05])
        s = axis_subspace(3, [1, 2], base=z)
        val = orthogonal_space_lower_bound(f, z, s, ball(3, 2.0))
        v = np.eye(3)[:, [0]]  # complement frame of the downhill plane
        na = np.linalg.norm(a, 2)
        inv = np.linalg.norm(np.linalg.inv(v.T @ a @ v), 2)
        bound = -0.5 * na * (1.0 + inv * 1.0 * na) ** 2 * float(z @ z)
        assert val >= bound
        assert abs(val) <= 10.0 * float(z @ z)


class TestEigenspaceEstimation:
    def _triple_on(self, f, axes, lvl, region, n):
        s = axis_subspace(n, axes)
        return inner_max_diameter(f, s, lvl, region)

    def test_failure_3d_recovers_downhill_plane(self):
        f = failure_3d_problem().objective
        t = self._triple_on(f, [1, 2], -1.0, ball(3, 2.0), 3)
        est = estimate_negative_eigenspace(f, t, -1.0, 2, radius=4.0)
        angle = principal_angle(est.frame.columns, np.eye(3)[:, 1:])
        assert angle <= 1e-6

    def test_index_one_is_pair_direction(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        t = self._triple_on(f, [1], -1.0, ball(2, 2.0), 2)
        est = estimate_negative_eigenspace(f, t, -1.0, 1)
        npt.assert_allclose(np.abs(est.frame.columns[:, 0]), [0.0, 1.0], atol=1e-9)

    def test_perturbation_trend(self):
        # estimated plane approaches the true downhill plane as the
        # perturbation shrinks
        region = ball(3, 2.0)
        angles = []
        for delta in (1e-2, 1e-3, 1e-4):
            h = make_perturbed_quadratic([1.0, -1.0, -3.0], delta)
            t = outer_min_subspace(h, -0.5, region, 2, probe_nonunique=False)
            est = estimate_negative_eigenspace(h, t, -0.5, 2, radius=4.0)
            angles.append(principal_angle(est.frame.columns, np.eye(3)[:, 1:]))
        assert angles[0] > angles[1] > angles[2]

    def test_requires_nonzero_diameter(self):
        f = make_diagonal_quadratic([1.0, -1.0])
        s = axis_subspace(2, [1])
        degenerate = OptimizingTriple(
            subspace=s, x=np.zeros(2), y=np.zeros(2), diameter=0.0, empty=True
        )
        with pytest.raises(ValueError):
            estimate_negative_eigenspace(f, degenerate, -1.0, 1)


class TestFastLocal:
    def test_naive_subspace_unbounded(self):
        prob = failure_3d_problem()
        base, cols = prob.naive_subspace
        s_bad = AffineSubspace(base, Frame(cols))
        with pytest.raises(Unbounded):
            fast_local_solve(
                prob.objective, ball(3, 2.0), 2, -1.0,
                naive_subspace=True, S0=s_bad,
            )

    def test_failure_3d_converges_to_origin(self):
        f = failure_3d_problem().objective
        res = fast_local_solve(f, ball(3, 2.0), 2, -1.0, max_iter=10, tol=1e-14)
        assert res.converged
        assert res.iterations <= 10
        assert abs(res.value_estimate) < 1e-10
        assert np.linalg.norm(res.point_estimate) < 1e-5

    def test_exact_subproblems_converge_in_one_step(self):
        # with forcing off the first pair is symmetric to machine precision,
        # its midpoint is the saddle, and the next level is essentially zero
        f = failure_3d_problem().objective
        res = fast_local_solve(
            f, ball(3, 2.0), 2, -1.0, max_iter=3, tol=0.0, forcing=0.0
        )
        assert abs(res.trace[0].l) < 1e-12
        assert np.linalg.norm(res.trace[0].z) < 1e-8

    def test_levels_monotone_and_below_critical(self):
        f = failure_3d_problem().objective
        res = fast_local_solve(f, ball(3, 2.0), 2, -1.0, max_iter=10, tol=0.0)
        levels = [r.l for r in res.trace]
        assert all(levels[i] <= levels[i + 1] + 1e-15 for i in range(len(levels) - 1))
        assert all(l <= 1e-10 for l in levels)

    def test_cubic_saddle_superlinear(self):
        prob = cubic_saddle_problem()
        res = fast_local_solve(prob.objective, ball(2, 1.5), 1, -0.5, max_iter=10, tol=1e-14)
        assert len(res.trace) >= 4
        rate = measure_convergence_rate(res.trace, true_value=0.0)
        assert rate.classification == "Superlinear"
        assert np.linalg.norm(res.point_estimate) < 1e-4

    def test_invalid_lower_bound_detected(self):
        # no saddle anywhere: the "lower bound" 0.5 exceeds the restricted
        # minimum and the iteration reports it instead of looping
        f = make_diagonal_quadratic([1.0, 1.0])
        with pytest.raises((LowerBoundViolated, SliceEmpty, Unbounded)):
            fast_local_solve(f, ball(2, 2.0), 1, 0.5, max_iter=5)

    def test_midpoint_contraction(self):
        h = make_perturbed_quadratic([1.0, -1.0, -3.0], 1e-3)
        res = fast_local_solve(h, ball(3, 1.5), 2, -0.3, max_iter=8, tol=1e-13)
        final = res.trace[-1]
        prev_level = res.trace[-2].l if len(res.trace) > 1 else -0.3
        assert float(final.z @ final.z) / abs(prev_level) < 0.1

    def test_rotated_coordinates(self, rng):
        # nothing may depend on axis alignment of the eigenvectors
        from saddlekit.objectives import ObjectiveFunction

        base = make_diagonal_quadratic([1.0, -1.0, -3.0])
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        f = ObjectiveFunction(
            dim=3,
            f=lambda x: base.value(q @ x),
            grad=lambda x: q.T @ base.gradient(q @ x),
            hess=lambda x: q.T @ base.hessian(q @ x) @ q,
        )
        res = fast_local_solve(f, ball(3, 2.0), 2, -1.0, max_iter=10, tol=1e-14)
        assert res.converged
        assert abs(res.value_estimate) < 1e-10
        rate = measure_convergence_rate(res.trace, true_value=0.0)
        assert rate.classification == "Superlinear"


class TestRateMeasurement:
    def test_geometric_is_linear(self):
        gaps = [1.0, 0.5, 0.25, 0.125]
        ratios, label = classify_gaps(gaps)
        assert label == "Linear"
        npt.assert_allclose(ratios, 0.5)

    def test_superlinear_sequence(self):
        ratios, label = classify_gaps([1.0, 1e-1, 1e-3, 1e-7])
        assert label == "Superlinear"
        npt.assert_allclose(ratios, [1e-1, 1e-2, 1e-4])

    def test_stalled_sequence(self):
        _, label = classify_gaps([1.0, 0.99, 0.985, 0.984])
        assert label == "Stalled"

    def test_requires_four_records(self):
        with pytest.raises(InsufficientData):
            measure_convergence_rate(trace_from_levels([-1.0, -0.5]))

    def test_levels_against_true_value(self):
        t = trace_from_levels([-1e-1, -1e-3, -1e-7, -1e-15])
        rate = measure_convergence_rate(t, true_value=0.0)
        assert rate.classification == "Superlinear"

    def test_aitken_reference(self):
        # geometric decay: the extrapolated limit recovers 0 well enough to
        # classify the rate as linear at ratio 1/2
        levels = [-(0.5**i) for i in range(8)]
        rate = measure_convergence_rate(trace_from_levels(levels))
        assert rate.classification == "Linear"
        assert rate.mean_ratio == pytest.approx(0.5, abs=0.02)

    def test_bracket_trace_uses_widths(self):
        t = SolverTrace()
        lo, hi = -1.0, 1.0
        for i in range(6):
            hi = 0.5 * (lo + hi)
            t.append(TraceRecord(
                iter=i, l=lo, u=hi, diameter=1.0, kkt_residual=0.0,
                z=np.zeros(1), grad_norm=0.0, ratio=0.5,
            ))
        rate = measure_convergence_rate(t)
        assert rate.classification == "Linear"
        assert rate.mean_ratio == pytest.approx(0.5, abs=1e-12)
