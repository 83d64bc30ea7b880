"""Outer minimization over m-dimensional affine subspaces.

The slice diameter is minimized by coordinate search over two move families:
plane rotations mixing each frame direction with each complement direction,
and base translations along the complement directions (translations inside
the subspace change nothing).  Both step sizes halve whenever a full sweep
fails to improve.  Between sweeps the base point moves to the midpoint of
the current widest pair, so later moves pivot around the pair rather than
the original center.

The initial subspace is the span of the eigenvectors belonging to the m
smallest eigenvalues of the Hessian at the trust-region center (the last m
coordinate axes when the Hessian is unavailable).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteValue, NonUniqueWarning
from .geometry import AffineSubspace, OptimizingTriple, inner_max_diameter
from .linalg import Frame, complete_frame

__all__ = ["SubspaceIterate", "outer_min_subspace", "level_feasibility", "LevelFeasibility"]


@dataclass(frozen=True)
class SubspaceIterate:
    """One candidate of the outer search."""

    subspace: AffineSubspace
    triple: OptimizingTriple

    @property
    def objective(self):
        return self.triple.diameter


def default_initial_subspace(f, U, m):
    """Negative-eigenspace estimate of the Hessian at the trust center."""
    n = f.dim
    try:
        h = f.hessian(U.center)
        evals, evecs = np.linalg.eigh(0.5 * (h + h.T))
        cols = evecs[:, :m]  # ascending order: m smallest eigenvalues
    except (NonFiniteValue, np.linalg.LinAlgError):
        cols = np.eye(n)[:, n - m:]
    return AffineSubspace.from_span(U.center, cols)


def _rotated(v, comp, i, j, theta):
    """Mix frame column i with complement column j by angle theta."""
    vr = v.copy()
    cr = comp.copy()
    c, s = np.cos(theta), np.sin(theta)
    vr[:, i] = c * v[:, i] + s * comp[:, j]
    cr[:, j] = -s * v[:, i] + c * comp[:, j]
    return vr, cr


def outer_min_subspace(
    f,
    l,
    U,
    m,
    S0=None,
    rng=None,
    rot_step0=np.pi / 16.0,
    rot_step_min=1e-7,
    trans_step0=None,
    max_sweeps=400,
    probe_nonunique=True,
    warm_pair=None,
    inner_kwargs=None,
):
    """Locally minimal slice diameter over subspace rotations and shifts.

    Returns the best :class:`OptimizingTriple` found.  A diameter-0 result
    (empty or degenerate slice) is returned as soon as it appears, since the
    objective cannot drop further.  ``probe_nonunique`` re-solves each
    rotation plane at a fixed probe angle after convergence and warns when a
    visibly different subspace attains the same diameter.  ``warm_pair``
    seeds the initial inner solve (local-driver hook).  ``trans_step0``
    defaults to an eighth of the trust radius.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if not (1 <= m <= f.dim):
        raise ValueError(f"morse index must satisfy 1 <= m <= {f.dim}")
    inner_kwargs = dict(inner_kwargs or {})
    inner_kwargs.pop("warm_pair", None)
    n = f.dim

    if S0 is None:
        S = default_initial_subspace(f, U, m)
    else:
        S = AffineSubspace.from_span(S0.base, S0.frame.columns)
    if S.dim != m:
        raise ValueError("initial subspace dimension does not match the index")

    best = inner_max_diameter(f, S, l, U, rng=rng, warm_pair=warm_pair, **inner_kwargs)
    if best.empty or best.diameter == 0.0:
        return best

    # rotations must beat the inner solve's own accuracy to count as progress
    inner_noise = inner_kwargs.get("polish_tol") or 0.0
    ascent_noise = inner_kwargs.get("ascent_tol") or 0.0
    imp_tol = max(
        1e-12 * (1.0 + best.diameter),
        2.0 * inner_noise,
        10.0 * ascent_noise * (1.0 + best.diameter),
    )
    step = rot_step0
    trans_step = U.radius / 8.0 if trans_step0 is None else float(trans_step0)
    sweeps = 0
    converged = True
    while step >= rot_step_min:
        sweeps += 1
        if sweeps > max_sweeps:
            converged = False
            break
        base = best.midpoint
        v = best.subspace.frame.columns
        comp = complete_frame(Frame(v)).columns[:, m:]
        improved = False
        for i in range(m):
            for j in range(n - m):
                for sign in (1.0, -1.0):
                    vr, cr = _rotated(v, comp, i, j, sign * step)
                    s_try = AffineSubspace(base, Frame(vr))
                    trial = inner_max_diameter(
                        f, s_try, l, U,
                        rng=rng, warm_pair=(best.x, best.y), **inner_kwargs,
                    )
                    if trial.empty or trial.diameter == 0.0:
                        return trial
                    if trial.diameter < best.diameter - imp_tol:
                        best = trial
                        v, comp = vr, cr
                        improved = True
        # shifting inside the subspace changes nothing; search the complement
        for j in range(n - m):
            for sign in (1.0, -1.0):
                shifted = base + sign * trans_step * comp[:, j]
                try:
                    s_try = AffineSubspace(shifted, Frame(v))
                    trial = inner_max_diameter(
                        f, s_try, l, U,
                        rng=rng, warm_pair=(best.x, best.y), **inner_kwargs,
                    )
                except ValueError:  # shifted subspace misses the region
                    continue
                if trial.empty or trial.diameter == 0.0:
                    return trial
                if trial.diameter < best.diameter - imp_tol:
                    best = trial
                    base = shifted
                    improved = True
        if not improved:
            step *= 0.5
            trans_step *= 0.5

    if probe_nonunique and best.diameter > 1e-9:
        _probe_subspace_uniqueness(f, l, U, m, best, rng, inner_kwargs)
    if not converged and best.converged:
        best = _replace_converged(best, False)
    return best


def _replace_converged(triple, flag):
    from dataclasses import replace

    return replace(triple, converged=flag)


def _probe_subspace_uniqueness(f, l, U, m, best, rng, inner_kwargs, probe_angle=0.05):
    n = f.dim
    base = best.midpoint
    v = best.subspace.frame.columns
    comp = complete_frame(Frame(v)).columns[:, m:]
    for i in range(m):
        for j in range(n - m):
            vr, _ = _rotated(v, comp, i, j, probe_angle)
            s_try = AffineSubspace(base, Frame(vr))
            try:
                trial = inner_max_diameter(
                    f, s_try, l, U,
                    rng=rng, warm_pair=(best.x, best.y), **inner_kwargs,
                )
            except ValueError:
                continue
            if not trial.empty and abs(trial.diameter - best.diameter) <= 1e-6 * (
                1.0 + best.diameter
            ):
                warnings.warn(
                    "minimizing subspace appears non-unique: a rotated subspace "
                    "attains the same slice diameter",
                    NonUniqueWarning,
                    stacklevel=3,
                )
                return


@dataclass(frozen=True)
class LevelFeasibility:
    """Outcome of testing one level: empty (diameter ~ 0) or not."""

    is_empty: bool
    diameter: float
    triple: OptimizingTriple


def level_feasibility(f, l, U, m, empty_tol=1e-9, **outer_kwargs):
    """Classify a level by the minimized slice diameter.

    ``Empty`` (diameter <= empty_tol) means no subspace keeps a wide slice
    at this level: the level sits at or above the critical value inside U.
    A positive diameter certifies the level lies below it.
    """
    outer_kwargs.setdefault("probe_nonunique", False)
    triple = outer_min_subspace(f, l, U, m, **outer_kwargs)
    return LevelFeasibility(
        is_empty=triple.diameter <= empty_tol,
        diameter=triple.diameter,
        triple=triple,
    )
