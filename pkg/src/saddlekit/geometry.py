"""Geometry of affine slices of level sets.

The central object is the slice S ∩ {f >= l} ∩ U of a superlevel set by an
affine subspace S inside a trust region U.  This module provides

* :func:`inner_max_diameter` -- the widest pair of points on a slice,
  computed by alternating two-point ascent with multi-start seeding and a
  Newton polish of the active-set optimality system,
* :func:`closest_point_on_slice` -- nearest point of a sublevel set on an
  affine subspace,
* :func:`opposite_gradient_residual` -- the checkable first-order optimality
  certificate for a widest pair (anti-parallel gradients),
* :func:`brute_force_diameter` -- a dense-grid oracle for cross-validation
  at slice dimension <= 3,
* small exact helpers used by the test corpus.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSignature, NonUniqueWarning, SliceEmpty, ZeroGradient
from .kernels import max_separation_pair
from .linalg import Frame, orthonormalize
from .newton import trust_region_minimize

__all__ = [
    "AffineSubspace",
    "TrustRegion",
    "OptimizingTriple",
    "KKTCertificate",
    "inner_max_diameter",
    "closest_point_on_slice",
    "opposite_gradient_residual",
    "isosceles_min_segment",
    "isosceles_segment_length",
    "quadratic_minmax_exact",
    "brute_force_diameter",
]


@dataclass(frozen=True)
class AffineSubspace:
    """Affine set {base + V w} with an orthonormal frame V."""

    base: np.ndarray
    frame: Frame

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        object.__setattr__(self, "base", base)
        if base.shape != (self.frame.ambient_dim,):
            raise ValueError("base point dimension does not match frame")

    @classmethod
    def from_span(cls, base, vectors):
        """Subspace through ``base`` spanned by the given (n, k) columns."""
        return cls(np.asarray(base, dtype=float), orthonormalize(np.asarray(vectors, dtype=float)))

    @property
    def dim(self):
        return self.frame.frame_dim

    @property
    def ambient_dim(self):
        return self.frame.ambient_dim

    def to_local(self, x):
        return self.frame.columns.T @ (np.asarray(x, dtype=float) - self.base)

    def from_local(self, w):
        return self.base + self.frame.columns @ np.asarray(w, dtype=float)

    def project(self, x):
        return self.from_local(self.to_local(x))

    def contains(self, x, tol=1e-8):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x))) <= tol


@dataclass(frozen=True)
class TrustRegion:
    """Closed ball confining all slice computations."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", center)
        if not np.isfinite(self.radius) or self.radius <= 0.0:
            raise ValueError("trust region radius must be positive and finite")

    def contains(self, x, tol=0.0):
        return float(np.linalg.norm(np.asarray(x, float) - self.center)) <= self.radius + tol

    def boundary_distance(self, x):
        return self.radius - float(np.linalg.norm(np.asarray(x, float) - self.center))


@dataclass(frozen=True)
class OptimizingTriple:
    """Subspace plus the separation-realizing pair on its slice."""

    subspace: AffineSubspace
    x: np.ndarray
    y: np.ndarray
    diameter: float
    empty: bool = False
    converged: bool = True
    boundary_hit: bool = False
    non_unique: bool = False
    kkt_residual: float = field(default=float("nan"))

    @property
    def midpoint(self):
        return 0.5 * (self.x + self.y)


@dataclass(frozen=True)
class KKTCertificate:
    """Multipliers and residual of the widest-pair stationarity system."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    residual: float


class _SliceProblem:
    """Local coordinates of S ∩ U: phi(w) = f(base + V w) on a k-ball."""

    def __init__(self, fn, subspace, region):
        self.fn = fn
        self.subspace = subspace
        self.v = subspace.frame.columns
        self.base = subspace.base
        d = region.center - self.base
        wc = self.v.T @ d
        perp = d - self.v @ wc
        rad2 = region.radius**2 - float(perp @ perp)
        if rad2 <= 0.0:
            raise ValueError("subspace does not intersect the trust region")
        self.wc = wc
        self.rloc = float(np.sqrt(rad2))

    def phi(self, w):
        return self.fn.value(self.base + self.v @ w)

    def gphi(self, w):
        return self.v.T @ self.fn.gradient(self.base + self.v @ w)

    def hphi(self, w):
        return self.v.T @ self.fn.hessian(self.base + self.v @ w) @ self.v

    def ambient(self, w):
        return self.base + self.v @ w

    def clip(self, w):
        d = w - self.wc
        nd = float(np.linalg.norm(d))
        if nd <= self.rloc:
            return w
        return self.wc + (self.rloc / nd) * d


def _pull_to_level(sp, w, l, feas_tol, max_steps=80, v0=None):
    """Move ``w`` onto phi >= l via Newton steps along the gradient."""
    v = (sp.phi(w) - l) if v0 is None else v0
    for _ in range(max_steps):
        if v >= -feas_tol:
            return w
        g = sp.gphi(w)
        g2 = float(g @ g)
        if g2 < 1e-300:
            return None
        w = sp.clip(w - (v / g2) * g)
        v = sp.phi(w) - l
    return None if v < -feas_tol else w


def _ray_span(sp, anchor, u):
    """Largest t >= 0 with anchor + t*u still inside the local ball."""
    d = anchor - sp.wc
    b = 2.0 * float(u @ d)
    c = float(d @ d) - sp.rloc**2
    disc = max(b * b - 4.0 * c, 0.0)
    return max((-b + np.sqrt(disc)) / 2.0, 0.0)


def _farthest_feasible_on_ray(sp, l, anchor, u, feas_tol):
    """Farthest point with phi >= l along anchor + t*u, refined by bisection.

    Samples mix a uniform and a geometric grid so that slices many orders of
    magnitude smaller than the ball are still detected.
    """
    tmax = _ray_span(sp, anchor, u)
    if tmax <= 0.0:
        return anchor.copy()
    ts = np.unique(np.concatenate([
        np.linspace(0.0, tmax, 17),
        np.geomspace(1e-9 * tmax, tmax, 17),
    ]))
    idx = None
    for i in range(ts.size - 1, -1, -1):
        if sp.phi(anchor + ts[i] * u) >= l - feas_tol:
            idx = i
            break
    if idx is None or ts[idx] == 0.0:
        return anchor.copy()
    if idx == ts.size - 1:
        return anchor + ts[idx] * u
    lo, hi = ts[idx], ts[idx + 1]
    for _ in range(60):
        if hi - lo <= 1e-13 * (1.0 + hi):
            break
        mid = 0.5 * (lo + hi)
        if sp.phi(anchor + mid * u) >= l - feas_tol:
            lo = mid
        else:
            hi = mid
    return anchor + lo * u


def _find_feasible(sp, l, feas_tol, rng):
    """Any point of the slice, or None when phi stays below l on the ball."""
    if sp.phi(sp.wc) >= l - feas_tol:
        return sp.wc.copy()
    seeds = [sp.wc.copy()]
    k = sp.wc.size
    for _ in range(2):
        u = rng.standard_normal(k)
        nu = np.linalg.norm(u)
        if nu > 0.0:
            seeds.append(sp.clip(sp.wc + 0.5 * sp.rloc * u / nu))
    best_w, best_v = None, -np.inf
    for w0 in seeds:
        res = trust_region_minimize(
            lambda w: -sp.phi(w),
            lambda w: -sp.gphi(w),
            lambda w: -sp.hphi(w),
            w0,
            sp.wc,
            sp.rloc,
            stop_below=-(l - feas_tol),
            max_iter=80,
        )
        if -res.value > best_v:
            best_v, best_w = -res.value, res.w
        if best_v >= l - feas_tol:
            return best_w
    if best_v >= l - feas_tol:
        return best_w
    return None


def _improve_point(sp, l, p, q, feas_tol, step, max_steps=50, max_backtracks=12):
    """Push p away from q along the slice; returns (p, step)."""
    for _ in range(max_steps):
        d = p - q
        nd = float(np.linalg.norm(d))
        if nd < 1e-300:
            d = np.zeros_like(p)
            d[0] = 1.0
            nd = 1.0
        dirn = d / nd
        g = sp.gphi(p)
        slack = sp.phi(p) - l
        cand_dir = dirn
        g2 = float(g @ g)
        # slide along the level boundary when a straight step would exit it
        if g2 > 0.0 and slack < abs(float(g @ dirn)) * step + 10.0 * feas_tol:
            dtan = dirn - (float(dirn @ g) / g2) * g
            ndt = float(np.linalg.norm(dtan))
            if ndt > 1e-12:
                cand_dir = dtan / ndt
        improved = False
        t = step
        for bt in range(max_backtracks):
            cand = sp.clip(p + t * cand_dir)
            v = sp.phi(cand) - l
            if v < -feas_tol:
                # pulling back to the level boundary lands near the same spot
                # for every overshooting step; only do it once
                cand = _pull_to_level(sp, cand, l, feas_tol, v0=v) if bt == 0 else None
            if cand is not None:
                sep = float(np.linalg.norm(cand - q))
                if sep > nd + 1e-16 * (1.0 + nd):
                    p = cand
                    step = min(t * 2.0, 0.5 * sp.rloc)
                    improved = True
                    break
            t *= 0.25
        if not improved:
            step = max(t, 1e-17 * (1.0 + sp.rloc))
            break
    return p, step


def _ascend_pair(sp, l, p, q, feas_tol, ascent_tol, max_sweeps):
    sep = float(np.linalg.norm(p - q))
    step = 0.25 * sp.rloc
    converged = False
    for _ in range(max_sweeps):
        p, step_p = _improve_point(sp, l, p, q, feas_tol, step)
        q, step_q = _improve_point(sp, l, q, p, feas_tol, step)
        step = max(step_p, step_q)
        new_sep = float(np.linalg.norm(p - q))
        if new_sep - sep <= ascent_tol * (1.0 + new_sep):
            converged = True
            sep = new_sep
            break
        sep = new_sep
    return p, q, sep, converged


def _polish_pair(sp, l, p, q, feas_tol, polish_tol, max_iter=40):
    """Newton refinement of the stationarity system for the widest pair.

    Both level constraints are taken active; skipped when either point is
    pinned to the ball boundary instead.  Returns the refined (p, q) or None.
    """
    k = p.size
    ball_slack = 1e-9 * sp.rloc
    for w in (p, q):
        if sp.rloc - float(np.linalg.norm(w - sp.wc)) <= ball_slack:
            return None

    def mult(w, other):
        g = sp.gphi(w)
        g2 = float(g @ g)
        if g2 < 1e-300:
            return None
        return -float((w - other) @ g) / g2

    mu_p = mult(p, q)
    mu_q = mult(q, p)
    if mu_p is None or mu_q is None:
        return None

    def residual(p, q, mu_p, mu_q):
        gp, gq = sp.gphi(p), sp.gphi(q)
        return np.concatenate([
            (p - q) + mu_p * gp,
            (q - p) + mu_q * gq,
            [sp.phi(p) - l, sp.phi(q) - l],
        ])

    state = np.concatenate([p, q, [mu_p, mu_q]])
    best_state = state.copy()
    fvec = residual(p, q, mu_p, mu_q)
    best_res = float(np.max(np.abs(fvec)))
    worse = 0
    for _ in range(max_iter):
        if best_res <= polish_tol:
            break
        p, q = state[:k], state[k : 2 * k]
        mu_p, mu_q = state[2 * k], state[2 * k + 1]
        gp, gq = sp.gphi(p), sp.gphi(q)
        hp, hq = sp.hphi(p), sp.hphi(q)
        jac = np.zeros((2 * k + 2, 2 * k + 2))
        eye = np.eye(k)
        jac[:k, :k] = eye + mu_p * hp
        jac[:k, k : 2 * k] = -eye
        jac[:k, 2 * k] = gp
        jac[k : 2 * k, :k] = -eye
        jac[k : 2 * k, k : 2 * k] = eye + mu_q * hq
        jac[k : 2 * k, 2 * k + 1] = gq
        jac[2 * k, :k] = gp
        jac[2 * k + 1, k : 2 * k] = gq
        fvec = residual(p, q, mu_p, mu_q)
        try:
            delta = np.linalg.solve(jac, -fvec)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -fvec, rcond=None)[0]
        state = state + delta
        fnew = residual(state[:k], state[k : 2 * k], state[2 * k], state[2 * k + 1])
        res = float(np.max(np.abs(fnew)))
        if res < best_res:
            best_res = res
            best_state = state.copy()
            worse = 0
        else:
            worse += 1
            if worse >= 3:
                break
    p, q = best_state[:k], best_state[k : 2 * k]
    # polished points must stay on the slice and inside the ball
    if sp.phi(p) < l - 1e-8 * (1.0 + abs(l)) or sp.phi(q) < l - 1e-8 * (1.0 + abs(l)):
        return None
    if (
        float(np.linalg.norm(p - sp.wc)) > sp.rloc * (1.0 + 1e-9)
        or float(np.linalg.norm(q - sp.wc)) > sp.rloc * (1.0 + 1e-9)
    ):
        return None
    return p, q


def _canonical_pair(x, y):
    if tuple(x) > tuple(y):
        return y, x
    return x, y


def _pair_distance(x1, y1, x2, y2):
    a = max(np.linalg.norm(x1 - x2), np.linalg.norm(y1 - y2))
    b = max(np.linalg.norm(x1 - y2), np.linalg.norm(y1 - x2))
    return float(min(a, b))


def _empty_triple(sp):
    anchor = sp.ambient(sp.wc)
    return OptimizingTriple(
        subspace=sp.subspace, x=anchor, y=anchor, diameter=0.0, empty=True
    )


def inner_max_diameter(
    f,
    S,
    l,
    U,
    rng=None,
    n_random_starts=2,
    ascent_tol=1e-11,
    max_sweeps=120,
    polish_tol=None,
    warm_pair=None,
    detect_nonunique=None,
    with_certificate=True,
    axis_seeds=True,
    feas_scale=None,
    polish=True,
    auto_forcing=None,
):
    """Widest pair of points on the slice S ∩ {f >= l} ∩ U.

    Alternating two-point ascent: each point in turn is pushed away from the
    other by projected steps that track the level boundary, seeded from the
    ±frame directions plus random rays (2k+2 starts).  Converged pairs are
    refined by a Newton polish of the stationarity system.  Returns a
    diameter-0 triple flagged ``empty`` when the slice contains no point.

    ``warm_pair`` restarts from a previous ambient pair and skips the
    multi-start (used by the outer rotation search).  ``polish_tol`` bounds
    the final stationarity residual; the local driver loosens it on purpose
    to keep subproblem cost proportional to the current level gap.
    ``feas_scale`` overrides the scale of the feasibility slack (default
    1 + |l|).  ``axis_seeds`` disables the ±frame-direction seeds, leaving
    only random ones; axis seeds are degenerate on axis-symmetric slices,
    where they pin the pair to an exactly symmetric configuration.

    ``auto_forcing`` is the local driver's inexactness knob: after seeding,
    the slice radius rho is measured from the seed separation and the ascent
    is stalled at a progress threshold of order (auto_forcing * rho^2)^2,
    which leaves a midpoint error of order auto_forcing * rho^2, i.e.
    proportional to the level gap still to climb.  Tolerances then track the
    slice rather than any assumed critical value.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    sp = _SliceProblem(f, S, U)
    k = S.dim
    scale = (1.0 + abs(l)) if feas_scale is None else max(float(feas_scale), 1e-300)
    feas_tol = 1e-12 * scale
    if polish_tol is None:
        polish_tol = 1e-13 * (1.0 + abs(l))
    if detect_nonunique is None:
        detect_nonunique = warm_pair is None

    starts = []
    if warm_pair is not None:
        p0 = sp.clip(S.to_local(warm_pair[0]))
        q0 = sp.clip(S.to_local(warm_pair[1]))
        starts.append((p0, q0))
        anchor = None
    else:
        anchor = _find_feasible(sp, l, feas_tol, rng)
        if anchor is None:
            return _empty_triple(sp)
        dirs = []
        if axis_seeds:
            for i in range(k):
                e = np.zeros(k)
                e[i] = 1.0
                dirs.extend([e, -e])
        for _ in range(n_random_starts):
            u = rng.standard_normal(k)
            nu = np.linalg.norm(u)
            if nu > 0:
                dirs.append(u / nu)
        if not dirs:
            dirs.append(np.eye(k)[:, 0])
        for u in dirs:
            p0 = _farthest_feasible_on_ray(sp, l, anchor, u, feas_tol)
            q0 = _farthest_feasible_on_ray(sp, l, anchor, -u, feas_tol)
            starts.append((p0, q0))

    if auto_forcing is not None:
        # measure the slice from the seeds, then re-derive the tolerances so
        # they track the actual gap instead of the level's absolute size
        seps = []
        for p0, q0 in starts:
            p = p0 if sp.phi(p0) >= l - feas_tol else _pull_to_level(sp, p0, l, feas_tol)
            q = q0 if sp.phi(q0) >= l - feas_tol else _pull_to_level(sp, q0, l, feas_tol)
            if p is not None and q is not None:
                seps.append(float(np.linalg.norm(p - q)))
        if seps:
            d0 = max(seps)
            rho2 = max(0.25 * d0 * d0, 1e-300)
            feas_tol = 1e-12 * rho2
            ascent_tol = (auto_forcing * rho2) ** 2 / (1.0 + d0)

    results = []
    for p0, q0 in starts:
        p = p0 if sp.phi(p0) >= l - feas_tol else _pull_to_level(sp, p0, l, feas_tol)
        q = q0 if sp.phi(q0) >= l - feas_tol else _pull_to_level(sp, q0, l, feas_tol)
        if p is None or q is None:
            continue
        if warm_pair is not None and polish:
            # a warm pair is usually already stationary: polish first and only
            # fall back to the full ascent when a probe still finds progress
            polished = _polish_pair(sp, l, p, q, feas_tol, polish_tol)
            if polished is not None:
                pp, qq = polished
                sep0 = float(np.linalg.norm(pp - qq))
                probe_step = 0.1 * sp.rloc
                p2, _ = _improve_point(
                    sp, l, pp, qq, feas_tol, probe_step, max_steps=2, max_backtracks=6
                )
                q2, _ = _improve_point(
                    sp, l, qq, p2, feas_tol, probe_step, max_steps=2, max_backtracks=6
                )
                sep2 = float(np.linalg.norm(p2 - q2))
                if sep2 - sep0 <= max(ascent_tol * (1.0 + sep0), polish_tol):
                    results.append((sep0, pp, qq, True))
                    continue
                p, q = p2, q2
        p, q, sep, converged = _ascend_pair(sp, l, p, q, feas_tol, ascent_tol, max_sweeps)
        if polish:
            polished = _polish_pair(sp, l, p, q, feas_tol, polish_tol)
            if polished is not None:
                pp, qq = polished
                new_sep = float(np.linalg.norm(pp - qq))
                if new_sep >= sep - 1e-6 * (1.0 + sep):
                    p, q, sep = pp, qq, new_sep
        results.append((sep, p, q, converged))

    if not results:
        if warm_pair is not None:
            return inner_max_diameter(
                f, S, l, U,
                rng=rng, n_random_starts=n_random_starts, ascent_tol=ascent_tol,
                max_sweeps=max_sweeps, polish_tol=polish_tol,
                detect_nonunique=detect_nonunique, with_certificate=with_certificate,
                axis_seeds=axis_seeds, feas_scale=feas_scale, polish=polish,
                auto_forcing=auto_forcing,
            )
        return _empty_triple(sp)

    best_sep = max(r[0] for r in results)
    contenders = [r for r in results if r[0] >= best_sep - 1e-9 * (1.0 + best_sep)]
    keyed = []
    for sep, p, q, conv in contenders:
        x, y = _canonical_pair(sp.ambient(p), sp.ambient(q))
        keyed.append((tuple(x), sep, x, y, conv))
    keyed.sort(key=lambda r: r[0])
    _, sep, x, y, converged = keyed[0]

    non_unique = False
    if detect_nonunique and best_sep > 1e-9:
        for other_sep, p, q, _ in results:
            if other_sep < best_sep - 1e-6:
                continue
            ox, oy = _canonical_pair(sp.ambient(p), sp.ambient(q))
            if _pair_distance(x, y, ox, oy) > 1e-4 * (1.0 + best_sep):
                non_unique = True
                warnings.warn(
                    "slice has multiple separation-realizing pairs",
                    NonUniqueWarning,
                    stacklevel=2,
                )
                break

    boundary_hit = (
        U.boundary_distance(x) <= 1e-6 or U.boundary_distance(y) <= 1e-6
    )
    kkt = float("nan")
    if with_certificate and sep > 1e-12:
        try:
            kkt = opposite_gradient_residual(f, x, y).residual
        except ZeroGradient:
            pass
    return OptimizingTriple(
        subspace=S,
        x=x,
        y=y,
        diameter=sep,
        empty=False,
        converged=converged,
        boundary_hit=boundary_hit,
        non_unique=non_unique,
        kkt_residual=kkt,
    )


def closest_point_on_slice(
    f, z, l, S, radius=None, rng=None, tol=1e-12, hint_directions=None, feas_scale=None
):
    """Closest point to ``z`` on S ∩ {f <= l}.

    ``z`` must lie on S.  Seeds descend along the most negative curvature
    directions of the restricted Hessian (plus optional hints and random
    rays), locate a level crossing by sampling and bisection, then polish
    the closest-point stationarity system by Newton.  Raises
    :class:`SliceEmpty` when no sublevel point is found within ``radius``.
    ``feas_scale`` overrides the scale of the level slack (default 1 + |l|).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    z = np.asarray(z, dtype=float)
    if not S.contains(z, tol=1e-8):
        raise ValueError("query point does not lie on the subspace")
    if radius is None:
        radius = 10.0 * (1.0 + float(np.linalg.norm(z)))
    v = S.frame.columns
    wz = S.to_local(z)
    scale = (1.0 + abs(l)) if feas_scale is None else max(float(feas_scale), 1e-300)
    feas_tol = tol * scale

    def psi(w):
        return f.value(S.from_local(w))

    def gpsi(w):
        return v.T @ f.gradient(S.from_local(w))

    def hpsi(w):
        return v.T @ f.hessian(S.from_local(w)) @ v

    if psi(wz) <= l + feas_tol:
        return z.copy()

    k = S.dim
    dirs = []
    evals, evecs = np.linalg.eigh(hpsi(wz))
    for idx in range(k):  # ascending: most negative curvature first
        u = evecs[:, idx]
        dirs.extend([u, -u])
    if hint_directions is not None:
        for h in hint_directions:
            hl = v.T @ np.asarray(h, dtype=float)
            nh = np.linalg.norm(hl)
            if nh > 1e-12:
                dirs.extend([hl / nh, -hl / nh])
    for _ in range(2):
        u = rng.standard_normal(k)
        nu = np.linalg.norm(u)
        if nu > 0:
            dirs.append(u / nu)

    def crossing_on_ray(u):
        ts = np.geomspace(1e-6 * (1.0 + radius), radius, 40)
        prev = 0.0
        for t in ts:
            if psi(wz + t * u) <= l + feas_tol:
                lo, hi = prev, t
                for _ in range(60):
                    if hi - lo <= 1e-13 * (1.0 + hi):
                        break
                    mid = 0.5 * (lo + hi)
                    if psi(wz + mid * u) <= l + feas_tol:
                        hi = mid
                    else:
                        lo = mid
                return wz + hi * u
            prev = t
        return None

    seeds = []
    for u in dirs:
        w = crossing_on_ray(u)
        if w is not None:
            seeds.append(w)
    if not seeds:
        res = trust_region_minimize(
            psi, gpsi, hpsi, wz, wz, radius, stop_below=l - feas_tol, max_iter=150
        )
        if res.value <= l + feas_tol:
            seg = res.w - wz
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if psi(wz + mid * seg) <= l + feas_tol:
                    hi = mid
                else:
                    lo = mid
            seeds.append(wz + hi * seg)
        else:
            raise SliceEmpty(
                f"no point with f <= {l} found on the subspace within radius {radius}"
            )

    def polish(w):
        g = gpsi(w)
        g2 = float(g @ g)
        if g2 < 1e-300:
            return w
        mu = -float((w - wz) @ g) / g2
        state = np.concatenate([w, [mu]])
        best = state.copy()
        best_res = np.inf
        for _ in range(40):
            w_, mu_ = state[:k], state[k]
            g = gpsi(w_)
            fvec = np.concatenate([(w_ - wz) + mu_ * g, [psi(w_) - l]])
            res = float(np.max(np.abs(fvec)))
            if res < best_res:
                best_res = res
                best = state.copy()
            if res <= feas_tol:
                break
            h = hpsi(w_)
            jac = np.zeros((k + 1, k + 1))
            jac[:k, :k] = np.eye(k) + mu_ * h
            jac[:k, k] = g
            jac[k, :k] = g
            try:
                delta = np.linalg.solve(jac, -fvec)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(jac, -fvec, rcond=None)[0]
            state = state + delta
        return best[:k]

    best_w = None
    best_d = np.inf
    for w in seeds:
        w = polish(w)
        if psi(w) > l + 1e-8 * (1.0 + abs(l)):
            continue
        d = float(np.linalg.norm(w - wz))
        if d < best_d:
            best_d, best_w = d, w
    if best_w is None:
        raise SliceEmpty("sublevel seeds did not survive polishing")
    return S.from_local(best_w)


def opposite_gradient_residual(f, x, y):
    """Certificate that the widest-pair gradients are anti-parallel.

    residual = |unit(grad f(x)) - unit(y-x)| + |unit(grad f(y)) - unit(x-y)|,
    zero exactly when grad f(x) is a positive multiple of y - x and
    grad f(y) a positive multiple of x - y.  Multipliers of the stationarity
    system are recovered by projection onto the pair direction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    nd = float(np.linalg.norm(d))
    if nd == 0.0:
        raise ValueError("certificate requires two distinct points")
    gx = f.gradient(x)
    gy = f.gradient(y)
    ngx = float(np.linalg.norm(gx))
    ngy = float(np.linalg.norm(gy))
    if ngx < 1e-12 or ngy < 1e-12:
        raise ZeroGradient("gradient too small for the opposite-direction certificate")
    u = d / nd
    residual = float(np.linalg.norm(gx / ngx - u) + np.linalg.norm(gy / ngy + u))
    ax = float(gx @ u)
    lambda1 = 2.0 * nd / ax if ax > 1e-300 else 0.0
    perp_x = gx - ax * u
    lambda3 = lambda1 * float(np.linalg.norm(perp_x))
    ay = float(gy @ (-u))
    lambda2 = 2.0 * nd / ay if ay > 1e-300 else 0.0
    perp_y = gy - float(gy @ u) * u
    lambda4 = lambda2 * float(np.linalg.norm(perp_y))
    return KKTCertificate(lambda1, lambda2, lambda3, lambda4, residual)


def isosceles_segment_length(alpha, d, theta):
    """Length of the segment cut by the two rays for inclination theta."""
    return d * (np.sin(alpha) / np.sin(theta) + np.sin(alpha) / np.sin(np.pi - 2.0 * alpha - theta))


def isosceles_min_segment(alpha, d):
    """Inclination minimizing the cut segment: the isosceles configuration.

    For rays at half-angle ``alpha`` from a pivot at distance ``d``, the
    shortest chord through the pivot is attained at theta = pi/2 - alpha,
    independent of d.
    """
    if not (0.0 < alpha < np.pi / 2.0):
        raise ValueError("alpha must lie in (0, pi/2)")
    if d <= 0.0:
        raise ValueError("pivot distance must be positive")
    return np.pi / 2.0 - alpha


def quadratic_minmax_exact(a, l):
    """Closed-form optimizing triple for f(x) = sum_j a_j x_j^2 at level l < 0.

    Requires strictly descending coefficients with the positive block first
    and exactly the trailing block negative.  The optimal subspace is the
    span of the negative-coefficient axes, the pair sits on the axis of the
    least-negative coefficient, and the diameter is 2*sqrt(l / a_{n-m+1}).
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    if np.any(a == 0.0) or np.any(np.diff(a) >= 0.0):
        raise BadSignature("coefficients must be strictly descending and nonzero")
    m = int(np.sum(a < 0.0))
    if m == 0:
        raise BadSignature("at least one negative coefficient is required")
    if np.any(a[: n - m] <= 0.0):
        raise BadSignature("positive coefficients must precede negative ones")
    if l >= 0.0:
        raise ValueError("level must be negative")
    lead = n - m  # index of a_{n-m+1} in 0-based terms
    r = float(np.sqrt(l / a[lead]))
    x = np.zeros(n)
    x[lead] = r
    eye = np.eye(n)
    S = AffineSubspace(np.zeros(n), Frame(eye[:, lead:]))
    return OptimizingTriple(subspace=S, x=x, y=-x, diameter=2.0 * r)


def brute_force_diameter(f, S, l, U, grid_resolution=64):
    """Dense-grid oracle for the slice diameter (slice dimension <= 3).

    Enumerates a regular grid on the local ball, keeps the points with
    f >= l, and scans all pairs with the compiled kernel.  The result is
    within O(diam(U) / grid_resolution) of the true diameter.
    """
    if S.dim > 3:
        raise ValueError("brute force oracle is limited to slice dimension <= 3")
    if grid_resolution < 32:
        raise ValueError("grid resolution must be at least 32")
    sp = _SliceProblem(f, S, U)
    axes = [
        np.linspace(sp.wc[i] - sp.rloc, sp.wc[i] + sp.rloc, grid_resolution)
        for i in range(S.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    inside = np.linalg.norm(pts - sp.wc, axis=1) <= sp.rloc * (1.0 + 1e-12)
    pts = pts[inside]
    feas_tol = 1e-12 * (1.0 + abs(l))
    vals = np.array([sp.phi(w) for w in pts])
    pts = pts[vals >= l - feas_tol]
    if pts.shape[0] == 0:
        return _empty_triple(sp)
    if pts.shape[0] == 1:
        x = sp.ambient(pts[0])
        return OptimizingTriple(subspace=S, x=x, y=x.copy(), diameter=0.0)
    i, j, dist = max_separation_pair(pts)
    x, y = _canonical_pair(sp.ambient(pts[i]), sp.ambient(pts[j]))
    return OptimizingTriple(subspace=S, x=x, y=y, diameter=float(dist))
