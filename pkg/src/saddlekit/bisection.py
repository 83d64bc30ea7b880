"""Global bisection driver on the critical-value bracket.

Each iteration probes the bracket midpoint with the outer min-max solver.
A positive minimized slice diameter certifies the midpoint lies below the
critical value (raise the lower bound); a vanishing diameter means no
subspace keeps a wide slice, so the midpoint moves the upper bound down.
The bracket width halves exactly once per iteration.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidBracket
from .geometry import OptimizingTriple
from .outer import outer_min_subspace
from .trace import SolverTrace, TraceRecord

__all__ = [
    "BisectionState",
    "bisection_solve",
    "stationarity_diagnostic",
    "StationarityReport",
    "default_bracket",
]


@dataclass
class BisectionState:
    iter: int
    lower: float
    upper: float
    last_triple: Optional[OptimizingTriple] = None

    @property
    def width(self):
        return self.upper - self.lower


def default_bracket(f, U, rng=None, n_seeds=16):
    """Bracket from sampled values: min over seeds, max over seeds plus one.

    Seeds are the trust center, axis points at half radius, and a few random
    interior points drawn from ``rng``.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n = f.dim
    pts = [U.center.copy()]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 0.5 * U.radius
        pts.append(U.center + e)
        pts.append(U.center - e)
    for _ in range(n_seeds):
        u = rng.standard_normal(n)
        nu = np.linalg.norm(u)
        if nu > 0:
            pts.append(U.center + (0.9 * U.radius * rng.random() / nu) * u)
    vals = [f.value(p) for p in pts]
    return float(min(vals)), float(max(vals)) + 1.0


def bisection_solve(
    f,
    U,
    m,
    l0,
    u0,
    tol=0.0,
    max_iter=50,
    empty_tol=1e-9,
    rng=None,
    outer_kwargs=None,
):
    """Bisect on the level until the bracket width drops below ``tol``.

    Returns ``((lower, upper), triple, trace)`` where the triple is the
    widest pair from the last level certified below the critical value (its
    midpoint is the critical-point candidate).  The final width satisfies
    ``upper - lower <= max(tol, (u0 - l0) * 2**-max_iter)``.
    """
    if not (l0 < u0):
        raise InvalidBracket(f"need l0 < u0, got [{l0}, {u0}]")
    if rng is None:
        rng = np.random.default_rng(0)
    outer_kwargs = dict(outer_kwargs or {})
    outer_kwargs.setdefault("probe_nonunique", False)

    state = BisectionState(iter=0, lower=float(l0), upper=float(u0))
    trace = SolverTrace()
    s_hint = None
    last_nonempty = None
    for i in range(max_iter):
        if tol > 0.0 and state.width <= tol:
            break
        state.iter = i
        mid = 0.5 * (state.lower + state.upper)
        triple = outer_min_subspace(f, mid, U, m, S0=s_hint, rng=rng, **outer_kwargs)
        if triple.diameter <= empty_tol:
            state.upper = mid
        else:
            state.lower = mid
            last_nonempty = triple
            s_hint = triple.subspace
        state.last_triple = triple
        z = triple.midpoint
        trace.append(TraceRecord(
            iter=i,
            l=state.lower,
            u=state.upper,
            diameter=triple.diameter,
            kkt_residual=triple.kkt_residual,
            z=z,
            grad_norm=float(np.linalg.norm(f.gradient(z))),
            ratio=0.5,
        ))
    triple = last_nonempty if last_nonempty is not None else state.last_triple
    return (state.lower, state.upper), triple, trace


@dataclass
class StationarityReport:
    iters: list
    grad_norms: list
    pair_gaps: list
    kkt_residuals: list
    converged: bool
    not_converging: bool


def stationarity_diagnostic(f, trace, tol=1e-4):
    """Smooth-case stationarity check over a recorded run.

    Reports the gradient norm at each recorded midpoint, the pair gap and
    the KKT residual; flags ``converged`` when the final gradient norm is
    below ``tol`` and ``not_converging`` when the pair gap fails to shrink
    to less than 0.9 of its initial value while staying above ``tol``.
    """
    records = list(trace)
    if not records:
        raise ValueError("trace is empty")
    grad_norms = [r.grad_norm for r in records]
    gaps = [r.diameter for r in records]
    converged = grad_norms[-1] < tol
    not_converging = (
        len(records) >= 3 and gaps[-1] > 0.9 * gaps[0] and gaps[-1] > tol
    )
    return StationarityReport(
        iters=[r.iter for r in records],
        grad_norms=grad_norms,
        pair_gaps=gaps,
        kkt_residuals=[r.kkt_residual for r in records],
        converged=converged,
        not_converging=not_converging,
    )
