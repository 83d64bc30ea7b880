import numpy as np
import pytest

from saddlekit.geometry import AffineSubspace, TrustRegion
from saddlekit.linalg import Frame


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def span_subspace(base, *cols):
    """Subspace through ``base`` spanned by the given vectors."""
    return AffineSubspace.from_span(
        np.asarray(base, dtype=float), np.column_stack([np.asarray(c, float) for c in cols])
    )


def axis_subspace(n, axes, base=None):
    """Subspace through ``base`` (default origin) spanned by identity columns."""
    eye = np.eye(n)
    base = np.zeros(n) if base is None else np.asarray(base, dtype=float)
    return AffineSubspace(base, Frame(eye[:, list(axes)]))


def ball(n_or_center, radius):
    center = (
        np.zeros(n_or_center) if isinstance(n_or_center, int) else np.asarray(n_or_center, float)
    )
    return TrustRegion(center, radius)
