"""Dispatch between the compiled pairwise kernel and the numpy fallback.

``python setup.py build_ext --inplace`` builds ``saddlekit._kernels``; when
it is absent the pure implementation is used transparently.
"""

try:
    from . import _kernels as _impl

    HAVE_COMPILED = True
except ImportError:  # extension not built; numpy fallback
    from . import _kernels_py as _impl

    HAVE_COMPILED = False

max_separation_pair = _impl.max_separation_pair

__all__ = ["max_separation_pair", "HAVE_COMPILED"]
