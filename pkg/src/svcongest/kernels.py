"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``SVCONGEST_PURE_PYTHON`` is set, the numpy implementations are used.
Both expose ``joint_cost_many``, ``shapley_target`` and ``marginal_means``.
"""
import os

from svcongest import _fallback

if os.environ.get("SVCONGEST_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from svcongest import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = "python" if _impl is _fallback else "cython"

# Above this many users numpy's vectorized compare-and-dot beats the
# scalar compiled loop for the sampler (see benchmarks/bench_kernels.py).
MARGINAL_MEANS_COMPILED_MAX_USERS = 7

joint_cost_many = _impl.joint_cost_many
shapley_target = _impl.shapley_target


def marginal_means(coeffs, weights, target, keys):
    if keys.shape[1] <= MARGINAL_MEANS_COMPILED_MAX_USERS:
        return _impl.marginal_means(coeffs, weights, target, keys)
    return _fallback.marginal_means(coeffs, weights, target, keys)


def backends():
    """Return the available backends by name, fallback always included."""
    out = {"python": _fallback}
    try:
        from svcongest import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
