"""Pure numpy implementations of the Shapley kernels."""
import numpy as np


def _joint(coeffs, x):
    acc = np.zeros_like(x)
    for a in coeffs[::-1]:
        acc = acc * x + a
    return x * acc


def joint_cost_many(coeffs, loads):
    return _joint(np.asarray(coeffs, dtype=np.float64), np.asarray(loads, dtype=np.float64))


def shapley_target(coeffs, others, weight):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = len(others) + 1
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=np.int64)
    for w in others:
        sums = np.concatenate([sums, sums + w])
        sizes = np.concatenate([sizes, sizes + 1])
    delta = _joint(coeffs, sums + weight) - _joint(coeffs, sums)
    by_size = np.bincount(sizes, weights=delta, minlength=n)
    coef = np.empty(n)
    coef[0] = 1.0 / n
    for k in range(n - 1):
        coef[k + 1] = coef[k] * (k + 1) / (n - 1 - k)
    return float(np.dot(coef, by_size))


def marginal_means(coeffs, weights, target, keys):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if keys.shape[0] == 0:
        return 0.0
    before = keys < keys[:, [target]]
    before[:, target] = False
    prefix = before @ weights
    w = weights[target]
    return float(np.mean(_joint(coeffs, prefix + w) - _joint(coeffs, prefix)))
