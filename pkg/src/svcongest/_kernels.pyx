"""Compiled Shapley kernels. Mirrors ``_fallback`` exactly in contract."""
from libc.stdlib cimport malloc, free

import numpy as np


# Takes a raw pointer: passing a memoryview by value would touch its
# reference count (atomically, without the GIL) on every call.
cdef inline double _joint(const double *a, Py_ssize_t k, double x) noexcept nogil:
    cdef double acc = 0.0
    while k > 0:
        k -= 1
        acc = acc * x + a[k]
    return x * acc


def joint_cost_many(const double[::1] coeffs, const double[::1] loads):
    cdef Py_ssize_t i, n = loads.shape[0]
    cdef const double *c = &coeffs[0]
    cdef Py_ssize_t nc = coeffs.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        for i in range(n):
            res[i] = _joint(c, nc, loads[i])
    return out


def shapley_target(const double[::1] coeffs, const double[::1] others, double weight):
    """Exact Shapley share of a user of ``weight`` joining ``others``.

    Enumerates all subsets T of the other users and weighs the marginal
    cost C(w(T) + weight) - C(w(T)) by |T|!(n-|T|-1)!/n!.
    """
    cdef const double *c = &coeffs[0]
    cdef Py_ssize_t nc = coeffs.shape[0]
    cdef Py_ssize_t m = others.shape[0]
    cdef Py_ssize_t n = m + 1
    cdef Py_ssize_t n_sub = (<Py_ssize_t>1) << m
    cdef Py_ssize_t mask, low, k, bit
    cdef double s, total
    cdef double *sums
    cdef unsigned char *sizes
    cdef double *by_size
    cdef double *coef

    sums = <double *> malloc(n_sub * sizeof(double))
    sizes = <unsigned char *> malloc(n_sub * sizeof(unsigned char))
    by_size = <double *> malloc(n * sizeof(double))
    coef = <double *> malloc(n * sizeof(double))
    if not sums or not sizes or not by_size or not coef:
        free(sums); free(sizes); free(by_size); free(coef)
        raise MemoryError()
    try:
        with nogil:
            coef[0] = 1.0 / n
            for k in range(n - 1):
                coef[k + 1] = coef[k] * (k + 1) / (n - 1 - k)
            for k in range(n):
                by_size[k] = 0.0
            sums[0] = 0.0
            sizes[0] = 0
            by_size[0] = _joint(c, nc, weight)
            for mask in range(1, n_sub):
                low = mask & (-mask)
                bit = 0
                while (low >> bit) != 1:
                    bit += 1
                s = sums[mask ^ low] + others[bit]
                sums[mask] = s
                sizes[mask] = sizes[mask ^ low] + 1
                by_size[sizes[mask]] += _joint(c, nc, s + weight) - _joint(c, nc, s)
            total = 0.0
            for k in range(n):
                total += coef[k] * by_size[k]
    finally:
        free(sums); free(sizes); free(by_size); free(coef)
    return total


def marginal_means(const double[::1] coeffs, const double[::1] weights,
                   Py_ssize_t target, const double[:, ::1] keys):
    """Mean marginal contribution of ``target`` over rows of arrival keys.

    Row j of ``keys`` defines a permutation: user a precedes user b iff
    keys[j, a] < keys[j, b].
    """
    cdef Py_ssize_t rows = keys.shape[0], n = keys.shape[1]
    cdef Py_ssize_t j, a
    cdef double kt, prefix, acc = 0.0
    cdef double w = weights[target]
    cdef const double *c = &coeffs[0]
    cdef Py_ssize_t nc = coeffs.shape[0]
    if rows == 0:
        return 0.0
    with nogil:
        for j in range(rows):
            kt = keys[j, target]
            prefix = 0.0
            # the target's own key never compares below itself
            for a in range(n):
                if keys[j, a] < kt:
                    prefix = prefix + weights[a]
            acc += _joint(c, nc, prefix + w) - _joint(c, nc, prefix)
    return acc / rows
