# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: the hot inner loops of state evolution.

Mirrors ``_corepy``; see that module for the layout conventions and the
cross-backend agreement contract.  Compiled with -ffp-contract=off so the
only divergence from the numpy path is numpy's own SIMD contraction.
"""

cimport cython


def lm_apply(const double complex[::1] a, const double[::1] r,
             double complex[::1] v, Py_ssize_t f):
    """In-place v <- L(M v) within frontier ``f``; returns the new frontier."""
    cdef Py_ssize_t j
    cdef double complex x, y
    for j in range(1, f + 1, 2):
        x = v[j]
        y = v[j + 1]
        v[j] = a[j].conjugate() * x + r[j] * y
        v[j + 1] = r[j] * x - a[j] * y
    if f % 2 == 1:
        f += 1
    for j in range(0, f + 1, 2):
        x = v[j]
        y = v[j + 1]
        v[j] = a[j].conjugate() * x + r[j] * y
        v[j + 1] = r[j] * x - a[j] * y
    if f % 2 == 0:
        f += 1
    return f


def lm_apply_adjoint(const double complex[::1] a, const double[::1] r,
                     double complex[::1] v, Py_ssize_t f):
    """In-place v <- M*(L* v) within frontier ``f``; returns the new frontier."""
    cdef Py_ssize_t j
    cdef double complex x, y
    for j in range(0, f + 1, 2):
        x = v[j]
        y = v[j + 1]
        v[j] = a[j] * x + r[j] * y
        v[j + 1] = r[j] * x - a[j].conjugate() * y
    if f % 2 == 0:
        f += 1
    for j in range(1, f + 1, 2):
        x = v[j]
        y = v[j + 1]
        v[j] = a[j] * x + r[j] * y
        v[j + 1] = r[j] * x - a[j].conjugate() * y
    if f % 2 == 1:
        f += 1
    return f


def probabilities_into(double[::1] out, const double complex[::1] v, Py_ssize_t f):
    """out[0:f+1] = |v[0:f+1]|^2 (entries beyond f are left untouched)."""
    cdef Py_ssize_t i
    cdef double re, im
    for i in range(f + 1):
        re = v[i].real
        im = v[i].imag
        out[i] = re * re + im * im


def abel_accumulate(double[::1] acc, double[::1] comp,
                    const double complex[::1] v, Py_ssize_t f, double w):
    """Kahan-compensated acc[i] += w*|v[i]|^2 for i <= f; comp carries the error."""
    cdef Py_ssize_t i
    cdef double re, im, p, y, t
    for i in range(f + 1):
        re = v[i].real
        im = v[i].imag
        p = w * (re * re + im * im)
        y = p - comp[i]
        t = acc[i] + y
        comp[i] = (t - acc[i]) - y
        acc[i] = t
