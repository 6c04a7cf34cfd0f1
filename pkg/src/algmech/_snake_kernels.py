"""Hot kernels for the snake module.

Each kernel is written in nopython-compatible numpy and compiled with numba
when available; setting the environment variable ALGMECH_NO_NUMBA to any
non-empty value selects the pure-numpy fallback instead.
"""

from __future__ import annotations

import os

import numpy as np


def _control_operator(lengths, u):
    n, d = u.shape
    a = np.zeros((d, d))
    for k in range(n):
        lk = lengths[k]
        for i in range(d):
            a[i, i] += lk
            for j in range(d):
                a[i, j] -= lk * u[k, i] * u[k, j]
    return a


def _e_field(u, i):
    n, d = u.shape
    out = np.empty((n, d))
    for k in range(n):
        dot = u[k, i]
        for j in range(d):
            out[k, j] = -dot * u[k, j]
        out[k, i] += 1.0
    return out


def _horizontal(lengths, u, cdot):
    """Minimal-norm tangential velocity realizing the head velocity.

    Returns (v, lam, residual) where A lam = cdot is solved in the
    least-squares sense and v_k = (I - u_k u_k^T) lam.
    """
    n, d = u.shape
    a = np.zeros((d, d))
    for k in range(n):
        lk = lengths[k]
        for i in range(d):
            a[i, i] += lk
            for j in range(d):
                a[i, j] -= lk * u[k, i] * u[k, j]
    lam = np.linalg.pinv(a) @ np.asarray(cdot)
    resid = np.linalg.norm(a @ lam - cdot)
    v = np.empty((n, d))
    for k in range(n):
        dot = 0.0
        for j in range(d):
            dot += u[k, j] * lam[j]
        for j in range(d):
            v[k, j] = lam[j] - dot * u[k, j]
    return v, lam, resid


def _renormalize(u):
    n, d = u.shape
    out = np.empty((n, d))
    for k in range(n):
        s = 0.0
        for j in range(d):
            s += u[k, j] * u[k, j]
        s = np.sqrt(s)
        for j in range(d):
            out[k, j] = u[k, j] / s
    return out


USING_NUMBA = not os.environ.get("ALGMECH_NO_NUMBA")

if USING_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USING_NUMBA = False

if USING_NUMBA:
    control_operator_kernel = njit(cache=True)(_control_operator)
    e_field_kernel = njit(cache=True)(_e_field)
    horizontal_kernel = njit(cache=True)(_horizontal)
    renormalize_kernel = njit(cache=True)(_renormalize)
else:
    control_operator_kernel = _control_operator
    e_field_kernel = _e_field
    horizontal_kernel = _horizontal
    renormalize_kernel = _renormalize
