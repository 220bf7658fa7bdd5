"""Truncated Taylor (jet) arithmetic for matrix-valued functions of r.

The stepwise route of a transformation chain needs exact high-order
derivatives of intermediate matrices like (Y')Y^{-1} without ever forming
symbolic expressions.  A jet stores Taylor coefficients about a point,

    A[p] = (d^p f / dr^p)(r) / p!,      p = 0..order,

with shape (order+1,) for scalars, (order+1, n) for vectors and
(order+1, n, n) for matrices.  All operations truncate to the shortest
operand, so orders decrease as full derivatives are consumed.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "jet_add",
    "jet_mul",
    "jet_matmul",
    "jet_deriv",
    "jet_dm",
    "jet_matinv",
    "jet_value",
    "jet_derivative_value",
    "jet_from_derivs",
    "jet_to_derivs",
]


def _common(*jets):
    length = min(j.shape[0] for j in jets)
    return [j[:length] for j in jets], length


def jet_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    (a, b), _ = _common(a, b)
    return a + b


def jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product of scalar jets."""
    (a, b), L = _common(a, b)
    out = np.zeros(L, dtype=complex)
    for s in range(L):
        out[s] = np.dot(a[:s + 1], b[s::-1])
    return out


def jet_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of matrix (or matrix-vector) jets."""
    (a, b), L = _common(a, b)
    shape = np.matmul(a[0], b[0]).shape
    out = np.zeros((L,) + shape, dtype=complex)
    for s in range(L):
        for p in range(s + 1):
            out[s] += a[p] @ b[s - p]
    return out


def jet_deriv(a: np.ndarray) -> np.ndarray:
    """d/dr: shifts coefficients down, losing the top order."""
    if a.shape[0] < 2:
        raise ValueError("jet too short to differentiate")
    L = a.shape[0] - 1
    weights = np.arange(1, L + 1, dtype=float).reshape((L,) + (1,) * (a.ndim - 1))
    return a[1:] * weights


def jet_dm(a: np.ndarray, m: int) -> np.ndarray:
    """Apply D_m: rows < m are differentiated, the rest pass through.

    Output is truncated one order like :func:`jet_deriv` so all rows stay
    aligned.
    """
    d = jet_deriv(a)
    out = a[:-1].copy()
    if a.ndim == 2:      # vector jet (order+1, n)
        out[:, :m] = d[:, :m]
    else:                # matrix jet (order+1, n, n)
        out[:, :m, :] = d[:, :m, :]
    return out


def jet_matinv(a: np.ndarray) -> np.ndarray:
    """Jet of A(r)^{-1} by the recursive series inverse."""
    L = a.shape[0]
    inv0 = np.linalg.inv(a[0])
    out = np.zeros_like(a)
    out[0] = inv0
    for s in range(1, L):
        acc = np.zeros_like(a[0])
        for p in range(1, s + 1):
            acc += a[p] @ out[s - p]
        out[s] = -inv0 @ acc
    return out


def jet_value(a: np.ndarray):
    return a[0]


def jet_derivative_value(a: np.ndarray, p: int = 1):
    """The p-th derivative encoded by the jet (coefficient times p!)."""
    return a[p] * math.factorial(p)


def jet_from_derivs(derivs: np.ndarray) -> np.ndarray:
    out = np.array(derivs, dtype=complex)
    for p in range(2, out.shape[0]):
        out[p] /= math.factorial(p)
    return out


def jet_to_derivs(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    for p in range(2, out.shape[0]):
        out[p] *= math.factorial(p)
    return out
