"""Small dense linear-algebra helpers shared across the package.

Everything here operates on tiny matrices (the parameter dimension p and
state dimension n are single digits in all case studies), so closed forms
are used for sizes up to 2 and LAPACK via numpy beyond that.
"""

from __future__ import annotations

import numpy as np


def lambda_min_sym(s: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Closed form for 1x1 and 2x2, ``numpy.linalg.eigvalsh`` otherwise.
    """
    s = np.asarray(s, dtype=float)
    if s.shape == () or s.shape == (1,) or s.shape == (1, 1):
        return float(s.reshape(()))
    if s.shape == (2, 2):
        a, b, c = s[0, 0], 0.5 * (s[0, 1] + s[1, 0]), s[1, 1]
        half_tr = 0.5 * (a + c)
        rad = np.hypot(0.5 * (a - c), b)
        return float(half_tr - rad)
    return float(np.linalg.eigvalsh(0.5 * (s + s.T))[0])


def lambda_max_sym(s: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix (same dispatch as lambda_min_sym)."""
    s = np.asarray(s, dtype=float)
    if s.shape == () or s.shape == (1,) or s.shape == (1, 1):
        return float(s.reshape(()))
    if s.shape == (2, 2):
        a, b, c = s[0, 0], 0.5 * (s[0, 1] + s[1, 0]), s[1, 1]
        half_tr = 0.5 * (a + c)
        rad = np.hypot(0.5 * (a - c), b)
        return float(half_tr + rad)
    return float(np.linalg.eigvalsh(0.5 * (s + s.T))[-1])


def lambda_min_sym_stacked(s: np.ndarray) -> np.ndarray:
    """Vectorized ``lambda_min_sym`` over a stack of symmetric matrices.

    ``s`` has shape (N, p, p); returns shape (N,).
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[-1]
    if p == 1:
        return s[:, 0, 0].copy()
    if p == 2:
        a = s[:, 0, 0]
        b = 0.5 * (s[:, 0, 1] + s[:, 1, 0])
        c = s[:, 1, 1]
        half_tr = 0.5 * (a + c)
        rad = np.hypot(0.5 * (a - c), b)
        return half_tr - rad
    return np.linalg.eigvalsh(0.5 * (s + np.swapaxes(s, -1, -2)))[:, 0]


def spectral_norm(m: np.ndarray) -> float:
    """Induced Euclidean (2-) norm of a vector or matrix.

    Vectors get their Euclidean length; matrices the largest singular
    value, via the closed-form eigenvalue of the 2x2 Gram matrix when the
    smaller dimension is at most 2.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim <= 1:
        return float(np.linalg.norm(m))
    n, p = m.shape
    if min(n, p) == 1:
        return float(np.linalg.norm(m))
    if min(n, p) == 2:
        gram = m.T @ m if p <= n else m @ m.T
        return float(np.sqrt(max(lambda_max_sym(gram), 0.0)))
    return float(np.linalg.norm(m, 2))


def spectral_norms_stacked(ms: np.ndarray) -> np.ndarray:
    """Vectorized ``spectral_norm`` over a stack of matrices of shape (N, n, p)."""
    ms = np.asarray(ms, dtype=float)
    if ms.ndim == 2:  # stack of vectors
        return np.linalg.norm(ms, axis=1)
    n, p = ms.shape[1], ms.shape[2]
    if min(n, p) == 1:
        return np.linalg.norm(ms.reshape(ms.shape[0], -1), axis=1)
    if min(n, p) == 2:
        if p <= n:
            gram = np.einsum("kij,kil->kjl", ms, ms)
        else:
            gram = np.einsum("kij,klj->kil", ms, ms)
        a = gram[:, 0, 0]
        b = 0.5 * (gram[:, 0, 1] + gram[:, 1, 0])
        c = gram[:, 1, 1]
        lam = 0.5 * (a + c) + np.hypot(0.5 * (a - c), b)
        return np.sqrt(np.maximum(lam, 0.0))
    return np.array([np.linalg.norm(m, 2) for m in ms])


def check_symmetric_psd(
    m: np.ndarray,
    name: str = "matrix",
    sym_rtol: float = 1e-9,
    eig_floor: float = -1e-12,
) -> None:
    """Raise ``ValueError`` when ``m`` is visibly asymmetric or indefinite."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    scale = 1.0 + float(np.abs(m).max(initial=0.0))
    if float(np.abs(m - m.T).max(initial=0.0)) > sym_rtol * scale:
        raise ValueError(f"{name} is not symmetric within tolerance")
    if lambda_min_sym(m) < eig_floor * scale:
        raise ValueError(f"{name} has a negative eigenvalue")
