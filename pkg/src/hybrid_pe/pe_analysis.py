"""Excitation Gramians and persistence-of-excitation certificates.

The hybrid excitation Gramian over a window mixes trapezoid-quadrature
integrals of psi^T psi along flow intervals with a sum of post-jump
psi^T psi terms over the jumps inside the window.  Certification scans
every sample-grid window whose hybrid length lies in [Delta, Delta + 1)
and reports the worst minimum eigenvalue.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .hybrid_time import HybridArc, HybridTimePoint
from .linalg import lambda_min_sym, lambda_min_sym_stacked


@dataclass
class PECertificate:
    """Certified excitation level over all windows of hybrid length in
    [delta, delta + 1).

    ``mu`` is the minimum over scanned windows of the Gramian's smallest
    eigenvalue; ``worst_window`` is the minimizing (start, end) pair.
    """

    delta: float
    mu: float
    worst_window: tuple
    window_count: int

    def to_json(self) -> str:
        start, end = self.worst_window
        return json.dumps(
            {
                "delta": self.delta,
                "mu": self.mu,
                "worst_window": {
                    "t_start": start.t,
                    "j_start": start.j,
                    "t_end": end.t,
                    "j_end": end.j,
                },
                "window_count": self.window_count,
            },
            indent=2,
        )


def _as_matrix_stack(values: np.ndarray) -> np.ndarray:
    """View (N, n) vector samples as (N, n, 1) regressor matrices."""
    if values.ndim == 2:
        return values[:, :, None]
    return values


def _prefix_data(arc: HybridArc):
    """Cumulative flow Gramian and jump-term tables for window queries.

    Returns ordered sample times t, interval indices j, a prefix array
    ``flow[k]`` holding the within-interval trapezoid integral of
    psi^T psi from the arc start to sample k, and ``jump_pre[m]`` holding
    the sum of post-jump psi^T psi over the first m jumps.
    """
    t, j, v = arc.ordered()
    v = _as_matrix_stack(v)
    g = np.einsum("kij,kil->kjl", v, v)  # psi^T psi per sample
    p = g.shape[1]
    npts = len(t)
    flow = np.zeros((npts, p, p))
    dt = t[1:] - t[:-1]
    same = j[1:] == j[:-1]
    seg = 0.5 * dt[:, None, None] * (g[1:] + g[:-1])
    seg[~same] = 0.0
    np.cumsum(seg, axis=0, out=flow[1:])

    num_jumps = arc.domain.num_jumps
    jump_terms = np.zeros((num_jumps, p, p))
    for m in range(num_jumps):
        psi_post = np.asarray(arc.values[m + 1][0], dtype=float)
        if psi_post.ndim == 1:
            psi_post = psi_post[:, None]
        jump_terms[m] = psi_post.T @ psi_post
    jump_pre = np.zeros((num_jumps + 1, p, p))
    if num_jumps:
        np.cumsum(jump_terms, axis=0, out=jump_pre[1:])
    return t, j, flow, jump_pre


def hybrid_pe_gramian(psi_arc: HybridArc, start: HybridTimePoint,
                      end: HybridTimePoint) -> np.ndarray:
    """Hybrid excitation Gramian of the filter arc over [start, end].

    Both endpoints must be stored samples of the arc, with start <= end in
    the hybrid order.  Flow contributions use composite trapezoid
    quadrature on the sample grid; each jump inside the window contributes
    the post-jump psi^T psi.
    """
    i = psi_arc.sample_index(start)
    e = psi_arc.sample_index(end)
    if e < i:
        raise ValueError("window end precedes window start")
    t, j, flow, jump_pre = _prefix_data(psi_arc)
    return (flow[e] - flow[i]) + (jump_pre[j[e]] - jump_pre[j[i]])


def certify_hybrid_pe(psi_arc: HybridArc, delta: float) -> PECertificate:
    """Scan all grid windows of hybrid length in [delta, delta + 1).

    For each grid start the earliest grid end reaching hybrid length
    ``delta`` is taken (ends beyond the band, which only arise across
    multiple simultaneous jumps, are skipped).  Raises when the arc is too
    short for a single window.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    t, j, flow, jump_pre = _prefix_data(psi_arc)
    pos = t + j  # hybrid position; nondecreasing in sample order
    total = pos[-1] - pos[0]
    if total < delta:
        raise ValueError(
            f"arc has hybrid length {total:.6g}, shorter than delta={delta:.6g}"
        )
    ends = np.searchsorted(pos, pos + delta - 1e-12, side="left")
    starts = np.nonzero(ends < len(pos))[0]
    ends = ends[starts]
    lengths = pos[ends] - pos[starts]
    in_band = lengths < delta + 1.0
    starts, ends = starts[in_band], ends[in_band]
    if len(starts) == 0:
        raise ValueError("no grid window has hybrid length in [delta, delta+1)")
    grams = (flow[ends] - flow[starts]) + (jump_pre[j[ends]] - jump_pre[j[starts]])
    lam = lambda_min_sym_stacked(grams)
    worst = int(np.argmin(lam))
    i, e = starts[worst], ends[worst]
    return PECertificate(
        delta=float(delta),
        mu=float(lam[worst]),
        worst_window=(
            HybridTimePoint(float(t[i]), int(j[i])),
            HybridTimePoint(float(t[e]), int(j[e])),
        ),
        window_count=int(len(starts)),
    )


def classic_pe_ct(t: np.ndarray, psi: np.ndarray, t_window: float) -> float:
    """Classical continuous-time excitation level of a sampled signal.

    ``psi`` holds n-by-p samples on the strictly increasing grid ``t``.
    Returns the minimum over window starts of the smallest eigenvalue of
    the trapezoid integral of psi^T psi over [t_k, t_k + t_window].
    """
    if t_window <= 0:
        raise ValueError("t_window must be positive")
    t = np.asarray(t, dtype=float)
    v = _as_matrix_stack(np.asarray(psi, dtype=float))
    if t[-1] - t[0] < t_window:
        raise ValueError("signal shorter than the requested window")
    g = np.einsum("kij,kil->kjl", v, v)
    p = g.shape[1]
    flow = np.zeros((len(t), p, p))
    seg = 0.5 * (t[1:] - t[:-1])[:, None, None] * (g[1:] + g[:-1])
    np.cumsum(seg, axis=0, out=flow[1:])
    ends = np.searchsorted(t, t + t_window - 1e-12, side="left")
    starts = np.nonzero(ends < len(t))[0]
    ends = ends[starts]
    grams = flow[ends] - flow[starts]
    return float(lambda_min_sym_stacked(grams).min())


def classic_pe_dt(psi_seq: np.ndarray, j_window: int) -> float:
    """Classical discrete-time excitation level of a matrix sequence.

    Windows sum psi(i)^T psi(i) for i = j .. j + j_window (j_window + 1
    terms).  Returns the minimum over starts of the smallest eigenvalue.
    """
    if j_window < 1:
        raise ValueError("j_window must be at least 1")
    v = _as_matrix_stack(np.asarray(psi_seq, dtype=float))
    count = len(v)
    if count < j_window + 1:
        raise ValueError("sequence shorter than the requested window")
    g = np.einsum("kij,kil->kjl", v, v)
    p = g.shape[1]
    pref = np.zeros((count + 1, p, p))
    np.cumsum(g, axis=0, out=pref[1:])
    starts = np.arange(0, count - j_window)
    grams = pref[starts + j_window + 1] - pref[starts]
    return float(lambda_min_sym_stacked(grams).min())
