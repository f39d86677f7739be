"""Execution of hybrid systems (C, F, D, G).

Flows are integrated with fixed-step classical RK4; entry into the jump
set is located by bisection with re-integration from the last grid point,
so the pre-jump sample lands exactly on the located jump time.  The full
trajectory is recorded as a :class:`~hybrid_pe.hybrid_time.HybridArc`
with dual samples at every jump.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hybrid_time import HybridArc, HybridTimeDomain


class NonFiniteStateError(RuntimeError):
    """The integrated state left the realm of finite floats."""


@dataclass
class HybridSystemDef:
    """Data (C, F, D, G) of a hybrid system over a flat state vector.

    ``flow_map(x, t, j)`` returns the state derivative; ``jump_map(x, t, j)``
    the post-jump state.  ``flow_predicate`` / ``jump_predicate`` decide
    membership in the flow set C and jump set D at (x, (t, j)).
    """

    flow_map: callable
    jump_map: callable
    flow_predicate: callable
    jump_predicate: callable
    state_dim: int


@dataclass
class ExecConfig:
    """Fixed-step execution settings.

    ``jump_location_tol`` bounds the bisection bracket width when locating
    jump-set entry and must lie in (0, h]; ``priority`` picks the branch
    taken on C-and-D overlap.
    """

    h: float
    t_end: float
    j_max: int = 10_000
    jump_location_tol: float = 1e-9
    priority: str = "jump"

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("step size must be positive")
        if not (0 < self.jump_location_tol <= self.h):
            raise ValueError("jump_location_tol must lie in (0, h]")
        if self.priority not in ("jump", "flow"):
            raise ValueError("priority must be 'jump' or 'flow'")


def rk4_step(f, x: np.ndarray, t: float, j: int, h: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of ``f(x, t, j)`` over [t, t+h]."""
    if h <= 0:
        raise ValueError("step size must be positive")
    k1 = f(x, t, j)
    k2 = f(x + (0.5 * h) * k1, t + 0.5 * h, j)
    k3 = f(x + (0.5 * h) * k2, t + 0.5 * h, j)
    k4 = f(x + h * k3, t + h, j)
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteStateError(f"non-finite state after step at t={t}, j={j}")
    return out


def locate_jump(predicate, f, x_lo: np.ndarray, t_lo: float, t_hi: float,
                j: int, tol: float):
    """Earliest predicate-true time in (t_lo, t_hi] by bisection.

    Each candidate time s is reached with a single shortened RK4 step from
    (x_lo, t_lo), so the returned pre-jump state is consistent with the
    fixed-step trajectory.  The predicate must be false at t_lo and true
    at t_hi.  Returns (t_event, x_event) with the predicate true at the
    returned state.
    """
    if predicate(x_lo, t_lo, j):
        raise ValueError("predicate already true at the bracket start")
    x_hi = rk4_step(f, x_lo, t_lo, j, t_hi - t_lo)
    if not predicate(x_hi, t_hi, j):
        raise ValueError("predicate not true at the bracket end")
    lo, hi = t_lo, t_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket at floating-point resolution
            break
        x_mid = rk4_step(f, x_lo, t_lo, j, mid - t_lo)
        if predicate(x_mid, mid, j):
            hi, x_hi = mid, x_mid
        else:
            lo = mid
    return hi, x_hi


def _finish(rec_times, rec_values, termination, complete=False):
    jump_times = tuple([rec_times[0][0]] + [ts[-1] for ts in rec_times])
    domain = HybridTimeDomain(jump_times, complete=complete)
    arc = HybridArc(
        domain,
        [np.asarray(ts) for ts in rec_times],
        [np.stack(vs) for vs in rec_values],
        termination=termination,
    )
    return arc


def simulate(sys: HybridSystemDef, x0, cfg: ExecConfig) -> HybridArc:
    """Run the hybrid system from ``x0`` under predicate-driven jumps.

    Flows while the flow predicate holds, jumps when the jump predicate
    holds (subject to ``cfg.priority``), and stops at ``cfg.t_end``,
    ``cfg.j_max`` jumps, or a stuck state (neither predicate true, noted
    on ``arc.termination``).
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (sys.state_dim,):
        raise ValueError(f"x0 must have shape ({sys.state_dim},)")
    t, j = 0.0, 0
    if not (sys.flow_predicate(x, t, j) or sys.jump_predicate(x, t, j)):
        raise ValueError("x0 lies in neither the flow set nor the jump set")

    rec_times = [[t]]
    rec_values = [[x.copy()]]
    time_eps = 1e-12 * max(1.0, cfg.t_end)

    while True:
        # jumps first (per priority) as long as the state sits in D
        jumped = False
        while j < cfg.j_max and sys.jump_predicate(x, t, j) and (
            cfg.priority == "jump" or not sys.flow_predicate(x, t, j)
        ):
            x = np.asarray(sys.jump_map(x, t, j), dtype=float)
            if not np.all(np.isfinite(x)):
                raise NonFiniteStateError(f"non-finite state after jump at t={t}, j={j}")
            j += 1
            rec_times.append([t])
            rec_values.append([x.copy()])
            jumped = True
        if j >= cfg.j_max and sys.jump_predicate(x, t, j) and (
            cfg.priority == "jump" or not sys.flow_predicate(x, t, j)
        ):
            return _finish(rec_times, rec_values, "j_max")
        if t >= cfg.t_end - time_eps:
            return _finish(rec_times, rec_values, "t_end")
        if not sys.flow_predicate(x, t, j):
            if jumped:
                continue
            return _finish(rec_times, rec_values, "stuck")

        rem = cfg.t_end - t
        if rem <= cfg.h * (1.0 + 1e-9):  # last step lands exactly on t_end
            h, t_try = rem, cfg.t_end
        else:
            h, t_try = cfg.h, t + cfg.h
        x_try = rk4_step(sys.flow_map, x, t, j, h)
        if sys.jump_predicate(x_try, t_try, j) and (
            cfg.priority == "jump" or not sys.flow_predicate(x_try, t_try, j)
        ):
            t_ev, x_ev = locate_jump(
                sys.jump_predicate, sys.flow_map, x, t, t_try, j,
                cfg.jump_location_tol,
            )
            t, x = t_ev, x_ev
        else:
            t, x = t_try, x_try
        if t > rec_times[-1][-1]:
            rec_times[-1].append(t)
            rec_values[-1].append(x.copy())
        else:  # event at floating-point distance from the grid point
            rec_values[-1][-1] = x.copy()


def simulate_on_domain(sys: HybridSystemDef, x0, domain: HybridTimeDomain,
                       h: float) -> HybridArc:
    """Run the hybrid system with jumps dictated by a known domain.

    Integrates each interval [t_j, t_{j+1}] with fixed steps (last step
    shortened to land exactly on t_{j+1}) and applies the jump map exactly
    at each interior boundary; no predicates are evaluated.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (sys.state_dim,):
        raise ValueError(f"x0 must have shape ({sys.state_dim},)")
    rec_times = []
    rec_values = []
    for j in range(domain.num_intervals):
        lo, hi = domain.interval(j)
        ts = [lo]
        vs = [x.copy()]
        t = lo
        while t < hi - 1e-12 * max(1.0, hi):
            rem = hi - t
            if rem <= h * (1.0 + 1e-9):  # last step lands exactly on t_{j+1}
                step, t_next = rem, hi
            else:
                step, t_next = h, t + h
            x = rk4_step(sys.flow_map, x, t, j, step)
            t = t_next
            ts.append(t)
            vs.append(x.copy())
        rec_times.append(ts)
        rec_values.append(vs)
        if j < domain.num_intervals - 1:
            x = np.asarray(sys.jump_map(x, hi, j), dtype=float)
            if not np.all(np.isfinite(x)):
                raise NonFiniteStateError(f"non-finite state after jump at t={hi}, j={j}")
    return _finish(rec_times, rec_values, "t_end", complete=domain.complete)
