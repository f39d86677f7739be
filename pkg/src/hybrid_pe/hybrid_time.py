"""Hybrid time domains and hybrid arcs.

A hybrid time domain is a union of intervals [t_j, t_{j+1}] x {j} built
from a nondecreasing sequence of jump times starting at 0.  A hybrid arc
is a signal sampled on such a domain, with the pre- and post-jump values
at each jump time both stored (as the last sample of interval j and the
first sample of interval j+1).
"""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .linalg import spectral_norms_stacked

_GRID_TOL = 1e-9


@dataclass(frozen=True, order=False)
class HybridTimePoint:
    """A point (t, j): elapsed ordinary time t and jump count j."""

    t: float
    j: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if self.j < 0:
            raise ValueError("j must be nonnegative")

    @property
    def length(self) -> float:
        """Hybrid length t + j of the point."""
        return self.t + self.j

    def __le__(self, other: "HybridTimePoint") -> bool:
        return self.t <= other.t and self.j <= other.j

    def __lt__(self, other: "HybridTimePoint") -> bool:
        return self <= other and (self.t, self.j) != (other.t, other.j)


def hybrid_length(a: HybridTimePoint, b: HybridTimePoint) -> float:
    """Signed hybrid distance (b.t - a.t) + (b.j - a.j); caller enforces ordering."""
    return (b.t - a.t) + (b.j - a.j)


@dataclass(frozen=True)
class HybridTimeDomain:
    """Finite hybrid time domain given by its jump-time sequence.

    ``jump_times`` holds t_0 = 0 up to t_{J+1}, so a domain with J jumps
    has J + 2 entries and J + 1 intervals [t_j, t_{j+1}] x {j}.
    ``complete`` records whether the underlying solution was truncated at
    the final time or genuinely stopped there.
    """

    jump_times: tuple
    complete: bool = False

    def __post_init__(self):
        ts = tuple(float(t) for t in self.jump_times)
        if len(ts) < 2:
            raise ValueError("need at least two boundary times")
        if abs(ts[0]) > _GRID_TOL:
            raise ValueError("domain must start at t = 0")
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ValueError("jump times must be nondecreasing")
        object.__setattr__(self, "jump_times", ts)

    @property
    def num_jumps(self) -> int:
        return len(self.jump_times) - 2

    @property
    def num_intervals(self) -> int:
        return len(self.jump_times) - 1

    @property
    def t_end(self) -> float:
        return self.jump_times[-1]

    def interval(self, j: int) -> tuple:
        """The interval [t_j, t_{j+1}] of jump index j."""
        return (self.jump_times[j], self.jump_times[j + 1])

    def contains(self, p: HybridTimePoint) -> bool:
        if p.j >= self.num_intervals:
            return False
        lo, hi = self.interval(p.j)
        return lo - _GRID_TOL <= p.t <= hi + _GRID_TOL


def upsilon(domain: HybridTimeDomain) -> set:
    """The set of pre-jump instants: points (t, j) with (t, j+1) also in the domain.

    Exactly the J points (t_{j+1}, j) for j = 0 .. J-1.
    """
    return {
        HybridTimePoint(domain.jump_times[j + 1], j) for j in range(domain.num_jumps)
    }


@dataclass
class HybridArc:
    """A sampled signal on a hybrid time domain.

    ``times[j]`` is the strictly increasing sample grid of interval j
    (first entry t_j, last entry t_{j+1}); ``values[j]`` stacks the sample
    values with shape (len(times[j]), *value_shape).  Dual values at a
    jump time appear as the last sample of interval j and the first sample
    of interval j + 1.
    """

    domain: HybridTimeDomain
    times: list = field(repr=False)
    values: list = field(repr=False)
    termination: str = "t_end"

    def __post_init__(self):
        if len(self.times) != self.domain.num_intervals:
            raise ValueError("one sample grid per domain interval required")
        for j, (ts, vs) in enumerate(zip(self.times, self.values)):
            ts = np.asarray(ts, dtype=float)
            vs = np.asarray(vs, dtype=float)
            if len(ts) != len(vs) or len(ts) == 0:
                raise ValueError(f"interval {j}: empty or mismatched samples")
            lo, hi = self.domain.interval(j)
            if abs(ts[0] - lo) > _GRID_TOL or abs(ts[-1] - hi) > _GRID_TOL:
                raise ValueError(
                    f"interval {j}: samples must span [{lo}, {hi}], got [{ts[0]}, {ts[-1]}]"
                )
            if len(ts) > 1 and np.any(np.diff(ts) <= 0):
                raise ValueError(f"interval {j}: sample times must strictly increase")
            self.times[j] = ts
            self.values[j] = vs
        self._ordered = None

    @property
    def value_shape(self) -> tuple:
        return tuple(self.values[0].shape[1:])

    def num_samples(self) -> int:
        return sum(len(ts) for ts in self.times)

    # -- ordered (lexicographic in (j, t)) flat views -------------------

    def ordered(self) -> tuple:
        """Flat (t, j, values) arrays of all samples in hybrid-time order."""
        if self._ordered is None:
            t = np.concatenate(self.times)
            j = np.concatenate(
                [np.full(len(ts), jj, dtype=int) for jj, ts in enumerate(self.times)]
            )
            v = np.concatenate(self.values, axis=0)
            self._ordered = (t, j, v)
        return self._ordered

    def sample_index(self, p: HybridTimePoint) -> int:
        """Flat index of the sample at ``p``; raises if p is off the grid."""
        if not self.domain.contains(p):
            raise ValueError(f"({p.t}, {p.j}) is outside the arc domain")
        offset = sum(len(ts) for ts in self.times[: p.j])
        ts = self.times[p.j]
        i = bisect_left(ts, p.t - _GRID_TOL)
        if i >= len(ts) or abs(ts[i] - p.t) > max(_GRID_TOL, 1e-12 * max(1.0, p.t)):
            raise ValueError(f"({p.t}, {p.j}) is not a stored sample")
        return offset + i

    def value_at(self, p: HybridTimePoint) -> np.ndarray:
        return self.ordered()[2][self.sample_index(p)]

    def final_point(self) -> HybridTimePoint:
        j = self.domain.num_intervals - 1
        return HybridTimePoint(float(self.times[j][-1]), j)

    def final_value(self) -> np.ndarray:
        return self.values[-1][-1]

    def map_values(self, fn) -> "HybridArc":
        """New arc on the same domain with ``fn`` applied to each sample value."""
        new_vals = []
        for vs in self.values:
            new_vals.append(np.stack([np.asarray(fn(v), dtype=float) for v in vs]))
        return HybridArc(self.domain, [ts.copy() for ts in self.times], new_vals,
                         termination=self.termination)

    def map_stacked(self, fn) -> "HybridArc":
        """Vectorized variant of :meth:`map_values`.

        ``fn`` receives the full (N, *value_shape) stack of ordered samples
        and must return an (N, ...) array.
        """
        _, _, v = self.ordered()
        out = np.asarray(fn(v), dtype=float)
        if out.shape[0] != v.shape[0]:
            raise ValueError("transform must preserve the number of samples")
        vals = []
        k = 0
        for ts in self.times:
            vals.append(out[k : k + len(ts)].copy())
            k += len(ts)
        return HybridArc(self.domain, [ts.copy() for ts in self.times], vals,
                         termination=self.termination)

    def norms(self) -> np.ndarray:
        """Per-sample norms (Euclidean for vectors, induced 2-norm for matrices)."""
        _, _, v = self.ordered()
        if v.ndim <= 2:
            return np.linalg.norm(v.reshape(v.shape[0], -1), axis=1)
        return spectral_norms_stacked(v)

    def running_sup(self) -> np.ndarray:
        """Prefix maxima of the per-sample norms in hybrid-time order."""
        return np.maximum.accumulate(self.norms())


def sup_norm(arc: HybridArc, upto: HybridTimePoint) -> float:
    """Hybrid supremum norm of the arc from (0, 0) to ``upto``.

    The essential supremum over flow intervals is approximated by the
    maximum over the stored sample grid; ``upto`` must lie in the domain.
    """
    if not arc.domain.contains(upto):
        raise ValueError(f"({upto.t}, {upto.j}) is outside the arc domain")
    t, j, _ = arc.ordered()
    norms = arc.norms()
    keep = (j < upto.j) | ((j == upto.j) & (t <= upto.t + _GRID_TOL))
    if not np.any(keep):
        raise ValueError("no samples at or before the requested point")
    return float(norms[keep].max())


def arc_norm_series(arc: HybridArc) -> HybridArc:
    """Scalar arc of per-sample norms |value(t, j)| on the same domain."""
    out_vals = []
    k = 0
    norms = arc.norms()
    for ts in arc.times:
        out_vals.append(norms[k : k + len(ts)].copy())
        k += len(ts)
    return HybridArc(arc.domain, [ts.copy() for ts in arc.times], out_vals,
                     termination=arc.termination)


# -- CSV serialization ---------------------------------------------------


def write_arc_csv(arc: HybridArc, path) -> None:
    """Write the arc as CSV with columns t, j, component_0..component_{n-1}.

    Matrix-valued samples are flattened row-major.  Jump instants appear
    as two consecutive rows with equal t and incremented j.
    """
    t, j, v = arc.ordered()
    flat = v.reshape(v.shape[0], -1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "j"] + [f"component_{i}" for i in range(flat.shape[1])])
        for row_t, row_j, row_v in zip(t, j, flat):
            writer.writerow([repr(float(row_t)), int(row_j)] + [repr(float(x)) for x in row_v])


def read_arc_csv(path, value_shape: tuple | None = None) -> HybridArc:
    """Read an arc written by ``write_arc_csv``.

    ``value_shape`` restores matrix-valued samples (row-major); by default
    samples stay 1-D vectors.
    """
    ts: list = []
    js: list = []
    vs: list = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ncomp = len(header) - 2
        for row in reader:
            ts.append(float(row[0]))
            js.append(int(row[1]))
            vs.append([float(x) for x in row[2 : 2 + ncomp]])
    if not ts:
        raise ValueError(f"{path}: no samples")
    times: list = []
    values: list = []
    jump_times = [ts[0]]
    cur_t: list = []
    cur_v: list = []
    cur_j = js[0]
    for t, j, v in zip(ts, js, vs):
        if j != cur_j:
            if j != cur_j + 1:
                raise ValueError(f"{path}: jump index skips from {cur_j} to {j}")
            times.append(np.array(cur_t))
            values.append(np.array(cur_v))
            jump_times.append(t)
            cur_t, cur_v, cur_j = [], [], j
        cur_t.append(t)
        cur_v.append(v)
    times.append(np.array(cur_t))
    values.append(np.array(cur_v))
    # t_0 = 0, the interior jump times collected above, then the end time
    domain = HybridTimeDomain(tuple(jump_times + [float(times[-1][-1])]))
    if value_shape is not None:
        values = [v.reshape(v.shape[0], *value_shape) for v in values]
    return HybridArc(domain, times, values)
