"""Time meshes of an interval, refinable by midpoint bisection.

A mesh is an ordered partition of [t0, t_end]. The only refinement primitive
is splitting an interval at its midpoint, so every breakpoint a mesh can ever
acquire has the exact form t_i + k 2^{-m} (t_{i+1} - t_i) relative to the
initial partition. The (ancestor, level, offset) integer triple stored per
interval records that form exactly; the float breakpoints carry the usual
(a+b)/2 arithmetic and may drift from the ideal dyadic value by rounding only.
"""

import json

import numpy as np

__all__ = ["TimeMesh", "make_initial", "bisect", "is_refinement_of"]


class TimeMesh:
    """Ordered time intervals reachable from an initial partition by bisection.

    Immutable after construction: refinement produces a new mesh, so instances
    are safe to share between threads.

    Attributes
    ----------
    breakpoints : ndarray, shape (N+1,)
        Strictly increasing, from t0 to t_end.
    initial_breakpoints : ndarray
        Breakpoints of the partition the refinement started from.
    ancestor, level, offset : int ndarrays, shape (N,)
        Interval i spans the dyadic piece [k 2^-m, (k+1) 2^-m] of initial
        interval ``ancestor[i]``, with m = level[i], k = offset[i].
    """

    __slots__ = ("breakpoints", "initial_breakpoints", "ancestor", "level", "offset")

    def __init__(self, breakpoints, initial_breakpoints, ancestor, level, offset):
        bps = np.ascontiguousarray(breakpoints, dtype=float)
        if bps.ndim != 1 or bps.size < 2:
            raise ValueError("a mesh needs at least two breakpoints")
        if not np.all(np.diff(bps) > 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        init = np.ascontiguousarray(initial_breakpoints, dtype=float)
        anc = np.ascontiguousarray(ancestor, dtype=np.int64)
        lev = np.ascontiguousarray(level, dtype=np.int64)
        off = np.ascontiguousarray(offset, dtype=np.int64)
        n = bps.size - 1
        if not (anc.size == lev.size == off.size == n):
            raise ValueError("provenance arrays must have one entry per interval")
        for arr in (bps, init, anc, lev, off):
            arr.flags.writeable = False
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "initial_breakpoints", init)
        object.__setattr__(self, "ancestor", anc)
        object.__setattr__(self, "level", lev)
        object.__setattr__(self, "offset", off)

    def __setattr__(self, name, value):
        raise AttributeError("TimeMesh is immutable")

    @classmethod
    def from_breakpoints(cls, breakpoints):
        """Wrap an arbitrary increasing breakpoint sequence as its own initial mesh."""
        bps = np.asarray(breakpoints, dtype=float)
        n = bps.size - 1
        return cls(bps, bps, np.arange(n), np.zeros(n, dtype=int), np.zeros(n, dtype=int))

    # -- basic queries ------------------------------------------------------

    @property
    def n_intervals(self):
        return self.breakpoints.size - 1

    def __len__(self):
        return self.n_intervals

    @property
    def t0(self):
        return float(self.breakpoints[0])

    @property
    def t_end(self):
        return float(self.breakpoints[-1])

    @property
    def lengths(self):
        return np.diff(self.breakpoints)

    @property
    def max_step(self):
        return float(np.max(self.lengths))

    def interval(self, i):
        return float(self.breakpoints[i]), float(self.breakpoints[i + 1])

    def provenance_breakpoints(self):
        """Left endpoints reconstructed exactly from the integer provenance."""
        t_init = self.initial_breakpoints
        h_init = np.diff(t_init)
        return t_init[self.ancestor] + self.offset * h_init[self.ancestor] * 2.0 ** (-self.level.astype(float))

    def to_json(self):
        """Serialize as a JSON array of breakpoints."""
        return json.dumps(self.breakpoints.tolist())

    def __repr__(self):
        return f"TimeMesh([{self.t0}, {self.t_end}], n={self.n_intervals})"


def make_initial(t0, t_end, n):
    """Uniform initial mesh of ``n`` intervals on [t0, t_end]."""
    if n < 1:
        raise ValueError("need at least one interval")
    if not t0 < t_end:
        raise ValueError("t0 must be smaller than t_end")
    bps = np.linspace(t0, t_end, n + 1)
    return TimeMesh(bps, bps, np.arange(n), np.zeros(n, dtype=int), np.zeros(n, dtype=int))


def bisect(mesh, marked):
    """Split every marked interval at its midpoint.

    ``marked`` is a set of interval indices; the result has
    ``len(mesh) + len(marked)`` intervals and refines ``mesh``.
    """
    marked = np.asarray(sorted({int(i) for i in marked}), dtype=int)
    n = mesh.n_intervals
    if marked.size and (marked.min() < 0 or marked.max() >= n):
        raise IndexError("marked interval index out of range")
    is_marked = np.zeros(n, dtype=bool)
    is_marked[marked] = True

    bps = [mesh.breakpoints[0]]
    anc, lev, off = [], [], []
    for i in range(n):
        a, b = mesh.breakpoints[i], mesh.breakpoints[i + 1]
        if is_marked[i]:
            bps.extend([0.5 * (a + b), b])
            anc.extend([mesh.ancestor[i]] * 2)
            lev.extend([mesh.level[i] + 1] * 2)
            off.extend([2 * mesh.offset[i], 2 * mesh.offset[i] + 1])
        else:
            bps.append(b)
            anc.append(mesh.ancestor[i])
            lev.append(mesh.level[i])
            off.append(mesh.offset[i])
    return TimeMesh(np.array(bps), mesh.initial_breakpoints, anc, lev, off)


def is_refinement_of(fine, coarse):
    """True iff every breakpoint of ``coarse`` is a breakpoint of ``fine``.

    Breakpoints are compared exactly: bisection copies the surviving
    breakpoints verbatim, so chains produced by :func:`bisect` compare equal
    without tolerance.
    """
    return bool(np.isin(coarse.breakpoints, fine.breakpoints).all())
