"""Spectral-tetris streaming construction for divergent diagonals.

Given a sequence with first entry in [0, 1), remaining entries in [0, 1/2],
and divergent sum, the stream emits finitely supported unit row vectors whose
consecutive overlaps are engineered to be orthogonal. The squared column
norms of the emitted rows then realize the prescribed diagonal values, column
by column, so the infinite projection P = sum of v v^T is produced lazily.

Column indexing is 0-based throughout; row numbers start at 1 (they are
counts). Thresholds m_n and k_n are counts of terms, matching the usual
"smallest k whose partial sum reaches n" definitions, so a row's 0-based
support is [k_{n-1}-2, k_n-1].

Partial-sum boundaries are decided with math.fsum (correctly rounded), so an
exact hit such as 0.5 + 0.5 = 1 lands on the minimal count deterministically;
a plain running sum is only used to locate the neighborhood quickly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .diagonal import DiagonalSpec

ROW_NORM_TOL = 1e-12
SOLVE_A_TOL = 1e-12
_CHUNK = 1024
_BOUNDARY_GUARD = 1e-9

# Boundary radicands (d1 - a, d2 - sigma + a, and the trailing pair) vanish
# exactly whenever a column block ends flush with a row, e.g. for a constant
# diagonal 0.1 where sigma = d1 + d2 in real arithmetic. Cancellation leaves
# ~1e-16 residue that sqrt amplifies to ~1e-8 spurious entries, which ruins
# orthogonality between adjacent rows. Anything this small is a true zero.
_SNAP_TOL = 1e-13


class NeedsMoreTermsError(RuntimeError):
    """The available source terms cannot reach the requested partial sum."""


@dataclass(frozen=True)
class SparseRow:
    """One emitted row: ``values`` occupy contiguous permuted columns
    ``start .. start + len(values) - 1``."""

    n: int
    start: int
    values: tuple[float, ...]

    @property
    def support(self) -> tuple[int, int]:
        return (self.start, self.start + len(self.values) - 1)

    def to_json_line(self) -> str:
        lo, hi = self.support
        return json.dumps({"n": self.n, "support": [lo, hi], "values": list(self.values)})

    @classmethod
    def from_json_line(cls, line: str) -> "SparseRow":
        obj = json.loads(line)
        return cls(int(obj["n"]), int(obj["support"][0]), tuple(float(x) for x in obj["values"]))


def solve_a(sigma: float, d1: float, d2: float) -> float:
    """Split value for the 2x2 overlap table with row sums (a, sigma-a) and
    column constraints (d1, d2).

    Solves a*(d1-a) = (sigma-a)*(d2-sigma+a), which makes consecutive rows
    orthogonal. Requires max(d1, d2) <= sigma <= d1+d2 and all three in
    [0, 1]. In the degenerate case d1 = d2 = sigma any split works; a = sigma
    is returned, which zeroes two of the four table entries.
    """
    hi_d = max(d1, d2)
    if min(d1, d2) < -SOLVE_A_TOL:
        raise ValueError(f"negative column value: d1={d1}, d2={d2}")
    if max(hi_d, sigma) > 1.0 + SOLVE_A_TOL:
        raise ValueError(f"values above 1: sigma={sigma}, d1={d1}, d2={d2}")
    if sigma < hi_d - SOLVE_A_TOL:
        raise ValueError(f"sigma={sigma} < max(d1,d2)={hi_d}")
    if sigma > d1 + d2 + SOLVE_A_TOL:
        raise ValueError(f"sigma={sigma} > d1+d2={d1 + d2}")
    den = 2.0 * sigma - d1 - d2
    if den > 0.0:
        a = sigma * (sigma - d2) / den
    else:
        a = sigma
    lo = max(0.0, sigma - d2)
    hi = max(lo, min(sigma, d1))
    return min(max(a, lo), hi)


class TetrisStream:
    """Single-owner state machine emitting the rows of the construction.

    ``source`` may be a DiagonalSpec or an iterable of (label, value) pairs;
    labels identify positions of the original input (a spec source gets
    labels 0, 1, 2, ...). Values are validated lazily as they materialize:
    the first must lie in [0, 1), the rest in [0, 1/2].

    Public state, all read-only for callers:
      pi            permutation as source positions, extended blockwise;
      m, k          threshold counts m_n, k_n (entry n-1 holds the value for n);
      sigma, a      per-row split parameters;
      rows_emitted  number of rows produced so far.
    """

    def __init__(self, source, max_terms: int = 10_000_000):
        if isinstance(source, DiagonalSpec):
            pairs: Iterable[tuple[int, float]] = enumerate(source.values())
        else:
            pairs = source
        self._source: Iterator[tuple[int, float]] = iter(pairs)
        self._exhausted = False
        self.max_terms = max_terms
        self._labels: list[int] = []
        self._vals: list[float] = []
        self.pi: list[int] = []
        self._perm_vals: list[float] = []
        self.m: list[int] = []
        self.k: list[int] = []
        self.sigma: list[float] = []
        self.a: list[float] = []
        self.rows_emitted = 0
        self._rows: list[SparseRow] = []
        self._col_mass: list[float] = []

    # -- source materialization -------------------------------------------

    def _materialize_chunk(self) -> bool:
        if self._exhausted:
            return False
        got = 0
        for label, value in self._source:
            v = float(value)
            pos = len(self._vals)
            if pos == 0:
                if not 0.0 <= v < 1.0:
                    raise ValueError(f"first entry {v} outside [0, 1)")
            elif not -SOLVE_A_TOL <= v <= 0.5 + SOLVE_A_TOL:
                raise ValueError(f"entry {v} at position {pos} outside [0, 1/2]")
            self._labels.append(int(label))
            self._vals.append(min(max(v, 0.0), 1.0))
            got += 1
            if got >= _CHUNK:
                return True
        self._exhausted = True
        return got > 0

    def _need_terms(self, count: int, target: float | None = None) -> None:
        if count > self.max_terms:
            msg = f"needs {count} source terms (cap max_terms={self.max_terms})"
            if target is not None:
                msg += f" while accumulating toward {target}; is the sum divergent?"
            raise NeedsMoreTermsError(msg)
        while len(self._vals) < count:
            if not self._materialize_chunk():
                msg = f"source exhausted after {len(self._vals)} terms"
                if target is not None:
                    msg += f"; partial sum cannot reach {target}"
                raise NeedsMoreTermsError(msg)

    # -- thresholds and permutation ---------------------------------------

    def _min_count(self, vals: list[float], target: float, lo_count: int, extendable: bool) -> int:
        """Smallest k > lo_count with fsum(vals[:k]) >= target."""
        k = max(lo_count + 1, 1)
        if extendable:
            self._need_terms(k, target)
        acc = math.fsum(vals[:k])
        while acc < target - _BOUNDARY_GUARD:
            k += 1
            if extendable:
                self._need_terms(k, target)
            elif k > len(vals):
                raise NeedsMoreTermsError(f"prefix of {len(vals)} terms sums below {target}")
            acc += vals[k - 1]
        while k > lo_count + 1 and math.fsum(vals[: k - 1]) >= target:
            k -= 1
        while math.fsum(vals[:k]) < target:
            k += 1
            if extendable:
                self._need_terms(k, target)
            elif k > len(vals):
                raise NeedsMoreTermsError(f"prefix of {len(vals)} terms sums below {target}")
        return k

    def _ensure_thresholds(self, n: int) -> None:
        while len(self.m) < n:
            nn = len(self.m) + 1
            prev = self.m[-1] if self.m else 0
            mn = self._min_count(self._vals, float(nn), prev, extendable=True)
            self.m.append(mn)
            block = sorted(range(prev, mn), key=lambda p: -self._vals[p])
            self.pi.extend(block)
            self._perm_vals.extend(self._vals[p] for p in block)
        while len(self.k) < n:
            nn = len(self.k) + 1
            prev = self.m[nn - 2] if nn >= 2 else 0
            kn = self._min_count(self._perm_vals, float(nn), prev, extendable=False)
            if not prev + 2 <= kn <= self.m[nn - 1]:
                raise AssertionError(
                    f"threshold sandwich violated at n={nn}: "
                    f"m_prev+2={prev + 2}, k={kn}, m={self.m[nn - 1]}"
                )
            if self._perm_vals[kn - 2] < self._perm_vals[kn - 1]:
                raise AssertionError(f"reorder postcondition failed at n={nn}")
            self.k.append(kn)

    def permuted_labels(self, count: int) -> list[int]:
        """Source labels of the first ``count`` columns in working order."""
        if count > len(self.pi):
            raise ValueError(f"only {len(self.pi)} columns ordered so far, asked for {count}")
        return [self._labels[p] for p in self.pi[:count]]

    def _ensure_row_params(self, n: int) -> None:
        self._ensure_thresholds(n)
        while len(self.sigma) < n:
            nn = len(self.sigma) + 1
            kn = self.k[nn - 1]
            s = math.fsum([float(nn)] + [-v for v in self._perm_vals[: kn - 2]])
            d1 = self._perm_vals[kn - 2]
            d2 = self._perm_vals[kn - 1]
            if not max(d1, d2) - SOLVE_A_TOL <= s <= d1 + d2 + SOLVE_A_TOL:
                raise AssertionError(
                    f"sigma bounds violated at n={nn}: sigma={s}, d1={d1}, d2={d2}"
                )
            self.sigma.append(s)
            self.a.append(solve_a(s, d1, d2))

    # -- row emission ------------------------------------------------------

    @staticmethod
    def _root(x: float, snap: bool = False) -> float:
        if x < -1e-12:
            raise AssertionError(f"negative radicand {x}")
        if snap and x <= _SNAP_TOL:
            return 0.0
        return math.sqrt(max(x, 0.0))

    def next_row(self) -> SparseRow:
        n = self.rows_emitted + 1
        self._ensure_row_params(n)
        kn = self.k[n - 1]
        sig, a = self.sigma[n - 1], self.a[n - 1]
        if n == 1:
            start = 0
            vals = [self._root(v) for v in self._perm_vals[: kn - 2]]
        else:
            kp = self.k[n - 2]
            start = kp - 2
            ap, sp = self.a[n - 2], self.sigma[n - 2]
            vals = [
                self._root(self._perm_vals[kp - 2] - ap, snap=True),
                self._root(self._perm_vals[kp - 1] - sp + ap, snap=True),
            ]
            vals.extend(self._root(v) for v in self._perm_vals[kp : kn - 2])
        vals.append(self._root(a, snap=True))
        vals.append(-self._root(sig - a, snap=True))
        norm2 = math.fsum(x * x for x in vals)
        if abs(norm2 - 1.0) > ROW_NORM_TOL:
            raise AssertionError(f"row {n} norm^2 = {norm2}")
        row = SparseRow(n, start, tuple(vals))
        if len(self._col_mass) < kn:
            self._col_mass.extend([0.0] * (kn - len(self._col_mass)))
        for off, x in enumerate(row.values):
            self._col_mass[start + off] += x * x
        self.rows_emitted = n
        self._rows.append(row)
        return row


def reorder(source, upto: int):
    """Permutation prefix and thresholds ({m_n}, {k_n}) for rows 1..upto.

    ``source`` is a DiagonalSpec, pair iterable, or an existing TetrisStream
    (which is then advanced in place). Returns (labels, m, k) where labels
    lists the original positions of the permuted prefix covering m_upto terms.
    """
    stream = source if isinstance(source, TetrisStream) else TetrisStream(source)
    stream._ensure_thresholds(upto)
    labels = [stream._labels[p] for p in stream.pi]
    return labels, list(stream.m[:upto]), list(stream.k[:upto])


def sigma_n(stream: TetrisStream, n: int) -> float:
    stream._ensure_row_params(n)
    return stream.sigma[n - 1]


def next_row(stream: TetrisStream) -> SparseRow:
    return stream.next_row()


def completed_columns(stream: TetrisStream):
    """Count and squared norms of columns no future row will touch.

    After R emitted rows these are the permuted columns 0 .. k_R - 3; each
    squared norm equals the corresponding permuted diagonal value (that is
    the theorem being checked, so the accumulated value is returned rather
    than the target).
    """
    if stream.rows_emitted == 0:
        return 0, np.zeros(0)
    count = max(stream.k[stream.rows_emitted - 1] - 2, 0)
    return count, np.array(stream._col_mass[:count])


def projection_prefix(stream: TetrisStream, rows: int) -> np.ndarray:
    """Sum of v v^T over the first ``rows`` rows, as a dense k_R x k_R block.

    Axes are reordered by ascending original label so the diagonal aligns
    with the input order restricted to the touched positions.
    """
    if rows == 0:
        return np.zeros((0, 0))
    while stream.rows_emitted < rows:
        stream.next_row()
    dim = stream.k[rows - 1]
    P = np.zeros((dim, dim))
    for row in stream._rows[:rows]:
        v = np.asarray(row.values)
        sl = slice(row.start, row.start + v.size)
        P[sl, sl] += np.outer(v, v)
    labels = np.asarray([stream._labels[p] for p in stream.pi[:dim]])
    order = np.argsort(labels, kind="stable")
    return P[np.ix_(order, order)]
