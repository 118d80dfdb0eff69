"""Finite Schur-Horn construction: a symmetric matrix with prescribed
eigenvalues and prescribed diagonal.

``horn_build`` peels off the smallest eigenvalue as a rank-one block supported
on a trailing segment of the (sorted) diagonal, compensates the head by
bumping diagonal mass across the cut, recurses on the head, and finally
repairs the bumped entries with spectrum-preserving two-coordinate rotations.
Peeling is an explicit loop rather than call-stack recursion so large inputs
do not hit the interpreter recursion limit.

The single-entry bump (all compensation placed on the last head entry) can
overshoot the head's majorization budget; see the note inside
``_plan_peels``. When that happens the compensation is spread greedily over
several head entries instead, and the repair becomes a short chain of
targeted rotations; both paths record their rotations in a
:class:`~carpenter.moves.MovePlan`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .givens import rotate_pair_inplace
from .moves import Move, MovePlan, _solve_rotation_angle

MAJORIZATION_TOL = 1e-10
RANK_ONE_SUM_TOL = 1e-10


@dataclass(frozen=True)
class MajorizationInput:
    """Eigenvalue/diagonal pair for the construction.

    ``lambdas``: positive values, ``diag``: nonnegative values with
    len(diag) >= len(lambdas). Both are sorted internally, so callers may pass
    either in any order; the output respects the caller's diagonal order.
    """

    lambdas: tuple[float, ...]
    diag: tuple[float, ...]

    def __init__(self, lambdas, diag):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in lambdas))
        object.__setattr__(self, "diag", tuple(float(x) for x in diag))

    def first_violation(self) -> str | None:
        """Description of the first failed majorization condition, or None."""
        lam = sorted(self.lambdas, reverse=True)
        d = sorted(self.diag, reverse=True)
        if not lam:
            return "no eigenvalues given"
        if len(d) < len(lam):
            return f"diagonal shorter ({len(d)}) than eigenvalue list ({len(lam)})"
        if any(x <= 0.0 for x in lam):
            return "eigenvalues must be positive"
        if any(x < -1e-12 for x in d):
            return "diagonal entries must be nonnegative"
        run_d = run_l = 0.0
        for n in range(len(lam)):
            run_d += d[n]
            run_l += lam[n]
            if run_d > run_l + MAJORIZATION_TOL:
                return f"partial sum violated at n={n + 1}: {run_d} > {run_l}"
        total_d = math.fsum(d)
        total_l = math.fsum(lam)
        if abs(total_d - total_l) > MAJORIZATION_TOL:
            return f"total mismatch: sum(diag)={total_d} vs sum(lambdas)={total_l}"
        return None


def check_majorization(inp: MajorizationInput) -> bool:
    """True iff the sorted diagonal is majorized by the sorted eigenvalues."""
    return inp.first_violation() is None


def rank_one(diag, lam: float) -> np.ndarray:
    """Rank-one symmetric matrix S[i][j] = sqrt(d_i * d_j) with diagonal ``diag``.

    Requires sum(diag) = lam (the single nonzero eigenvalue) within
    ``RANK_ONE_SUM_TOL``. The diagonal is written back explicitly so it is
    exact even when sqrt(d)**2 rounds.
    """
    d = np.asarray([float(x) for x in diag], dtype=float)
    if d.size == 0 or not np.any(d):
        raise ValueError("rank_one needs at least one nonzero diagonal entry")
    if np.any(d < -1e-12):
        raise ValueError("rank_one diagonal entries must be nonnegative")
    total = math.fsum(d.tolist())
    if abs(total - lam) > RANK_ONE_SUM_TOL:
        raise ValueError(f"diagonal sums to {total}, expected eigenvalue {lam}")
    r = np.sqrt(np.clip(d, 0.0, None))
    S = np.outer(r, r)
    np.fill_diagonal(S, d)
    return S


def convex_mix_unitary(E: np.ndarray, i: int, j: int, alpha: float) -> np.ndarray:
    """Mix diagonal entries i and j of ``E`` by the rotation with cos^2 = alpha.

    Requires E[i][j] = 0 (use rotate_to_diagonal otherwise). The new diagonal
    entries are (alpha*E_ii + (1-alpha)*E_jj, (1-alpha)*E_ii + alpha*E_jj) and
    the spectrum is unchanged.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if abs(E[i, j]) > 1e-12:
        raise ValueError(
            f"E[{i}][{j}]={E[i, j]} is not zero; use moves.rotate_to_diagonal instead"
        )
    out = np.array(E, dtype=float)
    rotate_pair_inplace(out, i, j, math.sqrt(alpha), -math.sqrt(1.0 - alpha))
    return out


def _prefix_majorized(vals_desc, lams_desc, tol: float) -> bool:
    """Partial-sum test of sorted values against sorted eigenvalues (zero padded)."""
    run_v = run_l = 0.0
    for t, v in enumerate(vals_desc):
        run_v += v
        if t < len(lams_desc):
            run_l += lams_desc[t]
        if run_v > run_l + tol:
            return False
    return True


def _waterfall(head, lams, delta: float) -> list[float]:
    """Spread ``delta`` of extra diagonal mass over ``head`` (sorted desc).

    Fills front to back, keeping the result sorted and every prefix within the
    eigenvalue prefix sums. The cap at position t is the smallest slack over
    position t and everything after it: later entries can only grow, so
    filling a local brim that a downstream prefix cannot afford would strand
    the surplus there. The last slack equals delta (totals match), so a full
    absorption exists whenever the head's own prefix slacks are nonnegative,
    which the peel recursion maintains.
    """
    slack = []
    lam_prefix = 0.0
    d_prefix = 0.0
    for t, dt in enumerate(head):
        lam_prefix += lams[t] if t < len(lams) else 0.0
        d_prefix += dt
        slack.append(lam_prefix - d_prefix)
    for t in range(len(slack) - 2, -1, -1):
        slack[t] = min(slack[t], slack[t + 1])

    x: list[float] = []
    remaining = delta
    absorbed = 0.0
    for t, dt in enumerate(head):
        room = slack[t] - absorbed
        if t > 0:
            room = min(room, x[t - 1] - dt)
        add = min(remaining, max(room, 0.0))
        x.append(dt + add)
        absorbed += add
        remaining -= add
    if remaining > 1e-9 * max(1.0, delta):
        raise AssertionError(
            f"could not absorb bump of {delta} into head (left over: {remaining})"
        )
    x[-1] += remaining
    return x


def _plan_peels(lam_desc: list[float], vals: list[float], idx: list[int]):
    """Peel eigenvalues smallest-first, returning rank-one blocks and repairs.

    Each peel takes the largest trailing segment whose sum still reaches the
    current eigenvalue, shaves the segment's first entry by the overshoot
    ``delta``, and hands the head ``delta`` extra diagonal mass. Placing all
    of it on the last head entry (the classical choice) can break the head's
    own majorization: with diag = (0.8,)*5 against eigenvalues (1, 1, 1, 1)
    the bumped head (0.8, 0.8, 1.4) would need spectrum (1, 1, 1), which
    forces the identity matrix. The single bump is used whenever it stays
    majorized; otherwise the mass is spread with ``_waterfall`` and repaired
    by one rotation per touched entry.
    """
    blocks: list[tuple[list[float], list[int]]] = []
    peel_repairs: list[list[tuple]] = []
    r = len(lam_desc)
    while r >= 2:
        lam_r = lam_desc[r - 1]
        m = len(vals)
        rev_cum = np.cumsum(vals[::-1])
        t = int(np.searchsorted(rev_cum, lam_r, side="left"))
        m0 = m - t  # 1-based index of the segment start
        m0 = max(r, min(m0, m))
        delta = math.fsum(vals[m0 - 1 :]) - lam_r
        delta = min(max(delta, 0.0), vals[m0 - 1])

        seg_vals = [vals[m0 - 1] - delta] + vals[m0:]
        seg_idx = idx[m0 - 1 :]
        blocks.append((seg_vals, seg_idx))

        head_vals = vals[: m0 - 1]
        head_idx = idx[: m0 - 1]
        lam_head = lam_desc[: r - 1]
        tol = 1e-12 * max(1.0, math.fsum(lam_head))
        bump = head_vals[-1] + delta
        pos = 0
        while pos < len(head_vals) - 1 and head_vals[pos] >= bump:
            pos += 1
        candidate = head_vals[:-1]
        candidate.insert(pos, bump)
        if _prefix_majorized(candidate, lam_head, tol):
            if delta > 0.0:
                dh = head_vals[-1]
                dt_ = vals[m0 - 1]
                den = dh - dt_ + 2.0 * delta
                alpha = 1.0 if den <= 0.0 else min(1.0, max(0.0, (dh - dt_ + delta) / den))
                peel_repairs.append([("mix", head_idx[-1], seg_idx[0], alpha)])
            else:
                peel_repairs.append([])
            cand_idx = head_idx[:-1]
            cand_idx.insert(pos, head_idx[-1])
            vals, idx = candidate, cand_idx
        else:
            x = _waterfall(head_vals, lam_head, delta)
            repairs = [
                ("rot", head_idx[t_], seg_idx[0], head_vals[t_])
                for t_ in range(len(head_vals))
                if x[t_] - head_vals[t_] > 1e-14
            ]
            peel_repairs.append(repairs)
            vals, idx = x, head_idx
        r -= 1
    blocks.append((vals, idx))
    return blocks, peel_repairs


def horn_build(inp: MajorizationInput, return_plan: bool = False):
    """Symmetric matrix with eigenvalues ``lambdas`` (plus zeros) and diagonal
    ``diag``, in the caller's diagonal order.

    With ``return_plan=True`` also returns the pre-repair block-diagonal start
    matrix and the MovePlan of repairs, so the run can be replayed.
    """
    violation = inp.first_violation()
    if violation is not None:
        raise ValueError(f"majorization fails: {violation}")
    lam_desc = sorted(inp.lambdas, reverse=True)
    order = sorted(range(len(inp.diag)), key=lambda k: -inp.diag[k])
    vals = [inp.diag[k] for k in order]
    blocks, peel_repairs = _plan_peels(lam_desc, vals, order)

    n = len(inp.diag)
    S = np.zeros((n, n))
    for seg_vals, seg_idx in blocks:
        block = _rank_one_block(seg_vals)
        S[np.ix_(seg_idx, seg_idx)] = block

    start = np.array(S) if return_plan else None
    plan = MovePlan()
    for repairs in reversed(peel_repairs):
        for rec in repairs:
            if rec[0] == "mix":
                _, i, j, alpha = rec
                rotate_pair_inplace(S, i, j, math.sqrt(alpha), -math.sqrt(1.0 - alpha))
                plan.append(Move(i, j, "convex_mix", alpha))
            else:
                _, i, j, target = rec
                theta = _solve_rotation_angle(S[i, i], S[j, j], S[i, j], target)
                rotate_pair_inplace(S, i, j, math.cos(theta), math.sin(theta))
                plan.append(Move(i, j, "general_rotation", theta))
    if return_plan:
        return S, start, plan
    return S


def _rank_one_block(seg_vals) -> np.ndarray:
    d = np.clip(np.asarray(seg_vals, dtype=float), 0.0, None)
    r = np.sqrt(d)
    block = np.outer(r, r)
    np.fill_diagonal(block, d)
    return block
