"""Diagonal surgery: shift mass between entries, then repair with rotations.

``ops_shift`` edits a diagonal sequence directly, moving a prescribed amount
of mass off a low block (toward 0) and onto a high block (toward 1).
``ops_restore`` undoes such an edit on an operator level: given a symmetric
matrix whose diagonal is the shifted sequence, it applies two-coordinate
rotations (spectrum preserving) until the original diagonal reappears.
Every rotation is recorded in a :class:`MovePlan` so a run can be audited and
replayed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .givens import rotate_pair_inplace

# Contract tolerances.
TARGET_TOL = 1e-11      # achieved diagonal entry after a targeted rotation
SHIFT_BUDGET_TOL = 1e-9  # consistency of requested transfer budgets
REPLAY_TOL = 1e-12


@dataclass(frozen=True)
class OpsRequest:
    """A shift request: move ``eta0`` of diagonal mass from I0 onto I1.

    ``i0`` and ``i1`` are disjoint index lists into ``d`` with every I0 value
    at most every I1 value; ``eta0`` may not exceed what I0 can give up nor
    what I1 can absorb before hitting 1.
    """

    d: tuple[float, ...]
    i0: tuple[int, ...]
    i1: tuple[int, ...]
    eta0: float

    def __init__(self, d, i0, i1, eta0: float):
        object.__setattr__(self, "d", tuple(float(x) for x in d))
        object.__setattr__(self, "i0", tuple(int(k) for k in i0))
        object.__setattr__(self, "i1", tuple(int(k) for k in i1))
        object.__setattr__(self, "eta0", float(eta0))
        self._validate()

    def _validate(self) -> None:
        n = len(self.d)
        for k in self.i0 + self.i1:
            if not 0 <= k < n:
                raise ValueError(f"index {k} out of range for length-{n} diagonal")
        if set(self.i0) & set(self.i1):
            raise ValueError("i0 and i1 overlap")
        if len(set(self.i0)) != len(self.i0) or len(set(self.i1)) != len(self.i1):
            raise ValueError("repeated index in i0 or i1")
        if self.eta0 < 0.0:
            raise ValueError(f"eta0 must be nonnegative, got {self.eta0}")
        if self.i0 and self.i1:
            hi0 = max(self.d[k] for k in self.i0)
            lo1 = min(self.d[k] for k in self.i1)
            if hi0 > lo1 + 1e-12:
                raise ValueError(f"i0 values must sit below i1 values ({hi0} > {lo1})")
        give = math.fsum(self.d[k] for k in self.i0)
        take = math.fsum(1.0 - self.d[k] for k in self.i1)
        if self.eta0 > min(give, take) + SHIFT_BUDGET_TOL:
            raise ValueError(
                f"eta0={self.eta0} exceeds transferable mass (give={give}, absorb={take})"
            )


def ops_shift(req: OpsRequest) -> list[float]:
    """Apply the shift greedily and return the edited diagonal.

    Walks I0 in ascending index order driving entries toward 0 until ``eta0``
    is used up, then walks I1 in ascending order driving entries toward 1 by
    the same total amount.
    """
    d = list(req.d)
    remaining = req.eta0
    for k in sorted(req.i0):
        if remaining <= 0.0:
            break
        take = min(d[k], remaining)
        d[k] -= take
        remaining -= take
    remaining = req.eta0
    for k in sorted(req.i1):
        if remaining <= 0.0:
            break
        give = min(1.0 - d[k], remaining)
        d[k] += give
        remaining -= give
    return d


@dataclass(frozen=True)
class Move:
    i: int
    j: int
    kind: str  # "convex_mix" or "general_rotation"
    parameter: float

    def apply_inplace(self, E: np.ndarray) -> None:
        if self.kind == "convex_mix":
            c = math.sqrt(self.parameter)
            s = -math.sqrt(1.0 - self.parameter)
        elif self.kind == "general_rotation":
            c = math.cos(self.parameter)
            s = math.sin(self.parameter)
        else:
            raise ValueError(f"unknown move kind {self.kind!r}")
        rotate_pair_inplace(E, self.i, self.j, c, s)


@dataclass
class MovePlan:
    """Ordered list of recorded rotations; replaying reproduces the result."""

    moves: list[Move] = field(default_factory=list)

    def append(self, move: Move) -> None:
        self.moves.append(move)

    def __len__(self) -> int:
        return len(self.moves)

    def replay(self, start: np.ndarray) -> np.ndarray:
        E = np.array(start, dtype=float)
        for move in self.moves:
            move.apply_inplace(E)
        return E

    def to_json_lines(self) -> str:
        return "\n".join(
            json.dumps({"i": m.i, "j": m.j, "kind": m.kind, "parameter": m.parameter})
            for m in self.moves
        )

    @staticmethod
    def from_json_lines(text: str) -> "MovePlan":
        plan = MovePlan()
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            plan.append(Move(int(rec["i"]), int(rec["j"]), str(rec["kind"]), float(rec["parameter"])))
        return plan


def _solve_rotation_angle(u: float, v: float, w: float, target: float) -> float:
    """Angle theta with cos^2*u + 2*cos*sin*w + sin^2*v = target.

    The attainable targets form the interval [lam-, lam+] of eigenvalues of
    [[u, w], [w, v]]. Of the solutions in (-pi/2, pi/2], the one smallest in
    absolute value is returned, preferring the positive one on a tie.
    """
    mid = 0.5 * (u + v)
    amp = math.hypot(0.5 * (u - v), w)
    if amp == 0.0:
        if abs(target - mid) > TARGET_TOL:
            raise ValueError(f"target {target} unattainable from a scalar 2x2 block")
        return 0.0
    gap = target - mid
    if abs(gap) > amp + TARGET_TOL:
        raise ValueError(
            f"target {target} outside attainable interval [{mid - amp}, {mid + amp}]"
        )
    phi = math.atan2(w, 0.5 * (u - v))
    gamma = math.acos(min(1.0, max(-1.0, gap / amp)))

    def normalize(t: float) -> float:
        t = math.remainder(t, math.pi)
        if t <= -math.pi / 2:
            t += math.pi
        return t

    cand = sorted({normalize((phi + gamma) / 2.0), normalize((phi - gamma) / 2.0)},
                  key=lambda t: (abs(t), -t))
    return cand[0]


def rotate_to_diagonal(E: np.ndarray, i: int, j: int, target_ii: float) -> tuple[np.ndarray, float]:
    """Rotate coordinates (i, j) so the (i, i) entry lands on ``target_ii``.

    Returns a new matrix and the rotation angle. The spectrum is unchanged and
    only rows/columns i and j are affected; the (j, j) entry moves to
    E[i, i] + E[j, j] - target_ii because the trace of the 2x2 block is fixed.
    """
    theta = _solve_rotation_angle(E[i, i], E[j, j], E[i, j], target_ii)
    out = np.array(E, dtype=float)
    rotate_pair_inplace(out, i, j, math.cos(theta), math.sin(theta))
    if abs(out[i, i] - target_ii) > TARGET_TOL:
        raise AssertionError(
            f"rotation missed its target: got {out[i, i]}, wanted {target_ii}"
        )
    return out, theta


def ops_restore(
    E_tilde: np.ndarray,
    d_tilde,
    d,
    i0,
    i1,
) -> tuple[np.ndarray, MovePlan]:
    """Rotate the shifted diagonal ``d_tilde`` back to ``d`` on the matrix level.

    Maintains deficits d[i] - d_tilde[i] on I0 and surpluses d_tilde[j] - d[j]
    on I1, repeatedly pairing the lowest-index open deficit with the
    lowest-index open surplus and transferring the smaller of the two amounts
    with a targeted rotation. Feasibility of each rotation follows from the
    block ordering d_tilde[i] <= d[i] <= d[j] <= d_tilde[j].
    """
    E = np.array(E_tilde, dtype=float)
    d_tilde = [float(x) for x in d_tilde]
    d = [float(x) for x in d]
    if len(d_tilde) != len(d) or E.shape != (len(d), len(d)):
        raise ValueError("shape mismatch between matrix and diagonals")
    if float(np.max(np.abs(np.diag(E) - np.asarray(d_tilde)))) > 1e-10:
        raise ValueError("matrix diagonal does not match d_tilde")

    for k in i0:
        if d[k] - d_tilde[k] < -1e-12:
            raise ValueError(f"I0 index {k} moved in the wrong direction for restoration")
    for k in i1:
        if d_tilde[k] - d[k] < -1e-12:
            raise ValueError(f"I1 index {k} moved in the wrong direction for restoration")
    deficits = [(k, d[k] - d_tilde[k]) for k in sorted(i0) if d[k] - d_tilde[k] > 1e-14]
    surpluses = [(k, d_tilde[k] - d[k]) for k in sorted(i1) if d_tilde[k] - d[k] > 1e-14]
    total_def = math.fsum(amt for _, amt in deficits)
    total_sur = math.fsum(amt for _, amt in surpluses)
    if abs(total_def - total_sur) > SHIFT_BUDGET_TOL:
        raise ValueError(
            f"deficits ({total_def}) and surpluses ({total_sur}) do not balance"
        )

    plan = MovePlan()
    a = b = 0
    while a < len(deficits) and b < len(surpluses):
        ki, delta = deficits[a]
        kj, eps = surpluses[b]
        t = min(delta, eps)
        if t > 1e-14:
            theta = _solve_rotation_angle(E[ki, ki], E[kj, kj], E[ki, kj], E[ki, ki] + t)
            rotate_pair_inplace(E, ki, kj, math.cos(theta), math.sin(theta))
            plan.append(Move(ki, kj, "general_rotation", theta))
        delta -= t
        eps -= t
        if delta <= 1e-14:
            a += 1
        else:
            deficits[a] = (ki, delta)
        if eps <= 1e-14:
            b += 1
        else:
            surpluses[b] = (kj, eps)
    residual = float(np.max(np.abs(np.diag(E) - np.asarray(d))))
    if residual > 1e-9:
        raise AssertionError(f"restoration left diagonal residual {residual}")
    return E, plan
