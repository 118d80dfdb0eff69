"""Two-coordinate rotation primitive shared by the matrix surgery routines."""

from __future__ import annotations

import numpy as np


def rotate_pair_inplace(E: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    """Conjugate ``E`` in place by the plane rotation G on coordinates (i, j).

    G maps e_i -> c*e_i + s*e_j and e_j -> -s*e_i + c*e_j, and the update is
    E <- G^T E G. The new (i, i) entry is c^2*u + 2*c*s*w + s^2*v where
    u = E[i, i], v = E[j, j], w = E[i, j]. After the row/column update the
    (i, j)/(j, i) pair is mirrored so the matrix stays exactly symmetric;
    every other off-diagonal pair already agrees bitwise because both sides
    are computed by the same two-term combination.
    """
    ri = c * E[i, :] + s * E[j, :]
    rj = -s * E[i, :] + c * E[j, :]
    E[i, :] = ri
    E[j, :] = rj
    ci = c * E[:, i] + s * E[:, j]
    cj = -s * E[:, i] + c * E[:, j]
    E[:, i] = ci
    E[:, j] = cj
    E[j, i] = E[i, j]
