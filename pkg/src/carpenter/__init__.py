"""Diagonals of projections: feasibility test and explicit constructions.

A sequence in [0, 1] is the diagonal of some orthogonal projection exactly
when its two defect sums (mass below 1/2, co-mass at or above 1/2) are
either both infinite or differ by an integer. This package decides that
criterion and, when it holds, builds a real symmetric idempotent matrix
with the requested diagonal: finite cases through majorization peeling,
divergent cases through a lazily streamed sparse construction.
"""

from .builder import (
    BuildOptions,
    BuildResult,
    CaseTwoPlan,
    InfeasibleDiagonalError,
    build,
    build_case1,
    build_case2,
    build_cosummable,
    build_summable,
    complement,
)
from .diagonal import (
    ConstantTail,
    DiagonalSpec,
    KadisonReport,
    PowerTail,
    TailSums,
    Verdict,
    classify,
    complement_spec,
    strip_trivial,
    tail_sums,
)
from .horn import (
    MajorizationInput,
    check_majorization,
    convex_mix_unitary,
    horn_build,
    rank_one,
)
from .moves import (
    Move,
    MovePlan,
    OpsRequest,
    ops_restore,
    ops_shift,
    rotate_to_diagonal,
)
from .tetris import (
    NeedsMoreTermsError,
    SparseRow,
    TetrisStream,
    completed_columns,
    next_row,
    projection_prefix,
    reorder,
    sigma_n,
    solve_a,
)
from .verify import (
    VerificationReport,
    check_projection,
    check_rows,
    necessity_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "BuildOptions",
    "BuildResult",
    "CaseTwoPlan",
    "ConstantTail",
    "DiagonalSpec",
    "InfeasibleDiagonalError",
    "KadisonReport",
    "MajorizationInput",
    "Move",
    "MovePlan",
    "NeedsMoreTermsError",
    "OpsRequest",
    "PowerTail",
    "SparseRow",
    "TailSums",
    "TetrisStream",
    "VerificationReport",
    "Verdict",
    "build",
    "build_case1",
    "build_case2",
    "build_cosummable",
    "build_summable",
    "check_majorization",
    "check_projection",
    "check_rows",
    "classify",
    "complement",
    "complement_spec",
    "completed_columns",
    "convex_mix_unitary",
    "horn_build",
    "necessity_oracle",
    "next_row",
    "ops_restore",
    "ops_shift",
    "projection_prefix",
    "rank_one",
    "reorder",
    "rotate_to_diagonal",
    "sigma_n",
    "solve_a",
    "strip_trivial",
    "tail_sums",
]
