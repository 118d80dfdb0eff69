"""Acceptance suite: one test per contract criterion, run with pytest -v for
one pass/fail line each. Random inputs are seeded, so failures reproduce.
"""

import json
import math
import time

import numpy as np
import pytest

from carpenter import (
    ConstantTail,
    DiagonalSpec,
    OpsRequest,
    TetrisStream,
    build,
    check_rows,
    completed_columns,
    horn_build,
    necessity_oracle,
    ops_restore,
    ops_shift,
)
from carpenter.cli import main
from test_horn import random_majorization_input


def random_integer_sum_diagonal(rng, n_max):
    n = int(rng.integers(1, n_max + 1))
    vals = rng.uniform(0.0, 1.0, size=n).tolist()
    s = math.fsum(vals[:-1])
    vals[-1] = math.ceil(s) - s
    return vals


def test_criterion_1_exact_construction_500_random_diagonals():
    rng = np.random.default_rng(101)
    t0 = time.time()
    for _ in range(500):
        d = random_integer_sum_diagonal(rng, 100)
        P = build(d).matrix
        assert float(np.max(np.abs(P - P.T))) == 0.0
        assert float(np.max(np.abs(P @ P - P))) <= 1e-9
        assert float(np.max(np.abs(np.diag(P) - np.asarray(d)))) <= 1e-9
        total = math.fsum(d)
        assert abs(float(np.trace(P)) - round(total)) <= 1e-8
    assert time.time() - t0 <= 60.0


def test_criterion_2_horn_round_trip_200_inputs():
    rng = np.random.default_rng(202)
    t0 = time.time()
    for _ in range(200):
        mi = random_majorization_input(rng, n_max=20, m_max=60)
        S = horn_build(mi)
        assert float(np.max(np.abs(np.diag(S) - np.asarray(mi.diag)))) <= 1e-10
        padded = sorted(list(mi.lambdas) + [0.0] * (len(mi.diag) - len(mi.lambdas)))
        spectrum = np.sort(np.linalg.eigvalsh(S))
        assert float(np.max(np.abs(spectrum - np.asarray(padded)))) <= 1e-8
    assert time.time() - t0 <= 30.0


def test_criterion_3_tetris_families_500_rows():
    t0 = time.time()
    for c in (0.1, 0.25, 0.4, 0.5):
        for head in ((), (0.7,), (0.9,)):
            s = TetrisStream(DiagonalSpec(head, ConstantTail(c)))
            rows = [s.next_row() for _ in range(500)]
            assert check_rows(rows) <= 1e-11
            count, masses = completed_columns(s)
            targets = s._perm_vals[:count]
            assert count > 0
            assert max(abs(m - t) for m, t in zip(masses, targets)) <= 1e-12
            for n in range(1, 501):
                prev_m = s.m[n - 2] if n >= 2 else 0
                assert prev_m + 2 <= s.k[n - 1] <= s.m[n - 1]

    anchor = TetrisStream(DiagonalSpec((), ConstantTail(0.4)))
    row1 = anchor.next_row()
    anchor.next_row()
    assert anchor.sigma[0] == pytest.approx(0.6, abs=1e-12)
    assert anchor.a[0] == pytest.approx(0.3, abs=1e-12)
    assert anchor.sigma[1] == pytest.approx(0.8, abs=1e-12)
    assert anchor.a[1] == pytest.approx(0.4, abs=1e-12)
    expected = (math.sqrt(0.4), math.sqrt(0.3), -math.sqrt(0.3))
    assert row1.values == pytest.approx(expected, abs=1e-12)
    assert time.time() - t0 <= 10.0


def test_criterion_4_ops_lemma_200_requests():
    rng = np.random.default_rng(404)
    for _ in range(200):
        d = random_integer_sum_diagonal(rng, 12)
        n = len(d)
        order = sorted(range(n), key=lambda i: d[i])
        p = int(rng.integers(1, max(2, n)))
        q = int(rng.integers(1, max(2, n - p + 1)))
        i0, i1 = order[:p], order[n - q :]
        if set(i0) & set(i1):
            continue
        give = math.fsum(d[k] for k in i0)
        take = math.fsum(1.0 - d[k] for k in i1)
        eta0 = float(rng.uniform(0.0, 0.95 * min(give, take)))
        req = OpsRequest(d, i0, i1, eta0)
        shifted = ops_shift(req)

        moved = set(i0) | set(i1)
        for k in range(n):
            if k not in moved:
                assert shifted[k] == d[k]
        for k in i0:
            assert shifted[k] <= d[k] + 1e-12
        for k in i1:
            assert shifted[k] >= d[k] - 1e-12
        assert all(-1e-12 <= x <= 1.0 + 1e-12 for x in shifted)
        out0 = math.fsum(d[k] - shifted[k] for k in i0)
        in1 = math.fsum(shifted[k] - d[k] for k in i1)
        assert abs(out0 - eta0) <= 1e-12 and abs(in1 - eta0) <= 1e-12

        E = build(shifted).matrix
        R, plan = ops_restore(E, shifted, d, i0, i1)
        assert float(np.max(np.abs(np.diag(R) - np.asarray(d)))) <= 1e-9
        before = np.sort(np.linalg.eigvalsh(E))
        after = np.sort(np.linalg.eigvalsh(R))
        assert float(np.max(np.abs(before - after))) <= 1e-9
        assert float(np.max(np.abs(plan.replay(E) - R))) <= 1e-12


def test_criterion_5_necessity_oracle_1000_projections():
    assert necessity_oracle(4, 2, trials=334, seed=505)
    assert necessity_oracle(6, 3, trials=333, seed=506)
    assert necessity_oracle(8, 5, trials=333, seed=507)


def test_criterion_6_negative_entries_100_triples():
    rng = np.random.default_rng(606)
    done = 0
    while done < 100:
        x, y = rng.uniform(0.0, 1.0, size=2)
        z = 2.0 - x - y
        if not 0.0 < z < 1.0:
            continue
        P = build([x, y, z]).matrix
        off = P - np.diag(np.diag(P))
        assert float(off.min()) < -1e-12
        done += 1


def test_criterion_7_infeasibility_witnesses(tmp_path, capsys):
    def classify_file(values):
        f = tmp_path / "d.json"
        f.write_text(json.dumps(values))
        code = main(["classify", "--input", str(f)])
        return code, json.loads(capsys.readouterr().out)

    code, rep = classify_file([1 / 3])
    assert code == 2 and rep["verdict"] == "infeasible"
    assert rep["a"] == pytest.approx(1 / 3, abs=1e-12) and rep["b"] == 0.0

    code, rep = classify_file([0.2, 0.9])
    assert code == 2 and rep["verdict"] == "infeasible"
    assert rep["a"] == pytest.approx(0.2, abs=1e-12)
    assert rep["b"] == pytest.approx(0.1, abs=1e-12)

    rng = np.random.default_rng(707)
    done = 0
    while done < 25:
        n = int(rng.integers(1, 15))
        vals = rng.uniform(0.0, 1.0, size=n).tolist()
        a = math.fsum(v for v in vals if v < 0.5)
        b = math.fsum(1.0 - v for v in vals if v >= 0.5)
        delta = a - b
        if abs(math.fsum(vals) - round(math.fsum(vals))) < 1e-6:
            continue
        if abs(delta - round(delta)) < 1e-6:
            continue
        code, rep = classify_file(vals)
        assert code == 2 and rep["verdict"] == "infeasible"
        assert rep["a"] == pytest.approx(a, abs=1e-12)
        assert rep["b"] == pytest.approx(b, abs=1e-12)
        assert rep["a_minus_b"] == pytest.approx(delta, abs=1e-12)
        done += 1
