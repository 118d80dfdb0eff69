"""Finite construction from prescribed spectrum and diagonal."""

import math

import numpy as np
import pytest

from carpenter import (
    MajorizationInput,
    check_majorization,
    convex_mix_unitary,
    horn_build,
    rank_one,
)


def random_majorization_input(rng, n_max=20, m_max=60):
    """Random spectrum plus a diagonal obtained from it by pinching.

    Averaging pairs of entries (a T-transform) preserves majorization, so the
    result is valid by construction.
    """
    n = rng.integers(1, n_max + 1)
    m = rng.integers(n, m_max + 1)
    lams = np.sort(rng.uniform(0.05, 3.0, size=n))[::-1]
    d = np.concatenate([lams, np.zeros(m - n)])
    for _ in range(3 * m):
        i, j = rng.integers(0, m, size=2)
        if i == j:
            continue
        t = rng.uniform(0.0, 1.0)
        di, dj = d[i], d[j]
        d[i] = t * di + (1.0 - t) * dj
        d[j] = (1.0 - t) * di + t * dj
    # keep the total exact despite the float mixing above
    d[0] += math.fsum(lams) - math.fsum(d)
    return MajorizationInput(tuple(lams), tuple(d))


def test_check_majorization_examples():
    assert check_majorization(MajorizationInput((1.0, 1.0), (2 / 3, 2 / 3, 2 / 3)))
    assert check_majorization(MajorizationInput((1.0,), (1.0,)))
    assert not check_majorization(MajorizationInput((1.0,), (0.6, 0.6)))


def test_first_violation_names_the_problem():
    assert MajorizationInput((1.0, 1.0), (2 / 3, 2 / 3, 2 / 3)).first_violation() is None
    bad = MajorizationInput((1.0, 1.0), (1.5, 0.5))
    assert bad.first_violation() is not None
    with pytest.raises(ValueError):
        horn_build(bad)


def test_rank_one_examples():
    S = rank_one((0.5, 0.5), 1.0)
    assert np.allclose(S, 0.5, atol=1e-15)
    assert S[0, 0] == 0.5 and S[1, 1] == 0.5
    assert np.array_equal(rank_one((1.0,), 1.0), np.array([[1.0]]))
    S = rank_one((0.25, 0.25, 0.5), 1.0)
    assert S[0][2] == math.sqrt(0.125)
    # rank-one sanity: eigenvalues (lambda, 0, 0)
    w = np.linalg.eigvalsh(S)
    assert np.allclose(np.sort(w), [0.0, 0.0, 1.0], atol=1e-12)


def test_rank_one_rejects_bad_input():
    with pytest.raises(ValueError):
        rank_one((0.5, 0.4), 1.0)  # sums to 0.9, not 1
    with pytest.raises(ValueError):
        rank_one((0.0, 0.0), 0.0)


def test_convex_mix_examples():
    E = np.diag([1.0, 0.0])
    out = convex_mix_unitary(E, 0, 1, 0.5)
    assert out[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert out[1, 1] == pytest.approx(0.5, abs=1e-15)
    assert abs(out[0, 1]) == pytest.approx(0.5, abs=1e-15)

    assert np.array_equal(convex_mix_unitary(E, 0, 1, 1.0), E)

    out = convex_mix_unitary(np.diag([1.0, 1 / 3]), 0, 1, 0.5)
    assert np.allclose(np.diag(out), [2 / 3, 2 / 3], atol=1e-15)


def test_convex_mix_rejects_coupled_coordinates():
    E = np.array([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        convex_mix_unitary(E, 0, 1, 0.5)
    with pytest.raises(ValueError):
        convex_mix_unitary(np.diag([1.0, 0.0]), 0, 1, 1.5)


def test_horn_build_rank_two_constant_diagonal():
    inp = MajorizationInput((1.0, 1.0), (2 / 3, 2 / 3, 2 / 3))
    S, start, plan = horn_build(inp, return_plan=True)
    assert np.allclose(np.diag(S), 2 / 3, atol=1e-12)
    assert np.max(np.abs(S @ S - S)) <= 1e-12
    assert np.allclose(np.sort(np.linalg.eigvalsh(S)), [0.0, 1.0, 1.0], atol=1e-9)
    # the single peel repairs with the balanced mix from the worked run
    mixes = [m for m in plan.moves if m.kind == "convex_mix"]
    assert len(mixes) == 1 and mixes[0].parameter == pytest.approx(0.5, abs=1e-12)
    # replay is bitwise: the plan records exactly the applied rotations
    assert np.array_equal(plan.replay(start), S)


def test_horn_build_already_diagonal():
    S = horn_build(MajorizationInput((1.0,), (1.0, 0.0, 0.0)))
    assert np.array_equal(S, np.diag([1.0, 0.0, 0.0]))


def test_horn_build_beyond_projections():
    S = horn_build(MajorizationInput((2.0, 1.0), (1.0, 1.0, 1.0)))
    assert np.allclose(np.diag(S), 1.0, atol=1e-10)
    assert np.allclose(np.sort(np.linalg.eigvalsh(S)), [0.0, 1.0, 2.0], atol=1e-8)


def test_horn_build_heavy_head():
    # all entries equal and large: the peel's head overshoots a single bump
    # and the surplus has to be spread across several head entries
    inp = MajorizationInput((1.0,) * 4, (0.8,) * 5)
    S = horn_build(inp)
    assert np.allclose(np.diag(S), 0.8, atol=1e-10)
    assert np.allclose(np.sort(np.linalg.eigvalsh(S)), [0.0, 1.0, 1.0, 1.0, 1.0], atol=1e-8)


def test_horn_build_unsorted_diagonal_order_preserved():
    d = (0.2, 0.9, 0.5, 0.4)
    S = horn_build(MajorizationInput((1.0, 1.0), d))
    assert np.max(np.abs(np.diag(S) - d)) <= 1e-10


def test_horn_build_round_trip_random():
    rng = np.random.default_rng(11)
    for _ in range(40):
        inp = random_majorization_input(rng)
        S = horn_build(inp)
        assert np.max(np.abs(np.diag(S) - inp.diag)) <= 1e-10
        expected = np.zeros(len(inp.diag))
        expected[: len(inp.lambdas)] = sorted(inp.lambdas, reverse=True)
        got = np.sort(np.linalg.eigvalsh(S))[::-1]
        assert np.max(np.abs(got - expected)) <= 1e-8
        assert np.array_equal(S, S.T)


def test_horn_build_replay_matches():
    rng = np.random.default_rng(5)
    for _ in range(10):
        inp = random_majorization_input(rng, n_max=8, m_max=24)
        S, start, plan = horn_build(inp, return_plan=True)
        assert np.max(np.abs(plan.replay(start) - S)) <= 1e-12
