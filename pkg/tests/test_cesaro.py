import csv
import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction as F

import numpy as np
import pytest

from nnlab.cesaro import _NestedHarmonics, CesaroLadder, distance_series, dump_checkpoints, gap, gap_survey, \
    geometric_checkpoints, iterated_averages, oracle_mismatches, push_digit, snapshot, use_exact
from nnlab.errors import ExactCapExceeded, InvalidDigitError, LevelError, MissingHistoryError, OutOfRangeError
from nnlab.simplex import periodic_orbit_vector, validate
from nnlab.words import freq_vector


def test_constant_stream_levels():
    ladder = CesaroLadder(1, 3)
    for _ in range(5):
        push_digit(ladder, 1)
    assert ladder.levels((1,)) == (1, 1, 1, 1)


def test_level_one_by_hand():
    ladder = CesaroLadder(1, 1).extend((1, 2, 1, 2))
    assert ladder.value((2,), 1) == F(1, 3)
    assert ladder.value((1,), 1) == F(2, 3)


def test_two_block_level_zero():
    ladder = CesaroLadder(2, 2).extend((1, 2) * 3)
    assert ladder.value((1, 2), 0) == F(1, 2)
    assert ladder.total(0) == F(5, 6)


def test_push_rejects_bad_digits():
    ladder = CesaroLadder(1, 1)
    with pytest.raises(InvalidDigitError):
        ladder.push(0)
    with pytest.raises(InvalidDigitError):
        ladder.push(-3)


def test_exact_cap():
    ladder = CesaroLadder(1, 1, exact=True, exact_cap=3)
    ladder.extend((1, 2, 1))
    with pytest.raises(ExactCapExceeded):
        ladder.push(1)
    assert ladder.n == 3


def test_snapshot_matches_freq_vector():
    rng = random.Random(11)
    word = [rng.randint(1, 3) for _ in range(40)]
    ladder = CesaroLadder(2, 1)
    for n, digit in enumerate(word, start=1):
        ladder.push(digit)
        if n >= 2:
            assert snapshot(ladder, 0).entries == freq_vector(word, 2, n).entries


def test_snapshot_levels():
    ladder = CesaroLadder(1, 2).extend((1, 1, 1, 1))
    assert snapshot(ladder, 1).entries == {(1,): 1}
    assert snapshot(ladder, 2).entries == {(1,): 1}
    with pytest.raises(LevelError):
        ladder.snapshot(3)
    with pytest.raises(OutOfRangeError):
        CesaroLadder(3, 1).extend((1, 2)).snapshot(0)


def test_levels_sum_to_total():
    rng = random.Random(5)
    ladder = CesaroLadder(2, 3)
    for _ in range(80):
        ladder.push(rng.randint(1, 4))
        for r in range(4):
            assert sum(ladder.value(b, r) for b in ladder.blocks()) == ladder.total(r)


def test_tracked_ladder_distance():
    q = periodic_orbit_vector((1, 2), 2)
    stream = (1, 2) * 20
    tracked = CesaroLadder(2, 2, track=q.entries.keys())
    full = CesaroLadder(2, 2)
    for digit in stream:
        tracked.push(digit)
        full.push(digit)
        for r in range(3):
            assert tracked.value((1, 2), r) == full.value((1, 2), r)
            assert tracked.distance(q, r) == full.distance(q, r)


def test_gap_examples():
    ladder = CesaroLadder(1, 0, history=4).extend((1, 2))
    assert gap(ladder, 0, 1, block=(1,)) == F(1, 2)

    constant = CesaroLadder(1, 2, history=4).extend((3, 3, 3))
    assert gap(constant, 2, 2) == 0
    with pytest.raises(MissingHistoryError):
        gap(constant, 0, 7)
    with pytest.raises(MissingHistoryError):
        gap(CesaroLadder(1, 1, history=0).extend((1, 1)), 0, 1)


def test_gap_bound_small():
    rng = np.random.default_rng(2)
    for _ in range(3):
        word = tuple(int(d) for d in rng.integers(1, 6, size=300))
        violations, largest = gap_survey(word, 3)
        assert violations == []
        assert all(value <= F(1, low + 1) for (low, high, r), value in largest.items())


@pytest.mark.slow
def test_gap_bound_acceptance():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        word = tuple(int(d) for d in rng.integers(1, 6, size=2000))
        violations, _ = gap_survey(word, 3)
        assert violations == []


def test_iterated_averages_definition():
    result = iterated_averages((1, 2, 1, 2), (2,), 1, 4)
    assert result[0] == [0, F(1, 2), F(1, 3), F(1, 2)]
    assert result[1][3] == F(1, 3)


def test_oracle_equivalence_small():
    rng = random.Random(17)
    for _ in range(8):
        word = tuple(rng.randint(1, 3) for _ in range(120))
        for k in (1, 2):
            assert oracle_mismatches(word, k, 3) == []


@pytest.mark.slow
def test_oracle_equivalence_acceptance():
    rng = random.Random(1)
    for _ in range(100):
        word = tuple(rng.randint(1, 3) for _ in range(200))
        for k in (1, 2):
            assert oracle_mismatches(word, k, 3) == []


def test_float_mode_tracks_exact():
    rng = random.Random(23)
    word = [rng.randint(1, 3) for _ in range(1500)]
    exact = CesaroLadder(1, 3, exact=True, exact_cap=2000)
    fast = CesaroLadder(1, 3, exact=False)
    for digit in word:
        exact.push(digit)
        fast.push(digit)
    assert fast.mode == 'float'
    for block in exact.blocks():
        for r in range(4):
            assert abs(float(exact.value(block, r)) - fast.value(block, r)) < 1e-9


@pytest.mark.slow
def test_float_mode_tracks_exact_acceptance():
    rng = random.Random(29)
    word = [rng.randint(1, 3) for _ in range(10 ** 4)]
    exact = CesaroLadder(1, 3, exact=True, exact_cap=10 ** 4)
    fast = CesaroLadder(1, 3, exact=False)
    checkpoints = set(geometric_checkpoints(1.25, len(word)))
    for n, digit in enumerate(word, start=1):
        exact.push(digit)
        fast.push(digit)
        if n in checkpoints:
            for block in exact.blocks():
                for r in range(4):
                    assert abs(float(exact.value(block, r)) - fast.value(block, r)) < 1e-9
    assert exact.n == fast.n == 10 ** 4


@pytest.mark.parametrize('exact', [True, False])
def test_harmonic_tables_grow_safely_across_threads(exact):
    reference = _NestedHarmonics(exact)
    reference.ensure(3, 600)
    shared = _NestedHarmonics(exact)
    targets = [(1 + i % 3, 50 * (i + 1)) for i in range(12)]
    with ThreadPoolExecutor(max_workers=6) as pool:
        list(pool.map(lambda job: shared.ensure(*job), targets))
    assert shared.size == 601
    for m in (1, 2, 3):
        assert shared.tables[m - 1] == reference.tables[m - 1][:601]


def test_use_exact_falls_back():
    assert use_exact(10, exact=True, exact_cap=100)
    assert not use_exact(101, exact=True, exact_cap=100)
    assert not use_exact(10, exact=False, exact_cap=100)


def test_distance_series_level_zero_exact():
    q = validate({1: F(1, 2), 2: F(1, 2)})
    series = dict(distance_series((1, 2, 1, 2, 1), q, 0))
    assert series[1] == 1
    assert series[4] == 0
    assert series[5] == F(1, 5)
    level_one = dict(distance_series((1, 2, 1, 2), q, 1))
    assert level_one[4] == F(1, 3)


def test_geometric_checkpoints():
    assert geometric_checkpoints(2, 20) == [1, 2, 4, 8, 16]
    points = geometric_checkpoints(1.25, 100, start=2)
    assert points == sorted(set(points))
    assert points[0] >= 2 and points[-1] <= 100


def test_dump_checkpoints(tmp_path):
    path = str(tmp_path / "checkpoints.csv")
    rows = dump_checkpoints((1, 2) * 8, 1, 1, path, ratio=2, blocks=[(1,)])
    with open(path) as f:
        table = list(csv.reader(f))
    assert table[0] == ['n', 'r', 'block', 'value_num', 'value_den']
    assert rows == len(table) - 1 == 10
    assert ['2', '0', '1', '1', '2'] in table
