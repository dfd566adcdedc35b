import random
import time
from fractions import Fraction as F
from itertools import islice

import pytest

from nnlab.errors import PreconditionError
from nnlab.simplex import enumerate_dense, l1_distance, markov_vector, periodic_orbit_vector, point_mass_vector, \
    validate
from nnlab.wordfactory import ZnSpec, construct_zn_word, cyclic_word, extend_to_target, is_in_zn, padding_length, \
    padding_violations
from nnlab.words import FrequencyTracker, freq_vector, periodic_truncate

HALF = F(1, 2)
ALTERNATING = validate({(1, 2): HALF, (2, 1): HALF})


def cyclic_counts(word, k):
    wrapped = periodic_truncate(word, len(word) + k - 1)
    counts = {}
    for i in range(len(word)):
        block = wrapped[i:i + k]
        counts[block] = counts.get(block, 0) + 1
    return counts


def test_zn_spec():
    spec = ZnSpec.for_vector(ALTERNATING, 3)
    assert (spec.N, spec.k, spec.min_length, spec.tolerance) == (2, 2, 24, F(1, 3))
    with pytest.raises(PreconditionError):
        ZnSpec(ALTERNATING, 2, 2, 0)


def test_is_in_zn_examples():
    spec = ZnSpec(validate({1: 1}), 1, 1, 2)
    assert is_in_zn((1, 1, 1, 1), spec)
    assert not is_in_zn((1,), spec)

    alternating = ZnSpec(ALTERNATING, 2, 2, 1)
    word = (1, 2) * 8
    expected = l1_distance(freq_vector(word, 2, 16), ALTERNATING) <= 1
    assert is_in_zn(word, alternating) == expected
    assert not is_in_zn((1, 3) * 8, alternating)


def test_construct_examples():
    assert construct_zn_word(ZnSpec(validate({1: 1}), 1, 1, 5)) == (1,) * 5

    gamma = construct_zn_word(ZnSpec.for_vector(ALTERNATING, 3))
    assert gamma == (1, 2) * 12

    uniform = markov_vector([[HALF, HALF], [HALF, HALF]], 2)
    spec = ZnSpec.for_vector(uniform, 4)
    gamma = construct_zn_word(spec)
    assert is_in_zn(gamma, spec)
    assert set(freq_vector(gamma, 2, len(gamma)).entries) == set(uniform.entries)


def test_cyclic_word_has_exact_frequencies():
    for q in islice(enumerate_dense(3, 2, 3), 25):
        word = cyclic_word(q)
        counts = cyclic_counts(word, 3)
        assert {b: F(c, len(word)) for b, c in counts.items()} == q.entries


def test_disconnected_support():
    q = validate({(1, 1): HALF, (2, 2): HALF})
    spec = ZnSpec.for_vector(q, 10)
    gamma = construct_zn_word(spec)
    assert is_in_zn(gamma, spec)


def test_zn_realization_small():
    for q in islice(enumerate_dense(2, 3, 6), 20):
        spec = ZnSpec.for_vector(q, 10)
        started = time.perf_counter()
        gamma = construct_zn_word(spec)
        assert time.perf_counter() - started < 1
        tracker = FrequencyTracker(2, q.entries)
        tracker.extend(gamma)
        assert tracker.within(F(1, 10))


@pytest.mark.parametrize('t, gamma_len, k, n, M, N, expected', [
    (0, 24, 2, 6, 1, 2, 144),
    (10, 24, 2, 6, 2, 2, 154),
    (10, 24, 2, 6, 4, 2, 490),
])
def test_padding_length(t, gamma_len, k, n, M, N, expected):
    assert padding_length(t, gamma_len, k, n, M, N) == expected


def test_padding_length_monotone():
    for t in range(0, 20, 3):
        for n in range(1, 8):
            for M in range(1, 5):
                L = padding_length(t, 10, 2, n, M, 2)
                assert padding_length(t + 1, 10, 2, n, M, 2) >= L
                assert padding_length(t, 10, 2, n + 1, M, 2) >= L
                assert padding_length(t, 10, 2, n, M + 1, 2) >= L


def test_extend_to_target_examples():
    one = validate({1: 1})
    gamma = construct_zn_word(ZnSpec.for_vector(one, 6))
    L = padding_length(0, len(gamma), 1, 6, 1, 1)
    assert extend_to_target((), one, 6, L) == (1,) * L

    omega = (3, 3, 3)
    gamma = construct_zn_word(ZnSpec.for_vector(ALTERNATING, 12))
    L = padding_length(3, len(gamma), 2, 12, 3, 2)
    word = extend_to_target(omega, ALTERNATING, 12, L)
    assert word[:3] == omega and len(word) == L
    assert l1_distance(freq_vector(word, 2, L), ALTERNATING) <= HALF

    with pytest.raises(PreconditionError) as info:
        extend_to_target(omega, ALTERNATING, 12, L - 1)
    assert info.value.required == L


def padding_trials(count, extra, seed):
    rng = random.Random(seed)
    targets = list(enumerate_dense(2, 2, 4))
    for _ in range(count):
        omega = tuple(rng.randint(1, 5) for _ in range(rng.randint(0, 50)))
        q = rng.choice(targets)
        n = rng.choice([6, 12, 24])
        yield omega, q, n, extra


def test_padding_bound_small():
    for omega, q, n, extra in padding_trials(5, 60, seed=8):
        L, violations, worst = padding_violations(omega, q, n, extra)
        assert violations == []
        assert worst <= F(6, n)


@pytest.mark.slow
def test_padding_bound_acceptance():
    for omega, q, n, extra in padding_trials(50, 500, seed=32):
        _, violations, _ = padding_violations(omega, q, n, extra)
        assert violations == []


def test_orbit_and_point_mass_targets():
    for q in (periodic_orbit_vector((1, 1, 2), 2), point_mass_vector(3, 2)):
        spec = ZnSpec.for_vector(q, 5)
        assert is_in_zn(construct_zn_word(spec), spec)
