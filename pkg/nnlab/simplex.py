"""
shift-invariant probability vectors on k-blocks

vectors are exact (Fraction entries); generators build them from irreducible markov chains and from periodic orbits,
and every generated vector passes validate
"""

import json
import logging
from math import gcd
from fractions import Fraction
from itertools import islice, product
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import networkx as nx

from nnlab.errors import (InvalidComparisonError, NotProbabilityError, NotShiftInvariantError, NotStochasticError,
                          ReducibleChainError, SimplexError)
from nnlab.words import Block, as_block, basic_factor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimplexVector:
    k: int
    N: int
    entries: Mapping[Block, Fraction] = field(default_factory=dict)
    exact = True

    def __getitem__(self, block):
        return self.entries.get(tuple(block), Fraction(0))

    def support(self):
        return sorted(self.entries)

    def max_digit(self):
        return max((max(block) for block in self.entries), default=0)

    def key(self):
        """
        hashable identity of the vector (its sorted entries)
        """
        return tuple(sorted(self.entries.items()))

    def to_json(self):
        return {"k": self.k, "N": self.N,
                "entries": [{"block": list(block), "num": str(value.numerator), "den": str(value.denominator)}
                            for block, value in sorted(self.entries.items())]}

    @classmethod
    def from_json(cls, data):
        try:
            entries = {as_block(row["block"]): Fraction(int(row["num"]), int(row["den"])) for row in data["entries"]}
            k = int(data["k"])
            N = int(data["N"]) if data.get("N") is not None else None
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SimplexError("malformed simplex vector json: %s" % exc) from exc
        return validate(entries, k=k, N=N)

    def __str__(self):
        return "{%s}" % ", ".join("%s: %s" % (''.join(map(str, b)) if max(b) < 10 else list(b), v)
                                  for b, v in sorted(self.entries.items()))


def _as_fraction(value):
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _as_key(key):
    if isinstance(key, int):
        return as_block((key,))
    return as_block(key)


def validate(q, k=None, N=None):
    """
    check a candidate map block -> weight and freeze it as a SimplexVector

    checks nonnegativity, exact sum 1, digits <= N and equal left/right (k-1)-marginals
    """
    if isinstance(q, SimplexVector):
        k = q.k if k is None else k
        N = q.N if N is None else N
        q = q.entries
    entries = {}
    for key, value in q.items():
        block = _as_key(key)
        value = _as_fraction(value)
        if value < 0:
            raise NotProbabilityError("negative weight %s at %s" % (value, list(block)))
        if value:
            entries[block] = entries.get(block, Fraction(0)) + value
    if not entries:
        raise NotProbabilityError("empty vector")

    lengths = {len(block) for block in entries}
    if len(lengths) != 1:
        raise NotProbabilityError("blocks of mixed lengths %s" % sorted(lengths))
    block_length = lengths.pop()
    if k is not None and k != block_length:
        raise NotProbabilityError("blocks have length %d, expected %d" % (block_length, k))
    k = block_length

    top = max(max(block) for block in entries)
    if N is None:
        N = top
    elif top > N:
        raise NotProbabilityError("digit %d exceeds the cutoff N = %d" % (top, N))

    total = sum(entries.values())
    if total != 1:
        raise NotProbabilityError("weights sum to %s, not 1" % total)

    if k > 1:
        left, right = defaultdict(Fraction), defaultdict(Fraction)
        for block, value in entries.items():
            left[block[1:]] += value
            right[block[:-1]] += value
        for inner in sorted(set(left) | set(right)):
            if left[inner] != right[inner]:
                raise NotShiftInvariantError(inner, left[inner], right[inner])

    return SimplexVector(k, N, entries)


def l1_distance(a, b):
    """
    sum of |a_i - b_i| over the union of supports; exact when both sides are
    """
    if a.k != b.k:
        raise InvalidComparisonError("cannot compare k = %d with k = %d" % (a.k, b.k))
    exact = getattr(a, 'exact', True) and getattr(b, 'exact', True)
    zero = Fraction(0) if exact else 0.0
    total = zero
    for block in set(a.entries) | set(b.entries):
        total += abs(a.entries.get(block, zero) - b.entries.get(block, zero))
    return total


"""#####################################################################################################################
                                                GENERATORS
#####################################################################################################################"""


def _solve_exact(A, rhs):
    """
    gaussian elimination over the rationals; A is square and nonsingular
    """
    size = len(A)
    M = [list(row) + [value] for row, value in zip(A, rhs)]
    for col in range(size):
        pivot = next((row for row in range(col, size) if M[row][col] != 0), None)
        if pivot is None:
            raise ReducibleChainError("singular system at column %d" % col)
        M[col], M[pivot] = M[pivot], M[col]
        lead = M[col][col]
        M[col] = [value / lead for value in M[col]]
        for row in range(size):
            if row != col and M[row][col] != 0:
                factor = M[row][col]
                M[row] = [x - factor * y for x, y in zip(M[row], M[col])]
    return [M[row][size] for row in range(size)]


def _transition_graph(P):
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(P)))
    graph.add_edges_from((i, j) for i, row in enumerate(P) for j, value in enumerate(row) if value)
    return graph


def stationary_distribution(P):
    """
    exact pi with pi P = pi and sum(pi) = 1 for an irreducible stochastic matrix
    """
    P = [[_as_fraction(value) for value in row] for row in P]
    size = len(P)
    if not size or any(len(row) != size for row in P):
        raise NotStochasticError("transition matrix must be square and nonempty")
    for i, row in enumerate(P):
        if any(value < 0 for value in row):
            raise NotStochasticError("row %d has a negative entry" % (i + 1))
        if sum(row) != 1:
            raise NotStochasticError("row %d sums to %s" % (i + 1, sum(row)))
    if not nx.is_strongly_connected(_transition_graph(P)):
        raise ReducibleChainError("transition graph is not strongly connected")

    A = [[P[i][j] - (1 if i == j else 0) for i in range(size)] for j in range(size)]
    A[-1] = [Fraction(1)] * size
    rhs = [Fraction(0)] * (size - 1) + [Fraction(1)]
    return P, _solve_exact(A, rhs)


def markov_vector(P, k):
    """
    q_{i1..ik} = pi_{i1} P_{i1 i2} ... P_{i(k-1) ik}, digits are the 1-based states
    """
    if k < 1:
        raise SimplexError("block length must be positive, got %d" % k)
    P, pi = stationary_distribution(P)
    entries = {(i + 1,): weight for i, weight in enumerate(pi) if weight}
    for _ in range(k - 1):
        grown = {}
        for block, weight in entries.items():
            for j, step in enumerate(P[block[-1] - 1]):
                if step:
                    grown[block + (j + 1,)] = weight * step
        entries = grown
    return validate(entries, k=k, N=len(P))


def periodic_orbit_vector(b, k):
    """
    mass 1/p on each of the p shifts of (basic factor of b)^infinity, read through k-blocks
    """
    factor = basic_factor(b)
    p = len(factor)
    entries = defaultdict(Fraction)
    for start in range(p):
        entries[tuple(factor[(start + j) % p] for j in range(k))] += Fraction(1, p)
    return validate(entries, k=k, N=max(factor))


def point_mass_vector(d, k):
    block = as_block((d,) * k)
    return validate({block: Fraction(1)}, k=k, N=d)


def _compositions(total, parts):
    """
    weak compositions of total into parts, lexicographic
    """
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _dense_stream(k, N_max, denom_max):
    for N in range(1, N_max + 1):
        for d in range(1, denom_max + 1):
            rows = list(_compositions(d, N))
            for numerators in product(rows, repeat=N):
                if gcd(d, *(x for row in numerators for x in row)) != 1:
                    continue
                matrix = [[Fraction(x, d) for x in row] for row in numerators]
                if not nx.is_strongly_connected(_transition_graph(matrix)):
                    continue
                yield markov_vector(matrix, k)

    for length in range(1, k + 3):
        for block in product(range(1, N_max + 1), repeat=length):
            yield periodic_orbit_vector(block, k)


def enumerate_dense(k, N_max, denom_max, start=0) -> Iterator[SimplexVector]:
    """
    lazy, duplicate free, stable enumeration of rational shift-invariant vectors: markov chains ordered by
    (N, common denominator, numerators), then periodic orbits of blocks up to length k + 2 in lex order
    """
    seen = set()

    def unique():
        for vector in _dense_stream(k, N_max, denom_max):
            key = vector.key()
            if key not in seen:
                seen.add(key)
                yield vector

    return islice(unique(), start, None)


"""#####################################################################################################################
                                                SERIALIZATION
#####################################################################################################################"""


def load_vector(path):
    with open(path) as f:
        return SimplexVector.from_json(json.load(f))


def dump_vector(q, path):
    with open(path, 'w') as f:
        json.dump(q.to_json(), f, indent=1)
