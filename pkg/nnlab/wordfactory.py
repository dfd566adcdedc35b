"""
words with prescribed block frequencies

construct_zn_word realizes Z_n(q, N, k) with eulerian circuits of the de bruijn multigraph of q (vertices are
(k-1)-blocks, the k-block b is an edge b[:-1] -> b[1:] with weight proportional to q_b); extend_to_target pads a
prefix with gamma gamma gamma ... until the frequencies settle within 6/n of q
"""

import logging
from math import ceil, lcm
from fractions import Fraction
from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx

from nnlab.errors import ConstructionError, PreconditionError
from nnlab.simplex import SimplexVector, l1_distance, validate
from nnlab.words import Block, Word, FrequencyTracker, as_word, freq_vector, periodic_truncate

log = logging.getLogger(__name__)

MAX_REFINEMENTS = 24


@dataclass(frozen=True)
class ZnSpec:
    q: SimplexVector
    N: int
    k: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("tolerance parameter n must be positive, got %d" % self.n)
        if self.q.k != self.k:
            raise PreconditionError("q has block length %d, spec says k = %d" % (self.q.k, self.k))
        object.__setattr__(self, 'q', validate(self.q, k=self.k, N=self.N))

    @classmethod
    def for_vector(cls, q, n, N=None):
        return cls(q, q.N if N is None else N, q.k, n)

    @property
    def min_length(self):
        return self.k * self.n * self.N ** self.k

    @property
    def tolerance(self):
        return Fraction(1, self.n)


def is_in_zn(w, spec: ZnSpec):
    """
    length >= k n N^k, digits <= N and ||P_k(w) - q||_1 <= 1/n, decided exactly
    """
    w = as_word(w)
    if not w or len(w) < spec.min_length or max(w) > spec.N:
        return False
    tracker = FrequencyTracker(spec.k, spec.q.entries)
    tracker.extend(w)
    return tracker.within(spec.tolerance)


"""#####################################################################################################################
                                            EULERIAN CONSTRUCTION
#####################################################################################################################"""


def _multigraph(weights: Dict[Block, int]):
    """
    out-edges per (k-1)-block as [next digit, multiplicity] in digit order, plus the support graph
    """
    out: Dict[Block, List[List[int]]] = {}
    support = nx.DiGraph()
    for block in sorted(weights):
        head, tail = block[:-1], block[1:]
        out.setdefault(head, []).append([block[-1], weights[block]])
        support.add_edge(head, tail)
    return out, support


def _circuit(out, start) -> List[int]:
    """
    iterative hierholzer taking the smallest available digit first; returns the digits appended along the circuit
    """
    cursor = {vertex: 0 for vertex in out}
    stack: List[Tuple[Block, int]] = [(start, 0)]
    digits: List[int] = []
    while stack:
        vertex, digit = stack[-1]
        edges = out.get(vertex, [])
        i = cursor.get(vertex, 0)
        while i < len(edges) and edges[i][1] == 0:
            i += 1
        cursor[vertex] = i
        if i < len(edges):
            edges[i][1] -= 1
            step = edges[i][0]
            stack.append(((vertex + (step,))[1:], step))
        else:
            stack.pop()
            if stack:
                digits.append(digit)
    digits.reverse()
    return digits


def cyclic_word(q: SimplexVector, scale=1) -> Word:
    """
    one eulerian circuit per weakly connected component of the support graph, concatenated in vertex order

    read cyclically, each component circuit has block frequencies exactly q restricted to that component
    """
    D = lcm(*(value.denominator for value in q.entries.values()))
    weights = {block: int(value * D) * scale for block, value in q.entries.items()}
    out, support = _multigraph(weights)
    components = sorted(min(component) for component in nx.weakly_connected_components(support))
    word: List[int] = []
    for start in components:
        circuit = _circuit(out, start)
        # rotate so the component word reads from its start vertex
        shift = len(start) % len(circuit) if circuit else 0
        word.extend(circuit[len(circuit) - shift:] + circuit[:len(circuit) - shift])
    if any(count for edges in out.values() for _, count in edges):
        raise ConstructionError("support graph of %s is not eulerian" % q)
    return tuple(word)


def construct_zn_word(spec: ZnSpec) -> Word:
    """
    a word in Z_n(q, N, k): the cyclic eulerian word, scaled against seam defects and repeated past k n N^k
    """
    q = spec.q
    D = lcm(*(value.denominator for value in q.entries.values()))
    components = nx.number_weakly_connected_components(_multigraph({b: 1 for b in q.entries})[1])
    scale = max(1, ceil(Fraction(4 * spec.n * components * (spec.k - 1), D))) if components > 1 else 1

    residual = None
    for attempt in range(MAX_REFINEMENTS):
        cycle = cyclic_word(q, scale)
        repeats = max(1, -(-spec.min_length // len(cycle)))
        gamma = cycle * repeats
        tracker = FrequencyTracker(spec.k, q.entries)
        tracker.extend(gamma)
        if tracker.within(spec.tolerance):
            log.debug("Z_%d word for %s: %d components, scale %d, %d repeats, length %d",
                      spec.n, q, components, scale, repeats, len(gamma))
            return gamma
        residual = tracker.distance()
        log.debug("construction attempt %d missed by %s, doubling scale", attempt, residual)
        scale *= 2
    raise ConstructionError("no word in Z_%d found for %s" % (spec.n, q), residual)


"""#####################################################################################################################
                                                PADDING
#####################################################################################################################"""


def padding_length(t, gamma_len, k, n, M, N):
    """
    L = t + |gamma| max(n, (t / k) max(1, M^k / N^k)), rounded up
    """
    M = max(M, 1)
    inner = max(Fraction(n), Fraction(t, k) * max(Fraction(1), Fraction(M ** k, N ** k)))
    return ceil(t + gamma_len * inner)


def extend_to_target(omega, q: SimplexVector, n, ell, gamma=None) -> Word:
    """
    omega gamma* truncated to ell letters, with ||P_k(result) - q||_1 <= 6/n checked exactly
    """
    omega = as_word(omega)
    if gamma is None:
        gamma = construct_zn_word(ZnSpec.for_vector(q, n))
    t = len(omega)
    required = padding_length(t, len(gamma), q.k, n, max(omega, default=1), q.N)
    if ell < required:
        raise PreconditionError("ell = %d is below the padding bound L = %d" % (ell, required), required)

    result = omega + periodic_truncate(gamma, ell - t)
    distance = l1_distance(freq_vector(result, q.k, ell), q)
    if distance > Fraction(6, n):
        raise ConstructionError("padded word misses 6/%d" % n, distance)
    return result


def padding_violations(omega, q: SimplexVector, n, extra, gamma=None):
    """
    every ell in [L, L + extra] with ||P_k(omega gamma*|ell) - q||_1 > 6/n, as (L, violations, worst distance)
    """
    omega = as_word(omega)
    if gamma is None:
        gamma = construct_zn_word(ZnSpec.for_vector(q, n))
    t = len(omega)
    L = padding_length(t, len(gamma), q.k, n, max(omega, default=1), q.N)
    bound = Fraction(6, n)
    tracker = FrequencyTracker(q.k, q.entries)
    tracker.extend(omega + periodic_truncate(gamma, L - t))
    violations = []
    worst = tracker.distance()
    tail = periodic_truncate(gamma, L - t + extra)[L - t:]
    for ell in range(L, L + extra + 1):
        if ell > L:
            tracker.push(tail[ell - L - 1])
        if not tracker.within(bound):
            violations.append(ell)
        worst = max(worst, tracker.distance())
    return L, violations, worst
