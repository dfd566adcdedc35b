"""
streaming iterated cesaro averages of block frequencies

P^(0)(b, n) = c_b(n) / n and P^(l)(b, n) = S^(l)(b, n) / n with S^(l)(b, n) = sum_{j <= n} P^(l-1)(b, j)

blocks are settled lazily: between two completions of b its count is constant, and over such a span every level is a
combination of the nested harmonic sums E_0 = 1, E_m(n) = sum_{j <= n} E_{m-1}(j) / j, so a span costs O(r^2) no
matter how long it is
"""

import csv
import math
import logging
import threading
from fractions import Fraction
from collections import Counter, deque
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from nnlab.config import settings
from nnlab.errors import CesaroError, ExactCapExceeded, LevelError, MissingHistoryError, OutOfRangeError
from nnlab.words import Block, FreqVector, FrequencyTracker, as_block, as_word, format_word

log = logging.getLogger(__name__)


"""#####################################################################################################################
                                            NESTED HARMONIC TABLES
#####################################################################################################################"""


class _NestedHarmonics:
    """
    tables[m - 1][n] = E_m(n); exact tables hold Fractions, float tables are kahan-compensated

    shared by every ladder of one mode; growth happens under a lock and rows are never rewritten
    """

    def __init__(self, exact):
        self.exact = exact
        self.tables: List[list] = []
        self._carry: List[float] = []
        self.size = 1
        self._lock = threading.Lock()

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def _grow_depth(self, depth):
        while len(self.tables) < depth:
            m = len(self.tables) + 1
            below = self.tables[m - 2] if m > 1 else None
            table = [self._zero()]
            total, carry = self._zero(), 0.0
            for j in range(1, self.size):
                step = (below[j] if below else 1) / (Fraction(j) if self.exact else j)
                total, carry = self._add(total, carry, step)
                table.append(total)
            self.tables.append(table)
            self._carry.append(carry)

    def _add(self, total, carry, value):
        if self.exact:
            return total + value, 0.0
        y = value - carry
        t = total + y
        return t, (t - total) - y

    def ensure(self, depth, n):
        if depth <= len(self.tables) and n < self.size:
            return
        with self._lock:
            self._grow_depth(depth)
            for j in range(self.size, n + 1):
                below = 1
                for m, table in enumerate(self.tables):
                    step = below / (Fraction(j) if self.exact else j)
                    total, self._carry[m] = self._add(table[-1], self._carry[m], step)
                    table.append(total)
                    below = total
            self.size = max(self.size, n + 1)

    def __call__(self, m, n):
        return self.tables[m - 1][n]


_HARMONICS = {True: _NestedHarmonics(True), False: _NestedHarmonics(False)}


"""#####################################################################################################################
                                                THE LADDER
#####################################################################################################################"""


class _BlockState:
    __slots__ = ('last', 'count', 'sums')

    def __init__(self, last, zero, r_max):
        self.last = last
        self.count = 0
        self.sums = [zero] * r_max


class CesaroLadder:
    """
    single-writer streaming state for levels 0..r_max of one block length k

    track limits the per-block state to a fixed set of blocks; history keeps the level values of the last H steps
    """

    def __init__(self, k, r_max, exact=None, exact_cap=None, track: Optional[Iterable[Block]] = None, history=None):
        if k < 1:
            raise LevelError("block length must be positive, got %d" % k)
        if r_max < 0:
            raise LevelError("r_max must be nonnegative, got %d" % r_max)
        self.k = k
        self.r_max = r_max
        self.exact = settings.exact if exact is None else exact
        self.exact_cap = settings.exact_cap if exact_cap is None else exact_cap
        self.n = 0
        self.counts = Counter()
        self.track = None if track is None else frozenset(as_block(b) for b in track)
        history = settings.history if history is None else history
        self.history = deque(maxlen=history) if history else None

        self._zero = Fraction(0) if self.exact else 0.0
        self._E = _HARMONICS[self.exact]
        self._window = deque(maxlen=k)
        self._states: Dict[Block, _BlockState] = {}
        if self.track is not None:
            for block in self.track:
                if len(block) != k:
                    raise LevelError("tracked block %s does not have length %d" % (list(block), k))
                self._states[block] = _BlockState(0, self._zero, r_max)
        self._totals = [self._zero] * r_max

    @property
    def mode(self):
        return 'exact' if self.exact else 'float'

    def _ratio(self, num, den):
        if self.exact:
            return Fraction(num) / den
        return num / den

    def _settle(self, state, target):
        a = state.last
        if target <= a:
            return
        E = self._E
        E.ensure(self.r_max, target)
        beta = [state.count]
        for ell in range(self.r_max):
            old = state.sums[ell]
            delta = self._zero
            offset = old
            for m, coefficient in enumerate(beta):
                if coefficient:
                    delta += coefficient * (E(m + 1, target) - E(m + 1, a))
                    offset -= coefficient * E(m + 1, a)
            state.sums[ell] = old + delta
            beta = [offset] + beta
        state.last = target

    def push(self, digit):
        if isinstance(digit, bool) or not isinstance(digit, int) or digit < 1:
            as_word((digit,))
        if self.exact and self.n + 1 > self.exact_cap:
            raise ExactCapExceeded(self.exact_cap)
        self.n += 1
        n = self.n
        self._window.append(digit)

        if len(self._window) == self.k:
            block = tuple(self._window)
            self.counts[block] += 1
            state = self._states.get(block)
            if state is None and self.track is None:
                state = self._states[block] = _BlockState(n - 1, self._zero, self.r_max)
            if state is not None:
                self._settle(state, n - 1)
                state.count += 1
                self._settle(state, n)

        level = self._ratio(max(0, n - self.k + 1), n)
        for ell in range(self.r_max):
            self._totals[ell] += level
            level = self._totals[ell] / n

        if self.history is not None:
            self.history.append((n, {block: self.levels(block) for block in self._states}))
        return self

    def extend(self, digits):
        for digit in digits:
            self.push(digit)
        return self

    def _check_level(self, r):
        if not 0 <= r <= self.r_max:
            raise LevelError("level %d outside 0..%d" % (r, self.r_max))

    def value(self, block, r):
        """
        P^(r)(block, n) at the current n
        """
        self._check_level(r)
        block = tuple(block)
        if self.n == 0:
            return self._zero
        if r == 0:
            return self._ratio(self.counts.get(block, 0), self.n)
        state = self._states.get(block)
        if state is None:
            if self.track is not None and block not in self.track:
                raise CesaroError("block %s is not tracked by this ladder" % list(block))
            return self._zero
        self._settle(state, self.n)
        return state.sums[r - 1] / self.n

    def levels(self, block):
        return tuple(self.value(block, r) for r in range(self.r_max + 1))

    def total(self, r):
        """
        sum over all blocks of P^(r)(b, n)
        """
        self._check_level(r)
        if self.n == 0:
            return self._zero
        if r == 0:
            return self._ratio(max(0, self.n - self.k + 1), self.n)
        return self._totals[r - 1] / self.n

    def blocks(self):
        return sorted(block for block, state in self._states.items() if state.count or self.counts.get(block))

    def distance(self, q, r):
        """
        l1 distance from the level-r vector to q; only q's support has to be tracked
        """
        inside = self._zero
        off = self._zero
        for block, weight in q.entries.items():
            value = self.value(block, r)
            inside += value
            off += abs(value - weight)
        rest = self.total(r) - inside
        if not self.exact and rest < 0:
            rest = 0.0
        return off + rest

    def snapshot(self, r, blocks=None):
        self._check_level(r)
        if self.n < self.k:
            raise OutOfRangeError("snapshot needs n >= k (n = %d, k = %d)" % (self.n, self.k))
        if blocks is None:
            blocks = self.blocks() if r else sorted(self.counts)
        entries = {tuple(block): self.value(block, r) for block in blocks}
        return FreqVector(self.k, self.n, entries, self.exact)


def push_digit(ladder, d):
    return ladder.push(d)


def snapshot(ladder, r, blocks=None):
    return ladder.snapshot(r, blocks)


def gap(history, r, n, block=None):
    """
    |P^(r)(b, n + 1) - P^(r)(b, n)| from a ladder history (or the ladder itself)
    """
    if isinstance(history, CesaroLadder):
        if history.history is None:
            raise MissingHistoryError("ladder keeps no history")
        history = history.history
    by_n = dict(history)
    if n not in by_n or n + 1 not in by_n:
        raise MissingHistoryError("history does not hold both n = %d and n = %d" % (n, n + 1))
    before, after = by_n[n], by_n[n + 1]
    if block is None:
        candidates = set(before) | set(after)
        if len(candidates) != 1:
            raise MissingHistoryError("history holds %d blocks, name one" % len(candidates))
        block = candidates.pop()
    block = tuple(block)
    zero = (0,) * (r + 1)
    low, high = before.get(block, zero), after.get(block, zero)
    if r >= len(high):
        raise LevelError("history holds levels up to %d" % (len(high) - 1))
    return abs(high[r] - low[r])


"""#####################################################################################################################
                                        DEFINITIONAL ORACLE + SERIES
#####################################################################################################################"""


def iterated_averages(word, block, r, n) -> List[List[Fraction]]:
    """
    levels 0..r of P(word, block, j) for j = 1..n, materialized straight from the definition

    result[l][j - 1] = P^(l)(block, j)
    """
    word = as_word(word)
    block = as_block(block)
    if n > len(word):
        raise OutOfRangeError("n = %d exceeds word length %d" % (n, len(word)))
    k = len(block)
    starts = [i for i in range(len(word) - k + 1) if word[i:i + k] == block]
    level = [Fraction(sum(1 for i in starts if i + k <= j), j) for j in range(1, n + 1)]
    result = [level]
    for _ in range(r):
        running = Fraction(0)
        averaged = []
        for j, value in enumerate(level, start=1):
            running += value
            averaged.append(running / j)
        level = averaged
        result.append(level)
    return result


def use_exact(length, exact=None, exact_cap=None):
    """
    exact ladders only while the stream fits under the cap
    """
    exact = settings.exact if exact is None else exact
    exact_cap = settings.exact_cap if exact_cap is None else exact_cap
    if exact and length > exact_cap:
        log.warning("stream length %d exceeds exact_cap %d, levels >= 1 run in float mode", length, exact_cap)
        return False
    return exact


def distance_series(stream, q, r, exact=None, exact_cap=None) -> Iterator[Tuple[int, object]]:
    """
    yields (n, ||P_k^(r)(stream, n) - q||_1) for n = 1..len(stream)

    level 0 is always exact integer counting; higher levels follow exact/exact_cap
    """
    stream = as_word(stream)
    if r == 0:
        tracker = FrequencyTracker(q.k, q.entries)
        for n, digit in enumerate(stream, start=1):
            tracker.push(digit)
            yield n, tracker.distance()
        return
    ladder = CesaroLadder(q.k, r, exact=use_exact(len(stream), exact, exact_cap), exact_cap=exact_cap,
                          track=q.entries.keys(), history=0)
    for n, digit in enumerate(stream, start=1):
        ladder.push(digit)
        yield n, ladder.distance(q, r)


"""#####################################################################################################################
                                                CHECKPOINTS
#####################################################################################################################"""


def geometric_checkpoints(ratio=None, n_max=1, start=1):
    """
    sorted distinct ceil(ratio^i) in [start, n_max]
    """
    ratio = settings.checkpoint_ratio if ratio is None else ratio
    if not ratio > 1:
        raise CesaroError("checkpoint ratio must be > 1, got %s" % ratio)
    powers = ratio ** np.arange(0, math.ceil(math.log(max(n_max, 1), ratio)) + 2)
    points = np.unique(np.ceil(powers).astype(np.int64))
    return [int(x) for x in points if start <= x <= n_max]


def dump_checkpoints(stream, k, r_max, path, ratio=None, blocks=None, exact=None, exact_cap=None):
    """
    csv rows (n, r, block, value_num, value_den) at geometric checkpoints; float values are written as the exact
    fraction of the double
    """
    stream = as_word(stream)
    exact = use_exact(len(stream), exact, exact_cap)
    ladder = CesaroLadder(k, r_max, exact=exact, exact_cap=exact_cap, track=blocks, history=0)
    points = set(geometric_checkpoints(ratio, len(stream), start=k))
    rows = 0
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['n', 'r', 'block', 'value_num', 'value_den'])
        for digit in stream:
            ladder.push(digit)
            if ladder.n not in points:
                continue
            for block in (blocks if blocks is not None else ladder.blocks()):
                for r, value in enumerate(ladder.levels(block)):
                    value = Fraction(value)
                    writer.writerow([ladder.n, r, format_word(block), value.numerator, value.denominator])
                    rows += 1
    log.info("wrote %d checkpoint rows to %s", rows, path)
    return rows


"""#####################################################################################################################
                                                SUITES
#####################################################################################################################"""


def _decade(n):
    low = 10 ** (len(str(n)) - 1)
    return low, low * 10 - 1


def gap_survey(word, r_max, k=1, exact=None, exact_cap=None, float_slack=None):
    """
    every |P^(r)(b, n + 1) - P^(r)(b, n)| against 1/(n + 1), for every block seen and r <= r_max

    returns (violations as (n, r, block), largest gap per (decade, r))
    """
    word = as_word(word)
    float_slack = settings.float_slack if float_slack is None else float_slack
    exact_run = use_exact(len(word), exact, exact_cap)
    ladder = CesaroLadder(k, r_max, exact=exact_run, exact_cap=exact_cap, history=0)
    previous = {}
    violations = []
    largest = {}
    for digit in word:
        n = ladder.n
        ladder.push(digit)
        current = {block: ladder.levels(block) for block in ladder.blocks()}
        if n:
            bound = Fraction(1, n + 1) if exact_run else 1 / (n + 1) + float_slack
            zero = (ladder._zero,) * (r_max + 1)
            for block, values in current.items():
                before = previous.get(block, zero)
                for r in range(r_max + 1):
                    step = abs(values[r] - before[r])
                    if step > bound:
                        violations.append((n, r, block))
                    key = _decade(n) + (r,)
                    if step > largest.get(key, -1):
                        largest[key] = step
        previous = current
    return violations, largest


def oracle_mismatches(word, k, r_max, exact_cap=None):
    """
    (n, r, block) wherever the exact ladder disagrees with iterated_averages
    """
    word = as_word(word)
    ladder = CesaroLadder(k, r_max, exact=True, exact_cap=max(len(word), 1) if exact_cap is None else exact_cap,
                          history=0)
    blocks = sorted({word[i:i + k] for i in range(len(word) - k + 1)})
    oracles = {block: iterated_averages(word, block, r_max, len(word)) for block in blocks}
    mismatches = []
    for digit in word:
        ladder.push(digit)
        n = ladder.n
        for block in blocks:
            for r in range(r_max + 1):
                if ladder.value(block, r) != oracles[block][r][n - 1]:
                    mismatches.append((n, r, block))
    return mismatches
