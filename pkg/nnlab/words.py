"""
finite words over the alphabet N = {1, 2, 3, ...}: block counting, frequency vectors, periods

P_k(w, n) only counts the blocks that fit inside the prefix w[:n] (start i with i + k <= n); the divisor is always n,
so the entries of a frequency vector sum to (n - k + 1) / n
"""

import json
import logging
import numbers
from math import lcm
from fractions import Fraction
from itertools import cycle, islice
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from nnlab.errors import InvalidDigitError, InvalidOrderError, OutOfRangeError, WordError

log = logging.getLogger(__name__)

Word = Tuple[int, ...]
Block = Tuple[int, ...]
Number = Union[Fraction, float]

MAX_DIGIT = 2 ** 64 - 1


def as_word(digits, max_digit=MAX_DIGIT) -> Word:
    """
    validate + freeze a digit sequence; max_digit=None accepts any positive integer (expansion digits)
    """
    word = tuple(digits)
    for position, digit in enumerate(word):
        if isinstance(digit, bool) or not isinstance(digit, numbers.Integral):
            raise InvalidDigitError("digit %r at position %d is not an integer" % (digit, position))
        if digit < 1 or (max_digit is not None and digit > max_digit):
            raise InvalidDigitError("digit %d at position %d is outside 1..%s"
                                    % (digit, position, "2^64-1" if max_digit == MAX_DIGIT else max_digit or "inf"))
    return tuple(int(digit) for digit in word)


def as_block(digits, max_digit=MAX_DIGIT) -> Block:
    block = as_word(digits, max_digit)
    if not block:
        raise WordError("a block needs at least one digit")
    return block


"""#####################################################################################################################
                                            COUNTING + FREQUENCIES
#####################################################################################################################"""


def count_block(w, b, n):
    """
    number of start positions i with i + k <= n where b occurs, so at most n - k + 1
    """
    w = as_word(w)
    b = as_block(b)
    if n < 1 or n > len(w):
        raise OutOfRangeError("n = %d is outside 1..%d" % (n, len(w)))
    k = len(b)
    return sum(1 for i in range(n - k + 1) if w[i:i + k] == b)


@dataclass(frozen=True)
class FreqVector:
    """
    frequencies of the k-blocks among the first n letters; exact entries are Fractions, fast entries are floats
    """
    k: int
    n: int
    entries: Mapping[Block, Number] = field(default_factory=dict)
    exact: bool = True

    def __getitem__(self, block):
        return self.entries.get(tuple(block), Fraction(0) if self.exact else 0.0)

    def support(self):
        return sorted(block for block, value in self.entries.items() if value)

    def total(self):
        return sum(self.entries.values(), Fraction(0) if self.exact else 0.0)

    def restrict(self, blocks):
        zero = Fraction(0) if self.exact else 0.0
        return FreqVector(self.k, self.n, {tuple(b): self.entries.get(tuple(b), zero) for b in blocks}, self.exact)

    def to_json(self):
        rows = []
        for block in sorted(self.entries):
            value = self.entries[block]
            if self.exact:
                rows.append({"block": list(block), "num": str(value.numerator), "den": str(value.denominator)})
            else:
                rows.append({"block": list(block), "value": float(value)})
        return {"k": self.k, "n": self.n, "entries": rows}

    @classmethod
    def from_json(cls, data):
        entries = {}
        exact = True
        for row in data["entries"]:
            block = as_block(row["block"])
            if "value" in row:
                exact = False
                entries[block] = float(row["value"])
            else:
                entries[block] = Fraction(int(row["num"]), int(row["den"]))
        return cls(int(data["k"]), int(data["n"]), entries, exact)


def freq_vector(w, k, n, exact=True):
    """
    P_k(w, n): every block that occurs inside w[:n], with count / n
    """
    w = as_word(w)
    if k < 1:
        raise InvalidOrderError("block length must be positive, got %d" % k)
    if k > n:
        raise InvalidOrderError("block length %d exceeds n = %d" % (k, n))
    if n > len(w):
        raise OutOfRangeError("n = %d exceeds word length %d" % (n, len(w)))
    counts = Counter(w[i:i + k] for i in range(n - k + 1))
    if exact:
        entries = {block: Fraction(count, n) for block, count in counts.items()}
    else:
        entries = {block: count / n for block, count in counts.items()}
    return FreqVector(k, n, entries, exact)


"""#####################################################################################################################
                                                PERIODS
#####################################################################################################################"""


def basic_period(b):
    """
    smallest p with b[p + j] == b[j] for all valid j, read off the failure function
    """
    b = as_block(b)
    border = [0] * len(b)
    j = 0
    for i in range(1, len(b)):
        while j and b[i] != b[j]:
            j = border[j - 1]
        if b[i] == b[j]:
            j += 1
        border[i] = j
    return len(b) - border[-1]


def basic_factor(b) -> Word:
    b = as_block(b)
    return b[:basic_period(b)]


def periodic_truncate(seed, total_length) -> Word:
    """
    first total_length letters of seed seed seed ...
    """
    seed = as_block(seed)
    if total_length < 0:
        raise OutOfRangeError("total_length must be nonnegative")
    return tuple(islice(cycle(seed), total_length))


"""#####################################################################################################################
                                            STREAMING BLOCK COUNTS
#####################################################################################################################"""


class FrequencyTracker:
    """
    block counts of a growing prefix, plus its exact l1 distance to a target vector in integer arithmetic

    with q_b = a_b / D the distance at length n is (outside * D + sum |c_b D - a_b n|) / (n D), where outside counts
    the occurrences of blocks q does not weigh
    """

    def __init__(self, k, target: Optional[Mapping[Block, Fraction]] = None):
        if k < 1:
            raise InvalidOrderError("block length must be positive, got %d" % k)
        self.k = k
        self.n = 0
        self.counts = Counter()
        self._window = deque(maxlen=k)
        self._target: Dict[Block, int] = {}
        self._denominator = 1
        self._outside = 0
        if target is not None:
            self.set_target(target)

    def set_target(self, target: Mapping[Block, Fraction]):
        target = {tuple(block): Fraction(value) for block, value in target.items() if value}
        for block in target:
            if len(block) != self.k:
                raise InvalidOrderError("target block %s does not have length %d" % (list(block), self.k))
        self._denominator = lcm(*(value.denominator for value in target.values())) if target else 1
        self._target = {block: int(value * self._denominator) for block, value in target.items()}
        self._outside = sum(count for block, count in self.counts.items() if block not in self._target)

    def push(self, digit):
        self._window.append(digit)
        self.n += 1
        if len(self._window) == self.k:
            block = tuple(self._window)
            self.counts[block] += 1
            if block not in self._target:
                self._outside += 1

    def extend(self, digits):
        for digit in digits:
            self.push(digit)

    def _numerator(self):
        D, n = self._denominator, self.n
        return self._outside * D + sum(abs(self.counts[block] * D - weight * n)
                                       for block, weight in self._target.items())

    def distance(self):
        """
        exact ||P_k(prefix, n) - q||_1 at the current length
        """
        if self.n == 0:
            return Fraction(sum(self._target.values()), self._denominator)
        return Fraction(self._numerator(), self.n * self._denominator)

    def within(self, tolerance):
        """
        distance <= tolerance, decided by cross multiplication
        """
        tolerance = Fraction(tolerance)
        if self.n == 0:
            return self.distance() <= tolerance
        return self._numerator() * tolerance.denominator <= tolerance.numerator * self.n * self._denominator

    def frequencies(self, exact=True):
        n = max(self.n, 1)
        if exact:
            return FreqVector(self.k, self.n, {b: Fraction(c, n) for b, c in self.counts.items()}, True)
        return FreqVector(self.k, self.n, {b: c / n for b, c in self.counts.items()}, False)


"""#####################################################################################################################
                                                SERIALIZATION
#####################################################################################################################"""


def parse_word(text) -> Word:
    """
    accepts a json array ("[1, 2, 1, 3]") or the compact comma form ("1,2,1,3")
    """
    text = text.strip()
    if not text:
        return ()
    try:
        if text.startswith('['):
            return as_word(json.loads(text))
        return as_word(int(part) for part in text.split(','))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, WordError):
            raise
        raise WordError("cannot parse word %r: %s" % (text[:40], exc)) from exc


def format_word(word: Sequence[int]) -> str:
    return ','.join(str(digit) for digit in word)


def word_to_json(word: Sequence[int]) -> str:
    return json.dumps(list(word))


def load_word(path) -> Word:
    with open(path) as f:
        text = f.read()
    stripped = text.lstrip()
    if stripped.startswith('{'):
        data = json.loads(stripped)
        return as_word(data["digits"])
    return parse_word(text)
