"""
continued fraction (gauss map) and lueroth expansions

digits come from exact rational enclosures [lo, hi] of x: a digit is certified once both endpoints fall strictly
inside the same partition element, so the certified digits are the common prefix of the endpoint expansions.
rationals are followed exactly along their orbit; an orbit that lands on a partition endpoint is not in U_infinity
"""

import re
import math
import logging
from enum import Enum
from math import gcd, isqrt
from fractions import Fraction
from dataclasses import dataclass
from collections import namedtuple
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import iv
from mpmath.libmp import to_rational

from nnlab.config import settings
from nnlab.errors import ExpansionError, NotInUInfinityError, PrecisionError, ValueParseError
from nnlab.words import Word, as_block

log = logging.getLogger(__name__)


class ExpansionKind(Enum):
    CF = 'cf'
    LUEROTH = 'lueroth'

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueParseError("unknown expansion system %r (cf or lueroth)" % text)


"""#####################################################################################################################
                                            INTERVALS + INPUTS
#####################################################################################################################"""


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ExpansionError("empty interval [%s, %s]" % (self.lo, self.hi))

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        """
        a point answer, labeled as such: the middle of the cylinder
        """
        return (self.lo + self.hi) / 2

    def contains(self, x):
        return self.lo <= x <= self.hi

    def issubset(self, other):
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self):
        return "[%s, %s]" % (self.lo, self.hi)


def _exact(raw):
    """
    an mpf endpoint as a Fraction of python ints (the gmpy backend hands back mpz)
    """
    p, q = to_rational(raw)
    return Fraction(int(p), int(q))


@dataclass(frozen=True)
class RealInput:
    """
    x in (0, 1) as an exact rational, a quadratic surd (a + b sqrt(d)) / c, or a decimal with an error bound
    """
    form: str
    rational: Optional[Fraction] = None
    surd: Optional[Tuple[int, int, int, int]] = None
    error: Fraction = Fraction(0)

    @property
    def exact(self):
        return self.form == 'rational'

    def enclosure(self, bits) -> RationalInterval:
        if self.form == 'rational':
            return RationalInterval(self.rational, self.rational)
        if self.form == 'decimal':
            return RationalInterval(self.rational - self.error, self.rational + self.error)
        a, b, c, d = self.surd
        saved = iv.prec
        iv.prec = bits
        try:
            x = (iv.mpf(a) + iv.mpf(b) * iv.sqrt(iv.mpf(d))) / iv.mpf(c)
            lo_raw, hi_raw = x._mpi_
        finally:
            iv.prec = saved
        return RationalInterval(_exact(lo_raw), _exact(hi_raw))

    def __str__(self):
        if self.form == 'rational':
            return str(self.rational)
        if self.form == 'decimal':
            return "%s~%s" % (self.rational, self.error)
        a, b, c, d = self.surd
        return "(%d%+d*sqrt(%d))/%d" % (a, b, d, c)


_RATIONAL = re.compile(r'^([+-]?\d+)/(\d+)$')
_DECIMAL = re.compile(r'^(\d*)\.(\d+)(?:~(\d+))?$')
_OVER = re.compile(r'^\((.+)\)/(\d+)$')
_TERM = re.compile(r'([+-]?)(?:(\d+)\*?)?sqrt\((\d+)\)|([+-]?)(\d+)')


def _parse_surd(text):
    match = _OVER.match(text)
    numerator, c = (match.group(1), int(match.group(2))) if match else (text, 1)
    if numerator.startswith('(') and numerator.endswith(')'):
        numerator = numerator[1:-1]
    a = b = 0
    d = None
    position = 0
    for term in _TERM.finditer(numerator):
        if term.start() != position:
            break
        position = term.end()
        if term.group(3) is not None:
            root = int(term.group(3))
            if d is not None and root != d:
                raise ValueParseError("only one square root is supported in %r" % text)
            d = root
            coefficient = int(term.group(2)) if term.group(2) else 1
            b += -coefficient if term.group(1) == '-' else coefficient
        else:
            value = int(term.group(5))
            a += -value if term.group(4) == '-' else value
    if position != len(numerator) or position == 0:
        raise ValueParseError("cannot parse value %r" % text)
    if c == 0:
        raise ValueParseError("zero denominator in %r" % text)
    if d is None or b == 0:
        return Fraction(a, c), None
    root = isqrt(d)
    if root * root == d:
        return Fraction(a + b * root, c), None
    return None, (a, b, c, d)


def parse_real(text) -> RealInput:
    """
    value grammar: p/q, (a+b*sqrt(d))/c (also sqrt(2)-1, (sqrt(5)-1)/2), or a decimal with optional ~p meaning
    error 10^-p (default: one unit in the last written place)
    """
    if isinstance(text, RealInput):
        return text
    if isinstance(text, Fraction):
        return _checked(RealInput('rational', rational=text))
    compact = re.sub(r'\s+', '', str(text))
    if not compact:
        raise ValueParseError("empty value")

    match = _RATIONAL.match(compact)
    if match:
        if int(match.group(2)) == 0:
            raise ValueParseError("zero denominator in %r" % text)
        return _checked(RealInput('rational', rational=Fraction(int(match.group(1)), int(match.group(2)))))

    match = _DECIMAL.match(compact)
    if match:
        whole, fraction, places = match.groups()
        center = Fraction(int((whole or '0') + fraction), 10 ** len(fraction))
        error = Fraction(1, 10 ** (int(places) if places else len(fraction)))
        return _checked(RealInput('decimal', rational=center, error=error))

    rational, surd = _parse_surd(compact)
    if surd is None:
        return _checked(RealInput('rational', rational=rational))
    return _checked(RealInput('surd', surd=surd))


def _checked(x: RealInput):
    box = x.enclosure(64)
    if not (0 < box.lo and box.hi < 1):
        raise ValueParseError("value %s is not inside (0, 1)" % x)
    return x


"""#####################################################################################################################
                                            DIGIT EXTRACTION
#####################################################################################################################"""


def _gauss_step(p, q):
    """
    x = p / q -> (a_1(x), T x) with T x = 1/x - floor(1/x); None when x = 1/a is a partition endpoint
    """
    a, rest = divmod(q, p)
    if rest == 0:
        return a, None
    return a, (rest, p)


def _lueroth_step(p, q):
    """
    x = p / q in (1/(n+1), 1/n) -> (n, n(n+1)x - n); None on an endpoint 1/n
    """
    n, rest = divmod(q, p)
    if rest == 0:
        return n, None
    top = n * (n + 1) * p - n * q
    g = gcd(top, q)
    return n, (top // g, q // g)


_STEPS = {ExpansionKind.CF: _gauss_step, ExpansionKind.LUEROTH: _lueroth_step}


def certified_digits(kind, box: RationalInterval, count) -> List[int]:
    """
    common prefix of the expansions of both endpoints (every point between them shares it)
    """
    step = _STEPS[ExpansionKind.parse(kind)]
    if box.lo <= 0 or box.hi >= 1:
        return []
    low = (int(box.lo.numerator), int(box.lo.denominator))
    high = (int(box.hi.numerator), int(box.hi.denominator))
    digits = []
    while len(digits) < count:
        d_low, low = step(*low)
        d_high, high = step(*high)
        if d_low != d_high or low is None or high is None:
            break
        digits.append(int(d_low))
    return digits


def rational_orbit(kind, x, orbit_limit=None) -> Tuple[Word, Word]:
    """
    follow a rational exactly: (preperiod, period) of its digit sequence when the orbit is periodic

    a landing on a partition endpoint raises NotInUInfinityError; for the gauss map every rational ends that way
    """
    kind = ExpansionKind.parse(kind)
    orbit_limit = settings.orbit_limit if orbit_limit is None else orbit_limit
    step = _STEPS[kind]
    x = Fraction(x)
    state = (x.numerator, x.denominator)
    seen: Dict[Tuple[int, int], int] = {}
    digits: List[int] = []
    while state not in seen:
        if len(seen) >= orbit_limit:
            raise ExpansionError("orbit of %s did not close within %d steps" % (x, orbit_limit))
        seen[state] = len(digits)
        digit, following = step(*state)
        if following is None:
            raise NotInUInfinityError(len(digits), Fraction(*state))
        digits.append(int(digit))
        state = following
    start = seen[state]
    return tuple(digits[:start]), tuple(digits[start:])


def expand(kind, x, count, precision_bits=None, precision_retries=None, orbit_limit=None) -> Word:
    kind = ExpansionKind.parse(kind)
    x = parse_real(x)
    if count < 0:
        raise ExpansionError("digit count must be nonnegative")
    if x.exact:
        head, period = rational_orbit(kind, x.rational, orbit_limit)
        digits = list(head[:count])
        while len(digits) < count:
            digits.extend(period[:count - len(digits)])
        return tuple(digits)

    bits = settings.precision_bits if precision_bits is None else precision_bits
    retries = settings.precision_retries if precision_retries is None else precision_retries
    reached = 0
    for attempt in range(retries + 1):
        digits = certified_digits(kind, x.enclosure(bits), count)
        if len(digits) >= count:
            return tuple(digits)
        reached = max(reached, len(digits))
        if x.form == 'decimal':
            break
        log.debug("%s digits of %s: %d certified at %d bits, doubling", kind.value, x, len(digits), bits)
        bits *= 2
    raise PrecisionError(reached, bits)


def cf_digits(x, count, **kwargs) -> Word:
    """
    first count partial quotients a_k(x) = floor(1 / x_k)
    """
    return expand(ExpansionKind.CF, x, count, **kwargs)


def lueroth_digits(x, count, **kwargs) -> Word:
    return expand(ExpansionKind.LUEROTH, x, count, **kwargs)


def in_u_infinity(kind, x, orbit_limit=None):
    """
    exact membership for rationals: True if the orbit never meets a partition endpoint
    """
    try:
        rational_orbit(kind, x, orbit_limit)
    except NotInUInfinityError:
        return False
    return True


"""#####################################################################################################################
                                            CYLINDERS
#####################################################################################################################"""


def cf_reconstruct(digits) -> RationalInterval:
    """
    closure of the cylinder of a digit prefix: between p_n/q_n and (p_n + p_{n-1}) / (q_n + q_{n-1})
    """
    digits = as_block(digits, max_digit=None)
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in digits:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
    ends = sorted((Fraction(p, q), Fraction(p + p_prev, q + q_prev)))
    return RationalInterval(*ends)


def lueroth_reconstruct(digits) -> RationalInterval:
    """
    psi_{d_1} o ... o psi_{d_K} ([0, 1]) with the inverse branches psi_d(t) = (t + d) / (d (d + 1))
    """
    digits = as_block(digits, max_digit=None)
    lo, hi = Fraction(0), Fraction(1)
    for d in reversed(digits):
        lo, hi = (lo + d) / (d * (d + 1)), (hi + d) / (d * (d + 1))
    return RationalInterval(lo, hi)


def cylinder(kind, digits) -> RationalInterval:
    kind = ExpansionKind.parse(kind)
    if kind is ExpansionKind.CF:
        return cf_reconstruct(digits)
    return lueroth_reconstruct(digits)


"""#####################################################################################################################
                                            GAUSS MEASURE + SAMPLING
#####################################################################################################################"""


GaussMeasure = namedtuple('GaussMeasure', ['num', 'den', 'value'])


def gauss_block_measure(b) -> GaussMeasure:
    """
    mu((1/(b+1), 1/b)) = log2((b+1)^2 / (b(b+2))), as the log argument plus a float
    """
    if b < 1:
        raise ExpansionError("digit must be positive, got %d" % b)
    den = b * (b + 2)
    return GaussMeasure((b + 1) ** 2, den, math.log1p(1 / den) / math.log(2))


def gauss_partial_sum(B):
    """
    sum_{b <= B} mu(cylinder b) = log2(2 (B + 1) / (B + 2)), the product of the log arguments telescopes
    """
    if B < 1:
        return 0.0
    return math.log2(2 * (B + 1) / (B + 2))


def sample_uniform(seed, count, precision_bits=None, precision_retries=None) -> Word:
    """
    cf digits of a uniform x: random bits m give x in [m / 2^B, (m + 1) / 2^B]; more bits from the same generator
    refine x until count digits are certified
    """
    retries = settings.precision_retries if precision_retries is None else precision_retries
    bits = max(settings.precision_bits if precision_bits is None else precision_bits, 4 * count + 64)
    bits = -(-bits // 8) * 8
    rng = np.random.default_rng(seed)
    m = int.from_bytes(rng.bytes(bits // 8), 'big')
    reached = 0
    for attempt in range(retries + 1):
        box = RationalInterval(Fraction(m, 1 << bits), Fraction(m + 1, 1 << bits))
        digits = certified_digits(ExpansionKind.CF, box, count)
        if len(digits) >= count:
            return tuple(digits)
        reached = max(reached, len(digits))
        log.debug("sample %s: %d of %d digits at %d bits, refining", seed, len(digits), count, bits)
        m = (m << bits) | int.from_bytes(rng.bytes(bits // 8), 'big')
        bits *= 2
    raise PrecisionError(reached, bits)


@dataclass(frozen=True)
class SurveyResult:
    digits: Tuple[int, ...]
    mean: np.ndarray
    std: np.ndarray
    expected: Tuple[float, ...]
    samples: int
    count: int

    def rows(self):
        for digit, mean, std, expected in zip(self.digits, self.mean, self.std, self.expected):
            yield digit, float(mean), float(std), expected


def digit_frequency_survey(seeds, count, digits: Sequence[int] = (1, 2, 3), seed=None, precision_bits=None,
                           precision_retries=None) -> SurveyResult:
    """
    mean frequency of each digit among the first count cf digits of `seeds` uniform samples
    """
    seed = settings.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(seeds)
    table = np.zeros((seeds, len(digits)))
    for row, child in enumerate(children):
        word = np.asarray(sample_uniform(child, count, precision_bits, precision_retries), dtype=object)
        table[row] = [np.count_nonzero(word == d) / count for d in digits]
    expected = tuple(gauss_block_measure(d).value for d in digits)
    log.info("survey of %d samples x %d digits done", seeds, count)
    return SurveyResult(tuple(digits), table.mean(axis=0), table.std(axis=0), expected, seeds, count)
