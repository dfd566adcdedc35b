"""
accumulation sets of iterated block frequencies

for the full shift over N every level-r accumulation set of a block b is [0, 1/p] with p = basic_period(b); on finite
data the best we can do is bracket it by the min and max over a tail window
"""

import csv
import logging
from fractions import Fraction
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from nnlab.cesaro import CesaroLadder, geometric_checkpoints, use_exact
from nnlab.config import settings
from nnlab.errors import OutOfRangeError
from nnlab.words import Block, FrequencyTracker, as_block, as_word, basic_factor, basic_period, format_word, \
    periodic_truncate

log = logging.getLogger(__name__)

Number = Union[Fraction, float]


@dataclass(frozen=True)
class AccumulationEstimate:
    block: Block
    r: int
    n0: int
    n1: int
    lo: Number
    hi: Number
    gap_bound_ok: bool
    exact: bool = True

    @property
    def window(self):
        return self.n0, self.n1


def _scan(stream, block, r_max, n0, n1, exact=None, exact_cap=None, float_slack=None):
    """
    min / max of P^(r)(block, n) over n0 < n <= n1 for every r <= r_max, checking |P(n+1) - P(n)| <= 1/(n+1)
    from n0 on
    """
    k = len(block)
    if not k <= n0 < n1 <= len(stream):
        raise OutOfRangeError("window (%d, %d] is not inside [k=%d, %d]" % (n0, n1, k, len(stream)))
    exact_run = True if r_max == 0 else use_exact(n1, exact, exact_cap)
    slack = 0 if exact_run else (settings.float_slack if float_slack is None else float_slack)
    ladder = CesaroLadder(k, r_max, exact=exact_run, exact_cap=n1 if r_max == 0 else exact_cap, track=[block],
                          history=0)
    lo = [None] * (r_max + 1)
    hi = [None] * (r_max + 1)
    gap_ok = [True] * (r_max + 1)
    previous = None
    for digit in stream[:n1]:
        ladder.push(digit)
        n = ladder.n
        if n < n0:
            continue
        values = ladder.levels(block)
        if previous is not None:
            bound = Fraction(1, n) if exact_run else 1 / n + slack
            for r in range(r_max + 1):
                if abs(values[r] - previous[r]) > bound:
                    gap_ok[r] = False
        previous = values
        if n == n0:
            continue
        for r, value in enumerate(values):
            if lo[r] is None or value < lo[r]:
                lo[r] = value
            if hi[r] is None or value > hi[r]:
                hi[r] = value
    return [AccumulationEstimate(block, r, n0, n1, lo[r], hi[r], gap_ok[r], exact_run) for r in range(r_max + 1)]


def accumulation_interval(stream, b, r, n0, n1, exact=None, exact_cap=None) -> AccumulationEstimate:
    """
    exact min and max of P^(r)(b, n) over n in (n0, n1], with the gap bound checked along the way
    """
    return _scan(as_word(stream), as_block(b), r, n0, n1, exact, exact_cap)[r]


def theoretical_range(b) -> Tuple[Fraction, Fraction]:
    return Fraction(0), Fraction(1, basic_period(b))


"""#####################################################################################################################
                                            BASIC FACTOR LIMITS
#####################################################################################################################"""


@dataclass
class BasicFactorReport:
    block: Block
    period: int
    r: int
    n_max: int
    violations: List[int] = field(default_factory=list)
    checkpoints: List[Tuple[int, Tuple[float, ...]]] = field(default_factory=list)
    tail_sup: List[Tuple[int, Tuple[float, ...]]] = field(default_factory=list)
    final: Tuple[float, ...] = ()
    exact: bool = True

    @property
    def bound_ok(self):
        return not self.violations


def basic_factor_limit_check(b, r, n_max, ratio=None, exact=None, exact_cap=None) -> BasicFactorReport:
    """
    P^(r)(b~^inf, b, n) -> 1/p: level 0 checked against |P - 1/p| <= (k + p)/n for every k <= n <= n_max by integer
    counting, all levels reported at geometric checkpoints together with sup_{m >= n} of the deviation
    """
    block = as_block(b)
    k = len(block)
    if n_max < k:
        raise OutOfRangeError("n_max = %d is shorter than the block" % n_max)
    factor = basic_factor(block)
    p = len(factor)
    stream = periodic_truncate(factor, n_max)
    target = Fraction(1, p)

    exact_run = True if r == 0 else use_exact(n_max, exact, exact_cap)
    tracker = FrequencyTracker(k)
    ladder = CesaroLadder(k, r, exact=exact_run, exact_cap=n_max if r == 0 else exact_cap, track=[block], history=0)
    report = BasicFactorReport(block, p, r, n_max, exact=exact_run)
    points = set(geometric_checkpoints(ratio, n_max, start=k))
    deviations = np.zeros((n_max + 1, r + 1))

    for digit in stream:
        tracker.push(digit)
        ladder.push(digit)
        n = ladder.n
        if n < k:
            continue
        if abs(tracker.counts[block] * p - n) > (k + p) * p:
            report.violations.append(n)
        deviations[n] = [float(abs(value - target)) for value in ladder.levels(block)]
        if n in points:
            report.checkpoints.append((n, tuple(deviations[n])))

    suffix = np.maximum.accumulate(deviations[::-1], axis=0)[::-1]
    report.tail_sup = [(n, tuple(suffix[n])) for n, _ in report.checkpoints]
    report.final = tuple(deviations[n_max])
    if report.violations:
        log.warning("counting bound fails for %s at %d indices", format_word(block), len(report.violations))
    return report


"""#####################################################################################################################
                                                REPORTS
#####################################################################################################################"""


@dataclass(frozen=True)
class OscillationRow:
    estimate: AccumulationEstimate
    period: int
    shortfall: Number

    @property
    def block(self):
        return self.estimate.block

    @property
    def r(self):
        return self.estimate.r


@dataclass
class OscillationReport:
    rows: List[OscillationRow]
    tolerance: float

    @property
    def desk_realizes(self):
        """
        every shortfall within tolerance
        """
        return all(row.shortfall <= self.tolerance for row in self.rows)

    def row(self, block, r):
        block = tuple(block)
        return next(row for row in self.rows if row.block == block and row.r == r)

    def write_csv(self, path):
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['block', 'r', 'n0', 'n1', 'lo_num', 'lo_den', 'hi_num', 'hi_den', 'per', 'shortfall'])
            for row in self.rows:
                e = row.estimate
                lo, hi = Fraction(e.lo), Fraction(e.hi)
                writer.writerow([format_word(e.block), e.r, e.n0, e.n1, lo.numerator, lo.denominator,
                                 hi.numerator, hi.denominator, row.period, repr(float(row.shortfall))])


def oscillation_report(stream, blocks, r_max, tolerance=None, n0=None, exact=None, exact_cap=None,
                       tail_fraction=None, float_slack=None):
    """
    per block and level: the tail interval [lo, hi], the range [0, 1/p] and the shortfall max(lo, 1/p - hi)

    n0 defaults to the first tail_fraction of the stream (the last three quarters under the shipped 0.25)
    """
    stream = as_word(stream)
    tolerance = settings.shortfall_tolerance if tolerance is None else tolerance
    tail_fraction = settings.tail_fraction if tail_fraction is None else tail_fraction
    rows = []
    for b in blocks:
        block = as_block(b)
        start = max(len(block), int(len(stream) * tail_fraction)) if n0 is None else max(n0, len(block))
        p = basic_period(block)
        for estimate in _scan(stream, block, r_max, start, len(stream), exact, exact_cap, float_slack):
            shortfall = max(estimate.lo, Fraction(1, p) - estimate.hi)
            rows.append(OscillationRow(estimate, p, shortfall))
            log.info("%s r=%d: [%s, %s] vs [0, 1/%d], shortfall %.4g", format_word(block), estimate.r,
                     float(estimate.lo), float(estimate.hi), p, float(shortfall))
    return OscillationReport(rows, tolerance)
