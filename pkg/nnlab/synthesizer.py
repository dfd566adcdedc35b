"""
desk-scale witnesses of property P

a stage asks that the k-block frequency vectors stay within eps = 1/h of q on a whole window (j, phi_m(2^j)) with
j >= i and j / 2^j < eps; synthesize emits a stream that realizes a schedule of stages one after the other,
verify_property_p searches any stream for such windows, and cesaro_lift_check tests the passage from level r to r+1
"""

import json
import logging
from fractions import Fraction
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

from nnlab.cesaro import CesaroLadder, distance_series, use_exact
from nnlab.config import settings
from nnlab.errors import InconclusiveError, PreconditionError, StageSkipped, TowerOverflow, UsageError
from nnlab.simplex import SimplexVector
from nnlab.wordfactory import ZnSpec, construct_zn_word, padding_length
from nnlab.words import FrequencyTracker, Word, as_word

log = logging.getLogger(__name__)

Number = Union[Fraction, float]


"""#####################################################################################################################
                                                TOWERS
#####################################################################################################################"""


def tower(m, x, bit_cap=None):
    """
    phi_1(x) = 2^x, phi_m(x) = phi_1(phi_{m-1}(x)); TowerOverflow names the depth where the result would pass bit_cap
    """
    bit_cap = settings.tower_bit_cap if bit_cap is None else bit_cap
    if m < 1:
        raise PreconditionError("tower depth must be at least 1, got %d" % m)
    value = x
    for depth in range(1, m + 1):
        if value + 1 > bit_cap:
            raise TowerOverflow(depth, bit_cap)
        value = 1 << value
    return value


def capped_tower(m, x, limit):
    """
    phi_m(x) if it is <= limit, else None; never builds numbers much wider than limit
    """
    value = x
    width = limit.bit_length()
    for _ in range(m):
        if value >= width:
            return None
        value = 1 << value
    return value if value <= limit else None


def admissible(j, h):
    """
    j / 2^j < 1/h, compared in integers
    """
    return j >= 1 and j * h < 2 ** j


def first_admissible(h):
    j = 1
    while not admissible(j, h):
        j += 1
    return j


"""#####################################################################################################################
                                            STAGES + SCHEDULES
#####################################################################################################################"""


@dataclass(frozen=True)
class Stage:
    q: SimplexVector
    h: int
    m: int = 1
    i: int = 1
    window: Optional[int] = None

    def __post_init__(self):
        if self.h < 1:
            raise PreconditionError("h must be positive (eps = 1/h), got %d" % self.h)
        if self.m < 1:
            raise PreconditionError("tower depth m must be positive, got %d" % self.m)
        if self.i < 0:
            raise PreconditionError("minimum index i must be nonnegative, got %d" % self.i)
        if self.window is not None and self.window < 1:
            raise PreconditionError("window must be positive, got %d" % self.window)

    @property
    def k(self):
        return self.q.k

    @property
    def epsilon(self):
        return Fraction(1, self.h)

    def window_end(self, j, limit, window=None):
        """
        (W, truncated) with W = min(phi_m(2^j), j + window, limit)
        """
        window = self.window if window is None else window
        true_end = capped_tower(self.m, 1 << j, limit) if j < 64 else None
        end = limit if true_end is None else min(true_end, limit)
        if window:
            end = min(end, j + window)
        return end, true_end is None or end < true_end

    def to_json(self):
        data = {"q": self.q.to_json(), "m": self.m, "i": self.i, "h": self.h, "k": self.k}
        if self.window is not None:
            data["window"] = self.window
        return data

    @classmethod
    def from_json(cls, data):
        q = SimplexVector.from_json(data["q"])
        if "k" in data and int(data["k"]) != q.k:
            raise UsageError("stage k = %s does not match its vector (k = %d)" % (data["k"], q.k))
        window = data.get("window")
        return cls(q, int(data["h"]), int(data.get("m", 1)), int(data.get("i", 1)),
                   None if window is None else int(window))


@dataclass(frozen=True)
class Schedule:
    stages: Sequence[Stage] = ()
    max_length: int = field(default_factory=lambda: settings.max_length)

    def to_json(self):
        return {"max_length": self.max_length, "stages": [stage.to_json() for stage in self.stages]}

    @classmethod
    def from_json(cls, data, max_length=None):
        """
        max_length fills in for schedules that do not carry their own
        """
        max_length = settings.max_length if max_length is None else max_length
        try:
            stages = tuple(Stage.from_json(stage) for stage in data.get("stages", []))
            max_length = int(data.get("max_length", max_length))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError("malformed schedule: %s" % exc) from exc
        return cls(stages, max_length)


def load_schedule(path, max_length=None):
    with open(path) as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError("%s: bad json at line %d, column %d: %s" % (path, exc.lineno, exc.colno, exc.msg))
    return Schedule.from_json(data, max_length)


def resolve_window(stage, stage_window=None):
    """
    the stage's own window, else the run-wide stage_window (0 or None means uncapped)
    """
    if stage.window is not None:
        return stage.window
    stage_window = settings.stage_window if stage_window is None else stage_window
    return stage_window or None


def interleave_by_k(stages):
    """
    round robin over block lengths: first stage of each k (ascending), then the second, ...
    """
    by_k = {}
    for stage in stages:
        by_k.setdefault(stage.k, deque()).append(stage)
    ordered = []
    while any(by_k.values()):
        for k in sorted(by_k):
            if by_k[k]:
                ordered.append(by_k[k].popleft())
    return ordered


"""#####################################################################################################################
                                                WITNESSES
#####################################################################################################################"""


def _number_json(value):
    if isinstance(value, Fraction):
        return "%d/%d" % (value.numerator, value.denominator)
    return None if value is None else float(value)


@dataclass(frozen=True)
class Witness:
    index: int
    k: int
    j: int
    end: int
    sup: Number
    epsilon: Fraction
    truncated: bool = True
    r: int = 0
    exact: bool = True
    L: Optional[int] = None

    @property
    def window(self):
        return self.j, self.end

    def to_json(self):
        return {"stage": self.index, "k": self.k, "j": self.j, "window": [self.j, self.end],
                "sup": _number_json(self.sup), "epsilon": _number_json(self.epsilon), "truncated": self.truncated,
                "r": self.r, "exact": self.exact, "L": self.L}


@dataclass(frozen=True)
class StageFailure:
    index: int
    best_sup: Optional[Number]
    best_j: Optional[int]
    reason: str

    def to_json(self):
        return {"stage": self.index, "best_sup": _number_json(self.best_sup), "best_j": self.best_j,
                "reason": self.reason}


@dataclass
class SynthesisResult:
    stream: Word
    witnesses: List[Witness] = field(default_factory=list)
    skipped: List[StageSkipped] = field(default_factory=list)

    def report_json(self):
        return {"length": len(self.stream), "witnesses": [w.to_json() for w in self.witnesses],
                "skipped": [{"stage": s.index, "j": s.j, "end": s.end, "reason": str(s)} for s in self.skipped]}


@dataclass
class PropertyReport:
    r: int
    results: List[Union[Witness, StageFailure]] = field(default_factory=list)

    @property
    def witnesses(self):
        return [result for result in self.results if isinstance(result, Witness)]

    @property
    def failures(self):
        return [result for result in self.results if isinstance(result, StageFailure)]

    @property
    def ok(self):
        return not self.failures

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"r": self.r, "ok": self.ok, "results": [result.to_json() for result in self.results]}


"""#####################################################################################################################
                                                SYNTHESIS
#####################################################################################################################"""


def synthesize(schedule: Schedule, stage_window=None) -> SynthesisResult:
    """
    realize the stages in order on one stream

    each stage emits gamma* (gamma in Z_6h) and takes the smallest admissible j >= max(i, t + 1) whose window passes
    the exact check; past the padding bound L every n passes, so the search ends by max(L, i, t + 1, j_eps)
    """
    limit = schedule.max_length
    stream: List[int] = []
    trackers = {}
    result = SynthesisResult(())

    for index, stage in enumerate(schedule.stages):
        q, k, eps = stage.q, stage.k, stage.epsilon
        window = resolve_window(stage, stage_window)
        t = len(stream)
        n_zn = 6 * stage.h
        gamma = construct_zn_word(ZnSpec.for_vector(q, n_zn))
        # L is recorded, not imposed on j; past L every n passes, so j settles by max(L, i, t + 1, j_eps)
        L = padding_length(t, len(gamma), k, n_zn, max(stream, default=1), q.N)

        if k not in trackers:
            trackers[k] = FrequencyTracker(k)
            trackers[k].extend(stream)
        tracker = trackers[k]
        tracker.set_target(q.entries)

        j = max(stage.i, t + 1, first_admissible(stage.h))
        end, truncated = stage.window_end(j, limit, window)
        sup = None
        position = 0
        while len(stream) < end:
            digit = gamma[position % len(gamma)]
            position += 1
            stream.append(digit)
            for each in trackers.values():
                each.push(digit)
            n = len(stream)
            if n <= j or n >= end:
                continue
            distance = tracker.distance()
            if distance > eps:
                j = n
                end, truncated = stage.window_end(j, limit, window)
                sup = None
                continue
            if sup is None or distance > sup:
                sup = distance

        if sup is None:
            skip = StageSkipped(index, j, end, "window (j, W) holds no index")
            log.warning("%s", skip)
            result.skipped.append(skip)
            continue
        witness = Witness(index, k, j, end, sup, eps, truncated, 0, True, L)
        log.info("stage %d (k=%d, eps=%s): j=%d, window ends at %d, sup %s, L=%d",
                 index, k, eps, j, end, float(sup), L)
        if truncated:
            log.debug("stage %d window truncated at %d", index, end)
        result.witnesses.append(witness)

    result.stream = tuple(stream)
    return result


"""#####################################################################################################################
                                                VERIFICATION
#####################################################################################################################"""


def _series(stream, q, r, exact, exact_cap):
    exact_run = True if r == 0 else use_exact(len(stream), exact, exact_cap)
    values = [d for _, d in distance_series(stream, q, r, exact=exact_run, exact_cap=exact_cap)]
    return values, exact_run


def _tolerance(eps, exact_run, float_slack):
    float_slack = settings.float_slack if float_slack is None else float_slack
    return eps if exact_run else float(eps) + float_slack


def verify_property_p(stream, stages, r=0, exact=None, exact_cap=None, float_slack=None,
                      stage_window=None) -> PropertyReport:
    """
    for each stage, the smallest j >= i with j / 2^j < eps whose window (j, min(phi_m(2^j), j + window, len)) keeps
    the level-r vectors within eps; failures carry the best achievable sup

    windowless stages fall back to stage_window the same way synthesize resolves them
    """
    stream = as_word(stream)
    report = PropertyReport(r)
    length = len(stream)
    for index, stage in enumerate(stages):
        series, exact_run = _series(stream, stage.q, r, exact, exact_cap)
        tol = _tolerance(stage.epsilon, exact_run, float_slack)
        bad = [0]
        for value in series:
            bad.append(bad[-1] + (value > tol))

        window = resolve_window(stage, stage_window)
        found = None
        j_min = max(stage.i, first_admissible(stage.h))
        for j in range(j_min, length - 1):
            end, truncated = stage.window_end(j, length, window)
            if end < j + 2:
                continue
            if bad[end - 1] == bad[j]:
                found = j, end, truncated
                break

        if found is not None:
            j, end, truncated = found
            sup = max(series[j:end - 1])
            report.results.append(Witness(index, stage.k, j, end, sup, stage.epsilon, truncated, r, exact_run))
            log.info("stage %d witnessed at level %d: j=%d, W=%d, sup %s", index, r, j, end, float(sup))
            continue

        best_sup, best_j = _best_window(series, stage, j_min, length, window)
        reason = "no admissible window inside %d digits" % length
        log.warning("stage %d not witnessed at level %d (best sup %s)", index, r, best_sup)
        report.results.append(StageFailure(index, best_sup, best_j, reason))
    return report


def _best_window(series, stage, j_min, length, window=None):
    """
    min over admissible j of max d(n), n in (j, W_j); window ends never decrease, so one sliding maximum does it
    """
    best, best_j = None, None
    dq = deque()
    following = j_min + 1
    for j in range(j_min, length - 1):
        end, _ = stage.window_end(j, length, window)
        if end < j + 2:
            continue
        while following <= end - 1:
            while dq and series[dq[-1] - 1] <= series[following - 1]:
                dq.pop()
            dq.append(following)
            following += 1
        while dq and dq[0] <= j:
            dq.popleft()
        if dq:
            value = series[dq[0] - 1]
            if best is None or value < best:
                best, best_j = value, j
    return best, best_j


@dataclass(frozen=True)
class LiftReport:
    """
    level r+1 verdict on (2^j', W) plus the pieces of the averaging argument: the head 2 j' / 2^j' carried by the
    first j' terms, the level-r sup on (j', W) bounding the body, and whether the level-r precondition held
    """
    ok: bool
    j_prime: int
    window: tuple
    sup: Number
    level_r_sup: Number
    head: Fraction
    precondition: bool
    truncated: bool
    exact: bool

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "j_prime": self.j_prime, "window": list(self.window), "sup": _number_json(self.sup),
                "level_r_sup": _number_json(self.level_r_sup), "head": _number_json(self.head),
                "precondition": self.precondition, "truncated": self.truncated, "exact": self.exact}


def cesaro_lift_check(stream, stage: Stage, j_prime, r=0, exact=None, exact_cap=None, float_slack=None) -> LiftReport:
    """
    recompute ||P_k^(r+1)(n) - q||_1 on 2^j' < n < min(phi_m(2^j'), len) and compare with eps

    the level-r window (j', W) at eps / 3 and j' / 2^j' < eps / 3 are reported as the precondition, not required
    """
    stream = as_word(stream)
    length = len(stream)
    start = 1 << j_prime
    end, truncated = stage.window_end(j_prime, length, window=0)
    if length < start + 2 or end < start + 2:
        raise InconclusiveError("stream of %d digits does not reach into the window (%d, %d)" % (length, start, end))

    exact_run = use_exact(length, exact, exact_cap)
    ladder = CesaroLadder(stage.k, r + 1, exact=exact_run, exact_cap=exact_cap, track=stage.q.entries.keys(),
                          history=0)
    eps = stage.epsilon
    sup = level_r_sup = None
    for digit in stream[:end - 1]:
        ladder.push(digit)
        n = ladder.n
        if n > j_prime:
            low = ladder.distance(stage.q, r)
            level_r_sup = low if level_r_sup is None else max(level_r_sup, low)
        if n > start:
            high = ladder.distance(stage.q, r + 1)
            sup = high if sup is None else max(sup, high)

    tol = _tolerance(eps, exact_run, float_slack)
    third = _tolerance(eps / 3, exact_run, float_slack)
    precondition = level_r_sup <= third and admissible(j_prime, 3 * stage.h)
    if not precondition:
        log.info("lift precondition fails at j'=%d: level-%d sup %s vs eps/3 = %s", j_prime, r, level_r_sup, eps / 3)
    report = LiftReport(sup <= tol, j_prime, (start, end), sup, level_r_sup, Fraction(2 * j_prime, start),
                        precondition, truncated, exact_run)
    log.info("lift check j'=%d window (%d, %d): sup %s, ok=%s", j_prime, start, end, float(sup), report.ok)
    return report


def accumulation_witnesses(stream, targets, r=0, exact=None, exact_cap=None):
    """
    for each target q: the smallest level-r distance reached on the stream and where
    """
    stream = as_word(stream)
    found = []
    for q in targets:
        series, _ = _series(stream, q, r, exact, exact_cap)
        n = min(range(len(series)), key=series.__getitem__) + 1 if series else None
        found.append((q, series[n - 1] if series else None, n))
    return found
