"""
exceptions raised across nnlab

every error knows which module raised it (``where``) so the command line can
print module-qualified messages
"""


class NNLabError(Exception):
    where = "nnlab"

    def qualified(self):
        return "%s: %s" % (self.where, self)


class ConfigError(NNLabError, ValueError):
    where = "config"


class UsageError(NNLabError, ValueError):
    where = "cli"


"""#####################################################################################################################
                                                WORDS
#####################################################################################################################"""


class WordError(NNLabError, ValueError):
    where = "words"


class InvalidDigitError(WordError):
    pass


class OutOfRangeError(WordError):
    pass


class InvalidOrderError(WordError):
    pass


"""#####################################################################################################################
                                                SIMPLEX
#####################################################################################################################"""


class SimplexError(NNLabError, ValueError):
    where = "simplex"


class NotProbabilityError(SimplexError):
    pass


class NotShiftInvariantError(SimplexError):

    def __init__(self, block, left, right):
        self.block = tuple(block)
        self.left = left
        self.right = right
        super().__init__("marginals differ at %s: left %s, right %s" % (list(self.block), left, right))


class InvalidComparisonError(SimplexError):
    pass


class NotStochasticError(SimplexError):
    pass


class ReducibleChainError(SimplexError):
    pass


"""#####################################################################################################################
                                                CESARO
#####################################################################################################################"""


class CesaroError(NNLabError):
    where = "cesaro"


class LevelError(CesaroError, ValueError):
    pass


class ExactCapExceeded(CesaroError):

    def __init__(self, cap):
        self.cap = cap
        super().__init__("exact ladder refuses to go past n = %d (raise exact_cap or use float mode)" % cap)


class MissingHistoryError(CesaroError, LookupError):
    pass


"""#####################################################################################################################
                                        WORD FACTORY + SYNTHESIZER
#####################################################################################################################"""


class ConstructionError(NNLabError):
    where = "wordfactory"

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message if residual is None else "%s (residual %s)" % (message, residual))


class PreconditionError(NNLabError, ValueError):
    where = "wordfactory"

    def __init__(self, message, required=None):
        self.required = required
        super().__init__(message)


class TowerOverflow(NNLabError, OverflowError):
    where = "synthesizer"

    def __init__(self, depth, bit_cap):
        self.depth = depth
        self.bit_cap = bit_cap
        super().__init__("tower exceeds %d bits at depth %d" % (bit_cap, depth))


class StageSkipped(NNLabError):
    where = "synthesizer"

    def __init__(self, index, j, end, reason):
        self.index = index
        self.j = j
        self.end = end
        super().__init__("stage %d skipped: %s (j=%s, W=%s)" % (index, reason, j, end))


class InconclusiveError(NNLabError):
    where = "synthesizer"


"""#####################################################################################################################
                                                EXPANSIONS
#####################################################################################################################"""


class ExpansionError(NNLabError):
    where = "expansions"


class NotInUInfinityError(ExpansionError, ValueError):

    def __init__(self, step, point=None):
        self.step = step
        self.point = point
        where = "" if point is None else " at %s" % point
        super().__init__("orbit hits a partition endpoint at step %d%s" % (step, where))


class PrecisionError(ExpansionError):

    def __init__(self, index, bits):
        self.index = index
        self.bits = bits
        super().__init__("precision exhausted at digit %d (%d bits)" % (index, bits))


class ValueParseError(ExpansionError, ValueError):
    pass
