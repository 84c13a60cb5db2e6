"""
Error types raised by the library.

Every error is a ``ValueError`` carrying a stable ``code`` string, so callers can
either catch the specific subclass or match on the code.
"""


class SparqError(ValueError):
    code = "sparq-error"

    def __init__(self, message: str):
        super().__init__(f"{self.code}: {message}")
        self.message = message


class NonFiniteInputError(SparqError):
    code = "non-finite-input"


class InvalidParameterError(SparqError):
    code = "invalid-parameter"


class EmptyLogitsError(SparqError):
    code = "empty-logits"


class BadTemperatureError(SparqError):
    code = "bad-temperature"


class IndexOutOfRangeError(SparqError):
    code = "index-out-of-range"


class ShapeMismatchError(SparqError):
    code = "shape-mismatch"


class EmptyCacheError(SparqError):
    code = "empty-cache"


class MissingParameterError(SparqError):
    code = "missing-parameter"


class DegenerateDistributionError(SparqError):
    code = "degenerate-distribution"


class TraceShapeError(SparqError):
    code = "trace-shape-error"


class TraceParseError(SparqError):
    code = "trace-parse-error"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class LedgerDivergenceError(SparqError):
    code = "ledger-analytic-divergence"

    def __init__(self, message: str, diff: dict[str, int]):
        details = ", ".join(f"{name}: {delta:+d}" for name, delta in sorted(diff.items()))
        super().__init__(f"{message} [{details}]" if details else message)
        self.diff = diff
