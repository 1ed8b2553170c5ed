"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientDataError(ValueError):
    """Too few usable levels or samples for an estimate."""


class BudgetError(ValueError):
    """A per-level coefficient budget is violated."""

    def __init__(self, level, total, limit):
        self.level = level
        self.total = total
        self.limit = limit
        super().__init__(
            f"budget violated at level {level}: {total:.6g} > {limit:.6g}"
        )


class StageError(RuntimeError):
    """A construction stage failed validation."""

    def __init__(self, stage, k, detail):
        self.stage = stage
        self.k = k
        super().__init__(f"stage '{stage}' failed at k={k}: {detail}")


class FormatError(ValueError):
    """A file does not conform to the expected on-disk format."""
