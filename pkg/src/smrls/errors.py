"""Exception types shared across the package."""


class DowndateSingular(ArithmeticError):
    """Removing a sample would make the information matrix lose positive definiteness.

    Raised when ``1 - v^T P v`` falls below the positivity guard. ``step`` is the
    zero-based index within the stream being processed, when known.
    """

    def __init__(self, margin, guard, step=None):
        self.margin = margin
        self.guard = guard
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(
            f"covariance downdate{where} has margin {margin:.3e} below guard {guard:.1e}"
        )
