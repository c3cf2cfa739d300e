"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class DomainError(ValueError):
    """An input lies outside the domain where an operation is defined."""


class CapExceededError(ValueError):
    """A dense or exhaustive computation would exceed its configured size cap."""


class CircuitClassError(ValueError):
    """A circuit violates the assumptions required by the variance bounds."""

    def __init__(self, report):
        super().__init__(f"circuit is outside the supported class: {report}")
        self.report = report
