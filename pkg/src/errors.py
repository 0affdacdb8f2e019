class ValidationFailure(Exception):
    """Input, parameter or configuration that cannot be accepted."""


class NumericalFailure(Exception):
    """A computation that is undefined for the data it was given."""


class EmptySampleError(ValidationFailure):
    def __init__(self, n: int, minimum: int = 2):
        super().__init__(f"Sample has {n} observations, at least {minimum} required")


class InvalidIntervalError(ValidationFailure):
    def __init__(self, lower: float, upper: float):
        super().__init__(f"Interval lower bound {lower} exceeds upper bound {upper}")


class NonFiniteError(ValidationFailure):
    def __init__(self, what: str, value: float):
        super().__init__(f"{what} must be finite, got {value}")


class ModeOutOfRangeError(ValidationFailure):
    def __init__(self, mode: float, lower: float, upper: float):
        super().__init__(f"Mode {mode} lies outside the interval [{lower}, {upper}]")


class InvalidParameterError(ValidationFailure):
    def __init__(self, name: str, reason: str):
        super().__init__(f"Invalid parameter {name}: {reason}")


class RaggedSampleError(ValidationFailure):
    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"Observation {row} has {got} intervals, expected {expected}")


class OutOfSupportError(NumericalFailure):
    def __init__(self, index: int, detail: str):
        super().__init__(f"Observation {index} lies outside the Wishart support: {detail}")


class DegenerateThetaError(NumericalFailure):
    def __init__(self, detail: str):
        super().__init__(
            f"Degenerate internal variation ({detail}); the likelihood needs intervals of "
            "positive width, classical (point) data only supports the moment estimators"
        )


class NotSymmetricError(NumericalFailure):
    def __init__(self, asymmetry: float):
        super().__init__(f"Matrix is not symmetric (max |S - S^T| = {asymmetry:.3e})")


class NoConvergenceError(NumericalFailure):
    def __init__(self, sweeps: int, off_diagonal: float):
        super().__init__(f"Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:.3e})")


class TooManyVerticesError(NumericalFailure):
    def __init__(self, p: int, limit: int):
        super().__init__(f"Vertex enumeration over 2^{p} corners refused, limit is p <= {limit}")


class DatasetParseError(ValidationFailure):
    def __init__(self, row: int, column: str, detail: str):
        super().__init__(f"Row {row}, column {column}: {detail}")


class ConfigError(ValidationFailure):
    def __init__(self, source: str, detail: str):
        super().__init__(f"Invalid study configuration {source}: {detail}")


class TypeNotSupportedError(ValidationFailure):
    def __init__(self, name: str):
        super().__init__(f"Unsupported file type '{name}'")


class ParseError(ValidationFailure):
    def __init__(self, typename: str):
        super().__init__(f"Cannot parse {typename} data")
