class KeygraphError(ValueError):
    pass


class InvalidParameterError(KeygraphError):
    pass


class InconsistentDeviationError(KeygraphError):
    pass


class InfeasibleTargetError(KeygraphError):
    def __init__(self, n, message):
        super().__init__(f"n={n}: {message}")
        self.n = n


class EnumerationTooLargeError(KeygraphError):
    def __init__(self, terms, limit):
        super().__init__(
            f"Exhaustive enumeration needs {terms} terms (limit: {limit})"
        )
        self.terms = terms
        self.limit = limit


class OracleMismatchError(KeygraphError):
    def __init__(self, quantity, expected, actual):
        super().__init__(
            f"{quantity} mismatch: formula {actual!r}, enumeration {expected!r}"
        )
        self.quantity = quantity
        self.expected = expected
        self.actual = actual
