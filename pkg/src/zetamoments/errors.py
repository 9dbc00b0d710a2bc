"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class InsufficientPrecision(ArithmeticError):
    """A requested accuracy cannot be reached with the given budget."""


class ResourceLimit(MemoryError):
    """A computation would exceed its configured size budget."""


class UseEulerMaclaurin(InvalidArgument):
    """Riemann-Siegel was asked for an ordinate below its validity floor."""
