"""Exception types shared across weylkit."""


class InputError(ValueError):
    """Invalid argument, role/dimension mismatch or malformed config."""


class CapacityError(InputError):
    """A finite computation would exceed its configured size cap."""
