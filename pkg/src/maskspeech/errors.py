"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented contract (bad format, bad shape,
    inconsistent configuration). The CLI maps this to exit code 2,
    while genuine I/O failures (OSError) map to exit code 1."""
