class ValidationError(ValueError):
    """Raised when inputs violate a documented contract (bad config, bad
    dimensions, out-of-range parameters)."""
