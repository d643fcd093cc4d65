"""Exception hierarchy shared by the library and the CLI."""


class ClusterPosteriorError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ClusterPosteriorError, ValueError):
    """Two subset tables were combined over different ground sets."""


class DomainError(ClusterPosteriorError, ValueError):
    """An argument lies outside the domain of a function."""


class PrecisionError(ClusterPosteriorError):
    """The fixed-point scale is too coarse for the dynamic range of a table."""

    def __init__(self, required_bits: int, scale_bits: int):
        self.required_bits = required_bits
        self.scale_bits = scale_bits
        super().__init__(
            f"scale_bits={scale_bits} cannot represent the table's dynamic range; "
            f"at least {required_bits} bits are required"
        )


class EvidenceZeroError(ClusterPosteriorError):
    """Every partition has zero weight, so the posterior is undefined."""


class DataError(ClusterPosteriorError):
    """Malformed or inconsistent input data."""


class EnumerationLimitError(ClusterPosteriorError):
    """Brute-force enumeration was requested beyond its supported size."""
