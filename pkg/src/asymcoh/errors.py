"""Exception hierarchy.

Every validation failure names the violated invariant and, where it makes
sense, the measured deviation so callers (and the CLI) can report it.
"""


class AsymcohError(ValueError):
    """Base class for all validation errors raised by the package."""

    invariant = "Invalid"

    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation

    def as_dict(self):
        out = {"error": self.invariant, "message": str(self)}
        if self.deviation is not None:
            out["deviation"] = float(self.deviation)
        return out


class NotSquare(AsymcohError):
    invariant = "NotSquare"


class NotHermitian(AsymcohError):
    invariant = "NotHermitian"


class NotPositive(AsymcohError):
    invariant = "NotPositive"


class TraceNotOne(AsymcohError):
    invariant = "TraceNotOne"


class NonFinite(AsymcohError):
    invariant = "NonFinite"


class DimensionMismatch(AsymcohError):
    invariant = "DimensionMismatch"


class NotOrthonormal(AsymcohError):
    invariant = "NotOrthonormal"


class InvalidRank(AsymcohError):
    invariant = "InvalidRank"


class PostselectionTooRare(AsymcohError):
    invariant = "PostselectionTooRare"


class ProbabilityTooSmall(AsymcohError):
    invariant = "ProbabilityTooSmall"


class ZeroGenerator(AsymcohError):
    invariant = "ZeroGenerator"


class ZeroInformation(AsymcohError):
    invariant = "ZeroInformation"


class TrivialSpectrum(AsymcohError):
    invariant = "TrivialSpectrum"


class NotLocalGenerator(AsymcohError):
    invariant = "NotLocalGenerator"


class InvalidPermutation(AsymcohError):
    invariant = "InvalidPermutation"


class InvalidChannel(AsymcohError):
    invariant = "InvalidChannel"


class DegenerateGeneratorWarning(UserWarning):
    """Issued when a closed form needing a nondegenerate generator falls back to 0."""
