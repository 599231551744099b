"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad inputs, gapless
models; CLI exit code 2) and ``NumericalAmbiguity`` (the sampling or
truncation is too coarse to decide an integer; CLI exit code 3).
"""


class SflabError(Exception):
    """Base class for all library errors."""

    code = "error"


class ValidationError(SflabError, ValueError):
    code = "invalid"


class NumericalAmbiguity(SflabError):
    code = "ambiguous"


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class HermiticityViolation(ValidationError):
    code = "hermiticity_violation"


class EmptyModel(ValidationError):
    code = "empty_model"


class InvalidFilter(ValidationError):
    code = "invalid_filter"


class TooFewSites(ValidationError):
    code = "too_few_sites"


class BadWeight(ValidationError):
    code = "bad_weight"


class GaplessModel(ValidationError):
    """The Hamiltonian has no spectral gap at the requested level."""

    code = "gapless"


class SymbolNotInvertible(GaplessModel):
    code = "gapless"


class SingularSymbol(ValidationError):
    code = "singular_symbol"


class RankJump(GaplessModel):
    code = "gapless"


class RefinementNeeded(NumericalAmbiguity):
    code = "refinement_needed"


class SingularLink(NumericalAmbiguity):
    code = "singular_link"


class IndeterminateLocalization(NumericalAmbiguity):
    code = "indeterminate_localization"


class AmbiguousCluster(NumericalAmbiguity):
    code = "ambiguous_cluster"


class AmbiguousSide(NumericalAmbiguity):
    code = "ambiguous_side"
