"""Exception types shared across the package."""


class NegsepError(Exception):
    """Base class for all package-specific errors."""


# -- distribution layer ------------------------------------------------------

class SubsetError(NegsepError):
    """A projection target is not a subset of the distribution domain."""


class DomainOverlap(NegsepError):
    """Two memories or distributions overlap where disjointness is required."""


class DomainMismatch(NegsepError):
    """Two distributions were expected to share the same domain."""


class ZeroMassEvent(NegsepError):
    """Conditioning on an event of mass zero."""


class InvalidDistribution(NegsepError):
    """Masses do not sum to one, are negative, or live on the wrong domain."""


# -- negative-dependence layer -----------------------------------------------

class PosetTooLarge(NegsepError):
    """A memory poset exceeds the configured enumeration bound."""


class NotDisjoint(NegsepError):
    """Variable sets must be disjoint."""


class NotInDomain(NegsepError):
    """Variable set escapes the distribution domain."""


class CarrierNotInDomain(NegsepError):
    """A partition's carrier escapes the distribution domain."""


class BlockMismatch(NegsepError):
    """A per-block map family does not line up with the partition."""


class OutputClash(NegsepError):
    """Blockwise map outputs collide on a variable."""


# -- language layer ------------------------------------------------------------

class ParseError(NegsepError):
    """Syntax error with source position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class TypingError(NegsepError):
    """Ill-typed expression or command."""


class StaticRestrictionViolation(NegsepError):
    """Deterministic variables would receive randomized values."""


class UnboundVariable(NegsepError):
    """Expression mentions a variable missing from the configuration."""


class IndexOutOfRange(NegsepError):
    """Array index outside the declared shape."""


class FuelExhausted(NegsepError):
    """A while loop did not settle within the iteration budget."""


# -- assertion layer -----------------------------------------------------------

class WandNotSupported(NegsepError):
    """The model checker only handles the wand-free fragment."""


class ImplicationScopeLimited(NegsepError):
    """An implication verdict could depend on states outside the checkable scope."""


# -- proof layer ---------------------------------------------------------------

class DerivationError(NegsepError):
    """A derivation node failed to check; carries a node path."""

    def __init__(self, path, reason):
        self.path = path
        self.reason = reason
        super().__init__(f"at {path}: {reason}")


class RuleMismatch(DerivationError):
    """Conclusion is not of the form produced by the rule from its premises."""


class SideConditionFailed(DerivationError):
    """A rule's side condition does not hold."""


class EntailmentUnresolved(DerivationError):
    """An entailment premise could not be discharged."""


class CCCMUnknown(DerivationError):
    """A closure side condition (CC/CM) could not be classified."""


class BetaOutOfRange(NegsepError):
    """Failure probability must lie in (0, 1]."""


class FrameTooLarge(NegsepError):
    """Finite-frame validation bound exceeded."""
