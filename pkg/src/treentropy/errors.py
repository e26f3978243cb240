"""Exception hierarchy shared by all modules."""


class TreentropyError(Exception):
    """Base class for every error raised by this package."""


class ParseError(TreentropyError, ValueError):
    """Malformed term, grammar, or XML input."""


class AddressError(TreentropyError, KeyError):
    """A node address does not belong to the tree or context."""


class BudgetExceeded(TreentropyError):
    """An enumeration or expansion would exceed its configured size cap."""


class AbsoluteContinuityError(TreentropyError, ValueError):
    """KL divergence requested where q vanishes on the support of p."""


class NotNormalForm(TreentropyError, ValueError):
    """A grammar violates the TSLP normal-form conditions."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class MalformedCode(TreentropyError, ValueError):
    """A bit string or container is not a valid grammar encoding."""


class MultiplicityMismatch(TreentropyError, ValueError):
    """A word does not have the symbol counts it is ranked against."""


class ShapeError(TreentropyError, ValueError):
    """A binary tree is not the first-child/next-sibling image of a forest."""
