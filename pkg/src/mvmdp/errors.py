"""Exception hierarchy shared by all solver modules."""


class MvmdpError(Exception):
    """Base class for every error raised by this package."""


class InvalidModel(MvmdpError, ValueError):
    """Model data violates a structural invariant (shapes, probabilities, beta)."""


class SingularSystem(MvmdpError):
    """A stationary or Poisson linear solve failed, usually a multichain policy."""


class NotUnichain(SingularSystem):
    """The chain induced by a policy has more than one closed recurrent class."""


class CycleDetected(MvmdpError):
    """Policy iteration revisited a policy without improving."""


class IdentityViolation(MvmdpError):
    """Pseudo objective disagrees with the re-evaluated real objective."""


class EmptyDomain(MvmdpError):
    """An operation required a nonempty interval set."""


class MaxIterationsExceeded(MvmdpError):
    """A safety bound on auxiliary solves was hit."""


class PolicySpaceTooLarge(MvmdpError):
    """Exhaustive enumeration was requested over too many policies."""


class InconsistentCertificate(MvmdpError):
    """Test coefficients admit no pseudo mean at which the policy is optimal."""


class SegmentLimitExceeded(MvmdpError):
    """Curve decomposition produced more segments than there are policies."""
