"""Exception types shared across the library."""


class CorrlabError(Exception):
    """Base class for library-specific failures."""


class IdentityMap(CorrlabError):
    """An operation that needs a non-identity Moebius map received one."""


class DegenerateMap(CorrlabError):
    """2x2 matrix with numerically vanishing determinant."""


class DegenerateAxis(CorrlabError):
    """The two endpoints of a rotation axis coincide."""


class DegenerateAxes(CorrlabError):
    """Fixed-point configuration is not in general position."""


class DegenerateConfiguration(CorrlabError):
    """Cross-ratio arguments are not pairwise distinct."""


class DegenerateParams(CorrlabError):
    """Family or representation parameters outside the allowed set."""


class ZeroInput(CorrlabError):
    """Zero passed where a nonzero value is required."""


class NoConvergence(CorrlabError):
    """The root finder exhausted its iteration budget.

    Carries the partial roots and a per-root convergence flag so callers
    can still inspect what was found.
    """

    def __init__(self, message, roots=None, converged=None):
        super().__init__(message)
        self.roots = list(roots) if roots is not None else []
        self.converged = list(converged) if converged is not None else []


class BranchAmbiguity(CorrlabError):
    """Two inverse-branch candidates were too close to tell apart."""


class ConfigError(CorrlabError):
    """Malformed render job or CLI configuration."""
