"""Exception types shared across the laboratory modules."""


class MorselabError(Exception):
    """Base class for all morselab errors."""


class NonPositiveMetric(MorselabError):
    """A reference metric failed its positive-definiteness check."""


class DegenerateSpectrum(MorselabError):
    """An operation required a spectrum with no eigenvalue inside the zero band."""


class TopDegree(MorselabError):
    """dbar applied to a form already of top antiholomorphic degree."""


class BottomDegree(MorselabError):
    """Adjoint operator requested below degree zero."""


class NonIntegrable(MorselabError):
    """A Gaussian form is not square-integrable against the requested weight."""


class DegreeMismatch(MorselabError):
    """Two forms with incompatible (n, q) were combined."""


class SignPatternMismatch(MorselabError):
    """Model test form requested for a spectrum not ordered negatives-first."""


class EmptySpace(MorselabError):
    """A Galerkin candidate space contains no admissible basis element."""


class IllConditionedGram(MorselabError):
    """The Gram matrix of a candidate space lost all usable directions."""


class QuadratureFailure(MorselabError):
    """A quadrature did not stabilize under refinement."""


class GridTooCoarse(MorselabError):
    """A grid sup/integral changed too much under refinement."""


class ZeroDegreeFactor(MorselabError):
    """A torus scenario produced a factor line bundle of degree zero."""


class PerturbationUnsupported(MorselabError):
    """Operation defined only for the translation-invariant (unperturbed) case."""


class SeriesNotConverged(MorselabError):
    """A theta series truncation could not reach the requested tail bound."""


class GapNotResolved(MorselabError):
    """The truncation threshold never fell below the measured spectral gap."""


class InfeasibleDims(MorselabError):
    """Requested chain-complex dimensions admit no valid splitting."""


class BadSweepRule(MorselabError):
    """A (k, l) sweep rule does not drive k, l and k/l to infinity."""


class ConfigInvalid(MorselabError):
    """A scenario configuration failed validation."""
