"""Exception types shared across the package."""


class TidiffError(Exception):
    """Base class for all package errors."""


class StabilityViolation(TidiffError):
    """Elastic moduli fail a positive-definiteness inequality."""


class MaterialFileError(TidiffError):
    """Material config file is missing or malformed."""


class OnSlownessSurface(TidiffError):
    """Transfer tensor requested at a wave vector with an eigenvalue at 1."""


class DegenerateDirection(TidiffError):
    """The two quasi-shear sheets touch; per-sheet ray is ambiguous."""


class UnsupportedIncidence(TidiffError):
    """Incidence outside the solved configurations."""


class OrderingViolation(TidiffError):
    """Branch-point ordering assumptions fail; the scalar factorization
    scheme does not apply to this material/edge-wavenumber combination."""


class DegenerateKernel(TidiffError):
    """The quartet branch points collapse (isotropic point); the split
    kernels are undefined there."""


class NoRayleighRoot(TidiffError):
    """Bracketing of the surface-wave pole failed."""


class PoleCoalescence(TidiffError):
    """Residue evaluation too close to a double pole / branch point."""


class OnCut(TidiffError):
    """Split-function argument sits on the jump path; use the
    reflection form instead of the direct integral."""


class FactorizationError(TidiffError):
    """A positivity guard of the jump-phase tracking failed."""


class SingularGSystem(TidiffError):
    """Reduced 2x2 system fixing the entire-function constant is
    ill-conditioned."""


class EvanescentMode(TidiffError):
    """Requested diffracted mode does not propagate at this geometry."""


class OnCrackFace(TidiffError):
    """Observation ray lies on a crack face, where the far-field
    approximation is invalid."""
