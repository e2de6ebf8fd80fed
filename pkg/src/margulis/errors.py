"""Exception types shared across the toolkit."""


class MargulisError(Exception):
    """Base class for all toolkit errors."""


class SingularMatrixError(MargulisError):
    """A matrix required to be invertible is singular within tolerance."""


class NonSemisimpleError(MargulisError):
    """Eigenvector matrix too ill-conditioned to treat the map as semisimple."""


class ModulusTieError(MargulisError):
    """Eigenvalue moduli straddle a classification boundary within tolerance."""


class ZeroSubspaceError(MargulisError):
    """An operation received a zero-dimensional subspace."""


class NotHyperbolicError(MargulisError):
    """Element is not hyperbolic (s(g) >= 1 or a trivial expanding/contracting side)."""


class NoFixedPointError(MargulisError):
    """Linear part has eigenvalue one; the fixed-point equation is singular."""


class NoAxisError(MargulisError):
    """No invariant line: eigenvalue one absent, neutral action nontrivial, or l(g) not regular."""


class ZeroAxisTranslationError(NoAxisError):
    """Invariant line exists but the translation along it vanishes."""


class DegenerateFormError(MargulisError):
    """Quadratic form has an eigenvalue below the degeneracy floor."""


class NotIsotropicError(MargulisError):
    """Subspace fails the isotropy or maximality requirement for the form."""


class NotInGroupError(MargulisError):
    """Linear part does not preserve the quadratic form within tolerance."""


class SplittingError(MargulisError):
    """Linear part does not respect the required invariant splitting."""


class SignComputationError(MargulisError):
    """Margulis sign undefined: splitting, orientation, or causality premise failed."""


class NoOrderingError(MargulisError):
    """No ordering of the four elements satisfies the cone condition."""


class SearchBudgetError(MargulisError):
    """A bounded search exhausted its budget before meeting its goal."""


class NoSamplerError(MargulisError):
    """No random-element sampler is available for the requested family."""


class GroupFileError(MargulisError):
    """Group file failed to parse or validate; message carries field diagnostics."""
