"""Spectral splittings, Margulis signs, and properness obstructions for
affine transformation groups in low dimensions."""

from .affine import (
    AffineMap,
    AffineSubspace,
    InvariantLine,
    affine_subspaces,
    axis_point,
    fixed_point,
    has_eigenvalue_one,
    invariant_line,
)
from .classifier import (
    RepEntry,
    admissible_semisimple,
    rep_dim_for,
    table1,
    table2,
    verify_eigenvalue_one_generic,
)
from .corpus import case23_fixture, lorentz_boost, margulis_pair, translation_lattice
from .errors import (
    GroupFileError,
    MargulisError,
    NoAxisError,
    NoFixedPointError,
    NoOrderingError,
    NoSamplerError,
    NonSemisimpleError,
    NotHyperbolicError,
    NotInGroupError,
    NotIsotropicError,
    SearchBudgetError,
    SignComputationError,
    SingularMatrixError,
    SplittingError,
    ZeroAxisTranslationError,
    ZeroSubspaceError,
)
from .groupio import (
    GroupFile,
    group_from_parts,
    parse_group_file,
    parse_group_text,
    serialize_group,
    write_group_file,
)
from .obstruction import (
    BallWitness,
    EscortSets,
    ObstructionReport,
    ScanConfig,
    ball_intersection_witness,
    build_escort_sets,
    check_escort_conditions,
    opposite_sign_search,
    properness_scan,
    transversality_margin,
    verify_report,
)
from .projective import (
    Subspace,
    hausdorff_rho,
    orthogonal_complement,
    principal_cosines,
    proj_distance,
    proj_point_distance,
    subspace_intersection,
    subspace_sum,
)
from .signform import (
    CaseTwoStructure,
    QuadraticForm,
    alpha_case23,
    attracting_line,
    margulis_alpha,
    neutral_vector,
    normalize_form,
    order_four,
    orient_isotropic,
    oriented_neutral_vector,
    phi_classify,
    standard_form,
)
from .spectral import (
    SpectralSplit,
    SpectralStats,
    characteristic_split,
    hyperbolicity_margin,
    is_eps_hyperbolic,
    is_hyperbolic,
    is_regular,
    restriction_norm,
    spectral_stats,
    three_splitting,
)
from .words import (
    GeneratorSet,
    Word,
    eigenvalue_one_certificate,
    find_transversal_conjugator,
    iter_words,
    product_contraction_report,
    transversality_check,
    transversality_margins,
    word_ball,
)

__version__ = "0.1.0"
