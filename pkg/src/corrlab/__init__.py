"""corrlab: a numerical laboratory for multivalued dynamics on the sphere.

Deleted-covering correspondences and their structural checks, Moebius
representations of free products C2 * C_{d+1}, escape-time and Boettcher
machinery for polynomials, and reproducible raster renderers with a CLI.
"""

from .algebra import (
    INFINITY,
    MobiusMap,
    Polynomial,
    RationalMap,
    SpherePoint,
    as_point,
    chordal,
    cross_ratio,
    elliptic_about,
    mobius_to_zero_one_inf,
    poly_roots,
    cov0_equation,
)
from .correspondence import (
    GraphCorrespondence,
    JCovCorrespondence,
    MatingFamilyParams,
    OrbitTree,
    bidegree_check,
    cov0_image,
    critical_points_of_q,
    equivalence_relation_check,
    forward_image,
    backward_image,
    mating_family,
    membership_residual,
    orbit_tree,
    time_reversal_check,
)
from .dynamics import (
    AnnulusSample,
    EscapeResult,
    FamilySpec,
    boundary_involution_j,
    bottcher_equipotential_point,
    critical_points,
    escape_radius,
    escape_time,
    fundamental_annulus,
    green_function,
    in_connectedness_locus,
)
from .hecke import (
    GroupWord,
    HeckeParams,
    HeckeRep,
    apply_word,
    chi_involution,
    cross_ratio_of_rep,
    enumerate_words,
    jorgensen_test,
    limit_set_sample,
    normalized_parameter,
    rep_from_cross_ratio,
    standard_hecke,
    word_map,
)

__version__ = "0.1.0"
