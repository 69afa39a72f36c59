"""Towers of algebraic curves: equations, point counts, gonality bounds,
exact dynamics on P^1, and the spectral-graph side of the story."""

from .algebra import (
    HomogeneousPolynomial,
    PrimeField,
    PrimeFieldElement,
    ProjectivePoint,
    enumerate_projective,
    format_polynomial,
    is_prime,
    parse_polynomial,
    projective_space_size,
    rational_roots,
)
from .bounds import (
    BoundRecord,
    GonalityInterval,
    LevelBoundsRow,
    TowerReport,
    ci_genus,
    frey_max_degree,
    gonality_upper_bounds,
    hurwitz_genus_lower,
    lazarsfeld_bound,
    planar_genus,
    planar_power_bound,
    pointcount_gonality_bound,
    ql_bound,
    tower_report,
)
from .dynamics import (
    OrbitClassification,
    PreimageNode,
    PreimageTree,
    RationalMap,
    apply_map,
    canonical_height,
    classify_orbit,
    monomial_map,
    naive_height,
    parse_rational_map,
    periodic_points,
    preimage_chain,
)
from .errors import (
    BadReductionError,
    ConfigError,
    DegenerateReductionError,
    DimensionMismatchError,
    DisconnectedGraphError,
    DomainError,
    EnumerationCapError,
    IndeterminateProjectionError,
    MatrixDimensionCapError,
    MembershipError,
    NonHomogeneousError,
    NotPrimeError,
    ParseError,
    PrecisionBudgetError,
    ResourceCapError,
    TowerlabError,
)
from .pointcount import (
    ImageChain,
    OmegaCheckResult,
    PointCountResult,
    check_omega_criterion,
    count_points,
    image_chain,
    merge_counts,
    reduce_point,
)
from .spectra import (
    DscResult,
    FamilyVerdict,
    GraphTowerLevelMap,
    RegularMultigraph,
    TrendResult,
    UnramifiedReport,
    cayley_sl2,
    complete_graph,
    cycle_graph,
    cycle_spectrum,
    diameter,
    dsc_check,
    eigenvalues,
    esperantist_test,
    expander_test,
    graph_to_triplets,
    lambda1,
    lambda1_volume_trend,
    laplacian,
    schreier_graph,
    sl2_order,
    unramified_check,
)
from .towers import (
    CompleteIntersectionTower,
    DynamicalTower,
    LevelCurve,
    PlanarPowerTower,
    dynamical_tower,
    fermat_tower,
    fibonacci_tower,
    level_equations,
    level_map,
    level_map_composed,
    load_tower,
    on_level,
    planar_power_tower,
    resolve_tower,
    save_tower,
    singular_points_mod_p,
)

__version__ = "0.1.0"
