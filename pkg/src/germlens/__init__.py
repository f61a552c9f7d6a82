"""Numerical and exact-arithmetic probes for set-germs at the origin:
direction sets, tangent cones, gauge thickenings, volume asymptotics,
Lipschitz extensions and the bi-Lipschitz invariance of directional
dimension."""

from .gauges import (
    Gauge,
    GaugeDomainError,
    MaxGauge,
    MonomialGauge,
    ScaledGauge,
    TabulatedGauge,
    check_gauge_valid,
    dominating_monomial,
    gauge_compare,
    gauge_eval,
    scale_gauge,
)
from .germs import (
    EmptyGermError,
    GermSet,
    apply_map_germ,
    distance_estimate,
    full_space_germ,
    geometric_schedule,
    germ_from_parametric,
    germ_from_ray,
    germ_from_sequence,
    germ_from_subspace,
    log_schedule,
    make_germ,
    nearest_with_distance,
    semialgebraic_germ,
    union_germ,
)
from .directions import (
    DirectionSample,
    InvariantReport,
    dimension_estimate,
    direction_intersection_dim,
    direction_set_estimate,
    invariant_check,
    tangent_cone,
)
from .seatangle import (
    GaugeFit,
    STVerdict,
    gauge_fit,
    sandwich_gauges,
    st_contains,
    st_equivalence_search,
    st_inclusion_test,
)
from .ssp import (
    LDImageReport,
    SSPConfig,
    SSPReport,
    ld_image_check,
    ssp_probe,
    wssp_probe,
)
from .volume import (
    CTimesReport,
    RatioReport,
    VolEstimate,
    ball_volume,
    ctimes_check,
    dim_inequality_check,
    ratio_curve,
    st_volume_equiv_check,
    vol_st_ball,
)
from .lipschitz import (
    ConstantsReport,
    LipschitzMap,
    banach_extension,
    cone_extension,
    constants_estimate,
    linear_map,
    simplicial_extension,
    with_estimated_constants,
)
from .puiseux import (
    CellForm2D,
    IntervalSubset,
    PuiseuxNumber,
    PxError,
    PxPoly,
    cell,
    px_abs,
    px_add,
    px_compare,
    px_const,
    px_dist_set,
    px_inv,
    px_le,
    px_lt,
    px_max,
    px_mul,
    px_neg,
    px_norm,
    px_parse,
    px_pow,
    px_print,
    px_sub,
    px_t,
    px_vol_cell,
    px_vol_scaling_check,
    pxp_parse,
)
from .fixtures import Fixture, catalog, standard_maps_2d, standard_maps_3d
from .config import ConfigError, load_config, resolve_gauge, validate_config
from .cli import main, run

__version__ = "0.1.0"
