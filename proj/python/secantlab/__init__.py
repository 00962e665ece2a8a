"""Numerical lab for theta functions, Kummer secancy tests and the
order-by-order secant hierarchy."""

from secantlab._core import (
    DirectionalJet,
    DivisorIntersection,
    HierarchyRun,
    HierarchyState,
    KummerContext,
    KummerPoint,
    RtResiduals,
    SampleGrid,
    SecantConfig,
    SecantLabError,
    SecantReport,
    SecantSearchResult,
    SiegelMatrix,
    ThetaEngine,
    TruncationPolicy,
    WeightedPartition,
    __version__,
    center_config,
    divisor_intersection_points,
    find_degenerate_secant,
    partitions_weighted,
    restriction_check,
    rt_cross_check,
    run_hierarchy,
    run_report,
    translated_configs,
    validate_siegel,
)

__all__ = [
    "DirectionalJet",
    "DivisorIntersection",
    "HierarchyRun",
    "HierarchyState",
    "KummerContext",
    "KummerPoint",
    "RtResiduals",
    "SampleGrid",
    "SecantConfig",
    "SecantLabError",
    "SecantReport",
    "SecantSearchResult",
    "SiegelMatrix",
    "ThetaEngine",
    "TruncationPolicy",
    "WeightedPartition",
    "__version__",
    "center_config",
    "divisor_intersection_points",
    "find_degenerate_secant",
    "partitions_weighted",
    "restriction_check",
    "rt_cross_check",
    "run_hierarchy",
    "run_report",
    "translated_configs",
    "validate_siegel",
]
