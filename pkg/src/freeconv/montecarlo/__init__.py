"""Monte Carlo verification experiments for the finite-n claims."""

from .estimates import MonteCarloEstimate, ScalingPoint, ScalingReport, fit_loglog, scaling_report
from .experiments import (
    BlockAverageReport,
    ContainmentReport,
    CorrectionCheckReport,
    IbpPhi,
    IbpReport,
    MasterIidPoint,
    MasterWishartPoint,
    NormConvergenceReport,
    ResolventEntryTarget,
    TraceWordTarget,
    basis_hermitian,
    block_average_check,
    correction_check,
    estimate_Gn,
    master_residual_iid,
    master_residual_wishart,
    master_scaling_iid,
    master_scaling_wishart,
    norm_convergence,
    spectrum_containment,
    variance_checks,
    variance_point,
    wishart_ibp_check,
)
from .parallel import chunk_bounds, combine_sums, jackknife_chunks, map_chunks
from .resolvent import WignerEnsemble, WishartEnsemble, resolvent_stats, rn_quadruple

__all__ = [
    "MonteCarloEstimate", "ScalingPoint", "ScalingReport", "fit_loglog", "scaling_report",
    "BlockAverageReport", "ContainmentReport", "CorrectionCheckReport", "IbpPhi",
    "IbpReport", "MasterIidPoint", "MasterWishartPoint", "NormConvergenceReport",
    "ResolventEntryTarget", "TraceWordTarget", "basis_hermitian",
    "block_average_check", "correction_check", "estimate_Gn",
    "master_residual_iid", "master_residual_wishart", "master_scaling_iid",
    "master_scaling_wishart", "norm_convergence", "spectrum_containment",
    "variance_checks", "variance_point", "wishart_ibp_check",
    "chunk_bounds", "combine_sums", "jackknife_chunks", "map_chunks",
    "WignerEnsemble", "WishartEnsemble", "resolvent_stats", "rn_quadruple",
]
