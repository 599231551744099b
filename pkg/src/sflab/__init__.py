"""Spectral flow, bulk and edge indices of gapped Bloch Hamiltonians."""

__version__ = "0.1.0"

from .bulk import (
    ChernReport,
    EigenbundleFrames,
    berry_chern_oracle,
    bulk_index,
    chern_plaquette,
    eigenbundle_frames,
    spectral_gap,
)
from .disc import DiscToeplitz, coburn_decay, disc_spectral_flow, disc_toeplitz, disc_toeplitz_from_coefficients
from .edge import EdgeIndexReport, HalfSpaceOperator, build_halfspace, edge_bands, edge_spectral_flow
from .estimators import APSIndex, BulkEdgeCheck, BulkIndex, DiscIndex, EdgeIndex
from .fredholm import IndexEstimate, aps_edge_index, aps_index_estimate, det_winding, toeplitz_index_estimate
from .models import BlochModel, EdgeSymbolFamily, edge_symbol, eval_bloch, qwz_model, validate_model
from .spectralflow import (
    CrossingFilter,
    LoopEigenData,
    SpectralFlowResult,
    cayley_loop_winding,
    match_branches,
    spectral_flow,
)
