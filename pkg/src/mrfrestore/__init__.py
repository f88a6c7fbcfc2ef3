"""Salt-and-pepper restoration as MRF inpainting, with graph-cut and message-passing solvers."""

from .energy import (
    Labeling,
    MrfModel,
    build_model,
    data_cost,
    energy_terms,
    initial_labeling,
    labels_with_stride,
    smoothness_cost,
    total_energy,
)
from .image_core import ImageGrid, PgmError, load_pgm, read_pgm, save_pgm, write_pgm
from .maxflow import CutResult, FlowNetwork, min_cut
from .messages import LowerBoundTrace, message_update, run_bp, run_trws
from .metrics import MetricReport, evaluate, mse, psnr, ssim
from .moves import (
    ConvergenceTrace,
    SolverConfig,
    expansion_graph,
    expansion_move,
    run_expansion,
    run_icm,
    run_swap,
    swap_move,
)
from .noise import NoiseSpec, PixelMask, build_superres_problem, corrupt, decimate, detect_min_max
from .pipeline import METHODS, SolveResult, solve

__all__ = [
    "ConvergenceTrace", "CutResult", "FlowNetwork", "ImageGrid", "Labeling", "LowerBoundTrace",
    "METHODS", "MetricReport", "MrfModel", "NoiseSpec", "PgmError", "PixelMask", "SolveResult",
    "SolverConfig", "build_model", "build_superres_problem", "corrupt", "data_cost", "decimate",
    "detect_min_max", "energy_terms", "evaluate", "expansion_graph", "expansion_move",
    "initial_labeling", "labels_with_stride", "load_pgm", "message_update", "min_cut", "mse",
    "psnr", "read_pgm", "run_bp", "run_expansion", "run_icm", "run_swap", "run_trws", "save_pgm",
    "smoothness_cost", "solve", "ssim", "swap_move", "total_energy", "write_pgm",
]
