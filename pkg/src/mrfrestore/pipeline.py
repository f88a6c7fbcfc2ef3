"""Method dispatch shared by the CLI, the benchmark and the demos."""

from __future__ import annotations

from dataclasses import dataclass

from .energy import Labeling, MrfModel, initial_labeling
from .messages import DEFAULT_MP_CONFIG, LowerBoundTrace, run_bp, run_trws
from .moves import ConvergenceTrace, SolverConfig, run_expansion, run_icm, run_swap

# table row order
METHODS = ("icm", "swap", "bps", "trws", "bpm", "expansion")
DISPLAY_NAMES = {
    "initial": "Initial",
    "icm": "ICM",
    "swap": "Swap",
    "bps": "BP-S",
    "trws": "TRW-S",
    "bpm": "BP-M",
    "expansion": "Expansion",
}
MESSAGE_PASSING = {"bps", "bpm", "trws"}


@dataclass
class SolveResult:
    method: str
    labeling: Labeling
    trace: ConvergenceTrace
    bounds: LowerBoundTrace | None = None


def default_config(method: str, max_cycles: int | None = None) -> SolverConfig:
    base = DEFAULT_MP_CONFIG if method in MESSAGE_PASSING else SolverConfig()
    if max_cycles is None:
        return base
    return SolverConfig(max_cycles=max_cycles, relative_tolerance=base.relative_tolerance)


def solve(model: MrfModel, method: str, init: Labeling | str = "observed",
          cfg: SolverConfig | None = None) -> SolveResult:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if isinstance(init, str):
        init = initial_labeling(model, init)
    cfg = cfg or default_config(method)
    if method == "icm":
        lab, tr = run_icm(model, init, cfg)
    elif method == "swap":
        lab, tr = run_swap(model, init, cfg)
    elif method == "expansion":
        lab, tr = run_expansion(model, init, cfg)
    elif method == "trws":
        lab, tr, lb = run_trws(model, init, cfg)
        return SolveResult(method, lab, tr, lb)
    else:
        lab, tr = run_bp(model, init, cfg, schedule=method)
    return SolveResult(method, lab, tr)
