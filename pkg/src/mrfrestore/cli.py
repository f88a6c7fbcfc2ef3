"""``mrfrestore`` command line: corrupt, denoise, superres, eval, bench.

Options may also come from a flat ``key = value`` config file (``--config``);
command-line flags win over the file, which wins over built-in defaults.
Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .energy import build_model, labels_with_stride, total_energy
from .image_core import ImageGrid, PgmError, load_pgm, save_pgm
from .metrics import evaluate, format_psnr, ssim
from .noise import NoiseSpec, build_superres_problem, corrupt, detect_min_max, PixelMask
from .pipeline import DISPLAY_NAMES, METHODS, default_config, solve

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 1, 2, 3

DEFAULTS = {
    "noise": 0.5,
    "seed": 0,
    "method": "expansion",
    "methods": ",".join(METHODS),
    "levels": "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
    "lam": 5.0,
    "vmax": 5.0,
    "k": 2,
    "label_stride": 1,
    "max_cycles": None,
    "init": "observed",
    "ssim": "global",
    "out": ".",
    "factor": 2,
    "crop": None,
}
# config-file spelling -> attribute name
CONFIG_KEYS = {
    "noise": "noise", "seed": "seed", "method": "method", "methods": "methods",
    "levels": "levels", "lambda": "lam", "vmax": "vmax", "k": "k",
    "label-stride": "label_stride", "label_stride": "label_stride",
    "max-cycles": "max_cycles", "max_cycles": "max_cycles", "init": "init",
    "ssim": "ssim", "out": "out", "factor": "factor", "crop": "crop",
}


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class BenchConfig:
    images: list
    levels: list = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 10)])
    methods: list = field(default_factory=lambda: list(METHODS))
    lam: float = 5.0
    k: int = 2
    vmax: float = 5.0
    label_stride: int = 1
    max_cycles: int | None = None
    init: str = "observed"
    ssim: str = "global"
    seed: int = 0
    out: Path = Path(".")
    crop: int | None = None

    def __post_init__(self):
        if not self.methods:
            raise ValueError("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown method(s): {', '.join(bad)}")
        if any(not 0 < r <= 1 for r in self.levels):
            raise ValueError("noise levels must lie in (0, 1]")


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[CONFIG_KEYS[key]] = value
    return out


_CASTS = {"noise": float, "seed": int, "lam": float, "vmax": float, "k": int,
          "label_stride": int, "max_cycles": int, "factor": int, "crop": int}


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then from DEFAULTS."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is not None:
            continue
        raw = cfg.get(key, default)
        if raw is not None and key in _CASTS and isinstance(raw, str):
            try:
                raw = _CASTS[key](raw)
            except ValueError:
                raise UsageError(f"config value for {key!r} is not a number: {raw!r}") from None
        setattr(args, key, raw)
    if args.k not in (1, 2):
        raise UsageError("--k must be 1 or 2")
    if args.init not in ("observed", "midgray", "median"):
        raise UsageError(f"unknown init {args.init!r}")
    if args.ssim not in ("global", "windowed"):
        raise UsageError(f"unknown ssim mode {args.ssim!r}")
    if args.label_stride < 1:
        raise UsageError("--label-stride must be >= 1")
    if args.max_cycles is not None and args.max_cycles < 1:
        raise UsageError("--max-cycles must be >= 1")
    return args


def _model(observed, mask, args):
    return build_model(observed, mask, lam=args.lam, k=args.k, v_max=args.vmax,
                       labels=labels_with_stride(args.label_stride))


def _run(model, method, args):
    try:
        return solve(model, method, args.init, default_config(method, args.max_cycles))
    except (ArithmeticError, MemoryError, RuntimeError) as exc:
        raise SolverFailure(f"{method} failed: {exc}") from exc


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _write_traces(result, base: Path):
    _sibling(base, "_trace.csv").write_text(result.trace.to_csv())
    if result.bounds is not None:
        _sibling(base, "_bound.csv").write_text(result.bounds.to_csv())


def _crop(grid: ImageGrid, size):
    if size is None:
        return grid
    h, w = grid.shape
    r0, c0 = max((h - size) // 2, 0), max((w - size) // 2, 0)
    return ImageGrid(grid.pixels[r0:r0 + size, c0:c0 + size])


def _report(restored, truth, mode):
    rep = evaluate(restored, truth, mode)
    print(f"psnr={format_psnr(rep.psnr)} ssim={rep.ssim:.2f} mse={rep.mse:.4f}")
    return rep


# -- subcommands ---------------------------------------------------------------

def cmd_corrupt(args) -> int:
    if not 0 <= args.noise <= 1:
        raise UsageError("--noise must lie in [0, 1]")
    image = load_pgm(args.input)
    noisy = corrupt(image, NoiseSpec.symmetric(args.noise, args.seed))
    out = Path(args.output)
    save_pgm(out, noisy)
    save_pgm(_sibling(out, "_mask.pgm"), detect_min_max(noisy).to_grid())
    return EXIT_OK


def cmd_denoise(args) -> int:
    noisy = load_pgm(args.input)
    mask = PixelMask.from_grid(load_pgm(args.mask)) if args.mask else detect_min_max(noisy)
    model = _model(noisy, mask, args)
    result = _run(model, args.method, args)
    out = Path(args.output)
    save_pgm(out, result.labeling.to_image())
    _write_traces(result, out)
    print(f"final energy: {total_energy(model, result.labeling)}")
    if args.truth:
        _report(result.labeling.to_image(), load_pgm(args.truth), args.ssim)
    return EXIT_OK


def cmd_superres(args) -> int:
    low = load_pgm(args.input)
    if args.factor < 2:
        raise UsageError("--factor must be >= 2")
    hi, mask = build_superres_problem(low, args.factor)
    model = _model(hi, mask, args)
    result = _run(model, args.method, args)
    out = Path(args.output)
    save_pgm(out, result.labeling.to_image())
    _write_traces(result, out)
    if args.truth:
        _report(result.labeling.to_image(), load_pgm(args.truth), args.ssim)
    return EXIT_OK


def cmd_eval(args) -> int:
    restored, truth = load_pgm(args.input), load_pgm(args.truth)
    if restored.shape != truth.shape:
        raise UsageError(f"image sizes differ: {restored.shape} vs {truth.shape}")
    _report(restored, truth, args.ssim)
    if args.verbose:
        print(f"ssim_global={ssim(restored, truth, 'global'):.4f} "
              f"ssim_windowed={ssim(restored, truth, 'windowed'):.4f}")
    return EXIT_OK


def level_label(r: float) -> str:
    return f"{round(r * 100):d}%"


def run_bench(cfg: BenchConfig) -> tuple[dict, bool]:
    """Run the grid; returns ({image stem: csv path}, any cell failed)."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    written, failed = {}, False
    stride_labels = labels_with_stride(cfg.label_stride)
    for path in cfg.images:
        truth = _crop(load_pgm(path), cfg.crop)
        stem = Path(path).stem
        trace_dir = cfg.out / f"{stem}_traces"
        trace_dir.mkdir(exist_ok=True)
        rows = {"initial": []}
        rows.update({m: [] for m in METHODS if m in cfg.methods})
        for level in cfg.levels:
            noisy = corrupt(truth, NoiseSpec.symmetric(level, cfg.seed))
            rows["initial"].append(evaluate(noisy, truth, cfg.ssim).cell())
            model = build_model(noisy, detect_min_max(noisy), lam=cfg.lam, k=cfg.k,
                                v_max=cfg.vmax, labels=stride_labels)
            for method in rows:
                if method == "initial":
                    continue
                try:
                    res = solve(model, method, cfg.init, default_config(method, cfg.max_cycles))
                except Exception as exc:  # recorded per cell, grid continues
                    print(f"{stem} {level_label(level)} {method}: {exc}", file=sys.stderr)
                    rows[method].append("error")
                    failed = True
                    continue
                rows[method].append(evaluate(res.labeling.to_image(), truth, cfg.ssim).cell())
                _write_traces(res, trace_dir / f"{method}_R{round(level * 100):02d}.csv")
        table = cfg.out / f"{stem}_table.csv"
        with table.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method"] + [level_label(r) for r in cfg.levels])
            for method, cells in rows.items():
                w.writerow([DISPLAY_NAMES[method]] + cells)
        written[stem] = table
    return written, failed


def cmd_bench(args) -> int:
    try:
        levels = [float(s) for s in str(args.levels).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --levels {args.levels!r}") from None
    methods = [s.strip() for s in str(args.methods).split(",") if s.strip()]
    try:
        cfg = BenchConfig(images=args.images, levels=levels, methods=methods, lam=args.lam,
                          k=args.k, vmax=args.vmax, label_stride=args.label_stride,
                          max_cycles=args.max_cycles, init=args.init, ssim=args.ssim,
                          seed=args.seed, out=Path(args.out), crop=args.crop)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    written, failed = run_bench(cfg)
    for stem, path in written.items():
        print(f"{stem}: {path}")
    return EXIT_SOLVER if failed else EXIT_OK


# -- argument parsing ------------------------------------------------------------

def _model_flags(p):
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--vmax", type=float)
    p.add_argument("--k", type=int, choices=(1, 2))
    p.add_argument("--label-stride", type=int)
    p.add_argument("--max-cycles", type=int)
    p.add_argument("--init", choices=("observed", "midgray", "median"))
    p.add_argument("--ssim", choices=("global", "windowed"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mrfrestore", description="MRF restoration of salt-and-pepper images")
    parser.add_argument("--config", help="flat key = value options file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corrupt", help="add salt-and-pepper noise")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("denoise", help="restore a noisy PGM")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mask", help="mask PGM (255 = missing); default: min/max detection")
    p.add_argument("--truth", help="ground truth PGM for PSNR/SSIM")
    _model_flags(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("superres", help="upsample by inpainting the missing grid")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--factor", type=int)
    p.add_argument("--truth")
    _model_flags(p)
    p.set_defaults(func=cmd_superres)

    p = sub.add_parser("eval", help="PSNR/SSIM of an image against ground truth")
    p.add_argument("input")
    p.add_argument("truth")
    p.add_argument("--ssim", choices=("global", "windowed"))
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="method x noise-level table for ground-truth images")
    p.add_argument("images", nargs="+")
    p.add_argument("--levels", help="comma-separated noise levels")
    p.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--crop", type=int, help="centre crop size")
    _model_flags(p)
    p.set_defaults(func=cmd_bench)

    # the global --config may also follow the subcommand
    for action in sub.choices.values():
        action.add_argument("--config", dest="config", default=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        return args.func(args)
    except UsageError as exc:
        print(f"mrfrestore: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, PgmError) as exc:
        print(f"mrfrestore: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverFailure as exc:
        print(f"mrfrestore: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"mrfrestore: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
