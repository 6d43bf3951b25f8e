"""Command-line surface: fit / reconstruct / trim-report / synth / bgmodel /
faces / bench.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
All randomness flows from --seed; repeated runs with identical flags
produce byte-identical artifact files. ANGEMB_THREADS (0 = auto) caps the
BLAS thread pools and must be applied before numpy loads, which is why the
heavy imports live inside the command handlers.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

DEFAULT_ETA = math.pi / 3

BENCH_SHAPES = {
    "small": (100, 100),
    "yale": (32256, 64),
    "water": (20480, 633),
    "hall": (25344, 3584),
    "caviar": (110592, 1675),
}


def _apply_thread_cap() -> None:
    cap = os.environ.get("ANGEMB_THREADS", "").strip()
    if not cap or cap == "0":
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "BLIS_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, cap)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved flags, echoed into every run summary."""

    command: str
    method: str | None = None
    d: int | None = None
    eta_theta: float | None = None
    strategy: str = "auto"
    seed: int = 0
    block: int = 256
    input: str | None = None
    frames: str | None = None
    model: str | None = None
    output: str | None = None
    repeats: int | None = None


def _config(args, **overrides) -> RunConfig:
    fields = {}
    for name in RunConfig.__dataclass_fields__:
        if name in overrides:
            fields[name] = overrides[name]
        elif hasattr(args, name):
            value = getattr(args, name)
            fields[name] = str(value) if isinstance(value, Path) else value
    return RunConfig(**fields)


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2))


def _load_samples(path):
    """CSV with rows as samples -> column-major DataMatrix."""
    import numpy as np

    from .errors import InvalidData
    from .linalg import DataMatrix

    try:
        rows = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise InvalidData(f"{path}: {exc}") from exc
    return DataMatrix.from_array(rows.T)


def _save_samples(path, values) -> None:
    """Column-major matrix -> CSV with rows as samples, atomically."""
    import io

    from .model import atomic_write_text

    buf = io.StringIO()
    for row in values.T:
        buf.write(",".join(format(v, ".17g") for v in row))
        buf.write("\n")
    atomic_write_text(path, buf.getvalue())


def _resolve_frames(spec: str) -> list[Path]:
    import glob as globmod

    path = Path(spec)
    if path.is_dir():
        return sorted(path.glob("*.pgm"))
    return [Path(p) for p in sorted(globmod.glob(spec))]


def _fit_kwargs(args) -> dict:
    kwargs = {
        "eta_theta": args.eta_theta,
        "strategy": args.strategy,
        "seed": args.seed,
        "block": args.block,
    }
    if hasattr(args, "em_tol"):
        kwargs["em_tol"] = args.em_tol
        kwargs["em_max_iter"] = args.em_max_iter
    return kwargs


def cmd_fit(args) -> int:
    from .methods import fit_method
    from .model import save_model

    X = _load_samples(args.input)
    model = fit_method(X, args.method, args.d, **_fit_kwargs(args))
    save_model(model, args.output)
    stats = model.fit_stats
    _print_json(
        {
            "method": model.method,
            "d": model.d,
            "n": X.n,
            "D": X.D,
            "samples_trimmed": stats.samples_trimmed,
            "wall_time_s": stats.wall_time_s,
        }
    )
    return 0


def cmd_reconstruct(args) -> int:
    from .ae import reconstruct
    from .model import load_model

    model = load_model(args.model)
    X = _load_samples(args.input)
    recon = reconstruct(model, X)
    _save_samples(args.output, recon.values)
    _print_json(
        {
            "command": "reconstruct",
            "n": X.n,
            "D": X.D,
            "output": str(args.output),
            "config": asdict(_config(args, command="reconstruct", method=model.method)),
        }
    )
    return 0


def cmd_trim_report(args) -> int:
    from .linalg import center, normalize_columns
    from .model import atomic_write_text, trim_to_dict
    from .tae import outlier_counts, select_inliers

    X = _load_samples(args.input)
    _, Xc = center(X)
    U = normalize_columns(Xc, args.zero_tol)
    tau = outlier_counts(U, args.eta_theta, args.block)
    report, _ = select_inliers(U, tau, args.eta_theta)
    doc = trim_to_dict(report)
    if args.output:
        atomic_write_text(args.output, json.dumps(doc, indent=2) + "\n")
    _print_json(
        {
            "command": "trim-report",
            "report": doc,
            "config": asdict(_config(args, command="trim-report")),
        }
    )
    return 0


def cmd_synth(args) -> int:
    from .model import atomic_write_text
    from .synth import canonical_spec, four_class_3d, generate, random_subspace
    from .synth import SynthSpec

    labels = None
    if args.preset == "canonical":
        result = generate(canonical_spec(outlier_fraction=args.fraction))
    elif args.preset == "four-class-3d":
        result, labels = four_class_3d(seed=args.seed)
    else:
        spec = SynthSpec(
            D=args.dim,
            n_inliers=args.n_inliers,
            true_basis=random_subspace(args.dim, args.d_true, seed=args.seed),
            inlier_noise=args.noise,
            outlier_fraction=args.fraction,
            outlier_magnitude=args.magnitude,
            outlier_direction_mode=args.mode,
            seed=args.seed,
        )
        result = generate(spec)

    prefix = Path(args.output)
    csv_path = prefix.with_suffix(".csv")
    json_path = prefix.with_suffix(".json")
    _save_samples(csv_path, result.data.values)
    sidecar = {
        "outlier_indices": [int(i) for i in result.outlier_indices],
        "true_basis": result.true_basis.basis.T.tolist(),
        "config": asdict(_config(args, command="synth")),
    }
    if labels is not None:
        sidecar["labels"] = [int(x) for x in labels]
    atomic_write_text(json_path, json.dumps(sidecar, indent=2) + "\n")
    _print_json(
        {
            "command": "synth",
            "csv": str(csv_path),
            "sidecar": str(json_path),
            "n": result.data.n,
            "D": result.data.D,
            "n_outliers": len(result.outlier_indices),
        }
    )
    return 0


def _imaging_summary(args, command, model, extra) -> dict:
    from .model import trim_to_dict

    doc = {
        "method": model.method,
        "d": model.d,
        "eta_theta": args.eta_theta,
        "trim": trim_to_dict(model.trim) if model.trim is not None else None,
        "config": asdict(_config(args, command=command, d=model.d)),
    }
    doc.update(extra)
    return doc


def cmd_bgmodel(args) -> int:
    import numpy as np

    from .imaging import background_model, load_frames, write_frames
    from .model import atomic_write_text

    stack = load_frames(_resolve_frames(args.frames))
    result = background_model(
        stack, d=args.d, method=args.method, **_fit_kwargs(args)
    )
    out_dir = Path(args.output)
    write_frames(result.backgrounds, out_dir, suffix="_bg")
    write_frames(result.foreground, out_dir, suffix="_fg")
    rmse = float(
        np.sqrt(np.mean((result.raw_reconstruction - stack.frames.values) ** 2))
    )
    trimmed = (
        [stack.names[j] for j in result.model.trim.outliers]
        if result.model.trim is not None
        and result.model.fit_stats.dropped_zero_norm == 0
        else []
    )
    summary = _imaging_summary(
        args,
        "bgmodel",
        result.model,
        {"rmse": rmse, "trimmed_frames": trimmed, "n_frames": stack.n},
    )
    atomic_write_text(out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    _print_json(summary)
    return 0


def cmd_faces(args) -> int:
    import numpy as np

    from .imaging import load_frames, shadow_removal, write_frames
    from .model import atomic_write_text

    stack = load_frames(_resolve_frames(args.frames))
    result = shadow_removal(stack, d=args.d, method=args.method, **_fit_kwargs(args))
    out_dir = Path(args.output)
    write_frames(result.reconstructed, out_dir, suffix="_recon")
    write_frames(result.inverted_difference, out_dir, suffix="_diff")
    rmse = float(
        np.sqrt(np.mean((result.raw_reconstruction - stack.frames.values) ** 2))
    )
    summary = _imaging_summary(
        args, "faces", result.model, {"rmse": rmse, "n_frames": stack.n}
    )
    atomic_write_text(out_dir / "summary.json", json.dumps(summary, indent=2) + "\n")
    _print_json(summary)
    return 0


def cmd_bench(args) -> int:
    import numpy as np

    from .linalg import DataMatrix, resolve_strategy
    from .methods import fit_method
    from .model import atomic_write_text

    if args.input:
        X = _load_samples(args.input)
        dataset = Path(args.input).stem
    else:
        D, n = BENCH_SHAPES[args.preset]
        rng = np.random.default_rng(args.seed)
        X = DataMatrix.from_array(rng.standard_normal((D, n)))
        dataset = args.preset

    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    lines = ["dataset,method,d,mean_s"]
    for method in methods:
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            fit_method(X, method, args.d, **_fit_kwargs(args))
            times.append(time.perf_counter() - t0)
        mean_s = sum(times) / len(times)
        strategy = resolve_strategy(X.D, X.n, args.d, args.strategy)
        print(
            f"bench dataset={dataset} D={X.D} n={X.n} method={method} "
            f"strategy={strategy} mean_s={mean_s:.4f}",
            file=sys.stderr,
        )
        lines.append(f"{dataset},{method},{args.d},{mean_s:.6f}")
    table = "\n".join(lines) + "\n"
    if args.output:
        atomic_write_text(args.output, table)
    else:
        print(table, end="")
    return 0


def _add_common(sub, *, method=True, d_default=None, d_required=False):
    if method:
        sub.add_argument(
            "--method",
            choices=("pca", "em_pca", "ae", "tae"),
            default="tae" if d_default else None,
            required=d_default is None,
            help="fitting method (default: %(default)s)",
        )
    sub.add_argument(
        "--components",
        "-d",
        dest="d",
        type=int,
        default=d_default,
        required=d_required,
        help="number of components (default: %(default)s)",
    )
    sub.add_argument(
        "--eta-theta",
        dest="eta_theta",
        type=float,
        default=DEFAULT_ETA,
        help="angular trim threshold in radians, used by tae "
        "(default: pi/3 = %(default).10f)",
    )
    sub.add_argument(
        "--strategy",
        choices=("auto", "d-path", "n-path", "randomized"),
        default="auto",
        help="decomposition path (default: %(default)s)",
    )
    sub.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
    sub.add_argument(
        "--block",
        type=int,
        default=256,
        help="row-block size for pairwise cosines (default: %(default)s)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="angemb",
        description="Angular-embedding robust PCA: subspace fits on the unit "
        "sphere with optional cosine-threshold pre-trimming.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="fit a model from a CSV of samples")
    fit.add_argument("--input", required=True, help="CSV, rows are samples")
    fit.add_argument("--output", default="model.json", help="model JSON path")
    _add_common(fit, d_required=True)
    fit.add_argument("--zero-tol", dest="zero_tol", type=float, default=1e-12)
    fit.add_argument("--em-tol", dest="em_tol", type=float, default=1e-4)
    fit.add_argument("--em-max-iter", dest="em_max_iter", type=int, default=1000)
    fit.set_defaults(func=cmd_fit)

    rec = subs.add_parser("reconstruct", help="reconstruct samples via a model")
    rec.add_argument("--model", required=True, help="model JSON from fit")
    rec.add_argument("--input", required=True, help="CSV, rows are samples")
    rec.add_argument("--output", default="reconstruction.csv")
    rec.add_argument("--seed", type=int, default=0)
    rec.set_defaults(func=cmd_reconstruct)

    trim = subs.add_parser("trim-report", help="outlier counts and trim set")
    trim.add_argument("--input", required=True, help="CSV, rows are samples")
    trim.add_argument("--output", default=None, help="optional report JSON path")
    trim.add_argument(
        "--eta-theta", dest="eta_theta", type=float, default=DEFAULT_ETA
    )
    trim.add_argument("--block", type=int, default=256)
    trim.add_argument("--zero-tol", dest="zero_tol", type=float, default=1e-12)
    trim.add_argument("--seed", type=int, default=0)
    trim.set_defaults(func=cmd_trim_report)

    synth = subs.add_parser("synth", help="generate a planted-outlier dataset")
    synth.add_argument(
        "--preset",
        choices=("canonical", "four-class-3d"),
        default=None,
        help="named study preset (overrides the shape flags)",
    )
    synth.add_argument("--dim", type=int, default=10)
    synth.add_argument("--n-inliers", dest="n_inliers", type=int, default=500)
    synth.add_argument("--d-true", dest="d_true", type=int, default=1)
    synth.add_argument("--noise", type=float, default=0.005)
    synth.add_argument("--fraction", type=float, default=0.1)
    synth.add_argument("--magnitude", type=float, default=10.0)
    synth.add_argument("--mode", choices=("orthogonal", "random"), default="orthogonal")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument(
        "--output", required=True, help="output prefix for .csv and .json"
    )
    synth.set_defaults(func=cmd_synth)

    bg = subs.add_parser("bgmodel", help="background modeling over PGM frames")
    bg.add_argument("--frames", required=True, help="directory or glob of .pgm files")
    bg.add_argument("--output", required=True, help="output directory")
    _add_common(bg, d_default=5)
    bg.add_argument("--zero-tol", dest="zero_tol", type=float, default=1e-12)
    bg.set_defaults(func=cmd_bgmodel)

    faces = subs.add_parser("faces", help="shadow removal over PGM faces")
    faces.add_argument("--frames", required=True, help="directory or glob of .pgm files")
    faces.add_argument("--output", required=True, help="output directory")
    _add_common(faces, d_default=9)
    faces.add_argument("--zero-tol", dest="zero_tol", type=float, default=1e-12)
    faces.set_defaults(func=cmd_faces)

    bench = subs.add_parser("bench", help="mean fit wall-time per method")
    group = bench.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=sorted(BENCH_SHAPES))
    group.add_argument("--input", default=None, help="CSV, rows are samples")
    bench.add_argument("--methods", default="pca,ae", help="comma-separated list")
    _add_common(bench, method=False, d_default=5)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--output", default=None, help="CSV path (default: stdout)")
    bench.set_defaults(func=cmd_bench)

    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    """Flag-range checks happen before any data is touched (exit 2)."""
    d = getattr(args, "d", None)
    if d is not None and d < 1:
        parser.error(f"--components must be >= 1, got {d}")
    eta = getattr(args, "eta_theta", None)
    if eta is not None and not 0.0 < eta < math.pi / 2:
        parser.error(f"--eta-theta must lie in (0, pi/2), got {eta}")
    block = getattr(args, "block", None)
    if block is not None and block < 1:
        parser.error(f"--block must be >= 1, got {block}")
    if getattr(args, "repeats", None) is not None and args.repeats < 1:
        parser.error("--repeats must be >= 1")
    if getattr(args, "seed", None) is not None and args.seed < 0:
        parser.error("--seed must be >= 0")
    if args.command == "synth" and args.preset is None:
        if args.d_true >= args.dim:
            parser.error("--d-true must be smaller than --dim")
        if not 0.0 <= args.fraction < 1.0:
            parser.error("--fraction must lie in [0, 1)")


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    if hasattr(args, "strategy"):
        args.strategy = args.strategy.replace("-", "_")

    from .errors import DataError, NumericError

    import numpy as np

    try:
        return args.func(args)
    except (DataError, OSError) as exc:
        print(f"angemb: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"angemb: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
