"""Command-line interface tying the library together for batch use.

Exit codes: 0 success, 1 domain error (invalid values, malformed files),
2 usage or I/O error. Every file output is written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import budget, compressors, feature_io, plots, prompt
from .datagen.client import AnnotationError
from .datagen.run import ConfigError, load_pipeline_config, run_pipeline

PROG = "vtok"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Dynamic visual-token compression, budget planning, and QA data tooling.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("compress", help="compress a feature file frame by frame")
    p.add_argument("--input", "-i", required=True, help="input .vtok feature file")
    p.add_argument("--output", "-o", required=True, help="output .vcmp compressed file")
    p.add_argument("--method", required=True, choices=compressors.COMPRESSOR_NAMES, help="compressor to apply")
    p.add_argument("--target", required=True, type=int, help="tokens per frame to keep (16..576)")
    p.add_argument("--jobs", type=int, default=1, help="frames compressed in parallel")
    p.add_argument("--scorer", help="scorer weight file (.vscr) for prune; seeded default otherwise")
    p.add_argument("--scorer-seed", type=int, default=0, help="seed for the default prune scorer")
    p.add_argument("--mode", choices=("hard", "soft"), default="hard", help="prune selection mode")
    p.add_argument("--tau", type=float, default=1.0, help="gumbel-softmax temperature for soft prune")
    p.add_argument("--seed", type=int, default=0, help="gumbel noise seed for soft prune")

    p = sub.add_parser("plan", help="resolve a token budget into per-frame counts")
    p.add_argument("--n-max", required=True, type=int, help="max visual tokens for the video")
    p.add_argument("--frames", required=True, type=int, help="frame count")

    p = sub.add_parser("sample", help="compute frame sample timestamps for a video")
    p.add_argument("--duration", required=True, type=float, help="video duration in seconds")
    p.add_argument("--max-frames", required=True, type=int, help="frame cap")

    p = sub.add_parser("serialize", help="render the model-input prompt layout")
    p.add_argument("--duration", required=True, type=float, help="video duration in seconds")
    p.add_argument("--max-frames", required=True, type=int, help="frame cap")
    p.add_argument("--tokens-per-frame", required=True, type=int, help="token slots per frame")
    p.add_argument("--instruction", default="", help="instruction text appended after the video block")
    p.add_argument("--n-max", type=int, help="optional budget to validate the slot total against")
    p.add_argument("--json", action="store_true", help="emit the segment list as JSON")

    p = sub.add_parser("sweep", help="emit the budget cost table as CSV (and a PNG figure)")
    p.add_argument("--n-max", help="comma-separated budgets (default: built-in preset)")
    p.add_argument("--tpf", help="comma-separated tokens-per-frame values")
    p.add_argument("--out", help="CSV path; stdout when omitted")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure next to the CSV")

    p = sub.add_parser("pipeline", help="run the QA dataset construction pipeline")
    p.add_argument("--config", required=True, help="flat key=value config file")

    return parser


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ValueError(f"{flag} expects comma-separated integers: {exc}") from exc
    if not values:
        raise ValueError(f"{flag} expects at least one value")
    return values


def _check_cli_target(target: int) -> None:
    lo, hi = budget.TOKENS_PER_FRAME_MIN, budget.TOKENS_PER_FRAME_MAX
    if not (lo <= target <= hi):
        raise ValueError(f"--target must be in [{lo}, {hi}], got {target}")


def cmd_compress(args: argparse.Namespace) -> int:
    _check_cli_target(args.target)
    video = feature_io.read_feature_file(args.input)
    h, w, c = video.grid_shape
    in_tokens = h * w

    pool_shape = None
    scorer = None
    gumbel = None
    if args.method == "pool":
        pool_shape = budget.snap_to_grid(args.target)
        realized = pool_shape.token_count
    elif args.method == "prune":
        scorer = (
            feature_io.read_scorer_file(args.scorer)
            if args.scorer
            else compressors.random_scorer(args.scorer_seed, c)
        )
        gumbel = compressors.GumbelConfig(temperature=args.tau, seed=args.seed, mode=args.mode)
        realized = args.target
    else:
        realized = args.target

    def one_frame(grid):
        return compressors.compress(
            grid, args.method, realized, pool_shape=pool_shape, scorer=scorer, gumbel=gumbel
        )

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            frame_sets = tuple(pool.map(one_frame, video.frames))
    else:
        frame_sets = tuple(one_frame(g) for g in video.frames)

    out = feature_io.CompressedVideo(frame_sets, video.timestamps_s)
    feature_io.write_compressed_file(out, args.output)
    print(
        f"frames={video.frame_count} in_tokens={in_tokens} out_tokens={realized} "
        f"ratio={in_tokens / realized:.2f}"
    )
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    plan = budget.plan_inference(args.n_max, args.frames)
    lines = [
        f"n_max={plan.n_max}",
        f"frames_requested={args.frames}",
        f"frames_planned={plan.frame_count}",
        f"tokens_per_frame={plan.tokens_per_frame}",
        f"pool_side={plan.realized_shape.out_h}",
        f"pool_tokens={plan.realized_shape.token_count}",
        f"total_tokens={plan.frame_count * plan.tokens_per_frame}",
    ]
    try:
        lo, hi = budget.training_token_interval(args.n_max, args.frames)
        lines += [f"train_lo={lo}", f"train_hi={hi}"]
    except ValueError:
        lines.append("train_interval=unavailable")
    print("\n".join(lines))
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    plan = budget.plan_frame_sampling(args.duration, args.max_frames)
    ts = plan.timestamps_s
    print(f"count={plan.frame_count}")
    print(f"first={ts[0]:g}")
    print(f"last={ts[-1]:g}")
    print("timestamps=" + ",".join(f"{t:g}" for t in ts))
    return 0


def cmd_serialize(args: argparse.Namespace) -> int:
    plan = budget.plan_frame_sampling(args.duration, args.max_frames)
    layout = prompt.serialize_video_prompt(plan, args.tokens_per_frame, args.instruction, n_max=args.n_max)
    if args.json:
        print(json.dumps(layout.to_json(), ensure_ascii=False, indent=2))
    else:
        print(layout.render_text())
    return 0


def cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if (args.n_max is None) != (args.tpf is None):
        parser.error("--n-max and --tpf must be given together")
    if args.n_max is None:
        rows = budget.table_rows()
    else:
        rows = budget.sweep_cost_table(
            _parse_int_list(args.n_max, "--n-max"), _parse_int_list(args.tpf, "--tpf")
        )
    csv_text = budget.cost_table_csv(rows)
    if args.out is None:
        sys.stdout.write(csv_text)
        return 0
    feature_io.atomic_write_bytes(args.out, csv_text.encode("utf-8"))
    if not args.no_plot:
        figure_path = Path(args.out).with_suffix(".png")
        plots.save_cost_figure(rows, figure_path)
        print(f"wrote {args.out} and {figure_path}")
    else:
        print(f"wrote {args.out}")
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = load_pipeline_config(args.config)
    _, report = run_pipeline(config)
    sys.stdout.write(report.to_text())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "compress":
            return cmd_compress(args)
        if args.subcommand == "plan":
            return cmd_plan(args)
        if args.subcommand == "sample":
            return cmd_sample(args)
        if args.subcommand == "serialize":
            return cmd_serialize(args)
        if args.subcommand == "sweep":
            return cmd_sweep(args, parser)
        if args.subcommand == "pipeline":
            return cmd_pipeline(args)
        parser.error(f"unknown subcommand {args.subcommand!r}")
    except FileNotFoundError as exc:
        print(f"{PROG}: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except IsADirectoryError as exc:
        print(f"{PROG}: expected a file: {exc.filename or exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{PROG}: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, feature_io.FeatureFileError, ConfigError, AnnotationError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
