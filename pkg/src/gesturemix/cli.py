"""Command-line pipeline: synth -> train -> classify / score.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Everything printed to stdout is deterministic for fixed flags and seed;
wall-clock timing goes to stderr.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .classify import build_label_map, classify_video, record_header, result_record
from .errors import DataError, NumericalError
from .gmm import EmConfig, e_step, fit
from .io import (
    ModelFile,
    load_model,
    read_feature_csv,
    read_video_dir,
    save_model,
    export_plot_data,
    write_manifest,
    write_video,
)
from .landmarks import LANDMARK_COUNT, apply_normalization, compute_variances, fit_normalization
from .metrics import silhouette
from .synth import default_profiles, generate_dataset

# Robot integration stub: the action string announced for each recognized
# gesture. A real deployment would hand these to the manipulator driver.
GESTURE_ACTIONS = {
    "wave": "initialize-gripper",
    "pick": "pick-object",
    "stack": "stack-object-on-box",
    "push": "push-object",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage -> 1
        raise UsageError(message)


def _action_for(label: str) -> str:
    return GESTURE_ACTIONS.get(label, f"execute-task:{label}")


def _ingest_features(path: Path):
    """Features from a video directory or a feature CSV; returns (features, frames)."""
    if path.is_dir():
        videos = read_video_dir(path)
        features = [compute_variances(v) for v in videos]
        total_frames = sum(v.frame_count for v in videos)
        return features, total_frames
    if path.is_file():
        return read_feature_csv(path), None
    raise DataError(f"input {path} is neither a directory nor a file")


def cmd_synth(args) -> int:
    if args.frames < 2:
        raise UsageError("--frames must be at least 2")
    if args.videos_per_profile < 1:
        raise UsageError("--videos-per-profile must be at least 1")
    out = Path(args.output)
    videos = generate_dataset(
        default_profiles(),
        videos_per_profile=args.videos_per_profile,
        frames=args.frames,
        seed=args.seed,
    )
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for video in videos:
        fname = f"{video.source_id}.landmarks"
        write_video(video, out / fname)
        entries.append((fname, video.source_id, video.label))
    write_manifest(entries, out / "manifest.csv")
    print(f"videos={len(videos)}")
    print(f"output={args.output}")
    return 0


def cmd_train(args) -> int:
    if args.k is not None and args.k < 1:
        raise UsageError("--k must be at least 1")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.max_iters < 1:
        raise UsageError("--max-iters must be at least 1")
    if args.reg_eps < 0:
        raise UsageError("--reg-eps must be non-negative")

    features, _ = _ingest_features(Path(args.input))
    unlabeled = [f.source_id for f in features if f.label is None]
    if unlabeled:
        raise DataError(f"training data must be labeled; missing on {unlabeled[:3]}")
    distinct = sorted({f.label for f in features})
    k = args.k if args.k is not None else len(distinct)
    if args.k is not None and args.k != len(distinct):
        print(
            f"warning: --k {args.k} differs from {len(distinct)} distinct labels; proceeding",
            file=sys.stderr,
        )

    stats = fit_normalization(features)
    normed = [apply_normalization(f, stats) for f in features]
    data = np.vstack([f.rows for f in normed])
    config = EmConfig(
        k=k,
        max_iters=args.max_iters,
        tol=args.tol,
        reg_eps=args.reg_eps,
        seed=args.seed,
        covariance_mode=args.cov_mode,
    )
    params, resp, trace = fit(data, config)
    label_map = build_label_map(normed, params)
    assignment = np.argmax(resp, axis=1)
    report = silhouette(data, assignment)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    model = ModelFile(
        k=k,
        covariance_mode=args.cov_mode,
        params=params,
        stats=stats,
        label_map=label_map,
        seed=args.seed,
        tol=args.tol,
        iterations=trace.n_iters,
        final_log_likelihood=trace.log_likelihoods[-1],
        silhouette=report.overall,
    )
    model_path = out / "model.gmm"
    save_model(model, model_path)

    raw_rows = np.vstack([f.rows for f in features])
    video_labels = [f.label for f in features for _ in range(LANDMARK_COUNT)]
    export_plot_data(raw_rows, video_labels, out / "train_plot_before.csv")
    export_plot_data(
        raw_rows, [label_map.label_for(a) for a in assignment], out / "train_plot_after.csv"
    )

    print(f"iterations={trace.n_iters}")
    print(f"converged={str(trace.converged).lower()}")
    print(f"log_likelihood={trace.log_likelihoods[-1]:.17g}")
    print(f"silhouette={report.overall:.17g}")
    print(f"model={model_path.name}")
    return 0


def cmd_classify(args) -> int:
    model = load_model(args.model)
    features, total_frames = _ingest_features(Path(args.input))

    start = time.perf_counter()
    results = [
        classify_video(f, model.params, model.label_map, model.stats) for f in features
    ]
    elapsed = time.perf_counter() - start

    print(record_header(model.label_map))
    for result in results:
        print(result_record(result, model.label_map))

    labeled = [(r, f.label) for r, f in zip(results, features) if f.label is not None]
    if labeled and len(labeled) == len(results):
        correct = sum(1 for r, truth in labeled if r.winner == truth)
        print(f"accuracy={correct / len(labeled):.4f} correct={correct} total={len(labeled)}")
    for result in results:
        print(f"action {result.source_id} {_action_for(result.winner)}")

    print(f"seconds_total={elapsed:.6f}", file=sys.stderr)
    if total_frames:
        print(f"seconds_per_frame={elapsed / total_frames:.9f}", file=sys.stderr)
    return 0


def cmd_score(args) -> int:
    model = load_model(args.model)
    features, _ = _ingest_features(Path(args.input))
    normed = [apply_normalization(f, model.stats) for f in features]
    data = np.vstack([f.rows for f in normed])
    assignment = np.argmax(e_step(data, model.params), axis=1)
    report = silhouette(data, assignment)
    print(report.to_text())
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="gesturemix", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_synth = sub.add_parser("synth", help="generate a labeled synthetic gesture corpus")
    p_synth.add_argument("--output", default="gesture-data", help="output directory")
    p_synth.add_argument("--videos-per-profile", type=int, default=20)
    p_synth.add_argument("--frames", type=int, default=150)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_train = sub.add_parser("train", help="fit the mixture model on labeled data")
    p_train.add_argument("--input", required=True, help="video directory or feature CSV")
    p_train.add_argument("--output", default=".", help="directory for model + plot exports")
    p_train.add_argument("--k", type=int, default=None, help="components; defaults to #labels")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--tol", type=float, default=1e-6)
    p_train.add_argument("--max-iters", type=int, default=500)
    p_train.add_argument("--reg-eps", type=float, default=1e-6)
    p_train.add_argument("--cov-mode", choices=("full", "diag"), default="full")
    p_train.set_defaults(func=cmd_train)

    p_classify = sub.add_parser("classify", help="classify videos with a trained model")
    p_classify.add_argument("--model", required=True)
    p_classify.add_argument("--input", required=True, help="video directory or feature CSV")
    p_classify.set_defaults(func=cmd_classify)

    p_score = sub.add_parser("score", help="silhouette score of a model on a dataset")
    p_score.add_argument("--model", required=True)
    p_score.add_argument("--input", required=True, help="video directory or feature CSV")
    p_score.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
