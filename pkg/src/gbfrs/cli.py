"""Command-line front end: ball generation, selection, noise sweeps, checks.

Every artifact embeds a reproducibility header (tool version, effective
configuration, master seed, dataset content hash). Exit codes: 0 success,
1 runtime error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, granular_ball
from .dataset import DataError, load_csv, normalize_min_max
from .evaluation import METHODS, ExperimentConfig, noise_sweep
from .feature_selection import MODE_BALL, MODE_CLASSIC, forward_select
from .fuzzy_rough import (
    classic_dependency,
    lower_approximation,
    positive_region,
    rescale_dependency,
    weighted_dependency,
)
from .granular_ball import GranularBallSet

SEED_ENV_VAR = "GBFRS_MASTER_SEED"


def _fingerprint(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _parse_float_list(text: str) -> tuple[float, ...]:
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        values = []
        v = start
        while v <= stop + 1e-12:
            values.append(round(v, 10))
            v += step
        return tuple(values)
    return tuple(float(x) for x in text.split(","))


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(","))


def _parse_c_mode(text: str):
    if text == "schedule":
        return "schedule"
    if text.startswith("fixed:"):
        value = float(text.split(":", 1)[1])
        if value <= 0:
            raise ValueError("fixed C must be positive")
        return value
    raise ValueError(f"invalid --c-mode {text!r}; expected 'schedule' or 'fixed:<value>'")


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key = value): {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _master_seed(args) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return args.seed


def _effective_config(args, seed: int) -> dict:
    # output destinations are not experiment parameters; keeping them out
    # preserves byte-identical artifacts across reruns to different paths
    skip = {"func", "config", "out", "csv"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg["seed"] = seed
    for k, v in cfg.items():
        if isinstance(v, tuple):
            cfg[k] = list(v)
    return cfg


def _header(args, seed: int, input_path) -> dict:
    return {
        "tool": "gbfrs",
        "version": __version__,
        "master_seed": seed,
        "dataset_sha256": _fingerprint(input_path),
        "config": _effective_config(args, seed),
    }


def _load_normalized(args):
    ds = load_csv(args.input, args.label_col, header=args.header)
    return normalize_min_max(ds)


def _write_json(path, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_generate_balls(args) -> int:
    if not 0.0 < args.purity <= 1.0:
        raise ValueError("purity must be in (0,1]")
    seed = _master_seed(args)
    ds = _load_normalized(args)
    gbs = granular_ball.generate(ds, args.purity, seed, initial_ball_count=args.initial_balls)

    covered = sorted(int(i) for b in gbs.balls for i in b.member_indices)
    purities = [b.purity for b in gbs.balls]
    hist_edges = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    histogram = {}
    for lo, hi in zip(hist_edges[:-1], hist_edges[1:]):
        key = f"[{lo:.1f},{hi:.1f})" if hi < 1.0 else f"[{lo:.1f},1.0]"
        histogram[key] = sum(1 for p in purities if lo <= p < hi or (hi == 1.0 and p == 1.0))

    payload = _header(args, seed, args.input)
    payload["ball_set"] = gbs.to_dict()
    payload["summary"] = {
        "ball_count": gbs.m,
        "purity_histogram": histogram,
        "coverage_ok": covered == list(range(ds.n)),
        "mean_purity": float(np.mean(purities)),
    }
    _write_json(args.out, payload)
    print(f"generated {gbs.m} balls (n={ds.n}, purity threshold {args.purity})", file=sys.stderr)
    return 0


def cmd_select(args) -> int:
    seed = _master_seed(args)
    ds = _load_normalized(args)
    c_mode = _parse_c_mode(args.c_mode)

    if args.mode == "gbfrs":
        if args.balls:
            gbs = GranularBallSet.from_dict(json.loads(Path(args.balls).read_text(encoding="utf-8"))["ball_set"])
        else:
            if not 0.0 < args.purity <= 1.0:
                raise ValueError("purity must be in (0,1]")
            gbs = granular_ball.generate(ds, args.purity, seed, initial_ball_count=args.initial_balls)
        trace = forward_select(gbs, ds, MODE_BALL, c_mode=c_mode,
                               purity_threshold=gbs.purity_threshold, seed=seed)
    elif args.mode == "classic":
        trace = forward_select(None, ds, MODE_CLASSIC, c_mode=c_mode, seed=seed)
    else:
        raise ValueError(f"unknown mode {args.mode!r}")

    payload = _header(args, seed, args.input)
    payload["trace"] = trace.to_dict()
    payload["chosen_names"] = [ds.attribute_names[i] for i in trace.chosen]
    _write_json(args.out, payload)
    print("chosen attributes: " + (", ".join(payload["chosen_names"]) or "(none)"), file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    seed = _master_seed(args)
    ds = load_csv(args.input, args.label_col, header=args.header)
    fp = _fingerprint(args.input)
    cfg = ExperimentConfig(
        purity_grid=args.purity_grid,
        noise_levels=args.noise,
        folds=args.folds,
        knn_k=args.knn_k,
        seeds=args.seeds if args.seeds else (seed,),
        methods=args.methods,
        noise_kind=args.noise_kind,
        stratified=args.stratify,
        c_mode=_parse_c_mode(args.c_mode),
    )
    report = noise_sweep(ds, cfg, fp)

    payload = _header(args, seed, args.input)
    payload["report"] = report.to_dict(include_timing=not args.no_timing)
    _write_json(args.out, payload)

    if args.csv:
        rows = report.csv_rows(include_timing=not args.no_timing)
        Path(args.csv).write_text(
            "\n".join(",".join(str(v) for v in row) for row in rows) + "\n", encoding="utf-8"
        )
    for cell in sorted(report.cells, key=lambda c: (c.method, c.noise)):
        print(
            f"{cell.method:13s} noise={cell.noise:.2f} "
            f"acc={cell.mean_accuracy:.4f} +/- {cell.std_accuracy:.4f} "
            f"|B|={cell.mean_subset_size:.1f}",
            file=sys.stderr,
        )
    return 0


def cmd_check(args) -> int:
    seed = _master_seed(args)
    ds = _load_normalized(args)
    results = run_checks(ds, seed)
    payload = _header(args, seed, args.input)
    payload["checks"] = [{"name": n, "passed": ok, "detail": detail} for n, ok, detail in results]
    if args.out:
        _write_json(args.out, payload)
    failed = [n for n, ok, _ in results if not ok]
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return 1 if failed else 0


def run_checks(ds, seed: int) -> list[tuple[str, bool, str]]:
    """Invariant spot checks on a dataset; returns (name, passed, detail)."""
    rng = np.random.default_rng(seed)
    results = []

    gbs = granular_ball.generate(ds, 0.8, seed)
    covered = np.sort(np.concatenate([b.member_indices for b in gbs.balls]))
    results.append((
        "partition",
        bool(covered.size == ds.n and np.array_equal(covered, np.arange(ds.n))),
        f"{gbs.m} balls cover {covered.size}/{ds.n} indices",
    ))

    purity_ok = all(
        b.purity >= gbs.purity_threshold or not granular_ball.is_splittable(b, ds)
        for b in gbs.balls
    )
    results.append(("purity-threshold", purity_ok, f"threshold {gbs.purity_threshold}"))

    gbs2 = granular_ball.generate(ds, 0.8, seed)
    results.append(("determinism", gbs.to_json() == gbs2.to_json(), "regeneration is byte-identical"))

    ball = max(gbs.balls, key=lambda b: b.size)
    sub = sorted(rng.choice(ds.d, size=min(3, ds.d), replace=False).tolist())
    proj_center = ball.center[sub]
    sub_center = ds.features[ball.member_indices][:, sub].mean(axis=0)
    commute = float(np.abs(proj_center - sub_center).max())
    results.append(("center-projection", commute <= 1e-12, f"max deviation {commute:.2e}"))

    singles = granular_ball.generate(ds, 1.0, seed, singletons=True)
    subset = tuple(sorted(rng.choice(ds.d, size=min(4, ds.d), replace=False).tolist()))
    w_ball = weighted_dependency(singles, subset).value
    w_point = classic_dependency(ds, subset).value
    results.append((
        "singleton-equivalence",
        abs(w_ball - w_point) <= 1e-10,
        f"|delta| = {abs(w_ball - w_point):.2e}",
    ))

    dep1 = weighted_dependency(gbs, subset, C=1.0)
    dep4 = weighted_dependency(gbs, subset, C=4.0)
    scale_err = abs(dep4.value - 0.5 * dep1.value)
    results.append(("sqrt-C-scaling", scale_err <= 1e-12, f"|delta| = {scale_err:.2e}"))

    per = positive_region(gbs, subset, C=float(len(subset)))
    foreign_zero = True
    labels = gbs.labels()
    classes = set(labels.tolist())
    for j in range(min(gbs.m, 10)):
        for c in classes:
            if c != labels[j]:
                if lower_approximation(gbs, j, c, subset, C=float(len(subset))) != 0.0:
                    foreign_zero = False
    results.append(("foreign-class-zero", foreign_zero, "lower approximation of foreign classes"))

    rescaled = rescale_dependency(dep1, 4.0)
    results.append((
        "rescale-consistency",
        abs(rescaled.value - dep4.value) <= 1e-12,
        f"|delta| = {abs(rescaled.value - dep4.value):.2e}",
    ))

    if ds.d >= 2:
        small = tuple(subset[:2])
        ok_mono = weighted_dependency(gbs, small, C=float(ds.d)).value <= (
            weighted_dependency(gbs, tuple(range(ds.d)), C=float(ds.d)).value + 1e-12
        )
        results.append(("dependency-monotonicity", ok_mono, "nested subsets at fixed C"))

    results.append(("positive-region-range", bool(np.all(per >= 0) and np.all(per <= 1 + 1e-12)),
                    "values in [0,1] at C=|B|"))
    return results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbfrs",
        description="Granular-ball fuzzy rough set feature selection and noise benchmark",
    )
    parser.add_argument("--version", action="version", version=f"gbfrs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--input", required=True, help="CSV dataset path")
        p.add_argument("--label-col", required=True, help="label column name or zero-based index")
        p.add_argument("--header", action=argparse.BooleanOptionalAction, default=True,
                       help="whether the CSV has a header row")
        p.add_argument("--seed", type=int, default=0,
                       help=f"master seed (env {SEED_ENV_VAR} overrides)")
        p.add_argument("--config", default=None, help="key = value config file; flags override")
        p.add_argument("--out", default=None, help="output JSON path (stdout if omitted)")

    p_gen = sub.add_parser("generate-balls", help="build and serialize a granular-ball set")
    add_common(p_gen)
    p_gen.add_argument("--purity", type=float, default=1.0, help="purity threshold in (0,1]")
    p_gen.add_argument("--initial-balls", type=int, default=None,
                       help="override the ceil(sqrt(n)) initial ball count")
    p_gen.set_defaults(func=cmd_generate_balls)

    p_sel = sub.add_parser("select", help="forward-select attributes")
    add_common(p_sel)
    p_sel.add_argument("--mode", choices=("gbfrs", "classic"), default="gbfrs")
    p_sel.add_argument("--purity", type=float, default=1.0)
    p_sel.add_argument("--initial-balls", type=int, default=None)
    p_sel.add_argument("--balls", default=None, help="reuse a generate-balls JSON artifact")
    p_sel.add_argument("--c-mode", default="schedule", help="'schedule' or 'fixed:<value>'")
    p_sel.set_defaults(func=cmd_select)

    p_sw = sub.add_parser("sweep", help="methods x noise grid with k-fold CV")
    add_common(p_sw)
    p_sw.add_argument("--methods", type=lambda s: tuple(s.split(",")), default=METHODS)
    p_sw.add_argument("--noise", type=_parse_float_list, default=None,
                      help="comma list or start:stop:step of noise levels")
    p_sw.add_argument("--noise-kind", choices=("label", "attribute"), default="label")
    p_sw.add_argument("--purity-grid", type=_parse_float_list, default=None)
    p_sw.add_argument("--folds", type=int, default=5)
    p_sw.add_argument("--knn-k", type=int, default=3)
    p_sw.add_argument("--seeds", type=_parse_int_list, default=None,
                      help="comma list of seeds; defaults to the master seed")
    p_sw.add_argument("--stratify", action=argparse.BooleanOptionalAction, default=True)
    p_sw.add_argument("--c-mode", default="schedule")
    p_sw.add_argument("--csv", default=None, help="also write a flat CSV report")
    p_sw.add_argument("--no-timing", action="store_true",
                      help="omit wall-clock fields (byte-reproducible output)")
    p_sw.set_defaults(func=cmd_sweep)

    p_chk = sub.add_parser("check", help="run invariant spot checks against a dataset")
    add_common(p_chk)
    p_chk.set_defaults(func=cmd_check)

    return parser


def _apply_config_file(parser, argv):
    if "--config" not in argv:
        return
    cfg_path = argv[argv.index("--config") + 1]
    values = _load_config_file(cfg_path)
    converters = {
        "seed": int, "folds": int, "knn_k": int, "initial_balls": int,
        "purity": float,
        "noise": _parse_float_list, "purity_grid": _parse_float_list,
        "seeds": _parse_int_list,
        "methods": lambda s: tuple(s.split(",")),
        "header": lambda s: s.lower() in ("1", "true", "yes"),
        "stratify": lambda s: s.lower() in ("1", "true", "yes"),
    }
    converted = {}
    for key, raw in values.items():
        converted[key] = converters.get(key, str)(raw)
    for action in parser._subparsers._group_actions:
        for sub_parser in action.choices.values():
            known = {a.dest for a in sub_parser._actions}
            sub_parser.set_defaults(**{k: v for k, v in converted.items() if k in known})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)

    if getattr(args, "noise", None) is None and args.command == "sweep":
        args.noise = ExperimentConfig().noise_levels
    if getattr(args, "purity_grid", None) is None and args.command == "sweep":
        args.purity_grid = ExperimentConfig().purity_grid

    try:
        return args.func(args)
    except ValueError as exc:
        if isinstance(exc, DataError):
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
