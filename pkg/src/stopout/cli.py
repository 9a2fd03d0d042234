"""Command-line pipeline: every stage reads and writes plain TSV/SVG files.

Exit codes: 0 success, 2 bad configuration or arguments, 3 unusable data,
4 degenerate labels on a single requested problem. Grid runs never exit 4;
they record per-cell statuses instead.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import __version__
from . import cohorts as cohorts_mod
from . import importance as importance_mod
from .dataset_builder import ProblemSpec, enumerate_problems, flatten
from .errors import ConfigError, DataError, DegenerateLabelsError, InsufficientDataError
from .evaluator import (
    ALL_COHORT,
    CellResult,
    GridResult,
    cell_seed,
    evaluate_problem,
    export_grid,
    export_heatmap_matrix,
    load_grid,
    run_grid,
)
from .event_store import dump_calendar, dump_dataset, ingest, load_calendar, load_dump
from .featurizer import build_feature_matrix, export_feature_matrix, export_histogram, load_feature_matrix
from .logistic_model import save_model
from .synth import SynthConfig, generate, write_events, write_truth
from .viz import write_heatmap, write_importance_chart

DEFAULTS = {
    "seed": "0",
    "ratio": "0.7",
    "ridge": "0.0",
    "folds": "10",
    "min_rows": "10",
    "importance_subsamples": "200",
    "importance_fraction": "0.75",
    "importance_weight_floor": "0.5",
    "importance_target_support": "8",
    "importance_problems": "13,1;3,6;6,4",
    "synth_learners": "1000",
    "synth_weeks": "14",
    "synth_hazard_noise": "0.5",
    "synth_volume_slope": "-2.0",
    "synth_timeliness_slope": "-1.0",
    "synth_grades_slope": "-2.0",
}


def load_config(path: str | None) -> dict[str, str]:
    """Flat key=value file over the built-in defaults; unknown keys are errors."""
    merged = dict(DEFAULTS)
    if path is None:
        return merged
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{p}:{lineno}: expected key=value, got {raw!r}")
        if key not in DEFAULTS:
            raise ConfigError(f"{p}:{lineno}: unknown config key {key!r}")
        merged[key] = value
    return merged


def config_sha256(cfg: dict[str, str]) -> str:
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg)) + "\n"
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _get_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"config key {key} must be an integer, got {cfg[key]!r}") from exc


def _get_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"config key {key} must be a number, got {cfg[key]!r}") from exc


def parse_filter(clause: str) -> dict[str, object]:
    """One clause like 'lead=1,lag=3,cohort=passive_collaborator'."""
    out: dict[str, object] = {}
    for part in clause.split(","):
        key, sep, value = part.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"bad filter part {part!r}, expected key=value")
        if key in ("lead", "lag"):
            try:
                out[key] = int(value)
            except ValueError as exc:
                raise ConfigError(f"filter {key} must be an integer, got {value!r}") from exc
        elif key == "cohort":
            if value not in cohorts_mod.COHORTS and value != ALL_COHORT:
                raise ConfigError(f"unknown cohort {value!r}")
            out[key] = value
        else:
            raise ConfigError(f"unknown filter key {key!r}")
    return out


def filter_match(clauses: list[dict[str, object]], cohort: str, lead: int, lag: int) -> bool:
    if not clauses:
        return True
    facts = {"cohort": cohort, "lead": lead, "lag": lag}
    return any(all(facts[k] == v for k, v in c.items()) for c in clauses)


def parse_problem_pairs(text: str) -> list[tuple[int, int]]:
    """Semicolon-separated 'LEAD,LAG' pairs, e.g. '13,1;3,6;6,4'."""
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ConfigError(f"bad problem {chunk!r}, expected LEAD,LAG")
        try:
            lead, lag = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ConfigError(f"bad problem {chunk!r}: lead and lag must be integers") from exc
        if lead < 1 or lag < 1:
            raise ConfigError(f"bad problem {chunk!r}: lead and lag must be >= 1")
        pairs.append((lead, lag))
    if not pairs:
        raise ConfigError("importance_problems lists no problems")
    return pairs


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(
    out_dir: Path,
    meta: dict[str, str] | None = None,
    cells: list[tuple[str, int, int, str]] | None = None,
) -> None:
    """Declare the whole run: meta rows, per-cell statuses, then one row per
    output file with its hash. No timestamps, so reruns are byte-identical.
    """
    rows = []
    for key, value in (meta or {}).items():
        rows.append(f"meta\t{key}\t{value}")
    for cohort, lead, lag, status in sorted(cells or []):
        rows.append(f"cell\t{cohort}\t{lead}\t{lag}\t{status}")
    for p in sorted(out_dir.rglob("*")):
        if p.is_file() and p.name != "manifest.tsv":
            rows.append(f"file\t{p.relative_to(out_dir).as_posix()}\t{sha256_file(p)}\t{p.stat().st_size}")
    (out_dir / "manifest.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_manifest(path: str | Path) -> dict[str, list[tuple[str, ...]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    out: dict[str, list[tuple[str, ...]]] = {"meta": [], "cell": [], "file": []}
    for ln in path.read_text(encoding="utf-8").splitlines():
        if not ln:
            continue
        kind, _, rest = ln.partition("\t")
        if kind not in out:
            raise DataError(f"{path}: unknown manifest row type {kind!r}")
        out[kind].append(tuple(rest.split("\t")))
    return out


def _write_ingest_stats(stats, path: Path) -> None:
    rows = [
        "key\tvalue",
        f"total\t{stats.total}",
        f"accepted\t{stats.accepted}",
        f"rejected\t{stats.rejected}",
        f"clamped\t{stats.clamped}",
    ]
    for reason in sorted(stats.reject_reasons):
        rows.append(f"reject:{reason}\t{stats.reject_reasons[reason]}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def print_defaults() -> int:
    for key in sorted(DEFAULTS):
        print(f"{key}={DEFAULTS[key]}")
    return 0


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    config = SynthConfig(
        num_learners=args.learners if args.learners is not None else _get_int(cfg, "synth_learners"),
        num_weeks=args.weeks if args.weeks is not None else _get_int(cfg, "synth_weeks"),
        seed=args.seed if args.seed is not None else _get_int(cfg, "seed"),
        volume_slope=_get_float(cfg, "synth_volume_slope"),
        timeliness_slope=_get_float(cfg, "synth_timeliness_slope"),
        grades_slope=_get_float(cfg, "synth_grades_slope"),
        hazard_noise=_get_float(cfg, "synth_hazard_noise"),
    )
    out = _out_dir(args)
    course = generate(config)
    write_events(course, out / "events.tsv")
    dump_calendar(course.calendar, out / "calendar.tsv")
    write_truth(course, out / "truth.tsv")
    print(f"synth: {config.num_learners} learners, {config.num_weeks} weeks -> {out}")
    return 0


def cmd_ingest(args) -> int:
    out = _out_dir(args)
    dataset = ingest(args.events, args.calendar)
    dump_dataset(dataset, out / "dataset.tsv")
    dump_calendar(dataset.calendar, out / "calendar.tsv")
    _write_ingest_stats(dataset.stats, out / "ingest_stats.tsv")
    s = dataset.stats
    print(f"ingest: {s.accepted}/{s.total} rows accepted, {s.rejected} rejected, {s.clamped} clamped")
    return 0


def cmd_featurize(args) -> int:
    out = _out_dir(args)
    calendar = load_calendar(args.calendar)
    dataset = load_dump(args.dataset, calendar)
    matrix, histogram = build_feature_matrix(dataset)
    export_feature_matrix(matrix, out / "features.tsv")
    export_histogram(histogram, out / "stopout_histogram.tsv")
    print(f"featurize: {matrix.num_learners} participating learners, {matrix.num_weeks} weeks")
    return 0


def cmd_cohorts(args) -> int:
    out = _out_dir(args)
    calendar = load_calendar(args.calendar)
    dataset = load_dump(args.dataset, calendar)
    assignments = cohorts_mod.assign_cohorts(dataset)
    cohorts_mod.export_cohorts(assignments, out / "cohorts.tsv")
    counts = cohorts_mod.cohort_counts(assignments)
    print("cohorts: " + ", ".join(f"{name}={counts[name]}" for name in cohorts_mod.COHORTS))
    return 0


def cmd_build(args) -> int:
    out = _out_dir(args)
    matrix = load_feature_matrix(args.features)
    assignments = cohorts_mod.load_cohorts(args.cohorts) if args.cohorts else None
    if args.cohort is not None and assignments is None:
        raise ConfigError("--cohort requires --cohorts FILE")
    spec = ProblemSpec(lead=args.lead, lag=args.lag, cohort=args.cohort)
    X, y, learners, columns = flatten(matrix, spec, assignments)
    if y.size == 0:
        raise InsufficientDataError(
            f"no eligible learners for lead={args.lead} lag={args.lag}"
            + (f" cohort={args.cohort}" if args.cohort else "")
        )
    rows = ["\t".join(["learner_id", "label"] + columns)]
    for i, lid in enumerate(learners):
        rows.append("\t".join([lid, str(int(y[i]))] + [repr(float(v)) for v in X[i]]))
    (out / "design.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"build: {y.size} rows x {len(columns)} columns -> {out / 'design.tsv'}")
    return 0


def cmd_train_eval(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else _get_int(cfg, "seed")
    ratio = args.ratio if args.ratio is not None else _get_float(cfg, "ratio")
    ridge = args.ridge if args.ridge is not None else _get_float(cfg, "ridge")
    folds = args.folds if args.folds is not None else _get_int(cfg, "folds")
    min_rows = _get_int(cfg, "min_rows")
    out = _out_dir(args)

    matrix = load_feature_matrix(args.features)
    assignments = cohorts_mod.load_cohorts(args.cohorts) if args.cohorts else None
    if args.cohort is not None and assignments is None:
        raise ConfigError("--cohort requires --cohorts FILE")
    spec = ProblemSpec(lead=args.lead, lag=args.lag, cohort=args.cohort)
    X, y, _, columns = flatten(matrix, spec, assignments)
    if y.size < min_rows:
        raise InsufficientDataError(
            f"{y.size} eligible learners for lead={args.lead} lag={args.lag}, need {min_rows}"
        )
    label = args.cohort if args.cohort is not None else ALL_COHORT
    rng = np.random.default_rng(cell_seed(seed, label, args.lead, args.lag))
    ev = evaluate_problem(X, y, rng, ratio=ratio, ridge=ridge, folds=folds, columns=columns)
    save_model(ev.model, out / "model.txt")
    cell = CellResult(
        cohort=label, lead=args.lead, lag=args.lag, predicted_week=spec.predicted_week,
        status="ok", n_rows=int(y.size), n_train=ev.n_train, n_test=ev.n_test,
        cv_mean=ev.cv_mean, train_auc=ev.train_auc, test_auc=ev.test_auc,
    )
    export_grid(GridResult(cohort=label, num_weeks=matrix.num_weeks, seed=seed, cells=[cell]),
                out / "eval.tsv")
    print(
        f"train-eval: lead={args.lead} lag={args.lag} cohort={label} "
        f"cv={ev.cv_mean:.4f} train={ev.train_auc:.4f} test={ev.test_auc:.4f}"
    )
    return 0


# worker-process state for cell-level parallelism; the feature matrix is
# shipped once per worker instead of once per cell
_POOL_STATE: dict[str, object] = {}


def _pool_init(matrix, assignments, seed, params, shuffle) -> None:
    _POOL_STATE.update(
        matrix=matrix, assignments=assignments, seed=seed, params=params, shuffle=shuffle
    )


def _cell_task(key: tuple[str, int, int]) -> CellResult:
    cohort, lead, lag = key
    params = _POOL_STATE["params"]
    grid = run_grid(
        _POOL_STATE["matrix"], assignments=_POOL_STATE["assignments"], cohort=cohort,
        seed=_POOL_STATE["seed"], min_rows=params["min_rows"], ratio=params["ratio"],
        ridge=params["ridge"], folds=params["folds"], shuffle_labels=_POOL_STATE["shuffle"],
        specs=[ProblemSpec(lead=lead, lag=lag, cohort=cohort)],
    )
    return grid.cells[0]


def _run_importance_reports(matrix, assignments, cfg, seed, out: Path) -> None:
    pairs = parse_problem_pairs(cfg["importance_problems"])
    valid = [(lead, lag) for lead, lag in pairs if lead + lag <= matrix.num_weeks]
    if not valid:
        valid = [(1, 1)]  # shortest problem always fits a >= 2 week course
    reports = []
    for cohort in cohorts_mod.COHORTS:
        specs = [ProblemSpec(lead=lead, lag=lag, cohort=cohort) for lead, lag in valid]
        try:
            report = importance_mod.run_importance(
                matrix, specs, assignments=assignments, seed=seed,
                subsamples=_get_int(cfg, "importance_subsamples"),
                fraction=_get_float(cfg, "importance_fraction"),
                weight_floor=_get_float(cfg, "importance_weight_floor"),
                target_support=_get_int(cfg, "importance_target_support"),
                min_rows=_get_int(cfg, "min_rows"),
            )
        except InsufficientDataError:
            print(f"importance {cohort}: no problem had enough rows, skipped")
            continue
        reports.append(report)
        write_importance_chart(
            report.base_freq, out / f"importance_{cohort}.svg",
            title=f"{cohort} feature stability",
        )
    importance_mod.export_importance(reports, out / "importance.tsv")


def cmd_run_all(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else _get_int(cfg, "seed")
    params = {
        "ratio": _get_float(cfg, "ratio"),
        "ridge": _get_float(cfg, "ridge"),
        "folds": _get_int(cfg, "folds"),
        "min_rows": _get_int(cfg, "min_rows"),
    }
    clauses = [parse_filter(c) for c in (args.filter or [])]
    out = _out_dir(args)

    dataset = ingest(args.events, args.calendar)
    dump_dataset(dataset, out / "dataset.tsv")
    dump_calendar(dataset.calendar, out / "calendar.tsv")
    _write_ingest_stats(dataset.stats, out / "ingest_stats.tsv")

    matrix, histogram = build_feature_matrix(dataset)
    export_feature_matrix(matrix, out / "features.tsv")
    export_histogram(histogram, out / "stopout_histogram.tsv")

    assignments = cohorts_mod.assign_cohorts(dataset)
    cohorts_mod.export_cohorts(assignments, out / "cohorts.tsv")

    keys = [
        (cohort, s.lead, s.lag)
        for cohort in cohorts_mod.COHORTS
        for s in enumerate_problems(matrix.num_weeks, cohort=cohort)
        if filter_match(clauses, cohort, s.lead, s.lag)
    ]
    init_args = (matrix, assignments, seed, params, args.shuffle_labels)
    if args.jobs > 1 and len(keys) > 1:
        with Pool(processes=min(args.jobs, len(keys)), initializer=_pool_init,
                  initargs=init_args) as pool:
            cells = pool.map(_cell_task, keys)
    else:
        _pool_init(*init_args)
        cells = [_cell_task(k) for k in keys]

    manifest_cells = []
    for cohort in cohorts_mod.COHORTS:
        own = [c for c in cells if c.cohort == cohort]
        if not own:
            continue
        grid = GridResult(cohort=cohort, num_weeks=matrix.num_weeks, seed=seed, cells=own)
        export_grid(grid, out / f"grid_{cohort}.tsv")
        export_heatmap_matrix(grid, out / f"heatmap_{cohort}.tsv")
        write_heatmap(grid, out / f"heatmap_{cohort}.svg")
        ok = sum(1 for c in own if c.status == "ok")
        print(f"grid {cohort}: {ok}/{len(own)} cells ok")
        manifest_cells.extend((c.cohort, c.lead, c.lag, c.status) for c in own)

    if not args.shuffle_labels:
        _run_importance_reports(matrix, assignments, cfg, seed, out)

    meta = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": "{}.{}.{}".format(*sys.version_info[:3]),
        "seed": str(seed),
        "config_sha256": config_sha256(cfg),
    }
    write_manifest(out, meta=meta, cells=manifest_cells)
    print(f"run-all: {len(cells)} cells attempted -> {out}")
    return 0


def cmd_heatmap(args) -> int:
    grid = load_grid(args.grid)
    if args.value not in ("test_auc", "train_auc", "cv_mean"):
        raise ConfigError(f"unknown heatmap value {args.value!r}")
    out = _out_dir(args)
    export_heatmap_matrix(grid, out / "heatmap.tsv", value=args.value)
    write_heatmap(grid, out / "heatmap.svg", value=args.value)
    print(f"heatmap: {args.grid} -> {out / 'heatmap.svg'}")
    return 0


def _parse_problem(text: str) -> ProblemSpec:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise ConfigError(f"bad problem {text!r}, expected LEAD,LAG[,COHORT]")
    try:
        lead, lag = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad problem {text!r}: lead and lag must be integers") from exc
    cohort = None
    if len(parts) == 3 and parts[2] and parts[2] != ALL_COHORT:
        if parts[2] not in cohorts_mod.COHORTS:
            raise ConfigError(f"unknown cohort {parts[2]!r}")
        cohort = parts[2]
    return ProblemSpec(lead=lead, lag=lag, cohort=cohort)


def cmd_importance(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else _get_int(cfg, "seed")
    subsamples = args.subsamples if args.subsamples is not None else _get_int(cfg, "importance_subsamples")
    out = _out_dir(args)
    matrix = load_feature_matrix(args.features)
    assignments = cohorts_mod.load_cohorts(args.cohorts) if args.cohorts else None
    specs = [_parse_problem(p) for p in args.problem]
    if any(s.cohort is not None for s in specs) and assignments is None:
        raise ConfigError("cohort-restricted problems need --cohorts FILE")
    report = importance_mod.run_importance(
        matrix, specs, assignments=assignments, seed=seed,
        subsamples=subsamples,
        fraction=_get_float(cfg, "importance_fraction"),
        weight_floor=_get_float(cfg, "importance_weight_floor"),
        target_support=_get_int(cfg, "importance_target_support"),
        min_rows=_get_int(cfg, "min_rows"),
    )
    importance_mod.export_importance(report, out / "importance.tsv")
    write_importance_chart(report.base_freq, out / "importance.svg",
                           title=f"{report.cohort} feature stability")
    top = ", ".join(f"{fid}={freq:.3f}" for fid, freq in report.ranked()[:5])
    print(f"importance: top features {top}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stopout",
        description="Weekly stopout-prediction pipeline over course event logs.",
    )
    parser.add_argument("--defaults", action="store_true",
                        help="print every config key with its default and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth", help="generate a synthetic course with known ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--learners", type=int)
    p.add_argument("--weeks", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate raw event files into a canonical dataset")
    p.add_argument("--events", action="append", required=True)
    p.add_argument("--calendar", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("featurize", help="weekly features and stopout labels from a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--calendar", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("cohorts", help="assign collaboration cohorts")
    p.add_argument("--dataset", required=True)
    p.add_argument("--calendar", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cohorts)

    p = sub.add_parser("build", help="flatten one lead/lag problem into a design matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--lead", type=int, required=True)
    p.add_argument("--lag", type=int, required=True)
    p.add_argument("--cohort")
    p.add_argument("--cohorts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("train-eval", help="train and score one lead/lag problem")
    p.add_argument("--features", required=True)
    p.add_argument("--lead", type=int, required=True)
    p.add_argument("--lag", type=int, required=True)
    p.add_argument("--cohort")
    p.add_argument("--cohorts")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--ridge", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("heatmap", help="render a grid export as a matrix file plus SVG")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--value", default="test_auc")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("importance", help="stability-selection feature importance")
    p.add_argument("--features", required=True)
    p.add_argument("--cohorts")
    p.add_argument("--problem", action="append", required=True,
                   help="LEAD,LAG[,COHORT]; repeat for several problems")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--subsamples", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("run-all", help="full pipeline: ingest, featurize, cohorts, all grids")
    p.add_argument("--events", action="append", required=True)
    p.add_argument("--calendar", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--filter", action="append",
                   help="restrict cells, e.g. lead=1,lag=3,cohort=passive_collaborator; repeatable")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--shuffle-labels", action="store_true",
                   help="permute labels per cell before splitting (no-signal control)")
    p.set_defaults(func=cmd_run_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.defaults:
        return print_defaults()
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("stopout: a subcommand or --defaults is required", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DegenerateLabelsError as exc:
        print(f"degenerate labels: {exc}", file=sys.stderr)
        return 4
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
