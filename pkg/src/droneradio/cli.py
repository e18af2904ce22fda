"""Command-line pipeline: layout -> simulate -> train -> grid/evaluate ->
gate, plus trial-log analysis and test oracles.

Every subcommand writes into --out-dir and leaves a manifest_<command>.json
recording the artifact version, effective seed, config hash and outputs --
also on failure, with the error summary. Outputs are written atomically and
re-running with the same inputs reproduces them byte for byte.

Exit codes: 0 success (for `gate`: requirements met), 1 gate verdict fail,
2 gate verdict pass-with-gaps, 64 usage error, 65 invalid config or data,
70 unexpected internal error. Configuration comes only from files and
flags; no environment variables are consulted.
"""

import argparse
import json
import sys
import traceback
from pathlib import Path

from droneradio import __version__, fieldtrial, ml, treeoracle
from droneradio._io import canonical_json, write_csv, write_json
from droneradio.config import (DEFAULT_CONFIG, ConfigError, config_sha256,
                               load_config, validate_config)
from droneradio.deployment import (LAYOUT_CSV_HEADER, build_hex_layout,
                                   layout_csv_rows, place_ues)
from droneradio.features import (DATASET_CSV_HEADER, dataset_csv_rows,
                                 dataset_from_csv, dataset_from_samples,
                                 standardize, split_train_test)
from droneradio.fieldtrial import (SUMMARY_CSV_HEADER, TRIAL_CSV_HEADER,
                                   TrialFormatError, ingest_csv, summarize,
                                   summary_csv_rows, synthesize_trial,
                                   trial_csv_rows, trial_gate)
from droneradio.ml import (GRID_CSV_HEADER, GridBounds, LogisticConfig,
                           TreeConfig, evaluate, grid_csv_rows, load_model,
                           model_to_json, probability_grid, train_logistic,
                           train_tree)
from droneradio.radio import SAMPLES_CSV_HEADER, compute_samples, samples_csv_rows
from droneradio.requirements import (KpiReport, UnknownApplicationError, gate,
                                     lookup_requirements)

EXIT_OK = 0
EXIT_GATE_FAIL = 1
EXIT_GATE_GAPS = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70

_VERDICT_EXIT = {"pass": EXIT_OK, "fail": EXIT_GATE_FAIL,
                 "pass-with-gaps": EXIT_GATE_GAPS}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors on exit code 64, keeping 0/1/2 for gate
    verdicts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_bins(text: str):
    bins = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ValueError(f"bad bin {part!r}; expected LOW:HIGH")
        bins.append((float(lo), float(hi)))
    return bins


def _parse_band(text: str):
    name, sep, rest = text.partition("=")
    if not sep:
        raise ValueError(f"bad band {text!r}; expected METRIC=LOW:HIGH")
    lo, sep, hi = rest.partition(":")
    if not sep:
        raise ValueError(f"bad band {text!r}; expected METRIC=LOW:HIGH")
    return name, (float(lo), float(hi))


def _load_effective_config(args):
    if args.config is not None:
        cfg, raw = load_config(args.config)
    else:
        raw = DEFAULT_CONFIG
        cfg = validate_config(raw)
    seed = args.seed if getattr(args, "seed", None) is not None else cfg.seed
    return cfg, raw, seed


def _build_layout(cfg):
    return build_hex_layout(cfg.rings, cfg.isd_m, template=cfg.template,
                            bs_height_m=cfg.bs_height_m)


def cmd_layout(args, out_dir, manifest):
    cfg, raw, seed = _load_effective_config(args)
    manifest["seed"] = seed
    manifest["config_sha256"] = config_sha256(raw)
    layout = _build_layout(cfg)
    path = out_dir / "layout.csv"
    write_csv(path, LAYOUT_CSV_HEADER, layout_csv_rows(layout))
    manifest["outputs"].append(path.name)
    return EXIT_OK


def cmd_simulate(args, out_dir, manifest):
    cfg, raw, seed = _load_effective_config(args)
    manifest["seed"] = seed
    manifest["config_sha256"] = config_sha256(raw)
    layout = _build_layout(cfg)
    drops = place_ues(layout, cfg.placement, seed)
    samples = compute_samples(layout, drops, cfg.channel, seed,
                              threads=args.threads)
    dataset = dataset_from_samples(samples)
    dataset_path = out_dir / "dataset.csv"
    write_csv(dataset_path, DATASET_CSV_HEADER, dataset_csv_rows(dataset))
    samples_path = out_dir / "radio_samples.csv"
    write_csv(samples_path, SAMPLES_CSV_HEADER, samples_csv_rows(samples))
    manifest["outputs"].extend([dataset_path.name, samples_path.name])
    return EXIT_OK


def cmd_train(args, out_dir, manifest):
    manifest["seed"] = args.seed
    dataset = dataset_from_csv(args.dataset)
    train, test = split_train_test(dataset, test_fraction=args.test_fraction,
                                   seed=args.seed)
    if args.model == "logistic":
        train_z, _ = standardize(train)
        model = train_logistic(train_z, LogisticConfig(
            learning_rate=args.learning_rate, max_iters=args.max_iters,
            tolerance=args.tolerance, l2=args.l2))
    else:
        model = train_tree(train, TreeConfig(max_depth=args.max_depth,
                                             min_leaf=args.min_leaf))
    model_path = out_dir / f"model_{args.model}.json"
    write_json(model_path, model_to_json(model))
    metrics = evaluate(model, test, threshold=args.threshold)
    metrics_path = out_dir / f"metrics_{args.model}.json"
    write_json(metrics_path, metrics.to_json())
    manifest["outputs"].extend([model_path.name, metrics_path.name])
    return EXIT_OK


def cmd_evaluate(args, out_dir, manifest):
    model = load_model(args.model)
    dataset = dataset_from_csv(args.dataset)
    metrics = evaluate(model, dataset, threshold=args.threshold)
    path = out_dir / "metrics.json"
    write_json(path, metrics.to_json())
    manifest["outputs"].append(path.name)
    sys.stdout.write(canonical_json(metrics.to_json()))
    return EXIT_OK


def cmd_grid(args, out_dir, manifest):
    model = load_model(args.model)
    bounds = GridBounds(rsrp_std_min=args.rsrp_std_min,
                        rsrp_std_max=args.rsrp_std_max,
                        rssi_min=args.rssi_min, rssi_max=args.rssi_max)
    grid = probability_grid(model, bounds, steps_rsrp_std=args.steps_rsrp_std,
                            steps_rssi=args.steps_rssi)
    path = out_dir / "grid.csv"
    write_csv(path, GRID_CSV_HEADER, grid_csv_rows(grid))
    manifest["outputs"].append(path.name)
    return EXIT_OK


def cmd_gate(args, out_dir, manifest):
    profile = lookup_requirements(args.application)
    if args.kpis is not None:
        with open(args.kpis) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{args.kpis}: invalid JSON: {exc}") from None
        report = gate(KpiReport.from_json(raw), profile)
    else:
        records = ingest_csv(args.trial)
        bins = _parse_bins(args.bins)
        summary = summarize(records, bins)
        report = trial_gate(summary, profile, _parse_bins(args.height_bin)[0])
    path = out_dir / "gate_report.json"
    write_json(path, report.to_json())
    manifest["outputs"].append(path.name)
    sys.stdout.write(report.to_text())
    return _VERDICT_EXIT[report.verdict]


def cmd_trial(args, out_dir, manifest):
    records = ingest_csv(args.input)
    bands = dict(_parse_band(b) for b in args.band or [])
    summary = summarize(records, _parse_bins(args.bins), bands=bands)
    json_path = out_dir / "trial_summary.json"
    write_json(json_path, summary.to_json())
    csv_path = out_dir / "trial_summary.csv"
    write_csv(csv_path, SUMMARY_CSV_HEADER, summary_csv_rows(summary))
    manifest["outputs"].extend([json_path.name, csv_path.name])
    return EXIT_OK


def cmd_synth_trial(args, out_dir, manifest):
    manifest["seed"] = args.seed
    records = synthesize_trial(args.seed,
                               samples_per_height=args.samples_per_height)
    path = out_dir / "synth_trial.csv"
    write_csv(path, TRIAL_CSV_HEADER, trial_csv_rows(records))
    manifest["outputs"].append(path.name)
    return EXIT_OK


def cmd_oracle_tree(args, out_dir, manifest):
    dataset = dataset_from_csv(args.dataset)
    model = treeoracle.train_tree_exhaustive(
        dataset, TreeConfig(max_depth=args.max_depth, min_leaf=args.min_leaf))
    path = out_dir / "oracle_model.json"
    write_json(path, model_to_json(model))
    manifest["outputs"].append(path.name)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="droneradio",
                     description="Cellular radio simulator and drone-UE "
                                 "detection toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add_out_dir(p):
        p.add_argument("--out-dir", default=".",
                       help="directory for outputs and the run manifest")

    p = sub.add_parser("layout", help="write the cell layout CSV")
    p.add_argument("--config", help="experiment config JSON (defaults used "
                                    "when omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    add_out_dir(p)
    p.set_defaults(handler=cmd_layout)

    p = sub.add_parser("simulate", help="simulate drops and write the "
                                        "feature dataset and radio samples")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; output is identical for any value")
    add_out_dir(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("train", help="train a classifier on a dataset CSV")
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--model", required=True, choices=["logistic", "tree"])
    p.add_argument("--seed", type=int, default=0, help="train/test split seed")
    p.add_argument("--test-fraction", type=float,
                   default=DEFAULT_CONFIG["ml"]["test_fraction"])
    p.add_argument("--learning-rate", type=float,
                   default=DEFAULT_CONFIG["ml"]["learning_rate"])
    p.add_argument("--max-iters", type=int, default=DEFAULT_CONFIG["ml"]["max_iters"])
    p.add_argument("--tolerance", type=float,
                   default=DEFAULT_CONFIG["ml"]["tolerance"])
    p.add_argument("--l2", type=float, default=DEFAULT_CONFIG["ml"]["l2"])
    p.add_argument("--max-depth", type=int, default=DEFAULT_CONFIG["ml"]["max_depth"])
    p.add_argument("--min-leaf", type=int, default=DEFAULT_CONFIG["ml"]["min_leaf"])
    p.add_argument("--threshold", type=float,
                   default=DEFAULT_CONFIG["ml"]["threshold"])
    add_out_dir(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a dataset CSV")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--threshold", type=float,
                   default=DEFAULT_CONFIG["ml"]["threshold"])
    add_out_dir(p)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("grid", help="export a probability grid for a saved model")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--rssi-min", type=float,
                   default=DEFAULT_CONFIG["grid"]["rssi_min"])
    p.add_argument("--rssi-max", type=float,
                   default=DEFAULT_CONFIG["grid"]["rssi_max"])
    p.add_argument("--rsrp-std-min", type=float,
                   default=DEFAULT_CONFIG["grid"]["rsrp_std_min"])
    p.add_argument("--rsrp-std-max", type=float,
                   default=DEFAULT_CONFIG["grid"]["rsrp_std_max"])
    p.add_argument("--steps-rssi", type=int,
                   default=DEFAULT_CONFIG["grid"]["steps_rssi"])
    p.add_argument("--steps-rsrp-std", type=int,
                   default=DEFAULT_CONFIG["grid"]["steps_rsrp_std"])
    add_out_dir(p)
    p.set_defaults(handler=cmd_grid)

    p = sub.add_parser("gate", help="check KPIs or a trial log against an "
                                    "application's requirements")
    p.add_argument("--application", required=True,
                   help="application name from the requirements registry")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--kpis", help="KPI report JSON path")
    source.add_argument("--trial", help="trial log CSV path")
    p.add_argument("--bins", help="height bins LOW:HIGH[,LOW:HIGH...] "
                                  "(required with --trial)")
    p.add_argument("--height-bin", help="bin LOW:HIGH to gate "
                                        "(required with --trial)")
    add_out_dir(p)
    p.set_defaults(handler=cmd_gate)

    p = sub.add_parser("trial", help="summarize a trial log per height bin")
    p.add_argument("--input", required=True, help="trial log CSV path")
    p.add_argument("--bins", required=True,
                   help="height bins LOW:HIGH[,LOW:HIGH...]")
    p.add_argument("--band", action="append",
                   help="value band METRIC=LOW:HIGH (repeatable)")
    add_out_dir(p)
    p.set_defaults(handler=cmd_trial)

    p = sub.add_parser("synth-trial", help="generate a synthetic trial log")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-per-height", type=int, default=200)
    add_out_dir(p)
    p.set_defaults(handler=cmd_synth_trial)

    p = sub.add_parser("oracle-tree", help="train the brute-force reference "
                                           "tree (for testing)")
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--max-depth", type=int, default=DEFAULT_CONFIG["ml"]["max_depth"])
    p.add_argument("--min-leaf", type=int, default=DEFAULT_CONFIG["ml"]["min_leaf"])
    add_out_dir(p)
    p.set_defaults(handler=cmd_oracle_tree)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "gate" and args.trial is not None:
        if args.bins is None or args.height_bin is None:
            sys.stderr.write("droneradio gate: --trial requires --bins and "
                             "--height-bin\n")
            return EXIT_USAGE

    out_dir = Path(args.out_dir)
    manifest = {"artifact_version": __version__, "command": args.command,
                "seed": None, "config_sha256": None, "outputs": [],
                "status": "ok", "error": None}
    manifest_path = out_dir / f"manifest_{args.command.replace('-', '_')}.json"

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        sys.stderr.write(f"droneradio {args.command}: cannot create output "
                         f"directory {out_dir}: {exc}\n")
        return EXIT_DATA

    try:
        code = args.handler(args, out_dir, manifest)
    except (ConfigError, TrialFormatError, UnknownApplicationError, ValueError,
            KeyError, OSError) as exc:
        manifest["status"] = "error"
        manifest["error"] = str(exc)
        _write_manifest(manifest_path, manifest)
        sys.stderr.write(f"droneradio {args.command}: error: {exc}\n")
        return EXIT_DATA
    except Exception:
        manifest["status"] = "error"
        manifest["error"] = traceback.format_exc(limit=5)
        _write_manifest(manifest_path, manifest)
        sys.stderr.write(f"droneradio {args.command}: internal error:\n")
        traceback.print_exc()
        return EXIT_INTERNAL

    _write_manifest(manifest_path, manifest)
    return code


def _write_manifest(path, manifest):
    try:
        write_json(path, manifest)
    except OSError:
        pass  # never mask the primary outcome over manifest IO


if __name__ == "__main__":
    sys.exit(main())
