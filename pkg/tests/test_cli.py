import json

import pytest

from droneradio import cli
from droneradio._io import canonical_json
from droneradio.config import DEFAULT_CONFIG, ConfigError, validate_config
from droneradio.features import DATASET_CSV_HEADER

SMALL_CONFIG = {
    "schema_version": 1,
    "seed": 3,
    "layout": {"rings": 1},
    "placement": {"indoor": 10, "outdoor": 20, "aerial_per_height": 10,
                  "aerial_heights_m": [60.0, 300.0]},
}


def write_config(tmp_path, overrides=None, name="config.json"):
    cfg = json.loads(json.dumps(SMALL_CONFIG))
    for key, value in (overrides or {}).items():
        cfg[key] = value
    path = tmp_path / name
    path.write_text(canonical_json(cfg))
    return path


def run(*argv):
    return cli.main(list(argv))


# --- config validation --------------------------------------------------------

def test_default_config_validates():
    cfg = validate_config(DEFAULT_CONFIG)
    assert cfg.rings == 1
    assert cfg.placement.aerial_heights_m[-1] == 300.0


def test_unknown_keys_rejected_with_path():
    with pytest.raises(ConfigError, match="unknown key layout.isd"):
        validate_config({"layout": {"isd": 500}})
    with pytest.raises(ConfigError, match="unknown key turbo"):
        validate_config({"turbo": True})


def test_field_errors_name_the_field():
    with pytest.raises(ConfigError, match="layout.rings"):
        validate_config({"layout": {"rings": -1}})
    with pytest.raises(ConfigError, match="ml.test_fraction"):
        validate_config({"ml": {"test_fraction": 1.5}})
    with pytest.raises(ConfigError, match="schema_version"):
        validate_config({"schema_version": 99})


# --- subcommands ----------------------------------------------------------------

def test_help_for_every_subcommand(capsys):
    assert run("--help") == 0
    for name in ["layout", "simulate", "train", "evaluate", "grid", "gate",
                 "trial", "synth-trial", "oracle-tree"]:
        assert run(name, "--help") == 0
        out = capsys.readouterr().out
        assert "--out-dir" in out


def test_unknown_flag_is_usage_error(tmp_path):
    assert run("simulate", "--bogus") == 64
    assert run("nonsense") == 64


def test_layout_writes_csv_and_manifest(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run("layout", "--config", str(cfg), "--out-dir", str(out)) == 0
    lines = (out / "layout.csv").read_text().splitlines()
    assert lines[0].startswith("cell_id,site_index,site_x_m")
    assert len(lines) == 1 + 21  # header + 7 sites x 3 sectors
    manifest = json.loads((out / "manifest_layout.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["seed"] == 3
    assert manifest["outputs"] == ["layout.csv"]
    assert manifest["config_sha256"]


def test_simulate_is_byte_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out1)) == 0
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out2)) == 0
    assert (out1 / "dataset.csv").read_bytes() == (out2 / "dataset.csv").read_bytes()
    assert (out1 / "radio_samples.csv").read_bytes() == \
        (out2 / "radio_samples.csv").read_bytes()


def test_simulate_threads_do_not_change_output(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "t1", tmp_path / "t4"
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out1),
               "--threads", "1") == 0
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out2),
               "--threads", "4") == 0
    assert (out1 / "dataset.csv").read_bytes() == (out2 / "dataset.csv").read_bytes()


def test_simulate_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "s3", tmp_path / "s9"
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out1)) == 0
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out2),
               "--seed", "9") == 0
    assert (out1 / "dataset.csv").read_bytes() != (out2 / "dataset.csv").read_bytes()
    manifest = json.loads((out2 / "manifest_simulate.json").read_text())
    assert manifest["seed"] == 9


def test_simulate_zero_drops_writes_headers_only(tmp_path):
    cfg = write_config(tmp_path, {"placement": {"indoor": 0, "outdoor": 0,
                                                "aerial_per_height": 0,
                                                "aerial_heights_m": []}})
    out = tmp_path / "empty"
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out)) == 0
    assert (out / "dataset.csv").read_text() == ",".join(DATASET_CSV_HEADER) + "\n"


def test_simulate_dataset_has_both_labels(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "both"
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out)) == 0
    body = (out / "dataset.csv").read_text()
    assert ",drone" in body and ",terrestrial" in body


def test_invalid_config_fails_with_manifest(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"layout": {"rings": -2}}')
    out = tmp_path / "out"
    assert run("simulate", "--config", str(bad), "--out-dir", str(out)) == 65
    manifest = json.loads((out / "manifest_simulate.json").read_text())
    assert manifest["status"] == "error"
    assert "layout.rings" in manifest["error"]


def simulate_small(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "sim"
    assert run("simulate", "--config", str(cfg), "--out-dir", str(out)) == 0
    return out / "dataset.csv"


def test_train_models_and_determinism(tmp_path):
    dataset = simulate_small(tmp_path)
    out1, out2 = tmp_path / "m1", tmp_path / "m2"
    for out in (out1, out2):
        assert run("train", "--dataset", str(dataset), "--model", "logistic",
                   "--seed", "1", "--out-dir", str(out)) == 0
        assert run("train", "--dataset", str(dataset), "--model", "tree",
                   "--seed", "1", "--out-dir", str(out)) == 0
    for name in ("model_logistic.json", "model_tree.json",
                 "metrics_logistic.json", "metrics_tree.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    metrics = json.loads((out1 / "metrics_tree.json").read_text())
    assert set(metrics) == {"accuracy", "precision", "recall", "tp", "fp",
                            "tn", "fn"}


def write_separable_dataset(tmp_path):
    rows = [",".join(DATASET_CSV_HEADER)]
    for k in range(20):
        rows.append(f"{k},outdoor,1.5,{-70.0 - k * 0.5!r},{8.0 + 0.1 * k!r},terrestrial")
    for k in range(20):
        rows.append(f"{20 + k},aerial,120.0,{-40.0 + k * 0.5!r},{2.0 - 0.05 * k!r},drone")
    path = tmp_path / "separable.csv"
    path.write_text("\n".join(rows) + "\n")
    return path


def test_train_separable_dataset_reaches_full_heldout_accuracy(tmp_path):
    dataset = write_separable_dataset(tmp_path)
    for model in ("logistic", "tree"):
        out = tmp_path / f"sep_{model}"
        assert run("train", "--dataset", str(dataset), "--model", model,
                   "--seed", "0", "--out-dir", str(out)) == 0
        metrics = json.loads((out / f"metrics_{model}.json").read_text())
        assert metrics["accuracy"] == 1.0


def test_train_single_class_dataset_fails(tmp_path):
    rows = [",".join(DATASET_CSV_HEADER)]
    for k in range(10):
        rows.append(f"{k},outdoor,1.5,{-70.0 - k!r},{8.0 + k * 0.3!r},terrestrial")
    path = tmp_path / "single.csv"
    path.write_text("\n".join(rows) + "\n")
    assert run("train", "--dataset", str(path), "--model", "logistic",
               "--out-dir", str(tmp_path / "o")) == 65


def test_tree_cli_matches_oracle_cli_on_small_dataset(tmp_path):
    from droneradio._io import write_csv
    from droneradio.features import (dataset_csv_rows, dataset_from_csv,
                                     split_train_test)

    dataset = write_separable_dataset(tmp_path)  # 40 rows
    fast_out = tmp_path / "fast"
    assert run("train", "--dataset", str(dataset), "--model", "tree",
               "--seed", "0", "--out-dir", str(fast_out)) == 0
    # hand the oracle subcommand exactly the rows the train split used
    ds = dataset_from_csv(dataset)
    train, _ = split_train_test(ds, test_fraction=0.3, seed=0)
    train_csv = tmp_path / "train_rows.csv"
    write_csv(train_csv, DATASET_CSV_HEADER, dataset_csv_rows(train))
    oracle_out = tmp_path / "oracle"
    assert run("oracle-tree", "--dataset", str(train_csv),
               "--out-dir", str(oracle_out)) == 0
    fast = json.loads((fast_out / "model_tree.json").read_text())
    oracle = json.loads((oracle_out / "oracle_model.json").read_text())
    assert fast["parameters"]["nodes"] == oracle["parameters"]["nodes"]


def test_evaluate_writes_metrics(tmp_path):
    dataset = write_separable_dataset(tmp_path)
    out = tmp_path / "ev"
    assert run("train", "--dataset", str(dataset), "--model", "tree",
               "--out-dir", str(out)) == 0
    assert run("evaluate", "--model", str(out / "model_tree.json"),
               "--dataset", str(dataset), "--out-dir", str(out)) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["accuracy"] == 1.0


def test_grid_runs_and_rejects_stale_model(tmp_path):
    dataset = write_separable_dataset(tmp_path)
    out = tmp_path / "g"
    assert run("train", "--dataset", str(dataset), "--model", "logistic",
               "--out-dir", str(out)) == 0
    assert run("grid", "--model", str(out / "model_logistic.json"),
               "--out-dir", str(out), "--steps-rssi", "10",
               "--steps-rsrp-std", "8") == 0
    lines = (out / "grid.csv").read_text().splitlines()
    assert lines[0] == "rsrp_std_db,rssi_dbm,probability"
    assert len(lines) == 1 + 80
    stale = json.loads((out / "model_logistic.json").read_text())
    stale["format_version"] = 99
    stale_path = tmp_path / "stale.json"
    stale_path.write_text(json.dumps(stale))
    assert run("grid", "--model", str(stale_path), "--out-dir", str(out)) == 65


def test_gate_exit_codes_with_kpi_files(tmp_path):
    passing = tmp_path / "pass.json"
    passing.write_text(json.dumps({
        "uplink_rate_bps": {"value": 1e9, "source": "simulated"},
        "downlink_rate_bps": {"value": 1e9, "source": "simulated"},
        "e2e_latency_ms": {"value": 10, "source": "simulated"},
        "network_latency_ms": {"value": 5, "source": "simulated"},
        "positioning_accuracy_m": {"value": 0.5, "source": "simulated"},
        "max_reliable_height_m": {"value": 500, "source": "simulated"}}))
    failing = tmp_path / "fail.json"
    failing.write_text(json.dumps({
        "e2e_latency_ms": {"value": 250, "source": "field_log"}}))
    empty = tmp_path / "empty.json"
    empty.write_text("{}")
    out = tmp_path / "gates"
    assert run("gate", "--application", "control_and_command",
               "--kpis", str(passing), "--out-dir", str(out)) == 0
    assert run("gate", "--application", "remote_real_time_control",
               "--kpis", str(failing), "--out-dir", str(out)) == 1
    assert run("gate", "--application", "control_and_command",
               "--kpis", str(empty), "--out-dir", str(out)) == 2
    report = json.loads((out / "gate_report.json").read_text())
    assert report["verdict"] == "pass-with-gaps"


def test_gate_unknown_application_is_data_error(tmp_path):
    kpis = tmp_path / "k.json"
    kpis.write_text("{}")
    assert run("gate", "--application", "teleportation", "--kpis", str(kpis),
               "--out-dir", str(tmp_path / "o")) == 65


def test_gate_on_synthetic_trial(tmp_path):
    out = tmp_path / "synth"
    assert run("synth-trial", "--seed", "0", "--out-dir", str(out)) == 0
    trial = out / "synth_trial.csv"
    assert run("gate", "--application", "remote_real_time_control",
               "--trial", str(trial), "--bins", "0:150,150:400",
               "--height-bin", "0:150", "--out-dir", str(out)) == 1
    assert run("gate", "--application", "control_and_command",
               "--trial", str(trial), "--bins", "0:150,150:400",
               "--height-bin", "0:150", "--out-dir", str(out)) == 2
    report = json.loads((out / "gate_report.json").read_text())
    assert report["dimensions"]["uplink_rate_bps"]["status"] == "pass"


def test_gate_trial_requires_bins(tmp_path):
    out = tmp_path / "synth2"
    assert run("synth-trial", "--out-dir", str(out)) == 0
    assert run("gate", "--application", "control_and_command",
               "--trial", str(out / "synth_trial.csv"),
               "--out-dir", str(out)) == 64


def test_trial_summary_outputs(tmp_path):
    out = tmp_path / "tr"
    assert run("synth-trial", "--seed", "2", "--samples-per-height", "50",
               "--out-dir", str(out)) == 0
    assert run("trial", "--input", str(out / "synth_trial.csv"),
               "--bins", "0:150,150:400",
               "--band", "latency_ms=200:300", "--out-dir", str(out)) == 0
    summary = json.loads((out / "trial_summary.json").read_text())
    assert summary["total_count"] == 150
    assert (out / "trial_summary.csv").read_text().startswith("bin_low_m,")


def test_missing_input_file_is_data_error(tmp_path):
    assert run("train", "--dataset", str(tmp_path / "nope.csv"),
               "--model", "tree", "--out-dir", str(tmp_path / "o")) == 65
    manifest = json.loads((tmp_path / "o" / "manifest_train.json").read_text())
    assert manifest["status"] == "error"
