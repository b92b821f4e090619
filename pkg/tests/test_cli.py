"""End-to-end command line flows, run in process through cli.main."""

import csv
import json

import pytest

from dualpath import cli

DUAL_RUN = {
    "path": "dual",
    "input": {"kind": "coherent", "alpha": [1.0, 0.5]},
    "chain": {"g1": 200.0, "g2": 300.0, "n_amp1": 1.0, "n_amp2": 1.0},
    "shots": 4000,
    "seed": 3,
    "blocks": 4,
    "max_order": 2,
}

SINGLE_CHAIN = {"g1": 200.0, "n_amp1": 1.0}


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def simulate(tmp_path, name, run):
    outdir = tmp_path / name
    cfg = write_json(tmp_path / f"{name}.json", run)
    assert cli.main(["simulate", "--config", cfg, "--out", str(outdir)]) == 0
    return outdir / "shots.csv", outdir / "model.json"


def test_simulate_writes_shots_and_model(tmp_path):
    shots, model = simulate(tmp_path, "run", DUAL_RUN)
    assert shots.exists() and model.exists()
    with open(shots) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "x1,p1,x2,p2"
    assert len(lines) == DUAL_RUN["shots"] + 1
    payload = read_json(model)
    assert payload["n_channels"] == 2
    assert payload["run"]["seed"] == 3
    assert len(payload["gains"]) == 2
    assert payload["truth"]["signal"]["entries"]["0,1"] == pytest.approx([1.0, 0.5])


def test_simulate_overrides(tmp_path):
    outdir = tmp_path / "o"
    cfg = write_json(tmp_path / "cfg.json", DUAL_RUN)
    rc = cli.main(
        ["simulate", "--config", cfg, "--out", str(outdir), "--shots", "50", "--seed", "9"]
    )
    assert rc == 0
    payload = read_json(outdir / "model.json")
    assert payload["run"]["shots"] == 50
    assert payload["run"]["seed"] == 9


def test_dpm_reconstruction_round_trip(tmp_path):
    shots, model = simulate(tmp_path, "run", DUAL_RUN)
    report_path = tmp_path / "report.json"
    rc = cli.main(
        [
            "reconstruct",
            "--method",
            "dpm",
            "--shots",
            str(shots),
            "--model",
            str(model),
            "--out",
            str(report_path),
        ]
    )
    assert rc == 0
    report = read_json(report_path)
    assert report["method"] == "dpm"
    assert report["n_shots"] == 4000
    re, im = report["signal"]["entries"]["0,1"]
    err = report["signal"]["errors"]["0,1"]
    assert abs(complex(re, im) - (1.0 + 0.5j)) < 8 * err
    assert "envelope_moments" in report
    assert report["ancilla_mean_expected"] == [0.0, 0.0]


def test_spm_reconstruction_round_trip(tmp_path):
    signal_run = {
        "path": "single",
        "input": {"kind": "coherent", "alpha": [1.0, 0.5]},
        "chain": SINGLE_CHAIN,
        "shots": 4000,
        "seed": 11,
        "blocks": 4,
        "max_order": 2,
    }
    reference_run = dict(signal_run, input={"kind": "vacuum"}, seed=12)
    sig_shots, sig_model = simulate(tmp_path, "sig", signal_run)
    ref_shots, ref_model = simulate(tmp_path, "ref", reference_run)
    report_path = tmp_path / "report.json"
    rc = cli.main(
        [
            "reconstruct",
            "--method",
            "spm",
            "--shots",
            str(sig_shots),
            "--model",
            str(sig_model),
            "--reference-shots",
            str(ref_shots),
            "--reference-model",
            str(ref_model),
            "--out",
            str(report_path),
        ]
    )
    assert rc == 0
    report = read_json(report_path)
    re, im = report["signal"]["entries"]["0,1"]
    err = report["signal"]["errors"]["0,1"]
    assert abs(complex(re, im) - (1.0 + 0.5j)) < 8 * err
    assert report["reference_amplitude"] == [0.0, 0.0]


def test_spm_requires_reference_run(tmp_path):
    run = {
        "path": "single",
        "input": {"kind": "vacuum"},
        "chain": SINGLE_CHAIN,
        "shots": 100,
        "seed": 0,
        "blocks": 2,
        "max_order": 2,
    }
    shots, model = simulate(tmp_path, "solo", run)
    rc = cli.main(
        ["reconstruct", "--method", "spm", "--shots", str(shots), "--model", str(model)]
    )
    assert rc == 2


def test_refstate_witness_flow(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DUALPATH_OUTDIR", str(tmp_path / "default_out"))
    squeezed_run = {
        "path": "dual",
        "input": {"kind": "squeezed", "xi": [0.0, 0.5]},
        "chain": {},
        "shots": 100000,
        "seed": 21,
        "blocks": 10,
        "max_order": 2,
    }
    vacuum_run = dict(squeezed_run, input={"kind": "vacuum"}, seed=22)
    sig_shots, sig_model = simulate(tmp_path, "sq", squeezed_run)
    ref_shots, ref_model = simulate(tmp_path, "vac", vacuum_run)
    report_path = tmp_path / "refstate.json"
    rc = cli.main(
        [
            "reconstruct",
            "--method",
            "refstate",
            "--shots",
            str(sig_shots),
            "--model",
            str(sig_model),
            "--reference-shots",
            str(ref_shots),
            "--reference-model",
            str(ref_model),
            "--out",
            str(report_path),
        ]
    )
    assert rc == 0
    report = read_json(report_path)
    assert len(report["blocks"]["output_moments"]) == 10

    witness_path = tmp_path / "witness.json"
    rc = cli.main(
        ["witness", "--moments", str(report_path), "--out", str(witness_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "verdict:" in out
    verdict = read_json(witness_path)
    assert verdict["verdict"] in ("entangled", "not_detected")
    assert verdict["n_blocks"] == 10
    assert isinstance(verdict["kernel"], float)

    # without block tables the verdict is withheld, exit code 3
    stripped = read_json(report_path)
    del stripped["blocks"]
    bare = write_json(tmp_path / "bare.json", stripped)
    assert cli.main(["witness", "--moments", bare]) == 3


def test_refstate_rejects_bright_reference(tmp_path):
    run = dict(DUAL_RUN, shots=200, blocks=2)
    shots, model = simulate(tmp_path, "run", run)
    rc = cli.main(
        [
            "reconstruct",
            "--method",
            "refstate",
            "--shots",
            str(shots),
            "--model",
            str(model),
            "--reference-shots",
            str(shots),
            "--reference-model",
            str(model),
        ]
    )
    assert rc == 2


def test_witness_rejects_non_refstate_report(tmp_path):
    path = write_json(tmp_path / "bad.json", {"method": "dpm"})
    assert cli.main(["witness", "--moments", path]) == 2


def test_unknown_run_key_fails(tmp_path):
    cfg = write_json(tmp_path / "c.json", dict(DUAL_RUN, extra=1))
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_unknown_input_kind_fails(tmp_path):
    cfg = write_json(tmp_path / "c.json", dict(DUAL_RUN, input={"kind": "cat"}))
    assert cli.main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_missing_config_is_io_error(tmp_path):
    rc = cli.main(
        ["simulate", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]
    )
    assert rc == 4


def test_ingest_normalizes_and_summarizes(tmp_path, capsys):
    raw = tmp_path / "raw.csv"
    raw.write_text("x1,p1\n0.1,0.2\n0.3,-0.4\n")
    out = tmp_path / "norm.csv"
    rc = cli.main(
        ["ingest", "--shots", str(raw), "--gains", "250.0", "--out", str(out)]
    )
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_shots"] == 2
    assert summary["n_channels"] == 1
    assert summary["gains"] == [250.0]
    assert summary["columns"]["x1"]["mean"] == pytest.approx(0.2)
    assert out.exists()


def test_ingest_rejects_bad_header(tmp_path):
    raw = tmp_path / "raw.csv"
    raw.write_text("a,b\n0.1,0.2\n")
    assert cli.main(["ingest", "--shots", str(raw), "--gains", "100.0"]) == 2


def test_compare_writes_table_and_fits(tmp_path):
    cfg = write_json(
        tmp_path / "cmp.json",
        {
            "input": {"kind": "coherent", "alpha": [1.0, 0.0]},
            "chain": {},
            "grid": {
                "shot_counts": [200],
                "amp_occupations": [1.0],
                "repetitions": 12,
                "n_blocks": 3,
                "max_order": 2,
                "seed": 5,
            },
            "moments": [[0, 1], [1, 1]],
        },
    )
    outdir = tmp_path / "cmp"
    assert cli.main(["compare", "--config", cfg, "--out", str(outdir)]) == 0
    with open(outdir / "ratios.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert {row["l"] + row["m"] for row in rows} == {"01", "11"}
    fits = read_json(outdir / "fits.json")
    # one shot count cannot support a slope fit; the failure is recorded
    assert "error" in fits["shot_scaling"]["1.0"]["0,1"]["dpm"]
    resolved = read_json(outdir / "config.json")
    assert resolved["moments"] == [[0, 1], [1, 1]]


def test_compare_rejects_unknown_keys(tmp_path):
    cfg = write_json(tmp_path / "cmp.json", {"grid": {"bogus": 1}})
    assert cli.main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 2
