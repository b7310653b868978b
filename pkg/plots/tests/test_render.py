"""Tests for the figure-rendering scripts (consume CSV files only)."""

import csv
import importlib.util
import json
import sys
from pathlib import Path

import pytest

RENDER = Path(__file__).resolve().parents[1] / "render.py"
spec_mod = importlib.util.spec_from_file_location("render", RENDER)
render = importlib.util.module_from_spec(spec_mod)
spec_mod.loader.exec_module(render)


def write_sweep_csv(path, censor_first=False):
    rows = [
        {"delta_rms": f"{x:.17e}", "mean_infidelity": f"{x**6:.17e}",
         "stderr": f"{0.1 * x**6:.17e}", "slope": "6.0",
         "num_draws": "6", "censored": "false"}
        for x in (0.1, 0.2, 0.4, 0.8)
    ]
    if censor_first:
        rows[0]["censored"] = "true"
        rows[0]["slope"] = ""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\r\n")
        w.writeheader()
        w.writerows(rows)


def write_weights_csv(path, n=2):
    rel = [0.3, 0.7] + [0.0] * (n - 2)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=("weight", "absolute", "relative"),
                           lineterminator="\r\n")
        w.writeheader()
        w.writerow({"weight": "0", "absolute": "0.99", "relative": "0.0"})
        for k in range(1, n + 1):
            w.writerow({"weight": str(k),
                        "absolute": f"{0.01 * rel[k - 1]:.6e}",
                        "relative": f"{rel[k - 1]:.6e}"})


def make_spec(tmp_path, kind, inputs, output, fmt="svg"):
    spec = {"kind": kind, "inputs": inputs, "output": str(output),
            "format": fmt, "title": "test"}
    p = tmp_path / f"{kind}.json"
    p.write_text(json.dumps(spec))
    return str(p)


def test_sweep_two_series_byte_stable(tmp_path):
    c1, c2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(c1)
    write_sweep_csv(c2)
    before = (c1.read_bytes(), c2.read_bytes())
    out = tmp_path / "fig.svg"
    spec = make_spec(tmp_path, "sweep",
                     [{"csv": str(c1), "label": "star"},
                      {"csv": str(c2), "label": "chain"}], out)
    assert render.main(["--spec", spec]) == 0
    first = out.read_bytes()
    assert render.main(["--spec", spec]) == 0
    assert out.read_bytes() == first  # idempotent, byte-stable
    assert (c1.read_bytes(), c2.read_bytes()) == before  # inputs untouched
    assert b"star" in first and b"chain" in first


def test_sweep_single_series_and_censor_note(tmp_path):
    c1 = tmp_path / "a.csv"
    write_sweep_csv(c1, censor_first=True)
    out = tmp_path / "fig.svg"
    spec = make_spec(tmp_path, "sweep", [{"csv": str(c1)}], out)
    assert render.main(["--spec", spec]) == 0
    text = out.read_text()
    assert "numerical floor omitted" in text


def test_weights_two_qubit_only_low_weights(tmp_path):
    c1 = tmp_path / "w.csv"
    write_weights_csv(c1, n=2)
    out = tmp_path / "w.svg"
    spec = make_spec(tmp_path, "weights", [{"csv": str(c1), "label": "n=2"}],
                     out)
    assert render.main(["--spec", spec]) == 0
    text = out.read_text()
    assert "relative shares sum to 1.000000" in text


def test_missing_column_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("delta_rms,foo\r\n0.1,2\r\n")
    out = tmp_path / "fig.svg"
    spec = make_spec(tmp_path, "sweep", [{"csv": str(bad)}], out)
    assert render.main(["--spec", spec]) == 2
    assert not out.exists()


def test_bad_spec_rejected(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"kind": "nope", "inputs": [], "output": "x"}))
    assert render.main(["--spec", str(p)]) == 2


def test_png_output(tmp_path):
    c1 = tmp_path / "a.csv"
    write_sweep_csv(c1)
    out = tmp_path / "fig.png"
    spec = make_spec(tmp_path, "sweep", [{"csv": str(c1)}], out, fmt="png")
    assert render.main(["--spec", spec]) == 0
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
