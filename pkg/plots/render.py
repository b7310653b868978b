#!/usr/bin/env python3
"""Render figures from isingdd CSV outputs.

Usage: render.py --spec figure.json

The figure spec is a JSON object:

    {
      "kind": "sweep" | "weights",
      "inputs": [{"csv": "star6.csv", "label": "star n=6"}, ...],
      "title": "optional figure title",
      "output": "figure.svg",
      "format": "svg" (default) | "png"
    }

"sweep" expects CSVs with columns delta_rms, mean_infidelity, stderr,
slope, censored and draws a two-panel log-log figure (infidelity on top,
local slope below).  Censored points (integrator floor) are omitted and
counted in a footer note.

"weights" expects CSVs with columns weight, absolute, relative and draws
relative (left) and absolute (right) error contributions by Pauli weight.

Rendering never modifies the input CSVs, and repeated runs produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "isingdd-plots"

import matplotlib.pyplot as plt  # noqa: E402


class SpecError(Exception):
    pass


def read_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SpecError(f"{path}: empty CSV")
    return rows


def require_columns(rows: list[dict], path: str, columns) -> None:
    missing = [c for c in columns if c not in rows[0]]
    if missing:
        raise SpecError(f"{path}: missing columns {missing}")


def _f(value: str) -> float | None:
    return float(value) if value not in ("", None) else None


def load_spec(path: str) -> dict:
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError("figure spec must be a JSON object")
    for key in ("kind", "inputs", "output"):
        if key not in spec:
            raise SpecError(f"figure spec missing {key!r}")
    if spec["kind"] not in ("sweep", "weights"):
        raise SpecError(f"unknown figure kind {spec['kind']!r}")
    if not isinstance(spec["inputs"], list) or not spec["inputs"]:
        raise SpecError("inputs must be a nonempty list")
    for inp in spec["inputs"]:
        if not isinstance(inp, dict) or "csv" not in inp:
            raise SpecError("each input needs a 'csv' path")
    return spec


def save(fig, spec: dict) -> None:
    fmt = spec.get("format", "svg")
    if fmt not in ("svg", "png"):
        raise SpecError(f"unknown output format {fmt!r}")
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(spec["output"], format=fmt, metadata=metadata)
    plt.close(fig)


def render_sweep(spec: dict) -> None:
    fig, (ax_f, ax_s) = plt.subplots(
        2, 1, sharex=True, figsize=(5.0, 6.0),
        gridspec_kw={"height_ratios": [2, 1]})
    censored_total = 0
    for inp in spec["inputs"]:
        rows = read_rows(inp["csv"])
        require_columns(rows, inp["csv"],
                        ("delta_rms", "mean_infidelity", "slope"))
        label = inp.get("label", Path(inp["csv"]).stem)
        live = [r for r in rows if r.get("censored", "false") != "true"]
        censored_total += len(rows) - len(live)
        x = [_f(r["delta_rms"]) for r in live]
        y = [_f(r["mean_infidelity"]) for r in live]
        err = [_f(r.get("stderr", "")) or 0.0 for r in live]
        line = ax_f.errorbar(x, y, yerr=err, marker="o", ms=4,
                             capsize=2, label=label)[0]
        sl = [(_f(r["delta_rms"]), _f(r["slope"]))
              for r in live if r.get("slope", "") != ""]
        if sl:
            ax_s.plot([p[0] for p in sl], [p[1] for p in sl], marker="s",
                      ms=4, color=line.get_color(), label=label)
    ax_f.set_xscale("log")
    ax_f.set_yscale("log")
    ax_f.set_ylabel("mean infidelity 1 - F")
    ax_f.legend(fontsize=8)
    ax_s.set_xscale("log")
    ax_s.set_xlabel(r"shift dispersion $\Delta_\mathrm{rms}$ [$1/\tau_p$]")
    ax_s.set_ylabel("local log-log slope")
    ax_s.grid(True, alpha=0.3)
    if spec.get("title"):
        ax_f.set_title(spec["title"])
    if censored_total:
        fig.text(0.01, 0.01,
                 f"{censored_total} point(s) at the numerical floor omitted",
                 fontsize=7, style="italic")
    fig.tight_layout(rect=(0, 0.02, 1, 1))
    save(fig, spec)


def render_weights(spec: dict) -> None:
    fig, (ax_rel, ax_abs) = plt.subplots(1, 2, figsize=(7.5, 3.6))
    n_series = len(spec["inputs"])
    width = 0.8 / n_series
    rel_sums = []
    for k, inp in enumerate(spec["inputs"]):
        rows = read_rows(inp["csv"])
        require_columns(rows, inp["csv"], ("weight", "absolute", "relative"))
        label = inp.get("label", Path(inp["csv"]).stem)
        rows = [r for r in rows if int(r["weight"]) >= 1]
        w = [int(r["weight"]) for r in rows]
        rel = [_f(r["relative"]) for r in rows]
        ab = [_f(r["absolute"]) for r in rows]
        off = (k - (n_series - 1) / 2) * width
        ax_rel.bar([x + off for x in w], rel, width=width, label=label)
        ax_abs.bar([x + off for x in w], ab, width=width, label=label)
        rel_sums.append(sum(rel))
    for ax, name in ((ax_rel, "relative share"), (ax_abs, "absolute |c|^2")):
        ax.set_xlabel("Pauli error weight")
        ax.set_ylabel(name)
        ax.legend(fontsize=8)
    ax_abs.set_yscale("log")
    if spec.get("title"):
        fig.suptitle(spec["title"])
    fig.text(0.01, 0.01,
             "relative shares sum to "
             + ", ".join(f"{s:.6f}" for s in rel_sums),
             fontsize=7, style="italic")
    fig.tight_layout(rect=(0, 0.04, 1, 1))
    save(fig, spec)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", required=True, help="figure spec JSON")
    args = ap.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        if spec["kind"] == "sweep":
            render_sweep(spec)
        else:
            render_weights(spec)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
