"""Command-line experiment runner.

Subcommands: coeffs, find-pulse, simulate, sweep, weights, avgham-check,
bounds, run.  All numeric CSV fields are written in scientific notation
with 17 significant digits so reruns are byte-identical; all randomness
derives from explicit seeds.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import importlib.metadata
import io
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, avgham, network, propagator, pulse, scaling, sequences

__all__ = ["main"]


class ConfigError(Exception):
    """Invalid configuration or arguments (exit code 2)."""


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return f"{float(x):.17e}"


def _write_csv(path, header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")  # RFC 4180
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    data = buf.getvalue().encode()
    if path == "-":
        sys.stdout.write(data.decode())
    else:
        Path(path).write_bytes(data)
    return data


def _parse_angle(text: str) -> float:
    units = {"pi": math.pi, "pi/2": math.pi / 2, "pi/4": math.pi / 4,
             "-pi": -math.pi, "-pi/2": -math.pi / 2}
    if text in units:
        return units[text]
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad angle {text!r}") from None


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t != ""]
    except ValueError:
        raise ConfigError(f"bad float list {text!r}") from None


def _apply_threads(threads: int | None) -> None:
    if threads is None:
        env = os.environ.get("ISINGDD_THREADS")
        threads = int(env) if env else None
    if threads is None:
        return
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    try:
        import numba
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    except ImportError:  # pragma: no cover
        pass


def _shape_for(args, angle: float, axis: str = "x") -> pulse.PulseShape:
    if getattr(args, "shape_file", None):
        return pulse.shape_from_json(Path(args.shape_file).read_text())
    if args.pulse_order == 0:
        return pulse.generic_pulse(angle, axis=axis)
    return replace(pulse.find_self_refocusing(args.pulse_order, abs(angle)),
                   axis=axis)


def _graph_from_args(args) -> network.QubitGraph:
    if args.coupling is not None:
        J = args.coupling
    else:
        J = math.pi / (16 * args.nrep)  # design equation J tau_p = pi/(16 N_rep)
    return network.build_graph(args.graph, args.num_qubits, J)


def _gate_spec(args) -> sequences.GateSpec:
    targets = tuple(int(t) for t in args.targets.split(","))
    return sequences.GateSpec(kind=args.gate, targets=targets,
                              angle=_parse_angle(args.angle),
                              axis=args.axis, n_rep=args.nrep)


COEFF_FIELDS = ("phi0", "upsilon", "beta", "xi",
                "delta1", "delta2", "delta3", "delta4", "delta5")


def cmd_coeffs(args) -> int:
    shape = _shape_for(args, _parse_angle(args.angle))
    c = pulse.compute_coefficients(shape)
    _write_csv(args.output, COEFF_FIELDS,
               [[getattr(c, f) for f in COEFF_FIELDS]])
    return 0


def cmd_find_pulse(args) -> int:
    shape = pulse.find_self_refocusing(args.pulse_order,
                                       _parse_angle(args.angle),
                                       num_harmonics=args.num_harmonics,
                                       zero_xi=args.zero_xi)
    text = pulse.shape_to_json(shape)
    if args.output == "-":
        print(text)
    else:
        Path(args.output).write_text(text + "\n")
    return 0


def _sweep_rows(spec, graph, shapes, grid, disorder, steps, with_slopes,
                meta):
    rows = analysis.sweep(spec, graph, shapes, grid, disorder,
                          steps_per_tau_p=steps)
    slopes = {}
    if with_slopes:
        for s in analysis.loglog_slope(rows):
            slopes[s["delta_rms"]] = s
    out = []
    for r in rows:
        s = slopes.get(r["delta_rms"], {})
        out.append([r["delta_rms"], r["mean_infidelity"], r["stderr"],
                    s.get("slope"), r["num_draws"], r["censored"],
                    meta["gate"], graph.n, meta["pulse_order"],
                    meta["nrep"], meta["seed"]])
    return out


SWEEP_HEADER = ("delta_rms", "mean_infidelity", "stderr", "slope",
                "num_draws", "censored", "gate", "n", "pulse_order",
                "nrep", "seed")


def cmd_sweep(args) -> int:
    spec = _gate_spec(args)
    graph = _graph_from_args(args)
    shapes = pulse.pulse_set(args.pulse_order)
    if args.delta_grid is not None:
        grid = _parse_floats(args.delta_grid)
    else:
        grid = list(np.geomspace(args.delta_min, args.delta_max,
                                 args.grid_points))
    if not grid:
        raise ConfigError("delta grid is empty")
    disorder = network.DisorderModel(delta_rms=max(grid), seed=args.seed,
                                     num_draws=args.draws)
    meta = {"gate": args.gate, "pulse_order": args.pulse_order,
            "nrep": args.nrep, "seed": args.seed}
    rows = _sweep_rows(spec, graph, shapes, grid, disorder,
                       args.steps_per_tau_p, args.slopes, meta)
    _write_csv(args.output, SWEEP_HEADER, rows)
    return 0


def cmd_simulate(args) -> int:
    spec = _gate_spec(args)
    graph = _graph_from_args(args)
    shapes = pulse.pulse_set(args.pulse_order)
    if args.deltas:
        deltas = np.array(_parse_floats(args.deltas))
        if deltas.shape != (graph.n,):
            raise ConfigError("need one delta per qubit")
    else:
        deltas = network.draw_deltas(args.delta_rms, args.seed, args.draw,
                                     graph.n)
    rep = analysis.simulate_gate(spec, graph, shapes, deltas,
                                 steps_per_tau_p=args.steps_per_tau_p)
    _write_csv(args.output,
               ("gate", "n", "pulse_order", "nrep", "seed", "delta_rms",
                "fidelity", "infidelity"),
               [[args.gate, graph.n, args.pulse_order, args.nrep, args.seed,
                 args.delta_rms, rep.fidelity, rep.infidelity]])
    return 0


def cmd_weights(args) -> int:
    spec = _gate_spec(args)
    graph = _graph_from_args(args)
    shapes = pulse.pulse_set(args.pulse_order)
    deltas = network.draw_deltas(args.delta_rms, args.seed, args.draw,
                                 graph.n)
    rep = analysis.simulate_gate(spec, graph, shapes, deltas,
                                 steps_per_tau_p=args.steps_per_tau_p,
                                 with_weights=True)
    rows = [[w, a, r, args.gate, graph.n, args.pulse_order, args.nrep,
             args.seed, args.delta_rms]
            for w, (a, r) in sorted(rep.weight_spectrum.items())]
    _write_csv(args.output,
               ("weight", "absolute", "relative", "gate", "n",
                "pulse_order", "nrep", "seed", "delta_rms"), rows)
    return 0


def cmd_avgham_check(args) -> int:
    rng = np.random.default_rng(args.seed)

    def rand_herm(d):
        M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        M = (M + M.conj().T) / 2
        return args.bath_norm * M / np.linalg.norm(M, 2)

    d = args.dim
    A, B = rand_herm(d), rand_herm(d)
    bath = avgham.BathSpec(d, A, B)
    angle = _parse_angle(args.angle)
    if args.pulse_order == 0:
        gate = pulse.generic_pulse(angle)
        pi_shape = pulse.generic_pulse(math.pi)
    else:
        gate = pulse.find_self_refocusing(args.pulse_order, angle)
        pi_shape = pulse.find_self_refocusing(args.pulse_order, math.pi)
    cg = pulse.compute_coefficients(gate)
    cp = pulse.compute_coefficients(pi_shape)
    taus = list(np.geomspace(args.tau_min, args.tau_max, args.tau_points))

    if args.variant == "pulse":
        segments = [sequences.Segment(qubit=0, axis="x", shape=gate, sign=1,
                                      start=0.0, duration=1.0)]
        duration = gate.duration
        ideal = sequences.rotation_matrix("x", angle)
    else:
        variant = {"full-euler": "full", "partial-euler": "partial"}[args.variant]
        sched = sequences.eulerian_dcg(variant,
                                       replace(gate, axis="y"), pi_shape)
        segments, duration = sched.segments, sched.total_duration
        ideal = sched.ideal_unitary

    Ib = np.eye(d)
    rows = []
    resids = []
    for tau in taus:
        T = duration * tau

        def h(t):
            H = np.kron(B, np.eye(2)) + np.kron(A, analysis._PAULI1["Z"])
            for seg in segments:
                amp = seg.sign * float(
                    pulse.amplitude(seg.shape, t / tau - seg.start)) / tau
                if amp:
                    H = H + 0.5 * amp * np.kron(Ib, analysis._PAULI1[seg.axis.upper()])
            return H

        U = propagator.evolve_operator(h, T, max(64, int(duration * args.steps_per_tau_p)))
        R = np.kron(Ib, ideal).conj().T @ U
        Hn = propagator.extract_avg_hamiltonian(R, T)
        if args.variant == "pulse":
            Ha = avgham.pulse_avg_ham(cg, angle, bath, tau, args.order)
        else:
            Ha = avgham.dcg_avg_ham(args.variant.replace("-", "_"), cg, cp,
                                    angle, bath, tau, args.order)
        r = float(np.linalg.norm(Hn - Ha, 2))
        resids.append(r)
        rows.append([tau, r])
    # least-squares slope of log residual vs log tau
    lt, lr = np.log(taus), np.log(resids)
    slope = float(np.polyfit(lt, lr, 1)[0])
    _write_csv(args.output, ("tau_p", "residual_norm", "fitted_order"),
               [row + [slope] for row in rows])
    return 0


def cmd_bounds(args) -> int:
    inp = scaling.ClusterBoundInput(z=args.z, K=args.K, alpha=args.alpha,
                                    n_rep=args.nrep, C=args.C, mu=args.mu)
    f_bound, f_gate = scaling.covered_fraction(inp)
    pb = scaling.pulse_error_bound(args.alpha, args.K)
    budget = scaling.toric_budget(args.pc, K=args.K, C=args.C, mu=args.mu)
    rows = [
        ("mu_max", scaling.mu_max(args.z)),
        ("pulse_tail", pb["tail"]),
        ("pulse_bound", pb["bound"]),
        ("f_bound", f_bound),
        ("f_gate", f_gate),
        ("alpha_c", budget["alpha_c"]),
        ("n_rep_c", budget["n_rep"]),
        ("tau_cyc_ref", budget["tau_cyc_ref"]),
    ]
    if args.output:
        _write_csv(args.output, ("quantity", "value"),
                   [[k, v] for k, v in rows])
    width = max(len(k) for k, _ in rows)
    for s in range(1, args.max_cluster_size + 1):
        print(f"N_{s}(z={args.z})".ljust(width + 2)
              + str(scaling.cluster_count(args.z, s)))
    for k, v in rows:
        print(k.ljust(width + 2) + f"{v:.6g}")
    return 0


_CONFIG_SCHEMA_PATH = Path(__file__).with_name("config_schema.json")


def _check(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    _check(isinstance(cfg, dict), "config must be a JSON object")
    allowed = {"seed", "steps_per_tau_p", "threads", "experiments"}
    _check(set(cfg) <= allowed, f"unknown config keys {set(cfg) - allowed}")
    _check(isinstance(cfg.get("seed"), int), "config.seed must be an integer")
    steps = cfg.setdefault("steps_per_tau_p", 1024)
    _check(isinstance(steps, int) and steps > 0,
           "steps_per_tau_p must be a positive integer")
    exps = cfg.get("experiments")
    _check(isinstance(exps, list) and exps, "experiments must be a nonempty list")
    names = set()
    for e in exps:
        _check(isinstance(e, dict), "each experiment must be an object")
        allowed_e = {"name", "gate", "targets", "angle", "axis", "graph",
                     "nrep", "coupling", "pulse_order", "delta_grid",
                     "draws", "with_slopes", "with_weights", "output",
                     "steps_per_tau_p"}
        _check(set(e) <= allowed_e,
               f"unknown experiment keys {set(e) - allowed_e}")
        for key in ("name", "gate", "graph", "delta_grid", "output"):
            _check(key in e, f"experiment missing {key!r}")
        _check(isinstance(e["name"], str) and e["name"] not in names,
               "experiment names must be unique strings")
        names.add(e["name"])
        g = e["graph"]
        _check(isinstance(g, dict) and g.get("kind") in ("star", "chain")
               and isinstance(g.get("n"), int) and g["n"] >= 2,
               "graph must be {kind: star|chain, n: int >= 2}")
        _check(isinstance(e["delta_grid"], list) and e["delta_grid"]
               and all(isinstance(x, (int, float)) and x >= 0
                       for x in e["delta_grid"]),
               "delta_grid must be a nonempty list of nonnegative numbers")
        _check(e.setdefault("pulse_order", 2) in (0, 1, 2),
               "pulse_order must be 0, 1, or 2")
        _check(isinstance(e.setdefault("nrep", 5), int) and e["nrep"] >= 1,
               "nrep must be a positive integer")
        _check(isinstance(e.setdefault("draws", 10), int) and e["draws"] >= 1,
               "draws must be a positive integer")
    return cfg


def _version() -> str:
    try:
        return importlib.metadata.version("isingdd")
    except importlib.metadata.PackageNotFoundError:  # pragma: no cover
        return "unknown"


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    _apply_threads(cfg.get("threads"))
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_bytes = json.dumps(cfg, sort_keys=True).encode()
    manifest = {
        "version": _version(),
        "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
        "files": {},
    }
    shape_cache: dict[int, dict] = {}
    for e in cfg["experiments"]:
        order = e["pulse_order"]
        if order not in shape_cache:
            shape_cache[order] = pulse.pulse_set(order)
        shapes = shape_cache[order]
        nrep = e["nrep"]
        J = e.get("coupling", math.pi / (16 * nrep))
        graph = network.build_graph(e["graph"]["kind"], e["graph"]["n"], J)
        targets = tuple(e.get("targets", [0, 1]))
        spec = sequences.GateSpec(kind=e["gate"], targets=targets,
                                  angle=_parse_angle(str(e.get("angle", "0"))),
                                  axis=e.get("axis", "x"), n_rep=nrep)
        grid = [float(x) for x in e["delta_grid"]]
        disorder = network.DisorderModel(delta_rms=max(grid),
                                         seed=cfg["seed"],
                                         num_draws=e["draws"])
        steps = e.get("steps_per_tau_p", cfg["steps_per_tau_p"])
        meta = {"gate": e["gate"], "pulse_order": order, "nrep": nrep,
                "seed": cfg["seed"]}
        rows = _sweep_rows(spec, graph, shapes, grid, disorder, steps,
                           e.get("with_slopes", False), meta)
        path = out_dir / e["output"]
        data = _write_csv(path, SWEEP_HEADER, rows)
        manifest["files"][e["output"]] = hashlib.sha256(data).hexdigest()
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


def _add_gate_flags(p, sweep=False):
    p.add_argument("--gate", required=True,
                   choices=("rotation", "zz", "hadamard", "cnot", "cy", "cz",
                            "swap"))
    p.add_argument("--targets", default="0,1")
    p.add_argument("--angle", default="0")
    p.add_argument("--axis", default="x", choices=("x", "y", "z"))
    p.add_argument("--graph", default="star", choices=("star", "chain"))
    p.add_argument("--num-qubits", type=int, default=6)
    p.add_argument("--coupling", type=float, default=None,
                   help="J; default pi/(16 nrep)")
    p.add_argument("--nrep", type=int, default=5)
    p.add_argument("--pulse-order", type=int, default=2, choices=(0, 1, 2))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps-per-tau-p", type=int, default=1024)
    p.add_argument("--output", default="-")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isingdd",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None,
                    help="cap worker threads (or ISINGDD_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="pulse-shape coefficient table")
    p.add_argument("--pulse-order", type=int, default=2, choices=(0, 1, 2))
    p.add_argument("--angle", default="pi")
    p.add_argument("--shape-file", default=None)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("find-pulse", help="search a self-refocusing shape")
    p.add_argument("--pulse-order", type=int, required=True, choices=(1, 2))
    p.add_argument("--angle", default="pi")
    p.add_argument("--num-harmonics", type=int, default=None)
    p.add_argument("--zero-xi", action="store_true")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_find_pulse)

    p = sub.add_parser("simulate", help="one gate at fixed shifts")
    _add_gate_flags(p)
    p.add_argument("--deltas", default=None, help="comma-separated shifts")
    p.add_argument("--delta-rms", type=float, default=0.0)
    p.add_argument("--draw", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="disorder sweep over a delta_rms grid")
    _add_gate_flags(p)
    p.add_argument("--delta-grid", default=None)
    p.add_argument("--delta-min", type=float, default=1e-2)
    p.add_argument("--delta-max", type=float, default=1.0)
    p.add_argument("--grid-points", type=int, default=8)
    p.add_argument("--draws", type=int, default=10)
    p.add_argument("--slopes", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("weights", help="Pauli weight spectrum of one gate")
    _add_gate_flags(p)
    p.add_argument("--delta-rms", type=float, default=0.0)
    p.add_argument("--draw", type=int, default=0)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("avgham-check",
                       help="average-Hamiltonian residual scan vs tau_p")
    p.add_argument("--variant", default="pulse",
                   choices=("pulse", "full-euler", "partial-euler"))
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--pulse-order", type=int, default=2, choices=(0, 1, 2))
    p.add_argument("--angle", default="pi/2")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--bath-norm", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau-min", type=float, default=0.02)
    p.add_argument("--tau-max", type=float, default=0.2)
    p.add_argument("--tau-points", type=int, default=4)
    p.add_argument("--steps-per-tau-p", type=int, default=3000)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_avgham_check)

    p = sub.add_parser("bounds", help="cluster/error budget table")
    p.add_argument("--z", type=int, default=4)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--mu", type=float, default=10.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--pc", type=float, default=0.01)
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--nrep", type=int, default=5)
    p.add_argument("--max-cluster-size", type=int, default=6)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("run", help="run a config file; CSVs plus manifest")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _apply_threads(args.threads)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
