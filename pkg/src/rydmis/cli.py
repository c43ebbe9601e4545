"""Command-line pipeline over the package's file formats.

Every subcommand reads and writes the formats owned by its module and
drops a run manifest (resolved config, its hash, seed, library versions,
input/output paths) next to its outputs, so a run can be reproduced
byte-for-byte from the manifest alone.  A TOML config file can pre-set
any flag; explicit command-line flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bayesopt import Budget, history_csv, save_state
from .costs import CostSpec
from .detection import DetectionModel, apply_detection_errors, correct_distribution
from .distributions import load_distribution_csv, save_distribution_csv
from .embedding import (
    embed_force_directed,
    embed_on_lattice,
    load_register,
    save_register,
    validate_embedding,
)
from .emulator import evolve, evolve_noisy, sample
from .errors import RydmisError
from .gisp import (
    gisp_to_graph,
    load_instance,
    parse_gisp_dataset,
    save_instance,
    synthesize_gisp,
    write_gisp_dataset,
)
from .graphs import ConflictGraph, generate_lattice, load_graph, mis_exact, sample_family, save_graph
from .params import NoiseParams, rad_per_us
from .pipeline import (
    QaoaSpec,
    VqaaSpec,
    evaluate_transfer,
    export_histogram_csv,
    landscape_scan,
    load_protocol,
    registers_for,
    save_protocol,
    tail_detuning_spec_for,
    train_transferable,
)
from .postprocess import postprocess_distribution
from .scaling import fit_decay, save_fit_report
from .schedules import schedule_from_json, schedule_to_json

try:
    import tomllib
except ModuleNotFoundError:          # python < 3.11
    import tomli as tomllib


def _load_config(path, section):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return doc.get(section, {})


def _resolve(args, config, defaults):
    """Merge precedence: explicit flag > config file > hard default."""
    out = {}
    for key, hard in defaults.items():
        cli_val = getattr(args, key, None)
        out[key] = cli_val if cli_val is not None else config.get(key, hard)
    return out


def _write_manifest(out_dir_or_file, subcommand, cfg, inputs, outputs):
    cfg_text = json.dumps(cfg, sort_keys=True, default=str)
    manifest = {
        "tool": f"rydmis {__version__}",
        "subcommand": subcommand,
        "config": json.loads(cfg_text),
        "config_hash": hashlib.sha256(cfg_text.encode()).hexdigest(),
        "seed": cfg.get("seed"),
        "versions": {
            "rydmis": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
    }
    target = Path(out_dir_or_file)
    path = target / "manifest.json" if target.is_dir() else target.with_suffix(
        target.suffix + ".manifest.json"
    )
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def _parse_sizes(text):
    """``5..9`` or ``5,6,7``."""
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def _load_family(directory):
    paths = sorted(Path(directory).glob("graph_*.json"))
    if not paths:
        raise RydmisError(f"no graph_*.json files in {directory}")
    return [load_graph(p) for p in paths]


def _noise_from(cfg):
    if not cfg.get("noisy"):
        return None
    return NoiseParams(t1=cfg["t1_us"], t2=cfg["t2_us"],
                       eps=cfg["eps"], eps_prime=cfg["eps_prime"])


# -- subcommand implementations -------------------------------------------------


def _cmd_generate(args):
    defaults = dict(layout="triangular", rows=6, cols=6, spacing_um=5.0,
                    sizes="5..9", per_size=10, trees=False, seed=0, out="family")
    cfg = _resolve(args, _load_config(args.config, "generate"), defaults)
    layout = generate_lattice(cfg["layout"], cfg["rows"], cfg["cols"], cfg["spacing_um"])
    graphs = sample_family(
        layout, _parse_sizes(str(cfg["sizes"])), cfg["per_size"],
        allow_cycles=not cfg["trees"], seed=cfg["seed"],
    )
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for i, g in enumerate(graphs):
        p = out / f"graph_{i:03d}.json"
        save_graph(g, p)
        outputs.append(p)
    _write_manifest(out, "generate", cfg, [], outputs)
    print(f"wrote {len(outputs)} graphs to {out}")
    return 0


def _cmd_embed(args):
    defaults = dict(graph=None, conflict=None, target_nn_um=5.0, iterations=500,
                    seed=0, out="register.json", report=False)
    cfg = _resolve(args, _load_config(args.config, "embed"), defaults)
    inputs = []
    if cfg["conflict"]:
        with open(cfg["conflict"]) as fh:
            doc = json.load(fh)
        adj = ConflictGraph(doc["n"], frozenset(tuple(e) for e in doc["edges"]))
        reg = embed_force_directed(adj, cfg["target_nn_um"],
                                   iterations=cfg["iterations"], seed=cfg["seed"])
        inputs.append(cfg["conflict"])
    elif cfg["graph"]:
        g = load_graph(cfg["graph"])
        inputs.append(cfg["graph"])
        if g.origin is not None:
            reg = embed_on_lattice(g)
        else:
            adj = ConflictGraph(g.n_vertices, g.edges)
            reg = embed_force_directed(adj, cfg["target_nn_um"],
                                       iterations=cfg["iterations"], seed=cfg["seed"])
        if cfg["report"]:
            rep = validate_embedding(g, reg, g.blockade_radius)
            print(f"edge_residual={rep.edge_residual:.6g} "
                  f"tail_residual={rep.tail_residual:.6g} "
                  f"ratio_worst={rep.ratio_worst:.4f} hazards={len(rep.hazards)}")
    else:
        raise RydmisError("embed needs --graph or --conflict")
    save_register(reg, cfg["out"])
    _write_manifest(Path(cfg["out"]), "embed", cfg, inputs, [cfg["out"]])
    print(f"wrote register {cfg['out']}")
    return 0


def _cmd_train(args):
    defaults = dict(family=None, m=3, tmax_us=4.0, tmin_us=0.5, budget="25+175",
                    seed=0, cost="pmis", std_weight=1.0, shots=0,
                    omega_max_mhz=2.0, delta_max_mhz=10.0, jobs=1,
                    out="protocol.json")
    cfg = _resolve(args, _load_config(args.config, "train"), defaults)
    if cfg["family"] is None:
        raise RydmisError("train needs --family")
    graphs = _load_family(cfg["family"])
    spec = VqaaSpec(
        m=cfg["m"],
        t_range=(cfg["tmin_us"], cfg["tmax_us"]),
        omega_range=(0.0, rad_per_us(cfg["omega_max_mhz"])),
        delta_range=(-rad_per_us(cfg["delta_max_mhz"]), rad_per_us(cfg["delta_max_mhz"])),
    )
    kind = "one_minus_pmis" if cfg["cost"] == "pmis" else "approx_ratio"
    protocol, state = train_transferable(
        graphs, spec, Budget.parse(str(cfg["budget"])), seed=cfg["seed"],
        cost=CostSpec(kind), std_weight=cfg["std_weight"], shots=cfg["shots"],
        n_jobs=cfg["jobs"],
    )
    out = Path(cfg["out"])
    hist = out.with_suffix(".history.csv")
    snap = out.with_suffix(".state.json")
    save_protocol(protocol, out, history_path=hist)
    history_csv(state, hist)
    save_state(state, snap)
    sched_path = out.with_suffix(".schedule.json")
    schedule_to_json(protocol.schedule(), sched_path)
    _write_manifest(out, "train", cfg, [cfg["family"]],
                    [out, hist, snap, sched_path])
    print(f"trained cost {protocol.cost:.6f}; protocol at {out}")
    return 0


def _cmd_transfer(args):
    defaults = dict(protocol=None, family=None, shots=0, seed=0, noisy=False,
                    t1_us=100.0, t2_us=4.5, eps=0.03, eps_prime=0.08,
                    trajectories=500, out="transfer.json")
    cfg = _resolve(args, _load_config(args.config, "transfer"), defaults)
    if cfg["protocol"] is None or cfg["family"] is None:
        raise RydmisError("transfer needs --protocol and --family")
    protocol = load_protocol(cfg["protocol"])
    graphs = _load_family(cfg["family"])
    report = evaluate_transfer(
        protocol, graphs, noise=_noise_from(cfg), shots=cfg["shots"],
        seed=cfg["seed"], n_trajectories=cfg["trajectories"],
    )
    out = Path(cfg["out"])
    doc = {
        "mean_pmis": report.mean_pmis,
        "std_pmis": report.std_pmis,
        "min_pmis": report.min_pmis,
        "p_mis": list(report.p_mis),
        "ratio": list(report.ratio),
    }
    with open(out, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    hist = out.with_suffix(".histogram.csv")
    export_histogram_csv(report, hist)
    _write_manifest(out, "transfer", cfg, [cfg["protocol"], cfg["family"]],
                    [out, hist])
    print(f"mean P(MIS) = {report.mean_pmis:.4f} (min {report.min_pmis:.4f})")
    return 0


def _cmd_scan(args):
    defaults = dict(family=None, protocol_kind="vqaa-tail", grid=8, t_us=4.0,
                    qaoa_depth=5, omega_mhz=2.0, delta_mhz=-4.0,
                    tmin_us=0.02, tmax_us=0.3, cost="ratio", jobs=1, out="scan")
    cfg = _resolve(args, _load_config(args.config, "scan"), defaults)
    if cfg["family"] is None:
        raise RydmisError("scan needs --family")
    graphs = _load_family(cfg["family"])
    n = int(cfg["grid"])
    if cfg["protocol_kind"] == "vqaa-tail":
        spec = tail_detuning_spec_for(registers_for(graphs), duration=cfg["t_us"])
        lo, hi = spec.bounds
        xs = ys = np.linspace(lo, hi, n)
    elif cfg["protocol_kind"] == "qaoa":
        spec = QaoaSpec(depth=cfg["qaoa_depth"],
                        omega_mix=rad_per_us(cfg["omega_mhz"]),
                        delta_cost=rad_per_us(cfg["delta_mhz"]),
                        t_range=(cfg["tmin_us"], cfg["tmax_us"]), tied=True)
        xs = ys = np.linspace(cfg["tmin_us"], cfg["tmax_us"], n)
    else:
        raise RydmisError(f"unknown protocol kind {cfg['protocol_kind']!r}")
    kind = "one_minus_pmis" if cfg["cost"] == "pmis" else "approx_ratio"
    res = landscape_scan(graphs, spec, xs, ys, cost=CostSpec(kind),
                         n_jobs=cfg["jobs"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    grid_path = out / "landscape.csv"
    with open(grid_path, "w") as fh:
        fh.write(f"{res.names[0]},{res.names[1]},cost\n")
        for a, x in enumerate(res.x_values):
            for b, y in enumerate(res.y_values):
                fh.write(f"{x!r},{y!r},{res.averaged[a, b]!r}\n")
    argmin_path = out / "argmins.csv"
    with open(argmin_path, "w") as fh:
        fh.write(f"graph_id,{res.names[0]},{res.names[1]}\n")
        for i, (x, y) in enumerate(res.per_graph_argmin):
            fh.write(f"{i},{x!r},{y!r}\n")
    _write_manifest(out, "scan", cfg, [cfg["family"]], [grid_path, argmin_path])
    print(f"scan written to {out} (landscape min {res.averaged.min():.4f})")
    return 0


def _cmd_sample(args):
    defaults = dict(graph=None, schedule=None, protocol=None, shots=1000,
                    seed=0, noisy=False, t1_us=100.0, t2_us=4.5, eps=0.03,
                    eps_prime=0.08, trajectories=500, out="dist.csv")
    cfg = _resolve(args, _load_config(args.config, "sample"), defaults)
    if cfg["graph"] is None:
        raise RydmisError("sample needs --graph")
    g = load_graph(cfg["graph"])
    inputs = [cfg["graph"]]
    if cfg["schedule"]:
        sched = schedule_from_json(cfg["schedule"])
        inputs.append(cfg["schedule"])
    elif cfg["protocol"]:
        sched = load_protocol(cfg["protocol"]).schedule()
        inputs.append(cfg["protocol"])
    else:
        raise RydmisError("sample needs --schedule or --protocol")
    reg = registers_for([g])[0]
    noise = _noise_from(cfg)
    if noise is None:
        state = evolve(reg, sched)
        dist = sample(state, cfg["shots"], seed=cfg["seed"])
    else:
        probs = evolve_noisy(reg, sched, noise=noise,
                             n_trajectories=cfg["trajectories"], seed=cfg["seed"])
        if noise.eps or noise.eps_prime:
            model = DetectionModel.uniform(noise.eps, noise.eps_prime, g.n_vertices)
            probs = apply_detection_errors(probs, model)
        rng = np.random.default_rng(cfg["seed"])
        vec = probs.to_vector()
        counts = rng.multinomial(cfg["shots"], vec / vec.sum()).astype(float)
        from .distributions import Distribution

        dist = Distribution.from_vector(counts, g.n_vertices, mode="counts")
    save_distribution_csv(dist, cfg["out"], provenance=f"sample seed={cfg['seed']}")
    _write_manifest(Path(cfg["out"]), "sample", cfg, inputs, [cfg["out"]])
    print(f"wrote {cfg['shots']} shots to {cfg['out']}")
    return 0


def _cmd_corrupt(args):
    defaults = dict(dist=None, eps=0.03, eps_prime=0.08, mode="exact_tensor",
                    seed=0, out="corrupted.csv")
    cfg = _resolve(args, _load_config(args.config, "corrupt"), defaults)
    if cfg["dist"] is None:
        raise RydmisError("corrupt needs --dist")
    dist = load_distribution_csv(cfg["dist"])
    model = DetectionModel.uniform(cfg["eps"], cfg["eps_prime"], dist.n_qubits)
    out_dist = apply_detection_errors(dist, model, mode=cfg["mode"], seed=cfg["seed"])
    save_distribution_csv(
        out_dist, cfg["out"],
        provenance=f"corrupted eps={cfg['eps']} eps_prime={cfg['eps_prime']} mode={cfg['mode']}",
    )
    _write_manifest(Path(cfg["out"]), "corrupt", cfg, [cfg["dist"]], [cfg["out"]])
    return 0


def _cmd_correct(args):
    defaults = dict(dist=None, eps=0.03, eps_prime=0.08, policy="truncate",
                    out="corrected.csv")
    cfg = _resolve(args, _load_config(args.config, "correct"), defaults)
    if cfg["dist"] is None:
        raise RydmisError("correct needs --dist")
    dist = load_distribution_csv(cfg["dist"])
    model = DetectionModel.uniform(cfg["eps"], cfg["eps_prime"], dist.n_qubits)
    out_dist = correct_distribution(dist, model, policy=cfg["policy"])
    save_distribution_csv(
        out_dist, cfg["out"],
        provenance=f"corrected eps={cfg['eps']} eps_prime={cfg['eps_prime']} policy={cfg['policy']}",
    )
    _write_manifest(Path(cfg["out"]), "correct", cfg, [cfg["dist"]], [cfg["out"]])
    return 0


def _cmd_postprocess(args):
    defaults = dict(graph=None, dist=None, depth=1, seed=0, until_stable=False,
                    keep_all=False, out="refined.csv")
    cfg = _resolve(args, _load_config(args.config, "postprocess"), defaults)
    if cfg["graph"] is None or cfg["dist"] is None:
        raise RydmisError("postprocess needs --graph and --dist")
    g = load_graph(cfg["graph"])
    dist = load_distribution_csv(cfg["dist"])
    s_g = mis_exact(g).size
    refined, stats = postprocess_distribution(
        g, dist, cfg["depth"], s_g, seed=cfg["seed"],
        keep_all=cfg["keep_all"], until_stable=cfg["until_stable"],
    )
    save_distribution_csv(refined, cfg["out"],
                          provenance=f"postprocessed depth={cfg['depth']}")
    cfg["stats"] = {"avg_removed": stats.avg_removed, "avg_added": stats.avg_added}
    _write_manifest(Path(cfg["out"]), "postprocess", cfg,
                    [cfg["graph"], cfg["dist"]], [cfg["out"]])
    print(f"avg removed {stats.avg_removed:.3f}, avg added {stats.avg_added:.3f}")
    return 0


def _cmd_fit(args):
    defaults = dict(curves=None, out="fit.json")
    cfg = _resolve(args, _load_config(args.config, "fit"), defaults)
    if cfg["curves"] is None:
        raise RydmisError("fit needs --curves (CSV with N,k,cum_prob rows)")
    by_k: dict[int, list] = {}
    with open(cfg["curves"]) as fh:
        header = fh.readline().strip().split(",")
        if header[:3] != ["N", "k", "cum_prob"]:
            raise RydmisError("expected header N,k,cum_prob")
        for line in fh:
            if not line.strip():
                continue
            n, k, p = line.strip().split(",")[:3]
            by_k.setdefault(int(k), []).append((float(n), float(p)))
    fits = [fit_decay(pts, k=k) for k, pts in sorted(by_k.items())]
    save_fit_report(fits, cfg["out"])
    _write_manifest(Path(cfg["out"]), "fit", cfg, [cfg["curves"]], [cfg["out"]])
    for f in fits:
        print(f"k={f.k}: N_k={f.n_k:.2f} b_k={f.b_k} residual={f.residual:.4g}")
    return 0


def _cmd_gisp(args):
    action = args.action
    defaults = dict(path=None, out=None, tasks=30, groups=6, seed=0)
    cfg = _resolve(args, _load_config(args.config, "gisp"), defaults)
    if action == "synth":
        inst = synthesize_gisp(cfg["tasks"], cfg["groups"], seed=cfg["seed"])
        out = cfg["out"] or "loads.csv"
        write_gisp_dataset(inst, out)
        _write_manifest(Path(out), "gisp-synth", cfg, [], [out])
        print(f"wrote {inst.n_tasks} synthetic loads to {out}")
        return 0
    if cfg["path"] is None:
        raise RydmisError(f"gisp {action} needs a file argument")
    if action == "import":
        inst = parse_gisp_dataset(cfg["path"])
        out = cfg["out"] or "instance.json"
        save_instance(inst, out)
        _write_manifest(Path(out), "gisp-import", cfg, [cfg["path"]], [out])
        print(f"imported {inst.n_tasks} tasks (max group size {inst.max_group_size})")
        return 0
    if action == "tograph":
        inst = load_instance(cfg["path"])
        cg = gisp_to_graph(inst)
        out = cfg["out"] or "conflict.json"
        with open(out, "w") as fh:
            json.dump(
                {"n": cg.n_vertices, "edges": sorted(list(e) for e in cg.edges)}, fh
            )
            fh.write("\n")
        _write_manifest(Path(out), "gisp-tograph", cfg, [cfg["path"]], [out])
        print(f"conflict graph: {cg.n_vertices} vertices, {len(cg.edges)} edges")
        return 0
    raise RydmisError(f"unknown gisp action {action!r}")


def _cmd_report(args):
    defaults = dict(run=None, out="report")
    cfg = _resolve(args, _load_config(args.config, "report"), defaults)
    if cfg["run"] is None:
        raise RydmisError("report needs --run directory")
    run = Path(cfg["run"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    # collate plot-ready CSVs from whatever artifacts the run produced
    collations = {
        "landscape.csv": "fig_landscape.csv",
        "argmins.csv": "fig_landscape_argmins.csv",
        "*.history.csv": "fig_training_history.csv",
        "*.histogram.csv": "fig_pmis_histogram.csv",
        "curve.csv": "fig_truncated_ratio.csv",
        "scaling.csv": "fig_scaling.csv",
    }
    outputs = []
    for pattern, target in collations.items():
        for src in sorted(run.rglob(pattern)):
            dest = out / target
            dest.write_text(src.read_text())
            outputs.append(dest)
            break
    summary = {"run": str(run), "collated": [p.name for p in outputs]}
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    outputs.append(summary_path)
    _write_manifest(out, "report", cfg, [str(run)], outputs)
    print(f"collated {len(outputs) - 1} artifacts into {out}")
    return 0


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydmis",
        description="Train, transfer and evaluate annealing protocols for "
                    "MIS on unit-disk graphs.",
    )
    parser.add_argument("--config", help="TOML config file (flags override it)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="sample a lattice graph family")
    p.add_argument("--layout", choices=["triangular", "square", "shastry_sutherland"])
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--spacing-um", dest="spacing_um", type=float)
    p.add_argument("--sizes")
    p.add_argument("--per-size", dest="per_size", type=int)
    p.add_argument("--trees", action="store_const", const=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("embed", help="embed a graph into an atomic register")
    p.add_argument("--graph")
    p.add_argument("--conflict")
    p.add_argument("--target-nn-um", dest="target_nn_um", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", action="store_const", const=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("train", help="train a transferable protocol on a family")
    p.add_argument("--family")
    p.add_argument("--m", type=int)
    p.add_argument("--tmax-us", dest="tmax_us", type=float)
    p.add_argument("--tmin-us", dest="tmin_us", type=float)
    p.add_argument("--budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--cost", choices=["pmis", "ratio"])
    p.add_argument("--std-weight", dest="std_weight", type=float)
    p.add_argument("--shots", type=int)
    p.add_argument("--omega-max-mhz", dest="omega_max_mhz", type=float)
    p.add_argument("--delta-max-mhz", dest="delta_max_mhz", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("transfer", help="apply a trained protocol to unseen graphs")
    p.add_argument("--protocol")
    p.add_argument("--family")
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noisy", action="store_const", const=True)
    p.add_argument("--t1-us", dest="t1_us", type=float)
    p.add_argument("--t2-us", dest="t2_us", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-prime", dest="eps_prime", type=float)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_transfer)

    p = sub.add_parser("scan", help="two-parameter landscape scan over a family")
    p.add_argument("--family")
    p.add_argument("--protocol-kind", dest="protocol_kind",
                   choices=["vqaa-tail", "qaoa"])
    p.add_argument("--grid", type=int)
    p.add_argument("--t-us", dest="t_us", type=float)
    p.add_argument("--qaoa-depth", dest="qaoa_depth", type=int)
    p.add_argument("--omega-mhz", dest="omega_mhz", type=float)
    p.add_argument("--delta-mhz", dest="delta_mhz", type=float)
    p.add_argument("--tmin-us", dest="tmin_us", type=float)
    p.add_argument("--tmax-us", dest="tmax_us", type=float)
    p.add_argument("--cost", choices=["pmis", "ratio"])
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("sample", help="evolve a schedule and sample shots")
    p.add_argument("--graph")
    p.add_argument("--schedule")
    p.add_argument("--protocol")
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noisy", action="store_const", const=True)
    p.add_argument("--t1-us", dest="t1_us", type=float)
    p.add_argument("--t2-us", dest="t2_us", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-prime", dest="eps_prime", type=float)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("corrupt", help="apply detection errors to a distribution")
    p.add_argument("--dist")
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-prime", dest="eps_prime", type=float)
    p.add_argument("--mode", choices=["exact_tensor", "stochastic"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_corrupt)

    p = sub.add_parser("correct", help="invert detection errors on a distribution")
    p.add_argument("--dist")
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-prime", dest="eps_prime", type=float)
    p.add_argument("--policy", choices=["truncate", "renormalize"])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_correct)

    p = sub.add_parser("postprocess", help="repair and extend sampled bitstrings")
    p.add_argument("--graph")
    p.add_argument("--dist")
    p.add_argument("--depth", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--until-stable", dest="until_stable", action="store_const",
                   const=True)
    p.add_argument("--keep-all", dest="keep_all", action="store_const", const=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_postprocess)

    p = sub.add_parser("fit", help="fit the piecewise exponential decay model")
    p.add_argument("--curves")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("gisp", help="group-interval-scheduling utilities")
    p.add_argument("action", choices=["import", "tograph", "synth"])
    p.add_argument("path", nargs="?")
    p.add_argument("--tasks", type=int)
    p.add_argument("--groups", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gisp)

    p = sub.add_parser("report", help="collate run artifacts into figure CSVs")
    p.add_argument("--run")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except RydmisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
