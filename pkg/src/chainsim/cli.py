"""Command-line entry point: scenario configuration, study execution, and
CSV artifact emission.

Every study writes into ``<outdir>/<study>-seed<seed>/``: the study CSV(s),
a ``plotdata.csv`` of (x, series, y) triples, and ``resolved.cfg`` echoing
the fully resolved configuration.  All randomness flows from the single
configured seed.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import experiments
from .config import ConfigError, ScenarioConfig, default_config, format_config, parse_config
from .dcf import ChainLoad, MacParams, run, throughput, drop_percentage
from .interactions import CLASSIFICATION_CSV_HEADER, Link, classification_csv_rows
from .topology import census, generate_uniform

ENV_OUTDIR = "CHAINSIM_OUTDIR"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_plotdata(path: Path, triples) -> None:
    _write_csv(path, ["x", "series", "y"], triples)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def _prepare_outdir(sc: ScenarioConfig, args) -> Path:
    base = args.out or os.environ.get(ENV_OUTDIR) or sc.output_dir
    outdir = Path(base) / f"{sc.study_name}-seed{sc.seed}"
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "resolved.cfg").write_text(format_config(sc))
    return outdir


def _load_scenario(args, command: str, overrides: dict[str, str]) -> ScenarioConfig:
    if args.config:
        sc = parse_config(args.config)
        if sc.study_name != command:
            raise ConfigError(
                f"config selects study {sc.study_name!r} but the command is {command!r}"
            )
        study = dict(sc.study)
    else:
        sc = None
        study = {"name": command}
    for key, value in overrides.items():
        if value is not None:
            study[key] = str(value)
    if args.seed is not None:
        study["seed"] = str(args.seed)
    seed = int(study.get("seed", "0"))
    study["seed"] = str(seed)
    if sc is None:
        return default_config(study)
    from dataclasses import replace
    return replace(sc, study=tuple(sorted(study.items())), seed=seed)


def _study_float(study: dict[str, str], key: str, default: float) -> float:
    return float(study.get(key, default))


def _study_int(study: dict[str, str], key: str, default: int) -> int:
    return int(study.get(key, default))


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _pmap(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- study runners ---------------------------------------------------------------


def _read_positions(path: str) -> dict[int, tuple[float, float]]:
    out = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out[int(rec["id"])] = (float(rec["x"]), float(rec["y"]))
    return out


def _cmd_classify(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    positions = _read_positions(study["positions"])
    links = []
    with open(study["links"], newline="") as fh:
        for rec in csv.DictReader(fh):
            src, dst = int(rec["src"]), int(rec["dst"])
            links.append(Link(src, positions[src], dst, positions[dst]))
    pairs = [
        (a, b)
        for i, a in enumerate(links)
        for b in links[i + 1:]
        if not set(a.nodes()) & set(b.nodes())
    ]
    rows = classification_csv_rows(pairs, sc.radio)
    outdir = _prepare_outdir(sc, args)
    _write_csv(outdir / "classification.csv", CLASSIFICATION_CSV_HEADER, rows)
    counts: dict[str, int] = {}
    for row in rows:
        counts[row[-1]] = counts.get(row[-1], 0) + 1
    _write_plotdata(outdir / "plotdata.csv",
                    [(0, category, n) for category, n in sorted(counts.items())])
    return outdir


def _cmd_census(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    n_nodes = _study_int(study, "nodes", 225)
    hops = _study_int(study, "hops", 4)
    width = _study_float(study, "width_m", 1500.0)
    height = _study_float(study, "height_m", 1500.0)
    cs_ranges = _float_list(study.get("cs_ranges_m", "550"))
    dep = generate_uniform(width, height, n_nodes, sc.seed)
    table = census(dep, hops, cs_ranges, sc.radio)
    outdir = _prepare_outdir(sc, args)
    table.to_csv(outdir / "census.csv")
    triples = []
    for cs in table.cs_ranges:
        for sig, p in sorted(table.probabilities(cs).items()):
            triples.append((cs, sig, repr(p)))
    _write_plotdata(outdir / "plotdata.csv", triples)
    dep.to_csv(outdir / "deployment.csv")
    return outdir


def _chain_spec(sc: ScenarioConfig, study: dict[str, str]) -> experiments.CanonicalChainSpec:
    signature = study.get("signature", "SC/SC/SC")
    return experiments.build_canonical_chain(signature, sc.radio)


def _cmd_run_chain(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    spec = _chain_spec(sc, study)
    load = _study_float(study, "load", 1.0)
    duration = _study_float(study, "duration_s", 30.0)
    want_log = study.get("event_log", "false").lower() == "true"
    rate = load * experiments.single_link_capacity_bps(sc.mac)
    result = run(spec.chain.positions, [ChainLoad(spec.chain, rate)], duration,
                 sc.mac, sc.radio, sc.seed, record_events=want_log)
    outdir = _prepare_outdir(sc, args)
    rows = []
    for (ci, hop), ls in sorted(result.links.items()):
        rows.append([ci, hop, ls.attempts, ls.acked, ls.collision_losses, ls.retry_drops])
    _write_csv(outdir / "links.csv",
               ["chain", "hop", "attempts", "acked", "collision_losses", "retry_drops"],
               rows)
    stats = result.chains[0]
    _write_csv(outdir / "chain.csv",
               ["signature", "load", "generated", "delivered", "throughput_bps",
                "drop_pct", "queue_drops", "retry_drops"],
               [[spec.verified, _fmt(load), stats.generated, stats.delivered,
                 _fmt(throughput(result, 0, mac=sc.mac)),
                 _fmt(drop_percentage(result, 0)),
                 stats.queue_drops, stats.retry_drops]])
    _write_plotdata(outdir / "plotdata.csv",
                    [(hop, "delivered", n) for hop, n in enumerate(stats.per_hop_delivered)])
    if want_log and result.event_log is not None:
        _write_csv(outdir / "events.csv",
                   ["time_us", "node", "event", "frame_id", "outcome"],
                   [[_fmt(t), node, ev, fid, outcome]
                    for t, node, ev, fid, outcome in result.event_log])
    return outdir


def _sweep_worker(packed):
    spec, load, duration, seed, mac, cfg = packed
    return experiments.saturation_sweep(spec, [load], duration, seed, mac, cfg)[0]


def _cmd_sweep(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    spec = _chain_spec(sc, study)
    loads = sorted(_float_list(study["loads"])) if "loads" in study else experiments.DEFAULT_LOADS
    duration = _study_float(study, "duration_s", 30.0)
    points = _pmap(_sweep_worker,
                   [(spec, load, duration, sc.seed, sc.mac, sc.radio) for load in loads],
                   args.jobs)
    outdir = _prepare_outdir(sc, args)
    _write_csv(outdir / "sweep.csv",
               ["signature", "load", "throughput_bps", "drop_pct", "generated", "delivered"],
               [[spec.verified, _fmt(p.load), _fmt(p.throughput_bps), _fmt(p.drop_pct),
                 p.generated, p.delivered] for p in points])
    triples = []
    for p in points:
        triples.append((p.load, f"{spec.verified}:throughput_bps", _fmt(p.throughput_bps)))
        triples.append((p.load, f"{spec.verified}:drop_pct", _fmt(p.drop_pct)))
    _write_plotdata(outdir / "plotdata.csv", triples)
    return outdir


def _nhop_worker(packed):
    n_hops, assignment, loads, duration, seed, mac, cfg = packed
    return experiments.nhop_study(n_hops, [assignment], loads, duration, seed, mac, cfg)


def _cmd_nhop(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    n_hops = _study_int(study, "hops", 5)
    text = study.get("assignments", "all")
    if text == "all":
        assignments = experiments.all_assignments(n_hops)
    else:
        assignments = [experiments.parse_assignment(a) for a in text.split(",")]
    loads = _float_list(study.get("loads", "1.0"))
    duration = _study_float(study, "duration_s", 30.0)
    blocks = _pmap(_nhop_worker,
                   [(n_hops, a, loads, duration, sc.seed, sc.mac, sc.radio)
                    for a in assignments],
                   args.jobs)
    rows = [row for block in blocks for row in block]
    outdir = _prepare_outdir(sc, args)
    _write_csv(outdir / "nhop.csv",
               ["assignment", "load", "throughput_bps", "drop_pct", "skipped_reason"],
               [[r.assignment, _fmt(r.load), _fmt(r.throughput_bps), _fmt(r.drop_pct),
                 r.skipped_reason] for r in rows])
    triples = []
    for r in rows:
        if not r.skipped_reason:
            triples.append((r.load, f"{r.assignment}:throughput_bps", _fmt(r.throughput_bps)))
            triples.append((r.load, f"{r.assignment}:drop_pct", _fmt(r.drop_pct)))
    _write_plotdata(outdir / "plotdata.csv", triples)
    return outdir


def _cmd_cross_chain(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    classes = tuple(study.get("classes", "SC,SC").split(","))
    if len(classes) != 2:
        raise ConfigError("cross-chain 'classes' needs exactly two of SC,HTC,HT")
    samples = _study_int(study, "samples", 200)
    simulate = study.get("simulate", "true").lower() == "true"
    report = experiments.cross_chain_study(
        classes, samples,
        n_nodes=_study_int(study, "n_nodes", 500),
        duration=_study_float(study, "duration_s", 30.0),
        seed=sc.seed, mac=sc.mac, cfg=sc.radio, simulate=simulate,
        pairs_per_deployment=_study_int(study, "pairs_per_deployment", 20),
    )
    outdir = _prepare_outdir(sc, args)
    _write_csv(outdir / "cross_chain_summary.csv",
               ["class_1", "class_2", "samples", "p_ht_chain1", "p_ht_chain2",
                "p_ht_any", "sym_ht_fraction"],
               [[classes[0], classes[1], len(report.samples),
                 _fmt(report.p_ht_chain1), _fmt(report.p_ht_chain2),
                 _fmt(report.p_ht_any), _fmt(report.sym_ht_fraction)]])
    table = experiments.conditional_interaction(report.samples)
    cond_rows = []
    for self_label in sorted(table):
        for cross_label in sorted(table[self_label]):
            cond_rows.append([self_label, cross_label, _fmt(table[self_label][cross_label])])
    _write_csv(outdir / "conditional.csv",
               ["self_label", "cross_label", "probability"], cond_rows)
    sample_rows = []
    for i, s in enumerate(report.samples):
        tp1, tp2 = s.throughput_bps if s.throughput_bps else (None, None)
        lost1, lost2 = s.lost_capacity_s if s.lost_capacity_s else ((None, None), (None, None))
        sample_rows.append([
            i, s.ht_in_chain[0], s.ht_in_chain[1], s.worst_cross[0], s.worst_cross[1],
            _fmt(tp1), _fmt(tp2),
            _fmt(lost1[0]), _fmt(lost1[1]), _fmt(lost2[0]), _fmt(lost2[1]),
        ])
    _write_csv(outdir / "cross_chain_samples.csv",
               ["sample", "ht_in_chain1", "ht_in_chain2", "worst_cross1", "worst_cross2",
                "throughput1_bps", "throughput2_bps",
                "retx_airtime1_s", "qdrop_airtime1_s", "retx_airtime2_s", "qdrop_airtime2_s"],
               sample_rows)
    triples = [(i, "throughput1_bps", _fmt(s.throughput_bps[0])) for i, s in
               enumerate(report.samples) if s.throughput_bps]
    triples += [(i, "throughput2_bps", _fmt(s.throughput_bps[1])) for i, s in
                enumerate(report.samples) if s.throughput_bps]
    triples += [(0, "p_ht_any", _fmt(report.p_ht_any))]
    _write_plotdata(outdir / "plotdata.csv", triples)
    return outdir


def _cmd_flow_in_middle(sc: ScenarioConfig, args) -> Path:
    study = sc.study_dict()
    duration = _study_float(study, "duration_s", 30.0)
    res = experiments.flow_in_middle(duration, sc.seed, sc.mac, sc.radio)
    outdir = _prepare_outdir(sc, args)
    _write_csv(outdir / "flow_in_middle.csv", ["link", "throughput_bps"],
               [[name, _fmt(tp)] for name, tp in sorted(res.throughput_bps.items())])
    _write_plotdata(outdir / "plotdata.csv",
                    [(i, name, _fmt(tp)) for i, (name, tp)
                     in enumerate(sorted(res.throughput_bps.items()))])
    return outdir


_RUNNERS = {
    "classify": _cmd_classify,
    "census": _cmd_census,
    "run-chain": _cmd_run_chain,
    "sweep": _cmd_sweep,
    "nhop": _cmd_nhop,
    "cross-chain": _cmd_cross_chain,
    "flow-in-middle": _cmd_flow_in_middle,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainsim",
        description="Simulate and classify MAC-level interactions in multi-hop wireless chains",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario config file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help=f"output directory (or ${ENV_OUTDIR})")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for independent runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify link pairs from CSV inputs")
    p.add_argument("--positions", help="node CSV with columns id,x,y")
    p.add_argument("--links", help="link CSV with columns src,dst")

    p = sub.add_parser("census", parents=[common], help="signature census over a deployment")
    p.add_argument("--nodes", type=int)
    p.add_argument("--cs", help="comma-separated carrier-sense ranges in meters")
    p.add_argument("--hops", type=int)
    p.add_argument("--width", type=float)
    p.add_argument("--height", type=float)

    p = sub.add_parser("run-chain", parents=[common], help="simulate one canonical chain")
    p.add_argument("--signature")
    p.add_argument("--load", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--event-log", action="store_true")

    p = sub.add_parser("sweep", parents=[common], help="offered-load sweep of a canonical chain")
    p.add_argument("--signature")
    p.add_argument("--loads", help="comma-separated normalized loads")
    p.add_argument("--duration", type=float)

    p = sub.add_parser("nhop", parents=[common], help="n-hop slot-assignment study")
    p.add_argument("--hops", type=int)
    p.add_argument("--assignments", help="'all' or comma-separated like SC-HT,HT-SC")
    p.add_argument("--loads")
    p.add_argument("--duration", type=float)

    p = sub.add_parser("cross-chain", parents=[common], help="cross-chain interaction study")
    p.add_argument("--classes", help="two of SC,HTC,HT, comma-separated")
    p.add_argument("--samples", type=int)
    p.add_argument("--nodes", type=int, dest="n_nodes")
    p.add_argument("--duration", type=float)
    p.add_argument("--classify-only", action="store_true",
                   help="skip the per-sample simulations")

    p = sub.add_parser("flow-in-middle", parents=[common],
                       help="three-link contention-unfairness topology")
    p.add_argument("--duration", type=float)
    return parser


def _overrides(args) -> dict[str, str | None]:
    get = lambda name: getattr(args, name, None)
    mapping = {
        "positions": get("positions"),
        "links": get("links"),
        "nodes": get("nodes"),
        "cs_ranges_m": get("cs"),
        "hops": get("hops"),
        "width_m": get("width"),
        "height_m": get("height"),
        "signature": get("signature"),
        "load": get("load"),
        "loads": get("loads"),
        "duration_s": get("duration"),
        "assignments": get("assignments"),
        "classes": get("classes"),
        "samples": get("samples"),
        "n_nodes": get("n_nodes"),
        "event_log": "true" if get("event_log") else None,
        "simulate": "false" if get("classify_only") else None,
    }
    return {k: (str(v) if v is not None else None) for k, v in mapping.items()}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        sc = _load_scenario(args, args.command, _overrides(args))
        outdir = _RUNNERS[args.command](sc, args)
    except (ConfigError, ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"chainsim: error: {exc}", file=sys.stderr)
        return 1
    print(outdir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
