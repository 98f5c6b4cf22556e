"""Command-line entry point.

    tweezerlab kass run --seeds N --t-start 0.40 --t-min 0.07 --out DIR
    tweezerlab hilo search --t 0.15 --grid 5,5,5 --out DIR
    tweezerlab hilo sweep --in DIR --top K --out DIR
    tweezerlab analyze {distances,clans,embed,qvel,qslfit} --in DIR [--metric ...]
    tweezerlab serve --config FILE --port N

Campaign commands write solution archives (config.json + solutions.jsonl +
paths/*.csv + envelope.csv); analyze commands read such archives and write
their products next to them.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, archive, hilo, kass
from .control import SeedSpectrum
from .optimizer import OptimizerParams, Solution, optimize, path_fidelity
from .physics import ProblemConfig


def _load_config(path: str | None) -> ProblemConfig:
    if path is None:
        return ProblemConfig()
    return ProblemConfig.from_json(Path(path).read_text())


def _optimizer_params(args) -> OptimizerParams:
    return OptimizerParams(max_iters=args.max_iters, fidelity_goal=args.goal)


def _add_common(parser):
    parser.add_argument("--config", help="problem config JSON (defaults baked in)")
    parser.add_argument("--max-iters", type=int, default=120, help="optimizer budget per solve")
    parser.add_argument("--goal", type=float, default=0.999, help="fidelity goal")


def cmd_kass_run(args) -> int:
    cfg = _load_config(args.config)
    params = _optimizer_params(args)
    result = kass.kass_campaign(
        n_seeds=args.seeds, cfg=cfg, params=params,
        spectrum=SeedSpectrum(rng_seed=args.rng_seed),
        t_start=args.t_start, t_min=args.t_min, n_workers=args.workers)
    out = archive.write_campaign(args.out, result, cfg)
    print(f"wrote {out} ({len(result.families)} families)")
    print(f"apparent QSL: {result.qsl}")
    return 0


def cmd_hilo_search(args) -> int:
    cfg = _load_config(args.config)
    params = _optimizer_params(args)
    grid_shape = tuple(int(g) for g in args.grid.split(","))
    if len(grid_shape) != 3:
        print("--grid wants three comma-separated sizes", file=sys.stderr)
        return 2
    ranked = hilo.direct_search(cfg, params, T=args.t, grid_shape=grid_shape,
                                budget=args.budget)
    out = archive.write_solutions(args.out, [r.solution for r in ranked], cfg)
    best = ranked[0]
    print(f"wrote {out} ({len(ranked)} seeds)")
    print(f"best: F={best.solution.fidelity:.6f} at x1={best.params.x1:.3f} "
          f"x2={best.params.x2:.3f} t2={best.params.t2:.4f}")
    return 0


def cmd_hilo_sweep(args) -> int:
    cfg, solutions = archive.load_solutions(args.in_dir)
    params = _optimizer_params(args)
    roots = sorted(solutions, key=lambda s: -s.fidelity)[:args.top]
    families = []
    for root in roots:
        refreshed = Solution(path=root.path, fidelity=path_fidelity(root.path, cfg),
                             lineage=root.lineage)
        families.append(kass.sweep_down(refreshed, args.t_min, cfg, params))
        families.append(kass.sweep_up(refreshed, args.t_max, cfg, params))
    envelope = kass.build_envelope(families, cfg.dt)
    result = kass.CampaignResult(families=families, envelope=envelope,
                                 qsl=kass.apparent_qsl(envelope, args.goal))
    out = archive.write_campaign(args.out, result, cfg)
    print(f"wrote {out} ({len(families)} families)")
    print(f"apparent QSL: {result.qsl}")
    return 0


def cmd_analyze(args) -> int:
    in_dir = Path(args.in_dir)
    cfg, solutions = archive.load_solutions(in_dir)
    if args.duration is not None:
        solutions = [s for s in solutions if abs(s.duration - args.duration) < 1e-9]
    if not solutions:
        print("no solutions selected", file=sys.stderr)
        return 2
    needed = {"distances": 2, "clans": 2, "embed": 3, "qvel": 1, "qslfit": 5}[args.what]
    if len(solutions) < needed:
        print(f"{args.what} needs at least {needed} solutions, have {len(solutions)}",
              file=sys.stderr)
        return 2
    print(f"{len(solutions)} solutions selected")

    if args.what == "distances":
        dm = analysis.distance_matrix(solutions, args.metric, cfg)
        archive.write_distances(in_dir / "distances.bin", dm)
        print(f"wrote {in_dir / 'distances.bin'} (n={dm.n}, metric={dm.metric})")
    elif args.what == "clans":
        dm = analysis.distance_matrix(solutions, args.metric, cfg)
        order, dists = analysis.reachability_order(dm, rng=args.rng_seed)
        archive.write_reachability(in_dir / "reachability.csv", order, dists)
        clans = analysis.extract_clans(order, dists, threshold=args.threshold,
                                       min_size=args.min_size, solutions=solutions)
        archive.write_clans(in_dir / "clans.json", clans, args.threshold, args.min_size)
        print(f"wrote reachability.csv and clans.json ({len(clans)} clans)")
    elif args.what == "embed":
        dm = analysis.distance_matrix(solutions, args.metric, cfg)
        emb = analysis.embed_2d(dm, rng=args.rng_seed,
                                fidelities=np.array([s.fidelity for s in solutions]))
        archive.write_embedding(in_dir / "embedding.csv", emb)
        print(f"wrote embedding.csv (total stress {emb.total_stress:.4g})")
    elif args.what == "qvel":
        rows = ["id,T,fidelity,mean_Q"]
        for i, sol in enumerate(solutions):
            hv = analysis.hilbert_velocity(sol, cfg)
            rows.append(f"{i},{sol.duration:.12g},{hv.fidelity:.12g},{hv.mean:.12g}")
        (in_dir / "hilbert_velocity.csv").write_text("\n".join(rows) + "\n")
        print("wrote hilbert_velocity.csv")
    elif args.what == "qslfit":
        family = kass.SweepFamily(members=sorted(solutions, key=lambda s: s.duration),
                                  direction="down")
        fit = analysis.qsl_fit(family)
        archive.write_qsl_fit(in_dir / "qsl.json", fit)
        print(f"wrote qsl.json (T_QSL={fit.t_qsl:.4f}, residual={fit.residual:.4g})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import Store, create_app

    doc = json.loads(Path(args.config).read_text()) if args.config else {}
    store = Store(doc.get("store_dir", "./game-data"))
    app = create_app(store, frontend_dir=doc.get("frontend_dir"))
    uvicorn.run(app, host=doc.get("host", "127.0.0.1"), port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tweezerlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_kass = sub.add_parser("kass", help="randomly seeded sweep campaigns")
    kass_sub = p_kass.add_subparsers(dest="subcommand", required=True)
    p_run = kass_sub.add_parser("run", help="run a campaign")
    p_run.add_argument("--seeds", type=int, default=16)
    p_run.add_argument("--t-start", type=float, default=0.40)
    p_run.add_argument("--t-min", type=float, default=0.07)
    p_run.add_argument("--rng-seed", type=int, default=0)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--out", required=True)
    _add_common(p_run)
    p_run.set_defaults(func=cmd_kass_run)

    p_hilo = sub.add_parser("hilo", help="heuristic seed search and sweeps")
    hilo_sub = p_hilo.add_subparsers(dest="subcommand", required=True)
    p_search = hilo_sub.add_parser("search", help="direct search over the seed space")
    p_search.add_argument("--t", type=float, default=0.15)
    p_search.add_argument("--grid", default="5,5,5")
    p_search.add_argument("--budget", type=int, default=None)
    p_search.add_argument("--out", required=True)
    _add_common(p_search)
    p_search.set_defaults(func=cmd_hilo_search)
    p_sweep = hilo_sub.add_parser("sweep", help="sweep the best solutions of an archive")
    p_sweep.add_argument("--in", dest="in_dir", required=True)
    p_sweep.add_argument("--top", type=int, default=2)
    p_sweep.add_argument("--t-min", type=float, default=0.07)
    p_sweep.add_argument("--t-max", type=float, default=0.40)
    p_sweep.add_argument("--out", required=True)
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_hilo_sweep)

    p_an = sub.add_parser("analyze", help="solution-set analytics on an archive")
    p_an.add_argument("what", choices=["distances", "clans", "embed", "qvel", "qslfit"])
    p_an.add_argument("--in", dest="in_dir", required=True)
    p_an.add_argument("--metric", choices=["state", "control"], default="state")
    p_an.add_argument("--duration", type=float, default=None,
                      help="restrict to solutions of this duration")
    p_an.add_argument("--threshold", type=float, default=0.05)
    p_an.add_argument("--min-size", type=int, default=10)
    p_an.add_argument("--rng-seed", type=int, default=0)
    p_an.add_argument("--config", help="unused; archives carry their config")
    p_an.set_defaults(func=cmd_analyze)

    p_serve = sub.add_parser("serve", help="run the game service")
    p_serve.add_argument("--config", help="JSON: {store_dir, host, frontend_dir}")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
