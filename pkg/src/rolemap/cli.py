"""Command-line entry points for the full pipeline.

Subcommands: discover (fit + map), zoom (split one landmark), synth
(planted datasets), eval (homogeneity/likelihood report), render (DOT),
serve (HTTP explorer backend). Exit codes: 0 success, 2 input error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .cartographer import (
    ZoomSpec,
    build_map,
    load_map,
    render_dot,
    save_map,
    zoom,
)
from .graph_core import GraphFormatError, load_graph
from .metrics import evaluate
from .optimizer import fit
from .role_model import Hyperparams, load_model, save_model
from .synthgen import STRUCTURES, PlantedSpec, plant_params, sample_graph

EXIT_INPUT_ERROR = 2
EXIT_NUMERIC_ERROR = 3


def _add_hyper_flags(p, with_beta=True):
    p.add_argument("--alpha", type=float, default=0.5,
                   help="attribute-likelihood weight in [0,1]")
    p.add_argument("--alpha-r", type=float, default=0.2,
                   help="l1 weight on the interaction matrix")
    p.add_argument("--alpha-x", type=float, default=0.2,
                   help="l1 weight on the membership matrix")
    if with_beta:
        p.add_argument("--beta", type=float, default=0.002,
                       help="zoom locality weight")
    p.add_argument("--c-mode", choices=("unit", "mean"), default="unit",
                   help="virtual-node scaling for map probabilities")
    p.add_argument("--c", type=float, default=1.0,
                   help="virtual-node affiliation strength in unit mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=100,
                   help="outer iteration cap")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="relative-improvement stopping threshold")
    p.add_argument("--eta0", type=float, default=0.5,
                   help="initial normalized-gradient step size")


def _hyper_from_args(args):
    return Hyperparams(
        alpha=args.alpha,
        alpha_r=args.alpha_r,
        alpha_x=args.alpha_x,
        beta=getattr(args, "beta", 0.002),
        c_mode=args.c_mode,
        c=args.c,
        eta0=args.eta0,
        max_outer=args.max_iters,
        tol=args.tol,
        seed=args.seed,
    ).validate()


def _load_graph_args(args):
    return load_graph(args.edges, attr_path=args.attrs,
                      directed=args.directed, strict=getattr(args, "strict", False))


def cmd_discover(args):
    if args.attrs is None and args.alpha > 0:
        raise GraphFormatError(
            "alpha > 0 weights attribute likelihoods but no --attrs file was "
            "given; pass --attrs or set --alpha 0"
        )
    g = _load_graph_args(args)
    h = _hyper_from_args(args)
    m, state = fit(g, args.k, h, log_path=args.out_log)
    save_model(args.out_model, m, g.node_ids, g.attr_names,
               hyperparams=h, objective_trace=state.f_trace)
    nm = build_map(m, g, c_mode=h.c_mode, c=h.c)
    save_map(args.out_map, nm)
    print(f"fit: K={args.k} N={g.n_nodes} E={g.n_edges} L={g.n_attrs} "
          f"f={state.f_trace[-1]:.6f} iters={state.outer_iter}")
    print(f"wrote {args.out_model}, {args.out_map}, {args.out_log}")
    return 0


def cmd_zoom(args):
    g = _load_graph_args(args)
    doc = load_model(args.model)
    if doc.params.n_nodes != g.n_nodes:
        raise GraphFormatError("model node count does not match the graph")
    h = _hyper_from_args(args)
    parent_ids = None
    if args.parent_map:
        parent_ids = load_map(args.parent_map).landmark_ids
    spec = ZoomSpec(parent_params=doc.params, split_role=args.split_role,
                    n_subroles=args.n_subroles, beta=args.beta)
    child, child_map = zoom(g, spec, h, parent_landmark_ids=parent_ids,
                            log_path=args.out_log)
    save_model(args.out_model, child, g.node_ids, g.attr_names, hyperparams=h)
    save_map(args.out_map, child_map)
    print(f"zoom: split role {args.split_role} -> K={child.n_roles}")
    print(f"wrote {args.out_model}, {args.out_map}")
    return 0


def cmd_synth(args):
    spec = PlantedSpec(structure=args.structure, k=args.k, n=args.n, l=args.l,
                       membership_strength=args.strength, noise=args.noise,
                       density=args.density, seed=args.seed)
    m = plant_params(spec)
    g = sample_graph(m, seed=args.seed)
    from .graph_core import save_graph
    edge_path = f"{args.out_prefix}.edges.tsv"
    attr_path = f"{args.out_prefix}.attrs.tsv" if g.n_attrs else None
    model_path = f"{args.out_prefix}.model.json"
    save_graph(g, edge_path, attr_path)
    save_model(model_path, m, g.node_ids, g.attr_names)
    print(f"synth {args.structure}: N={g.n_nodes} E={g.n_edges} L={g.n_attrs}")
    print("wrote " + ", ".join(p for p in (edge_path, attr_path, model_path) if p))
    return 0


def cmd_eval(args):
    g = _load_graph_args(args)
    doc = load_model(args.model)
    if doc.params.n_nodes != g.n_nodes:
        raise GraphFormatError("model node count does not match the graph")
    h = Hyperparams(alpha=args.alpha, alpha_r=args.alpha_r, alpha_x=args.alpha_x)
    report = evaluate(g, doc.params, h)
    tsv = report.summary_tsv()
    if args.out_tsv:
        with open(args.out_tsv, "w", encoding="utf-8") as fh:
            fh.write(tsv)
    else:
        sys.stdout.write(tsv)
    if args.out_json:
        with open(args.out_json, "wb") as fh:
            fh.write(report.detail_json_bytes())
    return 0


def cmd_render(args):
    nm = load_map(args.map)
    dot = render_dot(nm, omega_min=args.omega_min)
    if args.out_dot:
        with open(args.out_dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
        print(f"wrote {args.out_dot}")
    else:
        sys.stdout.write(dot)
    return 0


def cmd_serve(args):
    import uvicorn

    from .map_service import SessionStore, create_app

    g = _load_graph_args(args)
    store = SessionStore(graph=g)
    app = create_app(store, assets_dir=args.assets)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rolemap",
        description="Discover latent roles in attributed graphs and render "
                    "them as zoomable maps.",
    )
    parser.add_argument("--version", action="version",
                        version=f"rolemap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discover", help="fit a K-role model and build its map")
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--strict", action="store_true",
                   help="treat duplicate edges as fatal")
    _add_hyper_flags(p)
    p.add_argument("--out-model", default="model.json")
    p.add_argument("--out-map", default="map.json")
    p.add_argument("--out-log", default="fit_log.tsv")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("zoom", help="split one landmark into sub-roles")
    p.add_argument("--model", required=True, help="parent model JSON")
    p.add_argument("--parent-map", help="parent map JSON (for landmark ids)")
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--split-role", type=int, required=True)
    p.add_argument("--n-subroles", type=int, default=2)
    _add_hyper_flags(p)
    p.add_argument("--out-model", default="child_model.json")
    p.add_argument("--out-map", default="child_map.json")
    p.add_argument("--out-log", default="zoom_log.tsv")
    p.set_defaults(func=cmd_zoom)

    p = sub.add_parser("synth", help="generate a planted synthetic dataset")
    p.add_argument("--structure", choices=STRUCTURES, required=True)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--l", type=int, default=5)
    p.add_argument("--strength", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--density", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", default="syn")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="evaluate a fitted model on a graph")
    p.add_argument("--model", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--alpha-r", type=float, default=0.2)
    p.add_argument("--alpha-x", type=float, default=0.2)
    p.add_argument("--out-tsv")
    p.add_argument("--out-json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render a map document to Graphviz DOT")
    p.add_argument("--map", required=True)
    p.add_argument("--omega-min", type=float, default=0.05,
                   help="hide roads below this probability")
    p.add_argument("--out-dot")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP explorer backend")
    p.add_argument("--edges", required=True)
    p.add_argument("--attrs")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--assets", help="directory of built explorer assets")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_ERROR


if __name__ == "__main__":
    sys.exit(main())
