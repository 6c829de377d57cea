"""Command-line driver: ``flowmap {simulate,build,evaluate,plan,serve}``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import fields

from . import pipeline
from .engine import DynamicsMap
from .exceptions import FlowMapError, InvalidArgument
from .pipeline import RunConfig
from .service import PredictionService, make_tcp_server

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_config_flags(p):
    p.add_argument("--config", help="JSON file with run parameters")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "periods":
            p.add_argument(flag, type=float, nargs="+", default=None, help="candidate periods, seconds")
        elif f.name in ("n_bins", "order", "n_scenes", "seed"):
            p.add_argument(flag, type=int, default=None)
        else:
            p.add_argument(flag, type=float, default=None)


def _config(args):
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig) if getattr(args, f.name, None) is not None}
    if overrides:
        d = cfg.to_dict()
        d.update(overrides)
        try:
            cfg = RunConfig(**d)
        except InvalidArgument as exc:
            raise UsageError(str(exc)) from None
    return cfg


def _scene_list(args):
    dirs = list(args.scenes or [])
    if args.data:
        dirs += pipeline.scene_dirs(args.data)
    if not dirs:
        raise UsageError("no scene directories given (use --data DIR or positional scene dirs)")
    return dirs


def cmd_simulate(args):
    cfg = _config(args)
    written = pipeline.run_simulate(cfg, args.out)
    print(f"wrote {len(written)} scenes to {args.out}")


def cmd_build(args):
    cfg = _config(args)
    for d in _scene_list(args):
        pipeline.run_build(cfg, d)
        print(f"built {d}")


def cmd_evaluate(args):
    modes = pipeline.MODES if args.mode == "both" else (args.mode,)
    _, agg = pipeline.run_evaluate(_scene_list(args), args.out, modes)
    print(agg.to_table())


def cmd_plan(args):
    cfg = _config(args)
    dmap = DynamicsMap.load(args.model or os.path.join(args.scene, pipeline.MODEL_FILE))
    if args.start not in dmap.graph or args.goal not in dmap.graph:
        raise FlowMapError(f"unknown node id: start={args.start} goal={args.goal}")
    t = args.t
    if args.mode == "predicted" and t is None:
        t = dmap.last_t or 0.0
    record = pipeline.run_plan(cfg, dmap, args.start, args.goal, args.mode, t)
    text = json.dumps({"plan": record["plan"], "baseline": record["baseline"]}, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.overlay:
        with open(args.overlay, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["path", "order", "node", "x", "y", "z"])
            w.writeheader()
            w.writerows(record["overlay"])


def cmd_serve(args):
    dmap = DynamicsMap.load(args.model or os.path.join(args.scene, pipeline.MODEL_FILE))
    service = PredictionService(dmap)
    if args.port is None:
        service.serve_stream(sys.stdin, sys.stdout)
        return
    server = make_tcp_server(service, args.host, args.port)
    print(f"serving on {server.server_address[0]}:{server.server_address[1]}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def build_parser():
    parser = _Parser(prog="flowmap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate synthetic scenes")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build", help="build graph and grid models for scenes")
    p.add_argument("scenes", nargs="*")
    p.add_argument("--data", help="directory holding scene sub-directories")
    _add_config_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("evaluate", help="compare graph and grid models")
    p.add_argument("scenes", nargs="*")
    p.add_argument("--data")
    p.add_argument("--out", help="directory for the report table and per-scene records")
    p.add_argument("--mode", choices=("historical", "predicted", "both"), default="both")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plan", help="A* with temporal edge costs")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scene")
    g.add_argument("--model")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--goal", type=int, required=True)
    p.add_argument("--mode", choices=("historical", "predicted"), default="historical")
    p.add_argument("--t", type=float)
    p.add_argument("--out")
    p.add_argument("--overlay", help="CSV of path node positions for plotting")
    _add_config_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("serve", help="answer prediction requests (stdio, or TCP with --port)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--scene")
    g.add_argument("--model")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        args.func(args)
    except UsageError as exc:
        print(f"flowmap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FlowMapError, OSError) as exc:
        print(f"flowmap: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
