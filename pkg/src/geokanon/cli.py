"""Command line interface: generate, mask, metrics, attack, report.

Exit status: 0 on success, 2 on usage or configuration errors, 3 on data
errors.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from contextlib import nullcontext
from pathlib import Path
from typing import List, Optional

from . import __version__
from .attack import DEFAULT_N_MAX, STRATEGIES, ScenarioId, run_scenario
from .dataset import AddressUniverse, ExternalDataset, LinkedDatasets, validate, validate_external
from .errors import ConfigError, DataError, DomainError, SamplingError
from .geometry import StudyArea, tolerance
from .io import (
    ReportEnvelope, file_digest, looks_geographic, read_json, read_points, read_report_json,
    records_digest, write_json, write_points_csv, write_report_json,
)
from .masking import MaskRun, mask_dataset, parse_method
from .metrics import compute_report
from .report import render_text, write_histograms
from .synth import Clustered, SynthSpec, generate

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def _area(text: Optional[str]) -> Optional[StudyArea]:
    if text is None:
        return None
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--area expects xmin,ymin,xmax,ymax, got {text!r}") from None
    if len(vals) != 4:
        raise ConfigError(f"--area expects xmin,ymin,xmax,ymax, got {text!r}")
    try:
        return StudyArea(*vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _pattern(text: str) -> Optional[Clustered]:
    if text == "uniform":
        return None
    name, _, args = text.partition(":")
    try:
        k, sigma = args.split(",")
        if name == "clustered":
            return Clustered(int(k), float(sigma))
    except ValueError:
        pass
    raise ConfigError(f"--pattern expects uniform or clustered:K,SIGMA, got {text!r}")


def _attribute(text: str):
    name, _, spec = text.partition("=")
    if not name or not spec:
        raise ConfigError(f"--attr expects NAME=VALUE:WEIGHT,..., got {text!r}")
    dist = {}
    for part in spec.split(","):
        value, _, weight = part.rpartition(":")
        try:
            dist[value] = float(weight)
        except ValueError:
            raise ConfigError(f"bad weight in --attr {text!r}") from None
    return name, dist


def _tolerance_from(args):
    eps = getattr(args, "eps", None)
    if eps is None:
        return nullcontext()
    if not (math.isfinite(eps) and eps >= 0):
        raise ConfigError(f"--eps must be finite and >= 0, got {eps}")
    return tolerance(eps)


def _csv_list(text: Optional[str]) -> List[str]:
    return [t for t in (text or "").split(",") if t]


def _load(path, planar: bool, label: str):
    if path is None:
        return None
    if not Path(path).exists():
        raise ConfigError(f"{label} file {path} does not exist")
    records = read_points(path)
    if not planar and looks_geographic(records):
        raise DataError(f"{label} coordinates look like lon/lat degrees; project them to a "
                        "planar CRS in meters or pass --planar if they already are")
    return records


def _method_from(args):
    """Method, clip flag and area from --method/--meta; --method wins."""
    meta = read_json(args.meta) if getattr(args, "meta", None) else None
    generating = None
    clip = getattr(args, "clip", False)
    area = _area(getattr(args, "area", None))
    if meta is not None:
        run = meta.get("run", {})
        generating = parse_method(run["method"]["descriptor"])
        clip = clip or bool(run.get("clip_to_area"))
        if area is None and meta.get("area"):
            area = StudyArea.from_dict(meta["area"])
    method = parse_method(args.method) if getattr(args, "method", None) else generating
    return method, generating, clip, area


def _digests(**paths) -> dict:
    return {k: file_digest(p) for k, p in sorted(paths.items()) if p is not None}


def _config_echo(args) -> dict:
    skip = {"func", "command"}
    out = {"command": args.command}
    for k, v in sorted(vars(args).items()):
        if k not in skip:
            out[k] = v
    return out


def _universe(records, area: Optional[StudyArea], linked_points) -> Optional[AddressUniverse]:
    if records is None:
        return None
    if area is None:
        import numpy as np

        xy = np.asarray([r.location for r in list(records) + list(linked_points)])
        area = StudyArea.bounding(xy)
    return AddressUniverse(records, area)


def _linked(args):
    original = _load(args.original, args.planar, "original")
    masked = _load(args.masked, args.planar, "masked")
    return original, masked


def _fail_on_violations(violations):
    if violations:
        shown = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        raise DataError(f"input validation failed: {shown}{more}")


# -- subcommands -----------------------------------------------------------

def cmd_generate(args) -> int:
    area = _area(args.area)
    attrs = dict(_attribute(a) for a in args.attr or [])
    spec = SynthSpec(area, args.universe_size, args.sample_size, _pattern(args.pattern),
                     attrs, args.seed, args.multiplicity)
    universe, targets = generate(spec)
    write_points_csv(universe.records, args.universe_out)
    write_points_csv(targets, args.original_out)
    if args.meta:
        write_json({
            "kind": "generate", "tool_version": __version__, "config": _config_echo(args),
            "area": area.to_dict(),
            "digests": _digests(universe=args.universe_out, original=args.original_out),
        }, args.meta)
    return EXIT_OK


def cmd_mask(args) -> int:
    method = parse_method(args.method)
    area = _area(args.area)
    if args.clip and area is None:
        raise ConfigError("--clip needs --area")
    original = _load(args.original, args.planar, "original")
    run = MaskRun(method, args.seed, args.clip)
    linked = mask_dataset(original, run, area)
    write_points_csv(linked.masked, args.out)
    meta_path = args.meta or f"{args.out}.meta.json"
    write_json({
        "kind": "mask",
        "tool_version": __version__,
        "run": run.to_dict(),
        "area": None if area is None else area.to_dict(),
        "config": _config_echo(args),
        "digests": {"original": file_digest(args.original), "masked": file_digest(args.out),
                    "masked_records": records_digest(linked.masked)},
    }, meta_path)
    return EXIT_OK


def cmd_metrics(args) -> int:
    started = time.perf_counter()
    method, generating, clip, area = _method_from(args)
    if clip and area is None:
        raise ConfigError("clipped method areas need --area (or a mask metadata file)")
    original, masked = _linked(args)
    universe_records = _load(args.universe, args.planar, "universe")
    universe = _universe(universe_records, area, original)
    linked = LinkedDatasets(original, masked, universe, generating)
    _fail_on_violations(validate(linked))
    report = compute_report(linked, universe, method, area=area, clip_to_area=clip)
    metrics = report.to_dict()
    if args.min_k is not None:
        metrics["threshold_check"] = report.threshold_check(args.min_k)
        if args.show_threshold:
            metrics["threshold"] = args.min_k
    env = ReportEnvelope(
        "metrics", _config_echo(args),
        _digests(original=args.original, masked=args.masked, universe=args.universe,
                 meta=args.meta),
        metrics=metrics,
        timing={"seconds": time.perf_counter() - started} if args.timing else None)
    write_report_json(env, args.out)
    return EXIT_OK


def cmd_attack(args) -> int:
    started = time.perf_counter()
    scenario = ScenarioId.parse(args.scenario)
    method, generating, clip, area = _method_from(args)
    original, masked = _linked(args)
    universe_records = _load(args.universe, args.planar, "universe")
    universe = _universe(universe_records, area, original)
    if area is None and universe is not None:
        area = universe.area
    linked = LinkedDatasets(original, masked, universe, generating)
    _fail_on_violations(validate(linked))
    external = None
    if args.external:
        external = ExternalDataset(_load(args.external, args.planar, "external"),
                                   participation_knowledge=scenario.participation,
                                   filter_on=_csv_list(args.filter_on))
        _fail_on_violations(validate_external(external, linked, universe))
    elif args.filter_on:
        raise ConfigError("--filter-on needs --external data carrying the attributes")
    outcome = run_scenario(scenario, linked, universe, external, args.strategy, method,
                           area, clip, _csv_list(args.sensitive), args.n_max)
    env = ReportEnvelope(
        "attack", _config_echo(args),
        _digests(original=args.original, masked=args.masked, universe=args.universe,
                 external=args.external, meta=args.meta),
        attack=outcome.to_dict(),
        timing={"seconds": time.perf_counter() - started} if args.timing else None)
    write_report_json(env, args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    env = read_report_json(args.input)
    if env.metrics is not None and not args.show_threshold:
        env.metrics.pop("threshold", None)
    sys.stdout.write(render_text(env))
    if args.svg:
        for path in write_histograms(env, args.svg):
            sys.stdout.write(f"wrote {path}\n")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geokanon", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"geokanon {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def inputs(sp, masked=True):
        sp.add_argument("--original", required=True, help="original records (CSV or GeoJSON)")
        if masked:
            sp.add_argument("--masked", required=True, help="masked records, same ids")
        sp.add_argument("--universe", help="all addresses B (CSV or GeoJSON)")
        sp.add_argument("--planar", action="store_true",
                        help="accept coordinates that look like lon/lat")

    def eps_opt(sp):
        sp.add_argument("--eps", type=float, help="boundary tolerance in meters (default 1e-9)")

    def method_opts(sp):
        sp.add_argument("--method", help="uniform:R | donut:RMIN,RMAX | gridsnap:CELL[,OX,OY]")
        sp.add_argument("--meta", help="mask run metadata (method, clipping, area)")
        sp.add_argument("--area", help="study area xmin,ymin,xmax,ymax")
        sp.add_argument("--clip", action="store_true", help="clip method areas to the study area")
        eps_opt(sp)

    g = sub.add_parser("generate", help="synthetic universe and target sample")
    g.add_argument("--area", required=True, help="xmin,ymin,xmax,ymax")
    g.add_argument("--universe-size", type=int, required=True)
    g.add_argument("--sample-size", type=int, required=True)
    g.add_argument("--pattern", default="uniform", help="uniform | clustered:K,SIGMA")
    g.add_argument("--attr", action="append", help="NAME=VALUE:WEIGHT,... (repeatable)")
    g.add_argument("--multiplicity", type=int, default=1, help="persons per sampled address")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--universe-out", required=True)
    g.add_argument("--original-out", required=True)
    g.add_argument("--meta", help="write generation metadata JSON here")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("mask", help="apply a geomasking method")
    m.add_argument("--original", required=True)
    m.add_argument("--method", required=True)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--area", help="study area xmin,ymin,xmax,ymax")
    m.add_argument("--clip", action="store_true", help="keep masked points inside --area")
    m.add_argument("--planar", action="store_true")
    m.add_argument("--out", required=True)
    m.add_argument("--meta", help="run metadata path (default: OUT.meta.json)")
    eps_opt(m)
    m.set_defaults(func=cmd_mask)

    k = sub.add_parser("metrics", help="per-record anonymity metrics as JSON")
    inputs(k)
    method_opts(k)
    k.add_argument("--min-k", type=int, help="check every metric against this minimum k")
    k.add_argument("--show-threshold", action="store_true",
                   help="also write the minimum-k value itself into the report")
    k.add_argument("--timing", action="store_true", help="record wall time (breaks byte identity)")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_metrics)

    a = sub.add_parser("attack", help="simulate an attack scenario")
    a.add_argument("--scenario", required=True, help="1.1 ... 2.4")
    a.add_argument("--strategy", choices=STRATEGIES + ("forward",), default="nn")
    inputs(a)
    method_opts(a)
    a.add_argument("--external", help="intruder's external data (CSV or GeoJSON)")
    a.add_argument("--filter-on", help="attributes to pre-filter candidates on, comma separated")
    a.add_argument("--sensitive", help="sensitive attribute names, comma separated")
    a.add_argument("--n-max", type=int, default=DEFAULT_N_MAX, help="assignment size limit")
    a.add_argument("--timing", action="store_true")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_attack)

    r = sub.add_parser("report", help="text summary (and SVG histograms) of a report")
    r.add_argument("--input", required=True)
    r.add_argument("--svg", help="directory for k histograms")
    r.add_argument("--show-threshold", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with _tolerance_from(args):
            return args.func(args)
    except ConfigError as exc:
        print(f"geokanon: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DomainError, SamplingError) as exc:
        print(f"geokanon: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"geokanon: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(cli_dispatch())
