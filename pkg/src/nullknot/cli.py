"""Command-line entry point ``nullknot``.

Subcommands: construct, check, evolve, trace, helicity, export. Options may
also come from ``--config file.json`` (validated against :data:`CONFIG_SCHEMA`);
explicit flags win over file values.

Probe points are drawn from ``numpy.random.Generator(PCG64(seed))`` with
``uniform(-R, R, size=(count, 3))``; the seed is recorded in every report.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 I/O or
snapshot format error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import sys

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, NumericError, SnapshotFormatError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
RNG_ALGORITHM = "numpy.random.Generator(PCG64(seed)).uniform(-R, R, size=(count, 3))"
HEALTHY_W = 1e-3

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {"type": "string", "pattern": r"^\s*\d+\s*,\s*\d+\s*$"},
        "rational_map": {"type": "string"},
        "nurowski": {"type": "string"},
        "snapshot": {"type": "string"},
        "L": {"type": "number", "exclusiveMinimum": 0},
        "N": {"type": "integer", "minimum": 8},
        "t": {"type": "number"},
        "times": {"type": "array", "items": {"type": "number"}},
        "points": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "transport": {"type": "boolean"},
        "project": {"type": "boolean"},
        "dt": {"type": "number"},
        "steps": {"type": "integer", "minimum": 1},
        "selector": {"enum": ["E", "B", "V", "B/W", "E/W"]},
        "trace_seed": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
        "max_length": {"type": "number", "exclusiveMinimum": 0},
        "rtol": {"type": "number", "exclusiveMinimum": 0},
        "atol": {"type": "number", "exclusiveMinimum": 0},
        "clean": {"type": "boolean"},
        "region": {"type": "array", "items": {"type": "number"}, "minItems": 6, "maxItems": 6},
        "region_nodes": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 3, "maxItems": 3},
        "guess": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
        "in": {"type": "string"},
        "out": {"type": "string"},
        "subcommand": {"type": "string"},
    },
}

SOURCES = ("family", "rational_map", "nurowski", "snapshot")


# helpers -----------------------------------------------------------------------


def _parse_pair(text):
    try:
        m, n = (int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"expected 'm,n', got {text!r}") from exc
    if m < 1 or n < 1:
        raise ConfigError("m and n must be positive")
    return m, n


def _parse_vec(text, k=3):
    try:
        v = [float(c) for c in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(f"expected {k} comma-separated numbers, got {text!r}") from exc
    if len(v) != k:
        raise ConfigError(f"expected {k} comma-separated numbers, got {text!r}")
    return v


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SnapshotFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _emit(report, out):
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if out:
        from .formats import atomic_write

        atomic_write(out, text.encode())
    else:
        sys.stdout.write(text)


def _report(cfg, body):
    rep = {"tool": "nullknot", "version": __version__, "config": cfg}
    rep.update(body)
    rep["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return rep


def strip_timestamp(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "generated_at"}


def _f(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _source(cfg, allowed=SOURCES):
    given = [s for s in SOURCES if cfg.get(s) is not None]
    if len(given) != 1:
        raise ConfigError(f"exactly one field source required (one of {', '.join('--' + s.replace('_', '-') for s in allowed)}); got {given or 'none'}")
    if given[0] not in allowed:
        raise ConfigError(f"--{given[0].replace('_', '-')} is not valid for this subcommand")
    return given[0]


def _analytic_field(cfg):
    """Returns ``(field, pair_or_None, static)`` for the configured analytic source."""
    from .bateman import knotted_family, knotted_family_pair
    from .construct import ProfileFunctions, RationalMap, rational_map_field

    src = _source(cfg, ("family", "rational_map"))
    if src == "family":
        mn = _parse_pair(cfg["family"])
        return knotted_family(mn), knotted_family_pair(mn), False
    rmap = RationalMap.from_json(_load_json(cfg["rational_map"]))
    return rational_map_field(rmap, ProfileFunctions()), None, True


def _probe(cfg):
    rng = np.random.Generator(np.random.PCG64(int(cfg["seed"])))
    R = float(cfg["radius"])
    return rng.uniform(-R, R, size=(int(cfg["points"]), 3))


# subcommands -------------------------------------------------------------------


def cmd_construct(cfg):
    from .core import sample
    from .formats import write_snapshot

    src = _source(cfg, ("family", "rational_map", "nurowski"))
    if src == "nurowski":
        return _construct_nurowski(cfg)
    if not cfg.get("out"):
        raise ConfigError("construct needs --out")
    field, _, static = _analytic_field(cfg)
    t = float(cfg["t"])
    if static and t != 0:
        raise ConfigError("rational-map data is defined at t = 0 only")
    spec = _grid(cfg).with_time(t)
    gf = sample(field, spec)
    write_snapshot(cfg["out"], gf)
    from .spectral import grid_null_residual, spectral_divergence

    _emit(_report(cfg, {"subcommand": "construct", "field": field.name, "grid_null_residual": grid_null_residual(gf), "spectral_divergence": spectral_divergence(gf)}), None)
    return EXIT_OK


def _construct_nurowski(cfg):
    from .construct import HolomorphicSeed, Region, conjugacy_from_gradient, conjugate_pair_from_seed, grid_fd_gradient

    seed = HolomorphicSeed.from_json(_load_json(cfg["nurowski"]))
    reg = cfg.get("region")
    if reg is None:
        raise ConfigError("--nurowski needs --region x0,y0,z0,x1,y1,z1")
    region = Region(tuple(reg[:3]), tuple(reg[3:]), tuple(cfg.get("region_nodes") or (9, 9, 9)))
    g = cfg.get("guess") or [0.5, 0.0, 0.3, 0.0]
    pair = conjugate_pair_from_seed(seed, region, (complex(g[0], g[1]), complex(g[2], g[3])))
    fd = grid_fd_gradient(pair)
    G = pair.grid["grad"]
    sel = np.all(np.isfinite(fd), axis=-1)
    scale = max(float(np.max(np.abs(G))), 1e-300)
    r1, r2 = conjugacy_from_gradient(G)
    body = {
        "subcommand": "construct",
        "field": f"nurowski[{seed.name}]",
        "stats": pair.stats,
        "conjugacy": {"modulus": _f(np.max(r1)), "orthogonality": _f(np.max(r2))},
        "fd_gradient_mismatch": _f(np.max(np.abs(fd[sel] - G[sel])) / scale) if np.any(sel) else None,
    }
    if cfg.get("out"):
        from .formats import atomic_write

        xs, ys, zs = pair.grid["axes"]
        buf = io.BytesIO()
        np.savez(buf, x=xs, y=ys, z=zs, fg=pair.grid["fg"], grad=G)
        atomic_write(cfg["out"], buf.getvalue())
    _emit(_report(cfg, body), None)
    return EXIT_OK


def _grid(cfg):
    from .core import GridSpec

    try:
        return GridSpec(float(cfg["L"]), int(cfg["N"]), float(cfg.get("t", 0.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_check(cfg):
    if cfg.get("snapshot"):
        return _check_snapshot(cfg)
    from . import diagnostics as D
    from . import flow
    from .core import eval_many
    from .errors import DegenerateFlowError

    field, _, static = _analytic_field(cfg)
    times = cfg.get("times") or [float(cfg["t"])]
    if static and any(t != 0 for t in times):
        raise ConfigError("rational-map data is defined at t = 0 only")
    pts = _probe(cfg)
    results = []
    for t in times:
        F, J = eval_many(field, t, pts[:, 0], pts[:, 1], pts[:, 2])
        nr = D.null_residuals(F).relative(F)
        sr = D.shear_relative(F, J)
        W = D.energy_density(F)
        wmax = W.max()
        ok = W > D.W_REL_FLOOR * wmax
        entries = [{"x": [float(c) for c in p], "W": float(w), "null": _f(a), "shear": _f(b)} for p, w, a, b in zip(pts, W, nr, sr)]
        if np.any(ok):
            st = flow.flow_state_many(field, t, *pts[ok].T, w_ref=wmax)
            sh = D.shear_residuals(F[ok], J[ok], st.V, st.JV, w_ref=wmax)
            for k, i in enumerate(np.flatnonzero(ok)):
                entries[i].update(
                    comp_sym=_f(sh.rel_comp[k]),
                    foliation=_f(sh.rel_foliation[k]),
                    tetrad_sigma=_f(sh.rel_sigma[k]),
                )
        block = {
            "t": float(t),
            "points": entries,
            "summary": {"null": D.summarize(nr), "shear": D.summarize(sr)},
        }
        if cfg.get("transport"):
            healthy = W >= HEALTHY_W * wmax
            rel = {}
            if np.any(healthy):
                try:
                    rep = flow.transport_residuals(field, t, *pts[healthy].T, w_ref=wmax)
                except DegenerateFlowError as exc:
                    raise NumericError(str(exc)) from exc
                rel = rep.rel
                for k, i in enumerate(np.flatnonzero(healthy)):
                    entries[i]["transport"] = {n: _f(rel[n][k]) for n in rep.NAMES}
            block["transport_summary"] = {n: D.summarize(rel.get(n, [])) for n in flow.TransportResidualReport.NAMES}
            block["transport_points"] = int(np.sum(healthy))
        results.append(block)
    body = {
        "subcommand": "check",
        "field": field.name,
        "rng": {"algorithm": RNG_ALGORITHM, "seed": int(cfg["seed"])},
        "results": results,
        "max_null_residual": max(b["summary"]["null"]["max"] for b in results),
        "max_shear_residual": max(b["summary"]["shear"]["max"] for b in results),
    }
    _emit(_report(cfg, body), cfg.get("out"))
    return EXIT_OK


def _check_snapshot(cfg):
    from .formats import read_snapshot
    from .spectral import grid_null_residual, spectral_divergence, spectral_energy

    gf = read_snapshot(cfg["snapshot"])
    body = {
        "subcommand": "check",
        "field": "snapshot",
        "grid": {"L": gf.spec.L, "N": gf.spec.N, "t": gf.spec.t},
        "grid_null_residual": grid_null_residual(gf),
        "spectral_divergence": spectral_divergence(gf),
        "spectral_energy": spectral_energy(gf),
    }
    _emit(_report(cfg, body), cfg.get("out"))
    return EXIT_OK


def cmd_evolve(cfg):
    from .formats import read_snapshot, write_snapshot
    from .spectral import grid_null_residual, project_divergence_free, propagate

    if not cfg.get("in") or not cfg.get("out"):
        raise ConfigError("evolve needs --in and --out")
    if cfg.get("dt") is None:
        raise ConfigError("evolve needs --dt")
    gf = read_snapshot(cfg["in"])
    if cfg.get("project"):
        gf = project_divergence_free(gf)
    history = [{"t": gf.spec.t, "grid_null_residual": grid_null_residual(gf)}]
    for _ in range(int(cfg["steps"])):
        gf = propagate(gf, float(cfg["dt"]))
        history.append({"t": gf.spec.t, "grid_null_residual": grid_null_residual(gf)})
    write_snapshot(cfg["out"], gf)
    _emit(_report(cfg, {"subcommand": "evolve", "history": history}), None)
    return EXIT_OK


def cmd_trace(cfg):
    from .fieldlines import TracerConfig, trace
    from .formats import write_polyline

    if not cfg.get("out"):
        raise ConfigError("trace needs --out")
    field, pair, static = _analytic_field(cfg)
    t = float(cfg["t"])
    if static and t != 0:
        raise ConfigError("rational-map data is defined at t = 0 only")
    tc = TracerConfig(
        rtol=float(cfg["rtol"]),
        atol=float(cfg["atol"]),
        max_length=float(cfg["max_length"]),
        selector=cfg["selector"],
    )
    if cfg.get("trace_seed") is None:
        raise ConfigError("trace needs --seed x,y,z")
    line = trace(field, cfg["selector"], cfg["trace_seed"], t, tc, pair=pair)
    write_polyline(cfg["out"], line)
    body = {
        "subcommand": "trace",
        "field": field.name,
        "vertices": int(len(line.s)),
        "length": line.length,
        "closed": bool(line.closed),
        "return_distance": _f(line.return_distance),
        "stop_reason": line.stop_reason,
    }
    _emit(_report(cfg, body), None)
    return EXIT_OK


def cmd_helicity(cfg):
    from .formats import read_snapshot
    from .spectral import helicities

    src = cfg.get("in") or cfg.get("snapshot")
    if not src:
        raise ConfigError("helicity needs --in snapshot")
    gf = read_snapshot(src)
    rep = helicities(gf, clean=bool(cfg.get("clean")))
    _emit(_report(cfg, {"subcommand": "helicity", "helicity": rep.as_dict()}), cfg.get("out"))
    return EXIT_OK


def cmd_export(cfg):
    from .formats import read_snapshot, write_vtk

    if not cfg.get("in") or not cfg.get("out"):
        raise ConfigError("export needs --in and --out")
    gf = read_snapshot(cfg["in"])
    write_vtk(cfg["out"], gf)
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "check": cmd_check,
    "evolve": cmd_evolve,
    "trace": cmd_trace,
    "helicity": cmd_helicity,
    "export": cmd_export,
}

DEFAULTS = {
    "construct": {"L": 6.0, "N": 64, "t": 0.0},
    "check": {"t": 0.0, "points": 200, "seed": 0, "radius": 3.0, "transport": False},
    "evolve": {"steps": 1, "project": False},
    "trace": {"t": 0.0, "selector": "B", "max_length": 50.0, "rtol": 1e-9, "atol": 1e-12},
    "helicity": {"clean": False},
    "export": {},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="nullknot", description="Knotted null light fields: construct, check, evolve, trace.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, sources=True):
        sp.add_argument("--config", help="JSON file with option values")
        if sources:
            sp.add_argument("--family", help="knotted family m,n")
            sp.add_argument("--rational-map", dest="rational_map", help="rational map JSON")
        sp.add_argument("--out")

    sp = sub.add_parser("construct", help="sample a field onto a snapshot, or build a Nurowski pair")
    common(sp)
    sp.add_argument("--nurowski", help="holomorphic seed JSON")
    sp.add_argument("--L", type=float)
    sp.add_argument("--N", type=int)
    sp.add_argument("--t", type=float)
    sp.add_argument("--region", type=lambda s: _parse_vec(s, 6))
    sp.add_argument("--region-nodes", dest="region_nodes", type=lambda s: [int(v) for v in _parse_vec(s, 3)])
    sp.add_argument("--guess", type=lambda s: _parse_vec(s, 4), help="re1,im1,re2,im2")

    sp = sub.add_parser("check", help="pointwise residual report")
    common(sp)
    sp.add_argument("--snapshot")
    sp.add_argument("--t", type=float)
    sp.add_argument("--times", type=lambda s: [float(v) for v in s.split(",")])
    sp.add_argument("--points", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--transport", action="store_true", default=None)

    sp = sub.add_parser("evolve", help="exact spectral propagation of a snapshot")
    common(sp, sources=False)
    sp.add_argument("--in", dest="in")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--project", action="store_true", default=None)

    sp = sub.add_parser("trace", help="trace a field line to CSV")
    common(sp)
    sp.add_argument("--selector", choices=["E", "B", "V", "B/W", "E/W"])
    sp.add_argument("--seed", dest="trace_seed", type=_parse_vec)
    sp.add_argument("--t", type=float)
    sp.add_argument("--max-length", dest="max_length", type=float)
    sp.add_argument("--rtol", type=float)
    sp.add_argument("--atol", type=float)

    sp = sub.add_parser("helicity", help="helicity integrals of a snapshot")
    common(sp, sources=False)
    sp.add_argument("--in", dest="in")
    sp.add_argument("--clean", action="store_true", default=None)

    sp = sub.add_parser("export", help="snapshot to VTK legacy ASCII")
    common(sp, sources=False)
    sp.add_argument("--in", dest="in")
    return p


def resolve_config(ns) -> dict:
    args = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    cfg = {}
    if getattr(ns, "config", None):
        file_cfg = _load_json(ns.config)
        try:
            jsonschema.validate(file_cfg, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config: {exc.message}") from exc
        cfg.update(file_cfg)
    for k, v in args.items():
        if v is not None:
            cfg[k] = v
    for k, v in DEFAULTS[ns.command].items():
        cfg.setdefault(k, v)
    cfg["subcommand"] = ns.command
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config: {exc.message}") from exc
    return dict(sorted(cfg.items()))


def run(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        print(f"nullknot: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SnapshotFormatError as exc:
        print(f"nullknot: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"nullknot: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericError as exc:
        print(f"nullknot: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
