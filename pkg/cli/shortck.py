#!/usr/bin/env python3
# cli/shortck.py
"""
shortck command line.

    python -m cli.shortck render --config run.cfg --out reports/demo
    python -m cli.shortck gen-sequence --set scenario.K=1 --set sequence.n=20

Run-config files use [section] headers and `key = value` lines; every key
is listed in CONFIG_SCHEMA. Omitted keys take their value from
core.config.get_config(). Exit status: 0 success, 1 domain failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from core.config import get_config
from core.errors import ConfigError, PreconditionError, ShortCkError
from core.maps import DiagLinear, Generator, PolySpec, constant, validate_sequence
from utils.artifacts import manifest_hash, write_csv, write_manifest, write_pbm, write_pgm
from utils.basin import Fate, classify_point, render_slice
from utils.conjugacy import (
    PROFILE_HEADER,
    SCHEDULE_HEADER,
    bump_perturbation,
    check_perturbation,
    conjugacy_profile,
    sphere_samples,
    tolerance_schedule,
    verify_uub,
)
from utils.dimension import boxdim_estimate, count_rows, eps_schedule, reference_set
from utils.julia1d import Poly1, hyperbolicity_probe, julia_grid, nested_sequence, perturbed_orbits
from utils.kobayashi import disc_witness
from utils.potential import converged_psi, positive_real_bound, positive_real_table
from utils.shortck_suite import (
    Scenario,
    TubeSpec,
    build_coupled_scenario,
    build_rosay_rudin_scenario,
    build_theorem11_scenario,
    couple_sequence_to_julia,
    julia_frame,
    measure_jplus,
    tube_test,
)

log = logging.getLogger("shortck")

COMMANDS = (
    "render",
    "potential-table",
    "boxdim",
    "julia",
    "nested",
    "conjugacy-check",
    "kobayashi",
    "jplus-measure",
    "gen-sequence",
)


class Key(NamedTuple):
    kind: str  # int, float, str, bool, floats, ints
    default: Any = None
    cfg: Optional[str] = None  # get_config() key supplying the default
    choices: Tuple[str, ...] = ()


CONFIG_SCHEMA: Dict[str, Dict[str, Key]] = {
    "run": {
        "command": Key("str", choices=COMMANDS),
        "out_dir": Key("str", cfg="out_dir"),
        "seed": Key("int", cfg="seed"),
        "threads": Key("int", cfg="threads"),
    },
    "scenario": {
        "family": Key("str", "shiftlike", choices=("shiftlike", "rosay_rudin", "coupled")),
        "P": Key("floats", cfg="poly"),
        "K": Key("float", cfg="generator_K"),
        "g": Key("float", cfg="generator_g"),
        "c": Key("float"),
        "n_max": Key("int", cfg="n_max"),
        "m": Key("int", 0),
        "resolution": Key("int", cfg="resolution"),
    },
    "render": {
        "plane": Key("str", "z1", choices=("z1", "real")),
    },
    "potential": {
        "x_min": Key("float", 0.01),
        "count": Key("int", 50),
        "y": Key("float", 0.0),
        "ns": Key("ints", [1, 2, 4, 8, 16]),
    },
    "boxdim": {
        "shape": Key("str", "circle", choices=("point", "circle", "square", "julia")),
        "decades": Key("float", cfg="eps_decades"),
        "count": Key("int", cfg="eps_count"),
    },
    "julia": {
        "family": Key("str", "square", choices=("square", "quartic", "coeffs")),
        "a": Key("float", 0.01),
        "b": Key("float", 0.01),
        "coeffs": Key("floats", [0.0, 0.0, 1.0]),
        "delta": Key("float"),
        "iters": Key("int", cfg="julia_iters"),
        "streams": Key("int", 100),
    },
    "conjugacy": {
        "alpha": Key("float", 0.5),
        "r": Key("float", 1.0),
        "C": Key("float", 0.6),
        "n_max": Key("int", 30),
        "factor": Key("float", 0.0),
        "bump": Key("str", "linear", choices=("linear", "quadratic", "cross")),
    },
    "kobayashi": {
        "point": Key("floats", [0.05, 0.0, 0.05, 0.0]),
        "xi": Key("floats", [1.0, 0.0, 0.0, 0.0]),
        "R": Key("floats", [10.0, 100.0, 1000.0]),
        "samples": Key("int", cfg="disc_samples"),
    },
    "tube": {
        "C": Key("float", 0.5),
        "delta": Key("float", 0.2),
        "R": Key("float", 2.0),
        "samples": Key("int", 200),
        "witnesses": Key("int", 100),
    },
    "sequence": {
        "n": Key("int", 20),
    },
}


@dataclass
class RunConfig:
    command: str
    out_dir: str
    seed: int
    threads: int
    values: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def sections(self) -> Dict[str, Dict[str, Any]]:
        """Manifest sections: the full run config, defaults included, output path excluded."""
        sections = {f"config.{name}": dict(body) for name, body in self.values.items()}
        sections["config.run"].pop("out_dir", None)
        return sections


# ---------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------

def _coerce(key: Key, raw: str, line: Optional[int], name: str) -> Any:
    try:
        if key.kind == "int":
            return int(raw)
        if key.kind == "float":
            return float(raw)
        if key.kind == "bool":
            if raw.lower() not in ("true", "false", "1", "0"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1")
        if key.kind == "floats":
            return [float(v) for v in raw.split(",") if v.strip()]
        if key.kind == "ints":
            return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name}: expected {key.kind}, got '{raw}'", line, name) from exc
    if key.choices and raw not in key.choices:
        raise ConfigError(f"{name}: '{raw}' is not one of {', '.join(key.choices)}", line, name)
    return raw


def _lookup(section: str, key: str, line: Optional[int]) -> Key:
    if section not in CONFIG_SCHEMA:
        raise ConfigError(f"unknown section [{section}]", line, section)
    spec = CONFIG_SCHEMA[section].get(key)
    if spec is None:
        raise ConfigError(f"unknown key '{section}.{key}'", line, f"{section}.{key}")
    return spec


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """Validate a run-config and fill every omitted key from the defaults table."""
    given: Dict[str, Dict[str, Any]] = {}
    seen: Dict[str, int] = {}
    section: Optional[str] = None
    lines = text.splitlines()
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in CONFIG_SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, section)
            given.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", lineno)
        if section is None:
            raise ConfigError("key outside any [section]", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        spec = _lookup(section, key, lineno)
        given[section][key] = _coerce(spec, raw, lineno, f"{section}.{key}")
        seen[f"{section}.{key}"] = lineno

    run = given.setdefault("run", {})
    if command is not None:
        if "command" in run and run["command"] != command:
            raise ConfigError(
                f"run.command '{run['command']}' disagrees with requested '{command}'",
                seen.get("run.command"), "run.command",
            )
        run["command"] = _coerce(CONFIG_SCHEMA["run"]["command"], command, None, "run.command")
    if "command" not in run:
        raise ConfigError("missing required key 'run.command'", len(lines) + 1, "run.command")

    cfg = get_config()
    values: Dict[str, Dict[str, Any]] = {}
    for name, keys in CONFIG_SCHEMA.items():
        body = {}
        for key, spec in keys.items():
            if key in given.get(name, {}):
                body[key] = given[name][key]
            elif spec.cfg is not None:
                body[key] = _copy(cfg[spec.cfg])
            else:
                body[key] = _copy(spec.default)
        values[name] = body
    return _finish(values)


def _copy(value: Any) -> Any:
    return list(value) if isinstance(value, (list, tuple)) else value


def _finish(values: Dict[str, Dict[str, Any]]) -> RunConfig:
    run = values["run"]
    if int(run["threads"]) < 1:
        raise ConfigError(f"run.threads must be >= 1, got {run['threads']}", key="run.threads")
    return RunConfig(
        command=run["command"],
        out_dir=str(run["out_dir"]),
        seed=int(run["seed"]),
        threads=int(run["threads"]),
        values=values,
    )


def apply_override(cfg: RunConfig, assignment: str) -> RunConfig:
    """Apply one `section.key=value` override (the --set flag)."""
    if "=" not in assignment or "." not in assignment.split("=", 1)[0]:
        raise ConfigError(f"override must look like section.key=value, got '{assignment}'")
    dotted, raw = assignment.split("=", 1)
    section, key = dotted.strip().split(".", 1)
    spec = _lookup(section, key, None)
    values = {name: dict(body) for name, body in cfg.values.items()}
    values[section][key] = _coerce(spec, raw.strip(), None, dotted.strip())
    return _finish(values)


def _emit_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(_emit_value(v) for v in value)
    return str(value)


def emit_config(cfg: RunConfig) -> str:
    """Render a RunConfig as run-config text; parse_config(emit_config(cfg)) == cfg."""
    out: List[str] = []
    for name, body in cfg.values.items():
        out.append(f"[{name}]")
        for key, value in body.items():
            if value is None:
                continue
            out.append(f"{key} = {_emit_value(value)}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------

def _poly(cfg: RunConfig) -> Poly1:
    family = cfg.get("julia", "family")
    if family == "square":
        return Poly1((0.0, 0.0, 1.0))
    if family == "quartic":
        return Poly1.quartic_family(cfg.get("julia", "a"), cfg.get("julia", "b"))
    return Poly1(tuple(cfg.get("julia", "coeffs")))


def _tube(cfg: RunConfig) -> TubeSpec:
    return TubeSpec(cfg.get("tube", "C"), cfg.get("tube", "delta"), cfg.get("tube", "R"))


def _scenario(cfg: RunConfig, family: Optional[str] = None) -> Scenario:
    family = family or cfg.get("scenario", "family")
    n_max = cfg.get("scenario", "n_max")
    res = cfg.get("scenario", "resolution")
    if family == "rosay_rudin":
        c = cfg.get("scenario", "c")
        return build_rosay_rudin_scenario(cfg.get("scenario", "m"), c if c is not None else 0.1, n_max, res)
    if family == "coupled":
        return build_coupled_scenario(_poly(cfg), _tube(cfg), n_max, res)
    return build_theorem11_scenario(
        PolySpec(tuple(cfg.get("scenario", "P"))),
        cfg.get("scenario", "K"),
        cfg.get("scenario", "g"),
        cfg.get("scenario", "c"),
        n_max,
        res,
    )


@dataclass
class Outcome:
    ok: bool
    result: Dict[str, Any]
    writers: List[Callable[[Path, str], Path]] = field(default_factory=list)


def cmd_render(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    scen = _scenario(cfg)
    extra.update(scen.manifest_sections())
    window = scen.windows[-1] if cfg.get("render", "plane") == "z1" else scen.windows[0]
    grid = render_slice(scen.seq, window, scen.params, cfg.threads)
    origin = classify_point(scen.seq, (0j,) * scen.seq.k, scen.params)
    counts = grid.counts()
    ok = counts["attracted"] > 0 and origin.tag is Fate.ATTRACTED
    shades = grid.shades()
    return Outcome(ok, {**counts, "origin": origin.tag.name},
                   [lambda out, h: write_pgm(out / "render.pgm", shades, h)])


def cmd_potential_table(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    scen = _scenario(cfg, "shiftlike")
    extra.update(scen.manifest_sections())
    c = scen.params.c
    c0 = scen.seq.P.coeffs[0]
    xs = np.geomspace(cfg.get("potential", "x_min") * c, c, cfg.get("potential", "count"), endpoint=False)
    y = cfg.get("potential", "y")
    table = positive_real_table(scen.seq, xs, y, cfg.get("potential", "ns"), scen.params.M)
    limits, misses = [], 0
    for x in xs:
        lim = converged_psi(scen.seq, (x, y), scen.params.n_max)
        lower = positive_real_bound(c0, x, lim.n)
        inside = lower - 1e-6 <= lim.value < 0.0
        misses += not inside
        limits.append([float(x), y, lim.value, lim.n, lim.stop_rule, lower, inside])
    values = [row[2] for row in limits]
    spread = max(values) - min(values)
    ok = misses == 0 and spread > 0.5
    return Outcome(ok, {"points": len(xs), "bracket_misses": misses, "psi_spread": spread}, [
        lambda out, h: write_csv(out / "potential_table.csv", ["x", "y", "n", "psi", "envelope"], table),
        lambda out, h: write_csv(out / "potential_limit.csv",
                                 ["x", "y", "psi", "n", "stop_rule", "lower_bound", "inside"], limits),
    ])


def cmd_boxdim(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    shape = cfg.get("boxdim", "shape")
    res = cfg.get("scenario", "resolution")
    if shape == "julia":
        rect, res = julia_frame(res)
        S = julia_grid(_poly(cfg), rect, res, cfg.get("julia", "iters"))
    else:
        S = reference_set(shape, res)
    eps = eps_schedule(min(S.pixel), cfg.get("boxdim", "decades"), cfg.get("boxdim", "count"))
    est = boxdim_estimate(S, eps, cfg.threads)
    rows = count_rows(S, eps)
    result = {"dimension": est.slope, "r2": est.r2, "window": list(est.window),
              "flagged": est.flagged, "notes": est.notes, "pixels": S.count()}
    return Outcome(True, result, [
        lambda out, h: write_csv(out / "boxdim.csv", ["eps", "count", "log_inv_eps", "log_count"], rows),
        lambda out, h: write_pbm(out / "boxdim.pbm", S.image_bits(), h),
    ])


def cmd_julia(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    p = _poly(cfg)
    rect, res = julia_frame(cfg.get("scenario", "resolution"))
    J = julia_grid(p, rect, res, cfg.get("julia", "iters"))
    probe = hyperbolicity_probe(p, cfg.get("julia", "iters"))
    extra["poly"] = p.describe()
    result = {"pixels": J.count(), "hyperbolicity": probe.status, "notes": probe.notes + J.notes}
    return Outcome(probe.status != "FAIL", result, [lambda out, h: write_pbm(out / "julia.pbm", J.image_bits(), h)])


def cmd_nested(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    p = _poly(cfg)
    rect, res = julia_frame(cfg.get("scenario", "resolution"))
    nested = nested_sequence(p, cfg.get("julia", "delta"), cfg.get("scenario", "n_max"), rect, res,
                             cfg.get("julia", "iters"))
    streams = cfg.get("julia", "streams")
    inner, outer = nested.C0.points(), nested.E0.points()
    if inner.size == 0 or outer.size == 0:
        raise PreconditionError("nested sequence has an empty component")
    starts = np.concatenate([inner[rng.integers(0, inner.size, streams)],
                             outer[rng.integers(0, outer.size, streams)]])
    expect = np.concatenate([np.ones(streams, bool), np.zeros(streams, bool)])
    report = perturbed_orbits(p, nested, starts, expect, rng)
    extra["poly"] = p.describe()
    result = {"steps": len(nested.steps), "delta0": nested.delta0, "notes": nested.notes,
              "compact_to_zero": report.compact_to_zero, "unbounded_escaped": report.unbounded_escaped,
              "mismatched": report.mismatched}
    return Outcome(report.ok, result, [
        lambda out, h: write_csv(out / "nested.csv", ["n", "delta", "eta", "cprime", "diameter"], nested.csv_rows()),
        lambda out, h: write_pbm(out / "nested_C0.pbm", nested.C0.image_bits(), h),
    ])


def cmd_conjugacy_check(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    sec = cfg.values["conjugacy"]
    S = constant(DiagLinear.scalar(sec["alpha"]))
    w = verify_uub(S, sec["r"], sec["C"], sec["n_max"], rng=rng)
    if not w.ok:
        return Outcome(False, {"status": "FAIL", "reason": f"uniform bound violated at {w.violation}"})
    sched = tolerance_schedule(w, S, sec["n_max"], rng=rng)
    F = S if sec["factor"] == 0.0 else bump_perturbation(S, sched, sec["factor"], sec["bump"])
    check = check_perturbation(S, F, sched, rng=rng)
    K = sphere_samples(S.k, w.r0, int(get_config()["sphere_radii"]), int(get_config()["sphere_samples"]), rng)
    profile = conjugacy_profile(S, F, sched, K)
    ok = check.ok and profile.ok
    extra["witness"] = w.describe()
    result = {"status": "PASS" if ok else "FAIL", "perturbation_ok": check.ok,
              "certificate_ok": profile.certificate_ok, "worst_slack": profile.worst_slack,
              "max_step_sup": max(profile.step_sup, default=0.0), "violations": check.violations[:5]}
    return Outcome(ok, result, [
        lambda out, h: write_csv(out / "schedule.csv", SCHEDULE_HEADER, sched.csv_rows()),
        lambda out, h: write_csv(out / "profile.csv", PROFILE_HEADER, profile.csv_rows()),
    ])


def cmd_kobayashi(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    scen = _scenario(cfg, "shiftlike")
    extra.update(scen.manifest_sections())
    raw_p, raw_xi = cfg.get("kobayashi", "point"), cfg.get("kobayashi", "xi")
    if len(raw_p) != 2 * scen.seq.k or len(raw_xi) != 2 * scen.seq.k:
        raise ConfigError("kobayashi.point and kobayashi.xi need re, im pairs per coordinate", key="kobayashi.point")
    p = tuple(complex(raw_p[2 * i], raw_p[2 * i + 1]) for i in range(scen.seq.k))
    xi = np.array([complex(raw_xi[2 * i], raw_xi[2 * i + 1]) for i in range(scen.seq.k)])
    xi = tuple(xi / np.linalg.norm(xi))
    rows, ok = [], True
    for R in cfg.get("kobayashi", "R"):
        wit = disc_witness(scen.seq, p, xi, R, cfg.get("kobayashi", "samples"), scen.params)
        ok &= wit.ok and wit.rel_error < 0.01
        s = wit.summary()
        rows.append([R, s["n"], s["rel_error"], s["center_error"], s["containment_violations"], s["fd_step"], s["ok"]])
    header = ["R", "n", "rel_error", "center_error", "containment_violations", "fd_step", "ok"]
    return Outcome(ok, {"radii": len(rows)}, [lambda out, h: write_csv(out / "kobayashi.csv", header, rows)])


def cmd_jplus_measure(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    scen = _scenario(cfg, "coupled")
    extra.update(scen.manifest_sections())
    tube = _tube(cfg)
    tubes = tube_test(scen, cfg.get("tube", "samples"), rng)
    report = measure_jplus(scen, tube, witness_count=cfg.get("tube", "witnesses"), rng=rng, threads=cfg.threads)
    result = {**report.summary(), "tube_compact_attracted": tubes.compact_attracted,
              "tube_unbounded_escaped": tubes.unbounded_escaped}
    writers = [lambda out, h: write_pgm(out / "jplus_slice.pgm", report.grid.shades(), h)]
    if report.boundary is not None:
        writers.append(lambda out, h: write_pbm(out / "jplus_boundary.pbm", report.boundary.image_bits(), h))
    return Outcome(report.ok and tubes.ok, result, writers)


def cmd_gen_sequence(cfg: RunConfig, rng: np.random.Generator, extra: Dict[str, Any]) -> Outcome:
    n = cfg.get("sequence", "n")
    if cfg.get("scenario", "family") == "coupled":
        coeffs = couple_sequence_to_julia(_poly(cfg), _tube(cfg), n, K=cfg.get("scenario", "K"),
                                          g=cfg.get("scenario", "g"),
                                          resolution=cfg.get("scenario", "resolution"))
    else:
        coeffs = Generator(cfg.get("scenario", "K"), cfg.get("scenario", "g"))
    report = validate_sequence(coeffs, n)
    rows = [[j, coeffs.log_a(j)] for j in range(n + 1)]
    extra["sequence"] = coeffs.describe()
    result = {"ok": report.ok, "ordering": report.ordering, "root_decay": report.root_decay,
              "violations": report.violations[:5]}
    return Outcome(report.ok, result, [lambda out, h: write_csv(out / "gen_sequence.csv", ["n", "log_a"], rows)])


HANDLERS: Dict[str, Callable[[RunConfig, np.random.Generator, Dict[str, Any]], Outcome]] = {
    "render": cmd_render,
    "potential-table": cmd_potential_table,
    "boxdim": cmd_boxdim,
    "julia": cmd_julia,
    "nested": cmd_nested,
    "conjugacy-check": cmd_conjugacy_check,
    "kobayashi": cmd_kobayashi,
    "jplus-measure": cmd_jplus_measure,
    "gen-sequence": cmd_gen_sequence,
}


def dispatch(cfg: RunConfig) -> int:
    """Run one command, write `<command>.manifest` plus artifacts. Returns the exit status."""
    rng = np.random.default_rng(cfg.seed)
    extra: Dict[str, Any] = {}
    outcome = HANDLERS[cfg.command](cfg, rng, extra)
    sections = cfg.sections()
    sections.update({k: v if isinstance(v, dict) else {"value": v} for k, v in extra.items()})
    sections["result"] = dict(outcome.result)
    sections["result"]["status"] = "PASS" if outcome.ok else "FAIL"
    digest = manifest_hash(sections)
    out = Path(cfg.out_dir)
    for writer in outcome.writers:
        path = writer(out, digest)
        log.info("[shortck] wrote %s", path)
    manifest = out / f"{cfg.command}.manifest"
    write_manifest(manifest, sections)
    print(f"[shortck] {cfg.command}: {sections['result']['status']} -> {manifest}")
    return 0 if outcome.ok else 1


# ---------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shortck", description="Short C^k basin toolkit")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="run-config file ([section] / key = value)")
    parser.add_argument("--out", help="output directory (run.out_dir)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    cfg = parse_config(text, command=args.command)
    for flag, dotted in ((args.out, "run.out_dir"), (args.seed, "run.seed"), (args.threads, "run.threads")):
        if flag is not None:
            cfg = apply_override(cfg, f"{dotted}={flag}")
    for assignment in args.set:
        cfg = apply_override(cfg, assignment)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    verbose = args.verbose or bool(get_config()["verbose"])
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="[%(levelname)s] %(name)s: %(message)s")
    try:
        cfg = load_run_config(args)
    except OSError as exc:
        log.error("[shortck] cannot read config: %s", exc)
        return 2
    except ConfigError as exc:
        log.error("[shortck] config error: %s", exc)
        return 2
    try:
        return dispatch(cfg)
    except ConfigError as exc:
        log.error("[shortck] config error: %s", exc)
        return 2
    except ShortCkError as exc:
        log.error("[shortck] %s failed: %s", cfg.command, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
