"""Command-line experiment runner.

Subcommands: ``gauge``, ``verify``, ``sfc``, ``fusion``, ``cocycle-check`` and
``braiding``.  Settings come from flags or a JSON config file (flags win).
Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cohomology import CohomologyError, builtin_cocycle, verify_cocycle_condition
from .gauging import GaugingPlan, run_gauging, verify_outcome_constraint
from .groups import GroupError, build_group
from .hamiltonians import set_terms, tqd_terms, verify_eigenstate
from .lattice import LatticeError, build_torus
from .qstate import StateError, build_tqd_state
from .setprobe import (
    SetProbeError,
    anyon_table,
    braiding_phase,
    fusion_decompose,
    open_ribbon_matrix,
    set_context,
    sfc_table,
)

__all__ = [
    "ParseError",
    "ValidationError",
    "ExperimentConfig",
    "Report",
    "parse_config",
    "run_command",
    "emit_report",
    "main",
]

COMMANDS = ("gauge", "verify", "sfc", "fusion", "cocycle-check", "braiding")

PARAM_NAMES = {
    "Z2xZ2": ("k1", "k2", "k3"),
    "Z2xZ2xZ2": ("k1", "k2"),
    "S3": ("p1", "p2"),
    "D4": ("p1", "p2", "p3"),
    "Q8": ("p",),
}


class ParseError(Exception):
    pass


class ValidationError(Exception):
    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ExperimentConfig:
    command: str
    group: str = "Z2"
    family: str | None = None
    params: tuple[int, ...] = ()
    lattice: tuple[int, int] = (2, 2)
    strategy: str = "quotient-chain"
    seed: int = 0
    forced: dict | None = None
    normal: tuple[str, ...] = ()
    generators: tuple[str, ...] = ()
    flux: str | None = None
    out: str | None = None
    fmt: str = "json"

    def echo(self) -> dict:
        d = asdict(self)
        d["params"] = list(self.params)
        d["lattice"] = list(self.lattice)
        d["normal"] = list(self.normal)
        d["generators"] = list(self.generators)
        return d


@dataclass
class Report:
    config: dict
    results: list[dict] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.results)

    def add(self, check: str, ok: bool, **detail) -> None:
        self.results.append({"check": check, "pass": bool(ok), **detail})


# ------------------------------------------------------------------ parsing


def _parse_params(text: str, group: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if all("=" not in p for p in parts):
        return tuple(int(p) for p in parts)
    names = PARAM_NAMES.get(group, ("p",))
    values = dict.fromkeys(names, 0)
    for p in parts:
        key, _, val = p.partition("=")
        key = key.strip()
        if key not in values:
            raise ParseError(f"unknown cocycle parameter {key!r} for {group}; expected {names}")
        values[key] = int(val)
    return tuple(values[n] for n in names)


def _split_labels(text: str) -> tuple[str, ...]:
    """Split on commas that are not inside parentheses, so ``(0,1),(1,0)`` stays two labels."""
    out, depth, cur = [], 0, []
    for ch in text:
        depth += (ch == "(") - (ch == ")")
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur).strip())
    return tuple(s for s in out if s)


def _parse_lattice(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ParseError(f"lattice must look like 3x3, got {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tqdsim", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--group")
    p.add_argument("--family", help="cocycle family (default: the group's builtin family)")
    p.add_argument("--cocycle", help="parameters, e.g. p1=1,p2=1 or 1,1")
    p.add_argument("--lattice", help="torus size, e.g. 2x2")
    p.add_argument("--series", dest="strategy", help="alias of --strategy")
    p.add_argument("--strategy", dest="strategy", choices=("quotient-chain", "sequential-normal"))
    p.add_argument("--seed", type=int)
    p.add_argument("--force-outcomes", dest="force_outcomes", help="JSON file {level: {vertex: [exponents]}}")
    p.add_argument("--normal", help="comma-separated element labels of the gauged subgroup")
    p.add_argument("--generators", help="comma-separated generator labels used for anyon names")
    p.add_argument("--flux", help="element label of the defect sector (fusion)")
    p.add_argument("--out", help="write the report here")
    p.add_argument("--format", dest="fmt", choices=("json", "text"))
    return p


def parse_config(argv: Sequence[str]) -> ExperimentConfig:
    """Flags and optional config file -> validated config.  Raises ParseError or ValidationError."""
    args = _build_parser().parse_args(list(argv))
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {args.config}: {exc}") from exc
    base["command"] = args.command
    group = args.group or base.get("group", "Z2")
    base["group"] = group
    if args.family:
        base["family"] = args.family
    if args.cocycle is not None:
        base["params"] = _parse_params(args.cocycle, group)
    if args.lattice:
        base["lattice"] = _parse_lattice(args.lattice)
    for key in ("strategy", "seed", "out", "fmt", "flux"):
        val = getattr(args, key)
        if val is not None:
            base[key] = val
    if args.normal:
        base["normal"] = _split_labels(args.normal)
    if args.generators:
        base["generators"] = _split_labels(args.generators)
    if args.force_outcomes:
        try:
            base["forced"] = json.loads(Path(args.force_outcomes).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read forced outcomes: {exc}") from exc
    for key in ("params", "lattice", "normal", "generators"):
        if key in base:
            base[key] = tuple(base[key])
    try:
        cfg = ExperimentConfig(**base)
    except TypeError as exc:
        raise ParseError(str(exc)) from exc
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    errors = []
    try:
        grp = build_group(cfg.group)
    except GroupError as exc:
        raise ValidationError([f"group: {exc}"]) from exc
    try:
        builtin_cocycle(grp, cfg.params, cfg.family)
    except CohomologyError as exc:
        errors.append(f"cocycle: {exc}")
    if min(cfg.lattice) < 2:
        errors.append("lattice: both dimensions must be at least 2")
    for lab in (*cfg.normal, *cfg.generators, *([cfg.flux] if cfg.flux else [])):
        try:
            grp.element(lab)
        except (GroupError, KeyError, ValueError):
            errors.append(f"unknown element label {lab!r} in {grp.name}")
    if cfg.command in ("sfc", "fusion") and not cfg.normal:
        errors.append(f"{cfg.command} needs --normal")
    if cfg.command == "fusion" and not cfg.flux:
        errors.append("fusion needs --flux")
    if errors:
        raise ValidationError(errors)


# ------------------------------------------------------------------ running


def _forced(cfg: ExperimentConfig) -> dict | None:
    if not cfg.forced:
        return None
    return {int(k): {int(v): tuple(p) for v, p in lvl.items()} for k, lvl in cfg.forced.items()}


def run_command(cfg: ExperimentConfig) -> Report:
    grp = build_group(cfg.group)
    omega = builtin_cocycle(grp, cfg.params, cfg.family)
    rep = Report(cfg.echo())
    t0 = time.perf_counter()
    normal = [grp.element(s) for s in cfg.normal]
    gens = [grp.element(s) for s in cfg.generators] or None

    if cfg.command == "cocycle-check":
        rep.add("cocycle-condition", verify_cocycle_condition(omega), family=omega.family,
                params=list(omega.params))

    elif cfg.command == "verify":
        lat = build_torus(*cfg.lattice)
        res = verify_eigenstate(build_tqd_state(omega, lat), tqd_terms(omega, lat))
        rep.add("tqd-eigenstate", res.passed, max_deviation=res.max_deviation, terms=len(res.results))

    elif cfg.command == "gauge":
        lat = build_torus(*cfg.lattice)
        plan = GaugingPlan.build(omega, lat, cfg.strategy, cfg.seed, _forced(cfg))
        final, trace = run_gauging(None, plan)
        for k, rec in enumerate(trace.records, start=1):
            rep.add(f"outcome-constraint-level-{k}", verify_outcome_constraint(rec))
        series = plan.series
        for k, st in enumerate(trace.states[:-1], start=1):
            res = verify_eigenstate(st, set_terms(omega, lat, series, k))
            rep.add(f"set-eigenstate-level-{k}", res.passed, max_deviation=res.max_deviation)
        res = verify_eigenstate(final, tqd_terms(omega, lat))
        rep.add("eigenstate", res.passed, max_deviation=res.max_deviation,
                summary="all pass" if res.passed else f"{len(res.failing())} failing")
        rep.add("trace", True, trace=json.loads(trace.to_json()))

    elif cfg.command == "braiding":
        members = normal or list(range(grp.order))
        theory = anyon_table(omega, members, gens)
        mat = theory.braiding_matrix()
        nondeg = abs(np.linalg.det(mat)) > 1e-6
        rows = {a.label: {b.label: str(braiding_phase(theory, a, b).value) for b in theory.anyons}
                for a in theory.anyons}
        rep.add("mutual-statistics-nondegenerate", nondeg, anyons=[a.label for a in theory.anyons],
                braiding=rows)

    elif cfg.command == "sfc":
        ctx = set_context(omega, normal, gens)
        table = sfc_table(ctx)
        labels = list(grp.labels)
        if ctx.quotient.group.order == 2:
            # a two-element quotient is written with its generator named x
            for q, rep_g in enumerate(ctx.section):
                labels[rep_g] = "x" if q else "1"
        cells = {f"{labels[a]},{labels[b]}": w.label for (a, b), w in sorted(table.table.items())}
        lines = [f"0_{labels[a]}×0_{labels[b]} = {w}" for (a, b), w in sorted(table.table.items())]
        rep.add("sfc-cocycle-identity", table.cocycle_identity, theory=table.theory_kind,
                table=cells, lines=lines)

    elif cfg.command == "fusion":
        ctx = set_context(omega, normal, gens, need_epsilon=False)
        x = grp.element(cfg.flux)
        m = open_ribbon_matrix(ctx, x)
        out = fusion_decompose(m.tensor(m), ctx.theory)
        ok = len(out.anyons) == m.size ** 2
        rep.add("fusion-decomposition", ok, anyons=sorted(out.anyons), status=out.status,
                line=f"0_{cfg.flux}×0_{cfg.flux} = " + " + ".join(sorted(out.anyons)))

    rep.timings["total_s"] = round(time.perf_counter() - t0, 3)
    return rep


def emit_report(report: Report, fmt: str = "json") -> bytes:
    """Deterministic serialization of a report."""
    if fmt == "json":
        body = {"version": report.version, "config": report.config, "results": report.results,
                "timings": report.timings, "passed": report.passed}
        return (json.dumps(body, sort_keys=True, ensure_ascii=False, indent=2) + "\n").encode()
    width = max((len(r["check"]) for r in report.results), default=5)
    lines = [f"tqdsim {report.version}  command={report.config.get('command')}"]
    for r in report.results:
        lines.append(f"{r['check']:<{width}}  {'PASS' if r['pass'] else 'FAIL'}")
        if "lines" in r:
            w = max(len(s) for s in r["lines"])
            lines.extend(f"  {s:<{w}}" for s in r["lines"])
        if "line" in r:
            lines.append(f"  {r['line']}")
    return ("\n".join(lines) + "\n").encode()


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code else 0
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_command(cfg)
    except (SetProbeError, StateError, LatticeError, CohomologyError, GroupError) as exc:
        report = Report(cfg.echo())
        report.add("run", False, error=f"{type(exc).__name__}: {exc}")
    data = emit_report(report, cfg.fmt)
    if cfg.out:
        Path(cfg.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
