"""Command dispatcher and report emitter for the ``hfkit`` tool."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

from . import __version__
from .exterior import ExteriorError
from .fixtures import fixture_names, get_fixture, load
from .lie import (
    ModelError,
    StructureModel,
    check_integrability_of_d,
    cohomology,
    is_unimodular,
    lefschetz,
)
from .parser import ParseError, parse, parse_expression, model_hash
from .report import Report, _plain
from .scalars import EvaluationError, ScalarError
from .structures import (
    SU2Structure,
    SU3Structure,
    StabilityError,
    connection_tables,
    h2_bound_check,
    induced_volume,
    lemma23_crosscheck,
    slag_check,
    stability,
    su2_certify,
    su2_verify,
    verify_halfflat,
    verify_su3,
)

__all__ = ["COMMANDS", "RunReport", "run", "emit", "main"]


@dataclass
class RunReport:
    command: str
    model: str
    model_hash: str
    report: Report
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.report.passed

    def record(self) -> dict[str, Any]:
        rec = self.report.record()
        return {
            "tool": "hfkit",
            "version": __version__,
            "command": self.command,
            "model": self.model,
            "model_hash": self.model_hash,
            "options": _plain(self.options),
            "overall": rec["overall"],
            "checks": rec["checks"],
            "data": rec["data"],
        }


# --------------------------------------------------------------------------
# object lookup


def _form(model: StructureModel, name: str):
    try:
        return model.forms[name]
    except KeyError:
        raise ModelError(f"model declares no form {name!r}") from None


def _omega_of(model):
    return _form(model, "omega")


def _Omega_of(model):
    if "Omega" in model.forms:
        return model.forms["Omega"]
    return _form(model, "psi").re


def _su3(model: StructureModel) -> SU3Structure:
    """The declared triple; J and psi are induced from Omega when absent."""
    omega = _omega_of(model)
    if "J" in model.endos and "psi" in model.forms and "Omega" not in model.forms:
        return SU3Structure(omega, model.endos["J"], model.forms["psi"], origin="declared")
    return induced_volume(model, _Omega_of(model), omega)


def _su2(model: StructureModel) -> SU2Structure:
    omega = _omega_of(model)
    if "Oplus" in model.forms:
        plus, minus = model.forms["Oplus"], _form(model, "Ominus")
    else:
        psi = _form(model, "psi")
        plus, minus = psi.re, psi.im
    return SU2Structure.from_triple(model, omega, plus, minus)


def _structure(model):
    return _su2(model) if model.dim == 4 else _su3(model)


def _flag_printed(model: StructureModel, r: Report) -> None:
    """Informational entries for printed data that the model corrects."""
    if "J_printed" in model.endos:
        Jp = model.endos["J_printed"]
        r.add("printed J squares to -1", Jp.is_almost_complex(), {"printed J": Jp}, informational=True)
    if "psi_printed" in model.forms and "J" in model.endos:
        s = SU3Structure(_omega_of(model), model.endos["J"], model.forms["psi_printed"], origin="printed")
        ok = verify_su3(model, s).passed
        r.add("printed psi satisfies the SU(3) conditions", ok, {"printed psi": model.forms["psi_printed"]}, informational=True)


# --------------------------------------------------------------------------
# commands


def _cmd_check_d2(model, opts):
    return check_integrability_of_d(model)


def _cmd_cohomology(model, opts):
    n = model.dim
    degrees = [opts["k"]] if opts.get("k") is not None else list(range(n + 1))
    r = Report("cohomology")
    betti = {}
    for k in degrees:
        if not 0 <= k <= n:
            raise ModelError(f"degree {k} out of range 0..{n}")
        res = cohomology(model, k)
        betti[k] = res.betti
        r.data[f"H^{k}"] = res.summary()
    r.data["betti"] = [betti[k] for k in degrees]
    if len(degrees) == n + 1:
        uni = is_unimodular(model)
        dual = [k for k in range(n + 1) if betti[k] != betti[n - k]]
        r.add("Poincare duality b_k = b_(n-k)", not dual, {"unimodular": uni, "mismatched degrees": dual}, informational=not uni)
    for note in model.notes:
        if "H^" in note:
            r.add(f"anomaly: {note}", False, informational=True)
    return r


def _cmd_lefschetz(model, opts):
    k = opts.get("k") or 1
    return lefschetz(model, _omega_of(model), k)


def _cmd_stable(model, opts):
    return stability(model, _Omega_of(model), _omega_of(model)).report()


def _cmd_su3(model, opts):
    r = verify_su3(model, _su3(model))
    _flag_printed(model, r)
    return r


def _cmd_halfflat(model, opts):
    r = verify_halfflat(model, _su3(model))
    _flag_printed(model, r)
    return r


def _cmd_lemma23(model, opts):
    return lemma23_crosscheck(model, _su3(model))


def _cmd_connection(model, opts):
    t = connection_tables(model, _structure(model))
    return t.report


def _cmd_slag(model, opts):
    name = opts.get("dist") or "D"
    try:
        D = model.dists[name]
    except KeyError:
        raise ModelError(f"model declares no distribution {name!r}") from None
    r = slag_check(model, D, _structure(model))
    r.data["distribution"] = name
    return r


def _cmd_su2(model, opts):
    s = _su2(model)
    r = su2_verify(model, s.omega, s.plus, s.minus)
    if model.dim == 4:
        r.extend(su2_certify(model, s.omega, s.plus, s.minus), prefix="operator")
        for c in r.checks[-5:]:
            c.informational = True
    return r


def _cmd_h2bound(model, opts):
    s = _su2(model)
    return h2_bound_check(model, s.omega, s.plus)


COMMANDS: dict[str, Callable[[StructureModel, dict], Report]] = {
    "check-d2": _cmd_check_d2,
    "cohomology": _cmd_cohomology,
    "lefschetz": _cmd_lefschetz,
    "stable": _cmd_stable,
    "su3": _cmd_su3,
    "halfflat": _cmd_halfflat,
    "lemma23": _cmd_lemma23,
    "connection": _cmd_connection,
    "slag": _cmd_slag,
    "su2": _cmd_su2,
    "h2bound": _cmd_h2bound,
}

_APPLICABLE_6 = ["check-d2", "cohomology", "lefschetz", "stable", "su3", "halfflat", "lemma23", "connection", "slag"]
_APPLICABLE_4 = ["check-d2", "cohomology", "lefschetz", "connection", "slag", "su2", "h2bound"]


def _safe(command: str, model: StructureModel, opts: dict) -> Report:
    """Run one command; domain errors become a failing entry rather than a crash."""
    try:
        return COMMANDS[command](model, opts)
    except (ModelError, ExteriorError, ScalarError, EvaluationError, ZeroDivisionError) as exc:
        r = Report(command)
        r.add(f"{command} applicable", False, {"error": str(exc)})
        return r


def _report_all(model: StructureModel, opts: dict, fixture: str | None) -> Report:
    r = Report("report-all")
    if fixture:
        fx = get_fixture(fixture)
        expected = fx.expected
    else:
        names = _APPLICABLE_4 if model.dim == 4 else _APPLICABLE_6
        if model.mode == "coordinate":
            names = [c for c in names if c not in ("cohomology", "lefschetz", "connection")]
        expected = {c: "pass" for c in names}
    verdicts = {}
    for command, want in expected.items():
        sub = _safe(command, model, opts)
        got = "pass" if sub.passed else "fail"
        verdicts[command] = got
        r.add(f"{command}: expected {want}", got == want, {"got": got, "failed checks": [c.name for c in sub.failures()]})
    if fixture and "betti" in get_fixture(fixture).facts and "cohomology" in expected:
        want = get_fixture(fixture).facts["betti"]
        got = [cohomology(model, k).betti for k in range(model.dim + 1)]
        r.add("betti numbers", got == want, {"expected": want, "got": got})
    r.data["verdicts"] = verdicts
    return r


def run(command: str, model: StructureModel, options: dict | None = None, fixture: str | None = None) -> RunReport:
    opts = dict(options or {})
    if command == "report-all":
        rep = _report_all(model, opts, fixture)
    elif command in COMMANDS:
        rep = _safe(command, model, opts)
    else:
        raise ValueError(f"unknown command {command!r}")
    for note in model.notes:
        if not any(note in c.name for c in rep.checks):
            rep.data.setdefault("notes", []).append(note)
    return RunReport(command, model.name, model_hash(model), rep, opts)


# --------------------------------------------------------------------------
# emitting


def emit(run_report: RunReport, fmt: str = "human") -> str:
    rec = run_report.record()
    if fmt == "json":
        return json.dumps(rec, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    lines = [f"hfkit {rec['version']}  {rec['command']}  model={rec['model'] or '-'}  hash={rec['model_hash'][:12]}"]
    for c in rec["checks"]:
        tag = f"info:{c['verdict']}" if c.get("informational") else c["verdict"].upper()
        lines.append(f"  {tag:<9}  {c['name']}")
        if c["witness"] and (c["verdict"] == "fail" or c.get("informational")):
            for key, val in sorted(c["witness"].items()):
                lines.append(f"               {key}: {val}")
    for key, val in sorted(rec["data"].items()):
        lines.append(f"  {key}: {val}")
    lines.append(f"overall: {rec['overall'].upper()}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hfkit", description="Exact checks for symplectic half-flat structures.")
    p.add_argument("command", choices=[*COMMANDS, "report-all", "fixtures"])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", metavar="FILE", help="model file to load")
    src.add_argument("--fixture", metavar="NAME", help="built-in model (see the 'fixtures' command)")
    p.add_argument("--k", type=int, help="degree for cohomology, power of omega for lefschetz")
    p.add_argument("--format", choices=["human", "json"], default="human")
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE", help="numeric value used in sign tests")
    p.add_argument("--form", action="append", default=[], metavar="NAME=EXPR", help="add or replace a form")
    p.add_argument("--dist", metavar="NAME", help="distribution for slag (default D)")
    p.add_argument("--version", action="version", version=f"hfkit {__version__}")
    return p


def _pairs(items, what):
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"--{what} expects NAME=VALUE, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    if args.command == "fixtures":
        for name in fixture_names():
            print(f"{name:<20} {get_fixture(name).summary}")
        return 0
    if not args.model and not args.fixture:
        ap.print_usage(sys.stderr)
        print("hfkit: one of --model or --fixture is required", file=sys.stderr)
        return 2
    try:
        if args.fixture:
            model = load(args.fixture)
        else:
            with open(args.model, encoding="utf-8") as fh:
                model = parse(fh.read(), name=args.model)
        params = {k: float(v) for k, v in _pairs(args.param, "param").items()}
        model.symbols.parameter_values(params)  # reject unknown names early
        model.overrides.update(params)
        for key, expr in _pairs(args.form, "form").items():
            model.forms[key] = parse_expression(expr, model.dim, model.symbols, model.forms)
    except (ParseError, KeyError, OSError, ValueError, ModelError, EvaluationError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hfkit: {msg}", file=sys.stderr)
        return 2
    options = {"k": args.k, "dist": args.dist, "param": params, "form": _pairs(args.form, "form")}
    options = {k: v for k, v in options.items() if v}
    try:
        rr = run(args.command, model, options, fixture=get_fixture(args.fixture).name if args.fixture else None)
    except StabilityError as exc:
        print(f"hfkit: internal inconsistency: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(emit(rr, args.format))
    return 0 if rr.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
