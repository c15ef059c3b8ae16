"""Command-line front end.

Subcommands::

    hmcx check  --f EXPR --h KERNEL --m REAL --domain LO,HI --budget N --seed N
    hmcx audit  --ineq ID --f EXPR --h KERNEL --m REAL --a REAL --b REAL [--s REAL]
                [--tol-abs R --tol-rel R]
    hmcx reduce --case ID --f EXPR --m REAL --a REAL --b REAL [--s REAL] [--h KERNEL]
    hmcx suite  --config PATH [--format json|csv]

Every subcommand accepts ``--output PATH`` (default stdout) and
``--deterministic`` (omit the timestamp so identical runs are byte-identical).

Exit codes: 0 all verdicts hold, 1 a violation or reduction mismatch was
found, 2 usage or validation error, 3 numerical failure (divergence,
domain error) or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Sequence

import numpy as np

from .convexity import EPSILON, PASS_MARGIN, Domain, HMParams, check_membership, worker_count
from .errors import HMCXError, NumericalError, ValidationError
from .expr import Kernel, parse
from .inequalities import INEQUALITY_IDS, AuditSpec, InequalityReport, ToleranceSpec, audit
from .reductions import CATALOG, REDUCTION_TOL, ReductionReport, verify_reduction

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
CSV_COLUMNS = ("job_id", "kind", "inequality_id", "overall", "worst_slack", "seed")


class UsageError(ValidationError):
    pass


# --------------------------------------------------------------------------
# jobs


@dataclass(frozen=True)
class Job:
    """A validated unit of work; ``run`` returns a JSON-ready report dict."""

    kind: str
    payload: dict
    seed: int | None = None

    def run(self, workers: int | None = None) -> dict:
        if self.kind == "check":
            return _run_check(self.payload, self.seed, workers)
        if self.kind == "audit":
            return _audit_dict(audit(self.payload["ineq"], self.payload["spec"]))
        return _reduce_dict(verify_reduction(self.payload["case"], None, self.payload["spec"]))


def _flag_error(flag: str, exc: Exception) -> UsageError:
    return UsageError(f"{flag}: {exc}")


def _expr(text: Any, flag: str, variable: str = "x"):
    if not isinstance(text, str):
        raise UsageError(f"{flag}: expected expression text, got {text!r}")
    try:
        return parse(text, variable)
    except ValidationError as exc:
        raise _flag_error(flag, exc) from None


def _kernel(text: Any, flag: str) -> Kernel:
    if not isinstance(text, str):
        raise UsageError(f"{flag}: expected kernel text, got {text!r}")
    try:
        return Kernel.from_text(text)
    except ValidationError as exc:
        raise _flag_error(flag, exc) from None


def _real(value: Any, flag: str) -> float:
    if isinstance(value, bool):
        raise UsageError(f"{flag}: expected a number, got {value!r}")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise UsageError(f"{flag}: expected a finite number, got {value!r}")
    return out


def _count(value: Any, flag: str) -> int:
    if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, str) and value.strip().lstrip("-").isdigit())):
        raise UsageError(f"{flag}: expected an integer, got {value!r}")
    return int(value)


def _domain(value: Any, flag: str) -> Domain:
    if isinstance(value, str):
        parts = value.split(",")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise UsageError(f"{flag}: expected LO,HI, got {value!r}")
    if len(parts) != 2:
        raise UsageError(f"{flag}: expected LO,HI, got {value!r}")
    lo, hi = _real(parts[0], flag), _real(parts[1], flag)
    if lo != 0.0:
        raise UsageError(f"{flag}: the class is defined on [0, b]; LO must be 0, got {lo!r}")
    try:
        return Domain(hi)
    except ValidationError as exc:
        raise _flag_error(flag, exc) from None


def _params(h: Kernel, m: float, flag: str = "--m", direction: str = "convex") -> HMParams:
    try:
        return HMParams(h, m, direction)
    except ValidationError as exc:
        raise _flag_error(flag, exc) from None


def _audit_spec(opts: dict, h_default: str | None = None) -> AuditSpec:
    f = _expr(opts.get("f"), "--f")
    h = _kernel(opts.get("h", h_default), "--h")
    m = _real(opts.get("m", 1.0), "--m")
    a = _real(opts.get("a"), "--a")
    b = _real(opts.get("b"), "--b")
    s = None if opts.get("s") is None else _real(opts["s"], "--s")
    try:
        tol = ToleranceSpec(
            _real(opts.get("tol_abs", 1e-9), "--tol-abs"), _real(opts.get("tol_rel", 1e-9), "--tol-rel")
        )
        return AuditSpec(f, _params(h, m), a, b, tol, s)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None


def make_job(opts: dict, seed: int | None = None) -> Job:
    """Validate one job description (CLI flags or a suite config entry)."""
    kind = opts.get("kind")
    if kind == "check":
        f = _expr(opts.get("f"), "--f")
        h = _kernel(opts.get("h"), "--h")
        direction = opts.get("direction", "convex")
        params = _params(h, _real(opts.get("m", 1.0), "--m"), "--m", direction)
        domain = _domain(opts.get("domain", "0,1"), "--domain")
        budget = _count(opts.get("budget", 100_000), "--budget")
        if budget < 1000:
            raise UsageError(f"--budget: must be at least 1000, got {budget}")
        job_seed = opts.get("seed", seed)
        job_seed = 0 if job_seed is None else _count(job_seed, "--seed")
        if job_seed < 0:
            raise UsageError(f"--seed: must be non-negative, got {job_seed}")
        return Job("check", {"f": f, "params": params, "domain": domain, "budget": budget}, job_seed)
    if kind == "audit":
        ineq = opts.get("ineq")
        if ineq not in INEQUALITY_IDS:
            raise UsageError(f"--ineq: unknown inequality {ineq!r}; choose from {', '.join(INEQUALITY_IDS)}")
        return Job("audit", {"ineq": ineq, "spec": _audit_spec(opts)})
    if kind == "reduce":
        case = opts.get("case")
        if case not in CATALOG:
            raise UsageError(f"--case: unknown reduction case {case!r}; choose from {', '.join(CATALOG)}")
        return Job("reduce", {"case": case, "spec": _audit_spec(opts, h_default="identity")})
    raise UsageError(f"kind: expected check, audit or reduce, got {kind!r}")


# --------------------------------------------------------------------------
# report dictionaries


def _head(kind: str) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind}


def _run_check(payload: dict, seed: int, workers: int | None) -> dict:
    f, params, domain, budget = payload["f"], payload["params"], payload["domain"], payload["budget"]
    report = check_membership(f, params, domain, budget, seed, workers=workers)
    cert = report.worst.to_dict() if report.worst is not None else None
    return {
        **_head("check"),
        "inputs": {
            "f": f.source_text,
            "h": params.h.text(),
            "m": params.m,
            "direction": params.direction,
            "domain": [0.0, domain.b_cap],
            "budget": budget,
        },
        "certificate": cert,
        "verdicts": {
            "verdict": report.verdict,
            "max_defect_seen": report.max_defect_seen,
            "samples_used": report.samples_used,
        },
        "overall": report.verdict,
        "seed": seed,
        "tolerances": {"pass_margin": PASS_MARGIN, "alpha_epsilon": EPSILON},
        "quadrature_errors": [],
    }


def _chain_dict(r: InequalityReport) -> dict:
    return {"inequality_id": r.inequality_id, "terms": [t.to_dict() for t in r.terms], "overall": r.overall}


def _audit_dict(r: InequalityReport) -> dict:
    return {
        **_head("audit"),
        "inequality_id": r.inequality_id,
        "inputs": r.inputs,
        "terms": [t.to_dict() for t in r.terms],
        "verdicts": [p.to_dict() for p in r.pair_verdicts],
        "overall": r.overall,
        "details": r.details,
        "seed": None,
        "tolerances": r.tolerances,
        "quadrature_errors": [t.quad_error for t in r.terms],
    }


def _reduce_dict(r: ReductionReport) -> dict:
    return {
        **_head("reduce"),
        "case_id": r.case_id,
        "claim": CATALOG[r.case_id].claim,
        "inputs": r.source.inputs,
        "terms": {"source": _chain_dict(r.source), "target": _chain_dict(r.target)},
        "verdicts": [m.to_dict() for m in r.matches],
        "overall": "agrees" if r.agrees else "mismatch",
        "seed": None,
        "tolerances": {**r.source.tolerances, "reduction": REDUCTION_TOL},
        "quadrature_errors": {
            "source": [t.quad_error for t in r.source.terms],
            "target": [t.quad_error for t in r.target.terms],
        },
    }


def _error_dict(kind: str, exc: Exception) -> dict:
    return {**_head(kind), "error": {"type": type(exc).__name__, "message": str(exc)}}


def exit_code_for(report: dict) -> int:
    if "error" in report:
        return EXIT_NUMERICAL
    if report["kind"] == "suite":
        codes = [exit_code_for(j) for j in report["jobs"]]
        return max(codes, default=EXIT_OK)
    return EXIT_OK if report["overall"] in ("holds", "no-violation-found", "agrees") else EXIT_VIOLATION


def _worst_slack(report: dict):
    kind = report["kind"]
    if "error" in report:
        return None
    if kind == "audit":
        return min(v["slack"] for v in report["verdicts"])
    if kind == "reduce":
        return min(v["tolerance"] - abs(v["difference"]) for v in report["verdicts"])
    return -report["verdicts"]["max_defect_seen"]


# --------------------------------------------------------------------------
# output


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def render(report: dict, fmt: str = "json", deterministic: bool = False) -> str:
    if fmt == "csv":
        jobs = report["jobs"] if report["kind"] == "suite" else [report]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for i, job in enumerate(jobs):
            ineq = job.get("inequality_id") or job.get("case_id") or ""
            overall = job.get("overall", "error")
            slack = _worst_slack(job)
            writer.writerow([i, job["kind"], ineq, overall, "" if slack is None else repr(float(slack)), job.get("seed", "")])
        return buf.getvalue()
    out = dict(report)
    if not deterministic:
        out["generated_at"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(_clean(out), indent=2, allow_nan=False) + "\n"


def write_report(report: dict, fmt: str = "json", destination: str | None = None, deterministic: bool = False) -> None:
    """Serialise ``report`` to ``destination`` (a path) or stdout if None."""
    text = render(report, fmt, deterministic)
    if destination is None or destination == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# suites


def _derived_seed(suite_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([suite_seed, index]).generate_state(1)[0])


def load_suite(path: str) -> tuple[list[Job], dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: invalid JSON in {path!r}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError("--config: top level must be an object")
    unknown = set(config) - {"seed", "jobs", "output", "format"}
    if unknown:
        raise UsageError(f"--config: unknown keys {sorted(unknown)}")
    suite_seed = _count(config.get("seed", 0), "seed")
    if suite_seed < 0:
        raise UsageError(f"seed: must be non-negative, got {suite_seed}")
    entries = config.get("jobs", [])
    if not isinstance(entries, list):
        raise UsageError("jobs: must be a list")
    jobs = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise UsageError(f"jobs[{i}]: must be an object")
        try:
            jobs.append(make_job(entry, seed=_derived_seed(suite_seed, i)))
        except UsageError as exc:
            raise UsageError(f"jobs[{i}]: {exc}") from None
    return jobs, config


def run_suite(jobs: list[Job], workers: int | None = None) -> dict:
    workers = workers or worker_count()

    def one(job: Job) -> dict:
        try:
            return job.run(workers=1)
        except NumericalError as exc:
            return _error_dict(job.kind, exc)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    for job, res in zip(jobs, results):
        if job.seed is not None:
            res.setdefault("seed", job.seed)
    return {**_head("suite"), "jobs": results}


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp field")

    parser = argparse.ArgumentParser(prog="hmcx", description="Numerical auditor for (h-m)-convexity.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common], help="search for a class-membership violation")
    check.add_argument("--f", required=True)
    check.add_argument("--h", required=True)
    check.add_argument("--m", required=True)
    check.add_argument("--domain", default="0,1")
    check.add_argument("--budget", default="100000")
    check.add_argument("--seed", default="0")
    check.add_argument("--direction", choices=("convex", "concave"), default="convex")

    aud = sub.add_parser("audit", parents=[common], help="evaluate an inequality chain")
    aud.add_argument("--ineq", required=True)
    for flag in ("--f", "--h", "--m", "--a", "--b"):
        aud.add_argument(flag, required=True)
    aud.add_argument("--s")
    aud.add_argument("--tol-abs", dest="tol_abs", default="1e-9")
    aud.add_argument("--tol-rel", dest="tol_rel", default="1e-9")

    red = sub.add_parser("reduce", parents=[common], help="verify a specialisation to a classical inequality")
    red.add_argument("--case", required=True)
    for flag in ("--f", "--m", "--a", "--b"):
        red.add_argument(flag, required=True)
    red.add_argument("--h", default="identity", help="kernel for cases that keep the caller's kernel")
    red.add_argument("--s")
    red.add_argument("--tol-abs", dest="tol_abs", default="1e-9")
    red.add_argument("--tol-rel", dest="tol_rel", default="1e-9")

    suite = sub.add_parser("suite", parents=[common], help="run a JSON suite of jobs")
    suite.add_argument("--config", required=True)
    suite.add_argument("--format", choices=("json", "csv"))
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    opts = {k: v for k, v in vars(args).items() if v is not None}
    fmt = "json"
    destination = args.output
    try:
        if args.command == "suite":
            jobs, config = load_suite(args.config)
            fmt = args.format or config.get("format", "json")
            if fmt not in ("json", "csv"):
                raise UsageError(f"format: expected json or csv, got {fmt!r}")
            destination = destination or config.get("output")
            report = run_suite(jobs)
        else:
            opts["kind"] = args.command
            report = make_job(opts).run()
    except ValidationError as exc:
        print(f"hmcx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"hmcx: numerical failure: {exc}", file=sys.stderr)
        report = _error_dict(args.command, exc)
        try:
            write_report(report, "json", destination, args.deterministic)
        except OSError:
            pass
        return EXIT_NUMERICAL
    except HMCXError as exc:  # pragma: no cover - every subclass is handled above
        print(f"hmcx: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        write_report(report, fmt, destination, args.deterministic)
    except OSError as exc:
        print(f"hmcx: cannot write report: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return exit_code_for(report)


def main() -> None:
    sys.exit(run())
