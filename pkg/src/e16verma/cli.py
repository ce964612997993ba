"""Command-line interface.

Subcommands
-----------
check-algebra    bracket identities (super-Jacobi, closure, skew, grading),
                 the t/Theta grading suite, and the root-system dictionary
verify-bound     per-degree kernels of the singular-vector conditions over a
                 scan of t-eigenvalues, checked against the structural
                 degree bound
find-singular    explicit singular vectors (highest-weight rows included by
                 default), with degrees and weights, rendered in both
                 coordinate systems
reproduce-proof  exact reproduction of the extraction steps behind the
                 degree bound

Exit codes: 0 every check passed, 1 at least one check failed, 2 usage or
input-format error.  Reports are deterministic for a fixed configuration.
``E16VERMA_WORKERS`` (default 1) sizes a fork-based worker pool over the
t-scan for verify-bound and find-singular; partial results are merged in
scan order, so the report never depends on the worker count.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import multiprocessing
import os
import sys
from pathlib import Path

from . import contact
from .contact import (
    check_L1_L2_L3,
    check_jacobi_closure,
    check_root_system,
    name_jacobi_failures,
)
from .exactnum import GaussianRational, ONE, Q, scalar_from_text, scalar_to_text
from .gmodule import (
    BUILTIN_NAMES,
    ModuleFormatError,
    ModuleSpec,
    builtin,
    module_from_text,
    validate,
)
from .grassmann import mask_of
from .singular import reproduce_proof_steps, singular_vectors, verify_bound

SCHEMA = "e16verma/1"
DEFAULTS = {"kmax": 5, "t-scan": "-10..10", "max-degree": 4}

__all__ = ["main"]


class UsageError(Exception):
    """Bad flags or bad input files; maps to exit code 2."""


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------

def parse_t_scan(text: str) -> list[GaussianRational]:
    """Parse a comma-separated scan: exact scalars ('7/3', '1+2*i') and/or
    inclusive integer ranges ('a..b').  Duplicates are dropped, order kept."""
    values: list[GaussianRational] = []
    seen: set[str] = set()

    def push(v: GaussianRational) -> None:
        key = scalar_to_text(v)
        if key not in seen:
            seen.add(key)
            values.append(v)

    for raw in text.split(","):
        token = raw.strip()
        if not token:
            continue
        if ".." in token:
            lo_txt, _, hi_txt = token.partition("..")
            try:
                lo, hi = int(lo_txt), int(hi_txt)
            except ValueError:
                raise UsageError(f"bad range {token!r} in t-scan (want a..b)") from None
            if lo > hi:
                raise UsageError(f"descending range {token!r} in t-scan")
            for n in range(lo, hi + 1):
                push(Q(n))
        else:
            try:
                push(scalar_from_text(token))
            except ValueError as e:
                raise UsageError(f"bad scalar {token!r} in t-scan: {e}") from None
    if not values:
        raise UsageError("t-scan is empty; give scalars and/or a..b ranges")
    return values


ModuleSource = tuple[str, str, str]  # (kind, payload, name)


def load_module_source(spec_text: str) -> ModuleSource:
    """Resolve --module: a builtin name, or a path to a module file."""
    if spec_text in BUILTIN_NAMES:
        return ("builtin", spec_text, spec_text)
    path = Path(spec_text)
    if not path.exists():
        raise UsageError(
            f"module {spec_text!r} is neither a builtin "
            f"({', '.join(BUILTIN_NAMES)}) nor an existing file"
        )
    try:
        text = path.read_text()
    except OSError as e:
        raise UsageError(f"cannot read module file {spec_text!r}: {e}") from None
    return ("file", text, path.stem)


def materialize_module(
    source: ModuleSource, t_scalar: GaussianRational, validated: bool
) -> ModuleSpec:
    kind, payload, name = source
    if kind == "builtin":
        return builtin(payload, t_scalar)
    try:
        spec = module_from_text(payload, name=name)
    except ModuleFormatError as e:
        raise UsageError(f"module file {name!r}: {e}") from None
    if not validated:
        rep = validate(spec)
        if not rep["ok"]:
            raise UsageError(
                "module validation failed before assembly: "
                f"first failing commutator {rep['first_failure']}"
            )
    return ModuleSpec(spec.dim, t_scalar, spec.xi_action, name=spec.name)


def worker_count() -> int:
    raw = os.environ.get("E16VERMA_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"E16VERMA_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


# ---------------------------------------------------------------------------
# report rendering
# ---------------------------------------------------------------------------

def header_record(command: str, config: dict) -> dict:
    return {
        "record": "header",
        "command": command,
        "defaults": dict(DEFAULTS),
        "config": config,
    }


def summary_record(ok: bool) -> dict:
    return {"record": "summary", "ok": bool(ok), "exit": 0 if ok else 1}


def _kv(d: dict) -> str:
    return ", ".join(f"{k}={d[k]}" for k in sorted(d))


def record_to_text(rec: dict) -> list[str]:
    kind = rec["record"]
    if kind == "header":
        return [
            f"e16verma {rec['command']}",
            f"schema: {SCHEMA}",
            f"defaults: {_kv(rec['defaults'])}",
            f"config: {_kv(rec['config'])}",
        ]
    if kind == "check":
        status = "ok" if rec["ok"] else "FAIL"
        counts = f" ({_kv(rec['counts'])})" if rec.get("counts") else ""
        lines = [f"check {rec['name']}: {status}{counts}"]
        for f in rec.get("failures", [])[:10]:
            lines.append(f"  failure: {f}")
        extra = len(rec.get("failures", [])) - 10
        if extra > 0:
            lines.append(f"  ... and {extra} more")
        return lines
    if kind == "scan":
        dims = rec["kernel_dims"]
        if dims:
            tab = "  ".join(f"d{d}:{n}" for d, n in sorted(
                ((int(k), v) for k, v in dims.items())
            ))
        else:
            tab = "no kernel"
        return [f"t={rec['t_scalar']}  total={rec['kernel_total']}  {tab}"]
    if kind == "kernel":
        return []  # per-degree detail is carried in json-lines output only
    if kind == "counterexample":
        return [
            f"COUNTEREXAMPLE t={rec['t_scalar']} degree={rec['degree']} "
            f"shape_ok={rec['shape_ok']} constraints_ok={rec['constraints_ok']}",
            f"  T-coords: {rec['vector_T']}",
            f"  m-coords: {rec['vector_m']}",
        ]
    if kind == "vector":
        w = rec["weight"]
        weight = "(" + ", ".join(w) + ")" if w is not None else "none"
        return [
            f"vector t={rec['t_scalar']} degree={rec['degree']} weight={weight}",
            f"  T-coords: {rec['vector_T']}",
            f"  m-coords: {rec['vector_m']}",
        ]
    if kind == "step":
        line = f"step {rec['name']}: {'ok' if rec['ok'] else 'FAIL'}"
        out = [line]
        if rec.get("note"):
            out.append(f"  note: {rec['note']}")
        return out
    if kind == "summary":
        return [f"RESULT: {'PASS' if rec['ok'] else 'FAIL'}"]
    return [json.dumps(rec, sort_keys=True)]


def render_report(records: list[dict], fmt: str) -> str:
    if fmt == "json-lines":
        lines = []
        for rec in records:
            body = dict(rec)
            body["schema"] = SCHEMA
            lines.append(json.dumps(body, sort_keys=True))
        return "\n".join(lines) + "\n"
    lines = []
    for rec in records:
        lines.extend(record_to_text(rec))
    return "\n".join(lines) + "\n"


def emit(records: list[dict], ns: argparse.Namespace, ok: bool) -> int:
    text = render_report(records, ns.format)
    if ns.out:
        Path(ns.out).write_text(text)
        print(
            f"wrote {len(records)} record(s) to {ns.out}; "
            f"result: {'PASS' if ok else 'FAIL'}"
        )
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# worker pool over the t-scan
# ---------------------------------------------------------------------------

def _scan_job(args: tuple) -> object:
    command, source, c_text, kmax, with_s0 = args
    c = scalar_from_text(c_text)
    spec = materialize_module(source, c, validated=True)
    if command == "verify-bound":
        return verify_bound(spec, k_max=kmax, t_scan=[c], include_S0=with_s0)
    vectors = singular_vectors(spec, k_max=kmax, include_S0=with_s0)
    return [_vector_record(c_text, v) for v in vectors]


def _map_scan(jobs: list[tuple], workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [_scan_job(j) for j in jobs]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:  # platform without fork: stay sequential
        return [_scan_job(j) for j in jobs]
    with ctx.Pool(min(workers, len(jobs))) as pool:
        return pool.map(_scan_job, jobs)


def _vector_record(c_text: str, v: dict) -> dict:
    w = v["weight"]
    return {
        "record": "vector",
        "t_scalar": c_text,
        "degree": v["degree"],
        "weight": None if w is None else [scalar_to_text(x) for x in w],
        "vector_T": v["vector_T"],
        "vector_m": v["vector_m"],
    }


# ---------------------------------------------------------------------------
# check-algebra
# ---------------------------------------------------------------------------

@contextlib.contextmanager
def _bracket_fault():
    """Corrupt one bracket value for the duration: [xi_12, xi_1] gains a
    sign.  Used by the --inject-fault self-test hook."""
    orig = contact.contact_bracket
    bad_x = {(0, mask_of((1, 2))): ONE}
    bad_y = {(0, mask_of((1,))): ONE}

    def corrupted(x, y):
        out = orig(x, y)
        if dict(x.data) == bad_x and dict(y.data) == bad_y:
            return out.scale(Q(-1))
        return out

    contact.contact_bracket = corrupted
    try:
        yield
    finally:
        contact.contact_bracket = orig


def cmd_check_algebra(ns: argparse.Namespace) -> tuple[list[dict], bool]:
    jacobi_degree = ns.max_degree
    closure_degree = max(6, ns.max_degree)
    config = {
        "max-degree": ns.max_degree,
        "closure-degree": closure_degree,
        "inject-fault": "yes" if ns.inject_fault else "no",
        "format": ns.format,
    }
    records = [header_record("check-algebra", config)]

    hook = _bracket_fault() if ns.inject_fault else contextlib.nullcontext()
    with hook:
        jc = check_jacobi_closure(
            jacobi_degree=jacobi_degree, closure_degree=closure_degree
        )
        named: list = []
        if not jc["jacobi_ok"]:
            degree_triples = [entry[0] for entry in jc["jacobi_failures"]]
            named = name_jacobi_failures(degree_triples, limit=3)
        grading = check_L1_L2_L3(closure_degree)
        roots = check_root_system()

    jacobi_failures: list[str] = []
    if not jc["jacobi_ok"]:
        jacobi_failures = [" | ".join(t) for t in named] or [
            str(f) for f in jc["jacobi_failures"]
        ]
    records.append(
        {
            "record": "check",
            "name": "jacobi",
            "ok": jc["jacobi_ok"],
            "counts": {
                "degree": jacobi_degree,
                "triples_checked": jc["triples_checked"],
            },
            "failures": jacobi_failures,
        }
    )
    records.append(
        {
            "record": "check",
            "name": "closure",
            "ok": jc["closure_ok"],
            "counts": {
                "degree": closure_degree,
                "pairs_closed": jc["pairs_closed"],
            },
            "failures": [str(f) for f in jc["closure_failures"]],
        }
    )
    records.append(
        {"record": "check", "name": "skew", "ok": jc["skew_ok"], "counts": {},
         "failures": []}
    )
    records.append(
        {"record": "check", "name": "grading", "ok": jc["grading_ok"],
         "counts": {}, "failures": []}
    )
    records.append(
        {
            "record": "check",
            "name": "t-grading",
            "ok": grading["grading_ok"],
            "counts": {"degree": closure_degree},
            "failures": [str(f) for f in grading["failures"] if f[0] == "grading"],
        }
    )
    records.append(
        {
            "record": "check",
            "name": "theta-onto",
            "ok": grading["theta_ok"],
            "counts": {},
            "failures": [str(f) for f in grading["failures"] if f[0] != "grading"],
        }
    )
    records.append(
        {
            "record": "check",
            "name": "root-system",
            "ok": roots["ok"],
            "counts": {},
            "failures": [str(f) for f in roots["failures"]],
        }
    )
    ok = all(r["ok"] for r in records if r["record"] == "check")
    records.append(summary_record(ok))
    return records, ok


# ---------------------------------------------------------------------------
# verify-bound
# ---------------------------------------------------------------------------

def cmd_verify_bound(ns: argparse.Namespace) -> tuple[list[dict], bool]:
    source = load_module_source(ns.module)
    spec0 = materialize_module(source, Q(0), validated=False)  # validates files
    scan = parse_t_scan(ns.t_scan)
    workers = worker_count()
    config = {
        "module": source[2],
        "kmax": ns.kmax,
        "t-scan": ns.t_scan,
        "with-s0": "yes" if ns.with_s0 else "no",
        "workers": workers,
        "format": ns.format,
    }
    records = [header_record("verify-bound", config)]

    if workers <= 1 or len(scan) <= 1:
        report = verify_bound(spec0, k_max=ns.kmax, t_scan=scan, include_S0=ns.with_s0)
        per_c = report["per_c"]
        counterexamples = report["counterexamples"]
        ok = report["ok"]
        scan_texts = report["t_scan"]
    else:
        jobs = [
            ("verify-bound", source, scalar_to_text(c), ns.kmax, ns.with_s0)
            for c in scan
        ]
        partials = _map_scan(jobs, workers)
        per_c = {}
        counterexamples = []
        ok = True
        scan_texts = [scalar_to_text(c) for c in scan]
        for part in partials:
            per_c.update(part["per_c"])
            counterexamples.extend(part["counterexamples"])
            ok = ok and part["ok"]

    for c_text in scan_texts:
        entry = per_c[c_text]
        dims = {}
        for d in sorted(entry["degrees"]):
            info = entry["degrees"][d]
            records.append(
                {
                    "record": "kernel",
                    "t_scalar": c_text,
                    "degree": d,
                    "kernel_dim": info["kernel_dim"],
                    "screened": info["screened"],
                    "shape_ok": info.get("shape_ok", True),
                    "constraints_ok": info.get("constraints_ok", True),
                    "audit_ok": info.get("audit_ok", True),
                }
            )
            if info["kernel_dim"]:
                dims[str(d)] = info["kernel_dim"]
        records.append(
            {
                "record": "scan",
                "t_scalar": c_text,
                "kernel_total": entry["kernel_total"],
                "kernel_dims": dims,
            }
        )
    for ce in counterexamples:
        rec = {"record": "counterexample"}
        rec.update(
            {
                k: ce[k]
                for k in (
                    "t_scalar",
                    "degree",
                    "shape_ok",
                    "constraints_ok",
                    "vector_T",
                    "vector_m",
                )
            }
        )
        rec["audit_failures"] = [str(f) for f in ce["audit_failures"]]
        records.append(rec)
    records.append(summary_record(ok))
    return records, ok


# ---------------------------------------------------------------------------
# find-singular
# ---------------------------------------------------------------------------

def cmd_find_singular(ns: argparse.Namespace) -> tuple[list[dict], bool]:
    source = load_module_source(ns.module)
    materialize_module(source, Q(0), validated=False)  # validates file modules
    scan = parse_t_scan(ns.t_scan)
    workers = worker_count()
    config = {
        "module": source[2],
        "kmax": ns.kmax,
        "t-scan": ns.t_scan,
        "with-s0": "yes" if ns.with_s0 else "no",
        "workers": workers,
        "format": ns.format,
    }
    records = [header_record("find-singular", config)]
    jobs = [
        ("find-singular", source, scalar_to_text(c), ns.kmax, ns.with_s0)
        for c in scan
    ]
    results = _map_scan(jobs, workers)
    total = 0
    for c, recs in zip(scan, results):
        records.extend(recs)
        total += len(recs)
        dims: dict[str, int] = {}
        for rec in recs:
            key = str(rec["degree"])
            dims[key] = dims.get(key, 0) + 1
        records.append(
            {
                "record": "scan",
                "t_scalar": scalar_to_text(c),
                "kernel_total": len(recs),
                "kernel_dims": dims,
            }
        )
    records.append(summary_record(True))
    return records, True


# ---------------------------------------------------------------------------
# reproduce-proof
# ---------------------------------------------------------------------------

def cmd_reproduce_proof(ns: argparse.Namespace) -> tuple[list[dict], bool]:
    config = {
        "with-s0": "yes" if ns.with_s0 else "no",
        "verbose": "yes" if ns.verbose else "no",
        "format": ns.format,
        "s0-note": "extraction steps do not involve highest-weight rows",
    }
    records = [header_record("reproduce-proof", config)]
    report = reproduce_proof_steps(verbose=ns.verbose)
    detail = report.get("detail", {})
    for name, ok in report["steps"].items():
        rec = {"record": "step", "name": name, "ok": bool(ok)}
        if ns.verbose and name in detail:
            rec["note"] = detail[name]
        records.append(rec)
    records.append(summary_record(report["ok"]))
    return records, report["ok"]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser, *, module: bool, scan: bool,
                s0_default: bool | None) -> None:
    if module:
        sub.add_argument(
            "--module",
            default="trivial",
            help=f"builtin name ({', '.join(BUILTIN_NAMES)}) or module-file path",
        )
    if scan:
        sub.add_argument(
            "--t-scan",
            default=DEFAULTS["t-scan"],
            help="comma-separated exact scalars and/or a..b integer ranges "
                 "(use --t-scan=-10..10 for values starting with a minus)",
        )
        sub.add_argument("--kmax", type=int, default=DEFAULTS["kmax"],
                         help="largest Theta-power in the ansatz")
    if s0_default is not None:
        sub.add_argument(
            "--with-s0",
            action=argparse.BooleanOptionalAction,
            default=s0_default,
            help="include the highest-weight rows in the linear system",
        )
    sub.add_argument("--format", choices=("text", "json-lines"), default="text")
    sub.add_argument("--out", default=None, help="write the report to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="e16verma",
        description="exact singular-vector toolkit for the E(1,6) Verma modules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-algebra", help="bracket/grading/root-system suites")
    p.add_argument("--max-degree", type=int, default=DEFAULTS["max-degree"],
                   help="largest degree entering the super-Jacobi suite")
    p.add_argument("--inject-fault", action="store_true",
                   help="self-test hook: corrupt one bracket and expect failure")
    _add_common(p, module=False, scan=False, s0_default=None)
    p.set_defaults(func=cmd_check_algebra)

    p = sub.add_parser("verify-bound", help="kernel scan against the degree bound")
    _add_common(p, module=True, scan=True, s0_default=False)
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("find-singular", help="list explicit singular vectors")
    _add_common(p, module=True, scan=True, s0_default=True)
    p.set_defaults(func=cmd_find_singular)

    p = sub.add_parser("reproduce-proof", help="re-derive the proof extractions")
    p.add_argument("--verbose", action="store_true",
                   help="per-equation notes in the report")
    _add_common(p, module=False, scan=False, s0_default=False)
    p.set_defaults(func=cmd_reproduce_proof)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        records, ok = ns.func(ns)
        return emit(records, ns, ok)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
