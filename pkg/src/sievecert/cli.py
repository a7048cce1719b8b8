"""Command-line driver: runs verification suites and writes a JSON report."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from importlib import metadata
from pathlib import Path
from typing import Callable, Sequence

from . import buchstab, combinatorics, decomposition, exponents

COMMANDS = (
    "verify-omega",
    "verify-decomposition",
    "verify-exponents",
    "verify-combinatorics",
    "verify-all",
    "dump-catalog",
)
PASSING = {"PASS", "CERTIFIED", combinatorics.FALSIFICATION_PASSED, "DETECTED"}
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class Config:
    epsilon1: float = 0.0
    quad_tol: float = 1e-4
    certify_min_width: float = 1e-5
    certify_margin: float = 1e-4
    falsify_count: int = 100_000
    seeds: tuple[int, ...] = (1, 42, 2024)
    omega_step: float = 1e-4
    omega_u_max: float = 64.0

    def validate(self) -> None:
        if not 0.0 <= self.epsilon1 <= 1e-5:
            raise ValueError("epsilon1 must lie in [0, 1e-5]")
        for name in ("quad_tol", "certify_min_width", "certify_margin", "omega_step", "omega_u_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.falsify_count <= 0:
            raise ValueError("falsify_count must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    @classmethod
    def coerce(cls, key: str, raw: str):
        if key == "seeds":
            return tuple(int(s) for s in raw.replace(",", " ").split())
        if key == "falsify_count":
            return int(float(raw))
        return float(raw)


def read_config(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(Config)}
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = Config.coerce(key, raw)
    return out


# ---------------------------------------------------------------------------
# claim records


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def record(id, anchor, kind, value, err, bound, relation, status, margin, eps1, **extra) -> dict:
    rec = {
        "id": id,
        "anchor": anchor,
        "kind": kind,
        "eps1": eps1,
        "value": _num(value),
        "err": _num(err),
        "bound": _num(bound),
        "relation": relation,
        "status": status,
        "margin": _num(margin),
    }
    rec.update(extra)
    return rec


def omega_records(cfg: Config, table) -> list[dict]:
    out = []
    for c in buchstab.omega_checks(table):
        out.append(
            record(
                c.id, c.anchor, "omega", c.value, c.err, c.bound, c.relation,
                "PASS" if c.passed else "FAIL", c.bound - c.value - c.err, cfg.epsilon1,
            )
        )
    return out


def decomposition_records(cfg: Config, table, cases: Sequence[str] | None, csv_rows: list | None) -> list[dict]:
    out = []
    for rep in decomposition.verify_all(cfg.quad_tol, table, cfg.epsilon1, cases):
        case = decomposition.case_by_id(rep.a_case)
        for entry, res in zip(case.thetas, rep.thetas):
            out.append(
                record(
                    f"{rep.a_case}/{res.id}", entry.source, res.kind, res.value, res.err,
                    res.claimed_bound, "<", "PASS" if res.passed else "FAIL", res.margin, cfg.epsilon1,
                    note=res.note,
                )
            )
            if csv_rows is not None:
                csv_rows.append((rep.a_case, res.id, cfg.epsilon1, res.value, res.err, res.claimed_bound))
        if rep.aborted is not None:
            out.append(record(f"{rep.a_case}/aborted", "", "case", None, None, None, "", "ABORTED", None,
                              cfg.epsilon1, note=rep.aborted))
            continue
        top = rep.total_computed + rep.total_err
        out.append(
            record(
                f"{rep.a_case}/total", f"sum of terms below {rep.claimed_total}", "total",
                rep.total_computed, rep.total_err, rep.claimed_total, "<",
                "PASS" if rep.total_pass else "FAIL", rep.claimed_total - top, cfg.epsilon1,
            )
        )
        out.append(
            record(
                f"{rep.a_case}/budget", f"sum of terms below {decomposition.BUDGET}", "total",
                rep.total_computed, rep.total_err, decomposition.BUDGET, "<",
                "PASS" if rep.budget_pass else "FAIL", decomposition.BUDGET - top, cfg.epsilon1,
            )
        )
        out.append(
            record(
                f"{rep.a_case}/checksum", "printed bounds add up to the printed total", "checksum",
                rep.bound_sum, 0.0, decomposition.CHECKSUM_TOL, "|diff| <=",
                "PASS" if rep.checksum_ok else "FAIL",
                decomposition.CHECKSUM_TOL - abs(rep.bound_sum - rep.claimed_total), cfg.epsilon1,
            )
        )
    return out


def _exponent_job(args) -> dict:
    claim_id, eps1, min_width, margin = args
    claim = exponents.claim_by_id(claim_id)
    v = exponents.certify(claim, min_width=min_width, eps1_value=eps1, margin=margin)
    status = v.status.value
    return record(
        claim_id, claim.anchor, "inequality", v.worst_slack, 0.0, 0.0, claim.relation.value + " (slack > 0)",
        status, v.margin, eps1, boxes=v.boxes_processed, witness=v.witness,
    )


def _comb_job(args) -> dict:
    case_id, seed, count, eps1 = args
    case = combinatorics.case_by_id(case_id)
    res = combinatorics.falsify_case(case, seed, count, eps1)
    return _comb_record(case, res, count)


def _comb_record(case, res, count) -> dict:
    witness = list(res.counterexamples[0].values) if res.counterexamples else None
    return record(
        f"{case.id}/seed{res.seed}", f"{case.family.value} case {case.id} for a in {case.a_case}",
        "falsification", res.n_counterexamples, 0.0, 0, "==", res.status, None, res.eps1,
        checked=res.checked, undecided=res.undecided, witness=witness,
    )


def _mutant_record(cfg: Config) -> dict:
    case = combinatorics.mutant_case(cfg.epsilon1)
    res = combinatorics.falsify_case(case, cfg.seeds[0], cfg.falsify_count, cfg.epsilon1, stop_after=1)
    status = "DETECTED" if res.n_counterexamples else "MISSED"
    witness = list(res.counterexamples[0].values) if res.counterexamples else None
    return record(
        "mutant-narrow-chi1", "narrowed target must produce a counterexample", "mutation",
        res.n_counterexamples, 0.0, 1, ">=", status, None, cfg.epsilon1, checked=res.checked, witness=witness,
    )


def _run_jobs(fn: Callable, jobs: list, n_workers: int) -> list:
    if n_workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, jobs))


def exponent_records(cfg: Config, claim: str | None, n_workers: int) -> list[dict]:
    ids = [claim] if claim else [c.id for c in exponents.catalog_claims()]
    for cid in ids:
        exponents.claim_by_id(cid)
    jobs = [(cid, cfg.epsilon1, cfg.certify_min_width, cfg.certify_margin) for cid in ids]
    return _run_jobs(_exponent_job, jobs, n_workers)


def combinatorics_records(cfg: Config, case: str | None, n_workers: int) -> list[dict]:
    cases = [combinatorics.case_by_id(case)] if case else list(combinatorics.case_catalog())
    jobs = [(c.id, s, cfg.falsify_count, cfg.epsilon1) for c in cases for s in cfg.seeds]
    out = _run_jobs(_comb_job, jobs, n_workers)
    if case is None:
        out.append(_mutant_record(cfg))
    return out


# ---------------------------------------------------------------------------
# catalog dump


def catalog_document() -> dict:
    dec = []
    for case in decomposition.case_catalog():
        dec.append({
            "case": case.a_case,
            "beta": case.beta,
            "claimed_total": case.claimed_total,
            "terms": [
                {"id": t.id, "kind": t.kind, "bound": t.claimed_bound, "anchor": t.source,
                 "spec": t.spec.describe()}
                for t in case.thetas
            ],
        })
    exp = [
        {"id": c.id, "anchor": c.anchor, "relation": c.relation.value, "box": {k: list(v) for k, v in sorted(c.box.items())}}
        for c in exponents.catalog_claims()
    ]
    comb = [
        {"id": c.id, "family": c.family.value, "a_case": c.a_case, "r": list(c.r_values),
         "beta": list(c.beta_range) if c.beta_range else None, "constraints": c.describe()}
        for c in combinatorics.case_catalog()
    ]
    return {"decomposition": dec, "exponents": exp, "combinatorics": comb}


# ---------------------------------------------------------------------------
# report


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def summarize(claims: list[dict]) -> dict:
    counts: dict[str, int] = {}
    for c in claims:
        counts[c["status"]] = counts.get(c["status"], 0) + 1
    failing = [c["id"] for c in claims if c["status"] not in PASSING]
    return {"total": len(claims), "by_status": dict(sorted(counts.items())), "failing": failing,
            "all_passed": not failing}


def build_report(command: str, cfg: Config, claims: list[dict], wall: float) -> dict:
    return {
        "version": tool_version(),
        "command": command,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
        "claims": claims,
        "summary": summarize(claims),
        # the only non-deterministic part of the report
        "timestamp": {
            "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "wall_seconds": round(wall, 3),
        },
    }


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=False) + "\n")


def _write_csv(path: Path, table, theta_rows: list) -> None:
    path.mkdir(parents=True, exist_ok=True)
    us, vs = table.grid()
    with open(path / "omega.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "omega"])
        for u, v in zip(us[::10], vs[::10]):
            w.writerow([f"{u:.10g}", f"{v:.17g}"])
    if theta_rows:
        with open(path / "thetas.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["case", "term", "eps1", "value", "err", "bound"])
            w.writerows(theta_rows)


# ---------------------------------------------------------------------------
# entry point


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sievecert", description="Run verification suites and write a JSON report.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--case", help="decomposition a-case (e.g. 0.53-0.545) or combinatorics case (e.g. II(ii))")
    p.add_argument("--claim", help="exponent claim id")
    p.add_argument("--quad-tol", type=float)
    p.add_argument("--eps1", type=float)
    p.add_argument("--seeds", help="comma separated integers")
    p.add_argument("--count", type=int, help="falsification samples per case and seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", default="report.json")
    p.add_argument("--config")
    p.add_argument("--emit-csv", metavar="DIR")
    p.add_argument("--omega", metavar="PATH", help="with dump-catalog: write the omega table here")
    return p


def _config_from(args) -> Config:
    values = read_config(args.config) if args.config else {}
    if args.quad_tol is not None:
        values["quad_tol"] = args.quad_tol
    if args.eps1 is not None:
        values["epsilon1"] = args.eps1
    if args.seeds is not None:
        values["seeds"] = Config.coerce("seeds", args.seeds)
    if args.count is not None:
        values["falsify_count"] = args.count
    cfg = Config(**values)
    cfg.validate()
    return cfg


def run(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _config_from(args)
    except (ValueError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    t0 = time.perf_counter()
    cmd = args.command
    try:
        if cmd == "dump-catalog":
            doc = catalog_document()
            Path(args.report).write_text(json.dumps(doc, indent=2) + "\n")
            if args.omega:
                buchstab.dump_table(buchstab.build_omega(cfg.omega_u_max, cfg.omega_step), args.omega)
            return EXIT_OK

        claims: list[dict] = []
        theta_rows: list | None = [] if args.emit_csv else None
        table = None
        if cmd in ("verify-omega", "verify-decomposition", "verify-all") or args.emit_csv:
            table = buchstab.build_omega(cfg.omega_u_max, cfg.omega_step)
        if cmd in ("verify-omega", "verify-all"):
            claims += omega_records(cfg, table)
        if cmd in ("verify-decomposition", "verify-all"):
            cases = [args.case] if (args.case and cmd == "verify-decomposition") else None
            claims += decomposition_records(cfg, table, cases, theta_rows)
        if cmd in ("verify-exponents", "verify-all"):
            claim = args.claim if cmd == "verify-exponents" else None
            claims += exponent_records(cfg, claim, args.jobs)
        if cmd in ("verify-combinatorics", "verify-all"):
            case = args.case if cmd == "verify-combinatorics" else None
            claims += combinatorics_records(cfg, case, args.jobs)
    except KeyError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE

    report = build_report(cmd, cfg, claims, time.perf_counter() - t0)
    write_report(report, args.report)
    if args.emit_csv:
        _write_csv(Path(args.emit_csv), table, theta_rows or [])
    s = report["summary"]
    print(f"{cmd}: {s['total']} claims, {s['total'] - len(s['failing'])} passed, report at {os.fspath(args.report)}")
    for cid in s["failing"]:
        print(f"  not passed: {cid}")
    return EXIT_OK if s["all_passed"] else EXIT_FAIL


def main() -> None:
    sys.exit(run())
