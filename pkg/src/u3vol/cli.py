"""Command line entry point: ``u3vol verify`` and ``u3vol table``.

Output is a pure function of the flags, so two runs with the same flags give
identical bytes.  Exit status: 0 all checks pass, 1 some check fails or a
guard trips, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass

from . import cohomology, decompositions, group_engine, lattice, volumes
from .errors import U3Error
from .ring import SpecialKind, enumerate_special, is_prime

TABLE_FIELDS = ["p", "n", "E0", "E1", "NOp", "idx_Gamma_A", "idx_B", "idx_A", "vol_num", "vol_den", "method", "caveats"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    primes: tuple = (3,)
    n_max: int = 3
    precision: int | None = None
    fmt: str = "text"
    seed: int = 0
    samples: int = 200
    guard_orbit: int = 3 * 10**6
    bruhat_census: bool = False

    def oracle(self) -> volumes.OracleConfig:
        return volumes.OracleConfig(
            samples=self.samples,
            kernel_samples=max(500, self.samples),
            seed=self.seed,
            precision=self.precision,
            orbit_guard=self.guard_orbit,
        )


@dataclass
class Check:
    name: str
    p: int
    n: int | None
    anchor: str
    ok: bool
    evidence: str

    def as_dict(self) -> dict:
        return {
            "check": self.name,
            "p": self.p,
            "n": self.n,
            "anchor": self.anchor,
            "verdict": "PASS" if self.ok else "FAIL",
            "evidence": self.evidence,
        }


def _parse_primes(text: str) -> tuple:
    try:
        primes = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"--primes expects a comma separated list of integers, got {text!r}") from exc
    for p in primes:
        if p == 2:
            raise UsageError("p = 2 is not supported: the constructions assume odd residue characteristic")
        if not is_prime(p):
            raise UsageError(f"{p} is not a prime")
        if p not in volumes.DESK_PRIMES:
            raise UsageError(f"p = {p} is outside the supported range {volumes.DESK_PRIMES}")
    return tuple(sorted(set(primes)))


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--primes", default="3", help="comma separated odd primes (default 3)")
    common.add_argument("--n-max", type=int, default=3, help="largest level n (default 3)")
    common.add_argument("--precision", type=int, default=None, help="working p-adic precision override")
    common.add_argument("--format", choices=("csv", "json", "text"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=200, help="sample count for sampled checks")
    common.add_argument("--guard-orbit", type=int, default=3 * 10**6, help="largest coset orbit explored")
    common.add_argument("--bruhat-census", action="store_true", help="run the Bruhat census for every prime, not only p = 3")
    parser = argparse.ArgumentParser(prog="u3vol", description="Exact volumes of the Gamma_n tower in unramified U(2,1).")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run every certification check")
    sub.add_parser("table", parents=[common], help="print the index and volume table")
    return parser


def _config(ns) -> RunConfig:
    if ns.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    if ns.samples < 1:
        raise UsageError("--samples must be >= 1")
    return RunConfig(
        primes=_parse_primes(ns.primes),
        n_max=ns.n_max,
        precision=ns.precision,
        fmt=ns.format,
        seed=ns.seed,
        samples=ns.samples,
        guard_orbit=ns.guard_orbit,
        bruhat_census=ns.bruhat_census,
    )


# -- verify -----------------------------------------------------------------


def _guarded(name, p, n, anchor, fn) -> Check:
    try:
        ok, evidence = fn()
    except (U3Error, AssertionError, ValueError) as exc:
        return Check(name, p, n, anchor, False, f"{type(exc).__name__}: {exc}")
    return Check(name, p, n, anchor, bool(ok), evidence)


def _ring_checks(p, cfg):
    out = []
    for n in range(1, cfg.n_max + 1):
        def e0(n=n):
            c = enumerate_special(p, SpecialKind.TRACE_ZERO, n).cardinality
            return c == p**n, f"|E0| = {c}, expected {p**n}"

        def e1(n=n):
            c = enumerate_special(p, SpecialKind.NORM_ONE, n).cardinality
            want = p ** (n - 1) * (p + 1)
            return c == want, f"|E1| = {c}, expected {want}"

        out.append(_guarded("trace-zero count", p, n, "E0-cardinality", e0))
        out.append(_guarded("norm-one count", p, n, "E1-cardinality", e1))

    def nop():
        c = enumerate_special(p, SpecialKind.HERMITIAN_PAIRS).cardinality
        return c == p**3, f"|N(O/p)| = {c}, expected {p**3}"

    out.append(_guarded("Hermitian pair count", p, 1, "N-cardinality", nop))
    return out


def _cohomology_checks(p, cfg):
    out = []
    for kind in cohomology.ModuleKind:
        for n in range(1, cfg.n_max + 1):
            for degree in (1, 2):
                def run(kind=kind, n=n, degree=degree):
                    r = cohomology.tate_cohomology(p, kind, n, degree)
                    return r.h_order == 1, f"Z={r.cocycle_count} B={r.coboundary_count} H={r.h_order}"

                out.append(_guarded(f"H^{degree} {kind.value}", p, n, "cohomology-vanishing", run))
    return out


def _ladder_check(p, n, cfg):
    def run():
        ev = decompositions.klingen_index_chain(p, n, samples=cfg.samples, seed=cfg.seed, prec=cfg.precision)
        want = [p + 1] + [p] * (n - 1)
        return ev.indices == want and ev.failures == 0, f"indices {ev.indices}, failures {ev.failures}, samples {ev.samples_per_rung}/rung"

    return _guarded("Klingen ladder", p, n, "ladder-index", run)


def _norm_one_check(p, n, cfg):
    def run():
        ev = group_engine.verify_norm_one_sequence(p, n, n + 1, sample_budget=max(500, cfg.samples), seed=cfg.seed)
        want = p ** (n - 1) * (p + 1)
        ok = ev.index == want and ev.surjectivity_witnesses == want and ev.counterexamples == 0
        return ok, f"index {ev.index}, witnesses {ev.surjectivity_witnesses}, kernel hits {ev.kernel_hits}/{ev.kernel_samples}, counterexamples {ev.counterexamples}"

    return _guarded("norm-one sequence", p, n, "B/A-index", run)


def _coset_rung_check(p, n, cfg):
    def run():
        r = decompositions.recursive_coset_check(p, n, prec=cfg.precision, seed=cfg.seed)
        return r == p**3, f"[B_{n} : B_{n + 1}] = {r}"

    return _guarded("B-chain rung", p, n, "B-rung-index", run)


def _iwahori_check(p, n, cfg):
    def run():
        rng = random.Random(cfg.seed)
        m = cfg.precision or 2 * n + 4
        good = 0
        for _ in range(cfg.samples):
            g = group_engine.random_b_element(p, n, m, rng)
            t = decompositions.iwahori_factor(g, n)
            good += t.product().agrees(g)
        return good == cfg.samples, f"{good}/{cfg.samples} round trips"

    return _guarded("Iwahori round trip", p, n, "Iwahori-factorisation", run)


def _bruhat_check(p):
    def run():
        c = decompositions.bruhat_census(p)
        ok = c.unique and c.total == c.small_cell + c.big_cell == group_engine.residue_group_count(p)
        return ok, f"|U| = {c.total} = {c.small_cell} + {c.big_cell}, |U_J| = {c.unipotent_count}"

    return _guarded("Bruhat census", p, 1, "Bruhat-cells", run)


def _lattice_check(p, n, cfg):
    def run():
        prec = max(cfg.precision or 0, 2 * n + 4)
        o = lattice.lattice_orbit(n, p, prec)
        want = p ** (n - 1) * (p + 1)
        return o.size == want, f"orbit {o.size}, expected {want}, stabiliser elements checked {o.schreier_checked}"

    return _guarded("lattice orbit", p, n, "Gamma/A-index", run)


def _volume_check(p, n, strategy, cfg):
    def run():
        r = volumes.vol_from_oracles(p, n, strategy, cfg.oracle())
        return True, f"vol {r.vol} (idx_Gamma_A {r.idx_gamma_a}, idx_B {r.idx_b}, E1 {r.e1})"

    return _guarded(f"volume {volumes.Strategy(strategy).value}", p, n, "volume-formula", run)


def collect_checks(cfg: RunConfig) -> list[Check]:
    checks: list[Check] = []
    for p in cfg.primes:
        checks += _ring_checks(p, cfg)
    for p in cfg.primes:
        checks += _cohomology_checks(p, cfg)
    stages = [_ladder_check, _norm_one_check, _coset_rung_check, _iwahori_check]
    for stage in stages:
        for p in cfg.primes:
            for n in range(1, cfg.n_max + 1):
                checks.append(stage(p, n, cfg))
    for p in cfg.primes:
        if p == 3 or cfg.bruhat_census:
            checks.append(_bruhat_check(p))
    for p in cfg.primes:
        for n in range(1, cfg.n_max + 1):
            checks.append(_lattice_check(p, n, cfg))
    for p in cfg.primes:
        for n in range(1, cfg.n_max + 1):
            for s in volumes.Strategy:
                checks.append(_volume_check(p, n, s, cfg))
    return checks


def render_checks(checks: list[Check], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([c.as_dict() for c in checks], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["check", "p", "n", "anchor", "verdict", "evidence"], lineterminator="\n")
        w.writeheader()
        for c in checks:
            w.writerow(c.as_dict())
        return buf.getvalue()
    lines = []
    for c in checks:
        n = "-" if c.n is None else str(c.n)
        lines.append(f"{'PASS' if c.ok else 'FAIL'}  {c.name:<26} p={c.p} n={n} [{c.anchor}]  {c.evidence}")
    passed = sum(c.ok for c in checks)
    lines.append(f"{passed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    checks = collect_checks(cfg)
    out.write(render_checks(checks, cfg.fmt))
    return 0 if all(c.ok for c in checks) else 1


# -- table ------------------------------------------------------------------


def table_records(rows) -> list[dict]:
    recs = []
    for row in rows:
        r = row.report
        recs.append({
            "p": r.p,
            "n": r.n,
            "E0": r.e0,
            "E1": r.e1,
            "NOp": r.nop,
            "idx_Gamma_A": r.idx_gamma_a,
            "idx_B": r.idx_b,
            "idx_A": r.idx_a,
            "vol_num": r.vol.numerator,
            "vol_den": r.vol.denominator,
            "method": r.method,
            "caveats": "; ".join(r.caveats),
        })
    return recs


def render_table(recs: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(recs, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=TABLE_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(recs)
        return buf.getvalue()
    widths = {f: max([len(f)] + [len(str(r[f])) for r in recs]) for f in TABLE_FIELDS[:-1]}
    lines = ["  ".join(f.rjust(widths[f]) for f in TABLE_FIELDS[:-1]) + "  caveats"]
    for r in recs:
        lines.append("  ".join(str(r[f]).rjust(widths[f]) for f in TABLE_FIELDS[:-1]) + "  " + r["caveats"])
    return "\n".join(lines) + "\n"


def cmd_table(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    rows = volumes.build_index_table(cfg.primes, cfg.n_max, cfg.oracle())
    good = [r for r in rows if r.report is not None]
    out.write(render_table(table_records(good), cfg.fmt))
    for r in rows:
        if r.report is None:
            err.write(f"FAIL p={r.p} n={r.n} [volume-formula]: {r.error}\n")
    return 0 if len(good) == len(rows) else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"u3vol: error: {exc}", file=sys.stderr)
        return 2
    try:
        if ns.command == "verify":
            return cmd_verify(cfg)
        return cmd_table(cfg)
    except U3Error as exc:
        print(f"u3vol: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
