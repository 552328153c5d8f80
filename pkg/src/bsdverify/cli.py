"""Command-line front end: configure a check, run it, emit a report.

    bsdverify --check psh --domain I:2,2 --seed 7 --samples 200
    bsdverify --check df_scan --domain I:1,1 --mu-grid 0.05:1:0.05 --format text

Exit codes: 0 pass (or pass-with-flag), 1 fail, 2 configuration error.
Reports are JSON objects with a fixed key order; two runs of the same
configuration produce identical bytes apart from ``wall_time``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .calculus import PshVerdict, StencilOutOfDomain, complex_hessian_fd, psh_check
from .domains import DomainSpec, Kind, from_coords, polydisc_embed, to_coords
from .exhaustions import (
    OutsideDomain,
    SectionEscapedDomain,
    SectionSpec,
    bundle_section_field,
    df_scan,
    exponent_scan,
    log_psi,
    log_psi_field,
    parse_grid,
    power_field,
    random_section,
    section_samples,
)
from .identities import UnsupportedDomain, identity_suite
from .moebius import (
    SingularDenominator,
    apply_matrix_moebius,
    apply_polydisc_moebius,
    isotropy_iv,
    phase_isotropy,
    random_class_moebius,
    random_orthogonal,
    random_polydisc_moebius,
)
from .sampling import boundary_ray_samples, pair_samples, random_point, substream

__all__ = [
    "SCHEMA_VERSION",
    "CHECKS",
    "ConfigError",
    "CheckRun",
    "Report",
    "run_check",
    "emit_report",
    "parse_report",
    "replay_worst_point",
    "exit_code",
    "main",
]

SCHEMA_VERSION = "1"
CHECKS = ("psh", "strict", "invariance", "identity", "exponent_scan", "df_scan", "section")
SECTION_FLAGS = {"const": "constant", "holo": "holomorphic_affine", "antiholo": "antiholomorphic_affine"}

DEFAULT_TOL = {"invariance": 1e-10}
PSH_TOL = 1e-6
DEFAULT_GRID = "0.05:1:0.05"
# strict checks sample well inside the domain
STRICT_MIN_CLEARANCE = 0.1
SEED_MAX = 2**64 - 1

NUMERICAL_ERRORS = (StencilOutOfDomain, SingularDenominator, OutsideDomain, SectionEscapedDomain,
                    np.linalg.LinAlgError, FloatingPointError)


class ConfigError(ValueError):
    pass


@dataclass
class CheckRun:
    check_id: str
    domain: str
    seed: int = 0
    samples: int = 200
    step: float | None = None
    tol: float | None = None
    extra: dict = field(default_factory=dict)

    def spec(self) -> DomainSpec:
        try:
            return DomainSpec.from_token(self.domain)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self) -> "CheckRun":
        """Check the fields and return a copy with defaults filled in."""
        if self.check_id not in CHECKS:
            raise ConfigError(f"unknown check {self.check_id!r}; choose from {', '.join(CHECKS)}")
        spec = self.spec()
        if not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError("samples must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= SEED_MAX:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.step is not None and not self.step > 0:
            raise ConfigError("step must be positive")
        tol = self.tol if self.tol is not None else DEFAULT_TOL.get(self.check_id, PSH_TOL)
        if not tol > 0:
            raise ConfigError("tol must be positive")
        extra = dict(self.extra)
        c = self.check_id
        if c in ("psh", "strict"):
            r = extra.get("r")
            if c == "strict" and r is None:
                r = 2 * spec.rank
            if r is not None:
                r = float(r)
                if r < 1:
                    raise ConfigError("r must be >= 1")
            extra["r"] = r
        if c in ("exponent_scan", "df_scan"):
            text = extra.get("mu_grid") or DEFAULT_GRID
            try:
                grid = parse_grid(text)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            if any(not 0 < m <= 1 for m in grid):
                raise ConfigError("exponents must lie in (0, 1]")
            extra["mu_grid"] = text
        if c == "df_scan" and not (spec.kind is Kind.I and spec.p == 1):
            raise ConfigError("df_scan runs on the ball pair; use a domain I:1,n")
        if c == "identity" and spec.kind not in (Kind.I, Kind.IV):
            raise ConfigError(f"no closed-form identities for type {spec.kind.value}")
        if c == "section":
            flag = extra.get("section") or "holo"
            if flag not in SECTION_FLAGS:
                raise ConfigError(f"section must be one of {', '.join(SECTION_FLAGS)}")
            extra["section"] = flag
            extra["sections"] = int(extra.get("sections") or 10)
            if extra["sections"] < 1:
                raise ConfigError("sections must be >= 1")
            extra["base_dim"] = int(extra.get("base_dim") or 2)
        if extra.get("r") is None:
            extra.pop("r", None)
        return CheckRun(c, spec.token, self.seed, self.samples, self.step, tol, dict(sorted(extra.items())))

    def to_json(self) -> dict:
        return {
            "check_id": self.check_id,
            "domain": self.domain,
            "seed": self.seed,
            "samples": self.samples,
            "step": self.step,
            "tol": self.tol,
            "extra": self.extra,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CheckRun":
        return cls(data["check_id"], data["domain"], int(data["seed"]), int(data["samples"]),
                   data.get("step"), data.get("tol"), dict(data.get("extra") or {}))


@dataclass
class Report:
    run: CheckRun
    verdict: str
    worst_min_eig: float | None = None
    worst_point: dict | None = None
    details: dict = field(default_factory=dict)
    error: str | None = None
    wall_time: float = 0.0
    library_version: str = __version__
    schema_version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "pass-with-flag")

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "library_version": self.library_version,
            "run": self.run.to_json(),
            "verdict": self.verdict,
            "worst_min_eig": self.worst_min_eig,
            "worst_point": self.worst_point,
            "details": self.details,
            "error": self.error,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        wme = data.get("worst_min_eig")
        return cls(
            run=CheckRun.from_json(data["run"]),
            verdict=data["verdict"],
            worst_min_eig=None if wme is None else _from_jsonable_float(wme),
            worst_point=data.get("worst_point"),
            details=data.get("details") or {},
            error=data.get("error"),
            wall_time=float(data.get("wall_time", 0.0)),
            library_version=data.get("library_version", ""),
            schema_version=data.get("schema_version", ""),
        )


# ---------------------------------------------------------------- json helpers


def _jsonable(obj):
    """Plain JSON types; non-finite floats become the strings 'nan', 'inf', '-inf'."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isfinite(x):
            return x
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _from_jsonable_float(x) -> float:
    return float(x)


def _pairs(x) -> list:
    x = np.asarray(x, dtype=complex)
    return np.stack([x.real, x.imag], axis=-1).tolist()


def _unpairs(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


# ---------------------------------------------------------------- checks


def _psh_field(run: CheckRun, spec: DomainSpec):
    c = run.check_id
    if c == "strict":
        return power_field(spec, 1.0 / run.extra["r"], twisted=True)
    if run.extra.get("r") is not None:
        return power_field(spec, 1.0 / run.extra["r"])
    return log_psi_field(spec)


def _verdict_point(v: PshVerdict, **more) -> dict:
    out = {
        "sample_index": v.worst_index,
        "tag": v.worst_tag,
        "step": v.worst_step,
        "scale": v.worst_scale,
        "coords": _pairs(v.worst_point),
    }
    out.update(more)
    return out


def _verdict_details(v: PshVerdict) -> dict:
    return {
        "samples_checked": v.samples,
        "worst_ratio": v.worst_ratio,
        "flagged": v.flagged,
        "strict": v.strict,
    }


def _strict_samples(spec: DomainSpec, seed: int, count: int):
    out = []
    i = 0
    while len(out) < count:
        batch = list(pair_samples(spec, seed, count, start=i))
        out.extend(s for s in batch if s.clearance >= STRICT_MIN_CLEARANCE)
        i += count
    return out[:count]


def _run_psh(run: CheckRun, spec: DomainSpec) -> Report:
    f = _psh_field(run, spec)
    strict = run.check_id == "strict"
    if strict:
        samples = _strict_samples(spec, run.seed, run.samples)
    else:
        samples = pair_samples(spec, run.seed, run.samples)
    v = psh_check(f, samples, step=run.step, tol=run.tol, strict=strict,
                  workers=int(run.extra.get("workers", 1) or 1))
    return Report(run, v.verdict, v.worst_min_eig, _verdict_point(v), _verdict_details(v))


def _scan_report(run: CheckRun, spec: DomainSpec, res) -> Report:
    bound = 1.0 / (2 * spec.rank)
    below = [(mu, v) for mu, v in zip(res.grid, res.verdicts) if mu <= bound + 1e-12]
    ok = res.monotone and all(v.passed for _, v in below)
    # the worst point of the check that decides the verdict
    pool = below or list(zip(res.grid, res.verdicts))
    failing = [(mu, v) for mu, v in pool if not v.passed]
    mu, v = failing[0] if failing else min(pool, key=lambda t: t[1].worst_ratio)
    details = {
        "worst_ratio": v.worst_ratio,
        "estimate": res.estimate,
        "monotone": res.monotone,
        "proven_bound": bound,
        "rows": res.rows(),
    }
    return Report(run, "pass" if ok else "fail", v.worst_min_eig, _verdict_point(v, mu=mu), details)


def _run_exponent_scan(run: CheckRun, spec: DomainSpec) -> Report:
    samples = list(pair_samples(spec, run.seed, run.samples))
    res = exponent_scan(spec, parse_grid(run.extra["mu_grid"]), samples, tol=run.tol, step=run.step)
    return _scan_report(run, spec, res)


def _run_df_scan(run: CheckRun, spec: DomainSpec) -> Report:
    samples = list(boundary_ray_samples(spec, run.seed, run.samples))
    res = df_scan(spec.q, parse_grid(run.extra["mu_grid"]), samples, tol=run.tol, step=run.step)
    return _scan_report(run, spec, res)


def _run_identity(run: CheckRun, spec: DomainSpec) -> Report:
    kw = {} if run.step is None else {"step": run.step}
    rep = identity_suite(spec, run.samples, run.seed, **kw)
    details = {"identities": [r.to_json() for r in rep.results]}
    worst = {"coords": rep.worst_point}
    return Report(run, "pass" if rep.passed else "fail", None, worst, details)


def _run_section(run: CheckRun, spec: DomainSpec) -> Report:
    kind = SECTION_FLAGS[run.extra["section"]]
    rows = []
    worst = None
    for j in range(run.extra["sections"]):
        rng = np.random.default_rng([run.seed, 1, j])
        h = random_section(spec, kind, rng, base_dim=run.extra["base_dim"])
        samples = section_samples(spec, h, run.seed, run.samples, start=j * run.samples)
        v = psh_check(bundle_section_field(spec, h), samples, step=run.step, tol=run.tol)
        rows.append({"section": j, "verdict": v.verdict, "worst_ratio": v.worst_ratio})
        if worst is None or v.worst_ratio < worst[0].worst_ratio:
            worst = (v, j, h)
    v, j, h = worst
    verdict = "fail" if any(r["verdict"] == "fail" for r in rows) else (
        "pass-with-flag" if any(r["verdict"] == "pass-with-flag" for r in rows) else "pass")
    point = _verdict_point(v, section_index=j, section=h.to_json())
    return Report(run, verdict, v.worst_min_eig, point, {"worst_ratio": v.worst_ratio, "sections": rows})


# invariance ------------------------------------------------------------


def _native_pair(spec: DomainSpec, rng, max_gauge: float = 0.9):
    x = random_point(spec, rng, max_gauge)
    y = random_point(spec, rng, max_gauge)
    return from_coords(spec, x), from_coords(spec, y)


def _slice_pair(spec: DomainSpec, rng, max_abs: float = 0.9):
    r = spec.rank
    zeta = rng.uniform(0, max_abs, r) * np.exp(2j * np.pi * rng.random(r))
    eta = rng.uniform(0, max_abs, r) * np.exp(2j * np.pi * rng.random(r))
    return zeta, eta


def _invariance_trial(spec: DomainSpec, seed: int, i: int):
    """(z, w, gz, gw, description of g) for trial i."""
    rng = substream(seed, i)
    k = spec.kind
    if k in (Kind.I, Kind.II, Kind.III):
        g = random_class_moebius(spec, rng)
        z, w = _native_pair(spec, rng)
        gz, gw = apply_matrix_moebius(g, z), apply_matrix_moebius(g, w)
        if k is Kind.II:
            gz, gw = 0.5 * (gz - gz.T), 0.5 * (gw - gw.T)
        elif k is Kind.III:
            gz, gw = 0.5 * (gz + gz.T), 0.5 * (gw + gw.T)
        return z, w, gz, gw, g.to_json()
    theta = float(rng.uniform(0, 2 * np.pi))
    if i % 2 == 0:
        # polydisc Moebius on a slice pair followed by a rotation
        m = random_polydisc_moebius(spec.rank, rng)
        zeta, eta = _slice_pair(spec, rng)
        z, w = polydisc_embed(spec, zeta), polydisc_embed(spec, eta)
        gz = polydisc_embed(spec, apply_polydisc_moebius(spec, m, zeta))
        gw = polydisc_embed(spec, apply_polydisc_moebius(spec, m, eta))
        desc = {"polydisc": m.to_json()}
    else:
        z, w = _native_pair(spec, rng, 0.9 if k is Kind.IV else 0.3)
        gz, gw = z, w
        desc = {}
    if k is Kind.IV:
        O = random_orthogonal(spec.n, rng)
        gz, gw = isotropy_iv(theta, O, gz), isotropy_iv(theta, O, gw)
        desc["isotropy"] = {"theta": theta, "O": O.tolist()}
    else:
        gz, gw = phase_isotropy(spec, theta, gz), phase_isotropy(spec, theta, gw)
        desc["phase"] = theta
    return z, w, gz, gw, desc


def _run_invariance(run: CheckRun, spec: DomainSpec) -> Report:
    worst = None
    for i in range(run.samples):
        z, w, gz, gw, desc = _invariance_trial(spec, run.seed, i)
        a = log_psi(spec, z, w)
        b = log_psi(spec, gz, gw)
        res = abs(b - a) / (1.0 + abs(a))
        if worst is None or res > worst[0]:
            worst = (res, i, z, w, desc, a)
    res, i, z, w, desc, a = worst
    point = {
        "sample_index": i,
        "z": _pairs(to_coords(spec, z)),
        "w": _pairs(to_coords(spec, w)),
        "automorphism": desc,
    }
    details = {"max_relative_change": res, "log_psi_at_worst": a, "trials": run.samples}
    return Report(run, "pass" if res <= run.tol else "fail", None, point, details)


_RUNNERS = {
    "psh": _run_psh,
    "strict": _run_psh,
    "invariance": _run_invariance,
    "identity": _run_identity,
    "exponent_scan": _run_exponent_scan,
    "df_scan": _run_df_scan,
    "section": _run_section,
}


def run_check(config: CheckRun) -> Report:
    """Validate ``config`` and run it.

    Configuration problems raise ConfigError.  Numerical failures during the
    run come back as a ``fail`` report with the message in ``error``.
    """
    run = config.validate()
    spec = run.spec()
    t0 = time.perf_counter()
    try:
        rep = _RUNNERS[run.check_id](run, spec)
    except UnsupportedDomain as exc:
        raise ConfigError(str(exc)) from None
    except NUMERICAL_ERRORS as exc:
        # the CheckRun itself replays the failure; add the point when known
        bad = getattr(exc, "point", None)
        point = {"coords": [] if bad is None else _pairs(bad)}
        rep = Report(run, "fail", None, point, {}, error=f"{type(exc).__name__}: {exc}")
    rep.details = _jsonable(rep.details)
    rep.worst_point = _jsonable(rep.worst_point)
    if rep.worst_min_eig is not None:
        rep.worst_min_eig = float(rep.worst_min_eig)
    rep.wall_time = time.perf_counter() - t0
    return rep


def replay_worst_point(report: Report | dict) -> float:
    """Recompute the smallest Levi eigenvalue at a report's worst point.

    Works for psh, strict, exponent_scan, df_scan and section reports and
    returns exactly the recorded ``worst_min_eig``.
    """
    if isinstance(report, dict):
        report = Report.from_json(report)
    run = report.run
    spec = run.spec()
    wp = report.worst_point
    if wp is None or "step" not in wp:
        raise ValueError(f"{run.check_id} reports carry no Hessian replay data")
    x = _unpairs(wp["coords"])
    c = run.check_id
    if c in ("psh", "strict"):
        f = _psh_field(run, spec)
    elif c in ("exponent_scan", "df_scan"):
        f = power_field(spec, float(wp["mu"]))
    elif c == "section":
        f = bundle_section_field(spec, SectionSpec.from_json(wp["section"]))
    else:
        raise ValueError(f"no Hessian replay for {c}")
    return complex_hessian_fd(f, x, float(wp["step"])).min_eig


def exit_code(report: Report) -> int:
    return 0 if report.passed else 1


# ---------------------------------------------------------------- output


def emit_report(report: Report, fmt: str = "json") -> bytes:
    if fmt == "json":
        data = _jsonable(report.to_json())
        return (json.dumps(data, indent=2, allow_nan=False, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "text":
        return _text_summary(report).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(data: bytes | str) -> Report:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return Report.from_json(json.loads(data))


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _text_summary(rep: Report) -> str:
    run = rep.run
    lines = [
        f"check    {run.check_id} on {run.domain}  (seed {run.seed}, samples {run.samples})",
        f"verdict  {rep.verdict.upper()}",
    ]
    if rep.worst_min_eig is not None:
        lines.append(f"worst    min_eig {_fmt(rep.worst_min_eig)}  ratio {_fmt(rep.details.get('worst_ratio'))}"
                     f"  at sample {_fmt((rep.worst_point or {}).get('sample_index'))}")
    d = rep.details
    if "rows" in d:
        lines.append(f"estimate {_fmt(d['estimate'])}  (proven bound {_fmt(d['proven_bound'])},"
                     f" monotone {d['monotone']})")
        for row in d["rows"]:
            lines.append(f"  mu {row['mu']:<6g} {row['verdict']:<15} worst ratio {_fmt(row['worst_ratio'])}")
    if "identities" in d:
        for r in d["identities"]:
            mark = "ok" if r["passed"] else ("FAIL" if r["enforced"] else "info")
            lines.append(f"  {r['name']:<30} {_fmt(r['max_residual']):>12}  tol {_fmt(r['tolerance'])}  {mark}")
    if "sections" in d:
        for r in d["sections"]:
            lines.append(f"  section {r['section']:<3} {r['verdict']:<15} worst ratio {_fmt(r['worst_ratio'])}")
    if "max_relative_change" in d:
        lines.append(f"max |change| / (1 + |log psi|) = {_fmt(d['max_relative_change'])}  tol {_fmt(run.tol)}")
    if rep.error:
        lines.append(f"error    {rep.error}")
    lines.append(f"time     {rep.wall_time:.2f} s   bsdverify {rep.library_version}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsdverify", description="Numerical checks of plurisubharmonic "
                                "exhaustions on pairs of bounded symmetric domains.")
    p.add_argument("--check", required=True, choices=CHECKS)
    p.add_argument("--domain", required=True, help="I:p,q | II:n | III:n | IV:n | V | VI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--step", type=float, default=None, help="fixed FD step (default: from clearance)")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--r", type=float, default=None, help="test -delta^(1/r) instead of log psi")
    p.add_argument("--mu-grid", default=None, help="exponent grid a:b:step")
    p.add_argument("--section", choices=sorted(SECTION_FLAGS), default=None)
    p.add_argument("--sections", type=int, default=None, help="number of random sections")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    return p


def config_from_args(args: argparse.Namespace) -> CheckRun:
    extra: dict[str, Any] = {}
    if args.r is not None:
        extra["r"] = args.r
    if args.mu_grid is not None:
        extra["mu_grid"] = args.mu_grid
    if args.section is not None:
        extra["section"] = args.section
    if args.sections is not None:
        extra["sections"] = args.sections
    if args.workers != 1:
        extra["workers"] = args.workers
    return CheckRun(args.check, args.domain, args.seed, args.samples, args.step, args.tol, extra)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run_check(config_from_args(args))
    except ConfigError as exc:
        print(f"bsdverify: configuration error: {exc}", file=sys.stderr)
        return 2
    data = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
