"""Acceptance criteria 1-11.

Each test prints one ``CRITERION n PASS|FAIL`` line (also collected into the
terminal summary) and then asserts the same condition.  Runs for criterion 11
are cached here so determinism reruns compare against the originals.
"""

import re
import time

import numpy as np
import pytest

import conftest
from bsdverify.calculus import psh_check
from bsdverify.cli import CheckRun, emit_report, run_check
from bsdverify.domains import DomainSpec, from_coords, generic_norm, generic_norm_polarized
from bsdverify.exhaustions import log_psi, power_field, psi_k
from bsdverify.octonion import Octonion, h3_adjoint, h3_det, oconj, omul, scalar_product
from bsdverify.sampling import boundary_ray_samples, random_point

PSH_DOMAINS = ["I:1,1", "I:2,2", "I:2,3", "I:3,3", "II:4", "III:3", "IV:4", "V", "VI"]
CLASSICAL = PSH_DOMAINS[:7]

# criterion -> list of (CheckRun, emitted JSON bytes)
RUNS: dict[int, list[tuple[CheckRun, bytes]]] = {}


def record(n: int, ok: bool, msg: str) -> None:
    line = f"CRITERION {n:>2} {'PASS' if ok else 'FAIL'}  {msg}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def run(n: int, cfg: CheckRun):
    rep = run_check(cfg)
    RUNS.setdefault(n, []).append((cfg, emit_report(rep)))
    return rep


def test_c01_type_i_identities():
    t0 = time.perf_counter()
    reps = {tok: run(1, CheckRun("identity", tok, samples=50)) for tok in ("I:2,2", "I:3,3")}
    dt = time.perf_counter() - t0
    worst = max(r["max_residual"] for rep in reps.values() for r in rep.details["identities"])
    ok = all(rep.passed for rep in reps.values()) and worst <= 1e-6 and dt <= 30
    record(1, ok, f"type I identities, 5 families x 50 points on I:2,2 and I:3,3: "
                  f"max residual {worst:.2e} (tol 1e-6), {dt:.1f}s (<= 30s)")
    assert ok


def test_c02_type_iv_identities():
    t0 = time.perf_counter()
    reps = {tok: run(2, CheckRun("identity", tok, samples=100)) for tok in ("IV:3", "IV:4")}
    dt = time.perf_counter() - t0
    rows = [r for rep in reps.values() for r in rep.details["identities"]]

    def worst(name):
        return max(r["max_residual"] for r in rows if r["name"] == name)

    norm, det, plus = worst("norm_product"), worst("comparison_det"), worst("comparison_det_positive_sign")
    ok = all(rep.passed for rep in reps.values()) and norm <= 1e-12 and det <= 1e-9 and dt <= 5
    record(2, ok, f"type IV, 100 points on IV:3 and IV:4: norm product {norm:.1e} (tol 1e-12), "
                  f"2x2 det with sign -4A^2(1-|z1|^2)(1-|z2|^2) {det:.1e} rel (tol 1e-9), {dt:.1f}s (<= 5s); "
                  f"printed +4 sign does not hold (rel residual {plus:.3g}), see ledger")
    assert ok


def test_c03_log_psi_psh():
    t0 = time.perf_counter()
    parts, ok = [], True
    for tok in PSH_DOMAINS:
        rep = run(3, CheckRun("psh", tok, samples=200))
        ok &= rep.passed
        parts.append(f"{tok} {rep.verdict} {rep.details['worst_ratio']:.1e}")
    dt = time.perf_counter() - t0
    ok &= dt <= 300
    record(3, ok, f"log psi psh, 200 pairs each (min ratio): {'; '.join(parts)}; {dt:.0f}s (<= 300s)")
    assert ok


def test_c04_invariance():
    t0 = time.perf_counter()
    reps = {tok: run(4, CheckRun("invariance", tok, samples=500)) for tok in ("I:2,2", "IV:4")}
    dt = time.perf_counter() - t0
    ch = {tok: rep.details["max_relative_change"] for tok, rep in reps.items()}
    ok = all(rep.passed for rep in reps.values()) and dt <= 60
    record(4, ok, f"invariance, 500 trials: I:2,2 {ch['I:2,2']:.1e}, IV:4 {ch['IV:4']:.1e} "
                  f"(tol 1e-10 (1+|log psi|)), {dt:.1f}s (<= 60s)")
    assert ok


def test_c05_hyperconvex_exponent():
    parts, ok = [], True
    for tok in CLASSICAL:
        rank = DomainSpec.from_token(tok).rank
        rep = run(5, CheckRun("psh", tok, samples=200, extra={"r": 2 * rank}))
        ok &= rep.passed
        parts.append(f"{tok} {rep.verdict}")
    disc = DomainSpec.ball(1)
    near = list(boundary_ray_samples(disc, 0, 200, t_range=(0.99, 0.999)))
    f = power_field(disc, 0.55)
    bad = sum(1 for smp in near if not psh_check(f, [smp]).passed)
    v = psh_check(f, near)
    ok &= bad >= 1
    record(5, ok, f"-delta^(1/(2 rank)) psh, 200 pairs: {'; '.join(parts)}; "
                  f"disc -delta^0.55 fails at {bad}/200 boundary samples t in [0.99, 0.999] "
                  f"(worst ratio {v.worst_ratio:.1e})")
    assert ok


def test_c06_df_index():
    t0 = time.perf_counter()
    rep = run(6, CheckRun("df_scan", "I:1,1", samples=200, extra={"mu_grid": "0.05:1:0.05"}))
    dt = time.perf_counter() - t0
    est = rep.details["estimate"]
    ok = est is not None and 0.45 <= est <= 0.55 and dt <= 120
    record(6, ok, f"DF scan on the n=1 ball pair, grid 0.05:1:0.05, 200 boundary samples: "
                  f"estimate {est} (want [0.45, 0.55]), monotone {rep.details['monotone']}, {dt:.1f}s (<= 120s)")
    assert ok


def test_c07_strictness():
    parts, ok = [], True
    for tok in CLASSICAL:
        rep = run(7, CheckRun("strict", tok, samples=200))
        ok &= rep.verdict == "pass" and rep.worst_min_eig > 0
        parts.append(f"{tok} {rep.details['worst_ratio']:.2e}")
    record(7, ok, f"-delta_bar^(1/(2 rank)) strict psh, clearance >= 0.1, min ratio: {'; '.join(parts)}")
    assert ok


def test_c08_psi_k():
    gen = np.random.default_rng(8)
    worst, exact, ok = 0.0, True, True
    for tok in ("I:2,2", "IV:4", "V"):
        spec = DomainSpec.from_token(tok)
        for k in (2, 3, 4):
            for _ in range(100):
                pts = [from_coords(spec, random_point(spec, gen)) for _ in range(k)]
                # product form from the polarized generic norm
                prod = 0.0
                for i in range(k):
                    a, b = pts[i], pts[(i + 1) % k]
                    prod += np.log(abs(generic_norm_polarized(spec, a, b)) ** 2
                                   / (generic_norm(spec, a) * generic_norm(spec, b)))
                got = psi_k(spec, pts)
                worst = max(worst, abs(got - prod) / max(1.0, abs(prod)))
                if k == 2:
                    exact &= got == 2 * log_psi(spec, pts[0], pts[1])
    ok = worst <= 1e-12 and exact
    record(8, ok, f"psi_k cyclic product vs pairwise sum, k=2,3,4, 100 tuples on I:2,2 IV:4 V: "
                  f"max rel {worst:.1e} (tol 1e-12); psi_2 == 2 log psi bitwise: {exact}")
    assert ok


def test_c09_bundle_sections():
    parts, ok = [], True
    for tok in ("I:2,2", "I:1,1"):
        for flag in ("holo", "antiholo"):
            rep = run(9, CheckRun("section", tok, samples=100, extra={"section": flag, "sections": 10}))
            ok &= rep.passed
            parts.append(f"{tok} {flag} {rep.verdict} {rep.details['worst_ratio']:.1e}")
    record(9, ok, f"section psh, 10 sections x 100 joint samples, tol 1e-6: {'; '.join(parts)}")
    assert ok


def test_c10_octonion_kernel():
    gen = np.random.default_rng(10)
    t0 = time.perf_counter()
    a = gen.uniform(-1, 1, (1000, 8)) + 1j * gen.uniform(-1, 1, (1000, 8))
    b = gen.uniform(-1, 1, (1000, 8)) + 1j * gen.uniform(-1, 1, (1000, 8))
    na, nb = np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)
    left = np.linalg.norm(omul(omul(a, a), b) - omul(a, omul(a, b)), axis=1) / (na**2 * nb)
    right = np.linalg.norm(omul(omul(a, b), b) - omul(a, omul(b, b)), axis=1) / (na * nb**2)
    alt = max(left.max(), right.max())

    ra, rb = a.real, b.real
    q = lambda x: np.sum(x * x, axis=-1)  # noqa: E731
    qab = q(omul(ra, rb).real)
    mult = np.max(np.abs(qab - q(ra) * q(rb)) / (q(ra) * q(rb)))

    frd = 0.0
    for _ in range(1000):
        A = conftest.random_h3(gen)
        lhs, rhs = h3_adjoint(h3_adjoint(A)), h3_det(A) * A
        scale = max(np.abs(rhs.off).max(), np.abs(rhs.alpha).max(), 1.0)
        frd = max(frd, np.abs(lhs.off - rhs.off).max() / scale, np.abs(lhs.alpha - rhs.alpha).max() / scale)

    sc = 0.0
    for i in range(1000):
        x, y = a[i], b[i]
        full = omul(x, oconj(np.conj(y))) + omul(np.conj(y), oconj(x))
        sc = max(sc, np.abs(full[1:]).max() / (np.abs(x).max() * np.abs(y).max()))
        scalar_product(Octonion(x), Octonion(y))
    dt = time.perf_counter() - t0
    ok = alt <= 1e-12 and mult <= 1e-12 and frd <= 1e-10 and sc <= 1e-12 and dt <= 10
    record(10, ok, f"octonion kernel: alternativity {alt:.1e} (1e-12), norm multiplicativity {mult:.1e} "
                   f"(1e-12), Freudenthal {frd:.1e} (1e-10), scalarity {sc:.1e} (1e-12), {dt:.1f}s (<= 10s)")
    assert ok


def _mask_time(data: bytes) -> bytes:
    return re.sub(rb'"wall_time": [^,\n}]+', b'"wall_time": 0', data)


def test_c11_determinism():
    if not RUNS:
        # run alone: fill in a cheap subset so the rerun has something to compare
        run(11, CheckRun("psh", "I:2,2", samples=50))
        run(11, CheckRun("invariance", "IV:4", samples=50))
        run(11, CheckRun("section", "I:1,1", samples=20, extra={"section": "antiholo", "sections": 2}))
    total, diffs = 0, []
    for n, items in sorted(RUNS.items()):
        for cfg, data in items:
            total += 1
            again = emit_report(run_check(cfg))
            if _mask_time(again) != _mask_time(data):
                diffs.append(f"{n}:{cfg.check_id}:{cfg.domain}")
    ok = not diffs
    record(11, ok, f"reran {total} CheckRuns from criteria {sorted(RUNS)}: "
                   f"{total - len(diffs)} byte-identical modulo wall_time"
                   + (f"; differ: {', '.join(diffs)}" if diffs else ""))
    assert ok
