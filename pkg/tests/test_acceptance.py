"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are printed in the pytest terminal summary and also when this
file is executed directly (``python tests/test_acceptance.py``).
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, WEIGHT_SPECS, random_vector
from garling.asymptotics import (
    select_lp_subsequence,
    symmetry_defect,
    verify_factorization,
)
from garling.norms import (
    garling_norm,
    garling_norm_oracle,
    is_minimal,
    lorentz_norm,
    lp_norm,
    minimal_predecessor,
    weak_lorentz_quasinorm,
)
from garling.operators import IncreasingMap, apply_signs, extract, project, spread
from garling.sequences import FiniteSequence, SignPattern, dyadic_blocks
from garling.weights import conjugate, diagnostics, eq2_sum, make_weight


def report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# helpers shared with the unit tests -------------------------------------------
def exhaustive_non_minimal(f: FiniteSequence, w, p: float, tol: float = 1e-9) -> bool:
    """Definition of non-minimality: some proper subset of the support keeps
    the norm.  All 2^N selection sums, then a subset-max transform."""
    n = f.size
    mags = np.abs(f.coefs) ** p
    wv = np.asarray(w.values(n))
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    slot = np.cumsum(bits, axis=1) - 1
    sums = np.where(bits == 1, mags * wv[np.maximum(slot, 0)], 0.0).sum(axis=1)
    best = sums.copy()
    for i in range(n):
        has = (masks >> i) & 1 == 1
        best[has] = np.maximum(best[has], best[masks[has] ^ (1 << i)])
    full = best[-1] ** (1 / p)
    proper = best[:-1] ** (1 / p)
    return bool(np.any(proper >= full * (1 - tol)))


def lorentz_bruteforce(f: FiniteSequence, w, p: float) -> float:
    """Maximum over all bijections of the support onto the first N slots."""
    n = f.size
    mags = np.abs(f.coefs) ** p
    wv = np.asarray(w.values(n))
    perms = np.array(list(itertools.permutations(range(n))))
    return float(np.max((mags[perms] * wv).sum(axis=1)) ** (1 / p))


# criteria ----------------------------------------------------------------------
def test_criterion_01_oracle_equivalence():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst, count = 0.0, 0
    for spec in WEIGHT_SPECS:
        w = make_weight(spec)
        for p in (1.0, 1.5, 2.0):
            for _ in range(500):
                f = random_vector(rng, max_support=12, max_index=40)
                worst = max(worst, rel_err(garling_norm(f, w, p).value, garling_norm_oracle(f, w, p)))
                count += 1
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-12 and elapsed < 10,
           f"{count} vectors, max rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_constant_coefficients():
    rng = np.random.default_rng(2)
    worst, non_minimal = 0.0, 0
    for spec in WEIGHT_SPECS:
        w = make_weight(spec)
        for p in (1.0, 2.0):
            for _ in range(100):
                size = int(rng.integers(1, 40))
                A = rng.choice(np.arange(1, 200), size=size, replace=False)
                f = FiniteSequence.indicator(A)
                expected = w.prefix_sum(size) ** (1 / p)
                worst = max(worst, rel_err(garling_norm(f, w, p).value, expected))
                non_minimal += not is_minimal(f, w, p)[0]
                if size <= 10:
                    non_minimal += exhaustive_non_minimal(f, w, p)
    report(2, worst <= 1e-12 and non_minimal == 0,
           f"max rel err {worst:.2e}, non-minimal indicators {non_minimal}")


def test_criterion_03_embedding_chain():
    rng = np.random.default_rng(3)
    chain_weights = [make_weight(s) for s in ("pow:a=0.5", "pow:a=0.25", "pow:a=0.75")]
    slack, bad = 1e-12, 0
    for t in range(1000):
        w = chain_weights[t % 3]
        p = (1.0, 1.5, 2.0)[(t // 3) % 3]
        f = random_vector(rng, max_support=15, max_index=60, complex_ok=True)
        dinf = weak_lorentz_quasinorm(f, w, p)
        g = garling_norm(f, w, p).value
        d = lorentz_norm(f, w, p).value
        lp = lp_norm(f, p)
        scale = lp * slack
        bad += not (dinf <= g + scale and g <= d + scale and d <= lp + scale)
    lorentz_bad = 0
    for t in range(300):
        w = make_weight(WEIGHT_SPECS[t % 3])
        p = (1.0, 1.5, 2.0)[(t // 3) % 3]
        f = random_vector(rng, max_support=7, max_index=20)
        lorentz_bad += rel_err(lorentz_norm(f, w, p).value, lorentz_bruteforce(f, w, p)) > 1e-12
    report(3, bad == 0 and lorentz_bad == 0,
           f"chain violations {bad}/1000, Lorentz oracle mismatches {lorentz_bad}/300")


def test_criterion_04_operator_contracts():
    rng = np.random.default_rng(4)
    iso, contr, signs, inverse = 0, 0, 0, 0
    for t in range(300):
        w = make_weight(WEIGHT_SPECS[t % 3])
        p = (1.0, 1.5, 2.0)[(t // 3) % 3]
        f = random_vector(rng, max_support=12, max_index=30, complex_ok=True)
        kind = t % 4
        if kind == 0:
            phi = IncreasingMap.affine(int(rng.integers(1, 4)), int(rng.integers(0, 5)))
        elif kind == 1:
            phi = IncreasingMap.power(int(rng.integers(1, 3)))
        elif kind == 2:
            phi = IncreasingMap.explicit(np.sort(rng.choice(np.arange(1, 200), 30, replace=False)))
        else:
            phi = IncreasingMap.dyadic()
            f = FiniteSequence(f.indices[f.indices <= 40], f.coefs[f.indices <= 40])
        base = garling_norm(f, w, p).value
        s = spread(phi, f)
        iso += rel_err(garling_norm(s, w, p).value, base) > 1e-12
        inverse += extract(phi, s) != f
        contr += garling_norm(extract(phi, f), w, p).value > base * (1 + 1e-12)
        A = rng.choice(np.arange(1, 31), size=int(rng.integers(0, 30)), replace=False)
        contr += garling_norm(project(A, f), w, p).value > base * (1 + 1e-12)
        eps = SignPattern({int(i): complex(np.exp(1j * rng.uniform(0, 2 * np.pi)))
                           if t % 2 else float(rng.choice([-1.0, 1.0])) for i in f.indices})
        signs += rel_err(garling_norm(apply_signs(eps, f), w, p).value, base) > 1e-12
    report(4, iso == contr == signs == inverse == 0,
           f"isometry {iso}, contraction {contr}, signs {signs}, extract-spread {inverse} failures of 300")


def test_criterion_05_minimality_equivalence():
    rng = np.random.default_rng(5)
    disagree, bad_pred = 0, 0
    for t in range(200):
        w = make_weight(WEIGHT_SPECS[t % 3])
        p = (1.0, 1.5, 2.0)[(t // 3) % 3]
        f = random_vector(rng, max_support=10, max_index=25)
        if t % 5 == 0:
            # late dominant coefficient: the classic non-minimal shape
            f = FiniteSequence(f.indices, np.where(f.indices == f.last, 10.0, f.coefs))
        single = is_minimal(f, w, p)[0]
        disagree += single == exhaustive_non_minimal(f, w, p)
        g = minimal_predecessor(f, w, p)
        full = garling_norm(f, w, p).value
        bad_pred += (not is_minimal(g, w, p)[0]) or rel_err(garling_norm(g, w, p).value, full) > 1e-9
    report(5, disagree == 0 and bad_pred == 0,
           f"disagreements {disagree}/200, bad predecessors {bad_pred}/200")


def test_criterion_06_symmetry_defect():
    w = make_weight("pow:a=0.5")
    start = time.perf_counter()
    rows = symmetry_defect(w, 1.0, [16, 64, 256, 1024, 4096])
    elapsed = time.perf_counter() - start
    harmonic_ok = all(rel_err(r.norm_f, math.fsum(1 / n for n in range(1, r.r + 1))) <= 1e-12
                      for r in rows)
    rev = [r.norm_g_rev for r in rows]
    rev_ok = max(rev) <= 3.5 and all(b >= a for a, b in zip(rev, rev[1:]))
    ratio = rows[-1].defect / rows[0].defect
    lorentz_ok = all(rel_err(r.lorentz_rev, r.lorentz_common) <= 1e-12 for r in rows)
    report(6, harmonic_ok and rev_ok and ratio >= 2 and lorentz_ok and elapsed < 5,
           f"H_4096 = {rows[-1].harmonic:.10f}, ||g^(r)|| max {max(rev):.4f}, "
           f"defect ratio {ratio:.3f}, {elapsed:.2f}s")


def test_criterion_07_lp_selection():
    w = make_weight("pow:a=0.5")
    trace = select_lp_subsequence(dyadic_blocks(w, 1.0), w, 1.0, epsilon=3.0, budget=1e9)
    rep = verify_factorization(trace, w, 1.0, trials=100, rng_seed=7)
    A_ok = all(s.A_k >= 0.25 for s in trace.steps)
    report(7, trace.K >= 2 and A_ok and rep.passed,
           f"K={trace.K} ({trace.stop_reason}), A_k={[round(s.A_k, 6) for s in trace.steps]}, "
           f"S error {rep.max_s_error:.1e}, norm range [{rep.min_ratio:.4f}, {rep.max_ratio:.4f}], "
           f"violations {rep.upper_violations + rep.lower_violations}")


def test_criterion_08_weight_taxonomy():
    specs = ["pow:a=0", "pow:a=0.25", "pow:a=0.5", "pow:a=0.75", "pow:a=1",
             "logpow:a=0.5,b=1", "logpow:a=0.25,b=-1", "logpow:a=1,b=2"]
    horizon = 10_000
    inv_err, cross_err = 0.0, 0.0
    for spec in specs:
        w = make_weight(spec)
        vals = np.asarray(w.values(horizon))
        back = np.asarray(conjugate(conjugate(w, horizon), horizon).values(horizon))
        inv_err = max(inv_err, float(np.max(np.abs(back - vals) / vals)))
        cvals = np.asarray(conjugate(w, horizon).values(horizon))
        for m in [1 << j for j in range(14) if (1 << j) <= horizon] + [horizon]:
            cross_err = max(cross_err, rel_err(eq2_sum(cvals, m), eq2_sum(vals, m)))
    d = diagnostics(make_weight("pow:a=0.5"), 4096)
    stats_ok = d.reg_sup <= 2 and d.conj_reg_sup <= 2 and d.eq2_sup <= 3.5
    report(8, inv_err <= 1e-15 and cross_err <= 1e-12 and stats_ok,
           f"involution err {inv_err:.1e}, cross-identity err {cross_err:.1e}, "
           f"reg {d.reg_sup:.4f}, conj_reg {d.conj_reg_sup:.4f}, eq2 {d.eq2_sup:.4f}")


def test_criterion_09_non_isometry_witness():
    w = make_weight("pow:a=0.5")
    f = FiniteSequence([1, 2], [0.2, 1.0])
    g = garling_norm(f, w, 1.0).value
    d = lorentz_norm(f, w, 1.0).value
    expected_d = 1 + 0.2 / math.sqrt(2)
    report(9, abs(g - 1) <= 1e-12 and abs(d - expected_d) <= 1e-12,
           f"garling {g!r}, lorentz {d!r} (expected {expected_d!r})")


def test_criterion_10_cli_determinism():
    commands = [
        ["oracle-check", "--weight", "logpow:a=0.5,b=1", "--p", "1.5", "--trials", "200", "--seed", "42"],
        ["defect", "--weight", "pow:a=0.5", "--p", "1", "--r", "16,64,256", "--format", "csv"],
        ["defect", "--weight", "pow:a=0.25", "--p", "2", "--r", "16,64,256"],
    ]
    identical, codes = 0, []
    for cmd in commands:
        outs = [subprocess.run([sys.executable, "-m", "garling", *cmd], capture_output=True, check=False)
                for _ in range(2)]
        codes.extend(o.returncode for o in outs)
        identical += outs[0].stdout == outs[1].stdout and len(outs[0].stdout) > 0
    report(10, identical == len(commands) and set(codes) == {0},
           f"{identical}/{len(commands)} commands byte-identical, exit codes {sorted(set(codes))}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
