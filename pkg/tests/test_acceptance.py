"""Acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line straight to the
terminal (also when output is captured) and then asserts.
"""

import math
import time

import numpy as np
import pytest

from sepeig.grid import GridSpec, grid_operator, nearest_grid_index, scan
from sepeig.linalg import Dims, partial_transpose
from sepeig.schmidt import schmidt
from sepeig.solver import SolverConfig, brute_force_extrema, check_proposition1, f_ab, solve_sepeig
from sepeig.states import (
    FockTruncation,
    bell_phi,
    embed_operator,
    random_hermitian,
    random_pure,
    random_separable,
    rho_mix,
    rho_mix_threshold,
    tiles_upb_projector,
    tiles_upb_state,
)
from sepeig.witness import Kind, bound_check, build_witness, npt_check, test_upper as upper_test

BUDGET_SEED = 0


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_01_bell_f_value(report):
    t0 = time.perf_counter()
    P = bell_phi().projector()
    analytic = f_ab(P)
    iterative = solve_sepeig(P, SolverConfig(seed=1), branches=("sup",)).sup_g
    dt = time.perf_counter() - t0
    ok = abs(analytic - 0.5) < 1e-9 and abs(iterative - 0.5) < 1e-9 and dt < 1
    report(1, ok, f"rank-one {analytic:.15f}, iterative {iterative:.15f}, {dt:.2f}s")


def test_02_rank_one_oracle(report):
    t0 = time.perf_counter()
    cfg = SolverConfig(starts=16, seed=2, interior=False)
    worst = 0.0
    n = 0
    for d, count in [(2, 67), (3, 67), (4, 66)]:
        for k in range(count):
            psi = random_pure((d, d), seed=1000 * d + k)
            sup = solve_sepeig(psi.projector(), cfg, branches=("sup",)).sup_g
            worst = max(worst, abs(sup - schmidt(psi).coefficients[0] ** 2))
            n += 1
    dt = time.perf_counter() - t0
    report(2, n == 200 and worst < 1e-8 and dt < 30, f"{n} states, max deviation {worst:.2e}, {dt:.1f}s")


def test_03_brute_force_agreement(report):
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(50):
        op = random_hermitian((2, 2), seed=3000 + k)
        spec = solve_sepeig(op, SolverConfig(seed=k))
        hi, lo = brute_force_extrema(op)
        worst = max(worst, abs(hi - spec.sup_g), abs(lo - spec.inf_g))
    dt = time.perf_counter() - t0
    report(3, worst < 1e-4 and dt < 120, f"50 operators, max |solver - oracle| {worst:.2e}, {dt:.1f}s")


def test_04_pt_invariance(report):
    worst = 0.0
    for d_a, d_b in [(2, 2), (3, 3)]:
        for k in range(50):
            op = random_hermitian((d_a, d_b), seed=4000 + 100 * d_a + k)
            cfg = SolverConfig(seed=k)
            worst = max(worst, abs(f_ab(partial_transpose(op), cfg) - f_ab(op, cfg)))
    report(4, worst < 1e-7, f"100 operators (2x2, 3x3), max |f(A^PT) - f(A)| {worst:.2e}")


def _flip_point(alpha, P, trunc, lo=0.01, hi=0.99, steps=30):
    """Bisection for the smallest eta with an Entangled verdict."""

    def detected(eta):
        return upper_test(rho_mix(alpha, alpha, eta, trunc), P).kind is Kind.ENTANGLED

    assert not detected(lo) and detected(hi)
    for _ in range(steps):
        mid = (lo + hi) / 2
        lo, hi = (lo, mid) if detected(mid) else (mid, hi)
    return (lo + hi) / 2


def test_05_coherent_mixture_threshold(report):
    t0 = time.perf_counter()
    trunc = FockTruncation(12)
    P = embed_operator(bell_phi().projector(), trunc.dim, trunc.dim)
    devs = []
    for a in (0.4, 0.6, 0.8):
        devs.append(abs(_flip_point(a, P, trunc) - rho_mix_threshold(a, a)))
    dt = time.perf_counter() - t0
    detail = ", ".join(f"{d:.1e}" for d in devs)
    report(5, max(devs) <= 0.002 and dt < 60, f"|flip - threshold| for alpha=beta=0.4/0.6/0.8: {detail}; {dt:.1f}s")


def test_06_soundness(report):
    t0 = time.perf_counter()
    detections = 0
    worst = -np.inf
    for dims in (Dims(2, 2), Dims(3, 3)):
        witnesses = [build_witness(random_hermitian(dims, seed=6000 + k), SolverConfig(seed=k)) for k in range(50)]
        for s in range(500):
            rho = random_separable(dims, 1 + s % dims.total, seed=60000 + 1000 * dims.d_a + s)
            for w in witnesses:
                v = upper_test(rho, w)
                detections += v.kind is Kind.ENTANGLED
                worst = max(worst, v.margin)
    dt = time.perf_counter() - t0
    report(6, detections == 0 and dt < 300, f"1000 states x 50 operators: {detections} Entangled, max margin {worst:.2e}, {dt:.1f}s")


def test_07_shift_scale_covariance(report):
    pairs = [(-2.0, 0.1), (-0.5, 0.7), (0.0, 1.0), (1.3, 2.5), (10.0, 50.0)]
    worst = 0.0
    for k in range(20):
        op = random_hermitian((2, 2) if k % 2 else (2, 3), seed=7000 + k)
        cfg = SolverConfig(starts=32, seed=k)
        base = f_ab(op, cfg)
        for kappa, gamma in pairs:
            worst = max(worst, abs(f_ab(op + kappa, cfg) - (base + kappa)))
            worst = max(worst, abs(f_ab(op * gamma, cfg) - gamma * base))
    report(7, worst < 1e-8, f"20 operators x 5 (kappa, gamma), max deviation {worst:.2e}")


def test_08_pair_structure(report):
    checked = failures = 0
    worst = 0.0
    for k in range(50):
        op = random_hermitian((2, 2) if k % 2 else (2, 3), seed=8000 + k)
        spec = solve_sepeig(op, SolverConfig(starts=32, seed=k))
        for pair in spec.pairs:
            rep = check_proposition1(op, pair, spec)
            checked += rep.checked_pairs
            failures += not rep.ok
            worst = max(worst, rep.cross_coefficient, rep.orthogonality)
    report(8, failures == 0, f"{checked} pair comparisons over 50 operators, {failures} failures, max violation {worst:.2e}")


def test_09_bound_entanglement_pipeline(report):
    rho = tiles_upb_state()
    lam = float(partial_transpose(rho.op).eigvalsh()[0])
    npt = npt_check(rho)
    seps = []
    for s in range(3):
        v = bound_check(random_separable((3, 3), 4, seed=9000 + s), cfg=SolverConfig(starts=16, seed=s), random_candidates=10**4)
        seps.append(v)
    sep_ok = all(v.kind is Kind.INCONCLUSIVE and v.margin <= 1e-8 for v in seps)
    # best effort, reported only
    search = bound_check(rho, cfg=SolverConfig(starts=16), random_candidates=10**4, seed=BUDGET_SEED)
    hinted = bound_check(rho, [partial_transpose(tiles_upb_projector())], SolverConfig(starts=32))
    ok = lam >= -1e-10 and npt.kind is Kind.PPT and sep_ok
    report(
        9,
        ok,
        f"tiles lambda_min(PT) {lam:.2e}, npt_check {npt.kind.value}; separable margins "
        f"{', '.join(f'{v.margin:.1e}' for v in seps)}; random search (10^4, seed {BUDGET_SEED}): "
        f"{search.kind.value} best {search.margin:.2e}; UPB-projector candidate: {hinted.kind.value} {hinted.margin:.3f}",
    )


def test_10_grid_scan(report):
    rho = bell_phi().density()
    # entries spanned by |0,1>, |1,0>: contains +-P for the Bell projector P
    support = ((1, 1), (1, 2), (2, 2))
    coarse = GridSpec(Dims(2, 2), 1.0, math.pi, support=support)
    fine = GridSpec(Dims(2, 2), 0.5, math.pi / 2, support=support)
    cfg = SolverConfig(starts=8, seed=10)
    rc, rf = scan(rho, coarse, cfg), scan(rho, fine, cfg)
    fine_hits = {r.index for r in rf.detections}
    lost = [r.index for r in rc.detections if nearest_grid_index(fine, grid_operator(coarse, r.index)) not in fine_hits]
    ok = bool(rc.detections) and rc.best_margin >= 0.4 and not lost and not rc.failures and not rf.failures
    report(
        10,
        ok,
        f"coarse {len(rc.detections)}/{coarse.count} detections (best {rc.best_margin:.3f}), "
        f"fine {len(rf.detections)}/{fine.count} (best {rf.best_margin:.3f}), lost {len(lost)}",
    )
