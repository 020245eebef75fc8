import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rand_herm
from sepeig.linalg import BipartiteOperator, DimensionError, expectation, partial_transpose
from sepeig.solver import SolverConfig, f_ab
from sepeig.states import bell_phi, random_separable, tiles_upb_projector, tiles_upb_state, werner
from sepeig.witness import (
    DECISION_THRESHOLD,
    Kind,
    Verdict,
    bound_check,
    build_witness,
    npt_check,
    random_positive_operator,
    test_lower as lower_test,
    test_upper as upper_test,
    validate_partial_positive,
)


def test_build_witness_bell(bell_proj):
    w = build_witness(bell_proj)
    assert w.f_value == pytest.approx(0.5)
    assert np.allclose(w.op.matrix, 0.5 * np.eye(4) - bell_proj.matrix)
    assert w.op.eigvalsh()[0] == pytest.approx(-0.5)


def test_build_witness_shift_invariant(rng, fast_cfg):
    op = rand_herm(2, 2, rng)
    w1 = build_witness(op, fast_cfg)
    w2 = build_witness(op + 2.0, fast_cfg)
    assert np.allclose(w1.op.matrix, w2.op.matrix, atol=1e-8)


def test_upper_bell(bell_proj, bell_rho):
    v = upper_test(bell_rho, bell_proj)
    assert v.kind is Kind.ENTANGLED and v.detected
    assert v.margin == pytest.approx(0.5)
    assert v.to_dict()["kind"] == "Entangled"


def test_upper_product_not_detected(bell_proj, product_rho):
    v = upper_test(product_rho, bell_proj)
    assert v.kind is Kind.NOT_DETECTED and not v.detected
    assert v.margin <= 0


def test_upper_accepts_pure_state_and_witness(bell_proj):
    w = build_witness(bell_proj)
    v = upper_test(bell_phi(), w)
    assert v.witness_used is w and v.margin == pytest.approx(0.5)


def test_margin_is_minus_witness_expectation(rng, fast_cfg):
    rho = random_separable((2, 3), 3, seed=4)
    op = rand_herm(2, 3, rng)
    v = upper_test(rho, op, fast_cfg)
    assert v.margin == pytest.approx(-expectation(v.witness_used.op, rho), abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3 - 1e-3, 1 / 3 + 1e-3, 0.5, 0.9, 1.0])
def test_werner_upper_agrees_with_npt(p):
    rho = werner(p)
    A = BipartiteOperator.projector([1, 0, 0, 1], 2, 2)
    v = upper_test(rho, A)
    assert v.margin == pytest.approx((1 + 3 * p) / 4 - 0.5, abs=1e-12)
    n = npt_check(rho)
    assert (v.kind is Kind.ENTANGLED) == (n.kind is Kind.NPT) == (p > 1 / 3)


def test_lower_is_upper_of_negation(rng, fast_cfg):
    rho = random_separable((2, 2), 2, seed=9)
    op = rand_herm(2, 2, rng)
    lo = lower_test(rho, op, fast_cfg)
    up = upper_test(rho, -op, fast_cfg)
    assert lo.kind is up.kind and lo.margin == up.margin


def test_lower_detects_npt_state():
    rho = werner(0.8)
    n = npt_check(rho)
    A = n.witness_used.op  # (v v^dagger)^PT
    v = lower_test(rho, A)
    assert v.kind is Kind.ENTANGLED
    assert v.margin == pytest.approx(-(1 - 3 * 0.8) / 4, abs=1e-9)


def test_dimension_mismatch(bell_rho):
    with pytest.raises(DimensionError):
        upper_test(bell_rho, BipartiteOperator.identity(2, 3))


def test_solver_failure_is_inconclusive(rng, bell_rho):
    v = upper_test(bell_rho, rand_herm(2, 2, rng), SolverConfig(starts=2, max_iter=1))
    assert v.kind is Kind.INCONCLUSIVE and np.isnan(v.margin)
    assert "solver failure" in v.detail


def test_entangled_verdict_needs_margin():
    with pytest.raises(ValueError):
        Verdict(Kind.ENTANGLED, DECISION_THRESHOLD / 2)


# NPT


def test_npt_bell(bell_rho):
    v = npt_check(bell_rho)
    assert v.kind is Kind.NPT and v.margin == pytest.approx(0.5)
    assert np.allclose(np.sort(partial_transpose(bell_rho.op).eigvalsh()), [-0.5, 0.5, 0.5, 0.5])


@pytest.mark.parametrize("p", np.linspace(0, 1, 11))
def test_npt_werner_eigenvalue(p):
    v = npt_check(werner(p))
    lam = (1 - 3 * p) / 4
    if lam < -1e-10:
        assert v.kind is Kind.NPT and v.margin == pytest.approx(-lam, abs=1e-12)
    else:
        assert v.kind is Kind.PPT and v.margin == pytest.approx(lam, abs=1e-12)


def test_npt_witness_is_valid():
    w = npt_check(werner(1.0)).witness_used.op
    # (v v^dagger)^PT is nonnegative on every product state
    assert f_ab(-w) <= 1e-12


# bound entanglement


def test_tiles_state_is_ppt():
    rho = tiles_upb_state()
    assert npt_check(rho).kind is Kind.PPT
    assert expectation(tiles_upb_projector(), rho) == pytest.approx(0, abs=1e-14)


def test_bound_check_tiles_with_projector_candidate():
    cand = partial_transpose(tiles_upb_projector())
    v = bound_check(tiles_upb_state(), [cand], SolverConfig(starts=32, seed=3))
    assert v.kind is Kind.BOUND_ENTANGLED and v.detected
    assert v.margin > 1e-3
    # the witness is (C^PT - inf g(C)) and it is negative on the state
    assert expectation(v.witness_used.op, tiles_upb_state()) < 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bound_check_separable_inconclusive(seed):
    rho = random_separable((3, 3), 4, seed=seed)
    v = bound_check(rho, cfg=SolverConfig(starts=8, seed=seed), random_candidates=100)
    assert v.kind is Kind.INCONCLUSIVE
    assert v.margin <= 1e-8


def test_bound_check_rejects_npt(bell_rho):
    with pytest.raises(ValueError, match="npt_check"):
        bound_check(bell_rho, random_candidates=1)


def test_bound_check_rejects_non_psd_candidate():
    with pytest.raises(ValueError):
        bound_check(tiles_upb_state(), [BipartiteOperator.identity(3, 3) * -1.0])


def test_random_positive_operator_reproducible():
    a = random_positive_operator(tiles_upb_state().dims, 5, 17)
    b = random_positive_operator(tiles_upb_state().dims, 5, 17)
    assert np.array_equal(a.matrix, b.matrix)
    assert a.trace() == pytest.approx(1)
    assert a.eigvalsh()[0] >= -1e-12


# partial positivity


def test_validate_bell_witness(bell_proj):
    rep = validate_partial_positive(build_witness(bell_proj).op, samples=200)
    assert rep.ok
    assert rep.spectral_norm == pytest.approx(0.5)
    assert rep.f_negated == pytest.approx(0, abs=1e-12)


def test_validate_identity_and_minus_identity():
    one = BipartiteOperator.identity(2, 2)
    rep = validate_partial_positive(one, samples=50)
    assert rep.ok and rep.spectral_norm == pytest.approx(1)
    bad = validate_partial_positive(one * -1.0, samples=50)
    assert not bad.ok and bad.violations


# properties


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), terms=st.integers(1, 6), gamma=st.floats(0.1, 10))
def test_soundness_on_separable_states(seed, terms, gamma):
    rho = random_separable((2, 2), terms, seed=seed)
    op = rand_herm(2, 2, np.random.default_rng(seed))
    cfg = SolverConfig(starts=16, seed=seed)
    v = upper_test(rho, op, cfg)
    assert v.kind is Kind.NOT_DETECTED
    assert v.margin <= 1e-9
    scaled = upper_test(rho, op * gamma + 1.5, cfg)
    assert scaled.margin == pytest.approx(gamma * v.margin, abs=1e-7)
