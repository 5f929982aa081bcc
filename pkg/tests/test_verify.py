import json

import numpy as np
import pytest

from conftest import fld
from lulu_dpt import lulu
from lulu_dpt.lattice import DOMAIN_ONLY, FULL, Lattice
from lulu_dpt.lulu import L, Negate, U, parse_expr, q_n
from lulu_dpt.verify import (
    ASSERTIONS,
    FAIL,
    INAPPLICABLE,
    PASS,
    SuiteConfig,
    brute_extremal_sets,
    check_lemma_a,
    check_lemma_b,
    generate_preconditioned,
    run_suite,
)


def ids(rep):
    return {a["id"] for a in rep.assertions}


def test_generate_preconditioned_n1_is_raw_draw():
    lat = Lattice((3, 4))
    f = generate_preconditioned(lat, 1, seed=4)
    raw = np.random.default_rng(4).integers(0, 8, size=(3, 4))
    assert f.values.tolist() == raw.tolist()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_generate_preconditioned_clean(n):
    for seed in range(20):
        lat = Lattice((4, 4), FULL if seed % 2 else "facet", DOMAIN_ONLY if seed % 3 else "zero_padded")
        f = generate_preconditioned(lat, n, seed)
        assert not brute_extremal_sets(f, n - 1)


def test_preconditioning_examples():
    assert q_n(fld([-3, 0, 5]), 1).values.tolist() == [0, 0, 0]
    assert q_n(fld([0, 4, 4, 2, 0]), 1).values.tolist() == [0, 4, 4, 2, 0]
    # in domain_only both end zeros are size-1 minima
    f = fld([0, 4, 4, 2, 0], DOMAIN_ONLY)
    assert brute_extremal_sets(f, 1)
    assert not brute_extremal_sets(q_n(f, 1), 1)


def test_lemma_a_examples():
    rep = check_lemma_a(fld([-3, 0, 5]), 1)
    assert rep.verdict == PASS
    rep = check_lemma_a(fld([4, 4, 2]), 2)
    assert rep.verdict == PASS
    rep = check_lemma_a(fld(np.zeros((3, 3), dtype=int)), 2)
    assert rep.verdict == PASS
    assert {"a.eq1", "a.eq2", "a.eq3", "a.eq4", "a.eq4_strong", "a.min_witness"} <= ids(rep)


def test_lemma_a_detects_fault():
    rep = check_lemma_a(fld([-3, 0, 5]), 1, faulty=True)
    assert rep.verdict == FAIL
    failed = {a["id"] for a in rep.failures}
    assert "a.piecewise_U" in failed
    assert all(a["witness"] is not None for a in rep.failures)


def test_lemma_a_flags_missing_precondition():
    rep = check_lemma_a(fld([0, 5, 0, 0]), 2)
    assert "a.precondition" in {a["id"] for a in rep.failures}


def test_lemma_b_examples():
    f = fld([-3, 0, 5])
    rep = check_lemma_b(f, 1, lulu.Identity())
    assert rep.verdict == PASS
    # U_1(f - U_1 f) = U_1([-3, 0, 0]) = 0 = U_1 f - U_1 f
    assert lulu.u_n_fast(f - lulu.u_n_fast(f, 1), 1).values.tolist() == [0, 0, 0]

    rep = check_lemma_b(f, 1, L(1))
    assert rep.verdict == PASS
    g = f - L(1)(lulu.u_n_fast(f, 1))
    assert lulu.u_n_fast(g, 1).values.tolist() == [0, 0, 5]


def test_lemma_b_random_u2l2():
    A = U(2) @ L(2)
    for n in (1, 2, 3):
        for seed in range(30):
            lat = Lattice((5, 5)) if seed % 2 else Lattice((9,), boundary=DOMAIN_ONLY)
            f = generate_preconditioned(lat, n, [seed, n], lo=-2, hi=6)
            rep = check_lemma_b(f, n, A)
            assert rep.verdict == PASS, rep.failures


def test_negation_is_inapplicable():
    rep = check_lemma_b(fld([-3, 0, 5]), 1, Negate())
    assert rep.verdict == INAPPLICABLE
    assert rep.assertions[-1]["id"] == "b.ftp"


def test_assertion_ids_documented():
    rep = check_lemma_b(fld([1, 3, 0, 4, 2]), 1, parse_expr("L1.U1"))
    rep2 = check_lemma_a(fld([1, 3, 0, 4, 2]), 1)
    assert (ids(rep) | ids(rep2)) <= set(ASSERTIONS)


def test_empty_config_runs_nothing():
    rep = run_suite(SuiteConfig())
    assert rep["totals"]["assertions"] == 0 and rep["totals"]["trials"] == 0
    assert rep["verdict"] == PASS


def test_default_suite_passes():
    rep = run_suite(SuiteConfig.default())
    assert rep["verdict"] == PASS
    assert rep["totals"]["failures"] == 0
    assert rep["totals"]["assertions"] >= 2000
    assert rep["totals"]["inapplicable_trials"] == 0
    for aid in ("a.eq1", "a.eq2", "a.eq3", "a.eq4", "a.eq4_strong", "a.min_witness",
                "a.piecewise_U", "a.piecewise_LU", "b.split_U", "b.constancy_U",
                "b.residual_U", "b.identity_U", "b.identity_L"):
        assert rep["by_assertion"][aid]["pass"] > 0


def test_broken_operator_gated_not_failed():
    cfg = SuiteConfig.parse(
        "seed = 3\ntrials = 12\nn_values = 1, 2\nshapes = 3x4, 7\nvalue_range = -2:5\noperators = neg, L1.U1\n"
    )
    rep = run_suite(cfg)
    assert rep["verdict"] == PASS
    assert rep["totals"]["inapplicable_trials"] > 0
    assert rep["totals"]["failures"] == 0


def test_fault_injection_fails_suite():
    cfg = SuiteConfig.parse("trials = 10\nn_values = 1\nshapes = 8\ninject_fault = true\n")
    rep = run_suite(cfg)
    assert rep["verdict"] == FAIL
    assert rep["failed"] and rep["failed"][0]["assertions"][0]["witness"] is not None


def test_report_replayable():
    cfg = SuiteConfig.parse("seed = 9\ntrials = 6\nn_values = 2, 3\nshapes = 4x4\noperators = default\n")
    a = json.dumps(run_suite(cfg), sort_keys=True)
    b = json.dumps(run_suite(cfg), sort_keys=True)
    assert a == b


def test_failed_trial_replays():
    cfg = SuiteConfig.parse("seed = 1\ntrials = 10\nn_values = 1\nshapes = 8\ninject_fault = true\n")
    fail = run_suite(cfg)["failed"][0]
    lat = Lattice(**fail["lattice"])
    from lulu_dpt.field import ScalarField

    f = ScalarField(lat, fail["field"])
    assert check_lemma_a(f, fail["n"], faulty=True).verdict == FAIL
    assert generate_preconditioned(lat, fail["n"], fail["seed"], 0, 7) == f


def test_config_parse_errors():
    with pytest.raises(ValueError):
        SuiteConfig.parse("bogus = 1\n")
    with pytest.raises(ValueError):
        SuiteConfig.parse("trials\n")
    with pytest.raises(ValueError):
        SuiteConfig.parse("trials = many\n")
