import itertools
import random

import pytest

from chlam import (
    App,
    FuelExhausted,
    Lam,
    Normal,
    NotApplicable,
    Var,
    choose_K,
    classic_separate,
    find_difference,
    interaction_bohm_out,
    parse_context,
    parse_term,
    selector,
    separate_terms,
    tuple_term,
    tupler,
    verify_separation,
)
from chlam.bohm import DiffWitness, SpineArityMismatch
from chlam.harness import GenConfig, gen_terms
from chlam.reduction import head_step_ordinary
from chlam.syntax import BVar, NApp, NHole, NLam, hole_count, print_context, wash

I = parse_term("I")
ONE = parse_term(r"\x y. x y")
K = parse_term("K")
F = parse_term("F")
OM = parse_term("Om")
T5 = parse_term(r"\x y. x (x Om y) Om")
U5 = parse_term(r"\x y. x (x y Om) Om")


def head_reaches(t, target, fuel=400):
    state = t
    for _ in range(fuel):
        if state == target:
            return True
        state = head_step_ordinary(state)
        if state is None:
            return False
    return state == target


def test_selector_one_is_identity():
    assert selector(1, 1) == I


def test_selector_rejects_bad_index():
    with pytest.raises(ValueError):
        selector(2, 3)
    with pytest.raises(ValueError):
        selector(2, 0)


def test_empty_tuple_is_identity():
    assert tuple_term([]) == Lam(BVar(0))


def test_tupler_selector_extraction():
    t1, t2 = K, F
    probe = App(App(App(tupler(2), t1), t2), selector(2, 2))
    assert head_reaches(probe, t2)


def test_extraction_property_to_width_five():
    rng = random.Random(17)
    gen = gen_terms(GenConfig(seed=18, max_size=7, closed=True))
    for n in range(1, 6):
        for i in range(1, n + 1):
            args = [wash(next(gen)) for _ in range(n)]
            probe = tupler(n)
            for a in args:
                probe = App(probe, a)
            probe = App(probe, selector(n, i))
            assert head_reaches(probe, args[i - 1]), (n, i)


def test_interaction_bohm_out_identity_pair():
    w = find_difference(I, ONE, 5, 200)
    res = interaction_bohm_out(I, ONE, w, 500)
    left, right = res.transcript
    assert isinstance(left, Normal) and isinstance(right, Normal)
    assert (left.k, right.k) == (1, 2)
    assert res.verified_gap == 1
    # stability: the same gap for K+1
    res2 = interaction_bohm_out(I, ONE, w, 500, K=res.K + 1)
    assert res2.verified_gap == 1


def test_interaction_bohm_out_free_head_base_case():
    t, u = Var("x"), parse_term(r"\y. x y")
    w = find_difference(t, u, 5, 200)
    res = interaction_bohm_out(t, u, w, 500)
    left, right = res.transcript
    assert (left.k, right.k) == (0, 1)
    # the capturing prefix substitutes the tupler for the free variable
    assert print_context(res.context).startswith("(\\x. [])")


def test_interaction_bohm_out_bound_head_base_case():
    t, u = parse_term(r"\x. x"), parse_term(r"\x z. x z")
    w = find_difference(t, u, 5, 200)
    res = interaction_bohm_out(t, u, w, 500)
    left, right = res.transcript
    assert (left.k, right.k) == (1, 2)


def test_interaction_bohm_out_deep_path():
    # the gap sits one level down; shared prefix interactions must agree
    t = parse_term(r"\z. z I")
    u = parse_term(r"\z. z (\x y. x y)")
    w = find_difference(t, u, 5, 200)
    assert w.path == (1,)
    res = interaction_bohm_out(t, u, w, 800)
    left, right = res.transcript
    assert right.k - left.k == 1


def test_interaction_bohm_out_rejects_wrong_kind():
    w = find_difference(K, F, 5, 200)
    with pytest.raises(NotApplicable):
        interaction_bohm_out(K, F, w, 500)


def test_interaction_bohm_out_rejects_non_eta_gap():
    # same head, binder gap without matching argument gap: outside the regime
    t = parse_term(r"\x. y")
    u = Var("y")
    w = DiffWitness((), SpineArityMismatch(1, "left"), None, None)
    with pytest.raises(NotApplicable):
        interaction_bohm_out(t, u, w, 500)


def test_classic_separation_section5_example():
    w = find_difference(T5, U5, 5, 400)
    res = classic_separate(T5, U5, w, 1000)
    assert res is not None
    left, right = res.transcript
    assert isinstance(left, Normal) and isinstance(right, FuelExhausted)


def test_classic_separation_divergence_at_root():
    w = find_difference(I, OM, 5, 200)
    res = classic_separate(I, OM, w, 400)
    assert res is not None
    assert res.context == NHole()
    left, right = res.transcript
    assert isinstance(left, Normal) and isinstance(right, FuelExhausted)


def brute_force_separates(t, u, fuel=300):
    """Small-context oracle: does some [] a b separate by termination?"""
    pool = [I, OM, tupler(2), selector(2, 1), selector(2, 2)]
    for a, b in itertools.product(pool, repeat=2):
        ctx = NApp(None, NApp(None, NHole(), _named(a)), _named(b))
        left, right = verify_separation(ctx, t, u, fuel)
        if isinstance(left, Normal) != isinstance(right, Normal):
            return True
    return False


def _named(t):
    from chlam.syntax import to_named

    return to_named(t)


def test_classic_separation_projections():
    assert brute_force_separates(K, F)  # oracle: small contexts already separate
    w = find_difference(K, F, 5, 200)
    res = classic_separate(K, F, w, 400)
    assert res is not None
    left, right = res.transcript
    assert isinstance(left, Normal) and isinstance(right, FuelExhausted)


def test_classic_separation_free_head_mismatch():
    t = parse_term(r"\x. y x")
    u = parse_term(r"\x. z x")
    w = find_difference(t, u, 5, 200)
    res = classic_separate(t, u, w, 500)
    assert res is not None
    left, right = res.transcript
    assert isinstance(left, Normal) and isinstance(right, FuelExhausted)


def test_classic_separation_deep_head_mismatch():
    t = parse_term(r"\a. a (\b. b K)")
    u = parse_term(r"\a. a (\b. b F)")
    w = find_difference(t, u, 5, 300)
    assert w.path == (1, 1)
    res = classic_separate(t, u, w, 800)
    assert res is not None
    left, right = res.transcript
    assert isinstance(left, Normal) and isinstance(right, FuelExhausted)


def test_classic_separation_reports_collision_as_absent():
    # the differing head also heads a prefix node: the tupler role collides
    t = parse_term(r"\x. x (x K)")
    u = parse_term(r"\x. x (y K)")
    w = find_difference(t, u, 6, 300)
    if w is not None and w.path:
        res = classic_separate(t, u, w, 500)
        assert res is None or isinstance(res.transcript[0], Normal)


def test_choose_K_examples():
    w_path = find_difference(I, ONE, 5, 200).path
    assert choose_K(I, ONE, w_path, 200) >= 1
    assert choose_K(K, K, (), 200) >= 1  # identical terms: still well-defined
    assert choose_K(T5, U5, (1, 2), 400) >= 2


def test_verify_separation_counts():
    ctx = parse_context("[] z w")
    left, right = verify_separation(ctx, I, ONE, 100)
    assert (left.k, right.k) == (1, 2)
    same_l, same_r = verify_separation(parse_context("[]"), K, K, 100)
    assert same_l == same_r


def test_verify_separation_section5_context():
    ctx = parse_context("[] T2 I P2_1 P2_2")
    left, right = verify_separation(ctx, T5, U5, 1000)
    assert isinstance(left, Normal) and isinstance(right, FuelExhausted)


def test_emitted_contexts_are_ordinary_with_one_hole():
    for t, u in [(I, ONE), (T5, U5), (I, OM), (K, F)]:
        res = separate_terms(t, u, 5, 1000)
        assert res is not None
        assert hole_count(res.context) == 1
        _assert_ordinary(res.context)


def _assert_ordinary(ctx):
    match ctx:
        case NHole():
            return
        case NLam(p, _, body):
            assert p is None
            _assert_ordinary(body)
        case NApp(p, fun, arg):
            assert p is None
            _assert_ordinary(fun)
            _assert_ordinary(arg)
        case _:
            return


def test_soundness_on_random_eta_pads():
    # pad random head-normalizing terms with a trailing eta expansion and
    # check the constructed context verifies with the predicted gap
    rng = random.Random(33)
    gen = gen_terms(GenConfig(seed=34, max_size=8, closed=True))
    done = 0
    while done < 25:
        base = wash(next(gen))
        from chlam.reduction import evaluate_head_ordinary

        out = evaluate_head_ordinary(base, 200)
        if not isinstance(out, Normal):
            continue
        pad = rng.randint(1, 2)
        expanded = _eta_pad(base, pad)
        w = find_difference(base, expanded, 6, 400)
        if w is None or not isinstance(w.kind, SpineArityMismatch):
            continue
        try:
            res = interaction_bohm_out(base, expanded, w, 3000)
        except NotApplicable:
            continue
        done += 1
        left, right = res.transcript
        assert abs(right.k - left.k) == w.kind.extra


def _eta_pad(t, m):
    names = [f"e{i}" for i in range(m)]
    body = t
    for nm in names:
        body = App(body, Var(nm))
    from chlam.syntax import lam

    for nm in reversed(names):
        body = lam(nm, body)
    return body
