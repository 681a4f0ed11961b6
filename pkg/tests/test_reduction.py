import random

import pytest

from chlam import (
    App,
    BLACK,
    CApp,
    CLam,
    FuelExhausted,
    INTERACTION,
    Normal,
    SILENT,
    Var,
    WHITE,
    any_beta_steps,
    evaluate_head,
    evaluate_head_ordinary,
    evaluate_head_trace,
    head_decompose,
    head_step,
    head_step_ordinary,
    is_hnf,
    lift,
    parse_cterm,
    parse_term,
    plug,
    print_cterm,
    root_step,
    substitute,
    wash,
)
from chlam.harness import GenConfig, gen_ordinary_terms, gen_terms, joins
from chlam.syntax import free_vars

I_B = lift(BLACK, parse_term("I"))
ONE_B = lift(BLACK, parse_term(r"\x y. x y"))
D_WHITE = lift(WHITE, parse_term(r"\y x. x (y x)"))


def test_root_step_silent_vs_interaction():
    silent = CApp(BLACK, I_B, D_WHITE)
    t, kind = root_step(silent)
    assert t == D_WHITE and kind is SILENT
    inter = CApp(WHITE, I_B, D_WHITE)
    t, kind = root_step(inter)
    assert t == D_WHITE and kind is INTERACTION


def test_root_step_absent_on_non_redex():
    assert root_step(Var("x")) is None
    assert root_step(parse_cterm(r"\b x. (\b y. y) @b x")) is None  # redex not at root


def test_is_hnf():
    assert is_hnf(parse_cterm(r"\b x. x @w y @b z"))
    assert not is_hnf(CApp(WHITE, I_B, Var("z")))
    assert is_hnf(Var("x"))


def test_head_decompose_under_spine():
    t = CApp(WHITE, CApp(WHITE, I_B, Var("z")), Var("w"))
    ctx, redex = head_decompose(t)
    assert redex == CApp(WHITE, I_B, Var("z"))
    assert plug(ctx, redex) == t


def test_head_decompose_whole_term():
    om_w = lift(WHITE, parse_term("Om"))
    ctx, redex = head_decompose(om_w)
    assert redex == om_w
    assert plug(ctx, redex) == om_w


def test_head_decompose_none_on_hnf():
    assert head_decompose(parse_cterm(r"\b x. x")) is None


def test_head_step_example_top_path():
    # (1_b @w z) @w w ->hi (\b y. z @b y) @w w ->hi z @b w
    t0 = CApp(WHITE, CApp(WHITE, ONE_B, Var("z")), Var("w"))
    t1, kind1 = head_step(t0)
    assert kind1 is INTERACTION
    assert t1 == CApp(WHITE, parse_cterm(r"\b y. z @b y"), Var("w"))
    t2, kind2 = head_step(t1)
    assert kind2 is INTERACTION
    assert t2 == parse_cterm("z @b w")


def test_head_step_example_bottom_path():
    t0 = CApp(WHITE, CApp(WHITE, I_B, Var("z")), Var("w"))
    t1, kind = head_step(t0)
    assert kind is INTERACTION
    assert t1 == parse_cterm("z @w w")


def test_evaluate_head_eta_counts():
    out = evaluate_head(CApp(WHITE, CApp(WHITE, ONE_B, Var("z")), Var("w")), 10)
    assert isinstance(out, Normal) and out.k == 2 and out.n == 2
    assert out.hnf == parse_cterm("z @b w")
    out2 = evaluate_head(CApp(WHITE, CApp(WHITE, I_B, Var("z")), Var("w")), 10)
    assert isinstance(out2, Normal) and out2.k == 1 and out2.n == 1
    assert out2.hnf == parse_cterm("z @w w")


def test_evaluate_head_all_interaction_chain():
    t = CApp(BLACK, CApp(BLACK, D_WHITE, I_B), I_B)
    out = evaluate_head(t, 10)
    assert isinstance(out, Normal)
    assert out.hnf == I_B and out.k == 4 and out.n == 4


def test_evaluate_head_white_omega_exhausts_silently():
    out = evaluate_head(lift(WHITE, parse_term("Om")), 100)
    assert isinstance(out, FuelExhausted)
    assert out.k == 0 and out.n == 100


def test_head_step_ordinary_examples():
    assert head_step_ordinary(App(parse_term("I"), Var("x"))) == Var("x")
    om = parse_term("Om")
    out = evaluate_head_ordinary(om, 500)
    assert isinstance(out, FuelExhausted)
    # P z =beta \x. x (P z): head converges to a one-binder hnf
    P = App(parse_term("Y"), parse_term(r"\y z x. x (y z)"))
    out2 = evaluate_head_ordinary(App(P, Var("z")), 2000)
    assert isinstance(out2, Normal)
    from chlam.bohm import spine_data

    n, marker, k, _ = spine_data(out2.hnf)
    assert n == 1 and marker == ("own", 1) and k == 1


def test_ordinary_agrees_with_black_lifting():
    for i, t in enumerate(gen_ordinary_terms(GenConfig(seed=7, max_size=14))):
        if i >= 400:
            break
        r = head_step_ordinary(t)
        lr = head_step(lift(BLACK, t))
        if r is None:
            assert lr is None
        else:
            assert lr == (lift(BLACK, r), SILENT)


def test_any_beta_steps_examples():
    assert any_beta_steps(Var("x")) == []
    two = CApp(BLACK, I_B, CApp(BLACK, I_B, Var("y")))
    assert len(any_beta_steps(two)) == 2
    t = CApp(BLACK, parse_cterm(r"\b x. x @b x"), CApp(BLACK, I_B, Var("y")))
    reducts = any_beta_steps(t)
    arg = CApp(BLACK, I_B, Var("y"))
    assert (CApp(BLACK, arg, arg), SILENT) in reducts
    assert (CApp(BLACK, parse_cterm(r"\b x. x @b x"), Var("y")), SILENT) in reducts
    assert len(reducts) == 2


def test_head_step_determinism_and_fuel_monotonicity():
    for i, ct in enumerate(gen_terms(GenConfig(seed=8, max_size=14))):
        if i >= 300:
            break
        out_small = evaluate_head(ct, 5)
        out_big = evaluate_head(ct, 50)
        if isinstance(out_small, Normal):
            assert out_big == out_small
        else:
            assert out_big.n >= out_small.n
            if isinstance(out_big, Normal):
                assert out_big.k >= out_small.k


def test_substitutivity_of_steps():
    rng = random.Random(99)
    gen = gen_terms(GenConfig(seed=9, max_size=12))
    closed = gen_terms(GenConfig(seed=10, max_size=8, closed=True))
    checked = 0
    while checked < 300:
        ct = next(gen)
        steps = any_beta_steps(ct)
        h = head_step(ct)
        if h is not None:
            steps.append(h)
        if not steps:
            continue
        checked += 1
        ct2, _ = rng.choice(steps)
        names = sorted(free_vars(ct)) or ["a"]
        x = rng.choice(names)
        u = next(closed)
        assert substitute(ct2, x, u) in [r for r, _ in any_beta_steps(substitute(ct, x, u))]


def test_lifting_properties():
    for i, t in enumerate(gen_ordinary_terms(GenConfig(seed=11, max_size=14))):
        if i >= 300:
            break
        for p in (BLACK, WHITE):
            lt = lift(p, t)
            assert is_hnf(t) == is_hnf(lt)
            r = head_step_ordinary(t)
            lr = head_step(lt)
            if r is None:
                assert lr is None
            else:
                assert lr[1] is SILENT and lr[0] == lift(p, r)
                assert wash(lr[0]) == r


def test_tagging_preserves_steps():
    # any tagging of a head-reducible term takes a checkers step projecting back
    checked = 0
    for ct in gen_terms(GenConfig(seed=12, max_size=14)):
        t = wash(ct)
        r = head_step_ordinary(t)
        if r is None:
            continue
        checked += 1
        lr = head_step(ct)
        assert lr is not None and wash(lr[0]) == r
        if checked >= 300:
            break


def test_interaction_count_additivity():
    for i, ct in enumerate(gen_terms(GenConfig(seed=13, max_size=14))):
        if i >= 300:
            break
        out, steps = evaluate_head_trace(ct, 200)
        assert out.k == sum(1 for _, kind in steps if kind is INTERACTION)
        assert out.n == len(steps)


def test_local_confluence_smoke():
    import itertools

    for i, ct in enumerate(gen_terms(GenConfig(seed=14, max_size=12))):
        if i >= 1000:
            break
        reducts = list(dict.fromkeys(r for r, _ in any_beta_steps(ct)))
        for a, b in itertools.combinations(reducts, 2):
            assert joins(a, b, 200), print_cterm(ct)
