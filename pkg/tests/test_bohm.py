import random

from chlam import (
    App,
    BLACK,
    FAILS,
    HOLDS,
    UNKNOWN,
    Var,
    bohm_approx,
    bohm_le,
    bohm_le_eta,
    find_difference,
    le_bot,
    lift,
    node_at_path,
    parse_term,
    spine_eq,
    wash,
)
from chlam.bohm import (
    BotLeaf,
    CutLeaf,
    DivergenceAsymmetry,
    Node,
    SpineArityMismatch,
    HeadMismatch,
    approx_alpha_eq,
    approx_to_json,
    render_approx,
)
from chlam.harness import GenConfig, gen_ordinary_terms
from chlam.reduction import any_beta_steps

I = parse_term("I")
ONE = parse_term(r"\x y. x y")
K = parse_term("K")
F = parse_term("F")
OM = parse_term("Om")
Y = parse_term("Y")
T5 = parse_term(r"\x y. x (x Om y) Om")
U5 = parse_term(r"\x y. x (x y Om) Om")


def node(binders, head, children=()):
    return Node(tuple(binders), head, tuple(children))


def test_approx_omega_is_bottom():
    a = bohm_approx(OM, 4, 100)
    assert isinstance(a, BotLeaf) and a.certified


def test_approx_eta_expanded_identity():
    a = bohm_approx(ONE, 2, 100)
    assert approx_alpha_eq(a, node(["x", "y"], "x", [node([], "y")]))


def test_approx_fixpoint_chain_shape():
    a = bohm_approx(Y, 3, 1000)
    expected = node(["f"], "f", [node([], "f", [node([], "f", [CutLeaf()])])])
    assert approx_alpha_eq(a, expected)


def test_approx_json_and_render():
    a = bohm_approx(ONE, 2, 100)
    j = approx_to_json(a)
    assert j["head"] == a.head and len(j["args"]) == 1
    assert approx_to_json(bohm_approx(OM, 1, 50)) == {"bot": True}
    text = render_approx(a)
    assert "\\" in text and "_|_" not in text


def test_node_at_path_root():
    r = node_at_path(ONE, (), 100)
    assert r.status == "ok" and spine_eq(r.hnf, parse_term(r"\x y. x y"))


def test_node_at_path_section5():
    t = parse_term(r"\x y. x (x Om y) Om")
    r = node_at_path(t, (1, 2), 100)
    assert r.status == "ok"
    assert isinstance(r.hnf, Var)  # the hnf of y at that node is a bare variable


def test_node_at_path_out_of_range():
    assert node_at_path(K, (1,), 100).status == "undefined"
    assert node_at_path(OM, (1,), 100).status == "undefined"  # certified divergence


def test_spine_eq_ignores_children():
    h1 = parse_term(r"\x y. x Om")
    h2 = parse_term(r"\x y. x K")
    assert spine_eq(h1, h2)


def test_spine_eq_heads_and_arity():
    assert not spine_eq(K, F)
    assert not spine_eq(parse_term(r"\x. x z"), parse_term(r"\x. x z z"))


def test_bohm_le_divergent_left():
    assert bohm_le(OM, K, 5, 100) is HOLDS  # certified by loop detection
    # without certification, fuel exhaustion stays unknown
    yk = App(Y, K)
    assert bohm_le(yk, K, 5, 100) is UNKNOWN
    assert bohm_le(yk, K, 5, 100, assume_divergence=True) is HOLDS


def test_bohm_le_eta_difference_fails():
    assert bohm_le(I, ONE, 5, 100) is FAILS
    assert bohm_le(ONE, I, 5, 100) is FAILS


def test_bohm_le_reflexive():
    for t in [I, K, ONE, T5, parse_term(r"\x. x (x K) I")]:
        assert bohm_le(t, t, 6, 300) is HOLDS


def test_bohm_le_eta_identity_pair():
    assert bohm_le_eta(I, ONE, 5, 100) is HOLDS
    assert bohm_le_eta(ONE, I, 5, 100) is HOLDS


def test_bohm_le_eta_absorbs_bottom_argument():
    assert bohm_le_eta(parse_term(r"\x y. x Om"), I, 5, 100) is HOLDS


def test_bohm_le_eta_projections_differ():
    assert bohm_le_eta(K, F, 5, 100) is FAILS


def test_bohm_le_eta_budget_zero_blocks_matching():
    assert bohm_le_eta(I, ONE, 5, 100, eta_budget=0) is UNKNOWN


def test_find_difference_eta_gap_at_root():
    w = find_difference(I, ONE, 5, 100)
    assert w.path == ()
    assert w.kind == SpineArityMismatch(1, "right")
    w2 = find_difference(ONE, I, 5, 100)
    assert w2.kind == SpineArityMismatch(1, "left")


def test_find_difference_section5_divergence():
    w = find_difference(T5, U5, 5, 300)
    assert w.path == (1, 2)
    assert w.kind == DivergenceAsymmetry()


def test_find_difference_head_mismatch():
    w = find_difference(K, F, 5, 100)
    assert w.path == () and w.kind == HeadMismatch()


def test_find_difference_reflexive_absent():
    for t in [K, T5, Y]:
        assert find_difference(t, t, 4, 300) is None


def test_find_difference_prunes_left_bottom():
    # a left bottom satisfies the (bot) clause: it is never the difference
    t = parse_term(r"\x. x Om K")
    u = parse_term(r"\x. x K Om")
    w = find_difference(t, u, 5, 300)
    assert w is not None and w.path == (2,)
    assert w.kind == DivergenceAsymmetry()


def test_le_bot_bottom_is_least_under_flag():
    assert le_bot(BotLeaf(False), node([], "x"), assume_divergence=True) is HOLDS
    assert le_bot(BotLeaf(False), node([], "x")) is UNKNOWN
    assert le_bot(BotLeaf(True), node([], "x")) is HOLDS  # certified needs no flag


def test_le_bot_fixpoint_chain():
    # bottom <= lam f. f bottom <= lam f. f (f bottom) <= BT(Y) approximant
    bot = BotLeaf(True)
    c1 = node(["f"], "f", [bot])
    c2 = node(["f"], "f", [node([], "f", [bot])])
    approx = bohm_approx(Y, 3, 1000)
    assert le_bot(bot, c1) is HOLDS
    assert le_bot(c1, c2) is HOLDS
    assert le_bot(c2, approx) is HOLDS
    assert le_bot(c2, c1) is FAILS  # a node is never below a certified bottom


def test_le_bot_head_mismatch_fails():
    assert le_bot(node(["x", "y"], "x"), node(["x", "y"], "y")) is FAILS


def test_le_bot_cut_is_unknown():
    assert le_bot(CutLeaf(), node([], "x")) is UNKNOWN
    assert le_bot(node(["f"], "f", [CutLeaf()]), node(["f"], "f", [node([], "x")])) is UNKNOWN


def test_monotonicity_in_depth_and_fuel():
    pairs = [(I, ONE), (OM, K), (T5, U5), (K, K), (parse_term(r"\x. x Om"), parse_term(r"\x. x K"))]
    for t, u in pairs:
        small = bohm_le(t, u, 1, 30)
        big = bohm_le(t, u, 8, 500)
        if small is HOLDS:
            assert big is HOLDS
        if small is FAILS:
            assert big is FAILS


def test_plain_le_implies_eta_le():
    gen = gen_ordinary_terms(GenConfig(seed=21, max_size=12))
    pairs = []
    terms = [next(gen) for _ in range(60)]
    pairs += [(t, t) for t in terms[:20]]
    pairs += list(zip(terms[20:40], terms[40:60]))
    for t, u in pairs:
        if bohm_le(t, u, 4, 200) is HOLDS:
            assert bohm_le_eta(t, u, 4, 200) in (HOLDS, UNKNOWN)


def test_beta_invariance_of_approximants():
    rng = random.Random(5)
    checked = 0
    for t in gen_ordinary_terms(GenConfig(seed=22, max_size=14)):
        reducts = [wash(r) for r, _ in any_beta_steps(lift(BLACK, t))]
        if not reducts:
            continue
        checked += 1
        u = rng.choice(reducts)
        a = bohm_approx(t, 3, 300)
        b = bohm_approx(u, 3, 300)
        _assert_compatible(a, b)
        if checked >= 200:
            break


def _assert_compatible(a, b, env=None):
    env = dict(env or {})
    if not isinstance(a, Node) or not isinstance(b, Node):
        return
    assert len(a.binders) == len(b.binders) and len(a.children) == len(b.children)
    for x, y in zip(a.binders, b.binders):
        env[x] = y
    assert env.get(a.head, a.head) == b.head
    for c, d in zip(a.children, b.children):
        _assert_compatible(c, d, env)


def test_witness_path_minimality():
    # spine_eq holds at every proper prefix of a returned path
    w = find_difference(T5, U5, 5, 300)
    for cut in range(len(w.path)):
        prefix = w.path[:cut]
        left = node_at_path(T5, prefix, 300)
        right = node_at_path(U5, prefix, 300)
        assert left.status == right.status == "ok"
        assert spine_eq(left.hnf, right.hnf)
