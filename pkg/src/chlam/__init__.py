"""chlam: a laboratory for the two-player (checkers) lambda calculus.

Head reduction with silent/interaction step counting, Böhm-tree approximants
and preorders, interaction-counting separation contexts, and the checkers
multi-type system with tight typing.
"""

from .syntax import (
    App,
    BLACK,
    BVar,
    CApp,
    CLam,
    CTerm,
    Context,
    CContext,
    HOLE,
    Lam,
    NameSupply,
    ParseError,
    Player,
    Term,
    Var,
    WHITE,
    clam,
    free_vars,
    is_tagging,
    lam,
    lift,
    lift_context,
    parse_ccontext,
    parse_context,
    parse_cterm,
    parse_term,
    plug,
    print_context,
    print_cterm,
    print_term,
    substitute,
    term_size,
    wash,
)
from .reduction import (
    FuelExhausted,
    INTERACTION,
    Normal,
    Outcome,
    SILENT,
    StepKind,
    any_beta_steps,
    evaluate_head,
    evaluate_head_ordinary,
    evaluate_head_trace,
    head_decompose,
    head_step,
    head_step_ordinary,
    is_hnf,
    root_step,
)
from .bohm import (
    BohmApprox,
    BotLeaf,
    CutLeaf,
    DiffWitness,
    DivergenceAsymmetry,
    FAILS,
    HOLDS,
    HeadMismatch,
    Node,
    SpineArityMismatch,
    Tri,
    UNKNOWN,
    bohm_approx,
    bohm_le,
    bohm_le_eta,
    find_difference,
    le_bot,
    node_at_path,
    spine_eq,
)
from .separate import (
    FuelExceeded,
    NotApplicable,
    SeparationResult,
    VerificationFailed,
    choose_K,
    classic_separate,
    interaction_bohm_out,
    selector,
    separate_terms,
    tuple_term,
    tupler,
    verify_separation,
)
from .types import (
    ATOM,
    Arrow,
    Atom,
    CheckReport,
    Derivation,
    DerivationError,
    Judgment,
    Multi,
    Rule,
    TypeEnv,
    ZERO,
    anti_subst_derivation,
    check_derivation,
    derivation_from_json,
    derivation_to_json,
    derive_hnf_tight,
    enumerate_typings,
    infer_tight,
    is_tight,
    merge_derivations,
    split_derivation,
    subject_expand,
    subject_reduce,
    subst_derivation,
    transport_bohm,
    type_universe,
)
from .harness import (
    GenConfig,
    ProbeReport,
    SUITES,
    gen_hnfs,
    gen_ordinary_terms,
    gen_terms,
    probe_preorder,
    run_suite,
)

__version__ = "0.1.0"
