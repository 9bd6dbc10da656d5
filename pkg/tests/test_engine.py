"""The abductive proof procedure: goal reduction, hypothesis reuse,
consistency checking and answer extraction."""

import pytest

from aclp import Config, compile_naf, parse_goal, parse_theory, solve
from aclp.corpus import event_calculus_program
from aclp.engine import (DepthLimitExceededError,
                         InitialHypothesisInconsistentError, Solver, ic_order)
from aclp.terms import (Atom, Int, IntegrityConstraint, Struct,
                        UnknownPredicateError, UserLit, Var)


def answers(text, goal, initial=(), config=None, limit=10):
    theory = compile_naf(parse_theory(text), mode="autogenerate")
    out = []
    for i, ans in enumerate(solve(theory, parse_goal(goal), initial, config)):
        out.append(ans)
        if i + 1 >= limit:
            break
    return out


def delta_names(ans):
    return sorted(l.name for l in ans.delta)


# -- basic abduction --------------------------------------------------------

def test_single_abductive_step():
    out = answers("abducible_predicate(a/0).\ng :- a.", "g")
    assert [delta_names(a) for a in out] == [["a"]]


def test_ic_refutes_the_only_hypothesis():
    out = answers("abducible_predicate(a/0).\ng :- a.\nic :- a.", "g")
    assert out == []


def test_two_clauses_give_choice_points_in_source_order():
    text = """
        abducible_predicate(a/1).
        q(1) :- a(one).
        q(2) :- a(two).
        g(X) :- q(X).
    """
    out = answers(text, "g(X)")
    assert [delta_names(a) for a in out] == [["a"], ["a"]]
    assert [a.delta[0].args[0] for a in out] == [Atom("one"), Atom("two")]


def test_constraint_posted_before_reduction_prunes():
    text = """
        abducible_predicate(a/1).
        p(X) :- X :: 1..5, a(X).
    """
    out = answers(text, "X #< 3, p(X)")
    assert len(out) == 1
    sols = [s[out[0].delta[0].args[0].id].value
            for s in out[0].labellings()]
    assert sols == [1, 2]


def test_unknown_predicate_raises():
    theory = parse_theory("p(1).")
    with pytest.raises(UnknownPredicateError):
        list(solve(theory, parse_goal("r")))


def test_fact_needs_no_hypothesis():
    out = answers("p(1).", "p(1)")
    assert len(out) == 1 and out[0].delta == ()


# -- reuse-first ------------------------------------------------------------

def test_reuse_constrains_against_existing_hypothesis():
    text = "abducible_predicate(act/2).\ng(T, A) :- act(T, A)."
    initial = (UserLit("act", (Int(3), Struct("move", (Atom("a"), Atom("b"))))),)
    out = answers(text, "g(T, A)", initial=initial)
    assert out[0].delta == initial          # reuse: no new hypothesis
    assert len(out[1].delta) == 2           # fresh hypothesis comes second


def test_first_answer_has_minimal_delta():
    text = """
        abducible_predicate(a/1).
        g :- a(X), X :: 1..5.
        h :- a(Y), Y :: 1..5.
        both :- g, h.
    """
    out = answers(text, "both")
    sizes = [len(a.delta) for a in out]
    assert sizes and sizes[0] == min(sizes)


# -- consistency checking ---------------------------------------------------

def test_vacuous_consistency_check():
    text = """
        abducible_predicate(a/0).
        abducible_predicate(b/0).
        g :- a.
        ic :- b.
    """
    out = answers(text, "g")
    assert [delta_names(a) for a in out] == [["a"]]


def test_negated_constraint_narrows_goal_variable():
    # only X >= 3 avoids the integrity violation
    text = """
        abducible_predicate(a/1).
        g(X) :- X :: 1..5, a(X).
        ic :- a(Y), Y #< 3.
    """
    out = answers(text, "g(X)")
    assert len(out) == 1
    x = out[0].delta[0].args[0]
    assert sorted(s[x.id].value for s in out[0].labellings()) == [3, 4, 5]


def test_ground_ic_body_cannot_be_refuted():
    # between(1,3,5) is ground-true, so the second hypothesis must fail
    text = """
        abducible_predicate(act/2).
        abducible_predicate(not_clipped/3).
        terminates(p, m).
        between(T, C, E) :- T #< C, C #< E.
        ic :- not_clipped(T, E, P), terminates(P, A1), act(C, A2),
              A1 ##= A2, between(T, C, E).
        g :- act(3, m), not_clipped(1, 5, p).
    """
    assert answers(text, "g") == []


def test_refutable_ic_body_lets_hypothesis_through():
    # same program, but the action at time 6 falls outside (1,5)
    text = """
        abducible_predicate(act/2).
        abducible_predicate(not_clipped/3).
        terminates(p, m).
        between(T, C, E) :- T #< C, C #< E.
        ic :- not_clipped(T, E, P), terminates(P, A1), act(C, A2),
              A1 ##= A2, between(T, C, E).
        g :- act(6, m), not_clipped(1, 5, p).
    """
    out = answers(text, "g")
    assert len(out) >= 1
    assert delta_names(out[0]) == ["act", "not_clipped"]


def test_later_hypothesis_cannot_revive_refuted_ic():
    # p0 is derivable only through a0(5); abducing a0(5) after a0(3)
    # must not slip past the constraint ic :- a0(3), p0
    text = """
        abducible_predicate(a0/1).
        p0 :- a0(5).
        g :- a0(3), a0(5).
        ic :- a0(3), p0.
    """
    assert answers(text, "g") == []


def test_rollback_after_failed_branch_is_exact():
    theory = parse_theory("abducible_predicate(a/0).\ng :- a.\nic :- a.")
    solver = Solver(theory)
    assert list(solver.solve(parse_goal("g"))) == []
    assert solver.delta == [] and solver.denials == []
    assert solver.store.consistent
    assert solver.store.domains == {} and solver.store.constraints == []


# -- negation as failure ----------------------------------------------------

def test_naf_goal_abduces_the_complement():
    text = """
        abducible_predicate(not_q/0).
        p :- not(q).
        ic :- not_q, q.
    """
    theory = compile_naf(parse_theory(text), mode="validate")
    out = list(solve(theory, parse_goal("p")))
    assert [delta_names(a) for a in out] == [["not_q"]]


def test_naf_fails_when_complement_is_provable():
    text = """
        abducible_predicate(not_q/0).
        p :- not(q).
        q.
        ic :- not_q, q.
    """
    theory = compile_naf(parse_theory(text), mode="validate")
    assert list(solve(theory, parse_goal("p"))) == []


def test_naf_forces_preconditions():
    # proving not_clipped's complement establishes q via abduction
    text = """
        abducible_predicate(b/0).
        p :- not(q).
        q :- b.
    """
    theory = compile_naf(parse_theory(text), mode="autogenerate")
    out = list(solve(theory, parse_goal("p")))
    # not_q survives only while b is not abduced
    assert [delta_names(a) for a in out] == [["not_q"]]


# -- initial hypotheses -----------------------------------------------------

def test_initial_hypotheses_are_checked():
    text = "abducible_predicate(a/0).\ng :- a.\nic :- a."
    theory = parse_theory(text)
    with pytest.raises(InitialHypothesisInconsistentError):
        list(solve(theory, parse_goal("g"), initial=(UserLit("a", ()),)))


def test_non_abducible_initial_hypothesis_rejected():
    theory = parse_theory("p(1).")
    with pytest.raises(InitialHypothesisInconsistentError):
        list(solve(theory, parse_goal("p(1)"), initial=(UserLit("b", ()),)))


# -- limits -----------------------------------------------------------------

def test_depth_limit_signals_incompleteness():
    theory = parse_theory("p :- p.")
    with pytest.raises(DepthLimitExceededError):
        list(solve(theory, parse_goal("p"), config=Config(max_depth=50)))


def test_depth_limit_not_raised_when_answers_exist():
    theory = parse_theory("p :- p.\np.")
    out = list(solve(theory, parse_goal("p"), config=Config(max_depth=50)))
    assert len(out) >= 1


def test_time_budget_stops_search():
    import time
    # a shallow but astronomically wide search (6^12 leaves, all failing)
    facts = "\n".join(f"c({i})." for i in range(1, 7))
    body = ", ".join(f"c(X{i})" for i in range(12))
    theory = parse_theory(f"{facts}\ng :- {body}, fail.")
    t0 = time.monotonic()
    out = list(solve(theory, parse_goal("g"),
                     config=Config(time_budget=0.3)))
    assert out == []
    assert time.monotonic() - t0 < 10.0


# -- ic ordering ------------------------------------------------------------

def _ic(*names):
    return IntegrityConstraint(tuple(UserLit(n, ()) for n in names))


def test_specific_first_prefers_longer_bodies():
    short, long_ = _ic("a", "b"), _ic("a", "b", "c", "d")
    assert ic_order([short, long_], "specific_first") == [long_, short]
    assert ic_order([short, long_], "source") == [short, long_]


def test_specific_first_breaks_ties_by_ground_arguments():
    x = Var("X", 0)
    vague = IntegrityConstraint((UserLit("a", (x,)),))
    exact = IntegrityConstraint((UserLit("a", (Int(3),)),))
    assert ic_order([vague, exact], "specific_first") == [exact, vague]


def test_ic_order_is_stable_on_ties():
    a, b = _ic("a", "b"), _ic("c", "d")
    assert ic_order([a, b], "specific_first") == [a, b]


# -- the shipped event-calculus program -------------------------------------

def test_event_calculus_projection_answer():
    theory = compile_naf(parse_theory(event_calculus_program()),
                         mode="autogenerate")
    goal = parse_goal("holds_at(in(package1, truck1), 4)")
    ans = next(solve(theory, goal))
    names = sorted(l.name for l in ans.delta)
    assert names == ["act", "not_clipped", "not_clipped", "not_clipped"]
    (act,) = [l for l in ans.delta if l.name == "act"]
    t, action = act.args
    assert action == Struct("load_truck",
                            (Atom("package1"), Atom("truck1"), Atom("city1_1")))
    # the action time stays non-ground, constrained to 1..3
    values = sorted(s[t.id].value for s in ans.labellings())
    assert values == [1, 2, 3]
