"""Unification, substitution trailing and clause renaming."""

import pytest

from aclp.store import ConstraintStore, IntDomain
from aclp.terms import (Atom, Clause, Int, Struct, Substitution, UserLit, Var,
                        VarCounter, is_ground, standardize_apart, term_vars,
                        unify, unify_terms)


def test_unify_binds_var_inside_struct():
    x = Var("X", 0)
    store = ConstraintStore()
    result = unify(Struct("f", (x,)), Struct("f", (Atom("a"),)), store)
    assert result is not None
    subst, _ = result
    assert subst.resolve(x) == Atom("a")


def test_unify_var_with_itself_binds_nothing():
    x = Var("X", 0)
    result = unify(x, x, ConstraintStore())
    assert result is not None
    subst, _ = result
    assert subst.resolve(x) == x


def test_unify_domain_var_with_excluded_int_fails():
    t = Var("T", 0)
    store = ConstraintStore()
    assert store.declare(t, IntDomain.range(1, 2))
    assert unify(t, Int(3), store) is None


def test_unify_domain_var_with_member_int_narrows():
    t = Var("T", 0)
    store = ConstraintStore()
    assert store.declare(t, IntDomain.range(1, 4))
    assert unify(t, Int(3), store) is not None
    assert list(store.domains[t.id].values()) == [3]


def test_unify_functor_mismatch_fails():
    store = ConstraintStore()
    assert unify(Struct("f", (Int(1),)), Struct("g", (Int(1),)), store) is None
    assert unify(Struct("f", (Int(1),)), Struct("f", (Int(1), Int(2))),
                 store) is None


def test_unify_occurs_check():
    x = Var("X", 0)
    assert unify(x, Struct("f", (x,)), ConstraintStore()) is None


def test_substitution_trail_is_lifo():
    s = Substitution()
    x, y = Var("X", 0), Var("Y", 1)
    m0 = s.mark()
    s.bind(x, Int(1))
    m1 = s.mark()
    s.bind(y, Atom("a"))
    assert s.resolve(y) == Atom("a")
    s.undo_to(m1)
    assert s.resolve(y) == y
    assert s.resolve(x) == Int(1)
    s.undo_to(m0)
    assert s.resolve(x) == x


def test_unify_terms_is_undone_by_trail():
    s = Substitution()
    store = ConstraintStore()
    x = Var("X", 0)
    m = s.mark()
    assert unify_terms(Struct("f", (x, Int(2))), Struct("f", (Int(1), Int(2))),
                       s, store)
    assert s.resolve(x) == Int(1)
    s.undo_to(m)
    assert s.resolve(x) == x


def test_standardize_apart_renames_all_vars_consistently():
    x = Var("X", 0)
    clause = Clause(UserLit("p", (x,)), (UserLit("q", (x, Var("Y", 1))),))
    counter = VarCounter(start=100)
    renamed, newvars = standardize_apart(clause, counter)
    hx = renamed.head.args[0]
    bx, by = renamed.body[0].args
    assert hx.id == bx.id and hx.id != x.id
    assert by.id != bx.id
    assert {v.id for v in newvars} == {hx.id, by.id}
    # a second renaming never collides with the first
    renamed2, _ = standardize_apart(clause, counter)
    assert renamed2.head.args[0].id != hx.id


def test_term_vars_and_is_ground():
    x = Var("X", 0)
    t = Struct("f", (Int(1), Struct("g", (x, x)), Atom("a")))
    assert [v.id for v in term_vars(t)] == [0, 0]
    assert not is_ground(t)
    assert is_ground(Struct("f", (Int(1), Atom("a"))))


def test_literal_indicator():
    assert UserLit("p", (Int(1), Int(2))).indicator == ("p", 2)
    assert UserLit("q", ()).indicator == ("q", 0)
