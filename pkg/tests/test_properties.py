"""Property tests for the store and the constraint algebra, driven by the
seeded random case generator and checked against brute force."""

import random

from hypothesis import given, settings, strategies as st

from aclp.store import ConstraintStore, negate

from oracles import (brute_force_solutions, build_store, holds,
                     random_store_case, store_solutions)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds)
@settings(max_examples=200, deadline=None)
def test_negation_partitions_valuations(seed):
    """c and negate(c) split every total valuation between them."""
    rng = random.Random(seed)
    _, domains, constraints = random_store_case(rng)
    everything = brute_force_solutions(domains, ())
    for c in constraints:
        sat = brute_force_solutions(domains, [c])
        unsat = brute_force_solutions(domains, [negate(c)])
        assert sat | unsat == everything
        assert sat & unsat == set()
        assert negate(negate(c)) == c


@given(seeds)
@settings(max_examples=150, deadline=None)
def test_store_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    vars_, domains, constraints = random_store_case(rng)
    store, ok = build_store(domains, constraints, ConstraintStore)
    expect = brute_force_solutions(domains, constraints)
    got = store_solutions(store, vars_) if ok else set()
    assert got == expect


@given(seeds)
@settings(max_examples=150, deadline=None)
def test_propagation_is_a_fixpoint(seed):
    """Re-posting every constraint leaves all domains untouched."""
    rng = random.Random(seed)
    _, domains, constraints = random_store_case(rng)
    store, ok = build_store(domains, constraints, ConstraintStore)
    if not ok:
        return
    before = {vid: list(d.values()) for vid, d in store.domains.items()}
    for c in constraints:
        assert store.post(c)
    after = {vid: list(d.values()) for vid, d in store.domains.items()}
    assert after == before


@given(seeds)
@settings(max_examples=150, deadline=None)
def test_propagation_never_removes_supported_values(seed):
    """Every value participating in some solution survives propagation."""
    rng = random.Random(seed)
    vars_, domains, constraints = random_store_case(rng)
    store, ok = build_store(domains, constraints, ConstraintStore)
    solutions = brute_force_solutions(domains, constraints)
    if not ok:
        assert solutions == set()
        return
    supported = {}
    for sol in solutions:
        for vid, value in sol:
            supported.setdefault(vid, set()).add(value)
    for v in vars_:
        remaining = set(store.domains[v.id].values())
        assert supported.get(v.id, set()) <= remaining


@given(seeds, seeds)
@settings(max_examples=100, deadline=None)
def test_snapshot_restore_is_exact_under_random_posts(seed, seed2):
    rng = random.Random(seed)
    vars_, domains, constraints = random_store_case(rng)
    store, ok = build_store(domains, [], ConstraintStore)
    assert ok  # declarations alone never fail for distinct vars
    snap = store.snapshot()
    shape = {vid: list(d.values()) for vid, d in store.domains.items()}
    n_constraints = len(store.constraints)
    for c in constraints:
        if not store.post(c):
            break
    store.restore(snap)
    assert store.consistent
    assert {vid: list(d.values())
            for vid, d in store.domains.items()} == shape
    assert len(store.constraints) == n_constraints
    assert store.active_constraints() == []
    # and the store still behaves like a fresh one
    _, domains2, constraints2 = random_store_case(random.Random(seed2))
    # (no shared variables: use the original case's constraints instead)
    store2, ok2 = build_store(domains, constraints, ConstraintStore)
    expect = store_solutions(store2, vars_) if ok2 else set()
    got = set()
    for c in constraints:
        if not store.post(c):
            break
    else:
        got = store_solutions(store, vars_)
    assert got == expect


@given(seeds)
@settings(max_examples=200, deadline=None)
def test_oracle_holds_matches_store_ground_check(seed):
    """On singleton domains the store's ground test equals the oracle's."""
    rng = random.Random(seed)
    vars_, domains, constraints = random_store_case(rng)
    pinned = {v: [rng.choice(vals)] for v, vals in domains.items()}
    val = {v.id: vals[0] for v, vals in pinned.items()}
    store, ok = build_store(pinned, constraints, ConstraintStore)
    expect = all(holds(c, val) for c in constraints)
    assert ok == expect
