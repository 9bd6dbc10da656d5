"""The abductive proof procedure.

Two interleaved derivations share one substitution, one hypothesis list and
one constraint store:

* goal reduction (`_prove`): leftmost literal, depth-first, clause source
  order; constraints are posted to the store, abducibles are satisfied by
  reusing a hypothesis first and only then by assuming a new one;

* consistency checking (`_fail_conj`): triggered by every new hypothesis,
  it refutes each integrity constraint resolving with it by driving the
  residual body to finite failure.  A residual constraint can be refuted by
  posting its negation (only when that constrains no IC-local variable) or
  assumed and the remainder failed; defined literals must fail under every
  clause; plain abducibles are closed-world against the current hypothesis
  set (every later addition re-runs the check, which restores soundness);
  an abducible standing for negation-as-failure of a defined predicate is
  refuted by abductively proving the complement -- this is what forces
  action preconditions to be established in planning programs.
"""

from __future__ import annotations

import queue
import sys
import threading
import time
from dataclasses import dataclass, field, replace

from .store import (And, ConstraintStore, Eq, Or, TermEq, TermNeq,
                    constraint_vars, negate, resolve_constraint, AtomDomain,
                    IntDomain)
from .terms import (AclpError, Atom, ConstraintLit, DomainDecl, Int, NafLit,
                    Struct, Substitution, UserLit, Var, VarCounter,
                    UnknownPredicateError, rename_conjunction,
                    standardize_apart, standardize_ic, term_vars,
                    unify_terms)
from .theory import AbductiveTheory


class InitialHypothesisInconsistentError(AclpError):
    def __init__(self, hyp):
        super().__init__(f"INITIAL_HYPOTHESIS_INCONSISTENT: {hyp!r}")
        self.hyp = hyp


class DepthLimitExceededError(AclpError):
    def __init__(self, limit):
        super().__init__(f"DEPTH_LIMIT_EXCEEDED: {limit} reduction steps")
        self.limit = limit


@dataclass
class Config:
    max_depth: int = 10000
    ic_order: str = "source"          # source | specific_first
    label_strategy: str = "input_order"
    max_answers: int = 64             # bound for answer-stream consumers
    default_lo: int = -10_000_000
    default_hi: int = 10_000_000
    time_budget: float = None         # wall-clock seconds per solve, or None


@dataclass(frozen=True)
class Hypothesis:
    lit: UserLit
    provenance: str = "goal"          # goal | initial


@dataclass
class Answer:
    delta: tuple                      # resolved hypothesis literals
    provenance: tuple
    store: ConstraintStore

    def delta_vars(self):
        from .terms import term_vars
        seen, out = set(), []
        for lit in self.delta:
            for a in lit.args:
                for v in term_vars(a):
                    if v.id not in seen:
                        seen.add(v.id)
                        out.append(v)
        return out

    def store_vars(self):
        out = []
        for vid in sorted(self.store.domains):
            out.append(Var(self.store.var_names.get(vid, f"V{vid}"), vid))
        return out

    def labellings(self, strategy: str = "input_order", rng=None,
                   prefer: dict = None):
        """Ground valuations of every store variable, as id->term dicts."""
        yield from self.store.label(self.store_vars(), strategy, rng, prefer)

    def ground_delta(self, valuation: dict):
        def g(t):
            if isinstance(t, Var):
                return valuation.get(t.id, t)
            if isinstance(t, Struct):
                return Struct(t.functor, tuple(g(a) for a in t.args))
            return t
        return tuple(UserLit(l.name, tuple(g(a) for a in l.args))
                     for l in self.delta)


def ic_order(ics, strategy: str = "source"):
    """Order integrity constraints for checking; specific_first tries the
    more specific ones (longer bodies, more non-variable arguments) first."""
    if strategy == "source":
        return list(ics)
    if strategy != "specific_first":
        raise ValueError(f"bad ic ordering {strategy!r}")

    def nonvar_positions(ic):
        n = 0
        for lit in ic.body:
            if isinstance(lit, UserLit):
                n += sum(1 for a in lit.args if not isinstance(a, Var))
        return n

    return sorted(ics, key=lambda ic: (-len(ic.body), -nonvar_positions(ic)))


@dataclass(frozen=True)
class _Match:
    """Pending head/hypothesis argument match inside a failure derivation."""
    a: tuple
    b: tuple


_BUILTINS = {("true", 0), ("fail", 0)}


class Solver:
    def __init__(self, theory: AbductiveTheory, config: Config = None):
        self.theory = theory
        self.config = config or Config()
        self.counter = VarCounter(start=1_000_000)
        self.subst = Substitution()
        self.store = ConstraintStore(self.config.default_lo, self.config.default_hi)
        self.delta: list[Hypothesis] = []
        self.denials: list = []        # (abducible lit, residual conjunction)
        self.local_ids: set[int] = set()
        self.ordered_ics = ic_order(theory.ics, self.config.ic_order)
        self.depth_limit_hit = False
        self.budget_hit = False
        self.answers_emitted = 0
        self._deadline = None
        self._tick = 0

    # -- bookkeeping ---------------------------------------------------------

    def _mark(self):
        return (self.subst.mark(), self.store.snapshot(), len(self.delta))

    def _restore(self, mark):
        smark, stmark, dlen = mark
        del self.delta[dlen:]
        self.store.restore(stmark)
        self.subst.undo_to(smark)

    def _is_local(self, v: Var) -> bool:
        return v.id in self.local_ids

    def _fresh_locals(self, items):
        """Copies of `items` with unbound local variables renamed apart.

        Each alternative of a refutation (clause resolution, hypothesis
        match) quantifies the conjunction's local existentials on its own;
        sharing the variables would let the bindings made while refuting
        one alternative leak into the next and make its check vacuous.
        """
        mapping: dict = {}

        def rterm(t):
            t = self.subst.walk(t)
            if isinstance(t, Var):
                if t.id in self.local_ids and not self.store.has_domain(t):
                    if t.id not in mapping:
                        nv = self.counter.fresh(t.name)
                        self.local_ids.add(nv.id)
                        mapping[t.id] = nv
                    return mapping[t.id]
                return t
            if isinstance(t, Struct):
                return Struct(t.functor, tuple(rterm(a) for a in t.args))
            return t

        def rconstraint(c):
            if isinstance(c, (And, Or)):
                return type(c)(rconstraint(c.a), rconstraint(c.b))
            return type(c)(rterm(c.a), rterm(c.b))

        def ritem(item):
            if isinstance(item, _Match):
                return _Match(tuple(rterm(a) for a in item.a),
                              tuple(rterm(b) for b in item.b))
            if isinstance(item, UserLit):
                return UserLit(item.name, tuple(rterm(a) for a in item.args))
            if isinstance(item, ConstraintLit):
                return ConstraintLit(rconstraint(item.constraint))
            if isinstance(item, DomainDecl):
                return DomainDecl(rterm(item.var), rterm(item.lo),
                                  rterm(item.hi), item.atoms)
            return item

        return [ritem(i) for i in items]

    def _resolve_lit(self, lit):
        return self.subst.resolve_literal(lit)

    # -- top level -----------------------------------------------------------

    def solve(self, goal, initial=()):
        """Enumerate answers for a goal conjunction on backtracking.

        `initial` hypotheses are installed through the same consistency
        check as fresh abductions before reduction starts.
        """
        limit = max(sys.getrecursionlimit(), 8 * self.config.max_depth + 2000)
        sys.setrecursionlimit(min(limit, 1_000_000))
        if self.config.time_budget is not None:
            self._deadline = time.monotonic() + self.config.time_budget
        goal = rename_conjunction(goal, self.counter)
        for _ in self._install(list(initial), 0, goal):
            answer = self._make_answer()
            if answer is not None:
                self.answers_emitted += 1
                yield answer
        if self.depth_limit_hit and self.answers_emitted == 0:
            raise DepthLimitExceededError(self.config.max_depth)

    def _install(self, initial, i, goal):
        if i == len(initial):
            yield from self._prove(goal, 0)
            return
        lit = initial[i]
        if not self.theory.is_abducible(lit.name, lit.arity):
            raise InitialHypothesisInconsistentError(lit)
        mark = self._mark()
        try:
            self.delta.append(Hypothesis(lit, "initial"))
            produced = False
            for _ in self._consistency(lit, 0):
                produced = True
                yield from self._install(initial, i + 1, goal)
        finally:
            self._restore(mark)
        if not produced and not self.budget_hit:
            raise InitialHypothesisInconsistentError(lit)

    def _make_answer(self):
        delta = tuple(self._resolve_lit(h.lit) for h in self.delta)
        prov = tuple(h.provenance for h in self.delta)
        st = self.store.clone()
        st.constraints = [resolve_constraint(c, self.subst) for c in st.constraints]
        # project onto variables the answer can mention: those in the
        # hypotheses and those constrained by a residual constraint
        keep = set()
        for lit in delta:
            for a in lit.args:
                keep.update(v.id for v in term_vars(a))
        for c in st.active_constraints():
            keep.update(v.id for v in constraint_vars(c))
        for vid in [v for v in st.domains if v not in keep]:
            del st.domains[vid]
        answer = Answer(delta, prov, st)
        # emit only stores with at least one ground valuation
        probe = st.clone()
        if next(probe.label(answer.store_vars(), "first_fail"), None) is None \
                and st.domains:
            return None
        return answer

    # -- goal reduction ------------------------------------------------------

    def _out_of_time(self) -> bool:
        if self._deadline is None:
            return False
        self._tick += 1
        if self._tick & 0xFF:
            return self.budget_hit
        if time.monotonic() > self._deadline:
            self.budget_hit = True
        return self.budget_hit

    def _prove(self, goals, depth):
        if not self.store.consistent or self._out_of_time():
            return
        if not goals:
            yield ()
            return
        if depth >= self.config.max_depth:
            self.depth_limit_hit = True
            return
        lit = self._resolve_lit(goals[0])
        rest = goals[1:]

        if isinstance(lit, ConstraintLit):
            mark = self._mark()
            try:
                if self._post(lit.constraint):
                    yield from self._prove(rest, depth + 1)
            finally:
                self._restore(mark)
            return

        if isinstance(lit, DomainDecl):
            mark = self._mark()
            try:
                if self._declare(lit):
                    yield from self._prove(rest, depth + 1)
            finally:
                self._restore(mark)
            return

        if isinstance(lit, NafLit):
            raise AclpError(f"uncompiled NAF literal {lit!r}; run compile_naf first")

        key = lit.indicator
        if key in _BUILTINS:
            if lit.name == "true":
                yield from self._prove(rest, depth + 1)
            return

        if self.theory.is_abducible(*key):
            yield from self._assume(lit, rest, depth)
            return

        if self.theory.is_defined(*key):
            for clause in self.theory.clauses_for(*key):
                renamed, _ = standardize_apart(clause, self.counter)
                mark = self._mark()
                try:
                    if self._unify_args(renamed.head.args, lit.args):
                        yield from self._prove(list(renamed.body) + rest, depth + 1)
                finally:
                    self._restore(mark)
            return

        raise UnknownPredicateError(*key)

    def _unify_args(self, args1, args2) -> bool:
        return all(unify_terms(a, b, self.subst, self.store)
                   for a, b in zip(args1, args2))

    def _post(self, c) -> bool:
        c = resolve_constraint(c, self.subst)
        if isinstance(c, TermEq):
            # term equality is unification, not scalar decomposition
            return unify_terms(c.a, c.b, self.subst, self.store)
        return self.store.post(c)

    def _declare(self, decl: DomainDecl) -> bool:
        var = self.subst.resolve(decl.var)
        if decl.atoms is not None:
            dom = AtomDomain.of([a.name for a in decl.atoms])
            if isinstance(var, Atom):
                return dom.contains(var.name)
        else:
            lo, hi = self.subst.resolve(decl.lo), self.subst.resolve(decl.hi)
            if not isinstance(lo, Int) or not isinstance(hi, Int):
                raise AclpError(f"non-ground domain bounds in {decl!r}")
            dom = IntDomain.range(lo.value, hi.value)
            if isinstance(var, Int):
                return dom.contains(var.value)
        if not isinstance(var, Var):
            return False
        return self.store.declare(var, dom)

    # -- abduction -----------------------------------------------------------

    def _assume(self, lit: UserLit, rest, depth):
        # reuse existing hypotheses first, in insertion order
        for h in list(self.delta):
            if h.lit.indicator != lit.indicator:
                continue
            mark = self._mark()
            try:
                if self._unify_args(self._resolve_lit(h.lit).args, lit.args):
                    yield from self._prove(rest, depth + 1)
            finally:
                self._restore(mark)
        # then assume a fresh one (skip exact duplicates: reuse covered them)
        resolved = self._resolve_lit(lit)
        if any(self._resolve_lit(h.lit) == resolved for h in self.delta):
            return
        mark = self._mark()
        try:
            self.delta.append(Hypothesis(resolved, "goal"))
            for _ in self._consistency(resolved, depth):
                yield from self._prove(rest, depth + 1)
        finally:
            self._restore(mark)

    # -- consistency derivation ----------------------------------------------

    def _consistency(self, hyp: UserLit, depth):
        """Yield once per way of refuting every IC resolving with `hyp` and
        re-establishing every denial it threatens."""
        conjs = []
        for ic in self.ordered_ics:
            for pos, b in enumerate(ic.body):
                if not (isinstance(b, UserLit) and b.indicator == hyp.indicator):
                    continue
                renamed, newvars = standardize_ic(ic, self.counter)
                self.local_ids.update(v.id for v in newvars)
                residual = [_Match(renamed.body[pos].args, hyp.args)]
                residual.extend(l for j, l in enumerate(renamed.body) if j != pos)
                conjs.append(residual)
        # denials were justified by "no hypothesis matches this literal";
        # the new hypothesis must leave each of them finitely failed
        for d_lit, d_rest in list(self.denials):
            if d_lit.indicator != hyp.indicator:
                continue
            fresh = self._fresh_locals([d_lit] + list(d_rest))
            conjs.append([_Match(fresh[0].args, hyp.args)] + fresh[1:])
        yield from self._refute_all(conjs, 0, depth)

    def _refute_all(self, conjs, i, depth):
        if i == len(conjs):
            yield ()
            return
        for _ in self._fail_conj(conjs[i], depth):
            yield from self._refute_all(conjs, i + 1, depth)

    def _fail_conj(self, goals, depth):
        """Establish that the conjunction has no solution.

        Yields once per way of doing so; may post constraints on non-local
        variables as a side effect (undone on backtracking).
        """
        if not self.store.consistent:
            yield ()
            return
        if self._out_of_time():
            return
        if not goals:
            return  # conjunction succeeded: failure cannot be established
        if depth >= self.config.max_depth:
            self.depth_limit_hit = True
            return
        item = goals[0]
        rest = goals[1:]

        if isinstance(item, _Match):
            yield from self._fail_match(item, rest, depth)
            return

        lit = self._resolve_lit(item) if not isinstance(item, _Match) else item

        if isinstance(lit, ConstraintLit):
            yield from self._fail_constraint(lit.constraint, rest, depth)
            return

        if isinstance(lit, DomainDecl):
            # a domain declaration narrows; it fails only by emptying
            mark = self._mark()
            declared = self._declare(lit)
            if declared:
                try:
                    yield from self._fail_conj(rest, depth + 1)
                finally:
                    self._restore(mark)
            else:
                self._restore(mark)
                yield ()
            return

        if isinstance(lit, NafLit):
            raise AclpError(f"uncompiled NAF literal {lit!r} in integrity constraint")

        key = lit.indicator
        if key in _BUILTINS:
            if lit.name == "fail":
                yield ()
            else:
                yield from self._fail_conj(rest, depth + 1)
            return

        if self.theory.is_abducible(*key):
            comp = self.theory.naf_complements.get(key)
            if comp is not None and self.theory.is_defined(*comp):
                yield from self._fail_naf(lit, comp, rest, depth)
            else:
                yield from self._fail_abducible(lit, rest, depth)
            return

        if self.theory.is_defined(*key):
            resolutions = []
            for clause in self.theory.clauses_for(*key):
                renamed, newvars = standardize_apart(clause, self.counter)
                self.local_ids.update(v.id for v in newvars)
                fresh = self._fresh_locals([lit] + list(rest))
                resolutions.append([_Match(renamed.head.args, fresh[0].args)]
                                   + list(renamed.body) + fresh[1:])
            yield from self._refute_all(resolutions, 0, depth + 1)
            return

        # unknown, non-abducible: no way to succeed, so the conjunction fails
        yield ()

    def _fail_match(self, item: _Match, rest, depth):
        mark = self._mark()
        ok, caps, bound = self._capture_unify(item.a, item.b)
        self._restore(mark)
        if not ok:
            yield ()  # structurally impossible match
            return
        gcaps = self._project_caps(caps) if all(
            self._is_local(v) for v in bound) else None
        mark = self._mark()
        ok2, caps2, _ = self._capture_unify(item.a, item.b)
        posted = ok2 and all(self.store.post(c) for c in caps2)
        if posted:
            try:
                yield from self._fail_conj(rest, depth + 1)
            finally:
                self._restore(mark)
        else:
            # the match is unsatisfiable in the current store
            self._restore(mark)
            yield ()
            return
        if gcaps:
            # rejection branch: the match is impossible exactly when some
            # all-global captured equality is violated
            folded = gcaps[0]
            for c in gcaps[1:]:
                folded = And(folded, c)
            mark = self._mark()
            try:
                if self.store.post(negate(folded)):
                    yield ()
            finally:
                self._restore(mark)

    def _project_caps(self, caps):
        """Project captured equalities onto the global variables.

        A cap on a free, once-occurring local domain variable holds for
        every value of its global side, so it drops out of the negation:
        the match is impossible exactly when some all-global cap is
        violated.  Returns the global caps, or None when the projection
        is not exact (a local cap that actually constrains the globals).
        """
        from collections import Counter
        occurrences = Counter(v.id for c in caps for v in constraint_vars(c)
                              if self._is_local(v))
        gcaps = []
        for c in caps:
            locs = [v for v in constraint_vars(c) if self._is_local(v)]
            if not locs:
                gcaps.append(c)
                continue
            if not isinstance(c, Eq) or any(occurrences[v.id] > 1 for v in locs):
                return None
            sides = [c.a, c.b]
            loc = next(s for s in sides if isinstance(s, Var)
                       and self._is_local(s))
            other = sides[1] if loc is sides[0] else sides[0]
            dom = self.store.domain(loc)
            if dom is None:
                return None
            if isinstance(other, Atom):
                if not (isinstance(dom, AtomDomain) and dom.contains(other.name)):
                    return None
            elif isinstance(other, Int):
                if not (isinstance(dom, IntDomain) and dom.contains(other.value)):
                    return None
            elif isinstance(other, Var):
                odom = self.store.domain(other)
                if odom is None or type(odom) is not type(dom):
                    return None
                if self._is_local(other):
                    if dom.intersect(odom).empty:
                        return None
                elif dom.intersect(odom).size != odom.size:
                    return None  # dom does not cover every global value
            else:
                return None
        return gcaps or None

    def _fail_constraint(self, c, rest, depth):
        c = resolve_constraint(c, self.subst)
        if isinstance(c, TermEq):
            # failing a term equality is failing a unification problem
            yield from self._fail_match(_Match((c.a,), (c.b,)), rest, depth)
            return
        truth = self.store._try_ground(c)
        if truth is True:
            yield from self._fail_conj(rest, depth + 1)
            return
        if truth is False:
            yield ()
            return
        if all(not self._is_local(v) for v in constraint_vars(c)):
            mark = self._mark()
            try:
                if self.store.post(negate(c)):
                    yield ()
            finally:
                self._restore(mark)
        mark = self._mark()
        posted = self._post(c)
        if posted:
            try:
                yield from self._fail_conj(rest, depth + 1)
            finally:
                self._restore(mark)
        else:
            # constraint unsatisfiable here: the conjunction can never hold
            self._restore(mark)
            yield ()

    def _fail_naf(self, lit: UserLit, comp, rest, depth):
        """not_p with a defined complement: refute by proving p, or fail the
        remainder of the conjunction (not_p may hold)."""
        args = tuple(self.subst.resolve(a) for a in lit.args)
        from .terms import term_vars
        has_local = any(self._is_local(v) for a in args for v in term_vars(a))
        if not has_local:
            goal = UserLit(comp[0], args)
            mark = self._mark()
            try:
                for _ in self._prove([goal], depth + 1):
                    yield ()
            finally:
                self._restore(mark)
        yield from self._fail_conj(rest, depth + 1)

    def _fail_abducible(self, lit: UserLit, rest, depth):
        """Closed world at check time: every current hypothesis match must
        fail together with the rest.  The assumption is recorded as a
        denial so that later additions to the hypothesis set re-establish
        it (through `_consistency`); without that, an abducible buried
        under a defined predicate could revive a refuted constraint."""
        matches = [h for h in self.delta if h.lit.indicator == lit.indicator]
        conjs = []
        for h in matches:
            fresh = self._fresh_locals([lit] + list(rest))
            conjs.append([_Match(fresh[0].args, self._resolve_lit(h.lit).args)]
                         + fresh[1:])
        dmark = len(self.denials)
        self.denials.append((self._resolve_lit(lit), tuple(rest)))
        try:
            yield from self._refute_all(conjs, 0, depth + 1)
        finally:
            del self.denials[dmark:]

    # -- unification with constraint capture ---------------------------------

    def _capture_unify(self, args1, args2):
        """Like unification but collects store equalities instead of posting.

        Returns (ok, constraints, bound_vars); bindings are real and must be
        rolled back by the caller.
        """
        caps: list = []
        bound: list = []

        def go(a, b) -> bool:
            a = self.subst.walk(a)
            b = self.subst.walk(b)
            if isinstance(a, Var) and isinstance(b, Var) and a.id == b.id:
                return True
            da = isinstance(a, Var) and self.store.has_domain(a)
            db = isinstance(b, Var) and self.store.has_domain(b)
            if da or db:
                other = b if da else a
                if isinstance(other, Struct):
                    return False
                if isinstance(other, Var) and not (da and db):
                    plain, dom = (b, a) if da else (a, b)
                    self.subst.bind(plain, dom)
                    bound.append(plain)
                    return True
                caps.append(Eq(a, b))
                return True
            if isinstance(a, Var):
                if self.subst.occurs(a, b):
                    return False
                self.subst.bind(a, b)
                bound.append(a)
                return True
            if isinstance(b, Var):
                if self.subst.occurs(b, a):
                    return False
                self.subst.bind(b, a)
                bound.append(b)
                return True
            if isinstance(a, Int) and isinstance(b, Int):
                return a.value == b.value
            if isinstance(a, Atom) and isinstance(b, Atom):
                return a.name == b.name
            if isinstance(a, Struct) and isinstance(b, Struct):
                if a.functor != b.functor or a.arity != b.arity:
                    return False
                return all(go(x, y) for x, y in zip(a.args, b.args))
            return False

        ok = all(go(x, y) for x, y in zip(args1, args2))
        return ok, caps, bound


_SEARCH_STACK_BYTES = 512 * 1024 * 1024


def _in_big_stack_thread(factory):
    """Run a generator in a thread with a large stack, bridged lazily.

    Deep derivations build long chains of suspended generators; resuming
    such a chain recurses through the C stack, and the main thread's stack
    is fixed at process start.  A worker thread can be given as much stack
    as the search needs.  The bridge is strictly demand-driven: the worker
    computes one item per request, so laziness and early termination of
    the answer stream are preserved.
    """
    requests = queue.SimpleQueue()
    replies = queue.SimpleQueue()

    def worker():
        try:
            gen = factory()
        except BaseException as exc:
            replies.put(("raise", exc))
            return
        while True:
            if requests.get() == "close":
                gen.close()
                return
            try:
                item = next(gen)
            except StopIteration:
                replies.put(("stop", None))
                return
            except BaseException as exc:
                replies.put(("raise", exc))
                return
            replies.put(("item", item))

    old = threading.stack_size(_SEARCH_STACK_BYTES)
    try:
        thread = threading.Thread(target=worker, daemon=True)
        thread.start()
    finally:
        threading.stack_size(old)

    finished = False
    try:
        while True:
            requests.put("next")
            kind, value = replies.get()
            if kind == "item":
                yield value
            elif kind == "stop":
                finished = True
                return
            else:
                finished = True
                raise value
    finally:
        if not finished:
            # fire-and-forget: the worker runs the search generator's
            # cleanup when it picks this up; blocking here would deadlock
            # during interpreter shutdown, when daemon threads stop running
            requests.put("close")


def solve(theory: AbductiveTheory, goal, initial=(), config: Config = None):
    """Convenience wrapper: fresh solver, answer generator.

    The search runs in a dedicated thread with a large stack so that deep
    derivations do not overflow the interpreter's C stack.
    """
    return _in_big_stack_thread(lambda: Solver(theory, config).solve(goal, initial))
