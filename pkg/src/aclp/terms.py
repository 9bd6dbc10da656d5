"""Terms, literals, clauses and substitution-based unification.

Terms are immutable; all mutation during a derivation goes through a
Substitution (a trailed binding map) so that backtracking can undo it.
Variables attached to a finite domain are never bound directly: equating
them is delegated to the constraint store so propagation sees it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union


class AclpError(Exception):
    """Base class for errors raised by the engine and its front ends."""


class UnknownPredicateError(AclpError):
    def __init__(self, name: str, arity: int):
        super().__init__(f"unknown predicate {name}/{arity}")
        self.name = name
        self.arity = arity


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    id: int

    def __repr__(self):
        return f"_{self.name}#{self.id}"


@dataclass(frozen=True)
class Int:
    value: int

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.functor:
            raise ValueError("empty functor")

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self):
        inner = ",".join(map(repr, self.args))
        return f"{self.functor}({inner})"


Term = Union[Var, Int, Atom, Struct]


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Struct):
        for a in t.args:
            yield from term_vars(a)


def is_ground(t: Term) -> bool:
    return next(term_vars(t), None) is None


class VarCounter:
    """Source of globally fresh variable ids for one derivation."""

    def __init__(self, start: int = 0):
        self._it = itertools.count(start)

    def fresh(self, name: str = "_G") -> Var:
        return Var(name, next(self._it))


# ---------------------------------------------------------------------------
# Literals, clauses, integrity constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UserLit:
    name: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def indicator(self) -> tuple:
        return (self.name, len(self.args))

    def __repr__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(map(repr, self.args))})"


@dataclass(frozen=True)
class ConstraintLit:
    constraint: "object"  # store.Constraint; kept loose to avoid a cycle

    def __repr__(self):
        return repr(self.constraint)


@dataclass(frozen=True)
class NafLit:
    """Surface syntax only: compiled away before execution."""

    inner: UserLit

    def __repr__(self):
        return f"not({self.inner!r})"


Literal = Union[UserLit, ConstraintLit, NafLit]


@dataclass(frozen=True)
class DomainDecl:
    """A `Var :: Domain` goal; behaves like a body literal."""

    var: Term
    lo: Term
    hi: Term
    atoms: Optional[tuple] = None  # set when declared over an atom list

    def __repr__(self):
        if self.atoms is not None:
            return f"{self.var!r} :: [{','.join(map(repr, self.atoms))}]"
        return f"{self.var!r} :: {self.lo!r}..{self.hi!r}"


@dataclass(frozen=True)
class Clause:
    head: UserLit
    body: tuple

    def __repr__(self):
        if not self.body:
            return f"{self.head!r}."
        return f"{self.head!r} :- {', '.join(map(repr, self.body))}."


@dataclass(frozen=True)
class IntegrityConstraint:
    body: tuple

    def __repr__(self):
        return f"ic :- {', '.join(map(repr, self.body))}."


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

class Substitution:
    """Trailed binding map from variable id to term.

    `bind` records each binding on a trail so `undo_to` can roll back to any
    earlier mark, which is how choice points are implemented.
    """

    def __init__(self):
        self.bindings: dict[int, Term] = {}
        self.trail: list[int] = []

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.bindings[self.trail.pop()]

    def bind(self, v: Var, t: Term) -> None:
        assert v.id not in self.bindings
        self.bindings[v.id] = t
        self.trail.append(v.id)

    def walk(self, t: Term) -> Term:
        """Follow variable bindings one level (until unbound var or non-var)."""
        while isinstance(t, Var):
            nxt = self.bindings.get(t.id)
            if nxt is None:
                return t
            t = nxt
        return t

    def resolve(self, t: Term) -> Term:
        """Fully apply the substitution to a term."""
        t = self.walk(t)
        if isinstance(t, Struct):
            return Struct(t.functor, tuple(self.resolve(a) for a in t.args))
        return t

    def resolve_literal(self, lit: Literal) -> Literal:
        from . import store as _store
        if isinstance(lit, UserLit):
            return UserLit(lit.name, tuple(self.resolve(a) for a in lit.args))
        if isinstance(lit, ConstraintLit):
            return ConstraintLit(_store.resolve_constraint(lit.constraint, self))
        if isinstance(lit, NafLit):
            return NafLit(self.resolve_literal(lit.inner))
        if isinstance(lit, DomainDecl):
            return DomainDecl(self.resolve(lit.var), self.resolve(lit.lo),
                              self.resolve(lit.hi), lit.atoms)
        raise TypeError(lit)

    def occurs(self, v: Var, t: Term) -> bool:
        t = self.walk(t)
        if isinstance(t, Var):
            return t.id == v.id
        if isinstance(t, Struct):
            return any(self.occurs(v, a) for a in t.args)
        return False

    def as_dict(self) -> dict[int, Term]:
        return {vid: self.resolve(t) for vid, t in self.bindings.items()}


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------

def unify_terms(t1: Term, t2: Term, subst: Substitution, store) -> bool:
    """Unify in place; emits equality constraints for domain variables.

    Returns False on structural mismatch, occurs-check violation or when a
    delegated equality makes the store unsatisfiable.  Caller is responsible
    for undoing subst/store marks on failure.
    """
    from .store import Eq, TermEq

    t1 = subst.walk(t1)
    t2 = subst.walk(t2)
    if isinstance(t1, Var) and isinstance(t2, Var) and t1.id == t2.id:
        return True

    d1 = isinstance(t1, Var) and store.has_domain(t1)
    d2 = isinstance(t2, Var) and store.has_domain(t2)
    if d1 or d2:
        # Domain-constrained variables are equated through the store.
        other = t2 if d1 else t1
        if isinstance(other, Struct):
            return False  # domain values are scalars
        if isinstance(other, Var) and not (d1 and d2):
            # plain variable: bind it to the domain variable instead
            plain, dom = (t2, t1) if d1 else (t1, t2)
            subst.bind(plain, dom)
            return True
        return store.post(Eq(t1, t2))

    if isinstance(t1, Var):
        if subst.occurs(t1, t2):
            return False
        subst.bind(t1, t2)
        return True
    if isinstance(t2, Var):
        if subst.occurs(t2, t1):
            return False
        subst.bind(t2, t1)
        return True
    if isinstance(t1, Int) and isinstance(t2, Int):
        return t1.value == t2.value
    if isinstance(t1, Atom) and isinstance(t2, Atom):
        return t1.name == t2.name
    if isinstance(t1, Struct) and isinstance(t2, Struct):
        if t1.functor != t2.functor or t1.arity != t2.arity:
            return False
        return all(unify_terms(a, b, subst, store)
                   for a, b in zip(t1.args, t2.args))
    return False


def unify(t1: Term, t2: Term, store) -> Optional[tuple]:
    """Functional facade: returns (Substitution, store) or None on failure."""
    subst = Substitution()
    smark = store.snapshot()
    if unify_terms(t1, t2, subst, store):
        return subst, store
    store.restore(smark)
    return None


# ---------------------------------------------------------------------------
# Standardize apart
# ---------------------------------------------------------------------------

def _rename_term(t: Term, mapping: dict, counter: VarCounter) -> Term:
    if isinstance(t, Var):
        if t.id not in mapping:
            mapping[t.id] = counter.fresh(t.name)
        return mapping[t.id]
    if isinstance(t, Struct):
        return Struct(t.functor, tuple(_rename_term(a, mapping, counter)
                                       for a in t.args))
    return t


def _rename_literal(lit: Literal, mapping: dict, counter: VarCounter) -> Literal:
    from .store import rename_constraint
    if isinstance(lit, UserLit):
        return UserLit(lit.name, tuple(_rename_term(a, mapping, counter)
                                       for a in lit.args))
    if isinstance(lit, ConstraintLit):
        return ConstraintLit(rename_constraint(lit.constraint, mapping, counter))
    if isinstance(lit, NafLit):
        return NafLit(_rename_literal(lit.inner, mapping, counter))
    if isinstance(lit, DomainDecl):
        return DomainDecl(_rename_term(lit.var, mapping, counter),
                          _rename_term(lit.lo, mapping, counter),
                          _rename_term(lit.hi, mapping, counter),
                          lit.atoms)
    raise TypeError(lit)


def standardize_apart(clause: Clause, counter: VarCounter) -> tuple:
    """Fresh copy of a clause; returns (clause, renamed-variable list)."""
    mapping: dict[int, Var] = {}
    head = _rename_literal(clause.head, mapping, counter)
    body = tuple(_rename_literal(b, mapping, counter) for b in clause.body)
    return Clause(head, body), list(mapping.values())


def standardize_ic(ic: IntegrityConstraint, counter: VarCounter) -> tuple:
    mapping: dict[int, Var] = {}
    body = tuple(_rename_literal(b, mapping, counter) for b in ic.body)
    return IntegrityConstraint(body), list(mapping.values())


def rename_literal(lit: Literal, counter: VarCounter) -> Literal:
    return _rename_literal(lit, {}, counter)


def rename_conjunction(lits, counter: VarCounter) -> list:
    """Rename a goal conjunction apart with one shared variable mapping."""
    mapping: dict[int, Var] = {}
    return [_rename_literal(l, mapping, counter) for l in lits]
