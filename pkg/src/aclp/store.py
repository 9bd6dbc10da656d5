"""Finite-domain constraint store.

Domains are finite sets of integers (kept as sorted ranges) or of atoms.
Constraints are immutable values; the store holds the mutable state:
variable domains, the set of active constraints and a trail so that
snapshot/restore is exact.  Propagation runs to fixpoint after every post:
bounds consistency for the order constraints, arc consistency for equality
and disequality.  Disjunction is lazy: it wakes only when one branch is
refuted or the whole constraint is ground.

Scalar constraint arguments may carry an integer offset (``X + 3``), which
is what scheduling programs need to relate start times and durations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .terms import (AclpError, Atom, Int, Struct, Term, Var, VarCounter,
                    is_ground)


class StoreTypeError(AclpError):
    """Integer/atomic domain mix-up on one variable."""


class StaleMarkError(AclpError):
    """Restore to a mark that is no longer on the trail."""


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntDomain:
    """Sorted, disjoint, nonempty-gap inclusive ranges."""

    ranges: tuple  # tuple[(lo, hi)]

    @staticmethod
    def range(lo: int, hi: int) -> "IntDomain":
        return IntDomain(((lo, hi),) if lo <= hi else ())

    @staticmethod
    def of(values) -> "IntDomain":
        vs = sorted(set(values))
        ranges = []
        for v in vs:
            if ranges and v == ranges[-1][1] + 1:
                ranges[-1][1] = v
            else:
                ranges.append([v, v])
        return IntDomain(tuple((a, b) for a, b in ranges))

    @property
    def empty(self) -> bool:
        return not self.ranges

    @property
    def min(self) -> int:
        return self.ranges[0][0]

    @property
    def max(self) -> int:
        return self.ranges[-1][1]

    @property
    def size(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.ranges)

    def contains(self, v: int) -> bool:
        return any(lo <= v <= hi for lo, hi in self.ranges)

    def values(self) -> Iterator[int]:
        for lo, hi in self.ranges:
            yield from range(lo, hi + 1)

    @property
    def singleton(self) -> Optional[int]:
        if len(self.ranges) == 1 and self.ranges[0][0] == self.ranges[0][1]:
            return self.ranges[0][0]
        return None

    def shift(self, k: int) -> "IntDomain":
        if k == 0:
            return self
        return IntDomain(tuple((lo + k, hi + k) for lo, hi in self.ranges))

    def intersect(self, other: "IntDomain") -> "IntDomain":
        out = []
        for lo, hi in self.ranges:
            for lo2, hi2 in other.ranges:
                a, b = max(lo, lo2), min(hi, hi2)
                if a <= b:
                    out.append((a, b))
        return IntDomain(tuple(out))

    def clamp(self, lo: Optional[int], hi: Optional[int]) -> "IntDomain":
        out = []
        for a, b in self.ranges:
            if lo is not None:
                a = max(a, lo)
            if hi is not None:
                b = min(b, hi)
            if a <= b:
                out.append((a, b))
        return IntDomain(tuple(out))

    def remove(self, v: int) -> "IntDomain":
        out = []
        for lo, hi in self.ranges:
            if lo <= v <= hi:
                if lo <= v - 1:
                    out.append((lo, v - 1))
                if v + 1 <= hi:
                    out.append((v + 1, hi))
            else:
                out.append((lo, hi))
        return IntDomain(tuple(out))

    def __repr__(self):
        return "{" + ",".join(f"{lo}..{hi}" if lo != hi else str(lo)
                              for lo, hi in self.ranges) + "}"


@dataclass(frozen=True)
class AtomDomain:
    """Finite atom set; declaration order is the labelling order."""

    atoms: tuple  # tuple[str]

    @staticmethod
    def of(names) -> "AtomDomain":
        seen, out = set(), []
        for n in names:
            if n not in seen:
                seen.add(n)
                out.append(n)
        return AtomDomain(tuple(out))

    @property
    def empty(self) -> bool:
        return not self.atoms

    @property
    def size(self) -> int:
        return len(self.atoms)

    def contains(self, name: str) -> bool:
        return name in self.atoms

    @property
    def singleton(self) -> Optional[str]:
        return self.atoms[0] if len(self.atoms) == 1 else None

    def intersect(self, other: "AtomDomain") -> "AtomDomain":
        return AtomDomain(tuple(a for a in self.atoms if a in set(other.atoms)))

    def remove(self, name: str) -> "AtomDomain":
        return AtomDomain(tuple(a for a in self.atoms if a != name))

    def values(self) -> Iterator[str]:
        yield from self.atoms

    def __repr__(self):
        return "{" + ",".join(self.atoms) + "}"


Domain = Union[IntDomain, AtomDomain]


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Eq:        # T1 #= T2
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} #= {self.b!r}"


@dataclass(frozen=True)
class Neq:       # T1 ## T2
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} ## {self.b!r}"


@dataclass(frozen=True)
class Lt:        # T1 #< T2
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} #< {self.b!r}"


@dataclass(frozen=True)
class Le:        # T1 #<= T2
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} #<= {self.b!r}"


@dataclass(frozen=True)
class Gt:        # T1 #> T2
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} #> {self.b!r}"


@dataclass(frozen=True)
class Ge:        # T1 #>= T2
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} #>= {self.b!r}"


@dataclass(frozen=True)
class TermEq:    # T1 ##= T2 (variables at most one level inside a functor)
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} ##= {self.b!r}"


@dataclass(frozen=True)
class TermNeq:   # negation of ##=; internal only, no surface syntax
    a: Term
    b: Term

    def __repr__(self):
        return f"{self.a!r} ##\\= {self.b!r}"


@dataclass(frozen=True)
class And:       # C1 #/\ C2
    a: "Constraint"
    b: "Constraint"

    def __repr__(self):
        return f"({self.a!r} #/\\ {self.b!r})"


@dataclass(frozen=True)
class Or:        # C1 #\/ C2
    a: "Constraint"
    b: "Constraint"

    def __repr__(self):
        return f"({self.a!r} #\\/ {self.b!r})"


Constraint = Union[Eq, Neq, Lt, Le, Gt, Ge, TermEq, TermNeq, And, Or]

_SCALAR = (Eq, Neq, Lt, Le, Gt, Ge)
_ARITH = (Lt, Le, Gt, Ge)


def negate(c: Constraint) -> Constraint:
    """Mathematical negation; an involution on the constraint language."""
    if isinstance(c, Eq):
        return Neq(c.a, c.b)
    if isinstance(c, Neq):
        return Eq(c.a, c.b)
    if isinstance(c, Lt):
        return Ge(c.a, c.b)
    if isinstance(c, Ge):
        return Lt(c.a, c.b)
    if isinstance(c, Le):
        return Gt(c.a, c.b)
    if isinstance(c, Gt):
        return Le(c.a, c.b)
    if isinstance(c, TermEq):
        return TermNeq(c.a, c.b)
    if isinstance(c, TermNeq):
        return TermEq(c.a, c.b)
    if isinstance(c, And):
        return Or(negate(c.a), negate(c.b))
    if isinstance(c, Or):
        return And(negate(c.a), negate(c.b))
    raise TypeError(c)


def constraint_vars(c: Constraint) -> Iterator[Var]:
    from .terms import term_vars
    if isinstance(c, (And, Or)):
        yield from constraint_vars(c.a)
        yield from constraint_vars(c.b)
    else:
        yield from term_vars(c.a)
        yield from term_vars(c.b)


def resolve_constraint(c: Constraint, subst) -> Constraint:
    if isinstance(c, (And, Or)):
        return type(c)(resolve_constraint(c.a, subst),
                       resolve_constraint(c.b, subst))
    return type(c)(subst.resolve(c.a), subst.resolve(c.b))


def rename_constraint(c: Constraint, mapping: dict, counter: VarCounter):
    from .terms import _rename_term
    if isinstance(c, (And, Or)):
        return type(c)(rename_constraint(c.a, mapping, counter),
                       rename_constraint(c.b, mapping, counter))
    return type(c)(_rename_term(c.a, mapping, counter),
                   _rename_term(c.b, mapping, counter))


# ---------------------------------------------------------------------------
# Scalar operands: base term plus integer offset
# ---------------------------------------------------------------------------

def split_offset(t: Term):
    """Normalize `X + 3` / `X - 1` / plain terms to (base, offset).

    Returns None for terms that are not scalar operands (nested arithmetic
    over compounds and the like).
    """
    if isinstance(t, Struct) and t.functor in ("+", "-") and t.arity == 2:
        base, off = t.args
        if isinstance(base, Int) and isinstance(off, Int):
            v = base.value + off.value if t.functor == "+" else base.value - off.value
            return Int(v), 0
        if isinstance(off, Int) and isinstance(base, (Var, Int)):
            k = off.value if t.functor == "+" else -off.value
            inner = split_offset(base)
            if inner is None:
                return None
            b, k0 = inner
            return b, k0 + k
        return None
    if isinstance(t, (Var, Int, Atom)):
        return t, 0
    return None


# ---------------------------------------------------------------------------
# The store
# ---------------------------------------------------------------------------

ACTIVE = 0
ENTAILED = 1
DELEGATED = 2  # replaced by posted sub-constraints (And, decided Or, TermEq)

DEFAULT_LO = -10_000_000
DEFAULT_HI = 10_000_000


class ConstraintStore:
    def __init__(self, default_lo: int = DEFAULT_LO, default_hi: int = DEFAULT_HI):
        self.default_lo = default_lo
        self.default_hi = default_hi
        self.domains: dict[int, Domain] = {}
        self.var_names: dict[int, str] = {}
        self.constraints: list[Constraint] = []
        self.states: list[int] = []
        self.consistent = True
        self._trail: list[tuple] = []
        self._probing = 0             # nesting depth of satisfiability probes
        self._writes = 0              # domain-write counter for propagation

    # -- trail ---------------------------------------------------------------

    def snapshot(self) -> tuple:
        return (len(self._trail), len(self.constraints))

    def restore(self, mark: tuple) -> None:
        tlen, clen = mark
        if tlen > len(self._trail) or clen > len(self.constraints):
            raise StaleMarkError(f"stale mark {mark}")
        while len(self._trail) > tlen:
            op = self._trail.pop()
            kind = op[0]
            if kind == "dom":
                _, vid, old = op
                if old is None:
                    del self.domains[vid]
                    self.var_names.pop(vid, None)
                else:
                    self.domains[vid] = old
            elif kind == "state":
                _, idx, old = op
                self.states[idx] = old
            elif kind == "flag":
                self.consistent = op[1]
        del self.constraints[clen:]
        del self.states[clen:]

    def _set_domain(self, v: Var, dom: Domain) -> None:
        old = self.domains.get(v.id)
        self._trail.append(("dom", v.id, old))
        self.domains[v.id] = dom
        self._writes += 1
        if old is None:
            self.var_names[v.id] = v.name

    def _set_state(self, idx: int, state: int) -> None:
        self._trail.append(("state", idx, self.states[idx]))
        self.states[idx] = state

    def _fail(self) -> bool:
        if self.consistent:
            self._trail.append(("flag", True))
            self.consistent = False
        return False

    # -- declarations --------------------------------------------------------

    def has_domain(self, v: Var) -> bool:
        return v.id in self.domains

    def domain(self, v: Var) -> Optional[Domain]:
        return self.domains.get(v.id)

    def declare(self, v: Var, dom: Domain) -> bool:
        """Set or intersect a variable's domain; False when it empties."""
        cur = self.domains.get(v.id)
        if cur is not None:
            if type(cur) is not type(dom):
                raise StoreTypeError(
                    f"variable {v.name} redeclared with a different domain kind")
            dom = cur.intersect(dom)
        self._set_domain(v, dom)
        if dom.empty:
            return self._fail()
        return self._propagate()

    def declare_default(self, v: Var) -> bool:
        if self.has_domain(v):
            return True
        return self.declare(v, IntDomain.range(self.default_lo, self.default_hi))

    # -- posting and propagation ---------------------------------------------

    def post(self, c: Constraint) -> bool:
        """Add a constraint and propagate to fixpoint; False means UNSAT."""
        if not self.consistent:
            return False
        if isinstance(c, And):
            return self.post(c.a) and self.post(c.b)
        if isinstance(c, TermEq):
            return self._post_term_eq(c)
        if isinstance(c, TermNeq):
            return self._post_term_neq(c)
        if isinstance(c, _SCALAR):
            if not self._prepare_scalar(c):
                return False
        self.constraints.append(c)
        self.states.append(ACTIVE)
        return self._propagate()

    def _prepare_scalar(self, c) -> bool:
        """Give default integer domains to undeclared arithmetic variables."""
        sa, sb = split_offset(c.a), split_offset(c.b)
        if sa is None or sb is None:
            raise StoreTypeError(f"non-scalar operand in {c!r}")
        for (base, _), (obase, _) in ((sa, sb), (sb, sa)):
            if isinstance(base, Var) and not self.has_domain(base):
                atomish = (isinstance(obase, Atom)
                           or (isinstance(obase, Var)
                               and isinstance(self.domains.get(obase.id), AtomDomain)))
                if isinstance(c, _ARITH) or not atomish:
                    if not self.declare_default(base):
                        return False
                elif isinstance(c, Eq) and isinstance(obase, Atom):
                    if not self.declare(base, AtomDomain.of([obase.name])):
                        return False
                # Neq against an atom with an undeclared variable stays
                # pending until the variable gets a domain.
        return True

    def _post_term_eq(self, c: TermEq) -> bool:
        a, b = c.a, c.b
        if isinstance(a, Var) and not self.has_domain(a):
            # plain variable: the engine binds these before posting; a leftover
            # one stays pending and is re-examined on later posts
            self.constraints.append(c)
            self.states.append(ACTIVE)
            return self._propagate()
        if isinstance(b, Var) and not self.has_domain(b):
            return self._post_term_eq(TermEq(b, a))
        if isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or a.arity != b.arity:
                return self._fail()
            for x, y in zip(a.args, b.args):
                if isinstance(x, Struct) or isinstance(y, Struct):
                    if is_ground(x) and is_ground(y):
                        if x != y:
                            return self._fail()
                        continue
                    raise StoreTypeError(
                        f"##= argument nested too deep: {x!r} / {y!r}")
                if not self.post(Eq(x, y)):
                    return False
            return True
        if isinstance(a, Struct) or isinstance(b, Struct):
            return self._fail()  # compound against scalar never equal
        return self.post(Eq(a, b))

    def _post_term_neq(self, c: TermNeq) -> bool:
        a, b = c.a, c.b
        if (isinstance(a, Var) and not self.has_domain(a)) or \
           (isinstance(b, Var) and not self.has_domain(b)):
            self.constraints.append(c)
            self.states.append(ACTIVE)
            return self._propagate()
        if isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or a.arity != b.arity:
                return True  # entailed
            disjuncts = []
            for x, y in zip(a.args, b.args):
                if is_ground(x) and is_ground(y):
                    if x != y:
                        return True  # some argument pair already differs
                    continue
                disjuncts.append(Neq(x, y))
            if not disjuncts:
                return self._fail()  # terms forced identical
            d = disjuncts[0]
            for extra in disjuncts[1:]:
                d = Or(d, extra)
            return self.post(d)
        if isinstance(a, Struct) or isinstance(b, Struct):
            return True  # compound vs scalar: always different
        return self.post(Neq(a, b))

    def _propagate(self) -> bool:
        if not self.consistent:
            return False
        changed = True
        while changed:
            changed = False
            for idx in range(len(self.constraints)):
                if self.states[idx] != ACTIVE:
                    continue
                writes = self._writes
                res = self._prune(idx, self.constraints[idx])
                if res == "fail":
                    return self._fail()
                if res == "entail":
                    self._set_state(idx, ENTAILED)
                # a pruner may narrow a domain and still report entailment;
                # any domain write must rewake the other constraints
                if res == "change" or self._writes != writes:
                    changed = True
        return True

    # -- individual propagators ----------------------------------------------

    def _value(self, base: Term):
        """Fixed value of a scalar base term, or None."""
        if isinstance(base, Int):
            return base.value
        if isinstance(base, Atom):
            return base.name
        dom = self.domains.get(base.id)
        if dom is None:
            return None
        return dom.singleton

    def _bounds(self, base: Term, off: int):
        if isinstance(base, Int):
            return base.value + off, base.value + off
        if isinstance(base, Var):
            dom = self.domains.get(base.id)
            if isinstance(dom, IntDomain) and not dom.empty:
                return dom.min + off, dom.max + off
        return None

    def _clamp_var(self, base, off, lo, hi) -> str:
        """Restrict base+off to [lo, hi]; returns change/none/fail."""
        if isinstance(base, Int):
            v = base.value + off
            ok = (lo is None or v >= lo) and (hi is None or v <= hi)
            return "none" if ok else "fail"
        dom = self.domains.get(base.id)
        if not isinstance(dom, IntDomain):
            return "none"
        new = dom.clamp(None if lo is None else lo - off,
                        None if hi is None else hi - off)
        if new.empty:
            return "fail"
        if new != dom:
            self._set_domain(base, new)
            return "change"
        return "none"

    def _prune(self, idx: int, c: Constraint) -> str:
        if isinstance(c, (TermEq, TermNeq)):
            return self._prune_pending_term(idx, c)
        if isinstance(c, Or):
            return self._prune_or(idx, c)
        sa, sb = split_offset(c.a), split_offset(c.b)
        if sa is None or sb is None:
            raise StoreTypeError(f"non-scalar operand in {c!r}")
        (a, ka), (b, kb) = sa, sb
        if isinstance(c, Eq):
            return self._prune_eq(a, ka, b, kb)
        if isinstance(c, Neq):
            return self._prune_neq(a, ka, b, kb)
        if isinstance(c, Lt):
            return self._prune_le(a, ka, b, kb - 1)
        if isinstance(c, Le):
            return self._prune_le(a, ka, b, kb)
        if isinstance(c, Gt):
            return self._prune_le(b, kb, a, ka - 1)
        if isinstance(c, Ge):
            return self._prune_le(b, kb, a, ka)
        raise TypeError(c)

    def _prune_eq(self, a, ka, b, kb) -> str:
        if isinstance(a, Var) and isinstance(b, Var) and a.id == b.id:
            return "entail" if ka == kb else "fail"
        da = self.domains.get(a.id) if isinstance(a, Var) else None
        db = self.domains.get(b.id) if isinstance(b, Var) else None
        if isinstance(a, Var) and da is None:
            return "none"  # untyped; wait
        if isinstance(b, Var) and db is None:
            return "none"
        # atom cases (offsets must be zero for atoms to make sense)
        if isinstance(a, Atom) or isinstance(b, Atom) or \
           isinstance(da, AtomDomain) or isinstance(db, AtomDomain):
            if ka or kb:
                return "fail"
            return self._prune_eq_atomish(a, da, b, db)
        changed = False
        if isinstance(a, Var) and isinstance(b, Var):
            sa = da.shift(ka)
            sb = db.shift(kb)
            common = sa.intersect(sb)
            if common.empty:
                return "fail"
            na, nb = common.shift(-ka), common.shift(-kb)
            if na != da:
                self._set_domain(a, na)
                changed = True
            if nb != db:
                self._set_domain(b, nb)
                changed = True
            if common.singleton is not None:
                return "entail"
            return "change" if changed else "none"
        if isinstance(a, Int) and isinstance(b, Int):
            return "entail" if a.value + ka == b.value + kb else "fail"
        # one side fixed integer
        if isinstance(a, Int):
            a, ka, b, kb, da, db = b, kb, a, ka, db, da
        v = b.value + kb - ka
        if not da.contains(v):
            return "fail"
        if da.singleton == v:
            return "entail"
        self._set_domain(a, IntDomain.range(v, v))
        return "entail"

    def _prune_eq_atomish(self, a, da, b, db) -> str:
        if isinstance(a, Atom) and isinstance(b, Atom):
            return "entail" if a.name == b.name else "fail"
        if isinstance(a, Atom):
            a, da, b, db = b, db, a, da
        if isinstance(b, Atom):
            if not isinstance(da, AtomDomain):
                return "fail"
            if not da.contains(b.name):
                return "fail"
            if da.singleton == b.name:
                return "entail"
            self._set_domain(a, AtomDomain.of([b.name]))
            return "entail"
        if not isinstance(da, AtomDomain) or not isinstance(db, AtomDomain):
            return "fail"  # atom domain against integer domain
        common = da.intersect(db)
        if common.empty:
            return "fail"
        changed = False
        if common != da:
            self._set_domain(a, common)
            changed = True
        recomputed = AtomDomain.of([x for x in db.atoms if x in common.atoms])
        if recomputed != db:
            self._set_domain(b, recomputed)
            changed = True
        if common.singleton is not None:
            return "entail"
        return "change" if changed else "none"

    def _prune_neq(self, a, ka, b, kb) -> str:
        if isinstance(a, Var) and isinstance(b, Var) and a.id == b.id:
            return "fail" if ka == kb else "entail"
        va = self._value(a) if not isinstance(a, Var) or self.has_domain(a) else None
        vb = self._value(b) if not isinstance(b, Var) or self.has_domain(b) else None
        if isinstance(va, str) or isinstance(vb, str):
            if ka or kb:
                return "entail"
        else:
            va = None if va is None else va + ka
            vb = None if vb is None else vb + kb
        if va is not None and vb is not None:
            if type(va) is not type(vb):
                return "entail"
            return "fail" if va == vb else "entail"
        # disjoint domains entail the disequality
        ba = self._bounds(a, ka) if not isinstance(a, Atom) else None
        bb = self._bounds(b, kb) if not isinstance(b, Atom) else None
        if ba and bb and (ba[1] < bb[0] or bb[1] < ba[0]):
            return "entail"
        if va is None and vb is None:
            return "none"
        if va is None:
            a, ka, fixed = a, ka, vb
        else:
            a, ka, fixed = b, kb, va
        dom = self.domains.get(a.id)
        if dom is None:
            return "none"
        if isinstance(dom, AtomDomain):
            if not isinstance(fixed, str):
                return "entail"
            if dom.contains(fixed):
                new = dom.remove(fixed)
                if new.empty:
                    return "fail"
                self._set_domain(a, new)
            return "entail"
        if not isinstance(fixed, int):
            return "entail"
        v = fixed - ka
        if dom.contains(v):
            new = dom.remove(v)
            if new.empty:
                return "fail"
            self._set_domain(a, new)
        return "entail"

    def _prune_le(self, a, ka, b, kb) -> str:
        """a + ka <= b + kb with bounds consistency."""
        if isinstance(a, Atom) or isinstance(b, Atom):
            raise StoreTypeError("order constraint over atoms")
        if isinstance(a, Var) and isinstance(b, Var) and a.id == b.id:
            return "entail" if ka <= kb else "fail"
        ba, bb = self._bounds(a, ka), self._bounds(b, kb)
        if ba is None or bb is None:
            return "none"
        if ba[1] <= bb[0]:
            return "entail"
        r1 = self._clamp_var(a, ka, None, bb[1])
        if r1 == "fail":
            return "fail"
        r2 = self._clamp_var(b, kb, ba[0], None)
        if r2 == "fail":
            return "fail"
        ba, bb = self._bounds(a, ka), self._bounds(b, kb)
        if ba and bb and ba[1] <= bb[0]:
            return "entail"
        return "change" if "change" in (r1, r2) else "none"

    def _prune_pending_term(self, idx: int, c) -> str:
        # woken when a previously untyped variable has acquired a domain
        untyped = any(isinstance(t, Var) and not self.has_domain(t)
                      for t in (c.a, c.b))
        if untyped:
            return "none"
        self._set_state(idx, DELEGATED)
        ok = self.post(TermEq(c.a, c.b)) if isinstance(c, TermEq) \
            else self.post(TermNeq(c.a, c.b))
        return "none" if ok else "fail"

    def _prune_or(self, idx: int, c: Or) -> str:
        ga, gb = self._try_ground(c.a), self._try_ground(c.b)
        if ga is True or gb is True:
            return "entail"
        if ga is False and gb is False:
            return "fail"
        if self._probing:
            # a satisfiability probe is already running; probing again from
            # inside it would re-enter this disjunction without end, so fall
            # back to the ground checks above and stay suspended
            if ga is False:
                self._set_state(idx, DELEGATED)
                return "none" if self.post(c.b) else "fail"
            if gb is False:
                self._set_state(idx, DELEGATED)
                return "none" if self.post(c.a) else "fail"
            return "none"
        sat_a = self._test_sat(c.a) if ga is None else False
        sat_b = self._test_sat(c.b) if gb is None else False
        if not sat_a and not sat_b:
            return "fail"
        if not sat_a:
            self._set_state(idx, DELEGATED)
            return "none" if self.post(c.b) else "fail"
        if not sat_b:
            self._set_state(idx, DELEGATED)
            return "none" if self.post(c.a) else "fail"
        return "none"

    def _try_ground(self, c: Constraint):
        """Truth value of a constraint whose operands are all fixed, else None."""
        if isinstance(c, And):
            a, b = self._try_ground(c.a), self._try_ground(c.b)
            if a is False or b is False:
                return False
            if a is True and b is True:
                return True
            return None
        if isinstance(c, Or):
            a, b = self._try_ground(c.a), self._try_ground(c.b)
            if a is True or b is True:
                return True
            if a is False and b is False:
                return False
            return None
        if isinstance(c, (TermEq, TermNeq)):
            if not (is_ground(c.a) and is_ground(c.b)):
                return None
            eq = c.a == c.b
            return eq if isinstance(c, TermEq) else not eq
        sa, sb = split_offset(c.a), split_offset(c.b)
        if sa is None or sb is None:
            return None
        va = self._value(sa[0])
        vb = self._value(sb[0])
        if va is None or vb is None:
            return None
        if isinstance(va, int):
            va += sa[1]
        if isinstance(vb, int):
            vb += sb[1]
        if type(va) is not type(vb):
            return not isinstance(c, Eq) if isinstance(c, (Eq, Neq)) else False
        if isinstance(c, Eq):
            return va == vb
        if isinstance(c, Neq):
            return va != vb
        if isinstance(c, Lt):
            return va < vb
        if isinstance(c, Le):
            return va <= vb
        if isinstance(c, Gt):
            return va > vb
        if isinstance(c, Ge):
            return va >= vb
        raise TypeError(c)

    def _test_sat(self, c: Constraint) -> bool:
        mark = self.snapshot()
        writes = self._writes
        self._probing += 1
        try:
            return self.post(c)
        finally:
            self._probing -= 1
            self.restore(mark)
            # the probe is fully undone, so its domain writes must not
            # rewake the enclosing propagation sweep
            self._writes = writes

    # -- queries -------------------------------------------------------------

    def entails(self, c: Constraint) -> str:
        """'true' / 'false' / 'unknown', decided by the complement test."""
        if not self._test_sat(c):
            return "false"
        if not self._test_sat(negate(c)):
            return "true"
        return "unknown"

    # -- labelling -----------------------------------------------------------

    def label(self, vars: Sequence = (), strategy: str = "input_order",
              rng=None, prefer: dict = None) -> Iterator[dict]:
        """Depth-first enumeration of ground valuations of `vars`.

        Yields dicts mapping each Var to an Int or Atom term.  The search
        propagates after every assignment; value order is ascending for
        integers and declaration order for atoms, optionally shuffled by
        `rng` for randomized harness runs.  `prefer` maps variable ids to
        values to try first (used by minimal-change rescheduling).
        """
        vs = [v for v in vars if self.has_domain(v)]
        yield from self._label(vs, strategy, rng, prefer or {}, {})

    def _label(self, vs, strategy, rng, prefer, acc) -> Iterator[dict]:
        if not self.consistent:
            return
        pending = [v for v in vs if v.id not in acc]
        if not pending:
            yield dict(acc)
            return
        if strategy == "first_fail":
            pending.sort(key=lambda v: (self.domains[v.id].size, v.id))
        v = pending[0]
        values = list(self.domains[v.id].values())
        if rng is not None:
            rng.shuffle(values)
        first = prefer.get(v.id)
        if first is not None and first in values:
            values.remove(first)
            values.insert(0, first)
        for val in values:
            term = Int(val) if isinstance(val, int) else Atom(val)
            mark = self.snapshot()
            if self.post(Eq(v, term)):
                acc[v.id] = term
                yield from self._label(vs, strategy, rng, prefer, acc)
                del acc[v.id]
            self.restore(mark)

    # -- misc ----------------------------------------------------------------

    def clone(self) -> "ConstraintStore":
        out = ConstraintStore(self.default_lo, self.default_hi)
        out.domains = dict(self.domains)
        out.var_names = dict(self.var_names)
        out.constraints = list(self.constraints)
        out.states = list(self.states)
        out.consistent = self.consistent
        return out

    def active_constraints(self) -> list:
        return [c for c, s in zip(self.constraints, self.states) if s == ACTIVE]

    def render(self) -> str:
        """Stable text form: domains by variable id, then residual constraints."""
        lines = []
        for vid in sorted(self.domains):
            name = self.var_names.get(vid, f"V{vid}")
            lines.append(f"{name} ∈ {self.domains[vid]!r}")
        for c in self.active_constraints():
            lines.append(repr(c))
        return "\n".join(lines)
