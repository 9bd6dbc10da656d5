"""Parser and pretty-printer for ACLP source text.

Prolog-like clause syntax with the finite-domain constraint operators
(`##`, `#=`, `#<`, `#<=`, `#>`, `#>=`, `##=`, `#/\\`, `#\\/`), `::` domain
declarations, `not` for negation as failure and `%` line comments.  See
docs/syntax.md for the grammar.

Facts of the form abducible_predicate(name/arity) populate the abducible
set; rules with head `ic` become integrity constraints in source order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .store import And, Constraint, Eq, Ge, Gt, Le, Lt, Neq, Or, TermEq
from .terms import (AclpError, Atom, Clause, ConstraintLit, DomainDecl, Int,
                    IntegrityConstraint, NafLit, Struct, UserLit, Var)
from .theory import AbductiveTheory


@dataclass
class ParseError:
    offset: int
    line: int
    column: int
    message: str
    category: str = "syntax"

    def __str__(self):
        return f"{self.line}:{self.column}: {self.category} error: {self.message}"


class ParseFailure(AclpError):
    def __init__(self, errors):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<op>:-|::|\.\.|\#\#=|\#<=|\#>=|\#/\\|\#\\/|\#\#|\#=|\#<|\#>|[(),.\[\]/+\-|])
  | (?P<int>\d+)
  | (?P<var>[A-Z_]\w*)
  | (?P<name>[a-z]\w*)
""", re.VERBOSE)

_CMP_OPS = ("##=", "##", "#=", "#<", "#<=", "#>", "#>=")


@dataclass
class Token:
    kind: str  # op / int / var / name / eof
    text: str
    offset: int


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseFailure([_error(text, pos, f"illegal character {text[pos]!r}")])
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append(Token(m.lastgroup, m.group(), m.start()))
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _error(text: str, offset: int, message: str, category: str = "syntax"):
    line = text.count("\n", 0, offset) + 1
    column = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return ParseError(offset, line, column, message, category)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.varmap: dict[str, Var] = {}
        self.var_ix = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def at_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            self.fail(f"expected {op!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def fail(self, message: str):
        raise ParseFailure([_error(self.text, self.tok.offset, message)])

    def reset_vars(self):
        # per-clause scope: deterministic ids make round-trips structural
        self.varmap = {}
        self.var_ix = 0

    def getvar(self, name: str) -> Var:
        if name == "_":
            v = Var("_", self.var_ix)
            self.var_ix += 1
            return v
        if name not in self.varmap:
            self.varmap[name] = Var(name, self.var_ix)
            self.var_ix += 1
        return self.varmap[name]

    # -- terms ---------------------------------------------------------------

    def parse_term(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Int(int(t.text))
        if self.at_op("-"):
            self.advance()
            n = self.tok
            if n.kind != "int":
                self.fail("expected integer after '-'")
            self.advance()
            return Int(-int(n.text))
        if t.kind == "var":
            self.advance()
            return self.getvar(t.text)
        if t.kind == "name":
            self.advance()
            if self.at_op("("):
                self.advance()
                args = [self.parse_arg()]
                while self.at_op(","):
                    self.advance()
                    args.append(self.parse_arg())
                self.expect_op(")")
                return Struct(t.text, tuple(args))
            return Atom(t.text)
        self.fail(f"expected a term, found {t.text or 'end of input'!r}")

    def parse_arg(self):
        term = self.parse_term()
        if self.at_op("/"):  # name/arity inside declarations
            self.advance()
            n = self.tok
            if n.kind != "int":
                self.fail("expected arity after '/'")
            self.advance()
            return Struct("/", (term, Int(int(n.text))))
        return term

    def parse_arith_term(self):
        term = self.parse_term()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.parse_term()
            term = Struct(op, (term, rhs))
        return term

    # -- literals ------------------------------------------------------------

    def parse_literal(self):
        if self.at_op("("):
            # parenthesized constraint expression
            return ConstraintLit(self.parse_cexpr())
        t = self.tok
        if t.kind == "name" and t.text == "not":
            self.advance()
            if self.at_op("("):
                self.advance()
                inner = self.parse_plain_userlit()
                self.expect_op(")")
            else:
                inner = self.parse_plain_userlit()
            return NafLit(inner)
        term = self.parse_arith_term()
        if self.at_op("::"):
            self.advance()
            return self.parse_domain_decl(term)
        if self.at_op(*_CMP_OPS) or self.at_op("#/\\", "#\\/"):
            c = self.parse_cexpr_rest(term)
            return ConstraintLit(c)
        return self.term_to_userlit(term)

    def parse_plain_userlit(self) -> UserLit:
        term = self.parse_term()
        return self.term_to_userlit(term)

    def term_to_userlit(self, term) -> UserLit:
        if isinstance(term, Atom):
            return UserLit(term.name, ())
        if isinstance(term, Struct):
            if term.functor in ("+", "-"):
                self.fail("arithmetic term is not a valid goal")
            return UserLit(term.functor, term.args)
        self.fail(f"expected a goal, found {term!r}")

    def parse_domain_decl(self, var):
        if self.at_op("["):
            self.advance()
            atoms = []
            if not self.at_op("]"):
                while True:
                    t = self.tok
                    if t.kind != "name":
                        self.fail("expected an atom in domain list")
                    self.advance()
                    atoms.append(Atom(t.text))
                    if self.at_op(","):
                        self.advance()
                        continue
                    break
            self.expect_op("]")
            return DomainDecl(var, Int(0), Int(0), tuple(atoms))
        lo = self.parse_arith_term()
        self.expect_op("..")
        hi = self.parse_arith_term()
        return DomainDecl(var, lo, hi)

    # -- constraint expressions ----------------------------------------------

    def parse_cexpr(self) -> Constraint:
        c = self.parse_cconj()
        while self.at_op("#\\/"):
            self.advance()
            c = Or(c, self.parse_cconj())
        return c

    def parse_cconj(self) -> Constraint:
        c = self.parse_cprimary()
        while self.at_op("#/\\"):
            self.advance()
            c = And(c, self.parse_cprimary())
        return c

    def parse_cprimary(self) -> Constraint:
        if self.at_op("("):
            self.advance()
            c = self.parse_cexpr()
            self.expect_op(")")
            return c
        lhs = self.parse_arith_term()
        return self.parse_comparison(lhs)

    def parse_comparison(self, lhs) -> Constraint:
        if not self.at_op(*_CMP_OPS):
            self.fail("expected a constraint operator")
        op = self.advance().text
        rhs = self.parse_arith_term()
        ctor = {"##": Neq, "#=": Eq, "#<": Lt, "#<=": Le,
                "#>": Gt, "#>=": Ge, "##=": TermEq}[op]
        return ctor(lhs, rhs)

    def parse_cexpr_rest(self, lhs) -> Constraint:
        c = self.parse_comparison(lhs)
        while self.at_op("#/\\"):
            self.advance()
            c = And(c, self.parse_cprimary())
        while self.at_op("#\\/"):
            self.advance()
            c = Or(c, self.parse_cconj())
        return c

    # -- clauses and programs ------------------------------------------------

    def parse_body(self):
        body = [self.parse_literal()]
        while self.at_op(","):
            self.advance()
            body.append(self.parse_literal())
        return tuple(body)

    def parse_item(self):
        self.reset_vars()
        head = self.parse_plain_userlit()
        body = ()
        if self.at_op(":-"):
            self.advance()
            body = self.parse_body()
        self.expect_op(".")
        return Clause(head, body)


def parse_theory(text: str) -> AbductiveTheory:
    """Parse source text into a validated theory; raises ParseFailure."""
    p = _Parser(text)
    theory = AbductiveTheory()
    errors: list[ParseError] = []
    while p.tok.kind != "eof":
        start = p.i
        try:
            item = p.parse_item()
        except ParseFailure as e:
            errors.extend(e.errors)
            p.i = max(start, p.i)  # resync past the next clause terminator
            while p.tok.kind != "eof" and not p.at_op("."):
                p.advance()
            if p.at_op("."):
                p.advance()
            continue
        if item.head.name == "ic" and not item.head.args:
            if not item.body:
                errors.append(_error(text, 0, "integrity constraint with empty body",
                                     "validation"))
            else:
                theory.ics.append(IntegrityConstraint(item.body))
        elif item.head.indicator == ("abducible_predicate", 1) and not item.body:
            spec = item.head.args[0]
            if (isinstance(spec, Struct) and spec.functor == "/"
                    and isinstance(spec.args[0], Atom)
                    and isinstance(spec.args[1], Int)):
                theory.abducibles.add((spec.args[0].name, spec.args[1].value))
            else:
                errors.append(_error(text, 0,
                                     f"malformed abducible declaration {spec!r}",
                                     "validation"))
        else:
            theory.add_clause(item)
    for terr in theory.validate():
        errors.append(ParseError(0, 1, 1, str(terr), "validation"))
    if errors:
        raise ParseFailure(errors)
    return theory


def parse_goal(text: str):
    """Parse a conjunction into a literal list; raises ParseFailure."""
    p = _Parser(text)
    body = list(p.parse_body())
    if p.at_op("."):
        p.advance()
    if p.tok.kind != "eof":
        p.fail(f"unexpected input after goal: {p.tok.text!r}")
    return body


# ---------------------------------------------------------------------------
# Pretty-printing (round-trips through parse_theory)
# ---------------------------------------------------------------------------

def format_term(t) -> str:
    if isinstance(t, Var):
        return t.name if t.name != "_" else f"_A{t.id}"
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, Struct):
        if t.functor in ("+", "-") and t.arity == 2:
            return f"{format_term(t.args[0])} {t.functor} {format_term(t.args[1])}"
        return f"{t.functor}({','.join(format_term(a) for a in t.args)})"
    raise TypeError(t)


_OP_OF = {Neq: "##", Eq: "#=", Lt: "#<", Le: "#<=", Gt: "#>", Ge: "#>=",
          TermEq: "##="}


def format_constraint(c, top: bool = True) -> str:
    if isinstance(c, And):
        s = f"{format_constraint(c.a, False)} #/\\ {format_constraint(c.b, False)}"
        return s if top else f"({s})"
    if isinstance(c, Or):
        s = f"{format_constraint(c.a, False)} #\\/ {format_constraint(c.b, False)}"
        return s if top else f"({s})"
    op = _OP_OF.get(type(c))
    if op is None:
        raise ValueError(f"constraint {c!r} has no surface syntax")
    return f"{format_term(c.a)} {op} {format_term(c.b)}"


def format_literal(lit) -> str:
    if isinstance(lit, UserLit):
        return format_term(Struct(lit.name, lit.args)) if lit.args else lit.name
    if isinstance(lit, NafLit):
        return f"not({format_literal(lit.inner)})"
    if isinstance(lit, ConstraintLit):
        return format_constraint(lit.constraint)
    if isinstance(lit, DomainDecl):
        if lit.atoms is not None:
            return (f"{format_term(lit.var)} :: "
                    f"[{','.join(a.name for a in lit.atoms)}]")
        return f"{format_term(lit.var)} :: {format_term(lit.lo)}..{format_term(lit.hi)}"
    raise TypeError(lit)


def format_clause(clause: Clause) -> str:
    head = format_literal(clause.head)
    if not clause.body:
        return f"{head}."
    return f"{head} :- {', '.join(format_literal(b) for b in clause.body)}."


def format_theory(theory: AbductiveTheory) -> str:
    lines = []
    for name, arity in sorted(theory.abducibles):
        lines.append(f"abducible_predicate({name}/{arity}).")
    for clause in theory.all_clauses():
        lines.append(format_clause(clause))
    for ic in theory.ics:
        lines.append(f"ic :- {', '.join(format_literal(b) for b in ic.body)}.")
    return "\n".join(lines) + "\n"
