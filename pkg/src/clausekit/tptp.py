"""Reader and writer for the CNF subset of TPTP.

Accepted input is a sequence of ``cnf(name, role, formula).`` statements
where the formula is a disjunction of possibly negated atoms, optionally
wrapped in parentheses.  ``%`` line comments and ``/* */`` block comments are
skipped.  Equality is not supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from clausekit.logic import Clause, Origin

AXIOM_ROLES = ("axiom", "hypothesis")
CONJECTURE_ROLE = "negated_conjecture"

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*|/\*.*?\*/)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*|'(?:[^'\\]|\\.)*'|\$false)
  | (?P<number>[0-9]+)
  | (?P<punct>[(),.|~])
    """,
    re.VERBOSE | re.DOTALL,
)


class TptpError(ValueError):
    pass


class TptpSyntaxError(TptpError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class ArityError(TptpError):
    pass


class UnknownRoleError(TptpError):
    pass


@dataclass
class Problem:
    axioms: list = field(default_factory=list)
    neg_conjecture: list = field(default_factory=list)
    symbols: dict = field(default_factory=dict)  # name -> (arity, "pred" | "func")
    name: str = ""

    @property
    def clauses(self):
        return self.axioms + self.neg_conjecture

    def structurally_equal(self, other):
        return [c.literals for c in self.axioms] == [c.literals for c in other.axioms] and [
            c.literals for c in self.neg_conjecture
        ] == [c.literals for c in other.neg_conjecture]


def _tokenize(text):
    pos = 0
    line, line_start = 1, 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TptpSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append((kind, value, line, m.start() - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text, symbols):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.symbols = symbols
        self.varmap = {}

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise TptpSyntaxError(message, tok[2], tok[3])

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def register(self, name, arity, kind, tok):
        known = self.symbols.get(name)
        if known is None:
            self.symbols[name] = (arity, kind)
        elif known != (arity, kind):
            raise ArityError(
                f"symbol {name!r} used as {kind}/{arity} but earlier as {known[1]}/{known[0]} "
                f"(line {tok[2]}, column {tok[3]})"
            )

    def term(self):
        tok = self.next()
        if tok[0] == "upper":
            return self.varmap.setdefault(tok[1], len(self.varmap))
        if tok[0] not in ("lower", "number"):
            self.fail("expected a term", tok)
        args = self.arguments()
        self.register(tok[1], len(args), "func", tok)
        return (tok[1], *args)

    def arguments(self):
        args = []
        if self.peek()[1] == "(":
            self.next()
            args.append(self.term())
            while self.peek()[1] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        return args

    def literal(self):
        positive = True
        if self.peek()[1] == "~":
            self.next()
            positive = False
        tok = self.next()
        if tok[0] != "lower":
            self.fail("expected an atom", tok)
        args = self.arguments()
        self.register(tok[1], len(args), "pred", tok)
        return positive, (tok[1], *args)

    def disjunction(self):
        if self.peek()[1] == "$false":
            self.next()
            return []
        lits = [self.literal()]
        while self.peek()[1] == "|":
            self.next()
            lits.append(self.literal())
        return lits

    def formula(self):
        # one level of parentheses may wrap the whole disjunction
        if self.peek()[1] == "(":
            self.next()
            lits = self.disjunction()
            self.expect(")")
            return lits
        return self.disjunction()

    def statement(self):
        tok = self.next()
        if tok[1] != "cnf":
            self.fail(f"expected 'cnf', found {tok[1]!r}", tok)
        self.expect("(")
        name_tok = self.next()
        if name_tok[0] not in ("lower", "number"):
            self.fail("expected a formula name", name_tok)
        self.expect(",")
        role_tok = self.next()
        if role_tok[0] != "lower":
            self.fail("expected a role", role_tok)
        self.expect(",")
        self.varmap = {}
        lits = self.formula()
        self.expect(")")
        self.expect(".")
        return name_tok[1], role_tok, lits


def parse_tptp_cnf(text, name=""):
    """Parse TPTP CNF text into a :class:`Problem`."""
    problem = Problem(name=name)
    parser = _Parser(text, problem.symbols)
    next_id = 0
    while parser.peek()[0] != "eof":
        cname, role_tok, lits = parser.statement()
        role = role_tok[1]
        if role in AXIOM_ROLES:
            target = problem.axioms
        elif role == CONJECTURE_ROLE:
            target = problem.neg_conjecture
        else:
            raise UnknownRoleError(f"unknown role {role!r} at line {role_tok[2]}, column {role_tok[3]}")
        target.append(Clause(lits, next_id, Origin.input(role, cname)))
        next_id += 1
    return problem


def parse_clause(text):
    """Parse a bare disjunction such as ``p(X0) | ~q(a)`` into a Clause."""
    parser = _Parser(text, {})
    lits = parser.formula()
    if parser.peek()[0] != "eof":
        parser.fail("trailing input")
    return Clause(lits)


def format_clause_tptp(clause, name=None, role=None):
    name = name or clause.origin.name or f"c{clause.id}"
    role = role or clause.origin.role or "plain"
    return f"cnf({name}, {role}, ({clause}))."


def format_problem(problem):
    lines = [format_clause_tptp(c, role=c.origin.role or "axiom") for c in problem.axioms]
    lines += [format_clause_tptp(c, role=CONJECTURE_ROLE) for c in problem.neg_conjecture]
    return "\n".join(lines) + "\n"


def read_problem(path):
    with open(path) as fh:
        return parse_tptp_cnf(fh.read(), name=str(path))
