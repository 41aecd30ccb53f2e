"""Problem files: parsing, rendering of problems, results and logs.

A problem file has up to four sections::

    [schema]
    student(id,name,course)
    [dependencies]
    st participant(#V_m_1,#V_id_1), student(#V_id_1,'Max',#V_c_1) -> grade(#V_m_1,#V_id_1,#E_s_1)
    student(#V_i_1,#V_n_1,#V_c_1), student(#V_i_1,#V_n_1,#V_c_2) -> #V_c_1 = #V_c_2
    [instance]
    student(3,'Max','Math') student(#N_id_1,'Max','Math')

``[query]`` replaces ``[instance]`` for query objects and holds a single
``atoms -> (terms)`` query. Lines starting with ``--`` are comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .chase import ChaseOutcome, Status, StepLog
from .core import (
    Atom,
    ChaseError,
    Dependency,
    DependencyKind,
    GeneralizedInstance,
    ObjectKind,
    Query,
    RelationSchema,
    SchemaMismatch,
    Term,
    TermKind,
    ValidationError,
    check_atom,
    head_atom,
)


class ParseError(ChaseError):
    pass


class ProblemSyntaxError(ParseError):
    pass


class DuplicateSection(ParseError):
    pass


class MixedObject(ParseError):
    pass


SECTIONS = ("schema", "dependencies", "instance", "query")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>--[^\n]*)
  | (?P<section>\[[A-Za-z_-]*\])
  | (?P<arrow>->)
  | (?P<var>\#(?P<vkind>[VEN])_(?P<vlabel>[A-Za-z_][A-Za-z0-9_]*)_(?P<vindex>[0-9]+))
  | (?P<string>'(?:[^']|'')*')
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),=])
    """,
    re.VERBOSE,
)

_KINDS = {"V": TermKind.UNIVERSAL, "E": TermKind.EXISTENTIAL, "N": TermKind.NULL}


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    line: int
    column: int
    value: object = None


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        column = pos - line_start + 1
        if m is None:
            raise ProblemSyntaxError(f"unexpected character {text[pos]!r}", line, column)
        kind = "var" if m.group("var") is not None else m.lastgroup
        chunk = m.group(0)
        if kind == "comment" and text[line_start:pos].strip():
            # ``--`` only opens a comment at the start of a line
            raise ProblemSyntaxError("comments must start a line", line, column)
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, column, _token_value(m, kind, line, column)))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _token_value(m: re.Match, kind: str, line: int, column: int):
    if kind == "var":
        index = int(m.group("vindex"))
        if index < 1:
            raise ProblemSyntaxError("term index must be positive", line, column)
        return Term(_KINDS[m.group("vkind")], m.group("vlabel"), index)
    if kind == "string":
        return Term.const(m.group(0)[1:-1].replace("''", "'"))
    if kind == "int":
        return Term.const(int(m.group(0)))
    return None


@dataclass
class ChaseProblem:
    schema: list[RelationSchema] = field(default_factory=list)
    dependencies: list[Dependency] = field(default_factory=list)
    object: GeneralizedInstance = field(default_factory=lambda: GeneralizedInstance(frozenset()))
    query_head: Optional[Atom] = None

    @property
    def relations(self) -> dict[str, RelationSchema]:
        return {r.name: r for r in self.schema}

    @property
    def query(self) -> Optional[Query]:
        if self.query_head is None:
            return None
        return Query(tuple(self.object.sorted_atoms()), self.query_head)


class _Parser:
    def __init__(self, text: str, check_schema: bool = True):
        self.tokens = tokenize(text)
        self.pos = 0
        self.schema: dict[str, RelationSchema] = {}
        self.check_schema = check_schema

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None, cls=ProblemSyntaxError):
        tok = tok or self.peek
        return cls(message, tok.line, tok.column)

    def expect(self, type_: str, text: Optional[str] = None) -> Token:
        tok = self.peek
        if tok.type != type_ or (text is not None and tok.text != text):
            want = repr(text) if text else type_
            got = repr(tok.text) if tok.text else "end of input"
            raise self.error(f"expected {want}, found {got}")
        return self.next()

    def at(self, type_: str, text: Optional[str] = None) -> bool:
        tok = self.peek
        return tok.type == type_ and (text is None or tok.text == text)

    def at_atom(self) -> bool:
        return self.at("ident") and self.tokens[self.pos + 1].text == "("

    def term(self) -> Term:
        tok = self.peek
        if tok.type in ("var", "string", "int"):
            self.next()
            return tok.value
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def atom(self) -> Atom:
        name = self.expect("ident")
        self.expect("punct", "(")
        terms = [self.term()]
        while self.at("punct", ","):
            self.next()
            terms.append(self.term())
        self.expect("punct", ")")
        atom = Atom(name.text, tuple(terms))
        if self.check_schema:
            try:
                check_atom(atom, self.schema)
            except SchemaMismatch as exc:
                raise SchemaMismatch(exc.message, name.line, name.column) from None
        return atom

    def atoms(self) -> list[Atom]:
        out = [self.atom()]
        while self.at("punct", ","):
            self.next()
            out.append(self.atom())
        return out

    def reldecl(self) -> RelationSchema:
        name = self.expect("ident")
        self.expect("punct", "(")
        attrs = [self.expect("ident").text]
        while self.at("punct", ","):
            self.next()
            attrs.append(self.expect("ident").text)
        self.expect("punct", ")")
        if name.text in self.schema:
            raise self.error(f"relation {name.text!r} declared twice", name, SchemaMismatch)
        try:
            rel = RelationSchema(name.text, tuple(attrs))
        except ValueError as exc:
            raise self.error(str(exc), name, SchemaMismatch) from None
        self.schema[rel.name] = rel
        return rel

    def dependency(self, number: int) -> Dependency:
        # well-formedness beyond arity is left to validate_constraints
        st = False
        if self.at("ident", "st") and not self.at_atom():
            self.next()
            st = True
        body = self.atoms()
        self.expect("arrow")
        dep_id = f"d{number}"
        if self.at_atom():
            dep = Dependency.tgd(dep_id, body, self.atoms(), source_target=st)
        else:
            left = self.term()
            self.expect("punct", "=")
            right = self.term()
            dep = Dependency(dep_id, DependencyKind.EGD, tuple(body), (), (left, right), st)
        return dep

    def query(self) -> tuple[list[Atom], Atom]:
        start = self.peek
        body = self.atoms()
        self.expect("arrow")
        self.expect("punct", "(")
        terms = [self.term()]
        while self.at("punct", ","):
            self.next()
            terms.append(self.term())
        self.expect("punct", ")")
        head = head_atom(terms)
        try:
            Query(tuple(body), head)
        except ValidationError as exc:
            raise self.error(exc.message, start, ValidationError) from None
        return body, head

    def problem(self) -> ChaseProblem:
        seen: dict[str, Token] = {}
        problem = ChaseProblem()
        body: Optional[list[Atom]] = None
        while not self.at("eof"):
            tok = self.expect("section")
            name = tok.text[1:-1]
            if name not in SECTIONS:
                raise self.error(f"unknown section {tok.text}", tok)
            if name in seen:
                raise self.error(f"section {tok.text} appears twice", tok, DuplicateSection)
            if {name, *seen} >= {"instance", "query"}:
                raise self.error("a problem holds an instance or a query, not both", tok, MixedObject)
            seen[name] = tok
            if name == "schema":
                while not self.at("section") and not self.at("eof"):
                    problem.schema.append(self.reldecl())
            elif name == "dependencies":
                while not self.at("section") and not self.at("eof"):
                    problem.dependencies.append(self.dependency(len(problem.dependencies) + 1))
            elif name == "instance":
                body = []
                while not self.at("section") and not self.at("eof"):
                    body.append(self.atom())
                problem.object = self._object(body, ObjectKind.INSTANCE, tok)
            else:
                body, problem.query_head = self.query()
                problem.object = self._object(body, ObjectKind.QUERY, tok)
        return problem

    def _object(self, atoms, kind, tok) -> GeneralizedInstance:
        try:
            return GeneralizedInstance(frozenset(atoms), kind)
        except ValidationError as exc:
            raise self.error(exc.message, tok, ValidationError) from None


def parse_problem(text: Union[str, bytes]) -> ChaseProblem:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).problem()


def parse_term(text: str) -> Term:
    p = _Parser(text)
    term = p.term()
    p.expect("eof")
    return term


def parse_atom(text: str) -> Atom:
    p = _Parser(text, check_schema=False)
    atom = p.atom()
    p.expect("eof")
    return atom


def parse_dependency(text: str, id: str = "d1") -> Dependency:
    """Parse one dependency without a schema; handy in tests and the REPL."""
    p = _Parser(text, check_schema=False)
    dep = p.dependency(1)
    p.expect("eof")
    if id != dep.id:
        dep = Dependency(id, dep.kind, dep.body, dep.head, dep.equality, dep.source_target)
    return dep


def parse_query(text: str) -> Query:
    p = _Parser(text, check_schema=False)
    body, head = p.query()
    p.expect("eof")
    return Query(tuple(body), head)


# -- rendering ---------------------------------------------------------------------


def render_atoms(atoms: Iterable[Atom]) -> str:
    return "".join(a.render() + "\n" for a in sorted(atoms, key=Atom.sort_key))


def render_problem(problem: ChaseProblem) -> str:
    lines = ["[schema]"]
    lines += [r.render() for r in problem.schema]
    lines.append("[dependencies]")
    lines += [d.render() for d in problem.dependencies]
    if problem.object.kind is ObjectKind.QUERY:
        lines.append("[query]")
        lines.append(problem.query.render())
    else:
        lines.append("[instance]")
        lines += [a.render() for a in problem.object.sorted_atoms()]
    return "\n".join(lines) + "\n"


def render_result(o: ChaseOutcome) -> str:
    if o.status is Status.FAILED_BOTTOM:
        return "_|_\n"
    if o.status is Status.EMPTY_QUERY:
        return "{}\n"
    if o.status is Status.STEP_LIMIT:
        return f"STEP-LIMIT({o.steps})\n"
    if o.query is not None:
        return o.query.render() + "\n"
    return render_atoms(o.target.atoms)


def write_log(log: StepLog, checks: Sequence[str] = ()) -> str:
    lines = list(checks)
    lines.append(f"chase log: {len(log)} step(s)")
    lines += [entry.render() for entry in log]
    return "\n".join(lines) + "\n"
