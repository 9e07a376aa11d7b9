"""Module for reading and writing sources and queries in the textual
language.

A source document is a sequence of statements, each ending with a dot;
'#' starts a comment that runs to the end of the line:

    fluents: m, ab.
    defaults: ab.
    actions: d.
    law: impossible d if m, -ab.
    initial: .
    sequence: d.

Laws are written 'law: e causes l (if l1, ..., ln)?.', 'law: l if l1,
..., ln.' or 'law: impossible e if l1, ..., ln.'; an unknown consequence
is written 'u(f)'. Steps of the sequence are separated by ';', a step
with several elementary actions is written in braces, '{w, fd}'. A query
document holds a single statement 'query: f.'.

This file can also be imported as a module and contains the following
functions:

    * parse_source - parse the text of a source document into a
    validated Source.

    * parse_query - parse the text of a query document.

    * read_source - read and parse a source file, keeping the raw text
    and the line of every statement.

    * read_query - read and parse a query file.

    * serialize_source - canonical text of a source.

    * serialize_query - canonical text of a query.

"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import pyparsing as pp

from acir.functions.core_types import (
    AcirError,
    ActionDescription,
    DynamicLaw,
    ExecutabilityCondition,
    Literal,
    Query,
    Signature,
    Source,
    StateConstraint,
    Truth,
    format_action,
    validate_source,
)

logger = logging.getLogger(__name__)

REQUIRED_SECTIONS = ("fluents", "actions", "initial", "sequence")


class DslError(AcirError, ValueError):
    """Base class of the errors found while reading a document."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)

    def details(self) -> dict:
        if self.line is None:
            return {}
        return {"line": self.line, "column": self.column}


class DslSyntaxError(DslError):
    def __init__(self, line: int, column: int, expected: str):
        self.expected = expected
        super().__init__(f"expected {expected}", line, column)

    def details(self) -> dict:
        return {**super().details(), "expected": self.expected}


class UnknownSymbol(DslError):
    def __init__(self, name: str, line=None, column=None):
        self.name = name
        super().__init__(f"unknown symbol '{name}'", line, column)

    def details(self) -> dict:
        return {**super().details(), "name": self.name}


class DuplicateDeclaration(DslError):
    def __init__(self, name: str, line=None, column=None):
        self.name = name
        super().__init__(f"duplicate declaration of '{name}'", line, column)

    def details(self) -> dict:
        return {**super().details(), "name": self.name}


class InconsistentInitial(DslError):
    def __init__(self, fluent: str, line=None, column=None):
        self.fluent = fluent
        super().__init__(
            f"inconsistent initial set: '{fluent}' is both true and false",
            line,
            column,
        )

    def details(self) -> dict:
        return {**super().details(), "fluent": self.fluent}


class NegatedQuery(DslError):
    def __init__(self, fluent: str, line=None, column=None):
        self.fluent = fluent
        super().__init__(
            f"a query is a fluent, got the negated literal '-{fluent}'",
            line,
            column,
        )


class InvalidSource(DslError):
    """The parsed source violates the type invariants."""

    def __init__(self, violations: Iterable[str]):
        self.violations = list(violations)
        super().__init__("invalid source: " + "; ".join(self.violations))

    def details(self) -> dict:
        return {"violations": self.violations}


@dataclass(frozen=True)
class _Token:
    name: str
    loc: int


@dataclass(frozen=True)
class _Lit:
    token: _Token
    value: Truth

    def literal(self) -> Literal:
        return Literal(self.token.name, self.value)


@dataclass(frozen=True)
class _LawNode:
    kind: str
    action: Optional[_Token]
    head: Optional[_Lit]
    conditions: Tuple[_Lit, ...]


@dataclass(frozen=True)
class _Statement:
    kind: str
    loc: int
    items: tuple


def _literal_action(tokens):
    if len(tokens) == 2:
        return _Lit(tokens[1], Truth.FALSE)
    return _Lit(tokens[0], Truth.TRUE)


def _build_grammar():
    identifier = pp.Regex(
        r"(?!(?:causes|if|impossible)\b)[A-Za-z][A-Za-z0-9_]*"
    ).set_name("identifier")
    identifier.set_parse_action(lambda s, loc, t: _Token(t[0], loc))

    causes = pp.Keyword("causes")
    if_ = pp.Keyword("if")
    impossible = pp.Keyword("impossible")
    dot = pp.Suppress(".")
    colon = pp.Suppress(":")

    literal = (pp.Opt(pp.Literal("-")) + identifier).set_name("literal")
    literal.set_parse_action(_literal_action)
    unknown_literal = (
        pp.Suppress(pp.Keyword("u")) + pp.Suppress("(") + identifier + pp.Suppress(")")
    ).set_parse_action(lambda t: _Lit(t[0], Truth.UNKNOWN))
    extended_literal = (unknown_literal | literal).set_name("extended literal")

    literal_list = pp.Group(pp.DelimitedList(literal))
    id_list = pp.DelimitedList(identifier)

    executability = (impossible + identifier + if_ - literal_list).set_parse_action(
        lambda t: _LawNode("executability", t[1], None, tuple(t[3]))
    )
    dynamic = (
        identifier + causes - extended_literal + pp.Opt(if_ - literal_list)
    ).set_parse_action(
        lambda t: _LawNode(
            "dynamic", t[0], t[2], tuple(t[4]) if len(t) > 3 else ()
        )
    )
    constraint = (extended_literal + if_ - literal_list).set_parse_action(
        lambda t: _LawNode("constraint", None, t[0], tuple(t[2]))
    )
    law = (executability | dynamic | constraint).set_name("law")

    step = pp.Group(
        identifier | (pp.Suppress("{") - id_list + pp.Suppress("}"))
    ).set_name("step")

    def statement(keyword, body):
        expr = pp.Keyword(keyword) + colon - pp.Group(body) + dot
        return expr.set_parse_action(
            lambda s, loc, t: _Statement(t[0], loc, tuple(t[1]))
        )

    document = pp.ZeroOrMore(
        statement("fluents", id_list)
        | statement("defaults", pp.Opt(id_list))
        | statement("actions", id_list)
        | statement("law", law)
        | statement("initial", pp.Opt(pp.DelimitedList(literal)))
        | statement("sequence", pp.Opt(pp.DelimitedList(step, delim=";")))
    ) + pp.StringEnd()
    document.ignore(pp.python_style_comment)

    query = statement("query", literal) + pp.StringEnd()
    query.ignore(pp.python_style_comment)
    return document, query


_DOCUMENT, _QUERY = _build_grammar()


def _decode(text: Union[str, bytes], name: str) -> str:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError:
            raise DslSyntaxError(1, 1, "UTF-8 text") from None
    elif not isinstance(text, str):
        raise TypeError(f"'{name}' should be a string.")
    return text.replace("\r\n", "\n").lstrip("\ufeff")


def _parse(grammar, text: str) -> List[_Statement]:
    try:
        return list(grammar.parse_string(text, parse_all=True))
    except pp.ParseBaseException as exc:
        expected = exc.msg
        if expected.startswith("Expected "):
            expected = expected[len("Expected ") :]
        raise DslSyntaxError(exc.lineno, exc.col, expected) from None


def _position(text: str, loc: int) -> Tuple[int, int]:
    return pp.lineno(loc, text), pp.col(loc, text)


@dataclass(frozen=True)
class SourceDocument:
    """Parsed source together with its raw text and provenance.

    'lines' maps every statement, rendered canonically, to the line it
    starts on.
    """

    text: str
    source: Source
    path: Optional[str] = None
    lines: Tuple[Tuple[str, int], ...] = ()

    def line_of(self, statement: str) -> Optional[int]:
        return dict(self.lines).get(statement)


def _declare(
    statement: _Statement, text: str, taken: Dict[str, str]
) -> List[str]:
    names = []
    for token in statement.items:
        if token.name in taken:
            raise DuplicateDeclaration(token.name, *_position(text, token.loc))
        taken[token.name] = statement.kind
        names.append(token.name)
    return names


def _check(token: _Token, known, text: str) -> str:
    if token.name not in known:
        raise UnknownSymbol(token.name, *_position(text, token.loc))
    return token.name


def _to_law(node: _LawNode, fluents, actions, text: str):
    for condition in node.conditions:
        _check(condition.token, fluents, text)
    conditions = tuple(c.literal() for c in node.conditions)
    if node.head is not None:
        _check(node.head.token, fluents, text)
    if node.kind == "dynamic":
        action = _check(node.action, actions, text)
        return DynamicLaw(action, node.head.literal(), conditions)
    if node.kind == "constraint":
        return StateConstraint(node.head.literal(), conditions)
    action = _check(node.action, actions, text)
    return ExecutabilityCondition(action, conditions)


def _assemble(
    statements: List[_Statement], text: str, source_id: str
) -> Tuple[Source, Tuple[Tuple[str, int], ...]]:
    sections: Dict[str, _Statement] = {}
    law_statements = []
    for statement in statements:
        if statement.kind == "law":
            law_statements.append(statement)
            continue
        if statement.kind in sections:
            raise DuplicateDeclaration(
                f"{statement.kind}:", *_position(text, statement.loc)
            )
        sections[statement.kind] = statement

    for kind in REQUIRED_SECTIONS:
        if kind not in sections:
            line, column = _position(text, len(text))
            raise DslSyntaxError(line, column, f"'{kind}:' section")

    taken: Dict[str, str] = {}
    fluents = _declare(sections["fluents"], text, taken)
    actions = _declare(sections["actions"], text, taken)

    defaults = set()
    if "defaults" in sections:
        for token in sections["defaults"].items:
            defaults.add(_check(token, fluents, text))

    lines = []
    laws = []
    for statement in law_statements:
        law = _to_law(statement.items[0], fluents, actions, text)
        laws.append(law)
        lines.append((f"law: {law}", pp.lineno(statement.loc, text)))

    initial = {}
    for lit in sections["initial"].items:
        name = _check(lit.token, fluents, text)
        if initial.setdefault(name, lit.value) is not lit.value:
            raise InconsistentInitial(name, *_position(text, lit.token.loc))

    sequence = []
    for group in sections["sequence"].items:
        sequence.append(frozenset(_check(t, actions, text) for t in group))

    source = Source(
        id=source_id,
        signature=Signature(fluents, actions),
        defaults=defaults,
        description=ActionDescription(laws),
        initial=(Literal(f, v) for f, v in initial.items()),
        sequence=sequence,
    )
    violations = validate_source(source)
    if violations:
        raise InvalidSource(violations)

    for kind, statement in sections.items():
        lines.append((kind, pp.lineno(statement.loc, text)))
    return source, tuple(sorted(lines, key=lambda item: item[1]))


def parse_source(text: Union[str, bytes], source_id: str = "source") -> Source:
    """Parse a source document.

    Parameters
    ----------
    text : str or bytes
        Document text; bytes are decoded as UTF-8. LF and CRLF line
        endings are accepted.
    source_id : str, optional
        Identifier of the resulting source. The default is "source".

    Returns
    -------
    Source
        The validated source.

    Raises
    ------
    TypeError
        Text is neither a string nor bytes.
    DslSyntaxError
        The text does not follow the grammar; carries line and column.
    UnknownSymbol
        A law, the initial set or the sequence uses an undeclared name.
    DuplicateDeclaration
        A name or a section is declared twice.
    InconsistentInitial
        The initial set holds both f and -f.
    InvalidSource
        Any other violation of the source invariants.
    """
    if not isinstance(source_id, str):
        raise TypeError("'source_id' should be a string.")
    text = _decode(text, "text")
    return _assemble(_parse(_DOCUMENT, text), text, source_id)[0]


def parse_query(text: Union[str, bytes]) -> Query:
    """Parse a query document 'query: f.'.

    Raises
    ------
    DslSyntaxError
        The text is not a single query statement over one fluent.
    NegatedQuery
        The query is a negated literal.
    """
    text = _decode(text, "text")
    statement = _parse(_QUERY, text)[0]
    lit = statement.items[0]
    if lit.value is not Truth.TRUE:
        raise NegatedQuery(lit.token.name, *_position(text, lit.token.loc))
    return Query(lit.token.name)


def read_source(path: Union[str, os.PathLike]) -> SourceDocument:
    """Read a '.acir' file; the source identifier is the file name stem.

    Raises
    ------
    OSError
        The file cannot be read.
    DslError
        The file content is not a valid source.
    """
    path = Path(path)
    raw = path.read_bytes()
    text = _decode(raw, "text")
    source, lines = _assemble(_parse(_DOCUMENT, text), text, path.stem)
    logger.debug("Parsed source '%s' from %s", source.id, path)
    return SourceDocument(text, source, str(path), lines)


def read_query(path: Union[str, os.PathLike]) -> Query:
    return parse_query(Path(path).read_bytes())


def serialize_source(source: Source) -> str:
    """Canonical text of a source.

    Names are sorted, laws appear by kind (dynamic laws, state
    constraints, executability conditions) and empty sections are
    written as 'initial: .'. Parsing the text with the source's
    identifier gives back an equal source.
    """
    if not isinstance(source, Source):
        raise TypeError("'source' should be a Source.")

    def _names(names):
        return ", ".join(sorted(names))

    lines = [
        f"fluents: {_names(source.signature.fluents)}.",
        f"defaults: {_names(source.defaults)}." if source.defaults else "defaults: .",
        f"actions: {_names(source.signature.actions)}.",
    ]
    lines.extend(f"law: {law}." for law in source.description.sorted_laws)
    initial = ", ".join(str(lit) for lit in sorted(source.initial))
    lines.append(f"initial: {initial}." if initial else "initial: .")
    steps = "; ".join(format_action(action) for action in source.sequence)
    lines.append(f"sequence: {steps}." if steps else "sequence: .")
    return "\n".join(lines) + "\n"


def serialize_query(query: Query) -> str:
    return f"query: {query.fluent}.\n"
