"""Publication base: ingestion, inverted/attribute indexes, Boolean queries,
and derived exploration links.

The corpus is a set of publication records. After ``ingest_corpus`` returns,
the index is immutable: readers may share it freely across threads, and a
re-ingestion simply produces a fresh index that the service swaps in.

Query language (used by ``parse_query``)::

    query  := or
    or     := and ("OR" and)*
    and    := unary ("AND" unary)*          # AND binds tighter than OR
    unary  := "NOT" unary | atom
    atom   := "(" query ")" | comparison | WORD
    comparison := ATTR "=" VALUE | ATTR ">=" INT | ATTR "<=" INT

``ATTR`` is one of ``author``, ``venue_name``, ``venue_type``, ``year``,
``team``. ``>=``/``<=`` apply to ``year`` only. Values containing spaces are
double-quoted (``venue_name="Decision Support Review"``). Keywords ``AND``,
``OR`` and ``NOT`` are case-sensitive; lowercase forms are ordinary terms.
Queries whose result would be a complement of the whole corpus (pure
negations such as ``NOT x`` or ``NOT a AND NOT b``) are rejected at parse
time; complements are only allowed where a positive conjunct bounds them.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    CorpusFormatError,
    DuplicateDocId,
    EmptyQuery,
    EvaluationError,
    InvalidDocument,
    NotFound,
    ParseError,
)

log = logging.getLogger(__name__)

VENUE_TYPES = ("journal", "conference", "thesis", "report", "other")
LINK_TYPES = ("shared_author", "same_venue", "same_team")
ATTRIBUTES = ("author", "venue_name", "venue_type", "year", "team")
NUMERIC_ATTRIBUTES = ("year",)

_TOKEN_RE = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Case-fold and strip punctuation, returning the remaining word tokens.

    This is the single normalization used for index terms, query terms and
    lexicon matching; no stemming is applied.
    """
    return _TOKEN_RE.findall(text.casefold())


# ---------------------------------------------------------------------------
# Documents and the index
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    authors: tuple[str, ...]
    venue_name: str
    venue_type: str
    year: int
    keywords: tuple[str, ...] = ()
    team_ids: tuple[str, ...] = ()

    def terms(self) -> set[str]:
        """Normalized terms drawn from title and keywords."""
        out = set(tokenize(self.title))
        for kw in self.keywords:
            out.update(tokenize(kw))
        return out


def validate_document(doc: Document, record_index: int | None = None) -> None:
    def bad(msg: str):
        return InvalidDocument(
            f"record {record_index if record_index is not None else '?'}"
            f" ({doc.doc_id!r}): {msg}",
            record_index=record_index,
        )

    if not doc.doc_id:
        raise bad("doc_id must be non-empty")
    if not doc.authors:
        raise bad("authors must be non-empty")
    if doc.venue_type not in VENUE_TYPES:
        raise bad(f"venue_type {doc.venue_type!r} not one of {VENUE_TYPES}")
    if not isinstance(doc.year, int) or isinstance(doc.year, bool):
        raise bad("year must be an integer")
    if not 1900 <= doc.year <= 2100:
        raise bad(f"year {doc.year} outside [1900, 2100]")


@dataclass(frozen=True)
class CorpusIndex:
    """Immutable search structures over one set of documents."""

    documents: Mapping[str, Document]
    term_postings: Mapping[str, frozenset[str]]
    attribute_index: Mapping[str, Mapping[object, frozenset[str]]]
    link_graph: Mapping[str, tuple[tuple[str, str], ...]]

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def all_ids(self) -> frozenset[str]:
        return frozenset(self.documents)

    def document(self, doc_id: str) -> Document:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise NotFound(f"unknown doc_id: {doc_id!r}") from None


def _doc_attribute_values(doc: Document, attribute: str) -> tuple:
    if attribute == "author":
        return doc.authors
    if attribute == "venue_name":
        return (doc.venue_name,)
    if attribute == "venue_type":
        return (doc.venue_type,)
    if attribute == "year":
        return (doc.year,)
    if attribute == "team":
        return doc.team_ids
    raise EvaluationError(f"unknown attribute: {attribute!r}")


def ingest_corpus(records: Sequence[Document]) -> CorpusIndex:
    """Build the full index over ``records``.

    Raises ``DuplicateDocId`` naming the offending id, or ``InvalidDocument``
    carrying the record index, and otherwise returns an index covering every
    record with postings, attribute maps and the symmetric link graph.
    """
    documents: dict[str, Document] = {}
    for i, doc in enumerate(records):
        validate_document(doc, record_index=i)
        if doc.doc_id in documents:
            raise DuplicateDocId(doc.doc_id)
        documents[doc.doc_id] = doc

    postings: dict[str, set[str]] = {}
    attr_index: dict[str, dict[object, set[str]]] = {a: {} for a in ATTRIBUTES}
    for doc in documents.values():
        for term in doc.terms():
            postings.setdefault(term, set()).add(doc.doc_id)
        for attribute in ATTRIBUTES:
            for value in _doc_attribute_values(doc, attribute):
                attr_index[attribute].setdefault(value, set()).add(doc.doc_id)

    # Link types are derived from shared attribute values; each sharing group
    # yields a clique, which makes the graph symmetric by construction.
    edges: dict[str, set[tuple[str, str]]] = {d: set() for d in documents}
    groups = (
        ("shared_author", attr_index["author"].values()),
        ("same_venue", attr_index["venue_name"].values()),
        ("same_team", attr_index["team"].values()),
    )
    for link_type, value_groups in groups:
        for members in value_groups:
            for a in members:
                for b in members:
                    if a != b:
                        edges[a].add((link_type, b))

    return CorpusIndex(
        documents=documents,
        term_postings={t: frozenset(ds) for t, ds in postings.items()},
        attribute_index={
            a: {v: frozenset(ds) for v, ds in vals.items()}
            for a, vals in attr_index.items()
        },
        link_graph={d: tuple(sorted(es)) for d, es in edges.items()},
    )


def explore(index: CorpusIndex, doc_id: str, link_type: str) -> list[str]:
    """Neighbors of ``doc_id`` under one link type, sorted by doc_id."""
    if link_type not in LINK_TYPES:
        raise ValueError(f"unknown link type: {link_type!r}")
    index.document(doc_id)  # NotFound on unknown id
    return sorted(d for t, d in index.link_graph[doc_id] if t == link_type)


# ---------------------------------------------------------------------------
# Corpus file format (one JSON record per line)
# ---------------------------------------------------------------------------

_KNOWN_FIELDS = {
    "doc_id", "title", "authors", "venue_name", "venue_type",
    "year", "keywords", "team_ids",
}


def _record_to_document(record: dict, line_no: int) -> Document:
    unknown = set(record) - _KNOWN_FIELDS
    if unknown:
        log.warning("corpus line %d: ignoring unknown fields %s",
                    line_no, sorted(unknown))
    try:
        return Document(
            doc_id=str(record["doc_id"]),
            title=str(record["title"]),
            authors=tuple(str(a) for a in record["authors"]),
            venue_name=str(record["venue_name"]),
            venue_type=str(record["venue_type"]),
            year=record["year"],
            keywords=tuple(str(k) for k in record.get("keywords", ())),
            team_ids=tuple(str(t) for t in record.get("team_ids", ())),
        )
    except KeyError as exc:
        raise CorpusFormatError(f"missing field {exc}", line_no=line_no) from None
    except TypeError as exc:
        raise CorpusFormatError(str(exc), line_no=line_no) from None


def load_corpus(path) -> list[Document]:
    """Read a line-delimited corpus file into validated Document records."""
    docs: list[Document] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"bad JSON: {exc.msg}", line_no=line_no) from None
            if not isinstance(record, dict):
                raise CorpusFormatError("record is not an object", line_no=line_no)
            doc = _record_to_document(record, line_no)
            try:
                validate_document(doc)
            except InvalidDocument as exc:
                raise CorpusFormatError(str(exc), line_no=line_no) from None
            docs.append(doc)
    return docs


def dump_corpus(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps({
                "doc_id": doc.doc_id,
                "title": doc.title,
                "authors": list(doc.authors),
                "venue_name": doc.venue_name,
                "venue_type": doc.venue_type,
                "year": doc.year,
                "keywords": list(doc.keywords),
                "team_ids": list(doc.team_ids),
            }, sort_keys=True))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Boolean query AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    text: str


@dataclass(frozen=True)
class AttrEq:
    attribute: str
    value: str


@dataclass(frozen=True)
class AttrCmp:
    attribute: str
    op: str  # one of ">=", "<=", "="
    value: int


@dataclass(frozen=True)
class And:
    left: "BooleanQuery"
    right: "BooleanQuery"


@dataclass(frozen=True)
class Or:
    left: "BooleanQuery"
    right: "BooleanQuery"


@dataclass(frozen=True)
class Not:
    operand: "BooleanQuery"


BooleanQuery = Term | AttrEq | AttrCmp | And | Or | Not


def and_all(parts: Sequence["BooleanQuery"]) -> "BooleanQuery":
    if not parts:
        raise ValueError("and_all needs at least one part")
    node = parts[0]
    for part in parts[1:]:
        node = And(node, part)
    return node


def or_all(parts: Sequence["BooleanQuery"]) -> "BooleanQuery":
    if not parts:
        raise ValueError("or_all needs at least one part")
    node = parts[0]
    for part in parts[1:]:
        node = Or(node, part)
    return node


def is_bounded(q: BooleanQuery) -> bool:
    """True if evaluating ``q`` cannot require a whole-corpus complement.

    Atoms are bounded; NOT flips; AND is bounded when either side is; OR only
    when both sides are.
    """
    if isinstance(q, (Term, AttrEq, AttrCmp)):
        return True
    if isinstance(q, Not):
        return not is_bounded(q.operand)
    if isinstance(q, And):
        return is_bounded(q.left) or is_bounded(q.right)
    if isinstance(q, Or):
        return is_bounded(q.left) and is_bounded(q.right)
    raise TypeError(f"not a query node: {q!r}")


def query_terms(q: BooleanQuery) -> set[str]:
    """Normalized tokens of every ``Term`` atom not under a negation."""
    out: set[str] = set()

    def walk(node: BooleanQuery, negated: bool) -> None:
        if isinstance(node, Term):
            if not negated:
                out.update(tokenize(node.text))
        elif isinstance(node, Not):
            walk(node.operand, not negated)
        elif isinstance(node, (And, Or)):
            walk(node.left, negated)
            walk(node.right, negated)

    walk(q, False)
    return out


def positive_atoms(q: BooleanQuery) -> list[BooleanQuery]:
    """All atom nodes reachable without passing through a negation."""
    out: list[BooleanQuery] = []

    def walk(node: BooleanQuery) -> None:
        if isinstance(node, (Term, AttrEq, AttrCmp)):
            out.append(node)
        elif isinstance(node, (And, Or)):
            walk(node.left)
            walk(node.right)
        # Not: atoms below a negation are not positive; stop.

    walk(q)
    return out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_LEXEME_RE = re.compile(
    r"""\s*(?:
        (?P<lparen>\()
      | (?P<rparen>\))
      | (?P<cmp>[A-Za-z_]+\s*(?:>=|<=|=)\s*(?:"[^"]*"|[^\s()]+))
      | (?P<word>[^\s()]+)
    )""",
    re.VERBOSE,
)

_CMP_SPLIT_RE = re.compile(r"^([A-Za-z_]+)\s*(>=|<=|=)\s*(.+)$", re.DOTALL)


@dataclass
class _Token:
    kind: str  # lparen | rparen | cmp | word
    text: str
    pos: int


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _LEXEME_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"cannot read {stripped[:10]!r}", position=pos)
        if m.end() == pos:
            break
        for kind in ("lparen", "rparen", "cmp", "word"):
            if m.group(kind) is not None:
                tokens.append(_Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], length: int):
        self.tokens = tokens
        self.i = 0
        self.length = length

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of query", position=self.length)
        self.i += 1
        return tok

    def parse(self) -> BooleanQuery:
        node = self.parse_or()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok.text!r}", position=tok.pos)
        return node

    def parse_or(self) -> BooleanQuery:
        node = self.parse_and()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "word" and tok.text == "OR":
                self.next()
                node = Or(node, self.parse_and())
            else:
                return node

    def parse_and(self) -> BooleanQuery:
        node = self.parse_unary()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "word" and tok.text == "AND":
                self.next()
                node = And(node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> BooleanQuery:
        tok = self.peek()
        if tok is not None and tok.kind == "word" and tok.text == "NOT":
            self.next()
            return Not(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> BooleanQuery:
        tok = self.next()
        if tok.kind == "lparen":
            node = self.parse_or()
            closing = self.peek()
            if closing is None or closing.kind != "rparen":
                raise ParseError("unbalanced parentheses", position=tok.pos)
            self.next()
            return node
        if tok.kind == "rparen":
            raise ParseError("unbalanced parentheses", position=tok.pos)
        if tok.kind == "cmp":
            return self.parse_comparison(tok)
        if tok.text in ("AND", "OR"):
            raise ParseError(f"operator {tok.text} needs a left operand",
                             position=tok.pos)
        return Term(tok.text)

    def parse_comparison(self, tok: _Token) -> BooleanQuery:
        m = _CMP_SPLIT_RE.match(tok.text)
        assert m is not None
        attribute, op, raw_value = m.group(1), m.group(2), m.group(3)
        if attribute not in ATTRIBUTES:
            raise ParseError(f"unknown attribute {attribute!r}", position=tok.pos)
        if raw_value.startswith('"') and raw_value.endswith('"'):
            raw_value = raw_value[1:-1]
        if attribute in NUMERIC_ATTRIBUTES:
            try:
                number = int(raw_value)
            except ValueError:
                raise ParseError(
                    f"{attribute} comparison needs an integer, got {raw_value!r}",
                    position=tok.pos,
                ) from None
            return AttrCmp(attribute, op, number)
        if op != "=":
            raise ParseError(
                f"{op!r} is only supported for numeric attributes",
                position=tok.pos,
            )
        return AttrEq(attribute, raw_value)


def parse_query(text: str) -> BooleanQuery:
    """Parse the query language into an AST; see the module docstring."""
    if not text or not text.strip():
        raise EmptyQuery("query string is empty")
    tokens = _lex(text)
    if not tokens:
        raise EmptyQuery("query string is empty")
    node = _Parser(tokens, len(text)).parse()
    if not is_bounded(node):
        raise ParseError(
            "query evaluates to a complement of the whole corpus; "
            "combine negations with a positive conjunct", position=0)
    return node


def _quote_if_needed(value: str) -> str:
    if value == "" or re.search(r'[\s()"]', value):
        return '"' + value.replace('"', "") + '"'
    return value


_PRECEDENCE = {Or: 1, And: 2, Not: 3}


def render(q: BooleanQuery) -> str:
    """Stable textual form; ``parse_query(render(q))`` reproduces ``q`` for
    any tree whose terms and values survive the lexer."""

    def go(node: BooleanQuery, parent_prec: int) -> str:
        if isinstance(node, Term):
            return node.text
        if isinstance(node, AttrEq):
            return f"{node.attribute}={_quote_if_needed(node.value)}"
        if isinstance(node, AttrCmp):
            return f"{node.attribute}{node.op}{node.value}"
        prec = _PRECEDENCE[type(node)]
        if isinstance(node, Not):
            body = f"NOT {go(node.operand, prec)}"
        else:
            word = "AND" if isinstance(node, And) else "OR"
            # Right child gets a tighter context so chains re-parse
            # left-associatively.
            body = f"{go(node.left, prec)} {word} {go(node.right, prec + 1)}"
        return f"({body})" if prec < parent_prec else body

    return go(q, 0)


# ---------------------------------------------------------------------------
# Evaluation (set semantics over the index)
# ---------------------------------------------------------------------------

def _eval_attr_eq(index: CorpusIndex, node: AttrEq) -> frozenset[str]:
    if node.attribute not in ATTRIBUTES:
        raise EvaluationError(f"unknown attribute: {node.attribute!r}")
    return index.attribute_index[node.attribute].get(node.value, frozenset())


def _eval_attr_cmp(index: CorpusIndex, node: AttrCmp) -> frozenset[str]:
    if node.attribute not in ATTRIBUTES:
        raise EvaluationError(f"unknown attribute: {node.attribute!r}")
    if node.attribute not in NUMERIC_ATTRIBUTES:
        raise EvaluationError(f"attribute {node.attribute!r} is not numeric")
    values = index.attribute_index[node.attribute]
    if node.op == "=":
        return values.get(node.value, frozenset())
    result: set[str] = set()
    for value, ids in values.items():
        if (node.op == ">=" and value >= node.value) or \
           (node.op == "<=" and value <= node.value):
            result.update(ids)
    return frozenset(result)


def evaluate_query(index: CorpusIndex, q: BooleanQuery) -> set[str]:
    """Documents satisfying ``q``; NOT is complement within the corpus."""
    if isinstance(q, Term):
        tokens = tokenize(q.text)
        if not tokens:
            return set()
        result = set(index.term_postings.get(tokens[0], frozenset()))
        for token in tokens[1:]:
            result &= index.term_postings.get(token, frozenset())
        return result
    if isinstance(q, AttrEq):
        return set(_eval_attr_eq(index, q))
    if isinstance(q, AttrCmp):
        return set(_eval_attr_cmp(index, q))
    if isinstance(q, And):
        return evaluate_query(index, q.left) & evaluate_query(index, q.right)
    if isinstance(q, Or):
        return evaluate_query(index, q.left) | evaluate_query(index, q.right)
    if isinstance(q, Not):
        return set(index.all_ids) - evaluate_query(index, q.operand)
    raise EvaluationError(f"not a query node: {q!r}")
