"""Solidity source metrics.

A small hand-written scanner separates comments and string literals from
code, classifies every physical line as blank, comment or code, and feeds a
token stream to the keyword counters. No grammar is built: the counts are
lexical, which keeps them robust on old (pre-0.4) and partially broken
sources alike.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import re
from dataclasses import dataclass
from typing import Optional

from .corpus import ContractRecord

logger = logging.getLogger(__name__)

__all__ = [
    "LineClass",
    "MetricVector",
    "METRIC_NAMES",
    "TABLE_ORDER",
    "Token",
    "ScanResult",
    "scan",
    "classify_lines",
    "tokenize",
    "strip_comments",
    "keyword_counts",
    "extract_metrics",
    "metrics_from_source",
]


class LineClass(str, enum.Enum):
    BLANK = "blank"
    COMMENT = "comment"
    CODE = "code"


@dataclass(frozen=True)
class MetricVector:
    """The per-contract metric values, one field per reported metric.

    ``abi_size`` and ``bytecode_size`` are ``None`` when the record carries no
    ABI or bytecode; they are never zero-filled.
    """

    total_lines: int
    blanks: int
    comments: int
    loc: int
    contracts: int
    functions: int
    payable: int
    events: int
    mappings: int
    modifiers: int
    address_uses: int
    cyclomatic: int
    abi_size: Optional[int] = None
    bytecode_size: Optional[int] = None

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


# Column order of the metrics table.
METRIC_NAMES: tuple[str, ...] = tuple(f.name for f in dataclasses.fields(MetricVector))

# Row order of the published summary table (Total Lines ... LOC).
TABLE_ORDER: tuple[str, ...] = (
    "total_lines",
    "blanks",
    "functions",
    "payable",
    "events",
    "mappings",
    "modifiers",
    "contracts",
    "address_uses",
    "cyclomatic",
    "comments",
    "abi_size",
    "bytecode_size",
    "loc",
)


# ---------------------------------------------------------------------------
# scanning

_CODE, _LINE_COMMENT, _BLOCK_COMMENT, _STRING = range(4)

# Placeholder emitted in place of a string literal's body.
STRING_TOKEN = '""'


@dataclass
class ScanResult:
    """Output of :func:`scan`.

    ``code`` is the source with comments removed and every string literal
    collapsed to ``""``; newlines are preserved so line numbers still line up.
    """

    lines: list[LineClass]
    code: str
    diagnostics: list[str]


def _split_lines(source: str) -> list[str]:
    if not source:
        return []
    lines = source.split("\n")
    if source.endswith("\n"):
        lines.pop()
    return lines


def scan(source: str) -> ScanResult:
    """Single pass over ``source`` tracking comment and string state."""
    state = _CODE
    quote = ""
    out: list[str] = []
    classes: list[LineClass] = []
    diagnostics: list[str] = []
    physical = _split_lines(source)

    for lineno, line in enumerate(physical, start=1):
        has_code = False
        has_comment = False
        if state == _LINE_COMMENT:
            state = _CODE
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            if state == _BLOCK_COMMENT:
                if ch == "*" and i + 1 < n and line[i + 1] == "/":
                    state = _CODE
                    has_comment = True
                    out.append(" ")
                    i += 2
                    continue
                if not ch.isspace():
                    has_comment = True
                i += 1
                continue
            if state == _LINE_COMMENT:
                # rest of the line is comment text
                if line[i:].strip():
                    has_comment = True
                break
            if state == _STRING:
                if ch == "\\":
                    i += 2
                    continue
                if ch == quote:
                    state = _CODE
                    out.append(STRING_TOKEN)
                i += 1
                continue
            # _CODE
            if ch == "/" and i + 1 < n and line[i + 1] == "/":
                state = _LINE_COMMENT
                has_comment = True
                i += 2
                continue
            if ch == "/" and i + 1 < n and line[i + 1] == "*":
                state = _BLOCK_COMMENT
                has_comment = True
                out.append(" ")
                i += 2
                continue
            if ch == '"' or ch == "'":
                state = _STRING
                quote = ch
                has_code = True
                i += 1
                continue
            if not ch.isspace():
                has_code = True
            out.append(ch)
            i += 1

        if state == _STRING:
            # Solidity string literals cannot span lines.
            diagnostics.append(f"line {lineno}: unterminated string literal")
            out.append(STRING_TOKEN)
            state = _CODE
        out.append("\n")

        if has_code:
            classes.append(LineClass.CODE)
        elif has_comment:
            classes.append(LineClass.COMMENT)
        else:
            classes.append(LineClass.BLANK)

    if state == _BLOCK_COMMENT:
        diagnostics.append("unterminated block comment at end of input")
    for msg in diagnostics:
        logger.warning(msg)
    return ScanResult(lines=classes, code="".join(out), diagnostics=diagnostics)


def classify_lines(source: str) -> list[LineClass]:
    """Classify each physical line of ``source`` as blank, comment or code.

    A line with any code character is code, even when it also carries a
    comment. Comment markers inside string literals are ignored.

    >>> [c.value for c in classify_lines("/*\\n x\\n*/\\n\\ny=1;")]
    ['comment', 'comment', 'comment', 'blank', 'code']
    """
    return scan(source).lines


def strip_comments(source: str) -> str:
    """Source with comments removed and string bodies collapsed to ``""``."""
    return scan(source).code


@dataclass(frozen=True)
class Token:
    text: str
    depth: int  # parenthesis nesting depth at the token


_TOKEN_RE = re.compile(
    r'""'
    r"|[A-Za-z_$][A-Za-z0-9_$]*"
    r"|0[xX][0-9a-fA-F_]+"
    r"|[0-9][0-9_]*(?:\.[0-9_]+)?(?:[eE][-+]?[0-9]+)?"
    r"|=>|==|!=|<=|>=|&&|\|\||\+\+|--|\*\*"
    r"|\S"
)


def tokenize(code: str) -> list[Token]:
    """Split comment-free code into tokens, tagging parenthesis depth."""
    tokens = []
    depth = 0
    for m in _TOKEN_RE.finditer(code):
        text = m.group()
        if text == ")":
            depth = max(depth - 1, 0)
        tokens.append(Token(text, depth))
        if text == "(":
            depth += 1
    return tokens


# ---------------------------------------------------------------------------
# counting

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*\Z")
_DECISION_TOKENS = frozenset({"if", "for", "while", "?"})
_CONTRACT_KEYWORDS = frozenset({"contract", "library", "interface"})


def _is_ident(text: str) -> bool:
    return bool(_IDENT_RE.match(text))


def keyword_counts(tokens: list[Token]) -> dict[str, int]:
    """Keyword-based counts over a token stream.

    Besides the reported metrics this also returns ``address_mappings``, the
    number of mappings keyed by ``address``.
    """
    texts = [t.text for t in tokens]
    n = len(texts)

    def nxt(i: int) -> str:
        return texts[i + 1] if i + 1 < n else ""

    contracts = functions = payable = 0
    mappings = address_mappings = modifiers = address_uses = 0
    decisions = 0
    event_names: set[str] = set()
    event_decl_at: set[int] = set()

    for i, tok in enumerate(tokens):
        text = tok.text
        if text in _CONTRACT_KEYWORDS and _is_ident(nxt(i)):
            contracts += 1
        elif text == "function" and tok.depth == 0 and (nxt(i) == "(" or _is_ident(nxt(i))):
            # function types inside parameter lists sit at depth > 0
            functions += 1
            if _header_is_payable(tokens, i):
                payable += 1
        elif text == "mapping":
            mappings += 1
            if nxt(i) == "(" and i + 2 < n and texts[i + 2] == "address":
                address_mappings += 1
        elif text == "modifier" and _is_ident(nxt(i)):
            modifiers += 1
        elif text == "address":
            address_uses += 1
        elif text == "event" and _is_ident(nxt(i)) and i + 2 < n and texts[i + 2] == "(":
            event_names.add(texts[i + 1])
            event_decl_at.add(i + 1)
        if text in _DECISION_TOKENS:
            decisions += 1

    events = 0
    if event_names:
        for i, text in enumerate(texts):
            if text in event_names and nxt(i) == "(" and i not in event_decl_at:
                events += 1

    return {
        "contracts": contracts,
        "functions": functions,
        "payable": payable,
        "events": events,
        "mappings": mappings,
        "address_mappings": address_mappings,
        "modifiers": modifiers,
        "address_uses": address_uses,
        "cyclomatic": 1 + decisions,
    }


def _header_is_payable(tokens: list[Token], start: int) -> bool:
    # Header runs from `function` to the first `{` or `;`. Tokens inside the
    # parameter and return lists are skipped so `address payable to` does not
    # mark the function itself as payable.
    base = tokens[start].depth
    for tok in tokens[start + 1:]:
        if tok.depth == base:
            if tok.text in ("{", ";"):
                return False
            if tok.text == "payable":
                return True
    return False


def metrics_from_source(
    source: str,
    abi_json: Optional[str] = None,
    bytecode_hex: Optional[str] = None,
) -> MetricVector:
    """Compute the metric vector for raw source text."""
    result = scan(source)
    lines = result.lines
    blanks = sum(1 for c in lines if c is LineClass.BLANK)
    comments = sum(1 for c in lines if c is LineClass.COMMENT)
    counts = keyword_counts(tokenize(result.code))
    counts.pop("address_mappings")
    if bytecode_hex is not None:
        bytecode_hex = bytecode_hex.strip()
        if bytecode_hex[:2].lower() == "0x":
            bytecode_hex = bytecode_hex[2:]
    return MetricVector(
        total_lines=len(lines),
        blanks=blanks,
        comments=comments,
        loc=len(lines) - blanks - comments,
        abi_size=None if abi_json is None else len(abi_json),
        bytecode_size=None if bytecode_hex is None else len(bytecode_hex),
        **counts,
    )


def extract_metrics(record: ContractRecord) -> MetricVector:
    """Metric vector for one contract record."""
    return metrics_from_source(record.source, record.abi_json, record.bytecode_hex)
