import re

import pytest
from hypothesis import given, settings, strategies as st

from conftest import PUZZLE_COUNTS, PUZZLE_LINES
from scmetrics.corpus import ContractRecord
from scmetrics.metrics import (LineClass, METRIC_NAMES, TABLE_ORDER, classify_lines,
                               extract_metrics, keyword_counts, metrics_from_source,
                               scan, strip_comments, tokenize)

B, C, K = LineClass.BLANK, LineClass.COMMENT, LineClass.CODE

KEYWORD_FIELDS = ("contracts", "functions", "payable", "events", "mappings", "modifiers",
                  "address_uses", "cyclomatic")


@pytest.mark.parametrize("source, expected", [
    ("a = 1; // note\n", [K]),
    ("/*\n x\n*/\n\ny=1;", [C, C, C, B, K]),
    ('s = "//not a comment";', [K]),
    ("", []),
    ("\n", [B]),
    ("x;\n\n", [K, B]),
    ("   \t", [B]),
    ("// a\n  // b", [C, C]),
    ("/* a */ x = 1;", [K]),
    ("x = 1; /* start\n still\n end */", [K, C, C]),
    ("/* a */ /* b */", [C]),
    ("'/*'; x\ny", [K, K]),
    ("/*\n\n*/", [C, B, C]),
])
def test_classify_lines(source, expected):
    assert classify_lines(source) == expected


def test_unterminated_block_comment(caplog):
    assert classify_lines("x;\n/* open\nmore\n") == [K, C, C]
    assert "unterminated block comment" in caplog.text


def test_unterminated_string_is_closed_at_line_end():
    res = scan('x = "abc\nif (a) {}')
    assert res.lines == [K, K]
    assert res.diagnostics
    assert keyword_counts(tokenize(res.code))["cyclomatic"] == 2


def test_escaped_quote_inside_string():
    src = 's = "a \\" if // x"; if (b) {}'
    assert metrics_from_source(src).cyclomatic == 2
    assert classify_lines(src) == [K]


def test_strip_comments_keeps_line_structure():
    src = "a /* x\ny */ b // z\nc"
    assert strip_comments(src).count("\n") == 3
    assert [t.text for t in tokenize(strip_comments(src))] == ["a", "b", "c"]


def test_puzzle_fixture(puzzle_source):
    m = metrics_from_source(puzzle_source)
    for name, value in {**PUZZLE_LINES, **PUZZLE_COUNTS}.items():
        assert getattr(m, name) == value, name
    assert m.abi_size is None and m.bytecode_size is None


def test_payable_function():
    m = metrics_from_source("contract A { function f() payable {} }")
    assert (m.contracts, m.functions, m.payable, m.cyclomatic) == (1, 1, 1, 1)


@pytest.mark.parametrize("source, payable", [
    ("function f(address payable to) public {}", 0),
    ("function f() public returns (address payable) {}", 0),
    ("function f() external payable;", 1),
    ("function f() public; function g() payable {}", 1),
    ("function() payable { }", 1),
])
def test_payable_header(source, payable):
    assert metrics_from_source(source).payable == payable


def _event_oracle(source: str) -> int:
    # Regex enumeration over the comment-stripped text, independent of the tokenizer.
    code = strip_comments(source)
    names = set(re.findall(r"\bevent\s+([A-Za-z_$][\w$]*)\s*\(", code))
    total = 0
    for name in names:
        calls = len(re.findall(r"(?<![\w$])" + re.escape(name) + r"\s*\(", code))
        decls = len(re.findall(r"\bevent\s+" + re.escape(name) + r"\s*\(", code))
        total += calls - decls
    return total


@pytest.mark.parametrize("source", [
    "contract A { event E(); function f(){ E(); emit E(2); } }",
    "contract A { event E(uint x); event F(); function f(){ E(1); F(); /* E() */ } }",
    'contract A { event E(); function f(){ string s = "E()"; emit E(); } }',
    "contract A { event Transfer(address a); function EE() { Transfer(0); ETransfer(1); } }",
    "contract A { function f() { E(); } }",
])
def test_events_match_regex_oracle(source):
    assert metrics_from_source(source).events == _event_oracle(source)


def test_events_example_value():
    m = metrics_from_source("contract A { event E(); function f(){ E(); emit E(2); } }")
    assert m.events == 2


def test_keyword_boundaries():
    m = metrics_from_source("addressable = 1; iffy = 2; mappings = 3; functional; contracts;")
    assert (m.address_uses, m.cyclomatic, m.mappings, m.functions, m.contracts) == (0, 1, 0, 0, 0)


def test_declaration_counts():
    src = """
    abstract contract A {}
    library L {}
    interface I {}
    contract C is A {
        modifier m() { _; }
        modifier n { _; }
        mapping(address => uint) a;
        mapping(uint => address) b;
        function f(function (uint) external returns (uint) cb) m {}
        constructor() {}
    }
    """
    m = metrics_from_source(src)
    assert m.contracts == 4
    assert m.modifiers == 2
    assert m.mappings == 2
    assert m.functions == 1
    counts = keyword_counts(tokenize(strip_comments(src)))
    assert counts["address_mappings"] == 1


def test_decision_points():
    src = "if (a) {} else if (b) {} for (;;) {} while (x) {} do {} while (y); z = a ? b : c; p && q || r;"
    assert metrics_from_source(src).cyclomatic == 1 + 2 + 1 + 2 + 1


def test_abi_and_bytecode_sizes():
    rec = ContractRecord("0x" + "1" * 40, "contract A {}", abi_json='[{"a":1}]',
                         bytecode_hex="0x6080AB")
    m = extract_metrics(rec)
    assert m.abi_size == 9
    assert m.bytecode_size == 6


def test_schema_names():
    assert METRIC_NAMES[:4] == ("total_lines", "blanks", "comments", "loc")
    assert len(METRIC_NAMES) == 14
    assert sorted(TABLE_ORDER) == sorted(METRIC_NAMES)


# ---------------------------------------------------------------------------
# properties

source_text = st.text(alphabet=st.sampled_from(list("ab /*\"'\n\t;(){}?if\\")), max_size=200)

SNIPPETS = [
    "contract X {", "}", "function f() payable {", "if (a) { b(); }", "// if while",
    "/* for ( */", 'string s = "if (x) ? y";', "while (i < n) i++;", "x = a ? b : c;",
    "mapping(address => uint) m;", "event E(uint v);", "emit E(1);", "", "   ",
    "modifier only() { _; }", "address a = address(0);", "for (;;) {}",
]
code_text = st.lists(st.sampled_from(SNIPPETS), max_size=30).map("\n".join)


def _lines(text):
    parts = text.split("\n")
    if text.endswith("\n"):
        parts.pop()
    return parts if text else []


@given(source_text)
def test_partition_identity(src):
    m = metrics_from_source(src)
    assert m.total_lines == m.blanks + m.comments + m.loc
    assert m.total_lines == len(_lines(src))
    assert min(getattr(m, f) for f in METRIC_NAMES[:12]) >= 0
    assert m.cyclomatic >= 1


@given(source_text, st.data())
def test_inserting_comment_line(src, data):
    lines = _lines(src)
    k = data.draw(st.integers(0, len(lines)))
    before = metrics_from_source(src)
    after = metrics_from_source("\n".join(lines[:k] + ["// inserted"] + lines[k:]) + "\n")
    assert after.total_lines == before.total_lines + 1
    assert after.comments == before.comments + 1
    for name in METRIC_NAMES:
        if name not in ("total_lines", "comments"):
            assert getattr(after, name) == getattr(before, name), name


@given(st.one_of(code_text, st.text(alphabet=st.characters(blacklist_characters='"\\\n'),
                                    max_size=80)))
def test_string_literal_shields_keywords(fragment):
    fragment = fragment.replace("\n", " ").replace('"', "").replace("\\", "")
    wrapped = metrics_from_source('x = "' + fragment + '";')
    empty = metrics_from_source('x = "";')
    for name in KEYWORD_FIELDS:
        assert getattr(wrapped, name) == getattr(empty, name), name


@given(source_text)
def test_extract_is_pure(src):
    assert metrics_from_source(src) == metrics_from_source(src)


@given(code_text, code_text)
def test_cyclomatic_concatenation(a, b):
    ca = metrics_from_source(a).cyclomatic
    cb = metrics_from_source(b).cyclomatic
    assert metrics_from_source(a + "\n" + b).cyclomatic == ca + cb - 1
