"""
Metrics of a single contract
============================

The scanner classifies every physical line and counts keywords on the
comment-free token stream. Here it runs on a small puzzle-reward contract
written for the pre-0.4 compiler.
"""

from pathlib import Path

from scmetrics import ContractRecord, classify_lines, extract_metrics

source = (Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "puzzle.sol").read_text()

# Line classes: a line holding code and a trailing comment counts as code.
for number, (kind, text) in enumerate(zip(classify_lines(source), source.splitlines()), 1):
    print(f"{number:3d} {kind.value:8s}| {text.expandtabs(4)}")

# The record wraps the source with its (optional) ABI and bytecode.
record = ContractRecord(address="0x" + "ab" * 20, source=source,
                        abi_json='[{"type":"fallback"}]', bytecode_hex="0x60606040")
metrics = extract_metrics(record)
for name, value in metrics.as_dict().items():
    print(f"{name:14s} {value}")

# Five `if` tokens give a cyclomatic complexity of 6; `else` is not a decision.
assert metrics.cyclomatic == 6

# Keywords inside strings and comments never count.
shielded = extract_metrics(ContractRecord("0x" + "cd" * 20,
                                          'string s = "if (x) function"; // while for'))
print("shielded cyclomatic:", shielded.cyclomatic, "functions:", shielded.functions)
