"""
Corpus statistics and histograms
================================

A synthetic corpus of token contracts stands in for a downloaded one. It is
written in the JSON-lines interchange format, scanned, and summarised in the
row order of the published table.
"""

import json
import random
import tempfile
from pathlib import Path

from scmetrics.report import cmd_scan, cmd_summary, read_metrics_table
from scmetrics.stats import histogram

rng = random.Random(7)


def make_contract(name: str) -> str:
    parts = [f"pragma solidity ^0.4.24;\n\n// {name}: generated\ncontract {name} {{"]
    parts.append("    mapping(address => uint256) balances;")
    for i in range(rng.randint(0, 6)):
        parts.append(f"    event Log{i}(address who);")
    for i in range(int(rng.lognormvariate(1.8, 0.8)) + 1):
        payable = " payable" if rng.random() < 0.2 else ""
        body = ["        require(msg.sender != address(0));"]
        if rng.random() < 0.5:
            body.append("        if (balances[msg.sender] > 0) { balances[msg.sender] -= 1; }")
        if rng.random() < 0.3:
            body.append("        /* loop over a short range */")
            body.append("        for (uint j = 0; j < 3; j++) { }")
        parts.append(f"\n    function f{i}(uint x) public{payable} {{\n" + "\n".join(body) + "\n    }")
    parts.append("}\n")
    return "\n".join(parts)


workdir = Path(tempfile.mkdtemp(prefix="scmetrics-demo-"))
corpus = workdir / "corpus.jsonl"
sources = [make_contract(f"Token{i}") for i in range(240)]
with corpus.open("w") as f:
    for i in range(300):
        src = sources[i % 240]  # redeployed copies of the same source
        rec = {"address": f"{rng.getrandbits(160):040x}", "source": src}
        if rng.random() < 0.8:
            rec["abi"] = json.dumps([{"type": "function", "name": "f"}] * rng.randint(1, 20))
        f.write(json.dumps(rec) + "\n")

rows = cmd_scan(corpus, workdir / "metrics.csv", dedup=True)
print(f"{rows} unique contracts scanned into {workdir / 'metrics.csv'}")

cmd_summary(workdir / "metrics.csv", workdir / "summary.txt")
print((workdir / "summary.txt").read_text())

# Freedman-Diaconis binning, with whole-number widths for count metrics.
columns = read_metrics_table(workdir / "metrics.csv")
h = histogram([v for v in columns["loc"] if v is not None])
for lo, hi, count in zip(h.edges[:-1], h.edges[1:], h.counts):
    print(f"[{lo:5.0f}, {hi:5.0f})  {'#' * int(count)}")
