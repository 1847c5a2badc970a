"""
End-to-end run from the command line
====================================

The same pipeline through the ``scmetrics`` command: scan a corpus, summarise
it, fit one metric and plot its CCDF. ``fetch`` would populate the corpus from
an explorer API given ETHERSCAN_API_KEY; here the test fixture corpus is used.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

corpus = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus.jsonl"
out = Path(tempfile.mkdtemp(prefix="scmetrics-cli-"))


def run(*args):
    cmd = [sys.executable, "-m", "scmetrics", *args]
    print("$ scmetrics", " ".join(args))
    done = subprocess.run(cmd, capture_output=True, text=True)
    print(done.stderr, end="")
    done.check_returncode()


run("scan", "--corpus", str(corpus), "--out", str(out / "metrics.csv"), "--dedup")
run("summary", "--metrics", str(out / "metrics.csv"), "--out", str(out / "summary.txt"))
run("fit", "--metrics", str(out / "metrics.csv"), "--metric", "total_lines", "--model", "both",
    "--out", str(out / "fit.json"), "--ccdf", str(out / "ccdf.tsv"), "--n-min", "2")
run("plot", "--ccdf", str(out / "ccdf.tsv"), "--fit", str(out / "fit.json"),
    "--out", str(out / "ccdf.svg"))

print((out / "metrics.csv").read_text())
print((out / "summary.txt").read_text())
print((out / "fit.json").read_text())
