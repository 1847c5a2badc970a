"""Exit criteria for the package, one test per criterion.

Each test prints a single PASS/FAIL line (visible in normal pytest output)
before asserting.
"""

import filecmp
import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
import scipy.stats

from conftest import PUZZLE_COUNTS, PUZZLE_LINES, addr
from scmetrics.corpus import load_corpus
from scmetrics.distfit import fit_lognormal, fit_powerlaw, ks_statistic
from scmetrics.metrics import extract_metrics, metrics_from_source
from scmetrics.report import cmd_fit, cmd_plot, cmd_scan, cmd_summary


@pytest.fixture
def verdict(capsys):
    def report(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        assert ok, f"{label}: {detail}"
    return report


def test_ac1_fixture_golden_metrics(verdict, puzzle_source):
    start = time.perf_counter()
    m = metrics_from_source(puzzle_source)
    elapsed = time.perf_counter() - start
    expected = {**PUZZLE_COUNTS, **PUZZLE_LINES}
    got = {k: getattr(m, k) for k in expected}
    verdict("AC1 golden metrics on the Puzzle listing", got == expected and elapsed < 1.0,
            f"{got}, {elapsed * 1000:.1f} ms")


def _random_source(rng: random.Random) -> str:
    alphabet = list("abcxyz ;(){}=?\t") + ["\n"] * 3 + ["//", "/*", "*/", '"', "'", "\\",
                                                         "if", "for", "function", "address"]
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 400)))


def test_ac2_partition_identity(verdict, tmp_path, puzzle_source):
    rng = random.Random(20180401)
    lines = [json.dumps({"address": addr(0), "source": puzzle_source})]
    lines += [json.dumps({"address": addr(i), "source": _random_source(rng)})
              for i in range(1, 500)]
    path = tmp_path / "random.jsonl"
    path.write_text("\n".join(lines) + "\n")
    corpus = load_corpus(path)
    vectors = [extract_metrics(r) for r in corpus]
    holds = sum(v.total_lines == v.blanks + v.comments + v.loc for v in vectors)
    n = len(vectors)

    def mean(name):
        return Fraction(sum(getattr(v, name) for v in vectors), n)

    exact = mean("loc") == mean("total_lines") - mean("blanks") - mean("comments")
    # published means: 316.5 - 55.0 - 77.6 = 183.9 against 183.8, one rounding step apart
    published = abs((316.5 - 55.0 - 77.6) - 183.8) <= 0.15
    verdict("AC2 partition identity", n == 500 and holds == n and exact and published,
            f"{holds}/{n} records, mean identity exact={exact}")


def test_ac3_powerlaw_recovery(verdict):
    n, alpha, x0 = 10_000, 2.5, 1.0
    u = (np.arange(1, n + 1) - 0.5) / n
    x = x0 * (1 - u) ** (-1 / (alpha - 1))
    start = time.perf_counter()
    fit = fit_powerlaw(x)
    elapsed = time.perf_counter() - start
    ok = abs(fit.alpha - alpha) <= 0.05 and fit.x0 <= 2 * x0 and fit.ks_d < 0.01 and elapsed < 10
    verdict("AC3 power-law recovery", ok,
            f"alpha={fit.alpha:.4f} x0={fit.x0:.5f} D={fit.ks_d:.2e} scan {elapsed:.2f} s")


def test_ac4_lognormal_recovery(verdict):
    n, mu, sigma = 10_000, 3.0, 1.0
    u = (np.arange(1, n + 1) - 0.5) / n
    x = np.exp(mu + sigma * scipy.stats.norm.ppf(u))
    fit = fit_lognormal(x)
    ok = abs(fit.mu - mu) <= 0.02 and abs(fit.sigma - sigma) <= 0.02 and fit.r2_loglog > 0.98
    verdict("AC4 lognormal recovery", ok,
            f"mu={fit.mu:.4f} sigma={fit.sigma:.4f} R2={fit.r2_loglog:.5f}")


def test_ac5_ks_correctness(verdict):
    uniform = lambda v: np.clip(v, 0, 1)
    single = ks_statistic([0.5], uniform)
    errors = []
    for n in (1, 10, 1000, 10_000):
        x = (np.arange(1, n + 1) - 0.5) / n
        errors.append(abs(ks_statistic(x, uniform) - 0.5 / n))
    ok = single == 0.5 and max(errors) <= 1e-12
    verdict("AC5 KS correctness", ok, f"D(0.5)={single}, max |D - 0.5/n|={max(errors):.1e}")


def test_ac6_equivariance(verdict):
    u = (np.arange(1, 3001) - 0.5) / 3000
    pareto = (1 - u) ** (-1 / 1.5)
    lognorm = np.exp(2 + 0.9 * scipy.stats.norm.ppf(u))
    pl, ln = fit_powerlaw(pareto), fit_lognormal(lognorm)
    worst_alpha = worst_mu = worst_sigma = 0.0
    same_cutoff = True
    for c in (0.1, 7.0, 1000.0):
        pl_c, ln_c = fit_powerlaw(c * pareto), fit_lognormal(c * lognorm)
        worst_alpha = max(worst_alpha, abs(pl_c.alpha - pl.alpha))
        same_cutoff &= pl_c.n_tail == pl.n_tail and math.isclose(pl_c.x0, c * pl.x0, rel_tol=1e-12)
        worst_mu = max(worst_mu, abs(ln_c.mu - (ln.mu + math.log(c))))
        worst_sigma = max(worst_sigma, abs(ln_c.sigma - ln.sigma))
    # power-law alpha depends only on ratios x_i / x0; float rounding is the only slack
    ok = worst_alpha <= 1e-12 and same_cutoff and worst_mu <= 1e-12 and worst_sigma <= 1e-12
    verdict("AC6 equivariance", ok,
            f"|d alpha|={worst_alpha:.1e} |d mu|={worst_mu:.1e} |d sigma|={worst_sigma:.1e}")


def _pipeline(corpus, out):
    out.mkdir()
    cmd_scan(corpus, out / "metrics.csv")
    cmd_summary(out / "metrics.csv", out / "summary.txt")
    cmd_fit(out / "metrics.csv", "total_lines", "both", out / "fit.json", out / "ccdf.tsv",
            n_min=2)
    cmd_plot(out / "ccdf.tsv", out / "fit.json", out / "ccdf.svg")
    return sorted(p.name for p in out.iterdir())


def test_ac7_determinism(verdict, tmp_path, corpus_file):
    names_a = _pipeline(corpus_file, tmp_path / "a")
    names_b = _pipeline(corpus_file, tmp_path / "b")
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names_a, shallow=False)
    kinds = {n.rsplit(".", 1)[1] for n in names_a}
    ok = names_a == names_b and not mismatch and not errors and \
        {"csv", "json", "tsv", "svg"} <= kinds
    verdict("AC7 determinism", ok, f"{len(names_a)} files compared, mismatches={mismatch}")


@pytest.mark.parametrize("k", [2, 5])
def test_ac8_dedup(verdict, tmp_path, k):
    src = "contract Copy { function f() {} }\n"
    for i in range(k):
        (tmp_path / f"0x{addr(10 + i).upper()}.sol").write_text(src)
    (tmp_path / f"{addr(99)}.sol").write_text("contract Other {}\n")
    corpus = load_corpus(tmp_path, dedup=True)
    copies = [r for r in corpus if r.source == src]
    ok = len(copies) == 1 and corpus.duplicates_removed == k - 1 and \
        copies[0].address == addr(10) and len(corpus) == 2
    verdict(f"AC8 dedup (k={k})", ok, f"kept {len(copies)}, removed {corpus.duplicates_removed}")
