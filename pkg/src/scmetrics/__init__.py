"""Software metrics for Solidity smart contracts and heavy-tail fits of
their corpus-wide distributions."""

from .corpus import (ContractRecord, Corpus, CorpusError, FetchError, fetch_contracts,
                     load_corpus, normalize_address)
from .distfit import (EmpiricalCCDF, FitError, LogNormalFit, PowerLawFit, empirical_ccdf,
                      fit_lognormal, fit_powerlaw, ks_statistic, r_squared_loglog)
from .metrics import (METRIC_NAMES, TABLE_ORDER, LineClass, MetricVector, classify_lines,
                      extract_metrics, metrics_from_source)
from .stats import Histogram, SummaryStatistics, histogram, summarize

__version__ = "0.1.0"
