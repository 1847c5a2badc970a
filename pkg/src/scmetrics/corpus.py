"""Contract records: loading, validation, deduplication and fetching."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

logger = logging.getLogger(__name__)

__all__ = [
    "CorpusError",
    "FetchError",
    "ContractRecord",
    "Corpus",
    "normalize_address",
    "normalize_bytecode",
    "load_corpus",
    "deduplicate",
    "Throttle",
    "EtherscanClient",
    "fetch_contracts",
    "write_directory",
]

ETHERSCAN_URL = "https://api.etherscan.io/api"

_ADDRESS_RE = re.compile(r"[0-9a-f]{40}\Z")
_HEX_RE = re.compile(r"[0-9a-f]*\Z")


class CorpusError(Exception):
    """Fatal problem with a corpus path or its contents."""


class FetchError(Exception):
    """Fatal problem talking to the explorer API (e.g. rejected API key)."""


def normalize_address(address: str) -> str:
    """Lowercase, strip an optional ``0x`` prefix and validate 40 hex digits.

    >>> normalize_address("0xAbCdEf0000000000000000000000000000000001")
    'abcdef0000000000000000000000000000000001'
    """
    addr = address.strip().lower()
    if addr.startswith("0x"):
        addr = addr[2:]
    if not _ADDRESS_RE.match(addr):
        raise ValueError(f"malformed address {address!r}")
    return addr


def normalize_bytecode(bytecode: str) -> str:
    code = bytecode.strip().lower()
    if code.startswith("0x"):
        code = code[2:]
    if not _HEX_RE.match(code) or len(code) % 2:
        raise ValueError("bytecode is not an even-length hex string")
    return code


@dataclass(frozen=True)
class ContractRecord:
    address: str
    source: str
    abi_json: Optional[str] = None
    bytecode_hex: Optional[str] = None
    retrieved_at: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "address", normalize_address(self.address))
        if self.bytecode_hex is not None:
            object.__setattr__(self, "bytecode_hex", normalize_bytecode(self.bytecode_hex))

    @property
    def source_hash(self) -> str:
        return hashlib.sha256(self.source.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Corpus:
    records: tuple[ContractRecord, ...]
    dedup_applied: bool = False
    duplicates_removed: int = 0
    rejected: tuple[str, ...] = field(default=(), compare=False)

    def __iter__(self) -> Iterator[ContractRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def deduplicate(records: Iterable[ContractRecord]) -> tuple[list[ContractRecord], int]:
    """Keep one record per byte-identical source, the smallest address wins."""
    best: dict[str, ContractRecord] = {}
    total = 0
    for rec in records:
        total += 1
        key = rec.source_hash
        if key not in best or rec.address < best[key].address:
            best[key] = rec
    kept = sorted(best.values(), key=lambda r: r.address)
    return kept, total - len(kept)


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc


def _make_record(rejected: list[str], where: str, **kw) -> Optional[ContractRecord]:
    bytecode = kw.get("bytecode_hex")
    if bytecode is not None:
        try:
            normalize_bytecode(bytecode)
        except ValueError as exc:
            msg = f"{where}: {exc}; bytecode dropped"
            logger.warning(msg)
            kw["bytecode_hex"] = None
    try:
        return ContractRecord(**kw)
    except ValueError as exc:
        msg = f"{where}: {exc}; record rejected"
        logger.warning(msg)
        rejected.append(msg)
        return None


def _load_directory(path: Path, rejected: list[str]) -> list[ContractRecord]:
    records = []
    for sol in sorted(path.glob("*.sol")):
        stem = sol.name[: -len(".sol")]
        abi_path = path / f"{stem}.abi.json"
        bin_path = path / f"{stem}.bin"
        rec = _make_record(
            rejected,
            str(sol),
            address=stem,
            source=_read_text(sol),
            abi_json=_read_text(abi_path) if abi_path.exists() else None,
            bytecode_hex=_read_text(bin_path) if bin_path.exists() else None,
        )
        if rec is not None:
            records.append(rec)
    return records


def _load_lines(path: Path, rejected: list[str]) -> list[ContractRecord]:
    records = []
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            msg = f"{where}: invalid JSON ({exc.msg}); record rejected"
            logger.warning(msg)
            rejected.append(msg)
            continue
        if not isinstance(obj, dict) or not isinstance(obj.get("address"), str) \
                or not isinstance(obj.get("source"), str):
            msg = f"{where}: missing string field 'address' or 'source'; record rejected"
            logger.warning(msg)
            rejected.append(msg)
            continue
        rec = _make_record(
            rejected,
            where,
            address=obj["address"],
            source=obj["source"],
            abi_json=obj.get("abi"),
            bytecode_hex=obj.get("bytecode"),
            retrieved_at=obj.get("retrieved_at"),
        )
        if rec is not None:
            records.append(rec)
    return records


def load_corpus(path: str | os.PathLike, dedup: bool = False) -> Corpus:
    """Load contract records from a directory or a JSON-lines file.

    Directory mode reads ``<address>.sol`` files with optional
    ``<address>.abi.json`` and ``<address>.bin`` siblings. A file is read as
    one JSON object per line with ``address``, ``source`` and optional
    ``abi``/``bytecode`` fields.

    Records with malformed addresses are skipped and logged. Records are
    returned sorted by address. With ``dedup`` set, byte-identical sources are
    collapsed onto their lexicographically smallest address.

    Raises:
        CorpusError: the path is missing or unreadable, or no valid record
            remains.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus path does not exist: {path}")
    rejected: list[str] = []
    if path.is_dir():
        records = _load_directory(path, rejected)
    else:
        records = _load_lines(path, rejected)

    by_address: dict[str, ContractRecord] = {}
    for rec in records:
        if rec.address in by_address:
            msg = f"duplicate address {rec.address}; keeping first occurrence"
            logger.warning(msg)
            rejected.append(msg)
            continue
        by_address[rec.address] = rec
    records = sorted(by_address.values(), key=lambda r: r.address)

    if not records:
        raise CorpusError(f"no valid contract records in {path}")

    removed = 0
    if dedup:
        records, removed = deduplicate(records)
        if removed:
            logger.info("dedup removed %d duplicate source(s)", removed)
    return Corpus(tuple(records), dedup_applied=dedup, duplicates_removed=removed,
                  rejected=tuple(rejected))


def write_directory(records: Iterable[ContractRecord], out_dir: str | os.PathLike) -> int:
    """Write records in the directory layout read by :func:`load_corpus`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for rec in records:
        (out / f"{rec.address}.sol").write_text(rec.source, encoding="utf-8")
        if rec.abi_json is not None:
            (out / f"{rec.address}.abi.json").write_text(rec.abi_json, encoding="utf-8")
        if rec.bytecode_hex is not None:
            (out / f"{rec.address}.bin").write_text(rec.bytecode_hex, encoding="utf-8")
        count += 1
    return count


# ---------------------------------------------------------------------------
# fetching


class Throttle:
    """Spaces successive calls at least ``1 / rate`` seconds apart."""

    def __init__(self, rate: float, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.interval = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._last: Optional[float] = None

    def wait(self) -> None:
        now = self._clock()
        if self._last is not None:
            delay = self._last + self.interval - now
            if delay > 0:
                self._sleep(delay)
                now = self._clock()
        self._last = now


def _flatten_source(raw: str) -> str:
    # Multi-file verifications come back as standard-json input, sometimes
    # wrapped in an extra pair of braces.
    text = raw.strip()
    if not text.startswith("{"):
        return raw
    candidate = text[1:-1] if text.startswith("{{") and text.endswith("}}") else text
    try:
        obj = json.loads(candidate)
    except json.JSONDecodeError:
        return raw
    sources = obj.get("sources", obj) if isinstance(obj, dict) else None
    if not isinstance(sources, dict):
        return raw
    parts = []
    for name in sorted(sources):
        entry = sources[name]
        content = entry.get("content") if isinstance(entry, dict) else None
        if isinstance(content, str):
            parts.append(content)
    return "\n".join(parts) if parts else raw


class EtherscanClient:
    """Minimal client for an Etherscan-compatible contract-source API."""

    def __init__(self, api_key: str, rate_limit: float = 4.0, base_url: str = ETHERSCAN_URL,
                 session=None, max_retries: int = 3, backoff: float = 0.5, timeout: float = 30.0):
        if not api_key:
            raise FetchError("an API key is required")
        if session is None:
            import requests
            session = requests.Session()
        self.api_key = api_key
        self.base_url = base_url
        self.session = session
        self.throttle = Throttle(rate_limit)
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout

    def _get(self, params: dict) -> dict:
        params = {**params, "apikey": self.api_key}
        last_error: Optional[Exception] = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            self.throttle.wait()
            try:
                resp = self.session.get(self.base_url, params=params, timeout=self.timeout)
                resp.raise_for_status()
                data = resp.json()
            except Exception as exc:  # transport, HTTP status or JSON decoding
                last_error = exc
                continue
            result = data.get("result")
            if str(data.get("status")) == "0" and isinstance(result, str):
                if "invalid api key" in result.lower():
                    raise FetchError(f"API key rejected: {result}")
                if "rate limit" in result.lower():
                    last_error = RuntimeError(result)
                    continue
            return data
        raise ConnectionError(f"request failed after {self.max_retries} retries: {last_error}")

    def source_record(self, address: str) -> Optional[ContractRecord]:
        """Verified source for one address, or ``None`` if unverified."""
        data = self._get({"module": "contract", "action": "getsourcecode", "address": address})
        result = data.get("result")
        if not isinstance(result, list) or not result:
            return None
        entry = result[0]
        source = entry.get("SourceCode") or ""
        if not source.strip():
            return None
        abi = entry.get("ABI")
        if not abi or abi.startswith("Contract source code not verified"):
            abi = None
        return ContractRecord(
            address=address,
            source=_flatten_source(source),
            abi_json=abi,
            retrieved_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        )

    def bytecode(self, address: str) -> Optional[str]:
        data = self._get({"module": "proxy", "action": "eth_getCode", "address": address,
                          "tag": "latest"})
        code = data.get("result")
        if not isinstance(code, str):
            return None
        try:
            return normalize_bytecode(code) or None
        except ValueError:
            return None


def fetch_contracts(
    addresses: Sequence[str],
    api_key: str,
    rate_limit: float = 4.0,
    *,
    with_bytecode: bool = False,
    client: Optional[EtherscanClient] = None,
    **client_kw,
) -> list[ContractRecord]:
    """Download verified sources for ``addresses``.

    Unverified, malformed and persistently failing addresses are skipped with
    a logged diagnostic. A rejected API key raises :class:`FetchError`.
    """
    if not addresses:
        return []
    if client is None:
        client = EtherscanClient(api_key, rate_limit=rate_limit, **client_kw)
    records = []
    for raw in addresses:
        try:
            address = normalize_address(raw)
        except ValueError as exc:
            logger.warning("%s; skipped", exc)
            continue
        try:
            rec = client.source_record(address)
            if rec is None:
                logger.warning("%s: source not verified; skipped", address)
                continue
            if with_bytecode:
                code = client.bytecode(address)
                if code is not None:
                    rec = ContractRecord(rec.address, rec.source, rec.abi_json, code,
                                         rec.retrieved_at)
        except ConnectionError as exc:
            logger.error("%s: %s; skipped", address, exc)
            continue
        records.append(rec)
    return records
