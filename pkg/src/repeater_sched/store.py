"""Append-only, resumable store for sweep results.

A store directory holds a manifest (the sweep's full configuration,
engine version, and seed) plus newline-delimited JSON records.  Every
record carries the complete chain parameters and executed schedule, so
it can be replayed without the original config file.  Resuming checks
the manifest hash and refuses to mix results from different setups.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterator

from . import ENGINE_VERSION
from .protocol import ChainParams

MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "records.ndjson"
STORE_FORMAT = 1


class StoreError(RuntimeError):
    pass


class ManifestMismatch(StoreError):
    pass


class CorruptRecord(StoreError):
    pass


def canonical_json(payload) -> str:
    """Stable serialization used for hashing and for record lines."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def derive_record_seed(global_seed: int, *coordinates) -> int:
    """Per-record seed: stable hash of the global seed and the record's
    coordinates, so records are independent of evaluation order."""
    text = "|".join([str(global_seed), *map(str, coordinates)])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True, slots=True)
class SweepRecord:
    """One evaluated (parameter point, distance, policy) result."""

    grid_hash: str
    engine_version: str
    segments: int
    multiplexing: int
    coupling_eff: float
    gate_error: float
    total_distance_m: float
    attenuation_m: float
    coherence_time_s: float
    signal_speed_m_s: float
    policy: str
    schedule: tuple[int, ...]
    skr: float
    seed: int
    trace_digest: str
    flags: tuple[str, ...] = ()
    search_evaluated: int | None = None

    @property
    def key(self) -> tuple:
        return (
            self.segments,
            self.multiplexing,
            self.coupling_eff,
            self.gate_error,
            self.total_distance_m,
            self.policy,
        )

    def chain_params(self) -> ChainParams:
        return ChainParams(
            segments=self.segments,
            multiplexing=self.multiplexing,
            coupling_eff=self.coupling_eff,
            gate_error=self.gate_error,
            total_distance_m=self.total_distance_m,
            attenuation_m=self.attenuation_m,
            coherence_time_s=self.coherence_time_s,
            signal_speed_m_s=self.signal_speed_m_s,
        )

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["schedule"] = list(self.schedule)
        payload["flags"] = list(self.flags)
        return payload

    @staticmethod
    def from_dict(payload: dict) -> "SweepRecord":
        data = dict(payload)
        data["schedule"] = tuple(data["schedule"])
        data["flags"] = tuple(data.get("flags", ()))
        return SweepRecord(**data)


def trace_digest(trace_dicts: list[dict]) -> str:
    return hashlib.sha256(canonical_json(trace_dicts).encode()).hexdigest()


class ResultsStore:
    """Directory-backed record store with line-atomic appends."""

    def __init__(self, path: Path, manifest: dict) -> None:
        self.path = Path(path)
        self.manifest = manifest

    @staticmethod
    def create(path: Path, manifest: dict) -> "ResultsStore":
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        manifest_path = path / MANIFEST_NAME
        if manifest_path.exists():
            raise StoreError(f"store already exists at {path}")
        manifest = dict(manifest, format=STORE_FORMAT, engine_version=ENGINE_VERSION)
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        (path / RECORDS_NAME).touch()
        return ResultsStore(path, manifest)

    @staticmethod
    def open(path: Path) -> "ResultsStore":
        path = Path(path)
        manifest_path = path / MANIFEST_NAME
        if not manifest_path.exists():
            raise StoreError(f"no manifest found in {path}")
        manifest = json.loads(manifest_path.read_text())
        return ResultsStore(path, manifest)

    @staticmethod
    def create_or_resume(path: Path, manifest: dict) -> "ResultsStore":
        """Open an existing store, insisting its manifest matches; create
        a fresh one otherwise."""
        path = Path(path)
        if (path / MANIFEST_NAME).exists():
            store = ResultsStore.open(path)
            expected = dict(manifest, format=STORE_FORMAT, engine_version=ENGINE_VERSION)
            if store.manifest != expected:
                raise ManifestMismatch(
                    f"manifest in {path} does not match the requested sweep; "
                    "refusing to mix results"
                )
            store._check_tail()
            return store
        return ResultsStore.create(path, manifest)

    @property
    def records_path(self) -> Path:
        return self.path / RECORDS_NAME

    def _check_tail(self) -> None:
        """A truncated final line means an interrupted write; fail loudly."""
        try:
            with self.records_path.open("rb") as fh:
                fh.seek(0, os.SEEK_END)
                if fh.tell() == 0:
                    return
                fh.seek(-1, os.SEEK_END)
                if fh.read(1) != b"\n":
                    raise CorruptRecord(
                        f"{self.records_path} ends mid-record (torn write); "
                        "repair or restart the store"
                    )
        except FileNotFoundError:
            raise StoreError(f"records file missing from {self.path}") from None

    def append(self, record: SweepRecord) -> None:
        line = canonical_json(record.to_dict())
        with self.records_path.open("a") as fh:
            fh.write(line + "\n")
            fh.flush()

    def iter_records(self) -> Iterator[SweepRecord]:
        with self.records_path.open() as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped:
                    continue
                try:
                    payload = json.loads(stripped)
                    yield SweepRecord.from_dict(payload)
                except (ValueError, TypeError, KeyError) as exc:
                    raise CorruptRecord(
                        f"{self.records_path}:{lineno}: unreadable record ({exc})"
                    ) from exc

    def records(self) -> list[SweepRecord]:
        return list(self.iter_records())

    def existing_keys(self) -> set[tuple]:
        return {record.key for record in self.iter_records()}


def discover_stores(root: Path) -> dict[str, Path]:
    """Map store ids to paths under a root directory.

    The root may itself be a single store, or a directory of stores.
    """
    root = Path(root)
    if (root / MANIFEST_NAME).exists():
        return {root.name: root}
    found: dict[str, Path] = {}
    if root.is_dir():
        for child in sorted(root.iterdir()):
            if child.is_dir() and (child / MANIFEST_NAME).exists():
                found[child.name] = child
    return found
