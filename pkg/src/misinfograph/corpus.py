"""Labeled-corpus construction: load, normalize, merge, dedup, split.

Heterogeneous source datasets (CSV with a header row, or newline-delimited
JSON) are read into ``RawRecord`` lists, their verbatim labels mapped to
binary fake(1)/real(0) through per-source mapping tables, merged into a
deduplicated ``Corpus``, and split into train/validation sets.

The mapping tables live in ``data/label_maps.json`` so a new source can be
registered by editing data, not code.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import InputError, LabelMappingError, UnknownSourceError

logger = logging.getLogger(__name__)

#: Sentinel returned by :func:`normalize_label` for records excluded from
#: the corpus (e.g. LIAR's middle truthfulness grades).
DROP = "drop"

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class RawRecord:
    source_id: str
    text: str
    original_label: str


@dataclass(frozen=True)
class LabeledDocument:
    doc_id: str
    text: str
    label: int  # 1=fake, 0=real
    source_id: str


@dataclass(frozen=True)
class SourceSpec:
    """Loader schema plus label mapping for one registered source."""

    name: str
    format: str  # "csv" | "ndjson"
    text_field: str
    label_field: str | None
    labels: dict[str, int | str]
    fixed_label: str | None = None


@dataclass
class LoadResult:
    """Records from one file plus skip/malformed bookkeeping."""

    records: list[RawRecord]
    skipped_empty: int = 0
    malformed: int = 0

    def __len__(self) -> int:
        return len(self.records)


def _load_registry() -> dict[str, SourceSpec]:
    registry: dict[str, SourceSpec] = {}
    with open(_DATA_DIR / "label_maps.json", encoding="utf-8") as f:
        raw = json.load(f)
    for name, spec in raw.items():
        registry[name] = SourceSpec(
            name=name,
            format=spec["format"],
            text_field=spec["text_field"],
            label_field=spec.get("label_field"),
            labels=spec["labels"],
            fixed_label=spec.get("fixed_label"),
        )
    return registry


_REGISTRY: dict[str, SourceSpec] = _load_registry()


def registered_sources() -> list[str]:
    return sorted(_REGISTRY)


def get_source(source_kind: str) -> SourceSpec:
    try:
        return _REGISTRY[source_kind]
    except KeyError:
        raise UnknownSourceError(source_kind, _REGISTRY) from None


def register_source(spec: SourceSpec, replace: bool = False) -> None:
    if spec.name in _REGISTRY and not replace:
        raise InputError(f"source {spec.name!r} already registered")
    _REGISTRY[spec.name] = spec


def register_sources_from(path: str | Path, replace: bool = False) -> list[str]:
    """Register sources from a mapping file shaped like label_maps.json."""
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    names = []
    for name, spec in raw.items():
        register_source(
            SourceSpec(
                name=name,
                format=spec["format"],
                text_field=spec["text_field"],
                label_field=spec.get("label_field"),
                labels=spec["labels"],
                fixed_label=spec.get("fixed_label"),
            ),
            replace=replace,
        )
        names.append(name)
    return names


def normalized_text(text: str) -> str:
    """Lowercased, whitespace-collapsed form used for hashing and dedup."""
    return " ".join(text.lower().split())


def doc_id_for(text: str) -> str:
    # stable 64-bit content hash; near-duplicate detection is out of scope
    h = hashlib.blake2b(normalized_text(text).encode("utf-8"), digest_size=8)
    return h.hexdigest()


def load_source(path: str | Path, source_kind: str, tolerance: float = 0.01) -> LoadResult:
    """Read one source file into RawRecords.

    Rows whose text is empty after trimming are skipped and counted.
    Structurally broken rows (missing columns, bad JSON) are counted as
    malformed; if their fraction exceeds ``tolerance`` the load aborts.
    """
    spec = get_source(source_kind)
    result = LoadResult(records=[])
    total = 0

    try:
        f = open(path, encoding="utf-8", newline="")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e

    with f:
        if spec.format == "csv":
            reader = csv.DictReader(f)
            for row in reader:
                total += 1
                _ingest_row(row, spec, result)
        elif spec.format == "ndjson":
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                total += 1
                try:
                    row = json.loads(line)
                except json.JSONDecodeError:
                    result.malformed += 1
                    continue
                if not isinstance(row, dict):
                    result.malformed += 1
                    continue
                _ingest_row(row, spec, result)
        else:
            raise InputError(f"source {source_kind!r} has unsupported format {spec.format!r}")

    if total > 0 and result.malformed / total > tolerance:
        raise InputError(
            f"{path}: {result.malformed}/{total} malformed rows exceeds "
            f"tolerance {tolerance:.2%}"
        )
    return result


def _ingest_row(row: dict, spec: SourceSpec, result: LoadResult) -> None:
    text = row.get(spec.text_field)
    if text is None:
        result.malformed += 1
        return
    if spec.label_field is not None:
        label = row.get(spec.label_field)
        if label is None:
            result.malformed += 1
            return
        label = str(label).strip()
    else:
        label = spec.fixed_label
    text = str(text).strip()
    if not text:
        result.skipped_empty += 1
        return
    result.records.append(RawRecord(source_id=spec.name, text=text, original_label=label))


def normalize_label(source_kind: str, original_label: str) -> int | str:
    """Map a verbatim source label to 0 (real), 1 (fake) or DROP."""
    spec = get_source(source_kind)
    try:
        mapped = spec.labels[original_label]
    except KeyError:
        raise LabelMappingError(source_kind, original_label, spec.labels) from None
    return DROP if mapped == DROP else int(mapped)


@dataclass
class Corpus:
    """Immutable merged corpus; counts are derived from the documents."""

    documents: list[LabeledDocument]
    label_counts: dict[int, int] = field(init=False)
    source_counts: dict[str, int] = field(init=False)

    def __post_init__(self):
        seen = set()
        labels = {0: 0, 1: 0}
        sources: dict[str, int] = {}
        for doc in self.documents:
            if doc.doc_id in seen:
                raise InputError(f"duplicate doc_id {doc.doc_id} in corpus")
            seen.add(doc.doc_id)
            labels[doc.label] += 1
            sources[doc.source_id] = sources.get(doc.source_id, 0) + 1
        self.label_counts = labels
        self.source_counts = sources

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


def merge_corpora(record_lists) -> Corpus:
    """Merge record lists into one corpus.

    Labels are normalized per source; DROP records are excluded; exact
    duplicates (by normalized text) are removed keeping the first
    occurrence.
    """
    lists = list(record_lists)
    if not any(lists):
        raise InputError("nothing to merge: all record lists are empty")

    documents: list[LabeledDocument] = []
    seen: set[str] = set()
    dropped = 0
    duplicates = 0
    for records in lists:
        for rec in records:
            label = normalize_label(rec.source_id, rec.original_label)
            if label == DROP:
                dropped += 1
                continue
            did = doc_id_for(rec.text)
            if did in seen:
                duplicates += 1
                continue
            seen.add(did)
            documents.append(
                LabeledDocument(doc_id=did, text=rec.text, label=label, source_id=rec.source_id)
            )

    if not documents:
        raise InputError("empty corpus: every record was dropped by its label mapping")
    logger.info(
        "merged %d documents (%d dropped by label, %d duplicates removed)",
        len(documents), dropped, duplicates,
    )
    return Corpus(documents)


def split(corpus: Corpus, train_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministic seeded split into (train, validation).

    Validation gets floor((1-train_fraction)*N) documents, reading the
    fraction as the decimal the caller wrote (so 0.8 of 10 docs gives a
    2-doc validation set despite binary-float rounding).
    """
    if not 0.0 < train_fraction < 1.0:
        raise InputError(f"train_fraction must be in (0,1), got {train_fraction}")
    if len(corpus) == 0:
        raise InputError("cannot split an empty corpus")

    frac = Fraction(train_fraction).limit_denominator(10**6)
    n = len(corpus)
    val_size = int((1 - frac) * n)

    order = list(range(n))
    random.Random(seed).shuffle(order)
    val_docs = [corpus.documents[i] for i in order[:val_size]]
    train_docs = [corpus.documents[i] for i in order[val_size:]]
    return Corpus(train_docs), Corpus(val_docs)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Serialize as NDJSON; byte-identical for identical corpora."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for doc in corpus.documents:
            f.write(
                json.dumps(
                    {
                        "doc_id": doc.doc_id,
                        "label": doc.label,
                        "source_id": doc.source_id,
                        "text": doc.text,
                    },
                    sort_keys=True,
                    ensure_ascii=False,
                )
            )
            f.write("\n")


def read_corpus(path: str | Path) -> Corpus:
    documents = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                documents.append(
                    LabeledDocument(
                        doc_id=row["doc_id"],
                        text=row["text"],
                        label=int(row["label"]),
                        source_id=row["source_id"],
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise InputError(f"{path}:{line_no}: bad corpus line ({e})") from e
    if not documents:
        raise InputError(f"{path}: empty corpus file")
    return Corpus(documents)


def build_from_manifest(manifest_path: str | Path, tolerance: float = 0.01) -> Corpus:
    """Build a corpus from a manifest listing {"path","kind"} entries.

    Relative paths resolve against the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path, encoding="utf-8") as f:
            entries = json.load(f)
    except OSError as e:
        raise InputError(f"cannot read manifest {manifest_path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"manifest {manifest_path} is not valid JSON: {e}") from e
    if not isinstance(entries, list) or not entries:
        raise InputError(f"manifest {manifest_path} must be a non-empty JSON array")

    batches = []
    for entry in entries:
        try:
            path = Path(entry["path"])
            kind = entry["kind"]
        except (TypeError, KeyError) as e:
            raise InputError(f"manifest entry {entry!r} needs 'path' and 'kind'") from e
        if not path.is_absolute():
            path = manifest_path.parent / path
        batches.append(load_source(path, kind, tolerance=tolerance).records)
    return merge_corpora(batches)
