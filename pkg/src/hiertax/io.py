"""Corpus ingestion and the on-disk artifact formats.

All artifacts are self-describing JSON documents carrying a ``format`` tag
and an echo of the configuration that produced them; corpora are either
JSON-lines records (``{"id": ..., "text": ...}``) or tab-separated
``doc-id<TAB>term<TAB>count`` triples. Writers are deterministic: the same
inputs produce byte-identical files.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError
from .flat import FlatClustering
from .types import (
    ClusterStats,
    Dendrogram,
    FeaturePartition,
    HierarchyNode,
    Lexicon,
    MergeRecord,
    ModelConfig,
    SparseDocMatrix,
)

FORMAT_CORPUS_LABELS = "hiertax/labels/1"
FORMAT_FLAT = "hiertax/flat/1"
FORMAT_DENDROGRAM = "hiertax/dendrogram/1"
FORMAT_LABELING = "hiertax/labeling/1"

_TOKEN = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class IngestResult:
    data: SparseDocMatrix
    lexicon: Lexicon
    doc_ids: tuple[str, ...]


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Word tokens: maximal alphanumeric/underscore runs, optionally lowercased."""
    if lowercase:
        text = text.lower()
    return _TOKEN.findall(text)


def _read_jsonl(lines: Iterable[str]) -> list[tuple[str, str]]:
    raw: list[tuple[str, str]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            doc_id = rec["id"]
            text = rec["text"]
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise InputError(f"line {lineno}: malformed corpus record ({exc})") from None
        raw.append((str(doc_id), str(text)))
    return raw


def _read_counts(lines: Iterable[str]) -> list[tuple[str, str, int]]:
    triples: list[tuple[str, str, int]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 3:
            raise InputError(f"line {lineno}: expected doc-id<TAB>term<TAB>count")
        doc_id, term, count_str = parts
        try:
            count = int(count_str)
        except ValueError:
            raise InputError(f"line {lineno}: count {count_str!r} is not an integer") from None
        if count < 1:
            raise InputError(f"line {lineno}: count must be a positive integer")
        triples.append((doc_id, term, count))
    return triples


def ingest(
    path: str | Path,
    fmt: str = "auto",
    min_df: int = 1,
    lowercase: bool = True,
) -> IngestResult:
    """Read a corpus file into a sparse matrix plus its lexicon.

    ``fmt`` is "jsonl", "counts", or "auto" (by extension: .jsonl/.json are
    JSON lines, anything else count triples). Terms seen in fewer than
    ``min_df`` documents are dropped and feature ids are compacted; the
    lexicon keeps first-seen order of the surviving terms.
    """
    path = Path(path)
    if fmt == "auto":
        fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".json") else "counts"
    if fmt not in ("jsonl", "counts"):
        raise InputError(f"unknown corpus format {fmt!r}")
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read corpus file: {exc}") from None

    doc_ids: list[str] = []
    doc_terms: list[dict[str, int]] = []
    index: dict[str, int] = {}
    if fmt == "jsonl":
        for doc_id, text in _read_jsonl(lines):
            if doc_id in index:
                raise InputError(f"duplicate document id {doc_id!r}")
            index[doc_id] = len(doc_ids)
            doc_ids.append(doc_id)
            counts: dict[str, int] = {}
            for tok in tokenize(text, lowercase=lowercase):
                counts[tok] = counts.get(tok, 0) + 1
            doc_terms.append(counts)
    else:
        for doc_id, term, count in _read_counts(lines):
            if lowercase:
                term = term.lower()
            if doc_id not in index:
                index[doc_id] = len(doc_ids)
                doc_ids.append(doc_id)
                doc_terms.append({})
            row = doc_terms[index[doc_id]]
            row[term] = row.get(term, 0) + count

    first_seen: dict[str, int] = {}
    df: dict[str, int] = {}
    for counts in doc_terms:
        for term in counts:
            if term not in first_seen:
                first_seen[term] = len(first_seen)
            df[term] = df.get(term, 0) + 1
    kept = [t for t in sorted(first_seen, key=first_seen.get) if df[t] >= min_df]
    if not kept or all(not c for c in doc_terms):
        raise InputError("corpus is empty after pruning")
    lexicon = Lexicon(terms=tuple(kept))
    fid = {t: i for i, t in enumerate(kept)}

    rows = [
        {fid[t]: c for t, c in counts.items() if t in fid} for counts in doc_terms
    ]
    data = SparseDocMatrix.from_rows(rows, lexicon.size)
    return IngestResult(data=data, lexicon=lexicon, doc_ids=tuple(doc_ids))


def write_counts_corpus(path: str | Path, data: SparseDocMatrix, lexicon: Lexicon,
                        doc_ids: Sequence[str]) -> None:
    """Write a corpus in the count-triple format, rows and terms in order."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(data.rows):
            for f in sorted(row):
                fh.write(f"{doc_ids[i]}\t{lexicon.term_of(f)}\t{row[f]}\n")


def _dump_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path: str | Path, expected_format: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: cannot load ({exc})") from None
    if payload.get("format") != expected_format:
        raise InputError(
            f"{path}: expected format {expected_format!r}, found {payload.get('format')!r}"
        )
    return payload


def config_echo(config: ModelConfig) -> dict:
    def plain(v):
        arr = np.asarray(v)
        return arr.tolist() if arr.ndim else (arr.item() if isinstance(v, np.generic) else v)

    return {
        "alpha": plain(config.alpha),
        "beta": plain(config.beta),
        "gamma_useful": config.gamma_useful,
        "gamma_noise": config.gamma_noise,
        "sigma": plain(config.sigma),
        "k_range": list(config.k_range),
        "restarts": config.restarts,
        "seed": config.seed,
        "em_max_iters": config.em_max_iters,
        "em_tol": config.em_tol,
        "noise_prefix_rule": config.noise_prefix_rule,
    }


def config_from_dict(raw: dict) -> ModelConfig:
    known = set(config_echo(ModelConfig()))
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if "k_range" in kwargs:
        kwargs["k_range"] = tuple(kwargs["k_range"])
    for key in ("alpha", "beta", "sigma"):
        if key in kwargs and isinstance(kwargs[key], list):
            kwargs[key] = tuple(kwargs[key])
    return ModelConfig(**kwargs)


def write_labels_file(
    path: str | Path,
    doc_ids: Sequence[str],
    leaf_labels: Sequence[int],
    level_labels: dict[int, Sequence[int]],
    noise_terms: Optional[dict[str, list[str]]] = None,
) -> None:
    payload = {
        "format": FORMAT_CORPUS_LABELS,
        "doc_ids": list(doc_ids),
        "leaf": [int(v) for v in leaf_labels],
        "levels": {str(k): [int(v) for v in vs] for k, vs in level_labels.items()},
    }
    if noise_terms is not None:
        payload["noise_terms"] = noise_terms
    _dump_json(path, payload)


def read_labels_file(path: str | Path) -> dict:
    return _load_json(path, FORMAT_CORPUS_LABELS)


def _stats_payload(stats: ClusterStats, lexicon: Lexicon) -> dict:
    return {
        "doc_count": stats.doc_count,
        "total_tokens": stats.total_tokens,
        "term_counts": {lexicon.term_of(f): int(c) for f, c in sorted(stats.term_counts.items())},
    }


def _stats_from_payload(payload: dict, lexicon: Lexicon) -> ClusterStats:
    counts = {lexicon.id_of(t): int(c) for t, c in payload["term_counts"].items()}
    return ClusterStats(
        term_counts=counts,
        total_tokens=int(payload["total_tokens"]),
        doc_count=int(payload["doc_count"]),
    )


def write_flat_file(
    path: str | Path,
    flat: FlatClustering,
    lexicon: Lexicon,
    config: ModelConfig,
    doc_ids: Sequence[str],
) -> None:
    payload = {
        "format": FORMAT_FLAT,
        "config": config_echo(config),
        "lexicon": list(lexicon.terms),
        "doc_ids": list(doc_ids),
        "k": flat.k,
        "assignments": [int(a) for a in flat.assignments],
        "noise_terms": sorted(lexicon.term_of(f) for f in flat.partition.noise),
        "score": flat.score,
        "clusters": [_stats_payload(s, lexicon) for s in flat.stats],
    }
    _dump_json(path, payload)


def read_flat_file(path: str | Path) -> tuple[FlatClustering, Lexicon, ModelConfig, tuple[str, ...]]:
    payload = _load_json(path, FORMAT_FLAT)
    lexicon = Lexicon(terms=tuple(payload["lexicon"]))
    partition = FeaturePartition.from_noise(
        (lexicon.id_of(t) for t in payload["noise_terms"]), lexicon.size
    )
    flat = FlatClustering(
        k=int(payload["k"]),
        assignments=tuple(int(a) for a in payload["assignments"]),
        stats=tuple(_stats_from_payload(p, lexicon) for p in payload["clusters"]),
        partition=partition,
        score=float(payload["score"]),
    )
    return flat, lexicon, config_from_dict(payload["config"]), tuple(payload["doc_ids"])


@dataclass(frozen=True)
class DendrogramFile:
    """Everything a saved hierarchy carries: the tree, the lexicon, the
    global feature partition, score summary and config echo."""

    dendrogram: Dendrogram
    lexicon: Lexicon
    partition: FeaturePartition
    config: ModelConfig
    flat_log_ml: float
    final_log_ml: float
    mode: str
    doc_ids: tuple[str, ...]


def write_dendrogram_file(path: str | Path, df: DendrogramFile) -> None:
    lex = df.lexicon
    nodes_payload = {}
    for node in df.dendrogram.nodes.values():
        nodes_payload[str(node.node_id)] = {
            "children": list(node.children),
            "parent": node.parent,
            "local_noise": sorted(lex.term_of(f) for f in node.local_noise),
            "eligible": sorted(lex.term_of(f) for f in node.eligible),
            "member_docs": sorted(int(d) for d in node.member_docs),
            "stats": _stats_payload(node.stats, lex),
        }
    payload = {
        "format": FORMAT_DENDROGRAM,
        "config": config_echo(df.config),
        "mode": df.mode,
        "lexicon": list(lex.terms),
        "doc_ids": list(df.doc_ids),
        "noise_terms": sorted(lex.term_of(f) for f in df.partition.noise),
        "root": df.dendrogram.root,
        "nodes": nodes_payload,
        "merge_trace": [
            {
                "left": rec.left,
                "right": rec.right,
                "new_id": rec.new_id,
                "noise": sorted(lex.term_of(f) for f in rec.noise),
                "delta": rec.delta,
            }
            for rec in df.dendrogram.merge_trace
        ],
        "scores": {"flat_log_ml": df.flat_log_ml, "final_log_ml": df.final_log_ml},
    }
    _dump_json(path, payload)


def read_dendrogram_file(path: str | Path) -> DendrogramFile:
    payload = _load_json(path, FORMAT_DENDROGRAM)
    lex = Lexicon(terms=tuple(payload["lexicon"]))
    nodes: dict[int, HierarchyNode] = {}
    for nid_str, np_ in payload["nodes"].items():
        nid = int(nid_str)
        nodes[nid] = HierarchyNode(
            node_id=nid,
            children=tuple(int(c) for c in np_["children"]),
            parent=None if np_["parent"] is None else int(np_["parent"]),
            local_noise=frozenset(lex.id_of(t) for t in np_["local_noise"]),
            eligible=frozenset(lex.id_of(t) for t in np_["eligible"]),
            stats=_stats_from_payload(np_["stats"], lex),
            member_docs=frozenset(int(d) for d in np_["member_docs"]),
        )
    trace = tuple(
        MergeRecord(
            left=int(rec["left"]),
            right=int(rec["right"]),
            new_id=int(rec["new_id"]),
            noise=frozenset(lex.id_of(t) for t in rec["noise"]),
            delta=float(rec["delta"]),
        )
        for rec in payload["merge_trace"]
    )
    dendro = Dendrogram(nodes=nodes, root=int(payload["root"]), merge_trace=trace)
    partition = FeaturePartition.from_noise(
        (lex.id_of(t) for t in payload["noise_terms"]), lex.size
    )
    return DendrogramFile(
        dendrogram=dendro,
        lexicon=lex,
        partition=partition,
        config=config_from_dict(payload["config"]),
        flat_log_ml=float(payload["scores"]["flat_log_ml"]),
        final_log_ml=float(payload["scores"]["final_log_ml"]),
        mode=str(payload["mode"]),
        doc_ids=tuple(payload["doc_ids"]),
    )


def write_labeling_file(path: str | Path, labels: Sequence[int], k: int,
                        doc_ids: Sequence[str]) -> None:
    payload = {
        "format": FORMAT_LABELING,
        "k": int(k),
        "doc_ids": list(doc_ids),
        "labels": [int(v) for v in labels],
    }
    _dump_json(path, payload)


def read_labeling_file(path: str | Path) -> dict:
    return _load_json(path, FORMAT_LABELING)
