"""Command-line interface.

Subcommands cover the whole pipeline: ``synth`` writes a benchmark corpus,
``cluster`` fits the flat stage, ``hierarchy`` builds the merge tree,
``eval`` prints an agreement report against reference labels, ``cut``
extracts a k-way labelling and ``labels`` prints a node's shared terms.

Exit codes: 0 success, 1 invalid input, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import io as hio
from .errors import InputError, InternalError
from .evaluate import cut, nmi, node_labels
from .flat import root_noise_search, select_k
from .likelihood import flat_log_ml, hierarchy_log_ml
from .merge import build_hierarchy
from .synth import STRUCTURE_1, STRUCTURE_2, StructureSpec, gen_params, sample
from .types import FeaturePartition, Lexicon, ModelConfig


def _parse_k_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise InputError(f"--k-range must look like A..B, got {text!r}") from None


def _config_from_args(args, base: dict | None = None) -> ModelConfig:
    """Precedence: defaults < ``base`` < config file < explicit flags."""
    raw: dict = dict(base) if base else {}
    if getattr(args, "config", None):
        try:
            raw.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config file: {exc}") from None
    if getattr(args, "k_range", None) is not None:
        raw["k_range"] = list(_parse_k_range(args.k_range))
    for flag in ("restarts", "seed", "alpha"):
        value = getattr(args, flag, None)
        if value is not None:
            raw[flag] = value
    if getattr(args, "prefix_rule", None) is not None:
        raw["noise_prefix_rule"] = {
            "first-decrease": "first-decrease",
            "best": "best-prefix",
        }[args.prefix_rule]
    return hio.config_from_dict(raw)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with model configuration")
    p.add_argument("--k-range", dest="k_range", help="candidate cluster counts, e.g. 3..7")
    p.add_argument("--restarts", type=int, help="random restarts per cluster count")
    p.add_argument("--seed", type=int, help="base RNG seed")
    p.add_argument("--alpha", type=float, help="scalar feature hyperparameter")
    p.add_argument(
        "--prefix-rule",
        choices=["first-decrease", "best"],
        help="stop rule of the greedy shared-feature scan",
    )


def _ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="corpus file (.jsonl or count triples)")
    p.add_argument("--input-format", choices=["auto", "jsonl", "counts"], default="auto")
    p.add_argument("--min-df", type=int, default=1, help="minimum document frequency")
    p.add_argument("--no-lowercase", action="store_true", help="keep original casing")


def _run_flat(args):
    ingest = hio.ingest(
        args.input, fmt=args.input_format, min_df=args.min_df, lowercase=not args.no_lowercase
    )
    config = _config_from_args(args)
    partition = FeaturePartition.all_useful(ingest.lexicon.size)
    flat = select_k(ingest.data, partition, config)
    if getattr(args, "root_noise", "off") == "on":
        partition = root_noise_search(ingest.data, flat, config)
        flat = dataclasses.replace(
            flat, partition=partition, score=flat_log_ml(flat.stats, partition, config)
        )
    return ingest, config, flat


def cmd_synth(args) -> int:
    shape = {"1": STRUCTURE_1, "2": STRUCTURE_2}[args.structure]
    default_alloc = {"1": (15, 21), "2": (24, 20, 15)}[args.structure]
    alloc = (
        tuple(int(x) for x in args.noise_alloc.split(",")) if args.noise_alloc else default_alloc
    )
    spec = StructureSpec(
        shape=shape,
        feature_count=args.features,
        noise_alloc=alloc,
        min_useful_mass=args.min_useful_mass,
        docs_per_leaf=args.docs_per_leaf,
        tokens_per_doc=args.tokens_per_doc,
        seed=args.seed if args.seed is not None else 0,
    )
    truth = gen_params(spec)
    data, truth = sample(truth, spec)
    lexicon = Lexicon(tuple(f"f{i:03d}" for i in range(spec.feature_count)))
    doc_ids = tuple(f"d{i:06d}" for i in range(data.num_docs))
    hio.write_counts_corpus(args.out_corpus, data, lexicon, doc_ids)
    noise_terms = {
        f"node{nid}": sorted(lexicon.term_of(f) for f in feats)
        for nid, feats in truth.noise_sets.items()
    }
    hio.write_labels_file(
        args.out_labels, doc_ids, truth.leaf_labels, truth.level_labels, noise_terms
    )
    print(f"wrote {data.num_docs} documents over {spec.feature_count} features")
    return 0


def cmd_cluster(args) -> int:
    ingest, config, flat = _run_flat(args)
    hio.write_flat_file(args.out, flat, ingest.lexicon, config, ingest.doc_ids)
    print(f"k\t{flat.k}")
    print(f"log_ml\t{flat.score:.6f}")
    return 0


def cmd_hierarchy(args) -> int:
    if args.flat:
        flat, lexicon, config, doc_ids = hio.read_flat_file(args.flat)
        config = _config_from_args(args, base=hio.config_echo(config))
    else:
        if not args.input:
            raise InputError("either --flat or --input is required")
        ingest, config, flat = _run_flat(args)
        lexicon, doc_ids = ingest.lexicon, ingest.doc_ids

    dendro = build_hierarchy(flat, config, mode=args.mode)
    dendro.validate()
    final = hierarchy_log_ml(dendro, flat.partition, config)
    traced = flat.score + sum(rec.delta for rec in dendro.merge_trace)
    if abs(final - traced) > 1e-6 * max(1.0, abs(final)):
        raise InternalError(
            f"hierarchy score mismatch: recomputed {final!r} vs traced {traced!r}"
        )

    df = hio.DendrogramFile(
        dendrogram=dendro,
        lexicon=lexicon,
        partition=flat.partition,
        config=config,
        flat_log_ml=flat.score,
        final_log_ml=final,
        mode=args.mode,
        doc_ids=doc_ids,
    )
    hio.write_dendrogram_file(args.out, df)
    print(f"leaves\t{len(dendro.leaf_ids())}")
    print(f"merges\t{len(dendro.merge_trace)}")
    print(f"flat_log_ml\t{flat.score:.6f}")
    print(f"final_log_ml\t{final:.6f}")
    return 0


def cmd_eval(args) -> int:
    df = hio.read_dendrogram_file(args.dendrogram)
    labels = hio.read_labels_file(args.labels)
    dendro = df.dendrogram
    n_leaves = len(dendro.leaf_ids())

    print(f"merges\t{len(dendro.merge_trace)}")
    print(f"flat_log_ml\t{df.flat_log_ml:.6f}")
    print(f"final_log_ml\t{df.final_log_ml:.6f}")

    leaf_truth = labels["leaf"]
    leaf_found = cut(dendro, n_leaves)
    print(f"nmi_leaf\t{nmi(leaf_found, leaf_truth):.6f}")
    for level in sorted(labels.get("levels", {}), key=int):
        truth = labels["levels"][level]
        k = len(set(truth))
        try:
            found = cut(dendro, k)
            print(f"nmi_level_{level}\t{nmi(found, truth):.6f}")
        except InputError:
            print(f"nmi_level_{level}\tNA")
    return 0


def cmd_cut(args) -> int:
    df = hio.read_dendrogram_file(args.dendrogram)
    labeling = cut(df.dendrogram, args.k)
    if args.out:
        hio.write_labeling_file(args.out, labeling.labels, labeling.k, df.doc_ids)
    else:
        for doc_id, label in zip(df.doc_ids, labeling.labels):
            print(f"{doc_id}\t{label}")
    return 0


def cmd_labels(args) -> int:
    df = hio.read_dendrogram_file(args.dendrogram)
    for term in node_labels(df.dendrogram, args.node, df.lexicon, args.top):
        print(term)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hiertax",
        description="Hierarchical clustering of bag-of-words corpora by Bayesian marginal likelihood",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a benchmark corpus with known structure")
    p.add_argument("--structure", choices=["1", "2"], default="1")
    p.add_argument("--features", type=int, default=50)
    p.add_argument("--noise-alloc", help="comma-separated block sizes per internal node")
    p.add_argument("--min-useful-mass", type=float, default=0.5)
    p.add_argument("--docs-per-leaf", type=int, default=500)
    p.add_argument("--tokens-per-doc", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-corpus", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("cluster", help="flat clustering with model selection")
    _ingest_flags(p)
    _add_config_flags(p)
    p.add_argument("--root-noise", choices=["on", "off"], default="off")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("hierarchy", help="build the merge tree (runs both stages unless --flat)")
    p.add_argument("--flat", help="flat clustering file from the cluster command")
    p.add_argument("--input", help="corpus file; triggers the flat stage first")
    p.add_argument("--input-format", choices=["auto", "jsonl", "counts"], default="auto")
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--no-lowercase", action="store_true")
    _add_config_flags(p)
    p.add_argument("--root-noise", choices=["on", "off"], default="off")
    p.add_argument("--mode", choices=["fs", "nofs"], default="fs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("eval", help="agreement report against reference labels")
    p.add_argument("--dendrogram", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cut", help="k-way labelling from the tree")
    p.add_argument("--dendrogram", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cut)

    p = sub.add_parser("labels", help="print a node's shared terms")
    p.add_argument("--dendrogram", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_labels)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything else is an internal invariant failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
