"""Command-line pipeline: synth/ingest -> featurize -> label -> trim ->
encode -> train -> eval, plus the experiment harnesses and report rendering.

Every stage writes a ``<output>.manifest.json`` sidecar (config echo + input
hashes) sufficient to replay it byte-for-byte.  Stages communicate through
plain files: line-delimited JSON for trees and features, TSV for reports, and
the documented binary containers for encoded datasets and checkpoints.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .dataio import DatasetMeta, read_dataset, write_dataset
from .encoding import assign_splits, encode_tree
from .experiments import run_experiment
from .features import (
    FeatureError,
    HashedProvider,
    NodeFeatures,
    load_feature_file,
    load_lexicon,
    write_feature_file,
)
from .ingest import ingest_stream
from .labeling import WEIGHT_PRESETS, LabelWeights, label_dataset
from .manifest import write_manifest
from .models import GATConfig
from .models.graphormer import ModelConfig, PRESETS
from .reports import render_aligned
from .synth import FIXTURES, SynthConfig, demo_lexicon
from .training import TrainConfig, evaluate, train
from .trees import read_trees, write_trees
from .trim import TrimConfig, trim_dataset

_CUSTOM_WEIGHTS = re.compile(r"^custom[:(]([^)]*)\)?$")


def _parse_weights(text: str) -> LabelWeights:
    if text in WEIGHT_PRESETS:
        return WEIGHT_PRESETS[text]
    m = _CUSTOM_WEIGHTS.match(text)
    if m:
        parts = [float(x) for x in m.group(1).split(",")]
        if len(parts) != 3:
            raise ValueError(f"custom weights need 3 values, got {len(parts)}")
        return LabelWeights(*parts)
    raise ValueError(
        f"unknown weights {text!r}; use equal|influence|reaction|context|custom(wc,wr,wi)"
    )


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"--split needs train,val,test fractions, got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def _load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_ingest(args, argv) -> int:
    with open(args.input, encoding="utf-8") as fh:
        trees, report = ingest_stream(fh, strict=args.strict)
    write_trees(args.out, trees)
    for diag in report.diagnostics[:20]:
        print(f"ingest: {diag}", file=sys.stderr)
    summary = {
        "total_records": report.total_records,
        "malformed_lines": report.malformed_lines,
        "trees_built": report.trees_built,
        "nodes_kept": report.nodes_kept,
        "orphans_dropped": report.orphans_dropped,
        "rejected_trees": report.rejected_trees,
        "rejected_records": report.rejected_records,
    }
    print(json.dumps(summary))
    write_manifest(args.out, "ingest", argv, summary, [args.input], [args.out])
    return 0


def cmd_synth(args, argv) -> int:
    cfg_dict = _load_json(args.config)
    fixture = cfg_dict.pop("fixture", args.fixture)
    if fixture not in FIXTURES:
        raise ValueError(f"unknown fixture {fixture!r}; choose from {sorted(FIXTURES)}")
    cfg = SynthConfig(**cfg_dict)
    trees = FIXTURES[fixture](cfg)
    write_trees(args.out, trees)
    print(f"synth: wrote {len(trees)} trees to {args.out}")
    write_manifest(
        args.out, "synth", argv, {"fixture": fixture, **cfg_dict}, [args.config], [args.out]
    )
    return 0


def cmd_featurize(args, argv) -> int:
    trees = read_trees(args.trees)
    inputs = [args.trees]
    if args.features:
        provider = load_feature_file(args.features)
        inputs.append(args.features)
        config = {"mode": "file-backed", "d_text": provider.d_text}
    else:
        lexicon = load_lexicon(args.lexicon) if args.lexicon else demo_lexicon()
        if args.lexicon:
            inputs.append(args.lexicon)
        provider = HashedProvider(args.dim, lexicon)
        config = {"mode": "hashed-lexicon", "d_text": args.dim}
    rows: dict[str, NodeFeatures] = {}
    for tree in trees:
        for node in tree.nodes:
            rows[node.id] = provider.features_for(node.id, node.text)
    write_feature_file(args.out, rows)
    print(f"featurize: wrote {len(rows)} rows ({config['mode']}, d_text={provider.d_text})")
    write_manifest(args.out, "featurize", argv, config, inputs, [args.out])
    return 0


def cmd_label(args, argv) -> int:
    trees = read_trees(args.trees)
    inputs = [args.trees]
    if args.features:
        provider = load_feature_file(args.features)
        inputs.append(args.features)
        for tree in trees:
            for node in tree.nodes:
                if node.hate_raw is None:
                    node.hate_raw = provider.features_for(node.id, node.text).hate_raw
    weights = _parse_weights(args.weights)
    trees, dist = label_dataset(trees, weights)
    write_trees(args.out, trees)
    outputs = [args.out]
    if args.report:
        Path(args.report).write_text(dist.to_tsv(), encoding="utf-8")
        outputs.append(args.report)
    print(f"label: {sum(dist.total())} nodes labeled; class totals {dist.total()}")
    config = {
        "weights": {
            "w_context": weights.w_context,
            "w_reaction": weights.w_reaction,
            "w_influence": weights.w_influence,
        }
    }
    write_manifest(args.out, "label", argv, config, inputs, outputs)
    return 0


def cmd_trim(args, argv) -> int:
    trees = read_trees(args.trees)
    cfg = TrimConfig(args.max_depth, args.min_desc, args.min_nodes)
    trimmed, report = trim_dataset(trees, cfg)
    write_trees(args.out, trimmed)
    outputs = [args.out]
    if args.report:
        Path(args.report).write_text(report.to_tsv(), encoding="utf-8")
        outputs.append(args.report)
    print(
        f"trim: kept {report.trees_kept}/{report.trees_in} trees, dropped {report.trees_dropped}"
    )
    config = {
        "max_depth": cfg.max_depth,
        "min_descendants": cfg.min_descendants,
        "min_nodes_after": cfg.min_nodes_after,
    }
    write_manifest(args.out, "trim", argv, config, [args.trees], outputs)
    return 0


def cmd_encode(args, argv) -> int:
    trees = read_trees(args.trees)
    provider = load_feature_file(args.features)
    fractions = _parse_fractions(args.split)
    graphs = [encode_tree(t, provider, args.max_spd, args.max_degree) for t in trees]
    assign_splits(graphs, fractions, args.seed)
    meta = DatasetMeta(provider.d_text + 1, args.max_spd, args.max_degree, args.seed, fractions)
    write_dataset(args.out, graphs, meta)
    n_nodes = sum(g.num_nodes for g in graphs)
    print(f"encode: {len(graphs)} graphs, {n_nodes} nodes, d_in={meta.d_in}")
    config = {
        "max_spd": args.max_spd,
        "max_degree": args.max_degree,
        "fractions": list(fractions),
        "seed": args.seed,
    }
    write_manifest(args.out, "encode", argv, config, [args.trees, args.features], [args.out])
    return 0


def _model_configs(args, overrides: dict):
    model_over = overrides.get("model", {})
    if args.model == "graphormer":
        return PRESETS[args.preset](**model_over)
    return GATConfig(**model_over)


def cmd_train(args, argv) -> int:
    graphs, _ = read_dataset(args.data)
    overrides = _load_json(args.config) if args.config else {}
    model_cfg = _model_configs(args, overrides)
    train_over = dict(overrides.get("train", {}))
    if "betas" in train_over:
        train_over["betas"] = tuple(train_over["betas"])
    cfg = TrainConfig(seed=args.seed, **train_over)
    result = train(args.model, graphs, model_cfg, cfg)
    meta = {
        "model": args.model,
        "model_config": result.model_config,
        "train_config": result.train_config,
        "d_in": result.d_in,
        "best_val": result.best_val,
        "diverged": result.diverged,
    }
    save_checkpoint(args.out, {k: v for k, v in result.params.items()}, meta)
    outputs = [args.out]
    if args.history:
        with open(args.history, "w", encoding="utf-8") as fh:
            for entry in result.history:
                fh.write(json.dumps(entry, sort_keys=True))
                fh.write("\n")
        outputs.append(args.history)
    last = result.history[-1] if result.history else {}
    print(
        f"train: {args.model} {result.steps} steps, "
        f"train_l2={last.get('train_loss')}, val_l2={last.get('val_loss')}"
    )
    inputs = [args.data] + ([args.config] if args.config else [])
    write_manifest(args.out, "train", argv, meta, inputs, outputs)
    if result.diverged:
        print("train: loss diverged; checkpoint holds the last good parameters", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args, argv) -> int:
    tensors, meta = load_checkpoint(args.checkpoint)
    graphs, _ = read_dataset(args.data)
    model = meta["model"]
    if model == "graphormer":
        model_cfg = ModelConfig.from_dict(meta["model_config"])
    else:
        model_cfg = GATConfig.from_dict(meta["model_config"])
    report = evaluate(tensors, model, model_cfg, graphs, args.split, config_echo=meta)
    report.check_consistency()
    tsv = report.to_tsv(method=model)
    Path(args.out).write_text(tsv, encoding="utf-8")
    print(render_aligned(tsv), end="")
    write_manifest(args.out, "eval", argv, meta, [args.checkpoint, args.data], [args.out])
    return 0


def cmd_experiment(args, argv) -> int:
    spec = _load_json(args.spec)
    result = run_experiment(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name, tsv in result.tables.items():
        path = out_dir / f"{name}.tsv"
        path.write_text(tsv, encoding="utf-8")
        outputs.append(path)
        print(render_aligned(tsv), end="")
    details_path = out_dir / "details.json"
    with open(details_path, "w", encoding="utf-8") as fh:
        json.dump(result.details, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(details_path)
    write_manifest(outputs[0], "experiment", argv, spec, [args.spec], outputs)
    return 0


def cmd_report(args, argv) -> int:
    tsv = Path(args.input).read_text(encoding="utf-8")
    text = render_aligned(tsv)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        write_manifest(args.out, "report", argv, {}, [args.input], [args.out])
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hatecast",
        description="Forecast hateful discussion trajectories in comment trees.",
    )
    parser.add_argument("--version", action="version", version=f"hatecast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a line-delimited JSON dump into trees")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--config", required=True, help="JSON file of generator settings")
    p.add_argument("--out", required=True)
    p.add_argument("--fixture", default="standard", choices=sorted(FIXTURES))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("featurize", help="compute or re-emit per-node features")
    p.add_argument("--trees", required=True)
    p.add_argument("--out", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--features", help="precomputed feature file (file-backed mode)")
    group.add_argument("--hashed", action="store_true", help="hashed bag-of-words mode (default)")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--lexicon", help="token-per-line lexicon; demo lexicon if omitted")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("label", help="compute recursive hate labels")
    p.add_argument("--trees", required=True)
    p.add_argument("--features", help="feature file supplying hate_raw when trees lack it")
    p.add_argument("--weights", default="equal")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the class-distribution TSV here")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("trim", help="restrict labeled trees to the prediction view")
    p.add_argument("--trees", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--min-desc", type=int, default=2)
    p.add_argument("--min-nodes", type=int, default=2)
    p.add_argument("--report", help="write the before/after node-count TSV here")
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("encode", help="build the binary encoded dataset")
    p.add_argument("--trees", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-spd", type=int, default=16)
    p.add_argument("--max-degree", type=int, default=64)
    p.add_argument("--split", default="0.7,0.1,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train a model on an encoded dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default="graphormer", choices=["graphormer", "gat"])
    p.add_argument("--preset", default="desk", choices=sorted(PRESETS))
    p.add_argument("--config", help="JSON with optional 'model' and 'train' overrides")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history", help="write per-epoch losses here (ldjson)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run a comparison harness from a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="render a TSV table as aligned text")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    raw_argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(raw_argv)
    try:
        return args.func(args, raw_argv)
    except (ValueError, RuntimeError, FeatureError, OSError) as exc:
        print(f"hatecast {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
