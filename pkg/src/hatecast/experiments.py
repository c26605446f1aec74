"""Experiment harnesses for the three model comparisons.

Specs are plain dicts (JSON files on the CLI side):

    kind:        "context-ab" | "community" | "sensitivity"
    seeds:       run seeds; data, splits and training all derive from them
    synth:       SynthConfig fields (+ "fixture": "standard" | "longrange")
    communities: {name: SynthConfig fields} (community kind only)
    weights:     preset name or {w_context, w_reaction, w_influence}
    trim:        TrimConfig fields
    featurizer:  {"dim": int} for the hashed provider
    encoding:    {"max_spd", "max_degree", "fractions"}
    model:       transformer config overrides (desk preset base)
    gat:         baseline config overrides
    train:       TrainConfig fields

context-ab trains the transformer and the GAT baseline on identical data;
community trains one pooled model plus one per community; sensitivity
relabels the corpus under the four weight presets and trains per variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import DEFAULT_MAX_DEGREE, DEFAULT_MAX_SPD, assign_splits, encode_tree
from .features import HashedProvider
from .labeling import WEIGHT_PRESETS, LabelWeights, label_dataset
from .models import GATConfig
from .models.graphormer import desk_preset
from .synth import FIXTURES, SynthConfig, demo_lexicon
from .training import EvalReport, TrainConfig, evaluate, train
from .trees import DiscussionTree
from .trim import TrimConfig, trim_dataset


class ExperimentError(ValueError):
    pass


@dataclass
class ExperimentResult:
    kind: str
    tables: dict[str, str]
    details: dict = field(default_factory=dict)


def resolve_weights(spec) -> LabelWeights:
    if spec is None:
        return WEIGHT_PRESETS["equal"]
    if isinstance(spec, str):
        if spec not in WEIGHT_PRESETS:
            raise ExperimentError(f"unknown weight preset {spec!r}")
        return WEIGHT_PRESETS[spec]
    return LabelWeights(**spec)


def train_config_from(spec: dict | None, seed: int) -> TrainConfig:
    d = dict(spec or {})
    d["seed"] = d.pop("seed", 0) + seed
    if "betas" in d:
        d["betas"] = tuple(d["betas"])
    return TrainConfig(**d)


def prepare_graphs(
    trees: list[DiscussionTree],
    weights: LabelWeights,
    trim_cfg: TrimConfig,
    provider,
    max_spd: int,
    max_degree: int,
    fractions: tuple[float, float, float],
    split_seed: int,
):
    label_dataset(trees, weights)
    trimmed, _ = trim_dataset(trees, trim_cfg)
    graphs = [encode_tree(t, provider, max_spd, max_degree) for t in trimmed]
    return assign_splits(graphs, fractions, split_seed)


def _synth_trees(spec: dict, seed_offset: int, community: str | None = None) -> list[DiscussionTree]:
    d = dict(spec)
    fixture = d.pop("fixture", "standard")
    if fixture not in FIXTURES:
        raise ExperimentError(f"unknown fixture {fixture!r}")
    d["seed"] = d.get("seed", 0) + seed_offset
    if community is not None:
        d["community"] = community
    return FIXTURES[fixture](SynthConfig(**d))


def _pipeline_knobs(spec: dict):
    weights = resolve_weights(spec.get("weights"))
    trim_cfg = TrimConfig(**spec.get("trim", {}))
    provider = HashedProvider(spec.get("featurizer", {}).get("dim", 64), demo_lexicon())
    enc = spec.get("encoding", {})
    max_spd = enc.get("max_spd", DEFAULT_MAX_SPD)
    max_degree = enc.get("max_degree", DEFAULT_MAX_DEGREE)
    fractions = tuple(enc.get("fractions", (0.7, 0.1, 0.2)))
    return weights, trim_cfg, provider, max_spd, max_degree, fractions


def merge_reports(reports: list[EvalReport]) -> EvalReport:
    """Count-weighted pool of per-class errors across runs."""
    sq = np.zeros(5)
    n = np.zeros(5, dtype=np.int64)
    for r in reports:
        for c in range(5):
            if r.counts[c]:
                sq[c] += r.per_class_l2[c] * r.counts[c]
                n[c] += r.counts[c]
    per_class = [float(sq[c] / n[c]) if n[c] else None for c in range(5)]
    return EvalReport(
        which=reports[0].which,
        overall_l2=float(sq.sum() / n.sum()),
        per_class_l2=per_class,
        counts=[int(c) for c in n],
    )


def _method_table(rows: dict[str, EvalReport]) -> str:
    lines = ["method\tAll\t0\t1\t2\t3\t4"]
    for name, rep in rows.items():
        cells = [name, f"{rep.overall_l2:.4f}"]
        cells += [
            "-" if rep.counts[c] == 0 else f"{rep.per_class_l2[c]:.4f}" for c in range(5)
        ]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def _train_test_table(rows: dict[str, tuple[float, float]], key: str = "target") -> str:
    lines = [f"{key}\ttrain_l2\ttest_l2"]
    for name, (tr, te) in rows.items():
        lines.append(f"{name}\t{tr:.4f}\t{te:.4f}")
    return "\n".join(lines) + "\n"


def run_context_ab(spec: dict) -> ExperimentResult:
    seeds = spec.get("seeds", [0])
    weights, trim_cfg, provider, max_spd, max_degree, fractions = _pipeline_knobs(spec)
    model_cfg = desk_preset(**spec.get("model", {}))
    gat_cfg = GATConfig(**spec.get("gat", {}))
    per_model: dict[str, list[EvalReport]] = {"Graphormer": [], "GAT": []}
    per_seed: list[dict] = []
    for seed in seeds:
        trees = _synth_trees(spec.get("synth", {}), seed)
        graphs = prepare_graphs(trees, weights, trim_cfg, provider, max_spd, max_degree, fractions, seed)
        cfg = train_config_from(spec.get("train"), seed)
        entry: dict = {"seed": seed}
        for label, name, mcfg in (("Graphormer", "graphormer", model_cfg), ("GAT", "gat", gat_cfg)):
            result = train(name, graphs, mcfg, cfg)
            report = evaluate(result.params, name, mcfg, graphs, "test", cfg.batch_size)
            per_model[label].append(report)
            entry[label] = {
                "test_l2": report.overall_l2,
                "per_class": report.per_class_l2,
                "counts": report.counts,
            }
        per_seed.append(entry)
    merged = {label: merge_reports(reports) for label, reports in per_model.items()}
    table = _method_table(merged)
    return ExperimentResult(
        kind="context-ab",
        tables={"model_comparison": table},
        details={"seeds": per_seed, "merged": {k: vars(v) for k, v in merged.items()}},
    )


def run_community(spec: dict) -> ExperimentResult:
    seeds = spec.get("seeds", [0])
    communities = spec.get("communities")
    if not communities:
        raise ExperimentError("community experiment needs a 'communities' mapping")
    weights, trim_cfg, provider, max_spd, max_degree, fractions = _pipeline_knobs(spec)
    model_cfg = desk_preset(**spec.get("model", {}))

    sums: dict[str, np.ndarray] = {name: np.zeros(2) for name in ["All", *communities]}
    pooled_on: dict[str, list[float]] = {name: [] for name in communities}
    specific_on: dict[str, list[float]] = {name: [] for name in communities}
    per_seed: list[dict] = []
    for seed in seeds:
        graphs_by_comm = {}
        for name, syn in communities.items():
            trees = _synth_trees(syn, seed, community=name)
            graphs_by_comm[name] = prepare_graphs(
                trees, weights, trim_cfg, provider, max_spd, max_degree, fractions, seed
            )
        pooled_graphs = [g for graphs in graphs_by_comm.values() for g in graphs]
        cfg = train_config_from(spec.get("train"), seed)
        pooled = train("graphormer", pooled_graphs, model_cfg, cfg)
        entry: dict = {"seed": seed, "communities": {}}
        sums["All"] += (
            evaluate(pooled.params, "graphormer", model_cfg, pooled_graphs, "train", cfg.batch_size).overall_l2,
            evaluate(pooled.params, "graphormer", model_cfg, pooled_graphs, "test", cfg.batch_size).overall_l2,
        )
        for name, graphs in graphs_by_comm.items():
            specific = train("graphormer", graphs, model_cfg, cfg)
            spec_train = evaluate(specific.params, "graphormer", model_cfg, graphs, "train", cfg.batch_size).overall_l2
            spec_test = evaluate(specific.params, "graphormer", model_cfg, graphs, "test", cfg.batch_size).overall_l2
            pool_test = evaluate(pooled.params, "graphormer", model_cfg, graphs, "test", cfg.batch_size).overall_l2
            sums[name] += (spec_train, spec_test)
            pooled_on[name].append(pool_test)
            specific_on[name].append(spec_test)
            entry["communities"][name] = {
                "specific_test_l2": spec_test,
                "pooled_test_l2": pool_test,
            }
        per_seed.append(entry)
    n = len(seeds)
    rows = {name: (s[0] / n, s[1] / n) for name, s in sums.items()}
    return ExperimentResult(
        kind="community",
        tables={"community_performance": _train_test_table(rows)},
        details={
            "seeds": per_seed,
            "pooled_test_by_community": pooled_on,
            "specific_test_by_community": specific_on,
        },
    )


SENSITIVITY_ROWS = [
    ("Equal", "equal"),
    ("Influence-Weighted", "influence"),
    ("Reaction-Weighted", "reaction"),
    ("Context-Weighted", "context"),
]


def run_sensitivity(spec: dict) -> ExperimentResult:
    seeds = spec.get("seeds", [0])
    _, trim_cfg, provider, max_spd, max_degree, fractions = _pipeline_knobs(spec)
    model_cfg = desk_preset(**spec.get("model", {}))
    sums = {row: np.zeros(2) for row, _ in SENSITIVITY_ROWS}
    per_seed: list[dict] = []
    for seed in seeds:
        entry: dict = {"seed": seed, "variants": {}}
        for row_name, preset in SENSITIVITY_ROWS:
            # regenerate so each variant relabels a pristine corpus
            trees = _synth_trees(spec.get("synth", {}), seed)
            graphs = prepare_graphs(
                trees, WEIGHT_PRESETS[preset], trim_cfg, provider,
                max_spd, max_degree, fractions, seed,
            )
            cfg = train_config_from(spec.get("train"), seed)
            result = train("graphormer", graphs, model_cfg, cfg)
            tr = evaluate(result.params, "graphormer", model_cfg, graphs, "train", cfg.batch_size).overall_l2
            te = evaluate(result.params, "graphormer", model_cfg, graphs, "test", cfg.batch_size).overall_l2
            sums[row_name] += (tr, te)
            entry["variants"][row_name] = {"train_l2": tr, "test_l2": te}
        per_seed.append(entry)
    n = len(seeds)
    rows = {name: (s[0] / n, s[1] / n) for name, s in sums.items()}
    return ExperimentResult(
        kind="sensitivity",
        tables={"labeling_weights": _train_test_table(rows, key="variant")},
        details={"seeds": per_seed},
    )


RUNNERS = {
    "context-ab": run_context_ab,
    "community": run_community,
    "sensitivity": run_sensitivity,
}


def run_experiment(spec: dict) -> ExperimentResult:
    kind = spec.get("kind")
    if kind not in RUNNERS:
        raise ExperimentError(f"unknown experiment kind {kind!r}; choose from {sorted(RUNNERS)}")
    return RUNNERS[kind](spec)
