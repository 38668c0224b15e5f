# wave_twin/cli/TwinCli.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
The wave-twin command line.

Every command writes its artifacts and a manifest.json into one run
directory. Exit codes: 0 on success, 2 on configuration errors and missing
or empty inputs, 1 on any other failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from wave_twin.cli.RunManifest import RunManifest
from wave_twin.constants.DTwin import DCliMsg, DEnv, DModule, DSignal, DTrain, DTwin, DVariant
from wave_twin.core.SimRecord import read_records
from wave_twin.core.Topology import SHIPPED_TOPOLOGIES, IntersectionTopology
from wave_twin.graphs.GraphStore import build_graphs, read_graphs, topology_index, write_graphs
from wave_twin.graphs.GraphTemplate import TemplateKind
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.harness.Explain import explain_linear, write_attributions
from wave_twin.harness.GradSuite import CASES, run_gradcheck
from wave_twin.harness.Latents import (
    distance_rank_correlation,
    export_latents,
    pca_project,
    write_latents,
    write_projection,
)
from wave_twin.harness.Metrics import baselines, evaluate
from wave_twin.harness.Trainer import DatasetSplit, load_model, split_dataset, train
from wave_twin.signal.SignalPlan import SignalConstraints
from wave_twin.simkit.Corpus import MIXED, generate_corpus, write_corpus
from wave_twin.simkit.Demand import Regime
from wave_twin.twins.TwinConfig import TrainConfig, TwinConfig, load_json
from wave_twin.twins.TwinModel import TwinModel
from wave_twin.utils.TwinErrors import CONFIG_ERRORS, ConfigError, InvalidArgumentError
from wave_twin.utils.TwinLog import TwinLog

RECORDS = "records.jsonl"
SCENARIOS = "scenarios.json"
GRAPHS = "graphs.jsonl"
CHECKPOINT = "checkpoint.bin"
SPLIT = "split.json"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


class EmptyInputError(InvalidArgumentError):
    """An input file holds no records or graphs."""


def deterministic_mode() -> bool:
    return os.environ.get(DEnv.DETERMINISTIC, "1").strip() not in ("0", "false", "no")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(DCliMsg.MISSING_FILE.format(path=path))
    return p


def _config_doc(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    _require_file(path)
    return load_json(path)


def _pick(flag: Any, doc: Dict[str, Any], key: str, default: Any) -> Any:
    """Flags win over the configuration file, which wins over the default."""
    if flag is not None:
        return flag
    return doc.get(key, default)


def _resolve_topologies(refs: Sequence[str]) -> List[IntersectionTopology]:
    out = []
    for ref in refs:
        try:
            out.append(IntersectionTopology.resolve(ref))
        except FileNotFoundError:
            raise FileNotFoundError(DCliMsg.MISSING_FILE.format(path=ref)) from None
    return out


def _emit(log: TwinLog, path: Path) -> None:
    log.info(DCliMsg.WROTE.format(path=path))


def cmd_simulate(args: argparse.Namespace, log: TwinLog) -> int:
    doc = _config_doc(args.config)
    refs = args.topology or doc.get("topologies") or list(SHIPPED_TOPOLOGIES)
    topologies = _resolve_topologies(refs)
    seed = _pick(args.seed, doc, "seed", 0)
    regime = _pick(args.regime, doc, "regime", Regime.REAL.value)
    cycle = _pick(args.cycle_range, doc, "cycle_range", "standard")
    n = _pick(args.scenarios, doc, "scenarios", None)
    if n is None:
        raise InvalidArgumentError("--scenarios is required")
    w = _pick(args.w, doc, "w", DTwin.W)
    jobs = _pick(args.jobs, doc, "jobs", 1)
    if "constraints" in doc:
        try:
            constraints = SignalConstraints.model_validate(doc["constraints"])
        except ValidationError as e:
            raise ConfigError(f"bad signal constraints in {args.config}: {e}") from e
    else:
        constraints = SignalConstraints.for_range(cycle)
    config = {
        "topologies": refs,
        "scenarios": n,
        "regime": regime,
        "cycle_range": list(constraints.cycle_range),
        "w": w,
        "bucket_seconds": DTwin.BUCKET_SECONDS,
        "jobs": jobs,
        "deterministic": deterministic_mode(),
    }
    out = _out_dir(args.out)
    run = RunManifest("simulate", config, seed)
    header = {
        "seed": seed,
        "regime": regime,
        "w": w,
        "bucket_seconds": DTwin.BUCKET_SECONDS,
        "topologies": [t.to_doc().model_dump(mode="json", exclude_none=True) for t in topologies],
    }
    pairs = generate_corpus(n, topologies, regime, seed, constraints, w, jobs=jobs, log=log)
    count = write_corpus(
        pairs, run.add("records", out / RECORDS), run.add("scenarios", out / SCENARIOS), header
    )
    log.info(f"simulated {count} scenarios")
    _emit(log, run.write(out))
    return EXIT_OK


def _graph_topologies(input_path: Path, refs: Sequence[str]) -> Dict[str, IntersectionTopology]:
    topologies = [IntersectionTopology.shipped(name) for name in SHIPPED_TOPOLOGIES]
    scenarios = input_path.parent / SCENARIOS
    if scenarios.is_file():
        docs = json.loads(scenarios.read_text()).get("topologies", [])
        topologies.extend(IntersectionTopology.from_doc(d) for d in docs)
    topologies.extend(_resolve_topologies(refs))
    return topology_index(topologies)


def cmd_graphs(args: argparse.Namespace, log: TwinLog) -> int:
    input_path = _require_file(args.input)
    kind = TemplateKind(args.kind)
    records = list(read_records(input_path))
    if not records:
        raise EmptyInputError(DCliMsg.EMPTY_INPUT.format(path=input_path))
    topologies = _graph_topologies(input_path, args.topology or [])
    out = _out_dir(args.out)
    run = RunManifest("graphs", {"input": str(input_path), "kind": kind.value}, 0)
    header = write_graphs(build_graphs(records, topologies, kind), run.add("graphs", out / GRAPHS))
    if header is None:
        raise EmptyInputError(DCliMsg.EMPTY_INPUT.format(path=input_path))
    print(DCliMsg.SUMMARY.format(kind=kind.value, **header.summary()))
    _emit(log, run.write(out))
    return EXIT_OK


def _load_graphs(path: str) -> Tuple[TemplateKind, List[SimGraph]]:
    header, graphs = read_graphs(_require_file(path))
    if not graphs:
        raise EmptyInputError(DCliMsg.EMPTY_INPUT.format(path=path))
    return header.kind, graphs


def _default_variant(kind: TemplateKind) -> str:
    return DVariant.GATCONV_EXT if kind == TemplateKind.EXIT else DVariant.GATCONV_INF


def train_configs(
    args: argparse.Namespace, kind: TemplateKind
) -> Tuple[TwinConfig, TrainConfig]:
    """
    Effective twin and training configurations for the train command.

    The configuration file may hold "twin" and "train" sections; flags win.

    Raises:
        ConfigError: Invalid configuration, or a variant for the other graph kind
    """
    doc = _config_doc(args.config)
    twin_doc = dict(doc.get("twin", {}))
    train_doc = dict(doc.get("train", {}))
    for flag, key in (
        ("lr", "lr"),
        ("epochs", "max_epochs"),
        ("max_steps", "max_steps"),
        ("batch_size", "batch_size"),
        ("patience", "patience"),
        ("seed", "seed"),
        ("dtype", "dtype"),
    ):
        value = getattr(args, flag)
        if value is not None:
            train_doc[key] = value
    if DEnv.DETERMINISTIC in os.environ or "deterministic" not in train_doc:
        train_doc["deterministic"] = deterministic_mode()
    train_config = TrainConfig.load(train_doc)
    variant = args.variant or twin_doc.pop("variant", None) or _default_variant(kind)
    twin_doc.pop("variant", None)
    twin_doc.setdefault("seed", train_config.seed)
    twin_config = TwinConfig.for_variant(variant, **twin_doc)
    if twin_config.template != kind:
        raise ConfigError(
            f"variant {variant} is a {twin_config.kind.value} twin, graphs are {kind.value}"
        )
    return twin_config, train_config


def cmd_train(args: argparse.Namespace, log: TwinLog) -> int:
    kind, graphs = _load_graphs(args.graphs)
    twin_config, train_config = train_configs(args, kind)
    out = _out_dir(args.out)
    run = RunManifest(
        "train",
        {
            "graphs": args.graphs,
            "twin": twin_config.model_dump(mode="json"),
            "train": train_config.model_dump(mode="json"),
        },
        train_config.seed,
    )
    model = TwinModel(twin_config, log)
    result, _ = train(model, graphs, train_config, out, log)
    for name, file in (
        ("checkpoint", CHECKPOINT),
        ("history", "history.csv"),
        ("split", SPLIT),
    ):
        run.add(name, out / file)
    summary = model.summary()
    summary.update(
        {
            "best_epoch": result.best_epoch,
            "best_val_loss": result.best_val,
            "steps": result.steps,
            "stopped_early": result.stopped_early,
        }
    )
    path = run.add("summary", out / "summary.json")
    path.write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    _emit(log, run.write(out))
    return EXIT_OK


def _load_split(checkpoint: Path, header: Dict[str, Any], n: int) -> DatasetSplit:
    path = checkpoint.parent / SPLIT
    if path.is_file():
        data = json.loads(path.read_text())
        split = DatasetSplit(data["train"], data["val"], data["test"])
        if max(split.part("all"), default=-1) < n:
            return split
        raise ConfigError(f"{path} does not fit a dataset of {n} graphs")
    train_config = TrainConfig.load(header.get("train") or {})
    return split_dataset(n, train_config.split, train_config.seed)


def _pick_graphs(graphs: Sequence[SimGraph], indices: Sequence[int]) -> List[SimGraph]:
    return [graphs[i] for i in indices]


def cmd_eval(args: argparse.Namespace, log: TwinLog) -> int:
    checkpoint = _require_file(args.checkpoint)
    model, header = load_model(checkpoint, log)
    _, graphs = _load_graphs(args.graphs)
    split = _load_split(checkpoint, header, len(graphs))
    chosen = _pick_graphs(graphs, split.part(args.split))
    if not chosen:
        raise EmptyInputError(f"split {args.split} of {args.graphs} is empty")
    val = _pick_graphs(graphs, split.val) or None
    train_graphs = _pick_graphs(graphs, split.train) or chosen
    out = _out_dir(args.out)
    run = RunManifest(
        "eval",
        {
            "checkpoint": str(checkpoint),
            "graphs": args.graphs,
            "split": args.split,
            "rounded": args.rounded,
        },
        int(model.config.seed),
    )
    report = evaluate(model, chosen, val, rounded=args.rounded)
    metrics = report.to_dict()
    metrics["model"] = model.summary()
    path = run.add("metrics", out / "metrics.json")
    path.write_text(json.dumps(metrics, indent=2) + "\n")
    refs = {name: r.to_dict() for name, r in baselines(train_graphs, chosen, val).items()}
    path = run.add("baselines", out / "baselines.json")
    path.write_text(json.dumps(refs, indent=2) + "\n")
    print(json.dumps(report.to_dict(), indent=2))
    _emit(log, run.write(out))
    return EXIT_OK


def cmd_explain(args: argparse.Namespace, log: TwinLog) -> int:
    checkpoint = _require_file(args.checkpoint)
    model, header = load_model(checkpoint, log)
    _, graphs = _load_graphs(args.graphs)
    split = _load_split(checkpoint, header, len(graphs))
    chosen = _pick_graphs(graphs, split.part(args.split))
    if not chosen:
        raise EmptyInputError(f"split {args.split} of {args.graphs} is empty")
    out = _out_dir(args.out)
    run = RunManifest(
        "explain",
        {"checkpoint": str(checkpoint), "graphs": args.graphs, "split": args.split},
        int(model.config.seed),
    )
    table = export_latents(model, chosen)
    write_latents(table, run.add("latents", out / "latents.csv"))
    projection, ratio = pca_project(table.values)
    write_projection(table, projection, run.add("latents_pca", out / "latents_pca.csv"))
    explanation = explain_linear(model, chosen, log)
    write_attributions(explanation, run.add("attributions", out / "attributions.csv"))
    report = {
        "lane_groups": explanation.lane_groups,
        "r2": explanation.surrogate.r2,
        "ridge": explanation.surrogate.ridge,
        "pca_explained": ratio.tolist(),
        "pca_distance_spearman": (
            distance_rank_correlation(table.values, projection) if len(table) > 2 else None
        ),
    }
    path = run.add("lane_groups", out / "lane_groups.json")
    path.write_text(json.dumps(report, indent=2) + "\n")
    for rank, (name, value, _) in enumerate(explanation.ranking[:10], start=1):
        print(f"{rank:>2} {name:<16} {value:.6f}")
    _emit(log, run.write(out))
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace, log: TwinLog) -> int:
    seed = args.seed if args.seed is not None else 0
    results = run_gradcheck(seed=seed, tol=args.tol, names=args.case)
    for r in results:
        status = "ok" if r.ok else "FAIL"
        print(DCliMsg.GRADCHECK_LINE.format(name=r.name, err=r.max_rel_err, status=status))
    print(DCliMsg.GRADCHECK_MAX.format(err=max(r.max_rel_err for r in results)))
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAILURE


COMMANDS = {
    "simulate": cmd_simulate,
    "graphs": cmd_graphs,
    "train": cmd_train,
    "eval": cmd_eval,
    "explain": cmd_explain,
    "gradcheck": cmd_gradcheck,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wave-twin",
        description=DCliMsg.DESCRIPTION,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  wave-twin simulate --topology full --scenarios 100 --regime mixed --out runs/sim
  wave-twin graphs --in runs/sim/records.jsonl --kind exit --out runs/exit
  wave-twin train --graphs runs/exit/graphs.jsonl --variant gatconv-ext --out runs/train
  wave-twin eval --checkpoint runs/train/checkpoint.bin \
      --graphs runs/exit/graphs.jsonl --out runs/eval
  wave-twin explain --checkpoint runs/train/checkpoint.bin \
      --graphs runs/exit/graphs.jsonl --out runs/explain
  wave-twin gradcheck
        """,
    )
    parser.add_argument(
        "--loglevel", "-l", type=str, default=None, help=DCliMsg.LOGLEVEL_HELP
    )
    parser.add_argument("--version", "-v", action="version", version=f"wave-twin {DTwin.VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Simulate a scenario corpus")
    sim.add_argument("--topology", "-t", action="append", help=DCliMsg.TOPOLOGY_HELP)
    sim.add_argument("--scenarios", "-n", type=int, help=DCliMsg.SCENARIOS_HELP)
    sim.add_argument(
        "--regime", choices=[r.value for r in Regime] + [MIXED], help=DCliMsg.REGIME_HELP
    )
    sim.add_argument("--cycle-range", choices=sorted(DSignal.CYCLE_RANGES), help=DCliMsg.CYCLE_HELP)
    sim.add_argument("--w", type=int, help=f"Buckets per record (default: {DTwin.W})")
    sim.add_argument("--seed", "-s", type=int, help=DCliMsg.SEED_HELP.format(seed=0))
    sim.add_argument("--jobs", "-j", type=int, help=DCliMsg.JOBS_HELP)
    sim.add_argument("--config", "-c", help=DCliMsg.CONFIG_HELP)
    sim.add_argument("--out", "-o", required=True, help=DCliMsg.OUT_HELP)

    gr = sub.add_parser("graphs", help="Build a graph dataset from simulation records")
    gr.add_argument("--in", dest="input", required=True, help="records.jsonl written by simulate")
    gr.add_argument(
        "--kind",
        "-k",
        choices=[k.value for k in TemplateKind],
        default=TemplateKind.EXIT.value,
        help=DCliMsg.KIND_HELP,
    )
    gr.add_argument("--topology", "-t", action="append", help=DCliMsg.TOPOLOGY_HELP)
    gr.add_argument("--out", "-o", required=True, help=DCliMsg.OUT_HELP)

    tr = sub.add_parser("train", help="Train a digital twin")
    tr.add_argument("--graphs", "-g", required=True, help="graphs.jsonl written by graphs")
    tr.add_argument(
        "--variant",
        choices=list(DVariant.ALL),
        help=DCliMsg.VARIANT_HELP.format(variants=", ".join(DVariant.ALL)),
    )
    tr.add_argument("--config", "-c", help=DCliMsg.CONFIG_HELP)
    tr.add_argument("--lr", type=float, help="Adam learning rate")
    tr.add_argument("--epochs", type=int, help="Maximum number of epochs")
    tr.add_argument("--max-steps", type=int, help="Maximum number of optimizer steps")
    tr.add_argument("--batch-size", type=int, help="Graphs per batch")
    tr.add_argument("--patience", type=int, help="Early-stopping patience in epochs")
    tr.add_argument("--dtype", choices=DTrain.DTYPES, help="Float precision of the training loop")
    tr.add_argument("--seed", "-s", type=int, help=DCliMsg.SEED_HELP.format(seed=0))
    tr.add_argument("--out", "-o", required=True, help=DCliMsg.OUT_HELP)

    for name, text in (("eval", "Score a trained twin"), ("explain", "Explain a trained twin")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--checkpoint", required=True, help="checkpoint.bin written by train")
        p.add_argument("--graphs", "-g", required=True, help="graphs.jsonl the twin was trained on")
        p.add_argument(
            "--split",
            choices=("train", "val", "test", "all"),
            default="test" if name == "eval" else "all",
            help="Dataset part to use",
        )
        p.add_argument("--out", "-o", required=True, help=DCliMsg.OUT_HELP)
        if name == "eval":
            p.add_argument("--rounded", action="store_true", help="Score rounded imputed counts")

    gc = sub.add_parser("gradcheck", help="Finite-difference check of every layer")
    gc.add_argument("--seed", "-s", type=int, help=DCliMsg.SEED_HELP.format(seed=0))
    gc.add_argument("--tol", type=float, default=1e-4, help="Relative error threshold")
    gc.add_argument("--case", action="append", choices=list(CASES), help="Run only this case")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point for the wave-twin command.

    Returns:
        int: Process exit code
    """
    args = build_parser().parse_args(argv)
    log = TwinLog(DModule.CLI, log_level=args.loglevel)
    try:
        return COMMANDS[args.command](args, log)
    except (FileNotFoundError, *CONFIG_ERRORS) as e:
        log.error(DCliMsg.ERROR.format(e=e))
        print(DCliMsg.ERROR.format(e=e), file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        log.info("interrupted")
        return EXIT_FAILURE
    except Exception as e:
        log.error(DCliMsg.ERROR.format(e=e))
        print(DCliMsg.ERROR.format(e=e), file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
