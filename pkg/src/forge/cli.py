"""The `forge` command line: the full pipeline as subcommands.

Exit codes: 0 success, 1 runtime failure (machine-readable JSON on stderr),
2 usage/configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .client import ClientConfig
from .errors import ForgeError
from .grpo import GrpoConfig
from .manifest import write_manifest
from .rewards import GoldLabel, RewardConfig, total_reward
from .statutes import (build_seeds, enumerate_paths, load_bundled_tree,
                       parse_statute, read_seeds, serialize_statute, write_seeds)

BUNDLED_FRAMEWORKS = ("eu-ai-act", "eu-ai-act-ch2", "gdpr")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _client_config(config: dict, args) -> ClientConfig:
    section = dict(config.get("client", {}))
    for key in ("base_url", "model_name", "temperature", "max_tokens",
                "max_retries", "max_parallel", "api_key_env"):
        value = getattr(args, key, None)
        if value is not None:
            section[key] = value
    section.setdefault("base_url", "http://127.0.0.1:8000")
    section.setdefault("model_name", "stub-model")
    return ClientConfig(**section)


def _grpo_config(config: dict, args) -> GrpoConfig:
    from .verdict_task import DEMO_CONFIG
    section = dict(config.get("grpo", {}))
    overrides = {
        "group_size": getattr(args, "group_size", None),
        "repetition_penalty": getattr(args, "repetition_penalty", None),
        "learning_rate": getattr(args, "learning_rate", None),
    }
    merged = {**DEMO_CONFIG.__dict__, **section,
              **{k: v for k, v in overrides.items() if v is not None}}
    return GrpoConfig(**merged)


def _alpha(config: dict, args) -> float:
    if getattr(args, "alpha", None) is not None:
        return args.alpha
    return config.get("reward", {}).get("alpha", 1.0 / 9.0)


def _tree_from_args(args):
    if args.statute:
        source = Path(args.statute).read_text(encoding="utf-8")
        return parse_statute(source, framework=args.framework)
    if args.framework in BUNDLED_FRAMEWORKS:
        return load_bundled_tree(args.framework)
    raise ForgeError(
        f"--framework {args.framework!r} is not bundled; pass --statute FILE")


# --- subcommand bodies ------------------------------------------------------


def cmd_parse_statute(args, config):
    tree = _tree_from_args(args)
    leaves = len(enumerate_paths(tree))
    if args.out:
        Path(args.out).write_text(serialize_statute(tree), encoding="utf-8")
        write_manifest(Path(args.out), "parse-statute", vars(args),
                       [Path(args.statute)] if args.statute else [], config)
    print(json.dumps({
        "framework": tree.framework,
        "node_count": tree.node_count,
        "edge_count": tree.edge_count,
        "leaf_count": leaves,
    }))
    return 0


def cmd_seeds(args, config):
    tree = _tree_from_args(args)
    seeds = build_seeds(tree)
    out = Path(args.out)
    write_seeds(seeds, out)
    write_manifest(out, "seeds", vars(args),
                   [Path(args.statute)] if args.statute else [], config)
    print(json.dumps({"seeds": len(seeds), "out": str(out)}))
    return 0


def cmd_generate(args, config):
    from .cases import build_benchmark, write_records
    seeds = read_seeds(Path(args.seeds))
    if args.framework:
        seeds = [s for s in seeds if s.framework == args.framework]
    if not seeds:
        raise ForgeError("no seeds to generate from")
    client = _client_config(config, args)
    rejects = Path(args.rejects) if args.rejects else Path(str(args.out) + ".rejects.jsonl")
    dataset = build_benchmark(seeds, client, rejects_path=rejects)
    write_records(dataset.records, Path(args.out))
    write_manifest(Path(args.out), "generate", vars(args), [Path(args.seeds)],
                   {**config, "client": client.__dict__})
    print(json.dumps({
        "records": len(dataset.records),
        "requested": 2 * len(seeds),
        "out": str(args.out),
    }))
    return 0


def cmd_split(args, config):
    from .cases import Dataset, read_records, split_dataset, write_split
    records = read_records(Path(args.cases))
    dataset = split_dataset(Dataset(records=records), ratio=args.ratio,
                            rng_seed=args.rng_seed)
    out = Path(args.out)
    write_split(dataset, out)
    write_manifest(out, "split", vars(args), [Path(args.cases)], config)
    counts = {"TRAIN": 0, "TEST": 0}
    for value in dataset.split_assignment.values():
        counts[value] += 1
    print(json.dumps(counts))
    return 0


def cmd_reward(args, config):
    reward_config = RewardConfig(alpha=_alpha(config, args))
    if args.batch:
        results = []
        with open(args.batch, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                breakdown = total_reward(
                    obj["response"], GoldLabel(obj["gold"].upper()), reward_config)
                results.append({
                    "format_reward": breakdown.format_reward,
                    "comply_reward": breakdown.comply_reward,
                    "total": round(breakdown.total, 4),
                })
        print(json.dumps(results))
        return 0
    response = sys.stdin.read()
    breakdown = total_reward(response, GoldLabel(args.gold.upper()), reward_config)
    print(json.dumps({
        "format_reward": breakdown.format_reward,
        "comply_reward": breakdown.comply_reward,
        "total": round(breakdown.total, 4),
    }))
    return 0


def cmd_grpo_demo(args, config):
    from .verdict_task import DEMO_SEED, train
    grpo = _grpo_config(config, args)
    reward_config = RewardConfig(alpha=_alpha(config, args))
    metrics = Path(args.metrics) if args.metrics else None
    rng_seed = DEMO_SEED if args.rng_seed is None else args.rng_seed
    _, history = train(steps=args.steps, config=grpo, rng_seed=rng_seed,
                       reward_config=reward_config, metrics_path=metrics)
    if metrics:
        write_manifest(metrics, "grpo-demo", vars(args), [], config)
    final = history[-1]
    print(json.dumps({
        "steps": len(history),
        "final_mean_reward": final.mean_reward,
        "final_objective": final.objective,
        "metrics": str(metrics) if metrics else None,
    }))
    return 0


def cmd_eval(args, config):
    from .evaluation import (classification_table, read_predictions,
                             score_predictions)
    records = read_predictions(Path(args.pred))
    if args.framework:
        bad = [r.case_id for r in records if r.framework != args.framework]
        if bad:
            raise ForgeError(
                f"{len(bad)} predictions are not for framework {args.framework!r}"
                f" (first: {bad[0]})")
    report = score_predictions(records, include_abstains=not args.exclude_abstains)
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_json(), indent=2), encoding="utf-8")
        write_manifest(Path(args.report), "eval", vars(args), [Path(args.pred)], config)
    print(classification_table(report))
    return 0


def cmd_distribution(args, config):
    from .evaluation import chapter_distribution, distribution_csv, round2
    from .extrapolation import read_allocations
    allocations = read_allocations(Path(args.alloc))
    report = chapter_distribution(
        [a.chapter_id for a in allocations], args.framework)
    if args.csv:
        Path(args.csv).write_text(distribution_csv(report), encoding="utf-8")
        write_manifest(Path(args.csv), "distribution", vars(args),
                       [Path(args.alloc)], config)
    print(json.dumps(report.to_json()))
    return 0


def cmd_allocate(args, config):
    from .extrapolation import (allocate_chapter, ingest_safety_dataset,
                                write_allocations)
    client = _client_config(config, args)
    mapping = json.loads(args.mapping) if args.mapping else {"text": "text", "label": "label"}
    items = ingest_safety_dataset(Path(args.input), args.source, mapping)
    if args.limit:
        items = items[:args.limit]
    allocations = [allocate_chapter(item, args.framework, client) for item in items]
    out = Path(args.out)
    write_allocations(allocations, out)
    write_manifest(out, "allocate", vars(args), [Path(args.input)],
                   {**config, "client": client.__dict__})
    missing = sum(1 for a in allocations if a.chapter_id is None)
    print(json.dumps({"items": len(allocations), "missing": missing}))
    return 0


def cmd_extrapolate(args, config):
    from .extrapolation import extrapolate_case, ingest_safety_dataset
    client = _client_config(config, args)
    mapping = json.loads(args.mapping) if args.mapping else {"text": "text", "label": "label"}
    items = ingest_safety_dataset(Path(args.input), args.source, mapping)
    if args.limit:
        items = items[:args.limit]
    out = Path(args.out)
    rejects = Path(str(out) + ".rejects.jsonl")
    written = 0
    with open(out, "w", encoding="utf-8") as fh:
        for item in items:
            label = args.label.upper() if args.label else (
                "PROHIBITED" if item.label == "UNSAFE" else "PERMITTED")
            try:
                case = extrapolate_case(item, args.framework, label, client,
                                        rejects_log=rejects)
            except ForgeError:
                continue
            fh.write(json.dumps(case.to_json(), ensure_ascii=False) + "\n")
            written += 1
    write_manifest(out, "extrapolate", vars(args), [Path(args.input)],
                   {**config, "client": client.__dict__})
    print(json.dumps({"written": written, "rejected": len(items) - written}))
    return 0


def cmd_annotate_serve(args, config):
    from .annotation import AnnotationServer, AnnotationStore
    from .cases import read_records
    records = read_records(Path(args.dataset))
    seeds = read_seeds(Path(args.seeds)) if args.seeds else []
    store = AnnotationStore(Path(args.state_dir), records, seeds)
    static = Path(args.static) if args.static else None
    server = AnnotationServer(store, host=args.host, port=args.port,
                              static_dir=static)
    print(json.dumps({"url": server.url, "state_dir": str(args.state_dir)}),
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_report(args, config):
    from .evaluation import (ClassificationReport, ClassStats,
                             classification_table, human_eval_aggregate,
                             human_eval_table)
    if args.ratings:
        rows = []
        with open(args.ratings, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rows.append(json.loads(line))
        print(human_eval_table(human_eval_aggregate(rows)))
        return 0
    if args.eval_json:
        obj = json.loads(Path(args.eval_json).read_text(encoding="utf-8"))
        report = ClassificationReport(
            accuracy=obj["accuracy"],
            per_class={k: ClassStats(**v) for k, v in obj["per_class"].items()},
            macro_f1=obj["macro_f1"],
            total=obj["total"],
            abstained=obj["abstained"],
        )
        print(classification_table(report))
        return 0
    raise ForgeError("report needs --ratings or --eval-json")


# --- argument wiring --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Statute-seeded compliance benchmark toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON config file (flags override)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse-statute", help="parse a statute file into a tree")
    p.add_argument("--framework", required=True)
    p.add_argument("--statute", help="statute file (defaults to the bundled fixture)")
    p.add_argument("--out", help="write the canonical pretty-printed form here")
    p.set_defaults(func=cmd_parse_statute)

    p = sub.add_parser("seeds", help="enumerate root-to-leaf paths into seeds")
    p.add_argument("--framework", required=True)
    p.add_argument("--statute")
    p.add_argument("--out", default="seeds.jsonl")
    p.set_defaults(func=cmd_seeds)

    p = sub.add_parser("generate", help="synthesize paired cases from seeds")
    p.add_argument("--framework")
    p.add_argument("--seeds", required=True)
    p.add_argument("--out", default="cases.jsonl")
    p.add_argument("--rejects")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--model-name", dest="model_name")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-parallel", dest="max_parallel", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="stratified train/test assignment")
    p.add_argument("--cases", required=True)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--rng-seed", dest="rng_seed", type=int, default=42)
    p.add_argument("--out", default="split.json")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("reward", help="score a response from stdin (or --batch)")
    p.add_argument("--gold", required=False, default="prohibited")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--batch", help="JSONL of {response, gold}")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("grpo-demo", help="train the toy verdict policy")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--group-size", dest="group_size", type=int)
    p.add_argument("--repetition-penalty", dest="repetition_penalty", type=float)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--rng-seed", dest="rng_seed", type=int, default=None)
    p.add_argument("--metrics", help="JSONL metrics log path")
    p.set_defaults(func=cmd_grpo_demo)

    p = sub.add_parser("eval", help="score predictions against gold labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--framework")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--exclude-abstains", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distribution", help="chapter histogram with missing rate")
    p.add_argument("--alloc", required=True)
    p.add_argument("--framework", required=True)
    p.add_argument("--csv", help="write plot-ready chapter,count rows here")
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("allocate", help="allocate safety items to chapters")
    p.add_argument("--input", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--framework", required=True)
    p.add_argument("--mapping", help="JSON column mapping")
    p.add_argument("--limit", type=int)
    p.add_argument("--out", default="alloc.jsonl")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--model-name", dest="model_name")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("extrapolate", help="generate cases from safety seeds")
    p.add_argument("--input", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--framework", required=True)
    p.add_argument("--label", help="force prohibited/permitted (default: map from item)")
    p.add_argument("--mapping", help="JSON column mapping")
    p.add_argument("--limit", type=int)
    p.add_argument("--out", default="extrapolated.jsonl")
    p.add_argument("--base-url", dest="base_url")
    p.add_argument("--model-name", dest="model_name")
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("annotate-serve", help="run the human-rating service")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seeds")
    p.add_argument("--state-dir", dest="state_dir", default="annotation-state")
    p.add_argument("--static", help="directory of UI assets to serve")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_annotate_serve)

    p = sub.add_parser("report", help="render reports as aligned text tables")
    p.add_argument("--ratings", help="JSONL of {rater, case_id, dimension, score}")
    p.add_argument("--eval-json", dest="eval_json", help="JSON report from `forge eval`")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": f"bad config: {exc}"}), file=sys.stderr)
        return 2
    try:
        return args.func(args, config)
    except ForgeError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}),
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
