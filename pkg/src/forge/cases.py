"""Case synthesis pipeline: drive the backend over the seed pool, validate
the five-field case schema, and assemble the balanced benchmark with a
stratified train/test split."""

from __future__ import annotations

import hashlib
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .client import ClientConfig, request_completion
from .errors import CaseValidationError, ForgeError, PipelineError
from .frameworks import get_framework
from .prompts import BENCHMARK_GEN, TEMPLATES, render_prompt
from .statutes import Seed

PROHIBITED = "PROHIBITED"
PERMITTED = "PERMITTED"
LABELS = (PROHIBITED, PERMITTED)
TRAIN = "TRAIN"
TEST = "TEST"

NARRATIVE_FIELDS = (
    "parties_involved",
    "factual_background",
    "legal_issues",
    "arguments",
    "jurisdiction",
)

# Malformed model output gets this many fresh re-samples (after the first
# attempt) before rejection.
GENERATION_RETRIES = 3
MAX_ATTEMPTS = GENERATION_RETRIES + 1


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    framework: str
    seed_id: str
    label: str
    parties_involved: str
    factual_background: str
    legal_issues: str
    arguments: str
    jurisdiction: str
    generator: str
    created_at: str

    def narrative(self) -> dict[str, str]:
        return {name: getattr(self, name) for name in NARRATIVE_FIELDS}


@dataclass
class Dataset:
    records: list[CaseRecord]
    split_assignment: dict[str, str] = field(default_factory=dict)
    rng_seed: int | None = None


def case_id_for(seed_id: str, label: str, narrative: dict[str, str]) -> str:
    """Content hash so identical cases dedup and ids survive re-serialization."""
    payload = json.dumps(
        [seed_id, label, [narrative[k] for k in NARRATIVE_FIELDS]],
        ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


_FENCE = re.compile(r"^```[a-zA-Z0-9_-]*\s*$")


def _strip_noise(raw: str) -> str:
    """Drop code fences and any prose before the first '{' / after the last '}'."""
    lines = [line for line in raw.splitlines() if not _FENCE.match(line.strip())]
    text = "\n".join(lines)
    start = text.find("{")
    end = text.rfind("}")
    if start < 0 or end < start:
        raise CaseValidationError("no JSON object found in response")
    return text[start:end + 1]


def parse_case_json(raw: str, framework: str, seed_id: str, label: str,
                    generator: str = "unknown") -> CaseRecord:
    """Tolerantly extract the five-field case object from a model response.

    Fences and surrounding prose are stripped; the object must then contain
    exactly the five narrative keys with non-empty string values ("only one
    layer" means nested values are rejected too).
    """
    text = _strip_noise(raw)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseValidationError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CaseValidationError("top-level JSON value is not an object")

    missing = [k for k in NARRATIVE_FIELDS if k not in obj]
    extra = sorted(set(obj) - set(NARRATIVE_FIELDS))
    bad_type = [k for k in NARRATIVE_FIELDS
                if k in obj and not isinstance(obj[k], str)]
    empty = [k for k in NARRATIVE_FIELDS
             if k in obj and isinstance(obj[k], str) and not obj[k].strip()]
    problems = []
    if missing:
        problems.append(f"missing keys {missing}")
    if extra:
        problems.append(f"unexpected keys {extra}")
    if bad_type:
        problems.append(f"non-string values for {bad_type} (only one layer allowed)")
    if empty:
        problems.append(f"empty values for {empty}")
    if problems:
        raise CaseValidationError(
            "; ".join(problems), keys=missing + extra + bad_type + empty)

    narrative = {k: obj[k] for k in NARRATIVE_FIELDS}
    return CaseRecord(
        case_id=case_id_for(seed_id, label, narrative),
        framework=framework,
        seed_id=seed_id,
        label=label,
        generator=generator,
        created_at=datetime.now(timezone.utc).isoformat(),
        **narrative,
    )


@dataclass
class Reject:
    seed_id: str
    label: str
    attempt: int
    error: str
    raw: str


def _generate_one(seed: Seed, label: str, config: ClientConfig,
                  rejects: list[Reject]) -> CaseRecord | None:
    framework = get_framework(seed.framework)
    prompt = render_prompt(TEMPLATES[BENCHMARK_GEN], {
        "law_name": framework.short_name,
        "result": label.lower(),
        "rules": seed.rendered_text,
    })
    for attempt in range(1, MAX_ATTEMPTS + 1):
        raw = ""
        try:
            raw = request_completion(prompt, config)
            return parse_case_json(
                raw, seed.framework, seed.seed_id, label,
                generator=config.model_name)
        except ForgeError as exc:
            rejects.append(Reject(
                seed_id=seed.seed_id, label=label, attempt=attempt,
                error=str(exc), raw=raw))
    return None


def build_benchmark(seeds: list[Seed], config: ClientConfig,
                    rejects_path: Path | None = None,
                    max_parallel: int | None = None) -> Dataset:
    """Request one PROHIBITED and one PERMITTED case per seed.

    Requests fan out up to the client's parallelism; assembly is a
    single-threaded reduction in (seed, label) order, so output order is
    deterministic regardless of completion order. Failed generations land in
    the rejects log; if nothing at all survives, that is a pipeline error.
    """
    if not seeds:
        raise PipelineError("seed list is empty")
    jobs = [(seed, label) for seed in seeds for label in LABELS]
    rejects: list[Reject] = []
    workers = max_parallel or config.max_parallel
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(
            lambda job: _generate_one(job[0], job[1], config, rejects), jobs))

    records = [record for record in results if record is not None]
    if rejects_path is not None and rejects:
        with open(rejects_path, "w", encoding="utf-8") as fh:
            for reject in rejects:
                fh.write(json.dumps(reject.__dict__, ensure_ascii=False) + "\n")
    if not records:
        raise PipelineError(
            f"all {len(jobs)} generations failed", rejects_path=rejects_path)
    return Dataset(records=records)


def split_dataset(dataset: Dataset, ratio: float = 0.5,
                  rng_seed: int = 0) -> Dataset:
    """Assign TRAIN/TEST stratified by (framework, label).

    The assignment is a pure function of the sorted case ids and the seed:
    record order never matters. Within each framework the TRAIN share hits
    round(ratio * n) exactly, apportioned across the label strata by largest
    remainder so both splits stay label-balanced.
    """
    if not dataset.records:
        raise PipelineError("cannot split an empty dataset")
    if not 0 < ratio < 1:
        raise PipelineError("ratio must be strictly between 0 and 1")

    strata: dict[tuple[str, str], list[str]] = {}
    for record in dataset.records:
        strata.setdefault((record.framework, record.label), []).append(record.case_id)

    assignment: dict[str, str] = {}
    frameworks = sorted({fw for fw, _ in strata})
    for fw in frameworks:
        fw_strata = sorted(key for key in strata if key[0] == fw)
        n_total = sum(len(strata[key]) for key in fw_strata)
        target = int(ratio * n_total + 0.5)
        floors = {key: int(ratio * len(strata[key])) for key in fw_strata}
        leftover = target - sum(floors.values())
        remainders = sorted(
            fw_strata,
            key=lambda key: (-(ratio * len(strata[key]) - floors[key]), key))
        take = dict(floors)
        for key in remainders[:leftover]:
            take[key] += 1
        for key in fw_strata:
            ids = sorted(strata[key])
            rng = random.Random(f"{rng_seed}|{key[0]}|{key[1]}")
            rng.shuffle(ids)
            for i, case_id in enumerate(ids):
                assignment[case_id] = TRAIN if i < take[key] else TEST

    return Dataset(
        records=list(dataset.records),
        split_assignment=assignment,
        rng_seed=rng_seed,
    )


def record_to_json(record: CaseRecord) -> dict:
    return dict(record.__dict__)


def record_from_json(obj: dict) -> CaseRecord:
    return CaseRecord(**{k: obj[k] for k in CaseRecord.__dataclass_fields__})


def write_records(records: list[CaseRecord], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_json(record), ensure_ascii=False) + "\n")


def read_records(path: Path) -> list[CaseRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(record_from_json(json.loads(line)))
    return records


def write_split(dataset: Dataset, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataset.split_assignment, fh, indent=2, sort_keys=True)


def read_split(path: Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
