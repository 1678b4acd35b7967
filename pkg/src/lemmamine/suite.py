"""Task ingestion, single-task runs with persisted artifacts, and suite runs.

A manifest is a JSON object::

    {"name": "...",
     "settings": [{"generator": "templates", "mode": "nonagentic", "samples": 1,
                   "fewshot": 0, "label": "templates"}],
     "tasks": [{"id": "arbiter", "design": "arbiter.sv", "property": "prop",
                "group": "arbiter", "mock_responses": ["..."]}]}

Design and mock-script paths are relative to the manifest. Each setting
overrides fields of the run configuration; without ``settings`` the
configuration itself is the only setting.
"""

from __future__ import annotations

import json
import logging
import os
import re
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .checker.engine import check_strengthening
from .config import Config
from .errors import ConfigError
from .generators import ChatGenerator, Generator, MockGenerator, TemplateGenerator
from .hdl.design import load_design
from .prompting.drivers import MiningTask, RunOutcome, run_agentic, run_non_agentic
from .prompting.embed import make_embedder
from .prompting.pool import default_pool
from .prompting.prompt import load_template
from .report import SuiteReport, TaskRecord

log = logging.getLogger(__name__)

MAX_WORKERS = 8
_CONFIG_FIELDS = {f.name for f in fields(Config)}


@dataclass(frozen=True)
class VerificationTask:
    design: str
    property: str | None = None
    id: str = ""
    group: str = "default"
    mock_script: str | None = None
    mock_responses: tuple[str, ...] | None = None

    def load(self, config: Config) -> MiningTask:
        path = Path(self.design)
        if not path.is_file():
            raise ConfigError(f"design file {self.design} does not exist")
        design = load_design(path.read_text(encoding="utf-8"), str(path), config.depth_cap)
        return MiningTask(design, self.property, self.id, (self.group,))


@dataclass(frozen=True)
class Setting:
    label: str
    overrides: Mapping[str, object] = field(default_factory=dict)

    def apply(self, config: Config) -> Config:
        return config.with_overrides(**self.overrides)


@dataclass(frozen=True)
class Manifest:
    name: str
    tasks: tuple[VerificationTask, ...]
    settings: tuple[Setting, ...] = ()


def _setting(data: Mapping, index: int) -> Setting:
    unknown = set(data) - _CONFIG_FIELDS - {"label"}
    if unknown:
        raise ConfigError(f"setting {index}: unknown key(s) {', '.join(sorted(unknown))}")
    overrides = {k: v for k, v in data.items() if k != "label"}
    label = data.get("label") or overrides.get("generator") or f"setting{index}"
    return Setting(str(label), overrides)


def load_manifest(path: str | Path) -> Manifest:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, Mapping) or not isinstance(data.get("tasks"), list):
        raise ConfigError(f"manifest {p} needs a 'tasks' list")
    if not data["tasks"]:
        raise ConfigError(f"manifest {p} lists no tasks")
    tasks = []
    for i, t in enumerate(data["tasks"]):
        if not isinstance(t, Mapping) or "design" not in t:
            raise ConfigError(f"manifest task {i} needs a 'design' path")
        design = os.path.normpath(p.parent / t["design"])
        script = os.path.normpath(p.parent / t["mock_script"]) if t.get("mock_script") else None
        responses = tuple(t["mock_responses"]) if "mock_responses" in t else None
        tid = t.get("id") or f"{Path(t['design']).stem}.{t.get('property') or 'default'}"
        tasks.append(VerificationTask(design, t.get("property"), tid, t.get("group", "default"),
                                      script, responses))
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"manifest {p} repeats task ids")
    settings = tuple(_setting(s, i) for i, s in enumerate(data.get("settings", [])))
    return Manifest(str(data.get("name", p.stem)), tuple(tasks), settings)


def make_generator(config: Config, task: MiningTask, entry: VerificationTask | None = None,
                   label: str | None = None) -> Generator:
    if config.generator == "templates":
        return TemplateGenerator(task.design.ts, config.max_literals, config.include_implications,
                                 config.template_limit, name=label or "templates")
    if config.generator == "mock":
        if entry is not None and entry.mock_responses is not None:
            return MockGenerator(entry.mock_responses, name=label or "mock")
        script = (entry.mock_script if entry is not None else None) or config.mock_script
        if script is None:
            raise ConfigError("the mock generator needs a script (--mock-script or generator.mock_script)")
        return MockGenerator.from_file(script, name=label or "mock")
    if config.llm is None:
        raise ConfigError("the llm generator needs a [generator.llm] section with url and model")
    llm = config.llm
    return ChatGenerator(llm.url, llm.model, llm.api_key_env, llm.headers, llm.response_path,
                         config.sampling, llm.timeout, llm.retries, name=label or llm.name or llm.model)


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text)


def artifacts(outcome: RunOutcome, task: MiningTask, config: Config) -> dict[str, str]:
    """Run log, outcome and, when solved, an independently re-checked certificate."""
    stem = _slug(f"{outcome.task}__{outcome.generator}__{outcome.mode}")
    files = {f"runs/{stem}.json": outcome.to_json() + "\n", f"runs/{stem}.events.jsonl": outcome.events_jsonl()}
    if outcome.solved:
        lemmas = [task.design.compile_text(t, task.property_name) for t in outcome.lemmas]
        cert = check_strengthening(task.compiled, lemmas, config.budget)
        body = {
            "task": outcome.task,
            "design": task.design.path,
            "property": task.property_text,
            "lemmas": outcome.lemmas,
            "certificate": cert.as_dict(),
            "search_log": [e.as_dict() for e in outcome.result.log],
            "budget": {"timeout": config.timeout, "bmc_bound": config.bmc_bound, "k": config.k},
        }
        files[f"certificates/{stem}.json"] = json.dumps(body, indent=2, sort_keys=True) + "\n"
    return files


def write_artifacts(files: Mapping[str, str], out_dir: str | Path) -> None:
    for rel, text in files.items():
        p = Path(out_dir) / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")


def run_task(config: Config, task: MiningTask, mode: str | None = None, generator: Generator | None = None,
             entry: VerificationTask | None = None, out_dir: str | Path | None = None,
             label: str | None = None) -> RunOutcome:
    """Run the driver selected by ``mode`` (default ``config.mode``) on one task."""
    mode = mode or config.mode
    if mode not in ("agentic", "nonagentic"):
        raise ConfigError(f"unknown mode {mode!r}")
    generator = generator or make_generator(config, task, entry, label)
    pool = default_pool(config.pool_dir) if config.fewshot > 0 else None
    embedder = make_embedder(config.embedding_provider, config.embedding_model)
    template = load_template(config.prompt_template) if config.prompt_template else None
    driver = run_agentic if mode == "agentic" else run_non_agentic
    outcome = driver(task, generator, config.fewshot, config.samples, config.budget, pool, embedder, template)
    if out_dir is not None:
        write_artifacts(artifacts(outcome, task, config), out_dir)
    return outcome


def _run_job(job: tuple[Config, VerificationTask, Setting]) -> tuple[dict, dict[str, str]]:
    """Run one (task, setting) pair; failures become records so the suite continues."""
    base, entry, setting = job
    try:
        config = setting.apply(base)
    except ConfigError as exc:
        record = TaskRecord(entry.id, entry.group, setting.label, base.mode, error=f"ConfigError: {exc}")
        return record.as_dict(), {}
    try:
        task = entry.load(config)
        outcome = run_task(config, task, entry=entry, label=setting.label)
        files = artifacts(outcome, task, config)
    except Exception as exc:  # per-task isolation: record and continue
        log.warning("task %s (%s) failed: %s", entry.id, setting.label, exc)
        record = TaskRecord(entry.id, entry.group, setting.label, config.mode,
                            error=f"{type(exc).__name__}: {exc}")
        return record.as_dict(), {}
    record = TaskRecord(entry.id, entry.group, setting.label, config.mode, outcome.total_lemmas,
                        outcome.correct, outcome.one_inductive, outcome.solved, tuple(outcome.lemmas),
                        outcome.note, outcome.error)
    return record.as_dict(), files


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, MAX_WORKERS))


def run_suite(config: Config, manifest: Manifest, out_dir: str | Path | None = None,
              workers: int | None = None) -> SuiteReport:
    """Every task under every setting; results in manifest order regardless of parallelism."""
    if not manifest.tasks:
        raise ConfigError("the manifest lists no tasks")
    settings: Sequence[Setting] = manifest.settings or (Setting(config.generator),)
    jobs = [(config, t, s) for s in settings for t in manifest.tasks]
    workers = workers or config.workers or default_workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    report = SuiteReport()
    for t in manifest.tasks:
        report.groups[t.id] = t.group
    for record, files in results:
        report.add(TaskRecord.from_dict(record))
        if out_dir is not None:
            write_artifacts(files, out_dir)
    return report


def bundled_manifest() -> Path:
    return Path(str(resources.files("lemmamine") / "data" / "suites" / "fixtures.json"))
