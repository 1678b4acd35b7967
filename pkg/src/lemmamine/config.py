"""Run configuration read from a TOML file plus command-line overrides.

Recognized keys (all optional)::

    [solver]      external_path, timeout_secs
    [checker]     bmc_bound, k, depth_cap
    [generator]   kind ("templates" | "mock" | "llm"), mock_script
    [generator.llm]       url, model, api_key_env, headers, response_path, timeout, retries, name
    [generator.sampling]  passed through to the endpoint unchanged
    [templates]   max_literals, include_implications, limit
    [prompting]   mode, samples, fewshot, pool_dir, template, embedding_provider, embedding_model
    [suite]       workers

Credentials are never read from the file; the endpoint key comes from the
environment variable named by ``generator.llm.api_key_env``.
"""

from __future__ import annotations

import sys
from collections.abc import Mapping
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .checker.engine import CheckBudget
from .errors import ConfigError

MODES = ("agentic", "nonagentic")
GENERATORS = ("templates", "mock", "llm")
_SECRET_KEYS = {"api_key", "key", "token", "password", "secret", "authorization"}


@dataclass(frozen=True)
class LlmConfig:
    url: str
    model: str
    api_key_env: str | None = None
    headers: Mapping[str, str] | None = None
    response_path: str = "choices.0.message.content"
    timeout: float = 120.0
    retries: int = 3
    name: str | None = None


@dataclass(frozen=True)
class Config:
    external_solver: str | None = None
    timeout: float = 30.0
    bmc_bound: int = 30
    k: int = 1
    depth_cap: int = 4
    generator: str = "templates"
    mock_script: str | None = None
    llm: LlmConfig | None = None
    sampling: Mapping[str, object] = field(default_factory=dict)
    max_literals: int = 2
    include_implications: bool = False
    template_limit: int = 10_000
    mode: str = "agentic"
    samples: int = 5
    fewshot: int = 1
    pool_dir: str | None = None
    prompt_template: str | None = None
    embedding_provider: str | None = None
    embedding_model: str | None = None
    workers: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if self.generator not in GENERATORS:
            raise ConfigError(f"generator must be one of {', '.join(GENERATORS)}, got {self.generator!r}")
        if not 1 <= self.samples <= 5:
            raise ConfigError(f"samples must be between 1 and 5, got {self.samples}")
        if self.fewshot < 0:
            raise ConfigError("fewshot must be non-negative")
        if self.max_literals < 1:
            raise ConfigError("templates.max_literals must be at least 1")
        if self.workers < 0:
            raise ConfigError("suite.workers must be non-negative")
        try:
            self.budget
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def budget(self) -> CheckBudget:
        return CheckBudget(self.timeout, self.bmc_bound, self.k, self.external_solver)

    def with_overrides(self, **values) -> Config:
        """Copy with every non-``None`` keyword applied."""
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown setting(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in values.items() if v is not None})


# (section, key) -> (Config field, expected type)
_KEYS: dict[tuple[str, str], tuple[str, type | tuple[type, ...]]] = {
    ("solver", "external_path"): ("external_solver", str),
    ("solver", "timeout_secs"): ("timeout", (int, float)),
    ("checker", "bmc_bound"): ("bmc_bound", int),
    ("checker", "k"): ("k", int),
    ("checker", "depth_cap"): ("depth_cap", int),
    ("generator", "kind"): ("generator", str),
    ("generator", "mock_script"): ("mock_script", str),
    ("templates", "max_literals"): ("max_literals", int),
    ("templates", "include_implications"): ("include_implications", bool),
    ("templates", "limit"): ("template_limit", int),
    ("prompting", "mode"): ("mode", str),
    ("prompting", "samples"): ("samples", int),
    ("prompting", "fewshot"): ("fewshot", int),
    ("prompting", "pool_dir"): ("pool_dir", str),
    ("prompting", "template"): ("prompt_template", str),
    ("prompting", "embedding_provider"): ("embedding_provider", str),
    ("prompting", "embedding_model"): ("embedding_model", str),
    ("suite", "workers"): ("workers", int),
}
_PATH_FIELDS = {"mock_script", "pool_dir", "prompt_template"}
_LLM_KEYS = {f.name for f in fields(LlmConfig)}


def _check_type(where: str, value: object, kind) -> None:
    kinds = kind if isinstance(kind, tuple) else (kind,)
    # bool is a subclass of int, so reject it explicitly where a number is wanted
    if (isinstance(value, bool) and bool not in kinds) or not isinstance(value, kinds):
        raise ConfigError(f"{where} has the wrong type ({type(value).__name__})")


def _reject_secrets(where: str, table: Mapping) -> None:
    for key in table:
        if key.lower() in _SECRET_KEYS:
            raise ConfigError(f"{where}.{key}: credentials must come from environment variables, "
                              "not the configuration file")


def config_from_mapping(data: Mapping, base_dir: str | Path | None = None) -> Config:
    """Build a :class:`Config`; relative paths are resolved against ``base_dir``."""
    values: dict[str, object] = {}
    for section, table in data.items():
        if not isinstance(table, Mapping):
            raise ConfigError(f"top-level key {section!r} must be a table")
        _reject_secrets(section, table)
        for key, value in table.items():
            if section == "generator" and key in ("llm", "sampling"):
                continue
            target = _KEYS.get((section, key))
            if target is None:
                raise ConfigError(f"unknown configuration key {section}.{key}")
            name, kind = target
            _check_type(f"{section}.{key}", value, kind)
            if name in _PATH_FIELDS and base_dir is not None:
                value = str(Path(base_dir) / value)
            values[name] = value
    gen = data.get("generator", {})
    if "sampling" in gen:
        if not isinstance(gen["sampling"], Mapping):
            raise ConfigError("generator.sampling must be a table")
        values["sampling"] = dict(gen["sampling"])
    if "llm" in gen:
        llm = gen["llm"]
        if not isinstance(llm, Mapping):
            raise ConfigError("generator.llm must be a table")
        _reject_secrets("generator.llm", llm)
        unknown = set(llm) - _LLM_KEYS
        if unknown:
            raise ConfigError(f"unknown key(s) in generator.llm: {', '.join(sorted(unknown))}")
        if "url" not in llm or "model" not in llm:
            raise ConfigError("generator.llm needs both url and model")
        values["llm"] = LlmConfig(**llm)
    return Config(**values)


def load_config(path: str | Path | None = None) -> Config:
    if path is None:
        return Config()
    p = Path(path)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {p}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {p}: {exc}") from exc
    return config_from_mapping(data, p.parent)
