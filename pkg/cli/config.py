"""
Run configuration for the ktree CLI.

Values are resolved in order: engine defaults from ``ktree_search.settings``,
an optional ``key=value`` file (``--config``), the ``KTREE_SCORER_URL``
environment variable, then command-line flags. The result is validated once
and handed to every command.
"""
import copy
import logging
import logging.config
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values

from ktree import builder
from kmeans.models import INIT_METHODS
from ktree_search import settings as project_settings
from ktree_search.exceptions import ConfigurationError
from scorers.remote import RemoteScorerConfig
from search.beam import SEARCH_MODES
from search.models import EXHAUSTIVE_BEAM
from vecstore.ops import METRICS

logger = logging.getLogger(__name__)

BeamWidth = Union[int, str]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    branching: int = 5
    leaf_capacity: int = 16
    rep_count: int = 3
    max_depth: Optional[int] = None
    max_iter: int = 50
    tol: float = 1e-4
    init: str = "kmeanspp"
    beam_width: BeamWidth = 20
    top_n: int = 20
    metric: str = "cosine"
    mode: str = "vector"
    eval_cutoff: int = 20
    threads: int = 1
    normalize: bool = True
    scorer_url: str = ""
    scorer_timeout_ms: int = 10000
    scorer_max_retries: int = 3
    scorer_batch_limit: int = 64
    scorer_retry_backoff_ms: int = 100
    verbose: bool = False

    @classmethod
    def defaults(cls) -> "RunConfig":
        """Engine defaults as configured in settings (and their environment variables)."""
        engine = project_settings.KTREE
        return cls(
            seed=engine["SEED"],
            branching=engine["BRANCHING"],
            leaf_capacity=engine["LEAF_CAPACITY"],
            rep_count=engine["REP_COUNT"],
            max_iter=engine["MAX_ITER"],
            tol=engine["TOL"],
            beam_width=parse_beam_width(engine["BEAM_WIDTH"]),
            top_n=engine["TOP_N"],
            eval_cutoff=engine["EVAL_CUTOFF"],
            scorer_url=engine["SCORER_URL"],
            scorer_timeout_ms=engine["SCORER_TIMEOUT_MS"],
            scorer_max_retries=engine["SCORER_MAX_RETRIES"],
            scorer_batch_limit=engine["SCORER_BATCH_LIMIT"],
            scorer_retry_backoff_ms=engine["SCORER_RETRY_BACKOFF_MS"],
        )

    def validate(self) -> "RunConfig":
        """Check every numeric parameter against its documented range."""
        if self.seed < 0:
            raise ConfigurationError(f"seed must be nonnegative, got {self.seed}")
        if not 2 <= self.branching <= builder.MAX_BRANCHING:
            raise ConfigurationError(f"branching must be in 2..{builder.MAX_BRANCHING}, got {self.branching}")
        if self.leaf_capacity < 1:
            raise ConfigurationError(f"leaf_capacity must be positive, got {self.leaf_capacity}")
        if not 0 <= self.rep_count <= builder.MAX_REP_COUNT:
            raise ConfigurationError(f"rep_count must be in 0..{builder.MAX_REP_COUNT}, got {self.rep_count}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigurationError(f"max_depth must be positive, got {self.max_depth}")
        if self.max_iter < 1 or self.tol < 0:
            raise ConfigurationError("max_iter must be positive and tol nonnegative")
        if self.init not in INIT_METHODS:
            raise ConfigurationError(f"init must be one of {INIT_METHODS}, got {self.init!r}")
        if self.beam_width != EXHAUSTIVE_BEAM and self.beam_width < 1:
            raise ConfigurationError(f"beam_width must be positive or {EXHAUSTIVE_BEAM!r}, got {self.beam_width}")
        if self.top_n < 1 or self.eval_cutoff < 1:
            raise ConfigurationError("top_n and eval_cutoff must be positive")
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.mode not in SEARCH_MODES:
            raise ConfigurationError(f"mode must be one of {SEARCH_MODES}, got {self.mode!r}")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be positive, got {self.threads}")
        if self.scorer_retry_backoff_ms < 0:
            raise ConfigurationError(f"scorer retry backoff must be nonnegative, got {self.scorer_retry_backoff_ms}")
        return self

    def scorer_config(self) -> RemoteScorerConfig:
        return RemoteScorerConfig(
            url=self.scorer_url,
            timeout_ms=self.scorer_timeout_ms,
            max_retries=self.scorer_max_retries,
            batch_limit=self.scorer_batch_limit,
            retry_backoff_ms=self.scorer_retry_backoff_ms,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_beam_width(raw: Any) -> BeamWidth:
    """An integer beam width or the exhaustive-beam sentinel ``inf``."""
    if isinstance(raw, int) and not isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text == EXHAUSTIVE_BEAM:
        return EXHAUSTIVE_BEAM
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"beam width must be an integer or {EXHAUSTIVE_BEAM!r}, got {raw!r}")


def _convert(name: str, raw: Any) -> Any:
    if name == "beam_width":
        return parse_beam_width(raw)
    if not isinstance(raw, str):
        return raw
    kind = _FIELD_TYPES[name]
    try:
        if kind is int:
            return int(raw)
        if kind == Optional[int]:
            return None if raw.strip().lower() in ("", "none") else int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
    except ValueError:
        raise ConfigurationError(f"invalid value {raw!r} for {name}")
    return raw


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a ``key=value`` file; keys are RunConfig field names, case-insensitive."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file {path} does not exist")
    values = {}
    for key, raw in dotenv_values(path).items():
        name = key.strip().lower()
        if name not in _FIELD_TYPES:
            raise ConfigurationError(f"{path}: unknown setting {key!r}")
        values[name] = _convert(name, raw if raw is not None else "")
    return values


def resolve_config(
    overrides: Optional[Mapping[str, Any]] = None,
    config_file: Optional[Union[str, Path]] = None,
    base: Optional[RunConfig] = None,
) -> RunConfig:
    """
    Layer the configuration sources and validate the result.

    ``overrides`` holds command-line values; ``None`` entries mean the flag
    was not given.
    """
    config = base or RunConfig.defaults()
    if config_file:
        config = replace(config, **load_config_file(config_file))
    env_url = os.getenv("KTREE_SCORER_URL")
    if env_url:
        config = replace(config, scorer_url=env_url)
    flags = {
        name: _convert(name, value)
        for name, value in (overrides or {}).items()
        if name in _FIELD_TYPES and value is not None
    }
    config = replace(config, **flags)
    logger.debug("Resolved run configuration: %s", config)
    return config.validate()


def require_files(**paths: Optional[Union[str, Path]]) -> None:
    """Every given input path must name an existing file."""
    for label, path in paths.items():
        if path is not None and not Path(path).is_file():
            raise ConfigurationError(f"{label.replace('_', ' ')} file {path} does not exist")


def configure_logging(verbose: bool = False) -> None:
    """Apply the project LOGGING dictConfig; ``verbose`` lowers the root level to DEBUG."""
    config = copy.deepcopy(project_settings.LOGGING)
    if verbose:
        config["root"]["level"] = "DEBUG"
    logging.config.dictConfig(config)
