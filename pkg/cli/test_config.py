import shutil
import tempfile
from pathlib import Path

import pytest

from ktree_search import settings as project_settings
from ktree_search.exceptions import ConfigurationError
from search.models import EXHAUSTIVE_BEAM
from .config import (
    RunConfig,
    configure_logging,
    load_config_file,
    parse_beam_width,
    require_files,
    resolve_config,
)


class TestRunConfig:
    """Test cases for RunConfig defaults and validation."""

    def test_defaults_follow_settings(self, mocker):
        mocker.patch.dict(project_settings.KTREE, {"BRANCHING": 8, "BEAM_WIDTH": "inf", "SEED": 11})
        config = RunConfig.defaults()
        assert config.branching == 8
        assert config.beam_width == EXHAUSTIVE_BEAM
        assert config.seed == 11

    def test_defaults_are_valid(self):
        assert RunConfig.defaults().validate() is not None

    @pytest.mark.parametrize("overrides", [
        {"branching": 1},
        {"branching": 256},
        {"leaf_capacity": 0},
        {"rep_count": 6},
        {"max_depth": 0},
        {"seed": -1},
        {"beam_width": 0},
        {"top_n": 0},
        {"metric": "manhattan"},
        {"mode": "hybrid"},
        {"init": "forgy"},
        {"threads": 0},
        {"scorer_retry_backoff_ms": -1},
    ])
    def test_out_of_range_values(self, overrides):
        with pytest.raises(ConfigurationError):
            RunConfig(**overrides).validate()

    def test_scorer_config(self):
        config = RunConfig(
            scorer_url="http://scorer:8088/score",
            scorer_timeout_ms=500,
            scorer_batch_limit=8,
            scorer_retry_backoff_ms=0,
        )
        scorer_config = config.scorer_config()
        assert scorer_config.url == "http://scorer:8088/score"
        assert scorer_config.timeout_ms == 500
        assert scorer_config.batch_limit == 8
        assert scorer_config.retry_backoff_ms == 0

    def test_retry_backoff_follows_settings_and_file(self, mocker, tmp_path):
        """
        Given: A retry backoff in settings and another in a config file
        When: The configuration is resolved
        Then: The file value reaches the scorer config
        """
        mocker.patch.dict(project_settings.KTREE, {"SCORER_RETRY_BACKOFF_MS": 40})
        assert RunConfig.defaults().scorer_retry_backoff_ms == 40
        config_file = tmp_path / "run.env"
        config_file.write_text("SCORER_URL=http://scorer:8088/score\nSCORER_RETRY_BACKOFF_MS=250\n", encoding="utf-8")
        resolved = resolve_config(config_file=config_file, base=RunConfig.defaults())
        assert resolved.scorer_config().retry_backoff_ms == 250


class TestParseBeamWidth:
    """Test cases for beam width parsing."""

    @pytest.mark.parametrize("raw, expected", [
        (20, 20),
        ("20", 20),
        (" INF ", EXHAUSTIVE_BEAM),
        ("inf", EXHAUSTIVE_BEAM),
    ])
    def test_valid(self, raw, expected):
        assert parse_beam_width(raw) == expected

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            parse_beam_width("wide")


class TestResolveConfig:
    """Test cases for layering configuration sources."""

    def setup_method(self):
        """Set up test environment."""
        self.temp_dir = Path(tempfile.mkdtemp())
        self.config_file = self.temp_dir / "run.env"

    def teardown_method(self):
        """Clean up test environment."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_file_overrides_defaults(self, monkeypatch):
        monkeypatch.delenv("KTREE_SCORER_URL", raising=False)
        self.config_file.write_text("BRANCHING=8\nbeam_width=inf\nmax_depth=4\nnormalize=false\n", encoding="utf-8")
        config = resolve_config(config_file=self.config_file, base=RunConfig())
        assert config.branching == 8
        assert config.beam_width == EXHAUSTIVE_BEAM
        assert config.max_depth == 4
        assert config.normalize is False

    def test_flags_override_file(self, monkeypatch):
        monkeypatch.delenv("KTREE_SCORER_URL", raising=False)
        self.config_file.write_text("BRANCHING=8\nTOP_N=5\n", encoding="utf-8")
        config = resolve_config({"branching": 10, "top_n": None}, config_file=self.config_file, base=RunConfig())
        assert config.branching == 10
        assert config.top_n == 5

    def test_env_scorer_url_overrides_file(self, monkeypatch):
        """
        Given a scorer URL in the config file and in the environment
        When the configuration is resolved
        Then the environment wins, and a flag wins over both
        """
        monkeypatch.setenv("KTREE_SCORER_URL", "http://env:8088/score")
        self.config_file.write_text("SCORER_URL=http://file:8088/score\n", encoding="utf-8")
        assert resolve_config(config_file=self.config_file, base=RunConfig()).scorer_url == "http://env:8088/score"
        flagged = resolve_config({"scorer_url": "http://flag:8088/score"}, config_file=self.config_file, base=RunConfig())
        assert flagged.scorer_url == "http://flag:8088/score"

    def test_unrelated_overrides_are_ignored(self, monkeypatch):
        monkeypatch.delenv("KTREE_SCORER_URL", raising=False)
        config = resolve_config({"command": "build", "out": "tree.bin"}, base=RunConfig())
        assert config == RunConfig()

    def test_invalid_flag_value(self):
        with pytest.raises(ConfigurationError):
            resolve_config({"branching": 1}, base=RunConfig())

    def test_unknown_file_key(self):
        self.config_file.write_text("BRANCHES=8\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="unknown setting"):
            load_config_file(self.config_file)

    def test_bad_file_value(self):
        self.config_file.write_text("SEED=zero\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="invalid value"):
            load_config_file(self.config_file)

    def test_missing_file(self):
        with pytest.raises(ConfigurationError, match="does not exist"):
            load_config_file(self.temp_dir / "absent.env")


class TestRequireFiles:
    """Test cases for input path checks."""

    def test_existing_and_unset_paths_pass(self, tmp_path):
        present = tmp_path / "items.tsv"
        present.write_text("0\ta\n", encoding="utf-8")
        require_files(items=present, qrels=None)

    def test_missing_path_is_named(self, tmp_path):
        with pytest.raises(ConfigurationError, match="tree file"):
            require_files(tree=tmp_path / "tree.bin")


class TestConfigureLogging:
    """Test cases for logging setup."""

    def test_verbose_sets_debug(self, mocker):
        dict_config = mocker.patch("logging.config.dictConfig")
        configure_logging(verbose=True)
        applied = dict_config.call_args.args[0]
        assert applied["root"]["level"] == "DEBUG"
        assert applied is not project_settings.LOGGING

    def test_default_keeps_settings_level(self, mocker):
        dict_config = mocker.patch("logging.config.dictConfig")
        configure_logging()
        assert dict_config.call_args.args[0]["root"]["level"] == project_settings.LOGGING["root"]["level"]
