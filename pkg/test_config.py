"""
Tests for session configuration and shared error helpers.
"""
import logging

import pytest

from config import ConfigError, SessionConfig, load_session_config
from utils import LoadError, format_location, handle_error


class TestSessionConfig:
    def test_defaults_are_valid(self):
        config = SessionConfig().validate()
        assert config.interactive

    @pytest.mark.parametrize("settings, message", [
        ({"depth_limit": 0}, "depth limit"),
        ({"max_solutions": 0}, "max solutions"),
        ({"oracle": (-1, 2)}, "oracle needs"),
        ({"oracle": (2, 2), "batch_file": "q.batch"}, "cannot be combined"),
    ])
    def test_invalid(self, settings, message):
        with pytest.raises(ConfigError, match=message):
            SessionConfig(**settings).validate()

    def test_load(self, tmp_path):
        path = tmp_path / "session.yaml"
        path.write_text("depth_limit: 200\noracle: [2, 3]\n")
        config = load_session_config(str(path))
        assert config.depth_limit == 200
        assert config.oracle == (2, 3)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "session.yaml"
        path.write_text("")
        assert load_session_config(str(path)) == SessionConfig()

    def test_unknown_keys(self, tmp_path):
        path = tmp_path / "session.yaml"
        path.write_text("depth: 3\n")
        with pytest.raises(ConfigError, match="unknown configuration keys"):
            load_session_config(str(path))

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "session.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="must be a mapping"):
            load_session_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot load configuration"):
            load_session_config(str(tmp_path / "missing.yaml"))


class TestErrors:
    def test_handle_error(self, caplog):
        with caplog.at_level(logging.ERROR):
            message = handle_error("loading program", ValueError("boom"))
        assert message == "Error loading program: boom"
        assert "boom" in caplog.text

    def test_format_location(self):
        assert format_location("a.apl", 3, 7, "oops").startswith("a.apl:3:")
        assert "oops" in format_location(None, None, None, "oops")

    def test_load_error_location(self):
        error = LoadError("unexpected token", "a.apl", 2, 5)
        assert str(error).startswith("a.apl:2:")
        assert "unexpected token" in str(error)
