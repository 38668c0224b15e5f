# tests/test_utils.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for TwinMsg, TwinLog and the error hierarchy."""

import json
import logging

import pytest

from wave_twin.constants.DTwin import DEnv, DMethod, DTwin, DTwinMsg
from wave_twin.utils.TwinErrors import (
    CONFIG_ERRORS,
    CapacityError,
    ConfigError,
    CorpusError,
    DivergenceError,
    InvalidArgumentError,
    ShapeError,
    TwinError,
)
from wave_twin.utils.TwinLog import TwinLog
from wave_twin.utils.TwinMsg import TwinMsg


class TestTwinMsg:
    """Test cases for the worker message envelope."""

    def test_fields_survive_bytes(self):
        """Test that every field survives to_bytes/from_bytes."""
        msg = TwinMsg(
            sender="corpus", target="w0", method=DMethod.SIMULATE, payload={"index": 3}
        )
        back = TwinMsg.from_bytes(msg.to_bytes())

        assert back.sender() == "corpus"
        assert back.target() == "w0"
        assert back.method() == DMethod.SIMULATE
        assert back.payload() == {"index": 3}
        assert back.msg_id() == msg.msg_id()

    def test_protocol_version_is_stamped(self):
        """Test that the serialized form carries the protocol version."""
        data = json.loads(TwinMsg(method=DMethod.STOP).to_json())
        assert data[DTwinMsg.V] == DTwin.PROTOCOL_VERSION

    def test_fresh_ids_are_unique(self):
        """Test that messages without an id get distinct ones."""
        assert TwinMsg().msg_id() != TwinMsg().msg_id()

    def test_accessors_set_values(self):
        """Test that accessor methods act as setters when given a value."""
        msg = TwinMsg()
        msg.method(DMethod.RESULT)
        msg.payload({"ok": True})

        assert msg.method() == DMethod.RESULT
        assert msg.payload() == {"ok": True}

    def test_missing_payload_is_empty_dict(self):
        """Test the payload default."""
        assert TwinMsg.from_dict({DTwinMsg.METHOD: DMethod.STOP}).payload() == {}


class TestTwinLog:
    """Test cases for TwinLog."""

    def test_writes_to_file(self, tmp_path):
        """Test that messages at or above the level reach the log file."""
        path = tmp_path / "twin.log"
        log = TwinLog("TestTwinLogFile", log_file=str(path), to_console=False, log_level="info")
        log.info("hello wave")
        log.debug("hidden")
        for h in logging.getLogger("TestTwinLogFile").handlers:
            h.flush()

        text = path.read_text()
        assert "hello wave" in text
        assert "hidden" not in text
        assert "[TestTwinLogFile]" in text

    def test_env_fallback(self, monkeypatch):
        """Test that the environment variable sets the level when none is given."""
        monkeypatch.setenv(DEnv.LOGLEVEL, "DEBUG")
        TwinLog("TestTwinLogEnv", to_console=False)
        assert logging.getLogger("TestTwinLogEnv").level == logging.DEBUG

    def test_unknown_level_falls_back_to_warning(self, monkeypatch):
        """Test that an unknown level name means warning."""
        monkeypatch.delenv(DEnv.LOGLEVEL, raising=False)
        TwinLog("TestTwinLogBogus", to_console=False, log_level="chatty")
        assert logging.getLogger("TestTwinLogBogus").level == logging.WARNING

    def test_console_handler_attached_once(self):
        """Test that repeated construction does not stack console handlers."""
        TwinLog("TestTwinLogOnce")
        TwinLog("TestTwinLogOnce")
        handlers = logging.getLogger("TestTwinLogOnce").handlers
        assert sum(type(h) is logging.StreamHandler for h in handlers) == 1

    def test_loglevel_changes_level(self):
        """Test loglevel() on an existing instance."""
        log = TwinLog("TestTwinLogLevel", to_console=False, log_level="error")
        log.loglevel("INFO")
        assert logging.getLogger("TestTwinLogLevel").level == logging.INFO


class TestTwinErrors:
    """Test cases for the exception hierarchy."""

    def test_invalid_argument_is_value_error(self):
        """Test that argument errors are also ValueErrors."""
        assert issubclass(InvalidArgumentError, ValueError)
        assert issubclass(ShapeError, InvalidArgumentError)

    def test_shape_error_keeps_shapes(self):
        """Test that ShapeError records both operand shapes."""
        e = ShapeError("bad", (2, 3), (3, 2))
        assert (e.a, e.b) == ((2, 3), (3, 2))

    def test_carried_context(self):
        """Test that errors carry their identifying context."""
        assert CapacityError("full", "EB").approach == "EB"
        assert CorpusError("boom", 7).index == 7
        e = DivergenceError("nan", epoch=2, step=5)
        assert (e.epoch, e.step) == (2, 5)

    def test_config_errors_tuple(self):
        """Test which errors count as configuration errors."""
        assert ConfigError in CONFIG_ERRORS
        assert DivergenceError not in CONFIG_ERRORS
        assert all(issubclass(e, TwinError) for e in CONFIG_ERRORS)


if __name__ == "__main__":
    pytest.main([__file__])
