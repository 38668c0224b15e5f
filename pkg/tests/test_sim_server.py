# tests/test_sim_server.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for the SimServer corpus worker."""

from unittest.mock import MagicMock, patch

import pytest

from wave_twin.constants.DTwin import DMethod, DModule
from wave_twin.core.SimRecord import SimulationRecord
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.simkit.Corpus import make_jobs
from wave_twin.simkit.SimServer import SimServer
from wave_twin.utils.TwinMsg import TwinMsg


def _job_payload(index=0):
    topology = IntersectionTopology.shipped("t_intersection")
    return make_jobs(index + 1, [topology], "real", seed=11, w=16)[index].to_dict()


class TestSimServer:
    """Test cases for SimServer."""

    @patch("wave_twin.simkit.SimServer.SimServer._setup_socket")
    def test_init_with_defaults(self, mock_setup):
        """Test SimServer initialization with default parameters."""
        server = SimServer("ipc:///tmp/wave-twin-test.sock")

        assert server.endpoint == "ipc:///tmp/wave-twin-test.sock"
        assert server.context is None
        assert server.socket is None
        assert server.served == 0
        mock_setup.assert_not_called()

    def test_handle_simulate(self):
        """Test that a simulate request returns a record and manifest entry."""
        server = SimServer("ipc:///tmp/wave-twin-test.sock")
        request = TwinMsg(sender="tester", method=DMethod.SIMULATE, payload=_job_payload())

        reply = TwinMsg.from_bytes(server.handle_message(request.to_bytes()))

        assert reply.method() == DMethod.RESULT
        assert reply.target() == "tester"
        record = SimulationRecord.from_dict(reply.payload()["record"])
        assert record.intersection_id == "t_intersection"
        assert record.w == 16
        assert reply.payload()["entry"]["index"] == 0
        assert server.served == 1

    def test_handle_bad_job_returns_error(self):
        """Test that a failing job becomes an error reply naming its index."""
        server = SimServer("ipc:///tmp/wave-twin-test.sock")
        payload = _job_payload()
        payload["index"] = 4
        payload["regime"] = "sideways"

        reply = TwinMsg.from_bytes(
            server.handle_message(TwinMsg(method=DMethod.SIMULATE, payload=payload).to_bytes())
        )

        assert reply.method() == DMethod.ERROR
        assert reply.payload()["index"] == 4
        assert reply.payload()["type"] == "ValueError"
        assert server.served == 0

    def test_unsupported_method(self):
        """Test that methods other than simulate are rejected."""
        server = SimServer("ipc:///tmp/wave-twin-test.sock")
        reply = TwinMsg.from_bytes(server.handle_message(TwinMsg(method="ping").to_bytes()))
        assert reply.method() == DMethod.ERROR

    def test_stop_ends_loop(self):
        """Test that start() answers a stop request and cleans up."""
        server = SimServer("ipc:///tmp/wave-twin-test.sock")
        server.socket = MagicMock()
        server.socket.recv.return_value = TwinMsg(method=DMethod.STOP).to_bytes()

        with patch.object(server, "_cleanup") as cleanup:
            server.start()

        reply = TwinMsg.from_bytes(server.socket.send.call_args[0][0])
        assert reply.method() == DMethod.STOP
        assert reply.sender() == DModule.SIM_SERVER
        cleanup.assert_called_once()

    def test_run_calls_start(self):
        """Test that run() delegates to start()."""
        with patch("wave_twin.simkit.SimServer.SimServer._setup_socket"):
            server = SimServer("ipc:///tmp/wave-twin-test.sock")
            with patch.object(server, "start") as start:
                server.run()
            start.assert_called_once()


if __name__ == "__main__":
    pytest.main([__file__])
