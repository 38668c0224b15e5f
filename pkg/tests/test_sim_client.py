# tests/test_sim_client.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""Unit tests for the SimClient."""

from unittest.mock import MagicMock, patch

import pytest
import zmq

from wave_twin.constants.DTwin import DMethod
from wave_twin.simkit.SimClient import SimClient
from wave_twin.utils.TwinErrors import TwinError
from wave_twin.utils.TwinMsg import TwinMsg


def _client():
    client = SimClient("ipc:///tmp/wave-twin-test.sock")
    client.socket = MagicMock()
    return client


class TestSimClient:
    """Test cases for SimClient."""

    @patch("wave_twin.simkit.SimClient.SimClient._setup_socket")
    def test_init_connects(self, mock_setup):
        """Test that the constructor sets up the socket."""
        client = SimClient("tcp://localhost:5757", timeout_ms=250)

        assert client.endpoint == "tcp://localhost:5757"
        mock_setup.assert_called_once()

    @patch("wave_twin.simkit.SimClient.SimClient._setup_socket")
    def test_send_message_round_trip(self, mock_setup):
        """Test that send_message() sends the request and parses the reply."""
        client = _client()
        reply_msg = TwinMsg(method=DMethod.RESULT, payload={"x": 1})
        client.socket.recv.return_value = reply_msg.to_bytes()

        reply = client.send_message(TwinMsg(method=DMethod.SIMULATE))

        sent = TwinMsg.from_bytes(client.socket.send.call_args[0][0])
        assert sent.method() == DMethod.SIMULATE
        assert reply.method() == DMethod.RESULT
        assert reply.payload() == {"x": 1}

    @patch("wave_twin.simkit.SimClient.SimClient._setup_socket")
    def test_timeout_raises(self, mock_setup):
        """Test that a receive timeout becomes a TwinError."""
        client = _client()
        client.socket.recv.side_effect = zmq.Again()

        client.submit(TwinMsg(method=DMethod.SIMULATE))
        with pytest.raises(TwinError):
            client.collect()

    @patch("wave_twin.simkit.SimClient.SimClient._setup_socket")
    def test_stop_worker_skipped_while_waiting(self, mock_setup):
        """Test that no stop is sent while a reply is outstanding."""
        client = _client()
        client.submit(TwinMsg(method=DMethod.SIMULATE))
        client.socket.send.reset_mock()

        client.stop_worker()

        client.socket.send.assert_not_called()

    @patch("wave_twin.simkit.SimClient.SimClient._setup_socket")
    def test_stop_worker_sends_stop(self, mock_setup):
        """Test that an idle client sends a stop request."""
        client = _client()
        client.socket.recv.return_value = TwinMsg(method=DMethod.STOP).to_bytes()

        client.stop_worker()

        sent = TwinMsg.from_bytes(client.socket.send.call_args[0][0])
        assert sent.method() == DMethod.STOP

    @patch("wave_twin.simkit.SimClient.SimClient._setup_socket")
    def test_cleanup_closes_socket(self, mock_setup):
        """Test that _cleanup() closes the socket and terminates the context."""
        client = _client()
        client.context = MagicMock()
        socket = client.socket

        client._cleanup()

        socket.close.assert_called_once()
        client.context.term.assert_called_once()


if __name__ == "__main__":
    pytest.main([__file__])
