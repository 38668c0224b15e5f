# wave_twin/simkit/SimClient.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from typing import Optional

import zmq

from wave_twin.constants.DTwin import DMethod, DModule, DTwinMsgText
from wave_twin.utils.TwinErrors import TwinError, WorkerTimeout
from wave_twin.utils.TwinLog import TwinLog
from wave_twin.utils.TwinMsg import TwinMsg


class SimClient:
    """
    ZeroMQ REQ client for one corpus worker.

    send_message() is a blocking round trip. submit() and collect() split
    the round trip so several workers can simulate at the same time.
    """

    def __init__(
        self,
        endpoint: str,
        id: str = DModule.SIM_CLIENT,
        log_level: Optional[str] = None,
        timeout_ms: int = -1,
    ) -> None:
        """
        Initialize the SimClient and connect to the worker.

        Args:
            endpoint (str): Endpoint the worker is bound to
            id (str): Identifier for logging purposes
            log_level (Optional[str]): TwinLog level name
            timeout_ms (int): Receive timeout, -1 waits forever
        """
        self.endpoint = endpoint
        self._id = id
        self._timeout_ms = timeout_ms
        self.log = TwinLog(client_id=id, log_level=log_level)
        self._waiting = False

        self.context: Optional[zmq.Context] = None
        self.socket: Optional[zmq.Socket] = None
        self._setup_socket()

    def _setup_socket(self) -> None:
        """
        Set up the ZeroMQ context and REQ socket and connect.

        Raises:
            TwinError: If the socket cannot be created or connected
        """
        try:
            self.context = zmq.Context()
            self.socket = self.context.socket(zmq.REQ)
            self.socket.setsockopt(zmq.RCVTIMEO, self._timeout_ms)
            self.socket.setsockopt(zmq.LINGER, 0)
            self.socket.connect(self.endpoint)
        except zmq.ZMQError as e:
            raise TwinError(f"cannot connect to {self.endpoint}: {e}") from e
        self.log.info(DTwinMsgText.CLIENT_CONNECTED.format(endpoint=self.endpoint))

    def submit(self, msg: TwinMsg) -> None:
        if self.socket is None:
            raise RuntimeError("Socket not initialized")
        self.socket.send(msg.to_bytes())
        self._waiting = True

    def collect(self) -> TwinMsg:
        """
        Wait for the reply to the last submitted message.

        Raises:
            WorkerTimeout: On receive timeout
        """
        if self.socket is None:
            raise RuntimeError("Socket not initialized")
        try:
            raw = self.socket.recv()
        except zmq.Again as e:
            raise WorkerTimeout(f"worker at {self.endpoint} did not answer") from e
        self._waiting = False
        return TwinMsg.from_bytes(raw)

    def send_message(self, msg: TwinMsg) -> TwinMsg:
        """
        Send a message to the worker and wait for the response.

        Args:
            msg (TwinMsg): Request

        Returns:
            TwinMsg: The worker's reply
        """
        self.log.debug(f"{self._id} sending {msg.method()} {msg.msg_id()}")
        self.submit(msg)
        reply = self.collect()
        self.log.debug(f"{self._id} received {reply.method()}")
        return reply

    def stop_worker(self) -> None:
        if not self._waiting:
            self.send_message(TwinMsg(sender=self._id, method=DMethod.STOP))

    def _cleanup(self) -> None:
        """
        Close the socket and terminate the ZeroMQ context.
        """
        if self.socket:
            self.socket.close()
        if self.context:
            self.context.term()
        self.log.info(DTwinMsgText.CLIENT_CLEANUP)
