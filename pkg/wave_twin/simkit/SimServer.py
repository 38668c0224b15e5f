# wave_twin/simkit/SimServer.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import argparse
from typing import Optional

import zmq

from wave_twin.constants.DTwin import DCliMsg, DMethod, DModule, DTwin, DTwinLog, DTwinMsgText
from wave_twin.utils.TwinLog import TwinLog
from wave_twin.utils.TwinMsg import TwinMsg


class SimServer:
    """
    Corpus worker answering simulate requests over a ZeroMQ REP socket.

    Each request carries one scenario job; the reply carries the serialized
    SimulationRecord and its manifest entry, or an error payload naming the
    scenario index. A stop request ends the loop.
    """

    def __init__(
        self,
        endpoint: str,
        id: str = DModule.SIM_SERVER,
        log_level: Optional[str] = None,
    ) -> None:
        """
        Initialize the SimServer with its binding endpoint.

        Args:
            endpoint (str): ZeroMQ endpoint to bind, e.g. ipc:///tmp/w0.sock
            id (str): Identifier for logging purposes
            log_level (Optional[str]): TwinLog level name
        """
        self.endpoint = endpoint
        self._id = id
        self.log = TwinLog(client_id=id, log_level=log_level)
        self.served = 0

        self.context: Optional[zmq.Context] = None
        self.socket: Optional[zmq.Socket] = None

    def loglevel(self, log_level: str) -> None:
        self.log.loglevel(log_level)

    def _setup_socket(self) -> None:
        """
        Set up the ZeroMQ context and REP socket and bind to the endpoint.

        Raises:
            zmq.ZMQError: If the socket cannot be bound
        """
        try:
            self.context = zmq.Context()
            self.socket = self.context.socket(zmq.REP)
            self.socket.bind(self.endpoint)
        except zmq.ZMQError as e:
            self.log.error(DTwinMsgText.WORKER_ERROR.format(e=e))
            raise

        self.log.info(DTwinMsgText.WORKER_UP.format(endpoint=self.endpoint))

    def _cleanup(self) -> None:
        """
        Close the socket and terminate the ZeroMQ context.
        """
        if self.socket:
            self.socket.close()
        if self.context:
            self.context.term()
        self.log.info(DTwinMsgText.WORKER_CLEANUP)

    def handle_message(self, message: bytes) -> bytes:
        """
        Run one simulate request.

        Args:
            message (bytes): A TwinMsg with method simulate and a job payload

        Returns:
            bytes: TwinMsg with method result (payload: record, entry) or
            error (payload: index, error, type)
        """
        # Corpus imports this module
        from wave_twin.simkit.Corpus import ScenarioJob, run_job

        request = TwinMsg.from_bytes(message)
        index = (request.payload() or {}).get("index", -1)
        try:
            if request.method() != DMethod.SIMULATE:
                raise ValueError(f"unsupported method {request.method()}")
            job = ScenarioJob.from_dict(request.payload())
            record, entry = run_job(job)
            reply = TwinMsg(
                sender=self._id,
                target=request.sender(),
                method=DMethod.RESULT,
                payload={"index": job.index, "record": record.to_dict(), "entry": entry},
            )
            self.served += 1
        except Exception as e:
            self.log.error(DTwinMsgText.WORKER_ERROR.format(e=e))
            reply = TwinMsg(
                sender=self._id,
                target=request.sender(),
                method=DMethod.ERROR,
                payload={"index": index, "error": str(e), "type": type(e).__name__},
            )
        return reply.to_bytes()

    def start(self) -> None:
        """
        Serve requests until a stop message arrives.

        Raises:
            RuntimeError: If the socket is not initialized
        """
        if self.socket is None:
            self._setup_socket()

        try:
            while True:
                if self.socket is None:
                    raise RuntimeError("Socket not initialized")
                message = self.socket.recv()
                self.log.debug(DTwinMsgText.RECEIVE.format(message=message[:80]))

                if TwinMsg.from_bytes(message).method() == DMethod.STOP:
                    self.socket.send(
                        TwinMsg(sender=self._id, method=DMethod.STOP).to_bytes()
                    )
                    break

                response = self.handle_message(message)
                self.socket.send(response)
                self.log.debug(DTwinMsgText.SENT.format(response=response[:80]))

        except KeyboardInterrupt:
            self.log.info(f"{self._id} interrupted after {self.served} scenarios")

        finally:
            self._cleanup()

    def run(self) -> None:
        self.start()


def serve(endpoint: str, log_level: Optional[str] = None) -> None:
    """Worker process entry point."""
    SimServer(endpoint, log_level=log_level).run()


def main() -> None:
    """
    Entry point for the wave-twin-worker command.
    """
    parser = argparse.ArgumentParser(
        description="Wave Twin corpus worker - simulate scenarios on request",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  wave-twin-worker --endpoint ipc:///tmp/wave-twin-0.sock
  wave-twin-worker --endpoint tcp://*:5757 --loglevel DEBUG
        """,
    )
    parser.add_argument("--endpoint", "-e", required=True, help="Endpoint to bind")
    parser.add_argument(
        "--loglevel", "-l", type=str, default=DTwinLog.INFO, help=DCliMsg.LOGLEVEL_HELP
    )
    parser.add_argument(
        "--version", "-v", action="version", version=f"wave-twin-worker {DTwin.VERSION}"
    )
    args = parser.parse_args()
    serve(args.endpoint, args.loglevel)


if __name__ == "__main__":
    main()
