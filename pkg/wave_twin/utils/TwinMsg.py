# wave_twin/utils/TwinMsg.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import json
import uuid
from typing import Any, Dict, Optional

from wave_twin.constants.DTwin import DTwin, DTwinMsg


class TwinMsg:
    """
    Structured message class for the corpus worker protocol.

    TwinMsg is the envelope exchanged between SimClient and SimServer. Each
    message carries sender/target identification, the method to perform
    (simulate, stop, result, error) and a JSON-serializable payload.
    """

    def __init__(
        self,
        sender: Optional[str] = None,
        target: Optional[str] = None,
        method: Optional[str] = None,
        payload: Optional[Dict[str, Any]] = None,
        msg_id: Optional[str] = None,
    ) -> None:
        """
        Initialize a new TwinMsg instance.

        Args:
            sender (Optional[str]): Identifier of the message sender
            target (Optional[str]): Identifier of the intended message recipient
            method (Optional[str]): Method or action to be performed
            payload (Optional[Dict[str, Any]]): Message data
            msg_id (Optional[str]): Message id, a fresh uuid4 when omitted
        """
        self._sender = sender
        self._target = target
        self._method = method

        self._payload = payload or {}
        self._id = msg_id or str(uuid.uuid4())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TwinMsg":
        return cls(
            sender=data.get(DTwinMsg.SENDER),
            target=data.get(DTwinMsg.TARGET),
            method=data.get(DTwinMsg.METHOD),
            payload=data.get(DTwinMsg.PAYLOAD),
            msg_id=data.get(DTwinMsg.ID),
        )

    @classmethod
    def from_json(cls, raw: str) -> "TwinMsg":
        return cls.from_dict(json.loads(raw))

    @classmethod
    def from_bytes(cls, raw: bytes) -> "TwinMsg":
        return cls.from_json(raw.decode("utf-8"))

    def sender(self, sender=None):
        if sender is not None:
            self._sender = sender
        return self._sender

    def target(self, target=None):
        if target is not None:
            self._target = target
        return self._target

    def method(self, method=None):
        if method is not None:
            self._method = method
        return self._method

    def payload(self, payload=None):
        if payload is not None:
            self._payload = payload
        return self._payload

    def msg_id(self) -> str:
        return self._id

    def to_dict(self) -> Dict[str, Any]:
        return {
            DTwinMsg.ID: self._id,
            DTwinMsg.SENDER: self._sender,
            DTwinMsg.TARGET: self._target,
            DTwinMsg.METHOD: self._method,
            DTwinMsg.PAYLOAD: self._payload,
            DTwinMsg.V: DTwin.PROTOCOL_VERSION,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_bytes(self) -> bytes:
        return self.to_json().encode("utf-8")
