"""Newline-delimited JSON frames for the tool wire protocol.

Requests:  {"id": n, "method": "list_tools" | "call_tool", "params": {...}}
Responses: {"id": n, "result": ...} or {"id": n, "error": {"code", "message"}}

Frames are serialized with sorted keys so the argument bytes inside a frame
match the canonical form the gate digests.
"""

from __future__ import annotations

import json


class ProtocolError(Exception):
    pass


def encode_frame(frame: dict) -> str:
    return json.dumps(frame, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def encode_request(req_id: int, method: str, params: dict) -> str:
    return encode_frame({"id": req_id, "method": method, "params": params})


def encode_result(req_id, result) -> str:
    return encode_frame({"id": req_id, "result": result})


def encode_error(req_id, code: str, message: str) -> str:
    return encode_frame({"id": req_id, "error": {"code": code, "message": message}})


def decode_frame(line: str) -> dict:
    line = line.strip()
    if not line:
        raise ProtocolError("empty frame")
    try:
        frame = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"frame is not valid JSON: {exc}") from exc
    if not isinstance(frame, dict) or "id" not in frame:
        raise ProtocolError("frame missing id")
    return frame
