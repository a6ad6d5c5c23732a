"""Mock tool servers used by the test and acceptance suites.

Each server persists its effects under a sandbox directory so cross-task
flows are real round-trips: the email outbox, the remote key-value file,
and the filesystem root survive between sessions. Handlers are
deterministic functions of (sandbox state, arguments).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .wire import decode_frame, encode_error, encode_result


@dataclass(frozen=True)
class ToolDescriptor:
    name: str
    args: dict[str, dict] = field(default_factory=dict)  # name -> {kind, required}
    description: str = ""

    def as_wire(self) -> dict:
        return {"name": self.name, "args": self.args, "description": self.description}


def descriptor_from_wire(raw: dict) -> ToolDescriptor:
    return ToolDescriptor(raw["name"], raw.get("args", {}), raw.get("description", ""))


def _arg(kind: str, required: bool = False) -> dict:
    return {"kind": kind, "required": required}


class ToolFault(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class MockServer:
    """Line-oriented request handler shared by all transports."""

    name = "base"
    tools: tuple[ToolDescriptor, ...] = ()

    def __init__(self, sandbox: str | Path):
        self.sandbox = Path(sandbox)
        self.sandbox.mkdir(parents=True, exist_ok=True)

    # ------------------------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            frame = decode_frame(line)
        except Exception as exc:
            return encode_error(None, "bad_frame", str(exc))
        req_id = frame.get("id")
        method = frame.get("method")
        params = frame.get("params") or {}
        if method == "list_tools":
            return encode_result(req_id, {"tools": [t.as_wire() for t in self.tools]})
        if method == "call_tool":
            tool = params.get("tool")
            args = params.get("args") or {}
            handler = getattr(self, f"tool_{tool}", None)
            if handler is None or not any(t.name == tool for t in self.tools):
                return encode_error(req_id, "unknown_tool", f"no tool named {tool!r}")
            try:
                return encode_result(req_id, {"value": handler(args)})
            except ToolFault as exc:
                return encode_error(req_id, exc.code, str(exc))
        return encode_error(req_id, "unknown_method", f"no method {method!r}")

    # ------------------------------------------------------------------
    # Shared state helpers (read & rewrite per call: no in-memory caching,
    # so concurrent sessions and sequential tasks observe one state).

    def _load_json(self, name: str, default):
        path = self.sandbox / name
        if not path.exists():
            return default
        return json.loads(path.read_text(encoding="utf-8"))

    def _store_json(self, name: str, value) -> None:
        (self.sandbox / name).write_text(
            json.dumps(value, ensure_ascii=False, indent=1), encoding="utf-8"
        )

    def _append_jsonl(self, name: str, record: dict) -> None:
        with (self.sandbox / name).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


class FilesystemServer(MockServer):
    name = "filesystem"
    tools = (
        ToolDescriptor("read_file", {"path": _arg("scalar", True)}, "Read a text file."),
        ToolDescriptor(
            "write_file",
            {"path": _arg("scalar", True), "content": _arg("scalar", True)},
            "Write a text file.",
        ),
        ToolDescriptor("list_dir", {"path": _arg("scalar")}, "List directory entries."),
    )

    @property
    def root(self) -> Path:
        root = self.sandbox / "fs"
        root.mkdir(exist_ok=True)
        return root

    def _resolve(self, raw_path) -> Path:
        if not isinstance(raw_path, str) or not raw_path:
            raise ToolFault("bad_path", "path must be a non-empty string")
        candidate = (self.root / raw_path).resolve()
        if not str(candidate).startswith(str(self.root.resolve())):
            raise ToolFault("bad_path", "path escapes the sandbox")
        return candidate

    def tool_read_file(self, args):
        path = self._resolve(args.get("path"))
        if not path.is_file():
            raise ToolFault("not_found", f"no file at {args.get('path')!r}")
        return path.read_text(encoding="utf-8")

    def tool_write_file(self, args):
        content = args.get("content")
        if not isinstance(content, str):
            raise ToolFault("bad_content", "content must be a string")
        path = self._resolve(args.get("path"))
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        return {"written": len(content)}

    def tool_list_dir(self, args):
        path = self._resolve(args.get("path") or ".")
        if not path.is_dir():
            raise ToolFault("not_found", f"no directory at {args.get('path')!r}")
        return sorted(p.name for p in path.iterdir())


class EmailServer(MockServer):
    name = "email"
    tools = (
        ToolDescriptor(
            "send_email",
            {"to": _arg("scalar"), "subject": _arg("scalar"), "body": _arg("scalar", True)},
            "Send an email.",
        ),
        ToolDescriptor("read_inbox", {}, "List inbox messages."),
    )

    def tool_send_email(self, args):
        body = args.get("body")
        if not isinstance(body, str):
            raise ToolFault("bad_body", "body must be a string")
        record = {
            "to": args.get("to"),
            "subject": args.get("subject"),
            "body": body,
            "ts": time.time(),
        }
        self._append_jsonl("outbox.jsonl", record)
        count = len((self.sandbox / "outbox.jsonl").read_text().splitlines())
        return {"delivered": True, "id": count}

    def tool_read_inbox(self, args):
        return self._load_json("inbox.json", [])


class RemoteKvServer(MockServer):
    name = "remote_kv"
    tools = (
        ToolDescriptor(
            "put", {"key": _arg("scalar", True), "value": _arg("scalar", True)},
            "Store a value.",
        ),
        ToolDescriptor("get", {"key": _arg("scalar", True)}, "Fetch a stored value."),
        ToolDescriptor("query", {"prefix": _arg("scalar")}, "List key/value pairs."),
    )

    def tool_put(self, args):
        key = args.get("key")
        if not isinstance(key, str) or not key:
            raise ToolFault("bad_key", "key must be a non-empty string")
        store = self._load_json("kv.json", {})
        store[key] = args.get("value")
        self._store_json("kv.json", store)
        return {"stored": True}

    def tool_get(self, args):
        store = self._load_json("kv.json", {})
        key = args.get("key")
        if key not in store:
            raise ToolFault("not_found", f"no value under key {key!r}")
        return store[key]

    def tool_query(self, args):
        prefix = args.get("prefix") or ""
        store = self._load_json("kv.json", {})
        return [
            {"key": k, "value": v}
            for k, v in sorted(store.items())
            if k.startswith(prefix)
        ]


class FoodOrderServer(MockServer):
    name = "food_order"
    tools = (
        ToolDescriptor(
            "place",
            {
                "ordered_food_items": _arg("list", True),
                "password": _arg("scalar", True),
                "address": _arg("scalar"),
            },
            "Place a food order.",
        ),
        ToolDescriptor("status", {"order_id": _arg("scalar")}, "Check an order."),
    )

    def tool_place(self, args):
        items = args.get("ordered_food_items")
        if not isinstance(items, list):
            raise ToolFault("bad_items", "ordered_food_items must be a list")
        orders = self._load_json("food_orders.json", [])
        order_id = f"order-{len(orders) + 1}"
        orders.append({
            "order_id": order_id,
            "items": items,
            "password": args.get("password"),
            "address": args.get("address"),
        })
        self._store_json("food_orders.json", orders)
        return {"order_id": order_id, "status": "placed"}

    def tool_status(self, args):
        orders = self._load_json("food_orders.json", [])
        if not orders:
            raise ToolFault("not_found", "no orders placed")
        order_id = args.get("order_id")
        order = orders[-1]
        if order_id is not None:
            matches = [o for o in orders if o["order_id"] == order_id]
            if not matches:
                raise ToolFault("not_found", f"no order {order_id!r}")
            order = matches[0]
        # Echoes the ordered items; the password is never returned.
        return {
            "order_id": order["order_id"],
            "status": "preparing",
            "items": order["items"],
        }


class PublicWikiServer(MockServer):
    name = "public_wiki"
    tools = (
        ToolDescriptor("search", {"query": _arg("scalar", True)}, "Public search."),
    )

    def tool_search(self, args):
        query = args.get("query")
        if not isinstance(query, str):
            raise ToolFault("bad_query", "query must be a string")
        return (
            f"[public] {query}: reference summary drawn from openly published "
            f"sources; {len(query)} characters matched."
        )


class SinkServer(MockServer):
    """Generic recording sink used by the generated-program corpora."""

    name = "sink"
    tools = (
        ToolDescriptor(
            "put",
            {"a": _arg("scalar"), "b": _arg("scalar"), "c": _arg("scalar")},
            "Record up to three values.",
        ),
        ToolDescriptor("echo", {"x": _arg("scalar", True)}, "Return x unchanged."),
    )

    def tool_put(self, args):
        self._append_jsonl("sink_calls.jsonl", {"args": args})
        return {"ok": True}

    def tool_echo(self, args):
        self._append_jsonl("sink_calls.jsonl", {"echo": args})
        return args.get("x")


SERVER_TYPES: dict[str, type[MockServer]] = {
    cls.name: cls
    for cls in (
        FilesystemServer,
        EmailServer,
        RemoteKvServer,
        FoodOrderServer,
        PublicWikiServer,
        SinkServer,
    )
}


def make_server(name: str, sandbox: str | Path) -> MockServer:
    if name not in SERVER_TYPES:
        raise ValueError(f"no mock server named {name!r}")
    return SERVER_TYPES[name](sandbox)
