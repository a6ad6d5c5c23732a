"""Run a mock tool server over stdio or TCP.

    python -m gaap.broker.serve --server email --sandbox DIR
    python -m gaap.broker.serve --server email --sandbox DIR --tcp-port 7801
"""

from __future__ import annotations

import argparse
import socketserver
import sys

from .mocks import SERVER_TYPES, make_server


def serve_stdio(server) -> None:
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(server.handle_line(line))
        sys.stdout.flush()


def serve_tcp(server, host: str, port: int) -> None:
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            for raw in self.rfile:
                line = raw.decode("utf-8")
                if not line.strip():
                    continue
                self.wfile.write(server.handle_line(line).encode("utf-8"))
                self.wfile.flush()

    with socketserver.ThreadingTCPServer((host, port), Handler) as tcp:
        tcp.allow_reuse_address = True
        sys.stderr.write(f"listening on {host}:{tcp.server_address[1]}\n")
        sys.stderr.flush()
        tcp.serve_forever()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gaap-mock-server")
    parser.add_argument("--server", required=True, choices=sorted(SERVER_TYPES))
    parser.add_argument("--sandbox", required=True)
    parser.add_argument("--tcp-port", type=int)
    parser.add_argument("--tcp-host", default="127.0.0.1")
    args = parser.parse_args(argv)

    server = make_server(args.server, args.sandbox)
    if args.tcp_port is not None:
        serve_tcp(server, args.tcp_host, args.tcp_port)
    else:
        serve_stdio(server)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
