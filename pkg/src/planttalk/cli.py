"""planttalk command line: `serve` runs the server, the rest are thin
HTTP clients for a running instance."""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from .config import load_config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="planttalk")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the server")
    serve.add_argument("--config", help="path to a TOML config file")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--data-dir", help="override data_dir")
    serve.add_argument("--llm-provider", choices=["mock", "remote"], help="override llm.kind")

    register = sub.add_parser("register", help="create a user, print its token")
    register.add_argument("--name", required=True)
    _client_args(register)

    plants = sub.add_parser("plants", help="list plants or create one")
    plants.add_argument("action", choices=["list", "create"])
    plants.add_argument("--species")
    plants.add_argument("--nickname")
    _client_args(plants)

    channel = sub.add_parser("channel", help="provision a write key for a plant")
    channel.add_argument("--plant", required=True)
    _client_args(channel)

    chat = sub.add_parser("chat", help="send one chat message to a plant")
    chat.add_argument("--plant", required=True)
    chat.add_argument("message")
    _client_args(chat)

    args = parser.parse_args(argv)
    if args.command == "serve":
        return _serve(args)
    return _client(args)


def _client_args(parser) -> None:
    parser.add_argument("--server", default="http://127.0.0.1:8000")
    parser.add_argument("--token", default=os.environ.get("PLANTTALK_TOKEN", ""))


def _serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = load_config(args.config)
    if args.data_dir:
        config.data_dir = args.data_dir
    if args.llm_provider:
        config.llm.kind = args.llm_provider
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _client(args) -> int:
    headers = {"Authorization": f"Bearer {args.token}"} if args.token else {}
    base = args.server.rstrip("/")
    with httpx.Client(base_url=base, headers=headers, timeout=30.0) as client:
        if args.command == "register":
            resp = client.post("/api/register", json={"login_name": args.name})
        elif args.command == "plants" and args.action == "list":
            resp = client.get("/api/plants")
        elif args.command == "plants":
            if not args.species or not args.nickname:
                print("plants create requires --species and --nickname", file=sys.stderr)
                return 2
            resp = client.post(
                "/api/plants", json={"species_id": args.species, "nickname": args.nickname}
            )
        elif args.command == "channel":
            resp = client.post(f"/api/plants/{args.plant}/channel")
        else:
            resp = client.post(f"/api/plants/{args.plant}/chat", json={"message": args.message})
    print(json.dumps(resp.json(), indent=2))
    return 0 if resp.status_code < 400 else 1


if __name__ == "__main__":
    sys.exit(main())
