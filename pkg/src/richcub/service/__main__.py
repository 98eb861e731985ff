"""Run the HTTP service: ``python -m richcub.service`` or ``richcub-serve``."""

from __future__ import annotations

import argparse


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="richcub-serve", description="Serve the richcub HTTP API.")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8000)
    ns = ap.parse_args(argv)

    import uvicorn

    uvicorn.run("richcub.service.app:app", host=ns.host, port=ns.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
