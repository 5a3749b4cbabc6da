"""Minimal reference implementation of the external-scorer line protocol.

Used to exercise the sidecar client without any model dependencies, plus
failure-injection modes for transport/protocol error paths.

Protocol: handshake `{"ready": true, "feature_dim": N, "name": "..."}` on
stdout, then one JSON reply per non-blank request line.  Malformed lines
get `{"id": <id-or-null>, "error": "..."}` and the loop continues.
"""

import argparse
import json
import sys
import time
import zlib


def unit_value(text: str, salt: str = "") -> float:
    return (zlib.crc32((salt + text).encode("utf-8")) & 0xFFFFFFFF) / 0xFFFFFFFF


def feature_vector(text: str, dim: int) -> list[float]:
    return [unit_value(text, salt=str(i)) * 2.0 - 1.0 for i in range(dim)]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--feature-dim", type=int, default=64)
    parser.add_argument("--name", default="mock-sidecar")
    parser.add_argument("--broken-handshake", action="store_true")
    parser.add_argument("--wrong-id", action="store_true")
    parser.add_argument("--garbage-reply", action="store_true")
    parser.add_argument("--hang", action="store_true")
    parser.add_argument("--die-after-handshake", action="store_true")
    args = parser.parse_args()

    out = sys.stdout
    if args.broken_handshake:
        out.write("hello i am not json\n")
        out.flush()
    else:
        out.write(
            json.dumps({"ready": True, "feature_dim": args.feature_dim, "name": args.name})
        )
        out.write("\n")
        out.flush()
    if args.die_after_handshake:
        return 0

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if args.hang:
            time.sleep(3600)
        if args.garbage_reply:
            out.write("}{ definitely not json\n")
            out.flush()
            continue
        request_id = None
        try:
            request = json.loads(line)
            request_id = request.get("id") if isinstance(request, dict) else None
            if not isinstance(request, dict):
                raise ValueError("request is not an object")
            mode = request["mode"]
            texts = request["texts"]
            if mode not in ("score", "feature"):
                raise ValueError(f"unknown mode {mode!r}")
            if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                raise ValueError("texts must be a list of strings")
        except Exception as exc:  # noqa: BLE001 - protocol: report and continue
            out.write(json.dumps({"id": request_id, "error": str(exc)}))
            out.write("\n")
            out.flush()
            continue

        reply_id = request_id + "-oops" if args.wrong_id else request_id
        if mode == "score":
            reply = {"id": reply_id, "scores": [unit_value(t) for t in texts]}
        else:
            reply = {
                "id": reply_id,
                "features": [feature_vector(t, args.feature_dim) for t in texts],
            }
        out.write(json.dumps(reply))
        out.write("\n")
        out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
