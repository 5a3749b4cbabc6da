"""Score chunks through an external sidecar process.

Any executable that speaks the line protocol can serve as the detector:
handshake `{"ready": true, "feature_dim": N, "name": ...}`, then one JSON
reply per request line.  This demo launches the bundled Node sidecar when
it is built (sidecar/dist/main.js), falling back to the in-repo Python
mock, and runs the same requests against it either way.
"""

import shutil
import sys
from pathlib import Path

from mgtloc import ChunkRequest, SidecarScorer

ROOT = Path(__file__).parent.parent
NODE_SIDECAR = ROOT / "sidecar" / "dist" / "main.js"
MOCK_SIDECAR = ROOT / "tests" / "mock_sidecar.py"

if NODE_SIDECAR.exists() and shutil.which("node"):
    command = ["node", str(NODE_SIDECAR), "--backbone", "hash", "--feature-dim", "1024"]
else:
    command = [sys.executable, str(MOCK_SIDECAR), "--feature-dim", "1024"]
print(f"launching: {' '.join(command)}")

texts = (
    "The committee approved the budget without any dissent.",
    "Kwyzx vexaw zulyk qofyz wyxek jazad kezex vyzir.",
)

with SidecarScorer(command, timeout=60) as scorer:
    print(f"handshake: name={scorer.name!r} feature_dim={scorer.feature_dim}")

    result = scorer.score_chunks(
        ChunkRequest(request_id=scorer.next_request_id(), texts=texts, mode="score")
    )
    for text, score in zip(texts, result.scores):
        print(f"  score {score:.4f}  {text[:52]}")

    result = scorer.score_chunks(
        ChunkRequest(request_id=scorer.next_request_id(), texts=texts, mode="feature")
    )
    for text, row in zip(texts, result.features):
        head = ", ".join(f"{v:+.3f}" for v in row[:4])
        print(f"  feature[{len(row)}] ({head}, ...)  {text[:40]}")

    again = scorer.score_chunks(
        ChunkRequest(request_id=scorer.next_request_id(), texts=texts, mode="feature")
    )
    print(f"deterministic across calls: {again.features == result.features}")

print("\nthe same process can be used from the command line:")
print('  mgtloc localize --in corpus.jsonl --strategy single \\')
print(f'      --scorer "extern:{" ".join(command)}" --out preds.jsonl')
