"""Chunk scoring: a uniform abstraction over anything that can rate or
embed a window of sentences.

A chunk is the space-joined text of ``m`` consecutive sentences, truncated
to ``MAX_CHUNK_TOKENS`` whitespace tokens.  Scorers consume a
:class:`ChunkRequest` and return probabilities (``mode="score"``) or
fixed-width feature vectors (``mode="feature"``).  Built-in scorers keep
the whole pipeline testable offline; the sidecar client speaks a
line-delimited JSON protocol to external detector processes.
"""

from __future__ import annotations

import json
import logging
import math
import os
import selectors
import shlex
import socket
import subprocess
import threading
import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .segmenter import DEFAULT_CONFIG, segment
from .types import FEATURE_DIM, MAX_CHUNK_TOKENS, Article, count_tokens

logger = logging.getLogger(__name__)


class ScorerError(Exception):
    """Base class for scorer failures."""


class ScorerTransportError(ScorerError):
    """The external scorer is unreachable, timed out, or died."""


class ScorerProtocolError(ScorerError):
    """The external scorer replied with something other than the protocol."""


@dataclass(frozen=True, slots=True)
class WindowRef:
    """Provenance of a chunk: which sentences of which article it covers."""

    article_id: str
    start: int
    end: int  # inclusive


@dataclass(frozen=True, slots=True)
class ChunkRequest:
    request_id: str
    texts: tuple[str, ...]
    mode: str  # "score" | "feature"
    # Local provenance for oracle/precomputed scorers; never sent on the wire.
    window_refs: tuple[WindowRef, ...] | None = None


@dataclass(frozen=True, slots=True)
class ChunkResult:
    request_id: str
    scores: tuple[float, ...] | None = None
    features: tuple[tuple[float, ...], ...] | None = None


def truncate_to_max_tokens(text: str, max_tokens: int = MAX_CHUNK_TOKENS) -> str:
    """Keep the first ``max_tokens`` whitespace tokens, preserving spacing."""
    tokens = text.split()
    if len(tokens) <= max_tokens:
        return text
    end = 0
    seen = 0
    in_token = False
    for i, ch in enumerate(text):
        if ch.isspace():
            in_token = False
        elif not in_token:
            in_token = True
            seen += 1
            if seen > max_tokens:
                end = i
                break
    logger.debug("truncated chunk from %d to %d tokens", len(tokens), max_tokens)
    return text[:end].rstrip()


def chunk_text(article: Article, start: int, end: int) -> str:
    """Space-joined, length-capped text of sentences ``start..end`` inclusive."""
    joined = " ".join(s.text for s in article.sentences[start : end + 1])
    return truncate_to_max_tokens(joined)


def score_chunks(scorer, request: ChunkRequest) -> ChunkResult:
    """Dispatch a request to a scorer and sanity-check the reply shape."""
    result = scorer.score_chunks(request)
    if request.mode == "score":
        if result.scores is None or len(result.scores) != len(request.texts):
            raise ScorerProtocolError(
                f"request {request.request_id}: expected {len(request.texts)} scores"
            )
        for s in result.scores:
            if not (0.0 <= s <= 1.0):
                raise ScorerProtocolError(
                    f"request {request.request_id}: score {s} outside [0,1]"
                )
    else:
        if result.features is None or len(result.features) != len(request.texts):
            raise ScorerProtocolError(
                f"request {request.request_id}: expected {len(request.texts)} feature rows"
            )
    return result


class _RequestCounter:
    def __init__(self) -> None:
        self._n = 0

    def next(self) -> str:
        self._n += 1
        return f"req-{self._n:06d}"


# ---------------------------------------------------------------------------
# Built-in scorers
# ---------------------------------------------------------------------------


class ConstantScorer:
    """Scores every chunk with the same value (the "All 0/1" bias baseline)."""

    def __init__(self, value: float = 0.5):
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"constant score {value} outside [0,1]")
        self.value = value

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.mode != "score":
            raise ValueError("constant scorer produces scores only")
        return ChunkResult(request.request_id, scores=tuple(self.value for _ in request.texts))


class RandomScorer:
    """Deterministic pseudo-random scores keyed on (seed, text).

    A pure function of the text, so repeated and batched calls agree.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _score(self, text: str) -> float:
        h = zlib.crc32(f"{self.seed}\x1f{text}".encode("utf-8"))
        return (h & 0xFFFFFFFF) / 0xFFFFFFFF

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.mode != "score":
            raise ValueError("random scorer produces scores only")
        return ChunkResult(request.request_id, scores=tuple(self._score(t) for t in request.texts))


class OracleScorer:
    """Scores a chunk with its ground-truth fraction of machine tokens.

    Requires window provenance and labeled articles; used for end-to-end
    pipeline checks where the detector itself must not be the bottleneck.
    """

    def __init__(self, articles: Iterable[Article]):
        self._truth: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {}
        for a in articles:
            if a.labels is None:
                raise ValueError(f"article {a.id}: oracle scorer needs labels")
            self._truth[a.id] = (a.labels, tuple(s.tokens for s in a.sentences))

    def machine_fraction(self, ref: WindowRef) -> float:
        labels, tokens = self._truth[ref.article_id]
        total = sum(tokens[i] for i in range(ref.start, ref.end + 1))
        machine = sum(tokens[i] for i in range(ref.start, ref.end + 1) if labels[i] == 1)
        return machine / total if total else 0.0

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.mode != "score":
            raise ValueError("oracle scorer produces scores only")
        if request.window_refs is None:
            raise ValueError("oracle scorer needs window provenance")
        return ChunkResult(
            request.request_id,
            scores=tuple(self.machine_fraction(r) for r in request.window_refs),
        )


class OracleFeatureScorer:
    """Embeds the ground-truth labels of a window into the feature vector.

    Position ``j`` of the feature holds the label of sentence ``start+j``.
    Paired with a hand-built readout adaptor this makes the adaptor
    inference path exactly verifiable.
    """

    def __init__(self, articles: Iterable[Article], dim: int = FEATURE_DIM):
        self.dim = dim
        self._labels: dict[str, tuple[int, ...]] = {}
        for a in articles:
            if a.labels is None:
                raise ValueError(f"article {a.id}: oracle scorer needs labels")
            self._labels[a.id] = a.labels

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.mode != "feature":
            raise ValueError("oracle feature scorer produces features only")
        if request.window_refs is None:
            raise ValueError("oracle feature scorer needs window provenance")
        rows = []
        for ref in request.window_refs:
            labels = self._labels[ref.article_id]
            vec = [0.0] * self.dim
            for j in range(ref.end - ref.start + 1):
                vec[j] = float(labels[ref.start + j])
            rows.append(tuple(vec))
        return ChunkResult(request.request_id, features=tuple(rows))


class HashFeatureScorer:
    """Deterministic chunk features from blocked character n-gram hashing.

    The vector is split into one global block plus one block per sentence
    position (up to ``position_cap``).  Every block uses the same
    gram-to-slot map, so a per-position readout sees consistent slot
    semantics and signal learned for one position transfers to the others.
    Block values are signed gram frequencies.  This is a self-contained
    stand-in for a transformer backbone, not a detector claim in itself.
    """

    STAT_DIMS = 0  # leading dims of each block reserved for detector stats

    def __init__(
        self,
        dim: int = FEATURE_DIM,
        order: int = 4,
        scale: float = 4.0,
        position_cap: int = 5,
    ):
        if dim < (4 + self.STAT_DIMS) * (position_cap + 1):
            raise ValueError(f"feature dim {dim} too small for {position_cap} position blocks")
        self.dim = dim
        self.order = order
        self.scale = scale
        self.position_cap = position_cap
        self.block = dim // (position_cap + 1)
        self._hash_width = self.block - self.STAT_DIMS
        self._slot_cache: dict[str, tuple[int, float]] = {}

    def _slot(self, gram: str) -> tuple[int, float]:
        hit = self._slot_cache.get(gram)
        if hit is None:
            h = zlib.crc32(gram.encode("utf-8"))
            hit = (self.STAT_DIMS + h % self._hash_width, 1.0 if h & 0x80000000 else -1.0)
            self._slot_cache[gram] = hit
        return hit

    def _grams(self, text: str) -> list[str]:
        padded = f" {text} "
        if len(padded) < self.order:
            return [padded]
        return [padded[i : i + self.order] for i in range(len(padded) - self.order + 1)]

    def _accumulate(self, vec: np.ndarray, offset: int, grams: list[str]) -> None:
        for g in grams:
            idx, sign = self._slot(g)
            vec[offset + idx] += sign

    def _normalize(self, vec: np.ndarray, offset: int) -> None:
        lo = offset + self.STAT_DIMS
        hi = offset + self.block
        norm = float(np.linalg.norm(vec[lo:hi]))
        if norm > 0:
            vec[lo:hi] *= self.scale / norm

    def _stats(self, vec: np.ndarray, offset: int, text: str) -> None:
        """Hook for subclasses that embed detector statistics per block."""

    def _feature(self, text: str) -> tuple[float, ...]:
        vec = np.zeros(self.dim)
        sentences = segment(text, DEFAULT_CONFIG)
        all_grams: list[str] = []
        for j, sent in enumerate(sentences[: self.position_cap]):
            grams = self._grams(sent.text)
            all_grams.extend(grams)
            offset = self.block * (j + 1)
            self._accumulate(vec, offset, grams)
            self._normalize(vec, offset)
            self._stats(vec, offset, sent.text)
        for sent in sentences[self.position_cap :]:
            all_grams.extend(self._grams(sent.text))
        self._accumulate(vec, 0, all_grams)
        self._normalize(vec, 0)
        self._stats(vec, 0, text)
        return tuple(vec.tolist())

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.mode != "feature":
            raise ValueError("hash feature scorer produces features only")
        return ChunkResult(
            request.request_id, features=tuple(self._feature(t) for t in request.texts)
        )


class NgramFeatureScorer(HashFeatureScorer):
    """Chunk features from a trained n-gram backbone plus hashed texture.

    The leading dims of every position/global block carry the backbone's
    statistics for that span (log-likelihood-ratio and length); the rest of
    the block holds the hashed n-gram profile.  This mirrors a frozen
    pretrained detector exposing chunk features to the adaptor.
    """

    STAT_DIMS = 4

    def __init__(self, backbone: NgramScorerModel, dim: int = FEATURE_DIM, **kwargs):
        super().__init__(dim=dim, **kwargs)
        self.backbone = backbone

    def _stats(self, vec: np.ndarray, offset: int, text: str) -> None:
        llr = self.backbone.llr(text)
        vec[offset + 0] = self.scale * llr
        vec[offset + 1] = self.scale * math.tanh(4.0 * llr)
        vec[offset + 2] = count_tokens(text) / 10.0
        vec[offset + 3] = self.scale * (self.backbone.score_text(text) - 0.5)


# ---------------------------------------------------------------------------
# Character n-gram scorer
# ---------------------------------------------------------------------------


@dataclass
class NgramScorerModel:
    """Add-one-smoothed character n-gram class model with logistic calibration.

    The raw statistic is the per-gram mean log-likelihood ratio between the
    machine and human tables; ``sigmoid(a * stat + b)`` with ``a > 0`` maps
    it to a probability.  Immutable after training.
    """

    order: int
    log_freq_machine: dict[str, float]
    log_freq_human: dict[str, float]
    unseen_machine: float
    unseen_human: float
    calib_a: float
    calib_b: float

    def grams(self, text: str) -> list[str]:
        if len(text) < self.order:
            return [text] if text else []
        return [text[i : i + self.order] for i in range(len(text) - self.order + 1)]

    def llr(self, text: str) -> float:
        grams = self.grams(text)
        if not grams:
            return 0.0
        total = 0.0
        for g in grams:
            total += self.log_freq_machine.get(g, self.unseen_machine)
            total -= self.log_freq_human.get(g, self.unseen_human)
        return total / len(grams)

    def score_text(self, text: str) -> float:
        return _sigmoid(self.calib_a * self.llr(text) + self.calib_b)

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.mode != "score":
            raise ValueError("n-gram scorer produces scores only")
        return ChunkResult(
            request.request_id, scores=tuple(self.score_text(t) for t in request.texts)
        )

    def to_dict(self) -> dict:
        return {
            "kind": "ngram-scorer",
            "version": 1,
            "order": self.order,
            "log_freq_machine": self.log_freq_machine,
            "log_freq_human": self.log_freq_human,
            "unseen_machine": self.unseen_machine,
            "unseen_human": self.unseen_human,
            "calib_a": self.calib_a,
            "calib_b": self.calib_b,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NgramScorerModel":
        if d.get("kind") != "ngram-scorer" or d.get("version") != 1:
            raise ValueError("not a version-1 n-gram scorer file")
        return cls(
            order=d["order"],
            log_freq_machine=d["log_freq_machine"],
            log_freq_human=d["log_freq_human"],
            unseen_machine=d["unseen_machine"],
            unseen_human=d["unseen_human"],
            calib_a=d["calib_a"],
            calib_b=d["calib_b"],
        )


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-min(x, 500.0)))
    return math.exp(max(x, -500.0)) / (1.0 + math.exp(max(x, -500.0)))


def train_ngram_scorer(
    labeled_texts: Sequence[tuple[str, int]], order: int = 4
) -> NgramScorerModel:
    """Fit n-gram tables on labeled text (1 = machine) and calibrate.

    Raises ``ValueError`` unless both classes are present.
    """
    machine = [t for t, y in labeled_texts if y == 1]
    human = [t for t, y in labeled_texts if y == 0]
    if not machine or not human:
        raise ValueError("n-gram training needs text from both classes")

    def counts(texts: list[str]) -> dict[str, int]:
        table: dict[str, int] = {}
        for t in texts:
            if len(t) < order:
                grams = [t] if t else []
            else:
                grams = [t[i : i + order] for i in range(len(t) - order + 1)]
            for g in grams:
                table[g] = table.get(g, 0) + 1
        return table

    counts_m = counts(machine)
    counts_h = counts(human)
    vocab = len(set(counts_m) | set(counts_h))
    total_m = sum(counts_m.values())
    total_h = sum(counts_h.values())

    log_m = {g: math.log((c + 1) / (total_m + vocab)) for g, c in counts_m.items()}
    log_h = {g: math.log((c + 1) / (total_h + vocab)) for g, c in counts_h.items()}

    model = NgramScorerModel(
        order=order,
        log_freq_machine=log_m,
        log_freq_human=log_h,
        unseen_machine=math.log(1 / (total_m + vocab)),
        unseen_human=math.log(1 / (total_h + vocab)),
        calib_a=1.0,
        calib_b=0.0,
    )
    stats = np.array([model.llr(t) for t, _ in labeled_texts])
    ys = np.array([float(y) for _, y in labeled_texts])
    a, b = _fit_logistic(stats, ys)
    model.calib_a = max(a, 1e-6)
    model.calib_b = b
    return model


def _fit_logistic(x: np.ndarray, y: np.ndarray, iters: int = 50) -> tuple[float, float]:
    """Two-parameter logistic fit by damped Newton steps."""
    a, b = 1.0, 0.0
    n = len(x)
    for _ in range(iters):
        z = np.clip(a * x + b, -500, 500)
        p = 1.0 / (1.0 + np.exp(-z))
        grad = np.array([np.dot(p - y, x) / n, np.mean(p - y)])
        w = p * (1.0 - p)
        hess = (
            np.array(
                [
                    [np.dot(w, x * x), np.dot(w, x)],
                    [np.dot(w, x), np.sum(w)],
                ]
            )
            / n
        )
        hess += np.eye(2) * 1e-9
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad
        step = np.clip(step, -50.0, 50.0)
        a -= float(step[0])
        b -= float(step[1])
        if float(np.max(np.abs(step))) < 1e-10:
            break
    return a, b


def save_ngram_scorer(model: NgramScorerModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(model.to_dict(), fp)


def load_ngram_scorer(path) -> NgramScorerModel:
    with open(path, encoding="utf-8") as fp:
        return NgramScorerModel.from_dict(json.load(fp))


# ---------------------------------------------------------------------------
# Precomputed scores (file interposition between pipeline stages)
# ---------------------------------------------------------------------------


class PrecomputedScorer:
    """Replays chunk scores/features previously written by the ``score`` stage."""

    def __init__(self, records: Iterable[dict]):
        self._scores: dict[tuple[str, int, int], float] = {}
        self._features: dict[tuple[str, int, int], tuple[float, ...]] = {}
        for rec in records:
            key = (rec["article_id"], rec["start"], rec["end"])
            if "score" in rec:
                self._scores[key] = float(rec["score"])
            if "feature" in rec:
                self._features[key] = tuple(float(v) for v in rec["feature"])

    @classmethod
    def from_file(cls, path) -> "PrecomputedScorer":
        with open(path, encoding="utf-8") as fp:
            return cls(json.loads(line) for line in fp if line.strip())

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        if request.window_refs is None:
            raise ValueError("precomputed scorer needs window provenance")
        table = self._scores if request.mode == "score" else self._features
        values = []
        for ref in request.window_refs:
            key = (ref.article_id, ref.start, ref.end)
            if key not in table:
                raise ValueError(
                    f"no precomputed {request.mode} for article {ref.article_id} "
                    f"window [{ref.start},{ref.end}]"
                )
            values.append(table[key])
        if request.mode == "score":
            return ChunkResult(request.request_id, scores=tuple(values))
        return ChunkResult(request.request_id, features=tuple(values))


# ---------------------------------------------------------------------------
# Sidecar client
# ---------------------------------------------------------------------------


class _SubprocessTransport:
    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )
        self._buffer = bytearray()
        self._selector = selectors.DefaultSelector()
        self._selector.register(self.proc.stdout, selectors.EVENT_READ)

    def send_line(self, line: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(line.encode("utf-8") + b"\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ScorerTransportError(f"sidecar stdin closed: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        import time

        deadline = time.monotonic() + timeout
        while True:
            nl = self._buffer.find(b"\n")
            if nl >= 0:
                line = self._buffer[:nl].decode("utf-8")
                del self._buffer[: nl + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ScorerTransportError(f"sidecar timed out after {timeout}s")
            if not self._selector.select(remaining):
                continue
            chunk = os.read(self.proc.stdout.fileno(), 65536)
            if not chunk:
                raise ScorerTransportError("sidecar closed its output stream")
            self._buffer.extend(chunk)

    def close(self) -> None:
        self._selector.close()
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
        for stream in (self.proc.stdin, self.proc.stdout):
            if stream is not None:
                stream.close()


class _TcpTransport:
    def __init__(self, host: str, port: int, connect_timeout: float):
        try:
            self.sock = socket.create_connection((host, port), timeout=connect_timeout)
        except OSError as exc:
            raise ScorerTransportError(f"cannot connect to {host}:{port}: {exc}") from exc
        self._buffer = bytearray()

    def send_line(self, line: str) -> None:
        try:
            self.sock.sendall(line.encode("utf-8") + b"\n")
        except OSError as exc:
            raise ScorerTransportError(f"sidecar connection lost: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        import time

        deadline = time.monotonic() + timeout
        while True:
            nl = self._buffer.find(b"\n")
            if nl >= 0:
                line = self._buffer[:nl].decode("utf-8")
                del self._buffer[: nl + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ScorerTransportError(f"sidecar timed out after {timeout}s")
            self.sock.settimeout(remaining)
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                continue
            except OSError as exc:
                raise ScorerTransportError(f"sidecar connection lost: {exc}") from exc
            if not chunk:
                raise ScorerTransportError("sidecar closed the connection")
            self._buffer.extend(chunk)

    def close(self) -> None:
        self.sock.close()


class SidecarScorer:
    """Client for external scorers speaking the line protocol.

    Request: ``{"id", "mode", "texts"}``.  Response: ``{"id", "scores"}`` or
    ``{"id", "features"}``; an ``{"id", "error"}`` object reports a
    per-request failure.  On startup the sidecar must emit a handshake
    ``{"ready": true, "feature_dim": N, "name": "..."}``.
    """

    def __init__(
        self,
        command: str | list[str] | None = None,
        *,
        host: str | None = None,
        port: int | None = None,
        timeout: float = 120.0,
    ):
        self.timeout = timeout
        if command is not None:
            argv = shlex.split(command) if isinstance(command, str) else list(command)
            try:
                self._transport = _SubprocessTransport(argv)
            except OSError as exc:
                raise ScorerTransportError(f"cannot launch sidecar {argv!r}: {exc}") from exc
        elif host is not None and port is not None:
            self._transport = _TcpTransport(host, port, timeout)
        else:
            raise ValueError("sidecar scorer needs a command or a host/port pair")
        self._counter = _RequestCounter()
        self._lock = threading.Lock()  # one in-flight request per connection
        self.handshake = self._read_handshake()
        self.feature_dim = int(self.handshake.get("feature_dim", FEATURE_DIM))
        self.name = str(self.handshake.get("name", "unknown"))

    def _read_handshake(self) -> dict:
        line = self._transport.recv_line(self.timeout)
        try:
            handshake = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScorerProtocolError(f"bad handshake line: {line!r}") from exc
        if not isinstance(handshake, dict) or handshake.get("ready") is not True:
            raise ScorerProtocolError(f"sidecar not ready: {handshake!r}")
        return handshake

    def score_chunks(self, request: ChunkRequest) -> ChunkResult:
        payload = json.dumps(
            {"id": request.request_id, "mode": request.mode, "texts": list(request.texts)},
            ensure_ascii=False,
        )
        with self._lock:
            self._transport.send_line(payload)
            try:
                line = self._transport.recv_line(self.timeout)
            except ScorerTransportError as exc:
                raise ScorerTransportError(f"request {request.request_id}: {exc}") from exc
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScorerProtocolError(
                f"request {request.request_id}: unparseable reply {line[:200]!r}"
            ) from exc
        if not isinstance(reply, dict):
            raise ScorerProtocolError(f"request {request.request_id}: reply is not an object")
        if reply.get("id") != request.request_id:
            raise ScorerProtocolError(
                f"request {request.request_id}: reply echoes id {reply.get('id')!r}"
            )
        if "error" in reply:
            raise ScorerProtocolError(f"request {request.request_id}: {reply['error']}")
        if request.mode == "score":
            scores = reply.get("scores")
            if not isinstance(scores, list) or len(scores) != len(request.texts):
                raise ScorerProtocolError(
                    f"request {request.request_id}: malformed scores in reply"
                )
            return ChunkResult(request.request_id, scores=tuple(float(s) for s in scores))
        features = reply.get("features")
        if not isinstance(features, list) or len(features) != len(request.texts):
            raise ScorerProtocolError(
                f"request {request.request_id}: malformed features in reply"
            )
        rows = tuple(tuple(float(v) for v in row) for row in features)
        for row in rows:
            if len(row) != self.feature_dim:
                raise ScorerProtocolError(
                    f"request {request.request_id}: feature width {len(row)} != "
                    f"handshake feature_dim {self.feature_dim}"
                )
        return ChunkResult(request.request_id, features=rows)

    def next_request_id(self) -> str:
        return self._counter.next()

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "SidecarScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
