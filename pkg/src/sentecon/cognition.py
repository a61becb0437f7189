"""Per-agent cognitive state: an embedding-indexed memory bank, an economic
sentiment index maintained as an exponential moving average, and the
confidence-gated adjustment that couples sentiment to work/consumption
propensities.

The default text encoder is deterministic signed feature hashing so that
runs replay bit-exactly without model downloads; any callable with the same
``text -> unit-or-zero vector`` contract can be plugged in instead.
"""

from __future__ import annotations

import hashlib
import logging
import math
import re
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

log = logging.getLogger(__name__)

EMBED_DIM = 256
_HASH_SALT = b"sentecon-embed-v1"
_TOKEN_RE = re.compile(r"[0-9a-z]+")

PERSONA_TRAITS_BUDGET = 512


def embed(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Signed feature-hash embedding of ``text``.

    Lowercases, splits on non-alphanumerics, hashes each token into one of
    ``dim`` buckets with a +/-1 sign from a second hash byte, then
    L2-normalizes. Identical text gives a bit-identical vector on any
    platform; an empty token set gives the zero vector.
    """
    vec = np.zeros(dim, dtype=np.float64)
    tokens = _TOKEN_RE.findall(text.lower())
    if not tokens:
        return vec
    for token in tokens:
        digest = hashlib.blake2b(token.encode("utf-8"), key=_HASH_SALT,
                                 digest_size=9).digest()
        bucket = int.from_bytes(digest[:8], "big") % dim
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:  # all token contributions cancelled
        return vec
    return vec / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; defined as 0 when either vector is all zeros."""
    return float(np.dot(a, b))


@dataclass
class MemoryRecord:
    """One stored event: month, text summary, embedding, sentiment at the time."""

    timestamp: int
    summary: str
    embedding: np.ndarray
    stored_esi: float
    seq: int = 0  # insertion order, breaks ties among equal timestamps


class MemoryBank:
    """Long-term event records plus a short ring of raw recent context.

    Long-term records are append-only up to ``capacity``; the oldest record
    is evicted on overflow. ``short_term`` holds the raw text of the last
    few months, oldest first.
    """

    def __init__(self, capacity: int = 256, short_term_size: int = 3,
                 dim: int = EMBED_DIM):
        if capacity < 1:
            raise ValueError("memory capacity must be >= 1")
        self.capacity = capacity
        self.dim = dim
        self.records: list[MemoryRecord] = []
        self.short_term: deque[str] = deque(maxlen=short_term_size)
        self._matrix: np.ndarray | None = None  # rebuilt lazily after writes
        self._next_seq = 0

    def __len__(self) -> int:
        return len(self.records)

    def store_event(self, timestamp: int, summary: str, esi: float) -> None:
        """Append an event; evict the oldest record past capacity."""
        if self.records and timestamp < self.records[-1].timestamp:
            raise ValueError(
                f"timestamp {timestamp} precedes newest stored "
                f"{self.records[-1].timestamp}")
        record = MemoryRecord(timestamp, summary, embed(summary, self.dim),
                              esi, seq=self._next_seq)
        self._next_seq += 1
        self.records.append(record)
        if len(self.records) > self.capacity:
            self.records.pop(0)
        self._matrix = None
        self.short_term.append(summary)

    def retrieve(self, query: str, k: int) -> list[MemoryRecord]:
        """Top-k records by cosine similarity to the query.

        Ties break newest-first (timestamp, then insertion order). A query
        that embeds to the zero vector scores everything 0, so the tie rule
        returns the k most recent records.
        """
        if k <= 0 or not self.records:
            return []
        if self._matrix is None:
            self._matrix = np.array([r.embedding for r in self.records])
        scores = self._matrix @ embed(query, self.dim)
        order = sorted(
            range(len(self.records)),
            key=lambda i: (-scores[i], -self.records[i].timestamp,
                           -self.records[i].seq),
        )
        return [self.records[i] for i in order[:k]]

    def to_jsonl_rows(self) -> list[dict]:
        """Records as plain dicts for line-delimited serialization."""
        return [
            {"t": r.timestamp, "summary": r.summary, "esi": r.stored_esi}
            for r in self.records
        ]


@dataclass(frozen=True)
class Persona:
    """Stable identity plus a free-text trait summary that evolves."""

    name: str
    age: int
    occupation: str
    traits: str = ""

    def __post_init__(self):
        if not self.name or not self.occupation:
            raise ValueError("persona name and occupation must be non-empty")
        if not 18 <= self.age <= 60:
            raise ValueError(f"persona age out of [18, 60]: {self.age}")


@dataclass
class SentimentState:
    """Sentiment index plus the gains governing its effect on decisions.

    ``esi`` lives in [-1, 1] and is updated as an exponential moving average
    of backend-reported sentiment with decay ``decay_lambda``. When a
    decision arrives with confidence below ``confidence_threshold``, the
    index shifts the work/consumption propensities: pessimism raises the
    willingness to work and cuts consumption, optimism the reverse.
    """

    esi: float = 0.0
    decay_lambda: float = 0.9
    work_gain: float = 0.5
    consume_gain: float = 1.3
    confidence_threshold: float = 0.5
    adjust_mode: str = "logit"

    def validate(self) -> None:
        if not -1.0 <= self.esi <= 1.0:
            raise ValueError(f"esi out of [-1,1]: {self.esi}")
        if not 0.8 <= self.decay_lambda <= 0.95:
            raise ValueError(
                f"decay_lambda must lie in [0.8, 0.95], got {self.decay_lambda}")
        if self.work_gain < 0 or self.consume_gain < 0:
            raise ValueError("sentiment gains must be >= 0")
        if self.adjust_mode not in ("logit", "literal"):
            raise ValueError(f"unknown adjust_mode: {self.adjust_mode!r}")


def update_esi(state: SentimentState, esi_llm: float) -> float:
    """Blend the latest reported sentiment into the index and return it."""
    if not math.isfinite(esi_llm):
        raise ValueError("reported sentiment must be finite")
    clamped = min(1.0, max(-1.0, esi_llm))
    if clamped != esi_llm:
        log.warning("reported sentiment %s clamped to %s", esi_llm, clamped)
    lam = state.decay_lambda
    state.esi = min(1.0, max(-1.0, lam * state.esi + (1.0 - lam) * clamped))
    return state.esi


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


_P_EPS = 1e-6


def adjust_decision(p_work: float, p_consume: float, state: SentimentState,
                    confidence: float) -> tuple[float, float]:
    """Sentiment-shift the two propensities when confidence is low.

    With confidence at or above the threshold the inputs pass through
    untouched. Otherwise the work propensity moves against the sentiment
    index and the consumption propensity with it. The default "logit" mode
    applies the shift in log-odds space so zero sentiment is a no-op; the
    "literal" mode applies the sigmoid to the shifted probability itself,
    which re-centers even at zero sentiment but preserves the same
    directional behavior.
    """
    if confidence >= state.confidence_threshold:
        return p_work, p_consume
    esi = state.esi
    if state.adjust_mode == "literal":
        return (_sigmoid(p_work - state.work_gain * esi),
                _sigmoid(p_consume + state.consume_gain * esi))
    pw = min(1.0 - _P_EPS, max(_P_EPS, p_work))
    pc = min(1.0 - _P_EPS, max(_P_EPS, p_consume))
    return (_sigmoid(_logit(pw) - state.work_gain * esi),
            _sigmoid(_logit(pc) + state.consume_gain * esi))


def update_persona(persona: Persona, new_observations: str,
                   backend=None) -> Persona:
    """Fold new observations into the persona's trait summary.

    If the backend offers ``summarize_persona`` it is asked for a rewritten
    summary; on failure (or with no backend) the newest observation is
    appended and the text truncated from the front to a fixed budget.
    Name, age and occupation never change.
    """
    if backend is not None and hasattr(backend, "summarize_persona"):
        try:
            traits = backend.summarize_persona(persona, new_observations)
            return replace(persona, traits=traits[:PERSONA_TRAITS_BUDGET])
        except Exception:
            log.warning("persona summarization failed; keeping previous traits",
                        exc_info=True)
            return persona
    if not new_observations:
        return persona
    combined = f"{persona.traits}; {new_observations}" if persona.traits \
        else new_observations
    return replace(persona, traits=combined[-PERSONA_TRAITS_BUDGET:])
