"""Decision backends: the request/response contract between the simulation
loop and whatever chooses work/consumption propensities each month.

Four scripted families are provided (two classic rule-of-thumb styles, a
composite that mixes them, and a precautionary policy that reacts to
unemployment risk), plus an HTTP client for OpenAI-compatible
chat-completion endpoints. Scripted backends are pure functions of the
request (seeded per agent through a stable identity hash), so simulations
replay bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import requests

from .cognition import Persona

log = logging.getLogger(__name__)

PROMPT_TEMPLATE_VERSION = "prompt-v1"

SCRIPTED_KINDS = ("scripted-len", "scripted-cats", "scripted-composite",
                  "scripted-precautionary")
BACKEND_KINDS = SCRIPTED_KINDS + ("llm-http",)


class BackendUnavailableError(RuntimeError):
    """The backend could not produce a decision (retries exhausted)."""


class ResponseParseError(ValueError):
    """The raw backend output held no usable decision object."""


@dataclass
class DecisionRequest:
    """One agent's monthly observation handed to a backend."""

    income: float
    price: float
    savings: float
    unemployment: float
    interest_rate: float
    esi: float
    persona: Persona
    retrieved_memories: list[str] = field(default_factory=list)
    short_term_context: list[str] = field(default_factory=list)  # oldest first
    scenario_events: list[str] = field(default_factory=list)
    month_index: int = 0


@dataclass
class DecisionResponse:
    """A backend's decision, normalized into bounded fields."""

    p_work: float
    p_consume: float
    esi_llm: float
    confidence: float
    rationale: str | None = None
    satisfaction: float | None = None
    clamped: bool = False

    def to_json(self) -> str:
        payload = {"work": self.p_work, "consume": self.p_consume,
                   "esi": self.esi_llm, "confidence": self.confidence}
        if self.rationale is not None:
            payload["rationale"] = self.rationale
        if self.satisfaction is not None:
            payload["satisfaction"] = self.satisfaction
        return json.dumps(payload)


@dataclass
class BackendConfig:
    kind: str = "scripted-precautionary"
    endpoint_url: str = ""
    model_name: str = ""
    api_key_env: str = "SENTECON_API_KEY"
    request_timeout: float = 30.0
    max_retries: int = 3
    max_parallel_requests: int = 4
    temperature: float = 0.0
    sampling_seed: int = 0
    retry_base_delay: float = 1.0
    dump_traffic: bool = False

    def validate(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind: {self.kind!r} "
                             f"(expected one of {', '.join(BACKEND_KINDS)})")
        if self.kind == "llm-http":
            if not self.endpoint_url or not self.model_name:
                raise ValueError("llm-http backend requires endpoint_url "
                                 "and model_name")
            if self.max_retries < 0 or self.max_parallel_requests < 1:
                raise ValueError("llm-http retry/parallelism settings invalid")


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, x))


_PRICE_RE = re.compile(r"price ([0-9.eE+\-]+)")


def _latest_observed_price(request: DecisionRequest) -> float | None:
    """Price recorded in the most recent short-term context entry, if any."""
    for entry in reversed(request.short_term_context):
        m = _PRICE_RE.search(entry)
        if m:
            try:
                return float(m.group(1).rstrip("."))
            except ValueError:
                continue
    return None


def _monthly_inflation_proxy(request: DecisionRequest) -> float:
    """Latest observed monthly price change, annualized (x12)."""
    prev = _latest_observed_price(request)
    if prev is None or prev <= 0:
        return 0.0
    return (request.price - prev) / prev * 12.0


def _identity_hash(persona: Persona, namespace: str) -> float:
    """Stable uniform-[0,1) value derived from an agent's identity."""
    key = f"{namespace}|{persona.name}|{persona.age}|{persona.occupation}"
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") / 2.0 ** 64


class ScriptedPrecautionary:
    """Households that insure against unemployment risk.

    Work appetite rises with unemployment and with pessimism; spending falls
    with unemployment, pessimism, and dear money. The reported sentiment
    tracks the unemployment gap and the latest observed inflation, and
    confidence is fixed low so the sentiment channel stays engaged.
    """

    kind = "scripted-precautionary"

    REFERENCE_UNEMPLOYMENT = 0.04

    def decide(self, request: DecisionRequest) -> DecisionResponse:
        u = request.unemployment
        esi = request.esi
        r = request.interest_rate
        p_work = _clamp(0.6 + 1.5 * u - 0.5 * esi, 0.05, 0.98)
        p_consume = _clamp(
            0.7 - 1.2 * u + 0.4 * esi - 0.3 * max(0.0, r - 0.02) * 10.0,
            0.05, 0.95)
        pi_proxy = _monthly_inflation_proxy(request)
        esi_llm = _clamp(-(u - self.REFERENCE_UNEMPLOYMENT) * 4.0 - pi_proxy,
                         -1.0, 1.0)
        return DecisionResponse(p_work, p_consume, esi_llm, confidence=0.4)


class ScriptedLEN:
    """Reservation-wage rule with a fixed real consumption basket.

    Each agent draws a personal reservation wage once (from its identity
    hash) and works only when its wage estimate clears it. Spending funds
    90% of a standard monthly basket out of savings.
    """

    kind = "scripted-len"

    BASE_WAGE = 7.25
    BASKET_HOURS = 168.0

    def decide(self, request: DecisionRequest) -> DecisionResponse:
        reservation = self.BASE_WAGE * (
            1.0 + _identity_hash(request.persona, "len-reservation"))
        if request.income > 0:
            wage_estimate = request.income / self.BASKET_HOURS
        else:
            # No wage signal of its own: assume offers track the price level.
            wage_estimate = 2.0 * self.BASE_WAGE * request.price
        p_work = 0.95 if wage_estimate >= reservation else 0.1
        basket_cost = 0.9 * self.BASKET_HOURS * request.price
        if request.savings > 0:
            p_consume = _clamp(basket_cost / request.savings, 0.05, 0.95)
        else:
            p_consume = 0.95
        return DecisionResponse(p_work, p_consume, esi_llm=0.0, confidence=1.0)


class ScriptedCATS:
    """Adaptive consumption: spend more after worked months, retrench after
    unemployment, judging from the recent context window."""

    kind = "scripted-cats"

    def decide(self, request: DecisionRequest) -> DecisionResponse:
        worked = sum(e.count("worked: yes") for e in request.short_term_context)
        idle = sum(e.count("worked: no") for e in request.short_term_context)
        p_consume = _clamp(0.7 * 1.05 ** worked * 0.9 ** idle, 0.05, 0.95)
        p_work = _clamp(0.8 + 0.5 * request.unemployment, 0.05, 0.98)
        return DecisionResponse(p_work, p_consume, esi_llm=0.0, confidence=1.0)


class ScriptedComposite:
    """Each agent follows either the reservation-wage or the adaptive rule,
    drawn once at initialization from its identity hash."""

    kind = "scripted-composite"

    def __init__(self):
        self._len = ScriptedLEN()
        self._cats = ScriptedCATS()

    def decide(self, request: DecisionRequest) -> DecisionResponse:
        rule = self._len if _identity_hash(request.persona,
                                           "composite-rule") < 0.5 else self._cats
        return rule.decide(request)


def build_prompt(request: DecisionRequest) -> str:
    """Deterministic chat prompt: persona, observation, memories, recent
    context, active events, and the required JSON output shape."""
    p = request.persona
    lines = [
        f"[template {PROMPT_TEMPLATE_VERSION}]",
        "## Persona",
        f"name: {p.name}",
        f"age: {p.age}",
        f"occupation: {p.occupation}",
        f"traits: {p.traits or 'none'}",
        "## Economic observation",
        f"month index: {request.month_index}",
        f"your income last month (currency): {request.income:.4f}",
        f"market price of goods (currency per unit): {request.price:.6f}",
        f"your savings (currency): {request.savings:.4f}",
        f"unemployment rate (fraction): {request.unemployment:.4f}",
        f"bank interest rate (fraction per year): {request.interest_rate:.6f}",
        f"your economic sentiment index (-1 to 1): {request.esi:.6f}",
        "## Retrieved memories",
    ]
    if request.retrieved_memories:
        lines.extend(f"- {m}" for m in request.retrieved_memories)
    else:
        lines.append("none")
    lines.append("## Recent months")
    if request.short_term_context:
        lines.extend(f"- {m}" for m in request.short_term_context)
    else:
        lines.append("none")
    lines.append("## Active events")
    if request.scenario_events:
        lines.extend(f"- {e}" for e in request.scenario_events)
    else:
        lines.append("none")
    lines.extend([
        "## Instructions",
        "Decide your willingness to work and the share of savings to spend "
        "this month, report your economic sentiment and your confidence in "
        "this decision.",
        "Respond with a single JSON object and nothing else, with keys: "
        '"work" (0-1), "consume" (0-1), "esi" (-1 to 1), "confidence" (0-1), '
        '"rationale" (short string).',
    ])
    return "\n".join(lines)


def parse_response(raw: str) -> DecisionResponse:
    """Extract the first JSON object from raw model output.

    Tolerates surrounding prose; clamps out-of-range numeric fields and
    flags that clamping happened. Raises ResponseParseError when no object
    with the required keys can be found.
    """
    decoder = json.JSONDecoder()
    obj = None
    for start in range(len(raw)):
        if raw[start] != "{":
            continue
        try:
            obj, _ = decoder.raw_decode(raw, start)
            break
        except json.JSONDecodeError:
            continue
    if not isinstance(obj, dict):
        raise ResponseParseError("no JSON object found in backend response")
    missing = [k for k in ("work", "consume", "esi", "confidence")
               if k not in obj]
    if missing:
        raise ResponseParseError(f"decision object missing keys: {missing}")

    clamped = False

    def bounded(key: str, lo: float, hi: float) -> float:
        nonlocal clamped
        try:
            value = float(obj[key])
        except (TypeError, ValueError) as exc:
            raise ResponseParseError(f"field {key!r} is not a number") from exc
        if not math.isfinite(value):
            raise ResponseParseError(f"field {key!r} is not finite")
        fixed = _clamp(value, lo, hi)
        if fixed != value:
            clamped = True
        return fixed

    rationale = obj.get("rationale")
    satisfaction = obj.get("satisfaction")
    return DecisionResponse(
        p_work=bounded("work", 0.0, 1.0),
        p_consume=bounded("consume", 0.0, 1.0),
        esi_llm=bounded("esi", -1.0, 1.0),
        confidence=bounded("confidence", 0.0, 1.0),
        rationale=str(rationale) if rationale is not None else None,
        satisfaction=float(satisfaction) if satisfaction is not None else None,
        clamped=clamped,
    )


class LLMBackend:
    """Client for OpenAI-compatible chat-completion endpoints.

    Retries transport errors, HTTP 429/5xx, and unparsable responses with
    exponential backoff; the API key is read from the configured environment
    variable and never written anywhere.
    """

    kind = "llm-http"

    RETRYABLE_STATUS = {429, 500, 502, 503, 504}

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        config.validate()
        self.config = config
        self.session = session or requests.Session()
        self.request_count = 0

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise BackendUnavailableError(
                f"API key environment variable {self.config.api_key_env} "
                "is not set")
        return key

    def _post_once(self, prompt: str) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system",
                 "content": "You are a household making monthly economic "
                            "decisions. Answer with JSON only."},
                {"role": "user", "content": prompt},
            ],
            "temperature": self.config.temperature,
            "seed": self.config.sampling_seed,
        }
        self.request_count += 1
        resp = self.session.post(
            self.config.endpoint_url,
            json=payload,
            headers={"Authorization": f"Bearer {self._api_key()}"},
            timeout=self.config.request_timeout,
        )
        if resp.status_code != 200:
            raise _HTTPStatusError(resp.status_code, resp.text[:500])
        body = resp.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ResponseParseError(
                "chat completion body missing choices[0].message.content"
            ) from exc

    def call(self, prompt: str) -> str:
        """Raw completion text for a prompt, with retry/backoff."""
        cfg = self.config
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt > 0:
                delay = cfg.retry_base_delay * 2.0 ** (attempt - 1)
                time.sleep(delay + 0.25 * delay * (time.monotonic() % 1.0))
            try:
                return self._post_once(prompt)
            except _HTTPStatusError as exc:
                last_error = exc
                if exc.status not in self.RETRYABLE_STATUS:
                    raise BackendUnavailableError(
                        f"endpoint returned HTTP {exc.status}") from exc
                log.warning("retryable HTTP %s from endpoint (attempt %d)",
                            exc.status, attempt + 1)
            except (requests.RequestException, ResponseParseError) as exc:
                last_error = exc
                log.warning("backend call failed (attempt %d): %s",
                            attempt + 1, exc)
        raise BackendUnavailableError(
            f"backend retries exhausted after {cfg.max_retries + 1} attempts"
        ) from last_error

    def decide(self, request: DecisionRequest) -> DecisionResponse:
        cfg = self.config
        prompt = build_prompt(request)
        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt > 0:
                delay = cfg.retry_base_delay * 2.0 ** (attempt - 1)
                time.sleep(delay + 0.25 * delay * (time.monotonic() % 1.0))
            try:
                raw = self._post_once(prompt)
                return parse_response(raw)
            except _HTTPStatusError as exc:
                last_error = exc
                if exc.status not in self.RETRYABLE_STATUS:
                    raise BackendUnavailableError(
                        f"endpoint returned HTTP {exc.status}") from exc
            except (requests.RequestException, ResponseParseError) as exc:
                last_error = exc
            log.warning("decision attempt %d failed: %s", attempt + 1, last_error)
        raise BackendUnavailableError(
            f"backend retries exhausted after {cfg.max_retries + 1} attempts"
        ) from last_error

    def decide_many(self, requests_: Sequence[DecisionRequest]
                    ) -> list[DecisionResponse | BackendUnavailableError]:
        """Decide a batch with bounded parallelism, results in input order.

        Failures are returned in place (not raised) so the caller can fall
        back per agent.
        """
        def one(req: DecisionRequest):
            try:
                return self.decide(req)
            except BackendUnavailableError as exc:
                return exc

        workers = max(1, self.config.max_parallel_requests)
        if workers == 1 or len(requests_) <= 1:
            return [one(r) for r in requests_]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, requests_))


class _HTTPStatusError(Exception):
    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}: {body}")
        self.status = status


def make_backend(config: BackendConfig):
    """Instantiate the backend named by the config."""
    config.validate()
    scripted = {
        "scripted-len": ScriptedLEN,
        "scripted-cats": ScriptedCATS,
        "scripted-composite": ScriptedComposite,
        "scripted-precautionary": ScriptedPrecautionary,
    }
    if config.kind in scripted:
        return scripted[config.kind]()
    return LLMBackend(config)


def decide(backend, request: DecisionRequest) -> DecisionResponse:
    """Single entry point used by the simulation loop."""
    return backend.decide(request)
