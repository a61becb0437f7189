"""The monthly simulation loop.

Each month runs a fixed phase order: snapshot observations, memory
retrieval, backend decisions against the shared snapshot, sentiment update,
confidence-gated adjustment, a sticky labor market, production, taxation
with redistribution, rationed consumption, investment and capital update,
imbalance-driven wage/price adjustment, an annual interest-rate update,
and per-agent memory writes.

Determinism: every agent owns a random stream keyed by (master seed, agent
id), so adding agents never reshuffles existing agents' draws; one extra
market-level stream covers the price shock. Two runs from the same resolved
config produce byte-identical outputs with scripted backends.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from . import personas
from .backends import (BackendUnavailableError, DecisionRequest,
                       DecisionResponse, make_backend)
from .cognition import MemoryBank, Persona, SentimentState, adjust_decision, update_esi
from .market import (MarketState, adjust_wages_and_price, aggregate_demand,
                     apply_taxes, market_imbalance, produce, taylor_rate,
                     update_capital)

if TYPE_CHECKING:
    from .config import RunConfig

_AGENT_STREAM = 1
_MARKET_STREAM = 2


class SimulationIntegrityError(RuntimeError):
    """A state variable left the finite range; the run cannot continue."""


@dataclass
class ScenarioEvent:
    """A textual event injected into every agent's context while active.

    Active months are ``start_month <= t < end_month`` (``end_month=None``
    leaves the event open). ``esi_shock`` is added to the sentiment reported
    by scripted backends while active, standing in for how a language model
    would react to the text itself.
    """

    start_month: int
    end_month: int | None
    text: str
    esi_shock: float = 0.0

    def validate(self) -> None:
        if self.start_month < 0:
            raise ValueError("scenario start_month must be >= 0")
        if self.end_month is not None and self.end_month < self.start_month:
            raise ValueError("scenario end_month precedes start_month")
        if not self.text:
            raise ValueError("scenario event text must be non-empty")

    def active(self, month: int) -> bool:
        if month < self.start_month:
            return False
        return self.end_month is None or month < self.end_month

    def overlaps(self, other: "ScenarioEvent") -> bool:
        a_end = math.inf if self.end_month is None else self.end_month
        b_end = math.inf if other.end_month is None else other.end_month
        return self.start_month < b_end and other.start_month < a_end


@dataclass
class AblationFlags:
    """Independent switches that remove one mechanism each."""

    no_history_memory: bool = False
    no_sentiment_index: bool = False
    no_belief_factor: bool = False
    no_investment_impact: bool = False


@dataclass
class HouseholdState:
    """One agent's economic position and cognitive state."""

    agent_id: int
    persona: Persona
    hourly_wage: float
    savings: float
    employed: bool
    sentiment: SentimentState
    memory: MemoryBank
    hours: int = 0
    income: float = 0.0
    p_work: float = 0.0
    p_consume: float = 0.0
    rng: np.random.Generator = None
    last_response: DecisionResponse = field(
        default_factory=lambda: DecisionResponse(0.6, 0.6, 0.0, 1.0))
    annual_gross: float = 0.0
    annual_post_tax: float = 0.0
    annual_spend: float = 0.0


MONTH_COLUMNS = [
    "month", "price", "monthly_inflation", "unemployment", "production",
    "demand", "inventory", "capital", "interest_rate", "mean_esi",
    "mean_p_work", "mean_p_consume", "mean_wage", "realized_consumption",
    "investment", "total_savings", "total_post_tax", "total_spending",
]


@dataclass
class MonthRecord:
    month: int
    price: float
    monthly_inflation: float
    unemployment: float
    production: float
    demand: float
    inventory: float
    capital: float
    interest_rate: float
    mean_esi: float
    mean_p_work: float
    mean_p_consume: float
    mean_wage: float
    realized_consumption: float
    investment: float
    total_savings: float
    total_post_tax: float
    total_spending: float

    def to_row(self) -> list:
        return [getattr(self, c) for c in MONTH_COLUMNS]


AGENT_COLUMNS = [
    "year", "agent_id", "name", "age", "occupation", "hourly_wage",
    "savings", "employed", "esi", "p_work", "p_consume", "annual_gross",
    "annual_disposable", "annual_spending", "savings_rate",
]


@dataclass
class RunResult:
    month_records: list[MonthRecord]
    agent_rows: list[list]
    manifest: dict
    initial_total_savings: float
    retrieval_calls: int
    fallback_count: int
    agents: list[HouseholdState]
    market: MarketState


def observation_text(month: int, income: float, saved: float, price: float,
                     unemployment: float, worked: bool) -> str:
    """The one-line event summary template shared by queries and memories."""
    return (f"month {month}: income {income:.2f}, saved {saved:.2f}, "
            f"price {price:.6f}, unemployment {unemployment:.4f}, "
            f"worked: {'yes' if worked else 'no'}")


def agent_rng(master_seed: int, agent_id: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, _AGENT_STREAM, agent_id]))


def initialize(config: "RunConfig") -> tuple[list[HouseholdState], MarketState]:
    """Build the starting population and market.

    Hourly wages are Pareto-distributed, ages follow the bundled working-age
    table, and each agent's occupation title comes from its wage decile.
    Everyone starts employed; the market opens at the numeraire price with
    the no-gap interest rate.
    """
    init = config.init
    if init.pareto_scale <= 0 or init.pareto_shape <= 0:
        raise ValueError("Pareto scale and shape must be > 0")
    n = config.n_agents
    agents: list[HouseholdState] = []
    for i in range(n):
        rng = agent_rng(config.master_seed, i)
        wage = init.pareto_scale * (1.0 + rng.pareto(init.pareto_shape))
        age = personas.draw_age(rng)
        name = personas.draw_name(rng)
        sent = SentimentState(
            esi=0.0,
            decay_lambda=config.sentiment.decay_lambda,
            work_gain=config.sentiment.work_gain,
            consume_gain=config.sentiment.consume_gain,
            confidence_threshold=config.sentiment.confidence_threshold,
            adjust_mode=config.sentiment.adjust_mode,
        )
        sent.validate()
        bank = MemoryBank(capacity=config.memory.capacity,
                          short_term_size=config.memory.short_term_size,
                          dim=config.memory.embed_dim)
        agents.append(HouseholdState(
            agent_id=i,
            persona=Persona(name=name, age=age, occupation="pending"),
            hourly_wage=wage,
            savings=init.savings_months * wage * config.production.hours_per_month,
            employed=True,
            sentiment=sent,
            memory=bank,
            rng=rng,
        ))

    # Occupation titles reflect each agent's position in the wage ladder.
    order = sorted(range(n), key=lambda i: agents[i].hourly_wage)
    for rank, i in enumerate(order):
        decile = min(9, rank * 10 // n)
        title = personas.occupation_for_decile(decile, agents[i].rng)
        agents[i].persona = dataclasses.replace(agents[i].persona,
                                                occupation=title)

    market = MarketState(
        month_index=0,
        price=1.0,
        base_price=1.0,
        inventory=0.0,
        capital=init.initial_capital,
        interest_rate=taylor_rate(config.taylor.target_inflation,
                                  config.taylor.natural_unemployment,
                                  config.taylor),
        unemployment=config.taylor.natural_unemployment,
        last_annual_inflation=config.taylor.target_inflation,
    )
    market.validate()
    return agents, market


def inject_scenario(config: "RunConfig", event: ScenarioEvent) -> "RunConfig":
    """Return a copy of the config with one more scenario event.

    Identical event text with an overlapping active window is rejected;
    nothing else about the config changes.
    """
    event.validate()
    for existing in config.scenario:
        if existing.text == event.text and existing.overlaps(event):
            raise ValueError("overlapping identical scenario events")
    return dataclasses.replace(config, scenario=config.scenario + [event])


class Engine:
    """Owns the mutable simulation state and advances it month by month."""

    def __init__(self, config: "RunConfig", backend=None):
        config.validate()
        self.config = config
        self.backend = backend if backend is not None else make_backend(config.backend)
        self.agents, self.market = initialize(config)
        self.market_rng = np.random.default_rng(
            np.random.SeedSequence([config.master_seed, _MARKET_STREAM]))
        self.price_history: list[float] = []
        self.unemployment_history: list[float] = []
        self.retrieval_calls = 0
        self.fallback_count = 0
        self.initial_total_savings = sum(a.savings for a in self.agents)
        self._scripted = self.backend.kind.startswith("scripted")

    def _active_events(self, month: int) -> tuple[list[str], float]:
        texts, shock = [], 0.0
        for event in self.config.scenario:
            if event.active(month):
                texts.append(event.text)
                shock += event.esi_shock
        return texts, shock

    def _observed_unemployment(self) -> float:
        """The rate agents see: a trailing 3-month mean of the measured
        series. Reacting to the raw monthly rate makes the whole population
        swing its labor supply in lockstep (a period-2 resonance); the
        published-statistic reading keeps responses finite."""
        window = self.unemployment_history[-3:]
        if not window:
            return self.market.unemployment
        return sum(window) / len(window)

    def _build_requests(self, month: int) -> list[DecisionRequest]:
        flags = self.config.ablation
        k = 0 if flags.no_history_memory else self.config.memory.retrieval_k
        event_texts, _ = self._active_events(month)
        observed_u = self._observed_unemployment()
        requests = []
        for agent in self.agents:
            query = observation_text(month, agent.income, agent.savings,
                                     self.market.price, observed_u,
                                     agent.hours > 0)
            if k > 0:
                memories = [r.summary for r in agent.memory.retrieve(query, k)]
                self.retrieval_calls += 1
            else:
                memories = []
            requests.append(DecisionRequest(
                income=agent.income,
                price=self.market.price,
                savings=agent.savings,
                unemployment=observed_u,
                interest_rate=self.market.interest_rate,
                esi=agent.sentiment.esi,
                persona=agent.persona,
                retrieved_memories=memories,
                short_term_context=list(agent.memory.short_term),
                scenario_events=list(event_texts),
                month_index=month,
            ))
        return requests

    def _decide_all(self, requests: list[DecisionRequest]) -> list[DecisionResponse]:
        if hasattr(self.backend, "decide_many"):
            outcomes = self.backend.decide_many(requests)
        else:
            outcomes = []
            for req in requests:
                try:
                    outcomes.append(self.backend.decide(req))
                except BackendUnavailableError as exc:
                    outcomes.append(exc)
        responses = []
        for agent, outcome in zip(self.agents, outcomes):
            if isinstance(outcome, BackendUnavailableError):
                self.fallback_count += 1
                responses.append(agent.last_response)
            else:
                agent.last_response = outcome
                responses.append(outcome)
        return responses

    def step_month(self) -> MonthRecord:
        """Advance one month and return its aggregate record."""
        t = self.market.month_index
        config = self.config
        flags = config.ablation
        market = self.market
        agents = self.agents

        price_snapshot = market.price
        rate_snapshot = market.interest_rate
        prev_price = self.price_history[-1] if self.price_history else None

        # Decisions against a shared snapshot.
        requests = self._build_requests(t)
        responses = self._decide_all(requests)
        _, esi_shock = self._active_events(t)

        for agent, response in zip(agents, responses):
            esi_llm = response.esi_llm
            if self._scripted and esi_shock != 0.0:
                esi_llm = min(1.0, max(-1.0, esi_llm + esi_shock))
            if flags.no_sentiment_index:
                agent.sentiment.esi = 0.0
            else:
                update_esi(agent.sentiment, esi_llm)
            if flags.no_belief_factor:
                agent.p_work, agent.p_consume = response.p_work, response.p_consume
            else:
                agent.p_work, agent.p_consume = adjust_decision(
                    response.p_work, response.p_consume, agent.sentiment,
                    response.confidence)

        # Labor market: jobs are sticky, a skipped month counts as quitting,
        # the unemployed draw one offer from the current wage distribution.
        offer_pool = [a.hourly_wage for a in agents if a.employed]
        if not offer_pool:
            offer_pool = [a.hourly_wage for a in agents]
        for agent in agents:
            if agent.employed:
                works = agent.rng.random() < agent.p_work
            else:
                offer = offer_pool[int(agent.rng.integers(len(offer_pool)))]
                works = agent.rng.random() < agent.p_work
                if works:
                    agent.hourly_wage = offer
            agent.employed = works
            agent.hours = config.production.hours_per_month if works else 0
            agent.income = agent.hourly_wage * agent.hours

        unemployment = sum(1 for a in agents if a.hours == 0) / len(agents)

        # Production adds to inventory before trading.
        labor_hours = float(sum(a.hours for a in agents))
        supply = produce(market.capital, labor_hours, config.production)
        available = market.inventory + supply

        # Taxes and redistribution on gross incomes.
        incomes = [a.income for a in agents]
        post_tax, _, _ = apply_taxes(incomes, config.taxes)

        # Consumption out of start-of-month savings, rationed pro rata when
        # demand outruns inventory.
        pairs = [(a.p_consume, a.savings) for a in agents]
        demand = aggregate_demand(pairs, price_snapshot)
        realized = min(demand, available)
        ration = realized / demand if demand > 0 else 0.0
        monthly_rate = rate_snapshot / 12.0
        total_spend = 0.0
        for agent, net in zip(agents, post_tax):
            spend = agent.p_consume * agent.savings * ration
            agent.savings = agent.savings * (1.0 + monthly_rate) + net - spend
            total_spend += spend
            agent.annual_gross += agent.income
            agent.annual_post_tax += net
            agent.annual_spend += spend
        market.inventory = available - realized

        # Investment out of the month's net income flow.
        total_post_tax = sum(post_tax)
        investment = 0.0 if flags.no_investment_impact \
            else config.init.investment_rate * total_post_tax
        market.capital = update_capital(market.capital, investment,
                                        config.production)

        # Imbalance between demand and the goods offered this month drives
        # wage and price updates that take effect next month.
        imbalance = market_imbalance(demand, available)
        wages = [a.hourly_wage for a in agents]
        adjust_wages_and_price([a.rng for a in agents], wages, market,
                               imbalance, config.adjustment, self.market_rng)
        for agent, wage in zip(agents, wages):
            agent.hourly_wage = wage

        market.unemployment = unemployment
        self.price_history.append(price_snapshot)
        self.unemployment_history.append(unemployment)

        # Annual interest-rate review from trailing means.
        if t % 12 == 11:
            window = self.price_history[-12:]
            mean_price = sum(window) / 12.0
            if t >= 23:
                prev_window = self.price_history[-24:-12]
                prev_mean = sum(prev_window) / 12.0
            else:
                prev_mean = 1.0  # initial numeraire
            inflation = (mean_price - prev_mean) / prev_mean
            mean_u = sum(self.unemployment_history[-12:]) / 12.0
            market.last_annual_inflation = inflation
            market.interest_rate = taylor_rate(inflation, mean_u, config.taylor)

        # Memory writes: each agent logs what its month looked like.
        for agent in agents:
            summary = observation_text(t, agent.income, agent.savings,
                                       price_snapshot, unemployment,
                                       agent.hours > 0)
            agent.memory.store_event(t, summary, agent.sentiment.esi)

        n = len(agents)
        record = MonthRecord(
            month=t,
            price=price_snapshot,
            monthly_inflation=(0.0 if prev_price is None
                               else (price_snapshot - prev_price) / prev_price),
            unemployment=unemployment,
            production=supply,
            demand=demand,
            inventory=market.inventory,
            capital=market.capital,
            interest_rate=rate_snapshot,
            mean_esi=sum(a.sentiment.esi for a in agents) / n,
            mean_p_work=sum(a.p_work for a in agents) / n,
            mean_p_consume=sum(a.p_consume for a in agents) / n,
            mean_wage=sum(wages) / n,
            realized_consumption=realized,
            investment=investment,
            total_savings=sum(a.savings for a in agents),
            total_post_tax=total_post_tax,
            total_spending=total_spend,
        )
        self._check_integrity(record)
        market.month_index = t + 1
        return record

    def _check_integrity(self, record: MonthRecord) -> None:
        for name in ("price", "capital", "inventory", "total_savings"):
            value = getattr(record, name)
            if not math.isfinite(value):
                raise SimulationIntegrityError(
                    f"non-finite {name} at month {record.month}: {value!r}; "
                    f"price={record.price!r} capital={record.capital!r} "
                    f"inventory={record.inventory!r} demand={record.demand!r}")
        if record.price <= 0:
            raise SimulationIntegrityError(
                f"price not positive at month {record.month}: {record.price}")

    def _annual_agent_rows(self, year: int) -> list[list]:
        rows = []
        for a in self.agents:
            savings_rate = (1.0 - a.annual_spend / a.annual_post_tax
                            if a.annual_post_tax > 0 else 0.0)
            rows.append([
                year, a.agent_id, a.persona.name, a.persona.age,
                a.persona.occupation, a.hourly_wage, a.savings,
                int(a.employed), a.sentiment.esi, a.p_work, a.p_consume,
                a.annual_gross, a.annual_post_tax, a.annual_spend,
                savings_rate,
            ])
            a.annual_gross = a.annual_post_tax = a.annual_spend = 0.0
        return rows


def run(config: "RunConfig", backend=None) -> RunResult:
    """Run the configured number of months and assemble the results."""
    from .config import config_hash, resolved_dict
    from . import __version__

    started = time.monotonic()
    engine = Engine(config, backend=backend)
    records: list[MonthRecord] = []
    agent_rows: list[list] = []
    for t in range(config.n_months):
        records.append(engine.step_month())
        if t % 12 == 11:
            agent_rows.extend(engine._annual_agent_rows(t // 12))

    resolved = resolved_dict(config)
    manifest = {
        "config_hash": config_hash(config),
        "resolved_config": resolved,
        "master_seed": config.master_seed,
        "code_version": __version__,
        "backend_kind": config.backend.kind,
        "prompt_template_version": "prompt-v1",
        "defaults_filled": sorted(config.defaulted_paths),
        "fallback_count": engine.fallback_count,
        "retrieval_calls": engine.retrieval_calls,
        "initial_total_savings": engine.initial_total_savings,
        "wall_clock_seconds": time.monotonic() - started,
    }
    return RunResult(
        month_records=records,
        agent_rows=agent_rows,
        manifest=manifest,
        initial_total_savings=engine.initial_total_savings,
        retrieval_calls=engine.retrieval_calls,
        fallback_count=engine.fallback_count,
        agents=engine.agents,
        market=engine.market,
    )
