"""Aggregate statistics over a set of episode records.

Steps are the moves and shots an episode executed; exits do not count toward
per-step averages. Protocol-failure episodes are excluded from every average
and rate and reported as a separate count, so model noncompliance never
masquerades as a game outcome. Reward per step is the per-episode mean of
score over steps (zero-step episodes are skipped). Cost uses a per-1000-token
price table keyed by model name with a ``default`` fallback; tokens-per-second
is total completion tokens over total measured latency.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

from .errors import SummaryError

if TYPE_CHECKING:  # pragma: no cover
    from .harness import EpisodeRecord


@dataclass(frozen=True)
class Price:
    input_per_1k: float = 0.0
    output_per_1k: float = 0.0


PriceTable = Mapping[str, Price]


def price_table_from_dict(data: Mapping[str, Mapping[str, float]]) -> dict[str, Price]:
    return {
        name: Price(
            input_per_1k=float(p.get("input_per_1k", 0.0)),
            output_per_1k=float(p.get("output_per_1k", 0.0)),
        )
        for name, p in data.items()
    }


def _price_for(model: str, prices: PriceTable | None) -> Price:
    if not prices:
        return Price()
    return prices.get(model) or prices.get("default") or Price()


@dataclass(frozen=True)
class MetricsSummary:
    runs: int
    protocol_failures: int
    avg_total_reward: float
    reward_std: float  # sample (n-1) standard deviation
    avg_steps: float
    min_steps: int
    max_steps: int
    avg_reward_per_step: float
    success_rate: float  # percent
    wumpus_kill_rate: float  # percent
    avg_latency_per_step: float  # seconds
    avg_prompt_tokens: float  # per run
    avg_completion_tokens: float
    avg_total_tokens: float
    avg_cost_per_step: float
    tps: float  # completion tokens per second of generation latency

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def format_text(self) -> str:
        lines = [
            f"Total runs              {self.runs}",
            f"Protocol failures       {self.protocol_failures}",
            f"Avg total reward        {self.avg_total_reward:.2f} (±{self.reward_std:.2f})",
            f"Avg steps               {self.avg_steps:.2f} (range: {self.min_steps}-{self.max_steps})",
            f"Avg reward per step     {self.avg_reward_per_step:.2f}",
            f"Success rate (%)        {self.success_rate:.2f}",
            f"Wumpus kill rate (%)    {self.wumpus_kill_rate:.2f}",
            f"Avg latency per step(s) {self.avg_latency_per_step:.3f}",
            f"Avg prompt tokens       {self.avg_prompt_tokens:.1f}",
            f"Avg completion tokens   {self.avg_completion_tokens:.1f}",
            f"Avg total tokens        {self.avg_total_tokens:.1f}",
            f"Avg cost per step       {self.avg_cost_per_step:.6f}",
            f"TPS (tokens/s)          {self.tps:.2f}",
        ]
        return "\n".join(lines)


def summarize(
    records: Sequence["EpisodeRecord"], prices: PriceTable | None = None
) -> MetricsSummary:
    """Aggregate ``records`` into one summary."""
    if not records:
        raise SummaryError("cannot summarize an empty record set")
    failures = [r for r in records if r.status == "protocol_failure"]
    completed = [r for r in records if r.status != "protocol_failure"]
    if not completed:
        raise SummaryError("no completed episodes to summarize")

    scores = [r.score for r in completed]
    steps = [r.step_count() for r in completed]
    per_step = [s / k for s, k in zip(scores, steps) if k > 0]

    total_steps = sum(steps)
    total_prompt = sum(r.prompt_tokens() for r in completed)
    total_completion = sum(r.completion_tokens() for r in completed)
    total_tokens = sum(r.total_tokens() for r in completed)
    total_latency = sum(r.total_latency() for r in completed)
    total_cost = 0.0
    for record in completed:
        for model, prompt_toks, completion_toks in record.usage_by_model():
            price = _price_for(model, prices)
            total_cost += (
                prompt_toks * price.input_per_1k
                + completion_toks * price.output_per_1k
            ) / 1000.0

    n = len(completed)
    return MetricsSummary(
        runs=n,
        protocol_failures=len(failures),
        avg_total_reward=statistics.mean(scores),
        reward_std=statistics.stdev(scores) if n > 1 else 0.0,
        avg_steps=statistics.mean(steps),
        min_steps=min(steps),
        max_steps=max(steps),
        avg_reward_per_step=statistics.mean(per_step) if per_step else 0.0,
        success_rate=100.0 * sum(r.success for r in completed) / n,
        wumpus_kill_rate=100.0 * sum(r.wumpus_killed for r in completed) / n,
        avg_latency_per_step=total_latency / total_steps if total_steps else 0.0,
        avg_prompt_tokens=total_prompt / n,
        avg_completion_tokens=total_completion / n,
        avg_total_tokens=total_tokens / n,
        avg_cost_per_step=total_cost / total_steps if total_steps else 0.0,
        tps=total_completion / total_latency if total_latency > 0 else 0.0,
    )
