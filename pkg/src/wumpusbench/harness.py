"""Episode runner, trial matrix, persistence and replay rendering.

An episode record logs everything needed to audit a run: the configuration
and seed (which fully determine the world), every observation, every model
call with usage, and every executed action with its provenance. Records
serialize one-per-line to an append-only JSONL log; loading a record and
re-simulating it from the seed must reproduce every observation, reward and
the final score, which :func:`verify_record` enforces.
"""

from __future__ import annotations

import json
import random
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .agents import Agent, CompletionLog
from .chat import UsageRecord
from .errors import (
    EpisodeProtocolFailure,
    LogCorruptionError,
    ProtocolError,
    ReplayMismatchError,
    TransportError,
)
from .observation import build_observation, observation_to_dict, parse_action
from .world import (
    Action,
    ActionKind,
    Cell,
    Status,
    WorldConfig,
    WorldState,
    apply_action,
    generate_world,
)

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Records


@dataclass
class RoundRecord:
    index: int
    observation: dict  # eight-key wire form
    action: Action
    provenance: str
    reward_delta: int
    analysis: str | None = None
    guess: dict | None = None
    guess_raw: str | None = None
    flags: list[str] = field(default_factory=list)
    calls: list[CompletionLog] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "observation": self.observation,
            "action": self.action.to_text(),
            "provenance": self.provenance,
            "reward_delta": self.reward_delta,
            "analysis": self.analysis,
            "guess": self.guess,
            "guess_raw": self.guess_raw,
            "flags": self.flags,
            "calls": [c.to_dict() for c in self.calls],
        }

    @staticmethod
    def from_dict(data: dict) -> "RoundRecord":
        from .chat import ChatMessage

        calls = [
            CompletionLog(
                role=c["role"],
                model=c["model"],
                messages=[ChatMessage(**m) for m in c["messages"]],
                response=c["response"],
                usage=UsageRecord(**c["usage"]),
            )
            for c in data.get("calls", [])
        ]
        return RoundRecord(
            index=data["index"],
            observation=data["observation"],
            action=parse_action(data["action"]),
            provenance=data["provenance"],
            reward_delta=data["reward_delta"],
            analysis=data.get("analysis"),
            guess=data.get("guess"),
            guess_raw=data.get("guess_raw"),
            flags=list(data.get("flags", [])),
            calls=calls,
        )


def config_to_dict(config: WorldConfig) -> dict:
    return dict(config.__dict__)


def config_from_dict(data: dict) -> WorldConfig:
    return WorldConfig(**data)


@dataclass
class EpisodeRecord:
    config: WorldConfig
    agent_kind: str
    mechanism: str | None
    models: dict[str, str]
    condition: str | None
    rounds: list[RoundRecord]
    status: str
    score: int
    success: bool
    wumpus_killed: bool
    error: str | None = None

    @property
    def seed(self) -> int:
        return self.config.seed

    def step_count(self) -> int:
        return sum(
            1
            for r in self.rounds
            if r.action.kind in (ActionKind.MOVE, ActionKind.SHOOT)
        )

    def prompt_tokens(self) -> int:
        return sum(c.usage.prompt_tokens for r in self.rounds for c in r.calls)

    def completion_tokens(self) -> int:
        return sum(c.usage.completion_tokens for r in self.rounds for c in r.calls)

    def total_tokens(self) -> int:
        return sum(c.usage.total_tokens for r in self.rounds for c in r.calls)

    def total_latency(self) -> float:
        return sum(c.usage.latency for r in self.rounds for c in r.calls)

    def usage_by_model(self) -> list[tuple[str, int, int]]:
        """(model, prompt tokens, completion tokens) per call."""
        return [
            (c.model, c.usage.prompt_tokens, c.usage.completion_tokens)
            for r in self.rounds
            for c in r.calls
        ]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "config": config_to_dict(self.config),
            "seed": self.seed,
            "agent_kind": self.agent_kind,
            "mechanism": self.mechanism,
            "models": self.models,
            "condition": self.condition,
            "status": self.status,
            "score": self.score,
            "success": self.success,
            "wumpus_killed": self.wumpus_killed,
            "error": self.error,
            "rounds": [r.to_dict() for r in self.rounds],
        }

    @staticmethod
    def from_dict(data: dict) -> "EpisodeRecord":
        if data.get("schema") != SCHEMA_VERSION:
            raise LogCorruptionError(
                f"unsupported record schema {data.get('schema')!r}"
            )
        return EpisodeRecord(
            config=config_from_dict(data["config"]),
            agent_kind=data["agent_kind"],
            mechanism=data.get("mechanism"),
            models=dict(data.get("models", {})),
            condition=data.get("condition"),
            rounds=[RoundRecord.from_dict(r) for r in data["rounds"]],
            status=data["status"],
            score=data["score"],
            success=data["success"],
            wumpus_killed=data["wumpus_killed"],
            error=data.get("error"),
        )

    def core_fingerprint(self) -> str:
        """Deterministic JSON of everything except wall-clock latencies."""
        data = self.to_dict()
        for round_data in data["rounds"]:
            for call in round_data["calls"]:
                call["usage"] = {**call["usage"], "latency": None}
        return json.dumps(data, sort_keys=True)


# ---------------------------------------------------------------------------
# Episode loop


def run_episode(
    config: WorldConfig,
    agent: Agent,
    *,
    agent_kind: str = "custom",
    mechanism: str | None = None,
    models: dict[str, str] | None = None,
    condition: str | None = None,
) -> EpisodeRecord:
    """Run one episode: observe, decide, act, until a terminal status.

    Transport failures and exhausted parse retries end the episode with
    status ``protocol_failure``; the rounds executed so far stay logged.
    """
    state = generate_world(config)
    rounds: list[RoundRecord] = []
    error: str | None = None

    while state.status is Status.RUNNING:
        obs = build_observation(state)
        obs_dict = observation_to_dict(obs)
        try:
            decision = agent.decide(obs)
        except EpisodeProtocolFailure as exc:
            state.status = Status.PROTOCOL_FAILURE
            error = str(exc)
            rounds.append(
                RoundRecord(
                    index=len(rounds),
                    observation=obs_dict,
                    action=Action.exit(),
                    provenance="none",
                    reward_delta=0,
                    flags=["protocol-failure"],
                    calls=list(exc.calls),
                )
            )
            break
        except (TransportError, ProtocolError) as exc:
            state.status = Status.PROTOCOL_FAILURE
            error = f"{type(exc).__name__}: {exc}"
            break
        result = apply_action(state, decision.action)
        rounds.append(
            RoundRecord(
                index=len(rounds),
                observation=obs_dict,
                action=decision.action,
                provenance=decision.provenance,
                reward_delta=result.reward_delta,
                analysis=decision.analysis,
                guess=decision.guess,
                guess_raw=decision.guess_raw,
                flags=list(decision.flags),
                calls=list(decision.calls),
            )
        )

    # Protocol-failure rounds log no executed action; drop the placeholder
    # from accounting by excluding it from scores/steps (reward_delta is 0).
    return EpisodeRecord(
        config=config,
        agent_kind=agent_kind,
        mechanism=mechanism,
        models=models or {},
        condition=condition,
        rounds=rounds,
        status=state.status.value,
        score=state.score,
        success=state.status is Status.SUCCESS,
        wumpus_killed=state.arrow_report.scream if state.arrow_report else False,
        error=error,
    )


# ---------------------------------------------------------------------------
# Trial matrix


@dataclass(frozen=True)
class Condition:
    grid_size: int
    num_pits: int
    num_wumpus: int

    @property
    def label(self) -> str:
        return f"{self.grid_size}x{self.grid_size}_p{self.num_pits}_w{self.num_wumpus}"


DEFAULT_CONDITIONS = (
    Condition(3, 0, 1),
    Condition(3, 1, 0),
    Condition(3, 1, 1),
    Condition(4, 1, 1),
    Condition(4, 2, 1),
    Condition(4, 3, 1),
)

DEFAULT_TRIALS_PER_CONDITION = 25


@dataclass
class TrialMatrix:
    """Conditions with their per-trial seeds; seeds are distinct within a
    condition."""

    entries: list[tuple[Condition, tuple[int, ...]]]
    step_limit: int = 50

    def __post_init__(self):
        for condition, seeds in self.entries:
            if len(set(seeds)) != len(seeds):
                raise ValueError(f"duplicate seeds in condition {condition.label}")

    def configs(self) -> list[tuple[Condition, WorldConfig]]:
        out = []
        for condition, seeds in self.entries:
            for seed in seeds:
                out.append(
                    (
                        condition,
                        WorldConfig(
                            grid_size=condition.grid_size,
                            num_pits=condition.num_pits,
                            num_wumpus=condition.num_wumpus,
                            seed=seed,
                            step_limit=self.step_limit,
                        ),
                    )
                )
        return out

    def total_trials(self) -> int:
        return sum(len(seeds) for _, seeds in self.entries)


def _draw_seeds(master_seed: int, condition_index: int, count: int) -> tuple[int, ...]:
    rng = random.Random(f"{master_seed}:{condition_index}")
    seeds: list[int] = []
    seen: set[int] = set()
    while len(seeds) < count:
        seed = rng.getrandbits(31)
        if seed not in seen:
            seen.add(seed)
            seeds.append(seed)
    return tuple(seeds)


def default_matrix(
    master_seed: int = 0,
    trials_per_condition: int = DEFAULT_TRIALS_PER_CONDITION,
    step_limit: int = 50,
) -> TrialMatrix:
    """The standard six-condition, 25-trials-each benchmark matrix."""
    entries = [
        (condition, _draw_seeds(master_seed, i, trials_per_condition))
        for i, condition in enumerate(DEFAULT_CONDITIONS)
    ]
    return TrialMatrix(entries=entries, step_limit=step_limit)


def matrix_from_dict(data: dict) -> TrialMatrix:
    """Load a matrix from config JSON; omitted seeds are drawn from
    ``master_seed`` deterministically."""
    master_seed = int(data.get("master_seed", 0))
    step_limit = int(data.get("step_limit", 50))
    if "conditions" not in data:
        return default_matrix(
            master_seed,
            int(data.get("trials_per_condition", DEFAULT_TRIALS_PER_CONDITION)),
            step_limit,
        )
    entries = []
    for i, entry in enumerate(data["conditions"]):
        condition = Condition(
            grid_size=int(entry["grid_size"]),
            num_pits=int(entry["num_pits"]),
            num_wumpus=int(entry["num_wumpus"]),
        )
        if "seeds" in entry:
            seeds = tuple(int(s) for s in entry["seeds"])
        else:
            seeds = _draw_seeds(master_seed, i, int(entry.get("trials", 25)))
        entries.append((condition, seeds))
    return TrialMatrix(entries=entries, step_limit=step_limit)


def run_trials(
    matrix: TrialMatrix,
    agent_factory: Callable[[WorldConfig], Agent],
    *,
    agent_kind: str = "custom",
    mechanism: str | None = None,
    models: dict[str, str] | None = None,
    parallelism: int = 1,
    on_episode: Callable[[EpisodeRecord], None] | None = None,
) -> list[EpisodeRecord]:
    """Run every (condition, seed) episode; failures never abort the batch.

    Results come back in matrix order regardless of the degree of
    parallelism, and each episode gets a fresh agent from the factory.
    """
    jobs = matrix.configs()

    def run_one(job: tuple[Condition, WorldConfig]) -> EpisodeRecord:
        condition, config = job
        try:
            record = run_episode(
                config,
                agent_factory(config),
                agent_kind=agent_kind,
                mechanism=mechanism,
                models=models,
                condition=condition.label,
            )
        except Exception as exc:  # defensive: record, never abort the batch
            record = EpisodeRecord(
                config=config,
                agent_kind=agent_kind,
                mechanism=mechanism,
                models=models or {},
                condition=condition.label,
                rounds=[],
                status=Status.PROTOCOL_FAILURE.value,
                score=config.base_score,
                success=False,
                wumpus_killed=False,
                error="".join(
                    traceback.format_exception_only(type(exc), exc)
                ).strip(),
            )
        if on_episode is not None:
            on_episode(record)
        return record

    if parallelism <= 1:
        return [run_one(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(run_one, jobs))


# ---------------------------------------------------------------------------
# Persistence and replay


def write_records(
    path: str | Path, records: Iterable[EpisodeRecord], *, append: bool = True
) -> None:
    """Append records to a JSONL log, one episode per line."""
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict()) + "\n")


def read_records(path: str | Path) -> list[EpisodeRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(EpisodeRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError, LogCorruptionError) as exc:
                raise LogCorruptionError(f"{path}: line {lineno}: {exc}") from exc
    return records


def verify_record(record: EpisodeRecord) -> WorldState:
    """Re-simulate a record from its seed and check it reproduces the log.

    Returns the final state; raises :class:`ReplayMismatchError` on the first
    divergence (wrong observation, reward, score or status).
    """
    state = generate_world(record.config)
    for round_record in record.rounds:
        if "protocol-failure" in round_record.flags:
            break
        obs = observation_to_dict(build_observation(state))
        if obs != round_record.observation:
            raise ReplayMismatchError(
                f"round {round_record.index}: observation diverges from the log"
            )
        result = apply_action(state, round_record.action)
        if result.reward_delta != round_record.reward_delta:
            raise ReplayMismatchError(
                f"round {round_record.index}: reward {result.reward_delta} != "
                f"logged {round_record.reward_delta}"
            )
    if state.score != record.score:
        raise ReplayMismatchError(
            f"final score {state.score} != logged {record.score}"
        )
    if record.status != Status.PROTOCOL_FAILURE.value and state.status.value != record.status:
        raise ReplayMismatchError(
            f"final status {state.status.value} != logged {record.status}"
        )
    return state


def render_board(state: WorldState, *, reveal: bool = True) -> str:
    """ASCII board: A agent, P pit, W/w live/dead wumpus, G gold, . explored,
    ? unexplored."""
    n = state.config.grid_size
    explored = set(state.explored)
    lines = []
    for y in range(n, 0, -1):
        row = []
        for x in range(1, n + 1):
            cell = Cell(x, y)
            symbol = "." if cell in explored else "?"
            if reveal:
                if cell == state.gold_cell:
                    symbol = "G"
                if cell == state.wumpus_cell:
                    symbol = "W" if state.wumpus_alive else "w"
                if cell in state.pit_cells:
                    symbol = "P"
            if cell == state.agent_cell:
                symbol = "A"
            row.append(symbol)
        lines.append(f"y{y:<2} " + " ".join(row))
    lines.append("    " + " ".join(f"x{x}" for x in range(1, n + 1)))
    return "\n".join(lines)


def render_frames(record: EpisodeRecord) -> list[str]:
    """One ASCII frame per round (plus the initial board), re-simulated from
    the seed with hazards revealed."""
    state = generate_world(record.config)
    frames = [f"{render_board(state)}\nround 0: start  score {state.score}"]
    for round_record in record.rounds:
        if "protocol-failure" in round_record.flags:
            frames.append(f"round {round_record.index + 1}: protocol failure")
            break
        apply_action(state, round_record.action)
        frames.append(
            f"{render_board(state)}\n"
            f"round {round_record.index + 1}: {round_record.action.to_text()} "
            f"({round_record.provenance})  reward {round_record.reward_delta:+d}  "
            f"score {state.score}  status {state.status.value}"
        )
    return frames


def persist_and_replay(
    path: str | Path, record: EpisodeRecord
) -> tuple[EpisodeRecord, list[str]]:
    """Append ``record`` to the log, read it back, verify the round trip and
    the replay, and return the reloaded record with its rendered frames."""
    write_records(path, [record])
    reloaded = read_records(path)[-1]
    if reloaded.to_dict() != record.to_dict():
        raise ReplayMismatchError("record changed across the write/read round trip")
    verify_record(reloaded)
    return reloaded, render_frames(reloaded)
