"""Agent protocol plus the simple non-LLM agents.

An agent sees only observations. Its decision carries the chosen action, who
chose it (oracle, scripted, random, model, planner or critic), and the full
log of any model calls made along the way so the harness can account tokens
and latency per round.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Protocol

from .chat import ChatMessage, UsageRecord
from .errors import EpisodeProtocolFailure
from .observation import Observation, parse_action
from .world import Action, ActionKind


@dataclass
class CompletionLog:
    """One model call: what was sent, what came back, what it cost."""

    role: str  # "model" | "planner" | "critic"
    model: str
    messages: list[ChatMessage]
    response: str
    usage: UsageRecord

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "model": self.model,
            "messages": [m.to_dict() for m in self.messages],
            "response": self.response,
            "usage": self.usage.to_dict(),
        }


@dataclass
class Decision:
    action: Action
    provenance: str
    calls: list[CompletionLog] = field(default_factory=list)
    analysis: str | None = None
    guess: dict | None = None  # {"wumpus": [[x, y], ...], "pits": [[x, y], ...]}
    guess_raw: str | None = None
    flags: list[str] = field(default_factory=list)


class Agent(Protocol):
    def decide(self, obs: Observation) -> Decision: ...


def legal_actions_from(obs: Observation) -> list[Action]:
    """The legal actions implied by an observation, in a fixed order."""
    out = [Action.move(c.x, c.y) for c in obs.suggestions.frontier_cells]
    out.extend(Action.shoot(d) for d in obs.suggestions.shoot_options)
    out.append(Action.exit())
    return out


def is_action_legal(action: Action, obs: Observation) -> bool:
    if action.kind is ActionKind.MOVE:
        return action.target in obs.suggestions.frontier_cells
    if action.kind is ActionKind.SHOOT:
        return action.direction in obs.suggestions.shoot_options
    return True


class ScriptedAgent:
    """Plays a fixed action sequence; raises a protocol failure when it runs
    out of script."""

    def __init__(self, actions: Iterable[Action | str]):
        self._actions = [
            a if isinstance(a, Action) else parse_action(a) for a in actions
        ]
        self._cursor = 0

    def decide(self, obs: Observation) -> Decision:
        if self._cursor >= len(self._actions):
            raise EpisodeProtocolFailure("scripted agent ran out of actions")
        action = self._actions[self._cursor]
        self._cursor += 1
        return Decision(action=action, provenance="scripted")


class RandomLegalAgent:
    """Uniformly random choice among the legal actions; seeded and
    deterministic."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def decide(self, obs: Observation) -> Decision:
        options = legal_actions_from(obs)
        action = options[self._rng.randrange(len(options))]
        return Decision(action=action, provenance="random")
