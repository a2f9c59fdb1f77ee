"""Dual-role orchestration: a Planner proposes, a Critic scores, a threshold
arbitrates.

Each round makes exactly two model invocations (plus bounded parse retries):
the planner runs one chained-guess round and proposes an action; the critic
sees the observation plus that proposal and answers with a confidence in
[0, 1], an optional alternative action and a rationale. Confidence at or
above the threshold executes the planner's action; strictly below it, the
critic's alternative is executed instead. A critic whose verdict stays
unparseable after retries is treated as fully confident (no intervention)
and flagged, so model noncompliance never blocks an episode.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .agents import CompletionLog, Decision, is_action_legal
from .chat import ChatClient, ChatMessage
from .errors import ActionParseError, ArbitrationError, ConfigurationError
from .llm import (
    CosTurn,
    DEFAULT_MAX_PARSE_RETRIES,
    MECHANISM_COS,
    default_system_prompt,
    environment_rules,
    run_cos_round,
)
from .observation import Observation, observation_to_json, parse_action
from .world import Action

CONFIDENCE_LABEL = "Confidence:"
ALTERNATIVE_LABEL = "Alternative:"
RATIONALE_LABEL = "Rationale:"

DEFAULT_THRESHOLD = 0.7


@dataclass(frozen=True)
class CriticVerdict:
    confidence: float
    alternative: Action | None
    rationale: str


@dataclass(frozen=True)
class ArbitrationConfig:
    """Ties (confidence equal to the threshold) go to the planner."""

    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigurationError(
                f"threshold must be in [0, 1], got {self.threshold}"
            )


def arbitrate(
    proposal: Action, verdict: CriticVerdict, cfg: ArbitrationConfig
) -> tuple[Action, str]:
    """Pick the executed action; returns it with its provenance tag."""
    if verdict.confidence >= cfg.threshold:
        return proposal, "planner"
    if verdict.alternative is None:
        raise ArbitrationError(
            f"confidence {verdict.confidence} below threshold {cfg.threshold} "
            "but the critic supplied no alternative"
        )
    return verdict.alternative, "critic"


def critic_system_prompt(grid_size: int) -> str:
    return (
        f"{environment_rules(grid_size)}\n\n"
        "You are a safety reviewer for the explorer described above. You will "
        "be given the explorer's current observation and a proposed action. "
        "Judge how safe and sensible the proposal is, paying attention to "
        "clues such as breezes and stenches.\n"
        "Respond in exactly three labeled sections:\n"
        f"{CONFIDENCE_LABEL} a number between 0 and 1 expressing how confident "
        "you are that the proposed action should be executed.\n"
        f"{ALTERNATIVE_LABEL} a better action in the exact action grammar, or "
        "the word none. Always supply one when your confidence is low.\n"
        f"{RATIONALE_LABEL} a short justification."
    )


def build_critic_prompt(
    obs: Observation, proposal: Action, system_prompt: str
) -> list[ChatMessage]:
    user = (
        f"Observation:\n{observation_to_json(obs)}\n\n"
        f"Proposed action: {proposal.to_text()}"
    )
    return [ChatMessage("system", system_prompt), ChatMessage("user", user)]


_CONFIDENCE_RE = re.compile(
    r"confidence\s*[:=]?\s*([01](?:\.\d+)?|\.\d+)", re.IGNORECASE
)
_ALTERNATIVE_RE = re.compile(
    r"alternative\s*[:=]\s*(.*?)(?=^\s*(?:confidence|rationale)\s*[:=]|\Z)",
    re.IGNORECASE | re.MULTILINE | re.DOTALL,
)


def parse_critic_verdict(text: str) -> CriticVerdict:
    """Parse a critic reply; raises :class:`ActionParseError` when no
    in-range confidence can be found."""
    matches = list(_CONFIDENCE_RE.finditer(text))
    if not matches:
        raise ActionParseError(f"no confidence score in: {text!r:.200}")
    confidence = float(matches[-1].group(1))
    if not 0.0 <= confidence <= 1.0:
        raise ActionParseError(f"confidence {confidence} outside [0, 1]")

    alternative: Action | None = None
    alt_match = _ALTERNATIVE_RE.search(text)
    if alt_match:
        alt_text = alt_match.group(1).strip()
        if not re.fullmatch(r"none\.?", alt_text, re.IGNORECASE):
            try:
                alternative = parse_action(alt_text)
            except ActionParseError:
                alternative = None

    rationale = ""
    rat_pos = text.lower().find("rationale")
    if rat_pos >= 0:
        rationale = text[rat_pos + len("rationale") :].lstrip(":= ").strip()
    return CriticVerdict(
        confidence=confidence, alternative=alternative, rationale=rationale
    )


def plan(
    client: ChatClient,
    obs: Observation,
    prev_guess: str | None,
    *,
    grid_size: int,
    system_prompt: str | None = None,
    max_parse_retries: int = DEFAULT_MAX_PARSE_RETRIES,
) -> tuple[CosTurn, list[CompletionLog], list[str]]:
    """One planner round: a chained-guess proposal against the planner model."""
    return run_cos_round(
        client,
        obs,
        prev_guess,
        mechanism=MECHANISM_COS,
        system_prompt=system_prompt or default_system_prompt(MECHANISM_COS, grid_size),
        grid_size=grid_size,
        max_parse_retries=max_parse_retries,
        role="planner",
    )


def critique(
    client: ChatClient,
    obs: Observation,
    proposal: Action,
    *,
    threshold: float,
    grid_size: int,
    system_prompt: str | None = None,
    max_parse_retries: int = DEFAULT_MAX_PARSE_RETRIES,
) -> tuple[CriticVerdict, list[CompletionLog], list[str]]:
    """One critic review of ``proposal``.

    A verdict is usable when it parses, lies in range, and - if it would
    overrule the planner - names a legal alternative. Retries exhausted means
    confidence 1.0 (no intervention), flagged as ``critic-parse-failure``.
    """
    prompt = build_critic_prompt(
        obs, proposal, system_prompt or critic_system_prompt(grid_size)
    )
    calls: list[CompletionLog] = []
    flags: list[str] = []
    for _ in range(max_parse_retries + 1):
        content, usage = client.complete(prompt)
        calls.append(
            CompletionLog(
                role="critic",
                model=client.model,
                messages=list(prompt),
                response=content,
                usage=usage,
            )
        )
        try:
            verdict = parse_critic_verdict(content)
        except ActionParseError:
            flags.append("unparseable-verdict")
            continue
        if verdict.confidence < threshold:
            if verdict.alternative is None or not is_action_legal(
                verdict.alternative, obs
            ):
                flags.append("missing-or-illegal-alternative")
                continue
        return verdict, calls, flags
    flags.append("critic-parse-failure")
    return CriticVerdict(confidence=1.0, alternative=None, rationale=""), calls, flags


class PlannerCriticAgent:
    """Planner proposes, critic reviews, threshold arbitrates. By default the
    same model plays both roles with different prompts."""

    def __init__(
        self,
        planner_client: ChatClient,
        grid_size: int,
        *,
        critic_client: ChatClient | None = None,
        arbitration: ArbitrationConfig | None = None,
        planner_prompt: str | None = None,
        critic_prompt: str | None = None,
        max_parse_retries: int = DEFAULT_MAX_PARSE_RETRIES,
    ):
        self.planner_client = planner_client
        self.critic_client = critic_client or planner_client
        self.grid_size = grid_size
        self.arbitration = arbitration or ArbitrationConfig()
        self.planner_prompt = planner_prompt
        self.critic_prompt = critic_prompt
        self.max_parse_retries = max_parse_retries
        self.prev_guess: str | None = None

    def decide(self, obs: Observation) -> Decision:
        turn, planner_calls, flags = plan(
            self.planner_client,
            obs,
            self.prev_guess,
            grid_size=self.grid_size,
            system_prompt=self.planner_prompt,
            max_parse_retries=self.max_parse_retries,
        )
        self.prev_guess = turn.guess_raw
        verdict, critic_calls, critic_flags = critique(
            self.critic_client,
            obs,
            turn.action,
            threshold=self.arbitration.threshold,
            grid_size=self.grid_size,
            system_prompt=self.critic_prompt,
            max_parse_retries=self.max_parse_retries,
        )
        action, provenance = arbitrate(turn.action, verdict, self.arbitration)
        return Decision(
            action=action,
            provenance=provenance,
            calls=planner_calls + critic_calls,
            analysis=turn.analysis,
            guess=turn.guess.to_dict(),
            guess_raw=turn.guess_raw,
            flags=flags + critic_flags,
        )
