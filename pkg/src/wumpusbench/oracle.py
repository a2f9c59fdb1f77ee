"""Deterministic logical agent used as a safety oracle and non-LLM baseline.

Inference is exact model enumeration: every hazard layout consistent with the
placement rules and the recorded percepts is enumerated (grids are at most a
few hundred layouts), and a cell is *certain* for a hazard when it carries it
in every consistent layout, *impossible* when in none. The policy is
risk-neutral: it only ever enters provably safe cells, shoots only a
pinpointed wumpus, and exits rather than gamble.

Stench records are timestamped against the wumpus being alive: a cell visited
after a kill shows no stench even next to the corpse, and consistency checking
honors that.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

from .agents import Decision
from .errors import InconsistentPerceptsError
from .observation import Observation
from .world import (
    Action,
    ActionKind,
    Cell,
    Direction,
    Percept,
    START_CELL,
    WorldState,
    adjacent_cells,
    grid_cells,
    safe_start_zone,
    shoot_trajectory,
    sort_key,
)


class CandidateStatus(str, Enum):
    IMPOSSIBLE = "impossible"
    POSSIBLE = "possible"
    CERTAIN = "certain"


@dataclass(frozen=True)
class PerceptRecord:
    breeze: bool
    stench: bool
    wumpus_alive: bool  # whether the wumpus was still alive when recorded


@dataclass(frozen=True)
class ShotRecord:
    origin: Cell
    direction: Direction
    scream: bool


@dataclass
class KnowledgeBase:
    grid_size: int
    num_pits: int
    num_wumpus: int
    records: dict[Cell, PerceptRecord] = field(default_factory=dict)
    shots: list[ShotRecord] = field(default_factory=list)
    wumpus_known_dead: bool = False
    pit_candidates: dict[Cell, CandidateStatus] = field(default_factory=dict)
    wumpus_candidates: dict[Cell, CandidateStatus] = field(default_factory=dict)
    safe_cells: set[Cell] = field(default_factory=set)


@dataclass(frozen=True)
class CellClassification:
    safe: frozenset[Cell]
    fatal: frozenset[Cell]
    unknown: frozenset[Cell]


def new_kb(grid_size: int, num_pits: int, num_wumpus: int) -> KnowledgeBase:
    """A knowledge base holding only the game's placement rules."""
    kb = KnowledgeBase(grid_size=grid_size, num_pits=num_pits, num_wumpus=num_wumpus)
    _recompute(kb)
    return kb


def update_kb(kb: KnowledgeBase, cell: Cell, percept: Percept) -> KnowledgeBase:
    """Record the percept observed in ``cell`` and re-derive all candidates.

    Raises :class:`InconsistentPerceptsError` when no layout explains the
    records, which indicates an environment bug.
    """
    record = PerceptRecord(
        breeze=percept.breeze,
        stench=percept.stench,
        wumpus_alive=not kb.wumpus_known_dead,
    )
    out = replace(kb, records={**kb.records, cell: record})
    _recompute(out)
    return out


def record_shot(
    kb: KnowledgeBase, origin: Cell, direction: Direction, scream: bool
) -> KnowledgeBase:
    """Record an arrow shot and its outcome; a scream marks the wumpus dead."""
    shot = ShotRecord(origin=origin, direction=direction, scream=scream)
    out = replace(
        kb,
        shots=[*kb.shots, shot],
        wumpus_known_dead=kb.wumpus_known_dead or scream,
    )
    _recompute(out)
    return out


def mark_wumpus_dead(kb: KnowledgeBase) -> KnowledgeBase:
    out = replace(kb, wumpus_known_dead=True)
    _recompute(out)
    return out


def consistent_layouts(kb: KnowledgeBase) -> list[tuple[frozenset[Cell], Cell | None]]:
    """All (pit set, wumpus cell) pairs consistent with rules and records."""
    n = kb.grid_size
    cells = grid_cells(n)
    start_zone = safe_start_zone(n)
    visited = set(kb.records)

    # Necessary-condition prefilters; candidates are still fully verified.
    pit_pool = []
    for cell in cells:
        if cell in start_zone or cell in visited:
            continue
        if any(
            not kb.records[v].breeze
            for v in adjacent_cells(cell, n)
            if v in kb.records
        ):
            continue
        pit_pool.append(cell)

    wumpus_pool: list[Cell | None]
    if kb.num_wumpus:
        wumpus_pool = [
            c for c in cells if c not in start_zone and not _wumpus_excluded(kb, c)
        ]
    else:
        wumpus_pool = [None]

    layouts = []
    for pits in itertools.combinations(pit_pool, kb.num_pits):
        pit_set = frozenset(pits)
        if not _breezes_explained(kb, pit_set):
            continue
        for wumpus in wumpus_pool:
            if wumpus in pit_set:
                continue
            if _stench_consistent(kb, wumpus) and _shots_consistent(kb, wumpus):
                layouts.append((pit_set, wumpus))
    return layouts


def _wumpus_excluded(kb: KnowledgeBase, cell: Cell) -> bool:
    n = kb.grid_size
    for visited, record in kb.records.items():
        if not record.wumpus_alive:
            continue
        if visited == cell:
            return True  # agent survived this cell while the wumpus lived
        if not record.stench and cell in adjacent_cells(visited, n):
            return True
    return False


def _breezes_explained(kb: KnowledgeBase, pits: frozenset[Cell]) -> bool:
    n = kb.grid_size
    for cell, record in kb.records.items():
        has_breeze = any(c in pits for c in adjacent_cells(cell, n))
        if has_breeze != record.breeze:
            return False
    return True


def _stench_consistent(kb: KnowledgeBase, wumpus: Cell | None) -> bool:
    n = kb.grid_size
    for cell, record in kb.records.items():
        expected = (
            record.wumpus_alive
            and wumpus is not None
            and wumpus in adjacent_cells(cell, n)
        )
        if expected != record.stench:
            return False
        if record.wumpus_alive and wumpus == cell:
            return False
    return True


def _shots_consistent(kb: KnowledgeBase, wumpus: Cell | None) -> bool:
    for shot in kb.shots:
        on_path = wumpus is not None and wumpus in shoot_trajectory(
            shot.origin, shot.direction, kb.grid_size
        )
        if shot.scream != on_path:
            return False
    return True


def _recompute(kb: KnowledgeBase) -> None:
    layouts = consistent_layouts(kb)
    if not layouts:
        raise InconsistentPerceptsError(
            "no hazard layout is consistent with the recorded percepts"
        )
    cells = grid_cells(kb.grid_size)
    total = len(layouts)
    pit_counts = {c: 0 for c in cells}
    wumpus_counts = {c: 0 for c in cells}
    for pits, wumpus in layouts:
        for p in pits:
            pit_counts[p] += 1
        if wumpus is not None:
            wumpus_counts[wumpus] += 1

    def status(count: int) -> CandidateStatus:
        if count == 0:
            return CandidateStatus.IMPOSSIBLE
        if count == total:
            return CandidateStatus.CERTAIN
        return CandidateStatus.POSSIBLE

    kb.pit_candidates = {c: status(pit_counts[c]) for c in cells}
    kb.wumpus_candidates = {c: status(wumpus_counts[c]) for c in cells}
    kb.safe_cells = {
        c
        for c in cells
        if kb.pit_candidates[c] is CandidateStatus.IMPOSSIBLE
        and (
            kb.wumpus_known_dead
            or kb.wumpus_candidates[c] is CandidateStatus.IMPOSSIBLE
        )
    }


def classify_cells(kb: KnowledgeBase) -> CellClassification:
    """Partition the grid into provably safe, provably fatal and unknown."""
    cells = grid_cells(kb.grid_size)
    safe = frozenset(kb.safe_cells)
    fatal = frozenset(
        c
        for c in cells
        if kb.pit_candidates[c] is CandidateStatus.CERTAIN
        or (
            not kb.wumpus_known_dead
            and kb.wumpus_candidates[c] is CandidateStatus.CERTAIN
        )
    )
    unknown = frozenset(c for c in cells if c not in safe and c not in fatal)
    return CellClassification(safe=safe, fatal=fatal - safe, unknown=unknown)


def _direction_toward(origin: Cell, target: Cell) -> Direction | None:
    if origin.x == target.x:
        return Direction.UP if target.y > origin.y else Direction.DOWN
    if origin.y == target.y:
        return Direction.RIGHT if target.x > origin.x else Direction.LEFT
    return None


def oracle_policy(kb: KnowledgeBase, obs: Observation) -> Action:
    """Fixed priority rule: safest frontier move, else a certain kill shot,
    else exit. Gold is collected automatically on entry, so glitter never
    needs handling."""
    safe_frontier = [c for c in obs.suggestions.frontier_cells if c in kb.safe_cells]
    if safe_frontier:
        target = min(safe_frontier, key=sort_key)
        return Action.move(target.x, target.y)
    if obs.suggestions.shoot_options and not kb.wumpus_known_dead:
        certain = [
            c
            for c, status in kb.wumpus_candidates.items()
            if status is CandidateStatus.CERTAIN
        ]
        if len(certain) == 1:
            direction = _direction_toward(obs.current_position, certain[0])
            if direction is not None and certain[0] in shoot_trajectory(
                obs.current_position, direction, kb.grid_size
            ):
                return Action.shoot(direction)
    return Action.exit()


class OracleAgent:
    """Harness-facing wrapper: feeds observations into the knowledge base and
    plays :func:`oracle_policy`. One instance per episode."""

    def __init__(self, grid_size: int, num_pits: int, num_wumpus: int):
        self.kb = new_kb(grid_size, num_pits, num_wumpus)
        self._pending_shot: tuple[Cell, Direction] | None = None

    def decide(self, obs: Observation) -> Decision:
        if obs.arrow_status.scream_heard and not self.kb.wumpus_known_dead:
            self.kb = mark_wumpus_dead(self.kb)
        if self._pending_shot is not None:
            origin, direction = self._pending_shot
            self.kb = record_shot(
                self.kb, origin, direction, obs.arrow_status.scream_heard
            )
            self._pending_shot = None
        pos = obs.current_position
        if pos not in self.kb.records:
            percept = Percept(
                breeze=pos in obs.breeze_locations,
                stench=pos in obs.stench_locations,
                glitter=False,
            )
            self.kb = update_kb(self.kb, pos, percept)
        action = oracle_policy(self.kb, obs)
        if action.kind is ActionKind.SHOOT:
            self._pending_shot = (pos, action.direction)
        return Decision(action=action, provenance="oracle")


def full_info_solvable(world: WorldState) -> bool:
    """Whether the gold is reachable alive given full knowledge of the layout.

    Breadth-first flood fill over frontier moves: the region explorable
    without entering a pit or the live wumpus is the connected component of
    the start cell. One optional shot, fired from any cell of that component
    sharing a row or column with the wumpus, removes the wumpus before the
    fill is repeated.
    """
    gold = world.gold_cell
    if gold is None:
        return True
    n = world.config.grid_size
    pits = world.pit_cells
    wumpus = world.wumpus_cell if world.wumpus_alive else None

    def component(blocked: frozenset[Cell]) -> set[Cell]:
        seen = {START_CELL}
        queue = deque([START_CELL])
        while queue:
            cell = queue.popleft()
            for neighbor in adjacent_cells(cell, n):
                if neighbor not in seen and neighbor not in blocked:
                    seen.add(neighbor)
                    queue.append(neighbor)
        return seen

    blocked = pits | ({wumpus} if wumpus else frozenset())
    reach = component(frozenset(blocked))
    if gold in reach:
        return True
    if wumpus is not None and any(
        c.x == wumpus.x or c.y == wumpus.y for c in reach
    ):
        return gold in component(pits)
    return False
