"""Command-line interface.

Subcommands:

* ``run`` - execute a trial matrix with an oracle, model-driven or scripted
  agent and append episode records to a JSONL log.
* ``replay`` - re-simulate one logged episode and print its board frames.
* ``summarize`` - aggregate a log into the metrics table.
* ``mock-serve`` - serve a scripted chat endpoint for offline runs.

API credentials are read only from the environment (``WUMPUSBENCH_API_KEY``,
falling back to ``OPENAI_API_KEY``), never from flags or config files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .agents import ScriptedAgent
from .chat import ChatClient
from .errors import SummaryError, WumpusBenchError
from .harness import (
    EpisodeRecord,
    TrialMatrix,
    default_matrix,
    matrix_from_dict,
    read_records,
    render_frames,
    run_trials,
    verify_record,
    write_records,
)
from .llm import (
    LlmAgent,
    MECHANISM_COS,
    MECHANISM_COT,
    MECHANISM_PLANNER_CRITIC,
)
from .metrics import price_table_from_dict, summarize
from .mockserver import script_from_json, serve_mock
from .oracle import OracleAgent
from .planner_critic import ArbitrationConfig, PlannerCriticAgent


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _build_matrix(args, config: dict) -> TrialMatrix:
    if args.matrix and args.matrix != "default":
        return matrix_from_dict(_load_json(args.matrix))
    if "matrix" in config:
        return matrix_from_dict(config["matrix"])
    return default_matrix(master_seed=args.seed, step_limit=args.step_limit)


def _agent_factory(args, config: dict):
    mechanism = (args.mechanism or config.get("mechanism", MECHANISM_COS)).replace(
        "-", "_"
    )
    if args.agent == "oracle":
        return (
            lambda cfg: OracleAgent(cfg.grid_size, cfg.num_pits, cfg.num_wumpus),
            None,
            {},
        )
    if args.agent == "scripted":
        if not args.actions:
            raise SystemExit("--actions FILE is required with --agent scripted")
        script = _load_json(args.actions)
        return lambda cfg: ScriptedAgent(list(script)), None, {}

    endpoint = args.endpoint or config.get("endpoint")
    model = args.model or config.get("model")
    if not endpoint or not model:
        raise SystemExit("--endpoint and --model are required with --agent llm")
    temperature = (
        args.temperature
        if args.temperature is not None
        else float(config.get("temperature", 0.0))
    )

    def make_client(name: str) -> ChatClient:
        return ChatClient(endpoint, name, temperature=temperature)

    if mechanism == MECHANISM_PLANNER_CRITIC:
        critic_model = args.critic_model or config.get("critic_model") or model
        threshold = (
            args.critic_threshold
            if args.critic_threshold is not None
            else float(config.get("critic_threshold", 0.7))
        )

        def factory(cfg):
            planner = make_client(model)
            critic = make_client(critic_model) if critic_model != model else planner
            return PlannerCriticAgent(
                planner,
                cfg.grid_size,
                critic_client=critic,
                arbitration=ArbitrationConfig(threshold=threshold),
            )

        return factory, mechanism, {"planner": model, "critic": critic_model}

    if mechanism not in (MECHANISM_COT, MECHANISM_COS):
        raise SystemExit(f"unknown mechanism {mechanism!r}")

    def factory(cfg):
        return LlmAgent(make_client(model), cfg.grid_size, mechanism=mechanism)

    return factory, mechanism, {"model": model}


def cmd_run(args) -> int:
    config = _load_json(args.config) if args.config else {}
    matrix = _build_matrix(args, config)
    factory, mechanism, models = _agent_factory(args, config)
    total = matrix.total_trials()
    done = 0

    def progress(record: EpisodeRecord) -> None:
        nonlocal done
        done += 1
        print(
            f"[{done}/{total}] {record.condition} seed={record.seed} "
            f"status={record.status} score={record.score}",
            file=sys.stderr,
        )

    records = run_trials(
        matrix,
        factory,
        agent_kind=args.agent,
        mechanism=mechanism,
        models=models,
        parallelism=args.parallelism,
        on_episode=progress if not args.quiet else None,
    )
    if args.out:
        write_records(args.out, records)
        print(f"wrote {len(records)} episode records to {args.out}", file=sys.stderr)
    prices = price_table_from_dict(config.get("prices", {}))
    try:
        print(summarize(records, prices).format_text())
    except SummaryError:
        failures = sum(r.status == "protocol_failure" for r in records)
        print(f"no completed episodes to summarize ({failures} protocol failures)")
    return 0


def cmd_replay(args) -> int:
    records = read_records(args.log)
    if not 0 <= args.episode < len(records):
        raise SystemExit(f"episode index {args.episode} out of range 0..{len(records) - 1}")
    record = records[args.episode]
    if not args.no_verify:
        verify_record(record)
    print(
        f"episode {args.episode}: {record.condition or 'ad hoc'} seed={record.seed} "
        f"agent={record.agent_kind} status={record.status} score={record.score}"
    )
    for frame in render_frames(record):
        print()
        print(frame)
    return 0


def cmd_summarize(args) -> int:
    records = read_records(args.log)
    prices = None
    if args.prices:
        prices = price_table_from_dict(_load_json(args.prices))
    print(summarize(records, prices).format_text())
    return 0


def cmd_mock_serve(args) -> int:
    script = script_from_json(_load_json(args.script))
    server = serve_mock(script, port=args.port)
    print(f"mock chat endpoint at {server.url} ({len(script)} scripted replies)")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        server.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wumpusbench",
        description="Wumpus-World benchmark harness for LLM decision-making agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a trial matrix")
    run.add_argument("--config", help="JSON config file (endpoint, model, prices, ...)")
    run.add_argument(
        "--agent", choices=["oracle", "llm", "scripted"], default="oracle"
    )
    run.add_argument(
        "--mechanism",
        choices=["cot", "cos", "planner-critic"],
        help="prompting mechanism for --agent llm (default cos)",
    )
    run.add_argument("--endpoint", help="chat-completions URL")
    run.add_argument("--model", help="model name")
    run.add_argument("--critic-model", help="critic model (defaults to --model)")
    run.add_argument("--critic-threshold", type=float, help="arbitration threshold")
    run.add_argument("--temperature", type=float, help="sampling temperature")
    run.add_argument(
        "--matrix", help="matrix JSON file, or 'default' for the standard six conditions"
    )
    run.add_argument("--seed", type=int, default=0, help="master seed for trial seeds")
    run.add_argument("--step-limit", type=int, default=50)
    run.add_argument("--actions", help="JSON action list for --agent scripted")
    run.add_argument("--parallelism", type=int, default=1)
    run.add_argument("--out", help="append episode records to this JSONL file")
    run.add_argument("--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    replay = sub.add_parser("replay", help="render one logged episode")
    replay.add_argument("--log", required=True)
    replay.add_argument("--episode", type=int, default=0)
    replay.add_argument("--no-verify", action="store_true")
    replay.set_defaults(func=cmd_replay)

    summ = sub.add_parser("summarize", help="aggregate a log into metrics")
    summ.add_argument("--log", required=True)
    summ.add_argument("--prices", help="price table JSON file")
    summ.set_defaults(func=cmd_summarize)

    mock = sub.add_parser("mock-serve", help="serve a scripted chat endpoint")
    mock.add_argument("--script", required=True, help="JSON reply script")
    mock.add_argument("--port", type=int, default=8099)
    mock.set_defaults(func=cmd_mock_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WumpusBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
