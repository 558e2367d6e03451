"""Command-line entry point: ``tomholdem {run,audit,analyze,report,serve}``.

Exit codes: 0 success, 1 audit or analysis failure, 2 usage or config error.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Command-line flags override file values.  Recognized keys::

    condition       full | noskill | nomemory | baseline | all   (default all)
    replications    sessions per condition                        (default 5)
    hands           hands per session                             (default 100)
    seed            master seed                                   (default 0)
    small_blind     (default 50)
    big_blind       (default 100)
    starting_stack  (default 10000)
    output          run directory                                 (default runs)
    agents          comma-separated seat names                    (default Doyle,Stu,Vanessa)
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .experiment import Condition, ExperimentConfig, WorkspaceNotClean, audit_run, clean_workspace, run_factorial
from .experiment.io import MissingLog
from .metrics.deception import BLUFF_THRESHOLD
from .protocol import DEFAULT_AGENTS, DEFAULT_PORT, PortUnavailable, SessionConfig, serve
from .report import MissingData, analyze_run, render_figures, write_bundle

log = logging.getLogger("tomholdem")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


# Value converters shared by the config parser and argparse.  They raise
# ArgumentTypeError so argparse prints the message itself.


def _condition_or_all(text: str):
    if text.strip().lower() == "all":
        return "all"
    try:
        return Condition.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None


def _positive_int(text: str) -> int:
    value = _int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _agents(text: str) -> tuple[str, ...]:
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    if len(names) != 3 or len(set(names)) != 3:
        raise argparse.ArgumentTypeError("expected three distinct comma-separated names")
    return names


CONFIG_KEYS = {
    "condition": _condition_or_all,
    "replications": _positive_int,
    "hands": _positive_int,
    "seed": _int,
    "small_blind": _positive_int,
    "big_blind": _positive_int,
    "starting_stack": _positive_int,
    "output": Path,
    "agents": _agents,
}

DEFAULTS = {
    "condition": "all",
    "replications": 5,
    "hands": 100,
    "seed": 0,
    "small_blind": 50,
    "big_blind": 100,
    "starting_stack": 10_000,
    "output": Path("runs"),
    "agents": tuple(DEFAULT_AGENTS),
}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; errors name the file and line."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}: {raw.strip()!r}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r} (known: {', '.join(sorted(CONFIG_KEYS))})")
        if key in out:
            raise ConfigError(f"{where}: {key!r} set twice")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except argparse.ArgumentTypeError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc
    return out


def load_config(path: Path | str) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    return parse_config(text, str(path))


@dataclass
class RunSettings:
    conditions: list[Condition]
    config: ExperimentConfig


def resolve_run_settings(args: argparse.Namespace) -> RunSettings:
    settings = dict(DEFAULTS)
    if args.config:
        settings.update(load_config(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    conds = list(Condition) if settings["condition"] == "all" else [settings["condition"]]
    cfg = ExperimentConfig(
        condition=conds[0],
        replications=settings["replications"],
        hands_per_session=settings["hands"],
        small_blind=settings["small_blind"],
        big_blind=settings["big_blind"],
        starting_stack=settings["starting_stack"],
        master_seed=settings["seed"],
        output_dir=settings["output"],
        agents=settings["agents"],
    )
    return RunSettings(conds, cfg)


def _print_audit(reports) -> bool:
    ok = True
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.session_id}: {r.hands_completed}/{r.target_hands} hands, "
              f"memory artifacts {'found' if r.memory_artifacts_found else 'none'}"
              + (f" ({r.detail})" if r.detail else ""))
        ok &= r.passed
    return ok


def cmd_run(args) -> int:
    try:
        rs = resolve_run_settings(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.clean:
        clean_workspace(rs.config.output_dir)
    try:
        logs = run_factorial(rs.config, rs.conditions)
    except WorkspaceNotClean as exc:
        print(f"error: {exc} (rerun with --clean)", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {len(logs)} sessions to {rs.config.output_dir}")
    ok = _print_audit(audit_run(rs.config.output_dir))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_audit(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        print(f"error: {run_dir}: no such run directory", file=sys.stderr)
        return EXIT_USAGE
    try:
        reports = audit_run(run_dir)
    except MissingLog as exc:
        print(f"FAIL {exc}")
        return EXIT_FAIL
    if not reports:
        print(f"error: {run_dir}: no sessions found", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if _print_audit(reports) else EXIT_FAIL


def _analyze(args, figures: bool) -> int:
    out = Path(args.out) if args.out else Path(args.run_dir) / "analysis"
    try:
        bundle = analyze_run(args.run_dir, threshold=args.bluff_threshold, permutations=args.permutations)
    except (MissingData, MissingLog) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    paths = write_bundle(bundle, out)
    if figures:
        paths += render_figures(bundle, out)
    for notice in bundle.notices:
        print(f"notice: {notice}")
    print(f"wrote {len(paths)} files to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    return _analyze(args, figures=False)


def cmd_report(args) -> int:
    return _analyze(args, figures=True)


def cmd_serve(args) -> int:
    cfg = SessionConfig(
        agents=list(args.agents),
        session_seed=args.session_seed,
        hands=args.hands,
        timeout_secs=args.timeout_secs,
        host=args.host,
        port=args.port,
    )
    try:
        handle = serve(cfg)
    except PortUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"serving {', '.join(cfg.agents)} on {handle.host}:{handle.port}")
    try:
        handle.wait()
    except KeyboardInterrupt:
        pass
    finally:
        handle.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tomholdem", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play sessions and write logs, snapshots, manifest and audit")
    run.add_argument("--config", help="key = value config file (flags override it)")
    run.add_argument("--condition", type=_condition_or_all, help="full, noskill, nomemory, baseline or all")
    run.add_argument("--replications", type=_positive_int)
    run.add_argument("--hands", type=_positive_int, help="hands per session")
    run.add_argument("--seed", type=_int, help="master seed")
    run.add_argument("--small-blind", dest="small_blind", type=_positive_int)
    run.add_argument("--big-blind", dest="big_blind", type=_positive_int)
    run.add_argument("--starting-stack", dest="starting_stack", type=_positive_int)
    run.add_argument("--output", type=Path, help="run directory")
    run.add_argument("--agents", type=_agents, help="three comma-separated seat names")
    run.add_argument("--clean", action="store_true", help="clear the run directory first")
    run.set_defaults(func=cmd_run)

    audit = sub.add_parser("audit", help="check every session for contamination and hand counts")
    audit.add_argument("run_dir")
    audit.set_defaults(func=cmd_audit)

    for name, func, text in (("analyze", cmd_analyze, "write tables, metrics, validation and trajectory data"),
                             ("report", cmd_report, "analyze, then render PNG figures beside the data")):
        a = sub.add_parser(name, help=text)
        a.add_argument("run_dir")
        a.add_argument("--out", help="output directory (default RUN_DIR/analysis)")
        a.add_argument("--bluff-threshold", type=float, default=BLUFF_THRESHOLD,
                       help="equity below which a bet or raise counts as a bluff")
        a.add_argument("--permutations", type=_positive_int, default=1000, help="null-simulation permutations")
        a.set_defaults(func=func)

    s = sub.add_parser("serve", help="host one session for external agents over the JSON wire protocol")
    s.add_argument("--port", type=int, default=DEFAULT_PORT)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--timeout-secs", type=float, default=30.0, help="turn timeout before an automatic fold")
    s.add_argument("--session-seed", type=int, default=0)
    s.add_argument("--hands", type=_positive_int, default=100)
    s.add_argument("--agents", type=_agents, default=tuple(DEFAULT_AGENTS))
    s.set_defaults(func=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
