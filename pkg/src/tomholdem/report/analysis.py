"""Whole-run analysis: tables, headline tests, validation and trajectory data.

Everything here is a pure function of a run directory (logs plus memory
snapshots), so repeated analyses write byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agents.policies import default_chart
from ..experiment.io import MissingLog, load_run
from ..experiment.runner import Condition, SessionLog
from ..metrics.deception import BLUFF_THRESHOLD, DeceptionEvent, classify_deception, tier_rates
from ..metrics.player import AF_UNDEFINED, compute_player_stats, chip_spread
from ..metrics.ranking import TagChart
from ..metrics.validation import (
    InsufficientData,
    NoLabeledPairs,
    adaptation_score,
    before_after_shift,
    label_accuracy,
    null_simulations,
)
from ..stats import StatsError, cliffs_delta, fishers_exact, mann_whitney_exact
from ..tomcoder.coder import CodedSnapshot, code_run, code_snapshot

BIN_WIDTH = 5
INSUFFICIENT_GROUPS = "insufficient groups"


class MissingData(FileNotFoundError):
    pass


@dataclass
class SessionRow:
    session_id: str
    condition: str
    replication: int
    hands: int
    termination: str
    max_tom: int
    mean_tom_nonzero: float
    tag_adherence: float | None
    tier1_rate: float
    tier2_rate: float
    tier1_hands: int
    tier2_hands: int
    chip_spread: int


@dataclass
class ReportBundle:
    sessions: list[SessionRow]
    table1: list[dict]
    table2: list[dict]
    headline_tests: list[dict]
    trajectory: list[dict]
    player_rows: list[dict]
    events: list[DeceptionEvent]
    coded: list[CodedSnapshot]
    validation: dict
    notices: list[str] = field(default_factory=list)


def _replication(session_id: str) -> int:
    return int(session_id.rsplit("-", 1)[1])


def _mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    """Replication-level mean and sample SD (ddof=1); SD is None for one value."""
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else None
    return float(np.mean(vals)), sd


def _condition_order(rows) -> list[str]:
    present = {r.condition for r in rows}
    return [c.value for c in Condition if c.value in present]


def analyze_session(log: SessionLog, snapshots, chart: TagChart, threshold: float):
    coded = [code_snapshot(s) for s in snapshots]
    traj = code_run(coded, hands=log.target_hands, bin_width=BIN_WIDTH)
    events = classify_deception(log, snapshots, threshold)
    rates = tier_rates(events, len(log.hands))
    players = []
    for name in log.names:
        st = compute_player_stats(log, name, chart)
        players.append({
            "session_id": log.session_id,
            "condition": log.condition.value,
            "agent": name,
            "policy": log.policy_of(name).value,
            "hands": st.hands,
            "vpip": st.vpip,
            "pfr": st.pfr,
            "af": "inf" if st.af == AF_UNDEFINED else st.af,
            "tag_adherence": st.tag_adherence,
            "chip_delta": st.chip_delta,
        })
    adherence = [p["tag_adherence"] for p in players if p["tag_adherence"] is not None]
    row = SessionRow(
        session_id=log.session_id,
        condition=log.condition.value,
        replication=_replication(log.session_id),
        hands=len(log.hands),
        termination=log.termination.value,
        max_tom=traj.session_max,
        mean_tom_nonzero=traj.mean_level_nonzero,
        tag_adherence=float(np.mean(adherence)) if adherence else None,
        tier1_rate=rates[1],
        tier2_rate=rates[2],
        tier1_hands=len({e.hand_id for e in events if e.tier == 1}),
        tier2_hands=len({e.hand_id for e in events if e.tier == 2}),
        chip_spread=chip_spread(log),
    )
    return row, coded, traj, events, players


def _tables(rows: list[SessionRow]) -> tuple[list[dict], list[dict]]:
    t1, t2 = [], []
    for cond in _condition_order(rows):
        rs = [r for r in rows if r.condition == cond]
        c = Condition(cond)
        entry = {"condition": cond, "memory": c.memory, "skill": c.skill, "sessions": len(rs)}
        for key in ("max_tom", "tag_adherence", "tier2_rate", "chip_spread"):
            mean, sd = _mean_sd([getattr(r, key) for r in rs])
            entry[f"{key}_mean"], entry[f"{key}_sd"] = mean, sd
        t1.append(entry)
        hands = sum(r.hands for r in rs)
        e2 = {"condition": cond, "sessions": len(rs), "hands": hands}
        for tier in (1, 2):
            mean, sd = _mean_sd([getattr(r, f"tier{tier}_rate") for r in rs])
            e2[f"tier{tier}_mean"], e2[f"tier{tier}_sd"] = mean, sd
            e2[f"tier{tier}_hands"] = sum(getattr(r, f"tier{tier}_hands") for r in rs)
        t2.append(e2)
    return t1, t2


def _test_entry(name: str, result=None, *, notice: str | None = None, **extra) -> dict:
    out = {"test": name}
    if result is not None:
        out.update(result.to_dict())
    if notice:
        out["notice"] = notice
    out.update(extra)
    return out


def headline_tests(rows: list[SessionRow]) -> tuple[list[dict], list[str]]:
    notices = []
    mem = [r for r in rows if Condition(r.condition).memory]
    nomem = [r for r in rows if not Condition(r.condition).memory]
    skill = [r for r in rows if Condition(r.condition).skill]
    noskill = [r for r in rows if not Condition(r.condition).skill]
    tests = []

    def two_groups(name, a, b, run):
        if not a or not b:
            tests.append(_test_entry(name, notice=INSUFFICIENT_GROUPS))
            notices.append(f"{name}: skipped, {INSUFFICIENT_GROUPS}")
            return
        try:
            run()
        except StatsError as exc:
            tests.append(_test_entry(name, notice=f"not computable: {exc}"))

    # The memory contrast holds skill fixed (Full vs NoMemory) when both are
    # present, and otherwise pools every memory condition against every
    # memoryless one.
    full = [r for r in rows if r.condition == Condition.Full.value]
    nomem_skill = [r for r in rows if r.condition == Condition.NoMemory.value]
    if full and nomem_skill:
        tom_a, tom_b, tom_label = full, nomem_skill, "Full vs NoMemory"
    else:
        tom_a, tom_b, tom_label = mem, nomem, "memory vs no memory"

    def tom():
        a, b = [r.max_tom for r in tom_a], [r.max_tom for r in tom_b]
        tests.append(_test_entry(f"max ToM, {tom_label}: Mann-Whitney U", mann_whitney_exact(a, b)))
        tests.append(_test_entry(f"max ToM, {tom_label}: Cliff's delta", cliffs_delta(a, b)))

    def tag():
        a = [r.tag_adherence for r in skill if r.tag_adherence is not None]
        b = [r.tag_adherence for r in noskill if r.tag_adherence is not None]
        tests.append(_test_entry("TAG adherence, skill vs no skill: Mann-Whitney U", mann_whitney_exact(a, b)))
        tests.append(_test_entry("TAG adherence, skill vs no skill: Cliff's delta", cliffs_delta(a, b)))

    def fisher(name, a, b, tier):
        def run():
            ka, na = sum(getattr(r, f"tier{tier}_hands") for r in a), sum(r.hands for r in a)
            kb, nb = sum(getattr(r, f"tier{tier}_hands") for r in b), sum(r.hands for r in b)
            table = [[ka, na - ka], [kb, nb - kb]]
            tests.append(_test_entry(name, fishers_exact(table), table=table))
        return run

    two_groups(f"max ToM, {tom_label}", tom_a, tom_b, tom)
    two_groups("TAG adherence, skill vs no skill", skill, noskill, tag)
    two_groups("Tier-2 hands, memory vs no memory: Fisher exact", mem, nomem,
               fisher("Tier-2 hands, memory vs no memory: Fisher exact", mem, nomem, 2))
    nosk = [r for r in rows if r.condition == Condition.NoSkill.value]
    two_groups("Tier-1 hands, Full vs NoSkill: Fisher exact", full, nosk,
               fisher("Tier-1 hands, Full vs NoSkill: Fisher exact", full, nosk, 1))
    return tests, notices


def _trajectory(rows: list[SessionRow], trajs: dict) -> list[dict]:
    out = []
    for cond in _condition_order(rows):
        sids = sorted(r.session_id for r in rows if r.condition == cond)
        n_bins = max(len(trajs[s].bins) for s in sids)
        for b in range(n_bins):
            levels = [trajs[s].bins[b][2] if b < len(trajs[s].bins) else trajs[s].bins[-1][2] for s in sids]
            mean, sd = _mean_sd(levels)
            out.append({"hand_bin": (b + 1) * BIN_WIDTH, "condition": cond, "mean": mean,
                        "sd": sd if sd is not None else 0.0})
    return out


def _guarded(fn, *args, **kwargs) -> dict:
    try:
        return fn(*args, **kwargs).to_dict()
    except (InsufficientData, NoLabeledPairs, StatsError) as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _validation(run, coded: list[CodedSnapshot], permutations: int) -> dict:
    mem_logs = [log for log, _ in run if log.condition.memory]
    ctl_logs = [log for log, _ in run if not log.condition.memory]
    snaps = [s for log, ss in run if log.condition.memory for s in ss]
    out = {
        "adaptation": _guarded(adaptation_score, mem_logs, ctl_logs),
        "adaptation_heads_up_only": _guarded(adaptation_score, mem_logs, ctl_logs, heads_up_only=True),
        "before_after_shift": _guarded(before_after_shift, mem_logs, coded, ctl_logs),
        "label_accuracy": _guarded(label_accuracy, mem_logs, snaps),
    }
    try:
        adapt = adaptation_score(mem_logs, ctl_logs)
        mem_scores, ctl_scores = adapt.memory_scores, adapt.control_scores
    except (InsufficientData, StatsError):
        mem_scores, ctl_scores = [], []
    try:
        labels = label_accuracy(mem_logs, snaps).labels
    except InsufficientData:
        labels = []
    out["null_simulations"] = null_simulations(mem_scores, ctl_scores, labels, permutations).to_dict()
    return out


def analyze_run(run_dir: Path | str, threshold: float = BLUFF_THRESHOLD, permutations: int = 1000) -> ReportBundle:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise MissingData(f"{run_dir}: no such run directory")
    try:
        run = load_run(run_dir)
    except MissingLog as exc:
        raise MissingData(str(exc)) from exc
    chart = default_chart()
    rows, coded, events, players, trajs = [], [], [], [], {}
    for log, snaps in run:
        row, c, traj, ev, pl = analyze_session(log, snaps, chart, threshold)
        rows.append(row)
        coded.extend(c)
        events.extend(ev)
        players.extend(pl)
        trajs[log.session_id] = traj
    t1, t2 = _tables(rows)
    tests, notices = headline_tests(rows)
    return ReportBundle(
        sessions=rows,
        table1=t1,
        table2=t2,
        headline_tests=tests,
        trajectory=_trajectory(rows, trajs),
        player_rows=players,
        events=events,
        coded=coded,
        validation=_validation(run, [c for c in coded], permutations),
        notices=notices,
    )


# -- writing -----------------------------------------------------------------


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return f"{v:.6g}"
    return v


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in columns})
    return buf.getvalue()


SESSION_COLUMNS = list(SessionRow.__dataclass_fields__)
TABLE1_COLUMNS = ["condition", "memory", "skill", "sessions", "max_tom_mean", "max_tom_sd", "tag_adherence_mean",
                  "tag_adherence_sd", "tier2_rate_mean", "tier2_rate_sd", "chip_spread_mean", "chip_spread_sd"]
TABLE2_COLUMNS = ["condition", "sessions", "hands", "tier1_mean", "tier1_sd", "tier1_hands", "tier2_mean",
                  "tier2_sd", "tier2_hands"]
METRICS_COLUMNS = ["session_id", "condition", "agent", "policy", "hands", "vpip", "pfr", "af", "tag_adherence",
                   "chip_delta"]
DECEPTION_COLUMNS = ["session_id", "hand_id", "actor", "target", "tier", "hand_class", "equity", "street",
                     "cited_note", "note_hand"]
TRAJECTORY_COLUMNS = ["hand_bin", "condition", "mean", "sd"]


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _markdown(bundle: ReportBundle) -> str:
    lines = ["# Run report", "", "## Key metrics by condition", "",
             "| Condition | Memory | Skill | Max ToM | TAG adherence | Tier-2 rate | Chip spread |",
             "|---|---|---|---|---|---|---|"]

    def pm(mean, sd, digits=2):
        if mean is None:
            return "n/a"
        return f"{mean:.{digits}f} ± {sd:.{digits}f}" if sd is not None else f"{mean:.{digits}f}"

    for t in bundle.table1:
        lines.append(
            f"| {t['condition']} | {'yes' if t['memory'] else 'no'} | {'yes' if t['skill'] else 'no'} | "
            f"{pm(t['max_tom_mean'], t['max_tom_sd'], 1)} | {pm(t['tag_adherence_mean'], t['tag_adherence_sd'])} | "
            f"{pm(t['tier2_rate_mean'], t['tier2_rate_sd'], 3)} | {pm(t['chip_spread_mean'], t['chip_spread_sd'], 0)} |"
        )
    lines += ["", "## Deception tiers (share of hands)", "", "| Condition | Tier 1 | Tier 2 |", "|---|---|---|"]
    for t in bundle.table2:
        lines.append(f"| {t['condition']} | {pm(t['tier1_mean'], t['tier1_sd'], 3)} | "
                     f"{pm(t['tier2_mean'], t['tier2_sd'], 3)} |")
    lines += ["", "## Headline tests", ""]
    for t in bundle.headline_tests:
        if "notice" in t:
            lines.append(f"- {t['test']}: {t['notice']}")
        else:
            ci = t.get("ci95")
            ci_txt = f", 95% CI [{ci[0]:.3f}, {ci[1]:.3f}]" if ci else ""
            lines.append(f"- {t['test']}: statistic {t['statistic']:.4g}, p = {t['p_two_tailed']:.4g}{ci_txt}")
    lines += ["", "## Behavioral validation", "", "```json", json.dumps(bundle.validation, indent=2, sort_keys=True),
              "```", ""]
    return "\n".join(lines)


def write_bundle(bundle: ReportBundle, out_dir: Path | str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "sessions.csv": _csv([r.__dict__ for r in bundle.sessions], SESSION_COLUMNS),
        "table1.csv": _csv(bundle.table1, TABLE1_COLUMNS),
        "table2.csv": _csv(bundle.table2, TABLE2_COLUMNS),
        "metrics.csv": _csv(bundle.player_rows, METRICS_COLUMNS),
        "deception.csv": _csv([e.to_dict() for e in bundle.events], DECEPTION_COLUMNS),
        "trajectory.csv": _csv(bundle.trajectory, TRAJECTORY_COLUMNS),
        "tests.json": _json({"tests": bundle.headline_tests, "notices": bundle.notices}),
        "validation.json": _json(bundle.validation),
        "coded.jsonl": "".join(json.dumps(c.to_dict(), sort_keys=True) + "\n" for c in bundle.coded),
        "report.md": _markdown(bundle),
    }
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
