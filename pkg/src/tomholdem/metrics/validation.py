"""Behavioral validation of written opponent models.

Three checks: do memory agents vary their aggression by opponent more than
memoryless ones (adaptation), does behavior toward an opponent shift after
the first label about them (before/after shift), and do labels point the
way the labeled player actually deviates (label accuracy).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml

from ..engine.table import ActionKind, Street
from ..rng import SplitMix64
from ..stats import (ConstantInput, StatsError, TestResult, binomial_test, cohens_d, cohens_d_test, midranks,
                     spearman)
from .player import compute_player_stats

AGGRESSIVE = (ActionKind.Bet, ActionKind.Raise)


class InsufficientData(ValueError):
    pass


class NoLabeledPairs(ValueError):
    pass


class UnmappableLabel(ValueError):
    pass


# -- per-decision attribution --------------------------------------------------


@dataclass(frozen=True)
class Decision:
    hand_id: int
    kind: ActionKind
    opponents: tuple[str, ...]  # live opponents in the pot when acting
    facing_aggression: bool
    size: float  # chips put in divided by the pot before, for bets and raises


def decisions(log, agent: str) -> list[Decision]:
    out = []
    for h in log.hands:
        if agent not in h.hole_cards:
            continue
        folded: set[str] = set()
        aggr_on: set[Street] = set()
        for r in h.action_log:
            if r.kind == ActionKind.PostBlind:
                continue
            if r.actor == agent:
                live = tuple(n for n in h.hole_cards if n != agent and n not in folded)
                size = r.amount / r.pot_before if r.kind in AGGRESSIVE and r.pot_before else 0.0
                out.append(Decision(h.hand_id, r.kind, live, r.street in aggr_on and r.to_call_before > 0, size))
            if r.kind == ActionKind.Fold:
                folded.add(r.actor)
            if r.kind in AGGRESSIVE:
                aggr_on.add(r.street)
    return out


def _against(ds: list[Decision], opp: str, heads_up_only: bool) -> list[Decision]:
    return [d for d in ds if opp in d.opponents and (not heads_up_only or len(d.opponents) == 1)]


def raise_rate(ds: list[Decision]) -> float:
    return sum(d.kind in AGGRESSIVE for d in ds) / len(ds) if ds else 0.0


def bet_sizing(ds: list[Decision]) -> float:
    sizes = [d.size for d in ds if d.kind in AGGRESSIVE]
    return float(np.mean(sizes)) if sizes else 0.0


def fold_to_raise(ds: list[Decision]) -> float:
    facing = [d for d in ds if d.facing_aggression]
    return sum(d.kind == ActionKind.Fold for d in facing) / len(facing) if facing else 0.0


# -- adaptation ----------------------------------------------------------------


def agent_adaptation(log, agent: str, heads_up_only: bool = False) -> float | None:
    """Population SD of the agent's raise rate across its opponents."""
    ds = decisions(log, agent)
    rates = []
    for opp in log.names:
        if opp == agent:
            continue
        mine = _against(ds, opp, heads_up_only)
        if mine:
            rates.append(raise_rate(mine))
    return float(np.std(rates)) if len(rates) >= 2 else None


def adaptation_scores(logs, heads_up_only: bool = False) -> list[float]:
    out = []
    for log in logs:
        for agent in log.names:
            score = agent_adaptation(log, agent, heads_up_only)
            if score is not None:
                out.append(score)
    return out


@dataclass
class AdaptationResult:
    d: float
    test: TestResult | None
    memory_scores: list[float]
    control_scores: list[float]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "test": self.test.to_dict() if self.test else None,
            "memory_mean": float(np.mean(self.memory_scores)),
            "control_mean": float(np.mean(self.control_scores)),
            "n_memory": len(self.memory_scores),
            "n_control": len(self.control_scores),
        }


def adaptation_score(memory_logs, control_logs, heads_up_only: bool = False, resamples: int = 10_000,
                     seed: int = 42) -> AdaptationResult:
    """Cohen's d of per-agent adaptation scores, memory group minus control."""
    if len(memory_logs) < 2 or len(control_logs) < 2:
        raise InsufficientData("need at least two sessions per group")
    mem = adaptation_scores(memory_logs, heads_up_only)
    ctl = adaptation_scores(control_logs, heads_up_only)
    if len(mem) < 2 or len(ctl) < 2:
        raise InsufficientData("too few agents with two or more opponents")
    if mem == ctl:
        return AdaptationResult(0.0, None, mem, ctl)
    test = cohens_d_test(mem, ctl, resamples=resamples, seed=seed)
    return AdaptationResult(test.statistic, test, mem, ctl)


# -- before/after shift ----------------------------------------------------------


def first_label_hands(coded, min_level: int = 2) -> dict[tuple[str, str, str], int]:
    """(session, agent, opponent) -> first hand whose snapshot codes the opponent at ``min_level`` or above."""
    first: dict[tuple[str, str, str], int] = {}
    for c in sorted(coded, key=lambda c: (c.session_id, c.hand_id, c.agent)):
        for opp, lv in c.per_opponent.items():
            key = (c.session_id, c.agent, opp)
            if lv >= min_level and key not in first:
                first[key] = c.hand_id
    return first


def _segment_metrics(ds: list[Decision]) -> np.ndarray:
    return np.array([raise_rate(ds), bet_sizing(ds), fold_to_raise(ds)])


def _split_deltas(log, agent: str, opp: str, split: int) -> np.ndarray | None:
    ds = _against(decisions(log, agent), opp, False)
    before = [d for d in ds if d.hand_id <= split]
    after = [d for d in ds if d.hand_id > split]
    if not before or not after:
        return None
    return np.stack([_segment_metrics(before), _segment_metrics(after)])


@dataclass
class ShiftResult:
    composite_memory: float
    composite_control: float
    shift_d: float | None
    memory_pairs: list[float] = field(default_factory=list)
    control_pairs: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "composite_shift_memory": self.composite_memory,
            "composite_shift_control": self.composite_control,
            "shift_d": self.shift_d,
            "n_memory_pairs": len(self.memory_pairs),
            "n_control_pairs": len(self.control_pairs),
        }


def _composites(segments: list[np.ndarray], scale: np.ndarray) -> list[float]:
    return [float(np.mean(np.abs(s[1] - s[0]) / scale)) for s in segments]


def before_after_shift(memory_logs, coded, control_logs) -> ShiftResult:
    """Composite |change| in raise rate, bet sizing and fold-to-raise around the first label.

    Each metric is scaled by its standard deviation over every segment in the
    analysis (memory and control together) before averaging.  Control pairs
    are split at the memory group's split hands, reused in sorted order.
    """
    firsts = first_label_hands(coded)
    by_session = {log.session_id: log for log in memory_logs}
    mem_segments, splits = [], []
    for (sid, agent, opp), split in sorted(firsts.items()):
        log = by_session.get(sid)
        if log is None or not 5 < split < len(log.hands) - 5:
            continue
        seg = _split_deltas(log, agent, opp, split)
        if seg is not None:
            mem_segments.append(seg)
            splits.append(split)
    if not mem_segments:
        raise NoLabeledPairs("no (agent, opponent) pair is first labeled strictly inside the session")
    ctl_splits = sorted(splits)
    ctl_segments, i = [], 0
    for log in control_logs:
        for agent in log.names:
            for opp in log.names:
                if opp == agent:
                    continue
                split = ctl_splits[i % len(ctl_splits)]
                i += 1
                if not 5 < split < len(log.hands) - 5:
                    continue
                seg = _split_deltas(log, agent, opp, split)
                if seg is not None:
                    ctl_segments.append(seg)
    allseg = np.concatenate(mem_segments + ctl_segments)
    scale = allseg.std(axis=0)
    scale[scale == 0] = 1.0
    mem = _composites(mem_segments, scale)
    ctl = _composites(ctl_segments, scale)
    try:
        d = cohens_d(mem, ctl) if len(mem) >= 2 and len(ctl) >= 2 else None
    except StatsError:
        d = None
    return ShiftResult(float(np.mean(mem)), float(np.mean(ctl)) if ctl else 0.0, d, mem, ctl)


# -- label accuracy ------------------------------------------------------------


@dataclass(frozen=True)
class TraitRule:
    label: str
    pattern: re.Pattern
    metric: str
    direction: str  # "above" or "below" the table mean


def load_trait_map(path=None) -> tuple[TraitRule, ...]:
    if path is None:
        text = resources.files(__package__).joinpath("data", "trait_map.yaml").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    out = []
    for t in yaml.safe_load(text)["traits"]:
        if t["direction"] not in ("above", "below"):
            raise ValueError(f"trait {t['label']!r}: direction must be 'above' or 'below'")
        out.append(TraitRule(t["label"], re.compile(t["pattern"], re.IGNORECASE), t["metric"], t["direction"]))
    return tuple(out)


@lru_cache(maxsize=1)
def default_trait_map() -> tuple[TraitRule, ...]:
    return load_trait_map()


_INTENSIFIER = re.compile(r"\b(?:very|extremely|really|super|always|never|way too|hugely)\b", re.I)
_PRESCRIPTION = re.compile(
    r"(?:,|;|\bso\b)\s*(?:I\s+(?:should|will|'ll|must|need to)\s+)?"
    r"(?:don'?t|do not|never|always|bet|raise|call|fold|bluff|value bet|attack|isolate|avoid|stop)\b",
    re.I,
)


def label_intensity(text: str) -> int:
    """1 for a bare trait, 2 with an intensifier, 3 with a prescribed response."""
    if _PRESCRIPTION.search(text):
        return 3
    if _INTENSIFIER.search(text):
        return 2
    return 1


def map_label(text: str, trait_map: tuple[TraitRule, ...] | None = None) -> TraitRule:
    for rule in trait_map or default_trait_map():
        if rule.pattern.search(text):
            return rule
    raise UnmappableLabel(text)


def player_metrics(log, player: str) -> dict[str, float]:
    """Whole-session vpip, finite aggression factor and fold-to-raise."""
    stats = compute_player_stats(log, player)
    ds = decisions(log, player)
    aggr = sum(d.kind in AGGRESSIVE for d in ds)
    calls = sum(d.kind == ActionKind.Call for d in ds)
    return {"vpip": stats.vpip, "af": aggr / max(calls, 1), "fold_to_raise": fold_to_raise(ds)}


@dataclass
class ScoredLabel:
    session_id: str
    agent: str
    target: str
    label: str
    metric: str
    direction: str
    intensity: int
    deviation: float  # target's metric minus the table mean
    correct: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _final_memories(snapshots):
    last = {}
    for s in snapshots:
        key = (s.session_id, s.agent)
        if key not in last or s.hand_id >= last[key].hand_id:
            last[key] = s
    return [last[k] for k in sorted(last)]


def score_labels(logs, snapshots, trait_map=None) -> tuple[list[ScoredLabel], int]:
    """Score each behavioral label in the agents' final notes.

    A label is a note whose highest coded level is Behavioral; predictions
    and plans that happen to mention a habit are not labels.  Notes are in
    writing order, so a later label on the same metric (a revised read)
    replaces an earlier one.  Labels that match no trait in the map are
    counted as unmappable.
    """
    # imported here: the coder package imports agents, which imports metrics
    from ..tomcoder.coder import TomLevel, code_text

    by_session = {log.session_id: log for log in logs}
    scored, unmapped = [], 0
    for snap in _final_memories(snapshots):
        log = by_session.get(snap.session_id)
        if log is None:
            continue
        metrics = {p: player_metrics(log, p) for p in log.names}
        current: dict[tuple[str, str], tuple[TraitRule, str]] = {}
        for target in sorted(snap.content.opponents):
            if target not in metrics or target == snap.agent:
                continue
            for note in snap.content.opponents[target]:
                level, _ = code_text(note.text)
                if level != TomLevel.Behavioral:
                    continue
                try:
                    rule = map_label(note.text, trait_map)
                except UnmappableLabel:
                    unmapped += 1
                    continue
                current[(target, rule.metric)] = (rule, note.text)
        for (target, metric), (rule, text) in sorted(current.items()):
            mean = float(np.mean([m[metric] for m in metrics.values()]))
            dev = metrics[target][metric] - mean
            correct = dev > 0 if rule.direction == "above" else dev < 0
            scored.append(ScoredLabel(snap.session_id, snap.agent, target, rule.label, metric,
                                      rule.direction, label_intensity(text), dev, bool(correct)))
    return scored, unmapped


@dataclass
class LabelAccuracy:
    n_labels: int
    n_correct: int
    accuracy: float | None
    binomial: TestResult | None
    spearman: TestResult | None
    spearman_note: str
    unmapped: int
    labels: list[ScoredLabel] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_labels": self.n_labels,
            "n_correct": self.n_correct,
            "accuracy": self.accuracy,
            "binomial": self.binomial.to_dict() if self.binomial else None,
            "intensity_spearman": self.spearman.to_dict() if self.spearman else None,
            "intensity_note": self.spearman_note,
            "unmapped_labels": self.unmapped,
        }


def _scaled_abs_deviation(scored: list[ScoredLabel]) -> list[float]:
    """|deviation| divided by the SD of that metric's deviations, so metrics share a scale."""
    sd = {}
    for metric in {s.metric for s in scored}:
        vals = np.array([s.deviation for s in scored if s.metric == metric])
        sd[metric] = float(vals.std()) or 1.0
    return [abs(s.deviation) / sd[s.metric] for s in scored]


def intensity_correlation(scored: list[ScoredLabel]) -> tuple[TestResult | None, str]:
    if len(scored) < 3:
        return None, "fewer than three labels"
    try:
        return spearman([s.intensity for s in scored], _scaled_abs_deviation(scored)), ""
    except ConstantInput:
        return None, "undefined: constant intensity or deviation"


MIN_LABELS = 10


def label_accuracy(logs, snapshots, trait_map=None, min_labels: int = MIN_LABELS) -> LabelAccuracy:
    scored, unmapped = score_labels(logs, snapshots, trait_map)
    n = len(scored)
    if n < min_labels:
        raise InsufficientData(f"{n} mappable labels, need at least {min_labels}")
    k = sum(s.correct for s in scored)
    rho, note = intensity_correlation(scored)
    return LabelAccuracy(
        n_labels=n,
        n_correct=k,
        accuracy=k / n if n else None,
        binomial=binomial_test(k, n) if n else None,
        spearman=rho,
        spearman_note=note,
        unmapped=unmapped,
        labels=scored,
    )


# -- null simulations ------------------------------------------------------------


@dataclass
class NullSummary:
    permutations: int
    mean_d: float | None
    mean_accuracy: float | None
    mean_rho: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def null_simulations(memory_scores, control_scores, scored: list[ScoredLabel], permutations: int = 1000,
                     seed: int = 7) -> NullSummary:
    """Rerun the three validation statistics on exchangeable nulls.

    The adaptation d is recomputed after shuffling group membership; label
    accuracy after assigning each label a random direction; the intensity
    correlation after shuffling intensities across labels.  Means should sit
    near 0, 0.5 and 0 respectively.
    """
    rng = SplitMix64(seed)
    ds, accs, rhos = [], [], []
    pooled = list(memory_scores) + list(control_scores)
    n_mem = len(memory_scores)
    absdev = _scaled_abs_deviation(scored) if scored else []
    intens = [s.intensity for s in scored]
    for _ in range(permutations):
        if n_mem >= 2 and len(pooled) - n_mem >= 2:
            perm = list(pooled)
            rng.shuffle(perm)
            try:
                ds.append(cohens_d(perm[:n_mem], perm[n_mem:]))
            except StatsError:
                pass
        if scored:
            hits = 0
            for s in scored:
                above = rng.below(2) == 1
                hits += (s.deviation > 0) if above else (s.deviation < 0)
            accs.append(hits / len(scored))
        if len(scored) >= 3:
            shuffled = list(intens)
            rng.shuffle(shuffled)
            rx, ry = midranks(shuffled), midranks(absdev)
            if np.ptp(rx) > 0 and np.ptp(ry) > 0:
                rhos.append(float(np.corrcoef(rx, ry)[0, 1]))

    def mean(xs):
        return float(np.mean(xs)) if xs else None

    return NullSummary(permutations, mean(ds), mean(accs), mean(rhos))
