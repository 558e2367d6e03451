"""Starting-hand ranking and the tight-aggressive preflop chart."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..engine.cards import Card, hand_class

DATA_FILE = "preflop_equity.json"


def class_weight(name: str) -> int:
    """Number of card combinations in a starting-hand class."""
    if len(name) == 2:
        return 6
    return 4 if name.endswith("s") else 12


@dataclass(frozen=True)
class HandClassInfo:
    name: str
    weight: int
    equity: float
    percentile: float  # cumulative combo share through this class, inclusive


@dataclass(frozen=True)
class PreflopRanking:
    classes: tuple[HandClassInfo, ...]
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c.name: c for c in self.classes})

    def __getitem__(self, name: str) -> HandClassInfo:
        return self._index[name]

    def rank(self, name: str) -> int:
        """1-based position (1 = strongest)."""
        return self.classes.index(self._index[name]) + 1

    def info(self, hole: list[Card]) -> HandClassInfo:
        return self._index[hand_class(hole)]

    def top(self, fraction: float) -> frozenset[str]:
        """Classes whose cumulative combo percentile is at most ``fraction``."""
        return frozenset(c.name for c in self.classes if c.percentile <= fraction + 1e-12)

    @property
    def total_weight(self) -> int:
        return sum(c.weight for c in self.classes)


def _from_tally(tally: dict[str, tuple[int, int, int]]) -> PreflopRanking:
    equities = {name: (w + t / 2) / tot for name, (w, t, tot) in tally.items()}
    order = sorted(equities, key=lambda n: (-equities[n], n))
    total = sum(class_weight(n) for n in order)
    running = 0
    infos = []
    for name in order:
        running += class_weight(name)
        infos.append(HandClassInfo(name, class_weight(name), equities[name], running / total))
    return PreflopRanking(tuple(infos))


def _load_tally(path: Path | None = None) -> dict[str, tuple[int, int, int]]:
    if path is None:
        text = resources.files(__package__).joinpath("data", DATA_FILE).read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)["classes"]
    return {k: (v["wins"], v["ties"], v["total"]) for k, v in raw.items()}


def write_tally(tally: dict[str, tuple[int, int, int]], path: Path) -> None:
    doc = {
        "description": "Exact all-in equity of each starting-hand class against one uniformly "
        "random hand: wins, ties, total over all (hero combo, board, opponent hand) deals.",
        "classes": {k: {"wins": w, "ties": t, "total": n} for k, (w, t, n) in sorted(tally.items())},
    }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))


@lru_cache(maxsize=None)
def build_preflop_ranking(cache: Path | None = None, recompute: bool = False) -> PreflopRanking:
    """Rank the 169 starting-hand classes by exact equity against a random hand.

    Reads the shipped (or given) cache file; with ``recompute=True`` or a
    missing cache it runs the full enumeration (about a minute) and writes
    the cache when a path is given.
    """
    if not recompute:
        try:
            return _from_tally(_load_tally(cache))
        except FileNotFoundError:
            if cache is None:
                raise
    from .equity import preflop_equity_table

    tally = preflop_equity_table()
    if cache is not None:
        write_tally(tally, cache)
    return _from_tally(tally)


ROLE_RANGE = {"BTN": "late", "SB": "early", "BB": "defend"}


@dataclass(frozen=True)
class TagChart:
    """Three-handed tight-aggressive opening chart.

    Button plays the late range, small blind the early range; the big blind
    continues with the early range against a raise and otherwise checks.
    """

    early_range: frozenset[str]
    late_range: frozenset[str]
    position_map: dict = field(default_factory=lambda: dict(ROLE_RANGE))

    @classmethod
    def default(cls, ranking: PreflopRanking | None = None, early: float = 0.15, late: float = 0.25) -> "TagChart":
        ranking = ranking or build_preflop_ranking()
        return cls(ranking.top(early), ranking.top(late))

    def range_for(self, role: str) -> frozenset[str]:
        return self.late_range if self.position_map.get(role) == "late" else self.early_range

    def prescription(self, role: str, cls_name: str, facing_raise: bool) -> str:
        """``"Raise"``, ``"Fold"`` or ``"Check"`` for a first preflop decision."""
        in_range = cls_name in self.range_for(role)
        if self.position_map.get(role) == "defend" and not facing_raise:
            return "Check"
        return "Raise" if in_range else "Fold"
