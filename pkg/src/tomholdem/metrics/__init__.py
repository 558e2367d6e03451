from .deception import (
    BLUFF_THRESHOLD,
    DeceptionEvent,
    SnapshotAfterHand,
    check_snapshots,
    classify_deception,
    equity_at,
    tier_rates,
)
from .equity import equity_vs_random
from .player import (
    AF_UNDEFINED,
    NoPreflopDecisions,
    PlayerStats,
    chart_match,
    chip_spread,
    compute_player_stats,
    first_preflop_decision,
    tag_adherence,
)
from .ranking import PreflopRanking, TagChart, build_preflop_ranking
from .validation import (
    AdaptationResult,
    InsufficientData,
    LabelAccuracy,
    NoLabeledPairs,
    NullSummary,
    ShiftResult,
    UnmappableLabel,
    adaptation_score,
    before_after_shift,
    label_accuracy,
    label_intensity,
    load_trait_map,
    map_label,
    null_simulations,
)
