"""Rule-based clinical score for a drug pair.

Six label-independent indicators, each worth +1, normalized by the maximum
of 6. The rules read only clinical profile fields (enzymes, targets, ATC
codes, therapeutic groups, side effects, PK-modulator flag); interaction
labels are never an input, so the score cannot leak them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

# ATC level 3 (pharmacological subgroup) is encoded by the first 4
# characters: level 1 = 1 char, level 2 = 3 chars, level 3 = 4 chars.
ATC_LEVEL3_PREFIX_LEN = 4

DEFAULT_TAU_SE = 0.3


@dataclass(frozen=True)
class RuleBreakdown:
    """One drug pair's rule firings plus the normalized score."""

    shared_enzyme: int
    shared_target: int
    atc_match: int
    group_match: int
    side_effect_sim_hit: int
    pk_modulator: int

    @property
    def raw_sum(self) -> int:
        return (
            self.shared_enzyme
            + self.shared_target
            + self.atc_match
            + self.group_match
            + self.side_effect_sim_hit
            + self.pk_modulator
        )

    @property
    def normalized(self) -> float:
        return self.raw_sum / 6

    def as_dict(self) -> dict:
        return {
            "shared_enzyme": self.shared_enzyme,
            "shared_target": self.shared_target,
            "atc_match": self.atc_match,
            "group_match": self.group_match,
            "side_effect_sim_hit": self.side_effect_sim_hit,
            "pk_modulator": self.pk_modulator,
            "raw_sum": self.raw_sum,
            "normalized": self.normalized,
        }


def side_effect_similarity(set_a: set, set_b: set) -> float:
    """Jaccard index of two side-effect token sets; both empty -> 0."""
    if not set_a and not set_b:
        return 0.0
    inter = len(set_a & set_b)
    union = len(set_a | set_b)
    return inter / union


def atc_match(codes_a: set, codes_b: set) -> int:
    """1 iff any code pair shares the 4-character level-1..3 prefix.

    Codes shorter than 4 characters never match.
    """
    prefixes_a = {c[:ATC_LEVEL3_PREFIX_LEN] for c in codes_a if len(c) >= ATC_LEVEL3_PREFIX_LEN}
    prefixes_b = {c[:ATC_LEVEL3_PREFIX_LEN] for c in codes_b if len(c) >= ATC_LEVEL3_PREFIX_LEN}
    return 1 if prefixes_a & prefixes_b else 0


def score_pair(profile_a, profile_b, tau_se: float = DEFAULT_TAU_SE) -> RuleBreakdown:
    """Fire the six rules for a pair of clinical profiles.

    Symmetric in (a, b). The side-effect rule uses a strict > tau_se
    comparison. The PK-modulator rule fires if either drug carries the
    strong-modulator flag.
    """
    if not 0.0 <= tau_se <= 1.0:
        raise ConfigError(f"tau_se must be in [0, 1], got {tau_se}")
    return RuleBreakdown(
        shared_enzyme=1 if profile_a.enzymes & profile_b.enzymes else 0,
        shared_target=1 if profile_a.targets & profile_b.targets else 0,
        atc_match=atc_match(profile_a.atc_codes, profile_b.atc_codes),
        group_match=1 if profile_a.therapeutic_groups & profile_b.therapeutic_groups else 0,
        side_effect_sim_hit=(
            1 if side_effect_similarity(profile_a.side_effects, profile_b.side_effects) > tau_se else 0
        ),
        pk_modulator=1 if (profile_a.strong_pk_modulator or profile_b.strong_pk_modulator) else 0,
    )
