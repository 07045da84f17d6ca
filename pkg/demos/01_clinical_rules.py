"""The rule-based clinical score, step by step.

Six label-independent indicators, each worth one point, normalized by 6:
shared metabolic enzyme, shared target, same ATC class (first three
levels), same therapeutic group, side-effect similarity above a
threshold, and a strong PK modulator on either side.
"""

from ddipred import ClinicalProfile, score_pair, side_effect_similarity, atc_match

# Two sulfonylurea-ish profiles that overlap on several axes
glipizide = ClinicalProfile(
    enzymes={"cyp2c9"},
    targets={"kcnj11"},
    atc_codes={"A10BB07"},
    therapeutic_groups={"antidiabetic"},
    side_effects={"hypoglycemia", "dizziness", "nausea"},
    strong_pk_modulator=False,
)
fluconazole = ClinicalProfile(
    enzymes={"cyp2c9", "cyp3a4"},
    targets={"erg11"},
    atc_codes={"J02AC01"},
    therapeutic_groups={"antifungal"},
    side_effects={"nausea", "headache", "rash"},
    strong_pk_modulator=True,  # well-known CYP inhibitor
)

print("side-effect Jaccard:",
      round(side_effect_similarity(glipizide.side_effects, fluconazole.side_effects), 3))
print("ATC level-3 match:", atc_match(glipizide.atc_codes, fluconazole.atc_codes))

breakdown = score_pair(glipizide, fluconazole, tau_se=0.3)
print("\nrule firings:")
for name, value in breakdown.as_dict().items():
    print(f"  {name:>22}: {value}")

# Symmetry: the score never depends on argument order
assert score_pair(fluconazole, glipizide, 0.3) == breakdown

# The score is a coarse 7-level scale by construction
print("\npossible values:", sorted({k / 6 for k in range(7)}))
