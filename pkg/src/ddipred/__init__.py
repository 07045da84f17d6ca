"""Drug-drug interaction prediction from precomputed molecular embeddings.

The pieces, bottom to top: a drug catalog with clinical profiles and a
positive-unlabeled labeling protocol (corpus); a six-rule clinical score
(rbscore); permutation-invariant pairwise features over fused embeddings
(features); a small numpy MLP trained by manual backpropagation (mlp); a
random-sample / ant-colony / particle-swarm hyperparameter search
(hyperopt); metrics with bootstrap confidence intervals (metrics); and a
command pipeline plus CLI (pipeline, cli).
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError
from .corpus import (
    ClinicalProfile,
    DataSplit,
    DrugCatalog,
    DrugRecord,
    Label,
    PairInstance,
    Protocol,
    assign_pu_labels,
    class_weights,
    load_catalog,
    load_pairs,
    split_dataset,
)
from .features import assemble_input, fuse, pair_feature_matrix, pair_features
from .rbscore import RuleBreakdown, atc_match, score_pair, side_effect_similarity
from .metrics import (
    MetricReport,
    bootstrap_ci,
    confusion_metrics,
    ece,
    evaluate_scores,
    pr_auc,
    rank_top_k,
    roc_auc,
)
from .mlp import (
    MlpConfig,
    MlpModel,
    bce_loss,
    forward,
    init_model,
    load_checkpoint,
    loss_and_gradients,
    predict_batch,
    save_checkpoint,
    train,
)
from .hyperopt import (
    OptimizerResult,
    OptimizerSettings,
    PheromoneMatrix,
    SearchSpace,
    Swarm,
    aco_transition_probabilities,
    optimize,
    pso_step,
    rsmpl_seed,
)
from .synthetic import BenchmarkSpec, generate_benchmark
from .pipeline import (
    FeatureBuilder,
    RunConfig,
    cmd_evaluate,
    cmd_optimize,
    cmd_predict,
    cmd_prepare,
    cmd_rank,
    cmd_train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
