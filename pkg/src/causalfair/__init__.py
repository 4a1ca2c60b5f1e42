"""Causal fairness toolkit.

Exact path-specific effects on a four-variable discrete causal model,
information-theoretic fairness metrics, a verification harness for the
conditional-independence sufficiency claims, and an adversarial feature-mask
trainer that debiases a frozen prediction pipeline.
"""

from .adversarial import (
    AdversarialResult,
    MaskedBatch,
    PipelineNets,
    adversarial_train,
    build_pipeline_networks,
    discriminator_loss,
    discriminator_predict,
    evaluate_pipeline,
    generate_mask,
    generator_loss,
)
from .config import TrainConfig, load_train_config, save_train_config
from .data import SampleBatch, load_dataset, save_dataset
from .errors import (
    DataError,
    EvaluationError,
    NumericError,
    StructuralError,
    TrainingError,
)
from .jsd import (
    EmbeddingBatch,
    JsdEstimate,
    PretrainResult,
    fine_tune_head,
    jsd_mi_estimate,
    pretrain_encoder,
    shuffle_negatives,
)
from .metrics import (
    FairnessReport,
    PredictionRecord,
    adf,
    auc_score,
    conditional_mutual_information,
    demographic_parity,
    empirical_joint,
    entropy,
    equalized_opportunity,
    fairness_report,
    mutual_information,
)
from .nets import (
    GradientSet,
    Network,
    backward,
    cross_entropy_with_grad,
    finite_diff_check,
    forward,
    init_network,
    mean_prediction_entropy_with_grad,
    step,
)
from .scm import (
    DiscreteSCM,
    JointTable,
    PathSelector,
    direct_effect,
    indirect_effect,
    joint_distribution,
    positive_class_effect,
    random_scm,
    sample,
    total_causal_effect,
)
from .synth import SynthSpec, generate_dataset, ground_truth_discrete_projection
from .theorems import (
    VerificationReport,
    counterexample_theorem1,
    counterexample_theorem2,
    enforce_conditional_independence,
    verify_theorem1,
    verify_theorem2,
)

__version__ = "0.1.0"
