"""Permutation-equivariant tensor networks on dense graph tensors.

The package is organized bottom-up: set partitions fix a canonical
coefficient order, dense tensors carry the relabeling action, equilinear
maps implement the invariant and equivariant operator spaces, and the GNN
layer composes them into trainable models.  Graph generation, training,
separation oracles, and randomized property suites sit on top.
"""

from .equilinear import (
    ELEMENT_BUDGET,
    EquivariantBias,
    EquivariantMap,
    InvariantMap,
    adjoint_equivariant,
    apply_equivariant,
    apply_invariant,
    materialize_basis,
    materialize_bias,
    pattern_tensor,
)
from .gnn import (
    BASIS_TAG,
    MODEL_FORMAT,
    Channel,
    GnnModel,
    ModelSpec,
    TensorizedChannel,
    flatten_params,
    forward,
    forward_many,
    forward_tensorized,
    gradient,
    init_params,
    load_model,
    model_spec,
    param_count,
    param_slices,
    save_model,
    unflatten_params,
)
from .graphs import (
    DATASET_FORMAT,
    TOPOLOGIES,
    Dataset,
    DatasetConfig,
    EditCosts,
    GraphSample,
    all_pairs_shortest,
    diameter,
    eccentricities,
    edit_distance,
    eligible_topologies,
    generate,
    is_isomorphic,
    make_dataset,
    read_dataset,
    with_targets,
    write_dataset,
)
from .oracles import (
    ExponentProfile,
    MultisetLemmaVerdict,
    SeparationBudget,
    SeparationResult,
    ThresholdNet,
    check_multiset_lemma,
    closure_equivariant,
    closure_invariant,
    count_nodes_net,
    multiset_profile,
    saturation_error_bound,
    separate,
)
from .partitions import (
    ARITY_CAP,
    IndexPattern,
    SetPartition,
    bell,
    enumerate_partitions,
    partition_index,
    pattern_of,
)
from .tensor import (
    ACTIVATIONS,
    Activation,
    DenseTensor,
    Norms,
    Permutation,
    apply_pointwise,
    hadamard,
    kron,
    norms,
    permute,
    resolve_activation,
)
from .train import (
    AdamState,
    TrainConfig,
    adam_step,
    evaluate_mse,
    fit,
    mse_loss,
    read_metrics,
    write_metrics,
)

__all__ = [
    "ACTIVATIONS",
    "ARITY_CAP",
    "AdamState",
    "Activation",
    "BASIS_TAG",
    "Channel",
    "DATASET_FORMAT",
    "DenseTensor",
    "Dataset",
    "DatasetConfig",
    "ELEMENT_BUDGET",
    "EditCosts",
    "EquivariantBias",
    "EquivariantMap",
    "ExponentProfile",
    "GnnModel",
    "GraphSample",
    "IndexPattern",
    "InvariantMap",
    "MODEL_FORMAT",
    "ModelSpec",
    "MultisetLemmaVerdict",
    "Norms",
    "Permutation",
    "SeparationBudget",
    "SeparationResult",
    "SetPartition",
    "TOPOLOGIES",
    "TensorizedChannel",
    "ThresholdNet",
    "TrainConfig",
    "adam_step",
    "adjoint_equivariant",
    "all_pairs_shortest",
    "apply_equivariant",
    "apply_invariant",
    "apply_pointwise",
    "bell",
    "check_multiset_lemma",
    "closure_equivariant",
    "closure_invariant",
    "count_nodes_net",
    "diameter",
    "eccentricities",
    "edit_distance",
    "eligible_topologies",
    "enumerate_partitions",
    "evaluate_mse",
    "fit",
    "flatten_params",
    "forward",
    "forward_many",
    "forward_tensorized",
    "generate",
    "gradient",
    "hadamard",
    "init_params",
    "is_isomorphic",
    "kron",
    "load_model",
    "make_dataset",
    "materialize_basis",
    "materialize_bias",
    "model_spec",
    "mse_loss",
    "multiset_profile",
    "norms",
    "param_count",
    "param_slices",
    "partition_index",
    "pattern_of",
    "pattern_tensor",
    "permute",
    "read_dataset",
    "read_metrics",
    "resolve_activation",
    "save_model",
    "saturation_error_bound",
    "separate",
    "unflatten_params",
    "with_targets",
    "write_dataset",
    "write_metrics",
]
