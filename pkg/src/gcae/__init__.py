"""Graph-convolutional autoencoder toolkit.

Learns low-dimensional representations of high-dimensional graph signals with
an autoencoder whose front-end is a first-order spectral graph convolution,
plus the linear and autoencoder baselines, ablation generators, a Granger
connectivity estimator, and a linear-SVM cross-validation harness to score
the learned embeddings.
"""

from ._version import __version__
from .baselines import (
    PcaModel,
    RpcaResult,
    ablation_graph,
    gbf_transform,
    pca_fit_transform,
    rpca_decompose,
)
from .classify import CvResult, LinearSvmModel, kfold_evaluate, svm_predict, svm_train
from .connectivity import (
    TimeSeriesPanel,
    granger_influence,
    influence_to_graph,
    load_panel,
    save_panel,
)
from .data import (
    GraphSignalDataset,
    NoiseSpec,
    generate_dataset,
    load_dataset,
    save_dataset,
)
from .filters import (
    ChebyshevFilter,
    chebyshev_filter,
    exact_lambda_max,
    first_order_conv,
    scaled_laplacian,
    spectral_convolve,
)
from .graph import (
    Graph,
    SpectralDecomposition,
    build_graph,
    combinatorial_laplacian,
    gft,
    igft,
    load_adjacency,
    normalized_laplacian,
    random_connected_graph,
    renormalized_adjacency,
    save_adjacency,
    stochastic_block_graph,
    symmetric_eigendecomposition,
)
from .model import (
    GcaeConfig,
    GcaeModel,
    TrainReport,
    build_model,
    embed,
    embed_batch,
    forward,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .nn import (
    AdamState,
    DenseLayer,
    DropoutLayer,
    DropoutSpec,
    FlattenLayer,
    GraphConvLayer,
    SequentialNet,
    adam_step,
    dropout_apply,
    gradient_check,
    init_adam,
    l2_penalty,
    mse_loss,
)
from .pipeline import (
    ExperimentSettings,
    ablate_activation,
    ablate_graph_choice,
    compare_methods,
    train_autoencoder,
)
from .report import EvaluationReport, MethodResult, render_table, write_report
