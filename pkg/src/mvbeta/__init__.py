"""Multichannel beta-MAP classification toolkit.

Feature extraction turns each channel of a trial into a point on the
probability simplex (wavelet band energies), a non-linear transform maps
that point to independent beta-distributed scalars, and a MAP rule over
the kept scalars classifies the trial. A PCA+Gaussian baseline, channel
ranking, feature selection, and a Welch t-test round out the pipeline.
"""

from .classify import (
    EvaluationResult,
    MvBetaModel,
    PcaGaussModel,
    evaluate,
    load_model,
    predict_mvbeta,
    predict_pca_gauss,
    save_model,
    t_test_accuracies,
    train_mvbeta,
    train_pca_gauss,
)
from .dirstat import (
    BetaParams,
    DirichletParams,
    SuperDirichletParams,
    beta_pdf_log,
    digamma,
    dirichlet_mle,
    dirichlet_pdf_log,
    dirichlet_sample,
    log_gamma,
    super_dirichlet_pdf_log,
)
from .errors import ConvergenceError, DataLoadError, DegenerateDataError, NumericError
from .msignal import (
    FeatureConfig,
    Signal,
    Trial,
    WaveletDecomposition,
    bandpass,
    dwt,
    extract_features,
    floor_simplex,
    marginalize,
)
from .neutral import (
    BetaParamVector,
    beta_params_from_dirichlet,
    pnt_forward,
    pnt_forward_batch,
    pnt_inverse,
    sample_correlation_matrix,
)
from .selection import (
    ChannelScore,
    FeatureSelection,
    beta_entropy,
    beta_variance,
    fisher_ratio,
    rank_channels_cr,
    rank_channels_fr,
    select_features,
)

__version__ = "0.1.0"

__all__ = [
    "BetaParams",
    "BetaParamVector",
    "ChannelScore",
    "ConvergenceError",
    "DataLoadError",
    "DegenerateDataError",
    "DirichletParams",
    "EvaluationResult",
    "FeatureConfig",
    "FeatureSelection",
    "MvBetaModel",
    "NumericError",
    "PcaGaussModel",
    "Signal",
    "SuperDirichletParams",
    "Trial",
    "WaveletDecomposition",
    "bandpass",
    "beta_entropy",
    "beta_params_from_dirichlet",
    "beta_pdf_log",
    "beta_variance",
    "digamma",
    "dirichlet_mle",
    "dirichlet_pdf_log",
    "dirichlet_sample",
    "dwt",
    "evaluate",
    "extract_features",
    "fisher_ratio",
    "floor_simplex",
    "load_model",
    "log_gamma",
    "marginalize",
    "pnt_forward",
    "pnt_forward_batch",
    "pnt_inverse",
    "predict_mvbeta",
    "predict_pca_gauss",
    "rank_channels_cr",
    "rank_channels_fr",
    "save_model",
    "select_features",
    "super_dirichlet_pdf_log",
    "t_test_accuracies",
    "train_mvbeta",
    "train_pca_gauss",
]
