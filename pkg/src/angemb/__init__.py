"""Robust PCA by squared-cosine optimization on the unit hypersphere.

Fits subspaces that maximize the summed squared cosine between unit-
normalized samples and the basis, optionally pre-trimming outliers by a
pairwise-cosine threshold, alongside standard PCA and EM-PCA baselines.
"""

from .ae import PhiRange, fit_ae, objective, project, reconstruct, theorem1_range
from .baselines import fit_em_pca, fit_pca
from .errors import (
    AngembError,
    DataError,
    EmptyAfterNormalization,
    EmptyInput,
    InvalidData,
    InvalidRank,
    InvalidThreshold,
    MixedDimensions,
    NumericError,
    RankDeficient,
    SingularStep,
    UnsupportedFormat,
)
from .imaging import (
    BackgroundResult,
    FrameStack,
    ShadowResult,
    background_model,
    load_frames,
    shadow_removal,
    stack_from_matrix,
    write_frames,
)
from .linalg import (
    DataMatrix,
    SphereData,
    Subspace,
    center,
    dominant_subspace,
    make_subspace,
    max_principal_angle,
    normalize_columns,
    principal_angles,
    randomized_range,
    resolve_strategy,
)
from .methods import fit_method
from .model import (
    FitModel,
    FitStats,
    TrimReport,
    load_model,
    model_from_dict,
    model_to_dict,
    model_to_json,
    save_model,
)
from .synth import (
    SynthResult,
    SynthSpec,
    canonical_spec,
    four_class_3d,
    generate,
    moving_square_video,
    random_subspace,
    subspace_recovery_error,
    trim_metrics,
)
from .tae import (
    cosine_gram,
    fit_tae,
    outlier_counts,
    select_inliers,
    sphere_to_source_indices,
)

__version__ = "0.1.0"
