"""Airwriting recognition from wrist IMU signals via image encodings."""

from .signals import (
    ACCEL,
    GYRO,
    FIXED_LENGTH,
    FixedSignal,
    RawRecording,
    SensorChannels,
    fix_length,
    preprocess,
    resample,
    split_channels,
    z_normalize,
)
from .encoders import (
    GADF,
    GASF,
    MTF,
    SSM,
    METHODS,
    BinAssignment,
    EncodedImage,
    ImageStack,
    PolarSeries,
    TransitionMatrix,
    assign_bins,
    encode_series,
    encode_stack,
    gadf_encode,
    gasf_encode,
    mtf_encode,
    rescale_minmax,
    ssm_encode,
    to_polar,
    transition_matrix,
)
from .datasets import (
    DataError,
    Manifest,
    ManifestEntry,
    SplitPlan,
    SyntheticSpec,
    fixed_subject_split,
    generate_synthetic,
    load_manifest,
    load_recording,
    loso_splits,
)
from .classify import (
    ClassProbabilities,
    CentroidModel,
    FeatureVector,
    LogisticConfig,
    LogisticModel,
    SensorModelPair,
    cross_entropy_loss_grad,
    fit_centroid,
    fit_logistic,
    fuse,
    load_model,
    pool_features,
    predict_label,
    predict_proba,
    save_model,
)
from .evaluate import (
    ClassifierConfig,
    EncodingConfig,
    EvaluationReport,
    FoldResult,
    compute_features,
    confusion,
    emit_report,
    fixed_evaluate,
    loso_evaluate,
    run_fold,
)
from .image_io import export_image_png, export_image_raw, import_image_png, import_image_raw

__version__ = "0.1.0"
