import os

# =============================================================================
# NUMERICS
# =============================================================================
SOFTMAX_SUM_TOLERANCE = 1e-12

# Added to the approximate scores of the local window before top-k selection
LOCAL_MASK_BOOST = 1.0

# =============================================================================
# BASELINES
# =============================================================================
LM_INFINITE_SINK_TOKENS = 16
H2O_LOCAL_FRACTION = 4  # l = k / 4

# =============================================================================
# TRACE FILE FORMAT
# =============================================================================
TRACE_MAGIC = b"SPQTRACE"
TRACE_VERSION = 1
TRACE_DTYPE_F32 = 0
TRACE_DTYPE_F64 = 1

# =============================================================================
# SWEEP DEFAULTS
# =============================================================================
DEFAULT_RANKS = [8, 16, 32, 64]
DEFAULT_TOPK = [128]
DEFAULT_HEAD_DIM = 128
DEFAULT_TRIALS = 4
DEFAULT_SEED = 0

REPORT_COLUMNS = [
    "method",
    "S",
    "d_h",
    "g",
    "r",
    "k",
    "l",
    "transfers",
    "dense_transfers",
    "compression_ratio",
    "theoretical_speedup",
    "mean_topk_agreement",
    "output_rel_error_vs_dense",
    "trials",
    "spec_hash",
]
AGREEMENT_COLUMNS = [
    "strategy",
    "S",
    "d_h",
    "r",
    "k",
    "trials",
    "mean_topk_agreement",
    "std_topk_agreement",
    "mean_alpha_error",
    "mean_query_kurtosis",
    "mean_query_outlier_ratio",
]
REPORT_FLOAT_FORMAT = "%.10g"

# =============================================================================
# HARDWARE PRESETS (multiply-adds per second, elements per second)
# =============================================================================
HARDWARE_PRESETS = {
    "bow-ipu": {"r_A": 175e12, "r_M": 5.5e12},
    "a10": {"r_A": 125e12, "r_M": 0.6e12},
    "h100": {"r_A": 990e12, "r_M": 3.35e12},
}

# (g, d_m, S) configurations for the roofline table
ROOFLINE_CONFIGS = [
    (1, 4096, 4096),
    (8, 8192, 4096),
    (8, 8192, 16384),
]

# =============================================================================
# ENVIRONMENT
# =============================================================================
SWEEP_WORKERS = int(os.environ.get("SPARQ_WORKERS", "1"))
SHOW_PROGRESS = os.environ.get("SPARQ_PROGRESS", "1") != "0"
