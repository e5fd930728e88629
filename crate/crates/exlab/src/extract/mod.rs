//! Extractor analysis: bias computation, certification, parameter
//! arithmetic and falsification searches.

pub mod bias;
pub mod cert;
pub mod certify;
pub mod falsify;

pub use bias::{
    krt_bound, lowdeg_bias_stats, orthogonality_profile, parseval_bound, submatrix_bias, tl_bias,
    tl_exact, LowdegStats, OrthogonalityProfile, PerWeightBias, TlBiasMode, TlBiasReport, TrialSpec,
};
pub use cert::{
    derive_params, mm_parameter_map, sq_params, theorem_budget, CertKind, DeriveRule, DerivedCert,
    ExtractorCert, MmParams, Provenance, SqParams, TheoremBudget,
};
pub use certify::{
    certify_johnson, certify_sigma, johnson_exceedance_count, johnson_exceedance_count_flat,
    GammaValue, JohnsonOutcome, SigmaOutcome,
};
pub use falsify::{
    falsify_l2, falsify_linf, linf_max_bias, min_flat_size, negative_split_check, Combinations,
    FalsifierWitness, NegativeSplitReport, SearchOutcome, ThresholdSpec, WitnessData,
};
