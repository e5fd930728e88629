//! Branching-program learners: representation, compilation of concrete
//! strategies, and exact or Monte Carlo evaluation.

pub mod compile;
pub mod program;
pub mod simulate;

pub use compile::{
    compile_learner, memorize_parity_success_exact, memorize_success_montecarlo,
    parity_rank_distribution, random_program, sweep_csv, sweep_tradeoff, verify_parity, Strategy,
    SweepFamily, SweepRow,
};
pub use program::{
    bp1_string, edge_index, load_program, parse_bp1, read_bp1, save_program, write_bp1,
    BranchingProgram, Defect, LeafLabel, VertexKind,
};
pub use simulate::{
    dp_feasible, forward_dp, success_exact, success_montecarlo, weak_value_exact,
    weak_value_montecarlo, SuccessReport, WeakValueReport,
};
