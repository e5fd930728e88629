//! Concrete learner strategies compiled into branching programs, exact
//! closed-form evaluation for the memorizing learner on parity, and the
//! width/length tradeoff sweep.

use crate::error::{Error, Result};
use crate::learner::program::{edge_index, BranchingProgram, LeafLabel, VertexKind};
use crate::learner::simulate::{dp_feasible, forward_dp, success_exact, SuccessReport};
use crate::matrix::{FamilyTag, SignMatrix};
use crate::num::{q_int, q_pow2, q_to_f64, Q};
use crate::prng::{subseed, Stream};
use num_traits::{One, Zero};
use serde::Serialize;

/// Cap on materialized program width.
const WIDTH_CAP: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub enum Strategy {
    /// Record the first t samples verbatim; at the leaves output the
    /// lowest-index element consistent with the transcript.
    Memorize { t: usize },
    /// A 2^bits-state machine with a fixed seeded mixing transition; leaves
    /// output the maximum-likelihood x under the state's induced posterior.
    BoundedState { bits: u32, mixer_seed: u64, length: usize },
    Constant { label: LeafLabel },
}

fn consistent_mask_update(m: &SignMatrix, mask: &mut [u64], a: usize, b: i8) {
    // bit 1 in the packed row means entry -1
    let row = m.row_words(a);
    if b < 0 {
        for (w, r) in mask.iter_mut().zip(row) {
            *w &= r;
        }
    } else {
        for (w, r) in mask.iter_mut().zip(row) {
            *w &= !r;
        }
    }
}

fn lowest_set(mask: &[u64]) -> Option<usize> {
    for (i, w) in mask.iter().enumerate() {
        if *w != 0 {
            return Some(i * 64 + w.trailing_zeros() as usize);
        }
    }
    None
}

pub fn compile_learner(m: &SignMatrix, strategy: &Strategy) -> Result<BranchingProgram> {
    match strategy {
        Strategy::Constant { label } => Ok(BranchingProgram {
            num_rows: m.num_rows(),
            width: 1,
            layers: vec![vec![VertexKind::Leaf { label: label.clone() }]],
        }),
        Strategy::Memorize { t } => compile_memorize(m, *t),
        Strategy::BoundedState { bits, mixer_seed, length } => {
            compile_bounded_state(m, *bits, *mixer_seed, *length)
        }
    }
}

fn compile_memorize(m: &SignMatrix, t: usize) -> Result<BranchingProgram> {
    let fanout = 2 * m.num_rows() as u64;
    let mut width: u64 = 1;
    for _ in 0..t {
        width = width.saturating_mul(fanout);
        if width > WIDTH_CAP {
            return Err(Error::WidthOverflow(format!(
                "memorize({t}) needs width (2|A|)^{t} > {WIDTH_CAP}"
            )));
        }
    }
    let mut layers: Vec<Vec<VertexKind>> = Vec::with_capacity(t + 1);
    let mut size = 1u64;
    for _ in 0..t {
        let layer: Vec<VertexKind> = (0..size)
            .map(|v| VertexKind::Internal {
                edges: (0..fanout).map(|e| (v * fanout + e) as u32).collect(),
            })
            .collect();
        layers.push(layer);
        size *= fanout;
    }
    // leaves: decode the transcript (first step is the high digit) and take
    // the lowest-index consistent column
    let full = m.full_col_mask();
    let leaves: Vec<VertexKind> = (0..size)
        .map(|v| {
            let mut mask = full.clone();
            for j in 0..t {
                let shift = t - 1 - j;
                let digit = (v / fanout.pow(shift as u32)) % fanout;
                let a = (digit / 2) as usize;
                let b = if digit % 2 == 0 { -1i8 } else { 1 };
                consistent_mask_update(m, &mut mask, a, b);
            }
            VertexKind::Leaf { label: LeafLabel::Guess(lowest_set(&mask).unwrap_or(0)) }
        })
        .collect();
    layers.push(leaves);
    Ok(BranchingProgram { num_rows: m.num_rows(), width: size as usize, layers })
}

fn compile_bounded_state(m: &SignMatrix, bits: u32, mixer_seed: u64, length: usize) -> Result<BranchingProgram> {
    if bits > 24 {
        return Err(Error::ParamOutOfRange(format!("bits = {bits} above the 24-bit cap")));
    }
    let states = 1u64 << bits;
    let fanout = 2 * m.num_rows() as u64;
    if states.saturating_mul(fanout).saturating_mul(length.max(1) as u64) > (1 << 26) {
        return Err(Error::WidthOverflow(format!(
            "bounded_state({bits}) with length {length} materializes too many edges"
        )));
    }
    let mix = |s: u64, e: u64| -> u32 { (subseed(mixer_seed, s * fanout + e) % states) as u32 };
    let mut layers: Vec<Vec<VertexKind>> = Vec::with_capacity(length + 1);
    for li in 0..length {
        let count = if li == 0 { 1 } else { states };
        let layer: Vec<VertexKind> = (0..count)
            .map(|s| VertexKind::Internal { edges: (0..fanout).map(|e| mix(s, e)).collect() })
            .collect();
        layers.push(layer);
    }
    // placeholder leaves, then label each final state with the ML column of
    // its induced posterior
    let leaf_count = if length == 0 { 1 } else { states };
    layers.push(
        (0..leaf_count)
            .map(|_| VertexKind::Leaf { label: LeafLabel::Guess(0) })
            .collect(),
    );
    let mut prog = BranchingProgram { num_rows: m.num_rows(), width: states as usize, layers };
    let mut posterior: Vec<Vec<Q>> = vec![vec![Q::zero(); m.num_cols()]; leaf_count as usize];
    forward_dp(&prog, m, |_, vi, x, mass| {
        posterior[vi][x] += mass;
    })?;
    if let Some(last) = prog.layers.last_mut() {
        for (vi, v) in last.iter_mut().enumerate() {
            let best = posterior[vi]
                .iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            *v = VertexKind::Leaf { label: LeafLabel::Guess(best) };
        }
    }
    Ok(prog)
}

/// Rank distribution of t uniform vectors from F_2^n: P[rank = rho], exact.
pub fn parity_rank_distribution(n: u32, t: usize) -> Vec<Q> {
    let mut p = vec![Q::zero(); n as usize + 1];
    p[0] = Q::one();
    for _ in 0..t {
        let mut next = vec![Q::zero(); n as usize + 1];
        for (rho, mass) in p.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            let stay = q_pow2(rho as i32 - n as i32); // new vector already in span
            if rho < n as usize {
                next[rho + 1] += mass * (q_int(1) - &stay);
                next[rho] += mass * stay;
            } else {
                next[rho] += mass;
            }
        }
        p = next;
    }
    p
}

/// Exact success of the memorizing learner on parity(n) after t samples:
/// the consistent set is a coset of the nullspace, so the lowest-index rule
/// wins with probability 2^(rank - n).
pub fn memorize_parity_success_exact(n: u32, t: usize) -> Q {
    parity_rank_distribution(n, t)
        .iter()
        .enumerate()
        .map(|(rho, p)| p * q_pow2(rho as i32 - n as i32))
        .sum()
}

/// Check that a matrix really is the full parity matrix, returning n.
pub fn verify_parity(m: &SignMatrix) -> Option<u32> {
    if m.family_tag() != FamilyTag::Parity {
        return None;
    }
    let rows = m.num_rows();
    if rows != m.num_cols() || !rows.is_power_of_two() {
        return None;
    }
    for a in 0..rows {
        for x in 0..rows {
            let want = if (a & x).count_ones() % 2 == 1 { -1 } else { 1 };
            if m.entry(a, x) != want {
                return None;
            }
        }
    }
    Some(rows.trailing_zeros())
}

/// Monte Carlo on the memorize strategy without materializing the program.
pub fn memorize_success_montecarlo(
    m: &SignMatrix,
    t: usize,
    trials: u64,
    seed: u64,
) -> Result<SuccessReport> {
    if trials < 1 {
        return Err(Error::ParamOutOfRange("trials must be >= 1".into()));
    }
    let full = m.full_col_mask();
    let mut hits = 0u64;
    for trial in 0..trials {
        let mut st = Stream::derive(subseed(seed, trial), 0);
        let x = st.next_below(m.num_cols() as u64) as usize;
        let mut mask = full.clone();
        for _ in 0..t {
            let a = st.next_below(m.num_rows() as u64) as usize;
            consistent_mask_update(m, &mut mask, a, m.entry(a, x));
        }
        if lowest_set(&mask).unwrap_or(0) == x {
            hits += 1;
        }
    }
    let p = hits as f64 / trials as f64;
    Ok(SuccessReport {
        value: p,
        exact: None,
        mode: "montecarlo".into(),
        trials,
        ci_halfwidth: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
    })
}

#[derive(Debug, Clone)]
pub enum SweepFamily {
    Memorize { ts: Vec<usize> },
    BoundedState { bits: Vec<u32>, lengths: Vec<usize>, mixer_seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub width_log: f64,
    pub length: usize,
    pub success: f64,
    pub mode: String,
    pub ci: f64,
    pub status: String,
}

/// Measure success across a strategy grid: exact where feasible (closed
/// form on parity, else the DP), Monte Carlo otherwise; infeasible cells
/// are emitted with status=skipped.
pub fn sweep_tradeoff(
    m: &SignMatrix,
    family: &SweepFamily,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    match family {
        SweepFamily::Memorize { ts } => {
            let parity_n = verify_parity(m);
            let fanout_log = (2.0 * m.num_rows() as f64).log2();
            for (cell, &t) in ts.iter().enumerate() {
                let width_log = t as f64 * fanout_log;
                if let Some(n) = parity_n {
                    let exact = memorize_parity_success_exact(n, t);
                    rows.push(SweepRow {
                        width_log,
                        length: t,
                        success: q_to_f64(&exact),
                        mode: "exact".into(),
                        ci: 0.0,
                        status: "ok".into(),
                    });
                    continue;
                }
                match compile_learner(m, &Strategy::Memorize { t }) {
                    Ok(prog) if dp_feasible(&prog, m) => {
                        let r = success_exact(&prog, m)?;
                        rows.push(SweepRow {
                            width_log,
                            length: t,
                            success: r.value,
                            mode: "exact".into(),
                            ci: 0.0,
                            status: "ok".into(),
                        });
                    }
                    _ => {
                        let r = memorize_success_montecarlo(m, t, trials, subseed(seed, cell as u64))?;
                        rows.push(SweepRow {
                            width_log,
                            length: t,
                            success: r.value,
                            mode: "montecarlo".into(),
                            ci: r.ci_halfwidth,
                            status: "ok".into(),
                        });
                    }
                }
            }
        }
        SweepFamily::BoundedState { bits, lengths, mixer_seed } => {
            for &b in bits {
                for &len in lengths {
                    let strat = Strategy::BoundedState { bits: b, mixer_seed: *mixer_seed, length: len };
                    match compile_learner(m, &strat) {
                        Ok(prog) => {
                            let r = success_exact(&prog, m)?;
                            rows.push(SweepRow {
                                width_log: b as f64,
                                length: len,
                                success: r.value,
                                mode: "exact".into(),
                                ci: 0.0,
                                status: "ok".into(),
                            });
                        }
                        Err(_) => rows.push(SweepRow {
                            width_log: b as f64,
                            length: len,
                            success: 0.0,
                            mode: String::new(),
                            ci: 0.0,
                            status: "skipped".into(),
                        }),
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("width_log,length,success,mode,ci,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.width_log, r.length, r.success, r.mode, r.ci, r.status
        ));
    }
    out
}

/// Seeded random guess-labeled program for audits: random layer sizes up to
/// `width`, random edges, random leaf guesses, all leaves in the last layer.
pub fn random_program(
    num_rows: usize,
    num_cols: usize,
    width: usize,
    length: usize,
    seed: u64,
) -> BranchingProgram {
    let mut st = Stream::derive(seed, 0);
    let mut sizes = vec![1usize];
    for _ in 0..length {
        sizes.push(1 + st.next_below(width as u64) as usize);
    }
    let mut layers: Vec<Vec<VertexKind>> = Vec::with_capacity(length + 1);
    for li in 0..=length {
        if li == length {
            layers.push(
                (0..sizes[li])
                    .map(|_| VertexKind::Leaf {
                        label: LeafLabel::Guess(st.next_below(num_cols as u64) as usize),
                    })
                    .collect(),
            );
        } else {
            let next = sizes[li + 1] as u64;
            layers.push(
                (0..sizes[li])
                    .map(|_| VertexKind::Internal {
                        edges: (0..2 * num_rows).map(|_| st.next_below(next) as u32).collect(),
                    })
                    .collect(),
            );
        }
    }
    BranchingProgram { num_rows, width, layers }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_matrix, MatrixSpec};
    use crate::num::q;

    fn parity(n: u32) -> SignMatrix {
        build_matrix(&MatrixSpec::Parity { n }).unwrap()
    }

    #[test]
    fn memorize_zero_is_constant_guess() {
        let m = parity(2);
        let prog = compile_learner(&m, &Strategy::Memorize { t: 0 }).unwrap();
        assert_eq!(prog.width, 1);
        let r = success_exact(&prog, &m).unwrap();
        assert_eq!(r.exact.unwrap(), q(1, 4));
    }

    #[test]
    fn memorize_one_layer_count() {
        let m = parity(2); // |A| = 4
        let prog = compile_learner(&m, &Strategy::Memorize { t: 1 }).unwrap();
        assert_eq!(prog.layers[1].len(), 8);
        assert!(prog.validate(4).is_empty());
    }

    #[test]
    fn ml_learner_parity_baselines() {
        // parity(1), one sample: 3/4
        let m1 = parity(1);
        let p1 = compile_learner(&m1, &Strategy::Memorize { t: 1 }).unwrap();
        assert_eq!(success_exact(&p1, &m1).unwrap().exact.unwrap(), q(3, 4));
        // parity(2), one sample: 7/16
        let m2 = parity(2);
        let p2 = compile_learner(&m2, &Strategy::Memorize { t: 1 }).unwrap();
        assert_eq!(success_exact(&p2, &m2).unwrap().exact.unwrap(), q(7, 16));
    }

    #[test]
    fn rank_dp_matches_explicit_program() {
        for n in 1..=3u32 {
            let m = parity(n);
            for t in 0..=3usize {
                let prog = compile_learner(&m, &Strategy::Memorize { t }).unwrap();
                let explicit = success_exact(&prog, &m).unwrap().exact.unwrap();
                let closed = memorize_parity_success_exact(n, t);
                assert_eq!(explicit, closed, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn rank_distribution_sums_to_one() {
        let p = parity_rank_distribution(10, 12);
        let total: Q = p.iter().sum();
        assert_eq!(total, q_int(1));
    }

    #[test]
    fn memorize_success_monotone_in_t() {
        let mut prev = Q::zero();
        for t in 0..=12 {
            let s = memorize_parity_success_exact(10, t);
            assert!(s >= prev, "t={t}");
            prev = s;
        }
    }

    #[test]
    fn width_overflow_detected() {
        let m = parity(10);
        assert!(matches!(
            compile_learner(&m, &Strategy::Memorize { t: 12 }),
            Err(Error::WidthOverflow(_))
        ));
    }

    #[test]
    fn bounded_state_structure() {
        let m = parity(2);
        let prog = compile_learner(
            &m,
            &Strategy::BoundedState { bits: 3, mixer_seed: 5, length: 4 },
        )
        .unwrap();
        assert!(prog.validate(4).is_empty());
        assert_eq!(prog.layers.len(), 5);
        assert_eq!(prog.layers[1].len(), 8);
        // deterministic compile
        let prog2 = compile_learner(
            &m,
            &Strategy::BoundedState { bits: 3, mixer_seed: 5, length: 4 },
        )
        .unwrap();
        assert_eq!(prog, prog2);
    }

    #[test]
    fn strategy_mc_agrees_with_exact() {
        let m = parity(3);
        let exact = memorize_parity_success_exact(3, 2);
        let mc = memorize_success_montecarlo(&m, 2, 20_000, 9).unwrap();
        assert!((mc.value - q_to_f64(&exact)).abs() <= 4.0 * mc.ci_halfwidth);
    }

    #[test]
    fn sweep_parity_memorize() {
        let m = parity(4);
        let rows = sweep_tradeoff(
            &m,
            &SweepFamily::Memorize { ts: (0..=5).collect() },
            1000,
            1,
        )
        .unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.mode == "exact" && r.status == "ok"));
        assert!(rows.windows(2).all(|w| w[0].success <= w[1].success));
        // empty grid -> empty table
        let empty = sweep_tradeoff(&m, &SweepFamily::Memorize { ts: vec![] }, 1, 1).unwrap();
        assert!(empty.is_empty());
        // fixed seed -> identical csv
        let again = sweep_tradeoff(
            &m,
            &SweepFamily::Memorize { ts: (0..=5).collect() },
            1000,
            1,
        )
        .unwrap();
        assert_eq!(sweep_csv(&rows), sweep_csv(&again));
    }

    #[test]
    fn random_program_is_valid() {
        for seed in 0..5 {
            let prog = random_program(16, 16, 8, 6, seed);
            assert!(prog.validate(16).is_empty());
        }
    }
}
