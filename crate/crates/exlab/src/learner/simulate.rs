//! Success probabilities and weak-learning values of branching programs:
//! exact forward dynamic programming on the joint (vertex, x) state, or
//! Monte Carlo with reproducible per-trial streams.

use crate::error::{Error, Result};
use crate::learner::program::{edge_index, BranchingProgram, LeafLabel, VertexKind};
use crate::matrix::SignMatrix;
use crate::num::{q_int, q_to_f64, Q};
use crate::prng::{subseed, Stream};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

/// layers * width * |A| * |X| cap for the exact DP
const DP_GUARD: u128 = 1 << 32;

#[derive(Debug, Clone, Serialize)]
pub struct SuccessReport {
    pub value: f64,
    /// exact rational value (exact mode only)
    pub exact: Option<Q>,
    pub mode: String,
    pub trials: u64,
    pub ci_halfwidth: f64,
}

pub fn dp_feasible(b: &BranchingProgram, m: &SignMatrix) -> bool {
    let width = b.layers.iter().map(|l| l.len()).max().unwrap_or(0) as u128;
    let cost = b.layers.len() as u128 * width * m.num_rows() as u128 * m.num_cols() as u128;
    cost <= DP_GUARD
}

/// Exact forward DP. Start mass 1/|X| per x at the start vertex; each step
/// splits mass uniformly over a and routes along (a, M(a,x)). Calls `on_leaf`
/// with (layer, vertex, x, mass) for every unit of mass that reaches a leaf.
pub fn forward_dp<F>(b: &BranchingProgram, m: &SignMatrix, mut on_leaf: F) -> Result<()>
where
    F: FnMut(usize, usize, usize, &Q),
{
    if !dp_feasible(b, m) {
        return Err(Error::TooLarge(
            "exact DP guard exceeded; use Monte Carlo".into(),
        ));
    }
    let ncols = m.num_cols();
    let nrows = m.num_rows();
    let inv_rows = Q::new(BigInt::from(1), BigInt::from(nrows as u64));
    let start = Q::new(BigInt::from(1), BigInt::from(ncols as u64));
    let mut mass: Vec<Vec<Q>> = vec![vec![Q::zero(); ncols]; b.layers[0].len()];
    for x in 0..ncols {
        mass[0][x] = start.clone();
    }
    for li in 0..b.layers.len() {
        let last = li + 1 == b.layers.len();
        let mut next: Vec<Vec<Q>> = if last {
            Vec::new()
        } else {
            vec![vec![Q::zero(); ncols]; b.layers[li + 1].len()]
        };
        for (vi, v) in b.layers[li].iter().enumerate() {
            match v {
                VertexKind::Leaf { .. } => {
                    for x in 0..ncols {
                        if !mass[vi][x].is_zero() {
                            on_leaf(li, vi, x, &mass[vi][x]);
                        }
                    }
                }
                VertexKind::Internal { edges } => {
                    for x in 0..ncols {
                        if mass[vi][x].is_zero() {
                            continue;
                        }
                        let step = &mass[vi][x] * &inv_rows;
                        for a in 0..nrows {
                            let target = edges[edge_index(a, m.entry(a, x))] as usize;
                            next[target][x] += &step;
                        }
                    }
                }
            }
        }
        if !last {
            mass = next;
        }
    }
    Ok(())
}

/// Pr[output = x], exact.
pub fn success_exact(b: &BranchingProgram, m: &SignMatrix) -> Result<SuccessReport> {
    let mut success = Q::zero();
    forward_dp(b, m, |li, vi, x, mass| {
        if let VertexKind::Leaf { label: LeafLabel::Guess(g) } = b.vertex(li, vi) {
            if *g == x {
                success += mass;
            }
        }
    })?;
    Ok(SuccessReport {
        value: q_to_f64(&success),
        exact: Some(success),
        mode: "exact".into(),
        trials: 0,
        ci_halfwidth: 0.0,
    })
}

/// Monte Carlo estimate with a 95% normal-approximation half-width.
pub fn success_montecarlo(
    b: &BranchingProgram,
    m: &SignMatrix,
    trials: u64,
    seed: u64,
) -> Result<SuccessReport> {
    if trials < 1 {
        return Err(Error::ParamOutOfRange("trials must be >= 1".into()));
    }
    let mut hits = 0u64;
    for t in 0..trials {
        let mut st = Stream::derive(subseed(seed, t), 0);
        let x = st.next_below(m.num_cols() as u64) as usize;
        let mut layer = 0usize;
        let mut idx = 0usize;
        loop {
            match b.vertex(layer, idx) {
                VertexKind::Leaf { label } => {
                    if let LeafLabel::Guess(g) = label {
                        if *g == x {
                            hits += 1;
                        }
                    }
                    break;
                }
                VertexKind::Internal { edges } => {
                    let a = st.next_below(m.num_rows() as u64) as usize;
                    idx = edges[edge_index(a, m.entry(a, x))] as usize;
                    layer += 1;
                }
            }
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

#[derive(Debug, Clone, Serialize)]
pub struct WeakValueReport {
    /// E[ |<h_v, M^(x)>| ]
    pub value: f64,
    pub exact: Option<Q>,
    /// per tau: probability mass with agreement fraction > 1/2 + tau,
    /// i.e. correlation > 2 tau
    pub tail_mass: Vec<(Q, Q)>,
    pub mode: String,
    pub trials: u64,
}

fn hyp_correlation(m: &SignMatrix, h: &[i8], x: usize) -> Q {
    let mut sum = 0i64;
    for (a, &ha) in h.iter().enumerate() {
        sum += (ha * m.entry(a, x)) as i64;
    }
    Q::new(BigInt::from(sum), BigInt::from(m.num_rows() as u64))
}

fn require_hypothesis<'a>(b: &'a BranchingProgram, li: usize, vi: usize) -> Result<&'a [i8]> {
    match b.vertex(li, vi) {
        VertexKind::Leaf { label: LeafLabel::Hypothesis(h) } => Ok(h),
        VertexKind::Leaf { label: LeafLabel::Guess(_) } => Err(Error::LabelKindMismatch(format!(
            "leaf ({li},{vi}) carries a guess label, weak value needs hypotheses"
        ))),
        _ => unreachable!("leaf expected"),
    }
}

/// Weak-learning value E[|<h_v, M^(x)>|], exact, plus the mass above
/// agreement 1/2 + tau for each supplied tau.
pub fn weak_value_exact(
    b: &BranchingProgram,
    m: &SignMatrix,
    taus: &[Q],
) -> Result<WeakValueReport> {
    // reject mixed label kinds up front
    for (li, layer) in b.layers.iter().enumerate() {
        for (vi, v) in layer.iter().enumerate() {
            if matches!(v, VertexKind::Leaf { .. }) {
                require_hypothesis(b, li, vi)?;
            }
        }
    }
    let mut value = Q::zero();
    let mut tails = vec![Q::zero(); taus.len()];
    let mut err = None;
    forward_dp(b, m, |li, vi, x, mass| {
        let h = match require_hypothesis(b, li, vi) {
            Ok(h) => h,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        let corr = hyp_correlation(m, h, x);
        value += mass * corr.abs();
        for (ti, tau) in taus.iter().enumerate() {
            if corr > tau * q_int(2) {
                tails[ti] += mass;
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(WeakValueReport {
        value: q_to_f64(&value),
        exact: Some(value),
        tail_mass: taus.iter().cloned().zip(tails).collect(),
        mode: "exact".into(),
        trials: 0,
    })
}

pub fn weak_value_montecarlo(
    b: &BranchingProgram,
    m: &SignMatrix,
    taus: &[Q],
    trials: u64,
    seed: u64,
) -> Result<WeakValueReport> {
    if trials < 1 {
        return Err(Error::ParamOutOfRange("trials must be >= 1".into()));
    }
    let mut total = Q::zero();
    let mut tails = vec![0u64; taus.len()];
    for t in 0..trials {
        let mut st = Stream::derive(subseed(seed, t), 0);
        let x = st.next_below(m.num_cols() as u64) as usize;
        let mut layer = 0usize;
        let mut idx = 0usize;
        loop {
            match b.vertex(layer, idx) {
                VertexKind::Leaf { .. } => break,
                VertexKind::Internal { edges } => {
                    let a = st.next_below(m.num_rows() as u64) as usize;
                    idx = edges[edge_index(a, m.entry(a, x))] as usize;
                    layer += 1;
                }
            }
        }
        let h = require_hypothesis(b, layer, idx)?;
        let corr = hyp_correlation(m, h, x);
        for (ti, tau) in taus.iter().enumerate() {
            if corr > tau * q_int(2) {
                tails[ti] += 1;
            }
        }
        total += corr.abs();
    }
    let value = total / q_int(trials as i64);
    Ok(WeakValueReport {
        value: q_to_f64(&value),
        exact: None,
        tail_mass: taus
            .iter()
            .cloned()
            .zip(tails.iter().map(|&c| Q::new(BigInt::from(c), BigInt::from(trials))))
            .collect(),
        mode: "montecarlo".into(),
        trials,
    })
}
