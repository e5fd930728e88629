//! Bias computations: submatrix bias, row-orthogonality profiles, Hamming
//! sphere (Krawtchouk) biases and low-degree polynomial bias sampling.

use crate::error::{Error, Result};
use crate::matrix::{monomial_truth_tables, monomials_graded_lex, sparse_support_set, SignMatrix};
use crate::num::{binomial, binomial_sum, q_int, q_to_f64, Q};
use crate::prng::{subseed, Stream};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

/// |sum over A' x X' of M(a,x)| / (|A'| |X'|), exact.
pub fn submatrix_bias(m: &SignMatrix, rows: &[usize], cols: &[usize]) -> Result<Q> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut mask = vec![0u64; m.words_per_row()];
    for &x in cols {
        if x >= m.num_cols() {
            return Err(Error::IndexOutOfRange(format!("column {x}")));
        }
        mask[x / 64] |= 1 << (x % 64);
    }
    let mut total: i64 = 0;
    for &a in rows {
        if a >= m.num_rows() {
            return Err(Error::IndexOutOfRange(format!("row {a}")));
        }
        total += m.signed_count_masked(a, &mask);
    }
    Ok(Q::new(
        BigInt::from(total.abs()),
        BigInt::from(rows.len() as u64 * cols.len() as u64),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityProfile {
    /// threshold on |<M_a, M_a'>|
    pub eps: Q,
    /// max over rows of the fraction of rows exceeding eps
    pub delta: Q,
    /// per-row exceedance counts (a row always exceeds against itself
    /// whenever eps < 1)
    pub per_row_counts: Vec<usize>,
}

/// delta = max over rows a of |{a' : |<M_a, M_a'>| > eps}| / |A| (strict >).
pub fn orthogonality_profile(m: &SignMatrix, eps: &Q) -> Result<OrthogonalityProfile> {
    if eps.is_negative() || *eps >= q_int(1) {
        return Err(Error::ParamOutOfRange(format!(
            "eps must be in [0,1), got {eps}"
        )));
    }
    let rows = m.num_rows();
    let mut per_row_counts = vec![0usize; rows];
    for a in 0..rows {
        for a2 in 0..rows {
            let ip = m.row_inner_product(a, a2)?;
            if ip.abs() > *eps {
                per_row_counts[a] += 1;
            }
        }
    }
    let max = *per_row_counts.iter().max().expect("at least 2 rows");
    Ok(OrthogonalityProfile {
        eps: eps.clone(),
        delta: Q::new(BigInt::from(max), BigInt::from(rows)),
        per_row_counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlBiasMode {
    KrtBound,
    ParsevalBound,
    Exact,
}

#[derive(Debug, Clone, Serialize)]
pub struct TlBiasReport {
    pub n: u32,
    pub weight: u32,
    pub eps: Q,
    pub mode: String,
    /// closed-form delta for the bound modes
    pub delta: Option<f64>,
    /// for krt_bound: whether eps > (8 l / n)^(l/2)
    pub within_validity: Option<bool>,
    /// exact mode: bias of a row of each Hamming weight (a Krawtchouk ratio)
    pub per_weight: Option<Vec<PerWeightBias>>,
    /// exact mode: fraction of rows a with |bias(a)| > eps, exact
    pub exceedance: Option<Q>,
    pub exceedance_f64: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerWeightBias {
    pub weight: u32,
    pub bias: Q,
    pub bias_f64: f64,
}

/// delta = 2 exp(-eps^(2/l) n / 8); valid for eps > (8l/n)^(l/2).
pub fn krt_bound(n: u32, l: u32, eps: f64) -> (f64, bool) {
    let delta = 2.0 * (-eps.powf(2.0 / l as f64) * n as f64 / 8.0).exp();
    let valid = eps > (8.0 * l as f64 / n as f64).powf(l as f64 / 2.0);
    (delta, valid)
}

/// delta = 1 / (|T| eps^2).
pub fn parseval_bound(t_size: f64, eps: f64) -> f64 {
    1.0 / (t_size * eps * eps)
}

/// Exact per-weight bias of T_l rows: bias(a) depends only on |a| and equals
/// K_l(|a|; n) / C(n,l), computed here by enumerating the sphere.
pub fn tl_exact(n: u32, l: u32, eps: &Q) -> Result<(Vec<PerWeightBias>, Q)> {
    let sphere = binomial(n as u64, l as u64);
    if sphere > BigInt::from(10_000_000u64) {
        return Err(Error::TooLarge(format!("C({n},{l}) = {sphere} above 10^7")));
    }
    let support = sparse_support_set(n, l)?;
    let size = BigInt::from(support.len() as u64);
    let mut per_weight = Vec::with_capacity(n as usize + 1);
    let mut exceed_rows = BigInt::zero();
    for w in 0..=n {
        // representative of weight w; bias depends only on the weight
        let a: u64 = if w == 0 { 0 } else { (1u64 << w) - 1 };
        let mut sum: i64 = 0;
        for &x in support.members() {
            if (a & x).count_ones() % 2 == 0 {
                sum += 1;
            } else {
                sum -= 1;
            }
        }
        let bias = Q::new(BigInt::from(sum), size.clone());
        if bias.abs() > *eps {
            exceed_rows += binomial(n as u64, w as u64);
        }
        per_weight.push(PerWeightBias { weight: w, bias_f64: q_to_f64(&bias), bias });
    }
    let exceedance = Q::new(exceed_rows, BigInt::from(1u64) << n as usize);
    Ok((per_weight, exceedance))
}

pub fn tl_bias(n: u32, l: u32, eps: &Q, mode: TlBiasMode) -> Result<TlBiasReport> {
    if l > n {
        return Err(Error::InvalidSpec(format!("weight {l} exceeds n={n}")));
    }
    let eps_f = q_to_f64(eps);
    match mode {
        TlBiasMode::KrtBound => {
            let (delta, valid) = krt_bound(n, l, eps_f);
            Ok(TlBiasReport {
                n,
                weight: l,
                eps: eps.clone(),
                mode: "krt_bound".into(),
                delta: Some(delta),
                within_validity: Some(valid),
                per_weight: None,
                exceedance: None,
                exceedance_f64: None,
            })
        }
        TlBiasMode::ParsevalBound => {
            let t_size = q_to_f64(&Q::from_integer(binomial(n as u64, l as u64)));
            Ok(TlBiasReport {
                n,
                weight: l,
                eps: eps.clone(),
                mode: "parseval_bound".into(),
                delta: Some(parseval_bound(t_size, eps_f)),
                within_validity: None,
                per_weight: None,
                exceedance: None,
                exceedance_f64: None,
            })
        }
        TlBiasMode::Exact => {
            let (per_weight, exceedance) = tl_exact(n, l, eps)?;
            Ok(TlBiasReport {
                n,
                weight: l,
                eps: eps.clone(),
                mode: "exact".into(),
                delta: None,
                within_validity: None,
                per_weight: Some(per_weight),
                exceedance_f64: Some(q_to_f64(&exceedance)),
                exceedance: Some(exceedance),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LowdegStats {
    pub n: u32,
    pub d: u32,
    pub trials: u64,
    pub exhaustive: bool,
    /// |bias| quantiles at 0, 25, 50, 75, 100 percent
    pub abs_bias_quantiles: [f64; 5],
    /// per caller-supplied threshold: exact fraction of sampled polynomials
    /// with |bias| > threshold
    pub exceedance: Vec<(Q, Q)>,
    pub nonzero_bias_count: u64,
}

#[derive(Debug, Clone)]
pub enum TrialSpec {
    Sample { trials: u64, seed: u64 },
    Exhaustive,
}

/// Bias statistics for uniform polynomials in P_d over F_2^n. Every bias is
/// computed exactly by full evaluation; the headline constants of the
/// low-degree bias bound are left to the caller as thresholds.
pub fn lowdeg_bias_stats(
    n: u32,
    d: u32,
    trials: &TrialSpec,
    thresholds: &[Q],
) -> Result<LowdegStats> {
    if d > n {
        return Err(Error::InvalidSpec(format!("degree {d} exceeds n={n}")));
    }
    if n > 24 {
        return Err(Error::TooLarge(format!("2^{n} evaluation points")));
    }
    let mono_count: u64 = binomial_sum(n as u64, d as u64)
        .try_into()
        .map_err(|_| Error::TooLarge("monomial count".into()))?;
    let points = 1usize << n;
    let words = points.div_ceil(64);
    let monomials = monomials_graded_lex(n, d);
    let tts = monomial_truth_tables(n, &monomials);

    let bias_of = |poly_mask: &[u64]| -> Q {
        let mut tt = vec![0u64; words];
        for (i, mono_tt) in tts.iter().enumerate() {
            if poly_mask[i / 64] >> (i % 64) & 1 == 1 {
                for (t, s) in tt.iter_mut().zip(mono_tt) {
                    *t ^= s;
                }
            }
        }
        let ones: u64 = tt.iter().map(|w| w.count_ones() as u64).sum();
        Q::new(
            BigInt::from(points as i64 - 2 * ones as i64),
            BigInt::from(points as u64),
        )
    };

    let mask_words = (mono_count as usize).div_ceil(64);
    let mut biases: Vec<Q> = Vec::new();
    let exhaustive = matches!(trials, TrialSpec::Exhaustive);
    match trials {
        TrialSpec::Exhaustive => {
            if mono_count > 20 {
                return Err(Error::TooLarge(format!(
                    "2^{mono_count} polynomials for exhaustive enumeration"
                )));
            }
            for p in 0u64..(1u64 << mono_count) {
                biases.push(bias_of(&[p]));
            }
        }
        TrialSpec::Sample { trials, seed } => {
            let top_mask: u64 = if mono_count % 64 == 0 {
                u64::MAX
            } else {
                (1u64 << (mono_count % 64)) - 1
            };
            for t in 0..*trials {
                let mut st = Stream::derive(subseed(*seed, t), 0);
                let mut mask: Vec<u64> = (0..mask_words).map(|_| st.next_u64()).collect();
                *mask.last_mut().unwrap() &= top_mask;
                biases.push(bias_of(&mask));
            }
        }
    }

    let count = biases.len() as u64;
    let mut abs: Vec<Q> = biases.iter().map(|b| b.abs()).collect();
    abs.sort();
    let quantile = |q: f64| -> f64 {
        let idx = ((abs.len() - 1) as f64 * q).round() as usize;
        q_to_f64(&abs[idx])
    };
    let exceedance = thresholds
        .iter()
        .map(|th| {
            let over = abs.iter().filter(|b| **b > *th).count() as u64;
            (th.clone(), Q::new(BigInt::from(over), BigInt::from(count)))
        })
        .collect();
    Ok(LowdegStats {
        n,
        d,
        trials: count,
        exhaustive,
        abs_bias_quantiles: [quantile(0.0), quantile(0.25), quantile(0.5), quantile(0.75), quantile(1.0)],
        exceedance,
        nonzero_bias_count: abs.iter().filter(|b| !b.is_zero()).count() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_matrix, FamilyTag, MatrixSpec};
    use crate::num::q;

    fn parity(n: u32) -> SignMatrix {
        build_matrix(&MatrixSpec::Parity { n }).unwrap()
    }

    #[test]
    fn full_parity_bias() {
        let m = parity(2);
        let rows: Vec<usize> = (0..4).collect();
        let cols: Vec<usize> = (0..4).collect();
        // only the all-zero row survives: 4 / 16
        assert_eq!(submatrix_bias(&m, &rows, &cols).unwrap(), q(1, 4));
    }

    #[test]
    fn all_plus_bias_is_one() {
        let m = SignMatrix::from_entries(3, 3, FamilyTag::File, |_, _| 1).unwrap();
        assert_eq!(submatrix_bias(&m, &[0, 2], &[1]).unwrap(), q_int(1));
        assert!(submatrix_bias(&m, &[], &[0]).is_err());
    }

    #[test]
    fn bias_invariant_under_permutation() {
        let m = build_matrix(&MatrixSpec::Random { rows: 8, cols: 8, seed: 2 }).unwrap();
        let b1 = submatrix_bias(&m, &[1, 3, 5], &[0, 2, 7]).unwrap();
        let b2 = submatrix_bias(&m, &[5, 1, 3], &[7, 0, 2]).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn parity3_max_4x4_bias_is_half() {
        // exhaustive over all C(8,4)^2 pairs of 4-row, 4-column subsets
        let m = parity(3);
        let subsets: Vec<Vec<usize>> = combinations(8, 4);
        let mut best = q_int(0);
        for rows in &subsets {
            for cols in &subsets {
                let b = submatrix_bias(&m, rows, cols).unwrap();
                if b > best {
                    best = b;
                }
            }
        }
        assert_eq!(best, q(1, 2));
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.clone());
            let mut i = k as i64 - 1;
            while i >= 0 && idx[i as usize] == n - (k - i as usize) {
                i -= 1;
            }
            if i < 0 {
                return out;
            }
            idx[i as usize] += 1;
            for j in (i as usize + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    #[test]
    fn profile_parity4() {
        let p = orthogonality_profile(&parity(4), &q_int(0)).unwrap();
        assert_eq!(p.delta, q(1, 16));
        assert!(p.per_row_counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn profile_all_plus() {
        let m = SignMatrix::from_entries(4, 4, FamilyTag::File, |_, _| 1).unwrap();
        let p = orthogonality_profile(&m, &q(1, 2)).unwrap();
        assert_eq!(p.delta, q_int(1));
    }

    #[test]
    fn subset_parity_weight4_bias() {
        // weight-4 element against T_2 of {0,1}^4: every x in T_2 has
        // a.x = 2, so the bias is +1; visible as the 0-vs-15 row inner
        // product of the subset-parity matrix.
        let support = sparse_support_set(4, 2).unwrap();
        let m = build_matrix(&MatrixSpec::SubsetParity { n: 4, support }).unwrap();
        assert_eq!(m.row_inner_product(0, 15).unwrap(), q_int(1));
    }

    #[test]
    fn krt_closed_form() {
        let (delta, valid) = krt_bound(64, 2, 0.5);
        assert!((delta - 2.0 * (-4.0f64).exp()).abs() < 1e-12);
        assert!(valid); // (16/64)^1 = 0.25 < 0.5
        let (_, invalid) = krt_bound(64, 2, 0.2);
        assert!(!invalid);
    }

    #[test]
    fn parseval_closed_form() {
        assert!((parseval_bound(1000.0, 0.1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn tl_exact_small() {
        let (per_weight, _) = tl_exact(4, 2, &q(1, 2)).unwrap();
        assert_eq!(per_weight[1].bias, q_int(0)); // weight 1: K_2(1;4) = 0
        assert_eq!(per_weight[4].bias, q_int(1)); // weight 4: all +1
        assert_eq!(per_weight[0].bias, q_int(1));
    }

    #[test]
    fn tl_exact_matches_krawtchouk_closed_form() {
        // oracle: K_l(w) = sum_j (-1)^j C(w,j) C(n-w, l-j)
        for (n, l) in [(6u32, 2u32), (8, 3), (10, 4)] {
            let (per_weight, _) = tl_exact(n, l, &q(1, 2)).unwrap();
            for w in 0..=n {
                let mut k = BigInt::zero();
                for j in 0..=l.min(w) {
                    let term = binomial(w as u64, j as u64) * binomial((n - w) as u64, (l - j) as u64);
                    if j % 2 == 0 {
                        k += term;
                    } else {
                        k -= term;
                    }
                }
                let want = Q::new(k, binomial(n as u64, l as u64));
                assert_eq!(per_weight[w as usize].bias, want, "n={n} l={l} w={w}");
            }
        }
    }

    #[test]
    fn tl_complement_symmetry() {
        // bias(a-complement) = bias(a) * (-1)^l
        for (n, l) in [(6u32, 2u32), (7, 3), (14, 3)] {
            let (per_weight, _) = tl_exact(n, l, &q(1, 2)).unwrap();
            for w in 0..=n {
                let lhs = &per_weight[(n - w) as usize].bias;
                let rhs = &per_weight[w as usize].bias;
                let signed = if l % 2 == 1 { -rhs.clone() } else { rhs.clone() };
                assert_eq!(*lhs, signed);
            }
        }
    }

    #[test]
    fn lowdeg_exact_small_cases() {
        // n=2, d=0: the two constants, |bias| = 1 always
        let s = lowdeg_bias_stats(2, 0, &TrialSpec::Exhaustive, &[q_int(0)]).unwrap();
        assert_eq!(s.trials, 2);
        assert_eq!(s.abs_bias_quantiles[0], 1.0);
        assert_eq!(s.abs_bias_quantiles[4], 1.0);
        // n=2, d=1: exactly 2 of 8 affine polynomials have nonzero bias
        let s = lowdeg_bias_stats(2, 1, &TrialSpec::Exhaustive, &[q_int(0)]).unwrap();
        assert_eq!(s.trials, 8);
        assert_eq!(s.nonzero_bias_count, 2);
        assert_eq!(s.exceedance[0].1, q(2, 8));
    }

    #[test]
    fn lowdeg_sampling_deterministic() {
        let a = lowdeg_bias_stats(8, 2, &TrialSpec::Sample { trials: 50, seed: 1 }, &[q(1, 2)]).unwrap();
        let b = lowdeg_bias_stats(8, 2, &TrialSpec::Sample { trials: 50, seed: 1 }, &[q(1, 2)]).unwrap();
        assert_eq!(a.abs_bias_quantiles, b.abs_bias_quantiles);
        assert_eq!(a.exceedance, b.exceedance);
    }
}
