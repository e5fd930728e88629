//! Witness searches against extractor certificates.
//!
//! Min-entropy h distributions are represented by flat distributions on sets
//! of size ceil(2^h) only; the bilinear form is linear in each distribution,
//! so its maximum over the min-entropy polytope is attained at flat pairs of
//! minimal size, and enumerating those is exact, not a heuristic. A found
//! witness is always re-verified from scratch before it is returned.

use crate::density::DensityOverX;
use crate::error::{Error, Result};
use crate::extract::cert::{CertKind, ExtractorCert};
use crate::matrix::SignMatrix;
use crate::num::{cmp_q_pow2, cmp_q_scaled_pow2, q_int, q_to_f64, Q};
use crate::prng::{subseed, worker_count, Stream};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

/// coeff * 2^exponent, kept in a form that can be compared exactly.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSpec {
    pub coeff: Q,
    pub exponent: f64,
    pub approx: f64,
}

impl ThresholdSpec {
    pub fn new(coeff: Q, exponent: f64) -> ThresholdSpec {
        let approx = q_to_f64(&coeff) * exponent.exp2();
        ThresholdSpec { coeff, exponent, approx }
    }

    pub fn pow2(exponent: f64) -> ThresholdSpec {
        ThresholdSpec::new(q_int(1), exponent)
    }

    /// value <?> coeff * 2^exponent
    pub fn cmp(&self, value: &Q) -> Ordering {
        cmp_q_scaled_pow2(value, &self.coeff, self.exponent)
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum WitnessData {
    /// flat non-negative density on a column subset
    ColumnSet { cols: Vec<usize> },
    /// flat row distribution x flat column distribution
    FlatPair { rows: Vec<usize>, cols: Vec<usize> },
}

#[derive(Debug, Clone, Serialize)]
pub struct FalsifierWitness {
    pub kind: CertKind,
    pub data: WitnessData,
    /// L2: number of rows at or above the error level (strict row test);
    /// Linf: the bilinear form value
    pub achieved: Q,
    pub violated_threshold: ThresholdSpec,
    /// row counts at the 2^-r level with >= and > respectively (L2 only)
    pub count_inclusive: Option<u64>,
    pub count_strict: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub enum SearchOutcome {
    Witness(FalsifierWitness),
    NoneFound {
        exhaustive: bool,
        candidates: u64,
        /// best value seen: L2 the max strict row count, Linf the max bias
        best: Q,
    },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&FalsifierWitness> {
        match self {
            SearchOutcome::Witness(w) => Some(w),
            SearchOutcome::NoneFound { .. } => None,
        }
    }
}

/// Smallest integer set size admissible at entropy deficit `bits`:
/// s >= total * 2^-bits. Exact for integer deficits.
pub fn min_flat_size(total: u64, bits: f64) -> u64 {
    if bits <= 0.0 {
        return total;
    }
    let s = if bits.fract() == 0.0 && bits < 63.0 {
        let denom = 1u64 << bits as u32;
        total.div_ceil(denom)
    } else {
        (total as f64 * (-bits).exp2()).ceil() as u64
    };
    s.clamp(1, total)
}

fn enumerable_within(count: &BigInt, budget: u64) -> bool {
    count.to_u64().map(|c| c <= budget).unwrap_or(false)
}

/// Lexicographic k-combinations of 0..n as sorted index vectors.
pub struct Combinations {
    n: usize,
    k: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Combinations {
        Combinations { n, k, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let mut i = self.k as i64 - 1;
        while i >= 0 && self.idx[i as usize] == self.n - (self.k - i as usize) {
            i -= 1;
        }
        if i < 0 {
            self.done = true;
        } else {
            self.idx[i as usize] += 1;
            for j in (i as usize + 1)..self.k {
                self.idx[j] = self.idx[j - 1] + 1;
            }
        }
        Some(out)
    }
}

fn col_mask(m: &SignMatrix, cols: &[usize]) -> Vec<u64> {
    let mut mask = vec![0u64; m.words_per_row()];
    for &x in cols {
        mask[x / 64] |= 1 << (x % 64);
    }
    mask
}

/// Row counts of a flat density on `cols` at the 2^-r level:
/// (#rows with ratio >= 2^-r, #rows with ratio > 2^-r).
fn l2_row_counts(m: &SignMatrix, cols: &[usize], r: f64) -> (u64, u64) {
    let mask = col_mask(m, cols);
    let size = cols.len() as i64;
    let mut inclusive = 0u64;
    let mut strict = 0u64;
    for a in 0..m.num_rows() {
        let signed = m.signed_count_masked(a, &mask).abs();
        if signed == 0 {
            continue;
        }
        let ratio = Q::new(BigInt::from(signed), BigInt::from(size));
        match cmp_q_pow2(&ratio, -r) {
            Ordering::Greater => {
                strict += 1;
                inclusive += 1;
            }
            Ordering::Equal => inclusive += 1,
            Ordering::Less => {}
        }
    }
    (inclusive, strict)
}

struct L2Shared<'a> {
    m: &'a SignMatrix,
    cert: &'a ExtractorCert,
    bound: ThresholdSpec,
}

impl L2Shared<'_> {
    /// Some(witness) when the strict row count exceeds 2^-k |A| strictly.
    fn check(&self, cols: &[usize]) -> (u64, u64, bool) {
        let (inclusive, strict) = l2_row_counts(self.m, cols, self.cert.r);
        let violated = self.bound.cmp(&q_int(strict as i64)) == Ordering::Greater;
        (inclusive, strict, violated)
    }

    fn witness(&self, cols: Vec<usize>, inclusive: u64, strict: u64) -> FalsifierWitness {
        FalsifierWitness {
            kind: CertKind::L2,
            data: WitnessData::ColumnSet { cols },
            achieved: q_int(strict as i64),
            violated_threshold: self.bound.clone(),
            count_inclusive: Some(inclusive),
            count_strict: Some(strict),
        }
    }
}

/// Search for a flat non-negative f violating an L2 cert: more than
/// 2^-k |A| rows with |<M_a,f>| / ||f||_1 strictly above 2^-r, among flat
/// densities on column sets of size >= |X| 2^-2l. Exhaustive when the
/// subset count fits the budget, otherwise seeded random sets with greedy
/// swaps. budget = 0 is an error distinct from a completed empty search.
pub fn falsify_l2(m: &SignMatrix, cert: &ExtractorCert, budget: u64, seed: u64) -> Result<SearchOutcome> {
    if cert.kind != CertKind::L2 {
        return Err(Error::ParamOutOfRange("falsify_l2 needs an L2 cert".into()));
    }
    if budget == 0 {
        return Err(Error::SearchExhausted);
    }
    let cols = m.num_cols() as u64;
    let s_min = min_flat_size(cols, 2.0 * cert.l);
    let total: BigInt = (s_min..=cols)
        .map(|s| crate::num::binomial(cols, s))
        .sum();
    let shared = L2Shared {
        m,
        cert,
        bound: ThresholdSpec::new(q_int(m.num_rows() as i64), -cert.k),
    };

    if enumerable_within(&total, budget) {
        // Exhaustive over sizes; size classes are independent work items.
        let sizes: Vec<u64> = (s_min..=cols).collect();
        let next = AtomicUsize::new(0);
        let workers = worker_count().min(sizes.len().max(1));
        let run_shard = |out: &mut ShardResult| {
            loop {
                let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                if i >= sizes.len() {
                    break;
                }
                let s = sizes[i];
                for combo in Combinations::new(cols as usize, s as usize) {
                    let (inclusive, strict, violated) = shared.check(&combo);
                    out.candidates += 1;
                    out.best = out.best.max(strict);
                    if violated {
                        let key = (s, combo.clone());
                        if out.witness.as_ref().map(|(k, ..)| key < *k).unwrap_or(true) {
                            out.witness = Some((key, inclusive, strict));
                        }
                        break; // first violation in lex order within this size
                    }
                }
            }
        };
        let mut shards: Vec<ShardResult> = (0..workers).map(|_| ShardResult::default()).collect();
        if workers <= 1 {
            run_shard(&mut shards[0]);
        } else {
            std::thread::scope(|scope| {
                for shard in shards.iter_mut() {
                    let rs = &run_shard;
                    scope.spawn(move || rs(shard));
                }
            });
        }
        let candidates: u64 = shards.iter().map(|s| s.candidates).sum();
        let best = shards.iter().map(|s| s.best).max().unwrap_or(0);
        let win = shards
            .into_iter()
            .filter_map(|s| s.witness)
            .min_by(|a, b| a.0.cmp(&b.0));
        if let Some(((_, combo), inclusive, strict)) = win {
            // exact re-verification of the stored values
            let (i2, s2, violated) = shared.check(&combo);
            debug_assert!(violated && i2 == inclusive && s2 == strict);
            return Ok(SearchOutcome::Witness(shared.witness(combo, i2, s2)));
        }
        return Ok(SearchOutcome::NoneFound {
            exhaustive: true,
            candidates,
            best: q_int(best as i64),
        });
    }

    // Randomized search: flat sets of random admissible size plus greedy
    // single-swap moves, all charged against the budget.
    let mut spent = 0u64;
    let mut best = 0u64;
    let mut trial = 0u64;
    while spent < budget {
        let mut st = Stream::derive(subseed(seed, trial), 0);
        trial += 1;
        let span = cols - s_min + 1;
        let size = s_min + st.next_below(span);
        let mut set: Vec<usize> = st.subset(cols, size as usize).iter().map(|&v| v as usize).collect();
        let (mut inclusive, mut strict, mut violated) = shared.check(&set);
        spent += 1;
        best = best.max(strict);
        while !violated && spent < budget {
            // best single swap by strict count
            let outside: Vec<usize> = (0..cols as usize).filter(|x| !set.contains(x)).collect();
            let mut improved = false;
            'swap: for i in 0..set.len() {
                for &cand in &outside {
                    let mut alt = set.clone();
                    alt[i] = cand;
                    alt.sort_unstable();
                    let (inc2, str2, v2) = shared.check(&alt);
                    spent += 1;
                    best = best.max(str2);
                    if str2 > strict || v2 {
                        set = alt;
                        inclusive = inc2;
                        strict = str2;
                        violated = v2;
                        improved = true;
                        break 'swap;
                    }
                    if spent >= budget {
                        break 'swap;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if violated {
            let (i2, s2, v2) = shared.check(&set);
            debug_assert!(v2);
            return Ok(SearchOutcome::Witness(shared.witness(set, i2, s2)));
        }
    }
    Ok(SearchOutcome::NoneFound { exhaustive: false, candidates: spent, best: q_int(best as i64) })
}

/// Extremal flat row set of a given size for fixed per-row signed sums:
/// the exact maximizer of |sum over chosen rows| is either the top block or
/// the bottom block of the sorted sums.
fn extremal_rows(sums: &[i64], take: usize) -> (Vec<usize>, i64) {
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by_key(|&i| (sums[i], i));
    let bottom: i64 = order[..take].iter().map(|&i| sums[i]).sum();
    let top: i64 = order[sums.len() - take..].iter().map(|&i| sums[i]).sum();
    if top.abs() >= bottom.abs() {
        let mut rows: Vec<usize> = order[sums.len() - take..].to_vec();
        rows.sort_unstable();
        (rows, top)
    } else {
        let mut rows: Vec<usize> = order[..take].to_vec();
        rows.sort_unstable();
        (rows, bottom)
    }
}

fn pair_value(m: &SignMatrix, rows: &[usize], cols: &[usize]) -> Q {
    let mask = col_mask(m, cols);
    let total: i64 = rows.iter().map(|&a| m.signed_count_masked(a, &mask)).sum();
    Q::new(
        BigInt::from(total.abs()),
        BigInt::from(rows.len() as u64 * cols.len() as u64),
    )
}

/// Exact maximum of |p_a^T M p_x| over flat pairs at the cert's entropy
/// deficits, when one side is enumerable: enumerate that side, take the
/// extremal block on the other. Returns (max value, argmax pair).
pub fn linf_max_bias(m: &SignMatrix, k: f64, l: f64, budget: u64) -> Result<(Q, Vec<usize>, Vec<usize>)> {
    let a_min = min_flat_size(m.num_rows() as u64, k) as usize;
    let x_min = min_flat_size(m.num_cols() as u64, l) as usize;
    let count_cols = crate::num::binomial(m.num_cols() as u64, x_min as u64);
    let count_rows = crate::num::binomial(m.num_rows() as u64, a_min as u64);
    let col_side = count_cols <= count_rows;
    let count = if col_side { &count_cols } else { &count_rows };
    if !enumerable_within(count, budget) {
        return Err(Error::TooLarge(format!(
            "neither side enumerable within budget {budget} (counts {count_rows}, {count_cols})"
        )));
    }
    let mut best: Option<(Q, Vec<usize>, Vec<usize>)> = None;
    if col_side {
        for cols in Combinations::new(m.num_cols(), x_min) {
            let mask = col_mask(m, &cols);
            let sums: Vec<i64> = (0..m.num_rows())
                .map(|a| m.signed_count_masked(a, &mask))
                .collect();
            let (rows, total) = extremal_rows(&sums, a_min);
            let v = Q::new(
                BigInt::from(total.abs()),
                BigInt::from(a_min as u64 * x_min as u64),
            );
            if best.as_ref().map(|(b, ..)| v > *b).unwrap_or(true) {
                best = Some((v, rows, cols));
            }
        }
    } else {
        let t = m.transposed();
        for rows in Combinations::new(m.num_rows(), a_min) {
            let mask = col_mask(&t, &rows);
            let sums: Vec<i64> = (0..t.num_rows())
                .map(|x| t.signed_count_masked(x, &mask))
                .collect();
            let (cols, total) = extremal_rows(&sums, x_min);
            let v = Q::new(
                BigInt::from(total.abs()),
                BigInt::from(a_min as u64 * x_min as u64),
            );
            if best.as_ref().map(|(b, ..)| v > *b).unwrap_or(true) {
                best = Some((v, rows, cols));
            }
        }
    }
    let (v, rows, cols) = best.ok_or(Error::EmptySubset)?;
    debug_assert_eq!(pair_value(m, &rows, &cols), v);
    Ok((v, rows, cols))
}

/// Search for a flat pair violating an Linf cert: |p_a^T M p_x| strictly
/// above 2^-r with row sets of size >= |A| 2^-k and column sets of size
/// >= |X| 2^-l. Exhaustive (exact) when a side is enumerable within budget,
/// otherwise alternating maximization from seeded random starts.
pub fn falsify_linf(m: &SignMatrix, cert: &ExtractorCert, budget: u64, seed: u64) -> Result<SearchOutcome> {
    if cert.kind != CertKind::Linf {
        return Err(Error::ParamOutOfRange("falsify_linf needs an Linf cert".into()));
    }
    if budget == 0 {
        return Err(Error::SearchExhausted);
    }
    let threshold = ThresholdSpec::pow2(-cert.r);
    let a_min = min_flat_size(m.num_rows() as u64, cert.k);
    let x_min = min_flat_size(m.num_cols() as u64, cert.l);
    let enumerated = crate::num::binomial(m.num_rows() as u64, a_min)
        .min(crate::num::binomial(m.num_cols() as u64, x_min));
    match linf_max_bias(m, cert.k, cert.l, budget) {
        Ok((max, rows, cols)) => {
            if threshold.cmp(&max) == Ordering::Greater {
                let verified = pair_value(m, &rows, &cols);
                assert_eq!(verified, max);
                Ok(SearchOutcome::Witness(FalsifierWitness {
                    kind: CertKind::Linf,
                    data: WitnessData::FlatPair { rows, cols },
                    achieved: max,
                    violated_threshold: threshold,
                    count_inclusive: None,
                    count_strict: None,
                }))
            } else {
                Ok(SearchOutcome::NoneFound {
                    exhaustive: true,
                    candidates: enumerated.to_u64().unwrap_or(u64::MAX),
                    best: max,
                })
            }
        }
        Err(Error::TooLarge(_)) => falsify_linf_alternating(m, cert, budget, seed, threshold),
        Err(e) => Err(e),
    }
}

fn falsify_linf_alternating(
    m: &SignMatrix,
    cert: &ExtractorCert,
    budget: u64,
    seed: u64,
    threshold: ThresholdSpec,
) -> Result<SearchOutcome> {
    let a_min = min_flat_size(m.num_rows() as u64, cert.k) as usize;
    let x_min = min_flat_size(m.num_cols() as u64, cert.l) as usize;
    let t = m.transposed();
    let mut spent = 0u64;
    let mut best = Q::zero();
    let mut trial = 0u64;
    while spent < budget {
        let mut st = Stream::derive(subseed(seed, trial), 0);
        trial += 1;
        let mut cols: Vec<usize> = st
            .subset(m.num_cols() as u64, x_min)
            .iter()
            .map(|&v| v as usize)
            .collect();
        let mut value = Q::zero();
        let mut rows: Vec<usize> = Vec::new();
        loop {
            // fix columns, take extremal rows
            let mask = col_mask(m, &cols);
            let sums: Vec<i64> = (0..m.num_rows())
                .map(|a| m.signed_count_masked(a, &mask))
                .collect();
            let (r2, _) = extremal_rows(&sums, a_min);
            rows = r2;
            // fix rows, take extremal columns
            let mask_t = col_mask(&t, &rows);
            let sums_t: Vec<i64> = (0..t.num_rows())
                .map(|x| t.signed_count_masked(x, &mask_t))
                .collect();
            let (c2, _) = extremal_rows(&sums_t, x_min);
            cols = c2;
            let v = pair_value(m, &rows, &cols);
            spent += 1;
            if v > value {
                value = v;
                if spent < budget {
                    continue;
                }
            }
            break;
        }
        if value > best {
            best = value.clone();
        }
        if threshold.cmp(&value) == Ordering::Greater {
            let verified = pair_value(m, &rows, &cols);
            assert_eq!(verified, value);
            return Ok(SearchOutcome::Witness(FalsifierWitness {
                kind: CertKind::Linf,
                data: WitnessData::FlatPair { rows, cols },
                achieved: value,
                violated_threshold: threshold,
                count_inclusive: None,
                count_strict: None,
            }));
        }
    }
    Ok(SearchOutcome::NoneFound { exhaustive: false, candidates: spent, best })
}

#[derive(Default)]
struct ShardResult {
    candidates: u64,
    best: u64,
    witness: Option<((u64, Vec<usize>), u64, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativeSplitReport {
    /// rows with |<M_a,f>| / ||f||_1 at or above 2 * 2^-r
    pub count_inclusive: u64,
    pub count_strict: u64,
    /// the lemma's bound 2 * 2^-k |A|
    pub bound: ThresholdSpec,
    pub bound_satisfied: bool,
    /// rows where the positive / negative part alone reaches 2^-r ||f||_1
    pub plus_exceed_rows: Vec<usize>,
    pub minus_exceed_rows: Vec<usize>,
    /// whether ||f||_2 / ||f||_1 <= 2^(l-r) (reported, not enforced)
    pub ratio_precondition_ok: bool,
    /// case 1 of the split: ||f_+||_1 < 2^-r ||f||_1
    pub plus_mass_below_case1: bool,
}

/// Audit the negative-function lemma on a concrete signed f: split
/// f = f_+ - f_-, count rows at the doubled error level, and report the
/// lemma's 2 * 2^-k |A| bound.
pub fn negative_split_check(m: &SignMatrix, f: &[Q], cert: &ExtractorCert) -> Result<NegativeSplitReport> {
    if f.len() != m.num_cols() {
        return Err(Error::LengthMismatch(format!(
            "f has {} values, matrix has {} columns",
            f.len(),
            m.num_cols()
        )));
    }
    if f.iter().all(|v| v.is_zero()) {
        return Err(Error::ZeroFunction);
    }
    let size = q_int(m.num_cols() as i64);
    let l1: Q = f.iter().map(|v| v.abs()).sum::<Q>() / &size;
    let l2_sq: Q = f.iter().map(|v| v * v).sum::<Q>() / &size;
    // ||f||_2 <= 2^(l-r) ||f||_1  <=>  ||f||_2^2 <= 2^(2l-2r) ||f||_1^2
    let ratio_precondition_ok = cmp_q_scaled_pow2(&l2_sq, &(&l1 * &l1), 2.0 * (cert.l - cert.r))
        != Ordering::Greater;

    let plus: Vec<Q> = f.iter().map(|v| if v.is_positive() { v.clone() } else { Q::zero() }).collect();
    let minus: Vec<Q> = f.iter().map(|v| if v.is_negative() { -v.clone() } else { Q::zero() }).collect();
    let plus_l1: Q = plus.iter().sum::<Q>() / &size;
    let plus_mass_below_case1 = cmp_q_scaled_pow2(&plus_l1, &l1, -cert.r) == Ordering::Less;

    let mut count_inclusive = 0u64;
    let mut count_strict = 0u64;
    let mut plus_exceed_rows = Vec::new();
    let mut minus_exceed_rows = Vec::new();
    let two_l1 = &l1 * q_int(2);
    for a in 0..m.num_rows() {
        let ip = m.matvec_entry(a, f) / &size;
        match cmp_q_scaled_pow2(&ip.abs(), &two_l1, -cert.r) {
            Ordering::Greater => {
                count_strict += 1;
                count_inclusive += 1;
            }
            Ordering::Equal => count_inclusive += 1,
            Ordering::Less => {}
        }
        let ip_plus = m.matvec_entry(a, &plus) / &size;
        if cmp_q_scaled_pow2(&ip_plus.abs(), &l1, -cert.r) != Ordering::Less {
            plus_exceed_rows.push(a);
        }
        let ip_minus = m.matvec_entry(a, &minus) / &size;
        if cmp_q_scaled_pow2(&ip_minus.abs(), &l1, -cert.r) != Ordering::Less {
            minus_exceed_rows.push(a);
        }
    }
    let bound = ThresholdSpec::new(q_int(2 * m.num_rows() as i64), -cert.k);
    let bound_satisfied = bound.cmp(&q_int(count_inclusive as i64)) != Ordering::Greater;
    Ok(NegativeSplitReport {
        count_inclusive,
        count_strict,
        bound,
        bound_satisfied,
        plus_exceed_rows,
        minus_exceed_rows,
        ratio_precondition_ok,
        plus_mass_below_case1,
    })
}

/// Flat density helper shared with callers that want a DensityOverX view of
/// a witness column set.
pub fn flat_density(m: &SignMatrix, cols: &[usize]) -> DensityOverX {
    DensityOverX::flat(m.num_cols(), cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::cert::Provenance;
    use crate::matrix::{build_matrix, FamilyTag, MatrixSpec};
    use crate::num::q;

    fn parity(n: u32) -> SignMatrix {
        build_matrix(&MatrixSpec::Parity { n }).unwrap()
    }

    fn l2(k: f64, l: f64, r: f64) -> ExtractorCert {
        ExtractorCert::new(CertKind::L2, k, l, r, Provenance::Asserted).unwrap()
    }

    fn linf(k: f64, l: f64, r: f64) -> ExtractorCert {
        ExtractorCert::new(CertKind::Linf, k, l, r, Provenance::Asserted).unwrap()
    }

    #[test]
    fn all_plus_l2_witness() {
        // all-(+1): uniform f has every row at ratio 1 > 1/2
        let m = SignMatrix::from_entries(4, 4, FamilyTag::File, |_, _| 1).unwrap();
        // k=1, l=0... l must be positive; use a tiny l, which makes only the
        // full column set admissible (min size = ceil(4 * 2^-0.02) = 4)
        let cert = l2(1.0, 0.01, 1.0);
        let out = falsify_l2(&m, &cert, 1 << 20, 0).unwrap();
        let w = out.witness().expect("witness expected");
        assert_eq!(w.count_strict, Some(4));
    }

    #[test]
    fn parity4_johnson_cert_survives_exhaustive() {
        let m = parity(4);
        let out = crate::extract::certify::certify_johnson(&m, &q_int(0), None).unwrap();
        let res = falsify_l2(&m, &out.cert, 1 << 21, 0).unwrap();
        match res {
            SearchOutcome::NoneFound { exhaustive, .. } => assert!(exhaustive),
            SearchOutcome::Witness(w) => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn zero_budget_is_search_exhausted() {
        let m = parity(2);
        assert!(matches!(
            falsify_l2(&m, &l2(1.0, 1.0, 1.0), 0, 0),
            Err(Error::SearchExhausted)
        ));
        assert!(matches!(
            falsify_linf(&m, &linf(1.0, 1.0, 1.0), 0, 0),
            Err(Error::SearchExhausted)
        ));
    }

    #[test]
    fn parity3_linf_ground_truth() {
        let m = parity(3);
        // (k=1, l=1): flat pairs of size 4 x 4; exact max bias = 1/2
        let (max, rows, cols) = linf_max_bias(&m, 1.0, 1.0, 10_000).unwrap();
        assert_eq!(max, q(1, 2));
        assert_eq!(rows.len(), 4);
        assert_eq!(cols.len(), 4);
        // r = 1: max == 1/2, not strictly above -> none
        let none = falsify_linf(&m, &linf(1.0, 1.0, 1.0), 10_000, 0).unwrap();
        assert!(none.witness().is_none());
        // r = 2: 1/2 > 1/4 -> witness
        let wit = falsify_linf(&m, &linf(1.0, 1.0, 2.0), 10_000, 0).unwrap();
        let w = wit.witness().expect("witness");
        assert_eq!(w.achieved, q(1, 2));
    }

    #[test]
    fn all_plus_linf_witness() {
        let m = SignMatrix::from_entries(4, 4, FamilyTag::File, |_, _| 1).unwrap();
        let wit = falsify_linf(&m, &linf(1.0, 1.0, 1.0), 10_000, 0).unwrap();
        let w = wit.witness().expect("uniform/uniform reaches 1");
        assert_eq!(w.achieved, q_int(1));
    }

    #[test]
    fn exhaustive_max_matches_bruteforce_pairs() {
        // independent oracle: enumerate both sides explicitly on a random 8x8
        let m = build_matrix(&MatrixSpec::Random { rows: 8, cols: 8, seed: 13 }).unwrap();
        let (max, ..) = linf_max_bias(&m, 1.0, 1.0, 100_000).unwrap();
        let mut brute = Q::zero();
        for rows in Combinations::new(8, 4) {
            for cols in Combinations::new(8, 4) {
                let v = pair_value(&m, &rows, &cols);
                if v > brute {
                    brute = v;
                }
            }
        }
        assert_eq!(max, brute);
    }

    #[test]
    fn witness_reverification_is_exact() {
        let m = SignMatrix::from_entries(4, 4, FamilyTag::File, |_, _| 1).unwrap();
        let wit = falsify_linf(&m, &linf(1.0, 1.0, 3.0), 1000, 7).unwrap();
        let w = wit.witness().unwrap();
        if let WitnessData::FlatPair { rows, cols } = &w.data {
            assert_eq!(pair_value(&m, rows, cols), w.achieved);
        } else {
            panic!("wrong witness shape");
        }
    }

    #[test]
    fn negative_split_column_pattern() {
        // f(x) = (-1)^(x_3 bit): the sign of the first coordinate on
        // parity(4); the rows reaching the per-part level at r=1 are exactly
        // 0000 and 1000.
        let m = parity(4);
        let f: Vec<Q> = (0..16)
            .map(|x| if x & 0b1000 == 0 { q_int(1) } else { q_int(-1) })
            .collect();
        let rep = negative_split_check(&m, &f, &l2(4.0, 1.0, 1.0)).unwrap();
        assert_eq!(rep.plus_exceed_rows, vec![0b0000, 0b1000]);
        assert_eq!(rep.minus_exceed_rows, vec![0b0000, 0b1000]);
        // only row 1000 has |<M_a,f>| = 1 at the combined level 2*2^-1 = 1
        assert_eq!(rep.count_inclusive, 1);
        assert!(rep.bound_satisfied);
    }

    #[test]
    fn negative_split_degenerate_nonnegative() {
        let m = parity(2);
        let f: Vec<Q> = vec![q_int(1), q_int(0), q_int(0), q_int(0)];
        let rep = negative_split_check(&m, &f, &l2(1.0, 1.0, 1.0)).unwrap();
        assert!(rep.minus_exceed_rows.is_empty());
        assert!(negative_split_check(&m, &vec![q_int(0); 4], &l2(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn min_sizes() {
        assert_eq!(min_flat_size(16, 2.0), 4);
        assert_eq!(min_flat_size(16, 1.0), 8);
        assert_eq!(min_flat_size(16, 0.9928), 9);
        assert_eq!(min_flat_size(8, 5.0), 1);
        assert_eq!(min_flat_size(8, 0.0), 8);
    }
}
