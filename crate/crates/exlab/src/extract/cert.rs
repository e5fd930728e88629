//! Extractor parameter certificates and the pure parameter arithmetic that
//! moves between them: L2 <-> Linf conversions, transposition, bias
//! amplification, the main theorem's resource budget, the SQ-dimension
//! corollary and the mixing-parameter map.
//!
//! Parameters k, l, r are in bits and may be fractional; the error of a cert
//! is 2^-r. A cert of kind `Linf` is read as the (k, l ~ r) statement: every
//! pair of distributions with row min-entropy >= log|A|-k and column
//! min-entropy >= log|X|-l gives bilinear form value at most 2^-r. Since the
//! bilinear form over flat pairs is exactly a submatrix bias, `Linf` is also
//! the bias-form statement of the main corollary.

use crate::error::{Error, Result};
use crate::num::{q_to_f64, Q};
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertKind {
    L2,
    Linf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Johnson,
    Sigma,
    Exhaustive,
    Derived(String),
    Asserted,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Johnson => f.write_str("johnson"),
            Provenance::Sigma => f.write_str("sigma"),
            Provenance::Exhaustive => f.write_str("exhaustive"),
            Provenance::Derived(rule) => write!(f, "derived({rule})"),
            Provenance::Asserted => f.write_str("asserted"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractorCert {
    pub kind: CertKind,
    pub k: f64,
    pub l: f64,
    pub r: f64,
    pub provenance: Provenance,
}

impl ExtractorCert {
    pub fn new(kind: CertKind, k: f64, l: f64, r: f64, provenance: Provenance) -> Result<ExtractorCert> {
        for (name, v) in [("k", k), ("l", l), ("r", r)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ParamOutOfRange(format!(
                    "{name} = {v} must be positive and finite"
                )));
            }
        }
        Ok(ExtractorCert { kind, k, l, r, provenance })
    }
}

#[derive(Debug, Clone)]
pub enum DeriveRule {
    L2ToLinf { xi: f64 },
    LinfToL2 { xi: f64 },
    Transpose,
    Amplify,
}

impl DeriveRule {
    pub fn name(&self) -> &'static str {
        match self {
            DeriveRule::L2ToLinf { .. } => "l2_to_linf",
            DeriveRule::LinfToL2 { .. } => "linf_to_l2",
            DeriveRule::Transpose => "transpose",
            DeriveRule::Amplify => "amplify",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivedCert {
    pub cert: ExtractorCert,
    /// Human-readable error expression when the rule yields a sum of terms.
    pub error_expression: Option<String>,
}

/// Pure parameter arithmetic; no matrix access.
pub fn derive_params(cert: &ExtractorCert, rule: &DeriveRule) -> Result<DerivedCert> {
    match rule {
        DeriveRule::L2ToLinf { xi } => l2_to_linf(cert, *xi, "l2_to_linf"),
        DeriveRule::LinfToL2 { xi } => linf_to_l2(cert, *xi, "linf_to_l2"),
        DeriveRule::Transpose => transpose(cert),
        DeriveRule::Amplify => amplify(cert),
    }
}

fn l2_to_linf(cert: &ExtractorCert, xi: f64, rule: &str) -> Result<DerivedCert> {
    if cert.kind != CertKind::L2 {
        return Err(Error::ParamOutOfRange(format!("{rule} needs an L2 cert")));
    }
    if !(xi > 0.0 && xi < cert.k) {
        return Err(Error::ParamOutOfRange(format!(
            "{rule} needs 0 < xi < k, got xi={xi}, k={}",
            cert.k
        )));
    }
    let r_out = cert.r.min(xi) - 1.0;
    let cert = ExtractorCert::new(
        CertKind::Linf,
        cert.k - xi,
        2.0 * cert.l,
        r_out,
        Provenance::Derived(rule.into()),
    )?;
    Ok(DerivedCert { cert, error_expression: None })
}

fn linf_to_l2(cert: &ExtractorCert, xi: f64, rule: &str) -> Result<DerivedCert> {
    if cert.kind != CertKind::Linf {
        return Err(Error::ParamOutOfRange(format!("{rule} needs an Linf cert")));
    }
    if !(xi >= 1.0 && xi <= cert.l - 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "{rule} needs 1 <= xi <= l-1, got xi={xi}, l={}",
            cert.l
        )));
    }
    // error = 2^-r + 2^-(xi-1)
    let err = (-cert.r).exp2() + (1.0 - xi).exp2();
    let r_out = -err.log2();
    let cert_out = ExtractorCert::new(
        CertKind::L2,
        cert.k - 1.0,
        (cert.l - xi - 1.0) / 2.0,
        r_out,
        Provenance::Derived(rule.into()),
    )?;
    Ok(DerivedCert {
        cert: cert_out,
        error_expression: Some(format!("2^-{} + 2^-{}", cert.r, xi - 1.0)),
    })
}

/// L2 cert for M -> L2 cert for the transposed matrix, via Linf symmetry.
/// Uses xi = k/2 going up and xi = floor(l/2) coming down.
fn transpose(cert: &ExtractorCert) -> Result<DerivedCert> {
    if cert.kind != CertKind::L2 {
        return Err(Error::ParamOutOfRange("transpose needs an L2 cert".into()));
    }
    let up = l2_to_linf(cert, cert.k / 2.0, "transpose")?.cert;
    // An Linf cert is symmetric in rows and columns: swap the roles for M^t.
    let swapped = ExtractorCert::new(
        CertKind::Linf,
        up.l,
        up.k,
        up.r,
        Provenance::Derived("transpose".into()),
    )?;
    let xi = (swapped.l / 2.0).floor();
    let mut out = linf_to_l2(&swapped, xi, "transpose")?;
    out.cert.provenance = Provenance::Derived("transpose".into());
    Ok(out)
}

/// Bias-form amplification: (k, l, r) -> (k + r/10, l + r/20, r/4).
fn amplify(cert: &ExtractorCert) -> Result<DerivedCert> {
    if cert.kind != CertKind::Linf {
        return Err(Error::ParamOutOfRange(
            "amplify needs a bias-form (Linf) cert".into(),
        ));
    }
    let cert_out = ExtractorCert::new(
        CertKind::Linf,
        cert.k + cert.r / 10.0,
        cert.l + cert.r / 20.0,
        cert.r / 4.0,
        Provenance::Derived("amplify".into()),
    )?;
    Ok(DerivedCert { cert: cert_out, error_expression: None })
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremBudget {
    pub r_out: f64,
    pub max_length: f64,
    pub max_width_log: f64,
    pub success_bound_exponent: f64,
    pub c: f64,
    pub gamma: f64,
    /// k = gamma k', l = gamma l'/3
    pub derived_k: f64,
    pub derived_l: f64,
    /// the three candidate values whose min defines r_out
    pub r_terms: [f64; 3],
}

/// Resource budget of the main theorem for a given L2 cert (k', l', r').
pub fn theorem_budget(cert: &ExtractorCert, c: f64, gamma: f64, n: f64) -> Result<TheoremBudget> {
    if cert.kind != CertKind::L2 {
        return Err(Error::InvalidBudget("budget needs an L2 cert".into()));
    }
    if !(c > 1.0 / 100.0 && c < 2.0 / 3.0) {
        return Err(Error::InvalidBudget(format!("1/100 < c < 2/3 violated: c = {c}")));
    }
    let g2 = gamma * gamma;
    if !(g2 > 1.5 * c) {
        return Err(Error::InvalidBudget(format!(
            "3c/2 < gamma^2 violated: gamma^2 = {g2}, 3c/2 = {}",
            1.5 * c
        )));
    }
    if !(g2 < 1.0) {
        return Err(Error::InvalidBudget(format!("gamma^2 < 1 violated: gamma^2 = {g2}")));
    }
    if cert.l > n {
        return Err(Error::InvalidBudget(format!(
            "l' <= n violated: l' = {}, n = {n}",
            cert.l
        )));
    }
    let r_terms = [
        cert.r / 2.0,
        (1.0 - gamma) * cert.k / 2.0,
        (1.0 - gamma) * cert.l / 2.0 - 1.0,
    ];
    let r_out = r_terms.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(TheoremBudget {
        r_out,
        max_length: r_out.exp2(),
        max_width_log: c * cert.k * cert.l,
        success_bound_exponent: r_out,
        c,
        gamma,
        derived_k: gamma * cert.k,
        derived_l: gamma * cert.l / 3.0,
        r_terms,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SqParams {
    pub m: u64,
    pub m_prime: u64,
    /// Johnson cert for the transposed matrix (rows = the m functions).
    pub johnson_for_transpose: ExtractorCert,
    /// Cert for the matrix itself, when the transpose chain stays in range.
    pub final_cert: Option<ExtractorCert>,
    pub derivation_error: Option<String>,
    /// k below 1 bit cannot separate any row fraction at these sizes.
    pub below_resolution: bool,
    /// log(m) * log(m') memory bound of the generalization.
    pub memory_bound_bits: f64,
}

/// SQ-dimension corollary: m functions with pairwise correlation <= 1/m give
/// a (1/m, 1/m) orthogonality profile; apply the Johnson arithmetic on the
/// transposed matrix, then transpose back.
pub fn sq_params(m: u64, m_prime: u64) -> Result<SqParams> {
    if m < 2 {
        return Err(Error::ParamOutOfRange(format!("m = {m} must be at least 2")));
    }
    if m_prime < m {
        return Err(Error::ParamOutOfRange(format!(
            "m' = {m_prime} must be at least m = {m}"
        )));
    }
    let mf = m as f64;
    // eps = delta = 1/m; canonical gamma^2 = eps + sqrt(delta)
    let gamma_sq = 1.0 / mf + 1.0 / mf.sqrt();
    let k = 0.5 * mf.log2();
    let lr = 0.25 * (1.0 / gamma_sq).log2();
    let johnson = ExtractorCert::new(CertKind::L2, k, lr, lr, Provenance::Johnson)?;
    let (final_cert, derivation_error) = match derive_params(&johnson, &DeriveRule::Transpose) {
        Ok(d) => (Some(d.cert), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SqParams {
        m,
        m_prime,
        below_resolution: k < 1.0,
        johnson_for_transpose: johnson,
        final_cert,
        derivation_error,
        memory_bound_bits: mf.log2() * (m_prime as f64).log2(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MmParams {
    pub m: f64,
    pub k: f64,
    pub l: f64,
    pub r: f64,
    pub degenerate: bool,
}

/// Mixing-parameter map: m = |A| |X| / d^2, k = l = r = log(m)/4.
pub fn mm_parameter_map(num_rows: u64, num_cols: u64, d: f64) -> Result<MmParams> {
    let max_side = num_rows.max(num_cols) as f64;
    if d * d < max_side {
        return Err(Error::ParamOutOfRange(format!(
            "d^2 = {} must be at least max(|A|,|X|) = {max_side}",
            d * d
        )));
    }
    let m = num_rows as f64 * num_cols as f64 / (d * d);
    let bits = 0.25 * m.log2();
    Ok(MmParams { m, k: bits, l: bits, r: bits, degenerate: m <= 1.0 })
}

/// Convenience for exact thresholds coeff * 2^e that appear in cert checks.
#[derive(Debug, Clone, Serialize)]
pub struct Threshold {
    pub coeff: String,
    pub exponent: f64,
    pub approx: f64,
}

impl Threshold {
    pub fn new(coeff: &Q, exponent: f64) -> Threshold {
        Threshold {
            coeff: crate::num::q_string(coeff),
            exponent,
            approx: q_to_f64(coeff) * exponent.exp2(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2(k: f64, l: f64, r: f64) -> ExtractorCert {
        ExtractorCert::new(CertKind::L2, k, l, r, Provenance::Asserted).unwrap()
    }

    fn linf(k: f64, l: f64, r: f64) -> ExtractorCert {
        ExtractorCert::new(CertKind::Linf, k, l, r, Provenance::Asserted).unwrap()
    }

    #[test]
    fn l2_to_linf_statement() {
        let d = derive_params(&l2(10.0, 3.0, 8.0), &DeriveRule::L2ToLinf { xi: 5.0 }).unwrap();
        assert_eq!(d.cert.kind, CertKind::Linf);
        assert_eq!((d.cert.k, d.cert.l, d.cert.r), (5.0, 6.0, 4.0));
    }

    #[test]
    fn linf_to_l2_statement() {
        let d = derive_params(&linf(10.0, 9.0, 6.0), &DeriveRule::LinfToL2 { xi: 4.0 }).unwrap();
        assert_eq!(d.cert.kind, CertKind::L2);
        assert_eq!((d.cert.k, d.cert.l), (9.0, 2.0));
        // error 2^-6 + 2^-3
        let want = -((0.015625f64 + 0.125).log2());
        assert!((d.cert.r - want).abs() < 1e-12);
    }

    #[test]
    fn amplify_constants() {
        let d = derive_params(&linf(4.0, 4.0, 20.0), &DeriveRule::Amplify).unwrap();
        assert_eq!((d.cert.k, d.cert.l, d.cert.r), (6.0, 5.0, 5.0));
    }

    #[test]
    fn out_of_range_rules() {
        assert!(derive_params(&l2(10.0, 3.0, 8.0), &DeriveRule::L2ToLinf { xi: 10.0 }).is_err());
        assert!(derive_params(&linf(10.0, 9.0, 6.0), &DeriveRule::LinfToL2 { xi: 9.0 }).is_err());
        assert!(derive_params(&l2(2.0, 2.0, 2.0), &DeriveRule::Amplify).is_err());
        // xi = 1 makes the error 2^-r + 1 >= 1, i.e. non-positive r
        assert!(derive_params(&linf(10.0, 9.0, 6.0), &DeriveRule::LinfToL2 { xi: 1.0 }).is_err());
    }

    #[test]
    fn transpose_is_within_range_for_large_params() {
        let d = derive_params(&l2(40.0, 40.0, 40.0), &DeriveRule::Transpose).unwrap();
        assert_eq!(d.cert.kind, CertKind::L2);
        assert!(d.cert.k > 0.0 && d.cert.l > 0.0 && d.cert.r > 0.0);
        // up: (20, 80 ~ 19); swap: (80, 20 ~ 19); down with xi=10: (79, 4.5)
        assert_eq!(d.cert.k, 79.0);
        assert_eq!(d.cert.l, 4.5);
    }

    #[test]
    fn budget_eq1() {
        let b = theorem_budget(&l2(40.0, 40.0, 40.0), 0.1, 0.5, 64.0).unwrap();
        assert_eq!(b.r_out, 9.0);
        assert_eq!(b.max_length, 512.0);
        assert_eq!(b.max_width_log, 160.0);
        assert_eq!(b.derived_k, 20.0);
        assert!((b.derived_l - 20.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn budget_hypothesis_violations() {
        let c = l2(40.0, 40.0, 40.0);
        assert!(theorem_budget(&c, 0.1, 0.3, 64.0).is_err());
        assert!(theorem_budget(&c, 0.7, 0.99, 64.0).is_err());
        assert!(theorem_budget(&c, 0.005, 0.5, 64.0).is_err());
        assert!(theorem_budget(&c, 0.1, 0.5, 30.0).is_err()); // l' > n
    }

    #[test]
    fn sq_corollary() {
        let p = sq_params(256, 256).unwrap();
        assert_eq!(p.johnson_for_transpose.k, 4.0);
        assert!(!p.below_resolution);
        assert_eq!(p.memory_bound_bits, 64.0);
        let small = sq_params(2, 2).unwrap();
        assert_eq!(small.johnson_for_transpose.k, 0.5);
        assert!(small.below_resolution);
        assert!(sq_params(4, 2).is_err());
    }

    #[test]
    fn mm_map() {
        let p = mm_parameter_map(1 << 16, 1 << 16, (1u64 << 16) as f64).unwrap();
        assert_eq!(p.m, 65536.0);
        assert_eq!(p.k, 4.0);
        assert!(!p.degenerate);
        let d = mm_parameter_map(1 << 8, 1 << 16, (1u64 << 12) as f64).unwrap();
        assert_eq!(d.m, 1.0);
        assert_eq!(d.k, 0.0);
        assert!(d.degenerate);
        assert!(mm_parameter_map(1 << 8, 1 << 16, 255.0).is_err());
    }
}
