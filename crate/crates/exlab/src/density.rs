//! Non-negative functions and distributions on the column set X.
//!
//! Norms and inner products are taken with respect to the uniform
//! distribution over X, so a probability distribution p (values summing
//! to 1) has ||p||_1 = 2^-n.

use crate::error::{Error, Result};
use crate::num::{q_int, q_to_f64, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityOverX {
    values: Vec<Q>,
    is_distribution: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormOrder {
    L1,
    L2,
    LInf,
}

impl DensityOverX {
    pub fn from_values(values: Vec<Q>, is_distribution: bool) -> Result<DensityOverX> {
        if values.is_empty() {
            return Err(Error::InvalidSpec("density over empty X".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidSpec("density values must be non-negative".into()));
        }
        if is_distribution {
            let sum: Q = values.iter().sum();
            if !sum.is_one() {
                return Err(Error::InvalidSpec(format!(
                    "distribution values sum to {sum}, expected 1"
                )));
            }
        }
        Ok(DensityOverX { values, is_distribution })
    }

    pub fn uniform(len: usize) -> DensityOverX {
        let v = Q::new(BigInt::one(), BigInt::from(len));
        DensityOverX { values: vec![v; len], is_distribution: true }
    }

    pub fn point_mass(len: usize, at: usize) -> DensityOverX {
        let mut values = vec![Q::zero(); len];
        values[at] = Q::one();
        DensityOverX { values, is_distribution: true }
    }

    /// Uniform distribution on a subset of X (a flat distribution).
    pub fn flat(len: usize, support: &[usize]) -> DensityOverX {
        let v = Q::new(BigInt::one(), BigInt::from(support.len()));
        let mut values = vec![Q::zero(); len];
        for &x in support {
            values[x] = v.clone();
        }
        DensityOverX { values, is_distribution: true }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn is_distribution(&self) -> bool {
        self.is_distribution
    }

    /// ||f||_1 = E_x |f(x)|, exact.
    pub fn l1(&self) -> Q {
        let sum: Q = self.values.iter().sum();
        sum / q_int(self.len() as i64)
    }

    /// ||f||_2^2 = E_x f(x)^2, exact.
    pub fn l2_squared(&self) -> Q {
        let sum: Q = self.values.iter().map(|v| v * v).sum();
        sum / q_int(self.len() as i64)
    }

    /// ||f||_inf = max_x f(x), exact.
    pub fn linf(&self) -> Q {
        self.values.iter().cloned().max().expect("nonempty")
    }

    /// ||f||_p as a float (p in {1, 2, inf}).
    pub fn lp_norm(&self, p: NormOrder) -> f64 {
        match p {
            NormOrder::L1 => q_to_f64(&self.l1()),
            NormOrder::L2 => q_to_f64(&self.l2_squared()).sqrt(),
            NormOrder::LInf => q_to_f64(&self.linf()),
        }
    }
}

/// <f,g> = E_x[f(x) g(x)] for two value vectors on the same X, exact.
pub fn inner_product(f: &[Q], g: &[Q]) -> Q {
    debug_assert_eq!(f.len(), g.len());
    let sum: Q = f.iter().zip(g).map(|(a, b)| a * b).sum();
    sum / q_int(f.len() as i64)
}
