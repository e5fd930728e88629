//! Sign matrices: the learning problems themselves.
//!
//! A matrix M: A x X -> {-1,+1} is stored with bit-packed rows, bit 1 meaning
//! entry -1, so XOR + popcount computes disagreement counts in one pass and
//! every bias or inner-product sum is an exact integer divided at the
//! boundary.
//!
//! Enumeration conventions (fixed so that row/column indices are
//! reproducible):
//! * n-bit strings are indexed by their numeric value, first character of the
//!   string = most significant bit; lexicographic string order is therefore
//!   ascending numeric order.
//! * multilinear monomials are indexed in graded-lex order: by degree first,
//!   then by the sorted tuple of variable indices; variable i corresponds to
//!   bit i of the point x. A polynomial is a subset of monomials encoded as a
//!   bitmask over monomial indices.

use crate::density::DensityOverX;
use crate::error::{Error, Result};
use crate::num::{binomial_sum, q_int, Q};
use crate::prng::{subseed, Stream};
use num_bigint::BigInt;
use std::fmt;
use std::io::{BufRead, Write};

const MAX_ENTRIES: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    Parity,
    SubsetParity,
    SparseEquations,
    LowDegree,
    Random,
    Code,
    File,
}

impl FamilyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::Parity => "parity",
            FamilyTag::SubsetParity => "subset-parity",
            FamilyTag::SparseEquations => "sparse-equations",
            FamilyTag::LowDegree => "low-degree",
            FamilyTag::Random => "random",
            FamilyTag::Code => "code",
            FamilyTag::File => "file",
        }
    }

    pub fn parse(s: &str) -> Option<FamilyTag> {
        Some(match s {
            "parity" => FamilyTag::Parity,
            "subset-parity" => FamilyTag::SubsetParity,
            "sparse-equations" => FamilyTag::SparseEquations,
            "low-degree" => FamilyTag::LowDegree,
            "random" => FamilyTag::Random,
            "code" => FamilyTag::Code,
            "file" => FamilyTag::File,
            _ => return None,
        })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A nonempty set of distinct n-bit strings (a support T for the subset
/// families), kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSet {
    n: u32,
    members: Vec<u64>,
}

impl ColumnSet {
    pub fn new(n: u32, mut members: Vec<u64>) -> Result<ColumnSet> {
        if members.is_empty() {
            return Err(Error::InvalidSpec("empty support set".into()));
        }
        if n > 63 {
            return Err(Error::InvalidSpec("bit-length above 63".into()));
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&m) = members.last() {
            if n < 64 && m >> n != 0 {
                return Err(Error::InvalidSpec(format!(
                    "member {m:#b} does not fit in {n} bits"
                )));
            }
        }
        Ok(ColumnSet { n, members })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// All weight-l strings of length n, ascending. |result| = C(n,l).
pub fn sparse_support_set(n: u32, l: u32) -> Result<ColumnSet> {
    if l > n {
        return Err(Error::InvalidSpec(format!("weight {l} exceeds length {n}")));
    }
    if n > 63 {
        return Err(Error::InvalidSpec("bit-length above 63".into()));
    }
    let mut members = Vec::new();
    if l == 0 {
        members.push(0);
    } else {
        // Gosper's hack walks weight-l masks in ascending order.
        let mut v: u64 = (1u64 << l) - 1;
        let limit: u64 = 1u64 << n;
        while v < limit {
            members.push(v);
            let c = v & v.wrapping_neg();
            let r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    ColumnSet::new(n, members)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// rows are polynomials, columns are points
    Equations,
    /// rows are points, columns are polynomials
    Polynomials,
}

#[derive(Debug, Clone)]
pub enum MatrixSpec {
    Parity { n: u32 },
    SubsetParity { n: u32, support: ColumnSet },
    SparseEquations { n: u32, support: ColumnSet },
    LowDegree { n: u32, d: u32, orientation: Orientation },
    Random { rows: u64, cols: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    num_rows: usize,
    num_cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    family_tag: FamilyTag,
}

impl SignMatrix {
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn family_tag(&self) -> FamilyTag {
        self.family_tag
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    fn zeroed(rows: usize, cols: usize, tag: FamilyTag) -> Result<SignMatrix> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidSpec(format!(
                "matrix must have at least 2 rows and 2 columns, got {rows}x{cols}"
            )));
        }
        if rows as u64 * cols as u64 > MAX_ENTRIES {
            return Err(Error::TooLarge(format!("{rows}x{cols} matrix")));
        }
        let wpr = cols.div_ceil(64);
        Ok(SignMatrix {
            num_rows: rows,
            num_cols: cols,
            words_per_row: wpr,
            bits: vec![0u64; rows * wpr],
            family_tag: tag,
        })
    }

    fn set_minus(&mut self, a: usize, x: usize) {
        self.bits[a * self.words_per_row + x / 64] |= 1u64 << (x % 64);
    }

    /// Entry at (row a, column x): +1 or -1.
    pub fn entry(&self, a: usize, x: usize) -> i8 {
        debug_assert!(a < self.num_rows && x < self.num_cols);
        let bit = self.bits[a * self.words_per_row + x / 64] >> (x % 64) & 1;
        if bit == 1 {
            -1
        } else {
            1
        }
    }

    pub fn row_words(&self, a: usize) -> &[u64] {
        &self.bits[a * self.words_per_row..(a + 1) * self.words_per_row]
    }

    /// Build a sign matrix from explicit entries.
    pub fn from_entries<F: FnMut(usize, usize) -> i8>(
        rows: usize,
        cols: usize,
        tag: FamilyTag,
        mut f: F,
    ) -> Result<SignMatrix> {
        let mut m = SignMatrix::zeroed(rows, cols, tag)?;
        for a in 0..rows {
            for x in 0..cols {
                match f(a, x) {
                    1 => {}
                    -1 => m.set_minus(a, x),
                    v => {
                        return Err(Error::InvalidSpec(format!(
                            "entry ({a},{x}) = {v}, must be +1 or -1"
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    /// Bitmask over all columns (pad bits zero).
    pub fn full_col_mask(&self) -> Vec<u64> {
        let mut mask = vec![u64::MAX; self.words_per_row];
        let tail = self.num_cols % 64;
        if tail != 0 {
            *mask.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        mask
    }

    /// Number of -1 entries of row a restricted to a column mask.
    pub fn minus_count_masked(&self, a: usize, mask: &[u64]) -> u32 {
        self.row_words(a)
            .iter()
            .zip(mask)
            .map(|(w, m)| (w & m).count_ones())
            .sum()
    }

    /// (#+1 entries) - (#-1 entries) of row a restricted to a column mask.
    pub fn signed_count_masked(&self, a: usize, mask: &[u64]) -> i64 {
        let size: u32 = mask.iter().map(|m| m.count_ones()).sum();
        size as i64 - 2 * self.minus_count_masked(a, mask) as i64
    }

    /// <M_a, M_a'> = E_x[M(a,x) M(a',x)], exact.
    pub fn row_inner_product(&self, a: usize, a2: usize) -> Result<Q> {
        if a >= self.num_rows || a2 >= self.num_rows {
            return Err(Error::IndexOutOfRange(format!("rows {a},{a2}")));
        }
        let diff: u32 = self
            .row_words(a)
            .iter()
            .zip(self.row_words(a2))
            .map(|(x, y)| (x ^ y).count_ones())
            .sum();
        Ok(Q::new(
            BigInt::from(self.num_cols as i64 - 2 * diff as i64),
            BigInt::from(self.num_cols as u64),
        ))
    }

    /// <M_a, f> = E_x[M(a,x) f(x)], exact.
    pub fn correlate(&self, a: usize, f: &DensityOverX) -> Result<Q> {
        if a >= self.num_rows {
            return Err(Error::IndexOutOfRange(format!("row {a}")));
        }
        if f.len() != self.num_cols {
            return Err(Error::LengthMismatch(format!(
                "density has {} values, matrix has {} columns",
                f.len(),
                self.num_cols
            )));
        }
        let mut acc = Q::from_integer(BigInt::ZERO);
        for (x, v) in f.values().iter().enumerate() {
            if self.entry(a, x) == 1 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        Ok(acc / q_int(self.num_cols as i64))
    }

    /// (M . f)(a) = sum_x M(a,x) f(x) = |X| <M_a, f>.
    pub fn matvec_entry(&self, a: usize, f: &[Q]) -> Q {
        let mut acc = Q::from_integer(BigInt::ZERO);
        for (x, v) in f.iter().enumerate() {
            if self.entry(a, x) == 1 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc
    }

    pub fn transposed(&self) -> SignMatrix {
        let mut t = SignMatrix::zeroed(self.num_cols, self.num_rows, self.family_tag)
            .expect("transpose of a valid matrix is valid");
        for a in 0..self.num_rows {
            for x in 0..self.num_cols {
                if self.entry(a, x) == -1 {
                    t.set_minus(x, a);
                }
            }
        }
        t
    }

    /// Smallest eps such that every pair of distinct columns agrees on a
    /// fraction of rows within [(1-eps)/2, (1+eps)/2]; equals the max over
    /// column pairs of |<M^(x), M^(x')>| taken over rows.
    pub fn pair_agreement_epsilon(&self) -> Q {
        let t = self.transposed();
        let mut best = Q::from_integer(BigInt::ZERO);
        for x in 0..t.num_rows {
            for x2 in (x + 1)..t.num_rows {
                let ip = t.row_inner_product(x, x2).expect("in range");
                let a = if ip < Q::from_integer(BigInt::ZERO) { -ip } else { ip };
                if a > best {
                    best = a;
                }
            }
        }
        best
    }
}

/// Monomial supports of degree <= d over n variables, graded-lex order.
pub fn monomials_graded_lex(n: u32, d: u32) -> Vec<u64> {
    let mut out = vec![0u64];
    for deg in 1..=d {
        // combinations of size deg over 0..n in lex order of index tuples
        let mut idx: Vec<u32> = (0..deg).collect();
        loop {
            out.push(idx.iter().fold(0u64, |m, &i| m | 1 << i));
            // advance
            let mut i = deg as i64 - 1;
            while i >= 0 && idx[i as usize] == n - (deg - i as u32) {
                i -= 1;
            }
            if i < 0 {
                break;
            }
            idx[i as usize] += 1;
            for j in (i as usize + 1)..deg as usize {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Truth table of each monomial as a bitset over all 2^n points
/// (bit x set <=> monomial evaluates to 1 at x, i.e. support subset of x).
pub fn monomial_truth_tables(n: u32, monomials: &[u64]) -> Vec<Vec<u64>> {
    let points = 1usize << n;
    let words = points.div_ceil(64);
    monomials
        .iter()
        .map(|&supp| {
            let mut tt = vec![0u64; words];
            for x in 0..points as u64 {
                if x & supp == supp {
                    tt[(x / 64) as usize] |= 1 << (x % 64);
                }
            }
            tt
        })
        .collect()
}

pub fn build_matrix(spec: &MatrixSpec) -> Result<SignMatrix> {
    match spec {
        MatrixSpec::Parity { n } => build_parity(*n),
        MatrixSpec::SubsetParity { n, support } => {
            check_support(*n, support)?;
            let rows = checked_pow2(*n)?;
            let cols = support.members().to_vec();
            let mut m = SignMatrix::zeroed(rows, cols.len().max(2), FamilyTag::SubsetParity)?;
            if cols.len() < 2 {
                return Err(Error::InvalidSpec("support must have at least 2 elements".into()));
            }
            for a in 0..rows {
                for (j, &x) in cols.iter().enumerate() {
                    if (a as u64 & x).count_ones() % 2 == 1 {
                        m.set_minus(a, j);
                    }
                }
            }
            Ok(m)
        }
        MatrixSpec::SparseEquations { n, support } => {
            check_support(*n, support)?;
            if support.len() < 2 {
                return Err(Error::InvalidSpec("support must have at least 2 elements".into()));
            }
            let cols = checked_pow2(*n)?;
            let rows = support.members().to_vec();
            let mut m = SignMatrix::zeroed(rows.len(), cols, FamilyTag::SparseEquations)?;
            for (i, &a) in rows.iter().enumerate() {
                for x in 0..cols {
                    if (a & x as u64).count_ones() % 2 == 1 {
                        m.set_minus(i, x);
                    }
                }
            }
            Ok(m)
        }
        MatrixSpec::LowDegree { n, d, orientation } => build_low_degree(*n, *d, *orientation),
        MatrixSpec::Random { rows, cols, seed } => build_random(*rows, *cols, *seed),
    }
}

fn check_support(n: u32, support: &ColumnSet) -> Result<()> {
    if support.n() != n {
        return Err(Error::InvalidSpec(format!(
            "support bit-length {} does not match n={n}",
            support.n()
        )));
    }
    Ok(())
}

fn checked_pow2(n: u32) -> Result<usize> {
    if n == 0 || n > 30 {
        return Err(Error::InvalidSpec(format!("n={n} out of range (1..=30)")));
    }
    Ok(1usize << n)
}

fn build_parity(n: u32) -> Result<SignMatrix> {
    let size = checked_pow2(n)?;
    let mut m = SignMatrix::zeroed(size, size, FamilyTag::Parity)?;
    for a in 0..size {
        for x in 0..size {
            if (a & x).count_ones() % 2 == 1 {
                m.set_minus(a, x);
            }
        }
    }
    Ok(m)
}

fn build_low_degree(n: u32, d: u32, orientation: Orientation) -> Result<SignMatrix> {
    if d > n {
        return Err(Error::InvalidSpec(format!("degree {d} exceeds n={n}")));
    }
    let mono_count = binomial_sum(n as u64, d as u64);
    let mono_count: u64 = mono_count
        .try_into()
        .map_err(|_| Error::TooLarge("monomial count".into()))?;
    if mono_count > 24 {
        return Err(Error::TooLarge(format!(
            "2^{mono_count} polynomials is beyond desk scale"
        )));
    }
    let points = checked_pow2(n)?;
    let polys = 1usize << mono_count;
    let monomials = monomials_graded_lex(n, d);
    debug_assert_eq!(monomials.len() as u64, mono_count);
    let tts = monomial_truth_tables(n, &monomials);
    let words = points.div_ceil(64);

    // Truth table of polynomial p = XOR of the truth tables of its monomials;
    // bit set <=> p(x) = 1 <=> entry -1. That is exactly the packed row.
    let poly_tt = |p: usize| -> Vec<u64> {
        let mut row = vec![0u64; words];
        for (i, tt) in tts.iter().enumerate() {
            if p >> i & 1 == 1 {
                for (rw, tw) in row.iter_mut().zip(tt) {
                    *rw ^= tw;
                }
            }
        }
        row
    };

    match orientation {
        Orientation::Equations => {
            let mut m = SignMatrix::zeroed(polys, points, FamilyTag::LowDegree)?;
            for p in 0..polys {
                let row = poly_tt(p);
                m.bits[p * m.words_per_row..(p + 1) * m.words_per_row].copy_from_slice(&row);
            }
            Ok(m)
        }
        Orientation::Polynomials => {
            let mut m = SignMatrix::zeroed(points, polys, FamilyTag::LowDegree)?;
            for p in 0..polys {
                let tt = poly_tt(p);
                for x in 0..points {
                    if tt[x / 64] >> (x % 64) & 1 == 1 {
                        m.set_minus(x, p);
                    }
                }
            }
            Ok(m)
        }
    }
}

fn build_random(rows: u64, cols: u64, seed: u64) -> Result<SignMatrix> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidSpec(format!(
            "random matrix needs at least 2 rows and 2 columns, got {rows}x{cols}"
        )));
    }
    let mut m = SignMatrix::zeroed(rows as usize, cols as usize, FamilyTag::Random)?;
    let tail = cols as usize % 64;
    for a in 0..rows as usize {
        // Independent per-row stream so generation order does not matter.
        let mut st = Stream::derive(subseed(seed, a as u64), 0);
        for w in 0..m.words_per_row {
            let mut word = st.next_u64();
            if w == m.words_per_row - 1 && tail != 0 {
                word &= (1u64 << tail) - 1;
            }
            m.bits[a * m.words_per_row + w] = word;
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// SGM1 file format
//
//   SGM1
//   rows=<R> cols=<C> tag=<family_tag>
//   <R lines of ceil(C/4) uppercase hex digits, MSB first,
//    bit 1 = entry -1, pad bits zero>
// ---------------------------------------------------------------------------

pub fn write_sgm1<W: Write>(m: &SignMatrix, w: &mut W) -> Result<()> {
    w.write_all(sgm1_string(m).as_bytes())?;
    Ok(())
}

pub fn sgm1_string(m: &SignMatrix) -> String {
    let digits = m.num_cols.div_ceil(4);
    let mut out = String::with_capacity(m.num_rows * (digits + 1) + 64);
    out.push_str("SGM1\n");
    out.push_str(&format!(
        "rows={} cols={} tag={}\n",
        m.num_rows, m.num_cols, m.family_tag
    ));
    for a in 0..m.num_rows {
        for d in 0..digits {
            let mut nib = 0u8;
            for j in 0..4 {
                let col = 4 * d + j;
                if col < m.num_cols && m.entry(a, col) == -1 {
                    nib |= 1 << (3 - j);
                }
            }
            out.push(char::from_digit(nib as u32, 16).unwrap().to_ascii_uppercase());
        }
        out.push('\n');
    }
    out
}

pub fn read_sgm1<R: BufRead>(r: &mut R) -> Result<SignMatrix> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    parse_sgm1(&text)
}

pub fn parse_sgm1(text: &str) -> Result<SignMatrix> {
    let mut lines = text.lines().enumerate();
    let (ln, magic) = lines
        .next()
        .ok_or(Error::Format { line: 1, msg: "empty file".into() })?;
    if magic.trim_end() != "SGM1" {
        return Err(Error::Format { line: ln + 1, msg: format!("expected SGM1 magic, got {magic:?}") });
    }
    let (ln, header) = lines
        .next()
        .ok_or(Error::Format { line: 2, msg: "missing header line".into() })?;
    let mut rows = None;
    let mut cols = None;
    let mut tag = None;
    for field in header.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or(Error::Format { line: ln + 1, msg: format!("bad header field {field:?}") })?;
        match key {
            "rows" => rows = Some(val.parse::<usize>().map_err(|e| Error::Format {
                line: ln + 1,
                msg: format!("bad rows value: {e}"),
            })?),
            "cols" => cols = Some(val.parse::<usize>().map_err(|e| Error::Format {
                line: ln + 1,
                msg: format!("bad cols value: {e}"),
            })?),
            "tag" => tag = Some(FamilyTag::parse(val).ok_or(Error::Format {
                line: ln + 1,
                msg: format!("unknown tag {val:?}"),
            })?),
            _ => return Err(Error::Format { line: ln + 1, msg: format!("unknown header key {key:?}") }),
        }
    }
    let (rows, cols, tag) = match (rows, cols, tag) {
        (Some(r), Some(c), Some(t)) => (r, c, t),
        _ => return Err(Error::Format { line: ln + 1, msg: "header must set rows, cols and tag".into() }),
    };
    if rows < 2 || cols < 2 {
        return Err(Error::Format { line: ln + 1, msg: format!("matrix must be at least 2x2, got {rows}x{cols}") });
    }
    let digits = cols.div_ceil(4);
    let mut m = SignMatrix::zeroed(rows, cols, tag).map_err(|e| Error::Format {
        line: ln + 1,
        msg: e.to_string(),
    })?;
    let mut row = 0usize;
    for (ln, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if row >= rows {
            return Err(Error::Format { line: ln + 1, msg: "more data rows than declared".into() });
        }
        if line.len() != digits {
            return Err(Error::Format {
                line: ln + 1,
                msg: format!("expected {digits} hex digits, got {}", line.len()),
            });
        }
        for (d, ch) in line.chars().enumerate() {
            let nib = ch.to_digit(16).ok_or(Error::Format {
                line: ln + 1,
                msg: format!("bad hex digit {ch:?}"),
            })? as u8;
            if ch.is_ascii_lowercase() {
                return Err(Error::Format { line: ln + 1, msg: "hex digits must be uppercase".into() });
            }
            for j in 0..4 {
                let col = 4 * d + j;
                let bit = nib >> (3 - j) & 1;
                if col >= cols {
                    if bit != 0 {
                        return Err(Error::Format { line: ln + 1, msg: "nonzero pad bit".into() });
                    }
                } else if bit == 1 {
                    m.set_minus(row, col);
                }
            }
        }
        row += 1;
    }
    if row != rows {
        return Err(Error::Format {
            line: text.lines().count(),
            msg: format!("expected {rows} data rows, got {row}"),
        });
    }
    Ok(m)
}

pub fn load_matrix(path: &std::path::Path) -> Result<SignMatrix> {
    let file = std::fs::File::open(path)?;
    read_sgm1(&mut std::io::BufReader::new(file))
}

pub fn save_matrix(m: &SignMatrix, path: &std::path::Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write_sgm1(m, &mut f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn parity(n: u32) -> SignMatrix {
        build_matrix(&MatrixSpec::Parity { n }).unwrap()
    }

    #[test]
    fn parity_entry_by_hand() {
        // a = 01, x = 01 -> a.x = 1 -> entry -1
        let m = parity(2);
        assert_eq!(m.entry(0b01, 0b01), -1);
        assert_eq!(m.entry(0b00, 0b11), 1);
        assert_eq!(m.entry(0b11, 0b01), -1);
        assert_eq!(m.entry(0b11, 0b11), 1);
    }

    #[test]
    fn low_degree_dimensions() {
        // 2 variables, degree <= 2: C(2,<=2) = 4 monomials, 16 polynomials.
        let m = build_matrix(&MatrixSpec::LowDegree {
            n: 2,
            d: 2,
            orientation: Orientation::Equations,
        })
        .unwrap();
        assert_eq!(m.num_rows(), 16);
        assert_eq!(m.num_cols(), 4);
        let t = build_matrix(&MatrixSpec::LowDegree {
            n: 2,
            d: 2,
            orientation: Orientation::Polynomials,
        })
        .unwrap();
        assert_eq!(t.num_rows(), 4);
        assert_eq!(t.num_cols(), 16);
    }

    #[test]
    fn low_degree_row_count_formula() {
        for (n, d) in [(3u32, 1u32), (3, 2), (4, 2)] {
            let m = build_matrix(&MatrixSpec::LowDegree { n, d, orientation: Orientation::Equations })
                .unwrap();
            let mono: u64 = binomial_sum(n as u64, d as u64).try_into().unwrap();
            assert_eq!(m.num_rows() as u64, 1u64 << mono);
        }
    }

    #[test]
    fn subset_parity_full_support_equals_parity() {
        let all = ColumnSet::new(4, (0..16).collect()).unwrap();
        let sp = build_matrix(&MatrixSpec::SubsetParity { n: 4, support: all }).unwrap();
        let p = parity(4);
        for a in 0..16 {
            for x in 0..16 {
                assert_eq!(sp.entry(a, x), p.entry(a, x));
            }
        }
    }

    #[test]
    fn sparse_support_sizes() {
        assert_eq!(sparse_support_set(4, 2).unwrap().len(), 6);
        let zero = sparse_support_set(4, 0).unwrap();
        assert_eq!(zero.members(), &[0]);
        let full = sparse_support_set(5, 5).unwrap();
        assert_eq!(full.members(), &[0b11111]);
        assert!(sparse_support_set(4, 5).is_err());
    }

    #[test]
    fn row_inner_products_parity() {
        let m = parity(2);
        assert_eq!(m.row_inner_product(0b00, 0b01).unwrap(), q_int(0));
        assert_eq!(m.row_inner_product(2, 2).unwrap(), q_int(1));
        let m3 = parity(3);
        assert_eq!(m3.row_inner_product(0b001, 0b011).unwrap(), q_int(0));
        // exhaustive character orthogonality for n <= 6
        for n in 1..=6u32 {
            let m = parity(n);
            for a in 0..m.num_rows() {
                for a2 in 0..m.num_rows() {
                    let want = if a == a2 { q_int(1) } else { q_int(0) };
                    assert_eq!(m.row_inner_product(a, a2).unwrap(), want);
                }
            }
        }
    }

    #[test]
    fn correlate_parity_examples() {
        let m = parity(2);
        let uni = DensityOverX::uniform(4);
        assert_eq!(m.correlate(0b00, &uni).unwrap(), q(1, 4));
        assert_eq!(m.correlate(0b01, &uni).unwrap(), q_int(0));
        let point = DensityOverX::point_mass(4, 0b01);
        assert_eq!(m.correlate(0b01, &point).unwrap(), q(-1, 4));
    }

    #[test]
    fn pair_agreement() {
        assert_eq!(parity(2).pair_agreement_epsilon(), q_int(0));
        let dup = SignMatrix::from_entries(4, 2, FamilyTag::File, |a, _| if a % 2 == 0 { 1 } else { -1 })
            .unwrap();
        assert_eq!(dup.pair_agreement_epsilon(), q_int(1));
    }

    #[test]
    fn pair_agreement_random_bruteforce() {
        let m = build_matrix(&MatrixSpec::Random { rows: 64, cols: 16, seed: 7 }).unwrap();
        let got = m.pair_agreement_epsilon();
        // brute force over all 120 column pairs straight from entries
        let mut best = q_int(0);
        for x in 0..16 {
            for x2 in (x + 1)..16 {
                let mut s = 0i64;
                for a in 0..64 {
                    s += (m.entry(a, x) * m.entry(a, x2)) as i64;
                }
                let v = q(s.abs(), 64);
                if v > best {
                    best = v;
                }
            }
        }
        assert_eq!(got, best);
        assert!(got >= q_int(0) && got <= q_int(1));
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_matrix(&MatrixSpec::Random { rows: 32, cols: 32, seed: 5 }).unwrap();
        let b = build_matrix(&MatrixSpec::Random { rows: 32, cols: 32, seed: 5 }).unwrap();
        assert_eq!(a, b);
        let c = build_matrix(&MatrixSpec::Random { rows: 32, cols: 32, seed: 6 }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs() {
        assert!(build_matrix(&MatrixSpec::LowDegree { n: 2, d: 3, orientation: Orientation::Equations }).is_err());
        assert!(build_matrix(&MatrixSpec::Random { rows: 1, cols: 8, seed: 0 }).is_err());
        assert!(ColumnSet::new(4, vec![]).is_err());
    }

    #[test]
    fn sgm1_round_trip() {
        for spec in [
            MatrixSpec::Parity { n: 3 },
            MatrixSpec::Random { rows: 5, cols: 13, seed: 11 },
            MatrixSpec::LowDegree { n: 2, d: 1, orientation: Orientation::Equations },
        ] {
            let m = build_matrix(&spec).unwrap();
            let s = sgm1_string(&m);
            let back = parse_sgm1(&s).unwrap();
            assert_eq!(m, back);
        }
    }

    #[test]
    fn sgm1_known_encoding() {
        // 2x5 matrix, row 0 = [-1,+1,+1,+1,-1] -> bits 10001 -> hex "88"
        let m = SignMatrix::from_entries(2, 5, FamilyTag::File, |a, x| {
            if a == 0 && (x == 0 || x == 4) {
                -1
            } else {
                1
            }
        })
        .unwrap();
        let s = sgm1_string(&m);
        assert_eq!(s, "SGM1\nrows=2 cols=5 tag=file\n88\n00\n");
    }

    #[test]
    fn sgm1_errors_carry_line_numbers() {
        let err = parse_sgm1("SGM1\nrows=2 cols=4 tag=parity\nZZ\n00\n").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 3),
            e => panic!("wrong error {e:?}"),
        }
        let err = parse_sgm1("BAD\n").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 1),
            e => panic!("wrong error {e:?}"),
        }
    }

    #[test]
    fn transpose_involution() {
        let m = build_matrix(&MatrixSpec::Random { rows: 9, cols: 17, seed: 3 }).unwrap();
        let tt = m.transposed().transposed();
        assert_eq!(m, tt);
    }

    #[test]
    fn monomial_order_graded_lex() {
        let mons = monomials_graded_lex(3, 2);
        assert_eq!(mons, vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110]);
    }
}
