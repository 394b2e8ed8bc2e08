//! Signed permutations and the recursive family of square roots of −Id.
//!
//! An operator acts on a string by `out[n] = sign(n) · S[source(n)]`, which is
//! the row-vector reading `S ↦ S·M` of a signed permutation matrix `M`. On a
//! string of length `2^N` the family holds `2^N − 1` operators `E_j`, each
//! squaring to `−Id`, built by doubling:
//!
//! ```text
//! E_1          = [[0, I], [-I, 0]]
//! E_{1+j}      = [[0, e_j], [e_j, 0]]
//! E_{2^(N-1)+j} = [[e_j, 0], [0, -e_j]]
//! ```
//!
//! where `e_j` are the roots one level down. Nothing here ever materializes a
//! matrix; operators are an index map plus a sign string.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bitstring::{BitString, BitStringError};
use crate::dyadic::Dyadic;

/// Largest level for the exhaustive whole-family operations.
pub const DEFAULT_LEVEL_LIMIT: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperError {
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("index {index} out of range for level {level}")]
    IndexOutOfRange { level: u32, index: u64 },
    #[error("root order r={r} out of range for level {level} (need r < {level})")]
    RootOutOfRange { level: u32, r: u32 },
    #[error("exponent {alpha} has scale {scale}, finer than the level-{level} limit {max}")]
    ScaleTooFine {
        alpha: Dyadic,
        scale: u32,
        max: u32,
        level: u32,
    },
    #[error("level {level} exceeds the configured limit {limit}")]
    LimitExceeded { level: u32, limit: u32 },
    #[error("level must be at least 1")]
    LevelTooSmall,
    #[error("source_index is not a bijection: {0}")]
    NotBijection(String),
    #[error(transparent)]
    BitString(#[from] BitStringError),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    source: Vec<u32>,
    signs: BitString,
}

impl SignedPermutation {
    /// Zero-based `source` and a sign string (`+1` keeps, `−1` negates).
    pub fn new(source: Vec<u32>, signs: BitString) -> Result<SignedPermutation, HyperError> {
        let len = source.len();
        if signs.len() != len {
            return Err(HyperError::SizeMismatch {
                left: len,
                right: signs.len(),
            });
        }
        if !len.is_power_of_two() {
            return Err(BitStringError::NotPowerOfTwo(len).into());
        }
        let mut seen = vec![false; len];
        for (n, &s) in source.iter().enumerate() {
            let s = s as usize;
            if s >= len {
                return Err(HyperError::NotBijection(format!("entry {n} points to {s}")));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(HyperError::NotBijection(format!("{s} used twice")));
            }
        }
        Ok(SignedPermutation { source, signs })
    }

    pub fn identity(level: u32) -> SignedPermutation {
        let len = 1usize << level;
        SignedPermutation {
            source: (0..len as u32).collect(),
            signs: BitString::ones(len).expect("non-empty"),
        }
    }

    pub fn minus_identity(level: u32) -> SignedPermutation {
        SignedPermutation::identity(level).negated()
    }

    /// Shift by `m` in the sign-extended sequence: `out[n] = S_ext[n − m]`.
    pub fn negacyclic_shift(level: u32, m: i64) -> SignedPermutation {
        let len = 1i64 << level;
        let m = m.rem_euclid(2 * len);
        let (m, wrap_negates) = if m >= len { (m - len, true) } else { (m, false) };
        let mut source = Vec::with_capacity(len as usize);
        let signs = BitString::from_fn(len as usize, |n| {
            let n = n as i64;
            if n >= m {
                source.push((n - m) as u32);
                !wrap_negates
            } else {
                source.push((n - m + len) as u32);
                wrap_negates
            }
        })
        .expect("non-empty");
        SignedPermutation { source, signs }
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn level(&self) -> u32 {
        self.len().trailing_zeros()
    }

    pub fn source(&self) -> &[u32] {
        &self.source
    }

    /// The sign string; also the image of the all-ones string.
    pub fn signs(&self) -> &BitString {
        &self.signs
    }

    fn check(&self, len: usize) -> Result<(), HyperError> {
        if self.len() != len {
            return Err(HyperError::SizeMismatch {
                left: self.len(),
                right: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, s: &BitString) -> Result<BitString, HyperError> {
        self.check(s.len())?;
        Ok(BitString::from_fn(s.len(), |n| {
            s.bit(self.source[n] as usize) == self.signs.bit(n)
        })?)
    }

    /// `(self ∘ q)(S) = self(q(S))`.
    pub fn compose(&self, q: &SignedPermutation) -> Result<SignedPermutation, HyperError> {
        self.check(q.len())?;
        let mut source = Vec::with_capacity(self.len());
        let signs = BitString::from_fn(self.len(), |n| {
            let mid = self.source[n] as usize;
            source.push(q.source[mid]);
            self.signs.bit(n) == q.signs.bit(mid)
        })?;
        Ok(SignedPermutation { source, signs })
    }

    /// Matrix product `self · rhs`: under the row action this applies `self` first.
    pub fn product(&self, rhs: &SignedPermutation) -> Result<SignedPermutation, HyperError> {
        rhs.compose(self)
    }

    pub fn inverse(&self) -> SignedPermutation {
        let len = self.len();
        let mut source = vec![0u32; len];
        let mut positive = vec![true; len];
        for (n, &s) in self.source.iter().enumerate() {
            source[s as usize] = n as u32;
            positive[s as usize] = self.signs.bit(n);
        }
        SignedPermutation {
            source,
            signs: BitString::from_fn(len, |i| positive[i]).expect("non-empty"),
        }
    }

    pub fn negated(&self) -> SignedPermutation {
        SignedPermutation {
            source: self.source.clone(),
            signs: self.signs.negated(),
        }
    }

    pub fn pow(&self, e: i64) -> SignedPermutation {
        let mut base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = SignedPermutation::identity(self.level());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base).expect("same size");
            }
            base = base.compose(&base).expect("same size");
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(n, &s)| s as usize == n)
            && self.signs.count_up() == self.len()
    }

    pub fn is_minus_identity(&self) -> bool {
        self.source.iter().enumerate().all(|(n, &s)| s as usize == n) && self.signs.count_up() == 0
    }

    /// The sub-operator mapping input block `from` to output block `to`, for halves.
    ///
    /// Returns `None` unless every output in block `to` draws from block `from`.
    pub fn block(&self, from: usize, to: usize) -> Option<SignedPermutation> {
        let h = self.len() / 2;
        if h == 0 {
            return None;
        }
        let mut source = Vec::with_capacity(h);
        for n in to * h..(to + 1) * h {
            let s = self.source[n] as usize;
            if s / h != from {
                return None;
            }
            source.push((s - from * h) as u32);
        }
        let signs = BitString::from_fn(h, |i| self.signs.bit(to * h + i)).ok()?;
        Some(SignedPermutation { source, signs })
    }
}

impl Mul for &SignedPermutation {
    type Output = SignedPermutation;
    fn mul(self, rhs: &SignedPermutation) -> SignedPermutation {
        self.product(rhs).expect("operands of equal size")
    }
}

impl fmt::Debug for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() > 16 {
            return write!(f, "SignedPermutation(len={})", self.len());
        }
        let parts: Vec<String> = (0..self.len())
            .map(|n| {
                let sign = if self.signs.bit(n) { "" } else { "-" };
                format!("{sign}a{}", self.source[n] + 1)
            })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct ExplicitForm {
    level: u32,
    source_index: Vec<u32>,
    sign: Vec<i8>,
}

/// Explicit arrays, `source_index` 1-based as in `{a_1, …, a_L}`.
impl Serialize for SignedPermutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ExplicitForm {
            level: self.level(),
            source_index: self.source.iter().map(|s| s + 1).collect(),
            sign: self.signs.to_spins(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignedPermutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let form = ExplicitForm::deserialize(deserializer)?;
        if form.source_index.len() != 1usize << form.level {
            return Err(D::Error::custom("source_index length does not match level"));
        }
        let source = form
            .source_index
            .iter()
            .map(|&s| s.checked_sub(1).ok_or_else(|| D::Error::custom("source_index is 1-based")))
            .collect::<Result<Vec<_>, _>>()?;
        let signs = BitString::from_spins(&form.sign).map_err(D::Error::custom)?;
        SignedPermutation::new(source, signs).map_err(D::Error::custom)
    }
}

/// Names `E_j` at level `N`; index 0 is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorLabel {
    pub level: u32,
    pub index: u64,
}

impl OperatorLabel {
    pub fn new(level: u32, index: u64) -> Result<OperatorLabel, HyperError> {
        if level == 0 {
            return Err(HyperError::LevelTooSmall);
        }
        if level >= 63 || index >= 1u64 << level {
            return Err(HyperError::IndexOutOfRange { level, index });
        }
        Ok(OperatorLabel { level, index })
    }

    pub fn build(&self) -> Result<SignedPermutation, HyperError> {
        build_root(*self)
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}@N={}", self.index, self.level)
    }
}

/// Source and sign of output entry `n` of `E_j` at level `N` (zero-based).
fn root_entry(level: u32, j: u64, n: usize) -> (usize, bool) {
    let half = 1usize << (level - 1);
    let hj = half as u64;
    if j == 1 {
        return if n < half { (n + half, false) } else { (n - half, true) };
    }
    if j <= hj {
        let (r, s) = root_entry(level - 1, j - 1, n % half);
        if n < half {
            (r + half, s)
        } else {
            (r, s)
        }
    } else {
        let (r, s) = root_entry(level - 1, j - hj, n % half);
        if n < half {
            (r, s)
        } else {
            (r + half, !s)
        }
    }
}

/// Builds `E_j` (the identity for `j = 0`).
pub fn build_root(label: OperatorLabel) -> Result<SignedPermutation, HyperError> {
    let label = OperatorLabel::new(label.level, label.index)?;
    if label.index == 0 {
        return Ok(SignedPermutation::identity(label.level));
    }
    let len = 1usize << label.level;
    let mut source = Vec::with_capacity(len);
    let signs = BitString::from_fn(len, |n| {
        let (s, positive) = root_entry(label.level, label.index, n);
        source.push(s as u32);
        positive
    })?;
    Ok(SignedPermutation { source, signs })
}

/// `E_j(1, 1, …, 1)`, which is just the sign string of `E_j`.
pub fn root_on_ones(label: OperatorLabel) -> Result<BitString, HyperError> {
    let label = OperatorLabel::new(label.level, label.index)?;
    if label.index == 0 {
        return Ok(BitString::ones(1 << label.level)?);
    }
    Ok(BitString::from_fn(1 << label.level, |n| {
        root_entry(label.level, label.index, n).1
    })?)
}

/// A pure-imaginary quaternion triple `(E, E_a, E_b)` inside the level-`N` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionTriple {
    pub level: u32,
    pub a: u64,
    pub b: u64,
}

impl QuaternionTriple {
    pub fn e(&self) -> OperatorLabel {
        OperatorLabel {
            level: self.level,
            index: 1,
        }
    }

    pub fn label_a(&self) -> OperatorLabel {
        OperatorLabel {
            level: self.level,
            index: self.a,
        }
    }

    pub fn label_b(&self) -> OperatorLabel {
        OperatorLabel {
            level: self.level,
            index: self.b,
        }
    }

    pub fn operators(&self) -> Result<[SignedPermutation; 3], HyperError> {
        Ok([
            build_root(self.e())?,
            build_root(self.label_a())?,
            build_root(self.label_b())?,
        ])
    }

    /// Every triple at a level, one per partner pair, in increasing `a`.
    pub fn all(level: u32) -> Result<Vec<QuaternionTriple>, HyperError> {
        if level < 2 {
            return Ok(Vec::new());
        }
        let half = 1u64 << (level - 1);
        (2..=half)
            .map(|j| quaternion_triple(OperatorLabel::new(level, j)?))
            .collect()
    }
}

impl fmt::Display for QuaternionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{E1, E{}, E{}}}", self.a, self.b)
    }
}

/// The triple containing `E_j` alongside `E = E_1`.
pub fn quaternion_triple(label: OperatorLabel) -> Result<QuaternionTriple, HyperError> {
    let label = OperatorLabel::new(label.level, label.index)?;
    if label.index < 2 {
        return Err(HyperError::IndexOutOfRange {
            level: label.level,
            index: label.index,
        });
    }
    let half = 1u64 << (label.level - 1);
    let j = label.index;
    let (a, b) = if j <= half {
        (j, j + half - 1)
    } else {
        (j - half + 1, j)
    };
    Ok(QuaternionTriple {
        level: label.level,
        a,
        b,
    })
}

/// Whether `(i, j, k)` obey `i² = j² = k² = ijk = −1` and the six mixed products.
pub fn quaternion_laws_hold(
    i: &SignedPermutation,
    j: &SignedPermutation,
    k: &SignedPermutation,
) -> bool {
    let neg = |p: &SignedPermutation| p.negated();
    [i, j, k].iter().all(|p| (*p * *p).is_minus_identity())
        && (&(i * j) * k).is_minus_identity()
        && i * j == *k
        && j * k == *i
        && k * i == *j
        && j * i == neg(k)
        && k * j == neg(i)
        && i * k == neg(j)
}

/// `E^{1/2^r}`: the negacyclic shift by `2^(N−1−r)` places.
///
/// `r = 0` is `E` itself (a half-length shift). The finest root on `2^N`
/// entries is `r = N − 1`, the single-step shift that moves the negated last
/// entry to the front.
pub fn root_of_e(level: u32, r: u32) -> Result<SignedPermutation, HyperError> {
    if level == 0 {
        return Err(HyperError::LevelTooSmall);
    }
    if r >= level {
        return Err(HyperError::RootOutOfRange { level, r });
    }
    Ok(SignedPermutation::negacyclic_shift(
        level,
        1i64 << (level - 1 - r),
    ))
}

/// The single-step shift `{a_1, …, a_L} ↦ {−a_L, a_1, …, a_{L−1}}`.
pub fn phase_generator(level: u32) -> SignedPermutation {
    SignedPermutation::negacyclic_shift(level, 1)
}

/// Shift count of `E^α`, in units of the single step, modulo `2^(N+1)`.
pub fn phase_steps(level: u32, alpha: &Dyadic) -> Result<u64, HyperError> {
    if level == 0 {
        return Err(HyperError::LevelTooSmall);
    }
    let max = level - 1;
    let steps = alpha.scaled_integer(max).ok_or_else(|| HyperError::ScaleTooFine {
        alpha: alpha.clone(),
        scale: alpha.scale(),
        max,
        level,
    })?;
    let period = BigInt::from(1u64 << (level + 1));
    Ok(steps.mod_floor(&period).to_u64().expect("below period"))
}

/// `E^α` for dyadic `α` with scale at most `N − 1`, as shift arithmetic.
pub fn phase_power(level: u32, alpha: &Dyadic) -> Result<SignedPermutation, HyperError> {
    let m = phase_steps(level, alpha)?;
    Ok(SignedPermutation::negacyclic_shift(level, m as i64))
}

/// The exponent `α = m / 2^(N−1)` of a step count.
pub fn steps_to_alpha(level: u32, m: u64) -> Dyadic {
    Dyadic::new(m, level - 1)
}

/// Correlations of `E_j(1s)` against `E_k(1s)`, stored as integer dot products.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalityTable {
    level: u32,
    dots: Vec<i32>,
}

impl OrthogonalityTable {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn size(&self) -> usize {
        1 << self.level
    }

    pub fn get(&self, j: usize, k: usize) -> Dyadic {
        Dyadic::new(self.dots[j * self.size() + k], self.level)
    }

    /// Off-diagonal pairs with non-zero correlation.
    pub fn violations(&self) -> Vec<(usize, usize, Dyadic)> {
        let size = self.size();
        let mut out = Vec::new();
        for j in 0..size {
            for k in 0..size {
                let d = self.dots[j * size + k];
                let want = if j == k { size as i32 } else { 0 };
                if d != want {
                    out.push((j, k, self.get(j, k)));
                }
            }
        }
        out
    }

    pub fn is_identity_pattern(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn rows(&self) -> Vec<Vec<Dyadic>> {
        (0..self.size())
            .map(|j| (0..self.size()).map(|k| self.get(j, k)).collect())
            .collect()
    }
}

/// The full `2^N × 2^N` table, computed in parallel with a fixed layout.
pub fn orthogonality_table(level: u32, limit: u32) -> Result<OrthogonalityTable, HyperError> {
    if level == 0 {
        return Err(HyperError::LevelTooSmall);
    }
    if level > limit {
        return Err(HyperError::LimitExceeded { level, limit });
    }
    let size = 1usize << level;
    let strings: Vec<BitString> = (0..size as u64)
        .into_par_iter()
        .map(|j| root_on_ones(OperatorLabel { level, index: j }).expect("valid label"))
        .collect();
    let dots: Vec<i32> = (0..size * size)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / size, idx % size);
            strings[j].dot(&strings[k]).expect("equal lengths") as i32
        })
        .collect();
    Ok(OrthogonalityTable { level, dots })
}

/// One named check in the algebra suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlgebraCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl AlgebraCheck {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> AlgebraCheck {
        AlgebraCheck {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Runs the operator-algebra invariants at one level.
pub fn verify_algebra(level: u32, limit: u32) -> Result<Vec<AlgebraCheck>, HyperError> {
    if level == 0 {
        return Err(HyperError::LevelTooSmall);
    }
    if level > limit {
        return Err(HyperError::LimitExceeded { level, limit });
    }
    let size = 1u64 << level;
    let roots: Vec<SignedPermutation> = (1..size)
        .into_par_iter()
        .map(|j| build_root(OperatorLabel { level, index: j }).expect("valid label"))
        .collect();
    let mut checks = Vec::new();

    let bad_squares: Vec<u64> = roots
        .par_iter()
        .enumerate()
        .filter(|(_, r)| !r.compose(r).expect("same size").is_minus_identity())
        .map(|(i, _)| i as u64 + 1)
        .collect();
    checks.push(AlgebraCheck::new(
        "roots square to -Id",
        bad_squares.is_empty(),
        format!("{} roots, failures {:?}", roots.len(), bad_squares),
    ));

    let distinct: std::collections::HashSet<&SignedPermutation> = roots.iter().collect();
    checks.push(AlgebraCheck::new(
        "roots are distinct",
        distinct.len() == roots.len(),
        format!("{} distinct of {}", distinct.len(), roots.len()),
    ));

    let triples = QuaternionTriple::all(level)?;
    let bad_triples: Vec<String> = triples
        .par_iter()
        .filter(|t| {
            let [e, a, b] = t.operators().expect("valid triple");
            !quaternion_laws_hold(&e, &a, &b)
        })
        .map(|t| t.to_string())
        .collect();
    checks.push(AlgebraCheck::new(
        "quaternion multiplication table",
        bad_triples.is_empty(),
        format!("{} triples, failures {:?}", triples.len(), bad_triples),
    ));

    let table = orthogonality_table(level, limit)?;
    let v = table.violations();
    checks.push(AlgebraCheck::new(
        "orthogonality on 1s",
        v.is_empty(),
        format!("{} off-pattern entries", v.len()),
    ));

    if level >= 2 {
        let ok = embeds_previous_level(level)?;
        checks.push(AlgebraCheck::new(
            "block self-similarity with level N-1",
            ok,
            "E_{1+j} = [[0,e_j],[e_j,0]], E_{2^(N-1)+j} = [[e_j,0],[0,-e_j]]",
        ));
    }

    let e = build_root(OperatorLabel { level, index: 1 })?;
    let root_ok = (0..level).all(|r| {
        root_of_e(level, r)
            .map(|p| p.pow(1i64 << r) == e)
            .unwrap_or(false)
    });
    checks.push(AlgebraCheck::new(
        "roots of E: (E^(1/2^r))^(2^r) = E",
        root_ok,
        format!("r = 0..={}", level - 1),
    ));

    let step = phase_generator(level);
    let measured = (0..=level + 2)
        .find(|&e| step.pow(1i64 << e).is_identity())
        .map(|e| format!("measured order 2^{e}"))
        .unwrap_or_default();
    checks.push(AlgebraCheck::new(
        format!("generator^(2^{}) = Id", level + 2),
        step.pow(1i64 << (level + 2)).is_identity(),
        measured.clone(),
    ));
    checks.push(AlgebraCheck::new(
        format!("generator^(2^{}) != Id", level + 1),
        !step.pow(1i64 << (level + 1)).is_identity(),
        measured,
    ));
    Ok(checks)
}

/// The doubling construction, read back out of the level-`N` operators.
pub fn embeds_previous_level(level: u32) -> Result<bool, HyperError> {
    if level < 2 {
        return Ok(true);
    }
    let half = 1u64 << (level - 1);
    for j in 1..half {
        let lower = build_root(OperatorLabel::new(level - 1, j)?)?;
        let swap = build_root(OperatorLabel::new(level, 1 + j)?)?;
        let diag = build_root(OperatorLabel::new(level, half + j)?)?;
        let ok = swap.block(1, 0).as_ref() == Some(&lower)
            && swap.block(0, 1).as_ref() == Some(&lower)
            && diag.block(0, 0).as_ref() == Some(&lower)
            && diag.block(1, 1).as_ref() == Some(&lower.negated());
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn root(level: u32, j: u64) -> SignedPermutation {
        build_root(OperatorLabel::new(level, j).unwrap()).unwrap()
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn level_two_roots_match_explicit_actions() {
        assert_eq!(format!("{:?}", root(2, 1)), "{-a3, -a4, a1, a2}");
        assert_eq!(format!("{:?}", root(2, 2)), "{-a4, a3, -a2, a1}");
        assert_eq!(format!("{:?}", root(2, 3)), "{-a2, a1, a4, -a3}");
    }

    #[test]
    fn level_one_root_is_row_reading() {
        // Column reading would print {a2, -a1}; the row reading is its inverse.
        let e = root(1, 1);
        assert_eq!(format!("{e:?}"), "{-a2, a1}");
        assert_eq!(format!("{:?}", e.inverse()), "{a2, -a1}");
    }

    #[test]
    fn level_three_block_forms() {
        // E_1 = [[0, I], [-I, 0]] and the doubling rules at N = 3.
        let e1 = root(3, 1);
        assert_eq!(e1.block(1, 0), Some(SignedPermutation::identity(2).negated()));
        assert_eq!(e1.block(0, 1), Some(SignedPermutation::identity(2)));
        assert_eq!(root(3, 2).block(1, 0), Some(root(2, 1)));
        assert_eq!(root(3, 7).block(1, 1), Some(root(2, 3).negated()));
        assert!(embeds_previous_level(3).unwrap());
    }

    #[test]
    fn seven_roots_at_level_three() {
        let roots: std::collections::HashSet<_> = (1..8).map(|j| root(3, j)).collect();
        assert_eq!(roots.len(), 7);
        assert!(roots.iter().all(|r| r.compose(r).unwrap().is_minus_identity()));
    }

    #[test]
    fn apply_examples() {
        let ones = BitString::ones(4).unwrap();
        assert_eq!(root(2, 1).apply(&ones).unwrap(), bs("0011"));
        let s = bs("1011");
        assert_eq!(SignedPermutation::identity(2).apply(&s).unwrap(), s);
        // (a1..a4) -> (-a4, a1, a2, a3)
        assert_eq!(phase_generator(2).apply(&s).unwrap(), bs("0101"));
        assert!(root(3, 1).apply(&s).is_err());
    }

    #[test]
    fn compose_examples() {
        let (e1, e2, e3) = (root(2, 1), root(2, 2), root(2, 3));
        assert!(e1.compose(&e1).unwrap().is_minus_identity());
        // Matrix order gives the quaternion identity; function order reverses it.
        assert!((&(&e1 * &e2) * &e3).is_minus_identity());
        assert!(e3.compose(&e2).unwrap().compose(&e1).unwrap().is_minus_identity());
        assert!(e1.compose(&e2).unwrap().compose(&e3).unwrap().is_identity());
        assert_eq!(e1.compose(&SignedPermutation::identity(2)).unwrap(), e1);
        assert!(e1.compose(&root(3, 1)).is_err());
    }

    #[test]
    fn triple_examples() {
        let t = |j| quaternion_triple(OperatorLabel::new(3, j).unwrap()).unwrap();
        assert_eq!((t(2).a, t(2).b), (2, 5));
        assert_eq!((t(6).a, t(6).b), (3, 6));
        assert_eq!((t(4).a, t(4).b), (4, 7));
        assert!(quaternion_triple(OperatorLabel::new(3, 1).unwrap()).is_err());
        assert!(OperatorLabel::new(3, 8).is_err());
    }

    #[test]
    fn quaternion_tables_through_level_five() {
        for level in 2..=5 {
            for t in QuaternionTriple::all(level).unwrap() {
                let [e, a, b] = t.operators().unwrap();
                assert!(quaternion_laws_hold(&e, &a, &b), "{t} at N={level}");
            }
        }
    }

    #[test]
    fn roots_of_e() {
        for level in 1..=6 {
            let e = root(level, 1);
            assert_eq!(root_of_e(level, 0).unwrap(), e);
            for r in 0..level {
                assert_eq!(root_of_e(level, r).unwrap().pow(1 << r), e);
            }
            assert_eq!(root_of_e(level, level - 1).unwrap(), phase_generator(level));
            assert!(root_of_e(level, level).is_err());
        }
        let half = root_of_e(2, 1).unwrap();
        assert_eq!(half.compose(&half).unwrap(), root(2, 1));
    }

    #[test]
    fn phase_power_examples() {
        for level in 1..=6 {
            assert!(phase_power(level, &Dyadic::zero()).unwrap().is_identity());
            assert!(phase_power(level, &Dyadic::from_int(2)).unwrap().is_minus_identity());
            assert!(phase_power(level, &Dyadic::from_int(4)).unwrap().is_identity());
            assert_eq!(phase_power(level, &Dyadic::one()).unwrap(), root(level, 1));
        }
        let err = phase_power(3, &Dyadic::new(1, 3)).unwrap_err();
        assert!(matches!(err, HyperError::ScaleTooFine { scale: 3, max: 2, .. }));
    }

    #[test]
    fn generator_order() {
        for level in 1..=10 {
            let step = phase_generator(level);
            assert!(step.pow(1 << (level + 1)).is_identity());
            assert!(!step.pow(1 << level).is_identity());
        }
    }

    #[test]
    fn orthogonality_small_levels() {
        for level in 1..=6 {
            let t = orthogonality_table(level, DEFAULT_LEVEL_LIMIT).unwrap();
            assert!(t.is_identity_pattern(), "N={level}");
        }
        let t = orthogonality_table(2, DEFAULT_LEVEL_LIMIT).unwrap();
        assert_eq!(t.get(1, 2), Dyadic::zero());
        assert_eq!(t.get(3, 3), Dyadic::one());
        assert!(matches!(
            orthogonality_table(13, DEFAULT_LEVEL_LIMIT),
            Err(HyperError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn verify_reports_literal_order_claim() {
        let checks = verify_algebra(3, DEFAULT_LEVEL_LIMIT).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec!["generator^(2^4) != Id"]);
    }

    #[test]
    fn json_round_trip() {
        let e = root(2, 2);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"level":2,"source_index":[4,3,2,1],"sign":[-1,1,-1,1]}"#);
        let back: SignedPermutation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        let bad = r#"{"level":1,"source_index":[1,1],"sign":[1,1]}"#;
        assert!(serde_json::from_str::<SignedPermutation>(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn perm(level: u32) -> impl Strategy<Value = SignedPermutation> {
            let len = 1usize << level;
            (
                Just((0..len as u32).collect::<Vec<_>>()).prop_shuffle(),
                proptest::collection::vec(any::<bool>(), len),
            )
                .prop_map(move |(src, sg)| {
                    SignedPermutation::new(src, BitString::from_fn(len, |i| sg[i]).unwrap()).unwrap()
                })
        }

        fn string(level: u32) -> impl Strategy<Value = BitString> {
            let len = 1usize << level;
            proptest::collection::vec(any::<bool>(), len)
                .prop_map(move |v| BitString::from_fn(len, |i| v[i]).unwrap())
        }

        fn alpha(level: u32) -> impl Strategy<Value = Dyadic> {
            (-64i64..64).prop_map(move |m| Dyadic::new(m, level - 1))
        }

        proptest! {
            #[test]
            fn apply_is_group_action((p, q, s) in (1u32..7).prop_flat_map(|n| (perm(n), perm(n), string(n)))) {
                let lhs = p.apply(&q.apply(&s).unwrap()).unwrap();
                prop_assert_eq!(lhs, p.compose(&q).unwrap().apply(&s).unwrap());
            }

            #[test]
            fn inverse_and_associativity((p, q, r) in (1u32..6).prop_flat_map(|n| (perm(n), perm(n), perm(n)))) {
                prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
                prop_assert!(p.inverse().compose(&p).unwrap().is_identity());
                let left = p.compose(&q).unwrap().compose(&r).unwrap();
                let right = p.compose(&q.compose(&r).unwrap()).unwrap();
                prop_assert_eq!(left, right);
            }

            #[test]
            fn phase_power_homomorphism((n, a, b) in (1u32..8).prop_flat_map(|n| (Just(n), alpha(n), alpha(n)))) {
                let lhs = phase_power(n, &a).unwrap().compose(&phase_power(n, &b).unwrap()).unwrap();
                prop_assert_eq!(lhs, phase_power(n, &(&a + &b)).unwrap());
            }

            #[test]
            fn shift_matches_repeated_steps(n in 1u32..6, m in -40i64..40) {
                let step = phase_generator(n);
                prop_assert_eq!(SignedPermutation::negacyclic_shift(n, m), step.pow(m));
            }
        }
    }
}
