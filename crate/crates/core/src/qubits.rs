//! Qubits as orbits of bit strings, the superposition rule, and registers.
//!
//! A qubit is the equivalence class `{E^α(S)}` of a representative string.
//! Superposing two basis strings `E_a(S)` and `E_b(S)` with weight `cos θ`
//! picks each entry from one operand or the other according to a selector
//! mask. The mask is balanced across the two halves of the string: `E_a(1s)`
//! and `E_b(1s)` agree on the first half and disagree on the second for every
//! triple, so taking `E_b` rows evenly from both halves keeps the correlation
//! with `E_a(S)` at exactly `cos θ`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bitstring::{BitString, BitStringError, Spin};
use crate::dyadic::{AngleCos, Dyadic, DyadicError, SinSign};
use crate::hypercomplex::{
    build_root, phase_power, phase_steps, steps_to_alpha, HyperError, OperatorLabel,
    QuaternionTriple, SignedPermutation,
};
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QubitError {
    #[error("cos θ = {cos} times 2^{level} is not an integer")]
    ScaleTooFine { cos: Dyadic, level: u32 },
    #[error("expected {expected} strings of length {len}, got {got}")]
    ShapeMismatch {
        expected: usize,
        len: usize,
        got: String,
    },
    #[error("digit {digit} at position {position} exceeds base 2^{level}")]
    DigitOutOfRange {
        digit: u32,
        position: usize,
        level: u32,
    },
    #[error(transparent)]
    Angle(#[from] DyadicError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    BitString(#[from] BitStringError),
}

/// `|↑⟩`: all `+1`.
pub fn ket_up(level: u32) -> BitString {
    BitString::ones(1 << level).expect("non-empty")
}

/// `|↓⟩`: all `−1`.
pub fn ket_down(level: u32) -> BitString {
    BitString::minus_ones(1 << level).expect("non-empty")
}

/// Row mask of the superposition: `+1` rows take the `E_a` operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Selector {
    pub level: u32,
    /// Number of rows taken from `E_a`.
    pub plus_rows: usize,
}

impl Selector {
    /// The `E_b` rows sit at the end of each half: `⌈r/2⌉` in the first, `⌊r/2⌋` in the second.
    pub fn mask(&self) -> BitString {
        let len = 1usize << self.level;
        let half = len / 2;
        let minus = len - self.plus_rows;
        let (r1, r2) = (minus.div_ceil(2), minus / 2);
        BitString::from_fn(len, |n| {
            if n < half {
                n < half - r1
            } else {
                n - half < half - r2
            }
        })
        .expect("non-empty")
    }

    /// The selector for `|cos θ|`, rounding in permissive mode.
    pub fn for_cos(level: u32, cos: &Dyadic, mode: Mode) -> Result<(Selector, bool), QubitError> {
        let abs = cos.abs();
        let (rows, rounded) = match abs.scaled_integer(level) {
            Some(v) => (v, false),
            None if mode == Mode::Permissive => (abs.round_scaled(level), true),
            None => {
                return Err(QubitError::ScaleTooFine {
                    cos: cos.clone(),
                    level,
                })
            }
        };
        let plus_rows = rows.to_usize().expect("row count within string length");
        Ok((Selector { level, plus_rows }, rounded))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Superposition {
    pub string: BitString,
    pub selector: Selector,
    /// Set when permissive mode rounded the `+1` row count.
    pub rounded: bool,
}

/// Superposes two operators on `base` with weight `θ`.
///
/// `cos θ < 0` uses `−A`, `sin θ < 0` uses `−B`.
pub fn superpose_with(
    a: &SignedPermutation,
    b: &SignedPermutation,
    theta: &AngleCos,
    base: &BitString,
    mode: Mode,
) -> Result<Superposition, QubitError> {
    let level = base
        .level()
        .filter(|&n| n >= 1)
        .ok_or(BitStringError::NotPowerOfTwo(base.len()))?;
    let (selector, rounded) = Selector::for_cos(level, theta.cos(), mode)?;
    let mut sa = a.apply(base)?;
    if theta.cos().is_negative() {
        sa = sa.negated();
    }
    let mut sb = b.apply(base)?;
    if theta.sin_sign() == SinSign::Negative {
        sb = sb.negated();
    }
    let string = sa.select(&sb, &selector.mask())?;
    Ok(Superposition {
        string,
        selector,
        rounded,
    })
}

/// `(cos θ E_a + sin θ E_b)(base)` for the triple `(E, E_a, E_b)`.
pub fn superpose(
    triple: &QuaternionTriple,
    theta: &AngleCos,
    base: &BitString,
    mode: Mode,
) -> Result<Superposition, QubitError> {
    let a = build_root(triple.label_a())?;
    let b = build_root(triple.label_b())?;
    superpose_with(&a, &b, theta, base, mode)
}

/// The same superposition addressed by a dyadic sine: operands swap and the
/// selector counts `|sin θ|`.
pub fn superpose_by_sine(
    triple: &QuaternionTriple,
    sin: &Dyadic,
    cos_sign: SinSign,
    base: &BitString,
    mode: Mode,
) -> Result<Superposition, QubitError> {
    let swapped = AngleCos::new(sin.clone(), cos_sign)?;
    let a = build_root(triple.label_a())?;
    let b = build_root(triple.label_b())?;
    superpose_with(&b, &a, &swapped, base, mode)
}

/// Entry `n` of `E^α(S)` where `E^α` shifts by `m` steps.
fn shifted_entry(s: &BitString, n: usize, m: u64) -> Spin {
    let len = s.len() as i64;
    let k = (n as i64 - m as i64).rem_euclid(2 * len);
    if k < len {
        s.get(k as usize)
    } else {
        -s.get((k - len) as usize)
    }
}

/// The first entry of `E^α(S)`.
pub fn leading_bit_spin(s: &BitString, alpha: &Dyadic) -> Result<Spin, QubitError> {
    let level = s.level().ok_or(BitStringError::NotPowerOfTwo(s.len()))?;
    let m = phase_steps(level, alpha)?;
    Ok(shifted_entry(s, 0, m))
}

/// Witness `α` with `t = E^α(s)`, the smallest in `[0, 4)`, if any.
pub fn same_class(s: &BitString, t: &BitString) -> Result<Option<Dyadic>, QubitError> {
    if s.len() != t.len() {
        return Err(BitStringError::LengthMismatch {
            left: s.len(),
            right: t.len(),
        }
        .into());
    }
    let level = s.level().ok_or(BitStringError::NotPowerOfTwo(s.len()))?;
    if level == 0 {
        return Ok(if s == t {
            Some(Dyadic::zero())
        } else if s.negated() == *t {
            Some(Dyadic::from_int(2))
        } else {
            None
        });
    }
    let period = 2 * s.len() as u64;
    let hit = (0..period)
        .into_par_iter()
        .find_first(|&m| (0..s.len()).all(|n| shifted_entry(s, n, m) == t.get(n)));
    Ok(hit.map(|m| steps_to_alpha(level, m)))
}

/// `corr(E^α(S), S)` for every step `α` in `[0, 4)`, in step order.
pub fn phase_autocorrelations(s: &BitString) -> Result<Vec<Dyadic>, QubitError> {
    let level = s.level().ok_or(BitStringError::NotPowerOfTwo(s.len()))?;
    (0..2 * s.len() as i64)
        .map(|m| Ok(s.negacyclic_shift(m).correlation(s)?))
        .collect::<Result<Vec<_>, QubitError>>()
        .inspect(|v| {
            debug_assert_eq!(v.len(), 2usize << level);
        })
}

/// A qubit: a level, its quaternion triple, and one representative string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GranularQubit {
    pub level: u32,
    pub triple: QuaternionTriple,
    pub representative: BitString,
}

impl GranularQubit {
    pub fn new(triple: QuaternionTriple, representative: BitString) -> Result<GranularQubit, QubitError> {
        let len = 1usize << triple.level;
        if representative.len() != len {
            return Err(BitStringError::LengthMismatch {
                left: len,
                right: representative.len(),
            }
            .into());
        }
        Ok(GranularQubit {
            level: triple.level,
            triple,
            representative,
        })
    }

    /// Global phase `φ`, housed as `α = 2φ/π`.
    pub fn phase_shift(&self, alpha: &Dyadic) -> Result<GranularQubit, QubitError> {
        let op = phase_power(self.level, alpha)?;
        Ok(GranularQubit {
            representative: op.apply(&self.representative)?,
            ..self.clone()
        })
    }

    pub fn same_class(&self, other: &GranularQubit) -> Result<Option<Dyadic>, QubitError> {
        same_class(&self.representative, &other.representative)
    }
}

/// `(E_a(1s), superpose(θ, 1s))`, correlated by `cos θ`.
pub fn entangle_pair(
    triple: &QuaternionTriple,
    theta: &AngleCos,
    mode: Mode,
) -> Result<(BitString, BitString), QubitError> {
    let ones = ket_up(triple.level);
    let first = build_root(triple.label_a())?.apply(&ones)?;
    let second = superpose(triple, theta, &ones, mode)?.string;
    Ok((first, second))
}

/// `N` strings of length `2^N`, equivalently `2^N` digits in base `2^N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GranularRegister {
    level: u32,
    strings: Vec<BitString>,
}

impl GranularRegister {
    pub fn new(level: u32, strings: Vec<BitString>) -> Result<GranularRegister, QubitError> {
        let len = 1usize << level;
        let shape_ok = strings.len() == level as usize && strings.iter().all(|s| s.len() == len);
        if !shape_ok || level == 0 {
            return Err(QubitError::ShapeMismatch {
                expected: level as usize,
                len,
                got: format!(
                    "{} strings of lengths {:?}",
                    strings.len(),
                    strings.iter().map(BitString::len).collect::<Vec<_>>()
                ),
            });
        }
        Ok(GranularRegister { level, strings })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn strings(&self) -> &[BitString] {
        &self.strings
    }

    /// Digit `n` packs entry `n` of every string: bit `i` is set when string `i` is `+1`.
    pub fn encode(&self) -> Vec<u32> {
        (0..1usize << self.level)
            .map(|n| {
                self.strings
                    .iter()
                    .enumerate()
                    .map(|(i, s)| u32::from(s.bit(n)) << i)
                    .sum()
            })
            .collect()
    }

    pub fn decode(level: u32, digits: &[u32]) -> Result<GranularRegister, QubitError> {
        let len = 1usize << level;
        if digits.len() != len || level == 0 || level > 31 {
            return Err(QubitError::ShapeMismatch {
                expected: level as usize,
                len,
                got: format!("{} digits", digits.len()),
            });
        }
        if let Some((position, &digit)) = digits.iter().enumerate().find(|(_, &d)| d >> level != 0) {
            return Err(QubitError::DigitOutOfRange {
                digit,
                position,
                level,
            });
        }
        let strings = (0..level)
            .map(|i| BitString::from_fn(len, |n| (digits[n] >> i) & 1 == 1))
            .collect::<Result<Vec<_>, _>>()?;
        GranularRegister::new(level, strings)
    }

    /// `R_U = Σ d_n (2^N)^{-(n+1)}`, the register as one dyadic number in `[0, 1)`.
    pub fn rational(&self) -> Dyadic {
        let mut acc = BigInt::zero();
        for d in self.encode() {
            acc = (acc << self.level) + d;
        }
        Dyadic::new(acc, self.level * (1u32 << self.level))
    }

    pub fn correlations(&self) -> Vec<Vec<Dyadic>> {
        register_correlations(&self.strings).expect("validated shape")
    }
}

/// Pairwise correlation matrix of equal-length strings.
pub fn register_correlations(strings: &[BitString]) -> Result<Vec<Vec<Dyadic>>, QubitError> {
    strings
        .iter()
        .map(|s| {
            strings
                .iter()
                .map(|t| Ok(s.correlation(t)?))
                .collect::<Result<Vec<_>, QubitError>>()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassScanEntry {
    pub theta: AngleCos,
    /// `α` with `superpose(θ) = E^α(E_a(base))`, when one exists.
    pub witness: Option<Dyadic>,
    pub rounded: bool,
}

/// Which grid angles superpose `base` into the class of `E_a(base)`.
pub fn class_scan(
    base: &BitString,
    triple: &QuaternionTriple,
    grid: &[AngleCos],
    mode: Mode,
) -> Result<Vec<ClassScanEntry>, QubitError> {
    let a = build_root(triple.label_a())?;
    let b = build_root(triple.label_b())?;
    let reference = a.apply(base)?;
    grid.par_iter()
        .map(|theta| {
            let sup = superpose_with(&a, &b, theta, base, mode)?;
            Ok(ClassScanEntry {
                theta: theta.clone(),
                witness: same_class(&reference, &sup.string)?,
                rounded: sup.rounded,
            })
        })
        .collect()
}

/// Convenience: the operator `E_j` at a level, for callers outside the algebra module.
pub fn basis_string(level: u32, index: u64, base: &BitString) -> Result<BitString, QubitError> {
    Ok(build_root(OperatorLabel::new(level, index)?)?.apply(base)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstring::champernowne_spins;
    use crate::hypercomplex::quaternion_triple;

    fn triple(level: u32, j: u64) -> QuaternionTriple {
        quaternion_triple(OperatorLabel::new(level, j).unwrap()).unwrap()
    }

    fn up(c: &str) -> AngleCos {
        AngleCos::upper(c.parse().unwrap()).unwrap()
    }

    fn angle(c: &str, s: SinSign) -> AngleCos {
        AngleCos::new(c.parse().unwrap(), s).unwrap()
    }

    fn four_points() -> Vec<AngleCos> {
        vec![up("1"), up("0"), up("-1"), angle("0", SinSign::Negative)]
    }

    #[test]
    fn kets() {
        assert_eq!(ket_up(2).to_spins(), vec![1, 1, 1, 1]);
        assert_eq!(ket_down(2).to_spins(), vec![-1, -1, -1, -1]);
        assert_eq!(ket_up(3).correlation(&ket_down(3)).unwrap(), -Dyadic::one());
    }

    #[test]
    fn selector_masks() {
        let m = |level, plus| Selector { level, plus_rows: plus }.mask().to_string();
        assert_eq!(m(2, 4), "1111");
        assert_eq!(m(2, 0), "0000");
        assert_eq!(m(2, 2), "1010");
        assert_eq!(m(2, 1), "0010");
        assert_eq!(m(3, 5), "11001110");
    }

    #[test]
    fn superpose_endpoints() {
        let t = triple(2, 2);
        let ones = ket_up(2);
        let ea = basis_string(2, t.a, &ones).unwrap();
        let eb = basis_string(2, t.b, &ones).unwrap();
        assert_eq!(superpose(&t, &up("1"), &ones, Mode::Strict).unwrap().string, ea);
        assert_eq!(superpose(&t, &up("0"), &ones, Mode::Strict).unwrap().string, eb);
        assert_eq!(superpose(&t, &up("-1"), &ones, Mode::Strict).unwrap().string, ea.negated());
        let down = angle("0", SinSign::Negative);
        assert_eq!(superpose(&t, &down, &ones, Mode::Strict).unwrap().string, eb.negated());
    }

    #[test]
    fn superpose_half_at_level_two() {
        // The balanced selector takes rows 1 and 3 from E_b. A contiguous one
        // (rows 2 and 3) would give correlation 0 instead of 1/2.
        let t = triple(2, 2);
        let ones = ket_up(2);
        let s = superpose(&t, &up("1/2"), &ones, Mode::Strict).unwrap().string;
        assert_eq!(s.to_spins(), vec![-1, 1, -1, -1]);
        let ea = basis_string(2, t.a, &ones).unwrap();
        assert_eq!(s.correlation(&ea).unwrap(), Dyadic::new(1, 1));
    }

    #[test]
    fn strict_and_permissive_rounding() {
        let t = triple(3, 2);
        let ones = ket_up(3);
        let err = superpose(&t, &up("3/16"), &ones, Mode::Strict).unwrap_err();
        assert!(matches!(err, QubitError::ScaleTooFine { level: 3, .. }));
        let p = superpose(&t, &up("3/16"), &ones, Mode::Permissive).unwrap();
        assert!(p.rounded);
        assert_eq!(p.selector.plus_rows, 2); // 1.5 rounds to even
        assert!(!superpose(&t, &up("3/8"), &ones, Mode::Strict).unwrap().rounded);
    }

    #[test]
    fn correlation_law_even_counts_exact() {
        for level in 2..=6u32 {
            let len = 1i64 << level;
            let ones = ket_up(level);
            for t in 2..(1u64 << level) {
                let t = triple(level, t);
                let ea = basis_string(level, t.a, &ones).unwrap();
                for num in -len..=len {
                    let c = Dyadic::new(num, level);
                    for sign in [SinSign::Positive, SinSign::Negative] {
                        let Ok(theta) = AngleCos::new(c.clone(), if c.abs() == Dyadic::one() { SinSign::Zero } else { sign }) else { continue };
                        let s = superpose(&t, &theta, &ones, Mode::Strict).unwrap().string;
                        let corr = s.correlation(&ea).unwrap();
                        if num % 2 == 0 {
                            assert_eq!(corr, c, "N={level} {t} θ={theta}");
                        } else {
                            // Odd counts miss by exactly 1/L: correlations of ±1 strings are multiples of 2/L.
                            assert_eq!((&corr - &c).abs(), Dyadic::new(1, level));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sine_swap_matches_complement() {
        // sin θ dyadic: swap the operands and count |sin θ|. At the quadrantal
        // angles both descriptions must agree.
        let t = triple(3, 3);
        let ones = ket_up(3);
        let by_sine = superpose_by_sine(&t, &Dyadic::one(), SinSign::Zero, &ones, Mode::Strict).unwrap();
        let by_cos = superpose(&t, &up("0"), &ones, Mode::Strict).unwrap();
        assert_eq!(by_sine.string, by_cos.string);
        let eb = basis_string(3, t.b, &ones).unwrap();
        let s = superpose_by_sine(&t, &Dyadic::new(3, 2), SinSign::Positive, &ones, Mode::Strict).unwrap();
        assert_eq!(s.string.correlation(&eb).unwrap(), Dyadic::new(3, 2));
    }

    #[test]
    fn phase_shift_examples() {
        let t = triple(3, 2);
        let q = GranularQubit::new(t, champernowne_spins(8, 0).unwrap()).unwrap();
        assert_eq!(q.phase_shift(&Dyadic::zero()).unwrap(), q);
        assert_eq!(
            q.phase_shift(&Dyadic::from_int(2)).unwrap().representative,
            q.representative.negated()
        );
        assert_eq!(q.phase_shift(&Dyadic::from_int(4)).unwrap(), q);
        assert!(q.phase_shift(&Dyadic::new(1, 3)).is_err());
    }

    #[test]
    fn same_class_examples() {
        let s = champernowne_spins(8, 0).unwrap();
        assert_eq!(same_class(&s, &s).unwrap(), Some(Dyadic::zero()));
        let half = Dyadic::new(1, 1);
        let shifted = phase_power(3, &half).unwrap().apply(&s).unwrap();
        assert_eq!(same_class(&s, &shifted).unwrap(), Some(half));
        // E_a(1s) against the c = 3/4 superposition, exhaustive at N = 3.
        let t = triple(3, 2);
        let ones = ket_up(3);
        let ea = basis_string(3, t.a, &ones).unwrap();
        let sup = superpose(&t, &up("3/4"), &ones, Mode::Strict).unwrap().string;
        assert_eq!(same_class(&ea, &sup).unwrap(), None);
    }

    #[test]
    fn entangle_examples() {
        let t = triple(3, 2);
        let (a, b) = entangle_pair(&t, &up("1"), Mode::Strict).unwrap();
        assert_eq!(a, b);
        let (a, b) = entangle_pair(&t, &up("0"), Mode::Strict).unwrap();
        assert_eq!(a.correlation(&b).unwrap(), Dyadic::zero());
        let (a, b) = entangle_pair(&t, &up("1/2"), Mode::Strict).unwrap();
        assert_eq!(a.correlation(&b).unwrap(), Dyadic::new(1, 1));
    }

    #[test]
    fn register_examples() {
        let ones = ket_up(3);
        let same = GranularRegister::new(3, vec![ones.clone(); 3]).unwrap();
        assert!(same.correlations().iter().flatten().all(|c| *c == Dyadic::one()));
        assert_eq!(same.encode(), vec![7; 8]);

        let basis: Vec<_> = (1..=3).map(|j| basis_string(3, j, &ones).unwrap()).collect();
        let reg = GranularRegister::new(3, basis).unwrap();
        let m = reg.correlations();
        for (i, row) in m.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                assert_eq!(*c, if i == j { Dyadic::one() } else { Dyadic::zero() });
            }
        }
        assert_eq!(GranularRegister::decode(3, &reg.encode()).unwrap(), reg);

        let (a, b) = entangle_pair(&triple(2, 2), &up("1/2"), Mode::Strict).unwrap();
        let pair = GranularRegister::new(2, vec![a, b]).unwrap();
        assert_eq!(pair.correlations()[0][1], Dyadic::new(1, 1));
    }

    #[test]
    fn register_bit_planes() {
        let strings: Vec<_> = (0..4).map(|i| champernowne_spins(16, i * 16).unwrap()).collect();
        let reg = GranularRegister::new(4, strings.clone()).unwrap();
        let mut flipped = strings;
        flipped[2] = flipped[2].flip_fraction(&Dyadic::new(1, 2)).unwrap();
        let other = GranularRegister::new(4, flipped).unwrap();
        for (d, e) in reg.encode().iter().zip(other.encode()) {
            assert_eq!((d ^ e) & !(1 << 2), 0);
        }
        assert!(GranularRegister::decode(2, &[0, 1, 2, 4]).is_err());
        assert!(GranularRegister::new(2, vec![ket_up(2)]).is_err());
        // R_U of the all-up register is 1 − 2^{-N·2^N}.
        let all_up = GranularRegister::new(2, vec![ket_up(2); 2]).unwrap();
        assert_eq!(all_up.rational(), Dyadic::one() - Dyadic::new(1, 8));
    }

    #[test]
    fn leading_bit_linkage() {
        // With S_0 the seed and E_a, E_b from one triple, E_b(S) = E^3(E_a(S)),
        // so S_{π/2}(απ/2) = S_0(3π/2 + απ/2) and S_{3π/2}(απ/2) = S_0(π/2 + απ/2).
        for level in 2..=6u32 {
            let base = champernowne_spins(1 << level, 0).unwrap();
            for t in QuaternionTriple::all(level).unwrap() {
                let s0 = basis_string(level, t.a, &base).unwrap();
                let pts = four_points();
                let sup: Vec<_> = pts
                    .iter()
                    .map(|p| superpose(&t, p, &base, Mode::Strict).unwrap().string)
                    .collect();
                for m in 0..(2i64 << level) {
                    let alpha = Dyadic::new(m, level - 1);
                    let at = |s: &BitString, shift: i64| {
                        leading_bit_spin(s, &(&alpha + &Dyadic::from_int(shift))).unwrap()
                    };
                    assert_eq!(at(&sup[0], 0), at(&s0, 0));
                    assert_eq!(at(&sup[1], 0), at(&s0, 3));
                    assert_eq!(at(&sup[2], 0), at(&s0, 2));
                    assert_eq!(at(&sup[3], 0), at(&s0, 1));
                }
            }
        }
    }

    #[test]
    fn trichotomy_integer_phases() {
        for level in 1..=8u32 {
            let ones = ket_up(level);
            for j in 1..(1u64 << level) {
                let s = basis_string(level, j, &ones).unwrap();
                for alpha in 0..4 {
                    let c = phase_power(level, &Dyadic::from_int(alpha))
                        .unwrap()
                        .apply(&s)
                        .unwrap()
                        .correlation(&s)
                        .unwrap();
                    assert!(c == Dyadic::zero() || c.abs() == Dyadic::one());
                }
            }
        }
    }

    #[test]
    fn trichotomy_fails_at_fractional_phases() {
        // Walsh-like basis strings correlate partially with their fractional shifts.
        let s = basis_string(2, 1, &ket_up(2)).unwrap();
        let c = phase_power(2, &Dyadic::new(1, 1)).unwrap().apply(&s).unwrap().correlation(&s).unwrap();
        assert_eq!(c, Dyadic::new(1, 1));
        let partial: usize = (1..=6u32)
            .map(|level| {
                let ones = ket_up(level);
                (1..(1u64 << level))
                    .map(|j| {
                        let s = basis_string(level, j, &ones).unwrap();
                        phase_autocorrelations(&s)
                            .unwrap()
                            .iter()
                            .filter(|c| !(c.is_zero() || c.abs() == Dyadic::one()))
                            .count()
                    })
                    .sum::<usize>()
            })
            .sum();
        assert!(partial > 0);
    }

    #[test]
    fn distributivity_integer_phases() {
        // The mask is the same on both halves when L·(1 − |c|) is even, so the
        // half-length shift E commutes with selection; fractional shifts do not.
        let level = 4;
        let ones = ket_up(level);
        let mut fractional_failures = 0;
        for t in QuaternionTriple::all(level).unwrap() {
            let [_, a, b] = t.operators().unwrap();
            for num in (0..=16).step_by(2) {
                let theta = up(&format!("{num}/16"));
                let sup = superpose_with(&a, &b, &theta, &ones, Mode::Strict).unwrap();
                for m in 0..32u64 {
                    let alpha = steps_to_alpha(level, m);
                    let p = phase_power(level, &alpha).unwrap();
                    let lhs = p.apply(&sup.string).unwrap();
                    let rhs = superpose_with(&a.product(&p).unwrap(), &b.product(&p).unwrap(), &theta, &ones, Mode::Strict)
                        .unwrap()
                        .string;
                    if m % 8 == 0 {
                        assert_eq!(lhs, rhs, "{t} θ={theta} α={alpha}");
                    } else if lhs != rhs {
                        fractional_failures += 1;
                    }
                }
            }
        }
        assert!(fractional_failures > 0);
    }

    #[test]
    fn class_scan_on_champernowne_base() {
        for level in 3..=6u32 {
            let base = champernowne_spins(1 << level, 0).unwrap();
            let mut grid = four_points();
            for c in ["1/2", "3/4", "-1/2", "-3/4"] {
                grid.push(up(c));
                grid.push(angle(c, SinSign::Negative));
            }
            for t in QuaternionTriple::all(level).unwrap() {
                let scan = class_scan(&base, &t, &grid, Mode::Strict).unwrap();
                let hits: Vec<_> = scan.iter().filter(|e| e.witness.is_some()).map(|e| e.theta.clone()).collect();
                assert_eq!(hits, four_points(), "N={level} {t}");
            }
        }
    }

    #[test]
    fn class_scan_on_ones_admits_extra_points() {
        // On the all-ones base c = 1/2 already lands in the orbit for some triple.
        let level = 3;
        let grid = vec![up("1/2")];
        let hits = QuaternionTriple::all(level)
            .unwrap()
            .iter()
            .filter(|t| class_scan(&ket_up(level), t, &grid, Mode::Strict).unwrap()[0].witness.is_some())
            .count();
        assert!(hits > 0);
    }
}
