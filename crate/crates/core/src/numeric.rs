//! Fixed-point big-integer trigonometry.
//!
//! Values are integers `v` standing for `v / 2^bits`. Used where an exact
//! answer is impossible (cosines of dyadic multiples of π, arc-cosines of
//! dyadic values) but a certified neighbourhood is enough.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::dyadic::{AngleCos, AnglePi, Dyadic, SinSign};

/// Extra bits carried through series evaluation and dropped at the end.
const GUARD: u32 = 32;

fn atan_inv(x: u32, bits: u32) -> BigInt {
    // atan(1/x) = Σ (-1)^k / ((2k+1) x^(2k+1))
    let one = BigInt::one() << bits;
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut power = &one / &x;
    let mut sum = BigInt::zero();
    let mut k = 0u32;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    sum
}

/// π with `bits` fractional bits, by Machin's formula.
pub fn pi_fixed(bits: u32) -> BigInt {
    let w = bits + GUARD;
    let pi = BigInt::from(16) * atan_inv(5, w) - BigInt::from(4) * atan_inv(239, w);
    pi >> GUARD
}

fn cos_series(x: &BigInt, w: u32) -> BigInt {
    let one = BigInt::one() << w;
    let x2 = (x * x) >> w;
    let mut term = one.clone();
    let mut sum = one;
    let mut n = 0u32;
    loop {
        term = (&term * &x2) >> w;
        term /= BigInt::from((n + 1) * (n + 2));
        n += 2;
        if term.is_zero() {
            break;
        }
        if n % 4 == 2 {
            sum -= &term;
        } else {
            sum += &term;
        }
    }
    sum
}

/// cos of the angle, with `bits` fractional bits (error well below one unit).
pub fn cos_fixed(angle: &AnglePi, bits: u32) -> BigInt {
    let w = bits + GUARD;
    let ht = angle.half_turns();
    // Fold into [0, π/2] so the series stays short: the fold is exact on the dyadic.
    let one = Dyadic::one();
    let two = Dyadic::from_int(2);
    let half = Dyadic::new(1, 1);
    let (t, negate) = if *ht <= half {
        (ht.clone(), false)
    } else if *ht <= one {
        (&one - ht, true)
    } else if *ht <= Dyadic::new(3, 1) {
        (ht - &one, true)
    } else {
        (&two - ht, false)
    };
    let pi = pi_fixed(w);
    let x = (&pi * t.numerator()) >> t.scale();
    let c = cos_series(&x, w) >> GUARD;
    if negate {
        -c
    } else {
        c
    }
}

/// Distance from `value / 2^bits` to the nearest multiple of `2^-scale`, in the same units.
pub fn distance_to_grid(value: &BigInt, bits: u32, scale: u32) -> BigInt {
    assert!(scale <= bits);
    let step = BigInt::one() << (bits - scale);
    let r = value.mod_floor(&step);
    let other = &step - &r;
    r.min(other)
}

/// Whether cos(angle) lies within `2^-tol_exp` of some dyadic of scale ≤ `scale`.
pub fn cos_near_dyadic(angle: &AnglePi, scale: u32, tol_exp: u32) -> bool {
    let bits = tol_exp.max(scale) + 64;
    let c = cos_fixed(angle, bits);
    let d = distance_to_grid(&c, bits, scale);
    d <= (BigInt::one() << (bits - tol_exp))
}

/// θ/π in [0, 2) for the angle, with `bits` fractional bits, by bisection on cos.
pub fn angle_over_pi_fixed(angle: &AngleCos, bits: u32) -> BigInt {
    let w = bits + 8;
    let unit = BigInt::one() << w;
    let target = (angle.cos().numerator() << w) >> angle.cos().scale();
    // cos(π t) is decreasing on t ∈ [0, 1].
    let mut lo = BigInt::zero();
    let mut hi = unit.clone();
    for _ in 0..w {
        let mid: BigInt = (&lo + &hi) >> 1u32;
        let probe = AnglePi::new(Dyadic::new(mid.clone(), w));
        if cos_fixed(&probe, w) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (lo + hi) >> 1u32;
    let t = if angle.sin_sign() == SinSign::Negative {
        (&unit << 1u32) - t
    } else {
        t
    };
    t >> (w - bits)
}

/// Rounds `value / 2^bits` times `2^j` to the nearest integer.
///
/// Returns `None` when the value is within `2^-margin` of a tie, so the caller
/// can tell a certified rounding from a coin toss.
pub fn round_fixed(value: &BigInt, bits: u32, j: u32, margin: u32) -> Option<BigInt> {
    assert!(j < bits && margin <= bits);
    let drop = bits - j;
    let step = BigInt::one() << drop;
    let (q, r) = value.div_mod_floor(&step);
    let half = &step >> 1u32;
    let tol = BigInt::one() << (bits - margin);
    if (&r - &half).abs() <= tol {
        return None;
    }
    Some(if r > half { q + 1 } else { q })
}
