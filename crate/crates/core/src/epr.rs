//! The idealized EPR-Bohm experiment on Champernowne-seeded spin functions.
//!
//! `S₀` takes the values of a Champernowne segment on the grid
//! `λ_n = nπ/2^N` and extends to `λ + π` by negation. `S_θ` is `S₀` with a
//! fraction `(1 − cos θ)/2` of its entries flipped, so the measured
//! correlation `⟨S₀(λ) S_θ(λ + π)⟩` is exactly `−cos θ`.
//!
//! Counterfactual outcomes `Sp₁`, `Sp₂` evaluate the same functions at
//! perturbed angles. They exist only when the perturbed angle stays on the
//! grid, and an alignment with a detector whose cosine is dyadic almost never
//! does. [`definedness`] and [`reality_condition_check`] report exactly that.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bitstring::{champernowne_spins, BitString, BitStringError, Spin};
use crate::dyadic::{angle_to_pi, AngleCos, AnglePi, Dyadic, DyadicError, SinSign};
use crate::numeric::{angle_over_pi_fixed, round_fixed};
use crate::Mode;

/// Largest grid level the model accepts.
pub const EPR_LEVEL_LIMIT: u32 = 24;

/// Terms inspected by [`cauchy_probe`] when judging convergence.
pub const CAUCHY_TAIL: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EprError {
    #[error("flip fraction {fraction} for {theta} needs level {needed}, above {level}")]
    ScaleTooFine {
        theta: AngleCos,
        fraction: Dyadic,
        needed: u32,
        level: u32,
    },
    #[error("level {level} outside 1..={limit}")]
    LevelOutOfRange { level: u32, limit: u32 },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    BitString(#[from] BitStringError),
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
}

fn check_level(level: u32) -> Result<(), EprError> {
    if level == 0 || level > EPR_LEVEL_LIMIT {
        return Err(EprError::LevelOutOfRange {
            level,
            limit: EPR_LEVEL_LIMIT,
        });
    }
    Ok(())
}

/// A ±1 function on the level-`N` grid of the circle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinFunction {
    level: u32,
    values: BitString,
}

impl SpinFunction {
    /// `values[n]` is the value at `nπ/2^N` for `n < 2^N`.
    pub fn new(level: u32, values: BitString) -> Result<SpinFunction, EprError> {
        check_level(level)?;
        if values.len() != 1usize << level {
            return Err(BitStringError::LengthMismatch {
                left: 1 << level,
                right: values.len(),
            }
            .into());
        }
        Ok(SpinFunction { level, values })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &BitString {
        &self.values
    }

    /// Value at grid index `m` of the full circle, `m ∈ [0, 2^(N+1))` taken modulo.
    pub fn at_index(&self, m: u64) -> Spin {
        let len = self.values.len() as u64;
        let m = m % (2 * len);
        if m < len {
            self.values.get(m as usize)
        } else {
            -self.values.get((m - len) as usize)
        }
    }

    /// `None` off the grid.
    pub fn eval(&self, angle: &AnglePi) -> Option<Spin> {
        angle.grid_index(self.level).map(|m| self.at_index(m))
    }
}

/// `S₀` from the Champernowne bits at `offset`.
pub fn build_s0(level: u32, offset: u64) -> Result<SpinFunction, EprError> {
    check_level(level)?;
    SpinFunction::new(level, champernowne_spins(1 << level, offset)?)
}

/// `sin²(θ/2) = (1 − cos θ)/2`.
pub fn flip_fraction_for(theta: &AngleCos) -> Dyadic {
    (Dyadic::one() - theta.cos().clone()).mul_pow2(-1)
}

/// Smallest level at which `S_θ` is exact.
pub fn min_exact_level(theta: &AngleCos) -> u32 {
    flip_fraction_for(theta).scale()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrainedFunction {
    pub function: SpinFunction,
    pub fraction: Dyadic,
    /// Set when permissive mode rounded the flip fraction to the grid.
    pub rounded: bool,
}

/// `S_θ`: `S₀` with the flip rule applied at `f = (1 − cos θ)/2`.
pub fn build_stheta(s0: &SpinFunction, theta: &AngleCos, mode: Mode) -> Result<StrainedFunction, EprError> {
    let exact = flip_fraction_for(theta);
    let (fraction, rounded) = if exact.scale() <= s0.level {
        (exact, false)
    } else if mode == Mode::Permissive {
        (Dyadic::new(exact.round_scaled(s0.level), s0.level), true)
    } else {
        return Err(EprError::ScaleTooFine {
            theta: theta.clone(),
            needed: exact.scale(),
            fraction: exact,
            level: s0.level,
        });
    };
    let values = s0.values.flip_fraction(&fraction)?;
    Ok(StrainedFunction {
        function: SpinFunction {
            level: s0.level,
            values,
        },
        fraction,
        rounded,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    pub theta: AngleCos,
    pub measured: Dyadic,
    pub expected: Dyadic,
    pub exact: bool,
    pub rounded: bool,
}

/// `C(θ) = ⟨S₀(λ_n) S_θ(λ_n + π)⟩` over the whole grid, for each angle.
pub fn corr_curve(s0: &SpinFunction, thetas: &[AngleCos], mode: Mode) -> Result<Vec<CurvePoint>, EprError> {
    thetas
        .par_iter()
        .map(|theta| {
            let st = build_stheta(s0, theta, mode)?;
            // S_θ(λ + π) = −S_θ(λ)
            let measured = -s0.values.correlation(&st.function.values)?;
            let expected = -theta.cos().clone();
            Ok(CurvePoint {
                exact: !st.rounded && measured == expected,
                rounded: st.rounded,
                theta: theta.clone(),
                measured,
                expected,
            })
        })
        .collect()
}

/// A ratio `sum / pairs` of ±1 products, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmpiricalCorrelation {
    pub sum: i64,
    pub pairs: u64,
}

impl EmpiricalCorrelation {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.sum), BigInt::from(self.pairs.max(1)))
    }

    pub fn equals(&self, d: &Dyadic) -> bool {
        self.pairs > 0 && self.to_rational() == d.to_rational()
    }

    pub fn to_f64(&self) -> f64 {
        self.sum as f64 / self.pairs.max(1) as f64
    }
}

impl fmt::Display for EmpiricalCorrelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_rational();
        if r.is_integer() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

impl Serialize for EmpiricalCorrelation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub start: u64,
    pub end: u64,
    pub theta: AngleCos,
    pub pairs: usize,
}

/// Detector settings over disjoint, ordered time intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealitySchedule {
    intervals: Vec<Interval>,
}

impl RealitySchedule {
    pub fn new(intervals: Vec<Interval>) -> Result<RealitySchedule, EprError> {
        if intervals.is_empty() {
            return Err(EprError::InvalidSchedule("no intervals".into()));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if iv.start >= iv.end {
                return Err(EprError::InvalidSchedule(format!("interval {i} is empty")));
            }
            if iv.pairs == 0 {
                return Err(EprError::InvalidSchedule(format!("interval {i} has no pairs")));
            }
            if i > 0 && intervals[i - 1].end > iv.start {
                return Err(EprError::InvalidSchedule(format!(
                    "interval {i} overlaps or precedes interval {}",
                    i - 1
                )));
            }
        }
        Ok(RealitySchedule { intervals })
    }

    /// Consecutive unit-length intervals, one per setting.
    pub fn sequential(settings: &[(AngleCos, usize)]) -> Result<RealitySchedule, EprError> {
        RealitySchedule::new(
            settings
                .iter()
                .enumerate()
                .map(|(i, (theta, pairs))| Interval {
                    start: 2 * i as u64,
                    end: 2 * i as u64 + 1,
                    theta: theta.clone(),
                    pairs: *pairs,
                })
                .collect(),
        )
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }
}

/// Where the `λ` of successive pairs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sampling {
    /// `λ_1, λ_2, …` continuing across intervals and wrapping at the grid end.
    Sequential,
    /// A seeded subset of distinct grid points per interval.
    RandomSubset { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalRecord {
    pub theta: AngleCos,
    pub lambda_indices: Vec<u64>,
    /// `S₀(λ)` per pair.
    pub alice: BitString,
    /// `S_θ(λ + π)` per pair.
    pub bob: BitString,
    pub correlation: EmpiricalCorrelation,
    pub expected: Dyadic,
    pub rounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealityRecord {
    pub level: u32,
    pub offset: u64,
    pub intervals: Vec<IntervalRecord>,
}

/// Runs one specific reality: a fixed `S₀` and the schedule's settings.
pub fn run_reality(
    schedule: &RealitySchedule,
    level: u32,
    offset: u64,
    sampling: Sampling,
    mode: Mode,
) -> Result<RealityRecord, EprError> {
    let s0 = build_s0(level, offset)?;
    let grid = 1u64 << level;
    let mut cursor = 0u64;
    let mut rng = match sampling {
        Sampling::RandomSubset { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Sampling::Sequential => None,
    };
    let mut intervals = Vec::with_capacity(schedule.intervals.len());
    for iv in &schedule.intervals {
        let st = build_stheta(&s0, &iv.theta, mode)?;
        let lambdas: Vec<u64> = match rng.as_mut() {
            None => {
                let v = (0..iv.pairs as u64).map(|i| (cursor + i) % grid).collect();
                cursor = (cursor + iv.pairs as u64) % grid;
                v
            }
            Some(rng) => {
                if iv.pairs as u64 > grid {
                    return Err(EprError::InvalidSchedule(format!(
                        "{} distinct pairs requested from a grid of {grid}",
                        iv.pairs
                    )));
                }
                let mut v: Vec<u64> = sample(rng, grid as usize, iv.pairs)
                    .into_iter()
                    .map(|i| i as u64)
                    .collect();
                v.sort_unstable();
                v
            }
        };
        let alice = BitString::from_spin_iter(lambdas.iter().map(|&m| s0.at_index(m)))?;
        let bob = BitString::from_spin_iter(lambdas.iter().map(|&m| st.function.at_index(m + grid)))?;
        let sum = alice.dot(&bob)?;
        intervals.push(IntervalRecord {
            theta: iv.theta.clone(),
            lambda_indices: lambdas,
            alice,
            bob,
            correlation: EmpiricalCorrelation {
                sum,
                pairs: iv.pairs as u64,
            },
            expected: -iv.theta.cos().clone(),
            rounded: st.rounded,
        });
    }
    Ok(RealityRecord {
        level,
        offset,
        intervals,
    })
}

/// `Sp₁(δθ₁, λ) = S₀(λ − δθ₁)`, undefined off the grid.
pub fn sp1(delta: &AnglePi, lambda: &AnglePi, s0: &SpinFunction) -> Option<Spin> {
    s0.eval(&(lambda - delta))
}

/// `Sp₂(δθ₂, λ) = −S_θ(λ − δθ₂)`, undefined off the grid.
pub fn sp2(delta: &AnglePi, lambda: &AnglePi, stheta: &SpinFunction) -> Option<Spin> {
    stheta.eval(&(lambda - delta)).map(|s| -s)
}

/// A hypothetical detector rotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Rotate by a dyadic multiple of π.
    Grid(AnglePi),
    /// Rotate so the detector lines up with an orientation given by its cosine.
    Align(AngleCos),
}

impl Perturbation {
    fn as_pi(&self) -> Result<AnglePi, DyadicError> {
        match self {
            Perturbation::Grid(a) => Ok(a.clone()),
            Perturbation::Align(c) => angle_to_pi(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "angle", rename_all = "snake_case")]
pub enum RelativeCos {
    Dyadic(AngleCos),
    NonRepresentable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefinednessReport {
    pub lambda: AnglePi,
    pub delta1: Perturbation,
    pub delta2: Perturbation,
    pub theta: AngleCos,
    pub level: u32,
    pub sp1_defined: bool,
    pub sp2_defined: bool,
    pub relative: RelativeCos,
    pub relative_cos_dyadic: bool,
    pub reasons: Vec<String>,
}

impl DefinednessReport {
    pub fn fully_defined(&self) -> bool {
        self.sp1_defined && self.sp2_defined && self.relative_cos_dyadic
    }
}

/// Sign of `p√a + q√b` for dyadic `p, q` and non-negative dyadic `a, b`.
fn sign_of_root_sum(p: &Dyadic, a: &Dyadic, q: &Dyadic, b: &Dyadic) -> i32 {
    let x = p.signum() * i32::from(!a.is_zero());
    let y = q.signum() * i32::from(!b.is_zero());
    if x == 0 || y == 0 || x == y {
        return if x != 0 { x } else { y };
    }
    let lhs = p * p * a.clone();
    let rhs = q * q * b.clone();
    match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => x,
        std::cmp::Ordering::Less => y,
        std::cmp::Ordering::Equal => 0,
    }
}

/// `x + y` when its cosine is dyadic.
pub fn add_angles(x: &AngleCos, y: &AngleCos) -> Option<AngleCos> {
    let one = Dyadic::one();
    let (cx, cy) = (x.cos(), y.cos());
    let sx2 = &one - cx * cx;
    let sy2 = &one - cy * cy;
    let sign_xy = x.sin_sign().as_i32() * y.sin_sign().as_i32();
    let prod = (&sx2 * &sy2).sqrt_exact()?;
    let sines = if sign_xy < 0 { -prod } else { prod };
    let cos = cx * cy - sines;
    // sin(x + y) = sin x cos y + cos x sin y
    let px = Dyadic::from_int(x.sin_sign().as_i32()) * cy.clone();
    let qy = Dyadic::from_int(y.sin_sign().as_i32()) * cx.clone();
    let sign = match sign_of_root_sum(&px, &sx2, &qy, &sy2) {
        1 => SinSign::Positive,
        -1 => SinSign::Negative,
        _ => SinSign::Zero,
    };
    let sign = if cos.abs() == one { SinSign::Zero } else { sign };
    AngleCos::new(cos, sign).ok()
}

/// The effective relative orientation `θ + δθ₂ − δθ₁`, when it is representable.
pub fn relative_orientation(theta: &AngleCos, delta1: &Perturbation, delta2: &Perturbation) -> RelativeCos {
    let mut grid_part = AnglePi::zero();
    let mut cos_parts = vec![theta.clone()];
    match delta2 {
        Perturbation::Grid(a) => grid_part = &grid_part + a,
        Perturbation::Align(c) => cos_parts.push(c.clone()),
    }
    match delta1 {
        Perturbation::Grid(a) => grid_part = &grid_part - a,
        Perturbation::Align(c) => cos_parts.push(c.reflected()),
    }
    let Some(grid_cos) = grid_part.to_angle_cos() else {
        return RelativeCos::NonRepresentable;
    };
    cos_parts.push(grid_cos);
    let mut acc = cos_parts[0].clone();
    for p in &cos_parts[1..] {
        match add_angles(&acc, p) {
            Some(v) => acc = v,
            None => return RelativeCos::NonRepresentable,
        }
    }
    RelativeCos::Dyadic(acc)
}

/// Which counterfactual outcomes exist at `λ` under the two perturbations.
pub fn definedness(
    lambda: &AnglePi,
    delta1: &Perturbation,
    delta2: &Perturbation,
    theta: &AngleCos,
    level: u32,
) -> DefinednessReport {
    let mut reasons = Vec::new();
    let mut side = |name: &str, delta: &Perturbation| match delta.as_pi() {
        Ok(d) => {
            let arg = lambda - &d;
            if arg.scale() <= level {
                true
            } else {
                reasons.push(format!(
                    "{name}: (λ − δθ)/π = {} has scale {} > {level}",
                    arg.half_turns(),
                    arg.scale()
                ));
                false
            }
        }
        Err(_) => {
            reasons.push(format!("{name}: alignment angle is not a dyadic multiple of π"));
            false
        }
    };
    let sp1_defined = side("sp1", delta1);
    let sp2_defined = side("sp2", delta2);
    let relative = relative_orientation(theta, delta1, delta2);
    let relative_cos_dyadic = matches!(relative, RelativeCos::Dyadic(_));
    if !relative_cos_dyadic {
        reasons.push("relative orientation has no dyadic cosine".into());
    }
    DefinednessReport {
        lambda: lambda.clone(),
        delta1: delta1.clone(),
        delta2: delta2.clone(),
        theta: theta.clone(),
        level,
        sp1_defined,
        sp2_defined,
        relative,
        relative_cos_dyadic,
        reasons,
    }
}

/// Correlation of `Sp₁(δ, ·)` with `Sp₂(δ, ·)` over the grid; `None` if `δ` is off-grid.
pub fn perturbed_correlation(
    s0: &SpinFunction,
    stheta: &SpinFunction,
    delta: &AnglePi,
) -> Option<Dyadic> {
    let shift = delta.grid_index(s0.level)?;
    let grid = 1u64 << s0.level;
    let period = 2 * grid;
    let sum: i64 = (0..grid)
        .map(|n| {
            let m = (n + period - shift) % period;
            i64::from(s0.at_index(m).value()) * -i64::from(stheta.at_index(m).value())
        })
        .sum();
    Some(Dyadic::new(sum, s0.level))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealityConditionReport {
    pub theta_a: AngleCos,
    pub level: u32,
    pub grid_points: u64,
    pub both_defined: u64,
    pub defined_fraction: Dyadic,
    /// Among defined points, how many satisfy `Sp₁(θ_A, λ) = −Sp₂(0, λ)`.
    pub agreeing: u64,
    pub bell_derivation_blocked: bool,
}

/// Tries to instantiate `Sp₁(θ_A, λ) = −Sp₂(0, λ)` at every grid point.
pub fn reality_condition_check(
    theta_a: &AngleCos,
    level: u32,
    offset: u64,
    mode: Mode,
) -> Result<RealityConditionReport, EprError> {
    let s0 = build_s0(level, offset)?;
    let st = build_stheta(&s0, theta_a, mode)?;
    let grid = 1u64 << level;
    let align = Perturbation::Align(theta_a.clone());
    let zero = Perturbation::Grid(AnglePi::zero());
    let counts: Vec<(bool, bool)> = (0..grid)
        .into_par_iter()
        .map(|n| {
            let lambda = AnglePi::from_parts(n, level);
            let report = definedness(&lambda, &align, &zero, theta_a, level);
            if !(report.sp1_defined && report.sp2_defined) {
                return (false, false);
            }
            let d1 = align.as_pi().expect("defined");
            let a = sp1(&d1, &lambda, &s0);
            let b = sp2(&AnglePi::zero(), &lambda, &st.function);
            (true, matches!((a, b), (Some(x), Some(y)) if x == -y))
        })
        .collect();
    let both_defined = counts.iter().filter(|c| c.0).count() as u64;
    let agreeing = counts.iter().filter(|c| c.1).count() as u64;
    Ok(RealityConditionReport {
        theta_a: theta_a.clone(),
        level,
        grid_points: grid,
        both_defined,
        defined_fraction: Dyadic::new(both_defined, level),
        agreeing,
        bell_derivation_blocked: both_defined == 0,
    })
}

/// `round(θ/π · 2^j) / 2^j` for each `j`, ties to even.
pub fn cauchy_approximations(theta: &AngleCos, js: RangeInclusive<u32>) -> Result<Vec<AnglePi>, EprError> {
    if js.is_empty() {
        return Err(EprError::InvalidRange(format!("{js:?}")));
    }
    if let Ok(exact) = angle_to_pi(theta) {
        return Ok(js
            .map(|j| AnglePi::new(Dyadic::new(exact.half_turns().round_scaled(j), j)))
            .collect());
    }
    // θ/π is irrational here, so no rounding is a tie; more bits settle any near-tie.
    let jmax = *js.end();
    let mut bits = jmax + 64;
    loop {
        let t = angle_over_pi_fixed(theta, bits);
        let rounded: Option<Vec<AnglePi>> = js
            .clone()
            .map(|j| round_fixed(&t, bits, j, bits - 8).map(|m| AnglePi::new(Dyadic::new(m, j))))
            .collect();
        if let Some(v) = rounded {
            return Ok(v);
        }
        bits *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CauchyProbe {
    pub lambda: AnglePi,
    pub js: Vec<u32>,
    pub approximations: Vec<AnglePi>,
    /// `Sp₁(θ^(j), λ)`, or `None` where it is undefined.
    pub values: Vec<Option<Spin>>,
    /// Whether the last [`CAUCHY_TAIL`] values coincide.
    pub tail_constant: bool,
}

fn tail_constant(values: &[Option<Spin>]) -> bool {
    let tail = &values[values.len().saturating_sub(CAUCHY_TAIL)..];
    tail.windows(2).all(|w| w[0] == w[1])
}

/// `Sp₁(θ^(j), λ)` along precomputed approximations.
pub fn cauchy_probe_with(
    approximations: &[AnglePi],
    js: &[u32],
    lambda: &AnglePi,
    s0: &SpinFunction,
) -> CauchyProbe {
    let values: Vec<Option<Spin>> = approximations.iter().map(|a| sp1(a, lambda, s0)).collect();
    CauchyProbe {
        lambda: lambda.clone(),
        js: js.to_vec(),
        approximations: approximations.to_vec(),
        tail_constant: tail_constant(&values),
        values,
    }
}

/// `Sp₁` along the dyadic approximations of `θ_A` at scales `j_range`.
pub fn cauchy_probe(
    theta_a: &AngleCos,
    lambda: &AnglePi,
    j_range: RangeInclusive<u32>,
    s0: &SpinFunction,
) -> Result<CauchyProbe, EprError> {
    if *j_range.start() == 0 || *j_range.end() > s0.level {
        return Err(EprError::InvalidRange(format!(
            "j range {j_range:?} not within 1..={}",
            s0.level
        )));
    }
    let approx = cauchy_approximations(theta_a, j_range.clone())?;
    let js: Vec<u32> = j_range.collect();
    Ok(cauchy_probe_with(&approx, &js, lambda, s0))
}

/// Fraction of `λ` samples whose probe tail is not constant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CauchySurvey {
    pub samples: usize,
    pub non_constant: usize,
}

/// Runs the probe at each grid index in `lambdas`.
pub fn cauchy_survey(
    theta_a: &AngleCos,
    lambdas: &[u64],
    j_range: RangeInclusive<u32>,
    s0: &SpinFunction,
) -> Result<CauchySurvey, EprError> {
    let approx = cauchy_approximations(theta_a, j_range.clone())?;
    let js: Vec<u32> = j_range.collect();
    let non_constant = lambdas
        .par_iter()
        .filter(|&&m| {
            let lambda = AnglePi::from_parts(m, s0.level);
            !cauchy_probe_with(&approx, &js, &lambda, s0).tail_constant
        })
        .count();
    Ok(CauchySurvey {
        samples: lambdas.len(),
        non_constant,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChshTerm {
    pub theta: AngleCos,
    pub level: u32,
    pub correlation: EmpiricalCorrelation,
    pub expected: Dyadic,
    pub rounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChshReport {
    /// `(a,b)`, `(a,b′)`, `(a′,b)`, `(a′,b′)`.
    pub terms: Vec<ChshTerm>,
    pub s: BigRationalText,
    pub s_exact: Option<Dyadic>,
}

/// A rational rendered as `p/q` in JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigRationalText(pub BigRational);

impl Serialize for BigRationalText {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_string())
    }
}

impl ChshReport {
    pub fn s_f64(&self) -> f64 {
        rational_to_f64(&self.s.0)
    }
}

/// `S = C(a,b) − C(a,b′) + C(a′,b) + C(a′,b′)` from four separate full-grid runs.
///
/// In strict mode each run uses the coarsest level `≥ level` at which its
/// setting is exact; permissive mode stays at `level` and rounds.
pub fn chsh(settings: &[AngleCos; 4], level: u32, offset: u64, mode: Mode) -> Result<ChshReport, EprError> {
    check_level(level)?;
    let terms = settings
        .par_iter()
        .map(|theta| {
            let run_level = match mode {
                Mode::Strict => level.max(min_exact_level(theta)),
                Mode::Permissive => level,
            };
            check_level(run_level)?;
            let schedule = RealitySchedule::sequential(&[(theta.clone(), 1usize << run_level)])?;
            let record = run_reality(&schedule, run_level, offset, Sampling::Sequential, mode)?;
            let iv = record.intervals.into_iter().next().expect("one interval");
            Ok(ChshTerm {
                theta: theta.clone(),
                level: run_level,
                correlation: iv.correlation,
                expected: iv.expected,
                rounded: iv.rounded,
            })
        })
        .collect::<Result<Vec<_>, EprError>>()?;
    let signs = [1, -1, 1, 1];
    let s: BigRational = terms
        .iter()
        .zip(signs)
        .map(|(t, k)| t.correlation.to_rational() * BigInt::from(k))
        .sum();
    let s_exact = Dyadic::from_rational(&s);
    Ok(ChshReport {
        terms,
        s: BigRationalText(s),
        s_exact,
    })
}

/// The settings `(θ, 3θ, θ, θ)` for a first-quadrant `θ`.
pub fn chsh_settings(theta: &AngleCos) -> [AngleCos; 4] {
    [theta.clone(), theta.tripled(), theta.clone(), theta.clone()]
}

fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) => n / d,
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(c: &str) -> AngleCos {
        AngleCos::upper(c.parse().unwrap()).unwrap()
    }

    #[test]
    fn s0_examples() {
        let s0 = build_s0(4, 0).unwrap();
        assert_eq!(s0.eval(&AnglePi::zero()), Some(Spin::Up));
        for m in 0..16u64 {
            let a = AnglePi::from_parts(m, 4);
            assert_eq!(s0.eval(&(&a + &AnglePi::pi())), s0.eval(&a).map(|s| -s));
        }
        assert_ne!(build_s0(6, 0).unwrap(), build_s0(6, 7).unwrap());
        assert_eq!(s0.eval(&AnglePi::from_parts(1, 5)), None);
    }

    #[test]
    fn stheta_endpoints() {
        let s0 = build_s0(5, 0).unwrap();
        let same = build_stheta(&s0, &up("1"), Mode::Strict).unwrap();
        assert_eq!(same.function, s0);
        let opposite = build_stheta(&s0, &up("-1"), Mode::Strict).unwrap();
        assert_eq!(opposite.function.values(), &s0.values().flip_fraction(&Dyadic::one()).unwrap());
        let err = build_stheta(&s0, &up("1/2^6"), Mode::Strict).unwrap_err();
        assert!(matches!(err, EprError::ScaleTooFine { needed: 7, level: 5, .. }));
        assert!(build_stheta(&s0, &up("1/2^6"), Mode::Permissive).unwrap().rounded);
    }

    #[test]
    fn curve_examples() {
        let s0 = build_s0(8, 0).unwrap();
        let pts = corr_curve(&s0, &[up("-1"), up("0"), up("3/4")], Mode::Strict).unwrap();
        assert_eq!(pts[0].measured, Dyadic::one());
        assert_eq!(pts[1].measured, Dyadic::zero());
        assert_eq!(pts[2].measured, Dyadic::new(-3, 2));
        assert!(pts.iter().all(|p| p.exact));
    }

    #[test]
    fn curve_exact_for_all_representable_angles() {
        for level in [8u32, 12] {
            let s0 = build_s0(level, 0).unwrap();
            // cos θ = 1 − 2f for every f on a coarse sub-grid of scale ≤ N.
            let thetas: Vec<AngleCos> = (0..=64i64)
                .map(|m| AngleCos::upper(Dyadic::one() - Dyadic::new(m, 5)).unwrap())
                .collect();
            for p in corr_curve(&s0, &thetas, Mode::Strict).unwrap() {
                assert!(p.exact, "N={level} θ={}", p.theta);
            }
        }
    }

    #[test]
    fn reality_examples() {
        let sched = RealitySchedule::sequential(&[(up("-1"), 256)]).unwrap();
        let r = run_reality(&sched, 8, 0, Sampling::Sequential, Mode::Strict).unwrap();
        assert!(r.intervals[0].correlation.equals(&Dyadic::one()));

        let sched = RealitySchedule::sequential(&[(up("0"), 256)]).unwrap();
        let r = run_reality(&sched, 8, 0, Sampling::Sequential, Mode::Strict).unwrap();
        assert!(r.intervals[0].correlation.equals(&Dyadic::zero()));

        let sched = RealitySchedule::sequential(&[(up("1/2"), 256), (up("-1/4"), 256)]).unwrap();
        let r = run_reality(&sched, 8, 0, Sampling::Sequential, Mode::Strict).unwrap();
        assert!(r.intervals[0].correlation.equals(&Dyadic::new(-1, 1)));
        assert!(r.intervals[1].correlation.equals(&Dyadic::new(1, 2)));
    }

    #[test]
    fn reality_random_subset_is_seeded() {
        let sched = RealitySchedule::sequential(&[(up("1/2"), 100)]).unwrap();
        let a = run_reality(&sched, 10, 0, Sampling::RandomSubset { seed: 3 }, Mode::Strict).unwrap();
        let b = run_reality(&sched, 10, 0, Sampling::RandomSubset { seed: 3 }, Mode::Strict).unwrap();
        let c = run_reality(&sched, 10, 0, Sampling::RandomSubset { seed: 4 }, Mode::Strict).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.intervals[0].lambda_indices, c.intervals[0].lambda_indices);
        assert!((a.intervals[0].correlation.to_f64() + 0.5).abs() < 0.3);
    }

    #[test]
    fn schedule_validation() {
        let iv = |s, e| Interval {
            start: s,
            end: e,
            theta: up("0"),
            pairs: 1,
        };
        assert!(RealitySchedule::new(vec![]).is_err());
        assert!(RealitySchedule::new(vec![iv(0, 0)]).is_err());
        assert!(RealitySchedule::new(vec![iv(0, 5), iv(3, 8)]).is_err());
        assert!(RealitySchedule::new(vec![iv(0, 5), iv(5, 8)]).is_ok());
    }

    #[test]
    fn sp_examples() {
        let s0 = build_s0(6, 0).unwrap();
        let st = build_stheta(&s0, &up("1/2"), Mode::Strict).unwrap().function;
        let zero = AnglePi::zero();
        for m in 0..64u64 {
            let lambda = AnglePi::from_parts(m, 6);
            assert_eq!(sp1(&zero, &lambda, &s0), s0.eval(&lambda));
            assert_eq!(sp2(&zero, &lambda, &st), st.eval(&(&lambda + &AnglePi::pi())));
        }
        assert_eq!(sp1(&AnglePi::from_parts(1, 7), &zero, &s0), None);
    }

    #[test]
    fn identical_perturbations_preserve_correlation() {
        let s0 = build_s0(8, 0).unwrap();
        for c in ["3/4", "-1/2", "0", "5/8"] {
            let theta = up(c);
            let st = build_stheta(&s0, &theta, Mode::Strict).unwrap().function;
            for m in [0u64, 1, 77, 256, 300] {
                let d = AnglePi::from_parts(m, 8);
                assert_eq!(perturbed_correlation(&s0, &st, &d), Some(-theta.cos().clone()));
            }
            assert_eq!(perturbed_correlation(&s0, &st, &AnglePi::from_parts(1, 9)), None);
        }
    }

    #[test]
    fn definedness_examples() {
        let theta = up("3/4");
        let zero = Perturbation::Grid(AnglePi::zero());
        let r = definedness(&AnglePi::from_parts(3, 4), &zero, &zero, &theta, 4);
        assert!(r.fully_defined());
        assert_eq!(r.relative, RelativeCos::Dyadic(theta.clone()));

        let align = Perturbation::Align(theta.clone());
        for m in 0..16u64 {
            let r = definedness(&AnglePi::from_parts(m, 4), &align, &zero, &theta, 4);
            assert!(!r.sp1_defined && r.sp2_defined);
            // Aligning detector 1 with θ_A leaves them parallel: relative cos 1.
            assert_eq!(r.relative, RelativeCos::Dyadic(up("1")));
        }

        let quarter = Perturbation::Grid(AnglePi::half_pi());
        let r = definedness(&AnglePi::zero(), &quarter, &quarter, &theta, 4);
        assert!(r.fully_defined());
        assert_eq!(r.relative, RelativeCos::Dyadic(theta.clone()));

        let fine = Perturbation::Grid(AnglePi::from_parts(1, 3));
        let r = definedness(&AnglePi::zero(), &zero, &fine, &theta, 4);
        assert!(r.sp2_defined);
        assert!(!r.relative_cos_dyadic);
    }

    #[test]
    fn angle_addition() {
        let q = up("0");
        assert_eq!(add_angles(&q, &q), Some(up("-1")));
        let t = up("3/4");
        assert_eq!(add_angles(&t, &t.reflected()), Some(up("1")));
        assert_eq!(add_angles(&t, &up("-1")), Some(t.opposite()));
        // cos 2θ = 2c² − 1 = 1/8, and 2θ stays in the upper half-plane.
        assert_eq!(add_angles(&t, &t), Some(up("1/8")));
        assert_eq!(add_angles(&t, &up("1/2")), None);
    }

    #[test]
    fn reality_condition_examples() {
        let r = reality_condition_check(&up("3/4"), 8, 0, Mode::Strict).unwrap();
        assert_eq!(r.defined_fraction, Dyadic::zero());
        assert!(r.bell_derivation_blocked);
        for c in ["0", "-1", "1"] {
            let r = reality_condition_check(&up(c), 8, 0, Mode::Strict).unwrap();
            assert_eq!(r.defined_fraction, Dyadic::one(), "c={c}");
            assert!(!r.bell_derivation_blocked);
        }
    }

    #[test]
    fn complementarity_exhaustive_small_levels() {
        for level in 1..=8u32 {
            for num in 1..(1i64 << level) {
                let c = Dyadic::new(num, level);
                if c.abs() == Dyadic::one() || c.is_zero() {
                    continue;
                }
                let r = reality_condition_check(&up(&c.to_string()), level, 0, Mode::Permissive).unwrap();
                assert_eq!(r.both_defined, 0, "N={level} c={c}");
            }
        }
    }

    #[test]
    fn cauchy_examples() {
        let s0 = build_s0(12, 0).unwrap();
        let lambda = AnglePi::from_parts(100, 12);
        for p in [up("1"), up("0"), up("-1")] {
            let probe = cauchy_probe(&p, &lambda, 1..=12, &s0).unwrap();
            assert!(probe.tail_constant);
        }
        let a = cauchy_probe(&up("3/4"), &lambda, 4..=12, &s0).unwrap();
        let b = cauchy_probe(&up("3/4"), &lambda, 4..=12, &s0).unwrap();
        assert_eq!(a, b);
        assert!(cauchy_probe(&up("3/4"), &lambda, 0..=12, &s0).is_err());
        assert!(cauchy_probe(&up("3/4"), &lambda, 4..=13, &s0).is_err());
    }

    #[test]
    fn cauchy_approximations_converge() {
        let approx = cauchy_approximations(&up("3/4"), 1..=30).unwrap();
        let target = 0.75f64.acos() / std::f64::consts::PI;
        for (j, a) in (1..=30).zip(&approx) {
            assert!(a.scale() <= j);
            assert!((a.half_turns().to_f64() - target).abs() <= 0.5f64.powi(j as i32 + 1) + 1e-15);
        }
        // Ties round to even on exact inputs: π/2 at j = 0 is 1/2 → 0.
        let q = cauchy_approximations(&up("0"), 0..=2).unwrap();
        assert_eq!(q[0], AnglePi::zero());
        assert_eq!(q[2], AnglePi::half_pi());
    }

    #[test]
    fn chsh_examples() {
        let q = up("0");
        let r = chsh(&[q.clone(), q.clone(), q.clone(), q], 6, 0, Mode::Strict).unwrap();
        assert_eq!(r.s_exact, Some(Dyadic::zero()));
        let r = chsh(&chsh_settings(&up("1")), 6, 0, Mode::Strict).unwrap();
        assert_eq!(r.s_exact, Some(Dyadic::from_int(-2)));
    }

    #[test]
    fn chsh_exceeds_two_at_a_coarse_setting() {
        // cos θ = 3/4: S = 4c³ − 6c = −45/16, and cos 3θ = −9/16 needs level 5.
        let theta = up("3/4");
        let settings = chsh_settings(&theta);
        assert_eq!(min_exact_level(&settings[1]), 5);
        let r = chsh(&settings, 4, 0, Mode::Strict).unwrap();
        assert_eq!(r.s_exact, Some(Dyadic::new(-45, 4)));
        assert_eq!(r.terms[0].level, 4);
        assert_eq!(r.terms[1].level, 5);
        assert!(r.s_f64().abs() > 2.0);
    }
}
