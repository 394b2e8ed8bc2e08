//! The acceptance suite as library checks, shared by the `report` command and
//! the integration tests.

use std::time::Instant;

use serde::Serialize;

use crate::bitstring::{champernowne_bits, champernowne_spins, BitString};
use crate::dyadic::{cos_exact, AngleCos, AnglePi, Dyadic, ExactCos, SinSign};
use crate::epr::{
    build_s0, cauchy_survey, chsh, chsh_settings, corr_curve, reality_condition_check, EprError,
};
use crate::hypercomplex::{
    build_root, orthogonality_table, phase_generator, quaternion_laws_hold, HyperError,
    OperatorLabel, QuaternionTriple,
};
use crate::numeric::cos_near_dyadic;
use crate::qubits::{class_scan, ket_up, superpose, QubitError};
use crate::Mode;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Qubit(#[from] QubitError),
    #[error(transparent)]
    Epr(#[from] EprError),
    #[error(transparent)]
    BitString(#[from] crate::bitstring::BitStringError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub context: String,
    pub expected: Dyadic,
    pub measured: Dyadic,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    /// Wall time; left out of JSON so reports stay byte-identical across runs.
    #[serde(skip)]
    pub elapsed_ms: u128,
    pub budget_ms: Option<u128>,
    pub deviations: Vec<Deviation>,
}

impl CriterionResult {
    pub fn summary_line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        )
    }

    pub fn timing(&self) -> String {
        match self.budget_ms {
            Some(b) => format!("{} ms (budget {b} ms)", self.elapsed_ms),
            None => format!("{} ms", self.elapsed_ms),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceOptions {
    /// Treat reported superposition deviations as failures.
    pub strict_deviations: bool,
    /// Required share of non-constant probe tails, in percent.
    pub cauchy_threshold_percent: u32,
    pub cauchy_samples: u64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions {
            strict_deviations: false,
            cauchy_threshold_percent: 90,
            cauchy_samples: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    pub schema_version: u32,
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

struct Outcome {
    passed: bool,
    detail: String,
    deviations: Vec<Deviation>,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            passed,
            detail: detail.into(),
            deviations: Vec::new(),
        }
    }
}

fn timed(
    id: u8,
    title: &str,
    budget_ms: Option<u128>,
    body: impl FnOnce() -> Result<Outcome, ReportError>,
) -> Result<CriterionResult, ReportError> {
    let start = Instant::now();
    let outcome = body()?;
    let elapsed_ms = start.elapsed().as_millis();
    let within = budget_ms.is_none_or(|b| elapsed_ms < b);
    Ok(CriterionResult {
        id,
        title: title.into(),
        passed: outcome.passed && within,
        detail: outcome.detail,
        elapsed_ms,
        budget_ms,
        deviations: outcome.deviations,
    })
}

fn upper(num: i64, scale: u32) -> AngleCos {
    AngleCos::upper(Dyadic::new(num, scale)).expect("cosine in range")
}

/// Measured `C(θ) = −cos θ` exactly at `N = 16`.
pub fn correlation_law() -> Result<CriterionResult, ReportError> {
    timed(1, "correlation law", Some(1000), || {
        let s0 = build_s0(16, 0)?;
        let thetas: Vec<AngleCos> = (-4..=4).map(|m| upper(m, 2)).collect();
        let pts = corr_curve(&s0, &thetas, Mode::Strict)?;
        let bad: Vec<String> = pts
            .iter()
            .filter(|p| !p.exact)
            .map(|p| format!("{} measured {}", p.theta, p.measured))
            .collect();
        Ok(Outcome::new(
            bad.is_empty(),
            format!("{} angles at N=16, {} inexact {:?}", pts.len(), bad.len(), bad),
        ))
    })
}

/// Flip rule on the first 11 Champernowne bits at `f = 1/2` and `f = 1`.
pub fn flip_rule_example() -> Result<CriterionResult, ReportError> {
    timed(2, "flip rule worked example", None, || {
        let bits = BitString::from_bits(&champernowne_bits(11, 0))?;
        let half = bits.flip_fraction(&Dyadic::new(1, 1))?.to_bit_string();
        let full = bits.flip_fraction(&Dyadic::one())?.to_bit_string();
        let ok = half == "10001001111" && full == "00100011010";
        Ok(Outcome::new(
            ok,
            format!("source {} f=1/2 -> {half}, f=1 -> {full}", bits.to_bit_string()),
        ))
    })
}

/// Squares and the quaternion table for every level up to 8.
pub fn quaternion_algebra() -> Result<CriterionResult, ReportError> {
    timed(3, "quaternion algebra", Some(10_000), || {
        let mut roots = 0usize;
        let mut triples = 0usize;
        let mut failures = Vec::new();
        for level in 1..=8u32 {
            for j in 1..(1u64 << level) {
                roots += 1;
                let e = build_root(OperatorLabel::new(level, j)?)?;
                if !(&e * &e).is_minus_identity() {
                    failures.push(format!("E{j} at N={level}"));
                }
            }
            for t in QuaternionTriple::all(level)? {
                triples += 1;
                let [i, j, k] = t.operators()?;
                if !quaternion_laws_hold(&i, &j, &k) {
                    failures.push(format!("{t} at N={level}"));
                }
            }
        }
        Ok(Outcome::new(
            failures.is_empty(),
            format!("{roots} roots, {triples} triples, failures {failures:?}"),
        ))
    })
}

/// Correlation table of the basis strings is the identity up to `N = 8`.
pub fn orthogonality() -> Result<CriterionResult, ReportError> {
    timed(4, "orthogonality", None, || {
        let mut off = Vec::new();
        for level in 1..=8u32 {
            let table = orthogonality_table(level, 8)?;
            if !table.is_identity_pattern() {
                off.push((level, table.violations().len()));
            }
        }
        Ok(Outcome::new(
            off.is_empty(),
            format!("N=1..=8, off-pattern (level, count) {off:?}"),
        ))
    })
}

/// The printed phase step has order exactly `2^(N+2)`, for `N ≤ 12`.
pub fn cyclic_order() -> Result<CriterionResult, ReportError> {
    timed(5, "cyclic order", None, || {
        let mut failures = Vec::new();
        for level in 1..=12u32 {
            let step = phase_generator(level);
            let full = step.pow(1i64 << (level + 2)).is_identity();
            let half_not = !step.pow(1i64 << (level + 1)).is_identity();
            if !(full && half_not) {
                let order = (0..=level + 2)
                    .find(|&e| step.pow(1i64 << e).is_identity())
                    .map_or("none".to_string(), |e| format!("2^{e}"));
                failures.push(format!("N={level}: order {order}"));
            }
        }
        Ok(Outcome::new(
            failures.is_empty(),
            format!("{} of 12 levels fail: {}", failures.len(), failures.join(", ")),
        ))
    })
}

/// Dyadic cosines occur only at the four quadrantal angles, cross-checked numerically.
pub fn dyadic_cosines() -> Result<CriterionResult, ReportError> {
    timed(6, "dyadic cosines only at quadrantal angles", Some(30_000), || {
        use rayon::prelude::*;
        let angles: Vec<AnglePi> = (0..=12u32)
            .flat_map(|k| {
                let odd_only = k > 0;
                (0..(2u64 << k))
                    .filter(move |m| !odd_only || m % 2 == 1)
                    .map(move |m| AnglePi::from_parts(m, k))
            })
            .collect();
        let bad: Vec<String> = angles
            .par_iter()
            .filter_map(|a| {
                let exact = matches!(cos_exact(a), ExactCos::Dyadic(_));
                let near = cos_near_dyadic(a, 20, 40);
                let quadrantal = a.is_quadrantal();
                (exact != quadrantal || near != quadrantal).then(|| format!("{a}"))
            })
            .collect();
        Ok(Outcome::new(
            bad.is_empty(),
            format!("{} angles with scale <= 12, mismatches {:?}", angles.len(), bad),
        ))
    })
}

fn four_points() -> Vec<AngleCos> {
    vec![
        upper(1, 0),
        upper(0, 0),
        upper(-1, 0),
        AngleCos::new(Dyadic::zero(), SinSign::Negative).expect("valid"),
    ]
}

/// On the Champernowne segment at `N = 6` only the four quadrantal angles stay in class.
pub fn four_point_class() -> Result<CriterionResult, ReportError> {
    timed(7, "four-point phase class", None, || {
        let level = 6;
        let base = champernowne_spins(1 << level, 0)?;
        let mut grid = four_points();
        for (m, k) in [(1, 1), (3, 2)] {
            grid.push(upper(m, k));
            grid.push(AngleCos::new(Dyadic::new(m, k), SinSign::Negative).expect("valid"));
        }
        let mut bad = Vec::new();
        let triples = QuaternionTriple::all(level)?;
        for t in &triples {
            let hits: Vec<AngleCos> = class_scan(&base, t, &grid, Mode::Strict)?
                .into_iter()
                .filter(|e| e.witness.is_some())
                .map(|e| e.theta)
                .collect();
            if hits != four_points() {
                bad.push(format!("{t}: {}", hits.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(" ")));
            }
        }
        Ok(Outcome::new(
            bad.is_empty(),
            format!("{} triples, {} grid angles, mismatches {:?}", triples.len(), grid.len(), bad),
        ))
    })
}

/// `corr(superpose(θ), E_a(1s)) = cos θ` for every triple at `N ≤ 8`.
pub fn superposition_correlation(strict: bool) -> Result<CriterionResult, ReportError> {
    timed(8, "superposition correlation", None, || {
        use rayon::prelude::*;
        let mut cases = 0usize;
        let mut deviations = Vec::new();
        let mut off_unit = 0usize;
        for level in 2..=8u32 {
            let ones = ket_up(level);
            let len = 1i64 << level;
            for t in QuaternionTriple::all(level)? {
                let reference = build_root(t.label_a())?.apply(&ones)?;
                let angles: Vec<AngleCos> = (-len..=len)
                    .flat_map(|m| {
                        let c = Dyadic::new(m, level);
                        let mut v = vec![AngleCos::upper(c.clone()).expect("in range")];
                        if c.abs() != Dyadic::one() {
                            v.push(AngleCos::new(c, SinSign::Negative).expect("in range"));
                        }
                        v
                    })
                    .collect();
                cases += angles.len();
                let found: Vec<Deviation> = angles
                    .par_iter()
                    .map(|theta| -> Result<Option<Deviation>, ReportError> {
                        let sup = superpose(&t, theta, &ones, Mode::Strict)?;
                        let measured = sup.string.correlation(&reference)?;
                        Ok((measured != *theta.cos()).then(|| Deviation {
                            context: format!("N={level} {t} {theta}"),
                            expected: theta.cos().clone(),
                            measured,
                        }))
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .flatten()
                    .collect();
                off_unit += found
                    .iter()
                    .filter(|d| (&d.measured - &d.expected).abs() != Dyadic::new(1, level))
                    .count();
                deviations.extend(found);
            }
        }
        let mut outcome = Outcome::new(
            !strict || deviations.is_empty(),
            format!(
                "{cases} cases, {} deviations, {off_unit} of them off by more than 1/2^N{}",
                deviations.len(),
                if strict { " strict" } else { "" }
            ),
        );
        outcome.deviations = deviations;
        Ok(outcome)
    })
}

/// `|6c − 4c³|` for the CHSH settings built from `c`.
pub fn chsh_target(c: &Dyadic) -> Dyadic {
    let c3 = c * c * c.clone();
    (Dyadic::from_int(6) * c.clone() - Dyadic::from_int(4) * c3).abs()
}

/// No simultaneous definedness at `N = 12`, while CHSH exceeds 2.82 exactly.
pub fn incompleteness() -> Result<CriterionResult, ReportError> {
    timed(9, "incompleteness and CHSH", Some(5000), || {
        let rc = reality_condition_check(&upper(3, 2), 12, 0, Mode::Strict)?;
        let c = Dyadic::new(181, 8);
        let report = chsh(&chsh_settings(&upper(181, 8)), 12, 0, Mode::Strict)?;
        let target = chsh_target(&c);
        let s_abs = report.s_exact.as_ref().map(Dyadic::abs);
        // 2.82 is not dyadic: compare 100|S| with 282.
        let exceeds = s_abs
            .as_ref()
            .is_some_and(|s| Dyadic::from_int(100) * s.clone() > Dyadic::from_int(282));
        let ok = rc.defined_fraction.is_zero() && s_abs.as_ref() == Some(&target) && exceeds;
        Ok(Outcome::new(
            ok,
            format!(
                "defined fraction {} over {} points; |S| = {} (target {target}), term levels {:?}",
                rc.defined_fraction,
                rc.grid_points,
                s_abs.map_or("not dyadic".to_string(), |s| s.to_string()),
                report.terms.iter().map(|t| t.level).collect::<Vec<_>>()
            ),
        ))
    })
}

/// The `Sp₁` sequence along dyadic approximations of `θ_A` does not settle.
pub fn non_convergence(threshold_percent: u32, samples: u64) -> Result<CriterionResult, ReportError> {
    timed(10, "non-convergence of counterfactual values", None, || {
        let level = 20;
        let s0 = build_s0(level, 0)?;
        let grid = 1u64 << level;
        // Integer stride from λ = 0; fixed before any results were seen.
        let lambdas: Vec<u64> = (0..samples).map(|i| i * (grid / samples)).collect();
        let survey = cauchy_survey(&upper(3, 2), &lambdas, 1..=level, &s0)?;
        let ok = survey.non_constant as u64 * 100 >= threshold_percent as u64 * samples;
        Ok(Outcome::new(
            ok,
            format!(
                "{}/{} tails non-constant at N={level}, need {threshold_percent}%",
                survey.non_constant, survey.samples
            ),
        ))
    })
}

/// Champernowne segment of length `2^16` is balanced within 0.05.
pub fn balance() -> Result<CriterionResult, ReportError> {
    timed(11, "balance", None, || {
        let b = champernowne_spins(1 << 16, 0)?.balance()?;
        let ok = Dyadic::from_int(20) * b.abs() <= Dyadic::one();
        Ok(Outcome::new(ok, format!("balance {b} ({:.5})", b.to_f64())))
    })
}

/// Runs every criterion in order.
pub fn run_acceptance(opts: &AcceptanceOptions) -> Result<AcceptanceReport, ReportError> {
    let criteria = vec![
        correlation_law()?,
        flip_rule_example()?,
        quaternion_algebra()?,
        orthogonality()?,
        cyclic_order()?,
        dyadic_cosines()?,
        four_point_class()?,
        superposition_correlation(opts.strict_deviations)?,
        incompleteness()?,
        non_convergence(opts.cauchy_threshold_percent, opts.cauchy_samples)?,
        balance()?,
    ];
    let all_passed = criteria.iter().all(|c| c.passed);
    Ok(AcceptanceReport {
        schema_version: SCHEMA_VERSION,
        criteria,
        all_passed,
    })
}
