//! The two discriminating experiments.
//!
//! *Symmetric detection*: nearly coincident slits (`Y ≪ σ0`) and moderate
//! spreading (`sT ~ 1`). Bohmian pairs keep their center of mass close to the
//! axis compared with the fringe spacing, while `|psi|^2` gives a non-zero
//! probability of detections in non-mirror detector cells.
//!
//! *Selective detection*: strong spreading (`sT ≫ 1`), a subensemble whose
//! initial center of mass sits well off the axis, and only pairs registered
//! on opposite sides of the axis are kept. The Bohmian pairs then leave a
//! detection-free band whose length is compared with `ħ T ⟨y0⟩ / (m σ0²)`.
//!
//! Every report carries both the Bohmian statistics and the matching `|psi|^2`
//! quantities evaluated with the same definitions, so that the claimed
//! discrepancies can be inspected rather than asserted.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensemble::{run_ensemble, Conditioning, EnsembleCounts, SamplerConfig, Trajectory, TrajectoryStatus};
use crate::error::{Error, Result};
use crate::guidance::PairState;
use crate::integrate::IntegratorConfig;
use crate::model::PhysicalParams;
use crate::sqm::{
    density_support, fringe_spacing, marginal_bin_masses, mirror_asymmetric_probability, off_band_probability,
    probability_in_rectangle, ScreenConfig,
};

/// Largest tolerated fraction of trajectories that fail to reach the screen.
pub const REJECTION_BUDGET: f64 = 1e-3;

/// Ratio at or below which `a ≪ b` counts as satisfied.
pub const MUCH_LESS_RATIO: f64 = 0.1;

/// Largest `Y / σ0` accepted for the symmetric-detection case.
pub const SYMMETRIC_MAX_OFFSET_RATIO: f64 = 0.1;
/// Admissible `sT` range for the symmetric-detection case.
pub const SYMMETRIC_ST_RANGE: (f64, f64) = (0.5, 2.0);
/// Smallest `sT` accepted for the selective-detection case.
pub const SELECTIVE_MIN_ST: f64 = 10.0;
/// Smallest center-of-mass target, in units of `σ0`, for the selective case.
pub const SELECTIVE_MIN_TARGET_SIGMAS: f64 = 3.0;

const SQM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "symmetric_3_1", alias = "symmetric")]
    SymmetricDetection,
    #[serde(rename = "selective_3_2", alias = "selective")]
    SelectiveDetection,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::SymmetricDetection => "symmetric_3_1",
            Case::SelectiveDetection => "selective_3_2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub case: Case,
    pub params: PhysicalParams,
    pub screen: ScreenConfig,
    pub sampler: SamplerConfig,
    pub integ: IntegratorConfig,
    /// Spreading product `sT`; must agree with the screen distance.
    pub target_st: f64,
}

/// Screen distance that makes the spreading product equal `st`.
pub fn distance_for_spreading(params: &PhysicalParams, st: f64) -> f64 {
    st / params.spreading_rate() * params.ux()
}

impl ScenarioConfig {
    /// Defaults for the symmetric case: `σ0 = 1`, `Y = 0.1`, `k_x = 10`, `sT = 1`.
    pub fn symmetric_default(n_pairs: usize, seed: u64) -> Self {
        let params = PhysicalParams::natural(1.0, 0.1, 10.0);
        Self::with_spreading(Case::SymmetricDetection, params, 1.0, n_pairs, seed, Conditioning::None)
    }

    /// Defaults for the selective case: `sT = 10` and initial center of mass
    /// conditioned to `3 σ0 ± σ0 / 2`.
    pub fn selective_default(n_pairs: usize, seed: u64) -> Self {
        let params = PhysicalParams::natural(1.0, 0.1, 10.0);
        let conditioning = Conditioning::ComOffset {
            target: 3.0,
            width: 1.0,
            opposite_sides: true,
        };
        Self::with_spreading(Case::SelectiveDetection, params, 10.0, n_pairs, seed, conditioning)
    }

    pub fn with_spreading(
        case: Case,
        params: PhysicalParams,
        st: f64,
        n_pairs: usize,
        seed: u64,
        conditioning: Conditioning,
    ) -> Self {
        let d = distance_for_spreading(&params, st);
        Self {
            case,
            params,
            screen: ScreenConfig::centered(&params, d, 0.5 * params.sigma0, 50),
            sampler: SamplerConfig {
                n_pairs,
                seed,
                conditioning,
            },
            integ: IntegratorConfig::default(),
            target_st: st,
        }
    }

    pub fn screen_time(&self) -> f64 {
        self.screen.screen_time(&self.params)
    }

    /// `sT` implied by the screen distance.
    pub fn spreading_product(&self) -> f64 {
        self.params.spreading_rate() * self.screen_time()
    }

    /// Validate the configuration and the invariants of its case.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.screen.validate(&self.params)?;
        self.sampler.validate()?;
        self.integ.validate().map_err(|reason| Error::InvalidParams {
            field: "integrator",
            reason,
        })?;
        let st = self.spreading_product();
        if (st - self.target_st).abs() > 1e-9 * self.target_st.abs().max(1.0) {
            return violated(
                "target_st",
                format!("screen distance gives sT = {st}, configured target_st = {}", self.target_st),
            );
        }
        let p = &self.params;
        match self.case {
            Case::SymmetricDetection => {
                if !(p.slit_offset > 0.0 && p.slit_offset <= SYMMETRIC_MAX_OFFSET_RATIO * p.sigma0) {
                    return violated(
                        "slit_offset",
                        format!("requires 0 < Y <= 0.1 sigma0, got Y = {}, sigma0 = {}", p.slit_offset, p.sigma0),
                    );
                }
                if !(SYMMETRIC_ST_RANGE.0..=SYMMETRIC_ST_RANGE.1).contains(&st) {
                    return violated("target_st", format!("requires 0.5 <= sT <= 2, got {st}"));
                }
                let ratio = p.slit_offset / (2.0 * PI * p.sigma0);
                if ratio > MUCH_LESS_RATIO {
                    return violated("symmetric_detection", format!("Y / (2 pi sigma0) = {ratio} > 0.1"));
                }
            }
            Case::SelectiveDetection => {
                if st < SELECTIVE_MIN_ST {
                    return violated("target_st", format!("requires sT >= 10, got {st}"));
                }
                match self.sampler.conditioning {
                    Conditioning::ComOffset { target, .. } if target >= SELECTIVE_MIN_TARGET_SIGMAS * p.sigma0 => {}
                    Conditioning::ComOffset { target, .. } => {
                        return violated(
                            "conditioning.target",
                            format!("requires a center-of-mass target >= 3 sigma0, got {target}"),
                        )
                    }
                    _ => {
                        return violated(
                            "conditioning",
                            "selective detection requires com_offset conditioning".to_string(),
                        )
                    }
                }
            }
        }
        Ok(())
    }
}

fn violated(constraint: &str, detail: String) -> Result<()> {
    Err(Error::ConstraintViolated {
        constraint: constraint.to_string(),
        detail,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    /// Left-hand side over right-hand side.
    pub margin: f64,
    pub threshold: f64,
    pub satisfied: bool,
    pub relation: String,
}

impl ConstraintCheck {
    fn much_less(name: &str, relation: &str, lhs: f64, rhs: f64) -> Self {
        let margin = lhs / rhs;
        Self {
            name: name.to_string(),
            margin,
            threshold: MUCH_LESS_RATIO,
            satisfied: margin <= MUCH_LESS_RATIO,
            relation: relation.to_string(),
        }
    }
}

/// Center-of-mass spread at the screen for an initial spread of `σ0`.
fn com_spread_at_screen(cfg: &ScenarioConfig) -> f64 {
    let st = cfg.spreading_product();
    cfg.params.sigma0 * (1.0 + st * st).sqrt()
}

/// Predicted length `ħ T ⟨y0⟩ / (m σ0²)` of the detection-free band.
pub fn empty_band_length(params: &PhysicalParams, t: f64, mean_y0: f64) -> f64 {
    params.hbar * t * mean_y0 / (params.mass * params.sigma0 * params.sigma0)
}

/// Evaluate every applicable `≪` constraint with its margin.
pub fn check_constraints(cfg: &ScenarioConfig) -> Vec<ConstraintCheck> {
    let p = &cfg.params;
    let st = cfg.spreading_product();
    let spread = com_spread_at_screen(cfg);
    let mut checks = vec![
        ConstraintCheck::much_less("coincident_slits", "Y << sigma0", p.slit_offset, p.sigma0),
        ConstraintCheck::much_less(
            "symmetric_detection",
            "Y << 2 pi sigma0",
            p.slit_offset,
            2.0 * PI * p.sigma0,
        ),
    ];
    if let Ok(spacing) = fringe_spacing(p, &cfg.screen) {
        checks.push(ConstraintCheck::much_less(
            "com_spread_below_fringe_spacing",
            "delta_y << lambda D / 2Y",
            spread,
            spacing.geometric,
        ));
    }
    match cfg.case {
        Case::SymmetricDetection => checks.push(ConstraintCheck {
            name: "moderate_spreading".into(),
            margin: st,
            threshold: 1.0,
            satisfied: (SYMMETRIC_ST_RANGE.0..=SYMMETRIC_ST_RANGE.1).contains(&st),
            relation: "hbar T / (2 m sigma0^2) ~ 1".into(),
        }),
        Case::SelectiveDetection => {
            checks.push(ConstraintCheck::much_less("strong_spreading", "1 << hbar T / (2 m sigma0^2)", 1.0, st))
        }
    }
    if let Conditioning::ComOffset { target, .. } = cfg.sampler.conditioning {
        checks.push(ConstraintCheck::much_less(
            "equilibrium_offset",
            "sigma0 << <y0>",
            p.sigma0,
            target.abs(),
        ));
        checks.push(ConstraintCheck::much_less(
            "com_spread_below_band",
            "delta_y << L",
            spread,
            empty_band_length(p, cfg.screen_time(), target.abs()),
        ));
    }
    checks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Self {
        let n = edges.len().saturating_sub(1);
        Self {
            edges,
            counts: vec![0; n],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn fill(&mut self, y: f64) {
        let lo = self.edges[0];
        let hi = *self.edges.last().expect("non-empty edges");
        if y < lo {
            self.underflow += 1;
        } else if y >= hi {
            self.overflow += 1;
        } else {
            let n = self.counts.len();
            let i = ((y - lo) / (hi - lo) * n as f64) as usize;
            let mut i = i.min(n - 1);
            // guard against rounding at bin edges
            while i > 0 && y < self.edges[i] {
                i -= 1;
            }
            while i + 1 < n && y >= self.edges[i + 1] {
                i += 1;
            }
            self.counts[i] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalHistograms {
    pub y1: Histogram,
    pub y2: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptyBand {
    /// Largest detection at or below the axis.
    pub lower: f64,
    /// Smallest detection above the axis.
    pub upper: f64,
    pub length_measured: f64,
    pub half_width_measured: f64,
    /// `ħ T ⟨y0⟩ / (m σ0²)` with `⟨y0⟩` the mean initial center of mass of
    /// the reported pairs.
    pub l_predicted: f64,
    /// The same with `⟨y0⟩` set to the configured conditioning target.
    pub l_predicted_target: Option<f64>,
    pub mean_initial_com: f64,
}

/// The two readings of `|psi|^2` under selective detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectiveSqm {
    /// Joint detection probability restricted to opposite-side outcomes and
    /// renormalized: probability that at least one particle of a pair lands
    /// inside the measured band.
    pub restricted_band_probability: f64,
    /// Mass of the opposite-side outcomes before renormalization.
    pub opposite_side_mass: f64,
    /// The alternative in which `|psi|^2` makes no statement about the
    /// selected subensemble.
    pub no_prediction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub case: Case,
    pub n_requested: usize,
    /// Pairs entering the statistics below.
    pub n_completed: usize,
    pub counts: EnsembleCounts,
    pub n_rejected_condition: usize,
    pub rejection_fraction: f64,
    pub sampler_acceptance_rate: f64,
    pub screen_time: f64,
    pub spreading_product: f64,
    pub fringe_spacing: Option<f64>,
    pub marginal_histograms: MarginalHistograms,
    pub com_histogram: Histogram,
    /// `|psi(T)|^2` marginal mass in each histogram bin.
    pub sqm_marginal: Vec<f64>,
    /// Mean `|y1 + y2|` at the screen in units of the fringe spacing.
    pub symmetry_metric: Option<f64>,
    pub empty_band: EmptyBand,
    /// `1 - Σ_j P12(jΔ, -(j+1)Δ)`: probability of non-mirror detector cells.
    pub sqm_asymmetric_probability: f64,
    /// Fraction of reported pairs in non-mirror detector cells.
    pub bqm_asymmetric_fraction: f64,
    /// `|psi(T)|^2` mass with `|y1 + y2|` above half the fringe spacing.
    pub sqm_fringe_band_probability: Option<f64>,
    pub bqm_fringe_band_fraction: Option<f64>,
    pub sqm_selective: Option<SelectiveSqm>,
    pub axis_crossings: u64,
    pub constraint_checks: Vec<ConstraintCheck>,
    pub notes: Vec<String>,
}

/// A report together with the trajectories it was computed from.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: EnsembleReport,
    /// All sampled pairs, with recorded paths when a stride was requested.
    pub trajectories: Vec<Trajectory>,
}

/// Run the experiment selected by `cfg.case`, recording every
/// `record_stride`-th accepted step when given.
pub fn run_scenario(cfg: &ScenarioConfig, record_stride: Option<usize>) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    match cfg.case {
        Case::SymmetricDetection => symmetric(cfg, record_stride),
        Case::SelectiveDetection => {
            let mut outcome = selective(cfg, cfg.sampler.conditioning, record_stride)?;
            outcome.report.notes.push(
                "reproduces a contested prediction: the band follows from post-selecting the initial center of mass, which |psi|^2 alone cannot express"
                    .into(),
            );
            Ok(outcome)
        }
    }
}

/// Run the symmetric-detection experiment.
pub fn run_symmetric_case(cfg: &ScenarioConfig) -> Result<EnsembleReport> {
    expect_case(cfg, Case::SymmetricDetection)?;
    run_scenario(cfg, None).map(|o| o.report)
}

/// Run the selective-detection experiment.
pub fn run_selective_case(cfg: &ScenarioConfig) -> Result<EnsembleReport> {
    expect_case(cfg, Case::SelectiveDetection)?;
    run_scenario(cfg, None).map(|o| o.report)
}

/// The selective-detection protocol with the center-of-mass target moved to
/// the axis. No band beyond the immediate neighbourhood of `y = 0` is expected.
pub fn run_selective_control(cfg: &ScenarioConfig) -> Result<EnsembleReport> {
    let width = match cfg.sampler.conditioning {
        Conditioning::ComOffset { width, .. } => width,
        _ => cfg.params.sigma0,
    };
    let conditioning = Conditioning::ComOffset {
        target: 0.0,
        width,
        opposite_sides: true,
    };
    let mut control = *cfg;
    control.case = Case::SelectiveDetection;
    control.sampler.conditioning = conditioning;
    control.params.validate()?;
    control.screen.validate(&control.params)?;
    control.sampler.validate()?;
    let mut outcome = selective(&control, conditioning, None)?;
    outcome.report.notes.push("zero-offset control".into());
    Ok(outcome.report)
}

fn expect_case(cfg: &ScenarioConfig, case: Case) -> Result<()> {
    if cfg.case == case {
        Ok(())
    } else {
        violated("case", format!("expected {}, got {}", case.name(), cfg.case.name()))
    }
}

fn symmetric(cfg: &ScenarioConfig, record_stride: Option<usize>) -> Result<ScenarioOutcome> {
    let run = run_ensemble(&cfg.params, &cfg.sampler, &cfg.integ, cfg.screen_time(), record_stride)?;
    let pairs: Vec<&Trajectory> = run.completed().collect();
    let mut report = assemble(cfg, &pairs, run.counts, run.acceptance_rate(), 0);
    report.notes.push(
        "asymmetric probabilities use detector cells of size bin_delta; the fringe-band quantities use half the fringe spacing"
            .into(),
    );
    report.notes.push(
        "symmetry_metric and sqm_asymmetric_probability are different statistics; compare bqm_asymmetric_fraction with sqm_asymmetric_probability for a like-for-like reading"
            .into(),
    );
    Ok(ScenarioOutcome {
        report,
        trajectories: run.trajectories,
    })
}

fn selective(cfg: &ScenarioConfig, conditioning: Conditioning, record_stride: Option<usize>) -> Result<ScenarioOutcome> {
    // Only opposite-side detections are recorded. No trajectory crosses the
    // axis, so sampling is restricted to opposite-side starts up front and
    // the terminal filter below only confirms it.
    let conditioning = match conditioning {
        Conditioning::ComOffset { target, width, .. } => Conditioning::ComOffset {
            target,
            width,
            opposite_sides: true,
        },
        other => other,
    };
    let sampler = SamplerConfig {
        conditioning,
        ..cfg.sampler
    };
    let mut run = run_ensemble(&cfg.params, &sampler, &cfg.integ, cfg.screen_time(), record_stride)?;
    let mut rejected_condition = 0;
    for t in run.trajectories.iter_mut() {
        if t.is_completed() && !t.terminal.is_opposite() {
            t.status = TrajectoryStatus::RejectedCondition;
            rejected_condition += 1;
        }
    }
    let pairs: Vec<&Trajectory> = run.completed().collect();
    let mut cfg = *cfg;
    cfg.sampler = sampler;
    let mut report = assemble(&cfg, &pairs, run.counts, run.acceptance_rate(), rejected_condition);
    report.sqm_selective = Some(selective_sqm(&cfg, &report.empty_band));
    Ok(ScenarioOutcome {
        report,
        trajectories: run.trajectories,
    })
}

/// `|psi(T)|^2` restricted to opposite-side outcomes, evaluated on `band`.
pub fn selective_sqm(cfg: &ScenarioConfig, band: &EmptyBand) -> SelectiveSqm {
    let p = &cfg.params;
    let t = cfg.screen_time();
    let r = density_support(p, t);
    let rect = |a: (f64, f64), b: (f64, f64)| probability_in_rectangle(p, t, a, b, SQM_TOLERANCE);
    let opposite = rect((0.0, r), (-r, 0.0)) + rect((-r, 0.0), (0.0, r));
    let (lo, hi) = (band.lower.min(0.0), band.upper.max(0.0));
    let miss = rect((hi, r), (-r, lo)) + rect((-r, lo), (hi, r));
    SelectiveSqm {
        restricted_band_probability: (1.0 - miss / opposite).clamp(0.0, 1.0),
        opposite_side_mass: opposite,
        no_prediction: true,
    }
}

fn assemble(
    cfg: &ScenarioConfig,
    pairs: &[&Trajectory],
    counts: EnsembleCounts,
    acceptance: f64,
    rejected_condition: usize,
) -> EnsembleReport {
    let p = &cfg.params;
    let t = cfg.screen_time();
    let edges = cfg.screen.edges();
    let terminals: Vec<PairState> = pairs.iter().map(|tr| tr.terminal).collect();
    let n = terminals.len();

    let mut h1 = Histogram::new(edges.clone());
    let mut h2 = Histogram::new(edges.clone());
    let mut hc = Histogram::new(edges.clone());
    for s in &terminals {
        h1.fill(s.y1);
        h2.fill(s.y2);
        hc.fill(s.com());
    }

    let spacing = fringe_spacing(p, &cfg.screen).ok().map(|f| f.geometric);
    let mean = |f: &dyn Fn(&PairState) -> f64| {
        if n == 0 {
            0.0
        } else {
            terminals.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let symmetry_metric = spacing.map(|d| mean(&|s: &PairState| (s.y1 + s.y2).abs()) / d);

    let delta = cfg.screen.bin_delta;
    let mirror = terminals
        .iter()
        .filter(|s| (s.y2 / delta).floor() as i64 == -((s.y1 / delta).floor() as i64) - 1)
        .count();
    let bqm_asymmetric_fraction = if n == 0 { 0.0 } else { 1.0 - mirror as f64 / n as f64 };
    let bqm_fringe_band_fraction = spacing.map(|d| {
        let off = terminals.iter().filter(|s| (s.y1 + s.y2).abs() > 0.5 * d).count();
        off as f64 / n.max(1) as f64
    });

    let mean_initial_com = if n == 0 {
        0.0
    } else {
        pairs.iter().map(|tr| tr.initial.com()).sum::<f64>() / n as f64
    };
    let lower = terminals
        .iter()
        .flat_map(|s| [s.y1, s.y2])
        .filter(|&y| y <= 0.0)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(cfg.screen.y_min.min(0.0));
    let upper = terminals
        .iter()
        .flat_map(|s| [s.y1, s.y2])
        .filter(|&y| y > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(cfg.screen.y_max.max(0.0));
    let length = upper - lower;
    let target = match cfg.sampler.conditioning {
        Conditioning::ComOffset { target, .. } => Some(target),
        _ => None,
    };
    let empty_band = EmptyBand {
        lower,
        upper,
        length_measured: length,
        half_width_measured: 0.5 * length,
        l_predicted: empty_band_length(p, t, mean_initial_com),
        l_predicted_target: target.map(|y0| empty_band_length(p, t, y0)),
        mean_initial_com,
    };

    EnsembleReport {
        case: cfg.case,
        n_requested: cfg.sampler.n_pairs,
        n_completed: n,
        counts,
        n_rejected_condition: rejected_condition,
        rejection_fraction: counts.rejection_fraction(),
        sampler_acceptance_rate: acceptance,
        screen_time: t,
        spreading_product: cfg.spreading_product(),
        fringe_spacing: spacing,
        marginal_histograms: MarginalHistograms { y1: h1, y2: h2 },
        com_histogram: hc,
        sqm_marginal: marginal_bin_masses(p, t, &edges),
        symmetry_metric,
        empty_band,
        sqm_asymmetric_probability: mirror_asymmetric_probability(p, &cfg.screen),
        bqm_asymmetric_fraction,
        sqm_fringe_band_probability: spacing.map(|d| off_band_probability(p, t, 0.5 * d)),
        bqm_fringe_band_fraction,
        sqm_selective: None,
        axis_crossings: pairs.iter().map(|tr| u64::from(tr.axis_crossings)).sum(),
        constraint_checks: check_constraints(cfg),
        notes: Vec::new(),
    }
}
