//! Quantum-equilibrium sampling of initial pair positions and integration of
//! the Bohmian trajectories up to the screen.
//!
//! The pair wave function factorizes, so at `t = 0` each coordinate is drawn
//! independently from the one-particle density `|psi_A + psi_B|^2`. Each pair
//! owns an RNG stream derived from `(seed, pair index)`, which makes every
//! result independent of how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::{velocity_with, PairState};
use crate::integrate::{integrate, Failure, IntegratorConfig};
use crate::model::{PacketsAt, PhysicalParams};
use crate::sampling::{TabulatedDistribution, DEFAULT_TABLE_POINTS};

/// Smallest acceptable fraction of accepted proposals under conditioning.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-4;

/// Half-extent of the sampling window in units of `sigma0`, beyond the slit
/// offset. The density there is below `exp(-72)` of its peak.
const SUPPORT_SIGMAS: f64 = 12.0;

const PILOT_PROPOSALS: u64 = 200_000;
const MAX_PROPOSALS_PER_PAIR: u64 = 10_000_000;

/// Restriction of the equilibrium ensemble to a subensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Conditioning {
    None,
    /// Keep pairs with the two particles on opposite sides of the axis.
    OppositeSlits,
    /// Keep pairs whose initial center of mass lies within
    /// `target ± width / 2`, optionally also requiring opposite sides.
    ComOffset {
        target: f64,
        width: f64,
        #[serde(default)]
        opposite_sides: bool,
    },
}

impl Conditioning {
    fn window(&self) -> Option<(f64, f64)> {
        match *self {
            Conditioning::ComOffset { target, width, .. } => Some((target - 0.5 * width, target + 0.5 * width)),
            _ => None,
        }
    }

    fn opposite(&self) -> bool {
        match *self {
            Conditioning::None => false,
            Conditioning::OppositeSlits => true,
            Conditioning::ComOffset { opposite_sides, .. } => opposite_sides,
        }
    }

    pub fn accepts(&self, state: &PairState) -> bool {
        if self.opposite() && !state.is_opposite() {
            return false;
        }
        match self.window() {
            Some((lo, hi)) => (lo..=hi).contains(&state.com()),
            None => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub n_pairs: usize,
    pub seed: u64,
    pub conditioning: Conditioning,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::InvalidParams {
                field: "n_pairs",
                reason: "must be >= 1".into(),
            });
        }
        if let Conditioning::ComOffset { target, width, .. } = self.conditioning {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidParams {
                    field: "conditioning.width",
                    reason: "must be > 0".into(),
                });
            }
            if !target.is_finite() {
                return Err(Error::InvalidParams {
                    field: "conditioning.target",
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }
}

/// Unnormalized one-particle density `|psi_A + psi_B|^2` at `t = 0`.
pub fn one_particle_density(params: &PhysicalParams, y: f64) -> f64 {
    PacketsAt::new(params, 0.0).superposition(0.0, y).norm_sqr()
}

/// Half-width of the window the sampler tabulates.
pub fn sampling_support(params: &PhysicalParams) -> f64 {
    params.slit_offset + SUPPORT_SIGMAS * params.sigma0
}

enum Proposal {
    /// Both coordinates from the full table.
    Independent(TabulatedDistribution),
    /// One coordinate from `positive`, the other from `negative`, in random order.
    OppositeSides {
        positive: TabulatedDistribution,
        negative: TabulatedDistribution,
    },
}

/// Draws initial pair positions from the (possibly conditioned) equilibrium
/// distribution.
///
/// Proposals come from the product of one-particle densities truncated to a
/// box that contains the conditioning region; since the target is the same
/// product restricted to the region, accepting exactly the proposals inside
/// it is unbiased.
pub struct InitialSampler {
    proposal: Proposal,
    conditioning: Conditioning,
}

impl InitialSampler {
    pub fn new(params: &PhysicalParams, conditioning: Conditioning) -> Result<Self> {
        params.validate()?;
        let packets = PacketsAt::new(params, 0.0);
        let density = |y: f64| packets.superposition(0.0, y).norm_sqr();
        let r = sampling_support(params);
        let starved = || Error::ConditioningStarved {
            rate: 0.0,
            minimum: MIN_ACCEPTANCE_RATE,
        };
        let proposal = if conditioning.opposite() {
            let (pos, neg) = match conditioning.window() {
                Some((lo, hi)) => (
                    ((2.0 * lo).max(0.0), r.min(2.0 * hi + r)),
                    ((2.0 * lo - r).max(-r), (2.0 * hi).min(0.0)),
                ),
                None => ((0.0, r), (-r, 0.0)),
            };
            Proposal::OppositeSides {
                positive: TabulatedDistribution::new(density, pos.0, pos.1, DEFAULT_TABLE_POINTS).ok_or_else(starved)?,
                negative: TabulatedDistribution::new(density, neg.0, neg.1, DEFAULT_TABLE_POINTS).ok_or_else(starved)?,
            }
        } else {
            Proposal::Independent(
                TabulatedDistribution::new(density, -r, r, DEFAULT_TABLE_POINTS).ok_or_else(starved)?,
            )
        };
        Ok(Self { proposal, conditioning })
    }

    fn propose<R: Rng>(&self, rng: &mut R) -> PairState {
        match &self.proposal {
            Proposal::Independent(table) => {
                let y1 = table.quantile(rng.gen::<f64>());
                let y2 = table.quantile(rng.gen::<f64>());
                PairState::new(y1, y2, 0.0)
            }
            Proposal::OppositeSides { positive, negative } => {
                let up = positive.quantile(rng.gen::<f64>());
                let down = negative.quantile(rng.gen::<f64>());
                if rng.gen::<bool>() {
                    PairState::new(up, down, 0.0)
                } else {
                    PairState::new(down, up, 0.0)
                }
            }
        }
    }

    /// Draw one accepted pair, returning it with the number of proposals used.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Result<(PairState, u64)> {
        for n in 1..=MAX_PROPOSALS_PER_PAIR {
            let state = self.propose(rng);
            if self.conditioning.accepts(&state) {
                return Ok((state, n));
            }
        }
        Err(Error::ConditioningStarved {
            rate: 1.0 / MAX_PROPOSALS_PER_PAIR as f64,
            minimum: MIN_ACCEPTANCE_RATE,
        })
    }

    /// Acceptance rate over a fixed number of proposals.
    fn pilot_rate(&self, seed: u64) -> f64 {
        let mut rng = pair_rng(seed, u64::MAX);
        let accepted = (0..PILOT_PROPOSALS)
            .filter(|_| self.conditioning.accepts(&self.propose(&mut rng)))
            .count();
        accepted as f64 / PILOT_PROPOSALS as f64
    }
}

/// RNG stream for one pair.
pub fn pair_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialPositions {
    pub states: Vec<PairState>,
    pub proposals: u64,
}

impl InitialPositions {
    pub fn acceptance_rate(&self) -> f64 {
        self.states.len() as f64 / self.proposals.max(1) as f64
    }
}

/// Initial pair positions drawn from `|psi(t = 0)|^2` and filtered by the
/// sampler's conditioning.
pub fn sample_initial_positions(params: &PhysicalParams, sampler: &SamplerConfig) -> Result<InitialPositions> {
    sampler.validate()?;
    let initial = InitialSampler::new(params, sampler.conditioning)?;
    if sampler.conditioning.window().is_some() {
        let rate = initial.pilot_rate(sampler.seed);
        if rate < MIN_ACCEPTANCE_RATE {
            return Err(Error::ConditioningStarved {
                rate,
                minimum: MIN_ACCEPTANCE_RATE,
            });
        }
    }
    let draws = (0..sampler.n_pairs)
        .into_par_iter()
        .map(|i| initial.draw(&mut pair_rng(sampler.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let proposals = draws.iter().map(|(_, n)| n).sum();
    let states = draws.into_iter().map(|(s, _)| s).collect();
    let out = InitialPositions { states, proposals };
    if out.acceptance_rate() < MIN_ACCEPTANCE_RATE {
        return Err(Error::ConditioningStarved {
            rate: out.acceptance_rate(),
            minimum: MIN_ACCEPTANCE_RATE,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    RejectedNode,
    RejectedStepBudget,
    RejectedCondition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: PairState,
    /// Recorded path, including the initial and last states; empty when not
    /// recording.
    pub samples: Vec<PairState>,
    /// State at the screen for completed trajectories, otherwise the last
    /// accepted state.
    pub terminal: PairState,
    pub status: TrajectoryStatus,
    /// Number of sign changes of `y1` plus those of `y2` between accepted steps.
    pub axis_crossings: u32,
}

impl Trajectory {
    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }
}

/// Integrate one pair to `t_end` without recording intermediate states.
pub fn integrate_trajectory(
    params: &PhysicalParams,
    initial: PairState,
    t_end: f64,
    integ: &IntegratorConfig,
) -> Trajectory {
    integrate_trajectory_recorded(params, initial, t_end, integ, None)
}

/// Integrate one pair to `t_end`, recording every `stride`-th accepted step.
pub fn integrate_trajectory_recorded(
    params: &PhysicalParams,
    initial: PairState,
    t_end: f64,
    integ: &IntegratorConfig,
    stride: Option<usize>,
) -> Trajectory {
    let rhs = |t: f64, y: &[f64; 2]| {
        let packets = PacketsAt::new(params, t);
        velocity_with(params, &packets, &PairState::new(y[0], y[1], t)).map(|v| [v.v1, v.v2])
    };
    let mut samples = Vec::new();
    if stride.is_some() {
        samples.push(initial);
    }
    let mut last = initial;
    let mut crossings = 0u32;
    let mut step = 0usize;
    let result = integrate(rhs, initial.t, [initial.y1, initial.y2], t_end, integ, |t, y| {
        let next = PairState::new(y[0], y[1], t);
        crossings += u32::from(last.y1 * next.y1 < 0.0) + u32::from(last.y2 * next.y2 < 0.0);
        last = next;
        step += 1;
        if let Some(k) = stride {
            if step.is_multiple_of(k.max(1)) || t == t_end {
                samples.push(next);
            }
        }
    });
    let status = match result {
        Ok(_) => TrajectoryStatus::Completed,
        Err(Failure::Rhs(_)) => TrajectoryStatus::RejectedNode,
        Err(Failure::StepBudget) => TrajectoryStatus::RejectedStepBudget,
    };
    if let Some(final_sample) = samples.last() {
        if *final_sample != last {
            samples.push(last);
        }
    }
    Trajectory {
        initial,
        samples,
        terminal: last,
        status,
        axis_crossings: crossings,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleCounts {
    pub completed: usize,
    pub rejected_node: usize,
    pub rejected_step_budget: usize,
}

impl EnsembleCounts {
    pub fn total(&self) -> usize {
        self.completed + self.rejected_node + self.rejected_step_budget
    }

    /// Fraction of integrated trajectories that did not reach the screen.
    pub fn rejection_fraction(&self) -> f64 {
        (self.rejected_node + self.rejected_step_budget) as f64 / self.total().max(1) as f64
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub trajectories: Vec<Trajectory>,
    pub counts: EnsembleCounts,
    pub proposals: u64,
}

impl EnsembleRun {
    pub fn acceptance_rate(&self) -> f64 {
        self.trajectories.len() as f64 / self.proposals.max(1) as f64
    }

    pub fn completed(&self) -> impl Iterator<Item = &Trajectory> {
        self.trajectories.iter().filter(|t| t.is_completed())
    }

    pub fn axis_crossings(&self) -> u64 {
        self.completed().map(|t| u64::from(t.axis_crossings)).sum()
    }
}

/// Sample and integrate a full ensemble to the screen time `t_end`.
pub fn run_ensemble(
    params: &PhysicalParams,
    sampler: &SamplerConfig,
    integ: &IntegratorConfig,
    t_end: f64,
    record_stride: Option<usize>,
) -> Result<EnsembleRun> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParams {
            field: "screen_time",
            reason: "must be > 0".into(),
        });
    }
    integ.validate().map_err(|reason| Error::InvalidParams {
        field: "integrator",
        reason,
    })?;
    let initial = sample_initial_positions(params, sampler)?;
    let trajectories: Vec<Trajectory> = initial
        .states
        .par_iter()
        .map(|s| integrate_trajectory_recorded(params, *s, t_end, integ, record_stride))
        .collect();
    let mut counts = EnsembleCounts::default();
    for t in &trajectories {
        match t.status {
            TrajectoryStatus::Completed => counts.completed += 1,
            TrajectoryStatus::RejectedNode => counts.rejected_node += 1,
            TrajectoryStatus::RejectedStepBudget => counts.rejected_step_budget += 1,
            TrajectoryStatus::RejectedCondition => {}
        }
    }
    Ok(EnsembleRun {
        trajectories,
        counts,
        proposals: initial.proposals,
    })
}
