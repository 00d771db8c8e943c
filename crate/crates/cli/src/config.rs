//! Command-line configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shocklab::harness::{Experiment, Observable};
use shocklab::limit::KernelShift;
use shocklab::scaling::{ScalingFrame, ThresholdConvention, TildeConvention};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "shocklab", version, about = "TASEP shock fluctuation experiments")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Monte Carlo replicas of one observable; writes records, ECDF and manifest.
    Simulate(SimulateArgs),
    /// Exact `P(X_t(n) > a)` over a threshold grid for a finite initial condition.
    Exact(ExactArgs),
    /// Tabulates the stationary limit law `F_w`.
    Limit(LimitArgs),
    /// Acceptance checks, or one simulated observable against its limit law.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableKind {
    /// Height at the shock location, shifted by the initial fluctuations.
    Height,
    /// Label of the particle at the shock location.
    Particle,
    /// Position of the second-class particle.
    SecondClass,
    /// Particle position under stationary Bernoulli data.
    Stationary,
}

impl ObservableKind {
    pub fn observable(self) -> Observable {
        match self {
            ObservableKind::Height => Observable::HeightAtShock,
            ObservableKind::Particle => Observable::ParticleEvent,
            ObservableKind::SecondClass => Observable::SecondClassPosition,
            ObservableKind::Stationary => Observable::StationaryHeight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct FrameArgs {
    /// Left density.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_minus: Option<f64>,
    /// Right density.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_plus: Option<f64>,
    /// Density of the stationary observable.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Time scale eps^{-3/2}.
    #[arg(long = "time", visible_alias = "t", allow_hyphen_values = true)]
    pub time: Option<f64>,
    /// Macroscopic time.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t_kpz: f64,
    /// Macroscopic position offset.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x_kpz: f64,
    /// Fluctuation level.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s_kpz: f64,
    /// Rescaling of the limit-law arguments.
    #[arg(long, default_value_t = TildeConvention::Plain)]
    pub convention: TildeConvention,
}

impl FrameArgs {
    pub fn frame(&self, kind: ObservableKind) -> Result<ScalingFrame, CliError> {
        let time = self.time.ok_or_else(|| CliError::usage("--time is required"))?;
        let mut frame = if kind == ObservableKind::Stationary {
            let rho = self.rho.ok_or_else(|| CliError::usage("--rho is required for the stationary observable"))?;
            let mut f = ScalingFrame::stationary(rho, time)?;
            f.t = self.t_kpz;
            f.x = self.x_kpz;
            f.s = self.s_kpz;
            f
        } else {
            let rm = self.rho_minus.ok_or_else(|| CliError::usage("--rho-minus is required"))?;
            let rp = self.rho_plus.ok_or_else(|| CliError::usage("--rho-plus is required"))?;
            if rm >= rp {
                return Err(CliError::usage(format!("--rho-minus ({rm}) must be below --rho-plus ({rp})")));
            }
            ScalingFrame::with_time_scale(rm, rp, time, self.t_kpz, self.x_kpz, self.s_kpz)?
        };
        frame.convention = self.convention;
        frame.validate()?;
        Ok(frame)
    }

    fn push_args(&self, out: &mut Vec<String>) {
        for (flag, v) in
            [("--rho-minus", self.rho_minus), ("--rho-plus", self.rho_plus), ("--rho", self.rho), ("--time", self.time)]
        {
            if let Some(v) = v {
                out.extend([flag.to_string(), v.to_string()]);
            }
        }
        out.extend([
            "--t-kpz".into(),
            self.t_kpz.to_string(),
            "--x-kpz".into(),
            self.x_kpz.to_string(),
            "--s-kpz".into(),
            self.s_kpz.to_string(),
            "--convention".into(),
            self.convention.to_string(),
        ]);
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long, value_enum, default_value_t = ObservableKind::Height)]
    pub observable: ObservableKind,
    /// Number of replicas (at least 1).
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl RunArgs {
    pub fn experiment(&self, output: PathBuf, workers: usize, verbose: bool) -> Result<Experiment, CliError> {
        let replicas = self.replicas.ok_or_else(|| CliError::usage("--replicas is required"))?;
        if replicas == 0 {
            return Err(CliError::usage("--replicas must be at least 1"));
        }
        let exp = Experiment {
            frame: self.frame.frame(self.observable)?,
            observable: self.observable.observable(),
            replicas,
            master_seed: self.seed,
            workers,
            output,
            verbose,
        };
        exp.validate()?;
        Ok(exp)
    }

    fn push_args(&self, out: &mut Vec<String>) {
        self.frame.push_args(out);
        if let Some(r) = self.replicas {
            out.extend(["--replicas".into(), r.to_string()]);
        }
        out.extend([
            "--observable".into(),
            self.observable.to_possible_value().expect("no skipped variants").get_name().into(),
            "--seed".into(),
            self.seed.to_string(),
        ]);
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Replay the run described by an existing manifest instead.
    #[arg(long, conflicts_with_all = ["rho_minus", "rho_plus", "rho", "replicas"])]
    pub from_manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Thread cap; does not change any output.
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ExactArgs {
    /// Initial positions, strictly decreasing, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub positions: Vec<i64>,
    #[arg(long = "time", visible_alias = "t")]
    pub time: f64,
    /// Walk parameter of the kernel; the probabilities do not depend on it.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Lowest threshold; defaults to one below the last particle.
    #[arg(long, allow_hyphen_values = true)]
    pub a_min: Option<i64>,
    /// Highest threshold; defaults to the light cone of the first particle.
    #[arg(long, allow_hyphen_values = true)]
    pub a_max: Option<i64>,
    /// Largest acceptable error estimate before the run is flagged.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct LimitArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub w: f64,
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    /// Quadrature order M (values are reported at 2M).
    #[arg(long, default_value_t = 40)]
    pub order: usize,
    /// Finite-difference step of the derivative.
    #[arg(long, default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, default_value_t = KernelShift::Quadratic)]
    pub shift: KernelShift,
    /// Largest acceptable error estimate before the table is flagged.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    /// Acceptance criteria to check (all when no run is given).
    #[arg(long, value_delimiter = ',', conflicts_with = "replicas")]
    pub criteria: Vec<u8>,
    /// Directory of cached acceptance runs.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Largest KS distance accepted for a single run.
    #[arg(long, default_value_t = 0.05)]
    pub ks_max: f64,
    /// Target of the height observable.
    #[arg(long, value_enum, default_value_t = HeightTarget::Fw)]
    pub target: HeightTarget,
    #[arg(long, default_value_t = ThresholdConvention::Single)]
    pub threshold: ThresholdConvention,
    /// Output directory for run artifacts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeightTarget {
    /// Product of two Gaussians (unshifted height at the Gaussian scale).
    Gaussian,
    /// Product of two `F_w` (height shifted by the initial fluctuations).
    Fw,
}

impl RunConfig {
    /// Argument vector that parses back to this configuration.
    pub fn echo(&self) -> Vec<String> {
        let mut a = vec!["shocklab".to_string()];
        let path = |p: &PathBuf| p.display().to_string();
        match &self.command {
            Command::Simulate(s) => {
                a.push("simulate".into());
                s.run.push_args(&mut a);
                if let Some(m) = &s.from_manifest {
                    a.extend(["--from-manifest".into(), path(m)]);
                }
                a.extend(["--out".into(), path(&s.out), "--workers".into(), s.workers.to_string()]);
                if s.verbose {
                    a.push("--verbose".into());
                }
            }
            Command::Exact(e) => {
                a.push("exact".into());
                let pos: Vec<String> = e.positions.iter().map(|p| p.to_string()).collect();
                a.extend(["--positions".into(), pos.join(","), "--time".into(), e.time.to_string()]);
                a.extend(["--rho".into(), e.rho.to_string()]);
                for (flag, v) in [("--a-min", e.a_min), ("--a-max", e.a_max)] {
                    if let Some(v) = v {
                        a.extend([flag.into(), v.to_string()]);
                    }
                }
                a.extend(["--tolerance".into(), e.tolerance.to_string(), "--out".into(), path(&e.out)]);
            }
            Command::Limit(l) => {
                a.push("limit".into());
                for (flag, v) in [("--w", l.w), ("--s-min", l.s_min), ("--s-max", l.s_max), ("--step", l.step)] {
                    a.extend([flag.into(), v.to_string()]);
                }
                a.extend(["--order".into(), l.order.to_string(), "--delta".into(), l.delta.to_string()]);
                a.extend(["--shift".into(), l.shift.to_string(), "--tolerance".into(), l.tolerance.to_string()]);
                a.extend(["--out".into(), path(&l.out)]);
            }
            Command::Verify(v) => {
                a.push("verify".into());
                if !v.criteria.is_empty() {
                    let c: Vec<String> = v.criteria.iter().map(|c| c.to_string()).collect();
                    a.extend(["--criteria".into(), c.join(",")]);
                }
                if let Some(c) = &v.cache {
                    a.extend(["--cache".into(), path(c)]);
                }
                v.run.push_args(&mut a);
                a.extend(["--ks-max".into(), v.ks_max.to_string()]);
                a.extend([
                    "--target".into(),
                    v.target.to_possible_value().expect("no skipped variants").get_name().into(),
                ]);
                a.extend(["--threshold".into(), v.threshold.to_string()]);
                if let Some(o) = &v.out {
                    a.extend(["--out".into(), path(o)]);
                }
                a.extend(["--workers".into(), v.workers.to_string()]);
            }
        }
        a
    }
}
