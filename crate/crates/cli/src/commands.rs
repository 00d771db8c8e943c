use std::fs;
use std::io::Write;
use std::path::Path;

use shocklab::exact::{fredholm_prob, WalkKernelContext};
use shocklab::harness::{
    difference_cdf, ks_compare, product_gaussian_cdf, run_experiment, scalar, suite, EmpiricalCdf, Experiment,
    KsResult, Observable, ProductFw,
};
use shocklab::limit::{second_class_limit, DistributionTable, StationaryParams};

use crate::config::{Command, ExactArgs, HeightTarget, LimitArgs, RunConfig, SimulateArgs, VerifyArgs};
use crate::error::CliError;

const MANIFEST: &str = "manifest.txt";
const FORMAT_VERSION: u32 = 1;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match &cfg.command {
        Command::Simulate(a) => simulate(a),
        Command::Exact(a) => exact(cfg, a),
        Command::Limit(a) => limit(cfg, a),
        Command::Verify(a) => verify(cfg, a),
    }
}

/// Replay manifest of a command that has no experiment manifest of its own.
fn write_manifest(dir: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let text = format!("format_version = {FORMAT_VERSION}\nargv = {}\n", cfg.echo()[1..].join(" "));
    fs::write(dir.join(MANIFEST), text)?;
    Ok(())
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let exp = match &a.from_manifest {
        Some(m) => Experiment::from_manifest(m, a.out.clone(), a.workers)?,
        None => a.run.experiment(a.out.clone(), a.workers, a.verbose)?,
    };
    let out = run_experiment(&exp)?;
    println!(
        "{}: {} replicas ({} new) in {}; primary scalar mean {:.4}, variance {:.4}",
        exp.observable.name(),
        exp.replicas,
        out.fresh,
        exp.output.display(),
        out.ecdf.mean(),
        out.ecdf.variance()
    );
    Ok(())
}

fn exact(cfg: &RunConfig, a: &ExactArgs) -> Result<(), CliError> {
    let ctx = WalkKernelContext::new(a.rho, a.time, a.positions.clone())?;
    let n = a.positions.len();
    let lo = a.a_min.unwrap_or(a.positions[n - 1] - 1);
    let hi = a.a_max.unwrap_or(a.positions[0] + (a.time + 10.0 * a.time.sqrt() + 10.0).ceil() as i64);
    if lo > hi {
        return Err(CliError::usage(format!("--a-min {lo} exceeds --a-max {hi}")));
    }
    fs::create_dir_all(&a.out)?;
    let mut w = std::io::BufWriter::new(fs::File::create(a.out.join("exact.csv"))?);
    writeln!(w, "a,probability,raw,error_estimate")?;
    let mut worst = 0.0f64;
    for th in lo..=hi {
        let r = fredholm_prob(&ctx, th)?;
        worst = worst.max(r.error_estimate);
        writeln!(w, "{th},{},{},{}", r.probability, r.raw, r.error_estimate)?;
    }
    w.flush()?;
    write_manifest(&a.out, cfg)?;
    println!("P(X_t({n}) > a) for a in [{lo}, {hi}] written to {}", a.out.display());
    if worst > a.tolerance {
        return Err(CliError::Numerical(format!("error estimate {worst:.2e} exceeds {:.2e}", a.tolerance)));
    }
    Ok(())
}

fn limit(cfg: &RunConfig, a: &LimitArgs) -> Result<(), CliError> {
    let params = StationaryParams { order: a.order, delta: a.delta, shift: a.shift, tolerance: a.tolerance };
    let tab = DistributionTable::tabulate(a.w, a.s_min, a.s_max, a.step, &params)?;
    fs::create_dir_all(&a.out)?;
    tab.save(&a.out.join("f_w.csv"))?;
    write_manifest(&a.out, cfg)?;
    println!("F_{} on [{}, {}] ({} points) written to {}", a.w, a.s_min, a.s_max, tab.len(), a.out.display());
    if let Err(e) = tab.validate() {
        return Err(CliError::Numerical(e.to_string()));
    }
    if tab.max_error() > a.tolerance {
        return Err(CliError::Numerical(format!("error estimate {:.2e} exceeds {:.2e}", tab.max_error(), a.tolerance)));
    }
    Ok(())
}

fn verify(cfg: &RunConfig, a: &VerifyArgs) -> Result<(), CliError> {
    if a.run.replicas.is_some() {
        verify_run(cfg, a)
    } else {
        verify_criteria(a)
    }
}

fn verify_criteria(a: &VerifyArgs) -> Result<(), CliError> {
    let cache = a.cache.clone().unwrap_or_else(suite::default_cache);
    let ids: Vec<u8> = if a.criteria.is_empty() { suite::CRITERIA.to_vec() } else { a.criteria.clone() };
    let (mut failed, mut flagged) = (Vec::new(), Vec::new());
    let mut report = String::new();
    for id in ids {
        let line = match suite::check(id, &cache) {
            Ok(v) => {
                if !v.passed {
                    failed.push(id);
                }
                v.to_string()
            }
            Err(e) => match CliError::from(e) {
                CliError::Numerical(m) => {
                    flagged.push(id);
                    format!("criterion {id} [FLAGGED] {}: {m}", suite::title(id))
                }
                CliError::Usage(m) => return Err(CliError::Usage(m)),
                other => {
                    failed.push(id);
                    format!("criterion {id} [FAIL] {}: could not run: {other}", suite::title(id))
                }
            },
        };
        println!("{line}");
        report.push_str(&line);
        report.push('\n');
    }
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("verdicts.txt"), report)?;
    }
    if !flagged.is_empty() {
        return Err(CliError::Numerical(format!("criteria {flagged:?}")));
    }
    if !failed.is_empty() {
        return Err(CliError::Statistical(format!("criteria {failed:?}")));
    }
    Ok(())
}

fn table(w: f64, dir: &Path, name: &str) -> Result<DistributionTable, CliError> {
    let pad = (w * w).ceil();
    let tab = DistributionTable::tabulate(w, -8.0 - pad, 8.0 + pad, 0.1, &StationaryParams::default())?;
    tab.validate().map_err(|e| CliError::Numerical(e.to_string()))?;
    tab.save(&dir.join(name))?;
    Ok(tab)
}

/// KS distance to `target`; writes both CDFs on a grid spanning the sample.
fn compare(dir: &Path, ecdf: &EmpiricalCdf, target: impl Fn(f64) -> f64) -> Result<KsResult, CliError> {
    let ks = ks_compare(ecdf, &target, 0.05)?;
    let v = ecdf.values();
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let mut f = std::io::BufWriter::new(fs::File::create(dir.join("comparison.csv"))?);
    writeln!(f, "s,empirical,target")?;
    for i in 0..=200 {
        let s = lo + (hi - lo) * i as f64 / 200.0;
        writeln!(f, "{s},{},{}", ecdf.eval(s), target(s))?;
    }
    f.flush()?;
    Ok(ks)
}

fn verify_run(cfg: &RunConfig, a: &VerifyArgs) -> Result<(), CliError> {
    let dir = a.out.clone().ok_or_else(|| CliError::usage("--out is required when verifying a run"))?;
    let exp = a.run.experiment(dir.clone(), a.workers, false)?;
    let out = run_experiment(&exp)?;
    let f = exp.frame;
    let ks = match (exp.observable, a.target) {
        (Observable::HeightAtShock, HeightTarget::Gaussian) => {
            let ecdf = out.scalars(|r| scalar::gaussian(&f, r))?;
            compare(&dir, &ecdf, |x| product_gaussian_cdf(&f, x))?
        }
        (Observable::HeightAtShock, HeightTarget::Fw) => {
            let (wm, wp) = f.w_pair();
            let minus = table(wm, &dir, "f_w_minus.csv")?;
            let plus = table(wp, &dir, "f_w_plus.csv")?;
            let p = ProductFw::new(f, &minus, &plus)?;
            compare(&dir, &out.ecdf, |s| p.cdf(s))?
        }
        (Observable::SecondClassPosition, _) => {
            let (wm, wp) = f.w_pair();
            let minus = table(wm, &dir, "f_w_minus.csv")?;
            let plus = table(wp, &dir, "f_w_plus.csv")?;
            let law =
                second_class_limit(&minus, &plus, f.chi_minus(), f.chi_plus(), suite::LIMIT_SAMPLES, exp.master_seed)?;
            compare(&dir, &out.ecdf, difference_cdf(&law, f.second_class_threshold(1.0, a.threshold)))?
        }
        (Observable::StationaryHeight, _) => {
            let tab = table(f.t.powf(-2.0 / 3.0) * f.x, &dir, "f_w.csv")?;
            let k = f.t.powf(-1.0 / 3.0);
            compare(&dir, &out.ecdf, |s| tab.cdf(k * s))?
        }
        (Observable::ParticleEvent, _) => {
            return Err(CliError::usage("the particle observable has no limit-law comparison; use height"));
        }
    };
    let passed = ks.distance <= a.ks_max;
    let line = format!(
        "{} [{}]: KS {:.4} (limit {}, DKW {:.4}, n = {})",
        exp.observable.name(),
        if passed { "PASS" } else { "FAIL" },
        ks.distance,
        a.ks_max,
        ks.dkw,
        ks.n
    );
    println!("{line}");
    fs::write(dir.join("verdict.txt"), format!("{line}\n"))?;
    // the experiment manifest owns manifest.txt; the verify command line goes beside it
    fs::write(
        dir.join("verify.txt"),
        format!("format_version = {FORMAT_VERSION}\nargv = {}\n", cfg.echo()[1..].join(" ")),
    )?;
    if !passed {
        return Err(CliError::Statistical(line));
    }
    Ok(())
}
