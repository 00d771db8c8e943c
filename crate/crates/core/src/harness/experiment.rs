use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sampler::{second_class_replica, shock_replica, stationary_replica, StationaryTarget};
use super::stats::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::scaling::{rescale_height, rescale_height_gaussian, rescale_height_unshifted, ScalingFrame};

pub const MANIFEST_VERSION: u32 = 1;
pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const ECDF_FILE: &str = "ecdf.csv";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// Heights at the shifted shock site and at `floor(v t)`.
    HeightAtShock,
    /// Number of left particles passing the lattice target `a`.
    ParticleEvent,
    /// Second class particle started at the empty origin.
    SecondClassPosition,
    /// `X_t(n)` for stationary Bernoulli data; needs a flat frame.
    StationaryHeight,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::HeightAtShock => "height_at_shock",
            Observable::ParticleEvent => "particle_event",
            Observable::SecondClassPosition => "second_class_position",
            Observable::StationaryHeight => "stationary_height",
        }
    }

    /// Names of the per-replica record fields, in file order.
    pub fn fields(&self) -> &'static [&'static str] {
        match self {
            Observable::HeightAtShock => &["n_right", "n_left", "height_shock", "height_center"],
            Observable::ParticleEvent => &["n_right", "n_left", "n_star"],
            Observable::SecondClassPosition => &["n_right", "n_left", "x_second"],
            Observable::StationaryHeight => &["x_label"],
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub frame: ScalingFrame,
    pub observable: Observable,
    pub replicas: u64,
    pub master_seed: u64,
    /// Thread cap; does not affect any output.
    pub workers: usize,
    pub output: PathBuf,
    pub verbose: bool,
}

/// Label and time of the stationary observable for this frame:
/// `n = floor(rho^2 T - 2 rho chi^{1/3} eps^{-1} x)` with `T = eps^{-3/2} t`.
pub fn stationary_target(frame: &ScalingFrame, rho: f64) -> Result<StationaryTarget> {
    let chi = rho * (1.0 - rho);
    let n =
        (rho * rho * frame.macro_time() - 2.0 * rho * chi.cbrt() * frame.time_scale.powf(2.0 / 3.0) * frame.x).floor();
    if n < 1.0 {
        return Err(Error::invalid("x", format!("label {n} is not positive")));
    }
    Ok(StationaryTarget { rho, t: frame.macro_time(), n: n as u64 })
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::invalid("replicas", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        self.frame.validate()?;
        match self.observable {
            Observable::StationaryHeight => {
                if !self.frame.is_flat() || self.frame.rho_minus <= 0.0 || self.frame.rho_minus >= 1.0 {
                    return Err(Error::invalid("rho", "stationary runs need rho_minus = rho_plus in (0, 1)"));
                }
                stationary_target(&self.frame, self.frame.rho_minus)?;
            }
            _ if self.frame.is_flat() => {
                return Err(Error::invalid("rho", "shock runs need rho_minus < rho_plus"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Raw record of one replica; a pure function of `(master_seed, replica)`.
    pub fn sample(&self, replica: u64) -> Result<Vec<f64>> {
        let mut init = rng::stream(self.master_seed, replica, Purpose::Initial);
        let mut dynamics = rng::stream(self.master_seed, replica, Purpose::Dynamics);
        let f = &self.frame;
        Ok(match self.observable {
            Observable::HeightAtShock => {
                let s = shock_replica(f, &mut init, &mut dynamics)?;
                vec![s.n_right, s.n_left, s.height_shock as f64, s.height_center as f64]
            }
            Observable::ParticleEvent => {
                let s = shock_replica(f, &mut init, &mut dynamics)?;
                vec![s.n_right, s.n_left, s.n_star as f64]
            }
            Observable::SecondClassPosition => {
                let s = second_class_replica(f, &mut init, &mut dynamics)?;
                vec![s.n_right, s.n_left, s.position as f64]
            }
            Observable::StationaryHeight => {
                let target = stationary_target(f, f.rho_minus)?;
                vec![stationary_replica(&target, &mut init, &mut dynamics)? as f64]
            }
        })
    }

    pub fn manifest(&self) -> String {
        let f = &self.frame;
        let mut m = BTreeMap::new();
        m.insert("format_version", MANIFEST_VERSION.to_string());
        m.insert("code_version", env!("CARGO_PKG_VERSION").to_string());
        m.insert("observable", self.observable.name().to_string());
        m.insert("rho_minus", f.rho_minus.to_string());
        m.insert("rho_plus", f.rho_plus.to_string());
        m.insert("time_scale", f.time_scale.to_string());
        m.insert("t_kpz", f.t.to_string());
        m.insert("x_kpz", f.x.to_string());
        m.insert("s_kpz", f.s.to_string());
        m.insert("convention", f.convention.to_string());
        m.insert("replicas", self.replicas.to_string());
        m.insert("master_seed", self.master_seed.to_string());
        m.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Rebuilds an experiment from a manifest written by [`manifest`](Self::manifest).
    pub fn from_manifest(path: &Path, output: PathBuf, workers: usize) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let bad = |reason: String| Error::Malformed { what: "manifest", path: path.to_path_buf(), reason };
        let mut m = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("no `=` in `{line}`")))?;
            m.insert(k.trim().to_string(), v.trim().to_string());
        }
        fn get<T: FromStr>(m: &BTreeMap<String, String>, k: &str) -> std::result::Result<T, String>
        where
            T::Err: fmt::Display,
        {
            m.get(k).ok_or_else(|| format!("missing `{k}`"))?.parse().map_err(|e| format!("`{k}`: {e}"))
        }
        let version: u32 = get(&m, "format_version").map_err(bad)?;
        if version != MANIFEST_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let mut frame = ScalingFrame::with_time_scale(
            get(&m, "rho_minus").map_err(bad)?,
            get(&m, "rho_plus").map_err(bad)?,
            get(&m, "time_scale").map_err(bad)?,
            get(&m, "t_kpz").map_err(bad)?,
            get(&m, "x_kpz").map_err(bad)?,
            get(&m, "s_kpz").map_err(bad)?,
        )?;
        frame.convention = get::<String>(&m, "convention").map_err(bad)?.parse()?;
        let name: String = get(&m, "observable").map_err(bad)?;
        let observable = match name.as_str() {
            "height_at_shock" => Observable::HeightAtShock,
            "particle_event" => Observable::ParticleEvent,
            "second_class_position" => Observable::SecondClassPosition,
            "stationary_height" => Observable::StationaryHeight,
            other => return Err(bad(format!("unknown observable `{other}`"))),
        };
        let exp = Self {
            frame,
            observable,
            replicas: get(&m, "replicas").map_err(bad)?,
            master_seed: get(&m, "master_seed").map_err(bad)?,
            workers,
            output,
            verbose: false,
        };
        exp.validate()?;
        Ok(exp)
    }
}

/// Scalar observables; each has limiting CDF `s -> P(scalar <= s)` given by the matching target.
pub mod scalar {
    use super::*;

    /// `-(rescaled height)/2` at the shifted shock site; target: product of `F_w`.
    pub fn shock(frame: &ScalingFrame, rec: &[f64]) -> f64 {
        -0.5 * rescale_height(frame, rec[2] as i64, rec[0], rec[1])
    }

    /// Same ratio at `floor(v t)` without the `N_r`, `N_l` terms.
    pub fn control(frame: &ScalingFrame, rec: &[f64]) -> f64 {
        -0.5 * rescale_height_unshifted(frame, rec[3] as i64)
    }

    /// `-(h - hbar t) / (t^{1/2} (rho_+ - rho_-)^{1/2})`; target: Gaussian product.
    pub fn gaussian(frame: &ScalingFrame, rec: &[f64]) -> f64 {
        -rescale_height_gaussian(frame, rec[3] as i64) / frame.delta_rho().sqrt()
    }

    /// `(base - n* - 1) / eps^{-1/2}` with `base` the unrounded label target at `s = 0`.
    pub fn particle(frame: &ScalingFrame, rec: &[f64]) -> f64 {
        let (rm, rp) = (frame.rho_minus, frame.rho_plus);
        let base = rp * rm * frame.y_eps() + (rm * rec[0] + rp * rec[1]) / frame.delta_rho();
        (base - rec[2] - 1.0) / frame.fluct_scale()
    }

    /// `(X_2nd - v y + (N_r + N_l)/(rho_+ - rho_-)) / eps^{-1/2}`.
    pub fn second_class(frame: &ScalingFrame, rec: &[f64]) -> f64 {
        (rec[2] - frame.v() * frame.y_eps() + frame.shock_offset(rec[0], rec[1])) / frame.fluct_scale()
    }

    /// `((1-2 rho) T + 2 chi^{1/3} eps^{-1} x - X) / ((1-rho) chi^{-1/3} eps^{-1/2})`, centered on
    /// the characteristic through label `n`: it starts near `-n/rho` and moves at speed `1 - rho`.
    pub fn stationary(frame: &ScalingFrame, rec: &[f64]) -> f64 {
        let rho = frame.rho_minus;
        let chi = rho * (1.0 - rho);
        let center =
            (1.0 - 2.0 * rho) * frame.macro_time() + 2.0 * chi.cbrt() * frame.time_scale.powf(2.0 / 3.0) * frame.x;
        (center - rec[0]) / ((1.0 - rho) * chi.cbrt().recip() * frame.fluct_scale())
    }

    /// Primary scalar of each observable.
    pub fn primary(exp: &Experiment, rec: &[f64]) -> f64 {
        let f = &exp.frame;
        match exp.observable {
            Observable::HeightAtShock => shock(f, rec),
            Observable::ParticleEvent => particle(f, rec),
            Observable::SecondClassPosition => second_class(f, rec),
            Observable::StationaryHeight => stationary(f, rec),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Raw records in replica order.
    pub records: Vec<Vec<f64>>,
    /// ECDF of the primary scalar.
    pub ecdf: EmpiricalCdf,
    /// Replicas computed in this call (the rest were resumed).
    pub fresh: u64,
}

impl RunOutput {
    pub fn scalars(&self, f: impl Fn(&[f64]) -> f64) -> Result<EmpiricalCdf> {
        EmpiricalCdf::new(self.records.iter().map(|r| f(r)).collect())
    }
}

/// Reads the complete-replica prefix of a records file; returns records and the byte length kept.
fn read_records(path: &Path, fields: &[&str]) -> Result<(Vec<Vec<f64>>, u64)> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut kept = 0u64;
    let mut pos = reader.read_line(&mut line)? as u64;
    if line.trim_end() != "replica,t,observable,value" {
        return Ok((Vec::new(), 0));
    }
    kept = kept.max(pos);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(fields.len());
    loop {
        line.clear();
        let n = reader.read_line(&mut line)? as u64;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        pos += n;
        let parts: Vec<&str> = line.trim_end().split(',').collect();
        let ok =
            parts.len() == 4 && parts[0].parse::<u64>().ok() == Some(out.len() as u64) && parts[2] == fields[cur.len()];
        let value = parts.get(3).and_then(|v| v.parse::<f64>().ok());
        match (ok, value) {
            (true, Some(v)) => cur.push(v),
            _ => break,
        }
        if cur.len() == fields.len() {
            out.push(std::mem::replace(&mut cur, Vec::with_capacity(fields.len())));
            kept = pos;
        }
    }
    Ok((out, kept))
}

fn write_record(out: &mut impl Write, replica: u64, t: f64, fields: &[&str], rec: &[f64]) -> std::io::Result<()> {
    for (name, v) in fields.iter().zip(rec) {
        writeln!(out, "{replica},{t},{name},{v}")?;
    }
    Ok(())
}

/// Exclusive claim on an output directory, released on drop. A lock left by
/// a process that no longer exists is taken over.
struct RunLock(PathBuf);

impl RunLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(".lock");
        if let Ok(pid) = fs::read_to_string(&path) {
            let alive = Path::new("/proc").join(pid.trim()).exists();
            if alive && pid.trim() != std::process::id().to_string() {
                return Err(Error::Domain(format!("{} is being written by process {}", dir.display(), pid.trim())));
            }
        }
        fs::write(&path, std::process::id().to_string())?;
        Ok(Self(path))
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Runs (or resumes) an experiment, writing `manifest.txt`, `records.csv` and `ecdf.csv`.
pub fn run_experiment(exp: &Experiment) -> Result<RunOutput> {
    exp.validate()?;
    fs::create_dir_all(&exp.output)?;
    let manifest = exp.manifest();
    let mpath = exp.output.join(MANIFEST_FILE);
    if mpath.exists() {
        let old = fs::read_to_string(&mpath)?;
        if old != manifest {
            return Err(Error::Malformed {
                what: "manifest",
                path: mpath,
                reason: "output directory holds a run with different parameters".into(),
            });
        }
    } else {
        fs::write(&mpath, &manifest)?;
    }

    let _lock = RunLock::acquire(&exp.output)?;
    let fields = exp.observable.fields();
    let rpath = exp.output.join(RECORDS_FILE);
    let (mut records, kept) = if rpath.exists() { read_records(&rpath, fields)? } else { (Vec::new(), 0) };
    records.truncate(exp.replicas as usize);
    let done = records.len() as u64;
    let file = if kept == 0 {
        let mut f = File::create(&rpath)?;
        writeln!(f, "replica,t,observable,value")?;
        f
    } else {
        let f = OpenOptions::new().write(true).open(&rpath)?;
        f.set_len(kept)?;
        let mut f = OpenOptions::new().append(true).open(&rpath)?;
        f.flush()?;
        f
    };
    let mut out = BufWriter::new(file);
    let t = exp.frame.y_eps();
    if done > exp.replicas {
        return Err(Error::invalid("replicas", "fewer than already recorded"));
    }

    let batch = (exp.workers as u64) * 64;
    let mut next = done;
    let mut last_report = 0u64;
    while next < exp.replicas {
        let end = (next + batch).min(exp.replicas);
        let chunk = (end - next).div_ceil(exp.workers as u64);
        let results: Vec<Result<Vec<Vec<f64>>>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..exp.workers as u64)
                .map(|w| {
                    let a = (next + w * chunk).min(end);
                    let b = (a + chunk).min(end);
                    s.spawn(move || (a..b).map(|r| exp.sample(r)).collect::<Result<Vec<_>>>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for part in results {
            for rec in part? {
                write_record(&mut out, next, t, fields, &rec)?;
                records.push(rec);
                next += 1;
            }
        }
        out.flush()?;
        if exp.verbose && (next - last_report) * 100 >= exp.replicas {
            eprintln!("{}: {next}/{} replicas", exp.observable, exp.replicas);
            last_report = next;
        }
    }
    drop(out);

    let values: Vec<f64> = records.iter().map(|r| scalar::primary(exp, r)).collect();
    let ecdf = EmpiricalCdf::new(values)?;
    write_ecdf(&ecdf, &exp.output.join(ECDF_FILE))?;
    Ok(RunOutput { records, ecdf, fresh: exp.replicas - done })
}

/// `value,cdf` at every distinct sample value.
pub fn write_ecdf(ecdf: &EmpiricalCdf, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "value,cdf")?;
    let v = ecdf.values();
    let n = v.len() as f64;
    for (i, x) in v.iter().enumerate() {
        if i + 1 == v.len() || v[i + 1] != *x {
            writeln!(w, "{x},{}", (i + 1) as f64 / n)?;
        }
    }
    w.flush()?;
    Ok(())
}
