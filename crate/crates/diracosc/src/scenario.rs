//! Run descriptions, the flat key-value config format, and the scenario
//! runners behind the command line.
//!
//! Every emitted file starts with `# key = value` metadata lines carrying
//! the fully resolved run description; feeding those lines back as a config
//! file reproduces the run. Output is deterministic: fixed column order,
//! fixed float formatting, no timestamps.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::{density_map, DensityKind, DensityMap};
use crate::evolution::{max_amplitude_deviation, oracle_evolve, project_energy_sectors};
use crate::observables::{observe, sigma_z_series_offset, spin_expectations, spin_series};
use crate::wavepacket::{initial_state, time_span, Representation, SimConfig};
use crate::{Error, Result};

/// Deviation above which an oracle check counts as a numerical failure.
pub const ORACLE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn extension(self) -> &'static str {
        self.as_str()
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a run needs beyond the physics: the time window for series,
/// the instants and kinds for maps, the oracle basis cap, the format.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub sim: SimConfig,
    pub t_start: f64,
    pub t_end: f64,
    pub t_steps: usize,
    /// Instants for density maps and oracle checks.
    pub times: Vec<f64>,
    pub kinds: Vec<DensityKind>,
    /// Largest basis the oracle check accepts; exceeding it is an error.
    pub basis_cap: Option<usize>,
    pub format: OutputFormat,
}

impl RunSpec {
    pub fn time_grid(&self) -> Vec<f64> {
        time_span(self.t_start, self.t_end, self.t_steps)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.t_steps == 0 {
            return Err(Error::Config("t_steps must be at least 1".into()));
        }
        if self.times.is_empty() {
            return Err(Error::Config("times must not be empty".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Config("kinds must not be empty".into()));
        }
        Ok(())
    }
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            sim: SimConfig::new(20.0, 0.5).expect("default config is valid"),
            t_start: 0.0,
            t_end: 20.0,
            t_steps: 201,
            times: vec![0.0, 10.0],
            kinds: vec![DensityKind::Total],
            basis_cap: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Partial run description: every key optional, later overlays win.
/// This is what a config file parses into and what CLI flags fill.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecOverlay {
    pub n_mean: Option<f64>,
    pub r: Option<f64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub beta_re: Option<f64>,
    pub beta_im: Option<f64>,
    pub representation: Option<Representation>,
    pub tail_tolerance: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub t_steps: Option<usize>,
    pub theta_points: Option<usize>,
    pub phi_points: Option<usize>,
    pub radius: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub kinds: Option<Vec<DensityKind>>,
    pub basis_cap: Option<usize>,
    pub format: Option<OutputFormat>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {key} = '{value}'")))
}

fn parse_list<T>(key: &str, value: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr,
{
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse entry '{item}' in {key}")))
        })
        .collect()
}

impl SpecOverlay {
    /// Applies one `key = value` pair; `Ok(false)` means the key is not a
    /// config key (callers decide whether that is an error).
    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "N" => self.n_mean = Some(parse_num(key, value)?),
            "r" => self.r = Some(parse_num(key, value)?),
            "alpha_re" => self.alpha_re = Some(parse_num(key, value)?),
            "alpha_im" => self.alpha_im = Some(parse_num(key, value)?),
            "beta_re" => self.beta_re = Some(parse_num(key, value)?),
            "beta_im" => self.beta_im = Some(parse_num(key, value)?),
            "representation" => self.representation = Some(value.parse()?),
            "tail_tolerance" => self.tail_tolerance = Some(parse_num(key, value)?),
            "t_start" => self.t_start = Some(parse_num(key, value)?),
            "t_end" => self.t_end = Some(parse_num(key, value)?),
            "t_steps" => self.t_steps = Some(parse_num(key, value)?),
            "theta_points" => self.theta_points = Some(parse_num(key, value)?),
            "phi_points" => self.phi_points = Some(parse_num(key, value)?),
            "radius" => self.radius = Some(parse_num(key, value)?),
            "times" => self.times = Some(parse_list(key, value)?),
            "kinds" => self.kinds = Some(parse_list(key, value)?),
            "basis_cap" => self.basis_cap = Some(parse_num(key, value)?),
            "format" => self.format = Some(value.parse()?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Parses config text. Bare `key = value` lines must be valid config
    /// keys; `#` lines are applied when they carry a known key and ignored
    /// otherwise. Emitted CSV outputs load whole: once their leading
    /// metadata block has applied a key, the table below is ignored.
    pub fn parse(text: &str) -> Result<SpecOverlay> {
        let mut overlay = SpecOverlay::default();
        let mut metadata_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let commented = raw.trim_start().starts_with('#');
            let line = raw.trim_start().trim_start_matches('#').trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                if commented {
                    continue;
                }
                if metadata_seen {
                    break;
                }
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    idx + 1
                )));
            };
            let key = key.trim();
            let recognized = if commented {
                let applied = overlay.apply_key(key, value).unwrap_or(false);
                metadata_seen |= applied;
                applied
            } else {
                overlay.apply_key(key, value)?
            };
            if !recognized && !commented {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", idx + 1)));
            }
        }
        Ok(overlay)
    }

    /// Returns `self` with every key set in `over` replaced by it.
    pub fn merge(mut self, over: SpecOverlay) -> SpecOverlay {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(
            n_mean, r, alpha_re, alpha_im, beta_re, beta_im, representation, tail_tolerance,
            t_start, t_end, t_steps, theta_points, phi_points, radius, times, kinds, basis_cap,
            format
        );
        self
    }

    /// Fills defaults, normalizes the spinor, validates.
    pub fn resolve(&self) -> Result<RunSpec> {
        let base = RunSpec::default();
        let mut sim = SimConfig::new(
            self.n_mean.unwrap_or(base.sim.n_mean),
            self.r.unwrap_or(base.sim.r),
        )?;
        let alpha = Complex64::new(
            self.alpha_re.unwrap_or(sim.alpha.re),
            self.alpha_im.unwrap_or(sim.alpha.im),
        );
        let beta = Complex64::new(
            self.beta_re.unwrap_or(sim.beta.re),
            self.beta_im.unwrap_or(sim.beta.im),
        );
        sim = sim.with_spin(alpha, beta)?;
        if let Some(rep) = self.representation {
            sim.representation = rep;
        }
        if let Some(tol) = self.tail_tolerance {
            sim.tail_tolerance = tol;
        }
        if let Some(tp) = self.theta_points {
            sim.theta_points = tp;
        }
        if let Some(pp) = self.phi_points {
            sim.phi_points = pp;
        }
        sim.radius = Some(self.radius.unwrap_or_else(|| sim.orbit_radius()));
        let spec = RunSpec {
            sim,
            t_start: self.t_start.unwrap_or(base.t_start),
            t_end: self.t_end.unwrap_or(base.t_end),
            t_steps: self.t_steps.unwrap_or(base.t_steps),
            times: self.times.clone().unwrap_or(base.times),
            kinds: self.kinds.clone().unwrap_or(base.kinds),
            basis_cap: self.basis_cap,
            format: self.format.unwrap_or(base.format),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_times(times: &[f64]) -> String {
    times.iter().map(|t| fmt_float(*t)).collect::<Vec<_>>().join(",")
}

fn fmt_kinds(kinds: &[DensityKind]) -> String {
    kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

/// The resolved-config echo every output embeds, in fixed order.
pub fn metadata_pairs(scenario: &str, spec: &RunSpec) -> Vec<(String, String)> {
    let mut m = vec![
        ("scenario".into(), scenario.to_string()),
        ("format".into(), spec.format.to_string()),
        ("N".into(), fmt_float(spec.sim.n_mean)),
        ("r".into(), fmt_float(spec.sim.r)),
        ("alpha_re".into(), fmt_float(spec.sim.alpha.re)),
        ("alpha_im".into(), fmt_float(spec.sim.alpha.im)),
        ("beta_re".into(), fmt_float(spec.sim.beta.re)),
        ("beta_im".into(), fmt_float(spec.sim.beta.im)),
        ("representation".into(), spec.sim.representation.to_string()),
        ("tail_tolerance".into(), fmt_float(spec.sim.tail_tolerance)),
        ("t_start".into(), fmt_float(spec.t_start)),
        ("t_end".into(), fmt_float(spec.t_end)),
        ("t_steps".into(), spec.t_steps.to_string()),
        ("theta_points".into(), spec.sim.theta_points.to_string()),
        ("phi_points".into(), spec.sim.phi_points.to_string()),
        ("radius".into(), fmt_float(spec.sim.map_radius())),
        ("times".into(), fmt_times(&spec.times)),
        ("kinds".into(), fmt_kinds(&spec.kinds)),
    ];
    if let Some(cap) = spec.basis_cap {
        m.push(("basis_cap".into(), cap.to_string()));
    }
    m
}

fn write_table(
    out: &mut dyn Write,
    format: OutputFormat,
    metadata: &[(String, String)],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            for (k, v) in metadata {
                writeln!(out, "# {k} = {v}")?;
            }
            writeln!(out, "{}", columns.join(","))?;
            let mut line = String::new();
            for row in rows {
                line.clear();
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    let _ = write!(line, "{}", fmt_float(*v));
                }
                writeln!(out, "{line}")?;
            }
        }
        OutputFormat::Json => {
            let mut meta = serde_json::Map::new();
            for (k, v) in metadata {
                meta.insert(k.clone(), serde_json::Value::String(v.clone()));
            }
            let doc = serde_json::json!({
                "metadata": meta,
                "columns": columns,
                "rows": rows,
            });
            serde_json::to_writer_pretty(&mut *out, &doc)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Spin and angular-momentum time series over the configured grid.
pub fn run_spins(spec: &RunSpec, out: &mut dyn Write) -> Result<()> {
    spec.validate()?;
    let s0 = initial_state(&spec.sim)?;
    let grid = spec.time_grid();
    let records: Vec<_> = grid.par_iter().map(|t| observe(&s0.evolve_to(*t))).collect();
    let rows: Vec<Vec<f64>> = records
        .iter()
        .map(|rec| {
            vec![
                rec.t,
                rec.t * spec.sim.r,
                rec.sigma_x,
                rec.sigma_y,
                rec.sigma_z,
                rec.l_z,
                rec.j_z,
                rec.norm,
                rec.positive_weight,
                rec.negative_weight,
            ]
        })
        .collect();
    write_table(
        out,
        spec.format,
        &metadata_pairs("spins", spec),
        &[
            "t", "t_omega", "sigma_x", "sigma_y", "sigma_z", "l_z", "j_z", "norm", "pos_weight",
            "neg_weight",
        ],
        &rows,
    )
}

/// Energy-branch weights per orbital sector at `t_start` (they are
/// constants of motion, so one instant tells the whole story).
pub fn run_decompose(spec: &RunSpec, out: &mut dyn Write) -> Result<()> {
    spec.validate()?;
    let state = initial_state(&spec.sim)?.evolve_to(spec.t_start);
    let proj = project_energy_sectors(&state)?;
    let mut metadata = metadata_pairs("decompose", spec);
    metadata.push(("time".into(), fmt_float(spec.t_start)));
    metadata.push(("positive_weight".into(), fmt_float(proj.positive_weight)));
    metadata.push(("negative_weight".into(), fmt_float(proj.negative_weight)));
    let w = state.component_weights();
    metadata.push((
        "component_weights".into(),
        format!("{},{},{},{}", fmt_float(w[0]), fmt_float(w[1]), fmt_float(w[2]), fmt_float(w[3])),
    ));
    let rows: Vec<Vec<f64>> = proj
        .per_l
        .iter()
        .zip(&state.sectors)
        .map(|(split, sec)| {
            vec![
                f64::from(split.l),
                sec.norm_sqr(),
                split.positive,
                split.negative,
            ]
        })
        .collect();
    write_table(
        out,
        spec.format,
        &metadata,
        &["l", "norm", "positive", "negative"],
        &rows,
    )
}

/// Spin components in all three representations side by side, plus the
/// closed-form sums (the z sum keeps its documented start offset).
pub fn run_compare(spec: &RunSpec, out: &mut dyn Write) -> Result<()> {
    spec.validate()?;
    let reps = [
        Representation::Dirac,
        Representation::FoldyWouthuysen,
        Representation::NonRelativistic,
    ];
    let states: Vec<_> = reps
        .iter()
        .map(|rep| initial_state(&spec.sim.clone().with_representation(*rep)))
        .collect::<Result<_>>()?;
    let grid = spec.time_grid();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut row = vec![*t, *t * spec.sim.r];
            for s in &states {
                row.extend(spin_expectations(&s.evolve_to(*t)));
            }
            let series = spin_series(&spec.sim, *t)?;
            row.extend([series.sigma_x, series.sigma_y, series.sigma_z]);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut metadata = metadata_pairs("compare-representations", spec);
    metadata.push((
        "sigma_z_series_t0_offset".into(),
        fmt_float(sigma_z_series_offset(&spec.sim)?),
    ));
    write_table(
        out,
        spec.format,
        &metadata,
        &[
            "t",
            "t_omega",
            "sigma_x_dirac",
            "sigma_y_dirac",
            "sigma_z_dirac",
            "sigma_x_fw",
            "sigma_y_fw",
            "sigma_z_fw",
            "sigma_x_nonrel",
            "sigma_y_nonrel",
            "sigma_z_nonrel",
            "sigma_x_series",
            "sigma_y_series",
            "sigma_z_series",
        ],
        &rows,
    )
}

/// Outcome of an oracle check; the caller maps a failure to exit code 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleVerdict {
    pub worst: f64,
    pub threshold: f64,
}

impl OracleVerdict {
    pub fn passed(&self) -> bool {
        self.worst <= self.threshold
    }
}

/// Engine vs block-matrix evolution at each configured instant.
pub fn run_oracle_check(spec: &RunSpec, out: &mut dyn Write) -> Result<OracleVerdict> {
    spec.validate()?;
    let s0 = initial_state(&spec.sim)?;
    if let Some(cap) = spec.basis_cap {
        if s0.l_max() > cap {
            return Err(Error::Truncation(format!(
                "tail tolerance {} needs l_max = {}, above the configured basis cap {cap}",
                spec.sim.tail_tolerance,
                s0.l_max()
            )));
        }
    }
    let deviations: Vec<f64> = spec
        .times
        .par_iter()
        .map(|t| -> Result<f64> {
            Ok(max_amplitude_deviation(
                &s0.evolve_to(*t),
                &oracle_evolve(&s0, *t)?,
            ))
        })
        .collect::<Result<_>>()?;
    let worst = deviations.iter().cloned().fold(0.0, f64::max);
    let mut metadata = metadata_pairs("oracle-check", spec);
    metadata.push(("threshold".into(), fmt_float(ORACLE_THRESHOLD)));
    metadata.push(("l_max".into(), s0.l_max().to_string()));
    metadata.push(("max_deviation".into(), fmt_float(worst)));
    let rows: Vec<Vec<f64>> = spec
        .times
        .iter()
        .zip(&deviations)
        .map(|(t, d)| vec![*t, *d])
        .collect();
    write_table(
        out,
        spec.format,
        &metadata,
        &["t", "max_deviation"],
        &rows,
    )?;
    Ok(OracleVerdict {
        worst,
        threshold: ORACLE_THRESHOLD,
    })
}

/// Deterministic file name for one map: time then kind, extension by format.
fn map_file_name(t: f64, kind: DensityKind, format: OutputFormat) -> String {
    let kind_part = kind.to_string().replace(':', "_");
    format!("density_t{t}_{kind_part}.{}", format.extension())
}

/// One file per (time, kind) into `out_dir`; returns the paths written,
/// in deterministic order.
pub fn run_density(spec: &RunSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    let s0 = initial_state(&spec.sim)?;
    let radius = spec.sim.map_radius();
    let jobs: Vec<(f64, DensityKind)> = spec
        .times
        .iter()
        .flat_map(|t| spec.kinds.iter().map(|k| (*t, *k)))
        .collect();
    let maps: Vec<DensityMap> = jobs
        .par_iter()
        .map(|(t, kind)| {
            density_map(
                &s0.evolve_to(*t),
                *kind,
                radius,
                spec.sim.theta_points,
                spec.sim.phi_points,
            )
        })
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(maps.len());
    for ((t, kind), map) in jobs.iter().zip(&maps) {
        let path = out_dir.join(map_file_name(*t, *kind, spec.format));
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        // a single-map spec so this exact file reloads as a config
        let mut one = spec.clone();
        one.times = vec![*t];
        one.kinds = vec![*kind];
        let rows: Vec<Vec<f64>> = (0..map.theta.len())
            .flat_map(|i| {
                let map = &map;
                (0..map.phi.len())
                    .map(move |j| vec![map.theta[i], map.phi[j], map.value(i, j)])
            })
            .collect();
        write_table(
            &mut file,
            spec.format,
            &metadata_pairs("density", &one),
            &["theta", "phi", "value"],
            &rows,
        )?;
        file.flush()?;
        written.push(path);
    }
    Ok(written)
}
