//! Declarative experiment runner behind the `solver` binary.
//!
//! A config is flat `key = value` text; `#` starts a comment. Recognized keys:
//!
//! | key | values | default |
//! |-----|--------|---------|
//! | `name` | output file stem | `experiment` |
//! | `domain` | `unit-square`, `four-square`, `hexagon`, `l-shape`, `trident` | required |
//! | `levels` | `a..b` (inclusive), `a,b,c`, or empty | required |
//! | `problem` | `biharmonic-1`, `biharmonic-2`, `interface-S` | required |
//! | `preconditioner` | `bh1`, `bh1-prime`, `bh2`, `smoother`, `t1`, `t2`, `t3` | required |
//! | `spectra` | `dense`, `lanczos`, `none` | `lanczos` (`dense` for `interface-S`) |
//! | `pcg_tol` | positive real | `1e-8` |
//! | `m` | outlier count for the effective condition number | domain's reentrant corners |
//! | `output` | directory | `results` |
//! | `seed` | integer | `7` |
//! | `lanczos_steps` | Lanczos iteration budget | `300` (capped by the dimension) |
//! | `poisson` | `direct`, `cg` | `direct` |
//! | `interface` | `dense`, `nested` (inner solve of `bh1`) | `dense` |
//! | `interface_pc` | `t1`, `t2`, `t3` (used when `interface = nested`) | `t1` |
//! | `smoother` | `sgs`, `jacobi` | `sgs` |
//! | `sweeps` | integer | `3` |
//! | `flexible` | `true`, `false` (outer PCG variant) | `false` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::mesh::{Domain, Mesh};
use crate::operators::{BoundaryOperatorSet, FnMap, LinearMap};
use crate::solvers::{
    pcg, BiharmonicSystem, FaspOptions, InterfaceKind, InterfaceMode, InterfacePreconditioner, PcgOptions,
    PoissonKind, PreconditionerKind, SmootherKind,
};
use crate::spaces::MorleyBc;
use crate::spectra::{SpectrumMode, dense_product_spectrum, dense_spectrum, lanczos_extremal, LanczosOptions, SpectrumReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    BiharmonicFirst,
    BiharmonicSecond,
    Interface,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "biharmonic-1" => Ok(Self::BiharmonicFirst),
            "biharmonic-2" => Ok(Self::BiharmonicSecond),
            "interface-S" => Ok(Self::Interface),
            _ => Err(Error::Config(format!("unknown problem `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    Fasp(PreconditionerKind),
    Interface(InterfaceKind),
}

impl FromStr for Preconditioner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse()
            .map(Self::Fasp)
            .or_else(|_| s.parse().map(Self::Interface))
            .map_err(|_| Error::Config(format!("unknown preconditioner `{s}`")))
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::BiharmonicFirst => "biharmonic-1",
            Self::BiharmonicSecond => "biharmonic-2",
            Self::Interface => "interface-S",
        })
    }
}

impl std::fmt::Display for Preconditioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Fasp(k) => k.fmt(f),
            Self::Interface(k) => k.fmt(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectraMode {
    Dense,
    Lanczos,
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub domain: Domain,
    pub levels: Vec<usize>,
    pub problem: Problem,
    pub preconditioner: Preconditioner,
    pub spectra: SpectraMode,
    pub pcg_tol: f64,
    pub m: usize,
    pub output: PathBuf,
    pub seed: u64,
    pub lanczos_steps: usize,
    pub poisson: PoissonKind,
    pub fasp: FaspOptions,
    pub flexible: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{}`", no + 1, k.trim())));
            }
        }
        let take = |kv: &mut BTreeMap<String, String>, k: &str| kv.remove(k);
        let required = |kv: &mut BTreeMap<String, String>, k: &str| {
            kv.remove(k).ok_or_else(|| Error::Config(format!("missing key `{k}`")))
        };
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }

        let name = take(&mut kv, "name").unwrap_or_else(|| "experiment".into());
        let domain: Domain = required(&mut kv, "domain")?.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        let levels = parse_levels(&required(&mut kv, "levels")?)?;
        let problem: Problem = required(&mut kv, "problem")?.parse()?;
        let preconditioner: Preconditioner = required(&mut kv, "preconditioner")?.parse()?;
        let spectra = match take(&mut kv, "spectra").as_deref() {
            None if problem == Problem::Interface => SpectraMode::Dense,
            None | Some("lanczos") => SpectraMode::Lanczos,
            Some("dense") => SpectraMode::Dense,
            Some("none") => SpectraMode::None,
            Some(o) => return Err(Error::Config(format!("unknown spectra mode `{o}`"))),
        };
        let pcg_tol = take(&mut kv, "pcg_tol").map(|v| num::<f64>("pcg_tol", &v)).transpose()?.unwrap_or(1e-8);
        if !(pcg_tol > 0.0) {
            return Err(Error::Config("pcg_tol must be positive".into()));
        }
        let m = take(&mut kv, "m").map(|v| num("m", &v)).transpose()?.unwrap_or(domain.reentrant_corners());
        let output = PathBuf::from(take(&mut kv, "output").unwrap_or_else(|| "results".into()));
        let seed = take(&mut kv, "seed").map(|v| num("seed", &v)).transpose()?.unwrap_or(7);
        let lanczos_steps = take(&mut kv, "lanczos_steps").map(|v| num("lanczos_steps", &v)).transpose()?.unwrap_or(300);
        let poisson = match take(&mut kv, "poisson").as_deref() {
            None | Some("direct") => PoissonKind::Direct,
            Some("cg") => PoissonKind::Iterative { tol: 1e-12 },
            Some(o) => return Err(Error::Config(format!("unknown poisson backend `{o}`"))),
        };
        let sweeps = take(&mut kv, "sweeps").map(|v| num("sweeps", &v)).transpose()?.unwrap_or(3);
        let smoother = match take(&mut kv, "smoother").as_deref() {
            None | Some("sgs") => SmootherKind::SymmetricGaussSeidel { sweeps },
            Some("jacobi") => SmootherKind::jacobi(sweeps),
            Some(o) => return Err(Error::Config(format!("unknown smoother `{o}`"))),
        };
        let inner_pc: InterfaceKind = take(&mut kv, "interface_pc").as_deref().unwrap_or("t1").parse()?;
        let interface = match take(&mut kv, "interface").as_deref() {
            None | Some("dense") => InterfaceMode::Dense,
            Some("nested") => InterfaceMode::Nested { kind: inner_pc, tol: 1e-10 },
            Some(o) => return Err(Error::Config(format!("unknown interface mode `{o}`"))),
        };
        let flexible = match take(&mut kv, "flexible").as_deref() {
            None | Some("false") => false,
            Some("true") => true,
            Some(o) => return Err(Error::Config(format!("bad value `{o}` for `flexible`"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }

        let cfg = Self {
            name,
            domain,
            levels,
            problem,
            preconditioner,
            spectra,
            pcg_tol,
            m,
            output,
            seed,
            lanczos_steps,
            poisson,
            fasp: FaspOptions { smoother, interface },
            flexible,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let ok = match (self.problem, self.preconditioner) {
            (Problem::Interface, Preconditioner::Interface(_)) => true,
            (Problem::Interface, _) | (_, Preconditioner::Interface(_)) => false,
            (p, Preconditioner::Fasp(k)) => match k.required_bc() {
                None => true,
                Some(bc) => bc == if p == Problem::BiharmonicFirst { MorleyBc::First } else { MorleyBc::Second },
            },
        };
        if !ok {
            return Err(Error::Config(format!(
                "preconditioner {} cannot be used with problem {}",
                self.preconditioner, self.problem
            )));
        }
        Ok(())
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.join(format!("{}.csv", self.name))
    }

    pub fn log_path(&self) -> PathBuf {
        self.output.join(format!("{}.log", self.name))
    }
}

fn parse_levels(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || Error::Config(format!("bad level range `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub domain: Domain,
    pub level: usize,
    pub dof: usize,
    pub spectrum: Option<SpectrumReport>,
    pub kappa_eff: Option<f64>,
    pub pcg_iters: Option<usize>,
    pub seconds: f64,
    pub failure: Option<String>,
}

impl ResultRow {
    pub fn lambda_min(&self) -> Option<f64> {
        self.spectrum.as_ref().map(|s| s.lambda_min())
    }

    pub fn kappa(&self) -> Option<f64> {
        self.spectrum.as_ref().map(|s| s.kappa())
    }

    fn csv_line(&self, n_top: usize) -> String {
        let mut line = format!("{},{},{}", self.domain.name(), self.level, self.dof);
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6e}"));
        if self.failure.is_some() {
            for _ in 0..n_top + 4 {
                line.push_str(",failed");
            }
        } else {
            let top = self.spectrum.as_ref().map(|s| s.top(n_top)).unwrap_or_default();
            let _ = write!(line, ",{}", fmt(self.lambda_min()));
            for i in 0..n_top {
                let _ = write!(line, ",{}", fmt(top.get(i).copied()));
            }
            let _ = write!(line, ",{},{}", fmt(self.kappa()), fmt(self.kappa_eff));
            let _ = write!(line, ",{}", self.pcg_iters.map_or("NA".to_string(), |k| k.to_string()));
        }
        let _ = write!(line, ",{:.3}", self.seconds);
        line
    }
}

pub fn csv_header(n_top: usize) -> String {
    let mut h = String::from("domain,level,dof,lambda_min");
    for i in 1..=n_top {
        let _ = write!(h, ",lambda_top{i}");
    }
    h.push_str(",kappa,kappa_eff,pcg_iters,seconds");
    h
}

/// Runs one grid cell.
pub fn run_level(cfg: &ExperimentConfig, level: usize) -> Result<ResultRow> {
    let start = Instant::now();
    let mesh = Mesh::build_domain(cfg.domain, level);
    let (dof, spectrum, pcg_iters) = match cfg.preconditioner {
        Preconditioner::Fasp(kind) => {
            let bc = if cfg.problem == Problem::BiharmonicFirst { MorleyBc::First } else { MorleyBc::Second };
            let sys = BiharmonicSystem::new(mesh, bc, cfg.poisson)?;
            let b = sys.preconditioner(kind, cfg.fasp)?;
            let a = sys.matrix.clone();
            let n = sys.dim();
            let spectrum = match cfg.spectra {
                SpectraMode::None => None,
                SpectraMode::Dense => {
                    let op = FnMap::square(n, |x: &[f64]| b.apply(&a.mul_vec(x)));
                    Some(dense_spectrum(&op, a.as_ref())?)
                }
                SpectraMode::Lanczos => {
                    let op = FnMap::square(n, |x: &[f64]| b.apply(&a.mul_vec(x)));
                    let opts = lanczos_options(cfg, n);
                    Some(lanczos_extremal(&op, a.as_ref(), &opts)?)
                }
            };
            let rhs = sys.load(|_| 1.0)?;
            let out = pcg(a.as_ref(), &b, &rhs, &pcg_options(cfg))?;
            if !out.converged {
                return Err(Error::NoConvergence(format!("pcg did not reach {:e}", cfg.pcg_tol)));
            }
            (n, spectrum, out.iterations)
        }
        Preconditioner::Interface(kind) => {
            let sys = BiharmonicSystem::new(mesh, MorleyBc::First, cfg.poisson)?;
            let ext = sys.extender();
            let ops = BoundaryOperatorSet::build(&ext)?;
            let t = InterfacePreconditioner::new(kind, &ops, sys.mesh.h());
            let n = ops.dim();
            let spectrum = match cfg.spectra {
                SpectraMode::None => None,
                SpectraMode::Dense => Some(dense_product_spectrum(&t.matrix, &ops.s_q)?),
                SpectraMode::Lanczos => {
                    let op = FnMap::square(n, |x: &[f64]| t.apply(&ops.s_apply(x)));
                    let opts = lanczos_options(cfg, n);
                    Some(lanczos_extremal(&op, &ops.s_q, &opts)?)
                }
            };
            // Interface right-hand side of the clamped plate with unit load.
            let p1 = sys.p1.as_ref();
            let g = crate::assembly::load_vector_p1(&sys.mesh, &p1.interior, |_| 1.0);
            let w = p1.extend_by_zero(&sys.dirichlet.solve(&g));
            let rhs: Vec<f64> = ext.adjoint(&p1.m_n.mul_vec(&w)).iter().map(|v| -v).collect();
            let out = pcg(&ops.s_q, &t, &rhs, &pcg_options(cfg))?;
            if !out.converged {
                return Err(Error::NoConvergence(format!("pcg did not reach {:e}", cfg.pcg_tol)));
            }
            (n, spectrum, out.iterations)
        }
    };
    // Lanczos rows only report the effective condition number once the
    // top `m + 3` Ritz values have converged.
    let kappa_eff = match &spectrum {
        Some(s) if s.mode == SpectrumMode::Dense || s.converged_top() >= cfg.m + 3 => Some(s.effective_condition(cfg.m)?),
        _ => None,
    };
    Ok(ResultRow {
        domain: cfg.domain,
        level,
        dof,
        spectrum,
        kappa_eff,
        pcg_iters: Some(pcg_iters),
        seconds: start.elapsed().as_secs_f64(),
        failure: None,
    })
}

fn lanczos_options(cfg: &ExperimentConfig, n: usize) -> LanczosOptions {
    LanczosOptions { seed: cfg.seed, max_iter: cfg.lanczos_steps.min(n), ..LanczosOptions::new(n, cfg.m + 3) }
}

fn pcg_options(cfg: &ExperimentConfig) -> PcgOptions {
    PcgOptions { tol: cfg.pcg_tol, max_iter: 2000, flexible: cfg.flexible, reference: None }
}

#[derive(Debug)]
pub struct RunSummary {
    pub rows: Vec<ResultRow>,
    pub csv: PathBuf,
    /// First failure, if any; rows up to and including it were written.
    pub failure: Option<Error>,
}

/// Runs every level, writing the CSV and log under `cfg.output`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    std::fs::create_dir_all(&cfg.output)?;
    let n_top = cfg.m + 1;
    let mut csv = csv_header(n_top);
    csv.push('\n');
    let mut log = String::new();
    let _ = writeln!(log, "config {} domain={} levels={:?}", cfg.name, cfg.domain.name(), cfg.levels);
    let mut rows = Vec::new();
    let mut failure = None;
    for &level in &cfg.levels {
        let _ = writeln!(log, "level {level}: {}", cost_estimate(cfg, level));
        match run_level(cfg, level) {
            Ok(row) => {
                let _ = writeln!(log, "level {level}: ok in {:.2}s", row.seconds);
                csv.push_str(&row.csv_line(n_top));
                csv.push('\n');
                rows.push(row);
            }
            Err(e) => {
                let _ = writeln!(log, "level {level}: failed: {e}");
                let row = ResultRow {
                    domain: cfg.domain,
                    level,
                    dof: problem_dim(cfg.problem, &Mesh::build_domain(cfg.domain, level)),
                    spectrum: None,
                    kappa_eff: None,
                    pcg_iters: None,
                    seconds: 0.0,
                    failure: Some(e.to_string()),
                };
                csv.push_str(&row.csv_line(n_top));
                csv.push('\n');
                rows.push(row);
                failure = Some(e);
                break;
            }
        }
    }
    std::fs::write(cfg.csv_path(), csv)?;
    std::fs::write(cfg.log_path(), log)?;
    Ok(RunSummary { rows, csv: cfg.csv_path(), failure })
}

fn problem_dim(problem: Problem, mesh: &Mesh) -> usize {
    let nb = mesh.n_boundary_vertices();
    let interior = mesh.n_vertices() - nb;
    match problem {
        Problem::BiharmonicFirst => interior + mesh.edges().iter().filter(|e| !e.is_boundary()).count(),
        Problem::BiharmonicSecond => interior + mesh.n_edges(),
        Problem::Interface => nb,
    }
}

/// Human-readable size of the work for one level, printed before running it.
pub fn cost_estimate(cfg: &ExperimentConfig, level: usize) -> String {
    let mesh = Mesh::build_domain(cfg.domain, level);
    let nb = mesh.n_boundary_vertices();
    let interior = mesh.n_vertices() - nb;
    let dim = problem_dim(cfg.problem, &mesh);
    let spectral = match cfg.spectra {
        SpectraMode::Dense => format!("{dim} operator columns"),
        SpectraMode::Lanczos => format!("up to {} Lanczos steps", dim.min(cfg.lanczos_steps)),
        SpectraMode::None => "no spectrum".into(),
    };
    let needs_interface = matches!(cfg.preconditioner, Preconditioner::Interface(_))
        || cfg.preconditioner == Preconditioner::Fasp(PreconditionerKind::FirstKind);
    let setup = if needs_interface { format!(", {} Poisson solves of size {interior} for the interface", 2 * nb) } else { String::new() };
    format!("dim {dim}, {spectral}{setup}")
}

/// Dense spectra of the two energy-based interface preconditioners, for the
/// eigenvalue distribution plot. Writes `<stem>_t2.dat`, `<stem>_t3.dat` and a
/// gnuplot script `<stem>.gp` into `dir`; returns the three paths.
pub fn emit_scatter(domain: Domain, level: usize, dir: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let sys = BiharmonicSystem::new(Mesh::build_domain(domain, level), MorleyBc::First, PoissonKind::Direct)?;
    let ops = BoundaryOperatorSet::build(&sys.extender())?;
    let stem = format!("scatter_{}_{}", domain.name(), level);
    let mut paths = Vec::new();
    for kind in [InterfaceKind::RingEnergy, InterfaceKind::FullEnergy] {
        let t = InterfacePreconditioner::new(kind, &ops, sys.mesh.h());
        let spec = dense_product_spectrum(&t.matrix, &ops.s_q)?;
        let mut text = String::new();
        for (i, l) in spec.eigenvalues.iter().enumerate() {
            let _ = writeln!(text, "{} {:.12e}", i + 1, l);
        }
        let path = dir.join(format!("{stem}_{}.dat", kind.name()));
        std::fs::write(&path, text)?;
        paths.push(path);
    }
    let script = format!(
        "set terminal pngcairo size 800,600\n\
         set output '{stem}.png'\n\
         set logscale y\n\
         set xlabel 'index'\n\
         set ylabel 'eigenvalue'\n\
         set key top left\n\
         plot '{stem}_t2.dat' using 1:2 with points pointtype 3 title 'T2 S', \\\n     \
         '{stem}_t3.dat' using 1:2 with points pointtype 6 title 'T3 S'\n"
    );
    let gp = dir.join(format!("{stem}.gp"));
    std::fs::write(&gp, script)?;
    paths.push(gp);
    Ok([paths[0].clone(), paths[1].clone(), paths[2].clone()])
}
