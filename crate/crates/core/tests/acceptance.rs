//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use common::suites::{self, Check};
use common::*;
use fasp_biharmonic::experiment::{run, ExperimentConfig};
use fasp_biharmonic::linalg::vector::{norm, sub};
use fasp_biharmonic::mesh::{Domain, Mesh};
use fasp_biharmonic::operators::{BoundaryOperatorSet, FnMap, LinearMap};
use fasp_biharmonic::solvers::{
    pcg, BiharmonicSystem, FaspOptions, InterfaceKind, InterfaceMode, InterfacePreconditioner, MixedInverse,
    PcgOptions, PoissonKind, PreconditionerKind,
};
use fasp_biharmonic::spaces::MorleyBc;
use fasp_biharmonic::spectra::{dense_product_spectrum, dense_spectrum, lanczos_extremal, LanczosOptions, SpectrumReport};

/// Above this size spectra come from Lanczos rather than a dense solve.
const DENSE_CUTOFF: usize = 1500;

/// The top Ritz values of the finest clamped meshes need a little more than
/// the default 300 steps.
const LANCZOS_STEPS: usize = 500;

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/")
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Spectrum of `B A` for a Morley system, with the top `want` Ritz values
/// required to converge in Lanczos mode.
fn fasp_spectrum(domain: Domain, level: usize, kind: PreconditionerKind, want: usize) -> (usize, SpectrumReport) {
    let bc = kind.required_bc().unwrap();
    let sys = BiharmonicSystem::new(Mesh::build_domain(domain, level), bc, PoissonKind::Direct).unwrap();
    let b = sys.preconditioner(kind, FaspOptions::default()).unwrap();
    let a = sys.matrix.clone();
    let n = sys.dim();
    let op = FnMap::square(n, |x: &[f64]| b.apply(&a.mul_vec(x)));
    let report = if n <= DENSE_CUTOFF {
        dense_spectrum(&op, a.as_ref()).unwrap()
    } else {
        let report = lanczos_extremal(&op, a.as_ref(), &LanczosOptions { max_iter: n.min(LANCZOS_STEPS), ..LanczosOptions::new(n, want) }).unwrap();
        assert!(report.converged_top() >= want, "{domain} level {level}: Lanczos top values did not converge");
        report
    };
    (n, report)
}

/// Dense spectra of `T S` for the requested interface preconditioners.
fn interface_spectra(domain: Domain, level: usize, kinds: &[InterfaceKind]) -> (usize, Vec<SpectrumReport>) {
    let sys = BiharmonicSystem::new(Mesh::build_domain(domain, level), MorleyBc::First, PoissonKind::Direct).unwrap();
    let ops = BoundaryOperatorSet::build(&sys.extender()).unwrap();
    let reports = kinds
        .iter()
        .map(|&k| {
            let t = InterfacePreconditioner::new(k, &ops, sys.mesh.h());
            dense_product_spectrum(&t.matrix, &ops.s_q).unwrap()
        })
        .collect();
    (ops.dim(), reports)
}

/// Bounded condition number with small drift across levels.
fn optimality(domain: Domain, levels: &[usize], kind: PreconditionerKind, band: (f64, f64)) -> Check {
    let mut dofs = Vec::new();
    let mut kappas = Vec::new();
    for &l in levels {
        let (n, s) = fasp_spectrum(domain, l, kind, 3);
        dofs.push(n);
        kappas.push(s.kappa());
    }
    let d = drift(&kappas);
    let ok = kappas.iter().all(|&k| within(k, band.0, band.1)) && d <= 1.10;
    verdict(ok, format!("{domain} dof {dofs:?}: kappa {} drift {d:.3}", fmt_list(&kappas)))
}

/// Outlier structure across levels: the top `m` values grow strictly and by
/// more than the drift tolerance, the next one drifts at most `1.10`, and the
/// effective condition number stays in `band`.
fn outliers(label: &str, tops: &[Vec<f64>], kappa_eff: &[f64], m: usize, band: (f64, f64)) -> Result<String, String> {
    let series = |i: usize| tops.iter().map(|t| t[i]).collect::<Vec<f64>>();
    let growing = |s: &[f64]| s.windows(2).all(|w| w[1] > w[0]) && s[s.len() - 1] / s[0] > 1.10;
    let count = (0..=m).take_while(|&i| growing(&series(i))).count();
    let cluster = series(m);
    let finest = &tops[tops.len() - 1];
    let ok = count == m
        && drift(&cluster) <= 1.10
        && (0..m).all(|i| finest[i] > finest[m])
        && kappa_eff.iter().all(|&k| within(k, band.0, band.1));
    let outl: Vec<String> = (0..m).map(|i| fmt_list(&series(i))).collect();
    verdict(
        ok,
        format!(
            "{label}: {count} growing outlier(s) [{}], cluster {} (drift {:.3}), kappa_eff {}",
            outl.join("; "),
            fmt_list(&cluster),
            drift(&cluster),
            fmt_list(kappa_eff)
        ),
    )
}

fn c1() -> Check {
    optimality(Domain::UnitSquare, &[5, 6, 7], PreconditionerKind::FirstKind, (1.5, 5.0))
}

fn c2() -> Check {
    optimality(Domain::LShape, &[4, 5, 6], PreconditionerKind::FirstKind, (1.8, 6.0))
}

fn c3() -> Check {
    optimality(Domain::FourSquare, &[4, 5, 6], PreconditionerKind::SecondKind, (1.5, 4.5))
}

fn c4() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (domain, m) in [(Domain::LShape, 1), (Domain::Trident, 2)] {
        let mut tops = Vec::new();
        let mut eff = Vec::new();
        for level in [2, 3, 4] {
            let (_, s) = fasp_spectrum(domain, level, PreconditionerKind::SecondKind, m + 3);
            tops.push(s.top(m + 1));
            eff.push(s.effective_condition(m).unwrap());
        }
        match outliers(&domain.to_string(), &tops, &eff, m, (1.5, 4.5)) {
            Ok(s) => lines.push(s),
            Err(s) => {
                ok = false;
                lines.push(s)
            }
        }
    }
    verdict(ok, lines.join(" | "))
}

fn c5() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for domain in [Domain::FourSquare, Domain::Hexagon, Domain::LShape, Domain::Trident] {
        let mut its = Vec::new();
        for level in [4, 5, 6] {
            let sys = BiharmonicSystem::new(Mesh::build_domain(domain, level), MorleyBc::Second, PoissonKind::Direct).unwrap();
            let b = sys.preconditioner(PreconditionerKind::SecondKind, FaspOptions::default()).unwrap();
            let out = pcg(sys.matrix.as_ref(), &b, &sys.load(|_| 1.0).unwrap(), &PcgOptions::with_tol(1e-8)).unwrap();
            ok &= out.converged && out.iterations <= 25;
            its.push((sys.dim(), out.iterations));
        }
        ok &= its.windows(2).all(|w| w[0].1.abs_diff(w[1].1) <= 3);
        lines.push(format!("{domain} {its:?}"));
    }
    verdict(ok, lines.join(" "))
}

/// Dense interface spectra shared by the convex interface criteria.
struct InterfaceRuns {
    square: BTreeMap<usize, (usize, SpectrumReport, SpectrumReport)>,
}

impl InterfaceRuns {
    fn compute() -> Self {
        let mut square = BTreeMap::new();
        for level in [6, 7, 8] {
            let (n, mut r) = interface_spectra(Domain::UnitSquare, level, &[InterfaceKind::SegmentEnergy, InterfaceKind::FullEnergy]);
            let t3 = r.pop().unwrap();
            let t1 = r.pop().unwrap();
            square.insert(level, (n, t1, t3));
        }
        Self { square }
    }
}

fn c6(runs: &InterfaceRuns) -> Check {
    let kappas: Vec<f64> = runs.square.values().map(|(_, t1, _)| t1.kappa()).collect();
    let dofs: Vec<usize> = runs.square.values().map(|(n, _, _)| *n).collect();
    let mut ok = kappas.iter().all(|&k| within(k, 8.0, 60.0)) && drift(&kappas) <= 1.15;
    let mut line = format!("unit-square N_S {dofs:?}: kappa {} drift {:.3}", fmt_list(&kappas), drift(&kappas));
    let mut hex = Vec::new();
    let mut hex_dofs = Vec::new();
    for level in [5, 6, 7] {
        let (n, r) = interface_spectra(Domain::Hexagon, level, &[InterfaceKind::SegmentEnergy]);
        hex.push(r[0].kappa());
        hex_dofs.push(n);
    }
    ok &= hex.iter().all(|&k| within(k, 8.0, 60.0)) && drift(&hex) <= 1.15;
    line.push_str(&format!(" | hexagon N_S {hex_dofs:?}: kappa {} drift {:.3}", fmt_list(&hex), drift(&hex)));
    verdict(ok, line)
}

fn c7() -> Check {
    let mut tops = Vec::new();
    let mut eff = Vec::new();
    let mut dofs = Vec::new();
    for level in [5, 6, 7] {
        let (n, r) = interface_spectra(Domain::Trident, level, &[InterfaceKind::SegmentEnergy]);
        tops.push(r[0].top(3));
        eff.push(r[0].effective_condition(2).unwrap());
        dofs.push(n);
    }
    outliers(&format!("trident N_S {dofs:?}"), &tops, &eff, 2, (10.0, 60.0))
}

fn c8(runs: &InterfaceRuns) -> Check {
    let t3: Vec<f64> = runs.square.values().map(|(_, _, t3)| t3.kappa()).collect();
    let t1: Vec<f64> = runs.square.values().map(|(_, t1, _)| t1.kappa()).collect();
    let (r1, r2) = (t3[1] / t3[0], t3[2] / t3[1]);
    let ok = r1 > r2 && r2 > 1.0 && t3.iter().zip(&t1).all(|(a, b)| a > b);
    verdict(ok, format!("T3 kappa {} (ratios {r1:.4}, {r2:.4}), T1 kappa {}", fmt_list(&t3), fmt_list(&t1)))
}

fn c9() -> Check {
    let mut h_inv = Vec::new();
    let mut eff = Vec::new();
    for level in [3, 4, 5] {
        let (_, s) = fasp_spectrum(Domain::UnitSquare, level, PreconditionerKind::FirstKindPlain, 3);
        h_inv.push(1.0 / Mesh::build_domain(Domain::UnitSquare, level).h());
        eff.push(s.effective_condition(0).unwrap());
    }
    let e = growth_exponent(&h_inv, &eff);
    verdict(within(e, 0.6, 1.4), format!("kappa_eff {} exponent {e:.3}", fmt_list(&eff)))
}

fn c10() -> Check {
    let mut worst: f64 = 0.0;
    for domain in ALL_DOMAINS {
        for level in [1, 2] {
            let sys = BiharmonicSystem::new(Mesh::build_domain(domain, level), MorleyBc::First, PoissonKind::Direct).unwrap();
            let ext = sys.extender();
            let ops = Arc::new(BoundaryOperatorSet::build(&ext).unwrap());
            let inv = MixedInverse::new(ext, ops, InterfaceMode::Dense, sys.mesh.h()).unwrap();
            let g = fasp_biharmonic::linalg::vector::random_vector(&mut rng(110 + level as u64), inv.dim());
            let sol = inv.solve(&g).unwrap();
            let (w, u) = coupled_oracle(&sys, &g);
            worst = worst.max(norm(&sub(&sol.u, &u)) / norm(&u));
            worst = worst.max(norm(&sub(&sol.auxiliary, &w)) / norm(&w));
        }
    }
    verdict(worst <= 1e-8, format!("max relative deviation {worst:.2e}"))
}

/// Dense LU of `[M_N, −A_mix; A_mixᵀ, 0] [w; u] = [0; g]`.
fn coupled_oracle(sys: &BiharmonicSystem, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    use nalgebra::{DMatrix, DVector};
    let p1 = &sys.p1;
    let (nv, ni) = (p1.m_n.nrows(), p1.a_d.nrows());
    let a_mix = p1.a_mix.to_dense();
    let mut k = DMatrix::zeros(nv + ni, nv + ni);
    k.view_mut((0, 0), (nv, nv)).copy_from(&p1.m_n.to_dense());
    k.view_mut((0, nv), (nv, ni)).copy_from(&(-&a_mix));
    k.view_mut((nv, 0), (ni, nv)).copy_from(&a_mix.transpose());
    let mut rhs = DVector::zeros(nv + ni);
    rhs.rows_mut(nv, ni).copy_from_slice(g);
    let x = k.lu().solve(&rhs).unwrap();
    (x.rows(0, nv).iter().copied().collect(), x.rows(nv, ni).iter().copied().collect())
}

fn c11() -> Check {
    let mut parts = Vec::new();
    let named: [(&str, fn() -> Check); 7] = [
        ("jump equivalence", suites::jump_equivalence),
        ("decomposition", suites::stable_decomposition),
        ("lift error", suites::lift_error),
        ("scalar identities", suites::scalar_identities),
        ("projection", suites::projection_identity),
        ("laplacian trend", suites::laplacian_ratio_trend),
        ("local scaling", suites::local_scaling),
    ];
    for (name, f) in named {
        parts.push(format!("{name}: {}", f().map_err(|e| format!("{name}: {e}"))?));
    }
    parts.push(spd_check()?);
    parts.push(lanczos_check()?);
    parts.push(determinism_check()?);
    Ok(parts.join("; "))
}

fn spd_check() -> Check {
    let mut min: f64 = f64::MAX;
    for domain in ALL_DOMAINS {
        for kind in [
            PreconditionerKind::FirstKind,
            PreconditionerKind::FirstKindPlain,
            PreconditionerKind::SecondKind,
            PreconditionerKind::SmootherOnly,
        ] {
            let bc = kind.required_bc().unwrap_or(MorleyBc::Second);
            let sys = BiharmonicSystem::new(Mesh::build_domain(domain, 2), bc, PoissonKind::Direct).unwrap();
            let b = sys.preconditioner(kind, FaspOptions::default()).unwrap();
            let s = dense_spectrum(&b, &fasp_biharmonic::operators::Identity(sys.dim())).unwrap();
            min = min.min(s.lambda_min() / s.lambda_max());
        }
        let sys = BiharmonicSystem::new(Mesh::build_domain(domain, 2), MorleyBc::First, PoissonKind::Direct).unwrap();
        let ops = BoundaryOperatorSet::build(&sys.extender()).unwrap();
        for kind in InterfaceKind::ALL {
            let t = InterfacePreconditioner::new(kind, &ops, sys.mesh.h());
            let s = dense_product_spectrum(&t.matrix, &nalgebra::DMatrix::identity(ops.dim(), ops.dim())).unwrap();
            min = min.min(s.lambda_min() / s.lambda_max());
        }
    }
    verdict(min > 0.0, format!("preconditioners SPD (min eigenvalue ratio {min:.1e})"))
}

fn lanczos_check() -> Check {
    let sys = BiharmonicSystem::new(Mesh::build_domain(Domain::Trident, 3), MorleyBc::First, PoissonKind::Direct).unwrap();
    let b = sys.preconditioner(PreconditionerKind::FirstKind, FaspOptions::default()).unwrap();
    let a = sys.matrix.clone();
    let op = FnMap::square(sys.dim(), |x: &[f64]| b.apply(&a.mul_vec(x)));
    let dense = dense_spectrum(&op, a.as_ref()).unwrap();
    let lanczos = lanczos_extremal(&op, a.as_ref(), &LanczosOptions::new(sys.dim(), 4)).unwrap();
    let mut worst: f64 = ((lanczos.lambda_min() - dense.lambda_min()) / dense.lambda_min()).abs();
    for (l, d) in lanczos.top(4).iter().zip(dense.top(4)) {
        worst = worst.max(((l - d) / d).abs());
    }
    verdict(worst <= 1e-6, format!("Lanczos vs dense {worst:.1e}"))
}

fn determinism_check() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = format!(
        "name = det\ndomain = trident\nlevels = 1..2\nproblem = biharmonic-1\npreconditioner = bh1\noutput = {}\n",
        dir.path().display()
    );
    let cfg = ExperimentConfig::parse(&text).map_err(|e| e.to_string())?;
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    let a = strip(std::fs::read_to_string(run(&cfg).map_err(|e| e.to_string())?.csv).unwrap());
    let b = strip(std::fs::read_to_string(run(&cfg).map_err(|e| e.to_string())?.csv).unwrap());
    verdict(a == b && a.len() == 3, "CSV reproducible".into())
}

fn main() -> ExitCode {
    let mut runs: Option<InterfaceRuns> = None;
    let mut all_pass = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                all_pass = false;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag} {name} ({secs:.1}s): {detail}");
    };
    report(1, "clamped plate, unit square", &mut c1);
    report(2, "clamped plate, L-shape", &mut c2);
    report(3, "simply supported plate, convex", &mut c3);
    report(4, "simply supported plate, outliers", &mut c4);
    report(5, "simply supported plate, PCG steps", &mut c5);
    report(6, "segment interface preconditioner, convex", &mut || c6(runs.get_or_insert_with(InterfaceRuns::compute)));
    report(7, "segment interface preconditioner, trident", &mut c7);
    report(8, "full-energy interface preconditioner growth", &mut || c8(runs.get_or_insert_with(InterfaceRuns::compute)));
    report(9, "second-kind auxiliary on clamped plate", &mut c9);
    report(10, "decoupled vs coupled mixed solve", &mut c10);
    report(11, "property suites", &mut c11);
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
