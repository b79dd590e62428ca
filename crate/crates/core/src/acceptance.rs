//! End-to-end numerical checks with fixed tolerances, shared by the
//! `acceptance` test target and `edgeband verify`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bloch::{band_sweep, bloch_spectrum, inversion_map, parity_spectrum, Sector};
use crate::dirac_point::{certify_dirac_point, k0_splitting, theta_by_quadrature, DiracPointCertificate, DEFAULT_TOL};
use crate::edge::{bifurcation_sweep, essential_gap, find_edge_states, h2_discrepancy, EdgeOptions};
use crate::effective_dirac::{dirac_squared_spectrum, essential_edge, stability_probe, zero_mode, DiracSpec};
use crate::error::{Error, Result};
use crate::multiscale::{compute_e2, solve_corrector, synthesize_ansatz};
use crate::potential::{CosineSeries, DomainWall, TabulatedProfile};
use crate::tridiag::SymTridiagonal;

const M: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(&str, Check); 11] = [
    ("free dispersion", free_dispersion),
    ("double eigenvalue for 10cos(4 pi x)", strong_lattice_energy),
    ("lambda_sharp", lambda_check),
    ("theta_sharp", theta_check),
    ("k = 0 splitting", k0_check),
    ("essential gap width", gap_width),
    ("Dirac zero mode", dirac_zero_mode),
    ("edge eigenvalue vs E2", edge_eigenvalue),
    ("edge eigenfunction H2 error", edge_eigenfunction),
    ("bifurcation branches", bifurcation),
    ("property suites", properties),
];

pub fn run_criterion(id: usize) -> Option<CriterionReport> {
    let (name, check) = *CRITERIA.get(id.checked_sub(1)?)?;
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionReport { id, name, passed, detail })
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERIA.len()).filter_map(run_criterion).collect()
}

fn free() -> CosineSeries {
    CosineSeries::zero()
}

fn w135() -> CosineSeries {
    CosineSeries::odd([(1, 2.0), (3, 2.0), (5, 2.0)]).expect("odd series")
}

fn w1() -> CosineSeries {
    CosineSeries::odd([(1, 2.0)]).expect("odd series")
}

fn strong() -> CosineSeries {
    CosineSeries::even(0.0, [(2, 10.0)]).expect("even series")
}

fn free_dispersion() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for j in 0..9 {
        let k = 2.0 * PI * j as f64 / 8.0;
        let modes = bloch_spectrum(&free(), k, 16, 8)?;
        let mut exact: Vec<f64> = (-16i64..=16).map(|m| (k + 2.0 * PI * m as f64).powi(2)).collect();
        exact.sort_by(f64::total_cmp);
        for (mode, e) in modes.iter().zip(&exact) {
            worst = worst.max((mode.energy - e).abs());
        }
    }
    let modes = bloch_spectrum(&free(), PI, 16, 6)?;
    let mut dirac: f64 = 0.0;
    for m in 0..3 {
        let target = ((2 * m + 1) as f64 * PI).powi(2);
        dirac = dirac.max((modes[2 * m].energy - target).abs()).max((modes[2 * m + 1].energy - target).abs());
    }
    Ok((worst < 1e-10 && dirac < 1e-10, format!("max band error {worst:.2e}, Dirac energy error {dirac:.2e}")))
}

fn strong_lattice_energy() -> Result<(bool, String)> {
    let cert = certify_dirac_point(&strong(), 0, M, DEFAULT_TOL)?;
    let ok = (cert.e_star - 9.45).abs() <= 0.05;
    Ok((ok, format!("E_star = {:.6} (degeneracy residual {:.1e})", cert.e_star, cert.degeneracy_residual)))
}

fn lambda_check() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in 0..3 {
        let cert = certify_dirac_point(&free(), n, M, DEFAULT_TOL)?;
        worst = worst.max((cert.lambda_sharp + 2.0 * PI * (2 * n + 1) as f64).abs());
    }
    let cert = certify_dirac_point(&strong(), 0, M, DEFAULT_TOL)?;
    let ok = worst < 1e-10 && cert.slope_residual < 1e-3;
    Ok((
        ok,
        format!(
            "free lambda error {worst:.2e}; 10cos(4 pi x): lambda = {:.8}, relative slope mismatch {:.2e}",
            cert.lambda_sharp, cert.slope_residual
        ),
    ))
}

fn theta_check() -> Result<(bool, String)> {
    let (mut worst, mut oracle): (f64, f64) = (0.0, 0.0);
    for n in 0..3 {
        let cert = certify_dirac_point(&free(), n, M, DEFAULT_TOL)?.with_theta(&w135())?;
        let theta = cert.theta()?;
        worst = worst.max((theta - 1.0).abs());
        let q = theta_by_quadrature(&cert.phi1.coeffs, &cert.phi2.coeffs, &w135(), 2048);
        oracle = oracle.max((q.re - theta).abs()).max(q.im.abs());
    }
    Ok((
        worst < 1e-10 && oracle < 1e-10,
        format!("max |theta - 1| = {worst:.2e}, quadrature disagreement {oracle:.2e}"),
    ))
}

fn k0_check() -> Result<(bool, String)> {
    let v = CosineSeries::even(0.0, [(2, 2.0)])?;
    let a = k0_splitting(&v, 1, 0.1, M)?.residual();
    let b = k0_splitting(&v, 1, 0.01, M)?.residual();
    let ratio = a / b;
    Ok(((50.0..=200.0).contains(&ratio), format!("residuals {a:.3e} / {b:.3e} = {ratio:.2}")))
}

fn gap_width() -> Result<(bool, String)> {
    let cert = certify_dirac_point(&free(), 0, M, DEFAULT_TOL)?.with_theta(&w135())?;
    let theta = cert.theta()?;
    let wall = DomainWall::tanh(1.0);
    let ratio = |delta: f64| -> Result<f64> {
        let (lo, hi) = essential_gap(&free(), &w135(), &wall, delta, 0, M, 65)?;
        Ok((hi - lo) / (2.0 * delta * wall.limit_plus().abs() * theta.abs()))
    };
    let (r1, r2) = (ratio(0.05)?, ratio(0.025)?);
    // round-off allowance for the comparison when both deviations are tiny
    let ok = (0.95..=1.05).contains(&r1) && (r2 - 1.0).abs() <= (r1 - 1.0).abs() + 1e-12;
    Ok((ok, format!("ratio {r1:.10} at delta = 0.05, {r2:.10} at delta = 0.025")))
}

fn dirac_zero_mode() -> Result<(bool, String)> {
    let unit = DiracSpec::new(1.0, 1.0, DomainWall::tanh(1.0))?;
    let e0 = dirac_squared_spectrum(&unit, 30.0, 4096, 1)?.topological(unit.branch())[0];
    let flat = DiracSpec::new(1.0, 1.0, DomainWall::constant(1.0))?;
    let edge2 = essential_edge(&flat).powi(2);
    let s = dirac_squared_spectrum(&flat, 30.0, 4096, 1)?;
    let lowest = s.plus[0].min(s.minus[0]);
    let no_mode = matches!(zero_mode(&flat, 30.0, 4096), Err(Error::NoZeroMode(_)));
    let bumped = stability_probe(&unit, TabulatedProfile::smooth_bump(0.5, 2.0, 3.0, 6001)?, 30.0, 4096)?;
    let ok = e0.abs() < 1e-6 && lowest >= edge2 - 1e-3 && no_mode && bumped.abs() < 1e-5;
    Ok((
        ok,
        format!(
            "|E0| = {:.2e}; sign-definite lowest {lowest:.6} vs edge {edge2}; bumped |E0| = {:.2e}",
            e0.abs(),
            bumped.abs()
        ),
    ))
}

struct MainCase {
    e_star: f64,
    e2: f64,
    /// `(delta, (E_delta - E_star) / delta^2, H2 discrepancy)`.
    samples: Vec<(f64, f64, f64)>,
}

fn main_case() -> &'static std::result::Result<MainCase, String> {
    static CASE: OnceLock<std::result::Result<MainCase, String>> = OnceLock::new();
    CASE.get_or_init(|| compute_main_case().map_err(|e| e.to_string()))
}

fn compute_main_case() -> Result<MainCase> {
    let w = w1();
    let wall = DomainWall::tanh(1.0);
    let cert = certify_dirac_point(&free(), 0, M, DEFAULT_TOL)?.with_theta(&w)?;
    let spec = DiracSpec::new(cert.lambda_sharp, cert.theta()?, wall.clone())?;
    let zm = zero_mode(&spec, spec.default_x_max(), 8192)?;
    let corrector = solve_corrector(&cert, &w, &zm, M)?;
    let e2 = compute_e2(&cert, &corrector, &zm)?.value;
    let mut samples = Vec::new();
    for delta in [0.2, 0.1] {
        let search = find_edge_states(&free(), &w, &wall, delta, &cert, &EdgeOptions::default())?;
        let state = search
            .states
            .iter()
            .min_by(|a, b| (a.e_delta - cert.e_star).abs().total_cmp(&(b.e_delta - cert.e_star).abs()))
            .ok_or_else(|| Error::NoConvergence(format!("no edge state at delta = {delta}")))?;
        let g = state.grid;
        let ansatz = synthesize_ansatz(&cert, &corrector, &zm, delta, g.x(0), g.h, g.n)?;
        let h2 = h2_discrepancy(state, &ansatz)?;
        samples.push((delta, (state.e_delta - cert.e_star) / (delta * delta), h2));
    }
    Ok(MainCase { e_star: cert.e_star, e2, samples })
}

fn edge_eigenvalue() -> Result<(bool, String)> {
    let case = main_case().as_ref().map_err(|e| Error::NoConvergence(e.clone()))?;
    let (_, coarse, _) = case.samples[0];
    let (_, fine, _) = case.samples[1];
    let rel = (fine - case.e2).abs() / case.e2.abs();
    let toward = (fine - case.e2).abs() < (coarse - case.e2).abs();
    Ok((
        rel < 0.1 && toward,
        format!(
            "E_star = {:.10}, E2 = {:.10}; (E - E_star)/delta^2 = {coarse:.10} (0.2), {fine:.10} (0.1); relative error {rel:.2e}",
            case.e_star, case.e2
        ),
    ))
}

fn edge_eigenfunction() -> Result<(bool, String)> {
    let case = main_case().as_ref().map_err(|e| Error::NoConvergence(e.clone()))?;
    let (_, _, coarse) = case.samples[0];
    let (_, _, fine) = case.samples[1];
    let ratio = fine / coarse;
    Ok(((0.3..=0.8).contains(&ratio), format!("H2 discrepancy {coarse:.4e} (0.2), {fine:.4e} (0.1), ratio {ratio:.3}")))
}

fn bifurcation() -> Result<(bool, String)> {
    let deltas = [0.5, 1.0, 2.0, 5.0];
    let wall = DomainWall::tanh(1.0);
    let opts = EdgeOptions::default();
    let certs = |w: &CosineSeries| -> Result<Vec<DiracPointCertificate>> {
        (0..3).map(|n| certify_dirac_point(&free(), n, M, DEFAULT_TOL)?.with_theta(w)).collect()
    };
    let rich = bifurcation_sweep(&free(), &w135(), &wall, &deltas, &certs(&w135())?, &opts)?;
    let missing: Vec<String> = rich
        .rows
        .iter()
        .filter(|r| r.energies.is_empty())
        .map(|r| format!("(n={}, delta={})", r.point_index, r.delta))
        .collect();
    let single = bifurcation_sweep(&free(), &w1(), &wall, &deltas, &certs(&w1())?, &opts)?;
    let flags_ok = single.rows.iter().all(|r| r.theta_zero == (r.point_index != 0));
    let base_ok = single.branch(0).all(|r| !r.energies.is_empty());
    let ok = missing.is_empty() && flags_ok && base_ok;
    let mut detail = format!(
        "w1,w3,w5: {} of {} sweep points carry in-gap states",
        rich.rows.len() - missing.len(),
        rich.rows.len()
    );
    if !missing.is_empty() {
        detail.push_str(&format!(" (missing {})", missing.join(", ")));
    }
    let unresolved = single.rows.iter().filter(|r| r.gap.is_some() && r.note.is_some()).count();
    let gapless = single.rows.iter().filter(|r| r.gap.is_none()).count();
    detail.push_str(&format!(
        "; 2cos(2 pi x): theta = 0 flagged at higher points {flags_ok}, pi^2 branch present {base_ok}, \
         {gapless} rows without gap, {unresolved} rows unresolved in the box"
    ));
    Ok((ok, detail))
}

fn sturm_oracle() -> (usize, usize) {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut probes, mut mismatches) = (0, 0);
    for _ in 0..40 {
        let n: usize = rng.random_range(1..=400);
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.random_range(-2.0..2.0)).collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone()).expect("consistent lengths");
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let eigs = dense.symmetric_eigenvalues();
        let (lo, hi) = t.gershgorin();
        for _ in 0..25 {
            let e = rng.random_range(lo..hi);
            if eigs.iter().any(|&l| (l - e).abs() < 1e-8) {
                continue;
            }
            probes += 1;
            if t.sturm_count(e) != eigs.iter().filter(|&&l| l < e).count() {
                mismatches += 1;
            }
        }
    }
    (probes, mismatches)
}

fn properties() -> Result<(bool, String)> {
    let mut notes = Vec::new();
    let mut ok = true;

    let (probes, mismatches) = sturm_oracle();
    ok &= mismatches == 0;
    notes.push(format!("Sturm {mismatches}/{probes} mismatches"));

    let v = CosineSeries::even(0.0, [(2, 10.0), (4, 3.0)])?;
    let full = bloch_spectrum(&v, PI, M, 12)?;
    let mut union: Vec<f64> = parity_spectrum(&v, Sector::EvenIndex, M, 6)?
        .into_iter()
        .chain(parity_spectrum(&v, Sector::OddIndex, M, 6)?)
        .map(|m| m.energy)
        .collect();
    union.sort_by(f64::total_cmp);
    let sector_err = full.iter().zip(&union).fold(0.0f64, |m, (a, b)| m.max((a.energy - b).abs()));
    ok &= sector_err < 1e-10;
    notes.push(format!("sector union {sector_err:.1e}"));

    let cert = certify_dirac_point(&strong(), 1, M, DEFAULT_TOL)?;
    let back = inversion_map(&inversion_map(&cert.phi1)?)?;
    let inv_err =
        cert.phi1.coeffs.indices().fold(0.0f64, |m, i| m.max((back.coeffs.get(i) - cert.phi1.coeffs.get(i)).norm()));
    ok &= inv_err < 1e-14;
    notes.push(format!("involution {inv_err:.1e}"));

    let plus = band_sweep(&strong().plus(&w135().scaled(0.3)), 33, M, 6)?;
    let minus = band_sweep(&strong().plus(&w135().scaled(-0.3)), 33, M, 6)?;
    let pm =
        plus.bands.iter().flatten().zip(minus.bands.iter().flatten()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    ok &= pm < 1e-10;
    notes.push(format!("H+/H- bands {pm:.1e}"));

    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    let tq = certify_dirac_point(&strong(), 0, M, DEFAULT_TOL)?;
    let theta_q = rel(
        theta_by_quadrature(&tq.phi1.coeffs, &tq.phi2.coeffs, &w135(), 1024).re,
        theta_by_quadrature(&tq.phi1.coeffs, &tq.phi2.coeffs, &w135(), 2048).re,
    );
    let unit = DiracSpec::new(1.0, 1.0, DomainWall::tanh(1.0))?;
    let gamma = rel(zero_mode(&unit, 30.0, 4096)?.gamma0, zero_mode(&unit, 30.0, 8192)?.gamma0);
    let free_cert = certify_dirac_point(&free(), 0, M, DEFAULT_TOL)?.with_theta(&w1())?;
    let spec = DiracSpec::new(free_cert.lambda_sharp, free_cert.theta()?, DomainWall::tanh(1.0))?;
    let e2_at = |n: usize| -> Result<f64> {
        let zm = zero_mode(&spec, spec.default_x_max(), n)?;
        Ok(compute_e2(&free_cert, &solve_corrector(&free_cert, &w1(), &zm, M)?, &zm)?.value)
    };
    let e2 = rel(e2_at(8192)?, e2_at(16384)?);
    let quad = theta_q.max(gamma).max(e2);
    ok &= quad < 1e-7;
    notes.push(format!("quadrature doubling: theta {theta_q:.1e}, gamma0 {gamma:.1e}, E2 {e2:.1e}"));

    Ok((ok, notes.join("; ")))
}
