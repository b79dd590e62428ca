//! Direct finite-difference solution of `H_delta = -d^2/dx^2 + V + delta kappa(delta x) W`
//! on a large Dirichlet box: the essential gap from the periodic end operator,
//! mid-gap eigenpairs by Sturm bisection with Richardson extrapolation in `h`,
//! and bifurcation sweeps over `delta`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::band_sweep;
use crate::dirac_point::DiracPointCertificate;
use crate::error::{Error, Result};
use crate::multiscale::Ansatz;
use crate::potential::{CosineSeries, DomainWall, ModulatedPotential};
use crate::tridiag::{SymTridiagonal, BISECTION_TOL, WINDOW_LIMIT};

pub const DEFAULT_H: f64 = 1.0 / 64.0;
const LEAK_LIMIT: f64 = 1e-8;
const RESIDUAL_LIMIT: f64 = 1e-8;
const MIN_HALF_LENGTH: f64 = 16.0;
const MAX_HALF_LENGTH: f64 = 8000.0;

/// Uniform interior grid `x_i = -L + (i + 1) h`, `i < N = 2L/h - 1`, with
/// Dirichlet conditions at `+-L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealSpaceGrid {
    pub half_length: f64,
    pub h: f64,
    pub n: usize,
}

impl RealSpaceGrid {
    /// `L` is rounded up to an integer so both walls sit at symmetry points of the period.
    pub fn new(half_length: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0 / 32.0) {
            return Err(Error::GridTooCoarse(format!("spacing {h} must not exceed 1/32")));
        }
        let cells_per_unit = (1.0 / h).round();
        if ((1.0 / h) - cells_per_unit).abs() > 1e-9 {
            return Err(Error::Inconsistent(format!("spacing {h} must divide the unit period")));
        }
        let half_length = half_length.ceil().max(1.0);
        let n = (2.0 * half_length * cells_per_unit) as usize - 1;
        Ok(RealSpaceGrid { half_length, h: 1.0 / cells_per_unit, n })
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + (i + 1) as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn refined(&self) -> Self {
        RealSpaceGrid { half_length: self.half_length, h: self.h / 2.0, n: 2 * self.n + 1 }
    }
}

/// The finite-difference operator `diag = 2/h^2 + U(x_i)`, `offdiag = -1/h^2`.
pub fn assemble(u: &ModulatedPotential, grid: &RealSpaceGrid) -> Result<SymTridiagonal> {
    let potential = (0..grid.n).into_par_iter().map(|i| u.eval(grid.x(i))).collect::<Result<Vec<f64>>>()?;
    Ok(SymTridiagonal::finite_difference(potential, grid.h, 1.0))
}

/// Gap of `-d^2 + V + delta kappa_+inf W` between bands `2n + 1` and `2n + 2`.
pub fn essential_gap(
    v: &CosineSeries,
    w: &CosineSeries,
    wall: &DomainWall,
    delta: f64,
    n: usize,
    m_max: usize,
    k_samples: usize,
) -> Result<(f64, f64)> {
    let q = v.plus(&w.scaled(delta * wall.limit_plus()));
    let bands = band_sweep(&q, k_samples, m_max, 2 * n + 2)?;
    let lower = bands.band(2 * n).fold(f64::NEG_INFINITY, f64::max);
    let upper = bands.band(2 * n + 1).fold(f64::INFINITY, f64::min);
    if upper - lower <= 1e-9 * lower.abs().max(1.0) {
        return Err(Error::NoGap { lower, upper });
    }
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeOptions {
    /// Box half-length; chosen from the envelope decay rate when absent.
    pub half_length: Option<f64>,
    /// Coarsest spacing of the Richardson hierarchy.
    pub h: f64,
    /// Number of spacings `h, h/2, ...` (1 to 3).
    pub levels: usize,
    pub m_max: usize,
    pub k_samples: usize,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        EdgeOptions { half_length: None, h: DEFAULT_H, levels: 3, m_max: 24, k_samples: 65 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEigenpair {
    /// Extrapolated eigenvalue.
    pub e_delta: f64,
    /// Raw eigenvalues, coarsest spacing first.
    pub raw: Vec<f64>,
    /// Eigenvector on the finest grid with `h sum psi^2 = 1`.
    pub psi: Vec<f64>,
    pub grid: RealSpaceGrid,
    pub gap: (f64, f64),
    /// `||T psi - E psi|| / ||psi||` on the finest grid.
    pub residual: f64,
    /// `max |psi|` within one period of either wall.
    pub leak: f64,
}

impl EdgeEigenpair {
    /// CSV dump: `x, psi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,psi\n");
        for (i, p) in self.psi.iter().enumerate() {
            out.push_str(&format!("{:.16e},{p:.16e}\n", self.grid.x(i)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSearch {
    pub delta: f64,
    pub gap: (f64, f64),
    /// Eigenvalue window: the gap shrunk by 1% per side, and for `theta = 0`
    /// also limited to `E_star +- delta^{3/2} / 2`.
    pub window: (f64, f64),
    pub theta_zero: bool,
    pub half_length: f64,
    pub states: Vec<EdgeEigenpair>,
}

fn auto_half_length(cert: &DiracPointCertificate, wall: &DomainWall, delta: f64) -> f64 {
    let theta = cert.theta_sharp.unwrap_or(0.0);
    let kappa = wall.limit_plus().abs().min(wall.limit_minus().abs());
    let rate = delta * (theta * kappa / cert.lambda_sharp).abs();
    let l = if rate > 1e-12 { 30.0 / rate } else { 60.0 / delta };
    l.clamp(MIN_HALF_LENGTH, MAX_HALF_LENGTH).ceil()
}

/// Richardson extrapolation of `h^2`-accurate values at spacings `h, h/2, h/4, ...`.
pub fn richardson(values: &[f64]) -> f64 {
    let mut table = values.to_vec();
    let mut factor = 4.0;
    while table.len() > 1 {
        table = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    table[0]
}

fn leak(psi: &[f64], grid: &RealSpaceGrid) -> f64 {
    let edge = ((1.0 / grid.h).round() as usize).min(grid.n);
    psi[..edge].iter().chain(&psi[grid.n - edge..]).fold(0.0, |m, v| m.max(v.abs()))
}

fn search_box(
    u: &ModulatedPotential,
    half_length: f64,
    opts: &EdgeOptions,
    window: (f64, f64),
    gap: (f64, f64),
) -> Result<Vec<EdgeEigenpair>> {
    let coarse = RealSpaceGrid::new(half_length, opts.h)?;
    let mut grids = vec![coarse];
    for _ in 1..opts.levels {
        let last = *grids.last().unwrap();
        grids.push(last.refined());
    }
    let ops = grids.iter().map(|g| assemble(u, g)).collect::<Result<Vec<_>>>()?;
    let fine = ops.last().unwrap();
    let fine_grid = *grids.last().unwrap();
    // finite differences lower a continuum energy E by about h^2 E^2 / 12
    let shifted = |e: f64| e - fine_grid.h * fine_grid.h * e * e / 12.0;
    let c_lo = fine.sturm_count(shifted(window.0));
    let c_hi = fine.sturm_count(shifted(window.1));
    if c_hi - c_lo > WINDOW_LIMIT {
        return Err(Error::WindowTooWide { lower: window.0, upper: window.1, count: c_hi - c_lo });
    }
    let mut states = Vec::new();
    for j in c_lo..c_hi {
        let raw: Vec<f64> = ops
            .par_iter()
            .map(|op| {
                let (lo, hi) = op.gershgorin();
                op.eigenvalue_by_index(j, lo - 1.0, hi + 1.0, BISECTION_TOL)
            })
            .collect();
        let e_delta = richardson(&raw);
        if !(e_delta > window.0 && e_delta < window.1) {
            continue;
        }
        let e_fine = *raw.last().unwrap();
        let unit = fine.inverse_iteration(e_fine, &[])?;
        let residual = fine.residual(e_fine, &unit);
        if residual > RESIDUAL_LIMIT * (1.0 + e_fine.abs()) {
            return Err(Error::NoConvergence(format!("edge eigenvector residual {residual:e} at E = {e_fine}")));
        }
        let scale = fine_grid.h.sqrt().recip();
        let psi: Vec<f64> = unit.iter().map(|v| v * scale).collect();
        let leak = leak(&psi, &fine_grid);
        states.push(EdgeEigenpair { e_delta, raw, psi, grid: fine_grid, gap, residual, leak });
    }
    Ok(states)
}

/// All eigenpairs of `H_delta` strictly inside the measured essential gap.
pub fn find_edge_states(
    v: &CosineSeries,
    w: &CosineSeries,
    wall: &DomainWall,
    delta: f64,
    cert: &DiracPointCertificate,
    opts: &EdgeOptions,
) -> Result<EdgeSearch> {
    if !(delta > 0.0) {
        return Err(Error::Inconsistent(format!("edge search needs delta > 0, got {delta}")));
    }
    if !(1..=3).contains(&opts.levels) {
        return Err(Error::Inconsistent(format!("{} Richardson levels requested (1 to 3 supported)", opts.levels)));
    }
    let u = ModulatedPotential::new(v.clone(), w.clone(), wall.clone(), delta)?;
    let gap = essential_gap(v, w, wall, delta, cert.n, opts.m_max, opts.k_samples)?;
    let width = gap.1 - gap.0;
    let mut window = (gap.0 + 0.01 * width, gap.1 - 0.01 * width);
    let theta_zero = cert.theta_sharp.is_none_or(|t| t.abs() < 1e-12);
    if theta_zero {
        let half = 0.5 * delta.powf(1.5);
        window = (window.0.max(cert.e_star - half), window.1.min(cert.e_star + half));
    }
    let mut half_length = opts.half_length.map_or_else(|| auto_half_length(cert, wall, delta), f64::ceil);
    let mut states = Vec::new();
    if window.0 < window.1 {
        states = search_box(&u, half_length, opts, window, gap)?;
        if states.iter().any(|s| s.leak > LEAK_LIMIT) {
            half_length *= 2.0;
            states = search_box(&u, half_length, opts, window, gap)?;
            if let Some(s) = states.iter().find(|s| s.leak > LEAK_LIMIT) {
                return Err(Error::BoundaryLeak(s.leak));
            }
        }
    }
    Ok(EdgeSearch { delta, gap, window, theta_zero, half_length, states })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub delta: f64,
    pub point_index: usize,
    /// `None` when the bands overlap at this `delta`.
    pub gap: Option<(f64, f64)>,
    pub energies: Vec<f64>,
    /// No first-order gap prediction (`theta_sharp = 0`).
    pub theta_zero: bool,
    /// Why the row carries no gap or no resolved states, if so.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub delta_values: Vec<f64>,
    /// `E_star` of each tracked point: every branch starts there at `delta = 0`.
    pub e_star: Vec<f64>,
    pub rows: Vec<BifurcationPoint>,
}

impl BifurcationDiagram {
    /// CSV: `delta, point_index, gap_lower, gap_upper, E_edge`, one row per
    /// in-gap eigenvalue and a blank `E_edge` when there is none. Rows whose
    /// states leak through the box are reported like empty rows; see `note`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,point_index,gap_lower,gap_upper,E_edge\n");
        for r in &self.rows {
            let (lo, hi) =
                r.gap.map_or((String::new(), String::new()), |(a, b)| (format!("{a:.16e}"), format!("{b:.16e}")));
            let prefix = format!("{:.16e},{},{lo},{hi}", r.delta, r.point_index);
            if r.energies.is_empty() {
                out.push_str(&format!("{prefix},\n"));
            }
            for e in &r.energies {
                out.push_str(&format!("{prefix},{e:.16e}\n"));
            }
        }
        out
    }

    pub fn branch(&self, point_index: usize) -> impl Iterator<Item = &BifurcationPoint> {
        self.rows.iter().filter(move |r| r.point_index == point_index)
    }
}

pub fn bifurcation_sweep(
    v: &CosineSeries,
    w: &CosineSeries,
    wall: &DomainWall,
    delta_list: &[f64],
    dirac_points: &[DiracPointCertificate],
    opts: &EdgeOptions,
) -> Result<BifurcationDiagram> {
    if delta_list.iter().any(|&d| !(d > 0.0)) || delta_list.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::Inconsistent("delta list must be positive and ascending".into()));
    }
    let jobs: Vec<(usize, usize)> =
        (0..delta_list.len()).flat_map(|d| (0..dirac_points.len()).map(move |p| (d, p))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(d, p)| {
            let delta = delta_list[d];
            let cert = &dirac_points[p];
            let theta_zero = cert.theta_sharp.is_none_or(|t| t.abs() < 1e-12);
            let empty = |gap, note: String| BifurcationPoint {
                delta,
                point_index: p,
                gap,
                energies: Vec::new(),
                theta_zero,
                note: Some(note),
            };
            match find_edge_states(v, w, wall, delta, cert, opts) {
                Ok(s) => Ok(BifurcationPoint {
                    delta,
                    point_index: p,
                    gap: Some(s.gap),
                    energies: s.states.iter().map(|e| e.e_delta).collect(),
                    theta_zero: s.theta_zero,
                    note: None,
                }),
                Err(e @ Error::NoGap { .. }) => Ok(empty(None, e.to_string())),
                Err(e @ Error::BoundaryLeak(_)) => {
                    let gap = essential_gap(v, w, wall, delta, cert.n, opts.m_max, opts.k_samples)?;
                    Ok(empty(Some(gap), e.to_string()))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationDiagram {
        delta_values: delta_list.to_vec(),
        e_star: dirac_points.iter().map(|c| c.e_star).collect(),
        rows,
    })
}

/// Value at `delta = 0` of `E = E0 + c delta^2` through two samples.
pub fn extrapolate_to_zero((d1, e1): (f64, f64), (d2, e2): (f64, f64)) -> f64 {
    (d2 * d2 * e1 - d1 * d1 * e2) / (d2 * d2 - d1 * d1)
}

/// Discrete `H^2` distance between the finite-difference eigenvector and the
/// leading ansatz term after matching norm and global phase.
pub fn h2_discrepancy(pair: &EdgeEigenpair, ansatz: &Ansatz) -> Result<f64> {
    let target = &ansatz.leading.value;
    if target.len() != pair.psi.len() {
        return Err(Error::Inconsistent(format!(
            "ansatz has {} samples, eigenvector {}",
            target.len(),
            pair.psi.len()
        )));
    }
    let h = pair.grid.h;
    let norm = |v: &[Complex64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
    let psi: Vec<Complex64> = pair.psi.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    let (np, nt) = (norm(&psi), norm(target));
    let overlap: Complex64 = psi.iter().zip(target).map(|(p, t)| p.conj() * t).sum::<Complex64>() * h;
    if overlap.norm() < 1e-3 * np * nt {
        return Err(Error::DegenerateAlignment(overlap.norm() / (np * nt)));
    }
    let phase = overlap / overlap.norm();
    let scale = nt / np;
    let diff: Vec<Complex64> = psi.iter().zip(target).map(|(p, t)| p * phase * scale - t).collect();
    let d1: Vec<Complex64> = diff.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let d2: Vec<Complex64> = diff.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (h * h)).collect();
    Ok((norm(&diff).powi(2) + norm(&d1).powi(2) + norm(&d2).powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac_point::{certify_dirac_point, DEFAULT_TOL};
    use crate::multiscale::SampledFunction;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn w135() -> CosineSeries {
        CosineSeries::odd([(1, 2.0), (3, 2.0), (5, 2.0)]).unwrap()
    }

    fn cert(n: usize, w: &CosineSeries) -> DiracPointCertificate {
        certify_dirac_point(&CosineSeries::zero(), n, 24, DEFAULT_TOL).unwrap().with_theta(w).unwrap()
    }

    #[test]
    fn grid_layout() {
        let g = RealSpaceGrid::new(10.3, 1.0 / 64.0).unwrap();
        assert_eq!(g.half_length, 11.0);
        assert_eq!(g.n, 22 * 64 - 1);
        assert_abs_diff_eq!(g.x(0), -11.0 + 1.0 / 64.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.x(g.n - 1), 11.0 - 1.0 / 64.0, epsilon = 1e-12);
        assert_eq!(g.refined().n, 22 * 128 - 1);
        assert!(RealSpaceGrid::new(10.0, 0.05).is_err());
    }

    #[test]
    fn richardson_removes_h2_and_h4() {
        let f = |h: f64| 3.0 + 2.0 * h * h - 5.0 * h.powi(4);
        assert_abs_diff_eq!(richardson(&[f(0.1), f(0.05), f(0.025)]), 3.0, epsilon = 1e-12);
        assert_eq!(richardson(&[1.5]), 1.5);
    }

    #[test]
    fn gap_examples() {
        let v = CosineSeries::zero();
        let wall = DomainWall::tanh(1.0);
        assert!(matches!(essential_gap(&v, &w135(), &wall, 0.0, 0, 24, 65), Err(Error::NoGap { .. })));
        let (lo, hi) = essential_gap(&v, &w135(), &wall, 0.05, 0, 24, 65).unwrap();
        let ratio = (hi - lo) / (2.0 * 0.05);
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
        // the half-period shift maps H_{delta,+} onto H_{delta,-}
        let plus = band_sweep(&v.plus(&w135().scaled(0.3)), 33, 24, 6).unwrap();
        let minus = band_sweep(&v.plus(&w135().scaled(-0.3)), 33, 24, 6).unwrap();
        for (a, b) in plus.bands.iter().zip(&minus.bands) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gap_formula_inside_bands() {
        let c = cert(0, &w135());
        let delta = 0.05;
        let (lo, hi) = essential_gap(&CosineSeries::zero(), &w135(), &DomainWall::tanh(1.0), delta, 0, 24, 65).unwrap();
        let (flo, fhi) = crate::dirac_point::gap_edges_formula(&c, delta, 1.0, delta / 2.0).unwrap();
        assert!(flo < lo + delta * delta && fhi > hi - delta * delta);
    }

    #[test]
    fn single_edge_state_at_unit_delta() {
        let c = cert(0, &w135());
        let wall = DomainWall::tanh(1.0);
        let s = find_edge_states(&CosineSeries::zero(), &w135(), &wall, 1.0, &c, &EdgeOptions::default()).unwrap();
        assert_eq!(s.states.len(), 1);
        let e = &s.states[0];
        assert!(e.e_delta > s.gap.0 && e.e_delta < s.gap.1);
        assert!(e.residual < 1e-8 && e.leak < 1e-8);
        let norm: f64 = e.psi.iter().map(|p| p * p).sum::<f64>() * e.grid.h;
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-10);
        // h^2 convergence of the raw values
        let d1 = e.raw[1] - e.raw[0];
        let d2 = e.raw[2] - e.raw[1];
        assert!((d1 / d2 - 4.0).abs() < 0.5, "{d1} {d2}");
    }

    #[test]
    fn no_states_without_domain_wall() {
        let c = cert(0, &w135());
        let wall = DomainWall::constant(1.0);
        let s = find_edge_states(&CosineSeries::zero(), &w135(), &wall, 1.0, &c, &EdgeOptions::default()).unwrap();
        assert!(s.states.is_empty());
    }

    #[test]
    fn box_size_independence_and_decay() {
        let c = cert(0, &w135());
        let wall = DomainWall::tanh(1.0);
        let opts = EdgeOptions { levels: 1, half_length: Some(200.0), ..EdgeOptions::default() };
        let a = find_edge_states(&CosineSeries::zero(), &w135(), &wall, 1.0, &c, &opts).unwrap();
        let opts = EdgeOptions { half_length: Some(400.0), ..opts };
        let b = find_edge_states(&CosineSeries::zero(), &w135(), &wall, 1.0, &c, &opts).unwrap();
        assert!((a.states[0].e_delta - b.states[0].e_delta).abs() < 1e-10);

        let e = &b.states[0];
        let g = e.grid;
        // period maxima of |psi| fit an exponential in the mid range
        let peak =
            |x0: f64| (0..g.n).filter(|&i| (g.x(i) - x0).abs() <= 0.5).map(|i| e.psi[i].abs()).fold(0.0, f64::max).ln();
        let slope = (peak(60.0) - peak(20.0)) / 40.0;
        let predicted = -(c.theta().unwrap() / c.lambda_sharp).abs();
        assert!((slope - predicted).abs() < 0.1 * predicted.abs(), "{slope} vs {predicted}");
    }

    #[test]
    fn sweep_flags_vanishing_theta() {
        let w = CosineSeries::odd([(1, 2.0)]).unwrap();
        let certs: Vec<_> = (0..2).map(|n| cert(n, &w)).collect();
        let opts = EdgeOptions { levels: 1, ..EdgeOptions::default() };
        let d =
            bifurcation_sweep(&CosineSeries::zero(), &w, &DomainWall::tanh(1.0), &[1.0, 2.0], &certs, &opts).unwrap();
        assert_eq!(d.rows.len(), 4);
        assert_eq!((d.rows[1].delta, d.rows[1].point_index), (1.0, 1));
        for r in d.branch(0) {
            assert!(!r.theta_zero && !r.energies.is_empty());
        }
        assert!(d.branch(1).all(|r| r.theta_zero));
        let csv = d.to_csv();
        assert!(csv.starts_with("delta,point_index,gap_lower,gap_upper,E_edge\n"));
        assert!(
            bifurcation_sweep(&CosineSeries::zero(), &w, &DomainWall::tanh(1.0), &[2.0, 1.0], &certs, &opts).is_err()
        );
    }

    #[test]
    fn extrapolation_formula() {
        let f = |d: f64| 7.0 + 0.3 * d * d;
        assert_abs_diff_eq!(extrapolate_to_zero((0.1, f(0.1)), (0.2, f(0.2))), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn discrepancy_of_state_with_itself() {
        let grid = RealSpaceGrid::new(4.0, 1.0 / 64.0).unwrap();
        let psi: Vec<f64> = grid.points().iter().map(|x| (-x * x).exp() * (PI * x).cos()).collect();
        let pair = EdgeEigenpair {
            e_delta: 0.0,
            raw: vec![],
            psi: psi.clone(),
            grid,
            gap: (0.0, 1.0),
            residual: 0.0,
            leak: 0.0,
        };
        let phase = Complex64::from_polar(2.0, 0.7);
        let ansatz = Ansatz {
            x: grid.points(),
            delta: 1.0,
            leading: SampledFunction { value: psi.iter().map(|&p| phase * p).collect(), d1: vec![], d2: vec![] },
            correction: SampledFunction::default(),
        };
        assert!(h2_discrepancy(&pair, &ansatz).unwrap() < 1e-9);
        let orthogonal = Ansatz {
            leading: SampledFunction {
                value: grid.points().iter().map(|x| Complex64::new(x * (-x * x).exp() * (PI * x).cos(), 0.0)).collect(),
                d1: vec![],
                d2: vec![],
            },
            ..ansatz
        };
        assert!(matches!(h2_discrepancy(&pair, &orthogonal), Err(Error::DegenerateAlignment(_))));
    }
}
