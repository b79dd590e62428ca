//! The envelope operator `D = i lambda sigma_3 d/dX + theta kappa(X) sigma_1`:
//! its zero mode, essential-spectrum edge, and the spectra of the scalar
//! operators `H_+- = -lambda^2 d^2 + theta^2 kappa^2 +- lambda theta kappa'`
//! into which `D^2` splits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{DomainWall, TabulatedProfile};
use crate::quad::{cumulative_from_center, simpson, simpson_coarse};
use crate::tridiag::SymTridiagonal;

/// Default envelope grid size.
pub const DEFAULT_N: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DiracSpec {
    pub lambda: f64,
    pub theta: f64,
    pub wall: DomainWall,
}

impl DiracSpec {
    pub fn new(lambda: f64, theta: f64, wall: DomainWall) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::LambdaVanishes(lambda));
        }
        Ok(DiracSpec { lambda, theta, wall })
    }

    /// `30 max(1, |lambda / (theta kappa_inf)|)` with the weaker of the two limits.
    pub fn default_x_max(&self) -> f64 {
        let rate = (self.theta * self.wall.limit_plus().abs().min(self.wall.limit_minus().abs())).abs();
        if rate == 0.0 {
            return 30.0;
        }
        30.0 * (self.lambda / rate).abs().max(1.0)
    }

    /// Sign `sigma` of the zero-mode branch `(1, sigma i)`.
    pub fn branch(&self) -> Branch {
        if self.theta / self.lambda * self.wall.limit_plus() > 0.0 {
            Branch::PlusI
        } else {
            Branch::MinusI
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Spinor direction `(1, i)`; annihilated by `H_-`.
    #[serde(rename = "(1,i)")]
    PlusI,
    /// Spinor direction `(1, -i)`; annihilated by `H_+`.
    #[serde(rename = "(1,-i)")]
    MinusI,
}

impl Branch {
    pub fn sigma(self) -> f64 {
        match self {
            Branch::PlusI => 1.0,
            Branch::MinusI => -1.0,
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::PlusI => "(1,i)",
            Branch::MinusI => "(1,-i)",
        })
    }
}

/// Scalar envelope `a = gamma0 f` and its derivatives at one point, with
/// `rho = sigma theta / lambda` so that `a' = -rho kappa a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeJet {
    pub kappa: f64,
    pub a: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// `kappa a` and its first two derivatives.
    pub ka: f64,
    pub ka1: f64,
    pub ka2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMode {
    pub x: Vec<f64>,
    pub alpha1: Vec<Complex64>,
    pub alpha2: Vec<Complex64>,
    pub branch: Branch,
    pub norm_check: f64,
    pub gamma0: f64,
    /// Decay exponent factor: `alpha = gamma0 exp(-rho int_0^X kappa) (1, sigma i)`.
    pub rho: f64,
    pub spec: DiracSpec,
    integral: Vec<f64>,
    h: f64,
}

pub fn zero_mode(spec: &DiracSpec, x_max: f64, n: usize) -> Result<ZeroMode> {
    if !spec.wall.is_domain_wall() {
        return Err(Error::NoZeroMode(format!(
            "wall limits {} and {} do not change sign",
            spec.wall.limit_minus(),
            spec.wall.limit_plus()
        )));
    }
    if spec.theta == 0.0 {
        return Err(Error::NoZeroMode("theta vanishes, so the envelope does not decay".into()));
    }
    if n < 64 {
        return Err(Error::GridTooCoarse(format!("zero mode needs at least 64 intervals, got {n}")));
    }
    if !(x_max > 0.0) {
        return Err(Error::Inconsistent(format!("envelope half-width {x_max} must be positive")));
    }
    let n = n.div_ceil(4) * 4;
    let h = 2.0 * x_max / n as f64;
    let x: Vec<f64> = (0..=n).map(|i| -x_max + h * i as f64).collect();
    let integral = cumulative_from_center(|t| spec.wall.eval(t), x_max, n)?;
    let branch = spec.branch();
    let rho = branch.sigma() * spec.theta / spec.lambda;
    let f: Vec<f64> = integral.iter().map(|i| (-rho * i).exp()).collect();
    let f2: Vec<f64> = f.iter().map(|v| v * v).collect();
    let mass = simpson(&f2, h);
    let gamma0 = (2.0 * mass).sqrt().recip();
    let coarse = 2.0 * gamma0 * gamma0 * simpson_coarse(&f2, h);
    // mass beyond the grid, assuming the asymptotic decay rate there
    let tail = gamma0
        * gamma0
        * (f2[n] / (rho * spec.wall.limit_plus()).abs() + f2[0] / (rho * spec.wall.limit_minus()).abs());
    let norm_check = (coarse - 1.0).abs().max(tail);
    if norm_check > 1e-6 {
        return Err(Error::GridTooCoarse(format!("zero-mode norm check {norm_check:e} exceeds 1e-6")));
    }
    let sigma_i = Complex64::new(0.0, branch.sigma());
    let alpha1: Vec<Complex64> = f.iter().map(|v| Complex64::new(gamma0 * v, 0.0)).collect();
    let alpha2 = alpha1.iter().map(|a| a * sigma_i).collect();
    Ok(ZeroMode { x, alpha1, alpha2, branch, norm_check, gamma0, rho, spec: spec.clone(), integral, h })
}

impl ZeroMode {
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn x_max(&self) -> f64 {
        -self.x[0]
    }

    /// `int_0^X kappa`, off-grid by Simpson from the nearest node, and by the
    /// asymptotic limits beyond the grid.
    pub fn kappa_integral(&self, t: f64) -> Result<f64> {
        let xm = self.x_max();
        let n = self.x.len() - 1;
        if t >= xm {
            return Ok(self.integral[n] + self.spec.wall.limit_plus() * (t - xm));
        }
        if t <= -xm {
            return Ok(self.integral[0] + self.spec.wall.limit_minus() * (t + xm));
        }
        let j = (((t + xm) / self.h).round() as usize).min(n);
        let xj = self.x[j];
        if t == xj {
            return Ok(self.integral[j]);
        }
        let w = &self.spec.wall;
        let piece = (t - xj) / 6.0 * (w.eval(xj)? + 4.0 * w.eval(0.5 * (xj + t))? + w.eval(t)?);
        Ok(self.integral[j] + piece)
    }

    /// The scalar amplitude `a(X) = gamma0 exp(-rho int_0^X kappa)`.
    pub fn amplitude(&self, t: f64) -> Result<f64> {
        Ok(self.gamma0 * (-self.rho * self.kappa_integral(t)?).exp())
    }

    /// `(alpha_1, alpha_2)` at `X`.
    pub fn components(&self, t: f64) -> Result<(Complex64, Complex64)> {
        let a = self.amplitude(t)?;
        Ok((Complex64::new(a, 0.0), Complex64::new(0.0, self.branch.sigma() * a)))
    }

    /// Spinor direction `(1, sigma i)`.
    pub fn direction(&self) -> [Complex64; 2] {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, self.branch.sigma())]
    }

    /// Envelope derivatives from `a' = -rho kappa a`, avoiding numerical differentiation.
    pub fn jet(&self, t: f64) -> Result<EnvelopeJet> {
        let a = self.amplitude(t)?;
        let w = &self.spec.wall;
        let (k, k1, k2) = (w.eval(t)?, w.derivative(t)?, w.second_derivative(t)?);
        let r = self.rho;
        Ok(EnvelopeJet {
            kappa: k,
            a,
            a1: -r * k * a,
            a2: (r * r * k * k - r * k1) * a,
            a3: (3.0 * r * r * k * k1 - r * k2 - r * r * r * k * k * k) * a,
            ka: k * a,
            ka1: (k1 - r * k * k) * a,
            ka2: (k2 - 3.0 * r * k * k1 + r * r * k * k * k) * a,
        })
    }

    /// CSV dump: `X, re(alpha_1), im(alpha_1), re(alpha_2), im(alpha_2)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("X,re_alpha1,im_alpha1,re_alpha2,im_alpha2\n");
        for ((x, a), b) in self.x.iter().zip(&self.alpha1).zip(&self.alpha2) {
            out.push_str(&format!("{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", a.re, a.im, b.re, b.im));
        }
        out
    }
}

/// `min(|theta kappa_+inf|, |theta kappa_-inf|)`.
pub fn essential_edge(spec: &DiracSpec) -> f64 {
    (spec.theta * spec.wall.limit_plus()).abs().min((spec.theta * spec.wall.limit_minus()).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracSquaredSpectrum {
    /// Richardson-extrapolated (grids N and 2N) lowest eigenvalues of `H_+`.
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Raw eigenvalues on the finer grid.
    pub plus_raw: Vec<f64>,
    pub minus_raw: Vec<f64>,
    /// Largest eigenvalue change between grids N and 2N.
    pub max_shift: f64,
}

impl DiracSquaredSpectrum {
    /// The branch that may host the zero mode for the given spinor direction.
    pub fn topological(&self, branch: Branch) -> &[f64] {
        match branch {
            Branch::PlusI => &self.minus,
            Branch::MinusI => &self.plus,
        }
    }
}

fn squared_eigenvalues(spec: &DiracSpec, x_max: f64, n: usize, n_eigs: usize, sign: f64) -> Result<Vec<f64>> {
    let h = 2.0 * x_max / n as f64;
    let lt = spec.lambda * spec.theta;
    let potential = (1..n)
        .map(|i| {
            let t = -x_max + h * i as f64;
            let k = spec.wall.eval(t)?;
            Ok(spec.theta * spec.theta * k * k + sign * lt * spec.wall.derivative(t)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let op = SymTridiagonal::finite_difference(potential, h, spec.lambda * spec.lambda);
    Ok((0..n_eigs.min(n - 1)).map(|j| op.eigenvalue(j)).collect())
}

pub fn dirac_squared_spectrum(spec: &DiracSpec, x_max: f64, n: usize, n_eigs: usize) -> Result<DiracSquaredSpectrum> {
    if n < 64 {
        return Err(Error::GridTooCoarse(format!("need at least 64 intervals, got {n}")));
    }
    let solve = |sign: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let (coarse, fine) = rayon::join(
            || squared_eigenvalues(spec, x_max, n, n_eigs, sign),
            || squared_eigenvalues(spec, x_max, 2 * n, n_eigs, sign),
        );
        Ok((coarse?, fine?))
    };
    let (p, m) = rayon::join(|| solve(1.0), || solve(-1.0));
    let (p, m) = (p?, m?);
    let mut max_shift: f64 = 0.0;
    let mut extrapolate = |(coarse, fine): &(Vec<f64>, Vec<f64>)| -> Vec<f64> {
        coarse
            .iter()
            .zip(fine)
            .map(|(c, f)| {
                max_shift = max_shift.max((f - c).abs());
                (4.0 * f - c) / 3.0
            })
            .collect()
    };
    let plus = extrapolate(&p);
    let minus = extrapolate(&m);
    let scale = plus.iter().chain(&minus).map(|e| e.abs()).fold(1.0, f64::max);
    if max_shift > 1e-3 * scale {
        return Err(Error::NoConvergence(format!("D^2 eigenvalues moved by {max_shift:e} between N and 2N")));
    }
    Ok(DiracSquaredSpectrum { plus, minus, plus_raw: p.1, minus_raw: m.1, max_shift })
}

/// Lowest eigenvalue of the topological branch after adding a compact bump to `kappa`.
pub fn stability_probe(spec: &DiracSpec, bump: TabulatedProfile, x_max: f64, n: usize) -> Result<f64> {
    let perturbed = DiracSpec { wall: spec.wall.with_bump(bump)?, ..spec.clone() };
    let spectrum = dirac_squared_spectrum(&perturbed, x_max, n, 1)?;
    Ok(spectrum.topological(spec.branch())[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn unit() -> DiracSpec {
        DiracSpec::new(1.0, 1.0, DomainWall::tanh(1.0)).unwrap()
    }

    #[test]
    fn unit_zero_mode_is_half_sech() {
        let zm = zero_mode(&unit(), 30.0, 4096).unwrap();
        assert_eq!(zm.branch, Branch::PlusI);
        assert_abs_diff_eq!(zm.gamma0, 0.5, epsilon = 1e-8);
        let c = zm.x.len() / 2;
        assert_abs_diff_eq!(zm.alpha1[c].re, 0.5, epsilon = 1e-8);
        for (i, &x) in zm.x.iter().enumerate().step_by(97) {
            assert_abs_diff_eq!(zm.alpha1[i].re, 0.5 / x.cosh(), epsilon = 1e-8);
            let ratio = zm.alpha2[i] / zm.alpha1[i];
            assert!((ratio - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        }
        assert!(zm.norm_check < 1e-6);
    }

    #[test]
    fn slow_zero_mode_branch() {
        let spec = DiracSpec::new(-2.0 * PI, 1.0, DomainWall::tanh(1.0)).unwrap();
        let zm = zero_mode(&spec, spec.default_x_max(), 4096).unwrap();
        assert_eq!(zm.branch, Branch::MinusI);
        for &x in &[-3.0f64, 0.5, 7.0] {
            let expect = x.cosh().powf(-1.0 / (2.0 * PI));
            assert_abs_diff_eq!(zm.amplitude(x).unwrap() / zm.gamma0, expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn no_zero_mode_for_sign_definite_wall() {
        let spec = DiracSpec::new(1.0, 1.0, DomainWall::constant(1.0)).unwrap();
        assert!(matches!(zero_mode(&spec, 30.0, 4096), Err(Error::NoZeroMode(_))));
        assert!(matches!(zero_mode(&unit(), 30.0, 32), Err(Error::GridTooCoarse(_))));
        assert!(matches!(zero_mode(&unit(), 3.0, 4096), Err(Error::GridTooCoarse(_))));
        assert!(DiracSpec::new(0.0, 1.0, DomainWall::tanh(1.0)).is_err());
    }

    #[test]
    fn dirac_residual_vanishes() {
        let spec = DiracSpec::new(1.3, -0.7, DomainWall::scaled_tanh(-1.0, 2.0, 1.5).unwrap()).unwrap();
        let zm = zero_mode(&spec, spec.default_x_max(), 4096).unwrap();
        let h = zm.spacing();
        let i_unit = Complex64::new(0.0, 1.0);
        let (mut res, mut norm) = (0.0, 0.0);
        for i in 1..zm.x.len() - 1 {
            let k = spec.wall.eval(zm.x[i]).unwrap();
            let d1 = (zm.alpha1[i + 1] - zm.alpha1[i - 1]) / (2.0 * h);
            let d2 = (zm.alpha2[i + 1] - zm.alpha2[i - 1]) / (2.0 * h);
            let r1 = i_unit * spec.lambda * d1 + spec.theta * k * zm.alpha2[i];
            let r2 = -i_unit * spec.lambda * d2 + spec.theta * k * zm.alpha1[i];
            res += r1.norm_sqr() + r2.norm_sqr();
            norm += zm.alpha1[i].norm_sqr() + zm.alpha2[i].norm_sqr();
        }
        assert!((res / norm).sqrt() < 1e-4);
    }

    #[test]
    fn envelope_decay_rate() {
        let spec = DiracSpec::new(2.0, 1.5, DomainWall::tanh(1.0)).unwrap();
        let zm = zero_mode(&spec, 40.0, 4096).unwrap();
        let rate = (spec.theta / spec.lambda).abs();
        let (x0, x1) = (20.0, 36.0);
        let slope = (zm.amplitude(x1).unwrap().ln() - zm.amplitude(x0).unwrap().ln()) / (x1 - x0);
        assert!((slope + rate).abs() < 0.02 * rate);
    }

    #[test]
    fn off_grid_matches_closed_form() {
        let zm = zero_mode(&unit(), 30.0, 1024).unwrap();
        for &x in &[0.0137, -2.3331, 29.99, 35.0, -41.0] {
            assert_abs_diff_eq!(zm.amplitude(x).unwrap(), 0.5 / f64::cosh(x), epsilon = 1e-7);
        }
        let j = zm.jet(0.8).unwrap();
        let h = 1e-4;
        let fd = (zm.amplitude(0.8 + h).unwrap() - zm.amplitude(0.8 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(j.a1, fd, epsilon = 1e-8);
        let fd2 = (zm.jet(0.8 + h).unwrap().a2 - zm.jet(0.8 - h).unwrap().a2) / (2.0 * h);
        assert_abs_diff_eq!(j.a3, fd2, epsilon = 1e-7);
        let fdk = (zm.jet(0.8 + h).unwrap().ka1 - zm.jet(0.8 - h).unwrap().ka1) / (2.0 * h);
        assert_abs_diff_eq!(j.ka2, fdk, epsilon = 1e-7);
    }

    #[test]
    fn essential_edge_examples() {
        let s = DiracSpec::new(1.0, 2.0, DomainWall::tanh(1.0)).unwrap();
        assert_eq!(essential_edge(&s), 2.0);
        let s = DiracSpec::new(1.0, 0.0, DomainWall::tanh(1.0)).unwrap();
        assert_eq!(essential_edge(&s), 0.0);
        let s = DiracSpec::new(1.0, 1.0, DomainWall::scaled_tanh(3.0, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(essential_edge(&s), 1.0);
    }

    #[test]
    fn squared_spectra() {
        let sp = dirac_squared_spectrum(&unit(), 30.0, 4096, 3).unwrap();
        assert!(sp.minus[0].abs() < 1e-6, "{}", sp.minus[0]);
        assert!(sp.plus[0] > 1.0 - 1e-3);
        assert!(sp.topological(Branch::PlusI)[0].abs() < 1e-6);
        let flat = DiracSpec::new(1.0, 0.8, DomainWall::constant(1.0)).unwrap();
        let sp = dirac_squared_spectrum(&flat, 30.0, 1024, 1).unwrap();
        assert!((sp.plus[0] - 0.64).abs() < 0.01 && (sp.minus[0] - 0.64).abs() < 0.01);
        assert!(sp.plus[0] > 0.64 - 1e-3);
    }

    fn smooth_bump(amp: f64) -> TabulatedProfile {
        TabulatedProfile::smooth_bump(amp, 2.0, 3.0, 6001).unwrap()
    }

    #[test]
    fn topological_stability() {
        let e = stability_probe(&unit(), smooth_bump(0.5), 30.0, 4096).unwrap();
        assert!(e.abs() < 1e-5, "{e}");
        let unchanged = stability_probe(&unit(), smooth_bump(0.0), 30.0, 4096).unwrap();
        assert_abs_diff_eq!(
            unchanged,
            dirac_squared_spectrum(&unit(), 30.0, 4096, 1).unwrap().minus[0],
            epsilon = 1e-12
        );
        let bad = TabulatedProfile::sample(|x| -x.tanh(), -30.0, 30.0, 601, 0.0, 0.0, 30.0).unwrap();
        assert!(matches!(stability_probe(&unit(), bad, 30.0, 1024), Err(Error::BumpNotCompact)));
    }
}
