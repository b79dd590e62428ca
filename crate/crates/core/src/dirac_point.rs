//! Certification of linear band crossings at `k = pi` and the quantities
//! `lambda_sharp` (crossing slope) and `theta_sharp` (odd-perturbation coupling).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{bloch_spectrum, inversion_map, parity_spectrum, BlochMode, FourierCoeffs, Sector};
use crate::error::{Error, Result};
use crate::potential::CosineSeries;

/// Relative degeneracy tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Relative tolerance on the band-slope check.
pub const SLOPE_TOL: f64 = 1e-3;
const SLOPE_DK: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracPointCertificate {
    /// Pair index: the `(n + 1)`-th eigenvalue of each sector.
    pub n: usize,
    /// 1-based label of the lower band of the crossing pair, `2n + 1`.
    pub b_star: usize,
    pub e_star: f64,
    /// Sector mode continuing `e^{i (2n + 1) pi x}`; see [`phi1_sectors`].
    pub phi1: BlochMode,
    /// `inversion_map(phi1)`.
    pub phi2: BlochMode,
    pub lambda_sharp: f64,
    pub theta_sharp: Option<f64>,
    pub degeneracy_residual: f64,
    pub slope_residual: f64,
    pub m_max: usize,
    pub v: CosineSeries,
}

impl DiracPointCertificate {
    pub fn theta(&self) -> Result<f64> {
        self.theta_sharp.ok_or(Error::ThetaUnset)
    }

    /// Fills `theta_sharp` for the odd perturbation `w`.
    pub fn with_theta(mut self, w: &CosineSeries) -> Result<Self> {
        self.theta_sharp = Some(theta_sharp(&self.phi1, &self.phi2, w)?);
        Ok(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: Vec<(i64, f64, f64)> = self
            .phi1
            .coeffs
            .indices()
            .filter(|&m| m.rem_euclid(2) == self.n as i64 % 2)
            .map(|m| {
                let c = self.phi1.coeffs.get(m);
                (m, c.re, c.im)
            })
            .collect();
        serde_json::json!({
            "n": self.n,
            "E_star": self.e_star,
            "lambda_sharp": self.lambda_sharp,
            "theta_sharp": self.theta_sharp,
            "degeneracy_residual": self.degeneracy_residual,
            "slope_residual": self.slope_residual,
            "coeffs_phi1": coeffs,
        })
    }
}

/// `-2 pi (2 sum_m m |c(m)|^2 + 1)`.
pub fn lambda_sharp(phi1: &BlochMode) -> Result<f64> {
    let norm = phi1.coeffs.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized(norm));
    }
    let moment: f64 = phi1.coeffs.indices().map(|m| m as f64 * phi1.coeffs.get(m).norm_sqr()).sum();
    Ok(-2.0 * PI * (2.0 * moment + 1.0))
}

/// `<Phi1, W Phi2> = sum conj(c1(m)) What(m - m') c2(m')`.
pub fn theta_sharp(phi1: &BlochMode, phi2: &BlochMode, w: &CosineSeries) -> Result<f64> {
    if !w.is_odd_index() {
        return Err(Error::WrongParity { expected: "odd-index" });
    }
    let value = theta_complex(&phi1.coeffs, &phi2.coeffs, w);
    if value.im.abs() > 1e-12 {
        return Err(Error::PhaseConvention(value.im));
    }
    Ok(value.re)
}

fn theta_complex(c1: &FourierCoeffs, c2: &FourierCoeffs, w: &CosineSeries) -> Complex64 {
    c1.inner(&c2.multiply(w))
}

/// Sector of `Phi1` for pair `n`, then the sector of `Phi2`. `Phi1` continues
/// the free mode `e^{i (2n + 1) pi x}`, whose Fourier index `n` has the parity of `n`.
pub fn phi1_sectors(n: usize) -> (Sector, Sector) {
    if n.is_multiple_of(2) {
        (Sector::EvenIndex, Sector::OddIndex)
    } else {
        (Sector::OddIndex, Sector::EvenIndex)
    }
}

/// Index of the eigenvector among `modes` with the largest overlap with `target`.
fn tracked(modes: &[BlochMode], target: &FourierCoeffs) -> usize {
    let mut best = 0;
    let mut best_overlap = -1.0;
    for (i, m) in modes.iter().enumerate() {
        let o = m.coeffs.inner(target).norm();
        if o > best_overlap {
            best_overlap = o;
            best = i;
        }
    }
    best
}

pub fn certify_dirac_point(v: &CosineSeries, n: usize, m_max: usize, tol: f64) -> Result<DiracPointCertificate> {
    if !v.is_even_index() {
        return Err(Error::WrongParity { expected: "even-index" });
    }
    let (first, second) = phi1_sectors(n);
    let own = parity_spectrum(v, first, m_max, n + 1)?;
    let other = parity_spectrum(v, second, m_max, n + 1)?;
    let e_star = own[n].energy;
    let residual = (own[n].energy - other[n].energy).abs();
    let scaled_tol = tol * e_star.abs().max(1.0);
    if residual >= scaled_tol {
        return Err(Error::NotDegenerate { residual, tol: scaled_tol });
    }
    let phi1 = own[n].clone();
    let phi2 = inversion_map(&phi1)?;
    let lambda = lambda_sharp(&phi1)?;
    if lambda.abs() < 1e-8 {
        return Err(Error::LambdaVanishes(lambda));
    }

    // follow the branch through Phi2; its slope is +lambda_sharp
    let b = 2 * n;
    let slope_of = |k: f64| -> Result<f64> {
        let modes = bloch_spectrum(v, k, m_max, b + 2)?;
        let pair = &modes[b..b + 2];
        Ok(pair[tracked(pair, &phi2.coeffs)].energy)
    };
    let measured = (slope_of(PI + SLOPE_DK)? - slope_of(PI - SLOPE_DK)?) / (2.0 * SLOPE_DK);
    let slope_residual = (measured - lambda).abs() / lambda.abs();
    if slope_residual > SLOPE_TOL {
        return Err(Error::SlopeMismatch { measured, predicted: lambda, relative: slope_residual });
    }
    let mut phi1 = phi1;
    phi1.band = b + 1;
    let mut phi2 = phi2;
    phi2.band = b + 2;
    Ok(DiracPointCertificate {
        n,
        b_star: b + 1,
        e_star,
        phi1,
        phi2,
        lambda_sharp: lambda,
        theta_sharp: None,
        degeneracy_residual: residual,
        slope_residual,
        m_max,
        v: v.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K0Splitting {
    pub e_minus: f64,
    pub e_plus: f64,
    pub perturbative: (f64, f64),
}

impl K0Splitting {
    /// Largest deviation of the numeric pair from the first-order prediction.
    pub fn residual(&self) -> f64 {
        (self.e_minus - self.perturbative.0).abs().max((self.e_plus - self.perturbative.1).abs())
    }
}

/// The pair of `k = 0` eigenvalues of `-d^2 + eps V` near `(2 n pi)^2` and the
/// first-order prediction `(2 n pi)^2 + eps (v_0 -+ |v_{2n}| / 2)`.
pub fn k0_splitting(v: &CosineSeries, n: usize, eps: f64, m_max: usize) -> Result<K0Splitting> {
    if n == 0 {
        return Err(Error::Inconsistent("k = 0 splitting needs n >= 1".into()));
    }
    let q = v.scaled(eps);
    let modes = bloch_spectrum(&q, 0.0, m_max, 2 * n + 2)?;
    let center = (2.0 * n as f64 * PI).powi(2);
    let (e_minus, e_plus) = (modes[2 * n - 1].energy, modes[2 * n].energy);
    let below = modes[2 * n - 2].energy;
    let above = modes[2 * n + 1].energy;
    let spread = (e_minus - center).abs().max((e_plus - center).abs());
    if spread >= 0.5 * (center - below).min(above - center) {
        return Err(Error::NotSeparable(eps));
    }
    // Fourier coefficient of cos(2 pi p x) at +-p is half its cosine coefficient
    let half = 0.5 * v.coefficient(2 * n as u32).abs();
    let perturbative = (center + eps * (v.constant() - half), center + eps * (v.constant() + half));
    Ok(K0Splitting { e_minus, e_plus, perturbative })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPrediction {
    pub delta: f64,
    pub kappa_inf: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `E_star -+ sqrt(delta^2 kappa^2 theta^2 + k'^2 lambda^2)`. At `delta = 0` any `k'` is accepted.
pub fn gap_edges_formula(cert: &DiracPointCertificate, delta: f64, kappa_inf: f64, kprime: f64) -> Result<(f64, f64)> {
    let theta = cert.theta()?;
    if delta > 0.0 && kprime.abs() >= delta {
        return Err(Error::OutsideValidity { kprime, delta });
    }
    let half = ((delta * kappa_inf * theta).powi(2) + (kprime * cert.lambda_sharp).powi(2)).sqrt();
    Ok((cert.e_star - half, cert.e_star + half))
}

pub fn gap_prediction(cert: &DiracPointCertificate, delta: f64, kappa_inf: f64) -> Result<GapPrediction> {
    let (lower, upper) = gap_edges_formula(cert, delta, kappa_inf, 0.0)?;
    Ok(GapPrediction { delta, kappa_inf, lower, upper })
}

/// `int_0^1 conj(Phi1) W Phi2 dx` by the rectangle rule, exact for trigonometric integrands.
pub fn theta_by_quadrature(c1: &FourierCoeffs, c2: &FourierCoeffs, w: &CosineSeries, points: usize) -> Complex64 {
    let eval = |c: &FourierCoeffs, x: f64| -> Complex64 {
        c.indices().map(|m| c.get(m) * Complex64::from_polar(1.0, (PI + 2.0 * PI * m as f64) * x)).sum()
    };
    let h = 1.0 / points as f64;
    (0..points)
        .map(|i| {
            let x = i as f64 * h;
            eval(c1, x).conj() * w.eval(x) * eval(c2, x)
        })
        .sum::<Complex64>()
        * h
}
