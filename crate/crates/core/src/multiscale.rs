//! Two-scale expansion of the edge state: the leading term
//! `psi0 = sum_j alpha_j(X) Phi_j(x)`, the particular corrector `psi1_p`
//! obtained from the resolvent at `E_star` on the complement of the Dirac
//! pair, and the second-order energy `E2` fixed by solvability at order `delta^2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{sector_eigensystem, FourierCoeffs};
use crate::dirac_point::{phi1_sectors, DiracPointCertificate};
use crate::effective_dirac::{EnvelopeJet, ZeroMode};
use crate::error::{Error, Result};
use crate::potential::CosineSeries;
use crate::quad::{simpson, simpson_coarse};

const K_STAR: f64 = std::f64::consts::PI;
const ZERO_TERM: f64 = 1e-14;
const IMAG_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeKind {
    /// `alpha_j'`.
    AlphaPrime,
    /// `kappa alpha_j`.
    KappaAlpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm {
    /// Resolvent image `R(E_star) P f` of the source x-part.
    pub x_part: FourierCoeffs,
    /// The projected source `P f` itself.
    pub source: FourierCoeffs,
    pub envelope: EnvelopeKind,
    /// Which of `alpha_1`, `alpha_2` (0 or 1) the envelope is built from.
    pub component: usize,
    /// Envelope samples on the zero-mode grid.
    pub samples: Vec<Complex64>,
}

impl SeparableTerm {
    fn envelope_jet(&self, jet: &EnvelopeJet) -> (f64, f64, f64) {
        match self.envelope {
            EnvelopeKind::AlphaPrime => (jet.a1, jet.a2, jet.a3),
            EnvelopeKind::KappaAlpha => (jet.ka, jet.ka1, jet.ka2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableState {
    pub terms: Vec<SeparableTerm>,
    pub w: CosineSeries,
    pub m_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderEnergy {
    pub value: f64,
    pub imag_residual: f64,
    pub quadrature_error_estimate: f64,
    pub terms: usize,
}

impl SecondOrderEnergy {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "E2": self.value, "imag_residual": self.imag_residual, "terms": self.terms })
    }
}

fn check_consistent(cert: &DiracPointCertificate, zm: &ZeroMode, m_max: usize) -> Result<()> {
    if m_max != cert.m_max {
        return Err(Error::Inconsistent(format!("cutoff {m_max} differs from certificate cutoff {}", cert.m_max)));
    }
    if (zm.spec.lambda - cert.lambda_sharp).abs() > 1e-12 * cert.lambda_sharp.abs() {
        return Err(Error::Inconsistent("zero mode built with a different lambda_sharp".into()));
    }
    if let Some(theta) = cert.theta_sharp {
        if (zm.spec.theta - theta).abs() > 1e-12 * theta.abs().max(1.0) {
            return Err(Error::Inconsistent("zero mode built with a different theta_sharp".into()));
        }
    }
    Ok(())
}

fn pair(cert: &DiracPointCertificate) -> [&FourierCoeffs; 2] {
    [&cert.phi1.coeffs, &cert.phi2.coeffs]
}

/// Spectral resolvent on the complement of the Dirac pair at `k = pi`.
struct Resolvent {
    modes: Vec<(f64, FourierCoeffs)>,
    e_star: f64,
}

impl Resolvent {
    fn new(cert: &DiracPointCertificate) -> Result<Self> {
        let (first, second) = phi1_sectors(cert.n);
        let mut modes = Vec::new();
        let tol = 1e-6 * cert.e_star.abs().max(1.0);
        for sector in [first, second] {
            for mode in sector_eigensystem(&cert.v, sector, cert.m_max)? {
                if mode.band == cert.n + 1 {
                    continue;
                }
                let gap = mode.energy - cert.e_star;
                if gap.abs() < tol {
                    return Err(Error::NearDegeneracy { band: mode.band, gap });
                }
                modes.push((mode.energy, mode.coeffs));
            }
        }
        Ok(Resolvent { modes, e_star: cert.e_star })
    }

    /// `(P f, R(E_star) P f)`.
    fn apply(&self, f: &FourierCoeffs) -> (FourierCoeffs, FourierCoeffs) {
        let mut projected = FourierCoeffs::zeros(f.m_max);
        let mut image = FourierCoeffs::zeros(f.m_max);
        for (e, phi) in &self.modes {
            let c = phi.inner(f);
            for (i, v) in phi.values.iter().enumerate() {
                projected.values[i] += c * v;
                image.values[i] += c * v / (e - self.e_star);
            }
        }
        (projected, image)
    }
}

/// Builds `psi1_p` from the order-`delta` source
/// `G1 = sum_j 2 dPhi_j/dx alpha_j' - W Phi_j kappa alpha_j`.
pub fn solve_corrector(
    cert: &DiracPointCertificate,
    w: &CosineSeries,
    zm: &ZeroMode,
    m_max: usize,
) -> Result<SeparableState> {
    if !w.is_odd_index() {
        return Err(Error::WrongParity { expected: "odd-index" });
    }
    check_consistent(cert, zm, m_max)?;
    let resolvent = Resolvent::new(cert)?;
    let dir = zm.direction();
    let jets = zm.x.iter().map(|&t| zm.jet(t)).collect::<Result<Vec<EnvelopeJet>>>()?;
    let mut terms = Vec::new();
    for (j, phi) in pair(cert).into_iter().enumerate() {
        let mut grad = phi.derivative(K_STAR);
        grad.scale(Complex64::new(2.0, 0.0));
        let mut wphi = phi.multiply(w);
        wphi.scale(Complex64::new(-1.0, 0.0));
        for (source, envelope) in [(grad, EnvelopeKind::AlphaPrime), (wphi, EnvelopeKind::KappaAlpha)] {
            let (projected, image) = resolvent.apply(&source);
            if image.norm_sqr().sqrt() < ZERO_TERM {
                continue;
            }
            let samples = jets
                .iter()
                .map(|jet| {
                    let g = match envelope {
                        EnvelopeKind::AlphaPrime => jet.a1,
                        EnvelopeKind::KappaAlpha => jet.ka,
                    };
                    dir[j] * g
                })
                .collect();
            terms.push(SeparableTerm { x_part: image, source: projected, envelope, component: j, samples });
        }
    }
    Ok(SeparableState { terms, w: w.clone(), m_max })
}

/// `max_X |<Phi_l, G1(., X)>|` relative to `max |alpha|`; zero when the
/// envelope solves the Dirac equation.
pub fn kernel_projection_residual(cert: &DiracPointCertificate, w: &CosineSeries, zm: &ZeroMode) -> Result<f64> {
    let phis = pair(cert);
    let dir = zm.direction();
    let mut a_mat = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut b_mat = a_mat;
    for l in 0..2 {
        for j in 0..2 {
            let mut grad = phis[j].derivative(K_STAR);
            grad.scale(Complex64::new(2.0, 0.0));
            a_mat[l][j] = phis[l].inner(&grad);
            b_mat[l][j] = phis[l].inner(&phis[j].multiply(w));
        }
    }
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for &t in &zm.x {
        let jet = zm.jet(t)?;
        peak = peak.max(jet.a.abs());
        for l in 0..2 {
            let v: Complex64 = (0..2).map(|j| dir[j] * (a_mat[l][j] * jet.a1 - b_mat[l][j] * jet.ka)).sum();
            worst = worst.max(v.norm());
        }
    }
    Ok(worst / peak)
}

/// `E2 = -<alpha, G2>` with
/// `G2_l = <Phi_l, (2 d_x d_X - kappa W) psi1_p> + alpha_l''`.
pub fn compute_e2(
    cert: &DiracPointCertificate,
    corrector: &SeparableState,
    zm: &ZeroMode,
) -> Result<SecondOrderEnergy> {
    check_consistent(cert, zm, corrector.m_max)?;
    let phis = pair(cert);
    let dir = zm.direction();
    // x inner products <Phi_l, 2 d_x u_t> and <Phi_l, W u_t>
    let coeffs: Vec<[(Complex64, Complex64); 2]> = corrector
        .terms
        .iter()
        .map(|t| {
            let mut grad = t.x_part.derivative(K_STAR);
            grad.scale(Complex64::new(2.0, 0.0));
            let wu = t.x_part.multiply(&corrector.w);
            [0, 1].map(|l| (phis[l].inner(&grad), phis[l].inner(&wu)))
        })
        .collect();
    let integrand =
        zm.x.iter()
            .map(|&t| {
                let jet = zm.jet(t)?;
                let mut total = Complex64::new(0.0, 0.0);
                for l in 0..2 {
                    let mut g2 = dir[l] * jet.a2;
                    for (term, c) in corrector.terms.iter().zip(&coeffs) {
                        let (g, g1, _) = term.envelope_jet(&jet);
                        let d = dir[term.component];
                        g2 += d * (c[l].0 * g1 - c[l].1 * jet.kappa * g);
                    }
                    total += (dir[l] * jet.a).conj() * g2;
                }
                Ok(-total)
            })
            .collect::<Result<Vec<Complex64>>>()?;
    let h = zm.spacing();
    let value = simpson(&integrand, h);
    let coarse = simpson_coarse(&integrand, h);
    let imag_residual = value.im.abs();
    if imag_residual > IMAG_LIMIT {
        return Err(Error::PhaseConvention(imag_residual));
    }
    Ok(SecondOrderEnergy {
        value: value.re,
        imag_residual,
        quadrature_error_estimate: (value.re - coarse.re).abs(),
        terms: corrector.terms.len(),
    })
}

/// Samples of a function and its first two x-derivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledFunction {
    pub value: Vec<Complex64>,
    pub d1: Vec<Complex64>,
    pub d2: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub x: Vec<f64>,
    pub delta: f64,
    /// `delta^{1/2} psi0(x, delta x)`.
    pub leading: SampledFunction,
    /// `delta^{3/2} psi1_p(x, delta x)`.
    pub correction: SampledFunction,
}

impl Ansatz {
    /// Leading plus correction.
    pub fn full(&self) -> SampledFunction {
        let add = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        SampledFunction {
            value: add(&self.leading.value, &self.correction.value),
            d1: add(&self.leading.d1, &self.correction.d1),
            d2: add(&self.leading.d2, &self.correction.d2),
        }
    }
}

const RESEED: usize = 1024;

/// Values and derivatives of several Bloch functions `e^{i pi x} sum c(m) e^{2 pi i m x}`
/// on the block `x_0 + i h`, `i < len`, by phase recurrence from an exact seed.
fn bloch_block(funcs: &[&FourierCoeffs], x0: f64, h: f64, len: usize) -> Vec<Vec<[Complex64; 3]>> {
    let m_max = funcs.first().map_or(0, |f| f.m_max) as i64;
    let active: Vec<i64> = (-m_max..=m_max).filter(|&m| funcs.iter().any(|f| f.get(m) != 0.0.into())).collect();
    let q: Vec<f64> = active.iter().map(|&m| K_STAR + 2.0 * K_STAR * m as f64).collect();
    let step: Vec<Complex64> = q.iter().map(|&qm| Complex64::from_polar(1.0, qm * h)).collect();
    let mut phase: Vec<Complex64> = q.iter().map(|&qm| Complex64::from_polar(1.0, qm * x0)).collect();
    let coeff: Vec<Vec<Complex64>> = funcs.iter().map(|f| active.iter().map(|&m| f.get(m)).collect()).collect();
    let mut out = vec![vec![[Complex64::new(0.0, 0.0); 3]; len]; funcs.len()];
    let iu = Complex64::new(0.0, 1.0);
    for i in 0..len {
        for (fi, c) in coeff.iter().enumerate() {
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for (k, (&cm, &p)) in c.iter().zip(&phase).enumerate() {
                let t = cm * p;
                acc[0] += t;
                acc[1] += iu * q[k] * t;
                acc[2] -= q[k] * q[k] * t;
            }
            out[fi][i] = acc;
        }
        for (p, s) in phase.iter_mut().zip(&step) {
            *p *= s;
        }
    }
    out
}

/// Evaluates the two-term ansatz `delta^{1/2} psi0 + delta^{3/2} psi1_p` at
/// `x_i = x0 + i h` with chain-rule x-derivatives (`d/dx -> d_x + delta d_X`).
pub fn synthesize_ansatz(
    cert: &DiracPointCertificate,
    corrector: &SeparableState,
    zm: &ZeroMode,
    delta: f64,
    x0: f64,
    h: f64,
    n: usize,
) -> Result<Ansatz> {
    if !(delta > 0.0) {
        return Err(Error::Inconsistent(format!("ansatz needs delta > 0, got {delta}")));
    }
    let dir = zm.direction();
    let mut funcs: Vec<&FourierCoeffs> = pair(cert).to_vec();
    funcs.extend(corrector.terms.iter().map(|t| &t.x_part));
    let sd = delta.sqrt();
    let blocks: Vec<Result<(SampledFunction, SampledFunction)>> = (0..n.div_ceil(RESEED))
        .into_par_iter()
        .map(|b| {
            let start = b * RESEED;
            let len = RESEED.min(n - start);
            let bx0 = x0 + h * start as f64;
            let vals = bloch_block(&funcs, bx0, h, len);
            let mut lead = SampledFunction::default();
            let mut corr = SampledFunction::default();
            for i in 0..len {
                let x = bx0 + h * i as f64;
                let jet = zm.jet(delta * x)?;
                let (mut v, mut d1, mut d2) =
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for j in 0..2 {
                    let [f, f1, f2] = vals[j][i];
                    v += dir[j] * jet.a * f;
                    d1 += dir[j] * (jet.a * f1 + delta * jet.a1 * f);
                    d2 += dir[j] * (jet.a * f2 + 2.0 * delta * jet.a1 * f1 + delta * delta * jet.a2 * f);
                }
                lead.value.push(sd * v);
                lead.d1.push(sd * d1);
                lead.d2.push(sd * d2);
                let (mut v, mut d1, mut d2) =
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for (t, term) in corrector.terms.iter().enumerate() {
                    let [u, u1, u2] = vals[2 + t][i];
                    let (g, g1, g2) = term.envelope_jet(&jet);
                    let d = dir[term.component];
                    v += d * g * u;
                    d1 += d * (g * u1 + delta * g1 * u);
                    d2 += d * (g * u2 + 2.0 * delta * g1 * u1 + delta * delta * g2 * u);
                }
                let s = sd * delta;
                corr.value.push(s * v);
                corr.d1.push(s * d1);
                corr.d2.push(s * d2);
            }
            Ok((lead, corr))
        })
        .collect();
    let mut leading = SampledFunction::default();
    let mut correction = SampledFunction::default();
    for block in blocks {
        let (l, c) = block?;
        leading.value.extend(l.value);
        leading.d1.extend(l.d1);
        leading.d2.extend(l.d2);
        correction.value.extend(c.value);
        correction.d1.extend(c.d1);
        correction.d2.extend(c.d2);
    }
    Ok(Ansatz { x: (0..n).map(|i| x0 + h * i as f64).collect(), delta, leading, correction })
}
