//! Plane-wave discretization of the Bloch operator `-(d/dx + ik)^2 + Q(x)`
//! acting on 1-periodic functions, and its parity-sector reduction at `k = pi`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::CosineSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sector {
    Full,
    /// Fourier indices `m` in `2Z`.
    EvenIndex,
    /// Fourier indices `m` in `2Z + 1`.
    OddIndex,
}

impl Sector {
    fn admits(self, m: i64) -> bool {
        match self {
            Sector::Full => true,
            Sector::EvenIndex => m.rem_euclid(2) == 0,
            Sector::OddIndex => m.rem_euclid(2) == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    m_max: usize,
    k: f64,
    sector: Sector,
    indices: Vec<i64>,
}

impl PlaneWaveBasis {
    pub fn full(m_max: usize, k: f64) -> Self {
        Self::build(m_max, k, Sector::Full)
    }

    /// Sector bases only exist at the high-symmetry point `k = pi`.
    pub fn sector(m_max: usize, sector: Sector) -> Self {
        Self::build(m_max, PI, sector)
    }

    /// Restricts to `sector` at an arbitrary `k`. For an even-index potential
    /// the sectors stay invariant, but they carry the parity meaning only at `pi`.
    pub fn with_sector_at(m_max: usize, k: f64, sector: Sector) -> Result<Self> {
        if sector != Sector::Full && (k - PI).abs() > 1e-3 {
            return Err(Error::SectorOffHighSymmetry(k));
        }
        Ok(Self::build(m_max, k, sector))
    }

    fn build(m_max: usize, k: f64, sector: Sector) -> Self {
        let m = m_max as i64;
        let indices = (-m..=m).filter(|&i| sector.admits(i)).collect();
        PlaneWaveBasis { m_max, k, sector, indices }
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    /// `H_{mn} = (k + 2 pi m)^2 [m = n] + Qhat(m - n)`; real symmetric for cosine series.
    pub fn hamiltonian(&self, q: &CosineSeries) -> DMatrix<f64> {
        let d = self.dimension();
        DMatrix::from_fn(d, d, |i, j| {
            let (m, n) = (self.indices[i], self.indices[j]);
            let kinetic = if i == j { (self.k + 2.0 * PI * m as f64).powi(2) } else { 0.0 };
            kinetic + q.fourier_coefficient(m - n)
        })
    }
}

/// Fourier coefficients `c(m)`, `m in [-M, M]`, stored at offset `m + M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeffs {
    pub m_max: usize,
    pub values: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn zeros(m_max: usize) -> Self {
        FourierCoeffs { m_max, values: vec![Complex64::new(0.0, 0.0); 2 * m_max + 1] }
    }

    pub fn get(&self, m: i64) -> Complex64 {
        let off = m + self.m_max as i64;
        if off < 0 || off as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[off as usize]
        }
    }

    pub fn set(&mut self, m: i64, v: Complex64) {
        let off = (m + self.m_max as i64) as usize;
        self.values[off] = v;
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        let m = self.m_max as i64;
        -m..=m
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<self, other> = sum conj(self(m)) other(m)`.
    pub fn inner(&self, other: &FourierCoeffs) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// `H(k) c` with the plane-wave matrix of `q`, truncated to `[-M, M]`.
    pub fn apply_hamiltonian(&self, q: &CosineSeries, k: f64) -> FourierCoeffs {
        let mut out = FourierCoeffs::zeros(self.m_max);
        for m in self.indices() {
            let mut acc = self.get(m) * (k + 2.0 * PI * m as f64).powi(2) + self.get(m) * q.constant();
            for &(p, a) in q.harmonics() {
                let p = p as i64;
                acc += (self.get(m - p) + self.get(m + p)) * (0.5 * a);
            }
            out.set(m, acc);
        }
        out
    }

    /// Multiplication by the periodic function `q`, truncated to `[-M, M]`.
    pub fn multiply(&self, q: &CosineSeries) -> FourierCoeffs {
        let mut out = FourierCoeffs::zeros(self.m_max);
        for m in self.indices() {
            let mut acc = self.get(m) * q.constant();
            for &(p, a) in q.harmonics() {
                let p = p as i64;
                acc += (self.get(m - p) + self.get(m + p)) * (0.5 * a);
            }
            out.set(m, acc);
        }
        out
    }

    /// Coefficients of `d/dx` applied to `e^{ikx} sum c(m) e^{2 pi i m x}`, i.e. `i (k + 2 pi m) c(m)`.
    pub fn derivative(&self, k: f64) -> FourierCoeffs {
        let mut out = self.clone();
        for m in self.indices() {
            out.set(m, self.get(m) * Complex64::new(0.0, k + 2.0 * PI * m as f64));
        }
        out
    }

    /// Fixes the global phase: the largest-magnitude entry (lowest index among
    /// near-ties) becomes real and positive.
    pub fn normalize_phase(&mut self) {
        let max = self.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return;
        }
        let pivot = self.values.iter().position(|c| c.norm() >= max * (1.0 - 1e-10)).unwrap();
        let phase = self.values[pivot].conj() / self.values[pivot].norm();
        self.scale(phase);
        self.values[pivot] = Complex64::new(self.values[pivot].re, 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochMode {
    pub k: f64,
    /// 1-based band label within the solve that produced the mode.
    pub band: usize,
    pub energy: f64,
    pub coeffs: FourierCoeffs,
    pub sector: Sector,
}

impl BlochMode {
    /// `||H(k) c - E c||_2`.
    pub fn residual(&self, q: &CosineSeries) -> f64 {
        let hc = self.coeffs.apply_hamiltonian(q, self.k);
        hc.values.iter().zip(&self.coeffs.values).map(|(a, b)| (a - b * self.energy).norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub k_grid: Vec<f64>,
    /// `bands[i][b]` is `E_{b+1}(k_grid[i])`.
    pub bands: Vec<Vec<f64>>,
    pub n_bands: usize,
}

impl BandStructure {
    pub fn band(&self, b: usize) -> impl Iterator<Item = f64> + '_ {
        self.bands.iter().map(move |row| row[b])
    }

    /// `max_k |E_b(k) - E_b(2 pi - k)|` over grid points whose mirror is also on the grid.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &k) in self.k_grid.iter().enumerate() {
            let mirror = 2.0 * PI - k;
            if let Some(j) = self.k_grid.iter().position(|&q| (q - mirror).abs() < 1e-12) {
                for b in 0..self.n_bands {
                    worst = worst.max((self.bands[i][b] - self.bands[j][b]).abs());
                }
            }
        }
        worst
    }

    /// Band samples as CSV: `k, E_1, ..., E_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for b in 1..=self.n_bands {
            out.push_str(&format!(",E_{b}"));
        }
        out.push('\n');
        for (k, row) in self.k_grid.iter().zip(&self.bands) {
            out.push_str(&format!("{k:.16e}"));
            for e in row {
                out.push_str(&format!(",{e:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn check_cutoff(q: &CosineSeries, m_max: usize) -> Result<()> {
    let required = q.max_harmonic() as usize + 2;
    if m_max < required {
        return Err(Error::CutoffTooSmall { m_max, max_harmonic: q.max_harmonic(), required });
    }
    Ok(())
}

fn solve(q: &CosineSeries, basis: &PlaneWaveBasis, n_bands: usize) -> Result<Vec<BlochMode>> {
    check_cutoff(q, basis.m_max)?;
    let dim = basis.dimension();
    if n_bands == 0 || n_bands > dim {
        return Err(Error::TooManyBands { requested: n_bands, dimension: dim });
    }
    let h = basis.hamiltonian(q);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NoConvergence("dense symmetric eigensolve hit its iteration cap".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(order
        .into_iter()
        .take(n_bands)
        .enumerate()
        .map(|(band, col)| {
            let mut coeffs = FourierCoeffs::zeros(basis.m_max);
            for (row, &m) in basis.indices.iter().enumerate() {
                coeffs.set(m, Complex64::new(eig.eigenvectors[(row, col)], 0.0));
            }
            coeffs.normalize_phase();
            BlochMode { k: basis.k, band: band + 1, energy: eig.eigenvalues[col], coeffs, sector: basis.sector }
        })
        .collect())
}

/// The `n_bands` lowest eigenpairs of `H_Q(k)` in the full basis `[-M, M]`.
pub fn bloch_spectrum(q: &CosineSeries, k: f64, m_max: usize, n_bands: usize) -> Result<Vec<BlochMode>> {
    solve(q, &PlaneWaveBasis::full(m_max, k), n_bands)
}

/// Uniform grid of `k_samples` points over `[0, 2 pi]`, with `pi` inserted if absent.
pub fn k_grid(k_samples: usize) -> Vec<f64> {
    let n = k_samples.max(2);
    let mut grid: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / (n - 1) as f64).collect();
    if !grid.iter().any(|&k| (k - PI).abs() < 1e-14) {
        let pos = grid.partition_point(|&k| k < PI);
        grid.insert(pos, PI);
    } else if let Some(k) = grid.iter_mut().find(|k| (**k - PI).abs() < 1e-14) {
        *k = PI;
    }
    grid
}

pub fn band_sweep(q: &CosineSeries, k_samples: usize, m_max: usize, n_bands: usize) -> Result<BandStructure> {
    if k_samples < 3 {
        return Err(Error::Inconsistent(format!("band sweep needs at least 3 k samples, got {k_samples}")));
    }
    let grid = k_grid(k_samples);
    let bands = grid
        .par_iter()
        .map(|&k| bloch_spectrum(q, k, m_max, n_bands).map(|modes| modes.iter().map(|m| m.energy).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(BandStructure { k_grid: grid, bands, n_bands })
}

/// The `n` lowest eigenpairs of the sector-restricted problem at `k = pi`.
pub fn parity_spectrum(q: &CosineSeries, sector: Sector, m_max: usize, n: usize) -> Result<Vec<BlochMode>> {
    if !q.is_even_index() {
        return Err(Error::WrongParity { expected: "even-index" });
    }
    if sector == Sector::Full {
        return Err(Error::Inconsistent("parity spectrum needs the even-index or odd-index sector".into()));
    }
    solve(q, &PlaneWaveBasis::sector(m_max, sector), n)
}

/// Full eigendecomposition of one sector at `k = pi`.
pub fn sector_eigensystem(q: &CosineSeries, sector: Sector, m_max: usize) -> Result<Vec<BlochMode>> {
    let dim = PlaneWaveBasis::sector(m_max, sector).dimension();
    parity_spectrum(q, sector, m_max, dim)
}

/// `c'(m) = c(-m - 1)`: swaps the even-index and odd-index sectors at `k = pi`.
pub fn inversion_map(mode: &BlochMode) -> Result<BlochMode> {
    if (mode.k - PI).abs() > 1e-12 {
        return Err(Error::SectorOffHighSymmetry(mode.k));
    }
    let m = mode.coeffs.m_max as i64;
    // c(M) would land on -M - 1, outside the truncation
    let dropped = mode.coeffs.get(m).norm_sqr();
    if dropped > 1e-12 {
        return Err(Error::InversionTruncation(dropped));
    }
    let mut coeffs = FourierCoeffs::zeros(mode.coeffs.m_max);
    for i in -m..=m {
        coeffs.set(i, mode.coeffs.get(-i - 1));
    }
    let sector = match mode.sector {
        Sector::EvenIndex => Sector::OddIndex,
        Sector::OddIndex => Sector::EvenIndex,
        Sector::Full => Sector::Full,
    };
    Ok(BlochMode { k: mode.k, band: mode.band, energy: mode.energy, coeffs, sector })
}
