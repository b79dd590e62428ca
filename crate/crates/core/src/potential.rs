//! Periodic potentials as finite cosine series, the superlattice family built
//! from translates of an even base potential, and slowly varying domain walls.
//!
//! Every series is `c + sum_p a_p cos(2 pi p x)`, 1-periodic and even in `x`.
//! Its complex Fourier coefficients are `c` at 0 and `a_p / 2` at `+-p`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    /// Only even harmonics: minimal period 1/2.
    EvenIndex,
    /// Only odd harmonics, no constant: `W(x + 1/2) = -W(x)`.
    OddIndex,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    parity: Parity,
    constant: f64,
    harmonics: Vec<(u32, f64)>,
}

impl CosineSeries {
    /// Builds a series with an explicit parity tag. Harmonics are sorted;
    /// duplicated or zero indices are rejected.
    pub fn new(parity: Parity, constant: f64, harmonics: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut harmonics: Vec<(u32, f64)> = harmonics.into_iter().collect();
        harmonics.sort_by_key(|&(p, _)| p);
        for w in harmonics.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSeries(format!("harmonic {} listed twice", w[0].0)));
            }
        }
        if let Some(&(p, _)) = harmonics.iter().find(|&&(p, _)| p == 0) {
            return Err(Error::InvalidSeries(format!("harmonic index {p} must be positive; use the constant term")));
        }
        if harmonics.iter().any(|&(_, a)| !a.is_finite()) || !constant.is_finite() {
            return Err(Error::InvalidSeries("non-finite coefficient".into()));
        }
        let series = CosineSeries { parity, constant, harmonics };
        match parity {
            Parity::EvenIndex if !series.is_even_index() => {
                Err(Error::InvalidSeries("even-index series with an odd harmonic".into()))
            }
            Parity::OddIndex if !series.is_odd_index() => {
                Err(Error::InvalidSeries("odd-index series must have only odd harmonics and no constant".into()))
            }
            _ => Ok(series),
        }
    }

    pub fn even(constant: f64, harmonics: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        Self::new(Parity::EvenIndex, constant, harmonics)
    }

    pub fn odd(harmonics: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        Self::new(Parity::OddIndex, 0.0, harmonics)
    }

    /// Tags the series with the narrowest parity its content satisfies.
    pub fn inferred(constant: f64, harmonics: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut s = Self::new(Parity::Mixed, constant, harmonics)?;
        s.parity = s.narrowest_parity();
        Ok(s)
    }

    pub fn zero() -> Self {
        CosineSeries { parity: Parity::EvenIndex, constant: 0.0, harmonics: Vec::new() }
    }

    fn narrowest_parity(&self) -> Parity {
        if self.harmonics.iter().all(|&(p, _)| p % 2 == 0) {
            Parity::EvenIndex
        } else if self.is_odd_index() {
            Parity::OddIndex
        } else {
            Parity::Mixed
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn harmonics(&self) -> &[(u32, f64)] {
        &self.harmonics
    }

    pub fn is_even_index(&self) -> bool {
        self.harmonics.iter().all(|&(p, _)| p % 2 == 0)
    }

    /// The zero series counts as odd-index.
    pub fn is_odd_index(&self) -> bool {
        self.constant == 0.0 && self.harmonics.iter().all(|&(p, _)| p % 2 == 1)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.harmonics.iter().all(|&(_, a)| a == 0.0)
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.last().map_or(0, |&(p, _)| p)
    }

    /// Coefficient of `cos(2 pi p x)` (zero when absent).
    pub fn coefficient(&self, p: u32) -> f64 {
        if p == 0 {
            return self.constant;
        }
        self.harmonics.binary_search_by_key(&p, |&(q, _)| q).map_or(0.0, |i| self.harmonics[i].1)
    }

    /// Complex exponential coefficient at index `n`: `c` for `n = 0`, `a_|n| / 2` otherwise.
    pub fn fourier_coefficient(&self, n: i64) -> f64 {
        if n == 0 {
            self.constant
        } else {
            0.5 * self.coefficient(n.unsigned_abs() as u32)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.harmonics.iter().map(|&(p, a)| a * (2.0 * PI * p as f64 * x).cos()).sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> CosineSeries {
        CosineSeries {
            parity: self.parity,
            constant: self.constant * factor,
            harmonics: self.harmonics.iter().map(|&(p, a)| (p, a * factor)).collect(),
        }
    }

    /// Pointwise sum; the result carries the narrowest parity it satisfies.
    pub fn plus(&self, other: &CosineSeries) -> CosineSeries {
        let mut merged: Vec<(u32, f64)> = self.harmonics.clone();
        for &(p, a) in &other.harmonics {
            match merged.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(i) => merged[i].1 += a,
                Err(i) => merged.insert(i, (p, a)),
            }
        }
        let mut s = CosineSeries { parity: Parity::Mixed, constant: self.constant + other.constant, harmonics: merged };
        s.parity = s.narrowest_parity();
        s
    }
}

/// `eval_series`: the series value at `x`.
pub fn eval_series(series: &CosineSeries, x: f64) -> f64 {
    series.eval(x)
}

/// `cos(pi t)`, exact at half-integer `t`.
pub(crate) fn cos_pi(t: f64) -> f64 {
    let twice = 2.0 * t;
    if twice == twice.round() && twice.abs() < 1e15 {
        match (twice as i64).rem_euclid(4) {
            0 => 1.0,
            1 | 3 => 0.0,
            _ => -1.0,
        }
    } else {
        (PI * t).cos()
    }
}

/// `sin(pi t)`, exact at half-integer `t`.
pub(crate) fn sin_pi(t: f64) -> f64 {
    let twice = 2.0 * t;
    if twice == twice.round() && twice.abs() < 1e15 {
        match (twice as i64).rem_euclid(4) {
            1 => 1.0,
            3 => -1.0,
            _ => 0.0,
        }
    } else {
        (PI * t).sin()
    }
}

/// Fourier data of an even 1-periodic base potential
/// `Q(x) = Qhat(0) + 2 sum_m Qhat(m) cos(2 pi m x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperlatticeBase {
    pub constant: f64,
    pub base_harmonics: Vec<(u32, f64)>,
}

impl SuperlatticeBase {
    pub fn new(constant: f64, base_harmonics: impl IntoIterator<Item = (u32, f64)>) -> Self {
        SuperlatticeBase { constant, base_harmonics: base_harmonics.into_iter().collect() }
    }

    /// The base potential itself.
    pub fn eval_base(&self, x: f64) -> f64 {
        self.constant + self.base_harmonics.iter().map(|&(m, q)| 2.0 * q * (2.0 * PI * m as f64 * x).cos()).sum::<f64>()
    }
}

fn pruned(harmonics: impl IntoIterator<Item = (u32, f64)>) -> Vec<(u32, f64)> {
    harmonics.into_iter().filter(|&(_, a)| a != 0.0).collect()
}

/// `Q(x; s) = Q(x + s/2) + Q(x - s/2)` as a cosine series.
pub fn superlattice_series(base: &SuperlatticeBase, s: f64) -> Result<CosineSeries> {
    let harmonics = pruned(base.base_harmonics.iter().map(|&(m, q)| (m, 4.0 * q * cos_pi(m as f64 * s))));
    CosineSeries::inferred(2.0 * base.constant, harmonics)
}

/// Linearization of the superlattice about the half-period point:
/// `V = Q(.; 1/2)` and `W = d/ds Q(.; s)` at `s = 1/2`.
pub fn dimer_linearization(base: &SuperlatticeBase) -> Result<(CosineSeries, CosineSeries)> {
    let v = pruned(base.base_harmonics.iter().map(|&(m, q)| (m, 4.0 * q * cos_pi(0.5 * m as f64))));
    let w = pruned(base.base_harmonics.iter().map(|&(m, q)| (m, -4.0 * PI * m as f64 * q * sin_pi(0.5 * m as f64))));
    Ok((CosineSeries::even(2.0 * base.constant, v)?, CosineSeries::odd(w)?))
}

/// A sampled profile with explicit asymptote metadata. Between the table
/// range and the threshold there is no data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    /// Value substituted for `X >= threshold`.
    pub limit_plus: f64,
    /// Value substituted for `X <= -threshold`.
    pub limit_minus: f64,
    pub threshold: f64,
}

impl TabulatedProfile {
    pub fn new(x: Vec<f64>, values: Vec<f64>, limit_minus: f64, limit_plus: f64, threshold: f64) -> Result<Self> {
        if x.len() != values.len() || x.len() < 4 {
            return Err(Error::InvalidWall("table needs at least 4 samples of matching length".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidWall("table abscissae must be strictly increasing".into()));
        }
        if !(threshold > 0.0) {
            return Err(Error::InvalidWall("asymptote threshold must be positive".into()));
        }
        Ok(TabulatedProfile { x, values, limit_plus, limit_minus, threshold })
    }

    /// Samples `f` uniformly on `[lo, hi]` with `n` points.
    pub fn sample(
        f: impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        n: usize,
        limit_minus: f64,
        limit_plus: f64,
        threshold: f64,
    ) -> Result<Self> {
        let step = (hi - lo) / (n.max(2) - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        let values = x.iter().map(|&t| f(t)).collect();
        Self::new(x, values, limit_minus, limit_plus, threshold)
    }

    /// Smoothed indicator of `[-inner, inner]` scaled by `amplitude`, vanishing
    /// identically outside `[-outer, outer]`; zero limits.
    pub fn smooth_bump(amplitude: f64, inner: f64, outer: f64, n: usize) -> Result<Self> {
        if !(outer > inner && inner >= 0.0) {
            return Err(Error::InvalidWall("bump needs 0 <= inner < outer".into()));
        }
        let step = |t: f64| {
            if t <= 0.0 {
                0.0
            } else if t >= 1.0 {
                1.0
            } else {
                let a = (-1.0 / t).exp();
                a / (a + (-1.0 / (1.0 - t)).exp())
            }
        };
        let width = outer - inner;
        Self::sample(|x| amplitude * step((outer - x.abs()) / width), -outer, outer, n, 0.0, 0.0, outer)
    }

    fn lo(&self) -> f64 {
        self.x[0]
    }

    fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn slope(&self, i: usize) -> f64 {
        let n = self.x.len();
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        (self.values[b] - self.values[a]) / (self.x[b] - self.x[a])
    }

    /// Cubic Hermite interpolation with finite-difference slopes.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x >= self.threshold {
            return Ok(self.limit_plus);
        }
        if x <= -self.threshold {
            return Ok(self.limit_minus);
        }
        if x < self.lo() || x > self.hi() {
            return Err(Error::TableGap { x, lo: self.lo(), hi: self.hi(), threshold: self.threshold });
        }
        let i = match self.x.partition_point(|&t| t <= x) {
            0 => 0,
            k if k >= self.x.len() => self.x.len() - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.slope(i)
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slope(i + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WallKind {
    /// `kappa_inf tanh(X / scale)`.
    Tanh,
    /// `(k+ + k-)/2 + (k+ - k-)/2 tanh(X / scale)` for arbitrary limits `k+-`.
    ScaledTanh,
    Tabulated(TabulatedProfile),
}

/// Slowly varying multiplier `kappa(X)`. The limits are stored as actual
/// values at `+-infinity`, so a domain wall has limits of opposite sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainWall {
    kind: WallKind,
    kappa_inf_plus: f64,
    kappa_inf_minus: f64,
    scale: f64,
    /// Compactly supported additive perturbation.
    bump: Option<TabulatedProfile>,
}

const FD_STEP: f64 = 1e-4;

impl DomainWall {
    pub fn tanh(kappa_inf: f64) -> Self {
        DomainWall {
            kind: WallKind::Tanh,
            kappa_inf_plus: kappa_inf,
            kappa_inf_minus: -kappa_inf,
            scale: 1.0,
            bump: None,
        }
    }

    pub fn scaled_tanh(kappa_inf_minus: f64, kappa_inf_plus: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidWall("scale must be positive".into()));
        }
        Ok(DomainWall { kind: WallKind::ScaledTanh, kappa_inf_plus, kappa_inf_minus, scale, bump: None })
    }

    /// A constant profile (no wall).
    pub fn constant(value: f64) -> Self {
        DomainWall { kind: WallKind::ScaledTanh, kappa_inf_plus: value, kappa_inf_minus: value, scale: 1.0, bump: None }
    }

    pub fn tabulated(table: TabulatedProfile) -> Self {
        DomainWall {
            kappa_inf_plus: table.limit_plus,
            kappa_inf_minus: table.limit_minus,
            kind: WallKind::Tabulated(table),
            scale: 1.0,
            bump: None,
        }
    }

    /// Adds a compactly supported perturbation. The table must vanish at its ends.
    pub fn with_bump(&self, bump: TabulatedProfile) -> Result<Self> {
        let ends = [bump.values[0], bump.values[bump.values.len() - 1]];
        if ends.iter().any(|v| v.abs() > 1e-12) || bump.limit_plus != 0.0 || bump.limit_minus != 0.0 {
            return Err(Error::BumpNotCompact);
        }
        let mut bump = bump;
        // outside its table the bump is identically zero
        bump.threshold = bump.x[0].abs().max(bump.x[bump.x.len() - 1].abs()).max(f64::MIN_POSITIVE);
        let mut wall = self.clone();
        wall.bump = match wall.bump.take() {
            None => Some(bump),
            Some(_) => return Err(Error::InvalidWall("wall already carries a bump".into())),
        };
        Ok(wall)
    }

    pub fn kind(&self) -> &WallKind {
        &self.kind
    }

    pub fn limit_plus(&self) -> f64 {
        self.kappa_inf_plus
    }

    pub fn limit_minus(&self) -> f64 {
        self.kappa_inf_minus
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Opposite nonzero limits: the profile reverses sign across the structure.
    pub fn is_domain_wall(&self) -> bool {
        self.kappa_inf_plus * self.kappa_inf_minus < 0.0
    }

    fn bump_at(&self, x: f64) -> f64 {
        match &self.bump {
            Some(b) if x > b.x[0] && x < b.x[b.x.len() - 1] => b.eval(x).unwrap_or(0.0),
            _ => 0.0,
        }
    }

    fn base_value(&self, x: f64) -> Result<f64> {
        match &self.kind {
            WallKind::Tanh => Ok(self.kappa_inf_plus * (x / self.scale).tanh()),
            WallKind::ScaledTanh => {
                let mid = 0.5 * (self.kappa_inf_plus + self.kappa_inf_minus);
                let half = 0.5 * (self.kappa_inf_plus - self.kappa_inf_minus);
                Ok(mid + half * (x / self.scale).tanh())
            }
            WallKind::Tabulated(t) => t.eval(x),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.base_value(x)? + self.bump_at(x))
    }

    /// `kappa'(X)`: analytic for tanh shapes, centered differences for tables and bumps.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let base = match &self.kind {
            WallKind::Tanh | WallKind::ScaledTanh => {
                let half = 0.5 * (self.kappa_inf_plus - self.kappa_inf_minus);
                let sech = 1.0 / (x / self.scale).cosh();
                half * sech * sech / self.scale
            }
            WallKind::Tabulated(_) => (self.base_value(x + FD_STEP)? - self.base_value(x - FD_STEP)?) / (2.0 * FD_STEP),
        };
        let bump = (self.bump_at(x + FD_STEP) - self.bump_at(x - FD_STEP)) / (2.0 * FD_STEP);
        Ok(base + bump)
    }

    /// `kappa''(X)`, same conventions as [`DomainWall::derivative`].
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        let base = match &self.kind {
            WallKind::Tanh | WallKind::ScaledTanh => {
                let half = 0.5 * (self.kappa_inf_plus - self.kappa_inf_minus);
                let u = x / self.scale;
                let sech = 1.0 / u.cosh();
                -2.0 * half * sech * sech * u.tanh() / (self.scale * self.scale)
            }
            WallKind::Tabulated(_) => {
                (self.base_value(x + FD_STEP)? - 2.0 * self.base_value(x)? + self.base_value(x - FD_STEP)?)
                    / (FD_STEP * FD_STEP)
            }
        };
        let bump =
            (self.bump_at(x + FD_STEP) - 2.0 * self.bump_at(x) + self.bump_at(x - FD_STEP)) / (FD_STEP * FD_STEP);
        Ok(base + bump)
    }
}

/// `eval_wall`: the wall profile at `X`.
pub fn eval_wall(wall: &DomainWall, x: f64) -> Result<f64> {
    wall.eval(x)
}

/// `U_delta(x) = V(x) + delta kappa(delta x) W(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedPotential {
    pub v: CosineSeries,
    pub w: CosineSeries,
    pub wall: DomainWall,
    pub delta: f64,
}

impl ModulatedPotential {
    pub fn new(v: CosineSeries, w: CosineSeries, wall: DomainWall, delta: f64) -> Result<Self> {
        if !v.is_even_index() {
            return Err(Error::WrongParity { expected: "even-index" });
        }
        if !w.is_odd_index() {
            return Err(Error::WrongParity { expected: "odd-index" });
        }
        if !(delta >= 0.0) {
            return Err(Error::InvalidSeries("delta must be nonnegative".into()));
        }
        Ok(ModulatedPotential { v, w, wall, delta })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.delta == 0.0 {
            return Ok(self.v.eval(x));
        }
        Ok(self.v.eval(x) + self.delta * self.wall.eval(self.delta * x)? * self.w.eval(x))
    }

    /// The periodic operator seen at `+infinity`: `V + delta kappa(+inf) W`.
    pub fn asymptotic_plus(&self) -> CosineSeries {
        self.v.plus(&self.w.scaled(self.delta * self.wall.limit_plus()))
    }

    pub fn asymptotic_minus(&self) -> CosineSeries {
        self.v.plus(&self.w.scaled(self.delta * self.wall.limit_minus()))
    }
}

/// The JSON potential fragment accepted by the command-line driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default)]
    pub even: Vec<(u32, f64)>,
    #[serde(default)]
    pub odd: Vec<(u32, f64)>,
    #[serde(default)]
    pub constant: f64,
    #[serde(default = "WallSpec::default_tanh")]
    pub wall: WallSpec,
    #[serde(default)]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WallSpec {
    Tanh {
        kappa_inf: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    ScaledTanh {
        kappa_inf_minus: f64,
        kappa_inf_plus: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Tabulated {
        x: Vec<f64>,
        values: Vec<f64>,
        kappa_inf_minus: f64,
        kappa_inf_plus: f64,
        threshold: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl WallSpec {
    fn default_tanh() -> Self {
        WallSpec::Tanh { kappa_inf: 1.0, scale: 1.0 }
    }

    pub fn build(&self) -> Result<DomainWall> {
        match self {
            WallSpec::Tanh { kappa_inf, scale } if *scale == 1.0 => Ok(DomainWall::tanh(*kappa_inf)),
            WallSpec::Tanh { kappa_inf, scale } => DomainWall::scaled_tanh(-kappa_inf, *kappa_inf, *scale),
            WallSpec::ScaledTanh { kappa_inf_minus, kappa_inf_plus, scale } => {
                DomainWall::scaled_tanh(*kappa_inf_minus, *kappa_inf_plus, *scale)
            }
            WallSpec::Tabulated { x, values, kappa_inf_minus, kappa_inf_plus, threshold } => Ok(DomainWall::tabulated(
                TabulatedProfile::new(x.clone(), values.clone(), *kappa_inf_minus, *kappa_inf_plus, *threshold)?,
            )),
        }
    }
}

impl PotentialSpec {
    pub fn even_series(&self) -> Result<CosineSeries> {
        CosineSeries::even(self.constant, self.even.iter().copied())
    }

    pub fn odd_series(&self) -> Result<CosineSeries> {
        CosineSeries::odd(self.odd.iter().copied())
    }

    pub fn build(&self) -> Result<ModulatedPotential> {
        ModulatedPotential::new(self.even_series()?, self.odd_series()?, self.wall.build()?, self.delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn w135() -> CosineSeries {
        CosineSeries::odd([(1, 2.0), (3, 2.0), (5, 2.0)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let v = CosineSeries::even(0.0, [(2, 2.0)]).unwrap();
        assert_eq!(eval_series(&v, 0.0), 2.0);
        assert_abs_diff_eq!(eval_series(&v, 0.25), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eval_series(&w135(), 0.5), -6.0, epsilon = 1e-13);
    }

    #[test]
    fn parity_validation() {
        assert!(CosineSeries::even(0.0, [(3, 1.0)]).is_err());
        assert!(CosineSeries::new(Parity::OddIndex, 1.0, [(1, 1.0)]).is_err());
        assert!(CosineSeries::odd([(1, 1.0), (1, 2.0)]).is_err());
        assert!(CosineSeries::even(0.0, [(0, 1.0)]).is_err());
        let s = CosineSeries::inferred(0.0, [(4, 1.0), (2, 1.0)]).unwrap();
        assert_eq!(s.parity(), Parity::EvenIndex);
        assert_eq!(s.harmonics()[0].0, 2);
        assert!(CosineSeries::zero().is_odd_index());
    }

    #[test]
    fn superlattice_examples() {
        let b1 = SuperlatticeBase::new(0.0, [(1, 1.0)]);
        assert!(superlattice_series(&b1, 0.5).unwrap().is_zero());
        let b2 = SuperlatticeBase::new(0.0, [(2, 1.0)]);
        assert_eq!(superlattice_series(&b2, 0.5).unwrap().coefficient(2), -4.0);
        let off = superlattice_series(&b1, 0.51).unwrap();
        // 4 cos(pi/2 + 0.01 pi) = -4 sin(0.01 pi)
        assert_abs_diff_eq!(off.coefficient(1), -0.125_643_036_312_513_1, epsilon = 1e-12);
    }

    #[test]
    fn dimer_examples() {
        let (v, w) = dimer_linearization(&SuperlatticeBase::new(0.0, [(1, 1.0), (2, 1.0)])).unwrap();
        assert_eq!(v.harmonics(), &[(2, -4.0)]);
        assert_abs_diff_eq!(w.coefficient(1), -4.0 * PI, epsilon = 1e-14);
        assert_eq!(w.harmonics().len(), 1);
        let (_, w2) = dimer_linearization(&SuperlatticeBase::new(0.0, [(2, 1.0)])).unwrap();
        assert!(w2.is_zero());
        let (_, w3) = dimer_linearization(&SuperlatticeBase::new(0.0, [(3, 1.0)])).unwrap();
        assert_abs_diff_eq!(w3.coefficient(3), 12.0 * PI, epsilon = 1e-13);
    }

    #[test]
    fn dimer_derivative_matches_finite_difference() {
        let base = SuperlatticeBase::new(0.3, [(1, 0.7), (2, -0.4), (3, 0.25)]);
        let (_, w) = dimer_linearization(&base).unwrap();
        let ds = 1e-5;
        for &x in &[0.0, 0.13, 0.41, 0.77] {
            let hi = base.eval_base(x + (0.5 + ds) / 2.0) + base.eval_base(x - (0.5 + ds) / 2.0);
            let lo = base.eval_base(x + (0.5 - ds) / 2.0) + base.eval_base(x - (0.5 - ds) / 2.0);
            // even-harmonic part of dQ/ds vanishes at s = 1/2 exactly
            assert_abs_diff_eq!((hi - lo) / (2.0 * ds), w.eval(x), epsilon = 1e-6);
        }
    }

    /// Continued-fraction evaluation of tanh, independent of the std implementation.
    fn tanh_cf(x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..40).rev() {
            acc = x * x / ((2 * k + 1) as f64 + acc);
        }
        x / (1.0 + acc)
    }

    #[test]
    fn wall_examples() {
        let w = DomainWall::tanh(1.0);
        assert_eq!(eval_wall(&w, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(eval_wall(&w, 20.0).unwrap(), 1.0, epsilon = 1e-15);
        let s = DomainWall::scaled_tanh(-1.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(eval_wall(&s, 2.0).unwrap(), tanh_cf(1.0), epsilon = 1e-14);
        assert_abs_diff_eq!(tanh_cf(1.0), 0.761_594_155_955_764_9, epsilon = 1e-15);
        assert!(DomainWall::tanh(1.0).is_domain_wall());
        assert!(!DomainWall::constant(1.0).is_domain_wall());
        assert!(DomainWall::scaled_tanh(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn wall_derivatives() {
        let w = DomainWall::scaled_tanh(-1.0, 3.0, 1.5).unwrap();
        let h = 1e-4;
        for &x in &[-2.0, -0.3, 0.0, 0.8, 3.1] {
            let fd = (w.eval(x + h).unwrap() - w.eval(x - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(w.derivative(x).unwrap(), fd, epsilon = 1e-7);
            let fd2 = (w.derivative(x + h).unwrap() - w.derivative(x - h).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(w.second_derivative(x).unwrap(), fd2, epsilon = 1e-7);
        }
    }

    #[test]
    fn tabulated_wall() {
        let t = TabulatedProfile::sample(|x| x.tanh(), -10.0, 10.0, 2001, -1.0, 1.0, 10.0).unwrap();
        let w = DomainWall::tabulated(t);
        assert_abs_diff_eq!(w.eval(0.37).unwrap(), 0.37f64.tanh(), epsilon = 1e-8);
        assert_abs_diff_eq!(w.derivative(0.37).unwrap(), 1.0 / 0.37f64.cosh().powi(2), epsilon = 1e-4);
        assert_eq!(w.eval(50.0).unwrap(), 1.0);
        let gappy = TabulatedProfile::sample(|x| x.tanh(), -5.0, 5.0, 101, -1.0, 1.0, 10.0).unwrap();
        let err = DomainWall::tabulated(gappy).eval(7.0).unwrap_err();
        assert!(matches!(err, Error::TableGap { .. }));
    }

    #[test]
    fn bump_must_be_compact() {
        let w = DomainWall::tanh(1.0);
        let bad = TabulatedProfile::sample(|x| -x.tanh(), -50.0, 50.0, 201, 0.0, 0.0, 50.0).unwrap();
        assert_eq!(w.with_bump(bad).unwrap_err(), Error::BumpNotCompact);
        let ok = TabulatedProfile::sample(
            |x| (-x * x).exp() * (1.0 - (x / 6.0).powi(2)).max(0.0),
            -6.0,
            6.0,
            601,
            0.0,
            0.0,
            6.0,
        )
        .unwrap();
        let b = w.with_bump(ok).unwrap();
        assert_abs_diff_eq!(b.eval(0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(b.eval(8.0).unwrap(), 8.0f64.tanh());
    }

    #[test]
    fn modulated_potential() {
        let v = CosineSeries::even(0.0, [(2, 2.0)]).unwrap();
        let u = ModulatedPotential::new(v.clone(), w135(), DomainWall::tanh(1.0), 0.0).unwrap();
        assert_eq!(u.eval(0.3).unwrap(), v.eval(0.3));
        let u = ModulatedPotential::new(v.clone(), w135(), DomainWall::tanh(1.0), 0.2).unwrap();
        let x = 1.7;
        assert_abs_diff_eq!(u.eval(x).unwrap(), v.eval(x) + 0.2 * (0.2 * x).tanh() * w135().eval(x), epsilon = 1e-14);
        assert!(ModulatedPotential::new(w135(), v, DomainWall::tanh(1.0), 0.1).is_err());
    }

    #[test]
    fn potential_json_fragment() {
        let json = r#"{"even":[[2,2.0]],"odd":[[1,2.0],[3,2.0]],"constant":0.5,"wall":{"kind":"tanh","kappa_inf":1.0,"scale":1.0},"delta":0.1}"#;
        let spec: PotentialSpec = serde_json::from_str(json).unwrap();
        let u = spec.build().unwrap();
        assert_eq!(u.v.constant(), 0.5);
        assert_eq!(u.w.coefficient(3), 2.0);
        assert_eq!(u.delta, 0.1);
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"evn":[]}"#).is_err());
    }

    fn arb_series(parity: Parity) -> impl Strategy<Value = CosineSeries> {
        prop::collection::btree_map(1u32..8, -3.0f64..3.0, 0..5).prop_map(move |m| {
            let h = m.into_iter().map(|(p, a)| match parity {
                Parity::EvenIndex => (2 * p, a),
                Parity::OddIndex => (2 * p - 1, a),
                Parity::Mixed => (p, a),
            });
            let c = if parity == Parity::OddIndex { 0.0 } else { 0.7 };
            CosineSeries::new(parity, c, h).unwrap()
        })
    }

    proptest! {
        #[test]
        fn periodic_and_even(s in arb_series(Parity::Mixed), x in -5.0f64..5.0) {
            prop_assert!((s.eval(x) - s.eval(x + 1.0)).abs() < 1e-11);
            prop_assert!((s.eval(x) - s.eval(-x)).abs() < 1e-11);
        }

        #[test]
        fn half_period_symmetries(v in arb_series(Parity::EvenIndex), w in arb_series(Parity::OddIndex), x in -5.0f64..5.0) {
            prop_assert!((v.eval(x + 0.5) - v.eval(x)).abs() < 1e-11);
            prop_assert!((w.eval(x + 0.5) + w.eval(x)).abs() < 1e-11);
        }

        #[test]
        fn superlattice_is_sum_of_translates(
            q in prop::collection::btree_map(1u32..7, -2.0f64..2.0, 1..5),
            c in -1.0f64..1.0, x in -2.0f64..2.0, s in 0.0f64..1.0,
        ) {
            let base = SuperlatticeBase::new(c, q);
            let series = superlattice_series(&base, s).unwrap();
            let direct = base.eval_base(x + s / 2.0) + base.eval_base(x - s / 2.0);
            prop_assert!((series.eval(x) - direct).abs() < 1e-11);
        }
    }
}
