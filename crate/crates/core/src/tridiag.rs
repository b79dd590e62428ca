//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection and
//! eigenvectors by inverse iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of eigenvalues a window may contain.
pub const WINDOW_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Inconsistent(format!(
                "tridiagonal with {} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(SymTridiagonal { diag, off })
    }

    /// Second-order finite-difference `-c d^2/dx^2 + u(x_i)` with Dirichlet ends.
    pub fn finite_difference(potential: Vec<f64>, h: f64, c: f64) -> Self {
        let n = potential.len();
        let diag = potential.into_iter().map(|u| 2.0 * c / (h * h) + u).collect();
        SymTridiagonal { diag, off: vec![-c / (h * h); n.saturating_sub(1)] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let e2 = self.off.iter().map(|e| e * e).fold(0.0, f64::max);
        f64::MIN_POSITIVE * e2.max(1.0)
    }

    /// Number of eigenvalues strictly below `e`, from the signs of the
    /// pivots of the `LDL^T` factorization of `T - e`.
    pub fn sturm_count(&self, e: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - e;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let b = self.off[i - 1];
            q = self.diag[i] - e - b * b / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue `j` (0-based, ascending) bracketed in `[lo, hi]`, bisected to
    /// `tol` absolute or until the interval stops shrinking in floating point.
    pub fn eigenvalue_by_index(&self, j: usize, lo: f64, hi: f64, tol: f64) -> f64 {
        let (mut lo, mut hi) = (lo, hi);
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                return mid;
            }
            if self.sturm_count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Eigenvalue `j` anywhere in the spectrum.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (lo, hi) = self.gershgorin();
        let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        self.eigenvalue_by_index(j, lo - pad, hi + pad, BISECTION_TOL)
    }

    /// All eigenvalues in the open window `(lower, upper)`, ascending.
    pub fn eigenvalues_in_window(&self, lower: f64, upper: f64) -> Result<Vec<f64>> {
        if !(lower < upper) {
            return Err(Error::InvalidWindow(lower, upper));
        }
        let c_lo = self.sturm_count(lower);
        let c_hi = self.sturm_count(upper);
        let count = c_hi - c_lo;
        if count > WINDOW_LIMIT {
            return Err(Error::WindowTooWide { lower, upper, count });
        }
        Ok((c_lo..c_hi).map(|j| self.eigenvalue_by_index(j, lower, upper, BISECTION_TOL)).collect())
    }

    /// `T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Solves `(T - shift) x = b` by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let (glo, ghi) = self.gershgorin();
        let tiny = f64::EPSILON * (1.0 + ghi.abs().max(glo.abs()));
        if n == 1 {
            let d = self.diag[0] - shift;
            return vec![b[0] / if d.abs() < tiny { tiny } else { d }];
        }
        // upper factor rows hold (u0, u1, u2) for columns (i, i + 1, i + 2)
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let mut cur_d = self.diag[0] - shift;
        let mut cur_e = self.off[0];
        for i in 0..n - 1 {
            let sub = self.off[i];
            let next_d = self.diag[i + 1] - shift;
            let next_e = if i + 2 < n { self.off[i + 1] } else { 0.0 };
            if cur_d.abs() >= sub.abs() {
                let piv = if cur_d.abs() < tiny { tiny.copysign(cur_d) } else { cur_d };
                let l = sub / piv;
                u0[i] = piv;
                u1[i] = cur_e;
                u2[i] = 0.0;
                rhs[i + 1] -= l * rhs[i];
                cur_d = next_d - l * cur_e;
                cur_e = next_e;
            } else {
                let l = cur_d / sub;
                u0[i] = sub;
                u1[i] = next_d;
                u2[i] = next_e;
                rhs.swap(i, i + 1);
                rhs[i + 1] -= l * rhs[i];
                cur_d = cur_e - l * next_d;
                cur_e = -l * next_e;
            }
        }
        u0[n - 1] = if cur_d.abs() < tiny { tiny } else { cur_d };
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = rhs[i];
            if i + 1 < n {
                v -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= u2[i] * x[i + 2];
            }
            x[i] = v / u0[i];
        }
        x
    }

    /// Inverse iteration at a computed eigenvalue. Returns a unit 2-norm vector
    /// orthogonal to `deflate` (vectors of nearby eigenvalues).
    pub fn inverse_iteration(&self, e: f64, deflate: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.dim();
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x: Vec<f64> = (1..=n).map(|i| (i as f64 * phi).fract() - 0.5).collect();
        let mut last_growth = 0.0;
        for _ in 0..5 {
            orthogonalize(&mut x, deflate);
            normalize2(&mut x);
            let mut y = self.shifted_solve(e, &x);
            orthogonalize(&mut y, deflate);
            let growth = norm2(&y);
            if !growth.is_finite() || growth == 0.0 {
                return Err(Error::NoConvergence("inverse iteration produced a degenerate vector".into()));
            }
            for v in &mut y {
                *v /= growth;
            }
            x = y;
            if growth > 1e3 && (growth - last_growth).abs() <= 1e-3 * growth {
                break;
            }
            last_growth = growth;
        }
        let r = self.apply(&x);
        let scale = self.gershgorin().0.abs().max(self.gershgorin().1.abs()).max(1.0);
        let res = r.iter().zip(&x).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        if res > 1e-6 * scale {
            return Err(Error::NoConvergence(format!("inverse iteration stagnated at E = {e}, residual {res:e}")));
        }
        fix_sign(&mut x);
        Ok(x)
    }

    /// Eigenpairs with eigenvalue in `(lower, upper)`. Vectors are normalized
    /// so that `h sum psi_i^2 = 1`.
    pub fn eigenpairs_in_window(&self, lower: f64, upper: f64, h: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let values = self.eigenvalues_in_window(lower, upper)?;
        self.eigenvectors_for(&values, h)
    }

    /// Inverse-iteration vectors for given eigenvalues (ascending), with
    /// Gram-Schmidt inside clusters of close eigenvalues.
    pub fn eigenvectors_for(&self, values: &[f64], h: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let scale = self.gershgorin().0.abs().max(self.gershgorin().1.abs()).max(1.0);
        let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(values.len());
        for &e in values {
            let cluster: Vec<Vec<f64>> =
                out.iter().filter(|(f, _)| (e - f).abs() < 1e-7 * scale).map(|(_, v)| v.clone()).collect();
            let v = self.inverse_iteration(e, &cluster)?;
            out.push((e, v));
        }
        let w = 1.0 / h.sqrt();
        for (_, v) in &mut out {
            for x in v.iter_mut() {
                *x *= w;
            }
        }
        Ok(out)
    }

    /// `||T x - e x||_2`.
    pub fn residual(&self, e: f64, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Absolute bisection target for eigenvalues.
pub const BISECTION_TOL: f64 = 1e-12;

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize2(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let bb: f64 = b.iter().map(|v| v * v).sum();
        if bb == 0.0 {
            continue;
        }
        let p: f64 = x.iter().zip(b).map(|(a, c)| a * c).sum::<f64>() / bb;
        for (a, c) in x.iter_mut().zip(b) {
            *a -= p * c;
        }
    }
}

/// Sign convention: the largest-magnitude entry is positive.
fn fix_sign(x: &mut [f64]) {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if x[best] < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn dense(t: &SymTridiagonal) -> Vec<f64> {
        let n = t.dim();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.diag[i]
            } else if i + 1 == j {
                t.off[i]
            } else if j + 1 == i {
                t.off[j]
            } else {
                0.0
            }
        });
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn laplacian() -> (SymTridiagonal, f64) {
        let h = PI / 200.0;
        (SymTridiagonal::finite_difference(vec![0.0; 199], h, 1.0), h)
    }

    #[test]
    fn free_laplacian_window() {
        let (t, h) = laplacian();
        let pairs = t.eigenpairs_in_window(0.5, 4.5, h).unwrap();
        assert_eq!(pairs.len(), 2);
        for (n, (e, v)) in pairs.iter().enumerate() {
            let exact = 4.0 / (h * h) * ((n + 1) as f64 * h / 2.0).sin().powi(2);
            assert_abs_diff_eq!(*e, exact, epsilon = 1e-11);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>() * h;
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            assert!(t.residual(*e, v) < 1e-8);
        }
        assert_abs_diff_eq!(pairs[0].0, 0.99998, epsilon = 1e-5);
        assert_abs_diff_eq!(pairs[1].0, 3.99967, epsilon = 1e-5);
        // sine ground state
        let x0 = h;
        let amp = (2.0 / PI).sqrt();
        assert_abs_diff_eq!(pairs[0].1[0], amp * x0.sin(), epsilon = 1e-4);
    }

    #[test]
    fn empty_and_invalid_windows() {
        let (t, _) = laplacian();
        assert!(t.eigenvalues_in_window(1.1, 3.9).unwrap().is_empty());
        assert!(matches!(t.eigenvalues_in_window(2.0, 1.0), Err(Error::InvalidWindow(..))));
        assert!(matches!(t.eigenvalues_in_window(0.0, 1e4), Err(Error::WindowTooWide { .. })));
    }

    #[test]
    fn sturm_matches_dense_on_random_instance() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| ((i as f64 * 0.7548776662).fract() - 0.5) * 10.0).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| ((i as f64 * 0.5698402910).fract() - 0.5) * 4.0).collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        let e = dense(&t);
        for w in e.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if w[1] - w[0] > 1e-9 {
                let below = e.iter().filter(|&&x| x < mid).count();
                assert_eq!(t.sturm_count(mid), below);
            }
        }
        for (j, &x) in e.iter().enumerate().step_by(17) {
            assert_abs_diff_eq!(t.eigenvalue(j), x, epsilon = 1e-10);
        }
    }

    #[test]
    fn clustered_vectors_are_orthogonal() {
        // two decoupled identical blocks give exact double eigenvalues
        let diag = vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0];
        let t = SymTridiagonal::new(diag, vec![0.5, 0.5, 0.0, 0.5, 0.5]).unwrap();
        let e = dense(&t);
        let pairs = t.eigenpairs_in_window(e[0] - 0.1, e[1] + 0.1, 1.0).unwrap();
        assert_eq!(pairs.len(), 2);
        let dot: f64 = pairs[0].1.iter().zip(&pairs[1].1).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sturm_count_exhaustive_oracle(
            diag in prop::collection::vec(-5.0f64..5.0, 2..400),
            seed in 0.0f64..1.0,
        ) {
            let n = diag.len();
            let off: Vec<f64> = (0..n - 1).map(|i| ((i as f64 * 0.618 + seed).fract() - 0.5) * 3.0).collect();
            let t = SymTridiagonal::new(diag, off).unwrap();
            let e = dense(&t);
            let mut last = 0;
            for probe in [-20.0, -7.5, -3.0, -1.0, 0.0, 0.3, 1.7, 4.0, 9.0, 20.0] {
                if e.iter().any(|&x| (x - probe).abs() < 1e-9) {
                    continue;
                }
                let count = t.sturm_count(probe);
                prop_assert_eq!(count, e.iter().filter(|&&x| x < probe).count());
                prop_assert!(count >= last);
                last = count;
            }
        }
    }
}
