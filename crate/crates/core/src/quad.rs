//! Composite Simpson rules on uniform grids.

use std::ops::{Add, Mul};

/// Composite Simpson over samples `f_0..f_n` with spacing `h`; `n` must be even.
pub fn simpson<T>(f: &[T], h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let n = f.len() - 1;
    assert!(n >= 2 && n.is_multiple_of(2), "Simpson needs an even number of intervals");
    let mut odd = T::default();
    let mut even = T::default();
    for (i, &v) in f.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    (f[0] + f[n] + odd * 4.0 + even * 2.0) * (h / 3.0)
}

/// Simpson over every other sample (`n` divisible by 4): the same rule at twice the spacing.
pub fn simpson_coarse<T>(f: &[T], h: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let coarse: Vec<T> = f.iter().step_by(2).copied().collect();
    simpson(&coarse, 2.0 * h)
}

/// Running integral `int_0^{x_i} f` on the grid `x_i = -x_max + i h`,
/// `h = 2 x_max / n` (`n` even), by Simpson panels over each cell using the
/// cell midpoint.
pub fn cumulative_from_center<E>(f: impl Fn(f64) -> Result<f64, E>, x_max: f64, n: usize) -> Result<Vec<f64>, E> {
    assert!(n.is_multiple_of(2), "grid needs an even number of intervals");
    let h = 2.0 * x_max / n as f64;
    let x = |i: usize| -x_max + h * i as f64;
    let c = n / 2;
    let mut out = vec![0.0; n + 1];
    let mut left = f(x(c))?;
    for i in c..n {
        let right = f(x(i + 1))?;
        out[i + 1] = out[i] + h / 6.0 * (left + 4.0 * f(x(i) + 0.5 * h)? + right);
        left = right;
    }
    let mut right = f(x(c))?;
    for i in (0..c).rev() {
        let left = f(x(i))?;
        out[i] = out[i + 1] - h / 6.0 * (left + 4.0 * f(x(i) + 0.5 * h)? + right);
        right = left;
    }
    Ok(out)
}

/// Three-point Simpson estimate of `int_a^b f` with `segments` panels.
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, segments: usize) -> f64 {
    let n = 2 * segments.max(1);
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_exact_on_cubics() {
        let h = 0.1;
        let f: Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(3)).collect();
        assert_abs_diff_eq!(simpson(&f, h), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let n = 200;
        let cum = cumulative_from_center(|x: f64| Ok::<f64, ()>(x.tanh()), 5.0, n).unwrap();
        let h = 10.0 / n as f64;
        for (i, c) in cum.iter().enumerate() {
            let x = -5.0 + h * i as f64;
            assert_abs_diff_eq!(*c, x.cosh().ln(), epsilon = 1e-8);
        }
        assert_eq!(cum[n / 2], 0.0);
    }

    #[test]
    fn coarse_rule_converges() {
        let n = 64;
        let h = std::f64::consts::PI / n as f64;
        let f: Vec<f64> = (0..=n).map(|i| (h * i as f64).sin()).collect();
        let fine = simpson(&f, h);
        let coarse = simpson_coarse(&f, h);
        assert!((fine - 2.0).abs() < (coarse - 2.0).abs());
        assert_abs_diff_eq!(simpson_fn(|x| x.sin(), 0.0, std::f64::consts::PI, 64), 2.0, epsilon = 1e-8);
    }
}
