//! Composite Simpson rule, used to cross-check analytic period averages.

use std::ops::{Add, Mul};

/// Integrate `f` over `[a, b]` with `panels` Simpson panels (rounded up to an
/// even count of subintervals).
pub fn simpson<T, F>(f: F, a: f64, b: f64, panels: usize) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Mul<f64, Output = T>,
{
    let n = 2 * panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc = acc + f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// Mean of `f` over `[a, b]`.
pub fn simpson_mean<T, F>(f: F, a: f64, b: f64, panels: usize) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Mul<f64, Output = T>,
{
    simpson(f, a, b, panels) * (1.0 / (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let v: f64 = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_mean() {
        let w = 1.7;
        let m: f64 = simpson_mean(|t| (w * t).sin().powi(2), 0.0, std::f64::consts::PI / w, 2048);
        assert!((m - 0.5).abs() < 1e-12);
    }
}
