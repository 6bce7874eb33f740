#![allow(dead_code)]

use gqd_core::{CMat, C64};

/// Exact XXZ energy per site for `−1 < Δ < 1`, `Δ = cos μ`:
/// `e = Δ − 4 sin μ ∫ sinh((π−μ)x) / (2 sinh(πx) cosh(μx)) dx`.
/// The integrand is rewritten with decaying exponentials and integrated
/// with composite Simpson on `[0, 60]`.
pub fn xxz_exact_energy(delta: f64) -> f64 {
    use std::f64::consts::PI;
    let mu = delta.acos();
    let a = PI - mu;
    let f = |x: f64| {
        if x == 0.0 {
            a / (2.0 * PI)
        } else {
            (-2.0 * mu * x).exp() * -(-2.0 * a * x).exp_m1()
                / (-(-2.0 * PI * x).exp_m1() * (1.0 + (-2.0 * mu * x).exp()))
        }
    };
    let (upper, steps) = (60.0, 600_000);
    let h = upper / steps as f64;
    let mut sum = f(0.0) + f(upper);
    for i in 1..steps {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let integral = 2.0 * sum * h / 3.0;
    delta - 4.0 * mu.sin() * integral
}

/// Heisenberg point, where the integral above degenerates: `1 − 4 ln 2`.
pub fn heisenberg_energy() -> f64 {
    1.0 - 4.0 * std::f64::consts::LN_2
}

/// Scaling and squaring with a Taylor series, independent of the
/// eigendecomposition used by the library.
pub fn expm(a: &CMat) -> CMat {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = (norm.log2().ceil() as i32 + 4).max(0);
    let scaled = a / C64::new(2f64.powi(squarings), 0.0);
    let mut term = CMat::identity(a.nrows(), a.ncols());
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Ordinary least squares `y ≈ k x + b`; returns `(k, b, max |residual|)`.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let k = sxy / sxx;
    let b = my - k * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - k * x - b).abs()).fold(0.0, f64::max);
    (k, b, res)
}

/// `|GHZ_n⟩⟨GHZ_n|`.
pub fn ghz(n: usize) -> CMat {
    let dim = 1 << n;
    let mut rho = CMat::zeros(dim, dim);
    for (i, j) in [(0, 0), (0, dim - 1), (dim - 1, 0), (dim - 1, dim - 1)] {
        rho[(i, j)] = C64::new(0.5, 0.0);
    }
    rho
}
