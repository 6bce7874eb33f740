use anyhow::{bail, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    /// Slope, the discord gained per added site.
    pub k: f64,
    pub b: f64,
    /// Largest absolute residual over the window.
    pub residual: f64,
    pub n_lo: usize,
    pub n_hi: usize,
}

/// Least-squares `G_n ≈ k·n + b` over an inclusive window of block sizes.
///
/// `rows` are `(n, G_n)` pairs for one parameter point and must contain at
/// least four consecutive sizes. Without a window the top half of the
/// available sizes is used.
pub fn fit_linear_growth(rows: &[(usize, f64)], window: Option<(usize, usize)>) -> Result<LinearFit> {
    if rows.len() < 4 {
        bail!("need at least 4 rows to fit, got {}", rows.len());
    }
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.0);
    if sorted.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        bail!("block sizes must be consecutive");
    }
    let (n_lo, n_hi) = match window {
        Some(w) => w,
        None => {
            let last = sorted[sorted.len() - 1].0;
            (last + 1 - sorted.len().div_ceil(2), last)
        }
    };
    let used: Vec<(f64, f64)> = sorted
        .iter()
        .filter(|r| (n_lo..=n_hi).contains(&r.0))
        .map(|&(n, g)| (n as f64, g))
        .collect();
    if used.len() < 2 || used.len() != n_hi + 1 - n_lo {
        bail!("fit window {n_lo}:{n_hi} is not covered by the rows");
    }
    let m = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / m;
    let my = used.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let k = sxy / sxx;
    let b = my - k * mx;
    let residual = used.iter().map(|p| (p.1 - k * p.0 - b).abs()).fold(0.0, f64::max);
    Ok(LinearFit {
        k,
        b,
        residual,
        n_lo,
        n_hi,
    })
}
