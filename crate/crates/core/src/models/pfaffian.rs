use nalgebra::DMatrix;

use crate::{GqdError, Result};

/// Pfaffian of a real antisymmetric matrix by Parlett-Reid
/// tridiagonalisation with partial pivoting.
pub fn pfaffian(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GqdError::Dimension(format!("{}x{} matrix is not square", n, a.ncols())));
    }
    if n % 2 == 1 {
        return Err(GqdError::Dimension(format!("Pfaffian of odd dimension {n}")));
    }
    let scale = a.amax().max(1.0);
    if (a + a.transpose()).amax() > 1e-10 * scale {
        return Err(GqdError::InvalidArgument("matrix is not antisymmetric".into()));
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let kp = (k + 1..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()).then(j.cmp(&i)))
            .expect("non-empty range");
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == 0.0 {
            return Ok(0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
    }
    Ok(pf)
}
