//! Restarted GMRES with right preconditioning for real linear systems.

/// Outcome of [`gmres`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` starting from `x`, with `A` applied through `apply` and the
/// preconditioner `M^{-1}` through `precondition`. Stops when
/// `||b - A x|| <= tol ||b||` or after `max_iter` inner iterations.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    restart: usize,
    tol: f64,
    max_iter: usize,
) -> GmresReport {
    let n = b.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut work = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    let mut resid = f64::INFINITY;
    while total < max_iter {
        apply(x, &mut work);
        let r: Vec<f64> = b.iter().zip(&work).map(|(b, ax)| b - ax).collect();
        let beta = norm(&r);
        resid = beta / bnorm;
        if resid <= tol {
            return GmresReport { iterations: total, residual: resid, converged: true };
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k = 0;
        while k < restart && total < max_iter {
            precondition(&basis[k], &mut z);
            apply(&z, &mut work);
            let mut w = work.clone();
            // modified Gram-Schmidt
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][k] = hij;
                w.iter_mut().zip(v).for_each(|(w, v)| *w -= hij * v);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            total += 1;
            resid = g[k].abs() / bnorm;
            if resid <= tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution, then x += M^{-1} V y
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            update.iter_mut().zip(v).for_each(|(u, v)| *u += yi * v);
        }
        precondition(&update, &mut z);
        x.iter_mut().zip(&z).for_each(|(x, z)| *x += z);
        if resid <= tol {
            return GmresReport { iterations: total, residual: resid, converged: true };
        }
    }
    GmresReport { iterations: total, residual: resid, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_system() {
        // tridiagonal, nonsymmetric, diagonally dominant
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 4.0 * x[i] - left + 0.5 * right;
            }
        };
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        apply(&exact, &mut b);
        let mut x = vec![0.0; n];
        let rep = gmres(apply, |v, z| z.iter_mut().zip(v).for_each(|(z, v)| *z = v / 4.0), &b, &mut x, 10, 1e-13, 500);
        assert!(rep.converged);
        let err = x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err:e}");
    }

    #[test]
    fn indefinite_diagonal() {
        let d = [-2.0, 1.0, 3.0, 0.5];
        let b = [1.0, 2.0, 3.0, 4.0];
        let mut x = [0.0; 4];
        let rep = gmres(
            |x, y| y.iter_mut().enumerate().for_each(|(i, y)| *y = d[i] * x[i]),
            |v, z| z.copy_from_slice(v),
            &b,
            &mut x,
            4,
            1e-14,
            20,
        );
        assert!(rep.converged);
        for i in 0..4 {
            assert!((x[i] - b[i] / d[i]).abs() < 1e-12);
        }
    }
}
