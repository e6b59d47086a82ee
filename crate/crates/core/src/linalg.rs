//! Matrix-free Krylov solvers over flat `f64` vectors.

use crate::error::{LabError, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_iters: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub iters: usize,
    pub rel_residual: f64,
}

/// Preconditioned conjugate gradients for a symmetric positive definite `apply`.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: KrylovOptions,
) -> Result<KrylovOutcome> {
    let bnorm = norm(b);
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok(KrylovOutcome { x, iters: 0, rel_residual: 0.0 });
    }
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iters {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(LabError::LinearSolver(format!("operator not positive definite (p.Ap = {pap:e})")));
        }
        let step = rz / pap;
        for i in 0..x.len() {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rel = norm(&r) / bnorm;
        if rel < opts.rel_tol {
            return Ok(KrylovOutcome { x, iters: it, rel_residual: rel });
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&r) / bnorm;
    Err(LabError::LinearSolver(format!("CG stalled after {} iterations at relative residual {rel:e}", opts.max_iters)))
}

/// Right-preconditioned restarted GMRES.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    restart: usize,
    opts: KrylovOptions,
) -> Result<KrylovOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(KrylovOutcome { x, iters: 0, rel_residual: 0.0 });
    }
    let mut total = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta / bnorm < opts.rel_tol {
            return Ok(KrylovOutcome { x, iters: total, rel_residual: beta / bnorm });
        }
        if total >= opts.max_iters {
            return Err(LabError::LinearSolver(format!(
                "GMRES stalled after {total} iterations at relative residual {:e}",
                beta / bnorm
            )));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..restart {
            let z = precond(&v[j]);
            let mut w = apply(&z);
            zs.push(z);
            for i in 0..=j {
                h[i][j] = dot(&w, &v[i]);
                for (wk, vk) in w.iter_mut().zip(&v[i]) {
                    *wk -= h[i][j] * vk;
                }
            }
            h[j + 1][j] = norm(&w);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            let breakdown = h[j + 1][j] == 0.0 && sn[j] == 0.0;
            if g[j + 1].abs() / bnorm < opts.rel_tol || total >= opts.max_iters || breakdown {
                break;
            }
            let hn = norm(&w);
            v.push(w.iter().map(|wk| wk / hn).collect());
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&zs[k]) {
                *xi += yk * zi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                3.0 * x[i] - l - r
            })
            .collect()
    }

    #[test]
    fn cg_solves_spd() {
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let out = pcg(tridiag, |r| r.to_vec(), &b, KrylovOptions::default()).unwrap();
        let res: f64 = tridiag(&out.x).iter().zip(&b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10);
    }

    #[test]
    fn gmres_solves_nonsymmetric() {
        let op = |x: &[f64]| {
            let mut y = tridiag(x);
            for i in 1..x.len() {
                y[i] += 0.5 * x[i - 1];
            }
            y
        };
        let b: Vec<f64> = (0..60).map(|i| (i as f64 * 0.11).cos()).collect();
        let out = gmres(op, |r| r.iter().map(|v| v / 3.0).collect(), &b, 10, KrylovOptions::default()).unwrap();
        let res: f64 = op(&out.x).iter().zip(&b).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        assert!(res < 1e-9, "{res}");
    }

    #[test]
    fn zero_rhs() {
        let out = gmres(tridiag, |r| r.to_vec(), &[0.0; 4], 5, KrylovOptions::default()).unwrap();
        assert_eq!(out.iters, 0);
    }
}
