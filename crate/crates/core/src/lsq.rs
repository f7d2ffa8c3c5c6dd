//! Levenberg–Marquardt for problems with a handful of parameters.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct LsqOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions { max_iter: 500, tol: 1e-15 }
    }
}

#[derive(Clone, Debug)]
pub struct LsqSolution {
    pub params: Vec<f64>,
    pub chi2: f64,
    pub iterations: usize,
    /// `(JᵀJ)⁻¹` at the solution.
    pub inverse_hessian: DMatrix<f64>,
}

/// Minimizes `Σ rᵢ(p)²`. `model` returns the residual vector and its Jacobian
/// (`jac[i][j] = ∂rᵢ/∂pⱼ`). `valid` rejects steps leaving the admissible region.
pub fn levenberg_marquardt<F, V>(model: F, valid: V, p0: &[f64], opts: &LsqOptions) -> Result<LsqSolution>
where
    F: Fn(&[f64]) -> (Vec<f64>, Vec<Vec<f64>>),
    V: Fn(&[f64]) -> bool,
{
    let np = p0.len();
    let mut p = p0.to_vec();
    if !valid(&p) {
        return Err(Error::FitFailure("starting point outside admissible region".into()));
    }
    let (mut r, mut jac) = model(&p);
    let mut chi2: f64 = r.iter().map(|x| x * x).sum();
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let j = DMatrix::from_fn(r.len(), np, |i, k| jac[i][k]);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * DVector::from_vec(r.clone());
        let mut improved = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            if !valid(&trial) || trial.iter().any(|v| !v.is_finite()) {
                lambda *= 10.0;
                continue;
            }
            let (rt, jt) = model(&trial);
            let c2: f64 = rt.iter().map(|x| x * x).sum();
            if c2.is_finite() && c2 <= chi2 {
                let rel_step = step.iter().zip(&p).map(|(s, x)| s.abs() / (x.abs() + 1e-300)).fold(0.0_f64, f64::max);
                let dc = chi2 - c2;
                p = trial;
                r = rt;
                jac = jt;
                chi2 = c2;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel_step < 1e-14 || dc <= opts.tol * chi2.max(1e-300) && rel_step < 1e-10 {
                    return finish(p, chi2, it, &jac, np);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    finish(p, chi2, it, &jac, np)
}

fn finish(p: Vec<f64>, chi2: f64, iterations: usize, jac: &[Vec<f64>], np: usize) -> Result<LsqSolution> {
    let j = DMatrix::from_fn(jac.len(), np, |i, k| jac[i][k]);
    let jtj = j.transpose() * &j;
    let inverse_hessian = jtj.try_inverse().unwrap_or_else(|| DMatrix::from_element(np, np, f64::NAN));
    Ok(LsqSolution { params: p, chi2, iterations, inverse_hessian })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let model = |p: &[f64]| {
            let r = xs.iter().map(|x| p[0] + p[1] * x - (1.5 - 0.5 * x)).collect();
            let j = xs.iter().map(|x| vec![1.0, *x]).collect();
            (r, j)
        };
        let s = levenberg_marquardt(model, |_| true, &[0.0, 0.0], &LsqOptions::default()).unwrap();
        assert!((s.params[0] - 1.5).abs() < 1e-12);
        assert!((s.params[1] + 0.5).abs() < 1e-12);
    }
}
