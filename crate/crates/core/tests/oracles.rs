use std::f64::consts::PI;

use num_complex::Complex64;
use qfpsim::linalg::eigenvalues;
use qfpsim::qfp::{eom_transform, EomDrive, ModeWindow};
use qfpsim::stats::{mean, sample_std};
use qfpsim::vqe::{ucc_real_amplitudes, EnergyRecord};
use qfpsim::HermitianOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_theta(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// `exp(G) e₀` by scaling and squaring a Taylor series.
fn expm_column(g: &[Vec<f64>]) -> Vec<f64> {
    let d = g.len();
    let norm: f64 = g.iter().flatten().map(|x| x.abs()).sum();
    let squarings = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let s = 2f64.powi(squarings);
    let mul = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
    };
    let scaled: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|x| x / s).collect()).collect();
    let mut out: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = out.clone();
    for n in 1..30 {
        term = mul(&term, &scaled);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= n as f64;
            }
        }
        for i in 0..d {
            for j in 0..d {
                out[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        out = mul(&out, &out);
    }
    (0..d).map(|i| out[i][0]).collect()
}

#[test]
fn ucc_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [2, 3, 5, 9, 16] {
        for _ in 0..5 {
            let theta = random_theta(&mut rng, d - 1, 2.0);
            // generator Σ θ_k (|0⟩⟨k| − |k⟩⟨0|)
            let mut g = vec![vec![0.0; d]; d];
            for k in 1..d {
                g[0][k] = theta[k - 1];
                g[k][0] = -theta[k - 1];
            }
            let oracle = expm_column(&g);
            let a = ucc_real_amplitudes(&theta);
            for (x, y) in a.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-12, "d={d}: {x} vs {y}");
            }
        }
    }
}

/// Cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn eigenvalues_match_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = 10;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-3.0..3.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let h = HermitianOperator::from_rows(&m).unwrap();
        let mut got = eigenvalues(&h);
        got.sort_by(f64::total_cmp);
        for (x, y) in got.iter().zip(jacobi_eigenvalues(m)) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }
}

#[test]
fn eom_matches_fourier_integral() {
    let w = ModeWindow::around((0, 1), 32);
    for (depth, phase) in [(0.8169, 0.0), (0.8283, PI), (1.7, 0.4)] {
        let t = eom_transform(EomDrive::new(depth, phase), w);
        let n = 512;
        for k in -6i64..=6 {
            // (1/2π) ∫ exp(iΘ cos(t + φ)) exp(−ikt) dt
            let c: Complex64 = (0..n)
                .map(|j| {
                    let tt = 2.0 * PI * j as f64 / n as f64;
                    Complex64::from_polar(1.0, depth * (tt + phase).cos() - k as f64 * tt)
                })
                .sum::<Complex64>()
                / n as f64;
            let e = t.element(k, 0);
            assert!((e - c).norm() < 1e-12, "Θ={depth} φ={phase} k={k}: {e} vs {c}");
        }
    }
}

#[test]
fn combined_spread_matches_monte_carlo() {
    let terms = [
        (1.0, EnergyRecord::new(0.9184, 0.002, 0.009)),
        (-1.0, EnergyRecord::new(-2.0158, 0.001, 0.020)),
        (-2.0, EnergyRecord::new(1.2825, 0.0, 0.021)),
    ];
    let q = EnergyRecord::combine(&terms);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| {
            terms
                .iter()
                .map(|(c, r)| {
                    let stat = Normal::new(0.0, r.stat_sigma.max(1e-300)).unwrap().sample(&mut rng);
                    let sys = Normal::new(0.0, r.sys_sigma.max(1e-300)).unwrap().sample(&mut rng);
                    c * (r.value + stat + sys)
                })
                .sum()
        })
        .collect();
    assert!((mean(&samples) - q.value).abs() < 5.0 * q.sigma() / (n as f64).sqrt());
    assert!((sample_std(&samples) / q.sigma() - 1.0).abs() < 0.01);
}
