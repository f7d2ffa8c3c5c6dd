//! Sample statistics and two-parameter confidence ellipses.

use serde::{Deserialize, Serialize};

/// χ² quantile for two degrees of freedom at 68.27 % coverage.
pub const CHI2_2DOF_1SIGMA: f64 = 2.295_748_928_898_636;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1); zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Sample covariance of paired data.
pub fn covariance2(pts: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut c = [[0.0; 2]; 2];
    for p in pts {
        let dx = p[0] - mx;
        let dy = p[1] - my;
        c[0][0] += dx * dx;
        c[0][1] += dx * dy;
        c[1][1] += dy * dy;
    }
    let den = (n - 1.0).max(1.0);
    c[0][0] /= den;
    c[0][1] /= den;
    c[1][1] /= den;
    c[1][0] = c[0][1];
    c
}

/// Linear-interpolated quantile, `q` in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - f) + v[i + 1] * f
    } else {
        v[i]
    }
}

/// Confidence ellipse of a 2×2 covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceEllipse {
    pub center: [f64; 2],
    /// Semi-axis lengths, descending.
    pub radii: [f64; 2],
    /// Unit eigenvectors matching `radii`.
    pub axes: [[f64; 2]; 2],
    /// Half-extent of the ellipse along each parameter direction.
    pub projected: [f64; 2],
}

impl ConfidenceEllipse {
    pub fn from_covariance(center: [f64; 2], cov: [[f64; 2]; 2], chi2: f64) -> Self {
        let (a, b, d) = (cov[0][0], cov[0][1], cov[1][1]);
        let tr = a + d;
        let disc = ((a - d) * (a - d) / 4.0 + b * b).sqrt();
        let l1 = (tr / 2.0 + disc).max(0.0);
        let l2 = (tr / 2.0 - disc).max(0.0);
        let v1 = if b.abs() > 1e-300 {
            let v = [l1 - d, b];
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / n, v[1] / n]
        } else if a >= d {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        };
        let v2 = [-v1[1], v1[0]];
        let r1 = (chi2 * l1).sqrt();
        let r2 = (chi2 * l2).sqrt();
        let projected = [
            ((v1[0] * r1).powi(2) + (v2[0] * r2).powi(2)).sqrt(),
            ((v1[1] * r1).powi(2) + (v2[1] * r2).powi(2)).sqrt(),
        ];
        ConfidenceEllipse { center, radii: [r1, r2], axes: [v1, v2], projected }
    }

    /// Boundary points for plotting.
    pub fn outline(&self, n: usize) -> Vec<[f64; 2]> {
        (0..=n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let (c, s) = (t.cos() * self.radii[0], t.sin() * self.radii[1]);
                [
                    self.center[0] + c * self.axes[0][0] + s * self.axes[1][0],
                    self.center[1] + c * self.axes[0][1] + s * self.axes[1][1],
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned() {
        let e = ConfidenceEllipse::from_covariance([0.0, 0.0], [[4.0, 0.0], [0.0, 1.0]], 1.0);
        assert!((e.radii[0] - 2.0).abs() < 1e-14);
        assert!((e.projected[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn basic_moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((sample_std(&xs) - 1.2909944487358056).abs() < 1e-15);
        assert_eq!(quantile(&xs, 0.5), 2.5);
    }
}
