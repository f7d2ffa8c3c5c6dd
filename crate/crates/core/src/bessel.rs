//! Integer-order Bessel functions of the first kind.

/// `J_0(x) ..= J_nmax(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let mut m = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if m % 2 == 1 {
        m += 1;
    }

    let mut j = vec![0.0; m + 2];
    j[m] = 1e-30;
    for k in (1..=m).rev() {
        j[k - 1] = 2.0 * k as f64 / ax * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let sum = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for n in 0..=nmax {
        let v = j[n] / sum;
        out[n] = if x < 0.0 && n % 2 == 1 { -v } else { v };
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let an = n.unsigned_abs() as usize;
    let v = bessel_j_upto(an, x)[an];
    if n < 0 && an % 2 == 1 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // power series, fine for small x
    fn series(n: usize, x: f64) -> f64 {
        let mut term = (x / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
        let mut s = term;
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
            s += term;
        }
        s
    }

    #[test]
    fn matches_power_series() {
        for &x in &[0.1, 0.8169, 1.0, 2.5, 5.0, -1.3] {
            let js = bessel_j_upto(12, x);
            for n in 0..=12 {
                assert!((js[n] - series(n, x)).abs() < 1e-13, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn sum_of_squares_is_one() {
        for &x in &[0.3, 0.8283, 7.0, 25.0] {
            let js = bessel_j_upto(80, x);
            let s: f64 = js[0] * js[0] + 2.0 * js[1..].iter().map(|v| v * v).sum::<f64>();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_order() {
        assert!((bessel_j(-3, 1.2) + bessel_j(3, 1.2)).abs() < 1e-15);
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(2, 0.0), 0.0);
    }
}
