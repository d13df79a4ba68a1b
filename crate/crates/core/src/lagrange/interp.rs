//! Piecewise cubic interpolation on strictly increasing, nonuniform nodes.

/// Fritsch-Carlson slopes (weighted harmonic mean, zero at local extrema).
pub fn pchip_slopes(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (v[k + 1] - v[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b <= 0.0 {
            continue;
        }
        let w1 = 2.0 * h[k] + h[k - 1];
        let w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / a + w2 / b);
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Cubic Hermite value on `[x0, x1]` with endpoint values and slopes.
#[inline]
pub fn hermite(x0: f64, x1: f64, v0: f64, v1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    // v0 + h01 (v1 - v0) keeps constant pieces exact
    v0 + h01 * (v1 - v0) + h * (h10 * d0 + h11 * d1)
}

/// Evaluates the Hermite interpolant of `(x, v, d)` at increasing `targets`
/// inside `[x[0], x[n-1]]`.
pub fn eval_sorted(x: &[f64], v: &[f64], d: &[f64], targets: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(targets.len());
    let mut k = 0;
    for &t in targets {
        while k + 2 < x.len() && x[k + 1] <= t {
            k += 1;
        }
        if t == x[k] {
            out.push(v[k]);
        } else {
            out.push(hermite(x[k], x[k + 1], v[k], v[k + 1], d[k], d[k + 1], t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| 2.0 - x + 0.3 * x * x * x;
        let df = |x: f64| -1.0 + 0.9 * x * x;
        let (a, b) = (0.2, 1.1);
        for i in 0..=10 {
            let x = a + (b - a) * i as f64 / 10.0;
            assert!((hermite(a, b, f(a), f(b), df(a), df(b), x) - f(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn pchip_preserves_monotone_data() {
        let x = [0.0, 0.3, 1.0, 1.2, 2.0, 3.5];
        let v = [0.0, 0.0, 1.0, 1.1, 5.0, 5.0];
        let d = pchip_slopes(&x, &v);
        let targets: Vec<f64> = (0..=350).map(|i| i as f64 / 100.0).collect();
        let vals = eval_sorted(&x, &v, &d, &targets);
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-14);
        }
        assert!(vals.iter().all(|&y| (0.0..=5.0).contains(&y)));
    }
}
