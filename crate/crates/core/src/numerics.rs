//! Quadrature, finite differences and interpolation on uniform grids.
//!
//! Everything here works on plain slices. Grids are uniform unless a
//! function says otherwise.

/// Composite Simpson rule over `values` sampled with spacing `h`.
///
/// An odd number of intervals is handled by closing the last three
/// intervals with Simpson's 3/8 rule, so the rule stays fourth order for
/// any node count >= 4.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            if intervals % 2 == 0 {
                simpson_even(values, h)
            } else {
                let head = &values[..n - 3];
                let tail = &values[n - 4..];
                let three_eighths =
                    3.0 * h / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3]);
                simpson_even(head, h) + three_eighths
            }
        }
    }
}

fn simpson_even(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    debug_assert!(n % 2 == 1);
    if n == 1 {
        return 0.0;
    }
    let mut odd = 0.0;
    let mut even = 0.0;
    for (k, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even)
}

/// Composite trapezoid rule.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (values[0] + values[n - 1]) + values[1..n - 1].iter().sum::<f64>()),
    }
}

/// Running integral from the first node, fourth-order accurate at every node.
///
/// Each interval is integrated with the cubic through four neighbouring
/// samples (shifted inward at the ends).
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + 0.5 * h * (values[k - 1] + values[k]);
        }
        return out;
    }
    for k in 0..n - 1 {
        let piece = if k == 0 {
            h / 24.0 * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3])
        } else if k == n - 2 {
            h / 24.0
                * (9.0 * values[n - 1] + 19.0 * values[n - 2] - 5.0 * values[n - 3]
                    + values[n - 4])
        } else {
            h / 24.0
                * (-values[k - 1] + 13.0 * values[k] + 13.0 * values[k + 1] - values[k + 2])
        };
        out[k + 1] = out[k] + piece;
    }
    out
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Fourth-order first derivative of uniformly sampled data.
///
/// Centered five-point stencil in the interior, one-sided five-point
/// stencils at the two nodes nearest each end. Needs at least five samples;
/// shorter inputs fall back to second order.
pub fn derivative4(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    if n < 5 {
        return derivative2(values, h);
    }
    let f = values;
    let mut d = vec![0.0; n];
    let s = 1.0 / (12.0 * h);
    d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for k in 2..n - 2 {
        d[k] = s * (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]);
    }
    let m = n - 1;
    d[m] = s * (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]);
    d[m - 1] =
        s * (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]);
    d
}

/// Second-order first derivative (centered, one-sided three-point at the ends).
pub fn derivative2(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let f = values;
    match n {
        0 => vec![],
        1 => vec![0.0],
        2 => vec![(f[1] - f[0]) / h; 2],
        _ => {
            let mut d = vec![0.0; n];
            d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
            for k in 1..n - 1 {
                d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
            }
            d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
            d
        }
    }
}

/// Cubic Hermite interpolation on `[x0, x1]` from values and slopes.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Index `k` with `xs[k] <= x <= xs[k + 1]`, clamped to the valid range.
pub fn bracket(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    match xs.binary_search_by(|v| v.partial_cmp(&x).expect("NaN in grid")) {
        Ok(k) => k.min(n - 2),
        Err(k) => k - 1,
    }
}

/// Natural cubic spline through strictly increasing abscissae.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the standard tridiagonal system.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let c = h1 / 6.0;
                let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (rhs - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Self { x, y, m }
    }

    fn locate(&self, t: f64) -> (usize, f64, f64, f64) {
        let k = bracket(&self.x, t);
        let h = self.x[k + 1] - self.x[k];
        let a = (self.x[k + 1] - t) / h;
        let b = (t - self.x[k]) / h;
        (k, h, a, b)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (k, h, a, b) = self.locate(t);
        a * self.y[k]
            + b * self.y[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let (k, h, a, b) = self.locate(t);
        (self.y[k + 1] - self.y[k]) / h
            + ((3.0 * b * b - 1.0) * self.m[k + 1] - (3.0 * a * a - 1.0) * self.m[k]) * h / 6.0
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        let (k, _, a, b) = self.locate(t);
        a * self.m[k] + b * self.m[k + 1]
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(a: f64, b: f64, n: usize) -> (Vec<f64>, f64) {
        let h = (b - a) / (n - 1) as f64;
        ((0..n).map(|k| a + k as f64 * h).collect(), h)
    }

    #[test]
    fn simpson_is_exact_for_cubics_even_and_odd_counts() {
        for n in [5, 6, 7, 8, 33, 256] {
            let (x, h) = grid(-1.0, 2.0, n);
            let f: Vec<f64> = x.iter().map(|t| t * t * t - 2.0 * t + 1.0).collect();
            // antiderivative t^4/4 - t^2 + t
            let exact = (16.0 / 4.0 - 4.0 + 2.0) - (0.25 - 1.0 - 1.0);
            assert_relative_eq!(simpson(&f, h), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let (x, h) = grid(0.0, 1.5, 41);
        let f: Vec<f64> = x.iter().map(|t| t.cos()).collect();
        let c = cumulative(&f, h);
        for (t, v) in x.iter().zip(&c) {
            assert!((v - t.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn fourth_order_derivative_converges() {
        let err = |n: usize| {
            let (x, h) = grid(0.0, 2.0, n);
            let f: Vec<f64> = x.iter().map(|t| (1.3 * t).sin()).collect();
            let d = derivative4(&f, h);
            x.iter()
                .zip(&d)
                .map(|(t, v)| (v - 1.3 * (1.3 * t).cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(41) / err(81)).log2();
        assert!(order > 3.7, "order {order}");
    }

    #[test]
    fn spline_reproduces_cubic_interior_and_derivatives_are_continuous() {
        let (x, _) = grid(-1.0, 0.0, 21);
        let y: Vec<f64> = x.iter().map(|t| 0.3 + 0.5 * t).collect();
        let s = CubicSpline::new(x, y);
        assert_relative_eq!(s.eval(-0.37), 0.3 - 0.5 * 0.37, epsilon = 1e-14);
        assert_relative_eq!(s.deriv(-0.37), 0.5, epsilon = 1e-12);
        assert!(s.deriv2(-0.37).abs() < 1e-12);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| 2.0 * t * t * t - t + 0.5;
        let df = |t: f64| 6.0 * t * t - 1.0;
        let v = hermite(0.2, 0.9, f(0.2), f(0.9), df(0.2), df(0.9), 0.47);
        assert_relative_eq!(v, f(0.47), epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_exact_to_degree_nine() {
        let v = gauss_legendre(|t| t.powi(9) + t.powi(4), 0.0, 1.0);
        assert_relative_eq!(v, 0.1 + 0.2, epsilon = 1e-14);
    }
}
