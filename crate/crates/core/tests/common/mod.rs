//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod gen;

/// Underdamped solution of `x'' + 2 b x' + w0^2 x = 0`.
pub fn damped(b: f64, w0: f64, x0: f64, v0: f64, t: f64) -> f64 {
    assert!(w0 > b, "oracle covers the underdamped case only");
    let wd = (w0 * w0 - b * b).sqrt();
    (-b * t).exp() * (x0 * (wd * t).cos() + (v0 + b * x0) / wd * (wd * t).sin())
}

/// Periodic heat kernel applied to a Gaussian of width `s0` (tails negligible).
pub fn heat_gaussian(s0: f64, k: f64, x: f64, t: f64) -> f64 {
    let s2 = s0 * s0 + 2.0 * k * t;
    s0 / s2.sqrt() * (-x * x / (2.0 * s2)).exp()
}

/// KdV soliton `-(c/2) sech^2(sqrt(c)/2 (x - c t))` on a periodic box.
pub fn soliton_periodic(c: f64, x: f64, t: f64, x0: f64, length: f64) -> f64 {
    let mut z = x - c * t - x0;
    z = z.rem_euclid(length) + x0;
    let s = 1.0 / (0.5 * c.sqrt() * z).cosh();
    -0.5 * c * s * s
}

/// Moments `(<x^2>, <xv>, <v^2>)` of `dx = v dt`, `dv = -g(t) v dt + s(t) dW`
/// from zero initial data, by RK4 on the closed second-moment system.
pub fn second_moments(g: impl Fn(f64) -> f64, s2: impl Fn(f64) -> f64, t1: f64, h: f64) -> impl Fn(f64) -> f64 {
    let n = (t1 / h).round() as usize;
    let f = |t: f64, y: [f64; 3]| [2.0 * y[1], y[2] - g(t) * y[1], -2.0 * g(t) * y[2] + s2(t)];
    let mut y = [0.0; 3];
    let mut xx = vec![0.0];
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = f(t, y);
        let a = |k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
        let k2 = f(t + h / 2.0, a(k1, h / 2.0));
        let k3 = f(t + h / 2.0, a(k2, h / 2.0));
        let k4 = f(t + h, a(k3, h));
        for j in 0..3 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        xx.push(y[0]);
    }
    move |t: f64| xx[(t / h).round() as usize]
}

/// Largest real root of `eps r^3 - m r^2 - k = 0` by Newton from `m / eps`.
pub fn runaway_root(m: f64, k: f64, eps: f64) -> f64 {
    let mut r = m / eps;
    for _ in 0..50 {
        let f = eps * r * r * r - m * r * r - k;
        let d = 3.0 * eps * r * r - 2.0 * m * r;
        r -= f / d;
    }
    r
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
