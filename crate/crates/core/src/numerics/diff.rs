//! Central finite differences.

use num_complex::Complex64;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Derivative of order `order` at `t` with step `h`.
///
/// Orders 1 and 2 use the fourth-order five-point stencils; higher orders
/// use the second-order central difference `delta^n f / h^n`.
pub fn fd_derivative<F: Fn(f64) -> f64>(g: F, t: f64, order: usize, h: f64) -> f64 {
    match order {
        0 => g(t),
        1 => (g(t - 2.0 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2.0 * h)) / (12.0 * h),
        2 => {
            (-g(t - 2.0 * h) + 16.0 * g(t - h) - 30.0 * g(t) + 16.0 * g(t + h) - g(t + 2.0 * h))
                / (12.0 * h * h)
        }
        n => {
            let mut acc = 0.0;
            for k in 0..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binomial(n, k) * g(t + (n as f64 / 2.0 - k as f64) * h);
            }
            acc / h.powi(n as i32)
        }
    }
}

/// Complex-valued counterpart of [`fd_derivative`].
pub fn fd_derivative_c<F: Fn(f64) -> Complex64>(g: F, t: f64, order: usize, h: f64) -> Complex64 {
    let re = fd_derivative(|x| g(x).re, t, order, h);
    let im = fd_derivative(|x| g(x).im, t, order, h);
    Complex64::new(re, im)
}
