use super::{eval_univariate, KernelSpec};

const PANELS: usize = 100_000;

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2).next_multiple_of(2);
    let step = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let v = f(a + i as f64 * step);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    step / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// `int f(u) du` over the kernel's support. Compact supports go through
/// `u = r sin(theta)`, which smooths endpoint singularities of the beta family.
fn integrate(spec: &KernelSpec, f: impl Fn(f64) -> f64) -> f64 {
    let r = spec.support_radius();
    if spec.is_compact() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        simpson(|t| f(r * t.sin()) * r * t.cos(), -half_pi, half_pi, PANELS)
    } else {
        simpson(f, -r, r, PANELS)
    }
}

/// `int u^j K(u) du` over the kernel's (truncated) support.
pub fn moment(spec: &KernelSpec, j: i32) -> f64 {
    integrate(spec, |u| u.powi(j) * eval_univariate(spec, u))
}

/// `int K(u)^2 du`
pub fn roughness(spec: &KernelSpec) -> f64 {
    integrate(spec, |u| eval_univariate(spec, u).powi(2))
}
