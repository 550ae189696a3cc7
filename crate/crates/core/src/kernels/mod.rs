//! Kernel families, normalizing constants and bandwidth rotation.

mod quadrature;
mod rotation;
mod spec;

pub use quadrature::{moment, roughness, simpson};
pub use rotation::{
    bandwidth_rotation, determinant, inverse, inverse_sqrt_spd, jacobi_eigen, Rotation,
};
pub use spec::{FourthOrderVariant, KernelFamily, KernelSpec, PolyExpParams};

use crate::error::{Error, Result};

/// `1/sqrt(2 pi)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Evaluates the (shape-scaled) kernel at `u`.
///
/// Univariate families are extended to `u.len()` dimensions as products of
/// their one-dimensional form.
pub fn eval_kernel(spec: &KernelSpec, u: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::Shape {
            expected: 1,
            got: 0,
        });
    }
    Ok(eval_unchecked(spec, u))
}

pub(crate) fn eval_unchecked(spec: &KernelSpec, u: &[f64]) -> f64 {
    let h = spec.h;
    let d = u.len() as i32;
    match spec.family {
        KernelFamily::Matern32Additive => {
            let s: f64 = u.iter().map(|v| (v / h).abs()).sum();
            (1.0 + s) * (-s).exp() / (2f64.powi(d) * (1.0 + d as f64) * h.powi(d))
        }
        KernelFamily::Matern32Product => u
            .iter()
            .map(|v| {
                let a = (v / h).abs();
                (1.0 + a) * (-a).exp() / (4.0 * h)
            })
            .product(),
        _ => u.iter().map(|&v| eval_univariate(spec, v)).product(),
    }
}

/// One-dimensional kernel value, `K(u/h)/h`.
pub fn eval_univariate(spec: &KernelSpec, u: f64) -> f64 {
    let h = spec.h;
    let a = (u / h).abs();
    let unit = match &spec.family {
        KernelFamily::Laplacian => 0.5 * (-a).exp(),
        KernelFamily::Uniform => {
            if a <= 1.0 {
                0.5
            } else {
                0.0
            }
        }
        KernelFamily::Beta { alpha } => {
            if a <= 1.0 {
                (1.0 - a * a).powf(*alpha) / beta_denominator(*alpha)
            } else {
                0.0
            }
        }
        KernelFamily::PolyExp(p) | KernelFamily::Matern { params: p, .. } => {
            let poly = p.betas.iter().rev().fold(0.0, |acc, b| acc * a + b);
            p.gamma * poly * (-p.alpha * a).exp()
        }
        KernelFamily::FourthOrder(FourthOrderVariant::A) => {
            (2.0 * (-a).exp() - 0.25 * (-0.5 * a).exp()) / 3.0
        }
        KernelFamily::FourthOrder(FourthOrderVariant::B) => 0.25 * (3.0 - a) * (-a).exp(),
        KernelFamily::FourthOrder(FourthOrderVariant::C) => 0.2 * (3.0 - 0.25 * a * a) * (-a).exp(),
        KernelFamily::Matern32Additive => 0.25 * (1.0 + a) * (-a).exp(),
        KernelFamily::Matern32Product => 0.25 * (1.0 + a) * (-a).exp(),
        KernelFamily::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * a * a).exp(),
    };
    unit / h
}

/// `2^{2 alpha + 1} B(alpha + 1, alpha + 1)`, through log-gamma.
fn beta_denominator(alpha: f64) -> f64 {
    let ln_b = 2.0 * libm::lgamma(alpha + 1.0) - libm::lgamma(2.0 * alpha + 2.0);
    ((2.0 * alpha + 1.0) * std::f64::consts::LN_2 + ln_b).exp()
}

/// `gamma = 1 / (2 sum_k beta_k k! / alpha^{k+1})`, the constant making the
/// polynomial-exponential kernel integrate to one.
pub fn polyexp_normalizer(alpha: f64, betas: &[f64]) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Parameter(format!(
            "polyexp rate must be positive, got {alpha}"
        )));
    }
    if betas.is_empty() || betas.iter().any(|b| !b.is_finite()) {
        return Err(Error::Parameter(
            "polyexp needs at least one finite coefficient".into(),
        ));
    }
    // term_k = k! / alpha^{k+1}
    let mut term = 1.0 / alpha;
    let mut sum = 0.0;
    for (k, b) in betas.iter().enumerate() {
        if k > 0 {
            term *= k as f64 / alpha;
        }
        sum += b * term;
    }
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::Parameter(format!(
            "polyexp coefficients integrate to {}, kernel cannot be normalized",
            2.0 * sum
        )));
    }
    Ok(1.0 / (2.0 * sum))
}

/// Matérn kernel of order `p` (smoothness `p + 1/2`).
///
/// `alpha = sqrt(2p+1)` and
/// `beta_k = C(p,k) (2p-k)!/(2p)! (2 sqrt(2p+1))^k`; `p = 0` is the Laplacian.
pub fn matern_coefficients(p: i64) -> Result<KernelSpec> {
    if p < 0 {
        return Err(Error::Parameter(format!("Matérn order must be >= 0, got {p}")));
    }
    if p == 0 {
        return Ok(KernelSpec::laplacian());
    }
    let pf = p as f64;
    let alpha = (2.0 * pf + 1.0).sqrt();
    let mut betas = Vec::with_capacity(p as usize + 1);
    let mut beta = 1.0;
    // s_k = p!/(p-k)! (2p-k)!/(2p)! 2^k, summed for the constant
    let mut s = 1.0;
    let mut s_sum = 1.0;
    betas.push(beta);
    for k in 1..=p {
        let kf = k as f64;
        let shrink = (pf - kf + 1.0) / (2.0 * pf - kf + 1.0);
        beta *= shrink / kf * 2.0 * alpha;
        s *= 2.0 * shrink;
        betas.push(beta);
        s_sum += s;
    }
    let gamma = alpha / (2.0 * s_sum);
    Ok(KernelSpec::new(KernelFamily::Matern {
        p: p as u32,
        params: PolyExpParams {
            alpha,
            betas,
            gamma,
        },
    }))
}

/// Shape `h` at which the kernel peak `K(0) = gamma/h` equals the standard
/// normal peak `1/sqrt(2 pi)`, i.e. `h = gamma sqrt(2 pi)`.
pub fn gaussian_matching_bandwidth(spec: &KernelSpec) -> Result<f64> {
    let gamma = spec.gamma().ok_or_else(|| {
        Error::Parameter(format!(
            "peak matching needs a Laplacian, Matérn or polyexp kernel, got {spec}"
        ))
    })?;
    let first = match &spec.family {
        KernelFamily::PolyExp(p) => p.betas[0],
        _ => 1.0,
    };
    Ok(gamma * first / FRAC_1_SQRT_2PI)
}
