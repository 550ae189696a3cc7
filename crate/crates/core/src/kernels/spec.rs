use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which of the three Laplacian-based fourth-order kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourthOrderVariant {
    /// `(2 e^{-|u|} - e^{-|u|/2} / 4) / 3`
    A,
    /// `(3 - |u|) e^{-|u|} / 4`
    B,
    /// `(3 - u^2/4) e^{-|u|} / 5`
    C,
}

/// Coefficients of `gamma * (sum_k beta_k |u|^k) * exp(-alpha |u|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyExpParams {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    Laplacian,
    Uniform,
    /// Symmetric beta kernel `(1-u^2)^alpha` on `[-1, 1]`.
    Beta { alpha: f64 },
    PolyExp(PolyExpParams),
    /// Polynomial-exponential kernel with Matérn coefficients of order `p >= 1`.
    Matern { p: u32, params: PolyExpParams },
    FourthOrder(FourthOrderVariant),
    /// `(1 + |u|_1) e^{-|u|_1} / (2^d (1+d))`
    Matern32Additive,
    /// `prod_k (1 + |u_k|) e^{-|u_k|} / 4^d`
    Matern32Product,
    /// Reference only; has no fast path.
    Gaussian,
}

/// A kernel family together with its shape parameter `h`.
///
/// The shape parameter rescales the unit-bandwidth kernel as
/// `K(u/h)/h`; it is independent of the estimator bandwidth and defaults to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub h: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        Self { family, h: 1.0 }
    }

    pub fn with_shape(mut self, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parameter(format!("kernel shape must be positive, got {h}")));
        }
        self.h = h;
        Ok(self)
    }

    pub fn laplacian() -> Self {
        Self::new(KernelFamily::Laplacian)
    }

    pub fn uniform() -> Self {
        Self::new(KernelFamily::Uniform)
    }

    pub fn gaussian() -> Self {
        Self::new(KernelFamily::Gaussian)
    }

    pub fn matern32_additive() -> Self {
        Self::new(KernelFamily::Matern32Additive)
    }

    pub fn matern32_product() -> Self {
        Self::new(KernelFamily::Matern32Product)
    }

    pub fn fourth_order(v: FourthOrderVariant) -> Self {
        Self::new(KernelFamily::FourthOrder(v))
    }

    pub fn beta(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Parameter(format!(
                "beta kernel exponent must be non-negative, got {alpha}"
            )));
        }
        Ok(Self::new(KernelFamily::Beta { alpha }))
    }

    pub fn polyexp(alpha: f64, betas: Vec<f64>) -> Result<Self> {
        let gamma = super::polyexp_normalizer(alpha, &betas)?;
        Ok(Self::new(KernelFamily::PolyExp(PolyExpParams {
            alpha,
            betas,
            gamma,
        })))
    }

    /// Normalizing constant `gamma` of exponential-polynomial families.
    pub fn gamma(&self) -> Option<f64> {
        match &self.family {
            KernelFamily::Laplacian => Some(0.5),
            KernelFamily::PolyExp(p) | KernelFamily::Matern { params: p, .. } => Some(p.gamma),
            _ => None,
        }
    }

    /// Families defined on the real line and extended by products.
    pub fn is_univariate(&self) -> bool {
        !matches!(
            self.family,
            KernelFamily::Matern32Additive | KernelFamily::Matern32Product
        )
    }

    /// Half-width of the support, or of the interval outside which the
    /// kernel is below double precision for infinite-support families.
    pub fn support_radius(&self) -> f64 {
        let unit = match &self.family {
            KernelFamily::Uniform | KernelFamily::Beta { .. } => 1.0,
            KernelFamily::FourthOrder(FourthOrderVariant::A) => 80.0,
            KernelFamily::PolyExp(p) | KernelFamily::Matern { params: p, .. } => 40.0 / p.alpha.min(1.0),
            _ => 40.0,
        };
        unit * self.h
    }

    /// Whether the support is bounded.
    pub fn is_compact(&self) -> bool {
        matches!(self.family, KernelFamily::Uniform | KernelFamily::Beta { .. })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Laplacian => write!(f, "laplacian")?,
            KernelFamily::Uniform => write!(f, "uniform")?,
            KernelFamily::Beta { alpha } => write!(f, "beta:{alpha}")?,
            KernelFamily::PolyExp(p) => {
                let b: Vec<String> = p.betas.iter().map(f64::to_string).collect();
                write!(f, "polyexp:a={};b={}", p.alpha, b.join(","))?
            }
            KernelFamily::Matern { p, .. } => write!(f, "matern:{p}")?,
            KernelFamily::FourthOrder(v) => {
                let c = match v {
                    FourthOrderVariant::A => 'a',
                    FourthOrderVariant::B => 'b',
                    FourthOrderVariant::C => 'c',
                };
                write!(f, "fourth:{c}")?
            }
            KernelFamily::Matern32Additive => write!(f, "matern32-additive")?,
            KernelFamily::Matern32Product => write!(f, "matern32-product")?,
            KernelFamily::Gaussian => write!(f, "gaussian")?,
        }
        if self.h != 1.0 {
            let sep = if self.has_params() { ';' } else { ':' };
            write!(f, "{sep}h={}", self.h)?;
        }
        Ok(())
    }
}

impl KernelSpec {
    fn has_params(&self) -> bool {
        matches!(
            self.family,
            KernelFamily::Beta { .. }
                | KernelFamily::PolyExp(_)
                | KernelFamily::Matern { .. }
                | KernelFamily::FourthOrder(_)
        )
    }
}

/// Parses `family[:item;item;...]`.
///
/// Items are `key=value` pairs or, for the first item only, a bare value.
/// Keys: `a`/`alpha`, `b`/`beta` (comma-separated list), `p`, `h`. Names are
/// case-insensitive and surrounding whitespace is ignored. Examples:
/// `laplacian`, `uniform`, `beta:2`, `epanechnikov`, `matern:2`,
/// `matern:p=1;h=0.5`, `polyexp:a=1;b=3,-1`, `fourth:b`, `matern32-additive`.
impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim().to_string(), r.trim().to_string()),
            None => (s.clone(), String::new()),
        };
        let mut positional: Option<String> = None;
        let mut keyed: Vec<(String, String)> = Vec::new();
        for (i, item) in rest.split(';').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
            match item.split_once('=') {
                Some((k, v)) => keyed.push((k.trim().to_string(), v.trim().to_string())),
                None if i == 0 => positional = Some(item.to_string()),
                None => return Err(Error::Parse(format!("unexpected kernel parameter '{item}'"))),
            }
        }
        let take = |keys: &[&str], keyed: &mut Vec<(String, String)>| -> Option<String> {
            let pos = keyed.iter().position(|(k, _)| keys.contains(&k.as_str()))?;
            Some(keyed.remove(pos).1)
        };
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{v}' is not a number")))
        };
        let shape = take(&["h"], &mut keyed).map(|v| num(&v)).transpose()?;

        let spec = match name.as_str() {
            "laplacian" | "laplace" => KernelSpec::laplacian(),
            "uniform" | "box" => KernelSpec::uniform(),
            "gaussian" | "normal" => KernelSpec::gaussian(),
            "epanechnikov" => KernelSpec::beta(1.0)?,
            "biweight" => KernelSpec::beta(2.0)?,
            "triweight" => KernelSpec::beta(3.0)?,
            "matern32-additive" | "matern32_additive" => KernelSpec::matern32_additive(),
            "matern32-product" | "matern32_product" => KernelSpec::matern32_product(),
            "beta" => {
                let v = positional
                    .take()
                    .or_else(|| take(&["a", "alpha"], &mut keyed))
                    .ok_or_else(|| Error::Parse("beta kernel needs an exponent".into()))?;
                KernelSpec::beta(num(&v)?)?
            }
            "matern" => {
                let v = positional
                    .take()
                    .or_else(|| take(&["p"], &mut keyed))
                    .ok_or_else(|| Error::Parse("matern kernel needs an order p".into()))?;
                let p: i64 = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("'{v}' is not an integer order")))?;
                super::matern_coefficients(p)?
            }
            "fourth" | "fourth-order" | "fourth-order-laplacian" => {
                let v = positional
                    .take()
                    .or_else(|| take(&["v", "variant"], &mut keyed))
                    .ok_or_else(|| Error::Parse("fourth-order kernel needs a variant a, b or c".into()))?;
                let variant = match v.as_str() {
                    "a" => FourthOrderVariant::A,
                    "b" => FourthOrderVariant::B,
                    "c" => FourthOrderVariant::C,
                    _ => return Err(Error::Parse(format!("unknown fourth-order variant '{v}'"))),
                };
                KernelSpec::fourth_order(variant)
            }
            "polyexp" => {
                let a = take(&["a", "alpha"], &mut keyed)
                    .ok_or_else(|| Error::Parse("polyexp kernel needs a=ALPHA".into()))?;
                let b = take(&["b", "beta", "betas"], &mut keyed)
                    .ok_or_else(|| Error::Parse("polyexp kernel needs b=B0,B1,...".into()))?;
                let betas = b
                    .split(',')
                    .map(|t| num(t.trim()))
                    .collect::<Result<Vec<_>>>()?;
                KernelSpec::polyexp(num(&a)?, betas)?
            }
            _ => return Err(Error::Parse(format!("unknown kernel family '{name}'"))),
        };
        if let Some(p) = positional {
            return Err(Error::Parse(format!("unexpected kernel parameter '{p}'")));
        }
        if let Some((k, _)) = keyed.first() {
            return Err(Error::Parse(format!("unknown kernel parameter '{k}'")));
        }
        match shape {
            Some(h) => spec.with_shape(h),
            None => Ok(spec),
        }
    }
}
