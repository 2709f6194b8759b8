use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomFunctional {
    pub name: String,
    big_g: RealFn,
    g: RealFn,
}

impl CustomFunctional {
    pub fn new(
        name: impl Into<String>,
        big_g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            big_g: Arc::new(big_g),
            g: Arc::new(g),
        }
    }
}

impl fmt::Debug for CustomFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunctional")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// Shape of the derivative `g = G′`.
#[derive(Debug, Clone)]
pub enum FunctionalForm {
    /// `G(x) = x`.
    Identity,
    /// `g(x) = x^k` for integer `k`.
    PowerInt(i32),
    /// `g(x) = sign·|x|^ρ`.
    PowerAbs { rho: f64, sign: f64 },
    Custom(CustomFunctional),
}

/// A differentiable `G`, optionally scaled by a constant.
#[derive(Debug, Clone)]
pub struct SmoothFunctional {
    pub form: FunctionalForm,
    pub scale: f64,
}

impl Default for SmoothFunctional {
    fn default() -> Self {
        Self::identity()
    }
}

impl SmoothFunctional {
    pub fn new(form: FunctionalForm) -> Self {
        Self { form, scale: 1.0 }
    }

    pub fn identity() -> Self {
        Self::new(FunctionalForm::Identity)
    }

    pub fn power_int(k: i32) -> Self {
        Self::new(FunctionalForm::PowerInt(k))
    }

    pub fn power_abs(rho: f64, sign: f64) -> Self {
        Self::new(FunctionalForm::PowerAbs {
            rho,
            sign: if sign < 0.0 { -1.0 } else { 1.0 },
        })
    }

    pub fn scaled(mut self, lambda: f64) -> Self {
        self.scale *= lambda;
        self
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.form, FunctionalForm::Custom(_))
    }

    /// `G(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let raw = match &self.form {
            FunctionalForm::Identity => x,
            FunctionalForm::PowerInt(k) => {
                if *k == -1 {
                    x.abs().ln()
                } else {
                    x.powi(k + 1) / f64::from(k + 1)
                }
            }
            FunctionalForm::PowerAbs { rho, sign } => {
                let mag = if *rho == -1.0 {
                    x.abs().ln()
                } else {
                    x.abs().powf(rho + 1.0) / (rho + 1.0)
                };
                sign * x.signum() * mag
            }
            FunctionalForm::Custom(c) => (c.big_g)(x),
        };
        self.scale * raw
    }

    /// `g(x) = G′(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        let raw = match &self.form {
            FunctionalForm::Identity => 1.0,
            FunctionalForm::PowerInt(k) => x.powi(*k),
            FunctionalForm::PowerAbs { rho, sign } => sign * x.abs().powf(*rho),
            FunctionalForm::Custom(c) => (c.g)(x),
        };
        self.scale * raw
    }

    /// `g′(x)`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let raw = match &self.form {
            FunctionalForm::Identity => 0.0,
            FunctionalForm::PowerInt(0) => 0.0,
            FunctionalForm::PowerInt(k) => f64::from(*k) * x.powi(k - 1),
            FunctionalForm::PowerAbs { rho, sign } => {
                if *rho == 0.0 {
                    0.0
                } else {
                    sign * rho * x.abs().powf(rho - 1.0) * x.signum()
                }
            }
            FunctionalForm::Custom(c) => {
                let h = 1e-6 * (1.0 + x.abs());
                ((c.g)(x + h) - (c.g)(x - h)) / (2.0 * h)
            }
        };
        self.scale * raw
    }

    /// `ln |g(x)|` given `ln |x|`, so that `g` can be evaluated at points
    /// whose magnitude overflows.
    pub fn ln_abs_derivative(&self, x: f64, ln_abs_x: f64) -> f64 {
        let raw = match &self.form {
            FunctionalForm::Identity | FunctionalForm::PowerInt(0) => 0.0,
            FunctionalForm::PowerInt(k) => f64::from(*k) * ln_abs_x,
            FunctionalForm::PowerAbs { rho, .. } => {
                if *rho == 0.0 {
                    0.0
                } else {
                    rho * ln_abs_x
                }
            }
            FunctionalForm::Custom(c) => (c.g)(x).abs().ln(),
        };
        raw + self.scale.abs().ln()
    }

    /// Sign of `g(x)`; 0 where `g` vanishes.
    pub fn derivative_sign(&self, x: f64) -> f64 {
        let raw = match &self.form {
            FunctionalForm::Identity | FunctionalForm::PowerInt(0) => 1.0,
            FunctionalForm::PowerInt(k) => {
                if x == 0.0 {
                    if *k > 0 {
                        0.0
                    } else {
                        f64::NAN
                    }
                } else if k % 2 == 0 {
                    1.0
                } else {
                    x.signum()
                }
            }
            FunctionalForm::PowerAbs { rho, sign } => {
                if x == 0.0 && *rho > 0.0 {
                    0.0
                } else {
                    *sign
                }
            }
            FunctionalForm::Custom(c) => {
                let g = (c.g)(x);
                if g == 0.0 {
                    0.0
                } else {
                    g.signum()
                }
            }
        };
        raw * self.scale.signum()
    }

    /// Elasticity `x·g′(x)/g(x)`.
    pub fn elasticity(&self, x: f64) -> f64 {
        match &self.form {
            FunctionalForm::Identity => 0.0,
            FunctionalForm::PowerInt(k) => f64::from(*k),
            FunctionalForm::PowerAbs { rho, .. } => *rho,
            FunctionalForm::Custom(c) => {
                let h = 1e-6 * (1.0 + x.abs());
                let dg = ((c.g)(x + h) - (c.g)(x - h)) / (2.0 * h);
                x * dg / (c.g)(x)
            }
        }
    }
}
