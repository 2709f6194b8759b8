//! JSON descriptors for families and functionals.
//!
//! ```json
//! {"family": "gumbel", "G": {"form": "power_int", "k": 0}}
//! {"family": "exp_power_tail", "gamma": 2.0, "G": {"form": "power_abs", "rho": 1.0}}
//! {"family": "super_heavy_log", "c": 1.0, "x0": 7.38905609893065}
//! ```

use serde::{Deserialize, Serialize};

use super::{DistributionModel, FunctionalForm, RatioFunction, SmoothFunctional};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Gumbel,
    ExpPowerTail { gamma: f64 },
    WeibullFrechet { gamma: f64 },
    SymmetricExpPower { gamma: f64 },
    SuperHeavyLog {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<f64>,
    },
    #[serde(rename = "uniform01", alias = "uniform")]
    Uniform01,
    /// Quantile-only Pareto-type tail.
    Pareto { alpha: f64 },
}

impl FamilySpec {
    pub fn build(&self) -> Result<DistributionModel> {
        match *self {
            FamilySpec::Gumbel => Ok(DistributionModel::gumbel()),
            FamilySpec::ExpPowerTail { gamma } => DistributionModel::exp_power_tail(gamma),
            FamilySpec::WeibullFrechet { gamma } => DistributionModel::weibull_frechet(gamma),
            FamilySpec::SymmetricExpPower { gamma } => DistributionModel::symmetric_exp_power(gamma),
            FamilySpec::SuperHeavyLog { c, x0 } => DistributionModel::super_heavy_log(c, x0),
            FamilySpec::Uniform01 => Ok(DistributionModel::uniform()),
            FamilySpec::Pareto { alpha } => DistributionModel::pareto(alpha),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FunctionalSpec {
    #[default]
    Identity,
    PowerInt { k: i32 },
    PowerAbs {
        rho: f64,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        sign: f64,
    },
}

impl FunctionalSpec {
    pub fn build(&self) -> SmoothFunctional {
        match *self {
            FunctionalSpec::Identity => SmoothFunctional::new(FunctionalForm::Identity),
            FunctionalSpec::PowerInt { k } => SmoothFunctional::power_int(k),
            FunctionalSpec::PowerAbs { rho, sign } => SmoothFunctional::power_abs(rho, sign),
        }
    }
}

/// A family together with the functional `G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(rename = "G", default)]
    pub functional: FunctionalSpec,
}

impl ModelDescriptor {
    pub fn new(family: FamilySpec, functional: FunctionalSpec) -> Self {
        Self { family, functional }
    }

    pub fn build(&self) -> Result<RatioFunction> {
        Ok(RatioFunction::new(self.family.build()?, self.functional.build()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_forms() {
        let d: ModelDescriptor =
            serde_json::from_str(r#"{"family": "gumbel", "G": {"form": "power_int", "k": 0}}"#).unwrap();
        assert_eq!(d.family, FamilySpec::Gumbel);
        assert_eq!(d.functional, FunctionalSpec::PowerInt { k: 0 });

        let d: ModelDescriptor = serde_json::from_str(r#"{"family": "uniform"}"#).unwrap();
        assert_eq!(d.family, FamilySpec::Uniform01);
        assert_eq!(d.functional, FunctionalSpec::Identity);

        let d: ModelDescriptor = serde_json::from_str(
            r#"{"family": "exp_power_tail", "gamma": 2.0, "G": {"form": "power_abs", "rho": 1.5}}"#,
        )
        .unwrap();
        assert_eq!(d.functional, FunctionalSpec::PowerAbs { rho: 1.5, sign: 1.0 });
        assert!(d.build().is_ok());
    }

    #[test]
    fn roundtrips_through_json() {
        let d = ModelDescriptor::new(
            FamilySpec::SuperHeavyLog { c: 1.0, x0: Some(10.0) },
            FunctionalSpec::PowerAbs { rho: -0.5, sign: -1.0 },
        );
        let s = serde_json::to_string(&d).unwrap();
        let back: ModelDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn rejects_unknown_family_and_bad_parameters() {
        assert!(serde_json::from_str::<ModelDescriptor>(r#"{"family": "cauchy"}"#).is_err());
        let d: ModelDescriptor = serde_json::from_str(r#"{"family": "weibull_frechet", "gamma": -1}"#).unwrap();
        assert!(d.build().is_err());
    }
}
