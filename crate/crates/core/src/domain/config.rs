use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DomainSpec;
use crate::cvec::CVec;
use crate::error::{Error, Result};

/// Key/value description of a domain, read from TOML.
///
/// ```toml
/// family = "ellipsoid"      # ball | ellipsoid | s9 | perturbed-ball
/// dimension = 2
/// coefficients = [1.0, 4.0]
/// # perturbed-ball only
/// amplitude = 0.05
/// bump_center = "0.6:0,0:0"
/// bump_width = 0.3
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub family: String,
    pub dimension: Option<usize>,
    pub coefficients: Option<Vec<f64>>,
    pub amplitude: Option<f64>,
    pub bump_center: Option<String>,
    pub bump_width: Option<f64>,
    pub holder_exponent: Option<f64>,
}

impl DomainConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn build(&self) -> Result<DomainSpec> {
        let mut spec = match self.family.to_ascii_lowercase().as_str() {
            "ball" | "unit-ball" | "unitball" => DomainSpec::unit_ball(self.dimension.unwrap_or(2).max(1)),
            "ellipsoid" => {
                let a = self
                    .coefficients
                    .as_ref()
                    .ok_or_else(|| Error::Config("ellipsoid needs `coefficients`".into()))?;
                if let Some(n) = self.dimension {
                    if n != a.len() {
                        return Err(Error::Config(format!(
                            "dimension {n} does not match {} coefficients",
                            a.len()
                        )));
                    }
                }
                DomainSpec::ellipsoid(a)?
            }
            "s9" | "local-model-s9" => {
                if self.dimension.is_some_and(|n| n != 2) {
                    return Err(Error::Config("the local model lives in dimension 2".into()));
                }
                DomainSpec::local_model_s9()
            }
            "perturbed-ball" | "perturbed" => {
                let n = self.dimension.unwrap_or(2);
                let center = match &self.bump_center {
                    Some(s) => s.parse::<CVec>()?,
                    None => CVec::basis(n, 0),
                };
                DomainSpec::perturbed_ball(
                    n,
                    self.amplitude.unwrap_or(0.05),
                    center,
                    self.bump_width.unwrap_or(0.3),
                )?
            }
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        if let Some(a) = self.holder_exponent {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("holder_exponent must lie in (0, 1], got {a}")));
            }
            spec.holder_exponent = a;
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Family;

    #[test]
    fn parses_each_family() {
        let e = DomainConfig::from_toml("family = \"ellipsoid\"\ncoefficients = [1.0, 4.0]\n")
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(e.dim, 2);
        let b = DomainConfig::from_toml("family = \"ball\"\ndimension = 3").unwrap().build().unwrap();
        assert_eq!(b.family, Family::UnitBall);
        assert_eq!(b.dim, 3);
        let p = DomainConfig::from_toml(
            "family = \"perturbed-ball\"\ndimension = 2\namplitude = 0.1\nbump_center = \"0.5:0,0\"\nbump_width = 0.4",
        )
        .unwrap()
        .build()
        .unwrap();
        assert!(matches!(p.family, Family::PerturbedBall { .. }));
        assert!(DomainConfig::from_toml("family = \"s9\"").unwrap().build().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(DomainConfig::from_toml("family = \"torus\"").unwrap().build().is_err());
        assert!(DomainConfig::from_toml("family = \"ellipsoid\"").unwrap().build().is_err());
        assert!(DomainConfig::from_toml("family = \"ellipsoid\"\ncoefficients = [1.0, -1.0]")
            .unwrap()
            .build()
            .is_err());
        assert!(DomainConfig::from_toml("family = \"ball\"\ncolour = 1").is_err());
    }
}
