//! JSON configuration blocks and the `kind:args` flag shorthand.

use gfq_core::regimes::HorizonFamily;
use gfq_core::variance::{PowerLaw, DEFAULT_TABLE_TOLERANCE};
use gfq_core::{QueueSpec, VarianceModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input variance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Fbm {
        hurst: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    Table {
        knots: Vec<(f64, f64)>,
        /// (A0, alpha0)
        origin: (f64, f64),
        /// (A_inf, alpha_inf)
        tail: (f64, f64),
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn build(&self) -> Result<VarianceModel> {
        Ok(match self {
            Self::Fbm { hurst, scale } => VarianceModel::fbm(*hurst, *scale)?,
            Self::Table {
                knots,
                origin,
                tail,
                tolerance,
            } => VarianceModel::table(
                knots.clone(),
                PowerLaw::new(origin.0, origin.1),
                PowerLaw::new(tail.0, tail.1),
                tolerance.unwrap_or(DEFAULT_TABLE_TOLERANCE),
            )?,
        })
    }

    /// `fbm:H` or `fbm:H,scale`.
    pub fn parse_flag(s: &str) -> Result<Self> {
        let (kind, args) = split_flag(s)?;
        match (kind, args.as_slice()) {
            ("fbm", [h]) => Ok(Self::Fbm { hurst: *h, scale: 1.0 }),
            ("fbm", [h, scale]) => Ok(Self::Fbm {
                hurst: *h,
                scale: *scale,
            }),
            _ => Err(Error::Config(format!(
                "model flag must be fbm:H or fbm:H,scale (tables need --config), got '{s}'"
            ))),
        }
    }
}

/// Service rate and initial backlog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueConfig {
    pub c: f64,
    #[serde(default)]
    pub x: f64,
}

pub fn queue_spec(model: &ModelConfig, queue: &QueueConfig) -> Result<QueueSpec> {
    Ok(QueueSpec::new(queue.c, queue.x, model.build()?)?)
}

fn split_flag(s: &str) -> Result<(&str, Vec<f64>)> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("expected kind:args, got '{s}'")))?;
    let args = rest
        .split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{a}' in '{s}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((kind.trim(), args))
}

/// `fixed:T`, `power:kappa,rho`, `offset:delta,beta`, `exp:C` or `exp:C,exponent`.
pub fn parse_horizon(s: &str) -> Result<HorizonFamily> {
    let (kind, args) = split_flag(s)?;
    let family = match (kind, args.as_slice()) {
        ("fixed", [t]) => HorizonFamily::Fixed { t: *t },
        ("power", [kappa, rho]) => HorizonFamily::Power {
            kappa: *kappa,
            rho: *rho,
        },
        ("offset", [delta, beta]) => HorizonFamily::Offset {
            delta: *delta,
            beta: *beta,
        },
        ("exp", [c]) => HorizonFamily::Exp { c: *c, exponent: None },
        ("exp", [c, p]) => HorizonFamily::Exp {
            c: *c,
            exponent: Some(*p),
        },
        _ => return Err(Error::Config(format!("unrecognized horizon '{s}'"))),
    };
    family.validate()?;
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags() {
        assert_eq!(
            ModelConfig::parse_flag("fbm:0.5").unwrap(),
            ModelConfig::Fbm { hurst: 0.5, scale: 1.0 }
        );
        assert_eq!(
            parse_horizon("power:1,0.8").unwrap(),
            HorizonFamily::Power { kappa: 1.0, rho: 0.8 }
        );
        assert_eq!(
            parse_horizon("exp:2").unwrap(),
            HorizonFamily::Exp { c: 2.0, exponent: None }
        );
        assert!(parse_horizon("power:1").is_err());
        assert!(parse_horizon("power:-1,1").is_err());
        assert!(ModelConfig::parse_flag("table:1").is_err());
    }

    #[test]
    fn json_blocks() {
        let m: ModelConfig = serde_json::from_str(r#"{"kind":"fbm","hurst":0.75}"#).unwrap();
        assert_eq!(m, ModelConfig::Fbm { hurst: 0.75, scale: 1.0 });
        assert!(serde_json::from_str::<ModelConfig>(r#"{"kind":"fbm","hurst":0.75,"h":1}"#).is_err());
        let t: ModelConfig = serde_json::from_str(
            r#"{"kind":"table","knots":[[0.1,0.1],[10,10]],"origin":[1,0.5],"tail":[1,0.5]}"#,
        )
        .unwrap();
        assert!(!t.build().unwrap().is_brownian());
        let h: HorizonFamily = serde_json::from_str(r#"{"kind":"fixed","T":3}"#).unwrap();
        assert_eq!(h, HorizonFamily::Fixed { t: 3.0 });
        assert!(serde_json::from_str::<HorizonFamily>(r#"{"kind":"fixed","T":3,"x":1}"#).is_err());
    }
}
