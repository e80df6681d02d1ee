//! JSON model documents.
//!
//! ```json
//! {"kind":"cev_gauss","delta":0.2,"beta":0.5,"lambda":0.3,"m":-0.1,"eta":0.4}
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Constant, Domain, ExpAffine, GaussianJumps, JumpFamily, ModelSpec, NigJumps};
use crate::error::{LevyxError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `a = δ²e^{2(β-1)x}/2`, jumps `N(m, η²)` at rate `λ e^{2(β-1)x}`, no default.
    CevGauss {
        delta: f64,
        beta: f64,
        lambda: f64,
        m: f64,
        eta: f64,
    },
    /// `a = δ²e^{2βx}/2`, `γ = b + c δ² e^{2βx}`, no jumps.
    Jdcev { delta: f64, beta: f64, b: f64, c: f64 },
    /// NIG jumps with scale `δ0 e^{2(γ-1)x}` and no diffusion.
    NigCev {
        delta0: f64,
        gamma: f64,
        alpha: f64,
        beta: f64,
    },
    /// `a = (b0² + ε b1² e^{βx})/2`, `γ = c0 + ε c1 e^{βx}`,
    /// jumps `N(m, η²)` at rate `λ(1 + ε e^{βx})`.
    ExpEta {
        beta: f64,
        b0: f64,
        b1: f64,
        c0: f64,
        c1: f64,
        eps: f64,
        lambda: f64,
        m: f64,
        eta: f64,
    },
    /// Constant coefficients.
    Flat {
        sigma: f64,
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        m: f64,
        #[serde(default = "default_eta")]
        eta: f64,
    },
}

fn default_eta() -> f64 {
    0.1
}

/// A model document with an optional validation domain under the key
/// `"domain"`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub model: ModelConfig,
    pub domain: Option<DomainConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub t: (f64, f64),
    pub x: (f64, f64),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LevyxError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(LevyxError::Config(format!("{name} must be non-negative, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(LevyxError::Config(format!("{name} must be finite, got {v}")))
    }
}

fn gaussian(intensity: ExpAffine, m: f64, eta: f64) -> JumpFamily {
    JumpFamily::Gaussian(GaussianJumps {
        intensity: Arc::new(intensity),
        mean: Arc::new(Constant(m)),
        std_dev: Arc::new(Constant(eta)),
    })
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        match *self {
            ModelConfig::CevGauss {
                delta,
                beta,
                lambda,
                m,
                eta,
            } => {
                nonnegative("delta", delta)?;
                finite("beta", beta)?;
                nonnegative("lambda", lambda)?;
                finite("m", m)?;
                positive("eta", eta)?;
                let rate = 2.0 * (beta - 1.0);
                Ok(ModelSpec::new(
                    Arc::new(ExpAffine {
                        base: 0.0,
                        scale: 0.5 * delta * delta,
                        rate,
                    }),
                    Arc::new(Constant(0.0)),
                    gaussian(
                        ExpAffine {
                            base: 0.0,
                            scale: lambda,
                            rate,
                        },
                        m,
                        eta,
                    ),
                ))
            }
            ModelConfig::Jdcev { delta, beta, b, c } => {
                positive("delta", delta)?;
                finite("beta", beta)?;
                nonnegative("b", b)?;
                nonnegative("c", c)?;
                let d2 = delta * delta;
                Ok(ModelSpec::new(
                    Arc::new(ExpAffine {
                        base: 0.0,
                        scale: 0.5 * d2,
                        rate: 2.0 * beta,
                    }),
                    Arc::new(ExpAffine {
                        base: b,
                        scale: c * d2,
                        rate: 2.0 * beta,
                    }),
                    JumpFamily::None,
                ))
            }
            ModelConfig::NigCev {
                delta0,
                gamma,
                alpha,
                beta,
            } => {
                positive("delta0", delta0)?;
                finite("gamma", gamma)?;
                positive("alpha", alpha)?;
                if alpha <= (beta + 1.0).abs() || alpha <= beta.abs() {
                    return Err(LevyxError::Config(format!(
                        "alpha = {alpha} must exceed |beta| and |beta + 1| (beta = {beta})"
                    )));
                }
                Ok(ModelSpec::new(
                    Arc::new(Constant(0.0)),
                    Arc::new(Constant(0.0)),
                    JumpFamily::Nig(NigJumps {
                        scale: Arc::new(ExpAffine {
                            base: 0.0,
                            scale: delta0,
                            rate: 2.0 * (gamma - 1.0),
                        }),
                        alpha,
                        beta,
                    }),
                ))
            }
            ModelConfig::ExpEta {
                beta,
                b0,
                b1,
                c0,
                c1,
                eps,
                lambda,
                m,
                eta,
            } => {
                finite("beta", beta)?;
                for (n, v) in [
                    ("b0", b0),
                    ("b1", b1),
                    ("c0", c0),
                    ("c1", c1),
                    ("eps", eps),
                    ("lambda", lambda),
                ] {
                    nonnegative(n, v)?;
                }
                finite("m", m)?;
                positive("eta", eta)?;
                Ok(ModelSpec::new(
                    Arc::new(ExpAffine {
                        base: 0.5 * b0 * b0,
                        scale: 0.5 * eps * b1 * b1,
                        rate: beta,
                    }),
                    Arc::new(ExpAffine {
                        base: c0,
                        scale: eps * c1,
                        rate: beta,
                    }),
                    gaussian(
                        ExpAffine {
                            base: lambda,
                            scale: lambda * eps,
                            rate: beta,
                        },
                        m,
                        eta,
                    ),
                ))
            }
            ModelConfig::Flat {
                sigma,
                gamma,
                lambda,
                m,
                eta,
            } => {
                nonnegative("sigma", sigma)?;
                nonnegative("gamma", gamma)?;
                nonnegative("lambda", lambda)?;
                finite("m", m)?;
                positive("eta", eta)?;
                let jumps = if lambda > 0.0 {
                    gaussian(
                        ExpAffine {
                            base: lambda,
                            scale: 0.0,
                            rate: 0.0,
                        },
                        m,
                        eta,
                    )
                } else {
                    JumpFamily::None
                };
                Ok(ModelSpec::new(
                    Arc::new(Constant(0.5 * sigma * sigma)),
                    Arc::new(Constant(gamma)),
                    jumps,
                ))
            }
        }
    }
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| LevyxError::Config(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(mut value: serde_json::Value) -> Result<Self> {
        let object = value
            .as_object_mut()
            .ok_or_else(|| LevyxError::Config("model document must be a JSON object".into()))?;
        let domain = match object.remove("domain") {
            Some(d) => Some(serde_json::from_value(d).map_err(|e| LevyxError::Config(format!("domain: {e}")))?),
            None => None,
        };
        let model = serde_json::from_value(value).map_err(|e| LevyxError::Config(e.to_string()))?;
        Ok(Self { model, domain })
    }

    pub fn to_value(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(&self.model).expect("model configs always serialize");
        if let (Some(d), Some(obj)) = (self.domain, value.as_object_mut()) {
            obj.insert(
                "domain".into(),
                serde_json::to_value(d).expect("domains always serialize"),
            );
        }
        value
    }

    pub fn build(&self) -> Result<ModelSpec> {
        let mut spec = self.model.build()?;
        if let Some(d) = self.domain {
            if !(d.t.0 < d.t.1 && d.x.0 < d.x.1) {
                return Err(LevyxError::Config("domain bounds must be increasing".into()));
            }
            spec = spec.with_domain(Domain { t: d.t, x: d.x });
        }
        Ok(spec)
    }

    /// Stable serialization used for provenance hashing.
    pub fn canonical_json(&self) -> String {
        self.to_value().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn parses_cev_gauss() {
        let doc =
            ModelDocument::from_json(r#"{"kind":"cev_gauss","delta":0.2,"beta":0.5,"lambda":0.3,"m":-0.1,"eta":0.4}"#)
                .unwrap();
        let model = doc.build().unwrap();
        assert!((model.a_at(0.0, 0.0).unwrap() - 0.02).abs() < 1e-16);
        let v = model.generator_symbol(0.0, 0.0, Complex64::new(0.0, -1.0)).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = ModelDocument::from_json(r#"{"kind":"flat","sigma":0.2,"sigmaa":1}"#).unwrap_err();
        assert!(matches!(err, LevyxError::Config(_)));
    }

    #[test]
    fn rejects_bad_values() {
        let doc = ModelDocument::from_json(r#"{"kind":"jdcev","delta":-0.3,"beta":-0.3,"b":0.01,"c":2}"#).unwrap();
        assert!(doc.build().is_err());
    }

    #[test]
    fn domain_round_trip() {
        let text = r#"{"kind":"flat","sigma":0.2,"domain":{"t":[0,1],"x":[-1,1]}}"#;
        let doc = ModelDocument::from_json(text).unwrap();
        let again = ModelDocument::from_json(&doc.canonical_json()).unwrap();
        assert_eq!(doc, again);
        assert_eq!(doc.build().unwrap().domain.x, (-1.0, 1.0));
    }
}
