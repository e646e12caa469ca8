use std::collections::BTreeMap;
use std::str::FromStr;

use mfleaders::error::{Error, Result};
use mfleaders::synth::{CascadeSpec, GeneratorSpec, Multiplier, WeierstrassVariant};

use crate::args::SynthArgs;

/// `key=value` parameters; every key must be consumed by the generator.
struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(args: &SynthArgs) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in &args.params {
            let (k, v) = p.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("parameter '{p}' is not KEY=VALUE"))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        if let Some(h) = args.hurst {
            map.insert("H".into(), h.to_string());
        }
        if let Some(n) = args.n {
            map.insert("n".into(), n.to_string());
        }
        Ok(Self(map))
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.0.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::InvalidArgument(format!("parameter {key}: cannot parse '{v}'"))
            }),
        }
    }

    fn text(&mut self, key: &str, default: &str) -> String {
        self.0.remove(key).unwrap_or_else(|| default.to_string())
    }

    fn finish(self, kind: &str) -> Result<()> {
        match self.0.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::InvalidArgument(format!(
                "unknown parameter '{k}' for {kind}"
            ))),
        }
    }
}

/// Cascade keys: depth, branching, multiplier (lognormal, logpoisson,
/// binomial) and its law parameters (c2 or sigma2; lambda, beta; weights).
fn cascade(p: &mut Params, default_depth: usize) -> Result<CascadeSpec> {
    let branching = p.get("branching", 2usize)?;
    let depth = p.get("depth", default_depth)?;
    let multiplier = match p.text("multiplier", "lognormal").as_str() {
        "lognormal" => {
            if let Some(s2) = p.0.remove("sigma2") {
                let s2 = s2.parse().map_err(|_| {
                    Error::InvalidArgument(format!("parameter sigma2: cannot parse '{s2}'"))
                })?;
                Multiplier::log_normal(s2)
            } else {
                Multiplier::log_normal_for_c2(p.get("c2", -0.04)?, branching)
            }
        }
        // She-Leveque values by default.
        "logpoisson" => Multiplier::log_poisson(
            p.get("lambda", 2.0 * std::f64::consts::LN_2)?,
            p.get("beta", 2.0 / 3.0)?,
        ),
        "binomial" => {
            let w = p.text("weights", "0.6,0.4");
            let weights = w
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidArgument(format!("weights: cannot parse '{w}'")))?;
            Multiplier::Deterministic { weights }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown multiplier '{other}' (lognormal, logpoisson, binomial)"
            )))
        }
    };
    let spec = CascadeSpec {
        branching,
        multiplier,
        depth,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn spec_from_args(args: &SynthArgs) -> Result<GeneratorSpec> {
    let mut p = Params::parse(args)?;
    let kind = args.kind.as_str();
    let spec = match kind {
        "fbm" => GeneratorSpec::Fbm1d {
            h: p.get("H", 0.7)?,
            n: p.get("n", 4096)?,
        },
        "fbm2d" => GeneratorSpec::Fbm2d {
            h: p.get("H", 0.7)?,
            n: p.get("n", 256)?,
        },
        "weierstrass" => GeneratorSpec::Weierstrass {
            a: p.get("a", 2.0)?,
            h: p.get("H", 0.5)?,
            n: p.get("n", 4096)?,
            variant: match p.text("variant", "sin").as_str() {
                "sin" => WeierstrassVariant::Sin,
                "cos" => WeierstrassVariant::CosRenorm,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown Weierstrass variant '{other}' (sin, cos)"
                    )))
                }
            },
        },
        "cascade" => GeneratorSpec::Cascade(cascade(&mut p, 12)?),
        "mftime" => {
            let h = p.get("H", 0.7)?;
            let n: usize = p.get("n", 4096)?;
            // Four cascade cells per output sample.
            let depth = n.max(2).ilog2() as usize + 2;
            GeneratorSpec::FbmMfTime {
                h,
                n,
                cascade: cascade(&mut p, depth)?,
            }
        }
        "stable" => GeneratorSpec::LevyStable {
            alpha: p.get("alpha", 1.5)?,
            n: p.get("n", 4096)?,
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown kind '{other}' (fbm, fbm2d, weierstrass, cascade, mftime, stable)"
            )))
        }
    };
    p.finish(kind)?;
    Ok(if args.square {
        GeneratorSpec::SquareOf {
            inner: Box::new(spec),
        }
    } else {
        spec
    })
}
