//! Flat key-value configuration files with `[section]` headers, plus the
//! validated run configuration shared by the CLI and the reproduce driver.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

pub type ConfigMap = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing required key [{section}] {key}")]
    MissingKey { section: String, key: String },
    #[error("invalid value for [{section}] {key}: {value}")]
    BadValue {
        section: String,
        key: String,
        value: String,
    },
}

/// Parse `key = value` lines grouped under `[section]` headers; `#` starts a
/// comment.
pub fn parse(text: &str) -> Result<ConfigMap, ConfigError> {
    let mut map = ConfigMap::new();
    let mut section = String::from("run");
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(ConfigError::Parse {
                    line: ln + 1,
                    msg: "unterminated section".into(),
                });
            }
            section = line[1..line.len() - 1].trim().to_string();
            map.entry(section.clone()).or_default();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: ln + 1,
                msg: "expected key = value".into(),
            });
        };
        map.entry(section.clone())
            .or_default()
            .insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn get<'a>(map: &'a ConfigMap, section: &str, key: &str) -> Option<&'a str> {
    map.get(section)
        .and_then(|s| s.get(key))
        .map(|s| s.as_str())
}

pub fn get_f64(map: &ConfigMap, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
    match get(map, section, key) {
        None => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|_| ConfigError::BadValue {
                section: section.into(),
                key: key.into(),
                value: v.into(),
            }),
    }
}

pub fn get_usize(map: &ConfigMap, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
    match get(map, section, key) {
        None => Ok(None),
        Some(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| ConfigError::BadValue {
                section: section.into(),
                key: key.into(),
                value: v.into(),
            }),
    }
}

/// Domain selector resolved from config keys.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    SphereRadial {
        dim: usize,
        n: usize,
    },
    BallRadial {
        dim: usize,
        radius: f64,
        n: usize,
        dirichlet: bool,
        geodesic: bool,
    },
    Clifford {
        n: usize,
    },
    CliffordHalf {
        n: usize,
    },
    BiAxial {
        n_rho: usize,
        n_phi: usize,
    },
    BiAxialQuarter {
        n_rho: usize,
        m_phi: usize,
    },
    TriSphere {
        subdiv: usize,
    },
    Segment {
        dim: usize,
        h: f64,
        n: usize,
    },
}

impl DomainSpec {
    pub fn from_map(map: &ConfigMap) -> Result<DomainSpec, ConfigError> {
        let kind = get(map, "domain", "kind").unwrap_or("sphere3");
        let n = get_usize(map, "domain", "n")?.unwrap_or(400);
        Ok(match kind {
            "sphere3" | "sphere3-radial" => DomainSpec::SphereRadial { dim: 3, n },
            "sphere2" | "sphere2-radial" => DomainSpec::SphereRadial { dim: 2, n },
            "sphere" => {
                let dim = get_usize(map, "domain", "dim")?.unwrap_or(3);
                DomainSpec::SphereRadial { dim, n }
            }
            "ball" => DomainSpec::BallRadial {
                dim: get_usize(map, "domain", "dim")?.unwrap_or(3),
                radius: get_f64(map, "domain", "radius")?.unwrap_or(std::f64::consts::FRAC_PI_2),
                n,
                dirichlet: get(map, "domain", "bc").unwrap_or("dirichlet") == "dirichlet",
                geodesic: get(map, "domain", "geodesic").unwrap_or("true") == "true",
            },
            "clifford" => DomainSpec::Clifford { n },
            "clifford-half" => DomainSpec::CliffordHalf { n },
            "biaxial" => DomainSpec::BiAxial {
                n_rho: get_usize(map, "domain", "n_rho")?.unwrap_or(64),
                n_phi: get_usize(map, "domain", "n_phi")?.unwrap_or(96),
            },
            "biaxial-quarter" => DomainSpec::BiAxialQuarter {
                n_rho: get_usize(map, "domain", "n_rho")?.unwrap_or(64),
                m_phi: get_usize(map, "domain", "m_phi")?.unwrap_or(24),
            },
            "trisphere" => DomainSpec::TriSphere {
                subdiv: get_usize(map, "domain", "subdiv")?.unwrap_or(4),
            },
            "segment" => DomainSpec::Segment {
                dim: get_usize(map, "domain", "dim")?.unwrap_or(3),
                h: get_f64(map, "domain", "h")?.unwrap_or(0.5),
                n,
            },
            other => {
                return Err(ConfigError::BadValue {
                    section: "domain".into(),
                    key: "kind".into(),
                    value: other.into(),
                })
            }
        })
    }
}

/// Potential selector: builtin by name (with optional Allen-Cahn eps) or a
/// polynomial coefficient list.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub name: String,
    pub eps: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
}

impl PotentialSpec {
    pub fn from_map(map: &ConfigMap) -> Result<PotentialSpec, ConfigError> {
        let name = get(map, "potential", "name")
            .unwrap_or("double_well")
            .to_string();
        let eps = get_f64(map, "potential", "eps")?;
        let coeffs = match get(map, "potential", "coeffs") {
            None => None,
            Some(list) => {
                let parsed: Result<Vec<f64>, _> =
                    list.split(',').map(|t| t.trim().parse::<f64>()).collect();
                Some(parsed.map_err(|_| ConfigError::BadValue {
                    section: "potential".into(),
                    key: "coeffs".into(),
                    value: list.into(),
                })?)
            }
        };
        Ok(PotentialSpec { name, eps, coeffs })
    }

    pub fn build<S: Scalar>(
        &self,
    ) -> Result<crate::potential::Potential<S>, crate::potential::PotentialError> {
        if let Some(c) = &self.coeffs {
            return Ok(crate::potential::Potential::polynomial(c));
        }
        crate::potential::Potential::by_name(&self.name, self.eps.map(S::of))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "
[run]
command = solve  # trailing comment
seed = 42

[domain]
kind = sphere3
n = 200

[potential]
name = double_well
eps = 0.4
";
        let map = parse(text).unwrap();
        assert_eq!(get(&map, "run", "command"), Some("solve"));
        assert_eq!(get_usize(&map, "domain", "n").unwrap(), Some(200));
        let dom = DomainSpec::from_map(&map).unwrap();
        assert_eq!(dom, DomainSpec::SphereRadial { dim: 3, n: 200 });
        let pot = PotentialSpec::from_map(&map).unwrap();
        assert_eq!(pot.eps, Some(0.4));
        let p = pot.build::<f64>().unwrap();
        assert!(p.ac_epsilon.is_some());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse("[run\ncommand=x").is_err());
        assert!(parse("justaword").is_err());
        let map = parse("[domain]\nkind = nosuch").unwrap();
        assert!(DomainSpec::from_map(&map).is_err());
    }

    #[test]
    fn polynomial_coefficients() {
        let map = parse("[potential]\ncoeffs = 0, 0, 0.5").unwrap();
        let spec = PotentialSpec::from_map(&map).unwrap();
        let p = spec.build::<f64>().unwrap();
        assert!((p.eval(2.0) - 2.0).abs() < 1e-12);
    }
}
