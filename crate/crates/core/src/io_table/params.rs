use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Country-level labor-market and price parameters that accompany a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryParams {
    pub active_population: f64,
    pub nairu: f64,
    pub initial_cpi: f64,
}

impl Default for CountryParams {
    fn default() -> Self {
        Self {
            active_population: 1.0,
            nairu: 0.05,
            initial_cpi: 1.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("{key} = {value} is out of range ({expected})")]
    Range {
        key: &'static str,
        value: f64,
        expected: &'static str,
    },
}

impl CountryParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.active_population > 0.0) {
            return Err(ParamsError::Range {
                key: "active_population",
                value: self.active_population,
                expected: "> 0",
            });
        }
        if !(self.nairu > 0.0 && self.nairu < 0.5) {
            return Err(ParamsError::Range {
                key: "nairu",
                value: self.nairu,
                expected: "0 < nairu < 0.5",
            });
        }
        if !self.initial_cpi.is_finite() {
            return Err(ParamsError::Range {
                key: "initial_cpi",
                value: self.initial_cpi,
                expected: "finite",
            });
        }
        Ok(())
    }

    /// Parses `key = value` text. `#` starts a comment; `initial_cpi`
    /// defaults to 1.0 when absent.
    pub fn parse(text: &str) -> Result<Self, ParamsError> {
        let mut active = None;
        let mut nairu = None;
        let mut cpi = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ParamsError::Syntax {
                line,
                message: format!("expected key = value, got `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let number: f64 = value.parse().map_err(|_| ParamsError::Syntax {
                line,
                message: format!("`{value}` is not a number"),
            })?;
            let slot = match key {
                "active_population" => &mut active,
                "nairu" => &mut nairu,
                "initial_cpi" => &mut cpi,
                other => {
                    return Err(ParamsError::Syntax {
                        line,
                        message: format!("unknown key `{other}`"),
                    })
                }
            };
            if slot.is_some() {
                return Err(ParamsError::Syntax {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            *slot = Some(number);
        }
        let params = Self {
            active_population: active.ok_or(ParamsError::Missing("active_population"))?,
            nairu: nairu.ok_or(ParamsError::Missing("nairu"))?,
            initial_cpi: cpi.unwrap_or(1.0),
        };
        params.validate()?;
        Ok(params)
    }
}

pub fn parse_country_params(path: impl AsRef<Path>) -> Result<CountryParams, ParamsError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ParamsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    CountryParams::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let p = CountryParams::parse(
            "# Austria\nactive_population = 4400000\nnairu=0.05\ninitial_cpi = 0.92 # 2015=1\n",
        )
        .unwrap();
        assert_eq!(p.active_population, 4.4e6);
        assert_eq!(p.nairu, 0.05);
        assert_eq!(p.initial_cpi, 0.92);
    }

    #[test]
    fn cpi_defaults_to_one() {
        let p = CountryParams::parse("active_population=10\nnairu=0.04").unwrap();
        assert_eq!(p.initial_cpi, 1.0);
    }

    #[test]
    fn nairu_range_enforced() {
        let err = CountryParams::parse("active_population=10\nnairu=0.5").unwrap_err();
        assert!(matches!(err, ParamsError::Range { key: "nairu", .. }));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = CountryParams::parse("active_population=10\n\nnairu 0.05").unwrap_err();
        assert!(matches!(err, ParamsError::Syntax { line: 3, .. }));
        let err = CountryParams::parse("active_population=ten").unwrap_err();
        assert!(matches!(err, ParamsError::Syntax { line: 1, .. }));
    }

    #[test]
    fn missing_population_reported() {
        let err = CountryParams::parse("nairu=0.05").unwrap_err();
        assert!(matches!(err, ParamsError::Missing("active_population")));
    }
}
