//! Scenario files and their resolution against the catalog.

use std::collections::BTreeMap;

use holoform::lie::{catalog, Backend, CatalogSpec, CATALOG};
use holoform::surface::{ColoredPolygon, Labels, BUILTINS};
use holoform::torus_morita::{Mode, SkewTheta};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub backend: Option<BackendField>,
    #[serde(default)]
    pub surface: Option<SurfaceField>,
    #[serde(default)]
    pub coloring: BTreeMap<String, String>,
    #[serde(default)]
    pub seeds: Option<Seeds>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Random point radius in algebra coordinates.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub gluing: Option<Gluing>,
    #[serde(default)]
    pub theta: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    pub planck: Option<Entry>,
    /// Search radius for centers of irrational quantum tori.
    #[serde(default)]
    pub qt_bound: Option<i64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum BackendField {
    Short(String),
    Spec(CatalogSpec),
    Many(Vec<BackendField>),
}

/// A builtin name (`"all"` for every builtin) or an explicit side-token word.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SurfaceField {
    Name(String),
    Tokens(Vec<String>),
}

/// An explicit list or a half-open range `"a..b"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range(String),
}

/// A rational written as a string, or a JSON number.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    pub fn text(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Number(x) => format!("{x}"),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gluing {
    /// Builtin glued on the right.
    pub with: String,
    pub seam1: Vec<usize>,
    pub seam2: Vec<usize>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn backends(&self) -> Result<Vec<Backend>, CliError> {
        let field = self.backend.as_ref().ok_or_else(|| CliError::Config("config has no `backend`".into()))?;
        let mut specs = Vec::new();
        collect_specs(field, &mut specs)?;
        specs.iter().map(|s| catalog(s).map_err(|e| CliError::Config(e.to_string()))).collect()
    }

    /// Builtin names are colored through `coloring` keys `r`, `b`, `v`;
    /// token words through arcs' names.
    pub fn surfaces(&self) -> Result<Vec<ColoredPolygon>, CliError> {
        let field = self.surface.as_ref().ok_or_else(|| CliError::Config("config has no `surface`".into()))?;
        let labels = self.labels()?;
        let cfg = |e: holoform::Error| CliError::Config(e.to_string());
        match field {
            SurfaceField::Name(n) if n == "all" => BUILTINS.iter().map(|b| ColoredPolygon::builtin(b, &labels).map_err(cfg)).collect(),
            SurfaceField::Name(n) => Ok(vec![ColoredPolygon::builtin(n, &labels).map_err(cfg)?]),
            SurfaceField::Tokens(t) => {
                let toks: Vec<&str> = t.iter().map(String::as_str).collect();
                Ok(vec![ColoredPolygon::from_tokens(self.name.as_deref().unwrap_or("word"), &toks, &self.coloring).map_err(cfg)?])
            }
        }
    }

    pub fn labels(&self) -> Result<Labels, CliError> {
        let mut l = Labels::default();
        if matches!(self.surface, Some(SurfaceField::Name(_))) {
            for (k, v) in &self.coloring {
                match k.as_str() {
                    "r" => l.r = v.clone(),
                    "b" => l.b = v.clone(),
                    "v" => l.v = v.clone(),
                    _ => return Err(CliError::Config(format!("builtin coloring key `{k}` must be r, b or v"))),
                }
            }
        }
        Ok(l)
    }

    pub fn seeds(&self) -> Result<Vec<u64>, CliError> {
        let mut s = match &self.seeds {
            None => vec![0],
            Some(Seeds::List(v)) => v.clone(),
            Some(Seeds::Range(r)) => {
                let (a, b) = r.split_once("..").ok_or_else(|| CliError::Config(format!("seed range `{r}` is not `a..b`")))?;
                let parse = |x: &str| x.trim().parse::<u64>().map_err(|_| CliError::Config(format!("bad seed range `{r}`")));
                (parse(a)?..parse(b)?).collect()
            }
        };
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(CliError::Config("no seeds".into()));
        }
        Ok(s)
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(Mode::Float)
    }

    pub fn theta(&self, mode: Mode) -> Result<Option<SkewTheta>, CliError> {
        self.theta
            .as_ref()
            .map(|rows| {
                let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(Entry::text).collect()).collect();
                SkewTheta::parse(&rows, mode).map_err(|e| CliError::Config(e.to_string()))
            })
            .transpose()
    }
}

fn collect_specs(f: &BackendField, out: &mut Vec<CatalogSpec>) -> Result<(), CliError> {
    match f {
        BackendField::Short(s) if s == "all" => {
            for c in CATALOG {
                out.push(CatalogSpec::parse(c).expect("catalog names parse"));
            }
        }
        BackendField::Short(s) => out.push(CatalogSpec::parse(s).map_err(|e| CliError::Config(e.to_string()))?),
        BackendField::Spec(s) => out.push(s.clone()),
        BackendField::Many(v) => {
            for x in v {
                collect_specs(x, out)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioConfig::from_json(r#"{"backend": "sl2c_iwasawa", "colour": {}}"#).is_err());
    }

    #[test]
    fn backend_forms() {
        let c = ScenarioConfig::from_json(r#"{"backend": ["abelian_double(2)", {"name": "cotangent_double", "h": "su2"}]}"#).unwrap();
        assert_eq!(c.backends().unwrap().len(), 2);
        let c = ScenarioConfig::from_json(r#"{"backend": "all"}"#).unwrap();
        assert_eq!(c.backends().unwrap().len(), CATALOG.len());
    }

    #[test]
    fn seed_range_is_sorted() {
        let c = ScenarioConfig::from_json(r#"{"seeds": [3, 1, 3]}"#).unwrap();
        assert_eq!(c.seeds().unwrap(), vec![1, 3]);
        let c = ScenarioConfig::from_json(r#"{"seeds": "2..5"}"#).unwrap();
        assert_eq!(c.seeds().unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn token_surface_with_coloring() {
        let c = ScenarioConfig::from_json(r#"{"surface": ["x", "y", "x^-1", "y^-1"], "coloring": {"x": "r", "y": "b"}}"#).unwrap();
        let p = &c.surfaces().unwrap()[0];
        assert_eq!(p.sides[1].color(), Some("b"));
    }
}
