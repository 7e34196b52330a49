use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hybridbn::averaging::AveragingConfig;
use hybridbn::data::{ColumnSpec, DEFAULT_NEIGHBORS};
use hybridbn::graph::NodeKind;
use hybridbn::search::SearchConfig;
use hybridbn::validation::CvConfig;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Run configuration, read from TOML. Relative paths are resolved against
/// the directory of the configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub schema: SchemaSection,
    pub constraints: ConstraintSection,
    pub preprocess: PreprocessSection,
    pub search: SearchConfig,
    pub averaging: AveragingConfig,
    pub cv: CvSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    /// Cell contents read as missing.
    pub missing: Vec<String>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            missing: vec![String::new(), "NA".into()],
        }
    }
}

/// Either a full column list or, when `columns` is empty, every CSV column
/// in header order, discrete when named in `discrete` and continuous
/// otherwise. `recode` maps a column to a value relabelling and applies in
/// both forms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemaSection {
    pub columns: Vec<ColumnSpec>,
    pub discrete: Vec<String>,
    pub percentage: Vec<String>,
    pub recode: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// No constraints beyond the CLGBN typing rule.
    #[default]
    None,
    /// Blacklist every continuous -> discrete pair.
    Strategy1,
    /// Strategy 1 plus a within-domain whitelist.
    Strategy2,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSection {
    pub strategy: Strategy,
    pub blacklist: Option<PathBuf>,
    pub whitelist: Option<PathBuf>,
    pub domains: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub neighbors: usize,
    /// Candidate transforms; all of them when empty.
    pub transforms: Vec<hybridbn::data::TransformKind>,
    /// Continuous columns left untransformed.
    pub skip: Vec<String>,
    pub transform: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            neighbors: DEFAULT_NEIGHBORS,
            transforms: Vec::new(),
            skip: Vec::new(),
            transform: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    /// Structure read from `cv.structure`, parameters refit per fold.
    #[default]
    Fixed,
    /// Structure relearned on every training split.
    Relearn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub folds: usize,
    pub seed: u64,
    pub standardize: bool,
    pub mode: CvMode,
    /// `learn.json` or `averaged.json` holding the structure for fixed mode.
    pub structure: Option<PathBuf>,
    /// Average over bootstrap replicates inside each relearned fold.
    pub bootstrap: bool,
}

impl Default for CvSection {
    fn default() -> Self {
        let d = CvConfig::default();
        CvSection {
            folds: d.folds,
            seed: d.seed,
            standardize: d.standardize,
            mode: CvMode::Fixed,
            structure: None,
            bootstrap: false,
        }
    }
}

impl CvSection {
    pub fn config(&self) -> CvConfig {
        CvConfig {
            folds: self.folds,
            seed: self.seed,
            standardize: self.standardize,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// When set, replaces the search, averaging and cv seeds.
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub output: Option<PathBuf>,
    /// Row label used by `compare`; the output directory name by default.
    pub label: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.data.path);
        fix(&mut self.constraints.blacklist);
        fix(&mut self.constraints.whitelist);
        fix(&mut self.constraints.domains);
        fix(&mut self.cv.structure);
        fix(&mut self.run.output);
    }

    /// Propagates the master seed and checks ranges.
    pub fn resolve(&mut self) -> Result<()> {
        if let Some(seed) = self.run.seed {
            self.search.seed = seed;
            self.averaging.seed = seed;
            self.cv.seed = seed;
        }
        if self.search.perturbation_size == 0 {
            bail!(UsageError("search.perturbation_size must be at least 1".into()));
        }
        if self.preprocess.neighbors == 0 {
            bail!(UsageError("preprocess.neighbors must be at least 1".into()));
        }
        self.averaging
            .validate()
            .map_err(|e| UsageError(e.to_string()))?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Column specs for a CSV with the given header.
    pub fn column_specs(&self, header: &[String]) -> Result<Vec<ColumnSpec>> {
        let s = &self.schema;
        let mut specs = if s.columns.is_empty() {
            for d in s.discrete.iter().chain(&s.percentage) {
                if !header.contains(d) {
                    bail!(UsageError(format!("schema names column `{d}`, which is not in the CSV header")));
                }
            }
            header
                .iter()
                .map(|h| {
                    let kind = if s.discrete.contains(h) { NodeKind::Discrete } else { NodeKind::Continuous };
                    let mut spec = ColumnSpec::new(h.clone(), kind);
                    spec.percentage = s.percentage.contains(h);
                    spec
                })
                .collect()
        } else {
            s.columns.clone()
        };
        for (col, map) in &s.recode {
            let spec = specs
                .iter_mut()
                .find(|c| &c.name == col)
                .ok_or_else(|| UsageError(format!("recode names unknown column `{col}`")))?;
            spec.recode.extend(map.clone());
        }
        Ok(specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg: RunConfig = toml::from_str(
            r#"
[data]
path = "panel.csv"

[schema]
discrete = ["AREA"]
recode = { AREA = { Lombardia = "North", Sicilia = "South" } }

[constraints]
strategy = "strategy2"
domains = "domains.csv"

[search]
restarts = 3
score = "aic"

[averaging]
replicates = 50

[run]
seed = 9
"#,
        )
        .unwrap();
        assert_eq!(cfg.search.restarts, 3);
        assert_eq!(cfg.constraints.strategy, Strategy::Strategy2);
        let mut cfg = cfg;
        cfg.resolve().unwrap();
        assert_eq!((cfg.search.seed, cfg.averaging.seed, cfg.cv.seed), (9, 9, 9));
        let specs = cfg.column_specs(&["AREA".into(), "x".into()]).unwrap();
        assert_eq!(specs[0].kind, NodeKind::Discrete);
        assert_eq!(specs[0].recode["Sicilia"], "South");
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_report_line() {
        let err = toml::from_str::<RunConfig>("[search]\nrestarts = 2\nrestart = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
