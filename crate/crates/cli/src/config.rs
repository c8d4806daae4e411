use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use torus_dirac::mode_space::MIN_NODE_COUNT;
use torus_dirac::verify::Tolerances;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FIELDS: usize = 10;
pub const DEFAULT_P: [f64; 3] = [2.5, 3.5, 4.0];

/// Settings as read from a config file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub node_count: Option<usize>,
    pub modes: Option<[u32; 2]>,
    pub tolerances: Option<BTreeMap<String, f64>>,
    pub p_values: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fields: Option<usize>,
    pub svd: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub node_count: usize,
    pub modes: (u32, u32),
    pub tolerances: Tolerances,
    pub p_values: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub fields: usize,
    pub svd: bool,
}

/// Command-line values that override the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub node_count: Option<usize>,
    pub modes: Option<(u32, u32)>,
    pub tolerances: Vec<(String, f64)>,
    pub p_values: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fields: Option<usize>,
    pub svd: bool,
}

pub fn parse_modes(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected M,N, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

pub fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

impl RunConfig {
    pub fn resolve(file: FileConfig, cli: Overrides, default_modes: (u32, u32)) -> Result<Self, String> {
        let mut tolerances = Tolerances::default();
        let file_tols = file.tolerances.unwrap_or_default();
        for (k, v) in file_tols.iter().map(|(k, v)| (k.clone(), *v)).chain(cli.tolerances) {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("tolerance `{k}` must be positive, got {v}"));
            }
            tolerances.set(&k, v).map_err(|e| e.to_string())?;
        }
        let cfg = RunConfig {
            node_count: cli.node_count.or(file.node_count).unwrap_or(torus_dirac::mode_space::DEFAULT_NODE_COUNT),
            modes: cli.modes.or(file.modes.map(|[a, b]| (a, b))).unwrap_or(default_modes),
            tolerances,
            p_values: cli.p_values.or(file.p_values).unwrap_or_else(|| DEFAULT_P.to_vec()),
            output_dir: cli
                .output_dir
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from("torus-dirac-out")),
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            fields: cli.fields.or(file.fields).unwrap_or(DEFAULT_FIELDS),
            svd: cli.svd || file.svd.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.node_count < MIN_NODE_COUNT {
            return Err(format!("node_count must be at least {MIN_NODE_COUNT}, got {}", self.node_count));
        }
        if self.modes.0 < 1 || self.modes.1 < 1 {
            return Err(format!("modes must be at least 1,1, got {},{}", self.modes.0, self.modes.1));
        }
        if self.p_values.is_empty() {
            return Err("p list is empty".into());
        }
        if let Some(p) = self.p_values.iter().find(|p| !(p.is_finite() && **p > 2.0)) {
            return Err(format!("p values must exceed 2, got {p}"));
        }
        if self.fields < 1 {
            return Err("fields must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("node_count = 32\nseed = 7\n[tolerances]\ndq = 1e-6\n").unwrap();
        let cli = Overrides {
            seed: Some(9),
            tolerances: vec![("qd".into(), 1e-7)],
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file, cli, (3, 4)).unwrap();
        assert_eq!(cfg.node_count, 32);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.modes, (3, 4));
        assert_eq!(cfg.tolerances.get("dq"), 1e-6);
        assert_eq!(cfg.tolerances.get("qd"), 1e-7);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |o: Overrides| RunConfig::resolve(FileConfig::default(), o, (1, 1)).is_err();
        assert!(bad(Overrides { node_count: Some(4), ..Default::default() }));
        assert!(bad(Overrides { p_values: Some(vec![2.0]), ..Default::default() }));
        assert!(bad(Overrides { tolerances: vec![("dq".into(), -1.0)], ..Default::default() }));
        assert!(bad(Overrides { tolerances: vec![("bogus".into(), 1.0)], ..Default::default() }));
        assert!(toml::from_str::<FileConfig>("colour = 3").is_err());
    }

    #[test]
    fn list_parsers() {
        assert_eq!(parse_modes("3, 5").unwrap(), (3, 5));
        assert!(parse_modes("3").is_err());
        assert_eq!(parse_tol("dq=1e-9").unwrap(), ("dq".into(), 1e-9));
    }
}
