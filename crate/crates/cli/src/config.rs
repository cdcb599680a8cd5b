//! Run configuration: a preset, overlaid with a TOML file, overlaid with
//! command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;
use uabs_hetnet::harness::{Deployment, ExperimentSpec};
use uabs_hetnet::propagation::PathLossModel;
use uabs_hetnet::radio::IcicMode;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TAUS_DB: [f64; 6] = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0];
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 5 × 5 km², 20 drops, 4 and 16 UABSs.
    Desk,
    /// 10 × 10 km², 100 drops, 0 to 60 UABSs.
    Full,
}

impl Preset {
    pub fn spec(self) -> ExperimentSpec {
        match self {
            Preset::Desk => ExperimentSpec::desk(),
            Preset::Full => ExperimentSpec::full(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    /// Simplified model, δ = 4.
    Splm,
    /// Okumura-Hata, 763 MHz.
    Ohplm,
}

impl ModelChoice {
    pub fn model(self) -> PathLossModel {
        match self {
            ModelChoice::Splm => PathLossModel::splm(4.0),
            ModelChoice::Ohplm => PathLossModel::ohplm(763.0),
        }
    }
}

/// On-disk layout of a config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    preset: Option<Preset>,
    path_loss: Option<ModelChoice>,
    out_dir: Option<PathBuf>,
    verbosity: Option<u8>,
    taus_db: Option<Vec<f64>>,
    /// Partial `ExperimentSpec`, merged key by key onto the preset.
    experiment: Option<toml::Table>,
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub path_loss: Option<ModelChoice>,
    pub out_dir: Option<PathBuf>,
    pub verbosity: u8,
    pub seed: Option<u64>,
    pub mode: Option<IcicMode>,
    pub drops: Option<usize>,
    pub n_uabs: Option<Vec<usize>>,
    pub destroy: Option<Vec<f64>>,
    pub generations: Option<usize>,
    pub population: Option<usize>,
    pub taus_db: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub out_dir: PathBuf,
    pub verbosity: u8,
    pub taus_db: Vec<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Some(parse_file(&text).with_context(|| format!("in {}", p.display()))?)
            }
            None => None,
        };
        Self::resolve(file, flags)
    }

    #[cfg(test)]
    pub fn from_toml(text: &str, flags: &Overrides) -> Result<Self> {
        Self::resolve(Some(parse_file(text)?), flags)
    }

    fn resolve(file: Option<ConfigFile>, flags: &Overrides) -> Result<Self> {
        let file_preset = file.as_ref().and_then(|f| f.preset);
        let mut spec = flags.preset.or(file_preset).unwrap_or(Preset::Desk).spec();
        if let Some(m) = file.as_ref().and_then(|f| f.path_loss) {
            spec.model = m.model();
        }
        let mut out_dir = None;
        let mut verbosity = 0;
        let mut taus_db = DEFAULT_TAUS_DB.to_vec();
        if let Some(f) = file {
            if let Some(table) = f.experiment {
                spec = overlay(&spec, table)?;
            }
            out_dir = f.out_dir;
            verbosity = f.verbosity.unwrap_or(0);
            if let Some(t) = f.taus_db {
                taus_db = t;
            }
        }

        if let Some(m) = flags.path_loss {
            spec.model = m.model();
        }
        if let Some(s) = flags.seed {
            spec.master_seed = s;
        }
        if let Some(m) = flags.mode {
            spec.icic_mode = m;
        }
        if let Some(d) = flags.drops {
            spec.n_drops = d;
        }
        if let Some(n) = &flags.n_uabs {
            spec.n_uabs_list = n.clone();
        }
        if let Some(f) = &flags.destroy {
            spec.destroy_fractions = f.clone();
        }
        if let Some(g) = flags.generations {
            spec.ga.generations = g;
        }
        if let Some(p) = flags.population {
            spec.ga.population_size = p;
        }
        if let Some(t) = &flags.taus_db {
            taus_db = t.clone();
        }
        if taus_db.is_empty() || taus_db.iter().any(|t| !t.is_finite()) {
            bail!("taus_db must be a non-empty list of finite values");
        }

        Ok(Self {
            spec,
            out_dir: flags
                .out_dir
                .clone()
                .or(out_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            verbosity: verbosity.max(flags.verbosity),
            taus_db,
        })
    }

    /// The spec with the deployment fixed, validated.
    pub fn spec_for(&self, deployment: Deployment) -> Result<ExperimentSpec> {
        let spec = ExperimentSpec {
            deployment,
            ..self.spec.clone()
        };
        spec.validate().context("invalid configuration")?;
        Ok(spec)
    }

    pub fn dir(&self, sub: &str) -> PathBuf {
        self.out_dir.join(sub)
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if self.verbosity > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn parse_file(text: &str) -> Result<ConfigFile> {
    let f: ConfigFile = toml::from_str(text).context("malformed config")?;
    if f.schema_version != SCHEMA_VERSION {
        bail!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            f.schema_version
        );
    }
    Ok(f)
}

fn overlay(spec: &ExperimentSpec, table: toml::Table) -> Result<ExperimentSpec> {
    let mut base = toml::Value::try_from(spec).context("serializing preset")?;
    merge(&mut base, toml::Value::Table(table), "experiment")?;
    base.try_into().context("invalid [experiment] table")
}

/// Recursive key-by-key merge. Keys absent from the base are rejected.
/// A table carrying a `variant` key replaces its target whole, since its
/// other fields depend on the variant.
fn merge(base: &mut toml::Value, over: toml::Value, path: &str) -> Result<()> {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) if !o.contains_key("variant") => {
            for (k, v) in o {
                let sub = format!("{path}.{k}");
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &sub)?,
                    None => bail!("unknown key `{sub}`"),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<RunConfig> {
        RunConfig::from_toml(text, &Overrides::default())
    }

    #[test]
    fn preset_only() {
        let c = load("schema_version = 1\npreset = \"full\"\n").unwrap();
        assert_eq!(c.spec, ExperimentSpec::full());
        assert_eq!(c.out_dir, PathBuf::from(DEFAULT_OUT_DIR));
        assert_eq!(c.taus_db, DEFAULT_TAUS_DB.to_vec());
    }

    #[test]
    fn nested_overlay() {
        let c = load(
            "schema_version = 1\n\
             [experiment]\nn_drops = 3\n\
             [experiment.scenario.region]\nwidth_km = 2.0\n\
             [experiment.grid]\nrho_values_db = [inf]\n",
        )
        .unwrap();
        assert_eq!(c.spec.n_drops, 3);
        assert_eq!(c.spec.scenario.region.width_km, 2.0);
        assert_eq!(c.spec.scenario.region.height_km, 5.0);
        assert_eq!(c.spec.grid.rho_values_db, vec![f64::INFINITY]);
    }

    #[test]
    fn variant_table_replaces_model_kind() {
        let c = load(
            "schema_version = 1\n\
             [experiment.model]\nmax_pl_db = 225.0\n\
             [experiment.model.kind]\nvariant = \"ohplm\"\nfc_mhz = 700.0\n",
        )
        .unwrap();
        assert_eq!(c.spec.model, PathLossModel::ohplm(700.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load("schema_version = 1\ncolour = 3\n").is_err());
        let e = load("schema_version = 1\n[experiment.scenario]\nlamda_mbs = 4.0\n").unwrap_err();
        assert!(format!("{e:#}").contains("experiment.scenario.lamda_mbs"));
    }

    #[test]
    fn schema_version_checked() {
        assert!(load("preset = \"desk\"\n").is_err());
        assert!(load("schema_version = 2\n").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let flags = Overrides {
            seed: Some(9),
            drops: Some(2),
            path_loss: Some(ModelChoice::Ohplm),
            out_dir: Some("x".into()),
            ..Overrides::default()
        };
        let c = RunConfig::from_toml(
            "schema_version = 1\nout_dir = \"y\"\n[experiment]\nn_drops = 5\nmaster_seed = 4\n",
            &flags,
        )
        .unwrap();
        assert_eq!(c.spec.master_seed, 9);
        assert_eq!(c.spec.n_drops, 2);
        assert_eq!(c.spec.model, PathLossModel::ohplm(763.0));
        assert_eq!(c.out_dir, PathBuf::from("x"));
    }

    #[test]
    fn invalid_values_fail_validation() {
        let c = load("schema_version = 1\n[experiment.scenario]\nlambda_mbs = -1.0\n").unwrap();
        assert!(c.spec_for(Deployment::Hex).is_err());
    }
}
