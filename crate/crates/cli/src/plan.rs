//! Resolution of flags, config file and per-command defaults into one plan.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use normembed::{BatchSize, SearchGrid, SpaceSpec, TrainConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Target space, e.g. `linf:20` or `l1:10*poincare:10`; repeat or comma-separate.
    #[arg(long = "space", value_delimiter = ',')]
    pub spaces: Vec<String>,
    /// Seeds as `a..b`, `a..=b` or a comma list.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with `spaces`, `seeds`, `workers`, `out`, `[train]` and `[grid]`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Runs trained concurrently.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Learning rates to search.
    #[arg(long, value_delimiter = ',')]
    pub lr: Vec<f64>,
    /// Batch sizes to search (`full` for all pairs).
    #[arg(long, value_delimiter = ',')]
    pub batch: Vec<BatchSize>,
    /// Gradient norm caps to search.
    #[arg(long, value_delimiter = ',')]
    pub clip: Vec<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    spaces: Option<Vec<String>>,
    seeds: Option<Vec<u64>>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    train: Option<toml::Table>,
    grid: Option<GridFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GridFile {
    learning_rates: Option<Vec<f64>>,
    batch_sizes: Option<Vec<BatchSize>>,
    max_grad_norms: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub spaces: Vec<SpaceSpec>,
    pub seeds: Vec<u64>,
    pub base: TrainConfig,
    pub grid: SearchGrid,
    pub workers: usize,
    pub out: PathBuf,
}

/// Defaults a subcommand supplies before the config file and flags apply.
pub struct Defaults {
    pub base: TrainConfig,
    pub grid: SearchGrid,
    pub seeds: Vec<u64>,
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..=") {
        (a.trim().parse()?..=b.trim().parse()?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (a.trim().parse()?..b.trim().parse()?).collect()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .with_context(|| format!("bad seed `{t}`"))
            })
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        bail!("seed list `{s}` is empty");
    }
    Ok(seeds)
}

/// Overlays the `[train]` table on `base`; unknown keys are rejected.
fn overlay(base: &TrainConfig, table: &toml::Table) -> Result<TrainConfig> {
    let mut merged = toml::Table::try_from(base)?;
    for (k, v) in table {
        merged.insert(k.clone(), v.clone());
    }
    merged.try_into().context("invalid [train] section")
}

impl CommonArgs {
    /// Flags win over the config file, which wins over `defaults`.
    pub fn resolve(&self, defaults: Defaults) -> Result<ExperimentPlan> {
        let file: ConfigFile = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => ConfigFile::default(),
        };

        let space_text = if !self.spaces.is_empty() {
            self.spaces.clone()
        } else {
            file.spaces.unwrap_or_default()
        };
        if space_text.is_empty() {
            bail!("no target space; pass --space (e.g. --space linf:20)");
        }
        let spaces = space_text
            .iter()
            .map(|s| s.parse::<SpaceSpec>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;

        let seeds = match (&self.seeds, file.seeds) {
            (Some(s), _) => parse_seeds(s)?,
            (None, Some(s)) if !s.is_empty() => s,
            (None, Some(_)) => bail!("config lists no seeds"),
            (None, None) => defaults.seeds,
        };

        let mut base = match &file.train {
            Some(t) => overlay(&defaults.base, t)?,
            None => defaults.base,
        };
        if let Some(e) = self.epochs {
            base.max_epochs = e;
            base.patience = base.patience.min(e);
        }
        if let Some(p) = self.patience {
            base.patience = p;
        }

        let mut grid = defaults.grid;
        if let Some(g) = file.grid {
            grid.learning_rates = g.learning_rates.unwrap_or(grid.learning_rates);
            grid.batch_sizes = g.batch_sizes.unwrap_or(grid.batch_sizes);
            grid.max_grad_norms = g.max_grad_norms.unwrap_or(grid.max_grad_norms);
        }
        if !self.lr.is_empty() {
            grid.learning_rates = self.lr.clone();
        }
        if !self.batch.is_empty() {
            grid.batch_sizes = self.batch.clone();
        }
        if !self.clip.is_empty() {
            grid.max_grad_norms = self.clip.clone();
        }
        if grid.is_empty() {
            bail!("the hyperparameter grid has an empty axis");
        }
        for cfg in grid.configs(&base) {
            cfg.validate()?;
        }

        let workers = self
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        let out = self
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out"));
        ensure_writable(&out)?;
        Ok(ExperimentPlan {
            spaces,
            seeds,
            base,
            grid,
            workers,
            out,
        })
    }
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"")
        .with_context(|| format!("output directory {} is not writable", dir.display()))?;
    fs::remove_file(probe)?;
    Ok(())
}

/// File-name-safe form of a space spec: `l1:10*poincare:10` → `l1-10_poincare-10`.
pub fn slug(space: &str) -> String {
    space
        .chars()
        .map(|c| match c {
            ':' => '-',
            '*' => '_',
            '.' => 'p',
            c if c.is_ascii_alphanumeric() || c == '-' => c,
            _ => '_',
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults {
            base: TrainConfig::default(),
            grid: SearchGrid::reconstruction(),
            seeds: vec![0, 1, 2, 3, 4],
        }
    }

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("2..=4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("7, 9").unwrap(), vec![7, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(
            &cfg,
            "spaces = [\"l2:3\"]\nseeds = [5]\n[train]\nmax_epochs = 40\npatience = 10\n[grid]\nlearning_rates = [0.5]\nbatch_sizes = [16, \"full\"]\n",
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(cfg.clone()),
            clip: vec![7.0],
            out: Some(dir.path().join("o")),
            ..Default::default()
        };
        let plan = args.resolve(defaults()).unwrap();
        assert_eq!(plan.spaces[0].to_string(), "l2:3");
        assert_eq!(plan.seeds, vec![5]);
        assert_eq!((plan.base.max_epochs, plan.base.patience), (40, 10));
        assert_eq!(plan.grid.learning_rates, vec![0.5]);
        assert_eq!(
            plan.grid.batch_sizes,
            vec![BatchSize::Pairs(16), BatchSize::Full]
        );
        assert_eq!(plan.grid.max_grad_norms, vec![7.0]);

        let args = CommonArgs {
            spaces: vec!["linf:2".into()],
            seeds: Some("1..3".into()),
            ..args
        };
        let plan = args.resolve(defaults()).unwrap();
        assert_eq!(plan.spaces[0].to_string(), "linf:2");
        assert_eq!(plan.seeds, vec![1, 2]);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let out = Some(dir.path().to_path_buf());
        let no_space = CommonArgs {
            out: out.clone(),
            ..Default::default()
        };
        assert!(no_space.resolve(defaults()).is_err());
        let bad = CommonArgs {
            spaces: vec!["l3:2".into()],
            out: out.clone(),
            ..Default::default()
        };
        let msg = bad.resolve(defaults()).unwrap_err().to_string();
        assert!(msg.contains("valid factors"), "{msg}");
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, "[train]\nlearning_rte = 0.1\n").unwrap();
        let typo = CommonArgs {
            spaces: vec!["l2:2".into()],
            config: Some(cfg),
            out,
            ..Default::default()
        };
        assert!(typo.resolve(defaults()).is_err());
    }

    #[test]
    fn slugs_are_path_safe() {
        assert_eq!(slug("l1:10*poincare:10:-0.5"), "l1-10_poincare-10--0p5");
    }
}
