//! Output locations shared by the subcommands.

use std::path::{Path, PathBuf};

use hbgbc_core::Order;

use crate::config::ScenarioFile;

/// Command-line settings that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub order: Option<Order>,
    pub seed: Option<u64>,
    /// Directory for outputs the file does not name.
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn order(&self, file: &ScenarioFile) -> Order {
        self.order.unwrap_or(file.bounds.order)
    }

    pub fn seed(&self, file: &ScenarioFile) -> u64 {
        self.seed.unwrap_or(file.seed)
    }

    pub fn csv_path(&self, file: &ScenarioFile, suffix: &str) -> PathBuf {
        self.out.clone().or_else(|| file.output.csv.clone()).unwrap_or_else(|| {
            let dir = self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{}{suffix}.csv", file.scenario))
        })
    }

    pub fn svg_path(&self, file: &ScenarioFile, csv: &Path) -> Option<PathBuf> {
        match (&file.output.svg, self.svg) {
            (Some(p), _) => Some(p.clone()),
            (None, true) => Some(csv.with_extension("svg")),
            (None, false) => None,
        }
    }
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
}
