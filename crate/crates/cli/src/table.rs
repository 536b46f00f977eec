//! CSV tables whose rows all start with the run parameters.

use std::io::Write;

use crate::{CliError, Config};

/// Column values shared by every row of a run.
pub struct RunEcho {
    pub experiment: &'static str,
    values: Vec<String>,
}

const ECHO_COLUMNS: &[&str] = &[
    "experiment",
    "alpha",
    "beta",
    "k",
    "eps",
    "delta_multiplier",
    "seed",
    "threads",
    "precision_bits",
    "memory_budget",
    "tau_hat",
];

impl RunEcho {
    pub fn new(experiment: &'static str, cfg: &Config, tau_hat: Option<f64>) -> Self {
        let values = vec![
            experiment.to_string(),
            cfg.alpha.clone(),
            cfg.beta.clone(),
            cfg.k.to_string(),
            cfg.eps.to_string(),
            cfg.delta_multiplier.to_string(),
            cfg.seed.to_string(),
            rayon::current_num_threads().to_string(),
            cfg.precision_bits.to_string(),
            cfg.memory_budget.to_string(),
            tau_hat.map(|t| t.to_string()).unwrap_or_default(),
        ];
        RunEcho { experiment, values }
    }
}

/// Writes the header on creation and one record per [`Table::row`].
pub struct Table<'a> {
    writer: csv::Writer<&'a mut dyn Write>,
    echo: RunEcho,
    width: usize,
}

impl<'a> Table<'a> {
    pub fn new(sink: &'a mut dyn Write, echo: RunEcho, columns: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(ECHO_COLUMNS.iter().chain(columns))?;
        Ok(Table {
            writer,
            echo,
            width: columns.len(),
        })
    }

    pub fn row(&mut self, values: &[String]) -> Result<(), CliError> {
        debug_assert_eq!(values.len(), self.width, "{}", self.echo.experiment);
        self.writer.write_record(self.echo.values.iter().chain(values))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form with `.` as separator; exponent notation for
/// very small or large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Wall time in seconds when timing is on, blank otherwise.
pub fn wall(cfg: &Config, secs: f64) -> String {
    if cfg.timing {
        format!("{secs:.3}")
    } else {
        String::new()
    }
}
