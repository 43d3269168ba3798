//! Batch prediction across configurations: one predicted block per
//! config file, computed concurrently, reported in input order.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ConfigFile, Mode};
use crate::fail::Failure;
use crate::predict::{predicted_section, Target};
use crate::report::{emit, ParamsEcho, Predicted, SCHEMA};

#[derive(Debug, Serialize)]
pub struct SweepItem {
    pub config: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Predicted>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub mode: Mode,
    pub items: Vec<SweepItem>,
}

fn sweep_one(path: &Path, target: &Target) -> SweepItem {
    let attempt = ConfigFile::load(path).and_then(|cfg| {
        let p = cfg.to_params()?;
        let (section, _) = predicted_section(target, &p)?;
        Ok((ParamsEcho::from_config(&cfg), section))
    });
    match attempt {
        Ok((params, predicted)) => SweepItem {
            config: path.display().to_string(),
            ok: true,
            params: Some(params),
            predicted: Some(predicted),
            error: None,
        },
        Err(e) => SweepItem {
            config: path.display().to_string(),
            ok: false,
            params: None,
            predicted: None,
            error: Some(e.to_string()),
        },
    }
}

/// A no-solution classification is a finding, not a failure; a config
/// that cannot be read or validated is a failure and turns the whole
/// sweep's exit code to 2 (after the report is still written).
pub fn cmd_sweep(configs: &[PathBuf], target: &Target, out: Option<&Path>) -> Result<(), Failure> {
    if configs.is_empty() {
        return Err(Failure::Config("sweep needs at least one config".to_string()));
    }

    let items: Vec<SweepItem> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|path| scope.spawn(move || sweep_one(path, target)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let failed = items.iter().filter(|item| !item.ok).count();
    let total = items.len();
    let report = SweepReport {
        schema: SCHEMA,
        command: "sweep",
        mode: target.mode,
        items,
    };
    emit(&report, out)?;
    if failed > 0 {
        return Err(Failure::Config(format!(
            "{failed} of {total} configuration(s) failed; see the report items"
        )));
    }
    Ok(())
}
