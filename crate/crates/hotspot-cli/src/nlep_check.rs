//! Nondegeneracy diagnostics for a two-amplitude pattern: the see-saw
//! eigenvalue by three routes and the layout Jacobian determinant by
//! two, with flags for the places the closed form is untrustworthy.

use std::path::Path;

use hotspot_core::{
    check_existence_scale, check_nondegenerate_scale, layout_jacobian, nondegeneracy_report,
    solve_asymmetric,
};
use serde::Serialize;

use crate::config::ConfigFile;
use crate::fail::Failure;
use crate::predict::classification_label;
use crate::report::{emit, ParamsEcho, RootEcho, SCHEMA};

#[derive(Debug, Serialize)]
pub struct NlepFlags {
    pub near_pole: bool,
    pub vanishing_mismatch: bool,
    pub existence_scale_ok: bool,
    pub nondegenerate_scale_ok: bool,
}

#[derive(Debug, Serialize)]
pub struct NlepReport {
    pub schema: &'static str,
    pub command: &'static str,
    pub params: ParamsEcho,
    pub k1: usize,
    pub k2: usize,
    pub classification: &'static str,
    pub c: f64,
    pub roots: Vec<RootEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_m1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_m1_trace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_m1_params: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_m2: Option<f64>,
    #[serde(rename = "detF_closed", skip_serializing_if = "Option::is_none")]
    pub det_f_closed: Option<f64>,
    #[serde(rename = "detF_oracle", skip_serializing_if = "Option::is_none")]
    pub det_f_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nondegenerate: Option<bool>,
    pub flags: NlepFlags,
}

pub fn cmd_nlep_check(
    config: &Path,
    k1: usize,
    k2: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = ConfigFile::load(config)?;
    let p = cfg.to_params()?;
    let sol = solve_asymmetric(k1, k2, &p).map_err(Failure::config)?;

    let mut report = NlepReport {
        schema: SCHEMA,
        command: "nlep-check",
        params: ParamsEcho::from_config(&cfg),
        k1,
        k2,
        classification: classification_label(sol.classification),
        c: sol.c_value,
        roots: sol
            .roots
            .iter()
            .map(|r| RootEcho {
                z: r.z,
                v_small: r.v_small,
                v_large: r.v_large,
            })
            .collect(),
        e_m1: None,
        e_m1_trace: None,
        e_m1_params: None,
        e_m2: None,
        det_f_closed: None,
        det_f_oracle: None,
        alpha: None,
        nondegenerate: None,
        flags: NlepFlags {
            near_pole: false,
            vanishing_mismatch: false,
            existence_scale_ok: check_existence_scale(&p).map_err(Failure::config)?,
            nondegenerate_scale_ok: check_nondegenerate_scale(&p).map_err(Failure::config)?,
        },
    };

    let Some(root) = sol.roots.first() else {
        emit(&report, out)?;
        return Err(Failure::NoSolution(
            "no admissible two-amplitude root to analyze".to_string(),
        ));
    };

    let nd = nondegeneracy_report(root.v_small, root.v_large, &p).map_err(Failure::config)?;
    let matrices = hotspot_core::build_matrices(root.v_small, root.v_large, p.half_length, &p)
        .map_err(Failure::config)?;
    let jac = layout_jacobian(root.v_small, root.v_large, &p).map_err(Failure::config)?;
    report.e_m1 = Some(nd.e_m1);
    report.e_m1_trace = Some(nd.e_m1_trace);
    report.e_m1_params = Some(nd.e_m1_params);
    report.e_m2 = Some(matrices.e_m2);
    report.det_f_closed = Some(jac.det_closed);
    report.det_f_oracle = Some(jac.det_fd);
    report.alpha = Some(jac.alpha);
    report.nondegenerate = Some(nd.nondegenerate);
    report.flags.near_pole = jac.near_pole;
    report.flags.vanishing_mismatch = jac.vanishing_mismatch;

    emit(&report, out)?;
    Ok(())
}
