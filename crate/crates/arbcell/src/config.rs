//! Key-value configuration file with `[section]` headers.
//!
//! Every knob defaults to the built-in parameter pack; a config file only
//! overrides the keys it names. Unknown keys are errors - typos should
//! not silently fall back to defaults. OCV and entropic-coefficient
//! tables are referenced as two-column CSV files.
//!
//! ```text
//! [objective]
//! degradation_price_eur_kwh = 330
//!
//! [spm.anode]
//! diff_ref_m2_s = 1e-13
//!
//! [spm]
//! anode_ocv_csv = tables/graphite.csv
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use arbcell_core::pbm_opt::PbmSearchConfig;
use arbcell_core::spm::ElectrodeParams;
use arbcell_core::{LinearCellParams, ObjectiveConfig, OcvCurve, SpmParams};

use crate::files;
use crate::AppError;

/// Everything the pipeline needs, fully resolved.
#[derive(Debug, Clone)]
pub struct Config {
    pub linear: LinearCellParams,
    pub spm: SpmParams,
    pub objective: ObjectiveConfig,
    pub search: PbmSearchConfig,
    /// Virtual tester integration step for replays, s.
    pub replay_sim_dt_s: f64,
    /// Check-up cadence in days of market time.
    pub checkup_every_days: u32,
    /// Count check-up throughput in the ledger FEC.
    pub count_checkup_fec: bool,
    /// Static rates for the heuristic degradation estimate.
    pub heuristic_calendar_pct_per_h: f64,
    pub heuristic_cycle_pct_per_fec: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            linear: LinearCellParams::default_pack(),
            spm: SpmParams::default_pack(),
            objective: ObjectiveConfig::new(0.5, 330.0),
            search: PbmSearchConfig::default(),
            replay_sim_dt_s: 60.0,
            checkup_every_days: 30,
            count_checkup_fec: true,
            heuristic_calendar_pct_per_h: 4.2e-4,
            heuristic_cycle_pct_per_fec: 6.7e-3,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base_dir)
    }

    fn parse(text: &str, base_dir: &Path) -> Result<Config, AppError> {
        let mut entries: BTreeMap<(String, String), (String, usize)> = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(AppError::Data(format!(
                    "config line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let prev = entries.insert(
                (section.clone(), key.trim().to_string()),
                (value.trim().to_string(), lineno + 1),
            );
            if prev.is_some() {
                return Err(AppError::Data(format!(
                    "config line {}: duplicate key `{}` in section `[{section}]`",
                    lineno + 1,
                    key.trim()
                )));
            }
        }

        let mut cfg = Config::default();
        let mut ocv_anode: Option<PathBuf> = None;
        let mut ocv_cathode: Option<PathBuf> = None;
        let mut entropic: Option<PathBuf> = None;

        for ((section, key), (value, lineno)) in &entries {
            let fail = |what: &str| {
                AppError::Data(format!(
                    "config line {lineno}: cannot parse `{key} = {value}` as {what}"
                ))
            };
            let as_f64 = || value.parse::<f64>().map_err(|_| fail("a number"));
            let as_u32 = || value.parse::<u32>().map_err(|_| fail("an integer"));
            let as_usize = || value.parse::<usize>().map_err(|_| fail("an integer"));
            let as_bool = || match value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(fail("a boolean")),
            };
            match (section.as_str(), key.as_str()) {
                ("linear", "nominal_energy_wh") => cfg.linear.nominal_energy_wh = as_f64()?,
                ("linear", "beta1") => cfg.linear.beta1 = as_f64()?,
                ("linear", "beta2_h") => cfg.linear.beta2_h = as_f64()?,
                ("linear", "power_limit_w") => cfg.linear.power_limit_w = as_f64()?,
                ("linear", "soc_min") => cfg.linear.soc_min = as_f64()?,
                ("linear", "soc_max") => cfg.linear.soc_max = as_f64()?,
                ("spm", "electrolyte_mol_m3") => cfg.spm.electrolyte_mol_m3 = as_f64()?,
                ("spm", "alpha") => cfg.spm.alpha = as_f64()?,
                ("spm", "t_ref_k") => cfg.spm.t_ref_k = as_f64()?,
                ("spm", "r_tot_ohm") => cfg.spm.r_tot_ohm = as_f64()?,
                ("spm", "nominal_energy_wh") => cfg.spm.nominal_energy_wh = as_f64()?,
                ("spm", "nominal_charge_ah") => cfg.spm.nominal_charge_ah = as_f64()?,
                ("spm", "rated_current_a") => cfg.spm.rated_current_a = as_f64()?,
                ("spm", "shells") => cfg.spm.shells = as_usize()?,
                ("spm", "anode_ocv_csv") => ocv_anode = Some(base_dir.join(value)),
                ("spm", "cathode_ocv_csv") => ocv_cathode = Some(base_dir.join(value)),
                ("spm", "entropic_dudt_csv") => entropic = Some(base_dir.join(value)),
                ("spm.anode", _) => apply_electrode(&mut cfg.spm.anode, key, as_f64()?, *lineno)?,
                ("spm.cathode", _) => {
                    apply_electrode(&mut cfg.spm.cathode, key, as_f64()?, *lineno)?
                }
                ("spm.thermal", "rho_kg_m3") => cfg.spm.thermal.rho_kg_m3 = as_f64()?,
                ("spm.thermal", "c_p_j_kgk") => cfg.spm.thermal.c_p_j_kgk = as_f64()?,
                ("spm.thermal", "h_conv_w_m2k") => cfg.spm.thermal.h_conv_w_m2k = as_f64()?,
                ("spm.thermal", "t_env_k") => cfg.spm.thermal.t_env_k = as_f64()?,
                ("spm.thermal", "cell_area_m2") => cfg.spm.thermal.cell_area_m2 = as_f64()?,
                ("spm.thermal", "cell_thickness_m") => {
                    cfg.spm.thermal.cell_thickness_m = as_f64()?
                }
                ("spm.sei", "beta3_a_m2") => cfg.spm.sei.beta3_a_m2 = as_f64()?,
                ("spm.sei", "alpha_sei") => cfg.spm.sei.alpha_sei = as_f64()?,
                ("spm.sei", "u_ref_v") => cfg.spm.sei.u_ref_v = as_f64()?,
                ("spm.sei", "d_ref_m2_s") => cfg.spm.sei.d_ref_m2_s = as_f64()?,
                ("spm.sei", "e_act_d_j_mol") => cfg.spm.sei.e_act_d_j_mol = as_f64()?,
                ("spm.sei", "solvent_mol_m3") => cfg.spm.sei.solvent_mol_m3 = as_f64()?,
                ("spm.sei", "molar_volume_m3_mol") => {
                    cfg.spm.sei.molar_volume_m3_mol = as_f64()?
                }
                ("spm.sei", "delta0_m") => cfg.spm.sei.delta0_m = as_f64()?,
                ("spm.sei", "nominal_voltage_v") => cfg.spm.sei.nominal_voltage_v = as_f64()?,
                ("objective", "degradation_price_eur_kwh") => {
                    cfg.objective.degradation_price_eur_kwh = as_f64()?
                }
                ("objective", "horizon_steps") => cfg.objective.horizon_steps = as_usize()?,
                ("objective", "commit_steps") => cfg.objective.commit_steps = as_usize()?,
                ("search", "sim_dt_s") => cfg.search.sim_dt_s = as_f64()?,
                ("search", "max_sweeps") => cfg.search.max_sweeps = as_usize()?,
                ("search", "max_evals") => cfg.search.max_evals = as_usize()?,
                ("tester", "replay_sim_dt_s") => cfg.replay_sim_dt_s = as_f64()?,
                ("tester", "checkup_every_days") => cfg.checkup_every_days = as_u32()?,
                ("tester", "count_checkup_fec") => cfg.count_checkup_fec = as_bool()?,
                ("report", "calendar_pct_per_h") => {
                    cfg.heuristic_calendar_pct_per_h = as_f64()?
                }
                ("report", "cycle_pct_per_fec") => cfg.heuristic_cycle_pct_per_fec = as_f64()?,
                _ => {
                    return Err(AppError::Data(format!(
                        "config line {lineno}: unknown key `{key}` in section `[{section}]`"
                    )))
                }
            }
        }

        if ocv_anode.is_some() || ocv_cathode.is_some() {
            let default = OcvCurve::default_pack();
            let anode = match &ocv_anode {
                Some(p) => files::load_ocv_table(p)?,
                None => default.anode_table().to_vec(),
            };
            let cathode = match &ocv_cathode {
                Some(p) => files::load_ocv_table(p)?,
                None => default.cathode_table().to_vec(),
            };
            cfg.spm.ocv = OcvCurve::new(anode, cathode)
                .map_err(|e| AppError::Data(format!("OCV tables: {e}")))?;
        }
        if let Some(p) = &entropic {
            cfg.spm.entropic_dudt = files::load_two_column_csv(p, "soc", "dudt_v_per_k")?;
        }

        cfg.linear
            .validate()
            .map_err(|e| AppError::Data(format!("linear cell config: {e}")))?;
        cfg.spm
            .validate()
            .map_err(|e| AppError::Data(format!("spm config: {e}")))?;
        cfg.objective
            .validate()
            .map_err(|e| AppError::Data(format!("objective config: {e}")))?;
        Ok(cfg)
    }
}

fn apply_electrode(
    e: &mut ElectrodeParams,
    key: &str,
    value: f64,
    lineno: usize,
) -> Result<(), AppError> {
    match key {
        "radius_m" => e.radius_m = value,
        "diff_ref_m2_s" => e.diff_ref_m2_s = value,
        "e_act_diff_j_mol" => e.e_act_diff_j_mol = value,
        "k_ref" => e.k_ref = value,
        "e_act_k_j_mol" => e.e_act_k_j_mol = value,
        "c_max_mol_m3" => e.c_max_mol_m3 = value,
        "surf_per_vol_1_m" => e.surf_per_vol_1_m = value,
        "area_m2" => e.area_m2 = value,
        "thickness_m" => e.thickness_m = value,
        "stoich_empty" => e.stoich_empty = value,
        "stoich_full" => e.stoich_full = value,
        _ => {
            return Err(AppError::Data(format!(
                "config line {lineno}: unknown electrode key `{key}`"
            )))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file() {
        let cfg = Config::default();
        assert_eq!(cfg.objective.degradation_price_eur_kwh, 330.0);
        assert_eq!(cfg.objective.horizon_steps, 48);
    }

    #[test]
    fn overrides_apply() {
        let text = "\n# comment\n[objective]\ndegradation_price_eur_kwh = 200\n\n[linear]\nbeta1 = 2e-5\n\n[spm.sei]\nbeta3_a_m2 = 0\n";
        let cfg = Config::parse(text, Path::new(".")).unwrap();
        assert_eq!(cfg.objective.degradation_price_eur_kwh, 200.0);
        assert_eq!(cfg.linear.beta1, 2e-5);
        assert_eq!(cfg.spm.sei.beta3_a_m2, 0.0);
        // untouched keys keep their defaults
        assert_eq!(cfg.linear.beta2_h, 2.12e-4);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = Config::parse("[linear]\nbetaX = 1\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, AppError::Data(_)), "{err}");
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn malformed_line_is_an_error() {
        let err = Config::parse("[linear]\nnonsense\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn duplicate_key_is_an_error() {
        let err =
            Config::parse("[linear]\nbeta1 = 1\nbeta1 = 2\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let err = Config::parse("[linear]\nsoc_min = 0.9\nsoc_max = 0.1\n", Path::new("."))
            .unwrap_err();
        assert!(err.to_string().contains("soc_min"));
    }

    #[test]
    fn ocv_tables_load_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let default = OcvCurve::default_pack();
        crate::files::write_ocv_table(&dir.path().join("anode.csv"), default.anode_table())
            .unwrap();
        let cfg_path = dir.path().join("cfg.ini");
        std::fs::write(&cfg_path, "[spm]\nanode_ocv_csv = anode.csv\n").unwrap();
        let cfg = Config::load(&cfg_path).unwrap();
        // Round-tripped table equals the built-in one.
        assert_eq!(cfg.spm.ocv.anode_table(), default.anode_table());
        assert_eq!(cfg.spm.ocv.cathode_table(), default.cathode_table());

        // A non-monotone table is rejected at load time.
        std::fs::write(
            dir.path().join("bad.csv"),
            "stoichiometry,potential_V\n0,0.2\n0.5,0.5\n1,0.1\n",
        )
        .unwrap();
        std::fs::write(&cfg_path, "[spm]\nanode_ocv_csv = bad.csv\n").unwrap();
        assert!(Config::load(&cfg_path).is_err());
    }
}
