//! Single particle model with lumped thermal dynamics and SEI growth.
//!
//! Each electrode is one representative spherical particle; lithium
//! transport is radial Fick diffusion, intercalation is Butler-Volmer
//! kinetics with Arrhenius temperature scaling, and degradation is a
//! kinetic/diffusion-limited SEI side reaction at the anode that consumes
//! cyclable lithium. Positive current discharges the cell.
//!
//! States are plain values: stepping never mutates its input, so
//! trial steps (CV solves, optimiser candidates) are just clones.

pub mod diffusion;
pub mod kinetics;
pub mod ocv;
pub mod sei;
pub mod thermal;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CellFault, Electrode};
use crate::num;
use crate::FARADAY;

use diffusion::ShellGrid;
pub use ocv::OcvCurve;
pub use sei::SeiParams;
pub use thermal::ThermalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeParams {
    /// Particle radius, m.
    pub radius_m: f64,
    /// Solid diffusivity at T_ref, m^2/s.
    pub diff_ref_m2_s: f64,
    /// Activation energy of the diffusivity, J/mol.
    pub e_act_diff_j_mol: f64,
    /// Reaction rate constant at T_ref, m^2.5 mol^-0.5 s^-1.
    pub k_ref: f64,
    /// Activation energy of the rate constant, J/mol.
    pub e_act_k_j_mol: f64,
    /// Maximum lithium concentration, mol/m^3.
    pub c_max_mol_m3: f64,
    /// Effective surface area per electrode volume a_i, 1/m.
    pub surf_per_vol_1_m: f64,
    /// Geometric electrode area A_i, m^2.
    pub area_m2: f64,
    /// Electrode thickness tau_i, m.
    pub thickness_m: f64,
    /// Stoichiometry at 0% SoC.
    pub stoich_empty: f64,
    /// Stoichiometry at 100% SoC.
    pub stoich_full: f64,
}

impl ElectrodeParams {
    /// Total particle surface area a_i A_i tau_i, m^2.
    pub fn total_surface_m2(&self) -> f64 {
        self.surf_per_vol_1_m * self.area_m2 * self.thickness_m
    }

    /// Total solid phase volume (= surface * R/3 for spheres), m^3.
    pub fn solid_volume_m3(&self) -> f64 {
        self.total_surface_m2() * self.radius_m / 3.0
    }

    /// Charge held across the stoichiometry window, C.
    pub fn window_charge_c(&self) -> f64 {
        FARADAY
            * self.c_max_mol_m3
            * num::abs(self.stoich_full - self.stoich_empty)
            * self.solid_volume_m3()
    }

    fn stoich_at_soc(&self, soc: f64) -> f64 {
        self.stoich_empty + soc * (self.stoich_full - self.stoich_empty)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpmParams {
    pub anode: ElectrodeParams,
    pub cathode: ElectrodeParams,
    pub ocv: OcvCurve,
    /// Electrolyte lithium concentration, mol/m^3 (constant in an SPM).
    pub electrolyte_mol_m3: f64,
    /// Charge transfer coefficient (0.5: symmetric Butler-Volmer).
    pub alpha: f64,
    /// Reference temperature for all Arrhenius laws, K.
    pub t_ref_k: f64,
    /// Total ohmic resistance, Ohm.
    pub r_tot_ohm: f64,
    pub thermal: ThermalParams,
    /// Entropic coefficient table (soc, dU/dT V/K); empty disables the
    /// entropic heat and OCV temperature correction.
    pub entropic_dudt: Vec<(f64, f64)>,
    pub sei: SeiParams,
    /// Nominal energy, Wh.
    pub nominal_energy_wh: f64,
    /// Nominal charge capacity, Ah; 1C = this many amps.
    pub nominal_charge_ah: f64,
    /// Rated current magnitude, A.
    pub rated_current_a: f64,
    /// Radial shells per particle.
    pub shells: usize,
}

impl SpmParams {
    /// Built-in parameter pack: a 10 Wh / 2.7 Ah NMC-graphite cell.
    ///
    /// Electrode areas are sized so each stoichiometry window holds the
    /// nominal charge; kinetics give about -60 mV anode and -5 mV cathode
    /// overpotential at 1C; the SEI constants are calibrated against a
    /// calendar-ageing rate of ~4.2e-4 %/h resting fully charged at 25 C
    /// and a cycle-ageing rate of a few 1e-3 % per full cycle.
    pub fn default_pack() -> Self {
        Self {
            anode: ElectrodeParams {
                radius_m: 5.0e-6,
                diff_ref_m2_s: 1.0e-13,
                e_act_diff_j_mol: 35_000.0,
                k_ref: 7.5411e-12,
                e_act_k_j_mol: 20_000.0,
                c_max_mol_m3: 30_000.0,
                surf_per_vol_1_m: 3.6e5,
                area_m2: 0.106_603_8,
                thickness_m: 70.0e-6,
                stoich_empty: 0.05,
                stoich_full: 0.80,
            },
            cathode: ElectrodeParams {
                radius_m: 4.0e-6,
                diff_ref_m2_s: 1.0e-13,
                e_act_diff_j_mol: 25_000.0,
                k_ref: 7.2109e-11,
                e_act_k_j_mol: 30_000.0,
                c_max_mol_m3: 50_000.0,
                surf_per_vol_1_m: 4.125e5,
                area_m2: 0.101_758_3,
                thickness_m: 60.0e-6,
                stoich_empty: 0.90,
                stoich_full: 0.30,
            },
            ocv: OcvCurve::default_pack(),
            electrolyte_mol_m3: 1000.0,
            alpha: 0.5,
            t_ref_k: 298.15,
            r_tot_ohm: 0.008,
            thermal: ThermalParams {
                rho_kg_m3: 2500.0,
                c_p_j_kgk: 800.0,
                h_conv_w_m2k: 12.0,
                t_env_k: 298.15,
                cell_area_m2: 0.02,
                cell_thickness_m: 0.007,
            },
            entropic_dudt: Vec::new(),
            sei: SeiParams {
                beta3_a_m2: 1.0269e-15,
                alpha_sei: 1.8,
                u_ref_v: 0.4,
                d_ref_m2_s: 1.0e-19,
                e_act_d_j_mol: 20_000.0,
                solvent_mol_m3: 4500.0,
                molar_volume_m3_mol: 9.585e-5,
                delta0_m: 5.0e-9,
                nominal_voltage_v: 3.7,
            },
            nominal_energy_wh: 10.0,
            nominal_charge_ah: 2.7,
            rated_current_a: 5.4,
            shells: 30,
        }
    }

    /// Same pack with SEI growth disabled (beta3 = 0).
    pub fn without_sei(mut self) -> Self {
        self.sei.beta3_a_m2 = 0.0;
        self
    }

    /// 1C current, A.
    pub fn current_1c_a(&self) -> f64 {
        self.nominal_charge_ah
    }

    pub fn du_dt_at(&self, soc: f64) -> f64 {
        if self.entropic_dudt.is_empty() {
            0.0
        } else {
            ocv::interp(&self.entropic_dudt, soc)
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err("alpha must lie in (0, 1)");
        }
        for e in [&self.anode, &self.cathode] {
            if e.radius_m <= 0.0
                || e.diff_ref_m2_s <= 0.0
                || e.k_ref <= 0.0
                || e.c_max_mol_m3 <= 0.0
                || e.surf_per_vol_1_m <= 0.0
                || e.area_m2 <= 0.0
                || e.thickness_m <= 0.0
            {
                return Err("electrode constants must be positive");
            }
            for s in [e.stoich_empty, e.stoich_full] {
                if !(0.0 < s && s < 1.0) {
                    return Err("stoichiometry windows must lie inside (0, 1)");
                }
            }
        }
        if self.shells < 2 {
            return Err("need at least 2 radial shells");
        }
        if self.nominal_energy_wh <= 0.0 || self.nominal_charge_ah <= 0.0 {
            return Err("nominal capacity must be positive");
        }
        Ok(())
    }
}

/// Cell state: everything needed to resume a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpmCellState {
    /// Radial lithium concentration per anode shell, mol/m^3.
    pub conc_n: Vec<f64>,
    /// Radial lithium concentration per cathode shell, mol/m^3.
    pub conc_p: Vec<f64>,
    /// Lumped temperature, K.
    pub temperature_k: f64,
    /// SEI layer thickness, m.
    pub sei_thickness_m: f64,
    /// Cumulative energy capacity lost to the SEI, Wh.
    pub capacity_lost_wh: f64,
    /// Cumulative |I| throughput, Ah.
    pub charge_throughput_ah: f64,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub voltage_v: f64,
    pub eta_n_v: f64,
    pub eta_p_v: f64,
    pub j_sei_mol_m2s: f64,
}

pub const VOLTAGE_HARD_LO_V: f64 = 2.0;
pub const VOLTAGE_HARD_HI_V: f64 = 4.5;

/// The model: parameters plus the precomputed shell geometry.
#[derive(Debug, Clone)]
pub struct SpmModel {
    params: SpmParams,
    grid_n: ShellGrid,
    grid_p: ShellGrid,
}

impl SpmModel {
    pub fn new(params: SpmParams) -> Self {
        let grid_n = ShellGrid::new(params.anode.radius_m, params.shells);
        let grid_p = ShellGrid::new(params.cathode.radius_m, params.shells);
        Self {
            params,
            grid_n,
            grid_p,
        }
    }

    pub fn params(&self) -> &SpmParams {
        &self.params
    }

    /// Fresh, fully relaxed state at the given SoC.
    pub fn fresh_state(&self, soc: f64) -> SpmCellState {
        let p = &self.params;
        let x = p.anode.stoich_at_soc(soc);
        let y = p.cathode.stoich_at_soc(soc);
        SpmCellState {
            conc_n: vec![x * p.anode.c_max_mol_m3; p.shells],
            conc_p: vec![y * p.cathode.c_max_mol_m3; p.shells],
            temperature_k: p.thermal.t_env_k,
            sei_thickness_m: p.sei.delta0_m,
            capacity_lost_wh: 0.0,
            charge_throughput_ah: 0.0,
        }
    }

    /// SoC from the average anode stoichiometry, affine over the window:
    /// 0 at stoich_empty, 1 at stoich_full.
    pub fn soc_estimate(&self, state: &SpmCellState) -> f64 {
        let p = &self.params.anode;
        let x = diffusion::mean_concentration(&state.conc_n) / p.c_max_mol_m3;
        (x - p.stoich_empty) / (p.stoich_full - p.stoich_empty)
    }

    /// Total lithium moles in both particles, scaled to electrode totals.
    /// With SEI disabled this is a conserved quantity.
    pub fn total_lithium_mol(&self, state: &SpmCellState) -> f64 {
        let per_particle_n = diffusion::mean_concentration(&state.conc_n);
        let per_particle_p = diffusion::mean_concentration(&state.conc_p);
        per_particle_n * self.params.anode.solid_volume_m3()
            + per_particle_p * self.params.cathode.solid_volume_m3()
    }

    /// Open-circuit voltage the cell would show fully relaxed at `soc`.
    pub fn ocv_at_soc(&self, soc: f64) -> f64 {
        let p = &self.params;
        p.ocv.cathode_potential(p.cathode.stoich_at_soc(soc))
            - p.ocv.anode_potential(p.anode.stoich_at_soc(soc))
    }

    /// One coupled step at constant current (positive = discharge).
    /// Returns the advanced state and the terminal voltage at the end of
    /// the step. The input state is untouched; on error it remains valid.
    pub fn step(
        &self,
        state: &SpmCellState,
        current_a: f64,
        dt_s: f64,
    ) -> Result<(SpmCellState, StepReport), CellFault> {
        debug_assert!(dt_s > 0.0);
        debug_assert!(num::abs(current_a) <= self.params.rated_current_a * (1.0 + 1e-9));
        let p = &self.params;
        let t = state.temperature_k;

        let d_n = kinetics::arrhenius_scale(p.anode.diff_ref_m2_s, p.anode.e_act_diff_j_mol, t, p.t_ref_k);
        let d_p = kinetics::arrhenius_scale(
            p.cathode.diff_ref_m2_s,
            p.cathode.e_act_diff_j_mol,
            t,
            p.t_ref_k,
        );
        let k_n = kinetics::arrhenius_scale(p.anode.k_ref, p.anode.e_act_k_j_mol, t, p.t_ref_k);
        let k_p = kinetics::arrhenius_scale(p.cathode.k_ref, p.cathode.e_act_k_j_mol, t, p.t_ref_k);

        let surf_n = p.anode.total_surface_m2();
        let surf_p = p.cathode.total_surface_m2();
        // Molar flux out of each particle; discharge de-lithiates the
        // anode and lithiates the cathode.
        let out_n = current_a / (FARADAY * surf_n);
        let out_p = -current_a / (FARADAY * surf_p);

        let c_surf_n = diffusion::surface_concentration(&state.conc_n, &self.grid_n, d_n, out_n);
        let c_surf_p = diffusion::surface_concentration(&state.conc_p, &self.grid_p, d_p, out_p);

        let j0_n = kinetics::exchange_current_density(
            c_surf_n,
            p.anode.c_max_mol_m3,
            p.electrolyte_mol_m3,
            p.alpha,
            k_n,
        );
        if j0_n <= 0.0 {
            return Err(CellFault::KineticsStall {
                electrode: Electrode::Anode,
            });
        }
        let j0_p = kinetics::exchange_current_density(
            c_surf_p,
            p.cathode.c_max_mol_m3,
            p.electrolyte_mol_m3,
            p.alpha,
            k_p,
        );
        if j0_p <= 0.0 {
            return Err(CellFault::KineticsStall {
                electrode: Electrode::Cathode,
            });
        }

        // Butler-Volmer in current-density units; the sign convention
        // makes eta_n > 0 and eta_p < 0 during discharge.
        let eta_n = kinetics::butler_volmer_overpotential(-out_n * FARADAY, j0_n, t);
        let eta_p = kinetics::butler_volmer_overpotential(-out_p * FARADAY, j0_p, t);

        // SEI side reaction, driven by the anode potential vs the SEI
        // reference: fast when charging or resting at high SoC.
        let x_surf = c_surf_n / p.anode.c_max_mol_m3;
        let eta_sei = eta_n + p.ocv.anode_potential(x_surf) - p.sei.u_ref_v;
        let j_sei = sei::sei_flux(eta_sei, state.sei_thickness_m, t, p.t_ref_k, &p.sei);

        let mut next = state.clone();
        // The side reaction consumes lithium at the anode surface, so its
        // flux joins the intercalation flux in the boundary condition.
        diffusion::diffusion_step(
            &mut next.conc_n,
            &self.grid_n,
            d_n,
            out_n + j_sei,
            dt_s,
            p.anode.c_max_mol_m3,
            Electrode::Anode,
        )?;
        diffusion::diffusion_step(
            &mut next.conc_p,
            &self.grid_p,
            d_p,
            out_p,
            dt_s,
            p.cathode.c_max_mol_m3,
            Electrode::Cathode,
        )?;

        let du_dt = p.du_dt_at(self.soc_estimate(state));
        next.temperature_k = thermal::thermal_step(
            t,
            current_a,
            eta_n,
            eta_p,
            du_dt,
            p.r_tot_ohm,
            dt_s,
            &p.thermal,
        )?;

        next.capacity_lost_wh += sei::capacity_loss_rate_w(j_sei, surf_n, &p.sei) * dt_s / 3600.0;
        next.sei_thickness_m += j_sei * p.sei.molar_volume_m3_mol * dt_s;
        next.charge_throughput_ah += num::abs(current_a) * dt_s / 3600.0;

        // Terminal voltage from the post-step surface stoichiometries.
        let c_surf_n2 = diffusion::surface_concentration(&next.conc_n, &self.grid_n, d_n, out_n + j_sei);
        let c_surf_p2 = diffusion::surface_concentration(&next.conc_p, &self.grid_p, d_p, out_p);
        let u_n = p.ocv.anode_potential(c_surf_n2 / p.anode.c_max_mol_m3);
        let u_p = p.ocv.cathode_potential(c_surf_p2 / p.cathode.c_max_mol_m3);
        let ocv_temp_corr = (next.temperature_k - p.t_ref_k) * du_dt;
        let voltage_v =
            u_p - u_n + ocv_temp_corr - (eta_n - eta_p) - current_a * p.r_tot_ohm;
        if !(VOLTAGE_HARD_LO_V..=VOLTAGE_HARD_HI_V).contains(&voltage_v) {
            return Err(CellFault::VoltageBound { voltage: voltage_v });
        }

        Ok((
            next,
            StepReport {
                voltage_v,
                eta_n_v: eta_n,
                eta_p_v: eta_p,
                j_sei_mol_m2s: j_sei,
            },
        ))
    }
}
