//! Batch harness: scenario grids, dataset generation, training and
//! oracle-backed evaluation.

use crate::dataset::{Dataset, DatasetRow};
use crate::error::Result;
use crate::maneuver::ControllerConfig;
use crate::plant::PlantConfig;
use crate::predictor::{fit, GroundMode, Objective, PredictorModel};
use crate::rollout::run_maneuver;
use crate::types::{GroundModel, ManeuverId, Scenario, VehicleParams, ALL_MANEUVERS};

/// Control/sensor rate the whole pipeline runs at.
pub const CONTROL_DT_S: f64 = 1.0 / 90.0;

/// Scenario grid: every combination of velocity, ground and maneuver is
/// rolled out `repetitions` times.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub velocities_mps: Vec<f64>,
    pub hard_mus: Vec<f64>,
    /// (cohesion Pa, shear angle rad) per soil.
    pub soils: Vec<(f64, f64)>,
    pub sinkages_m: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        ExperimentGrid {
            velocities_mps: vec![1.0, 2.0, 3.0],
            hard_mus: vec![0.25, 0.45, 0.9],
            soils: vec![
                (0.0, 35f64.to_radians()),
                (74e3, 31f64.to_radians()),
                (83e3, 25f64.to_radians()),
                (15e3, 25f64.to_radians()),
            ],
            sinkages_m: vec![0.01, 0.03],
            repetitions: 2,
            seed: 42,
        }
    }
}

impl ExperimentGrid {
    /// A held-out grid at the midpoints of the default axes, twice as
    /// dense in speed, with one repetition.
    pub fn held_out_eval() -> ExperimentGrid {
        ExperimentGrid {
            velocities_mps: vec![1.25, 1.75, 2.25, 2.75],
            hard_mus: vec![0.3, 0.55, 0.8],
            soils: vec![
                (10e3, 33f64.to_radians()),
                (40e3, 28f64.to_radians()),
                (70e3, 27f64.to_radians()),
                (80e3, 30f64.to_radians()),
            ],
            sinkages_m: vec![0.015, 0.025],
            repetitions: 1,
            seed: 7,
        }
    }

    /// Scenarios in fixed enumeration order: hard grounds first, then
    /// soils by (soil, sinkage).
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        for &mu in &self.hard_mus {
            for &v in &self.velocities_mps {
                out.push(Scenario::new(v, GroundModel::hard(mu)));
            }
        }
        for &(c, phi) in &self.soils {
            for &z in &self.sinkages_m {
                for &v in &self.velocities_mps {
                    out.push(Scenario::new(v, GroundModel::deformable(z, c, phi)));
                }
            }
        }
        out
    }

    /// Total dataset rows the grid produces.
    pub fn row_count(&self) -> usize {
        self.scenarios().len() * ALL_MANEUVERS.len() * self.repetitions
    }
}

/// Roll out the full grid. Failed rollouts become rows with an error
/// status and no distance; generation continues.
pub fn generate_dataset(
    grid: &ExperimentGrid,
    params: &VehicleParams,
    plant: &PlantConfig,
    ctrl: &ControllerConfig,
) -> Dataset {
    let mut rows = Vec::with_capacity(grid.row_count());
    for scn in grid.scenarios() {
        for m in ALL_MANEUVERS {
            for _rep in 0..grid.repetitions {
                match run_maneuver(&scn, m, params, plant, ctrl, CONTROL_DT_S) {
                    Ok((_, outcome)) => rows.push(DatasetRow {
                        v0_mps: scn.v0_mps,
                        ground: scn.ground,
                        maneuver: m,
                        min_distance_m: Some(outcome.min_distance_m),
                        status: "ok".into(),
                    }),
                    Err(e) => rows.push(DatasetRow {
                        v0_mps: scn.v0_mps,
                        ground: scn.ground,
                        maneuver: m,
                        min_distance_m: None,
                        status: error_token(&e),
                    }),
                }
            }
        }
    }
    Dataset { rows }
}

fn error_token(e: &crate::Error) -> String {
    match e {
        crate::Error::RunawayRollout => "runaway".into(),
        crate::Error::WheelBuried => "wheel-buried".into(),
        other => format!("error({other})"),
    }
}

/// Fit all (maneuver, mode) regressions present in the dataset. Pairs
/// without enough rows are left untrained and reported as warnings.
pub fn train_model(dataset: &Dataset, objective: Objective) -> (PredictorModel, Vec<String>) {
    let mut model = PredictorModel::new(objective);
    let mut warnings = Vec::new();
    for mode in [GroundMode::Hard, GroundMode::Deformable] {
        for m in ALL_MANEUVERS {
            let rows = dataset.training_rows(mode, m);
            if rows.is_empty() {
                warnings.push(format!("{} {}: untrained (no rows)", mode.name(), m.name()));
                continue;
            }
            match fit(&rows, mode) {
                Ok(mut reg) => {
                    if !reg.dropped.is_empty() {
                        warnings.push(format!(
                            "{} {}: dropped constant columns {}",
                            mode.name(),
                            m.name(),
                            reg.dropped.join(", ")
                        ));
                    }
                    reg.rows = rows.len();
                    model.insert(mode, m, reg);
                }
                Err(e) => warnings.push(format!("{} {}: untrained ({e})", mode.name(), m.name())),
            }
        }
    }
    (model, warnings)
}

/// Distances below this are one trajectory-discretization step apart and
/// count as a tie when naming the oracle winner set.
pub const ORACLE_TIE_EPS_M: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct EvalCell {
    pub scenario: Scenario,
    /// True achieved distance per maneuver (ordinal order).
    pub oracle_d: [f64; 5],
    pub oracle_best: ManeuverId,
    pub selected: ManeuverId,
    pub agreed: bool,
    pub regret_m: f64,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub cells: Vec<EvalCell>,
    pub agreement_rate: f64,
    pub mean_regret_m: f64,
    /// RMS prediction error per maneuver over all cells.
    pub prediction_rms: [f64; 5],
}

/// Compare the model's choice against brute-force rollouts of all five
/// maneuvers on every grid scenario. Agreement counts a selection that
/// lands in the oracle's near-tie winner set.
pub fn evaluate_model(
    model: &PredictorModel,
    grid: &ExperimentGrid,
    params: &VehicleParams,
    plant: &PlantConfig,
    ctrl: &ControllerConfig,
) -> Result<EvaluationReport> {
    let mut cells = Vec::new();
    let mut sq_err = [0.0f64; 5];
    let mut n_cells = 0usize;
    for scn in grid.scenarios() {
        let mut oracle_d = [0.0; 5];
        for m in ALL_MANEUVERS {
            let (_, out) = run_maneuver(&scn, m, params, plant, ctrl, CONTROL_DT_S)?;
            oracle_d[(m.ordinal() - 1) as usize] = out.min_distance_m;
        }
        let best_d = oracle_d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let oracle_best = ALL_MANEUVERS
            .iter()
            .copied()
            .find(|m| oracle_d[(m.ordinal() - 1) as usize] == best_d)
            .expect("nonempty");
        let (selected, predicted) = model.select_maneuver(scn.v0_mps, &scn.ground)?;
        let selected_d = oracle_d[(selected.ordinal() - 1) as usize];
        let agreed = selected_d >= best_d - ORACLE_TIE_EPS_M;
        for i in 0..5 {
            sq_err[i] += (predicted[i] - oracle_d[i]).powi(2);
        }
        n_cells += 1;
        cells.push(EvalCell {
            scenario: scn,
            oracle_d,
            oracle_best,
            selected,
            agreed,
            regret_m: best_d - selected_d,
        });
    }
    let agreement_rate =
        cells.iter().filter(|c| c.agreed).count() as f64 / cells.len().max(1) as f64;
    let mean_regret_m = cells.iter().map(|c| c.regret_m).sum::<f64>() / cells.len().max(1) as f64;
    let mut prediction_rms = [0.0; 5];
    for i in 0..5 {
        prediction_rms[i] = (sq_err[i] / n_cells.max(1) as f64).sqrt();
    }
    Ok(EvaluationReport {
        cells,
        agreement_rate,
        mean_regret_m,
        prediction_rms,
    })
}

impl EvaluationReport {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "v0_mps,ground_kind,mu,z_m,c_kpa,phi_deg,oracle_best,selected,agreed,regret_m"
        )?;
        for c in &self.cells {
            let (kind, mu, z, cp, phi) = match c.scenario.ground {
                GroundModel::HardSurface { mu } => (
                    "hard",
                    mu.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ),
                GroundModel::Deformable {
                    sinkage_m,
                    cohesion_pa,
                    shear_angle_rad,
                } => (
                    "deformable",
                    String::new(),
                    sinkage_m.to_string(),
                    (cohesion_pa / 1e3).to_string(),
                    shear_angle_rad.to_degrees().to_string(),
                ),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                c.scenario.v0_mps,
                kind,
                mu,
                z,
                cp,
                phi,
                c.oracle_best.ordinal(),
                c.selected.ordinal(),
                u8::from(c.agreed),
                c.regret_m
            )?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "cells = {}\nagreement_rate = {:.4}\nmean_regret_m = {:.4}\nprediction_rms_m = [{}]",
            self.cells.len(),
            self.agreement_rate,
            self.mean_regret_m,
            self.prediction_rms
                .iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}
