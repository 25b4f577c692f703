//! Data-driven maneuver predictor: per-maneuver distance regressions on
//! augmented features and best-maneuver selection.
//!
//! Hard ground uses the basis [1, v, mu, v*mu, v^2, mu^2]; deformable
//! ground uses [1, v, z, v*c, phi] with cohesion in kPa and the shear
//! angle in radians, which keeps the cross term within a few hundreds.
//! Predictions are raw regression output, deliberately not clamped to
//! zero, so extrapolation pathologies stay visible on decision maps.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::types::{GroundModel, ManeuverId, ALL_MANEUVERS};

/// Which regression family applies, split on the presence of a sinkage layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundMode {
    Hard,
    Deformable,
}

impl GroundMode {
    pub fn of(ground: &GroundModel) -> GroundMode {
        if ground.is_hard() {
            GroundMode::Hard
        } else {
            GroundMode::Deformable
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroundMode::Hard => "hard",
            GroundMode::Deformable => "deformable",
        }
    }

    pub fn from_name(s: &str) -> Result<GroundMode> {
        match s {
            "hard" => Ok(GroundMode::Hard),
            "deformable" => Ok(GroundMode::Deformable),
            other => Err(Error::InvalidParam(format!("unknown mode '{other}'"))),
        }
    }

    pub fn basis_len(&self) -> usize {
        match self {
            GroundMode::Hard => 6,
            GroundMode::Deformable => 5,
        }
    }

    pub fn feature_names(&self) -> &'static [&'static str] {
        match self {
            GroundMode::Hard => &["1", "v", "mu", "v*mu", "v^2", "mu^2"],
            GroundMode::Deformable => &["1", "v", "z", "v*c", "phi"],
        }
    }
}

/// Augmented feature vector for one (speed, ground) operating point.
pub fn build_features(v: f64, ground: &GroundModel) -> (GroundMode, Vec<f64>) {
    match *ground {
        GroundModel::HardSurface { mu } => {
            (GroundMode::Hard, vec![1.0, v, mu, v * mu, v * v, mu * mu])
        }
        GroundModel::Deformable {
            sinkage_m,
            cohesion_pa,
            shear_angle_rad,
        } => {
            let c_kpa = cohesion_pa / 1e3;
            (
                GroundMode::Deformable,
                vec![1.0, v, sinkage_m, v * c_kpa, shear_angle_rad],
            )
        }
    }
}

/// One fitted regression.
#[derive(Debug, Clone, PartialEq)]
pub struct Regression {
    pub coeffs: Vec<f64>,
    pub residual_rms: f64,
    pub rows: usize,
    /// Feature names dropped as constant during fitting (coefficient 0).
    pub dropped: Vec<String>,
}

/// Ordinary least squares of d on the mode basis. Zero-variance columns
/// other than the intercept are dropped with a warning (their coefficient
/// is zero in the result); any remaining rank deficiency is an error
/// naming the involved columns.
pub fn fit(rows: &[(Vec<f64>, f64)], mode: GroundMode) -> Result<Regression> {
    let ncols = mode.basis_len();
    if rows.len() < ncols {
        return Err(Error::InsufficientData(format!(
            "{} rows for a {ncols}-term basis",
            rows.len()
        )));
    }
    let names = mode.feature_names();

    // detect constant columns (no variation -> collinear with intercept)
    let mut keep: Vec<usize> = vec![0];
    let mut dropped = Vec::new();
    for j in 1..ncols {
        let lo = rows.iter().map(|(f, _)| f[j]).fold(f64::INFINITY, f64::min);
        let hi = rows
            .iter()
            .map(|(f, _)| f[j])
            .fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
            dropped.push(names[j].to_string());
        } else {
            keep.push(j);
        }
    }

    let m = rows.len();
    let k = keep.len();
    let mut x = DMatrix::zeros(m, k);
    let mut y = DVector::zeros(m);
    for (i, (f, d)) in rows.iter().enumerate() {
        for (jj, &j) in keep.iter().enumerate() {
            x[(i, jj)] = f[j];
        }
        y[i] = *d;
    }

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        // name the columns loading on the null direction
        let vt = svd.v_t.as_ref().expect("v_t");
        let null_row = vt.row(vt.nrows() - 1);
        let mut cols: Vec<&str> = Vec::new();
        for (jj, w) in null_row.iter().enumerate() {
            if w.abs() > 0.3 {
                cols.push(names[keep[jj]]);
            }
        }
        return Err(Error::DegenerateRegressor(format!(
            "collinear columns: {}",
            cols.join(", ")
        )));
    }
    let beta = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::DegenerateRegressor(e.to_string()))?;

    let resid = &x * &beta - &y;
    let residual_rms = (resid.norm_squared() / m as f64).sqrt();

    let mut coeffs = vec![0.0; ncols];
    for (jj, &j) in keep.iter().enumerate() {
        coeffs[j] = beta[jj];
    }
    Ok(Regression {
        coeffs,
        residual_rms,
        rows: m,
        dropped,
    })
}

/// How the best maneuver is chosen from predicted distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Pick the maneuver with the largest predicted clearance (default).
    MaximizeDistance,
    /// Literal inverted selection, for comparison runs.
    MinimizeDistance,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Objective::MaximizeDistance => "max",
            Objective::MinimizeDistance => "min",
        }
    }

    pub fn from_name(s: &str) -> Result<Objective> {
        match s {
            "max" => Ok(Objective::MaximizeDistance),
            "min" => Ok(Objective::MinimizeDistance),
            other => Err(Error::InvalidParam(format!("unknown objective '{other}'"))),
        }
    }
}

/// Trained predictor: one regression per (maneuver, mode).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub objective: Objective,
    regressions: BTreeMap<(GroundMode, u8), Regression>,
}

impl Default for PredictorModel {
    fn default() -> Self {
        PredictorModel::new(Objective::MaximizeDistance)
    }
}

impl PredictorModel {
    pub fn new(objective: Objective) -> PredictorModel {
        PredictorModel {
            objective,
            regressions: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, mode: GroundMode, maneuver: ManeuverId, reg: Regression) {
        self.regressions.insert((mode, maneuver.ordinal()), reg);
    }

    pub fn regression(&self, mode: GroundMode, maneuver: ManeuverId) -> Option<&Regression> {
        self.regressions.get(&(mode, maneuver.ordinal()))
    }

    pub fn is_trained(&self, mode: GroundMode, maneuver: ManeuverId) -> bool {
        self.regressions.contains_key(&(mode, maneuver.ordinal()))
    }

    pub fn trained_count(&self) -> usize {
        self.regressions.len()
    }

    /// Predicted clearance for one maneuver at a feature point.
    pub fn predict_distance(
        &self,
        maneuver: ManeuverId,
        mode: GroundMode,
        features: &[f64],
    ) -> Result<f64> {
        let reg = self.regression(mode, maneuver).ok_or(Error::Untrained {
            maneuver: maneuver.ordinal(),
            mode: mode.name(),
        })?;
        if reg.coeffs.len() != features.len() {
            return Err(Error::InvalidParam(format!(
                "feature length {} vs basis {}",
                features.len(),
                reg.coeffs.len()
            )));
        }
        Ok(reg.coeffs.iter().zip(features).map(|(c, f)| c * f).sum())
    }

    /// Pick the best maneuver for an operating point; ties go to the
    /// lowest ordinal. Also returns all five predictions for diagnostics.
    pub fn select_maneuver(&self, v: f64, ground: &GroundModel) -> Result<(ManeuverId, [f64; 5])> {
        let (mode, features) = build_features(v, ground);
        let mut predictions = [0.0; 5];
        for m in ALL_MANEUVERS {
            predictions[(m.ordinal() - 1) as usize] = self.predict_distance(m, mode, &features)?;
        }
        let mut best = ManeuverId::Brake100;
        let mut best_d = predictions[0];
        for m in &ALL_MANEUVERS[1..] {
            let d = predictions[(m.ordinal() - 1) as usize];
            let better = match self.objective {
                Objective::MaximizeDistance => d > best_d,
                Objective::MinimizeDistance => d < best_d,
            };
            if better {
                best = *m;
                best_d = d;
            }
        }
        Ok((best, predictions))
    }
}

// ---------------------------------------------------------------------
// model file: plain-text key = value
// ---------------------------------------------------------------------

pub fn write_model<W: Write>(mut w: W, model: &PredictorModel) -> Result<()> {
    writeln!(w, "model_format = 1")?;
    writeln!(w, "objective = {}", model.objective.name())?;
    for ((mode, ord), reg) in &model.regressions {
        let key = format!("{}.{}", mode.name(), ord);
        let coeffs: Vec<String> = reg.coeffs.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{key}.coeffs = {}", coeffs.join(","))?;
        writeln!(w, "{key}.residual_rms = {}", reg.residual_rms)?;
        writeln!(w, "{key}.rows = {}", reg.rows)?;
        if !reg.dropped.is_empty() {
            writeln!(w, "{key}.dropped = {}", reg.dropped.join(","))?;
        }
    }
    Ok(())
}

pub fn write_model_file(path: &Path, model: &PredictorModel) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_model(std::io::BufWriter::new(f), model)
}

pub fn read_model<R: BufRead>(r: R) -> Result<PredictorModel> {
    let mut objective = Objective::MaximizeDistance;
    let mut parts: BTreeMap<(GroundMode, u8), Regression> = BTreeMap::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Csv {
            line: lineno,
            msg: "expected key = value".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key == "model_format" {
            continue;
        }
        if key == "objective" {
            objective = Objective::from_name(value)?;
            continue;
        }
        let segs: Vec<&str> = key.split('.').collect();
        if segs.len() != 3 {
            return Err(Error::Csv {
                line: lineno,
                msg: format!("bad key '{key}'"),
            });
        }
        let mode = GroundMode::from_name(segs[0])?;
        let ord: u8 = segs[1].parse().map_err(|_| Error::Csv {
            line: lineno,
            msg: format!("bad maneuver ordinal '{}'", segs[1]),
        })?;
        ManeuverId::from_ordinal(ord)?;
        let entry = parts.entry((mode, ord)).or_insert_with(|| Regression {
            coeffs: Vec::new(),
            residual_rms: 0.0,
            rows: 0,
            dropped: Vec::new(),
        });
        match segs[2] {
            "coeffs" => {
                entry.coeffs = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Csv {
                        line: lineno,
                        msg: e.to_string(),
                    })?;
            }
            "residual_rms" => {
                entry.residual_rms = value.parse().map_err(|_| Error::Csv {
                    line: lineno,
                    msg: "bad residual_rms".into(),
                })?;
            }
            "rows" => {
                entry.rows = value.parse().map_err(|_| Error::Csv {
                    line: lineno,
                    msg: "bad rows".into(),
                })?;
            }
            "dropped" => {
                entry.dropped = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            other => {
                return Err(Error::Csv {
                    line: lineno,
                    msg: format!("unknown field '{other}'"),
                });
            }
        }
    }
    let mut model = PredictorModel::new(objective);
    for ((mode, ord), reg) in parts {
        if reg.coeffs.len() != mode.basis_len() {
            return Err(Error::InvalidParam(format!(
                "{}.{ord}: coefficient count {} does not match basis {}",
                mode.name(),
                reg.coeffs.len(),
                mode.basis_len()
            )));
        }
        model.regressions.insert((mode, ord), reg);
    }
    Ok(model)
}

pub fn read_model_file(path: &Path) -> Result<PredictorModel> {
    let f = std::fs::File::open(path)?;
    read_model(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_features_follow_basis() {
        let (mode, f) = build_features(3.0, &GroundModel::hard(0.25));
        assert_eq!(mode, GroundMode::Hard);
        assert_eq!(f, vec![1.0, 3.0, 0.25, 0.75, 9.0, 0.0625]);

        let (_, f0) = build_features(0.0, &GroundModel::hard(0.0));
        assert_eq!(f0, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn deformable_features_use_kpa_and_radians() {
        let g = GroundModel::deformable(0.03, 74e3, 31f64.to_radians());
        let (mode, f) = build_features(3.0, &g);
        assert_eq!(mode, GroundMode::Deformable);
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 3.0);
        assert_eq!(f[2], 0.03);
        assert!((f[3] - 222.0).abs() < 1e-9);
        assert!((f[4] - 0.5411).abs() < 1e-4);
    }

    fn synthetic_rows(coeffs: &[f64], n: usize) -> Vec<(Vec<f64>, f64)> {
        // spread of (v, mu) points spanning the hard basis
        (0..n)
            .map(|i| {
                let v = 0.5 + 0.37 * i as f64;
                let mu = 0.2 + 0.07 * ((i * 13) % 11) as f64;
                let (_, f) = build_features(v, &GroundModel::hard(mu));
                let d = f.iter().zip(coeffs).map(|(a, b)| a * b).sum();
                (f, d)
            })
            .collect()
    }

    #[test]
    fn fit_recovers_planted_coefficients() {
        let truth = [5.5, -0.8, 2.0, 0.3, -0.11, -1.4];
        let rows = synthetic_rows(&truth, 24);
        let reg = fit(&rows, GroundMode::Hard).unwrap();
        for (got, want) in reg.coeffs.iter().zip(truth) {
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
        assert!(reg.residual_rms < 1e-9);
        assert!(reg.dropped.is_empty());
    }

    #[test]
    fn constant_target_gives_intercept_only() {
        let rows: Vec<(Vec<f64>, f64)> = synthetic_rows(&[0.0; 6], 20)
            .into_iter()
            .map(|(f, _)| (f, 4.25))
            .collect();
        let reg = fit(&rows, GroundMode::Hard).unwrap();
        assert!((reg.coeffs[0] - 4.25).abs() < 1e-9);
        for c in &reg.coeffs[1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn underdetermined_is_an_error() {
        let rows = synthetic_rows(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 4);
        assert!(matches!(
            fit(&rows, GroundMode::Hard),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn constant_column_is_dropped_with_warning() {
        // deformable rows that all share one sinkage value
        let mut rows = Vec::new();
        for i in 0..20 {
            let v = 1.0 + 0.1 * i as f64;
            let c = 10e3 + 3e3 * ((i * 7) % 5) as f64;
            let phi = (20.0 + (i % 4) as f64).to_radians();
            let g = GroundModel::deformable(0.03, c, phi);
            let (_, f) = build_features(v, &g);
            rows.push((f, 5.0 - 0.3 * v));
        }
        let reg = fit(&rows, GroundMode::Deformable).unwrap();
        assert_eq!(reg.dropped, vec!["z".to_string()]);
        assert_eq!(reg.coeffs[2], 0.0);
    }

    #[test]
    fn fit_orthogonality_residual_is_small() {
        // noisy target: residual must be orthogonal to the columns
        let truth = [3.0, -0.5, 1.0, 0.2, -0.05, -0.7];
        let mut rows = synthetic_rows(&truth, 30);
        for (i, row) in rows.iter_mut().enumerate() {
            row.1 += 0.05 * ((i * 31 % 17) as f64 / 17.0 - 0.5);
        }
        let reg = fit(&rows, GroundMode::Hard).unwrap();
        let ncols = 6;
        let mut xtr = vec![0.0; ncols];
        let mut xty = vec![0.0; ncols];
        for (f, d) in &rows {
            let pred: f64 = f.iter().zip(&reg.coeffs).map(|(a, b)| a * b).sum();
            for j in 0..ncols {
                xtr[j] += f[j] * (pred - d);
                xty[j] += f[j] * d;
            }
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm(&xtr) <= 1e-8 * norm(&xty).max(1.0));
    }

    fn intercept_model(intercepts: [f64; 5]) -> PredictorModel {
        let mut model = PredictorModel::default();
        for m in ALL_MANEUVERS {
            let mut coeffs = vec![0.0; 6];
            coeffs[0] = intercepts[(m.ordinal() - 1) as usize];
            model.insert(
                GroundMode::Hard,
                m,
                Regression {
                    coeffs,
                    residual_rms: 0.0,
                    rows: 6,
                    dropped: vec![],
                },
            );
        }
        model
    }

    #[test]
    fn dominant_intercept_wins_selection() {
        let model = intercept_model([0.0, 0.0, 10.0, 0.0, 0.0]);
        let (best, preds) = model.select_maneuver(2.0, &GroundModel::hard(0.5)).unwrap();
        assert_eq!(best, ManeuverId::Turn100);
        assert_eq!(preds[2], 10.0);
    }

    #[test]
    fn ties_break_to_lowest_ordinal() {
        let model = intercept_model([3.0, 3.0, 3.0, 3.0, 3.0]);
        let (best, _) = model.select_maneuver(1.0, &GroundModel::hard(0.3)).unwrap();
        assert_eq!(best, ManeuverId::Brake100);
    }

    #[test]
    fn selection_invariant_under_coefficient_scaling() {
        let model = intercept_model([1.0, 4.0, 2.0, 3.5, 0.5]);
        let mut scaled = model.clone();
        for m in ALL_MANEUVERS {
            let mut reg = scaled.regression(GroundMode::Hard, m).unwrap().clone();
            for c in &mut reg.coeffs {
                *c *= 17.3;
            }
            scaled.insert(GroundMode::Hard, m, reg);
        }
        let a = model
            .select_maneuver(2.0, &GroundModel::hard(0.4))
            .unwrap()
            .0;
        let b = scaled
            .select_maneuver(2.0, &GroundModel::hard(0.4))
            .unwrap()
            .0;
        assert_eq!(a, b);
    }

    #[test]
    fn prediction_is_linear_in_coefficients() {
        let m1 = intercept_model([1.0, 0.0, 0.0, 0.0, 0.0]);
        let m2 = intercept_model([0.0, 0.0, 0.0, 0.0, 2.0]);
        let g = GroundModel::hard(0.5);
        let (_, f) = build_features(1.5, &g);
        let p1 = m1
            .predict_distance(ManeuverId::Brake100, GroundMode::Hard, &f)
            .unwrap();
        let mut combo = PredictorModel::default();
        for m in ALL_MANEUVERS {
            let r1 = m1.regression(GroundMode::Hard, m).unwrap();
            let r2 = m2.regression(GroundMode::Hard, m).unwrap();
            let coeffs: Vec<f64> = r1
                .coeffs
                .iter()
                .zip(&r2.coeffs)
                .map(|(a, b)| 2.0 * a + 3.0 * b)
                .collect();
            combo.insert(
                GroundMode::Hard,
                m,
                Regression {
                    coeffs,
                    residual_rms: 0.0,
                    rows: 6,
                    dropped: vec![],
                },
            );
        }
        let pc = combo
            .predict_distance(ManeuverId::Brake100, GroundMode::Hard, &f)
            .unwrap();
        let p2 = m2
            .predict_distance(ManeuverId::Brake100, GroundMode::Hard, &f)
            .unwrap();
        assert!((pc - (2.0 * p1 + 3.0 * p2)).abs() < 1e-12);
    }

    #[test]
    fn untrained_pair_is_an_error() {
        let model = PredictorModel::default();
        let err = model
            .select_maneuver(1.0, &GroundModel::hard(0.3))
            .unwrap_err();
        assert!(matches!(err, Error::Untrained { .. }));
    }

    #[test]
    fn model_file_round_trips() {
        let mut model = intercept_model([1.5, 2.5, 3.5, 4.5, 5.5]);
        model.insert(
            GroundMode::Deformable,
            ManeuverId::Brake100,
            Regression {
                coeffs: vec![0.25, -1.0 / 3.0, 2e-7, 1e3, 0.125],
                residual_rms: 0.0123456,
                rows: 24,
                dropped: vec!["z".into()],
            },
        );
        let mut buf = Vec::new();
        write_model(&mut buf, &model).unwrap();
        let back = read_model(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(model, back);

        // identical output on rewrite
        let mut buf2 = Vec::new();
        write_model(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }
}
