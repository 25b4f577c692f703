//! Maneuver-outcome dataset and its CSV format.
//!
//! One row per executed rollout. Parameters that do not apply to the
//! row's ground kind are written as empty fields. Cohesion crosses the
//! I/O boundary in kPa and the shear angle in degrees.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::predictor::{build_features, GroundMode};
use crate::types::{GroundModel, ManeuverId};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub v0_mps: f64,
    pub ground: GroundModel,
    pub maneuver: ManeuverId,
    /// Achieved clearance; absent when the rollout failed.
    pub min_distance_m: Option<f64>,
    /// "ok" or a one-token failure reason.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Training rows for one (mode, maneuver) pair: (features, d).
    pub fn training_rows(&self, mode: GroundMode, maneuver: ManeuverId) -> Vec<(Vec<f64>, f64)> {
        self.rows
            .iter()
            .filter(|r| r.maneuver == maneuver && GroundMode::of(&r.ground) == mode)
            .filter_map(|r| {
                r.min_distance_m.map(|d| {
                    let (_, f) = build_features(r.v0_mps, &r.ground);
                    (f, d)
                })
            })
            .collect()
    }
}

pub const DATASET_HEADER: &str =
    "v0_mps,ground_kind,mu,z_m,c_kpa,phi_deg,maneuver_ordinal,min_distance_m,status";

pub fn write_dataset<W: Write>(mut w: W, ds: &Dataset) -> Result<()> {
    writeln!(w, "{DATASET_HEADER}")?;
    for r in &ds.rows {
        let (kind, mu, z, c, phi) = match r.ground {
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
        let d = r.min_distance_m.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.v0_mps,
            kind,
            mu,
            z,
            c,
            phi,
            r.maneuver.ordinal(),
            d,
            r.status
        )?;
    }
    Ok(())
}

pub fn write_dataset_file(path: &Path, ds: &Dataset) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_dataset(std::io::BufWriter::new(f), ds)
}

pub fn read_dataset<R: BufRead>(r: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let line = line?;
            if line.trim() != DATASET_HEADER {
                return Err(Error::Csv {
                    line: 1,
                    msg: format!("bad header: expected '{DATASET_HEADER}'"),
                });
            }
        }
        None => {
            return Err(Error::Csv {
                line: 1,
                msg: "empty dataset file".into(),
            })
        }
    }
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Csv {
                line: lineno,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|e| Error::Csv {
                line: lineno,
                msg: format!("field {}: {e}", i + 1),
            })
        };
        let opt_num = |i: usize| -> Result<Option<f64>> {
            let t = fields[i].trim();
            if t.is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let ground = match fields[1].trim() {
            "hard" => GroundModel::HardSurface { mu: num(2)? },
            "deformable" => GroundModel::Deformable {
                sinkage_m: num(3)?,
                cohesion_pa: num(4)? * 1e3,
                shear_angle_rad: num(5)?.to_radians(),
            },
            other => {
                return Err(Error::Csv {
                    line: lineno,
                    msg: format!("unknown ground kind '{other}'"),
                })
            }
        };
        let ordinal = fields[6].trim().parse::<u8>().map_err(|_| Error::Csv {
            line: lineno,
            msg: format!("bad maneuver ordinal '{}'", fields[6]),
        })?;
        rows.push(DatasetRow {
            v0_mps: num(0)?,
            ground,
            maneuver: ManeuverId::from_ordinal(ordinal)?,
            min_distance_m: opt_num(7)?,
            status: fields[8].trim().to_string(),
        });
    }
    Ok(Dataset { rows })
}

pub fn read_dataset_file(path: &Path) -> Result<Dataset> {
    let f = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        Dataset {
            rows: vec![
                DatasetRow {
                    v0_mps: 2.0,
                    ground: GroundModel::hard(0.45),
                    maneuver: ManeuverId::BrakeAbs,
                    min_distance_m: Some(5.25),
                    status: "ok".into(),
                },
                DatasetRow {
                    v0_mps: 3.0,
                    ground: GroundModel::deformable(0.03, 74e3, 31f64.to_radians()),
                    maneuver: ManeuverId::Brake100,
                    min_distance_m: None,
                    status: "runaway".into(),
                },
            ],
        }
    }

    #[test]
    fn csv_round_trips() {
        let ds = sample();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        let back = read_dataset(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn absent_fields_are_empty_not_sentinels() {
        let ds = sample();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line2 = text.lines().nth(1).unwrap();
        assert!(line2.starts_with("2,hard,0.45,,,,2,5.25,ok"));
        let line3 = text.lines().nth(2).unwrap();
        assert!(line3.starts_with("3,deformable,,0.03,74,31"));
        assert!(line3.ends_with(",1,,runaway"));
    }

    #[test]
    fn failed_rows_are_excluded_from_training() {
        let ds = sample();
        let rows = ds.training_rows(GroundMode::Deformable, ManeuverId::Brake100);
        assert!(rows.is_empty());
        let rows = ds.training_rows(GroundMode::Hard, ManeuverId::BrakeAbs);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].1, 5.25);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = format!("{DATASET_HEADER}\n2,hard,not-a-number,,,,2,5.25,ok\n");
        match read_dataset(std::io::Cursor::new(text.into_bytes())) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
