//! Plain-text grid configuration: one `key = value` per line, `#` for
//! comments. Values override the built-in defaults; command-line flags
//! override the file.

use std::path::Path;

use lowgrip::experiment::ExperimentGrid;
use lowgrip::{Error, Result};

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParam(format!("bad number '{s}': {e}")))
        })
        .collect()
}

/// Soils are written `c_kpa:phi_deg` pairs, comma separated.
fn parse_soils(value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(',')
        .map(|pair| {
            let (c, phi) = pair.split_once(':').ok_or_else(|| {
                Error::InvalidParam(format!("bad soil '{pair}', want c_kpa:phi_deg"))
            })?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|e| Error::InvalidParam(format!("bad cohesion '{c}': {e}")))?;
            let phi: f64 = phi
                .trim()
                .parse()
                .map_err(|e| Error::InvalidParam(format!("bad angle '{phi}': {e}")))?;
            Ok((c * 1e3, phi.to_radians()))
        })
        .collect()
}

pub fn apply_grid_file(path: &Path, grid: &mut ExperimentGrid) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Csv {
            line: idx + 1,
            msg: "expected key = value".into(),
        })?;
        let value = value.trim();
        match key.trim() {
            "velocities" => grid.velocities_mps = parse_list(value)?,
            "hard_mu" => grid.hard_mus = parse_list(value)?,
            "soils" => grid.soils = parse_soils(value)?,
            "sinkages" => grid.sinkages_m = parse_list(value)?,
            "repetitions" => {
                grid.repetitions = value
                    .parse()
                    .map_err(|e| Error::InvalidParam(format!("bad repetitions: {e}")))?
            }
            "seed" => {
                grid.seed = value
                    .parse()
                    .map_err(|e| Error::InvalidParam(format!("bad seed: {e}")))?
            }
            other => {
                return Err(Error::InvalidParam(format!("unknown grid key '{other}'")));
            }
        }
    }
    if grid.velocities_mps.is_empty() || grid.repetitions == 0 {
        return Err(Error::InvalidParam(
            "grid needs at least one velocity and repetitions >= 1".into(),
        ));
    }
    Ok(())
}
