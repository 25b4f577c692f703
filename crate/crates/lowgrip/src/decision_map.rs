//! Decision maps: the selected maneuver over a grid of estimated ground
//! parameters, emitted as CSV and as a self-contained SVG.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::predictor::{GroundMode, PredictorModel};
use crate::types::{GroundModel, ManeuverId};

/// Inclusive linear axis with `n` points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Grid specification for one map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapGrid {
    Hard {
        v_axis: Vec<f64>,
        mu_axis: Vec<f64>,
    },
    Deformable {
        v_axis: Vec<f64>,
        c_kpa_axis: Vec<f64>,
        phi_deg_axis: Vec<f64>,
        z_m: f64,
    },
}

impl MapGrid {
    /// Hard-ground grid over the studied ranges: v in [1, 3], mu in [0.25, 0.9].
    pub fn default_hard(n_v: usize, n_mu: usize) -> MapGrid {
        MapGrid::Hard {
            v_axis: linspace(1.0, 3.0, n_v),
            mu_axis: linspace(0.25, 0.9, n_mu),
        }
    }

    /// Deformable grid over (v, c, phi) at fixed sinkage.
    pub fn default_deformable(n_v: usize, n_c: usize, n_phi: usize, z_m: f64) -> MapGrid {
        MapGrid::Deformable {
            v_axis: linspace(1.0, 3.0, n_v),
            c_kpa_axis: linspace(0.0, 83.0, n_c),
            phi_deg_axis: linspace(25.0, 35.0, n_phi),
            z_m,
        }
    }

    pub fn mode(&self) -> GroundMode {
        match self {
            MapGrid::Hard { .. } => GroundMode::Hard,
            MapGrid::Deformable { .. } => GroundMode::Deformable,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    pub v_mps: f64,
    pub ground: GroundModel,
    pub selected: ManeuverId,
    pub predictions: [f64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMap {
    pub grid: MapGrid,
    pub cells: Vec<MapCell>,
}

/// Evaluate the trained model at every grid cell.
pub fn decision_map(model: &PredictorModel, grid: &MapGrid) -> Result<DecisionMap> {
    let empty = match grid {
        MapGrid::Hard { v_axis, mu_axis } => v_axis.is_empty() || mu_axis.is_empty(),
        MapGrid::Deformable {
            v_axis,
            c_kpa_axis,
            phi_deg_axis,
            ..
        } => v_axis.is_empty() || c_kpa_axis.is_empty() || phi_deg_axis.is_empty(),
    };
    if empty {
        return Err(crate::Error::InvalidParam("empty map axis".into()));
    }
    let mut cells = Vec::new();
    match grid {
        MapGrid::Hard { v_axis, mu_axis } => {
            for &mu in mu_axis {
                for &v in v_axis {
                    let ground = GroundModel::hard(mu);
                    let (selected, predictions) = model.select_maneuver(v, &ground)?;
                    cells.push(MapCell {
                        v_mps: v,
                        ground,
                        selected,
                        predictions,
                    });
                }
            }
        }
        MapGrid::Deformable {
            v_axis,
            c_kpa_axis,
            phi_deg_axis,
            z_m,
        } => {
            for &phi_deg in phi_deg_axis {
                for &c_kpa in c_kpa_axis {
                    for &v in v_axis {
                        let ground =
                            GroundModel::deformable(*z_m, c_kpa * 1e3, phi_deg.to_radians());
                        let (selected, predictions) = model.select_maneuver(v, &ground)?;
                        cells.push(MapCell {
                            v_mps: v,
                            ground,
                            selected,
                            predictions,
                        });
                    }
                }
            }
        }
    }
    Ok(DecisionMap {
        grid: grid.clone(),
        cells,
    })
}

impl DecisionMap {
    /// Fraction of cells selecting a maneuver satisfying `pred`.
    pub fn fraction_where(&self, pred: impl Fn(ManeuverId) -> bool) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().filter(|c| pred(c.selected)).count() as f64 / self.cells.len() as f64
    }

    /// Fraction of interior-adjacent cells agreeing with at least two of
    /// their four axis neighbors (hard maps only need two axes; the
    /// deformable map treats (v, c) panels per phi).
    pub fn neighbor_agreement(&self) -> f64 {
        let (nx, ny, panels) = match &self.grid {
            MapGrid::Hard { v_axis, mu_axis } => (v_axis.len(), mu_axis.len(), 1),
            MapGrid::Deformable {
                v_axis,
                c_kpa_axis,
                phi_deg_axis,
                ..
            } => (v_axis.len(), c_kpa_axis.len(), phi_deg_axis.len()),
        };
        let mut agreeing = 0usize;
        let mut total = 0usize;
        for p in 0..panels {
            let base = p * nx * ny;
            for j in 0..ny {
                for i in 0..nx {
                    let sel = self.cells[base + j * nx + i].selected;
                    let mut same = 0;
                    let mut neighbors = 0;
                    let mut check = |ii: isize, jj: isize| {
                        if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny {
                            neighbors += 1;
                            if self.cells[base + jj as usize * nx + ii as usize].selected == sel {
                                same += 1;
                            }
                        }
                    };
                    check(i as isize - 1, j as isize);
                    check(i as isize + 1, j as isize);
                    check(i as isize, j as isize - 1);
                    check(i as isize, j as isize + 1);
                    total += 1;
                    if same >= 2.min(neighbors) {
                        agreeing += 1;
                    }
                }
            }
        }
        agreeing as f64 / total.max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.grid {
            MapGrid::Hard { .. } => {
                writeln!(w, "v_mps,mu,selected_ordinal")?;
                for c in &self.cells {
                    let mu = match c.ground {
                        GroundModel::HardSurface { mu } => mu,
                        _ => unreachable!("hard map holds hard cells"),
                    };
                    writeln!(w, "{},{},{}", c.v_mps, mu, c.selected.ordinal())?;
                }
            }
            MapGrid::Deformable { .. } => {
                writeln!(w, "v_mps,c_kpa,phi_deg,z_m,selected_ordinal")?;
                for c in &self.cells {
                    let (z, cp, phi) = match c.ground {
                        GroundModel::Deformable {
                            sinkage_m,
                            cohesion_pa,
                            shear_angle_rad,
                        } => (sinkage_m, cohesion_pa / 1e3, shear_angle_rad.to_degrees()),
                        _ => unreachable!("deformable map holds deformable cells"),
                    };
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        c.v_mps,
                        cp,
                        phi,
                        z,
                        c.selected.ordinal()
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn write_svg_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_svg(std::io::BufWriter::new(f))
    }

    /// Self-contained SVG with a five-entry legend keyed to the maneuver
    /// ordinals. The deformable map renders one (v, c) panel per phi.
    pub fn write_svg<W: Write>(&self, mut w: W) -> Result<()> {
        const COLORS: [&str; 5] = ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd"];
        const CELL: f64 = 22.0;
        const MARGIN: f64 = 58.0;
        const LEGEND_H: f64 = 96.0;

        let (nx, ny, panels, panel_labels): (usize, usize, usize, Vec<String>) = match &self.grid {
            MapGrid::Hard { v_axis, mu_axis } => {
                (v_axis.len(), mu_axis.len(), 1, vec!["".to_string()])
            }
            MapGrid::Deformable {
                v_axis,
                c_kpa_axis,
                phi_deg_axis,
                z_m,
            } => (
                v_axis.len(),
                c_kpa_axis.len(),
                phi_deg_axis.len(),
                phi_deg_axis
                    .iter()
                    .map(|phi| format!("phi = {phi:.1} deg, z = {z_m} m"))
                    .collect(),
            ),
        };
        let panel_w = nx as f64 * CELL + MARGIN;
        let width = panels as f64 * panel_w + 20.0;
        let height = ny as f64 * CELL + MARGIN + LEGEND_H;

        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
        )?;
        writeln!(
            w,
            r#"<rect width="{width}" height="{height}" fill="white"/>"#
        )?;

        for (p, label) in panel_labels.iter().enumerate().take(panels) {
            let ox = 10.0 + p as f64 * panel_w + 40.0;
            let oy = 24.0;
            let base = p * nx * ny;
            for j in 0..ny {
                for i in 0..nx {
                    let cell = &self.cells[base + j * nx + i];
                    let color = COLORS[(cell.selected.ordinal() - 1) as usize];
                    // y axis grows upward
                    let x = ox + i as f64 * CELL;
                    let y = oy + (ny - 1 - j) as f64 * CELL;
                    writeln!(
                        w,
                        r#"<rect x="{x:.1}" y="{y:.1}" width="{CELL}" height="{CELL}" fill="{color}" stroke="white" stroke-width="0.5"/>"#
                    )?;
                }
            }
            let (x_label, y_label) = match &self.grid {
                MapGrid::Hard { .. } => ("v (m/s)", "mu"),
                MapGrid::Deformable { .. } => ("v (m/s)", "c (kPa)"),
            };
            let lx = ox + nx as f64 * CELL / 2.0;
            let ly = oy + ny as f64 * CELL + 18.0;
            writeln!(
                w,
                r#"<text x="{lx:.1}" y="{ly:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{x_label}</text>"#
            )?;
            let ty = oy + ny as f64 * CELL / 2.0;
            let tx = ox - 26.0;
            writeln!(
                w,
                r#"<text x="{tx:.1}" y="{ty:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 {tx:.1} {ty:.1})">{y_label}</text>"#
            )?;
            if !label.is_empty() {
                writeln!(
                    w,
                    r#"<text x="{lx:.1}" y="14" font-family="sans-serif" font-size="12" text-anchor="middle">{label}</text>"#
                )?;
            }
            // axis extent labels
            let (x0, x1, y0, y1) = match &self.grid {
                MapGrid::Hard { v_axis, mu_axis } => (
                    v_axis[0],
                    *v_axis.last().unwrap(),
                    mu_axis[0],
                    *mu_axis.last().unwrap(),
                ),
                MapGrid::Deformable {
                    v_axis, c_kpa_axis, ..
                } => (
                    v_axis[0],
                    *v_axis.last().unwrap(),
                    c_kpa_axis[0],
                    *c_kpa_axis.last().unwrap(),
                ),
            };
            let ay = oy + ny as f64 * CELL + 4.0;
            writeln!(
                w,
                r#"<text x="{ox:.1}" y="{ay:.1}" font-family="sans-serif" font-size="9">{x0}</text>"#
            )?;
            writeln!(
                w,
                r#"<text x="{:.1}" y="{ay:.1}" font-family="sans-serif" font-size="9" text-anchor="end">{x1}</text>"#,
                ox + nx as f64 * CELL
            )?;
            writeln!(
                w,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="9" text-anchor="end">{y0}</text>"#,
                ox - 4.0,
                oy + ny as f64 * CELL
            )?;
            writeln!(
                w,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="9" text-anchor="end">{y1}</text>"#,
                ox - 4.0,
                oy + 10.0
            )?;
        }

        // legend
        let ly0 = ny as f64 * CELL + MARGIN;
        for (i, m) in crate::types::ALL_MANEUVERS.iter().enumerate() {
            let y = ly0 + i as f64 * 16.0;
            writeln!(
                w,
                r#"<rect x="14" y="{y:.1}" width="12" height="12" fill="{}"/>"#,
                COLORS[i]
            )?;
            writeln!(
                w,
                r#"<text x="32" y="{:.1}" font-family="sans-serif" font-size="11">{} {}</text>"#,
                y + 10.0,
                m.ordinal(),
                m.name()
            )?;
        }
        writeln!(w, "</svg>")?;
        Ok(())
    }
}
