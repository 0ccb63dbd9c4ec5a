//! Tabulated effective-index data with bilinear interpolation.
//!
//! Lets externally computed mode data (full-vector solver exports, foundry
//! measurements) stand in for the analytic surrogate anywhere an
//! [`EffIndexModel`] is accepted. Tables are rectangular width × thickness
//! grids loaded from JSON or CSV.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{EffIndexModel, Geometry, WaveguideSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeffTable {
    /// Free-form tag describing where the data came from.
    pub provenance: String,
    pub geometry: Geometry,
    pub wavelength_nm: f64,
    /// Strictly increasing grid axes.
    pub widths_nm: Vec<f64>,
    pub thicknesses_nm: Vec<f64>,
    /// `values[i][j]` is n_eff at `widths_nm[i]`, `thicknesses_nm[j]`.
    pub values: Vec<Vec<f64>>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::Format(format!("{name} axis needs at least 2 points")));
    }
    if !axis.windows(2).all(|p| p[1] > p[0]) {
        return Err(Error::Format(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

/// Index of the cell containing `x`, clamped so `x` is inside the axis span.
fn bracket(axis: &[f64], x: f64) -> Result<usize> {
    let lo = axis[0];
    let hi = *axis.last().unwrap();
    if x < lo || x > hi {
        return Err(Error::Domain(format!(
            "query {x} outside tabulated range [{lo}, {hi}]"
        )));
    }
    let i = axis.partition_point(|&a| a <= x);
    Ok(i.clamp(1, axis.len() - 1) - 1)
}

impl NeffTable {
    pub fn validate(&self) -> Result<()> {
        check_axis("width", &self.widths_nm)?;
        check_axis("thickness", &self.thicknesses_nm)?;
        if self.values.len() != self.widths_nm.len()
            || self.values.iter().any(|r| r.len() != self.thicknesses_nm.len())
        {
            return Err(Error::Format("value grid shape does not match axes".into()));
        }
        if self
            .values
            .iter()
            .flatten()
            .any(|v| !v.is_finite() || *v <= 1.0 || *v >= 4.0)
        {
            return Err(Error::Format("table holds non-physical index values".into()));
        }
        if self.wavelength_nm <= 0.0 {
            return Err(Error::Format("non-positive wavelength".into()));
        }
        Ok(())
    }

    /// Sample `model` over the given axes to build a table.
    pub fn from_model(
        model: &dyn EffIndexModel,
        geometry: Geometry,
        widths_nm: &[f64],
        thicknesses_nm: &[f64],
    ) -> Result<NeffTable> {
        let mut values = Vec::with_capacity(widths_nm.len());
        for &w in widths_nm {
            let mut row = Vec::with_capacity(thicknesses_nm.len());
            for &t in thicknesses_nm {
                let mut spec = WaveguideSpec::nominal(geometry);
                spec.width_nm = w;
                spec.thickness_nm = t;
                row.push(model.n_eff(&spec)?);
            }
            values.push(row);
        }
        let table = NeffTable {
            provenance: model.provenance().to_string(),
            geometry,
            wavelength_nm: WaveguideSpec::nominal(geometry).wavelength_nm,
            widths_nm: widths_nm.to_vec(),
            thicknesses_nm: thicknesses_nm.to_vec(),
            values,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn load_json<P: AsRef<Path>>(path: P) -> Result<NeffTable> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        let table: NeffTable = serde_json::from_str(&text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn save_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(())
    }

    /// CSV with a `width_nm,thickness_nm,n_eff` header; rows may appear in any
    /// order but must cover the full cartesian grid exactly once.
    pub fn load_csv<P: AsRef<Path>>(
        path: P,
        provenance: &str,
        geometry: Geometry,
        wavelength_nm: f64,
    ) -> Result<NeffTable> {
        let mut rdr = csv::Reader::from_path(path.as_ref()).map_err(Error::from)?;
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for record in rdr.deserialize() {
            let (w, t, n): (f64, f64, f64) = record.map_err(Error::from)?;
            rows.push((w, t, n));
        }
        let mut widths: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut thicknesses: Vec<f64> = rows.iter().map(|r| r.1).collect();
        widths.sort_by(f64::total_cmp);
        widths.dedup();
        thicknesses.sort_by(f64::total_cmp);
        thicknesses.dedup();
        if rows.len() != widths.len() * thicknesses.len() {
            return Err(Error::Format(format!(
                "csv is not a full grid: {} rows for {}×{} axes",
                rows.len(),
                widths.len(),
                thicknesses.len()
            )));
        }
        let mut grid = Array2::from_elem((widths.len(), thicknesses.len()), f64::NAN);
        for (w, t, n) in rows {
            let i = widths.partition_point(|&a| a < w);
            let j = thicknesses.partition_point(|&a| a < t);
            if !grid[[i, j]].is_nan() {
                return Err(Error::Format(format!("duplicate grid point ({w}, {t})")));
            }
            grid[[i, j]] = n;
        }
        let table = NeffTable {
            provenance: provenance.to_string(),
            geometry,
            wavelength_nm,
            widths_nm: widths,
            thicknesses_nm: thicknesses,
            values: grid.outer_iter().map(|r| r.to_vec()).collect(),
        };
        table.validate()?;
        Ok(table)
    }

    fn interpolate(&self, w: f64, t: f64) -> Result<f64> {
        let i = bracket(&self.widths_nm, w)?;
        let j = bracket(&self.thicknesses_nm, t)?;
        let (w0, w1) = (self.widths_nm[i], self.widths_nm[i + 1]);
        let (t0, t1) = (self.thicknesses_nm[j], self.thicknesses_nm[j + 1]);
        let fw = (w - w0) / (w1 - w0);
        let ft = (t - t0) / (t1 - t0);
        let v = &self.values;
        Ok(v[i][j] * (1.0 - fw) * (1.0 - ft)
            + v[i + 1][j] * fw * (1.0 - ft)
            + v[i][j + 1] * (1.0 - fw) * ft
            + v[i + 1][j + 1] * fw * ft)
    }
}

impl EffIndexModel for NeffTable {
    fn n_eff(&self, spec: &WaveguideSpec) -> Result<f64> {
        if spec.geometry != self.geometry {
            return Err(Error::Domain(format!(
                "table holds {} data, queried for {}",
                self.geometry, spec.geometry
            )));
        }
        if (spec.wavelength_nm - self.wavelength_nm).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "table tabulated at {} nm, queried at {} nm",
                self.wavelength_nm, spec.wavelength_nm
            )));
        }
        self.interpolate(spec.width_nm, spec.thickness_nm)
    }

    fn provenance(&self) -> &'static str {
        "table"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::eim::EimModel;

    fn toy_table() -> NeffTable {
        NeffTable {
            provenance: "test".into(),
            geometry: Geometry::Strip,
            wavelength_nm: 1550.0,
            widths_nm: vec![400.0, 500.0, 600.0],
            thicknesses_nm: vec![210.0, 230.0],
            values: vec![vec![2.0, 2.1], vec![2.2, 2.3], vec![2.35, 2.45]],
        }
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_linear_between() {
        let t = toy_table();
        assert_eq!(t.interpolate(500.0, 210.0).unwrap(), 2.2);
        assert_eq!(t.interpolate(600.0, 230.0).unwrap(), 2.45);
        // Midpoint of a cell: average of its corners.
        let mid = t.interpolate(450.0, 220.0).unwrap();
        assert!((mid - 0.25 * (2.0 + 2.1 + 2.2 + 2.3)).abs() < 1e-12);
        // Edge midpoint.
        let e = t.interpolate(400.0, 220.0).unwrap();
        assert!((e - 2.05).abs() < 1e-12);
    }

    #[test]
    fn queries_outside_the_grid_are_domain_errors() {
        let t = toy_table();
        assert!(matches!(t.interpolate(399.9, 220.0), Err(Error::Domain(_))));
        assert!(matches!(t.interpolate(500.0, 231.0), Err(Error::Domain(_))));
    }

    #[test]
    fn geometry_and_wavelength_mismatches_are_rejected() {
        let t = toy_table();
        let mut spec = WaveguideSpec::nominal(Geometry::Ridge);
        spec.width_nm = 500.0;
        assert!(t.n_eff(&spec).is_err());
        let mut spec = WaveguideSpec::nominal(Geometry::Strip);
        spec.width_nm = 500.0;
        spec.wavelength_nm = 1310.0;
        assert!(t.n_eff(&spec).is_err());
    }

    #[test]
    fn table_sampled_from_a_model_reproduces_it() {
        let model = EimModel::default();
        let widths: Vec<f64> = (350..=1200).step_by(10).map(|w| w as f64).collect();
        let thicknesses: Vec<f64> = (210..=230).step_by(2).map(|t| t as f64).collect();
        let table = NeffTable::from_model(&model, Geometry::Strip, &widths, &thicknesses).unwrap();
        // Exact at nodes.
        let spec = WaveguideSpec::nominal(Geometry::Strip).with_width(470.0);
        let direct = model.n_eff(&spec).unwrap();
        assert!((table.n_eff(&spec).unwrap() - direct).abs() < 1e-12);
        // Close between nodes (the surface is smooth).
        let spec = WaveguideSpec::nominal(Geometry::Strip).with_width(473.7);
        let err = (table.n_eff(&spec).unwrap() - model.n_eff(&spec).unwrap()).abs();
        assert!(err < 5e-4, "interp error {err}");
    }

    #[test]
    fn json_round_trip_preserves_the_table() {
        let t = toy_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.json");
        t.save_json(&path).unwrap();
        let back = NeffTable::load_json(&path).unwrap();
        assert_eq!(back.widths_nm, t.widths_nm);
        assert_eq!(back.values, t.values);
    }

    #[test]
    fn csv_loads_a_shuffled_full_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        std::fs::write(
            &path,
            "width_nm,thickness_nm,n_eff\n\
             500,230,2.3\n400,210,2.0\n600,210,2.35\n\
             400,230,2.1\n600,230,2.45\n500,210,2.2\n",
        )
        .unwrap();
        let t = NeffTable::load_csv(&path, "test", Geometry::Strip, 1550.0).unwrap();
        assert_eq!(t.widths_nm, vec![400.0, 500.0, 600.0]);
        assert_eq!(t.values[1], vec![2.2, 2.3]);
    }

    #[test]
    fn csv_with_missing_cells_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "width_nm,thickness_nm,n_eff\n400,210,2.0\n400,230,2.1\n500,210,2.2\n",
        )
        .unwrap();
        assert!(matches!(
            NeffTable::load_csv(&path, "t", Geometry::Strip, 1550.0),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn validation_rejects_malformed_tables() {
        let mut t = toy_table();
        t.values[0][0] = 9.0;
        assert!(t.validate().is_err());
        let mut t = toy_table();
        t.widths_nm = vec![500.0, 400.0, 600.0];
        assert!(t.validate().is_err());
        let mut t = toy_table();
        t.values.pop();
        assert!(t.validate().is_err());
    }
}
