//! Deterministic CSV/JSON result tables with 17-significant-digit floats.

use std::fmt::Write as _;

use crate::concentration::{Ratio, StabilityReport};
use crate::fock::ConvergenceTable;
use crate::levelsets::LevelProfile;
use crate::mixed::MixedReport;
use crate::sharpness::SharpnessFit;
use crate::wehrl::WehrlReport;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Ratio> for Cell {
    fn from(r: Ratio) -> Self {
        match r {
            Ratio::Value(v) => Cell::Float(v),
            Ratio::Exact => Cell::Text("exact".into()),
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// `d.dddddddddddddddde±x`, or `nan` / `inf` / `-inf`. Negative zero prints as zero.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Bool(v) => v.to_string(),
        Cell::Empty => String::new(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_value(c: &Cell) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) if v.is_finite() => format_float(*v),
        Cell::Float(v) => serde_json::to_string(&format_float(*v)).expect("string"),
        Cell::Bool(v) => v.to_string(),
        Cell::Empty => "null".into(),
        Cell::Text(s) => serde_json::to_string(s).expect("string"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// # Panics
    /// When the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(csv_field).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects, keys in column order.
    pub fn to_json(&self) -> String {
        let keys: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::to_string(c).expect("string"))
            .collect();
        let mut out = String::from("[");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (k, c)) in keys.iter().zip(r).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{k}: {}", json_value(c));
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Rows keyed by trial index.
pub fn stability_table(rows: &[(u64, StabilityReport)]) -> Table {
    let mut t = Table::new(&[
        "trial", "N", "m_omega", "C", "C_max", "deficit", "D_N", "asymmetry", "ratio_thm", "ratio_prop",
    ]);
    for (trial, r) in rows {
        t.push(vec![
            (*trial).into(),
            r.n.into(),
            r.m_omega.into(),
            r.c_value.into(),
            r.c_max.into(),
            r.deficit.into(),
            r.d_n.into(),
            r.asymmetry.into(),
            r.ratio_thm.into(),
            r.ratio_prop.into(),
        ]);
    }
    t
}

pub fn profile_table(p: &LevelProfile) -> Table {
    let mut t = Table::new(&["t", "mu", "mu0", "refinement_cells"]);
    for i in 0..p.t_grid.len() {
        t.push(vec![
            p.t_grid[i].into(),
            p.mu[i].into(),
            p.mu0[i].into(),
            p.refinement_cells[i].into(),
        ]);
    }
    t
}

pub fn spectrum_table(spectrum: &[f64]) -> Table {
    let mut t = Table::new(&["n", "lambda_n"]);
    for (i, v) in spectrum.iter().enumerate() {
        t.push(vec![i.into(), (*v).into()]);
    }
    t
}

pub fn wehrl_table(rows: &[WehrlReport]) -> Table {
    let mut t = Table::new(&["N", "phi_kind", "phi_param", "entropy", "reference", "gap", "D_N", "ratio"]);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.phi.kind_name().into(),
            r.phi.param().into(),
            r.entropy.into(),
            r.reference.into(),
            r.gap.into(),
            r.d_n.into(),
            r.ratio.into(),
        ]);
    }
    t
}

pub fn mixed_table(rows: &[MixedReport]) -> Table {
    let mut t = Table::new(&[
        "N",
        "rank",
        "m_omega",
        "C",
        "C_max",
        "deficit",
        "phi_kind",
        "phi_param",
        "entropy",
        "reference",
        "gap",
        "D_N",
        "D_bound",
        "sup_u",
        "ratio_concentration",
        "ratio_asymmetry",
        "ratio_entropy",
    ]);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.rank.into(),
            r.m_omega.into(),
            r.c_value.into(),
            r.c_max.into(),
            r.deficit.into(),
            r.phi.kind_name().into(),
            r.phi.param().into(),
            r.entropy.into(),
            r.reference.into(),
            r.gap.into(),
            r.d_n.into(),
            r.d_bound.into(),
            r.t_max.into(),
            r.ratio_concentration.into(),
            r.ratio_asymmetry.into(),
            r.ratio_entropy.into(),
        ]);
    }
    t
}

pub fn fock_table(ct: &ConvergenceTable) -> Table {
    let mut t = Table::new(&["N", "quantity", "value", "target", "error", "error_ratio"]);
    for r in &ct.rows {
        t.push(vec![
            r.n.into(),
            r.quantity.name().into(),
            r.value.into(),
            r.target.into(),
            r.error.into(),
            r.error_ratio.into(),
        ]);
    }
    t
}

pub fn sharpness_table(fits: &[SharpnessFit]) -> Table {
    let mut t = Table::new(&[
        "N",
        "eps",
        "D_sq",
        "gap",
        "D_sq_over_eps4",
        "gap_over_eps4",
        "D_sq_target",
        "gap_target",
    ]);
    for f in fits {
        for r in &f.rows {
            t.push(vec![
                r.n.into(),
                r.eps.into(),
                r.d_sq.into(),
                r.gap.into(),
                r.d_sq_over_eps4.into(),
                r.gap_over_eps4.into(),
                f.d_target.into(),
                f.gap_target.into(),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-308, f64::MIN_POSITIVE, 0.0] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(-0.0), format_float(0.0));
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(t.to_csv(), "a,b\n");
        assert_eq!(t.to_json(), "[]\n");
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new(&["N", "name", "x", "r"]);
        t.push(vec![3usize.into(), "a,b".into(), 0.5.into(), Ratio::Exact.into()]);
        t.push(vec![4usize.into(), "c".into(), f64::INFINITY.into(), Cell::Empty]);
        assert_eq!(
            t.to_csv(),
            "N,name,x,r\n3,\"a,b\",5.0000000000000000e-1,exact\n4,c,inf,\n"
        );
        let json = t.to_json();
        assert!(json.ends_with("\n]\n"));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["x"], 0.5);
        assert_eq!(v[1]["x"], "inf");
        assert_eq!(v[1]["r"], serde_json::Value::Null);
        let first = json.find("\"N\"").unwrap();
        assert!(first < json.find("\"name\"").unwrap() && json.find("\"x\"").unwrap() < json.find("\"r\"").unwrap());
    }
}
