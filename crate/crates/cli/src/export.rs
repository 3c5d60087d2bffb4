//! Trace CSV and JSON artifacts.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use monotone_iter::cone::ConeVector;
use monotone_iter::order::OrderedUniverse;
use monotone_iter::{CoupledTrace, Operator};
use serde::Serialize;

/// An element that flattens into CSV cells.
pub trait Cells {
    fn cells(&self) -> Vec<String>;
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cells for f64 {
    fn cells(&self) -> Vec<String> {
        vec![fmt_f64(*self)]
    }
}

impl Cells for Vec<f64> {
    fn cells(&self) -> Vec<String> {
        self.iter().map(|v| fmt_f64(*v)).collect()
    }
}

impl Cells for ConeVector {
    fn cells(&self) -> Vec<String> {
        self.as_slice().iter().map(|v| fmt_f64(*v)).collect()
    }
}

impl Cells for usize {
    fn cells(&self) -> Vec<String> {
        vec![self.to_string()]
    }
}

/// Columns `n, x0..x{d-1}, y0..y{d-1}, gap`. The gap is the max-norm
/// distance, or the discrete metric on finite posets.
pub fn write_trace_csv<U>(path: &Path, op: &Operator<U>, trace: &CoupledTrace<U::Element>) -> Result<()>
where
    U: OrderedUniverse,
    U::Element: Cells,
{
    let u = op.universe();
    let d = trace.first().x.cells().len();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["n".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    header.extend((0..d).map(|i| format!("y{i}")));
    header.push("gap".into());
    w.write_record(&header)?;
    for s in trace.steps() {
        let gap = u
            .distance(&s.x, &s.y)
            .unwrap_or(if u.equal(&s.x, &s.y) { 0.0 } else { 1.0 });
        let mut row = vec![s.n.to_string()];
        row.extend(s.x.cells());
        row.extend(s.y.cells());
        row.push(fmt_f64(gap));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
pub struct VerdictFile<'a, E: Serialize> {
    pub problem: &'a str,
    pub verdict: &'a monotone_iter::AttractionVerdict<E>,
    /// `A(x*, x*)`, when an `x*` was identified.
    pub image_of_x_star: Option<E>,
    pub horizon: usize,
    pub dropped_steps: usize,
    pub lu_onset: Option<usize>,
    pub empty_intersection_at: Option<usize>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
