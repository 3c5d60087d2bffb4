use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Operator;
use crate::order::{OrderInterval, OrderedUniverse};

use super::FinitePoset;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("table has {rows} rows, expected {size}")]
    Rows { rows: usize, size: usize },
    #[error("row {row} has {len} entries, expected {size}")]
    Shape { row: usize, len: usize, size: usize },
    #[error("entry ({x}, {y}) = {value} is not an element of a {size}-element poset")]
    OutOfRange { x: usize, y: usize, value: usize, size: usize },
}

/// Lookup table `A(x, y) = table[x][y]` on a finite poset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TableOperator {
    pub table: Vec<Vec<usize>>,
}

impl TableOperator {
    pub fn new(table: Vec<Vec<usize>>, size: usize) -> Result<Self, TableError> {
        let t = Self { table };
        t.validate(size)?;
        Ok(t)
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        Self {
            table: (0..size).map(|x| (0..size).map(|y| f(x, y)).collect()).collect(),
        }
    }

    /// Total on `X × X` with values in `X`.
    pub fn validate(&self, size: usize) -> Result<(), TableError> {
        if self.table.len() != size {
            return Err(TableError::Rows { rows: self.table.len(), size });
        }
        for (x, row) in self.table.iter().enumerate() {
            if row.len() != size {
                return Err(TableError::Shape { row: x, len: row.len(), size });
            }
            if let Some((y, &value)) = row.iter().enumerate().find(|(_, &v)| v >= size) {
                return Err(TableError::OutOfRange { x, y, value, size });
            }
        }
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn to_operator(&self, poset: Arc<FinitePoset>, label: impl Into<String>) -> Operator<FinitePoset> {
        let t = self.table.clone();
        Operator::new(poset, label, move |x: &usize, y: &usize| t[*x][*y])
    }

    /// Tabulate any operator on a finite poset.
    pub fn tabulate(op: &Operator<FinitePoset>) -> Self {
        Self::from_fn(op.universe().size(), |x, y| op.apply(&x, &y))
    }
}

/// Every coupled fixed point `(x, y)` with both coordinates in `range`
/// (the whole universe when `None`).
pub fn enumerate_coupled_fixed_points<U: OrderedUniverse>(
    a: &Operator<U>,
    range: Option<&OrderInterval<U::Element>>,
) -> Vec<(U::Element, U::Element)> {
    let u = a.universe();
    let all = u.elements().expect("enumeration needs a finite universe");
    let pool: Vec<_> = match range {
        Some(r) => all.into_iter().filter(|z| r.contains(u.as_ref(), z)).collect(),
        None => all,
    };
    let mut out = Vec::new();
    for x in &pool {
        for y in &pool {
            let ax = a.apply(x, y);
            if u.equal(&ax, x) && u.equal(&a.apply(y, x), y) {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}
