//! Chart domains: named coordinates on a closed rational box.
//!
//! Every symbolic object in this crate lives on a single chart. A chart is a
//! box because the reconstruction theory needs a connected, simply connected
//! base, and a box gives that for free while keeping line integration and
//! grid sampling trivial.

use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::error::CalcError;
use crate::rat::Rat;

/// Default cap on total degree; operations that would exceed it fail
/// with `DegreeCapExceeded` instead of growing without bound.
pub const DEFAULT_DEGREE_CAP: u32 = 64;

/// A coordinate chart: `dim` named coordinates, each ranging over a closed
/// interval with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartDomain {
    names: Vec<String>,
    lo: Vec<Rat>,
    hi: Vec<Rat>,
    degree_cap: u32,
}

/// Shared handle to a chart. Charts are immutable once built.
pub type Chart = Arc<ChartDomain>;

impl ChartDomain {
    /// Build a chart from coordinate names and per-coordinate intervals.
    pub fn new(names: Vec<String>, intervals: Vec<(Rat, Rat)>) -> Result<Chart, CalcError> {
        if names.is_empty() {
            return Err(CalcError::InvalidChart("chart needs at least one coordinate".into()));
        }
        if names.len() != intervals.len() {
            return Err(CalcError::InvalidChart(format!(
                "{} coordinate names but {} intervals",
                names.len(),
                intervals.len()
            )));
        }
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                if names[i] == names[j] {
                    return Err(CalcError::InvalidChart(format!(
                        "duplicate coordinate name `{}`",
                        names[i]
                    )));
                }
            }
        }
        let (lo, hi): (Vec<_>, Vec<_>) = intervals.into_iter().unzip();
        for (k, (l, h)) in lo.iter().zip(hi.iter()).enumerate() {
            if l >= h {
                return Err(CalcError::InvalidChart(format!(
                    "interval for `{}` must have lower < upper",
                    names[k]
                )));
            }
        }
        Ok(Arc::new(ChartDomain { names, lo, hi, degree_cap: DEFAULT_DEGREE_CAP }))
    }

    /// Chart with the symmetric unit box `[-1, 1]^dim`.
    pub fn unit_box(names: &[&str]) -> Chart {
        let intervals = names.iter().map(|_| (Rat::from_integer((-1).into()), Rat::from_integer(1.into()))).collect();
        ChartDomain::new(names.iter().map(|s| s.to_string()).collect(), intervals)
            .expect("unit box is always a valid chart")
    }

    /// Replace the degree cap (returns a new chart handle).
    pub fn with_degree_cap(&self, cap: u32) -> Chart {
        Arc::new(ChartDomain {
            names: self.names.clone(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            degree_cap: cap,
        })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// Index of a coordinate name, if present.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn interval(&self, idx: usize) -> (&Rat, &Rat) {
        (&self.lo[idx], &self.hi[idx])
    }

    /// Box center, used as the base point of line integration.
    pub fn center(&self) -> Vec<Rat> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (l + h) / Rat::from_integer(2.into()))
            .collect()
    }

    pub fn center_f64(&self) -> Vec<f64> {
        self.center().iter().map(|r| r.to_f64().unwrap_or(0.0)).collect()
    }

    pub fn contains_rat(&self, point: &[Rat]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(k, x)| *x >= self.lo[k] && *x <= self.hi[k])
    }

    pub fn contains_f64(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point.iter().enumerate().all(|(k, x)| {
                let lo = self.lo[k].to_f64().unwrap_or(f64::NEG_INFINITY);
                let hi = self.hi[k].to_f64().unwrap_or(f64::INFINITY);
                *x >= lo && *x <= hi
            })
    }

    pub fn box_f64(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|k| {
                (
                    self.lo[k].to_f64().unwrap_or(f64::NEG_INFINITY),
                    self.hi[k].to_f64().unwrap_or(f64::INFINITY),
                )
            })
            .collect()
    }

    /// Product chart for objects on `self x other` (left block first).
    ///
    /// Coordinates of `other` that collide with a name on the left side get
    /// an `_r` suffix (the identity scenario uses the same names on both
    /// factors). The degree cap is the max of the two.
    pub fn product(&self, other: &ChartDomain) -> Result<Chart, CalcError> {
        let mut names = self.names.clone();
        for n in &other.names {
            let mut candidate = n.clone();
            while names.contains(&candidate) {
                candidate.push_str("_r");
            }
            names.push(candidate);
        }
        let mut lo = self.lo.clone();
        lo.extend(other.lo.iter().cloned());
        let mut hi = self.hi.clone();
        hi.extend(other.hi.iter().cloned());
        let chart = ChartDomain {
            names,
            lo,
            hi,
            degree_cap: self.degree_cap.max(other.degree_cap),
        };
        Ok(Arc::new(chart))
    }

    /// One-line signature used in mismatch diagnostics.
    pub fn signature(&self) -> String {
        self.names.join(",")
    }
}

impl fmt::Display for ChartDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, n) in self.names.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} in [{}, {}]", n, self.lo[k], self.hi[k])?;
        }
        write!(f, ")")
    }
}

/// Check that two chart handles refer to the same chart.
pub fn same_chart(a: &Chart, b: &Chart) -> Result<(), CalcError> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(CalcError::ChartMismatch(a.signature(), b.signature()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn rejects_empty_and_degenerate() {
        assert!(ChartDomain::new(vec![], vec![]).is_err());
        let bad = ChartDomain::new(vec!["x".into()], vec![(rat(1, 1), rat(1, 1))]);
        assert!(bad.is_err());
        let dup = ChartDomain::new(
            vec!["x".into(), "x".into()],
            vec![(rat(0, 1), rat(1, 1)), (rat(0, 1), rat(1, 1))],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn product_renames_collisions() {
        let a = ChartDomain::unit_box(&["a", "b"]);
        let p = a.product(&a).unwrap();
        assert_eq!(p.names(), &["a", "b", "a_r", "b_r"]);
        assert_eq!(p.dim(), 4);
    }

    #[test]
    fn center_of_unit_box_is_origin() {
        let c = ChartDomain::unit_box(&["x", "y", "z"]);
        assert!(c.center().iter().all(|r| r == &rat(0, 1)));
        assert!(c.contains_f64(&[1.0, -1.0, 0.5]));
        assert!(!c.contains_f64(&[1.5, 0.0, 0.0]));
    }
}
