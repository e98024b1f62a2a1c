//! Polynomial tensor fields on a chart: differential forms, vector fields
//! and bivector fields.
//!
//! A `p`-form stores one polynomial per strictly increasing coordinate
//! multi-index; the index is encoded as a bitmask over coordinates (bit `i`
//! set means `dx_i` participates in the blade). Bivectors store the strict
//! upper triangle in lexicographic pair order.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::chart::{same_chart, Chart};
use crate::error::CalcError;
use crate::poly::PolyExpr;
use crate::rat::Rat;

/// Blade bitmask: bit `i` is the basis 1-form of coordinate `i`.
pub type Blade = u32;

pub fn blade_degree(b: Blade) -> usize {
    b.count_ones() as usize
}

/// Sign of merging blade `b` (right factor) into `a` (left factor), or
/// `None` if they share a coordinate. Counting transpositions of basis
/// 1-forms.
pub fn blade_merge(a: Blade, b: Blade) -> Option<(Blade, i8)> {
    if a & b != 0 {
        return None;
    }
    let mut sign = 1i8;
    let mut rest = b;
    while rest != 0 {
        let i = rest.trailing_zeros();
        // factors of `a` that must jump over dx_i
        if (a >> (i + 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        rest &= rest - 1;
    }
    Some((a | b, sign))
}

/// A differential form of homogeneous degree with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    chart: Chart,
    degree: usize,
    comps: BTreeMap<Blade, PolyExpr>,
}

impl FormField {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        FormField { chart: chart.clone(), degree, comps: BTreeMap::new() }
    }

    /// A 0-form is just a function.
    pub fn scalar(p: PolyExpr) -> Self {
        let chart = p.chart().clone();
        let mut f = FormField::zero(&chart, 0);
        f.set(0, p);
        f
    }

    /// The coordinate differential `dx_idx`.
    pub fn basis_one_form(chart: &Chart, idx: usize) -> Self {
        let mut f = FormField::zero(chart, 1);
        f.set(1 << idx, PolyExpr::one(chart));
        f
    }

    /// A 1-form from its coefficient vector.
    pub fn one_form(chart: &Chart, comps: Vec<PolyExpr>) -> Self {
        assert_eq!(comps.len(), chart.dim());
        let mut f = FormField::zero(chart, 1);
        for (i, p) in comps.into_iter().enumerate() {
            f.set(1 << i, p);
        }
        f
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (Blade, &PolyExpr)> {
        self.comps.iter().map(|(b, p)| (*b, p))
    }

    pub fn component(&self, blade: Blade) -> PolyExpr {
        self.comps
            .get(&blade)
            .cloned()
            .unwrap_or_else(|| PolyExpr::zero(&self.chart))
    }

    /// Coefficient of `dx_i` on a 1-form.
    pub fn coeff(&self, i: usize) -> PolyExpr {
        assert_eq!(self.degree, 1);
        self.component(1 << i)
    }

    /// Coefficient vector of a 1-form.
    pub fn coeffs(&self) -> Vec<PolyExpr> {
        assert_eq!(self.degree, 1);
        (0..self.chart.dim()).map(|i| self.coeff(i)).collect()
    }

    pub fn set(&mut self, blade: Blade, p: PolyExpr) {
        assert_eq!(blade_degree(blade), self.degree, "blade degree mismatch");
        if p.is_zero() {
            self.comps.remove(&blade);
        } else {
            self.comps.insert(blade, p);
        }
    }

    pub fn accumulate(&mut self, blade: Blade, p: &PolyExpr) {
        let sum = &self.component(blade) + p;
        self.set(blade, sum);
    }

    pub fn add(&self, other: &FormField) -> FormField {
        same_chart(&self.chart, &other.chart).expect("form addition across charts");
        assert_eq!(self.degree, other.degree, "form degrees differ");
        let mut out = self.clone();
        for (b, p) in &other.comps {
            out.accumulate(*b, p);
        }
        out
    }

    pub fn sub(&self, other: &FormField) -> FormField {
        self.add(&other.scale_rat(&Rat::from_integer((-1).into())))
    }

    pub fn scale_rat(&self, r: &Rat) -> FormField {
        let mut out = FormField::zero(&self.chart, self.degree);
        for (b, p) in &self.comps {
            out.set(*b, p.scale(r));
        }
        out
    }

    /// Multiply by a function (module structure over 0-forms).
    pub fn scale_poly(&self, f: &PolyExpr) -> FormField {
        same_chart(&self.chart, f.chart()).expect("scaling across charts");
        let mut out = FormField::zero(&self.chart, self.degree);
        for (b, p) in &self.comps {
            out.set(*b, p * f);
        }
        out
    }

    /// Largest absolute coefficient across all components.
    pub fn max_abs_coeff(&self) -> Rat {
        self.comps
            .values()
            .map(|p| p.max_abs_coeff())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn check_cap(&self) -> Result<(), CalcError> {
        for p in self.comps.values() {
            p.check_cap()?;
        }
        Ok(())
    }
}

impl fmt::Display for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let names = self.chart.names();
        for (k, (blade, p)) in self.comps.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if self.degree == 0 {
                write!(f, "{}", p)?;
                continue;
            }
            write!(f, "({})", p)?;
            let mut rest = *blade;
            let mut first = true;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                write!(f, "{}d{}", if first { " " } else { "^" }, names[i])?;
                first = false;
                rest &= rest - 1;
            }
        }
        Ok(())
    }
}

/// A polynomial vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<PolyExpr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<PolyExpr>) -> Self {
        assert_eq!(comps.len(), chart.dim());
        for p in &comps {
            same_chart(chart, p.chart()).expect("vector component chart");
        }
        VectorField { chart: chart.clone(), comps }
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField::new(chart, (0..chart.dim()).map(|_| PolyExpr::zero(chart)).collect())
    }

    pub fn basis(chart: &Chart, idx: usize) -> Self {
        let mut v = VectorField::zero(chart);
        v.comps[idx] = PolyExpr::one(chart);
        v
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[PolyExpr] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &PolyExpr {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        same_chart(&self.chart, &other.chart).expect("vector addition across charts");
        VectorField::new(
            &self.chart,
            self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        same_chart(&self.chart, &other.chart).expect("vector subtraction across charts");
        VectorField::new(
            &self.chart,
            self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn scale_rat(&self, r: &Rat) -> VectorField {
        VectorField::new(&self.chart, self.comps.iter().map(|p| p.scale(r)).collect())
    }

    pub fn scale_poly(&self, f: &PolyExpr) -> VectorField {
        VectorField::new(&self.chart, self.comps.iter().map(|p| p * f).collect())
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &PolyExpr) -> PolyExpr {
        same_chart(&self.chart, f.chart()).expect("derivative across charts");
        let mut acc = PolyExpr::zero(&self.chart);
        for (i, xi) in self.comps.iter().enumerate() {
            acc = &acc + &(xi * &f.partial(i));
        }
        acc
    }

    /// Commutator `[X, Y]^i = X(Y^i) - Y(X^i)`.
    pub fn commutator(&self, other: &VectorField) -> VectorField {
        same_chart(&self.chart, &other.chart).expect("commutator across charts");
        let comps = (0..self.chart.dim())
            .map(|i| &self.apply(&other.comps[i]) - &other.apply(&self.comps[i]))
            .collect();
        VectorField::new(&self.chart, comps)
    }

    /// Exterior product of two vector fields as a bivector.
    pub fn wedge(&self, other: &VectorField) -> BivectorField {
        same_chart(&self.chart, &other.chart).expect("wedge across charts");
        let mut b = BivectorField::zero(&self.chart);
        let m = self.chart.dim();
        for i in 0..m {
            for j in (i + 1)..m {
                let p = &(&self.comps[i] * &other.comps[j]) - &(&self.comps[j] * &other.comps[i]);
                b.set(i, j, p);
            }
        }
        b
    }

    pub fn max_abs_coeff(&self) -> Rat {
        self.comps
            .iter()
            .map(|p| p.max_abs_coeff())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.chart.names();
        let mut first = true;
        for (i, p) in self.comps.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({}) \u{2202}{}", p, names[i])?;
            first = false;
        }
        Ok(())
    }
}

/// An antisymmetric bivector field; the strict upper triangle is stored in
/// lexicographic pair order (0,1), (0,2), ..., (1,2), ...
#[derive(Debug, Clone, PartialEq)]
pub struct BivectorField {
    chart: Chart,
    upper: Vec<PolyExpr>,
}

/// Position of the pair `(i, j)` with `i < j` in lexicographic order.
pub fn pair_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < dim);
    i * dim - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j` in storage order.
pub fn pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |i| ((i + 1)..dim).map(move |j| (i, j)))
}

impl BivectorField {
    pub fn zero(chart: &Chart) -> Self {
        let m = chart.dim();
        BivectorField {
            chart: chart.clone(),
            upper: (0..m * (m - 1) / 2).map(|_| PolyExpr::zero(chart)).collect(),
        }
    }

    /// Build from upper-triangle components in storage order.
    pub fn from_upper(chart: &Chart, upper: Vec<PolyExpr>) -> Result<Self, CalcError> {
        let m = chart.dim();
        if upper.len() != m * (m - 1) / 2 {
            return Err(CalcError::DimensionMismatch(format!(
                "bivector on a {m}-chart needs {} components, got {}",
                m * (m - 1) / 2,
                upper.len()
            )));
        }
        for p in &upper {
            same_chart(chart, p.chart())?;
        }
        Ok(BivectorField { chart: chart.clone(), upper })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|p| p.is_zero())
    }

    /// Signed component `beta^{ij}`; antisymmetry is by construction.
    pub fn comp(&self, i: usize, j: usize) -> PolyExpr {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Equal => PolyExpr::zero(&self.chart),
            Ordering::Less => self.upper[pair_index(self.chart.dim(), i, j)].clone(),
            Ordering::Greater => -&self.upper[pair_index(self.chart.dim(), j, i)],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, p: PolyExpr) {
        assert!(i < j, "bivector set expects i < j");
        let idx = pair_index(self.chart.dim(), i, j);
        self.upper[idx] = p;
    }

    pub fn upper(&self) -> &[PolyExpr] {
        &self.upper
    }

    pub fn add(&self, other: &BivectorField) -> BivectorField {
        same_chart(&self.chart, &other.chart).expect("bivector addition across charts");
        BivectorField {
            chart: self.chart.clone(),
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &BivectorField) -> BivectorField {
        same_chart(&self.chart, &other.chart).expect("bivector subtraction across charts");
        BivectorField {
            chart: self.chart.clone(),
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale_rat(&self, r: &Rat) -> BivectorField {
        BivectorField {
            chart: self.chart.clone(),
            upper: self.upper.iter().map(|p| p.scale(r)).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> Rat {
        self.upper
            .iter()
            .map(|p| p.max_abs_coeff())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

impl fmt::Display for BivectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.chart.names();
        let mut first = true;
        for (i, j) in pairs(self.chart.dim()) {
            let p = &self.upper[pair_index(self.chart.dim(), i, j)];
            if p.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({}) \u{2202}{}^\u{2202}{}", p, names[i], names[j])?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;

    #[test]
    fn blade_merge_signs() {
        // dx ^ dy: no swap
        assert_eq!(blade_merge(0b001, 0b010), Some((0b011, 1)));
        // dy ^ dx: one swap
        assert_eq!(blade_merge(0b010, 0b001), Some((0b011, -1)));
        // dx ^ dx = 0
        assert_eq!(blade_merge(0b001, 0b001), None);
        // (dx^dz) ^ dy: dy passes over dz
        assert_eq!(blade_merge(0b101, 0b010), Some((0b111, -1)));
    }

    #[test]
    fn pair_indexing_roundtrip() {
        let dim = 5;
        let mut seen = vec![false; dim * (dim - 1) / 2];
        for (i, j) in pairs(dim) {
            let k = pair_index(dim, i, j);
            assert!(!seen[k]);
            seen[k] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn commutator_of_coordinate_fields_vanishes() {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let dx = VectorField::basis(&c, 0);
        let dy = VectorField::basis(&c, 1);
        assert!(dx.commutator(&dy).is_zero());
    }

    #[test]
    fn bivector_antisymmetry_is_structural() {
        let c = ChartDomain::unit_box(&["x", "y", "z"]);
        let mut b = BivectorField::zero(&c);
        b.set(0, 2, PolyExpr::coordinate(&c, 1));
        assert_eq!(b.comp(2, 0), -&PolyExpr::coordinate(&c, 1));
        assert!(b.comp(1, 1).is_zero());
    }
}
