//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A `PolyExpr` is tied to a chart: its exponent vectors have one entry per
//! chart coordinate. Terms live in a `BTreeMap` so iteration order (and hence
//! printing and hashing) is deterministic. Coefficients are `BigRational`;
//! no floating point enters until a value is explicitly evaluated at an
//! `f64` point, so every identity in the symbolic layer is exactly decidable.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::chart::{same_chart, Chart};
use crate::error::CalcError;
use crate::rat::{rat_to_f64, Rat};

/// Exponent vector; `exps[i]` is the power of the chart's `i`-th coordinate.
pub type Monomial = Vec<u32>;

/// A polynomial over a chart's coordinates.
#[derive(Debug, Clone)]
pub struct PolyExpr {
    chart: Chart,
    terms: BTreeMap<Monomial, Rat>,
}

impl PartialEq for PolyExpr {
    fn eq(&self, other: &Self) -> bool {
        *self.chart == *other.chart && self.terms == other.terms
    }
}
impl Eq for PolyExpr {}

impl PolyExpr {
    pub fn zero(chart: &Chart) -> Self {
        PolyExpr { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(chart: &Chart, value: Rat) -> Self {
        let mut p = PolyExpr::zero(chart);
        if !value.is_zero() {
            p.terms.insert(vec![0; chart.dim()], value);
        }
        p
    }

    pub fn one(chart: &Chart) -> Self {
        PolyExpr::constant(chart, Rat::one())
    }

    /// The coordinate function `x_idx`.
    pub fn coordinate(chart: &Chart, idx: usize) -> Self {
        assert!(idx < chart.dim(), "coordinate index out of range");
        let mut exps = vec![0u32; chart.dim()];
        exps[idx] = 1;
        let mut p = PolyExpr::zero(chart);
        p.terms.insert(exps, Rat::one());
        p
    }

    /// Build from raw terms, dropping zero coefficients.
    pub fn from_terms(chart: &Chart, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = PolyExpr::zero(chart);
        for (m, c) in terms {
            assert_eq!(m.len(), chart.dim(), "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.chart.dim()])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn coefficient(&self, mono: &Monomial) -> Rat {
        self.terms.get(mono).cloned().unwrap_or_else(Rat::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Largest absolute coefficient (zero for the zero polynomial).
    pub fn max_abs_coeff(&self) -> Rat {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    fn add_term(&mut self, mono: Monomial, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(mono) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, factor: &Rat) -> Self {
        if factor.is_zero() {
            return PolyExpr::zero(&self.chart);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c * factor))
            .collect();
        PolyExpr { chart: self.chart.clone(), terms }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = PolyExpr::one(&self.chart);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Fail if the total degree exceeds the chart's cap. Called by the
    /// operations that can compound growth (wedge chains, substitution,
    /// gauge series), which is where runaway degrees actually arise.
    pub fn check_cap(&self) -> Result<(), CalcError> {
        let cap = self.chart.degree_cap();
        if let Some(d) = self.total_degree() {
            if d > cap {
                return Err(CalcError::DegreeCapExceeded { degree: d, cap });
            }
        }
        Ok(())
    }

    /// Partial derivative in coordinate `var`.
    pub fn partial(&self, var: usize) -> Self {
        let mut out = PolyExpr::zero(&self.chart);
        for (m, c) in &self.terms {
            let e = m[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[var] = e - 1;
            out.add_term(m2, c * Rat::from_integer(e.into()));
        }
        out
    }

    /// Antiderivative in coordinate `var` with zero constant of integration.
    pub fn antiderivative(&self, var: usize) -> Self {
        let mut out = PolyExpr::zero(&self.chart);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            m2[var] += 1;
            let new_exp = m2[var];
            out.add_term(m2, c / Rat::from_integer(new_exp.into()));
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rat(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.chart.dim(), "point arity mismatch");
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    term *= &point[v];
                }
            }
            acc += term;
        }
        acc
    }

    /// Floating evaluation; exactness ends here.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.chart.dim(), "point arity mismatch");
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut term = rat_to_f64(c);
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    term *= point[v].powi(e as i32);
                }
            }
            acc += term;
        }
        acc
    }

    /// Substitute each chart coordinate by the corresponding polynomial on
    /// `target` (exact composition).
    pub fn substitute(&self, target: &Chart, images: &[PolyExpr]) -> Result<PolyExpr, CalcError> {
        if images.len() != self.chart.dim() {
            return Err(CalcError::DimensionMismatch(format!(
                "substitution needs {} images, got {}",
                self.chart.dim(),
                images.len()
            )));
        }
        for img in images {
            same_chart(target, img.chart())?;
        }
        let mut acc = PolyExpr::zero(target);
        for (m, c) in &self.terms {
            let mut term = PolyExpr::constant(target, c.clone());
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    term = &term * &images[v].pow(e);
                }
            }
            acc = &acc + &term;
        }
        acc.check_cap()?;
        Ok(acc)
    }

    /// Reinterpret this polynomial on a product chart, placing the variables
    /// at `offset` (block injection; exponents shift by `offset`).
    pub fn inject(&self, product: &Chart, offset: usize) -> PolyExpr {
        assert!(offset + self.chart.dim() <= product.dim());
        let mut out = PolyExpr::zero(product);
        for (m, c) in &self.terms {
            let mut m2 = vec![0u32; product.dim()];
            m2[offset..offset + m.len()].copy_from_slice(m);
            out.terms.insert(m2, c.clone());
        }
        out
    }

    /// Compile to a flat term list for fast repeated `f64` evaluation.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let factors: Vec<(usize, i32)> = m
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(v, &e)| (v, e as i32))
                        .collect();
                    (rat_to_f64(c), factors)
                })
                .collect(),
        }
    }

    /// Terms in graded-lexicographic order (highest degree first), the
    /// canonical order used for printing.
    fn sorted_terms(&self) -> Vec<(&Monomial, &Rat)> {
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|(ma, _), (mb, _)| {
            let da: u32 = ma.iter().sum();
            let db: u32 = mb.iter().sum();
            db.cmp(&da).then_with(|| mb.cmp(ma))
        });
        ts
    }
}

/// Flat `f64` form of a polynomial for inner loops (ODE right-hand sides).
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(v, e) in factors {
                t *= point[v].powi(e);
            }
            acc += t;
        }
        acc
    }
}

impl Add for &PolyExpr {
    type Output = PolyExpr;
    fn add(self, rhs: &PolyExpr) -> PolyExpr {
        same_chart(&self.chart, &rhs.chart).expect("polynomial addition across charts");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &PolyExpr {
    type Output = PolyExpr;
    fn sub(self, rhs: &PolyExpr) -> PolyExpr {
        self + &(-rhs)
    }
}

impl Neg for &PolyExpr {
    type Output = PolyExpr;
    fn neg(self) -> PolyExpr {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        PolyExpr { chart: self.chart.clone(), terms }
    }
}

impl Mul for &PolyExpr {
    type Output = PolyExpr;
    fn mul(self, rhs: &PolyExpr) -> PolyExpr {
        same_chart(&self.chart, &rhs.chart).expect("polynomial product across charts");
        let mut out = PolyExpr::zero(&self.chart);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for PolyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.chart.names();
        for (k, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let is_const = m.iter().all(|&e| e == 0);
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut wrote_factor = false;
            if !mag.is_one() || is_const {
                write!(f, "{}", mag)?;
                wrote_factor = true;
            }
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote_factor {
                    write!(f, "*")?;
                }
                write!(f, "{}", names[v])?;
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
                wrote_factor = true;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use crate::rat::{rat, rat_int};

    fn xy() -> Chart {
        ChartDomain::unit_box(&["x", "y"])
    }

    #[test]
    fn arithmetic_and_normalization() {
        let c = xy();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        let p = &(&x * &x) + &y; // x^2 + y
        assert_eq!(p.num_terms(), 2);
        let q = &p - &p;
        assert!(q.is_zero());
        assert_eq!((&x + &(-&x)).num_terms(), 0);
    }

    #[test]
    fn evaluation_is_exact() {
        let c = xy();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        let p = &(&x * &x) + &y;
        assert_eq!(p.eval_rat(&[rat_int(2), rat_int(3)]), rat_int(7));
        assert_eq!(p.eval_f64(&[2.0, 3.0]), 7.0);
        assert_eq!(PolyExpr::zero(&c).eval_rat(&[rat_int(5), rat_int(5)]), rat_int(0));
    }

    #[test]
    fn derivative_and_antiderivative_invert() {
        let c = xy();
        let x = PolyExpr::coordinate(&c, 0);
        let p = &x.pow(3) + &x; // x^3 + x
        let back = p.partial(0).antiderivative(0);
        assert_eq!(back, p);
    }

    #[test]
    fn substitution_composes() {
        let c = xy();
        let z_chart = ChartDomain::unit_box(&["t"]);
        let t = PolyExpr::coordinate(&z_chart, 0);
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        let p = &x + &(&y * &y); // x + y^2
        let img = p.substitute(&z_chart, &[t.clone(), t.pow(2)]).unwrap();
        // t + t^4
        assert_eq!(img, &t + &t.pow(4));
    }

    #[test]
    fn display_is_graded_lex() {
        let c = xy();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        let p = &(&PolyExpr::constant(&c, rat(1, 2)) * &x.pow(2)) + &(&y - &PolyExpr::one(&c));
        assert_eq!(p.to_string(), "1/2*x^2 + y - 1");
    }

    #[test]
    fn degree_cap_detects_blowup() {
        let c = ChartDomain::unit_box(&["x"]).with_degree_cap(4);
        let x = PolyExpr::coordinate(&c, 0);
        assert!(x.pow(5).check_cap().is_err());
        assert!(x.pow(4).check_cap().is_ok());
    }

    #[test]
    fn compiled_matches_direct() {
        let c = xy();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        let p = &(&x.pow(3) * &y) - &PolyExpr::constant(&c, rat(7, 3));
        let cp = p.compile();
        let pt = [0.3, -1.7];
        assert!((cp.eval(&pt) - p.eval_f64(&pt)).abs() < 1e-15);
    }
}
