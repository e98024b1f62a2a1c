//! Poisson manifolds on a chart: the Jacobi (Schouten) check, brackets of
//! functions and of 1-forms, Hamiltonian fields, and the infinitesimal
//! Poisson-action residual.
//!
//! Sign conventions are pinned by one canonical identity: for
//! `pi = ∂x ^ ∂y` on the plane, `{x, y} = 1` and the Hamiltonian field of
//! `x` is `+∂y`. Everything else (`sharp`, the 1-form bracket, action
//! residuals) is derived from the same `contract2`/`sharp` pair.

use num_traits::Zero;

use crate::bialgebra::LieBialgebraData;
use crate::calculus::{contract2, exterior_d, lie_derivative_bivector, lie_derivative_form, sharp};
use crate::chart::{same_chart, Chart};
use crate::error::CalcError;
use crate::fields::{pairs, BivectorField, FormField, VectorField};
use crate::poly::PolyExpr;
use crate::rat::Rat;

/// A chart with a validated Poisson bivector.
#[derive(Debug, Clone)]
pub struct PoissonManifold {
    chart: Chart,
    pi: BivectorField,
}

impl PoissonManifold {
    /// Build and verify `[pi, pi] = 0` exactly; the residual polynomials are
    /// returned in the error on failure.
    pub fn new(pi: BivectorField) -> Result<Self, CalcError> {
        let resid = schouten_residual(&pi);
        if let Some(bad) = resid.iter().find(|(_, p)| !p.is_zero()) {
            return Err(CalcError::DegreeError(format!(
                "bivector fails the Jacobi identity: component ({},{},{}) = {}",
                bad.0 .0, bad.0 .1, bad.0 .2, bad.1
            )));
        }
        Ok(PoissonManifold { chart: pi.chart().clone(), pi })
    }

    /// Skip the construction-time check (diagnostic runs on broken data).
    pub fn new_unchecked(pi: BivectorField) -> Self {
        PoissonManifold { chart: pi.chart().clone(), pi }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn pi(&self) -> &BivectorField {
        &self.pi
    }
}

/// Components of the Jacobiator `J^{ijk} = sum_l pi^{il} d_l pi^{jk} +
/// pi^{jl} d_l pi^{ki} + pi^{kl} d_l pi^{ij}` over strictly increasing
/// triples; all zero iff the bivector is Poisson. `J^{ijk}` equals the
/// Jacobi defect `{x_i,{x_j,x_k}} + cyclic` of the coordinate functions.
pub fn schouten_residual(pi: &BivectorField) -> Vec<((usize, usize, usize), PolyExpr)> {
    let chart = pi.chart().clone();
    let m = chart.dim();
    let mut out = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let mut acc = PolyExpr::zero(&chart);
                for l in 0..m {
                    acc = &acc + &(&pi.comp(i, l) * &pi.comp(j, k).partial(l));
                    acc = &acc + &(&pi.comp(j, l) * &pi.comp(k, i).partial(l));
                    acc = &acc + &(&pi.comp(k, l) * &pi.comp(i, j).partial(l));
                }
                out.push(((i, j, k), acc));
            }
        }
    }
    out
}

/// `{f, g} = pi(df, dg)`.
pub fn fn_bracket(f: &PolyExpr, g: &PolyExpr, m: &PoissonManifold) -> Result<PolyExpr, CalcError> {
    same_chart(f.chart(), m.chart())?;
    same_chart(g.chart(), m.chart())?;
    let df = exterior_d(&FormField::scalar(f.clone()));
    let dg = exterior_d(&FormField::scalar(g.clone()));
    contract2(&m.pi, &df, &dg)
}

/// Hamiltonian vector field `X_f = sharp(pi, df)`, so `X_f(g) = {f, g}`.
pub fn hamiltonian_field(f: &PolyExpr, m: &PoissonManifold) -> Result<VectorField, CalcError> {
    same_chart(f.chart(), m.chart())?;
    let df = exterior_d(&FormField::scalar(f.clone()));
    sharp(&m.pi, &df)
}

/// Koszul bracket of 1-forms:
/// `[w1, w2]_pi = L_{pi# w1} w2 - L_{pi# w2} w1 - d(pi(w1, w2))`.
pub fn oneform_bracket(
    w1: &FormField,
    w2: &FormField,
    m: &PoissonManifold,
) -> Result<FormField, CalcError> {
    same_chart(w1.chart(), m.chart())?;
    same_chart(w2.chart(), m.chart())?;
    let x1 = sharp(&m.pi, w1)?;
    let x2 = sharp(&m.pi, w2)?;
    let a = lie_derivative_form(&x1, w2)?;
    let b = lie_derivative_form(&x2, w1)?;
    let c = exterior_d(&FormField::scalar(contract2(&m.pi, w1, w2)?));
    Ok(a.sub(&b).sub(&c))
}

/// Residual data for the infinitesimal Poisson-action condition.
#[derive(Debug, Clone)]
pub struct ActionResidual {
    /// Per basis element: `L_{X_k} pi - sum_{i<j} d[k][i][j] X_i ^ X_j`.
    pub bivector_residuals: Vec<BivectorField>,
    /// Per pair `(i, j)`, the residual `[X_i, X_j] - X_{[e_i, e_j]}`.
    pub hom_residuals: Vec<((usize, usize), VectorField)>,
    /// Per pair `(i, j)`, the residual `[X_i, X_j] + X_{[e_i, e_j]}`.
    pub antihom_residuals: Vec<((usize, usize), VectorField)>,
}

impl ActionResidual {
    pub fn action_is_poisson(&self) -> bool {
        self.bivector_residuals.iter().all(|b| b.is_zero())
    }

    /// `Some(+1)` / `Some(-1)` when the fields respect the bracket as a
    /// homomorphism / antihomomorphism, `None` when neither sign closes.
    pub fn closing_sign(&self) -> Option<i8> {
        if self.hom_residuals.iter().all(|(_, v)| v.is_zero()) {
            Some(1)
        } else if self.antihom_residuals.iter().all(|(_, v)| v.is_zero()) {
            Some(-1)
        } else {
            None
        }
    }
}

/// Evaluate the action condition `L_{X_xi} pi = (X ^ X)(delta(xi))` for the
/// given fields, together with the bracket-closure residuals for both signs.
pub fn poisson_action_residual(
    fields: &[VectorField],
    b: &LieBialgebraData,
    m: &PoissonManifold,
) -> Result<ActionResidual, CalcError> {
    let n = b.dim();
    if fields.len() != n {
        return Err(CalcError::DimensionMismatch(format!(
            "{} fields supplied for a dimension-{} algebra",
            fields.len(),
            n
        )));
    }
    for x in fields {
        same_chart(x.chart(), m.chart())?;
    }
    let mut bivector_residuals = Vec::with_capacity(n);
    for k in 0..n {
        let mut resid = lie_derivative_bivector(&fields[k], &m.pi)?;
        for (i, j) in pairs(n) {
            let coeff = b.d(k, i, j);
            if coeff.is_zero() {
                continue;
            }
            resid = resid.sub(&fields[i].wedge(&fields[j]).scale_rat(coeff));
        }
        bivector_residuals.push(resid);
    }

    let mut hom_residuals = Vec::new();
    let mut antihom_residuals = Vec::new();
    for (i, j) in pairs(n) {
        let comm = fields[i].commutator(&fields[j]);
        let mut x_bracket = VectorField::zero(m.chart());
        for k in 0..n {
            let coeff = b.algebra().c(i, j, k);
            if !coeff.is_zero() {
                x_bracket = x_bracket.add(&fields[k].scale_rat(coeff));
            }
        }
        hom_residuals.push(((i, j), comm.sub(&x_bracket)));
        antihom_residuals.push(((i, j), comm.add(&x_bracket)));
    }

    Ok(ActionResidual { bivector_residuals, hom_residuals, antihom_residuals })
}

/// Convenience: sup of the worst residual coefficient, for report rows.
pub fn max_abs_residual(residuals: &[BivectorField]) -> Rat {
    residuals
        .iter()
        .map(|b| b.max_abs_coeff())
        .max()
        .unwrap_or_else(Rat::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::LieAlgebraData;
    use crate::chart::ChartDomain;
    use crate::parse::parse_poly;
    use crate::rat::rat_int;

    fn plane() -> PoissonManifold {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let mut pi = BivectorField::zero(&c);
        pi.set(0, 1, PolyExpr::one(&c));
        PoissonManifold::new(pi).unwrap()
    }

    #[test]
    fn canonical_bracket_and_field() {
        let m = plane();
        let c = m.chart().clone();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        assert_eq!(fn_bracket(&x, &y, &m).unwrap(), PolyExpr::one(&c));
        assert!(fn_bracket(&x, &x, &m).unwrap().is_zero());
        // X_x = +dy direction with this convention
        let xf = hamiltonian_field(&x, &m).unwrap();
        assert_eq!(xf, VectorField::basis(&c, 1));
        // constant potentials generate nothing
        let zero = hamiltonian_field(&PolyExpr::constant(&c, rat_int(5)), &m).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn schouten_examples() {
        // top-degree bivector on the plane is always Poisson
        let m = plane();
        assert!(schouten_residual(m.pi()).iter().all(|(_, p)| p.is_zero()));
        // x d/dx ^ d/dy + d/dy ^ d/dz: the triple expansion turns out to vanish
        let c3 = ChartDomain::unit_box(&["x", "y", "z"]);
        let mut pi = BivectorField::zero(&c3);
        pi.set(0, 1, PolyExpr::coordinate(&c3, 0));
        pi.set(1, 2, PolyExpr::one(&c3));
        let resid = schouten_residual(&pi);
        assert!(resid.iter().all(|(_, p)| p.is_zero()));
        // so(3) Lie-Poisson passes; a corrupted version fails
        let mut lp = BivectorField::zero(&c3);
        lp.set(0, 1, PolyExpr::coordinate(&c3, 2));
        lp.set(1, 2, PolyExpr::coordinate(&c3, 0));
        lp.set(0, 2, -&PolyExpr::coordinate(&c3, 1));
        assert!(schouten_residual(&lp).iter().all(|(_, p)| p.is_zero()));
        let mut bad = lp.clone();
        bad.set(0, 1, parse_poly("z + x^2", &c3).unwrap());
        assert!(schouten_residual(&bad).iter().any(|(_, p)| !p.is_zero()));
        assert!(PoissonManifold::new(bad).is_err());
    }

    #[test]
    fn schouten_matches_coordinate_bracket_oracle() {
        // independent oracle: {x_i, {x_j, x_k}} + cyclic computed via fn_bracket
        let c3 = ChartDomain::unit_box(&["x", "y", "z"]);
        let mut pi = BivectorField::zero(&c3);
        pi.set(0, 1, parse_poly("x", &c3).unwrap());
        pi.set(1, 2, parse_poly("1", &c3).unwrap());
        let m = PoissonManifold::new_unchecked(pi.clone());
        let coords: Vec<PolyExpr> = (0..3).map(|i| PolyExpr::coordinate(&c3, i)).collect();
        for ((i, j, k), resid) in schouten_residual(&pi) {
            let o1 = fn_bracket(&coords[i], &fn_bracket(&coords[j], &coords[k], &m).unwrap(), &m)
                .unwrap();
            let o2 = fn_bracket(&coords[j], &fn_bracket(&coords[k], &coords[i], &m).unwrap(), &m)
                .unwrap();
            let o3 = fn_bracket(&coords[k], &fn_bracket(&coords[i], &coords[j], &m).unwrap(), &m)
                .unwrap();
            let oracle = &(&o1 + &o2) + &o3;
            assert_eq!(resid, oracle);
        }
    }

    #[test]
    fn oneform_bracket_intertwines_with_d() {
        let m = plane();
        let c = m.chart().clone();
        let f = parse_poly("x^2*y", &c).unwrap();
        let g = parse_poly("y - x", &c).unwrap();
        let df = exterior_d(&FormField::scalar(f.clone()));
        let dg = exterior_d(&FormField::scalar(g.clone()));
        let lhs = oneform_bracket(&df, &dg, &m).unwrap();
        let rhs = exterior_d(&FormField::scalar(fn_bracket(&f, &g, &m).unwrap()));
        assert_eq!(lhs, rhs);
        // antisymmetry
        assert!(oneform_bracket(&df, &df, &m).unwrap().is_zero());
    }

    #[test]
    fn translations_are_a_poisson_action_for_zero_cobracket() {
        let m = plane();
        let c = m.chart().clone();
        let algebra = LieAlgebraData::abelian(vec!["xi1".into(), "xi2".into()]);
        let b = LieBialgebraData::trivial(algebra);
        let fields = vec![VectorField::basis(&c, 0), VectorField::basis(&c, 1)];
        let r = poisson_action_residual(&fields, &b, &m).unwrap();
        assert!(r.action_is_poisson());
        assert_eq!(r.closing_sign(), Some(1));
    }

    #[test]
    fn nonzero_cobracket_shows_up_in_the_residual() {
        let m = plane();
        let c = m.chart().clone();
        // pretend delta(xi2) = xi1 ^ xi2 while the action is by translations
        let algebra = LieAlgebraData::abelian(vec!["xi1".into(), "xi2".into()]);
        let b = LieBialgebraData::from_sparse(algebra, &[(1, 0, 1, rat_int(1))]).unwrap();
        let fields = vec![VectorField::basis(&c, 0), VectorField::basis(&c, 1)];
        let r = poisson_action_residual(&fields, &b, &m).unwrap();
        assert!(!r.action_is_poisson());
        assert!(!r.bivector_residuals[1].is_zero());
    }
}
