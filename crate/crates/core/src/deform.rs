//! First-order deformations of a momentum map: the two vector-valued
//! residuals that characterize them, the associated beta forms, and
//! verification of Hamiltonian-generated deformations.

use num_traits::{One, Zero};

use crate::calculus::exterior_d;
use crate::chart::same_chart;
use crate::error::CalcError;
use crate::fields::{pairs, FormField, VectorField};
use crate::imm::AlphaMap;
use crate::linalg::solve_exact;
use crate::poisson::hamiltonian_field;
use crate::poly::PolyExpr;
use crate::rat::Rat;

/// A candidate deformation direction `H: M -> dual algebra`, with the alpha
/// map providing the Poisson structure, the cobracket and the action fields.
#[derive(Debug, Clone)]
pub struct DeformationCandidate {
    h: Vec<PolyExpr>,
    context: AlphaMap,
}

impl DeformationCandidate {
    pub fn new(h: Vec<PolyExpr>, context: AlphaMap) -> Result<Self, CalcError> {
        if h.len() != context.bialgebra().dim() {
            return Err(CalcError::DimensionMismatch(format!(
                "H needs {} components, got {}",
                context.bialgebra().dim(),
                h.len()
            )));
        }
        for hi in &h {
            same_chart(context.manifold().chart(), hi.chart())?;
        }
        Ok(DeformationCandidate { h, context })
    }

    pub fn h(&self) -> &[PolyExpr] {
        &self.h
    }

    pub fn context(&self) -> &AlphaMap {
        &self.context
    }

    /// Pointwise coadjoint coefficients: `(ad*_H e_i)_j = sum_a H_a
    /// d[i][a][j]` as polynomials on the manifold.
    fn coadjoint_coeffs(&self, i: usize) -> Vec<PolyExpr> {
        let b = self.context.bialgebra();
        let n = b.dim();
        let chart = self.context.manifold().chart();
        (0..n)
            .map(|j| {
                let mut acc = PolyExpr::zero(chart);
                for a in 0..n {
                    let coeff = b.d(i, a, j);
                    if !coeff.is_zero() && !self.h[a].is_zero() {
                        acc = &acc + &self.h[a].scale(coeff);
                    }
                }
                acc
            })
            .collect()
    }
}

/// The two exact residual families of the deformation equations.
#[derive(Debug, Clone)]
pub struct DeformationResidual {
    /// Per pair: `X_i H_j - X_j H_i - H([e_i, e_j])`.
    pub r1: Vec<((usize, usize), PolyExpr)>,
    /// Per basis element: the vector field `{H_i, .} + X_{ad*_H e_i}`.
    pub r2: Vec<VectorField>,
}

impl DeformationResidual {
    pub fn is_zero(&self) -> bool {
        self.r1.iter().all(|(_, p)| p.is_zero()) && self.r2.iter().all(|v| v.is_zero())
    }

    pub fn max_abs(&self) -> Rat {
        let a = self
            .r1
            .iter()
            .map(|(_, p)| p.max_abs_coeff())
            .max()
            .unwrap_or_else(Rat::zero);
        let b = self
            .r2
            .iter()
            .map(|v| v.max_abs_coeff())
            .max()
            .unwrap_or_else(Rat::zero);
        a.max(b)
    }
}

/// Evaluate both deformation identities exactly.
pub fn deformation_residual(d: &DeformationCandidate) -> Result<DeformationResidual, CalcError> {
    let ctx = d.context();
    let b = ctx.bialgebra();
    let n = b.dim();
    let fields = ctx.induced_fields()?.fields;

    let mut r1 = Vec::new();
    for (i, j) in pairs(n) {
        let mut resid = &fields[i].apply(&d.h[j]) - &fields[j].apply(&d.h[i]);
        for k in 0..n {
            let coeff = b.algebra().c(i, j, k);
            if !coeff.is_zero() {
                resid = &resid - &d.h[k].scale(coeff);
            }
        }
        r1.push(((i, j), resid));
    }

    let mut r2 = Vec::new();
    for i in 0..n {
        let mut resid = hamiltonian_field(&d.h[i], ctx.manifold())?;
        let coeffs = d.coadjoint_coeffs(i);
        for (k, coeff) in coeffs.iter().enumerate() {
            if !coeff.is_zero() {
                resid = resid.add(&fields[k].scale_poly(coeff));
            }
        }
        r2.push(resid);
    }

    Ok(DeformationResidual { r1, r2 })
}

/// The forms `beta_i = alpha_{ad*_H e_i} + dH_i`; `sharp(pi, beta_i)`
/// coincides with the `r2` residual, which the caller can cross-check.
pub fn beta_forms(d: &DeformationCandidate) -> Result<Vec<FormField>, CalcError> {
    let ctx = d.context();
    let n = ctx.bialgebra().dim();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut beta = exterior_d(&FormField::scalar(d.h[i].clone()));
        let coeffs = d.coadjoint_coeffs(i);
        for (k, coeff) in coeffs.iter().enumerate() {
            if !coeff.is_zero() {
                beta = beta.add(&ctx.form(k).scale_poly(coeff));
            }
        }
        beta.check_cap()?;
        out.push(beta);
    }
    Ok(out)
}

/// A Hamiltonian-generated deformation together with its commutation
/// diagnostic.
#[derive(Debug, Clone)]
pub struct HamiltonianDeformation {
    pub candidate: DeformationCandidate,
    /// Per basis element: `X_i({Phi, f}) - {Phi, X_i f}` on the probe `f`;
    /// all zero iff the Hamiltonian flow of `Phi` commutes with the action
    /// as seen by the probe.
    pub commutation_residuals: Vec<PolyExpr>,
}

/// Build `H_i = X_i(Phi)` from a potential and report the commutation
/// residual on a probe function.
pub fn hamiltonian_deformation(
    phi: &PolyExpr,
    ctx: &AlphaMap,
    probe: &PolyExpr,
) -> Result<HamiltonianDeformation, CalcError> {
    same_chart(ctx.manifold().chart(), phi.chart())?;
    same_chart(ctx.manifold().chart(), probe.chart())?;
    let fields = ctx.induced_fields()?.fields;
    let h: Vec<PolyExpr> = fields.iter().map(|x| x.apply(phi)).collect();
    let candidate = DeformationCandidate::new(h, ctx.clone())?;

    let mut commutation_residuals = Vec::new();
    for x in &fields {
        let lhs = x.apply(&crate::poisson::fn_bracket(phi, probe, ctx.manifold())?);
        let rhs = crate::poisson::fn_bracket(phi, &x.apply(probe), ctx.manifold())?;
        commutation_residuals.push(&lhs - &rhs);
    }
    Ok(HamiltonianDeformation { candidate, commutation_residuals })
}

/// Best-effort search for a potential generating a given `H`: least-squares
/// fit of a bounded-degree polynomial ansatz, solved exactly through the
/// normal equations. Heuristic: a vanishing residual proves `H` Hamiltonian
/// at this degree, a nonzero one proves nothing beyond the ansatz.
pub fn fit_hamiltonian_potential(
    d: &DeformationCandidate,
    max_degree: u32,
) -> Result<(PolyExpr, Vec<PolyExpr>), CalcError> {
    let ctx = d.context();
    let chart = ctx.manifold().chart().clone();
    let m = chart.dim();
    let fields = ctx.induced_fields()?.fields;

    // monomial basis of degree 1..=max_degree (constants act trivially)
    let mut monos: Vec<Vec<u32>> = Vec::new();
    fn gen(m: usize, cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if pos == m {
            if cur.iter().any(|&e| e > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            gen(m, cur, pos + 1, left - e, out);
        }
        cur[pos] = 0;
    }
    let mut cur = vec![0u32; m];
    gen(m, &mut cur, 0, max_degree, &mut monos);
    monos.sort();

    // columns: X_i(mono) stacked over i; rows indexed by (i, output monomial)
    use std::collections::BTreeMap;
    let columns: Vec<Vec<PolyExpr>> = monos
        .iter()
        .map(|mono| {
            let basis = PolyExpr::from_terms(&chart, [(mono.clone(), Rat::one())]);
            fields.iter().map(|x| x.apply(&basis)).collect()
        })
        .collect();
    let mut row_index: BTreeMap<(usize, Vec<u32>), usize> = BTreeMap::new();
    let mut note_rows = |polys: &[PolyExpr]| {
        for (slot, p) in polys.iter().enumerate() {
            for (mono, _) in p.terms() {
                let next = row_index.len();
                row_index.entry((slot, mono.clone())).or_insert(next);
            }
        }
    };
    for col in &columns {
        note_rows(col);
    }
    note_rows(d.h());

    let n_rows = row_index.len();
    let mut a = vec![vec![Rat::zero(); monos.len()]; n_rows];
    let mut b = vec![Rat::zero(); n_rows];
    for (cidx, col) in columns.iter().enumerate() {
        for (slot, p) in col.iter().enumerate() {
            for (mono, coeff) in p.terms() {
                a[row_index[&(slot, mono.clone())]][cidx] = coeff.clone();
            }
        }
    }
    for (slot, p) in d.h().iter().enumerate() {
        for (mono, coeff) in p.terms() {
            b[row_index[&(slot, mono.clone())]] = coeff.clone();
        }
    }

    // normal equations A^T A x = A^T b
    let cols = monos.len();
    let mut ata = vec![vec![Rat::zero(); cols]; cols];
    let mut atb = vec![Rat::zero(); cols];
    for r in 0..n_rows {
        for i in 0..cols {
            if a[r][i].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !a[r][j].is_zero() {
                    ata[i][j] += &a[r][i] * &a[r][j];
                }
            }
            atb[i] += &a[r][i] * &b[r];
        }
    }
    let sol = solve_exact(&ata, &atb, cols).expect("normal equations are always consistent");
    let phi = PolyExpr::from_terms(
        &chart,
        monos
            .iter()
            .zip(&sol.particular)
            .map(|(mono, coeff)| (mono.clone(), coeff.clone())),
    );
    let residuals: Vec<PolyExpr> = fields
        .iter()
        .zip(d.h())
        .map(|(x, hi)| &x.apply(&phi) - hi)
        .collect();
    Ok((phi, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::{LieAlgebraData, LieBialgebraData};
    use crate::calculus::sharp;
    use crate::chart::ChartDomain;
    use crate::fields::BivectorField;
    use crate::parse::parse_poly;
    use crate::poisson::PoissonManifold;
    use crate::rat::rat_int;

    fn rotation_alpha() -> AlphaMap {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let mut pi = BivectorField::zero(&c);
        pi.set(0, 1, PolyExpr::one(&c));
        let pm = PoissonManifold::new(pi).unwrap();
        let b = LieBialgebraData::trivial(LieAlgebraData::abelian(vec!["xi".into()]));
        let alpha = FormField::one_form(
            &c,
            vec![PolyExpr::coordinate(&c, 0), PolyExpr::coordinate(&c, 1)],
        );
        AlphaMap::new(pm, b, vec![alpha]).unwrap()
    }

    fn translation_alpha() -> AlphaMap {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let mut pi = BivectorField::zero(&c);
        pi.set(0, 1, PolyExpr::one(&c));
        let pm = PoissonManifold::new(pi).unwrap();
        let b = LieBialgebraData::trivial(LieAlgebraData::abelian(vec![
            "xi1".into(),
            "xi2".into(),
        ]));
        let p = |s: &str| parse_poly(s, &c).unwrap();
        let forms = vec![
            FormField::one_form(&c, vec![p("0"), p("-1")]),
            FormField::one_form(&c, vec![p("1"), p("0")]),
        ];
        AlphaMap::new(pm, b, forms).unwrap()
    }

    #[test]
    fn constant_h_with_zero_cobracket_is_a_deformation() {
        let ctx = translation_alpha();
        let c = ctx.manifold().chart().clone();
        let h = vec![
            PolyExpr::constant(&c, rat_int(3)),
            PolyExpr::constant(&c, rat_int(-7)),
        ];
        let d = DeformationCandidate::new(h, ctx).unwrap();
        let r = deformation_residual(&d).unwrap();
        assert!(r.is_zero());
        let betas = beta_forms(&d).unwrap();
        assert!(betas.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn rotation_invariant_potential_gives_the_trivial_deformation() {
        let ctx = rotation_alpha();
        let c = ctx.manifold().chart().clone();
        let phi = parse_poly("1/2*x^2 + 1/2*y^2", &c).unwrap();
        let probe = parse_poly("x + x*y", &c).unwrap();
        let hd = hamiltonian_deformation(&phi, &ctx, &probe).unwrap();
        assert!(hd.candidate.h().iter().all(|p| p.is_zero()));
        assert!(hd.commutation_residuals.iter().all(|p| p.is_zero()));
        assert!(deformation_residual(&hd.candidate).unwrap().is_zero());
    }

    #[test]
    fn translation_potential_x_yields_constant_h() {
        let ctx = translation_alpha();
        let c = ctx.manifold().chart().clone();
        let phi = parse_poly("x", &c).unwrap();
        let probe = parse_poly("x^2*y", &c).unwrap();
        let hd = hamiltonian_deformation(&phi, &ctx, &probe).unwrap();
        assert_eq!(hd.candidate.h(), &[PolyExpr::one(&c), PolyExpr::zero(&c)]);
        assert!(hd.commutation_residuals.iter().all(|p| p.is_zero()));
        assert!(deformation_residual(&hd.candidate).unwrap().is_zero());
    }

    #[test]
    fn non_hamiltonian_h_fails_with_exact_residual() {
        let ctx = rotation_alpha();
        let c = ctx.manifold().chart().clone();
        let h = vec![parse_poly("x", &c).unwrap()];
        let d = DeformationCandidate::new(h, ctx).unwrap();
        let r = deformation_residual(&d).unwrap();
        assert!(!r.is_zero());
        // {x, .} is the field d/dy
        assert_eq!(r.r2[0], VectorField::basis(&c, 1));
    }

    #[test]
    fn beta_sharp_cross_check_is_an_exact_identity() {
        let ctx = rotation_alpha();
        let c = ctx.manifold().chart().clone();
        for h0 in ["x", "x*y - y^2", "1 + x^3"] {
            let d =
                DeformationCandidate::new(vec![parse_poly(h0, &c).unwrap()], ctx.clone())
                    .unwrap();
            let r = deformation_residual(&d).unwrap();
            let betas = beta_forms(&d).unwrap();
            for (beta, r2) in betas.iter().zip(&r.r2) {
                let lifted = sharp(ctx.manifold().pi(), beta).unwrap();
                assert_eq!(&lifted, r2);
            }
        }
    }

    #[test]
    fn residual_is_linear_in_h() {
        let ctx = translation_alpha();
        let c = ctx.manifold().chart().clone();
        let p = |s: &str| parse_poly(s, &c).unwrap();
        let h1 = vec![p("x^2"), p("y")];
        let h2 = vec![p("x*y"), p("x - y^3")];
        let sum: Vec<PolyExpr> = h1.iter().zip(&h2).map(|(a, b)| a + b).collect();
        let r1 = deformation_residual(&DeformationCandidate::new(h1, ctx.clone()).unwrap())
            .unwrap();
        let r2 = deformation_residual(&DeformationCandidate::new(h2, ctx.clone()).unwrap())
            .unwrap();
        let rs = deformation_residual(&DeformationCandidate::new(sum, ctx).unwrap()).unwrap();
        for k in 0..rs.r1.len() {
            assert_eq!(rs.r1[k].1, &r1.r1[k].1 + &r2.r1[k].1);
        }
        for k in 0..rs.r2.len() {
            assert_eq!(rs.r2[k], r1.r2[k].add(&r2.r2[k]));
        }
    }

    #[test]
    fn potential_fit_recovers_a_hamiltonian_h() {
        let ctx = translation_alpha();
        let c = ctx.manifold().chart().clone();
        let phi = parse_poly("x^2 - 3*y", &c).unwrap();
        let probe = parse_poly("y", &c).unwrap();
        let hd = hamiltonian_deformation(&phi, &ctx, &probe).unwrap();
        let (fitted, residuals) = fit_hamiltonian_potential(&hd.candidate, 2).unwrap();
        assert!(residuals.iter().all(|p| p.is_zero()));
        // the fit recovers phi up to an additive constant; compare fields
        let xf = hamiltonian_field(&fitted, ctx.manifold()).unwrap();
        let xp = hamiltonian_field(&phi, ctx.manifold()).unwrap();
        assert_eq!(xf, xp);
    }
}
