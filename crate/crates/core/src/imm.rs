//! The infinitesimal momentum map: one 1-form per algebra basis element,
//! its two defining identities, the induced fields, gauge transformations,
//! and verification of a supplied group-valued map.

use num_traits::{One, Zero};

use crate::bialgebra::LieBialgebraData;
use crate::calculus::{contract2, exterior_d, pullback, sharp, wedge};
use crate::chart::same_chart;
use crate::error::CalcError;
use crate::fields::{pairs, FormField, VectorField};
use crate::group::GroupModel;
use crate::poisson::PoissonManifold;
use crate::poly::PolyExpr;
use crate::rat::Rat;
use crate::sample::{grid_points, ProbeRng};

/// A candidate infinitesimal momentum map on a Poisson manifold.
#[derive(Debug, Clone)]
pub struct AlphaMap {
    manifold: PoissonManifold,
    bialgebra: LieBialgebraData,
    forms: Vec<FormField>,
}

impl AlphaMap {
    pub fn new(
        manifold: PoissonManifold,
        bialgebra: LieBialgebraData,
        forms: Vec<FormField>,
    ) -> Result<Self, CalcError> {
        if forms.len() != bialgebra.dim() {
            return Err(CalcError::DimensionMismatch(format!(
                "{} forms supplied for a dimension-{} algebra",
                forms.len(),
                bialgebra.dim()
            )));
        }
        for f in &forms {
            same_chart(manifold.chart(), f.chart())?;
            if f.degree() != 1 {
                return Err(CalcError::DegreeError("alpha components must be 1-forms".into()));
            }
        }
        Ok(AlphaMap { manifold, bialgebra, forms })
    }

    pub fn manifold(&self) -> &PoissonManifold {
        &self.manifold
    }

    pub fn bialgebra(&self) -> &LieBialgebraData {
        &self.bialgebra
    }

    pub fn forms(&self) -> &[FormField] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &FormField {
        &self.forms[i]
    }

    /// Linear extension to an algebra coefficient vector.
    pub fn form_of(&self, xi: &[Rat]) -> FormField {
        let chart = self.manifold.chart();
        let mut acc = FormField::zero(chart, 1);
        for (i, coeff) in xi.iter().enumerate() {
            if !coeff.is_zero() {
                acc = acc.add(&self.forms[i].scale_rat(coeff));
            }
        }
        acc
    }

    /// Maurer-Cartan residuals
    /// `d alpha_k + sum_{i<j} d[k][i][j] alpha_i ^ alpha_j`.
    pub fn mc_residual(&self) -> Result<Vec<FormField>, CalcError> {
        let n = self.bialgebra.dim();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut resid = exterior_d(&self.forms[k]);
            for (i, j) in pairs(n) {
                let coeff = self.bialgebra.d(k, i, j);
                if coeff.is_zero() {
                    continue;
                }
                let w = wedge(&self.forms[i], &self.forms[j])?;
                resid = resid.add(&w.scale_rat(coeff));
            }
            out.push(resid);
        }
        Ok(out)
    }

    /// Bracket-morphism residuals
    /// `[alpha_i, alpha_j]_pi - alpha_{[e_i, e_j]}` per pair.
    pub fn bracket_morphism_residual(
        &self,
    ) -> Result<Vec<((usize, usize), FormField)>, CalcError> {
        let n = self.bialgebra.dim();
        let mut out = Vec::new();
        for (i, j) in pairs(n) {
            let br = crate::poisson::oneform_bracket(
                &self.forms[i],
                &self.forms[j],
                &self.manifold,
            )?;
            let mut expect = FormField::zero(self.manifold.chart(), 1);
            for k in 0..n {
                let coeff = self.bialgebra.algebra().c(i, j, k);
                if !coeff.is_zero() {
                    expect = expect.add(&self.forms[k].scale_rat(coeff));
                }
            }
            out.push(((i, j), br.sub(&expect)));
        }
        Ok(out)
    }

    /// Induced fields `X_i = sharp(pi, alpha_i)` with bracket-closure
    /// residuals for both signs.
    pub fn induced_fields(&self) -> Result<InducedFields, CalcError> {
        let n = self.bialgebra.dim();
        let fields: Vec<VectorField> = (0..n)
            .map(|i| sharp(self.manifold.pi(), &self.forms[i]))
            .collect::<Result<_, _>>()?;
        let mut hom = Vec::new();
        let mut antihom = Vec::new();
        for (i, j) in pairs(n) {
            let comm = fields[i].commutator(&fields[j]);
            let mut xb = VectorField::zero(self.manifold.chart());
            for k in 0..n {
                let coeff = self.bialgebra.algebra().c(i, j, k);
                if !coeff.is_zero() {
                    xb = xb.add(&fields[k].scale_rat(coeff));
                }
            }
            hom.push(((i, j), comm.sub(&xb)));
            antihom.push(((i, j), comm.add(&xb)));
        }
        Ok(InducedFields { fields, hom_residuals: hom, antihom_residuals: antihom })
    }

    /// Both axiom residual families at once; `None` entries are exact zeros.
    pub fn axioms_hold(&self) -> Result<bool, CalcError> {
        let mc = self.mc_residual()?;
        let bm = self.bracket_morphism_residual()?;
        Ok(mc.iter().all(|f| f.is_zero()) && bm.iter().all(|(_, f)| f.is_zero()))
    }
}

/// Fields induced by an alpha map, with closure diagnostics.
#[derive(Debug, Clone)]
pub struct InducedFields {
    pub fields: Vec<VectorField>,
    pub hom_residuals: Vec<((usize, usize), VectorField)>,
    pub antihom_residuals: Vec<((usize, usize), VectorField)>,
}

impl InducedFields {
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

/// Outcome of a gauge transformation.
#[derive(Debug, Clone)]
pub struct GaugeResult {
    pub alpha: AlphaMap,
    /// Highest series order that contributed a nonzero term.
    pub order_used: u32,
    /// True when the series terminated on its own (nilpotent case); false
    /// means the truncation cut a nonzero tail and the result is approximate.
    pub exact: bool,
}

/// Gauge-transform an alpha map by `H: M -> dual algebra` (components along
/// the dual basis). The series applied is
///
/// ```text
/// alpha' = exp(-ad_H)(alpha) + sum_{p>=0} (-ad_H)^p (dH) / (p+1)!
/// ```
///
/// With the Maurer-Cartan sign convention used throughout this crate this is
/// the transformation that maps solutions to solutions; for an abelian dual
/// it reduces to `alpha' = alpha + dH`.
pub fn gauge_transform(
    alpha: &AlphaMap,
    h: &[PolyExpr],
    truncation: u32,
) -> Result<GaugeResult, CalcError> {
    let n = alpha.bialgebra().dim();
    if h.len() != n {
        return Err(CalcError::DimensionMismatch(format!(
            "H needs {n} components, got {}",
            h.len()
        )));
    }
    let chart = alpha.manifold().chart().clone();
    for hi in h {
        same_chart(&chart, hi.chart())?;
    }
    let b = alpha.bialgebra();

    // (-ad_H w)_i = -sum_{j,k} H_j w_k c*[j][k][i], with c*[j][k][i] = d[i][j][k]
    let neg_ad_h = |w: &[FormField]| -> Result<Vec<FormField>, CalcError> {
        let mut out: Vec<FormField> = (0..n).map(|_| FormField::zero(&chart, 1)).collect();
        for i in 0..n {
            for j in 0..n {
                if h[j].is_zero() {
                    continue;
                }
                for k in 0..n {
                    let coeff = b.d(i, j, k);
                    if coeff.is_zero() || w[k].is_zero() {
                        continue;
                    }
                    let term = w[k].scale_poly(&h[j]).scale_rat(&-coeff.clone());
                    out[i] = out[i].add(&term);
                }
            }
        }
        for f in &out {
            f.check_cap()?;
        }
        Ok(out)
    };

    let alpha_vec: Vec<FormField> = alpha.forms().to_vec();
    let dh: Vec<FormField> = h
        .iter()
        .map(|hi| exterior_d(&FormField::scalar(hi.clone())))
        .collect();

    let mut result: Vec<FormField> = (0..n).map(|_| FormField::zero(&chart, 1)).collect();
    let mut term_alpha = alpha_vec;
    let mut term_dh = dh;
    let mut factorial = Rat::one();
    let mut order_used = 0u32;
    let mut exact = false;
    for p in 0..=truncation {
        if p > 0 {
            factorial *= Rat::from_integer(p.into());
        }
        let inv_fact = Rat::one() / factorial.clone();
        let inv_fact_int = Rat::one() / (factorial.clone() * Rat::from_integer((p + 1).into()));
        let mut contributed = false;
        for i in 0..n {
            let a_term = term_alpha[i].scale_rat(&inv_fact);
            let d_term = term_dh[i].scale_rat(&inv_fact_int);
            if !a_term.is_zero() || !d_term.is_zero() {
                contributed = true;
            }
            result[i] = result[i].add(&a_term).add(&d_term);
        }
        if contributed {
            order_used = p;
        }
        if term_alpha.iter().all(|f| f.is_zero()) && term_dh.iter().all(|f| f.is_zero()) {
            exact = true;
            break;
        }
        if p < truncation {
            term_alpha = neg_ad_h(&term_alpha)?;
            term_dh = neg_ad_h(&term_dh)?;
        } else {
            // tail check: did the series actually terminate?
            let next_a = neg_ad_h(&term_alpha)?;
            let next_d = neg_ad_h(&term_dh)?;
            exact = next_a.iter().all(|f| f.is_zero()) && next_d.iter().all(|f| f.is_zero());
        }
    }

    let alpha_out = AlphaMap::new(alpha.manifold().clone(), alpha.bialgebra().clone(), result)?;
    Ok(GaugeResult { alpha: alpha_out, order_used, exact })
}

/// Default gauge truncation: one less than the nilpotency class when the
/// dual algebra is nilpotent (the series is then exact), otherwise 8.
pub fn default_gauge_truncation(b: &LieBialgebraData) -> (u32, bool) {
    match b.dual_algebra().ok().and_then(|d| d.nilpotency_class()) {
        Some(class) => (class.saturating_sub(1), true),
        None => (8, false),
    }
}

/// A polynomial map into a dual group, verified against momentum-map data.
#[derive(Debug, Clone)]
pub struct MomentumCandidate {
    group: GroupModel,
    components: Vec<PolyExpr>,
}

impl MomentumCandidate {
    pub fn new(group: GroupModel, components: Vec<PolyExpr>) -> Result<Self, CalcError> {
        if components.len() != group.dim() {
            return Err(CalcError::DimensionMismatch(format!(
                "map into a {}-dimensional group needs that many components, got {}",
                group.dim(),
                components.len()
            )));
        }
        let chart = components[0].chart().clone();
        for p in &components {
            same_chart(&chart, p.chart())?;
        }
        Ok(MomentumCandidate { group, components })
    }

    pub fn group(&self) -> &GroupModel {
        &self.group
    }

    pub fn components(&self) -> &[PolyExpr] {
        &self.components
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval_f64(point)).collect()
    }
}

/// Verification report for a momentum candidate.
#[derive(Debug, Clone)]
pub struct MomentumVerifyReport {
    /// The exact pullback of the coframe along the candidate.
    pub pulled_alpha: Vec<FormField>,
    /// `X_i - sharp(pi, mu* theta_i)` per basis element.
    pub field_residuals: Vec<VectorField>,
    /// `pi(a_i, a_j) - pi_dual(theta_i, theta_j) o mu` per pair.
    pub poisson_map_residuals: Vec<((usize, usize), PolyExpr)>,
    /// Mismatch against a declared alpha, when one was supplied.
    pub alpha_match_residuals: Option<Vec<FormField>>,
    /// Sampled fraction of the grid whose image leaves the group box.
    pub image_outside_fraction: f64,
}

impl MomentumVerifyReport {
    pub fn is_momentum_map(&self) -> bool {
        self.field_residuals.iter().all(|v| v.is_zero())
            && self.poisson_map_residuals.iter().all(|(_, p)| p.is_zero())
    }
}

/// Pull the coframe back along `mu` and compare with the action data.
pub fn momentum_verify(
    mu: &MomentumCandidate,
    manifold: &PoissonManifold,
    fields: &[VectorField],
    alpha_expected: Option<&AlphaMap>,
    rng: &mut ProbeRng,
) -> Result<MomentumVerifyReport, CalcError> {
    let g = mu.group();
    let n = g.dim();
    let chart = manifold.chart().clone();
    for p in mu.components() {
        same_chart(&chart, p.chart())?;
    }
    if fields.len() != g.bialgebra().dim() {
        return Err(CalcError::DimensionMismatch(format!(
            "{} action fields for a dimension-{} algebra",
            fields.len(),
            g.bialgebra().dim()
        )));
    }

    let pulled_alpha: Vec<FormField> = (0..n)
        .map(|i| pullback(&g.theta(i), &chart, mu.components()))
        .collect::<Result<_, _>>()?;

    let field_residuals: Vec<VectorField> = (0..n)
        .map(|i| -> Result<VectorField, CalcError> {
            let induced = sharp(manifold.pi(), &pulled_alpha[i])?;
            Ok(fields[i].sub(&induced))
        })
        .collect::<Result<_, _>>()?;

    let mut poisson_map_residuals = Vec::new();
    for (i, j) in pairs(n) {
        let lhs = contract2(manifold.pi(), &pulled_alpha[i], &pulled_alpha[j])?;
        let group_side = contract2(g.pi_dual(), &g.theta(i), &g.theta(j))?;
        let rhs = group_side.substitute(&chart, mu.components())?;
        poisson_map_residuals.push(((i, j), &lhs - &rhs));
    }

    let alpha_match_residuals = alpha_expected
        .map(|a| -> Result<Vec<FormField>, CalcError> {
            same_chart(a.manifold().chart(), &chart)?;
            Ok((0..n).map(|i| pulled_alpha[i].sub(a.form(i))).collect())
        })
        .transpose()?;

    // sample the image against the group box
    let _ = rng;
    let pts = grid_points(&chart, 5);
    let outside = pts
        .iter()
        .filter(|pt| !g.chart().contains_f64(&mu.eval_f64(pt)))
        .count();
    let image_outside_fraction = outside as f64 / pts.len() as f64;

    Ok(MomentumVerifyReport {
        pulled_alpha,
        field_residuals,
        poisson_map_residuals,
        alpha_match_residuals,
        image_outside_fraction,
    })
}
