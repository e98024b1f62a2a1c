//! Reconstruction of a momentum map from its infinitesimal data: the
//! involutivity report for the graph distribution, path lifting, leaf
//! sampling over a grid, the obstruction function, and the closed-form
//! analyses available when the dual group is abelian or Heisenberg.

use num_traits::{One, Zero};

use crate::calculus::{contract2, exterior_d, wedge};
use crate::chart::Chart;
use crate::error::{CalcError, ReconstructError};
use crate::fields::{pairs, FormField};
use crate::group::GroupModel;
use crate::imm::AlphaMap;
use crate::linalg::solve_exact;
use crate::ode::LiftSystem;
use crate::poly::PolyExpr;
use crate::rat::{rat_to_f64, Rat};
use crate::sample::ProbeRng;
use rand::Rng;

/// Everything needed to lift one leaf over a sample grid.
#[derive(Debug, Clone)]
pub struct LeafSpec {
    pub alpha: AlphaMap,
    pub group: GroupModel,
    /// Base point on the manifold chart.
    pub base_m: Vec<Rat>,
    /// Prescribed image of the base point on the group chart.
    pub base_u: Vec<Rat>,
    /// Fixed integration step (path length units).
    pub step: f64,
    /// Samples per manifold axis.
    pub grid: Vec<usize>,
}

impl LeafSpec {
    pub fn validate(&self) -> Result<(), ReconstructError> {
        let mchart = self.alpha.manifold().chart();
        if self.base_m.len() != mchart.dim() || !mchart.contains_rat(&self.base_m) {
            return Err(ReconstructError::OutOfDomain(
                self.base_m.iter().map(rat_to_f64).collect(),
            ));
        }
        let gchart = self.group.chart();
        if self.base_u.len() != gchart.dim() || !gchart.contains_rat(&self.base_u) {
            return Err(ReconstructError::OutOfDomain(
                self.base_u.iter().map(rat_to_f64).collect(),
            ));
        }
        if !(self.step > 0.0) {
            return Err(ReconstructError::Calc(CalcError::DimensionMismatch(
                "step must be positive".into(),
            )));
        }
        if self.grid.len() != mchart.dim() || self.grid.iter().any(|&g| g < 2) {
            return Err(ReconstructError::Calc(CalcError::DimensionMismatch(
                "grid needs at least two samples per manifold axis".into(),
            )));
        }
        if self.alpha.bialgebra().dim() != self.group.dim() {
            return Err(ReconstructError::Calc(CalcError::DimensionMismatch(
                "alpha and group dimensions differ".into(),
            )));
        }
        Ok(())
    }

    fn base_m_f64(&self) -> Vec<f64> {
        self.base_m.iter().map(rat_to_f64).collect()
    }

    fn base_u_f64(&self) -> Vec<f64> {
        self.base_u.iter().map(rat_to_f64).collect()
    }

    fn lift_system(&self) -> LiftSystem {
        let n = self.group.dim();
        let mchart_dim = self.alpha.manifold().chart().dim();
        let alpha = (0..n)
            .map(|i| {
                (0..mchart_dim)
                    .map(|j| self.alpha.form(i).coeff(j).compile())
                    .collect()
            })
            .collect();
        let coframe = self
            .group
            .coframe_matrix()
            .iter()
            .map(|row| row.iter().map(|p| p.compile()).collect())
            .collect();
        LiftSystem { alpha, coframe }
    }
}

/// A sampled leaf of the reconstruction distribution.
#[derive(Debug, Clone)]
pub struct MomentumLeaf {
    pub spec: LeafSpec,
    /// Grid values per manifold axis.
    pub axes: Vec<Vec<f64>>,
    /// Rows `(m, mu(m))` in lexicographic grid order.
    pub samples: Vec<(Vec<f64>, Vec<f64>)>,
    /// Largest endpoint discrepancy between two different polylines, over a
    /// seeded subset of grid points.
    pub path_discrepancy: f64,
    /// Richardson estimate at the far grid corner.
    pub ode_error_estimate: f64,
}

/// Involutivity diagnostics for the graph distribution on `M x G*`.
#[derive(Debug, Clone)]
pub struct InvolutivityReport {
    pub alpha_mc: Vec<FormField>,
    pub group_mc: Vec<FormField>,
    /// Residual of the combined identity on the product chart; this must be
    /// the difference of the two Maurer-Cartan residuals, so it vanishes
    /// exactly when both do.
    pub combined: Vec<FormField>,
    pub involutive: bool,
}

/// Compute the involutivity report for a pair (alpha, group).
pub fn involutivity_report(
    alpha: &AlphaMap,
    group: &GroupModel,
) -> Result<InvolutivityReport, ReconstructError> {
    if alpha.bialgebra().dim() != group.dim() {
        return Err(ReconstructError::Calc(CalcError::DimensionMismatch(
            "alpha and group dimensions differ".into(),
        )));
    }
    let alpha_mc = alpha.mc_residual().map_err(ReconstructError::Calc)?;
    let group_mc = group.maurer_cartan_residual()?;

    let mchart = alpha.manifold().chart();
    let gchart = group.chart();
    let product = mchart.product(gchart).map_err(ReconstructError::Calc)?;
    let mdim = mchart.dim();
    let n = group.dim();
    let b = alpha.bialgebra();

    let inj_alpha: Vec<FormField> = (0..n)
        .map(|i| inject_one_form(alpha.form(i), &product, 0))
        .collect();
    let inj_theta: Vec<FormField> = (0..n)
        .map(|i| inject_one_form(&group.theta(i), &product, mdim))
        .collect();
    let omega: Vec<FormField> = (0..n)
        .map(|i| inj_alpha[i].sub(&inj_theta[i]))
        .collect();

    let mut combined = Vec::with_capacity(n);
    for k in 0..n {
        let mut resid = exterior_d(&omega[k]);
        for (i, j) in pairs(n) {
            let coeff = b.d(k, i, j);
            if coeff.is_zero() {
                continue;
            }
            let t1 = wedge(&omega[i], &inj_alpha[j]).map_err(ReconstructError::Calc)?;
            let t2 = wedge(&inj_theta[i], &omega[j]).map_err(ReconstructError::Calc)?;
            resid = resid.add(&t1.add(&t2).scale_rat(coeff));
        }
        combined.push(resid);
    }

    let involutive =
        alpha_mc.iter().all(|f| f.is_zero()) && group_mc.iter().all(|f| f.is_zero());
    Ok(InvolutivityReport { alpha_mc, group_mc, combined, involutive })
}

/// Reinterpret a 1-form on a factor chart as a 1-form on the product chart.
fn inject_one_form(form: &FormField, product: &Chart, offset: usize) -> FormField {
    let mut out = FormField::zero(product, 1);
    let dim = form.chart().dim();
    for j in 0..dim {
        let c = form.coeff(j);
        if !c.is_zero() {
            out.set(1 << (offset + j), c.inject(product, offset));
        }
    }
    out
}

fn require_involutive(alpha: &AlphaMap, group: &GroupModel) -> Result<(), ReconstructError> {
    let report = involutivity_report(alpha, group)?;
    if !report.involutive {
        let worst = report
            .alpha_mc
            .iter()
            .chain(report.group_mc.iter())
            .find(|f| !f.is_zero())
            .map(|f| f.to_string())
            .unwrap_or_default();
        return Err(ReconstructError::NotInvolutive(worst));
    }
    Ok(())
}

/// Lift the leaf along a polyline from the base point; returns the endpoint
/// and a step-halving error estimate.
pub fn leaf_lift(
    spec: &LeafSpec,
    path: &[Vec<f64>],
) -> Result<(Vec<f64>, f64), ReconstructError> {
    spec.validate()?;
    require_involutive(&spec.alpha, &spec.group)?;
    if path.is_empty() {
        return Ok((spec.base_u_f64(), 0.0));
    }
    let mchart = spec.alpha.manifold().chart();
    for p in path {
        if !mchart.contains_f64(p) {
            return Err(ReconstructError::OutOfDomain(p.clone()));
        }
    }
    let mut waypoints = vec![spec.base_m_f64()];
    waypoints.extend(path.iter().cloned());
    let sys = spec.lift_system();
    sys.integrate_polyline_with_estimate(&waypoints, &spec.base_u_f64(), spec.step)
}

/// Lift the leaf to every grid point along shared axis-aligned paths.
///
/// Paths form a tree: first along axis 0 from the base, then axis 1, and so
/// on, so every prefix is integrated once. The path-independence diagnostic
/// re-lifts a seeded sample of grid points along the reversed axis order and
/// records the worst endpoint discrepancy.
pub fn leaf_map(spec: &LeafSpec, rng: &mut ProbeRng) -> Result<MomentumLeaf, ReconstructError> {
    spec.validate()?;
    require_involutive(&spec.alpha, &spec.group)?;
    let mchart = spec.alpha.manifold().chart().clone();
    let m = mchart.dim();
    let bx = mchart.box_f64();
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let (lo, hi) = bx[k];
            let count = spec.grid[k];
            (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect()
        })
        .collect();

    let sys = spec.lift_system();
    let base_m = spec.base_m_f64();
    let base_u = spec.base_u_f64();

    // tree of prefixes: layer k fixes grid values on axes 0..=k
    let mut layer: Vec<(Vec<f64>, Vec<f64>)> = vec![(base_m.clone(), base_u.clone())];
    for axis in 0..m {
        let mut next = Vec::with_capacity(layer.len() * axes[axis].len());
        for (pt, u) in &layer {
            for &value in &axes[axis] {
                let mut target = pt.clone();
                target[axis] = value;
                let lifted = sys.integrate_segment(pt, &target, u, spec.step)?;
                next.push((target, lifted));
            }
        }
        layer = next;
    }
    let samples = layer;

    // path independence on a seeded subset, reversed axis order
    let mut path_discrepancy = 0.0f64;
    let checks = 10.min(samples.len());
    for _ in 0..checks {
        let pick = rng.gen_range(0..samples.len());
        let (target, expected) = &samples[pick];
        let mut waypoints = vec![base_m.clone()];
        let mut current = base_m.clone();
        for axis in (0..m).rev() {
            current[axis] = target[axis];
            waypoints.push(current.clone());
        }
        let end = sys.integrate_polyline(&waypoints, &base_u, spec.step)?;
        let diff = end
            .iter()
            .zip(expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        path_discrepancy = path_discrepancy.max(diff);
    }

    // Richardson estimate along the far corner path
    let mut corner_waypoints = vec![base_m.clone()];
    let mut current = base_m.clone();
    for axis in 0..m {
        current[axis] = *axes[axis].last().unwrap();
        corner_waypoints.push(current.clone());
    }
    let (_, ode_error_estimate) =
        sys.integrate_polyline_with_estimate(&corner_waypoints, &base_u, spec.step)?;

    Ok(MomentumLeaf {
        spec: spec.clone(),
        axes,
        samples,
        path_discrepancy,
        ode_error_estimate,
    })
}

/// Obstruction samples for one basis pair.
#[derive(Debug, Clone)]
pub struct ObstructionPair {
    pub pair: (usize, usize),
    /// Exact manifold-side polynomial `pi(alpha_i, alpha_j)`.
    pub manifold_poly: PolyExpr,
    /// Exact group-side polynomial `pi_dual(theta_i, theta_j)`.
    pub group_poly: PolyExpr,
    pub sup: f64,
}

/// Obstruction function along a computed leaf.
#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub pairs: Vec<ObstructionPair>,
    pub sup: f64,
    pub tolerance: f64,
    pub accepted: bool,
}

/// Evaluate `phi(e_i, e_j)(m) = pi(alpha_i, alpha_j)(m) -
/// pi_dual(theta_i, theta_j)(mu(m))` over the leaf samples.
pub fn obstruction_phi(
    leaf: &MomentumLeaf,
    tolerance: f64,
) -> Result<ObstructionReport, ReconstructError> {
    let alpha = &leaf.spec.alpha;
    let group = &leaf.spec.group;
    let n = group.dim();
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for (i, j) in pairs(n) {
        let mpoly = contract2(alpha.manifold().pi(), alpha.form(i), alpha.form(j))
            .map_err(ReconstructError::Calc)?;
        let gpoly = contract2(group.pi_dual(), &group.theta(i), &group.theta(j))
            .map_err(ReconstructError::Calc)?;
        let mc = mpoly.compile();
        let gc = gpoly.compile();
        let mut sup = 0.0f64;
        for (mpt, upt) in &leaf.samples {
            let phi = mc.eval(mpt) - gc.eval(upt);
            sup = sup.max(phi.abs());
        }
        worst = worst.max(sup);
        out.push(ObstructionPair { pair: (i, j), manifold_poly: mpoly, group_poly: gpoly, sup });
    }
    Ok(ObstructionReport { pairs: out, sup: worst, tolerance, accepted: worst <= tolerance })
}

/// Verdict of the abelian analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum AbelianVerdict {
    /// A unique momentum map exists (the annihilator of the derived algebra
    /// is trivial).
    Unique { z0: Vec<Rat> },
    /// Momentum maps form an affine family `z0 + span(family)`.
    Affine { z0: Vec<Rat>, family: Vec<Vec<Rat>> },
    /// The cocycle class does not vanish; no momentum map exists.
    NoMomentumMap,
}

/// Output of the abelian-dual analysis: exact potentials, the cocycle
/// matrix, and the affine family of admissible leaves.
#[derive(Debug, Clone)]
pub struct AbelianReport {
    pub potentials: Vec<PolyExpr>,
    /// `c[i][j] = {H_i, H_j} - H_{[e_i, e_j]}`, exact and constant.
    pub cocycle: Vec<Vec<Rat>>,
    pub verdict: AbelianVerdict,
}

/// Closed-form analysis when the dual group is abelian: potentials by exact
/// line integration from the box center, the cocycle matrix, and the affine
/// family of momentum maps (when the class vanishes).
pub fn abelian_analyze(alpha: &AlphaMap) -> Result<AbelianReport, ReconstructError> {
    let b = alpha.bialgebra();
    if !b.has_zero_cobracket() {
        return Err(ReconstructError::NotAbelian);
    }
    let n = b.dim();
    for i in 0..n {
        if !exterior_d(alpha.form(i)).is_zero() {
            return Err(ReconstructError::NotClosed(
                b.algebra().basis_names()[i].clone(),
            ));
        }
    }

    let potentials: Vec<PolyExpr> = (0..n)
        .map(|i| line_integral_potential(alpha.form(i)))
        .collect::<Result<_, _>>()?;
    // dH = alpha holds exactly for closed polynomial forms on a box
    for (i, h) in potentials.iter().enumerate() {
        let dh = exterior_d(&FormField::scalar(h.clone()));
        debug_assert!(dh.sub(alpha.form(i)).is_zero());
        let _ = dh;
    }

    let mut cocycle = vec![vec![Rat::zero(); n]; n];
    for (i, j) in pairs(n) {
        let mut braket =
            crate::poisson::fn_bracket(&potentials[i], &potentials[j], alpha.manifold())
                .map_err(ReconstructError::Calc)?;
        for k in 0..n {
            let coeff = b.algebra().c(i, j, k);
            if !coeff.is_zero() {
                braket = &braket - &potentials[k].scale(coeff);
            }
        }
        if braket.total_degree().unwrap_or(0) > 0 {
            return Err(ReconstructError::NotConstant(braket.to_string()));
        }
        let value = braket.constant_term();
        cocycle[i][j] = value.clone();
        cocycle[j][i] = -value;
    }

    // solve z0([e_i, e_j]) = c_ij
    let pair_list: Vec<(usize, usize)> = pairs(n).collect();
    let a_mat: Vec<Vec<Rat>> = pair_list
        .iter()
        .map(|&(i, j)| (0..n).map(|k| b.algebra().c(i, j, k).clone()).collect())
        .collect();
    let rhs: Vec<Rat> = pair_list.iter().map(|&(i, j)| cocycle[i][j].clone()).collect();
    let verdict = match solve_exact(&a_mat, &rhs, n) {
        None => AbelianVerdict::NoMomentumMap,
        Some(sol) => {
            if sol.nullspace.is_empty() {
                AbelianVerdict::Unique { z0: sol.particular }
            } else {
                AbelianVerdict::Affine { z0: sol.particular, family: sol.nullspace }
            }
        }
    };

    Ok(AbelianReport { potentials, cocycle, verdict })
}

/// Exact potential of a closed polynomial 1-form on a box, normalized to
/// vanish at the box center: iterated line integration one axis at a time.
fn line_integral_potential(form: &FormField) -> Result<PolyExpr, ReconstructError> {
    let chart = form.chart().clone();
    let m = chart.dim();
    let center = chart.center();
    let mut h = PolyExpr::zero(&chart);
    for j in 0..m {
        // component j with coordinates after j frozen at the center
        let images: Vec<PolyExpr> = (0..m)
            .map(|k| {
                if k <= j {
                    PolyExpr::coordinate(&chart, k)
                } else {
                    PolyExpr::constant(&chart, center[k].clone())
                }
            })
            .collect();
        let frozen = form
            .coeff(j)
            .substitute(&chart, &images)
            .map_err(ReconstructError::Calc)?;
        let anti = frozen.antiderivative(j);
        // subtract the value at the lower limit x_j = center_j
        let lower_images: Vec<PolyExpr> = (0..m)
            .map(|k| {
                if k == j {
                    PolyExpr::constant(&chart, center[j].clone())
                } else {
                    PolyExpr::coordinate(&chart, k)
                }
            })
            .collect();
        let lower = anti
            .substitute(&chart, &lower_images)
            .map_err(ReconstructError::Calc)?;
        h = &(&h + &anti) - &lower;
    }
    Ok(h)
}

/// Verdict of the Heisenberg analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum HeisenbergVerdict {
    /// `pi(alpha_xi, alpha_eta) = c != 0`: no momentum map exists.
    NoMomentumMap,
    /// `c = 0`: momentum maps exist and form a one-parameter family of
    /// central translations of the corrected leaf.
    CentralFamily,
}

/// Output of the Heisenberg-dual analysis.
#[derive(Debug, Clone)]
pub struct HeisenbergReport {
    /// The exact polynomial `pi(alpha_xi, alpha_eta)`; the analysis demands
    /// degree zero.
    pub constant_poly: PolyExpr,
    pub c: Rat,
    pub verdict: HeisenbergVerdict,
    /// Leaf constants `phi(eta, zeta)` and `phi(xi, zeta)` at the base point
    /// (exact), when `c = 0`.
    pub c1: Option<Rat>,
    pub c2: Option<Rat>,
    /// Base point of the corrected leaf on which every obstruction constant
    /// vanishes.
    pub corrected_base_u: Option<Vec<Rat>>,
}

/// Check that the group's bialgebra is the standard Heisenberg arrangement:
/// basis ordered so that the dual bracket is `[x, y] = z` with `z` central.
fn check_heisenberg_pattern(g: &GroupModel) -> Result<(), ReconstructError> {
    let b = g.bialgebra();
    if b.dim() != 3 {
        return Err(ReconstructError::NotHeisenberg(format!(
            "dimension {} instead of 3",
            b.dim()
        )));
    }
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let expect = if (k, i, j) == (2, 0, 1) {
                    Rat::one()
                } else if (k, i, j) == (2, 1, 0) {
                    -Rat::one()
                } else {
                    Rat::zero()
                };
                if b.d(k, i, j) != &expect {
                    return Err(ReconstructError::NotHeisenberg(format!(
                        "cobracket entry ({k},{i},{j}) is {} instead of {}",
                        b.d(k, i, j),
                        expect
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Analysis for a Heisenberg dual group: the bracket pairing
/// `pi(alpha_xi, alpha_eta)` must be an exact constant `c`; momentum maps
/// exist iff `c = 0`, in which case the base point is corrected so that the
/// remaining obstruction constants vanish and the leaf family is the central
/// one-parameter orbit.
pub fn heisenberg_analyze(
    alpha: &AlphaMap,
    group: &GroupModel,
    base_m: &[Rat],
    base_u: &[Rat],
) -> Result<HeisenbergReport, ReconstructError> {
    check_heisenberg_pattern(group)?;

    let constant_poly = contract2(alpha.manifold().pi(), alpha.form(0), alpha.form(1))
        .map_err(ReconstructError::Calc)?;
    if constant_poly.total_degree().unwrap_or(0) > 0 {
        return Err(ReconstructError::NotConstant(constant_poly.to_string()));
    }
    let c = constant_poly.constant_term();
    if !c.is_zero() {
        return Ok(HeisenbergReport {
            constant_poly,
            c,
            verdict: HeisenbergVerdict::NoMomentumMap,
            c1: None,
            c2: None,
            corrected_base_u: None,
        });
    }

    // leaf constants at the base point: phi(eta, zeta) and phi(xi, zeta)
    let phi_const = |i: usize, j: usize, u: &[Rat]| -> Result<Rat, ReconstructError> {
        let mside = contract2(alpha.manifold().pi(), alpha.form(i), alpha.form(j))
            .map_err(ReconstructError::Calc)?;
        let gside = contract2(group.pi_dual(), &group.theta(i), &group.theta(j))
            .map_err(ReconstructError::Calc)?;
        Ok(mside.eval_rat(base_m) - gside.eval_rat(u))
    };
    let c1 = phi_const(1, 2, base_u)?;
    let c2 = phi_const(0, 2, base_u)?;

    // correct the base point by a left translation exp(s x) exp(t y): the
    // group-side pairings are affine in the translation parameters, so the
    // two vanishing conditions reduce to an exact 2x2 linear solve
    let st_chart = crate::chart::ChartDomain::unit_box(&["s_shift", "t_shift"])
        .with_degree_cap(group.chart().degree_cap());
    let s = PolyExpr::coordinate(&st_chart, 0);
    let t = PolyExpr::coordinate(&st_chart, 1);
    let half_st = (&s * &t).scale(&crate::rat::rat(1, 2));
    let g_of_st = [s.clone(), t.clone(), half_st];
    // images of the product chart: left block exp(s x) exp(t y), right block base_u
    let images: Vec<PolyExpr> = (0..6)
        .map(|k| {
            if k < 3 {
                g_of_st[k].clone()
            } else {
                PolyExpr::constant(&st_chart, base_u[k - 3].clone())
            }
        })
        .collect();
    let shifted_base: Vec<PolyExpr> = group
        .mult()
        .iter()
        .map(|p| p.substitute(&st_chart, &images))
        .collect::<Result<_, _>>()
        .map_err(ReconstructError::Calc)?;

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, j) in [(1usize, 2usize), (0, 2)] {
        let mside = contract2(alpha.manifold().pi(), alpha.form(i), alpha.form(j))
            .map_err(ReconstructError::Calc)?
            .eval_rat(base_m);
        let gside = contract2(group.pi_dual(), &group.theta(i), &group.theta(j))
            .map_err(ReconstructError::Calc)?;
        let gside_st = gside
            .substitute(&st_chart, &shifted_base)
            .map_err(ReconstructError::Calc)?;
        // phi(s, t) = mside - gside_st must vanish; require affine dependence
        if gside_st.total_degree().unwrap_or(0) > 1 {
            return Err(ReconstructError::NotHeisenberg(format!(
                "group pairing is not affine in the correcting translation: {gside_st}"
            )));
        }
        let coeff_s = gside_st.coefficient(&vec![1, 0]);
        let coeff_t = gside_st.coefficient(&vec![0, 1]);
        rows.push(vec![coeff_s, coeff_t]);
        rhs.push(mside - gside_st.constant_term());
    }
    let sol = solve_exact(&rows, &rhs, 2).ok_or_else(|| {
        ReconstructError::NotHeisenberg("no correcting central-free translation exists".into())
    })?;
    let s_val = sol.particular[0].clone();
    let t_val = sol.particular[1].clone();
    let shift_point = vec![
        s_val.clone(),
        t_val.clone(),
        &s_val * &t_val / Rat::from_integer(2.into()),
    ];
    let corrected = group.mult_point_rat(&shift_point, base_u);

    Ok(HeisenbergReport {
        constant_poly,
        c,
        verdict: HeisenbergVerdict::CentralFamily,
        c1: Some(c1),
        c2: Some(c2),
        corrected_base_u: Some(corrected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::{LieAlgebraData, LieBialgebraData};
    use crate::chart::ChartDomain;
    use crate::fields::BivectorField;
    use crate::group::{AbelianPi, BuiltinGroup};
    use crate::parse::parse_poly;
    use crate::poisson::PoissonManifold;
    use crate::rat::{rat, rat_int};
    use crate::sample::probe_rng;

    fn identity_spec(grid: usize, step: f64) -> LeafSpec {
        let g = GroupModel::builtin(BuiltinGroup::Heisenberg, None, AbelianPi::Zero).unwrap();
        let pm = PoissonManifold::new(g.pi_dual().clone()).unwrap();
        let forms = (0..3).map(|i| g.theta(i)).collect();
        let alpha = AlphaMap::new(pm, g.bialgebra().clone(), forms).unwrap();
        LeafSpec {
            alpha,
            group: g,
            base_m: vec![rat_int(0); 3],
            base_u: vec![rat_int(0); 3],
            step,
            grid: vec![grid; 3],
        }
    }

    fn translation_spec() -> LeafSpec {
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
        let alpha = AlphaMap::new(pm, b, forms).unwrap();
        let g = GroupModel::builtin(BuiltinGroup::Abelian(2), None, AbelianPi::Zero).unwrap();
        LeafSpec {
            alpha,
            group: g,
            base_m: vec![rat_int(0); 2],
            base_u: vec![rat_int(0); 2],
            step: 1e-3,
            grid: vec![5, 5],
        }
    }

    #[test]
    fn involutivity_holds_for_identity_and_fails_when_perturbed() {
        let spec = identity_spec(3, 1e-2);
        let rep = involutivity_report(&spec.alpha, &spec.group).unwrap();
        assert!(rep.involutive);
        assert!(rep.combined.iter().all(|f| f.is_zero()));

        let c = spec.alpha.manifold().chart().clone();
        let mut forms = spec.alpha.forms().to_vec();
        forms[2] = forms[2].add(&FormField::one_form(
            &c,
            vec![PolyExpr::zero(&c), PolyExpr::coordinate(&c, 0), PolyExpr::zero(&c)],
        ));
        let bad = AlphaMap::new(
            spec.alpha.manifold().clone(),
            spec.alpha.bialgebra().clone(),
            forms,
        )
        .unwrap();
        let rep2 = involutivity_report(&bad, &spec.group).unwrap();
        assert!(!rep2.involutive);
        // the combined residual equals the difference of the two MC residuals
        assert!(rep2.combined.iter().any(|f| !f.is_zero()));
        assert!(matches!(
            leaf_lift(
                &LeafSpec { alpha: bad, ..spec.clone() },
                &[vec![0.5, 0.0, 0.0]]
            ),
            Err(ReconstructError::NotInvolutive(_))
        ));
    }

    #[test]
    fn abelian_lift_reproduces_exact_line_integrals() {
        let spec = translation_spec();
        // alpha_1 = -dy has potential -y: endpoint = base_u + H(m1) - H(m0)
        let (end, est) = leaf_lift(&spec, &[vec![0.5, 0.0], vec![0.5, -0.75]]).unwrap();
        assert!((end[0] - 0.75).abs() < 1e-12, "{end:?}");
        assert!((end[1] - 0.5).abs() < 1e-12);
        assert!(est < 1e-12);
    }

    #[test]
    fn identity_leaf_is_the_identity_map() {
        let spec = identity_spec(4, 1e-2);
        let leaf = leaf_map(&spec, &mut probe_rng(9)).unwrap();
        assert_eq!(leaf.samples.len(), 64);
        let sup = leaf
            .samples
            .iter()
            .map(|(m, u)| {
                m.iter()
                    .zip(u)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        assert!(sup < 1e-8, "sup = {sup}");
        assert!(leaf.path_discrepancy < 1e-8);
    }

    #[test]
    fn leaf_translates_with_the_base_point() {
        let spec = identity_spec(3, 1e-2);
        let leaf0 = leaf_map(&spec, &mut probe_rng(2)).unwrap();
        let g = vec![rat(1, 4), rat(-1, 8), rat(1, 2)];
        let translated = LeafSpec {
            base_u: spec.group.mult_point_rat(&g, &spec.base_u),
            ..spec.clone()
        };
        let leaf1 = leaf_map(&translated, &mut probe_rng(2)).unwrap();
        let gf: Vec<f64> = g.iter().map(rat_to_f64).collect();
        let mut worst = 0.0f64;
        for ((_, u0), (_, u1)) in leaf0.samples.iter().zip(&leaf1.samples) {
            let expected = spec.group.mult_point_f64(&gf, u0);
            for (a, b) in expected.iter().zip(u1) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst < 1e-8, "worst = {worst}");
    }

    #[test]
    fn obstruction_vanishes_on_identity_and_is_one_on_translations() {
        let spec = identity_spec(3, 1e-2);
        let leaf = leaf_map(&spec, &mut probe_rng(4)).unwrap();
        let obs = obstruction_phi(&leaf, 1e-9).unwrap();
        assert!(obs.accepted);
        assert!(obs.sup < 1e-9);

        let tspec = translation_spec();
        let tleaf = leaf_map(&tspec, &mut probe_rng(4)).unwrap();
        let tobs = obstruction_phi(&tleaf, 1e-6).unwrap();
        assert!(!tobs.accepted);
        assert!((tobs.sup - 1.0).abs() < 1e-12);
        assert_eq!(tobs.pairs[0].manifold_poly, PolyExpr::one(tspec.alpha.manifold().chart()));
    }

    #[test]
    fn abelian_analyze_translation_has_cocycle_one() {
        let spec = translation_spec();
        let rep = abelian_analyze(&spec.alpha).unwrap();
        assert_eq!(rep.cocycle[0][1], rat_int(1));
        assert_eq!(rep.verdict, AbelianVerdict::NoMomentumMap);
        let c = spec.alpha.manifold().chart().clone();
        assert_eq!(rep.potentials[0], -&PolyExpr::coordinate(&c, 1));
        assert_eq!(rep.potentials[1], PolyExpr::coordinate(&c, 0));
    }

    #[test]
    fn abelian_analyze_rotation_yields_the_affine_line() {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let mut pi = BivectorField::zero(&c);
        pi.set(0, 1, PolyExpr::one(&c));
        let pm = PoissonManifold::new(pi).unwrap();
        let b = LieBialgebraData::trivial(LieAlgebraData::abelian(vec!["xi".into()]));
        let alpha = AlphaMap::new(
            pm,
            b,
            vec![FormField::one_form(
                &c,
                vec![PolyExpr::coordinate(&c, 0), PolyExpr::coordinate(&c, 1)],
            )],
        )
        .unwrap();
        let rep = abelian_analyze(&alpha).unwrap();
        assert_eq!(rep.potentials[0], parse_poly("1/2*x^2 + 1/2*y^2", &c).unwrap());
        match rep.verdict {
            AbelianVerdict::Affine { ref z0, ref family } => {
                assert!(z0.iter().all(|v| v.is_zero()));
                assert_eq!(family.len(), 1);
            }
            ref other => panic!("expected an affine family, got {other:?}"),
        }
    }

    #[test]
    fn abelian_analyze_so3_potentials_are_unique() {
        // Lie-Poisson so(3)* with equivariant potentials x, y, z
        let c = ChartDomain::unit_box(&["x", "y", "z"]);
        let mut pi = BivectorField::zero(&c);
        pi.set(0, 1, PolyExpr::coordinate(&c, 2));
        pi.set(1, 2, PolyExpr::coordinate(&c, 0));
        pi.set(0, 2, -&PolyExpr::coordinate(&c, 1));
        let pm = PoissonManifold::new(pi).unwrap();
        let so3 = LieAlgebraData::from_sparse(
            vec!["e1".into(), "e2".into(), "e3".into()],
            &[(0, 1, 2, rat_int(1)), (1, 2, 0, rat_int(1)), (2, 0, 1, rat_int(1))],
        )
        .unwrap();
        let b = LieBialgebraData::trivial(so3);
        let forms = (0..3)
            .map(|i| {
                exterior_d(&FormField::scalar(PolyExpr::coordinate(&c, i)))
            })
            .collect();
        let alpha = AlphaMap::new(pm, b, forms).unwrap();
        let rep = abelian_analyze(&alpha).unwrap();
        assert!(rep.cocycle.iter().all(|row| row.iter().all(|v| v.is_zero())));
        match rep.verdict {
            AbelianVerdict::Unique { ref z0 } => assert!(z0.iter().all(|v| v.is_zero())),
            ref other => panic!("expected uniqueness, got {other:?}"),
        }
    }

    #[test]
    fn abelian_analyze_rejects_wrong_inputs() {
        let spec = identity_spec(3, 1e-2);
        assert!(matches!(
            abelian_analyze(&spec.alpha),
            Err(ReconstructError::NotAbelian)
        ));
        let tspec = translation_spec();
        let c = tspec.alpha.manifold().chart().clone();
        let mut forms = tspec.alpha.forms().to_vec();
        forms[0] = FormField::one_form(
            &c,
            vec![PolyExpr::coordinate(&c, 1), PolyExpr::zero(&c)],
        );
        let bad = AlphaMap::new(
            tspec.alpha.manifold().clone(),
            tspec.alpha.bialgebra().clone(),
            forms,
        )
        .unwrap();
        assert!(matches!(
            abelian_analyze(&bad),
            Err(ReconstructError::NotClosed(_))
        ));
    }

    #[test]
    fn heisenberg_analyze_identity_scenario() {
        let spec = identity_spec(3, 1e-2);
        let rep = heisenberg_analyze(
            &spec.alpha,
            &spec.group,
            &spec.base_m,
            &spec.base_u,
        )
        .unwrap();
        assert!(rep.constant_poly.is_zero());
        assert_eq!(rep.verdict, HeisenbergVerdict::CentralFamily);
        assert_eq!(rep.c1, Some(rat_int(0)));
        assert_eq!(rep.c2, Some(rat_int(0)));
        assert_eq!(rep.corrected_base_u, Some(vec![rat_int(0); 3]));
    }

    #[test]
    fn heisenberg_analyze_corrects_a_shifted_base() {
        let spec = identity_spec(3, 1e-2);
        // leaf through (0, u0) is the left translation by u0; its phi
        // constants are u0_a and -u0_b
        let u0 = vec![rat(1, 3), rat(-1, 4), rat(1, 5)];
        let rep =
            heisenberg_analyze(&spec.alpha, &spec.group, &spec.base_m, &u0).unwrap();
        assert_eq!(rep.c1, Some(rat(1, 3)));
        assert_eq!(rep.c2, Some(rat(1, 4)));
        let corrected = rep.corrected_base_u.unwrap();
        // the corrected base is central: both symplectic coordinates vanish
        assert!(corrected[0].is_zero());
        assert!(corrected[1].is_zero());
    }

    #[test]
    fn heisenberg_analyze_detects_nonconstant_pairings() {
        let spec = identity_spec(3, 1e-2);
        let c = spec.alpha.manifold().chart().clone();
        let mut forms = spec.alpha.forms().to_vec();
        // make pi(alpha_xi, alpha_eta) nonconstant: alpha_eta += a dc
        forms[1] = forms[1].add(&FormField::one_form(
            &c,
            vec![PolyExpr::zero(&c), PolyExpr::zero(&c), PolyExpr::coordinate(&c, 0)],
        ));
        let bad = AlphaMap::new(
            spec.alpha.manifold().clone(),
            spec.alpha.bialgebra().clone(),
            forms,
        )
        .unwrap();
        match heisenberg_analyze(&bad, &spec.group, &spec.base_m, &spec.base_u) {
            Err(ReconstructError::NotConstant(_)) => {}
            other => panic!("expected NotConstant, got {other:?}"),
        }
    }

    #[test]
    fn heisenberg_analyze_rejects_non_heisenberg_groups() {
        let tspec = translation_spec();
        assert!(matches!(
            heisenberg_analyze(
                &tspec.alpha,
                &tspec.group,
                &tspec.base_m,
                &tspec.base_u
            ),
            Err(ReconstructError::NotHeisenberg(_))
        ));
    }
}
