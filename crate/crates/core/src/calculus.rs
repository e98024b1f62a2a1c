//! Exact exterior calculus on polynomial fields: d, wedge, contractions,
//! Lie derivatives and pullbacks.

use crate::chart::{same_chart, Chart};
use crate::error::CalcError;
use crate::fields::{blade_degree, blade_merge, pairs, BivectorField, FormField, VectorField};
use crate::poly::PolyExpr;

/// Exterior derivative. For top-degree input the result is the zero form of
/// degree `p + 1`.
pub fn exterior_d(omega: &FormField) -> FormField {
    let chart = omega.chart().clone();
    let m = chart.dim();
    let mut out = FormField::zero(&chart, omega.degree() + 1);
    if omega.degree() >= m {
        return out;
    }
    for (blade, coeff) in omega.components() {
        for i in 0..m {
            let bit = 1u32 << i;
            if blade & bit != 0 {
                continue;
            }
            let d_coeff = coeff.partial(i);
            if d_coeff.is_zero() {
                continue;
            }
            // dx_i ^ (blade): dx_i must pass over the blade factors below i
            let (merged, sign) = blade_merge(bit, blade).expect("disjoint blades");
            let signed = if sign == 1 { d_coeff } else { -&d_coeff };
            out.accumulate(merged, &signed);
        }
    }
    out
}

/// Wedge product of two forms. Degrees above the chart dimension collapse to
/// the zero form.
pub fn wedge(a: &FormField, b: &FormField) -> Result<FormField, CalcError> {
    same_chart(a.chart(), b.chart())?;
    let chart = a.chart().clone();
    let deg = a.degree() + b.degree();
    let mut out = FormField::zero(&chart, deg);
    if deg > chart.dim() {
        return Ok(out);
    }
    for (ba, pa) in a.components() {
        for (bb, pb) in b.components() {
            if let Some((merged, sign)) = blade_merge(ba, bb) {
                let prod = pa * pb;
                let signed = if sign == 1 { prod } else { -&prod };
                out.accumulate(merged, &signed);
            }
        }
    }
    out.check_cap()?;
    Ok(out)
}

/// Interior product `iota_X omega`.
pub fn interior(x: &VectorField, omega: &FormField) -> Result<FormField, CalcError> {
    same_chart(x.chart(), omega.chart())?;
    let chart = omega.chart().clone();
    if omega.degree() == 0 {
        return Err(CalcError::DegreeError("interior product of a 0-form".into()));
    }
    let mut out = FormField::zero(&chart, omega.degree() - 1);
    for (blade, coeff) in omega.components() {
        // contract on each participating index with alternating sign
        let mut sign = 1i8;
        let mut rest = blade;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            let reduced = blade & !(1u32 << i);
            let term = coeff * x.comp(i);
            let signed = if sign == 1 { term } else { -&term };
            out.accumulate(reduced, &signed);
            sign = -sign;
            rest &= rest - 1;
        }
    }
    Ok(out)
}

/// Pairing of a bivector with two 1-forms:
/// `beta(w1, w2) = sum_{i<j} beta^{ij} (w1_i w2_j - w1_j w2_i)`.
pub fn contract2(
    beta: &BivectorField,
    w1: &FormField,
    w2: &FormField,
) -> Result<PolyExpr, CalcError> {
    same_chart(beta.chart(), w1.chart())?;
    same_chart(beta.chart(), w2.chart())?;
    if w1.degree() != 1 || w2.degree() != 1 {
        return Err(CalcError::DegreeError("contract2 expects 1-forms".into()));
    }
    let chart = beta.chart().clone();
    let mut acc = PolyExpr::zero(&chart);
    for (i, j) in pairs(chart.dim()) {
        let bij = beta.comp(i, j);
        if bij.is_zero() {
            continue;
        }
        let anti = &(&w1.coeff(i) * &w2.coeff(j)) - &(&w1.coeff(j) * &w2.coeff(i));
        acc = &acc + &(&bij * &anti);
    }
    Ok(acc)
}

/// Musical raising: `sharp(beta, w)^j = sum_i beta^{ij} w_i`, fixed so that
/// `<sharp(beta, w1), w2> = contract2(beta, w1, w2)`.
pub fn sharp(beta: &BivectorField, w: &FormField) -> Result<VectorField, CalcError> {
    same_chart(beta.chart(), w.chart())?;
    if w.degree() != 1 {
        return Err(CalcError::DegreeError("sharp expects a 1-form".into()));
    }
    let chart = beta.chart().clone();
    let m = chart.dim();
    let comps = (0..m)
        .map(|j| {
            let mut acc = PolyExpr::zero(&chart);
            for i in 0..m {
                if i == j {
                    continue;
                }
                acc = &acc + &(&beta.comp(i, j) * &w.coeff(i));
            }
            acc
        })
        .collect();
    Ok(VectorField::new(&chart, comps))
}

/// Evaluate a 1-form on a vector field.
pub fn pair_form_vector(w: &FormField, x: &VectorField) -> Result<PolyExpr, CalcError> {
    same_chart(w.chart(), x.chart())?;
    if w.degree() != 1 {
        return Err(CalcError::DegreeError("pairing expects a 1-form".into()));
    }
    let chart = w.chart().clone();
    let mut acc = PolyExpr::zero(&chart);
    for i in 0..chart.dim() {
        acc = &acc + &(&w.coeff(i) * x.comp(i));
    }
    Ok(acc)
}

/// Lie derivative of a form along a vector field, via the Cartan formula
/// `L_X = iota_X d + d iota_X`.
pub fn lie_derivative_form(x: &VectorField, omega: &FormField) -> Result<FormField, CalcError> {
    same_chart(x.chart(), omega.chart())?;
    if omega.degree() == 0 {
        return Ok(FormField::scalar(x.apply(&omega.component(0))));
    }
    let a = interior(x, &exterior_d(omega))?;
    let b = exterior_d(&interior(x, omega)?);
    Ok(a.add(&b))
}

/// Lie derivative of a bivector, component formula
/// `(L_X b)^{ij} = X(b^{ij}) - b^{kj} d_k X^i - b^{ik} d_k X^j`.
pub fn lie_derivative_bivector(
    x: &VectorField,
    beta: &BivectorField,
) -> Result<BivectorField, CalcError> {
    same_chart(x.chart(), beta.chart())?;
    let chart = beta.chart().clone();
    let m = chart.dim();
    let mut out = BivectorField::zero(&chart);
    for (i, j) in pairs(m) {
        let mut acc = x.apply(&beta.comp(i, j));
        for k in 0..m {
            acc = &acc - &(&beta.comp(k, j) * &x.comp(i).partial(k));
            acc = &acc - &(&beta.comp(i, k) * &x.comp(j).partial(k));
        }
        out.set(i, j, acc);
    }
    Ok(out)
}

/// Pullback of a form along a polynomial map `phi: source -> target` given
/// by the images of the target coordinates.
pub fn pullback(
    omega: &FormField,
    source: &Chart,
    images: &[PolyExpr],
) -> Result<FormField, CalcError> {
    if images.len() != omega.chart().dim() {
        return Err(CalcError::DimensionMismatch(format!(
            "pullback needs {} coordinate images, got {}",
            omega.chart().dim(),
            images.len()
        )));
    }
    for img in images {
        same_chart(source, img.chart())?;
    }
    // d(phi_i) on the source
    let dimgs: Vec<FormField> = images
        .iter()
        .map(|p| {
            FormField::one_form(source, (0..source.dim()).map(|k| p.partial(k)).collect())
        })
        .collect();
    let mut out = FormField::zero(source, omega.degree());
    for (blade, coeff) in omega.components() {
        let pulled_coeff = coeff.substitute(source, images)?;
        let mut factor = FormField::scalar(PolyExpr::one(source));
        let mut rest = blade;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            factor = wedge(&factor, &dimgs[i])?;
            rest &= rest - 1;
        }
        if blade_degree(blade) == 0 {
            out.accumulate(0, &pulled_coeff);
        } else {
            for (b, p) in factor.components() {
                out.accumulate(b, &(&pulled_coeff * p));
            }
        }
    }
    out.check_cap()?;
    Ok(out)
}
