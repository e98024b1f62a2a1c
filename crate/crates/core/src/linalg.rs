//! Small exact linear algebra: rational Gaussian elimination and polynomial
//! matrix inversion by cofactors. Sizes here are tiny (chart dimensions and
//! coefficient vectors of bounded-degree ansatz spaces).

use num_traits::{One, Zero};

use crate::chart::Chart;
use crate::error::CalcError;
use crate::poly::PolyExpr;
use crate::rat::Rat;

/// Result of solving `A x = b` over the rationals.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    /// A particular solution with every free variable set to zero.
    pub particular: Vec<Rat>,
    /// Basis of the homogeneous solution space.
    pub nullspace: Vec<Vec<Rat>>,
}

/// Solve `A x = b` exactly for `cols` unknowns (the column count must be
/// passed explicitly so empty systems keep their unknowns). Returns `None`
/// if the system is inconsistent. The particular solution is canonical:
/// free variables are zero after reduction to row echelon form with
/// leftmost pivots.
pub fn solve_exact(a: &[Vec<Rat>], b: &[Rat], cols: usize) -> Option<LinearSolution> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols, "row width differs from the unknown count");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let pivot_row = (rank..rows).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot_row else { continue };
        m.swap(rank, pr);
        let inv = Rat::one() / m[rank][col].clone();
        for c in col..=cols {
            let v = m[rank][c].clone() * &inv;
            m[rank][c] = v;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=cols {
                    let v = m[r][c].clone() - &f * &m[rank][c];
                    m[r][c] = v;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }

    // inconsistent if a zero row has nonzero rhs
    for r in rank..rows {
        if !m[r][cols].is_zero() {
            return None;
        }
    }

    let mut particular = vec![Rat::zero(); cols];
    for (r, &pc) in pivot_cols.iter().enumerate() {
        particular[pc] = m[r][cols].clone();
    }

    let is_pivot = {
        let mut v = vec![false; cols];
        for &pc in &pivot_cols {
            v[pc] = true;
        }
        v
    };
    let mut nullspace = Vec::new();
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut vec_ = vec![Rat::zero(); cols];
        vec_[free] = Rat::one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            vec_[pc] = -m[r][free].clone();
        }
        nullspace.push(vec_);
    }

    Some(LinearSolution { particular, nullspace })
}

/// Rank of a rational matrix.
pub fn rank(a: &[Vec<Rat>]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let cols = a[0].len();
    let zeros = vec![Rat::zero(); a.len()];
    let sol = solve_exact(a, &zeros, cols).expect("homogeneous systems are consistent");
    cols - sol.nullspace.len()
}

/// Determinant of a square polynomial matrix by Laplace expansion. Fine for
/// the chart dimensions used here.
pub fn poly_det(m: &[Vec<PolyExpr>], chart: &Chart) -> PolyExpr {
    let n = m.len();
    if n == 0 {
        return PolyExpr::one(chart);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = PolyExpr::zero(chart);
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<PolyExpr>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cof = &poly_det(&minor, chart) * entry;
        acc = if j % 2 == 0 { &acc + &cof } else { &acc - &cof };
    }
    acc
}

/// Inverse of a square polynomial matrix whose determinant is a nonzero
/// constant (adjugate divided by the constant).
pub fn poly_inverse_const_det(
    m: &[Vec<PolyExpr>],
    chart: &Chart,
) -> Result<Vec<Vec<PolyExpr>>, CalcError> {
    let n = m.len();
    let det = poly_det(m, chart);
    if !det.is_constant() || det.is_zero() {
        return Err(CalcError::DegreeError(format!(
            "matrix determinant is not a nonzero constant: {det}"
        )));
    }
    let det_inv = Rat::one() / det.constant_term();
    let mut inv = vec![vec![PolyExpr::zero(chart); n]; n];
    for i in 0..n {
        for j in 0..n {
            // cofactor C_ji for the (i, j) entry of the inverse
            let minor: Vec<Vec<PolyExpr>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = poly_det(&minor, chart);
            if (i + j) % 2 == 1 {
                cof = -&cof;
            }
            inv[i][j] = cof.scale(&det_inv);
        }
    }
    Ok(inv)
}

/// Multiply two polynomial matrices.
pub fn poly_mat_mul(a: &[Vec<PolyExpr>], b: &[Vec<PolyExpr>], chart: &Chart) -> Vec<Vec<PolyExpr>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![PolyExpr::zero(chart); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = PolyExpr::zero(chart);
            for l in 0..k {
                acc = &acc + &(&a[i][l] * &b[l][j]);
            }
            out[i][j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use crate::parse::parse_poly;
    use crate::rat::{rat, rat_int};

    #[test]
    fn solves_a_unique_system() {
        // x + y = 3, x - y = 1
        let a = vec![vec![rat_int(1), rat_int(1)], vec![rat_int(1), rat_int(-1)]];
        let b = vec![rat_int(3), rat_int(1)];
        let s = solve_exact(&a, &b, 2).unwrap();
        assert_eq!(s.particular, vec![rat_int(2), rat_int(1)]);
        assert!(s.nullspace.is_empty());
    }

    #[test]
    fn reports_inconsistency_and_nullspace() {
        let a = vec![vec![rat_int(1), rat_int(1)], vec![rat_int(2), rat_int(2)]];
        assert!(solve_exact(&a, &[rat_int(1), rat_int(3)], 2).is_none());
        let s = solve_exact(&a, &[rat_int(1), rat_int(2)], 2).unwrap();
        assert_eq!(s.nullspace.len(), 1);
        assert_eq!(s.particular, vec![rat_int(1), rat_int(0)]);
    }

    #[test]
    fn inverts_the_heisenberg_frame() {
        let c = ChartDomain::unit_box(&["a", "b", "c"]);
        let p = |s: &str| parse_poly(s, &c).unwrap();
        let m = vec![
            vec![p("1"), p("0"), p("0")],
            vec![p("0"), p("1"), p("0")],
            vec![p("-1/2*b"), p("1/2*a"), p("1")],
        ];
        let det = poly_det(&m, &c);
        assert_eq!(det, PolyExpr::one(&c));
        let inv = poly_inverse_const_det(&m, &c).unwrap();
        assert_eq!(inv[2][0], p("1/2*b"));
        assert_eq!(inv[2][1], p("-1/2*a"));
        let prod = poly_mat_mul(&m, &inv, &c);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { PolyExpr::one(&c) } else { PolyExpr::zero(&c) };
                assert_eq!(prod[i][j], expect);
            }
        }
    }

    #[test]
    fn rejects_nonconstant_determinants() {
        let c = ChartDomain::unit_box(&["a"]);
        let m = vec![vec![parse_poly("1 + a", &c).unwrap()]];
        assert!(poly_inverse_const_det(&m, &c).is_err());
        assert_eq!(rank(&[vec![rat(1, 2), rat(1, 1)], vec![rat(1, 4), rat(1, 2)]]), 1);
    }
}
