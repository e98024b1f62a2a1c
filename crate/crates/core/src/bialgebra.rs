//! Lie algebra and Lie bialgebra data: structure constants, cobracket
//! constants, and their exact consistency checks.
//!
//! Conventions fixed here and used everywhere downstream:
//!
//! * `c[i][j][k]` is the coefficient of `e_k` in `[e_i, e_j]`.
//! * `d[k][i][j]` encodes the cobracket: `delta(e_k) = sum_{i<j} d[k][i][j]
//!   e_i ^ e_j`, antisymmetric in `(i, j)`. Read as `c*[i][j][k] =
//!   d[k][i][j]` these are the structure constants of the dual algebra.
//! * The coadjoint action of the dual on the primal is fixed by the pairing
//!   `<ad*_x xi, y> = <xi, [x, y]*>`. The opposite choice differs by a sign;
//!   callers that are sensitive to it evaluate both and report which one
//!   holds.

use num_traits::{One, Zero};

use crate::error::AlgebraError;
use crate::rat::{abs_max, Rat};

type Rank3 = Vec<Vec<Vec<Rat>>>;

fn check_shape(c: &Rank3, n: usize, what: &str) -> Result<(), AlgebraError> {
    if c.len() != n || c.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
        return Err(AlgebraError::DimensionMismatch(format!(
            "{what} constants must form an {n}x{n}x{n} array"
        )));
    }
    Ok(())
}

fn zeros(n: usize) -> Rank3 {
    vec![vec![vec![Rat::zero(); n]; n]; n]
}

/// A finite-dimensional Lie algebra presented by structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraData {
    dim: usize,
    basis_names: Vec<String>,
    c: Rank3,
}

impl LieAlgebraData {
    /// Build from a full constants array; antisymmetry in the first two
    /// slots is required, not repaired.
    pub fn new(basis_names: Vec<String>, c: Rank3) -> Result<Self, AlgebraError> {
        let n = basis_names.len();
        if n == 0 {
            return Err(AlgebraError::DimensionMismatch("dimension must be positive".into()));
        }
        check_shape(&c, n, "bracket")?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if c[i][j][k] != -c[j][i][k].clone() {
                        return Err(AlgebraError::NotAntisymmetric { i, j, k });
                    }
                }
            }
        }
        Ok(LieAlgebraData { dim: n, basis_names, c })
    }

    /// Build from sparse bracket entries `[e_i, e_j] = sum coeff * e_k`
    /// given as `(i, j, k, coeff)`. Entries are antisymmetrized, so only one
    /// orientation of each pair needs to be given.
    pub fn from_sparse(
        basis_names: Vec<String>,
        entries: &[(usize, usize, usize, Rat)],
    ) -> Result<Self, AlgebraError> {
        let n = basis_names.len();
        let mut c = zeros(n);
        for (i, j, k, coeff) in entries {
            if *i >= n || *j >= n || *k >= n {
                return Err(AlgebraError::DimensionMismatch(format!(
                    "bracket entry ({i},{j},{k}) outside dimension {n}"
                )));
            }
            if i == j {
                continue;
            }
            c[*i][*j][*k] += coeff;
            c[*j][*i][*k] -= coeff;
        }
        LieAlgebraData::new(basis_names, c)
    }

    pub fn abelian(basis_names: Vec<String>) -> Self {
        let n = basis_names.len();
        LieAlgebraData { dim: n, basis_names, c: zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn constants(&self) -> &Rank3 {
        &self.c
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.c[i][j][k]
    }

    /// Bracket of coefficient vectors.
    pub fn bracket(&self, x: &[Rat], y: &[Rat]) -> Vec<Rat> {
        let n = self.dim;
        assert!(x.len() == n && y.len() == n);
        let mut out = vec![Rat::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                for k in 0..n {
                    if !self.c[i][j][k].is_zero() {
                        out[k] += &x[i] * &y[j] * &self.c[i][j][k];
                    }
                }
            }
        }
        out
    }

    /// Largest Jacobi violation over all basis quadruples; exactly zero iff
    /// the constants define a Lie algebra.
    pub fn jacobi_residual(&self) -> Rat {
        let n = self.dim;
        let mut worst = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut sum = Rat::zero();
                        for m in 0..n {
                            sum += &self.c[i][j][m] * &self.c[m][k][l];
                            sum += &self.c[j][k][m] * &self.c[m][i][l];
                            sum += &self.c[k][i][m] * &self.c[m][j][l];
                        }
                        worst = abs_max(worst, &sum);
                    }
                }
            }
        }
        worst
    }

    /// True when every bracket vanishes.
    pub fn is_abelian(&self) -> bool {
        self.c
            .iter()
            .all(|m| m.iter().all(|r| r.iter().all(|v| v.is_zero())))
    }

    /// Nilpotency class via the lower central series, or `None` when the
    /// series does not reach zero. Class 1 means abelian.
    pub fn nilpotency_class(&self) -> Option<u32> {
        use crate::linalg::rank;
        let n = self.dim;
        // current subspace spanned by rows
        let mut span: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                let mut v = vec![Rat::zero(); n];
                v[i] = Rat::one();
                v
            })
            .collect();
        let mut class = 0u32;
        loop {
            class += 1;
            if class > n as u32 + 1 {
                return None;
            }
            let mut next: Vec<Vec<Rat>> = Vec::new();
            for i in 0..n {
                let mut basis_i = vec![Rat::zero(); n];
                basis_i[i] = Rat::one();
                for v in &span {
                    next.push(self.bracket(&basis_i, v));
                }
            }
            if next.iter().all(|v| v.iter().all(|x| x.is_zero())) {
                return Some(class);
            }
            // transpose rows into a matrix for rank / keep as span
            let r = rank(&next);
            if r == rank(&span) {
                // series stabilized at a nonzero term
                return None;
            }
            span = next;
        }
    }
}

/// A Lie bialgebra: an algebra together with cobracket constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBialgebraData {
    algebra: LieAlgebraData,
    d: Rank3,
}

impl LieBialgebraData {
    /// Build from a full cobracket array `d[k][i][j]`, antisymmetric in
    /// `(i, j)`.
    pub fn new(algebra: LieAlgebraData, d: Rank3) -> Result<Self, AlgebraError> {
        let n = algebra.dim();
        check_shape(&d, n, "cobracket")?;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[k][i][j] != -d[k][j][i].clone() {
                        return Err(AlgebraError::NotAntisymmetric { i, j, k });
                    }
                }
            }
        }
        Ok(LieBialgebraData { algebra, d })
    }

    /// Sparse cobracket entries `delta(e_k) ∋ coeff * e_i ^ e_j` given as
    /// `(k, i, j, coeff)`; antisymmetrized in `(i, j)`.
    pub fn from_sparse(
        algebra: LieAlgebraData,
        entries: &[(usize, usize, usize, Rat)],
    ) -> Result<Self, AlgebraError> {
        let n = algebra.dim();
        let mut d = zeros(n);
        for (k, i, j, coeff) in entries {
            if *i >= n || *j >= n || *k >= n {
                return Err(AlgebraError::DimensionMismatch(format!(
                    "cobracket entry ({k},{i},{j}) outside dimension {n}"
                )));
            }
            if i == j {
                continue;
            }
            d[*k][*i][*j] += coeff;
            d[*k][*j][*i] -= coeff;
        }
        LieBialgebraData::new(algebra, d)
    }

    /// Bialgebra with zero cobracket.
    pub fn trivial(algebra: LieAlgebraData) -> Self {
        let n = algebra.dim();
        LieBialgebraData { algebra, d: zeros(n) }
    }

    pub fn algebra(&self) -> &LieAlgebraData {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn cobracket_constants(&self) -> &Rank3 {
        &self.d
    }

    pub fn d(&self, k: usize, i: usize, j: usize) -> &Rat {
        &self.d[k][i][j]
    }

    pub fn has_zero_cobracket(&self) -> bool {
        self.d
            .iter()
            .all(|m| m.iter().all(|r| r.iter().all(|v| v.is_zero())))
    }

    /// Largest violation of the 1-cocycle identity
    /// `delta([xi, eta]) = ad_xi delta(eta) - ad_eta delta(xi)`.
    pub fn cocycle_residual(&self) -> Rat {
        let n = self.dim();
        let c = self.algebra.constants();
        // ad_i acting on an antisymmetric matrix T:
        // (ad_i T)^{kl} = sum_a c[i][a][k] T^{al} + c[i][a][l] T^{ka}
        let ad = |i: usize, t: &Vec<Vec<Rat>>| -> Vec<Vec<Rat>> {
            let mut out = vec![vec![Rat::zero(); n]; n];
            for k in 0..n {
                for l in 0..n {
                    let mut acc = Rat::zero();
                    for a in 0..n {
                        acc += &c[i][a][k] * &t[a][l];
                        acc += &c[i][a][l] * &t[k][a];
                    }
                    out[k][l] = acc;
                }
            }
            out
        };
        let mut worst = Rat::zero();
        for i in 0..n {
            for j in 0..n {
                let ad_i_dj = ad(i, &self.d[j]);
                let ad_j_di = ad(j, &self.d[i]);
                for k in 0..n {
                    for l in 0..n {
                        let mut lhs = Rat::zero();
                        for m in 0..n {
                            lhs += &c[i][j][m] * &self.d[m][k][l];
                        }
                        let resid = lhs - &ad_i_dj[k][l] + &ad_j_di[k][l];
                        worst = abs_max(worst, &resid);
                    }
                }
            }
        }
        worst
    }

    /// The dual algebra: `c*[i][j][k] = d[k][i][j]`. Fails when the dual
    /// constants do not satisfy Jacobi.
    pub fn dual_algebra(&self) -> Result<LieAlgebraData, AlgebraError> {
        let n = self.dim();
        let mut cstar = zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cstar[i][j][k] = self.d[k][i][j].clone();
                }
            }
        }
        let names = (0..n).map(|i| format!("{}*", self.algebra.basis_names()[i])).collect();
        let dual = LieAlgebraData::new(names, cstar)?;
        let resid = dual.jacobi_residual();
        if !resid.is_zero() {
            return Err(AlgebraError::InvalidBialgebra(format!(
                "dual constants violate Jacobi by {resid}"
            )));
        }
        Ok(dual)
    }

    /// Coadjoint action of the dual on the primal:
    /// `(ad*_x xi)_j = <xi, [x, x_j]*>` with `x` in dual coordinates and
    /// `xi` in primal coordinates.
    pub fn coadjoint(&self, x: &[Rat], xi: &[Rat]) -> Result<Vec<Rat>, AlgebraError> {
        let n = self.dim();
        if x.len() != n || xi.len() != n {
            return Err(AlgebraError::DimensionMismatch(format!(
                "coadjoint expects two vectors of length {n}"
            )));
        }
        let mut out = vec![Rat::zero(); n];
        for j in 0..n {
            let mut acc = Rat::zero();
            for a in 0..n {
                if x[a].is_zero() {
                    continue;
                }
                for m in 0..n {
                    // c*[a][j][m] = d[m][a][j]
                    if !self.d[m][a][j].is_zero() {
                        acc += &x[a] * &xi[m] * &self.d[m][a][j];
                    }
                }
            }
            out[j] = acc;
        }
        Ok(out)
    }

    /// Coadjoint with the opposite pairing sign.
    pub fn coadjoint_opposite(&self, x: &[Rat], xi: &[Rat]) -> Result<Vec<Rat>, AlgebraError> {
        Ok(self.coadjoint(x, xi)?.into_iter().map(|v| -v).collect())
    }
}

/// The two bialgebras whose dual group is the Heisenberg group, keyed by the
/// primal bracket; `rotation` is `[xi,zeta]=eta, [eta,zeta]=-xi`, `scaling`
/// is `[xi,zeta]=xi, [eta,zeta]=eta`. Both carry `delta(zeta) = xi ^ eta`.
pub fn heisenberg_dual_bialgebra(scaling: bool) -> LieBialgebraData {
    let names = vec!["xi".to_string(), "eta".to_string(), "zeta".to_string()];
    let one = Rat::one();
    let entries: Vec<(usize, usize, usize, Rat)> = if scaling {
        vec![(0, 2, 0, one.clone()), (1, 2, 1, one.clone())]
    } else {
        vec![(0, 2, 1, one.clone()), (1, 2, 0, -one.clone())]
    };
    let algebra = LieAlgebraData::from_sparse(names, &entries).expect("valid constants");
    LieBialgebraData::from_sparse(algebra, &[(2, 0, 1, one)]).expect("valid cobracket")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat_int, rat};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("e{}", i + 1)).collect()
    }

    #[test]
    fn abelian_passes_jacobi() {
        let a = LieAlgebraData::abelian(names(3));
        assert_eq!(a.jacobi_residual(), rat_int(0));
    }

    #[test]
    fn heisenberg_dual_passes_jacobi() {
        // [x, y] = z with z central
        let h = LieAlgebraData::from_sparse(names(3), &[(0, 1, 2, rat_int(1))]).unwrap();
        assert_eq!(h.jacobi_residual(), rat_int(0));
        assert_eq!(h.nilpotency_class(), Some(2));
    }

    #[test]
    fn jacobi_violation_is_caught() {
        // [e1,e2] = e3, [e1,e3] = e1 fails Jacobi on (1,2,3)
        let bad =
            LieAlgebraData::from_sparse(names(3), &[(0, 1, 2, rat_int(1)), (0, 2, 0, rat_int(1))])
                .unwrap();
        assert!(bad.jacobi_residual() > rat_int(0));
        // while [e1,e2]=e1, [e1,e3]=e1, [e2,e3]=0 is an honest solvable algebra
        let ok =
            LieAlgebraData::from_sparse(names(3), &[(0, 1, 0, rat_int(1)), (0, 2, 0, rat_int(1))])
                .unwrap();
        assert_eq!(ok.jacobi_residual(), rat_int(0));
        assert_eq!(ok.nilpotency_class(), None);
    }

    #[test]
    fn construction_rejects_asymmetric_arrays() {
        let mut c = vec![vec![vec![rat_int(0); 2]; 2]; 2];
        c[0][1][0] = rat_int(1); // missing the mirrored entry
        assert!(matches!(
            LieAlgebraData::new(names(2), c),
            Err(AlgebraError::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn cocycle_holds_for_heisenberg_dual_pair() {
        let b = heisenberg_dual_bialgebra(false);
        assert_eq!(b.algebra().jacobi_residual(), rat_int(0));
        assert_eq!(b.cocycle_residual(), rat_int(0));
        let dual = b.dual_algebra().unwrap();
        // dual is the Heisenberg algebra: [x, y] = z, z central
        assert_eq!(dual.c(0, 1, 2), &rat_int(1));
        assert!(dual.c(0, 2, 0).is_zero() && dual.c(1, 2, 1).is_zero());
    }

    #[test]
    fn cocycle_violation_is_caught() {
        // same algebra but delta(xi) = xi ^ eta breaks the cocycle identity
        let names3 = vec!["xi".into(), "eta".into(), "zeta".into()];
        let algebra = LieAlgebraData::from_sparse(
            names3,
            &[(0, 2, 1, rat_int(1)), (1, 2, 0, rat_int(-1))],
        )
        .unwrap();
        let b = LieBialgebraData::from_sparse(algebra, &[(0, 0, 1, rat_int(1))]).unwrap();
        assert!(b.cocycle_residual() > rat_int(0));
    }

    #[test]
    fn trivial_cobracket_is_a_cocycle_for_any_algebra() {
        let so3 = LieAlgebraData::from_sparse(
            names(3),
            &[(0, 1, 2, rat_int(1)), (1, 2, 0, rat_int(1)), (2, 0, 1, rat_int(1))],
        )
        .unwrap();
        assert_eq!(so3.jacobi_residual(), rat_int(0));
        let b = LieBialgebraData::trivial(so3);
        assert_eq!(b.cocycle_residual(), rat_int(0));
        let dual = b.dual_algebra().unwrap();
        assert!(dual.is_abelian());
    }

    #[test]
    fn coadjoint_matches_the_documented_pairing() {
        let b = heisenberg_dual_bialgebra(false);
        // x = x-basis of the dual, xi = zeta: <ad*_x zeta, y> = <zeta, [x,y]*> = 1
        let x = vec![rat_int(1), rat_int(0), rat_int(0)];
        let zeta = vec![rat_int(0), rat_int(0), rat_int(1)];
        let result = b.coadjoint(&x, &zeta).unwrap();
        assert_eq!(result, vec![rat_int(0), rat_int(1), rat_int(0)]);
        // central direction acts trivially
        let z = vec![rat_int(0), rat_int(0), rat_int(1)];
        assert!(b.coadjoint(&z, &zeta).unwrap().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn coadjoint_is_bilinear() {
        let b = heisenberg_dual_bialgebra(true);
        let x = vec![rat(1, 2), rat_int(2), rat_int(-1)];
        let y = vec![rat_int(3), rat(-1, 3), rat_int(0)];
        let xi = vec![rat_int(1), rat(5, 7), rat_int(2)];
        let lhs = b
            .coadjoint(&x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>(), &xi)
            .unwrap();
        let rx = b.coadjoint(&x, &xi).unwrap();
        let ry = b.coadjoint(&y, &xi).unwrap();
        let rhs: Vec<Rat> = rx.iter().zip(&ry).map(|(a, b)| a + b).collect();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairing_identity_holds_by_expansion() {
        // <ad*_x xi, y> = <xi, [x, y]*> for all basis vectors
        let b = heisenberg_dual_bialgebra(false);
        let dual = b.dual_algebra().unwrap();
        let n = b.dim();
        for a in 0..n {
            for j in 0..n {
                for m in 0..n {
                    let mut x = vec![Rat::zero(); n];
                    x[a] = Rat::one();
                    let mut y = vec![Rat::zero(); n];
                    y[j] = Rat::one();
                    let mut xi = vec![Rat::zero(); n];
                    xi[m] = Rat::one();
                    let adx = b.coadjoint(&x, &xi).unwrap();
                    let lhs = adx[j].clone();
                    let rhs = dual.bracket(&x, &y)[m].clone();
                    assert_eq!(lhs, rhs, "pairing mismatch at ({a},{j},{m})");
                }
            }
        }
    }
}
