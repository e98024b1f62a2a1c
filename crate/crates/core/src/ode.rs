//! Classical fixed-step 4th-order integration of the lifting constraint
//! along straight segments, with step-halving error estimates. No adaptive
//! control: reproducibility is worth more than speed here.

use crate::error::ReconstructError;
use crate::poly::CompiledPoly;

/// Compiled right-hand side of the lift: the coframe matrix on the group
/// chart and the alpha coefficient matrix on the manifold chart.
pub struct LiftSystem {
    /// `alpha[i][j]` = j-th coefficient of the i-th 1-form, on the manifold.
    pub alpha: Vec<Vec<CompiledPoly>>,
    /// `coframe[i][j]` = j-th coefficient of the i-th coframe row.
    pub coframe: Vec<Vec<CompiledPoly>>,
}

impl LiftSystem {
    /// Solve `Theta(u) du = alpha(m) dm` for the velocity of `u`.
    fn velocity(
        &self,
        m_point: &[f64],
        m_dot: &[f64],
        u: &[f64],
    ) -> Result<Vec<f64>, ReconstructError> {
        let n = self.coframe.len();
        let mut rhs = vec![0.0; n];
        for (i, row) in self.alpha.iter().enumerate() {
            rhs[i] = row
                .iter()
                .zip(m_dot)
                .map(|(p, dm)| p.eval(m_point) * dm)
                .sum();
        }
        let mut mat = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                mat[i][j] = self.coframe[i][j].eval(u);
            }
        }
        solve_f64(&mut mat, &mut rhs).map_err(|_| ReconstructError::FrameSingular(u.to_vec()))?;
        Ok(rhs)
    }

    /// Integrate one straight segment from `m_from` to `m_to` with the given
    /// step in path length.
    pub fn integrate_segment(
        &self,
        m_from: &[f64],
        m_to: &[f64],
        u0: &[f64],
        step: f64,
    ) -> Result<Vec<f64>, ReconstructError> {
        let m = m_from.len();
        let delta: Vec<f64> = (0..m).map(|k| m_to[k] - m_from[k]).collect();
        let length = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        if length == 0.0 {
            return Ok(u0.to_vec());
        }
        let steps = (length / step).ceil().max(1.0) as usize;
        let h = 1.0 / steps as f64;
        let mut u = u0.to_vec();
        let mut t = 0.0;
        let pos = |t: f64| -> Vec<f64> {
            (0..m).map(|k| m_from[k] + t * delta[k]).collect()
        };
        for _ in 0..steps {
            let k1 = self.velocity(&pos(t), &delta, &u)?;
            let u2: Vec<f64> = u.iter().zip(&k1).map(|(x, k)| x + 0.5 * h * k).collect();
            let k2 = self.velocity(&pos(t + 0.5 * h), &delta, &u2)?;
            let u3: Vec<f64> = u.iter().zip(&k2).map(|(x, k)| x + 0.5 * h * k).collect();
            let k3 = self.velocity(&pos(t + 0.5 * h), &delta, &u3)?;
            let u4: Vec<f64> = u.iter().zip(&k3).map(|(x, k)| x + h * k).collect();
            let k4 = self.velocity(&pos(t + h), &delta, &u4)?;
            for i in 0..u.len() {
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += h;
        }
        Ok(u)
    }

    /// Integrate a polyline, visiting the waypoints in order.
    pub fn integrate_polyline(
        &self,
        waypoints: &[Vec<f64>],
        u0: &[f64],
        step: f64,
    ) -> Result<Vec<f64>, ReconstructError> {
        let mut u = u0.to_vec();
        for w in waypoints.windows(2) {
            u = self.integrate_segment(&w[0], &w[1], &u, step)?;
        }
        Ok(u)
    }

    /// Endpoint with a Richardson error estimate from one step halving.
    pub fn integrate_polyline_with_estimate(
        &self,
        waypoints: &[Vec<f64>],
        u0: &[f64],
        step: f64,
    ) -> Result<(Vec<f64>, f64), ReconstructError> {
        let coarse = self.integrate_polyline(waypoints, u0, step)?;
        let fine = self.integrate_polyline(waypoints, u0, step / 2.0)?;
        // classical order 4: |fine - exact| ~ |coarse - fine| / 15
        let diff = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((fine, diff / 15.0))
    }
}

/// In-place Gaussian elimination with partial pivoting; `rhs` becomes the
/// solution. Errors when a pivot is numerically zero.
fn solve_f64(mat: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<(), ()> {
    let n = mat.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                mat[a][col]
                    .abs()
                    .partial_cmp(&mat[b][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or(())?;
        if mat[pivot][col].abs() < 1e-12 {
            return Err(());
        }
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = mat[row][col] / mat[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                mat[row][k] -= f * mat[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for i in 0..n {
        rhs[i] /= mat[i][i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use crate::parse::parse_poly;

    #[test]
    fn linear_solver_handles_pivoting() {
        let mut m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let mut rhs = vec![2.0, 3.0];
        solve_f64(&mut m, &mut rhs).unwrap();
        assert_eq!(rhs, vec![3.0, 2.0]);
        let mut sing = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let mut r = vec![1.0, 1.0];
        assert!(solve_f64(&mut sing, &mut r).is_err());
    }

    #[test]
    fn exact_for_closed_abelian_data() {
        // 1-dim group, alpha = d(x^2) on a 1-dim manifold: the lift is the
        // line integral, u(1) = u0 + x^2 - x0^2
        let mc = ChartDomain::unit_box(&["x"]);
        let gc = ChartDomain::unit_box(&["u"]);
        let sys = LiftSystem {
            alpha: vec![vec![parse_poly("2*x", &mc).unwrap().compile()]],
            coframe: vec![vec![parse_poly("1", &gc).unwrap().compile()]],
        };
        let (end, est) = sys
            .integrate_polyline_with_estimate(&[vec![0.25], vec![1.0]], &[0.5], 1e-3)
            .unwrap();
        let exact = 0.5 + 1.0 - 0.0625;
        assert!((end[0] - exact).abs() < 1e-12);
        assert!(est < 1e-12);
    }
}
