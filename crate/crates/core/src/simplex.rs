//! Bundled dense-tableau simplex solver.
//!
//! Two-phase primal simplex on the standard form `min c.x, A x = b, x >= 0`
//! with Bland's anti-cycling rule and a 1e-9 pivot tolerance. On top of it,
//! [`solve_minimax`] solves the uniform-error fitting problem
//!
//! ```text
//! min t  subject to  |target_i - design_i . coeffs| <= t
//! ```
//!
//! by passing the standard-form dual to the tableau (two nonnegative
//! multipliers per sample point, one equality per free coefficient plus the
//! normalization row) and reading the free primal variables back off the
//! simplex multipliers. The dual keeps the tableau at `K+1` rows instead of
//! `2N`, which is what makes desk-scale sweeps cheap; the special structure of
//! the constraint matrix is not otherwise exploited.

use thiserror::Error;

/// Pivot tolerance: entries smaller than this are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;

/// Phase-1 residual above which the program is declared infeasible.
const FEASIBILITY_TOL: f64 = 1e-7;

/// Default iteration cap across both phases.
pub const DEFAULT_MAX_ITERATIONS: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("simplex hit the iteration cap after {0} pivots")]
    Stall(usize),
    #[error("linear program infeasible (phase-1 residual {0:.3e})")]
    Infeasible(f64),
    #[error("linear program unbounded")]
    Unbounded,
}

/// Optimal basic solution of a standard-form program.
#[derive(Debug, Clone)]
pub struct StandardSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex multipliers, one per input row (zero for redundant rows).
    pub multipliers: Vec<f64>,
    pub iterations: usize,
}

struct Tableau {
    /// `rows[i]` holds structural columns, artificial columns, then rhs.
    rows: Vec<Vec<f64>>,
    /// Original row index behind each physical row (rows can be dropped).
    origin: Vec<usize>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    n_struct: usize,
    n_rows_orig: usize,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n_struct + self.n_rows_orig + 1
    }

    fn rhs_col(&self) -> usize {
        self.n_struct + self.n_rows_orig
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        self.rows[row][col] = 1.0;
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.width() {
                self.rows[r][j] -= factor * self.rows[row][j];
            }
            self.rows[r][col] = 0.0;
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for j in 0..self.width() {
                self.obj[j] -= factor * self.rows[row][j];
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Pivot loop over the columns for which `allowed` holds. Entering
    /// columns follow Dantzig's most-negative rule until a streak of
    /// degenerate pivots threatens cycling, after which Bland's rule takes
    /// over for good and guarantees termination.
    fn run<F: Fn(usize) -> bool>(&mut self, allowed: F) -> Result<(), SimplexError> {
        let rhs = self.rhs_col();
        let streak_limit = 100 + self.rows.len();
        let mut bland = false;
        let mut degenerate_streak = 0usize;
        loop {
            let entering = if bland {
                (0..rhs).find(|&j| allowed(j) && self.obj[j] < -PIVOT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..rhs {
                    if !allowed(j) {
                        continue;
                    }
                    let r = self.obj[j];
                    if r < -PIVOT_TOL && best.is_none_or(|(_, br)| r < br) {
                        best = Some((j, r));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else { return Ok(()) };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rows[r][rhs] / a;
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - PIVOT_TOL * ratio.abs().max(1.0)
                            || ((ratio - bratio).abs() <= PIVOT_TOL * ratio.abs().max(1.0)
                                && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((row, step)) = leaving else {
                return Err(SimplexError::Unbounded);
            };
            self.pivot(row, col);
            if step.abs() <= PIVOT_TOL {
                degenerate_streak += 1;
                if degenerate_streak > streak_limit {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(SimplexError::Stall(self.iterations));
            }
        }
    }
}

/// Solves `min c.x` subject to `A x = b`, `x >= 0`. Requires `b >= 0`
/// componentwise (negate rows beforehand).
pub fn solve_standard(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    max_iterations: usize,
) -> Result<StandardSolution, SimplexError> {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m, "rhs length must match row count");
    assert!(b.iter().all(|&v| v >= 0.0), "standard form needs b >= 0");

    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, arow) in a.iter().enumerate() {
        assert_eq!(arow.len(), n, "row {i} has wrong width");
        let mut row = vec![0.0; width];
        row[..n].copy_from_slice(arow);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
        rows.push(row);
    }

    // Phase 1: minimize the sum of artificials. Reduced costs of structural
    // columns start at -(column sum); artificial columns start at zero.
    let mut obj = vec![0.0; width];
    for j in 0..n {
        obj[j] = -rows.iter().map(|r| r[j]).sum::<f64>();
    }
    obj[width - 1] = -b.iter().sum::<f64>();

    let mut t = Tableau {
        rows,
        origin: (0..m).collect(),
        basis: (n..n + m).collect(),
        obj,
        n_struct: n,
        n_rows_orig: m,
        iterations: 0,
        max_iterations,
    };

    t.run(|j| j < n)?;
    let rhs = t.rhs_col();
    let phase1 = -t.obj[rhs];
    if phase1 > FEASIBILITY_TOL {
        return Err(SimplexError::Infeasible(phase1));
    }

    // Remove artificials from the basis: degenerate pivot where possible,
    // otherwise the row is redundant and is dropped.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[r][j].abs() > PIVOT_TOL) {
                t.pivot(r, j);
                r += 1;
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                t.origin.remove(r);
            }
        } else {
            r += 1;
        }
    }

    // Phase 2 objective rebuilt from the real costs.
    let mut obj = vec![0.0; t.width()];
    obj[..n].copy_from_slice(c);
    let rhs = t.rhs_col();
    for r in 0..t.rows.len() {
        let cb = c[t.basis[r]];
        if cb == 0.0 {
            continue;
        }
        for j in 0..t.width() {
            obj[j] -= cb * t.rows[r][j];
        }
    }
    t.obj = obj;
    t.run(|j| j < n)?;

    // Basic values and multipliers re-derived from the final basis by a
    // fresh factorization of the original columns: tableau entries carry the
    // rounding of every pivot, which is too coarse for ill-conditioned
    // instances. The tableau reads remain as a fallback.
    let k = t.rows.len();
    let mut basis_matrix = vec![vec![0.0; k]; k];
    for (l, &bi) in t.basis.iter().enumerate() {
        for (r, &oi) in t.origin.iter().enumerate() {
            basis_matrix[r][l] = if bi < n {
                a[oi][bi]
            } else if bi - n == oi {
                1.0
            } else {
                0.0
            };
        }
    }
    let b_rem: Vec<f64> = t.origin.iter().map(|&oi| b[oi]).collect();
    let c_b: Vec<f64> = t.basis.iter().map(|&bi| c[bi]).collect();

    let mut x = vec![0.0; n];
    match solve_dense(&basis_matrix, &b_rem) {
        Some(xb) => {
            for (l, &bi) in t.basis.iter().enumerate() {
                if bi < n {
                    x[bi] = xb[l];
                }
            }
        }
        None => {
            for (r, &bi) in t.basis.iter().enumerate() {
                if bi < n {
                    x[bi] = t.rows[r][rhs];
                }
            }
        }
    }
    let transpose: Vec<Vec<f64>> = (0..k)
        .map(|l| (0..k).map(|r| basis_matrix[r][l]).collect())
        .collect();
    let mut multipliers = vec![0.0; m];
    match solve_dense(&transpose, &c_b) {
        Some(pi) => {
            for (r, &oi) in t.origin.iter().enumerate() {
                multipliers[oi] = pi[r];
            }
        }
        None => {
            for i in 0..m {
                multipliers[i] = -t.obj[n + i];
            }
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(StandardSolution {
        x,
        objective,
        multipliers,
        iterations: t.iterations,
    })
}

/// Dense Gaussian elimination with partial pivoting; `None` on (near)
/// singular systems.
fn solve_dense(matrix: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = matrix.len();
    let scale = matrix
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |s, v| s.max(v.abs()));
    let mut m: Vec<Vec<f64>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, &r)| {
            let mut v = row.clone();
            v.push(r);
            v
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot_row][col].abs() <= 1e-13 * scale.max(1.0) {
            return None;
        }
        m.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..=n {
                let v = m[col][j];
                m[row][j] -= factor * v;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut v = m[row][n];
        for j in row + 1..n {
            v -= m[row][j] * x[j];
        }
        x[row] = v / m[row][row];
    }
    Some(x)
}

/// Optimal uniform-error fit of free coefficients against a design matrix.
#[derive(Debug, Clone)]
pub struct MinimaxSolution {
    pub coeffs: Vec<f64>,
    /// `max_i |target_i - design_i . coeffs|` for the returned coefficients.
    pub error: f64,
    pub iterations: usize,
}

/// Minimizes `max_i |targets[i] - design[i] . coeffs|` over free `coeffs`.
pub fn solve_minimax(
    design: &[Vec<f64>],
    targets: &[f64],
    max_iterations: usize,
) -> Result<MinimaxSolution, SimplexError> {
    let n_rows = targets.len();
    assert_eq!(design.len(), n_rows, "design and targets disagree");
    assert!(n_rows > 0, "minimax fit needs at least one sample");
    let n_coeffs = design[0].len();

    // Dual of (min t, |y - D c| <= t): two nonnegative weights per sample,
    // one zero-sum equality per coefficient, total weight one.
    let m = n_coeffs + 1;
    let cols = 2 * n_rows;
    let mut a = vec![vec![0.0; cols]; m];
    for (i, row) in design.iter().enumerate() {
        assert_eq!(row.len(), n_coeffs, "design row {i} has wrong width");
        for (k, &dik) in row.iter().enumerate() {
            a[k][2 * i] = dik;
            a[k][2 * i + 1] = -dik;
        }
    }
    for i in 0..n_rows {
        a[n_coeffs][2 * i] = 1.0;
        a[n_coeffs][2 * i + 1] = 1.0;
    }
    let mut b = vec![0.0; m];
    b[n_coeffs] = 1.0;
    let mut c = vec![0.0; cols];
    for (i, &y) in targets.iter().enumerate() {
        c[2 * i] = y;
        c[2 * i + 1] = -y;
    }

    let sol = solve_standard(&a, &b, &c, max_iterations)?;
    let coeffs = sol.multipliers[..n_coeffs].to_vec();
    // The reported error is recomputed from the returned coefficients, so it
    // is a true bound even when multiplier recovery loses a few digits on
    // near-collinear designs.
    let mut error = 0.0f64;
    for (row, &y) in design.iter().zip(targets) {
        let fitted: f64 = row.iter().zip(&coeffs).map(|(d, cc)| d * cc).sum();
        error = error.max((y - fitted).abs());
    }
    Ok(MinimaxSolution {
        coeffs,
        error,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_form_textbook_max() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  (optimum 36)
        // In standard min form with slacks appended.
        let a = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 1.0, 0.0],
            vec![3.0, 2.0, 0.0, 0.0, 1.0],
        ];
        let b = vec![4.0, 12.0, 18.0];
        let c = vec![-3.0, -5.0, 0.0, 0.0, 0.0];
        let sol = solve_standard(&a, &b, &c, 1000).unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn standard_form_equalities_need_phase_one() {
        // min x + y s.t. x + y = 2, x - y = 0  => x = y = 1
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let b = vec![2.0, 0.0];
        let c = vec![1.0, 1.0];
        let sol = solve_standard(&a, &b, &c, 1000).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x = 1 and x = 2 simultaneously.
        let a = vec![vec![1.0], vec![1.0]];
        let b = vec![1.0, 2.0];
        let c = vec![0.0];
        assert!(matches!(
            solve_standard(&a, &b, &c, 1000),
            Err(SimplexError::Infeasible(_))
        ));
    }

    #[test]
    fn redundant_rows_get_zero_multiplier() {
        // Second row duplicates the first.
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![1.0, 1.0];
        let c = vec![1.0, 2.0];
        let sol = solve_standard(&a, &b, &c, 1000).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert_eq!(sol.multipliers[1], 0.0);
    }

    #[test]
    fn minimax_constant_fit() {
        // Best constant for {1, 3} is 2 with error 1.
        let design = vec![vec![1.0], vec![1.0]];
        let sol = solve_minimax(&design, &[1.0, 3.0], 1000).unwrap();
        assert!((sol.coeffs[0] - 2.0).abs() < 1e-9);
        assert!((sol.error - 1.0).abs() < 1e-9);
    }

    #[test]
    fn minimax_affine_equioscillation() {
        // Data (0,0), (1,1), (2,0): best affine fit has error 1/2.
        let design = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let sol = solve_minimax(&design, &[0.0, 1.0, 0.0], 1000).unwrap();
        assert!((sol.error - 0.5).abs() < 1e-9, "error {}", sol.error);
    }

    #[test]
    fn minimax_exact_interpolation() {
        // Two free coefficients, two samples: error 0.
        let design = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let sol = solve_minimax(&design, &[2.0, 5.0], 1000).unwrap();
        assert!(sol.error < 1e-10);
        assert!((sol.coeffs[0] - 2.0).abs() < 1e-8);
        assert!((sol.coeffs[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn minimax_zero_targets_zero_coeffs_error() {
        let design = vec![vec![1.0, 0.5], vec![0.3, 1.0], vec![1.0, 1.0]];
        let sol = solve_minimax(&design, &[0.0, 0.0, 0.0], 1000).unwrap();
        assert_eq!(sol.error, 0.0);
    }

    #[test]
    fn minimax_matches_brute_force_on_random_instances() {
        // Coarse grid search as an independent oracle for one coefficient.
        let design: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![-1.0]];
        let targets = [0.3, 1.1, 0.2];
        let sol = solve_minimax(&design, &targets, 1000).unwrap();
        let mut best = f64::INFINITY;
        let mut k = -3.0;
        while k <= 3.0 {
            let e = design
                .iter()
                .zip(&targets)
                .map(|(d, y)| (y - d[0] * k).abs())
                .fold(0.0f64, f64::max);
            best = best.min(e);
            k += 1e-4;
        }
        assert!(sol.error <= best + 1e-3, "lp {} vs grid {best}", sol.error);
    }
}
