//! Sparse LDLᵀ factorisation on a reverse Cuthill-McKee envelope.
//!
//! Both solvers share the same symbolic phase: a fixed RCM ordering of the
//! matrix graph followed by a row-oriented envelope (skyline) LDLᵀ. No
//! dynamic pivoting is performed, so factorisation and solve are fully
//! deterministic. The SPD path rejects any nonpositive pivot; the indefinite
//! path accepts pivots of either sign and rejects vanishing ones, which covers
//! the quasi-definite saddle-point systems produced by the stabilised mixed
//! formulations.

use crate::error::{Error, Result};
use crate::fem::{norm2, SparseSymMatrix};

pub const DEFAULT_SPD_TOL: f64 = 1e-12;
pub const DEFAULT_INDEFINITE_TOL: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub dim: usize,
    /// Stored strictly-lower entries of the envelope factor.
    pub factor_entries: usize,
    pub refinement_steps: usize,
    pub relative_residual: f64,
    /// True when every pivot was positive.
    pub positive_definite: bool,
    pub negative_pivots: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PivotPolicy {
    PositiveOnly,
    NonZero,
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn rcm_ordering(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.dim();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, mask: &[bool]| -> Vec<Vec<usize>> {
        let mut seen = mask.to_vec();
        seen[start] = true;
        let mut levels = vec![vec![start]];
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                for &w in &adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    };

    while order.len() < n {
        let mut start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("unvisited vertex remains");
        // pseudo-peripheral start vertex
        let mut eccentricity = bfs_levels(start, &visited).len();
        for _ in 0..8 {
            let levels = bfs_levels(start, &visited);
            let candidate = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| (degree[v], v))
                .unwrap();
            let ecc = bfs_levels(candidate, &visited).len();
            if ecc > eccentricity {
                eccentricity = ecc;
                start = candidate;
            } else {
                break;
            }
        }

        let begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = begin;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adjacency[v]
                .iter()
                .copied()
                .filter(|&w| !visited[w])
                .collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

struct EnvelopeLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeLdl {
    fn factorize(a: &SparseSymMatrix, policy: PivotPolicy) -> Result<Self> {
        let n = a.dim();
        let perm = rcm_ordering(a);
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }

        let first: Vec<usize> = (0..n)
            .map(|i| {
                a.row(perm[i])
                    .map(|(j, _)| inverse[j])
                    .filter(|&j| j <= i)
                    .min()
                    .unwrap_or(i)
            })
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];

        for i in 0..n {
            let fi = first[i];
            let mut a_ii = 0.0;
            for (j, v) in a.row(perm[i]) {
                let jn = inverse[j];
                if jn < i {
                    lower[start[i] + jn - fi] += v;
                } else if jn == i {
                    a_ii = v;
                }
            }
            // row i holds g_ij = L_ij d_j until it is complete; earlier rows hold L
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (done, rest) = lower.split_at_mut(start[i]);
                let row_j = &done[start[j] + k0 - fj..start[j] + j - fj];
                let row_i = &mut rest[..i - fi];
                let dot: f64 = row_i[k0 - fi..j - fi]
                    .iter()
                    .zip(row_j)
                    .map(|(x, y)| x * y)
                    .sum();
                row_i[j - fi] -= dot;
            }
            let mut d = a_ii;
            for j in fi..i {
                let g = lower[start[i] + j - fi];
                let l = g / diag[j];
                d -= g * l;
                lower[start[i] + j - fi] = l;
            }
            let row_scale = a.row(perm[i]).fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
            match policy {
                PivotPolicy::PositiveOnly => {
                    if !(d > 1e-14 * row_scale) {
                        return Err(Error::NotPositiveDefinite {
                            pivot: i,
                            dof: perm[i],
                            value: d,
                        });
                    }
                }
                PivotPolicy::NonZero => {
                    if !(d.abs() > 1e-14 * row_scale) {
                        return Err(Error::Singular {
                            pivot: i,
                            dof: perm[i],
                            value: d,
                        });
                    }
                }
            }
            diag[i] = d;
        }
        Ok(Self {
            perm,
            first,
            start,
            lower,
            diag,
        })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let dot: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= dot;
        }
        for (v, d) in y.iter_mut().zip(&self.diag) {
            *v /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (v, l) in y[fi..i].iter_mut().zip(row) {
                *v -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

fn residual(a: &SparseSymMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

fn solve_with(
    a: &SparseSymMatrix,
    b: &[f64],
    tol: f64,
    policy: PivotPolicy,
) -> Result<(Vec<f64>, SolveReport)> {
    if a.dim() != b.len() {
        return Err(Error::Usage(format!(
            "matrix of size {} with rhs of length {}",
            a.dim(),
            b.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "solver tolerance must be positive, got {tol}"
        )));
    }
    let factor = EnvelopeLdl::factorize(a, policy)?;
    let b_norm = norm2(b);
    let mut x = factor.solve(b);
    let mut steps = 0;
    let mut rel = if b_norm == 0.0 {
        0.0
    } else {
        norm2(&residual(a, &x, b)) / b_norm
    };
    while rel > tol && steps < MAX_REFINEMENT_STEPS {
        let r = residual(a, &x, b);
        let dx = factor.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        steps += 1;
        rel = norm2(&residual(a, &x, b)) / b_norm;
    }
    if !(rel <= tol) {
        return Err(Error::NotConverged { residual: rel, tol });
    }
    let negative_pivots = factor.diag.iter().filter(|&&d| d < 0.0).count();
    let report = SolveReport {
        dim: a.dim(),
        factor_entries: factor.lower.len(),
        refinement_steps: steps,
        relative_residual: rel,
        positive_definite: negative_pivots == 0,
        negative_pivots,
    };
    Ok((x, report))
}

/// Solves an SPD system; fails with [`Error::NotPositiveDefinite`] on the
/// first nonpositive pivot.
pub fn solve_spd(a: &SparseSymMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveReport)> {
    solve_with(a, b, tol, PivotPolicy::PositiveOnly)
}

/// Solves a nonsingular symmetric (possibly indefinite) system; fails with
/// [`Error::Singular`] naming the first vanishing pivot.
pub fn solve_symmetric_indefinite(
    m: &SparseSymMatrix,
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_with(m, b, tol, PivotPolicy::NonZero)
}
