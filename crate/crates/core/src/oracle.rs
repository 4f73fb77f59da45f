//! Dense reference: the lattice Hamiltonian as an explicit matrix and a
//! Householder + implicit QL symmetric eigensolver.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::operators::{Backend, Hamiltonian, HamiltonianSpec};

pub const MAX_DENSE_DIM: usize = 5000;

/// Square matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseOperator {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim > MAX_DENSE_DIM {
            return Err(Error::TooLarge {
                dim,
                limit: MAX_DENSE_DIM,
            });
        }
        if dim == 0 || entries.len() != dim * dim {
            return Err(invalid("entries", format!("need {dim}x{dim} values")));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest `|A_ij - A_ji|` and where it occurs.
    pub fn asymmetry(&self) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let gap = (self.get(i, j) - self.get(j, i)).abs();
                if gap > worst.0 {
                    worst = (gap, i, j);
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Column `j` is `H e_j`.
pub fn assemble_dense(spec: &HamiltonianSpec, grid: &Grid) -> Result<DenseOperator> {
    let n = grid.len();
    if n > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            dim: n,
            limit: MAX_DENSE_DIM,
        });
    }
    let ham = Hamiltonian::new(spec, grid, Backend::Direct)?;
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let e = GridFunction::from_raw(*grid, e);
            ham.apply(&e).map(GridFunction::into_values)
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            entries[i * n + j] = *v;
        }
    }
    DenseOperator::new(n, entries)
}

#[derive(Debug, Clone)]
pub struct DenseEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[i]` has unit Euclidean norm.
    pub vectors: Vec<Vec<f64>>,
}

/// Lowest `n` eigenpairs of a symmetric matrix.
pub fn dense_eigensolve(a: &DenseOperator, n: usize) -> Result<DenseEigen> {
    let dim = a.dim;
    if n == 0 || n > dim {
        return Err(invalid("n", format!("must be in 1..={dim}")));
    }
    let (gap, row, col) = a.asymmetry();
    if gap > 1e-12 * a.max_abs() {
        return Err(Error::InvalidMatrix { row, col, gap });
    }
    let mut v = a.entries.clone();
    let mut d = vec![0.0; dim];
    let mut e = vec![0.0; dim];
    tred2(dim, &mut v, &mut d, &mut e);
    // rows of `vt` are the eigenvector columns of `v`
    let mut vt = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            vt[j * dim + i] = v[i * dim + j];
        }
    }
    drop(v);
    tql2(dim, &mut vt, &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    order.truncate(n);
    Ok(DenseEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| vt[i * dim..(i + 1) * dim].to_vec())
            .collect(),
    })
}

/// Householder reduction to tridiagonal form, accumulating the transform in
/// `v` (row-major). On exit `d` is the diagonal and `e[1..]` the
/// subdiagonal.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; rotations are applied to the
/// rows of `vt`.
fn tql2(n: usize, vt: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(invalid("matrix", "QL iteration did not converge"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_next = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_next.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
