//! Smith normal form over the integers with tracked unimodular transforms.

use crate::{Error, Result};

type Matrix = Vec<Vec<i128>>;

/// `u * a * v = d` with `d` diagonal, `d[i] | d[i+1]`, `u` and `v`
/// unimodular and their inverses kept alongside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    pub diagonal: Vec<i128>,
    pub rank: usize,
    pub u: Matrix,
    pub u_inv: Matrix,
    pub v: Matrix,
    pub v_inv: Matrix,
}

fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn axpy(q: i128, x: i128, y: i128) -> Result<i128> {
    // y - q x
    q.checked_mul(x).and_then(|p| y.checked_sub(p)).ok_or(Error::Overflow)
}

struct State {
    d: Matrix,
    u: Matrix,
    u_inv: Matrix,
    v: Matrix,
    v_inv: Matrix,
}

impl State {
    /// Row `i` minus `q` times row `t`.
    fn row_op(&mut self, i: usize, t: usize, q: i128) -> Result<()> {
        if q == 0 {
            return Ok(());
        }
        for m in [&mut self.d, &mut self.u] {
            for j in 0..m[i].len() {
                m[i][j] = axpy(q, m[t][j], m[i][j])?;
            }
        }
        for row in self.u_inv.iter_mut() {
            row[t] = axpy(-q, row[i], row[t])?;
        }
        Ok(())
    }

    /// Column `j` minus `q` times column `t`.
    fn col_op(&mut self, j: usize, t: usize, q: i128) -> Result<()> {
        if q == 0 {
            return Ok(());
        }
        for m in [&mut self.d, &mut self.v] {
            for row in m.iter_mut() {
                row[j] = axpy(q, row[t], row[j])?;
            }
        }
        let n = self.v_inv[t].len();
        for c in 0..n {
            self.v_inv[t][c] = axpy(-q, self.v_inv[j][c], self.v_inv[t][c])?;
        }
        Ok(())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap(a, b);
        self.u.swap(a, b);
        for row in self.u_inv.iter_mut() {
            row.swap(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for row in self.d.iter_mut().chain(self.v.iter_mut()) {
            row.swap(a, b);
        }
        self.v_inv.swap(a, b);
    }

    fn negate_row(&mut self, t: usize) {
        for x in self.d[t].iter_mut().chain(self.u[t].iter_mut()) {
            *x = -*x;
        }
        for row in self.u_inv.iter_mut() {
            row[t] = -row[t];
        }
    }
}

pub fn smith_normal_form(a: &[Vec<i64>], cols: usize) -> Result<SmithForm> {
    let rows = a.len();
    let mut s = State {
        d: a.iter().map(|r| r.iter().map(|&x| i128::from(x)).collect()).collect(),
        u: identity(rows),
        u_inv: identity(rows),
        v: identity(cols),
        v_inv: identity(cols),
    };
    let steps = rows.min(cols);
    let mut rank = 0;
    for t in 0..steps {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = s.d[i][j];
                    if x != 0 && pivot.map_or(true, |(pi, pj)| x.abs() < s.d[pi][pj].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            s.swap_rows(t, pi);
            s.swap_cols(t, pj);
            let p = s.d[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = s.d[i][t] / p;
                s.row_op(i, t, q)?;
                clean &= s.d[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = s.d[t][j] / p;
                s.col_op(j, t, q)?;
                clean &= s.d[t][j] == 0;
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| s.d[i][j] % p != 0));
            if let Some(i) = bad {
                s.row_op(t, i, -1)?;
                continue;
            }
            break;
        }
        if s.d[t][t] == 0 {
            break;
        }
        if s.d[t][t] < 0 {
            s.negate_row(t);
        }
        rank = t + 1;
    }
    let diagonal = (0..steps).map(|t| s.d[t][t]).collect();
    Ok(SmithForm {
        rows,
        cols,
        diagonal,
        rank,
        u: s.u,
        u_inv: s.u_inv,
        v: s.v,
        v_inv: s.v_inv,
    })
}

impl SmithForm {
    /// Integer basis of the kernel: columns of `v` past the rank.
    pub fn kernel_basis(&self) -> Vec<Vec<i128>> {
        (self.rank..self.cols)
            .map(|j| (0..self.cols).map(|i| self.v[i][j]).collect())
            .collect()
    }

    /// Nontrivial invariant factors (torsion coefficients of the cokernel).
    pub fn torsion(&self) -> Vec<i128> {
        self.diagonal[..self.rank].iter().copied().filter(|&d| d > 1).collect()
    }
}

pub fn multiply(a: &[Vec<i128>], b: &[Vec<i128>], inner: usize, cols: usize) -> Vec<Vec<i128>> {
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: &[Vec<i64>], cols: usize) -> SmithForm {
        let s = smith_normal_form(a, cols).unwrap();
        let rows = a.len();
        let wide: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let d = multiply(&multiply(&s.u, &wide, rows, cols), &s.v, cols, cols);
        for i in 0..rows {
            for j in 0..cols {
                let expected = if i == j { s.diagonal[i] } else { 0 };
                assert_eq!(d[i][j], expected);
            }
        }
        assert_eq!(multiply(&s.u, &s.u_inv, rows, rows), identity(rows));
        assert_eq!(multiply(&s.v, &s.v_inv, cols, cols), identity(cols));
        for w in s.diagonal[..s.rank].windows(2) {
            assert_eq!(w[1] % w[0], 0);
        }
        s
    }

    #[test]
    fn small_matrices() {
        let s = check(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]], 3);
        assert_eq!(s.diagonal, vec![2, 6, 12]);
        let s = check(&[vec![1, 2], vec![2, 4], vec![3, 6]], 2);
        assert_eq!(s.rank, 1);
        assert_eq!(s.kernel_basis().len(), 1);
        check(&[vec![0, 0], vec![0, 0]], 2);
        check(&[vec![2, 3]], 2);
    }

    #[test]
    fn torsion_of_projective_plane_like_matrix() {
        // boundary with a doubled edge
        let s = check(&[vec![2], vec![0]], 1);
        assert_eq!(s.torsion(), vec![2]);
    }
}
