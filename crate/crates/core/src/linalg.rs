//! Dense linear algebra over a finite field.

use crate::field::{Fe, Field};

/// Rank by Gaussian elimination. Rows may have different lengths only if
/// all have the given column count.
pub fn rank(field: &Field, rows: &[Vec<Fe>]) -> usize {
    let mut m: Vec<Vec<Fe>> = rows.to_vec();
    row_reduce(field, &mut m)
}

/// Reduces in place to row echelon form and returns the rank.
pub fn row_reduce(field: &Field, m: &mut [Vec<Fe>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = field.inv(m[r][c]).unwrap();
        for k in c..cols {
            m[r][k] = field.mul(m[r][k], inv);
        }
        let (top, bottom) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in bottom.iter_mut() {
            let factor = row[c];
            if factor.is_zero() {
                continue;
            }
            let nf = field.neg(factor);
            for k in c..cols {
                if !pivot_row[k].is_zero() {
                    row[k] = field.add(row[k], field.mul(nf, pivot_row[k]));
                }
            }
        }
        r += 1;
    }
    r
}

/// Incremental echelon basis: rows are inserted one at a time and reduced
/// against the existing pivots.
pub struct EchelonBasis {
    field: Field,
    cols: usize,
    rows: Vec<(usize, Vec<Fe>)>,
}

impl EchelonBasis {
    pub fn new(field: &Field, cols: usize) -> EchelonBasis {
        EchelonBasis {
            field: field.clone(),
            cols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts a row; returns whether it increased the rank.
    pub fn insert(&mut self, mut v: Vec<Fe>) -> bool {
        assert_eq!(v.len(), self.cols);
        let f = &self.field;
        for (p, row) in &self.rows {
            let c = v[*p];
            if c.is_zero() {
                continue;
            }
            let nc = f.neg(c);
            for k in *p..self.cols {
                if !row[k].is_zero() {
                    v[k] = f.add(v[k], f.mul(nc, row[k]));
                }
            }
        }
        let Some(p) = v.iter().position(|a| !a.is_zero()) else {
            return false;
        };
        let inv = f.inv(v[p]).unwrap();
        for a in v.iter_mut().skip(p) {
            *a = f.mul(*a, inv);
        }
        // reduce existing rows at the new pivot to keep the basis reduced
        for (_, row) in self.rows.iter_mut() {
            let c = row[p];
            if c.is_zero() {
                continue;
            }
            let nc = f.neg(c);
            for k in p..self.cols {
                if !v[k].is_zero() {
                    row[k] = f.add(row[k], f.mul(nc, v[k]));
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

/// A nonzero vector `v` with `m v = 0` for a square matrix, if one exists.
pub fn kernel_vector(field: &Field, m: &[Vec<Fe>]) -> Option<Vec<Fe>> {
    let n = m.first().map_or(0, |r| r.len());
    let mut a = m.to_vec();
    let r = row_reduce_full(field, &mut a);
    let pivots: Vec<usize> = a
        .iter()
        .take(r)
        .map(|row| row.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut v = vec![Fe::ZERO; n];
    v[free] = Fe::ONE;
    for (row, &pc) in a.iter().zip(&pivots) {
        v[pc] = field.neg(row[free]);
    }
    Some(v)
}

/// Reduced row echelon form; returns the rank.
fn row_reduce_full(field: &Field, m: &mut [Vec<Fe>]) -> usize {
    let r = row_reduce(field, m);
    for i in (0..r).rev() {
        let p = m[i].iter().position(|x| !x.is_zero()).unwrap();
        for k in 0..i {
            let c = m[k][p];
            if c.is_zero() {
                continue;
            }
            let nc = field.neg(c);
            let row_i = m[i].clone();
            for (dst, src) in m[k].iter_mut().zip(&row_i) {
                *dst = field.add(*dst, field.mul(nc, *src));
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn incremental_rank_matches_batch(entries in prop::collection::vec(0u16..9, 0..40)) {
            let f = Field::new(3, 2).unwrap();
            let rows: Vec<Vec<Fe>> = entries.chunks(4).filter(|c| c.len() == 4)
                .map(|c| c.iter().map(|&x| Fe(x)).collect()).collect();
            let mut e = EchelonBasis::new(&f, 4);
            for r in &rows {
                e.insert(r.clone());
            }
            prop_assert_eq!(e.rank(), rank(&f, &rows));
            prop_assert!(e.rank() <= 4);
        }

        #[test]
        fn kernel_vectors_are_in_kernel(entries in prop::collection::vec(0u16..4, 9)) {
            let f = Field::new(2, 2).unwrap();
            let m: Vec<Vec<Fe>> = entries.chunks(3).map(|c| c.iter().map(|&x| Fe(x)).collect()).collect();
            match kernel_vector(&f, &m) {
                Some(v) => {
                    prop_assert!(v.iter().any(|a| !a.is_zero()));
                    for row in &m {
                        let s = row.iter().zip(&v).fold(Fe::ZERO, |acc, (a, b)| f.add(acc, f.mul(*a, *b)));
                        prop_assert!(s.is_zero());
                    }
                }
                None => prop_assert_eq!(rank(&f, &m), 3),
            }
        }
    }
}
