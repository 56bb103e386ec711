//! Profile (skyline) Cholesky factorization with reverse Cuthill-McKee
//! node ordering.

use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal are treated as zero.
const PIVOT_TOL: f64 = 1e-10;

/// Reverse Cuthill-McKee permutation of a graph given by sorted adjacency
/// lists. Returns `order` with `order[new] = old`.
pub(crate) fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree[v], v)).unwrap();
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_unstable_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// Lower-triangular profile storage: row `i` holds columns `first[i]..=i`.
#[derive(Debug, Clone)]
pub(crate) struct SkylineLayout {
    first: Vec<usize>,
    start: Vec<usize>,
}

impl SkylineLayout {
    pub fn new(first: Vec<usize>) -> SkylineLayout {
        let mut start = Vec::with_capacity(first.len() + 1);
        let mut offset = 0;
        for (i, &f) in first.iter().enumerate() {
            start.push(offset);
            offset += i - f + 1;
        }
        start.push(offset);
        SkylineLayout { first, start }
    }

    pub fn size(&self) -> usize {
        self.first.len()
    }

    pub fn storage(&self) -> usize {
        *self.start.last().unwrap_or(&0)
    }

    /// Storage index of `(i, j)` with `first[i] <= j <= i`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && j >= self.first[i]);
        self.start[i] + j - self.first[i]
    }

    /// In-place LLᵀ factorization of a symmetric positive definite matrix.
    pub fn factor(&self, values: &mut [f64]) -> Result<()> {
        for i in 0..self.size() {
            let fi = self.first[i];
            let row_i = self.start[i];
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let a = &values[row_i + k0 - fi..row_i + j - fi];
                let row_j = self.start[j];
                let b = &values[row_j + k0 - fj..row_j + j - fj];
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let diag_j = values[row_j + j - fj];
                values[row_i + j - fi] = (values[row_i + j - fi] - dot) / diag_j;
            }
            let diag = row_i + i - fi;
            let original = values[diag];
            let sq: f64 = values[row_i..diag].iter().map(|x| x * x).sum();
            let pivot = original - sq;
            if !(pivot > PIVOT_TOL * original.abs()) || !pivot.is_finite() {
                return Err(Error::Singular { equation: i, pivot });
            }
            values[diag] = pivot.sqrt();
        }
        Ok(())
    }

    /// Solve `L Lᵀ x = b` in place using factored values.
    pub fn solve(&self, values: &[f64], x: &mut [f64]) {
        let n = self.size();
        for i in 0..n {
            let fi = self.first[i];
            let row = &values[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&x[fi..i]).map(|(l, v)| l * v).sum();
            x[i] = (x[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &values[self.start[i]..self.start[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (l, v) in row[..i - fi].iter().zip(&mut x[fi..i]) {
                *v -= l * xi;
            }
        }
    }
}
