use num_complex::Complex64 as C64;

/// Real sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Duplicates are summed, exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] != 0.0).collect();
        let rows: Vec<usize> = keep.iter().map(|&k| rows[k]).collect();
        let cols: Vec<usize> = keep.iter().map(|&k| cols[k]).collect();
        let vals: Vec<f64> = keep.iter().map(|&k| vals[k]).collect();
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .binary_search(&col)
            .map(|k| self.vals[range.start + k])
            .unwrap_or(0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v)).collect())
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &SparseOperator) -> Self {
        let mut triplets = Vec::new();
        for (r, k, a) in self.triplets() {
            for j in rhs.row_ptr[k]..rhs.row_ptr[k + 1] {
                triplets.push((r, rhs.cols[j], a * rhs.vals[j]));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scaled_sum(&self, a: f64, other: &SparseOperator, b: f64) -> Self {
        let t = self
            .triplets()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.triplets().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        Self::from_triplets(self.dim, t)
    }

    pub fn is_symmetric(&self) -> bool {
        self.triplets().all(|(r, c, v)| self.entry(c, r) == v)
    }

    /// Upper bound on the induced 2-norm, `sqrt(||A||_1 ||A||_inf)`.
    pub fn norm_bound(&self) -> f64 {
        let mut col_sums = vec![0.0; self.dim];
        let mut row_max: f64 = 0.0;
        for r in 0..self.dim {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k].abs();
                col_sums[self.cols[k]] += self.vals[k].abs();
            }
            row_max = row_max.max(s);
        }
        let col_max = col_sums.into_iter().fold(0.0, f64::max);
        (row_max * col_max).sqrt()
    }

    /// `y += coeff * A x`
    #[inline]
    pub fn apply_add(&self, coeff: C64, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            *out += coeff * acc;
        }
    }
}
