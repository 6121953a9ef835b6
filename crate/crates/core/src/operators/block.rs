use nalgebra::DMatrix;

use crate::parallel::{self, Execution};
use crate::{Error, Result};

/// Periodic block-banded matrix: `n × n` blocks of size `s × s`, with nonzero blocks
/// only at cell offsets `-w..=w` (taken modulo `n`).
///
/// When `2w + 1 > n` several offsets address the same block column; their
/// contributions add.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedOperator {
    n: usize,
    s: usize,
    w: usize,
    /// `[cell][offset + w][row][col]`.
    blocks: Vec<f64>,
}

impl BandedOperator {
    pub fn zeros(n: usize, s: usize, w: usize) -> Self {
        BandedOperator {
            n,
            s,
            w,
            blocks: vec![0.0; n * (2 * w + 1) * s * s],
        }
    }

    pub fn identity(n: usize, s: usize) -> Self {
        let mut m = Self::zeros(n, s, 0);
        for j in 0..n {
            for a in 0..s {
                *m.entry_mut(j, 0, a, a) = 1.0;
            }
        }
        m
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.s
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    pub fn dim(&self) -> usize {
        self.n * self.s
    }

    fn index(&self, j: usize, p: isize, a: usize, b: usize) -> usize {
        debug_assert!(p.unsigned_abs() <= self.w);
        let o = (p + self.w as isize) as usize;
        ((j * (2 * self.w + 1) + o) * self.s + a) * self.s + b
    }

    /// Entry `(a, b)` of the block coupling cell `j` to cell `j + p`.
    pub fn entry(&self, j: usize, p: isize, a: usize, b: usize) -> f64 {
        self.blocks[self.index(j, p, a, b)]
    }

    pub fn entry_mut(&mut self, j: usize, p: isize, a: usize, b: usize) -> &mut f64 {
        let i = self.index(j, p, a, b);
        &mut self.blocks[i]
    }

    fn col(&self, j: usize, p: isize) -> usize {
        (j as isize + p).rem_euclid(self.n as isize) as usize
    }

    fn widen(&self, w: usize) -> Self {
        if w == self.w {
            return self.clone();
        }
        let mut out = Self::zeros(self.n, self.s, w);
        let wi = self.w as isize;
        for j in 0..self.n {
            for p in -wi..=wi {
                for a in 0..self.s {
                    for b in 0..self.s {
                        *out.entry_mut(j, p, a, b) = self.entry(j, p, a, b);
                    }
                }
            }
        }
        out
    }

    pub fn apply_into(&self, exec: Execution, x: &[f64], y: &mut [f64]) {
        let (s, w) = (self.s, self.w as isize);
        parallel::for_each_chunk(exec, y, s, |j, yj| {
            yj.iter_mut().for_each(|v| *v = 0.0);
            for p in -w..=w {
                let c = self.col(j, p);
                let xc = &x[c * s..(c + 1) * s];
                let base = self.index(j, p, 0, 0);
                let blk = &self.blocks[base..base + s * s];
                for a in 0..s {
                    let row = &blk[a * s..(a + 1) * s];
                    let mut acc = 0.0;
                    for b in 0..s {
                        acc += row[b] * xc[b];
                    }
                    yj[a] += acc;
                }
            }
        });
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n, self.s, self.w);
        let w = self.w as isize;
        for j in 0..self.n {
            for p in -w..=w {
                let c = self.col(j, p);
                for a in 0..self.s {
                    for b in 0..self.s {
                        *out.entry_mut(c, -p, b, a) += self.entry(j, p, a, b);
                    }
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let s = self.s;
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        let w = self.w as isize;
        for j in 0..self.n {
            for p in -w..=w {
                let c = self.col(j, p);
                for a in 0..s {
                    for b in 0..s {
                        m[(j * s + a, c * s + b)] += self.entry(j, p, a, b);
                    }
                }
            }
        }
        m
    }

    fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let w = x.w.max(y.w);
        let mut out = x.widen(w);
        let yw = y.widen(w);
        for (o, v) in out.blocks.iter_mut().zip(&yw.blocks) {
            *o = a * *o + b * v;
        }
        out
    }

    fn compose(x: &Self, y: &Self) -> Self {
        let s = x.s;
        let w = x.w + y.w;
        let mut out = Self::zeros(x.n, s, w);
        let (xw, yw) = (x.w as isize, y.w as isize);
        for j in 0..x.n {
            for p in -xw..=xw {
                let c = x.col(j, p);
                for q in -yw..=yw {
                    for a in 0..s {
                        for m in 0..s {
                            let xv = x.entry(j, p, a, m);
                            if xv == 0.0 {
                                continue;
                            }
                            for b in 0..s {
                                *out.entry_mut(j, p + q, a, b) += xv * y.entry(c, q, m, b);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// A linear operator on `V_h` (or a product of copies of it).
#[derive(Clone, Debug)]
pub enum BlockOperator {
    Banded(BandedOperator),
    Dense(DMatrix<f64>),
}

impl BlockOperator {
    pub fn identity(n: usize, s: usize) -> Self {
        BlockOperator::Banded(BandedOperator::identity(n, s))
    }

    pub fn dim(&self) -> usize {
        match self {
            BlockOperator::Banded(b) => b.dim(),
            BlockOperator::Dense(d) => d.nrows(),
        }
    }

    pub fn is_banded(&self) -> bool {
        matches!(self, BlockOperator::Banded(_))
    }

    pub fn apply_into(&self, exec: Execution, x: &[f64], y: &mut [f64]) {
        match self {
            BlockOperator::Banded(b) => b.apply_into(exec, x, y),
            BlockOperator::Dense(d) => {
                let n = d.nrows();
                for (i, yi) in y.iter_mut().enumerate().take(n) {
                    let mut acc = 0.0;
                    for (jx, xv) in x.iter().enumerate() {
                        acc += d[(i, jx)] * xv;
                    }
                    *yi = acc;
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(Execution::default(), x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            BlockOperator::Banded(b) => b.to_dense(),
            BlockOperator::Dense(d) => d.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            BlockOperator::Banded(b) => BlockOperator::Banded(b.transpose()),
            BlockOperator::Dense(d) => BlockOperator::Dense(d.transpose()),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        if let (BlockOperator::Banded(a), BlockOperator::Banded(b)) = (self, other) {
            if a.s != b.s {
                return Err(Error::DimensionMismatch(format!(
                    "block sizes {} and {}",
                    a.s, b.s
                )));
            }
        }
        Ok(())
    }

    /// `a·self + b·other`.
    pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        x.check(y)?;
        Ok(match (x, y) {
            (BlockOperator::Banded(p), BlockOperator::Banded(q)) => {
                BlockOperator::Banded(BandedOperator::lin_comb(a, p, b, q))
            }
            _ => BlockOperator::Dense(x.to_dense() * a + y.to_dense() * b),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::lin_comb(1.0, self, 1.0, other)
    }

    pub fn scale(&self, c: f64) -> Self {
        match self {
            BlockOperator::Banded(b) => {
                let mut b = b.clone();
                b.blocks.iter_mut().for_each(|v| *v *= c);
                BlockOperator::Banded(b)
            }
            BlockOperator::Dense(d) => BlockOperator::Dense(d * c),
        }
    }

    /// `I + c·self`.
    pub fn shift_identity(&self, c: f64) -> Self {
        let id = match self {
            BlockOperator::Banded(b) => BlockOperator::identity(b.n, b.s),
            BlockOperator::Dense(d) => BlockOperator::Dense(DMatrix::identity(d.nrows(), d.nrows())),
        };
        Self::lin_comb(1.0, &id, c, self).expect("same dimension")
    }

    /// `self · other`. Banded products whose band would cover every cell become dense.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(match (self, other) {
            (BlockOperator::Banded(p), BlockOperator::Banded(q)) if 2 * (p.w + q.w) < p.n => {
                BlockOperator::Banded(BandedOperator::compose(p, q))
            }
            _ => BlockOperator::Dense(self.to_dense() * other.to_dense()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_banded(n: usize, s: usize, w: usize, seed: u64) -> BandedOperator {
        let mut m = BandedOperator::zeros(n, s, w);
        let mut x = seed as f64 * 0.37 + 0.1;
        for v in m.blocks.iter_mut() {
            x = (x * 9301.0 + 49297.0) % 233280.0;
            *v = x / 233280.0 - 0.5;
        }
        m
    }

    #[test]
    fn compose_matches_dense() {
        for &(n, w1, w2) in &[(7, 1, 1), (3, 1, 1), (9, 2, 1)] {
            let a = BlockOperator::Banded(random_banded(n, 2, w1, 1));
            let b = BlockOperator::Banded(random_banded(n, 2, w2, 2));
            let c = a.compose(&b).unwrap();
            let d = a.to_dense() * b.to_dense();
            assert!((c.to_dense() - d).abs().max() < 1e-13);
        }
    }

    #[test]
    fn transpose_and_apply() {
        let a = random_banded(5, 3, 1, 3);
        let x: Vec<f64> = (0..15).map(|i| (i as f64).sin()).collect();
        let op = BlockOperator::Banded(a.clone());
        let y = op.apply(&x);
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x.clone());
        for i in 0..15 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
        assert!((a.transpose().to_dense() - a.to_dense().transpose()).abs().max() < 1e-15);
    }

    #[test]
    fn aliasing_offsets_add() {
        let a = random_banded(2, 2, 1, 4);
        let d = a.to_dense();
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let y = BlockOperator::Banded(a).apply(&x);
        let yd = d * nalgebra::DVector::from_vec(x);
        for i in 0..4 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
    }
}
