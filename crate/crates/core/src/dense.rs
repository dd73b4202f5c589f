//! Brute-force dense matrices for the shift, coin and oracle.
//!
//! Only for small instances: the structured kernel in [`crate::walk`] is
//! checked against these literal operator products. Dimensions above
//! [`DENSE_DIM_CAP`] are refused.

use crate::error::{Error, Result};
use crate::hypercube::MarkedSet;
use crate::walk::{CoinAxis, OracleMode, WalkConfig};

pub const DENSE_DIM_CAP: usize = 4096;

/// A square real matrix, row-major, indexed in the walk's `c·N + x` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseOperator {
    fn zeros(dim: usize) -> Result<Self> {
        if dim > DENSE_DIM_CAP {
            return Err(Error::DenseCapExceeded {
                dim,
                cap: DENSE_DIM_CAP,
            });
        }
        Ok(DenseOperator {
            dim,
            entries: vec![0.0; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, v: f64) {
        self.entries[row * self.dim + col] = v;
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok(self
            .entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self · rhs`
    pub fn matmul(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        if rhs.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let d = self.dim;
        let mut out = Self::zeros(d)?;
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.entries[k * d..(k + 1) * d];
                let dst = &mut out.entries[i * d..(i + 1) * d];
                for (o, &b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> DenseOperator {
        let d = self.dim;
        let mut t = DenseOperator {
            dim: d,
            entries: vec![0.0; d * d],
        };
        for i in 0..d {
            for j in 0..d {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Largest entry of `|MᵀM − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|k| self.get(k, i) * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn checked_dim(config: &WalkConfig) -> Result<usize> {
    config.validate()?;
    let dim = config.dim();
    if dim > DENSE_DIM_CAP {
        return Err(Error::DenseCapExceeded {
            dim,
            cap: DENSE_DIM_CAP,
        });
    }
    Ok(dim)
}

/// `S = Σ_i Σ_x |i, x⊕e_i⟩⟨i, x|`, identity on the self-loop directions.
pub fn build_shift_dense(config: &WalkConfig) -> Result<DenseOperator> {
    let dim = checked_dim(config)?;
    let vertices = config.vertex_count();
    let mut s = DenseOperator::zeros(dim)?;
    for c in 0..config.coin_dim() {
        for x in 0..vertices {
            let target = if c < config.n { x ^ (1 << c) } else { x };
            s.set(c * vertices + target, c * vertices + x, 1.0);
        }
    }
    Ok(s)
}

/// `(2|s^C⟩⟨s^C| − I_{n+m}) ⊗ I_N`.
pub fn build_coin_dense(config: &WalkConfig, k_for_weight: usize) -> Result<DenseOperator> {
    let dim = checked_dim(config)?;
    let axis = CoinAxis::new(config, k_for_weight)?;
    let s = axis.as_slice();
    let vertices = config.vertex_count();
    let mut op = DenseOperator::zeros(dim)?;
    for (a, &sa) in s.iter().enumerate() {
        for (b, &sb) in s.iter().enumerate() {
            let v = 2.0 * sa * sb - if a == b { 1.0 } else { 0.0 };
            for x in 0..vertices {
                op.set(a * vertices + x, b * vertices + x, v);
            }
        }
    }
    Ok(op)
}

/// Diagonal ±1 oracle for the config's oracle mode.
pub fn build_oracle_dense(config: &WalkConfig, marked: &MarkedSet) -> Result<DenseOperator> {
    let dim = checked_dim(config)?;
    let vertices = config.vertex_count();
    let mut q = DenseOperator::identity(dim)?;
    let inverted = match config.oracle {
        OracleMode::NoOracle => 0,
        OracleMode::FullInversion => config.coin_dim(),
        OracleMode::PartialInversion => config.n + config.s,
    };
    for w in marked.vertices() {
        for c in 0..inverted {
            let i = c * vertices + w.index();
            q.set(i, i, -1.0);
        }
    }
    Ok(q)
}

/// The full step operator `S · (C⊗I) · Q` as one matrix.
pub fn build_step_dense(config: &WalkConfig, marked: &MarkedSet) -> Result<DenseOperator> {
    let s = build_shift_dense(config)?;
    let c = build_coin_dense(config, marked.len())?;
    let q = build_oracle_dense(config, marked)?;
    s.matmul(&c)?.matmul(&q)
}

/// One step by explicit dense multiplication.
pub fn dense_step(config: &WalkConfig, marked: &MarkedSet, state: &[f64]) -> Result<Vec<f64>> {
    build_step_dense(config, marked)?.apply(state)
}
