use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::Calculus;
use crate::circle::CircleOp;
use crate::error::{CalcError, Result};
use crate::linalg::CMat;

/// Fourier–Galerkin matrix of a circle operator on the mode windows
/// `|m| ≤ row_modes`, `|n| ≤ col_modes`, in mode-major layout: the block of
/// mode `n` occupies indices `(n + M)·dim .. (n + M + 1)·dim`.
#[derive(Debug, Clone)]
pub struct GalerkinMatrix {
    pub matrix: CMat,
    pub row_modes: usize,
    pub col_modes: usize,
    pub row_dim: usize,
    pub col_dim: usize,
    /// Sobolev exponent applied as column weight `⟨n⟩^{−s}` and row weight
    /// `⟨m⟩^{s−μ}`, if any.
    pub sobolev: Option<i64>,
    pub provenance: String,
}

/// Square window `−M..M`.
pub fn galerkin_matrix(op: &CircleOp, modes: usize) -> Result<GalerkinMatrix> {
    galerkin_rect(op, modes, modes)
}

pub fn galerkin_rect(op: &CircleOp, row_modes: usize, col_modes: usize) -> Result<GalerkinMatrix> {
    let k = op.bandwidth();
    if row_modes.min(col_modes) < k {
        return Err(CalcError::ResolutionTooSmall {
            modes: row_modes.min(col_modes),
            bandwidth: k,
        });
    }
    let (rd, cd) = (op.target_dim(), op.source_dim());
    let (rm, cm) = (row_modes as i64, col_modes as i64);
    let cols: Vec<_> = (-cm..=cm).into_par_iter().map(|n| (n, op.column(n))).collect();
    let mut matrix = CMat::zeros((2 * row_modes + 1) * rd, (2 * col_modes + 1) * cd);
    for (n, col) in cols {
        let c0 = (n + cm) as usize * cd;
        for (m, b) in col.range(-rm..=rm) {
            let r0 = (m + rm) as usize * rd;
            matrix.view_mut((r0, c0), (rd, cd)).copy_from(b);
        }
    }
    Ok(GalerkinMatrix {
        matrix,
        row_modes,
        col_modes,
        row_dim: rd,
        col_dim: cd,
        sobolev: None,
        provenance: format!(
            "circle op order {} depth {}, rows |m| <= {row_modes}, cols |n| <= {col_modes}, chi(0) = 0{}",
            op.order(),
            op.depth(),
            op.resolution().map(|r| format!(", kernel at M = {r}")).unwrap_or_default()
        ),
    })
}

/// `⟨n⟩ = (1 + n²)^{1/2}`.
pub fn japanese(n: i64) -> f64 {
    (1.0 + (n * n) as f64).sqrt()
}

impl GalerkinMatrix {
    pub fn dims(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    /// Mode of row index `i`.
    pub fn row_mode(&self, i: usize) -> i64 {
        (i / self.row_dim) as i64 - self.row_modes as i64
    }

    pub fn col_mode(&self, j: usize) -> i64 {
        (j / self.col_dim) as i64 - self.col_modes as i64
    }

    /// Matrix of the operator `H^s → H^{s−μ}` in orthonormal Fourier bases.
    pub fn weighted(&self, s: i64, mu: i64) -> Self {
        let mut out = self.clone();
        for j in 0..out.matrix.ncols() {
            let wc = japanese(self.col_mode(j)).powi(-s as i32);
            for i in 0..out.matrix.nrows() {
                let wr = japanese(self.row_mode(i)).powi((s - mu) as i32);
                out.matrix[(i, j)] *= Complex64::new(wr * wc, 0.0);
            }
        }
        out.sobolev = Some(s);
        out
    }

    /// Index range of the modes `|n| ≤ r` in a window of radius `modes`.
    pub fn interior(modes: usize, dim: usize, r: usize) -> std::ops::Range<usize> {
        let lo = (modes - r.min(modes)) * dim;
        let hi = (modes + r.min(modes) + 1) * dim;
        lo..hi
    }

    /// Little-endian binary export: `u64` rows, cols, M and provenance
    /// length, the provenance bytes, then row-major `(re, im)` pairs of `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (r, c) = self.matrix.shape();
        for v in [r as u64, c as u64, self.col_modes as u64, self.provenance.len() as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(self.provenance.as_bytes())?;
        for i in 0..r {
            for j in 0..c {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}
