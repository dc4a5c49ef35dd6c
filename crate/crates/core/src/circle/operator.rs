use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::Calculus;
use crate::error::{Branch, CalcError, Result};
use crate::scalar::{cq_to_c64, Cq};

use super::symbol::{ClassicalSymbol, HomComponent};
use super::trig::TrigPoly;

pub type Block = DMatrix<Complex64>;

/// Modes below which compositions and adjoints are corrected to the exact
/// operator action.
pub const DEFAULT_EXACT_MODES: usize = 64;

/// Finite-rank operator `u ↦ Σ e^{imθ} k_{mn} û(n)`, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingKernel {
    rows: usize,
    cols: usize,
    columns: BTreeMap<i64, BTreeMap<i64, Block>>,
}

impl SmoothingKernel {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            columns: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Adds `block` to the entry at output mode `m`, input mode `n`.
    pub fn add_block(&mut self, m: i64, n: i64, block: &Block) {
        assert_eq!(block.shape(), (self.rows, self.cols), "kernel block shape");
        let col = self.columns.entry(n).or_default();
        match col.get_mut(&m) {
            Some(b) => *b += block,
            None => {
                col.insert(m, block.clone());
            }
        }
    }

    fn set_column(&mut self, n: i64, col: BTreeMap<i64, Block>) {
        if col.is_empty() {
            self.columns.remove(&n);
        } else {
            self.columns.insert(n, col);
        }
    }

    pub fn column(&self, n: i64) -> Option<&BTreeMap<i64, Block>> {
        self.columns.get(&n)
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, &Block)> {
        self.columns
            .iter()
            .flat_map(|(n, col)| col.iter().map(move |(m, b)| (*m, *n, b)))
    }

    /// Largest `|n|` of a stored column.
    pub fn column_radius(&self) -> i64 {
        self.columns.keys().map(|n| n.abs()).max().unwrap_or(-1)
    }

    /// Largest `|m|` of a stored row.
    pub fn row_radius(&self) -> i64 {
        self.entries().map(|(m, _, _)| m.abs()).max().unwrap_or(-1)
    }

    /// Largest `|m − n|` of a stored entry.
    pub fn reach(&self) -> usize {
        self.entries().map(|(m, n, _)| (m - n).unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, b)| block_max(b)).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, n, b) in rhs.entries() {
            out.add_block(m, n, b);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for col in out.columns.values_mut() {
            for b in col.values_mut() {
                *b *= c;
            }
        }
        out
    }

    /// Dense window `|m|, |n| ≤ modes` in mode-major layout.
    pub fn from_window(modes: usize, rows: usize, cols: usize, dense: &DMatrix<Complex64>) -> Self {
        let side = 2 * modes + 1;
        assert_eq!(dense.shape(), (side * rows, side * cols), "window shape");
        let mut k = Self::new(rows, cols);
        let r = modes as i64;
        for bn in 0..side {
            for bm in 0..side {
                let block = dense.view((bm * rows, bn * cols), (rows, cols)).into_owned();
                if block.iter().any(|z| z.norm() > 0.0) {
                    k.add_block(bm as i64 - r, bn as i64 - r, &block);
                }
            }
        }
        k
    }
}

fn block_max(b: &Block) -> f64 {
    b.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn accumulate(col: &mut BTreeMap<i64, Block>, m: i64, b: Block) {
    match col.get_mut(&m) {
        Some(acc) => *acc += b,
        None => {
            col.insert(m, b);
        }
    }
}

/// Fourier coefficients `(mode, block)` of the plus and minus branches.
type Branches = [Vec<(i64, Block)>; 2];

/// Floating-point copy of a symbol's coefficients for fast column evaluation.
#[derive(Debug)]
struct SymbolTable {
    comps: Vec<(i64, Branches)>,
}

impl SymbolTable {
    fn new(s: &ClassicalSymbol) -> Self {
        let conv = |p: &TrigPoly| -> Vec<(i64, Block)> {
            p.coeffs()
                .iter()
                .map(|(k, m)| (*k, m.to_c64()))
                .collect()
        };
        let comps = s
            .components()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (s.degree(j), [conv(&c.plus), conv(&c.minus)]))
            .collect();
        Self { comps }
    }

    /// Column `n` of the zero-excised quantization.
    fn column(&self, n: i64) -> BTreeMap<i64, Block> {
        let mut out = BTreeMap::new();
        if n == 0 {
            return out;
        }
        let b = match Branch::of(n) {
            Branch::Plus => 0,
            Branch::Minus => 1,
        };
        let an = (n.unsigned_abs()) as f64;
        for (deg, branches) in &self.comps {
            let w = an.powi(*deg as i32);
            for (k, m) in &branches[b] {
                accumulate(&mut out, n + k, m * Complex64::new(w, 0.0));
            }
        }
        out
    }
}

/// Classical pseudodifferential operator on the circle: the zero-excised
/// quantization of a truncated symbol plus a finite-rank kernel.
///
/// Compositions and adjoints are corrected so that columns `|n| ≤ N`
/// reproduce the exact operator action, with `N` at least
/// `exact_modes` and large enough to cover every non-asymptotic effect
/// (zero excision, mixing of the two frequency half-lines, kernels).
#[derive(Debug, Clone)]
pub struct CircleOp {
    symbol: ClassicalSymbol,
    kernel: Arc<SmoothingKernel>,
    exact_modes: usize,
    /// Resolution of window-tagged numerical kernel data, if any.
    resolution: Option<usize>,
    table: OnceLock<Arc<SymbolTable>>,
}

impl PartialEq for CircleOp {
    fn eq(&self, other: &Self) -> bool {
        self.symbol == other.symbol && self.kernel == other.kernel
    }
}

impl CircleOp {
    /// Operator with the given symbol; the degree-0 component is patched in
    /// at `n = 0` so that multiplication operators act exactly.
    pub fn from_symbol(symbol: ClassicalSymbol, exact_modes: usize) -> Self {
        let mut kernel = SmoothingKernel::new(symbol.rows(), symbol.cols());
        if symbol.order() >= 0 && (symbol.order() as usize) < symbol.depth() {
            let c0 = &symbol.components()[symbol.order() as usize].plus;
            for (k, m) in c0.coeffs() {
                kernel.add_block(*k, 0, &m.to_c64());
            }
        }
        Self::with_kernel(symbol, kernel, exact_modes)
    }

    pub fn with_kernel(symbol: ClassicalSymbol, kernel: SmoothingKernel, exact_modes: usize) -> Self {
        assert_eq!(kernel.dims(), (symbol.rows(), symbol.cols()), "kernel dimensions");
        Self {
            symbol,
            kernel: Arc::new(kernel),
            exact_modes,
            resolution: None,
            table: OnceLock::new(),
        }
    }

    /// Pure finite-rank operator of order `order` (symbol identically zero).
    pub fn smoothing(kernel: SmoothingKernel, order: i64, depth: usize, exact_modes: usize) -> Self {
        let (r, c) = kernel.dims();
        Self::with_kernel(ClassicalSymbol::zero(order, r, c, depth), kernel, exact_modes)
    }

    pub fn identity(n: usize, depth: usize, exact_modes: usize) -> Self {
        Self::from_symbol(ClassicalSymbol::identity(n, depth), exact_modes)
    }

    pub fn multiplication(f: TrigPoly, depth: usize, exact_modes: usize) -> Self {
        Self::from_symbol(ClassicalSymbol::multiplication(f, depth), exact_modes)
    }

    /// `⟨D⟩^μ I`, acting exactly as `diag(⟨n⟩^μ)` on modes `|n| ≤ exact_modes`.
    pub fn japanese(mu: i64, n: usize, depth: usize, exact_modes: usize) -> Self {
        let symbol = ClassicalSymbol::japanese_power(mu, n, depth);
        let table = SymbolTable::new(&symbol);
        let mut kernel = SmoothingKernel::new(n, n);
        let e = exact_modes as i64;
        for m in -e..=e {
            let w = (1.0 + (m * m) as f64).powf(mu as f64 / 2.0);
            let mut b = Block::identity(n, n) * Complex64::new(w, 0.0);
            if let Some(s) = table.column(m).get(&m) {
                b -= s;
            }
            kernel.add_block(m, m, &b);
        }
        Self::with_kernel(symbol, kernel, exact_modes)
    }

    /// Hardy projection onto modes `n ≥ 0`, tensored with the identity.
    pub fn hardy(n: usize, depth: usize, exact_modes: usize) -> Self {
        let mut s = ClassicalSymbol::zero(0, n, n, depth);
        *s.component_mut(0) = HomComponent::new(TrigPoly::identity(n), TrigPoly::zero(n, n));
        Self::from_symbol(s, exact_modes)
    }

    pub fn symbol(&self) -> &ClassicalSymbol {
        &self.symbol
    }

    pub fn kernel(&self) -> &SmoothingKernel {
        &self.kernel
    }

    pub fn exact_modes(&self) -> usize {
        self.exact_modes
    }

    pub fn resolution(&self) -> Option<usize> {
        self.resolution
    }

    pub fn with_exact_modes(mut self, exact_modes: usize) -> Self {
        self.exact_modes = exact_modes;
        self
    }

    /// Replaces the kernel and tags it with a finite-section resolution.
    pub fn with_resolution_kernel(mut self, kernel: SmoothingKernel, modes: usize) -> Self {
        self.kernel = Arc::new(kernel);
        self.resolution = Some(modes);
        self
    }

    /// Same operator regarded as an element of order `order ≥ self.order()`.
    pub fn lift(&self, order: i64) -> Result<Self> {
        let mut out = Self::with_kernel(self.symbol.lift(order)?, (*self.kernel).clone(), self.exact_modes);
        out.resolution = self.resolution;
        Ok(out)
    }

    /// Largest Fourier reach of the symbol coefficients.
    pub fn bandwidth(&self) -> usize {
        self.symbol.bandwidth()
    }

    /// Largest `|m − n|` over symbol and kernel entries.
    pub fn reach(&self) -> usize {
        self.bandwidth().max(self.kernel.reach())
    }

    fn table(&self) -> &SymbolTable {
        self.table.get_or_init(|| Arc::new(SymbolTable::new(&self.symbol)))
    }

    /// Image of `e^{inθ}` as blocks keyed by output mode.
    pub fn column(&self, n: i64) -> BTreeMap<i64, Block> {
        let mut col = self.table().column(n);
        if let Some(k) = self.kernel.column(n) {
            for (m, b) in k {
                accumulate(&mut col, *m, b.clone());
            }
        }
        col
    }

    fn merged_resolution(&self, rhs: &Self) -> Option<usize> {
        match (self.resolution, rhs.resolution) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// Kernel that makes columns `|n| ≤ limit` of `symbol`'s quantization
    /// equal to `exact`.
    fn correction(symbol: &ClassicalSymbol, exact: Vec<(i64, BTreeMap<i64, Block>)>) -> SmoothingKernel {
        let table = SymbolTable::new(symbol);
        let cols: Vec<(i64, BTreeMap<i64, Block>)> = exact
            .into_par_iter()
            .map(|(n, mut col)| {
                for (m, b) in table.column(n) {
                    accumulate(&mut col, m, -b);
                }
                col.retain(|_, b| block_max(b) > 0.0);
                (n, col)
            })
            .collect();
        let mut k = SmoothingKernel::new(symbol.rows(), symbol.cols());
        for (n, col) in cols {
            k.set_column(n, col);
        }
        k
    }

    fn order_mismatch(&self, rhs: &Self) -> CalcError {
        CalcError::OrderMismatch {
            expected: self.symbol.order().to_string(),
            found: rhs.symbol.order().to_string(),
        }
    }
}

impl Calculus for CircleOp {
    type Order = i64;

    fn order(&self) -> i64 {
        self.symbol.order()
    }

    fn depth(&self) -> usize {
        self.symbol.depth()
    }

    fn target_dim(&self) -> usize {
        self.symbol.rows()
    }

    fn source_dim(&self) -> usize {
        self.symbol.cols()
    }

    fn compose(&self, rhs: &Self) -> Result<Self> {
        let symbol = self.symbol.compose(&rhs.symbol)?;
        let exact_modes = self.exact_modes.max(rhs.exact_modes);
        let kb = rhs.bandwidth() as i64;
        let structural = rhs
            .kernel
            .column_radius()
            .max(self.kernel.column_radius() + kb)
            .max(kb)
            + 1;
        let limit = structural.max(exact_modes as i64);

        let rhs_cols: Vec<(i64, BTreeMap<i64, Block>)> =
            (-limit..=limit).into_par_iter().map(|n| (n, rhs.column(n))).collect();
        let ks: BTreeSet<i64> = rhs_cols.iter().flat_map(|(_, c)| c.keys().copied()).collect();
        let lhs_cols: HashMap<i64, BTreeMap<i64, Block>> =
            ks.into_par_iter().map(|k| (k, self.column(k))).collect();
        let exact: Vec<(i64, BTreeMap<i64, Block>)> = rhs_cols
            .into_par_iter()
            .map(|(n, bcol)| {
                let mut out = BTreeMap::new();
                for (k, bkn) in &bcol {
                    for (m, amk) in &lhs_cols[k] {
                        accumulate(&mut out, *m, amk * bkn);
                    }
                }
                (n, out)
            })
            .collect();
        let kernel = Self::correction(&symbol, exact);
        let mut out = Self::with_kernel(symbol, kernel, exact_modes);
        out.resolution = self.merged_resolution(rhs);
        Ok(out)
    }

    fn adjoint(&self) -> Self {
        let symbol = self.symbol.adjoint();
        let ka = self.bandwidth() as i64;
        let structural = ka.max(self.kernel.row_radius()) + 1;
        let limit = structural.max(self.exact_modes as i64);
        // row n of A meets columns n − k (|k| ≤ K) and kernel columns
        let mut needed: BTreeSet<i64> = (-limit - ka..=limit + ka).collect();
        needed.extend(self.kernel.columns.keys().copied());
        let cols: Vec<(i64, BTreeMap<i64, Block>)> =
            needed.into_par_iter().map(|m| (m, self.column(m))).collect();
        let mut rows: BTreeMap<i64, BTreeMap<i64, Block>> = BTreeMap::new();
        for (m, col) in cols {
            for (r, b) in col {
                if r.abs() <= limit {
                    rows.entry(r).or_default().insert(m, b.adjoint());
                }
            }
        }
        let exact: Vec<(i64, BTreeMap<i64, Block>)> = (-limit..=limit)
            .map(|n| (n, rows.remove(&n).unwrap_or_default()))
            .collect();
        let kernel = Self::correction(&symbol, exact);
        let mut out = Self::with_kernel(symbol, kernel, self.exact_modes);
        out.resolution = self.resolution;
        out
    }

    fn add(&self, rhs: &Self) -> Result<Self> {
        if self.order() != rhs.order() {
            return Err(self.order_mismatch(rhs));
        }
        let symbol = self.symbol.add(&rhs.symbol)?;
        let kernel = self.kernel.add(&rhs.kernel);
        let mut out = Self::with_kernel(symbol, kernel, self.exact_modes.max(rhs.exact_modes));
        out.resolution = self.merged_resolution(rhs);
        Ok(out)
    }

    fn scale(&self, c: &Cq) -> Self {
        let mut out = Self::with_kernel(self.symbol.scale(c), self.kernel.scale(cq_to_c64(c)), self.exact_modes);
        out.resolution = self.resolution;
        out
    }

    fn identity_like(&self, dim: usize) -> Self {
        Self::identity(dim, self.depth(), self.exact_modes)
    }

    fn truncate_depth(&self, depth: usize) -> Self {
        let mut out = Self::with_kernel(self.symbol.truncate(depth), (*self.kernel).clone(), self.exact_modes);
        out.resolution = self.resolution;
        out
    }

    fn vanishing_levels(&self, tol: f64) -> usize {
        self.symbol.vanishing_levels(tol)
    }

    fn discard_levels(&self, k: usize) -> (Self, f64) {
        let (symbol, mass) = self.symbol.discard_levels(k);
        let mut out = Self::with_kernel(symbol, (*self.kernel).clone(), self.exact_modes);
        out.resolution = self.resolution;
        (out, mass)
    }
}
