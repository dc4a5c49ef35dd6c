use num_traits::Zero;

use crate::error::{Branch, CalcError, Result};
use crate::scalar::{cq_int, q_binomial, q_factorial, q_int, Cq, Q};

use super::trig::TrigPoly;

/// Positively homogeneous component `c^±(θ)|ξ|^m` on the two co-direction
/// branches. The degree is implied by the position in a [`ClassicalSymbol`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomComponent {
    pub plus: TrigPoly,
    pub minus: TrigPoly,
}

impl HomComponent {
    pub fn new(plus: TrigPoly, minus: TrigPoly) -> Self {
        assert_eq!(plus.dims(), minus.dims(), "branch dimensions differ");
        Self { plus, minus }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::new(TrigPoly::zero(rows, cols), TrigPoly::zero(rows, cols))
    }

    /// Same polynomial on both branches (θ-dependent, even in ξ).
    pub fn even(p: TrigPoly) -> Self {
        Self::new(p.clone(), p)
    }

    pub fn branch(&self, b: Branch) -> &TrigPoly {
        match b {
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.plus.is_zero() && self.minus.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.plus.max_abs().max(self.minus.max_abs())
    }

    pub fn bandwidth(&self) -> usize {
        self.plus.bandwidth().max(self.minus.bandwidth())
    }

    fn map(&self, f: impl Fn(&TrigPoly, Branch) -> TrigPoly) -> Self {
        Self::new(f(&self.plus, Branch::Plus), f(&self.minus, Branch::Minus))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(self.plus.add(&rhs.plus), self.minus.add(&rhs.minus))
    }

    pub fn scale(&self, s: &Cq) -> Self {
        self.map(|p, _| p.scale(s))
    }

    /// `∂_ξ^α` of a degree-`degree` component, divided by `α!`:
    /// `(c⁺, c⁻) ↦ binom-type factor · (c⁺, (−1)^α c⁻)`.
    fn xi_derivative_over_factorial(&self, degree: i64, alpha: u32) -> Self {
        if alpha == 0 {
            return self.clone();
        }
        let mut ff = Q::from_integer(1.into());
        for k in 0..alpha as i64 {
            ff *= q_int(degree - k);
        }
        let f = ff / q_factorial(alpha as usize);
        if f.is_zero() {
            return Self::zero(self.plus.rows(), self.plus.cols());
        }
        let fp = Cq::new(f.clone(), Q::zero());
        let fm = if alpha.is_multiple_of(2) { fp.clone() } else { -fp.clone() };
        Self::new(self.plus.scale(&fp), self.minus.scale(&fm))
    }
}

/// Classical symbol of order `μ` truncated to depth `J`: components of
/// degrees `μ, μ−1, …, μ−J+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicalSymbol {
    order: i64,
    rows: usize,
    cols: usize,
    components: Vec<HomComponent>,
}

impl ClassicalSymbol {
    pub fn new(order: i64, components: Vec<HomComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| CalcError::InvalidInput("symbol needs at least one component".into()))?;
        let dims = first.plus.dims();
        if components.iter().any(|c| c.plus.dims() != dims || c.minus.dims() != dims) {
            return Err(CalcError::DimensionMismatch(
                "components have different dimensions".into(),
            ));
        }
        Ok(Self {
            order,
            rows: dims.0,
            cols: dims.1,
            components,
        })
    }

    pub fn zero(order: i64, rows: usize, cols: usize, depth: usize) -> Self {
        Self {
            order,
            rows,
            cols,
            components: vec![HomComponent::zero(rows, cols); depth],
        }
    }

    pub fn identity(n: usize, depth: usize) -> Self {
        let mut s = Self::zero(0, n, n, depth);
        s.components[0] = HomComponent::even(TrigPoly::identity(n));
        s
    }

    /// Order-zero symbol of the multiplication operator by `f(θ)`.
    pub fn multiplication(f: TrigPoly, depth: usize) -> Self {
        let mut s = Self::zero(0, f.rows(), f.cols(), depth);
        s.components[0] = HomComponent::even(f);
        s
    }

    /// Symbol of `D = −i d/dθ` (times the identity): `ξ`, i.e. branch
    /// values `(1, −1)` at degree 1.
    pub fn derivative(n: usize, depth: usize) -> Self {
        let mut s = Self::zero(1, n, n, depth);
        s.components[0] = HomComponent::new(TrigPoly::identity(n), TrigPoly::identity(n).scale(&cq_int(-1, 0)));
        s
    }

    /// `⟨ξ⟩^μ I = |ξ|^μ Σ_k binom(μ/2, k) |ξ|^{−2k}`; odd steps are zero.
    pub fn japanese_power(mu: i64, n: usize, depth: usize) -> Self {
        let half = Q::new(mu.into(), 2.into());
        let mut s = Self::zero(mu, n, n, depth);
        for k in 0..depth.div_ceil(2) {
            let j = 2 * k;
            if j >= depth {
                break;
            }
            let c = Cq::new(q_binomial(&half, k), Q::zero());
            s.components[j] = HomComponent::even(TrigPoly::identity(n).scale(&c));
        }
        s
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn components(&self) -> &[HomComponent] {
        &self.components
    }

    /// Degree of component `j`.
    pub fn degree(&self, j: usize) -> i64 {
        self.order - j as i64
    }

    pub fn principal(&self) -> &HomComponent {
        &self.components[0]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut HomComponent {
        &mut self.components[j]
    }

    pub fn bandwidth(&self) -> usize {
        self.components.iter().map(HomComponent::bandwidth).max().unwrap_or(0)
    }

    /// The same symbol viewed in the class of a higher order `order`; leading
    /// components become zero and the depth is kept.
    pub fn lift(&self, order: i64) -> Result<Self> {
        if order < self.order {
            return Err(CalcError::OrderMismatch {
                expected: format!(">= {}", self.order),
                found: order.to_string(),
            });
        }
        let shift = (order - self.order) as usize;
        let depth = self.depth();
        let mut components = vec![HomComponent::zero(self.rows, self.cols); shift.min(depth)];
        components.extend(self.components.iter().take(depth.saturating_sub(shift)).cloned());
        Ok(Self {
            order,
            rows: self.rows,
            cols: self.cols,
            components,
        })
    }

    pub fn truncate(&self, depth: usize) -> Self {
        let mut s = self.clone();
        s.components.truncate(depth.max(1));
        s
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(HomComponent::is_zero)
    }

    /// Leading components that are at most `tol` in modulus.
    pub fn vanishing_levels(&self, tol: f64) -> usize {
        self.components
            .iter()
            .take_while(|c| if tol == 0.0 { c.is_zero() } else { c.max_abs() <= tol })
            .count()
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.order != rhs.order {
            return Err(CalcError::OrderMismatch {
                expected: self.order.to_string(),
                found: rhs.order.to_string(),
            });
        }
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(CalcError::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{} symbols",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let depth = self.depth().min(rhs.depth());
        let components = (0..depth)
            .map(|j| self.components[j].add(&rhs.components[j]))
            .collect();
        Ok(Self {
            order: self.order,
            rows: self.rows,
            cols: self.cols,
            components,
        })
    }

    pub fn scale(&self, s: &Cq) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            *c = c.scale(s);
        }
        out
    }

    /// Leibniz product `Σ_{α<J} (1/α!) ∂_ξ^α a · D_θ^α b`, truncated at
    /// degree `μ+ν−J`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(CalcError::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let depth = self.depth().min(rhs.depth());
        let mut components = vec![HomComponent::zero(self.rows, rhs.cols); depth];
        // θ-derivatives of the right factor are shared across left components
        let mut rhs_derivs: Vec<Vec<HomComponent>> = Vec::with_capacity(depth);
        for alpha in 0..depth as u32 {
            rhs_derivs.push(
                rhs.components[..depth]
                    .iter()
                    .map(|c| c.map(|p, _| p.d_theta_pow(alpha)))
                    .collect(),
            );
        }
        for i in 0..depth {
            let a = &self.components[i];
            if a.is_zero() {
                continue;
            }
            for alpha in 0..(depth - i) {
                let da = a.xi_derivative_over_factorial(self.degree(i), alpha as u32);
                if da.is_zero() {
                    continue;
                }
                for j in 0..(depth - i - alpha) {
                    let b = &rhs_derivs[alpha][j];
                    if b.is_zero() {
                        continue;
                    }
                    let k = i + j + alpha;
                    let term = HomComponent::new(da.plus.mul(&b.plus), da.minus.mul(&b.minus));
                    components[k] = components[k].add(&term);
                }
            }
        }
        Ok(Self {
            order: self.order + rhs.order,
            rows: self.rows,
            cols: rhs.cols,
            components,
        })
    }

    /// Formal adjoint `Σ_{α<J} (1/α!) ∂_ξ^α D_θ^α aᴴ`.
    pub fn adjoint(&self) -> Self {
        let depth = self.depth();
        let mut components = vec![HomComponent::zero(self.cols, self.rows); depth];
        for i in 0..depth {
            let ah = self.components[i].map(|p, _| p.adjoint());
            if ah.is_zero() {
                continue;
            }
            for alpha in 0..(depth - i) {
                let d = ah
                    .map(|p, _| p.d_theta_pow(alpha as u32))
                    .xi_derivative_over_factorial(self.degree(i), alpha as u32);
                components[i + alpha] = components[i + alpha].add(&d);
            }
        }
        Self {
            order: self.order,
            rows: self.cols,
            cols: self.rows,
            components,
        }
    }

    /// Zeroes the first `k` components and reports the largest dropped
    /// coefficient.
    pub fn discard_levels(&self, k: usize) -> (Self, f64) {
        let mut out = self.clone();
        let mut mass = 0.0f64;
        for c in out.components.iter_mut().take(k) {
            mass = mass.max(c.max_abs());
            *c = HomComponent::zero(self.rows, self.cols);
        }
        (out, mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq_i, q_frac};

    fn e1() -> TrigPoly {
        TrigPoly::scalar(&[(1, cq_int(1, 0))])
    }

    #[test]
    fn identity_is_neutral() {
        let a = ClassicalSymbol::new(
            1,
            vec![
                HomComponent::new(e1(), e1().scale(&cq_int(2, 0))),
                HomComponent::even(TrigPoly::scalar(&[(-2, cq_int(0, 3))])),
                HomComponent::zero(1, 1),
            ],
        )
        .unwrap();
        let one = ClassicalSymbol::identity(1, 3);
        assert_eq!(one.compose(&a).unwrap(), a);
        assert_eq!(a.compose(&one).unwrap(), a);
    }

    #[test]
    fn derivative_after_shift() {
        // D ∘ M_{e^{iθ}} = M_{e^{iθ}} ∘ (D + 1)
        let d = ClassicalSymbol::derivative(1, 4);
        let m = ClassicalSymbol::multiplication(e1(), 4);
        let c = d.compose(&m).unwrap();
        assert_eq!(c.order(), 1);
        assert_eq!(c.components()[0], HomComponent::new(e1(), e1().scale(&cq_int(-1, 0))));
        assert_eq!(c.components()[1], HomComponent::even(e1()));
        assert!(c.components()[2].is_zero() && c.components()[3].is_zero());
    }

    #[test]
    fn fourier_multipliers_multiply_pointwise() {
        let a = ClassicalSymbol::japanese_power(2, 1, 5);
        let b = ClassicalSymbol::japanese_power(-2, 1, 5);
        let c = a.compose(&b).unwrap();
        assert_eq!(c, ClassicalSymbol::identity(1, 5));
    }

    #[test]
    fn japanese_inverse_expansion() {
        let b = ClassicalSymbol::japanese_power(-2, 1, 5);
        let val = |j: usize| b.components()[j].plus.coeff(0).map(|m| m.get(0, 0).clone());
        assert_eq!(val(0), Some(cq_int(1, 0)));
        assert_eq!(val(1), None);
        assert_eq!(val(2), Some(cq_int(-1, 0)));
        assert_eq!(val(4), Some(cq_int(1, 0)));
        let half = ClassicalSymbol::japanese_power(1, 1, 3);
        assert_eq!(
            half.components()[2].plus.coeff(0).unwrap().get(0, 0).re,
            q_frac(1, 2)
        );
    }

    #[test]
    fn adjoint_of_multiplication_and_derivative() {
        let f = TrigPoly::scalar(&[(1, cq_int(2, 1)), (-1, cq_i())]);
        let m = ClassicalSymbol::multiplication(f.clone(), 3);
        assert_eq!(m.adjoint(), ClassicalSymbol::multiplication(f.adjoint(), 3));
        let d = ClassicalSymbol::derivative(1, 3);
        assert_eq!(d.adjoint(), d);
    }

    #[test]
    fn adjoint_reverses_products() {
        let f = TrigPoly::scalar(&[(1, cq_int(1, 2)), (0, cq_int(3, 0))]);
        let a = ClassicalSymbol::multiplication(f, 4).compose(&ClassicalSymbol::derivative(1, 4)).unwrap();
        let b = ClassicalSymbol::japanese_power(-1, 1, 4);
        let lhs = a.compose(&b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
