use std::f64::consts::PI;

use crate::circle::TrigPoly;
use crate::error::{CalcError, Result};

/// Winding number of `det f` around the origin, by accumulating argument
/// increments over `grid` uniform samples.
pub fn winding_oracle(f: &TrigPoly, grid: usize) -> Result<i64> {
    if f.rows() != f.cols() {
        return Err(CalcError::DimensionMismatch("winding needs a square symbol".into()));
    }
    if grid < 4 * (f.bandwidth() * f.rows() + 1) {
        return Err(CalcError::InvalidInput(format!("grid size {grid} is too coarse")));
    }
    let det = f.det();
    let vals: Vec<_> = (0..grid)
        .map(|j| det.eval(2.0 * PI * j as f64 / grid as f64)[(0, 0)])
        .collect();
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(j) = (0..grid).find(|&j| vals[j].norm() <= 1e-10 * scale.max(1.0)) {
        return Err(CalcError::WindingUndefined(format!(
            "det f nearly vanishes at theta = {}",
            2.0 * PI * j as f64 / grid as f64
        )));
    }
    let mut total = 0.0;
    for j in 0..grid {
        let step = (vals[(j + 1) % grid] / vals[j]).arg();
        if step.abs() > PI / 2.0 {
            return Err(CalcError::WindingUndefined(format!(
                "argument jumps by {step} between samples; refine the grid"
            )));
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cq_int;

    #[test]
    fn monomials_and_outer_functions() {
        for k in -3..=3 {
            let f = TrigPoly::scalar(&[(k, cq_int(1, 0))]);
            assert_eq!(winding_oracle(&f, 64).unwrap(), k);
        }
        let g = TrigPoly::scalar(&[(0, cq_int(2, 0)), (1, cq_int(1, 0))]);
        assert_eq!(winding_oracle(&g, 64).unwrap(), 0);
    }

    #[test]
    fn zero_on_grid_is_undefined() {
        let g = TrigPoly::scalar(&[(0, cq_int(1, 0)), (1, cq_int(1, 0))]);
        assert!(matches!(winding_oracle(&g, 64), Err(CalcError::WindingUndefined(_))));
    }
}
