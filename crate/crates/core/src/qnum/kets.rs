//! Common state vectors.

use std::f64::consts::FRAC_1_SQRT_2;

use super::matrix::{C64, ONE, ZERO};

/// Computational basis vector `|i>` in dimension `d`.
pub fn basis(d: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d];
    v[i] = ONE;
    v
}

pub fn plus() -> Vec<C64> {
    vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]
}

pub fn minus() -> Vec<C64> {
    vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)]
}

/// Bell state `|beta_xy>` with `k = 2x + y`:
/// `(|0 y> + (-1)^x |1 (1-y)>) / sqrt 2`.
pub fn bell(k: usize) -> Vec<C64> {
    assert!(k < 4, "Bell index out of range");
    let (x, y) = (k >> 1, k & 1);
    let mut v = vec![ZERO; 4];
    v[y] = C64::new(FRAC_1_SQRT_2, 0.0);
    let sign = if x == 0 { 1.0 } else { -1.0 };
    v[2 + (1 - y)] = C64::new(sign * FRAC_1_SQRT_2, 0.0);
    v
}
