//! Field comparisons used by the verification paths.

use crate::field::ScalarField;
use crate::gse::RESIDUAL_SKIP;

/// `max|a - b| / max|b|` over interior nodes.
pub fn relative_interior_error(a: &ScalarField, b: &ScalarField) -> f64 {
    relative_error_skip(a, b, RESIDUAL_SKIP)
}

pub fn relative_error_skip(a: &ScalarField, b: &ScalarField, skip: usize) -> f64 {
    let diff = (a - b).max_abs_interior(skip);
    let scale = b.max_abs_interior(skip);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// First interior node where both fields exceed `1e-8` in magnitude.
pub fn reference_node(a: &ScalarField, b: &ScalarField) -> Option<usize> {
    let n = a.len();
    (RESIDUAL_SKIP..n.saturating_sub(RESIDUAL_SKIP))
        .find(|&i| a.values()[i].abs() > 1e-8 && b.values()[i].abs() > 1e-8)
}

/// Distance between two fields viewed as rays: both are scaled to 1 at the
/// shared reference node, then compared with `relative_interior_error`.
/// Returns infinity when no reference node exists.
pub fn ray_distance(a: &ScalarField, b: &ScalarField) -> f64 {
    match reference_node(a, b) {
        Some(r) => {
            let an = a.scale(1.0 / a.values()[r]);
            let bn = b.scale(1.0 / b.values()[r]);
            relative_interior_error(&an, &bn)
        }
        None => f64::INFINITY,
    }
}
