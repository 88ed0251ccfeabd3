//! Uniform grids and sampled scalar fields.
//!
//! A [`ScalarField`] stores node values and, optionally, exact Taylor data
//! up to some derivative order. Fields built from closed forms carry that
//! data (see [`ScalarField::analytic`]); arithmetic on fields propagates it
//! through truncated Taylor arithmetic, so derivatives of composite
//! expressions stay exact. Fields without it fall back to O(h^2) stencils.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{arg, Error, Result};
use crate::jet::{Jet, MAX_ORDER};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

#[derive(Clone, Debug)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    h: f64,
    nodes: Arc<[f64]>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.x_min == other.x_min && self.x_max == other.x_max && self.len() == other.len()
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return arg(format!("grid bounds must be finite, got [{x_min}, {x_max}]"));
        }
        if x_min >= x_max {
            return arg(format!("grid needs x_min < x_max, got [{x_min}, {x_max}]"));
        }
        if n < MIN_NODES {
            return arg(format!("grid needs at least {MIN_NODES} nodes, got {n}"));
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        let nodes: Arc<[f64]> = (0..n)
            .map(|i| if i == n - 1 { x_max } else { x_min + i as f64 * h })
            .collect();
        Ok(Grid {
            x_min,
            x_max,
            h,
            nodes,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the node equal to `x` (within 1e-9 h), if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let t = (x - self.x_min) / self.h;
        let i = t.round();
        ((t - i).abs() <= 1e-9).then_some(i as usize)
    }

    /// Same bounds, `n` nodes.
    pub fn with_len(&self, n: usize) -> Result<Self> {
        Grid::new(self.x_min, self.x_max, n)
    }
}

/// Free-function form of [`Grid::new`].
pub fn make_grid(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
    Grid::new(x_min, x_max, n)
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Arc<[f64]>,
    /// Node-major Taylor coefficients 1..=order.
    taylor: Option<Arc<[f64]>>,
    order: usize,
}

impl ScalarField {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return arg(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            ));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Sampling {
                node: i,
                x: grid.nodes()[i],
                value: *v,
            });
        }
        Ok(Self::raw(grid, values))
    }

    fn raw(grid: &Grid, values: Vec<f64>) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: values.into(),
            taylor: None,
            order: 0,
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::raw(grid, vec![c; grid.len()]).with_order_of_constant(c)
    }

    fn with_order_of_constant(self, c: f64) -> Self {
        let jets = vec![Jet::constant(c, MAX_ORDER); self.grid.len()];
        Self::from_jets(&self.grid, &jets)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Closed-form field with exact derivatives up to `order`.
    pub fn analytic(grid: &Grid, order: usize, f: impl Fn(Jet) -> Jet) -> Result<Self> {
        let jets: Vec<Jet> = grid
            .nodes()
            .iter()
            .map(|&x| f(Jet::variable(x, order)))
            .collect();
        let field = Self::from_jets(grid, &jets);
        field.check_finite()?;
        Ok(field)
    }

    /// Assemble from per-node jets; the field order is the smallest jet order.
    pub fn from_jets(grid: &Grid, jets: &[Jet]) -> Self {
        assert_eq!(jets.len(), grid.len());
        let order = jets.iter().map(Jet::order).min().unwrap_or(0);
        let values: Arc<[f64]> = jets.iter().map(Jet::value).collect();
        let taylor = (order > 0).then(|| {
            let mut t = Vec::with_capacity(jets.len() * order);
            for j in jets {
                t.extend_from_slice(&j.coeffs()[1..=order]);
            }
            Arc::from(t)
        });
        ScalarField {
            grid: grid.clone(),
            values,
            taylor,
            order,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Highest derivative order known exactly (0 for sampled-only fields).
    pub fn exact_order(&self) -> usize {
        self.order
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.order >= 1
    }

    pub fn jet(&self, i: usize) -> Jet {
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = self.values[i];
        if let Some(t) = &self.taylor {
            c[1..=self.order].copy_from_slice(&t[i * self.order..(i + 1) * self.order]);
        }
        Jet::from_coeffs(&c[..=self.order])
    }

    /// Drop all exact derivative data.
    pub fn sampled_only(&self) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.clone(),
            taylor: None,
            order: 0,
        }
    }

    /// Keep exact derivative data only up to `order`.
    pub fn truncate_order(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        let jets: Vec<Jet> = (0..self.len()).map(|i| self.jet(i).truncate(order)).collect();
        Self::from_jets(&self.grid, &jets)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            Some((i, v)) => Err(Error::Sampling {
                node: i,
                x: self.grid.nodes()[i],
                value: *v,
            }),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(Jet) -> Jet) -> Self {
        let jets: Vec<Jet> = (0..self.len()).map(|i| f(self.jet(i))).collect();
        Self::from_jets(&self.grid, &jets)
    }

    pub fn zip(&self, other: &Self, f: impl Fn(Jet, Jet) -> Jet) -> Self {
        assert!(
            self.grid == other.grid,
            "fields live on different grids ({} vs {} nodes)",
            self.len(),
            other.len()
        );
        let jets: Vec<Jet> = (0..self.len())
            .map(|i| f(self.jet(i), other.jet(i)))
            .collect();
        Self::from_jets(&self.grid, &jets)
    }

    pub fn recip(&self) -> Self {
        self.map(|j| j.recip())
    }

    pub fn sqrt(&self) -> Self {
        self.map(|j| j.sqrt())
    }

    pub fn ln(&self) -> Self {
        self.map(|j| j.ln())
    }

    pub fn abs(&self) -> Self {
        self.map(|j| if j.value() < 0.0 { -j } else { j })
    }

    pub fn powi(&self, k: i32) -> Self {
        self.map(|j| j.powi(k))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|j| j * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Max |value| over nodes `skip..n-skip`.
    pub fn max_abs_interior(&self, skip: usize) -> f64 {
        let n = self.len();
        if n <= 2 * skip {
            return 0.0;
        }
        self.values[skip..n - skip]
            .iter()
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Number of sign changes between consecutive nonzero samples over all nodes.
    pub fn sign_changes(&self) -> usize {
        sign_changes(&self.values)
    }

    /// Value at `x_i + dx` for `|dx| <= h`: Taylor expansion when at least
    /// four exact orders are known, otherwise cubic Lagrange interpolation.
    pub fn eval_near(&self, i: usize, dx: f64) -> f64 {
        if self.order >= 4 {
            return self.jet(i).eval_at(dx);
        }
        let n = self.len();
        let h = self.grid.h();
        let start = if dx >= 0.0 { i.saturating_sub(1) } else { i.saturating_sub(2) };
        let start = start.min(n - 4);
        let t = (self.grid.nodes()[i] + dx - self.grid.nodes()[start]) / h;
        let y = &self.values[start..start + 4];
        // Lagrange on nodes 0,1,2,3 at fractional position t
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3]
    }

    /// Value at an arbitrary position inside the grid.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let grid = &self.grid;
        if !x.is_finite() || !grid.contains(x) {
            return arg(format!("position {x} outside grid [{}, {}]", grid.x_min(), grid.x_max()));
        }
        if let Some(i) = grid.node_index(x) {
            return Ok(self.values[i]);
        }
        let i = (((x - grid.x_min()) / grid.h()).round() as usize).min(self.len() - 1);
        Ok(self.eval_near(i, x - grid.nodes()[i]))
    }

    /// Value at `x_i + h/2`. Uses the symmetric average of both Taylor
    /// expansions when exact data is available.
    pub fn midpoint(&self, i: usize) -> f64 {
        let h = self.grid.h();
        if self.order >= 4 && i + 1 < self.len() {
            0.5 * (self.jet(i).eval_at(0.5 * h) + self.jet(i + 1).eval_at(-0.5 * h))
        } else {
            self.eval_near(i, 0.5 * h)
        }
    }

    pub fn derive(&self, order: u8) -> Result<Self> {
        derive(self, order)
    }

    pub fn integrate_from(&self, x0: f64) -> Result<Self> {
        integrate_cumulative(self, x0)
    }
}

pub(crate) fn sign_changes(values: &[f64]) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for &v in values {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// Sample `f` on every node.
pub fn sample(f: impl Fn(f64) -> f64, grid: &Grid) -> Result<ScalarField> {
    let values: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
    ScalarField::from_values(grid, values)
}

fn fd_first(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d
}

fn fd_second(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let h2 = h * h;
    let mut d = vec![0.0; n];
    d[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
    d[n - 1] =
        (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
    }
    d
}

/// First or second derivative. Exact Taylor data is used verbatim when the
/// field carries it; otherwise central O(h^2) stencils with one-sided O(h^2)
/// stencils at the two boundary nodes.
pub fn derive(f: &ScalarField, order: u8) -> Result<ScalarField> {
    match order {
        1 => {
            if f.order >= 1 {
                Ok(f.map(|j| j.differentiate()))
            } else {
                Ok(ScalarField::raw(&f.grid, fd_first(&f.values, f.grid.h())))
            }
        }
        2 => {
            if f.order >= 1 {
                derive(&derive(f, 1)?, 1)
            } else {
                Ok(ScalarField::raw(&f.grid, fd_second(&f.values, f.grid.h())))
            }
        }
        _ => arg(format!("derivative order must be 1 or 2, got {order}")),
    }
}

/// `F(x) = ∫_{x0}^{x} f dx'` by composite trapezoid along the grid.
///
/// When `f` carries exact derivatives the Euler-Maclaurin end corrections
/// (h^2 and, if available, h^4 terms) are added, and `F` inherits exact
/// Taylor data one order above `f`.
pub fn integrate_cumulative(f: &ScalarField, x0: f64) -> Result<ScalarField> {
    let grid = &f.grid;
    if !x0.is_finite() || !grid.contains(x0) {
        return arg(format!(
            "integration base {x0} outside grid [{}, {}]",
            grid.x_min(),
            grid.x_max()
        ));
    }
    let n = f.len();
    let h = grid.h();
    let y = &f.values;
    let mut g = vec![0.0; n];
    for i in 1..n {
        g[i] = g[i - 1] + 0.5 * h * (y[i - 1] + y[i]);
    }
    if f.order >= 1 {
        let d1: Vec<f64> = (0..n).map(|i| f.jet(i).derivative(1)).collect();
        let d3: Option<Vec<f64>> =
            (f.order >= 3).then(|| (0..n).map(|i| f.jet(i).derivative(3)).collect());
        for i in 1..n {
            g[i] -= h * h / 12.0 * (d1[i] - d1[0]);
            if let Some(d3) = &d3 {
                g[i] += h.powi(4) / 720.0 * (d3[i] - d3[0]);
            }
        }
    }
    let base = match grid.node_index(x0) {
        Some(j) => g[j],
        None => {
            let j = (((x0 - grid.x_min()) / h).floor() as usize).min(n - 2);
            let d = x0 - grid.nodes()[j];
            let partial = if f.order >= 1 {
                f.jet(j)
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * d.powi(k as i32 + 1) / (k + 1) as f64)
                    .sum::<f64>()
            } else {
                let fx = y[j] + (y[j + 1] - y[j]) * d / h;
                0.5 * d * (y[j] + fx)
            };
            g[j] + partial
        }
    };
    for v in g.iter_mut() {
        *v -= base;
    }
    if f.order == 0 {
        // F' = f is known exactly even for sampled integrands.
        let jets: Vec<Jet> = (0..n).map(|i| Jet::from_coeffs(&[g[i], y[i]])).collect();
        return Ok(ScalarField::from_jets(grid, &jets));
    }
    let order = (f.order + 1).min(MAX_ORDER);
    let jets: Vec<Jet> = (0..n)
        .map(|i| {
            let fj = f.jet(i);
            let mut c = vec![0.0; order + 1];
            c[0] = g[i];
            for k in 1..=order {
                c[k] = fj.coeffs()[k - 1] / k as f64;
            }
            Jet::from_coeffs(&c)
        })
        .collect();
    Ok(ScalarField::from_jets(grid, &jets))
}

/// `W = f g' - f' g`.
pub fn wronskian(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    if f.grid != g.grid {
        return arg("wronskian of fields on different grids");
    }
    let fp = derive(f, 1)?;
    let gp = derive(g, 1)?;
    Ok(&(f * &gp) - &(&fp * g))
}

macro_rules! field_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.zip(rhs, |a, b| a $op b)
            }
        }
        impl $trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                (&self).$method(rhs)
            }
        }
        impl $trait<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.$method(&rhs)
            }
        }
        impl $trait<f64> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                self.map(|a| a $op rhs)
            }
        }
        impl $trait<f64> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                (&self).$method(rhs)
            }
        }
        impl $trait<&ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                rhs.map(|b| self $op b)
            }
        }
        impl $trait<ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.$method(&rhs)
            }
        }
    };
}

field_binop!(Add, add, +);
field_binop!(Sub, sub, -);
field_binop!(Mul, mul, *);
field_binop!(Div, div, /);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|a| -a)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid01(n: usize) -> Grid {
        Grid::new(0.0, 1.0, n).unwrap()
    }

    fn max_err(a: &ScalarField, f: impl Fn(f64) -> f64, skip: usize) -> f64 {
        let n = a.len();
        (skip..n - skip)
            .map(|i| (a.values()[i] - f(a.grid().nodes()[i])).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn make_grid_examples() {
        let g = make_grid(0.05, 10.0, 2048).unwrap();
        assert_eq!(g.h(), 9.95 / 2047.0);
        assert_eq!(g.nodes()[2047], 10.0);
        assert!(matches!(make_grid(0.0, -1.0, 100), Err(Error::Argument(_))));
        assert!(matches!(make_grid(0.05, 10.0, 8), Err(Error::Argument(_))));
        assert!(make_grid(f64::NAN, 1.0, 100).is_err());
    }

    #[test]
    fn sample_examples() {
        let g = make_grid(0.05, 10.0, 64).unwrap();
        let ones = sample(|_| 1.0, &g).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        let coul = sample(|x| 1.0 / (4.0 * x), &g).unwrap();
        assert_eq!(coul.values()[0], 1.0 / (4.0 * 0.05));
        let g0 = make_grid(-1.0, 1.0, 65).unwrap();
        match sample(|x| 1.0 / x, &g0) {
            Err(Error::Sampling { node, .. }) => assert_eq!(node, 32),
            other => panic!("expected sampling error, got {other:?}"),
        }
    }

    #[test]
    fn derive_constant_is_zero() {
        let g = grid01(32);
        let c = sample(|_| 3.5, &g).unwrap();
        assert!(derive(&c, 1).unwrap().max_abs() == 0.0);
        assert!(derive(&c, 2).unwrap().max_abs() < 1e-9);
        assert!(derive(&c, 3).is_err());
    }

    #[test]
    fn derive_x_squared_is_second_order() {
        // central and one-sided O(h^2) stencils differentiate x^2 exactly
        let g = grid01(101);
        let f = sample(|x| x * x, &g).unwrap();
        let d = derive(&f, 1).unwrap();
        assert!(max_err(&d, |x| 2.0 * x, 0) < 1e-12);
        // a cubic exposes the h^2 error term and its convergence
        let e = |n| {
            let g = grid01(n);
            let d = derive(&sample(|x| x.powi(3), &g).unwrap(), 1).unwrap();
            max_err(&d, |x| 3.0 * x * x, 1)
        };
        let (e1, e2) = (e(101), e(201));
        assert!(e1 <= 1.01 * (0.01f64).powi(2));
        assert!(e1 / e2 > 3.9);
    }

    #[test]
    fn derive_sin_second_order() {
        let e = |n| {
            let g = Grid::new(0.0, 3.0, n).unwrap();
            let d = derive(&sample(f64::sin, &g).unwrap(), 2).unwrap();
            max_err(&d, |x| -x.sin(), 0)
        };
        let (e1, e2) = (e(200), e(400));
        assert!(e1 < 1e-3);
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn analytic_derivative_used_verbatim() {
        let g = Grid::new(0.1, 2.0, 50).unwrap();
        let f = ScalarField::analytic(&g, 6, |x| (x * 2.0).sin()).unwrap();
        let d = derive(&f, 1).unwrap();
        for (i, &x) in g.nodes().iter().enumerate() {
            assert_eq!(d.values()[i], f.jet(i).derivative(1));
            assert!((d.values()[i] - 2.0 * (2.0 * x).cos()).abs() < 1e-13);
        }
        let d2 = derive(&f, 2).unwrap();
        assert!(max_err(&d2, |x| -4.0 * (2.0 * x).sin(), 0) < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let g = grid01(101);
        let z = ScalarField::zeros(&g);
        assert_eq!(integrate_cumulative(&z, 0.3).unwrap().max_abs(), 0.0);
        let f = sample(|x| 2.0 * x, &g).unwrap();
        let big_f = integrate_cumulative(&f, 0.0).unwrap();
        assert!(max_err(&big_f, |x| x * x, 0) < 1e-14);
        let mid = integrate_cumulative(&f, 0.5).unwrap();
        assert_eq!(mid.values()[50], 0.0);
        assert!(mid.values()[10] < 0.0);
        assert!(max_err(&mid, |x| x * x - 0.25, 0) < 1e-14);
        // base between nodes
        let off = integrate_cumulative(&f, 0.505).unwrap();
        assert!(max_err(&off, |x| x * x - 0.505 * 0.505, 0) < 1e-12);
        assert!(integrate_cumulative(&f, 1.5).is_err());
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        let e = |n| {
            let g = Grid::new(0.0, 2.0, n).unwrap();
            let f = sample(f64::cos, &g).unwrap();
            max_err(&integrate_cumulative(&f, 0.0).unwrap(), f64::sin, 0)
        };
        let (e1, e2) = (e(101), e(201));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn corrected_trapezoid_with_exact_derivatives() {
        let g = Grid::new(0.0, 2.0, 101).unwrap();
        let f = ScalarField::analytic(&g, 6, |x| x.cos()).unwrap();
        let big_f = integrate_cumulative(&f, 0.0).unwrap();
        assert!(max_err(&big_f, f64::sin, 0) < 1e-11);
        assert_eq!(big_f.exact_order(), 7);
    }

    #[test]
    fn fundamental_theorem_round_trip() {
        let g = Grid::new(0.0, 3.0, 301).unwrap();
        let f = sample(|x| (x * 1.7).sin() + x, &g).unwrap();
        let big_f = integrate_cumulative(&f, 1.0).unwrap().sampled_only();
        let back = derive(&big_f, 1).unwrap();
        let err = (1..300)
            .map(|i| (back.values()[i] - f.values()[i]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "err {err}");
    }

    #[test]
    fn wronskian_examples() {
        let g = Grid::new(0.0, 4.0, 401).unwrap();
        let k = 1.3;
        let s = sample(|x| (k * x).sin(), &g).unwrap();
        let c = sample(|x| (k * x).cos(), &g).unwrap();
        assert_eq!(wronskian(&s, &s).unwrap().max_abs(), 0.0);
        let w = wronskian(&s, &c).unwrap();
        assert!(max_err(&w, |_| -k, 0) < 1e-3);
        let other = sample(|x| x, &Grid::new(0.0, 1.0, 401).unwrap()).unwrap();
        assert!(wronskian(&s, &other).is_err());
    }

    #[test]
    fn midpoint_values() {
        let g = Grid::new(0.0, 1.0, 33).unwrap();
        let s = sample(|x| x.powi(3), &g).unwrap();
        let h = g.h();
        for i in 0..32 {
            let x = g.nodes()[i] + 0.5 * h;
            assert!((s.midpoint(i) - x.powi(3)).abs() < 1e-14);
        }
        let a = ScalarField::analytic(&g, 8, |x| x.exp()).unwrap();
        for i in 0..32 {
            let x = g.nodes()[i] + 0.5 * h;
            assert!((a.midpoint(i) - x.exp()).abs() < 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn field(vals: Vec<f64>) -> ScalarField {
            let g = Grid::new(0.0, 1.0, vals.len()).unwrap();
            ScalarField::from_values(&g, vals).unwrap()
        }

        proptest! {
            #[test]
            fn wronskian_antisymmetric(
                a in prop::collection::vec(-10.0f64..10.0, 20),
                b in prop::collection::vec(-10.0f64..10.0, 20),
            ) {
                let (f, g) = (field(a), field(b));
                let w1 = wronskian(&f, &g).unwrap();
                let w2 = wronskian(&g, &f).unwrap();
                for i in 0..20 {
                    prop_assert_eq!(w1.values()[i], -w2.values()[i]);
                }
            }

            #[test]
            fn derive_and_integrate_are_linear(
                a in prop::collection::vec(-10.0f64..10.0, 24),
                b in prop::collection::vec(-10.0f64..10.0, 24),
                s in -5.0f64..5.0,
            ) {
                let (f, g) = (field(a), field(b));
                let comb = &(&f * s) + &g;
                let lhs = derive(&comb, 1).unwrap();
                let rhs = &(&derive(&f, 1).unwrap() * s) + &derive(&g, 1).unwrap();
                let li = integrate_cumulative(&comb, 0.25).unwrap();
                let ri = &(&integrate_cumulative(&f, 0.25).unwrap() * s)
                    + &integrate_cumulative(&g, 0.25).unwrap();
                for i in 0..24 {
                    let scale = 1.0 + rhs.values()[i].abs();
                    prop_assert!((lhs.values()[i] - rhs.values()[i]).abs() <= 1e-12 * scale * 100.0);
                    prop_assert!((li.values()[i] - ri.values()[i]).abs() <= 1e-12 * (1.0 + ri.values()[i].abs()));
                }
            }
        }
    }
}
