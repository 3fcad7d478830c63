//! Truncated multivariate Taylor expansions ("jets") in up to three chart
//! variables.
//!
//! A jet stores `∂^γ f / γ!` at the expansion point for every monomial `γ`
//! of total degree at most `order`. Coefficients live in a fixed dense array
//! over the 56 monomials of degree ≤ 5 in three variables, sorted by degree,
//! so a jet of order `k` only touches a prefix of the array.
//!
//! Metric jets are kept to order 4 (the Laplacian of the scalar curvature
//! needs four metric derivatives). Embeddings are expanded one order higher
//! because the metric is built from their first derivatives.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 3;
pub const MAX_ORDER: usize = 5;
const NUM_MONOMIALS: usize = 56;

struct Layout {
    exponents: [[u8; MAX_VARS]; NUM_MONOMIALS],
    /// `index[a][b][c]` is the slot of `x^a y^b z^c`, or `u8::MAX`.
    index: [[[u8; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1],
    /// Truncated Cauchy product tables keyed by `(nvars − 1, order)`.
    products: Vec<Vec<(u8, u8, u8)>>,
}

fn layout() -> &'static Layout {
    static LAYOUT: OnceLock<Layout> = OnceLock::new();
    LAYOUT.get_or_init(|| {
        let mut exponents = [[0u8; MAX_VARS]; NUM_MONOMIALS];
        let mut degree = [0u8; NUM_MONOMIALS];
        let mut index = [[[u8::MAX; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1];
        let mut slot = 0usize;
        for d in 0..=MAX_ORDER {
            for a in (0..=d).rev() {
                for b in (0..=d - a).rev() {
                    let c = d - a - b;
                    exponents[slot] = [a as u8, b as u8, c as u8];
                    degree[slot] = d as u8;
                    index[a][b][c] = slot as u8;
                    slot += 1;
                }
            }
        }
        debug_assert_eq!(slot, NUM_MONOMIALS);
        let mut products = Vec::new();
        for nvars in 1..=MAX_VARS {
            for order in 0..=MAX_ORDER {
                let active = |e: &[u8; MAX_VARS]| e[nvars..].iter().all(|&v| v == 0);
                let mut table = Vec::new();
                for i in 0..monomial_count(order) {
                    if !active(&exponents[i]) {
                        continue;
                    }
                    for j in 0..monomial_count(order - degree[i] as usize) {
                        if !active(&exponents[j]) {
                            continue;
                        }
                        let (ei, ej) = (exponents[i], exponents[j]);
                        let k = index[(ei[0] + ej[0]) as usize][(ei[1] + ej[1]) as usize]
                            [(ei[2] + ej[2]) as usize];
                        table.push((i as u8, j as u8, k));
                    }
                }
                products.push(table);
            }
        }
        Layout {
            exponents,
            index,
            products,
        }
    })
}

/// Number of monomials of degree ≤ `order` in three variables.
const fn monomial_count(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

fn slot_of(exps: &[u8]) -> Option<usize> {
    let mut e = [0usize; MAX_VARS];
    for (dst, &src) in e.iter_mut().zip(exps) {
        *dst = src as usize;
    }
    if exps.len() > MAX_VARS || e.iter().sum::<usize>() > MAX_ORDER {
        return None;
    }
    let s = layout().index[e[0]][e[1]][e[2]];
    (s != u8::MAX).then_some(s as usize)
}

#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    nvars: u8,
    order: u8,
    c: [f64; NUM_MONOMIALS],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = layout();
        let mut m = f.debug_map();
        for i in 0..monomial_count(self.order as usize) {
            if self.c[i] != 0.0 {
                let e = &l.exponents[i][..self.nvars as usize];
                m.entry(&e, &self.c[i]);
            }
        }
        m.finish()
    }
}

impl Jet {
    /// Constant jet.
    pub fn constant(value: f64, nvars: usize, order: usize) -> Self {
        assert!((1..=MAX_VARS).contains(&nvars), "jets support 1..=3 variables");
        assert!(order <= MAX_ORDER, "jets support order <= 5");
        let mut c = [0.0; NUM_MONOMIALS];
        c[0] = value;
        Jet {
            nvars: nvars as u8,
            order: order as u8,
            c,
        }
    }

    pub fn zero(nvars: usize, order: usize) -> Self {
        Self::constant(0.0, nvars, order)
    }

    /// Identity-coordinate jet of variable `var` expanded at `point`.
    pub fn lift(point: &[f64], var: usize, order: usize) -> Result<Self> {
        if point.is_empty() || point.len() > MAX_VARS {
            return Err(Error::precondition(format!(
                "jets support 1..=3 variables, got {}",
                point.len()
            )));
        }
        if var >= point.len() {
            return Err(Error::precondition(format!(
                "variable index {var} out of range for {} variables",
                point.len()
            )));
        }
        if order > MAX_ORDER {
            return Err(Error::precondition(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        let mut j = Self::constant(point[var], point.len(), order);
        if order >= 1 {
            j.c[1 + var] = 1.0;
        }
        Ok(j)
    }

    /// Coordinate jets `(x₁, …, xₙ)` at `point`.
    pub fn coordinates(point: &[f64], order: usize) -> Result<Vec<Jet>> {
        (0..point.len()).map(|v| Self::lift(point, v, order)).collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient `∂^γ f / γ!`.
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        match slot_of(exps) {
            Some(s) if s < monomial_count(self.order as usize) => self.c[s],
            _ => 0.0,
        }
    }

    pub fn set_coeff(&mut self, exps: &[u8], value: f64) {
        let s = slot_of(exps).expect("monomial within layout");
        assert!(s < monomial_count(self.order as usize), "monomial above jet order");
        self.c[s] = value;
    }

    /// Partial derivative `∂^γ f` at the expansion point.
    pub fn partial(&self, exps: &[u8]) -> f64 {
        let fact: f64 = exps
            .iter()
            .map(|&e| (1..=e as u32).product::<u32>() as f64)
            .product();
        self.coeff(exps) * fact
    }

    /// Gradient at the expansion point.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.nvars()).map(|v| if self.order >= 1 { self.c[1 + v] } else { 0.0 }).collect()
    }

    /// Hessian at the expansion point, row-major.
    pub fn hessian(&self) -> Vec<f64> {
        let n = self.nvars();
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut e = [0u8; MAX_VARS];
                e[i] += 1;
                e[j] += 1;
                h[i * n + j] = self.partial(&e[..n]);
            }
        }
        h
    }

    /// Coefficients of the active monomials of degree ≤ `order`, ordered as
    /// in [`Jet::monomials`].
    pub fn coefficients(&self) -> Vec<f64> {
        active_slots(self.nvars(), self.order()).map(|i| self.c[i]).collect()
    }

    pub fn from_coefficients(nvars: usize, order: usize, coeffs: &[f64]) -> Result<Self> {
        if !(1..=MAX_VARS).contains(&nvars) || order > MAX_ORDER {
            return Err(Error::precondition("jet shape out of range"));
        }
        let slots: Vec<usize> = active_slots(nvars, order).collect();
        if coeffs.len() != slots.len() {
            return Err(Error::precondition(format!(
                "order {order} jet in {nvars} variables needs {} coefficients, got {}",
                slots.len(),
                coeffs.len()
            )));
        }
        let mut j = Self::zero(nvars, order);
        for (&s, &v) in slots.iter().zip(coeffs) {
            j.c[s] = v;
        }
        Ok(j)
    }

    /// Exponent vectors of the monomials in `nvars` variables of degree ≤
    /// `order`, by degree.
    pub fn monomials(nvars: usize, order: usize) -> impl Iterator<Item = Vec<u8>> {
        active_slots(nvars, order).map(move |i| layout().exponents[i][..nvars].to_vec())
    }

    /// Derivative with respect to variable `var`; the order drops by one.
    pub fn deriv(&self, var: usize) -> Jet {
        assert!(var < self.nvars(), "derivative variable out of range");
        let l = layout();
        let order = self.order.saturating_sub(1);
        let mut out = Jet::zero(self.nvars(), order as usize);
        if self.order == 0 {
            return out;
        }
        for i in 0..monomial_count(order as usize) {
            let mut e = l.exponents[i];
            e[var] += 1;
            let src = l.index[e[0] as usize][e[1] as usize][e[2] as usize] as usize;
            out.c[i] = e[var] as f64 * self.c[src];
        }
        out
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order as usize {
            return *self;
        }
        let mut out = Jet::zero(self.nvars(), order);
        let m = monomial_count(order);
        out.c[..m].copy_from_slice(&self.c[..m]);
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = *self;
        out.c.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = *self;
        out.c[0] += s;
        out
    }

    fn combine_shape(&self, other: &Jet) -> (usize, usize) {
        (self.nvars.max(other.nvars) as usize, self.order.min(other.order) as usize)
    }

    /// Nilpotent part `(f − f₀)/f₀`.
    fn relative_tail(&self) -> Jet {
        let mut t = self.scale(1.0 / self.c[0]);
        t.c[0] = 0.0;
        t
    }

    /// `Σ_k coeffs[k]·tᵏ` by Horner's rule; `t` must have no constant term.
    fn series(t: &Jet, coeffs: &[f64]) -> Jet {
        let mut r = Jet::constant(*coeffs.last().unwrap(), t.nvars(), t.order());
        for &c in coeffs.iter().rev().skip(1) {
            r = (t * r).add_scalar(c);
        }
        r
    }

    pub fn recip(&self) -> Result<Jet> {
        let f0 = self.c[0];
        if f0 == 0.0 || !f0.is_finite() {
            return Err(Error::domain("division by a jet with zero constant term"));
        }
        let t = self.relative_tail();
        let coeffs: Vec<f64> = (0..=self.order).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Ok(Self::series(&t, &coeffs).scale(1.0 / f0))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * other.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if !(self.c[0] > 0.0) {
            return Err(Error::domain(format!(
                "square root of a jet with constant term {}",
                self.c[0]
            )));
        }
        self.powf(0.5)
    }

    /// `f^p` for `f₀ > 0` through the binomial series.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let f0 = self.c[0];
        if !(f0 > 0.0) {
            return Err(Error::domain(format!("real power of a jet with constant term {f0}")));
        }
        let t = self.relative_tail();
        let mut coeffs = Vec::with_capacity(self.order as usize + 1);
        let mut binom = 1.0;
        for k in 0..=self.order as usize {
            coeffs.push(binom);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        Ok(Self::series(&t, &coeffs).scale(f0.powf(p)))
    }

    pub fn powi(&self, p: i32) -> Result<Jet> {
        let base = if p < 0 { self.recip()? } else { *self };
        let mut acc = Jet::constant(1.0, self.nvars(), self.order());
        for _ in 0..p.unsigned_abs() {
            acc = acc * base;
        }
        Ok(acc)
    }

    pub fn is_finite(&self) -> bool {
        self.c[..monomial_count(self.order())].iter().all(|v| v.is_finite())
    }

    /// Largest coefficient difference, over the common order.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        let m = monomial_count(self.order.min(other.order) as usize);
        (0..m).map(|i| (self.c[i] - other.c[i]).abs()).fold(0.0, f64::max)
    }
}

impl Add for &Jet {
    type Output = Jet;

    fn add(self, rhs: &Jet) -> Jet {
        let (nvars, order) = self.combine_shape(rhs);
        let mut out = Jet::zero(nvars, order);
        for i in 0..monomial_count(order) {
            out.c[i] = self.c[i] + rhs.c[i];
        }
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;

    fn sub(self, rhs: &Jet) -> Jet {
        let (nvars, order) = self.combine_shape(rhs);
        let mut out = Jet::zero(nvars, order);
        for i in 0..monomial_count(order) {
            out.c[i] = self.c[i] - rhs.c[i];
        }
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;

    fn mul(self, rhs: &Jet) -> Jet {
        let (nvars, order) = self.combine_shape(rhs);
        let table = &layout().products[(nvars - 1) * (MAX_ORDER + 1) + order];
        let mut out = Jet::zero(nvars, order);
        for &(i, j, k) in table {
            out.c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;

    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_by_value {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { $tr::$m(&self, &rhs) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet { $tr::$m(&self, rhs) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { $tr::$m(self, &rhs) }
        }
    )*};
}

forward_by_value!(Add::add, Sub::sub, Mul::mul);

impl Neg for Jet {
    type Output = Jet;

    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;

    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;

    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = *self + rhs;
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = *self - rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

/// Dense `rows×cols` matrix of jets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        JetMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Values at the expansion point.
    pub fn value(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn deriv(&self, var: usize) -> Self {
        self.map(|j| j.deriv(var))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }

    pub fn matmul(&self, other: &JetMatrix) -> JetMatrix {
        assert_eq!(self.cols, other.rows, "jet matrix shape mismatch");
        JetMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self.get(i, 0) * other.get(0, j);
            for k in 1..self.cols {
                acc += self.get(i, k) * other.get(k, j);
            }
            acc
        })
    }

    pub fn transpose(&self) -> JetMatrix {
        JetMatrix::from_fn(self.cols, self.rows, |i, j| *self.get(j, i))
    }

    pub fn trace(&self) -> Jet {
        let mut acc = *self.get(0, 0);
        for i in 1..self.rows.min(self.cols) {
            acc += self.get(i, i);
        }
        acc
    }

    /// Inverse by Gauss–Jordan elimination without pivoting; intended for
    /// SPD matrices, whose leading minors are nonzero.
    pub fn inverse(&self) -> Result<JetMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square jet matrix");
        let n = self.rows;
        let (nvars, order) = (self.data[0].nvars(), self.order());
        let mut a = self.clone();
        let mut inv = JetMatrix::from_fn(n, n, |i, j| Jet::constant(if i == j { 1.0 } else { 0.0 }, nvars, order));
        for p in 0..n {
            let pivot_inv = a.get(p, p).recip()?;
            for j in 0..n {
                a.set(p, j, a.get(p, j) * pivot_inv);
                inv.set(p, j, inv.get(p, j) * pivot_inv);
            }
            for i in 0..n {
                if i == p {
                    continue;
                }
                let factor = *a.get(i, p);
                for j in 0..n {
                    let na = a.get(i, j) - factor * a.get(p, j);
                    let ni = inv.get(i, j) - factor * inv.get(p, j);
                    a.set(i, j, na);
                    inv.set(i, j, ni);
                }
            }
        }
        Ok(inv)
    }
}

/// Determinant of a square jet matrix of size ≤ 4 by cofactor expansion.
pub fn det(m: &JetMatrix) -> Jet {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square jet matrix");
    fn rec(m: &JetMatrix, rows: &[usize], cols: &[usize]) -> Jet {
        if rows.len() == 1 {
            return *m.get(rows[0], cols[0]);
        }
        let sub_rows = &rows[1..];
        let mut acc: Option<Jet> = None;
        for (k, &c) in cols.iter().enumerate() {
            let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = m.get(rows[0], c) * rec(m, sub_rows, &sub_cols);
            let term = if k % 2 == 1 { -term } else { term };
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap()
    }
    let idx: Vec<usize> = (0..m.rows()).collect();
    rec(m, &idx, &idx)
}

fn active_slots(nvars: usize, order: usize) -> impl Iterator<Item = usize> {
    let l = layout();
    (0..monomial_count(order)).filter(move |&i| l.exponents[i][nvars..].iter().all(|&e| e == 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lift_examples() {
        let x = Jet::lift(&[2.0], 0, 2).unwrap();
        assert_eq!(x.coeff(&[0]), 2.0);
        assert_eq!(x.coeff(&[1]), 1.0);
        assert_eq!(x.coeff(&[2]), 0.0);
        let five = Jet::constant(5.0, 2, 3);
        assert_eq!(five.value(), 5.0);
        assert!(five.coefficients()[1..].iter().all(|&c| c == 0.0));
        let xs = Jet::coordinates(&[1.0, 1.0], 2).unwrap();
        let xy = xs[0] * xs[1];
        assert_eq!(xy.coeff(&[0, 0]), 1.0);
        assert_eq!(xy.coeff(&[1, 0]), 1.0);
        assert_eq!(xy.coeff(&[0, 1]), 1.0);
        assert_eq!(xy.coeff(&[1, 1]), 1.0);
        assert_eq!(xy.coeff(&[2, 0]), 0.0);
    }

    #[test]
    fn lift_rejects_bad_index() {
        assert!(Jet::lift(&[1.0, 2.0], 2, 2).is_err());
        assert!(Jet::lift(&[1.0, 2.0, 3.0, 4.0], 0, 2).is_err());
        assert!(Jet::lift(&[1.0], 0, 6).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let dx = Jet::lift(&[0.0], 0, 2).unwrap();
        let one = Jet::constant(1.0, 1, 2);
        let p = (one + dx) * (one - dx);
        assert_eq!(p.coefficients(), &[1.0, 0.0, -1.0]);

        let dx3 = Jet::lift(&[0.0], 0, 3).unwrap();
        let r = (dx3.add_scalar(1.0)).recip().unwrap();
        assert_eq!(r.coefficients(), &[1.0, -1.0, 1.0, -1.0]);

        let s = dx.add_scalar(1.0).sqrt().unwrap();
        assert!(close(s.coeff(&[0]), 1.0, 1e-15));
        assert!(close(s.coeff(&[1]), 0.5, 1e-15));
        assert!(close(s.coeff(&[2]), -0.125, 1e-15));
    }

    #[test]
    fn domain_errors() {
        let z = Jet::lift(&[0.0], 0, 2).unwrap();
        assert!(z.recip().is_err());
        assert!(z.sqrt().is_err());
        assert!(z.add_scalar(-1.0).sqrt().is_err());
        assert!(Jet::constant(1.0, 1, 2).try_div(&z).is_err());
    }

    #[test]
    fn derivative_and_partials() {
        // f = x²y + 3z³ at (1, 2, −1)
        let v = Jet::coordinates(&[1.0, 2.0, -1.0], 4).unwrap();
        let f = v[0] * v[0] * v[1] + (v[2] * v[2] * v[2]) * 3.0;
        assert!(close(f.value(), 2.0 - 3.0, 1e-14));
        assert!(close(f.partial(&[1, 0, 0]), 4.0, 1e-14));
        assert!(close(f.partial(&[2, 1, 0]), 2.0, 1e-14));
        assert!(close(f.partial(&[0, 0, 3]), 18.0, 1e-14));
        let fz = f.deriv(2);
        assert_eq!(fz.order(), 3);
        assert!(close(fz.value(), 9.0, 1e-14));
        assert!(close(fz.partial(&[0, 0, 1]), -18.0, 1e-14));
        assert_eq!(f.hessian()[1], 2.0);
    }

    #[test]
    fn powers_agree() {
        let v = Jet::coordinates(&[0.3, -0.2], 4).unwrap();
        let f = (v[0] * v[1]).add_scalar(1.5) + v[0];
        let cube = f.powi(3).unwrap();
        let cube2 = f.powf(3.0).unwrap();
        assert!(cube.max_abs_diff(&cube2) < 1e-13);
        let inv2 = f.powi(-2).unwrap();
        let prod = inv2 * f * f;
        assert!(prod.max_abs_diff(&Jet::constant(1.0, 2, 4)) < 1e-13);
    }

    #[test]
    fn matrix_inverse_and_det() {
        let v = Jet::coordinates(&[0.1, 0.2, 0.3], 3).unwrap();
        let m = JetMatrix::from_fn(3, 3, |i, j| {
            let base = if i == j { 2.0 } else { 0.3 };
            (v[i] * v[j]).add_scalar(base)
        });
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let target = Jet::constant(if i == j { 1.0 } else { 0.0 }, 3, 3);
                assert!(id.get(i, j).max_abs_diff(&target) < 1e-13);
            }
        }
        let d = det(&m);
        let dv = m.value().determinant();
        assert!(close(d.value(), dv, 1e-13));
    }

    #[test]
    fn coefficient_roundtrip() {
        let v = Jet::coordinates(&[0.5, 0.25], 3).unwrap();
        let f = (v[0] * v[1]).add_scalar(1.0).recip().unwrap();
        let back = Jet::from_coefficients(2, 3, &f.coefficients()).unwrap();
        assert_eq!(back, f);
        assert!(Jet::from_coefficients(2, 3, &[0.0; 5]).is_err());
        assert_eq!(Jet::monomials(3, 2).count(), 10);
        assert_eq!(Jet::monomials(2, 3).count(), 10);
        assert_eq!(Jet::monomials(1, 4).count(), 5);
    }
}
