//! Real-coefficient polynomials and rational transfer functions.
//!
//! Coefficients are stored in ascending powers of `s`, so `coeffs[0]` is the
//! constant term. Nothing in this module simplifies a rational function on its
//! own; common factors are only removed through [`RationalTf::cancel_common_root`].

use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Carrier for evaluations at `s = jω`.
pub type ComplexValue = Complex64;

/// Absolute floor below which a denominator is treated as vanishing.
const POLE_FLOOR: f64 = 1e-300;

/// Two roots closer than this (relative) are treated as one multiple root.
const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming zero leading terms.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::constant(1.0), |acc, &r| {
            &acc * &Self::new(vec![-r, 1.0])
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: ComplexValue) -> ComplexValue {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Synthetic division by `(s - root)`. Returns the quotient and the remainder.
    pub fn deflate(&self, root: f64) -> (Self, f64) {
        let n = self.degree();
        if n == 0 {
            return (Self::zero(), self.coeffs[0]);
        }
        let mut quotient = vec![0.0; n];
        let mut carry = 0.0;
        for k in (0..=n).rev() {
            let value = self.coeffs[k] + carry * root;
            if k == 0 {
                return (Self::new(quotient), value);
            }
            quotient[k - 1] = value;
            carry = value;
        }
        unreachable!()
    }

    /// All roots with multiplicity, for degrees 1 to 3.
    ///
    /// Quadratics use the cancellation-free form of the quadratic formula.
    /// Cubics locate one real root by safeguarded Newton on a sign bracket,
    /// deflate, and solve the remaining quadratic. Clustered roots are then
    /// refined on the appropriate derivative, where they are simple.
    pub fn roots(&self) -> Result<Vec<ComplexValue>> {
        let c = &self.coeffs;
        let mut roots = match self.degree() {
            1 => vec![Complex64::new(-c[0] / c[1], 0.0)],
            2 => quadratic_roots(c[2], c[1], c[0]).to_vec(),
            3 => cubic_roots(c[3], c[2], c[1], c[0]),
            d => return Err(Error::DegreeUnsupported(d)),
        };
        refine_clusters(self, &mut roots);
        for r in roots.iter_mut() {
            polish(self, r);
        }
        roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }

    /// Residual bound a returned root must satisfy.
    pub fn root_tolerance(&self, root: ComplexValue) -> f64 {
        1e-9 * self.max_abs_coeff() * root.norm().max(1.0).powi(self.degree() as i32)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let at = |p: &Polynomial, k: usize| p.coeffs.get(k).copied().unwrap_or(0.0);
        Polynomial::new((0..n).map(|k| at(self, k) + at(rhs, k)).collect())
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [ComplexValue; 2] {
    let real = |x: f64| Complex64::new(x, 0.0);
    if c == 0.0 {
        return [real(0.0), real(-b / a)];
    }
    let four_ac = 4.0 * a * c;
    let disc = b.mul_add(b, -four_ac);
    if disc.abs() <= 8.0 * f64::EPSILON * (b * b + four_ac.abs()) {
        let r = -b / (2.0 * a);
        return [real(r), real(r)];
    }
    if disc > 0.0 {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let q = -0.5 * (b + sign * disc.sqrt());
        [real(q / a), real(c / q)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a.abs());
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

fn cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<ComplexValue> {
    let (a, b, c) = (c2 / c3, c1 / c3, c0 / c3);
    if c == 0.0 {
        let [r1, r2] = quadratic_roots(1.0, a, b);
        return vec![Complex64::new(0.0, 0.0), r1, r2];
    }

    // Depressed form y^3 + p y + q with x = y - a/3; p = q = 0 means a triple root.
    let shift = -a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let tol = 64.0 * f64::EPSILON;
    if p.abs() <= tol * (b.abs() + a * a / 3.0)
        && q.abs() <= tol * (2.0 * (a * a * a).abs() / 27.0 + (a * b).abs() / 3.0 + c.abs())
    {
        return vec![Complex64::new(shift, 0.0); 3];
    }

    let monic = Polynomial::new(vec![c, b, a, 1.0]);
    let r = bracketed_real_root(&monic);
    let e = a + r;
    let f = b + e * r;
    let [r1, r2] = quadratic_roots(1.0, e, f);
    vec![Complex64::new(r, 0.0), r1, r2]
}

/// One real root of a monic odd-degree polynomial, by Newton steps kept inside
/// a sign-change bracket and falling back to bisection.
fn bracketed_real_root(p: &Polynomial) -> f64 {
    let bound = 1.0 + p.coeffs()[..p.degree()].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let dp = p.derivative();
    let (mut lo, mut hi) = (-bound, bound);
    let mut x = 0.0;
    for _ in 0..500 {
        let fx = p.eval_real(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dp.eval_real(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs())
        {
            return next;
        }
        x = next;
    }
    x
}

/// Replaces each group of clustered roots of size m by the nearby simple root
/// of the (m-1)-th derivative.
fn refine_clusters(p: &Polynomial, roots: &mut [ComplexValue]) {
    let n = roots.len();
    let close = |a: ComplexValue, b: ComplexValue| {
        (a - b).norm() <= CLUSTER_TOL * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
    };
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let group: Vec<usize> = (i..n).filter(|&j| !used[j] && close(roots[i], roots[j])).collect();
        if group.len() < 2 {
            continue;
        }
        let mean = group.iter().map(|&j| roots[j].re).sum::<f64>() / group.len() as f64;
        let mut d = p.clone();
        for _ in 1..group.len() {
            d = d.derivative();
        }
        let refined = newton_real(&d, mean);
        for &j in &group {
            used[j] = true;
            roots[j] = Complex64::new(refined, 0.0);
        }
    }
}

fn newton_real(p: &Polynomial, mut x: f64) -> f64 {
    let dp = p.derivative();
    for _ in 0..50 {
        let d = dp.eval_real(x);
        if d == 0.0 {
            break;
        }
        let step = p.eval_real(x) / d;
        let next = x - step;
        if !next.is_finite() || p.eval_real(next).abs() > p.eval_real(x).abs() {
            break;
        }
        x = next;
        if step.abs() <= 2.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

/// A few Newton steps on the full polynomial, kept only while the residual shrinks.
fn polish(p: &Polynomial, r: &mut ComplexValue) {
    let dp = p.derivative();
    for _ in 0..3 {
        let d = dp.eval(*r);
        if d.norm() == 0.0 {
            return;
        }
        let next = *r - p.eval(*r) / d;
        if !(next.re.is_finite() && next.im.is_finite()) || p.eval(next).norm() >= p.eval(*r).norm() {
            return;
        }
        *r = next;
    }
}

/// A ratio of real polynomials in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    num: Polynomial,
    den: Polynomial,
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn from_coeffs(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        Self::new(Polynomial::new(num), Polynomial::new(den))
    }

    pub fn constant(c: f64) -> Self {
        Self {
            num: Polynomial::constant(c),
            den: Polynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    /// Evaluates at an arbitrary complex point.
    pub fn eval_at(&self, s: ComplexValue) -> Result<ComplexValue> {
        let den = self.den.eval(s);
        if den.norm() < POLE_FLOOR {
            return Err(Error::EvalAtPole(den.norm()));
        }
        Ok(self.num.eval(s) / den)
    }

    /// Frequency response at `s = jω`.
    pub fn eval(&self, omega: f64) -> Result<ComplexValue> {
        self.eval_at(Complex64::new(0.0, omega))
    }

    /// Series connection; numerators and denominators are multiplied as is.
    pub fn series(&self, other: &RationalTf) -> RationalTf {
        RationalTf {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    /// Closes a unity negative-feedback loop around `self`: `N / (N + D)`.
    pub fn unity_feedback(&self) -> RationalTf {
        RationalTf {
            num: self.num.clone(),
            den: &self.num + &self.den,
        }
    }

    pub fn poles(&self) -> Result<Vec<ComplexValue>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<ComplexValue>> {
        self.num.roots()
    }

    /// Divides numerator and denominator by `(s - root)`, provided both vanish
    /// there to within `rel_tol` of their coefficient scale.
    pub fn cancel_common_root(&self, root: f64, rel_tol: f64) -> Result<RationalTf> {
        let vanishes = |p: &Polynomial| {
            let scale: f64 = p
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.abs() * root.abs().powi(k as i32))
                .sum();
            p.degree() >= 1 && p.eval_real(root).abs() <= rel_tol * scale
        };
        if !(vanishes(&self.num) && vanishes(&self.den)) {
            return Err(Error::NoCommonFactor { root, tol: rel_tol });
        }
        RationalTf::new(self.num.deflate(root).0, self.den.deflate(root).0)
    }
}
