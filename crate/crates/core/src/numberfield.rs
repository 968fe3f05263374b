//! Exact arithmetic in the cubic field ℚ(β), where β > 1 is the real root of
//! x³ − 2x² + x − 1.
//!
//! Elements are stored as coefficient triples `a + bβ + cβ²` over ℚ. The
//! minimal polynomial is irreducible, so the representation is unique and
//! equality is coefficient-wise. Real-valued questions (sign, floor,
//! approximation) are answered exactly by interval evaluation on a
//! shrinking rational enclosure of β.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero in Q(beta)")]
    DivisionByZero,
    #[error("approximation tolerance must be positive")]
    NonPositiveTolerance,
    #[error("cannot parse field element from {0:?}")]
    Parse(String),
}

/// p(x) = x³ − 2x² + x − 1.
fn minimal_poly(x: &BigRational) -> BigRational {
    let two = BigRational::from_integer(2.into());
    ((x - &two) * x + BigRational::one()) * x - BigRational::one()
}

/// Isolating interval `[lo, hi]` for β with p(lo) < 0 < p(hi).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootEnclosure {
    lo: BigRational,
    hi: BigRational,
}

impl RootEnclosure {
    /// The starting enclosure [7/4, 9/5].
    pub fn initial() -> Self {
        RootEnclosure {
            lo: ratio(7, 4),
            hi: ratio(9, 5),
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// One bisection step; the width exactly halves.
    pub fn refine(&mut self) {
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        // p is irreducible over Q, so p(mid) is never zero.
        if minimal_poly(&mid).is_negative() {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }

    /// Rigorous bounds for the real value of `x` with β in this enclosure.
    pub fn bounds_of(&self, x: &FieldElement) -> (BigRational, BigRational) {
        // lo > 0, so x ↦ x² is increasing on the enclosure.
        let lo2 = &self.lo * &self.lo;
        let hi2 = &self.hi * &self.hi;
        let (bl, bh) = scaled(&x.b, &self.lo, &self.hi);
        let (cl, ch) = scaled(&x.c, &lo2, &hi2);
        (&x.a + bl + cl, &x.a + bh + ch)
    }

    fn is_valid(&self) -> bool {
        self.lo < self.hi
            && minimal_poly(&self.lo).is_negative()
            && minimal_poly(&self.hi).is_positive()
    }
}

fn scaled(k: &BigRational, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
    if k.is_negative() {
        (k * hi, k * lo)
    } else {
        (k * lo, k * hi)
    }
}

/// Shared enclosure refined once to width < 2⁻⁶⁴; individual queries refine
/// private copies further when they need to.
fn cached_enclosure() -> &'static RootEnclosure {
    static CACHE: OnceLock<RootEnclosure> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut enc = RootEnclosure::initial();
        for _ in 0..64 {
            enc.refine();
        }
        debug_assert!(enc.is_valid());
        enc
    })
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// An element `a + bβ + cβ²` of ℚ(β).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FieldElement {
    a: BigRational,
    b: BigRational,
    c: BigRational,
}

impl FieldElement {
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Self {
        FieldElement { a, b, c }
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Self {
        FieldElement::new(ratio(a, 1), ratio(b, 1), ratio(c, 1))
    }

    pub fn from_rational(q: BigRational) -> Self {
        FieldElement::new(q, BigRational::zero(), BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        FieldElement::from_ints(n, 0, 0)
    }

    pub fn zero() -> Self {
        FieldElement::default()
    }

    pub fn one() -> Self {
        FieldElement::from_integer(1)
    }

    pub fn beta() -> Self {
        FieldElement::from_ints(0, 1, 0)
    }

    /// β⁻¹ = 1 − 2β + β².
    pub fn beta_inv() -> Self {
        FieldElement::from_ints(1, -2, 1)
    }

    pub fn coefficients(&self) -> [&BigRational; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        FieldElement::new(&self.a * k, &self.b * k, &self.c * k)
    }

    /// Multiplicative inverse, found by solving `x · y = 1` as a 3×3 rational
    /// linear system in the coefficients of `y`.
    pub fn inverse(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        // Columns: coordinates of x, xβ, xβ².
        let col0 = self.clone();
        let col1 = &col0 * &FieldElement::beta();
        let col2 = &col1 * &FieldElement::beta();
        let cols = [col0, col1, col2];
        let mut m: Vec<Vec<BigRational>> = (0..3)
            .map(|row| {
                let mut r: Vec<BigRational> =
                    cols.iter().map(|c| c.coefficients()[row].clone()).collect();
                r.push(if row == 0 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                });
                r
            })
            .collect();
        for col in 0..3 {
            let pivot = (col..3)
                .find(|&r| !m[r][col].is_zero())
                .ok_or(FieldError::DivisionByZero)?;
            m.swap(col, pivot);
            let p = m[col][col].clone();
            for entry in m[col].iter_mut() {
                *entry = &*entry / &p;
            }
            for r in 0..3 {
                if r != col && !m[r][col].is_zero() {
                    let f = m[r][col].clone();
                    let pivot = m[col].clone();
                    for (x, y) in m[r].iter_mut().zip(pivot.iter()) {
                        *x -= &f * y;
                    }
                }
            }
        }
        Ok(FieldElement::new(
            m[0][3].clone(),
            m[1][3].clone(),
            m[2][3].clone(),
        ))
    }

    pub fn checked_div(&self, rhs: &FieldElement) -> Result<Self, FieldError> {
        Ok(self * &rhs.inverse()?)
    }

    /// Integer power; negative exponents go through [`FieldElement::inverse`].
    pub fn pow(&self, exp: i32) -> Result<Self, FieldError> {
        let base = if exp < 0 {
            self.inverse()?
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = FieldElement::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        Ok(acc)
    }

    /// β⁻ⁿ, never fails.
    pub fn beta_pow_neg(n: usize) -> Self {
        FieldElement::beta_inv()
            .pow(n as i32)
            .expect("non-negative power")
    }

    /// Exact sign of the real number under the embedding β ≈ 1.7549.
    pub fn sign(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let mut enc = cached_enclosure().clone();
        loop {
            let (lo, hi) = enc.bounds_of(self);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            enc.refine();
        }
    }

    /// Rational `q` with `|self − q| < eps`.
    pub fn approximate(&self, eps: &BigRational) -> Result<BigRational, FieldError> {
        if !eps.is_positive() {
            return Err(FieldError::NonPositiveTolerance);
        }
        let mut enc = cached_enclosure().clone();
        loop {
            let (lo, hi) = enc.bounds_of(self);
            if &(&hi - &lo) < eps {
                return Ok((lo + hi) / BigRational::from_integer(2.into()));
            }
            enc.refine();
        }
    }

    /// Nearest-ish double; good to about 1e-19 relative to the coefficient
    /// magnitudes. Reporting only.
    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = cached_enclosure().bounds_of(self);
        let mid = (lo + hi) / BigRational::from_integer(2.into());
        rational_to_f64(&mid)
    }

    /// Greatest integer `m` with `self − m ≥ 0`.
    pub fn floor(&self) -> BigInt {
        let estimate = self.to_f64().floor();
        let mut m = if estimate.is_finite() {
            BigInt::from(estimate as i64)
        } else {
            BigInt::zero()
        };
        let below = |m: &BigInt| (self - &FieldElement::from_bigint(m)).sign();
        while below(&m) == Ordering::Less {
            m -= 1;
        }
        while below(&(&m + 1)) != Ordering::Less {
            m += 1;
        }
        m
    }

    fn from_bigint(n: &BigInt) -> Self {
        FieldElement::from_rational(BigRational::from_integer(n.clone()))
    }

    pub fn cmp_value(&self, other: &FieldElement) -> Ordering {
        (self - other).sign()
    }
}

/// Converts an arbitrary rational to the nearest double without overflowing
/// on huge numerators or denominators.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift > 0 {
        q.numer() / (q.denom() << shift as usize)
    } else {
        (q.numer() << (-shift) as usize) / q.denom()
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

/// Natural logarithm of a positive rational, robust to huge magnitudes.
pub fn ln_rational(q: &BigRational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    (n >> shift as usize).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

// β³ = 2β² − β + 1 and β⁴ = 3β² − β + 2.
fn reduce(p: [BigRational; 5]) -> FieldElement {
    let [c0, c1, c2, c3, c4] = p;
    let two = BigRational::from_integer(2.into());
    let three = BigRational::from_integer(3.into());
    FieldElement::new(
        &c0 + &c3 + &two * &c4,
        &c1 - &c3 - &c4,
        &c2 + &two * &c3 + &three * &c4,
    )
}

impl<'a> Mul<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;

    fn mul(self, y: &FieldElement) -> FieldElement {
        let x = self;
        reduce([
            &x.a * &y.a,
            &x.a * &y.b + &x.b * &y.a,
            &x.a * &y.c + &x.b * &y.b + &x.c * &y.a,
            &x.b * &y.c + &x.c * &y.b,
            &x.c * &y.c,
        ])
    }
}

impl<'a> Add<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;

    fn add(self, y: &FieldElement) -> FieldElement {
        FieldElement::new(&self.a + &y.a, &self.b + &y.b, &self.c + &y.c)
    }
}

impl<'a> Sub<&'a FieldElement> for &'a FieldElement {
    type Output = FieldElement;

    fn sub(self, y: &FieldElement) -> FieldElement {
        FieldElement::new(&self.a - &y.a, &self.b - &y.b, &self.c - &y.c)
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement::new(-&self.a, -&self.b, -&self.c)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·β + {}·β²", self.a, self.b, self.c)
    }
}

impl FromStr for FieldElement {
    type Err = FieldError;

    /// Accepts a rational (`"3/5"`) or a coefficient triple (`"1,-2,1"`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<BigRational>()
                .map_err(|_| FieldError::Parse(s.to_string()))
        };
        let parts: Vec<&str> = s.split(',').collect();
        match parts.as_slice() {
            [q] => Ok(FieldElement::from_rational(parse(q)?)),
            [a, b, c] => Ok(FieldElement::new(parse(a)?, parse(b)?, parse(c)?)),
            _ => Err(FieldError::Parse(s.to_string())),
        }
    }
}
