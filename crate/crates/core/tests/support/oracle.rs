//! Exact big-rational evaluation of coupling coefficients.
//!
//! Every coefficient is carried as a signed square root `s·√q` with `q`
//! rational; the only floating-point step is the final square root.
//! Arguments are doubled integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `sign(v) · √|v|` stored as the rational `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedSqrt(pub BigRational);

impl SignedSqrt {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn from_int(v: i64) -> Self {
        let r = BigRational::from_integer(BigInt::from(v));
        Self(r.clone() * r.abs())
    }

    /// `√q` for non-negative rational `q`.
    pub fn sqrt_of(q: BigRational) -> Self {
        assert!(!q.is_negative());
        Self(q)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn neg(&self) -> Self {
        Self(-self.0.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let mag = self.0.abs().to_f64().unwrap().sqrt();
        if self.0.is_negative() {
            -mag
        } else {
            mag
        }
    }
}

fn fact(n: i64) -> BigInt {
    assert!(n >= 0, "negative factorial argument {n}");
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn tri_ok(a: i64, b: i64, c: i64) -> bool {
    (a + b + c) % 2 == 0 && (a - b).abs() <= c && c <= a + b
}

/// Δ(abc) from doubled arguments.
fn triangle_coeff(a: i64, b: i64, c: i64) -> BigRational {
    BigRational::new(
        fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2),
        fact((a + b + c) / 2 + 1),
    )
}

pub fn cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> SignedSqrt {
    if m1 + m2 != m || !tri_ok(j1, j2, j) || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return SignedSqrt::zero();
    }
    let pre = BigRational::from_integer(BigInt::from(j + 1))
        * triangle_coeff(j1, j2, j)
        * BigRational::from_integer(
            fact((j1 + m1) / 2)
                * fact((j1 - m1) / 2)
                * fact((j2 + m2) / 2)
                * fact((j2 - m2) / 2)
                * fact((j + m) / 2)
                * fact((j - m) / 2),
        );
    let mut sum = BigRational::zero();
    for k in 0..=((j1 + j2 + j) / 2) {
        let args = [
            k,
            (j1 + j2 - j) / 2 - k,
            (j1 - m1) / 2 - k,
            (j2 + m2) / 2 - k,
            (j - j2 + m1) / 2 + k,
            (j - j1 - m2) / 2 + k,
        ];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let denom = args.iter().fold(BigInt::one(), |acc, &a| acc * fact(a));
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    SignedSqrt(pre * &sum * sum.abs())
}

pub fn six_j(a: i64, b: i64, c: i64, d: i64, e: i64, f: i64) -> SignedSqrt {
    if !(tri_ok(a, b, c) && tri_ok(a, e, f) && tri_ok(d, b, f) && tri_ok(d, e, c)) {
        return SignedSqrt::zero();
    }
    let pre = triangle_coeff(a, b, c) * triangle_coeff(a, e, f) * triangle_coeff(d, b, f) * triangle_coeff(d, e, c);
    let triads = [a + b + c, a + e + f, d + b + f, d + e + c].map(|s| s / 2);
    let quads = [a + b + d + e, a + c + d + f, b + c + e + f].map(|s| s / 2);
    let mut sum = BigRational::zero();
    for t in 0..=200 {
        if triads.iter().any(|&s| t < s) || quads.iter().any(|&q| t > q) {
            continue;
        }
        let denom = triads.iter().fold(BigInt::one(), |acc, &s| acc * fact(t - s))
            * quads.iter().fold(BigInt::one(), |acc, &q| acc * fact(q - t));
        let term = BigRational::new(fact(t + 1), denom);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    SignedSqrt(pre * &sum * sum.abs())
}

pub fn racah_w(a: i64, b: i64, c: i64, d: i64, e: i64, f: i64) -> SignedSqrt {
    let v = six_j(a, b, e, d, c, f);
    if ((a + b + c + d) / 2) % 2 == 0 {
        v
    } else {
        v.neg()
    }
}

pub fn z_coeff(l1: i64, j1: i64, l2: i64, j2: i64, s: i64, big_l: i64) -> SignedSqrt {
    if l1 % 2 != 0 || l2 % 2 != 0 || big_l % 2 != 0 {
        return SignedSqrt::zero();
    }
    let norm = SignedSqrt::sqrt_of(BigRational::from_integer(BigInt::from(
        (l1 + 1) * (l2 + 1) * (j1 + 1) * (j2 + 1),
    )));
    norm.mul(&cg(l1, 0, l2, 0, big_l, 0)).mul(&racah_w(l1, j1, l2, j2, s, big_l))
}

/// `P_l(x)` from the explicit closed forms, l <= 6.
pub fn legendre_closed(l: u32, x: f64) -> f64 {
    let x2 = x * x;
    match l {
        0 => 1.0,
        1 => x,
        2 => 0.5 * (3.0 * x2 - 1.0),
        3 => 0.5 * (5.0 * x2 * x - 3.0 * x),
        4 => (35.0 * x2 * x2 - 30.0 * x2 + 3.0) / 8.0,
        5 => (63.0 * x2 * x2 * x - 70.0 * x2 * x + 15.0 * x) / 8.0,
        6 => (231.0 * x2 * x2 * x2 - 315.0 * x2 * x2 + 105.0 * x2 - 5.0) / 16.0,
        _ => panic!("closed form only up to l = 6"),
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// closed-form-free three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let k = k as f64;
                let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}
