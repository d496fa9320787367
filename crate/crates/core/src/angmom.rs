//! Angular-momentum coupling coefficients and Legendre polynomials.
//!
//! All quantum numbers are stored doubled so half-integers stay exact.
//! Coefficients are evaluated with Racah's single-sum formulas on a table of
//! log-factorials; every summand is carried as `sign * exp(log magnitude)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{LazyLock, RwLock};

use thiserror::Error;

/// Largest supported doubled spin.
pub const MAX_TWO_J: u32 = 40;

const FACTORIAL_TABLE_LEN: usize = 201;

static LOG_FACTORIAL: LazyLock<[f64; FACTORIAL_TABLE_LEN]> = LazyLock::new(|| {
    let mut table = [0.0; FACTORIAL_TABLE_LEN];
    for n in 2..FACTORIAL_TABLE_LEN {
        table[n] = table[n - 1] + (n as f64).ln();
    }
    table
});

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AngmomError {
    #[error("projection 2m={two_m} is incompatible with 2j={two_j}")]
    InvalidProjection { two_j: u32, two_m: i32 },
    #[error("doubled spin {0} exceeds the supported maximum {MAX_TWO_J}")]
    SpinTooLarge(u32),
    #[error("Legendre argument {0} lies outside [-1, 1]")]
    ArgumentOutOfRange(f64),
    #[error("malformed spin token {0:?}")]
    Parse(String),
}

/// A spin or orbital quantum number `j`, stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AngularMomentum(u32);

impl AngularMomentum {
    pub const ZERO: Self = Self(0);

    pub const fn from_doubled(two_j: u32) -> Self {
        Self(two_j)
    }

    /// Integer quantum number `j`.
    pub const fn integer(j: u32) -> Self {
        Self(2 * j)
    }

    pub const fn two_j(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Multiplicity `2j + 1`.
    pub const fn multiplicity(self) -> u32 {
        self.0 + 1
    }

    fn checked(self) -> Result<Self, AngmomError> {
        if self.0 > MAX_TWO_J {
            Err(AngmomError::SpinTooLarge(self.0))
        } else {
            Ok(self)
        }
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Parses `"1"`, `"3/2"`, or `"-1/2"`-style tokens into a doubled integer.
fn parse_doubled(token: &str) -> Result<i32, AngmomError> {
    let bad = || AngmomError::Parse(token.to_string());
    let t = token.trim();
    match t.split_once('/') {
        Some((num, "2")) => num.trim().parse::<i32>().map_err(|_| bad()),
        Some(_) => Err(bad()),
        None => t
            .parse::<i32>()
            .ok()
            .and_then(|v| v.checked_mul(2))
            .ok_or_else(bad),
    }
}

impl FromStr for AngularMomentum {
    type Err = AngmomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let two_j = parse_doubled(s)?;
        u32::try_from(two_j)
            .map(Self)
            .map_err(|_| AngmomError::Parse(s.to_string()))
    }
}

/// A magnetic projection `m`, stored as `2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Projection(i32);

impl Projection {
    pub const fn from_doubled(two_m: i32) -> Self {
        Self(two_m)
    }

    pub const fn integer(m: i32) -> Self {
        Self(2 * m)
    }

    pub const fn two_m(self) -> i32 {
        self.0
    }

    /// Whether `m` is a legal projection of `j`.
    pub fn fits(self, j: AngularMomentum) -> bool {
        self.0.unsigned_abs() <= j.0 && (self.0 - j.0 as i32) % 2 == 0
    }
}

impl FromStr for Projection {
    type Err = AngmomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_doubled(s).map(Self)
    }
}

/// Memoization key for one coefficient evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingKey {
    ClebschGordan([i32; 6]),
    SixJ([u32; 6]),
}

impl CouplingKey {
    pub fn clebsch_gordan(
        j1: AngularMomentum,
        m1: Projection,
        j2: AngularMomentum,
        m2: Projection,
        j: AngularMomentum,
        m: Projection,
    ) -> Self {
        Self::ClebschGordan([j1.0 as i32, m1.0, j2.0 as i32, m2.0, j.0 as i32, m.0])
    }

    /// Key for `{a b c; d e f}`, reduced to the lexicographically smallest of
    /// the 24 tetrahedral images so that symmetric arguments share one key.
    pub fn six_j(args: [AngularMomentum; 6]) -> Self {
        Self::SixJ(canonical_six_j(args.map(|a| a.0)))
    }
}

fn canonical_six_j(x: [u32; 6]) -> [u32; 6] {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best = x;
    for perm in PERMS {
        let cols = perm.map(|c| (x[c], x[c + 3]));
        // Flip upper/lower in an even number of columns.
        for flips in [[false, false, false], [true, true, false], [true, false, true], [false, true, true]] {
            let mut cand = [0u32; 6];
            for k in 0..3 {
                let (u, l) = if flips[k] { (cols[k].1, cols[k].0) } else { cols[k] };
                cand[k] = u;
                cand[k + 3] = l;
            }
            if cand < best {
                best = cand;
            }
        }
    }
    best
}

/// `|a - b| <= c <= a + b` with `a + b + c` integral.
pub fn triangle_ok(a: AngularMomentum, b: AngularMomentum, c: AngularMomentum) -> bool {
    let (a, b, c) = (a.0, b.0, c.0);
    (a + b + c) % 2 == 0 && a.abs_diff(b) <= c && c <= a + b
}

fn log_fact(doubled: i64) -> f64 {
    debug_assert!(doubled >= 0 && doubled % 2 == 0);
    LOG_FACTORIAL[(doubled / 2) as usize]
}

/// Log of the triangle coefficient Δ(abc) from doubled arguments.
fn log_triangle(a: i64, b: i64, c: i64) -> f64 {
    log_fact(a + b - c) + log_fact(a - b + c) + log_fact(-a + b + c) - log_fact(a + b + c + 2)
}

fn validate(j: AngularMomentum, m: Projection) -> Result<(), AngmomError> {
    j.checked()?;
    if m.fits(j) {
        Ok(())
    } else {
        Err(AngmomError::InvalidProjection { two_j: j.0, two_m: m.0 })
    }
}

/// `⟨j1 m1 j2 m2 | J M⟩` in the Condon–Shortley convention.
pub fn clebsch_gordan(
    j1: AngularMomentum,
    m1: Projection,
    j2: AngularMomentum,
    m2: Projection,
    j: AngularMomentum,
    m: Projection,
) -> Result<f64, AngmomError> {
    validate(j1, m1)?;
    validate(j2, m2)?;
    validate(j, m)?;
    if m1.0 + m2.0 != m.0 || !triangle_ok(j1, j2, j) {
        return Ok(0.0);
    }
    let (j1, m1, j2, m2, j, m) = (
        i64::from(j1.0),
        i64::from(m1.0),
        i64::from(j2.0),
        i64::from(m2.0),
        i64::from(j.0),
        i64::from(m.0),
    );
    let prefactor = 0.5
        * (((j + 1) as f64).ln()
            + log_triangle(j1, j2, j)
            + log_fact(j1 + m1)
            + log_fact(j1 - m1)
            + log_fact(j2 + m2)
            + log_fact(j2 - m2)
            + log_fact(j + m)
            + log_fact(j - m));

    // Doubled summation index; every factorial argument must stay >= 0.
    let k_min = 0.max(j2 - j - m1).max(j1 + m2 - j);
    let k_max = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    let mut k = k_min;
    while k <= k_max {
        let denom = log_fact(k)
            + log_fact(j1 + j2 - j - k)
            + log_fact(j1 - m1 - k)
            + log_fact(j2 + m2 - k)
            + log_fact(j - j2 + m1 + k)
            + log_fact(j - j1 - m2 + k);
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (prefactor - denom).exp();
        k += 2;
    }
    Ok(sum)
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`.
pub fn wigner_6j(
    j1: AngularMomentum,
    j2: AngularMomentum,
    j3: AngularMomentum,
    j4: AngularMomentum,
    j5: AngularMomentum,
    j6: AngularMomentum,
) -> Result<f64, AngmomError> {
    let args = [j1, j2, j3, j4, j5, j6];
    for a in args {
        a.checked()?;
    }
    Ok(six_j_canonical(canonical_six_j(args.map(|a| a.0))))
}

fn six_j_canonical(x: [u32; 6]) -> f64 {
    let [a, b, c, d, e, f] = x.map(AngularMomentum);
    if !(triangle_ok(a, b, c) && triangle_ok(a, e, f) && triangle_ok(d, b, f) && triangle_ok(d, e, c)) {
        return 0.0;
    }
    let [a, b, c, d, e, f] = x.map(i64::from);
    let triads = [a + b + c, a + e + f, d + b + f, d + e + c];
    let quads = [a + b + d + e, a + c + d + f, b + c + e + f];
    let prefactor = 0.5
        * (log_triangle(a, b, c) + log_triangle(a, e, f) + log_triangle(d, b, f) + log_triangle(d, e, c));

    let t_min = *triads.iter().max().unwrap();
    let t_max = *quads.iter().min().unwrap();
    let mut sum = 0.0;
    let mut t = t_min;
    while t <= t_max {
        let mut log_term = prefactor + log_fact(t + 2);
        for s in triads {
            log_term -= log_fact(t - s);
        }
        for q in quads {
            log_term -= log_fact(q - t);
        }
        let sign = if (t / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * log_term.exp();
        t += 2;
    }
    sum
}

fn phase(doubled: i64) -> f64 {
    debug_assert!(doubled % 2 == 0);
    if (doubled / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Racah coefficient `W(abcd; ef) = (-1)^(a+b+c+d) {a b e; d c f}`.
pub fn racah_w(
    a: AngularMomentum,
    b: AngularMomentum,
    c: AngularMomentum,
    d: AngularMomentum,
    e: AngularMomentum,
    f: AngularMomentum,
) -> Result<f64, AngmomError> {
    let six = wigner_6j(a, b, e, d, c, f)?;
    if six == 0.0 {
        return Ok(0.0);
    }
    Ok(phase(i64::from(a.0 + b.0 + c.0 + d.0)) * six)
}

/// Blatt–Biedenharn coefficient
/// `Z(l1 j1 l2 j2; s L) = √((2l1+1)(2l2+1)(2j1+1)(2j2+1)) ⟨l1 0 l2 0|L 0⟩ W(l1 j1 l2 j2; s L)`.
///
/// This is the original 1952 definition; the Huby `i^(l2-l1-L)` phase is not
/// included.
pub fn z_coeff(
    l1: AngularMomentum,
    j1: AngularMomentum,
    l2: AngularMomentum,
    j2: AngularMomentum,
    s: AngularMomentum,
    big_l: AngularMomentum,
) -> Result<f64, AngmomError> {
    for a in [l1, j1, l2, j2, s, big_l] {
        a.checked()?;
    }
    let cg = clebsch_gordan(
        l1,
        Projection(0),
        l2,
        Projection(0),
        big_l,
        Projection(0),
    );
    // Half-integer orbital momenta have no m = 0 projection; Z vanishes.
    let cg = match cg {
        Ok(v) => v,
        Err(AngmomError::InvalidProjection { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    if cg == 0.0 {
        return Ok(0.0);
    }
    let w = racah_w(l1, j1, l2, j2, s, big_l)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    let norm = f64::from(l1.multiplicity() * l2.multiplicity() * j1.multiplicity() * j2.multiplicity());
    Ok(norm.sqrt() * cg * w)
}

/// Legendre polynomial `P_l(x)` by Bonnet's recurrence.
pub fn legendre_p(l: u32, x: f64) -> Result<f64, AngmomError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(AngmomError::ArgumentOutOfRange(x));
    }
    Ok(legendre_unchecked(l, x))
}

pub(crate) fn legendre_unchecked(l: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for n in 1..l {
        let n = f64::from(n);
        let next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Thread-safe memo table over [`CouplingKey`].
///
/// Values come from the same evaluation routines as the free functions, so
/// cached and uncached results agree bit for bit.
#[derive(Debug, Default)]
pub struct CoefficientCache {
    table: RwLock<HashMap<CouplingKey, f64>>,
}

impl CoefficientCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("coefficient cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_insert(&self, key: CouplingKey, eval: impl FnOnce() -> f64) -> f64 {
        if let Some(&v) = self.table.read().expect("coefficient cache poisoned").get(&key) {
            return v;
        }
        let v = eval();
        self.table
            .write()
            .expect("coefficient cache poisoned")
            .insert(key, v);
        v
    }

    pub fn clebsch_gordan(
        &self,
        j1: AngularMomentum,
        m1: Projection,
        j2: AngularMomentum,
        m2: Projection,
        j: AngularMomentum,
        m: Projection,
    ) -> Result<f64, AngmomError> {
        validate(j1, m1)?;
        validate(j2, m2)?;
        validate(j, m)?;
        let key = CouplingKey::clebsch_gordan(j1, m1, j2, m2, j, m);
        Ok(self.get_or_insert(key, || {
            clebsch_gordan(j1, m1, j2, m2, j, m).expect("arguments validated")
        }))
    }

    pub fn wigner_6j(
        &self,
        j1: AngularMomentum,
        j2: AngularMomentum,
        j3: AngularMomentum,
        j4: AngularMomentum,
        j5: AngularMomentum,
        j6: AngularMomentum,
    ) -> Result<f64, AngmomError> {
        let args = [j1, j2, j3, j4, j5, j6];
        for a in args {
            a.checked()?;
        }
        let key = CouplingKey::six_j(args);
        let CouplingKey::SixJ(canon) = key else { unreachable!() };
        Ok(self.get_or_insert(key, || six_j_canonical(canon)))
    }

    pub fn racah_w(
        &self,
        a: AngularMomentum,
        b: AngularMomentum,
        c: AngularMomentum,
        d: AngularMomentum,
        e: AngularMomentum,
        f: AngularMomentum,
    ) -> Result<f64, AngmomError> {
        let six = self.wigner_6j(a, b, e, d, c, f)?;
        if six == 0.0 {
            return Ok(0.0);
        }
        Ok(phase(i64::from(a.0 + b.0 + c.0 + d.0)) * six)
    }

    pub fn z_coeff(
        &self,
        l1: AngularMomentum,
        j1: AngularMomentum,
        l2: AngularMomentum,
        j2: AngularMomentum,
        s: AngularMomentum,
        big_l: AngularMomentum,
    ) -> Result<f64, AngmomError> {
        if !(l1.is_integer() && l2.is_integer() && big_l.is_integer()) {
            for a in [l1, j1, l2, j2, s, big_l] {
                a.checked()?;
            }
            return Ok(0.0);
        }
        let zero = Projection(0);
        let cg = self.clebsch_gordan(l1, zero, l2, zero, big_l, zero)?;
        if cg == 0.0 {
            return Ok(0.0);
        }
        let w = self.racah_w(l1, j1, l2, j2, s, big_l)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        let norm = f64::from(l1.multiplicity() * l2.multiplicity() * j1.multiplicity() * j2.multiplicity());
        Ok(norm.sqrt() * cg * w)
    }
}
