//! Direct term-by-term evaluation of σ(θ) with exact coefficients, and a
//! quadrature projection onto Legendre polynomials. Shares no code with the
//! library's enumerator.

use std::sync::OnceLock;

use super::oracle;

struct DirectTerm {
    big: (i64, i64),
    proton: (i64, i64),
    order: u32,
    quarter_turns: i64,
    real: f64,
}

fn direct_terms() -> &'static [DirectTerm] {
    static TERMS: OnceLock<Vec<DirectTerm>> = OnceLock::new();
    TERMS.get_or_init(|| {
        let mut out = Vec::new();
        for big1 in 1..=2i64 {
            for big2 in 1..=2i64 {
                for l1 in [big1 - 1, big1 + 1] {
                    for l2 in [big2 - 1, big2 + 1] {
                        let cg1 = oracle::cg(2 * big1, -2, 2, 2, 2 * l1, 0).to_f64();
                        let cg2 = oracle::cg(2 * big2, -2, 2, 2, 2 * l2, 0).to_f64();
                        for p1 in 0..=2i64 {
                            for p2 in 0..=2i64 {
                                for spin in 0..=6i64 {
                                    for order in 0..=6i64 {
                                        let z_in = oracle::z_coeff(2 * l1, 2 * big1, 2 * l2, 2 * big2, 2, 2 * order);
                                        let z_out =
                                            oracle::z_coeff(2 * p1, 2 * big1, 2 * p2, 2 * big2, 2 * spin, 2 * order);
                                        if z_in.is_zero() || z_out.is_zero() {
                                            continue;
                                        }
                                        let sign = if (spin + 1) % 2 == 0 { 1.0 } else { -1.0 };
                                        out.push(DirectTerm {
                                            big: (big1, big2),
                                            proton: (p1, p2),
                                            order: order as u32,
                                            quarter_turns: (big2 - big1 + l1 - l2).rem_euclid(4),
                                            real: cg1 * cg2 * z_in.mul(&z_out).to_f64() * sign,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    })
}

/// Raw (unnormalized) σ at `x = cos θ` for the default channel set with unit
/// residual-spin weights.
pub fn sigma_direct(a: f64, b: f64, c: f64, r: f64, x: f64) -> f64 {
    let t_multipole = |l: i64| if l == 1 { 1.0 } else { a };
    let t_proton = |l: i64| [1.0, b, c][l as usize];
    let (mut re, mut im) = (0.0, 0.0);
    for t in direct_terms() {
        let mag = (t_multipole(t.big.0) * t_multipole(t.big.1) * t_proton(t.proton.0) * t_proton(t.proton.1)).sqrt();
        let corr = if t.big.0 == t.big.1 { 1.0 } else { 1.0 / (1.0 + r) };
        let v = t.real * mag * corr * oracle::legendre_closed(t.order, x);
        match t.quarter_turns {
            0 => re += v,
            1 => im += v,
            2 => re -= v,
            _ => im -= v,
        }
    }
    assert!(im.abs() < 1e-12 * re.abs().max(1.0), "imaginary residue {im}");
    re
}

/// Largest Legendre order with a nonzero direct term.
pub fn max_direct_order() -> u32 {
    direct_terms().iter().map(|t| t.order).max().unwrap_or(0)
}

/// Legendre coefficients `c_0..c_6` (normalized to `c_0 = 1`) from 19-point
/// Gauss–Legendre projection of [`sigma_direct`].
pub fn projected_coefficients(a: f64, b: f64, c: f64, r: f64) -> [f64; 7] {
    let nodes = oracle::gauss_legendre(19);
    let samples: Vec<(f64, f64, f64)> = nodes.iter().map(|&(x, w)| (x, w, sigma_direct(a, b, c, r, x))).collect();
    let mut out = [0.0; 7];
    for (l, slot) in out.iter_mut().enumerate() {
        let s: f64 = samples
            .iter()
            .map(|&(x, w, sig)| w * sig * oracle::legendre_closed(l as u32, x))
            .sum();
        *slot = (2.0 * l as f64 + 1.0) / 2.0 * s;
    }
    let c0 = out[0];
    out.map(|v| v / c0)
}

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        tol: f64,
        whole: f64,
        m: f64,
        fm: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, tol / 2.0, left, lm, flm, depth - 1)
            + recurse(f, m, fm, b, fb, tol / 2.0, right, rm, frm, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, tol, whole, m, fm, 40)
}
