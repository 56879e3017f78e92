//! Effective discriminant thresholds from the class number chain
//!
//! `c4(eps2) |D|^(1/2 - eps2) < #Pic <= odd_cap * c8(eps1)^e * |D|^(eps1 e)`,
//!
//! where `e` bounds the exponent of the 2-part. Past the crossing point of the
//! two monomials the chain is contradictory, so every order satisfying it has
//! `|D|` below the threshold (outside the one possible exceptional field).

use std::f64::consts::LN_2;

use num_bigint::BigUint;
use serde::Serialize;

use crate::dirichlet::{genus_c8_ln, genus_c8_ln_lower_bound, tatuzawa_c4};
use crate::error::{Error, Result};

/// Default values tried for both `eps1` and `eps2`.
pub const DEFAULT_EPSILONS: [f64; 6] = [0.30, 0.20, 0.12, 0.07, 0.04, 0.02];

/// Thresholds with more bits than this are refused.
pub const MAX_THRESHOLD_BITS: f64 = (1u64 << 24) as f64;

/// The joint grid `DEFAULT_EPSILONS x DEFAULT_EPSILONS`.
pub fn default_eps_grid() -> Vec<(f64, f64)> {
    DEFAULT_EPSILONS
        .iter()
        .flat_map(|&e1| DEFAULT_EPSILONS.iter().map(move |&e2| (e1, e2)))
        .collect()
}

/// `floor(log2 x)` for `x >= 1`, read off the binary exponent.
fn floor_log2(x: f64) -> u32 {
    debug_assert!(x >= 1.0 && x.is_finite());
    ((x.to_bits() >> 52) & 0x7ff) as u32 - 1023
}

fn check_at_least_one(name: &str, x: f64) -> Result<()> {
    if x >= 1.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{name} = {x} must be a finite real >= 1")))
    }
}

/// `c7 = (r + 1) + floor(log2(c5 c6))`, the exponent bound for the 2-part in the Heegner chain.
pub fn c7(r: u32, c5c6: f64) -> Result<u32> {
    if r < 1 {
        return Err(Error::OutOfRange("r must be at least 1".into()));
    }
    check_at_least_one("c5*c6", c5c6)?;
    Ok(r + 1 + floor_log2(c5c6))
}

/// `c10 = n + 1 + floor(log2 c9)`, the same exponent bound for a subvariety of `Y(1)^n`.
pub fn c10(n: u32, c9: f64) -> Result<u32> {
    if n < 2 {
        return Err(Error::OutOfRange("n must be at least 2".into()));
    }
    check_at_least_one("c9", c9)?;
    Ok(n + 1 + floor_log2(c9))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub name: String,
    pub value: String,
    pub formula: String,
}

impl AuditEntry {
    fn new(name: &str, value: impl ToString, formula: &str) -> Self {
        Self {
            name: name.into(),
            value: value.to_string(),
            formula: formula.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `ceil(exp(log_threshold))`.
    pub threshold: BigUint,
    pub log_threshold: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub odd_cap: f64,
    pub even_exponent: u32,
    /// Natural log of the monomial crossing at the chosen grid point.
    pub log_crossing: f64,
    /// Natural log of the Tatuzawa validity threshold at `epsilon2`.
    pub log_validity_floor: f64,
    pub audit: Vec<AuditEntry>,
    /// Always true: one exceptional imaginary quadratic field may escape `c4`.
    pub exceptional_field_caveat: bool,
}

impl BoundReport {
    pub fn audit_value(&self, name: &str) -> Option<&str> {
        self.audit
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.value.as_str())
    }

    /// Recompute the report from the inputs recorded in its audit trail.
    pub fn reproduce(&self) -> Result<BoundReport> {
        let read = |name: &str| -> Result<f64> {
            self.audit_value(name)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Precondition(format!("audit entry {name} missing or unreadable")))
        };
        let even_exponent = read("even_exponent")? as u32;
        solve_disc_threshold(
            read("odd_cap")?,
            even_exponent,
            &[(read("epsilon1")?, read("epsilon2")?)],
        )
    }
}

/// The constants entering one grid point, in log form.
struct GridPoint {
    eps1: f64,
    eps2: f64,
    ln_c8: f64,
    ln_c4: f64,
    gap: f64,
    log_floor: f64,
}

fn exponent_gap(even_exponent: u32, eps1: f64, eps2: f64) -> f64 {
    0.5 - eps2 - eps1 * even_exponent as f64
}

/// Root of `gap * L = k` found by bisection on `L`, without dividing by `gap`.
fn bisect_linear(gap: f64, k: f64) -> f64 {
    let g = |l: f64| gap * l - k;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while g(lo) > 0.0 {
        lo *= 2.0;
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn log_rhs_constant(odd_cap: f64, even_exponent: u32, ln_c8: f64, ln_c4: f64) -> f64 {
    odd_cap.ln() + even_exponent as f64 * ln_c8 - ln_c4
}

/// `ln B` where `c4 B^(1/2 - eps2) = odd_cap c8^e B^(eps1 e)`, by bisection on `ln B`.
pub fn crossing_log(odd_cap: f64, even_exponent: u32, eps1: f64, eps2: f64) -> Result<f64> {
    let p = grid_point(even_exponent, eps1, eps2, genus_c8_ln(eps1)?)?;
    Ok(bisect_linear(p.gap, log_rhs_constant(odd_cap, even_exponent, p.ln_c8, p.ln_c4)))
}

/// The same crossing from the closed form `ln B = ln(odd_cap c8^e / c4) / (1/2 - eps2 - eps1 e)`.
pub fn crossing_log_closed_form(odd_cap: f64, even_exponent: u32, eps1: f64, eps2: f64) -> Result<f64> {
    let p = grid_point(even_exponent, eps1, eps2, genus_c8_ln(eps1)?)?;
    Ok(log_rhs_constant(odd_cap, even_exponent, p.ln_c8, p.ln_c4) / p.gap)
}

fn grid_point(even_exponent: u32, eps1: f64, eps2: f64, ln_c8: f64) -> Result<GridPoint> {
    let c4 = tatuzawa_c4(eps2)?;
    let gap = exponent_gap(even_exponent, eps1, eps2);
    if gap <= 0.0 {
        return Err(Error::Infeasible(format!(
            "1/2 - {eps2} - {eps1}*{even_exponent} <= 0"
        )));
    }
    Ok(GridPoint {
        eps1,
        eps2,
        ln_c8,
        ln_c4: c4.value.ln(),
        gap,
        log_floor: c4.validity_threshold.ln(),
    })
}

/// `ceil(e^l)` as an exact integer (the `f64` value of `e^l` rounded up in its last place).
fn ceil_exp(l: f64) -> Result<BigUint> {
    let bits = l / LN_2;
    if bits > MAX_THRESHOLD_BITS {
        return Err(Error::ResourceLimit(format!(
            "threshold has about {bits:.3e} bits, above {MAX_THRESHOLD_BITS:.3e}"
        )));
    }
    if bits < 52.0 {
        return Ok(BigUint::from(l.exp().ceil().max(1.0) as u64));
    }
    let n = bits.floor();
    let mantissa = ((bits - n).exp2() * 2f64.powi(52)).ceil() as u64;
    Ok(BigUint::from(mantissa) << (n as u64 - 52))
}

/// Smallest threshold over the admissible grid points, each raised to its Tatuzawa validity floor.
pub fn solve_disc_threshold(odd_cap: f64, even_exponent: u32, eps_grid: &[(f64, f64)]) -> Result<BoundReport> {
    check_at_least_one("odd_cap", odd_cap)?;
    let admissible: Vec<(f64, f64)> = eps_grid
        .iter()
        .copied()
        .filter(|&(e1, e2)| e1 > 0.0 && e2 > 0.0 && e2 < 0.5 && exponent_gap(even_exponent, e1, e2) > 0.0)
        .collect();
    if admissible.is_empty() {
        return Err(Error::Infeasible(format!(
            "every grid point has 1/2 - eps2 - eps1*{even_exponent} <= 0"
        )));
    }

    // (log threshold, log crossing, point)
    let mut best: Option<(f64, f64, GridPoint)> = None;
    let mut deferred = Vec::new();
    for &(e1, e2) in &admissible {
        let Ok(ln_c8) = genus_c8_ln(e1) else {
            deferred.push((e1, e2));
            continue;
        };
        let p = grid_point(even_exponent, e1, e2, ln_c8)?;
        let crossing = bisect_linear(p.gap, log_rhs_constant(odd_cap, even_exponent, p.ln_c8, p.ln_c4));
        let log_t = crossing.max(p.log_floor);
        if best.as_ref().is_none_or(|b| log_t < b.0) {
            best = Some((log_t, crossing, p));
        }
    }
    // c8 out of reach: a lower bound for c8 still bounds the crossing from below
    for (e1, e2) in deferred {
        let p = grid_point(even_exponent, e1, e2, genus_c8_ln_lower_bound(e1)?)?;
        let crossing_lb = log_rhs_constant(odd_cap, even_exponent, p.ln_c8, p.ln_c4) / p.gap;
        let beaten = best.as_ref().is_some_and(|b| crossing_lb.max(p.log_floor) >= b.0);
        if !beaten {
            return Err(Error::ResourceLimit(format!(
                "c8({e1}) is needed at grid point ({e1}, {e2}) but is too expensive to evaluate"
            )));
        }
    }

    let (log_threshold, log_crossing, p) = best.expect("some admissible grid point was evaluated");
    let threshold = ceil_exp(log_threshold)?;
    let audit = vec![
        AuditEntry::new("odd_cap", odd_cap, "bound on the odd part of #Pic (input)"),
        AuditEntry::new("even_exponent", even_exponent, "each cyclic 2-factor has order <= 2^even_exponent (input)"),
        AuditEntry::new("epsilon1", p.eps1, "grid minimizer"),
        AuditEntry::new("epsilon2", p.eps2, "grid minimizer"),
        AuditEntry::new("ln_c8", p.ln_c8, "ln 2 + sum_{p^epsilon1 < 2} (ln 2 - epsilon1 ln p)"),
        AuditEntry::new(
            "ln_c4",
            p.ln_c4,
            "ln(c2 / (3 pi c_phi)), c2 = min(0.655 epsilon2, (pi/3) T^(epsilon2 - 1/2)), c_phi = sup f^(1-epsilon2)/phi(f)",
        ),
        AuditEntry::new("exponent_gap", p.gap, "1/2 - epsilon2 - epsilon1 * even_exponent"),
        AuditEntry::new(
            "log_crossing",
            log_crossing,
            "root of exponent_gap * L = ln odd_cap + even_exponent * ln_c8 - ln_c4 (bisection)",
        ),
        AuditEntry::new("log_validity_floor", p.log_floor, "ln T = max(1/epsilon2, 11.2)"),
        AuditEntry::new("threshold", &threshold, "ceil(exp(max(log_crossing, log_validity_floor)))"),
    ];
    Ok(BoundReport {
        threshold,
        log_threshold,
        epsilon1: p.eps1,
        epsilon2: p.eps2,
        odd_cap,
        even_exponent,
        log_crossing,
        log_validity_floor: p.log_floor,
        audit,
        exceptional_field_caveat: true,
    })
}

/// Inputs of the Heegner point bound: `r` CM points, Serre constant `c5`, `c6 = deg pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeegnerParams {
    r: u32,
    c5: f64,
    c6: u64,
}

impl HeegnerParams {
    pub fn new(r: u32, c5: f64, c6: u64) -> Result<Self> {
        if r < 2 {
            return Err(Error::OutOfRange(format!("r = {r} must be at least 2")));
        }
        check_at_least_one("c5", c5)?;
        if c6 < 1 {
            return Err(Error::OutOfRange("c6 = deg pi must be positive".into()));
        }
        Ok(Self { r, c5, c6 })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn c5(&self) -> f64 {
        self.c5
    }

    pub fn c6(&self) -> u64 {
        self.c6
    }
}

/// Inputs of the special point bound on a subvariety of `Y(1)^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndreOortParams {
    n: u32,
    c9: f64,
}

impl AndreOortParams {
    pub fn new(n: u32, c9: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange(format!("n = {n} must be at least 2")));
        }
        check_at_least_one("c9", c9)?;
        Ok(Self { n, c9 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c9(&self) -> f64 {
        self.c9
    }
}

pub fn heegner_c1_with_grid(p: &HeegnerParams, eps_grid: &[(f64, f64)]) -> Result<BoundReport> {
    let odd_cap = p.c5 * p.c6 as f64;
    let e = c7(p.r, odd_cap)?;
    let mut report = solve_disc_threshold(odd_cap, e, eps_grid)?;
    let annihilator_exponent = p.r + 1;
    let mut audit = vec![
        AuditEntry::new("c5", p.c5, "effective Serre constant (input)"),
        AuditEntry::new("c6", p.c6, "deg pi (input)"),
        AuditEntry::new("annihilator", format!("2^{annihilator_exponent}"), "exponent 2^(r+1) annihilating the compositum Galois group (upstream)"),
        AuditEntry::new("c7", e, "(r+1) + floor(log2(c5*c6))"),
    ];
    audit.append(&mut report.audit);
    report.audit = audit;
    Ok(report)
}

/// Threshold `c1` on `|disc O_r|` for the Heegner point chain.
pub fn heegner_c1(p: &HeegnerParams) -> Result<BoundReport> {
    heegner_c1_with_grid(p, &default_eps_grid())
}

pub fn andre_oort_c11_with_grid(p: &AndreOortParams, eps_grid: &[(f64, f64)]) -> Result<BoundReport> {
    let e = c10(p.n, p.c9)?;
    let mut report = solve_disc_threshold(p.c9, e, eps_grid)?;
    let mut audit = vec![
        AuditEntry::new("n", p.n, "ambient dimension of Y(1)^n (input)"),
        AuditEntry::new("c9", p.c9, "composite-degree bound (input)"),
        AuditEntry::new("c10", e, "n + 1 + floor(log2 c9)"),
    ];
    audit.append(&mut report.audit);
    report.audit = audit;
    Ok(report)
}

/// Threshold `c11` on the discriminants of special points off the exceptional locus.
pub fn andre_oort_c11(p: &AndreOortParams) -> Result<BoundReport> {
    andre_oort_c11_with_grid(p, &default_eps_grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::genus_c8;

    #[test]
    fn exponent_formulas() {
        assert_eq!(c7(2, 10.0).unwrap(), 6);
        assert_eq!(c7(1, 1.0).unwrap(), 2);
        assert_eq!(c7(3, 8.0).unwrap(), 7);
        assert_eq!(c7(3, 7.999_999).unwrap(), 6);
        assert_eq!(c10(2, 1.0).unwrap(), 3);
        assert_eq!(c10(2, 16.0).unwrap(), 7);
        assert_eq!(c10(4, 5.0).unwrap(), 7);
        assert!(c7(0, 2.0).is_err());
        assert!(c10(2, 0.5).is_err());
    }

    #[test]
    fn pure_c4_crossing() {
        // odd_cap = 1, e = 0: B = c4^(-1/(1/2 - eps2))
        let c4 = tatuzawa_c4(0.1).unwrap().value;
        let expected = -2.5 * c4.ln();
        let bisected = crossing_log(1.0, 0, 0.1, 0.1).unwrap();
        assert!(((bisected - expected) / expected).abs() < 1e-12);
        let report = solve_disc_threshold(1.0, 0, &[(0.1, 0.1)]).unwrap();
        assert_eq!(report.log_crossing, bisected);
        // 1/eps = 10 is below 11.2, so the floor is e^11.2
        assert_eq!(report.log_validity_floor, 11.2);
        assert_eq!(report.log_threshold, bisected.max(11.2));
    }

    #[test]
    fn monotone_in_odd_cap() {
        let grid = default_eps_grid();
        let mut last = 0.0;
        for cap in [1.0, 2.0, 4.0, 100.0, 1e6] {
            let t = solve_disc_threshold(cap, 2, &grid).unwrap().log_threshold;
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn smaller_eps1_lowers_the_exponent_but_raises_c8() {
        // with eps2 fixed, shrinking eps1 always grows c8; the crossing moves either way
        let e = 3;
        let mut prev_ln_c8 = 0.0;
        for eps1 in [0.12, 0.07, 0.04] {
            let ln_c8 = genus_c8_ln(eps1).unwrap();
            assert!(ln_c8 > prev_ln_c8);
            prev_ln_c8 = ln_c8;
            let gap = exponent_gap(e, eps1, 0.04);
            assert!(gap > exponent_gap(e, eps1 * 2.0, 0.04));
        }
        let by_eps1: Vec<f64> = [0.12, 0.07, 0.04]
            .iter()
            .map(|&e1| crossing_log(1.0, e, e1, 0.04).unwrap())
            .collect();
        assert!(by_eps1[0] < by_eps1[1] && by_eps1[1] < by_eps1[2]);
    }

    #[test]
    fn infeasible_grid() {
        assert!(matches!(
            solve_disc_threshold(1.0, 30, &[(0.3, 0.3)]),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(solve_disc_threshold(1.0, 0, &[]), Err(Error::Infeasible(_))));
    }

    #[test]
    fn heegner_regression() {
        let report = heegner_c1(&HeegnerParams::new(2, 1.0, 1).unwrap()).unwrap();
        assert!(report.log_threshold >= 11.2);
        assert!(report.exceptional_field_caveat);
        assert_eq!(report.audit_value("c7"), Some("3"));
        assert_eq!((report.epsilon1, report.epsilon2), (0.12, 0.04));
        assert!((report.log_threshold - 462.829_973_166).abs() < 1e-6);
        assert_eq!(report.threshold.bits(), 668);
    }

    #[test]
    fn heegner_audit_and_monotonicity() {
        let report = heegner_c1(&HeegnerParams::new(3, 10.0, 2).unwrap()).unwrap();
        assert_eq!(report.audit_value("c7"), Some("8"));
        assert_eq!(report.audit_value("annihilator"), Some("2^4"));
        for name in ["c5", "c6", "c7", "ln_c8", "ln_c4"] {
            assert!(report.audit_value(name).is_some(), "{name}");
        }
        let mut last = 0.0;
        for c6 in 1..=6 {
            let t = heegner_c1(&HeegnerParams::new(2, 1.0, c6).unwrap()).unwrap().log_threshold;
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn andre_oort_matches_heegner_shape() {
        let ao = andre_oort_c11(&AndreOortParams::new(2, 1.0).unwrap()).unwrap();
        let direct = solve_disc_threshold(1.0, 3, &default_eps_grid()).unwrap();
        assert_eq!(ao.threshold, direct.threshold);
        let he = heegner_c1(&HeegnerParams::new(2, 1.0, 1).unwrap()).unwrap();
        assert_eq!(ao.threshold, he.threshold);
        let r4 = andre_oort_c11(&AndreOortParams::new(2, 4.0).unwrap()).unwrap();
        assert_eq!(r4.audit_value("c10"), Some("5"));
        let mut last = 0.0;
        for c9 in [1.0, 2.0, 3.0, 4.0, 8.0] {
            let t = andre_oort_c11(&AndreOortParams::new(2, c9).unwrap()).unwrap().log_threshold;
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn audit_reproduces_threshold() {
        for (cap, e) in [(1.0, 3), (20.0, 5), (3.5, 0), (7.0, 1)] {
            let report = solve_disc_threshold(cap, e, &default_eps_grid()).unwrap();
            let again = report.reproduce().unwrap();
            assert_eq!(again.threshold, report.threshold);
            assert_eq!(again.log_threshold.to_bits(), report.log_threshold.to_bits());
        }
    }

    #[test]
    fn chain_violated_past_threshold() {
        let report = solve_disc_threshold(2.0, 1, &default_eps_grid()).unwrap();
        let c4 = tatuzawa_c4(report.epsilon2).unwrap().value;
        let c8 = genus_c8(report.epsilon1).unwrap().value;
        // log(lhs / rhs) at |D| = exp(l)
        let margin = |l: f64| c4.ln() + (0.5 - report.epsilon2) * l - (2.0 * c8).ln() - report.epsilon1 * l;
        let t = report.log_threshold;
        // at the crossing itself the two sides agree to rounding
        assert!(margin(t) > -1e-12 * t);
        for rel in [1e-9, 1e-6, 1e-3, 1.0] {
            assert!(margin(t + rel) > 0.0, "log|D| = {}", t + rel);
        }
    }

    #[test]
    fn ceil_exp_bounds() {
        assert_eq!(ceil_exp(0.0).unwrap(), BigUint::from(1u32));
        let t = ceil_exp(LN_2 * 10.0).unwrap();
        assert!(t >= BigUint::from(1024u32) && t <= BigUint::from(1025u32));
        let big = ceil_exp(100.0).unwrap();
        assert_eq!(big.bits(), (100.0 / LN_2).ceil() as u64);
        assert!(matches!(ceil_exp(1e8), Err(Error::ResourceLimit(_))));
    }
}
