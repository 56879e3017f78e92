//! Real Dirichlet characters of imaginary quadratic fields, `L(1, chi)`, and the
//! explicit constants of the effective class number lower bound.

use std::f64::consts::{LN_2, PI};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::arith::{primes, primes_below};
use crate::error::{Error, Result};
use crate::quadform::{class_group, Discriminant};

/// Kronecker symbol `(d / n)` for arbitrary integers.
pub fn kronecker(d: i64, n: i64) -> i8 {
    let mut a = d as i128;
    let mut n = n as i128;
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut sign: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
        n >>= twos;
    }
    // Jacobi symbol (a / n), n odd positive
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// The quadratic character `n -> (D / n)` of a fundamental discriminant `D < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealCharacter {
    modulus: u64,
    discriminant: Discriminant,
}

impl RealCharacter {
    /// Rejects non-fundamental discriminants, whose characters are imprimitive.
    pub fn new(d: Discriminant) -> Result<Self> {
        if !d.is_fundamental() {
            return Err(Error::NotFundamental(d.value()));
        }
        Ok(Self {
            modulus: d.abs(),
            discriminant: d,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn discriminant(&self) -> Discriminant {
        self.discriminant
    }

    pub fn eval(&self, n: i64) -> i8 {
        kronecker(self.discriminant.value(), n)
    }
}

/// Relative rounding error of the closed form, evaluated in `f64`.
const CLOSED_FORM_REL_ERROR: f64 = 1e-13;

/// `L(1, chi)` from the finite sum `-(pi / q^(3/2)) * sum_{a<q} chi(a) a`,
/// valid for odd primitive real characters of conductor `q`.
pub fn l_one(chi: &RealCharacter, precision: f64) -> Result<f64> {
    let q = chi.modulus();
    let weighted: i128 = (1..q as i64).map(|a| chi.eval(a) as i128 * a as i128).sum();
    let value = -PI * weighted as f64 / (q as f64).powf(1.5);
    let error = CLOSED_FORM_REL_ERROR * value.abs().max(1.0);
    if !(precision > error) {
        return Err(Error::Precision(format!(
            "requested +/-{precision:e} but f64 evaluation guarantees only +/-{error:e}"
        )));
    }
    Ok(value)
}

/// Truncated Dirichlet series `sum_{n <= terms} chi(n)/n` with a rigorous bound
/// `q / (terms + 1)` on the tail (partial character sums are at most `q/2`).
pub fn l_one_series(chi: &RealCharacter, terms: u64) -> (f64, f64) {
    let sum: f64 = (1..=terms as i64)
        .map(|n| chi.eval(n) as f64 / n as f64)
        .sum();
    (sum, chi.modulus() as f64 / (terms as f64 + 1.0))
}

/// Checks `round(w sqrt|D| L(1, chi_D) / 2 pi) = h(D)` against the form count.
pub fn class_number_formula_check(d: &Discriminant) -> Result<bool> {
    let chi = RealCharacter::new(*d)?;
    let l = l_one(&chi, 1e-9)?;
    let w = d.unit_count() as f64;
    let h_formula = w * (d.abs() as f64).sqrt() * l / (2.0 * PI);
    let rounded = h_formula.round();
    if (h_formula - rounded).abs() > 0.25 {
        return Err(Error::Precision(format!(
            "class number formula value {h_formula} is not safely near an integer"
        )));
    }
    Ok(rounded as u64 == class_group(d)?.order)
}

/// Explicit Siegel-Tatuzawa data: `L(1, chi) > COEFFICIENT * eps * d^(-eps)` for all
/// fundamental `d >= max(e^(1/eps), e^LOG_FLOOR)` with at most one exception.
pub mod tatuzawa {
    pub const COEFFICIENT: f64 = 0.655;
    pub const LOG_FLOOR: f64 = 11.2;
    /// Bound on `[O_K^* : O^*]`.
    pub const MAX_UNIT_INDEX: f64 = 3.0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantName {
    C2,
    C3,
    C4,
    C8,
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstantName::C2 => "c2",
            ConstantName::C3 => "c3",
            ConstantName::C4 => "c4",
            ConstantName::C8 => "c8",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConstant {
    pub name: ConstantName,
    pub epsilon: f64,
    pub value: f64,
    /// Smallest `|D|` from which the underlying Tatuzawa estimate is used.
    pub validity_threshold: f64,
    /// Whether one exceptional field may violate the bound.
    pub exceptional_allowance: bool,
}

fn check_epsilon(eps: f64, upper: f64, inclusive: bool) -> Result<()> {
    let ok = eps > 0.0 && if inclusive { eps <= upper } else { eps < upper };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("epsilon = {eps} outside (0, {upper})")))
    }
}

fn tatuzawa_threshold(eps: f64) -> f64 {
    (1.0 / eps).max(tatuzawa::LOG_FLOOR).exp()
}

/// `c2(eps)` with `L(1, chi_d) > c2 d^(-eps)` for every imaginary quadratic field but one.
///
/// Above the threshold this is Tatuzawa's `0.655 eps`. Below it, `h >= 1` and
/// `w <= 6` give `L(1, chi) >= pi / (3 sqrt d) > (pi/3) T^(eps - 1/2) d^(-eps)`.
pub fn tatuzawa_c2(eps: f64) -> Result<EffectiveConstant> {
    check_epsilon(eps, 0.5, false)?;
    let threshold = tatuzawa_threshold(eps);
    let small_fields = PI / 3.0 * threshold.powf(eps - 0.5);
    Ok(EffectiveConstant {
        name: ConstantName::C2,
        epsilon: eps,
        value: (tatuzawa::COEFFICIENT * eps).min(small_fields),
        validity_threshold: threshold,
        exceptional_allowance: true,
    })
}

/// `c3(eps) = c2(eps) / pi`, so that `h(d_K) > c3 |d_K|^(1/2 - eps)` (using `w >= 2`).
pub fn class_number_c3(eps: f64) -> Result<EffectiveConstant> {
    let c2 = tatuzawa_c2(eps)?;
    Ok(EffectiveConstant {
        name: ConstantName::C3,
        value: c2.value / PI,
        ..c2
    })
}

/// `sup_f f^(1-eps) / phi(f)`, attained at the primorial of all primes `p` with
/// `p^(-eps) p/(p-1) > 1`.
pub fn phi_constant(eps: f64) -> f64 {
    let mut c = 1.0;
    for p in primes() {
        let p = p as f64;
        let factor = p.powf(-eps) * p / (p - 1.0);
        if factor <= 1.0 {
            break;
        }
        c *= factor;
    }
    c
}

/// `c4(eps)` with `#Pic(O) > c4 |disc O|^(1/2 - eps)` for every order not in the
/// exceptional field: `h(O) >= h(d_K) phi(f) / 3` and `phi(f) >= f^(1-eps) / c_phi`.
pub fn tatuzawa_c4(eps: f64) -> Result<EffectiveConstant> {
    let c3 = class_number_c3(eps)?;
    Ok(EffectiveConstant {
        name: ConstantName::C4,
        value: c3.value / (tatuzawa::MAX_UNIT_INDEX * phi_constant(eps)),
        ..c3
    })
}

/// Primes below this bound are summed exactly when evaluating `ln c8`.
pub const C8_PRIME_LIMIT: u64 = 40_000_000;

fn c8_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_below(C8_PRIME_LIMIT))
}

/// Sum of `ln 2 - eps ln p` over primes `p < limit` with `p^eps < 2`, plus `ln 2`.
fn c8_log_partial(eps: f64, limit: u64) -> f64 {
    static MEMO: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    let key = (eps.to_bits(), limit);
    if let Some(&v) = memo.lock().expect("c8 memo poisoned").get(&key) {
        return v;
    }
    let primes: &[u64] = if limit <= 1 << 16 {
        &primes_below(limit)
    } else {
        c8_primes()
    };
    let mut acc = LN_2;
    for &p in primes.iter().take_while(|&&p| p < limit) {
        let pe = (p as f64).powf(eps);
        if pe >= 2.0 {
            break;
        }
        acc += LN_2 - pe.ln();
    }
    memo.lock().expect("c8 memo poisoned").insert(key, acc);
    acc
}

/// Prime bound `2^(1/eps)` above which no factor of `c8(eps)` exceeds 1.
fn c8_prime_bound(eps: f64) -> f64 {
    (LN_2 / eps).exp()
}

/// `ln c8(eps)`; a resource error when the primes involved exceed [`C8_PRIME_LIMIT`].
pub fn genus_c8_ln(eps: f64) -> Result<f64> {
    check_epsilon(eps, 1.0, true)?;
    let bound = c8_prime_bound(eps);
    if bound > C8_PRIME_LIMIT as f64 {
        return Err(Error::ResourceLimit(format!(
            "c8({eps}) needs primes up to 2^(1/eps) = {bound:.3e}, above {C8_PRIME_LIMIT}"
        )));
    }
    Ok(c8_log_partial(eps, bound.ceil() as u64 + 1))
}

/// A lower bound for `ln c8(eps)` that is exact whenever [`genus_c8_ln`] succeeds.
/// Every omitted factor exceeds 1, so partial products bound `c8` from below.
pub fn genus_c8_ln_lower_bound(eps: f64) -> Result<f64> {
    check_epsilon(eps, 1.0, true)?;
    let bound = c8_prime_bound(eps).min(C8_PRIME_LIMIT as f64);
    Ok(c8_log_partial(eps, bound.ceil() as u64 + 1))
}

/// `c8(eps) = sup_m 2^(omega(m)+1) / m^eps`, so `#Pic(O)[2] <= c8 |disc O|^eps`.
/// The value is infinite when `c8` exceeds the `f64` range; use [`genus_c8_ln`] then.
pub fn genus_c8(eps: f64) -> Result<EffectiveConstant> {
    Ok(EffectiveConstant {
        name: ConstantName::C8,
        epsilon: eps,
        value: genus_c8_ln(eps)?.exp(),
        validity_threshold: 3.0,
        exceptional_allowance: false,
    })
}
