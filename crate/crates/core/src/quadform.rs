//! Imaginary quadratic orders through positive definite binary quadratic forms.
//!
//! A negative discriminant `D = f^2 d_K` indexes the order of conductor `f` in
//! `Q(sqrt(d_K))`; its Picard group is the group of proper equivalence classes
//! of primitive forms `(a, b, c)` with `b^2 - 4ac = D`, each class holding exactly
//! one reduced form.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::abelian::invariants_from_torsion_counts;
use crate::arith::{ext_gcd3, factorize};
use crate::dirichlet::kronecker;
use crate::error::{Error, Result};

/// Largest `|D|` that [`class_group`] enumerates unless told otherwise.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 100_000_000;

/// A negative discriminant together with its fundamental part and conductor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Discriminant {
    value: i64,
    fundamental_part: i64,
    conductor: u64,
}

impl Discriminant {
    pub fn new(value: i64) -> Result<Self> {
        if value >= 0 || !matches!(value.rem_euclid(4), 0 | 1) {
            return Err(Error::InvalidDiscriminant(value));
        }
        let n = value.unsigned_abs();
        // n = s^2 * m with m squarefree
        let mut square_root = 1u64;
        let mut squarefree = 1u64;
        for (p, e) in factorize(n) {
            square_root *= p.pow(e / 2);
            if e % 2 == 1 {
                squarefree *= p;
            }
        }
        let m = -(squarefree as i64);
        let (fundamental_part, conductor) = if m.rem_euclid(4) == 1 {
            (m, square_root)
        } else {
            // value is a discriminant, so 2 | square_root here
            (4 * m, square_root / 2)
        };
        Ok(Self {
            value,
            fundamental_part,
            conductor,
        })
    }

    /// The discriminant `f^2 d_K` of the order of conductor `f` in the field of
    /// fundamental discriminant `d_K`.
    pub fn from_parts(fundamental: i64, conductor: u64) -> Result<Self> {
        let d = Self::new(fundamental)?;
        if !d.is_fundamental() {
            return Err(Error::NotFundamental(fundamental));
        }
        if conductor == 0 {
            return Err(Error::OutOfRange("conductor must be positive".into()));
        }
        let value = (conductor as i64)
            .checked_mul(conductor as i64)
            .and_then(|f2| f2.checked_mul(fundamental))
            .ok_or(Error::Overflow("Discriminant::from_parts"))?;
        Self::new(value)
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn abs(&self) -> u64 {
        self.value.unsigned_abs()
    }

    pub fn fundamental_part(&self) -> i64 {
        self.fundamental_part
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_fundamental(&self) -> bool {
        self.conductor == 1
    }

    /// Number of roots of unity in the order.
    pub fn unit_count(&self) -> u64 {
        match self.value {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }

    /// All discriminants `-bound <= D <= -3`, ordered by `|D|`.
    pub fn up_to(bound: u64) -> impl Iterator<Item = Discriminant> {
        (3..=bound).filter_map(|n| Discriminant::new(-(n as i64)).ok())
    }

    /// Fundamental discriminants `-bound <= D <= -3`, ordered by `|D|`.
    pub fn fundamental_up_to(bound: u64) -> impl Iterator<Item = Discriminant> {
        Self::up_to(bound).filter(|d| d.is_fundamental())
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A primitive positive definite binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    /// Checked constructor: rejects indefinite and non-primitive forms.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = Self { a, b, c };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        let Self { a, b, c } = *self;
        let disc = (b as i128) * (b as i128) - 4 * (a as i128) * (c as i128);
        if a <= 0 || disc >= 0 {
            return Err(Error::NotPositiveDefinite { a, b, c });
        }
        if a.gcd(&b).gcd(&c) != 1 {
            return Err(Error::NotPrimitive { a, b, c });
        }
        Ok(())
    }

    /// The principal form `(1, b0, c0)` with `b0 = D mod 2`.
    pub fn principal(d: &Discriminant) -> Self {
        let b = d.value().rem_euclid(2);
        Self {
            a: 1,
            b,
            c: (b * b - d.value()) / 4,
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let Self { a, b, c } = *self;
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// Class of the opposite form, the inverse in the class group.
    pub fn inverse(&self) -> Self {
        reduce_unchecked(self.a as i128, -(self.b as i128), self.c as i128)
    }

    /// The point `(-b + sqrt(D)) / 2a` of the upper half plane attached to the form.
    pub fn tau(&self) -> (f64, f64) {
        let d = self.discriminant() as f64;
        (
            -(self.b as f64) / (2.0 * self.a as f64),
            (-d).sqrt() / (2.0 * self.a as f64),
        )
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let d = self.discriminant();
        let mut base = *self;
        let mut acc = QuadForm::principal(&Discriminant::new(d).expect("form discriminant"));
        while n > 0 {
            if n & 1 == 1 {
                acc = compose_unchecked(&acc, &base);
            }
            base = compose_unchecked(&base, &base);
            n >>= 1;
        }
        acc
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// The unique reduced form properly equivalent to `f`.
pub fn reduce_form(f: &QuadForm) -> Result<QuadForm> {
    f.validate()?;
    Ok(reduce_unchecked(f.a as i128, f.b as i128, f.c as i128))
}

fn reduce_unchecked(mut a: i128, mut b: i128, mut c: i128) -> QuadForm {
    loop {
        // bring b into (-a, a]
        if b <= -a || b > a {
            let k = Integer::div_floor(&(a - b), &(2 * a));
            let nb = b + 2 * a * k;
            c += k * (a * k + b);
            b = nb;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    QuadForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    }
}

/// Dirichlet composition: the reduced representative of the product class.
pub fn compose(f: &QuadForm, g: &QuadForm) -> Result<QuadForm> {
    f.validate()?;
    g.validate()?;
    let (d1, d2) = (f.discriminant(), g.discriminant());
    if d1 != d2 {
        return Err(Error::DiscriminantMismatch(d1, d2));
    }
    Ok(compose_unchecked(f, g))
}

/// Composition of two primitive forms of equal discriminant via united forms:
/// with `e = gcd(a1, a2, (b1 + b2)/2)` the composite is `(a1 a2 / e^2, B, C)`
/// where `B = b1 mod 2a1/e`, `B = b2 mod 2a2/e` and `B^2 = D mod 4 a1 a2 / e^2`.
fn compose_unchecked(f: &QuadForm, g: &QuadForm) -> QuadForm {
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2) = (g.a as i128, g.b as i128);
    let d = f.discriminant() as i128;
    let s = (b1 + b2) / 2;
    let (e, p, q, r) = ext_gcd3(a1, a2, s);
    let a3 = a1 / e * (a2 / e);
    let numer = p * a1 * b2 + q * a2 * b1 + r * ((b1 * b2 + d) / 2);
    debug_assert_eq!(numer % e, 0);
    let b3 = (numer / e).rem_euclid(2 * a3);
    let c3 = (b3 * b3 - d) / (4 * a3);
    debug_assert_eq!(b3 * b3 - 4 * a3 * c3, d);
    reduce_unchecked(a3, b3, c3)
}

/// All reduced primitive forms of discriminant `d`, sorted by `(a, b)`.
pub fn reduced_forms(d: &Discriminant) -> Vec<QuadForm> {
    let dv = d.value();
    let n = d.abs();
    let mut out = Vec::new();
    let mut a: i64 = 1;
    // a <= sqrt(|D|/3)
    while (3 * a * a) as u64 <= n {
        for b in -a + 1..=a {
            if (b - dv).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - dv;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push(QuadForm { a, b, c });
        }
        a += 1;
    }
    out
}

/// The class number `h(D)`, by counting reduced forms.
pub fn class_number(d: &Discriminant) -> u64 {
    reduced_forms(d).len() as u64
}

/// The Picard group of the order of discriminant `D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroupStructure {
    pub discriminant: Discriminant,
    pub reduced_forms: Vec<QuadForm>,
    pub order: u64,
    /// Invariant factors `d1 | d2 | ...`, all greater than one.
    pub elementary_divisors: Vec<u64>,
    pub two_torsion_size: u64,
}

impl ClassGroupStructure {
    pub fn identity(&self) -> QuadForm {
        QuadForm::principal(&self.discriminant)
    }

    pub fn exponent(&self) -> u64 {
        self.elementary_divisors.last().copied().unwrap_or(1)
    }

    pub fn is_cyclic(&self) -> bool {
        self.elementary_divisors.len() <= 1
    }

    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        self.reduced_forms.binary_search(f).ok()
    }

    /// The full composition table, `table[i][j] = index(forms[i] * forms[j])`.
    pub fn composition_table(&self) -> Vec<Vec<usize>> {
        let forms = &self.reduced_forms;
        forms
            .iter()
            .map(|f| {
                forms
                    .iter()
                    .map(|g| {
                        self.index_of(&compose_unchecked(f, g))
                            .expect("composition closes on reduced forms")
                    })
                    .collect()
            })
            .collect()
    }
}

/// Class group with the default enumeration limit.
pub fn class_group(d: &Discriminant) -> Result<ClassGroupStructure> {
    class_group_with_limit(d, DEFAULT_ENUMERATION_LIMIT)
}

pub fn class_group_with_limit(d: &Discriminant, limit: u64) -> Result<ClassGroupStructure> {
    if d.abs() > limit {
        return Err(Error::ResourceLimit(format!(
            "|D| = {} exceeds the class group enumeration limit {}",
            d.abs(),
            limit
        )));
    }
    let forms = reduced_forms(d);
    let order = forms.len() as u64;
    let identity = QuadForm::principal(d);
    let elementary_divisors = invariants_from_torsion_counts(order, |m| {
        forms.iter().filter(|f| f.pow(m) == identity).count() as u64
    });
    let two_torsion_size = 1u64 << elementary_divisors.iter().filter(|&&e| e % 2 == 0).count();
    Ok(ClassGroupStructure {
        discriminant: *d,
        reduced_forms: forms,
        order,
        elementary_divisors,
        two_torsion_size,
    })
}

/// Genus-theory count of `#Pic(O)[2]`, which equals the number of genera `2^(mu - 1)`.
pub fn two_torsion_size(d: &Discriminant) -> u64 {
    1u64 << (genus_characters(d) - 1)
}

/// The number `mu` of assigned characters of genus theory.
fn genus_characters(d: &Discriminant) -> u32 {
    let dv = d.value();
    let odd_primes = |n: u64| factorize(n).iter().filter(|&&(p, _)| p != 2).count() as u32;
    if dv.rem_euclid(4) == 1 {
        return odd_primes(d.abs());
    }
    // D = -4n
    let n = d.abs() / 4;
    let r = odd_primes(n);
    match (n % 4, n % 8) {
        (3, _) => r,
        (1, _) | (2, _) => r + 1,
        (_, 4) => r + 1,
        _ => r + 2,
    }
}

/// `h(f^2 d_K)` from `h(d_K)` by the order class number formula
/// `h(O) = h(d_K) f prod_{p | f} (1 - chi(p)/p) / [O_K^* : O^*]`.
pub fn order_class_number(d_k: &Discriminant, f: u64) -> Result<u64> {
    if !d_k.is_fundamental() {
        return Err(Error::NotFundamental(d_k.value()));
    }
    if f == 0 {
        return Err(Error::OutOfRange("conductor must be positive".into()));
    }
    let mut h = class_number(d_k) as u128;
    for (p, e) in factorize(f) {
        let chi = kronecker(d_k.value(), p as i64) as i128;
        h *= (p as u128).pow(e - 1) * ((p as i128 - chi) as u128);
    }
    let unit_index = match (d_k.value(), f > 1) {
        (-3, true) => 3,
        (-4, true) => 2,
        _ => 1,
    };
    debug_assert_eq!(h % unit_index, 0);
    u64::try_from(h / unit_index).map_err(|_| Error::Overflow("order_class_number"))
}

/// Lookup table from reduced forms to their index, for callers that compose a lot.
pub fn form_index(group: &ClassGroupStructure) -> HashMap<QuadForm, usize> {
    group
        .reduced_forms
        .iter()
        .enumerate()
        .map(|(i, f)| (*f, i))
        .collect()
}
