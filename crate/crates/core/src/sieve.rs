//! Special points on plane curves `F(x, y) = 0` in `Y(1)^2`.
//!
//! A special point is a pair of singular moduli `(j1, j2)` on the curve. For
//! discriminants `D1, D2` such a point exists exactly when `H_D1(x)` and
//! `Res_y(H_D2(y), F(x, y))` share a root, which is decided with exact integer
//! arithmetic after a modular prefilter.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::bound_pipeline::{andre_oort_c11, AndreOortParams, BoundReport};
use crate::error::{Error, Result};
use crate::hilbert::{singular_moduli_up_to, HilbertPoly};
use crate::poly::{modp, resultant_monic_y, resultant_monic_y_mod, BiPoly, Poly};
use crate::quadform::Discriminant;

/// Enumeration cap used when the caller gives none.
pub const DEFAULT_SIEVE_CAP: u64 = 200;

/// Largest enumeration cap accepted by the scan.
pub const SIEVE_CAP_LIMIT: u64 = 2000;

/// Largest total degree a power in the curve grammar may produce.
pub const MAX_DEGREE: usize = 256;

/// Primes for the modular prefilter; a trivial gcd modulo any one of them is conclusive.
const FILTER_PRIMES: [u64; 2] = [(1 << 61) - 1, 1_000_000_007];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    poly: BiPoly,
    defining_field_degree: u32,
    /// Integer content divided out while normalizing, when it exceeded 1.
    removed_content: Option<BigInt>,
}

impl CurveSpec {
    /// Normalize `poly` to content 1. Rejects the zero polynomial.
    pub fn new(poly: BiPoly, defining_field_degree: u32) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::Parse {
                pos: 0,
                msg: "the polynomial is identically zero".into(),
            });
        }
        if defining_field_degree == 0 {
            return Err(Error::OutOfRange("field degree must be positive".into()));
        }
        let content = poly.content();
        let (poly, removed_content) = if content.is_one() {
            (poly, None)
        } else {
            (poly.div_scalar(&content), Some(content))
        };
        Ok(Self {
            poly,
            defining_field_degree,
            removed_content,
        })
    }

    pub fn with_field_degree(mut self, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::OutOfRange("field degree must be positive".into()));
        }
        self.defining_field_degree = d;
        Ok(self)
    }

    pub fn poly(&self) -> &BiPoly {
        &self.poly
    }

    pub fn deg_x(&self) -> usize {
        self.poly.deg_x()
    }

    pub fn deg_y(&self) -> usize {
        self.poly.deg_y()
    }

    pub fn defining_field_degree(&self) -> u32 {
        self.defining_field_degree
    }

    pub fn removed_content(&self) -> Option<&BigInt> {
        self.removed_content.as_ref()
    }

    /// The curve `F(y, x) = 0`.
    pub fn swapped(&self) -> CurveSpec {
        CurveSpec {
            poly: self.poly.swap(),
            ..self.clone()
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    text: &'a str,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.chars.get(self.at).map_or(self.text.chars().count(), |c| c.0)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|c| c.1)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<BiPoly> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.at += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.at += 1;
                    acc = acc.mul(&self.unary()?);
                }
                // juxtaposition such as 3x or x(y + 1)
                Some(c) if c.is_ascii_digit() || matches!(c, 'x' | 'y' | '(') => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BiPoly> {
        match self.peek() {
            Some('-') => {
                self.at += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.at += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.at += 1;
        let start = self.pos();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {}
            _ => return self.error("expected a nonnegative integer exponent after '^'"),
        }
        let digits = self.digits();
        let within = |e: u32| (e as usize).saturating_mul(base.total_degree()) <= MAX_DEGREE;
        match digits.parse::<u32>() {
            Ok(e) if e as usize <= MAX_DEGREE && within(e) => Ok(base.pow(e)),
            _ => Err(Error::Parse {
                pos: start,
                msg: format!("power ^{digits} would exceed total degree {MAX_DEGREE}"),
            }),
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.at += 1;
        }
        s
    }

    fn atom(&mut self) -> Result<BiPoly> {
        match self.peek() {
            Some('x') => {
                self.at += 1;
                Ok(BiPoly::x())
            }
            Some('y') => {
                self.at += 1;
                Ok(BiPoly::y())
            }
            Some('(') => {
                self.at += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return self.error("expected ')'");
                }
                self.at += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n: BigInt = self.digits().parse().expect("digit string parses");
                Ok(BiPoly::constant(n))
            }
            Some(c) => self.error(format!("unexpected character '{c}'")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parse a polynomial in `x` and `y` with integer coefficients.
///
/// Grammar: integer literals, `x`, `y`, `+ - * ^` and parentheses; whitespace is
/// ignored and juxtaposition multiplies. Positions in errors count characters of
/// the original text from 0.
pub fn parse_curve(text: &str) -> Result<CurveSpec> {
    let mut p = Parser {
        chars: text.chars().enumerate().filter(|(_, c)| !c.is_whitespace()).collect(),
        at: 0,
        text,
    };
    if p.chars.is_empty() {
        return p.error("empty polynomial");
    }
    let poly = p.expr()?;
    if p.at < p.chars.len() {
        return p.error(format!("unexpected character '{}'", p.peek().unwrap_or(' ')));
    }
    CurveSpec::new(poly, 1)
}

/// Read a curve given either as a file path or as an inline expression.
pub fn load_curve(arg: &str) -> Result<CurveSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { pos: 0, msg: format!("cannot read {arg}: {e}") })?;
        parse_curve(text.trim())
    } else {
        parse_curve(arg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// A vertical fibre `g(x) = 0`.
    X,
    /// A horizontal fibre `g(y) = 0`.
    Y,
}

/// A union of coordinate fibres contained in the curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibreComponent {
    pub axis: Axis,
    /// Squarefree and primitive, in the variable named by `axis`.
    pub poly: Poly,
}

impl FibreComponent {
    fn var(&self) -> &'static str {
        match self.axis {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

impl fmt::Display for FibreComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.var();
        if self.poly.degree() == Some(1) {
            let (c0, c1) = (self.poly.coeff(0), self.poly.coeff(1));
            if (&c0 % &c1).is_zero() {
                return write!(f, "{v} = {}", -(c0 / c1));
            }
        }
        write!(f, "{} = 0", self.poly.display_in(v))
    }
}

/// Split off the factor of `rows` that depends on the coefficient variable alone.
fn common_factor(rows: &[Poly]) -> Poly {
    rows.iter()
        .filter(|r| !r.is_zero())
        .fold(Poly::zero(), |g, r| g.gcd(r))
}

fn strip_axis(poly: &BiPoly, axis: Axis) -> (BiPoly, Option<FibreComponent>) {
    let rows = poly.coeffs_in_y();
    let g = common_factor(&rows);
    if g.degree().unwrap_or(0) == 0 {
        return (poly.clone(), None);
    }
    let divided: Vec<Poly> = rows
        .iter()
        .map(|r| r.div_exact(&g).expect("primitive gcd divides each coefficient"))
        .collect();
    let squarefree = g
        .div_exact(&g.gcd(&g.derivative()))
        .expect("gcd with the derivative divides")
        .primitive_part();
    (
        BiPoly::from_coeffs_in_y(&divided),
        Some(FibreComponent { axis, poly: squarefree }),
    )
}

/// Remove every factor of `F` that depends on one coordinate only.
///
/// Returns the stripped curve and the removed fibres. Fails when nothing depending
/// on both coordinates remains.
pub fn strip_degenerate(curve: &CurveSpec) -> Result<(CurveSpec, Vec<FibreComponent>)> {
    let (poly, vertical) = strip_axis(curve.poly(), Axis::X);
    let (swapped, horizontal) = strip_axis(&poly.swap(), Axis::Y);
    let poly = swapped.swap();
    let components: Vec<FibreComponent> = vertical.into_iter().chain(horizontal).collect();
    if poly.deg_x() == 0 || poly.deg_y() == 0 {
        return Err(Error::HypothesisViolated(format!(
            "{curve} is a union of coordinate fibres; no component depends on both x and y"
        )));
    }
    let stripped = CurveSpec::new(poly, curve.defining_field_degree())?;
    Ok((
        CurveSpec {
            removed_content: curve.removed_content.clone(),
            ..stripped
        },
        components,
    ))
}

/// `c9 = max(deg_x F, deg_y F) * [field of definition : Q]`.
pub fn derive_c9(curve: &CurveSpec) -> f64 {
    (curve.deg_x().max(curve.deg_y()) as u64 * curve.defining_field_degree() as u64) as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialPointHit {
    pub d1: Discriminant,
    pub d2: Discriminant,
    /// Whether `Q(sqrt D1) = Q(sqrt D2)`.
    pub same_cm_field: bool,
    /// Gcd of `H_D1(x)` and `Res_y(H_D2(y), F)`; its roots are the `x`-coordinates of the points.
    pub witness: Poly,
}

impl SpecialPointHit {
    fn new(d1: Discriminant, d2: Discriminant, witness: Poly) -> Self {
        Self {
            d1,
            d2,
            same_cm_field: d1.fundamental_part() == d2.fundamental_part(),
            witness,
        }
    }

    /// Re-verify the certificate: the witness divides both `H_D1` and the resultant.
    pub fn verify(&self, curve: &CurveSpec, h1: &HilbertPoly, h2: &HilbertPoly) -> bool {
        let r = resultant_monic_y(&h2.as_poly(), curve.poly());
        self.witness.degree().unwrap_or(0) >= 1
            && h1.as_poly().div_exact(&self.witness).is_some()
            && (r.is_zero() || r.div_exact(&self.witness).is_some())
    }
}

fn check_scan_inputs(curve: &CurveSpec, cap: u64) -> Result<()> {
    if cap < 3 {
        return Err(Error::OutOfRange(format!("enumeration cap {cap} is below 3")));
    }
    if cap > SIEVE_CAP_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "enumeration cap {cap} exceeds {SIEVE_CAP_LIMIT}"
        )));
    }
    if curve.deg_x() == 0 || curve.deg_y() == 0 {
        return Err(Error::Precondition(format!(
            "{curve} does not depend on both coordinates; strip it first"
        )));
    }
    Ok(())
}

/// Every pair `(D1, D2)` with `|Di| <= cap` for which the curve passes through a
/// point `(j1, j2)` with `H_D1(j1) = H_D2(j2) = 0`, each with an exact witness.
pub fn special_point_scan(curve: &CurveSpec, cap: u64) -> Result<Vec<SpecialPointHit>> {
    check_scan_inputs(curve, cap)?;
    let moduli = singular_moduli_up_to(cap)?;
    scan_with_moduli(curve, &moduli)
}

fn scan_with_moduli(curve: &CurveSpec, moduli: &[(Discriminant, HilbertPoly)]) -> Result<Vec<SpecialPointHit>> {
    let f = curve.poly();
    let reduced: Vec<Vec<Vec<u64>>> = moduli
        .iter()
        .map(|(_, h)| FILTER_PRIMES.iter().map(|&p| h.as_poly().reduce_mod(p)).collect())
        .collect();
    let mut hits = Vec::new();
    // by D2 outer so that each resultant is formed once
    let mut by_d2: Vec<Vec<SpecialPointHit>> = Vec::with_capacity(moduli.len());
    for (d2, h2) in moduli {
        let h2 = h2.as_poly();
        let r_mod: Vec<Vec<u64>> = FILTER_PRIMES
            .iter()
            .map(|&p| resultant_monic_y_mod(&h2, f, p))
            .collect();
        let mut exact: Option<Poly> = None;
        let mut found = Vec::new();
        for ((d1, h1), h1_mod) in moduli.iter().zip(&reduced) {
            let coprime_somewhere = FILTER_PRIMES.iter().enumerate().any(|(k, &p)| {
                modp::degree(&modp::gcd(&r_mod[k], &h1_mod[k], p)) == Some(0)
            });
            if coprime_somewhere {
                continue;
            }
            let r = exact.get_or_insert_with(|| resultant_monic_y(&h2, f));
            let h1 = h1.as_poly();
            let g = if r.is_zero() { h1.clone() } else { r.gcd(&h1) };
            if g.degree().unwrap_or(0) == 0 {
                continue;
            }
            if h1.div_exact(&g).is_none() || !(r.is_zero() || r.div_exact(&g).is_some()) {
                return Err(Error::Precondition(format!(
                    "witness for ({}, {}) failed exact division",
                    d1.value(),
                    d2.value()
                )));
            }
            found.push(SpecialPointHit::new(*d1, *d2, g));
        }
        by_d2.push(found);
    }
    // report in (|D1|, |D2|) order
    for i in 0..moduli.len() {
        for found in &by_d2 {
            hits.extend(found.iter().filter(|h| h.d1 == moduli[i].0).cloned());
        }
    }
    Ok(hits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapVsBound {
    CapReachedBound,
    CapBelowBound,
}

impl fmt::Display for CapVsBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CapVsBound::CapReachedBound => "cap_reached_bound",
            CapVsBound::CapBelowBound => "cap_below_bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieveReport {
    pub curve: CurveSpec,
    pub stripped: CurveSpec,
    pub z_prime: Vec<FibreComponent>,
    pub c9: f64,
    pub c11: BoundReport,
    pub enumeration_cap: u64,
    pub hits: Vec<SpecialPointHit>,
    pub cap_vs_bound: CapVsBound,
}

impl SieveReport {
    /// JSON form; every integer is a decimal string.
    pub fn to_json(&self) -> Value {
        json!({
            "curve": {
                "polynomial": self.curve.to_string(),
                "stripped": self.stripped.to_string(),
                "deg_x": self.stripped.deg_x().to_string(),
                "deg_y": self.stripped.deg_y().to_string(),
                "field_degree": self.curve.defining_field_degree().to_string(),
                "removed_content": self.curve.removed_content().map(ToString::to_string),
            },
            "z_prime": self.z_prime.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "c11": bound_report_json(&self.c11),
            "cap": self.enumeration_cap.to_string(),
            "cap_vs_bound": self.cap_vs_bound.to_string(),
            "hits": self.hits.iter().map(|h| json!({
                "d1": h.d1.value().to_string(),
                "d2": h.d2.value().to_string(),
                "same_cm_field": h.same_cm_field,
                "witness_poly": h.witness.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// JSON form of a bound report; the threshold is a decimal string.
pub fn bound_report_json(r: &BoundReport) -> Value {
    json!({
        "threshold": r.threshold.to_string(),
        "log_threshold": r.log_threshold,
        "epsilon1": r.epsilon1,
        "epsilon2": r.epsilon2,
        "exceptional_field_caveat": r.exceptional_field_caveat,
        "audit": r.audit,
    })
}

/// Strip, bound, and scan: the full special point sieve for one curve.
pub fn sieve(curve: &CurveSpec, cap_override: Option<u64>) -> Result<SieveReport> {
    let (stripped, z_prime) = strip_degenerate(curve)?;
    let c9 = derive_c9(&stripped);
    let mut c11 = andre_oort_c11(&AndreOortParams::new(2, c9)?)?;
    if let Some(entry) = c11.audit.iter_mut().find(|a| a.name == "c9") {
        entry.formula = "max(deg_x, deg_y) * field_degree".into();
    }
    let requested = BigInt::from(cap_override.unwrap_or(DEFAULT_SIEVE_CAP));
    let bound = BigInt::from(c11.threshold.clone());
    let cap_big = requested.clone().min(bound.clone());
    let enumeration_cap: u64 = cap_big.try_into().expect("cap below the requested u64");
    let hits = special_point_scan(&stripped, enumeration_cap)?;
    let cap_vs_bound = if BigInt::from(enumeration_cap) < bound {
        CapVsBound::CapBelowBound
    } else {
        CapVsBound::CapReachedBound
    };
    Ok(SieveReport {
        curve: curve.clone(),
        stripped,
        z_prime,
        c9,
        c11,
        enumeration_cap,
        hits,
        cap_vs_bound,
    })
}
