//! Singular moduli: `j(tau)` at CM points to high precision and exact Hilbert
//! class polynomials obtained by rounding the numerically expanded product.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::bigfloat::{Fixed, FixedComplex};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadform::{reduced_forms, Discriminant, QuadForm};

/// Largest `|D|` accepted by [`hilbert_class_poly`].
pub const HILBERT_DISCRIMINANT_LIMIT: u64 = 50_000;

/// Number of precision doublings before giving up on the integrality snap.
pub const MAX_ESCALATIONS: u32 = 10;

/// The monic minimal polynomial of the singular moduli of discriminant `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertPoly {
    pub discriminant: Discriminant,
    /// Ascending; the last entry is 1.
    pub coefficients: Vec<BigInt>,
}

impl HilbertPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn as_poly(&self) -> Poly {
        Poly::new(self.coefficients.clone())
    }
}

impl fmt::Display for HilbertPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_poly())
    }
}

/// `log2 |1/q|` at `tau_f`, which is also `log2 |j(tau_f)|` up to a small constant.
fn log2_inv_q(f: &QuadForm) -> f64 {
    let d = (f.b * f.b - 4 * f.a * f.c).unsigned_abs() as f64;
    PI * d.sqrt() / (f.a as f64 * LN_2)
}

/// `prod_{n >= 1} (1 - q^n)` by the pentagonal number theorem.
///
/// `log2_q_inv` must not exceed `log2 |1/q|`; the omitted tail is below `2^-prec`.
fn euler_product(q: &FixedComplex, log2_q_inv: f64) -> FixedComplex {
    let prec = q.prec();
    let one = FixedComplex::one(prec);
    let mut sum = one.clone();
    let mut qk = q.clone(); // q^k
    let mut q_odd = q.pow(3); // q^(2k+1)
    let q2 = q.square();
    let mut p1 = q.clone(); // q^(k(3k-1)/2)
    let mut k: u64 = 1;
    loop {
        let p2 = p1.mul(&qk); // q^(k(3k+1)/2)
        let pair = p1.add(&p2);
        sum = if k % 2 == 1 { sum.sub(&pair) } else { sum.add(&pair) };
        p1 = p2.mul(&q_odd);
        qk = qk.mul(q);
        q_odd = q_odd.mul(&q2);
        k += 1;
        let next_exponent = (k * (3 * k - 1) / 2) as f64;
        // tail <= 2 |q|^e / (1 - |q|) <= 3 |q|^e
        if next_exponent * log2_q_inv >= prec as f64 + 2.0 {
            break;
        }
    }
    let tail_exponent = (k * (3 * k - 1) / 2) as f64;
    assert!(
        tail_exponent * log2_q_inv >= prec as f64 + 2.0,
        "pentagonal truncation bound not met"
    );
    sum
}

/// `j(tau_f)` for the CM point `tau_f = (-b + sqrt(D)) / (2a)` of a reduced form.
///
/// Uses `t = q (E(q^2) / E(q))^24` and `j = (1 + 256 t)^3 / t`, where `E` is the
/// Euler product. The result has `precision_bits` fractional bits and absolute
/// error below `2^(-precision_bits / 2)`.
pub fn j_invariant(f: &QuadForm, precision_bits: u32) -> Result<FixedComplex> {
    if !f.is_reduced() {
        return Err(Error::Precondition(format!("form {f} is not reduced")));
    }
    let k = log2_inv_q(f);
    if precision_bits < 64 || (precision_bits as f64) < k + 16.0 {
        return Err(Error::Precision(format!(
            "{precision_bits} bits is too few for form {f} (|j| is about 2^{k:.0}; need at least max(64, log2|j| + 16))"
        )));
    }
    // q has magnitude 2^-k, and 1/t multiplies its absolute error by 2^(2k)
    let work = precision_bits + 2 * k.ceil() as u32 + 64;
    let d = f.b * f.b - 4 * f.a * f.c;
    let pi = Fixed::pi(work);
    let sqrt_d = Fixed::from_int(-d, work).sqrt();
    let re = (&pi * &sqrt_d).div_int(f.a).mul_int(-1);
    let im = pi.mul_int(-f.b).div_int(f.a);
    let q = FixedComplex::new(re, im).exp();

    // guard the truncation bound against rounding in the f64 estimate
    let log2_q_inv = k * (1.0 - 1e-9);
    let e1 = euler_product(&q, log2_q_inv);
    let e2 = euler_product(&q.square(), 2.0 * log2_q_inv);
    let t = q.mul(&e2.div(&e1).pow(24));
    let one = FixedComplex::one(work);
    let j = one.add(&t.scale_int(256)).pow(3).div(&t);
    Ok(j.with_prec(precision_bits))
}

/// Starting precision: `3.5 pi sqrt|D| sum(1/a) / ln 2 + 64` bits.
fn initial_precision(d: &Discriminant, forms: &[QuadForm]) -> u32 {
    let inv_sum: f64 = forms.iter().map(|f| 1.0 / f.a as f64).sum();
    (3.5 * PI * (d.abs() as f64).sqrt() * inv_sum / LN_2 + 64.0).ceil() as u32
}

fn poly_mul_fixed(a: &[Fixed], b: &[Fixed]) -> Vec<Fixed> {
    let prec = a[0].prec();
    let mut out = vec![Fixed::zero(prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// One attempt at a fixed precision; `None` when a coefficient fails to snap.
fn attempt(forms: &[QuadForm], prec: u32) -> Result<Option<Vec<BigInt>>> {
    let mut product = vec![Fixed::from_int(1, prec)];
    for f in forms.iter().filter(|f| f.b >= 0) {
        let j = j_invariant(f, prec)?;
        let has_mirror = f.b > 0 && f.b != f.a && f.a != f.c;
        let factor = if has_mirror {
            // (x - j)(x - conj j) = x^2 - 2 Re(j) x + |j|^2
            vec![j.norm_sqr(), j.re.mul_int(-2), Fixed::from_int(1, prec)]
        } else {
            if !j.im.below_pow2(prec as i64 / 4) {
                return Ok(None);
            }
            vec![-&j.re, Fixed::from_int(1, prec)]
        };
        product = poly_mul_fixed(&product, &factor);
    }
    // coefficients must land within 1/4 of an integer
    let tolerance = Fixed::from_ratio(1, 4, prec);
    let mut coeffs = Vec::with_capacity(product.len());
    for c in &product {
        let (n, dist) = c.round();
        if dist >= tolerance {
            return Ok(None);
        }
        coeffs.push(n);
    }
    Ok(Some(coeffs))
}

/// The Hilbert class polynomial `H_D(x) = prod (x - j(tau_f))` over reduced forms of discriminant `D`.
pub fn hilbert_class_poly(d: &Discriminant) -> Result<HilbertPoly> {
    if d.abs() > HILBERT_DISCRIMINANT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "|D| = {} exceeds the Hilbert polynomial limit {HILBERT_DISCRIMINANT_LIMIT}",
            d.abs()
        )));
    }
    let forms = reduced_forms(d);
    let mut prec = initial_precision(d, &forms);
    for _ in 0..=MAX_ESCALATIONS {
        if let Some(coefficients) = attempt(&forms, prec)? {
            debug_assert!(coefficients.last().is_some_and(One::is_one));
            return Ok(HilbertPoly {
                discriminant: *d,
                coefficients,
            });
        }
        prec = prec.saturating_mul(2);
    }
    Err(Error::Precision(format!(
        "coefficients of H_{} did not snap to integers after {MAX_ESCALATIONS} precision doublings",
        d.value()
    )))
}

/// Every discriminant `-bound <= D <= -3` with its class polynomial, ordered by `|D|`.
pub fn singular_moduli_up_to(bound: u64) -> Result<Vec<(Discriminant, HilbertPoly)>> {
    if bound > HILBERT_DISCRIMINANT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "bound {bound} exceeds the Hilbert polynomial limit {HILBERT_DISCRIMINANT_LIMIT}"
        )));
    }
    Discriminant::up_to(bound)
        .map(|d| hilbert_class_poly(&d).map(|h| (d, h)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadform::class_number;
    use num_traits::ToPrimitive;

    fn disc(d: i64) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    fn coeffs(h: &HilbertPoly) -> Vec<String> {
        h.coefficients.iter().map(ToString::to_string).collect()
    }

    /// Independent double precision oracle: j = E4^3 / Delta from the divisor-sum
    /// and product expansions.
    fn j_oracle(f: &QuadForm) -> (f64, f64) {
        let (x, y) = f.tau();
        let r = (-2.0 * PI * y).exp();
        let (qr, qi) = (r * (2.0 * PI * x).cos(), r * (2.0 * PI * x).sin());
        let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
        let mut e4 = (1.0, 0.0);
        let mut prod = (1.0, 0.0);
        let mut qn = (1.0, 0.0);
        for n in 1..60u64 {
            qn = mul(qn, (qr, qi));
            let sigma3: u64 = (1..=n).filter(|d| n % d == 0).map(|d| d * d * d).sum();
            e4.0 += 240.0 * sigma3 as f64 * qn.0;
            e4.1 += 240.0 * sigma3 as f64 * qn.1;
            prod = mul(prod, (1.0 - qn.0, -qn.1));
        }
        let mut delta = (qr, qi);
        for _ in 0..24 {
            delta = mul(delta, prod);
        }
        let num = mul(mul(e4, e4), e4);
        let den = delta.0 * delta.0 + delta.1 * delta.1;
        let z = mul(num, (delta.0, -delta.1));
        (z.0 / den, z.1 / den)
    }

    fn oracle_poly(d: i64) -> Vec<f64> {
        let mut re = vec![1.0];
        let mut im = vec![0.0];
        for f in reduced_forms(&disc(d)) {
            let (jr, ji) = j_oracle(&f);
            let n = re.len();
            let (mut nr, mut ni) = (vec![0.0; n + 1], vec![0.0; n + 1]);
            for k in 0..n {
                nr[k + 1] += re[k];
                ni[k + 1] += im[k];
                nr[k] -= re[k] * jr - im[k] * ji;
                ni[k] -= re[k] * ji + im[k] * jr;
            }
            re = nr;
            im = ni;
        }
        re
    }

    #[test]
    fn j_examples() {
        let cases = [((1, 0, 1), 1728i64), ((1, 1, 1), 0), ((1, 1, 2), -3375)];
        for ((a, b, c), expected) in cases {
            let j = j_invariant(&QuadForm::new(a, b, c).unwrap(), 128).unwrap();
            let (n, dist) = j.re.round();
            assert_eq!(n, BigInt::from(expected));
            assert!(dist.below_pow2(64));
            assert!(j.im.below_pow2(64));
        }
    }

    #[test]
    fn j_rejects_low_precision() {
        let f = QuadForm::new(1, 1, 41).unwrap();
        assert!(matches!(j_invariant(&f, 32), Err(Error::Precision(_))));
        // |j| is about 2^58 for D = -163, so 64 bits are not enough
        assert!(matches!(j_invariant(&f, 64), Err(Error::Precision(_))));
        assert!(j_invariant(&f, 96).is_ok());
    }

    #[test]
    fn small_polynomials() {
        let h = |d| coeffs(&hilbert_class_poly(&disc(d)).unwrap());
        assert_eq!(h(-3), ["0", "1"]);
        assert_eq!(h(-4), ["-1728", "1"]);
        assert_eq!(h(-7), ["3375", "1"]);
        assert_eq!(h(-8), ["-8000", "1"]);
        assert_eq!(hilbert_class_poly(&disc(-4)).unwrap().to_string(), "x - 1728");
    }

    #[test]
    fn minus_23_matches_oracle() {
        let oracle: Vec<i64> = oracle_poly(-23).iter().map(|c| c.round() as i64).collect();
        assert_eq!(oracle, [12_771_880_859_375, -5_151_296_875, 3_491_750, 1]);
        let h = hilbert_class_poly(&disc(-23)).unwrap();
        let exact: Vec<i64> = h.coefficients.iter().map(|c| c.try_into().unwrap()).collect();
        assert_eq!(exact, oracle);
        assert_eq!(
            h.to_string(),
            "x^3 + 3491750*x^2 - 5151296875*x + 12771880859375"
        );
    }

    #[test]
    fn class_number_one_roots_match_oracle() {
        let ones: Vec<i64> = Discriminant::up_to(163 * 4)
            .filter(|d| class_number(d) == 1)
            .map(|d| d.value())
            .collect();
        assert_eq!(
            ones,
            [-3, -4, -7, -8, -11, -12, -16, -19, -27, -28, -43, -67, -163]
        );
        for d in ones {
            let h = hilbert_class_poly(&disc(d)).unwrap();
            assert_eq!(h.degree(), 1);
            let root = -h.coefficients[0].to_f64().unwrap();
            let (jr, _) = j_oracle(&reduced_forms(&disc(d))[0]);
            assert!((root - jr).abs() <= 1e-9 * jr.abs().max(1.0), "D = {d}: {root} vs {jr}");
        }
    }

    #[test]
    fn degree_and_separability() {
        for d in Discriminant::up_to(400) {
            let h = hilbert_class_poly(&d).unwrap().as_poly();
            assert_eq!(h.degree(), Some(class_number(&d) as usize), "D = {d}");
            assert!(h.is_monic());
            assert_eq!(h.gcd(&h.derivative()).degree(), Some(0), "D = {d}");
        }
    }

    #[test]
    fn larger_discriminants_agree_with_oracle() {
        for d in [-71, -104, -239] {
            let exact = hilbert_class_poly(&disc(d)).unwrap();
            let approx = oracle_poly(d);
            for (c, o) in exact.coefficients.iter().zip(&approx) {
                let c = c.to_f64().unwrap();
                assert!((c - o).abs() <= 1e-6 * c.abs().max(1.0), "D = {d}");
            }
        }
    }

    #[test]
    fn enumeration() {
        let names = |b| {
            singular_moduli_up_to(b)
                .unwrap()
                .iter()
                .map(|(d, h)| format!("{}:{h}", d.value()))
                .collect::<Vec<_>>()
        };
        assert!(names(2).is_empty());
        assert_eq!(names(4), ["-3:x", "-4:x - 1728"]);
        assert_eq!(names(8), ["-3:x", "-4:x - 1728", "-7:x + 3375", "-8:x - 8000"]);
        assert!(matches!(
            singular_moduli_up_to(HILBERT_DISCRIMINANT_LIMIT + 1),
            Err(Error::ResourceLimit(_))
        ));
    }
}
