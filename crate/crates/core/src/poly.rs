//! Exact integer polynomials in one and two variables, plus the word-size
//! modular arithmetic used to rule out common roots cheaply.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense univariate polynomial over `Z`, coefficients in ascending degree.
/// Never stores a zero leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BigInt>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.lead().is_one()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i)
                .collect(),
        )
    }

    /// Gcd of the coefficients, nonnegative.
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// `self / content`, with a positive leading coefficient.
    pub fn primitive_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut g = self.content();
        if self.lead().is_negative() {
            g = -g;
        }
        Poly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Exact quotient by a scalar, `None` unless every coefficient is divisible.
    pub fn div_scalar(&self, k: &BigInt) -> Option<Poly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(Poly::new(out))
    }

    /// Quotient and remainder when `d` is monic, or whenever every step divides exactly.
    /// `None` if some step is not an integer division.
    pub fn div_rem_exact(&self, d: &Poly) -> Option<(Poly, Poly)> {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.lead();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let c = r[top].clone();
            if !c.is_zero() {
                let (qc, rem) = c.div_rem(&lead);
                if !rem.is_zero() {
                    return None;
                }
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[top - dd + i] -= &qc * dc;
                }
                q[top - dd] = qc;
            }
            r.pop();
        }
        Some((Poly::new(q), Poly::new(r)))
    }

    /// `self / d` when `d` divides `self` exactly in `Z[x]`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        match self.div_rem_exact(d) {
            Some((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    /// `lead(d)^(deg self - deg d + 1) * self mod d`.
    pub fn pseudo_rem(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.lead();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let t = d.scale(&r.lead()).shift(dr - dd);
            r = r.scale(&lead).sub(&t);
        }
        r
    }

    /// Greatest common divisor in `Q[x]`, returned primitive with positive leading coefficient.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.primitive_part(), o.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a
    }

    pub fn display_in(&self, var: &str) -> String {
        let terms: Vec<(BigInt, String)> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (c.clone(), monomial(&[(var, i)])))
            .collect();
        format_terms(&terms)
    }

    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        modp::trim(self.coeffs.iter().map(|c| modp::reduce(c, p)).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("x"))
    }
}

fn monomial(vars: &[(&str, usize)]) -> String {
    vars.iter()
        .filter(|(_, e)| *e > 0)
        .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

fn format_terms(terms: &[(BigInt, String)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (c, mono)) in terms.iter().enumerate() {
        let mag = c.abs();
        let body = match (mono.is_empty(), mag.is_one()) {
            (true, _) => mag.to_string(),
            (false, true) => mono.clone(),
            (false, false) => format!("{mag}*{mono}"),
        };
        match (k, c.is_negative()) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

/// Sparse polynomial in `x` and `y` over `Z`, keyed by `(deg_x, deg_y)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), BigInt>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        Self::monomial(1, 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(1, 0, 1)
    }

    pub fn monomial(c: impl Into<BigInt>, i: usize, j: usize) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, c.into());
        p
    }

    fn add_term(&mut self, i: usize, j: usize, c: BigInt) {
        let slot = self.terms.entry((i, j)).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_x(&self) -> usize {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> usize {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> usize {
        self.terms.keys().map(|k| k.0 + k.1).max().unwrap_or(0)
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &o.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> BiPoly {
        let mut acc = BiPoly::constant(1);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exchange the roles of `x` and `y`.
    pub fn swap(&self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect(),
        }
    }

    pub fn content(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn div_scalar(&self, k: &BigInt) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(&key, c)| (key, c / k)).collect(),
        }
    }

    /// Coefficients of `y^0, y^1, ...` as polynomials in `x`.
    pub fn coeffs_in_y(&self) -> Vec<Poly> {
        let mut rows = vec![vec![BigInt::zero(); self.deg_x() + 1]; self.deg_y() + 1];
        for (&(i, j), c) in &self.terms {
            rows[j][i] = c.clone();
        }
        rows.into_iter().map(Poly::new).collect()
    }

    pub fn from_coeffs_in_y(rows: &[Poly]) -> BiPoly {
        let mut out = BiPoly::zero();
        for (j, row) in rows.iter().enumerate() {
            for (i, c) in row.coeffs().iter().enumerate() {
                out.add_term(i, j, c.clone());
            }
        }
        out
    }

    /// `F(x0, y)` as a polynomial in `y`.
    pub fn eval_x(&self, x0: &BigInt) -> Poly {
        Poly::new(self.coeffs_in_y().iter().map(|c| c.eval(x0)).collect())
    }

    /// `F(x0, y) mod p` as a polynomial in `y`.
    pub fn eval_x_mod(&self, x0: u64, p: u64) -> Vec<u64> {
        let mut out = vec![0u64; self.deg_y() + 1];
        for (&(i, j), c) in &self.terms {
            let term = modp::mul(modp::reduce(c, p), modp::pow(x0, i as u64, p), p);
            out[j] = modp::add(out[j], term, p);
        }
        modp::trim(out)
    }

    pub fn eval(&self, x0: &BigInt, y0: &BigInt) -> BigInt {
        self.eval_x(x0).eval(y0)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        let terms: Vec<(BigInt, String)> = keys
            .iter()
            .map(|&(i, j)| (self.terms[&(i, j)].clone(), monomial(&[("x", i), ("y", j)])))
            .collect();
        f.write_str(&format_terms(&terms))
    }
}

/// `Res_y(h(y), F(x, y))` for monic `h`, that is `prod F(x, beta)` over the roots of `h`.
///
/// Computed as the determinant of multiplication by `F` on `Z[x][y] / (h)`.
pub fn resultant_monic_y(h: &Poly, f: &BiPoly) -> Poly {
    assert!(h.is_monic(), "resultant_monic_y needs a monic polynomial");
    let n = h.degree().unwrap_or(0);
    if n == 0 {
        return Poly::constant(1);
    }
    // powers y^k mod h as vectors over Z, for k up to n - 1 + deg_y F
    let top = n + f.deg_y();
    let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(top);
    let mut cur = vec![BigInt::zero(); n];
    cur[0] = BigInt::one();
    for _ in 0..top {
        powers.push(cur.clone());
        // multiply by y and reduce with y^n = -sum h_i y^i
        let carry = cur[n - 1].clone();
        for i in (1..n).rev() {
            cur[i] = cur[i - 1].clone();
        }
        cur[0] = BigInt::zero();
        if !carry.is_zero() {
            for (i, slot) in cur.iter_mut().enumerate() {
                *slot -= &carry * h.coeff(i);
            }
        }
    }
    let fy = f.coeffs_in_y();
    // column k holds y^k * F reduced mod h
    let mut m = vec![vec![Poly::zero(); n]; n];
    for k in 0..n {
        for (j, cj) in fy.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            for (row, r) in powers[k + j].iter().enumerate() {
                if !r.is_zero() {
                    m[row][k] = m[row][k].add(&cj.scale(r));
                }
            }
        }
    }
    bareiss_det(m)
}

/// Determinant over `Z[x]` by fraction-free elimination.
fn bareiss_det(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    let mut sign = false;
    let mut prev = Poly::constant(1);
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = !sign;
                }
                None => return Poly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num
                    .div_exact(&prev)
                    .expect("Bareiss step divides exactly");
            }
            m[i][k] = Poly::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        det.neg()
    } else {
        det
    }
}

/// Arithmetic in `F_p[x]` on ascending coefficient vectors, `p < 2^63`.
pub mod modp {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::ToPrimitive;

    pub fn reduce(c: &BigInt, p: u64) -> u64 {
        c.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits u64")
    }

    pub fn add(a: u64, b: u64, p: u64) -> u64 {
        let s = a + b;
        if s >= p {
            s - p
        } else {
            s
        }
    }

    pub fn sub(a: u64, b: u64, p: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + p - b
        }
    }

    pub fn mul(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    pub fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut acc = 1 % p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a, p);
            }
            a = mul(a, a, p);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero residue modulo the prime `p`.
    pub fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    pub fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    pub fn degree(a: &[u64]) -> Option<usize> {
        a.len().checked_sub(1)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let db = degree(b).expect("division by zero polynomial");
        let li = inv(b[db], p);
        let mut r = a.to_vec();
        while r.len() > db {
            let top = r.len() - 1;
            let q = mul(r[top], li, p);
            if q != 0 {
                for (i, &bc) in b.iter().enumerate() {
                    r[top - db + i] = sub(r[top - db + i], mul(q, bc, p), p);
                }
            }
            r.pop();
            r = trim(r);
        }
        trim(r)
    }

    /// Monic gcd; the zero polynomial if both inputs are zero.
    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        if let Some(&l) = a.last() {
            let li = inv(l, p);
            a.iter_mut().for_each(|c| *c = mul(*c, li, p));
        }
        a
    }

    pub fn eval(a: &[u64], x: u64, p: u64) -> u64 {
        a.iter().rev().fold(0, |acc, &c| add(mul(acc, x, p), c, p))
    }

    /// `Res(a, b)` over `F_p`, with the convention `Res(a, c) = c^deg a` for a constant `c`.
    pub fn resultant(a: &[u64], b: &[u64], p: u64) -> u64 {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        let mut acc = 1u64;
        loop {
            let (Some(m), Some(n)) = (degree(&a), degree(&b)) else {
                return 0;
            };
            if n == 0 {
                return mul(acc, pow(b[0], m as u64, p), p);
            }
            let r = rem(&a, &b, p);
            let Some(k) = degree(&r) else {
                return 0;
            };
            if (m * n) % 2 == 1 {
                acc = sub(0, acc, p);
            }
            acc = mul(acc, pow(b[n], (m - k) as u64, p), p);
            a = b;
            b = r;
        }
    }

    /// The polynomial of degree `< xs.len()` through the points `(xs[i], ys[i])`.
    pub fn interpolate(xs: &[u64], ys: &[u64], p: u64) -> Vec<u64> {
        let n = xs.len();
        // Newton divided differences
        let mut c = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = sub(c[i], c[i - 1], p);
                let den = sub(xs[i], xs[i - j], p);
                c[i] = mul(num, inv(den, p), p);
            }
        }
        let mut out = vec![0u64; n];
        for i in (0..n).rev() {
            // out = out * (x - xs[i]) + c[i]
            let mut next = vec![0u64; n];
            for k in 0..n {
                if out[k] == 0 {
                    continue;
                }
                if k + 1 < n {
                    next[k + 1] = add(next[k + 1], out[k], p);
                }
                next[k] = sub(next[k], mul(out[k], xs[i], p), p);
            }
            next[0] = add(next[0], c[i], p);
            out = next;
        }
        trim(out)
    }

    /// Whether `n` is prime, for `n < 2^64` (deterministic Miller-Rabin bases).
    pub fn is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if n % q == 0 {
                return n == q;
            }
        }
        let s = (n - 1).trailing_zeros();
        let d = (n - 1) >> s;
        'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = pow(a, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 1..s {
                x = mul(x, x, n);
                if x == n - 1 {
                    continue 'witness;
                }
            }
            return false;
        }
        true
    }
}

/// `Res_y(h(y), F(x, y)) mod p` for monic `h`, by evaluation at `deg + 1` points and interpolation.
pub fn resultant_monic_y_mod(h: &Poly, f: &BiPoly, p: u64) -> Vec<u64> {
    let hp = h.reduce_mod(p);
    let deg_bound = h.degree().unwrap_or(0) * f.deg_x();
    let xs: Vec<u64> = (0..=deg_bound as u64).collect();
    let ys: Vec<u64> = xs
        .iter()
        .map(|&x0| modp::resultant(&hp, &f.eval_x_mod(x0, p), p))
        .collect();
    modp::interpolate(&xs, &ys, p)
}
