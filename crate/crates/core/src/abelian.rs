//! Structure of finite abelian groups from torsion counts and Smith normal form.

use num_traits::{Euclid, PrimInt, Signed};

use crate::arith::factorize;

/// Invariant factors `d1 | d2 | ... | dk` (all > 1) of a finite abelian group of
/// order `order`, given `killed(m) = #{x : m x = 0}`.
///
/// `killed` is only queried at prime powers dividing `order`.
pub fn invariants_from_torsion_counts(order: u64, mut killed: impl FnMut(u64) -> u64) -> Vec<u64> {
    // p-part exponents of each cyclic factor, largest first, keyed by prime.
    let mut parts: Vec<(u64, Vec<u32>)> = Vec::new();
    for (p, v) in factorize(order) {
        // ranks[k-1] = number of cyclic factors of exponent >= k
        let mut ranks: Vec<u32> = Vec::new();
        let mut prev_log = 0u32;
        let mut pk = 1u64;
        loop {
            pk *= p;
            let count = killed(pk);
            let log = ilog_exact(count, p);
            ranks.push(log - prev_log);
            prev_log = log;
            if log >= v {
                break;
            }
        }
        let mut exps = Vec::new();
        for k in 0..ranks.len() {
            let next = ranks.get(k + 1).copied().unwrap_or(0);
            for _ in 0..(ranks[k] - next) {
                exps.push(k as u32 + 1);
            }
        }
        exps.sort_unstable_by(|a, b| b.cmp(a));
        parts.push((p, exps));
    }
    let len = parts.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    let mut out: Vec<u64> = (0..len)
        .map(|i| {
            parts
                .iter()
                .map(|(p, e)| e.get(i).map_or(1, |&k| p.pow(k)))
                .product()
        })
        .collect();
    out.reverse();
    out
}

fn ilog_exact(n: u64, p: u64) -> u32 {
    let mut n = n;
    let mut k = 0;
    while n > 1 {
        assert!(n % p == 0, "torsion count is not a power of {p}");
        n /= p;
        k += 1;
    }
    k
}

/// Diagonal of the Smith normal form of an integer matrix, with zeros and
/// units dropped. Rows are relations on the generators indexed by columns.
///
/// Returns the invariant factors of `Z^cols / rowspace`; a zero on the
/// diagonal (free part) is reported as `0`.
pub fn smith_invariants(rows: &[Vec<i64>], cols: usize) -> Vec<u64> {
    let rows: Vec<&Vec<i64>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).collect();
    let widen = |r: &&Vec<i64>| r.iter().map(|&x| x as i128).collect();
    smith_diagonal(rows.iter().map(|r| r.to_vec()).collect(), cols)
        .or_else(|| smith_diagonal::<i128>(rows.iter().map(widen).collect(), cols))
        .expect("Smith normal form entries overflow i128")
}

/// `(g, s, t)` with `s a + t b = g = gcd(a, b) > 0`.
fn ext_gcd<T: PrimInt + Signed + Euclid>(a: T, b: T) -> Option<(T, T, T)> {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1, mut t0, mut t1) = (T::one(), T::zero(), T::zero(), T::one());
    while !r1.is_zero() {
        let q = r0.div_euclid(&r1);
        (r0, r1) = (r1, r0.checked_sub(&q.checked_mul(&r1)?)?);
        (s0, s1) = (s1, s0.checked_sub(&q.checked_mul(&s1)?)?);
        (t0, t1) = (t1, t0.checked_sub(&q.checked_mul(&t1)?)?);
    }
    Some(if r0 < T::zero() { (-r0, -s0, -t0) } else { (r0, s0, t0) })
}

/// `s x + t y`, or `None` on overflow.
fn lin<T: PrimInt>(s: T, x: T, t: T, y: T) -> Option<T> {
    s.checked_mul(&x)?.checked_add(&t.checked_mul(&y)?)
}

/// Invariant factors by a row-echelon pass (unimodular gcd steps) followed by
/// pivoting on the smallest entry. `None` if an entry overflows `T`.
fn smith_diagonal<T: PrimInt + Signed + Euclid>(mut m: Vec<Vec<T>>, cols: usize) -> Option<Vec<u64>> {
    let mut r = 0;
    for c in 0..cols {
        let mut have_pivot = false;
        for i in r..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            if !have_pivot {
                m.swap(r, i);
                have_pivot = true;
                continue;
            }
            let (a, b) = (m[r][c], m[i][c]);
            let (g, s, t) = if (b % a).is_zero() { (a, T::one(), T::zero()) } else { ext_gcd(a, b)? };
            let (ag, bg) = (a / g, b / g);
            for j in c..cols {
                let (x, y) = (m[r][j], m[i][j]);
                m[r][j] = lin(s, x, t, y)?;
                m[i][j] = lin(ag, y, -bg, x)?;
            }
        }
        if have_pivot {
            r += 1;
        }
    }
    // rows past r are zero now
    m.truncate(r);

    let nrows = m.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < cols {
        // pivot: smallest nonzero |entry| in the remaining submatrix
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else {
            // remaining generators are free
            break;
        };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        let mut done = true;
        let p = m[t][t];
        for i in (t + 1)..nrows {
            let q = m[i][t].div_euclid(&p);
            if !q.is_zero() {
                for j in t..cols {
                    m[i][j] = lin(T::one(), m[i][j], -q, m[t][j])?;
                }
            }
            done &= m[i][t].is_zero();
        }
        for j in (t + 1)..cols {
            let q = m[t][j].div_euclid(&p);
            if !q.is_zero() {
                for row in m.iter_mut() {
                    row[j] = lin(T::one(), row[j], -q, row[t])?;
                }
            }
            done &= m[t][j].is_zero();
        }
        if !done {
            continue;
        }
        // divisibility: the pivot must divide the whole remaining block
        let bad = ((t + 1)..nrows).find(|&i| ((t + 1)..cols).any(|j| !(m[i][j] % p).is_zero()));
        if let Some(i) = bad {
            for j in t..cols {
                m[t][j] = m[t][j].checked_add(&m[i][j])?;
            }
            continue;
        }
        diag.push(p.abs().to_u64()?);
        t += 1;
    }
    diag.resize(cols, 0);
    let mut out: Vec<u64> = diag.into_iter().filter(|&d| d != 1).collect();
    // zeros (free factors) go last, torsion in increasing order
    out.sort_by_key(|&d| if d == 0 { u64::MAX } else { d });
    Some(out)
}
