//! Small-integer number theory helpers shared by the other modules.

use num_integer::Integer;

/// Prime factorization by trial division, as `(prime, exponent)` pairs in increasing order.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Number of distinct prime divisors.
pub fn omega(n: u64) -> u32 {
    factorize(n).len() as u32
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// Iterator over the primes 2, 3, 5, ... (trial division, for short scans).
pub fn primes() -> impl Iterator<Item = u64> {
    (2u64..).filter(|&n| is_prime(n))
}

/// All primes `p < n`, by an odd-only sieve of Eratosthenes.
pub fn primes_below(n: u64) -> Vec<u64> {
    if n <= 2 {
        return Vec::new();
    }
    // index i stands for 2i + 1
    let half = (n / 2) as usize;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) < n as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut m = p * p / 2;
            while m < half {
                composite[m] = true;
                m += p;
            }
        }
        i += 1;
    }
    let mut out = vec![2];
    out.extend(
        (1..half)
            .filter(|&i| !composite[i])
            .map(|i| 2 * i as u64 + 1)
            .filter(|&p| p < n),
    );
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    (e.gcd, e.x, e.y)
}

/// Returns `(g, x, y, z)` with `a*x + b*y + c*z = g = gcd(a, b, c)`.
pub fn ext_gcd3(a: i128, b: i128, c: i128) -> (i128, i128, i128, i128) {
    let (g1, x1, y1) = ext_gcd(a, b);
    let (g, s, t) = ext_gcd(g1, c);
    (g, s * x1, s * y1, t)
}
