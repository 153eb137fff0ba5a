//! Modular arithmetic on `u64` moduli with `u128` intermediates.

use rand::Rng;

pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `n`, if it exists.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(n as i128) as u64)
}

/// Deterministic Miller-Rabin; exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime `p = 3 (mod 4)` with exactly `bits` bits and its top two bits
/// set, or `None` after `attempts` candidates.
pub fn blum_prime<R: Rng + ?Sized>(bits: u32, attempts: usize, rng: &mut R) -> Option<u64> {
    debug_assert!((3..=32).contains(&bits));
    let top = 0b11u64 << (bits - 2);
    let low_mask = (1u64 << (bits - 2)) - 1;
    (0..attempts).find_map(|_| {
        let p = top | (rng.random::<u64>() & low_mask) | 0b11;
        is_prime(p).then_some(p)
    })
}

/// Euler's criterion for an odd prime `p`.
pub fn is_qr_mod_prime(a: u64, p: u64) -> bool {
    let a = a % p;
    a != 0 && pow_mod(a, (p - 1) / 2, p) == 1
}

/// Square root modulo a prime `p = 3 (mod 4)`; the caller checks residuosity.
pub fn sqrt_mod_blum_prime(a: u64, p: u64) -> u64 {
    pow_mod(a, (p + 1) / 4, p)
}

/// The `x mod pq` with `x = a (mod p)` and `x = b (mod q)`.
pub fn crt(a: u64, p: u64, b: u64, q: u64) -> u64 {
    let n = p as u128 * q as u128;
    let q_inv = inv_mod(q % p, p).expect("distinct primes are coprime");
    let p_inv = inv_mod(p % q, q).expect("distinct primes are coprime");
    let x = (a as u128 * q as u128 % n * q_inv as u128 % n + b as u128 * p as u128 % n * p_inv as u128 % n) % n;
    x as u64
}
