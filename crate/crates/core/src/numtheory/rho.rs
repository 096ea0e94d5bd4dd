//! Brent's variant of Pollard rho, batched gcds.

use super::primes::mulmod;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BATCH: u64 = 128;

/// Nontrivial factor of an odd composite u64 (never fails; retries with new constants).
pub fn rho_u64(n: u64, seed: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n);
    loop {
        let c = rng.gen_range(1..n);
        let y0 = rng.gen_range(0..n);
        if let Some(f) = brent_u64(n, c, y0, u64::MAX) {
            return f;
        }
    }
}

fn brent_u64(n: u64, c: u64, y0: u64, max_iter: u64) -> Option<u64> {
    let f = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
    let (mut y, mut r, mut q, mut g) = (y0, 1u64, 1u64, 1u64);
    let (mut x, mut ys) = (0u64, 0u64);
    let mut iters = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mulmod(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += BATCH;
            iters += BATCH;
        }
        r *= 2;
        if iters > max_iter {
            return None;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

/// Attempts to split an odd composite within an iteration budget.
pub fn rho_big(n: &BigUint, seed: u64, max_iter: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spent = 0u64;
    let one = BigUint::one();
    for _attempt in 0..8 {
        if spent >= max_iter {
            break;
        }
        let c = BigUint::from(rng.gen_range(1..u64::MAX)) % n;
        let mut y = BigUint::from(rng.gen::<u64>()) % n;
        let (mut r, mut q, mut g) = (1u64, one.clone(), one.clone());
        let (mut x, mut ys) = (BigUint::zero(), BigUint::zero());
        let f = |v: &BigUint| (v * v + &c) % n;
        let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
        while g.is_one() && spent < max_iter {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    q = q * diff(&x, &y) % n;
                }
                g = q.gcd(n);
                k += BATCH;
                spent += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = diff(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && &g != n {
            return Some(g);
        }
    }
    None
}
