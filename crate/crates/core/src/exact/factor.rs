use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

const TRIAL_BOUND: u32 = 1 << 14;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_BOUND as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

/// Removes the largest power of `p` dividing `rest`, squaring the trial divisor while it divides.
fn divide_out(rest: &mut BigUint, p: &BigUint) -> u32 {
    let mut powers = vec![(p.clone(), 1u32)];
    let mut k = 0;
    loop {
        let (d, e) = powers.last().unwrap().clone();
        let (q, r) = (&*rest / &d, &*rest % &d);
        if r.is_zero() {
            *rest = q;
            k += e;
            powers.push((&d * &d, 2 * e));
        } else if powers.len() > 1 {
            powers.pop();
        } else {
            return k;
        }
    }
}

/// Splits `n > 0` into bases with multiplicities.
///
/// Primes below 2^14 are found by trial division. A cofactor left over is kept as a single
/// base after stripping perfect powers, so the result is a genuine factorisation whenever
/// every prime factor is small.
pub fn factor(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    let mut rest = n.clone();
    for &p in small_primes() {
        if rest.is_one() {
            break;
        }
        let bp = BigUint::from(p);
        let k = if p == 2 {
            let z = rest.trailing_zeros().unwrap_or(0);
            rest >>= z;
            z as u32
        } else {
            divide_out(&mut rest, &bp)
        };
        if k > 0 {
            out.push((bp, k));
        }
        if rest.to_u64().map_or(false, |r| r < (p as u64) * (p as u64)) && !rest.is_one() {
            // the remainder is itself prime
            out.push((rest.clone(), 1));
            rest = BigUint::one();
            break;
        }
    }
    if !rest.is_one() {
        let (base, k) = strip_power(&rest);
        out.push((base, k));
    }
    out.sort();
    out
}

fn strip_power(n: &BigUint) -> (BigUint, u32) {
    let bits = n.bits() as u32;
    let mut k = bits.max(2);
    while k >= 2 {
        let r = n.nth_root(k);
        if r > BigUint::one() && r.pow(k) == *n {
            let (b, j) = strip_power(&r);
            return (b, j * k);
        }
        k -= 1;
    }
    (n.clone(), 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_small_numbers() {
        let f = factor(&BigUint::from(360u32));
        let want: Vec<(BigUint, u32)> = vec![(2u32.into(), 3), (3u32.into(), 2), (5u32.into(), 1)];
        assert_eq!(f, want);
    }

    #[test]
    fn large_prime_power_cofactor() {
        let p = BigUint::from(1_000_003u64);
        let n = p.pow(3) * BigUint::from(12u32);
        let f = factor(&n);
        assert_eq!(f.last().unwrap(), &(p, 3));
    }

    #[test]
    fn huge_smooth_powers() {
        let n = BigUint::from(2u32).pow(7800) * BigUint::from(5u32).pow(3351) * BigUint::from(7u32);
        let want: Vec<(BigUint, u32)> = vec![(2u32.into(), 7800), (5u32.into(), 3351), (7u32.into(), 1)];
        assert_eq!(factor(&n), want);
    }
}
