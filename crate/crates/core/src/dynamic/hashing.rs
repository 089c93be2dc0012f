//! Arithmetic over the Mersenne prime field 2^61 - 1 and the pairwise
//! independent hash family built on it.

use rand::Rng;

pub const P61: u64 = (1 << 61) - 1;

#[inline]
pub fn mul_mod(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & P61;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
pub fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P61 - b
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    base %= P61;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// Reduces a signed integer into the field.
#[inline]
pub fn from_signed(x: i64) -> u64 {
    let m = x.rem_euclid(P61 as i64);
    m as u64
}

/// `x -> (a x + b) mod p`, with `a != 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseHash {
    a: u64,
    b: u64,
}

impl PairwiseHash {
    pub fn random(rng: &mut impl Rng) -> Self {
        PairwiseHash {
            a: rng.gen_range(1..P61),
            b: rng.gen_range(0..P61),
        }
    }

    #[inline]
    pub fn hash(&self, x: u64) -> u64 {
        add_mod(mul_mod(self.a, x % P61), self.b)
    }

    #[inline]
    pub fn bucket(&self, x: u64, width: usize) -> usize {
        (self.hash(x) % width as u64) as usize
    }
}
