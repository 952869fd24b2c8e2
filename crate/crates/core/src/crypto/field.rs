//! Prime-field arithmetic in Montgomery form on four 64-bit limbs, for any
//! odd modulus below 2^256. Used by the scalar-multiplication hot path;
//! everything else stays on `BigUint`.

use num_bigint::BigUint;
use num_traits::One;

pub(crate) type Fe = [u64; 4];

#[derive(Clone, PartialEq, Eq)]
pub(crate) struct Field {
    p: Fe,
    /// -p^-1 mod 2^64
    n0: u64,
    /// R^2 mod p, R = 2^256
    r2: Fe,
    /// p - 2, the inversion exponent
    p_minus_2: Fe,
    pub one: Fe,
}

#[inline(always)]
fn mac(acc: u64, a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = acc as u128 + (a as u128) * (b as u128) + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = a as u128 + b as u128 + carry as u128;
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub(b as u128 + borrow as u128);
    (t as u64, (t >> 127) as u64)
}

fn to_limbs(v: &BigUint) -> Fe {
    let mut out = [0u64; 4];
    for (o, d) in out.iter_mut().zip(v.iter_u64_digits()) {
        *o = d;
    }
    out
}

fn from_limbs(v: &Fe) -> BigUint {
    let mut bytes = Vec::with_capacity(32);
    for limb in v {
        bytes.extend_from_slice(&limb.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

fn geq(a: &Fe, b: &Fe) -> bool {
    for i in (0..4).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

impl Field {
    /// `None` if `p` is even or does not fit in 256 bits.
    pub fn new(p: &BigUint) -> Option<Self> {
        if p.bits() > 256 || !p.bit(0) {
            return None;
        }
        let limbs = to_limbs(p);
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(limbs[0].wrapping_mul(inv)));
        }
        let r = BigUint::one() << 256;
        let r2 = to_limbs(&((&r * &r) % p));
        let one = to_limbs(&(&r % p));
        let p_minus_2 = to_limbs(&(p - 2u32));
        Some(Field { p: limbs, n0: inv.wrapping_neg(), r2, p_minus_2, one })
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        let p = &self.p;
        let mut t = [0u64; 6];
        for &bi in b {
            let mut c = 0;
            for j in 0..4 {
                (t[j], c) = mac(t[j], a[j], bi, c);
            }
            let (t4, c4) = adc(t[4], c, 0);
            t[4] = t4;
            t[5] = c4;
            let m = t[0].wrapping_mul(self.n0);
            let (_, mut c) = mac(t[0], m, p[0], 0);
            for j in 1..4 {
                (t[j - 1], c) = mac(t[j], m, p[j], c);
            }
            let (t3, c3) = adc(t[4], c, 0);
            t[3] = t3;
            t[4] = t[5] + c3;
        }
        let r = [t[0], t[1], t[2], t[3]];
        if t[4] != 0 || geq(&r, p) {
            self.sub_raw(&r)
        } else {
            r
        }
    }

    fn sub_raw(&self, a: &Fe) -> Fe {
        let mut out = [0u64; 4];
        let mut b = 0;
        for i in 0..4 {
            (out[i], b) = sbb(a[i], self.p[i], b);
        }
        out
    }

    pub fn square(&self, a: &Fe) -> Fe {
        self.mul(a, a)
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        let mut out = [0u64; 4];
        let mut c = 0;
        for i in 0..4 {
            (out[i], c) = adc(a[i], b[i], c);
        }
        if c != 0 || geq(&out, &self.p) {
            self.sub_raw(&out)
        } else {
            out
        }
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        let mut out = [0u64; 4];
        let mut borrow = 0;
        for i in 0..4 {
            (out[i], borrow) = sbb(a[i], b[i], borrow);
        }
        if borrow != 0 {
            let mut c = 0;
            for i in 0..4 {
                (out[i], c) = adc(out[i], self.p[i], c);
            }
        }
        out
    }

    pub fn is_zero(a: &Fe) -> bool {
        a.iter().all(|&l| l == 0)
    }

    pub fn to_mont(&self, v: &BigUint) -> Fe {
        self.mul(&to_limbs(v), &self.r2)
    }

    pub fn from_mont(&self, v: &Fe) -> BigUint {
        from_limbs(&self.mul(v, &[1, 0, 0, 0]))
    }

    #[cfg(test)]
    fn modulus(&self) -> BigUint {
        from_limbs(&self.p)
    }

    /// Multiplicative inverse by Fermat; zero maps to zero.
    pub fn invert(&self, a: &Fe) -> Fe {
        let mut acc = self.one;
        for i in (0..256).rev() {
            acc = self.square(&acc);
            if (self.p_minus_2[i / 64] >> (i % 64)) & 1 == 1 {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn p256() -> BigUint {
        BigUint::parse_bytes(b"ffffffff00000001000000000000000000000000ffffffffffffffffffffffff", 16).unwrap()
    }

    fn big(bytes: &[u8], p: &BigUint) -> BigUint {
        BigUint::from_bytes_be(bytes) % p
    }

    #[test]
    fn rejects_even_and_oversized_moduli() {
        assert!(Field::new(&BigUint::from(16u32)).is_none());
        assert!(Field::new(&((BigUint::one() << 257) + 1u32)).is_none());
        assert_eq!(Field::new(&p256()).unwrap().modulus(), p256());
    }

    #[test]
    fn small_field_agrees_with_plain_arithmetic() {
        let p = BigUint::from(17u32);
        let f = Field::new(&p).unwrap();
        for a in 0..17u32 {
            for b in 0..17u32 {
                let (ma, mb) = (f.to_mont(&a.into()), f.to_mont(&b.into()));
                assert_eq!(f.from_mont(&f.mul(&ma, &mb)), BigUint::from(a * b % 17));
                assert_eq!(f.from_mont(&f.add(&ma, &mb)), BigUint::from((a + b) % 17));
                assert_eq!(f.from_mont(&f.sub(&ma, &mb)), BigUint::from((a + 17 - b) % 17));
            }
            if a != 0 {
                let inv = f.from_mont(&f.invert(&f.to_mont(&a.into())));
                assert_eq!(inv * a % 17u32, BigUint::one());
            }
        }
    }

    proptest! {
        #[test]
        fn p256_ops_match_biguint(a in proptest::collection::vec(any::<u8>(), 32), b in proptest::collection::vec(any::<u8>(), 32)) {
            let p = p256();
            let f = Field::new(&p).unwrap();
            let (x, y) = (big(&a, &p), big(&b, &p));
            let (mx, my) = (f.to_mont(&x), f.to_mont(&y));
            prop_assert_eq!(f.from_mont(&mx), x.clone());
            prop_assert_eq!(f.from_mont(&f.mul(&mx, &my)), (&x * &y) % &p);
            prop_assert_eq!(f.from_mont(&f.add(&mx, &my)), (&x + &y) % &p);
            prop_assert_eq!(f.from_mont(&f.sub(&mx, &my)), (&x + &p - &y) % &p);
            if !x.is_zero() {
                prop_assert_eq!((f.from_mont(&f.invert(&mx)) * &x) % &p, BigUint::one());
            }
        }
    }
}
