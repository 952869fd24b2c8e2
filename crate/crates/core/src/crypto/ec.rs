//! Short-Weierstrass curves `y^2 = x^3 + ax + b` over a prime field.
//!
//! Affine coordinates are the public representation; scalar multiplication
//! runs in Jacobian coordinates and converts back with a single inversion.

use std::fmt;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::RngCore;

use super::field::{Fe, Field};
use super::CryptoError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum EcPoint {
    Infinity,
    Affine { x: BigUint, y: BigUint },
}

impl EcPoint {
    pub fn affine(x: impl Into<BigUint>, y: impl Into<BigUint>) -> Self {
        EcPoint::Affine {
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, EcPoint::Infinity)
    }

    pub fn x(&self) -> Option<&BigUint> {
        match self {
            EcPoint::Infinity => None,
            EcPoint::Affine { x, .. } => Some(x),
        }
    }
}

impl fmt::Debug for EcPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EcPoint::Infinity => write!(f, "Infinity"),
            EcPoint::Affine { x, y } => write!(f, "({x:#x}, {y:#x})"),
        }
    }
}

/// Secret scalar in `[1, n-1]` for the curve it was created against.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar(BigUint);

impl Scalar {
    pub fn new(value: BigUint, curve: &CurveParams) -> Result<Self, CryptoError> {
        if value.is_zero() || value >= curve.n {
            return Err(CryptoError::ScalarOutOfRange);
        }
        Ok(Scalar(value))
    }

    pub fn from_u64(value: u64, curve: &CurveParams) -> Result<Self, CryptoError> {
        Self::new(BigUint::from(value), curve)
    }

    pub fn random<R: RngCore + ?Sized>(curve: &CurveParams, rng: &mut R) -> Self {
        Scalar(rng.gen_biguint_range(&BigUint::one(), &curve.n))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Scalar(..)")
    }
}

/// ECDH output: the x-coordinate of the shared point, big-endian, padded to
/// the field width.
#[derive(Clone, PartialEq, Eq)]
pub struct SharedSecret(Vec<u8>);

impl SharedSecret {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for SharedSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SharedSecret({} bytes)", self.0.len())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct CurveParams {
    p: BigUint,
    a: BigUint,
    b: BigUint,
    g: EcPoint,
    n: BigUint,
    h: BigUint,
    field_len: usize,
    fp: Field,
    a_m: Fe,
}

impl fmt::Debug for CurveParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveParams")
            .field("p", &format_args!("{:#x}", self.p))
            .field("n", &format_args!("{:#x}", self.n))
            .field("h", &self.h)
            .finish_non_exhaustive()
    }
}

impl CurveParams {
    /// Validates non-singularity, that G lies on the curve, and that `n·G`
    /// is the point at infinity. Primality of `p` and `n` is assumed.
    pub fn new(
        p: BigUint,
        a: BigUint,
        b: BigUint,
        gx: BigUint,
        gy: BigUint,
        n: BigUint,
        h: BigUint,
    ) -> Result<Self, CryptoError> {
        if p < BigUint::from(5u32) || !p.bit(0) {
            return Err(CryptoError::InvalidCurve("p must be an odd prime > 3"));
        }
        if a >= p || b >= p || gx >= p || gy >= p {
            return Err(CryptoError::InvalidCurve("coefficients must be reduced mod p"));
        }
        if n <= BigUint::one() {
            return Err(CryptoError::InvalidCurve("n must exceed 1"));
        }
        if h.is_zero() {
            return Err(CryptoError::InvalidCurve("cofactor must be positive"));
        }
        let field_len = p.bits().div_ceil(8) as usize;
        let fp = Field::new(&p).ok_or(CryptoError::InvalidCurve("p must be below 2^256"))?;
        let a_m = fp.to_mont(&a);
        let curve = CurveParams {
            p,
            a,
            b,
            g: EcPoint::affine(gx, gy),
            n,
            h,
            field_len,
            fp,
            a_m,
        };
        let four_a3 = BigUint::from(4u32) * curve.a.modpow(&BigUint::from(3u32), &curve.p);
        let twenty_seven_b2 = BigUint::from(27u32) * curve.b.modpow(&BigUint::from(2u32), &curve.p);
        if ((four_a3 + twenty_seven_b2) % &curve.p).is_zero() {
            return Err(CryptoError::InvalidCurve("singular curve"));
        }
        if !curve.is_on_curve(&curve.g) {
            return Err(CryptoError::InvalidCurve("generator not on curve"));
        }
        if !curve.mul_unchecked(&curve.n, &curve.g).is_infinity() {
            return Err(CryptoError::InvalidCurve("n·G is not the identity"));
        }
        Ok(curve)
    }

    /// `y^2 = x^3 + 2x + 2` over F_17 with G = (5, 1) of order 19.
    pub fn toy() -> Self {
        let u = |v: u32| BigUint::from(v);
        CurveParams::new(u(17), u(2), u(2), u(5), u(1), u(19), u(1))
            .expect("toy curve parameters are valid")
    }

    /// NIST P-256 (secp256r1).
    pub fn p256() -> Self {
        let hex = |s: &str| BigUint::parse_bytes(s.as_bytes(), 16).expect("valid hex constant");
        CurveParams::new(
            hex("ffffffff00000001000000000000000000000000ffffffffffffffffffffffff"),
            hex("ffffffff00000001000000000000000000000000fffffffffffffffffffffffc"),
            hex("5ac635d8aa3a93e7b3ebbd55769886bc651d06b0cc53b0f63bce3c3e27d2604b"),
            hex("6b17d1f2e12c4247f8bce6e563a440f277037d812deb33a0f4a13945d898c296"),
            hex("4fe342e2fe1a7f9b8ee7eb4a7c0f9e162bce33576b315ececbb6406837bf51f5"),
            hex("ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551"),
            BigUint::one(),
        )
        .expect("P-256 parameters are valid")
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }
    pub fn a(&self) -> &BigUint {
        &self.a
    }
    pub fn b(&self) -> &BigUint {
        &self.b
    }
    pub fn generator(&self) -> &EcPoint {
        &self.g
    }
    pub fn order(&self) -> &BigUint {
        &self.n
    }
    pub fn cofactor(&self) -> &BigUint {
        &self.h
    }
    /// Width in bytes of one encoded field element.
    pub fn field_len(&self) -> usize {
        self.field_len
    }

    pub fn is_on_curve(&self, pt: &EcPoint) -> bool {
        match pt {
            EcPoint::Infinity => true,
            EcPoint::Affine { x, y } => {
                if x >= &self.p || y >= &self.p {
                    return false;
                }
                let lhs = (y * y) % &self.p;
                let rhs = (x * x * x + &self.a * x + &self.b) % &self.p;
                lhs == rhs
            }
        }
    }

    pub fn negate(&self, pt: &EcPoint) -> EcPoint {
        match pt {
            EcPoint::Infinity => EcPoint::Infinity,
            EcPoint::Affine { x, y } => EcPoint::Affine {
                x: x.clone(),
                y: if y.is_zero() { BigUint::zero() } else { &self.p - y },
            },
        }
    }

    /// Uncompressed SEC1 encoding `04 || X || Y`; infinity encodes as `00`.
    pub fn encode_point(&self, pt: &EcPoint) -> Vec<u8> {
        match pt {
            EcPoint::Infinity => vec![0x00],
            EcPoint::Affine { x, y } => {
                let mut out = Vec::with_capacity(1 + 2 * self.field_len);
                out.push(0x04);
                out.extend_from_slice(&self.fixed_width(x));
                out.extend_from_slice(&self.fixed_width(y));
                out
            }
        }
    }

    /// Decodes an uncompressed point. Well-formed encodings whose
    /// coordinates fail the curve equation yield `PointNotOnCurve`.
    pub fn decode_point(&self, bytes: &[u8]) -> Result<EcPoint, CryptoError> {
        if bytes == [0x00] {
            return Ok(EcPoint::Infinity);
        }
        if bytes.len() != 1 + 2 * self.field_len || bytes[0] != 0x04 {
            return Err(CryptoError::BadPointEncoding);
        }
        let (xb, yb) = bytes[1..].split_at(self.field_len);
        let pt = EcPoint::affine(BigUint::from_bytes_be(xb), BigUint::from_bytes_be(yb));
        if !self.is_on_curve(&pt) {
            return Err(CryptoError::PointNotOnCurve);
        }
        Ok(pt)
    }

    pub(crate) fn fixed_width(&self, v: &BigUint) -> Vec<u8> {
        let raw = v.to_bytes_be();
        let mut out = vec![0u8; self.field_len.saturating_sub(raw.len())];
        out.extend_from_slice(&raw);
        out
    }

    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - (b - a)
        }
    }

    fn inv(&self, v: &BigUint) -> BigUint {
        // p is prime: v^(p-2) = v^-1
        v.modpow(&(&self.p - 2u32), &self.p)
    }

    fn add_affine(&self, lhs: &EcPoint, rhs: &EcPoint) -> EcPoint {
        let (x1, y1, x2, y2) = match (lhs, rhs) {
            (EcPoint::Infinity, q) => return q.clone(),
            (p, EcPoint::Infinity) => return p.clone(),
            (EcPoint::Affine { x: x1, y: y1 }, EcPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let p = &self.p;
        let lambda = if x1 == x2 {
            if ((y1 + y2) % p).is_zero() {
                return EcPoint::Infinity;
            }
            let num = (BigUint::from(3u32) * x1 * x1 + &self.a) % p;
            let den = (BigUint::from(2u32) * y1) % p;
            (num * self.inv(&den)) % p
        } else {
            let num = self.sub(y2, y1);
            let den = self.sub(x2, x1);
            (num * self.inv(&den)) % p
        };
        let x3 = self.sub(&self.sub(&((&lambda * &lambda) % p), x1), x2);
        let y3 = self.sub(&((&lambda * self.sub(x1, &x3)) % p), y1);
        EcPoint::Affine { x: x3, y: y3 }
    }

    fn to_jacobian(&self, pt: &EcPoint) -> Jacobian {
        match pt {
            EcPoint::Infinity => Jacobian::infinity(&self.fp),
            EcPoint::Affine { x, y } => Jacobian { x: self.fp.to_mont(x), y: self.fp.to_mont(y), z: self.fp.one },
        }
    }

    fn from_jacobian(&self, pt: &Jacobian) -> EcPoint {
        if Field::is_zero(&pt.z) {
            return EcPoint::Infinity;
        }
        let f = &self.fp;
        let zinv = f.invert(&pt.z);
        let zinv2 = f.square(&zinv);
        let x = f.mul(&pt.x, &zinv2);
        let y = f.mul(&pt.y, &f.mul(&zinv2, &zinv));
        EcPoint::Affine { x: f.from_mont(&x), y: f.from_mont(&y) }
    }

    fn jdouble(&self, pt: &Jacobian) -> Jacobian {
        let f = &self.fp;
        if Field::is_zero(&pt.z) || Field::is_zero(&pt.y) {
            return Jacobian::infinity(f);
        }
        let xx = f.square(&pt.x);
        let yy = f.square(&pt.y);
        let yyyy = f.square(&yy);
        let zz = f.square(&pt.z);
        let xyy = f.mul(&pt.x, &yy);
        let s = f.add(&f.add(&xyy, &xyy), &f.add(&xyy, &xyy));
        let m = f.add(&f.add(&xx, &xx), &f.add(&xx, &f.mul(&self.a_m, &f.square(&zz))));
        let x3 = f.sub(&f.square(&m), &f.add(&s, &s));
        let y8 = f.add(&yyyy, &yyyy);
        let y8 = f.add(&y8, &y8);
        let y8 = f.add(&y8, &y8);
        let y3 = f.sub(&f.mul(&m, &f.sub(&s, &x3)), &y8);
        let yz = f.mul(&pt.y, &pt.z);
        Jacobian { x: x3, y: y3, z: f.add(&yz, &yz) }
    }

    fn jadd(&self, lhs: &Jacobian, rhs: &Jacobian) -> Jacobian {
        let f = &self.fp;
        if Field::is_zero(&lhs.z) {
            return rhs.clone();
        }
        if Field::is_zero(&rhs.z) {
            return lhs.clone();
        }
        let z1z1 = f.square(&lhs.z);
        let z2z2 = f.square(&rhs.z);
        let u1 = f.mul(&lhs.x, &z2z2);
        let u2 = f.mul(&rhs.x, &z1z1);
        let s1 = f.mul(&lhs.y, &f.mul(&rhs.z, &z2z2));
        let s2 = f.mul(&rhs.y, &f.mul(&lhs.z, &z1z1));
        if u1 == u2 {
            return if s1 == s2 { self.jdouble(lhs) } else { Jacobian::infinity(f) };
        }
        let h = f.sub(&u2, &u1);
        let r = f.sub(&s2, &s1);
        let hh = f.square(&h);
        let hhh = f.mul(&h, &hh);
        let v = f.mul(&u1, &hh);
        let x3 = f.sub(&f.sub(&f.square(&r), &hhh), &f.add(&v, &v));
        let y3 = f.sub(&f.mul(&r, &f.sub(&v, &x3)), &f.mul(&s1, &hhh));
        let z3 = f.mul(&f.mul(&lhs.z, &rhs.z), &h);
        Jacobian { x: x3, y: y3, z: z3 }
    }

    /// Fixed 4-bit window, most significant nibble first, over an arbitrary
    /// non-negative scalar.
    pub(crate) fn mul_unchecked(&self, k: &BigUint, pt: &EcPoint) -> EcPoint {
        if k.is_zero() || pt.is_infinity() {
            return EcPoint::Infinity;
        }
        let base = self.to_jacobian(pt);
        let mut table = vec![Jacobian::infinity(&self.fp), base.clone()];
        for i in 2..16 {
            table.push(self.jadd(&table[i - 1], &base));
        }
        let mut acc = Jacobian::infinity(&self.fp);
        let nibbles = k.bits().div_ceil(4);
        for w in (0..nibbles).rev() {
            for _ in 0..4 {
                acc = self.jdouble(&acc);
            }
            let d = (0..4).fold(0usize, |d, b| d | ((k.bit(w * 4 + b) as usize) << b));
            if d != 0 {
                acc = self.jadd(&acc, &table[d]);
            }
        }
        self.from_jacobian(&acc)
    }
}

/// Projective point with Montgomery-form coordinates; `z = 0` is infinity.
#[derive(Clone)]
struct Jacobian {
    x: Fe,
    y: Fe,
    z: Fe,
}

impl Jacobian {
    fn infinity(f: &Field) -> Self {
        Jacobian { x: f.one, y: f.one, z: [0; 4] }
    }
}

/// Group addition. Total on points of `curve`.
pub fn point_add(lhs: &EcPoint, rhs: &EcPoint, curve: &CurveParams) -> EcPoint {
    curve.add_affine(lhs, rhs)
}

/// `k·P` by double-and-add. Not constant time.
pub fn scalar_mul(k: &Scalar, pt: &EcPoint, curve: &CurveParams) -> Result<EcPoint, CryptoError> {
    if k.0.is_zero() || k.0 >= curve.n {
        return Err(CryptoError::ScalarOutOfRange);
    }
    Ok(curve.mul_unchecked(&k.0, pt))
}

/// x-coordinate of `secret·peer_pub`, fixed-width big-endian.
pub fn ecdh_shared(
    secret: &Scalar,
    peer_pub: &EcPoint,
    curve: &CurveParams,
) -> Result<SharedSecret, CryptoError> {
    if peer_pub.is_infinity() || !curve.is_on_curve(peer_pub) {
        return Err(CryptoError::PointNotOnCurve);
    }
    match scalar_mul(secret, peer_pub, curve)? {
        EcPoint::Infinity => Err(CryptoError::InfinityResult),
        EcPoint::Affine { x, .. } => Ok(SharedSecret(curve.fixed_width(&x))),
    }
}

#[derive(Clone, Debug)]
pub struct EcKeyPair {
    pub secret: Scalar,
    pub public: EcPoint,
}

impl EcKeyPair {
    pub fn generate<R: RngCore + ?Sized>(curve: &CurveParams, rng: &mut R) -> Self {
        let secret = Scalar::random(curve, rng);
        let public = curve.mul_unchecked(&secret.0, curve.generator());
        EcKeyPair { secret, public }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Every affine point of the toy curve by exhaustive search.
    fn toy_points() -> Vec<(u32, u32)> {
        let mut pts = Vec::new();
        for x in 0..17u32 {
            for y in 0..17u32 {
                if (y * y) % 17 == (x * x * x + 2 * x + 2) % 17 {
                    pts.push((x, y));
                }
            }
        }
        pts
    }

    /// Chord-tangent rule on small integers, independent of the BigUint path.
    fn oracle_add(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
        const P: i64 = 17;
        let m = |v: i64| v.rem_euclid(P);
        let inv = |v: i64| (1..P).find(|c| m(v * c) == 1).unwrap();
        let ((x1, y1), (x2, y2)) = match (a, b) {
            (None, q) => return q,
            (p, None) => return p,
            (Some(p), Some(q)) => (p, q),
        };
        let l = if x1 == x2 {
            if m(y1 + y2) == 0 {
                return None;
            }
            m((3 * x1 * x1 + 2) * inv(m(2 * y1)))
        } else {
            m((y2 - y1) * inv(m(x2 - x1)))
        };
        let x3 = m(l * l - x1 - x2);
        Some((x3, m(l * (x1 - x3) - y1)))
    }

    fn to_pt(p: Option<(i64, i64)>) -> EcPoint {
        match p {
            None => EcPoint::Infinity,
            Some((x, y)) => EcPoint::affine(x as u64, y as u64),
        }
    }

    #[test]
    fn toy_curve_has_nineteen_points() {
        assert_eq!(toy_points().len() + 1, 19);
    }

    #[test]
    fn addition_table_matches_oracle() {
        let c = CurveParams::toy();
        let mut all: Vec<Option<(i64, i64)>> = vec![None];
        all.extend(toy_points().into_iter().map(|(x, y)| Some((x as i64, y as i64))));
        for a in &all {
            for b in &all {
                assert_eq!(point_add(&to_pt(*a), &to_pt(*b), &c), to_pt(oracle_add(*a, *b)));
            }
        }
    }

    #[test]
    fn doubling_generator_on_toy_curve() {
        let c = CurveParams::toy();
        // frozen from oracle_add((5,1),(5,1))
        assert_eq!(oracle_add(Some((5, 1)), Some((5, 1))), Some((6, 3)));
        assert_eq!(point_add(c.generator(), c.generator(), &c), EcPoint::affine(6u32, 3u32));
    }

    #[test]
    fn identity_and_inverse() {
        let c = CurveParams::toy();
        let g = c.generator().clone();
        assert_eq!(point_add(&g, &EcPoint::Infinity, &c), g);
        assert_eq!(point_add(&EcPoint::affine(5u32, 1u32), &EcPoint::affine(5u32, 16u32), &c), EcPoint::Infinity);
    }

    #[test]
    fn scalar_mul_matches_repeated_addition_on_toy_curve() {
        let c = CurveParams::toy();
        let mut acc = EcPoint::Infinity;
        for k in 1..19u64 {
            acc = point_add(&acc, c.generator(), &c);
            let got = scalar_mul(&Scalar::from_u64(k, &c).unwrap(), c.generator(), &c).unwrap();
            assert_eq!(got, acc, "k = {k}");
        }
    }

    #[test]
    fn scalar_range_is_enforced() {
        let c = CurveParams::toy();
        assert_eq!(Scalar::from_u64(0, &c), Err(CryptoError::ScalarOutOfRange));
        assert_eq!(Scalar::from_u64(19, &c), Err(CryptoError::ScalarOutOfRange));
        let minus_one = Scalar::from_u64(18, &c).unwrap();
        assert_eq!(scalar_mul(&minus_one, c.generator(), &c).unwrap(), c.negate(c.generator()));
        let one = Scalar::from_u64(1, &c).unwrap();
        assert_eq!(scalar_mul(&one, c.generator(), &c).unwrap(), *c.generator());
    }

    #[test]
    fn toy_ecdh_three_and_seven() {
        let c = CurveParams::toy();
        let a = Scalar::from_u64(3, &c).unwrap();
        let b = Scalar::from_u64(7, &c).unwrap();
        let bp = scalar_mul(&b, c.generator(), &c).unwrap();
        // 21 mod 19 = 2, so the shared point is 2G = (6, 3)
        let s = ecdh_shared(&a, &bp, &c).unwrap();
        assert_eq!(s.as_bytes(), &[6]);
    }

    #[test]
    fn ecdh_rejects_off_curve_point() {
        let c = CurveParams::toy();
        // 0^2 = 0 but 0^3 + 0 + 2 = 2 (mod 17)
        let a = Scalar::from_u64(3, &c).unwrap();
        assert_eq!(
            ecdh_shared(&a, &EcPoint::affine(0u32, 0u32), &c),
            Err(CryptoError::PointNotOnCurve)
        );
        assert_eq!(ecdh_shared(&a, &EcPoint::Infinity, &c), Err(CryptoError::PointNotOnCurve));
    }

    #[test]
    fn p256_generator_order_and_symmetry() {
        let c = CurveParams::p256();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = EcKeyPair::generate(&c, &mut rng);
            let b = EcKeyPair::generate(&c, &mut rng);
            assert!(c.is_on_curve(&a.public));
            assert_eq!(
                ecdh_shared(&a.secret, &b.public, &c).unwrap(),
                ecdh_shared(&b.secret, &a.public, &c).unwrap()
            );
        }
    }

    #[test]
    fn point_encoding_round_trip_and_validation() {
        let c = CurveParams::p256();
        let g = c.generator();
        let enc = c.encode_point(g);
        assert_eq!(enc.len(), 65);
        assert_eq!(c.decode_point(&enc).unwrap(), *g);
        let mut bad = enc.clone();
        bad[64] ^= 1;
        assert_eq!(c.decode_point(&bad), Err(CryptoError::PointNotOnCurve));
        assert_eq!(c.decode_point(&enc[..10]), Err(CryptoError::BadPointEncoding));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let u = |v: u32| BigUint::from(v);
        // 4*0 + 27*0 = 0: singular
        assert!(CurveParams::new(u(17), u(0), u(0), u(0), u(0), u(19), u(1)).is_err());
        // wrong order
        assert!(CurveParams::new(u(17), u(2), u(2), u(5), u(1), u(18), u(1)).is_err());
        // generator off curve
        assert!(CurveParams::new(u(17), u(2), u(2), u(5), u(2), u(19), u(1)).is_err());
    }

    /// The windowed Montgomery path against the affine BigUint addition:
    /// (a + b)·G = a·G + b·G, and 2·G by one affine doubling.
    #[test]
    fn windowed_multiplication_matches_affine_addition_on_p256() {
        let c = CurveParams::p256();
        let g = c.generator();
        let two = Scalar::from_u64(2, &c).unwrap();
        assert_eq!(scalar_mul(&two, g, &c).unwrap(), point_add(g, g, &c));
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for _ in 0..32 {
            let (a, b) = (Scalar::random(&c, &mut rng), Scalar::random(&c, &mut rng));
            let sum = (a.value() + b.value()) % c.order();
            if sum.is_zero() {
                continue;
            }
            let lhs = scalar_mul(&Scalar::new(sum, &c).unwrap(), g, &c).unwrap();
            let rhs = point_add(&scalar_mul(&a, g, &c).unwrap(), &scalar_mul(&b, g, &c).unwrap(), &c);
            assert_eq!(lhs, rhs);
            assert!(c.is_on_curve(&lhs));
        }
    }
}
