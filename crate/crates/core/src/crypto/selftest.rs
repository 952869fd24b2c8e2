//! Start-up self-checks for the curve arithmetic and symmetric primitives.
//!
//! The toy-curve checks compare against a small-integer chord-tangent
//! implementation that shares no code with the big-integer path.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ecdh_shared, mac, point_add, scalar_mul, sym_decrypt, sym_encrypt, verify_mac};
use super::{CurveParams, EcKeyPair, EcPoint, Scalar, AEAD_KEY_LEN, AEAD_NONCE_LEN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {:<28} {}\n", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail))
            .collect()
    }

    fn push(&mut self, name: &'static str, failures: usize, total: usize) {
        self.checks.push(Check { name, passed: failures == 0, detail: format!("{}/{} cases", total - failures, total) });
    }
}

type Small = Option<(i64, i64)>;

const TOY_P: i64 = 17;
const TOY_A: i64 = 2;
const TOY_B: i64 = 2;

fn small_add(a: Small, b: Small) -> Small {
    let m = |v: i64| v.rem_euclid(TOY_P);
    let inv = |v: i64| (1..TOY_P).find(|c| m(v * c) == 1).expect("field element is invertible");
    let ((x1, y1), (x2, y2)) = match (a, b) {
        (None, q) => return q,
        (p, None) => return p,
        (Some(p), Some(q)) => (p, q),
    };
    let l = if x1 == x2 {
        if m(y1 + y2) == 0 {
            return None;
        }
        m((3 * x1 * x1 + TOY_A) * inv(m(2 * y1)))
    } else {
        m((y2 - y1) * inv(m(x2 - x1)))
    };
    let x3 = m(l * l - x1 - x2);
    Some((x3, m(l * (x1 - x3) - y1)))
}

fn small_points() -> Vec<Small> {
    let mut pts = vec![None];
    for x in 0..TOY_P {
        for y in 0..TOY_P {
            if (y * y) % TOY_P == (x * x * x + TOY_A * x + TOY_B) % TOY_P {
                pts.push(Some((x, y)));
            }
        }
    }
    pts
}

fn lift(p: Small) -> EcPoint {
    match p {
        None => EcPoint::Infinity,
        Some((x, y)) => EcPoint::affine(x as u64, y as u64),
    }
}

/// Runs every check; `ecdh_pairs` random key pairs are exercised on P-256.
pub fn run_self_tests(ecdh_pairs: usize, seed: u64) -> SelfTestReport {
    let mut report = SelfTestReport::default();
    let toy = CurveParams::toy();
    let pts = small_points();

    let mut bad = 0;
    for &a in &pts {
        for &b in &pts {
            bad += (point_add(&lift(a), &lift(b), &toy) != lift(small_add(a, b))) as usize;
        }
    }
    report.push("toy addition table", bad, pts.len() * pts.len());

    let order = pts.len() as u64;
    let g = Some((5, 1));
    let (mut acc, mut bad) = (None, 0);
    for k in 1..order {
        acc = small_add(acc, g);
        let got = Scalar::from_u64(k, &toy).and_then(|s| scalar_mul(&s, toy.generator(), &toy));
        bad += (got.ok() != Some(lift(acc))) as usize;
    }
    bad += Scalar::from_u64(order, &toy).is_ok() as usize;
    report.push("toy scalar_mul vs oracle", bad, order as usize);

    let p256 = CurveParams::p256();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let cases = 16;
    for _ in 0..cases {
        let [p, q, r] = [(); 3].map(|_| EcKeyPair::generate(&p256, &mut rng).public);
        let pq = point_add(&p, &q, &p256);
        bad += (pq != point_add(&q, &p, &p256)) as usize;
        bad += (point_add(&pq, &r, &p256) != point_add(&p, &point_add(&q, &r, &p256), &p256)) as usize;
        bad += (point_add(&p, &EcPoint::Infinity, &p256) != p) as usize;
        bad += !point_add(&p, &p256.negate(&p), &p256).is_infinity() as usize;
        bad += !p256.is_on_curve(&pq) as usize;
    }
    let n_minus_1 = Scalar::new(p256.order() - BigUint::from(1u8), &p256).expect("n-1 in range");
    bad += (scalar_mul(&n_minus_1, p256.generator(), &p256).ok() != Some(p256.negate(p256.generator()))) as usize;
    bad += Scalar::new(p256.order().clone(), &p256).is_ok() as usize;
    report.push("p256 group laws", bad, cases * 5 + 2);

    let mut bad = 0;
    for _ in 0..ecdh_pairs {
        let a = EcKeyPair::generate(&p256, &mut rng);
        let b = EcKeyPair::generate(&p256, &mut rng);
        let ab = ecdh_shared(&a.secret, &b.public, &p256);
        let ba = ecdh_shared(&b.secret, &a.public, &p256);
        bad += !matches!((ab, ba), (Ok(x), Ok(y)) if x == y) as usize;
    }
    bad += ecdh_shared(&Scalar::from_u64(3, &toy).unwrap(), &EcPoint::affine(0u8, 0u8), &toy).is_ok() as usize;
    report.push("ecdh symmetry", bad, ecdh_pairs + 1);

    let key = [7u8; AEAD_KEY_LEN];
    let msg = b"self-test message for the symmetric layer";
    let tag = mac(&key, msg);
    let mut bad = !verify_mac(&key, msg, tag.as_ref()) as usize;
    let mut flipped = msg.to_vec();
    flipped[0] ^= 1;
    bad += verify_mac(&key, &flipped, tag.as_ref()) as usize;
    let nonce = [1u8; AEAD_NONCE_LEN];
    let ct = sym_encrypt(&key, &nonce, b"aad", msg);
    bad += (sym_decrypt(&key, &nonce, b"aad", &ct).ok().as_deref() != Some(&msg[..])) as usize;
    let mut tampered = ct.clone();
    tampered[3] ^= 0x80;
    bad += sym_decrypt(&key, &nonce, b"aad", &tampered).is_ok() as usize;
    report.push("mac and aead", bad, 4);

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pristine_build_passes() {
        let r = run_self_tests(50, 1);
        assert!(r.passed(), "{}", r.render());
        assert_eq!(r.checks.len(), 5);
    }

    #[test]
    fn oracle_knows_the_toy_group() {
        assert_eq!(small_points().len(), 19);
        assert_eq!(small_add(Some((5, 1)), Some((5, 1))), Some((6, 3)));
    }
}
