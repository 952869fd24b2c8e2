//! Application traffic classes and the small amount of arithmetic the
//! generators share.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use sha2::{Digest, Sha256};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::topology::Dscp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketKind {
    Auth,
    Ftp,
    Http,
    Mm,
    Billing,
}

impl PacketKind {
    pub const ALL: [PacketKind; 5] = [PacketKind::Auth, PacketKind::Ftp, PacketKind::Http, PacketKind::Mm, PacketKind::Billing];

    /// Multimedia is the real-time class; everything else is best effort.
    pub fn dscp(self) -> Dscp {
        match self {
            PacketKind::Mm => Dscp::Ef,
            _ => Dscp::Be,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PacketKind::Auth => "auth",
            PacketKind::Ftp => "ftp",
            PacketKind::Http => "http",
            PacketKind::Mm => "mm",
            PacketKind::Billing => "billing",
        }
    }
}

/// Splits an application payload into IP packets of at most `mtu` bytes,
/// each carrying `header` bytes of overhead. Returns packet sizes.
pub fn packetize(payload: u64, mtu: u32, header: u32) -> Vec<u32> {
    let room = (mtu - header) as u64;
    let payload = payload.max(1);
    let full = payload / room;
    let rest = payload % room;
    let mut out = vec![mtu; full as usize];
    if rest > 0 {
        out.push(rest as u32 + header);
    }
    out
}

/// Exponential draw with the given mean.
pub fn exp_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    Exp::new(1.0 / mean).expect("positive mean").sample(rng)
}

/// Independent random stream for one purpose within a run; the same
/// `(seed, label, index)` always yields the same stream.
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packetize_sizes() {
        assert_eq!(packetize(2920, 1500, 40), vec![1500, 1500]);
        assert_eq!(packetize(3000, 1500, 40), vec![1500, 1500, 120]);
        assert_eq!(packetize(10, 1500, 40), vec![50]);
        assert_eq!(packetize(0, 1500, 40), vec![41]);
        let sizes = packetize(123_457, 1500, 40);
        assert_eq!(sizes.iter().map(|&s| (s - 40) as u64).sum::<u64>(), 123_457);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(1, "ftp", 3).gen();
        assert_eq!(a, stream(1, "ftp", 3).gen::<u64>());
        assert_ne!(a, stream(1, "ftp", 4).gen::<u64>());
        assert_ne!(a, stream(1, "http", 3).gen::<u64>());
        assert_ne!(a, stream(2, "ftp", 3).gen::<u64>());
    }

    #[test]
    fn exponential_mean() {
        let mut r = stream(9, "x", 0);
        let m = (0..50_000).map(|_| exp_draw(&mut r, 30.0)).sum::<f64>() / 50_000.0;
        assert!((m - 30.0).abs() < 0.6, "{m}");
    }

    #[test]
    fn only_multimedia_is_expedited() {
        for k in PacketKind::ALL {
            assert_eq!(k.dscp() == Dscp::Ef, k == PacketKind::Mm);
        }
    }
}
