//! Transmission resources. A wired link has one FIFO per direction; a
//! WLAN cell is one shared half-duplex channel with DCF-style contention;
//! a UMTS cell has one shared uplink and one shared downlink.
//!
//! Service is store-and-forward and work-conserving, so a FIFO never needs
//! explicit packet storage: the channel tracks when it falls idle and which
//! accepted frames are still occupying the buffer.

use std::collections::VecDeque;

use rand::Rng;

use super::topology::Medium;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcfParams {
    pub slot_s: f64,
    pub cw_min: u32,
    pub cw_max: u32,
    pub frame_overhead_bytes: u32,
    pub phy_overhead_s: f64,
}

/// Busy-sense probabilities are capped here so backoff always ends.
const MAX_BUSY_PROB: f64 = 0.95;
/// Offered load is estimated over this trailing window.
const LOAD_WINDOW_S: f64 = 1.0;

/// Contention wait for one frame: a backoff drawn uniformly from
/// `[0, CW]` slots, redrawn with `CW` doubled (up to `CW_max`) each time the
/// channel is sensed busy, which happens with probability `busy_prob`.
pub fn contention_wait<R: Rng + ?Sized>(p: &DcfParams, busy_prob: f64, rng: &mut R) -> f64 {
    let busy_prob = busy_prob.clamp(0.0, MAX_BUSY_PROB);
    let mut cw = p.cw_min;
    let mut slots = 0u64;
    loop {
        slots += rng.gen_range(0..=cw) as u64;
        if busy_prob == 0.0 || !rng.gen_bool(busy_prob) {
            break;
        }
        cw = (cw.saturating_mul(2) + 1).min(p.cw_max);
    }
    slots as f64 * p.slot_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admission {
    /// Time the frame starts occupying the medium.
    pub start: f64,
    /// Wait for earlier frames to clear.
    pub queueing: f64,
    /// Backoff before transmission (WLAN only).
    pub contention: f64,
    /// Time the last bit leaves the sender.
    pub finish: f64,
}

impl Admission {
    pub fn media_access_delay(&self) -> f64 {
        self.queueing + self.contention
    }
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub medium: Medium,
    pub bandwidth_bps: f64,
    pub capacity_bytes: u64,
    pub dcf: Option<DcfParams>,
    busy_until: f64,
    /// (finish time, bytes) of frames still holding buffer space.
    held: VecDeque<(f64, u64)>,
    held_bytes: u64,
    /// (arrival time, bits) offered within the load window.
    recent: VecDeque<(f64, f64)>,
    recent_bits: f64,
    pub drops: u64,
    pub frames: u64,
}

impl Channel {
    pub fn new(medium: Medium, bandwidth_bps: f64, capacity_bytes: u64, dcf: Option<DcfParams>) -> Self {
        Channel {
            medium,
            bandwidth_bps,
            capacity_bytes,
            dcf,
            busy_until: 0.0,
            held: VecDeque::new(),
            held_bytes: 0,
            recent: VecDeque::new(),
            recent_bits: 0.0,
            drops: 0,
            frames: 0,
        }
    }

    fn release(&mut self, now: f64) {
        while let Some(&(finish, bytes)) = self.held.front() {
            if finish > now {
                break;
            }
            self.held.pop_front();
            self.held_bytes -= bytes;
        }
        while let Some(&(t, bits)) = self.recent.front() {
            if t > now - LOAD_WINDOW_S {
                break;
            }
            self.recent.pop_front();
            self.recent_bits -= bits;
        }
        if self.recent.is_empty() {
            self.recent_bits = 0.0;
        }
    }

    /// Offered load over the trailing window, as a fraction of capacity.
    pub fn offered_load(&mut self, now: f64) -> f64 {
        self.release(now);
        self.recent_bits / (LOAD_WINDOW_S * self.bandwidth_bps)
    }

    pub fn queued_bytes(&mut self, now: f64) -> u64 {
        self.release(now);
        self.held_bytes
    }

    /// Bits the medium actually carries for a payload of `bytes`.
    pub fn frame_bits(&self, bytes: u64) -> f64 {
        let overhead = self.dcf.map_or(0, |d| d.frame_overhead_bytes as u64);
        ((bytes + overhead) * 8) as f64
    }

    /// Transmission time of a frame once it owns the medium.
    pub fn airtime(&self, bytes: u64) -> f64 {
        self.frame_bits(bytes) / self.bandwidth_bps + self.dcf.map_or(0.0, |d| d.phy_overhead_s)
    }

    /// Offers a frame at `now`. `None` means the buffer overflowed and the
    /// frame was dropped.
    pub fn admit<R: Rng + ?Sized>(&mut self, now: f64, bytes: u64, rng: &mut R) -> Option<Admission> {
        let load = self.offered_load(now);
        self.recent.push_back((now, bytes as f64 * 8.0));
        self.recent_bits += bytes as f64 * 8.0;
        if self.held_bytes + bytes > self.capacity_bytes {
            self.drops += 1;
            return None;
        }
        let start = self.busy_until.max(now);
        let contention = match &self.dcf {
            Some(p) => contention_wait(p, load, rng),
            None => 0.0,
        };
        let finish = start + contention + self.airtime(bytes);
        self.busy_until = finish;
        self.held.push_back((finish, bytes));
        self.held_bytes += bytes;
        self.frames += 1;
        Some(Admission { start, queueing: start - now, contention, finish })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    const DCF: DcfParams = DcfParams {
        slot_s: 20e-6,
        cw_min: 31,
        cw_max: 1023,
        frame_overhead_bytes: 34,
        phy_overhead_s: 242e-6,
    };

    fn wlan() -> Channel {
        Channel::new(Medium::Wlan, 11e6, 1_000_000, Some(DCF))
    }

    #[test]
    fn lone_frame_in_an_empty_cell() {
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = wlan();
            let a = c.admit(5.0, 1500, &mut rng).unwrap();
            assert_eq!(a.queueing, 0.0);
            assert!(a.contention <= DCF.cw_min as f64 * DCF.slot_s + 1e-15);
        }
    }

    #[test]
    fn wired_fifo_serialises() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = Channel::new(Medium::Wired, 8e6, 10_000, None);
        let a = c.admit(0.0, 1000, &mut rng).unwrap();
        assert_eq!((a.queueing, a.contention, a.finish), (0.0, 0.0, 1e-3));
        let b = c.admit(0.0005, 1000, &mut rng).unwrap();
        assert!((b.queueing - 0.0005).abs() < 1e-15);
        assert!((b.finish - 2e-3).abs() < 1e-15);
    }

    #[test]
    fn overflow_drops_the_arrival() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = Channel::new(Medium::Wired, 8e3, 2500, None);
        assert!(c.admit(0.0, 1000, &mut rng).is_some());
        assert!(c.admit(0.0, 1000, &mut rng).is_some());
        assert!(c.admit(0.0, 1000, &mut rng).is_none());
        assert_eq!(c.drops, 1);
        // the first frame has left by t = 1 s
        assert!(c.admit(1.0, 1000, &mut rng).is_some());
    }

    #[test]
    fn backoff_grows_with_busy_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mean = |p: f64, rng: &mut ChaCha8Rng| (0..20_000).map(|_| contention_wait(&DCF, p, rng)).sum::<f64>() / 20_000.0;
        let (a, b, c) = (mean(0.0, &mut rng), mean(0.3, &mut rng), mean(0.8, &mut rng));
        assert!((a / DCF.slot_s - 15.5).abs() < 0.5, "{a}");
        assert!(a < b && b < c);
    }

    /// Poisson frame arrivals at three offered loads; the mean media
    /// access delay over 20 seeds must not fall as load rises.
    #[test]
    fn delay_does_not_fall_with_load() {
        let mean_delay = |rate: f64| {
            let mut total = 0.0;
            let mut n = 0u64;
            for seed in 0..20 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let gap = Exp::new(rate).unwrap();
                let mut c = wlan();
                let mut t = 0.0;
                while t < 20.0 {
                    t += gap.sample(&mut rng);
                    if let Some(a) = c.admit(t, 1000, &mut rng) {
                        total += a.media_access_delay();
                        n += 1;
                    }
                }
            }
            total / n as f64
        };
        let loads = [50.0, 400.0, 900.0].map(mean_delay);
        assert!(loads[0] <= loads[1] && loads[1] <= loads[2], "{loads:?}");
    }

    #[test]
    fn idle_channel_never_queues() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut c = wlan();
        for i in 0..100 {
            let a = c.admit(i as f64, 500, &mut rng).unwrap();
            assert_eq!(a.queueing, 0.0);
        }
    }
}
