//! Discrete-event core: a time-ordered queue with a sequence tiebreaker
//! and a running digest of everything executed.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::BinaryHeap;
use std::hash::{Hash, Hasher};

use super::NetsimError;

struct Entry<E> {
    time: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

pub struct Engine<E> {
    now: f64,
    seq: u64,
    executed: u64,
    heap: BinaryHeap<Entry<E>>,
    trace: DefaultHasher,
}

impl<E: Hash> Default for Engine<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E: Hash> Engine<E> {
    pub fn new() -> Self {
        Engine {
            now: 0.0,
            seq: 0,
            executed: 0,
            heap: BinaryHeap::new(),
            trace: DefaultHasher::new(),
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn executed(&self) -> u64 {
        self.executed
    }

    /// Queues `event` at absolute `time`, which may not precede `now`.
    pub fn schedule(&mut self, time: f64, event: E) -> Result<(), NetsimError> {
        if !(time >= self.now) || !time.is_finite() {
            return Err(NetsimError::SchedulePastEvent { now: self.now, time });
        }
        self.heap.push(Entry { time, seq: self.seq, event });
        self.seq += 1;
        Ok(())
    }

    /// Queues `event` `delay` seconds from now.
    ///
    /// # Panics
    /// If `delay` is negative or not finite; callers compute delays from
    /// non-negative model quantities.
    pub fn schedule_in(&mut self, delay: f64, event: E) {
        let t = self.now + delay;
        self.schedule(t, event).expect("negative delay");
    }

    /// Removes and returns the next event due no later than `t_end`,
    /// advancing the clock to it.
    pub fn pop_until(&mut self, t_end: f64) -> Option<(f64, E)> {
        if self.heap.peek()?.time > t_end {
            return None;
        }
        let Entry { time, seq, event } = self.heap.pop()?;
        self.now = time;
        self.executed += 1;
        time.to_bits().hash(&mut self.trace);
        seq.hash(&mut self.trace);
        event.hash(&mut self.trace);
        Some((time, event))
    }

    /// Executes every event with `time <= t_end` in (time, sequence)
    /// order; the handler may schedule more. The clock ends at `t_end`.
    pub fn run_until<F>(&mut self, t_end: f64, mut handler: F)
    where
        F: FnMut(&mut Self, f64, E),
    {
        while let Some((t, e)) = self.pop_until(t_end) {
            handler(self, t, e);
        }
        if t_end > self.now {
            self.now = t_end;
        }
    }

    /// Digest of the executed (time, sequence, event) stream.
    pub fn trace_digest(&self) -> u64 {
        self.trace.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn executes_in_time_order() {
        let mut e = Engine::new();
        e.schedule(1.0, 'A').unwrap();
        e.schedule(0.5, 'B').unwrap();
        let mut seen = Vec::new();
        e.run_until(10.0, |_, _, ev| seen.push(ev));
        assert_eq!(seen, ['B', 'A']);
        assert_eq!(e.now(), 10.0);
    }

    #[test]
    fn ties_keep_insertion_order() {
        let mut e = Engine::new();
        for c in ['x', 'y', 'z', 'w'] {
            e.schedule(2.0, c).unwrap();
        }
        let mut seen = Vec::new();
        e.run_until(2.0, |_, _, ev| seen.push(ev));
        assert_eq!(seen, ['x', 'y', 'z', 'w']);
    }

    #[test]
    fn refuses_the_past() {
        let mut e = Engine::new();
        e.schedule(3.0, 0u8).unwrap();
        e.run_until(3.0, |_, _, _| {});
        assert!(matches!(e.schedule(2.9, 1), Err(NetsimError::SchedulePastEvent { .. })));
        assert!(e.schedule(f64::NAN, 1).is_err());
        assert!(e.schedule(3.0, 1).is_ok());
    }

    #[test]
    fn stops_at_horizon() {
        let mut e = Engine::new();
        e.schedule(1.0, 1u32).unwrap();
        e.schedule(5.0, 2).unwrap();
        let mut n = 0;
        e.run_until(2.0, |_, _, _| n += 1);
        assert_eq!((n, e.pending()), (1, 1));
    }

    #[test]
    fn handlers_can_chain_events() {
        let mut e = Engine::new();
        e.schedule(0.0, 0u32).unwrap();
        let mut times = Vec::new();
        e.run_until(1.0, |eng, t, k| {
            times.push(t);
            if k < 4 {
                eng.schedule_in(0.25, k + 1);
            }
        });
        assert_eq!(times, [0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn identical_runs_share_a_digest() {
        let run = |extra: bool| {
            let mut e = Engine::new();
            for i in 0..100u64 {
                e.schedule((i % 7) as f64, i).unwrap();
            }
            if extra {
                e.schedule(3.0, 1000).unwrap();
            }
            e.run_until(100.0, |_, _, _| {});
            e.trace_digest()
        };
        assert_eq!(run(false), run(false));
        assert_ne!(run(false), run(true));
    }
}
