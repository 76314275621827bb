//! Lossy message passing between the coordinator and the vehicles.
//!
//! Each round, every endpoint either receives the fresh payload or, with
//! the channel's drop probability, keeps whatever it last received. Drop
//! decisions come from a counter-based stream keyed on (seed, round,
//! direction, endpoint), so they are independent of evaluation order and
//! identical on every replay. A fixed simulated delay accrues once per
//! round.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    /// Probability that one endpoint's message is lost in one round.
    pub drop_prob: f64,
    /// Simulated latency added per round of exchange, milliseconds.
    pub per_round_delay_ms: u64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(drop_prob: f64, seed: u64) -> Self {
        ChannelModel {
            drop_prob,
            per_round_delay_ms: 200,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Coordinator to vehicles.
    Down,
    /// Vehicles to coordinator.
    Up,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Whether `endpoint`'s message in `round` is lost.
pub fn dropped(channel: &ChannelModel, round: u64, direction: Direction, endpoint: u64) -> bool {
    if channel.drop_prob <= 0.0 {
        return false;
    }
    if channel.drop_prob >= 1.0 {
        return true;
    }
    let dir_tag = match direction {
        Direction::Down => 0x5au64,
        Direction::Up => 0xa5u64,
    };
    let mut h = splitmix(channel.seed ^ 0x6a09e667f3bcc908);
    h = splitmix(h ^ round);
    h = splitmix(h ^ (dir_tag << 56) ^ endpoint);
    // 53 uniform bits against the probability.
    let u = (h >> 11) as f64 / (1u64 << 53) as f64;
    u < channel.drop_prob
}

/// Last successfully received payload of one endpoint, stamped with the
/// round that delivered it. Round 0 stamps mark the initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct Mailbox<T> {
    value: T,
    stamp: u64,
    ever_delivered: bool,
}

impl<T> Mailbox<T> {
    pub fn new(initial: T) -> Self {
        Mailbox {
            value: initial,
            stamp: 0,
            ever_delivered: false,
        }
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn stamp(&self) -> u64 {
        self.stamp
    }

    /// Whether any round ever delivered into this mailbox.
    pub fn ever_delivered(&self) -> bool {
        self.ever_delivered
    }

    fn deliver(&mut self, value: T, round: u64) {
        debug_assert!(round >= self.stamp, "stamps never decrease");
        self.value = value;
        self.stamp = round;
        self.ever_delivered = true;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DeliveryStats {
    pub delivered: u64,
    pub stale: u64,
}

impl DeliveryStats {
    pub fn endpoint_rounds(&self) -> u64 {
        self.delivered + self.stale
    }
}

/// Fraction of endpoint-rounds that were served a stale value.
pub fn stale_fraction(stats: &DeliveryStats) -> f64 {
    let total = stats.endpoint_rounds();
    if total == 0 {
        0.0
    } else {
        stats.stale as f64 / total as f64
    }
}

/// Attempts to deliver `payloads[e]` into `mailboxes[e]` for every endpoint
/// `e`. Returns one flag per endpoint: true when the fresh value arrived,
/// false when the endpoint keeps its stale value.
pub fn deliver_round<T: Clone>(
    payloads: &[T],
    mailboxes: &mut [Mailbox<T>],
    channel: &ChannelModel,
    round: u64,
    direction: Direction,
    stats: &mut DeliveryStats,
) -> Vec<bool> {
    assert_eq!(payloads.len(), mailboxes.len());
    let mut fresh = Vec::with_capacity(payloads.len());
    for (e, payload) in payloads.iter().enumerate() {
        if dropped(channel, round, direction, e as u64) {
            stats.stale += 1;
            fresh.push(false);
        } else {
            mailboxes[e].deliver(payload.clone(), round);
            stats.delivered += 1;
            fresh.push(true);
        }
    }
    fresh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_loss_always_delivers() {
        let ch = ChannelModel::new(0.0, 42);
        let mut stats = DeliveryStats::default();
        let mut boxes: Vec<Mailbox<u32>> = (0..8).map(Mailbox::new).collect();
        for round in 0..50 {
            let payloads: Vec<u32> = (0..8).map(|e| e + round).collect();
            let fresh = deliver_round(&payloads, &mut boxes, &ch, round as u64, Direction::Down, &mut stats);
            assert!(fresh.iter().all(|&f| f));
        }
        assert_eq!(stats.stale, 0);
        assert_eq!(stale_fraction(&stats), 0.0);
    }

    #[test]
    fn total_loss_never_delivers() {
        let ch = ChannelModel::new(1.0, 42);
        let mut stats = DeliveryStats::default();
        let mut boxes: Vec<Mailbox<u32>> = (0..4).map(|_| Mailbox::new(7)).collect();
        for round in 0..20 {
            let payloads = vec![99u32; 4];
            deliver_round(&payloads, &mut boxes, &ch, round, Direction::Up, &mut stats);
        }
        assert!(boxes.iter().all(|m| *m.value() == 7 && m.stamp() == 0));
        assert_eq!(stats.delivered, 0);
    }

    #[test]
    fn drop_pattern_replays_exactly() {
        let ch = ChannelModel::new(0.37, 1234);
        let a: Vec<bool> = (0..100)
            .flat_map(|r| (0..16).map(move |e| dropped(&ch, r, Direction::Down, e)))
            .collect();
        let b: Vec<bool> = (0..100)
            .flat_map(|r| (0..16).map(move |e| dropped(&ch, r, Direction::Down, e)))
            .collect();
        assert_eq!(a, b);
        // Directions draw from distinct streams.
        let c: Vec<bool> = (0..100)
            .flat_map(|r| (0..16).map(move |e| dropped(&ch, r, Direction::Up, e)))
            .collect();
        assert_ne!(a, c);
    }

    #[test]
    fn stale_fraction_tracks_the_drop_probability() {
        let ch = ChannelModel::new(0.4, 2024);
        let mut stats = DeliveryStats::default();
        let mut boxes: Vec<Mailbox<u64>> = (0..40).map(|_| Mailbox::new(0)).collect();
        for round in 0..50 {
            let payloads = vec![round; 40];
            deliver_round(&payloads, &mut boxes, &ch, round, Direction::Down, &mut stats);
        }
        assert_eq!(stats.endpoint_rounds(), 2000);
        let frac = stale_fraction(&stats);
        assert!((0.3..=0.5).contains(&frac), "stale fraction {frac} out of range");
    }

    #[test]
    fn stale_age_tail_thins_out_geometrically() {
        let ch = ChannelModel::new(0.5, 77);
        let mut age_ge_2 = 0u32;
        let mut total = 0u32;
        for e in 0..200u64 {
            for r in 2..52u64 {
                total += 1;
                if dropped(&ch, r, Direction::Up, e) && dropped(&ch, r - 1, Direction::Up, e) {
                    age_ge_2 += 1;
                }
            }
        }
        let frac = age_ge_2 as f64 / total as f64;
        // Two independent drops in a row happen with probability 0.25.
        assert!((0.2..=0.3).contains(&frac), "got {frac}");
    }
}
