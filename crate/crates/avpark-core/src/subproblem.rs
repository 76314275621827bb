//! The per-vehicle pricing problem.
//!
//! Given nonnegative prices on every (facility, slot) cell, each vehicle
//! independently picks the facility and slot set maximizing the sum of
//! priced slot values over its own constraints. A parked slot is worth
//! `1 - price_hi + price_lo`: the capacity price discourages crowded cells,
//! the demand price rewards needy ones. The optimum has closed form: at
//! each feasible facility take every slot with nonnegative value, then pad
//! with the least bad slots until the minimum stay is reached.

use crate::error::Error;
use crate::instance::{Instance, Slot};
use crate::model::{facility_feasible, feasible_window};

/// Per-(facility, slot) prices. `hi` prices capacity, `lo` prices demand;
/// both stay nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector {
    n_facilities: usize,
    slots: u32,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PriceVector {
    pub fn zeros(n_facilities: usize, slots: u32) -> Self {
        let n = n_facilities * slots as usize;
        PriceVector {
            n_facilities,
            slots,
            hi: vec![0.0; n],
            lo: vec![0.0; n],
        }
    }

    fn idx(&self, f: usize, t: Slot) -> usize {
        debug_assert!(f < self.n_facilities && t >= 1 && t <= self.slots);
        f * self.slots as usize + (t - 1) as usize
    }

    pub fn hi(&self, f: usize, t: Slot) -> f64 {
        self.hi[self.idx(f, t)]
    }

    pub fn lo(&self, f: usize, t: Slot) -> f64 {
        self.lo[self.idx(f, t)]
    }

    pub fn set_hi(&mut self, f: usize, t: Slot, v: f64) {
        debug_assert!(v >= 0.0);
        let i = self.idx(f, t);
        self.hi[i] = v;
    }

    pub fn set_lo(&mut self, f: usize, t: Slot, v: f64) {
        debug_assert!(v >= 0.0);
        let i = self.idx(f, t);
        self.lo[i] = v;
    }

    pub fn n_facilities(&self) -> usize {
        self.n_facilities
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }
}

/// Value of parking one slot at (f, t) under the current prices.
pub fn slot_coefficient(prices: &PriceVector, f: usize, t: Slot) -> f64 {
    1.0 - prices.hi(f, t) + prices.lo(f, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemResult {
    pub av: usize,
    pub facility: usize,
    /// Sorted ascending.
    pub slots: Vec<Slot>,
    /// Optimal value of the vehicle's pricing problem.
    pub value: f64,
}

/// Sums coefficients over `slots` in ascending order. Both solvers value
/// candidate sets through this so equal sets produce bit-equal totals.
fn set_value(prices: &PriceVector, f: usize, slots: &[Slot]) -> f64 {
    let mut v = 0.0;
    for &t in slots {
        v += slot_coefficient(prices, f, t);
    }
    v
}

fn best_set_at_facility(
    inst: &Instance,
    prices: &PriceVector,
    k: usize,
    f: usize,
) -> (Vec<Slot>, f64) {
    let (lo, hi) = feasible_window(inst, k, f).expect("feasible facility has a window");
    let stay = inst.plan(k, f).stay.expect("feasible facility has a stay") as usize;
    let mut chosen: Vec<Slot> = (lo..=hi)
        .filter(|&t| slot_coefficient(prices, f, t) >= 0.0)
        .collect();
    if chosen.len() < stay {
        let mut rest: Vec<Slot> = (lo..=hi)
            .filter(|&t| slot_coefficient(prices, f, t) < 0.0)
            .collect();
        // Least bad first; equal coefficients resolve to the earlier slot.
        rest.sort_by(|&a, &b| {
            slot_coefficient(prices, f, b)
                .partial_cmp(&slot_coefficient(prices, f, a))
                .unwrap()
                .then(a.cmp(&b))
        });
        chosen.extend(rest.into_iter().take(stay - chosen.len()));
        chosen.sort_unstable();
    }
    let value = set_value(prices, f, &chosen);
    (chosen, value)
}

/// Exact solution of AV `k`'s pricing problem. Ties between facilities go
/// to the lower facility id.
pub fn solve_subproblem(
    inst: &Instance,
    prices: &PriceVector,
    k: usize,
) -> Result<SubproblemResult, Error> {
    let mut best: Option<SubproblemResult> = None;
    for f in 0..inst.n_facilities() {
        if !facility_feasible(inst, k, f) {
            continue;
        }
        let (slots, value) = best_set_at_facility(inst, prices, k, f);
        let better = match &best {
            None => true,
            Some(b) => value > b.value,
        };
        if better {
            best = Some(SubproblemResult {
                av: k,
                facility: f,
                slots,
                value,
            });
        }
    }
    best.ok_or(Error::AvInfeasible { av: k })
}

/// Window size past which `brute_subproblem` refuses to enumerate.
pub const BRUTE_WINDOW_BOUND: u32 = 20;

/// Exhaustive twin of `solve_subproblem`: enumerates every admissible slot
/// set at every feasible facility. Preference order on ties matches the
/// greedy solver: higher value, then more slots, then the lexicographically
/// smaller slot set; across facilities only strictly higher value wins.
pub fn brute_subproblem(
    inst: &Instance,
    prices: &PriceVector,
    k: usize,
) -> Result<SubproblemResult, Error> {
    let mut best: Option<SubproblemResult> = None;
    for f in 0..inst.n_facilities() {
        if !facility_feasible(inst, k, f) {
            continue;
        }
        let (lo, hi) = feasible_window(inst, k, f).unwrap();
        let len = hi - lo + 1;
        if len > BRUTE_WINDOW_BOUND {
            return Err(Error::WindowTooLarge {
                len,
                bound: BRUTE_WINDOW_BOUND,
            });
        }
        let stay = inst.plan(k, f).stay.unwrap() as u32;
        let mut fac_best: Option<(Vec<Slot>, f64)> = None;
        for mask in 0u32..(1u32 << len) {
            if (mask.count_ones()) < stay {
                continue;
            }
            let slots: Vec<Slot> = (0..len).filter(|b| mask >> b & 1 == 1).map(|b| lo + b).collect();
            let value = set_value(prices, f, &slots);
            let better = match &fac_best {
                None => true,
                Some((bs, bv)) => {
                    value > *bv
                        || (value == *bv
                            && (slots.len() > bs.len()
                                || (slots.len() == bs.len() && slots < *bs)))
                }
            };
            if better {
                fac_best = Some((slots, value));
            }
        }
        let (slots, value) = fac_best.expect("window holds the stay, so some mask qualifies");
        let better = match &best {
            None => true,
            Some(b) => value > b.value,
        };
        if better {
            best = Some(SubproblemResult {
                av: k,
                facility: f,
                slots,
                value,
            });
        }
    }
    best.ok_or(Error::AvInfeasible { av: k })
}
