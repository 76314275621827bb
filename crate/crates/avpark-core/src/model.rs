//! Schedules and the constraints they must satisfy.
//!
//! A schedule assigns each vehicle to at most one facility together with the
//! set of slots it sits parked there. Feasibility means: exactly one
//! facility per vehicle, the detour fits the vehicle's budget, all parked
//! slots lie inside the vehicle's window at that facility, at least the
//! minimum stay is parked, and every facility slot sees an occupancy between
//! its demand and its capacity.

use std::fmt;
use std::fmt::Write as _;

use crate::instance::{Instance, Slot};

/// Inclusive slot interval in which AV `k` may sit parked at facility `f`:
/// it begins after the first travel leg and ends early enough to drive back
/// before the vehicle's deadline. Deadlines beyond the horizon do not bind.
/// `None` when no slot qualifies.
pub fn feasible_window(inst: &Instance, k: usize, f: usize) -> Option<(Slot, Slot)> {
    let av = &inst.avs[k];
    let plan = inst.plan(k, f);
    let lo = (av.t_start as i64 + plan.m_to as i64).max(1);
    let hi = (av.t_end as i64 - plan.m_back as i64 - 1).min(inst.slots() as i64);
    if lo > hi {
        None
    } else {
        Some((lo as Slot, hi as Slot))
    }
}

pub fn window_len(window: Option<(Slot, Slot)>) -> u32 {
    match window {
        Some((lo, hi)) => hi - lo + 1,
        None => 0,
    }
}

/// Whether AV `k` can park at facility `f` at all: the detour fits the
/// budget and the window holds at least the minimum stay.
pub fn facility_feasible(inst: &Instance, k: usize, f: usize) -> bool {
    if inst.detour_km(k, f) > inst.avs[k].d_max {
        return false;
    }
    match inst.plan(k, f).stay {
        Some(stay) => window_len(feasible_window(inst, k, f)) >= stay,
        None => false,
    }
}

/// Facilities AV `k` may be assigned to, ascending.
pub fn feasible_facilities(inst: &Instance, k: usize) -> Vec<usize> {
    (0..inst.n_facilities())
        .filter(|&f| facility_feasible(inst, k, f))
        .collect()
}

/// Facility choice and parked slots of one vehicle. Slots are sorted and
/// unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvChoice {
    pub facility: usize,
    pub slots: Vec<Slot>,
}

/// One schedule; entry `k` is `None` when AV `k` is not assigned anywhere,
/// which is itself a constraint violation but representable so checks can
/// report it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub choices: Vec<Option<AvChoice>>,
}

impl Assignment {
    pub fn empty(n_avs: usize) -> Self {
        Assignment {
            choices: vec![None; n_avs],
        }
    }

    pub fn n_avs(&self) -> usize {
        self.choices.len()
    }

    /// Occupancy per (facility, slot), row-major with `slots` columns.
    pub fn occupancy(&self, n_facilities: usize, slots: u32) -> Vec<u32> {
        let mut occ = vec![0u32; n_facilities * slots as usize];
        for choice in self.choices.iter().flatten() {
            for &t in &choice.slots {
                occ[choice.facility * slots as usize + (t - 1) as usize] += 1;
            }
        }
        occ
    }
}

/// Total number of parked vehicle-slots.
pub fn objective(a: &Assignment) -> u64 {
    a.choices
        .iter()
        .flatten()
        .map(|c| c.slots.len() as u64)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// The vehicle is not assigned to exactly one facility.
    OneFacility,
    /// Fewer slots parked than the minimum stay.
    MinStay,
    /// The detour through the chosen facility exceeds the budget.
    Distance,
    /// Parked in a slot before the window opens.
    WindowBefore,
    /// Parked in a slot after the window closes.
    WindowAfter,
    /// A facility slot with fewer vehicles than demanded.
    DemandDeficit,
    /// A facility slot with more vehicles than capacity.
    CapacityOverflow,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::OneFacility => "one-facility",
            ViolationKind::MinStay => "min-stay",
            ViolationKind::Distance => "distance",
            ViolationKind::WindowBefore => "window-before",
            ViolationKind::WindowAfter => "window-after",
            ViolationKind::DemandDeficit => "demand-deficit",
            ViolationKind::CapacityOverflow => "capacity-overflow",
        };
        w.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Av(usize),
    FacilitySlot(usize, Slot),
}

impl fmt::Display for Subject {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Av(k) => write!(w, "av {k}"),
            Subject::FacilitySlot(f, t) => write!(w, "facility {f} slot {t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: Subject,
    /// Amount by which the constraint is missed, at least 1.
    pub magnitude: u64,
}

impl fmt::Display for Violation {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{} at {} by {}", self.kind, self.subject, self.magnitude)
    }
}

/// All constraint violations of `a` against `inst`, in a fixed order:
/// per-vehicle checks by vehicle id, then per-slot checks by (facility,
/// slot). An empty result means the schedule is feasible.
pub fn check_feasibility(inst: &Instance, a: &Assignment) -> Vec<Violation> {
    assert_eq!(a.n_avs(), inst.n_avs(), "schedule and instance disagree on fleet size");
    let mut out = Vec::new();
    for (k, choice) in a.choices.iter().enumerate() {
        let Some(choice) = choice else {
            out.push(Violation {
                kind: ViolationKind::OneFacility,
                subject: Subject::Av(k),
                magnitude: 1,
            });
            continue;
        };
        let f = choice.facility;
        let av = &inst.avs[k];
        let excess = inst.detour_km(k, f) - av.d_max;
        if excess > 0.0 {
            out.push(Violation {
                kind: ViolationKind::Distance,
                subject: Subject::Av(k),
                magnitude: (excess.ceil() as u64).max(1),
            });
        }
        let need = inst.plan(k, f).stay.unwrap_or(1) as u64;
        let have = choice.slots.len() as u64;
        if have < need {
            out.push(Violation {
                kind: ViolationKind::MinStay,
                subject: Subject::Av(k),
                magnitude: need - have,
            });
        }
        let window = feasible_window(inst, k, f);
        let (lo, hi) = match window {
            Some((lo, hi)) => (lo as i64, hi as i64),
            None => (1, 0),
        };
        let before = choice.slots.iter().filter(|&&t| (t as i64) < lo).count() as u64;
        let after = choice.slots.iter().filter(|&&t| (t as i64) > hi).count() as u64;
        if before > 0 {
            out.push(Violation {
                kind: ViolationKind::WindowBefore,
                subject: Subject::Av(k),
                magnitude: before,
            });
        }
        if after > 0 {
            out.push(Violation {
                kind: ViolationKind::WindowAfter,
                subject: Subject::Av(k),
                magnitude: after,
            });
        }
    }
    let d = inst.slots();
    let occ = a.occupancy(inst.n_facilities(), d);
    for (f, fac) in inst.facilities.iter().enumerate() {
        for t in 1..=d {
            let count = occ[f * d as usize + (t - 1) as usize] as u64;
            let rho = fac.demand[(t - 1) as usize] as u64;
            if count < rho {
                out.push(Violation {
                    kind: ViolationKind::DemandDeficit,
                    subject: Subject::FacilitySlot(f, t),
                    magnitude: rho - count,
                });
            } else if count > fac.capacity as u64 {
                out.push(Violation {
                    kind: ViolationKind::CapacityOverflow,
                    subject: Subject::FacilitySlot(f, t),
                    magnitude: count - fac.capacity as u64,
                });
            }
        }
    }
    out
}

/// Big-M for the stay upper bound: one more than any stay can be.
pub fn big_m(inst: &Instance) -> u32 {
    inst.slots() + 1
}

/// Writes the full 0-1 program in LP format. Variables are `x_k_f_t`
/// (vehicle k parked at facility f in slot t) and `y_k_f` (vehicle k
/// assigned to facility f); the objective maximizes total parked slots.
/// Output is deterministic: rows are emitted in constraint-family order,
/// each family iterating ids ascending.
pub fn export_lp(inst: &Instance, name: &str) -> String {
    let d = inst.slots();
    let n_fac = inst.n_facilities();
    let mut s = String::new();
    let _ = writeln!(s, "\\ {name}");
    let _ = writeln!(s, "Maximize");
    let mut obj = String::from(" obj:");
    let mut first = true;
    for k in 0..inst.n_avs() {
        for f in 0..n_fac {
            for t in 1..=d {
                if first {
                    let _ = write!(obj, " x_{k}_{f}_{t}");
                    first = false;
                } else {
                    let _ = write!(obj, " + x_{k}_{f}_{t}");
                }
            }
        }
    }
    s.push_str(&obj);
    s.push('\n');
    let _ = writeln!(s, "Subject To");

    // Every vehicle parks at exactly one facility.
    for k in 0..inst.n_avs() {
        let mut row = format!(" assign_{k}:");
        for f in 0..n_fac {
            if f == 0 {
                let _ = write!(row, " y_{k}_{f}");
            } else {
                let _ = write!(row, " + y_{k}_{f}");
            }
        }
        let _ = writeln!(s, "{row} = 1");
    }

    // Stay bounds: at least the minimum stay, at most big-M, both switched
    // by the facility choice.
    let m = big_m(inst);
    for k in 0..inst.n_avs() {
        for f in 0..n_fac {
            let stay = inst.plan(k, f).stay.unwrap_or(m);
            let mut lo = format!(" stay_lo_{k}_{f}:");
            let mut hi = format!(" stay_hi_{k}_{f}:");
            for t in 1..=d {
                let sep = if t == 1 { " " } else { " + " };
                let _ = write!(lo, "{sep}x_{k}_{f}_{t}");
                let _ = write!(hi, "{sep}x_{k}_{f}_{t}");
            }
            let _ = writeln!(s, "{lo} - {stay} y_{k}_{f} >= 0");
            let _ = writeln!(s, "{hi} - {m} y_{k}_{f} <= 0");
        }
    }

    // Detour budget.
    for k in 0..inst.n_avs() {
        for f in 0..n_fac {
            let detour = inst.detour_km(k, f);
            let _ = writeln!(
                s,
                " detour_{k}_{f}: {detour} y_{k}_{f} <= {}",
                inst.avs[k].d_max
            );
        }
    }

    // No parking before the window opens or after it closes.
    for k in 0..inst.n_avs() {
        let av = &inst.avs[k];
        for f in 0..n_fac {
            let plan = inst.plan(k, f);
            let lead_end = (av.t_start as i64 + plan.m_to as i64 - 1).min(d as i64);
            if lead_end >= 1 {
                let mut row = format!(" lead_{k}_{f}:");
                for t in 1..=lead_end as u32 {
                    let sep = if t == 1 { " " } else { " + " };
                    let _ = write!(row, "{sep}x_{k}_{f}_{t}");
                }
                let _ = writeln!(s, "{row} = 0");
            }
            let tail_start = av.t_end as i64 - plan.m_back as i64;
            if tail_start <= d as i64 {
                let start = tail_start.max(1) as u32;
                let mut row = format!(" tail_{k}_{f}:");
                for t in start..=d {
                    let sep = if t == start { " " } else { " + " };
                    let _ = write!(row, "{sep}x_{k}_{f}_{t}");
                }
                let _ = writeln!(s, "{row} = 0");
            }
        }
    }

    // Demand and capacity per facility slot.
    for f in 0..n_fac {
        let fac = &inst.facilities[f];
        for t in 1..=d {
            let mut lo = format!(" demand_{f}_{t}:");
            let mut hi = format!(" capacity_{f}_{t}:");
            for k in 0..inst.n_avs() {
                let sep = if k == 0 { " " } else { " + " };
                let _ = write!(lo, "{sep}x_{k}_{f}_{t}");
                let _ = write!(hi, "{sep}x_{k}_{f}_{t}");
            }
            let _ = writeln!(s, "{lo} >= {}", fac.demand[(t - 1) as usize]);
            let _ = writeln!(s, "{hi} <= {}", fac.capacity);
        }
    }

    let _ = writeln!(s, "Binary");
    for k in 0..inst.n_avs() {
        for f in 0..n_fac {
            for t in 1..=d {
                let _ = writeln!(s, " x_{k}_{f}_{t}");
            }
        }
    }
    for k in 0..inst.n_avs() {
        for f in 0..n_fac {
            let _ = writeln!(s, " y_{k}_{f}");
        }
    }
    let _ = writeln!(s, "End");
    s
}
