//! Repair of per-vehicle schedules into facility-feasible ones.
//!
//! The pricing subproblems give every vehicle a schedule that respects its
//! own constraints but may leave facility slots under demand or over
//! capacity. Repair runs in two alternating phases until neither kind of
//! violation remains. For the worst demand deficit, a vehicle that can be
//! taken from its current facility without opening a deficit there is moved
//! to the needy facility and parks over its whole window; the vehicle with
//! the longest possible stay is preferred. For the worst capacity overflow,
//! the free list holds vehicles occupying the overflowed slot whose removal
//! would not open a deficit and which can actually give the slot up, by
//! shedding it (when the minimum stay survives) or by moving to another
//! feasible facility onto its least loaded slots; the one with the shortest
//! possible stay goes first.
//! Deficit moves may create overflows; those are caught by the overflow
//! phase, and a hard cap on total moves bounds the loop.

use crate::error::Error;
use crate::instance::{Instance, Slot};
use crate::model::{facility_feasible, feasible_window, Assignment, AvChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairKind {
    /// Vehicle moved to cover a demand deficit, parking its full window.
    DeficitMove,
    /// Vehicle dropped its occupancy at an overflowed slot.
    OverflowRemove,
    /// Vehicle moved to a different facility to relieve an overflow.
    Reassign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairMove {
    pub kind: RepairKind,
    pub av: usize,
    pub from_facility: usize,
    pub to_facility: usize,
    pub old_slots: Vec<Slot>,
    pub new_slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub assignment: Assignment,
    pub moves: Vec<RepairMove>,
}

/// Applies `moves` to a copy of `a0`. Replaying a repair trace against its
/// input reproduces the repaired schedule.
pub fn replay(a0: &Assignment, moves: &[RepairMove]) -> Assignment {
    let mut a = a0.clone();
    for mv in moves {
        a.choices[mv.av] = Some(AvChoice {
            facility: mv.to_facility,
            slots: mv.new_slots.clone(),
        });
    }
    a
}

struct RepairState<'a> {
    inst: &'a Instance,
    choices: Vec<AvChoice>,
    /// Occupancy per (facility, slot), row-major.
    occ: Vec<u32>,
}

/// A planned release of one vehicle from an overflowed slot.
enum Step {
    /// Keep the facility, drop the slot; the remaining occupancy.
    Shed(Vec<Slot>),
    /// Move to the facility, parking the given slots.
    Move(usize, Vec<Slot>),
}

impl<'a> RepairState<'a> {
    fn occ_at(&self, f: usize, t: Slot) -> u32 {
        self.occ[f * self.inst.slots() as usize + (t - 1) as usize]
    }

    fn bump(&mut self, f: usize, t: Slot, delta: i32) {
        let cell = &mut self.occ[f * self.inst.slots() as usize + (t - 1) as usize];
        *cell = cell.checked_add_signed(delta).expect("occupancy underflow");
    }

    fn worst_deficit(&self) -> Option<(usize, Slot, u32)> {
        let mut worst: Option<(usize, Slot, u32)> = None;
        for (f, fac) in self.inst.facilities.iter().enumerate() {
            for t in 1..=self.inst.slots() {
                let rho = fac.demand[(t - 1) as usize];
                let have = self.occ_at(f, t);
                if have < rho {
                    let gap = rho - have;
                    if worst.map_or(true, |(_, _, g)| gap > g) {
                        worst = Some((f, t, gap));
                    }
                }
            }
        }
        worst
    }

    fn worst_overflow(&self) -> Option<(usize, Slot, u32)> {
        let mut worst: Option<(usize, Slot, u32)> = None;
        for (f, fac) in self.inst.facilities.iter().enumerate() {
            for t in 1..=self.inst.slots() {
                let have = self.occ_at(f, t);
                if have > fac.capacity {
                    let over = have - fac.capacity;
                    if worst.map_or(true, |(_, _, g)| over > g) {
                        worst = Some((f, t, over));
                    }
                }
            }
        }
        worst
    }

    /// Whether removing all of `slots` from `f` keeps every demand met.
    fn removal_safe(&self, f: usize, slots: &[Slot]) -> bool {
        slots.iter().all(|&t| {
            self.occ_at(f, t) > self.inst.facilities[f].demand[(t - 1) as usize]
        })
    }

    /// Nominal room between the two travel legs, the "possible stay" used
    /// to rank candidates.
    fn possible_stay(&self, k: usize, f: usize) -> i64 {
        let av = &self.inst.avs[k];
        let plan = self.inst.plan(k, f);
        av.t_end as i64 - plan.m_back as i64 - av.t_start as i64 - plan.m_to as i64
    }

    /// How the overflow step would release vehicle `k` from slot `t` at
    /// facility `f`, if it can be released at all. Shedding just the
    /// offending slot is preferred; other overflowed slots get their own
    /// steps, possibly picking better-suited vehicles. When the minimum
    /// stay blocks shedding, the vehicle moves to the other feasible
    /// facility that overflows least.
    fn plan_step(&self, k: usize, f: usize, t: Slot) -> Option<Step> {
        let kept: Vec<Slot> = self.choices[k]
            .slots
            .iter()
            .copied()
            .filter(|&s| s != t)
            .collect();
        if kept.len() >= self.inst.plan(k, f).stay.unwrap() as usize {
            return Some(Step::Shed(kept));
        }
        let mut target: Option<(u32, usize, Vec<Slot>)> = None;
        for g in 0..self.inst.n_facilities() {
            if g == f || !facility_feasible(self.inst, k, g) {
                continue;
            }
            let (lo, hi) = feasible_window(self.inst, k, g).unwrap();
            let need = self.inst.plan(k, g).stay.unwrap() as usize;
            let mut slots: Vec<Slot> = (lo..=hi).collect();
            slots.sort_by_key(|&s| (self.occ_at(g, s), s));
            let mut pick: Vec<Slot> = slots.into_iter().take(need).collect();
            pick.sort_unstable();
            let new_over = pick
                .iter()
                .filter(|&&s| self.occ_at(g, s) + 1 > self.inst.facilities[g].capacity)
                .count() as u32;
            if target.as_ref().map_or(true, |(o, _, _)| new_over < *o) {
                target = Some((new_over, g, pick));
            }
        }
        target.map(|(_, g, pick)| Step::Move(g, pick))
    }

    fn apply(&mut self, k: usize, to: usize, new_slots: Vec<Slot>, kind: RepairKind) -> RepairMove {
        let old = self.choices[k].clone();
        for &t in &old.slots {
            self.bump(old.facility, t, -1);
        }
        for &t in &new_slots {
            self.bump(to, t, 1);
        }
        let mv = RepairMove {
            kind,
            av: k,
            from_facility: old.facility,
            to_facility: to,
            old_slots: old.slots,
            new_slots: new_slots.clone(),
        };
        self.choices[k] = AvChoice {
            facility: to,
            slots: new_slots,
        };
        mv
    }
}

fn fail(f: usize, t: Slot, detail: String, moves: Vec<RepairMove>) -> Error {
    Error::RecoveryFailed {
        facility: f,
        slot: t,
        detail,
        moves,
    }
}

/// Repairs `a0` into a fully feasible schedule, or reports why it could
/// not. `a0` must already satisfy every per-vehicle constraint.
pub fn recover_primal(inst: &Instance, a0: &Assignment) -> Result<Repair, Error> {
    let mut choices = Vec::with_capacity(inst.n_avs());
    for (k, c) in a0.choices.iter().enumerate() {
        match c {
            Some(c) => choices.push(c.clone()),
            None => {
                return Err(fail(
                    0,
                    0,
                    format!("input leaves AV {k} unassigned; repair only fixes facility-side constraints"),
                    Vec::new(),
                ))
            }
        }
    }
    let d = inst.slots();
    let occ = a0.occupancy(inst.n_facilities(), d);
    let mut st = RepairState { inst, choices, occ };
    let mut moves: Vec<RepairMove> = Vec::new();
    let cap = inst.n_avs() * inst.n_facilities() * d as usize;

    loop {
        if moves.len() > cap {
            let (f, t) = st
                .worst_deficit()
                .or_else(|| st.worst_overflow())
                .map(|(f, t, _)| (f, t))
                .unwrap_or((0, 0));
            return Err(fail(
                f,
                t,
                format!("gave up after {} moves without reaching feasibility", moves.len()),
                moves,
            ));
        }

        if let Some((f, t, _gap)) = st.worst_deficit() {
            // Candidates: not yet counted at (f, t), able to park at f over
            // a window containing t, and removable from where they are
            // without opening a deficit there.
            let mut best: Option<(i64, usize)> = None;
            for k in 0..inst.n_avs() {
                let cur = &st.choices[k];
                if cur.facility == f && cur.slots.binary_search(&t).is_ok() {
                    continue;
                }
                if !facility_feasible(inst, k, f) {
                    continue;
                }
                let (lo, hi) = feasible_window(inst, k, f).unwrap();
                if t < lo || t > hi {
                    continue;
                }
                if cur.facility != f && !st.removal_safe(cur.facility, &cur.slots) {
                    continue;
                }
                let stay = st.possible_stay(k, f);
                if best.map_or(true, |(s, _)| stay > s) {
                    best = Some((stay, k));
                }
            }
            let Some((_, k)) = best else {
                return Err(fail(
                    f,
                    t,
                    "no vehicle can be moved to cover the deficit".into(),
                    moves,
                ));
            };
            let (lo, hi) = feasible_window(inst, k, f).unwrap();
            let full: Vec<Slot> = (lo..=hi).collect();
            moves.push(st.apply(k, f, full, RepairKind::DeficitMove));
            continue;
        }

        if let Some((f, t, _over)) = st.worst_overflow() {
            // The free list holds vehicles the step can actually operate
            // on: parked over the slot, removable without opening a
            // deficit, and able to either shed the slot or move to another
            // facility. Among those, the shortest possible stay goes first.
            let mut pinned = 0u32;
            let mut stuck = 0u32;
            let mut best: Option<(i64, usize, Step)> = None;
            for k in 0..inst.n_avs() {
                let cur = &st.choices[k];
                if cur.facility != f || cur.slots.binary_search(&t).is_err() {
                    continue;
                }
                if !st.removal_safe(f, &cur.slots) {
                    pinned += 1;
                    continue;
                }
                let Some(step) = st.plan_step(k, f, t) else {
                    stuck += 1;
                    continue;
                };
                let stay = st.possible_stay(k, f);
                if best.as_ref().map_or(true, |&(s, _, _)| stay < s) {
                    best = Some((stay, k, step));
                }
            }
            let Some((_, k, step)) = best else {
                return Err(fail(
                    f,
                    t,
                    format!(
                        "no vehicle at the overflowed slot can give it up \
                         ({pinned} pinned by demand, {stuck} at minimum stay \
                         with no other facility)"
                    ),
                    moves,
                ));
            };
            match step {
                Step::Shed(kept) => {
                    moves.push(st.apply(k, f, kept, RepairKind::OverflowRemove));
                }
                Step::Move(g, pick) => {
                    moves.push(st.apply(k, g, pick, RepairKind::Reassign));
                }
            }
            continue;
        }

        break;
    }

    Ok(Repair {
        assignment: Assignment {
            choices: st.choices.into_iter().map(Some).collect(),
        },
        moves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        AvSpec, DistanceMatrix, FacilitySpec, Instance, TimeHorizon, TravelPlan,
    };
    use crate::model::{check_feasibility, objective};

    /// Two facilities, everything colocated, 6 slots. Windows span [1,6]
    /// for every pair, stay 1 unless overridden.
    fn playground(n_avs: usize, capacity: u32) -> Instance {
        let h = TimeHorizon::new(6, 20.0).unwrap();
        let dm = DistanceMatrix::new(3, vec![0.0; 9]).unwrap();
        let avs: Vec<AvSpec> = (0..n_avs)
            .map(|id| AvSpec {
                id,
                start_node: 2,
                return_node: 2,
                t_start: 1,
                t_end: 100,
                soc_start: 10.0,
                soc_return: 10.0,
                d_max: 1.0,
                speed_kmh: 30.0,
                consumption_kwh_per_km: 0.15,
            })
            .collect();
        let facs: Vec<FacilitySpec> = (0..2)
            .map(|id| FacilitySpec {
                id,
                node: id,
                capacity,
                charge_rate_kw: 7.2,
                demand: vec![0; 6],
            })
            .collect();
        let plans: Vec<TravelPlan> = (0..n_avs * 2)
            .map(|_| TravelPlan {
                m_to: 0,
                m_back: 0,
                e_to: 0.0,
                e_back: 0.0,
                stay: Some(1),
            })
            .collect();
        Instance::new(h, dm, avs, facs, plans, None).unwrap()
    }

    fn parked(f: usize, slots: &[Slot]) -> Option<AvChoice> {
        Some(AvChoice {
            facility: f,
            slots: slots.to_vec(),
        })
    }

    #[test]
    fn feasible_input_needs_no_moves() {
        let inst = playground(2, 2);
        let a = Assignment {
            choices: vec![parked(0, &[1, 2]), parked(1, &[3])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(r.moves.is_empty());
        assert_eq!(r.assignment, a);
    }

    #[test]
    fn deficit_pulls_a_vehicle_over_its_whole_window() {
        let mut inst = playground(2, 2);
        inst.facilities[0].demand[2] = 1;
        let a = Assignment {
            choices: vec![parked(1, &[2, 3]), parked(1, &[4])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(check_feasibility(&inst, &r.assignment).is_empty());
        assert_eq!(r.moves.len(), 1);
        let mv = &r.moves[0];
        assert_eq!(mv.kind, RepairKind::DeficitMove);
        assert_eq!(mv.to_facility, 0);
        assert_eq!(mv.new_slots, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn deficit_prefers_the_longest_possible_stay() {
        let mut inst = playground(3, 3);
        inst.facilities[0].demand[3] = 1;
        // AV 2 has the roomiest window; AVs park at facility 1.
        inst.avs[0].t_end = 6;
        inst.avs[1].t_end = 8;
        inst.avs[2].t_end = 100;
        let a = Assignment {
            choices: vec![parked(1, &[1]), parked(1, &[2]), parked(1, &[3])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert_eq!(r.moves.len(), 1);
        assert_eq!(r.moves[0].av, 2);
    }

    #[test]
    fn overflow_sheds_the_offending_slot() {
        let inst = playground(2, 1);
        let a = Assignment {
            choices: vec![parked(0, &[2, 3, 4]), parked(0, &[4, 5])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(check_feasibility(&inst, &r.assignment).is_empty());
        assert_eq!(r.moves.len(), 1);
        let mv = &r.moves[0];
        assert_eq!(mv.kind, RepairKind::OverflowRemove);
        // Stay potentials tie, so the lowest id sheds; slot 4 is the only
        // overflowed slot.
        assert_eq!(mv.av, 0);
        assert_eq!(mv.old_slots, vec![2, 3, 4]);
        assert_eq!(mv.new_slots, vec![2, 3]);
    }

    #[test]
    fn overflow_repair_touches_one_slot_per_move() {
        // Slots 2 and 3 are both over capacity. Each move sheds a single
        // slot, so the heavier vehicle keeps the rest of its stay intact.
        let inst = playground(3, 1);
        let a = Assignment {
            choices: vec![parked(0, &[2, 3, 4]), parked(0, &[2, 3]), parked(1, &[1])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(check_feasibility(&inst, &r.assignment).is_empty());
        for mv in &r.moves {
            assert_eq!(mv.kind, RepairKind::OverflowRemove);
            assert_eq!(mv.old_slots.len(), mv.new_slots.len() + 1);
        }
    }

    #[test]
    fn overflow_reassigns_when_the_stay_cannot_shrink() {
        let mut inst = playground(2, 1);
        inst.plans[0 * 2 + 0].stay = Some(1);
        inst.plans[1 * 2 + 0].stay = Some(2);
        inst.plans[1 * 2 + 1].stay = Some(2);
        // Both AVs overlap on both their slots at facility 0; AV 1 needs
        // two slots, so shrinking is impossible for it.
        let a = Assignment {
            choices: vec![parked(0, &[2, 3]), parked(0, &[2, 3])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(check_feasibility(&inst, &r.assignment).is_empty());
        assert!(r
            .moves
            .iter()
            .any(|m| m.kind == RepairKind::Reassign && m.to_facility == 1));
    }

    #[test]
    fn symmetric_saturation_gives_up_with_a_trace() {
        // Both facilities uniformly over capacity by the same amount, and
        // the lowest-id vehicle holds a single slot it cannot shrink. The
        // repair rules bounce that vehicle between the facilities without
        // ever reducing the overflow, so the move cap has to stop it.
        let inst = playground(5, 1);
        let full: Vec<Slot> = (1..=6).collect();
        let a = Assignment {
            choices: vec![
                parked(1, &[1]),
                parked(0, &full),
                parked(0, &full),
                parked(1, &full),
                parked(1, &full),
            ],
        };
        match recover_primal(&inst, &a) {
            Err(Error::RecoveryFailed { detail, moves, .. }) => {
                assert!(detail.contains("gave up"), "unexpected detail: {detail}");
                assert!(!moves.is_empty());
                assert!(moves.iter().all(|m| m.kind == RepairKind::Reassign));
            }
            other => panic!("expected the move cap to trip, got {other:?}"),
        }
    }

    #[test]
    fn unmeetable_demand_reports_the_slot_and_keeps_the_trace() {
        let mut inst = playground(1, 2);
        inst.facilities[0].demand[4] = 2;
        inst.facilities[0].demand[1] = 1;
        let a = Assignment {
            choices: vec![parked(1, &[1])],
        };
        match recover_primal(&inst, &a) {
            Err(Error::RecoveryFailed {
                facility,
                slot,
                detail,
                moves,
            }) => {
                assert_eq!((facility, slot), (0, 5));
                assert!(!detail.is_empty());
                // The single vehicle was already pulled in to chase the
                // deficit before the dead end was hit.
                assert!(moves.len() <= 2);
            }
            other => panic!("expected recovery failure, got {other:?}"),
        }
    }

    #[test]
    fn replaying_the_trace_reproduces_the_repair() {
        let mut inst = playground(3, 1);
        inst.facilities[1].demand[0] = 1;
        let a = Assignment {
            choices: vec![parked(0, &[2, 3]), parked(0, &[3, 4]), parked(0, &[3])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(!r.moves.is_empty());
        assert_eq!(replay(&a, &r.moves), r.assignment);
    }

    #[test]
    fn repaired_objective_is_reported_consistently() {
        let inst = playground(2, 1);
        let a = Assignment {
            choices: vec![parked(0, &[1, 2, 3]), parked(0, &[3])],
        };
        let r = recover_primal(&inst, &a).unwrap();
        assert!(check_feasibility(&inst, &r.assignment).is_empty());
        assert!(objective(&r.assignment) >= 3);
    }

    #[test]
    fn unassigned_input_is_rejected_with_diagnostics() {
        let inst = playground(2, 1);
        let a = Assignment {
            choices: vec![parked(0, &[1]), None],
        };
        match recover_primal(&inst, &a) {
            Err(Error::RecoveryFailed { detail, .. }) => {
                assert!(detail.contains("AV 1"));
            }
            other => panic!("expected recovery failure, got {other:?}"),
        }
    }
}
