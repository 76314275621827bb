//! Greedy comparison solver.
//!
//! Not one of the principled methods, just a cheap yardstick: vehicles are
//! placed one at a time, roomiest window first, each at the feasible
//! facility where its window covers the most still-unmet demand (closer
//! facility on ties, then lower id), occupying the whole window. The
//! repair pass then fixes whatever demand or capacity violations remain.

use crate::error::Error;
use crate::instance::Instance;
use crate::model::{feasible_facilities, feasible_window, Assignment, AvChoice};
use crate::recovery::recover_primal;

pub fn solve_greedy(inst: &Instance) -> Result<Assignment, Error> {
    let d = inst.slots() as usize;
    let n_f = inst.n_facilities();

    let mut order: Vec<(u64, usize)> = Vec::with_capacity(inst.n_avs());
    for k in 0..inst.n_avs() {
        let facs = feasible_facilities(inst, k);
        if facs.is_empty() {
            return Err(Error::AvInfeasible { av: k });
        }
        let best = facs
            .iter()
            .map(|&f| {
                let (lo, hi) = feasible_window(inst, k, f).unwrap();
                (hi - lo + 1) as u64
            })
            .max()
            .unwrap();
        order.push((best, k));
    }
    order.sort_by_key(|&(len, k)| (std::cmp::Reverse(len), k));

    let mut occ = vec![0u32; n_f * d];
    let mut choices: Vec<Option<AvChoice>> = vec![None; inst.n_avs()];
    for &(_, k) in &order {
        let mut best: Option<(u64, f64, usize)> = None;
        for f in feasible_facilities(inst, k) {
            let (lo, hi) = feasible_window(inst, k, f).unwrap();
            let mut unmet: u64 = 0;
            for t in lo..=hi {
                let i = f * d + (t - 1) as usize;
                let rho = inst.facilities[f].demand[(t - 1) as usize];
                if occ[i] < rho {
                    unmet += (rho - occ[i]) as u64;
                }
            }
            let detour = inst.detour_km(k, f);
            let better = match best {
                None => true,
                Some((bu, bd, _)) => unmet > bu || (unmet == bu && detour < bd),
            };
            if better {
                best = Some((unmet, detour, f));
            }
        }
        let (_, _, f) = best.unwrap();
        let (lo, hi) = feasible_window(inst, k, f).unwrap();
        for t in lo..=hi {
            occ[f * d + (t - 1) as usize] += 1;
        }
        choices[k] = Some(AvChoice {
            facility: f,
            slots: (lo..=hi).collect(),
        });
    }

    let repair = recover_primal(inst, &Assignment { choices })?;
    Ok(repair.assignment)
}
