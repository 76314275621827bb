//! Price coordination between the control center and the vehicles.
//!
//! The center relaxes the per-(facility, slot) demand and capacity
//! constraints into prices, the vehicles best-respond to those prices, and
//! a projected subgradient step moves the prices toward agreement. The
//! exchange runs over the lossy simulated channel, so a vehicle may
//! best-respond to stale prices and the center may aggregate stale
//! schedules; the run loop tolerates both. After the stopping rule fires
//! (or the iteration budget runs out), the vehicles' latest schedules are
//! repaired into a feasible assignment.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Error;
use crate::instance::Instance;
use crate::model::{check_feasibility, objective, Assignment, AvChoice};
use crate::netsim::{self, ChannelModel, DeliveryStats, Direction, Mailbox};
use crate::recovery::{recover_primal, RepairMove};
use crate::subproblem::{solve_subproblem, PriceVector, SubproblemResult};

/// Adaptive step sizes for the price updates, one pair per (facility,
/// slot). A single global improvement signal drives every entry, but the
/// per-pair shape is kept so the cap and the update stay local.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub gamma_hi: Vec<f64>,
    pub gamma_lo: Vec<f64>,
    pub iter: u32,
    pub gamma_init: f64,
    pub epsilon: f64,
}

impl StepState {
    pub fn new(n_facilities: usize, slots: u32, gamma_init: f64, epsilon: f64) -> Self {
        let n = n_facilities * slots as usize;
        StepState {
            gamma_hi: vec![gamma_init; n],
            gamma_lo: vec![gamma_init; n],
            iter: 0,
            gamma_init,
            epsilon,
        }
    }

    /// Upper bound on every step size at iteration `i`; strictly
    /// decreasing, which gives the diminishing-step guarantee.
    pub fn cap_at(&self, i: u32) -> f64 {
        self.gamma_init * (1.0 - self.epsilon).powi(i as i32)
    }

    pub fn cap(&self) -> f64 {
        self.cap_at(self.iter)
    }

    /// Advances to the next iteration. The step grows by 1.1x when the sum
    /// of subproblem values dropped since the previous iteration and
    /// shrinks by 10x otherwise; the first advance has no history and only
    /// applies the cap.
    pub fn advance(&mut self, sum_g_history: &[f64]) {
        let n = sum_g_history.len();
        let factor = if n >= 2 {
            if sum_g_history[n - 1] - sum_g_history[n - 2] < 0.0 {
                1.1
            } else {
                0.1
            }
        } else {
            1.0
        };
        self.iter += 1;
        let cap = self.cap();
        for g in self.gamma_hi.iter_mut().chain(self.gamma_lo.iter_mut()) {
            *g = (*g * factor).min(cap);
        }
    }
}

/// One projected subgradient step on the prices:
/// capacity price moves against the slack `c_f - total`, demand price
/// against the surplus `total - rho`, both clipped at zero.
pub fn update_prices(
    prices: &PriceVector,
    totals: &[u32],
    inst: &Instance,
    steps: &StepState,
) -> PriceVector {
    let d = inst.slots();
    let mut next = prices.clone();
    for (f, fac) in inst.facilities.iter().enumerate() {
        for t in 1..=d {
            let idx = f * d as usize + (t - 1) as usize;
            let total = totals[idx] as f64;
            let hi = prices.hi(f, t) - steps.gamma_hi[idx] * (fac.capacity as f64 - total);
            let lo = prices.lo(f, t)
                - steps.gamma_lo[idx] * (total - fac.demand[(t - 1) as usize] as f64);
            next.set_hi(f, t, hi.max(0.0));
            next.set_lo(f, t, lo.max(0.0));
        }
    }
    next
}

/// Value of the relaxation at these prices: the vehicles' best-response
/// values plus the price-weighted constants. An upper bound on any
/// feasible schedule's slot count when the `g` values come from exact
/// best responses at the same prices.
pub fn dual_objective(prices: &PriceVector, g_values: &[f64], inst: &Instance) -> f64 {
    let mut v: f64 = g_values.iter().sum();
    for (f, fac) in inst.facilities.iter().enumerate() {
        for t in 1..=inst.slots() {
            v += prices.hi(f, t) * fac.capacity as f64
                - prices.lo(f, t) * fac.demand[(t - 1) as usize] as f64;
        }
    }
    v
}

/// Relative-change stopping rule on the summed subproblem values. A zero
/// latest sum counts as converged only when the previous sum was also
/// zero.
pub fn converged(sum_g_history: &[f64], delta: f64) -> bool {
    let n = sum_g_history.len();
    if n < 2 {
        return false;
    }
    let (prev, last) = (sum_g_history[n - 2], sum_g_history[n - 1]);
    if last == 0.0 {
        return prev == 0.0;
    }
    (last - prev).abs() / last.abs() < delta
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatorParams {
    pub delta: f64,
    pub gamma_init: f64,
    pub epsilon: f64,
    pub max_iters: u32,
    pub drop_prob: f64,
    pub per_round_delay_ms: u64,
    /// Repair every iteration's schedules non-destructively so the report
    /// carries a primal value per iteration, not just the final one.
    pub trace_primal: bool,
}

impl Default for CoordinatorParams {
    fn default() -> Self {
        CoordinatorParams {
            delta: 1e-5,
            gamma_init: 0.01,
            epsilon: 1e-3,
            max_iters: 500,
            drop_prob: 0.0,
            per_round_delay_ms: 200,
            trace_primal: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Number of coordination rounds performed.
    pub iterations: u32,
    /// Relaxation value at the center's broadcast prices, one entry per
    /// iteration, computed from exact best responses (a true upper bound
    /// even when the channel was lossy).
    pub dual_series: Vec<f64>,
    /// Summed subproblem values as the center saw them through its
    /// mailboxes; the stopping rule runs on this series.
    pub sum_g_series: Vec<f64>,
    /// Repaired primal value per iteration when tracing was on; the final
    /// entry is always present.
    pub primal_series: Vec<Option<u64>>,
    /// Step size in effect at each iteration.
    pub gamma_series: Vec<f64>,
    pub converged: bool,
    pub simulated_delay_ms: u64,
    pub wall_clock_s: f64,
    pub assignment: Assignment,
    /// Slots parked by the repaired assignment.
    pub objective: u64,
    /// Tightest upper bound seen across all iterations.
    pub best_dual: f64,
    pub repair_moves: Vec<RepairMove>,
    /// Fraction of endpoint-rounds that were served stale values.
    pub stale_fraction: f64,
}

impl RunReport {
    /// Per-iteration trace as CSV. Wall-clock time is deliberately left
    /// out so identical runs produce identical bytes.
    pub fn csv(&self) -> String {
        let mut out = String::from("iteration,dual,primal,gap\n");
        for i in 0..self.iterations as usize {
            let dual = self.dual_series[i];
            match self.primal_series[i] {
                Some(p) => {
                    let _ = writeln!(out, "{},{},{},{}", i, dual, p, dual - p as f64);
                }
                None => {
                    let _ = writeln!(out, "{},{},,", i, dual);
                }
            }
        }
        out
    }

    pub fn summary_line(&self) -> String {
        format!(
            "iterations={} converged={} simulated_delay_ms={} objective={} best_dual={} stale_fraction={}",
            self.iterations,
            self.converged,
            self.simulated_delay_ms,
            self.objective,
            self.best_dual,
            self.stale_fraction,
        )
    }
}

fn assignment_from(results: &[SubproblemResult]) -> Assignment {
    Assignment {
        choices: results
            .iter()
            .map(|r| {
                Some(AvChoice {
                    facility: r.facility,
                    slots: r.slots.clone(),
                })
            })
            .collect(),
    }
}

/// Runs the full distributed loop: broadcast prices, best-respond, gather,
/// step, test the stopping rule, and finally repair the vehicles' latest
/// schedules into a feasible assignment.
pub fn run_distributed(
    inst: &Instance,
    params: &CoordinatorParams,
    seed: u64,
) -> Result<RunReport, Error> {
    let started = Instant::now();
    let n_f = inst.n_facilities();
    let d = inst.slots();
    let n_k = inst.n_avs();
    let mut channel = ChannelModel::new(params.drop_prob, seed);
    channel.per_round_delay_ms = params.per_round_delay_ms;

    let mut prices = PriceVector::zeros(n_f, d);
    let mut steps = StepState::new(n_f, d, params.gamma_init, params.epsilon);
    let mut av_mail: Vec<Mailbox<PriceVector>> = (0..n_k)
        .map(|_| Mailbox::new(PriceVector::zeros(n_f, d)))
        .collect();
    let mut center_mail: Vec<Mailbox<SubproblemResult>> = (0..n_k)
        .map(|k| {
            Mailbox::new(SubproblemResult {
                av: k,
                facility: 0,
                slots: Vec::new(),
                value: 0.0,
            })
        })
        .collect();
    let mut stats = DeliveryStats::default();

    let mut dual_series: Vec<f64> = Vec::new();
    let mut sum_g_series: Vec<f64> = Vec::new();
    let mut primal_series: Vec<Option<u64>> = Vec::new();
    let mut gamma_series: Vec<f64> = Vec::new();
    let mut converged_flag = false;

    let mut i: u32 = 0;
    // The loop yields the final round's self-computed schedules; recovery
    // starts from what the vehicles last decided, not from the possibly
    // stale mailbox view at the center.
    let last_results = loop {
        let downs: Vec<PriceVector> = vec![prices.clone(); n_k];
        netsim::deliver_round(&downs, &mut av_mail, &channel, i as u64, Direction::Down, &mut stats);

        let results: Result<Vec<SubproblemResult>, Error> = (0..n_k)
            .into_par_iter()
            .map(|k| solve_subproblem(inst, av_mail[k].value(), k))
            .collect();
        let results = results?;

        netsim::deliver_round(&results, &mut center_mail, &channel, i as u64, Direction::Up, &mut stats);

        let sum_g: f64 = center_mail.iter().map(|m| m.value().value).sum();
        let mut totals = vec![0u32; n_f * d as usize];
        for m in &center_mail {
            let r = m.value();
            for &t in &r.slots {
                totals[r.facility * d as usize + (t - 1) as usize] += 1;
            }
        }

        let dual = if params.drop_prob == 0.0 {
            // No loss means every vehicle best-responded to the broadcast
            // prices, so the gathered values already price the relaxation.
            dual_objective(&prices, &results.iter().map(|r| r.value).collect::<Vec<_>>(), inst)
        } else {
            let g_true: Result<Vec<f64>, Error> = (0..n_k)
                .into_par_iter()
                .map(|k| solve_subproblem(inst, &prices, k).map(|r| r.value))
                .collect();
            dual_objective(&prices, &g_true?, inst)
        };

        dual_series.push(dual);
        sum_g_series.push(sum_g);
        gamma_series.push(steps.gamma_hi[0]);
        primal_series.push(if params.trace_primal {
            recover_primal(inst, &assignment_from(&results))
                .ok()
                .map(|r| objective(&r.assignment))
        } else {
            None
        });
        if i >= 1 && converged(&sum_g_series, params.delta) {
            converged_flag = true;
            break results;
        }
        if i + 1 >= params.max_iters.max(1) {
            break results;
        }

        prices = update_prices(&prices, &totals, inst, &steps);
        steps.advance(&sum_g_series);
        i += 1;
    };

    let iterations = dual_series.len() as u32;
    let repair = recover_primal(inst, &assignment_from(&last_results))?;
    let violations = check_feasibility(inst, &repair.assignment);
    if !violations.is_empty() {
        return Err(Error::RecoveryFailed {
            facility: 0,
            slot: 0,
            detail: format!(
                "repaired schedule still violates {} constraints; first: {}",
                violations.len(),
                violations[0]
            ),
            moves: repair.moves,
        });
    }
    let obj = objective(&repair.assignment);
    *primal_series.last_mut().unwrap() = Some(obj);

    let best_dual = dual_series.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RunReport {
        iterations,
        dual_series,
        sum_g_series,
        primal_series,
        gamma_series,
        converged: converged_flag,
        simulated_delay_ms: iterations as u64 * channel.per_round_delay_ms,
        wall_clock_s: started.elapsed().as_secs_f64(),
        assignment: repair.assignment,
        objective: obj,
        best_dual,
        repair_moves: repair.moves,
        stale_fraction: netsim::stale_fraction(&stats),
    })
}
