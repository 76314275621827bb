//! Exact reference solver for small instances.
//!
//! Depth-first search over each vehicle's facility choice, in vehicle id
//! order with facility ids ascending, so the first optimum found is the
//! one reported and reruns reproduce it byte for byte. Once every vehicle
//! has a facility, the remaining per-facility slot scheduling is solved
//! exactly as a maximum flow with lower bounds (minimum stays and demand
//! floors become lower bounds, capacities become upper bounds). Three
//! prunings keep the tree small: an optimistic bound from window lengths
//! and capacity profiles, a demand-coverage count, and a minimum-stay
//! versus capacity check. A node budget turns oversized searches into an
//! explicit error instead of a wrong or slow answer.

use crate::error::Error;
use crate::instance::{Instance, Slot};
use crate::model::{
    check_feasibility, feasible_window, objective, Assignment, AvChoice,
};

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Optimal {
        assignment: Assignment,
        objective: u64,
    },
    Infeasible {
        reason: String,
    },
}

const INF: i64 = 1 << 40;

struct FlowEdge {
    to: usize,
    rev: usize,
    cap: i64,
}

struct FlowNet {
    g: Vec<Vec<FlowEdge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            g: (0..n).map(|_| Vec::new()).collect(),
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: i64) -> (usize, usize) {
        let a = self.g[u].len();
        let b = self.g[v].len();
        self.g[u].push(FlowEdge { to: v, rev: b, cap });
        self.g[v].push(FlowEdge { to: u, rev: a, cap: 0 });
        (u, a)
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for e in &self.g[u] {
                if e.cap > 0 && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, limit: i64) -> i64 {
        if u == t {
            return limit;
        }
        while self.iter[u] < self.g[u].len() {
            let i = self.iter[u];
            let (to, cap) = {
                let e = &self.g[u][i];
                (e.to, e.cap)
            };
            if cap > 0 && self.level[to] == self.level[u] + 1 {
                let pushed = self.dfs(to, t, limit.min(cap));
                if pushed > 0 {
                    let rev = self.g[u][i].rev;
                    self.g[u][i].cap -= pushed;
                    self.g[to][rev].cap += pushed;
                    return pushed;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    fn maxflow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(s, t, INF);
                if pushed == 0 {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }
}

/// Best slot schedule for the vehicles committed to facility `f`:
/// maximizes total parked slots subject to windows, minimum stays, demand
/// floors and the capacity ceiling. Returns one sorted slot set per entry
/// of `avs`, or None when no schedule exists.
fn facility_max_parking(
    inst: &Instance,
    f: usize,
    avs: &[usize],
    windows: &[(Slot, Slot)],
) -> Option<Vec<Vec<Slot>>> {
    let d = inst.slots() as usize;
    let fac = &inst.facilities[f];
    if avs.is_empty() {
        if fac.demand.iter().any(|&r| r > 0) {
            return None;
        }
        return Some(Vec::new());
    }

    // Nodes: source, sink, one per vehicle, one per slot, then the
    // auxiliary pair that absorbs the lower bounds.
    let s = 0;
    let t = 1;
    let av_base = 2;
    let slot_base = av_base + avs.len();
    let n = slot_base + d + 2;
    let s_star = n - 2;
    let t_star = n - 1;
    let mut net = FlowNet::new(n);
    let mut balance = vec![0i64; n];

    let mut av_slot_edges: Vec<Vec<(Slot, usize, usize)>> = Vec::with_capacity(avs.len());
    for (i, (&k, &(lo, hi))) in avs.iter().zip(windows).enumerate() {
        let stay = inst.plan(k, f).stay.unwrap() as i64;
        let len = (hi - lo + 1) as i64;
        debug_assert!(stay <= len);
        net.add(s, av_base + i, len - stay);
        balance[av_base + i] += stay;
        balance[s] -= stay;
        let mut edges = Vec::with_capacity(len as usize);
        for tt in lo..=hi {
            let h = net.add(av_base + i, slot_base + (tt - 1) as usize, 1);
            edges.push((tt, h.0, h.1));
        }
        av_slot_edges.push(edges);
    }
    for tt in 0..d {
        let rho = fac.demand[tt] as i64;
        let cap = fac.capacity as i64;
        net.add(slot_base + tt, t, cap - rho);
        balance[t] += rho;
        balance[slot_base + tt] -= rho;
    }

    let circ = net.add(t, s, INF);
    let mut need = 0;
    for (w, &b) in balance.iter().enumerate() {
        if b > 0 {
            net.add(s_star, w, b);
            need += b;
        } else if b < 0 {
            net.add(w, t_star, -b);
        }
    }
    if net.maxflow(s_star, t_star) < need {
        return None;
    }
    // Cut the recirculation edge in both directions before maximizing.
    let rev = net.g[circ.0][circ.1].rev;
    net.g[circ.0][circ.1].cap = 0;
    net.g[s][rev].cap = 0;
    let _ = net.maxflow(s, t);

    let mut out = Vec::with_capacity(avs.len());
    for edges in &av_slot_edges {
        let mut slots = Vec::new();
        for &(tt, u, idx) in edges {
            if net.g[u][idx].cap == 0 {
                slots.push(tt);
            }
        }
        out.push(slots);
    }
    Some(out)
}

struct Search<'a> {
    inst: &'a Instance,
    feas: Vec<Vec<usize>>,
    windows: Vec<Vec<Option<(Slot, Slot)>>>,
    suffix_best: Vec<u64>,
    /// Demanded (facility, slot, rho) triples, for the coverage prune.
    demanded: Vec<(usize, Slot, u32)>,
    choice: Vec<usize>,
    /// Per (facility, slot): committed vehicles whose window covers it.
    n_cover: Vec<u32>,
    /// Per (facility, slot): uncommitted vehicles that could cover it.
    free_cover: Vec<u32>,
    /// Per facility: sum over slots of min(capacity, committed cover).
    cap_profile: Vec<u64>,
    /// Per facility: sum of committed vehicles' minimum stays.
    min_stay_sum: Vec<u64>,
    visited: u64,
    budget: u64,
    best_value: Option<u64>,
    best: Option<Assignment>,
}

impl<'a> Search<'a> {
    fn idx(&self, f: usize, t: Slot) -> usize {
        f * self.inst.slots() as usize + (t - 1) as usize
    }

    fn commit(&mut self, k: usize, f0: usize) {
        self.choice[k] = f0;
        for &f in &self.feas[k] {
            let (lo, hi) = self.windows[k][f].unwrap();
            for t in lo..=hi {
                let i = self.idx(f, t);
                self.free_cover[i] -= 1;
            }
        }
        let cap = self.inst.facilities[f0].capacity;
        let (lo, hi) = self.windows[k][f0].unwrap();
        for t in lo..=hi {
            let i = self.idx(f0, t);
            if self.n_cover[i] < cap {
                self.cap_profile[f0] += 1;
            }
            self.n_cover[i] += 1;
        }
        self.min_stay_sum[f0] += self.inst.plan(k, f0).stay.unwrap() as u64;
    }

    fn uncommit(&mut self, k: usize, f0: usize) {
        self.min_stay_sum[f0] -= self.inst.plan(k, f0).stay.unwrap() as u64;
        let cap = self.inst.facilities[f0].capacity;
        let (lo, hi) = self.windows[k][f0].unwrap();
        for t in lo..=hi {
            let i = self.idx(f0, t);
            self.n_cover[i] -= 1;
            if self.n_cover[i] < cap {
                self.cap_profile[f0] -= 1;
            }
        }
        for &f in &self.feas[k] {
            let (lo, hi) = self.windows[k][f].unwrap();
            for t in lo..=hi {
                let i = self.idx(f, t);
                self.free_cover[i] += 1;
            }
        }
    }

    fn prune(&self, depth: usize) -> bool {
        if let Some(best) = self.best_value {
            let ub: u64 = self.cap_profile.iter().sum::<u64>() + self.suffix_best[depth];
            if ub <= best {
                return true;
            }
        }
        for &(f, t, rho) in &self.demanded {
            let i = self.idx(f, t);
            if self.n_cover[i] + self.free_cover[i] < rho {
                return true;
            }
        }
        for f in 0..self.inst.n_facilities() {
            if self.min_stay_sum[f] > self.cap_profile[f] {
                return true;
            }
        }
        false
    }

    fn leaf(&mut self) {
        let n_f = self.inst.n_facilities();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_f];
        for (k, &f) in self.choice.iter().enumerate() {
            groups[f].push(k);
        }
        let mut total: u64 = 0;
        let mut schedule: Vec<Option<AvChoice>> = vec![None; self.inst.n_avs()];
        for (f, group) in groups.iter().enumerate() {
            let windows: Vec<(Slot, Slot)> =
                group.iter().map(|&k| self.windows[k][f].unwrap()).collect();
            let Some(sets) = facility_max_parking(self.inst, f, group, &windows) else {
                return;
            };
            for (&k, slots) in group.iter().zip(sets) {
                total += slots.len() as u64;
                schedule[k] = Some(AvChoice { facility: f, slots });
            }
        }
        if self.best_value.map_or(true, |b| total > b) {
            self.best_value = Some(total);
            self.best = Some(Assignment { choices: schedule });
        }
    }

    fn dfs(&mut self, k: usize) -> Result<(), Error> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::OracleLimit {
                visited: self.visited,
            });
        }
        if k == self.inst.n_avs() {
            self.leaf();
            return Ok(());
        }
        if self.prune(k) {
            return Ok(());
        }
        let facilities = self.feas[k].clone();
        for f in facilities {
            self.commit(k, f);
            self.dfs(k + 1)?;
            self.uncommit(k, f);
        }
        Ok(())
    }
}

/// Exhaustive optimum within the node budget: either a provably optimal
/// assignment or a reasoned infeasibility.
pub fn solve_exact(inst: &Instance, limits: &OracleLimits) -> Result<Verdict, Error> {
    let n_k = inst.n_avs();
    let n_f = inst.n_facilities();
    let d = inst.slots();

    let mut feas = Vec::with_capacity(n_k);
    let mut windows = Vec::with_capacity(n_k);
    for k in 0..n_k {
        let mut fs = Vec::new();
        let mut ws = vec![None; n_f];
        for f in 0..n_f {
            if crate::model::facility_feasible(inst, k, f) {
                fs.push(f);
                ws[f] = feasible_window(inst, k, f);
            }
        }
        if fs.is_empty() {
            return Ok(Verdict::Infeasible {
                reason: format!(
                    "AV {k} cannot reach any facility within its distance and window limits"
                ),
            });
        }
        feas.push(fs);
        windows.push(ws);
    }

    let mut suffix_best = vec![0u64; n_k + 1];
    for k in (0..n_k).rev() {
        let best = feas[k]
            .iter()
            .map(|&f| {
                let (lo, hi) = windows[k][f].unwrap();
                (hi - lo + 1) as u64
            })
            .max()
            .unwrap();
        suffix_best[k] = suffix_best[k + 1] + best;
    }

    let mut demanded = Vec::new();
    for (f, fac) in inst.facilities.iter().enumerate() {
        for t in 1..=d {
            let rho = fac.demand[(t - 1) as usize];
            if rho > 0 {
                demanded.push((f, t, rho));
            }
        }
    }

    let mut free_cover = vec![0u32; n_f * d as usize];
    for k in 0..n_k {
        for &f in &feas[k] {
            let (lo, hi) = windows[k][f].unwrap();
            for t in lo..=hi {
                free_cover[f * d as usize + (t - 1) as usize] += 1;
            }
        }
    }

    let mut search = Search {
        inst,
        feas,
        windows,
        suffix_best,
        demanded,
        choice: vec![0; n_k],
        n_cover: vec![0; n_f * d as usize],
        free_cover,
        cap_profile: vec![0; n_f],
        min_stay_sum: vec![0; n_f],
        visited: 0,
        budget: limits.max_nodes,
        best_value: None,
        best: None,
    };
    search.dfs(0)?;

    match (search.best_value, search.best) {
        (Some(objective), Some(assignment)) => Ok(Verdict::Optimal {
            assignment,
            objective,
        }),
        _ => Ok(Verdict::Infeasible {
            reason: "no facility assignment satisfies demand and capacity".into(),
        }),
    }
}

/// True iff `a` is feasible and matches the exact optimum's value.
pub fn verify_optimal(inst: &Instance, a: &Assignment, limits: &OracleLimits) -> Result<bool, Error> {
    if !check_feasibility(inst, a).is_empty() {
        return Ok(false);
    }
    match solve_exact(inst, limits)? {
        Verdict::Optimal { objective: opt, .. } => Ok(objective(a) == opt),
        Verdict::Infeasible { .. } => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        generate_instance, AvSpec, DistanceMatrix, FacilitySpec, GeneratorConfig, TimeHorizon,
        TravelPlan,
    };

    fn lab(n_avs: usize, n_facilities: usize, slots: u32, capacity: u32) -> Instance {
        let h = TimeHorizon::new(slots, 30.0).unwrap();
        let n_nodes = n_facilities + 1;
        let dm = DistanceMatrix::new(n_nodes, vec![0.0; n_nodes * n_nodes]).unwrap();
        let avs: Vec<AvSpec> = (0..n_avs)
            .map(|id| AvSpec {
                id,
                start_node: n_facilities,
                return_node: n_facilities,
                t_start: 1,
                t_end: slots + 2,
                soc_start: 10.0,
                soc_return: 10.0,
                d_max: 1.0,
                speed_kmh: 30.0,
                consumption_kwh_per_km: 0.15,
            })
            .collect();
        let facs: Vec<FacilitySpec> = (0..n_facilities)
            .map(|id| FacilitySpec {
                id,
                node: id,
                capacity,
                charge_rate_kw: 7.2,
                demand: vec![0; slots as usize],
            })
            .collect();
        let plans: Vec<TravelPlan> = (0..n_avs * n_facilities)
            .map(|_| TravelPlan {
                m_to: 1,
                m_back: 1,
                e_to: 0.0,
                e_back: 0.0,
                stay: Some(1),
            })
            .collect();
        Instance::new(h, dm, avs, facs, plans, None).unwrap()
    }

    #[test]
    fn single_vehicle_parks_its_whole_window() {
        let mut inst = lab(1, 1, 4, 1);
        inst.avs[0].t_end = 5; // window [2, 3]
        match solve_exact(&inst, &OracleLimits::default()).unwrap() {
            Verdict::Optimal {
                assignment,
                objective,
            } => {
                assert_eq!(objective, 2);
                assert_eq!(
                    assignment.choices[0].as_ref().unwrap().slots,
                    vec![2, 3]
                );
            }
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn two_vehicles_partition_a_unit_capacity_window() {
        let mut inst = lab(2, 1, 6, 1);
        inst.avs[0].t_end = 6; // both windows [2, 4]
        inst.avs[1].t_end = 6;
        match solve_exact(&inst, &OracleLimits::default()).unwrap() {
            Verdict::Optimal { objective, assignment } => {
                assert_eq!(objective, 3);
                assert!(check_feasibility(&inst, &assignment).is_empty());
            }
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn uncoverable_demand_is_reported_infeasible() {
        let mut inst = lab(1, 1, 6, 3);
        inst.facilities[0].demand[3] = 2; // one vehicle cannot be two
        match solve_exact(&inst, &OracleLimits::default()).unwrap() {
            Verdict::Infeasible { reason } => assert!(!reason.is_empty()),
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn stranded_vehicle_makes_the_instance_infeasible() {
        let mut inst = lab(2, 2, 6, 2);
        inst.plans[1 * 2].stay = None;
        inst.plans[1 * 2 + 1].stay = None;
        match solve_exact(&inst, &OracleLimits::default()).unwrap() {
            Verdict::Infeasible { reason } => assert!(reason.contains("AV 1")),
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn node_budget_stops_the_search_cleanly() {
        let inst = lab(4, 2, 6, 2);
        match solve_exact(&inst, &OracleLimits { max_nodes: 1 }) {
            Err(Error::OracleLimit { visited }) => assert!(visited >= 1),
            other => panic!("expected limit error, got {other:?}"),
        }
    }

    #[test]
    fn demand_floors_force_occupancy() {
        let mut inst = lab(2, 2, 6, 2);
        inst.facilities[1].demand[4] = 2;
        match solve_exact(&inst, &OracleLimits::default()).unwrap() {
            Verdict::Optimal { assignment, .. } => {
                let occ = assignment.occupancy(2, 6);
                assert!(occ[1 * 6 + 4] >= 2);
                assert!(check_feasibility(&inst, &assignment).is_empty());
            }
            v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn verify_optimal_accepts_the_optimum_and_rejects_less() {
        let mut inst = lab(1, 1, 4, 1);
        inst.avs[0].t_end = 5;
        let Verdict::Optimal { assignment, .. } =
            solve_exact(&inst, &OracleLimits::default()).unwrap()
        else {
            panic!("expected optimum");
        };
        assert!(verify_optimal(&inst, &assignment, &OracleLimits::default()).unwrap());

        let mut worse = assignment.clone();
        worse.choices[0].as_mut().unwrap().slots.pop();
        assert!(!verify_optimal(&inst, &worse, &OracleLimits::default()).unwrap());
    }

    #[test]
    fn repeated_solves_return_identical_assignments() {
        let inst = generate_instance(&GeneratorConfig::new(5, 2, 10, 42)).unwrap();
        let a = solve_exact(&inst, &OracleLimits::default()).unwrap();
        let b = solve_exact(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(a, b);
    }

    /// Enumerates every (facility, slot subset) combination directly.
    fn exhaustive_optimum(inst: &Instance) -> Option<u64> {
        let n_k = inst.n_avs();
        let mut options: Vec<Vec<(usize, Vec<Slot>)>> = Vec::new();
        for k in 0..n_k {
            let mut per_av = Vec::new();
            for f in 0..inst.n_facilities() {
                if !crate::model::facility_feasible(inst, k, f) {
                    continue;
                }
                let (lo, hi) = feasible_window(inst, k, f).unwrap();
                let len = (hi - lo + 1) as u32;
                let stay = inst.plan(k, f).stay.unwrap();
                for mask in 0u32..(1 << len) {
                    if mask.count_ones() < stay {
                        continue;
                    }
                    let slots: Vec<Slot> =
                        (0..len).filter(|b| mask >> b & 1 == 1).map(|b| lo + b).collect();
                    per_av.push((f, slots));
                }
            }
            if per_av.is_empty() {
                return None;
            }
            options.push(per_av);
        }

        let mut best: Option<u64> = None;
        let mut pick = vec![0usize; n_k];
        loop {
            let a = Assignment {
                choices: (0..n_k)
                    .map(|k| {
                        let (f, slots) = &options[k][pick[k]];
                        Some(AvChoice {
                            facility: *f,
                            slots: slots.clone(),
                        })
                    })
                    .collect(),
            };
            if check_feasibility(inst, &a).is_empty() {
                let v = objective(&a);
                if best.map_or(true, |b| v > b) {
                    best = Some(v);
                }
            }
            let mut k = 0;
            loop {
                if k == n_k {
                    return best;
                }
                pick[k] += 1;
                if pick[k] < options[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn matches_exhaustive_enumeration_on_tiny_instances() {
        let mut checked = 0;
        for seed in 0..40u64 {
            let Ok(inst) = generate_instance(&GeneratorConfig::new(2, 2, 8, seed)) else {
                continue;
            };
            // Keep the brute side affordable.
            let windows_small = (0..inst.n_avs()).all(|k| {
                (0..inst.n_facilities()).all(|f| {
                    feasible_window(&inst, k, f)
                        .map_or(true, |(lo, hi)| hi - lo + 1 <= 8)
                })
            });
            if !windows_small {
                continue;
            }
            let brute = exhaustive_optimum(&inst);
            match solve_exact(&inst, &OracleLimits::default()).unwrap() {
                Verdict::Optimal { objective: got, assignment } => {
                    assert!(check_feasibility(&inst, &assignment).is_empty());
                    assert_eq!(Some(got), brute, "seed {seed}");
                }
                Verdict::Infeasible { .. } => assert_eq!(None, brute, "seed {seed}"),
            }
            checked += 1;
        }
        assert!(checked >= 10, "only {checked} generated instances were usable");
    }
}
