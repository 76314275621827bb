//! Instance data model, the seeded instance generator, and time-scale
//! conversion.
//!
//! An instance fixes a slotted horizon, a set of locations with pairwise
//! distances, the vehicles (each with an availability window, an energy
//! profile and a detour budget) and the parking facilities (each with a
//! capacity and a per-slot occupancy demand). For every vehicle/facility
//! pair a travel plan is precomputed: leg durations in slots, leg energies,
//! and the minimum stay the vehicle would have to spend parked there.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Error;

/// Slot indices run from 1 to `TimeHorizon::slots` inclusive. Slot 0 is the
/// instant before the horizon starts and is never occupied.
pub type Slot = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeHorizon {
    /// Number of slots, written D elsewhere.
    pub slots: u32,
    /// Real-time length of one slot.
    pub slot_minutes: f64,
}

impl TimeHorizon {
    pub fn new(slots: u32, slot_minutes: f64) -> Result<Self, Error> {
        if slots < 1 {
            return Err(Error::InvalidConfig("horizon needs at least one slot".into()));
        }
        if !(slot_minutes > 0.0) || !slot_minutes.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "slot length must be positive, got {slot_minutes}"
            )));
        }
        Ok(TimeHorizon { slots, slot_minutes })
    }

    pub fn minutes(&self) -> f64 {
        self.slots as f64 * self.slot_minutes
    }

    pub fn slot_hours(&self) -> f64 {
        self.slot_minutes / 60.0
    }
}

/// Pairwise distances in kilometers. Not required to be symmetric; the
/// diagonal must be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self, Error> {
        if d.len() != n * n {
            return Err(Error::InvalidInstance(format!(
                "distance matrix for {n} nodes needs {} entries, got {}",
                n * n,
                d.len()
            )));
        }
        for (i, &v) in d.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "distance entry {i} is {v}, must be finite and nonnegative"
                )));
            }
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "distance matrix diagonal entry {i} is {}, must be 0",
                    d[i * n + i]
                )));
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    pub fn from_points(points: &[(f64, f64)]) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                d[i * n + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.d[from * self.n + to]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.d.chunks(self.n)
    }
}

/// One vehicle. `t_start` is the first slot in which it may begin its trip
/// to a facility (0 means it is already free before the horizon begins);
/// `t_end` is the slot by whose start it must be back at its return node.
/// `t_end` larger than the horizon means it does not return within the
/// horizon at all.
#[derive(Debug, Clone, PartialEq)]
pub struct AvSpec {
    pub id: usize,
    pub start_node: usize,
    pub return_node: usize,
    pub t_start: u32,
    pub t_end: u32,
    /// State of charge when leaving the start node, kWh.
    pub soc_start: f64,
    /// State of charge required back at the return node, kWh.
    pub soc_return: f64,
    /// Detour budget: total travel distance via a facility must not exceed
    /// this, km.
    pub d_max: f64,
    pub speed_kmh: f64,
    pub consumption_kwh_per_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacilitySpec {
    pub id: usize,
    pub node: usize,
    /// Maximum number of vehicles parked in any one slot.
    pub capacity: u32,
    pub charge_rate_kw: f64,
    /// Occupancy demand per slot, indexed t-1 for t in 1..=D.
    pub demand: Vec<u32>,
}

/// Precomputed travel data for one (vehicle, facility) pair. `stay` is the
/// minimum number of parked slots; `None` marks the pair as unusable because
/// the vehicle's window at this facility has no room for any stay.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelPlan {
    /// Slots spent driving from the start node to the facility.
    pub m_to: u32,
    /// Slots spent driving from the facility to the return node.
    pub m_back: u32,
    /// Energy for the first leg, kWh.
    pub e_to: f64,
    /// Energy for the return leg, kWh.
    pub e_back: f64,
    pub stay: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub horizon: TimeHorizon,
    pub distances: DistanceMatrix,
    pub avs: Vec<AvSpec>,
    pub facilities: Vec<FacilitySpec>,
    /// Row-major over (av, facility).
    pub(crate) plans: Vec<TravelPlan>,
    /// Seed the instance was generated from, if any.
    pub rng_seed: Option<u64>,
}

impl Instance {
    pub fn new(
        horizon: TimeHorizon,
        distances: DistanceMatrix,
        avs: Vec<AvSpec>,
        facilities: Vec<FacilitySpec>,
        plans: Vec<TravelPlan>,
        rng_seed: Option<u64>,
    ) -> Result<Self, Error> {
        let n = distances.n_nodes();
        if plans.len() != avs.len() * facilities.len() {
            return Err(Error::InvalidInstance(format!(
                "plan table has {} entries, expected {}",
                plans.len(),
                avs.len() * facilities.len()
            )));
        }
        for (k, av) in avs.iter().enumerate() {
            if av.id != k {
                return Err(Error::InvalidInstance(format!(
                    "AV ids must be contiguous from 0, found {} at position {k}",
                    av.id
                )));
            }
            if av.start_node >= n || av.return_node >= n {
                return Err(Error::InvalidInstance(format!(
                    "AV {k} references a node outside the distance matrix"
                )));
            }
            if av.t_end < av.t_start {
                return Err(Error::InvalidInstance(format!(
                    "AV {k} has t_end {} before t_start {}",
                    av.t_end, av.t_start
                )));
            }
            if !(av.speed_kmh > 0.0) {
                return Err(Error::InvalidInstance(format!("AV {k} speed must be positive")));
            }
            if av.d_max < 0.0 || av.soc_start < 0.0 || av.soc_return < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "AV {k} has a negative distance budget or state of charge"
                )));
            }
        }
        for (f, fac) in facilities.iter().enumerate() {
            if fac.id != f {
                return Err(Error::InvalidInstance(format!(
                    "facility ids must be contiguous from 0, found {} at position {f}",
                    fac.id
                )));
            }
            if fac.node >= n {
                return Err(Error::InvalidInstance(format!(
                    "facility {f} references a node outside the distance matrix"
                )));
            }
            if fac.demand.len() != horizon.slots as usize {
                return Err(Error::InvalidInstance(format!(
                    "facility {f} has {} demand entries, expected {}",
                    fac.demand.len(),
                    horizon.slots
                )));
            }
            if let Some(&rho) = fac.demand.iter().find(|&&rho| rho > fac.capacity) {
                return Err(Error::InvalidInstance(format!(
                    "facility {f} demands {rho} vehicles but holds only {}; no schedule can satisfy that",
                    fac.capacity
                )));
            }
        }
        for (idx, plan) in plans.iter().enumerate() {
            if plan.stay == Some(0) {
                let (k, f) = (idx / facilities.len(), idx % facilities.len());
                return Err(Error::InvalidInstance(format!(
                    "plan for AV {k} at facility {f} has a zero minimum stay"
                )));
            }
        }
        Ok(Instance {
            horizon,
            distances,
            avs,
            facilities,
            plans,
            rng_seed,
        })
    }

    pub fn n_avs(&self) -> usize {
        self.avs.len()
    }

    pub fn n_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn slots(&self) -> u32 {
        self.horizon.slots
    }

    pub fn plan(&self, av: usize, facility: usize) -> &TravelPlan {
        &self.plans[av * self.facilities.len() + facility]
    }

    pub fn plans(&self) -> &[TravelPlan] {
        &self.plans
    }

    /// Round-trip distance for AV `k` via facility `f`, km.
    pub fn detour_km(&self, k: usize, f: usize) -> f64 {
        let av = &self.avs[k];
        let node = self.facilities[f].node;
        self.distances.get(av.start_node, node) + self.distances.get(node, av.return_node)
    }
}

/// Number of whole slots needed to drive `distance_km` at `speed_kmh`.
pub fn travel_slots(distance_km: f64, speed_kmh: f64, horizon: &TimeHorizon) -> u32 {
    let minutes = distance_km * 60.0 / speed_kmh;
    (minutes / horizon.slot_minutes).ceil() as u32
}

/// Leg durations and energies for AV `k` parking at facility `f`.
/// Returns (m_to, m_back, e_to, e_back).
pub fn travel_legs(
    av: &AvSpec,
    facility: &FacilitySpec,
    horizon: &TimeHorizon,
    distances: &DistanceMatrix,
) -> (u32, u32, f64, f64) {
    let d_to = distances.get(av.start_node, facility.node);
    let d_back = distances.get(facility.node, av.return_node);
    (
        travel_slots(d_to, av.speed_kmh, horizon),
        travel_slots(d_back, av.speed_kmh, horizon),
        d_to * av.consumption_kwh_per_km,
        d_back * av.consumption_kwh_per_km,
    )
}

/// How the minimum stay of a (vehicle, facility) pair is chosen.
#[derive(Debug, Clone, Copy)]
pub enum StayMode {
    /// Uniform over everything the window allows.
    Random { seed: u64 },
    /// Just long enough to charge from the arrival state to the required
    /// departure state at the facility's rate.
    Charging,
}

/// Minimum stay for AV at facility, or `None` when the window between the
/// two legs has no room for any stay at all.
pub fn required_stay(
    av: &AvSpec,
    facility: &FacilitySpec,
    horizon: &TimeHorizon,
    distances: &DistanceMatrix,
    mode: StayMode,
) -> Option<u32> {
    let (m_to, m_back, e_to, e_back) = travel_legs(av, facility, horizon, distances);
    let room = av.t_end as i64 - m_back as i64 - av.t_start as i64 - m_to as i64;
    if room < 1 {
        return None;
    }
    let stay = match mode {
        StayMode::Random { seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.random_range(1..=room as u32)
        }
        StayMode::Charging => {
            let arrival = av.soc_start - e_to;
            let needed = av.soc_return + e_back;
            let deficit = (needed - arrival).max(0.0);
            let per_slot = facility.charge_rate_kw * horizon.slot_hours();
            ((deficit / per_slot).ceil() as u32).max(1)
        }
    };
    Some(stay)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityRule {
    /// Every facility holds half the fleet, rounded up.
    HalfOfAvs,
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n_avs: usize,
    pub n_facilities: usize,
    pub slots: u32,
    pub horizon_minutes: f64,
    /// Side of the square all locations are drawn from, km.
    pub area_km: f64,
    pub speed_kmh: f64,
    /// Detour budgets are drawn uniformly from this range, km.
    pub dmax_range_km: (f64, f64),
    pub capacity: CapacityRule,
    pub consumption_kwh_per_km: f64,
    pub charge_rate_kw: f64,
    pub battery_kwh: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(n_avs: usize, n_facilities: usize, slots: u32, seed: u64) -> Self {
        GeneratorConfig {
            n_avs,
            n_facilities,
            slots,
            horizon_minutes: 120.0,
            area_km: 5.0,
            speed_kmh: 30.0,
            dmax_range_km: (4.0, 5.0),
            capacity: CapacityRule::HalfOfAvs,
            consumption_kwh_per_km: 0.15,
            charge_rate_kw: 7.2,
            battery_kwh: 60.0,
            seed,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n_avs < 1 || self.n_facilities < 1 {
            return Err(Error::InvalidConfig(
                "need at least one AV and one facility".into(),
            ));
        }
        if self.slots < 1 {
            return Err(Error::InvalidConfig("need at least one slot".into()));
        }
        if !(self.horizon_minutes > 0.0) {
            return Err(Error::InvalidConfig("horizon must be positive".into()));
        }
        if !(self.area_km > 0.0) {
            return Err(Error::InvalidConfig("area must be positive".into()));
        }
        if !(self.speed_kmh > 0.0) {
            return Err(Error::InvalidConfig("speed must be positive".into()));
        }
        let (lo, hi) = self.dmax_range_km;
        if !(lo > 0.0) || hi < lo {
            return Err(Error::InvalidConfig(format!(
                "detour budget range ({lo}, {hi}) must be positive and ordered"
            )));
        }
        if !(self.consumption_kwh_per_km >= 0.0)
            || !(self.charge_rate_kw > 0.0)
            || !(self.battery_kwh > 0.0)
        {
            return Err(Error::InvalidConfig(
                "energy parameters must be positive".into(),
            ));
        }
        if let CapacityRule::Fixed(0) = self.capacity {
            return Err(Error::InvalidConfig("capacity must be at least 1".into()));
        }
        Ok(())
    }
}

/// How many consecutive rejected vehicle samples abort generation.
pub const MAX_CONSECUTIVE_REJECTS: u32 = 1000;

struct AvDraw {
    start: (f64, f64),
    ret: (f64, f64),
    spec_wo_nodes: AvSpec,
    plans: Vec<TravelPlan>,
}

/// Draws an instance from the configured distributions, deterministically in
/// `cfg.seed`. Facility locations come first, then vehicles one at a time;
/// a vehicle draw is rejected and retried when no facility is reachable
/// within its detour budget or its window leaves no room at any reachable
/// facility. Per-slot demand is drawn last, bounded by the number of
/// vehicles actually able to park at that facility in that slot divided by
/// the facility count.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance, Error> {
    cfg.validate()?;
    let horizon = TimeHorizon::new(cfg.slots, cfg.horizon_minutes / cfg.slots as f64)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let d = cfg.slots;
    let n_fac = cfg.n_facilities;

    let fac_points: Vec<(f64, f64)> = (0..n_fac)
        .map(|_| {
            (
                rng.random_range(0.0..cfg.area_km),
                rng.random_range(0.0..cfg.area_km),
            )
        })
        .collect();

    let capacity = match cfg.capacity {
        CapacityRule::HalfOfAvs => ((cfg.n_avs as u32) + 1) / 2,
        CapacityRule::Fixed(c) => c,
    };

    let mut drawn: Vec<AvDraw> = Vec::with_capacity(cfg.n_avs);
    let mut rejects = 0u32;
    while drawn.len() < cfg.n_avs {
        match draw_av(&mut rng, cfg, &horizon, &fac_points, drawn.len()) {
            Some(av) => {
                rejects = 0;
                drawn.push(av);
            }
            None => {
                rejects += 1;
                if rejects >= MAX_CONSECUTIVE_REJECTS {
                    return Err(Error::GenerationFailed { attempts: rejects });
                }
            }
        }
    }

    // Assemble node list: facilities first, then each vehicle's start and
    // return location.
    let mut points = fac_points;
    for (k, av) in drawn.iter_mut().enumerate() {
        av.spec_wo_nodes.start_node = n_fac + 2 * k;
        av.spec_wo_nodes.return_node = n_fac + 2 * k + 1;
        points.push(av.start);
        points.push(av.ret);
    }
    let distances = DistanceMatrix::from_points(&points);
    let avs: Vec<AvSpec> = drawn.iter().map(|a| a.spec_wo_nodes.clone()).collect();
    let plans: Vec<TravelPlan> = drawn.into_iter().flat_map(|a| a.plans).collect();

    // Facility f sits at node f. A pair is usable when the detour fits the
    // budget and the window leaves room for the minimum stay.
    let mut usable = vec![false; avs.len() * n_fac];
    for (k, av) in avs.iter().enumerate() {
        for f in 0..n_fac {
            let detour = distances.get(av.start_node, f) + distances.get(f, av.return_node);
            usable[k * n_fac + f] = detour <= av.d_max && pair_usable(av, &plans[k * n_fac + f], d);
        }
    }

    let mut facilities = Vec::with_capacity(n_fac);
    for f in 0..n_fac {
        let mut demand = Vec::with_capacity(d as usize);
        for t in 1..=d {
            let available = (0..avs.len())
                .filter(|&k| usable[k * n_fac + f] && covers(&avs[k], &plans[k * n_fac + f], d, t))
                .count() as u32;
            let bound = available / n_fac as u32;
            let rho = rng.random_range(0..=bound).min(capacity);
            demand.push(rho);
        }
        facilities.push(FacilitySpec {
            id: f,
            node: f,
            capacity,
            charge_rate_kw: cfg.charge_rate_kw,
            demand,
        });
    }

    Instance::new(horizon, distances, avs, facilities, plans, Some(cfg.seed))
}

fn covers(av: &AvSpec, plan: &TravelPlan, d: u32, t: Slot) -> bool {
    let lo = (av.t_start + plan.m_to).max(1);
    let hi = (av.t_end as i64 - plan.m_back as i64 - 1).min(d as i64);
    (lo as i64) <= t as i64 && (t as i64) <= hi
}

fn pair_usable(av: &AvSpec, plan: &TravelPlan, d: u32) -> bool {
    let stay = match plan.stay {
        Some(s) => s,
        None => return false,
    };
    let lo = (av.t_start + plan.m_to).max(1) as i64;
    let hi = (av.t_end as i64 - plan.m_back as i64 - 1).min(d as i64);
    hi - lo + 1 >= stay as i64
}

fn draw_av(
    rng: &mut ChaCha12Rng,
    cfg: &GeneratorConfig,
    horizon: &TimeHorizon,
    fac_points: &[(f64, f64)],
    id: usize,
) -> Option<AvDraw> {
    let area = cfg.area_km;
    let start = (rng.random_range(0.0..area), rng.random_range(0.0..area));
    let ret = (rng.random_range(0.0..area), rng.random_range(0.0..area));
    let (dlo, dhi) = cfg.dmax_range_km;
    let d_max = rng.random_range(dlo..=dhi);
    let soc_start = rng.random_range(0.4 * cfg.battery_kwh..=0.9 * cfg.battery_kwh);
    let soc_return = rng.random_range(0.3 * cfg.battery_kwh..=0.7 * cfg.battery_kwh);

    let euclid = |a: (f64, f64), b: (f64, f64)| -> f64 {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        (dx * dx + dy * dy).sqrt()
    };

    let legs: Vec<(f64, f64)> = fac_points
        .iter()
        .map(|&p| (euclid(start, p), euclid(p, ret)))
        .collect();
    let reachable: Vec<bool> = legs.iter().map(|&(a, b)| a + b <= d_max).collect();
    if !reachable.iter().any(|&r| r) {
        return None;
    }

    let slot_counts: Vec<(u32, u32)> = legs
        .iter()
        .map(|&(a, b)| {
            (
                travel_slots(a, cfg.speed_kmh, horizon),
                travel_slots(b, cfg.speed_kmh, horizon),
            )
        })
        .collect();

    // Window endpoints are drawn against the slowest reachable facility so
    // the vehicle can make the round trip to any of them.
    let m_to_star = slot_counts
        .iter()
        .zip(&reachable)
        .filter(|(_, &r)| r)
        .map(|((a, _), _)| *a)
        .max()
        .unwrap();
    let m_back_star = slot_counts
        .iter()
        .zip(&reachable)
        .filter(|(_, &r)| r)
        .map(|((_, b), _)| *b)
        .max()
        .unwrap();
    let budget = cfg.slots as i64 - m_to_star as i64 - m_back_star as i64;
    if budget < 0 {
        return None;
    }
    let t_start = rng.random_range(0..=budget as u32);
    let t_end = rng.random_range(0..=budget as u32) + t_start + m_to_star + m_back_star;

    let mut plans = Vec::with_capacity(fac_points.len());
    for f in 0..fac_points.len() {
        let (m_to, m_back) = slot_counts[f];
        let (d_to, d_back) = legs[f];
        let room = t_end as i64 - m_back as i64 - t_start as i64 - m_to as i64;
        let stay = if reachable[f] && room >= 1 {
            Some(rng.random_range(1..=room as u32))
        } else {
            None
        };
        plans.push(TravelPlan {
            m_to,
            m_back,
            e_to: d_to * cfg.consumption_kwh_per_km,
            e_back: d_back * cfg.consumption_kwh_per_km,
            stay,
        });
    }

    let spec = AvSpec {
        id,
        start_node: 0,
        return_node: 0,
        t_start,
        t_end,
        soc_start,
        soc_return,
        d_max,
        speed_kmh: cfg.speed_kmh,
        consumption_kwh_per_km: cfg.consumption_kwh_per_km,
    };

    let usable =
        (0..fac_points.len()).any(|f| reachable[f] && pair_usable(&spec, &plans[f], cfg.slots));
    if !usable {
        return None;
    }

    Some(AvDraw {
        start,
        ret,
        spec_wo_nodes: spec,
        plans,
    })
}

fn ceil_div_u64(a: u64, b: u64) -> u64 {
    (a + b - 1) / b
}

/// Re-expresses the instance on a coarser grid of `new_slots` slots covering
/// the same real-time horizon. Window starts and minimum stays round up,
/// window ends round down, travel durations are recomputed from distances
/// against the new slot length, and each coarse slot demands the maximum
/// demanded by the fine slots it covers. Capacities are unchanged. The
/// result may be infeasible even when the original is feasible.
pub fn rescale_time(inst: &Instance, new_slots: u32) -> Result<Instance, Error> {
    let d = inst.horizon.slots;
    if new_slots < 1 {
        return Err(Error::InvalidConfig("rescaled horizon needs at least one slot".into()));
    }
    if new_slots > d {
        return Err(Error::InvalidConfig(format!(
            "rescaling only coarsens: {new_slots} slots requested, instance has {d}"
        )));
    }
    if new_slots == d {
        return Ok(inst.clone());
    }
    let horizon = TimeHorizon::new(new_slots, inst.horizon.minutes() / new_slots as f64)?;

    let map_up = |t: u32| -> u32 { ceil_div_u64(t as u64 * new_slots as u64, d as u64) as u32 };
    let map_down = |t: u32| -> u32 { (t as u64 * new_slots as u64 / d as u64) as u32 };

    let avs: Vec<AvSpec> = inst
        .avs
        .iter()
        .map(|av| AvSpec {
            t_start: map_up(av.t_start),
            t_end: map_down(av.t_end),
            ..av.clone()
        })
        .collect();

    let n_fac = inst.n_facilities();
    let mut plans = Vec::with_capacity(inst.plans.len());
    for k in 0..inst.n_avs() {
        for f in 0..n_fac {
            let old = inst.plan(k, f);
            let (m_to, m_back, e_to, e_back) =
                travel_legs(&inst.avs[k], &inst.facilities[f], &horizon, &inst.distances);
            plans.push(TravelPlan {
                m_to,
                m_back,
                e_to,
                e_back,
                stay: old.stay.map(map_up),
            });
        }
    }

    let facilities: Vec<FacilitySpec> = inst
        .facilities
        .iter()
        .map(|fac| {
            let mut demand = vec![0u32; new_slots as usize];
            for s in 1..=d {
                let tau = map_up(s);
                let cell = &mut demand[(tau - 1) as usize];
                *cell = (*cell).max(fac.demand[(s - 1) as usize]);
            }
            FacilitySpec {
                demand,
                ..fac.clone()
            }
        })
        .collect();

    Instance::new(
        horizon,
        inst.distances.clone(),
        avs,
        facilities,
        plans,
        inst.rng_seed,
    )
}
