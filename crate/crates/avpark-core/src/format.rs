//! Text formats for instances, assignments, and generator configs.
//!
//! One line-oriented format with a version header and bracketed sections.
//! Field order in the writers is fixed, so serializing the same value
//! twice gives identical bytes. Floats are written with Rust's shortest
//! round-trip formatting and parse back to the same bit pattern.
//!
//! Lines starting with `#` and blank lines are ignored when parsing.

use std::fmt::Write as _;

use crate::error::Error;
use crate::instance::{
    AvSpec, CapacityRule, DistanceMatrix, FacilitySpec, GeneratorConfig, Instance, TimeHorizon,
    TravelPlan,
};
use crate::model::{Assignment, AvChoice};

pub const INSTANCE_HEADER: &str = "avpark-instance v1";
pub const ASSIGNMENT_HEADER: &str = "avpark-assignment v1";
pub const GENERATOR_HEADER: &str = "avpark-generator v1";

pub fn write_instance(inst: &Instance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{INSTANCE_HEADER}");
    let _ = writeln!(s, "[horizon]");
    let _ = writeln!(s, "slots = {}", inst.horizon.slots);
    let _ = writeln!(s, "slot_minutes = {}", inst.horizon.slot_minutes);
    let _ = writeln!(s, "[nodes]");
    let _ = writeln!(s, "count = {}", inst.distances.n_nodes());
    for i in 0..inst.distances.n_nodes() {
        let row: Vec<String> = (0..inst.distances.n_nodes())
            .map(|j| inst.distances.get(i, j).to_string())
            .collect();
        let _ = writeln!(s, "row = {}", row.join(" "));
    }
    let _ = writeln!(s, "[avs]");
    let _ = writeln!(s, "count = {}", inst.avs.len());
    let _ = writeln!(
        s,
        "# id start return t_start t_end soc_start soc_return d_max speed consumption"
    );
    for av in &inst.avs {
        let _ = writeln!(
            s,
            "av = {} {} {} {} {} {} {} {} {} {}",
            av.id,
            av.start_node,
            av.return_node,
            av.t_start,
            av.t_end,
            av.soc_start,
            av.soc_return,
            av.d_max,
            av.speed_kmh,
            av.consumption_kwh_per_km
        );
    }
    let _ = writeln!(s, "[facilities]");
    let _ = writeln!(s, "count = {}", inst.facilities.len());
    let _ = writeln!(s, "# id node capacity charge_rate_kw, then its demand row");
    for fac in &inst.facilities {
        let _ = writeln!(
            s,
            "facility = {} {} {} {}",
            fac.id, fac.node, fac.capacity, fac.charge_rate_kw
        );
        let row: Vec<String> = fac.demand.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(s, "demand = {}", row.join(" "));
    }
    let _ = writeln!(s, "[plans]");
    let _ = writeln!(s, "# av facility m_to m_back e_to e_back stay");
    for (k, av) in inst.avs.iter().enumerate() {
        for f in 0..inst.facilities.len() {
            let p = inst.plan(k, f);
            let stay = match p.stay {
                Some(v) => v.to_string(),
                None => "-".to_string(),
            };
            let _ = writeln!(
                s,
                "plan = {} {} {} {} {} {} {}",
                av.id, f, p.m_to, p.m_back, p.e_to, p.e_back, stay
            );
        }
    }
    let _ = writeln!(s, "[meta]");
    let _ = writeln!(
        s,
        "rng_seed = {}",
        inst.rng_seed.map_or("-".to_string(), |v| v.to_string())
    );
    s
}

pub fn write_assignment(a: &Assignment) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{ASSIGNMENT_HEADER}");
    let _ = writeln!(s, "avs = {}", a.choices.len());
    let _ = writeln!(s, "# park = av facility slots... | unparked = av");
    for (k, c) in a.choices.iter().enumerate() {
        match c {
            Some(c) => {
                let slots: Vec<String> = c.slots.iter().map(|t| t.to_string()).collect();
                let _ = writeln!(s, "park = {} {} {}", k, c.facility, slots.join(" "));
            }
            None => {
                let _ = writeln!(s, "unparked = {k}");
            }
        }
    }
    s
}

pub fn write_generator_config(cfg: &GeneratorConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{GENERATOR_HEADER}");
    let _ = writeln!(s, "[generator]");
    let _ = writeln!(s, "n_avs = {}", cfg.n_avs);
    let _ = writeln!(s, "n_facilities = {}", cfg.n_facilities);
    let _ = writeln!(s, "slots = {}", cfg.slots);
    let _ = writeln!(s, "horizon_minutes = {}", cfg.horizon_minutes);
    let _ = writeln!(s, "area_km = {}", cfg.area_km);
    let _ = writeln!(s, "speed_kmh = {}", cfg.speed_kmh);
    let _ = writeln!(s, "dmax_min_km = {}", cfg.dmax_range_km.0);
    let _ = writeln!(s, "dmax_max_km = {}", cfg.dmax_range_km.1);
    let cap = match cfg.capacity {
        CapacityRule::HalfOfAvs => "half".to_string(),
        CapacityRule::Fixed(v) => v.to_string(),
    };
    let _ = writeln!(s, "capacity = {cap}");
    let _ = writeln!(s, "consumption_kwh_per_km = {}", cfg.consumption_kwh_per_km);
    let _ = writeln!(s, "charge_rate_kw = {}", cfg.charge_rate_kw);
    let _ = writeln!(s, "battery_kwh = {}", cfg.battery_kwh);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    s
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// Next meaningful line as (1-based number, trimmed content).
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.iter.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((i + 1, line));
        }
        None
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Splits `key = rest`, verifying the key.
fn keyed<'a>(line: usize, content: &'a str, key: &str) -> Result<&'a str, Error> {
    let (k, rest) = content
        .split_once('=')
        .ok_or_else(|| parse_err(line, format!("expected `{key} = ...`")))?;
    if k.trim() != key {
        return Err(parse_err(
            line,
            format!("expected key `{key}`, found `{}`", k.trim()),
        ));
    }
    Ok(rest.trim())
}

fn expect_line<'a>(lines: &mut Lines<'a>, what: &str) -> Result<(usize, &'a str), Error> {
    lines
        .next()
        .ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")))
}

fn num<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T, Error> {
    s.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from `{s}`")))
}

fn fields<'a>(s: &'a str) -> Vec<&'a str> {
    s.split_whitespace().collect()
}

pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let mut lines = Lines::new(text);
    let (ln, header) = expect_line(&mut lines, "header")?;
    if header != INSTANCE_HEADER {
        return Err(parse_err(ln, format!("expected `{INSTANCE_HEADER}`")));
    }

    let (ln, sec) = expect_line(&mut lines, "[horizon]")?;
    if sec != "[horizon]" {
        return Err(parse_err(ln, "expected `[horizon]`"));
    }
    let (ln, l) = expect_line(&mut lines, "slots")?;
    let slots: u32 = num(ln, keyed(ln, l, "slots")?, "slots")?;
    let (ln, l) = expect_line(&mut lines, "slot_minutes")?;
    let slot_minutes: f64 = num(ln, keyed(ln, l, "slot_minutes")?, "slot_minutes")?;
    let horizon = TimeHorizon::new(slots, slot_minutes)
        .map_err(|e| parse_err(ln, format!("bad horizon: {e}")))?;

    let (ln, sec) = expect_line(&mut lines, "[nodes]")?;
    if sec != "[nodes]" {
        return Err(parse_err(ln, "expected `[nodes]`"));
    }
    let (ln, l) = expect_line(&mut lines, "count")?;
    let n_nodes: usize = num(ln, keyed(ln, l, "count")?, "node count")?;
    let mut d = Vec::with_capacity(n_nodes * n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = expect_line(&mut lines, "row")?;
        let row = fields(keyed(ln, l, "row")?);
        if row.len() != n_nodes {
            return Err(parse_err(
                ln,
                format!("distance row has {} entries, expected {n_nodes}", row.len()),
            ));
        }
        for v in row {
            d.push(num::<f64>(ln, v, "distance")?);
        }
    }
    let distances =
        DistanceMatrix::new(n_nodes, d).map_err(|e| parse_err(ln, format!("bad distances: {e}")))?;

    let (ln, sec) = expect_line(&mut lines, "[avs]")?;
    if sec != "[avs]" {
        return Err(parse_err(ln, "expected `[avs]`"));
    }
    let (ln, l) = expect_line(&mut lines, "count")?;
    let n_avs: usize = num(ln, keyed(ln, l, "count")?, "AV count")?;
    let mut avs = Vec::with_capacity(n_avs);
    for _ in 0..n_avs {
        let (ln, l) = expect_line(&mut lines, "av")?;
        let f = fields(keyed(ln, l, "av")?);
        if f.len() != 10 {
            return Err(parse_err(ln, format!("av row has {} fields, expected 10", f.len())));
        }
        avs.push(AvSpec {
            id: num(ln, f[0], "av id")?,
            start_node: num(ln, f[1], "start node")?,
            return_node: num(ln, f[2], "return node")?,
            t_start: num(ln, f[3], "t_start")?,
            t_end: num(ln, f[4], "t_end")?,
            soc_start: num(ln, f[5], "soc_start")?,
            soc_return: num(ln, f[6], "soc_return")?,
            d_max: num(ln, f[7], "d_max")?,
            speed_kmh: num(ln, f[8], "speed")?,
            consumption_kwh_per_km: num(ln, f[9], "consumption")?,
        });
    }

    let (ln, sec) = expect_line(&mut lines, "[facilities]")?;
    if sec != "[facilities]" {
        return Err(parse_err(ln, "expected `[facilities]`"));
    }
    let (ln, l) = expect_line(&mut lines, "count")?;
    let n_fac: usize = num(ln, keyed(ln, l, "count")?, "facility count")?;
    let mut facilities = Vec::with_capacity(n_fac);
    for _ in 0..n_fac {
        let (ln, l) = expect_line(&mut lines, "facility")?;
        let f = fields(keyed(ln, l, "facility")?);
        if f.len() != 4 {
            return Err(parse_err(
                ln,
                format!("facility row has {} fields, expected 4", f.len()),
            ));
        }
        let (ln2, l2) = expect_line(&mut lines, "demand")?;
        let demand_fields = fields(keyed(ln2, l2, "demand")?);
        if demand_fields.len() != slots as usize {
            return Err(parse_err(
                ln2,
                format!(
                    "demand row has {} entries, expected {slots}",
                    demand_fields.len()
                ),
            ));
        }
        let mut demand = Vec::with_capacity(slots as usize);
        for v in demand_fields {
            demand.push(num::<u32>(ln2, v, "demand")?);
        }
        facilities.push(FacilitySpec {
            id: num(ln, f[0], "facility id")?,
            node: num(ln, f[1], "facility node")?,
            capacity: num(ln, f[2], "capacity")?,
            charge_rate_kw: num(ln, f[3], "charge rate")?,
            demand,
        });
    }

    let (ln, sec) = expect_line(&mut lines, "[plans]")?;
    if sec != "[plans]" {
        return Err(parse_err(ln, "expected `[plans]`"));
    }
    let mut plans = vec![
        TravelPlan {
            m_to: 0,
            m_back: 0,
            e_to: 0.0,
            e_back: 0.0,
            stay: None,
        };
        n_avs * n_fac
    ];
    let mut seen = vec![false; n_avs * n_fac];
    for _ in 0..n_avs * n_fac {
        let (ln, l) = expect_line(&mut lines, "plan")?;
        let f = fields(keyed(ln, l, "plan")?);
        if f.len() != 7 {
            return Err(parse_err(ln, format!("plan row has {} fields, expected 7", f.len())));
        }
        let k: usize = num(ln, f[0], "plan av")?;
        let fac: usize = num(ln, f[1], "plan facility")?;
        if k >= n_avs || fac >= n_fac {
            return Err(parse_err(ln, format!("plan row ({k}, {fac}) out of range")));
        }
        let stay = if f[6] == "-" {
            None
        } else {
            Some(num::<u32>(ln, f[6], "stay")?)
        };
        plans[k * n_fac + fac] = TravelPlan {
            m_to: num(ln, f[2], "m_to")?,
            m_back: num(ln, f[3], "m_back")?,
            e_to: num(ln, f[4], "e_to")?,
            e_back: num(ln, f[5], "e_back")?,
            stay,
        };
        if seen[k * n_fac + fac] {
            return Err(parse_err(ln, format!("duplicate plan row ({k}, {fac})")));
        }
        seen[k * n_fac + fac] = true;
    }

    let (ln, sec) = expect_line(&mut lines, "[meta]")?;
    if sec != "[meta]" {
        return Err(parse_err(ln, "expected `[meta]`"));
    }
    let (ln, l) = expect_line(&mut lines, "rng_seed")?;
    let seed_text = keyed(ln, l, "rng_seed")?;
    let rng_seed = if seed_text == "-" {
        None
    } else {
        Some(num::<u64>(ln, seed_text, "rng_seed")?)
    };

    if let Some((ln, l)) = lines.next() {
        return Err(parse_err(ln, format!("unexpected trailing content `{l}`")));
    }

    Instance::new(horizon, distances, avs, facilities, plans, rng_seed)
        .map_err(|e| parse_err(0, format!("instance invalid: {e}")))
}

pub fn parse_assignment(text: &str) -> Result<Assignment, Error> {
    let mut lines = Lines::new(text);
    let (ln, header) = expect_line(&mut lines, "header")?;
    if header != ASSIGNMENT_HEADER {
        return Err(parse_err(ln, format!("expected `{ASSIGNMENT_HEADER}`")));
    }
    let (ln, l) = expect_line(&mut lines, "avs")?;
    let n_avs: usize = num(ln, keyed(ln, l, "avs")?, "AV count")?;
    let mut choices: Vec<Option<AvChoice>> = vec![None; n_avs];
    let mut seen = vec![false; n_avs];
    for _ in 0..n_avs {
        let (ln, l) = expect_line(&mut lines, "park/unparked")?;
        let (key, rest) = l
            .split_once('=')
            .ok_or_else(|| parse_err(ln, "expected `park = ...` or `unparked = ...`"))?;
        let rest = rest.trim();
        match key.trim() {
            "park" => {
                let f = fields(rest);
                if f.len() < 2 {
                    return Err(parse_err(ln, "park row needs at least av and facility"));
                }
                let k: usize = num(ln, f[0], "av")?;
                if k >= n_avs {
                    return Err(parse_err(ln, format!("av {k} out of range")));
                }
                let facility: usize = num(ln, f[1], "facility")?;
                let mut slots = Vec::with_capacity(f.len() - 2);
                for v in &f[2..] {
                    slots.push(num::<u32>(ln, v, "slot")?);
                }
                if seen[k] {
                    return Err(parse_err(ln, format!("duplicate row for av {k}")));
                }
                seen[k] = true;
                choices[k] = Some(AvChoice { facility, slots });
            }
            "unparked" => {
                let k: usize = num(ln, rest, "av")?;
                if k >= n_avs {
                    return Err(parse_err(ln, format!("av {k} out of range")));
                }
                if seen[k] {
                    return Err(parse_err(ln, format!("duplicate row for av {k}")));
                }
                seen[k] = true;
            }
            other => return Err(parse_err(ln, format!("unknown key `{other}`"))),
        }
    }
    if let Some((ln, l)) = lines.next() {
        return Err(parse_err(ln, format!("unexpected trailing content `{l}`")));
    }
    Ok(Assignment { choices })
}

pub fn parse_generator_config(text: &str) -> Result<GeneratorConfig, Error> {
    let mut lines = Lines::new(text);
    let (ln, header) = expect_line(&mut lines, "header")?;
    if header != GENERATOR_HEADER {
        return Err(parse_err(ln, format!("expected `{GENERATOR_HEADER}`")));
    }
    let (ln, sec) = expect_line(&mut lines, "[generator]")?;
    if sec != "[generator]" {
        return Err(parse_err(ln, "expected `[generator]`"));
    }
    let mut n_avs: Option<usize> = None;
    let mut n_facilities: Option<usize> = None;
    let mut slots: Option<u32> = None;
    let mut seed: Option<u64> = None;
    let mut cfg = GeneratorConfig::new(1, 1, 1, 0);
    let mut dmax_min = cfg.dmax_range_km.0;
    let mut dmax_max = cfg.dmax_range_km.1;
    while let Some((ln, l)) = lines.next() {
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| parse_err(ln, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n_avs" => n_avs = Some(num(ln, value, key)?),
            "n_facilities" => n_facilities = Some(num(ln, value, key)?),
            "slots" => slots = Some(num(ln, value, key)?),
            "horizon_minutes" => cfg.horizon_minutes = num(ln, value, key)?,
            "area_km" => cfg.area_km = num(ln, value, key)?,
            "speed_kmh" => cfg.speed_kmh = num(ln, value, key)?,
            "dmax_min_km" => dmax_min = num(ln, value, key)?,
            "dmax_max_km" => dmax_max = num(ln, value, key)?,
            "capacity" => {
                cfg.capacity = if value == "half" {
                    CapacityRule::HalfOfAvs
                } else {
                    CapacityRule::Fixed(num(ln, value, key)?)
                }
            }
            "consumption_kwh_per_km" => cfg.consumption_kwh_per_km = num(ln, value, key)?,
            "charge_rate_kw" => cfg.charge_rate_kw = num(ln, value, key)?,
            "battery_kwh" => cfg.battery_kwh = num(ln, value, key)?,
            "seed" => seed = Some(num(ln, value, key)?),
            other => return Err(parse_err(ln, format!("unknown generator key `{other}`"))),
        }
    }
    cfg.n_avs = n_avs.ok_or_else(|| parse_err(0, "generator config needs `n_avs`"))?;
    cfg.n_facilities =
        n_facilities.ok_or_else(|| parse_err(0, "generator config needs `n_facilities`"))?;
    cfg.slots = slots.ok_or_else(|| parse_err(0, "generator config needs `slots`"))?;
    cfg.seed = seed.ok_or_else(|| parse_err(0, "generator config needs `seed`"))?;
    cfg.dmax_range_km = (dmax_min, dmax_max);
    Ok(cfg)
}
