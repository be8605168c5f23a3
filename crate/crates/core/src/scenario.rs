//! Scenario description, TOML ingestion, the built-in reference scenario and
//! the synthetic workload trace.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::allocation::{AllocationConfig, MigrationCostMatrix, MigrationModel};
use crate::dynamics::DynamicsParams;
use crate::error::{Error, Result};
use crate::model::{reference_data_centers, BusPricing, DataCenterSpec, GridSpec};
use crate::policy::ActionSpec;

/// Name of the built-in six data center scenario.
pub const BUILTIN: &str = "paper6";

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_HORIZON: usize = 24;
pub const DEFAULT_REVENUE_RATE: f64 = 0.10;
pub const DEFAULT_PRICE_LO: f64 = 0.08;
pub const DEFAULT_PRICE_HI: f64 = 0.25;
pub const DEFAULT_SUPPLY_FRACTION: f64 = 0.7;
pub const DEFAULT_CONCENTRATION: f64 = 50.0;

/// Independent random streams derived from the scenario seed.
const STREAM_BASE_PRICE: u64 = 1;
const STREAM_TRACE: u64 = 2;
const STREAM_MIGRATION: u64 = 3;

/// A fully specified, validated experiment input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub horizon: usize,
    pub providers: Vec<DataCenterSpec>,
    /// `pricing[t][j]`: price function of provider `j`'s bus in slot `t`,
    /// with a zero billing reference.
    pub pricing: Vec<Vec<BusPricing>>,
    pub grid: GridSpec,
    pub migration: MigrationCostMatrix,
    pub dynamics: DynamicsParams,
    /// `workload[j][t]`: VMs requested from provider `j` in slot `t`.
    pub workload: Vec<Vec<u64>>,
    pub actions: ActionSpec,
    pub allocation: AllocationConfig,
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.providers.len()
    }

    pub fn workloads_at(&self, slot: usize) -> Vec<u64> {
        self.workload.iter().map(|row| row[slot]).collect()
    }

    pub fn pricing_at(&self, slot: usize) -> &[BusPricing] {
        &self.pricing[slot]
    }

    pub fn price_hi_at(&self, slot: usize) -> Vec<f64> {
        self.pricing[slot].iter().map(|b| b.price_hi).collect()
    }

    pub fn price_lo_at(&self, slot: usize) -> Vec<f64> {
        self.pricing[slot].iter().map(|b| b.price_lo).collect()
    }

    /// Checks every cross-reference and range.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::validation("providers", "at least one provider is required"));
        }
        if n > crate::partition::MAX_PROVIDERS {
            return Err(Error::validation(
                "providers",
                format!("at most {} providers are supported, got {n}", crate::partition::MAX_PROVIDERS),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::validation("horizon", "must be positive"));
        }
        let mut buses: Vec<usize> = self.providers.iter().map(|p| p.bus).collect();
        buses.sort_unstable();
        buses.dedup();
        if buses.len() != n {
            return Err(Error::validation("providers.bus", "every provider needs its own bus"));
        }
        for (j, p) in self.providers.iter().enumerate() {
            if p.id != j {
                return Err(Error::validation(format!("providers[{j}].id"), format!("expected {j}, got {}", p.id)));
            }
            p.validate()?;
        }
        if self.pricing.len() != self.horizon {
            return Err(Error::validation("pricing", format!("{} slots, expected {}", self.pricing.len(), self.horizon)));
        }
        for (t, row) in self.pricing.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!("pricing[{t}]"), format!("{} buses, expected {n}", row.len())));
            }
            for b in row {
                b.validate()?;
            }
        }
        self.grid.validate()?;
        if self.grid.supply.len() != n || self.grid.supply.iter().any(|r| r.len() != self.horizon) {
            return Err(Error::validation("grid.supply", format!("must be {n} providers × {} slots", self.horizon)));
        }
        if self.migration.n() != n {
            return Err(Error::validation("migration", format!("matrix is {}×{0}, expected {n}×{n}", self.migration.n())));
        }
        self.dynamics.validate()?;
        if self.workload.len() != n || self.workload.iter().any(|r| r.len() != self.horizon) {
            return Err(Error::validation("workload", format!("must be {n} providers × {} slots", self.horizon)));
        }
        for t in 0..self.horizon {
            let demand: u64 = self.workload.iter().map(|r| r[t]).sum();
            let capacity: u64 = self.providers.iter().map(|p| p.capacity()).sum();
            if demand > capacity {
                return Err(Error::validation(
                    format!("workload[slot {t}]"),
                    format!("total demand {demand} exceeds total capacity {capacity}"),
                ));
            }
        }
        self.actions.validate(n)?;
        Ok(())
    }

    /// The six data center reference configuration with the default trace,
    /// grid, pricing and migration rules.
    pub fn paper6(seed: u64) -> Result<Scenario> {
        let providers = reference_data_centers(DEFAULT_REVENUE_RATE);
        let raw = RawScenario {
            name: Some(BUILTIN.to_string()),
            seed: Some(seed),
            ..RawScenario::default()
        };
        build(raw, providers_from_specs(&providers), None)
    }
}

fn providers_from_specs(specs: &[DataCenterSpec]) -> Vec<RawProvider> {
    specs
        .iter()
        .map(|s| RawProvider {
            hosts: s.hosts,
            vms_per_host: s.vms_per_host,
            pue: s.pue,
            p_idle: s.p_idle,
            p_peak: s.p_peak,
            revenue_rate: Some(s.revenue_rate),
            bus: Some(s.bus),
            base_price: None,
            beta: None,
            supply: None,
        })
        .collect()
}

/// A price in $/kWh, or a string with a `c` suffix in cents/kWh.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PriceValue {
    Dollars(f64),
    Text(String),
}

impl PriceValue {
    fn dollars(&self, field: &str) -> Result<f64> {
        match self {
            PriceValue::Dollars(x) => Ok(*x),
            PriceValue::Text(s) => parse_price(s).map_err(|m| Error::validation(field, m)),
        }
    }
}

/// Parses `"0.12"` as dollars and `"12c"` as cents.
pub fn parse_price(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let (number, scale) = match t.strip_suffix('c') {
        Some(rest) => (rest.trim(), 0.01),
        None => (t, 1.0),
    };
    number
        .parse::<f64>()
        .map(|x| x * scale)
        .map_err(|_| format!("cannot read {text:?} as a price"))
}

/// A per-slot quantity given once or per slot.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PerSlot<T> {
    Flat(T),
    Series(Vec<T>),
}

impl<T: Clone> PerSlot<T> {
    fn expand(&self, horizon: usize, field: &str) -> Result<Vec<T>> {
        match self {
            PerSlot::Flat(x) => Ok(vec![x.clone(); horizon]),
            PerSlot::Series(v) if v.len() == horizon => Ok(v.clone()),
            PerSlot::Series(v) => Err(Error::validation(field, format!("{} values, expected {horizon}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProvider {
    hosts: u64,
    vms_per_host: u64,
    pue: f64,
    p_idle: f64,
    p_peak: f64,
    revenue_rate: Option<f64>,
    bus: Option<usize>,
    base_price: Option<PerSlot<PriceValue>>,
    beta: Option<f64>,
    supply: Option<PerSlot<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPricing {
    price_lo: Option<PriceValue>,
    price_hi: Option<PriceValue>,
    /// Range of the uniform base-price draw for buses without a base price.
    base_price_range: Option<[PriceValue; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    k_norm: Option<f64>,
    supply_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    sigma: Option<f64>,
    rho: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrace {
    /// `"diurnal"` (default) or `"flat"`.
    profile: Option<String>,
    /// Load fraction for `"flat"`.
    level: Option<f64>,
    /// Explicit per-slot load fractions.
    fractions: Option<Vec<f64>>,
    /// CSV file with `slot,total_fraction`, relative to the scenario file.
    file: Option<PathBuf>,
    concentration: Option<f64>,
    /// Explicit `[provider][slot]` workload matrix.
    workload: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMigration {
    matrix: Option<Vec<Vec<f64>>>,
    uniform: Option<f64>,
    cost_per_gb: Option<f64>,
    rate_mbit: Option<f64>,
    time_mean_s: Option<f64>,
    time_sd_s: Option<f64>,
    time_floor_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawActions {
    factors: Option<Vec<f64>>,
    cartesian: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAllocation {
    pivot: Option<u64>,
    enumeration_budget: Option<u64>,
    move_budget: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    seed: Option<u64>,
    horizon: Option<usize>,
    #[serde(default)]
    providers: Vec<RawProvider>,
    #[serde(default)]
    pricing: RawPricing,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    dynamics: RawDynamics,
    #[serde(default)]
    trace: RawTrace,
    #[serde(default)]
    migration: RawMigration,
    #[serde(default)]
    actions: RawActions,
    #[serde(default)]
    allocation: RawAllocation,
}

/// Default hourly load profile: `0.55 − 0.25·cos(2π(h − 4)/24)`, lowest
/// (0.3) at 04:00 and highest (0.8) at 16:00.
pub fn diurnal_profile(horizon: usize) -> Vec<f64> {
    (0..horizon)
        .map(|h| 0.55 - 0.25 * (2.0 * PI * (h as f64 - 4.0) / 24.0).cos())
        .collect()
}

/// Reads a `slot,total_fraction` CSV.
pub fn read_trace_csv(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["slot", "total_fraction"] {
        return Err(Error::Parse(format!(
            "{}: expected header slot,total_fraction",
            path.display()
        )));
    }
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |k: usize| -> Result<&str> {
            record
                .get(k)
                .ok_or_else(|| Error::Parse(format!("{} line {}: missing column", path.display(), line + 2)))
        };
        let slot = parse(0)?
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), line + 2)))?;
        let fraction = parse(1)?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{} line {}: {e}", path.display(), line + 2)))?;
        rows.push((slot, fraction));
    }
    rows.sort_by_key(|r| r.0);
    for (k, (slot, _)) in rows.iter().enumerate() {
        if *slot != k {
            return Err(Error::Parse(format!("{}: slots must be 0..{} without gaps", path.display(), rows.len())));
        }
    }
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// Workload matrix `[provider][slot]`. Each slot's total is
/// `round(fraction·ΣQ)`, split across providers by a Dirichlet draw whose
/// weights are proportional to capacity (`α_j = concentration·Q_j/ΣQ`).
/// Shares are rounded by largest remainder and any load above a provider's
/// capacity moves to the providers with the most spare room.
pub fn generate_trace(capacities: &[u64], profile: &[f64], concentration: f64, rng: &mut impl Rng) -> Result<Vec<Vec<u64>>> {
    if capacities.is_empty() {
        return Err(Error::validation("providers", "at least one provider is required"));
    }
    if !(concentration > 0.0) {
        return Err(Error::validation("trace.concentration", "must be positive"));
    }
    for (t, f) in profile.iter().enumerate() {
        if !(0.0..=1.0).contains(f) {
            return Err(Error::validation(format!("trace.fraction[{t}]"), format!("must lie in [0, 1], got {f}")));
        }
    }
    let capacity: u64 = capacities.iter().sum();
    let weights: Vec<f64> = capacities.iter().map(|&q| q as f64 / capacity as f64).collect();
    let gammas: Vec<Option<Gamma<f64>>> = weights
        .iter()
        .map(|&w| {
            if concentration.is_infinite() || w == 0.0 {
                None
            } else {
                Gamma::new(concentration * w, 1.0).ok()
            }
        })
        .collect();
    let n = capacities.len();
    let mut workload = vec![vec![0u64; profile.len()]; n];
    for (t, &fraction) in profile.iter().enumerate() {
        let total = (fraction * capacity as f64).round() as u64;
        let shares: Vec<f64> = if concentration.is_infinite() {
            weights.clone()
        } else {
            let draws: Vec<f64> = gammas
                .iter()
                .map(|g| g.as_ref().map_or(0.0, |g| g.sample(rng)))
                .collect();
            let sum: f64 = draws.iter().sum();
            if sum > 0.0 {
                draws.iter().map(|d| d / sum).collect()
            } else {
                weights.clone()
            }
        };
        let split = largest_remainder(total, &shares);
        let fitted = fit_to_capacity(split, capacities);
        for j in 0..n {
            workload[j][t] = fitted[j];
        }
    }
    Ok(workload)
}

fn largest_remainder(total: u64, shares: &[f64]) -> Vec<u64> {
    let exact: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[j] += 1;
    }
    out
}

fn fit_to_capacity(mut split: Vec<u64>, capacities: &[u64]) -> Vec<u64> {
    let mut excess = 0;
    for (w, &q) in split.iter_mut().zip(capacities) {
        if *w > q {
            excess += *w - q;
            *w = q;
        }
    }
    while excess > 0 {
        let (j, room) = split
            .iter()
            .zip(capacities)
            .map(|(w, q)| q - w)
            .enumerate()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if room == 0 {
            break;
        }
        let take = room.min(excess);
        split[j] += take;
        excess -= take;
    }
    split
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Loads a scenario file, or the built-in scenario when `source` is
/// `"paper6"`.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    load_scenario_with_seed(source, None)
}

/// Like [`load_scenario`] with the seed overridden.
pub fn load_scenario_with_seed(source: &str, seed: Option<u64>) -> Result<Scenario> {
    if source == BUILTIN {
        return Scenario::paper6(seed.unwrap_or(DEFAULT_SEED));
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf);
    parse_scenario(&text, base.as_deref(), seed)
}

/// Parses scenario TOML. Relative trace paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, base_dir: Option<&Path>, seed: Option<u64>) -> Result<Scenario> {
    let mut raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(s) = seed {
        raw.seed = Some(s);
    }
    if raw.providers.is_empty() {
        return Err(Error::validation("providers", "at least one provider is required"));
    }
    let providers = std::mem::take(&mut raw.providers);
    build(raw, providers, base_dir)
}

fn build(raw: RawScenario, providers: Vec<RawProvider>, base_dir: Option<&Path>) -> Result<Scenario> {
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let n = providers.len();
    let specs: Vec<DataCenterSpec> = providers
        .iter()
        .enumerate()
        .map(|(id, p)| DataCenterSpec {
            id,
            bus: p.bus.unwrap_or(id + 1),
            hosts: p.hosts,
            vms_per_host: p.vms_per_host,
            pue: p.pue,
            p_idle: p.p_idle,
            p_peak: p.p_peak,
            revenue_rate: p.revenue_rate.unwrap_or(DEFAULT_REVENUE_RATE),
        })
        .collect();
    for s in &specs {
        s.validate()?;
        for w in s.warnings() {
            log::warn!("{w}");
        }
    }
    let capacities: Vec<u64> = specs.iter().map(|s| s.capacity()).collect();

    // Workload first, because the horizon may come from it.
    let trace = &raw.trace;
    let profile: Option<Vec<f64>> = if let Some(f) = &trace.fractions {
        Some(f.clone())
    } else if let Some(file) = &trace.file {
        let path = match base_dir {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file.clone(),
        };
        Some(read_trace_csv(&path)?)
    } else {
        None
    };
    let horizon = raw
        .horizon
        .or_else(|| trace.workload.as_ref().and_then(|w| w.first().map(Vec::len)))
        .or_else(|| profile.as_ref().map(Vec::len))
        .unwrap_or(DEFAULT_HORIZON);
    let workload = if let Some(w) = &trace.workload {
        w.clone()
    } else {
        let profile = match (profile, trace.profile.as_deref()) {
            (Some(p), _) => p,
            (None, None | Some("diurnal")) => diurnal_profile(horizon),
            (None, Some("flat")) => vec![trace.level.unwrap_or(0.5); horizon],
            (None, Some(other)) => {
                return Err(Error::validation("trace.profile", format!("unknown profile {other:?}")));
            }
        };
        if profile.len() != horizon {
            return Err(Error::validation(
                "trace.fractions",
                format!("{} values, expected {horizon}", profile.len()),
            ));
        }
        let concentration = trace.concentration.unwrap_or(DEFAULT_CONCENTRATION);
        generate_trace(&capacities, &profile, concentration, &mut rng_for(seed, STREAM_TRACE))?
    };

    let price_lo = match &raw.pricing.price_lo {
        Some(v) => v.dollars("pricing.price_lo")?,
        None => DEFAULT_PRICE_LO,
    };
    let price_hi = match &raw.pricing.price_hi {
        Some(v) => v.dollars("pricing.price_hi")?,
        None => DEFAULT_PRICE_HI,
    };
    let (draw_lo, draw_hi) = match &raw.pricing.base_price_range {
        Some([a, b]) => (a.dollars("pricing.base_price_range")?, b.dollars("pricing.base_price_range")?),
        None => (price_lo, price_hi),
    };
    if !(draw_lo <= draw_hi) {
        return Err(Error::validation("pricing.base_price_range", "lower end exceeds upper end"));
    }

    let supply_fraction = raw.grid.supply_fraction.unwrap_or(DEFAULT_SUPPLY_FRACTION);
    let mut supply = Vec::with_capacity(n);
    for (j, p) in providers.iter().enumerate() {
        let row = match &p.supply {
            Some(s) => s.expand(horizon, &format!("providers[{j}].supply"))?,
            None => vec![supply_fraction * specs[j].peak_power(); horizon],
        };
        supply.push(row);
    }

    let mut base_rng = rng_for(seed, STREAM_BASE_PRICE);
    let mut pricing = vec![Vec::with_capacity(n); horizon];
    for (j, p) in providers.iter().enumerate() {
        // Drawn for every provider so that overriding one bus does not shift
        // the others' draws.
        let drawn = base_rng.random_range(draw_lo..=draw_hi);
        let base: Vec<f64> = match &p.base_price {
            Some(v) => v
                .expand(horizon, &format!("providers[{j}].base_price"))?
                .iter()
                .map(|x| x.dollars(&format!("providers[{j}].base_price")))
                .collect::<Result<_>>()?,
            None => vec![drawn; horizon],
        };
        for t in 0..horizon {
            let g = supply[j][t];
            let beta = match p.beta {
                Some(b) => b,
                None if g > 0.0 => (price_hi - price_lo) / (2.0 * g),
                None => {
                    return Err(Error::validation(
                        format!("providers[{j}].beta"),
                        "required when the bus supply is zero",
                    ))
                }
            };
            pricing[t].push(BusPricing {
                beta,
                base_price: base[t],
                billing_ref: 0.0,
                price_lo,
                price_hi,
            });
        }
    }

    let grid = GridSpec {
        supply,
        alpha1: raw.grid.alpha1.unwrap_or(0.3),
        alpha2: raw.grid.alpha2.unwrap_or(0.7),
        k_norm: raw.grid.k_norm,
    };

    let defaults = DynamicsParams::default();
    let dynamics = DynamicsParams {
        sigma: raw.dynamics.sigma.unwrap_or(defaults.sigma),
        rho: raw.dynamics.rho.unwrap_or(defaults.rho),
        epsilon: raw.dynamics.epsilon.unwrap_or(defaults.epsilon),
    };

    let mig = &raw.migration;
    let migration = if let Some(matrix) = &mig.matrix {
        MigrationCostMatrix::new(matrix.clone())?
    } else if let Some(c) = mig.uniform {
        if !(c >= 0.0) {
            return Err(Error::validation("migration.uniform", "must be non-negative"));
        }
        MigrationCostMatrix::uniform(n, c)
    } else {
        let d = MigrationModel::default();
        let model = MigrationModel {
            cost_per_gb: mig.cost_per_gb.unwrap_or(d.cost_per_gb),
            rate_mbit: mig.rate_mbit.unwrap_or(d.rate_mbit),
            time_mean_s: mig.time_mean_s.unwrap_or(d.time_mean_s),
            time_sd_s: mig.time_sd_s.unwrap_or(d.time_sd_s),
            time_floor_s: mig.time_floor_s.unwrap_or(d.time_floor_s),
        };
        MigrationCostMatrix::sampled(n, &model, &mut rng_for(seed, STREAM_MIGRATION))?
    };

    let default_actions = ActionSpec::default();
    let actions = ActionSpec {
        factors: raw.actions.factors.clone().unwrap_or(default_actions.factors),
        cartesian: raw.actions.cartesian.unwrap_or(default_actions.cartesian),
    };
    let d = AllocationConfig::default();
    let allocation = AllocationConfig {
        pivot: raw.allocation.pivot.unwrap_or(d.pivot),
        enumeration_budget: raw.allocation.enumeration_budget.unwrap_or(d.enumeration_budget),
        move_budget: raw.allocation.move_budget.unwrap_or(d.move_budget),
    };

    let scenario = Scenario {
        name: raw.name.unwrap_or_else(|| "scenario".to_string()),
        seed,
        horizon,
        providers: specs,
        pricing,
        grid,
        migration,
        dynamics,
        workload,
        actions,
        allocation,
    };
    scenario.validate()?;
    Ok(scenario)
}
