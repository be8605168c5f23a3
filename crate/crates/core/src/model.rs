//! Physical and economic primitives: data centers, bus price functions and
//! the smart grid's supply description.
//!
//! Units: power in kW, prices in $/kWh, one slot is one hour, so `θ·e` is the
//! dollar amount billed for a slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One cloud provider's data center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataCenterSpec {
    /// Provider index, `0..N`.
    pub id: usize,
    /// Power bus the data center draws from.
    pub bus: usize,
    pub hosts: u64,
    /// VMs a single host can run at once.
    pub vms_per_host: u64,
    /// Power usage effectiveness multiplier.
    pub pue: f64,
    /// Idle host power, kW.
    pub p_idle: f64,
    /// Fully utilized host power, kW.
    pub p_peak: f64,
    /// Revenue per VM per slot, $.
    pub revenue_rate: f64,
}

impl DataCenterSpec {
    /// VM capacity `hosts × vms_per_host`.
    pub fn capacity(&self) -> u64 {
        self.hosts * self.vms_per_host
    }

    /// Power drawn with every host fully loaded.
    pub fn peak_power(&self) -> f64 {
        self.hosts as f64 * self.p_peak * self.pue
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("providers[{}].{name}", self.id);
        if self.hosts == 0 {
            return Err(Error::validation(field("hosts"), "must be positive"));
        }
        if self.vms_per_host == 0 {
            return Err(Error::validation(field("vms_per_host"), "must be positive"));
        }
        if !(self.p_idle > 0.0 && self.p_idle < self.p_peak && self.p_peak.is_finite()) {
            return Err(Error::validation(
                field("p_idle"),
                format!("need 0 < p_idle < p_peak, got {} and {}", self.p_idle, self.p_peak),
            ));
        }
        if !(self.pue >= 1.0 && self.pue.is_finite()) {
            return Err(Error::validation(field("pue"), format!("must be at least 1, got {}", self.pue)));
        }
        if !(self.revenue_rate >= 0.0 && self.revenue_rate.is_finite()) {
            return Err(Error::validation(field("revenue_rate"), "must be non-negative"));
        }
        Ok(())
    }

    /// Soft range checks that do not make the spec unusable.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(1.1..=3.0).contains(&self.pue) {
            out.push(format!(
                "provider {}: PUE {} is outside the usual [1.1, 3] range",
                self.id, self.pue
            ));
        }
        out
    }
}

/// The price function one bus applies to its data center for one slot:
/// `θ = β·(e − δ) + z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusPricing {
    /// Sensitivity, $/kWh per kW of deviation.
    pub beta: f64,
    /// Base price `z`, $/kWh.
    pub base_price: f64,
    /// Billing reference `δ`, kW. This is the grid's decision variable.
    pub billing_ref: f64,
    pub price_lo: f64,
    pub price_hi: f64,
}

impl BusPricing {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::validation("pricing.beta", format!("must be positive, got {}", self.beta)));
        }
        if !(self.price_lo < self.price_hi) {
            return Err(Error::validation(
                "pricing.price_lo",
                format!("must be below price_hi ({} >= {})", self.price_lo, self.price_hi),
            ));
        }
        Ok(())
    }

    /// Same bus with a different billing reference.
    pub fn with_billing_ref(mut self, billing_ref: f64) -> Self {
        self.billing_ref = billing_ref;
        self
    }

    pub fn price(&self, power: f64) -> f64 {
        electricity_price(self, power)
    }

    pub fn in_bounds(&self, price: f64) -> bool {
        self.price_lo <= price && price <= self.price_hi
    }
}

/// Unit electricity price at `power` kW. Not clamped to the legal band.
pub fn electricity_price(pricing: &BusPricing, power: f64) -> f64 {
    pricing.beta * (power - pricing.billing_ref) + pricing.base_price
}

/// Grid-side parameters of the utility function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `supply[j][t]`: power available to provider `j`'s bus in slot `t`, kW.
    pub supply: Vec<Vec<f64>>,
    /// Weight of the revenue term.
    pub alpha1: f64,
    /// Weight of the mismatch term.
    pub alpha2: f64,
    /// Mismatch normalizer; `None` prices mismatch at the supply-weighted cap
    /// rate of the slot.
    pub k_norm: Option<f64>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.alpha1) || !in_unit(self.alpha2) {
            return Err(Error::validation("grid.alpha1", "weights must lie in [0, 1]"));
        }
        if (self.alpha1 + self.alpha2 - 1.0).abs() > 1e-9 {
            return Err(Error::validation(
                "grid.alpha2",
                format!("alpha1 + alpha2 must equal 1, got {}", self.alpha1 + self.alpha2),
            ));
        }
        for (j, row) in self.supply.iter().enumerate() {
            if let Some(g) = row.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                return Err(Error::validation(format!("grid.supply[{j}]"), format!("must be non-negative, got {g}")));
            }
        }
        if let Some(k) = self.k_norm {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::validation("grid.k_norm", "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Supply vector for one slot.
    pub fn supply_at(&self, slot: usize) -> Vec<f64> {
        self.supply.iter().map(|row| row[slot]).collect()
    }

    /// `K` for a slot: the configured value, or `Σ θ_h·G_j / Σ G_j`.
    pub fn k_for_slot(&self, slot: usize, price_hi: &[f64]) -> f64 {
        if let Some(k) = self.k_norm {
            return k;
        }
        let total: f64 = self.supply.iter().map(|row| row[slot]).sum();
        if total <= 0.0 {
            return price_hi.iter().copied().fold(0.0, f64::max);
        }
        let weighted: f64 = self
            .supply
            .iter()
            .zip(price_hi)
            .map(|(row, hi)| row[slot] * hi)
            .sum();
        weighted / total
    }
}

/// Power drawn by one data center at a given VM load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDraw {
    pub active_hosts: u64,
    pub utilization: f64,
    /// Facility power including PUE, kW.
    pub power: f64,
}

/// Power draw with VMs consolidated onto the fewest hosts:
/// `m = ⌈n/a⌉`, `U = n/(m·a)`, `e = m·(P_idle + (P_peak − P_idle)·U)·γ`.
pub fn power_draw(spec: &DataCenterSpec, assigned_vms: u64) -> Result<PowerDraw> {
    let capacity = spec.capacity();
    if assigned_vms > capacity {
        return Err(Error::CapacityExceeded {
            provider: spec.id,
            assigned: assigned_vms,
            capacity,
        });
    }
    Ok(power_draw_unchecked(spec, assigned_vms))
}

pub(crate) fn power_draw_unchecked(spec: &DataCenterSpec, assigned_vms: u64) -> PowerDraw {
    if assigned_vms == 0 {
        return PowerDraw {
            active_hosts: 0,
            utilization: 0.0,
            power: 0.0,
        };
    }
    let a = spec.vms_per_host;
    let hosts = assigned_vms.div_ceil(a);
    let utilization = assigned_vms as f64 / (hosts * a) as f64;
    let power = hosts as f64 * (spec.p_idle + (spec.p_peak - spec.p_idle) * utilization) * spec.pue;
    PowerDraw {
        active_hosts: hosts,
        utilization,
        power,
    }
}

/// The six data centers of the reference configuration (hosts, VMs per host,
/// PUE, idle and peak host power) with a flat revenue rate.
pub fn reference_data_centers(revenue_rate: f64) -> Vec<DataCenterSpec> {
    const ROWS: [(u64, u64, f64, f64, f64); 6] = [
        (15000, 1, 1.3, 0.086, 0.274),
        (12000, 2, 1.5, 0.143, 0.518),
        (10000, 3, 1.3, 0.490, 1.117),
        (20000, 1, 1.6, 0.086, 0.274),
        (15000, 2, 1.8, 0.143, 0.518),
        (10000, 3, 1.1, 0.490, 1.117),
    ];
    ROWS.iter()
        .enumerate()
        .map(|(id, &(hosts, vms_per_host, pue, p_idle, p_peak))| DataCenterSpec {
            id,
            bus: id + 1,
            hosts,
            vms_per_host,
            pue,
            p_idle,
            p_peak,
            revenue_rate,
        })
        .collect()
}
