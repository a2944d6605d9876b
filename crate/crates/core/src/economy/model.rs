use serde::{Deserialize, Serialize};

use super::ModelConstants;
use crate::io_table::{
    gdp_target, technical_coefficients, CoefficientError, CoefficientMatrix, CountryParams,
    SocialAccountingMatrix,
};

/// Everything a run derives once from the table, the country parameters and
/// the constants. Immutable for the lifetime of a simulation.
///
/// Money is in the table's units per month; prices start at 1, so base-period
/// quantities equal base-period money flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub sectors: Vec<String>,
    pub coeffs: CoefficientMatrix,
    pub params: CountryParams,
    pub constants: ModelConstants,
    pub active: Vec<bool>,
    /// Base-period gross output per month.
    pub monthly_output: Vec<f64>,
    /// Workers with affinity to each sector.
    pub sector_workers: Vec<usize>,
    /// Employment that produces base-period output in each sector.
    pub employment_target: Vec<usize>,
    /// Output per employed worker per month.
    pub productivity: Vec<f64>,
    /// Wage that reproduces the table's compensation at target employment.
    pub base_wage: Vec<f64>,
    /// Fixed capital needed per unit of monthly output.
    pub capital_intensity: Vec<f64>,
    /// Multiplier applied to every sector's capital intensity so that
    /// producer replacement investment fits inside total GFCF.
    pub capital_scale: f64,
    pub household_weights: Vec<f64>,
    pub gfcf_weights: Vec<f64>,
    /// Monthly nominal household spending in the base period
    /// (consumption plus household investment).
    pub household_target: f64,
    /// Share of household spending that goes to durables.
    pub durable_share: f64,
    pub government_demand: Vec<f64>,
    pub export_demand: Vec<f64>,
    /// Annual GDP of the source table.
    pub gdp_target: f64,
    /// Sectors ordered from most upstream to most downstream.
    pub init_order: Vec<usize>,
}

fn normalized(values: impl Iterator<Item = f64>, active: &[bool]) -> Vec<f64> {
    let raw: Vec<f64> = values
        .zip(active)
        .map(|(v, a)| if *a { v.max(0.0) } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; raw.len()]
    }
}

/// Splits `total` over sectors proportionally to `weights` by largest
/// remainder, giving every active sector at least one.
pub fn allocate_workers(total: usize, weights: &[f64], active: &[bool]) -> Vec<usize> {
    let n = weights.len();
    let w: Vec<f64> = weights
        .iter()
        .zip(active)
        .map(|(v, a)| if *a { v.max(0.0) } else { 0.0 })
        .collect();
    let sum: f64 = w.iter().sum();
    let mut out = vec![0usize; n];
    if sum <= 0.0 {
        let act: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
        for (k, &j) in act.iter().enumerate() {
            out[j] = total / act.len() + usize::from(k < total % act.len());
        }
        return out;
    }
    let quotas: Vec<f64> = w.iter().map(|v| total as f64 * v / sum).collect();
    for j in 0..n {
        out[j] = quotas[j].floor() as usize;
    }
    let mut rest = total - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &j in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        out[j] += 1;
        rest -= 1;
    }
    for j in 0..n {
        if active[j] && out[j] == 0 {
            let donor = (0..n)
                .max_by_key(|&k| (out[k], std::cmp::Reverse(k)))
                .unwrap();
            if out[donor] > 1 {
                out[donor] -= 1;
                out[j] = 1;
            }
        }
    }
    out
}

impl Model {
    pub fn new(
        sam: &SocialAccountingMatrix,
        params: &CountryParams,
        constants: &ModelConstants,
    ) -> Result<Self, CoefficientError> {
        let coeffs = technical_coefficients(sam)?;
        let n = sam.sector_count();
        let active = coeffs.active.clone();
        let c = constants;
        let monthly_output: Vec<f64> = (0..n)
            .map(|j| {
                if active[j] {
                    sam.gross_output[j] / 12.0
                } else {
                    0.0
                }
            })
            .collect();

        let n_active = active.iter().filter(|a| **a).count();
        let sector_workers =
            allocate_workers(c.workers_per_sector * n_active, &sam.compensation, &active);
        let employment_target: Vec<usize> = (0..n)
            .map(|j| {
                if !active[j] {
                    return 0;
                }
                let e = (sector_workers[j] as f64 * (1.0 - params.nairu)).round() as usize;
                e.clamp(1, sector_workers[j].max(1))
            })
            .collect();
        let productivity: Vec<f64> = (0..n)
            .map(|j| {
                if active[j] {
                    monthly_output[j] / employment_target[j] as f64
                } else {
                    0.0
                }
            })
            .collect();
        let base_wage: Vec<f64> = (0..n)
            .map(|j| {
                if !active[j] {
                    return 0.0;
                }
                // Sectors without recorded compensation still need a positive wage.
                let w = sam.compensation[j] / 12.0 / employment_target[j] as f64;
                w.max(1e-6 * productivity[j]).max(f64::MIN_POSITIVE)
            })
            .collect();

        let raw_intensity: Vec<f64> = (0..n)
            .map(|j| {
                if active[j] {
                    coeffs.capital_coeff[j] / c.k_to_fixcap
                } else {
                    0.0
                }
            })
            .collect();
        let replacement: f64 = (0..n)
            .map(|j| {
                c.producer_depreciation * raw_intensity[j] * c.capital_headroom * monthly_output[j]
            })
            .sum();
        let gfcf_total: f64 = (0..n)
            .filter(|&j| active[j])
            .map(|j| sam.gfcf[j].max(0.0))
            .sum::<f64>()
            / 12.0;
        let capital_scale = if replacement > 0.0 {
            (gfcf_total / replacement).min(1.0)
        } else {
            1.0
        };
        let capital_intensity: Vec<f64> = raw_intensity.iter().map(|k| k * capital_scale).collect();
        let household_investment = (gfcf_total - replacement * capital_scale).max(0.0);

        let consumption_total: f64 = (0..n)
            .filter(|&j| active[j])
            .map(|j| sam.household_consumption[j].max(0.0))
            .sum::<f64>()
            / 12.0;
        let household_target = consumption_total + household_investment;
        let durable_share = if household_target > 0.0 {
            household_investment / household_target
        } else {
            0.0
        };

        let mut gfcf_weights = normalized(sam.gfcf.iter().copied(), &active);
        if gfcf_weights.iter().all(|w| *w == 0.0) {
            gfcf_weights = normalized(monthly_output.iter().copied(), &active);
        }

        let upstream: Vec<f64> = (0..n).map(|i| coeffs.a.row_sum(i)).collect();
        let mut init_order: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
        init_order.sort_by(|&a, &b| {
            upstream[b]
                .partial_cmp(&upstream[a])
                .unwrap()
                .then(a.cmp(&b))
        });

        Ok(Self {
            sectors: sam.sectors.clone(),
            household_weights: normalized(sam.household_consumption.iter().copied(), &active),
            gfcf_weights,
            government_demand: (0..n)
                .map(|j| {
                    if active[j] {
                        sam.government_consumption[j].max(0.0) / 12.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            export_demand: (0..n)
                .map(|j| {
                    if active[j] {
                        sam.exports[j].max(0.0) / 12.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            gdp_target: gdp_target(sam),
            coeffs,
            params: params.clone(),
            constants: constants.clone(),
            active,
            monthly_output,
            sector_workers,
            employment_target,
            productivity,
            base_wage,
            capital_intensity,
            capital_scale,
            household_target,
            durable_share,
            init_order,
        })
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn worker_count(&self) -> usize {
        self.sector_workers.iter().sum()
    }

    /// Combined sales tax rate: production and product taxes plus OP levies.
    pub fn sales_tax_rate(&self, j: usize) -> f64 {
        self.coeffs.tax_rate_production[j]
            + self.coeffs.tax_rate_products[j]
            + self.coeffs.other_coeff[j]
    }

    pub fn capital_target(&self, j: usize, avg_sales: f64) -> f64 {
        self.capital_intensity[j] * avg_sales * self.constants.capital_headroom
    }

    /// Cash a firm keeps back from dividends.
    pub fn reserve(&self, j: usize, price: f64, avg_sales: f64) -> f64 {
        let cost_share = (1.0 - self.coeffs.capital_coeff[j]).max(0.0);
        self.constants.reserve_months * price * avg_sales * cost_share
    }
}
