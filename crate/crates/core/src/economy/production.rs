use super::{Firm, ModelConstants};
use crate::io_table::CoefficientMatrix;

/// Leontief output of `firm` (sector `j`), capped by `plan`.
///
/// Labor capacity is scaled by `capacity_factor`; capital and input stocks
/// are not. Consumed inputs and imports are deducted from the firm's stocks
/// and the output is added to inventory.
pub fn produce(
    firm: &mut Firm,
    coeffs: &CoefficientMatrix,
    labor_capacity: f64,
    capital_capacity: f64,
    capacity_factor: f64,
    plan: f64,
) -> f64 {
    let j = firm.sector;
    let mut output = plan
        .max(0.0)
        .min(labor_capacity * capacity_factor)
        .min(capital_capacity);
    for (i, a) in coeffs.inputs_of(j) {
        output = output.min(firm.input_stocks[i] / a);
    }
    let m = coeffs.import_coeff[j];
    if m > 0.0 {
        output = output.min(firm.import_stock / m);
    }
    let output = output.max(0.0);
    if output > 0.0 {
        for (i, a) in coeffs.inputs_of(j) {
            firm.input_stocks[i] = (firm.input_stocks[i] - a * output).max(0.0);
        }
        if m > 0.0 {
            firm.import_stock = (firm.import_stock - m * output).max(0.0);
        }
    }
    firm.produced = output;
    firm.inventory += output;
    output
}

/// Production plan: replace expected sales and bring inventory back to target.
pub fn production_plan(avg_sales: f64, inventory: f64, constants: &ModelConstants) -> f64 {
    (avg_sales * (1.0 + constants.finished_goods_months) - inventory).max(0.0)
}

/// One tâtonnement step on a posted price.
///
/// `available` is what the firm could sell this month and `sold` what it
/// sold; `target` is the end-of-month inventory it aims for.
pub fn adjust_price(
    price: f64,
    sold: f64,
    available: f64,
    target: f64,
    constants: &ModelConstants,
) -> f64 {
    let up = price * (1.0 + constants.price_step);
    let down = price * (1.0 - constants.price_step);
    if available > 0.0 && sold >= available * (1.0 - 1e-9) {
        return up;
    }
    if sold <= 0.0 && available > 0.0 {
        return down;
    }
    let end = (available - sold).max(0.0);
    if end > target * (1.0 + constants.price_band) {
        down
    } else if end < target * (1.0 - constants.price_band) {
        up
    } else {
        price
    }
}

/// Exponentially smoothed monthly sales.
pub fn smooth(avg: f64, sales: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * avg + alpha * sales
}
