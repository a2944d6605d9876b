use std::sync::Arc;

use crate::economy::{Model, ModelConstants};
use crate::io_table::{parse_sam_reader, repair_sam, CountryParams, RepairPolicy};

pub const SYNTHETIC_SAM: &str = include_str!("../../../../fixtures/synthetic4_sam.csv");

pub fn synthetic_model(constants: ModelConstants) -> Arc<Model> {
    let sam = parse_sam_reader(SYNTHETIC_SAM.as_bytes()).unwrap();
    let (sam, _) = repair_sam(sam, &RepairPolicy::default());
    let params = CountryParams {
        active_population: 1000.0,
        nairu: 0.05,
        initial_cpi: 1.0,
    };
    Arc::new(Model::new(&sam, &params, &constants).unwrap())
}
