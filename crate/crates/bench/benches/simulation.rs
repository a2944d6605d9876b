use std::hint::black_box;
use std::path::Path;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ioeco_core::calibration::{run_calibration, CalibrationSchedule};
use ioeco_core::forecast::ols_growth;
use ioeco_core::io_table::{parse_country_params, parse_sam_csv, repair_sam, RepairPolicy};
use ioeco_core::{step_month, Model, ModelConstants};

fn model(scale: usize) -> Arc<Model> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let sam = parse_sam_csv(dir.join("synthetic4_sam.csv")).unwrap();
    let (sam, _) = repair_sam(sam, &RepairPolicy::default());
    let params = parse_country_params(dir.join("synthetic4_params.txt")).unwrap();
    Arc::new(Model::new(&sam, &params, &ModelConstants::with_scale(scale)).unwrap())
}

fn simulation(c: &mut Criterion) {
    let schedule = CalibrationSchedule::default();
    for scale in [8, 32] {
        let m = model(scale);
        let calibrated = run_calibration(m.clone(), 5489, &schedule).unwrap().state;
        c.bench_function(&format!("step_month_w{scale}"), |b| {
            b.iter_batched(
                || calibrated.clone(),
                |mut s| step_month(&mut s).unwrap(),
                BatchSize::SmallInput,
            )
        });
        c.bench_function(&format!("calibration_w{scale}"), |b| {
            b.iter(|| {
                run_calibration(m.clone(), black_box(5489), &schedule)
                    .unwrap()
                    .free_market_month
            })
        });
    }
    let series: Vec<f64> = (0..12).map(|t| 100.0 + 0.3 * t as f64).collect();
    c.bench_function("ols_growth_12", |b| {
        b.iter(|| ols_growth(black_box(&series)).unwrap())
    });
}

criterion_group!(benches, simulation);
criterion_main!(benches);
