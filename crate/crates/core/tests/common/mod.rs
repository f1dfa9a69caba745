#![allow(dead_code)]

use cropreq::ingest::{CropPanel, CroplandSeries, DepartmentPanel};
use cropreq::YearSeries;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Panel with exact unit identity, optional exponential growth in area and yield.
pub fn random_panel(rng: &mut ChaCha8Rng, crop: &str, n: usize) -> CropPanel<f64> {
    let area0 = LogNormal::new(4.5, 0.8).unwrap().sample(rng);
    let yield0 = rng.gen_range(0.5..4.0);
    let (ga, gy) = if rng.gen_bool(0.5) { (rng.gen_range(-0.03..0.08), rng.gen_range(-0.02..0.05)) } else { (0.0, 0.0) };
    let (sa, sy) = (rng.gen_range(0.03..0.35), rng.gen_range(0.03..0.35));
    let noise_a = Normal::new(0.0, sa).unwrap();
    let noise_y = Normal::new(0.0, sy).unwrap();
    let mut area = Vec::with_capacity(n);
    let mut yields = Vec::with_capacity(n);
    for t in 0..n {
        area.push(area0 * (ga * t as f64 + noise_a.sample(rng)).exp());
        yields.push(yield0 * (gy * t as f64 + noise_y.sample(rng)).exp());
    }
    let production = area.iter().zip(&yields).map(|(a, y)| a * y).collect();
    CropPanel::new(crop, (2000..2000 + n as i32).collect(), production, area, yields).unwrap()
}

/// Cropland between 1.2 and 3 times the summed crop areas, with its own noise.
pub fn random_cropland(rng: &mut ChaCha8Rng, panels: &[CropPanel<f64>]) -> CroplandSeries<f64> {
    let base = CroplandSeries::from_panels(panels).unwrap();
    let k = rng.gen_range(1.2..3.0);
    let values = base.series().values().iter().map(|v| v * k * rng.gen_range(0.9..1.1)).collect();
    let series = YearSeries::new(base.series().years().to_vec(), values).unwrap();
    CroplandSeries::new(series, cropreq::ingest::CroplandSource::Column).unwrap()
}

/// Department panels over `years` plus national panels equal to their sums.
pub fn random_departments(
    rng: &mut ChaCha8Rng,
    departments: usize,
    crops: &[&str],
    years: usize,
) -> (Vec<DepartmentPanel<f64>>, Vec<CropPanel<f64>>) {
    let mut out = Vec::new();
    let mut totals = vec![vec![0.0; years]; crops.len()];
    for d in 0..departments {
        for (c, crop) in crops.iter().enumerate() {
            let share = LogNormal::new(0.0, 1.0).unwrap().sample(rng);
            let vol = [0.02, 0.05, 0.1, 0.2, 0.4][rng.gen_range(0..5)];
            let zero = d > 0 && rng.gen_bool(0.05);
            let values: Vec<f64> = (0..years)
                .map(|_| if zero { 0.0 } else { 10.0 * share * (vol * Normal::<f64>::new(0.0, 1.0).unwrap().sample(rng)).exp() })
                .collect();
            for (t, v) in values.iter().enumerate() {
                totals[c][t] += v;
            }
            let series = YearSeries::from_start(2010, values).unwrap();
            out.push(DepartmentPanel::new(format!("D{d:02}"), *crop, series).unwrap());
        }
    }
    let national = crops
        .iter()
        .zip(totals)
        .map(|(crop, p)| {
            let area: Vec<f64> = p.iter().map(|v| v / 1.5).collect();
            CropPanel::new(*crop, (2010..2010 + years as i32).collect(), p, area, vec![1.5; years]).unwrap()
        })
        .collect();
    (out, national)
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}
