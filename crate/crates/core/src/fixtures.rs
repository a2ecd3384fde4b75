//! Deterministic synthetic datasets shaped like the two demonstration
//! settings: one observation per group per level (continent-by-year
//! aggregates) and many observations per group per level (regional climate
//! measurements by decade).

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const CONTINENTS: [&str; 5] = ["Africa", "Americas", "Asia", "Europe", "Oceania"];

pub const CLIMATE_REGIONS: [&str; 10] = [
    "SAH", "WAF", "CAF", "NEAF", "SEAF", "WSAF", "ESAF", "MDG", "MED", "ARP",
];

/// Climate variables with their units.
pub const CLIMATE_VARIABLES: [(&str, &str); 6] = [
    ("AP", "m/day"),
    ("DE", "m/day"),
    ("Temp", "°C"),
    ("SM", "m³/m³"),
    ("SPI6", "1"),
    ("Wind", "m/s"),
];

pub fn gapminder_years() -> Vec<i32> {
    (0..12).map(|k| 1952 + 5 * k).collect()
}

/// Continent-by-year aggregates (`year,continent,lifeExp,pop,gdpPercap`),
/// 5 continents × 12 years, rounded to two decimals.
pub fn gapminder_csv() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(1952);
    let noise = Normal::new(0.0, 1.0).unwrap();
    // (life expectancy 1952, yearly gain, population 1952 (millions),
    //  growth rate, GDP 1952, GDP growth rate)
    let params = [
        (39.1, 0.28, 4.6, 0.027, 1250.0, 0.011),
        (53.3, 0.33, 13.8, 0.019, 4080.0, 0.015),
        (46.3, 0.44, 42.3, 0.020, 5200.0, 0.022),
        (64.4, 0.20, 13.9, 0.005, 5660.0, 0.029),
        (69.3, 0.21, 5.3, 0.016, 10300.0, 0.022),
    ];
    let mut out = String::from("year,continent,lifeExp,pop,gdpPercap\n");
    for year in gapminder_years() {
        let t = (year - 1952) as f64;
        for (c, &(le0, le1, p0, pg, g0, gg)) in CONTINENTS.iter().zip(&params) {
            let life = le0 + le1 * t + 0.4 * noise.sample(&mut rng);
            let pop = p0 * 1e6 * (pg * t).exp() * (1.0 + 0.02 * noise.sample(&mut rng));
            let gdp = g0 * (gg * t).exp() * (1.0 + 0.03 * noise.sample(&mut rng));
            let _ = writeln!(out, "{year},{c},{life:.2},{pop:.2},{gdp:.2}");
        }
    }
    out
}

pub fn climate_years() -> Vec<i32> {
    (0..8).map(|k| 1950 + 10 * k).collect()
}

fn climate_header() -> String {
    let mut h = String::from("Year,Region");
    for (name, unit) in CLIMATE_VARIABLES {
        let _ = write!(h, ",{name} [{unit}]");
    }
    h.push('\n');
    h
}

/// Region profiles on the six climate variables, in rough physical units.
fn region_profile(r: usize) -> [f64; 6] {
    // Two latent gradients: aridity and temperature/wind.
    let aridity = [1.6, 0.3, -1.2, 0.2, -0.6, 0.4, -0.3, -0.9, 0.9, 1.4][r];
    let heat = [1.1, 0.9, 0.5, 0.7, -0.2, -0.6, -0.8, -0.4, -1.2, 1.3][r];
    [
        0.004 - 0.0015 * aridity,
        0.003 - 0.001 * aridity + 0.0003 * heat,
        24.0 + 3.0 * heat,
        0.25 - 0.07 * aridity,
        -0.2 * aridity + 0.1 * heat,
        4.0 + 0.8 * heat + 0.3 * aridity,
    ]
}

const CLIMATE_NOISE: [f64; 6] = [0.0006, 0.0004, 0.9, 0.025, 0.35, 0.45];

/// Decadal climate-like measurements: 10 regions × 8 decades ×
/// `rows_per_cell` observations. The variance structure drifts over time so
/// per-decade decompositions differ.
pub fn climate_csv(rows_per_cell: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut out = climate_header();
    for (k, year) in climate_years().into_iter().enumerate() {
        let drift = k as f64 / 7.0;
        for (r, region) in CLIMATE_REGIONS.iter().enumerate() {
            let base = region_profile(r);
            for _ in 0..rows_per_cell {
                let shared = noise.sample(&mut rng);
                let mut row = [0.0; 6];
                for j in 0..6 {
                    row[j] = base[j] + CLIMATE_NOISE[j] * noise.sample(&mut rng);
                }
                // Warming trend and a strengthening precipitation–moisture
                // coupling.
                row[2] += 0.9 * drift + 0.3 * drift * shared;
                row[0] += 0.0004 * (0.5 + drift) * shared;
                row[3] += 0.02 * (0.5 + drift) * shared;
                let _ = write!(out, "{year},{region}");
                for v in row {
                    let _ = write!(out, ",{v:.6}");
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Stationary variant: every decade repeats one block of measurements
/// exactly. With `perturb = Some((k, sigma))`, independent N(0, sigma²)
/// noise is added to every value of decade `k`. Values are on a unit scale.
pub fn stationary_climate_csv(rows_per_cell: usize, seed: u64, perturb: Option<(usize, f64)>) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut block = Vec::new();
    for r in 0..CLIMATE_REGIONS.len() {
        let p = region_profile(r);
        for _ in 0..rows_per_cell {
            let row: Vec<f64> = (0..6)
                .map(|j| (p[j] - region_profile(0)[j]) / (3.0 * CLIMATE_NOISE[j]) + noise.sample(&mut rng) * 0.3)
                .collect();
            block.push((r, row));
        }
    }
    let mut out = climate_header();
    for (k, year) in climate_years().into_iter().enumerate() {
        for (r, row) in &block {
            let _ = write!(out, "{year},{}", CLIMATE_REGIONS[*r]);
            for v in row {
                let v = match perturb {
                    Some((pk, sigma)) if pk == k => v + sigma * noise.sample(&mut rng),
                    _ => *v,
                };
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}
