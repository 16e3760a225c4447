//! Simulation, estimation, pricing, and calibration toolkit for a bivariate
//! mixed-fractional-Brownian-motion model of interest rates and excess
//! mortality.
//!
//! The short rate `r_t` and the weekly excess-mortality rate `mu_t` follow a
//! pair of correlated Vasicek-type equations driven by mixed fractional
//! Brownian motions `alpha*W_t + B^H_t`. The crate provides
//!
//! - exact samplers for fractional Gaussian noise and mfBm ([`fracnoise`]),
//! - the bivariate model with its closed-form moments, positivity
//!   probability, and extreme-value bounds ([`model`]),
//! - zero-coupon bond prices in closed form and Monte Carlo pricing of
//!   catastrophe mortality bonds ([`pricing`]),
//! - the physical-measure estimation stack (rescaled-range Hurst
//!   estimation, power variations, drift estimators) ([`estimate`]),
//! - risk-premium and attachment/exhaustion calibration to market quotes
//!   ([`calibrate`]),
//! - ingestion of STMF weekly mortality and FRED rate snapshots ([`data`]).
//!
//! Rates are carried in percent per annum throughout (matching the scale of
//! the estimation data); discounting converts to decimals at the pricing
//! boundary.

pub mod calibrate;
pub mod data;
pub mod error;
pub mod estimate;
pub mod fracnoise;
pub mod model;
pub mod pricing;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

use once_cell::sync::OnceCell;

/// Environment variable capping worker parallelism.
pub const THREADS_ENV: &str = "MORTFRAC_THREADS";

static POOL: OnceCell<rayon::ThreadPool> = OnceCell::new();

/// Thread pool used for path-level parallelism. Honors `MORTFRAC_THREADS`.
///
/// Results never depend on the worker count: every path owns a counter-based
/// RNG substream and reductions run in a fixed order.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(v) = std::env::var(THREADS_ENV) {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    builder = builder.num_threads(n);
                }
            }
        }
        builder.build().expect("failed to build thread pool")
    })
}
