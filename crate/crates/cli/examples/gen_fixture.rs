//! Regenerates the bundled market fixture.
//!
//! ```text
//! cargo run -p mav-cli --example gen_fixture -- crates/cli/tests/fixtures/market
//! ```

use std::fs::{self, File};
use std::path::PathBuf;

use mav_core::market_data::{write_cex_bars_csv, write_swaps_csv};
use mav_core::synthetic::{simulate_market, MarketSpec};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixture".into()));
    fs::create_dir_all(&dir).expect("create fixture directory");
    let market = simulate_market(&MarketSpec::default());
    write_swaps_csv(
        &market.swaps,
        File::create(dir.join("swaps.csv")).expect("swaps.csv"),
    )
    .expect("write swaps");
    write_cex_bars_csv(
        &market.bars,
        File::create(dir.join("bars.csv")).expect("bars.csv"),
    )
    .expect("write bars");
    println!(
        "{} swaps, {} bars -> {}",
        market.swaps.len(),
        market.bars.len(),
        dir.display()
    );
}
