//! exp(-Γ₂) over ω_c·t for several cycle counts, low-temperature Ohmic bath.

use lambda_decouple::dephasing::{decoherence_grid, BathSpectrum, GridOptions, Regime, Slicing};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = GridOptions { t_points: 10, ..GridOptions::default() };
    let grid = decoherence_grid(&BathSpectrum::low_temperature_ohmic(), &opts)?;

    print!("t    ");
    for n in &grid.options.n_list {
        print!("  N={n:<7}");
    }
    println!("  free");
    for t in grid.t_axis() {
        print!("{t:<5}");
        for &n in &grid.options.n_list {
            print!("  {:<9.6}", grid.cell(t, n).and_then(|c| c.factor()).unwrap_or(f64::NAN));
        }
        println!("  {:.6}", grid.cell(t, 1).and_then(|c| c.free_exact_factor()).unwrap_or(f64::NAN));
    }
    for b in grid.controlled_breaks_in_n() {
        println!("decrease at t={} N={}: {:.6} -> {:.6}", b.omega_c_t, b.n_cycles, b.previous, b.current);
    }
    let csv = grid.to_csv(Slicing::FixedInterval, Regime::Controlled);
    println!("\nfixed-interval curve:\n{csv}");
    Ok(())
}
