//! ρ₀₂ after N cycles with and without pulses, both channels active.

use num_complex::Complex64;

use lambda_decouple::dephasing::{coherence_trace, BathSpectrum, ControlParams, Regime};
use lambda_decouple::{LevelPair, SystemLevels};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let levels = SystemLevels::new(0.0, 0.7, 2.3)?;
    let bath = BathSpectrum::with_cutoff_ratio(0.25, 1.0, 1.0, 100.0)?;
    let rho02 = Complex64::new(1.0 / 3.0, 0.0);
    let total = 6.0;
    println!("N    pulsed |rho02|   free |rho02|   phase");
    for n in [1, 2, 5, 10, 20] {
        let ctrl = ControlParams::from_total_time(total, n)?;
        let on = coherence_trace(LevelPair::P20, &bath, &bath, &ctrl, Regime::Controlled, levels.omega20(), rho02)?;
        let off = coherence_trace(LevelPair::P20, &bath, &bath, &ctrl, Regime::FreeExact, levels.omega20(), rho02)?;
        println!("{n:<4} {:<16.10} {:<14.10} {:.6}", on.rho02.norm(), off.rho02.norm(), on.phase);
    }
    Ok(())
}
