//! Exact evolution with one truncated bath mode against the analytic coherence.

use lambda_decouple::dephasing::{Channel, Regime};
use lambda_decouple::oracle::{
    analytic_magnitudes, compare_analytic, run_oracle, uniform_superposition, OracleConfig, TruncatedMode,
    TruncationPolicy,
};
use lambda_decouple::{build_schedule, SystemLevels};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let levels = SystemLevels::new(0.0, 0.7, 2.3)?;
    let mode = TruncatedMode::new(1.0, 0.2, Channel::K2, 40)?;
    let (delta_t, n, temperature) = (0.5, 10, 0.2);
    let schedule = build_schedule(delta_t, n, 0.0)?;

    for pulses in [true, false] {
        let cfg = OracleConfig { temperature, pulses, truncation: TruncationPolicy::Strict };
        let result = run_oracle(&levels, &[mode], &schedule, &uniform_superposition(), &cfg)?;
        let regime = if pulses { Regime::Controlled } else { Regime::FreeExact };
        let analytic = analytic_magnitudes(&[mode], temperature, delta_t, n, regime)?;
        let report = compare_analytic(&result, &analytic);
        println!("pulses={pulses}: max deviation {:e}, pass {}", report.max_deviation, report.pass);
        for (t, (exact, model)) in result.times.iter().zip(result.magnitude_ratio().iter().zip(&analytic)) {
            println!("  t={t:<5} oracle {exact:.10} analytic {model:.10}");
        }
    }
    Ok(())
}
