//! Builds a two-cycle pulse train, validates it and prints the dump.

use lambda_decouple::schedule::{net_cycle_unitary, validate_schedule, CycleSchedule};
use lambda_decouple::build_schedule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schedule = build_schedule(0.25, 2, 0.0)?;
    let dump = schedule.dump();
    print!("{dump}");

    let parsed = CycleSchedule::parse_dump(&dump)?;
    assert_eq!(parsed, schedule);
    println!("valid: {}", validate_schedule(&parsed).is_ok());
    println!("net cycle unitary is identity: {}", net_cycle_unitary(&parsed)?.equals_up_to_phase(&lambda_decouple::Operator3::identity(), 1e-12).is_some());

    // swapping the tied pair breaks the ordering rule
    let mut broken = parsed.clone();
    broken.events.swap(1, 2);
    if let Err(violations) = validate_schedule(&broken) {
        for v in violations {
            println!("{v}");
        }
    }
    Ok(())
}
