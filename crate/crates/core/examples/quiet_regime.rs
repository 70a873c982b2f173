//! Per-mode crossover where the pulsed kernel overtakes the free one.

use lambda_decouple::dephasing::{locate_quiet_crossover, quiet_threshold, Channel};

fn main() {
    for ch in Channel::BOTH {
        let sweep = locate_quiet_crossover(ch, 100);
        let x = sweep.crossover.expect("crossover on (0, pi]");
        println!("{}: omega*dt = {x:.12} (arccos 3/4 = {:.12})", ch.label(), quiet_threshold());
        for (x, ratio) in sweep.samples.iter().step_by(20) {
            println!("  x={x:.3} |eta|^2/|f xi|^2 = {ratio:.6}");
        }
    }
}
