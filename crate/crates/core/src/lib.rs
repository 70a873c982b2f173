//! Bang-bang suppression of pure dephasing in a three-level Λ atom.
//!
//! * [`algebra`]: 3×3 operators, the decoupling group {I, h1, h2} and its symmetrizer.
//! * [`schedule`]: pulse timelines and their validation.
//! * [`dephasing`]: controlled and free dephasing exponents for a continuum bath.
//! * [`oracle`]: exact evolution with a few truncated bosonic modes.
//! * [`cli`]: subcommand handlers behind the `lambda-decouple` binary.

pub mod algebra;
pub mod cli;
pub mod dephasing;
pub mod error;
pub mod format;
pub mod oracle;
pub mod schedule;

pub use algebra::{h1, h2, symmetrize, DecouplingGroup, LevelPair, Operator3, SystemLevels};
pub use dephasing::{BathSpectrum, Channel, ControlParams, Regime};
pub use error::{Error, Result};
pub use schedule::{build_schedule, validate_schedule, CycleSchedule};
