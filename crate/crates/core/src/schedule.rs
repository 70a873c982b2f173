//! Periodic twinborn-pulse timeline.
//!
//! One cycle of length 3Δt carries four instantaneous pulses:
//! h1 at Δt, h1† and h2 back to back at 2Δt, h2† at 3Δt (relative to the
//! cycle start). Pulse width τ_P is recorded but never shifts event times.

use std::fmt;

use crate::algebra::{BbElement, Operator3};
use crate::error::{invalid, Error, Result};
use crate::format::sig;

/// Relative tolerance on nominal event times when validating a schedule.
const TIME_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEvent {
    pub time: f64,
    pub element: BbElement,
    pub tau_p: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleSchedule {
    pub delta_t: f64,
    pub n_cycles: usize,
    pub tau_p: f64,
    pub events: Vec<PulseEvent>,
}

/// Position and element of each pulse within a cycle, in units of Δt.
const CYCLE_PATTERN: [(f64, BbElement); 4] = [
    (1.0, BbElement::H1),
    (2.0, BbElement::H1Dag),
    (2.0, BbElement::H2),
    (3.0, BbElement::H2Dag),
];

pub fn build_schedule(delta_t: f64, n_cycles: usize, tau_p: f64) -> Result<CycleSchedule> {
    if !(delta_t.is_finite() && delta_t > 0.0) {
        return invalid(format!("delta_t must be positive and finite, got {delta_t}"));
    }
    if !(tau_p.is_finite() && tau_p >= 0.0) {
        return invalid(format!("tau_p must be non-negative, got {tau_p}"));
    }
    let events = (0..n_cycles)
        .flat_map(|c| {
            let start = 3.0 * c as f64;
            CYCLE_PATTERN.iter().map(move |&(offset, element)| PulseEvent {
                time: (start + offset) * delta_t,
                element,
                tau_p,
            })
        })
        .collect();
    Ok(CycleSchedule { delta_t, n_cycles, tau_p, events })
}

impl CycleSchedule {
    /// Nominal duration 3·N·Δt.
    pub fn duration(&self) -> f64 {
        3.0 * self.n_cycles as f64 * self.delta_t
    }

    /// Events belonging to cycle `c` (0-based), by nominal time window (3cΔt, 3(c+1)Δt].
    pub fn cycle_events(&self, c: usize) -> Vec<PulseEvent> {
        self.events.iter().copied().filter(|e| self.cycle_of(e.time) == Some(c)).collect()
    }

    fn cycle_of(&self, time: f64) -> Option<usize> {
        if time <= self.delta_t * TIME_TOL {
            return None;
        }
        let x = time / (3.0 * self.delta_t);
        let c = (x - TIME_TOL).ceil() as usize;
        c.checked_sub(1)
    }

    /// Dump format: header `# delta_t=… n_cycles=… tau_p=…`, then one
    /// tab-separated `index time element tau_p` line per event.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "# delta_t={} n_cycles={} tau_p={}\n",
            sig(self.delta_t, 12),
            self.n_cycles,
            sig(self.tau_p, 12)
        );
        for (k, e) in self.events.iter().enumerate() {
            out.push_str(&format!("{k}\t{}\t{}\t{}\n", sig(e.time, 12), e.element, sig(e.tau_p, 12)));
        }
        out
    }

    /// Parses a dump. Comment lines other than the `# delta_t=` header are skipped.
    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut header: Option<(f64, usize, f64)> = None;
        let mut events = Vec::new();
        for line in text.lines() {
            let line = line.trim_end_matches('\r');
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if rest.starts_with("delta_t=") && rest.contains(" n_cycles=") {
                    header = Some(parse_header(rest)?);
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return invalid(format!("schedule line needs 4 tab-separated fields: {line:?}"));
            }
            let index: usize = parse_num(fields[0])?;
            if index != events.len() {
                return invalid(format!("event index {index} out of sequence"));
            }
            events.push(PulseEvent {
                time: parse_num(fields[1])?,
                element: BbElement::from_label(fields[2])?,
                tau_p: parse_num(fields[3])?,
            });
        }
        let (delta_t, n_cycles, tau_p) =
            header.ok_or_else(|| Error::InvalidInput("schedule dump has no header".into()))?;
        Ok(CycleSchedule { delta_t, n_cycles, tau_p, events })
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("cannot parse {s:?}")))
}

fn parse_header(rest: &str) -> Result<(f64, usize, f64)> {
    let (mut dt, mut n, mut tau) = (None, None, None);
    for kv in rest.split_whitespace() {
        match kv.split_once('=') {
            Some(("delta_t", v)) => dt = Some(parse_num(v)?),
            Some(("n_cycles", v)) => n = Some(parse_num(v)?),
            Some(("tau_p", v)) => tau = Some(parse_num(v)?),
            _ => return invalid(format!("unexpected header field {kv:?}")),
        }
    }
    match (dt, n, tau) {
        (Some(dt), Some(n), Some(tau)) => Ok((dt, n, tau)),
        _ => invalid("schedule header needs delta_t, n_cycles and tau_p"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    /// delta_t not positive, or tau_p negative.
    Parameters,
    NegativeTime,
    /// An event occurs before its predecessor.
    TimeOrder,
    /// Two events share a nominal time but are not h1† followed by h2.
    TieOrder,
    /// A cycle holds a number of events other than four.
    Cardinality { cycle: usize, count: usize },
    /// Total events differ from 4·N.
    TotalCount { expected: usize, found: usize },
    /// Event falls after 3·N·Δt.
    OutOfRange,
    /// Event element or time does not match its slot in the cycle pattern.
    Pattern { expected: BbElement, expected_time: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub index: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "event {i}: {:?}", self.rule),
            None => write!(f, "schedule: {:?}", self.rule),
        }
    }
}

/// Checks every schedule invariant and returns all violations found.
pub fn validate_schedule(s: &CycleSchedule) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |index: Option<usize>, rule: Rule| out.push(Violation { index, rule });

    if !(s.delta_t.is_finite() && s.delta_t > 0.0 && s.tau_p >= 0.0) {
        push(None, Rule::Parameters);
        return Err(out);
    }
    let tol = TIME_TOL * s.delta_t;
    let same_time = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()) / s.delta_t);

    for (i, e) in s.events.iter().enumerate() {
        if e.time < 0.0 {
            push(Some(i), Rule::NegativeTime);
        }
        if e.time > s.duration() && !same_time(e.time, s.duration()) {
            push(Some(i), Rule::OutOfRange);
        }
        if i > 0 {
            let prev = &s.events[i - 1];
            if same_time(prev.time, e.time) {
                if !(prev.element == BbElement::H1Dag && e.element == BbElement::H2) {
                    push(Some(i), Rule::TieOrder);
                }
            } else if e.time < prev.time {
                push(Some(i), Rule::TimeOrder);
            }
        }
    }

    let expected_total = 4 * s.n_cycles;
    let mut cardinality_ok = true;
    for c in 0..s.n_cycles {
        let idx: Vec<usize> = (0..s.events.len())
            .filter(|&i| s.cycle_of(s.events[i].time) == Some(c))
            .collect();
        if idx.len() != 4 {
            cardinality_ok = false;
            push(idx.first().copied(), Rule::Cardinality { cycle: c + 1, count: idx.len() });
            continue;
        }
        // match the cycle's events against the pattern as a multiset, ignoring order
        let mut used = [false; 4];
        for &i in &idx {
            let e = &s.events[i];
            let slot = CYCLE_PATTERN.iter().enumerate().position(|(k, &(offset, el))| {
                !used[k] && el == e.element && same_time(e.time, (3.0 * c as f64 + offset) * s.delta_t)
            });
            match slot {
                Some(k) => used[k] = true,
                None => {
                    let (offset, expected) = CYCLE_PATTERN
                        .iter()
                        .zip(used)
                        .find(|(_, u)| !u)
                        .map(|(p, _)| *p)
                        .unwrap_or(CYCLE_PATTERN[0]);
                    push(
                        Some(i),
                        Rule::Pattern { expected, expected_time: (3.0 * c as f64 + offset) * s.delta_t },
                    );
                }
            }
        }
    }
    if cardinality_ok && s.events.len() != expected_total {
        push(None, Rule::TotalCount { expected: expected_total, found: s.events.len() });
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Product of the given pulses in application order (first event acts first).
pub fn net_unitary(events: &[PulseEvent]) -> Operator3 {
    events
        .iter()
        .fold(Operator3::identity(), |acc, e| e.element.operator() * acc)
}

/// Net system unitary of the first cycle's pulses with free evolution removed.
pub fn net_cycle_unitary(s: &CycleSchedule) -> Result<Operator3> {
    if s.n_cycles == 0 {
        return invalid("net cycle unitary needs at least one cycle");
    }
    Ok(net_unitary(&s.cycle_events(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{h1, h2};

    #[test]
    fn single_cycle_events() {
        let s = build_schedule(1.0, 1, 0.0).unwrap();
        let got: Vec<(f64, BbElement)> = s.events.iter().map(|e| (e.time, e.element)).collect();
        assert_eq!(
            got,
            vec![
                (1.0, BbElement::H1),
                (2.0, BbElement::H1Dag),
                (2.0, BbElement::H2),
                (3.0, BbElement::H2Dag)
            ]
        );
        assert_eq!(s.duration(), 3.0);
    }

    #[test]
    fn empty_schedule() {
        let s = build_schedule(1.0, 0, 0.0).unwrap();
        assert!(s.events.is_empty());
        assert_eq!(s.duration(), 0.0);
        assert!(validate_schedule(&s).is_ok());
        assert!(net_cycle_unitary(&s).is_err());
    }

    #[test]
    fn three_cycles_enumerated() {
        let s = build_schedule(0.5, 3, 0.0).unwrap();
        // enumerate the pattern by hand: cycle c starts at 1.5·c
        let mut expect = Vec::new();
        for c in 0..3 {
            let t0 = 1.5 * c as f64;
            expect.extend([t0 + 0.5, t0 + 1.0, t0 + 1.0, t0 + 1.5]);
        }
        let times: Vec<f64> = s.events.iter().map(|e| e.time).collect();
        assert_eq!(times.len(), 12);
        for (a, b) in times.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(*times.last().unwrap(), 4.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_schedule(0.0, 1, 0.0).is_err());
        assert!(build_schedule(-1.0, 1, 0.0).is_err());
        assert!(build_schedule(f64::NAN, 1, 0.0).is_err());
        assert!(build_schedule(1.0, 1, -0.1).is_err());
    }

    #[test]
    fn validation_accepts_canonical() {
        let s = build_schedule(0.37, 2, 0.01).unwrap();
        assert_eq!(validate_schedule(&s), Ok(()));
    }

    #[test]
    fn swapped_tie_is_one_violation() {
        let mut s = build_schedule(1.0, 2, 0.0).unwrap();
        s.events.swap(1, 2);
        let v = validate_schedule(&s).unwrap_err();
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, Rule::TieOrder);
        assert_eq!(v[0].index, Some(2));
    }

    #[test]
    fn extra_event_is_cardinality_violation() {
        let mut s = build_schedule(1.0, 2, 0.0).unwrap();
        let extra = PulseEvent { time: 2.5, element: BbElement::H1, tau_p: 0.0 };
        s.events.insert(3, extra);
        let v = validate_schedule(&s).unwrap_err();
        assert!(v.iter().any(|x| x.rule == Rule::Cardinality { cycle: 1, count: 5 }), "{v:?}");
    }

    #[test]
    fn wrong_element_is_pattern_violation() {
        let mut s = build_schedule(1.0, 1, 0.0).unwrap();
        s.events[0].element = BbElement::H2Dag;
        let v = validate_schedule(&s).unwrap_err();
        assert!(v.iter().any(|x| matches!(x.rule, Rule::Pattern { .. })));
    }

    #[test]
    fn out_of_order_time() {
        let mut s = build_schedule(1.0, 1, 0.0).unwrap();
        s.events[3].time = 1.5;
        let v = validate_schedule(&s).unwrap_err();
        assert!(v.iter().any(|x| x.rule == Rule::TimeOrder));
    }

    #[test]
    fn cycle_unitary_cancels() {
        let s = build_schedule(0.8, 3, 0.0).unwrap();
        let u = net_cycle_unitary(&s).unwrap();
        assert!((u - Operator3::identity()).max_norm() < 1e-12);
        assert!((net_unitary(&s.events[..1]) - h1()).max_norm() < 1e-15);
        assert!((net_unitary(&s.events[..2]) - Operator3::identity()).max_norm() < 1e-12);
        assert!((net_unitary(&s.events[..3]) - h2()).max_norm() < 1e-12);
    }

    #[test]
    fn dump_format() {
        let s = build_schedule(1.0, 1, 0.0).unwrap();
        assert_eq!(
            s.dump(),
            "# delta_t=1 n_cycles=1 tau_p=0\n0\t1\th1\t0\n1\t2\th1_dag\t0\n2\t2\th2\t0\n3\t3\th2_dag\t0\n"
        );
        let empty = build_schedule(2.0, 0, 0.5).unwrap();
        assert_eq!(empty.dump(), "# delta_t=2 n_cycles=0 tau_p=0.5\n");
    }

    #[test]
    fn dump_round_trip_validates() {
        let s = build_schedule(0.1, 7, 0.001).unwrap();
        let back = CycleSchedule::parse_dump(&format!("# config echo\n{}", s.dump())).unwrap();
        assert_eq!(validate_schedule(&back), Ok(()));
        assert_eq!(back.events.len(), 28);
        assert!(CycleSchedule::parse_dump("0\t1\th1\t0\n").is_err());
    }
}
