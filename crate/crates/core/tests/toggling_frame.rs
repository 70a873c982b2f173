//! Kernels checked against a direct toggling-frame integration.
//!
//! Each level i of the coupling operator picks up a piecewise-constant sign
//! s_i(t) = (U_c(t)† S U_c(t))_{ii} between pulses, and the ρ₀₂ kernel is
//! D₀ − D₂ with D_i = ∫₀ᵗ s_i(t') e^{iωt'} dt'.

use num_complex::Complex64;

use lambda_decouple::algebra::Operator3;
use lambda_decouple::dephasing::kernels::{eta_kernel, free_exact_kernel, free_kernel};
use lambda_decouple::dephasing::{kernel_norm_sqr, Channel, ControlParams, Regime};
use lambda_decouple::schedule::PulseEvent;
use lambda_decouple::build_schedule;

fn segment(omega: f64, a: f64, b: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(b - a, 0.0);
    }
    (Complex64::from_polar(1.0, omega * b) - Complex64::from_polar(1.0, omega * a)) / Complex64::new(0.0, omega)
}

fn toggling_kernel(channel: Channel, omega: f64, events: &[PulseEvent], end: f64, pulses: bool) -> Complex64 {
    let s = channel.coupling_operator();
    let mut u = Operator3::identity();
    let mut now = 0.0;
    let mut d = [Complex64::new(0.0, 0.0); 3];
    let accumulate = |u: &Operator3, a: f64, b: f64, d: &mut [Complex64; 3]| {
        let st = u.adjoint() * s * *u;
        let w = segment(omega, a, b);
        for (i, di) in d.iter_mut().enumerate() {
            *di += st.get(i, i) * w;
        }
    };
    for e in events {
        accumulate(&u, now, e.time, &mut d);
        now = e.time;
        if pulses {
            u = e.element.operator() * u;
        }
    }
    accumulate(&u, now, end, &mut d);
    d[0] - d[2]
}

#[test]
fn controlled_kernel_matches_toggling_frame() {
    for channel in Channel::BOTH {
        for &(dt, n) in &[(0.3, 1usize), (0.7, 3), (1.9, 5), (0.05, 12)] {
            let sched = build_schedule(dt, n, 0.0).unwrap();
            for &omega in &[1e-3, 0.4, 1.7, 2.0 * std::f64::consts::PI / (3.0 * dt), 9.3] {
                let want = toggling_kernel(channel, omega, &sched.events, sched.duration(), true).norm();
                let got = eta_kernel(channel, omega, dt, n).norm();
                assert!((got - want).abs() < 1e-10 * want.max(1.0), "{channel:?} dt={dt} n={n} w={omega}: {got} vs {want}");
                let ctrl = ControlParams::new(dt, n).unwrap();
                let sq = kernel_norm_sqr(Regime::Controlled, channel, omega, &ctrl);
                assert!((sq - want * want).abs() < 1e-9 * (want * want).max(1.0));
            }
        }
    }
}

#[test]
fn free_kernel_matches_unpulsed_timeline() {
    for channel in Channel::BOTH {
        for &(dt, n) in &[(0.3, 1usize), (1.1, 4)] {
            let sched = build_schedule(dt, n, 0.0).unwrap();
            for &omega in &[0.2, 1.3, 5.0] {
                let want = toggling_kernel(channel, omega, &sched.events, sched.duration(), false);
                let got = free_exact_kernel(channel, omega, sched.duration());
                assert!((got.norm() - want.norm()).abs() < 1e-10 * want.norm().max(1.0));
            }
        }
    }
}

#[test]
fn reference_kernel_is_single_interval_sum() {
    // f·ξ(Δt) equals the free displacement of the first sub-interval of every cycle
    // coherently added; the k1 sign difference s₀ − s₂ = −2 is dropped in this reference.
    let (dt, n, omega) = (0.4, 6, 0.9);
    let mut want = Complex64::new(0.0, 0.0);
    for c in 0..n {
        let a = 3.0 * c as f64 * dt;
        want += segment(omega, a, a + dt);
    }
    let got = free_kernel(omega, dt, n);
    assert!((got.norm() - 2.0 * want.norm()).abs() < 1e-12);
}
