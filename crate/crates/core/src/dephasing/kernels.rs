//! Per-mode dephasing kernels.
//!
//! All kernels are written in cancellation-free trigonometric form
//! (e^{ix} − 1 = −2 sin²(x/2) + i sin x) so they stay accurate down to ω = 0.

use num_complex::Complex64;

use crate::algebra::{sigma_op, Axis, LevelPair, Operator3};

/// Below this value of |1 − e^{3iωΔt}| the geometric closed form of `f_sum`
/// is replaced by direct summation.
pub const RESONANCE_TOL: f64 = 1e-6;

/// Bath channel: k1 couples through σ_z^(2,0), k2 through σ_z^(2,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    K1,
    K2,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::K1, Channel::K2];

    pub fn coupling_operator(&self) -> Operator3 {
        sigma_op(Axis::Z, self.pair())
    }

    pub fn pair(&self) -> LevelPair {
        match self {
            Channel::K1 => LevelPair::P20,
            Channel::K2 => LevelPair::P21,
        }
    }

    /// Diagonal of the coupling operator in basis order (|0⟩, |1⟩, |2⟩).
    pub fn level_shifts(&self) -> [f64; 3] {
        match self {
            Channel::K1 => [-1.0, 0.0, 1.0],
            Channel::K2 => [0.0, -1.0, 1.0],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Channel::K1 => "k1",
            Channel::K2 => "k2",
        }
    }
}

/// e^{ix} − 1
fn expm1_i(x: f64) -> Complex64 {
    let s = (0.5 * x).sin();
    Complex64::new(-2.0 * s * s, x.sin())
}

/// f(N, ω, Δt) = Σ_{n=1}^{N} e^{3i(n−1)ωΔt}
pub fn f_sum(n_cycles: usize, omega: f64, delta_t: f64) -> Complex64 {
    let theta = 3.0 * omega * delta_t;
    let denom = (0.5 * theta).sin();
    if 2.0 * denom.abs() < RESONANCE_TOL {
        return (0..n_cycles)
            .map(|n| Complex64::from_polar(1.0, n as f64 * theta))
            .sum();
    }
    let n = n_cycles as f64;
    Complex64::from_polar(1.0, 0.5 * (n - 1.0) * theta) * ((0.5 * n * theta).sin() / denom)
}

/// ξ(ω, Δt) = (2/ω)(1 − e^{iωΔt}), with the ω → 0 limit −2iΔt.
pub fn xi_kernel(omega: f64, delta_t: f64) -> Complex64 {
    let x = omega * delta_t;
    if x == 0.0 {
        return Complex64::new(0.0, -2.0 * delta_t);
    }
    let s = (0.5 * x).sin();
    // 2Δt · (1 − e^{ix}) / x
    Complex64::new(2.0 * s * s / x, -x.sin() / x) * (2.0 * delta_t)
}

/// Phase bracket multiplying −ξ/2 in the controlled kernel of each channel.
pub fn eta_bracket(channel: Channel, omega: f64, delta_t: f64) -> Complex64 {
    let x = omega * delta_t;
    let e1 = expm1_i(x);
    let e2 = expm1_i(2.0 * x);
    match channel {
        // 2 − e^{ix} − e^{2ix}
        Channel::K1 => -e1 - e2,
        // 1 + e^{ix} − 2e^{2ix}
        Channel::K2 => e1 - 2.0 * e2,
    }
}

/// Controlled (pulsed) kernel η = −½ · f · ξ · bracket.
pub fn eta_kernel(channel: Channel, omega: f64, delta_t: f64, n_cycles: usize) -> Complex64 {
    -0.5 * f_sum(n_cycles, omega, delta_t) * xi_kernel(omega, delta_t) * eta_bracket(channel, omega, delta_t)
}

/// Reference kernel f · ξ used for the uncontrolled exponent Γ′.
pub fn free_kernel(omega: f64, delta_t: f64, n_cycles: usize) -> Complex64 {
    f_sum(n_cycles, omega, delta_t) * xi_kernel(omega, delta_t)
}

/// Displacement of the ρ₀₂ bath overlap under uninterrupted free evolution
/// for `total_time`: ½(s₀ − s₂)·ξ(ω, t).
pub fn free_exact_kernel(channel: Channel, omega: f64, total_time: f64) -> Complex64 {
    let s = channel.level_shifts();
    0.5 * (s[0] - s[2]) * xi_kernel(omega, total_time)
}

/// ω·coth(ω / 2T), finite at ω = 0 (value 2T); equals ω at T = 0.
pub fn omega_coth(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return omega;
    }
    let y = omega / (2.0 * temperature);
    let y_coth_y = if y < 1e-4 {
        1.0 + y * y / 3.0
    } else if y > 20.0 {
        y
    } else {
        y / y.tanh()
    };
    2.0 * temperature * y_coth_y
}

/// coth(ω / 2T) with the T = 0 value 1.
pub fn thermal_factor(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        1.0 / (omega / (2.0 * temperature)).tanh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_f(n: usize, omega: f64, dt: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            acc += Complex64::new(0.0, 3.0 * (k as f64 - 1.0) * omega * dt).exp();
        }
        acc
    }

    #[test]
    fn f_sum_values() {
        for (omega, dt) in [(0.3, 1.7), (5.0, 0.01), (0.0, 2.0)] {
            assert!((f_sum(1, omega, dt) - 1.0).norm() < 1e-15);
        }
        assert!((f_sum(7, 0.0, 0.3) - 7.0).norm() < 1e-15);
        // 3ωΔt = π
        assert!(f_sum(2, PI / 3.0, 1.0).norm() < 1e-15);
        let got = f_sum(4, 0.2, 1.0);
        let want = naive_f(4, 0.2, 1.0);
        assert!((got - want).norm() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn f_sum_near_resonance() {
        for n in [3, 30, 101] {
            for eps in [0.0, 1e-12, 1e-8, 1e-6, 1e-4] {
                let omega = 2.0 * PI / 3.0 + eps;
                let got = f_sum(n, omega, 1.0);
                let want = naive_f(n, omega, 1.0);
                assert!((got - want).norm() < 1e-9 * n as f64, "n={n} eps={eps}");
                assert!(got.norm() <= n as f64 + 1e-9);
            }
        }
    }

    #[test]
    fn xi_values() {
        assert!((xi_kernel(1.0, PI) - 4.0).norm() < 1e-14);
        assert!(xi_kernel(1.0, 2.0 * PI).norm() < 1e-14);
        assert!((xi_kernel(1e-12, 0.7) - Complex64::new(0.0, -1.4)).norm() < 1e-9);
        assert_eq!(xi_kernel(0.0, 0.7), Complex64::new(0.0, -1.4));
        let direct = 2.0 / 0.37 * (1.0 - Complex64::new(0.0, 0.37 * 2.2).exp());
        assert!((xi_kernel(0.37, 2.2) - direct).norm() < 1e-14);
    }

    #[test]
    fn eta_values() {
        for ch in Channel::BOTH {
            assert!(eta_kernel(ch, 2.0 * PI, 1.0, 3).norm() < 1e-13);
            assert!(eta_kernel(ch, 1e-10, 1.0, 5).norm() < 1e-8);
        }
        // ωΔt = π, N = 1: bracket 2 − (−1) − 1 = 2 → −ξ = −4/ω
        let omega = 2.0;
        let got = eta_kernel(Channel::K1, omega, PI / omega, 1);
        assert!((got - Complex64::new(-4.0 / omega, 0.0)).norm() < 1e-13, "{got}");
    }

    #[test]
    fn eta_k2_recomposed() {
        let (omega, dt, n) = (0.5, 1.0, 3);
        let e = |k: f64| Complex64::new(0.0, k * omega * dt).exp();
        let f = naive_f(n, omega, dt);
        let xi = 2.0 / omega * (1.0 - e(1.0));
        let want = -0.5 * f * xi * (1.0 + e(1.0) - 2.0 * e(2.0));
        let got = eta_kernel(Channel::K2, omega, dt, n);
        assert!((got - want).norm() < 1e-13);
        let want_k1 = -0.5 * f * xi * (2.0 - e(1.0) - e(2.0));
        assert!((eta_kernel(Channel::K1, omega, dt, n) - want_k1).norm() < 1e-13);
    }

    #[test]
    fn free_exact_weights() {
        let xi = xi_kernel(0.9, 2.5);
        assert!((free_exact_kernel(Channel::K1, 0.9, 2.5) + xi).norm() < 1e-15);
        assert!((free_exact_kernel(Channel::K2, 0.9, 2.5) + 0.5 * xi).norm() < 1e-15);
    }

    #[test]
    fn thermal_helpers() {
        assert_eq!(omega_coth(0.7, 0.0), 0.7);
        assert!((omega_coth(0.0, 0.3) - 0.6).abs() < 1e-15);
        let direct = 0.7 / (0.7f64 / 0.6).tanh();
        assert!((omega_coth(0.7, 0.3) - direct).abs() < 1e-14);
        assert!((omega_coth(100.0, 0.01) - 100.0).abs() < 1e-12);
        assert_eq!(thermal_factor(3.0, 0.0), 1.0);
    }
}
