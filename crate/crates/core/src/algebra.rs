//! Exact 3×3 operator algebra on span{|0⟩, |1⟩, |2⟩}.
//!
//! Basis order is always (|0⟩, |1⟩, |2⟩); row `r`, column `c` of an
//! [`Operator3`] is ⟨r|A|c⟩.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::format::sig;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used for unitarity / hermiticity tags and the decomposition checks.
pub const EXACT_TOL: f64 = 1e-12;

/// Entries below this magnitude are never used as a global-phase reference.
pub const PHASE_REF_MIN: f64 = 1e-8;

#[derive(Clone, Copy, PartialEq)]
pub struct Operator3 {
    pub entries: [[Complex64; 3]; 3],
}

impl Operator3 {
    pub const fn new(entries: [[Complex64; 3]; 3]) -> Self {
        Operator3 { entries }
    }

    pub const fn zero() -> Self {
        Operator3 { entries: [[ZERO; 3]; 3] }
    }

    pub const fn identity() -> Self {
        Operator3 {
            entries: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
        }
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Self::zero();
        for (k, v) in d.into_iter().enumerate() {
            m.entries[k][k] = Complex64::new(v, 0.0);
        }
        m
    }

    /// |row⟩⟨col|
    pub fn ket_bra(row: usize, col: usize) -> Self {
        let mut m = Self::zero();
        m.entries[row][col] = ONE;
        m
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for r in 0..3 {
            for c in 0..3 {
                m.entries[r][c] = self.entries[c][r].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.entries.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..3).map(|k| self.entries[k][k]).sum()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn unitarity_residual(&self) -> f64 {
        (self.adjoint() * *self - Self::identity()).max_norm()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).max_norm()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_residual() <= EXACT_TOL
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= EXACT_TOL
    }

    /// Returns `Some(phase)` when `self = phase · other` to within `tol`.
    ///
    /// The phase is read off the first entry of `other` (row-major) whose
    /// modulus exceeds [`PHASE_REF_MIN`].
    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> Option<Complex64> {
        let (r, c) = (0..9)
            .map(|k| (k / 3, k % 3))
            .find(|&(r, c)| other.entries[r][c].norm() > PHASE_REF_MIN)?;
        let phase = self.entries[r][c] / other.entries[r][c];
        if (phase.norm() - 1.0).abs() > tol {
            return None;
        }
        ((*self - other.scale(phase)).max_norm() <= tol).then_some(phase)
    }

    /// Debug dump: nine lines of `row col re im`, row-major, 17 significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in 0..3 {
            for c in 0..3 {
                let z = self.entries[r][c];
                out.push_str(&format!("{r} {c} {} {}\n", sig(z.re, 17), sig(z.im, 17)));
            }
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut m = Self::zero();
        let mut seen = [[false; 3]; 3];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return invalid(format!("operator dump line needs 4 fields: {line:?}"));
            }
            let idx = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if v < 3 => Ok(v),
                    _ => invalid(format!("bad operator index {s:?}")),
                }
            };
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| crate::Error::InvalidInput(format!("bad number {s:?}")))
            };
            let (r, c) = (idx(fields[0])?, idx(fields[1])?);
            m.entries[r][c] = Complex64::new(num(fields[2])?, num(fields[3])?);
            seen[r][c] = true;
        }
        if seen.iter().flatten().any(|s| !s) {
            return invalid("operator dump is missing entries");
        }
        Ok(m)
    }
}

impl fmt::Debug for Operator3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator3[")?;
        for row in &self.entries {
            writeln!(f, "  {:.6} {:.6} {:.6}", row[0], row[1], row[2])?;
        }
        write!(f, "]")
    }
}

impl Add for Operator3 {
    type Output = Operator3;
    fn add(mut self, rhs: Self) -> Self {
        for r in 0..3 {
            for c in 0..3 {
                self.entries[r][c] += rhs.entries[r][c];
            }
        }
        self
    }
}

impl Sub for Operator3 {
    type Output = Operator3;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Operator3 {
    type Output = Operator3;
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl Mul for Operator3 {
    type Output = Operator3;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Operator3::zero();
        for r in 0..3 {
            for c in 0..3 {
                m.entries[r][c] = (0..3).map(|k| self.entries[r][k] * rhs.entries[k][c]).sum();
            }
        }
        m
    }
}

impl Mul<Operator3> for f64 {
    type Output = Operator3;
    fn mul(self, rhs: Operator3) -> Operator3 {
        rhs.scale(Complex64::new(self, 0.0))
    }
}

impl Mul<Operator3> for Complex64 {
    type Output = Operator3;
    fn mul(self, rhs: Operator3) -> Operator3 {
        rhs.scale(self)
    }
}

/// One of the three transitions of the Λ atom, stored as (upper, lower).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LevelPair {
    upper: usize,
    lower: usize,
}

impl LevelPair {
    pub const P21: LevelPair = LevelPair { upper: 2, lower: 1 };
    pub const P20: LevelPair = LevelPair { upper: 2, lower: 0 };
    pub const P10: LevelPair = LevelPair { upper: 1, lower: 0 };

    pub fn new(upper: usize, lower: usize) -> Result<Self> {
        match (upper, lower) {
            (2, 1) => Ok(Self::P21),
            (2, 0) => Ok(Self::P20),
            (1, 0) => Ok(Self::P10),
            _ => invalid(format!("level pair ({upper},{lower}) is not one of (2,1), (2,0), (1,0)")),
        }
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    /// Projector onto the two-level block spanned by this pair.
    pub fn block_projector(&self) -> Operator3 {
        Operator3::ket_bra(self.upper, self.upper) + Operator3::ket_bra(self.lower, self.lower)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub fn sigma_op(axis: Axis, pair: LevelPair) -> Operator3 {
    let (u, l) = (pair.upper, pair.lower);
    let up = Operator3::ket_bra(u, l);
    let down = Operator3::ket_bra(l, u);
    match axis {
        Axis::Z => Operator3::ket_bra(u, u) - Operator3::ket_bra(l, l),
        Axis::X => up + down,
        Axis::Y => I * (up - down),
        Axis::Plus => up,
        Axis::Minus => down,
    }
}

/// exp(i·angle·σ_x) on the two-level block of `pair`, identity on the spectator level.
pub fn x_rotation(pair: LevelPair, angle: f64) -> Operator3 {
    let block = pair.block_projector();
    let spectator = Operator3::identity() - block;
    spectator + angle.cos() * block + Complex64::new(0.0, angle.sin()) * sigma_op(Axis::X, pair)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemLevels {
    e0: f64,
    e1: f64,
    e2: f64,
}

impl SystemLevels {
    pub fn new(e0: f64, e1: f64, e2: f64) -> Result<Self> {
        if !(e0.is_finite() && e1.is_finite() && e2.is_finite()) {
            return invalid("level energies must be finite");
        }
        if !(e0 < e1 && e1 < e2) {
            return invalid(format!("energies must satisfy E0 < E1 < E2, got ({e0}, {e1}, {e2})"));
        }
        Ok(SystemLevels { e0, e1, e2 })
    }

    pub fn energies(&self) -> [f64; 3] {
        [self.e0, self.e1, self.e2]
    }

    pub fn omega10(&self) -> f64 {
        self.e1 - self.e0
    }

    pub fn omega20(&self) -> f64 {
        self.e2 - self.e0
    }

    pub fn omega21(&self) -> f64 {
        self.e2 - self.e1
    }
}

/// Free Hamiltonian diag(E0, E1, E2).
pub fn build_h0(levels: &SystemLevels) -> Operator3 {
    Operator3::diag(levels.energies())
}

/// H0 rebuilt from the transition operators:
/// (ω10/3)σ_z^(1,0) + (ω20/3)σ_z^(2,0) + (ω21/3)σ_z^(2,1) + (E0+E1+E2)/3.
pub fn h0_from_transitions(levels: &SystemLevels) -> Operator3 {
    let [e0, e1, e2] = levels.energies();
    (levels.omega10() / 3.0) * sigma_op(Axis::Z, LevelPair::P10)
        + (levels.omega20() / 3.0) * sigma_op(Axis::Z, LevelPair::P20)
        + (levels.omega21() / 3.0) * sigma_op(Axis::Z, LevelPair::P21)
        + ((e0 + e1 + e2) / 3.0) * Operator3::identity()
}

/// Labels for the bang-bang pulses and their adjoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BbElement {
    H1,
    H1Dag,
    H2,
    H2Dag,
}

impl BbElement {
    pub const ALL: [BbElement; 4] = [BbElement::H1, BbElement::H1Dag, BbElement::H2, BbElement::H2Dag];

    pub fn label(&self) -> &'static str {
        match self {
            BbElement::H1 => "h1",
            BbElement::H1Dag => "h1_dag",
            BbElement::H2 => "h2",
            BbElement::H2Dag => "h2_dag",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.label() == s)
            .ok_or_else(|| crate::Error::InvalidInput(format!("unknown pulse label {s:?}")))
    }

    pub fn operator(&self) -> Operator3 {
        match self {
            BbElement::H1 => h1(),
            BbElement::H1Dag => h1().adjoint(),
            BbElement::H2 => h2(),
            BbElement::H2Dag => h2().adjoint(),
        }
    }

    /// exp(±iπ/2 σ_x) factors in matrix-product order (leftmost acts last).
    pub fn pulse_factors(&self) -> [Operator3; 2] {
        let half_pi = std::f64::consts::FRAC_PI_2;
        match self {
            BbElement::H1 => [x_rotation(LevelPair::P21, half_pi), x_rotation(LevelPair::P20, half_pi)],
            BbElement::H1Dag => [x_rotation(LevelPair::P20, -half_pi), x_rotation(LevelPair::P21, -half_pi)],
            BbElement::H2 => [x_rotation(LevelPair::P20, -half_pi), x_rotation(LevelPair::P21, -half_pi)],
            BbElement::H2Dag => [x_rotation(LevelPair::P21, half_pi), x_rotation(LevelPair::P20, half_pi)],
        }
    }
}

impl fmt::Display for BbElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn h1() -> Operator3 {
    Operator3::new([[ZERO, ZERO, I], [-ONE, ZERO, ZERO], [ZERO, I, ZERO]])
}

pub fn h2() -> Operator3 {
    Operator3::new([[ZERO, -ONE, ZERO], [ZERO, ZERO, -I], [-I, ZERO, ZERO]])
}

/// Max-entry distance between a bang-bang element and its two-pulse product.
pub fn decomposition_residual(element: BbElement) -> f64 {
    let [left, right] = element.pulse_factors();
    (left * right - element.operator()).max_norm()
}

/// Builds h1 or h2 and checks it against its two-pulse factorization.
pub fn build_bb_element(element: BbElement) -> Result<Operator3> {
    let residual = decomposition_residual(element);
    if residual > EXACT_TOL {
        return Err(crate::Error::Numerical(format!(
            "{element} differs from its pulse product by {residual:e}"
        )));
    }
    Ok(element.operator())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingGroup {
    elements: Vec<Operator3>,
}

impl DecouplingGroup {
    pub fn new(elements: Vec<Operator3>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return invalid("decoupling group must not be empty");
        };
        if (*first - Operator3::identity()).max_norm() > EXACT_TOL {
            return invalid("first group element must be the identity");
        }
        for (k, g) in elements.iter().enumerate() {
            if !g.is_finite() || !g.is_unitary() {
                return invalid(format!(
                    "group element {k} is not unitary (residual {:e})",
                    g.unitarity_residual()
                ));
            }
        }
        Ok(DecouplingGroup { elements })
    }

    /// {I, h1, h2}.
    pub fn lambda() -> Self {
        DecouplingGroup { elements: vec![Operator3::identity(), h1(), h2()] }
    }

    pub fn elements(&self) -> &[Operator3] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Π_G(A) = (1/|G|) Σ_k g_k† A g_k.
pub fn symmetrize(a: &Operator3, group: &DecouplingGroup) -> Operator3 {
    symmetrize_with(a, group.elements())
}

/// Same average over an arbitrary element list (no group checks).
pub fn symmetrize_with(a: &Operator3, elements: &[Operator3]) -> Operator3 {
    let sum = elements.iter().fold(Operator3::zero(), |acc, g| acc + g.adjoint() * *a * *g);
    (1.0 / elements.len().max(1) as f64) * sum
}

/// Product g_i·g_j matched against the group up to a global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureEntry {
    pub left: usize,
    pub right: usize,
    pub product: Option<(usize, Complex64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    pub entries: Vec<ClosureEntry>,
}

impl ClosureReport {
    pub fn is_closed(&self) -> bool {
        self.entries.iter().all(|e| e.product.is_some())
    }

    pub fn lookup(&self, left: usize, right: usize) -> Option<&ClosureEntry> {
        self.entries.iter().find(|e| e.left == left && e.right == right)
    }

    pub fn render(&self, names: &[&str]) -> String {
        let name = |k: usize| names.get(k).copied().unwrap_or("?");
        let mut out = String::new();
        for e in &self.entries {
            let rhs = match e.product {
                Some((m, phase)) => format!("{} phase ({}, {})", name(m), sig(phase.re + 0.0, 6), sig(phase.im + 0.0, 6)),
                None => "not in group".to_string(),
            };
            out.push_str(&format!("{} * {} = {}\n", name(e.left), name(e.right), rhs));
        }
        out
    }
}

pub fn verify_group_closure(group: &DecouplingGroup) -> ClosureReport {
    let els = group.elements();
    let mut entries = Vec::with_capacity(els.len() * els.len());
    for (i, gi) in els.iter().enumerate() {
        for (j, gj) in els.iter().enumerate() {
            let p = *gi * *gj;
            let product = els
                .iter()
                .enumerate()
                .find_map(|(m, gm)| p.equals_up_to_phase(gm, 1e-10).map(|ph| (m, ph)));
            entries.push(ClosureEntry { left: i, right: j, product });
        }
    }
    ClosureReport { entries }
}
