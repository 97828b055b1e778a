//! Normal-mode frequencies and energy levels of a [`QuadraticForm`].
//!
//! The classical flow of the six-parameter form has the biquadratic
//! characteristic polynomial `λ⁴ + Sλ² + P`, so the squared eigenfrequencies
//! are the roots of `w² − Sw + P`:
//!
//! ```text
//! S = a k₁ + b k₂ + 2 l₁ l₂
//! P = a b k₁ k₂ − b k₁ l₂² − a k₂ l₁² + l₁² l₂²
//! ```
//!
//! with `a = 1/M₁`, `b = 1/M₂`, `k₁ = M₁Ω₁²`, `k₂ = M₂Ω₂²`.
//!
//! The ladder-operator route with the printed `C₁`, `C₂` coefficients is kept
//! as [`paper_invariants`]. It agrees with `(S, P)` only once the ladder
//! coefficients `c`, `d` are halved; see [`LadderCoefficients::halved`].

use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticForm;

/// Round-off band for the stability conditions on `(S, P)`.
pub const STABILITY_TOL: f64 = 1e-12;

/// Relative band (in units of `ħΩ̃₁`) within which two levels count as
/// degenerate.
pub const LEVEL_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Invariants of the classical dynamical matrix.
    OracleValidated,
    /// `C₁`, `C₂` built from the printed ladder coefficients, `ħ` prefactors
    /// dropped.
    PaperPrinted,
}

/// Sum `S` and product `P` of the squared normal-mode frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeInvariants {
    pub s: f64,
    pub p: f64,
    pub convention: Convention,
}

impl ModeInvariants {
    pub fn new(s: f64, p: f64) -> Self {
        Self {
            s,
            p,
            convention: Convention::OracleValidated,
        }
    }

    /// `max(|ΔS|, |ΔP|)`.
    pub fn max_abs_difference(&self, other: &ModeInvariants) -> f64 {
        (self.s - other.s).abs().max((self.p - other.p).abs())
    }

    /// `max(|ΔS|/max(1,|S|), |ΔP|/max(1,|P|))` against `other`.
    pub fn max_relative_difference(&self, other: &ModeInvariants) -> f64 {
        let ds = (self.s - other.s).abs() / other.s.abs().max(1.0);
        let dp = (self.p - other.p).abs() / other.p.abs().max(1.0);
        ds.max(dp)
    }
}

/// `S = a k₁ + b k₂ + 2 l₁ l₂` and
/// `P = ab k₁k₂ − b k₁ l₂² − a k₂ l₁² + l₁²l₂²`, with `a = 1/M₁`, `b = 1/M₂`,
/// `kᵢ = MᵢΩᵢ²`.
///
/// `P` is evaluated as `(a k₂ − l₂²)(b k₁ − l₁²)`: each factor is the
/// determinant of one decoupled 2×2 block, and a zero mode makes a factor
/// vanish on its own, so round-off in `P` stays quadratic.
pub fn invariants(qf: &QuadraticForm) -> ModeInvariants {
    let (a, b, k1, k2, l1, l2) = (qf.a(), qf.b(), qf.k1(), qf.k2(), qf.l1, qf.l2);
    let s = a * k1 + b * k2 + 2.0 * l1 * l2;
    let p = (a * k2 - l2 * l2) * (b * k1 - l1 * l1);
    ModeInvariants::new(s, p)
}

/// Coefficients of the pair-creation (`c`) and exchange (`d`) terms of the
/// ladder-operator Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderCoefficients {
    pub c: f64,
    pub d: f64,
}

impl LadderCoefficients {
    /// `(c/2, d/2)`, the normalisation under which `C₁ = S`, `C₂ = P`.
    pub fn halved(&self) -> Self {
        Self {
            c: self.c / 2.0,
            d: self.d / 2.0,
        }
    }
}

fn require_positive_modes(qf: &QuadraticForm) -> Result<()> {
    if qf.m1 * qf.omega1() > 0.0 && qf.m2 * qf.omega2() > 0.0 {
        Ok(())
    } else {
        Err(Error::ZeroModeUnsupported(
            "ladder substitution needs M1*Omega1 > 0 and M2*Omega2 > 0",
        ))
    }
}

/// Printed `c`, `d`; for `l₁ < 0` the pair is evaluated at `|l₁|` and swapped.
pub fn ladder_coefficients(qf: &QuadraticForm) -> Result<LadderCoefficients> {
    require_positive_modes(qf)?;
    let ratio = ((qf.m2 * qf.omega2()) / (qf.m1 * qf.omega1())).sqrt();
    let l1 = qf.l1.abs();
    let c = l1 * ratio - qf.l2 / ratio;
    let d = l1 * ratio + qf.l2 / ratio;
    Ok(if qf.l1 < 0.0 {
        LadderCoefficients { c: d, d: c }
    } else {
        LadderCoefficients { c, d }
    })
}

/// `C₁ = Ω₁² + Ω₂² − 2c² + 2d²`,
/// `C₂ = Ω₁²Ω₂² − 2Ω₁Ω₂(c² + d²) + (c² − d²)²` for the given `c`, `d`.
pub fn paper_invariants_from(qf: &QuadraticForm, ladder: &LadderCoefficients) -> ModeInvariants {
    let (c2, d2) = (ladder.c * ladder.c, ladder.d * ladder.d);
    let (w1, w2) = (qf.omega1(), qf.omega2());
    ModeInvariants {
        s: qf.omega1_sq + qf.omega2_sq - 2.0 * c2 + 2.0 * d2,
        p: qf.omega1_sq * qf.omega2_sq - 2.0 * w1 * w2 * (c2 + d2) + (c2 - d2).powi(2),
        convention: Convention::PaperPrinted,
    }
}

/// `C₁`, `C₂` with the printed ladder coefficients.
pub fn paper_invariants(qf: &QuadraticForm) -> Result<ModeInvariants> {
    Ok(paper_invariants_from(qf, &ladder_coefficients(qf)?))
}

/// Normal-mode frequencies, `omega_tilde_1 ≥ omega_tilde_2 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrequencies {
    pub omega_tilde_1: f64,
    pub omega_tilde_2: f64,
}

impl EigenFrequencies {
    /// `(Ω̃₁² + Ω̃₂², Ω̃₁²Ω̃₂²)`.
    pub fn invariants(&self) -> ModeInvariants {
        let (w1, w2) = (self.omega_tilde_1.powi(2), self.omega_tilde_2.powi(2));
        ModeInvariants::new(w1 + w2, w1 * w2)
    }

    pub fn has_zero_mode(&self) -> bool {
        self.omega_tilde_2 == 0.0
    }

    pub fn max_abs_difference(&self, other: &EigenFrequencies) -> f64 {
        (self.omega_tilde_1 - other.omega_tilde_1)
            .abs()
            .max((self.omega_tilde_2 - other.omega_tilde_2).abs())
    }
}

/// Roots of `w² − S w + P`; values inside the round-off band of zero are
/// taken as zero, anything beyond it is reported as unstable.
pub fn eigenfrequencies(inv: &ModeInvariants) -> Result<EigenFrequencies> {
    let (s, p) = (inv.s, inv.p);
    let unstable = Err(Error::DynamicallyUnstable { s, p });
    if !(s.is_finite() && p.is_finite()) {
        return unstable;
    }
    let band = STABILITY_TOL * s * s;
    if s < 0.0 || p < -band {
        return unstable;
    }
    let disc = s * s / 4.0 - p;
    if disc < -band / 4.0 {
        return unstable;
    }
    let p = p.max(0.0);
    let upper = s / 2.0 + disc.max(0.0).sqrt();
    // P / Ω̃₁² avoids the cancellation in S/2 − √(S²/4 − P) for a soft mode.
    let lower = if upper > 0.0 { p / upper } else { 0.0 };
    Ok(EigenFrequencies {
        omega_tilde_1: upper.sqrt(),
        omega_tilde_2: lower.sqrt(),
    })
}

/// Frequencies of `qf` in the requested convention.
pub fn spectrum(qf: &QuadraticForm, convention: Convention) -> Result<EigenFrequencies> {
    match convention {
        Convention::OracleValidated => eigenfrequencies(&invariants(qf)),
        Convention::PaperPrinted => eigenfrequencies(&paper_invariants(qf)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub n1: u32,
    pub n2: u32,
    pub energy: f64,
}

/// `E = ħΩ̃₁(n₁ + ½) + ħΩ̃₂(n₂ + ½)`.
pub fn energy(freqs: &EigenFrequencies, hbar: f64, n1: u32, n2: u32) -> EnergyLevel {
    let e = hbar * freqs.omega_tilde_1 * (f64::from(n1) + 0.5)
        + hbar * freqs.omega_tilde_2 * (f64::from(n2) + 0.5);
    EnergyLevel { n1, n2, energy: e }
}

/// A level from [`enumerate_levels`] with its degeneracy group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotatedLevel {
    pub level: EnergyLevel,
    /// Index of the degenerate group, counting from the ground state.
    pub group: usize,
    /// Number of states sharing this energy.
    pub degeneracy: usize,
}

/// The `count` lowest levels, ascending, ties ordered by `(n1, n2)`.
pub fn enumerate_levels(
    freqs: &EigenFrequencies,
    hbar: f64,
    count: usize,
) -> Result<Vec<AnnotatedLevel>> {
    if !(freqs.omega_tilde_2 > 0.0) {
        return Err(Error::ZeroModeUnsupported(
            "level enumeration needs a positive second frequency (zero mode gives infinite degeneracy)",
        ));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    // Any state with n_i >= count has at least `count` states strictly below it.
    let n = count as u32;
    let mut grid: Vec<EnergyLevel> = (0..n)
        .flat_map(|n1| (0..n).map(move |n2| (n1, n2)))
        .map(|(n1, n2)| energy(freqs, hbar, n1, n2))
        .collect();
    grid.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    let tol = LEVEL_DEGENERACY_TOL * hbar * freqs.omega_tilde_1;
    let mut groups: Vec<Vec<EnergyLevel>> = Vec::new();
    for level in grid {
        match groups.last_mut() {
            Some(g) if level.energy - g[0].energy <= tol => g.push(level),
            _ => groups.push(vec![level]),
        }
    }

    let mut out = Vec::with_capacity(count);
    for (index, mut group) in groups.into_iter().enumerate() {
        group.sort_by_key(|l| (l.n1, l.n2));
        let degeneracy = group.len();
        for level in group {
            if out.len() == count {
                return Ok(out);
            }
            out.push(AnnotatedLevel {
                level,
                group: index,
                degeneracy,
            });
        }
    }
    Ok(out)
}
