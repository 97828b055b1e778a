//! Reduction of the noncommutative Hamiltonian
//! `H = (Π_x² + Π_y²)/2m + m(ω₁²X² + ω₂²Y²)/2` to the six-parameter form
//!
//! ```text
//! H = p_x²/2M₁ + p_y²/2M₂ + M₁Ω₁²x²/2 + M₂Ω₂²y²/2 − l₁ x p_y + l₂ y p_x
//! ```
//!
//! over canonical operators. Three routes produce the form: matrix assembly
//! from any [`RepMatrix`], the closed-form tables for the symmetric and Landau
//! gauges, and the naive minimal prescription (NMP) tables.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::representations::{
    make_representation, symmetric_gauge, GaugePair, NcParameters, RepMatrix, PI_X, PI_Y, X, Y,
};

/// Relative size (against `max|G|`) below which a forbidden cross term of
/// the assembled coefficient matrix counts as absent.
pub const CROSS_TERM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSystem {
    m: f64,
    omega1: f64,
    omega2: f64,
    omega_c: f64,
    hbar: f64,
    theta: f64,
}

impl PhysicalSystem {
    pub fn new(
        hbar: f64,
        m: f64,
        omega1: f64,
        omega2: f64,
        omega_c: f64,
        theta: f64,
    ) -> Result<Self> {
        for (name, value) in [("omega1", omega1), ("omega2", omega2)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be nonnegative and finite",
                });
            }
        }
        if !omega_c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega_c",
                value: omega_c,
                reason: "must be finite",
            });
        }
        // hbar, m and theta are validated by the algebra parameters.
        NcParameters::new(hbar, theta, m * omega_c, m)?;
        Ok(Self {
            m,
            omega1,
            omega2,
            omega_c,
            hbar,
            theta,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn omega1(&self) -> f64 {
        self.omega1
    }
    pub fn omega2(&self) -> f64 {
        self.omega2
    }
    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `B = m ω_c`.
    pub fn b(&self) -> f64 {
        self.m * self.omega_c
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(
            self.hbar,
            self.m,
            self.omega1,
            self.omega2,
            self.omega_c,
            theta,
        )
    }

    pub fn nc_parameters(&self) -> NcParameters {
        NcParameters::new(self.hbar, self.theta, self.b(), self.m)
            .expect("validated at construction")
    }
}

/// The six parameters `(M₁, M₂, Ω₁², Ω₂², l₁, l₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    pub m1: f64,
    pub m2: f64,
    pub omega1_sq: f64,
    pub omega2_sq: f64,
    pub l1: f64,
    pub l2: f64,
}

impl QuadraticForm {
    pub fn new(m1: f64, m2: f64, omega1_sq: f64, omega2_sq: f64, l1: f64, l2: f64) -> Result<Self> {
        for (index, m) in [(1, m1), (2, m2)] {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::SingularMass {
                    index,
                    value: 0.5 / m,
                });
            }
        }
        for (index, w) in [(1, omega1_sq), (2, omega2_sq)] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeStiffness { index, value: w });
            }
        }
        for (name, value) in [("l1", l1), ("l2", l2)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(Self {
            m1,
            m2,
            omega1_sq,
            omega2_sq,
            l1,
            l2,
        })
    }

    /// `1/M₁`
    pub fn a(&self) -> f64 {
        1.0 / self.m1
    }
    /// `1/M₂`
    pub fn b(&self) -> f64 {
        1.0 / self.m2
    }
    /// `M₁Ω₁²`
    pub fn k1(&self) -> f64 {
        self.m1 * self.omega1_sq
    }
    /// `M₂Ω₂²`
    pub fn k2(&self) -> f64 {
        self.m2 * self.omega2_sq
    }
    pub fn omega1(&self) -> f64 {
        self.omega1_sq.sqrt()
    }
    pub fn omega2(&self) -> f64 {
        self.omega2_sq.sqrt()
    }

    /// Symmetric coefficient matrix `G` with `H = zᵀ G z`.
    pub fn coefficient_matrix(&self) -> Matrix4<f64> {
        let mut g = Matrix4::zeros();
        g[(0, 0)] = self.k1() / 2.0;
        g[(1, 1)] = self.k2() / 2.0;
        g[(2, 2)] = self.a() / 2.0;
        g[(3, 3)] = self.b() / 2.0;
        g[(0, 3)] = -self.l1 / 2.0;
        g[(3, 0)] = -self.l1 / 2.0;
        g[(1, 2)] = self.l2 / 2.0;
        g[(2, 1)] = self.l2 / 2.0;
        g
    }

    /// Largest entrywise relative difference to `other`, each parameter
    /// compared against `max(1, |other|)`.
    pub fn max_relative_difference(&self, other: &QuadraticForm) -> f64 {
        let pairs = [
            (self.m1, other.m1),
            (self.m2, other.m2),
            (self.omega1_sq, other.omega1_sq),
            (self.omega2_sq, other.omega2_sq),
            (self.l1, other.l1),
            (self.l2, other.l2),
        ];
        pairs
            .iter()
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// How the magnetic field enters the kinetic momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prescription {
    /// A member of the `(r, s)` representation family.
    GroupTheoretic(GaugePair),
    /// `Π = p − A(X, Y)` with `A = (−B Y/2, B X/2)`.
    NmpSymmetric,
    /// `Π = p − A(X, Y)` with `A = (−B Y, 0)`.
    NmpLandau,
}

impl Prescription {
    pub fn is_nmp(&self) -> bool {
        !matches!(self, Prescription::GroupTheoretic(_))
    }
}

/// Expands `H` over the representation `rep` and reads off the six
/// parameters.
pub fn assemble(sys: &PhysicalSystem, rep: &RepMatrix) -> Result<QuadraticForm> {
    let r = rep.matrix();
    let row = |i: usize| r.row(i).transpose();
    let outer = |i: usize| row(i) * row(i).transpose();
    let m = sys.m();
    let g = (outer(PI_X) + outer(PI_Y)) / (2.0 * m)
        + (outer(X) * sys.omega1().powi(2) + outer(Y) * sys.omega2().powi(2)) * (m / 2.0);
    let g = (g + g.transpose()) * 0.5;

    let tolerance = CROSS_TERM_TOL * g.amax();
    // x·y, x·p_x, y·p_y, p_x·p_y
    for (row, col) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        let value = g[(row, col)];
        if value.abs() > tolerance {
            return Err(Error::NonCanonicalForm {
                row,
                col,
                value,
                tolerance,
            });
        }
    }
    for index in [2, 3] {
        if !(g[(index, index)] > 0.0) {
            return Err(Error::SingularMass {
                index: index - 1,
                value: g[(index, index)],
            });
        }
    }

    let m1 = 1.0 / (2.0 * g[(2, 2)]);
    let m2 = 1.0 / (2.0 * g[(3, 3)]);
    QuadraticForm::new(
        m1,
        m2,
        2.0 * g[(0, 0)] / m1,
        2.0 * g[(1, 1)] / m2,
        -2.0 * g[(0, 3)],
        2.0 * g[(1, 2)],
    )
}

fn symmetric_domain(sys: &PhysicalSystem) -> Result<f64> {
    let nc = sys.nc_parameters();
    if nc.is_degenerate() {
        return Err(Error::DegenerateRepresentation {
            gap: nc.degeneracy_gap(),
        });
    }
    let hbar = sys.hbar();
    let radicand = hbar * (hbar - sys.m() * sys.omega_c() * sys.theta());
    if radicand < 0.0 {
        return Err(Error::OutOfDomain(format!(
            "symmetric gauge: theta = {} exceeds hbar/(m*omega_c) = {} (theta is bounded by hbar/(m*omega_c))",
            sys.theta(),
            hbar / (sys.m() * sys.omega_c())
        )));
    }
    Ok(radicand.sqrt())
}

/// Closed-form symmetric-gauge parameters.
pub fn symmetric_params(sys: &PhysicalSystem) -> Result<QuadraticForm> {
    let root = symmetric_domain(sys)?;
    let (hbar, m, w1, w2, wc, th) = unpack(sys);

    let common = 0.5 - m * wc * th / (4.0 * hbar) + root / (2.0 * hbar);
    let m1 = m / (common + (m * th * w2).powi(2) / (4.0 * hbar * hbar));
    let m2 = m / (common + (m * th * w1).powi(2) / (4.0 * hbar * hbar));
    let field = (wc * hbar / (hbar + root)).powi(2);

    QuadraticForm::new(
        m1,
        m2,
        m / m1 * (w1 * w1 + field),
        m / m2 * (w2 * w2 + field),
        wc / 2.0 + m * w1 * w1 * th / (2.0 * hbar),
        wc / 2.0 + m * w2 * w2 * th / (2.0 * hbar),
    )
}

/// Closed-form Landau-gauge parameters; valid on both sides of
/// `ϑ = ħ/(mω_c)` but not at it.
pub fn landau_params(sys: &PhysicalSystem) -> Result<QuadraticForm> {
    let nc = sys.nc_parameters();
    if nc.is_degenerate() {
        return Err(Error::DegenerateRepresentation {
            gap: nc.degeneracy_gap(),
        });
    }
    let (hbar, m, w1, w2, wc, th) = unpack(sys);

    let m1 = m / (1.0 + (m * th * w2 / hbar).powi(2));
    let m2 = m / ((hbar - m * wc * th) / hbar).powi(2);
    QuadraticForm::new(
        m1,
        m2,
        m / m1 * (w1 * w1 + wc * wc),
        m / m2 * w2 * w2,
        wc - m * wc * wc * th / hbar,
        m * w2 * w2 * th / hbar,
    )
}

/// Closed-form NMP parameters (Bopp shift folded in).
pub fn nmp_params(sys: &PhysicalSystem, which: Prescription) -> Result<QuadraticForm> {
    let (hbar, m, w1, w2, wc, th) = unpack(sys);
    let q = m * th / (2.0 * hbar); // mϑ/2ħ
    match which {
        Prescription::NmpSymmetric => {
            let quarter = wc * wc / 4.0;
            let base = 1.0 + q * wc;
            let m1 = m / (base + q * q * (w2 * w2 + quarter));
            let m2 = m / (base + q * q * (w1 * w1 + quarter));
            let shift = wc * (1.0 + m * wc * th / (4.0 * hbar));
            QuadraticForm::new(
                m1,
                m2,
                m / m1 * (w1 * w1 + quarter),
                m / m2 * (w2 * w2 + quarter),
                0.5 * (shift + 2.0 * q * w1 * w1),
                0.5 * (shift + 2.0 * q * w2 * w2),
            )
        }
        Prescription::NmpLandau => {
            let m1 = m / (1.0 + 2.0 * q * wc + q * q * (w2 * w2 + wc * wc));
            let m2 = m / (1.0 + q * q * w1 * w1);
            QuadraticForm::new(
                m1,
                m2,
                m / m1 * w1 * w1,
                m / m2 * (w2 * w2 + wc * wc),
                q * w1 * w1,
                wc + q * wc * wc + q * w2 * w2,
            )
        }
        Prescription::GroupTheoretic(_) => Err(Error::OutOfDomain(
            "nmp_params needs an NMP prescription".into(),
        )),
    }
}

/// Matrix-level NMP map: Bopp-shifted coordinates `X = x − ϑp_y/2ħ`,
/// `Y = y + ϑp_x/2ħ` and `Π = p − A(X, Y)`. The result does not satisfy the
/// `[Π_x, Π_y] = iħB` target in general.
pub fn nmp_representation(sys: &PhysicalSystem, which: Prescription) -> Result<RepMatrix> {
    let half = sys.theta() / (2.0 * sys.hbar());
    let b = sys.b();
    let x = [1.0, 0.0, 0.0, -half];
    let y = [0.0, 1.0, half, 0.0];
    let px = [0.0, 0.0, 1.0, 0.0];
    let py = [0.0, 0.0, 0.0, 1.0];
    let combine =
        |u: [f64; 4], cu: f64, v: [f64; 4], cv: f64| [0, 1, 2, 3].map(|i| cu * u[i] + cv * v[i]);
    let (pi_x, pi_y) = match which {
        Prescription::NmpSymmetric => (combine(px, 1.0, y, b / 2.0), combine(py, 1.0, x, -b / 2.0)),
        Prescription::NmpLandau => (combine(px, 1.0, y, b), py),
        Prescription::GroupTheoretic(_) => {
            return Err(Error::OutOfDomain(
                "nmp_representation needs an NMP prescription".into(),
            ))
        }
    };
    RepMatrix::from_rows([x, y, pi_x, pi_y])
}

/// The quadratic form of `sys` under `prescription`; group-theoretic gauges go
/// through matrix assembly.
pub fn quadratic_form(sys: &PhysicalSystem, prescription: Prescription) -> Result<QuadraticForm> {
    match prescription {
        Prescription::GroupTheoretic(g) => {
            assemble(sys, &make_representation(&sys.nc_parameters(), g)?)
        }
        nmp => nmp_params(sys, nmp),
    }
}

/// Symmetric-gauge pair for `sys`, erroring outside `ϑ ≤ ħ/(mω_c)`.
pub fn symmetric_gauge_for(sys: &PhysicalSystem) -> Result<GaugePair> {
    symmetric_gauge(&sys.nc_parameters())
}

fn unpack(sys: &PhysicalSystem) -> (f64, f64, f64, f64, f64, f64) {
    (
        sys.hbar(),
        sys.m(),
        sys.omega1(),
        sys.omega2(),
        sys.omega_c(),
        sys.theta(),
    )
}
