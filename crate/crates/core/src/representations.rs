//! The two-parameter `(r, s)` family of phase-space representations.
//!
//! Every noncommutative operator in scope is a linear combination of the
//! canonical quadruple `z = (x, y, p_x, p_y)`, so a representation is just a
//! real 4×4 matrix whose row `i` expresses operator `i` of `(X, Y, Π_x, Π_y)`
//! over `z`. Commutators reduce to the symplectic bilinear form
//! `[a·z, b·z] = iħ aᵀ J b`.

use nalgebra::Matrix4;

use crate::error::{Error, Result};

/// Relative band around `ħ − Bϑ = 0` (and around the `r` pole) treated as
/// exactly singular.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Relative tolerance for `R J Rᵀ` against the target commutator matrix.
pub const COMMUTATOR_TOL: f64 = 1e-12;

/// Row / column indices of the noncommutative operators.
pub const X: usize = 0;
pub const Y: usize = 1;
pub const PI_X: usize = 2;
pub const PI_Y: usize = 3;

/// Physical inputs of the deformed algebra: `[X, Y] = iϑ`, `[Π_x, Π_y] = iħB`,
/// `[X, Π_x] = [Y, Π_y] = iħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcParameters {
    hbar: f64,
    theta: f64,
    b: f64,
    m: f64,
}

impl NcParameters {
    pub fn new(hbar: f64, theta: f64, b: f64, m: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidParameter {
                name: "hbar",
                value: hbar,
                reason: "must be positive and finite",
            });
        }
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
                reason: "must be nonnegative and finite",
            });
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "B",
                value: b,
                reason: "must be finite",
            });
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                reason: "must be positive and finite",
            });
        }
        Ok(Self { hbar, theta, b, m })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega_c(&self) -> f64 {
        self.b / self.m
    }

    /// `ħ − Bϑ`, the quantity whose vanishing collapses the representation.
    pub fn degeneracy_gap(&self) -> f64 {
        self.hbar - self.b * self.theta
    }

    pub fn is_degenerate(&self) -> bool {
        detect_degenerate(self)
    }

    /// Value of `r` at which the `Π_x` coefficients have a pole, if any.
    pub fn gauge_pole(&self) -> Option<f64> {
        let bt = self.b * self.theta;
        (bt != 0.0).then(|| self.hbar / bt)
    }

    /// Whether `r` lies in the singular band around `ħ/(Bϑ)`.
    pub fn is_inadmissible(&self, r: f64) -> bool {
        let btr = self.b * self.theta * r;
        if self.b * self.theta == 0.0 {
            return false;
        }
        (btr - self.hbar).abs() <= DEGENERACY_TOL * self.hbar.max(btr.abs())
    }
}

/// A gauge point `(r, s)` of the representation family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugePair {
    pub r: f64,
    pub s: f64,
}

impl GaugePair {
    pub const fn new(r: f64, s: f64) -> Self {
        Self { r, s }
    }
}

/// `(r, s) = (1, 0)`.
pub const fn landau_gauge() -> GaugePair {
    GaugePair::new(1.0, 0.0)
}

/// `r = ħ / (ħ + √(ħ(ħ − ϑB)))`, `s = 1/2`.
///
/// Undefined once `ħ − ϑB < 0`; inside the degeneracy band the radicand is
/// taken to be zero.
pub fn symmetric_gauge(nc: &NcParameters) -> Result<GaugePair> {
    let hbar = nc.hbar();
    let gap = nc.degeneracy_gap();
    let gap = if nc.is_degenerate() { 0.0 } else { gap };
    if gap < 0.0 {
        return Err(Error::OutOfDomain(format!(
            "symmetric gauge requires theta <= hbar/B (theta is bounded by hbar/(m*omega_c)); \
             got hbar - theta*B = {gap:.6e}"
        )));
    }
    let root = (hbar * gap).sqrt();
    Ok(GaugePair::new(hbar / (hbar + root), 0.5))
}

/// `|ħ − Bϑ| ≤ 1e-12 · max(ħ, |Bϑ|)`.
pub fn detect_degenerate(nc: &NcParameters) -> bool {
    let bt = nc.b() * nc.theta();
    nc.degeneracy_gap().abs() <= DEGENERACY_TOL * nc.hbar().max(bt.abs())
}

/// Linear map from the canonical quadruple to `(X, Y, Π_x, Π_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepMatrix(Matrix4<f64>);

impl RepMatrix {
    /// Wraps an arbitrary coefficient table. Only finiteness is checked, so
    /// this also admits maps that do not realise the deformed algebra (the
    /// naive minimal prescription, corrupted-input tests).
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        if let Some(v) = rows.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "rep matrix entry",
                value: *v,
                reason: "must be finite",
            });
        }
        Ok(Self(Matrix4::from_fn(|i, j| rows[i][j])))
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Coefficients of operator `op` over `(x, y, p_x, p_y)`.
    pub fn row(&self, op: usize) -> [f64; 4] {
        let r = self.0.row(op);
        [r[0], r[1], r[2], r[3]]
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        [self.row(0), self.row(1), self.row(2), self.row(3)]
    }
}

/// Builds the `(r, s)` representation of the deformed algebra.
pub fn make_representation(nc: &NcParameters, g: GaugePair) -> Result<RepMatrix> {
    if nc.is_degenerate() {
        return Err(Error::DegenerateRepresentation {
            gap: nc.degeneracy_gap(),
        });
    }
    if nc.is_inadmissible(g.r) {
        return Err(Error::InadmissibleGauge {
            r: g.r,
            pole: nc.gauge_pole().unwrap_or(f64::INFINITY),
        });
    }
    let (hbar, theta, b) = (nc.hbar(), nc.theta(), nc.b());
    let GaugePair { r, s } = g;
    let bt = b * theta;

    let pix_y = b * hbar * (1.0 - r) / (hbar - bt * r);
    let pix_px = (bt * (r + s - r * s) - hbar) / (bt * r - hbar);
    let piy_py = 1.0 + r * (s - 1.0) * bt / hbar;

    RepMatrix::from_rows([
        [1.0, 0.0, 0.0, -s * theta / hbar],
        [0.0, 1.0, (1.0 - s) * theta / hbar, 0.0],
        [0.0, pix_y, pix_px, 0.0],
        [-r * b, 0.0, 0.0, piy_py],
    ])
}

/// Canonical symplectic matrix over `(x, y, p_x, p_y)`.
pub fn canonical_symplectic() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = 1.0;
    j[(1, 3)] = 1.0;
    j[(2, 0)] = -1.0;
    j[(3, 1)] = -1.0;
    j
}

/// `C` with `[O_a, O_b] = iħ C_ab`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorMatrix(Matrix4<f64>);

impl CommutatorMatrix {
    /// The table every valid representation must reproduce.
    pub fn target(nc: &NcParameters) -> Self {
        let mut c = Matrix4::zeros();
        let mut set = |a: usize, b: usize, v: f64| {
            c[(a, b)] = v;
            c[(b, a)] = -v;
        };
        set(X, Y, nc.theta() / nc.hbar());
        set(PI_X, PI_Y, nc.b());
        set(X, PI_X, 1.0);
        set(Y, PI_Y, 1.0);
        Self(c)
    }

    pub fn entries(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.0[(a, b)]
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..4).all(|a| (0..4).all(|b| self.0[(a, b)] == -self.0[(b, a)]))
    }

    /// Largest entrywise deviation from `other`, relative to
    /// `max(1, max |other|)`.
    pub fn relative_deviation(&self, other: &CommutatorMatrix) -> f64 {
        let scale = other.0.amax().max(1.0);
        (self.0 - other.0).amax() / scale
    }

    pub fn matches_target(&self, nc: &NcParameters) -> bool {
        self.relative_deviation(&Self::target(nc)) <= COMMUTATOR_TOL
    }
}

/// `R J Rᵀ`, symmetrised to exact antisymmetry.
pub fn commutator_table(rep: &RepMatrix) -> CommutatorMatrix {
    let r = rep.matrix();
    let c = r * canonical_symplectic() * r.transpose();
    CommutatorMatrix((c - c.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nc(hbar: f64, theta: f64, b: f64) -> NcParameters {
        NcParameters::new(hbar, theta, b, 1.0).unwrap()
    }

    #[test]
    fn case_one_at_r1_s1() {
        let rep = make_representation(&nc(1.0, 0.3, 1.0), GaugePair::new(1.0, 1.0)).unwrap();
        assert_eq!(rep.row(X), [1.0, 0.0, 0.0, -0.3]);
        assert_eq!(rep.row(Y), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(rep.row(PI_X), [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rep.row(PI_Y), [-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn commutative_limit_is_identity() {
        let p = nc(1.0, 0.0, 0.0);
        for g in [
            landau_gauge(),
            GaugePair::new(-1.7, 0.4),
            GaugePair::new(3.0, 2.5),
        ] {
            let rep = make_representation(&p, g).unwrap();
            assert_eq!(rep, RepMatrix::identity(), "{g:?}");
        }
    }

    #[test]
    fn landau_gauge_row() {
        assert_eq!(landau_gauge(), GaugePair::new(1.0, 0.0));
        let rep = make_representation(&nc(1.0, 0.5, 1.0), landau_gauge()).unwrap();
        assert_eq!(rep.row(PI_Y), [-1.0, 0.0, 0.0, 0.5]);
        assert_eq!(rep.row(X), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rep.row(Y), [0.0, 1.0, 0.5, 0.0]);
        assert_eq!(rep.row(PI_X), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn symmetric_gauge_values() {
        let g = symmetric_gauge(&nc(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(g, GaugePair::new(0.5, 0.5));
        let g = symmetric_gauge(&nc(1.0, 0.75, 1.0)).unwrap();
        assert_relative_eq!(g.r, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(g.s, 0.5);
        assert!(matches!(
            symmetric_gauge(&nc(1.0, 1.5, 1.0)),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn symmetric_rows_match_closed_transformation() {
        // X = x - ϑ/2ħ p_y, Π_x = ħB/(ħ+√) y + (ħ+√)/2ħ p_x
        let (hbar, theta, b) = (1.3, 0.4, 0.9);
        let p = nc(hbar, theta, b);
        let rep = make_representation(&p, symmetric_gauge(&p).unwrap()).unwrap();
        let root = (hbar * (hbar - theta * b)).sqrt();
        assert_relative_eq!(rep.row(X)[3], -theta / (2.0 * hbar), epsilon = 1e-15);
        assert_relative_eq!(rep.row(Y)[2], theta / (2.0 * hbar), epsilon = 1e-15);
        assert_relative_eq!(
            rep.row(PI_X)[1],
            hbar * b / (hbar + root),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            rep.row(PI_X)[2],
            (hbar + root) / (2.0 * hbar),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            rep.row(PI_Y)[0],
            -hbar * b / (hbar + root),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            rep.row(PI_Y)[3],
            (hbar + root) / (2.0 * hbar),
            max_relative = 1e-13
        );
    }

    #[test]
    fn identity_commutators_are_j() {
        let c = commutator_table(&RepMatrix::identity());
        assert_eq!(*c.entries(), canonical_symplectic());
    }

    #[test]
    fn landau_commutators_by_hand() {
        // X = x, Y = y + 0.3 p_x, Π_x = p_x, Π_y = -x + 0.7 p_y
        // [X,Y] = 0.3[x,p_x], [Π_x,Π_y] = -[p_x,x], [X,Π_x] = [x,p_x], [Y,Π_y] = 0.7[y,p_y] - 0.3[p_x,x]
        let p = nc(1.0, 0.3, 1.0);
        let c = commutator_table(&make_representation(&p, landau_gauge()).unwrap());
        assert_relative_eq!(c.get(X, Y), 0.3, epsilon = 1e-15);
        assert_relative_eq!(c.get(PI_X, PI_Y), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.get(X, PI_X), 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.get(Y, PI_Y), 1.0, epsilon = 1e-15);
        assert_eq!(c.get(X, PI_Y), 0.0);
        assert_eq!(c.get(Y, PI_X), 0.0);
        assert!(c.matches_target(&p));
    }

    #[test]
    fn degeneracy_detection() {
        assert!(detect_degenerate(&nc(1.0, 1.0, 1.0)));
        assert!(!detect_degenerate(&nc(1.0, 0.0, 1.0)));
        assert!(detect_degenerate(&nc(1.0, 0.5, 2.0)));
        assert!(!detect_degenerate(&nc(1.0, 0.5 + 1e-9, 2.0)));
    }

    #[test]
    fn rejects_degenerate_and_pole() {
        assert!(matches!(
            make_representation(&nc(1.0, 0.5, 2.0), landau_gauge()),
            Err(Error::DegenerateRepresentation { .. })
        ));
        // pole at r = ħ/(Bϑ) = 2.5
        let p = nc(1.0, 0.4, 1.0);
        assert!(matches!(
            make_representation(&p, GaugePair::new(2.5, 0.3)),
            Err(Error::InadmissibleGauge { .. })
        ));
        assert!(make_representation(&p, GaugePair::new(2.5 + 1e-6, 0.3)).is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(NcParameters::new(0.0, 0.1, 1.0, 1.0).is_err());
        assert!(NcParameters::new(1.0, -0.1, 1.0, 1.0).is_err());
        assert!(NcParameters::new(1.0, 0.1, f64::NAN, 1.0).is_err());
        assert!(NcParameters::new(1.0, 0.1, 1.0, 0.0).is_err());
        assert!(NcParameters::new(1.0, 0.1, -2.0, 1.0).is_ok());
        assert!(RepMatrix::from_rows([[f64::INFINITY, 0.0, 0.0, 0.0]; 4]).is_err());
    }
}
