//! Independent checks on the closed-form spectra.
//!
//! Two oracles with different failure modes:
//!
//! * the classical dynamical matrix `ż = A z`, whose characteristic
//!   polynomial `λ⁴ + Sλ² + P` gives the mode invariants without any
//!   truncation and copes with zero modes;
//! * a truncated two-mode Fock-space diagonalisation of the quantum
//!   Hamiltonian, which checks the full `ħ`-level spectrum including the
//!   zero-point energy.
//!
//! The Fock matrix elements come straight from the one-mode matrix elements
//! of `x`, `y`, `p_x`, `p_y`; the ladder coefficients `c`, `d` are never used.

use nalgebra::{Complex, DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticForm;
use crate::spectra::{enumerate_levels, EigenFrequencies, EnergyLevel, ModeInvariants};

pub type C64 = Complex<f64>;

/// Relative tolerance on the odd coefficients of the characteristic polynomial.
pub const BIQUADRATIC_TOL: f64 = 1e-12;

/// Linearised Hamiltonian flow over `z = (x, y, p_x, p_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalMatrix(pub Matrix4<f64>);

impl DynamicalMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Coefficients `[c₁, c₂, c₃, c₄]` of `λ⁴ + c₁λ³ + c₂λ² + c₃λ + c₄`
    /// (Faddeev–LeVerrier via power sums).
    pub fn characteristic_coefficients(&self) -> [f64; 4] {
        let a = &self.0;
        let a2 = a * a;
        let a3 = a2 * a;
        let (p1, p2, p3) = (a.trace(), a2.trace(), a3.trace());
        let c1 = -p1;
        let c2 = -(c1 * p1 + p2) / 2.0;
        let c3 = -(c2 * p1 + c1 * p2 + p3) / 3.0;
        [c1, c2, c3, a.determinant()]
    }
}

/// Hamilton's equations of the six-parameter form.
pub fn dynamical_matrix(qf: &QuadraticForm) -> DynamicalMatrix {
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0,     qf.l2,   qf.a(), 0.0,
        -qf.l1,  0.0,     0.0,    qf.b(),
        -qf.k1(), 0.0,    0.0,    qf.l1,
        0.0,     -qf.k2(), -qf.l2, 0.0,
    );
    DynamicalMatrix(a)
}

/// `S = −tr(A²)/2`, `P = det A`, after checking the odd coefficients vanish.
pub fn oracle_invariants(a: &DynamicalMatrix) -> Result<ModeInvariants> {
    let [c1, _, c3, _] = a.characteristic_coefficients();
    let scale = a.0.amax();
    if c1.abs() > BIQUADRATIC_TOL * scale.max(f64::MIN_POSITIVE)
        || c3.abs() > BIQUADRATIC_TOL * scale.powi(3).max(f64::MIN_POSITIVE)
    {
        return Err(Error::NonBiquadratic {
            cubic: c1,
            linear: c3,
        });
    }
    let a2 = a.0 * a.0;
    Ok(ModeInvariants::new(-a2.trace() / 2.0, a.0.determinant()))
}

/// Truncated Hamiltonian over `|n₁, n₂⟩`, `0 ≤ nᵢ < n_max`, indexed by
/// `n₁·n_max + n₂`.
///
/// Stored as its real diagonal plus the upper-triangle couplings; the lower
/// triangle is the conjugate mirror, so Hermiticity is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    n_max: usize,
    diagonal: Vec<f64>,
    /// `(row, col, value)` with `row < col`.
    couplings: Vec<(usize, usize, C64)>,
}

/// One-mode matrix elements `⟨n'|q|n⟩` and `⟨n'|p|n⟩` for a mode of mass
/// `mass` and frequency `omega`.
struct Mode {
    q_scale: f64,
    p_scale: f64,
}

impl Mode {
    fn new(hbar: f64, mass: f64, omega: f64) -> Self {
        Self {
            q_scale: (hbar / (2.0 * mass * omega)).sqrt(),
            p_scale: (hbar * mass * omega / 2.0).sqrt(),
        }
    }

    /// `q = s (a + a†)`.
    fn q(&self, to: usize, from: usize) -> C64 {
        let v = if to == from + 1 {
            ((from + 1) as f64).sqrt()
        } else if to + 1 == from {
            (from as f64).sqrt()
        } else {
            0.0
        };
        C64::new(self.q_scale * v, 0.0)
    }

    /// `p = −i s (a − a†)`.
    fn p(&self, to: usize, from: usize) -> C64 {
        if to == from + 1 {
            C64::new(0.0, self.p_scale * ((from + 1) as f64).sqrt())
        } else if to + 1 == from {
            C64::new(0.0, -self.p_scale * (from as f64).sqrt())
        } else {
            C64::new(0.0, 0.0)
        }
    }
}

/// Real symmetric band matrix in LAPACK lower band storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBand {
    n: usize,
    kd: usize,
    /// Column-major `(kd + 1) × n`; entry `(i, j)`, `j ≤ i ≤ j + kd`, sits at
    /// `(i − j) + j·(kd + 1)`.
    ab: Vec<f64>,
}

impl SymmetricBand {
    /// Builds from the diagonal and off-diagonal `(i, j, value)` triples
    /// (either triangle).
    pub fn new(diagonal: &[f64], off: &[(usize, usize, f64)]) -> Self {
        let n = diagonal.len();
        let kd = off
            .iter()
            .map(|&(i, j, _)| i.abs_diff(j))
            .max()
            .unwrap_or(0);
        let ld = kd + 1;
        let mut ab = vec![0.0; ld * n.max(1)];
        for (j, &d) in diagonal.iter().enumerate() {
            ab[j * ld] = d;
        }
        for &(i, j, v) in off {
            let (lo, hi) = (i.min(j), i.max(j));
            ab[(hi - lo) + lo * ld] = v;
        }
        Self { n, kd, ab }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Half bandwidth.
    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    /// The `count` smallest eigenvalues (all if `count ≥ n`), ascending.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let count = count.min(n);
        if count == 0 {
            return Ok(Vec::new());
        }
        let mut ab = self.ab.clone();
        let range = if count == n { b'A' } else { b'I' };
        let (mut found, mut info) = (0i32, 0i32);
        let mut w = vec![0.0; n];
        let mut q = [0.0];
        let mut z = [0.0];
        let mut work = vec![0.0; 7 * n];
        let mut iwork = vec![0i32; 5 * n];
        let mut ifail = vec![0i32; n];
        // SAFETY: every buffer has the length dsbevx requires for these
        // sizes, and no eigenvectors are requested.
        unsafe {
            lapack::dsbevx(
                b'N',
                range,
                b'L',
                n as i32,
                self.kd as i32,
                &mut ab,
                (self.kd + 1) as i32,
                &mut q,
                1,
                0.0,
                0.0,
                1,
                count as i32,
                2.0 * f64::MIN_POSITIVE,
                &mut found,
                &mut w,
                &mut z,
                1,
                &mut work,
                &mut iwork,
                &mut ifail,
                &mut info,
            );
        }
        if info != 0 || found as usize != count {
            return Err(Error::ConvergenceFailure { info });
        }
        w.truncate(count);
        Ok(w)
    }
}

impl FockMatrix {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dimension(&self) -> usize {
        self.n_max * self.n_max
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * self.n_max + n2
    }

    /// `(n₁, n₂)` of a basis index.
    pub fn quanta(&self, index: usize) -> (usize, usize) {
        (index / self.n_max, index % self.n_max)
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Upper-triangle couplings `(row, col, value)`, `row < col`.
    pub fn couplings(&self) -> &[(usize, usize, C64)] {
        &self.couplings
    }

    /// Dense Hermitian matrix.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for (i, &d) in self.diagonal.iter().enumerate() {
            h[(i, i)] = C64::new(d, 0.0);
        }
        for &(row, col, v) in &self.couplings {
            h[(row, col)] = v;
            h[(col, row)] = v.conj();
        }
        h
    }

    fn parity(&self, index: usize) -> usize {
        let (n1, n2) = self.quanta(index);
        (n1 + n2) % 2
    }

    /// Whether every coupling connects states of equal `n₁ + n₂` parity.
    pub fn conserves_parity(&self) -> bool {
        self.couplings
            .iter()
            .all(|&(row, col, _)| self.parity(row) == self.parity(col))
    }

    fn indices_with_parity(&self, parity: usize) -> Vec<usize> {
        (0..self.dimension())
            .filter(|&i| self.parity(i) == parity)
            .collect()
    }

    /// Dense even and odd `n₁ + n₂` blocks.
    pub fn parity_blocks(&self) -> [DMatrix<C64>; 2] {
        let h = self.to_dense();
        [0, 1].map(|parity| {
            let idx = self.indices_with_parity(parity);
            DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])])
        })
    }

    /// Even and odd blocks of `U† H U`, `U = diag(i^{n₂})`, as real band
    /// matrices. Every coupling moves `n₂` by one with a purely imaginary
    /// amplitude, so the rotated matrix is real; `None` if that fails.
    ///
    /// Within a block the states keep their `n₁`-major order, and couplings
    /// only link `n₁` to `n₁ ± 1`, so the half bandwidth is about `n_max/2`.
    pub fn real_parity_bands(&self) -> Option<[SymmetricBand; 2]> {
        let phase = |index: usize| match self.quanta(index).1 % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut local = vec![0usize; self.dimension()];
        let mut diagonals = [Vec::new(), Vec::new()];
        for i in 0..self.dimension() {
            let block = &mut diagonals[self.parity(i)];
            local[i] = block.len();
            block.push(self.diagonal[i]);
        }
        let mut off: [Vec<(usize, usize, f64)>; 2] = [Vec::new(), Vec::new()];
        for &(row, col, v) in &self.couplings {
            let rotated = phase(row).conj() * v * phase(col);
            if rotated.im != 0.0 || self.parity(row) != self.parity(col) {
                return None;
            }
            off[self.parity(row)].push((local[row], local[col], rotated.re));
        }
        Some([0, 1].map(|p| SymmetricBand::new(&diagonals[p], &off[p])))
    }

    /// The `count` smallest eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        let mut all = Vec::with_capacity(2 * count);
        match self.real_parity_bands() {
            Some(bands) => {
                for band in &bands {
                    all.extend(band.lowest_eigenvalues(count)?);
                }
            }
            None => {
                for block in self.parity_blocks() {
                    all.extend(hermitian_eigenvalues(&block)?);
                }
            }
        }
        all.sort_by(f64::total_cmp);
        all.truncate(count);
        Ok(all)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.lowest_eigenvalues(self.dimension())
    }
}

pub fn build_fock_matrix(qf: &QuadraticForm, hbar: f64, n_max: usize) -> Result<FockMatrix> {
    if !(qf.m1 * qf.omega1() > 0.0 && qf.m2 * qf.omega2() > 0.0) {
        return Err(Error::ZeroModeUnsupported(
            "Fock oracle needs M1*Omega1 > 0 and M2*Omega2 > 0",
        ));
    }
    if n_max < 2 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            reason: "must be at least 2",
        });
    }
    let (w1, w2) = (qf.omega1(), qf.omega2());
    let mode1 = Mode::new(hbar, qf.m1, w1);
    let mode2 = Mode::new(hbar, qf.m2, w2);

    let dim = n_max * n_max;
    let mut diagonal = Vec::with_capacity(dim);
    let mut couplings = Vec::with_capacity(2 * dim);
    for n1 in 0..n_max {
        for n2 in 0..n_max {
            let col = n1 * n_max + n2;
            diagonal.push(hbar * w1 * (n1 as f64 + 0.5) + hbar * w2 * (n2 as f64 + 0.5));
            // −l₁ x p_y + l₂ y p_x moves each quantum number by ±1.
            for m1 in [n1.wrapping_sub(1), n1 + 1] {
                for m2 in [n2.wrapping_sub(1), n2 + 1] {
                    if m1 >= n_max || m2 >= n_max {
                        continue;
                    }
                    let row = m1 * n_max + m2;
                    if row > col {
                        continue;
                    }
                    let v = mode1.q(m1, n1) * mode2.p(m2, n2) * (-qf.l1)
                        + mode1.p(m1, n1) * mode2.q(m2, n2) * qf.l2;
                    couplings.push((row, col, v));
                }
            }
        }
    }
    Ok(FockMatrix {
        n_max,
        diagonal,
        couplings,
    })
}

/// Eigenvalues of a dense Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::InvalidParameter {
            name: "matrix",
            value: h.nrows() as f64,
            reason: "must be square",
        });
    }
    let norm = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let skew = (h - h.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if skew > 1e-12 * norm {
        return Err(Error::InvalidParameter {
            name: "matrix",
            value: skew,
            reason: "must be Hermitian",
        });
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let mut w = vec![0.0; n];
    let lwork = 2 * n;
    let mut work = vec![C64::new(0.0, 0.0); lwork];
    let mut rwork = vec![0.0; 3 * n];
    let mut info = 0;
    // SAFETY: `a` is the column-major n×n matrix and the work arrays meet
    // zheev's minimum sizes.
    unsafe {
        lapack::zheev(
            b'N',
            b'U',
            n as i32,
            &mut a,
            n as i32,
            &mut w,
            &mut work,
            lwork as i32,
            &mut rwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure { info });
    }
    Ok(w)
}

/// Truncation schedule and tolerances for [`compare`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Relative tolerance on level agreement; convergence needs successive
    /// truncations to agree to `tol / 10`.
    pub tol: f64,
    /// Relative tolerance on `(S, P)` agreement.
    pub invariant_tol: f64,
    /// Number of lowest levels compared.
    pub levels: usize,
    /// Increasing `N_max` values; the last one is the cap.
    pub schedule: Vec<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            invariant_tol: 1e-12,
            levels: 6,
            schedule: vec![8, 16, 32, 64],
        }
    }
}

impl OracleOptions {
    /// Default options with the schedule capped at `n_max`.
    pub fn with_cap(n_max: usize) -> Self {
        let mut schedule: Vec<usize> = Self::default()
            .schedule
            .into_iter()
            .filter(|&n| n < n_max)
            .collect();
        schedule.push(n_max);
        Self {
            schedule,
            ..Self::default()
        }
    }
}

/// Level-by-level comparison against the truncated Fock spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FockComparison {
    /// Truncation at which the comparison was made.
    pub n_max: usize,
    pub converged: bool,
    /// Largest relative change of the compared levels over the last doubling.
    pub last_change: f64,
    pub analytic_levels: Vec<EnergyLevel>,
    pub oracle_levels: Vec<f64>,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    /// `(N_max, ground-state energy)` for every truncation evaluated.
    pub ground_history: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub analytic: EigenFrequencies,
    pub analytic_invariants: ModeInvariants,
    pub oracle_invariants: ModeInvariants,
    pub invariant_abs_deviation: f64,
    pub invariant_rel_deviation: f64,
    pub fock: Option<FockComparison>,
    /// Why the Fock comparison was not run, if it was not.
    pub fock_skipped: Option<String>,
    pub tol: f64,
    pub invariant_tol: f64,
}

impl OracleReport {
    /// Converged if the Fock comparison converged or was not applicable.
    pub fn converged(&self) -> bool {
        self.fock.as_ref().is_none_or(|f| f.converged)
    }

    pub fn invariants_agree(&self) -> bool {
        self.invariant_rel_deviation <= self.invariant_tol
    }

    pub fn levels_agree(&self) -> bool {
        self.fock
            .as_ref()
            .is_none_or(|f| f.max_rel_deviation <= self.tol)
    }

    /// `Ok` iff converged and both oracles agree within tolerance.
    pub fn check(&self) -> Result<()> {
        if !self.invariants_agree() {
            return Err(Error::OracleDisagreement(format!(
                "(S, P) analytic ({:.12}, {:.12}) vs dynamical matrix ({:.12}, {:.12}), relative deviation {:.3e}",
                self.analytic_invariants.s,
                self.analytic_invariants.p,
                self.oracle_invariants.s,
                self.oracle_invariants.p,
                self.invariant_rel_deviation
            )));
        }
        if let Some(f) = &self.fock {
            if !f.converged {
                return Err(Error::NotConverged {
                    n_max: f.n_max,
                    change: f.last_change,
                });
            }
            if f.max_rel_deviation > self.tol {
                return Err(Error::OracleDisagreement(format!(
                    "lowest {} levels deviate from the Fock spectrum by {:.3e} (relative) at N_max = {}",
                    f.analytic_levels.len(),
                    f.max_rel_deviation,
                    f.n_max
                )));
            }
        }
        Ok(())
    }
}

fn max_relative_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn fock_comparison(
    analytic: &EigenFrequencies,
    qf: &QuadraticForm,
    hbar: f64,
    options: &OracleOptions,
) -> Result<FockComparison> {
    let analytic_levels: Vec<EnergyLevel> = enumerate_levels(analytic, hbar, options.levels)?
        .into_iter()
        .map(|l| l.level)
        .collect();
    let k = analytic_levels.len();

    let mut previous: Option<Vec<f64>> = None;
    let mut history = Vec::new();
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut current = Vec::new();
    let mut n_used = 0;
    for &n_max in &options.schedule {
        if n_max * n_max < k {
            continue;
        }
        let lowest = build_fock_matrix(qf, hbar, n_max)?.lowest_eigenvalues(k)?;
        history.push((n_max, lowest[0]));
        n_used = n_max;
        if let Some(prev) = &previous {
            last_change = max_relative_change(prev, &lowest);
            if last_change < options.tol / 10.0 {
                converged = true;
                current = lowest;
                break;
            }
        }
        previous = Some(lowest.clone());
        current = lowest;
    }
    if current.is_empty() {
        return Err(Error::InvalidParameter {
            name: "schedule",
            value: options.schedule.last().copied().unwrap_or(0) as f64,
            reason: "no truncation large enough for the requested levels",
        });
    }

    let exact: Vec<f64> = analytic_levels.iter().map(|l| l.energy).collect();
    let max_abs_deviation = exact
        .iter()
        .zip(&current)
        .map(|(a, o)| (a - o).abs())
        .fold(0.0, f64::max);
    Ok(FockComparison {
        n_max: n_used,
        converged,
        last_change,
        analytic_levels,
        max_rel_deviation: max_relative_change(&current, &exact),
        oracle_levels: current,
        max_abs_deviation,
        ground_history: history,
    })
}

/// Checks `analytic` frequencies for `qf` against both oracles.
///
/// The invariant check always runs. The Fock comparison runs when the ladder
/// substitution exists (`MᵢΩᵢ > 0`) and the analytic spectrum has no zero
/// mode; otherwise the reason is recorded in `fock_skipped`.
pub fn compare(
    analytic: &EigenFrequencies,
    qf: &QuadraticForm,
    hbar: f64,
    options: &OracleOptions,
) -> Result<OracleReport> {
    let oracle = oracle_invariants(&dynamical_matrix(qf))?;
    let analytic_invariants = analytic.invariants();

    let skip = if !(qf.m1 * qf.omega1() > 0.0 && qf.m2 * qf.omega2() > 0.0) {
        Some("quadratic form has a vanishing mode frequency (M_i*Omega_i = 0)".to_string())
    } else if !(analytic.omega_tilde_2 > 0.0) {
        Some("analytic spectrum has a zero mode (infinitely degenerate ladder)".to_string())
    } else {
        None
    };
    let fock = match skip {
        None => Some(fock_comparison(analytic, qf, hbar, options)?),
        Some(_) => None,
    };

    Ok(OracleReport {
        analytic: *analytic,
        analytic_invariants,
        oracle_invariants: oracle,
        invariant_abs_deviation: analytic_invariants.max_abs_difference(&oracle),
        invariant_rel_deviation: analytic_invariants.max_relative_difference(&oracle),
        fock,
        fock_skipped: skip,
        tol: options.tol,
        invariant_tol: options.invariant_tol,
    })
}
