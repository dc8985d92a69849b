//! One-tangle, concurrence (correlator formula and two-site density
//! matrix), summed squared concurrence and the entanglement ratio.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::StateVector;
use crate::observables::{site_expectation, Axis, CorrelatorSet, ReducedDensityMatrix};
use crate::lattice::PairLabel;

/// Below this value the one-tangle counts as zero and the ratio is absent.
pub const TANGLE_FLOOR: f64 = 1e-12;

/// `tau1 = 1 - 4 sum_a (M^a)^2`, clamped to `[0, 1]`.
pub fn one_tangle(m: [f64; 3]) -> Result<f64> {
    if m.iter().any(|x| !x.is_finite() || x.abs() > 0.5 + 1e-12) {
        return Err(Error::InvalidState(format!(
            "magnetization components must satisfy |M| <= 1/2, got {m:?}"
        )));
    }
    let raw = 1.0 - 4.0 * m.iter().map(|x| x * x).sum::<f64>();
    Ok(clamp_unit(raw))
}

/// `tau1 = 4 det rho1`, from a one-site density matrix.
pub fn one_tangle_det(rho: &ReducedDensityMatrix) -> Result<f64> {
    if rho.order() != 1 {
        return Err(Error::InvalidDensityMatrix("expected a one-site matrix".into()));
    }
    let m = &rho.matrix;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Ok(clamp_unit(4.0 * det.re))
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// The two competing terms of the correlator formula and the resulting
/// concurrence `C = 2 max(0, C1, C2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceTriple {
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
}

impl ConcurrenceTriple {
    /// True when `C2 > C1`. In that regime a symmetry-broken ground state
    /// can carry more pairwise entanglement than the value reported here.
    pub fn lower_bound(&self) -> bool {
        self.c2 > self.c1
    }
}

/// Concurrence of a parity-symmetric pair state from its correlators:
///
/// ```text
/// C1 = gzz - 1/4 + |gxx - gyy|
/// C2 = |gxx + gyy| - sqrt((1/4 + gzz)^2 - mz^2)
/// ```
pub fn concurrence_formula(gxx: f64, gyy: f64, gzz: f64, mz: f64) -> Result<ConcurrenceTriple> {
    let bound = 0.25 + 1e-12;
    if gxx.abs() > bound || gyy.abs() > bound || gzz.abs() > bound || mz.abs() > 0.5 + 1e-12 {
        return Err(Error::InvalidState(format!(
            "correlators out of range: gxx={gxx}, gyy={gyy}, gzz={gzz}, mz={mz}"
        )));
    }
    let arg = (0.25 + gzz).powi(2) - mz * mz;
    if arg < -1e-12 {
        return Err(Error::InvalidState(format!(
            "(1/4 + gzz)^2 - mz^2 = {arg:e} is negative"
        )));
    }
    let c1 = gzz - 0.25 + (gxx - gyy).abs();
    let c2 = (gxx + gyy).abs() - arg.max(0.0).sqrt();
    let c = (2.0 * c1.max(c2).max(0.0)).min(1.0);
    Ok(ConcurrenceTriple { c1, c2, c })
}

/// Concurrence of an arbitrary two-qubit density matrix:
/// `max(0, l1 - l2 - l3 - l4)` with `l_k` the descending square roots of
/// the eigenvalues of `rho (sy x sy) rho* (sy x sy)`.
pub fn concurrence_wootters(rho: &ReducedDensityMatrix) -> Result<f64> {
    if rho.order() != 2 || rho.matrix.shape() != (4, 4) {
        return Err(Error::InvalidDensityMatrix("expected a 4x4 two-site matrix".into()));
    }
    let m = &rho.matrix;
    let herm_err = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_err > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (deviation {herm_err:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} is not 1")));
    }
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&e| e < -1e-10) {
        return Err(Error::InvalidDensityMatrix(
            "matrix has a negative eigenvalue".into(),
        ));
    }
    // sqrt(rho) from its eigendecomposition
    let sqrt_vals = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::new(e.max(0.0).sqrt(), 0.0)));
    let sqrt_rho = &eig.eigenvectors * sqrt_vals * eig.eigenvectors.adjoint();

    // sigma_y x sigma_y in the (up, down) basis is the anti-diagonal (-1, 1, 1, -1)
    let flip = DMatrix::from_fn(4, 4, |r, c| {
        if r + c == 3 {
            let sign = if r == 0 || r == 3 { -1.0 } else { 1.0 };
            Complex64::new(sign, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let tilde = &flip * m.map(|z| z.conj()) * &flip;
    let r = &sqrt_rho * tilde * &sqrt_rho;
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = r
        .symmetric_eigenvalues()
        .iter()
        .map(|&e| e.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// `tau2 = sum over partners of C^2`, given `(C, multiplicity)` per class.
pub fn tau2(concurrences: &[(f64, usize)]) -> f64 {
    concurrences
        .iter()
        .map(|&(c, mult)| mult as f64 * c * c)
        .sum()
}

/// `R = tau2 / tau1`, absent when `tau1` is below [`TANGLE_FLOOR`].
pub fn entanglement_ratio(tau2: f64, tau1: f64) -> Option<f64> {
    (tau1 >= TANGLE_FLOOR).then(|| tau2 / tau1)
}

/// Which one-tangle feeds the ratio and the monogamy check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tau1Variant {
    /// `M^x = 0`, the literal finite-size value.
    Sym,
    /// `|M^x|` replaced by the long-range correlator estimate.
    #[default]
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassConcurrence {
    pub label: PairLabel,
    pub multiplicity: usize,
    pub triple: ConcurrenceTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub tau1_sym: f64,
    pub tau1_broken: f64,
    pub concurrences: Vec<ClassConcurrence>,
    pub tau2: f64,
    pub ratio: Option<f64>,
    pub ckw_ok: bool,
    pub variant: Tau1Variant,
}

impl EntanglementReport {
    pub fn from_correlators(corr: &CorrelatorSet, variant: Tau1Variant) -> Result<Self> {
        let tau1_sym = one_tangle([0.0, 0.0, corr.mz])?;
        let tau1_broken = one_tangle([corr.mx_longrange, 0.0, corr.mz])?;
        let concurrences = corr
            .classes
            .iter()
            .map(|cl| {
                Ok(ClassConcurrence {
                    label: cl.label,
                    multiplicity: cl.multiplicity,
                    triple: concurrence_formula(cl.gxx, cl.gyy, cl.gzz, corr.mz)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let tau2 = tau2(
            &concurrences
                .iter()
                .map(|c| (c.triple.c, c.multiplicity))
                .collect::<Vec<_>>(),
        );
        let tau1 = match variant {
            Tau1Variant::Sym => tau1_sym,
            Tau1Variant::Broken => tau1_broken,
        };
        Ok(EntanglementReport {
            tau1_sym,
            tau1_broken,
            ratio: entanglement_ratio(tau2, tau1),
            ckw_ok: tau2 <= tau1 + TANGLE_FLOOR,
            concurrences,
            tau2,
            variant,
        })
    }

    pub fn tau1(&self) -> f64 {
        match self.variant {
            Tau1Variant::Sym => self.tau1_sym,
            Tau1Variant::Broken => self.tau1_broken,
        }
    }
}

/// Least-entangled state in the span of two ground states from opposite
/// parity sectors.
#[derive(Debug, Clone)]
pub struct ManifoldMinimum {
    /// Site-averaged one-tangle `4 det rho1` of `state`.
    pub tau1: f64,
    pub state: StateVector,
}

/// Minimizes the site-averaged one-tangle over all normalized combinations
/// `cos(b/2) even + e^{ig} sin(b/2) odd`.
///
/// Parity makes `<S^z_i>` depend only on the polar coordinate of the Bloch
/// vector of the combination and `<S^{x,y}_i>` only on its in-plane part, so
/// the optimum follows in closed form.
pub fn least_entangled_combination(even: &StateVector, odd: &StateVector) -> Result<ManifoldMinimum> {
    even.check_same(odd)?;
    let n = even.n_sites();
    let mut qxy = [[0.0f64; 2]; 2];
    let mut qzz = 0.0;
    let mut pq = 0.0;
    for site in 0..n {
        let za = site_expectation(even, site, Axis::Z)?;
        let zb = site_expectation(odd, site, Axis::Z)?;
        let (p, q) = (0.5 * (za + zb), 0.5 * (za - zb));
        qzz += q * q;
        pq += p * q;
        for axis in [Axis::X, Axis::Y] {
            let t = transition(even, odd, site, axis);
            // <S> = nx Re t - ny Im t
            let u = [t.re, -t.im];
            for r in 0..2 {
                for c in 0..2 {
                    qxy[r][c] += u[r] * u[c];
                }
            }
        }
    }
    // largest eigenpair of the 2x2 in-plane block
    let (a, b, d) = (qxy[0][0], qxy[0][1], qxy[1][1]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let mu = mean + radius;
    let dir = if b.abs() > 1e-300 {
        let (x, y) = (b, mu - a);
        let len = (x * x + y * y).sqrt();
        [x / len, y / len]
    } else if a >= d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    // maximize mu (1 - x^2) + qzz x^2 + 2 pq x over x = cos(b) in [-1, 1]
    let g = |x: f64| mu * (1.0 - x * x) + qzz * x * x + 2.0 * pq * x;
    let mut best = if g(1.0) >= g(-1.0) { 1.0 } else { -1.0 };
    let curvature = qzz - mu;
    if curvature < 0.0 {
        let x = (-pq / curvature).clamp(-1.0, 1.0);
        if g(x) > g(best) {
            best = x;
        }
    }
    let x = best;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let (nx, ny) = (s * dir[0], s * dir[1]);
    let alpha = ((1.0 + x) / 2.0).sqrt();
    // alpha* beta = (nx + i ny) / 2
    let beta = if alpha > 1e-300 {
        Complex64::new(nx, ny) / (2.0 * alpha)
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut state = even.combine(Complex64::new(alpha, 0.0), odd, beta)?;
    state.normalize();
    let tau1 = (0..n)
        .map(|site| {
            let m = [
                site_expectation(&state, site, Axis::X)?,
                site_expectation(&state, site, Axis::Y)?,
                site_expectation(&state, site, Axis::Z)?,
            ];
            one_tangle(m)
        })
        .sum::<Result<f64>>()?
        / n as f64;
    Ok(ManifoldMinimum { tau1, state })
}

/// `<even| S^axis_site |odd>`.
fn transition(even: &StateVector, odd: &StateVector, site: usize, axis: Axis) -> Complex64 {
    let bit = 1usize << site;
    let a = even.amplitudes();
    let b = odd.amplitudes();
    b.iter()
        .enumerate()
        .map(|(s, amp)| {
            let is_up = s & bit != 0;
            let factor = match axis {
                Axis::X => Complex64::new(0.5, 0.0),
                Axis::Y => Complex64::new(0.0, if is_up { 0.5 } else { -0.5 }),
                Axis::Z => unreachable!("S^z preserves parity"),
            };
            a[s ^ bit].conj() * factor * amp
        })
        .sum()
}
