//! Magnetizations, two-point correlators, reduced density matrices and the
//! long-range order estimator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Frame, StateVector};
use crate::lattice::{pair_classes, Lattice, LatticeKind, PairClass, PairLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

#[inline]
fn up(state: usize, site: usize) -> bool {
    state >> site & 1 == 1
}

fn check_site(v: &StateVector, site: usize) -> Result<()> {
    if site >= v.n_sites() {
        return Err(Error::InvalidSites(format!(
            "site {site} out of range for {} sites",
            v.n_sites()
        )));
    }
    Ok(())
}

/// `<S^axis_site>`.
pub fn site_expectation(v: &StateVector, site: usize, axis: Axis) -> Result<f64> {
    check_site(v, site)?;
    let amps = v.amplitudes();
    let bit = 1usize << site;
    let value = match axis {
        Axis::Z => amps
            .iter()
            .enumerate()
            .map(|(s, a)| if up(s, site) { 0.5 } else { -0.5 } * a.norm_sqr())
            .sum(),
        Axis::X => amps
            .iter()
            .enumerate()
            .map(|(s, a)| 0.5 * (amps[s ^ bit].conj() * a).re)
            .sum(),
        Axis::Y => amps
            .iter()
            .enumerate()
            .map(|(s, a)| {
                // S^y |up> = (i/2)|down>, S^y |down> = (-i/2)|up>
                let phase = if up(s, site) { 0.5 } else { -0.5 };
                (amps[s ^ bit].conj() * a * Complex64::new(0.0, phase)).re
            })
            .sum(),
    };
    Ok(value)
}

/// Translation-averaged magnetization `<S^axis>`.
pub fn magnetization(v: &StateVector, axis: Axis) -> f64 {
    let n = v.n_sites();
    (0..n)
        .map(|s| site_expectation(v, s, axis).expect("site in range"))
        .sum::<f64>()
        / n as f64
}

/// `<S^axis_i S^axis_j>` for `i != j`.
pub fn pair_expectation(v: &StateVector, i: usize, j: usize, axis: Axis) -> Result<f64> {
    check_site(v, i)?;
    check_site(v, j)?;
    if i == j {
        return Err(Error::InvalidSites(format!("pair needs distinct sites, got {i},{i}")));
    }
    let amps = v.amplitudes();
    let mask = (1usize << i) | (1usize << j);
    let value = match axis {
        Axis::Z => amps
            .iter()
            .enumerate()
            .map(|(s, a)| {
                let aligned = up(s, i) == up(s, j);
                (if aligned { 0.25 } else { -0.25 }) * a.norm_sqr()
            })
            .sum(),
        Axis::X => amps
            .iter()
            .enumerate()
            .map(|(s, a)| 0.25 * (amps[s ^ mask].conj() * a).re)
            .sum(),
        Axis::Y => amps
            .iter()
            .enumerate()
            .map(|(s, a)| {
                let aligned = up(s, i) == up(s, j);
                let sign = if aligned { -0.25 } else { 0.25 };
                sign * (amps[s ^ mask].conj() * a).re
            })
            .sum(),
    };
    Ok(value)
}

/// Average of `<S^axis_i S^axis_j>` over every pair in the class.
pub fn correlator(v: &StateVector, class: &PairClass, axis: Axis) -> Result<f64> {
    let mut total = 0.0;
    for &(i, j) in &class.pairs {
        total += pair_expectation(v, i, j, axis)?;
    }
    Ok(total / class.pairs.len() as f64)
}

/// The pair class used by the long-range order estimator: ring distance
/// `L/2` on the chain, same-leg separation `L/2` on the ladder.
pub fn longrange_class(lattice: &Lattice) -> PairClass {
    let half = lattice.length() / 2;
    let label = match lattice.kind() {
        LatticeKind::Chain => PairLabel::Distance(half),
        LatticeKind::Ladder => PairLabel::Ladder {
            drung: half,
            cross: false,
        },
    };
    pair_classes(lattice)
        .into_iter()
        .find(|c| c.label == label)
        .expect("lattice always has a half-length class")
}

/// `|<S^x_i S^x_{i+L/2}>|^{1/2}`, translation averaged.
pub fn mx_longrange(v: &StateVector, lattice: &Lattice) -> Result<f64> {
    v.check_lattice(lattice)?;
    let g = correlator(v, &longrange_class(lattice), Axis::X)?;
    Ok(g.abs().sqrt())
}

/// One- or two-site reduced density matrix. Local basis order is
/// `(up, down)`; for two sites the index is `2 * a + b` with `a` the first
/// site's local state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensityMatrix {
    pub sites: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

impl ReducedDensityMatrix {
    pub fn order(&self) -> usize {
        self.sites.len()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Traces out the second site of a two-site matrix.
    pub fn trace_out_second(&self) -> Result<ReducedDensityMatrix> {
        if self.order() != 2 {
            return Err(Error::InvalidDensityMatrix("expected a two-site matrix".into()));
        }
        let m = DMatrix::from_fn(2, 2, |a, b| {
            self.matrix[(2 * a, 2 * b)] + self.matrix[(2 * a + 1, 2 * b + 1)]
        });
        Ok(ReducedDensityMatrix {
            sites: vec![self.sites[0]],
            matrix: m,
        })
    }

    /// Sorted eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut e: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Partial trace of `|v><v|` over every site not listed.
pub fn rdm(v: &StateVector, sites: &[usize]) -> Result<ReducedDensityMatrix> {
    match sites {
        [a] => check_site(v, *a)?,
        [a, b] => {
            check_site(v, *a)?;
            check_site(v, *b)?;
            if a == b {
                return Err(Error::InvalidSites(format!("repeated site {a}")));
            }
        }
        _ => {
            return Err(Error::InvalidSites(format!(
                "expected one or two sites, got {}",
                sites.len()
            )))
        }
    }
    let k = sites.len();
    let local_dim = 1usize << k;
    let mask: usize = sites.iter().map(|&s| 1usize << s).sum();
    // local index: 0 = up; first listed site is the most significant digit
    let local = |state: usize| -> usize {
        sites
            .iter()
            .fold(0, |acc, &s| 2 * acc + usize::from(!up(state, s)))
    };
    let embed = |rest: usize, idx: usize| -> usize {
        let mut state = rest;
        for (n, &s) in sites.iter().enumerate() {
            let digit = idx >> (k - 1 - n) & 1;
            if digit == 0 {
                state |= 1 << s;
            }
        }
        state
    };
    let amps = v.amplitudes();
    let mut m = DMatrix::<Complex64>::zeros(local_dim, local_dim);
    for (state, a) in amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let row = local(state);
        let rest = state & !mask;
        for col in 0..local_dim {
            let b = amps[embed(rest, col)];
            m[(row, col)] += a * b.conj();
        }
    }
    Ok(ReducedDensityMatrix {
        sites: sites.to_vec(),
        matrix: m,
    })
}

/// Diagonal correlators of one pair class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCorrelators {
    pub label: PairLabel,
    pub multiplicity: usize,
    pub gxx: f64,
    pub gyy: f64,
    pub gzz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub mz: f64,
    pub mx_longrange: f64,
    pub classes: Vec<ClassCorrelators>,
    /// Correlation length along x from a pure-exponential fit.
    pub xi_x: Option<f64>,
}

impl CorrelatorSet {
    pub fn compute(v: &StateVector, lattice: &Lattice, frame: Frame) -> Result<Self> {
        v.check_lattice(lattice)?;
        let classes = pair_classes(lattice)
            .iter()
            .map(|class| {
                Ok(ClassCorrelators {
                    label: class.label,
                    multiplicity: class.multiplicity,
                    gxx: correlator(v, class, Axis::X)?,
                    gyy: correlator(v, class, Axis::Y)?,
                    gzz: correlator(v, class, Axis::Z)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mx = mx_longrange(v, lattice)?;
        // same-leg or chain distances 1..=L/2, staggering removed
        let stagger = frame == Frame::Original;
        let gx: Vec<f64> = classes
            .iter()
            .filter(|c| !matches!(c.label, PairLabel::Ladder { cross: true, .. }))
            .map(|c| {
                let sign = if stagger && c.label.distance() % 2 == 1 { -1.0 } else { 1.0 };
                sign * c.gxx
            })
            .collect();
        Ok(CorrelatorSet {
            mz: magnetization(v, Axis::Z),
            mx_longrange: mx,
            xi_x: correlation_length_fit(&gx, mx * mx),
            classes,
        })
    }
}

/// Fits `c(r) = g(r) - mx2 ~ exp(-r / xi)` over `r in [2, L/2 - 1]`.
///
/// `g` holds the staggering-free x correlator at distances `1..=L/2`
/// (`g[0]` is distance 1). Returns `None` when fewer than three points in
/// the window are positive or the fit is degenerate.
pub fn correlation_length_fit(g: &[f64], mx2: f64) -> Option<f64> {
    let half = g.len();
    if half < 4 {
        return None;
    }
    let points: Vec<(f64, f64)> = (2..half)
        .filter_map(|r| {
            let c = g[r - 1] - mx2;
            (c > 1e-12).then(|| (r as f64, c.ln()))
        })
        .collect();
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    if points.iter().all(|p| (p.1 - mean_y).abs() <= 1e-14) {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -1.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Singlet on sites 0 and 1, all other sites up.
    fn singlet(n: usize) -> StateVector {
        let rest = ((1usize << n) - 1) & !0b11;
        let mut v = StateVector::zeros(n);
        let s = 0.5f64.sqrt();
        v.amplitudes_mut()[rest | 0b01] = Complex64::new(s, 0.0);
        v.amplitudes_mut()[rest | 0b10] = Complex64::new(-s, 0.0);
        v
    }

    #[test]
    fn all_up_expectations() {
        let v = StateVector::all_up(4);
        assert_abs_diff_eq!(magnetization(&v, Axis::Z), 0.5);
        assert_abs_diff_eq!(magnetization(&v, Axis::X), 0.0);
        let lat = Lattice::chain(4).unwrap();
        for class in pair_classes(&lat) {
            assert_abs_diff_eq!(correlator(&v, &class, Axis::Z).unwrap(), 0.25);
        }
        assert_abs_diff_eq!(mx_longrange(&v, &lat).unwrap(), 0.0);
    }

    #[test]
    fn singlet_correlators() {
        let v = singlet(4);
        for axis in Axis::ALL {
            assert_abs_diff_eq!(pair_expectation(&v, 0, 1, axis).unwrap(), -0.25, epsilon = 1e-15);
        }
        let rho = rdm(&v, &[0]).unwrap();
        let e = rho.eigenvalues();
        assert_abs_diff_eq!(e[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn all_up_pair_rdm_is_pure() {
        let v = StateVector::all_up(4);
        let rho = rdm(&v, &[1, 3]).unwrap();
        assert_abs_diff_eq!(rho.matrix[(0, 0)].re, 1.0);
        assert_abs_diff_eq!(rho.matrix.iter().map(|z| z.norm()).sum::<f64>(), 1.0);
    }

    #[test]
    fn partial_trace_consistency() {
        let v = StateVector::random(3, 5);
        let rho2 = rdm(&v, &[0, 2]).unwrap();
        let rho1 = rdm(&v, &[0]).unwrap();
        let traced = rho2.trace_out_second().unwrap();
        for (a, b) in traced.matrix.iter().zip(rho1.matrix.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(rho2.trace().re, 1.0, epsilon = 1e-12);
        assert!(rho2.eigenvalues()[0] >= -1e-12);
    }

    #[test]
    fn one_site_rdm_bloch_form() {
        let v = StateVector::random(4, 9);
        let rho = rdm(&v, &[2]).unwrap();
        let mx = site_expectation(&v, 2, Axis::X).unwrap();
        let my = site_expectation(&v, 2, Axis::Y).unwrap();
        let mz = site_expectation(&v, 2, Axis::Z).unwrap();
        // rho = (I + 2 m.sigma) / 2 in the (up, down) basis
        assert_abs_diff_eq!(rho.matrix[(0, 0)].re, 0.5 + mz, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix[(1, 1)].re, 0.5 - mz, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix[(1, 0)].re, mx, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.matrix[(1, 0)].im, my, epsilon = 1e-12);
    }

    #[test]
    fn correlators_match_pair_rdm() {
        let v = StateVector::random(5, 21);
        let sx = [[0.0, 0.5], [0.5, 0.0]];
        for (i, j) in [(0, 1), (1, 4), (3, 2)] {
            let rho = rdm(&v, &[i, j]).unwrap();
            // <Sz Sz> and <Sx Sx> from the two-site matrix
            let zz: f64 = (0..4)
                .map(|k| {
                    let a = if k & 2 == 0 { 0.5 } else { -0.5 };
                    let b = if k & 1 == 0 { 0.5 } else { -0.5 };
                    a * b * rho.matrix[(k, k)].re
                })
                .sum();
            let mut xx = 0.0;
            for r in 0..4 {
                for c in 0..4 {
                    let op = sx[c >> 1][r >> 1] * sx[c & 1][r & 1];
                    xx += op * rho.matrix[(r, c)].re;
                }
            }
            assert_abs_diff_eq!(zz, pair_expectation(&v, i, j, Axis::Z).unwrap(), epsilon = 1e-12);
            assert_abs_diff_eq!(xx, pair_expectation(&v, i, j, Axis::X).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rdm_rejects_bad_sites() {
        let v = StateVector::all_up(3);
        assert!(rdm(&v, &[3]).is_err());
        assert!(rdm(&v, &[1, 1]).is_err());
        assert!(rdm(&v, &[0, 1, 2]).is_err());
        assert!(pair_expectation(&v, 0, 0, Axis::X).is_err());
    }

    #[test]
    fn exponential_fit() {
        let g: Vec<f64> = (1..=8).map(|r| (-(r as f64) / 3.0).exp()).collect();
        let xi = correlation_length_fit(&g, 0.0).unwrap();
        assert_abs_diff_eq!(xi, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn fit_absent_without_connected_correlations() {
        let g = vec![0.09375; 6];
        assert_eq!(correlation_length_fit(&g, 0.09375), None);
        assert_eq!(correlation_length_fit(&[0.1, 0.05, 0.02], 0.0), None);
        assert_eq!(correlation_length_fit(&[0.2; 6], 0.1), None);
    }
}
