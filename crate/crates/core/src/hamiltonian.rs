//! The XYZ Hamiltonian in a uniform field, applied matrix-free.
//!
//! ```text
//! H = sum_<ij> [ s Sx_i Sx_j + s dy Sy_i Sy_j + dz Sz_i Sz_j ] - h sum_i Sz_i
//! ```
//!
//! with `s = +1` in the original (antiferromagnetic x,y) frame and `s = -1`
//! after the sublattice rotation `S^{x,y}_i -> (-1)^i S^{x,y}_i`. The
//! exchange constant is the unit of energy.
//!
//! Basis convention: bit `b` of a basis index set means spin up at site `b`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Largest system handled by [`dense_hamiltonian`].
pub const DENSE_MAX_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Antiferromagnetic x and y couplings, as written.
    #[default]
    Original,
    /// Sublattice-rotated frame with ferromagnetic x and y couplings.
    Rotated,
}

impl Frame {
    /// Sign multiplying the x and y exchange on every bond of a bipartite lattice.
    pub fn transverse_sign(self) -> f64 {
        match self {
            Frame::Original => 1.0,
            Frame::Rotated => -1.0,
        }
    }
}

impl std::fmt::Display for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frame::Original => f.write_str("original"),
            Frame::Rotated => f.write_str("rotated"),
        }
    }
}

/// Couplings and field. `J = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta_y: f64,
    pub delta_z: f64,
    /// Reduced field `g mu_B H / J`.
    pub h: f64,
    #[serde(default)]
    pub frame: Frame,
}

impl ModelParams {
    pub fn new(delta_y: f64, delta_z: f64, h: f64) -> Result<Self> {
        let params = ModelParams {
            delta_y,
            delta_z,
            h,
            frame: Frame::Original,
        };
        params.validate()?;
        Ok(params)
    }

    /// The XYX model (`delta_z = 1`).
    pub fn xyx(delta_y: f64, h: f64) -> Result<Self> {
        Self::new(delta_y, 1.0, h)
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_field(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        if !unit(self.delta_y) {
            return Err(Error::InvalidParams(format!(
                "delta_y must lie in [0, 1], got {}",
                self.delta_y
            )));
        }
        if !unit(self.delta_z) {
            return Err(Error::InvalidParams(format!(
                "delta_z must lie in [0, 1], got {}",
                self.delta_z
            )));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "field must be finite and non-negative, got {}",
                self.h
            )));
        }
        Ok(())
    }
}

/// Complex amplitudes over the `2^N` spin-z product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        let expected = 1usize << n_sites;
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: amps.len(),
            });
        }
        Ok(StateVector { n_sites, amps })
    }

    pub fn from_real(n_sites: usize, amps: &[f64]) -> Result<Self> {
        Self::new(n_sites, amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn zeros(n_sites: usize) -> Self {
        StateVector {
            n_sites,
            amps: vec![Complex64::new(0.0, 0.0); 1usize << n_sites],
        }
    }

    /// The product basis state with the given index.
    pub fn basis(n_sites: usize, index: usize) -> Self {
        let mut v = Self::zeros(n_sites);
        v.amps[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// `|up up ... up>`.
    pub fn all_up(n_sites: usize) -> Self {
        Self::basis(n_sites, (1usize << n_sites) - 1)
    }

    /// Normalized state with seeded pseudo-random complex amplitudes.
    pub fn random(n_sites: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1usize << n_sites)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut v = StateVector { n_sites, amps };
        v.normalize();
        v
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scales to unit norm. A zero vector is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `alpha * self + beta * other`.
    pub fn combine(
        &self,
        alpha: Complex64,
        other: &StateVector,
        beta: Complex64,
    ) -> Result<StateVector> {
        self.check_same(other)?;
        let amps = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(StateVector {
            n_sites: self.n_sites,
            amps,
        })
    }

    pub(crate) fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                got: other.amps.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if self.n_sites != lattice.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: lattice.dim(),
                got: self.amps.len(),
            });
        }
        Ok(())
    }
}

/// Z2 parity `(-1)^{number of up spins}` of a basis state.
pub fn parity_of_basis_state(index: usize) -> i8 {
    if index.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Precomputed bond masks and couplings shared by the full-space and
/// parity-sector appliers.
#[derive(Debug, Clone)]
pub(crate) struct BondTable {
    n_sites: usize,
    masks: Vec<usize>,
    /// Amplitude connecting anti-aligned pairs: `s (1 + dy) / 4`.
    flip_anti: f64,
    /// Amplitude connecting aligned pairs: `s (1 - dy) / 4`.
    flip_aligned: f64,
    delta_z: f64,
    h: f64,
}

impl BondTable {
    pub(crate) fn new(params: &ModelParams, lattice: &Lattice) -> Result<Self> {
        params.validate()?;
        let s = params.frame.transverse_sign();
        Ok(BondTable {
            n_sites: lattice.n_sites(),
            masks: lattice
                .bonds()
                .iter()
                .map(|&(i, j)| (1usize << i) | (1usize << j))
                .collect(),
            flip_anti: s * (1.0 + params.delta_y) / 4.0,
            flip_aligned: s * (1.0 - params.delta_y) / 4.0,
            delta_z: params.delta_z,
            h: params.h,
        })
    }

    #[inline]
    pub(crate) fn diagonal(&self, state: usize) -> f64 {
        let mut zz = 0.0;
        for &m in &self.masks {
            let aligned = (state & m).count_ones() != 1;
            zz += if aligned { 0.25 } else { -0.25 };
        }
        let up = state.count_ones() as f64;
        self.delta_z * zz - self.h * (up - 0.5 * self.n_sites as f64)
    }

    /// Calls `f(partner, amplitude)` for every off-diagonal element in the
    /// row of `state`.
    #[inline]
    pub(crate) fn for_each_flip(&self, state: usize, mut f: impl FnMut(usize, f64)) {
        for &m in &self.masks {
            let anti = (state & m).count_ones() == 1;
            let amp = if anti { self.flip_anti } else { self.flip_aligned };
            if amp != 0.0 {
                f(state ^ m, amp);
            }
        }
    }
}

/// Returns `H v`.
pub fn apply_hamiltonian(
    params: &ModelParams,
    lattice: &Lattice,
    v: &StateVector,
) -> Result<StateVector> {
    v.check_lattice(lattice)?;
    let table = BondTable::new(params, lattice)?;
    let input = v.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    out.par_iter_mut().enumerate().for_each(|(state, slot)| {
        let mut acc = input[state] * table.diagonal(state);
        table.for_each_flip(state, |partner, amp| acc += input[partner] * amp);
        *slot = acc;
    });
    StateVector::new(v.n_sites(), out)
}

/// Dense Hamiltonian for small systems, assembled from single-site spin
/// operators. Serves as an oracle for the matrix-free path.
pub fn dense_hamiltonian(params: &ModelParams, lattice: &Lattice) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = lattice.n_sites();
    if n > DENSE_MAX_SITES {
        return Err(Error::TooLarge {
            sites: n,
            max: DENSE_MAX_SITES,
        });
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let rotated = params.frame == Frame::Rotated;
    for &(i, j) in lattice.bonds() {
        let sign = if rotated {
            f64::from(lattice.parity(i) * lattice.parity(j))
        } else {
            1.0
        };
        let weights = [
            (Axis::X, sign),
            (Axis::Y, sign * params.delta_y),
            (Axis::Z, params.delta_z),
        ];
        for col in 0..dim {
            for &(axis, w) in &weights {
                let (mid, a1) = spin_op(axis, j, col);
                let (row, a2) = spin_op(axis, i, mid);
                let elem = a1 * a2 * w;
                debug_assert!(elem.im.abs() < 1e-15);
                h[(row, col)] += elem.re;
            }
        }
    }
    for col in 0..dim {
        for site in 0..n {
            let (row, a) = spin_op(Axis::Z, site, col);
            h[(row, col)] -= params.h * a.re;
        }
    }
    Ok(h)
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
    Z,
}

/// `S^axis_site |state> = amp |out>`.
fn spin_op(axis: Axis, site: usize, state: usize) -> (usize, Complex64) {
    let up = state >> site & 1 == 1;
    let flipped = state ^ (1 << site);
    match axis {
        Axis::X => (flipped, Complex64::new(0.5, 0.0)),
        Axis::Y => (
            flipped,
            if up {
                Complex64::new(0.0, 0.5)
            } else {
                Complex64::new(0.0, -0.5)
            },
        ),
        Axis::Z => (state, Complex64::new(if up { 0.5 } else { -0.5 }, 0.0)),
    }
}

/// Real vectors restricted to one parity sector. A sector state is indexed
/// by the upper `N - 1` bits; bit 0 is fixed by the sector parity.
#[derive(Debug, Clone)]
pub(crate) struct ParitySector {
    table: BondTable,
    odd: bool,
}

impl ParitySector {
    pub(crate) fn new(params: &ModelParams, lattice: &Lattice, parity: i8) -> Result<Self> {
        Ok(ParitySector {
            table: BondTable::new(params, lattice)?,
            odd: parity < 0,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        1usize << (self.table.n_sites - 1)
    }

    #[inline]
    pub(crate) fn full_index(&self, k: usize) -> usize {
        let low = (k.count_ones() as usize + self.odd as usize) & 1;
        (k << 1) | low
    }

    pub(crate) fn apply(&self, input: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(k, slot)| {
            let state = self.full_index(k);
            let mut acc = input[k] * self.table.diagonal(state);
            self.table
                .for_each_flip(state, |partner, amp| acc += input[partner >> 1] * amp);
            *slot = acc;
        });
    }

    pub(crate) fn embed(&self, v: &[f64]) -> StateVector {
        let mut full = StateVector::zeros(self.table.n_sites);
        let amps = full.amplitudes_mut();
        for (k, &x) in v.iter().enumerate() {
            amps[self.full_index(k)] = Complex64::new(x, 0.0);
        }
        full
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn dense_apply(h: &DMatrix<f64>, v: &StateVector) -> Vec<Complex64> {
        (0..h.nrows())
            .map(|r| {
                (0..h.ncols())
                    .map(|c| v.amplitudes()[c] * h[(r, c)])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn all_up_eigenvalues() {
        let lat = Lattice::chain(4).unwrap();
        let up = StateVector::all_up(4);
        for (h, expected) in [(0.0, 1.0), (2.0, -3.0)] {
            let p = ModelParams::new(1.0, 1.0, h).unwrap();
            let hv = apply_hamiltonian(&p, &lat, &up).unwrap();
            for (a, b) in hv.amplitudes().iter().zip(up.amplitudes()) {
                assert_abs_diff_eq!(a.re, expected * b.re, epsilon = 1e-14);
                assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn matrix_free_matches_dense() {
        let lat = Lattice::chain(4).unwrap();
        for frame in [Frame::Original, Frame::Rotated] {
            let p = ModelParams::new(0.25, 1.0, 1.0).unwrap().with_frame(frame);
            let dense = dense_hamiltonian(&p, &lat).unwrap();
            let v = StateVector::random(4, 11);
            let fast = apply_hamiltonian(&p, &lat, &v).unwrap();
            for (a, b) in fast.amplitudes().iter().zip(dense_apply(&dense, &v)) {
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
                assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matrix_free_matches_dense_on_basis_ladder() {
        let lat = Lattice::ladder(4).unwrap();
        let p = ModelParams::new(0.6, 0.3, 0.7).unwrap();
        let dense = dense_hamiltonian(&p, &lat).unwrap();
        for idx in [0usize, 5, 77, 200, 255] {
            let v = StateVector::basis(8, idx);
            let fast = apply_hamiltonian(&p, &lat, &v).unwrap();
            for (r, a) in fast.amplitudes().iter().enumerate() {
                assert_abs_diff_eq!(a.re, dense[(r, idx)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dense_is_symmetric() {
        let lat = Lattice::chain(4).unwrap();
        let p = ModelParams::new(0.3, 0.7, 0.9).unwrap();
        let h = dense_hamiltonian(&p, &lat).unwrap();
        assert_eq!(h, h.transpose());
    }

    fn total_sz(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(1 << n, 1 << n, |r, c| {
            if r == c {
                r.count_ones() as f64 - 0.5 * n as f64
            } else {
                0.0
            }
        })
    }

    fn parity_op(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(1 << n, 1 << n, |r, c| {
            if r == c {
                f64::from(parity_of_basis_state(r))
            } else {
                0.0
            }
        })
    }

    #[test]
    fn conservation_laws() {
        let lat = Lattice::chain(4).unwrap();
        let sz = total_sz(4);
        let par = parity_op(4);
        let iso = dense_hamiltonian(&ModelParams::new(1.0, 1.0, 0.0).unwrap(), &lat).unwrap();
        assert!((&iso * &sz - &sz * &iso).amax() < 1e-14);

        let aniso = dense_hamiltonian(&ModelParams::new(0.25, 1.0, 0.0).unwrap(), &lat).unwrap();
        assert!((&aniso * &sz - &sz * &aniso).amax() > 0.1);
        assert!((&aniso * &par - &par * &aniso).amax() < 1e-14);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_of_basis_state(0), 1);
        assert_eq!(parity_of_basis_state(3), 1);
        assert_eq!(parity_of_basis_state(7), -1);
    }

    #[test]
    fn dense_rejects_large() {
        let lat = Lattice::chain(14).unwrap();
        let p = ModelParams::new(0.25, 1.0, 1.0).unwrap();
        assert!(matches!(
            dense_hamiltonian(&p, &lat),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let lat = Lattice::chain(6).unwrap();
        let p = ModelParams::new(0.25, 1.0, 1.0).unwrap();
        let v = StateVector::all_up(4);
        assert!(matches!(
            apply_hamiltonian(&p, &lat, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(1.5, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, -0.1, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, -1.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn frames_share_spectrum() {
        for l in [4, 6] {
            let lat = Lattice::chain(l).unwrap();
            let p = ModelParams::new(0.25, 1.0, 1.3).unwrap();
            let spectrum = |frame| {
                let h = dense_hamiltonian(&p.with_frame(frame), &lat).unwrap();
                let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
                e.sort_by(f64::total_cmp);
                e
            };
            let a = spectrum(Frame::Original);
            let b = spectrum(Frame::Rotated);
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn sector_apply_matches_full() {
        let lat = Lattice::chain(6).unwrap();
        let p = ModelParams::new(0.4, 0.8, 1.1).unwrap();
        for parity in [1i8, -1] {
            let sector = ParitySector::new(&p, &lat, parity).unwrap();
            let x: Vec<f64> = (0..sector.dim()).map(|k| ((k * 7 + 3) % 11) as f64 - 5.0).collect();
            let mut y = vec![0.0; sector.dim()];
            sector.apply(&x, &mut y);
            let full = apply_hamiltonian(&p, &lat, &sector.embed(&x)).unwrap();
            for k in 0..sector.dim() {
                let s = sector.full_index(k);
                assert_eq!(parity_of_basis_state(s), parity);
                assert_abs_diff_eq!(full.amplitudes()[s].re, y[k], epsilon = 1e-12);
            }
        }
    }
}
