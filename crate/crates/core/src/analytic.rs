//! Closed-form reference solutions: the factorized product state of the XYX
//! model and the free-fermion solution of the `delta_z = 0` chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Frame, StateVector};
use crate::lattice::Lattice;

fn check_anisotropy(delta_y: f64) -> Result<()> {
    if !(delta_y.is_finite() && (0.0..=1.0).contains(&delta_y)) {
        return Err(Error::InvalidParams(format!(
            "delta_y must lie in [0, 1], got {delta_y}"
        )));
    }
    Ok(())
}

/// Factorizing field of the XYX chain, `sqrt(2 (1 + delta_y))`.
pub fn factorizing_field(delta_y: f64) -> Result<f64> {
    check_anisotropy(delta_y)?;
    Ok((2.0 * (1.0 + delta_y)).sqrt())
}

/// Canting angle `acos(sqrt((1 + delta_y) / 2))` of the factorized state,
/// measured from the field axis.
pub fn canting_angle(delta_y: f64) -> Result<f64> {
    check_anisotropy(delta_y)?;
    Ok(((1.0 + delta_y) / 2.0).sqrt().min(1.0).acos())
}

/// Product state whose site spins have Bloch polar angle `theta` and
/// azimuth `phi_j = pi` on the even sublattice, `0` on the odd one:
/// `prod_j (cos(theta/2) |up> + sin(theta/2) e^{i phi_j} |down>)`.
#[derive(Debug, Clone)]
pub struct FactorizedAnsatz {
    pub theta: f64,
    pub phases: Vec<f64>,
    pub vector: StateVector,
}

impl FactorizedAnsatz {
    /// The same state expressed in another frame. The sublattice rotation
    /// shifts the phase of odd-sublattice sites by `pi`.
    pub fn in_frame(&self, lattice: &Lattice, frame: Frame) -> FactorizedAnsatz {
        match frame {
            Frame::Original => self.clone(),
            Frame::Rotated => {
                let phases: Vec<f64> = self
                    .phases
                    .iter()
                    .enumerate()
                    .map(|(j, &phi)| if lattice.parity(j) < 0 { phi + PI } else { phi })
                    .collect();
                FactorizedAnsatz {
                    theta: self.theta,
                    vector: product_state(self.theta, &phases),
                    phases,
                }
            }
        }
    }
}

fn product_state(theta: f64, phases: &[f64]) -> StateVector {
    let n = phases.len();
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let down: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(s, p)).collect();
    let amps = (0..1usize << n)
        .map(|idx| {
            (0..n).fold(Complex64::new(1.0, 0.0), |acc, j| {
                if idx >> j & 1 == 1 {
                    acc * c
                } else {
                    acc * down[j]
                }
            })
        })
        .collect();
    StateVector::new(n, amps).expect("length is 2^n")
}

/// Builds the factorized state in the original frame.
pub fn build_factorized_state(delta_y: f64, lattice: &Lattice) -> Result<FactorizedAnsatz> {
    let theta = canting_angle(delta_y)?;
    let phases: Vec<f64> = lattice
        .sublattice()
        .iter()
        .map(|&p| if p > 0 { PI } else { 0.0 })
        .collect();
    Ok(FactorizedAnsatz {
        theta,
        vector: product_state(theta, &phases),
        phases,
    })
}

/// `|<a|b>|`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// Norm of the projection of `a` onto the span of mutually orthogonal,
/// normalized `basis` vectors.
pub fn manifold_overlap(a: &StateVector, basis: &[&StateVector]) -> Result<f64> {
    let mut total = 0.0;
    for b in basis {
        total += a.inner(b)?.norm_sqr();
    }
    Ok(total.sqrt().min(1.0))
}

/// Ground-state data of the `delta_z = 0` chain from the Jordan-Wigner
/// mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeFermionSolution {
    pub energy: f64,
    pub mz: f64,
    /// `<S^z_0 S^z_r>` for `r = 1..=L/2` (`gzz[0]` is `r = 1`).
    pub gzz: Vec<f64>,
    /// Spin parity `(-1)^{N_up}` of the ground state.
    pub parity_sector: i8,
}

/// Occupation data of one momentum mode.
#[derive(Debug, Clone, Copy)]
struct Mode {
    k: f64,
    occupation: f64,
    /// `<c_k c_{-k}>`.
    anomalous: f64,
}

struct SectorState {
    energy: f64,
    modes: Vec<Mode>,
}

/// Ground state of the periodic XY chain in a field,
/// `H = sum_j [Sx_j Sx_{j+1} + dy Sy_j Sy_{j+1}] - h sum_j Sz_j`.
///
/// Spin-up maps to an occupied fermion. In the even fermion-parity sector
/// the boundary condition is antiperiodic, in the odd sector periodic; both
/// sectors are solved and the lower energy wins.
pub fn free_fermion_solution(delta_y: f64, h: f64, length: usize) -> Result<FreeFermionSolution> {
    check_anisotropy(delta_y)?;
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::InvalidParams(format!("field must be non-negative, got {h}")));
    }
    if length < 4 || length % 2 != 0 {
        return Err(Error::InvalidLattice(format!(
            "free-fermion chain needs even length >= 4, got {length}"
        )));
    }
    let even = even_sector(delta_y, h, length);
    let odd = odd_sector(delta_y, h, length);
    let (state, parity) = if even.energy <= odd.energy {
        (even, 1)
    } else {
        (odd, -1)
    };
    let l = length as f64;
    let density: f64 = state.modes.iter().map(|m| m.occupation).sum::<f64>() / l;
    let mz = density - 0.5;
    let gzz = (1..=length / 2)
        .map(|r| {
            let rf = r as f64;
            // G(r) = <c+_0 c_r>, F(r) = <c_0 c_r>
            let (mut g_re, mut g_im, mut f) = (0.0, 0.0, 0.0);
            for m in &state.modes {
                g_re += (m.k * rf).cos() * m.occupation;
                g_im += (m.k * rf).sin() * m.occupation;
                f += (m.k * rf).sin() * m.anomalous;
            }
            let g2 = (g_re * g_re + g_im * g_im) / (l * l);
            let f = f / l;
            mz * mz + f * f - g2
        })
        .collect();
    Ok(FreeFermionSolution {
        energy: state.energy,
        mz,
        gzz,
        parity_sector: parity,
    })
}

fn dispersion(delta_y: f64, h: f64, k: f64) -> (f64, f64) {
    let xi = 0.5 * (1.0 + delta_y) * k.cos() - h;
    let pair = 0.5 * (1.0 - delta_y) * k.sin();
    (xi, pair)
}

/// Ground state of a `(k, -k)` pair: energy, `<n_k>` and `<c_k c_{-k}>`.
fn paired_ground(xi: f64, pair: f64) -> (f64, f64, f64) {
    let e = (xi * xi + pair * pair).sqrt();
    if e < 1e-300 {
        return (0.0, 0.5, 0.0);
    }
    if pair.abs() < 1e-300 {
        return if xi < 0.0 { (2.0 * xi, 1.0, 0.0) } else { (0.0, 0.0, 0.0) };
    }
    (xi - e, 0.5 * (1.0 - xi / e), pair / (2.0 * e))
}

/// Antiperiodic momenta `k = pi (2n + 1) / L`, all paired.
fn even_sector(delta_y: f64, h: f64, length: usize) -> SectorState {
    let l = length as f64;
    let mut energy = 0.5 * h * l;
    let mut modes = Vec::with_capacity(length);
    for n in 0..length / 2 {
        let k = PI * (2 * n + 1) as f64 / l;
        let (xi, pair) = dispersion(delta_y, h, k);
        let (e, occ, anom) = paired_ground(xi, pair);
        energy += e;
        modes.push(Mode { k, occupation: occ, anomalous: anom });
        modes.push(Mode { k: -k, occupation: occ, anomalous: -anom });
    }
    SectorState { energy, modes }
}

/// Periodic momenta `k = 2 pi n / L`; the unpaired modes `k = 0, pi` fix the
/// odd total parity, or a pair is broken if that is cheaper.
fn odd_sector(delta_y: f64, h: f64, length: usize) -> SectorState {
    let l = length as f64;
    let mut base = 0.5 * h * l;
    let mut modes = Vec::with_capacity(length);
    let mut cheapest_break: Option<(usize, f64)> = None;
    for n in 1..length / 2 {
        let k = 2.0 * PI * n as f64 / l;
        let (xi, pair) = dispersion(delta_y, h, k);
        let (e, occ, anom) = paired_ground(xi, pair);
        base += e;
        let quasi = (xi * xi + pair * pair).sqrt();
        if cheapest_break.is_none_or(|(_, q)| quasi < q) {
            cheapest_break = Some((modes.len(), quasi));
        }
        modes.push(Mode { k, occupation: occ, anomalous: anom });
        modes.push(Mode { k: -k, occupation: occ, anomalous: -anom });
    }
    let (xi0, _) = dispersion(delta_y, h, 0.0);
    let (xi_pi, _) = dispersion(delta_y, h, PI);
    // one of k = 0, pi occupied
    let (single, n0, npi) = if xi0 <= xi_pi { (xi0, 1.0, 0.0) } else { (xi_pi, 0.0, 1.0) };
    // both or neither occupied, plus one broken pair
    let (both, b0, bpi) = if xi0 + xi_pi < 0.0 { (xi0 + xi_pi, 1.0, 1.0) } else { (0.0, 0.0, 0.0) };
    let broken = cheapest_break.map(|(_, q)| both + q);

    let (energy, occ0, occ_pi) = match (cheapest_break, broken) {
        (Some((idx, _)), Some(cost)) if cost < single => {
            // the broken pair holds one fermion at +k and none at -k
            modes[idx].occupation = 1.0;
            modes[idx].anomalous = 0.0;
            modes[idx + 1].occupation = 0.0;
            modes[idx + 1].anomalous = 0.0;
            (base + cost, b0, bpi)
        }
        _ => (base + single, n0, npi),
    };
    modes.push(Mode { k: 0.0, occupation: occ0, anomalous: 0.0 });
    modes.push(Mode { k: PI, occupation: occ_pi, anomalous: 0.0 });
    SectorState { energy, modes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{magnetization, site_expectation, Axis};
    use approx::assert_abs_diff_eq;

    #[test]
    fn factorizing_field_values() {
        assert_abs_diff_eq!(factorizing_field(0.25).unwrap(), 1.5811388300841898, epsilon = 1e-15);
        assert_abs_diff_eq!(factorizing_field(0.0).unwrap(), std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(factorizing_field(1.0).unwrap(), 2.0);
        assert_abs_diff_eq!(canting_angle(1.0).unwrap(), 0.0);
        assert!(factorizing_field(-0.1).is_err());
    }

    #[test]
    fn ansatz_expectations() {
        let lat = Lattice::chain(8).unwrap();
        let ansatz = build_factorized_state(0.25, &lat).unwrap();
        let sc = 0.5 * ansatz.theta.sin();
        assert_abs_diff_eq!(ansatz.vector.norm(), 1.0, epsilon = 1e-14);
        for j in 0..8 {
            let mz = site_expectation(&ansatz.vector, j, Axis::Z).unwrap();
            let mx = site_expectation(&ansatz.vector, j, Axis::X).unwrap();
            let my = site_expectation(&ansatz.vector, j, Axis::Y).unwrap();
            assert_abs_diff_eq!(mz, 0.5 * 0.625f64.sqrt(), epsilon = 1e-14);
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(mx, sign * sc, epsilon = 1e-14);
            assert_abs_diff_eq!(mx * mx + my * my + mz * mz, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn isotropic_ansatz_is_all_up() {
        let lat = Lattice::chain(6).unwrap();
        let ansatz = build_factorized_state(1.0, &lat).unwrap();
        assert_abs_diff_eq!(overlap(&ansatz.vector, &StateVector::all_up(6)).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(magnetization(&ansatz.vector, Axis::Z), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn overlap_basics() {
        let v = StateVector::random(4, 3);
        assert_abs_diff_eq!(overlap(&v, &v).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(overlap(&StateVector::basis(4, 1), &StateVector::basis(4, 2)).unwrap(), 0.0);
        assert!(overlap(&v, &StateVector::all_up(3)).is_err());
    }

    #[test]
    fn free_fermion_rejects_bad_input() {
        assert!(free_fermion_solution(0.5, 1.0, 7).is_err());
        assert!(free_fermion_solution(1.5, 1.0, 8).is_err());
        assert!(free_fermion_solution(0.5, -1.0, 8).is_err());
    }

    #[test]
    fn polarized_xx_chain() {
        // dy = 1 conserves total Sz; above h = 1 the state is fully polarized
        let ff = free_fermion_solution(1.0, 1.5, 8).unwrap();
        assert_abs_diff_eq!(ff.energy, -1.5 * 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.mz, 0.5, epsilon = 1e-12);
        for g in &ff.gzz {
            assert_abs_diff_eq!(*g, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn large_chain_is_fast_and_monotone() {
        let start = std::time::Instant::now();
        let ff = free_fermion_solution(0.5, 1.0, 1000).unwrap();
        assert!(start.elapsed().as_secs_f64() < 1.0);
        assert!(ff.energy.is_finite());
        let mz: Vec<f64> = (0..12)
            .map(|i| free_fermion_solution(0.5, 0.1 * i as f64, 1000).unwrap().mz)
            .collect();
        assert!(mz.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{mz:?}");
    }
}
