//! Lanczos ground states with full reorthogonalization, resolved by parity
//! sector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{ModelParams, ParitySector, StateVector};
use crate::lattice::Lattice;

/// Start-vector seed used when none is configured.
pub const DEFAULT_SEED: u64 = 20_040_611;

/// Two sector ground energies closer than this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Largest system accepted by the solver.
pub const MAX_SITES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual-norm tolerance, relative to `max(1, |E|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-11,
            max_iter: 600,
            seed: DEFAULT_SEED,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0 && self.tol < 1e-3) {
            return Err(Error::InvalidOptions(format!(
                "tolerance must lie in (0, 1e-3), got {}",
                self.tol
            )));
        }
        if self.max_iter < 2 {
            return Err(Error::InvalidOptions(format!(
                "max_iter must be at least 2, got {}",
                self.max_iter
            )));
        }
        Ok(())
    }
}

/// Lowest eigenpair of one parity sector.
#[derive(Debug, Clone)]
pub struct SectorGround {
    pub parity: i8,
    pub energy: f64,
    /// Second-lowest Ritz value in the sector, if the sector has one.
    pub next: Option<f64>,
    pub vector: StateVector,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub energy: f64,
    pub vector: StateVector,
    /// Parity of the sector holding the returned state.
    pub parity: i8,
    /// `E1 - E0` over both sectors; zero when the sectors are degenerate.
    pub gap: f64,
    pub iterations: usize,
    pub residual: f64,
    /// True when the two sector ground energies agree within [`DEGENERACY_TOL`].
    pub degenerate: bool,
    /// Lowest state of the other parity sector.
    pub partner: SectorGround,
}

/// Ground state over both parity sectors. When the sectors are degenerate
/// the even-sector state is returned and `degenerate` is set.
pub fn lanczos_ground(
    params: &ModelParams,
    lattice: &Lattice,
    opts: &SolverOptions,
) -> Result<GroundStateResult> {
    let even = sector_ground(params, lattice, 1, opts)?;
    let odd = sector_ground(params, lattice, -1, opts)?;
    let degenerate = (even.energy - odd.energy).abs() <= DEGENERACY_TOL;
    let (ground, partner) = if degenerate || even.energy < odd.energy {
        (even, odd)
    } else {
        (odd, even)
    };
    let mut excited = partner.energy;
    if let Some(next) = ground.next {
        excited = excited.min(next);
    }
    let gap = if degenerate {
        0.0
    } else {
        (excited - ground.energy).max(0.0)
    };
    Ok(GroundStateResult {
        energy: ground.energy,
        parity: ground.parity,
        gap,
        iterations: ground.iterations + partner.iterations,
        residual: ground.residual,
        degenerate,
        vector: ground.vector,
        partner,
    })
}

/// Lowest eigenpair restricted to the sector of the given parity.
pub fn sector_ground(
    params: &ModelParams,
    lattice: &Lattice,
    parity: i8,
    opts: &SolverOptions,
) -> Result<SectorGround> {
    opts.validate()?;
    check_size(lattice, MAX_SITES)?;
    let sector = ParitySector::new(params, lattice, parity)?;
    let start = start_vector(sector.dim(), opts.seed, parity);
    let run = lanczos(
        |x, y| sector.apply(x, y),
        sector.dim(),
        start,
        &[],
        2,
        opts,
    )?;
    Ok(SectorGround {
        parity,
        energy: run.values[0],
        next: run.values.get(1).copied(),
        vector: sector.embed(&run.vectors[0]),
        residual: run.residuals[0],
        iterations: run.iterations,
    })
}

/// The `k` lowest eigenvalues over both parity sectors, ascending.
/// Degenerate levels inside a sector are resolved by locking converged
/// vectors and restarting.
pub fn low_spectrum(
    params: &ModelParams,
    lattice: &Lattice,
    k: usize,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    opts.validate()?;
    if k == 0 || k > 6 {
        return Err(Error::InvalidOptions(format!("k must lie in 1..=6, got {k}")));
    }
    check_size(lattice, 20)?;
    let loose = SolverOptions {
        tol: opts.tol.max(1e-10),
        ..*opts
    };
    let mut energies = Vec::with_capacity(2 * k);
    for parity in [1i8, -1] {
        let sector = ParitySector::new(params, lattice, parity)?;
        let mut locked: Vec<Vec<f64>> = Vec::new();
        for round in 0..k.min(sector.dim()) {
            let start = start_vector(sector.dim(), loose.seed.wrapping_add(round as u64), parity);
            let run = lanczos(|x, y| sector.apply(x, y), sector.dim(), start, &locked, 1, &loose)?;
            energies.push(run.values[0]);
            locked.push(run.vectors.into_iter().next().unwrap());
        }
    }
    energies.sort_by(f64::total_cmp);
    energies.truncate(k);
    Ok(energies)
}

fn check_size(lattice: &Lattice, max: usize) -> Result<()> {
    if lattice.n_sites() > max {
        return Err(Error::TooLarge {
            sites: lattice.n_sites(),
            max,
        });
    }
    Ok(())
}

fn start_vector(dim: usize, seed: u64, parity: i8) -> Vec<f64> {
    let stream = if parity > 0 { 0x9e37 } else { 0x79b9 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream);
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub(crate) struct LanczosRun {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Lanczos on a real symmetric operator. Converges the `wanted` lowest Ritz
/// pairs: the lowest to `opts.tol`, the rest to `1e-8`. Krylov vectors are
/// kept orthogonal to `deflate` as well as to each other.
pub(crate) fn lanczos(
    op: impl Fn(&[f64], &mut [f64]),
    dim: usize,
    mut start: Vec<f64>,
    deflate: &[Vec<f64>],
    wanted: usize,
    opts: &SolverOptions,
) -> Result<LanczosRun> {
    let available = dim.saturating_sub(deflate.len());
    if available == 0 {
        return Err(Error::InvalidOptions("sector exhausted by deflation".into()));
    }
    let wanted = wanted.min(available);
    let max_steps = opts.max_iter.min(available);

    orthogonalize(&mut start, deflate);
    let norm = dot(&start, &start).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidOptions("start vector vanishes after deflation".into()));
    }
    start.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut best_residual = f64::INFINITY;

    loop {
        let j = basis.len() - 1;
        op(&basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        let alpha = dot(&w, &basis[j]);
        axpy(-alpha, &basis[j], &mut w);
        orthogonalize(&mut w, deflate);
        orthogonalize(&mut w, &basis);
        alphas.push(alpha);
        let beta = dot(&w, &w).sqrt();
        let m = alphas.len();

        let scale = alphas.iter().chain(&betas).fold(1.0f64, |a, b| a.max(b.abs()));
        let exhausted = beta <= 1e-13 * scale || m >= max_steps;
        let check = exhausted || m < 40 || m % 4 == 0;

        if check && m >= wanted {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c {
                    betas[r]
                } else if c + 1 == r {
                    betas[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let estimates: Vec<f64> = order[..wanted]
                .iter()
                .map(|&i| (beta * eig.eigenvectors[(m - 1, i)]).abs())
                .collect();
            let tolerance = |idx: usize, value: f64| {
                let tol = if idx == 0 { opts.tol } else { opts.tol.max(1e-8) };
                tol * value.abs().max(1.0)
            };
            let converged_estimate = order[..wanted]
                .iter()
                .enumerate()
                .all(|(n, &i)| estimates[n] <= tolerance(n, eig.eigenvalues[i]));

            if converged_estimate || exhausted {
                let mut values = Vec::with_capacity(wanted);
                let mut vectors = Vec::with_capacity(wanted);
                let mut residuals = Vec::with_capacity(wanted);
                let mut ok = true;
                for (n, &i) in order[..wanted].iter().enumerate() {
                    let theta = eig.eigenvalues[i];
                    let mut x = vec![0.0; dim];
                    for (k, q) in basis.iter().enumerate().take(m) {
                        axpy(eig.eigenvectors[(k, i)], q, &mut x);
                    }
                    let xn = dot(&x, &x).sqrt();
                    x.iter_mut().for_each(|v| *v /= xn);
                    let mut hx = vec![0.0; dim];
                    op(&x, &mut hx);
                    axpy(-theta, &x, &mut hx);
                    let r = dot(&hx, &hx).sqrt();
                    if n == 0 {
                        best_residual = best_residual.min(r);
                    }
                    ok &= r <= tolerance(n, theta);
                    values.push(theta);
                    vectors.push(x);
                    residuals.push(r);
                }
                if ok {
                    return Ok(LanczosRun {
                        values,
                        vectors,
                        residuals,
                        iterations: m,
                    });
                }
                if exhausted {
                    return Err(Error::NotConverged {
                        iterations: m,
                        residual: best_residual,
                    });
                }
            }
        }
        if exhausted {
            return Err(Error::NotConverged {
                iterations: m,
                residual: best_residual,
            });
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
}
