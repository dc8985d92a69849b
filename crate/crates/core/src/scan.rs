//! Field sweeps and the two feature detectors: the factorizing field (zero
//! of the one-tangle) and the critical field (narrow dip of the
//! entanglement ratio).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{build_factorized_state, manifold_overlap};
use crate::eigensolver::{lanczos_ground, GroundStateResult, SolverOptions};
use crate::entanglement::{
    least_entangled_combination, ClassConcurrence, EntanglementReport, Tau1Variant,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{Frame, ModelParams, StateVector};
use crate::lattice::{pair_classes, Lattice, LatticeKind};
use crate::observables::CorrelatorSet;

/// Default half-width of the window around the factorizing field excluded
/// from dip detection.
pub const DEFAULT_MASK_RADIUS: f64 = 0.04;

/// Conventions recorded alongside every sweep.
pub const CONVENTIONS: &[&str] = &[
    "zeeman term -h sum_i Sz_i",
    "mx_longrange from |<Sx_i Sx_(i+L/2)>|^(1/2); same-leg class on the ladder",
    "xi_x from a pure exponential fit over r in [2, L/2-1]",
    "concurrence from translation-averaged correlators; lower bound where C2 > C1",
    "degenerate parity sectors: least-entangled state of the ground manifold",
    "critical dip: grid minimum of R refined by a parabola through its neighbours",
];

/// Ground state and every derived estimator at one field value.
#[derive(Debug, Clone)]
pub struct PointAnalysis {
    pub ground: GroundStateResult,
    /// State used for observables: the ground state, or the least-entangled
    /// member of the ground manifold when the parity sectors are degenerate.
    pub state: StateVector,
    pub correlators: CorrelatorSet,
    pub report: EntanglementReport,
}

pub fn analyze_point(
    params: &ModelParams,
    lattice: &Lattice,
    opts: &SolverOptions,
    variant: Tau1Variant,
) -> Result<PointAnalysis> {
    let ground = lanczos_ground(params, lattice, opts)?;
    let state = if ground.degenerate {
        least_entangled_combination(&ground.vector, &ground.partner.vector)?.state
    } else {
        ground.vector.clone()
    };
    let correlators = CorrelatorSet::compute(&state, lattice, params.frame)?;
    let report = EntanglementReport::from_correlators(&correlators, variant)?;
    Ok(PointAnalysis {
        ground,
        state,
        correlators,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub energy: f64,
    pub gap: f64,
    pub mz: f64,
    pub mx_longrange: f64,
    pub tau1_sym: f64,
    pub tau1_broken: f64,
    pub concurrences: Vec<ClassConcurrence>,
    pub tau2: f64,
    pub ratio: Option<f64>,
    pub xi: Option<f64>,
    pub ckw_ok: bool,
    pub degenerate: bool,
    /// Set when the point failed; numeric fields are then NaN.
    pub error: Option<String>,
}

impl SweepRow {
    fn from_analysis(h: f64, point: &PointAnalysis) -> Self {
        let r = &point.report;
        SweepRow {
            h,
            energy: point.ground.energy,
            gap: point.ground.gap,
            mz: point.correlators.mz,
            mx_longrange: point.correlators.mx_longrange,
            tau1_sym: r.tau1_sym,
            tau1_broken: r.tau1_broken,
            concurrences: r.concurrences.clone(),
            tau2: r.tau2,
            ratio: r.ratio,
            xi: point.correlators.xi_x,
            ckw_ok: r.ckw_ok,
            degenerate: point.ground.degenerate,
            error: None,
        }
    }

    fn failed(h: f64, err: &Error) -> Self {
        SweepRow {
            h,
            energy: f64::NAN,
            gap: f64::NAN,
            mz: f64::NAN,
            mx_longrange: f64::NAN,
            tau1_sym: f64::NAN,
            tau1_broken: f64::NAN,
            concurrences: Vec::new(),
            tau2: f64::NAN,
            ratio: None,
            xi: None,
            ckw_ok: false,
            degenerate: false,
            error: Some(err.to_string()),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    /// Concurrence at chain distance `r` (or the same-leg class on the ladder).
    pub fn concurrence_at(&self, r: usize) -> Option<&ClassConcurrence> {
        self.concurrences.iter().find(|c| {
            c.label.distance() == r
                && !matches!(c.label, crate::lattice::PairLabel::Ladder { cross: true, .. })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub lattice: LatticeKind,
    pub length: usize,
    pub delta_y: f64,
    pub delta_z: f64,
    pub frame: Frame,
    pub solver: SolverOptions,
    pub tau1_variant: Tau1Variant,
    /// Column tags of the pair classes, in row order.
    pub pair_tags: Vec<String>,
    pub conventions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub meta: SweepMeta,
    pub rows: Vec<SweepRow>,
}

/// Header of the CSV row table.
pub fn csv_header(pair_tags: &[String]) -> String {
    let mut out = String::from("h,energy,gap,mz,mx_lr,tau1_sym,tau1_broken,tau2,ratio,ckw,xi,");
    let cols: Vec<String> = pair_tags
        .iter()
        .map(|t| format!("C1_{t},C2_{t},C_{t}"))
        .collect();
    out.push_str(&cols.join(","));
    out
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Sweep {
    /// Rows as CSV: 17 significant digits, empty fields for absent values,
    /// one line per row in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = csv_header(&self.meta.pair_tags);
        out.push('\n');
        for row in &self.rows {
            let mut fields = vec![num(row.h)];
            if row.is_valid() {
                fields.extend(
                    [row.energy, row.gap, row.mz, row.mx_longrange, row.tau1_sym, row.tau1_broken, row.tau2]
                        .map(num),
                );
                fields.push(opt(row.ratio));
                fields.push(row.ckw_ok.to_string());
                fields.push(opt(row.xi));
                for c in &row.concurrences {
                    fields.extend([c.triple.c1, c.triple.c2, c.triple.c].map(num));
                }
            } else {
                fields.extend(std::iter::repeat_n(String::new(), 10 + 3 * self.meta.pair_tags.len()));
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|h| !h.is_finite() || *h < 0.0) {
        return Err(Error::InvalidGrid("fields must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// One row per field value. Rows are independent and computed in parallel;
/// a failing point is recorded in its row rather than aborting the sweep.
pub fn field_sweep(
    base: &ModelParams,
    lattice: &Lattice,
    grid: &[f64],
    opts: &SolverOptions,
    variant: Tau1Variant,
) -> Result<Sweep> {
    validate_grid(grid)?;
    base.validate()?;
    opts.validate()?;
    let rows = grid
        .par_iter()
        .map(|&h| {
            let params = base.with_field(h);
            match analyze_point(&params, lattice, opts, variant) {
                Ok(point) => SweepRow::from_analysis(h, &point),
                Err(err) => SweepRow::failed(h, &err),
            }
        })
        .collect();
    Ok(Sweep {
        meta: SweepMeta {
            lattice: lattice.kind(),
            length: lattice.length(),
            delta_y: base.delta_y,
            delta_z: base.delta_z,
            frame: base.frame,
            solver: *opts,
            tau1_variant: variant,
            pair_tags: pair_classes(lattice).iter().map(|c| c.label.tag()).collect(),
            conventions: CONVENTIONS.iter().map(|s| s.to_string()).collect(),
        },
        rows,
    })
}

/// Minimizes `f` on `[a, b]` by golden-section search until the bracket is
/// narrower than `2 * tol`.
pub fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > 2.0 * tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// One-tangle of the least-entangled state spanned by the two parity-sector
/// ground states. Vanishes exactly when a product state is among them.
pub fn manifold_tangle(
    params: &ModelParams,
    lattice: &Lattice,
    opts: &SolverOptions,
) -> Result<(f64, GroundStateResult)> {
    let ground = lanczos_ground(params, lattice, opts)?;
    let min = least_entangled_combination(&ground.vector, &ground.partner.vector)?;
    Ok((min.tau1, ground))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub h_f_estimate: f64,
    pub tau1_at_min: f64,
    /// Projection of the analytic product state onto the ground manifold
    /// (XYX chain only).
    pub overlap_with_ansatz: Option<f64>,
    pub certified: bool,
    pub reason: Option<String>,
}

/// Number of coarse grid points used to seed the golden-section search.
const COARSE_POINTS: usize = 17;

/// Locates the factorizing field inside `bracket` by minimizing the
/// ground-manifold one-tangle: a coarse scan picks the basin, golden-section
/// search refines it to `1e-6` in `h`.
pub fn locate_factorizing_field(
    params: &ModelParams,
    lattice: &Lattice,
    bracket: (f64, f64),
    opts: &SolverOptions,
) -> Result<FactorizationReport> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidGrid(format!("invalid bracket [{lo}, {hi}]")));
    }
    let objective = |h: f64| manifold_tangle(&params.with_field(h), lattice, opts).map(|r| r.0);
    let coarse: Vec<f64> = (0..COARSE_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (COARSE_POINTS - 1) as f64)
        .collect();
    let values = coarse
        .par_iter()
        .map(|&h| objective(h))
        .collect::<Result<Vec<f64>>>()?;
    let best = argmin(&values);
    if best == 0 || best == COARSE_POINTS - 1 {
        return Err(Error::Detector(format!(
            "one-tangle has no interior minimum in [{lo}, {hi}]"
        )));
    }
    let (h_min, _) = golden_section(objective, coarse[best - 1], coarse[best + 1], 1e-6)?;
    let (tau1, ground) = manifold_tangle(&params.with_field(h_min), lattice, opts)?;

    let overlap = if lattice.kind() == LatticeKind::Chain && params.delta_z == 1.0 {
        let ansatz = build_factorized_state(params.delta_y, lattice)?.in_frame(lattice, params.frame);
        Some(manifold_overlap(
            &ansatz.vector,
            &[&ground.vector, &ground.partner.vector],
        )?)
    } else {
        None
    };
    let (tau_limit, overlap_ok) = match overlap {
        Some(o) => (1e-9, o >= 1.0 - 1e-9),
        None if lattice.kind() == LatticeKind::Ladder => (1e-6, true),
        None => (1e-9, true),
    };
    let mut reasons = Vec::new();
    if tau1 > tau_limit {
        reasons.push(format!("one-tangle {tau1:e} exceeds {tau_limit:e}"));
    }
    if !overlap_ok {
        reasons.push(format!(
            "overlap with product state {:.12} below 1 - 1e-9",
            overlap.unwrap_or(0.0)
        ));
    }
    Ok(FactorizationReport {
        h_f_estimate: h_min,
        tau1_at_min: tau1,
        overlap_with_ansatz: overlap,
        certified: reasons.is_empty(),
        reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
    })
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDip {
    pub h_c_estimate: f64,
    pub r_min: f64,
    /// Field of steepest magnetization rise.
    pub magnetization_inflection: Option<f64>,
    /// Set when the ratio minimum sits on the edge of the search window.
    pub inconclusive: bool,
}

/// Vertex of the parabola through three points, with its value.
fn parabola_vertex(p: [(f64, f64); 3]) -> Option<(f64, f64)> {
    let [(x0, y0), (x1, y1), (x2, y2)] = p;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature.abs() < 1e-300 {
        return None;
    }
    // y = y1 + d (x - x1) + curvature (x - x1)(x - x0) ... in Newton form
    let x = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    let y = y0 + d01 * (x - x0) + curvature * (x - x0) * (x - x1);
    Some((x, y))
}

/// Locates the narrow dip of `R = tau2 / tau1` above the factorizing field.
pub fn locate_critical_dip(rows: &[SweepRow], h_f: f64, mask_radius: f64) -> Result<CriticalDip> {
    let valid: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.is_valid() && r.ratio.is_some() && r.h > h_f + mask_radius)
        .collect();
    if valid.len() < 7 {
        return Err(Error::Detector(format!(
            "need at least 7 usable rows above h_f + mask, found {}",
            valid.len()
        )));
    }
    let ratios: Vec<f64> = valid.iter().map(|r| r.ratio.unwrap()).collect();
    let i = argmin(&ratios);
    let inflection = magnetization_inflection(rows);
    if i == 0 || i == valid.len() - 1 {
        return Ok(CriticalDip {
            h_c_estimate: valid[i].h,
            r_min: ratios[i],
            magnetization_inflection: inflection,
            inconclusive: true,
        });
    }
    let pts = [
        (valid[i - 1].h, ratios[i - 1]),
        (valid[i].h, ratios[i]),
        (valid[i + 1].h, ratios[i + 1]),
    ];
    let (h_c, r_min) = parabola_vertex(pts)
        .filter(|&(x, _)| x >= pts[0].0 && x <= pts[2].0)
        .unwrap_or((valid[i].h, ratios[i]));
    Ok(CriticalDip {
        h_c_estimate: h_c,
        r_min,
        magnetization_inflection: inflection,
        inconclusive: false,
    })
}

/// Field where `dM^z/dh` peaks, from finite differences between rows.
pub fn magnetization_inflection(rows: &[SweepRow]) -> Option<f64> {
    let valid: Vec<&SweepRow> = rows.iter().filter(|r| r.is_valid()).collect();
    if valid.len() < 3 {
        return None;
    }
    let slopes: Vec<(f64, f64)> = valid
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0].h + w[1].h);
            (mid, (w[1].mz - w[0].mz) / (w[1].h - w[0].h))
        })
        .collect();
    let k = slopes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(k, _)| k)?;
    if k == 0 || k == slopes.len() - 1 {
        return Some(slopes[k].0);
    }
    let neg = |p: (f64, f64)| (p.0, -p.1);
    let pts = [neg(slopes[k - 1]), neg(slopes[k]), neg(slopes[k + 1])];
    Some(
        parabola_vertex(pts)
            .map(|v| v.0)
            .filter(|&x| x >= pts[0].0 && x <= pts[2].0)
            .unwrap_or(slopes[k].0),
    )
}
