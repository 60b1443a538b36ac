//! Crossing-form Maslov index for pairs of Lagrangian paths, the
//! Conley–Zehnder and Lagrangian Maslov indices of symplectic paths, and
//! the path-based Hörmander index `μ_CZ − μ_L`.
//!
//! Crossings are located by watching the smallest singular value of the
//! pairing `F₂ᵀ Ω F₁` between orthonormal frames (it is the sine of the
//! smallest principal angle between the two Lagrangians). Samples are
//! refined until neighbouring frames are close, local minima are polished by
//! golden-section search, and the crossing form is a central difference of
//! `F(t)ᵀ Ω F(t+s) (F(t)ᵀ F(t+s))⁻¹`, the form `d/ds Ω(v, w(s))` taken with
//! the complement `Λ(t)^⊥`. Endpoint crossings carry half weight.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::darwin::default_det_threshold;
use crate::error::{Error, Result};
use crate::half_integer::HalfInteger;
use crate::hormander::{diagonal_frame, horizontal_frame, product_form, IndexResult, Method};
use crate::linalg::{
    block_diag, check_square, inertia, inf_norm, max_abs, orthonormal_frame, symplectic_residual,
    singular_values, Inertia, Matrix,
};
use crate::paths::iterate_path_to;

/// A continuous family of Lagrangian subspaces.
///
/// Frames must be defined (and smooth) on a neighbourhood of `[0, 1]`:
/// crossing forms at the endpoints use central differences.
pub trait LagrangianPath: Send + Sync {
    fn ambient_dim(&self) -> usize;
    /// Full-rank `2m × m` frame of `Λ(t)`.
    fn frame(&self, t: f64) -> Matrix;
    fn is_constant(&self) -> bool {
        false
    }
}

/// A Lagrangian subspace, stored with an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    pub dim: usize,
    pub frame: Matrix,
}

impl LagrangianFrame {
    /// Checks full column rank and `‖FᵀΩF‖∞ ≤ tol` on the orthonormalized frame.
    pub fn new(frame: &Matrix, omega: &Matrix, tol: f64) -> Result<Self> {
        let (rows, cols) = frame.shape();
        if rows != 2 * cols || omega.shape() != (rows, rows) {
            return Err(Error::DimensionMismatch(format!(
                "frame is {rows}x{cols}, form is {}x{}",
                omega.nrows(),
                omega.ncols()
            )));
        }
        crate::linalg::check_finite(frame)?;
        let sv = singular_values(frame);
        if !(sv.min() > tol * sv.max()) {
            return Err(Error::DimensionMismatch("frame is rank deficient".into()));
        }
        let q = orthonormal_frame(frame);
        let isotropy = inf_norm(&(q.transpose() * omega * &q));
        if isotropy > tol {
            return Err(Error::InvalidBlocks(format!(
                "subspace is not Lagrangian (isotropy residual {isotropy:e})"
            )));
        }
        Ok(LagrangianFrame { dim: rows, frame: q })
    }

    /// No validation; the caller guarantees a Lagrangian frame.
    pub fn new_unchecked(frame: &Matrix) -> Self {
        LagrangianFrame { dim: frame.nrows(), frame: orthonormal_frame(frame) }
    }

    /// `L × L` inside `(V × V, (−ω) × ω)`.
    pub fn product_with_self(&self) -> LagrangianFrame {
        LagrangianFrame::new_unchecked(&block_diag(&self.frame, &self.frame))
    }
}

impl LagrangianPath for LagrangianFrame {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn frame(&self, _t: f64) -> Matrix {
        self.frame.clone()
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// A Lagrangian path given by a frame-valued closure.
pub struct FnLagrangianPath<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> Matrix + Send + Sync> FnLagrangianPath<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnLagrangianPath { dim, f }
    }
}

impl<F: Fn(f64) -> Matrix + Send + Sync> LagrangianPath for FnLagrangianPath<F> {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn frame(&self, t: f64) -> Matrix {
        (self.f)(t)
    }
}

/// `t ↦ Λ(1 − t)`.
pub struct Reversed<'a>(pub &'a dyn LagrangianPath);

impl LagrangianPath for Reversed<'_> {
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }
    fn frame(&self, t: f64) -> Matrix {
        self.0.frame(1.0 - t)
    }
    fn is_constant(&self) -> bool {
        self.0.is_constant()
    }
}

/// A path of symplectic matrices starting at the identity.
#[derive(Clone)]
pub struct SymplecticPath {
    dim: usize,
    evaluator: Arc<dyn Fn(f64) -> Matrix + Send + Sync>,
    pub sample_count: usize,
}

impl std::fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("dim", &self.dim)
            .field("sample_count", &self.sample_count)
            .finish()
    }
}

impl SymplecticPath {
    /// Checks `Ψ(0) = I` and symplecticity of `Ψ(0)`, `Ψ(½)`, `Ψ(1)`.
    pub fn new<F>(dim: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(f64) -> Matrix + Send + Sync + 'static,
    {
        if dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        let path = SymplecticPath { dim, evaluator: Arc::new(evaluator), sample_count: DEFAULT_SAMPLES };
        let start = path.eval(0.0);
        if start.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "path evaluates to {}x{}, expected {dim}x{dim}",
                start.nrows(),
                start.ncols()
            )));
        }
        let gap = max_abs(&(start - Matrix::identity(dim, dim)));
        if gap > 1e-12 {
            return Err(Error::DegenerateEndpoint(format!("path does not start at the identity ({gap:e})")));
        }
        for t in [0.5, 1.0] {
            let m = path.eval(t);
            let residual = symplectic_residual(&m)?;
            let tol = 1e-8 * inf_norm(&m).max(1.0).powi(2);
            if residual > tol {
                return Err(Error::NotSymplectic { residual, tol });
            }
        }
        Ok(path)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64) -> Matrix {
        (self.evaluator)(t)
    }

    pub fn end(&self) -> Matrix {
        self.eval(1.0)
    }

    /// First `self` on `[0, ½]`, then `other · self(1)` on `[½, 1]`.
    pub fn catenate(&self, other: &SymplecticPath) -> Result<SymplecticPath> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch("paths act on different spaces".into()));
        }
        let first = self.clone();
        let second = other.clone();
        let end = self.end();
        SymplecticPath::new(self.dim, move |t| {
            if t <= 0.5 {
                first.eval(2.0 * t)
            } else {
                second.eval(2.0 * t - 1.0) * &end
            }
        })
    }

    /// `t ↦ Ψ(φ(t))` for a reparametrization with `φ(0) = 0`.
    pub fn reparametrize<F>(&self, phi: F) -> Result<SymplecticPath>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.clone();
        SymplecticPath::new(self.dim, move |t| inner.eval(phi(t)))
    }
}

/// The graph `{(x, Ψ(t)x)}` of a symplectic path, a Lagrangian path in
/// `(V × V, (−ω) × ω)`.
pub struct GraphPath<'a>(pub &'a SymplecticPath);

impl LagrangianPath for GraphPath<'_> {
    fn ambient_dim(&self) -> usize {
        2 * self.0.dim()
    }
    fn frame(&self, t: f64) -> Matrix {
        graph_matrix(&self.0.eval(t))
    }
}

fn graph_matrix(psi: &Matrix) -> Matrix {
    let dim = psi.nrows();
    let mut f = Matrix::zeros(2 * dim, dim);
    f.view_mut((0, 0), (dim, dim)).fill_with_identity();
    f.view_mut((dim, 0), (dim, dim)).copy_from(psi);
    f
}

/// Frame `[I; Ψ]` of the graph of a symplectic matrix.
pub fn graph_frame(psi: &Matrix) -> Result<LagrangianFrame> {
    let dim = check_square(psi)?;
    let residual = symplectic_residual(psi)?;
    let tol = 1e-8 * inf_norm(psi).max(1.0).powi(2);
    if residual > tol {
        return Err(Error::NotSymplectic { residual, tol });
    }
    let _ = dim;
    Ok(LagrangianFrame::new_unchecked(&graph_matrix(psi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub t: f64,
    pub intersection_dim: usize,
    pub form_inertia: Inertia,
    pub contribution: HalfInteger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaslovResult {
    pub index: HalfInteger,
    pub crossings: Vec<CrossingRecord>,
}

pub const DEFAULT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaslovOptions {
    /// Initial uniform grid size.
    pub samples: usize,
    /// Largest subspace distance allowed between neighbouring samples.
    pub max_frame_step: f64,
    /// Width to which crossings are located.
    pub locate_tol: f64,
    /// Crossings closer than this are rejected as non-generic.
    pub min_separation: f64,
    /// Central-difference step for the crossing form.
    pub fd_step: f64,
    /// Relative agreement required between steps `h` and `h/2`.
    pub richardson_rtol: f64,
    /// Endpoint intersection threshold on the pairing singular values.
    pub endpoint_tol: f64,
    /// Relative zero threshold for crossing-form signatures.
    pub form_zero_rel: f64,
}

impl Default for MaslovOptions {
    fn default() -> Self {
        MaslovOptions {
            samples: DEFAULT_SAMPLES,
            max_frame_step: 0.1,
            locate_tol: 1e-10,
            min_separation: 1e-8,
            fd_step: 1e-5,
            richardson_rtol: 1e-4,
            endpoint_tol: 1e-9,
            form_zero_rel: 1e-6,
        }
    }
}

struct Sample {
    t: f64,
    f1: Matrix,
    f2: Matrix,
    sigma: f64,
    det: f64,
}

struct Engine<'a> {
    p1: &'a dyn LagrangianPath,
    p2: &'a dyn LagrangianPath,
    omega: &'a Matrix,
    opts: MaslovOptions,
    const_f2: Option<Matrix>,
}

fn frame_distance(f: &Matrix, g: &Matrix) -> f64 {
    (g - f * (f.transpose() * g)).norm()
}

impl<'a> Engine<'a> {
    fn f2(&self, t: f64) -> Matrix {
        match &self.const_f2 {
            Some(f) => f.clone(),
            None => orthonormal_frame(&self.p2.frame(t)),
        }
    }

    fn sample(&self, t: f64) -> Sample {
        let f1 = orthonormal_frame(&self.p1.frame(t));
        let f2 = self.f2(t);
        let pairing = f2.transpose() * self.omega * &f1;
        let sigma = singular_values(&pairing).min();
        let det = pairing.determinant();
        Sample { t, f1, f2, sigma, det }
    }

    fn sigma(&self, t: f64) -> f64 {
        self.sample(t).sigma
    }

    fn cell_distance(&self, a: &Sample, b: &Sample) -> f64 {
        let d1 = frame_distance(&a.f1, &b.f1);
        if self.const_f2.is_some() {
            d1
        } else {
            d1.max(frame_distance(&a.f2, &b.f2))
        }
    }

    fn refine(&self, a: Sample, b: Sample, out: &mut Vec<Sample>, depth: usize) {
        if depth < 60 && b.t - a.t > 1e-12 && self.cell_distance(&a, &b) > self.opts.max_frame_step {
            let mid = self.sample(0.5 * (a.t + b.t));
            let mid_t = mid.t;
            // Split without cloning frames: the midpoint is recomputed for the right half.
            self.refine(a, mid, out, depth + 1);
            let mid_again = out.pop().expect("left half pushes its right endpoint");
            debug_assert_eq!(mid_again.t, mid_t);
            self.refine(mid_again, b, out, depth + 1);
        } else {
            if out.last().map(|s| s.t) != Some(a.t) {
                out.push(a);
            }
            out.push(b);
        }
    }

    fn samples(&self, t0: f64, t1: f64) -> Vec<Sample> {
        let n = self.opts.samples.max(2);
        let width = t1 - t0;
        let mut ts: Vec<f64> = (0..=n).map(|i| t0 + width * i as f64 / n as f64).collect();
        // Endpoint crossings with a nearly degenerate form can hide another
        // crossing just inside the interval; sample geometrically towards them.
        let first = 1.0 / n as f64;
        for (end, dir) in [(t0, 1.0), (t1, -1.0)] {
            if self.sigma(end) <= self.opts.endpoint_tol {
                let mut step = 0.5 * first * width;
                while step > 10.0 * self.opts.min_separation * width {
                    ts.push(end + dir * step);
                    step *= 0.5;
                }
            }
        }
        ts.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
        let grid: Vec<Sample> = ts.into_iter().map(|t| self.sample(t)).collect();
        let mut out: Vec<Sample> = Vec::with_capacity(2 * n);
        let mut iter = grid.into_iter();
        let mut prev = iter.next().expect("nonempty grid");
        for next in iter {
            let mut cell = Vec::new();
            self.refine(prev, next, &mut cell, 0);
            prev = cell.pop().expect("cell ends with its right endpoint");
            out.extend(cell);
        }
        out.push(prev);
        out
    }

    /// Golden-section minimization of the pairing singular value.
    fn locate(&self, mut lo: f64, mut hi: f64) -> f64 {
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut s1 = self.sigma(x1);
        let mut s2 = self.sigma(x2);
        while hi - lo > self.opts.locate_tol {
            if s1 <= s2 {
                hi = x2;
                x2 = x1;
                s2 = s1;
                x1 = hi - ratio * (hi - lo);
                s1 = self.sigma(x1);
            } else {
                lo = x1;
                x1 = x2;
                s1 = s2;
                x2 = lo + ratio * (hi - lo);
                s2 = self.sigma(x2);
            }
        }
        if s1 <= s2 {
            x1
        } else {
            x2
        }
    }

    /// `d/ds F(t)ᵀ Ω G(t+s) (F(t)ᵀ G(t+s))⁻¹` by central differences.
    fn path_form(&self, path: &dyn LagrangianPath, f: &Matrix, t: f64, h: f64) -> Result<Matrix> {
        if path.is_constant() {
            return Ok(Matrix::zeros(f.ncols(), f.ncols()));
        }
        let transported = |s: f64| -> Result<Matrix> {
            let g = path.frame(t + s);
            let overlap = f.transpose() * &g;
            let inv = overlap.try_inverse().ok_or_else(|| Error::UnresolvedCrossing {
                t,
                reason: "frame moved too far within the difference step".into(),
            })?;
            Ok(f.transpose() * self.omega * g * inv)
        };
        let d = (transported(h)? - transported(-h)?) / (2.0 * h);
        Ok((&d + d.transpose()) * 0.5)
    }

    fn crossing_form(&self, sample: &Sample, kernel: &Matrix, h: f64) -> Result<Matrix> {
        let q1 = self.path_form(self.p1, &sample.f1, sample.t, h)?;
        let mut gamma = kernel.transpose() * q1 * kernel;
        if !self.p2.is_constant() {
            let coords = sample.f2.transpose() * (&sample.f1 * kernel);
            let q2 = self.path_form(self.p2, &sample.f2, sample.t, h)?;
            gamma -= coords.transpose() * q2 * coords;
        }
        Ok(gamma)
    }

    /// Crossing record at `t`, with `weight_halves` = 2 (interior) or 1 (endpoint).
    fn crossing_at(&self, t: f64, dim_tol: f64, weight_halves: i64) -> Result<CrossingRecord> {
        let sample = self.sample(t);
        let pairing = sample.f2.transpose() * self.omega * &sample.f1;
        let kernel = crate::linalg::null_space(&pairing, dim_tol);
        let dim = kernel.ncols();
        if dim == 0 {
            return Err(Error::UnresolvedCrossing { t, reason: "no intersection at located crossing".into() });
        }
        let mut h = self.opts.fd_step;
        let mut accepted = None;
        for _ in 0..5 {
            let coarse = self.crossing_form(&sample, &kernel, h)?;
            let fine = self.crossing_form(&sample, &kernel, 0.5 * h)?;
            let scale = inf_norm(&fine);
            if scale > 0.0 && inf_norm(&(&coarse - &fine)) <= self.opts.richardson_rtol * scale {
                accepted = Some(fine);
                break;
            }
            h *= 0.25;
        }
        let gamma = accepted.ok_or_else(|| Error::UnresolvedCrossing {
            t,
            reason: "crossing form did not stabilize under step refinement".into(),
        })?;
        let form_inertia = inertia(&gamma, self.opts.form_zero_rel * inf_norm(&gamma))?;
        if form_inertia.n_zero > 0 {
            return Err(Error::UnresolvedCrossing { t, reason: "degenerate crossing form".into() });
        }
        Ok(CrossingRecord {
            t,
            intersection_dim: dim,
            form_inertia,
            contribution: HalfInteger::from_doubled(weight_halves * form_inertia.signature()),
        })
    }

    fn run(&self, t0: f64, t1: f64) -> Result<MaslovResult> {
        let samples = self.samples(t0, t1);
        let last = samples.len() - 1;
        let mut crossings = Vec::new();

        let start_crossing = samples[0].sigma <= self.opts.endpoint_tol;
        let end_crossing = samples[last].sigma <= self.opts.endpoint_tol;
        if start_crossing {
            crossings.push(self.crossing_at(t0, 1e3 * self.opts.endpoint_tol, 1)?);
        }

        let dist: Vec<f64> = samples.windows(2).map(|w| self.cell_distance(&w[0], &w[1])).collect();
        let mut interior = Vec::new();
        for i in 0..=last {
            let here = samples[i].sigma;
            let left = if i > 0 { Some(samples[i - 1].sigma) } else { None };
            let right = if i < last { Some(samples[i + 1].sigma) } else { None };
            if (i == 0 && start_crossing) || (i == last && end_crossing) {
                continue;
            }
            let is_min = left.is_none_or(|l| here <= l)
                && right.is_none_or(|r| here <= r)
                && (left.is_some_and(|l| here < l) || right.is_some_and(|r| here < r));
            if !is_min {
                continue;
            }
            let reach = if i > 0 { dist[i - 1] } else { 0.0 } + if i < last { dist[i] } else { 0.0 };
            if here > 2.0 * reach {
                continue;
            }
            let lo = samples[i.saturating_sub(1)].t;
            let hi = samples[(i + 1).min(last)].t;
            let t_star = self.locate(lo, hi);
            let s = self.sample(t_star);
            if (t_star - t0).abs() < self.opts.min_separation || (t1 - t_star).abs() < self.opts.min_separation {
                if s.sigma <= 1e-6 {
                    return Err(Error::UnresolvedCrossing {
                        t: t_star,
                        reason: "interior crossing too close to an endpoint".into(),
                    });
                }
                continue;
            }
            let speed = frame_distance(&samples[i.saturating_sub(1)].f1, &samples[(i + 1).min(last)].f1)
                / (hi - lo).max(f64::MIN_POSITIVE);
            let cross_tol = (1e-9f64).max(10.0 * speed * self.opts.locate_tol);
            if s.sigma <= cross_tol {
                interior.push((t_star, cross_tol));
            }
        }
        interior.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite parameters"));
        interior.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-9);
        if let Some(w) = interior.windows(2).find(|w| w[1].0 - w[0].0 < self.opts.min_separation) {
            return Err(Error::UnresolvedCrossing { t: w[0].0, reason: "crossings closer than the separation limit".into() });
        }
        let mut interior_records = Vec::with_capacity(interior.len());
        for &(t, cross_tol) in &interior {
            interior_records.push(self.crossing_at(t, (1e3 * cross_tol).max(1e-6), 2)?);
        }

        self.reconcile_parity(&samples, &mut interior_records)?;
        crossings.extend(interior_records);

        if end_crossing {
            crossings.push(self.crossing_at(t1, 1e3 * self.opts.endpoint_tol, 1)?);
        }
        let index = crossings.iter().map(|c| c.contribution).sum();
        Ok(MaslovResult { index, crossings })
    }

    /// `det(F₂ᵀΩF₁)` changes sign across exactly the odd-dimensional
    /// crossings. Sign changes with no located crossing (a crossing hidden
    /// next to another one, or next to an endpoint) are bisected and added;
    /// located odd crossings without a sign change are an error.
    fn reconcile_parity(&self, samples: &[Sample], crossings: &mut Vec<CrossingRecord>) -> Result<()> {
        let safe: Vec<&Sample> = samples.iter().filter(|s| s.sigma > PARITY_SIGMA).collect();
        let mut found = Vec::new();
        for w in safe.windows(2) {
            let odd = crossings
                .iter()
                .filter(|c| c.t > w[0].t && c.t < w[1].t && c.intersection_dim % 2 == 1)
                .count();
            let flipped = (w[0].det < 0.0) != (w[1].det < 0.0);
            match (flipped, odd % 2 == 1) {
                (true, false) if odd == 0 => {
                    let (mut lo, mut hi) = (w[0].t, w[1].t);
                    let negative_lo = w[0].det < 0.0;
                    while hi - lo > self.opts.locate_tol {
                        let mid = 0.5 * (lo + hi);
                        if (self.sample(mid).det < 0.0) == negative_lo {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let t = 0.5 * (lo + hi);
                    let record = self.crossing_at(t, 1e-6, 2)?;
                    if record.intersection_dim % 2 == 0 {
                        return Err(Error::UnresolvedCrossing { t, reason: "sign change at an even-dimensional crossing".into() });
                    }
                    found.push(record);
                }
                (a, b) if a != b => {
                    return Err(Error::UnresolvedCrossing {
                        t: w[0].t,
                        reason: "determinant sign changes disagree with located crossings".into(),
                    });
                }
                _ => {}
            }
        }
        crossings.extend(found);
        crossings.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite parameters"));
        if let Some(w) = crossings.windows(2).find(|w| w[1].t - w[0].t < self.opts.min_separation) {
            return Err(Error::UnresolvedCrossing { t: w[0].t, reason: "crossings closer than the separation limit".into() });
        }
        Ok(())
    }
}

/// Pairing singular value above which the determinant sign is trusted.
const PARITY_SIGMA: f64 = 1e-11;

/// `μ(Λ₁, Λ₂)` over `[0, 1]` in `(ℝ²ᵐ, Ω)`; `omega` must be an orthogonal
/// complex structure (`Ω² = −I`, `ΩᵀΩ = I`).
pub fn maslov_index(
    path1: &dyn LagrangianPath,
    path2: &dyn LagrangianPath,
    omega: &Matrix,
    opts: &MaslovOptions,
) -> Result<MaslovResult> {
    maslov_index_on(path1, path2, omega, 0.0, 1.0, opts)
}

/// `μ(Λ₁, Λ₂)` restricted to `[t0, t1]`.
pub fn maslov_index_on(
    path1: &dyn LagrangianPath,
    path2: &dyn LagrangianPath,
    omega: &Matrix,
    t0: f64,
    t1: f64,
    opts: &MaslovOptions,
) -> Result<MaslovResult> {
    let dim = path1.ambient_dim();
    if path2.ambient_dim() != dim || omega.shape() != (dim, dim) || dim % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "paths live in dimensions {dim} and {}, form is {}x{}",
            path2.ambient_dim(),
            omega.nrows(),
            omega.ncols()
        )));
    }
    if !(t1 > t0) {
        return Err(Error::DimensionMismatch("empty parameter interval".into()));
    }
    let const_f2 = path2.is_constant().then(|| orthonormal_frame(&path2.frame(t0)));
    let engine = Engine { p1: path1, p2: path2, omega, opts: *opts, const_f2 };
    engine.run(t0, t1)
}

/// `μ_CZ(Ψ) = μ(Gr Ψ, Δ)`.
pub fn conley_zehnder(path: &SymplecticPath, tol: f64) -> Result<HalfInteger> {
    conley_zehnder_with(path, tol, &MaslovOptions::default()).map(|r| r.index)
}

pub fn conley_zehnder_with(path: &SymplecticPath, tol: f64, opts: &MaslovOptions) -> Result<MaslovResult> {
    let n = path.dim() / 2;
    let end = path.end();
    let sv = singular_values(&(end - Matrix::identity(2 * n, 2 * n)));
    if !(sv.min() > tol * sv.max().max(1.0)) {
        return Err(Error::DegenerateEndpoint(format!(
            "Psi(1) has eigenvalue 1 (smallest singular value of Psi(1) - I is {:e})",
            sv.min()
        )));
    }
    let diagonal = LagrangianFrame::new_unchecked(&diagonal_frame(n));
    maslov_index(&GraphPath(path), &diagonal, &product_form(n), opts)
}

/// `μ_L(Ψ) = μ(Gr Ψ, L × L)`.
pub fn lagrangian_maslov(path: &SymplecticPath, l: &LagrangianFrame, tol: f64) -> Result<HalfInteger> {
    let _ = tol;
    lagrangian_maslov_with(path, l, &MaslovOptions::default()).map(|r| r.index)
}

pub fn lagrangian_maslov_with(
    path: &SymplecticPath,
    l: &LagrangianFrame,
    opts: &MaslovOptions,
) -> Result<MaslovResult> {
    let n = path.dim() / 2;
    if l.dim != 2 * n {
        return Err(Error::DimensionMismatch(format!("L lives in dimension {}, path in {}", l.dim, 2 * n)));
    }
    maslov_index(&GraphPath(path), &l.product_with_self(), &product_form(n), opts)
}

/// Regeneration attempts per seed before giving up on a non-generic path.
pub const PATH_ATTEMPTS: u64 = 8;

/// Tolerance on `Ψ(1) − I` used when computing `μ_CZ` along generated paths.
pub const ENDPOINT_TOL: f64 = 1e-10;

/// `μ_CZ − μ_L` along one generated path from `I` to `Φ`, retrying with
/// fresh perturbations when the path cannot be built or a crossing cannot be
/// resolved.
pub fn path_difference(phi: &Matrix, seed: u64) -> Result<IndexResult> {
    path_difference_iterate(phi, 1, seed)
}

/// `μ_CZ − μ_L` for `Φᵏ`, along the iterated path of [`iterate_path_to`].
pub fn path_difference_iterate(phi: &Matrix, k: usize, seed: u64) -> Result<IndexResult> {
    let n = check_square(phi)? / 2;
    let l = LagrangianFrame::new_unchecked(&horizontal_frame(n));
    let opts = MaslovOptions::default();
    let mut last_err = None;
    for attempt in 0..PATH_ATTEMPTS {
        let outcome = iterate_path_to(phi, k, mix_seed(seed, attempt)).and_then(|path| {
            let cz = conley_zehnder_with(&path, ENDPOINT_TOL, &opts)?;
            let ml = lagrangian_maslov_with(&path, &l, &opts)?;
            Ok((cz.index, ml.index))
        });
        match outcome {
            Ok((cz, ml)) => {
                return Ok(IndexResult {
                    k,
                    method: Method::PathDifference,
                    s: cz - ml,
                    inertia: None,
                    mu_cz: Some(cz),
                    mu_l: Some(ml),
                });
            }
            Err(e @ (Error::UnresolvedCrossing { .. } | Error::IllConditioned { .. } | Error::NotSymplectic { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// `s(L×L, Δ; Δ, Gr Φ) = μ_CZ(Ψ) − μ_L(Ψ)` for `L = ℝⁿ × {0}`, evaluated on
/// two independently generated paths that must agree.
pub fn hormander_via_paths(phi: &Matrix, seed: u64) -> Result<IndexResult> {
    let dim = check_square(phi)?;
    if dim % 2 != 0 {
        return Err(Error::OddDimension(dim));
    }
    let det = (phi - Matrix::identity(dim, dim)).determinant();
    if !(det.abs() > default_det_threshold(inf_norm(phi), 1)) {
        return Err(Error::NotTransverse { det });
    }
    let first = path_difference(phi, seed)?;
    let second = path_difference(phi, mix_seed(seed, u64::MAX))?;
    if first.s != second.s {
        return Err(Error::PathDependence { first: first.s.doubled, second: second.s.doubled });
    }
    Ok(first)
}

/// SplitMix64 step, used to derive independent seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darwin::{random_return_map, random_symplectic};
    use crate::hormander::{hormander_index_formula, hormander_index_quadratic_form};
    use crate::linalg::standard_j;
    use crate::paths::{path_to, rotation};
    use std::f64::consts::PI;

    fn line(angle: f64) -> Matrix {
        Matrix::from_column_slice(2, 1, &[angle.cos(), angle.sin()])
    }

    fn horizontal() -> LagrangianFrame {
        LagrangianFrame::new(&line(0.0), &standard_j(1), 1e-12).unwrap()
    }

    /// Unwrapped angle of `Ψ(t) e₁`, and the crossing count it implies.
    fn angle_oracle(path: &SymplecticPath) -> HalfInteger {
        let steps = 20_000;
        let mut alpha = 0.0;
        let mut prev = 0.0f64;
        for i in 1..=steps {
            let m = path.eval(i as f64 / steps as f64);
            let raw = m[(1, 0)].atan2(m[(0, 0)]);
            let mut delta = raw - prev;
            while delta > PI {
                delta -= 2.0 * PI;
            }
            while delta < -PI {
                delta += 2.0 * PI;
            }
            alpha += delta;
            prev = raw;
        }
        let ratio = alpha / PI;
        let g = if (ratio - ratio.round()).abs() < 1e-9 {
            HalfInteger::from_integer(ratio.round() as i64)
        } else {
            HalfInteger::from_doubled(2 * ratio.floor() as i64 + 1)
        };
        g
    }

    #[test]
    fn rotating_line_crosses_once() {
        let path = FnLagrangianPath::new(2, |t| line(PI / 4.0 + PI * t));
        let r = maslov_index(&path, &horizontal(), &standard_j(1), &MaslovOptions::default()).unwrap();
        assert_eq!(r.index, HalfInteger::from_integer(1));
        assert_eq!(r.crossings.len(), 1);
        assert!((r.crossings[0].t - 0.75).abs() < 1e-8);
        assert_eq!(r.crossings[0].intersection_dim, 1);
    }

    #[test]
    fn reversal_negates() {
        let path = FnLagrangianPath::new(2, |t| line(0.3 + 2.5 * PI * t * t));
        let opts = MaslovOptions::default();
        let forward = maslov_index(&path, &horizontal(), &standard_j(1), &opts).unwrap();
        let backward = maslov_index(&Reversed(&path), &horizontal(), &standard_j(1), &opts).unwrap();
        assert_eq!(forward.index, HalfInteger::from_integer(2));
        assert_eq!(backward.index, -forward.index);
    }

    #[test]
    fn endpoint_crossing_has_half_weight() {
        let path = FnLagrangianPath::new(2, |t| line(PI * t / 2.0));
        let r = maslov_index(&path, &horizontal(), &standard_j(1), &MaslovOptions::default()).unwrap();
        assert_eq!(r.index, HalfInteger::half_of(1));
    }

    #[test]
    fn swapping_arguments_negates() {
        let moving = FnLagrangianPath::new(2, |t| line(0.2 + 1.7 * PI * t));
        let fixed = horizontal();
        let opts = MaslovOptions::default();
        let a = maslov_index(&moving, &fixed, &standard_j(1), &opts).unwrap();
        let b = maslov_index(&fixed, &moving, &standard_j(1), &opts).unwrap();
        assert_eq!(a.index, -b.index);
    }

    #[test]
    fn both_paths_moving() {
        let p1 = FnLagrangianPath::new(2, |t| line(2.0 * PI * t + 0.1));
        let p2 = FnLagrangianPath::new(2, |t| line(0.5 * PI * t));
        let r = maslov_index(&p1, &p2, &standard_j(1), &MaslovOptions::default()).unwrap();
        // Relative angle runs from 0.1 to 1.5π + 0.1.
        assert_eq!(r.index, HalfInteger::from_integer(1));
    }

    #[test]
    fn rejects_non_lagrangian_frame() {
        let f = Matrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(LagrangianFrame::new(&f, &standard_j(2), 1e-10).is_err());
    }

    #[test]
    fn conley_zehnder_of_rotations() {
        for (theta, expect) in [(0.7, 1), (PI, 1), (5.5, 1), (2.0 * PI + 1.0, 3), (-1.0, -1)] {
            let path = SymplecticPath::new(2, move |t| rotation(1, t * theta)).unwrap();
            assert_eq!(conley_zehnder(&path, 1e-10).unwrap(), HalfInteger::from_integer(expect), "θ = {theta}");
        }
        let full = SymplecticPath::new(2, |t| rotation(1, 2.0 * PI * t)).unwrap();
        assert!(matches!(conley_zehnder(&full, 1e-10), Err(Error::DegenerateEndpoint(_))));
    }

    #[test]
    fn conley_zehnder_is_additive_over_blocks() {
        let path = SymplecticPath::new(4, |t| {
            let r1 = rotation(1, 1.3 * t);
            let r2 = rotation(1, 7.5 * t);
            let mut m = Matrix::zeros(4, 4);
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                m[(2 * i, 2 * j)] = r1[(i, j)];
                m[(2 * i + 1, 2 * j + 1)] = r2[(i, j)];
            }
            m
        })
        .unwrap();
        assert_eq!(conley_zehnder(&path, 1e-10).unwrap(), HalfInteger::from_integer(4));
    }

    #[test]
    fn lagrangian_maslov_matches_angle_oracle() {
        let l = LagrangianFrame::new_unchecked(&horizontal_frame(1));
        for seed in 0..30 {
            let phi = random_symplectic(1, seed, 1.5);
            let path = path_to(&phi, seed).unwrap();
            let got = lagrangian_maslov(&path, &l, 1e-10).unwrap();
            assert_eq!(got, angle_oracle(&path), "seed {seed}");
        }
    }

    #[test]
    fn index_is_additive_under_splitting() {
        let n = 2;
        let product = LagrangianFrame::new_unchecked(&crate::hormander::horizontal_product_frame(n));
        let opts = MaslovOptions::default();
        for seed in 0..6 {
            let first = path_to(&random_symplectic(n, seed, 1.0), seed).unwrap();
            let second = path_to(&random_symplectic(n, seed + 100, 1.0), seed + 7).unwrap();
            let joined = first.catenate(&second).unwrap();
            let graph = GraphPath(&joined);
            let form = product_form(n);
            let whole = maslov_index(&graph, &product, &form, &opts).unwrap().index;
            let left = maslov_index_on(&graph, &product, &form, 0.0, 0.5, &opts).unwrap().index;
            let right = maslov_index_on(&graph, &product, &form, 0.5, 1.0, &opts).unwrap().index;
            assert_eq!(whole, left + right);
        }
    }

    #[test]
    fn iterated_paths_match_the_formula() {
        let mut checked = 0;
        for n in 1..=3 {
            for seed in 0..8 {
                let blocks = random_return_map(n, 500 + seed, 1.0);
                let report = crate::darwin::nondegeneracy_check(&blocks, 5, None);
                for k in 2..=5 {
                    if !report.is_nondegenerate(k) {
                        continue;
                    }
                    let Ok(formula) = hormander_index_formula(&blocks, k, 1e-8) else { continue };
                    let paths = path_difference_iterate(&blocks.assemble(), k, seed).unwrap();
                    assert_eq!(paths.k, k);
                    assert_eq!(paths.s, formula.s, "n = {n}, seed = {seed}, k = {k}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 60);
    }

    #[test]
    fn path_difference_matches_formula_and_quadratic_form() {
        let mut checked = 0;
        for n in 1..=2 {
            for seed in 0..25 {
                let blocks = random_return_map(n, seed, 1.0);
                let phi = blocks.assemble();
                let Ok(formula) = hormander_index_formula(&blocks, 1, 1e-8) else { continue };
                let paths = hormander_via_paths(&phi, seed).unwrap();
                let qf = hormander_index_quadratic_form(&phi, 1e-8).unwrap();
                assert_eq!(paths.s, formula.s, "n = {n}, seed = {seed}");
                assert_eq!(qf.s, formula.s);
                checked += 1;
            }
        }
        assert!(checked > 40);
    }

    #[test]
    fn rotation_via_paths() {
        for theta in [PI / 7.0, 1.0, 2.0, 4.0] {
            let phi = rotation(1, theta);
            let r = hormander_via_paths(&phi, 3).unwrap();
            let expect = (theta / 2.0).tan().signum() as i64;
            assert_eq!(r.s, HalfInteger::half_of(expect));
        }
    }

    #[test]
    fn three_paths_agree() {
        for seed in 0..10 {
            let phi = random_symplectic(2, 40 + seed, 1.0);
            let s: Vec<_> = (0..3).map(|i| path_difference(&phi, mix_seed(seed, i)).unwrap().s).collect();
            assert!(s.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn identity_is_not_transverse() {
        assert!(matches!(
            hormander_via_paths(&Matrix::identity(2, 2), 0),
            Err(Error::NotTransverse { .. })
        ));
    }
}
