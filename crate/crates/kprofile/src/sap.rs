//! Secant-optimal projections: the minimax optimizer and kappa-profiles.
//!
//! The optimizer seeks an orthonormal n x m basis B maximizing the minimum
//! projected secant norm `min_s ||B^T s||`. Each iteration rotates the
//! subspace toward the out-of-subspace component of the currently
//! worst-preserved secant, with a decaying step; the best basis ever
//! observed is returned, since minimax iterates oscillate.

use crate::error::{Error, Result};
use crate::secants::{dot, min_projected_norm, min_projected_norm_sq, norm, DataMatrix, SecantSet, SCAN_CHUNK_ROWS};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// Embeddings with kappa at or above this are considered good.
pub const DEFAULT_KAPPA_THRESHOLD: f64 = 0.2;

/// Orthonormality defect allowed on basis construction.
const ORTHO_TOL: f64 = 1e-10;

/// Worst secant within this of the subspace terminates the iteration.
const IN_SUBSPACE_TOL: f64 = 1e-12;

/// Iterations between full recomputations of the cached projections.
const RESYNC_EVERY: usize = 64;

/// Cached projections are kept only up to this many f64 entries (~480 MB).
const MAX_CACHE_ENTRIES: u128 = 60_000_000;

/// Ambient dimensions up to this use an explicit n x n secant Gram matrix.
const GRAM_DIM_LIMIT: usize = 512;

/// Orthonormal n x m projection basis, stored column-major.
#[derive(Debug, Clone)]
pub struct ProjectionBasis {
    cols: Vec<f64>,
    n: usize,
    m: usize,
}

impl ProjectionBasis {
    /// Wraps a column-major buffer, verifying `1 <= m <= n` and
    /// orthonormality of the columns (max |B^T B - I| below 1e-10).
    pub fn from_columns(cols: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        if m < 1 || m > n {
            return Err(Error::DimensionMismatch(format!(
                "basis needs 1 <= m <= n, got n={n}, m={m}"
            )));
        }
        if cols.len() != n * m {
            return Err(Error::DimensionMismatch(format!(
                "basis buffer length {} does not match {n}x{m}",
                cols.len()
            )));
        }
        let b = Self { cols, n, m };
        let defect = b.orthonormality_defect();
        if !(defect < ORTHO_TOL) {
            return Err(Error::InvalidInput(format!(
                "basis columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(b)
    }

    fn from_columns_unchecked(cols: Vec<f64>, n: usize, m: usize) -> Self {
        debug_assert!(defect_of(&cols, n, m) < ORTHO_TOL);
        Self { cols, n, m }
    }

    /// First m standard basis vectors of R^n.
    pub fn identity(n: usize, m: usize) -> Result<Self> {
        if m < 1 || m > n {
            return Err(Error::DimensionMismatch(format!(
                "basis needs 1 <= m <= n, got n={n}, m={m}"
            )));
        }
        let mut cols = vec![0.0; n * m];
        for j in 0..m {
            cols[j * n + j] = 1.0;
        }
        Ok(Self { cols, n, m })
    }

    /// Seeded random orthonormal basis (orthonormalized uniform entries).
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m < 1 || m > n {
            return Err(Error::DimensionMismatch(format!(
                "basis needs 1 <= m <= n, got n={n}, m={m}"
            )));
        }
        Ok(Self {
            cols: random_cols(n, m, seed),
            n,
            m,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn subspace_dim(&self) -> usize {
        self.m
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Column-major backing buffer (n*m entries).
    pub fn columns_slice(&self) -> &[f64] {
        &self.cols
    }

    /// Max |B^T B - I| over all entries.
    pub fn orthonormality_defect(&self) -> f64 {
        defect_of(&self.cols, self.n, self.m)
    }

    /// Writes B^T x into `out` (length m).
    pub fn project_point(&self, x: &[f64], out: &mut [f64]) {
        tmat_vec(&self.cols, self.n, self.m, x, out);
    }

    /// Projects every row of `data`, returning row-major N x m coordinates.
    pub fn project_rows(&self, data: &DataMatrix) -> Result<Vec<f64>> {
        if data.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "data dimension {} vs basis ambient dimension {}",
                data.dim(),
                self.n
            )));
        }
        let mut out = vec![0.0; data.n_points() * self.m];
        for (i, chunk) in out.chunks_exact_mut(self.m).enumerate() {
            tmat_vec(&self.cols, self.n, self.m, data.row(i), chunk);
        }
        Ok(out)
    }

    pub(crate) fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.m, &self.cols)
    }
}

/// Initial basis for the optimizer.
#[derive(Debug, Clone)]
pub enum SapInit {
    /// Top-m directions of the secant Gram (PCA of secants, uncentered).
    Pca,
    /// Seeded random orthonormal basis.
    Random(u64),
    /// Start from a given basis (its m must match the requested m).
    Warm(ProjectionBasis),
}

/// Optimizer settings; see `Default` for the tuned values.
#[derive(Debug, Clone)]
pub struct SapConfig {
    pub max_iters: usize,
    pub step_size: f64,
    pub step_decay: f64,
    pub tol: f64,
    pub patience: usize,
    pub init: SapInit,
}

impl Default for SapConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step_size: 0.1,
            step_decay: 0.995,
            tol: 1e-5,
            patience: 100,
            init: SapInit::Pca,
        }
    }
}

impl SapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_size must lie in (0, 1], got {}",
                self.step_size
            )));
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step_decay must lie in (0, 1], got {}",
                self.step_decay
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tol must be a small positive real, got {}",
                self.tol
            )));
        }
        if self.patience < 1 {
            return Err(Error::InvalidConfig("patience must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone)]
pub struct SapResult {
    pub basis: ProjectionBasis,
    /// Minimum projected secant norm of `basis`, clamped to [0, 1].
    pub kappa: f64,
    /// Rotation updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// Best-so-far kappa per iteration (entry 0 is the initial basis);
    /// non-decreasing.
    pub kappa_history: Vec<f64>,
}

/// One row of a kappa-profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub m: usize,
    pub kappa: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Kappa values over a range of target dimensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KappaProfile {
    pub entries: Vec<ProfileEntry>,
    pub label: String,
}

impl KappaProfile {
    /// Smallest m whose kappa reaches `threshold` (inclusive).
    pub fn good_dimension(&self, threshold: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.kappa >= threshold)
            .map(|e| e.m)
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.kappa).collect()
    }
}

/// Whether a kappa value clears the good-embedding threshold (inclusive).
pub fn is_good_embedding(kappa: f64, threshold: f64) -> bool {
    kappa >= threshold
}

/// Maximizes the minimum projected secant norm over orthonormal n x m bases.
///
/// Returns the best basis observed across all iterations together with its
/// freshly evaluated kappa. `converged` is set when the best-so-far value
/// improved by less than `tol` over the last `patience` iterations, or when
/// the worst secant already lies in the subspace.
pub fn sap_optimize(secants: &SecantSet, m: usize, config: &SapConfig) -> Result<SapResult> {
    sap_optimize_with(secants, m, config, None)
}

pub(crate) fn sap_optimize_with(
    secants: &SecantSet,
    m: usize,
    config: &SapConfig,
    gram: Option<&DMatrix<f64>>,
) -> Result<SapResult> {
    config.validate()?;
    let n = secants.dim();
    if m < 1 || m > n {
        return Err(Error::DimensionMismatch(format!(
            "target dimension {m} outside 1..={n}"
        )));
    }
    if m == n {
        // A square orthonormal basis is an isometry on unit secants.
        return Ok(SapResult {
            basis: ProjectionBasis::identity(n, n)?,
            kappa: 1.0,
            iterations: 0,
            converged: true,
            kappa_history: vec![1.0],
        });
    }

    let mut cols: Vec<f64> = match &config.init {
        SapInit::Pca => pca_init(secants, m, gram),
        SapInit::Random(seed) => random_cols(n, m, *seed),
        SapInit::Warm(b) => {
            if b.ambient_dim() != n || b.subspace_dim() != m {
                return Err(Error::DimensionMismatch(format!(
                    "warm-start basis is {}x{}, need {n}x{m}",
                    b.ambient_dim(),
                    b.subspace_dim()
                )));
            }
            b.cols.clone()
        }
    };

    let count = secants.count();
    let use_cache = (count as u128) * (m as u128) <= MAX_CACHE_ENTRIES;
    let mut proj: Vec<f64> = if use_cache { vec![0.0; count * m] } else { Vec::new() };
    let mut norms: Vec<f64> = if use_cache { vec![0.0; count] } else { Vec::new() };

    if use_cache {
        resync_cache(secants, &cols, m, &mut proj, &mut norms);
    }
    let (k_sq, idx) = if use_cache {
        argmin_slice(&norms)
    } else {
        min_projected_norm_sq(secants, &cols, m)
    };
    let mut best_kappa = k_sq.sqrt();
    let mut best_cols = cols.clone();
    let mut history = vec![best_kappa];
    let mut worst_idx = idx;
    let mut converged = false;
    let mut iterations = 0usize;
    let mut step_scale = config.step_size;

    let mut p = vec![0.0; m];
    let mut g = vec![0.0; m];
    let mut s_par = vec![0.0; n];
    let mut s_perp = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut du = vec![0.0; n];

    for i in 0..config.max_iters {
        if i >= config.patience && history[i] - history[i - config.patience] < config.tol {
            converged = true;
            break;
        }

        let srow = secants.row(worst_idx);
        tmat_vec(&cols, n, m, srow, &mut p);
        mat_vec(&cols, n, m, &p, &mut s_par);
        for c in 0..n {
            s_perp[c] = srow[c] - s_par[c];
        }
        let perp = norm(&s_perp);
        if perp < IN_SUBSPACE_TOL {
            converged = true;
            break;
        }
        let par = norm(&s_par);
        if par < IN_SUBSPACE_TOL {
            u.copy_from_slice(&cols[..n]);
        } else {
            for c in 0..n {
                u[c] = s_par[c] / par;
            }
        }
        let theta = perp.atan2(par);
        let delta = step_scale * theta;
        step_scale *= config.step_decay;
        let (sd, cd) = delta.sin_cos();
        // u' = cos(d) u + sin(d) w, applied as a rank-one basis change.
        for c in 0..n {
            du[c] = (cd - 1.0) * u[c] + sd * s_perp[c] / perp;
        }
        tmat_vec(&cols, n, m, &u, &mut g);
        for j in 0..m {
            let gj = g[j];
            for (bc, &dc) in cols[j * n..(j + 1) * n].iter_mut().zip(du.iter()) {
                *bc += gj * dc;
            }
        }
        let kept = orthonormalize_cols(&mut cols, n, 1e-12);
        assert_eq!(kept, m, "rotation update collapsed a basis column");
        iterations = i + 1;

        let (ksq, id) = if use_cache {
            if iterations % RESYNC_EVERY == 0 {
                resync_cache(secants, &cols, m, &mut proj, &mut norms);
            } else {
                incremental_update(secants, m, &du, &g, &mut proj, &mut norms);
            }
            argmin_slice(&norms)
        } else {
            min_projected_norm_sq(secants, &cols, m)
        };
        let kappa = ksq.sqrt();
        if kappa > best_kappa {
            best_kappa = kappa;
            best_cols.clone_from(&cols);
        }
        history.push(best_kappa);
        worst_idx = id;
    }

    let basis = ProjectionBasis::from_columns_unchecked(best_cols, n, m);
    let (kappa, _) = min_projected_norm(secants, &basis)?;
    Ok(SapResult {
        basis,
        kappa: kappa.min(1.0),
        iterations,
        converged,
        kappa_history: history,
    })
}

/// Kappa-profile over an inclusive dimension range.
///
/// Dimension a is optimized from the configured init; each later dimension
/// warm-starts from the previous basis extended by the dominant residual
/// secant direction. Reported kappa values are non-decreasing in m.
pub fn kappa_profile(
    secants: &SecantSet,
    m_range: RangeInclusive<usize>,
    config: &SapConfig,
) -> Result<KappaProfile> {
    let a = *m_range.start();
    let results = kappa_profile_results(secants, m_range, config)?;
    Ok(KappaProfile {
        entries: results
            .iter()
            .enumerate()
            .map(|(i, r)| ProfileEntry {
                m: a + i,
                kappa: r.kappa,
                iterations: r.iterations,
                converged: r.converged,
            })
            .collect(),
        label: String::new(),
    })
}

/// As `kappa_profile`, but returns the full per-dimension results including
/// the optimizing bases (ordered as the dimensions were added).
pub fn kappa_profile_results(
    secants: &SecantSet,
    m_range: RangeInclusive<usize>,
    config: &SapConfig,
) -> Result<Vec<SapResult>> {
    let (a, b) = (*m_range.start(), *m_range.end());
    let n = secants.dim();
    if a < 1 || a > b || b > n {
        return Err(Error::DimensionMismatch(format!(
            "dimension range {a}..={b} invalid for ambient dimension {n}"
        )));
    }
    config.validate()?;
    let gram = (n <= GRAM_DIM_LIMIT).then(|| secant_gram(secants));
    let mut results: Vec<SapResult> = Vec::with_capacity(b - a + 1);
    for m in a..=b {
        let ext = match results.last() {
            Some(prev) => Some(extend_basis_with(secants, &prev.basis, gram.as_ref())?),
            None => None,
        };
        let mut res = match &ext {
            Some(ext) => {
                let mut cfg = config.clone();
                cfg.init = SapInit::Warm(ext.clone());
                sap_optimize_with(secants, m, &cfg, gram.as_ref())?
            }
            None => sap_optimize_with(secants, m, config, gram.as_ref())?,
        };
        if let (Some(prev), Some(ext)) = (results.last(), ext) {
            if res.kappa < prev.kappa {
                // The warm-start extension cannot score below the previous
                // basis (it appends one column); fall back to it when float
                // noise in the optimizer run says otherwise.
                let (k, _) = min_projected_norm(secants, &ext)?;
                res.kappa = k.min(1.0);
                res.basis = ext;
            }
        }
        results.push(res);
    }
    Ok(results)
}

/// Extends a basis by one column: the dominant direction of the secant
/// Gram restricted to the orthogonal complement of the current span, or a
/// standard basis completion when the residual spectrum is degenerate. The
/// first m columns are returned unchanged.
pub fn extend_basis(secants: &SecantSet, basis: &ProjectionBasis) -> Result<ProjectionBasis> {
    extend_basis_with(secants, basis, None)
}

pub(crate) fn extend_basis_with(
    secants: &SecantSet,
    basis: &ProjectionBasis,
    gram: Option<&DMatrix<f64>>,
) -> Result<ProjectionBasis> {
    let n = secants.dim();
    if basis.ambient_dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis ambient dimension {} vs secant dimension {n}",
            basis.ambient_dim()
        )));
    }
    if basis.subspace_dim() >= n {
        return Err(Error::DimensionMismatch(
            "cannot extend a full-dimensional basis".into(),
        ));
    }
    let dir = if n <= GRAM_DIM_LIMIT {
        let owned;
        let g = match gram {
            Some(g) => g,
            None => {
                owned = secant_gram(secants);
                &owned
            }
        };
        let b = basis.to_matrix();
        let r = DMatrix::identity(n, n) - &b * b.transpose();
        let a = &r * g * &r;
        let eig = a.symmetric_eigen();
        let top = (0..n)
            .max_by(|&x, &y| eig.eigenvalues[x].partial_cmp(&eig.eigenvalues[y]).unwrap())
            .unwrap();
        if eig.eigenvalues[top] > 1e-10 * (1.0 + g.trace()) {
            Some(eig.eigenvectors.column(top).iter().copied().collect())
        } else {
            None
        }
    } else {
        residual_power_direction(secants, basis)
    };
    Ok(append_direction(basis, dir))
}

/// Top directions of the secant Gram as a column-major init buffer.
fn pca_init(secants: &SecantSet, m: usize, gram: Option<&DMatrix<f64>>) -> Vec<f64> {
    let n = secants.dim();
    if n <= GRAM_DIM_LIMIT {
        let owned;
        let g = match gram {
            Some(g) => g,
            None => {
                owned = secant_gram(secants);
                &owned
            }
        };
        return top_eigvec_cols(g, m);
    }
    if secants.count() <= GRAM_DIM_LIMIT {
        return pca_init_small_count(secants, m);
    }
    block_power_cols(secants, m)
}

/// Secant Gram matrix S^T S accumulated chunk-by-chunk in a fixed order.
pub(crate) fn secant_gram(secants: &SecantSet) -> DMatrix<f64> {
    let n = secants.dim();
    let partials: Vec<Vec<f64>> = secants
        .row_chunks(SCAN_CHUNK_ROWS)
        .map(|rows| {
            let mut g = vec![0.0; n * n];
            for row in rows.chunks_exact(n) {
                for a in 0..n {
                    let ra = row[a];
                    for (d, &rb) in g[a * n..(a + 1) * n].iter_mut().zip(row) {
                        *d += ra * rb;
                    }
                }
            }
            g
        })
        .collect();
    let mut total = vec![0.0; n * n];
    for part in partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    DMatrix::from_row_slice(n, n, &total)
}

fn top_eigvec_cols(g: &DMatrix<f64>, m: usize) -> Vec<f64> {
    let n = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let mut cols = Vec::with_capacity(n * m);
    for &k in order.iter().take(m) {
        cols.extend(eig.eigenvectors.column(k).iter());
    }
    let kept = orthonormalize_cols(&mut cols, n, 1e-8);
    if kept < m {
        complete_with_standard_basis(&mut cols, n, m);
    }
    cols
}

/// PCA init via the count-side Gram S S^T when there are few secants in a
/// high-dimensional ambient space.
fn pca_init_small_count(secants: &SecantSet, m: usize) -> Vec<f64> {
    let n = secants.dim();
    let mc = secants.count();
    let mut t = DMatrix::zeros(mc, mc);
    for i in 0..mc {
        for j in i..mc {
            let v = dot(secants.row(i), secants.row(j));
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..mc).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
    let max_ev = eig.eigenvalues[order[0]].max(0.0);
    let mut cols = Vec::new();
    let mut have = 0usize;
    for &k in &order {
        if have == m || eig.eigenvalues[k] <= 1e-12 * (1.0 + max_ev) {
            break;
        }
        let w = eig.eigenvectors.column(k);
        let mut v = vec![0.0; n];
        for i in 0..mc {
            let wi = w[i];
            for (o, &rv) in v.iter_mut().zip(secants.row(i)) {
                *o += wi * rv;
            }
        }
        let nn = norm(&v);
        if nn > 1e-10 {
            for x in &mut v {
                *x /= nn;
            }
            cols.extend_from_slice(&v);
            have += 1;
        }
    }
    let kept = orthonormalize_cols(&mut cols, n, 1e-8);
    let _ = kept;
    complete_with_standard_basis(&mut cols, n, m);
    cols
}

/// Deterministic block power iteration on the secant Gram for the regime
/// where neither Gram side fits.
fn block_power_cols(secants: &SecantSet, m: usize) -> Vec<f64> {
    let n = secants.dim();
    let mut x = random_cols(n, m, 0xB10C);
    for _ in 0..30 {
        x = apply_secant_gram(secants, &x, m);
        let kept = orthonormalize_cols(&mut x, n, 1e-10);
        if kept < m {
            complete_with_standard_basis(&mut x, n, m);
        }
    }
    x
}

/// Y = S^T (S X) accumulated chunk-by-chunk in a fixed order.
fn apply_secant_gram(secants: &SecantSet, x: &[f64], m: usize) -> Vec<f64> {
    let n = secants.dim();
    let partials: Vec<Vec<f64>> = secants
        .row_chunks(SCAN_CHUNK_ROWS)
        .map(|rows| {
            let mut part = vec![0.0; n * m];
            for row in rows.chunks_exact(n) {
                for j in 0..m {
                    let c = dot(row, &x[j * n..(j + 1) * n]);
                    for (d, &rv) in part[j * n..(j + 1) * n].iter_mut().zip(row) {
                        *d += c * rv;
                    }
                }
            }
            part
        })
        .collect();
    let mut total = vec![0.0; n * m];
    for part in partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    total
}

/// Power iteration for the dominant residual direction when the ambient
/// dimension is too large for an explicit Gram. Returns None on a
/// degenerate residual spectrum.
fn residual_power_direction(secants: &SecantSet, basis: &ProjectionBasis) -> Option<Vec<f64>> {
    let n = secants.dim();
    let m = basis.subspace_dim();
    let cols = basis.columns_slice();
    let project_out = |v: &mut Vec<f64>| {
        for j in 0..m {
            let b = &cols[j * n..(j + 1) * n];
            let c = dot(b, v);
            for (o, &bc) in v.iter_mut().zip(b) {
                *o -= c * bc;
            }
        }
    };
    let mut v = Vec::new();
    for attempt in 0..4u64 {
        v = random_cols(n, 1, 0xE27E + attempt);
        project_out(&mut v);
        let nn = norm(&v);
        if nn > 1e-10 {
            for x in &mut v {
                *x /= nn;
            }
            break;
        }
        v.clear();
    }
    if v.is_empty() {
        return None;
    }
    let mut last_growth = 0.0;
    for _ in 0..40 {
        let mut y = apply_secant_gram(secants, &v, 1);
        project_out(&mut y);
        last_growth = norm(&y);
        if last_growth < 1e-14 {
            return None;
        }
        for x in &mut y {
            *x /= last_growth;
        }
        v = y;
    }
    if last_growth <= 1e-12 * (1.0 + secants.count() as f64) {
        return None;
    }
    Some(v)
}

/// Appends one direction (or a standard-basis completion) to a basis,
/// leaving the existing columns bit-identical.
fn append_direction(basis: &ProjectionBasis, dir: Option<Vec<f64>>) -> ProjectionBasis {
    let n = basis.n;
    let m = basis.m;
    let mut cols = basis.cols.clone();
    let mut appended = false;
    if let Some(mut d) = dir {
        // Orthogonalize, normalize, and verify; repeat so that a direction
        // nearly inside the span (whose normalization amplifies roundoff)
        // is either refined to a clean column or rejected.
        for pass in 0..4 {
            for j in 0..m {
                let b = &basis.cols[j * n..(j + 1) * n];
                let c = dot(b, &d);
                for (o, &bc) in d.iter_mut().zip(b) {
                    *o -= c * bc;
                }
            }
            let nn = norm(&d);
            if pass == 0 && nn <= 1e-8 {
                break;
            }
            if nn <= 0.5 && pass > 0 {
                break;
            }
            for x in &mut d {
                *x /= nn;
            }
            let worst = (0..m)
                .map(|j| dot(&basis.cols[j * n..(j + 1) * n], &d).abs())
                .fold(0.0, f64::max);
            if worst < 1e-13 {
                cols.extend_from_slice(&d);
                appended = true;
                break;
            }
        }
    }
    if !appended {
        complete_with_standard_basis(&mut cols, n, m + 1);
    }
    ProjectionBasis::from_columns_unchecked(cols, n, m + 1)
}

/// In-place modified Gram-Schmidt; columns collapsing below `tol` are
/// dropped and the surviving count returned.
fn orthonormalize_cols(cols: &mut Vec<f64>, n: usize, tol: f64) -> usize {
    let m = cols.len() / n;
    let mut kept = 0usize;
    for j in 0..m {
        if kept != j {
            cols.copy_within(j * n..(j + 1) * n, kept * n);
        }
        let (head, tail) = cols.split_at_mut(kept * n);
        let cj = &mut tail[..n];
        for k in 0..kept {
            let bk = &head[k * n..(k + 1) * n];
            let r = dot(bk, cj);
            for (o, &bc) in cj.iter_mut().zip(bk) {
                *o -= r * bc;
            }
        }
        let nn = norm(cj);
        if nn > tol {
            for x in cj.iter_mut() {
                *x /= nn;
            }
            kept += 1;
        }
    }
    cols.truncate(kept * n);
    kept
}

/// Grows `cols` to `want` orthonormal columns using standard basis vectors.
fn complete_with_standard_basis(cols: &mut Vec<f64>, n: usize, want: usize) {
    let mut have = cols.len() / n;
    let mut r = vec![0.0; n];
    for k in 0..n {
        if have == want {
            break;
        }
        r.fill(0.0);
        r[k] = 1.0;
        for j in 0..have {
            let b = &cols[j * n..(j + 1) * n];
            let c = dot(b, &r);
            for (o, &bc) in r.iter_mut().zip(b) {
                *o -= c * bc;
            }
        }
        let nn = norm(&r);
        if nn > 1e-6 {
            for x in &mut r {
                *x /= nn;
            }
            // Second pass cleans the roundoff amplified by normalizing a
            // small residual.
            for j in 0..have {
                let b = &cols[j * n..(j + 1) * n];
                let c = dot(b, &r);
                for (o, &bc) in r.iter_mut().zip(b) {
                    *o -= c * bc;
                }
            }
            let nn = norm(&r);
            for x in &mut r {
                *x /= nn;
            }
            cols.extend_from_slice(&r);
            have += 1;
        }
    }
    assert_eq!(have, want, "standard basis completion fell short");
}

fn random_cols(n: usize, m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = vec![0.0; n * m];
    for j in 0..m {
        loop {
            let (head, tail) = cols.split_at_mut(j * n);
            let cj = &mut tail[..n];
            for v in cj.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            for k in 0..j {
                let bk = &head[k * n..(k + 1) * n];
                let r = dot(bk, cj);
                for (o, &bc) in cj.iter_mut().zip(bk) {
                    *o -= r * bc;
                }
            }
            let nn = norm(cj);
            if nn > 1e-6 {
                for v in cj.iter_mut() {
                    *v /= nn;
                }
                break;
            }
        }
    }
    cols
}

fn defect_of(cols: &[f64], n: usize, m: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in i..m {
            let d = dot(&cols[i * n..(i + 1) * n], &cols[j * n..(j + 1) * n]);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((d - target).abs());
        }
    }
    worst
}

/// Full recomputation of cached projections B^T s and their squared norms;
/// per-row arithmetic matches `min_projected_norm` exactly.
fn resync_cache(
    secants: &SecantSet,
    cols: &[f64],
    m: usize,
    proj: &mut [f64],
    norms: &mut [f64],
) {
    let dim = secants.dim();
    proj.par_chunks_mut(SCAN_CHUNK_ROWS * m)
        .zip(norms.par_chunks_mut(SCAN_CHUNK_ROWS))
        .zip(secants.row_chunks(SCAN_CHUNK_ROWS))
        .for_each(|((pch, nch), rows)| {
            for ((prow, nval), row) in pch
                .chunks_exact_mut(m)
                .zip(nch.iter_mut())
                .zip(rows.chunks_exact(dim))
            {
                let mut acc = 0.0;
                for j in 0..m {
                    let d = dot(row, &cols[j * dim..(j + 1) * dim]);
                    prow[j] = d;
                    acc += d * d;
                }
                *nval = acc;
            }
        });
}

/// Rank-one cache update matching the basis change B += du g^T; drift from
/// the re-orthonormalization is absorbed by periodic resyncs.
fn incremental_update(
    secants: &SecantSet,
    m: usize,
    du: &[f64],
    g: &[f64],
    proj: &mut [f64],
    norms: &mut [f64],
) {
    let dim = secants.dim();
    proj.par_chunks_mut(SCAN_CHUNK_ROWS * m)
        .zip(norms.par_chunks_mut(SCAN_CHUNK_ROWS))
        .zip(secants.row_chunks(SCAN_CHUNK_ROWS))
        .for_each(|((pch, nch), rows)| {
            for ((prow, nval), row) in pch
                .chunks_exact_mut(m)
                .zip(nch.iter_mut())
                .zip(rows.chunks_exact(dim))
            {
                let c = dot(row, du);
                let mut acc = 0.0;
                for (pj, &gj) in prow.iter_mut().zip(g) {
                    *pj += c * gj;
                    acc += *pj * *pj;
                }
                *nval = acc;
            }
        });
}

/// First index attaining the minimum; equivalent to combining chunk minima
/// in (value, index) lexicographic order.
fn argmin_slice(norms: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, &v) in norms.iter().enumerate() {
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

fn mat_vec(cols: &[f64], n: usize, m: usize, p: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for j in 0..m {
        let pj = p[j];
        for (o, &c) in out.iter_mut().zip(&cols[j * n..(j + 1) * n]) {
            *o += pj * c;
        }
    }
}

fn tmat_vec(cols: &[f64], n: usize, m: usize, x: &[f64], out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate().take(m) {
        *o = dot(&cols[j * n..(j + 1) * n], x);
    }
}
