//! Kuramoto-Sivashinsky data generator on a 2pi-periodic domain.
//!
//! Integrates u_t + 4 u_xxxx + alpha (u_xx + (u_x)^2 / 2) = 0
//! pseudospectrally with a fourth-order exponential time-differencing
//! Runge-Kutta scheme. The phi-function coefficients are evaluated by a
//! contour-integral mean over 32 points of the unit circle, which avoids
//! cancellation for small dt*L. The quadratic term is dealiased with the
//! 2/3 rule; the mean (k=0) mode is kept, since the equation drives it
//! monotonically and the drift is part of the attractor geometry.

use crate::error::{Error, Result};
use crate::secants::DataMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

/// Number of contour points for the phi-function quadrature.
const CONTOUR_POINTS: usize = 32;

/// States with any |u| beyond this are treated as blown up.
const BLOWUP_LIMIT: f64 = 1e10;

/// Amplitude of the optional seeded perturbation on the initial profile.
const INIT_NOISE_AMP: f64 = 0.01;

/// Initial condition choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsInit {
    /// u(x, 0) = 0.1 cos(x) (1 + sin(x)).
    DefaultCosine,
    /// The default profile plus small seeded uniform noise.
    SeededRandom(u64),
}

/// Solver configuration; `KsConfig::new(alpha)` fills the tuned defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsConfig {
    /// Bifurcation parameter multiplying u_xx and the quadratic term.
    pub alpha: f64,
    /// Spatial resolution; power of two, at least 8.
    pub grid_points: usize,
    /// Time step in equation units.
    pub dt: f64,
    /// Fine steps discarded before sampling starts.
    pub transient_steps: usize,
    /// Fine steps between recorded samples.
    pub sample_stride: usize,
    /// Recorded states.
    pub n_samples: usize,
    pub init: KsInit,
    /// Disables the quadratic term, leaving the exactly-solvable linear
    /// part; used for solver validation.
    pub linear_only: bool,
}

impl KsConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            grid_points: 32,
            dt: 1e-3,
            transient_steps: 1_000_000,
            sample_stride: 10,
            n_samples: 10_000,
            init: KsInit::DefaultCosine,
            linear_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be a positive real, got {}",
                self.alpha
            )));
        }
        if self.grid_points < 8 || !self.grid_points.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be a power of two of at least 8, got {}",
                self.grid_points
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_samples < 1 {
            return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
        }
        if self.sample_stride < 1 {
            return Err(Error::InvalidConfig("sample_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Time-ordered post-transient samples, one state per row.
#[derive(Debug, Clone)]
pub struct KsTrajectory {
    states: Vec<f64>,
    config: KsConfig,
}

impl KsTrajectory {
    pub fn n_samples(&self) -> usize {
        self.states.len() / self.config.grid_points
    }

    pub fn grid_points(&self) -> usize {
        self.config.grid_points
    }

    pub fn config(&self) -> &KsConfig {
        &self.config
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.config.grid_points;
        &self.states[i * n..(i + 1) * n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.states
    }

    pub fn to_data_matrix(&self, label: impl Into<String>) -> Result<DataMatrix> {
        DataMatrix::new(
            self.states.clone(),
            self.n_samples(),
            self.config.grid_points,
            label,
        )
    }

    /// Writes the trajectory as a headerless numeric CSV plus a sidecar
    /// JSON of the full configuration (same stem, `.config.json`).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.n_samples() {
            let row = self.row(i);
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        let sidecar = path.with_extension("config.json");
        let json = serde_json::to_string_pretty(&self.config)
            .expect("config serialization cannot fail");
        std::fs::write(sidecar, json)?;
        Ok(())
    }
}

/// Pseudospectral ETDRK4 stepper with settable state.
pub struct KsSolver {
    config: KsConfig,
    /// Unnormalized spectrum of the current state.
    v: Vec<Complex64>,
    steps: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    /// Wavenumber per bin in FFT order.
    wavenumbers: Vec<f64>,
    /// 2/3-rule dealias mask (1.0 keep, 0.0 zero).
    mask: Vec<f64>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    nv: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    sa: Vec<Complex64>,
    sb: Vec<Complex64>,
    sc: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl KsSolver {
    pub fn new(config: &KsConfig) -> Result<Self> {
        config.validate()?;
        let n = config.grid_points;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft
            .get_inplace_scratch_len()
            .max(ifft.get_inplace_scratch_len());

        let wavenumbers: Vec<f64> = (0..n)
            .map(|i| {
                if i <= n / 2 {
                    i as f64
                } else {
                    i as f64 - n as f64
                }
            })
            .collect();
        let cutoff = (n / 3) as f64;
        let mask: Vec<f64> = wavenumbers
            .iter()
            .map(|k| if k.abs() > cutoff { 0.0 } else { 1.0 })
            .collect();

        let dt = config.dt;
        let alpha = config.alpha;
        let mut e = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        let mut f3 = Vec::with_capacity(n);
        for k in &wavenumbers {
            let l = alpha * k * k - 4.0 * k.powi(4);
            e.push((dt * l).exp());
            e2.push((dt * l / 2.0).exp());
            let (qq, ff1, ff2, ff3) = phi_coefficients(dt, l);
            q.push(qq);
            f1.push(ff1);
            f2.push(ff2);
            f3.push(ff3);
        }

        let mut solver = Self {
            config: config.clone(),
            v: vec![Complex64::new(0.0, 0.0); n],
            steps: 0,
            fft,
            ifft,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            wavenumbers,
            mask,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            nv: vec![Complex64::new(0.0, 0.0); n],
            na: vec![Complex64::new(0.0, 0.0); n],
            nb: vec![Complex64::new(0.0, 0.0); n],
            nc: vec![Complex64::new(0.0, 0.0); n],
            sa: vec![Complex64::new(0.0, 0.0); n],
            sb: vec![Complex64::new(0.0, 0.0); n],
            sc: vec![Complex64::new(0.0, 0.0); n],
            work: vec![Complex64::new(0.0, 0.0); n],
        };
        solver.set_state(&initial_profile(config))?;
        Ok(solver)
    }

    pub fn config(&self) -> &KsConfig {
        &self.config
    }

    /// Fine steps taken since construction or the last `set_state`.
    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Current state on the grid x_j = 2 pi j / n.
    pub fn state(&self) -> Vec<f64> {
        let n = self.config.grid_points;
        let mut buf = self.v.clone();
        self.ifft
            .process_with_scratch(&mut buf, &mut self.scratch.clone());
        buf.iter().map(|c| c.re / n as f64).collect()
    }

    /// Replaces the state (dealias mask applied) and resets the step count.
    pub fn set_state(&mut self, u: &[f64]) -> Result<()> {
        let n = self.config.grid_points;
        if u.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "state length {} does not match grid {n}",
                u.len()
            )));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite state entry".into()));
        }
        for (vk, &x) in self.v.iter_mut().zip(u) {
            *vk = Complex64::new(x, 0.0);
        }
        self.fft.process_with_scratch(&mut self.v, &mut self.scratch);
        for (vk, &mk) in self.v.iter_mut().zip(&self.mask) {
            *vk *= mk;
        }
        self.enforce_real_symmetry();
        self.steps = 0;
        Ok(())
    }

    /// Projects the spectrum onto the conjugate-symmetric subspace of real
    /// states. FFT roundoff seeds a tiny anti-Hermitian component that the
    /// linearly unstable modes amplify exponentially while staying
    /// invisible in the real part, so it must be removed every step.
    fn enforce_real_symmetry(&mut self) {
        let n = self.config.grid_points;
        self.v[0].im = 0.0;
        self.v[n / 2].im = 0.0;
        for k in 1..n / 2 {
            let a = self.v[k];
            let b = self.v[n - k];
            let re = 0.5 * (a.re + b.re);
            let im = 0.5 * (a.im - b.im);
            self.v[k] = Complex64::new(re, im);
            self.v[n - k] = Complex64::new(re, -im);
        }
    }

    /// g(v) = -(alpha/2) FFT((u_x)^2), dealiased; zero in linear-only mode.
    fn nonlinear(&mut self, v: &[Complex64], out_idx: usize) {
        let n = self.config.grid_points as f64;
        if self.config.linear_only {
            let out = self.nl_buf(out_idx);
            out.fill(Complex64::new(0.0, 0.0));
            return;
        }
        for ((w, vk), &k) in self.work.iter_mut().zip(v).zip(&self.wavenumbers) {
            *w = Complex64::new(0.0, k) * vk;
        }
        self.ifft
            .process_with_scratch(&mut self.work, &mut self.scratch);
        for w in self.work.iter_mut() {
            let ux = w.re / n;
            *w = Complex64::new(ux * ux, 0.0);
        }
        self.fft
            .process_with_scratch(&mut self.work, &mut self.scratch);
        let scale = -self.config.alpha / 2.0;
        let out = match out_idx {
            0 => &mut self.nv,
            1 => &mut self.na,
            2 => &mut self.nb,
            _ => &mut self.nc,
        };
        for ((o, w), &mk) in out.iter_mut().zip(&self.work).zip(&self.mask) {
            *o = scale * mk * w;
        }
    }

    fn nl_buf(&mut self, idx: usize) -> &mut Vec<Complex64> {
        match idx {
            0 => &mut self.nv,
            1 => &mut self.na,
            2 => &mut self.nb,
            _ => &mut self.nc,
        }
    }

    /// One ETDRK4 step.
    pub fn step(&mut self) -> Result<()> {
        let n = self.config.grid_points;
        let v_snapshot = self.v.clone();
        self.nonlinear(&v_snapshot, 0);
        for i in 0..n {
            self.sa[i] = self.e2[i] * v_snapshot[i] + self.q[i] * self.nv[i];
        }
        let a = self.sa.clone();
        self.nonlinear(&a, 1);
        for i in 0..n {
            self.sb[i] = self.e2[i] * v_snapshot[i] + self.q[i] * self.na[i];
        }
        let b = self.sb.clone();
        self.nonlinear(&b, 2);
        for i in 0..n {
            self.sc[i] = self.e2[i] * self.sa[i] + self.q[i] * (2.0 * self.nb[i] - self.nv[i]);
        }
        let c = self.sc.clone();
        self.nonlinear(&c, 3);
        for i in 0..n {
            self.v[i] = self.e[i] * v_snapshot[i]
                + self.f1[i] * self.nv[i]
                + 2.0 * self.f2[i] * (self.na[i] + self.nb[i])
                + self.f3[i] * self.nc[i];
        }
        self.enforce_real_symmetry();
        self.steps += 1;
        let scale = n as f64;
        for vk in &self.v {
            let mag = vk.re.abs().max(vk.im.abs());
            if !mag.is_finite() || mag > BLOWUP_LIMIT * scale {
                return Err(Error::NumericalBlowup { step: self.steps });
            }
        }
        Ok(())
    }

    pub fn step_n(&mut self, count: usize) -> Result<()> {
        for _ in 0..count {
            self.step()?;
        }
        Ok(())
    }

    #[doc(hidden)]
    pub fn debug_set_dealias(&mut self, on: bool) {
        let n = self.config.grid_points;
        let cutoff = if on { (n / 3) as f64 } else { (n / 2 - 1) as f64 };
        self.mask = self
            .wavenumbers
            .iter()
            .map(|k| if k.abs() > cutoff { 0.0 } else { 1.0 })
            .collect();
    }

    #[doc(hidden)]
    pub fn debug_spectrum(&self) -> Vec<(f64, f64, f64)> {
        self.v
            .iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| (k, c.re, c.im))
            .collect()
    }
}

/// Runs the configured transient, then records `n_samples` states every
/// `sample_stride` fine steps.
pub fn ks_simulate(config: &KsConfig) -> Result<KsTrajectory> {
    let mut solver = KsSolver::new(config)?;
    solver.step_n(config.transient_steps)?;
    let mut states = Vec::with_capacity(config.n_samples * config.grid_points);
    for i in 0..config.n_samples {
        if i > 0 {
            solver.step_n(config.sample_stride)?;
        }
        states.extend(solver.state());
    }
    Ok(KsTrajectory {
        states,
        config: config.clone(),
    })
}

/// Max-norm residual of the semi-discretized equation over a window of
/// three or more consecutive fine-step states: central time differences
/// against spectral spatial terms (with the solver's dealiased quadratic).
pub fn ks_residual(states: &[Vec<f64>], config: &KsConfig) -> Result<f64> {
    config.validate()?;
    let n = config.grid_points;
    if states.len() < 3 {
        return Err(Error::DimensionMismatch(format!(
            "need at least 3 consecutive states, got {}",
            states.len()
        )));
    }
    if let Some(bad) = states.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "state length {} does not match grid {n}",
            bad.len()
        )));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let wavenumbers: Vec<f64> = (0..n)
        .map(|i| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 })
        .collect();
    let cutoff = (n / 3) as f64;
    let nf = n as f64;
    let to_real = |spec: &[Complex64]| -> Vec<f64> {
        let mut buf = spec.to_vec();
        ifft.process(&mut buf);
        buf.iter().map(|c| c.re / nf).collect()
    };

    let mut worst = 0.0f64;
    for t in 1..states.len() - 1 {
        let mut v: Vec<Complex64> = states[t].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft.process(&mut v);
        let dx: Vec<Complex64> = v
            .iter()
            .zip(&wavenumbers)
            .map(|(vk, &k)| Complex64::new(0.0, k) * vk)
            .collect();
        let ux = to_real(&dx);
        let uxx = to_real(
            &v.iter()
                .zip(&wavenumbers)
                .map(|(vk, &k)| -k * k * vk)
                .collect::<Vec<_>>(),
        );
        let uxxxx = to_real(
            &v.iter()
                .zip(&wavenumbers)
                .map(|(vk, &k)| k.powi(4) * vk)
                .collect::<Vec<_>>(),
        );
        let mut prod: Vec<Complex64> = ux.iter().map(|&x| Complex64::new(x * x, 0.0)).collect();
        fft.process(&mut prod);
        for (p, &k) in prod.iter_mut().zip(&wavenumbers) {
            if k.abs() > cutoff {
                *p = Complex64::new(0.0, 0.0);
            }
        }
        let prod = to_real(&prod);
        let quad = if config.linear_only { 0.0 } else { 1.0 };
        for j in 0..n {
            let ut = (states[t + 1][j] - states[t - 1][j]) / (2.0 * config.dt);
            let r = ut
                + 4.0 * uxxxx[j]
                + config.alpha * (uxx[j] + quad * 0.5 * prod[j]);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Contour-integral evaluation of the ETDRK4 coefficients for one mode.
fn phi_coefficients(dt: f64, l: f64) -> (f64, f64, f64, f64) {
    let m = CONTOUR_POINTS;
    let z = Complex64::new(dt * l, 0.0);
    let mut q = 0.0;
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    let mut f3 = 0.0;
    for j in 0..m {
        let theta = PI * (j as f64 + 0.5) / m as f64;
        let r = Complex64::new(theta.cos(), theta.sin());
        let lr = z + r;
        let elr = lr.exp();
        let elr2 = (lr / 2.0).exp();
        let lr2 = lr * lr;
        let lr3 = lr2 * lr;
        q += ((elr2 - 1.0) / lr).re;
        f1 += ((-4.0 - lr + elr * (4.0 - 3.0 * lr + lr2)) / lr3).re;
        f2 += ((2.0 + lr + elr * (-2.0 + lr)) / lr3).re;
        f3 += ((-4.0 - 3.0 * lr - lr2 + elr * (4.0 - lr)) / lr3).re;
    }
    let scale = dt / m as f64;
    (q * scale, f1 * scale, f2 * scale, f3 * scale)
}

fn initial_profile(config: &KsConfig) -> Vec<f64> {
    let n = config.grid_points;
    let mut u: Vec<f64> = (0..n)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / n as f64;
            0.1 * x.cos() * (1.0 + x.sin())
        })
        .collect();
    if let KsInit::SeededRandom(seed) = config.init {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for v in &mut u {
            *v += INIT_NOISE_AMP * rng.gen_range(-1.0..1.0);
        }
    }
    u
}
