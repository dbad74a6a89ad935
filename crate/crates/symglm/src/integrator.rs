//! Fixed-step integration engine: starting method, main multivalue loop
//! with Newton stage solves and compensated summation, finishing method,
//! and invariant monitoring.
//!
//! Stages are solved in index order, so the stage matrix A must be lower
//! triangular (every shipped stepping method qualifies; the Lobatto IIIB
//! comparator is catalogue-only and is rejected here with a clear error).
//! The update loop requires the canonical diagonal V with entries +-1.

use crate::linalg::{norm2, norm_inf, solve_real};
use crate::tableau::{FinishRule, MethodEntry, RkTableau, StartScheme, StartVariant};
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

/// State outside a problem's domain of definition.
#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct DomainError(pub String);

/// An autonomous initial value problem with optional analytic Jacobian and
/// a list of monitored invariants.
#[derive(Clone)]
pub struct OdeProblem {
    pub name: String,
    pub dim: usize,
    pub y0: Vec<f64>,
    /// Vector field `f(y)`, written into the output slice.
    pub f: Arc<dyn Fn(&[f64], &mut [f64]) -> Result<(), DomainError> + Send + Sync>,
    /// Row-major Jacobian of `f`; central finite differences are used when
    /// absent.
    pub jacobian: Option<Arc<dyn Fn(&[f64], &mut [f64]) -> Result<(), DomainError> + Send + Sync>>,
    pub invariants: Vec<(String, Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>)>,
    /// Linear reversibility sign matrices (diagonals); metadata only.
    pub reversibility: Vec<Vec<f64>>,
}

impl OdeProblem {
    pub fn eval_f(&self, y: &[f64], out: &mut [f64]) -> Result<(), IntegrationError> {
        (self.f)(y, out).map_err(IntegrationError::Domain)
    }

    /// Analytic Jacobian when available, otherwise central differences
    /// with step `sqrt(eps) * (1 + |y_j|)`.
    pub fn eval_jacobian(&self, y: &[f64], out: &mut [f64]) -> Result<(), IntegrationError> {
        let d = self.dim;
        if let Some(jac) = &self.jacobian {
            return jac(y, out).map_err(IntegrationError::Domain);
        }
        let sqrt_eps = f64::EPSILON.sqrt();
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        let mut fp = vec![0.0; d];
        let mut fm = vec![0.0; d];
        for j in 0..d {
            let delta = sqrt_eps * (1.0 + y[j].abs());
            yp[j] = y[j] + delta;
            ym[j] = y[j] - delta;
            self.eval_f(&yp, &mut fp)?;
            self.eval_f(&ym, &mut fm)?;
            for i in 0..d {
                out[i * d + j] = (fp[i] - fm[i]) / (2.0 * delta);
            }
            yp[j] = y[j];
            ym[j] = y[j];
        }
        Ok(())
    }
}

/// Run parameters. Defaults: stride 1, Newton tolerance 1e-13 with at most
/// 50 iterations, compensated summation on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: String,
    pub h: f64,
    pub t_final: f64,
    pub sample_stride: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub compensated: bool,
}

impl RunConfig {
    pub fn new(method: &str, h: f64, t_final: f64) -> Self {
        RunConfig {
            method: method.to_string(),
            h,
            t_final,
            sample_stride: 1,
            newton_tol: 1e-13,
            newton_max_iter: 50,
            compensated: true,
        }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.h > 0.0) {
            return Err(IntegrationError::Config("step size must be positive".into()));
        }
        if self.t_final < self.h {
            return Err(IntegrationError::Config(
                "final time must be at least one step".into(),
            ));
        }
        if self.sample_stride == 0 {
            return Err(IntegrationError::Config("sample stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NewtonStats {
    pub total_iterations: u64,
    pub max_iterations: u32,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub y: Vec<f64>,
    pub invariant_errors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub invariant_names: Vec<String>,
    pub samples: Vec<Sample>,
    pub wall_time: f64,
    pub newton_stats: NewtonStats,
}

impl Trajectory {
    /// CSV export: header `t,<inv>_err,...`, one row per sample, full
    /// binary64 precision (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for name in &self.invariant_names {
            out.push_str(&format!(",{name}_err"));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!("{:.16e}", s.t));
            for e in &s.invariant_errors {
                out.push_str(&format!(",{:.16e}", e));
            }
            out.push('\n');
        }
        out
    }

    pub fn max_abs_error(&self, invariant: usize) -> f64 {
        self.samples
            .iter()
            .map(|s| s.invariant_errors[invariant].abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("Newton iteration failed to converge at stage {stage} (residual {residual:.3e})")]
    NewtonDivergence { stage: usize, residual: f64 },
    #[error("non-finite state detected at step {step}")]
    NonFinite { step: u64 },
    #[error(transparent)]
    Domain(DomainError),
    #[error("method {0} has a stage matrix that is not lower triangular; the stepping engine solves stages in index order")]
    NotLowerTriangular(String),
    #[error("method {0} does not have the diagonal +-1 V required by the update loop")]
    UnsupportedV(String),
    #[error("method {0} cannot be started: {1}")]
    BadStart(String, String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A run that aborted mid-flight; the samples gathered so far are kept.
#[derive(Debug, Error)]
#[error("run aborted: {error}")]
pub struct RunFailure {
    pub error: IntegrationError,
    pub partial: Trajectory,
}

// ---------------------------------------------------------------------------
// Newton stage solve
// ---------------------------------------------------------------------------

/// Solve `Y = w + h_aii * f(Y)` by Newton iteration starting from `guess`.
/// Residual-based stopping: `||dY|| <= tol (1 + ||Y||)` in the max norm.
fn solve_implicit_stage(
    prob: &OdeProblem,
    h_aii: f64,
    w: &[f64],
    guess: &[f64],
    tol: f64,
    max_iter: usize,
    stage: usize,
    stats: &mut NewtonStats,
) -> Result<Vec<f64>, IntegrationError> {
    let d = prob.dim;
    let mut y = guess.to_vec();
    let mut fy = vec![0.0; d];
    let mut jac = vec![0.0; d * d];
    let mut newton_mat = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut iters_this_solve = 0u32;
    for _ in 0..max_iter {
        prob.eval_f(&y, &mut fy)?;
        let mut residual: f64 = 0.0;
        for i in 0..d {
            rhs[i] = w[i] + h_aii * fy[i] - y[i];
            residual = residual.max(rhs[i].abs());
        }
        prob.eval_jacobian(&y, &mut jac)?;
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                newton_mat[i * d + j] = delta - h_aii * jac[i * d + j];
            }
        }
        if !solve_real(&mut newton_mat, &mut rhs, d) {
            return Err(IntegrationError::NewtonDivergence {
                stage,
                residual,
            });
        }
        iters_this_solve += 1;
        stats.total_iterations += 1;
        let mut step_norm: f64 = 0.0;
        for i in 0..d {
            y[i] += rhs[i];
            step_norm = step_norm.max(rhs[i].abs());
        }
        if step_norm <= tol * (1.0 + norm_inf(&y)) {
            stats.max_iterations = stats.max_iterations.max(iters_this_solve);
            return Ok(y);
        }
    }
    let mut fy2 = vec![0.0; d];
    prob.eval_f(&y, &mut fy2)?;
    let res = (0..d)
        .map(|i| (w[i] + h_aii * fy2[i] - y[i]).abs())
        .fold(0.0, f64::max);
    Err(IntegrationError::NewtonDivergence {
        stage,
        residual: res,
    })
}

// ---------------------------------------------------------------------------
// Runge-Kutta stepping (starting and finishing maps)
// ---------------------------------------------------------------------------

/// One step of a (diagonally implicit) Runge-Kutta method. The step size
/// may be negative; implicit stages use the same Newton machinery either
/// way.
pub fn rk_step(
    rk: &RkTableau,
    prob: &OdeProblem,
    y: &[f64],
    h: f64,
    tol: f64,
    max_iter: usize,
    stats: &mut NewtonStats,
) -> Result<Vec<f64>, IntegrationError> {
    if !rk.is_lower_triangular() {
        return Err(IntegrationError::NotLowerTriangular("rk".into()));
    }
    let d = prob.dim;
    let s = rk.s();
    let a = rk.a_f64();
    let b = rk.b_f64();
    let mut f_stages: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut prev_stage: Vec<f64> = y.to_vec();
    for i in 0..s {
        let mut w = y.to_vec();
        for (j, fj) in f_stages.iter().enumerate() {
            let haij = h * a[i][j];
            if haij != 0.0 {
                for k in 0..d {
                    w[k] += haij * fj[k];
                }
            }
        }
        let stage_y = if a[i][i] != 0.0 {
            solve_implicit_stage(prob, h * a[i][i], &w, &prev_stage, tol, max_iter, i, stats)?
        } else {
            w
        };
        let mut fi = vec![0.0; d];
        prob.eval_f(&stage_y, &mut fi)?;
        f_stages.push(fi);
        prev_stage = stage_y;
    }
    let mut out = y.to_vec();
    for i in 0..s {
        let hbi = h * b[i];
        for k in 0..d {
            out[k] += hbi * f_stages[i][k];
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The multivalue stepping engine
// ---------------------------------------------------------------------------

/// Stepper bound to one method and one problem. Holds the Kahan carries so
/// compensation persists across steps.
pub struct GlmStepper<'a> {
    pub entry: &'a MethodEntry,
    pub prob: &'a OdeProblem,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub compensated: bool,
    pub stats: NewtonStats,
    a: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    v_diag: Vec<f64>,
    carry: Vec<Vec<f64>>,
}

impl<'a> GlmStepper<'a> {
    pub fn new(
        entry: &'a MethodEntry,
        prob: &'a OdeProblem,
        cfg: &RunConfig,
    ) -> Result<Self, IntegrationError> {
        let m = &entry.tableau;
        if !m.is_lower_triangular() {
            return Err(IntegrationError::NotLowerTriangular(entry.name.clone()));
        }
        let f = m.floats();
        let mut v_diag = Vec::with_capacity(m.r);
        for i in 0..m.r {
            for j in 0..m.r {
                if i != j && f.v[i][j] != 0.0 {
                    return Err(IntegrationError::UnsupportedV(entry.name.clone()));
                }
            }
            let vii = f.v[i][i];
            if vii != 1.0 && vii != -1.0 {
                return Err(IntegrationError::UnsupportedV(entry.name.clone()));
            }
            v_diag.push(vii);
        }
        Ok(GlmStepper {
            entry,
            prob,
            newton_tol: cfg.newton_tol,
            newton_max_iter: cfg.newton_max_iter,
            compensated: cfg.compensated,
            stats: NewtonStats::default(),
            a: f.a.clone(),
            u: f.u.clone(),
            b: f.b.clone(),
            v_diag,
            carry: vec![vec![0.0; prob.dim]; m.r],
        })
    }

    pub fn reset_compensation(&mut self) {
        for c in &mut self.carry {
            c.fill(0.0);
        }
    }

    /// Starting method: produce `y^[0]` from `y0`.
    pub fn start(&mut self, y0: &[f64], h: f64) -> Result<Vec<Vec<f64>>, IntegrationError> {
        let r = self.entry.tableau.r;
        match &self.entry.start {
            StartScheme::Identity => {
                let mut out = vec![y0.to_vec()];
                for _ in 1..r {
                    out.push(vec![0.0; y0.len()]);
                }
                Ok(out)
            }
            StartScheme::Triple(triple) => {
                let tol = self.newton_tol;
                let iters = self.newton_max_iter;
                let fwd = &triple.forward;
                let plus = rk_step(fwd, self.prob, y0, h, tol, iters, &mut self.stats)?;
                match triple.variant {
                    StartVariant::Pair => {
                        let minus =
                            rk_step(fwd, self.prob, y0, -h, tol, iters, &mut self.stats)?;
                        let c = triple.c_scale.to_f64();
                        let y1 = zip(&plus, &minus, |a, b| 0.5 * (a + b));
                        let y2 = zip(&plus, &minus, |a, b| 0.5 * c * (a - b));
                        Ok(vec![y1, y2])
                    }
                    StartVariant::HalfDifference => {
                        let minus =
                            rk_step(fwd, self.prob, y0, -h, tol, iters, &mut self.stats)?;
                        let y2 = zip(&plus, &minus, |a, b| 0.5 * (a - b));
                        Ok(vec![y0.to_vec(), y2])
                    }
                    StartVariant::Shift => {
                        let y2 = zip(&plus, y0, |a, b| a - b);
                        Ok(vec![y0.to_vec(), y2])
                    }
                }
            }
        }
    }

    /// One step of the main method: stages in index order, then the value
    /// update, compensated per component when enabled.
    pub fn step(&mut self, y: &mut [Vec<f64>], h: f64) -> Result<(), IntegrationError> {
        let m = &self.entry.tableau;
        let d = self.prob.dim;
        let (s, r) = (m.s, m.r);
        let mut f_stages: Vec<Vec<f64>> = Vec::with_capacity(s);
        let mut prev_stage: Option<Vec<f64>> = None;
        for i in 0..s {
            // w = U y + h * sum_{j<i} a_ij F_j
            let mut w = vec![0.0; d];
            for k in 0..r {
                let uik = self.u[i][k];
                if uik != 0.0 {
                    for x in 0..d {
                        w[x] += uik * y[k][x];
                    }
                }
            }
            for (j, fj) in f_stages.iter().enumerate() {
                let haij = h * self.a[i][j];
                if haij != 0.0 {
                    for x in 0..d {
                        w[x] += haij * fj[x];
                    }
                }
            }
            let aii = self.a[i][i];
            let stage_y = if aii != 0.0 {
                let guess = prev_stage.as_deref().unwrap_or(&y[0]);
                solve_implicit_stage(
                    self.prob,
                    h * aii,
                    &w,
                    guess,
                    self.newton_tol,
                    self.newton_max_iter,
                    i,
                    &mut self.stats,
                )?
            } else {
                w
            };
            let mut fi = vec![0.0; d];
            self.prob.eval_f(&stage_y, &mut fi)?;
            f_stages.push(fi);
            prev_stage = Some(stage_y);
        }
        // y_i <- V_ii y_i + h * sum_j b_ij F_j, with Kahan compensation per
        // component; the carry flips sign together with the value when
        // V_ii = -1.
        for i in 0..r {
            let vii = self.v_diag[i];
            for x in 0..d {
                let mut inc = 0.0;
                for (j, fj) in f_stages.iter().enumerate() {
                    inc += h * self.b[i][j] * fj[x];
                }
                if self.compensated {
                    let base = vii * y[i][x];
                    let carry = vii * self.carry[i][x];
                    let z = inc + carry;
                    let t = base + z;
                    self.carry[i][x] = (base - t) + z;
                    y[i][x] = t;
                } else {
                    y[i][x] = vii * y[i][x] + inc;
                }
            }
        }
        Ok(())
    }

    /// Finishing method: produce the solution estimate from `y^[n]`.
    pub fn finish(&mut self, y: &[Vec<f64>], h: f64) -> Result<Vec<f64>, IntegrationError> {
        match self.entry.finishing {
            FinishRule::FirstComponent => Ok(y[0].clone()),
            FinishRule::TripleInverse => {
                let StartScheme::Triple(triple) = &self.entry.start else {
                    return Err(IntegrationError::BadStart(
                        self.entry.name.clone(),
                        "finishing rule needs a starting triple".into(),
                    ));
                };
                let inverse = triple.inverse.as_ref().ok_or_else(|| {
                    IntegrationError::BadStart(
                        self.entry.name.clone(),
                        "finishing rule needs the triple's inverse tableau".into(),
                    )
                })?;
                let c = triple.c_scale.to_f64();
                let wp = zip(&y[0], &y[1], |a, b| a + b / c);
                let wm = zip(&y[0], &y[1], |a, b| a - b / c);
                let tol = self.newton_tol;
                let iters = self.newton_max_iter;
                let up = rk_step(inverse, self.prob, &wp, h, tol, iters, &mut self.stats)?;
                let um = rk_step(inverse, self.prob, &wm, -h, tol, iters, &mut self.stats)?;
                Ok(zip(&up, &um, |a, b| 0.5 * (a + b)))
            }
        }
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Convenience single-step wrapper around [`GlmStepper::step`] (fresh
/// compensation carries).
pub fn glm_step(
    entry: &MethodEntry,
    prob: &OdeProblem,
    y_in: &[Vec<f64>],
    h: f64,
    cfg: &RunConfig,
) -> Result<Vec<Vec<f64>>, IntegrationError> {
    let mut stepper = GlmStepper::new(entry, prob, cfg)?;
    let mut y = y_in.to_vec();
    stepper.step(&mut y, h)?;
    Ok(y)
}

/// Convenience wrapper around [`GlmStepper::start`].
pub fn start(
    entry: &MethodEntry,
    prob: &OdeProblem,
    h: f64,
    cfg: &RunConfig,
) -> Result<Vec<Vec<f64>>, IntegrationError> {
    GlmStepper::new(entry, prob, cfg)?.start(&prob.y0, h)
}

/// Convenience wrapper around [`GlmStepper::finish`].
pub fn finish(
    entry: &MethodEntry,
    prob: &OdeProblem,
    y: &[Vec<f64>],
    h: f64,
    cfg: &RunConfig,
) -> Result<Vec<f64>, IntegrationError> {
    GlmStepper::new(entry, prob, cfg)?.finish(y, h)
}

/// Full experiment: start, `round(T/h)` main steps with invariant samples
/// every `sample_stride` steps, finishing applied at each sample point.
/// On abort the samples gathered so far are returned inside the error.
pub fn run(
    entry: &MethodEntry,
    prob: &OdeProblem,
    cfg: &RunConfig,
) -> Result<Trajectory, RunFailure> {
    let started = Instant::now();
    let invariant_names: Vec<String> = prob.invariants.iter().map(|(n, _)| n.clone()).collect();
    let reference: Vec<f64> = prob.invariants.iter().map(|(_, f)| f(&prob.y0)).collect();

    let mut samples = Vec::new();
    let finish_traj = |samples: Vec<Sample>, stats: NewtonStats| Trajectory {
        invariant_names: invariant_names.clone(),
        samples,
        wall_time: started.elapsed().as_secs_f64(),
        newton_stats: stats,
    };
    let fail = |e: IntegrationError, samples: Vec<Sample>, stats: NewtonStats| RunFailure {
        error: e,
        partial: finish_traj(samples, stats),
    };

    if let Err(e) = cfg.validate() {
        return Err(fail(e, samples, NewtonStats::default()));
    }
    let mut stepper = match GlmStepper::new(entry, prob, cfg) {
        Ok(s) => s,
        Err(e) => return Err(fail(e, samples, NewtonStats::default())),
    };
    let n_steps = (cfg.t_final / cfg.h).round().max(1.0) as u64;

    let mut y = match stepper.start(&prob.y0, cfg.h) {
        Ok(y) => y,
        Err(e) => {
            let stats = stepper.stats;
            return Err(fail(e, samples, stats));
        }
    };

    let record =
        |stepper: &mut GlmStepper, y: &[Vec<f64>], step: u64, samples: &mut Vec<Sample>| {
            let estimate = stepper.finish(y, cfg.h)?;
            let errors: Vec<f64> = prob
                .invariants
                .iter()
                .zip(&reference)
                .map(|((_, f), r)| f(&estimate) - r)
                .collect();
            samples.push(Sample {
                t: step as f64 * cfg.h,
                y: estimate,
                invariant_errors: errors,
            });
            Ok::<(), IntegrationError>(())
        };

    if let Err(e) = record(&mut stepper, &y, 0, &mut samples) {
        let stats = stepper.stats;
        return Err(fail(e, samples, stats));
    }
    for step in 1..=n_steps {
        if let Err(e) = stepper.step(&mut y, cfg.h) {
            let stats = stepper.stats;
            return Err(fail(e, samples, stats));
        }
        if y.iter().flatten().any(|v| !v.is_finite()) {
            let stats = stepper.stats;
            return Err(fail(IntegrationError::NonFinite { step }, samples, stats));
        }
        if step % cfg.sample_stride as u64 == 0 {
            if let Err(e) = record(&mut stepper, &y, step, &mut samples) {
                let stats = stepper.stats;
                return Err(fail(e, samples, stats));
            }
        }
    }
    let stats = stepper.stats;
    Ok(finish_traj(samples, stats))
}

/// Integrate to the final time and return only the finished state. The
/// step size is nudged to `T / round(T/h)` so every run lands exactly on
/// `t_final` and states are comparable across step sizes.
pub fn integrate_final(
    entry: &MethodEntry,
    prob: &OdeProblem,
    h: f64,
    t_final: f64,
    cfg_base: &RunConfig,
) -> Result<Vec<f64>, IntegrationError> {
    let mut cfg = cfg_base.clone();
    cfg.h = h;
    cfg.t_final = t_final;
    cfg.validate()?;
    let n_steps = (t_final / h).round().max(1.0) as u64;
    let h_eff = t_final / n_steps as f64;
    let mut stepper = GlmStepper::new(entry, prob, &cfg)?;
    let mut y = stepper.start(&prob.y0, h_eff)?;
    for step in 1..=n_steps {
        stepper.step(&mut y, h_eff)?;
        if y.iter().flatten().any(|v| !v.is_finite()) {
            return Err(IntegrationError::NonFinite { step });
        }
    }
    stepper.finish(&y, h_eff)
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergencePoint {
    pub h: f64,
    pub global_error: f64,
    /// `log2(e(2h)/e(h))` against the previous (larger) step size.
    pub observed_order: Option<f64>,
}

/// Global-error convergence study at the final time. The reference
/// solution is computed with the Suzuki composition DIRK at one twentieth
/// of the smallest requested step. Step sizes are processed concurrently.
pub fn convergence_study(
    entry: &MethodEntry,
    prob: &OdeProblem,
    h_list: &[f64],
    t_final: f64,
) -> Result<Vec<ConvergencePoint>, IntegrationError> {
    assert!(!h_list.is_empty());
    let reference_entry = crate::tableau::registry()
        .lookup("suzuki4115")
        .expect("reference method present");
    let h_min = h_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let cfg = RunConfig::new(&entry.name, h_min, t_final);
    let y_ref = integrate_final(reference_entry, prob, h_min / 20.0, t_final, &cfg)?;

    let mut errors: Vec<(f64, Result<f64, IntegrationError>)> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &h in h_list {
            let y_ref = &y_ref;
            let cfg = &cfg;
            handles.push((
                h,
                scope.spawn(move || {
                    integrate_final(entry, prob, h, t_final, cfg).map(|y| {
                        let diff: Vec<f64> =
                            y.iter().zip(y_ref).map(|(a, b)| a - b).collect();
                        norm2(&diff)
                    })
                }),
            ));
        }
        for (h, handle) in handles {
            errors.push((h, handle.join().expect("convergence worker panicked")));
        }
    });

    let mut points = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (h, res) in errors {
        let e = res?;
        let observed_order = prev.map(|(hp, ep)| (ep / e).log2() / (hp / h).log2());
        points.push(ConvergencePoint {
            h,
            global_error: e,
            observed_order,
        });
        prev = Some((h, e));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;
    use crate::tableau::registry;

    fn free_particle() -> OdeProblem {
        OdeProblem {
            name: "free".into(),
            dim: 2,
            y0: vec![1.0, -2.0],
            f: Arc::new(|_, out| {
                out.fill(0.0);
                Ok(())
            }),
            jacobian: None,
            invariants: vec![],
            reversibility: vec![],
        }
    }

    fn rotation2d() -> OdeProblem {
        // y' = (-y2, y1): rigid rotation, |y| conserved.
        OdeProblem {
            name: "rotation".into(),
            dim: 2,
            y0: vec![1.0, 0.0],
            f: Arc::new(|y, out| {
                out[0] = -y[1];
                out[1] = y[0];
                Ok(())
            }),
            jacobian: None,
            invariants: vec![("r2".into(), Arc::new(|y: &[f64]| y[0] * y[0] + y[1] * y[1]))],
            reversibility: vec![],
        }
    }

    #[test]
    fn rk_step_zero_field_is_identity() {
        let prob = free_particle();
        let entry = registry().lookup("4123A").unwrap();
        let crate::tableau::StartScheme::Triple(t) = &entry.start else {
            panic!()
        };
        let mut stats = NewtonStats::default();
        let out = rk_step(&t.forward, &prob, &prob.y0, 0.3, 1e-13, 50, &mut stats).unwrap();
        assert_eq!(out, prob.y0);
    }

    #[test]
    fn rk_inverse_pair_roundtrip_on_kepler() {
        let prob = problems::kepler().ode_problem();
        let entry = registry().lookup("4123A").unwrap();
        let crate::tableau::StartScheme::Triple(t) = &entry.start else {
            panic!()
        };
        let mut stats = NewtonStats::default();
        let h = 0.01;
        let mid = rk_step(&t.forward, &prob, &prob.y0, h, 1e-14, 50, &mut stats).unwrap();
        let back = rk_step(
            t.inverse.as_ref().unwrap(),
            &prob,
            &mid,
            h,
            1e-14,
            50,
            &mut stats,
        )
        .unwrap();
        // R_h followed by Rhat_h returns the initial point: the tableaux
        // are exact inverses.
        for i in 0..4 {
            assert!(
                (back[i] - prob.y0[i]).abs() < 1e-12,
                "component {i}: {} vs {}",
                back[i],
                prob.y0[i]
            );
        }
    }

    #[test]
    fn midpoint_preserves_rotation_radius() {
        let prob = rotation2d();
        let entry = registry().lookup("midpoint").unwrap();
        let mut stats = NewtonStats::default();
        let rk = entry.rk_form.as_ref().unwrap();
        let out = rk_step(rk, &prob, &prob.y0, 0.2, 1e-14, 50, &mut stats).unwrap();
        let r2 = out[0] * out[0] + out[1] * out[1];
        assert!((r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lobatto3b_rejected_by_stepper() {
        let prob = free_particle();
        let entry = registry().lookup("lobatto3b").unwrap();
        let cfg = RunConfig::new("lobatto3b", 0.1, 1.0);
        assert!(matches!(
            GlmStepper::new(entry, &prob, &cfg),
            Err(IntegrationError::NotLowerTriangular(_))
        ));
    }

    #[test]
    fn start_zero_field_gives_y0_and_zero() {
        let prob = free_particle();
        for name in ["4123A", "4223A", "4124D"] {
            let entry = registry().lookup(name).unwrap();
            let cfg = RunConfig::new(name, 0.1, 1.0);
            let y = start(entry, &prob, 0.1, &cfg).unwrap();
            assert_eq!(y[0], prob.y0, "{name}");
            assert!(y[1].iter().all(|&v| v == 0.0), "{name}");
        }
    }

    #[test]
    fn glm_step_zero_field_applies_v() {
        let prob = free_particle();
        let entry = registry().lookup("4123A").unwrap();
        let cfg = RunConfig::new("4123A", 0.1, 1.0);
        let y_in = vec![vec![1.0, -2.0], vec![0.5, 0.25]];
        let out = glm_step(entry, &prob, &y_in, 0.1, &cfg).unwrap();
        assert_eq!(out[0], vec![1.0, -2.0]);
        assert_eq!(out[1], vec![-0.5, -0.25]);
    }

    #[test]
    fn start_leading_term_matches_half_h_f() {
        // y2^[0] = (h/2) f(y0) + O(h^3) for 4123A.
        let prob = problems::kepler().ode_problem();
        let entry = registry().lookup("4123A").unwrap();
        let cfg = RunConfig::new("4123A", 0.01, 1.0);
        let mut f0 = vec![0.0; 4];
        prob.eval_f(&prob.y0, &mut f0).unwrap();
        let err_at = |h: f64| -> f64 {
            let y = start(entry, &prob, h, &cfg).unwrap();
            (0..4)
                .map(|i| (y[1][i] - 0.5 * h * f0[i]).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err_at(0.01);
        let e2 = err_at(0.005);
        let ratio = e1 / e2;
        assert!(
            (7.0..9.0).contains(&ratio),
            "expected cubic leading error, got ratio {ratio}"
        );
    }

    #[test]
    fn single_step_run_composes_start_step_finish() {
        let prob = problems::kepler().ode_problem();
        let entry = registry().lookup("4124B").unwrap();
        let mut cfg = RunConfig::new("4124B", 0.01, 0.01);
        cfg.sample_stride = 1;
        let traj = run(entry, &prob, &cfg).unwrap();
        assert_eq!(traj.samples.len(), 2); // t = 0 and t = h
        assert!((traj.samples[1].t - 0.01).abs() < 1e-15);
        // The run is exactly finish(step(start(y0))).
        let y0 = start(entry, &prob, 0.01, &cfg).unwrap();
        let y1 = glm_step(entry, &prob, &y0, 0.01, &cfg).unwrap();
        let manual = finish(entry, &prob, &y1, 0.01, &cfg).unwrap();
        for (a, b) in traj.samples[1].y.iter().zip(&manual) {
            assert!((a - b).abs() < 1e-13);
        }
        // Start/finish invert each other at t = 0, and one step keeps the
        // energy error at local-truncation size.
        assert!(traj.samples[0].invariant_errors[0].abs() < 1e-12);
        assert!(traj.max_abs_error(0) < 1e-8);
    }

    #[test]
    fn compensated_zero_field_is_bit_exact() {
        // 10^6 steps of f = 0 with V = diag(1, -1): the first value is
        // bit-identical and the second flips sign each step.
        let prob = free_particle();
        let entry = registry().lookup("4123A").unwrap();
        let cfg = RunConfig::new("4123A", 0.1, 1.0);
        let mut stepper = GlmStepper::new(entry, &prob, &cfg).unwrap();
        let y10 = vec![0.1 + 0.2, -1.0 / 3.0];
        let y20 = vec![0.7, 0.1];
        let mut y = vec![y10.clone(), y20.clone()];
        for _ in 0..1_000_000u32 {
            stepper.step(&mut y, 0.1).unwrap();
        }
        assert_eq!(y[0], y10);
        assert_eq!(y[1], y20); // even number of sign flips
    }

    #[test]
    fn newton_nonconvergence_reports_stage() {
        // An absurdly stiff field with a loose iteration cap.
        let prob = OdeProblem {
            name: "stiff".into(),
            dim: 1,
            y0: vec![1.0],
            f: Arc::new(|y, out| {
                out[0] = (40.0 * y[0]).sin() * 1e8;
                Ok(())
            }),
            jacobian: None,
            invariants: vec![],
            reversibility: vec![],
        };
        let entry = registry().lookup("4123A").unwrap();
        let mut cfg = RunConfig::new("4123A", 1.0, 2.0);
        cfg.newton_max_iter = 3;
        let err = run(entry, &prob, &cfg).unwrap_err();
        assert!(matches!(
            err.error,
            IntegrationError::NewtonDivergence { .. } | IntegrationError::NonFinite { .. }
        ));
    }

    #[test]
    fn run_validates_config() {
        let prob = free_particle();
        let entry = registry().lookup("4123A").unwrap();
        let cfg = RunConfig::new("4123A", -0.1, 1.0);
        assert!(run(entry, &prob, &cfg).is_err());
    }
}
