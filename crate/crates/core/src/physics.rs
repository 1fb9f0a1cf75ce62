//! PDE residual losses on the circuit surrogate.
//!
//! Derivatives of the surrogate are central finite differences of exact
//! predictions; the residual penalty plus the data MSE is the objective of a
//! physics-constrained circuit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vqc::{self, Objective, OptimizerConfig, TrainOutcome, VqcModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PdeKind {
    /// `u_t = α u_xx`
    Heat,
    /// `u_t + u u_x = ν u_xx`
    Burgers,
}

impl PdeKind {
    pub fn name(&self) -> &'static str {
        match self {
            PdeKind::Heat => "heat",
            PdeKind::Burgers => "burgers",
        }
    }
}

impl std::str::FromStr for PdeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "heat" => Ok(PdeKind::Heat),
            "burgers" => Ok(PdeKind::Burgers),
            other => Err(Error::arg(format!("unknown PDE {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Domain {
    pub fn contains(&self, x: f64, t: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.t_min..=self.t_max).contains(&t)
    }

    pub fn strictly_contains(&self, x: f64, t: f64) -> bool {
        x > self.x_min && x < self.x_max && t > self.t_min && t < self.t_max
    }

    /// Encoder inputs: space mapped onto `[−1, 1]`, time onto `[0, 1]`.
    ///
    /// With encoding scale π a full `[−1, 1]` time range would make every
    /// circuit output periodic over the time window, which rules out decaying
    /// solutions.
    pub fn normalize(&self, x: f64, t: f64) -> [f64; 2] {
        [
            2.0 * (x - self.x_min) / (self.x_max - self.x_min) - 1.0,
            (t - self.t_min) / (self.t_max - self.t_min),
        ]
    }
}

/// A labelled observation `u(x, t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPoint {
    pub x: f64,
    pub t: f64,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeTask {
    kind: PdeKind,
    diffusivity: f64,
    domain: Domain,
    collocation: Vec<(f64, f64)>,
    samples: Vec<DataPoint>,
    step: f64,
}

pub const DEFAULT_STEP: f64 = 1e-2;

impl PdeTask {
    pub fn new(
        kind: PdeKind,
        diffusivity: f64,
        domain: Domain,
        collocation: Vec<(f64, f64)>,
        samples: Vec<DataPoint>,
        step: f64,
    ) -> Result<Self> {
        if !(diffusivity > 0.0) {
            return Err(Error::arg(format!("diffusivity {diffusivity} must be positive")));
        }
        if !(domain.x_max > domain.x_min && domain.t_max > domain.t_min) {
            return Err(Error::arg("empty domain"));
        }
        if let Some(&(x, t)) = collocation.iter().find(|&&(x, t)| !domain.strictly_contains(x, t)) {
            return Err(Error::arg(format!("collocation point ({x}, {t}) not interior")));
        }
        if !(step > 0.0) {
            return Err(Error::arg("finite-difference step must be positive"));
        }
        Ok(Self {
            kind,
            diffusivity,
            domain,
            collocation,
            samples,
            step,
        })
    }

    /// Default task on `x ∈ [−1, 1]`, `t ∈ [0, 1]`: heat with `α = 0.1` and
    /// `u(x, 0) = sin(πx)`, or Burgers with `ν = 0.05` and `u(x, 0) = −sin(πx)`;
    /// zero Dirichlet boundaries, 8×8 interior collocation grid, 32 labelled
    /// initial/boundary samples.
    pub fn standard(kind: PdeKind) -> Self {
        let domain = Domain {
            x_min: -1.0,
            x_max: 1.0,
            t_min: 0.0,
            t_max: 1.0,
        };
        let diffusivity = match kind {
            PdeKind::Heat => 0.1,
            PdeKind::Burgers => 0.05,
        };
        let grid = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i + 1) as f64 / 9.0;
        let collocation = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .map(|(i, j)| (grid(domain.x_min, domain.x_max, i), grid(domain.t_min, domain.t_max, j)))
            .collect();
        let mut task = Self {
            kind,
            diffusivity,
            domain,
            collocation,
            samples: Vec::new(),
            step: DEFAULT_STEP,
        };
        let mut samples = Vec::with_capacity(32);
        for i in 0..16 {
            let x = -1.0 + 2.0 * i as f64 / 15.0;
            samples.push(DataPoint {
                x,
                t: 0.0,
                u: task.initial_condition(x),
            });
        }
        for j in 0..8 {
            let t = (j + 1) as f64 / 8.0;
            for x in [domain.x_min, domain.x_max] {
                samples.push(DataPoint { x, t, u: 0.0 });
            }
        }
        task.samples = samples;
        task
    }

    pub fn kind(&self) -> PdeKind {
        self.kind
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn collocation(&self) -> &[(f64, f64)] {
        &self.collocation
    }

    pub fn samples(&self) -> &[DataPoint] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn initial_condition(&self, x: f64) -> f64 {
        match self.kind {
            PdeKind::Heat => (PI * x).sin(),
            PdeKind::Burgers => -(PI * x).sin(),
        }
    }

    /// Reference solution of the standard problem.
    ///
    /// Heat: `sin(πx) e^{−απ²t}`. Burgers: Cole–Hopf representation,
    /// integrated numerically.
    pub fn exact_solution(&self, x: f64, t: f64) -> f64 {
        match self.kind {
            PdeKind::Heat => (PI * x).sin() * (-self.diffusivity * PI * PI * t).exp(),
            PdeKind::Burgers => burgers_cole_hopf(x, t, self.diffusivity),
        }
    }

    /// Adapter evaluating `model` in this task's physical coordinates.
    pub fn field<'a>(&'a self, model: &'a VqcModel) -> VqcField<'a> {
        VqcField {
            model,
            domain: self.domain,
        }
    }
}

/// Cole–Hopf solution of `u_t + u u_x = ν u_xx` with `u(x, 0) = −sin(πx)`:
///
/// `u = −∫ sin(π(x−η)) f(x−η) e^{−η²/4νt} dη / ∫ f(x−η) e^{−η²/4νt} dη`,
/// `f(y) = exp(−cos(πy) / 2πν)`, evaluated with the trapezoid rule after
/// substituting `η = 2√(νt) s`.
pub fn burgers_cole_hopf(x: f64, t: f64, nu: f64) -> f64 {
    if t <= 0.0 {
        return -(PI * x).sin();
    }
    let width = 2.0 * (nu * t).sqrt();
    let n = 4000;
    let s_max = 9.0;
    let ds = 2.0 * s_max / n as f64;
    // Shift the exponent by its maximum over y to keep the integrand bounded.
    let shift = 1.0 / (2.0 * PI * nu);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let s = -s_max + i as f64 * ds;
        let y = x - width * s;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let f = (-(PI * y).cos() / (2.0 * PI * nu) - shift - s * s).exp();
        num += w * (PI * y).sin() * f;
        den += w * f;
    }
    -num / den
}

/// Anything that can be evaluated at a physical point `(x, t)`.
pub trait Surrogate {
    fn value(&self, x: f64, t: f64) -> Result<f64>;
}

/// Closed-form test function.
pub struct ClosedForm<F: Fn(f64, f64) -> f64>(pub F);

impl<F: Fn(f64, f64) -> f64> Surrogate for ClosedForm<F> {
    fn value(&self, x: f64, t: f64) -> Result<f64> {
        Ok((self.0)(x, t))
    }
}

/// Circuit evaluated in physical coordinates.
pub struct VqcField<'a> {
    pub model: &'a VqcModel,
    pub domain: Domain,
}

impl Surrogate for VqcField<'_> {
    fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.model.predict_exact(&self.domain.normalize(x, t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivs {
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_xx: f64,
}

/// Five stencil points, in the order centre, x+h, x−h, t+h, t−h.
fn stencil(domain: &Domain, (x, t): (f64, f64), h: f64) -> Result<[(f64, f64); 5]> {
    if !(h > 0.0) {
        return Err(Error::arg("finite-difference step must be positive"));
    }
    let pts = [(x, t), (x + h, t), (x - h, t), (x, t + h), (x, t - h)];
    if let Some(&(px, pt)) = pts.iter().find(|&&(px, pt)| !domain.contains(px, pt)) {
        return Err(Error::arg(format!(
            "stencil point ({px}, {pt}) around ({x}, {t}) leaves the domain"
        )));
    }
    Ok(pts)
}

fn derivs_from(v: [f64; 5], h: f64) -> Derivs {
    Derivs {
        u: v[0],
        u_t: (v[3] - v[4]) / (2.0 * h),
        u_x: (v[1] - v[2]) / (2.0 * h),
        u_xx: (v[1] - 2.0 * v[0] + v[2]) / (h * h),
    }
}

/// Central-difference `(u, u_t, u_x, u_xx)` of a surrogate.
pub fn surrogate_derivs(surrogate: &impl Surrogate, domain: &Domain, point: (f64, f64), h: f64) -> Result<Derivs> {
    let pts = stencil(domain, point, h)?;
    let mut v = [0.0; 5];
    for (slot, &(x, t)) in v.iter_mut().zip(&pts) {
        *slot = surrogate.value(x, t)?;
    }
    Ok(derivs_from(v, h))
}

fn residual_from(kind: PdeKind, coef: f64, d: &Derivs) -> f64 {
    match kind {
        PdeKind::Heat => d.u_t - coef * d.u_xx,
        PdeKind::Burgers => d.u_t + d.u * d.u_x - coef * d.u_xx,
    }
}

/// `∂r/∂v_k` for the five stencil values (same order as the stencil).
fn residual_sensitivity(kind: PdeKind, coef: f64, d: &Derivs, h: f64) -> [f64; 5] {
    let ht = 1.0 / (2.0 * h);
    let hh = 1.0 / (h * h);
    match kind {
        PdeKind::Heat => [2.0 * coef * hh, -coef * hh, -coef * hh, ht, -ht],
        PdeKind::Burgers => [
            d.u_x + 2.0 * coef * hh,
            d.u * ht - coef * hh,
            -d.u * ht - coef * hh,
            ht,
            -ht,
        ],
    }
}

/// Residual of `task`'s PDE for an arbitrary surrogate at step `h`.
pub fn residual_with(surrogate: &impl Surrogate, task: &PdeTask, point: (f64, f64), h: f64) -> Result<f64> {
    let d = surrogate_derivs(surrogate, &task.domain, point, h)?;
    Ok(residual_from(task.kind, task.diffusivity, &d))
}

/// Heat: `u_t − α u_xx`; Burgers: `u_t + u u_x − ν u_xx`.
pub fn pde_residual(model: &VqcModel, task: &PdeTask, point: (f64, f64)) -> Result<f64> {
    residual_with(&task.field(model), task, point, task.step)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSpec {
    pub lambda_physics: f64,
    pub data_weight: f64,
}

impl LossSpec {
    pub fn new(lambda_physics: f64, data_weight: f64) -> Result<Self> {
        if !(lambda_physics >= 0.0) || !lambda_physics.is_finite() {
            return Err(Error::arg(format!("lambda_physics {lambda_physics} must be >= 0")));
        }
        if !(data_weight > 0.0) || !data_weight.is_finite() {
            return Err(Error::arg(format!("data_weight {data_weight} must be > 0")));
        }
        Ok(Self {
            lambda_physics,
            data_weight,
        })
    }

    pub fn unconstrained() -> Self {
        Self {
            lambda_physics: 0.0,
            data_weight: 1.0,
        }
    }
}

impl Default for LossSpec {
    /// `λ = 1`, data weight 1.
    fn default() -> Self {
        Self {
            lambda_physics: 1.0,
            data_weight: 1.0,
        }
    }
}

/// `data_weight · MSE(data) + λ · mean(residual²)` over the collocation set.
pub fn physics_loss(model: &VqcModel, task: &PdeTask, spec: &LossSpec, data: &[DataPoint]) -> Result<f64> {
    PhysicsObjective::new(task, *spec, data)?.loss(model)
}

/// Combined data + residual objective with parameter-shift gradients.
pub struct PhysicsObjective<'a> {
    task: &'a PdeTask,
    spec: LossSpec,
    data: &'a [DataPoint],
}

impl<'a> PhysicsObjective<'a> {
    pub fn new(task: &'a PdeTask, spec: LossSpec, data: &'a [DataPoint]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::arg("physics loss needs at least one data point"));
        }
        if spec.lambda_physics > 0.0 && task.collocation.is_empty() {
            return Err(Error::arg("physics loss needs collocation points"));
        }
        Ok(Self { task, spec, data })
    }

    fn uses_physics(&self) -> bool {
        self.spec.lambda_physics > 0.0
    }

    fn data_term(&self, model: &VqcModel) -> Result<f64> {
        let field = self.task.field(model);
        let mut sum = 0.0;
        for p in self.data {
            sum += (field.value(p.x, p.t)? - p.u).powi(2);
        }
        Ok(sum / self.data.len() as f64)
    }

    fn residual_term(&self, model: &VqcModel) -> Result<f64> {
        let mut sum = 0.0;
        for &pt in &self.task.collocation {
            sum += pde_residual(model, self.task, pt)?.powi(2);
        }
        Ok(sum / self.task.collocation.len() as f64)
    }
}

impl Objective for PhysicsObjective<'_> {
    fn loss(&self, model: &VqcModel) -> Result<f64> {
        let mut loss = self.spec.data_weight * self.data_term(model)?;
        if self.uses_physics() {
            loss += self.spec.lambda_physics * self.residual_term(model)?;
        }
        Ok(loss)
    }

    fn loss_and_grad(&self, model: &VqcModel) -> Result<(f64, Vec<f64>)> {
        let domain = self.task.domain;
        let mut grad = vec![0.0; model.theta().len()];
        let mut loss = 0.0;

        let w = self.spec.data_weight / self.data.len() as f64;
        for p in self.data {
            let (u, g) = model.adjoint_gradient(&domain.normalize(p.x, p.t))?;
            let r = u - p.u;
            loss += w * r * r;
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc += 2.0 * w * r * gi;
            }
        }

        if self.uses_physics() {
            let h = self.task.step;
            let w = self.spec.lambda_physics / self.task.collocation.len() as f64;
            for &pt in &self.task.collocation {
                let pts = stencil(&domain, pt, h)?;
                let mut values = [0.0; 5];
                let mut grads: Vec<Vec<f64>> = Vec::with_capacity(5);
                for (slot, &(x, t)) in values.iter_mut().zip(&pts) {
                    let (u, g) = model.adjoint_gradient(&domain.normalize(x, t))?;
                    *slot = u;
                    grads.push(g);
                }
                let d = derivs_from(values, h);
                let r = residual_from(self.task.kind, self.task.diffusivity, &d);
                let sens = residual_sensitivity(self.task.kind, self.task.diffusivity, &d, h);
                loss += w * r * r;
                for (s, g) in sens.iter().zip(&grads) {
                    let c = 2.0 * w * r * s;
                    for (acc, gi) in grad.iter_mut().zip(g) {
                        *acc += c * gi;
                    }
                }
            }
        }
        Ok((loss, grad))
    }
}

/// Train `model` on `data` with the combined objective. `λ = 0` gives the
/// unconstrained circuit.
pub fn train_surrogate(
    model: &VqcModel,
    task: &PdeTask,
    spec: &LossSpec,
    data: &[DataPoint],
    config: &OptimizerConfig,
) -> Result<TrainOutcome> {
    let objective = PhysicsObjective::new(task, *spec, data)?;
    vqc::train(model, &objective, config)
}
