use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a parameter is represented inside the optimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// θ = u.
    Identity,
    /// θ = e^u, keeps θ > 0.
    Log,
    /// θ = 1 − e^u, keeps θ < 1.
    OneMinusLog,
    /// θ = lo + (hi − lo)/(1 + e^{−u}), keeps lo < θ < hi.
    Bounded(f64, f64),
}

impl Transform {
    fn to_internal(self, theta: f64) -> Result<f64> {
        match self {
            Transform::Identity => Ok(theta),
            Transform::Log if theta > 0.0 => Ok(theta.ln()),
            Transform::OneMinusLog if theta < 1.0 => Ok((1.0 - theta).ln()),
            Transform::Bounded(lo, hi) if theta > lo && theta < hi => {
                let s = (theta - lo) / (hi - lo);
                Ok((s / (1.0 - s)).ln())
            }
            _ => Err(Error::Fit(format!("initial value {theta} violates the parameter constraint"))),
        }
    }

    fn to_external(self, u: f64) -> f64 {
        match self {
            Transform::Identity => u,
            Transform::Log => u.exp(),
            Transform::OneMinusLog => 1.0 - u.exp(),
            Transform::Bounded(lo, hi) => lo + (hi - lo) / (1.0 + (-u).exp()),
        }
    }

    /// dθ/du at internal value `u`.
    fn derivative(self, u: f64) -> f64 {
        match self {
            Transform::Identity => 1.0,
            Transform::Log => u.exp(),
            Transform::OneMinusLog => -u.exp(),
            Transform::Bounded(lo, hi) => {
                let e = (-u.abs()).exp();
                (hi - lo) * e / (1.0 + e).powi(2)
            }
        }
    }
}

/// Data for a fit: abscissae, values and optional 1σ errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FitData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl FitData {
    pub fn new(x: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if x.len() != y.len() || sigma.as_ref().is_some_and(|s| s.len() != x.len()) {
            return Err(Error::Fit("x, y and sigma must have equal lengths".into()));
        }
        if let Some(s) = &sigma {
            if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::Fit("sigma must be finite and > 0".into()));
            }
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Fit("data contain non-finite values".into()));
        }
        Ok(Self { x, y, sigma })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn weight(&self, i: usize) -> f64 {
        self.sigma.as_ref().map_or(1.0, |s| 1.0 / s[i])
    }
}

/// A parametric model `y = f(θ, x)`.
pub trait FitModel {
    fn name(&self) -> String;
    fn param_names(&self) -> Vec<String>;
    fn predict(&self, theta: &[f64], x: f64) -> f64;
    /// Per-parameter constraint; defaults to unconstrained.
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Identity; self.param_names().len()]
    }
    /// Analytic `∂f/∂θ`; `None` selects central finite differences.
    fn gradient(&self, _theta: &[f64], _x: f64) -> Option<Vec<f64>> {
        None
    }
    /// Deterministic starting point derived from the data.
    fn initial_guess(&self, data: &FitData) -> Vec<f64>;
}

/// Central finite-difference gradient of `model` at `(theta, x)`.
pub fn numeric_gradient<M: FitModel + ?Sized>(model: &M, theta: &[f64], x: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(theta.len());
    let mut t = theta.to_vec();
    for i in 0..theta.len() {
        let h = 1e-6 * theta[i].abs().max(1e-12);
        t[i] = theta[i] + h;
        let fp = model.predict(&t, x);
        t[i] = theta[i] - h;
        let fm = model.predict(&t, x);
        t[i] = theta[i];
        g.push((fp - fm) / (2.0 * h));
    }
    g
}

fn gradient_of<M: FitModel + ?Sized>(model: &M, theta: &[f64], x: f64) -> Vec<f64> {
    model.gradient(theta, x).unwrap_or_else(|| numeric_gradient(model, theta, x))
}

/// Fit settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on relative step and gradient.
    pub tolerance: f64,
    /// Parameters held at the given values (by position).
    pub fixed: Vec<Option<f64>>,
    /// When no sigma is given, scale the covariance by χ²/dof.
    pub scale_covariance_without_sigma: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 200, tolerance: 1e-10, fixed: Vec::new(), scale_covariance_without_sigma: true }
    }
}

/// Result of a least-squares fit. Uncertainties are 1σ from the covariance at the optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub param_names: Vec<String>,
    pub params: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub fixed: Vec<bool>,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
    /// `√chi2`.
    pub residual_norm: f64,
    pub dof: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Condition number of the scaled normal matrix at the optimum.
    pub condition_number: f64,
    /// Covariance of the free parameters in the order of `param_names` (fixed rows are zero).
    pub covariance: Vec<Vec<f64>>,
    pub message: String,
}

impl FitReport {
    pub fn param(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.param_names.iter().position(|n| n == name)?;
        Some((self.params[i], self.uncertainties[i]))
    }

    pub fn value(&self, name: &str) -> f64 {
        self.param(name).map_or(f64::NAN, |p| p.0)
    }

    pub fn error(&self, name: &str) -> f64 {
        self.param(name).map_or(f64::NAN, |p| p.1)
    }

    /// Reduced χ².
    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof.max(1) as f64
    }

    /// Human-readable `name = value ± error` listing.
    pub fn to_text(&self) -> String {
        let mut s = format!("model: {}\n", self.model);
        for i in 0..self.params.len() {
            let tag = if self.fixed[i] { " (fixed)" } else { "" };
            s.push_str(&format!(
                "{} = {:.6e} ± {:.2e}{}\n",
                self.param_names[i], self.params[i], self.uncertainties[i], tag
            ));
        }
        s.push_str(&format!(
            "chi2 = {:.6e}\ndof = {}\nconverged = {}\niterations = {}\ncondition_number = {:.3e}\n",
            self.chi2, self.dof, self.converged, self.iterations, self.condition_number
        ));
        if !self.message.is_empty() {
            s.push_str(&format!("note = {}\n", self.message));
        }
        s
    }
}

struct Problem<'a, M: FitModel + ?Sized> {
    model: &'a M,
    data: &'a FitData,
    transforms: Vec<Transform>,
    free: Vec<usize>,
    base: Vec<f64>,
}

impl<M: FitModel + ?Sized> Problem<'_, M> {
    fn theta(&self, u: &DVector<f64>) -> Vec<f64> {
        let mut t = self.base.clone();
        for (k, &i) in self.free.iter().enumerate() {
            t[i] = self.transforms[i].to_external(u[k]);
        }
        t
    }

    fn residuals(&self, u: &DVector<f64>) -> Option<DVector<f64>> {
        let theta = self.theta(u);
        let r = DVector::from_iterator(
            self.data.len(),
            (0..self.data.len())
                .map(|i| (self.data.y[i] - self.model.predict(&theta, self.data.x[i])) * self.data.weight(i)),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    /// Jacobian of the model (not the residual) with respect to the internal
    /// parameters, rows scaled by the weights.
    fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let theta = self.theta(u);
        let mut j = DMatrix::zeros(self.data.len(), self.free.len());
        for i in 0..self.data.len() {
            let g = gradient_of(self.model, &theta, self.data.x[i]);
            let w = self.data.weight(i);
            for (k, &p) in self.free.iter().enumerate() {
                j[(i, k)] = g[p] * self.transforms[p].derivative(u[k]) * w;
            }
        }
        j
    }

    /// Jacobian with respect to the external parameters.
    fn jacobian_external(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.data.len(), self.free.len());
        for i in 0..self.data.len() {
            let g = gradient_of(self.model, theta, self.data.x[i]);
            let w = self.data.weight(i);
            for (k, &p) in self.free.iter().enumerate() {
                j[(i, k)] = g[p] * w;
            }
        }
        j
    }
}

fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    a.clone().lu().solve(b)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) least squares. Steps are only
/// accepted if they lower χ², so the residual never increases; iteration stops
/// when the relative step or the scaled gradient drops below the tolerance, or
/// after `max_iterations`.
pub fn fit_nonlinear<M: FitModel + ?Sized>(
    model: &M,
    data: &FitData,
    init: &[f64],
    opts: &FitOptions,
) -> Result<FitReport> {
    let names = model.param_names();
    let n_params = names.len();
    if init.len() != n_params {
        return Err(Error::Fit(format!("expected {n_params} initial values, got {}", init.len())));
    }
    let mut fixed = vec![None; n_params];
    for (i, f) in opts.fixed.iter().enumerate().take(n_params) {
        fixed[i] = *f;
    }
    let free: Vec<usize> = (0..n_params).filter(|&i| fixed[i].is_none()).collect();
    if data.len() <= free.len() {
        return Err(Error::Fit(format!(
            "{} data points cannot determine {} free parameters",
            data.len(),
            free.len()
        )));
    }
    let transforms = model.transforms();
    let base: Vec<f64> = (0..n_params).map(|i| fixed[i].unwrap_or(init[i])).collect();
    let mut u = DVector::zeros(free.len());
    for (k, &i) in free.iter().enumerate() {
        u[k] = transforms[i].to_internal(init[i])?;
    }
    let problem = Problem { model, data, transforms: transforms.clone(), free: free.clone(), base };

    let mut r = problem
        .residuals(&u)
        .ok_or_else(|| Error::Fit(format!("{}: model is not finite at the initial guess", model.name())))?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut message = String::new();
    while iterations < opts.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&u);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let scale: Vec<f64> = (0..free.len()).map(|k| jtj[(k, k)].max(1e-300)).collect();
        let grad_scaled = (0..free.len()).map(|k| g[k].abs() / scale[k].sqrt()).fold(0.0, f64::max);
        if grad_scaled <= opts.tolerance * cost.sqrt().max(1e-300) || cost == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                a[(k, k)] += lambda * scale[k];
            }
            let Some(step) = solve_spd(&a, &g) else {
                lambda *= 10.0;
                continue;
            };
            let u_new = &u + &step;
            if let Some(r_new) = problem.residuals(&u_new) {
                let cost_new = r_new.norm_squared();
                if cost_new <= cost {
                    let rel_step = step.norm() / (u.norm() + opts.tolerance);
                    let small_gain = cost - cost_new <= opts.tolerance * opts.tolerance * cost;
                    u = u_new;
                    r = r_new;
                    cost = cost_new;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if rel_step <= opts.tolerance || small_gain {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: at a (numerical) minimum.
            converged = true;
            message = "stopped: no decreasing step".into();
            break;
        }
        if converged {
            break;
        }
    }

    let theta = problem.theta(&u);
    let jx = problem.jacobian_external(&theta);
    let mut normal = jx.transpose() * &jx;
    let diag: Vec<f64> = (0..free.len()).map(|k| normal[(k, k)].sqrt().max(1e-300)).collect();
    let scaled = DMatrix::from_fn(free.len(), free.len(), |a, b| normal[(a, b)] / (diag[a] * diag[b]));
    let eig = scaled.symmetric_eigenvalues();
    let (emin, emax) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition_number = if emin > 0.0 { emax / emin } else { f64::INFINITY };
    if !condition_number.is_finite() || condition_number > 1e14 {
        log::warn!("{}: near-singular normal matrix (condition {condition_number:e}); regularised", model.name());
        for k in 0..free.len() {
            normal[(k, k)] += 1e-12 * diag[k] * diag[k];
        }
        if !message.is_empty() {
            message.push_str("; ");
        }
        message.push_str("near-singular Jacobian, covariance regularised");
    }
    let dof = data.len() - free.len();
    let s2 = if data.sigma.is_none() && opts.scale_covariance_without_sigma { cost / dof as f64 } else { 1.0 };
    let cov_free = normal.clone().try_inverse().unwrap_or_else(|| DMatrix::from_element(free.len(), free.len(), f64::INFINITY));
    let mut covariance = vec![vec![0.0; n_params]; n_params];
    for (a, &i) in free.iter().enumerate() {
        for (b, &k) in free.iter().enumerate() {
            covariance[i][k] = cov_free[(a, b)] * s2;
        }
    }
    let uncertainties = (0..n_params).map(|i| covariance[i][i].max(0.0).sqrt()).collect();
    if !converged {
        message = format!("no convergence after {iterations} iterations");
    }
    Ok(FitReport {
        model: model.name(),
        param_names: names,
        params: theta,
        uncertainties,
        fixed: fixed.iter().map(Option::is_some).collect(),
        chi2: cost,
        residual_norm: cost.sqrt(),
        dof,
        converged,
        iterations,
        condition_number,
        covariance,
        message,
    })
}

/// Fit from the model's own initial guess.
pub fn fit_auto<M: FitModel + ?Sized>(model: &M, data: &FitData, opts: &FitOptions) -> Result<FitReport> {
    let mut init = model.initial_guess(data);
    for (i, f) in opts.fixed.iter().enumerate() {
        if let (Some(v), Some(slot)) = (f, init.get_mut(i)) {
            *slot = *v;
        }
    }
    fit_nonlinear(model, data, &init, opts)
}
