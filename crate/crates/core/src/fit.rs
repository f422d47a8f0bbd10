//! Maximum-likelihood fitting of RCON models for paired data.
//!
//! A model has one free parameter per colour class. Writing the concentration
//! matrix as `Θ = Σ_c θ_c T_c`, where `T_c` is the symmetric 0/1 indicator of
//! the class cells, the likelihood equations are
//! `tr(Θ⁻¹ T_c) = tr(S T_c)` for every class. They are solved by Fisher
//! scoring, which coincides with Newton's method here since the model is a
//! linear exponential family in `θ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Serialize, Serializer};

use crate::chisq::chisq_sf;
use crate::error::{Error, Result};
use crate::graph::{Pdcg, Vertex};

/// Sample covariance (divisor `n` unless ingested otherwise) and sample size.
#[derive(Clone, Debug)]
pub struct SampleMoments {
    s: DMatrix<f64>,
    n: usize,
    chol: Cholesky<f64, Dyn>,
}

impl SampleMoments {
    pub fn new(s: DMatrix<f64>, n: usize) -> Result<SampleMoments> {
        if !s.is_square() || s.nrows() < 2 {
            return Err(Error::Ingestion(format!(
                "covariance must be square with p >= 2, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        if n < 1 {
            return Err(Error::Ingestion("sample size must be >= 1".into()));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Ingestion("covariance has non-finite entries".into()));
        }
        let scale = s.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..s.nrows() {
            for j in 0..i {
                if (s[(i, j)] - s[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::Ingestion(format!(
                        "covariance is not symmetric at ({},{})",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let s = (&s + s.transpose()) * 0.5;
        let chol = Cholesky::new(s.clone())
            .ok_or_else(|| Error::Ingestion("covariance is not positive definite".into()))?;
        Ok(SampleMoments { s, n, chol })
    }

    /// Moments of an `n x p` data matrix, centred at the sample mean.
    /// `unbiased` switches the divisor from `n` to `n - 1`.
    pub fn from_data(data: &DMatrix<f64>, unbiased: bool) -> Result<SampleMoments> {
        let n = data.nrows();
        let divisor = if unbiased { n.saturating_sub(1) } else { n };
        if divisor == 0 {
            return Err(Error::Ingestion(format!("too few rows ({n}) for a covariance")));
        }
        let mean = data.row_mean();
        let mut centred = data.clone();
        for mut row in centred.row_iter_mut() {
            row -= &mean;
        }
        let s = centred.transpose() * &centred / divisor as f64;
        SampleMoments::new(s, n)
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.s.nrows()
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>()
    }

    /// Log-likelihood of the saturated model, `(n/2)(-log det S - p)`.
    pub fn saturated_loglik(&self) -> f64 {
        0.5 * self.n as f64 * (-self.log_det() - self.p() as f64)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }
}

/// One colour class as a list of upper-triangle cells `(row, col)`, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamClass {
    pub cells: Vec<(usize, usize)>,
}

impl ParamClass {
    fn expanded(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().flat_map(|&(i, j)| {
            let mirror = (i != j).then_some((j, i));
            std::iter::once((i, j)).chain(mirror)
        })
    }

    /// `tr(A T_c)` for symmetric `A`.
    fn trace_with(&self, a: &DMatrix<f64>) -> f64 {
        self.cells
            .iter()
            .map(|&(i, j)| if i == j { a[(i, i)] } else { 2.0 * a[(i, j)] })
            .sum()
    }
}

/// Generator index-sets of a pdRCON model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RconDesign {
    pub p: usize,
    pub classes: Vec<ParamClass>,
}

impl RconDesign {
    pub fn from_pdcg(g: &Pdcg) -> RconDesign {
        let vset = g.vset();
        let idx = |v: Vertex| (v - 1) as usize;
        let mut classes = Vec::new();
        for v in vset.vertices() {
            if vset.is_left(v) {
                if g.atomic_vertices().contains(&v) {
                    classes.push(ParamClass { cells: vec![(idx(v), idx(v))] });
                } else {
                    let t = idx(vset.twin(v));
                    classes.push(ParamClass { cells: vec![(idx(v), idx(v)), (t, t)] });
                }
            } else if g.atomic_vertices().contains(&vset.twin(v)) {
                classes.push(ParamClass { cells: vec![(idx(v), idx(v))] });
            }
        }
        let paired = g.paired_edges();
        for &e in g.edges() {
            let cell = (idx(e.lo()), idx(e.hi()));
            if paired.contains(&e) {
                let t = vset.twin_edge(e);
                classes.push(ParamClass { cells: vec![cell, (idx(t.lo()), idx(t.hi()))] });
            } else if !g.is_edge_paired(e) {
                classes.push(ParamClass { cells: vec![cell] });
            }
        }
        classes.sort_by(|a, b| a.cells[0].cmp(&b.cells[0]));
        let d = RconDesign { p: vset.p() as usize, classes };
        debug_assert_eq!(d.classes.len(), g.num_classes());
        d
    }

    pub fn num_params(&self) -> usize {
        self.classes.len()
    }

    pub fn saturated_params(&self) -> usize {
        self.p * (self.p + 1) / 2
    }

    pub fn is_saturated(&self) -> bool {
        self.num_params() == self.saturated_params()
    }

    /// `Θ = Σ_c θ_c T_c`.
    pub fn assemble(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.p, self.p);
        for (c, &t) in self.classes.iter().zip(theta) {
            for (i, j) in c.expanded() {
                m[(i, j)] = t;
            }
        }
        m
    }

    /// Class parameters read off a matrix (first cell of each class).
    pub fn params_of(&self, m: &DMatrix<f64>) -> Vec<f64> {
        self.classes.iter().map(|c| m[c.cells[0]]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Bound on the largest likelihood-equation residual, scaled by `max(1, max_i s_ii)`.
    pub tol: f64,
    /// Stop once the accepted parameter step has this infinity norm or less.
    pub step_tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tol: 1e-8, step_tol: 1e-10, max_iter: 200 }
    }
}

fn ser_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    #[serde(serialize_with = "ser_matrix")]
    pub theta_hat: DMatrix<f64>,
    pub params: Vec<f64>,
    pub loglik: f64,
    pub deviance: f64,
    pub df: usize,
    pub p_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max_c |tr(Θ̂⁻¹ T_c) - tr(S T_c)|`
    pub max_residual: f64,
}

/// `(n/2)(log det Θ - tr(S Θ))`.
pub fn log_likelihood(theta: &DMatrix<f64>, moments: &SampleMoments) -> Result<f64> {
    if theta.shape() != moments.s().shape() {
        return Err(Error::InvalidArgument("theta and S differ in shape".into()));
    }
    let chol = Cholesky::new(theta.clone())
        .ok_or_else(|| Error::NumericDomain("concentration matrix is not positive definite".into()))?;
    Ok(loglik_with(&chol, theta, moments))
}

fn loglik_with(chol: &Cholesky<f64, Dyn>, theta: &DMatrix<f64>, moments: &SampleMoments) -> f64 {
    let log_det = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let trace = moments.s().component_mul(theta).sum();
    0.5 * moments.n() as f64 * (log_det - trace)
}

/// Score vector `tr(Θ⁻¹T_c) - tr(S T_c)` (without the `n/2` factor).
fn residuals(design: &RconDesign, sigma: &DMatrix<f64>, targets: &[f64]) -> Vec<f64> {
    design.classes.iter().zip(targets).map(|(c, t)| c.trace_with(sigma) - t).collect()
}

/// `I_cd = tr(Σ T_c Σ T_d)` (without the `n/2` factor).
fn information(design: &RconDesign, sigma: &DMatrix<f64>) -> DMatrix<f64> {
    let k = design.num_params();
    let expanded: Vec<Vec<(usize, usize)>> =
        design.classes.iter().map(|c| c.expanded().collect()).collect();
    let mut info = DMatrix::zeros(k, k);
    for c in 0..k {
        for d in c..k {
            let mut acc = 0.0;
            for &(a, b) in &expanded[c] {
                for &(x, y) in &expanded[d] {
                    acc += sigma[(b, x)] * sigma[(y, a)];
                }
            }
            info[(c, d)] = acc;
            info[(d, c)] = acc;
        }
    }
    info
}

/// Analytic score `(n/2)(tr(Θ⁻¹T_c) - tr(S T_c))` at an arbitrary SPD point.
pub fn score(design: &RconDesign, theta: &DMatrix<f64>, moments: &SampleMoments) -> Result<Vec<f64>> {
    let chol = Cholesky::new(theta.clone())
        .ok_or_else(|| Error::NumericDomain("concentration matrix is not positive definite".into()))?;
    let sigma = chol.inverse();
    let targets: Vec<f64> = design.classes.iter().map(|c| c.trace_with(moments.s())).collect();
    let half_n = 0.5 * moments.n() as f64;
    Ok(residuals(design, &sigma, &targets).into_iter().map(|r| half_n * r).collect())
}

/// Fits the model; non-convergence is reported through `converged`, loss of
/// positive definiteness that step halving cannot repair is an error.
pub fn fit_mle(design: &RconDesign, moments: &SampleMoments, opts: &FitOptions) -> Result<FitResult> {
    if design.p != moments.p() {
        return Err(Error::InvalidArgument(format!(
            "design has p={} but covariance has p={}",
            design.p,
            moments.p()
        )));
    }
    if design.num_params() == 0 {
        return Err(Error::InvalidArgument("model has no parameters".into()));
    }
    let s = moments.s();
    let targets: Vec<f64> = design.classes.iter().map(|c| c.trace_with(s)).collect();
    let scale = (0..design.p).map(|i| s[(i, i)]).fold(1.0f64, f64::max);
    let tol = opts.tol * scale;

    if design.is_saturated() {
        let theta = moments.inverse();
        let sigma = s.clone();
        let max_residual = max_abs(&residuals(design, &sigma, &targets));
        return finish(design, moments, theta, 0, true, max_residual);
    }

    // diagonal start, averaged within classes; edge parameters at zero
    let mut params: Vec<f64> = design
        .classes
        .iter()
        .map(|c| {
            if c.cells[0].0 == c.cells[0].1 {
                c.cells.iter().map(|&(i, _)| 1.0 / s[(i, i)]).sum::<f64>() / c.cells.len() as f64
            } else {
                0.0
            }
        })
        .collect();
    let mut theta = design.assemble(&params);
    let mut chol = Cholesky::new(theta.clone())
        .ok_or_else(|| Error::FitFailed("diagonal start is not positive definite".into()))?;
    let mut loglik = loglik_with(&chol, &theta, moments);

    let mut iterations = 0;
    let mut converged = false;
    let mut max_residual;
    loop {
        let sigma = chol.inverse();
        let res = residuals(design, &sigma, &targets);
        max_residual = max_abs(&res);
        if max_residual <= tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        // scoring direction: solve I δ = r, the score up to n/2
        let info = information(design, &sigma);
        let rhs = DVector::from_vec(res);
        let step = match Cholesky::new(info.clone()) {
            Some(c) => c.solve(&rhs),
            None => info
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::FitFailed("singular information matrix".into()))?,
        };

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + t * d).collect();
            let trial_theta = design.assemble(&trial);
            if let Some(c) = Cholesky::new(trial_theta.clone()) {
                let ll = loglik_with(&c, &trial_theta, moments);
                if ll >= loglik - 1e-12 * loglik.abs().max(1.0) {
                    accepted = Some((trial, trial_theta, c, ll));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, trial_theta, c, ll)) = accepted else {
            return Err(Error::FitFailed("step halving could not keep Θ positive definite".into()));
        };
        let step_norm = step.iter().fold(0.0f64, |m, d| m.max((t * d).abs()));
        params = trial;
        theta = trial_theta;
        chol = c;
        loglik = ll;
        if step_norm <= opts.step_tol {
            let sigma = chol.inverse();
            max_residual = max_abs(&residuals(design, &sigma, &targets));
            // a stalled line search is not convergence
            converged = max_residual <= 1e3 * tol;
            break;
        }
    }
    finish(design, moments, theta, iterations, converged, max_residual)
}

fn finish(
    design: &RconDesign,
    moments: &SampleMoments,
    theta: DMatrix<f64>,
    iterations: usize,
    converged: bool,
    max_residual: f64,
) -> Result<FitResult> {
    let loglik = log_likelihood(&theta, moments)?;
    let deviance = (2.0 * (moments.saturated_loglik() - loglik)).max(0.0);
    let df = design.saturated_params() - design.num_params();
    let p_value = if df == 0 { 1.0 } else { chisq_sf(deviance, df as u32)? };
    Ok(FitResult {
        params: design.params_of(&theta),
        theta_hat: theta,
        loglik,
        deviance,
        df,
        p_value,
        iterations,
        converged,
        max_residual,
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `p_value > alpha` for a converged fit; unconverged fits never pass.
pub fn is_accepted(fit: &FitResult, alpha: f64) -> bool {
    fit.converged && fit.p_value > alpha
}

/// Fits the pdRCON model of `g`.
pub fn fit_pdcg(g: &Pdcg, moments: &SampleMoments, opts: &FitOptions) -> Result<FitResult> {
    fit_mle(&RconDesign::from_pdcg(g), moments, opts)
}
