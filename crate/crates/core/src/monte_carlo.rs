//! Path simulation of the defaultable jump-diffusion.
//!
//! Gaussian-jump models use an Euler scheme on `X`:
//!
//! ```text
//! X += (μ(t,X) - λ(t,X) m(t,X)) dt + sqrt(2 a(t,X) dt) Z + Σ accepted jumps
//! ```
//!
//! where `μ` is the drift that makes `e^X` a martingale before killing. The
//! jump integral is compensated by `λ m` in the drift and by
//! `λ(e^{m+δ²/2} - 1 - m)` inside `μ`, so raw jump sizes are added as drawn.
//! Jump times come from a Poisson stream at the bound `λ_max`, each candidate
//! kept with probability `λ(t_k, X_k) / λ_max` using the state at the start
//! of the step. Default happens once the trapezoidal integral of `γ` passes
//! an independent `Exp(1)` draw; defaulted paths pay `H(0)`.
//!
//! Bias sources: Euler drift and diffusion freezing over a step, jump
//! intensity frozen at the step start, and trapezoidal hazard.
//!
//! Each path owns a ChaCha stream selected by its index, and paths are summed
//! in fixed-size chunks merged in order, so results do not depend on the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, InverseGaussian, StandardNormal};
use rayon::prelude::*;

use crate::error::{LevyxError, Result};
use crate::model::{JumpFamily, ModelSpec};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    /// Thinning bound; taken as 1.25 times the lattice maximum when absent.
    pub lambda_max: Option<f64>,
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            steps_per_year: 500,
            seed: 20_240_601,
            lambda_max: None,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McPayoff {
    Call(f64),
    Put(f64),
    DigitalPut(f64),
    /// Pays one on survival.
    Constant,
    /// Pays `e^{X_T}` on survival.
    Exponential,
}

impl McPayoff {
    fn on_survival(&self, x: f64) -> f64 {
        match *self {
            McPayoff::Call(k) => (x.exp() - k).max(0.0),
            McPayoff::Put(k) => (k - x.exp()).max(0.0),
            McPayoff::DigitalPut(k) => {
                if x.exp() < k {
                    1.0
                } else {
                    0.0
                }
            }
            McPayoff::Constant => 1.0,
            McPayoff::Exponential => x.exp(),
        }
    }

    /// `H(0)`: the payoff once the asset has defaulted to zero.
    fn on_default(&self) -> f64 {
        match *self {
            McPayoff::Put(k) => k,
            McPayoff::DigitalPut(_) => 1.0,
            McPayoff::Call(_) | McPayoff::Constant | McPayoff::Exponential => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McDiagnostics {
    pub steps: usize,
    /// Candidate jump events generated at the thinning bound.
    pub candidates: u64,
    pub accepted: u64,
    /// Times a path met an intensity above its bound and doubled it.
    pub bound_doublings: u64,
    pub lambda_max: f64,
}

impl McDiagnostics {
    pub fn acceptance_ratio(&self) -> f64 {
        self.accepted as f64 / self.candidates.max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_paths: usize,
    pub n_defaulted: usize,
    pub diagnostics: McDiagnostics,
}

impl MCEstimate {
    pub fn contains(&self, v: f64) -> bool {
        self.ci95.0 <= v && v <= self.ci95.1
    }
}

/// Per-chunk sums, merged in chunk order.
#[derive(Debug, Clone, Default)]
struct Partial {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    samples: usize,
    defaulted: usize,
    candidates: u64,
    accepted: u64,
    doublings: u64,
}

impl Partial {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            sum_sq: vec![0.0; n],
            ..Self::default()
        }
    }

    fn merge(&mut self, other: &Partial) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.samples += other.samples;
        self.defaulted += other.defaulted;
        self.candidates += other.candidates;
        self.accepted += other.accepted;
        self.doublings += other.doublings;
    }
}

/// Terminal state of one path.
struct PathEnd {
    x: f64,
    defaulted: bool,
}

struct Counters {
    candidates: u64,
    accepted: u64,
    doublings: u64,
}

fn step_grid(tau: f64, steps_per_year: usize) -> Result<(usize, f64)> {
    if steps_per_year == 0 {
        return Err(LevyxError::Config("steps_per_year must be positive".into()));
    }
    let steps = ((tau * steps_per_year as f64).ceil() as usize).max(1);
    Ok((steps, tau / steps as f64))
}

fn lattice_max(model: &ModelSpec, t: f64, maturity: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let (lo, hi) = model.domain.x;
    let mut best: f64 = 0.0;
    for i in 0..=20 {
        let s = t + (maturity - t) * i as f64 / 20.0;
        for j in 0..=200 {
            let x = lo + (hi - lo) * j as f64 / 200.0;
            let v = f(s, x);
            if v.is_finite() {
                best = best.max(v);
            }
        }
    }
    best
}

/// Runs `paths` samples through `sample` in deterministic chunks.
fn run_chunks(
    cfg: &SimConfig,
    payoffs: &[McPayoff],
    sample: impl Fn(&mut ChaCha8Rng, f64, &mut Counters) -> Result<PathEnd> + Sync,
) -> Result<Partial> {
    if cfg.paths == 0 {
        return Err(LevyxError::Config("paths must be positive".into()));
    }
    let samples = if cfg.antithetic {
        cfg.paths.div_ceil(2)
    } else {
        cfg.paths
    };
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Partial> {
            let mut part = Partial::new(payoffs.len());
            let mut counters = Counters {
                candidates: 0,
                accepted: 0,
                doublings: 0,
            };
            for idx in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(idx as u64);
                let signs: &[f64] = if cfg.antithetic { &[1.0, -1.0] } else { &[1.0] };
                let mut values = vec![0.0; payoffs.len()];
                for &sign in signs {
                    let mut path_rng = rng.clone();
                    let end = sample(&mut path_rng, sign, &mut counters)?;
                    if end.defaulted {
                        part.defaulted += 1;
                    }
                    for (v, p) in values.iter_mut().zip(payoffs) {
                        *v += if end.defaulted {
                            p.on_default()
                        } else {
                            p.on_survival(end.x)
                        };
                    }
                }
                let k = signs.len() as f64;
                for (j, v) in values.iter().enumerate() {
                    let v = v / k;
                    part.sum[j] += v;
                    part.sum_sq[j] += v * v;
                }
                part.samples += 1;
            }
            part.candidates = counters.candidates;
            part.accepted = counters.accepted;
            part.doublings = counters.doublings;
            Ok(part)
        })
        .collect::<Result<_>>()?;
    let mut total = Partial::new(payoffs.len());
    for p in &partials {
        total.merge(p);
    }
    Ok(total)
}

fn estimates(total: &Partial, diagnostics: McDiagnostics, n_paths: usize) -> Vec<MCEstimate> {
    let n = total.samples as f64;
    total
        .sum
        .iter()
        .zip(&total.sum_sq)
        .map(|(s, sq)| {
            let mean = s / n;
            let var = ((sq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
            let stderr = (var / n).sqrt();
            MCEstimate {
                mean,
                stderr,
                ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
                n_paths,
                n_defaulted: total.defaulted,
                diagnostics,
            }
        })
        .collect()
}

/// Prices several payoffs on one set of paths of a Gaussian-jump model.
pub fn simulate_prices(
    model: &ModelSpec,
    payoffs: &[McPayoff],
    t: f64,
    x: f64,
    maturity: f64,
    cfg: &SimConfig,
) -> Result<Vec<MCEstimate>> {
    if !(maturity > t) {
        return Err(LevyxError::Domain(format!("maturity {maturity} must exceed t = {t}")));
    }
    let gauss = match &model.jumps {
        JumpFamily::Gaussian(g) => Some(g),
        JumpFamily::None => None,
        JumpFamily::Nig(_) => {
            return Err(LevyxError::Domain(
                "NIG models are simulated with simulate_nig_frozen".into(),
            ))
        }
    };
    let (steps, dt) = step_grid(maturity - t, cfg.steps_per_year)?;
    let sup = match gauss {
        Some(g) => lattice_max(model, t, maturity, |s, y| g.intensity.value(s, y)),
        None => 0.0,
    };
    let bound0 = match cfg.lambda_max {
        Some(b) if b < sup => {
            return Err(LevyxError::Config(format!(
                "lambda_max = {b} is below the intensity maximum {sup} on the domain lattice"
            )))
        }
        Some(b) => b,
        None => 1.25 * sup,
    };

    let sample = |rng: &mut ChaCha8Rng, sign: f64, counters: &mut Counters| -> Result<PathEnd> {
        let exp_draw: f64 = Exp1.sample(rng);
        let mut bound = bound0;
        let mut next_event = if bound > 0.0 {
            let e: f64 = Exp1.sample(rng);
            t + e / bound
        } else {
            f64::INFINITY
        };
        let mut xk = x;
        let mut hazard = 0.0;
        let mut gamma_prev = model.gamma_at(t, xk)?;
        for k in 0..steps {
            let s = t + k as f64 * dt;
            let s_next = s + dt;
            let a = model.a_at(s, xk)?;
            let mu = model.martingale_drift(s, xk)?;
            let z: f64 = StandardNormal.sample(rng);
            let mut dx = (2.0 * a * dt).sqrt() * sign * z;
            if let Some(g) = gauss {
                let lam = g.intensity.value(s, xk);
                let m = g.mean.value(s, xk);
                let sd = g.std_dev.value(s, xk);
                if lam > bound {
                    while lam > bound {
                        bound *= 2.0;
                        counters.doublings += 1;
                    }
                    let e: f64 = Exp1.sample(rng);
                    next_event = s + e / bound;
                }
                dx += (mu - lam * m) * dt;
                while next_event < s_next {
                    counters.candidates += 1;
                    let u: f64 = rng.random();
                    if u * bound < lam {
                        counters.accepted += 1;
                        let j: f64 = StandardNormal.sample(rng);
                        dx += m + sd * sign * j;
                    }
                    let e: f64 = Exp1.sample(rng);
                    next_event += e / bound;
                }
            } else {
                dx += mu * dt;
            }
            xk += dx;
            if !xk.is_finite() {
                return Err(LevyxError::Domain(format!("path left the real line at t = {s_next}")));
            }
            let gamma_next = model.gamma_at(s_next, xk)?;
            hazard += 0.5 * (gamma_prev + gamma_next) * dt;
            gamma_prev = gamma_next;
            if hazard >= exp_draw {
                return Ok(PathEnd { x: xk, defaulted: true });
            }
        }
        Ok(PathEnd {
            x: xk,
            defaulted: false,
        })
    };

    let total = run_chunks(cfg, payoffs, sample)?;
    let diagnostics = McDiagnostics {
        steps,
        candidates: total.candidates,
        accepted: total.accepted,
        bound_doublings: total.doublings,
        lambda_max: bound0,
    };
    Ok(estimates(&total, diagnostics, cfg.paths))
}

pub fn simulate_price(
    model: &ModelSpec,
    payoff: McPayoff,
    t: f64,
    x: f64,
    maturity: f64,
    cfg: &SimConfig,
) -> Result<MCEstimate> {
    Ok(simulate_prices(model, &[payoff], t, x, maturity, cfg)?.remove(0))
}

/// NIG-like model simulated with parameters frozen at the start of each
/// step. Per step the jump part is an NIG increment with scale `δ(t,X) dt`,
/// drawn as `β Z + sqrt(Z) N` with `Z` inverse Gaussian of mean
/// `δ dt / sqrt(α² - β²)` and shape `(δ dt)²`. The drift
/// `δ (sqrt(α² - (β+1)²) - sqrt(α² - β²))` makes each frozen step a
/// martingale for `e^X`, so the step is exact in law when `δ` is constant
/// and biased by the freezing otherwise.
pub fn simulate_nig_frozen(
    model: &ModelSpec,
    payoffs: &[McPayoff],
    t: f64,
    x: f64,
    maturity: f64,
    cfg: &SimConfig,
) -> Result<Vec<MCEstimate>> {
    if !(maturity > t) {
        return Err(LevyxError::Domain(format!("maturity {maturity} must exceed t = {t}")));
    }
    let JumpFamily::Nig(nig) = &model.jumps else {
        return Err(LevyxError::Domain(
            "simulate_nig_frozen needs an NIG jump family".into(),
        ));
    };
    let (alpha, beta) = (nig.alpha, nig.beta);
    if !(alpha > beta.abs() && alpha > (beta + 1.0).abs()) {
        return Err(LevyxError::Domain(format!(
            "NIG parameters need alpha > |beta| and alpha > |beta + 1|; got alpha = {alpha}, beta = {beta}"
        )));
    }
    let root0 = (alpha * alpha - beta * beta).sqrt();
    let root1 = (alpha * alpha - (beta + 1.0) * (beta + 1.0)).sqrt();
    let (steps, dt) = step_grid(maturity - t, cfg.steps_per_year)?;

    let sample = |rng: &mut ChaCha8Rng, sign: f64, _: &mut Counters| -> Result<PathEnd> {
        let exp_draw: f64 = Exp1.sample(rng);
        let mut xk = x;
        let mut hazard = 0.0;
        let mut gamma_prev = model.gamma_at(t, xk)?;
        for k in 0..steps {
            let s = t + k as f64 * dt;
            let scale = nig.scale.value(s, xk);
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(LevyxError::Domain(format!("NIG scale {scale} at (t, x) = ({s}, {xk})")));
            }
            let a = model.a_at(s, xk)?;
            let g = model.gamma_at(s, xk)?;
            let d = scale * dt;
            let ig = InverseGaussian::new(d / root0, d * d)
                .map_err(|e| LevyxError::Domain(format!("inverse Gaussian draw: {e}")))?;
            let zsub: f64 = ig.sample(rng);
            let n1: f64 = StandardNormal.sample(rng);
            let n2: f64 = StandardNormal.sample(rng);
            let drift = g - a + scale * (root1 - root0);
            xk += drift * dt + (2.0 * a * dt).sqrt() * sign * n1 + beta * zsub + zsub.sqrt() * sign * n2;
            let gamma_next = model.gamma_at(s + dt, xk)?;
            hazard += 0.5 * (gamma_prev + gamma_next) * dt;
            gamma_prev = gamma_next;
            if hazard >= exp_draw {
                return Ok(PathEnd { x: xk, defaulted: true });
            }
        }
        Ok(PathEnd {
            x: xk,
            defaulted: false,
        })
    };
    let total = run_chunks(cfg, payoffs, sample)?;
    let diagnostics = McDiagnostics {
        steps,
        ..McDiagnostics::default()
    };
    Ok(estimates(&total, diagnostics, cfg.paths))
}

/// Runs a scheme at `steps_per_year` and at twice that; returns both.
pub fn step_halving<F>(cfg: &SimConfig, mut run: F) -> Result<(MCEstimate, MCEstimate)>
where
    F: FnMut(&SimConfig) -> Result<MCEstimate>,
{
    let coarse = run(cfg)?;
    let fine_cfg = SimConfig {
        steps_per_year: 2 * cfg.steps_per_year,
        ..*cfg
    };
    let fine = run(&fine_cfg)?;
    Ok((coarse, fine))
}
