//! One function per subcommand. Each returns the table to write.

use rayon::prelude::*;

use levyx_core::analytics::jdcev::{yield_row, JdcevParams, Truncation};
use levyx_core::analytics::rate::{dyadic, rate_study};
use levyx_core::engine::CharApprox;
use levyx_core::expansion::CoefficientSeries;
use levyx_core::model::config::ModelConfig;
use levyx_core::model::JumpFamily;
use levyx_core::monte_carlo::{simulate_nig_frozen, simulate_prices, McPayoff, SimConfig};
use levyx_core::pricer::{
    density_slice_with, invert, invert_many, smile_with, with_default_payout, OptionKind, PayoffTransform, PriceResult,
};
use levyx_core::{LevyxError, Result};

use crate::config::Loaded;
use crate::output::Table;
use crate::PayoffArg;

/// Inputs shared by every task after flags are merged into the config.
pub struct Job<'a> {
    pub loaded: &'a Loaded,
    pub order: usize,
    pub payoff: Option<PayoffArg>,
    pub strikes: Option<Vec<f64>>,
    pub seed: u64,
}

impl Job<'_> {
    fn series(&self, order: usize) -> Result<CoefficientSeries> {
        let r = &self.loaded.run;
        r.scheme.expand(&self.loaded.model, r.t, r.x, order)
    }

    fn char_at<'s>(&self, series: &'s CoefficientSeries, maturity: f64) -> Result<CharApprox<'s>> {
        let r = &self.loaded.run;
        CharApprox::new(series, r.t, r.x, maturity)
    }

    fn strikes(&self) -> Vec<f64> {
        let x = self.loaded.run.x;
        self.strikes
            .clone()
            .or_else(|| self.loaded.run.grid.strikes.clone())
            .unwrap_or_else(|| (0..13).map(|i| (x - 0.3 + 0.05 * i as f64).exp()).collect())
    }

    /// Maturities `T` (not `T - t`).
    fn maturities(&self, default: &[f64]) -> Vec<f64> {
        let t = self.loaded.run.t;
        match &self.loaded.run.grid.maturities {
            Some(m) => m.iter().map(|tau| t + tau).collect(),
            None => default.iter().map(|tau| t + tau).collect(),
        }
    }

    fn ys(&self, from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
        let g = &self.loaded.run.grid;
        let x = self.loaded.run.x;
        let (a, b, n) = (
            g.y_from.unwrap_or(x + from),
            g.y_to.unwrap_or(x + to),
            g.y_points.unwrap_or(points),
        );
        if n < 2 || a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
            return Err(LevyxError::Config(format!("bad y grid [{a}, {b}] with {n} points")));
        }
        Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
    }

    fn transform(&self, strike: f64) -> Result<PayoffTransform> {
        match self.payoff.unwrap_or(PayoffArg::Put) {
            PayoffArg::Put => PayoffTransform::put(strike),
            PayoffArg::Call => PayoffTransform::call(strike),
            PayoffArg::Digital => PayoffTransform::digital_put(strike),
            PayoffArg::Constant => Ok(PayoffTransform::constant()),
        }
    }
}

fn order_columns(prefix: &str, order: usize) -> impl Iterator<Item = String> + '_ {
    (0..=order).map(move |n| format!("{prefix}{n}"))
}

fn row_with_orders(lead: &[f64], p: &PriceResult) -> Vec<f64> {
    let mut row = lead.to_vec();
    row.extend(&p.per_order);
    row.push(p.total);
    row
}

pub fn density(job: &Job) -> Result<Table> {
    let series = job.series(job.order)?;
    let char = job.char_at(&series, job.loaded.run.maturity)?;
    let ys = job.ys(-2.0, 2.0, 201)?;
    let slice = density_slice_with(&char, &ys, &job.loaded.run.quadrature)?;
    let mut table = Table::new(
        std::iter::once("y".to_string())
            .chain(order_columns("p", job.order))
            .chain(["total".into()])
            .collect(),
    );
    for (y, p) in ys.iter().zip(&slice) {
        table.push(row_with_orders(&[*y], p));
    }
    Ok(table)
}

pub fn price(job: &Job) -> Result<Table> {
    let series = job.series(job.order)?;
    let char = job.char_at(&series, job.loaded.run.maturity)?;
    let strikes = if job.payoff == Some(PayoffArg::Constant) {
        vec![0.0]
    } else {
        job.strikes
            .clone()
            .or_else(|| job.loaded.run.grid.strikes.clone())
            .unwrap_or(vec![job.loaded.run.x.exp()])
    };
    let payoffs = strikes.iter().map(|&k| job.transform(k)).collect::<Result<Vec<_>>>()?;
    let prices = invert_many(&char, &payoffs, &job.loaded.run.quadrature)?;
    let surv = invert(&char, &PayoffTransform::constant())?;
    let mut table = Table::new(
        ["K".to_string()]
            .into_iter()
            .chain(order_columns("u", job.order))
            .chain(["total".into(), "with_default_payout".into()])
            .collect(),
    );
    for ((k, p), h) in strikes.iter().zip(prices).zip(&payoffs) {
        let full = with_default_payout(p.clone(), h.value_at_default(), &surv).total;
        let mut row = row_with_orders(&[*k], &p);
        row.push(full);
        table.push(row);
    }
    Ok(table)
}

pub fn smile(job: &Job) -> Result<Table> {
    let series = job.series(job.order)?;
    let char = job.char_at(&series, job.loaded.run.maturity)?;
    let kind = match job.payoff {
        None | Some(PayoffArg::Put) => OptionKind::Put,
        Some(PayoffArg::Call) => OptionKind::Call,
        Some(other) => {
            return Err(LevyxError::Config(format!(
                "smile needs a put or call payoff, got {other:?}"
            )))
        }
    };
    let points = smile_with(&char, &job.strikes(), kind, &job.loaded.run.quadrature)?;
    let mut table = Table::new(
        ["k".to_string(), "K".into()]
            .into_iter()
            .chain(order_columns("iv_order", job.order))
            .collect(),
    );
    for p in points {
        let mut row = vec![Some(p.log_moneyness), Some(p.strike)];
        row.extend(p.iv);
        table.rows.push(row);
    }
    Ok(table)
}

fn survival_curve(job: &Job) -> Result<Vec<(f64, PriceResult)>> {
    let series = job.series(job.order)?;
    let t = job.loaded.run.t;
    let defaults: Vec<f64> = (1..=10).map(f64::from).collect();
    job.maturities(&defaults)
        .par_iter()
        .map(|&m| Ok((m - t, invert(&job.char_at(&series, m)?, &PayoffTransform::constant())?)))
        .collect()
}

pub fn survival(job: &Job) -> Result<Table> {
    let mut table = Table::new(
        ["T-t".to_string()]
            .into_iter()
            .chain(order_columns("S", job.order))
            .chain(["total".into()])
            .collect(),
    );
    for (tau, s) in survival_curve(job)? {
        table.push(row_with_orders(&[tau], &s));
    }
    Ok(table)
}

pub fn yields(job: &Job) -> Result<Table> {
    let mut table = Table::new(
        ["T-t".to_string()]
            .into_iter()
            .chain(order_columns("Y", job.order))
            .collect(),
    );
    for (tau, s) in survival_curve(job)? {
        let mut row = vec![tau];
        row.extend((0..=job.order).map(|n| -s.partial(n).ln() / tau));
        table.push(row);
    }
    Ok(table)
}

pub fn table_yields(job: &Job) -> Result<Table> {
    let ModelConfig::Jdcev { delta, beta, b, c } = job.loaded.document.model else {
        return Err(LevyxError::Config("table-yields needs a jdcev model".into()));
    };
    let params = JdcevParams { b, c, delta, beta };
    let defaults: Vec<f64> = (1..=10).map(f64::from).collect();
    let t = job.loaded.run.t;
    let taus: Vec<f64> = job.maturities(&defaults).iter().map(|m| m - t).collect();
    let rows = taus
        .par_iter()
        .map(|&tau| yield_row(&params, tau, job.loaded.run.x, Truncation::default()))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["T-t", "Y", "Y-Y0", "Y-Y1", "Y-Y2"].map(String::from).to_vec());
    for r in rows {
        table.push(vec![r.tau, r.exact, r.gaps[0], r.gaps[1], r.gaps[2]]);
    }
    Ok(table)
}

/// Rows `n = 1..=N`, one column of `sup_y |p^{(n)} - p^{(n-1)}|` per maturity.
pub fn table_density(job: &Job) -> Result<Table> {
    let series = job.series(job.order)?;
    let ys = job.ys(-2.5, 1.0, 601)?;
    let t = job.loaded.run.t;
    let maturities = job.maturities(&[1.0, 3.0, 5.0]);
    let sups = maturities
        .iter()
        .map(|&m| {
            let slice = density_slice_with(&job.char_at(&series, m)?, &ys, &job.loaded.run.quadrature)?;
            Ok((1..=job.order)
                .map(|n| slice.iter().map(|p| p.per_order[n].abs()).fold(0.0, f64::max))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        std::iter::once("n".to_string())
            .chain(maturities.iter().map(|m| format!("tau={}", m - t)))
            .collect(),
    );
    for n in 1..=job.order {
        let mut row = vec![n as f64];
        row.extend(sups.iter().map(|s| s[n - 1]));
        table.push(row);
    }
    Ok(table)
}

/// Log-log error slopes of `u^{(n)}` for `n = 0..=N` against a higher order.
pub fn rate_study_task(job: &Job) -> Result<Table> {
    let g = &job.loaded.run.grid;
    let reference = g.reference_order.unwrap_or(job.order + 3);
    if reference <= job.order {
        return Err(LevyxError::Config(format!(
            "reference order {reference} must exceed the studied order {}",
            job.order
        )));
    }
    let (first, last) = (g.rate_first_level.unwrap_or(4), g.rate_last_level.unwrap_or(10));
    let taus = dyadic(first as i32, last as i32);
    let series = job.series(reference)?;
    let strike = job
        .strikes
        .as_ref()
        .and_then(|k| k.first().copied())
        .unwrap_or(job.loaded.run.x.exp());
    let payoff = match job.payoff {
        None => PayoffTransform::digital_put(strike)?,
        Some(_) => job.transform(strike)?,
    };
    let t = job.loaded.run.t;
    let prices = taus
        .par_iter()
        .map(|&tau| invert(&job.char_at(&series, t + tau)?, &payoff))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(["N", "slope", "stderr", "intercept"].map(String::from).to_vec());
    for n in 0..=job.order {
        let (mut i, mut j) = (0, 0);
        let est = rate_study(
            &taus,
            |_| {
                i += 1;
                Ok(prices[i - 1].partial(n))
            },
            |_| {
                j += 1;
                let p = &prices[j - 1];
                Ok((p.partial(reference), p.per_order[reference].abs()))
            },
        )?;
        table.push(vec![n as f64, est.slope, est.stderr, est.intercept]);
    }
    Ok(table)
}

pub fn mc_check(job: &Job) -> Result<Table> {
    let r = &job.loaded.run;
    let mc = &r.monte_carlo;
    let cfg = SimConfig {
        paths: mc.paths,
        steps_per_year: mc.steps_per_year,
        seed: job.seed,
        lambda_max: mc.lambda_max,
        antithetic: mc.antithetic,
    };
    let strikes = job.strikes();
    let payoffs = strikes
        .iter()
        .map(|&k| match job.payoff.unwrap_or(PayoffArg::Put) {
            PayoffArg::Put => McPayoff::Put(k),
            PayoffArg::Call => McPayoff::Call(k),
            PayoffArg::Digital => McPayoff::DigitalPut(k),
            PayoffArg::Constant => McPayoff::Constant,
        })
        .collect::<Vec<_>>();
    let estimates = match job.loaded.model.jumps {
        JumpFamily::Nig(_) => simulate_nig_frozen(&job.loaded.model, &payoffs, r.t, r.x, r.maturity, &cfg)?,
        _ => simulate_prices(&job.loaded.model, &payoffs, r.t, r.x, r.maturity, &cfg)?,
    };
    let series = job.series(job.order)?;
    let char = job.char_at(&series, r.maturity)?;
    let transforms = strikes.iter().map(|&k| job.transform(k)).collect::<Result<Vec<_>>>()?;
    let surv = invert(&char, &PayoffTransform::constant())?;
    let prices = invert_many(&char, &transforms, &r.quadrature)?;
    let mut table = Table::new(vec![
        "K".into(),
        "mc_mean".into(),
        "mc_lo".into(),
        "mc_hi".into(),
        format!("expansion_order{}", job.order),
    ]);
    for (((k, e), p), h) in strikes.iter().zip(estimates).zip(prices).zip(&transforms) {
        // the simulation pays H(0) on default, so compare against the full value
        let v = with_default_payout(p, h.value_at_default(), &surv).total;
        table.push(vec![*k, e.mean, e.ci95.0, e.ci95.1, v]);
    }
    Ok(table)
}
