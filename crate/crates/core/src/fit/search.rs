use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::empirical::{EmpiricalDistribution, EmpiricalKind};
use super::simplex::{self, SimplexOptions};
use super::{ks_error_on, Cell, CellScore, FitResult, ObjectiveKind, Params, ScaleMode, SearchConfig, StartTrace};
use crate::error::{invalid, Error, Result};
use crate::mixture::ShadowedParams;
use crate::pdist::{EnvelopeModel, ProductModel};

enum Target {
    Cdf { points: Vec<(f64, f64)>, fixed_scale: Option<f64>, reference: (f64, f64) },
    Pdf { points: Vec<(f64, f64)>, norm: f64, mean_envelope: f64 },
}

struct Problem<'a> {
    target: Target,
    cfg: &'a SearchConfig,
    v_lo: f64,
    v_hi: f64,
}

fn build_product(cell: Cell, kappa: f64, kappa_hat: f64, scale: f64) -> Result<ProductModel> {
    Ok(ProductModel::new(
        ShadowedParams::new(scale, kappa, cell.mu, cell.m)?,
        ShadowedParams::new(1.0, kappa_hat, cell.mu_hat, cell.m_hat)?,
    ))
}

impl Problem<'_> {
    fn dims(&self) -> usize {
        match self.target {
            Target::Cdf { fixed_scale: Some(_), .. } => 2,
            _ => 3,
        }
    }

    fn clamp_v(&self, v: f64) -> f64 {
        v.clamp(self.v_lo, self.v_hi)
    }

    fn params(&self, x: &[f64]) -> Params {
        let scale = match self.target {
            Target::Cdf { fixed_scale: Some(s), .. } => s,
            _ => x[2].exp(),
        };
        Params { kappa: self.clamp_v(x[0]).exp_m1(), kappa_hat: self.clamp_v(x[1]).exp_m1(), scale }
    }

    fn objective(&self, cell: Cell, p: Params) -> Result<f64> {
        match &self.target {
            Target::Cdf { points, .. } => ks_error_on(points, &build_product(cell, p.kappa, p.kappa_hat, p.scale)?),
            Target::Pdf { points, norm, .. } => {
                let env = EnvelopeModel::new(build_product(cell, p.kappa, p.kappa_hat, 1.0)?, p.scale)?;
                let mut sse = 0.0;
                for &(r, f) in points {
                    let d = env.pdf(r)? - f;
                    sse += d * d;
                }
                Ok(100.0 * sse / norm)
            }
        }
    }

    /// Objective on the box, continued outside it by the distance to the box.
    fn penalised(&self, cell: Cell, x: &[f64]) -> f64 {
        let outside: f64 = x[..2].iter().map(|&v| (v - self.clamp_v(v)).abs()).sum();
        self.objective(cell, self.params(x)).unwrap_or(f64::INFINITY) + outside
    }

    /// ln of the scale that puts the model's reference quantile on the data.
    fn scale_start(&self, cell: Cell, kappa: f64, kappa_hat: f64) -> f64 {
        match &self.target {
            Target::Cdf { reference: (x, q), .. } => {
                let Ok(unit) = build_product(cell, kappa, kappa_hat, 1.0) else { return 0.0 };
                match quantile(&unit, *q) {
                    Some(z) => (x / z).ln(),
                    None => 0.0,
                }
            }
            Target::Pdf { mean_envelope, .. } => mean_envelope.ln(),
        }
    }

    fn search_cell(&self, cell: Cell) -> (CellScore, Vec<StartTrace>) {
        let cfg = self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ cell_key(cell).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let span = self.v_hi - self.v_lo;
        let n = cfg.starts;
        let step_v = (0.15 * span).max(0.05);
        let opts = SimplexOptions { x_tol: 1e-5, f_tol: 1e-10, max_evals: cfg.max_evals };
        let mut traces = Vec::with_capacity(n);
        for s in 0..n {
            let fa = (s as f64 + 0.5 + rng.random_range(-0.25..0.25)) / n as f64;
            let fb = (((3 * s + 1) % n) as f64 + 0.5 + rng.random_range(-0.25..0.25)) / n as f64;
            let mut x0 = vec![self.v_lo + fa * span, self.v_lo + fb * span];
            if self.dims() == 3 {
                let (kappa, kappa_hat) = (self.clamp_v(x0[0]).exp_m1(), self.clamp_v(x0[1]).exp_m1());
                x0.push(self.scale_start(cell, kappa, kappa_hat) + rng.random_range(-0.1..0.1));
            }
            let step: Vec<f64> = (0..x0.len()).map(|i| if i < 2 { step_v } else { 0.2 }).collect();
            let min = simplex::minimize(|x| self.penalised(cell, x), &x0, &step, opts);
            let params = self.params(&min.x);
            let objective = self.objective(cell, params).unwrap_or(f64::INFINITY);
            traces.push(StartTrace {
                cell,
                start: self.params(&x0),
                params,
                objective,
                evaluations: min.evaluations,
                converged: min.converged && objective.is_finite(),
            });
        }
        let best = traces
            .iter()
            .min_by(|a, b| a.objective.total_cmp(&b.objective))
            .expect("at least one start");
        (CellScore { cell, params: best.params, objective: best.objective }, traces)
    }
}

fn cell_key(c: Cell) -> u64 {
    ((c.mu as u64) << 48) ^ ((c.m as u64) << 32) ^ ((c.mu_hat as u64) << 16) ^ c.m_hat as u64
}

/// Smallest z with F(z) ≥ q, by bisection in ln z.
fn quantile(model: &ProductModel, q: f64) -> Option<f64> {
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    let f = |t: f64| model.cdf(t.exp()).ok();
    if f(lo)? >= q || f(hi)? < q {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= q {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi.exp())
}

fn grid_cells(cfg: &SearchConfig) -> Vec<Cell> {
    let ms = cfg.m_values(&cfg.m_grid);
    let m_hats = cfg.m_values(&cfg.m_hat_grid);
    let mut cells = Vec::new();
    for &mu in &cfg.mu_grid {
        for &m in &ms {
            for &mu_hat in &cfg.mu_hat_grid {
                for &m_hat in &m_hats {
                    cells.push(Cell { mu, m, mu_hat, m_hat });
                }
            }
        }
    }
    cells.sort();
    cells.dedup();
    cells
}

fn swap_params(p: Params) -> Params {
    Params { kappa: p.kappa_hat, kappa_hat: p.kappa, scale: p.scale }
}

fn run(problem: Problem<'_>, kind: ObjectiveKind, floor: Option<f64>, points_used: usize) -> Result<FitResult> {
    let cfg = problem.cfg;
    let cells = grid_cells(cfg);
    // Z = X·X̂ is symmetric in the two links, so a cell and its mirror image
    // share one search, always run in the canonical orientation.
    let mut canonical: Vec<Cell> = cells.iter().map(|&c| c.min(c.swapped())).collect();
    canonical.sort();
    canonical.dedup();
    let searched: Vec<(CellScore, Vec<StartTrace>)> =
        canonical.par_iter().map(|&c| problem.search_cell(c)).collect();
    let lookup = |c: Cell| searched.binary_search_by(|(s, _)| s.cell.cmp(&c)).map(|i| &searched[i]);

    let mut ranking: Vec<CellScore> = Vec::new();
    for &c in &cells {
        let canon = c.min(c.swapped());
        if c != canon && cells.binary_search(&canon).is_ok() {
            continue;
        }
        let (score, _) = lookup(canon).expect("every canonical cell was searched");
        let params = if c == canon { score.params } else { swap_params(score.params) };
        ranking.push(CellScore { cell: c, params, objective: score.objective });
    }
    ranking.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then((a.cell.m + a.cell.m_hat).cmp(&(b.cell.m + b.cell.m_hat)))
            .then((a.cell.mu + a.cell.mu_hat).cmp(&(b.cell.mu + b.cell.mu_hat)))
            .then(a.cell.cmp(&b.cell))
    });
    let best = ranking[0].clone();
    if !best.objective.is_finite() {
        return Err(Error::Numerical("no cell produced a finite objective".into()));
    }
    let trace: Vec<StartTrace> = searched.into_iter().flat_map(|(_, t)| t).collect();
    let (model, envelope_scale) = match problem.target {
        Target::Cdf { .. } => (build_product(best.cell, best.params.kappa, best.params.kappa_hat, best.params.scale)?, None),
        Target::Pdf { .. } => {
            (build_product(best.cell, best.params.kappa, best.params.kappa_hat, 1.0)?, Some(best.params.scale))
        }
    };
    Ok(FitResult {
        model,
        envelope_scale,
        cell: best.cell,
        params: best.params,
        objective: kind,
        objective_value: best.objective,
        ranking,
        trace,
        seed: cfg.seed,
        points_used,
        admissible_floor: floor,
        scale_mode: cfg.scale,
    })
}

fn kappa_box(cfg: &SearchConfig) -> (f64, f64) {
    (cfg.kappa_min.ln_1p(), cfg.kappa_max.ln_1p())
}

/// Fits a product model to samples or a tabulated CDF by minimising the
/// log-domain KS error over the integer grid of `cfg`.
pub fn fit_cdf(empirical: &EmpiricalDistribution, cfg: &SearchConfig) -> Result<FitResult> {
    cfg.validate()?;
    let fixed_scale = match (cfg.scale, empirical.kind()) {
        (_, EmpiricalKind::PdfPoints) => return Err(invalid("fit_cdf needs samples or cdf points")),
        (ScaleMode::Auto, EmpiricalKind::Samples) | (ScaleMode::FixedToMean, _) => Some(
            empirical.sample_mean().ok_or_else(|| invalid("scale fixed to the mean needs raw samples"))?,
        ),
        _ => None,
    };
    let floor = empirical.admissible_floor()?.max(cfg.min_cdf.unwrap_or(0.0));
    let points = empirical.thinned_points_above(floor, cfg.max_points)?;
    let reference = *points
        .iter()
        .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()))
        .expect("thinned points are non-empty");
    let (v_lo, v_hi) = kappa_box(cfg);
    let used = points.len();
    let problem = Problem { target: Target::Cdf { points, fixed_scale, reference }, cfg, v_lo, v_hi };
    run(problem, ObjectiveKind::KsError, Some(floor), used)
}

/// Fits an envelope model (κ, κ̂, integer cell and r̃) to a tabulated PDF by
/// minimising the mean squared error, reported in percent of the mean
/// squared empirical density.
pub fn fit_pdf_mse(empirical: &EmpiricalDistribution, cfg: &SearchConfig) -> Result<FitResult> {
    cfg.validate()?;
    if empirical.kind() != EmpiricalKind::PdfPoints {
        return Err(invalid("fit_pdf_mse needs pdf points"));
    }
    let points = empirical.points().to_vec();
    let norm: f64 = points.iter().map(|p| p.1 * p.1).sum();
    // trapezoidal E[R] of the tabulated density
    let (mut mass, mut first) = (0.0, 0.0);
    for w in points.windows(2) {
        let dx = w[1].0 - w[0].0;
        mass += 0.5 * dx * (w[0].1 + w[1].1);
        first += 0.5 * dx * (w[0].0 * w[0].1 + w[1].0 * w[1].1);
    }
    let mean_envelope = if mass > 0.0 { first / mass } else { 1.0 };
    let (v_lo, v_hi) = kappa_box(cfg);
    let used = points.len();
    let problem = Problem { target: Target::Pdf { points, norm, mean_envelope }, cfg, v_lo, v_hi };
    run(problem, ObjectiveKind::MsePercent, None, used)
}
