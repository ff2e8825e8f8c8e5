//! Derivative-free scalar minimization for training variational circuits.
//!
//! The default optimizer follows the COBYLA scheme in its unconstrained
//! form: keep a simplex of n+1 points, fit a linear model of the objective
//! over it, step the best point against the model gradient by the trust
//! radius, and shrink the radius when steps stop paying off. A classic
//! Nelder-Mead simplex is available behind the same contract as a
//! cross-check. Both are deterministic; the seed is part of the contract so
//! callers can thread one source of randomness through an experiment.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("objective is not finite at the initial point")]
    NonFiniteStart,
    #[error("max_evaluations must be >= 1")]
    ZeroBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Cobyla,
    NelderMead,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizeOptions {
    pub kind: OptimizerKind,
    pub max_evaluations: usize,
    /// Initial trust radius / simplex edge.
    pub initial_step: f64,
    /// Trust radius below which the run is declared converged.
    pub tolerance: f64,
    pub seed: u64,
}

impl OptimizeOptions {
    pub fn new(kind: OptimizerKind, max_evaluations: usize, seed: u64) -> Self {
        OptimizeOptions {
            kind,
            max_evaluations,
            initial_step: 0.5,
            tolerance: 1e-6,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub n_evaluations: usize,
    pub converged: bool,
    /// Best-so-far objective after each evaluation (monotone non-increasing).
    pub trace: Vec<f64>,
}

/// Budget-enforcing evaluation wrapper. Non-finite objective values after
/// the first evaluation are treated as +inf and the search continues.
struct Evaluator<F> {
    f: F,
    budget: usize,
    n_evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
    trace: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.n_evals >= self.budget {
            return None;
        }
        let raw = (self.f)(x);
        self.n_evals += 1;
        let v = if raw.is_finite() { raw } else { f64::INFINITY };
        if v < self.best_f {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        self.trace.push(self.best_f);
        Some(v)
    }

    fn finish(self, converged: bool) -> OptimizeResult {
        OptimizeResult {
            best_params: self.best_x,
            best_value: self.best_f,
            n_evaluations: self.n_evals,
            converged,
            trace: self.trace,
        }
    }
}

/// Minimize `objective` starting from `x0` under an evaluation budget.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    x0: &[f64],
    opts: &OptimizeOptions,
) -> Result<OptimizeResult, OptimError> {
    if opts.max_evaluations == 0 {
        return Err(OptimError::ZeroBudget);
    }
    let f0 = objective(x0);
    if !f0.is_finite() {
        return Err(OptimError::NonFiniteStart);
    }
    let mut ev = Evaluator {
        f: objective,
        budget: opts.max_evaluations,
        n_evals: 1,
        best_x: x0.to_vec(),
        best_f: f0,
        trace: vec![f0],
    };
    if x0.is_empty() || opts.max_evaluations == 1 {
        return Ok(ev.finish(x0.is_empty()));
    }
    let converged = match opts.kind {
        OptimizerKind::Cobyla => cobyla_loop(&mut ev, x0, f0, opts),
        OptimizerKind::NelderMead => nelder_mead_loop(&mut ev, x0, f0, opts),
    };
    Ok(ev.finish(converged))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Solve the n x n system by Gaussian elimination with partial pivoting.
/// Returns None when the matrix is numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    Some(x)
}

fn cobyla_loop<F: FnMut(&[f64]) -> f64>(
    ev: &mut Evaluator<F>,
    x0: &[f64],
    f0: f64,
    opts: &OptimizeOptions,
) -> bool {
    let n = x0.len();
    let mut rho = opts.initial_step;
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut values: Vec<f64> = vec![f0];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += rho;
        match ev.eval(&p) {
            Some(v) => {
                simplex.push(p);
                values.push(v);
            }
            None => return false,
        }
    }

    let mut fails = 0usize;
    let mut respan_cycle = 0usize;
    loop {
        let best = argmin(&values);
        let worst = argmax(&values);

        // Pull stale vertices back into the trust region, one per iteration.
        let (far, far_dist) = farthest(&simplex, best);
        if far_dist > 2.0 * rho {
            let mut p = simplex[best].clone();
            for k in 0..n {
                p[k] += rho * (simplex[far][k] - simplex[best][k]) / far_dist;
            }
            let Some(v) = ev.eval(&p) else { return false };
            simplex[far] = p;
            values[far] = v;
            continue;
        }

        // Linear model over the simplex: rows are offsets from the best
        // vertex, right-hand side the objective differences.
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (i, p) in simplex.iter().enumerate() {
            if i == best {
                continue;
            }
            a.push(p.iter().zip(&simplex[best]).map(|(x, y)| x - y).collect());
            b.push(values[i] - values[best]);
        }
        let gradient = solve_linear(a, b);

        let improved = match gradient {
            Some(g) if norm(&g) > 1e-12 => {
                let gn = norm(&g);
                let mut xc = simplex[best].clone();
                for k in 0..n {
                    xc[k] -= rho * g[k] / gn;
                }
                let Some(fc) = ev.eval(&xc) else { return false };
                let better_than_best = fc < values[best] - 1e-12 * (1.0 + values[best].abs());
                if fc < values[worst] {
                    simplex[worst] = xc;
                    values[worst] = fc;
                }
                better_than_best
            }
            _ => {
                // Degenerate geometry or flat model: re-span one coordinate
                // direction around the best vertex.
                let k = respan_cycle % n;
                respan_cycle += 1;
                let mut p = simplex[best].clone();
                p[k] += rho;
                let Some(v) = ev.eval(&p) else { return false };
                let better = v < values[best];
                if v < values[worst] {
                    simplex[worst] = p;
                    values[worst] = v;
                }
                better
            }
        };

        if improved {
            fails = 0;
        } else {
            fails += 1;
            if fails >= 2 {
                rho *= 0.5;
                fails = 0;
                if rho < opts.tolerance {
                    return true;
                }
            }
        }
    }
}

fn nelder_mead_loop<F: FnMut(&[f64]) -> f64>(
    ev: &mut Evaluator<F>,
    x0: &[f64],
    f0: f64,
    opts: &OptimizeOptions,
) -> bool {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const BETA: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut values: Vec<f64> = vec![f0];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        match ev.eval(&p) {
            Some(v) => {
                simplex.push(p);
                values.push(v);
            }
            None => return false,
        }
    }

    loop {
        // order ascending by value
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let permuted: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let pvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = permuted;
        values = pvalues;

        // stall detection
        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|p| dist(p, &simplex[0]))
            .fold(0.0, f64::max);
        if spread.abs() < 1e-12 && diameter < opts.tolerance {
            return true;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|k| centroid[k] + ALPHA * (centroid[k] - simplex[n][k]))
            .collect();
        let Some(fr) = ev.eval(&reflect) else {
            return false;
        };

        if fr < values[0] {
            let expand: Vec<f64> = (0..n)
                .map(|k| centroid[k] + GAMMA * (reflect[k] - centroid[k]))
                .collect();
            let Some(fe) = ev.eval(&expand) else {
                return false;
            };
            if fe < fr {
                simplex[n] = expand;
                values[n] = fe;
            } else {
                simplex[n] = reflect;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflect;
            values[n] = fr;
        } else {
            let contract_base = if fr < values[n] {
                &reflect
            } else {
                &simplex[n]
            };
            let contract: Vec<f64> = (0..n)
                .map(|k| centroid[k] + BETA * (contract_base[k] - centroid[k]))
                .collect();
            let Some(fc) = ev.eval(&contract) else {
                return false;
            };
            if fc < values[n].min(fr) {
                simplex[n] = contract;
                values[n] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    let shrunk: Vec<f64> = (0..n)
                        .map(|k| simplex[0][k] + SIGMA * (simplex[i][k] - simplex[0][k]))
                        .collect();
                    let Some(fs) = ev.eval(&shrunk) else {
                        return false;
                    };
                    simplex[i] = shrunk;
                    values[i] = fs;
                }
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn argmin(values: &[f64]) -> usize {
    let mut idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[idx] {
            idx = i;
        }
    }
    idx
}

fn argmax(values: &[f64]) -> usize {
    let mut idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[idx] {
            idx = i;
        }
    }
    idx
}

fn farthest(simplex: &[Vec<f64>], best: usize) -> (usize, f64) {
    let mut idx = if best == 0 { 1 } else { 0 };
    let mut d = dist(&simplex[idx], &simplex[best]);
    for (i, p) in simplex.iter().enumerate() {
        if i == best {
            continue;
        }
        let di = dist(p, &simplex[best]);
        if di > d {
            idx = i;
            d = di;
        }
    }
    (idx, d)
}
