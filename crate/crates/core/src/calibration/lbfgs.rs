//! Limited-memory BFGS with a backtracking (sufficient-decrease) line search.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            sufficient_decrease: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each accepted step, starting with the initial
    /// point. Non-increasing up to a relative rounding slack of `1e-12`.
    pub history: Vec<f64>,
}

/// Relative change in `f` treated as rounding noise.
const FLAT_TOLERANCE: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: returns `-H g`.
fn search_direction(g: &[f64], pairs: &VecDeque<Pair>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for p in pairs.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        for (qi, yi) in q.iter_mut().zip(&p.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = pairs.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for (p, a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &q);
        for (qi, si) in q.iter_mut().zip(&p.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

/// Minimizes `f`, which returns `(value, gradient)`. An error from `f` aborts
/// the run.
pub fn minimize<F, E>(mut f: F, x0: Vec<f64>, opts: &LbfgsOptions) -> Result<LbfgsResult, E>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), E>,
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    let mut history = vec![fx];
    let mut pairs: VecDeque<Pair> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;
    let mut gnorm = norm(&g);

    while iterations < opts.max_iterations && gnorm > opts.gradient_tolerance {
        let mut d = search_direction(&g, &pairs);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // curvature memory produced an ascent direction; restart
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if pairs.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 };

        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&trial)?;
            let armijo = ft <= fx + opts.sufficient_decrease * step * slope;
            // Near the optimum the decrease drops below the rounding of f;
            // fall back to the approximate Wolfe test on the slope instead.
            let approximate =
                ft <= fx + FLAT_TOLERANCE * fx.abs() && dot(&gt, &d) <= (2.0 * opts.sufficient_decrease - 1.0) * slope;
            if ft.is_finite() && (armijo || approximate) {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= opts.backtrack;
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            if pairs.is_empty() {
                // steepest descent cannot make progress either
                break;
            }
            pairs.clear();
            continue;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back(Pair { s, y, rho: 1.0 / sy });
        }

        x = x_new;
        fx = f_new;
        g = g_new;
        gnorm = norm(&g);
        history.push(fx);
        iterations += 1;
    }

    Ok(LbfgsResult {
        converged: gnorm <= opts.gradient_tolerance,
        x,
        value: fx,
        gradient_norm: gnorm,
        iterations,
        history,
    })
}
