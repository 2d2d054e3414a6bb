//! Derivative-free and first-order minimizers over real parameter vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerKind {
    Powell,
    NelderMead,
    #[serde(rename = "SPSA")]
    Spsa,
    ParamShiftGD,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::Powell => "Powell",
            OptimizerKind::NelderMead => "NelderMead",
            OptimizerKind::Spsa => "SPSA",
            OptimizerKind::ParamShiftGD => "ParamShiftGD",
        })
    }
}

/// Gain sequences `a_k = a/(k+1)^alpha`, `c_k = c/(k+1)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaSchedule {
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for SpsaSchedule {
    fn default() -> Self {
        SpsaSchedule { a: 0.2, c: 0.1, alpha: 0.602, gamma: 0.101 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iterations: usize,
    pub cost_tolerance: f64,
    pub param_tolerance: f64,
    /// Gradient-descent step size.
    pub learning_rate: f64,
    pub spsa: SpsaSchedule,
    /// Initial bracketing step of Powell line searches, in radians.
    pub line_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Powell,
            max_iterations: 200,
            cost_tolerance: 1e-8,
            param_tolerance: 1e-8,
            learning_rate: 0.1,
            spsa: SpsaSchedule::default(),
            line_step: 0.5,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_kind(kind: OptimizerKind) -> Self {
        OptimizerConfig { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidOptimizer(what.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.cost_tolerance > 0.0 && self.param_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.learning_rate > 0.0 && self.line_step > 0.0) {
            return bad("learning_rate and line_step must be positive");
        }
        let s = self.spsa;
        if !(s.a > 0.0 && s.c > 0.0 && s.alpha.is_finite() && s.gamma.is_finite()) {
            return bad("SPSA gains must be positive");
        }
        Ok(())
    }
}

/// Outcome of one minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub cost: f64,
    /// Cost at the start and after every iteration.
    pub cost_history: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }
}

fn start<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<(Counted<F>, f64)> {
    cfg.validate()?;
    if x0.is_empty() {
        return Err(Error::EmptyParams);
    }
    if let Some(&bad) = x0.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let mut f = Counted { f, evaluations: 0 };
    let f0 = f.eval(x0);
    if !f0.is_finite() {
        return Err(Error::NonFinite(f0));
    }
    Ok((f, f0))
}

const TINY: f64 = 1e-25;

fn decrease_converged(before: f64, after: f64, tol: f64) -> bool {
    2.0 * (before - after).abs() <= tol * (before.abs() + after.abs()) + TINY
}

// ---------------------------------------------------------------------------
// Powell

const GOLD: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105_1;
const GLIMIT: f64 = 100.0;
const LINE_TOL: f64 = 1e-10;
const BRENT_ITMAX: usize = 200;
const BRACKET_ITMAX: usize = 100;

/// Returns (a, b, c) with g(b) <= g(a), g(b) <= g(c), plus g at each.
fn bracket<G: FnMut(f64) -> f64>(g: &mut G, step: f64) -> ((f64, f64, f64), (f64, f64, f64)) {
    let (mut a, mut b) = (0.0, step);
    let (mut fa, mut fb) = (g(a), g(b));
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + GOLD * (b - a);
    let mut fc = g(c);
    let mut guard = 0;
    while fb > fc && guard < BRACKET_ITMAX {
        guard += 1;
        let r = (b - a) * (fb - fc);
        let q = (b - c) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(1e-20).copysign(q - r);
        let mut u = b - ((b - c) * q - (b - a) * r) / denom;
        let ulim = b + GLIMIT * (c - b);
        let mut fu;
        if (b - u) * (u - c) > 0.0 {
            fu = g(u);
            if fu < fc {
                return ((b, u, c), (fb, fu, fc));
            } else if fu > fb {
                return ((a, b, u), (fa, fb, fu));
            }
            u = c + GOLD * (c - b);
            fu = g(u);
        } else if (c - u) * (u - ulim) > 0.0 {
            fu = g(u);
            if fu < fc {
                b = c;
                c = u;
                u = c + GOLD * (c - b);
                fb = fc;
                fc = fu;
                fu = g(u);
            }
        } else if (u - ulim) * (ulim - c) >= 0.0 {
            u = ulim;
            fu = g(u);
        } else {
            u = c + GOLD * (c - b);
            fu = g(u);
        }
        a = b;
        b = c;
        c = u;
        fa = fb;
        fb = fc;
        fc = fu;
    }
    ((a, b, c), (fa, fb, fc))
}

/// Brent's parabolic/golden-section search inside a bracket, to an absolute
/// tolerance of `LINE_TOL * (1 + |x|)` in the line parameter.
fn brent<G: FnMut(f64) -> f64>(g: &mut G, (ax, bx, cx): (f64, f64, f64), fbx: f64) -> (f64, f64) {
    let (mut a, mut b) = if ax < cx { (ax, cx) } else { (cx, ax) };
    let (mut x, mut w, mut v) = (bx, bx, bx);
    let (mut fx, mut fw, mut fv) = (fbx, fbx, fbx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..BRENT_ITMAX {
        let xm = 0.5 * (a + b);
        let tol1 = LINE_TOL * (1.0 + x.abs());
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() >= (0.5 * q * etemp).abs() || p <= q * (a - x) || p >= q * (b - x) {
                e = if x >= xm { a - x } else { b - x };
                d = CGOLD * e;
            } else {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
            }
        } else {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = g(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            w = x;
            x = u;
            fv = fw;
            fw = fx;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                w = u;
                fv = fw;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Minimizes along unit direction `dir` from `p`; updates `p` in place and returns the new cost.
fn line_minimize<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<F>,
    p: &mut [f64],
    fp: f64,
    dir: &[f64],
    step: f64,
) -> f64 {
    let origin = p.to_vec();
    let mut trial = vec![0.0; p.len()];
    let mut g = |t: f64| {
        for ((x, o), d) in trial.iter_mut().zip(&origin).zip(dir) {
            *x = o + t * d;
        }
        if t == 0.0 {
            fp
        } else {
            f.eval(&trial)
        }
    };
    let (br, fs) = bracket(&mut g, step);
    let (t, ft) = brent(&mut g, br, fs.1);
    if ft < fp {
        for ((x, o), d) in p.iter_mut().zip(&origin).zip(dir) {
            *x = o + t * d;
        }
        ft
    } else {
        fp
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// Powell's conjugate-direction method.
///
/// Each iteration line-minimizes along every direction of the set, then
/// tries the net displacement of the cycle as a new direction, replacing
/// the direction of largest decrease when the standard test allows it.
pub fn powell_minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum> {
    let (mut f, mut fret) = start(f, x0, cfg)?;
    let n = x0.len();
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut p = x0.to_vec();
    let mut history = vec![fret];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let pt = p.clone();
        let fp = fret;
        let mut ibig = 0;
        let mut del = 0.0;
        for (i, d) in dirs.iter().enumerate() {
            let before = fret;
            fret = line_minimize(&mut f, &mut p, fret, d, cfg.line_step);
            if before - fret > del {
                del = before - fret;
                ibig = i;
            }
        }
        history.push(fret);
        let moved = p.iter().zip(&pt).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        if decrease_converged(fp, fret, cfg.cost_tolerance) || moved <= cfg.param_tolerance {
            converged = true;
            break;
        }
        let xit: Vec<f64> = p.iter().zip(&pt).map(|(a, b)| a - b).collect();
        let ptt: Vec<f64> = p.iter().zip(&pt).map(|(a, b)| 2.0 * a - b).collect();
        let fptt = f.eval(&ptt);
        if fptt < fp {
            let t = 2.0 * (fp - 2.0 * fret + fptt) * (fp - fret - del).powi(2)
                - del * (fp - fptt).powi(2);
            if t < 0.0 {
                if let Some(u) = unit(&xit) {
                    fret = line_minimize(&mut f, &mut p, fret, &u, cfg.line_step);
                    dirs[ibig] = dirs[n - 1].clone();
                    dirs[n - 1] = u;
                }
            }
        }
    }
    Ok(Minimum {
        params: p,
        cost: fret,
        cost_history: history,
        evaluations: f.evaluations,
        iterations,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Nelder-Mead

const NM_REFLECT: f64 = 1.0;
const NM_EXPAND: f64 = 2.0;
const NM_CONTRACT: f64 = 0.5;
const NM_SHRINK: f64 = 0.5;
const NM_INITIAL_STEP: f64 = 0.1;

pub fn nelder_mead_minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum> {
    let (mut f, f0) = start(f, x0, cfg)?;
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += NM_INITIAL_STEP;
        let fx = f.eval(&x);
        simplex.push((x, fx));
    }
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let lerp = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fl, fh) = (simplex[0].1, simplex[n].1);
        history.push(fl);
        let size = simplex[1..].iter().fold(0.0, |m: f64, (x, _)| {
            x.iter().zip(&simplex[0].0).fold(m, |m, (a, b)| m.max((a - b).abs()))
        });
        if size <= cfg.param_tolerance {
            converged = true;
            break;
        }
        if decrease_converged(fh, fl, cfg.cost_tolerance) {
            // a level simplex can straddle the minimum; check its centre too
            let mut centre = vec![0.0; n];
            for (x, _) in &simplex {
                centre.iter_mut().zip(x).for_each(|(c, v)| *c += v / (n + 1) as f64);
            }
            let fc = f.eval(&centre);
            if decrease_converged(fh, fc.min(fl), cfg.cost_tolerance) {
                converged = true;
                break;
            }
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / n as f64);
        }
        let worst = simplex[n].0.clone();
        let xr = lerp(&centroid, &worst, -NM_REFLECT);
        let fr = f.eval(&xr);
        if fr < fl {
            let xe = lerp(&centroid, &worst, -NM_EXPAND);
            let fe = f.eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc, accept) = if fr < fh {
                let xc = lerp(&centroid, &xr, NM_CONTRACT);
                let fc = f.eval(&xc);
                (xc, fc, fc <= fr)
            } else {
                let xc = lerp(&centroid, &worst, NM_CONTRACT);
                let fc = f.eval(&xc);
                (xc, fc, fc < fh)
            };
            if accept {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &vertex.0, NM_SHRINK);
                    let fx = f.eval(&x);
                    *vertex = (x, fx);
                }
            }
        }
    }
    let (params, cost) = simplex.swap_remove(0);
    Ok(Minimum { params, cost, cost_history: history, evaluations: f.evaluations, iterations, converged })
}

// ---------------------------------------------------------------------------
// SPSA

/// Simultaneous-perturbation stochastic approximation with Rademacher
/// perturbations. Always runs `max_iterations` steps and returns the best
/// iterate seen; `converged` reports whether the best cost stayed put over
/// the final fifth of the run.
pub fn spsa_minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum> {
    let (mut f, f0) = start(f, x0, cfg)?;
    let s = cfg.spsa;
    let n = x0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = x0.to_vec();
    let mut best = (x.clone(), f0);
    let mut history = vec![f0];
    let mut best_history = vec![f0];
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for k in 0..cfg.max_iterations {
        let kk = (k + 1) as f64;
        let ak = s.a / kk.powf(s.alpha);
        let ck = s.c / kk.powf(s.gamma);
        let delta: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        for i in 0..n {
            plus[i] = x[i] + ck * delta[i];
            minus[i] = x[i] - ck * delta[i];
        }
        let diff = f.eval(&plus) - f.eval(&minus);
        for i in 0..n {
            x[i] -= ak * diff / (2.0 * ck * delta[i]);
        }
        let fx = f.eval(&x);
        if fx < best.1 {
            best = (x.clone(), fx);
        }
        history.push(fx);
        best_history.push(best.1);
    }
    let iterations = cfg.max_iterations;
    let checkpoint = best_history[(iterations * 4) / 5];
    let converged =
        (checkpoint - best.1).abs() <= cfg.cost_tolerance * best.1.abs().max(1.0);
    Ok(Minimum {
        params: best.0,
        cost: best.1,
        cost_history: history,
        evaluations: f.evaluations,
        iterations,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Gradient descent

/// Fixed-step gradient descent driven by an exact gradient oracle.
pub fn gradient_descent_minimize<F, G>(f: F, mut grad: G, x0: &[f64], cfg: &OptimizerConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let (mut f, mut fx) = start(f, x0, cfg)?;
    let mut x = x0.to_vec();
    let mut history = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let g = grad(&x);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm <= cfg.param_tolerance {
            converged = true;
            break;
        }
        x.iter_mut().zip(&g).for_each(|(a, b)| *a -= cfg.learning_rate * b);
        let next = f.eval(&x);
        if !next.is_finite() {
            return Err(Error::NonFinite(next));
        }
        history.push(next);
        let done = decrease_converged(fx, next, cfg.cost_tolerance);
        fx = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(Minimum { params: x, cost: fx, cost_history: history, evaluations: f.evaluations, iterations, converged })
}
