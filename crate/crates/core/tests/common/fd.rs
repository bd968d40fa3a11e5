//! Finite-difference oracle for derivatives up to fourth order.

use morley_adapt::benchmarks::{ExactFn, ProblemKind, ProblemSpec, CUSP_ANGLE};
use morley_adapt::mesh::Point;
use rand::Rng;

fn binomial(k: usize, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// Central k-fold difference ∂ₓⁱ∂ᵧʲ with step h.
pub fn central(f: &dyn Fn(f64, f64) -> f64, p: Point, i: usize, j: usize, h: f64) -> f64 {
    let mut sum = 0.0;
    for a in 0..=i {
        for b in 0..=j {
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let x = p[0] + (i as f64 / 2.0 - a as f64) * h;
            let y = p[1] + (j as f64 / 2.0 - b as f64) * h;
            sum += sign * binomial(i, a) * binomial(j, b) * f(x, y);
        }
    }
    sum / h.powi((i + j) as i32)
}

/// Central differences with `steps` Richardson extrapolations: error O(h^{2 steps + 2}).
pub fn fd(f: &dyn Fn(f64, f64) -> f64, p: Point, i: usize, j: usize, h: f64, steps: usize) -> f64 {
    if i + j == 0 {
        return f(p[0], p[1]);
    }
    let mut table: Vec<f64> = (0..=steps).map(|k| central(f, p, i, j, h / 2f64.powi(k as i32))).collect();
    for level in 1..=steps {
        let factor = 4f64.powi(level as i32);
        table = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
    }
    table[0]
}

pub struct FdJet {
    pub d: [[f64; 5]; 5],
}

impl FdJet {
    pub fn new(f: &dyn Fn(f64, f64) -> f64, p: Point, h: f64, steps: usize) -> Self {
        let mut d = [[0.0; 5]; 5];
        for i in 0..=4 {
            for j in 0..=4 - i {
                d[i][j] = fd(f, p, i, j, h, steps);
            }
        }
        FdJet { d }
    }
    pub fn laplacian(&self) -> f64 {
        self.d[2][0] + self.d[0][2]
    }
    pub fn bilaplacian(&self) -> f64 {
        self.d[4][0] + 2.0 * self.d[2][2] + self.d[0][4]
    }
    pub fn hessian(&self) -> [f64; 3] {
        [self.d[2][0], self.d[1][1], self.d[0][2]]
    }
}

pub fn fd_bracket(a: &FdJet, b: &FdJet) -> f64 {
    let (p, q) = (a.hessian(), b.hessian());
    p[0] * q[2] + p[2] * q[0] - 2.0 * p[1] * q[1]
}

pub fn value_fn(u: &ExactFn) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x, y| u([x, y]).unwrap().value()
}


/// Random point of the problem's domain, away from singular sets.
pub fn sample(problem: &str, r: &mut impl Rng) -> Point {
    match problem {
        "vk-cusp" => loop {
            let rad = r.gen_range(0.2..1.4f64);
            let th = r.gen_range(0.15..CUSP_ANGLE - 0.15);
            let p = [rad * th.cos(), rad * th.sin()];
            if p[0].abs() < 0.97 && p[1].abs() < 0.97 {
                return p;
            }
        },
        _ => [r.gen_range(0.03..0.97), r.gen_range(0.03..0.97)],
    }
}

/// Terms of each strong equation at `p`, from derivatives supplied by `d(component, i, j)`.
pub fn strong_terms(kind: &ProblemKind, p: Point, d: impl Fn(usize, usize, usize) -> f64) -> Vec<Vec<f64>> {
    let bilap = |c| d(c, 4, 0) + 2.0 * d(c, 2, 2) + d(c, 0, 4);
    let lap = |c| d(c, 2, 0) + d(c, 0, 2);
    let br = |a, b| d(a, 2, 0) * d(b, 0, 2) + d(a, 0, 2) * d(b, 2, 0) - 2.0 * d(a, 1, 1) * d(b, 1, 1);
    match kind {
        ProblemKind::Biharmonic { eps, load } => vec![vec![eps * eps * bilap(0), -lap(0), -load(p)]],
        ProblemKind::VonKarman { loads } => vec![
            vec![bilap(0), -br(0, 1), -loads[0](p)],
            vec![bilap(1), 0.5 * br(0, 0), -loads[1](p)],
        ],
    }
}

/// Largest |Σ terms| / Σ |terms| over all equations.
pub fn relative_residual(terms: &[Vec<f64>]) -> f64 {
    terms
        .iter()
        .map(|t| t.iter().sum::<f64>().abs() / t.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Worst relative strong-form residual over 50 random points, once from the
/// solution's own jets and once from finite differences with base step `h`
/// (scaled by r on the cusp domain).
pub fn strong_form_residuals(problem: &ProblemSpec, name: &str, h: f64) -> (f64, f64) {
    let mut r = super::rng(21);
    let exact = problem.exact.as_ref().expect("problem has an exact solution");
    let (mut jet_worst, mut fd_worst) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = sample(name, &mut r);
        let h = if name == "vk-cusp" { h * (p[0] * p[0] + p[1] * p[1]).sqrt() } else { h };
        let jets: Vec<_> = exact.iter().map(|u| u(p).unwrap()).collect();
        let fds: Vec<FdJet> = exact.iter().map(|u| FdJet::new(&value_fn(u), p, h, 2)).collect();
        jet_worst = jet_worst.max(relative_residual(&strong_terms(&problem.kind, p, |c, i, j| jets[c].derivative(i, j))));
        fd_worst = fd_worst.max(relative_residual(&strong_terms(&problem.kind, p, |c, i, j| fds[c].d[i][j])));
    }
    (jet_worst, fd_worst)
}
