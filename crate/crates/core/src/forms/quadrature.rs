//! Quadrature on the reference triangle and on faces.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss–Legendre
//! rules; `n` points per direction integrate total degree `2n − 2` exactly.
//! Integrands with an algebraic singularity along a mesh line or at a mesh
//! vertex are handled by graded collapsed rules on the touching triangles.

use crate::mesh::{Point, Triangulation};

/// Gauss–Legendre rule on [0, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton iteration on P_n from the Chebyshev-like initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Rule on the reference triangle conv{(0,0), (1,0), (0,1)}.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Collapsed Gauss rule exact for total degree `degree`.
    pub fn triangle(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let g = GaussLegendre::new(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in g.points.iter().zip(&g.weights) {
            for (&v, &wv) in g.points.iter().zip(&g.weights) {
                points.push([u, (1.0 - u) * v]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    /// `rule` applied on each of the 4^levels red-refined subtriangles.
    pub fn composite(degree: usize, levels: u32) -> Self {
        let base = Self::triangle(degree);
        let mut tris: Vec<[Point; 3]> = vec![[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(tris.len() * 4);
            for [a, b, c] in tris {
                let m = |p: Point, q: Point| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
                next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]);
            }
            tris = next;
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for [a, b, c] in tris {
            let det = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
            for (p, w) in base.points.iter().zip(&base.weights) {
                points.push([
                    a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]),
                    a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]),
                ]);
                weights.push(w * det);
            }
        }
        Self {
            points,
            weights,
            degree: base.degree,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Where an integrand may be singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singularity {
    /// The line {x : normal · x = offset}.
    Line { normal: Point, offset: f64 },
    /// A single point, expected to be a mesh vertex.
    Point(Point),
}

/// A triangle rule plus the singular set used to grade it near singularities.
#[derive(Debug, Clone)]
pub struct Integration {
    pub rule: QuadratureRule,
    pub singularity: Option<Singularity>,
    graded: GaussLegendre,
}

enum Touch {
    None,
    Edge { a: Point, b: Point, c: Point },
    Vertex { v: Point, a: Point, b: Point },
    /// Cut by, or within one diameter of, the singular line.
    Composite,
}

impl Integration {
    pub fn new(degree: usize, singularity: Option<Singularity>) -> Self {
        let rule = QuadratureRule::triangle(degree);
        let graded = GaussLegendre::new((degree / 2 + 3).max(16));
        Self {
            rule,
            singularity,
            graded,
        }
    }

    pub fn degree(&self) -> usize {
        self.rule.degree
    }

    fn classify(&self, mesh: &Triangulation, t: usize) -> Touch {
        let p = mesh.coords(t);
        let h = mesh.diameter(t);
        let tol = 1e-12 * h.max(1.0);
        match self.singularity {
            None => Touch::None,
            Some(Singularity::Point(z)) => {
                for i in 0..3 {
                    if (p[i][0] - z[0]).hypot(p[i][1] - z[1]) <= tol {
                        return Touch::Vertex {
                            v: p[i],
                            a: p[(i + 1) % 3],
                            b: p[(i + 2) % 3],
                        };
                    }
                }
                Touch::None
            }
            Some(Singularity::Line { normal, offset }) => {
                let d = p.map(|q| normal[0] * q[0] + normal[1] * q[1] - offset);
                let norm = normal[0].hypot(normal[1]);
                let on: Vec<usize> = (0..3).filter(|&i| d[i].abs() <= tol).collect();
                match on.len() {
                    3 => Touch::Composite,
                    2 => {
                        let c = (0..3).find(|i| !on.contains(i)).unwrap();
                        Touch::Edge {
                            a: p[(c + 1) % 3],
                            b: p[(c + 2) % 3],
                            c: p[c],
                        }
                    }
                    1 => {
                        let i = on[0];
                        let (a, b) = (d[(i + 1) % 3], d[(i + 2) % 3]);
                        if a * b < 0.0 {
                            Touch::Composite
                        } else {
                            Touch::Vertex {
                                v: p[i],
                                a: p[(i + 1) % 3],
                                b: p[(i + 2) % 3],
                            }
                        }
                    }
                    _ => {
                        let pos = d.iter().filter(|&&x| x > 0.0).count();
                        if (pos == 0 || pos == 3) && d.iter().all(|x| x.abs() > h * norm) {
                            Touch::None
                        } else if pos == 0 || pos == 3 {
                            // nearly singular: the plain rule loses accuracy within one diameter
                            Touch::Composite
                        } else {
                            Touch::Composite
                        }
                    }
                }
            }
        }
    }

    /// Physical quadrature points and weights on triangle `t`.
    pub fn points(&self, mesh: &Triangulation, t: usize) -> Vec<(Point, f64)> {
        match self.classify(mesh, t) {
            Touch::None => self.mapped(mesh, t, &self.rule),
            Touch::Composite => self.mapped(mesh, t, &QuadratureRule::composite(self.rule.degree, 3)),
            Touch::Edge { a, b, c } => {
                // x = (1−t)(a + s(b−a)) + t c with t = τ³; distance to ab is ∝ t.
                let two_area = 2.0 * mesh.area(t);
                let g = &self.graded;
                let mut out = Vec::with_capacity(g.points.len() * g.points.len());
                for (&s, &ws) in g.points.iter().zip(&g.weights) {
                    for (&tau, &wt) in g.points.iter().zip(&g.weights) {
                        let tt = tau * tau * tau;
                        let base = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                        let x = [
                            (1.0 - tt) * base[0] + tt * c[0],
                            (1.0 - tt) * base[1] + tt * c[1],
                        ];
                        out.push((x, ws * wt * 3.0 * tau * tau * (1.0 - tt) * two_area));
                    }
                }
                out
            }
            Touch::Vertex { v, a, b } => {
                // x = ρ(a + s(b−a)) + (1−ρ) v with ρ = τ³, graded toward v.
                let two_area = 2.0 * mesh.area(t);
                let g = &self.graded;
                let mut out = Vec::with_capacity(g.points.len() * g.points.len());
                for (&s, &ws) in g.points.iter().zip(&g.weights) {
                    for (&tau, &wt) in g.points.iter().zip(&g.weights) {
                        let rho = tau * tau * tau;
                        let base = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                        let x = [
                            rho * base[0] + (1.0 - rho) * v[0],
                            rho * base[1] + (1.0 - rho) * v[1],
                        ];
                        out.push((x, ws * wt * 3.0 * tau * tau * rho * two_area));
                    }
                }
                out
            }
        }
    }

    fn mapped(&self, mesh: &Triangulation, t: usize, rule: &QuadratureRule) -> Vec<(Point, f64)> {
        let [a, b, c] = mesh.coords(t);
        let two_area = 2.0 * mesh.area(t);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, &w)| {
                (
                    [
                        a[0] + p[0] * (b[0] - a[0]) + p[1] * (c[0] - a[0]),
                        a[1] + p[0] * (b[1] - a[1]) + p[1] * (c[1] - a[1]),
                    ],
                    w * two_area,
                )
            })
            .collect()
    }
}
