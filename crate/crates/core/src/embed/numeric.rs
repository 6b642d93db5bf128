//! Multi-start Levenberg–Marquardt search for an embedding under a fixed
//! vector assignment. Free vectors are the unknowns; defined vectors are
//! normalised cross products of their inputs.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::assign::VectorAssignment;
use super::system::ConstraintSystem;
use super::Vec3;

#[derive(Debug, Clone)]
pub struct NumericConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Largest accepted |cos| over orthogonality constraints.
    pub residual_tol: f64,
    /// Smallest accepted |sin| over vertex pairs.
    pub margin: f64,
    /// Separation below which the barrier term activates.
    pub barrier: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            starts: 32,
            max_iters: 300,
            seed: 0x5eed,
            residual_tol: 1e-9,
            margin: 1e-4,
            barrier: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NumericResult {
    pub vectors: Vec<Vec3>,
    pub start: usize,
    pub iters: usize,
    pub residual: f64,
    pub min_sin: f64,
}

struct Model<'a> {
    sys: &'a ConstraintSystem,
    order: Vec<usize>,
    free: Vec<usize>,
    def: Vec<Option<(usize, usize)>>,
}

impl<'a> Model<'a> {
    fn new(sys: &'a ConstraintSystem, a: &VectorAssignment) -> Option<Self> {
        let order = a.topo_order(sys.order)?;
        let mut def = vec![None; sys.order];
        for p in &a.pairs {
            def[p.fixed] = Some((p.a, p.b));
        }
        let free = (0..sys.order).filter(|&v| def[v].is_none()).collect();
        Some(Model { sys, order, free, def })
    }

    fn vectors(&self, x: &DVector<f64>) -> Vec<Vec3> {
        let mut vs = vec![Vec3::zeros(); self.sys.order];
        for (t, &v) in self.free.iter().enumerate() {
            vs[v] = Vector3::new(x[3 * t], x[3 * t + 1], x[3 * t + 2]);
        }
        for &v in &self.order {
            if let Some((a, b)) = self.def[v] {
                let c = vs[a].cross(&vs[b]);
                let nrm = c.norm();
                vs[v] = if nrm > 1e-300 { c / nrm } else { c };
            }
        }
        vs
    }

    fn cos(u: &Vec3, v: &Vec3) -> f64 {
        let d = u.norm() * v.norm();
        if d < 1e-300 {
            1.0
        } else {
            u.dot(v) / d
        }
    }

    fn sin(u: &Vec3, v: &Vec3) -> f64 {
        let d = u.norm() * v.norm();
        if d < 1e-300 {
            0.0
        } else {
            u.cross(v).norm() / d
        }
    }

    fn residuals(&self, x: &DVector<f64>, barrier: f64) -> DVector<f64> {
        let vs = self.vectors(x);
        let n = self.sys.order;
        let mut r = Vec::with_capacity(self.sys.dots.len() + n * (n - 1) / 2);
        for &(i, j) in &self.sys.dots {
            r.push(Self::cos(&vs[i], &vs[j]));
        }
        for j in 1..n {
            for i in 0..j {
                r.push((barrier - Self::sin(&vs[i], &vs[j])).max(0.0));
            }
        }
        DVector::from_vec(r)
    }

    fn quality(&self, x: &DVector<f64>) -> (f64, f64) {
        let vs = self.vectors(x);
        let res = self
            .sys
            .dots
            .iter()
            .map(|&(i, j)| Self::cos(&vs[i], &vs[j]).abs())
            .fold(0.0, f64::max);
        let n = self.sys.order;
        let mut min_sin = f64::INFINITY;
        for j in 1..n {
            for i in 0..j {
                min_sin = min_sin.min(Self::sin(&vs[i], &vs[j]));
            }
        }
        (res, min_sin)
    }

    fn normalise(&self, x: &mut DVector<f64>) {
        for t in 0..self.free.len() {
            let mut v = Vector3::new(x[3 * t], x[3 * t + 1], x[3 * t + 2]);
            let nrm = v.norm();
            if nrm > 1e-12 {
                v /= nrm;
            }
            x[3 * t] = v.x;
            x[3 * t + 1] = v.y;
            x[3 * t + 2] = v.z;
        }
    }
}

fn lm(model: &Model, x0: DVector<f64>, cfg: &NumericConfig) -> (DVector<f64>, usize) {
    let mut x = x0;
    model.normalise(&mut x);
    let mut r = model.residuals(&x, cfg.barrier);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let p = x.len();
    let h = 1e-7;
    let mut it = 0;
    while it < cfg.max_iters {
        it += 1;
        let (res, min_sin) = model.quality(&x);
        if res < cfg.residual_tol * 1e-2 && min_sin > cfg.barrier {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), p);
        for c in 0..p {
            let mut xp = x.clone();
            xp[c] += h;
            let rp = model.residuals(&xp, cfg.barrier);
            jac.set_column(c, &((rp - &r) / h));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for d in 0..p {
                a[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut xn = &x + step;
            model.normalise(&mut xn);
            let rn = model.residuals(&xn, cfg.barrier);
            let cn = rn.norm_squared();
            if cn < cost {
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, it)
}

/// Runs the configured starts; returns the first point meeting both
/// tolerances, vectors normalised.
pub fn numeric_search(sys: &ConstraintSystem, a: &VectorAssignment, cfg: &NumericConfig) -> Option<NumericResult> {
    let model = Model::new(sys, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for start in 0..cfg.starts {
        let x0 = DVector::from_fn(3 * model.free.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let (x, iters) = lm(&model, x0, cfg);
        let (residual, min_sin) = model.quality(&x);
        if residual < cfg.residual_tol && min_sin > cfg.margin {
            let vectors = model.vectors(&x).into_iter().map(|v| v.normalize()).collect();
            return Some(NumericResult {
                vectors,
                start,
                iters,
                residual,
                min_sin,
            });
        }
    }
    None
}

/// Local refinement from a given point (e.g. a decoded solver model).
pub fn polish(sys: &ConstraintSystem, a: &VectorAssignment, start: &[Vec3], cfg: &NumericConfig) -> Option<NumericResult> {
    let model = Model::new(sys, a)?;
    let mut x0 = DVector::zeros(3 * model.free.len());
    for (t, &v) in model.free.iter().enumerate() {
        for c in 0..3 {
            x0[3 * t + c] = start[v][c];
        }
    }
    let (x, iters) = lm(&model, x0, cfg);
    let (residual, min_sin) = model.quality(&x);
    (residual < cfg.residual_tol && min_sin > cfg.margin).then(|| NumericResult {
        vectors: model.vectors(&x).into_iter().map(|v| v.normalize()).collect(),
        start: 0,
        iters,
        residual,
        min_sin,
    })
}
