use nalgebra::{DMatrix, DVector};

use super::linalg::{add_identity, jordan_divide, jordan_product, max_step, max_step_to_identity, ConeDims, NtScaling};
use super::{dual_objective, kkt_residuals, ConeProblem, ConeSolution, SolveStatus, SolverError, SolverOptions};

// Static regularization of the reduced KKT system; removed by iterative refinement.
const REG: f64 = 1e-11;
const REFINE_STEPS: usize = 3;

/// `min cᵀx  s.t.  A x = b,  G x + s = h,  s ∈ K`.
struct Standard {
    n: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    c: DVector<f64>,
    dims: ConeDims,
    // bookkeeping to map multipliers back
    fixed: Vec<usize>,
    lower_rows: Vec<usize>,
    upper_rows: Vec<usize>,
}

fn standardize(p: &ConeProblem) -> Standard {
    let n = p.n_vars();
    let fixed: Vec<usize> = (0..n).filter(|&i| p.lower[i] == p.upper[i]).collect();
    let me = p.eq_rows.len() + fixed.len();
    let mut a = DMatrix::zeros(me, n);
    let mut b = DVector::zeros(me);
    for (r, (row, rhs)) in p.eq_rows.iter().zip(&p.eq_rhs).enumerate() {
        for &(i, v) in row {
            a[(r, i)] += v;
        }
        b[r] = *rhs;
    }
    for (k, &i) in fixed.iter().enumerate() {
        let r = p.eq_rows.len() + k;
        a[(r, i)] = 1.0;
        b[r] = p.lower[i];
    }

    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut lower_rows = vec![usize::MAX; n];
    let mut upper_rows = vec![usize::MAX; n];
    for i in 0..n {
        if p.lower[i] == p.upper[i] {
            continue;
        }
        if p.lower[i].is_finite() {
            lower_rows[i] = rows.len();
            rows.push((vec![(i, -1.0)], -p.lower[i]));
        }
        if p.upper[i].is_finite() {
            upper_rows[i] = rows.len();
            rows.push((vec![(i, 1.0)], p.upper[i]));
        }
    }
    let l = rows.len();
    let mut q = Vec::with_capacity(p.cones.len());
    for cone in &p.cones {
        // G x + s = 0 with s the Lorentz image of x
        for row in cone.lorentz_rows() {
            rows.push((row.into_iter().map(|(i, v)| (i, -v)).collect(), 0.0));
        }
        q.push(cone.u.len() + 2);
    }
    let mut g = DMatrix::zeros(rows.len(), n);
    let mut h = DVector::zeros(rows.len());
    for (r, (terms, hr)) in rows.iter().enumerate() {
        for &(i, v) in terms {
            g[(r, i)] += v;
        }
        h[r] = *hr;
    }
    Standard {
        n,
        a,
        b,
        g,
        h,
        c: DVector::from_column_slice(&p.c),
        dims: ConeDims { l, q },
        fixed,
        lower_rows,
        upper_rows,
    }
}

/// Factorization of the reduced Newton system for one scaling.
struct Kkt<'a> {
    sf: &'a Standard,
    w: &'a NtScaling,
    // W⁻¹ G
    wg: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<'a> Kkt<'a> {
    fn new(sf: &'a Standard, w: &'a NtScaling) -> Option<Self> {
        let (n, me) = (sf.n, sf.a.nrows());
        let mut wg = DMatrix::zeros(sf.g.nrows(), n);
        for j in 0..n {
            let col: Vec<f64> = sf.g.column(j).iter().copied().collect();
            wg.set_column(j, &DVector::from_vec(w.apply_inv(&col)));
        }
        let hmat = wg.transpose() * &wg;
        let mut k = DMatrix::zeros(n + me, n + me);
        k.view_mut((0, 0), (n, n)).copy_from(&hmat);
        k.view_mut((0, n), (n, me)).copy_from(&sf.a.transpose());
        k.view_mut((n, 0), (me, n)).copy_from(&sf.a);
        for i in 0..n {
            k[(i, i)] += REG;
        }
        for i in 0..me {
            k[(n + i, n + i)] -= REG;
        }
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Self { sf, w, wg, lu })
    }

    fn reduced(&self, rx: &DVector<f64>, ry: &DVector<f64>, rz: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let n = self.sf.n;
        let me = self.sf.a.nrows();
        let winv_rz = DVector::from_vec(self.w.apply_inv(rz.as_slice()));
        let top = rx + self.wg.transpose() * &winv_rz;
        let mut rhs = DVector::zeros(n + me);
        rhs.rows_mut(0, n).copy_from(&top);
        rhs.rows_mut(n, me).copy_from(ry);
        let sol = self.lu.solve(&rhs)?;
        let dx = sol.rows(0, n).into_owned();
        let dy = sol.rows(n, me).into_owned();
        let t = &self.wg * &dx - winv_rz;
        let dz = DVector::from_vec(self.w.apply_inv(t.as_slice()));
        Some((dx, dy, dz))
    }

    /// Solves `Aᵀdy + Gᵀdz = rx`, `A dx = ry`, `G dx − W² dz = rz`.
    fn solve(&self, rx: &DVector<f64>, ry: &DVector<f64>, rz: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let (mut dx, mut dy, mut dz) = self.reduced(rx, ry, rz)?;
        for _ in 0..REFINE_STEPS {
            let w2dz = DVector::from_vec(self.w.apply(&self.w.apply(dz.as_slice())));
            let ex = rx - self.sf.a.transpose() * &dy - self.sf.g.transpose() * &dz;
            let ey = ry - &self.sf.a * &dx;
            let ez = rz - (&self.sf.g * &dx - w2dz);
            let (cx, cy, cz) = self.reduced(&ex, &ey, &ez)?;
            dx += cx;
            dy += cy;
            dz += cz;
        }
        Some((dx, dy, dz))
    }
}

fn solution(p: &ConeProblem, sf: &Standard, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> ConeSolution {
    let n = sf.n;
    let me_user = p.eq_rows.len();
    let mut fixed_dual = vec![0.0; n];
    for (k, &i) in sf.fixed.iter().enumerate() {
        fixed_dual[i] = y[me_user + k];
    }
    let pick = |rows: &[usize]| -> Vec<f64> {
        rows.iter()
            .map(|&r| if r == usize::MAX { 0.0 } else { z[r] })
            .collect()
    };
    let offsets = sf.dims.offsets();
    let cone_dual = offsets
        .iter()
        .zip(&sf.dims.q)
        .map(|(&o, &d)| z.as_slice()[o..o + d].to_vec())
        .collect();
    let mut sol = ConeSolution {
        status: SolveStatus::MaxIter,
        x: x.as_slice().to_vec(),
        y: y.as_slice()[..me_user].to_vec(),
        lower_dual: pick(&sf.lower_rows),
        upper_dual: pick(&sf.upper_rows),
        fixed_dual,
        cone_dual,
        primal_objective: 0.0,
        dual_objective: 0.0,
        residuals: super::KktResiduals {
            primal: f64::INFINITY,
            dual: f64::INFINITY,
            gap: f64::INFINITY,
        },
        iterations: 0,
        message: String::new(),
    };
    sol.primal_objective = p.objective(&sol.x);
    sol.dual_objective = dual_objective(p, &sol);
    sol.residuals = kkt_residuals(p, &sol);
    sol
}

fn dot(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b)
}

/// Solves a cone problem with a primal-dual interior-point method.
///
/// Runs single-threaded with a fixed operation order, so repeated calls on the same
/// input return bit-identical results.
pub fn solve(p: &ConeProblem, opts: SolverOptions) -> Result<ConeSolution, SolverError> {
    p.validate()?;
    let sf = standardize(p);
    let dims = sf.dims.clone();
    let m = sf.g.nrows();
    let deg = dims.degree().max(1) as f64;

    // initial point: least-squares solve with W = I, then shift into the cone
    let ident = NtScaling::identity(&dims);
    let kkt0 = Kkt::new(&sf, &ident);
    let (mut x, mut y, mut z) = match kkt0.as_ref().and_then(|k| k.solve(&(-&sf.c), &sf.b, &sf.h)) {
        Some(v) => v,
        None => {
            let zero = DVector::zeros(sf.n);
            let mut sol = solution(p, &sf, &zero, &DVector::zeros(sf.a.nrows()), &DVector::zeros(m));
            sol.message = "singular KKT system at the initial point (dependent equalities?)".into();
            return Ok(sol);
        }
    };
    let mut s = -z.clone();
    let nrm = |v: &DVector<f64>| v.norm().max(1.0);
    let ts = max_step_to_identity(&dims, s.as_slice());
    if ts >= -1e-8 * nrm(&s) {
        add_identity(&dims, s.as_mut_slice(), 1.0 + ts);
    }
    let tz = max_step_to_identity(&dims, z.as_slice());
    if tz >= -1e-8 * nrm(&z) {
        add_identity(&dims, z.as_mut_slice(), 1.0 + tz);
    }

    let mut message = String::new();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    for iter in 0..=opts.max_iter {
        iterations = iter;
        let sol = solution(p, &sf, &x, &y, &z);
        let r = sol.residuals;
        if r.primal <= opts.feas_tol && r.dual <= opts.feas_tol && r.gap <= opts.gap_tol {
            status = SolveStatus::Optimal;
            break;
        }
        // primal infeasibility: Aᵀy + Gᵀz ≈ 0 with −bᵀy − hᵀz > 0
        let dobj = -(dot(&sf.b, &y) + dot(&sf.h, &z));
        if dobj > 0.0 {
            let ray = sf.a.transpose() * &y + sf.g.transpose() * &z;
            if ray.amax() <= opts.feas_tol * dobj {
                status = SolveStatus::Infeasible;
                message = format!("dual ray: ‖Aᵀy + Gᵀz‖∞ / (−bᵀy − hᵀz) = {:e}", ray.amax() / dobj);
                break;
            }
        }
        if iter == opts.max_iter {
            message = format!("iteration limit reached; residuals {:?}", r);
            break;
        }

        let rx = &sf.c + sf.a.transpose() * &y + sf.g.transpose() * &z;
        let ry = &sf.a * &x - &sf.b;
        let rzv = &sf.g * &x + &s - &sf.h;
        let mu = dot(&s, &z) / deg;

        let w = NtScaling::new(&dims, s.as_slice(), z.as_slice());
        let lambda = w.apply(z.as_slice());
        let Some(kkt) = Kkt::new(&sf, &w) else {
            message = "singular KKT system".into();
            break;
        };
        let lambda_sq = jordan_product(&dims, &lambda, &lambda);

        let newton = |rho: &[f64]| {
            let q = jordan_divide(&dims, &lambda, rho);
            let wq = DVector::from_vec(w.apply(&q));
            let rz = -&rzv - &wq;
            let (dx, dy, dz) = kkt.solve(&(-&rx), &(-&ry), &rz)?;
            let w2dz = DVector::from_vec(w.apply(&w.apply(dz.as_slice())));
            let ds = wq - w2dz;
            Some((dx, dy, dz, ds))
        };

        // predictor
        let rho_aff: Vec<f64> = lambda_sq.iter().map(|v| -v).collect();
        let Some((_, _, dz_a, ds_a)) = newton(&rho_aff) else {
            message = "linear solve failed in the predictor".into();
            break;
        };
        let alpha_a = max_step(&dims, s.as_slice(), ds_a.as_slice())
            .min(max_step(&dims, z.as_slice(), dz_a.as_slice()))
            .min(1.0);
        let s_a = &s + &ds_a * alpha_a;
        let z_a = &z + &dz_a * alpha_a;
        let mu_a = dot(&s_a, &z_a) / deg;
        let sigma = (mu_a / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let wids = w.apply_inv(ds_a.as_slice());
        let wdz = w.apply(dz_a.as_slice());
        let cross = jordan_product(&dims, &wids, &wdz);
        let mut rho: Vec<f64> = lambda_sq.iter().zip(&cross).map(|(l, c)| -l - c).collect();
        add_identity(&dims, &mut rho, sigma * mu);
        let Some((dx, dy, dz, ds)) = newton(&rho) else {
            message = "linear solve failed in the corrector".into();
            break;
        };
        let alpha_max = max_step(&dims, s.as_slice(), ds.as_slice()).min(max_step(&dims, z.as_slice(), dz.as_slice()));
        let alpha = (opts.step_fraction * alpha_max).min(1.0);
        x += dx * alpha;
        y += dy * alpha;
        z += dz * alpha;
        s += ds * alpha;
    }
    let mut sol = solution(p, &sf, &x, &y, &z);
    sol.status = status;
    sol.iterations = iterations;
    sol.message = message;
    Ok(sol)
}
