//! Vector operations on a product of a nonnegative orthant and Lorentz cones.

/// Layout of `K = R₊^l × Q^{q_1} × … `.
#[derive(Debug, Clone)]
pub struct ConeDims {
    pub l: usize,
    pub q: Vec<usize>,
}

impl ConeDims {
    /// Barrier degree: one per orthant coordinate and per Lorentz cone.
    pub fn degree(&self) -> usize {
        self.l + self.q.len()
    }

    /// Start offsets of the Lorentz blocks.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.q.len());
        let mut at = self.l;
        for &d in &self.q {
            off.push(at);
            at += d;
        }
        off
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `x0² − ‖x1‖²` computed as a product of sum and difference.
fn jnorm2(x: &[f64]) -> f64 {
    let r = norm(&x[1..]);
    (x[0] - r) * (x[0] + r)
}

/// Smallest `t` with `x + t e` on the boundary of `K` (positive when `x ∉ int K`).
pub fn max_step_to_identity(dims: &ConeDims, x: &[f64]) -> f64 {
    let mut t = f64::NEG_INFINITY;
    for &xi in &x[..dims.l] {
        t = t.max(-xi);
    }
    for (&o, &d) in dims.offsets().iter().zip(&dims.q) {
        let blk = &x[o..o + d];
        t = t.max(norm(&blk[1..]) - blk[0]);
    }
    t
}

/// `x += a e`.
pub fn add_identity(dims: &ConeDims, x: &mut [f64], a: f64) {
    for xi in &mut x[..dims.l] {
        *xi += a;
    }
    for &o in &dims.offsets() {
        x[o] += a;
    }
}

/// Jordan product `x ∘ y`.
pub fn jordan_product(dims: &ConeDims, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 0..dims.l {
        out[i] = x[i] * y[i];
    }
    for (&o, &d) in dims.offsets().iter().zip(&dims.q) {
        let (xb, yb) = (&x[o..o + d], &y[o..o + d]);
        out[o] = dot(xb, yb);
        for k in 1..d {
            out[o + k] = xb[0] * yb[k] + yb[0] * xb[k];
        }
    }
    out
}

/// Solves `λ ∘ w = u` for `w` (`λ` in the interior).
pub fn jordan_divide(dims: &ConeDims, lambda: &[f64], u: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; u.len()];
    for i in 0..dims.l {
        w[i] = u[i] / lambda[i];
    }
    for (&o, &d) in dims.offsets().iter().zip(&dims.q) {
        let (l, ub) = (&lambda[o..o + d], &u[o..o + d]);
        let det = jnorm2(l);
        let w0 = (l[0] * ub[0] - dot(&l[1..], &ub[1..])) / det;
        w[o] = w0;
        for k in 1..d {
            w[o + k] = (ub[k] - w0 * l[k]) / l[0];
        }
    }
    w
}

/// Largest `α ≥ 0` with `x + α d ∈ K` for `x ∈ int K` (infinite if unbounded).
pub fn max_step(dims: &ConeDims, x: &[f64], d: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..dims.l {
        if d[i] < 0.0 {
            alpha = alpha.min(-x[i] / d[i]);
        }
    }
    for (&o, &n) in dims.offsets().iter().zip(&dims.q) {
        alpha = alpha.min(soc_step(&x[o..o + n], &d[o..o + n]));
    }
    alpha
}

fn soc_step(x: &[f64], d: &[f64]) -> f64 {
    let c = jnorm2(x).max(0.0);
    let b = 2.0 * (x[0] * d[0] - dot(&x[1..], &d[1..]));
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let mut alpha = f64::INFINITY;
    if d[0] < 0.0 {
        alpha = -x[0] / d[0];
    }
    let root = if a == 0.0 {
        if b < 0.0 {
            -c / b
        } else {
            f64::INFINITY
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            f64::INFINITY
        } else {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let r1 = if a != 0.0 { q / a } else { f64::INFINITY };
            let r2 = if q != 0.0 { c / q } else { f64::INFINITY };
            [r1, r2]
                .into_iter()
                .filter(|r| *r > 0.0)
                .fold(f64::INFINITY, f64::min)
        }
    };
    alpha.min(root)
}

/// Nesterov–Todd scaling `W` with `W z = W⁻¹ s = λ`.
#[derive(Debug, Clone)]
pub struct NtScaling {
    dims: ConeDims,
    /// Orthant part: `√(s / z)`.
    d: Vec<f64>,
    /// Lorentz part: `W = β (2 v vᵀ − J)`.
    soc: Vec<(f64, Vec<f64>)>,
}

impl NtScaling {
    pub fn identity(dims: &ConeDims) -> Self {
        let soc = dims
            .q
            .iter()
            .map(|&n| {
                let mut v = vec![0.0; n];
                // 2 v vᵀ − J = I requires v = e / √1 … with v0 = 1, v1 = 0
                v[0] = 1.0;
                (1.0, v)
            })
            .collect();
        Self {
            dims: dims.clone(),
            d: vec![1.0; dims.l],
            soc,
        }
    }

    pub fn new(dims: &ConeDims, s: &[f64], z: &[f64]) -> Self {
        let d = (0..dims.l).map(|i| (s[i] / z[i]).sqrt()).collect();
        let soc = dims
            .offsets()
            .iter()
            .zip(&dims.q)
            .map(|(&o, &n)| {
                let (sb, zb) = (&s[o..o + n], &z[o..o + n]);
                let aa = jnorm2(sb).sqrt();
                let bb = jnorm2(zb).sqrt();
                let beta = (aa / bb).sqrt();
                let sbar: Vec<f64> = sb.iter().map(|x| x / aa).collect();
                let zbar: Vec<f64> = zb.iter().map(|x| x / bb).collect();
                let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
                let mut w: Vec<f64> = (0..n)
                    .map(|k| {
                        let jz = if k == 0 { zbar[0] } else { -zbar[k] };
                        (sbar[k] + jz) / (2.0 * gamma)
                    })
                    .collect();
                let scale = (2.0 * (w[0] + 1.0)).sqrt();
                w[0] += 1.0;
                for wk in &mut w {
                    *wk /= scale;
                }
                (beta, w)
            })
            .collect();
        Self {
            dims: dims.clone(),
            d,
            soc,
        }
    }

    /// `W x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for i in 0..self.dims.l {
            out[i] = self.d[i] * x[i];
        }
        for ((&o, &n), (beta, v)) in self.dims.offsets().iter().zip(&self.dims.q).zip(&self.soc) {
            let xb = &x[o..o + n];
            let vx = dot(v, xb);
            for k in 0..n {
                let jx = if k == 0 { xb[0] } else { -xb[k] };
                out[o + k] = beta * (2.0 * v[k] * vx - jx);
            }
        }
        out
    }

    /// `W⁻¹ x`.
    pub fn apply_inv(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for i in 0..self.dims.l {
            out[i] = x[i] / self.d[i];
        }
        for ((&o, &n), (beta, v)) in self.dims.offsets().iter().zip(&self.dims.q).zip(&self.soc) {
            let xb = &x[o..o + n];
            // (1/β)(2 J v vᵀ J − J) x
            let jx: Vec<f64> = (0..n).map(|k| if k == 0 { xb[0] } else { -xb[k] }).collect();
            let vjx = dot(v, &jx);
            for k in 0..n {
                let jv = if k == 0 { v[0] } else { -v[k] };
                out[o + k] = (2.0 * jv * vjx - jx[k]) / beta;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> ConeDims {
        ConeDims { l: 2, q: vec![3, 4] }
    }

    fn point(seed: f64) -> Vec<f64> {
        // interior: orthant positive, each Lorentz head exceeds its tail norm
        vec![
            0.7 + seed,
            1.3,
            2.0 + seed,
            0.4,
            -0.9 * seed,
            3.0,
            1.1,
            -0.5 + seed,
            0.8,
        ]
    }

    #[test]
    fn nt_scaling_maps_s_and_z_to_the_same_point() {
        let d = dims();
        let s = point(0.3);
        let z = point(-0.2);
        let w = NtScaling::new(&d, &s, &z);
        let a = w.apply(&z);
        let b = w.apply_inv(&s);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{a:?} vs {b:?}");
        }
        let back = w.apply_inv(&w.apply(&s));
        for (x, y) in back.iter().zip(&s) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_scaling_is_identity() {
        let d = dims();
        let w = NtScaling::identity(&d);
        let x = point(0.1);
        assert_eq!(w.apply(&x), x);
        assert_eq!(w.apply_inv(&x), x);
    }

    #[test]
    fn division_inverts_product() {
        let d = dims();
        let l = point(0.2);
        let u = vec![0.3, -1.0, 0.5, 0.2, -0.7, 1.0, 0.0, 0.4, -0.1];
        let w = jordan_divide(&d, &l, &u);
        let back = jordan_product(&d, &l, &w);
        for (x, y) in back.iter().zip(&u) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn step_lands_on_boundary() {
        let d = ConeDims { l: 0, q: vec![3] };
        let x = vec![2.0, 0.5, 0.0];
        let dir = vec![-1.0, 1.0, 0.3];
        let a = max_step(&d, &x, &dir);
        let y: Vec<f64> = x.iter().zip(&dir).map(|(p, q)| p + a * q).collect();
        assert!((y[0] - (y[1] * y[1] + y[2] * y[2]).sqrt()).abs() < 1e-12);
        assert_eq!(max_step(&d, &x, &[1.0, 0.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn identity_shift() {
        let d = dims();
        let mut x = vec![-0.5, 1.0, 1.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let t = max_step_to_identity(&d, &x);
        assert!((t - 1.0).abs() < 1e-12);
        add_identity(&d, &mut x, t + 1.0);
        assert!(max_step_to_identity(&d, &x) < 0.0);
    }
}
