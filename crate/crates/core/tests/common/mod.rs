//! Independent oracles shared by the integration tests. Nothing here calls
//! the root finders, transversality formulas or determinant code under test.

#![allow(dead_code)]

use num_complex::Complex64;
use tumordde::model::{self, ChainForm, ModelParams};
use tumordde::roots::ComplexFn;

pub const REF: ModelParams = ModelParams::reference();

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Roots of `f` on `[lo, hi]` from sign changes on an `n`-point grid,
/// refined by plain bisection.
pub fn grid_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    for k in 1..=n {
        let b = lo + k as f64 * h;
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fm == 0.0 || (r - l) < 1e-15 * m.abs().max(1.0) {
                    l = m;
                    r = m;
                    break;
                }
                if fl * fm < 0.0 {
                    r = m;
                } else {
                    l = m;
                    fl = fm;
                }
            }
            out.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Newton iteration on `value` alone, with a central-difference derivative.
pub fn newton_fd(f: &dyn Fn(Complex64) -> Complex64, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..60 {
        let h = 1e-6 * (1.0 + z.norm());
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 {
            return None;
        }
        let step = f(z) / d;
        z -= step;
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    (f(z).norm() < 1e-10).then_some(z)
}

/// `d lambda / d tau` by continuing the root `seed` of `make(tau)` to
/// `tau +- h` and differencing.
pub fn continuation_derivative<F: ComplexFn>(make: impl Fn(f64) -> F, tau: f64, seed: Complex64, h: f64) -> Complex64 {
    let root = |t: f64| {
        let f = make(t);
        newton_fd(&|z| f.value(z), seed).expect("continuation converges")
    };
    (root(tau + h) - root(tau - h)) / (2.0 * h)
}

fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `det(lambda I - A1 - C1 e^(-lambda tau))` for the chain system.
pub fn chain_determinant(p: &ModelParams, q2: f64, tau: f64, lambda: Complex64) -> Complex64 {
    let l0 = model::equilibria(p).unwrap().0;
    let (a1, c1) = model::chain_linear_part(p, &l0, q2, ChainForm::Corrected);
    let e = (-lambda * tau).exp();
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = -a1[i][j] - c1[i][j] * e;
        }
        m[i][i] += lambda;
    }
    det3(m)
}

/// Forward-mode finite-difference Jacobian of a map `R^n -> R^2`.
pub fn fd_jacobian<const N: usize>(f: impl Fn([f64; N]) -> [f64; 2], at: [f64; N], h: f64) -> [[f64; N]; 2] {
    let mut j = [[0.0; N]; 2];
    for k in 0..N {
        let (mut up, mut dn) = (at, at);
        up[k] += h;
        dn[k] -= h;
        let (fu, fd) = (f(up), f(dn));
        for i in 0..2 {
            j[i][k] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    j
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Sup-norm difference of two trajectories' physical states on common
/// grid points with `t <= t_max`, over the first `dims` components.
pub fn sup_diff(a: &tumordde::integrate::Trajectory, b: &tumordde::integrate::Trajectory, dims: usize, t_max: f64) -> f64 {
    let ratio = ((b.meta.dt / a.meta.dt).round() as usize).max(1);
    let inv = ((a.meta.dt / b.meta.dt).round() as usize).max(1);
    let mut worst: f64 = 0.0;
    let mut k = 0;
    loop {
        let (ka, kb) = if ratio >= inv { (k * ratio, k) } else { (k, k * inv) };
        if ka >= a.len() || kb >= b.len() || a.times[ka] > t_max + 1e-12 {
            break;
        }
        let (pa, pb) = (a.physical(ka), b.physical(kb));
        for i in 0..dims {
            worst = worst.max((pa[i] - pb[i]).abs());
        }
        k += 1;
    }
    worst
}
