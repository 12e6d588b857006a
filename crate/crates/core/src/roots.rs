//! Root finding for characteristic functions.
//!
//! Complex roots are located by scanning `|f|` on a rectangular grid for
//! local minima and polishing each seed with Newton's method. Real
//! polynomial roots come from closed forms and are polished afterwards.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex function with an analytic derivative.
pub trait ComplexFn {
    fn value(&self, z: Complex64) -> Complex64;
    fn derivative(&self, z: Complex64) -> Complex64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Stop once the Newton step is shorter than this.
    pub step_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 100, step_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub root: Complex64,
    pub iterations: usize,
    pub residual: f64,
}

/// Complex Newton iteration. Returns `None` when the derivative vanishes,
/// an iterate stops being finite, or the iteration cap is reached.
pub fn newton<F: ComplexFn + ?Sized>(f: &F, seed: Complex64, opts: NewtonOptions) -> Option<NewtonOutcome> {
    let mut z = seed;
    for it in 1..=opts.max_iter {
        let d = f.derivative(z);
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let step = f.value(z) / d;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() <= opts.step_tol * (1.0 + z.norm()) {
            return Some(NewtonOutcome {
                root: z,
                iterations: it,
                residual: f.value(z).norm(),
            });
        }
    }
    None
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn is_empty(&self) -> bool {
        !(self.re_max > self.re_min && self.im_max > self.im_min)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub re_points: usize,
    pub im_points: usize,
    pub newton: NewtonOptions,
    /// Roots closer than this are treated as one.
    pub merge_tol: f64,
    /// Polished roots whose residual exceeds this are dropped.
    pub residual_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            re_points: 120,
            im_points: 240,
            newton: NewtonOptions::default(),
            merge_tol: 1e-7,
            residual_tol: 1e-8,
        }
    }
}

/// Approximate all roots of `f` inside `region`.
///
/// Grid nodes where `|f|` is no larger than at any of its eight neighbours
/// seed a Newton iteration. Seeds that fail to converge, or converge outside
/// the region, are discarded with a debug log entry. Results are sorted by
/// decreasing real part, then by imaginary part.
pub fn root_scan<F: ComplexFn + ?Sized>(f: &F, region: Region, opts: &ScanOptions) -> Vec<Complex64> {
    if region.is_empty() || opts.re_points < 2 || opts.im_points < 2 {
        return Vec::new();
    }
    let (nr, ni) = (opts.re_points, opts.im_points);
    let dr = (region.re_max - region.re_min) / (nr - 1) as f64;
    let di = (region.im_max - region.im_min) / (ni - 1) as f64;
    let node = |i: usize, j: usize| Complex64::new(region.re_min + i as f64 * dr, region.im_min + j as f64 * di);

    let mut mag = vec![0.0; nr * ni];
    for i in 0..nr {
        for j in 0..ni {
            mag[i * ni + j] = f.value(node(i, j)).norm();
        }
    }

    let mut roots: Vec<Complex64> = Vec::new();
    for i in 0..nr {
        for j in 0..ni {
            let m = mag[i * ni + j];
            if !m.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di_ in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di_ == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di_, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nr as i64 || jj >= ni as i64 {
                        continue;
                    }
                    if mag[ii as usize * ni + jj as usize] < m {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let seed = node(i, j);
            match newton(f, seed, opts.newton) {
                Some(out) if out.residual <= opts.residual_tol && region.contains(out.root) => {
                    if !roots.iter().any(|r| (r - out.root).norm() < opts.merge_tol) {
                        roots.push(out.root);
                    }
                }
                Some(out) => log::debug!("seed {seed} polished to {} outside region or residual {}", out.root, out.residual),
                None => log::warn!("newton failed to converge from seed {seed}; discarded"),
            }
        }
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Real roots of `a x^2 + b x + c`, ascending. Uses the cancellation-free
/// form of the quadratic formula.
pub fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0]
    } else if disc == 0.0 {
        vec![q / a]
    } else {
        vec![q / a, c / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

/// Real roots of the monic cubic `x^3 + b x^2 + c x + d`, ascending,
/// polished with a few Newton steps on the original polynomial.
pub fn real_cubic_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    // depressed cubic t^3 + p t + q with x = t - b/3
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut ts = Vec::with_capacity(3);
    if p == 0.0 && q == 0.0 {
        ts.push(0.0);
    } else if disc > 0.0 {
        let s = disc.sqrt();
        ts.push((-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt());
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            ts.push(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
        }
    }
    let poly = |x: f64| ((x + b) * x + c) * x + d;
    let dpoly = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let mut xs: Vec<f64> = ts
        .into_iter()
        .map(|t| {
            let mut x = t - shift;
            for _ in 0..4 {
                let dp = dpoly(x);
                if dp == 0.0 {
                    break;
                }
                let step = poly(x) / dp;
                x -= step;
                if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                    break;
                }
            }
            x
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    xs
}

/// Bisection on a sign-changing bracket down to `tol` in the argument.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Sign changes of `f` on a uniform grid over `[lo, hi]`, each refined by
/// bisection.
pub fn sign_change_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize, tol: f64) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    let mut prev_x = lo;
    let mut prev = f(lo);
    for k in 1..=steps {
        let x = lo + k as f64 * h;
        let v = f(x);
        if prev == 0.0 {
            out.push(prev_x);
        } else if prev.signum() != v.signum() && v != 0.0 {
            if let Some(r) = bisect(&f, prev_x, x, tol) {
                out.push(r);
            }
        }
        prev_x = x;
        prev = v;
    }
    if prev == 0.0 {
        out.push(prev_x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Poly(Vec<Complex64>);

    impl ComplexFn for Poly {
        fn value(&self, z: Complex64) -> Complex64 {
            self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
        }
        fn derivative(&self, z: Complex64) -> Complex64 {
            let n = self.0.len();
            (1..n)
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, k| acc * z + self.0[k] * k as f64)
        }
    }

    #[test]
    fn quadratic_and_cubic() {
        assert_eq!(real_quadratic_roots(1.0, -3.0, 2.0), vec![1.0, 2.0]);
        assert!(real_quadratic_roots(1.0, 0.0, 1.0).is_empty());
        let r = real_cubic_roots(-6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = real_cubic_roots(0.0, 1.0, -2.0); // one real root at 1
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn scan_finds_polynomial_roots() {
        // (z - (-1+2i)) (z - (-1-2i)) (z + 0.5) = z^3 + 2.5 z^2 + 6 z + 2.5
        let p = Poly(vec![2.5.into(), 6.0.into(), 2.5.into(), 1.0.into()]);
        let roots = root_scan(&p, Region::new(-3.0, 1.0, -4.0, 4.0), &ScanOptions::default());
        assert_eq!(roots.len(), 3, "{roots:?}");
        assert!((roots[0] + 0.5).norm() < 1e-10);
    }

    #[test]
    fn empty_region_gives_nothing() {
        let p = Poly(vec![1.0.into(), 1.0.into()]);
        assert!(root_scan(&p, Region::new(0.0, 0.0, -1.0, 1.0), &ScanOptions::default()).is_empty());
    }

    #[test]
    fn sign_changes() {
        let r = sign_change_roots(|x| (x - 0.3) * (x - 0.7), 0.0, 1.0, 1000, 1e-14);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.3).abs() < 1e-12 && (r[1] - 0.7).abs() < 1e-12);
    }
}
