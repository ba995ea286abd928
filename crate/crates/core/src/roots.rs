//! Roots of repeated derivatives of real-rooted polynomials.
//!
//! For `p(x) = ∏(x - xⱼ)` the roots of `p'` are the zeros of
//! `g(x) = Σ 1/(x - xᵢ)`, exactly one in each gap `(xⱼ, xⱼ₊₁)` where `g`
//! falls from `+∞` to `-∞`. Differentiating `k = ⌊t·n⌋` times gives the
//! empirical counterpart of the PDE solution at time `t`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::RealField;

/// Consecutive roots closer than this are treated as a multiple root.
pub const MULTIPLE_ROOT_GAP: f64 = 1e-13;
/// Bisection stops once the bracket is this fraction of the gap.
pub const BISECTION_RTOL: f64 = 1e-12;
const PAIRWISE_THRESHOLD: usize = 10_000;
const PARALLEL_THRESHOLD: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct RootEnsemble {
    roots: Vec<f64>,
    n0: usize,
    k: usize,
}

impl RootEnsemble {
    pub fn new(roots: Vec<f64>) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::invalid("roots", "ensemble must be non-empty"));
        }
        if roots.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("roots", "roots must be finite"));
        }
        if let Some(w) = roots.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "roots",
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        let n0 = roots.len();
        Ok(Self { roots, n0, k: 0 })
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Root count before any differentiation.
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of differentiations applied.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn span(&self) -> f64 {
        self.roots[self.roots.len() - 1] - self.roots[0]
    }

    pub fn translate(&self, c: f64) -> Self {
        Self {
            roots: self.roots.iter().map(|r| r + c).collect(),
            ..self.clone()
        }
    }

    pub fn reflect(&self) -> Self {
        Self {
            roots: self.roots.iter().rev().map(|r| -r).collect(),
            ..self.clone()
        }
    }
}

/// Nonnegative density sampled at increasing nodes, linear in between.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    xs: Vec<f64>,
    values: Vec<f64>,
    /// Built from a full circle, so its two ends are the same point.
    periodic: bool,
}

impl Density {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                got: values.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::invalid("xs", "need at least two nodes"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("xs", "nodes must be strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("values", "density must be finite and nonnegative"));
        }
        Ok(Self {
            xs,
            values,
            periodic: false,
        })
    }

    /// Unwraps a circle field onto `[-π, π]` (both ends included).
    pub fn from_periodic(u: &RealField) -> Result<Self> {
        let n = u.grid().n();
        let dx = u.grid().dx();
        let xs = (0..=n).map(|j| -PI + j as f64 * dx).collect();
        let values = (0..=n).map(|j| u.values()[(j + n / 2) % n]).collect();
        let mut d = Self::new(xs, values)?;
        d.periodic = true;
        Ok(d)
    }

    /// Restriction to `[lo, hi]`, with nodes inserted at both ends.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || lo < self.xs[0] || hi > self.xs[self.xs.len() - 1] {
            return Err(Error::invalid(
                "window",
                format!("[{lo}, {hi}] must be a proper sub-interval of the density support"),
            ));
        }
        let mut xs = vec![lo];
        let mut values = vec![self.value_at(lo)];
        for (&x, &v) in self.xs.iter().zip(&self.values) {
            if x > lo && x < hi {
                xs.push(x);
                values.push(v);
            }
        }
        xs.push(hi);
        values.push(self.value_at(hi));
        Self::new(xs, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let xs = &self.xs;
        if x < xs[0] || x > xs[xs.len() - 1] {
            return 0.0;
        }
        let i = xs.partition_point(|&p| p <= x).clamp(1, xs.len() - 1) - 1;
        let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Trapezoidal cumulative integral at each node.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.xs.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..self.xs.len() {
            acc += 0.5 * (self.xs[i] - self.xs[i - 1]) * (self.values[i] + self.values[i - 1]);
            cum.push(acc);
        }
        cum
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative().last().unwrap()
    }
}

/// Places `n` points at the `(j - 1/2)/n` quantiles of the normalized density.
pub fn quantile_sample(density: &Density, n: usize) -> Result<RootEnsemble> {
    if n < 2 {
        return Err(Error::invalid("n", format!("need at least 2 roots, got {n}")));
    }
    let cum = density.cumulative();
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    if density.periodic {
        let peak = density.values.iter().copied().fold(0.0, f64::max);
        let ends = density.values[0].max(density.values[density.values.len() - 1]);
        if ends > 1e-12 * peak {
            return Err(Error::SeamSupport);
        }
    }
    let xs = &density.xs;
    let mut roots = Vec::with_capacity(n);
    let mut i = 0;
    for j in 1..=n {
        let q = (j as f64 - 0.5) / n as f64 * total;
        while cum[i + 1] < q {
            i += 1;
        }
        let w = (q - cum[i]) / (cum[i + 1] - cum[i]);
        roots.push(xs[i] + w * (xs[i + 1] - xs[i]));
    }
    RootEnsemble::new(roots)
}

fn reciprocal_sum(x: f64, roots: &[f64]) -> f64 {
    if roots.len() >= PAIRWISE_THRESHOLD {
        pairwise_reciprocal_sum(x, roots)
    } else {
        roots.iter().map(|&r| 1.0 / (x - r)).sum()
    }
}

fn pairwise_reciprocal_sum(x: f64, roots: &[f64]) -> f64 {
    if roots.len() <= 64 {
        return roots.iter().map(|&r| 1.0 / (x - r)).sum();
    }
    let (a, b) = roots.split_at(roots.len() / 2);
    pairwise_reciprocal_sum(x, a) + pairwise_reciprocal_sum(x, b)
}

/// `Σ 1/(x - xᵢ)`, i.e. `p'(x)/p(x)`.
pub fn log_derivative(e: &RootEnsemble, x: f64) -> f64 {
    reciprocal_sum(x, &e.roots)
}

fn bisect_gap(roots: &[f64], j: usize) -> Result<f64> {
    let (lo, hi) = (roots[j], roots[j + 1]);
    let tol = BISECTION_RTOL * (hi - lo);
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if reciprocal_sum(m, roots) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let x = 0.5 * (a + b);
    if !(x > lo && x < hi) {
        return Err(Error::Interlacing {
            index: j,
            value: x,
            lo,
            hi,
        });
    }
    Ok(x)
}

/// Roots of `p'` from the roots of `p`.
pub fn derivative_roots(e: &RootEnsemble) -> Result<RootEnsemble> {
    let roots = &e.roots;
    if roots.len() < 2 {
        return Err(Error::invalid("ensemble", "need at least two roots to differentiate"));
    }
    if let Some(w) = roots.windows(2).find(|w| w[1] - w[0] <= MULTIPLE_ROOT_GAP) {
        return Err(Error::MultipleRoot {
            left: w[0],
            right: w[1],
        });
    }
    let gaps = roots.len() - 1;
    let next: Vec<f64> = if roots.len() >= PARALLEL_THRESHOLD {
        (0..gaps)
            .into_par_iter()
            .map(|j| bisect_gap(roots, j))
            .collect::<Result<_>>()?
    } else {
        (0..gaps).map(|j| bisect_gap(roots, j)).collect::<Result<_>>()?
    };
    for (j, w) in next.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::Interlacing {
                index: j + 1,
                value: w[1],
                lo: roots[j + 1],
                hi: roots[j + 2],
            });
        }
    }
    Ok(RootEnsemble {
        roots: next,
        n0: e.n0,
        k: e.k + 1,
    })
}

/// Number of derivatives `⌊t·n0⌋` taken by [`root_flow`].
pub fn flow_steps(n0: usize, t: f64) -> usize {
    // Guards products like 0.3·400 that land a rounding error below an integer.
    (t * n0 as f64 * (1.0 + 1e-12)).floor() as usize
}

/// Differentiates `⌊t·n0⌋` times.
pub fn root_flow(e: &RootEnsemble, t: f64) -> Result<RootEnsemble> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::invalid("t", format!("must lie in [0, 1), got {t}")));
    }
    let steps = flow_steps(e.n0, t);
    if steps + 1 > e.len() {
        return Err(Error::invalid(
            "t",
            format!("{steps} derivatives exceed the {} available roots", e.len()),
        ));
    }
    let mut cur = e.clone();
    for _ in 0..steps {
        cur = derivative_roots(&cur)?;
    }
    Ok(cur)
}

/// Piecewise-polynomial CDF: on `[a, next breakpoint)` it equals
/// `c0 + c1·s + c2·s²` with `s = x - a`.
trait PiecewiseCdf {
    fn breakpoints(&self) -> Vec<f64>;
    fn local(&self, a: f64) -> [f64; 3];
}

struct AtomCdf<'a> {
    xs: &'a [f64],
    weight: f64,
}

impl PiecewiseCdf for AtomCdf<'_> {
    fn breakpoints(&self) -> Vec<f64> {
        self.xs.to_vec()
    }

    fn local(&self, a: f64) -> [f64; 3] {
        [self.weight * self.xs.partition_point(|&x| x <= a) as f64, 0.0, 0.0]
    }
}

struct DensityCdf<'a> {
    density: &'a Density,
    cum: Vec<f64>,
    scale: f64,
}

impl PiecewiseCdf for DensityCdf<'_> {
    fn breakpoints(&self) -> Vec<f64> {
        self.density.xs.clone()
    }

    fn local(&self, a: f64) -> [f64; 3] {
        let xs = &self.density.xs;
        let vs = &self.density.values;
        if a < xs[0] {
            return [0.0; 3];
        }
        if a >= xs[xs.len() - 1] {
            return [self.scale * self.cum[self.cum.len() - 1], 0.0, 0.0];
        }
        let i = xs.partition_point(|&x| x <= a) - 1;
        let slope = (vs[i + 1] - vs[i]) / (xs[i + 1] - xs[i]);
        let s = a - xs[i];
        let f_a = vs[i] + slope * s;
        let cdf_a = self.cum[i] + vs[i] * s + 0.5 * slope * s * s;
        [self.scale * cdf_a, self.scale * f_a, self.scale * 0.5 * slope]
    }
}

/// `∫₀ʰ |c0 + c1 s + c2 s²| ds`, split at sign changes.
fn abs_quadratic_integral(c: [f64; 3], h: f64) -> f64 {
    let mut cuts = vec![0.0];
    let [c0, c1, c2] = c;
    let scale = c0.abs() + c1.abs() * h + c2.abs() * h * h;
    if c2.abs() * h * h > 1e-14 * scale {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc > 0.0 {
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            let mut r = [q / c2, if q != 0.0 { c0 / q } else { f64::NAN }];
            r.sort_by(|a, b| a.total_cmp(b));
            cuts.extend(r.into_iter().filter(|&s| s > 0.0 && s < h));
        }
    } else if c1 != 0.0 {
        let s = -c0 / c1;
        if s > 0.0 && s < h {
            cuts.push(s);
        }
    }
    cuts.push(h);
    let prim = |s: f64| c0 * s + 0.5 * c1 * s * s + c2 * s * s * s / 3.0;
    cuts.windows(2).map(|w| (prim(w[1]) - prim(w[0])).abs()).sum()
}

/// `∫ |F - G| dx` over the merged breakpoints of the two CDFs.
fn cdf_l1(f: &dyn PiecewiseCdf, g: &dyn PiecewiseCdf) -> f64 {
    let mut pts = f.breakpoints();
    pts.extend(g.breakpoints());
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts.windows(2)
        .map(|w| {
            let (a, h) = (w[0], w[1] - w[0]);
            let (p, q) = (f.local(a), g.local(a));
            abs_quadratic_integral([p[0] - q[0], p[1] - q[1], p[2] - q[2]], h)
        })
        .sum()
}

/// W₁ between the roots and a density, as the L¹ distance of their CDFs.
///
/// With `normalize` both measures are probability measures; otherwise each
/// root weighs `1/n0` and the density keeps its own mass.
pub fn wasserstein1(e: &RootEnsemble, density: &Density, normalize: bool) -> Result<f64> {
    let cum = density.cumulative();
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let (weight, scale) = if normalize {
        (1.0 / e.len() as f64, 1.0 / total)
    } else {
        (1.0 / e.n0 as f64, 1.0)
    };
    let atoms = AtomCdf { xs: &e.roots, weight };
    let dens = DensityCdf { density, cum, scale };
    Ok(cdf_l1(&atoms, &dens))
}

/// W₁ between two normalized densities.
pub fn wasserstein1_densities(a: &Density, b: &Density) -> Result<f64> {
    let (ca, cb) = (a.cumulative(), b.cumulative());
    let (ma, mb) = (*ca.last().unwrap(), *cb.last().unwrap());
    if !(ma > 0.0 && mb > 0.0) {
        return Err(Error::ZeroMass);
    }
    let fa = DensityCdf { density: a, cum: ca, scale: 1.0 / ma };
    let fb = DensityCdf { density: b, cum: cb, scale: 1.0 / mb };
    Ok(cdf_l1(&fa, &fb))
}

/// W₁ between two empirical measures with equal weights per point.
pub fn wasserstein1_ensembles(a: &RootEnsemble, b: &RootEnsemble) -> f64 {
    let fa = AtomCdf { xs: &a.roots, weight: 1.0 / a.len() as f64 };
    let fb = AtomCdf { xs: &b.roots, weight: 1.0 / b.len() as f64 };
    cdf_l1(&fa, &fb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    fn uniform(lo: f64, hi: f64) -> Density {
        let xs: Vec<f64> = (0..=100).map(|i| lo + (hi - lo) * i as f64 / 100.0).collect();
        Density::new(xs, vec![1.0; 101]).unwrap()
    }

    #[test]
    fn uniform_quantiles() {
        let e = quantile_sample(&uniform(-1.0, 1.0), 4).unwrap();
        for (r, want) in e.roots().iter().zip([-0.75, -0.25, 0.25, 0.75]) {
            assert!((r - want).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_pair() {
        let xs: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let vs = xs.iter().map(|x| 1.0 - x * x).collect();
        let e = quantile_sample(&Density::new(xs, vs).unwrap(), 2).unwrap();
        assert!((e.roots()[0] + e.roots()[1]).abs() < 1e-12);
    }

    #[test]
    fn quantile_errors() {
        let zero = Density::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(quantile_sample(&zero, 4), Err(Error::ZeroMass)));
        assert!(quantile_sample(&uniform(0.0, 1.0), 1).is_err());
        let g = PeriodicGrid::new(64).unwrap();
        let everywhere = Density::from_periodic(&RealField::constant(&g, 1.0)).unwrap();
        assert!(matches!(quantile_sample(&everywhere, 10), Err(Error::SeamSupport)));
        let bump = RealField::from_fn(&g, |x| {
            let y = if x > PI { x - 2.0 * PI } else { x };
            (1.0 - y * y).max(0.0)
        });
        let e = quantile_sample(&Density::from_periodic(&bump).unwrap(), 10).unwrap();
        assert!(e.roots().iter().all(|r| r.abs() < 1.0));
    }

    #[test]
    fn cubic_closed_form() {
        let e = RootEnsemble::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let d = derivative_roots(&e).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((d.roots()[0] + r).abs() < 1e-11);
        assert!((d.roots()[1] - r).abs() < 1e-11);
        assert_eq!(d.k(), 1);
        assert_eq!(d.n0(), 3);
        let pair = derivative_roots(&RootEnsemble::new(vec![-2.5, 2.5]).unwrap()).unwrap();
        assert!(pair.roots()[0].abs() < 1e-11);
    }

    #[test]
    fn multiple_root_rejected() {
        let e = RootEnsemble::new(vec![0.0, 1.0, 1.0 + 1e-14]).unwrap();
        assert!(matches!(derivative_roots(&e), Err(Error::MultipleRoot { .. })));
        assert!(derivative_roots(&RootEnsemble::new(vec![1.0]).unwrap()).is_err());
        assert!(RootEnsemble::new(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn root_flow_counts() {
        let e = RootEnsemble::new((0..10).map(|i| i as f64).collect()).unwrap();
        assert_eq!(root_flow(&e, 0.0).unwrap(), e);
        let f = root_flow(&e, 0.35).unwrap();
        assert_eq!(f.len(), 7);
        assert_eq!(f.k(), 3);
        assert!(root_flow(&e, 1.0).is_err());
        assert!(root_flow(&e, -0.1).is_err());
        assert_eq!(flow_steps(400, 0.3), 120);
        assert_eq!(flow_steps(100, 0.3), 30);
    }

    #[test]
    fn w1_translation_and_identity() {
        let h = 0.3;
        let w = wasserstein1_densities(&uniform(0.0, 1.0), &uniform(h, 1.0 + h)).unwrap();
        assert!((w - h).abs() < 1e-13);
        let e = RootEnsemble::new(vec![0.1, 0.4, 0.45, 0.9]).unwrap();
        assert_eq!(wasserstein1_ensembles(&e, &e), 0.0);
        let shifted = e.translate(0.25);
        assert!((wasserstein1_ensembles(&e, &shifted) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn w1_quantiles_of_uniform() {
        // Midpoint quantiles of U[0,1] sit at distance 1/(4n) in W₁.
        let n = 50;
        let e = quantile_sample(&uniform(0.0, 1.0), n).unwrap();
        let w = wasserstein1(&e, &uniform(0.0, 1.0), true).unwrap();
        assert!((w - 0.25 / n as f64).abs() < 1e-13);
    }

    #[test]
    fn abs_quadratic_integral_cases() {
        // ∫₀² |s - 1| ds = 1
        assert!((abs_quadratic_integral([-1.0, 1.0, 0.0], 2.0) - 1.0).abs() < 1e-15);
        // ∫₀³ |s² - 1| ds = 2/3 + 20/3
        assert!((abs_quadratic_integral([-1.0, 0.0, 1.0], 3.0) - 22.0 / 3.0).abs() < 1e-13);
        // ∫₀¹ |(s - 0.25)(s - 0.75)| ds
        let got = abs_quadratic_integral([0.1875, -1.0, 1.0], 1.0);
        let brute: f64 = (0..200_000)
            .map(|i| {
                let s = (i as f64 + 0.5) / 200_000.0;
                ((s - 0.25) * (s - 0.75)).abs()
            })
            .sum::<f64>()
            / 200_000.0;
        assert!((got - brute).abs() < 1e-9, "{got} vs {brute}");
    }

    #[test]
    fn restrict_window() {
        let d = uniform(-2.0, 2.0);
        let r = d.restrict(-0.55, 0.55).unwrap();
        assert!((r.mass() - 1.1).abs() < 1e-14);
        assert_eq!(r.xs()[0], -0.55);
        assert!(d.restrict(-3.0, 0.0).is_err());
    }
}
