//! Radial grids, sampled radial functions and the norms built on them.
//!
//! A [`RadialGrid`] stores positive nodes `r_1 < … < r_n` together with
//! weights for `∫₀^{r_max} f(r) r^{N−1} dr`. The origin is not a node; the
//! value `f(0)` lives in [`RadialFn::center`] and enters the quadrature
//! through a dedicated center weight.

use std::fmt::Write as _;
use std::sync::Arc;

use libm::tgamma as gamma;

use crate::error::{NlsError, Result};
use crate::nonlinearity::Nonlinearity;
use crate::params::ProblemParams;

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Surface area of the unit sphere in R^N.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub center_weight: f64,
    pub sphere_area: f64,
    pub r_max: f64,
}

/// Uniform first spacing `h0` growing geometrically by `stretch` per cell.
pub fn make_grid(params: &ProblemParams, r_max: f64, n: usize, stretch: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::stretched(params.dim, r_max, n, stretch)
}

impl RadialGrid {
    pub fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Arc<Self>> {
        if dim < 1 {
            return Err(NlsError::InvalidArgument("dimension must be positive".into()));
        }
        if nodes.len() < 4 {
            return Err(NlsError::InvalidArgument("a grid needs at least 4 nodes".into()));
        }
        if !(nodes[0] > 0.0) {
            return Err(NlsError::InvalidArgument("first node must be positive".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|r| !r.is_finite()) {
            return Err(NlsError::InvalidArgument("nodes must be finite and strictly increasing".into()));
        }
        let (center_weight, weights) = product_weights(dim, &nodes);
        let r_max = *nodes.last().unwrap();
        Ok(Arc::new(Self { dim, nodes, weights, center_weight, sphere_area: sphere_area(dim), r_max }))
    }

    pub fn stretched(dim: usize, r_max: f64, n: usize, stretch: f64) -> Result<Arc<Self>> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(NlsError::InvalidArgument(format!("r_max = {r_max} must be positive")));
        }
        if n < 100 {
            return Err(NlsError::InvalidArgument(format!("n = {n} is below the minimum of 100")));
        }
        if !(stretch >= 1.0) || !stretch.is_finite() {
            return Err(NlsError::InvalidArgument(format!("stretch = {stretch} must be at least 1")));
        }
        let total = if stretch == 1.0 {
            n as f64
        } else {
            // Σ_{i<n} s^i, evaluated stably for s close to 1.
            ((n as f64) * stretch.ln()).exp_m1() / (stretch - 1.0)
        };
        if !total.is_finite() {
            return Err(NlsError::InvalidArgument("stretch too large for node count".into()));
        }
        let h0 = r_max / total;
        let mut nodes = Vec::with_capacity(n);
        let mut r = 0.0;
        let mut h = h0;
        for _ in 0..n {
            r += h;
            nodes.push(r);
            h *= stretch;
        }
        *nodes.last_mut().unwrap() = r_max;
        Self::from_nodes(dim, nodes)
    }

    /// `n` nodes from first spacing `h0` to `r_max`, stretch solved for.
    pub fn geometric(dim: usize, h0: f64, r_max: f64, n: usize) -> Result<Arc<Self>> {
        if !(h0 > 0.0) || !(r_max > h0 * n as f64 * 0.5) {
            return Self::stretched(dim, r_max, n, 1.0);
        }
        if h0 * n as f64 >= r_max {
            return Self::stretched(dim, r_max, n, 1.0);
        }
        let target = r_max / h0;
        let sum = |s: f64| ((n as f64) * s.ln()).exp_m1() / (s - 1.0);
        let (mut lo, mut hi) = (1.0 + 1e-15, 2.0);
        while sum(hi) < target {
            hi = 1.0 + 2.0 * (hi - 1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sum(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::stretched(dim, r_max, n, 0.5 * (lo + hi))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sphere_area · ∫ g r^{N−1} dr` given `g(0)` and node samples.
    pub fn integrate(&self, center: f64, values: &[f64]) -> f64 {
        let s: f64 = self.weights.iter().zip(values).map(|(w, v)| w * v).sum();
        self.sphere_area * (self.center_weight * center + s)
    }

    /// Same as [`integrate`](Self::integrate) with samples produced by `g(r)`.
    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().map(|&r| g(r)).collect();
        self.integrate(g(0.0), &vals)
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.dim == other.dim && self.nodes == other.nodes
    }
}

/// Lagrange basis values at `x` for the interpolant through `xs`.
fn lagrange<const K: usize>(xs: [f64; K], x: f64) -> [f64; K] {
    let mut l = [1.0; K];
    for j in 0..K {
        for m in 0..K {
            if m != j {
                l[j] *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
    }
    l
}

/// Integrates the interpolant through `xs` times `r^{N−1}` over `[lo, hi]`.
fn panel_weights<const K: usize>(dim: usize, xs: [f64; K], lo: f64, hi: f64) -> [f64; K] {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut w = [0.0; K];
    for (t, gw) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        let r = mid + half * t;
        let rw = r.powi(dim as i32 - 1) * gw * half;
        let l = lagrange(xs, r);
        for k in 0..K {
            w[k] += l[k] * rw;
        }
    }
    w
}

/// Piecewise-cubic product weights; the first cell uses the origin as a node.
fn product_weights(dim: usize, nodes: &[f64]) -> (f64, Vec<f64>) {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    let first = panel_weights(dim, [0.0, nodes[0], nodes[1], nodes[2]], 0.0, nodes[0]);
    let center = first[0];
    for k in 0..3 {
        w[k] += first[k + 1];
    }
    let mut i = 0;
    while i + 3 < n {
        let xs = [nodes[i], nodes[i + 1], nodes[i + 2], nodes[i + 3]];
        let pw = panel_weights(dim, xs, xs[0], xs[3]);
        for k in 0..4 {
            w[i + k] += pw[k];
        }
        i += 3;
    }
    if i + 1 < n {
        let xs = [nodes[n - 4], nodes[n - 3], nodes[n - 2], nodes[n - 1]];
        let pw = panel_weights(dim, xs, nodes[i], xs[3]);
        for k in 0..4 {
            w[n - 4 + k] += pw[k];
        }
    }
    (center, w)
}

/// How a profile continues beyond `r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Identically zero outside the grid.
    Zero,
    /// `r^{−(N−1)/2} e^{−k r}` decay.
    Exponential { k: f64 },
    /// `r^{−p}` decay.
    Power { p: f64 },
}

/// A radial profile sampled on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFn {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub center: f64,
    pub tail: Tail,
}

impl RadialFn {
    pub fn new(grid: Arc<RadialGrid>, center: f64, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::InvalidArgument(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !center.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(NlsError::NumericFailure("non-finite profile sample".into()));
        }
        Ok(Self { grid, values, center, tail })
    }

    /// Samples `f(r)` at the origin and every node.
    pub fn from_fn(grid: &Arc<RadialGrid>, tail: Tail, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        Self { grid: grid.clone(), values, center: f(0.0), tail }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            center: f(self.center),
            tail: self.tail,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    fn check_grid(&self, other: &RadialFn) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(NlsError::InvalidArgument("functions live on different grids".into()))
        }
    }

    /// `self + c·other` on a common grid.
    pub fn axpy(&self, c: f64, other: &RadialFn) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
            center: self.center + c * other.center,
            tail: self.tail,
        })
    }

    pub fn sub(&self, other: &RadialFn) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Radial derivative at every node from five-point stencils, using the
    /// even extension across the origin.
    pub fn derivative(&self) -> Vec<f64> {
        self.stencil_derivative(1)
    }

    /// Second radial derivative at every node.
    pub fn second_derivative(&self) -> Vec<f64> {
        self.stencil_derivative(2)
    }

    fn stencil_derivative(&self, order: usize) -> Vec<f64> {
        let r = &self.grid.nodes;
        let n = r.len();
        // Extended abscissae: −r₂, −r₁, 0, r₁, …
        let x = |j: usize| match j {
            0 => -r[1],
            1 => -r[0],
            2 => 0.0,
            _ => r[j - 3],
        };
        let f = |j: usize| match j {
            0 => self.values[1],
            1 => self.values[0],
            2 => self.center,
            _ => self.values[j - 3],
        };
        let total = n + 3;
        let mut out = vec![0.0; n];
        let mut xs = [0.0; 5];
        for (i, o) in out.iter_mut().enumerate() {
            let j = i + 3;
            let first = (j - 2).min(total - 5);
            for (k, v) in xs.iter_mut().enumerate() {
                *v = x(first + k);
            }
            let w = fornberg(x(j), &xs, order);
            *o = (0..5).map(|k| w[k] * f(first + k)).sum();
        }
        out
    }

    /// Value at an arbitrary radius: even quadratic below `r_1`, monotone
    /// cubic Hermite between nodes and the tail model beyond `r_max`.
    pub fn eval(&self, x: f64, slopes: &[f64]) -> Result<f64> {
        let r = &self.grid.nodes;
        let f = &self.values;
        let n = r.len();
        if x <= 0.0 {
            return Ok(self.center);
        }
        if x < r[0] {
            let s = x / r[0];
            return Ok(self.center + (f[0] - self.center) * s * s);
        }
        if x > r[n - 1] {
            let rn = r[n - 1];
            return match self.tail {
                Tail::Zero => Ok(0.0),
                Tail::Exponential { k } => {
                    let nn = self.dim() as f64;
                    Ok(f[n - 1] * (-k * (x - rn)).exp() * (rn / x).powf(0.5 * (nn - 1.0)))
                }
                Tail::Power { p } => Ok(f[n - 1] * (rn / x).powf(p)),
            };
        }
        let i = match r.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return Ok(f[i]),
            Err(i) => i - 1,
        };
        let h = r[i + 1] - r[i];
        let delta = (f[i + 1] - f[i]) / h;
        let (mut m0, mut m1) = (slopes[i], slopes[i + 1]);
        if delta == 0.0 {
            m0 = 0.0;
            m1 = 0.0;
        } else {
            // Fritsch–Carlson limiter.
            if m0 * delta < 0.0 {
                m0 = 0.0;
            }
            if m1 * delta < 0.0 {
                m1 = 0.0;
            }
            let (al, be) = (m0 / delta, m1 / delta);
            let s = al * al + be * be;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m0 = tau * al * delta;
                m1 = tau * be * delta;
            }
        }
        let t = (x - r[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * f[i]
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * f[i + 1]
            + (t3 - t2) * h * m1)
    }

    /// Samples this profile on another grid.
    pub fn resample(&self, grid: &Arc<RadialGrid>) -> Result<Self> {
        let slopes = self.derivative();
        let mut values = Vec::with_capacity(grid.len());
        for &x in &grid.nodes {
            values.push(self.eval(x, &slopes)?);
        }
        RadialFn::new(grid.clone(), self.center, values, self.tail)
    }

    /// `∫ |f|^p` over R^N.
    pub fn lp_pow(&self, p: f64) -> f64 {
        let g = |v: f64| v.abs().powf(p);
        let vals: Vec<f64> = self.values.iter().map(|&v| g(v)).collect();
        self.grid.integrate(g(self.center), &vals)
    }

    pub fn mass_sq(&self) -> f64 {
        let vals: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.grid.integrate(self.center * self.center, &vals)
    }

    /// `∫ f g` over R^N.
    pub fn inner(&self, other: &RadialFn) -> Result<f64> {
        self.check_grid(other)?;
        let vals: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(self.grid.integrate(self.center * other.center, &vals))
    }

    pub fn is_positive_decreasing(&self) -> bool {
        self.center > 0.0
            && self.values.iter().all(|&v| v > 0.0)
            && self.center >= self.values[0]
            && self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// CSV with `#` metadata lines, a `r,value` header and the origin as first row.
    pub fn to_csv(&self, metadata: &[(&str, String)]) -> String {
        let mut s = String::new();
        for (k, v) in metadata {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "# N={}", self.dim());
        s.push_str("r,value\n");
        let _ = writeln!(s, "{:.16e},{:.16e}", 0.0, self.center);
        for (r, v) in self.grid.nodes.iter().zip(&self.values) {
            let _ = writeln!(s, "{r:.16e},{v:.16e}");
        }
        s
    }

    /// Parses the format written by [`to_csv`](Self::to_csv). A leading `r = 0`
    /// row is taken as the center value; otherwise the center is extrapolated.
    pub fn from_csv(text: &str, dim: usize) -> Result<Self> {
        let mut rs = Vec::new();
        let mut vs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("r,") {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| NlsError::InvalidArgument(format!("malformed row '{line}'")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| NlsError::InvalidArgument(format!("malformed row '{line}': {e}")))
            };
            rs.push(parse(it.next())?);
            vs.push(parse(it.next())?);
        }
        if rs.len() < 4 {
            return Err(NlsError::InvalidArgument("profile CSV has too few rows".into()));
        }
        let (center, rs, vs) = if rs[0] == 0.0 {
            (vs[0], rs[1..].to_vec(), vs[1..].to_vec())
        } else {
            // Even extrapolation through the first two nodes.
            let (r1, r2) = (rs[0], rs[1]);
            let c = (vs[0] * r2 * r2 - vs[1] * r1 * r1) / (r2 * r2 - r1 * r1);
            (c, rs, vs)
        };
        let grid = RadialGrid::from_nodes(dim, rs)?;
        RadialFn::new(grid, center, vs, Tail::Zero)
    }
}

/// Finite-difference weights for the `order`-th derivative at `z` on five nodes.
fn fornberg(z: f64, x: &[f64; 5], order: usize) -> [f64; 5] {
    let mut c = [[0.0; 3]; 5];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..5 {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    let mut w = [0.0; 5];
    for (k, v) in w.iter_mut().enumerate() {
        *v = c[k][order];
    }
    w
}

pub fn lp_norm(f: &RadialFn, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(NlsError::InvalidArgument(format!("p = {p} must be at least 1")));
    }
    Ok(f.lp_pow(p).powf(1.0 / p))
}

pub fn grad_norm_sq(f: &RadialFn) -> f64 {
    let d = f.derivative();
    let vals: Vec<f64> = d.iter().map(|v| v * v).collect();
    f.grid.integrate(0.0, &vals)
}

/// `‖f − g‖_{H¹}`.
pub fn h1_dist(f: &RadialFn, g: &RadialFn) -> Result<f64> {
    let d = f.sub(g)?;
    Ok((grad_norm_sq(&d) + d.mass_sq()).sqrt())
}

pub fn h1_norm(f: &RadialFn) -> f64 {
    (grad_norm_sq(f) + f.mass_sq()).sqrt()
}

/// Largest normalized residual of `−f″ − (N−1)/r f′ = F(f)` over interior nodes.
pub fn ode_residual_with(f: &RadialFn, rhs: &Nonlinearity) -> f64 {
    let d1 = f.derivative();
    let d2 = f.second_derivative();
    let nn = f.dim() as f64;
    let r = &f.grid.nodes;
    let mut worst: f64 = 0.0;
    for i in 0..r.len() - 1 {
        let v = f.values[i];
        let res = -d2[i] - (nn - 1.0) / r[i] * d1[i] - rhs.eval(v);
        let scale = 1.0 + rhs.leading_term(v);
        worst = worst.max(res.abs() / scale);
    }
    worst
}

/// Residual of the full equation `−Δu = λu + μ|u|^{q−2}u + |u|^{2*−2}u`.
pub fn ode_residual(f: &RadialFn, lambda: f64, params: &ProblemParams) -> f64 {
    ode_residual_with(f, &Nonlinearity::from_params(params, lambda))
}
