//! Ruelle transfer operators for boundary branch systems.
//!
//! A branch `s` acts on points `x` of its source interval through the
//! Möbius map `g_s`, and the operator is
//! `(L_β f)(x) = Σ_s |g_s′(x)|^β f(g_s x)`. Functions are represented by
//! their values on Chebyshev nodes of the first kind on each interval.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::CosetAction;

/// Label under which the analytic Gauss tail looks up its permutation.
pub const TAIL_LABEL: &str = "tail";

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Branch {
    pub label: String,
    /// Index of the interval on which `x` lives.
    pub interval: usize,
    /// `[[a, b], [c, d]]` acting as `x ↦ (ax + b)/(cx + d)`.
    pub map: [[f64; 2]; 2],
}

impl Branch {
    pub fn apply(&self, x: f64) -> f64 {
        let [[a, b], [c, d]] = self.map;
        (a * x + b) / (c * x + d)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let [[a, b], [c, d]] = self.map;
        let den = c * x + d;
        (a * d - b * c) / (den * den)
    }
}

/// The branches `1/(x + n)` for every `n ≥ start`, summed in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussTail {
    pub start: u32,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchSystem {
    pub intervals: Vec<[f64; 2]>,
    pub branches: Vec<Branch>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub tail: Option<GaussTail>,
    /// Larger intervals carrying the interpolation nodes, one per interval.
    /// Every branch must map its collocation interval into the target's.
    #[cfg_attr(feature = "serde", serde(default))]
    pub collocation: Option<Vec<[f64; 2]>>,
}

impl BranchSystem {
    /// Checks the intervals, the branch maps and the disjointness of images.
    pub fn validate(&self) -> Result<Vec<usize>> {
        if self.intervals.is_empty() {
            return Err(Error::invalid("transfer", "branch system has no intervals"));
        }
        for (i, &[lo, hi]) in self.intervals.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid("transfer", format!("interval {i} = [{lo}, {hi}] is degenerate")));
            }
            for (j, &[lo2, hi2]) in self.intervals.iter().enumerate().skip(i + 1) {
                if lo.max(lo2) < hi.min(hi2) {
                    return Err(Error::invalid("transfer", format!("overlapping intervals {i} and {j}")));
                }
            }
        }
        if let Some(t) = self.tail {
            if t.start == 0 || self.intervals.len() != 1 || self.intervals[0] != [0.0, 1.0] {
                return Err(Error::invalid("transfer", "the Gauss tail needs the single interval [0, 1] and start ≥ 1"));
            }
        }
        let mut targets = Vec::with_capacity(self.branches.len());
        let mut images: Vec<(usize, f64, f64, &str)> = Vec::new();
        for b in &self.branches {
            let Some(&[lo, hi]) = self.intervals.get(b.interval) else {
                return Err(Error::invalid("transfer", format!("branch '{}' names a missing interval", b.label)));
            };
            let [[_, _], [c, d]] = b.map;
            if (c * lo + d) * (c * hi + d) <= 0.0 {
                return Err(Error::invalid("transfer", format!("branch '{}' has a pole on its interval", b.label)));
            }
            let dmin = b.derivative(lo).abs().min(b.derivative(hi).abs());
            if !(dmin > 1e-12) {
                return Err(Error::invalid("transfer", format!("branch '{}': derivative near zero", b.label)));
            }
            let (y0, y1) = (b.apply(lo), b.apply(hi));
            let (ylo, yhi) = (y0.min(y1), y0.max(y1));
            let slack = 1e-12 * (1.0 + ylo.abs().max(yhi.abs()));
            let Some(t) = self.intervals.iter().position(|&[l, h]| ylo >= l - slack && yhi <= h + slack) else {
                return Err(Error::invalid(
                    "transfer",
                    format!("image [{ylo}, {yhi}] of branch '{}' is not inside one interval", b.label),
                ));
            };
            targets.push(t);
            for &(src, l2, h2, other) in &images {
                if src == b.interval && ylo.max(l2) < yhi.min(h2) - slack {
                    return Err(Error::invalid(
                        "transfer",
                        format!("branches '{other}' and '{}' have overlapping images", b.label),
                    ));
                }
            }
            images.push((b.interval, ylo, yhi, &b.label));
        }
        if let Some(col) = &self.collocation {
            if col.len() != self.intervals.len() {
                return Err(Error::invalid("transfer", "need one collocation interval per interval"));
            }
            for (&[lo, hi], &[clo, chi]) in self.intervals.iter().zip(col) {
                if !(clo <= lo && hi <= chi) {
                    return Err(Error::invalid("transfer", format!("collocation interval [{clo}, {chi}] misses [{lo}, {hi}]")));
                }
            }
            for (b, &t) in self.branches.iter().zip(&targets) {
                let [lo, hi] = col[b.interval];
                let [[_, _], [c, d]] = b.map;
                let (y0, y1) = (b.apply(lo), b.apply(hi));
                if (c * lo + d) * (c * hi + d) <= 0.0 || y0.min(y1) < col[t][0] || y0.max(y1) > col[t][1] {
                    return Err(Error::invalid(
                        "transfer",
                        format!("branch '{}' does not map its collocation interval into the target's", b.label),
                    ));
                }
            }
        }
        Ok(targets)
    }

    fn collocation_intervals(&self) -> Vec<[f64; 2]> {
        self.collocation.clone().unwrap_or_else(|| self.intervals.clone())
    }
}

/// Interval on which the Gauss branches are collocated. Every `1/(x + n)`
/// maps a Bernstein ellipse around it strictly inside itself; no ellipse
/// around [0, 1] has that property because `1/(x + 1)` has slope −1 at 0.
pub const GAUSS_COLLOCATION: [f64; 2] = [0.0, 3.0];

/// The continued-fraction branches `1/(x + n)`, `n = 1..=n_max`, on [0, 1],
/// optionally completed by the analytic tail `n > n_max`.
pub fn gauss_system(n_max: u32, with_tail: bool) -> BranchSystem {
    BranchSystem {
        intervals: alloc::vec![[0.0, 1.0]],
        branches: (1..=n_max)
            .map(|n| Branch { label: n.to_string(), interval: 0, map: [[0.0, 1.0], [1.0, n as f64]] })
            .collect(),
        tail: with_tail.then_some(GaussTail { start: n_max + 1 }),
        collocation: Some(alloc::vec![GAUSS_COLLOCATION]),
    }
}

/// Chebyshev nodes of the first kind on `[lo, hi]` with barycentric weights.
pub fn chebyshev_nodes(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let theta = (2 * i + 1) as f64 * PI / (2 * n) as f64;
        xs.push(mid + half * libm::cos(theta));
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        ws.push(sign * libm::sin(theta));
    }
    (xs, ws)
}

/// Values at `y` of all Lagrange basis polynomials on the nodes.
pub fn lagrange_row(xs: &[f64], ws: &[f64], y: f64) -> Vec<f64> {
    if let Some(k) = xs.iter().position(|&x| x == y) {
        let mut row = alloc::vec![0.0; xs.len()];
        row[k] = 1.0;
        return row;
    }
    let terms: Vec<f64> = xs.iter().zip(ws).map(|(&x, &w)| w / (y - x)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / denom).collect()
}

/// Barycentric interpolation of node values at `y`.
pub fn interpolate(xs: &[f64], ws: &[f64], values: &[Complex64], y: f64) -> Complex64 {
    lagrange_row(xs, ws, y).iter().zip(values).map(|(l, v)| v * l).sum()
}

/// Monomial coefficients of each Lagrange basis polynomial.
fn lagrange_monomials(xs: &[f64]) -> Vec<Vec<f64>> {
    let n = xs.len();
    (0..n)
        .map(|j| {
            let mut coef = alloc::vec![1.0];
            let mut scale = 1.0;
            for (m, &x) in xs.iter().enumerate() {
                if m == j {
                    continue;
                }
                let mut next = alloc::vec![0.0; coef.len() + 1];
                for (k, &c) in coef.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= x * c;
                }
                coef = next;
                scale *= xs[j] - x;
            }
            coef.into_iter().map(|c| c / scale).collect()
        })
        .collect()
}

const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// The Hurwitz zeta function `Σ_{n≥0} (q + n)^{−s}` for `Re s > 1`, `q > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: Complex64, q: f64) -> Complex64 {
    let shift = 12usize.max(libm::ceil(s.norm() - q).max(0.0) as usize);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..shift {
        sum += Complex64::new(q + n as f64, 0.0).powc(-s);
    }
    let a = q + shift as f64;
    let la = libm::log(a);
    let pow = |e: Complex64| (e * la).exp();
    sum += pow(Complex64::new(1.0, 0.0) - s) / (s - 1.0);
    sum += pow(-s) * 0.5;
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = 2 * j + 2;
        sum += rising * pow(-s - (k as f64 - 1.0)) * (b / fact);
        rising = rising * (s + (k - 1) as f64) * (s + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
    }
    sum
}

/// A collocation matrix for a transfer operator, possibly extended over a
/// permutation action of degree `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub beta: Complex64,
    pub nodes: usize,
    pub intervals: Vec<[f64; 2]>,
    pub degree: usize,
    /// Collocation points of each interval, interval by interval.
    pub points: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl TransferMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// `M f` for node values `f`.
    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(values);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = if self.is_real() {
            let real = self.matrix.map(|z| z.re);
            real.complex_eigenvalues().iter().copied().collect()
        } else {
            match self.matrix.clone().eigenvalues() {
                Some(v) => v.iter().copied().collect(),
                None => nalgebra::Schur::new(self.matrix.clone()).unpack().1.diagonal().iter().copied().collect(),
            }
        };
        ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.re.total_cmp(&a.re)));
        ev
    }

    pub fn leading_eigenvalue(&self) -> Complex64 {
        self.eigenvalues()[0]
    }
}

fn weight(d: f64, beta: Complex64) -> Complex64 {
    (beta * libm::log(d.abs())).exp()
}

/// Assembles `L_β` on `nodes` Chebyshev points per interval.
pub fn build_transfer_matrix(sys: &BranchSystem, beta: Complex64, nodes: usize) -> Result<TransferMatrix> {
    assemble(sys, None, beta, nodes)
}

/// Assembles `L_{β, H⊂Γ}` acting on functions of `(x, a)` with `a` a coset:
/// `(L f)(x, a) = Σ_s |g_s′(x)|^β f(g_s x, σ_s(a))`, where `σ_s` is the
/// permutation attached to the branch label (and to `"tail"` for the tail).
pub fn extend_to_coset(sys: &BranchSystem, action: &CosetAction, beta: Complex64, nodes: usize) -> Result<TransferMatrix> {
    assemble(sys, Some(action), beta, nodes)
}

fn assemble(sys: &BranchSystem, action: Option<&CosetAction>, beta: Complex64, nodes: usize) -> Result<TransferMatrix> {
    if nodes < 2 {
        return Err(Error::invalid("transfer", "need at least two nodes per interval"));
    }
    let targets = sys.validate()?;
    let degree = action.map_or(1, |a| a.degree);
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(sys.branches.len() + 1);
    for b in &sys.branches {
        perms.push(match action {
            Some(a) => a.image(&b.label)?.to_vec(),
            None => alloc::vec![0],
        });
    }
    let tail_perm = match (action, sys.tail) {
        (Some(a), Some(_)) => a.image(TAIL_LABEL)?.to_vec(),
        _ => alloc::vec![0; 1],
    };
    let grids: Vec<(Vec<f64>, Vec<f64>)> = sys.collocation_intervals().iter().map(|&[lo, hi]| chebyshev_nodes(nodes, lo, hi)).collect();
    let block = nodes * sys.intervals.len();
    let size = block * degree;
    let mut m = DMatrix::<Complex64>::zeros(size, size);
    let tail_coefs = sys.tail.map(|_| lagrange_monomials(&grids[0].0));

    for (s, b) in sys.branches.iter().enumerate() {
        let (src, dst) = (b.interval, targets[s]);
        let (xs, _) = &grids[src];
        let (ys, yw) = &grids[dst];
        for (i, &x) in xs.iter().enumerate() {
            let w = weight(b.derivative(x), beta);
            let row = lagrange_row(ys, yw, b.apply(x));
            for a in 0..degree {
                let r = a * block + src * nodes + i;
                let c0 = perms[s][a] * block + dst * nodes;
                for (j, l) in row.iter().enumerate() {
                    m[(r, c0 + j)] += w * *l;
                }
            }
        }
    }
    if let (Some(t), Some(coefs)) = (sys.tail, tail_coefs) {
        let xs = &grids[0].0;
        for (i, &x) in xs.iter().enumerate() {
            let q = x + t.start as f64;
            let zetas: Vec<Complex64> = (0..nodes).map(|k| hurwitz_zeta(beta * 2.0 + k as f64, q)).collect();
            for a in 0..degree {
                let r = a * block + i;
                let c0 = tail_perm[a] * block;
                for (j, coef) in coefs.iter().enumerate() {
                    let v: Complex64 = coef.iter().zip(&zetas).map(|(c, z)| z * *c).sum();
                    m[(r, c0 + j)] += v;
                }
            }
        }
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("transfer", "transfer matrix has non-finite entries"));
    }
    let points = grids.into_iter().flat_map(|g| g.0).collect();
    Ok(TransferMatrix { beta, nodes, intervals: sys.collocation_intervals(), degree, points, matrix: m })
}

/// Direct evaluation of `(L_β f)(x)` for `x` in interval `interval`,
/// truncating any tail after `tail_terms` branches.
pub fn apply_direct<F: Fn(f64) -> Complex64>(
    sys: &BranchSystem,
    beta: Complex64,
    f: F,
    interval: usize,
    x: f64,
    tail_terms: u32,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for b in sys.branches.iter().filter(|b| b.interval == interval) {
        acc += weight(b.derivative(x), beta) * f(b.apply(x));
    }
    if let Some(t) = sys.tail.filter(|_| interval == 0) {
        for n in t.start..t.start + tail_terms {
            let q = x + n as f64;
            acc += weight(1.0 / (q * q), beta) * f(1.0 / q);
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DetMethod {
    Exact,
    /// `exp(−Σ_{k≤K} tr(Mᵏ)/k)`.
    Truncated(u32),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FredholmDet {
    pub value: Complex64,
    pub log_abs: f64,
    pub spectral_radius: f64,
    /// `min |1 − λ|` over the eigenvalues.
    pub distance_to_one: f64,
    /// Ratio of largest to smallest modulus of `1 − λ`.
    pub condition: f64,
    /// An eigenvalue sits at 1: a zero or pole candidate of the zeta ratio.
    pub singular: bool,
    pub warning: Option<String>,
}

/// `det(1 − M)` together with spectral diagnostics.
pub fn fredholm_det(tm: &TransferMatrix, method: DetMethod, singular_tol: f64) -> FredholmDet {
    let ev = tm.eigenvalues();
    let spectral_radius = ev.first().map_or(0.0, |z| z.norm());
    let gaps: Vec<f64> = ev.iter().map(|z| (Complex64::new(1.0, 0.0) - z).norm()).collect();
    let distance_to_one = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let largest = gaps.iter().copied().fold(0.0, f64::max);
    let mut warning = None;
    let value = match method {
        DetMethod::Exact => {
            let n = tm.size();
            let a = DMatrix::<Complex64>::identity(n, n) - &tm.matrix;
            a.lu().determinant()
        }
        DetMethod::Truncated(order) => {
            if spectral_radius >= 1.0 {
                warning = Some(format!(
                    "spectral radius {spectral_radius} ≥ 1: the trace expansion of order {order} does not converge"
                ));
            }
            let mut power = tm.matrix.clone();
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=order {
                acc += power.trace() / k as f64;
                power = &power * &tm.matrix;
            }
            (-acc).exp()
        }
    };
    FredholmDet {
        value,
        log_abs: libm::log(value.norm()),
        spectral_radius,
        distance_to_one,
        condition: if distance_to_one > 0.0 { largest / distance_to_one } else { f64::INFINITY },
        singular: distance_to_one < singular_tol,
        warning,
    }
}

/// `det(1 − L) / det(1 − K)`.
pub fn fredholm_ratio(l: &TransferMatrix, k: &TransferMatrix, method: DetMethod, singular_tol: f64) -> (Complex64, FredholmDet, FredholmDet) {
    let dl = fredholm_det(l, method, singular_tol);
    let dk = fredholm_det(k, method, singular_tol);
    (dl.value / dk.value, dl, dk)
}

/// A coset action in which every branch (and the tail) acts trivially.
pub fn trivial_action(sys: &BranchSystem, degree: usize) -> Result<CosetAction> {
    let id: Vec<usize> = (0..degree).collect();
    let mut images: BTreeMap<String, Vec<usize>> = sys.branches.iter().map(|b| (b.label.clone(), id.clone())).collect();
    if sys.tail.is_some() {
        images.insert(TAIL_LABEL.to_string(), id);
    }
    CosetAction::permutations(degree, images)
}
