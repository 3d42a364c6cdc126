//! Eigenvalue families attached to a period matrix.
//!
//! For integer vectors `(n, m)` the holomorphic form with periods
//! `m − Ω n` has coefficient vector `c = π (Im Ω)⁻¹ (m − Ω̄ n)` in the
//! normalized basis and area `A = ½ c* (Im Ω) c`. Pairs `(n′, m′)` whose
//! coefficients are proportional to `c` contribute `λ = 2A |c′/c|²`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodData {
    pub genus: usize,
    /// Row-major `g × g` period matrix.
    pub omega: Vec<Complex64>,
    pub n: Vec<i64>,
    pub m: Vec<i64>,
}

impl PeriodData {
    pub fn new(omega: Vec<Complex64>, n: Vec<i64>, m: Vec<i64>) -> Result<Self> {
        let genus = n.len();
        let pd = PeriodData { genus, omega, n, m };
        pd.validate()?;
        Ok(pd)
    }

    /// Genus one with `Ω = τ`.
    pub fn elliptic(tau: Complex64, n: i64, m: i64) -> Result<Self> {
        PeriodData::new(alloc::vec![tau], alloc::vec![n], alloc::vec![m])
    }

    pub fn omega_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.genus, self.genus, &self.omega)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.genus;
        if g == 0 || self.omega.len() != g * g || self.m.len() != g {
            return Err(Error::invalid(
                "torus",
                format!("period data of genus {g} needs {} entries of Ω and vectors of length {g}", g * g),
            ));
        }
        let om = self.omega_matrix();
        for i in 0..g {
            for j in 0..i {
                if (om[(i, j)] - om[(j, i)]).norm() > 1e-10 {
                    return Err(Error::invalid("torus", format!("Ω is not symmetric at ({i}, {j})")));
                }
            }
        }
        if om.map(|z| z.im).cholesky().is_none() {
            return Err(Error::invalid("torus", "Im Ω is not positive definite"));
        }
        if self.n.iter().chain(&self.m).all(|&x| x == 0) {
            return Err(Error::invalid("torus", "(n, m) must be nonzero"));
        }
        Ok(())
    }

    /// `v = m − Ω n`.
    pub fn period_vector(&self) -> Vec<Complex64> {
        period_vector(&self.omega_matrix(), &self.n, &self.m)
    }
}

fn period_vector(om: &DMatrix<Complex64>, n: &[i64], m: &[i64]) -> Vec<Complex64> {
    let nv = DVector::from_iterator(n.len(), n.iter().map(|&x| Complex64::new(x as f64, 0.0)));
    let mv = DVector::from_iterator(m.len(), m.iter().map(|&x| Complex64::new(x as f64, 0.0)));
    (mv - om * nv).iter().copied().collect()
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverCondition {
    pub v: Vec<Complex64>,
    /// `N_ij = v_i / v_j`, row-major.
    pub ratios: Vec<Complex64>,
    /// Largest violation of `N_ij N_jk = N_ik`.
    pub residual: f64,
    pub consistent: bool,
}

pub fn check_cover_condition(pd: &PeriodData) -> Result<CoverCondition> {
    pd.validate()?;
    let v = pd.period_vector();
    let g = pd.genus;
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let zero = |z: &Complex64| z.norm() <= 1e-14 * scale.max(1.0);
    if v.iter().any(zero) {
        return Err(Error::invalid(
            "torus",
            format!("cover condition fails structurally: v = {v:?} has a vanishing component"),
        ));
    }
    let mut ratios = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            ratios.push(v[i] / v[j]);
        }
    }
    let mut residual: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                residual = residual.max((ratios[i * g + j] * ratios[j * g + k] - ratios[i * g + k]).norm());
            }
        }
    }
    Ok(CoverCondition { v, ratios, residual, consistent: residual < 1e-9 })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coefficients {
    pub c: Vec<Complex64>,
    pub area: f64,
}

/// Precomputed `(Im Ω)⁻¹`, `Im Ω` and `Ω̄` for repeated coefficient evaluation.
#[derive(Clone, Debug)]
pub struct CoefficientMap {
    genus: usize,
    y: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    omega_bar: DMatrix<Complex64>,
}

impl CoefficientMap {
    pub fn new(pd: &PeriodData) -> Result<Self> {
        pd.validate()?;
        let om = pd.omega_matrix();
        let y = om.map(|z| z.im);
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("torus", "Im Ω is singular"))?;
        Ok(CoefficientMap { genus: pd.genus, y, y_inv, omega_bar: om.map(|z| z.conj()) })
    }

    /// `c = π (Im Ω)⁻¹ (m − Ω̄ n)`.
    pub fn coefficients(&self, n: &[i64], m: &[i64]) -> Vec<Complex64> {
        let w = period_vector(&self.omega_bar, n, m);
        (0..self.genus)
            .map(|k| (0..self.genus).map(|j| w[j] * self.y_inv[(k, j)]).sum::<Complex64>() * PI)
            .collect()
    }

    /// `½ c* (Im Ω) c`.
    pub fn area(&self, c: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.genus {
            for j in 0..self.genus {
                acc += c[i].conj() * c[j] * self.y[(i, j)];
            }
        }
        0.5 * acc.re
    }

    /// The real symmetric form `x ↦ 2A(x)` on `(n′, m′) ∈ ℝ^{2g}`.
    pub fn quadratic_form(&self) -> DMatrix<f64> {
        let g = self.genus;
        let q = |x: &[i64]| 2.0 * self.area(&self.coefficients(&x[..g], &x[g..]));
        let mut out = DMatrix::zeros(2 * g, 2 * g);
        for a in 0..2 * g {
            for b in 0..2 * g {
                let mut ea = alloc::vec![0i64; 2 * g];
                ea[a] += 1;
                if a == b {
                    out[(a, a)] = q(&ea);
                } else {
                    let mut eab = ea.clone();
                    eab[b] += 1;
                    let mut eb = alloc::vec![0i64; 2 * g];
                    eb[b] = 1;
                    out[(a, b)] = 0.5 * (q(&eab) - q(&ea) - q(&eb));
                }
            }
        }
        out
    }
}

pub fn primitive_coefficients(pd: &PeriodData) -> Result<Coefficients> {
    let map = CoefficientMap::new(pd)?;
    let c = map.coefficients(&pd.n, &pd.m);
    let area = map.area(&c);
    Ok(Coefficients { c, area })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumEntry {
    pub n: Vec<i64>,
    pub m: Vec<i64>,
    /// `c′ = scale · c`.
    pub scale: Complex64,
    pub lambda: f64,
    /// The nonnegative branch; `−rho` belongs to the same entry.
    pub rho: f64,
}

/// Entries of the solution set whose first `n′` coordinate equals `first`.
pub fn solution_slice(pd: &PeriodData, bound: i64, first: i64) -> Result<Vec<SpectrumEntry>> {
    if bound < 1 {
        return Err(Error::invalid("torus", "box bound must be at least 1"));
    }
    let map = CoefficientMap::new(pd)?;
    let c = map.coefficients(&pd.n, &pd.m);
    let two_a = 2.0 * map.area(&c);
    let pivot = (0..pd.genus).max_by(|&i, &j| c[i].norm().total_cmp(&c[j].norm())).unwrap_or(0);
    let cnorm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let g = pd.genus;
    let dims = 2 * g;
    let mut x = alloc::vec![-bound; dims];
    x[0] = first;
    let mut out = Vec::new();
    loop {
        if x.iter().any(|&t| t != 0) {
            let (n, m) = x.split_at(g);
            let cp = map.coefficients(n, m);
            let cpn: f64 = cp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut worst: f64 = 0.0;
            for i in 0..g {
                for j in 0..i {
                    worst = worst.max((cp[i] * c[j] - cp[j] * c[i]).norm());
                }
            }
            if worst <= 1e-9 * cpn * cnorm {
                let scale = cp[pivot] / c[pivot];
                let lambda = two_a * scale.norm_sqr();
                out.push(SpectrumEntry { n: n.to_vec(), m: m.to_vec(), scale, lambda, rho: lambda.sqrt() });
            }
        }
        let mut k = dims - 1;
        loop {
            if k == 0 {
                return Ok(out);
            }
            if x[k] < bound {
                x[k] += 1;
                break;
            }
            x[k] = -bound;
            k -= 1;
        }
    }
}

/// All `(n′, m′) ∈ [−B, B]^{2g} \ {0}` with coefficients parallel to `c`.
pub fn solution_set(pd: &PeriodData, bound: i64) -> Result<Vec<SpectrumEntry>> {
    let mut out = Vec::new();
    for first in -bound..=bound {
        out.extend(solution_slice(pd, bound, first)?);
    }
    Ok(out)
}

/// The even function summed by the origami action.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ActionFunction {
    Zero,
    /// `exp(−x²/width²)`.
    Gaussian { width: f64 },
}

impl ActionFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ActionFunction::Zero => 0.0,
            ActionFunction::Gaussian { width } => libm::exp(-(x * x) / (width * width)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrigamiAction {
    pub partial_sum: f64,
    /// Bound on the contribution of lattice points outside the box, when known.
    pub tail_bound: Option<f64>,
    pub terms: usize,
    pub bound: i64,
    pub lambda: f64,
}

/// Checks `f(x) = f(−x)` on a spread of sample points.
pub fn check_even<F: Fn(f64) -> f64>(f: &F) -> Result<()> {
    for i in 1..=64 {
        let x = 0.173 * i as f64;
        let (a, b) = (f(x), f(-x));
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::invalid("torus", format!("action function is not even: f({x}) ≠ f(−{x})")));
        }
    }
    Ok(())
}

/// `Σ f(ρ/Λ)` over the solution set: each `±(n′, m′)` pair carries the two
/// branches `±ρ`, which for even `f` is one term per entry.
pub fn origami_action_with<F: Fn(f64) -> f64>(entries: &[SpectrumEntry], f: F, lambda: f64) -> Result<f64> {
    check_even(&f)?;
    if !(lambda > 0.0) {
        return Err(Error::invalid("torus", format!("Λ = {lambda} must be positive")));
    }
    Ok(entries.iter().map(|e| f(e.rho / lambda)).sum())
}

pub fn origami_action(pd: &PeriodData, func: &ActionFunction, lambda: f64, bound: i64) -> Result<OrigamiAction> {
    let entries = solution_set(pd, bound)?;
    let partial_sum = origami_action_with(&entries, |x| func.eval(x), lambda)?;
    let tail_bound = action_tail_bound(pd, func, lambda, bound)?;
    Ok(OrigamiAction { partial_sum, tail_bound, terms: entries.len(), bound, lambda })
}

/// Bound on the lattice points outside `[−B, B]^{2g}`, through the smallest
/// eigenvalue of the form `2A`.
pub fn action_tail_bound(pd: &PeriodData, func: &ActionFunction, lambda: f64, bound: i64) -> Result<Option<f64>> {
    Ok(match *func {
        ActionFunction::Zero => Some(0.0),
        ActionFunction::Gaussian { width } => {
            let form = CoefficientMap::new(pd)?.quadratic_form();
            let mu = form.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            Some(gaussian_tail(mu / (lambda * lambda * width * width), 2 * pd.genus, bound))
        }
    })
}

/// `Σ_{|x|_∞ > B} exp(−μ|x|²)` over `ℤ^d`, bounded shell by shell.
fn gaussian_tail(mu: f64, dims: usize, bound: i64) -> f64 {
    let mut total = 0.0;
    let mut k = bound + 1;
    loop {
        let shell = libm::pow((2 * k + 1) as f64, dims as f64) - libm::pow((2 * k - 1) as f64, dims as f64);
        let term = shell * libm::exp(-mu * (k * k) as f64);
        total += term;
        if term < 1e-300 || term < 1e-18 * total || k > bound + 100_000 {
            return total;
        }
        k += 1;
    }
}

/// `prefactor · Σ_{x ∈ ℤ²} exp(−xᵀ Q x)` for a positive definite 2×2 form.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianTheta {
    pub prefactor: f64,
    pub form: [[f64; 2]; 2],
}

impl GaussianTheta {
    pub fn det(&self) -> f64 {
        self.form[0][0] * self.form[1][1] - self.form[0][1] * self.form[1][0]
    }

    /// Poisson summation: `Σ e^{−xᵀQx} = (π/√det Q) Σ e^{−π² kᵀQ⁻¹k}`.
    pub fn dual(&self) -> GaussianTheta {
        let d = self.det();
        let [[a, b], [c, e]] = self.form;
        let s = PI * PI / d;
        GaussianTheta { prefactor: self.prefactor * PI / d.sqrt(), form: [[s * e, -s * b], [-s * c, s * a]] }
    }

    pub fn sum(&self, bound: i64) -> f64 {
        let [[a, b], [c, e]] = self.form;
        let mut acc = 0.0;
        for p in -bound..=bound {
            for q in -bound..=bound {
                let (x, y) = (p as f64, q as f64);
                acc += libm::exp(-(a * x * x + (b + c) * x * y + e * y * y));
            }
        }
        self.prefactor * acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoissonCheck {
    pub direct: f64,
    pub dual: f64,
    pub discrepancy: f64,
}

/// Both sides of the Poisson identity for the Gaussian `exp(−λ/(Λ²w²))`
/// summed over the full lattice `(n′, m′) ∈ ℤ²` of a genus-one period.
pub fn poisson_reference(pd: &PeriodData, width: f64, lambda: f64, bound: i64) -> Result<PoissonCheck> {
    if pd.genus != 1 {
        return Err(Error::invalid("torus", "the Poisson reference is defined for genus one only"));
    }
    let q = CoefficientMap::new(pd)?.quadratic_form() / (lambda * lambda * width * width);
    let theta = GaussianTheta { prefactor: 1.0, form: [[q[(0, 0)], q[(0, 1)]], [q[(1, 0)], q[(1, 1)]]] };
    let direct = theta.sum(bound);
    let dual = theta.dual().sum(bound);
    Ok(PoissonCheck { direct, dual, discrepancy: (direct - dual).abs() })
}
