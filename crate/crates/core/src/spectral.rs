//! Test-function pairs and the trace-formula evaluation of the Laplace,
//! Dirac and supertrace spectral actions on compact hyperbolic surfaces.
//!
//! Conventions: `h` is even with support in [−1, 1] and
//! `f(r) = ∫ h(t) e^{irt} dt = 2 ∫₀¹ h(t) cos(rt) dt`. The identity terms are
//! taken exactly as `Λ²(g − 1) ∫₀^∞ r f(r) tanh(Λπr) dr` (Laplace) and
//! `Λ²(g − 1) ∫_ℝ r f(r) coth(Λπr) dr` (Dirac).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hyperbolic::{GeodesicClass, LengthSpectrum};
use crate::quad::GaussLegendre;

const PANEL_NODES: usize = 16;

/// An even cutoff function supported in [−1, 1].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TestFunction {
    /// `exp(−t²/(1 − t²))`, smooth.
    Bump,
    /// `cos(πt/2)`.
    CosineWindow,
    /// `(1 − t²)²`, continuously differentiable.
    Polynomial,
    /// Samples `(t, h(t))`, interpolated linearly in `t²` on [0, 1].
    Sampled { t: Vec<f64>, h: Vec<f64> },
    /// A finite linear combination.
    Combination(Vec<(f64, TestFunction)>),
}

impl TestFunction {
    /// Validates a sampled function: evenness, support, and a sample at 0.
    pub fn sampled(t: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if t.len() != h.len() || t.is_empty() {
            return Err(Error::invalid("spectral", "sample grids must be nonempty and of equal length"));
        }
        let mut pos: Vec<(f64, f64)> = Vec::new();
        for (&ti, &hi) in t.iter().zip(&h) {
            if ti.abs() > 1.0 && hi.abs() > 1e-12 {
                return Err(Error::invalid("spectral", format!("support violation: h({ti}) = {hi}")));
            }
            if let Some(j) = t.iter().position(|&s| (s + ti).abs() < 1e-14) {
                if (h[j] - hi).abs() > 1e-12 {
                    return Err(Error::invalid("spectral", format!("non-even sample: h({ti}) ≠ h({})", t[j])));
                }
            }
            if (0.0..=1.0).contains(&ti) {
                pos.push((ti, hi));
            }
        }
        pos.sort_by(|a, b| a.0.total_cmp(&b.0));
        pos.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);
        if pos.first().is_none_or(|p| p.0 != 0.0) {
            return Err(Error::invalid("spectral", "sampled h must include t = 0"));
        }
        if pos.last().is_none_or(|p| (p.0 - 1.0).abs() > 1e-14) {
            pos.push((1.0, 0.0));
        }
        if pos.last().is_some_and(|p| p.1.abs() > 1e-12) {
            return Err(Error::invalid("spectral", "support violation: h(1) must vanish"));
        }
        let (t, h) = pos.into_iter().unzip();
        Ok(TestFunction::Sampled { t, h })
    }

    pub fn h(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= 1.0 {
            return 0.0;
        }
        match self {
            TestFunction::Bump => libm::exp(-t * t / (1.0 - t * t)),
            TestFunction::CosineWindow => libm::cos(PI * t / 2.0),
            TestFunction::Polynomial => (1.0 - t * t) * (1.0 - t * t),
            TestFunction::Sampled { t: ts, h } => {
                let u = t * t;
                let k = ts.partition_point(|&s| s * s <= u).clamp(1, ts.len() - 1);
                let (u0, u1) = (ts[k - 1] * ts[k - 1], ts[k] * ts[k]);
                h[k - 1] + (h[k] - h[k - 1]) * (u - u0) / (u1 - u0)
            }
            TestFunction::Combination(parts) => parts.iter().map(|(a, f)| a * f.h(t)).sum(),
        }
    }

    /// `(h(t) − h(0))/t²` without cancellation.
    pub fn second_difference(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= 1.0 {
            return -self.h(0.0) / (t * t);
        }
        match self {
            TestFunction::Bump => {
                if t == 0.0 {
                    -1.0
                } else {
                    libm::expm1(-t * t / (1.0 - t * t)) / (t * t)
                }
            }
            TestFunction::CosineWindow => {
                if t == 0.0 {
                    -PI * PI / 8.0
                } else {
                    let s = libm::sin(PI * t / 4.0);
                    -2.0 * s * s / (t * t)
                }
            }
            TestFunction::Polynomial => t * t - 2.0,
            TestFunction::Sampled { t: ts, h } => {
                let u = t * t;
                let k = ts.partition_point(|&s| s * s <= u).clamp(1, ts.len() - 1);
                if k == 1 {
                    (h[1] - h[0]) / (ts[1] * ts[1])
                } else {
                    (self.h(t) - h[0]) / u
                }
            }
            TestFunction::Combination(parts) => parts.iter().map(|(a, f)| a * f.second_difference(t)).sum(),
        }
    }
}

/// A cutoff `h` together with its Fourier transform `f`, evaluated by
/// composite Gauss–Legendre quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct TestPair {
    pub h: TestFunction,
    pub nodes: usize,
    rule: GaussLegendre,
}

pub fn make_test_pair(h: TestFunction, quadrature_nodes: usize) -> Result<TestPair> {
    if quadrature_nodes < PANEL_NODES {
        return Err(Error::invalid("spectral", format!("need at least {PANEL_NODES} quadrature nodes")));
    }
    Ok(TestPair { h, nodes: quadrature_nodes, rule: GaussLegendre::new(PANEL_NODES) })
}

impl TestPair {
    fn panels_for(&self, r: f64) -> usize {
        self.nodes / PANEL_NODES + libm::ceil(r.abs() / 3.0) as usize
    }

    pub fn h(&self, t: f64) -> f64 {
        self.h.h(t)
    }

    /// `f(r) = 2 ∫₀¹ h(t) cos(rt) dt`.
    pub fn f(&self, r: f64) -> f64 {
        2.0 * self.rule.integrate(0.0, 1.0, self.panels_for(r), |t| self.h.h(t) * libm::cos(r * t))
    }

    /// The continuation `f(z) = ∫ h(t) e^{t(z − 1/2)} dt`, so that
    /// `f(ir + 1/2)` is the real transform at r.
    pub fn f_complex(&self, z: Complex64) -> Complex64 {
        let w = z - 0.5;
        let panels = self.panels_for(w.norm());
        let (ts, ws) = self.rule.composite(0.0, 1.0, panels);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, wt) in ts.into_iter().zip(ws) {
            acc += (w * t).cosh() * (wt * self.h.h(t));
        }
        acc * 2.0
    }

    /// `∫₀^∞ r f(r) dr` in the Abel sense, `2h(0) − 2 ∫₀¹ (h(t) − h(0))/t² dt`.
    pub fn first_moment(&self) -> f64 {
        let panels = self.nodes / PANEL_NODES;
        2.0 * self.h.h(0.0) - 2.0 * self.rule.integrate(0.0, 1.0, panels, |t| self.h.second_difference(t))
    }

    /// `∫₀^∞ r f(r) w(r) dr` for a weight decaying like `e^{−rate·r}`.
    fn damped_moment<W: Fn(f64) -> f64>(&self, rate: f64, weight: W) -> f64 {
        let cut = 40.0 / rate;
        let panels = self.nodes / PANEL_NODES + libm::ceil(cut / 0.5) as usize;
        self.rule.integrate(0.0, cut, panels, |r| r * self.f(r) * weight(r))
    }

    /// `∫₀^∞ r f(r) tanh(Λπr) dr`.
    pub fn tanh_moment(&self, lambda: f64) -> f64 {
        let a = 2.0 * lambda * PI;
        self.first_moment() - self.damped_moment(a, |r| 2.0 / (libm::exp(a * r) + 1.0))
    }

    /// `∫_ℝ r f(r) coth(Λπr) dr`; the integrand tends to `f(0)/(Λπ)` at 0.
    pub fn coth_moment(&self, lambda: f64) -> f64 {
        let a = 2.0 * lambda * PI;
        2.0 * (self.first_moment() + self.damped_moment(a, |r| 2.0 / libm::expm1(a * r)))
    }
}

/// The trace-formula value of a spectral action.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActionResult {
    pub identity_term: f64,
    pub geodesic_term: Complex64,
    pub total: Complex64,
    /// Imaginary part left in the identity term after cancellation.
    pub imaginary_residue: f64,
    pub flagged: bool,
    pub contributing_class_count: usize,
    pub lambda: f64,
    pub quadrature_nodes: usize,
}

impl ActionResult {
    fn new(identity: f64, geodesic: Complex64, classes: usize, lambda: f64, nodes: usize) -> Self {
        ActionResult {
            identity_term: identity,
            geodesic_term: geodesic,
            total: geodesic + identity,
            imaginary_residue: 0.0,
            flagged: false,
            contributing_class_count: classes,
            lambda,
            quadrature_nodes: nodes,
        }
    }
}

fn check_common(genus: u32, lambda: f64) -> Result<()> {
    if genus < 2 {
        return Err(Error::invalid(
            "spectral",
            format!("genus {genus}: trace-formula actions need a torsion-free cover of genus ≥ 2"),
        ));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("spectral", format!("Λ = {lambda} must be positive and finite")));
    }
    Ok(())
}

fn check_certified(spectrum: &LengthSpectrum, reach: f64) -> Result<()> {
    if spectrum.certified_length < reach * (1.0 - 1e-12) {
        return Err(Error::invalid(
            "spectral",
            format!(
                "spectrum is certified only below {} but the cutoff reaches {reach}",
                spectrum.certified_length
            ),
        ));
    }
    Ok(())
}

fn primitive_only(spectrum: &LengthSpectrum) -> Result<()> {
    if let Some(c) = spectrum.classes.iter().find(|c| !c.primitive) {
        return Err(Error::invalid(
            "spectral",
            format!("expected primitive classes only; length {} is a power", c.length),
        ));
    }
    Ok(())
}

/// Laplace action summed over oriented closed geodesics, powers included.
pub fn laplace_action_geodesic(
    genus: u32,
    spectrum: &LengthSpectrum,
    pair: &TestPair,
    lambda: f64,
) -> Result<ActionResult> {
    check_common(genus, lambda)?;
    let reach = 1.0 / lambda;
    check_certified(spectrum, reach)?;
    for c in spectrum.classes.iter().filter(|c| c.primitive) {
        let mut k = 2u32;
        while c.length * k as f64 <= reach {
            let target = c.length * k as f64;
            let found = spectrum.classes.iter().any(|d| {
                !d.primitive
                    && (d.length - target).abs() <= 1e-9 * (1.0 + target)
                    && (d.primitive_length - c.length).abs() <= 1e-9 * (1.0 + c.length)
            });
            if !found {
                return Err(Error::invalid(
                    "spectral",
                    format!("spectrum is not closed under powers: {k}·{} is missing", c.length),
                ));
            }
            k += 1;
        }
    }
    let mut sum = 0.0;
    let mut count = 0;
    for c in &spectrum.classes {
        if c.length * lambda > 1.0 {
            continue;
        }
        count += 1;
        sum += c.multiplicity as f64 * c.primitive_length / c.norm_gap() * pair.h(lambda * c.length);
    }
    let identity = lambda * lambda * (genus as f64 - 1.0) * pair.tanh_moment(lambda);
    Ok(ActionResult::new(identity, Complex64::new(lambda * sum, 0.0), count, lambda, pair.nodes))
}

/// `S_Λ(P)`: the powers ℓ ≥ 1 with 2ℓ·arccosh(t/2) ≤ 1/Λ.
pub fn power_set(trace: f64, lambda: f64) -> Vec<u32> {
    let a = libm::acosh(trace.abs() / 2.0);
    let mut out = Vec::new();
    let mut l = 1u32;
    while 2.0 * l as f64 * a * lambda <= 1.0 {
        out.push(l);
        l += 1;
    }
    out
}

fn conjugacy_sum(spectrum: &LengthSpectrum, chi: Option<&[Complex64]>, pair: &TestPair, lambda: f64) -> (Complex64, usize) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut count = 0;
    for (i, c) in spectrum.classes.iter().enumerate() {
        let a = libm::acosh(c.trace / 2.0);
        let ls = power_set(c.trace, lambda);
        if !ls.is_empty() {
            count += 1;
        }
        for l in ls {
            let lf = l as f64;
            let w = a * pair.h(lambda * 2.0 * lf * a) / libm::sinh(lf * a);
            let x = chi.map(|x| x[i].powu(l)).unwrap_or(Complex64::new(1.0, 0.0));
            sum += x * (c.multiplicity as f64 * w);
        }
    }
    (sum * lambda, count)
}

/// Laplace action summed over primitive conjugacy classes and their powers.
pub fn laplace_action_conjugacy(
    genus: u32,
    spectrum: &LengthSpectrum,
    pair: &TestPair,
    lambda: f64,
) -> Result<ActionResult> {
    check_common(genus, lambda)?;
    check_certified(spectrum, 1.0 / lambda)?;
    primitive_only(spectrum)?;
    let (sum, count) = conjugacy_sum(spectrum, None, pair, lambda);
    let identity = lambda * lambda * (genus as f64 - 1.0) * pair.tanh_moment(lambda);
    Ok(ActionResult::new(identity, Complex64::new(sum.re, 0.0), count, lambda, pair.nodes))
}

/// Dirac action with the spin character `chi[i]` on class `i`.
pub fn dirac_action(
    genus: u32,
    spectrum: &LengthSpectrum,
    chi: &[Complex64],
    pair: &TestPair,
    lambda: f64,
) -> Result<ActionResult> {
    check_common(genus, lambda)?;
    check_certified(spectrum, 1.0 / lambda)?;
    primitive_only(spectrum)?;
    if chi.len() != spectrum.classes.len() {
        return Err(Error::invalid(
            "spectral",
            format!("missing character value: {} classes but {} values", spectrum.classes.len(), chi.len()),
        ));
    }
    let (sum, count) = conjugacy_sum(spectrum, Some(chi), pair, lambda);
    let identity = lambda * lambda * (genus as f64 - 1.0) * pair.coth_moment(lambda);
    Ok(ActionResult::new(identity, sum, count, lambda, pair.nodes))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SuperVariant {
    /// `f(λ/Λ)` with `h_Λ(t) = Λ e^{−t(Λ−1)/2} h(Λt)`.
    LambdaScaled,
    /// `f̃(r/Λ)` with `h_Λ(t) = Λ h(Λt)`.
    RScaled,
}

/// `G(x, χ) = h(x) + h(−x) − χ(e^{−x/2} h(x) + e^{x/2} h(−x))` for any `h`.
pub fn g_function<H: Fn(f64) -> f64>(h: H, x: f64, chi: Complex64) -> Complex64 {
    let (hp, hm) = (h(x), h(-x));
    let even = Complex64::new(hp + hm, 0.0);
    even - chi * (libm::exp(-x / 2.0) * hp + libm::exp(x / 2.0) * hm)
}

/// `h_Λ(t) = Λ e^{−t(Λ−1)/2} h(Λt)`.
pub fn h_lambda(pair: &TestPair, lambda: f64, t: f64) -> f64 {
    lambda * libm::exp(-t * (lambda - 1.0) / 2.0) * pair.h(lambda * t)
}

/// One geodesic-side term of the supertrace action.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuperTerm {
    pub class: usize,
    pub power: u32,
    pub value: Complex64,
}

/// Terms `λ(γ)/(N^{1/2} − N^{−1/2}) · G_Λ(log N, χ(γ))` over γ = P^k.
pub fn super_terms(
    spectrum: &LengthSpectrum,
    chi: &[Complex64],
    pair: &TestPair,
    lambda: f64,
    variant: SuperVariant,
) -> Vec<SuperTerm> {
    let mut out = Vec::new();
    for (i, c) in spectrum.classes.iter().enumerate() {
        let mut k = 1u32;
        while lambda * c.length * k as f64 <= 1.0 {
            let x = c.length * k as f64;
            let weight = c.multiplicity as f64 * c.length / (2.0 * libm::sinh(x / 2.0));
            let ck = chi[i].powu(k);
            let g = match variant {
                SuperVariant::LambdaScaled => g_function(|t| h_lambda(pair, lambda, t), x, ck),
                SuperVariant::RScaled => g_function(|t| pair.h(t), lambda * x, ck) * lambda,
            };
            out.push(SuperTerm { class: i, power: k, value: g * weight });
            k += 1;
        }
    }
    out
}

/// The unscaled supertrace geodesic terms (Λ = 1).
pub fn supertrace_terms(spectrum: &LengthSpectrum, chi: &[Complex64], pair: &TestPair) -> Vec<SuperTerm> {
    let mut out = Vec::new();
    for (i, c) in spectrum.classes.iter().enumerate() {
        let mut k = 1u32;
        while c.length * k as f64 <= 1.0 {
            let x = c.length * k as f64;
            let weight = c.multiplicity as f64 * c.length / (2.0 * libm::sinh(x / 2.0));
            out.push(SuperTerm { class: i, power: k, value: g_function(|t| pair.h(t), x, chi[i].powu(k)) * weight });
            k += 1;
        }
    }
    out
}

/// Supersymmetric spectral action from the Selberg supertrace formula.
///
/// The identity term `iΛ(g − 1) ∫_ℝ f(ir + 1/2) tanh(Λπr) dr` is computed by
/// quadrature; its real part is reported and what remains imaginary is the
/// residue, flagged when above `residue_tol`.
pub fn super_action(
    genus: u32,
    spectrum: &LengthSpectrum,
    chi: &[Complex64],
    pair: &TestPair,
    lambda: f64,
    variant: SuperVariant,
    residue_tol: f64,
) -> Result<ActionResult> {
    check_common(genus, lambda)?;
    check_certified(spectrum, 1.0 / lambda)?;
    primitive_only(spectrum)?;
    if chi.len() != spectrum.classes.len() {
        return Err(Error::invalid(
            "spectral",
            format!("missing character value: {} classes but {} values", spectrum.classes.len(), chi.len()),
        ));
    }
    let terms = super_terms(spectrum, chi, pair, lambda, variant);
    let geodesic: Complex64 = terms.iter().map(|t| t.value).sum();
    let mut classes: Vec<usize> = terms.iter().map(|t| t.class).collect();
    classes.dedup();

    let cut = 60.0;
    let panels = pair.nodes / PANEL_NODES + libm::ceil(2.0 * cut / 0.5) as usize;
    let (rs, ws) = pair.rule.composite(-cut, cut, panels);
    let mut integral = Complex64::new(0.0, 0.0);
    for (r, w) in rs.into_iter().zip(ws) {
        let fz = pair.f_complex(Complex64::new(0.5, r));
        integral += fz * (w * libm::tanh(lambda * PI * r));
    }
    let identity = Complex64::new(0.0, lambda * (genus as f64 - 1.0)) * integral;
    let mut res = ActionResult::new(identity.re, geodesic, classes.len(), lambda, pair.nodes);
    res.imaginary_residue = identity.im.abs();
    res.flagged = res.imaginary_residue > residue_tol;
    Ok(res)
}

/// The Lorentzian difference `f(λ) = (λ² + (s − ½)²)⁻¹ − (λ² + (σ − ½)²)⁻¹`
/// and its transform `h(t) = e^{−a|t|}/(2a) − e^{−b|t|}/(2b)` with
/// `a = s − ½`, `b = σ − ½`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZetaTestFunction {
    pub s: Complex64,
    pub sigma: Complex64,
}

pub fn zeta_test_function(s: Complex64, sigma: Complex64) -> Result<ZetaTestFunction> {
    if s.re <= 1.0 || sigma.re <= 1.0 {
        return Err(Error::invalid("spectral", format!("need Re(s) > 1 and Re(σ) > 1, got {s} and {sigma}")));
    }
    Ok(ZetaTestFunction { s, sigma })
}

impl ZetaTestFunction {
    pub fn f(&self, lambda: f64) -> Complex64 {
        let a = self.s - 0.5;
        let b = self.sigma - 0.5;
        let l2 = lambda * lambda;
        (a * a + l2).inv() - (b * b + l2).inv()
    }

    pub fn h(&self, t: f64) -> Complex64 {
        let a = self.s - 0.5;
        let b = self.sigma - 0.5;
        let t = t.abs();
        (-a * t).exp() / (a * 2.0) - (-b * t).exp() / (b * 2.0)
    }

    /// `Σ_P Σ_ℓ χ(P)^ℓ arccosh(t_P/2) h(2ℓ arccosh(t_P/2)) / sinh(ℓ arccosh(t_P/2))`.
    pub fn geodesic_sum(&self, classes: &[GeodesicClass], chi: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (c, x) in classes.iter().zip(chi) {
            let half = c.length / 2.0;
            let mut l = 1u32;
            loop {
                let lf = l as f64;
                let term = x.powu(l) * self.h(2.0 * lf * half) * (half / libm::sinh(lf * half));
                total += term * c.multiplicity as f64;
                if term.norm() < 1e-18 * total.norm().max(1e-300) || l > 100_000 {
                    break;
                }
                l += 1;
            }
        }
        total
    }
}

/// `log Z(s) = Σ_P Σ_{k=0}^{k_max} log(1 − χ(P) e^{−ℓ_P(s + k)})`.
pub fn selberg_log_zeta(classes: &[GeodesicClass], chi: &[Complex64], s: Complex64, k_max: u32) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (c, x) in classes.iter().zip(chi) {
        for k in 0..=k_max {
            let e = (-(s + k as f64) * c.length).exp();
            total += (-(x * e)).ln_1p_complex() * c.multiplicity as f64;
        }
    }
    total
}

trait Ln1p {
    fn ln_1p_complex(self) -> Complex64;
}

impl Ln1p for Complex64 {
    fn ln_1p_complex(self) -> Complex64 {
        if self.norm() < 1e-4 {
            // series keeps full precision for tiny arguments
            let mut term = self;
            let mut sum = Complex64::new(0.0, 0.0);
            for n in 1..12 {
                sum += term / n as f64;
                term *= -self;
            }
            sum
        } else {
            (self + 1.0).ln()
        }
    }
}

/// `Z′/Z(s) = Σ_P Σ_{m≥1} ℓ_P χ(P)^m e^{−mℓ_P s} / (1 − e^{−mℓ_P})`.
pub fn selberg_log_derivative(classes: &[GeodesicClass], chi: &[Complex64], s: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (c, x) in classes.iter().zip(chi) {
        let mut m = 1u32;
        loop {
            let ml = m as f64 * c.length;
            let term = x.powu(m) * (-s * ml).exp() * (c.length / -libm::expm1(-ml));
            total += term * c.multiplicity as f64;
            if term.norm() < 1e-18 * total.norm().max(1e-300) || m > 100_000 {
                break;
            }
            m += 1;
        }
    }
    total
}
