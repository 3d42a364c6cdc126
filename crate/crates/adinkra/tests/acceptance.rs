//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use adinkra::parallel;
use adinkra_core::adinkra::{
    build_quotient, cube, dashing_to_kasteleyn, two_colored_cycles, well_dashed, Chromotopology, Dashing,
    DashingCensus,
};
use adinkra_core::codes::{weight, BinaryCode};
use adinkra_core::embedding::{attach_faces, dual_origami_graph, triangulation_stats};
use adinkra_core::hyperbolic::{triangle_generators, with_powers, GeodesicClass, LengthSpectrum, SpectrumOptions};
use adinkra_core::origami::validate_origami_graph;
use adinkra_core::spectral::{
    dirac_action, g_function, laplace_action_conjugacy, laplace_action_geodesic, make_test_pair, super_action,
    super_terms, supertrace_terms, SuperVariant, TestFunction, TestPair,
};
use adinkra_core::torus::{poisson_reference, solution_set, PeriodData};
use adinkra_core::transfer::{build_transfer_matrix, extend_to_coset, gauss_system, trivial_action};
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Codes spanned by `dim` words of `GF(2)^n` whose every nonzero member has
/// weight divisible by 4, one per subspace.
fn doubly_even_codes(n: u32, dim: usize) -> Vec<BinaryCode> {
    let words: Vec<u64> = (1..1u64 << n).filter(|&w| weight(w).is_multiple_of(4)).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    let mut pick = |gens: Vec<u64>| {
        let mut span: Vec<u64> = (0..1u64 << gens.len())
            .map(|s| gens.iter().enumerate().filter(|(i, _)| s >> i & 1 == 1).fold(0, |a, (_, &g)| a ^ g))
            .collect();
        span.sort_unstable();
        span.dedup();
        if span.len() != 1 << gens.len() || span.iter().any(|&w| !weight(w).is_multiple_of(4)) {
            return;
        }
        if seen.insert(span) {
            out.push(BinaryCode::new(n, gens).unwrap());
        }
    };
    match dim {
        0 => pick(Vec::new()),
        1 => words.iter().for_each(|&w| pick(vec![w])),
        2 => {
            for (i, &a) in words.iter().enumerate() {
                for &b in &words[i + 1..] {
                    pick(vec![a, b]);
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

fn expected_genus(n: u32, k: u32) -> i64 {
    if n < 2 {
        return 0;
    }
    // 1 + 2^{N−k}(N − 4)/8, exact
    1 + ((1i64 << (n - k)) * (n as i64 - 4)) / 8
}

fn genus_formula() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 2..=6u32 {
        for k in 0..=1usize {
            for code in doubly_even_codes(n, k) {
                let g = build_quotient(n, &code).map_err(|e| e.to_string())?;
                let s = attach_faces(&g).map_err(|e| e.to_string())?;
                let want = expected_genus(n, k as u32);
                ensure(s.euler_genus == want, || {
                    format!("N = {n}, code {:?}: genus {} ≠ {want}", code.generator_strings(), s.euler_genus)
                })?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} codes"))
}

fn exhaustive(g: &Chromotopology, well: bool) -> Result<DashingCensus, String> {
    let surface = attach_faces(g).map_err(|e| e.to_string())?.faces;
    let cycles = two_colored_cycles(g).map_err(|e| e.to_string())?;
    let faces = if well { surface.clone() } else { cycles };
    let pool = parallel::pool(0).map_err(|e| e.to_string())?;
    parallel::dashing_census(&pool, g, &faces, &surface, 0, 0).map_err(|e| e.to_string())
}

fn a41() -> Chromotopology {
    build_quotient(4, &BinaryCode::from_strings(4, &["1111"]).unwrap()).unwrap()
}

fn dashing_counts() -> Outcome {
    let square = cube(2).unwrap();
    let faces = two_colored_cycles(&square).unwrap();
    let sq = (0..16u64).filter(|&m| well_dashed(&square, &faces, &Dashing::from_mask(4, m)).unwrap()).count();
    ensure(sq == 8, || format!("square: {sq} well-dashed, expected 8"))?;

    let start = Instant::now();
    let c = exhaustive(&a41(), true)?;
    let elapsed = start.elapsed();
    ensure(c.exhaustive && c.examined == 1 << 16, || format!("examined {}", c.examined))?;
    ensure(c.well_dashed == 512 && c.well_dashed_classes == 4, || {
        format!("A_4,1: {} well-dashed (expected 512), {} classes (expected 4)", c.well_dashed, c.well_dashed_classes)
    })?;
    ensure(elapsed < Duration::from_secs(60), || format!("census took {elapsed:?}"))?;
    let all = exhaustive(&a41(), false)?;
    Ok(format!(
        "square 8/16; A_4,1 512/65536 in 4 classes ({elapsed:.2?}); odd on every 2-colored 4-cycle: {} in {} classes",
        all.well_dashed, all.well_dashed_classes
    ))
}

fn kasteleyn_equivalence() -> Outcome {
    let mut total = 0;
    for g in [cube(2).unwrap(), a41()] {
        let faces = if g.n() == 2 { two_colored_cycles(&g).unwrap() } else { attach_faces(&g).unwrap().faces };
        let e = g.edge_count();
        for m in 0..1u64 << e {
            let d = Dashing::from_mask(e, m);
            let w = well_dashed(&g, &faces, &d).map_err(|e| e.to_string())?;
            let k = dashing_to_kasteleyn(&g, &faces, &d).map_err(|e| e.to_string())?.kasteleyn_ok;
            ensure(w == k, || format!("N = {}, mask {m:#x}: well-dashed {w}, Kasteleyn {k}", g.n()))?;
            total += 1;
        }
        let c = exhaustive(&g, g.n() != 2)?;
        ensure(c.disagreements == 0, || format!("census disagreements {}", c.disagreements))?;
    }
    Ok(format!("{total} dashings"))
}

fn gauss_bonnet() -> Outcome {
    let mut checked = 0;
    for n in [5u32, 6] {
        for k in 0..=1 {
            for code in doubly_even_codes(n, k) {
                let g = build_quotient(n, &code).unwrap();
                let s = attach_faces(&g).unwrap();
                let t = triangulation_stats(&s).map_err(|e| e.to_string())?;
                // 2E(π/2 − 2π/N) = E(N − 4)π/N against 4π(g − 1)
                let e = g.edge_count() as i64;
                let (num, den) = (e * (n as i64 - 4), n as i64);
                ensure(num == 4 * (s.euler_genus - 1) * den, || {
                    format!("N = {n}: {num}/{den} π ≠ 4(g − 1)π with g = {}", s.euler_genus)
                })?;
                let (tn, td) = (*t.total_area_over_pi.numer(), *t.total_area_over_pi.denom());
                ensure(tn * den == num * td && t.gauss_bonnet, || format!("reported area {tn}/{td} π"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} surfaces"))
}

fn dual_origami() -> Outcome {
    let mut checked = 0;
    for n in [4u32, 6] {
        for k in 0..=2 {
            for code in doubly_even_codes(n, k) {
                let g = build_quotient(n, &code).unwrap();
                let s = attach_faces(&g).unwrap();
                let dual = dual_origami_graph(&g, &s).map_err(|e| format!("N = {n}: {e}"))?;
                let v = validate_origami_graph(&dual.graph);
                ensure(v.is_valid(), || format!("N = {n}, {:?}: {:?}", code.generator_strings(), v.witnesses))?;
                checked += 1;
            }
        }
    }
    let mut rejected = 0;
    for k in 0..=1 {
        for code in doubly_even_codes(5, k) {
            let g = build_quotient(5, &code).unwrap();
            let s = attach_faces(&g).unwrap();
            let r = dual_origami_graph(&g, &s);
            ensure(matches!(&r, Err(e) if !e.is_resource()), || "N = 5 dual was not rejected".into())?;
            rejected += 1;
        }
    }
    Ok(format!("{checked} duals valid, {rejected} N = 5 quotients rejected"))
}

fn builtins() -> Vec<TestPair> {
    [TestFunction::Bump, TestFunction::CosineWindow, TestFunction::Polynomial]
        .into_iter()
        .map(|h| make_test_pair(h, 64).unwrap())
        .collect()
}

fn random_spectrum(rng: &mut ChaCha8Rng) -> Vec<GeodesicClass> {
    let unit = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let count = 1 + rng.next_u32() % 8;
    (0..count)
        .map(|_| GeodesicClass::from_length(0.2 + 2.8 * unit(rng), 1 + (rng.next_u32() % 4) as u64))
        .collect()
}

fn regrouping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let pairs = builtins();
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let prim = random_spectrum(&mut rng);
        let lambda = [0.5, 1.0, 2.0][trial % 3];
        let pair = &pairs[trial % pairs.len()];
        let conj = laplace_action_conjugacy(2, &LengthSpectrum::synthetic(prim.clone()), pair, lambda)
            .map_err(|e| e.to_string())?;
        let full = LengthSpectrum::synthetic(with_powers(&prim, 1.0 / lambda));
        let geo = laplace_action_geodesic(2, &full, pair, lambda).map_err(|e| e.to_string())?;
        let err = if conj.geodesic_term.norm() == 0.0 && geo.geodesic_term.norm() == 0.0 {
            0.0
        } else {
            crel(conj.geodesic_term, geo.geodesic_term)
        };
        worst = worst.max(err).max(crel(conj.total, geo.total));
        ensure(worst <= 1e-12, || format!("trial {trial}: relative difference {worst:e}"))?;
    }
    Ok(format!("50 spectra, worst relative difference {worst:.1e}"))
}

fn cutoff() -> Outcome {
    let mut checked = 0;
    for pair in builtins() {
        for lambda in [0.5, 1.0, 2.0, 10.0] {
            let lmin = 1.0 / lambda * 1.000001;
            let classes = vec![
                GeodesicClass::from_length(lmin, 2),
                GeodesicClass::from_length(lmin * 1.7, 1),
                GeodesicClass::from_length(lmin * 3.1, 5),
            ];
            let prim = LengthSpectrum::synthetic(classes.clone());
            let chi = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)];
            let results = [
                laplace_action_conjugacy(3, &prim, &pair, lambda),
                laplace_action_geodesic(3, &LengthSpectrum::synthetic(with_powers(&classes, 10.0 / lambda)), &pair, lambda),
                dirac_action(3, &prim, &chi, &pair, lambda),
                super_action(3, &prim, &chi, &pair, lambda, SuperVariant::LambdaScaled, 1e-6),
                super_action(3, &prim, &chi, &pair, lambda, SuperVariant::RScaled, 1e-6),
            ];
            for r in results {
                let r = r.map_err(|e| e.to_string())?;
                ensure(r.geodesic_term == Complex64::new(0.0, 0.0), || {
                    format!("Λ = {lambda}: geodesic term {} ≠ 0", r.geodesic_term)
                })?;
                ensure(r.contributing_class_count == 0, || "classes reported as contributing".into())?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} actions"))
}

fn dirac_laplace() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for (i, pair) in builtins().iter().enumerate() {
        for lambda in [0.5, 1.0, 2.0] {
            let spec = LengthSpectrum::synthetic(random_spectrum(&mut rng));
            let ones = vec![Complex64::new(1.0, 0.0); spec.classes.len()];
            let d = dirac_action(2, &spec, &ones, pair, lambda).map_err(|e| e.to_string())?;
            let l = laplace_action_conjugacy(2, &spec, pair, lambda).map_err(|e| e.to_string())?;
            let diff = (d.geodesic_term - l.geodesic_term).norm() / l.geodesic_term.norm().max(1.0);
            worst = worst.max(diff);
            ensure(diff <= 1e-12, || format!("test function {i}, Λ = {lambda}: {diff:e}"))?;
        }
    }
    let mut drift: f64 = 0.0;
    for h in [TestFunction::Bump, TestFunction::CosineWindow, TestFunction::Polynomial] {
        let coarse = make_test_pair(h.clone(), 64).unwrap();
        let fine = make_test_pair(h, 128).unwrap();
        let empty = LengthSpectrum::synthetic(Vec::new());
        for lambda in [0.5, 1.0, 2.0] {
            let pairs = [
                (
                    laplace_action_conjugacy(2, &empty, &coarse, lambda).unwrap().identity_term,
                    laplace_action_conjugacy(2, &empty, &fine, lambda).unwrap().identity_term,
                ),
                (
                    dirac_action(2, &empty, &[], &coarse, lambda).unwrap().identity_term,
                    dirac_action(2, &empty, &[], &fine, lambda).unwrap().identity_term,
                ),
                (
                    super_action(2, &empty, &[], &coarse, lambda, SuperVariant::LambdaScaled, 1.0).unwrap().identity_term,
                    super_action(2, &empty, &[], &fine, lambda, SuperVariant::LambdaScaled, 1.0).unwrap().identity_term,
                ),
            ];
            for (a, b) in pairs {
                let d = (a - b).abs() / a.abs().max(1.0);
                drift = drift.max(d);
                ensure(d <= 1e-10, || format!("Λ = {lambda}: identity {a} at 64 nodes, {b} at 128"))?;
            }
        }
    }
    Ok(format!("geodesic difference {worst:.1e}, identity drift under doubling {drift:.1e}"))
}

fn super_reductions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut terms = 0;
    for pair in builtins() {
        // short lengths so that several powers fall below the cutoff
        let short = random_spectrum(&mut rng)
            .into_iter()
            .map(|c| GeodesicClass::from_length(0.1 + c.length / 3.5, c.multiplicity))
            .collect();
        let spec = LengthSpectrum::synthetic(short);
        let chi: Vec<Complex64> =
            (0..spec.classes.len()).map(|i| Complex64::from_polar(1.0, 0.7 * i as f64)).collect();
        let base = supertrace_terms(&spec, &chi, &pair);
        for variant in [SuperVariant::LambdaScaled, SuperVariant::RScaled] {
            let scaled = super_terms(&spec, &chi, &pair, 1.0, variant);
            ensure(scaled.len() == base.len(), || format!("{} terms vs {}", scaled.len(), base.len()))?;
            for (a, b) in scaled.iter().zip(&base) {
                ensure(a.class == b.class && a.power == b.power, || "term order differs".into())?;
                let d = (a.value - b.value).norm() / b.value.norm().max(1.0);
                ensure(d <= 1e-12, || format!("class {} power {}: {d:e}", a.class, a.power))?;
                terms += 1;
            }
        }
        let g0 = g_function(|t| pair.h(t), 0.0, Complex64::new(1.0, 0.0));
        ensure(g0 == Complex64::new(0.0, 0.0), || format!("G(0, 1) = {g0}"))?;
    }
    Ok(format!("{terms} terms matched, G(0, 1) = 0"))
}

fn triangle_spectrum() -> Outcome {
    let start = Instant::now();
    let group = triangle_generators(5, 5, 2).map_err(|e| e.to_string())?;
    let pool = parallel::pool(0).map_err(|e| e.to_string())?;
    let l_max = 4.0;
    let run = |depth: usize| {
        let opts = SpectrumOptions { max_depth: Some(depth), ..SpectrumOptions::new(l_max) };
        parallel::length_spectrum(&pool, &group, &opts)
    };
    let signature = |s: &LengthSpectrum, below: f64| -> Vec<(f64, u64)> {
        s.classes.iter().filter(|c| c.length <= below - 1e-9).map(|c| (c.length, c.multiplicity)).collect()
    };
    let same = |a: &[(f64, u64)], b: &[(f64, u64)]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.0 - y.0).abs() < 1e-9 && x.1 == y.1)
    };
    let mut depth = 1;
    let mut prev = run(depth).map_err(|e| e.to_string())?;
    let converged = loop {
        depth += 1;
        let next = run(depth).map_err(|e| e.to_string())?;
        let cert = prev.certified_length;
        ensure(same(&signature(&prev, cert), &signature(&next, cert)), || {
            format!("depth {depth}: classes below {cert} changed")
        })?;
        if prev.complete {
            ensure(same(&signature(&prev, l_max + 1e-9), &signature(&next, l_max + 1e-9)), || {
                "spectrum changed after convergence".into()
            })?;
            break prev;
        }
        ensure(depth < 200, || "no convergence by depth 200".into())?;
        prev = next;
    };
    ensure(converged.max_det_error < 1e-12, || format!("|det − 1| up to {:e}", converged.max_det_error))?;
    let min_trace = converged.classes.iter().map(|c| c.trace.abs()).fold(f64::INFINITY, f64::min);
    ensure(min_trace > 2.0 + 1e-9, || format!("trace {min_trace}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} lengths, {} classes, converged at depth {}, {elapsed:.2?}",
        converged.classes.len(),
        converged.class_count,
        converged.depth
    ))
}

fn transfer_oracle() -> Outcome {
    let sys = gauss_system(40, true);
    let one = Complex64::new(1.0, 0.0);
    let lead = |nodes: usize| -> Result<Vec<Complex64>, String> {
        Ok(build_transfer_matrix(&sys, one, nodes).map_err(|e| e.to_string())?.eigenvalues())
    };
    let (e32, e48) = (lead(32)?, lead(48)?);
    for (nodes, e) in [(32, &e32), (48, &e48)] {
        ensure((e[0] - one).norm() < 1e-8, || format!("{nodes} nodes: leading eigenvalue {}", e[0]))?;
    }
    ensure((e32[0] - e48[0]).norm() < 1e-8, || "resolutions disagree".into())?;
    let sub = e32[1].norm();
    ensure((sub - 0.30366).abs() < 1e-4, || format!("|λ₂| = {sub}"))?;

    let base = build_transfer_matrix(&sys, one, 32).unwrap();
    let d1 = extend_to_coset(&sys, &trivial_action(&sys, 1).unwrap(), one, 32).map_err(|e| e.to_string())?;
    let identical = base.matrix.iter().zip(d1.matrix.iter()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    ensure(identical && base.matrix.shape() == d1.matrix.shape(), || "d = 1 extension differs".into())?;

    let d2 = extend_to_coset(&sys, &trivial_action(&sys, 2).unwrap(), one, 32).map_err(|e| e.to_string())?;
    let n = base.size();
    let blocks_equal = (0..2 * n).all(|r| {
        (0..2 * n).all(|c| {
            let v = d2.matrix[(r, c)];
            if r / n == c / n {
                v == base.matrix[(r % n, c % n)]
            } else {
                v == Complex64::new(0.0, 0.0)
            }
        })
    });
    ensure(blocks_equal, || "d = 2 extension is not two copies of the base matrix".into())?;
    let mut doubled: Vec<Complex64> = e32.iter().flat_map(|&z| [z, z]).collect();
    doubled.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    let e2 = d2.eigenvalues();
    let worst = doubled.iter().zip(&e2).take(16).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure(worst < 1e-10, || format!("doubled spectrum off by {worst:e}"))?;
    Ok(format!("λ₁ = {:.12}, |λ₂| = {sub:.8}, d = 2 spectrum doubled to {worst:.0e}", e32[0].re))
}

fn torus_spectrum() -> Outcome {
    let tau = Complex64::new(0.0, 1.0);
    let pd = PeriodData::elliptic(tau, 0, 1).map_err(|e| e.to_string())?;
    let set = solution_set(&pd, 6).map_err(|e| e.to_string())?;
    ensure(set.len() == 13 * 13 - 1, || format!("{} entries", set.len()))?;
    // ℂ/(2ℤ + 2iℤ) has eigenvalues π²(p² + q²)
    for e in &set {
        let (p, q) = (e.m[0] as f64, e.n[0] as f64);
        let want = PI * PI * (p * p + q * q);
        ensure(rel(e.lambda, want) <= 1e-12, || format!("{e:?}: expected {want}"))?;
    }

    let mut worst: f64 = 0.0;
    for (tau, n, m) in [(tau, 0, 1), (Complex64::new(0.41, 0.83), 1, 2)] {
        let pd = PeriodData::elliptic(tau, n, m).unwrap();
        for w in [0.3, 1.0, 4.0] {
            let p = poisson_reference(&pd, w, 1.5, 50).map_err(|e| e.to_string())?;
            let r = p.discrepancy / p.direct;
            worst = worst.max(r);
            ensure(r <= 1e-8, || format!("τ = {tau}, width {w}: relative discrepancy {r:e}"))?;
        }
    }

    let pd = PeriodData::new(
        vec![Complex64::new(0.1, 1.3), Complex64::new(0.2, 0.4), Complex64::new(0.2, 0.4), Complex64::new(-0.3, 1.1)],
        vec![1, 0],
        vec![0, 1],
    )
    .map_err(|e| e.to_string())?;
    let set = solution_set(&pd, 4).map_err(|e| e.to_string())?;
    let base = set.iter().find(|e| e.n == [1, 0] && e.m == [0, 1]).ok_or("primitive entry missing")?.lambda;
    for k in [-4i64, -3, -2, 2, 3, 4] {
        let e = set.iter().find(|e| e.n == [k, 0] && e.m == [0, k]).ok_or("multiple missing")?;
        let want = (k * k) as f64 * base;
        ensure(rel(e.lambda, want) <= 1e-12, || format!("k = {k}: {} vs {want}", e.lambda))?;
    }
    Ok(format!("flat torus gate on {} entries, Poisson {worst:.1e}, multiples exact", 13 * 13 - 1))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("genus formula", genus_formula),
        ("dashing counts", dashing_counts),
        ("Kasteleyn equivalence", kasteleyn_equivalence),
        ("Gauss-Bonnet area", gauss_bonnet),
        ("dual origami validity", dual_origami),
        ("trace-formula regrouping", regrouping),
        ("cutoff exactness", cutoff),
        ("Dirac/Laplace consistency", dirac_laplace),
        ("super action reductions", super_reductions),
        ("triangle-group spectrum", triangle_spectrum),
        ("transfer operator oracle", transfer_oracle),
        ("torus spectrum", torus_spectrum),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{t:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{t:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
