//! Multi-threaded drivers over the core's splittable work units.
//!
//! Every driver produces the same output for any worker count.

use adinkra_core::adinkra::{CensusPart, CensusPlan, Chromotopology, DashingCensus, Face, EXHAUSTIVE_EDGE_LIMIT};
use adinkra_core::hyperbolic::{classify, enumerate_ball, LengthSpectrum, SpectrumOptions, TriangleGroup};
use adinkra_core::torus::{solution_slice, PeriodData, SpectrumEntry};
use adinkra_core::{Error, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

const SCAN_CHUNK: u64 = 1 << 12;
const SAMPLE_CHUNK: u64 = 1 << 12;
const FRONTIER_CHUNK: usize = 256;

/// A pool with `workers` threads; 0 picks the number of CPUs.
pub fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::resource("parallel", e.to_string()))
}

/// Exhaustive scan of all `2^|E|` dashings, split into fixed ranges.
pub fn census_exhaustive(pool: &ThreadPool, plan: &CensusPlan) -> CensusPart {
    let total = plan.total();
    let chunks = total.div_ceil(SCAN_CHUNK);
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|i| plan.scan(i * SCAN_CHUNK..((i + 1) * SCAN_CHUNK).min(total)))
            .reduce(CensusPart::default, |mut a, b| {
                a.merge(b);
                a
            })
    })
}

/// Sampled census. Chunk `i` draws from the stream seeded with `seed + i`,
/// so the result depends on the seed and sample count only.
pub fn census_sampled(pool: &ThreadPool, plan: &CensusPlan, seed: u64, samples: u64) -> CensusPart {
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let count = SAMPLE_CHUNK.min(samples - i * SAMPLE_CHUNK);
                plan.sample(seed.wrapping_add(i), count)
            })
            .reduce(CensusPart::default, |mut a, b| {
                a.merge(b);
                a
            })
    })
}

/// Exhaustive below [`EXHAUSTIVE_EDGE_LIMIT`] edges, sampled above.
pub fn dashing_census(
    pool: &ThreadPool,
    g: &Chromotopology,
    well_faces: &[Face],
    surface_faces: &[Face],
    seed: u64,
    samples: u64,
) -> Result<DashingCensus> {
    let plan = CensusPlan::new(g, well_faces, surface_faces)?;
    if plan.edge_count() <= EXHAUSTIVE_EDGE_LIMIT {
        let part = census_exhaustive(pool, &plan);
        Ok(DashingCensus::from_part(&plan, part, true, None))
    } else {
        let part = census_sampled(pool, &plan, seed, samples);
        Ok(DashingCensus::from_part(&plan, part, false, Some(seed)))
    }
}

/// Length spectrum with each frontier layer expanded in parallel and
/// absorbed in frontier order.
pub fn length_spectrum(pool: &ThreadPool, group: &TriangleGroup, opts: &SpectrumOptions) -> Result<LengthSpectrum> {
    let builder = enumerate_ball(group, opts, |b| {
        let pieces: Vec<_> = pool.install(|| b.frontier().par_chunks(FRONTIER_CHUNK).map(|c| b.expand(c)).collect());
        b.absorb(pieces.into_iter().flatten().collect());
    })?;
    classify(&builder, opts)
}

/// The torus solution set, one slice per first coordinate.
pub fn solution_set(pool: &ThreadPool, pd: &PeriodData, bound: i64) -> Result<Vec<SpectrumEntry>> {
    let slices: Vec<Result<Vec<SpectrumEntry>>> =
        pool.install(|| (-bound..=bound).into_par_iter().map(|first| solution_slice(pd, bound, first)).collect());
    let mut out = Vec::new();
    for s in slices {
        out.extend(s?);
    }
    Ok(out)
}
