use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoefficientSchedule, ScheduleSpec, SdeError};
use crate::geometry::{Domain, DomainSpec, Location, Mat3, Vec3};

/// Bridge crossing probabilities below `exp(-BRIDGE_CUTOFF)` are ignored.
const BRIDGE_CUTOFF: f64 = 40.0;

const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRecord {
    pub survived: bool,
    /// Terminal position for survivors, last position inside for killed paths.
    pub position: [f64; 3],
    /// `t` for survivors, kill time otherwise.
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMeta {
    pub s: f64,
    pub y: [f64; 3],
    pub t: f64,
    pub dt: f64,
    pub seed: u64,
    pub bridge: bool,
}

#[derive(Debug, Clone)]
pub struct KilledEnsemble {
    pub domain: Domain,
    pub meta: SimulationMeta,
    pub records: Vec<PathRecord>,
}

impl KilledEnsemble {
    pub fn n_paths(&self) -> usize {
        self.records.len()
    }

    pub fn survivors(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.records.iter().filter(|r| r.survived).map(|r| Vec3::from(r.position))
    }

    pub fn survivor_count(&self) -> usize {
        self.records.iter().filter(|r| r.survived).count()
    }

    pub fn summary(&self, domain: DomainSpec, schedule: ScheduleSpec) -> EnsembleSummary {
        let n = self.n_paths();
        let alive = self.survivor_count();
        let p = alive as f64 / n as f64;
        EnsembleSummary {
            domain,
            schedule,
            meta: self.meta.clone(),
            n_paths: n,
            survivors: alive,
            survival: p,
            survival_stderr: (p * (1.0 - p) / n as f64).sqrt(),
            terminals: self.survivors().map(|x| [x.x, x.y, x.z]).collect(),
        }
    }
}

/// Serializable form of an ensemble: the inputs, the survival fraction and
/// the terminal positions of the surviving paths, which is all a window
/// estimate needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSummary {
    pub domain: DomainSpec,
    pub schedule: ScheduleSpec,
    pub meta: SimulationMeta,
    pub n_paths: usize,
    pub survivors: usize,
    pub survival: f64,
    pub survival_stderr: f64,
    pub terminals: Vec<[f64; 3]>,
}

struct Segment {
    start: f64,
    h: f64,
    steps: usize,
    sigma: Mat3,
    /// `nᵀ a n` for every face.
    face_q: Vec<f64>,
}

struct Simulator<'a> {
    domain: &'a Domain,
    convex: bool,
    planes: Vec<(Vec3, f64)>,
    segments: Vec<Segment>,
    y: Vec3,
    t: f64,
    seed: u64,
    bridge: bool,
}

impl<'a> Simulator<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        domain: &'a Domain,
        schedule: &CoefficientSchedule,
        s: f64,
        y: &Vec3,
        t: f64,
        dt: f64,
        seed: u64,
        bridge: bool,
    ) -> Result<Self, SdeError> {
        match domain.classify(y) {
            Location::Inside => {}
            Location::Boundary => return Err(SdeError::StartOnBoundary),
            Location::Outside => return Err(SdeError::StartOutside),
        }
        if !(t >= s) {
            return Err(SdeError::BadInterval { s, t });
        }
        if !(dt > 0.0) || (t > s && dt > t - s) {
            return Err(SdeError::StepTooLarge { dt, span: t - s });
        }
        let planes: Vec<(Vec3, f64)> = (0..domain.num_faces()).map(|k| domain.face_plane(k)).collect();
        let segments = schedule
            .pieces_between(s, t)
            .into_iter()
            .map(|(a, b, k)| {
                let steps = ((b - a) / dt).ceil().max(1.0) as usize;
                let am = schedule.matrices()[k];
                Segment {
                    start: a,
                    h: (b - a) / steps as f64,
                    steps,
                    sigma: schedule.diffusion_factors()[k],
                    face_q: planes.iter().map(|(n, _)| n.dot(&(am * n))).collect(),
                }
            })
            .collect();
        Ok(Simulator {
            domain,
            convex: domain.is_convex(),
            planes,
            segments,
            y: *y,
            t,
            seed,
            bridge,
        })
    }

    /// Probability that a Brownian bridge between two inside points stays
    /// inside every face plane it is close to.
    fn bridge_survival(&self, a: &Vec3, b: &Vec3, seg: &Segment) -> f64 {
        let mut p = 1.0;
        for (k, (n, off)) in self.planes.iter().enumerate() {
            let da = n.dot(a) - off;
            let db = n.dot(b) - off;
            if da <= 0.0 || db <= 0.0 {
                continue;
            }
            let e = da * db / (seg.face_q[k] * seg.h);
            if e > BRIDGE_CUTOFF {
                continue;
            }
            if !self.convex {
                let fa = a - da * n;
                let fb = b - db * n;
                if !self.domain.face_contains_projection(k, &fa) && !self.domain.face_contains_projection(k, &fb) {
                    continue;
                }
            }
            p *= 1.0 - (-e).exp();
        }
        p
    }

    fn run(&self, index: u64) -> PathRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut x = self.y;
        for seg in &self.segments {
            let sqrt_h = seg.h.sqrt();
            for i in 0..seg.steps {
                let z = Vec3::new(
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                );
                let next = x + seg.sigma * (z * sqrt_h);
                let end = seg.start + (i + 1) as f64 * seg.h;
                let mut killed = !self.domain.contains(&next) || self.domain.segment_crosses_boundary(&x, &next);
                if !killed && self.bridge {
                    let p = self.bridge_survival(&x, &next, seg);
                    killed = p < 1.0 && rng.random::<f64>() >= p;
                }
                if killed {
                    return PathRecord {
                        survived: false,
                        position: [x.x, x.y, x.z],
                        time: end,
                    };
                }
                x = next;
            }
        }
        PathRecord {
            survived: true,
            position: [x.x, x.y, x.z],
            time: self.t,
        }
    }
}

/// Simulates paths with indices in `paths`. Path `i` draws from the ChaCha8
/// stream `i` of `seed`, so any partition of the index range gives the same
/// records.
#[allow(clippy::too_many_arguments)]
pub fn simulate_batch(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    dt: f64,
    paths: Range<u64>,
    seed: u64,
    bridge: bool,
) -> Result<Vec<PathRecord>, SdeError> {
    let sim = Simulator::new(domain, schedule, s, y, t, dt, seed, bridge)?;
    Ok(paths.into_par_iter().map(|i| sim.run(i)).collect())
}

/// Euler–Maruyama paths of `dξ = σ(t) dw` from `(s, y)` to `t`, killed on
/// leaving the domain. With `bridge`, a step between two inside points is
/// also killed with the half-space bridge crossing probability of each
/// nearby face.
#[allow(clippy::too_many_arguments)]
pub fn simulate_paths(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    dt: f64,
    n: usize,
    seed: u64,
    bridge: bool,
) -> Result<KilledEnsemble, SdeError> {
    if n == 0 {
        return Err(SdeError::NoPaths);
    }
    let records = simulate_batch(domain, schedule, s, y, t, dt, 0..n as u64, seed, bridge)?;
    Ok(KilledEnsemble {
        domain: domain.clone(),
        meta: SimulationMeta {
            s,
            y: [y.x, y.y, y.z],
            t,
            dt,
            seed,
            bridge,
        },
        records,
    })
}

/// Kill times (`+∞` for survivors) of paths `paths`, computed chunk by chunk
/// and handed to `sink` in index order so large runs stay in bounded memory.
#[allow(clippy::too_many_arguments)]
pub fn kill_times(
    domain: &Domain,
    schedule: &CoefficientSchedule,
    s: f64,
    y: &Vec3,
    t: f64,
    dt: f64,
    paths: Range<u64>,
    seed: u64,
    bridge: bool,
    mut sink: impl FnMut(&[f64]),
) -> Result<(), SdeError> {
    let sim = Simulator::new(domain, schedule, s, y, t, dt, seed, bridge)?;
    let mut start = paths.start;
    while start < paths.end {
        let end = (start + CHUNK).min(paths.end);
        let times: Vec<f64> = (start..end)
            .into_par_iter()
            .map(|i| {
                let r = sim.run(i);
                if r.survived {
                    f64::INFINITY
                } else {
                    r.time
                }
            })
            .collect();
        sink(&times);
        start = end;
    }
    Ok(())
}
