use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TorusPoint;
use crate::error::PotentialError;
use crate::lattice::AspectRatio;
use crate::seeding::stream;

/// `M × M` grid `(a i / M, j / (a M))`, row-major in `i`.
pub fn grid_positions(m: usize, aspect: AspectRatio) -> Vec<TorusPoint> {
    let [cx, cy] = aspect.cell();
    let mf = m as f64;
    (0..m)
        .flat_map(|i| (0..m).map(move |j| TorusPoint::new(cx * i as f64 / mf, cy * j as f64 / mf)))
        .collect()
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let m = (n as f64).sqrt().round() as usize;
    (m * m == n).then_some(m)
}

fn uniform_disc(rng: &mut impl Rng, radius: f64) -> [f64; 2] {
    let rho = radius * rng.random::<f64>().sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    [rho * phi.cos(), rho * phi.sin()]
}

/// Grid of `N = M²` points, each displaced uniformly within `r0 · N^{−1/2}`.
pub fn distorted_lattice(
    n: usize,
    r0: f64,
    seed: u64,
    aspect: AspectRatio,
) -> Result<Vec<TorusPoint>, PotentialError> {
    let m = exact_sqrt(n).filter(|&m| m > 0).ok_or(PotentialError::NotSquare(n))?;
    if !(0.0..0.5).contains(&r0) {
        return Err(PotentialError::DistortionTooLarge(r0));
    }
    let radius = r0 / (n as f64).sqrt();
    Ok(grid_positions(m, aspect)
        .into_iter()
        .enumerate()
        .map(|(j, p)| {
            let [dx, dy] = uniform_disc(&mut stream(seed, "distorted_lattice", j as u64), radius);
            TorusPoint::new(p.x + dx, p.y + dy).reduce(aspect)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplacementLaw {
    /// Uniform on the disc `|ξ| ≤ r₁`.
    #[default]
    UniformDisc,
    /// Uniform on the circle `|ξ| = r₁`.
    Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdmConfig {
    pub base: Vec<TorusPoint>,
    pub r1: f64,
    #[serde(default)]
    pub law: DisplacementLaw,
    pub seed: u64,
}

/// `ω_j = ω̄_j + N^{−1/2} ξ_j` with independent `ξ_j`, `|ξ_j| ≤ r₁`.
pub fn rdm_sample(config: &RdmConfig, aspect: AspectRatio) -> Result<Vec<TorusPoint>, PotentialError> {
    if !(config.r1 >= 0.0) {
        return Err(PotentialError::NegativeRadius(config.r1));
    }
    if config.base.is_empty() {
        return Err(PotentialError::EmptyPositions);
    }
    let radius = config.r1 / (config.base.len() as f64).sqrt();
    Ok(config
        .base
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut rng = stream(config.seed, "rdm", j as u64);
            let [dx, dy] = match config.law {
                DisplacementLaw::UniformDisc => uniform_disc(&mut rng, radius),
                DisplacementLaw::Circle => {
                    let phi = std::f64::consts::TAU * rng.random::<f64>();
                    [radius * phi.cos(), radius * phi.sin()]
                }
            };
            TorusPoint::new(p.x + dx, p.y + dy).reduce(aspect)
        })
        .collect())
}

/// Powers of two from `1/4` up to `N^{1/2}`.
pub fn default_radius_grid(n: usize) -> Vec<f64> {
    let top = (n as f64).sqrt();
    let mut out = Vec::new();
    let mut r = 0.25;
    while r <= top {
        out.push(r);
        r *= 2.0;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessBall {
    pub center: TorusPoint,
    /// Ball radius in units of `N^{−1/2}`.
    pub r: f64,
    pub count: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSummary {
    pub r: f64,
    pub centers: usize,
    pub worst: WitnessBall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakDisorderReport {
    pub pass: bool,
    pub constant: f64,
    pub worst_ratio: f64,
    pub witness: Option<WitnessBall>,
    pub per_radius: Vec<RadiusSummary>,
}

struct CellList {
    bins: [usize; 2],
    size: [f64; 2],
    cells: Vec<Vec<usize>>,
}

impl CellList {
    fn new(points: &[TorusPoint], reach: f64, aspect: AspectRatio) -> Option<Self> {
        let [cx, cy] = aspect.cell();
        let bx = (cx / reach).floor() as usize;
        let by = (cy / reach).floor() as usize;
        if bx < 3 || by < 3 {
            return None;
        }
        let size = [cx / bx as f64, cy / by as f64];
        let mut cells = vec![Vec::new(); bx * by];
        for (k, p) in points.iter().enumerate() {
            let (i, j) = Self::bin(p, [bx, by], size);
            cells[i * by + j].push(k);
        }
        Some(Self {
            bins: [bx, by],
            size,
            cells,
        })
    }

    fn bin(p: &TorusPoint, bins: [usize; 2], size: [f64; 2]) -> (usize, usize) {
        let i = ((p.x / size[0]) as usize).min(bins[0] - 1);
        let j = ((p.y / size[1]) as usize).min(bins[1] - 1);
        (i, j)
    }

    fn neighbours(&self, p: &TorusPoint) -> impl Iterator<Item = usize> + '_ {
        let [bx, by] = self.bins;
        let (i, j) = Self::bin(p, self.bins, self.size);
        (0..3).flat_map(move |di| {
            (0..3).flat_map(move |dj| {
                let ii = (i + bx + di - 1) % bx;
                let jj = (j + by + dj - 1) % by;
                self.cells[ii * by + jj].iter().copied()
            })
        })
    }
}

/// Checks `#(Ω ∩ B(x₀, R N^{−1/2})) ≤ C max(1, R²)` for every `R` in the grid
/// and every centre on a lattice of pitch `R N^{−1/2} / 2` or at a point of `Ω`.
///
/// Balls are closed, with a relative slack of `1e−12` on the radius.
pub fn weak_disorder_check(
    omega: &[TorusPoint],
    n: usize,
    c: f64,
    r_grid: &[f64],
    aspect: AspectRatio,
) -> Result<WeakDisorderReport, PotentialError> {
    let top = (n as f64).sqrt();
    for &r in r_grid {
        if !(r > 0.0 && r <= top) {
            return Err(PotentialError::BallRadiusOutOfRange { r, max: top });
        }
    }
    let points: Vec<TorusPoint> = omega.iter().map(|p| p.reduce(aspect)).collect();
    let [cx, cy] = aspect.cell();
    let mut per_radius = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let reach = r / top;
        let pitch = reach / 2.0;
        let (nx, ny) = ((cx / pitch).ceil() as usize, (cy / pitch).ceil() as usize);
        let mut centers: Vec<TorusPoint> = (0..nx)
            .flat_map(|i| {
                (0..ny).map(move |j| TorusPoint::new(cx * i as f64 / nx as f64, cy * j as f64 / ny as f64))
            })
            .collect();
        centers.extend_from_slice(&points);
        let cells = CellList::new(&points, reach, aspect);
        let bound = reach * (1.0 + 1e-12);
        let count_at = |x0: &TorusPoint| -> usize {
            let inside = |k: &usize| x0.distance(&points[*k], aspect) <= bound;
            match &cells {
                Some(cl) => cl.neighbours(x0).filter(inside).count(),
                None => (0..points.len()).filter(inside).count(),
            }
        };
        let (count, idx) = centers
            .par_iter()
            .enumerate()
            .map(|(k, x0)| (count_at(x0), std::cmp::Reverse(k)))
            .max()
            .unwrap_or((0, std::cmp::Reverse(0)));
        let ratio = count as f64 / r.powi(2).max(1.0);
        per_radius.push(RadiusSummary {
            r,
            centers: centers.len(),
            worst: WitnessBall {
                center: centers[idx.0],
                r,
                count,
                ratio,
            },
        });
    }
    let witness = per_radius
        .iter()
        .map(|s| s.worst)
        .fold(None, |best: Option<WitnessBall>, w| match best {
            Some(b) if b.ratio >= w.ratio => Some(b),
            _ => Some(w),
        });
    let worst_ratio = witness.map_or(0.0, |w| w.ratio);
    Ok(WeakDisorderReport {
        pass: worst_ratio <= c,
        constant: c,
        worst_ratio,
        witness,
        per_radius,
    })
}
