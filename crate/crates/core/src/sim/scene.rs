//! Synthetic driving sequences with a long-tailed class mix and a few
//! planted rare-class regions along the route.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SimError;
use crate::math;
use crate::scene::{Frame, GlobalCloud, Pose};
use crate::Point3;

/// Class mix used unless configured otherwise, most frequent first.
pub const DEFAULT_CLASS_FREQUENCIES: [f64; 8] = [0.35, 0.25, 0.15, 0.1, 0.07, 0.04, 0.025, 0.015];

/// Background classes are constant over square cells of this size, in meters.
const BACKGROUND_CELL: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedProfile {
    /// Fixed speed in m/s.
    Constant(f64),
    /// Speed wanders smoothly between `min` and `max` m/s.
    Variable { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub frame_count: usize,
    /// Roughly the number of background points per frame; the actual count
    /// varies smoothly along the route.
    pub points_per_frame: usize,
    pub class_frequencies: Vec<f64>,
    pub rare_region_count: usize,
    pub speed_profile: SpeedProfile,
    /// Seconds between frames.
    pub frame_period: f64,
    /// Sensor returns fall between these planar ranges, in meters.
    pub sensor_range: (f64, f64),
    /// Planted regions get a radius drawn from this range, in meters.
    pub region_extent: (f64, f64),
    /// Largest lateral offset of a planted region from the route.
    pub region_offset: f64,
    /// Extra returns each frame gets from every planted region in range.
    pub region_points_per_frame: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            frame_count: 600,
            points_per_frame: 150,
            class_frequencies: DEFAULT_CLASS_FREQUENCIES.to_vec(),
            rare_region_count: 12,
            speed_profile: SpeedProfile::Variable { min: 3.0, max: 20.0 },
            frame_period: 1.0,
            sensor_range: (2.0, 50.0),
            region_extent: (3.0, 8.0),
            region_offset: 15.0,
            region_points_per_frame: 6,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let f = &self.class_frequencies;
        if f.is_empty() || f.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(SimError::BadParams("class frequencies must be nonnegative and sum to 1"));
        }
        if self.frame_count == 0 {
            return Err(SimError::BadParams("frame count must be positive"));
        }
        let ordered = |(lo, hi): (f64, f64)| lo >= 0.0 && lo <= hi && hi.is_finite();
        if !ordered(self.sensor_range) || !ordered(self.region_extent) || self.region_extent.0 <= 0.0 {
            return Err(SimError::BadParams("ranges must be ordered, finite and positive"));
        }
        if !(self.frame_period > 0.0 && self.frame_period.is_finite()) || !(self.region_offset >= 0.0) {
            return Err(SimError::BadParams("frame period and region offset must be positive"));
        }
        let speed_ok = match self.speed_profile {
            SpeedProfile::Constant(v) => v >= 0.0 && v.is_finite(),
            SpeedProfile::Variable { min, max } => ordered((min, max)),
        };
        if !speed_ok {
            return Err(SimError::BadParams("speeds must be ordered, finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedRegion {
    pub center: Point3,
    /// Planar radius, in meters.
    pub extent: f64,
    pub class: usize,
}

impl PlantedRegion {
    pub fn contains(&self, p: Point3) -> bool {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        dx * dx + dy * dy <= self.extent * self.extent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub trajectory: Vec<Pose>,
    pub frames: Vec<Frame>,
    pub class_count: usize,
    /// Ground-truth class of every point, in [`GlobalCloud`] order.
    pub labels: Vec<usize>,
    /// Planted region of every point, if any, in [`GlobalCloud`] order.
    pub region_of: Vec<Option<usize>>,
    pub regions: Vec<PlantedRegion>,
}

impl SyntheticScene {
    pub fn cloud(&self) -> GlobalCloud {
        GlobalCloud::from_frames(&self.frames).expect("frame ids are unique by construction")
    }

    pub fn point_count(&self) -> usize {
        self.labels.len()
    }
}

/// Classes rarer than uniform, rarest first. When no class is rarer than
/// uniform every class counts as rare.
pub fn rare_classes(frequencies: &[f64]) -> Vec<usize> {
    let uniform = 1.0 / frequencies.len() as f64;
    let mut rare: Vec<usize> = (0..frequencies.len()).filter(|&c| frequencies[c] < uniform).collect();
    if rare.is_empty() {
        rare = (0..frequencies.len()).collect();
    }
    rare.sort_by(|&a, &b| frequencies[a].total_cmp(&frequencies[b]).then(a.cmp(&b)));
    rare
}

pub fn generate_scene(seed: u64, params: &SceneParams) -> Result<SyntheticScene, SimError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trajectory = trajectory(&mut rng, params);
    let regions = plant_regions(&mut rng, params, &trajectory);
    let cell_salt: u64 = rng.random();
    let (near, far) = params.sensor_range;

    let mut frames = Vec::with_capacity(params.frame_count);
    for (k, pose) in trajectory.iter().enumerate() {
        // Smooth environment factor so point counts vary along the route.
        let phase = k as f64 / 37.0;
        let density = 1.0 + 0.35 * math::sin_cos(phase).0 + 0.15 * math::sin_cos(2.7 * phase + 1.0).0;
        let count = (params.points_per_frame as f64 * density) as usize;
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let r = near + (far - near) * rng.random::<f64>();
            let (s, c) = math::sin_cos(core::f64::consts::TAU * rng.random::<f64>());
            let z = -1.7 + 3.0 * rng.random::<f64>();
            points.push([r * c, r * s, z]);
        }
        let origin = pose.translation();
        for region in &regions {
            if planar(origin, region.center) > far {
                continue;
            }
            for _ in 0..params.region_points_per_frame {
                points.push(pose.apply_inverse(region_point(&mut rng, region)));
            }
        }
        frames.push(Frame { id: k as u32, points, pose: *pose });
    }

    // Every region must hold at least one point.
    for (i, region) in regions.iter().enumerate() {
        let covered = frames.iter().any(|f| f.points.iter().any(|&p| region.contains(f.pose.apply(p))));
        if !covered {
            let nearest = (0..frames.len())
                .min_by(|&a, &b| {
                    planar(trajectory[a].translation(), region.center)
                        .total_cmp(&planar(trajectory[b].translation(), region.center))
                })
                .expect("at least one frame");
            let frame = &mut frames[nearest];
            frame.points.push(frame.pose.apply_inverse(region.center));
            debug_assert!(regions[i].contains(frame.pose.apply(*frame.points.last().unwrap())));
        }
    }

    let mut labels = Vec::new();
    let mut region_of = Vec::new();
    for frame in &frames {
        for &p in &frame.points {
            let g = frame.pose.apply(p);
            match regions.iter().position(|r| r.contains(g)) {
                Some(i) => {
                    labels.push(regions[i].class);
                    region_of.push(Some(i));
                }
                None => {
                    labels.push(background_class(g, cell_salt, &params.class_frequencies));
                    region_of.push(None);
                }
            }
        }
    }

    Ok(SyntheticScene {
        trajectory,
        frames,
        class_count: params.class_frequencies.len(),
        labels,
        region_of,
        regions,
    })
}

fn trajectory(rng: &mut ChaCha8Rng, params: &SceneParams) -> Vec<Pose> {
    let dt = params.frame_period;
    let (mut speed, lo, hi) = match params.speed_profile {
        SpeedProfile::Constant(v) => (v, v, v),
        SpeedProfile::Variable { min, max } => (0.5 * (min + max), min, max),
    };
    let mut yaw = 0.0;
    let mut turn = 0.0;
    let mut position = [0.0, 0.0, 0.0];
    let mut poses = Vec::with_capacity(params.frame_count);
    for _ in 0..params.frame_count {
        poses.push(Pose::from_yaw(yaw, position));
        let (s, c) = math::sin_cos(yaw);
        position[0] += speed * dt * c;
        position[1] += speed * dt * s;

        let dv: f64 = rng.sample(StandardNormal);
        speed += 1.5 * dt * dv;
        if hi > lo {
            // Reflect back into the allowed band.
            if speed > hi {
                speed = 2.0 * hi - speed;
            }
            if speed < lo {
                speed = 2.0 * lo - speed;
            }
            speed = speed.clamp(lo, hi);
        } else {
            speed = lo;
        }
        let dturn: f64 = rng.sample(StandardNormal);
        turn = 0.9 * turn + 0.01 * dturn;
        yaw += turn * dt;
    }
    poses
}

fn plant_regions(rng: &mut ChaCha8Rng, params: &SceneParams, trajectory: &[Pose]) -> Vec<PlantedRegion> {
    let rare = rare_classes(&params.class_frequencies);
    let (lo, hi) = params.region_extent;
    (0..params.rare_region_count)
        .map(|i| {
            let anchor = trajectory[rng.random_range(0..trajectory.len())];
            let lateral = params.region_offset * (2.0 * rng.random::<f64>() - 1.0);
            let extent = lo + (hi - lo) * rng.random::<f64>();
            PlantedRegion { center: anchor.apply([0.0, lateral, 0.0]), extent, class: rare[i % rare.len()] }
        })
        .collect()
}

fn region_point(rng: &mut ChaCha8Rng, region: &PlantedRegion) -> Point3 {
    let r = region.extent * math::sqrt(rng.random::<f64>());
    let (s, c) = math::sin_cos(core::f64::consts::TAU * rng.random::<f64>());
    let z = -1.5 + 2.5 * rng.random::<f64>();
    [region.center[0] + r * c, region.center[1] + r * s, z]
}

fn background_class(p: Point3, salt: u64, frequencies: &[f64]) -> usize {
    let cx = math::floor(p[0] / BACKGROUND_CELL) as i64;
    let cy = math::floor(p[1] / BACKGROUND_CELL) as i64;
    let h = splitmix(salt ^ splitmix(cx as u64 ^ splitmix(cy as u64)));
    let u = (h >> 11) as f64 / (1u64 << 53) as f64;
    let mut acc = 0.0;
    for (c, &f) in frequencies.iter().enumerate() {
        acc += f;
        if u < acc {
            return c;
        }
    }
    frequencies.iter().rposition(|&f| f > 0.0).unwrap_or(0)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn planar(a: Point3, b: Point3) -> f64 {
    math::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]))
}
