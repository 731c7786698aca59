//! Synthetic clouds with known geometry, for tests and benchmarks.
//!
//! Every generator is deterministic: the same arguments (and seed, where
//! randomness is involved) produce the same points in the same order.
//! Randomness always comes from a caller-provided [`ChaCha8Rng`] so results
//! are stable across platforms and releases.

use std::f64::consts::{PI, TAU};

use don_core::eval::GroundTruthBox;
use don_core::{Point3, PointCloud};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate's canonical seeded generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A flat horizontal grid at `z = 0`, centered on the origin, covering
/// `len_x` by `len_y` with the given point spacing. Exact — no noise.
pub fn plane_grid(len_x: f64, len_y: f64, spacing: f64) -> PointCloud {
    let nx = (len_x / spacing).round() as i64;
    let ny = (len_y / spacing).round() as i64;
    let mut cloud = PointCloud::new();
    for i in 0..=nx {
        for j in 0..=ny {
            cloud.push(Point3::new(
                i as f64 * spacing - len_x / 2.0,
                j as f64 * spacing - len_y / 2.0,
                0.0,
            ));
        }
    }
    cloud
}

/// A horizontal ground patch centered on the origin with vertical jitter of
/// amplitude `noise` (uniform in `[-noise, noise]`) and circular holes cut
/// out: each `(cx, cy, radius)` removes the points within `radius` of that
/// x/y position.
pub fn noisy_ground(
    len_x: f64,
    len_y: f64,
    spacing: f64,
    noise: f64,
    holes: &[(f64, f64, f64)],
    rng: &mut ChaCha8Rng,
) -> PointCloud {
    let nx = (len_x / spacing).round() as i64;
    let ny = (len_y / spacing).round() as i64;
    let mut cloud = PointCloud::new();
    for i in 0..=nx {
        for j in 0..=ny {
            let x = i as f64 * spacing - len_x / 2.0;
            let y = j as f64 * spacing - len_y / 2.0;
            // Draw before the hole check so the stream of random numbers —
            // and therefore every surviving point — does not depend on the
            // hole layout.
            let dz = if noise > 0.0 {
                rng.random_range(-noise..=noise)
            } else {
                0.0
            };
            if holes.iter().any(|&(cx, cy, r)| (x - cx).hypot(y - cy) <= r) {
                continue;
            }
            cloud.push(Point3::new(x, y, dz));
        }
    }
    cloud
}

/// The four side walls (plus optionally the top face) of an axis-aligned box
/// before rotation, yawed about the vertical axis through its center.
/// `center` is the center of the box volume; `dims` are the full extents
/// `(len_x, len_y, len_z)` prior to rotation. No bottom face — these boxes
/// stand on (or float above) the ground like scanned objects do.
pub fn box_walls(
    center: Point3,
    dims: (f64, f64, f64),
    yaw: f64,
    spacing: f64,
    top: bool,
) -> PointCloud {
    let (lx, ly, lz) = dims;
    let (hx, hy, hz) = (lx / 2.0, ly / 2.0, lz / 2.0);
    let nx = (lx / spacing).round().max(1.0) as i64;
    let ny = (ly / spacing).round().max(1.0) as i64;
    let nz = (lz / spacing).round().max(1.0) as i64;
    let (sin, cos) = yaw.sin_cos();
    let mut cloud = PointCloud::new();
    let mut emit = |bx: f64, by: f64, bz: f64| {
        let x = cos * bx - sin * by + center.x;
        let y = sin * bx + cos * by + center.y;
        cloud.push(Point3::new(x, y, bz + center.z));
    };

    // Walls normal to the box y axis: full extent in x.
    for i in 0..=nx {
        let bx = i as f64 / nx as f64 * lx - hx;
        for k in 0..=nz {
            let bz = k as f64 / nz as f64 * lz - hz;
            emit(bx, -hy, bz);
            emit(bx, hy, bz);
        }
    }
    // Walls normal to the box x axis: interior columns only, so the
    // vertical edges are not emitted twice.
    for j in 1..ny {
        let by = j as f64 / ny as f64 * ly - hy;
        for k in 0..=nz {
            let bz = k as f64 / nz as f64 * lz - hz;
            emit(-hx, by, bz);
            emit(hx, by, bz);
        }
    }
    if top {
        // Interior grid only; the rim belongs to the walls.
        for i in 1..nx {
            let bx = i as f64 / nx as f64 * lx - hx;
            for j in 1..ny {
                let by = j as f64 / ny as f64 * ly - hy;
                emit(bx, by, hz);
            }
        }
    }
    cloud
}

/// A vertical cylinder surface (a pole): rings of points from `base.z` up
/// to `base.z + height`, ring pitch and in-ring arc step both `spacing`.
pub fn column(base: Point3, radius: f64, height: f64, spacing: f64) -> PointCloud {
    let n_rings = (height / spacing).round().max(1.0) as i64;
    let n_around = ((TAU * radius) / spacing).round().max(3.0) as i64;
    let mut cloud = PointCloud::new();
    for k in 0..=n_rings {
        let z = base.z + k as f64 / n_rings as f64 * height;
        for a in 0..n_around {
            let t = a as f64 / n_around as f64 * TAU;
            cloud.push(Point3::new(
                base.x + radius * t.cos(),
                base.y + radius * t.sin(),
                z,
            ));
        }
    }
    cloud
}

/// `n` points spread nearly uniformly over a sphere surface (Fibonacci
/// lattice).
pub fn sphere(center: Point3, radius: f64, n: usize) -> PointCloud {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    let mut cloud = PointCloud::new();
    for k in 0..n {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
        let r_xy = (1.0 - z * z).sqrt();
        let phi = golden * k as f64;
        cloud.push(Point3::new(
            center.x + radius * r_xy * phi.cos(),
            center.y + radius * r_xy * phi.sin(),
            center.z + radius * z,
        ));
    }
    cloud
}

/// A corrugated sheet: the plane grid with `z = amplitude * sin(2 pi x /
/// wavelength)`. Its curvature lives at the scale of `wavelength`, which
/// makes it respond to scale pairs that straddle that wavelength and stay
/// quiet for pairs well below it.
pub fn corrugated(
    len_x: f64,
    len_y: f64,
    spacing: f64,
    wavelength: f64,
    amplitude: f64,
) -> PointCloud {
    let nx = (len_x / spacing).round() as i64;
    let ny = (len_y / spacing).round() as i64;
    let mut cloud = PointCloud::new();
    for i in 0..=nx {
        for j in 0..=ny {
            let x = i as f64 * spacing - len_x / 2.0;
            let y = j as f64 * spacing - len_y / 2.0;
            cloud.push(Point3::new(x, y, amplitude * (TAU * x / wavelength).sin()));
        }
    }
    cloud
}

/// `n` points uniform in the axis-aligned cube `[-half, half]^3`.
pub fn uniform_cloud(n: usize, half: f64, rng: &mut ChaCha8Rng) -> PointCloud {
    let mut cloud = PointCloud::new();
    for _ in 0..n {
        cloud.push(Point3::new(
            rng.random_range(-half..=half),
            rng.random_range(-half..=half),
            rng.random_range(-half..=half),
        ));
    }
    cloud
}

/// Concatenates clouds in order (points only; attributes are not merged).
pub fn merge(parts: &[&PointCloud]) -> PointCloud {
    let mut cloud = PointCloud::new();
    for part in parts {
        for p in part.points() {
            cloud.push(*p);
        }
    }
    cloud
}

/// A copy of `cloud` shifted by `(dx, dy, dz)`.
pub fn translate(cloud: &PointCloud, dx: f64, dy: f64, dz: f64) -> PointCloud {
    cloud
        .points()
        .iter()
        .map(|p| Point3::new(p.x + dx, p.y + dy, p.z + dz))
        .collect()
}

/// A street-sized benchmark scene of roughly 200k points: a 40 x 9.5 m
/// ground strip at 5 cm spacing with parked-car-sized boxes, poles, and a
/// pair of pedestrian-sized boxes standing on it.
pub fn street_scene(seed: u64) -> PointCloud {
    let mut rng = seeded_rng(seed);
    let ground = noisy_ground(40.0, 9.5, 0.05, 0.01, &[], &mut rng);
    let mut parts: Vec<PointCloud> = vec![ground];
    // Cars along the curb.
    for i in 0..5 {
        let x = -16.0 + i as f64 * 8.0 + rng.random_range(-0.5..=0.5);
        let y = -2.8 + rng.random_range(-0.3..=0.3);
        let yaw = rng.random_range(-0.1..=0.1);
        parts.push(box_walls(
            Point3::new(x, y, 0.75),
            (4.2, 1.7, 1.5),
            yaw,
            0.05,
            true,
        ));
    }
    // Light poles on the other side.
    for i in 0..4 {
        let x = -15.0 + i as f64 * 10.0 + rng.random_range(-0.5..=0.5);
        parts.push(column(Point3::new(x, 3.5, 0.0), 0.07, 3.0, 0.04));
    }
    // Two pedestrian-sized boxes on the walkway.
    for i in 0..2 {
        let x = -5.0 + i as f64 * 9.0 + rng.random_range(-0.5..=0.5);
        parts.push(box_walls(
            Point3::new(x, 2.0, 0.85),
            (0.5, 0.5, 1.7),
            rng.random_range(-0.5..=0.5),
            0.03,
            true,
        ));
    }
    let refs: Vec<&PointCloud> = parts.iter().collect();
    merge(&refs)
}

/// One synthetic evaluation frame: jittered ground with three box objects
/// standing over holes, plus matching ground-truth boxes (slightly padded
/// so boundary points stay inside).
///
/// The holes guarantee the objects are isolated from the ground by well
/// over typical clustering tolerances, which makes the frames a clean
/// end-to-end fixture: an extractor that finds the walls finds exactly the
/// ground truth.
pub fn eval_frame(frame_id: &str, variant: u64) -> (PointCloud, Vec<GroundTruthBox>) {
    let mut rng = seeded_rng(0xE7A1_F001 ^ variant);
    let anchors = [(-4.5, -4.0), (4.0, -4.5), (0.5, 4.5)];
    let mut objects: Vec<(f64, f64, f64, f64, f64, f64)> = Vec::new();
    for &(ax, ay) in &anchors {
        let cx = ax + rng.random_range(-0.5..=0.5);
        let cy = ay + rng.random_range(-0.5..=0.5);
        let w = rng.random_range(0.5..=0.8);
        let d = rng.random_range(0.5..=0.8);
        let h = rng.random_range(1.2..=1.8);
        let yaw = rng.random_range(-PI / 4.0..=PI / 4.0);
        objects.push((cx, cy, w, d, h, yaw));
    }
    let holes: Vec<(f64, f64, f64)> = objects
        .iter()
        .map(|&(cx, cy, w, d, _, _)| (cx, cy, (w * w + d * d).sqrt() / 2.0 + 0.8))
        .collect();
    let ground = noisy_ground(16.0, 16.0, 0.08, 0.01, &holes, &mut rng);

    let mut parts = vec![ground];
    let mut boxes = Vec::new();
    for &(cx, cy, w, d, h, yaw) in &objects {
        parts.push(box_walls(
            Point3::new(cx, cy, h / 2.0),
            (w, d, h),
            yaw,
            0.04,
            true,
        ));
        boxes.push(
            GroundTruthBox::new(
                frame_id,
                "object",
                Point3::new(cx, cy, h / 2.0),
                w + 0.2,
                d + 0.2,
                h + 0.2,
                yaw,
            )
            .expect("generated dimensions are valid"),
        );
    }
    let refs: Vec<&PointCloud> = parts.iter().collect();
    (merge(&refs), boxes)
}
