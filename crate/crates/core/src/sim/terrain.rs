//! Ground-truth scalar fields and the noisy point sensor.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::pomdp::Workspace;
use crate::{Error, Point, Result};

/// One Gaussian bump `amplitude · exp(−r² / 2·width²)`; negative amplitudes
/// make pits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Point,
    pub amplitude: f64,
    pub width: f64,
}

impl Bump {
    fn eval(&self, p: Point) -> f64 {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        self.amplitude * (-(dx * dx + dy * dy) / (2.0 * self.width * self.width)).exp()
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let s = -self.eval(p) / (self.width * self.width);
        [s * dx, s * dy]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Terrain {
    /// `amplitude · tanh(d / width)` where `d` is the signed distance to the
    /// line through `center` with direction `angle_deg`. The gradient is
    /// concentrated in a band along that line.
    DiagonalRidge {
        amplitude: f64,
        width: f64,
        center: Point,
        angle_deg: f64,
    },
    /// A narrow (steep) pit and a wide (shallow) pit on a flat background.
    TwoPits {
        #[serde(default)]
        background: f64,
        narrow: Bump,
        wide: Bump,
    },
    /// `offset + amplitude · cos(2π(x−x₀)/period) · cos(2π(y−y₀)/period)`.
    Hilly {
        amplitude: f64,
        period: f64,
        #[serde(default)]
        origin: Point,
        #[serde(default)]
        offset: f64,
    },
    /// Bilinear interpolation of `values[j·nx + i]` sampled at
    /// `(x_min + i·dx, y_min + j·dy)`.
    GridData {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    },
}

impl Terrain {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Terrain::DiagonalRidge {
                amplitude,
                width,
                center,
                angle_deg,
            } => {
                if !(width.is_finite() && *width > 0.0) {
                    return bad(format!("terrain.width must be positive, got {width}"));
                }
                if ![*amplitude, center[0], center[1], *angle_deg].iter().all(|v| v.is_finite()) {
                    return bad("terrain parameters must be finite".into());
                }
            }
            Terrain::TwoPits {
                background,
                narrow,
                wide,
            } => {
                for b in [narrow, wide] {
                    if !(b.width.is_finite() && b.width > 0.0) {
                        return bad(format!("terrain pit width must be positive, got {}", b.width));
                    }
                    if ![b.amplitude, b.center[0], b.center[1]].iter().all(|v| v.is_finite()) {
                        return bad("terrain parameters must be finite".into());
                    }
                }
                if !background.is_finite() {
                    return bad("terrain.background must be finite".into());
                }
            }
            Terrain::Hilly {
                amplitude,
                period,
                origin,
                offset,
            } => {
                if !(period.is_finite() && *period > 0.0) {
                    return bad(format!("terrain.period must be positive, got {period}"));
                }
                if ![*amplitude, *offset, origin[0], origin[1]].iter().all(|v| v.is_finite()) {
                    return bad("terrain parameters must be finite".into());
                }
            }
            Terrain::GridData {
                x_min,
                x_max,
                y_min,
                y_max,
                nx,
                ny,
                values,
            } => {
                if *nx < 2 || *ny < 2 {
                    return bad("terrain grid needs at least 2x2 values".into());
                }
                if !(x_min < x_max && y_min < y_max) {
                    return bad("terrain grid bounds are empty".into());
                }
                if values.len() != nx * ny {
                    return Err(Error::LengthMismatch {
                        expected: nx * ny,
                        found: values.len(),
                    });
                }
                if !values.iter().all(|v| v.is_finite()) {
                    return bad("terrain grid values must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// Field value at `p`.
    pub fn eval(&self, p: Point) -> Result<f64> {
        match self {
            Terrain::DiagonalRidge {
                amplitude,
                width,
                center,
                angle_deg,
            } => {
                let d = ridge_distance(p, *center, *angle_deg);
                Ok(amplitude * (d / width).tanh())
            }
            Terrain::TwoPits {
                background,
                narrow,
                wide,
            } => Ok(background + narrow.eval(p) + wide.eval(p)),
            Terrain::Hilly {
                amplitude,
                period,
                origin,
                offset,
            } => {
                let w = std::f64::consts::TAU / period;
                let (cx, cy) = ((w * (p[0] - origin[0])).cos(), (w * (p[1] - origin[1])).cos());
                Ok(offset + amplitude * cx * cy)
            }
            Terrain::GridData { .. } => self.bilinear(p),
        }
    }

    /// Gradient of the field at `p`. Analytic except for [`Terrain::GridData`],
    /// which uses central differences with a half-cell step.
    pub fn gradient(&self, p: Point) -> Result<[f64; 2]> {
        match self {
            Terrain::DiagonalRidge {
                amplitude,
                width,
                center,
                angle_deg,
            } => {
                let d = ridge_distance(p, *center, *angle_deg);
                let sech = 1.0 / (d / width).cosh();
                let s = amplitude / width * sech * sech;
                let n = ridge_normal(*angle_deg);
                Ok([s * n[0], s * n[1]])
            }
            Terrain::TwoPits { narrow, wide, .. } => {
                let a = narrow.gradient(p);
                let b = wide.gradient(p);
                Ok([a[0] + b[0], a[1] + b[1]])
            }
            Terrain::Hilly {
                amplitude,
                period,
                origin,
                ..
            } => {
                let w = std::f64::consts::TAU / period;
                let (ax, ay) = (w * (p[0] - origin[0]), w * (p[1] - origin[1]));
                Ok([
                    -amplitude * w * ax.sin() * ay.cos(),
                    -amplitude * w * ax.cos() * ay.sin(),
                ])
            }
            Terrain::GridData {
                x_min,
                x_max,
                y_min,
                y_max,
                nx,
                ny,
                ..
            } => {
                self.bilinear(p)?;
                let hx = 0.5 * (x_max - x_min) / (*nx - 1) as f64;
                let hy = 0.5 * (y_max - y_min) / (*ny - 1) as f64;
                let (x0, x1) = ((p[0] - hx).max(*x_min), (p[0] + hx).min(*x_max));
                let (y0, y1) = ((p[1] - hy).max(*y_min), (p[1] + hy).min(*y_max));
                let gx = (self.bilinear([x1, p[1]])? - self.bilinear([x0, p[1]])?) / (x1 - x0);
                let gy = (self.bilinear([p[0], y1])? - self.bilinear([p[0], y0])?) / (y1 - y0);
                Ok([gx, gy])
            }
        }
    }

    /// `max f − min f` over a 101×101 lattice of the workspace.
    pub fn value_range(&self, ws: &Workspace) -> Result<f64> {
        const N: usize = 101;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..N {
            for i in 0..N {
                let x = ws.x_min + (ws.x_max - ws.x_min) * i as f64 / (N - 1) as f64;
                let y = ws.y_min + (ws.y_max - ws.y_min) * j as f64 / (N - 1) as f64;
                let v = self.eval([x, y])?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        Ok(hi - lo)
    }

    fn bilinear(&self, p: Point) -> Result<f64> {
        let Terrain::GridData {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
            values,
        } = self
        else {
            unreachable!("bilinear on an analytic terrain")
        };
        let tol = 1e-9 * (x_max - x_min).max(y_max - y_min);
        if !(p[0] >= x_min - tol && p[0] <= x_max + tol && p[1] >= y_min - tol && p[1] <= y_max + tol)
        {
            return Err(Error::OutOfDomain { x: p[0], y: p[1] });
        }
        let fx = ((p[0] - x_min) / (x_max - x_min) * (*nx - 1) as f64).clamp(0.0, (*nx - 1) as f64);
        let fy = ((p[1] - y_min) / (y_max - y_min) * (*ny - 1) as f64).clamp(0.0, (*ny - 1) as f64);
        let i = (fx.floor() as usize).min(nx - 2);
        let j = (fy.floor() as usize).min(ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let v = |i: usize, j: usize| values[j * nx + i];
        Ok((1.0 - ty) * ((1.0 - tx) * v(i, j) + tx * v(i + 1, j))
            + ty * ((1.0 - tx) * v(i, j + 1) + tx * v(i + 1, j + 1)))
    }
}

fn ridge_normal(angle_deg: f64) -> [f64; 2] {
    let a = angle_deg.to_radians();
    [-a.sin(), a.cos()]
}

fn ridge_distance(p: Point, center: Point, angle_deg: f64) -> f64 {
    let n = ridge_normal(angle_deg);
    (p[0] - center[0]) * n[0] + (p[1] - center[1]) * n[1]
}

/// Additive zero-mean Gaussian measurement noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub noise_std: f64,
}

impl SensorModel {
    pub fn new(noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sensor.noise_std must be non-negative, got {noise_std}"
            )));
        }
        Ok(SensorModel { noise_std })
    }

    /// Noisy reading `f(p) + ε`, `ε ~ N(0, noise_std²)`.
    pub fn sense<R: Rng + ?Sized>(&self, terrain: &Terrain, p: Point, rng: &mut R) -> Result<f64> {
        let f = terrain.eval(p)?;
        if self.noise_std == 0.0 {
            return Ok(f);
        }
        let noise = Normal::new(0.0, self.noise_std)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(f + noise.sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_pits() -> Terrain {
        Terrain::TwoPits {
            background: 0.0,
            narrow: Bump {
                center: [7.5, 2.5],
                amplitude: -60.0,
                width: 0.8,
            },
            wide: Bump {
                center: [2.5, 7.5],
                amplitude: -40.0,
                width: 1.8,
            },
        }
    }

    fn hilly() -> Terrain {
        Terrain::Hilly {
            amplitude: 3.0,
            period: 4.0,
            origin: [0.0, 0.0],
            offset: 0.0,
        }
    }

    fn ridge() -> Terrain {
        Terrain::DiagonalRidge {
            amplitude: 10.0,
            width: 0.7,
            center: [5.0, 5.0],
            angle_deg: 45.0,
        }
    }

    fn fd(t: &Terrain, p: Point, h: f64) -> [f64; 2] {
        let f = |q| t.eval(q).unwrap();
        [
            (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h),
            (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h),
        ]
    }

    #[test]
    fn two_pits_values() {
        let t = two_pits();
        assert!((t.eval([7.5, 2.5]).unwrap() + 60.0).abs() < 0.05);
        assert!(t.eval([0.0, 0.0]).unwrap().abs() < 0.5);
        assert!(t.eval([10.0, 10.0]).unwrap().abs() < 0.5);
    }

    #[test]
    fn hilly_lattice_nodes() {
        let t = hilly();
        for (x, y) in [(0.0, 0.0), (4.0, 8.0), (-4.0, 4.0)] {
            assert!((t.eval([x, y]).unwrap() - 3.0).abs() < 1e-12);
            let g = t.gradient([x, y]).unwrap();
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
        }
    }

    #[test]
    fn ridge_far_is_flat() {
        let g = ridge().gradient([9.5, 0.5]).unwrap();
        assert!(g[0].hypot(g[1]) < 1e-3);
        let g = ridge().gradient([5.0, 5.0]).unwrap();
        assert!((g[0].hypot(g[1]) - 10.0 / 0.7).abs() < 1e-9);
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in [two_pits(), hilly(), ridge()] {
            for _ in 0..100 {
                let p = [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)];
                let g = t.gradient(p).unwrap();
                let o = fd(&t, p, 1e-5);
                let scale = g[0].hypot(g[1]).max(1e-3);
                assert!(((g[0] - o[0]).hypot(g[1] - o[1])) / scale < 1e-5, "{t:?} at {p:?}");
            }
        }
    }

    #[test]
    fn grid_data_interpolates() {
        // f = 2x + 3y sampled on a 3×3 grid is reproduced exactly
        let mut values = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                values.push(2.0 * i as f64 + 3.0 * j as f64);
            }
        }
        let t = Terrain::GridData {
            x_min: 0.0,
            x_max: 2.0,
            y_min: 0.0,
            y_max: 2.0,
            nx: 3,
            ny: 3,
            values,
        };
        t.validate().unwrap();
        assert!((t.eval([0.5, 1.25]).unwrap() - 4.75).abs() < 1e-12);
        assert!((t.eval([2.0, 2.0]).unwrap() - 10.0).abs() < 1e-12);
        let g = t.gradient([0.0, 1.7]).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] - 3.0).abs() < 1e-12);
        assert!(matches!(t.eval([2.5, 0.0]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn grid_data_rejects_bad_shape() {
        let t = Terrain::GridData {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
            nx: 2,
            ny: 2,
            values: vec![0.0; 3],
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn sensor_noise() {
        let t = hilly();
        let exact = SensorModel::new(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(exact.sense(&t, [1.0, 0.3], &mut rng).unwrap(), t.eval([1.0, 0.3]).unwrap());

        let noisy = SensorModel::new(0.5).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..5).map(|_| noisy.sense(&t, [1.0, 0.3], &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));

        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mean = (0..n).map(|_| noisy.sense(&t, [1.0, 0.3], &mut rng).unwrap()).sum::<f64>()
            / n as f64;
        let bound = 3.0 * 0.5 / (n as f64).sqrt();
        assert!((mean - t.eval([1.0, 0.3]).unwrap()).abs() < bound);
        assert!(SensorModel::new(-1.0).is_err());
    }

    #[test]
    fn serde_tagging() {
        let t: Terrain = serde_json::from_str(
            r#"{"kind":"hilly","amplitude":2.0,"period":5.0}"#,
        )
        .unwrap();
        assert_eq!(
            t,
            Terrain::Hilly {
                amplitude: 2.0,
                period: 5.0,
                origin: [0.0, 0.0],
                offset: 0.0
            }
        );
    }
}
