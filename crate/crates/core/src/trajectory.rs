//! Constrained planar cubic splines and the discrete action set.
//!
//! A trajectory is `C(u) = β·[1, u, u², u³]ᵀ` for `u ∈ [0, 1]`. Every spline
//! starts at the robot pose, leaves along the robot heading and has a fixed
//! arc length. Splines are built as cubic Hermite segments in the robot's
//! local frame and then moved rigidly onto the pose.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quadrature;
use crate::{Error, Point, Result};

const LENGTH_RTOL: f64 = 1e-4;
const MAX_SCALE_ITERATIONS: usize = 50;
const SAMPLE_TOL: f64 = 1e-6;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians in `(−π, π]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        [self.x, self.y]
    }

    /// Maps a point from this pose's local frame into the world frame.
    pub fn to_world(&self, p: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionTemplate {
    pub id: usize,
    /// Heading change between start and end of the trajectory, radians.
    pub end_heading_offset: f64,
    /// Ratio knob on the Hermite tangent magnitudes; 1 gives a near-circular arc.
    pub curvature_shape: f64,
}

/// Builds templates from end-heading offsets in degrees, sorted ascending and
/// numbered from 0.
pub fn action_templates(offsets_deg: &[f64], curvature_shape: f64) -> Result<Vec<ActionTemplate>> {
    if offsets_deg.is_empty() {
        return Err(Error::InvalidParameter("action set is empty".into()));
    }
    if !(curvature_shape > 0.0 && curvature_shape.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "curvature_shape must be positive, got {curvature_shape}"
        )));
    }
    let mut sorted = offsets_deg.to_vec();
    if sorted.iter().any(|o| !o.is_finite() || o.abs() >= 180.0) {
        return Err(Error::InvalidParameter(
            "action offsets must lie strictly inside (-180°, 180°)".into(),
        ));
    }
    sorted.sort_by(f64::total_cmp);
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(id, deg)| ActionTemplate {
            id,
            end_heading_offset: deg.to_radians(),
            curvature_shape,
        })
        .collect())
}

pub const DEFAULT_OFFSETS_DEG: [f64; 5] = [-60.0, -25.0, 0.0, 25.0, 60.0];

/// Forward, slight and sharp turns on both sides.
pub fn default_action_set() -> Vec<ActionTemplate> {
    action_templates(&DEFAULT_OFFSETS_DEG, 1.0).expect("default offsets are valid")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplineParams {
    /// Row 0 holds the x coefficients, row 1 the y coefficients, in the
    /// monomial basis `[1, u, u², u³]`.
    pub beta: [[f64; 4]; 2],
    pub length: f64,
}

impl SplineParams {
    pub fn eval(&self, u: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ParameterOutOfRange(u));
        }
        Ok(self.point(u))
    }

    pub(crate) fn point(&self, u: f64) -> Point {
        let b = &self.beta;
        [
            b[0][0] + u * (b[0][1] + u * (b[0][2] + u * b[0][3])),
            b[1][0] + u * (b[1][1] + u * (b[1][2] + u * b[1][3])),
        ]
    }

    /// `dC/du`.
    pub fn derivative(&self, u: f64) -> [f64; 2] {
        let b = &self.beta;
        [
            b[0][1] + u * (2.0 * b[0][2] + 3.0 * u * b[0][3]),
            b[1][1] + u * (2.0 * b[1][2] + 3.0 * u * b[1][3]),
        ]
    }

    fn speed(&self, u: f64) -> f64 {
        let d = self.derivative(u);
        d[0].hypot(d[1])
    }

    /// Arc length over `[0, 1]` by 32-point Gauss–Legendre quadrature.
    pub fn arc_length(&self) -> f64 {
        self.arc_length_to(1.0)
    }

    pub fn arc_length_to(&self, u: f64) -> f64 {
        quadrature::integrate(0.0, u, |t| self.speed(t))
    }

    /// `m` points at equal arc-length spacing, excluding the start and
    /// including the end point.
    pub fn sample_points(&self, m: usize) -> Vec<Point> {
        self.sample_params(m).into_iter().map(|u| self.point(u)).collect()
    }

    /// Spline parameters `u` of the points returned by [`Self::sample_points`].
    pub fn sample_params(&self, m: usize) -> Vec<f64> {
        let total = self.arc_length();
        let tol = SAMPLE_TOL * self.length;
        let mut out = Vec::with_capacity(m);
        let mut lo = 0.0;
        for i in 0..m {
            if i + 1 == m {
                out.push(1.0);
                break;
            }
            let target = (i + 1) as f64 / m as f64 * total;
            let (mut a, mut b) = (lo, 1.0);
            let mut u = 0.5 * (a + b);
            for _ in 0..200 {
                u = 0.5 * (a + b);
                let s = self.arc_length_to(u);
                if (s - target).abs() < tol {
                    break;
                }
                if s < target {
                    a = u;
                } else {
                    b = u;
                }
            }
            out.push(u);
            lo = u;
        }
        out
    }

    pub fn end_pose(&self) -> Result<Pose> {
        let d = self.derivative(1.0);
        if d[0].hypot(d[1]) < 1e-12 {
            return Err(Error::DegenerateTangent);
        }
        let p = self.point(1.0);
        Ok(Pose::new(p[0], p[1], d[1].atan2(d[0])))
    }

    /// Rigidly moves a spline expressed in `pose`'s local frame into the world.
    #[allow(clippy::needless_range_loop)]
    pub fn placed_at(&self, pose: &Pose) -> SplineParams {
        let (s, c) = pose.heading.sin_cos();
        let mut beta = [[0.0; 4]; 2];
        for j in 0..4 {
            let (bx, by) = (self.beta[0][j], self.beta[1][j]);
            beta[0][j] = c * bx - s * by;
            beta[1][j] = s * bx + c * by;
        }
        beta[0][0] += pose.x;
        beta[1][0] += pose.y;
        SplineParams {
            beta,
            length: self.length,
        }
    }
}

fn hermite(p1: Point, t0: [f64; 2], t1: [f64; 2], length: f64) -> SplineParams {
    // start point is the local origin
    let mut beta = [[0.0; 4]; 2];
    for k in 0..2 {
        beta[k][1] = t0[k];
        beta[k][2] = 3.0 * p1[k] - 2.0 * t0[k] - t1[k];
        beta[k][3] = -2.0 * p1[k] + t0[k] + t1[k];
    }
    SplineParams { beta, length }
}

/// Builds the template's spline in the local frame of a pose at the origin
/// with heading 0.
fn build_local(template: &ActionTemplate, length: f64) -> Result<SplineParams> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "trajectory length must be positive, got {length}"
        )));
    }
    let delta = template.end_heading_offset;
    let shape = template.curvature_shape;
    // End point and tangent magnitude of the circular arc with the requested
    // turn; the cubic Hermite with tangents 4R·tan(δ/4) closely follows it.
    let (p1, base) = if delta.abs() < 1e-12 {
        ([length, 0.0], length)
    } else {
        let radius = length / delta.abs();
        let chord = 2.0 * radius * (0.5 * delta.abs()).sin();
        let dir = 0.5 * delta;
        (
            [chord * dir.cos(), chord * dir.sin()],
            4.0 * radius * (0.25 * delta.abs()).tan(),
        )
    };
    let end_dir = [delta.cos(), delta.sin()];
    let make = |g: f64| {
        let m0 = g * base * shape;
        let m1 = g * base / shape;
        hermite(p1, [m0, 0.0], [m1 * end_dir[0], m1 * end_dir[1]], length)
    };
    let residual = |g: f64| make(g).arc_length() - length;

    // secant iteration on the tangent scale g
    let (mut g0, mut f0) = (1.0, residual(1.0));
    if f0.abs() / length < LENGTH_RTOL {
        return Ok(make(g0));
    }
    let (mut g1, mut f1) = (1.1, residual(1.1));
    for _ in 0..MAX_SCALE_ITERATIONS {
        if f1.abs() / length < LENGTH_RTOL {
            return Ok(make(g1));
        }
        let denom = f1 - f0;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let mut g2 = g1 - f1 * (g1 - g0) / denom;
        if g2.is_nan() || g2 <= 0.0 {
            g2 = 0.5 * g1;
        }
        (g0, f0) = (g1, f1);
        (g1, f1) = (g2, residual(g2));
    }
    Err(Error::NormalizationFailure {
        iterations: MAX_SCALE_ITERATIONS,
    })
}

/// Spline for `template` starting at `pose` with arc length `length`.
pub fn build_spline(template: &ActionTemplate, pose: &Pose, length: f64) -> Result<SplineParams> {
    Ok(build_local(template, length)?.placed_at(pose))
}

/// A template realised at a concrete pose.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacedAction {
    pub id: usize,
    pub params: SplineParams,
    pub samples: Vec<Point>,
}

#[derive(Clone, Debug)]
struct LocalAction {
    params: SplineParams,
    samples: Vec<Point>,
    end: Pose,
}

/// The planner's action set with splines and sample points precomputed in
/// the local frame; placing an action at a pose is a rigid transform.
#[derive(Clone, Debug)]
pub struct ActionSet {
    templates: Vec<ActionTemplate>,
    length: f64,
    num_samples: usize,
    local: Vec<LocalAction>,
}

impl ActionSet {
    pub fn new(templates: Vec<ActionTemplate>, length: f64, num_samples: usize) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::InvalidParameter("action set is empty".into()));
        }
        if num_samples == 0 {
            return Err(Error::InvalidParameter("num_samples must be at least 1".into()));
        }
        for (i, t) in templates.iter().enumerate() {
            if t.id != i {
                return Err(Error::InvalidParameter(
                    "action ids must be 0..n in order".into(),
                ));
            }
        }
        let local = templates
            .iter()
            .map(|t| {
                let params = build_local(t, length)?;
                Ok(LocalAction {
                    samples: params.sample_points(num_samples),
                    end: params.end_pose()?,
                    params,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ActionSet {
            templates,
            length,
            num_samples,
            local,
        })
    }

    pub fn templates(&self) -> &[ActionTemplate] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn place(&self, id: usize, pose: &Pose) -> PlacedAction {
        let local = &self.local[id];
        PlacedAction {
            id,
            params: local.params.placed_at(pose),
            samples: local.samples.iter().map(|&p| pose.to_world(p)).collect(),
        }
    }

    pub fn place_all(&self, pose: &Pose) -> Vec<PlacedAction> {
        (0..self.len()).map(|id| self.place(id, pose)).collect()
    }

    /// Pose reached after executing action `id` from `pose`.
    pub fn end_pose(&self, id: usize, pose: &Pose) -> Pose {
        let end = &self.local[id].end;
        let p = pose.to_world(end.position());
        Pose::new(p[0], p[1], pose.heading + end.heading)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight() -> ActionTemplate {
        ActionTemplate {
            id: 0,
            end_heading_offset: 0.0,
            curvature_shape: 1.0,
        }
    }

    fn turn(deg: f64) -> ActionTemplate {
        ActionTemplate {
            id: 0,
            end_heading_offset: deg.to_radians(),
            curvature_shape: 1.0,
        }
    }

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn straight_spline_endpoints() {
        let s = build_spline(&straight(), &Pose::new(0.0, 0.0, 0.0), 1.0).unwrap();
        assert!(close(s.eval(1.0).unwrap(), [1.0, 0.0], 1e-12));
        assert!(close(s.eval(0.5).unwrap(), [0.5, 0.0], 1e-12));
        let end = s.end_pose().unwrap();
        assert!(end.heading.abs() < 1e-12);

        let s = build_spline(&straight(), &Pose::new(2.0, 3.0, PI / 2.0), 1.0).unwrap();
        assert!(close(s.eval(1.0).unwrap(), [2.0, 4.0], 1e-12));
        assert!((s.arc_length() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        let s = build_spline(&straight(), &Pose::new(0.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!(s.eval(1.5), Err(Error::ParameterOutOfRange(1.5)));
        assert!(s.eval(-0.1).is_err());
    }

    #[test]
    fn polynomial_evaluation() {
        let s = SplineParams {
            beta: [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
            length: 1.0,
        };
        assert_eq!(s.eval(0.5).unwrap(), [0.5, 0.25]);
    }

    #[test]
    fn arc_length_is_homogeneous() {
        let s = build_spline(&turn(25.0), &Pose::new(0.0, 0.0, 0.0), 1.0).unwrap();
        let mut doubled = s;
        for row in doubled.beta.iter_mut() {
            for c in row.iter_mut() {
                *c *= 2.0;
            }
        }
        assert!((doubled.arc_length() - 2.0 * s.arc_length()).abs() < 1e-12);
    }

    #[test]
    fn turn_end_heading() {
        let s = build_spline(&turn(60.0), &Pose::new(0.0, 0.0, 0.0), 1.0).unwrap();
        let end = s.end_pose().unwrap();
        assert!((end.heading - 60f64.to_radians()).abs() < 1e-6);
        let d0 = s.derivative(0.0);
        assert!(d0[1].atan2(d0[0]).abs() < 1e-12);
    }

    #[test]
    fn straight_samples() {
        let s = build_spline(&straight(), &Pose::new(0.0, 0.0, 0.0), 1.0).unwrap();
        let pts = s.sample_points(2);
        assert!(close(pts[0], [0.5, 0.0], 1e-6));
        assert!(close(pts[1], [1.0, 0.0], 1e-12));
        let pts = s.sample_points(8);
        for (i, p) in pts.iter().enumerate() {
            assert!((p[0] - 0.125 * (i + 1) as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_tangent() {
        let s = SplineParams {
            beta: [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
            length: 1.0,
        };
        assert_eq!(s.end_pose(), Err(Error::DegenerateTangent));
    }

    #[test]
    fn invalid_length_rejected() {
        assert!(build_spline(&straight(), &Pose::new(0.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn default_set_is_symmetric_and_sorted() {
        let set = default_action_set();
        assert_eq!(set.len(), 5);
        for (i, t) in set.iter().enumerate() {
            assert_eq!(t.id, i);
            assert!((t.end_heading_offset + set[4 - i].end_heading_offset).abs() < 1e-15);
        }
        assert!(set.windows(2).all(|w| w[0].end_heading_offset < w[1].end_heading_offset));
    }

    #[test]
    fn action_set_placement_matches_direct_build() {
        let set = ActionSet::new(default_action_set(), 1.3, 8).unwrap();
        let pose = Pose::new(-1.2, 4.0, 2.1);
        for t in set.templates() {
            let placed = set.place(t.id, &pose);
            let direct = build_spline(t, &pose, 1.3).unwrap();
            let pts = direct.sample_points(8);
            for (a, b) in placed.samples.iter().zip(&pts) {
                assert!(close(*a, *b, 1e-9));
            }
            let e1 = set.end_pose(t.id, &pose);
            let e2 = direct.end_pose().unwrap();
            assert!((e1.x - e2.x).abs() < 1e-9 && (e1.y - e2.y).abs() < 1e-9);
            assert!(wrap_angle(e1.heading - e2.heading).abs() < 1e-9);
        }
    }
}
