//! Affine automorphism group of a polygon and its fixed set.
//!
//! Whitening by the centroid and the area-moment covariance turns every
//! affine automorphism into an orthogonal symmetry of the normalized vertex
//! set. Automorphisms permute vertices, so the candidates are the `2V`
//! dihedral vertex correspondences.

use nalgebra::Matrix2;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::geometry::{AffineMap, ConvexPolygon, Point};
use crate::unimodular::{rotation, spd_power};

/// Vertex-match tolerance in whitened coordinates.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Fixed-set membership tolerance.
pub const FIXED_SET_TOL: f64 = 1e-8;

/// Centroid and whitening matrix `Σ^{-1/2}` of a body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhiteningFrame {
    pub centroid: Point,
    pub whiten: Matrix2<f64>,
    pub unwhiten: Matrix2<f64>,
}

impl WhiteningFrame {
    pub fn of(p: &ConvexPolygon) -> Self {
        let cov = p.covariance();
        Self {
            centroid: p.centroid(),
            whiten: spd_power(&cov, -0.5),
            unwhiten: spd_power(&cov, 0.5),
        }
    }

    pub fn to_whitened(&self, q: &Point) -> Point {
        self.whiten * (q - self.centroid)
    }

    pub fn from_whitened(&self, w: &Point) -> Point {
        self.unwhiten * w + self.centroid
    }

    /// The affine map of the original plane conjugate to `o` in whitened coordinates.
    pub fn conjugate(&self, o: &Matrix2<f64>) -> AffineMap {
        let lin = self.unwhiten * o * self.whiten;
        AffineMap::new(lin, self.centroid - lin * self.centroid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    Trivial,
    Cyclic(usize),
    Dihedral(usize),
}

impl std::fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryKind::Trivial => write!(f, "trivial"),
            SymmetryKind::Cyclic(m) => write!(f, "cyclic({m})"),
            SymmetryKind::Dihedral(m) => write!(f, "dihedral({m})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedSet {
    WholePlane,
    Line { point: Point, direction: Point },
    SinglePoint(Point),
}

impl FixedSet {
    pub fn contains(&self, probe: &Point) -> bool {
        match self {
            FixedSet::WholePlane => true,
            FixedSet::SinglePoint(p) => (probe - p).norm() <= FIXED_SET_TOL,
            FixedSet::Line { point, direction } => {
                let d = probe - point;
                (d.x * direction.y - d.y * direction.x).abs() <= FIXED_SET_TOL
            }
        }
    }
}

/// Automorphism group summary and the fixed set `F(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub order: usize,
    pub kind: SymmetryKind,
    pub fixed_set: FixedSet,
    /// The automorphisms themselves, in original coordinates.
    pub maps: Vec<AffineMap>,
}

impl SymmetryReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report json")
    }
}

impl Serialize for SymmetryReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let fixed = match &self.fixed_set {
            FixedSet::WholePlane => serde_json::json!({"type": "whole-plane"}),
            FixedSet::SinglePoint(p) => serde_json::json!({"type": "single-point", "point": [p.x, p.y]}),
            FixedSet::Line { point, direction } => serde_json::json!({
                "type": "line",
                "point": [point.x, point.y],
                "direction": [direction.x, direction.y],
            }),
        };
        let mut st = s.serialize_struct("SymmetryReport", 3)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("kind", &self.kind.to_string())?;
        st.serialize_field("fixed_set", &fixed)?;
        st.end()
    }
}

fn reflection(axis_angle: f64) -> Matrix2<f64> {
    let (s, c) = (2.0 * axis_angle).sin_cos();
    Matrix2::new(c, s, s, -c)
}

fn matches(o: &Matrix2<f64>, w: &[Point], target: impl Fn(usize) -> usize) -> bool {
    (0..w.len()).all(|i| (o * w[i] - w[target(i)]).norm() <= SYMMETRY_TOL)
}

/// Computes the affine automorphism group of `p`.
pub fn automorphism_group(p: &ConvexPolygon) -> SymmetryReport {
    let frame = WhiteningFrame::of(p);
    let w: Vec<Point> = p.vertices().iter().map(|v| frame.to_whitened(v)).collect();
    let n = w.len();
    let arg = |q: &Point| q.y.atan2(q.x);

    let mut rotations = Vec::new();
    let mut reflections: Vec<f64> = Vec::new();
    for j in 0..n {
        if (w[0].norm() - w[j].norm()).abs() > SYMMETRY_TOL {
            continue;
        }
        let rot = rotation(arg(&w[j]) - arg(&w[0]));
        if matches(&rot, &w, |i| (i + j) % n) {
            rotations.push(rot);
        }
        let axis = (arg(&w[0]) + arg(&w[j])) / 2.0;
        let refl = reflection(axis);
        if matches(&refl, &w, |i| (j + n - i) % n) {
            reflections.push(axis);
        }
    }

    let rot_count = rotations.len().max(1);
    let kind = match (rot_count, reflections.len()) {
        (1, 0) => SymmetryKind::Trivial,
        (m, 0) => SymmetryKind::Cyclic(m),
        (m, _) => SymmetryKind::Dihedral(m),
    };
    let fixed_set = if rot_count >= 2 {
        FixedSet::SinglePoint(frame.centroid)
    } else if reflections.len() == 1 {
        let d = frame.unwhiten * Point::new(reflections[0].cos(), reflections[0].sin());
        FixedSet::Line { point: frame.centroid, direction: d.normalize() }
    } else {
        FixedSet::WholePlane
    };
    let maps = rotations
        .iter()
        .copied()
        .chain(reflections.iter().map(|&a| reflection(a)))
        .map(|o| frame.conjugate(&o))
        .collect();
    SymmetryReport {
        order: rot_count + reflections.len(),
        kind,
        fixed_set,
        maps,
    }
}

/// Membership of `probe` in the fixed set of `report`.
pub fn fixed_points(report: &SymmetryReport, probe: &Point) -> bool {
    report.fixed_set.contains(probe)
}
