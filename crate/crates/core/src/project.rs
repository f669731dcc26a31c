//! Maps of the plane onto compact screens: the Riemann sphere, the lower
//! semi-sphere and the projective plane, plus flat charts of each.
//!
//! Line points are handled as plane points with `y = 0`, so every sphere
//! here lives in `ℝ³`. The spherical embedding sends the origin to the
//! south pole `(0, 0, −r)`, the circle `‖x‖ = r` to the equator and `∞` to
//! the north pole; the semi-spherical one projects the tangent plane
//! `y₂ = −r` from the centre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Relative height above which a sphere point counts as the north pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub coords: [f64; 3],
    pub radius: f64,
}

impl SpherePoint {
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let [a, b, c] = self.coords;
        let [x, y, z] = other.coords;
        ((a - x).powi(2) + (b - y).powi(2) + (c - z).powi(2)).sqrt()
    }

    pub fn north_pole(radius: f64) -> Self {
        SpherePoint {
            coords: [0.0, 0.0, radius],
            radius,
        }
    }

    /// `|‖y‖² − r²| / r²`.
    pub fn sphere_residual(&self) -> f64 {
        let n: f64 = self.coords.iter().map(|v| v * v).sum();
        (n - self.radius * self.radius).abs() / (self.radius * self.radius)
    }

    pub fn antipode(&self) -> Self {
        let [a, b, c] = self.coords;
        SpherePoint {
            coords: [-a, -b, -c],
            radius: self.radius,
        }
    }
}

/// Inverse stereographic projection from the north pole `(0, 0, r)`.
pub fn spherical_embed(p: Point, r: f64) -> SpherePoint {
    let n2 = p.norm_sqr();
    let s = 2.0 * r * r / (r * r + n2);
    SpherePoint {
        coords: [s * p.x, s * p.y, r * (n2 - r * r) / (n2 + r * r)],
        radius: r,
    }
}

/// Stereographic projection from the north pole back to the plane.
pub fn stereographic_project(s: &SpherePoint) -> Result<Point> {
    let r = s.radius;
    let [y0, y1, yn] = s.coords;
    if yn >= r * (1.0 - POLE_TOLERANCE) {
        return Err(Error::PointAtInfinity);
    }
    // r − y_n loses every digit near the pole; rewrite it there
    let gap = if yn > 0.0 {
        (y0 * y0 + y1 * y1) / (r + yn)
    } else {
        r - yn
    };
    Ok(Point::new(r * y0 / gap, r * y1 / gap))
}

/// Central projection of the plane `y_n = −r` onto the lower semi-sphere.
pub fn semispherical_embed(p: Point, r: f64) -> SpherePoint {
    let root = (r * r + p.norm_sqr()).sqrt();
    SpherePoint {
        coords: [r * p.x / root, r * p.y / root, -r * r / root],
        radius: r,
    }
}

/// `stereographic_project(semispherical_embed(p, r))`: the plane squeezed
/// into the open disk of radius `r`.
pub fn semispherical_image(p: Point, r: f64) -> Point {
    let root = (r * r + p.norm_sqr()).sqrt();
    let scale = r / (root + r);
    Point::new(scale * p.x, scale * p.y)
}

/// A point of the projective plane, stored as the representative of
/// `{y, −y}` with `y_n ≤ 0`; on the equator the first non-zero coordinate
/// is positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePoint {
    rep: SpherePoint,
}

impl ProjectivePoint {
    pub fn from_sphere(s: SpherePoint) -> Self {
        let [a, b, c] = s.coords;
        let flip = if c != 0.0 {
            c > 0.0
        } else if a != 0.0 {
            a < 0.0
        } else {
            b < 0.0
        };
        let rep = if flip { s.antipode() } else { s };
        // −0.0 would make equal classes compare unequal
        let clean = rep.coords.map(|v| if v == 0.0 { 0.0 } else { v });
        ProjectivePoint {
            rep: SpherePoint {
                coords: clean,
                radius: s.radius,
            },
        }
    }

    pub fn representative(&self) -> SpherePoint {
        self.rep
    }

    /// Quotient metric `min(‖a − b‖, ‖a + b‖)`.
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        self.rep
            .distance(&other.rep)
            .min(self.rep.distance(&other.rep.antipode()))
    }
}

/// `q ∘ s₀`: semi-spherical reflection followed by the antipodal quotient.
pub fn projective_image(p: Point, r: f64) -> ProjectivePoint {
    ProjectivePoint::from_sphere(semispherical_embed(p, r))
}

/// How a projective point is drawn on a flat screen. Both are
/// interpretations; the source fixes no particular transformation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectiveChart {
    /// The lower representative through the stereographic projection:
    /// the closed disk of radius `r` with antipodal rim points identified.
    #[default]
    Disk,
    /// The projective map `(x, y) ↦ (x/(1+y), y/(1+y))` in units of `r`,
    /// which sends the horizon to the line `y = r`.
    Affine,
}

impl ProjectiveChart {
    pub fn flatten(self, p: &ProjectivePoint) -> Result<Point> {
        let s = p.representative();
        match self {
            ProjectiveChart::Disk => stereographic_project(&s),
            ProjectiveChart::Affine => {
                // [x/r : y/r : 1] = [y0 : y1 : −y2]  ↦  [y0 : y1 : y1 − y2]
                let [y0, y1, y2] = s.coords;
                let w = y1 - y2;
                if w.abs() <= POLE_TOLERANCE * s.radius {
                    return Err(Error::PointAtInfinity);
                }
                Ok(Point::new(s.radius * y0 / w, s.radius * y1 / w))
            }
        }
    }
}

/// Orthographic views of the sphere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SphereView {
    /// From `−y₁`: the front half, with `∞` at the top.
    #[default]
    Side,
    /// From above: the neighbourhood of `∞`.
    North,
    /// From below: the neighbourhood of the origin.
    South,
}

impl SphereView {
    /// Screen position of `s`, or `None` when it faces away.
    pub fn flatten(self, s: &SpherePoint) -> Option<Point> {
        let [a, b, c] = s.coords;
        match self {
            SphereView::Side => (b <= 0.0).then(|| Point::new(a, c)),
            SphereView::North => (c >= 0.0).then(|| Point::new(a, b)),
            SphereView::South => (c <= 0.0).then(|| Point::new(a, -b)),
        }
    }
}

/// One of the three screens.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Embedding {
    Spherical(SphereView),
    Semispherical,
    Projective(ProjectiveChart),
}

impl Embedding {
    /// Flat screen position of a plane point, `None` when hidden.
    pub fn screen_point(self, p: Point, r: f64) -> Option<Point> {
        match self {
            Embedding::Spherical(view) => view.flatten(&spherical_embed(p, r)),
            Embedding::Semispherical => Some(semispherical_image(p, r)),
            Embedding::Projective(chart) => chart.flatten(&projective_image(p, r)).ok(),
        }
    }

    /// Screen position of the point at infinity, where it has one.
    pub fn infinity_point(self, r: f64) -> Option<Point> {
        match self {
            Embedding::Spherical(view) => view.flatten(&SpherePoint::north_pole(r)),
            _ => None,
        }
    }

    /// The point of the compact screen (as a subset of `ℝ³`) hit by `p`.
    /// Projective points use their lower representative.
    pub fn sphere_point(self, p: Point, r: f64) -> SpherePoint {
        match self {
            Embedding::Spherical(_) => spherical_embed(p, r),
            Embedding::Semispherical => semispherical_embed(p, r),
            Embedding::Projective(_) => projective_image(p, r).representative(),
        }
    }
}
