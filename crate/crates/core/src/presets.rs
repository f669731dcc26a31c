//! Named multi-functions and their documented constants.
//!
//! Every preset is stored in its expanding form `Φ`; the contracting dual
//! is `Φ⁻¹`. All presets except `koch` preserve a lattice, so their macro
//! orbits can be computed exactly.

use std::f64::consts::FRAC_PI_3;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{Basis, LatticePoint, Point};
use crate::multifunc::{BranchMap, MultiFunction, Rational, RationalMultiFunction};

pub const PRESET_NAMES: [&str; 7] = [
    "cantor",
    "cross",
    "sierpinski-triangle",
    "koch",
    "snowflake6",
    "snowflake7",
    "carpet",
];

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    /// The expanding multi-function.
    pub map: MultiFunction,
    /// The contracting dual.
    pub inverse: MultiFunction,
    /// `Lip(Φ⁻¹)`.
    pub expected_lambda: f64,
    pub expected_fix: Vec<Point>,
    pub lattice: Option<Basis>,
    /// Layer distance `δ` at `k = 1`, where it is known in closed form.
    pub documented_delta: Option<f64>,
    /// 1 for presets on the real line, 2 otherwise.
    pub dimension: usize,
}

impl Preset {
    /// Same preset with a different documented `δ`; used to check that
    /// verification notices wrong constants.
    pub fn with_documented_delta(mut self, delta: Option<f64>) -> Self {
        self.documented_delta = delta;
        self
    }
}

fn eisenstein(c0: i64, c1: i64) -> Point {
    LatticePoint::new(Basis::Eisenstein, c0, c1)
        .expect("eisenstein points take two coefficients")
        .to_point()
}

/// `{0, 1, −1, i, −i}`.
pub fn cross_centers() -> Vec<Point> {
    vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(-1.0, 0.0),
        Point::new(0.0, 1.0),
        Point::new(0.0, -1.0),
    ]
}

/// Sixth roots of unity `ω^k`, exact on the Eisenstein lattice.
pub fn hexagon_vertices() -> Vec<Point> {
    [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
        .into_iter()
        .map(|(a, b)| eisenstein(a, b))
        .collect()
}

/// `{1, e^{2πi/3}, e^{4πi/3}}`.
pub fn triangle_vertices() -> Vec<Point> {
    [(1, 0), (-1, 1), (0, -1)]
        .into_iter()
        .map(|(a, b)| eisenstein(a, b))
        .collect()
}

/// `{−1, 0, 1}² ∖ {(0, 0)}`.
pub fn carpet_centers() -> Vec<Point> {
    let mut out = Vec::with_capacity(8);
    for y in [-1.0, 0.0, 1.0] {
        for x in [-1.0, 0.0, 1.0] {
            if x != 0.0 || y != 0.0 {
                out.push(Point::new(x, y));
            }
        }
    }
    out
}

/// `z ↦ s·z − (s − 1)·c` for each center `c`; each center is fixed.
fn homothety(
    name: &'static str,
    scale: f64,
    centers: Vec<Point>,
    lattice: Basis,
    documented_delta: Option<f64>,
    dimension: usize,
) -> Preset {
    let map = MultiFunction::homothety_family(scale, scale - 1.0, &centers, Some(lattice))
        .expect("preset branches are invertible");
    Preset {
        name,
        inverse: map.inverse(),
        map,
        expected_lambda: 1.0 / scale,
        expected_fix: centers,
        lattice: Some(lattice),
        documented_delta,
        dimension,
    }
}

fn koch() -> Preset {
    let s3 = 3f64.sqrt();
    let a1 = Complex64::from_polar(s3, -FRAC_PI_3);
    let a2 = Complex64::from_polar(s3, FRAC_PI_3);
    let three = Complex64::new(3.0, 0.0);
    // 3 + a1·(z̄ − 3) and −3 + a2·(z̄ + 3)
    let map = MultiFunction::new(
        vec![
            BranchMap::conjugate(a1, three - a1 * 3.0).expect("invertible"),
            BranchMap::conjugate(a2, -three + a2 * 3.0).expect("invertible"),
        ],
        None,
    )
    .expect("two branches");
    Preset {
        name: "koch",
        inverse: map.inverse(),
        map,
        expected_lambda: 1.0 / s3,
        expected_fix: vec![Point::real(3.0), Point::real(-3.0)],
        lattice: None,
        documented_delta: None,
        dimension: 2,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "cantor" => homothety(
            "cantor",
            3.0,
            vec![Point::real(0.0), Point::real(1.0)],
            Basis::Integer,
            None,
            1,
        ),
        "cross" => homothety("cross", 3.0, cross_centers(), Basis::Gaussian, Some(1.0), 2),
        "sierpinski-triangle" => homothety(
            "sierpinski-triangle",
            2.0,
            triangle_vertices(),
            Basis::Eisenstein,
            None,
            2,
        ),
        "koch" => koch(),
        "snowflake6" => homothety("snowflake6", 3.0, hexagon_vertices(), Basis::Eisenstein, None, 2),
        "snowflake7" => {
            let mut centers = vec![Point::ORIGIN];
            centers.extend(hexagon_vertices());
            homothety("snowflake7", 3.0, centers, Basis::Eisenstein, None, 2)
        }
        "carpet" => homothety("carpet", 3.0, carpet_centers(), Basis::Gaussian, None, 2),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

pub fn all_presets() -> Vec<Preset> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("listed presets exist"))
        .collect()
}

/// `x ↦ {3x, 3x − 2}` over exact rationals.
pub fn cantor_exact() -> RationalMultiFunction {
    let three = Rational::from_integer(3);
    RationalMultiFunction::new(vec![(three, Rational::zero()), (three, Rational::from_integer(-2))])
        .expect("two invertible branches")
}

/// `y ↦ {y/3, y/3 + 2/3}` over exact rationals.
pub fn cantor_exact_inverse() -> RationalMultiFunction {
    cantor_exact().inverse()
}

/// All sums `Σ_{k=1..n} 2·x_k·3^{−k}` with `x_k ∈ {0, 1}`, ascending.
pub fn cantor_micro_oracle(n: usize) -> Result<Vec<Rational>> {
    if n > 39 {
        return Err(Error::LatticeOverflow);
    }
    let denom = 3i128.pow(n as u32);
    let mut numerators = vec![0i128];
    for k in 1..=n {
        let weight = 2 * 3i128.pow((n - k) as u32);
        let with_one: Vec<i128> = numerators.iter().map(|v| v + weight).collect();
        numerators.extend(with_one);
    }
    numerators.sort_unstable();
    Ok(numerators.into_iter().map(|v| Rational::new(v, denom)).collect())
}

/// Shorthand for `n/d` as an exact rational.
pub fn rational(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DedupPolicy, PointSet};
    use crate::multifunc::MultiMap;

    #[test]
    fn constants_match() {
        for p in all_presets() {
            assert!((p.inverse.lipschitz() - p.expected_lambda).abs() < 1e-12, "{}", p.name);
            let fix = p.map.fixed_points().unwrap().to_points();
            assert_eq!(fix.len(), p.expected_fix.len(), "{}", p.name);
            for q in &p.expected_fix {
                assert!(fix.iter().any(|f| f.distance(*q) < 1e-9), "{}", p.name);
            }
            assert!(p.map.inverse().inverse().same_branches(&p.map, 1e-12));
        }
    }

    #[test]
    fn lattice_presets_convert() {
        for p in all_presets() {
            match p.lattice {
                Some(_) => {
                    p.map.to_lattice().unwrap();
                }
                None => assert!(p.map.to_lattice().is_err()),
            }
        }
    }

    #[test]
    fn snowflake6_fixed_points_on_unit_circle() {
        let fix = preset("snowflake6").unwrap().map.fixed_points().unwrap();
        assert_eq!(fix.len(), 6);
        for p in fix.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn carpet_image_of_origin() {
        let p = preset("carpet").unwrap();
        let img = p
            .map
            .apply(&PointSet::from_points(p.map.dedup_policy(), [Point::ORIGIN]))
            .unwrap();
        let expected = PointSet::from_points(
            p.map.dedup_policy(),
            carpet_centers().iter().map(|c| Point::new(-2.0 * c.x, -2.0 * c.y)),
        );
        assert!(img.same_points(&expected));
    }

    #[test]
    fn cantor_lambda() {
        assert!((preset("cantor").unwrap().inverse.lipschitz() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(preset("nosuch"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn micro_oracle_small_cases() {
        assert_eq!(cantor_micro_oracle(0).unwrap(), vec![rational(0, 1)]);
        assert_eq!(cantor_micro_oracle(1).unwrap(), vec![rational(0, 1), rational(2, 3)]);
        assert_eq!(
            cantor_micro_oracle(2).unwrap(),
            vec![rational(0, 1), rational(2, 9), rational(2, 3), rational(8, 9)]
        );
        assert!(cantor_micro_oracle(40).is_err());
    }

    #[test]
    fn exact_cantor_fixed_points() {
        let fix = cantor_exact().fixed_points().unwrap();
        assert_eq!(fix.sorted_keys(), vec![rational(0, 1), rational(1, 1)]);
        let set = PointSet::from_points(DedupPolicy::Exact, [rational(0, 1)]);
        let img = cantor_exact().apply(&set).unwrap();
        assert_eq!(img.sorted_keys(), vec![rational(-2, 1), rational(0, 1)]);
    }
}
