use std::fmt;

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Integral basis of a discrete subring of `ℂ`.
///
/// * `Integer`: `ℤ ⊂ ℝ` (second coefficient is always zero).
/// * `Gaussian`: `ℤ[i]` with basis `(1, i)`.
/// * `Eisenstein`: `ℤ[ω]` with basis `(1, ω)`, `ω = e^{iπ/3}`, `ω² = ω − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Integer,
    Gaussian,
    Eisenstein,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Integer => "integer",
            Basis::Gaussian => "gaussian",
            Basis::Eisenstein => "eisenstein",
        }
    }

    /// Minimal distance between two distinct lattice points.
    pub fn min_spacing(self) -> f64 {
        1.0
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point `c0 + c1·e` of a lattice, where `e` is `i` or `ω`.
///
/// All arithmetic is overflow-checked and fails with
/// [`Error::LatticeOverflow`] instead of wrapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    basis: Basis,
    c: [i64; 2],
}

impl LatticePoint {
    pub fn new(basis: Basis, c0: i64, c1: i64) -> Result<Self> {
        if basis == Basis::Integer && c1 != 0 {
            return Err(Error::InvalidArgument(
                "integer lattice points have no second coordinate".into(),
            ));
        }
        Ok(LatticePoint { basis, c: [c0, c1] })
    }

    pub fn integer(v: i64) -> Self {
        LatticePoint {
            basis: Basis::Integer,
            c: [v, 0],
        }
    }

    pub fn zero(basis: Basis) -> Self {
        LatticePoint { basis, c: [0, 0] }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coefficients(&self) -> [i64; 2] {
        self.c
    }

    fn same_basis(&self, other: &LatticePoint) -> Result<()> {
        if self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "mixed lattice bases {} and {}",
                self.basis, other.basis
            )))
        }
    }

    pub fn checked_add(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.same_basis(other)?;
        let c0 = self.c[0].checked_add(other.c[0]);
        let c1 = self.c[1].checked_add(other.c[1]);
        match (c0, c1) {
            (Some(c0), Some(c1)) => Ok(LatticePoint {
                basis: self.basis,
                c: [c0, c1],
            }),
            _ => Err(Error::LatticeOverflow),
        }
    }

    pub fn checked_neg(&self) -> Result<LatticePoint> {
        match (self.c[0].checked_neg(), self.c[1].checked_neg()) {
            (Some(c0), Some(c1)) => Ok(LatticePoint {
                basis: self.basis,
                c: [c0, c1],
            }),
            _ => Err(Error::LatticeOverflow),
        }
    }

    pub fn checked_sub(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.checked_add(&other.checked_neg()?)
    }

    pub fn checked_scale(&self, k: i64) -> Result<LatticePoint> {
        match (self.c[0].checked_mul(k), self.c[1].checked_mul(k)) {
            (Some(c0), Some(c1)) => Ok(LatticePoint {
                basis: self.basis,
                c: [c0, c1],
            }),
            _ => Err(Error::LatticeOverflow),
        }
    }

    /// Ring product. Multiplying by a unit of the lattice is the special
    /// case where `other` has norm one.
    pub fn checked_mul(&self, other: &LatticePoint) -> Result<LatticePoint> {
        self.same_basis(other)?;
        let [a0, a1] = self.c;
        let [b0, b1] = other.c;
        let m = |x: i64, y: i64| x.checked_mul(y);
        let out = match self.basis {
            Basis::Integer => m(a0, b0).map(|v| [v, 0]),
            // (a0 + a1 i)(b0 + b1 i)
            Basis::Gaussian => (|| {
                let re = m(a0, b0)?.checked_sub(m(a1, b1)?)?;
                let im = m(a0, b1)?.checked_add(m(a1, b0)?)?;
                Some([re, im])
            })(),
            // (a0 + a1 ω)(b0 + b1 ω) with ω² = ω − 1
            Basis::Eisenstein => (|| {
                let a1b1 = m(a1, b1)?;
                let c0 = m(a0, b0)?.checked_sub(a1b1)?;
                let c1 = m(a0, b1)?.checked_add(m(a1, b0)?)?.checked_add(a1b1)?;
                Some([c0, c1])
            })(),
        };
        out.map(|c| LatticePoint { basis: self.basis, c })
            .ok_or(Error::LatticeOverflow)
    }

    /// Complex conjugate; both lattices are closed under it
    /// (`conj ω = 1 − ω`).
    pub fn checked_conj(&self) -> Result<LatticePoint> {
        let [c0, c1] = self.c;
        let c = match self.basis {
            Basis::Integer => Some([c0, 0]),
            Basis::Gaussian => c1.checked_neg().map(|n| [c0, n]),
            Basis::Eisenstein => match (c0.checked_add(c1), c1.checked_neg()) {
                (Some(a), Some(b)) => Some([a, b]),
                _ => None,
            },
        };
        c.map(|c| LatticePoint { basis: self.basis, c })
            .ok_or(Error::LatticeOverflow)
    }

    /// Floating-point coordinates, one rounding per coordinate.
    pub fn to_point(&self) -> Point {
        let [c0, c1] = self.c;
        match self.basis {
            Basis::Integer => Point::real(c0 as f64),
            Basis::Gaussian => Point::new(c0 as f64, c1 as f64),
            Basis::Eisenstein => {
                let twice_x = 2 * c0 as i128 + c1 as i128;
                Point::new(twice_x as f64 * 0.5, c1 as f64 * SQRT3_2)
            }
        }
    }

    /// Nearest lattice point to `p`, provided it lies within `tol` of `p`.
    pub fn from_point(basis: Basis, p: Point, tol: f64) -> Option<LatticePoint> {
        let (c0, c1) = match basis {
            Basis::Integer => (p.x.round(), 0.0),
            Basis::Gaussian => (p.x.round(), p.y.round()),
            Basis::Eisenstein => {
                let c1 = (p.y / SQRT3_2).round();
                ((p.x - 0.5 * c1).round(), c1)
            }
        };
        if !(c0.abs() < 9.0e15 && c1.abs() < 9.0e15) {
            return None;
        }
        let q = LatticePoint {
            basis,
            c: [c0 as i64, c1 as i64],
        };
        (q.to_point().distance(p) <= tol).then_some(q)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.basis {
            Basis::Integer => write!(f, "{}", self.c[0]),
            Basis::Gaussian => write!(f, "{}{:+}i", self.c[0], self.c[1]),
            Basis::Eisenstein => write!(f, "{}{:+}ω", self.c[0], self.c[1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eis(c0: i64, c1: i64) -> LatticePoint {
        LatticePoint::new(Basis::Eisenstein, c0, c1).unwrap()
    }

    #[test]
    fn omega_squared_is_omega_minus_one() {
        let w = eis(0, 1);
        assert_eq!(w.checked_mul(&w).unwrap(), eis(-1, 1));
        // ω³ = −1
        let w3 = w.checked_mul(&w).unwrap().checked_mul(&w).unwrap();
        assert_eq!(w3, eis(-1, 0));
    }

    #[test]
    fn conjugate_of_omega() {
        assert_eq!(eis(0, 1).checked_conj().unwrap(), eis(1, -1));
        let p = eis(0, 1).checked_conj().unwrap().to_point();
        assert!((p.x - 0.5).abs() < 1e-15 && (p.y + SQRT3_2).abs() < 1e-15);
    }

    #[test]
    fn overflow_is_an_error() {
        let big = LatticePoint::integer(i64::MAX / 2 + 1);
        assert!(matches!(big.checked_scale(2), Err(Error::LatticeOverflow)));
        assert!(matches!(big.checked_add(&big), Err(Error::LatticeOverflow)));
        let g = LatticePoint::new(Basis::Gaussian, i64::MAX, 1).unwrap();
        assert!(matches!(g.checked_mul(&g), Err(Error::LatticeOverflow)));
    }

    #[test]
    fn round_trip_through_point() {
        for basis in [Basis::Gaussian, Basis::Eisenstein] {
            for c0 in -5..=5 {
                for c1 in -5..=5 {
                    let q = LatticePoint::new(basis, c0, c1).unwrap();
                    assert_eq!(LatticePoint::from_point(basis, q.to_point(), 1e-9), Some(q));
                }
            }
        }
        assert_eq!(
            LatticePoint::from_point(Basis::Gaussian, Point::new(0.5, 0.0), 1e-9),
            None
        );
    }

    fn arb_basis() -> impl Strategy<Value = Basis> {
        prop_oneof![Just(Basis::Gaussian), Just(Basis::Eisenstein)]
    }

    proptest! {
        #[test]
        fn product_matches_complex_product(basis in arb_basis(), a in (-1000i64..1000, -1000i64..1000), b in (-1000i64..1000, -1000i64..1000)) {
            let p = LatticePoint::new(basis, a.0, a.1).unwrap();
            let q = LatticePoint::new(basis, b.0, b.1).unwrap();
            let exact = p.checked_mul(&q).unwrap().to_point();
            let float = p.to_point().to_complex() * q.to_point().to_complex();
            prop_assert!((exact.x - float.re).abs() < 1e-6 && (exact.y - float.im).abs() < 1e-6);
            let conj = p.checked_conj().unwrap().to_point();
            prop_assert!((conj.x - p.to_point().x).abs() < 1e-9 && (conj.y + p.to_point().y).abs() < 1e-9);
        }

        #[test]
        fn distinct_lattice_points_stay_a_unit_apart(basis in arb_basis(), a in (-50i64..50, -50i64..50), b in (-50i64..50, -50i64..50)) {
            prop_assume!(a != b);
            let p = LatticePoint::new(basis, a.0, a.1).unwrap().to_point();
            let q = LatticePoint::new(basis, b.0, b.1).unwrap().to_point();
            prop_assert!(p.distance(q) >= basis.min_spacing() - 1e-12);
        }
    }
}
