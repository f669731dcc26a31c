//! Multi-valued functions given as finite unions of affine and
//! conjugate-affine branches.
//!
//! [`MultiFunction`] is the floating-point form. When every coefficient
//! lies on a lattice, [`MultiFunction::to_lattice`] produces an exact
//! [`LatticeMultiFunction`]; [`RationalMultiFunction`] is the exact form on
//! the rational line. All three implement [`MultiMap`], which is what the
//! orbit engines are generic over.

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Basis, DedupPolicy, LatticePoint, OrbitPoint, Point, PointSet, Tag};

const APPLY_CHUNK: usize = 4096;

/// Relative size of the snapping grid used for floating-point orbits.
pub const SNAP_RELATIVE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    /// `z ↦ a·z + b`
    Affine,
    /// `z ↦ a·conj(z) + b`
    ConjugateAffine,
}

/// One single-valued branch of a multi-function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchMap {
    kind: BranchKind,
    a: Complex64,
    b: Complex64,
}

/// Why a branch has no isolated fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedPointFailure {
    /// `a = 1, b ≠ 0`: a pure translation.
    Translation,
    /// `a = 1, b = 0`: every point is fixed.
    Identity,
    /// Conjugate branch with `|a| = 1`: the 2×2 system is singular.
    SingularReflection,
}

impl BranchMap {
    pub fn new(kind: BranchKind, a: Complex64, b: Complex64) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) || a.norm() == 0.0 {
            return Err(Error::NonInvertibleBranch { index: 0 });
        }
        Ok(BranchMap { kind, a, b })
    }

    pub fn affine(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(BranchKind::Affine, a, b)
    }

    pub fn conjugate(a: Complex64, b: Complex64) -> Result<Self> {
        Self::new(BranchKind::ConjugateAffine, a, b)
    }

    pub fn kind(&self) -> BranchKind {
        self.kind
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        match self.kind {
            BranchKind::Affine => self.a * z + self.b,
            BranchKind::ConjugateAffine => self.a * z.conj() + self.b,
        }
    }

    pub fn eval(&self, p: Point) -> Point {
        Point::from_complex(self.eval_complex(p.to_complex()))
    }

    /// The branch of the inverse multi-function.
    pub fn inverse(&self) -> BranchMap {
        match self.kind {
            // w = a z + b  =>  z = w/a − b/a
            BranchKind::Affine => BranchMap {
                kind: self.kind,
                a: self.a.inv(),
                b: -self.b / self.a,
            },
            // w = a z̄ + b  =>  z = conj((w − b)/a) = w̄/ā − b̄/ā
            BranchKind::ConjugateAffine => {
                let abar = self.a.conj();
                BranchMap {
                    kind: self.kind,
                    a: abar.inv(),
                    b: -self.b.conj() / abar,
                }
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.a.norm()
    }

    pub fn fixed_point(&self) -> std::result::Result<Point, FixedPointFailure> {
        match self.kind {
            BranchKind::Affine => {
                let denom = Complex64::one() - self.a;
                if denom.norm() == 0.0 {
                    if self.b.norm() == 0.0 {
                        Err(FixedPointFailure::Identity)
                    } else {
                        Err(FixedPointFailure::Translation)
                    }
                } else {
                    Ok(Point::from_complex(self.b / denom))
                }
            }
            BranchKind::ConjugateAffine => {
                // p = a·conj(p) + b with p = (u, v):
                // [1 − a1, −a2; −a2, 1 + a1] (u, v)ᵀ = (b1, b2)ᵀ
                let (a1, a2) = (self.a.re, self.a.im);
                let det = 1.0 - a1 * a1 - a2 * a2;
                if det.abs() <= 1e-14 {
                    return Err(FixedPointFailure::SingularReflection);
                }
                let (b1, b2) = (self.b.re, self.b.im);
                let u = ((1.0 + a1) * b1 + a2 * b2) / det;
                let v = (a2 * b1 + (1.0 - a1) * b2) / det;
                Ok(Point::new(u, v))
            }
        }
    }

    pub fn approx_eq(&self, other: &BranchMap, tol: f64) -> bool {
        self.kind == other.kind && (self.a - other.a).norm() <= tol && (self.b - other.b).norm() <= tol
    }
}

/// Operations shared by every representation of a finite-valued
/// multi-function.
pub trait MultiMap: Sync {
    type Point: OrbitPoint;

    fn branch_count(&self) -> usize;

    fn branch_image(&self, branch: usize, p: &Self::Point) -> Result<Self::Point>;

    /// Upper bound on `Lip(Φ)`: the largest branch constant.
    fn lipschitz(&self) -> f64;

    /// `Fix[Φ]`, one distinct tag per distinct fixed point.
    fn fixed_points(&self) -> Result<PointSet<Self::Point>>;

    fn dedup_policy(&self) -> DedupPolicy;

    /// The floating-point form of the same multi-function.
    fn float_form(&self) -> MultiFunction;

    /// `Φ(A) = ⋃_{x ∈ A} Φ(x)`. Each image inherits its preimage's tag.
    fn apply(&self, set: &PointSet<Self::Point>) -> Result<PointSet<Self::Point>> {
        let branches = self.branch_count();
        let chunks: Vec<Vec<(Self::Point, Tag)>> = set
            .points()
            .par_chunks(APPLY_CHUNK)
            .zip(set.tags().par_chunks(APPLY_CHUNK))
            .map(|(points, tags)| {
                let mut out = Vec::with_capacity(points.len() * branches);
                for (p, &t) in points.iter().zip(tags) {
                    for b in 0..branches {
                        out.push((self.branch_image(b, p)?, t));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let total = chunks.iter().map(Vec::len).sum();
        let mut image = PointSet::with_capacity(self.dedup_policy(), total);
        for chunk in chunks {
            for (p, t) in chunk {
                image.insert(p, t);
            }
        }
        Ok(image)
    }

    /// `Φ(x)` for a single point.
    fn image_of(&self, p: &Self::Point) -> Result<Vec<Self::Point>> {
        (0..self.branch_count()).map(|b| self.branch_image(b, p)).collect()
    }
}

/// `Φⁿ(seed)` by repeated application, refusing any step whose candidate
/// count `|branches|·|Φᵏ(seed)|` exceeds `budget`.
pub fn orbit<M: MultiMap>(map: &M, seed: &PointSet<M::Point>, n: usize, budget: usize) -> Result<PointSet<M::Point>> {
    let mut current = seed.clone();
    for step in 0..n {
        let needed = current.len().saturating_mul(map.branch_count());
        if needed > budget {
            return Err(Error::Budget {
                budget,
                depth: step + 1,
                needed,
            });
        }
        current = map.apply(&current)?;
    }
    Ok(current)
}

fn tag_fixed_points<P: OrbitPoint>(policy: DedupPolicy, points: Vec<P>) -> PointSet<P> {
    let mut set = PointSet::new(policy);
    let mut next = 0u32;
    for p in points {
        if set.insert(p, Tag(next)) {
            next += 1;
        }
    }
    set
}

/// A multi-function with floating-point coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiFunction {
    branches: Vec<BranchMap>,
    lattice: Option<Basis>,
}

impl MultiFunction {
    pub fn new(branches: Vec<BranchMap>, lattice: Option<Basis>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::NoBranches);
        }
        Ok(MultiFunction { branches, lattice })
    }

    /// `z ↦ scale·z − shift·c` for every `c ∈ centers`.
    pub fn homothety_family(scale: f64, shift: f64, centers: &[Point], lattice: Option<Basis>) -> Result<Self> {
        let branches = centers
            .iter()
            .map(|c| BranchMap::affine(Complex64::new(scale, 0.0), -shift * c.to_complex()))
            .collect::<Result<Vec<_>>>()?;
        MultiFunction::new(branches, lattice)
    }

    pub fn branches(&self) -> &[BranchMap] {
        &self.branches
    }

    pub fn lattice(&self) -> Option<Basis> {
        self.lattice
    }

    /// Branch-wise inverse. The lattice hint is dropped: inverses of
    /// expanding lattice maps do not preserve the lattice.
    pub fn inverse(&self) -> MultiFunction {
        MultiFunction {
            branches: self.branches.iter().map(BranchMap::inverse).collect(),
            lattice: None,
        }
    }

    /// Equal branch sets up to reordering, coefficients within `tol`.
    pub fn same_branches(&self, other: &MultiFunction, tol: f64) -> bool {
        self.branches.len() == other.branches.len()
            && self
                .branches
                .iter()
                .all(|b| other.branches.iter().any(|o| b.approx_eq(o, tol)))
            && other
                .branches
                .iter()
                .all(|b| self.branches.iter().any(|o| b.approx_eq(o, tol)))
    }

    /// Per-branch fixed points, in branch order.
    pub fn branch_fixed_points(&self) -> Vec<std::result::Result<Point, FixedPointFailure>> {
        self.branches.iter().map(BranchMap::fixed_point).collect()
    }

    /// Coordinate scale of the scene, used to size the snapping grid.
    pub fn scene_scale(&self) -> f64 {
        let fixed = self
            .branch_fixed_points()
            .into_iter()
            .flatten()
            .map(Point::norm)
            .fold(0.0, f64::max);
        let offsets = self.branches.iter().map(|b| b.b.norm()).fold(0.0, f64::max);
        fixed.max(offsets).max(1.0)
    }

    pub fn to_lattice(&self) -> Result<LatticeMultiFunction> {
        let basis = self
            .lattice
            .ok_or_else(|| Error::NotLatticePreserving("(none)".into(), "no lattice hint".into()))?;
        LatticeMultiFunction::from_float(self, basis)
    }

    pub fn to_config(&self) -> MultiFunctionConfig {
        MultiFunctionConfig {
            branches: self
                .branches
                .iter()
                .map(|b| BranchConfig {
                    kind: b.kind,
                    a: [b.a.re, b.a.im],
                    b: [b.b.re, b.b.im],
                })
                .collect(),
            lattice: self.lattice,
        }
    }

    pub fn from_config(config: &MultiFunctionConfig) -> Result<Self> {
        let branches = config
            .branches
            .iter()
            .enumerate()
            .map(|(index, b)| {
                BranchMap::new(b.kind, Complex64::new(b.a[0], b.a[1]), Complex64::new(b.b[0], b.b[1]))
                    .map_err(|_| Error::NonInvertibleBranch { index })
            })
            .collect::<Result<Vec<_>>>()?;
        let map = MultiFunction::new(branches, config.lattice)?;
        if map.lattice.is_some() {
            // reject hints that do not hold
            map.to_lattice()?;
        }
        Ok(map)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: MultiFunctionConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_config(&config)
    }
}

impl MultiMap for MultiFunction {
    type Point = Point;

    fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn branch_image(&self, branch: usize, p: &Point) -> Result<Point> {
        Ok(self.branches[branch].eval(*p))
    }

    fn lipschitz(&self) -> f64 {
        self.branches.iter().map(BranchMap::lipschitz).fold(0.0, f64::max)
    }

    fn fixed_points(&self) -> Result<PointSet<Point>> {
        let mut found = Vec::new();
        let mut failures = Vec::new();
        for (i, r) in self.branch_fixed_points().into_iter().enumerate() {
            match r {
                Ok(p) => found.push(p),
                Err(f) => failures.push(format!("branch {i}: {f:?}")),
            }
        }
        if found.is_empty() {
            return Err(Error::NoFixedPoints(failures.join(", ")));
        }
        Ok(tag_fixed_points(self.dedup_policy(), found))
    }

    fn dedup_policy(&self) -> DedupPolicy {
        DedupPolicy::Snap(SNAP_RELATIVE * self.scene_scale())
    }

    fn float_form(&self) -> MultiFunction {
        self.clone()
    }
}

/// One branch with exact lattice coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeBranch {
    pub conjugate: bool,
    pub a: LatticePoint,
    pub b: LatticePoint,
}

impl LatticeBranch {
    pub fn eval(&self, p: &LatticePoint) -> Result<LatticePoint> {
        let z = if self.conjugate { p.checked_conj()? } else { *p };
        self.a.checked_mul(&z)?.checked_add(&self.b)
    }
}

/// Exact form of a lattice-preserving multi-function.
#[derive(Clone, Debug)]
pub struct LatticeMultiFunction {
    basis: Basis,
    branches: Vec<LatticeBranch>,
    source: MultiFunction,
}

const LATTICE_TOL: f64 = 1e-9;

impl LatticeMultiFunction {
    pub fn from_float(map: &MultiFunction, basis: Basis) -> Result<Self> {
        let lift = |z: Complex64, what: &str, i: usize| {
            LatticePoint::from_point(basis, Point::from_complex(z), LATTICE_TOL).ok_or_else(|| {
                Error::NotLatticePreserving(basis.name().into(), format!("coefficient {what} = {z} of branch {i}"))
            })
        };
        let branches = map
            .branches
            .iter()
            .enumerate()
            .map(|(i, br)| {
                Ok(LatticeBranch {
                    conjugate: br.kind == BranchKind::ConjugateAffine,
                    a: lift(br.a, "a", i)?,
                    b: lift(br.b, "b", i)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let lattice = LatticeMultiFunction {
            basis,
            branches,
            source: MultiFunction {
                branches: map.branches.clone(),
                lattice: Some(basis),
            },
        };
        // the orbit starts at Fix[Φ], so those need to be lattice points too
        lattice.fixed_points()?;
        Ok(lattice)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn branches(&self) -> &[LatticeBranch] {
        &self.branches
    }
}

impl MultiMap for LatticeMultiFunction {
    type Point = LatticePoint;

    fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn branch_image(&self, branch: usize, p: &LatticePoint) -> Result<LatticePoint> {
        self.branches[branch].eval(p)
    }

    fn lipschitz(&self) -> f64 {
        self.source.lipschitz()
    }

    fn fixed_points(&self) -> Result<PointSet<LatticePoint>> {
        let mut found = Vec::new();
        for (i, r) in self.source.branch_fixed_points().into_iter().enumerate() {
            let Ok(p) = r else { continue };
            let q = LatticePoint::from_point(self.basis, p, LATTICE_TOL).ok_or_else(|| {
                Error::NotLatticePreserving(self.basis.name().into(), format!("fixed point {p} of branch {i}"))
            })?;
            if self.branches[i].eval(&q)? != q {
                return Err(Error::NotLatticePreserving(
                    self.basis.name().into(),
                    format!("fixed point {p} of branch {i} is not exact"),
                ));
            }
            found.push(q);
        }
        if found.is_empty() {
            return Err(Error::NoFixedPoints("no branch has a lattice fixed point".into()));
        }
        Ok(tag_fixed_points(DedupPolicy::Exact, found))
    }

    fn dedup_policy(&self) -> DedupPolicy {
        DedupPolicy::Exact
    }

    fn float_form(&self) -> MultiFunction {
        self.source.clone()
    }
}

pub type Rational = Ratio<i128>;

/// Exact affine multi-function on the rational line, `x ↦ a·x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMultiFunction {
    branches: Vec<(Rational, Rational)>,
}

impl RationalMultiFunction {
    pub fn new(branches: Vec<(Rational, Rational)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::NoBranches);
        }
        if let Some(index) = branches.iter().position(|(a, _)| a.is_zero()) {
            return Err(Error::NonInvertibleBranch { index });
        }
        Ok(RationalMultiFunction { branches })
    }

    pub fn branches(&self) -> &[(Rational, Rational)] {
        &self.branches
    }

    pub fn inverse(&self) -> RationalMultiFunction {
        RationalMultiFunction {
            branches: self.branches.iter().map(|(a, b)| (a.recip(), -*b / *a)).collect(),
        }
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl MultiMap for RationalMultiFunction {
    type Point = Rational;

    fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn branch_image(&self, branch: usize, x: &Rational) -> Result<Rational> {
        let (a, b) = &self.branches[branch];
        a.checked_mul(x)
            .and_then(|ax| ax.checked_add(b))
            .ok_or(Error::LatticeOverflow)
    }

    fn lipschitz(&self) -> f64 {
        self.branches
            .iter()
            .map(|(a, _)| ratio_to_f64(a).abs())
            .fold(0.0, f64::max)
    }

    fn fixed_points(&self) -> Result<PointSet<Rational>> {
        let found: Vec<Rational> = self
            .branches
            .iter()
            .filter(|(a, _)| !a.is_one())
            .map(|(a, b)| *b / (Rational::one() - *a))
            .collect();
        if found.is_empty() {
            return Err(Error::NoFixedPoints("every branch is a translation".into()));
        }
        Ok(tag_fixed_points(DedupPolicy::Exact, found))
    }

    fn dedup_policy(&self) -> DedupPolicy {
        DedupPolicy::Exact
    }

    fn float_form(&self) -> MultiFunction {
        let branches = self
            .branches
            .iter()
            .map(|(a, b)| BranchMap {
                kind: BranchKind::Affine,
                a: Complex64::new(ratio_to_f64(a), 0.0),
                b: Complex64::new(ratio_to_f64(b), 0.0),
            })
            .collect();
        MultiFunction {
            branches,
            lattice: None,
        }
    }
}

/// JSON form of one branch: `{"kind": "affine", "a": [re, im], "b": [re, im]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub kind: BranchKind,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

/// JSON form of a multi-function, as read by the CLI's `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiFunctionConfig {
    pub branches: Vec<BranchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Basis>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cantor() -> MultiFunction {
        MultiFunction::homothety_family(3.0, 1.0, &[Point::real(0.0), Point::real(2.0)], Some(Basis::Integer)).unwrap()
    }

    fn cross_points() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, -1.0),
        ]
    }

    fn cross() -> MultiFunction {
        MultiFunction::homothety_family(3.0, 2.0, &cross_points(), Some(Basis::Gaussian)).unwrap()
    }

    fn koch() -> MultiFunction {
        let s3 = 3f64.sqrt();
        let a1 = Complex64::from_polar(s3, -std::f64::consts::FRAC_PI_3);
        let a2 = Complex64::from_polar(s3, std::f64::consts::FRAC_PI_3);
        MultiFunction::new(
            vec![
                BranchMap::conjugate(a1, c(3.0, 0.0) - a1 * 3.0).unwrap(),
                BranchMap::conjugate(a2, c(-3.0, 0.0) + a2 * 3.0).unwrap(),
            ],
            None,
        )
        .unwrap()
    }

    fn sorted_x(set: &PointSet<Point>) -> Vec<f64> {
        let mut v: Vec<f64> = set.points().iter().map(|p| p.x).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn apply_cantor_at_zero() {
        let map = cantor();
        let a = PointSet::from_points(map.dedup_policy(), [Point::real(0.0)]);
        assert_eq!(sorted_x(&map.apply(&a).unwrap()), vec![-2.0, 0.0]);
    }

    #[test]
    fn apply_identity_is_identity() {
        let id = MultiFunction::new(vec![BranchMap::affine(c(1.0, 0.0), c(0.0, 0.0)).unwrap()], None).unwrap();
        let a = PointSet::from_points(id.dedup_policy(), [Point::new(1.0, 2.0), Point::new(-3.0, 0.5)]);
        assert!(id.apply(&a).unwrap().same_points(&a));
    }

    #[test]
    fn apply_cross_at_zero() {
        let map = cross();
        let a = PointSet::from_points(map.dedup_policy(), [Point::ORIGIN]);
        let img = map.apply(&a).unwrap();
        let expected = PointSet::from_points(
            map.dedup_policy(),
            [
                Point::new(0.0, 0.0),
                Point::new(-2.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(0.0, -2.0),
                Point::new(0.0, 2.0),
            ],
        );
        assert!(img.same_points(&expected));
    }

    #[test]
    fn inverse_examples() {
        let inv = cantor().inverse();
        let expected = MultiFunction::new(
            vec![
                BranchMap::affine(c(1.0 / 3.0, 0.0), c(0.0, 0.0)).unwrap(),
                BranchMap::affine(c(1.0 / 3.0, 0.0), c(2.0 / 3.0, 0.0)).unwrap(),
            ],
            None,
        )
        .unwrap();
        assert!(inv.same_branches(&expected, 1e-15));

        let cross_inv = cross().inverse();
        let expected = MultiFunction::homothety_family(1.0 / 3.0, -2.0 / 3.0, &cross_points(), None).unwrap();
        assert!(cross_inv.same_branches(&expected, 1e-15));

        let id = BranchMap::affine(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(id.inverse(), id);
    }

    #[test]
    fn koch_inverse_matches_closed_form() {
        // Φ⁻¹: z ↦ 3 + e^{−iπ/3}(z̄ − 3)/√3 and −3 + e^{iπ/3}(z̄ + 3)/√3
        let s3 = 3f64.sqrt();
        let a1 = Complex64::from_polar(1.0 / s3, -std::f64::consts::FRAC_PI_3);
        let a2 = Complex64::from_polar(1.0 / s3, std::f64::consts::FRAC_PI_3);
        let expected = MultiFunction::new(
            vec![
                BranchMap::conjugate(a1, c(3.0, 0.0) - a1 * 3.0).unwrap(),
                BranchMap::conjugate(a2, c(-3.0, 0.0) + a2 * 3.0).unwrap(),
            ],
            None,
        )
        .unwrap();
        assert!(koch().inverse().same_branches(&expected, 1e-14));
        assert!((koch().inverse().lipschitz() - 1.0 / s3).abs() < 1e-15);
    }

    #[test]
    fn non_invertible_branch_is_rejected() {
        assert!(BranchMap::affine(c(0.0, 0.0), c(1.0, 0.0)).is_err());
        let config = MultiFunctionConfig {
            branches: vec![
                BranchConfig {
                    kind: BranchKind::Affine,
                    a: [2.0, 0.0],
                    b: [0.0, 0.0],
                },
                BranchConfig {
                    kind: BranchKind::Affine,
                    a: [0.0, 0.0],
                    b: [1.0, 0.0],
                },
            ],
            lattice: None,
        };
        assert!(matches!(
            MultiFunction::from_config(&config),
            Err(Error::NonInvertibleBranch { index: 1 })
        ));
    }

    #[test]
    fn fixed_point_examples() {
        let fix = cross().fixed_points().unwrap();
        let expected = PointSet::from_points(cross().dedup_policy(), cross_points());
        assert!(fix.same_points(&expected));
        assert_eq!(fix.distinct_tags().len(), 5);

        assert_eq!(sorted_x(&cantor().fixed_points().unwrap()), vec![0.0, 1.0]);

        let koch_fix = koch().fixed_points().unwrap().to_points();
        assert_eq!(koch_fix.len(), 2);
        assert!(koch_fix[0].distance(Point::real(3.0)) < 1e-12);
        assert!(koch_fix[1].distance(Point::real(-3.0)) < 1e-12);
    }

    #[test]
    fn fixed_point_failures() {
        let shift = BranchMap::affine(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(shift.fixed_point(), Err(FixedPointFailure::Translation));
        let reflect = BranchMap::conjugate(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(reflect.fixed_point(), Err(FixedPointFailure::SingularReflection));
        let only_shift = MultiFunction::new(vec![shift], None).unwrap();
        assert!(matches!(only_shift.fixed_points(), Err(Error::NoFixedPoints(_))));
        // one failing branch does not sink the others
        let mixed =
            MultiFunction::new(vec![shift, BranchMap::affine(c(3.0, 0.0), c(0.0, 0.0)).unwrap()], None).unwrap();
        assert_eq!(mixed.fixed_points().unwrap().len(), 1);
    }

    #[test]
    fn conjugate_fixed_point_solves_the_system() {
        let br = BranchMap::conjugate(c(0.3, -0.4), c(1.5, 2.0)).unwrap();
        let p = br.fixed_point().unwrap();
        assert!(br.eval(p).distance(p) < 1e-14);
    }

    #[test]
    fn lattice_form_agrees_with_float() {
        let map = cross();
        let lat = map.to_lattice().unwrap();
        let fix = lat.fixed_points().unwrap();
        let img = lat.apply(&fix).unwrap();
        let float_img = map.apply(&map.fixed_points().unwrap()).unwrap();
        assert_eq!(img.len(), float_img.len());
        for (p, t) in img.iter() {
            assert_eq!(float_img.tag_of(&p.to_point()), Some(t));
        }
    }

    #[test]
    fn lattice_hint_must_hold() {
        assert!(matches!(
            koch().inverse().to_lattice(),
            Err(Error::NotLatticePreserving(..))
        ));
        let bad = MultiFunction::homothety_family(3.0, 1.0, &[Point::real(1.0)], Some(Basis::Integer)).unwrap();
        // fixed point 1/2 is off the lattice
        assert!(bad.to_lattice().is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{"branches":[{"kind":"affine","a":[3,0],"b":[0,0]},{"kind":"affine","a":[3,0],"b":[-2,0]}],"lattice":"integer"}"#;
        let map = MultiFunction::from_json(text).unwrap();
        assert!(map.same_branches(&cantor(), 0.0));
        assert_eq!(map.lattice(), Some(Basis::Integer));
        let back = serde_json::to_string(&map.to_config()).unwrap();
        assert_eq!(MultiFunction::from_json(&back).unwrap(), map);
        assert!(matches!(
            MultiFunction::from_json("{\"branches\": []}"),
            Err(Error::NoBranches)
        ));
        assert!(matches!(MultiFunction::from_json("{"), Err(Error::Config(_))));
    }

    #[test]
    fn rational_form() {
        let third = Rational::new(1, 3);
        let inv = RationalMultiFunction::new(vec![(third, Rational::zero()), (third, Rational::new(2, 3))]).unwrap();
        let fix = inv.fixed_points().unwrap();
        assert_eq!(fix.sorted_keys(), vec![Rational::zero(), Rational::one()]);
        let back = inv.inverse();
        assert_eq!(
            back.branches(),
            &[
                (Rational::from_integer(3), Rational::zero()),
                (Rational::from_integer(3), Rational::from_integer(-2))
            ]
        );
    }

    fn any_map() -> impl Strategy<Value = MultiFunction> {
        prop_oneof![
            Just(cantor()),
            Just(cross()),
            Just(koch()),
            Just(cross().inverse()),
            Just(koch().inverse())
        ]
    }

    proptest! {
        #[test]
        fn fixed_points_are_fixed(map in any_map()) {
            let fix = map.fixed_points().unwrap();
            for p in fix.points() {
                let single = PointSet::from_points(map.dedup_policy(), [*p]);
                prop_assert!(map.apply(&single).unwrap().contains(p));
            }
            let inv_fix = map.inverse().fixed_points().unwrap();
            prop_assert_eq!(inv_fix.len(), fix.len());
            for p in inv_fix.points() {
                prop_assert!(fix.points().iter().any(|q| q.distance(*p) < 1e-9));
            }
        }

        #[test]
        fn preimage_of_image_contains_point(map in any_map(), x in -5.0..5.0f64, y in -5.0..5.0f64) {
            let p = Point::new(x, y);
            let inv = map.inverse();
            let back: Vec<Point> = map.image_of(&p).unwrap().iter().flat_map(|q| inv.image_of(q).unwrap()).collect();
            prop_assert!(back.iter().any(|q| q.distance(p) < 1e-9));
        }

        #[test]
        fn contraction_inequality(x in (-5.0..5.0f64, -5.0..5.0f64), y in (-5.0..5.0f64, -5.0..5.0f64)) {
            for map in [cross().inverse(), koch().inverse(), cantor().inverse()] {
                let (p, q) = (Point::new(x.0, x.1), Point::new(y.0, y.1));
                let d = crate::geometry::hausdorff(&map.image_of(&p).unwrap(), &map.image_of(&q).unwrap()).finite().unwrap();
                prop_assert!(d <= map.lipschitz() * p.distance(q) + 1e-12);
            }
        }

        #[test]
        fn double_inverse_is_identity(map in any_map()) {
            prop_assert!(map.inverse().inverse().same_branches(&map, 1e-12));
        }
    }
}
