//! Discrete and lattice-discretized locally compact groups with right Haar
//! measure.
//!
//! Elements are integer coordinate tuples and every group law is exact
//! integer arithmetic. Lattice kinds attach a real scale to each coordinate:
//!
//! | kind                   | law                          | coordinate scales | cell mass |
//! |------------------------|------------------------------|-------------------|-----------|
//! | `IntLine`              | `x + x'`                     | 1                 | 1         |
//! | `IntLattice(d)`        | componentwise sum            | 1, …, 1           | 1         |
//! | `HeisenbergInt`        | `(x+x', y+y', z+z'+xy')`     | 1, 1, 1           | 1         |
//! | `LatticeLine(h)`       | `x + x'`                     | h                 | h         |
//! | `HeisenbergLattice(h)` | `(x+x', y+y', z+z'+xy')`     | h, h, h²          | h⁴        |
//!
//! The Heisenberg lattice scales `z` by `h²` so that the twist term stays on
//! the lattice: `h²k + h²k' + (hi)(hj') = h²(k + k' + ij')`.

use std::collections::BTreeSet;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar::Scalar;

/// Tolerance used when snapping real coordinates onto a lattice.
const SNAP_TOL: f64 = 1.0e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("element has {got} coordinates but the model needs {expected}")]
    ModelMismatch { expected: usize, got: usize },
    #[error("compact set is empty")]
    EmptySet,
    #[error("coordinate {value} of axis {axis} is not a multiple of the lattice scale {scale}")]
    NotOnLattice { axis: usize, value: f64, scale: f64 },
    #[error("invalid group model: {0}")]
    InvalidModel(String),
}

/// Integer coordinates of a group element, in lattice units.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(SmallVec<[i64; 3]>);

impl GroupElement {
    pub fn new(coords: &[i64]) -> Self {
        Self(SmallVec::from_slice(coords))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl From<&[i64]> for GroupElement {
    fn from(c: &[i64]) -> Self {
        Self::new(c)
    }
}

impl<const N: usize> From<[i64; N]> for GroupElement {
    fn from(c: [i64; N]) -> Self {
        Self::new(&c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupKind {
    IntLine,
    IntLattice { dim: usize },
    HeisenbergInt,
    LatticeLine { h: f64 },
    HeisenbergLattice { h: f64 },
}

/// A group together with its right Haar measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupModel {
    kind: GroupKind,
}

impl GroupModel {
    pub fn new(kind: GroupKind) -> Result<Self, GroupError> {
        match kind {
            GroupKind::IntLattice { dim } if dim == 0 => {
                Err(GroupError::InvalidModel("lattice dimension must be ≥ 1".into()))
            }
            GroupKind::LatticeLine { h } | GroupKind::HeisenbergLattice { h }
                if !(h.is_finite() && h > 0.0) =>
            {
                Err(GroupError::InvalidModel(format!("cell width h = {h} must be > 0")))
            }
            _ => Ok(Self { kind }),
        }
    }

    pub fn int_line() -> Self {
        Self { kind: GroupKind::IntLine }
    }

    pub fn heisenberg_int() -> Self {
        Self { kind: GroupKind::HeisenbergInt }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            GroupKind::IntLine | GroupKind::LatticeLine { .. } => 1,
            GroupKind::IntLattice { dim } => dim,
            GroupKind::HeisenbergInt | GroupKind::HeisenbergLattice { .. } => 3,
        }
    }

    fn is_heisenberg(&self) -> bool {
        matches!(self.kind, GroupKind::HeisenbergInt | GroupKind::HeisenbergLattice { .. })
    }

    /// Haar mass of a single lattice point.
    pub fn cell_mass<S: Scalar>(&self) -> S {
        match self.kind {
            GroupKind::LatticeLine { h } => S::lit(h),
            GroupKind::HeisenbergLattice { h } => S::lit(h * h * h * h),
            _ => S::one(),
        }
    }

    /// Real length of one unit along `axis`.
    pub fn scale(&self, axis: usize) -> f64 {
        match self.kind {
            GroupKind::LatticeLine { h } => h,
            GroupKind::HeisenbergLattice { h } => {
                if axis == 2 {
                    h * h
                } else {
                    h
                }
            }
            _ => 1.0,
        }
    }

    /// Real-valued coordinate `axis` of `g`.
    pub fn real_coord<S: Scalar>(&self, g: &GroupElement, axis: usize) -> S {
        S::lit(g.0[axis] as f64 * self.scale(axis))
    }

    pub fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.dim() == self.dim() {
            Ok(())
        } else {
            Err(GroupError::ModelMismatch { expected: self.dim(), got: g.dim() })
        }
    }

    /// Element from integer lattice units.
    pub fn element(&self, units: &[i64]) -> Result<GroupElement, GroupError> {
        let g = GroupElement::new(units);
        self.check(&g)?;
        Ok(g)
    }

    /// Element from real coordinates, which must lie on the lattice.
    pub fn element_from_real(&self, coords: &[f64]) -> Result<GroupElement, GroupError> {
        if coords.len() != self.dim() {
            return Err(GroupError::ModelMismatch { expected: self.dim(), got: coords.len() });
        }
        let mut units = SmallVec::<[i64; 3]>::new();
        for (axis, &value) in coords.iter().enumerate() {
            let scale = self.scale(axis);
            let q = value / scale;
            let r = q.round();
            if !q.is_finite() || (q - r).abs() > SNAP_TOL * (1.0 + r.abs()) {
                return Err(GroupError::NotOnLattice { axis, value, scale });
            }
            units.push(r as i64);
        }
        Ok(GroupElement(units))
    }

    pub fn real_coords(&self, g: &GroupElement) -> Vec<f64> {
        (0..g.dim()).map(|axis| g.0[axis] as f64 * self.scale(axis)).collect()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(SmallVec::from_elem(0, self.dim()))
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        g.0.iter().all(|&c| c == 0)
    }

    /// Group product `g · h`.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.op(g, h))
    }

    /// Product without the dimension check; callers guarantee both operands
    /// belong to this model.
    pub(crate) fn op(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let mut out: SmallVec<[i64; 3]> = g.0.iter().zip(h.0.iter()).map(|(a, b)| a + b).collect();
        if self.is_heisenberg() {
            out[2] += g.0[0] * h.0[1];
        }
        GroupElement(out)
    }

    /// Group inverse. For the Heisenberg law `(x,y,z)⁻¹ = (−x, −y, xy − z)`.
    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        let mut out: SmallVec<[i64; 3]> = g.0.iter().map(|c| -c).collect();
        if self.is_heisenberg() {
            out[2] = g.0[0] * g.0[1] - g.0[2];
        }
        GroupElement(out)
    }

    /// `a^n` for any signed `n`, by square-and-multiply.
    pub fn power(&self, a: &GroupElement, n: i64) -> GroupElement {
        let base = if n < 0 { self.inv(a) } else { a.clone() };
        let mut exp = n.unsigned_abs();
        let mut acc = self.identity();
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.op(&acc, &sq);
            }
            exp >>= 1;
            if exp > 0 {
                sq = self.op(&sq, &sq);
            }
        }
        acc
    }

    /// Right Haar measure `λ(K) = |K| · cell mass`.
    pub fn haar<S: Scalar>(&self, k: &CompactSet) -> S {
        S::from_usize(k.len()).unwrap() * self.cell_mass::<S>()
    }

    /// Least `M ≤ n_max` such that `K ∩ K a^{±n} = ∅` for every `M < n ≤ n_max`.
    pub fn aperiodicity_bound(
        &self,
        a: &GroupElement,
        k: &CompactSet,
        n_max: u64,
    ) -> Result<Aperiodicity, GroupError> {
        self.check(a)?;
        if k.is_empty() {
            return Err(GroupError::EmptySet);
        }
        if self.is_identity(a) {
            return Ok(Aperiodicity::Periodic { order: 1 });
        }
        let a_inv = self.inv(a);
        let mut fwd = a.clone();
        let mut bwd = a_inv.clone();
        let mut last_hit = 0u64;
        for n in 1..=n_max.max(1) {
            if self.is_identity(&fwd) {
                return Ok(Aperiodicity::Periodic { order: n });
            }
            let hit = k.iter().any(|x| k.contains(&self.op(x, &fwd)) || k.contains(&self.op(x, &bwd)));
            if hit {
                last_hit = n;
            }
            fwd = self.op(&fwd, a);
            bwd = self.op(&bwd, &a_inv);
        }
        if last_hit >= n_max.max(1) {
            Ok(Aperiodicity::NotAperiodicWithinBound)
        } else {
            Ok(Aperiodicity::Bound(last_hit))
        }
    }
}

/// Outcome of the finite aperiodicity certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aperiodicity {
    /// `K ∩ K a^{±n} = ∅` for all `M < n ≤ n_max`.
    Bound(u64),
    /// Translates still meet `K` at `n_max`.
    NotAperiodicWithinBound,
    /// `a^order = e`.
    Periodic { order: u64 },
}

/// Finite set of group elements standing in for a compact set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompactSet {
    points: BTreeSet<GroupElement>,
}

impl CompactSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(
        model: &GroupModel,
        points: impl IntoIterator<Item = GroupElement>,
    ) -> Result<Self, GroupError> {
        let mut set = BTreeSet::new();
        for p in points {
            model.check(&p)?;
            set.insert(p);
        }
        Ok(Self { points: set })
    }

    /// All lattice points whose unit coordinates lie in `[lo, hi]` componentwise.
    pub fn box_units(model: &GroupModel, lo: &[i64], hi: &[i64]) -> Result<Self, GroupError> {
        let d = model.dim();
        for v in [lo, hi] {
            if v.len() != d {
                return Err(GroupError::ModelMismatch { expected: d, got: v.len() });
            }
        }
        let mut points = BTreeSet::new();
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return Ok(Self { points });
        }
        let mut cur: Vec<i64> = lo.to_vec();
        'outer: loop {
            points.insert(GroupElement::new(&cur));
            for axis in (0..d).rev() {
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    continue 'outer;
                }
                cur[axis] = lo[axis];
            }
            break;
        }
        Ok(Self { points })
    }

    /// All lattice points whose real coordinates lie in the closed box `[lo, hi]`.
    pub fn box_real(model: &GroupModel, lo: &[f64], hi: &[f64]) -> Result<Self, GroupError> {
        let d = model.dim();
        for v in [lo, hi] {
            if v.len() != d {
                return Err(GroupError::ModelMismatch { expected: d, got: v.len() });
            }
        }
        let to_units = |v: &[f64], up: bool| -> Vec<i64> {
            v.iter()
                .enumerate()
                .map(|(axis, &x)| {
                    let q = x / model.scale(axis);
                    let slack = SNAP_TOL * (1.0 + q.abs());
                    if up {
                        (q - slack).ceil() as i64
                    } else {
                        (q + slack).floor() as i64
                    }
                })
                .collect()
        };
        Self::box_units(model, &to_units(lo, true), &to_units(hi, false))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.points.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> + '_ {
        self.points.iter()
    }

    pub fn insert(&mut self, g: GroupElement) -> bool {
        self.points.insert(g)
    }

    pub fn is_subset(&self, other: &CompactSet) -> bool {
        self.points.is_subset(&other.points)
    }

    pub fn difference(&self, other: &CompactSet) -> CompactSet {
        Self { points: self.points.difference(&other.points).cloned().collect() }
    }

    /// `K · a`.
    pub fn translate_right(&self, model: &GroupModel, a: &GroupElement) -> CompactSet {
        Self { points: self.points.iter().map(|x| model.op(x, a)).collect() }
    }

    pub fn intersects(&self, other: &CompactSet) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.points.iter().any(|p| large.contains(p))
    }
}

impl FromIterator<GroupElement> for CompactSet {
    fn from_iter<T: IntoIterator<Item = GroupElement>>(iter: T) -> Self {
        Self { points: iter.into_iter().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(x: i64) -> GroupElement {
        GroupElement::new(&[x])
    }

    fn h3(x: i64, y: i64, zz: i64) -> GroupElement {
        GroupElement::new(&[x, y, zz])
    }

    #[test]
    fn heisenberg_product_and_inverse() {
        let g = GroupModel::heisenberg_int();
        assert_eq!(g.mul(&h3(1, 2, 3), &h3(4, 5, 6)).unwrap(), h3(5, 7, 14));
        assert_eq!(g.inv(&h3(1, 0, 2)), h3(-1, 0, -2));
        assert_eq!(g.inv(&g.identity()), g.identity());
        let x = h3(3, -2, 7);
        assert_eq!(g.op(&x, &g.inv(&x)), g.identity());
        assert_eq!(g.op(&g.inv(&x), &x), g.identity());
    }

    #[test]
    fn int_line_law() {
        let g = GroupModel::int_line();
        assert_eq!(g.mul(&z(3), &z(5)).unwrap(), z(8));
        assert_eq!(g.inv(&z(7)), z(-7));
        assert_eq!(g.mul(&z(4), &g.identity()).unwrap(), z(4));
    }

    #[test]
    fn model_mismatch() {
        let g = GroupModel::heisenberg_int();
        assert_eq!(
            g.mul(&z(1), &h3(0, 0, 0)),
            Err(GroupError::ModelMismatch { expected: 3, got: 1 })
        );
    }

    #[test]
    fn powers() {
        let g = GroupModel::heisenberg_int();
        let a = h3(1, 0, 2);
        assert_eq!(g.power(&a, 2), h3(2, 0, 4));
        assert_eq!(g.power(&a, -1), h3(-1, 0, -2));
        assert_eq!(g.power(&a, 0), g.identity());
        // twisted element: compare with repeated multiplication
        let b = h3(2, -3, 5);
        let mut acc = g.identity();
        for n in 0..12i64 {
            assert_eq!(g.power(&b, n), acc);
            assert_eq!(g.power(&b, -n), g.inv(&acc));
            acc = g.op(&acc, &b);
        }
    }

    #[test]
    fn haar_examples() {
        let line = GroupModel::int_line();
        let k = CompactSet::box_units(&line, &[-3], &[3]).unwrap();
        assert_eq!(line.haar::<f64>(&k), 7.0);
        let lat = GroupModel::new(GroupKind::LatticeLine { h: 0.5 }).unwrap();
        let k = CompactSet::box_units(&lat, &[0], &[3]).unwrap();
        assert_eq!(lat.haar::<f64>(&k), 2.0);
        assert_eq!(line.haar::<f64>(&CompactSet::new()), 0.0);
    }

    #[test]
    fn lattice_coordinates() {
        let hl = GroupModel::new(GroupKind::HeisenbergLattice { h: 0.5 }).unwrap();
        let a = hl.element_from_real(&[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(a, h3(2, 0, 8));
        assert_eq!(hl.real_coords(&a), vec![1.0, 0.0, 2.0]);
        assert_eq!(hl.cell_mass::<f64>(), 0.0625);
        assert!(matches!(
            hl.element_from_real(&[0.3, 0.0, 0.0]),
            Err(GroupError::NotOnLattice { axis: 0, .. })
        ));
        // product in real coordinates matches the continuous law
        let g = hl.element_from_real(&[0.5, 1.5, -0.25]).unwrap();
        let h = hl.element_from_real(&[1.0, 2.0, 0.75]).unwrap();
        let p = hl.real_coords(&hl.op(&g, &h));
        assert_eq!(p, vec![1.5, 3.5, -0.25 + 0.75 + 0.5 * 2.0]);
        assert!(GroupModel::new(GroupKind::LatticeLine { h: 0.0 }).is_err());
        assert!(GroupModel::new(GroupKind::IntLattice { dim: 0 }).is_err());
    }

    #[test]
    fn box_real_on_lattice() {
        let lat = GroupModel::new(GroupKind::LatticeLine { h: 0.5 }).unwrap();
        let k = CompactSet::box_real(&lat, &[-1.0], &[1.0]).unwrap();
        assert_eq!(k.len(), 5);
        let hz = GroupModel::heisenberg_int();
        let k = CompactSet::box_real(&hz, &[-3.0; 3], &[3.0; 3]).unwrap();
        assert_eq!(k.len(), 343);
    }

    #[test]
    fn aperiodicity_examples() {
        let line = GroupModel::int_line();
        let k = CompactSet::box_units(&line, &[-3], &[3]).unwrap();
        assert_eq!(line.aperiodicity_bound(&z(1), &k, 100).unwrap(), Aperiodicity::Bound(6));
        assert_eq!(
            line.aperiodicity_bound(&z(0), &k, 100).unwrap(),
            Aperiodicity::Periodic { order: 1 }
        );
        assert_eq!(
            line.aperiodicity_bound(&z(1), &k, 6).unwrap(),
            Aperiodicity::NotAperiodicWithinBound
        );
        let hz = GroupModel::heisenberg_int();
        let kb = CompactSet::box_units(&hz, &[-3; 3], &[3; 3]).unwrap();
        assert_eq!(hz.aperiodicity_bound(&h3(1, 0, 2), &kb, 100).unwrap(), Aperiodicity::Bound(3));
        assert_eq!(
            line.aperiodicity_bound(&z(1), &CompactSet::new(), 10),
            Err(GroupError::EmptySet)
        );
    }

    #[test]
    fn aperiodicity_matches_set_intersection_oracle() {
        let hz = GroupModel::heisenberg_int();
        let kb = CompactSet::box_units(&hz, &[-2, -1, -3], &[2, 1, 3]).unwrap();
        for a in [h3(1, 0, 2), h3(0, 1, 0), h3(0, 0, 1), h3(1, 1, -1)] {
            let Aperiodicity::Bound(m) = hz.aperiodicity_bound(&a, &kb, 60).unwrap() else {
                panic!("expected a bound for {a:?}");
            };
            for n in (m + 1)..=60 {
                let plus = kb.translate_right(&hz, &hz.power(&a, n as i64));
                let minus = kb.translate_right(&hz, &hz.power(&a, -(n as i64)));
                assert!(!kb.intersects(&plus) && !kb.intersects(&minus), "a={a:?} n={n}");
            }
            if m > 0 {
                let at = kb.translate_right(&hz, &hz.power(&a, m as i64));
                let at_inv = kb.translate_right(&hz, &hz.power(&a, -(m as i64)));
                assert!(kb.intersects(&at) || kb.intersects(&at_inv));
            }
        }
    }
}
