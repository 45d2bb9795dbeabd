//! Finitely supported vectors and functionals over a coordinate window.
//!
//! All computation happens inside a finite [`Window`] of sequence indices;
//! coordinates outside it are zero.

mod norm;

pub use norm::{
    dual_norm_eval, norm_eval, norm_metric_rho, predual_norm_from_dual_ball, DualBallDescription,
    NormSpec,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lp::LinExpr;
use crate::rational::Rat;

/// A non-empty sorted set of coordinate indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Window(Arc<[usize]>);

impl Window {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Window> {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        if set.is_empty() {
            return Err(Error::EmptyWindow);
        }
        Ok(Window(set.into_iter().collect()))
    }

    /// Indices `lo..=hi`.
    pub fn range(lo: usize, hi: usize) -> Window {
        Window::new(lo..=hi).expect("lo <= hi")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    /// The window extended by one trailing slot for the real factor of a
    /// product space `X x R`.
    pub fn with_scalar_slot(&self) -> Window {
        let mut v = self.0.to_vec();
        v.push(self.last() + 1);
        Window(v.into())
    }

    /// Drops the last index (inverse of [`Window::with_scalar_slot`]).
    pub fn without_last(&self) -> Result<Window> {
        Window::new(self.0[..self.0.len() - 1].iter().copied())
    }
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.0;
        let contiguous = v.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous && v.len() > 3 {
            write!(f, "Window[{}..={}]", v[0], v[v.len() - 1])
        } else {
            write!(f, "Window{:?}", &v[..])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Primal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dual;

/// Sparse exact coordinates in a window. Only non-zero entries are stored.
pub struct Coords<K> {
    window: Window,
    entries: BTreeMap<usize, Rat>,
    _kind: PhantomData<K>,
}

impl<K> Clone for Coords<K> {
    fn clone(&self) -> Self {
        self.recast()
    }
}

impl<K> PartialEq for Coords<K> {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window && self.entries == other.entries
    }
}

impl<K> Eq for Coords<K> {}

impl<K> std::hash::Hash for Coords<K> {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.window.hash(state);
        self.entries.hash(state);
    }
}

/// A point of the sequence space.
pub type Vector = Coords<Primal>;
/// A continuous linear functional, paired with vectors coordinate-wise.
pub type Functional = Coords<Dual>;

impl<K> Coords<K> {
    pub fn zero(window: &Window) -> Self {
        Coords {
            window: window.clone(),
            entries: BTreeMap::new(),
            _kind: PhantomData,
        }
    }

    pub fn from_entries(window: &Window, entries: impl IntoIterator<Item = (usize, Rat)>) -> Result<Self> {
        let mut out = Coords::zero(window);
        for (i, v) in entries {
            out.try_set(i, v)?;
        }
        Ok(out)
    }

    /// Convenience constructor from integer fractions `(index, num, den)`.
    pub fn from_fracs(window: &Window, entries: &[(usize, i64, i64)]) -> Result<Self> {
        Coords::from_entries(window, entries.iter().map(|&(i, n, d)| (i, Rat::new(n, d))))
    }

    /// The coordinate unit vector (or functional) at `i`.
    pub fn unit(window: &Window, i: usize) -> Result<Self> {
        Coords::from_entries(window, [(i, Rat::one())])
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn get(&self, i: usize) -> Rat {
        self.entries.get(&i).cloned().unwrap_or_default()
    }

    pub fn try_set(&mut self, i: usize, v: Rat) -> Result<()> {
        if !self.window.contains(i) {
            return Err(Error::IndexOutsideWindow(i));
        }
        if v.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, v);
        }
        Ok(())
    }

    /// Non-zero entries in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.entries.iter().map(|(i, v)| (*i, v))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn same_window<L>(&self, other: &Coords<L>) -> Result<()> {
        if self.window == other.window {
            Ok(())
        } else {
            Err(Error::WindowMismatch)
        }
    }

    /// The same entries viewed in another window.
    pub fn in_window(&self, window: &Window) -> Result<Self> {
        Coords::from_entries(window, self.entries.iter().map(|(i, v)| (*i, v.clone())))
    }

    pub fn scale(&self, k: &Rat) -> Self {
        let mut out = Coords::zero(&self.window);
        if !k.is_zero() {
            for (i, v) in &self.entries {
                out.entries.insert(*i, v * k);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&Rat::from_int(-1))
    }

    fn combine(&self, other: &Self, k: &Rat) -> Result<Self> {
        self.same_window(other)?;
        let mut out = self.clone();
        for (i, v) in &other.entries {
            let s = out.get(*i) + v * k;
            out.try_set(*i, s)?;
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, &Rat::one())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, &Rat::from_int(-1))
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &Self, k: &Rat) -> Result<Self> {
        self.combine(other, k)
    }

    /// Coordinate-wise dot product; indices are matched by value.
    pub fn dot<L>(&self, other: &Coords<L>) -> Rat {
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (&self.entries, &other.entries)
        } else {
            (&other.entries, &self.entries)
        };
        small
            .iter()
            .filter_map(|(i, v)| large.get(i).map(|w| v * w))
            .sum()
    }

    pub fn sum_sq(&self) -> Rat {
        self.entries.values().map(|v| v.square()).sum()
    }

    fn recast<L>(&self) -> Coords<L> {
        Coords {
            window: self.window.clone(),
            entries: self.entries.clone(),
            _kind: PhantomData,
        }
    }
}

impl Vector {
    /// The functional with the same coordinates (Riesz identification).
    pub fn to_functional(&self) -> Functional {
        self.recast()
    }
}

impl Functional {
    /// `<f, x>`.
    pub fn apply(&self, x: &Vector) -> Rat {
        self.dot(x)
    }

    pub fn to_vector(&self) -> Vector {
        self.recast()
    }
}

impl<K> fmt::Debug for Coords<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, (i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{i}: {v}")?;
        }
        f.write_str(")")
    }
}

/// The coordinates a computation actually touches.
///
/// For norms that never grow when coordinates are zeroed ([`NormSpec::is_tail_closed`]),
/// coordinates carrying no data can be dropped from a program without
/// changing its optimum.
#[derive(Debug, Clone)]
pub struct Frame {
    window: Window,
    idx: Vec<usize>,
}

impl Frame {
    pub fn full(window: &Window) -> Frame {
        Frame {
            window: window.clone(),
            idx: window.indices().to_vec(),
        }
    }

    pub fn of(window: &Window, indices: impl IntoIterator<Item = usize>) -> Result<Frame> {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        for &i in &set {
            if !window.contains(i) {
                return Err(Error::IndexOutsideWindow(i));
            }
        }
        Ok(Frame {
            window: window.clone(),
            idx: set.into_iter().collect(),
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.idx.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx
    }

    pub fn pos(&self, i: usize) -> Option<usize> {
        self.idx.binary_search(&i).ok()
    }

    pub fn dense<K>(&self, v: &Coords<K>) -> Vec<Rat> {
        self.idx.iter().map(|&i| v.get(i)).collect()
    }

    pub fn consts<K>(&self, v: &Coords<K>) -> Vec<LinExpr> {
        self.idx.iter().map(|&i| LinExpr::constant(v.get(i))).collect()
    }

    /// `sum_i coeffs_i * xs_i` over the frame, for coordinates matched by index.
    pub fn pair<K>(&self, coeffs: &Coords<K>, xs: &[LinExpr]) -> LinExpr {
        let mut out = LinExpr::zero();
        for (i, c) in coeffs.entries() {
            if let Some(p) = self.pos(i) {
                out.add_scaled(&xs[p], c);
            }
        }
        out
    }

    pub fn coords<K>(&self, values: &[Rat]) -> Coords<K> {
        let mut out = Coords::zero(&self.window);
        for (p, v) in values.iter().enumerate() {
            if !v.is_zero() {
                out.entries.insert(self.idx[p], v.clone());
            }
        }
        out
    }
}
