//! Basis symbols, brackets and inner products for ĝl(n) and the superalgebra
//! 𝔞 = 𝔟 ⊕ ψ, plus pyramid combinatorics.

use crate::scalar::Scalar;
use smallvec::{smallvec, SmallVec};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generators from different algebras: {0:?} vs {1:?}")]
    MixedAlgebra(AlgebraTag, AlgebraTag),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("invalid pyramid: {0}")]
    BadPyramid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgebraTag {
    LoopGl(usize),
    FinGl(usize),
    SuperA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    E,
    Psi,
    CTilde,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

/// A basis symbol `E[i,j]t^s`, `Psi[i,j]t^s`, `ctilde` or `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenIndex {
    pub t: i32,
    pub alg: AlgebraTag,
    pub kind: Kind,
    pub i: usize,
    pub j: usize,
}

impl GenIndex {
    pub fn loop_e(n: usize, i: usize, j: usize, t: i32) -> Self {
        GenIndex { t, alg: AlgebraTag::LoopGl(n), kind: Kind::E, i, j }
    }

    pub fn central(n: usize, kind: Kind) -> Self {
        GenIndex { t: 0, alg: AlgebraTag::LoopGl(n), kind, i: 0, j: 0 }
    }

    pub fn super_e(i: usize, j: usize, t: i32) -> Self {
        GenIndex { t, alg: AlgebraTag::SuperA, kind: Kind::E, i, j }
    }

    pub fn psi(i: usize, j: usize, t: i32) -> Self {
        GenIndex { t, alg: AlgebraTag::SuperA, kind: Kind::Psi, i, j }
    }

    pub fn parity(&self) -> Parity {
        if self.kind == Kind::Psi {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(&self) -> bool {
        self.kind == Kind::Psi
    }

    pub fn is_central(&self) -> bool {
        matches!(self.kind, Kind::CTilde | Kind::Z)
    }

    /// Sort key for PBW words: mode first, central symbols last.
    pub fn pbw_key(&self) -> (bool, i32, AlgebraTag, Kind, usize, usize) {
        (self.is_central(), self.t, self.alg, self.kind, self.i, self.j)
    }

    fn with(&self, kind: Kind, i: usize, j: usize, t: i32) -> Self {
        GenIndex { t, alg: self.alg, kind, i, j }
    }
}

impl fmt::Display for GenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::E => write!(f, "E[{},{}]t^{}", self.i, self.j, self.t),
            Kind::Psi => write!(f, "Psi[{},{}]t^{}", self.i, self.j, self.t),
            Kind::CTilde => write!(f, "ctilde"),
            Kind::Z => write!(f, "z"),
        }
    }
}

/// Finite linear combination of basis symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LieElem {
    pub terms: BTreeMap<GenIndex, Scalar>,
}

impl LieElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, g: GenIndex, c: &Scalar) {
        let e = self.terms.entry(g).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: &Scalar) -> Self {
        let mut out = Self::zero();
        for (g, v) in &self.terms {
            out.add_term(*g, &(v * c));
        }
        out
    }

    pub fn add(&self, o: &LieElem) -> Self {
        let mut out = self.clone();
        for (g, v) in &o.terms {
            out.add_term(*g, v);
        }
        out
    }
}

impl fmt::Display for LieElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(g, c)| format!("({c})*{g}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Matrix-unit bracket [E_ij, E_pq] = δ_jp E_iq − δ_iq E_pj as (coeff, row, col).
pub fn gl_bracket(i: usize, j: usize, p: usize, q: usize) -> SmallVec<[(i64, usize, usize); 2]> {
    let mut out: SmallVec<[(i64, usize, usize); 2]> = smallvec![];
    if j == p {
        out.push((1, i, q));
    }
    if i == q {
        if let Some(pos) = out.iter().position(|t| t.1 == p && t.2 == j) {
            out.remove(pos);
        } else {
            out.push((-1, p, j));
        }
    }
    out
}

/// Super-bracket of two basis symbols. For ĝl(n) the central part is
/// u·(δ_iq δ_jp c̃ + δ_ij δ_pq z); odd–odd pairs return zero.
pub fn bracket(x: &GenIndex, y: &GenIndex) -> Result<LieElem, AlgebraError> {
    if x.alg != y.alg {
        return Err(AlgebraError::MixedAlgebra(x.alg, y.alg));
    }
    let mut out = LieElem::zero();
    if x.is_central() || y.is_central() {
        return Ok(out);
    }
    let t = x.t + y.t;
    match (x.kind, y.kind) {
        (Kind::E, Kind::E) => {
            for (c, a, b) in gl_bracket(x.i, x.j, y.i, y.j) {
                out.add_term(x.with(Kind::E, a, b, t), &Scalar::int(c));
            }
            if let AlgebraTag::LoopGl(n) = x.alg {
                if t == 0 && x.t != 0 {
                    let u = Scalar::int(x.t as i64);
                    if x.i == y.j && x.j == y.i {
                        out.add_term(GenIndex::central(n, Kind::CTilde), &u);
                    }
                    if x.i == x.j && y.i == y.j {
                        out.add_term(GenIndex::central(n, Kind::Z), &u);
                    }
                }
            }
        }
        (Kind::E, Kind::Psi) => {
            for (c, a, b) in gl_bracket(x.i, x.j, y.i, y.j) {
                out.add_term(x.with(Kind::Psi, a, b, t), &Scalar::int(c));
            }
        }
        (Kind::Psi, Kind::E) => {
            for (c, a, b) in gl_bracket(y.i, y.j, x.i, x.j) {
                out.add_term(x.with(Kind::Psi, a, b, t), &Scalar::int(-c));
            }
        }
        _ => {}
    }
    Ok(out)
}

/// The partition q₁…q_l with its box geometry. Boxes are numbered 1..=N
/// column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pyramid {
    q: Vec<usize>,
    v: usize,
    top: usize,
    level_shift: i64,
    col: Vec<usize>,
    row: Vec<usize>,
    hat: Vec<Option<usize>>,
    tilde: Vec<Option<usize>>,
}

impl Pyramid {
    pub fn new(q: &[usize], v: usize) -> Result<Self, AlgebraError> {
        Self::build(q, v, None, 0)
    }

    /// A pyramid whose rows are labelled relative to `top` instead of its own
    /// q_Max, and whose level is k + `level_shift`. Used for the two halves of
    /// a parabolic split.
    pub fn build(
        q: &[usize],
        v: usize,
        top: Option<usize>,
        level_shift: i64,
    ) -> Result<Self, AlgebraError> {
        let l = q.len();
        if l == 0 {
            return Err(AlgebraError::BadPyramid("empty partition".into()));
        }
        if q.contains(&0) {
            return Err(AlgebraError::BadPyramid("zero column height".into()));
        }
        if v > l {
            return Err(AlgebraError::BadPyramid(format!("pivot {v} exceeds length {l}")));
        }
        let up = (1..v).all(|s| q[s - 1] <= q[s]);
        let down = (v + 1..l).all(|s| q[s - 1] >= q[s]);
        if !(up && down) {
            return Err(AlgebraError::BadPyramid(format!(
                "{q:?} is not increasing up to column {v} and decreasing after"
            )));
        }
        let qmax = match (v >= 1, v < l) {
            (true, true) => q[v - 1].max(q[v]),
            (true, false) => q[v - 1],
            (false, _) => q[0],
        };
        let top = top.unwrap_or(qmax);
        if top < qmax {
            return Err(AlgebraError::BadPyramid("row offset below q_Max".into()));
        }
        let n: usize = q.iter().sum();
        let mut col = vec![0; n + 1];
        let mut row = vec![0; n + 1];
        let mut idx = 1;
        for (s, &h) in q.iter().enumerate() {
            for r in 0..h {
                col[idx] = s + 1;
                row[idx] = r + 1 + top - h;
                idx += 1;
            }
        }
        let mut p = Pyramid {
            q: q.to_vec(),
            v,
            top,
            level_shift,
            col,
            row,
            hat: vec![None; n + 1],
            tilde: vec![None; n + 1],
        };
        for j in 1..=n {
            if let Some(h) = p.box_at(p.col[j] + 1, p.row[j]) {
                p.hat[j] = Some(h);
                p.tilde[h] = Some(j);
            }
        }
        Ok(p)
    }

    pub fn heights(&self) -> &[usize] {
        &self.q
    }

    pub fn pivot(&self) -> usize {
        self.v
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn n(&self) -> usize {
        self.q.iter().sum()
    }

    pub fn height(&self, s: usize) -> usize {
        self.q[s - 1]
    }

    /// Top row label (q_Max for a standalone pyramid).
    pub fn top(&self) -> usize {
        self.top
    }

    pub fn q_max(&self) -> usize {
        *self.q.iter().max().unwrap()
    }

    pub fn q_min(&self) -> usize {
        self.q[0].min(self.q[self.q.len() - 1])
    }

    pub fn level_shift(&self) -> i64 {
        self.level_shift
    }

    pub fn col(&self, i: usize) -> usize {
        self.col[i]
    }

    pub fn row(&self, i: usize) -> usize {
        self.row[i]
    }

    pub fn hat(&self, j: usize) -> Option<usize> {
        self.hat[j]
    }

    pub fn tilde(&self, j: usize) -> Option<usize> {
        self.tilde[j]
    }

    /// Lowest row label occupied by column s.
    pub fn row_floor(&self, s: usize) -> usize {
        self.top - self.q[s - 1]
    }

    pub fn box_at(&self, s: usize, r: usize) -> Option<usize> {
        if s == 0 || s > self.q.len() {
            return None;
        }
        let h = self.q[s - 1];
        if r > self.top || r <= self.top - h {
            return None;
        }
        let before: usize = self.q[..s - 1].iter().sum();
        Some(before + r - (self.top - h))
    }

    /// α_s = k + N − q_s (with the pyramid's level shift added to k).
    pub fn alpha(&self, s: usize) -> Scalar {
        &Scalar::k() + &Scalar::int(self.level_shift + self.n() as i64 - self.q[s - 1] as i64)
    }

    /// γ_a = Σ_{u>a} α_u.
    pub fn gamma(&self, a: usize) -> Scalar {
        let mut g = Scalar::zero();
        for u in a + 1..=self.q.len() {
            g += &self.alpha(u);
        }
        g
    }

    /// The level k (plus shift) of V^κ(𝔟).
    pub fn level(&self) -> Scalar {
        &Scalar::k() + &Scalar::int(self.level_shift)
    }

    /// f = Σ e_{ĵ,j}.
    pub fn f(&self) -> LieElem {
        let mut out = LieElem::zero();
        for j in 1..=self.n() {
            if let Some(h) = self.hat[j] {
                out.add_term(GenIndex::super_e(h, j, 0), &Scalar::one());
            }
        }
        out
    }

    pub fn in_b(&self, i: usize, j: usize) -> bool {
        self.valid(i) && self.valid(j) && self.col[i] >= self.col[j]
    }

    pub fn in_psi(&self, i: usize, j: usize) -> bool {
        self.valid(i) && self.valid(j) && self.col[i] > self.col[j]
    }

    fn valid(&self, i: usize) -> bool {
        i >= 1 && i <= self.n()
    }
}

/// Invariant forms used for central terms.
#[derive(Clone, Debug)]
pub enum Form<'a> {
    /// (E_ij|E_pq) = k δ_iq δ_pj + δ_ij δ_pq on gl(N), extended by zero to ψ.
    GlN(&'a Pyramid),
    /// κ_s on gl(q_s): α_s δ_jp δ_iq + δ_ij δ_pq.
    KappaS(&'a Pyramid, usize),
}

/// Form with an arbitrary level: level·δ_iq δ_jp + δ_ij δ_pq.
pub fn gl_form(level: &Scalar, i: usize, j: usize, p: usize, q: usize) -> Scalar {
    let mut out = Scalar::zero();
    if i == q && j == p {
        out += level;
    }
    if i == j && p == q {
        out += &Scalar::one();
    }
    out
}

pub fn inner_product(form: &Form, x: &GenIndex, y: &GenIndex) -> Result<Scalar, AlgebraError> {
    match form {
        Form::GlN(pyr) => {
            for g in [x, y] {
                let ok = match g.kind {
                    Kind::E => pyr.in_b(g.i, g.j) || (g.alg != AlgebraTag::SuperA && pyr.valid(g.i) && pyr.valid(g.j)),
                    Kind::Psi => pyr.in_psi(g.i, g.j),
                    _ => false,
                };
                if !ok {
                    return Err(AlgebraError::OutOfRange(g.to_string()));
                }
            }
            if x.is_odd() || y.is_odd() {
                return Ok(Scalar::zero());
            }
            Ok(gl_form(&pyr.level(), x.i, x.j, y.i, y.j))
        }
        Form::KappaS(pyr, s) => {
            let h = pyr.height(*s);
            for g in [x, y] {
                if g.kind != Kind::E || g.i == 0 || g.j == 0 || g.i > h || g.j > h {
                    return Err(AlgebraError::OutOfRange(g.to_string()));
                }
            }
            Ok(gl_form(&pyr.alpha(*s), x.i, x.j, y.i, y.j))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_bracket_central() {
        let b = bracket(&GenIndex::loop_e(3, 1, 2, 1), &GenIndex::loop_e(3, 2, 1, -1)).unwrap();
        let mut want = LieElem::zero();
        want.add_term(GenIndex::loop_e(3, 1, 1, 0), &Scalar::one());
        want.add_term(GenIndex::loop_e(3, 2, 2, 0), &Scalar::int(-1));
        want.add_term(GenIndex::central(3, Kind::CTilde), &Scalar::one());
        assert_eq!(b, want);
        let b = bracket(&GenIndex::loop_e(3, 1, 1, 1), &GenIndex::loop_e(3, 1, 1, -1)).unwrap();
        let mut want = LieElem::zero();
        want.add_term(GenIndex::central(3, Kind::CTilde), &Scalar::one());
        want.add_term(GenIndex::central(3, Kind::Z), &Scalar::one());
        // both δ-patterns fire when i=j=p=q
        assert_eq!(b, want);
    }

    #[test]
    fn psi_psi_zero_and_mixed_error() {
        assert!(bracket(&GenIndex::psi(4, 1, 0), &GenIndex::psi(5, 2, 0)).unwrap().is_zero());
        assert!(bracket(&GenIndex::psi(4, 1, 0), &GenIndex::loop_e(3, 1, 1, 0)).is_err());
    }

    #[test]
    fn pyramid_33() {
        let p = Pyramid::new(&[3, 3], 1).unwrap();
        assert_eq!(p.n(), 6);
        assert_eq!((p.q_max(), p.q_min()), (3, 3));
        assert_eq!((p.col(4), p.row(4)), (2, 1));
        assert_eq!(p.hat(1), Some(4));
        assert_eq!(p.tilde(4), Some(1));
        assert_eq!(p.f().terms.len(), 3);
    }

    #[test]
    fn pyramid_43_rows() {
        let p = Pyramid::new(&[4, 3], 1).unwrap();
        assert_eq!((p.top(), p.q_min()), (4, 3));
        let rows: Vec<usize> = (5..=7).map(|i| p.row(i)).collect();
        assert_eq!(rows, vec![2, 3, 4]);
        assert_eq!(p.hat(1), None);
        assert_eq!(p.hat(2), Some(5));
    }

    #[test]
    fn pyramid_shapes() {
        assert!(Pyramid::new(&[3, 4], 2).is_ok());
        assert!(Pyramid::new(&[3, 4], 1).is_ok());
        assert!(Pyramid::new(&[4, 3, 4], 1).is_err());
        assert!(Pyramid::new(&[3, 0], 1).is_err());
    }

    #[test]
    fn forms() {
        let p = Pyramid::new(&[3, 3], 1).unwrap();
        let ip = inner_product(&Form::GlN(&p), &GenIndex::super_e(1, 2, 0), &GenIndex::super_e(2, 1, 0));
        assert_eq!(ip.unwrap(), Scalar::k());
        let ip = inner_product(&Form::GlN(&p), &GenIndex::super_e(1, 2, 0), &GenIndex::psi(4, 1, 0));
        assert!(ip.unwrap().is_zero());
        let ip = inner_product(&Form::KappaS(&p, 1), &GenIndex::loop_e(3, 1, 1, 0), &GenIndex::loop_e(3, 1, 1, 0));
        assert_eq!(ip.unwrap(), &p.alpha(1) + &Scalar::one());
    }
}
