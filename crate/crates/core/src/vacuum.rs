//! PBW states of vacuum modules (single super module or a tensor product of
//! gl(q_s) slots), the mode action, translation, and word straightening.

use crate::loopalg::{bracket, gl_bracket, gl_form, GenIndex, Kind, LieElem, Pyramid};
use crate::scalar::{Rat, Scalar};
use smallvec::SmallVec;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// A generator of a mode algebra: a matrix unit in tensor slot `slot`, or a
/// ψ of the superalgebra (always slot 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen {
    pub slot: u8,
    pub kind: Kind,
    pub i: u8,
    pub j: u8,
}

impl Gen {
    pub const fn e(slot: usize, i: usize, j: usize) -> Self {
        Gen { slot: slot as u8, kind: Kind::E, i: i as u8, j: j as u8 }
    }

    pub const fn psi(i: usize, j: usize) -> Self {
        Gen { slot: 0, kind: Kind::Psi, i: i as u8, j: j as u8 }
    }

    pub fn is_odd(&self) -> bool {
        self.kind == Kind::Psi
    }
}

/// `gen` with mode `mode`, i.e. gen·t^mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub mode: i32,
    pub gen: Gen,
}

impl Factor {
    pub const fn new(gen: Gen, mode: i32) -> Self {
        Factor { mode, gen }
    }
}

/// Sorted list of negative-mode factors; the empty list is |0⟩.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub SmallVec<[Factor; 4]>);

impl Monomial {
    pub fn vacuum() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn depth(&self) -> u32 {
        self.0.iter().map(|f| (-f.mode) as u32).sum()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotSpec {
    pub rank: usize,
    pub level: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Algebra {
    /// ⊗_s ĝl(rank_s) with c̃ ↦ level_s and z ↦ 1.
    Slots(Vec<SlotSpec>),
    /// 𝔞 = 𝔟 ⊕ ψ of a pyramid, form κ̃ at level k (+ shift).
    Super(Pyramid),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub alg: Algebra,
}

impl Context {
    pub fn slots(specs: Vec<SlotSpec>) -> Self {
        Context { alg: Algebra::Slots(specs) }
    }

    pub fn single(rank: usize, level: Scalar) -> Self {
        Self::slots(vec![SlotSpec { rank, level }])
    }

    pub fn superalgebra(pyr: Pyramid) -> Self {
        Context { alg: Algebra::Super(pyr) }
    }

    pub fn slot_count(&self) -> usize {
        match &self.alg {
            Algebra::Slots(s) => s.len(),
            Algebra::Super(_) => 1,
        }
    }

    pub fn is_super(&self) -> bool {
        matches!(self.alg, Algebra::Super(_))
    }

    pub fn valid(&self, g: &Gen) -> bool {
        let (i, j) = (g.i as usize, g.j as usize);
        match &self.alg {
            Algebra::Slots(s) => {
                g.kind == Kind::E
                    && (g.slot as usize) < s.len()
                    && i >= 1
                    && j >= 1
                    && i <= s[g.slot as usize].rank
                    && j <= s[g.slot as usize].rank
            }
            Algebra::Super(p) => {
                g.slot == 0
                    && match g.kind {
                        Kind::E => p.in_b(i, j),
                        Kind::Psi => p.in_psi(i, j),
                        _ => false,
                    }
            }
        }
    }

    /// All generators, in PBW order.
    pub fn generators(&self) -> Vec<Gen> {
        let mut out = Vec::new();
        match &self.alg {
            Algebra::Slots(s) => {
                for (k, spec) in s.iter().enumerate() {
                    for i in 1..=spec.rank {
                        for j in 1..=spec.rank {
                            out.push(Gen::e(k, i, j));
                        }
                    }
                }
            }
            Algebra::Super(p) => {
                for kind in [Kind::E, Kind::Psi] {
                    for i in 1..=p.n() {
                        for j in 1..=p.n() {
                            let g = Gen { slot: 0, kind, i: i as u8, j: j as u8 };
                            if self.valid(&g) {
                                out.push(g);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Finite part of the super-bracket.
    pub fn bracket(&self, a: &Gen, b: &Gen) -> SmallVec<[(i64, Gen); 2]> {
        let mut out = SmallVec::new();
        if a.slot != b.slot {
            return out;
        }
        let (ai, aj, bi, bj) = (a.i as usize, a.j as usize, b.i as usize, b.j as usize);
        match (a.kind, b.kind) {
            (Kind::E, Kind::E) => {
                for (c, i, j) in gl_bracket(ai, aj, bi, bj) {
                    out.push((c, Gen { slot: a.slot, kind: Kind::E, i: i as u8, j: j as u8 }));
                }
            }
            (Kind::E, Kind::Psi) => {
                for (c, i, j) in gl_bracket(ai, aj, bi, bj) {
                    out.push((c, Gen::psi(i, j)));
                }
            }
            (Kind::Psi, Kind::E) => {
                for (c, i, j) in gl_bracket(bi, bj, ai, aj) {
                    out.push((-c, Gen::psi(i, j)));
                }
            }
            _ => {}
        }
        out
    }

    /// Invariant form used for the central term of [a t^m, b t^{-m}] = m·form(a,b).
    pub fn form(&self, a: &Gen, b: &Gen) -> Scalar {
        if a.slot != b.slot || a.kind != Kind::E || b.kind != Kind::E {
            return Scalar::zero();
        }
        let level = match &self.alg {
            Algebra::Slots(s) => s[a.slot as usize].level.clone(),
            Algebra::Super(p) => p.level(),
        };
        gl_form(&level, a.i as usize, a.j as usize, b.i as usize, b.j as usize)
    }

    pub(crate) fn slot_depth(&self, mono: &[Factor], slot: u8) -> u32 {
        match &self.alg {
            Algebra::Super(_) => mono.iter().map(|f| (-f.mode) as u32).sum(),
            Algebra::Slots(_) => mono
                .iter()
                .filter(|f| f.gen.slot == slot)
                .map(|f| (-f.mode) as u32)
                .sum(),
        }
    }

    pub fn gen_name(&self, g: &Gen) -> String {
        let base = match g.kind {
            Kind::Psi => format!("Psi[{},{}]", g.i, g.j),
            _ => match &self.alg {
                Algebra::Super(_) => format!("e[{},{}]", g.i, g.j),
                Algebra::Slots(s) if s.len() > 1 => format!("E{}[{},{}]", g.slot + 1, g.i, g.j),
                Algebra::Slots(_) => format!("E[{},{}]", g.i, g.j),
            },
        };
        base
    }
}

/// Finite linear combination of PBW monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct State {
    pub terms: BTreeMap<Monomial, Scalar>,
}

impl State {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn vacuum() -> Self {
        Self::basis(Monomial::vacuum())
    }

    pub fn basis(m: Monomial) -> Self {
        let mut s = Self::zero();
        s.terms.insert(m, Scalar::one());
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, o: &State, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let unit = c.as_constant() == Some(Rat::from_integer(1));
        for (m, v) in &o.terms {
            if unit {
                self.add_term(m.clone(), v);
            } else {
                self.add_term(m.clone(), &(v * c));
            }
        }
    }

    pub fn scaled(&self, c: &Scalar) -> State {
        let mut out = State::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, o: &State) -> State {
        let mut out = self.clone();
        out.add_scaled(o, &Scalar::int(-1));
        out
    }

    pub fn plus(&self, o: &State) -> State {
        let mut out = self.clone();
        out.add_scaled(o, &Scalar::one());
        out
    }

    pub fn max_depth(&self) -> u32 {
        self.terms.keys().map(|m| m.depth()).max().unwrap_or(0)
    }

    pub fn map_scalars(&self, f: impl Fn(&Scalar) -> Scalar) -> State {
        let mut out = State::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &f(c));
        }
        out
    }

    pub fn render(&self, ctx: &Context) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let lines: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c}) * {}", render_monomial(ctx, m)))
            .collect();
        lines.join("\n")
    }
}

pub fn render_monomial(ctx: &Context, m: &Monomial) -> String {
    let nslots = ctx.slot_count();
    if nslots > 1 {
        let mut parts = Vec::new();
        for s in 0..nslots {
            let fs: Vec<String> = m
                .0
                .iter()
                .filter(|f| f.gen.slot as usize == s)
                .map(|f| format!("{}[{}]", ctx.gen_name(&f.gen), f.mode))
                .collect();
            parts.push(if fs.is_empty() { "1".to_string() } else { fs.join("") });
        }
        format!("{}|0>", parts.join(" (x) "))
    } else {
        let fs: String = m.0.iter().map(|f| format!("{}[{}]", ctx.gen_name(&f.gen), f.mode)).collect();
        format!("{fs}|0>")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.0 {
            let k = if x.gen.is_odd() { "Psi" } else { "E" };
            write!(f, "{k}{}[{},{}][{}]", x.gen.slot + 1, x.gen.i, x.gen.j, x.mode)?;
        }
        write!(f, "|0>")
    }
}

/// Mode-action evaluator with a memo table.
pub struct Engine<'c> {
    pub ctx: &'c Context,
    cache: HashMap<(Gen, i32, Monomial), State>,
    pub(crate) op_cache: HashMap<(u64, Monomial), State>,
}

impl<'c> Engine<'c> {
    pub fn new(ctx: &'c Context) -> Self {
        Engine { ctx, cache: HashMap::new(), op_cache: HashMap::new() }
    }

    pub fn clear(&mut self) {
        self.cache.clear();
        self.op_cache.clear();
    }

    /// g·t^m applied to a single monomial.
    pub fn act_mono(&mut self, g: Gen, m: i32, mono: &[Factor]) -> State {
        if m >= 0 {
            let d = self.ctx.slot_depth(mono, g.slot);
            if d == 0 || m as u32 > d {
                return State::zero();
            }
        }
        let new = Factor::new(g, m);
        if mono.is_empty() {
            let mut v = SmallVec::new();
            v.push(new);
            return State::basis(Monomial(v));
        }
        let f = mono[0];
        if m < 0 && new <= f {
            if new == f && g.is_odd() {
                return State::zero();
            }
            let mut v: SmallVec<[Factor; 4]> = SmallVec::with_capacity(mono.len() + 1);
            v.push(new);
            v.extend_from_slice(mono);
            return State::basis(Monomial(v));
        }
        let key = (g, m, Monomial(SmallVec::from_slice(mono)));
        if let Some(s) = self.cache.get(&key) {
            return s.clone();
        }
        let rest = &mono[1..];
        let mut out = State::zero();
        let sign = if g.is_odd() && f.gen.is_odd() { -1 } else { 1 };
        let inner = self.act_mono(g, m, rest);
        for (m2, c) in &inner.terms {
            let t = self.act_mono(f.gen, f.mode, &m2.0);
            out.add_scaled(&t, &c.scale_int(sign));
        }
        for (c, h) in self.ctx.bracket(&g, &f.gen) {
            let t = self.act_mono(h, m + f.mode, rest);
            out.add_scaled(&t, &Scalar::int(c));
        }
        if m + f.mode == 0 {
            let cent = self.ctx.form(&g, &f.gen).scale_int(m as i64);
            if !cent.is_zero() {
                out.add_term(Monomial(SmallVec::from_slice(rest)), &cent);
            }
        }
        self.cache.insert(key, out.clone());
        out
    }

    pub fn act(&mut self, g: Gen, m: i32, st: &State) -> State {
        let mut out = State::zero();
        for (mono, c) in &st.terms {
            let t = self.act_mono(g, m, &mono.0);
            out.add_scaled(&t, c);
        }
        out
    }

    /// Apply a word of factors; the last factor acts first.
    pub fn act_word(&mut self, word: &[Factor], st: &State) -> State {
        let mut cur = st.clone();
        for f in word.iter().rev() {
            if cur.is_zero() {
                break;
            }
            cur = self.act(f.gen, f.mode, &cur);
        }
        cur
    }

    /// The state word·|0⟩.
    pub fn state_of(&mut self, word: &[Factor]) -> State {
        self.act_word(word, &State::vacuum())
    }

    /// Translation ∂ as an even derivation, ∂(u[−n]) = n·u[−n−1].
    pub fn translate(&mut self, st: &State) -> State {
        let mut out = State::zero();
        for (mono, c) in &st.terms {
            for k in 0..mono.0.len() {
                let mut w: Vec<Factor> = mono.0.to_vec();
                let n = -w[k].mode;
                w[k].mode -= 1;
                let t = self.state_of(&w);
                out.add_scaled(&t, &c.scale_int(n as i64));
            }
        }
        out
    }
}

/// All PBW monomials of depth ≤ `depth`, ordered by depth then lexicographically.
pub fn basis_enum(ctx: &Context, depth: u32) -> Vec<Monomial> {
    let gens = ctx.generators();
    let mut factors: Vec<Factor> = Vec::new();
    for m in (1..=depth as i32).rev() {
        for g in &gens {
            factors.push(Factor::new(*g, -m));
        }
    }
    factors.sort();
    let mut out = Vec::new();
    let mut cur: Vec<Factor> = Vec::new();
    fn rec(fs: &[Factor], start: usize, budget: u32, cur: &mut Vec<Factor>, out: &mut Vec<Monomial>) {
        out.push(Monomial(SmallVec::from_slice(cur)));
        for k in start..fs.len() {
            let f = fs[k];
            let w = (-f.mode) as u32;
            if w > budget {
                continue;
            }
            cur.push(f);
            let next = if f.gen.is_odd() { k + 1 } else { k };
            rec(fs, next, budget - w, cur, out);
            cur.pop();
        }
    }
    rec(&factors, 0, depth, &mut cur, &mut out);
    out.sort_by(|a, b| a.depth().cmp(&b.depth()).then(a.cmp(b)));
    out
}

pub fn state_eq(a: &State, b: &State) -> bool {
    a == b
}

/// Straightening of words in an enveloping algebra.
pub trait Straighten {
    type Sym: Clone + Ord;
    fn key_lt(&self, a: &Self::Sym, b: &Self::Sym) -> bool;
    fn is_odd(&self, a: &Self::Sym) -> bool;
    /// [a,b] as a combination of words (length ≤ 1).
    fn bracket(&self, a: &Self::Sym, b: &Self::Sym) -> Vec<(Scalar, Vec<Self::Sym>)>;
}

pub type WordSum<S> = BTreeMap<Vec<S>, Scalar>;

/// Bring a word into PBW order. `choose` picks which adjacent inversion to
/// resolve next (its argument lists the candidate positions).
pub fn straighten<A: Straighten>(
    alg: &A,
    word: &[A::Sym],
    choose: &mut dyn FnMut(&[usize]) -> usize,
) -> WordSum<A::Sym> {
    let mut out: WordSum<A::Sym> = BTreeMap::new();
    let mut stack: Vec<(Vec<A::Sym>, Scalar)> = vec![(word.to_vec(), Scalar::one())];
    while let Some((w, c)) = stack.pop() {
        let mut inv = Vec::new();
        let mut dead = false;
        for p in 0..w.len().saturating_sub(1) {
            if w[p] == w[p + 1] && alg.is_odd(&w[p]) {
                dead = true;
                break;
            }
            if alg.key_lt(&w[p + 1], &w[p]) {
                inv.push(p);
            }
        }
        if dead {
            continue;
        }
        if inv.is_empty() {
            let e = out.entry(w.clone()).or_insert_with(Scalar::zero);
            *e += &c;
            if e.is_zero() {
                out.remove(&w);
            }
            continue;
        }
        let p = inv[choose(&inv) % inv.len()];
        let (x, y) = (&w[p], &w[p + 1]);
        let sign = if alg.is_odd(x) && alg.is_odd(y) { -1 } else { 1 };
        let mut swapped = w.clone();
        swapped.swap(p, p + 1);
        stack.push((swapped, c.scale_int(sign)));
        for (bc, bw) in alg.bracket(x, y) {
            let mut nw: Vec<A::Sym> = w[..p].to_vec();
            nw.extend(bw);
            nw.extend_from_slice(&w[p + 2..]);
            stack.push((nw, &c * &bc));
        }
    }
    out
}

/// Straightening in U(ĝl(n)) or U(𝔞) with central symbols kept.
pub struct AbstractAlg;

impl Straighten for AbstractAlg {
    type Sym = GenIndex;
    fn key_lt(&self, a: &GenIndex, b: &GenIndex) -> bool {
        a.pbw_key() < b.pbw_key()
    }
    fn is_odd(&self, a: &GenIndex) -> bool {
        a.is_odd()
    }
    fn bracket(&self, a: &GenIndex, b: &GenIndex) -> Vec<(Scalar, Vec<GenIndex>)> {
        let e: LieElem = bracket(a, b).unwrap_or_default();
        e.terms.into_iter().map(|(g, c)| (c, vec![g])).collect()
    }
}

/// Straightening of factor words inside a concrete context (c̃ ↦ level, z ↦ 1).
impl Straighten for Context {
    type Sym = Factor;
    fn key_lt(&self, a: &Factor, b: &Factor) -> bool {
        a < b
    }
    fn is_odd(&self, a: &Factor) -> bool {
        a.gen.is_odd()
    }
    fn bracket(&self, a: &Factor, b: &Factor) -> Vec<(Scalar, Vec<Factor>)> {
        let mut out: Vec<(Scalar, Vec<Factor>)> = Context::bracket(self, &a.gen, &b.gen)
            .into_iter()
            .map(|(c, g)| (Scalar::int(c), vec![Factor::new(g, a.mode + b.mode)]))
            .collect();
        if a.mode + b.mode == 0 && a.mode != 0 {
            let c = self.form(&a.gen, &b.gen).scale_int(a.mode as i64);
            if !c.is_zero() {
                out.push((c, vec![]));
            }
        }
        out
    }
}

/// Canonical PBW form of a word in U(ĝl(n)) / U(𝔞), central symbols kept.
pub fn normal_order(word: &[GenIndex]) -> WordSum<GenIndex> {
    straighten(&AbstractAlg, word, &mut |_| 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl3() -> Context {
        Context::single(3, Scalar::eps().div_hbar_pow(1))
    }

    #[test]
    fn positive_mode_central() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let st = eng.state_of(&[Factor::new(Gen::e(0, 2, 1), -1)]);
        let out = eng.act(Gen::e(0, 1, 2), 1, &st);
        assert_eq!(out, State::vacuum().scaled(&Scalar::eps().div_hbar_pow(1)));
    }

    #[test]
    fn zero_mode_bracket() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let st = eng.state_of(&[Factor::new(Gen::e(0, 1, 2), -1)]);
        assert_eq!(eng.act(Gen::e(0, 1, 1), 0, &st), st);
    }

    #[test]
    fn grading_kills() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let st = eng.state_of(&[Factor::new(Gen::e(0, 1, 2), -1)]);
        assert!(eng.act(Gen::e(0, 2, 1), 2, &st).is_zero());
    }

    #[test]
    fn basis_counts() {
        let ctx = Context::single(2, Scalar::one());
        assert_eq!(basis_enum(&ctx, 0).len(), 1);
        assert_eq!(basis_enum(&ctx, 1).len(), 5);
        // depth 2: 4 single u[-2] plus 10 unordered pairs
        assert_eq!(basis_enum(&ctx, 2).len(), 19);
    }

    #[test]
    fn translation() {
        let p = Pyramid::new(&[3, 3], 1).unwrap();
        let ctx = Context::superalgebra(p);
        let mut eng = Engine::new(&ctx);
        let e12 = Gen::e(0, 1, 2);
        let st = eng.state_of(&[Factor::new(e12, -1)]);
        assert_eq!(eng.translate(&st), eng.state_of(&[Factor::new(e12, -2)]));
        assert!(eng.translate(&State::vacuum()).is_zero());
        let u = Gen::e(0, 4, 1);
        let two = eng.state_of(&[Factor::new(e12, -1), Factor::new(u, -1)]);
        let want = eng
            .state_of(&[Factor::new(e12, -2), Factor::new(u, -1)])
            .plus(&eng.state_of(&[Factor::new(e12, -1), Factor::new(u, -2)]));
        assert_eq!(eng.translate(&two), want);
    }

    #[test]
    fn odd_square_vanishes() {
        let p = Pyramid::new(&[3, 3], 1).unwrap();
        let ctx = Context::superalgebra(p);
        let mut eng = Engine::new(&ctx);
        let f = Factor::new(Gen::psi(4, 1), -1);
        assert!(eng.state_of(&[f, f]).is_zero());
        assert!(normal_order(&[GenIndex::psi(4, 1, 0), GenIndex::psi(4, 1, 0)]).is_empty());
    }

    #[test]
    fn normal_order_example() {
        let a = GenIndex::loop_e(3, 2, 1, 1);
        let b = GenIndex::loop_e(3, 1, 2, -1);
        let got = normal_order(&[a, b]);
        let mut want: WordSum<GenIndex> = BTreeMap::new();
        want.insert(vec![b, a], Scalar::one());
        want.insert(vec![GenIndex::loop_e(3, 2, 2, 0)], Scalar::one());
        want.insert(vec![GenIndex::loop_e(3, 1, 1, 0)], Scalar::int(-1));
        want.insert(vec![GenIndex::central(3, Kind::CTilde)], Scalar::one());
        assert_eq!(got, want);
        assert_eq!(normal_order(&[b, a]).len(), 1);
    }
}
