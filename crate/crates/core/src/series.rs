//! Elements of the degreewise completion: finite words plus quadratic series
//! templates, composite operators, module action and operator comparison.

use crate::report::{InstanceResult, Status};
use crate::scalar::Scalar;
use crate::vacuum::{basis_enum, render_monomial, Context, Engine, Factor, Gen, Monomial, State};
use rayon::prelude::*;
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("no mode expansion for state monomial {0}")]
    Unsupported(String),
}

/// Σ_{s≥0} a·t^{p−s} b·t^{q+s}. The right factor acts first, so the sum is
/// locally finite on vacuum modules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesTemplate {
    pub a: Gen,
    pub p: i32,
    pub b: Gen,
    pub q: i32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeriesExpr {
    pub finite: BTreeMap<Vec<Factor>, Scalar>,
    pub templates: BTreeMap<SeriesTemplate, Scalar>,
}

fn bump<K: Ord + Clone>(map: &mut BTreeMap<K, Scalar>, k: K, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(k.clone()).or_insert_with(Scalar::zero);
    *e += c;
    if e.is_zero() {
        map.remove(&k);
    }
}

impl SeriesExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut e = Self::zero();
        bump(&mut e.finite, vec![], &c);
        e
    }

    pub fn word(c: Scalar, w: &[Factor]) -> Self {
        let mut e = Self::zero();
        bump(&mut e.finite, w.to_vec(), &c);
        e
    }

    pub fn template(c: Scalar, t: SeriesTemplate) -> Self {
        let mut e = Self::zero();
        bump(&mut e.templates, t, &c);
        e
    }

    pub fn add_word(&mut self, c: &Scalar, w: &[Factor]) {
        bump(&mut self.finite, w.to_vec(), c);
    }

    pub fn add_template(&mut self, c: &Scalar, t: SeriesTemplate) {
        bump(&mut self.templates, t, c);
    }

    pub fn add_scaled(&mut self, o: &SeriesExpr, c: &Scalar) {
        for (w, v) in &o.finite {
            bump(&mut self.finite, w.clone(), &(v * c));
        }
        for (t, v) in &o.templates {
            bump(&mut self.templates, *t, &(v * c));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.finite.is_empty() && self.templates.is_empty()
    }

    /// Normal-order the finite words inside `ctx`.
    pub fn canonical(&self, ctx: &Context) -> SeriesExpr {
        let mut out = SeriesExpr { finite: BTreeMap::new(), templates: self.templates.clone() };
        for (w, c) in &self.finite {
            for (nw, nc) in crate::vacuum::straighten(ctx, w, &mut |_| 0) {
                bump(&mut out.finite, nw, &(&nc * c));
            }
        }
        out
    }

    pub fn render(&self, ctx: &Context) -> String {
        let mut parts = Vec::new();
        let name = |f: &Factor| format!("{}t^{}", ctx.gen_name(&f.gen), f.mode);
        for (w, c) in &self.finite {
            let ws: Vec<String> = w.iter().map(name).collect();
            parts.push(format!("({c})*{}", if ws.is_empty() { "1".into() } else { ws.join(" ") }));
        }
        for (t, c) in &self.templates {
            parts.push(format!(
                "({c})*sum_{{s>=0}} {}t^{{{}-s}} {}t^{{{}+s}}",
                ctx.gen_name(&t.a),
                t.p,
                ctx.gen_name(&t.b),
                t.q
            ));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
pub enum OpNode {
    Series(SeriesExpr),
    Lin(Vec<(Scalar, Operator)>),
    /// Product; the last operator acts first.
    Prod(Vec<Operator>),
}

/// A composite operator on a vacuum module. Cloning shares the node and its
/// memo identity.
#[derive(Clone, Debug)]
pub struct Operator {
    id: u64,
    node: Arc<OpNode>,
}

impl Operator {
    fn from_node(node: OpNode) -> Self {
        Operator { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), node: Arc::new(node) }
    }

    pub fn node(&self) -> &OpNode {
        &self.node
    }

    pub fn series(e: SeriesExpr) -> Self {
        Self::from_node(OpNode::Series(e))
    }

    pub fn zero() -> Self {
        Self::series(SeriesExpr::zero())
    }

    pub fn scalar(c: Scalar) -> Self {
        Self::series(SeriesExpr::constant(c))
    }

    pub fn mode(g: Gen, t: i32) -> Self {
        Self::series(SeriesExpr::word(Scalar::one(), &[Factor::new(g, t)]))
    }

    pub fn modes(gs: &[Gen], t: i32) -> Self {
        let mut e = SeriesExpr::zero();
        for g in gs {
            e.add_word(&Scalar::one(), &[Factor::new(*g, t)]);
        }
        Self::series(e)
    }

    pub fn as_series(&self) -> Option<&SeriesExpr> {
        match &*self.node {
            OpNode::Series(e) => Some(e),
            _ => None,
        }
    }

    /// Linear combination; series children are merged into one leaf.
    pub fn lin(terms: Vec<(Scalar, Operator)>) -> Self {
        let mut flat = SeriesExpr::zero();
        let mut rest: Vec<(Scalar, Operator)> = Vec::new();
        for (c, op) in terms {
            if c.is_zero() {
                continue;
            }
            match &*op.node {
                OpNode::Series(e) => flat.add_scaled(e, &c),
                OpNode::Lin(inner) if inner.iter().all(|(_, o)| !matches!(&*o.node, OpNode::Lin(_))) => {
                    for (ic, io) in inner {
                        match &*io.node {
                            OpNode::Series(e) => flat.add_scaled(e, &(&c * ic)),
                            _ => rest.push((&c * ic, io.clone())),
                        }
                    }
                }
                _ => rest.push((c, op)),
            }
        }
        if rest.is_empty() {
            return Self::series(flat);
        }
        if !flat.is_zero() {
            rest.push((Scalar::one(), Self::series(flat)));
        }
        Self::from_node(OpNode::Lin(rest))
    }

    pub fn sum(ops: Vec<Operator>) -> Self {
        Self::lin(ops.into_iter().map(|o| (Scalar::one(), o)).collect())
    }

    pub fn prod(ops: Vec<Operator>) -> Self {
        Self::from_node(OpNode::Prod(ops))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::lin(vec![(c.clone(), self.clone())])
    }

    pub fn add(&self, o: &Operator) -> Self {
        Self::sum(vec![self.clone(), o.clone()])
    }

    pub fn sub(&self, o: &Operator) -> Self {
        Self::lin(vec![(Scalar::one(), self.clone()), (Scalar::int(-1), o.clone())])
    }

    /// Product; finite words are concatenated directly.
    pub fn mul(&self, o: &Operator) -> Self {
        if let (Some(a), Some(b)) = (self.as_series(), o.as_series()) {
            if a.templates.is_empty() && b.templates.is_empty() {
                let mut e = SeriesExpr::zero();
                for (wa, ca) in &a.finite {
                    for (wb, cb) in &b.finite {
                        let mut w = wa.clone();
                        w.extend_from_slice(wb);
                        e.add_word(&(ca * cb), &w);
                    }
                }
                return Self::series(e);
            }
        }
        Self::prod(vec![self.clone(), o.clone()])
    }

    pub fn commutator(a: &Operator, b: &Operator) -> Self {
        Self::lin(vec![(Scalar::one(), a.mul(b)), (Scalar::int(-1), b.mul(a))])
    }

    pub fn anticommutator(a: &Operator, b: &Operator) -> Self {
        Self::lin(vec![(Scalar::one(), a.mul(b)), (Scalar::one(), b.mul(a))])
    }
}

/// Bracket of two expressions made of single-letter words, computed in the
/// mode algebra of `ctx`. Returns `None` if either side has longer words or
/// templates.
pub fn linear_bracket(ctx: &Context, x: &SeriesExpr, y: &SeriesExpr) -> Option<SeriesExpr> {
    if !x.templates.is_empty() || !y.templates.is_empty() {
        return None;
    }
    let mut out = SeriesExpr::zero();
    for (wa, ca) in &x.finite {
        for (wb, cb) in &y.finite {
            let (fa, fb) = match (wa.as_slice(), wb.as_slice()) {
                ([], _) | (_, []) => continue,
                ([fa], [fb]) => (*fa, *fb),
                _ => return None,
            };
            let c = ca * cb;
            for (k, g) in ctx.bracket(&fa.gen, &fb.gen) {
                out.add_word(&c.scale_int(k), &[Factor::new(g, fa.mode + fb.mode)]);
            }
            if fa.mode + fb.mode == 0 && fa.mode != 0 {
                let cent = ctx.form(&fa.gen, &fb.gen).scale_int(fa.mode as i64);
                out.add_word(&(&c * &cent), &[]);
            }
        }
    }
    Some(out)
}

/// Σ over pairs of (a t^{p−s})(b t^{q+s}) with a ∈ `a`, b ∈ `b`.
pub fn pair_series(c: &Scalar, a: &[Gen], p: i32, b: &[Gen], q: i32) -> SeriesExpr {
    let mut e = SeriesExpr::zero();
    for ga in a {
        for gb in b {
            e.add_template(c, SeriesTemplate { a: *ga, p, b: *gb, q });
        }
    }
    e
}

/// Σ over pairs of the finite word (a t^p)(b t^q).
pub fn pair_word(c: &Scalar, a: &[Gen], p: i32, b: &[Gen], q: i32) -> SeriesExpr {
    let mut e = SeriesExpr::zero();
    for ga in a {
        for gb in b {
            e.add_word(c, &[Factor::new(*ga, p), Factor::new(*gb, q)]);
        }
    }
    e
}

impl<'c> Engine<'c> {
    pub fn series_act_mono(&mut self, e: &SeriesExpr, mono: &Monomial) -> State {
        let mut out = State::zero();
        let base = State::basis(mono.clone());
        for (w, c) in &e.finite {
            let r = self.act_word(w, &base);
            out.add_scaled(&r, c);
        }
        for (t, c) in &e.templates {
            let d = self.ctx.slot_depth(&mono.0, t.b.slot) as i32;
            let smax = if d > 0 { d - t.q } else { -1 - t.q };
            let mut acc = State::zero();
            for s in 0..=smax.max(-1) {
                let st = self.act_mono(t.b, t.q + s, &mono.0);
                if st.is_zero() {
                    continue;
                }
                let r = self.act(t.a, t.p - s, &st);
                acc.add_scaled(&r, &Scalar::one());
            }
            out.add_scaled(&acc, c);
        }
        out
    }

    pub fn series_act(&mut self, e: &SeriesExpr, st: &State) -> State {
        let mut out = State::zero();
        for (m, c) in &st.terms {
            let r = self.series_act_mono(e, m);
            out.add_scaled(&r, c);
        }
        out
    }

    pub fn apply_mono(&mut self, op: &Operator, mono: &Monomial) -> State {
        if let OpNode::Series(e) = &*op.node {
            if e.templates.is_empty() {
                return self.series_act_mono(e, mono);
            }
        }
        let key = (op.id, mono.clone());
        if let Some(s) = self.op_cache.get(&key) {
            return s.clone();
        }
        let out = match &*op.node {
            OpNode::Series(e) => self.series_act_mono(e, mono),
            OpNode::Lin(terms) => {
                let mut out = State::zero();
                for (c, o) in terms {
                    let r = self.apply_mono(o, mono);
                    out.add_scaled(&r, c);
                }
                out
            }
            OpNode::Prod(ops) => {
                let mut cur = State::basis(mono.clone());
                for o in ops.iter().rev() {
                    if cur.is_zero() {
                        break;
                    }
                    cur = self.apply(o, &cur);
                }
                cur
            }
        };
        self.op_cache.insert(key, out.clone());
        out
    }

    pub fn apply(&mut self, op: &Operator, st: &State) -> State {
        let mut out = State::zero();
        for (m, c) in &st.terms {
            let r = self.apply_mono(op, m);
            out.add_scaled(&r, c);
        }
        out
    }
}

/// Generalized binomial coefficient C(m, r) for integer m and r ≥ 0.
fn binom(m: i64, r: u32) -> Scalar {
    let mut num = crate::scalar::Rat::from_integer(1);
    for t in 0..r as i64 {
        num *= crate::scalar::Rat::new(m - t, t + 1);
    }
    Scalar::rat(num)
}

/// The mode v_{(m)} of a state v whose monomials are u[−n]|0⟩, u[−1]w[−1]|0⟩
/// or |0⟩, as a series expression.
pub fn state_mode(ctx: &Context, st: &State, m: i32) -> Result<SeriesExpr, SeriesError> {
    let mut out = SeriesExpr::zero();
    for (mono, c) in &st.terms {
        match mono.0.as_slice() {
            [] => {
                if m == -1 {
                    out.add_word(c, &[]);
                }
            }
            [f] => {
                // (u[−n]|0⟩)_{(m)} = (−1)^{n−1} C(m, n−1) u_{(m−n+1)}
                let n = -f.mode;
                let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
                let coef = binom(m as i64, (n - 1) as u32).scale_int(sign);
                out.add_word(&(c * &coef), &[Factor::new(f.gen, m - n + 1)]);
            }
            [x, y] if x.mode == -1 && y.mode == -1 => {
                let sign = if x.gen.is_odd() && y.gen.is_odd() { -1 } else { 1 };
                out.add_template(c, SeriesTemplate { a: x.gen, p: -1, b: y.gen, q: m });
                out.add_template(&c.scale_int(sign), SeriesTemplate { a: y.gen, p: m - 1, b: x.gen, q: 0 });
            }
            _ => return Err(SeriesError::Unsupported(render_monomial(ctx, mono))),
        }
    }
    Ok(out)
}

/// Mismatch found by an operator comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub basis: String,
    pub depth: u32,
    pub lhs: String,
    pub rhs: String,
}

fn compare_on(eng: &mut Engine, basis: &[Monomial], a: &Operator, b: &Operator) -> Option<Witness> {
    for m in basis {
        let l = eng.apply_mono(a, m);
        let r = eng.apply_mono(b, m);
        if l != r {
            return Some(Witness {
                basis: render_monomial(eng.ctx, m),
                depth: m.depth(),
                lhs: l.render(eng.ctx),
                rhs: r.render(eng.ctx),
            });
        }
    }
    None
}

/// Compare two operators on every basis state of depth ≤ `depth`.
pub fn op_eq_on_depth(ctx: &Context, a: &Operator, b: &Operator, depth: u32) -> Result<(), Witness> {
    let basis = basis_enum(ctx, depth);
    let mut eng = Engine::new(ctx);
    match compare_on(&mut eng, &basis, a, b) {
        None => Ok(()),
        Some(w) => Err(w),
    }
}

/// An operator identity lhs = rhs to be checked.
#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub lhs: Operator,
    pub rhs: Operator,
}

impl Instance {
    pub fn new(id: impl Into<String>, lhs: Operator, rhs: Operator) -> Self {
        Instance { id: id.into(), lhs, rhs }
    }
}

/// Check many identities at once. Instances run in parallel, each worker
/// keeping its own memo tables; results keep the input order.
pub fn check_instances(ctx: &Context, instances: &[Instance], depth: u32) -> Vec<InstanceResult> {
    let basis = basis_enum(ctx, depth);
    let chunk = (instances.len() / (4 * rayon::current_num_threads()).max(1)).max(1);
    instances
        .par_chunks(chunk)
        .flat_map_iter(|part| {
            let mut eng = Engine::new(ctx);
            part.iter()
                .map(|inst| match compare_on(&mut eng, &basis, &inst.lhs, &inst.rhs) {
                    None => InstanceResult::pass(&inst.id),
                    Some(w) => InstanceResult::fail(&inst.id, w),
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Same as `check_instances` but comparing states built per instance.
pub fn compare_states(id: &str, ctx: &Context, lhs: &State, rhs: &State) -> InstanceResult {
    if lhs == rhs {
        InstanceResult::pass(id)
    } else {
        let diff = lhs.sub(rhs);
        let first = diff.terms.keys().next().cloned().unwrap_or_default();
        InstanceResult {
            id: id.to_string(),
            status: Status::Fail,
            witness: Some(format!("differs at {}", render_monomial(ctx, &first))),
            witness_depth: Some(first.depth()),
            lhs: Some(lhs.render(ctx)),
            rhs: Some(rhs.render(ctx)),
        }
    }
}

pub fn factor(g: Gen, mode: i32) -> Factor {
    Factor::new(g, mode)
}

pub fn monomial(fs: &[Factor]) -> Monomial {
    let mut v: SmallVec<[Factor; 4]> = SmallVec::from_slice(fs);
    v.sort();
    Monomial(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl3() -> Context {
        Context::single(3, Scalar::eps().div_hbar_pow(1))
    }

    #[test]
    fn template_on_vacuum_is_zero() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let t = SeriesTemplate { a: Gen::e(0, 1, 2), p: -1, b: Gen::e(0, 2, 1), q: 1 };
        let e = SeriesExpr::template(Scalar::one(), t);
        assert!(eng.series_act(&e, &State::vacuum()).is_zero());
    }

    #[test]
    fn template_single_term_survives() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let t = SeriesTemplate { a: Gen::e(0, 1, 2), p: -1, b: Gen::e(0, 2, 1), q: 1 };
        let e = SeriesExpr::template(Scalar::one(), t);
        let st = eng.state_of(&[Factor::new(Gen::e(0, 1, 2), -1)]);
        // only s=0: E21 t kills E12[-1] up to the central-free bracket E22-E11 at mode 0
        let got = eng.series_act(&e, &st);
        let inner = eng.act(Gen::e(0, 2, 1), 1, &st);
        let want = eng.act(Gen::e(0, 1, 2), -1, &inner);
        assert_eq!(got, want);
    }

    #[test]
    fn finite_part_matches_composition() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let w = [Factor::new(Gen::e(0, 1, 2), 0), Factor::new(Gen::e(0, 2, 3), -1)];
        let e = SeriesExpr::word(Scalar::one(), &w);
        let st = eng.state_of(&[Factor::new(Gen::e(0, 3, 1), -1)]);
        assert_eq!(eng.series_act(&e, &st), eng.act_word(&w, &st));
    }

    #[test]
    fn state_mode_recovers_state() {
        let ctx = gl3();
        let mut eng = Engine::new(&ctx);
        let st = eng.state_of(&[Factor::new(Gen::e(0, 1, 2), -1), Factor::new(Gen::e(0, 2, 1), -1)]);
        let e = state_mode(&ctx, &st, -1).unwrap();
        assert_eq!(eng.series_act(&e, &State::vacuum()), st);
    }
}
