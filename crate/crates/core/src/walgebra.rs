//! The W-algebra side: generators W⁽¹⁾, W⁽²⁾ as states (in V^κ(𝔟) and
//! through the Miura map), their modes in ⊗_s U(ĝl(q_s)), the odd
//! differential d₀ and the OPE products of W⁽¹⁾ with W⁽²⁾.

use crate::loopalg::Pyramid;
use crate::report::InstanceResult;
use crate::scalar::Scalar;
use crate::series::{compare_states, state_mode, SeriesExpr, SeriesTemplate};
use crate::vacuum::{basis_enum, Context, Engine, Factor, Gen, SlotSpec, State};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WError {
    #[error("{0} is outside the admissible index range")]
    Range(String),
    #[error("no mode expansion for {0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WKind {
    W1,
    W2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WLabel {
    pub kind: WKind,
    pub p: usize,
    pub q: usize,
}

impl WLabel {
    pub fn w1(p: usize, q: usize) -> Self {
        WLabel { kind: WKind::W1, p, q }
    }

    pub fn w2(p: usize, q: usize) -> Self {
        WLabel { kind: WKind::W2, p, q }
    }
}

impl std::fmt::Display for WLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let k = match self.kind {
            WKind::W1 => 1,
            WKind::W2 => 2,
        };
        write!(f, "W{k}[{},{}]", self.p, self.q)
    }
}

/// q_Max − q_Min, measured from the pyramid's top row.
pub fn offset(pyr: &Pyramid) -> usize {
    pyr.top() - pyr.q_min()
}

pub fn admissible(pyr: &Pyramid, g: WLabel) -> bool {
    let top = pyr.top();
    let l = pyr.len();
    let off = offset(pyr);
    let inside = |x: usize| x >= 1 && x <= top;
    if !inside(g.p) || !inside(g.q) {
        return false;
    }
    match g.kind {
        WKind::W1 => {
            (g.p > off && g.q > top - pyr.height(l)) || (g.p > top - pyr.height(1) && g.q > off)
        }
        WKind::W2 => g.p > off && g.q > off,
    }
}

pub fn labels(pyr: &Pyramid, kind: WKind) -> Vec<WLabel> {
    let mut out = Vec::new();
    for p in 1..=pyr.top() {
        for q in 1..=pyr.top() {
            let g = WLabel { kind, p, q };
            if admissible(pyr, g) {
                out.push(g);
            }
        }
    }
    out
}

fn check(pyr: &Pyramid, g: WLabel) -> Result<(), WError> {
    if admissible(pyr, g) {
        Ok(())
    } else {
        Err(WError::Range(g.to_string()))
    }
}

/// ⊗_s V^{κ_s}(gl(q_s)): slot s−1 has rank q_s and level α_s.
pub fn miura_context(pyr: &Pyramid) -> Context {
    Context::slots(
        (1..=pyr.len())
            .map(|s| SlotSpec { rank: pyr.height(s), level: pyr.alpha(s) })
            .collect(),
    )
}

/// e^{(r)}_{a,b}: the matrix unit of gl(q_r) in rows a, b (counted from the
/// pyramid's top), or None outside column r.
pub fn e_r(pyr: &Pyramid, r: usize, a: usize, b: usize) -> Option<Gen> {
    let floor = pyr.row_floor(r);
    let top = pyr.top();
    if a > floor && b > floor && a <= top && b <= top {
        Some(Gen::e(r - 1, a - floor, b - floor))
    } else {
        None
    }
}

/// e_{i,j} of 𝔟 for boxes in columns (ci, cj) and rows (a, b).
fn e_box(pyr: &Pyramid, ci: usize, a: usize, cj: usize, b: usize) -> Option<Gen> {
    let i = pyr.box_at(ci, a)?;
    let j = pyr.box_at(cj, b)?;
    pyr.in_b(i, j).then(|| Gen::e(0, i, j))
}

/// μ̃(W⁽¹⁾_{a,b}) as the list Σ_r e^{(r)}_{a,b}.
pub fn w1_gens(pyr: &Pyramid, a: usize, b: usize) -> Vec<Gen> {
    (1..=pyr.len()).filter_map(|r| e_r(pyr, r, a, b)).collect()
}

/// A deliberate change γ_col ↦ γ_col + delta, for mutation tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaShift {
    pub col: usize,
    pub delta: Scalar,
}

pub(crate) fn gamma(pyr: &Pyramid, r: usize, shift: Option<&GammaShift>) -> Scalar {
    match shift {
        Some(g) if g.col == r => &pyr.gamma(r) + &g.delta,
        _ => pyr.gamma(r),
    }
}

/// Terms of μ(W⁽²⁾_{p,q}) as (coefficient, word).
fn mu_w2_terms(pyr: &Pyramid, p: usize, q: usize, shift: Option<&GammaShift>) -> Vec<(Scalar, Vec<Factor>)> {
    let l = pyr.len();
    let top = pyr.top();
    let off = offset(pyr);
    let mut out = Vec::new();
    for r in 1..=l {
        if let Some(g) = e_r(pyr, r, p, q) {
            out.push((-gamma(pyr, r, shift), vec![Factor::new(g, -2)]));
        }
    }
    for r1 in 1..=l {
        for r2 in 1..=l {
            let (lo, hi) = if r1 < r2 {
                (off + 1, top)
            } else {
                (top - pyr.height(r1).min(pyr.height(r2)) + 1, off)
            };
            let c = if r1 < r2 { Scalar::one() } else { Scalar::int(-1) };
            for u in lo..=hi {
                if let (Some(x), Some(y)) = (e_r(pyr, r1, u, q), e_r(pyr, r2, p, u)) {
                    out.push((c.clone(), vec![Factor::new(x, -1), Factor::new(y, -1)]));
                }
            }
        }
    }
    out
}

/// μ(W) as a state of ⊗_s V^{κ_s}(gl(q_s)).
pub fn mu_state(pyr: &Pyramid, g: WLabel) -> Result<State, WError> {
    mu_state_shifted(pyr, g, None)
}

pub fn mu_state_shifted(pyr: &Pyramid, g: WLabel, shift: Option<&GammaShift>) -> Result<State, WError> {
    check(pyr, g)?;
    let ctx = miura_context(pyr);
    let mut eng = Engine::new(&ctx);
    let mut out = State::zero();
    match g.kind {
        WKind::W1 => {
            for x in w1_gens(pyr, g.p, g.q) {
                out.add_term(crate::series::monomial(&[Factor::new(x, -1)]), &Scalar::one());
            }
        }
        WKind::W2 => {
            for (c, w) in mu_w2_terms(pyr, g.p, g.q, shift) {
                let st = eng.state_of(&w);
                out.add_scaled(&st, &c);
            }
        }
    }
    Ok(out)
}

/// W as a state of V^κ(𝔟): the Miura terms with e^{(r)}_{a,b} read as
/// e_{i,j} (col i = col j = r), plus Σ e_{i,j}[−1] over col(i) = col(j)+1
/// for W⁽²⁾.
pub fn b_state(pyr: &Pyramid, g: WLabel) -> Result<State, WError> {
    b_state_shifted(pyr, g, None)
}

pub fn b_state_shifted(pyr: &Pyramid, g: WLabel, shift: Option<&GammaShift>) -> Result<State, WError> {
    check(pyr, g)?;
    let ctx = Context::superalgebra(pyr.clone());
    let mut eng = Engine::new(&ctx);
    let l = pyr.len();
    let lift = |x: Gen| -> Gen {
        let r = x.slot as usize + 1;
        let floor = pyr.row_floor(r);
        e_box(pyr, r, x.i as usize + floor, r, x.j as usize + floor).expect("diagonal block lies in b")
    };
    let mut out = State::zero();
    match g.kind {
        WKind::W1 => {
            for x in w1_gens(pyr, g.p, g.q) {
                out.add_scaled(&eng.state_of(&[Factor::new(lift(x), -1)]), &Scalar::one());
            }
        }
        WKind::W2 => {
            for c in 1..l {
                if let Some(x) = e_box(pyr, c + 1, g.p, c, g.q) {
                    out.add_scaled(&eng.state_of(&[Factor::new(x, -1)]), &Scalar::one());
                }
            }
            for (c, w) in mu_w2_terms(pyr, g.p, g.q, shift) {
                let lw: Vec<Factor> = w.iter().map(|f| Factor::new(lift(f.gen), f.mode)).collect();
                out.add_scaled(&eng.state_of(&lw), &c);
            }
        }
    }
    Ok(out)
}

/// μ̃(W t^s): any s for W⁽¹⁾, s = 1 for W⁽²⁾ (the explicit expansion, with
/// each sum over s ∈ ℤ stored as two templates).
pub fn mu_mode(pyr: &Pyramid, g: WLabel, s: i32) -> Result<SeriesExpr, WError> {
    mu_mode_shifted(pyr, g, s, None)
}

pub fn mu_mode_shifted(pyr: &Pyramid, g: WLabel, s: i32, shift: Option<&GammaShift>) -> Result<SeriesExpr, WError> {
    check(pyr, g)?;
    let one = Scalar::one();
    let mut e = SeriesExpr::zero();
    match (g.kind, s) {
        (WKind::W1, _) => {
            for x in w1_gens(pyr, g.p, g.q) {
                e.add_word(&one, &[Factor::new(x, s)]);
            }
        }
        (WKind::W2, 1) => {
            let (i, j) = (g.p, g.q);
            let l = pyr.len();
            let top = pyr.top();
            let off = offset(pyr);
            let neg = Scalar::int(-1);
            for r in 1..=l {
                if let Some(x) = e_r(pyr, r, i, j) {
                    e.add_word(&gamma(pyr, r, shift), &[Factor::new(x, 0)]);
                }
            }
            // Σ_{s∈ℤ} x t^{−s} y t^{s} with x, y in different slots
            let full = |e: &mut SeriesExpr, c: &Scalar, x: Gen, y: Gen| {
                e.add_template(c, SeriesTemplate { a: x, p: 0, b: y, q: 0 });
                e.add_template(c, SeriesTemplate { a: y, p: -1, b: x, q: 1 });
            };
            for r1 in 1..=l {
                for r2 in r1 + 1..=l {
                    for u in off + 1..=top {
                        if let (Some(x), Some(y)) = (e_r(pyr, r1, u, j), e_r(pyr, r2, i, u)) {
                            full(&mut e, &one, x, y);
                        }
                    }
                    let lo = top - pyr.height(r1).min(pyr.height(r2)) + 1;
                    for u in lo..=off {
                        if let (Some(x), Some(y)) = (e_r(pyr, r1, i, u), e_r(pyr, r2, u, j)) {
                            full(&mut e, &neg, x, y);
                        }
                    }
                }
            }
            for r in 1..=l {
                for u in 1..=off {
                    if let (Some(x), Some(y)) = (e_r(pyr, r, u, j), e_r(pyr, r, i, u)) {
                        e.add_template(&neg, SeriesTemplate { a: x, p: -1, b: y, q: 1 });
                        e.add_template(&neg, SeriesTemplate { a: y, p: 0, b: x, q: 0 });
                    }
                }
            }
        }
        _ => return Err(WError::Unsupported(format!("{g} t^{s}"))),
    }
    Ok(e)
}

/// d₀(e_{i,j}[−1]|0⟩) in V^{κ̃}(𝔞).
pub fn d0_generator(pyr: &Pyramid, eng: &mut Engine, i: usize, j: usize) -> State {
    let n = pyr.n();
    let (ci, cj) = (pyr.col(i), pyr.col(j));
    let one = Scalar::one();
    let mut out = State::zero();
    for r in 1..=n {
        let cr = pyr.col(r);
        if ci > cr && cr >= cj {
            let w = [Factor::new(Gen::e(0, r, j), -1), Factor::new(Gen::psi(i, r), -1)];
            out.add_scaled(&eng.state_of(&w), &one);
        }
        if cj < cr && cr <= ci {
            let w = [Factor::new(Gen::psi(r, j), -1), Factor::new(Gen::e(0, i, r), -1)];
            out.add_scaled(&eng.state_of(&w), &Scalar::int(-1));
        }
    }
    if ci > cj {
        out.add_scaled(&eng.state_of(&[Factor::new(Gen::psi(i, j), -2)]), &pyr.alpha(ci));
    }
    if let Some(h) = pyr.hat(i) {
        out.add_scaled(&eng.state_of(&[Factor::new(Gen::psi(h, j), -1)]), &one);
    }
    if let Some(t) = pyr.tilde(j) {
        out.add_scaled(&eng.state_of(&[Factor::new(Gen::psi(i, t), -1)]), &Scalar::int(-1));
    }
    out
}

/// d₀ as an odd derivation of every n-product: for a monomial u[m]·rest,
/// d₀(u[m] rest) = (d₀u)_{(m)} rest + (−1)^{|u|} u[m] d₀(rest), with
/// d₀(ψ) = 0 and d₀|0⟩ = 0.
pub fn d0_apply(pyr: &Pyramid, eng: &mut Engine, st: &State) -> State {
    let mut out = State::zero();
    for (mono, c) in &st.terms {
        let fs = mono.factors();
        for k in 0..fs.len() {
            let f = fs[k];
            if f.gen.is_odd() {
                continue;
            }
            let parity = fs[..k].iter().filter(|g| g.gen.is_odd()).count();
            let sign = if parity % 2 == 0 { 1 } else { -1 };
            let rest = State::basis(crate::vacuum::Monomial(fs[k + 1..].iter().copied().collect()));
            let du = d0_generator(pyr, eng, f.gen.i as usize, f.gen.j as usize);
            let mode = state_mode(eng.ctx, &du, f.mode).expect("d0 images are quadratic");
            let mut t = eng.series_act(&mode, &rest);
            for g in fs[..k].iter().rev() {
                t = eng.act(g.gen, g.mode, &t);
            }
            out.add_scaled(&t, &c.scale_int(sign));
        }
    }
    out
}

/// d₀(W) = 0 for every admissible W⁽¹⁾ and W⁽²⁾.
pub fn verify_d0_kernel(pyr: &Pyramid) -> Vec<InstanceResult> {
    verify_d0_kernel_shifted(pyr, None)
}

pub fn verify_d0_kernel_shifted(pyr: &Pyramid, shift: Option<&GammaShift>) -> Vec<InstanceResult> {
    let ctx = Context::superalgebra(pyr.clone());
    let mut eng = Engine::new(&ctx);
    let mut out = Vec::new();
    for kind in [WKind::W1, WKind::W2] {
        for g in labels(pyr, kind) {
            let st = b_state_shifted(pyr, g, shift).expect("admissible");
            let d = d0_apply(pyr, &mut eng, &st);
            out.push(compare_states(&g.to_string(), &ctx, &d, &State::zero()));
        }
    }
    out
}

/// d₀(d₀(b)) for every basis state b of V(𝔟) ⊂ V(𝔞) of depth ≤ `depth`;
/// reported, not asserted.
pub fn d0_square(pyr: &Pyramid, depth: u32) -> Vec<InstanceResult> {
    let ctx = Context::superalgebra(pyr.clone());
    let mut eng = Engine::new(&ctx);
    basis_enum(&ctx, depth)
        .into_iter()
        .filter(|m| m.factors().iter().all(|f| !f.gen.is_odd()))
        .map(|m| {
            let id = crate::vacuum::render_monomial(&ctx, &m);
            let once = d0_apply(pyr, &mut eng, &State::basis(m));
            let twice = d0_apply(pyr, &mut eng, &once);
            compare_states(&id, &ctx, &twice, &State::zero())
        })
        .collect()
}

/// (W⁽¹⁾_{i,j})_{(r)} W⁽²⁾_{p,q}, computed as μ̃(W⁽¹⁾_{i,j}t^r) on μ(W⁽²⁾).
pub fn ope_product(pyr: &Pyramid, r: i32, ij: (usize, usize), pq: (usize, usize)) -> Result<State, WError> {
    let ctx = miura_context(pyr);
    let mut eng = Engine::new(&ctx);
    let w2 = mu_state(pyr, WLabel::w2(pq.0, pq.1))?;
    let m = mu_mode(pyr, WLabel::w1(ij.0, ij.1), r)?;
    Ok(eng.series_act(&m, &w2))
}

/// Index quadruples covered by the W⁽¹⁾ OPE check.
pub fn ope_quadruples(pyr: &Pyramid) -> Vec<(usize, usize, usize, usize)> {
    let off = offset(pyr);
    let mut out = Vec::new();
    for w1 in labels(pyr, WKind::W1) {
        let (i, j) = (w1.p, w1.q);
        let mixed = (i <= off && j > off) || (i > off && j <= off);
        if !mixed {
            continue;
        }
        for w2 in labels(pyr, WKind::W2) {
            let (p, q) = (w2.p, w2.q);
            if i != q && j != p {
                out.push((i, j, p, q));
            }
        }
    }
    out
}

/// Expected right-hand sides for r = 0, 1 and r ≥ 2, as states.
fn ope_rhs(pyr: &Pyramid, eng: &mut Engine, r: i32, (i, j, p, q): (usize, usize, usize, usize)) -> State {
    let off = offset(pyr);
    let lower = i <= off && j > off;
    let upper = i > off && j <= off;
    match r {
        0 => {
            let sign = if lower { 1 } else if upper { -1 } else { 0 };
            if sign == 0 {
                return State::zero();
            }
            let (Ok(a), Ok(b)) = (mu_mode(pyr, WLabel::w1(i, q), -1), mu_state(pyr, WLabel::w1(p, j))) else {
                return State::zero();
            };
            eng.series_act(&a, &b).scaled(&Scalar::int(sign))
        }
        1 if upper && p == q => mu_state(pyr, WLabel::w1(i, j)).map(|s| s.scaled(&Scalar::int(-1))).unwrap_or_default(),
        _ => State::zero(),
    }
}

/// The three product relations for every admissible quadruple, r ∈ {0,1,2,3}.
pub fn verify_ope_lemma(pyr: &Pyramid) -> Vec<InstanceResult> {
    let ctx = miura_context(pyr);
    let mut eng = Engine::new(&ctx);
    let mut out = Vec::new();
    for quad in ope_quadruples(pyr) {
        let (i, j, p, q) = quad;
        for r in 0..=3 {
            let id = format!("W1[{i},{j}]_({r})W2[{p},{q}]");
            let lhs = ope_product(pyr, r, (i, j), (p, q)).expect("admissible");
            let rhs = ope_rhs(pyr, &mut eng, r, quad);
            out.push(compare_states(&id, &ctx, &lhs, &rhs));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::op_eq_on_depth;
    use crate::series::Operator;

    fn p33() -> Pyramid {
        Pyramid::new(&[3, 3], 1).unwrap()
    }

    #[test]
    fn w1_range() {
        let p = Pyramid::new(&[4, 3], 1).unwrap();
        assert!(admissible(&p, WLabel::w1(1, 2)));
        assert!(!admissible(&p, WLabel::w1(2, 1)));
        assert!(!admissible(&p, WLabel::w2(1, 2)));
        assert!(matches!(mu_state(&p, WLabel::w1(2, 1)), Err(WError::Range(_))));
    }

    #[test]
    fn w2_has_gamma_terms() {
        let p = p33();
        let st = mu_state(&p, WLabel::w2(1, 1)).unwrap();
        let m = crate::series::monomial(&[Factor::new(Gen::e(0, 1, 1), -2)]);
        assert_eq!(st.terms.get(&m), Some(&-p.gamma(1)));
        // γ_2 is an empty sum for two columns
        assert!(p.gamma(2).is_zero());
        let m = crate::series::monomial(&[Factor::new(Gen::e(1, 1, 1), -2)]);
        assert_eq!(st.terms.get(&m), None);
    }

    #[test]
    fn w1_mode_creates_state() {
        let p = Pyramid::new(&[4, 3], 1).unwrap();
        let ctx = miura_context(&p);
        let mut eng = Engine::new(&ctx);
        for g in labels(&p, WKind::W1) {
            let m = mu_mode(&p, g, -1).unwrap();
            assert_eq!(eng.series_act(&m, &State::vacuum()), mu_state(&p, g).unwrap());
        }
    }

    #[test]
    fn w2_mode_matches_state_modes() {
        for q in [[3, 3], [4, 3], [3, 4]] {
            let v = if q[0] < q[1] { 2 } else { 1 };
            let p = Pyramid::new(&q, v).unwrap();
            let ctx = miura_context(&p);
            for g in labels(&p, WKind::W2) {
                let st = mu_state(&p, g).unwrap();
                let want = Operator::series(state_mode(&ctx, &st, 1).unwrap());
                let got = Operator::series(mu_mode(&p, g, 1).unwrap());
                assert!(op_eq_on_depth(&ctx, &got, &want, 2).is_ok(), "{q:?} {g}");
            }
        }
    }

    #[test]
    fn w2_only_has_a_one_mode() {
        assert!(matches!(mu_mode(&p33(), WLabel::w2(1, 1), 0), Err(WError::Unsupported(_))));
    }

    #[test]
    fn d0_on_diagonal_generator() {
        let p = p33();
        let ctx = Context::superalgebra(p.clone());
        let mut eng = Engine::new(&ctx);
        let got = d0_generator(&p, &mut eng, 1, 2);
        // box 2 has no left neighbour and ψ_{1,5} is not in 𝔞
        assert!(!ctx.valid(&Gen::psi(1, 5)));
        let want = State::basis(crate::series::monomial(&[Factor::new(Gen::psi(4, 2), -1)]));
        assert_eq!(got, want);
        assert!(d0_apply(&p, &mut eng, &State::vacuum()).is_zero());
    }

    #[test]
    fn d0_commutes_with_translation() {
        let p = Pyramid::new(&[4, 3], 1).unwrap();
        let ctx = Context::superalgebra(p.clone());
        let mut eng = Engine::new(&ctx);
        for (i, j) in [(1, 2), (5, 1), (6, 3), (7, 7)] {
            let one = eng.state_of(&[Factor::new(Gen::e(0, i, j), -1)]);
            let two = eng.state_of(&[Factor::new(Gen::e(0, i, j), -2)]);
            let lhs = d0_apply(&p, &mut eng, &two);
            let d = d0_apply(&p, &mut eng, &one);
            assert_eq!(lhs, eng.translate(&d), "e[{i},{j}]");
        }
    }

    #[test]
    fn d0_kernel_detects_gamma_shift() {
        let p = Pyramid::new(&[4, 3], 1).unwrap();
        assert!(verify_d0_kernel(&p).iter().all(|r| r.passed()));
        let sh = GammaShift { col: 1, delta: Scalar::one() };
        let rs = verify_d0_kernel_shifted(&p, Some(&sh));
        let f: Vec<_> = rs.iter().filter(|r| !r.passed()).collect();
        assert!(!f.is_empty());
        assert!(f.iter().all(|r| r.id.starts_with("W2") && r.witness_depth.is_some_and(|d| d <= 2)));
    }
}
