//! The map Φ from the affine Yangian to the modes of the W-algebra, its
//! comparison with the iterated coproduct, the parabolic induction Δ_W and
//! the extended relations used for the compatibility of the two.

use crate::loopalg::Pyramid;
use crate::report::InstanceResult;
use crate::scalar::{Rat, Scalar};
use crate::series::{check_instances, compare_states, pair_series, state_mode, Instance, Operator, SeriesExpr, SeriesTemplate};
use crate::vacuum::{Context, Engine, Factor, Gen, State};
use crate::walgebra::{
    admissible, e_r, gamma, labels, miura_context, mu_mode, mu_mode_shifted, mu_state, offset, w1_gens, GammaShift, WKind,
    WLabel,
};
use crate::yangian::{delta_l, ev_shape, Coproduct, Derived, GlMap, YangError, YangImage};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParError {
    #[error("q_Min = {0} but the construction needs q_Min >= 3")]
    SmallMin(usize),
    #[error(transparent)]
    Yang(#[from] YangError),
    #[error("{0}")]
    Invalid(String),
}

fn check_min(pyr: &Pyramid) -> Result<(), ParError> {
    if pyr.q_min() < 3 {
        Err(ParError::SmallMin(pyr.q_min()))
    } else {
        Ok(())
    }
}

/// Sign conventions of Φ and of the evaluation parameters on the left side
/// of the comparison, plus mutation hooks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiOptions {
    /// Coefficient d of d·ħ W⁽¹⁾_{ii} W⁽¹⁾_{i+1,i+1} in Φ(H_{i,1}).
    pub ww: i64,
    /// Sign g in the evaluation parameters g·(γ_s − (q_s − q_Min)/2)ħ.
    pub param_sign: i64,
    pub shift: Option<GammaShift>,
}

impl Default for PhiOptions {
    fn default() -> Self {
        PhiOptions { ww: -1, param_sign: -1, shift: None }
    }
}

/// E_{a,b} ↦ μ̃(W⁽¹⁾_{off+a, off+b}) for 1 ≤ a,b ≤ q_Min.
pub fn w1_map(pyr: &Pyramid) -> GlMap {
    let off = offset(pyr);
    GlMap::new(pyr.q_min(), |a, b| w1_gens(pyr, off + a, off + b))
}

/// ε = ħ(k + N − q_Min).
pub fn main_eps(pyr: &Pyramid) -> Scalar {
    let c = &Scalar::k() + &Scalar::int(pyr.level_shift() + pyr.n() as i64 - pyr.q_min() as i64);
    &Scalar::hbar() * &c
}

/// μ̃∘Φ on X^±_{i,0} and H_{i,1}, in the Miura context of `pyr`.
pub fn phi(pyr: &Pyramid, opts: &PhiOptions) -> Result<(Context, YangImage), ParError> {
    let sh = opts.shift.as_ref();
    phi_with(pyr, opts, &|a| mu_mode_shifted(pyr, WLabel::w2(a, a), 1, sh).expect("diagonal W2 is admissible"))
}

/// Φ with the image of W⁽²⁾_{a,a}t supplied by `w2`.
pub fn phi_with(pyr: &Pyramid, opts: &PhiOptions, w2: &dyn Fn(usize) -> SeriesExpr) -> Result<(Context, YangImage), ParError> {
    check_min(pyr)?;
    let ctx = miura_context(pyr);
    let gl = Arc::new(w1_map(pyr));
    let mut center = Scalar::zero();
    for s in 1..=pyr.len() {
        center += &pyr.alpha(s);
    }
    let mut img = YangImage::from_gl(gl.clone(), main_eps(pyr), center);
    let off = offset(pyr);
    let mh = -Scalar::hbar();
    for i in 1..pyr.q_min() {
        let mut e = ev_shape(&gl, i, &Scalar::zero(), opts.ww);
        e.add_scaled(&w2(off + i), &mh);
        e.add_scaled(&w2(off + i + 1), &Scalar::hbar());
        img.h1[i] = Some(Operator::series(e));
    }
    Ok((ctx, img))
}

/// ⊗_s ev^{q_s, a_s}∘Σ∘Δˡ with ε = ħ(k + N − q_Min) and
/// a_s = g·(γ_s − (q_s − q_Min)/2)ħ.
pub fn hojo_lhs(pyr: &Pyramid, opts: &PhiOptions) -> Result<(Context, YangImage), ParError> {
    check_min(pyr)?;
    let qmin = pyr.q_min() as i64;
    let params: Vec<Scalar> = (1..=pyr.len())
        .map(|s| {
            let g = gamma(pyr, s, opts.shift.as_ref());
            let c = &g - &Scalar::rat(Rat::new(pyr.height(s) as i64 - qmin, 2));
            (&Scalar::hbar() * &c).scale_int(opts.param_sign)
        })
        .collect();
    let (ctx, img) = delta_l(pyr, &main_eps(pyr), &params)?;
    Ok((ctx, img))
}

/// Instances of the comparison: X^±_{j,0} for all j and H_{i,1} for 1 ≤ i < q_Min.
pub fn hojo_instances(lhs: &YangImage, rhs: &YangImage) -> Vec<Instance> {
    let mut out = Vec::new();
    for j in 0..lhs.n {
        out.push(Instance::new(format!("X+[{j}]"), lhs.xp[j].clone(), rhs.xp[j].clone()));
        out.push(Instance::new(format!("X-[{j}]"), lhs.xm[j].clone(), rhs.xm[j].clone()));
    }
    for i in 1..lhs.n {
        out.push(Instance::new(format!("H[{i},1]"), lhs.h1(i).clone(), rhs.h1(i).clone()));
    }
    out
}

/// Compare both sides at depth D. `opts.shift` perturbs the W-algebra side only.
pub fn verify_hojo(pyr: &Pyramid, depth: u32, opts: &PhiOptions) -> Result<Vec<InstanceResult>, ParError> {
    let (ctx, lhs) = hojo_lhs(pyr, &PhiOptions { ww: -1, param_sign: opts.param_sign, shift: None })?;
    let (ctx2, rhs) = phi(pyr, opts)?;
    if ctx != ctx2 {
        return Err(ParError::Invalid("contexts of the two sides differ".into()));
    }
    Ok(check_instances(&ctx, &hojo_instances(&lhs, &rhs), depth))
}

/// The summands of both sides of the comparison for H_{i,1} with weakly
/// decreasing heights, in rows counted from the top: `ev_h[k]` is the k-th summand of
/// ⊗ev(Σ_s H^{(s)}), `ev_b` of ⊗ev(B_i), `ev_c` of ⊗ev(C_i) and `w2_part` of
/// ħμ̃(W⁽²⁾_{I,I}t) − ħμ̃(W⁽²⁾_{J,J}t), with I = q₁ − q_l + i, J = I + 1.
/// Index 0 is unused.
pub struct SplitTerms {
    pub ev_h: Vec<SeriesExpr>,
    pub ev_b: Vec<SeriesExpr>,
    pub ev_c: Vec<SeriesExpr>,
    pub w2_part: Vec<SeriesExpr>,
    /// Right-hand sides of the eight groupings.
    pub groups: Vec<SeriesExpr>,
    /// Right-hand sides of the two closing identities.
    pub closing: Vec<SeriesExpr>,
}

struct Terms<'a> {
    pyr: &'a Pyramid,
}

impl Terms<'_> {
    fn e(&self, r: usize, a: usize, b: usize) -> Option<Gen> {
        e_r(self.pyr, r, a, b)
    }

    /// c Σ_{s≥0} x t^{p−s} y t^{q+s}
    fn tpl(&self, out: &mut SeriesExpr, c: &Scalar, x: Option<Gen>, p: i32, y: Option<Gen>, q: i32) {
        if let (Some(x), Some(y)) = (x, y) {
            out.add_template(c, SeriesTemplate { a: x, p, b: y, q });
        }
    }

    /// c Σ_{s∈ℤ} x t^{−s} y t^{s}, x and y in different slots.
    fn zsum(&self, out: &mut SeriesExpr, c: &Scalar, x: Option<Gen>, y: Option<Gen>) {
        self.tpl(out, c, x, 0, y, 0);
        self.tpl(out, c, y, -1, x, 1);
    }

    fn word(&self, out: &mut SeriesExpr, c: &Scalar, w: &[Option<Gen>]) {
        if w.iter().all(|g| g.is_some()) {
            let fs: Vec<Factor> = w.iter().map(|g| Factor::new(g.unwrap(), 0)).collect();
            out.add_word(c, &fs);
        }
    }
}

fn decreasing(pyr: &Pyramid) -> bool {
    pyr.heights().windows(2).all(|w| w[0] >= w[1])
}

/// Build the summands for H_{i,1}. The evaluation parameters enter
/// through the first summand of `ev_h` exactly as used by `hojo_lhs`.
pub fn split_terms(pyr: &Pyramid, i: usize, opts: &PhiOptions) -> Result<SplitTerms, ParError> {
    check_min(pyr)?;
    if !decreasing(pyr) {
        return Err(ParError::Invalid("the term split needs weakly decreasing heights".into()));
    }
    if i == 0 || i >= pyr.q_min() {
        return Err(ParError::Invalid(format!("node {i} has no H_{{i,1}} image")));
    }
    let t = Terms { pyr };
    let l = pyr.len();
    let top = pyr.top();
    let ql = pyr.height(l);
    let q = |r: usize| pyr.height(r);
    let ii = top - ql + i;
    let jj = ii + 1;
    let h = Scalar::hbar();
    let mh = -&h;
    let z = || SeriesExpr::zero();
    let pairs: Vec<(usize, usize)> = (1..=l).flat_map(|a| (a + 1..=l).map(move |b| (a, b))).collect();
    let sh = opts.shift.as_ref();

    // ⊗ev of Σ_s H^{(s)}_{i+q_s−q_l}
    let mut ev_h = vec![z(); 7];
    for r in 1..=l {
        let g = gamma(pyr, r, sh);
        let a = (&h * &(&g - &Scalar::rat(Rat::new(q(r) as i64 - ql as i64, 2)))).scale_int(opts.param_sign);
        let lin = &a - &h.scale(Rat::new((i + q(r) - ql) as i64, 2));
        t.word(&mut ev_h[1], &lin, &[t.e(r, ii, ii)]);
        t.word(&mut ev_h[1], &-&lin, &[t.e(r, jj, jj)]);
        t.word(&mut ev_h[2], &mh, &[t.e(r, ii, ii), t.e(r, jj, jj)]);
        for u in top - q(r) + 1..=ii {
            t.tpl(&mut ev_h[3], &h, t.e(r, ii, u), 0, t.e(r, u, ii), 0);
            t.tpl(&mut ev_h[5], &mh, t.e(r, jj, u), 0, t.e(r, u, jj), 0);
        }
        for u in ii + 1..=top {
            t.tpl(&mut ev_h[4], &h, t.e(r, ii, u), -1, t.e(r, u, ii), 1);
            t.tpl(&mut ev_h[6], &mh, t.e(r, jj, u), -1, t.e(r, u, jj), 1);
        }
    }

    // ⊗ev(B_i)
    let mut ev_b = vec![z(); 11];
    for &(r1, r2) in &pairs {
        t.word(&mut ev_b[1], &mh, &[t.e(r1, ii, ii), t.e(r2, jj, jj)]);
        t.word(&mut ev_b[2], &mh, &[t.e(r1, jj, jj), t.e(r2, ii, ii)]);
        let lo = top - q(r2) + 1;
        for u in lo..=ii {
            t.tpl(&mut ev_b[3], &mh, t.e(r1, u, ii), -1, t.e(r2, ii, u), 1);
            t.tpl(&mut ev_b[4], &h, t.e(r1, ii, u), 0, t.e(r2, u, ii), 0);
            t.tpl(&mut ev_b[7], &h, t.e(r1, u, jj), -1, t.e(r2, jj, u), 1);
            t.tpl(&mut ev_b[8], &mh, t.e(r1, jj, u), 0, t.e(r2, u, jj), 0);
        }
        for u in jj..=top {
            t.tpl(&mut ev_b[5], &mh, t.e(r1, u, ii), 0, t.e(r2, ii, u), 0);
            t.tpl(&mut ev_b[6], &h, t.e(r1, ii, u), -1, t.e(r2, u, ii), 1);
            t.tpl(&mut ev_b[9], &h, t.e(r1, u, jj), 0, t.e(r2, jj, u), 0);
            t.tpl(&mut ev_b[10], &mh, t.e(r1, jj, u), -1, t.e(r2, u, jj), 1);
        }
    }

    // ⊗ev(C_i)
    let mut ev_c = vec![z(); 7];
    for r in 1..=l {
        for u in top - q(r) + 1..=top - ql {
            t.tpl(&mut ev_c[1], &h, t.e(r, u, ii), -1, t.e(r, ii, u), 1);
            t.tpl(&mut ev_c[2], &mh, t.e(r, u, jj), -1, t.e(r, jj, u), 1);
        }
    }
    for &(r1, r2) in &pairs {
        for u in top - q(r2) + 1..=top - ql {
            t.tpl(&mut ev_c[3], &h, t.e(r1, u, ii), -1, t.e(r2, ii, u), 1);
            t.tpl(&mut ev_c[4], &mh, t.e(r1, u, jj), -1, t.e(r2, jj, u), 1);
            t.tpl(&mut ev_c[5], &h, t.e(r2, u, ii), -1, t.e(r1, ii, u), 1);
            t.tpl(&mut ev_c[6], &mh, t.e(r2, u, jj), -1, t.e(r1, jj, u), 1);
        }
    }

    // ħμ̃(W⁽²⁾_{I,I}t) − ħμ̃(W⁽²⁾_{J,J}t)
    let mut w2_part = vec![z(); 11];
    for r in 1..=l {
        let g = gamma(pyr, r, sh);
        t.word(&mut w2_part[1], &(&h * &g), &[t.e(r, ii, ii)]);
        t.word(&mut w2_part[6], &(&mh * &g), &[t.e(r, jj, jj)]);
        for u in top - q(r) + 1..=top - ql {
            t.tpl(&mut w2_part[3], &mh, t.e(r, u, ii), -1, t.e(r, ii, u), 1);
            t.tpl(&mut w2_part[4], &mh, t.e(r, ii, u), 0, t.e(r, u, ii), 0);
            t.tpl(&mut w2_part[8], &h, t.e(r, u, jj), -1, t.e(r, jj, u), 1);
            t.tpl(&mut w2_part[9], &h, t.e(r, jj, u), 0, t.e(r, u, jj), 0);
        }
    }
    for &(r1, r2) in &pairs {
        for u in top - ql + 1..=top {
            t.zsum(&mut w2_part[2], &h, t.e(r1, u, ii), t.e(r2, ii, u));
            t.zsum(&mut w2_part[7], &mh, t.e(r1, u, jj), t.e(r2, jj, u));
        }
        for u in top - q(r2) + 1..=top - ql {
            t.zsum(&mut w2_part[5], &mh, t.e(r1, ii, u), t.e(r2, u, ii));
            t.zsum(&mut w2_part[10], &h, t.e(r1, jj, u), t.e(r2, u, jj));
        }
    }

    // right-hand sides of the eight groupings
    let mut groups = vec![z(); 9];
    let half_i = h.scale(Rat::new(i as i64, 2));
    for r in 1..=l {
        t.word(&mut groups[1], &-&half_i, &[t.e(r, ii, ii)]);
        t.word(&mut groups[1], &half_i, &[t.e(r, jj, jj)]);
        for r2 in 1..=l {
            t.word(&mut groups[2], &mh, &[t.e(r, ii, ii), t.e(r2, jj, jj)]);
        }
        for u in top - ql + 1..=ii {
            t.tpl(&mut groups[3], &h, t.e(r, ii, u), 0, t.e(r, u, ii), 0);
            t.tpl(&mut groups[4], &mh, t.e(r, jj, u), 0, t.e(r, u, jj), 0);
        }
        for u in ii + 1..=top {
            t.tpl(&mut groups[3], &h, t.e(r, ii, u), -1, t.e(r, u, ii), 1);
            t.tpl(&mut groups[4], &mh, t.e(r, jj, u), -1, t.e(r, u, jj), 1);
        }
    }
    for &(r1, r2) in &pairs {
        for u in top - ql + 1..=ii {
            t.tpl(&mut groups[5], &h, t.e(r2, ii, u), 0, t.e(r1, u, ii), 0);
            t.tpl(&mut groups[6], &h, t.e(r1, ii, u), 0, t.e(r2, u, ii), 0);
            t.tpl(&mut groups[7], &mh, t.e(r2, jj, u), 0, t.e(r1, u, jj), 0);
            t.tpl(&mut groups[8], &mh, t.e(r1, jj, u), 0, t.e(r2, u, jj), 0);
        }
        for u in ii + 1..=top {
            t.tpl(&mut groups[5], &h, t.e(r2, ii, u), -1, t.e(r1, u, ii), 1);
            t.tpl(&mut groups[6], &h, t.e(r1, ii, u), -1, t.e(r2, u, ii), 1);
            t.tpl(&mut groups[7], &mh, t.e(r2, jj, u), -1, t.e(r1, u, jj), 1);
            t.tpl(&mut groups[8], &mh, t.e(r1, jj, u), -1, t.e(r2, u, jj), 1);
        }
    }

    // the W⁽¹⁾ series of Φ(H_{i,1}), split by the row i and i+1 parts
    let gl = w1_map(pyr);
    let n = gl.n();
    let mut closing = vec![z(); 2];
    for (k, (row, c)) in [(i, &h), (i + 1, &mh)].into_iter().enumerate() {
        for u in 1..=n {
            let (p, q) = if u <= i { (0, 0) } else { (-1, 1) };
            closing[k].add_scaled(&pair_series(c, gl.get(row, u), p, gl.get(u, row), q), &Scalar::one());
        }
    }
    Ok(SplitTerms { ev_h, ev_b, ev_c, w2_part, groups, closing })
}

fn sum_of(parts: &[&SeriesExpr]) -> Operator {
    let mut e = SeriesExpr::zero();
    for p in parts {
        e.add_scaled(p, &Scalar::one());
    }
    Operator::series(e)
}

/// Check that the summands reassemble the two sides and that each of
/// the eight groupings and the two closing identities balance.
pub fn diagnose_hojo(pyr: &Pyramid, i: usize, depth: u32, opts: &PhiOptions) -> Result<Vec<InstanceResult>, ParError> {
    let pt = split_terms(pyr, i, opts)?;
    let (ctx, lhs) = hojo_lhs(pyr, opts)?;
    let (a, b, c, d) = (&pt.ev_h, &pt.ev_b, &pt.ev_c, &pt.w2_part);
    let off = offset(pyr);
    let mut w2 = mu_mode_shifted(pyr, WLabel::w2(off + i, off + i), 1, opts.shift.as_ref()).expect("admissible");
    w2.add_scaled(
        &mu_mode_shifted(pyr, WLabel::w2(off + i + 1, off + i + 1), 1, opts.shift.as_ref()).expect("admissible"),
        &Scalar::int(-1),
    );
    let w2 = Operator::series(w2).scale(&Scalar::hbar());
    let all_lhs: Vec<&SeriesExpr> = a[1..].iter().chain(&b[1..]).chain(&c[1..]).collect();
    let g = &pt.groups;
    let mut inst = vec![
        Instance::new("terms/ev-side", sum_of(&all_lhs), lhs.h1(i).clone()),
        Instance::new("terms/w2-side", sum_of(&d[1..].iter().collect::<Vec<_>>()), w2),
        Instance::new("group1", sum_of(&[&a[1], &d[1], &d[6]]), sum_of(&[&g[1]])),
        Instance::new("group2", sum_of(&[&a[2], &b[1], &b[2]]), sum_of(&[&g[2]])),
        Instance::new("group3", sum_of(&[&a[3], &a[4], &c[1], &d[3], &d[4]]), sum_of(&[&g[3]])),
        Instance::new("group4", sum_of(&[&a[5], &a[6], &c[2], &d[8], &d[9]]), sum_of(&[&g[4]])),
        Instance::new("group5", sum_of(&[&b[3], &b[5], &c[3], &d[2]]), sum_of(&[&g[5]])),
        Instance::new("group6", sum_of(&[&b[4], &b[6], &c[5], &d[5]]), sum_of(&[&g[6]])),
        Instance::new("group7", sum_of(&[&b[7], &b[9], &c[4], &d[7]]), sum_of(&[&g[7]])),
        Instance::new("group8", sum_of(&[&b[8], &b[10], &c[6], &d[10]]), sum_of(&[&g[8]])),
        Instance::new("closing/i", sum_of(&[&g[3], &g[5], &g[6]]), sum_of(&[&pt.closing[0]])),
        Instance::new("closing/i+1", sum_of(&[&g[4], &g[7], &g[8]]), sum_of(&[&pt.closing[1]])),
    ];
    for x in &mut inst {
        x.id = format!("H[{i},1]/{}", x.id);
    }
    Ok(check_instances(&ctx, &inst, depth))
}

/// A parabolic split of the pyramid after column w: the left part carries
/// columns 1..=w at level k + N₂, the right part columns w+1..=l at level
/// k + N₁. Both keep the parent's row labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub parent: Pyramid,
    pub w: usize,
    pub left: Pyramid,
    pub right: Pyramid,
}

impl SplitSpec {
    pub fn new(parent: &Pyramid, w: usize) -> Result<Self, ParError> {
        let l = parent.len();
        if w == 0 || w >= l {
            return Err(ParError::Invalid(format!("split point {w} must lie in 1..{l}")));
        }
        let q = parent.heights();
        let n1: usize = q[..w].iter().sum();
        let n2: usize = q[w..].iter().sum();
        let v = parent.pivot();
        let bad = |e: crate::loopalg::AlgebraError| ParError::Invalid(e.to_string());
        let top = Some(parent.top());
        let left = Pyramid::build(&q[..w], v.min(w), top, parent.level_shift() + n2 as i64).map_err(bad)?;
        let right = Pyramid::build(&q[w..], v.saturating_sub(w), top, parent.level_shift() + n1 as i64).map_err(bad)?;
        Ok(SplitSpec { parent: parent.clone(), w, left, right })
    }

    /// The shifted levels reproduce the parent's α_s column by column.
    pub fn alphas_match(&self) -> bool {
        (1..=self.w).all(|s| self.left.alpha(s) == self.parent.alpha(s))
            && (1..=self.right.len()).all(|s| self.right.alpha(s) == self.parent.alpha(self.w + s))
    }
}

/// One tensor term of Δ_W. Labels of the left and right factors are read in
/// the respective sub-pyramid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WTerm {
    /// g ⊗ 1
    Left(WLabel),
    /// 1 ⊗ g
    Right(WLabel),
    /// ∂g ⊗ 1
    DerLeft(WLabel),
    /// (a)_{(−1)}b ⊗ 1
    NopLeft(WLabel, WLabel),
    /// 1 ⊗ (a)_{(−1)}b
    NopRight(WLabel, WLabel),
    /// a ⊗ b
    Tensor(WLabel, WLabel),
}

impl std::fmt::Display for WTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WTerm::Left(g) => write!(f, "{g}⊗1"),
            WTerm::Right(g) => write!(f, "1⊗{g}"),
            WTerm::DerLeft(g) => write!(f, "∂{g}⊗1"),
            WTerm::NopLeft(a, b) => write!(f, "({a})_(-1){b}⊗1"),
            WTerm::NopRight(a, b) => write!(f, "1⊗({a})_(-1){b}"),
            WTerm::Tensor(a, b) => write!(f, "{a}⊗{b}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TensorExpr {
    pub terms: Vec<(Scalar, WTerm)>,
}

impl TensorExpr {
    fn push(&mut self, c: Scalar, t: WTerm) {
        self.terms.push((c, t));
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self.terms.iter().map(|(c, t)| format!("({c}){t}")).collect();
        parts.join(" + ")
    }
}

/// Conventions of Δ_W(W⁽²⁾) plus a mutation hook.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaWOptions {
    /// Sign of Σ_{u>q_Max−q_Min} W⁽¹⁾_{u,j} ⊗ W⁽¹⁾_{i,u}.
    pub cross_sign: i64,
    /// Added to γ_w in the −γ_w ∂W⁽¹⁾ ⊗ 1 term.
    pub gamma_delta: Option<Scalar>,
}

impl Default for DeltaWOptions {
    fn default() -> Self {
        DeltaWOptions { cross_sign: 1, gamma_delta: None }
    }
}

pub fn delta_w_image(split: &SplitSpec, g: WLabel, opts: &DeltaWOptions) -> Result<TensorExpr, ParError> {
    let p = &split.parent;
    if !admissible(p, g) {
        return Err(ParError::Invalid(format!("{g} is outside the admissible index range")));
    }
    let mut out = TensorExpr::default();
    let one = Scalar::one();
    let (i, j) = (g.p, g.q);
    out.push(one.clone(), WTerm::Left(g));
    out.push(one.clone(), WTerm::Right(g));
    if g.kind == WKind::W1 {
        return Ok(out);
    }
    let w = split.w;
    let l = p.len();
    let top = p.top();
    let off = offset(p);
    let q = |s: usize| p.height(s);
    let mut gw = p.gamma(w);
    if let Some(d) = &opts.gamma_delta {
        gw += d;
    }
    out.push(-gw, WTerm::DerLeft(WLabel::w1(i, j)));
    let neg = Scalar::int(-1);
    if q(1) >= q(l) {
        for u in top - q(1).min(q(w)) + 1..=off {
            out.push(neg.clone(), WTerm::NopLeft(WLabel::w1(u, j), WLabel::w1(i, u)));
        }
    } else {
        for u in top - q(w + 1).min(q(l)) + 1..=off {
            out.push(neg.clone(), WTerm::NopRight(WLabel::w1(u, j), WLabel::w1(i, u)));
        }
    }
    for u in off + 1..=top {
        out.push(Scalar::int(opts.cross_sign), WTerm::Tensor(WLabel::w1(u, j), WLabel::w1(i, u)));
    }
    for u in top - q(w).min(q(w + 1)) + 1..=off {
        out.push(neg.clone(), WTerm::Tensor(WLabel::w1(i, u), WLabel::w1(u, j)));
    }
    Ok(out)
}

fn shift_slots(st: &State, by: usize) -> State {
    let mut out = State::zero();
    for (m, c) in &st.terms {
        let fs: Vec<Factor> = m
            .factors()
            .iter()
            .map(|f| Factor::new(Gen { slot: f.gen.slot + by as u8, ..f.gen }, f.mode))
            .collect();
        out.add_term(crate::series::monomial(&fs), c);
    }
    out
}

fn w1_mode_in(pyr: &Pyramid, g: WLabel, by: usize, m: i32) -> SeriesExpr {
    let mut e = SeriesExpr::zero();
    for x in w1_gens(pyr, g.p, g.q) {
        e.add_word(&Scalar::one(), &[Factor::new(Gen { slot: x.slot + by as u8, ..x }, m)]);
    }
    e
}

/// (μ₁ ⊗ μ₂)(x) as a state of the parent's ⊗_s V^{κ_s}(gl(q_s)).
pub fn mu_tensor(split: &SplitSpec, x: &TensorExpr) -> Result<State, ParError> {
    let ctx = miura_context(&split.parent);
    let mut eng = Engine::new(&ctx);
    let w = split.w;
    // W⁽¹⁾ labels of the parent can fall outside a part's own range; the
    // slot sum Σ_r e^{(r)}[−1] is used there as everywhere else.
    let sub = |pyr: &Pyramid, g: WLabel, by: usize| -> Result<State, ParError> {
        let st = match g.kind {
            WKind::W1 => {
                let mut st = State::zero();
                for x in w1_gens(pyr, g.p, g.q) {
                    st.add_term(crate::series::monomial(&[Factor::new(x, -1)]), &Scalar::one());
                }
                st
            }
            WKind::W2 => mu_state(pyr, g).map_err(|e| ParError::Invalid(e.to_string()))?,
        };
        Ok(shift_slots(&st, by))
    };
    let (lp, rp) = (&split.left, &split.right);
    let mut out = State::zero();
    for (c, t) in &x.terms {
        let st = match *t {
            WTerm::Left(g) => sub(lp, g, 0)?,
            WTerm::Right(g) => sub(rp, g, w)?,
            WTerm::DerLeft(g) => eng.translate(&sub(lp, g, 0)?),
            WTerm::NopLeft(a, b) => eng.series_act(&w1_mode_in(lp, a, 0, -1), &sub(lp, b, 0)?),
            WTerm::NopRight(a, b) => eng.series_act(&w1_mode_in(rp, a, w, -1), &sub(rp, b, w)?),
            WTerm::Tensor(a, b) => eng.series_act(&w1_mode_in(lp, a, 0, -1), &sub(rp, b, w)?),
        };
        out.add_scaled(&st, c);
    }
    Ok(out)
}

/// μ = (μ₁ ⊗ μ₂)∘Δ_W on every W⁽¹⁾ and W⁽²⁾ generator: equality of states,
/// and of the modes t^{−1}, t^0, t (W⁽¹⁾) or t (W⁽²⁾) on states of depth ≤ D.
pub fn verify_miura_factorization(split: &SplitSpec, depth: u32, opts: &DeltaWOptions) -> Result<Vec<InstanceResult>, ParError> {
    let p = &split.parent;
    let ctx = miura_context(p);
    let mut out = Vec::new();
    for kind in [WKind::W1, WKind::W2] {
        for g in labels(p, kind) {
            let lhs = mu_state(p, g).expect("admissible");
            let rhs = mu_tensor(split, &delta_w_image(split, g, opts)?)?;
            out.push(compare_states(&format!("{g}/state"), &ctx, &lhs, &rhs));
            let modes: &[i32] = if kind == WKind::W1 { &[-1, 0, 1] } else { &[1] };
            let mut inst = Vec::new();
            for &m in modes {
                let a = Operator::series(mu_mode(p, g, m).expect("admissible"));
                let b = state_mode(&ctx, &rhs, m).map_err(|e| ParError::Invalid(e.to_string()))?;
                inst.push(Instance::new(format!("{g}/t^{m}"), a, Operator::series(b)));
            }
            out.extend(check_instances(&ctx, &inst, depth));
        }
    }
    Ok(out)
}

/// The two families of extra relations: R brackets with E_{v,n+j}t^x, L with
/// E_{n+j,v}t^{−x}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    L,
    R,
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "L" | "l" => Ok(Side::L),
            "R" | "r" => Ok(Side::R),
            _ => Err(format!("side must be L or R, got {s}")),
        }
    }
}

/// ab-series of the extended relations over gl(m+n_add) in slot 0. For side R
/// (the a-series): ħΣ_{s≥0} E_{v,n+i}t^{x−s−1}E_{n+i,n+j}t^{s+1} if j < i and
/// ħΣ_{s≥0} E_{v,n+i}t^{x−s}E_{n+i,n+j}t^s if j > i. For side L (the
/// b-series): ħΣ_{s≥0} E_{n+j,n+i}t^{−s−1}E_{n+i,v}t^{−x+s+1} if j < i and
/// ħΣ_{s≥0} E_{n+j,n+i}t^{−s}E_{n+i,v}t^{−x+s} if j > i. Zero for i = j.
pub fn ab_series(side: Side, m: usize, n_add: usize, i: usize, j: usize, v: usize, x: i32) -> Result<SeriesExpr, ParError> {
    if v == 0 || v > n_add || i == 0 || i > m || j == 0 || j > m {
        return Err(ParError::Invalid(format!("indices (i={i}, j={j}, v={v}) outside 1..={m} and 1..={n_add}")));
    }
    let h = Scalar::hbar();
    let e = |a: usize, b: usize| Gen::e(0, a, b);
    let n = n_add;
    let t = match (side, j.cmp(&i)) {
        (_, std::cmp::Ordering::Equal) => return Ok(SeriesExpr::zero()),
        (Side::R, std::cmp::Ordering::Less) => SeriesTemplate { a: e(v, n + i), p: x - 1, b: e(n + i, n + j), q: 1 },
        (Side::R, std::cmp::Ordering::Greater) => SeriesTemplate { a: e(v, n + i), p: x, b: e(n + i, n + j), q: 0 },
        (Side::L, std::cmp::Ordering::Less) => SeriesTemplate { a: e(n + j, n + i), p: -1, b: e(n + i, v), q: -x + 1 },
        (Side::L, std::cmp::Ordering::Greater) => SeriesTemplate { a: e(n + j, n + i), p: 0, b: e(n + i, v), q: -x },
    };
    Ok(SeriesExpr::template(h, t))
}

/// Constants of the extended relations. `literal()` is the uncorrected form;
/// the default is the form measured to hold (see the crate README).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtOptions {
    /// Overall sign of every b-series on side L.
    pub b_sign: i64,
    /// Sign of the ħ/2·E term of the affine-first relation relative to the
    /// uncorrected one.
    pub first_half_sign: i64,
    /// The E coefficient of the affine-last relation is (k_m ħ/2 + ε) with
    /// k_m = m + `last_half_shift`.
    pub last_half_shift: i64,
    /// Sign of the ab-part of the affine-last relation.
    pub last_ab_sign: i64,
    /// Sign of the E part of the affine-last relation (mutation hook).
    pub last_e_sign: i64,
}

impl ExtOptions {
    pub fn literal() -> Self {
        ExtOptions { b_sign: 1, first_half_sign: 1, last_half_shift: -1, last_ab_sign: -1, last_e_sign: 1 }
    }
}

impl Default for ExtOptions {
    fn default() -> Self {
        ExtOptions { b_sign: -1, first_half_sign: -1, last_half_shift: 1, last_ab_sign: -1, last_e_sign: 1 }
    }
}

/// ev^{m+n_add,0}∘Ψ^{m,m+n_add} on one ĝl(m+n_add) slot at level ε/ħ; the
/// rank m algebra then has parameter ε + n_add·ħ.
pub fn extended_source(m: usize, n_add: usize) -> Result<(Context, YangImage), ParError> {
    if m < 3 {
        return Err(ParError::SmallMin(m));
    }
    let ctx = crate::yangian::loop_context(m + n_add, 1);
    let inner = crate::yangian::ev(&ctx, 0, &Scalar::zero())?;
    let img = crate::yangian::psi(&inner, n_add)?;
    Ok((ctx, img))
}

pub fn extended_instances(side: Side, m: usize, n_add: usize, xmax: i32, opts: &ExtOptions) -> Result<Vec<Instance>, ParError> {
    let (_, img) = extended_source(m, n_add)?;
    let d = Derived::new(&img);
    let n = n_add;
    let e_eps = img.eps.clone();
    // E_{v,n+j}t^x for R, E_{n+j,v}t^{−x} for L
    let probe = |j: usize, v: usize, x: i32| -> Operator {
        match side {
            Side::R => Operator::mode(Gen::e(0, v, n + j), x),
            Side::L => Operator::mode(Gen::e(0, n + j, v), -x),
        }
    };
    let ab_sign = Scalar::int(if side == Side::L { opts.b_sign } else { 1 });
    let ab = |i: usize, j: usize, v: usize, x: i32| {
        Operator::series(ab_series(side, m, n, i, j, v, x).expect("in range")).scale(&ab_sign)
    };
    let br = |hs: &[usize], p: &Operator| Operator::sum(hs.iter().map(|&i| Operator::commutator(&d.ht[i], p)).collect());
    // the ħ/2 terms carry opposite signs on the two sides
    let s = match side {
        Side::R => 1,
        Side::L => -1,
    };
    let half = Scalar::hbar().scale(Rat::new(1, 2));
    let mut out = Vec::new();
    for x in -xmax..=xmax {
        for v in 1..=n {
            let tag = |name: &str, i: usize, j: usize| format!("{name}/i{i}/j{j}/v{v}/x{x}");
            for i in 1..m {
                for j in (1..=m).filter(|&j| j != i && j != i + 1) {
                    let rhs = ab(i, j, v, x).sub(&ab(i + 1, j, v, x));
                    out.push(Instance::new(tag("cartan", i, j), br(&[i], &probe(j, v, x)), rhs));
                }
            }
            for i in 2..m {
                let p = probe(i, v, x);
                let rhs = ab(i - 1, i, v, x).sub(&ab(i + 1, i, v, x)).sub(&p.scale(&half.scale_int(s)));
                out.push(Instance::new(tag("adjacent", i, i), br(&[i - 1, i], &p), rhs));
            }
            for j in 2..m {
                let rhs = ab(m, j, v, x).sub(&ab(1, j, v, x));
                out.push(Instance::new(tag("affine", 0, j), br(&[0], &probe(j, v, x)), rhs));
            }
            let p = probe(1, v, x);
            let rhs = ab(m, 1, v, x).sub(&ab(2, 1, v, x)).add(&p.scale(&half.scale_int(s * opts.first_half_sign)));
            out.push(Instance::new(tag("affine-first", 0, 1), br(&[0, 1], &p), rhs));
            let p = probe(m, v, x);
            let c = &half.scale_int(m as i64 + opts.last_half_shift) + &e_eps;
            let rhs = ab(1, m, v, x)
                .sub(&ab(m - 1, m, v, x))
                .scale(&Scalar::int(opts.last_ab_sign))
                .sub(&p.scale(&c.scale_int(s * opts.last_e_sign)));
            out.push(Instance::new(tag("affine-last", 0, m), br(&[0, m - 1], &p), rhs));
        }
    }
    Ok(out)
}

/// Every extended relation of one side for |x| ≤ `xmax` at depth D.
pub fn verify_extended_relations(side: Side, m: usize, n_add: usize, xmax: i32, depth: u32, opts: &ExtOptions) -> Result<Vec<InstanceResult>, ParError> {
    let (ctx, _) = extended_source(m, n_add)?;
    Ok(check_instances(&ctx, &extended_instances(side, m, n_add, xmax, opts)?, depth))
}

fn shift_gen(g: Gen, by: usize) -> Gen {
    Gen { slot: g.slot + by as u8, ..g }
}

fn shift_series(e: &SeriesExpr, by: usize) -> SeriesExpr {
    let mut out = SeriesExpr::zero();
    for (w, c) in &e.finite {
        let w: Vec<Factor> = w.iter().map(|f| Factor::new(shift_gen(f.gen, by), f.mode)).collect();
        out.add_word(c, &w);
    }
    for (t, c) in &e.templates {
        out.add_template(c, SeriesTemplate { a: shift_gen(t.a, by), b: shift_gen(t.b, by), ..*t });
    }
    out
}

/// Move a realization built from plain series onto slots shifted by `by`.
fn shift_image(img: &YangImage, by: usize) -> YangImage {
    let ser = |o: &Operator| Operator::series(shift_series(o.as_series().expect("series image"), by));
    let gl = img.gl();
    let n = gl.n();
    YangImage {
        n: img.n,
        eps: img.eps.clone(),
        xp: img.xp.iter().map(ser).collect(),
        xm: img.xm.iter().map(ser).collect(),
        h0: img.h0.iter().map(ser).collect(),
        h1: img.h1.iter().map(|h| h.as_ref().map(ser)).collect(),
        gl: Some(Arc::new(GlMap::new(n, |a, b| gl.get(a, b).iter().map(|&g| shift_gen(g, by)).collect()))),
        center: img.center.clone(),
    }
}

/// Δ^m on realizations of the rank m + n_add algebras in the two factors
/// (`left_big`, `right_big`, with matrix-unit maps of rank m + n_add):
/// primitive on ŝl(m+n_add), and H_{i,1} ↦ H⊗1 + 1⊗H + A_i^+ +
/// ħΣ_{s∈ℤ,u≤n}E_{i+n,u}t^{−s}⊗E_{u,i+n}t^s − ħΣ_{s∈ℤ,u≤n}E_{i+1+n,u}t^{−s}⊗E_{u,i+1+n}t^s.
/// The two rank m realizations are Ψ^{m,m+n_add} of the big ones.
pub fn delta_m_image(m: usize, n_add: usize, left_big: &YangImage, right_big: &YangImage) -> Result<YangImage, ParError> {
    if left_big.n != m + n_add || right_big.n != m + n_add {
        return Err(ParError::Invalid("realizations must have rank m + n_add".into()));
    }
    let l = crate::yangian::psi(left_big, n_add)?;
    let r = crate::yangian::psi(right_big, n_add)?;
    let mut img = crate::yangian::delta(Coproduct::Plus, &l, &r)?;
    if n_add == 0 {
        return Ok(img);
    }
    let (lg, rg) = (left_big.gl(), right_big.gl());
    let h = Scalar::hbar();
    for i in 1..m {
        let mut extra = SeriesExpr::zero();
        for (row, c) in [(i + n_add, h.clone()), (i + 1 + n_add, -&h)] {
            for u in 1..=n_add {
                // Σ_{s∈ℤ} x t^{−s} ⊗ y t^{s}: the two factors commute
                extra.add_scaled(&pair_series(&c, lg.get(row, u), 0, rg.get(u, row), 0), &Scalar::one());
                extra.add_scaled(&pair_series(&c, rg.get(u, row), -1, lg.get(row, u), 1), &Scalar::one());
            }
        }
        img.h1[i] = Some(img.h1(i).add(&Operator::series(extra)));
    }
    Ok(img)
}

/// Conventions of the compatibility check plus a mutation hook.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatOptions {
    pub phi: PhiOptions,
    pub delta_w: DeltaWOptions,
    /// Added to the shift −γ_w ħ of τ.
    pub tau_delta: Option<Scalar>,
    /// τ applied after Ψ on its factor, per added row, in units of ħ.
    pub psi_tau: Rat,
}

impl Default for CompatOptions {
    /// Measured: Ψ needs a trailing τ_{ħ/2} per added row.
    fn default() -> Self {
        CompatOptions { phi: PhiOptions::default(), delta_w: DeltaWOptions::default(), tau_delta: None, psi_tau: Rat::new(1, 2) }
    }
}

impl CompatOptions {
    /// The uncorrected composition, with Ψ used bare.
    pub fn literal() -> Self {
        CompatOptions { psi_tau: Rat::from_integer(0), ..Self::default() }
    }
}

/// Both sides of ((Φ₁∘τ_{−γ_wħ}∘Ψ)⊗Φ₂)∘Δ = Δ_W∘Φ (for q₁ ≥ q_l; the q₁ < q_l
/// case moves Ψ to the right factor), evaluated through μ̃₁⊗μ̃₂ in the
/// parent's Miura context. Only splits with min(q_w, q_{w+1}) = q_Min are
/// handled, where Δ is Δ⁺ and no extended algebra enters.
pub fn parabolic_compat_sides(split: &SplitSpec, opts: &CompatOptions) -> Result<(Context, YangImage, YangImage), ParError> {
    let p = &split.parent;
    check_min(p)?;
    let (w, l) = (split.w, p.len());
    let q = |s: usize| p.height(s);
    let m = p.q_min();
    if q(w).min(q(w + 1)) != m {
        return Err(ParError::Invalid(format!(
            "split after column {w} of {:?} needs the extended algebras (min(q_w, q_w+1) > q_Min)",
            p.heights()
        )));
    }
    let (_, phi1) = phi(&split.left, &opts.phi)?;
    let (_, phi2) = phi(&split.right, &opts.phi)?;
    let phi2 = shift_image(&phi2, w);
    let mut a = -&(&Scalar::hbar() * &p.gamma(w));
    if let Some(d) = &opts.tau_delta {
        a += d;
    }
    let left = crate::yangian::tau(&phi1, &a);
    let psi = |img: &YangImage, add: usize| -> Result<YangImage, ParError> {
        let out = crate::yangian::psi(img, add)?;
        let a = Scalar::hbar().scale(opts.psi_tau * Rat::from_integer(add as i64));
        Ok(crate::yangian::tau(&out, &a))
    };
    let (left, right) = if q(1) >= q(l) {
        (psi(&left, split.left.q_min() - m)?, phi2)
    } else {
        (left, psi(&phi2, split.right.q_min() - m)?)
    };
    let lhs = crate::yangian::delta(Coproduct::Plus, &left, &right)?;
    let ctx = miura_context(p);
    let off = offset(p);
    let w2 = |a: usize| -> SeriesExpr {
        let g = WLabel::w2(a, a);
        let dw = delta_w_image(split, g, &opts.delta_w).expect("admissible");
        let st = mu_tensor(split, &dw).expect("parts are realizable");
        state_mode(&ctx, &st, 1).expect("weight-two state")
    };
    debug_assert!(off < p.top());
    let (_, rhs) = phi_with(p, &opts.phi, &w2)?;
    Ok((ctx, lhs, rhs))
}

pub fn verify_parabolic_compat(split: &SplitSpec, depth: u32, opts: &CompatOptions) -> Result<Vec<InstanceResult>, ParError> {
    let (ctx, lhs, rhs) = parabolic_compat_sides(split, opts)?;
    let mut inst = hojo_instances(&lhs, &rhs);
    for i in 0..lhs.n {
        inst.push(Instance::new(format!("H[{i},0]"), lhs.h0[i].clone(), rhs.h0[i].clone()));
    }
    Ok(check_instances(&ctx, &inst, depth))
}
