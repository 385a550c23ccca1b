//! Images of affine Yangian generators in completed mode algebras: the
//! evaluation map, edge contraction, the coproducts Δ±, the shift τ_a and
//! the iterated coproduct Δˡ, plus a verifier for the defining relations.

use crate::loopalg::Pyramid;
use crate::report::InstanceResult;
use crate::scalar::Scalar;
use crate::series::{check_instances, pair_series, pair_word, Instance, Operator, SeriesExpr};
use crate::vacuum::{Algebra, Context, Factor, Gen, SlotSpec};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum YangError {
    #[error("affine Yangian needs rank at least 3, got {0}")]
    RankTooSmall(usize),
    #[error("slot {0} does not exist in the context")]
    NoSlot(usize),
    #[error("the two tensor factors have different ranks or parameters")]
    Mismatch,
}

/// Which of the two coproducts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coproduct {
    Plus,
    Minus,
}

/// Images of the matrix units E_{a,b} (1 ≤ a,b ≤ n) as sums of generators
/// sharing a mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlMap {
    n: usize,
    gens: Vec<Vec<Gen>>,
}

impl GlMap {
    pub fn new(n: usize, f: impl Fn(usize, usize) -> Vec<Gen>) -> Self {
        let mut gens = Vec::with_capacity(n * n);
        for a in 1..=n {
            for b in 1..=n {
                gens.push(f(a, b));
            }
        }
        GlMap { n, gens }
    }

    pub fn slot(n: usize, slot: usize) -> Self {
        Self::new(n, |a, b| vec![Gen::e(slot, a, b)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &[Gen] {
        &self.gens[(a - 1) * self.n + (b - 1)]
    }

    /// c·E_{a,b}t^m as a series expression.
    pub fn mode(&self, c: &Scalar, a: usize, b: usize, m: i32) -> SeriesExpr {
        let mut e = SeriesExpr::zero();
        for g in self.get(a, b) {
            e.add_word(c, &[Factor::new(*g, m)]);
        }
        e
    }
}

/// Images of X^±_{i,0}, H_{i,0} (0 ≤ i < n) and H_{i,1} (1 ≤ i < n) of a
/// Yangian Y_{ħ,eps}(ŝl(n)).
#[derive(Clone, Debug)]
pub struct YangImage {
    pub n: usize,
    pub eps: Scalar,
    pub xp: Vec<Operator>,
    pub xm: Vec<Operator>,
    pub h0: Vec<Operator>,
    pub h1: Vec<Option<Operator>>,
    /// Matrix-unit images when the target is a tensor product of loop
    /// algebras, with h_0 = E_{n,n} − E_{1,1} + `center`.
    pub gl: Option<Arc<GlMap>>,
    pub center: Scalar,
}

impl YangImage {
    /// Degree-zero and X^± images from a matrix-unit map.
    pub fn from_gl(gl: Arc<GlMap>, eps: Scalar, center: Scalar) -> Self {
        let n = gl.n();
        let one = Scalar::one();
        let mut xp = Vec::with_capacity(n);
        let mut xm = Vec::with_capacity(n);
        let mut h0 = Vec::with_capacity(n);
        for i in 0..n {
            if i == 0 {
                xp.push(Operator::series(gl.mode(&one, n, 1, 1)));
                xm.push(Operator::series(gl.mode(&one, 1, n, -1)));
                let mut h = gl.mode(&one, n, n, 0);
                h.add_scaled(&gl.mode(&one, 1, 1, 0), &Scalar::int(-1));
                h.add_word(&center, &[]);
                h0.push(Operator::series(h));
            } else {
                xp.push(Operator::series(gl.mode(&one, i, i + 1, 0)));
                xm.push(Operator::series(gl.mode(&one, i + 1, i, 0)));
                let mut h = gl.mode(&one, i, i, 0);
                h.add_scaled(&gl.mode(&one, i + 1, i + 1, 0), &Scalar::int(-1));
                h0.push(Operator::series(h));
            }
        }
        YangImage { n, eps, xp, xm, h0, h1: vec![None; n], gl: Some(gl), center }
    }

    pub fn h1(&self, i: usize) -> &Operator {
        self.h1[i].as_ref().expect("H_{i,1} image is defined for 1 <= i < n")
    }

    pub fn gl(&self) -> &GlMap {
        self.gl.as_deref().expect("matrix-unit images available")
    }
}

/// ħ·c
fn hc(c: i64) -> Scalar {
    Scalar::hbar().scale_int(c)
}

/// The evaluation-map shape (a − iħ/2)h_i + d·ħ E_{ii}E_{i+1,i+1} + the four
/// normally ordered series, written over a matrix-unit map. `d` is −1 for
/// the evaluation map itself.
pub fn ev_shape(gl: &GlMap, i: usize, a: &Scalar, d: i64) -> SeriesExpr {
    let n = gl.n();
    let one = Scalar::one();
    let lin = a - &Scalar::hbar().scale(crate::scalar::Rat::new(i as i64, 2));
    let mut e = gl.mode(&lin, i, i, 0);
    e.add_scaled(&gl.mode(&one, i + 1, i + 1, 0), &(-&lin));
    e.add_scaled(&pair_word(&hc(d), gl.get(i, i), 0, gl.get(i + 1, i + 1), 0), &one);
    for (row, sign) in [(i, 1), (i + 1, -1)] {
        for k in 1..=n {
            let (p, q) = if k <= i { (0, 0) } else { (-1, 1) };
            e.add_scaled(&pair_series(&hc(sign), gl.get(row, k), p, gl.get(k, row), q), &one);
        }
    }
    e
}

fn check_rank(n: usize) -> Result<(), YangError> {
    if n < 3 {
        Err(YangError::RankTooSmall(n))
    } else {
        Ok(())
    }
}

fn slot_spec(ctx: &Context, slot: usize) -> Result<SlotSpec, YangError> {
    match &ctx.alg {
        Algebra::Slots(s) if slot < s.len() => Ok(s[slot].clone()),
        _ => Err(YangError::NoSlot(slot)),
    }
}

/// ev^{n,a} into slot `slot` of `ctx`; ε is ħ times the slot level.
pub fn ev(ctx: &Context, slot: usize, a: &Scalar) -> Result<YangImage, YangError> {
    ev_with(ctx, slot, a, -1)
}

/// The evaluation map with the E_{ii}E_{i+1,i+1} coefficient set to `d`·ħ
/// (d = −1 is the genuine map; anything else is a deliberate mutation).
pub fn ev_with(ctx: &Context, slot: usize, a: &Scalar, d: i64) -> Result<YangImage, YangError> {
    let spec = slot_spec(ctx, slot)?;
    check_rank(spec.rank)?;
    let gl = Arc::new(GlMap::slot(spec.rank, slot));
    let eps = &Scalar::hbar() * &spec.level;
    let mut img = YangImage::from_gl(gl.clone(), eps, spec.level.clone());
    for i in 1..spec.rank {
        img.h1[i] = Some(Operator::series(ev_shape(&gl, i, a, d)));
    }
    Ok(img)
}

/// Ψ^{m,m+add} composed with a realization of the rank m+add Yangian.
pub fn psi(inner: &YangImage, add: usize) -> Result<YangImage, YangError> {
    if add == 0 {
        return Ok(inner.clone());
    }
    let big = inner.n;
    let m = big.checked_sub(add).ok_or(YangError::Mismatch)?;
    check_rank(m)?;
    let igl = inner.gl();
    let gl = Arc::new(GlMap::new(m, |a, b| igl.get(a + add, b + add).to_vec()));
    let eps = &inner.eps + &hc(add as i64);
    let mut img = YangImage::from_gl(gl, eps, inner.center.clone());
    for i in 1..m {
        let mut corr = SeriesExpr::zero();
        for (col, sign) in [(add + i, 1), (add + i + 1, -1)] {
            for k in 1..=add {
                corr.add_scaled(&pair_series(&hc(sign), igl.get(k, col), -1, igl.get(col, k), 1), &Scalar::one());
            }
        }
        img.h1[i] = Some(Operator::sum(vec![inner.h1(add + i).clone(), Operator::series(corr)]));
    }
    Ok(img)
}

/// Σ_s X t^{p−s} ⊗ Y t^{q+s} (X in the left factor) when `left_decreasing`,
/// else Σ_s X t^{q+s} ⊗ Y t^{p−s}. Factors in different slots commute, so
/// the increasing one is always put on the right of the template.
fn cross(c: &Scalar, x: &[Gen], y: &[Gen], p: i32, q: i32, left_decreasing: bool) -> SeriesExpr {
    if left_decreasing {
        pair_series(c, x, p, y, q)
    } else {
        pair_series(c, y, p, x, q)
    }
}

/// The two u-blocks attached to index `j` in A_i^± and Ã_j^±:
/// coef·Σ_{u∈lo}(−E_{u,j}t^{−s−1}⊗E_{j,u}t^{s+1} + E_{j,u}t^{−s}⊗E_{u,j}t^s) +
/// coef·Σ_{u∈hi}(−E_{u,j}t^{−s}⊗E_{j,u}t^s + E_{j,u}t^{−s−1}⊗E_{u,j}t^{s+1})
/// for Δ⁺, and the mirrored blocks for Δ⁻.
fn blocks(
    sign: Coproduct,
    l: &GlMap,
    r: &GlMap,
    j: usize,
    lo: std::ops::RangeInclusive<usize>,
    hi: std::ops::RangeInclusive<usize>,
    coef: i64,
) -> SeriesExpr {
    let mut e = SeriesExpr::zero();
    let neg = hc(-coef);
    let pos = hc(coef);
    let one = Scalar::one();
    for u in lo {
        match sign {
            Coproduct::Plus => {
                e.add_scaled(&cross(&neg, l.get(u, j), r.get(j, u), -1, 1, true), &one);
                e.add_scaled(&cross(&pos, l.get(j, u), r.get(u, j), 0, 0, true), &one);
            }
            Coproduct::Minus => {
                e.add_scaled(&cross(&neg, l.get(j, u), r.get(u, j), -1, 1, false), &one);
                e.add_scaled(&cross(&pos, l.get(u, j), r.get(j, u), 0, 0, false), &one);
            }
        }
    }
    for u in hi {
        match sign {
            Coproduct::Plus => {
                e.add_scaled(&cross(&neg, l.get(u, j), r.get(j, u), 0, 0, true), &one);
                e.add_scaled(&cross(&pos, l.get(j, u), r.get(u, j), -1, 1, true), &one);
            }
            Coproduct::Minus => {
                e.add_scaled(&cross(&neg, l.get(j, u), r.get(u, j), 0, 0, false), &one);
                e.add_scaled(&cross(&pos, l.get(u, j), r.get(j, u), -1, 1, false), &one);
            }
        }
    }
    e
}

/// A_i^± for 1 ≤ i < n.
pub fn a_series(sign: Coproduct, l: &GlMap, r: &GlMap, i: usize) -> SeriesExpr {
    let n = l.n();
    let one = Scalar::one();
    let mut e = pair_word(&hc(-1), l.get(i, i), 0, r.get(i + 1, i + 1), 0);
    e.add_scaled(&pair_word(&hc(-1), l.get(i + 1, i + 1), 0, r.get(i, i), 0), &one);
    e.add_scaled(&blocks(sign, l, r, i, 1..=i, i + 1..=n, 1), &one);
    e.add_scaled(&blocks(sign, l, r, i + 1, 1..=i, i + 1..=n, -1), &one);
    e
}

/// Ã_j^± for 1 ≤ j ≤ n.
pub fn a_tilde(sign: Coproduct, l: &GlMap, r: &GlMap, j: usize) -> SeriesExpr {
    blocks(sign, l, r, j, 1..=j - 1, j + 1..=l.n(), 1)
}

/// ħ·h_i ⊗ h_i.
pub fn h_tensor_h(l: &GlMap, r: &GlMap, i: usize) -> SeriesExpr {
    let mut e = SeriesExpr::zero();
    for (a, ca) in [(i, 1), (i + 1, -1)] {
        for (b, cb) in [(i, 1), (i + 1, -1)] {
            e.add_scaled(&pair_word(&hc(ca * cb), l.get(a, a), 0, r.get(b, b), 0), &Scalar::one());
        }
    }
    e
}

/// (L ⊗ R)∘Δ^±, with H_{i,1} ↦ H_L + H_R + A_i^±. Equivalently
/// H̃_{i,1} ↦ H̃_L + H̃_R + Ã_i^± − Ã_{i+1}^±.
pub fn delta(sign: Coproduct, l: &YangImage, r: &YangImage) -> Result<YangImage, YangError> {
    delta_with(sign, l, r, 0)
}

/// Like `delta`, with an extra `hh`·ħ h_i⊗h_i added to every H_{i,1}
/// image. `hh = 1` is the image obtained by attaching A_i^± to H̃_{i,1}.
pub fn delta_with(sign: Coproduct, l: &YangImage, r: &YangImage, hh: i64) -> Result<YangImage, YangError> {
    if l.n != r.n || l.eps != r.eps {
        return Err(YangError::Mismatch);
    }
    let (lg, rg) = (l.gl(), r.gl());
    let n = l.n;
    let gl = Arc::new(GlMap::new(n, |a, b| {
        let mut v = lg.get(a, b).to_vec();
        v.extend_from_slice(rg.get(a, b));
        v
    }));
    let mut img = YangImage::from_gl(gl, l.eps.clone(), &l.center + &r.center);
    for i in 1..n {
        let mut extra = a_series(sign, lg, rg, i);
        extra.add_scaled(&h_tensor_h(lg, rg, i), &Scalar::int(hh));
        img.h1[i] = Some(Operator::sum(vec![l.h1(i).clone(), r.h1(i).clone(), Operator::series(extra)]));
    }
    Ok(img)
}

/// Precomposition with the shift τ_a: H_{i,1} ↦ H_{i,1} + a·H_{i,0}.
pub fn tau(img: &YangImage, a: &Scalar) -> YangImage {
    let mut out = img.clone();
    for i in 1..img.n {
        if let Some(h) = &img.h1[i] {
            out.h1[i] = Some(h.add(&img.h0[i].scale(a)));
        }
    }
    out
}

/// The ordering permutation: σ(1..l) lists columns by decreasing height,
/// ties kept in original order. Values are 1-based column numbers.
pub fn sigma(q: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..=q.len()).collect();
    idx.sort_by(|a, b| q[b - 1].cmp(&q[a - 1]).then(a.cmp(b)));
    idx
}

/// Δˡ followed by Σ and ⊗_s ev^{q_s, a_s}. Slot s−1 of the returned context
/// holds column s with level ε/ħ − (q_s − q_Min); `ev_params[s-1]` is a_s.
pub fn delta_l(pyr: &Pyramid, eps: &Scalar, ev_params: &[Scalar]) -> Result<(Context, YangImage), YangError> {
    let q = pyr.heights();
    let l = q.len();
    let qmin = *q.iter().min().unwrap();
    check_rank(qmin)?;
    let base = eps.div_hbar_pow(1);
    let specs: Vec<SlotSpec> = q
        .iter()
        .map(|&h| SlotSpec { rank: h, level: &base - &Scalar::int((h - qmin) as i64) })
        .collect();
    let ctx = Context::slots(specs);
    let sg = sigma(q);
    let mut cur = ev(&ctx, sg[0] - 1, &ev_params[sg[0] - 1])?;
    for s in 0..l - 1 {
        let (a, b) = (sg[s], sg[s + 1]);
        let sign = if a < b { Coproduct::Plus } else { Coproduct::Minus };
        let left = psi(&cur, q[a - 1] - q[b - 1])?;
        let right = ev(&ctx, b - 1, &ev_params[b - 1])?;
        cur = delta(sign, &left, &right)?;
    }
    Ok((ctx, cur))
}

/// Cartan matrix entry of affine type A_{n−1}^{(1)}, n ≥ 3.
pub fn cartan(n: usize, i: usize, j: usize) -> i64 {
    if i == j {
        2
    } else if (i + 1) % n == j || (j + 1) % n == i {
        -1
    } else {
        0
    }
}

/// Every element needed by the relation checks, derived from the images of
/// the generating set.
pub struct Derived {
    pub n: usize,
    pub eps: Scalar,
    pub xp: Vec<Operator>,
    pub xm: Vec<Operator>,
    pub h0: Vec<Operator>,
    pub h1: Vec<Operator>,
    pub ht: Vec<Operator>,
    pub xp1: Vec<Operator>,
    pub xm1: Vec<Operator>,
}

impl Derived {
    pub fn new(img: &YangImage) -> Self {
        let n = img.n;
        let half_h = Scalar::hbar().scale(crate::scalar::Rat::new(1, 2));
        let tilde = |h: &Operator, h0: &Operator| h.sub(&h0.mul(h0).scale(&half_h));
        let mut ht: Vec<Operator> = vec![Operator::zero(); n];
        let mut h1: Vec<Operator> = vec![Operator::zero(); n];
        for i in 1..n {
            h1[i] = img.h1(i).clone();
            ht[i] = tilde(&h1[i], &img.h0[i]);
        }
        let half = Scalar::frac(1, 2);
        let mut xp1 = vec![Operator::zero(); n];
        let mut xm1 = vec![Operator::zero(); n];
        for j in 1..n {
            xp1[j] = Operator::commutator(&ht[j], &img.xp[j]).scale(&half);
            xm1[j] = Operator::commutator(&ht[j], &img.xm[j]).scale(&(-&half));
        }
        // a_{1,0} = −1
        xp1[0] = Operator::commutator(&ht[1], &img.xp[0]).scale(&Scalar::int(-1));
        xm1[0] = Operator::commutator(&ht[1], &img.xm[0]);
        h1[0] = Operator::commutator(&xp1[0], &img.xm[0]);
        ht[0] = tilde(&h1[0], &img.h0[0]);
        Derived {
            n,
            eps: img.eps.clone(),
            xp: img.xp.clone(),
            xm: img.xm.clone(),
            h0: img.h0.clone(),
            h1,
            ht,
            xp1,
            xm1,
        }
    }

    fn x(&self, plus: bool, i: usize, r: usize) -> &Operator {
        match (plus, r) {
            (true, 0) => &self.xp[i],
            (true, _) => &self.xp1[i],
            (false, 0) => &self.xm[i],
            (false, _) => &self.xm1[i],
        }
    }

    fn h(&self, i: usize, r: usize) -> &Operator {
        if r == 0 {
            &self.h0[i]
        } else {
            &self.h1[i]
        }
    }

    /// ε + (n/2)ħ
    pub fn wrap_const(&self) -> Scalar {
        &self.eps + &Scalar::hbar().scale(crate::scalar::Rat::new(self.n as i64, 2))
    }
}

fn pm(plus: bool) -> &'static str {
    if plus {
        "+"
    } else {
        "-"
    }
}

/// All instances of the defining relations with r, s ∈ {0,1}.
pub fn relation_instances(img: &YangImage) -> Vec<Instance> {
    let d = Derived::new(img);
    let n = d.n;
    let zero = Operator::zero();
    let c = Operator::commutator;
    let sc = |k: i64| Scalar::int(k);
    let half_h = Scalar::hbar().scale(crate::scalar::Rat::new(1, 2));
    let wrap = d.wrap_const();
    let mut out = Vec::new();
    let is_wrap = |i: usize, j: usize| (i == 0 && j == n - 1) || (i == n - 1 && j == 0);

    for i in 0..n {
        for j in i..n {
            for r in 0..2 {
                for s in 0..2 {
                    if i == j && s < r {
                        continue;
                    }
                    out.push(Instance::new(
                        format!("hh/i={i},j={j},r={r},s={s}"),
                        c(d.h(i, r), d.h(j, s)),
                        zero.clone(),
                    ));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let rhs = if i == j { d.h0[i].clone() } else { zero.clone() };
            out.push(Instance::new(format!("xx/i={i},j={j}"), c(&d.xp[i], &d.xm[j]), rhs));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let rhs = if i == j { d.h1[i].clone() } else { zero.clone() };
            out.push(Instance::new(format!("x1x/i={i},j={j}"), c(&d.xp1[i], &d.xm[j]), rhs.clone()));
            out.push(Instance::new(format!("xx1/i={i},j={j}"), c(&d.xp[i], &d.xm1[j]), rhs));
        }
    }
    for i in 0..n {
        for j in 0..n {
            for r in 0..2 {
                for plus in [true, false] {
                    let a = cartan(n, i, j) * if plus { 1 } else { -1 };
                    out.push(Instance::new(
                        format!("hx/i={i},j={j},r={r},{}", pm(plus)),
                        c(&d.h0[i], d.x(plus, j, r)),
                        d.x(plus, j, r).scale(&sc(a)),
                    ));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for plus in [true, false] {
                let sgn = if plus { 1 } else { -1 };
                let lhs = c(&d.ht[i], d.x(plus, j, 0));
                let (id, rhs) = if i == 0 && j == n - 1 {
                    let r = d.x(plus, j, 1).add(&d.x(plus, j, 0).scale(&wrap));
                    ("htx-wrap0", r.scale(&sc(-sgn)))
                } else if i == n - 1 && j == 0 {
                    let r = d.x(plus, j, 1).sub(&d.x(plus, j, 0).scale(&wrap));
                    ("htx-wrapn", r.scale(&sc(-sgn)))
                } else {
                    ("htx", d.x(plus, j, 1).scale(&sc(sgn * cartan(n, i, j))))
                };
                out.push(Instance::new(format!("{id}/i={i},j={j},{}", pm(plus)), lhs, rhs));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if is_wrap(i, j) && i != 0 {
                continue;
            }
            for plus in [true, false] {
                let sgn = if plus { 1 } else { -1 };
                let lhs = c(d.x(plus, i, 1), d.x(plus, j, 0)).sub(&c(d.x(plus, i, 0), d.x(plus, j, 1)));
                let anti = Operator::anticommutator(d.x(plus, i, 0), d.x(plus, j, 0));
                let (id, rhs) = if is_wrap(i, j) {
                    let r = anti
                        .scale(&half_h.scale_int(-sgn))
                        .add(&c(d.x(plus, i, 0), d.x(plus, j, 0)).scale(&wrap));
                    ("xxr-wrap", r)
                } else {
                    ("xxr", anti.scale(&half_h.scale_int(sgn * cartan(n, i, j))))
                };
                out.push(Instance::new(format!("{id}/i={i},j={j},{}", pm(plus)), lhs, rhs));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for plus in [true, false] {
                let xi = d.x(plus, i, 0);
                let mut cur = d.x(plus, j, 0).clone();
                for _ in 0..1 + cartan(n, i, j).unsigned_abs() {
                    cur = c(xi, &cur);
                }
                out.push(Instance::new(format!("serre/i={i},j={j},{}", pm(plus)), cur, zero.clone()));
            }
        }
    }
    out
}

/// Check every relation instance on states of depth ≤ `depth`.
pub fn verify_relations(ctx: &Context, img: &YangImage, depth: u32) -> Vec<InstanceResult> {
    check_instances(ctx, &relation_instances(img), depth)
}

/// Context of `count` copies of ĝl(n) at level ε/ħ.
pub fn loop_context(n: usize, count: usize) -> Context {
    let level = Scalar::eps().div_hbar_pow(1);
    Context::slots((0..count).map(|_| SlotSpec { rank: n, level: level.clone() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::op_eq_on_depth;

    #[test]
    fn ev_degree_zero_images() {
        let ctx = loop_context(3, 1);
        let img = ev(&ctx, 0, &Scalar::zero()).unwrap();
        let want = Operator::mode(Gen::e(0, 1, 2), 0);
        assert!(op_eq_on_depth(&ctx, &img.xp[1], &want, 2).is_ok());
        let h = Operator::mode(Gen::e(0, 1, 1), 0).sub(&Operator::mode(Gen::e(0, 2, 2), 0));
        assert!(op_eq_on_depth(&ctx, &img.h0[1], &h, 2).is_ok());
    }

    #[test]
    fn ev_perturbation_detected() {
        let ctx = loop_context(3, 1);
        let img = ev(&ctx, 0, &Scalar::k()).unwrap();
        let bumped = img.h1(1).add(&Operator::mode(Gen::e(0, 1, 1), 0).scale(&Scalar::hbar()));
        let w = op_eq_on_depth(&ctx, img.h1(1), &bumped, 2).unwrap_err();
        assert!(w.depth <= 1);
    }

    #[test]
    fn rank_two_rejected() {
        let ctx = loop_context(2, 1);
        assert_eq!(ev(&ctx, 0, &Scalar::zero()).unwrap_err(), YangError::RankTooSmall(2));
    }

    #[test]
    fn sigma_orders_by_height() {
        assert_eq!(sigma(&[3, 4]), vec![2, 1]);
        assert_eq!(sigma(&[3, 3, 4]), vec![3, 1, 2]);
    }

    #[test]
    fn cartan_entries() {
        assert_eq!(cartan(3, 0, 2), -1);
        assert_eq!(cartan(4, 0, 2), 0);
        assert_eq!(cartan(4, 1, 1), 2);
    }

    fn fails(rs: &[InstanceResult]) -> Vec<&str> {
        rs.iter().filter(|r| !r.passed()).map(|r| r.id.as_str()).collect()
    }

    #[test]
    fn ev_relations_hold() {
        let ctx = loop_context(3, 1);
        let img = ev(&ctx, 0, &Scalar::k()).unwrap();
        assert!(fails(&verify_relations(&ctx, &img, 2)).is_empty());
        let bad = ev_with(&ctx, 0, &Scalar::k(), 1).unwrap();
        assert!(!fails(&verify_relations(&ctx, &bad, 1)).is_empty());
    }

    #[test]
    fn psi_relations_hold() {
        let ctx = loop_context(4, 1);
        let img = psi(&ev(&ctx, 0, &Scalar::zero()).unwrap(), 1).unwrap();
        assert_eq!(img.n, 3);
        assert_eq!(img.eps, &Scalar::eps() + &Scalar::hbar());
        assert!(fails(&verify_relations(&ctx, &img, 1)).is_empty());
    }

    #[test]
    fn coproduct_relations_hold() {
        let ctx = loop_context(3, 2);
        let l = ev(&ctx, 0, &Scalar::zero()).unwrap();
        let r = ev(&ctx, 1, &Scalar::k()).unwrap();
        for sign in [Coproduct::Plus, Coproduct::Minus] {
            let img = delta(sign, &l, &r).unwrap();
            assert!(fails(&verify_relations(&ctx, &img, 1)).is_empty(), "{sign:?}");
        }
        // A_i attached to H̃_{i,1}: node 0 breaks
        let lit = delta_with(Coproduct::Plus, &l, &r, 1).unwrap();
        assert!(!fails(&verify_relations(&ctx, &lit, 1)).is_empty());
    }

    #[test]
    fn coproduct_needs_matching_eps() {
        let ctx = loop_context(4, 2);
        let l = psi(&ev(&ctx, 0, &Scalar::zero()).unwrap(), 1).unwrap();
        let r = ev(&loop_context(3, 2), 1, &Scalar::zero()).unwrap();
        assert_eq!(delta(Coproduct::Plus, &l, &r).unwrap_err(), YangError::Mismatch);
    }

    #[test]
    fn a_tilde_decomposition() {
        let ctx = loop_context(3, 2);
        let (l, r) = (GlMap::slot(3, 0), GlMap::slot(3, 1));
        for sign in [Coproduct::Plus, Coproduct::Minus] {
            for i in 1..3 {
                let a = Operator::series(a_series(sign, &l, &r, i));
                let mut t = a_tilde(sign, &l, &r, i);
                t.add_scaled(&a_tilde(sign, &l, &r, i + 1), &Scalar::int(-1));
                t.add_scaled(&h_tensor_h(&l, &r, i), &Scalar::one());
                assert!(op_eq_on_depth(&ctx, &a, &Operator::series(t), 2).is_ok());
                // only the mixed half of ħ h_i⊗h_i
                let mut two = a_tilde(sign, &l, &r, i);
                two.add_scaled(&a_tilde(sign, &l, &r, i + 1), &Scalar::int(-1));
                for (x, y) in [(i, i + 1), (i + 1, i)] {
                    two.add_scaled(&pair_word(&hc(-1), l.get(x, x), 0, r.get(y, y), 0), &Scalar::one());
                }
                let w = op_eq_on_depth(&ctx, &a, &Operator::series(two), 2).unwrap_err();
                assert_eq!(w.depth, 2, "{w:?}");
            }
        }
    }

    #[test]
    fn tau_shifts_h1_only() {
        let ctx = loop_context(3, 1);
        let img = ev(&ctx, 0, &Scalar::zero()).unwrap();
        let t = tau(&img, &Scalar::k());
        let shifted = ev(&ctx, 0, &Scalar::k()).unwrap();
        for i in 1..3 {
            assert!(op_eq_on_depth(&ctx, t.h1(i), shifted.h1(i), 2).is_ok());
            assert!(op_eq_on_depth(&ctx, &t.xp[i], &img.xp[i], 1).is_ok());
        }
    }
}
