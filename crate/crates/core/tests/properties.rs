use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use yangw_core::loopalg::{bracket, AlgebraTag, GenIndex, Kind, LieElem, Pyramid};
use yangw_core::parabolic::main_eps;
use yangw_core::scalar::{Exponent, Rat, Scalar};
use yangw_core::series::{op_eq_on_depth, Operator, SeriesExpr, SeriesTemplate};
use yangw_core::vacuum::{basis_enum, normal_order, state_eq, straighten, AbstractAlg, Context, Engine, Factor, Gen, State};

fn scalar() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-4i64..=4, 1i64..=3, -2i32..=2, 0u32..=2, 0u32..=2), 0..=4).prop_map(|ts| {
        let mut s = Scalar::zero();
        for (n, d, h, e, k) in ts {
            s += &Scalar::monomial(Rat::new(n, d), Exponent::new(h, e, k));
        }
        s
    })
}

proptest! {
    #[test]
    fn ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Scalar::one(), a.clone());
    }

    #[test]
    fn hbar_division_inverts(a in scalar(), p in -3i32..=3) {
        prop_assert_eq!((&a * &Scalar::hbar_pow(p)).div_hbar_pow(p), a);
    }
}

fn loop_gen(n: usize) -> impl Strategy<Value = GenIndex> {
    prop_oneof![
        8 => (1..=n, 1..=n, -3i32..=3).prop_map(move |(i, j, t)| GenIndex::loop_e(n, i, j, t)),
        1 => Just(GenIndex::central(n, Kind::CTilde)),
        1 => Just(GenIndex::central(n, Kind::Z)),
    ]
}

fn super_gen() -> impl Strategy<Value = GenIndex> {
    (any::<bool>(), 1..=4usize, 1..=4usize, -2i32..=2)
        .prop_map(|(odd, i, j, t)| if odd { GenIndex::psi(i, j, t) } else { GenIndex::super_e(i, j, t) })
}

fn br(x: &LieElem, y: &LieElem) -> LieElem {
    let mut out = LieElem::zero();
    for (a, ca) in &x.terms {
        for (b, cb) in &y.terms {
            out = out.add(&bracket(a, b).unwrap().scaled(&(ca * cb)));
        }
    }
    out
}

fn single(g: &GenIndex) -> LieElem {
    let mut e = LieElem::zero();
    e.add_term(*g, &Scalar::one());
    e
}

fn koszul(x: &GenIndex, y: &GenIndex) -> i64 {
    if x.is_odd() && y.is_odd() {
        -1
    } else {
        1
    }
}

fn antisym(x: &GenIndex, y: &GenIndex) -> Result<(), TestCaseError> {
    let a = bracket(x, y).unwrap();
    let b = bracket(y, x).unwrap().scaled(&Scalar::int(-koszul(x, y)));
    prop_assert_eq!(a, b);
    Ok(())
}

fn jacobi(x: &GenIndex, y: &GenIndex, z: &GenIndex) -> Result<(), TestCaseError> {
    let (xe, ye, ze) = (single(x), single(y), single(z));
    let lhs = br(&xe, &br(&ye, &ze));
    let rhs = br(&br(&xe, &ye), &ze).add(&br(&ye, &br(&xe, &ze)).scaled(&Scalar::int(koszul(x, y))));
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

proptest! {
    #[test]
    fn loop_antisymmetry(n in 1usize..=5, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = |r: &mut StdRng| GenIndex::loop_e(n, r.gen_range(1..=n), r.gen_range(1..=n), r.gen_range(-3..=3));
        antisym(&g(&mut rng), &g(&mut rng))?;
    }

    #[test]
    fn loop_jacobi(x in loop_gen(3), y in loop_gen(3), z in loop_gen(3)) {
        jacobi(&x, &y, &z)?;
    }

    #[test]
    fn super_antisymmetry_and_jacobi(x in super_gen(), y in super_gen(), z in super_gen()) {
        antisym(&x, &y)?;
        jacobi(&x, &y, &z)?;
    }

    #[test]
    fn mixed_algebras_rejected(i in 1usize..=3, j in 1usize..=3) {
        prop_assert!(bracket(&GenIndex::loop_e(3, i, j, 0), &GenIndex::super_e(i, j, 0)).is_err());
        prop_assert_eq!(GenIndex::loop_e(3, i, j, 0).alg, AlgebraTag::LoopGl(3));
    }
}

/// Unimodal height lists with their pivot.
fn pyramid() -> impl Strategy<Value = Pyramid> {
    (prop::collection::vec(1usize..=4, 0..=2), 1usize..=5, prop::collection::vec(1usize..=4, 0..=2)).prop_map(
        |(mut up, top, mut down)| {
            up.sort();
            down.sort_by(|a, b| b.cmp(a));
            let up: Vec<usize> = up.into_iter().map(|h| h.min(top)).collect();
            let down: Vec<usize> = down.into_iter().map(|h| h.min(top)).collect();
            let v = up.len() + 1;
            let q: Vec<usize> = up.into_iter().chain([top]).chain(down).collect();
            Pyramid::new(&q, v).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn pyramid_geometry(p in pyramid()) {
        let n = p.n();
        let mut seen = std::collections::BTreeSet::new();
        for i in 1..=n {
            prop_assert!(seen.insert((p.col(i), p.row(i))));
            if let Some(j) = p.hat(i) {
                prop_assert_eq!(p.tilde(j), Some(i));
            }
            if let Some(j) = p.tilde(i) {
                prop_assert_eq!(p.hat(j), Some(i));
            }
        }
        prop_assert_eq!(p.heights().iter().sum::<usize>(), n);
    }

    #[test]
    fn levels_match_alpha(p in pyramid()) {
        let qmin = p.q_min() as i64;
        for s in 1..=p.len() {
            let lvl = (&main_eps(&p) - &Scalar::hbar().scale_int(p.height(s) as i64 - qmin)).div_hbar_pow(1);
            prop_assert_eq!(lvl, p.alpha(s));
        }
    }
}

fn gl3() -> Context {
    Context::single(3, Scalar::k())
}

fn pick<T: Clone>(v: &[T], k: usize) -> T {
    v[k % v.len()].clone()
}

/// act(g t^a)act(h t^b) − ± act(h t^b)act(g t^a) = act([g,h] t^{a+b}) + a δ_{a+b,0} form(g,h).
fn bracket_on_state(ctx: &Context, g: Gen, a: i32, h: Gen, b: i32, st: &State) -> Result<(), TestCaseError> {
    let mut eng = Engine::new(ctx);
    let gh = eng.act(g, a, &eng_act(ctx, h, b, st));
    let hg = eng.act(h, b, &eng_act(ctx, g, a, st));
    let sign = if g.is_odd() && h.is_odd() { -1 } else { 1 };
    let lhs = gh.sub(&hg.scaled(&Scalar::int(sign)));
    let mut rhs = State::zero();
    for (c, x) in ctx.bracket(&g, &h) {
        rhs.add_scaled(&eng.act(x, a + b, st), &Scalar::int(c));
    }
    if a + b == 0 {
        rhs.add_scaled(st, &ctx.form(&g, &h).scale_int(a as i64));
    }
    prop_assert!(state_eq(&lhs, &rhs), "[{:?}t^{a}, {:?}t^{b}] on {}", g, h, st.render(ctx));
    Ok(())
}

fn eng_act(ctx: &Context, g: Gen, m: i32, st: &State) -> State {
    Engine::new(ctx).act(g, m, st)
}

proptest! {
    #[test]
    fn action_respects_bracket(i in 0usize..1000, j in 0usize..1000, s in 0usize..1000, a in -2i32..=2, b in -2i32..=2, sup in any::<bool>()) {
        let ctx = if sup { Context::superalgebra(Pyramid::new(&[3, 3], 1).unwrap()) } else { gl3() };
        let gens = ctx.generators();
        let basis = basis_enum(&ctx, 2);
        let st = State::basis(pick(&basis, s));
        bracket_on_state(&ctx, pick(&gens, i), a, pick(&gens, j), b, &st)?;
    }

    #[test]
    fn normal_order_confluent(word in prop::collection::vec(loop_gen(3), 0..=4), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut choose = |c: &[usize]| rng.gen_range(0..c.len());
        prop_assert_eq!(straighten(&AbstractAlg, &word, &mut choose), normal_order(&word));
    }

    #[test]
    fn super_normal_order_confluent(word in prop::collection::vec(super_gen(), 0..=4), seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut choose = |c: &[usize]| rng.gen_range(0..c.len());
        prop_assert_eq!(straighten(&AbstractAlg, &word, &mut choose), normal_order(&word));
    }
}

fn template() -> impl Strategy<Value = SeriesTemplate> {
    (1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3, -2i32..=1, -1i32..=2).prop_map(|(a, b, c, d, p, q)| {
        SeriesTemplate { a: Gen::e(0, a, b), p, b: Gen::e(0, c, d), q }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_linearity(t1 in template(), t2 in template(), c in scalar(), s in 0usize..1000) {
        let ctx = gl3();
        let st = State::basis(pick(&basis_enum(&ctx, 2), s));
        let e1 = SeriesExpr::template(Scalar::one(), t1);
        let e2 = SeriesExpr::template(Scalar::one(), t2);
        let mut sum = e1.clone();
        sum.add_scaled(&e2, &c);
        let mut eng = Engine::new(&ctx);
        let lhs = eng.series_act(&sum, &st);
        let mut rhs = eng.series_act(&e1, &st);
        rhs.add_scaled(&eng.series_act(&e2, &st), &c);
        prop_assert!(state_eq(&lhs, &rhs));
    }

    #[test]
    fn series_grading(t in template(), s in 0usize..1000) {
        let ctx = gl3();
        let mono = pick(&basis_enum(&ctx, 3), s);
        let d = mono.depth() as i32;
        let out = Engine::new(&ctx).series_act(&SeriesExpr::template(Scalar::one(), t), &State::basis(mono));
        for m in out.terms.keys() {
            prop_assert_eq!(m.depth() as i32, d - t.p - t.q);
        }
    }

    #[test]
    fn template_index_shift(t in template()) {
        let ctx = gl3();
        let lhs = Operator::series(SeriesExpr::template(Scalar::one(), t));
        let mut rhs = SeriesExpr::template(Scalar::one(), SeriesTemplate { p: t.p - 1, q: t.q + 1, ..t });
        rhs.add_word(&Scalar::one(), &[Factor::new(t.a, t.p), Factor::new(t.b, t.q)]);
        prop_assert!(op_eq_on_depth(&ctx, &lhs, &Operator::series(rhs), 3).is_ok());
    }
}
