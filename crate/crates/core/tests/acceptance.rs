use std::io::Write;
use std::time::Instant;
use yangw_core::{run, CheckParams, Report, Suite};

type Criterion = (&'static str, fn() -> Line);

struct Line {
    ok: bool,
    text: String,
}

fn go(suite: Suite, p: CheckParams) -> Report {
    run(suite, &p).unwrap_or_else(|e| panic!("{suite}: {e}"))
}

fn summary(rs: &[Report]) -> (usize, usize) {
    let total = rs.iter().map(|r| r.instances.len()).sum();
    let failed = rs.iter().map(|r| r.failures().count()).sum();
    (total, failed)
}

fn all_pass(label: &str, rs: &[Report]) -> Line {
    let (total, failed) = summary(rs);
    let mut text = format!("{label}: {total} instances, {failed} failed");
    for r in rs {
        for f in r.failures().take(3) {
            text.push_str(&format!("\n      {} {}: witness {:?}", r.suite, f.id, f.witness));
        }
    }
    Line { ok: failed == 0 && total > 0, text }
}

fn pyr(q: &[usize]) -> CheckParams {
    CheckParams { q: q.to_vec(), ..CheckParams::default() }
}

fn c1() -> Line {
    let rs = [
        go(Suite::YangEv, CheckParams { n: 3, depth: 3, ..CheckParams::default() }),
        go(Suite::YangEv, CheckParams { n: 4, depth: 2, ..CheckParams::default() }),
    ];
    all_pass("evaluation map, n=3 D=3 and n=4 D=2", &rs)
}

fn c2() -> Line {
    let rs = [1, 2].map(|add| go(Suite::YangPsi, CheckParams { m: 3, add, ..CheckParams::default() }));
    all_pass("edge contraction, (m,add) = (3,1), (3,2), D=2", &rs)
}

fn c3() -> Line {
    let rs = [go(Suite::YangCoproduct, CheckParams { n: 3, ..CheckParams::default() })];
    let tilde = rs[0].instances.iter().filter(|r| r.id.contains("a-tilde")).count();
    let mut l = all_pass("coproducts, n=3 D=2, both signs", &rs);
    l.ok &= tilde == 4;
    l.text.push_str(&format!(" ({tilde} of them the A/Ã decomposition)"));
    l
}

fn c4() -> Line {
    let rs = [pyr(&[3, 3]), pyr(&[4, 3]), pyr(&[3, 4])].map(|p| go(Suite::D0Kernel, p));
    all_pass("d0 kernel, q = (3,3), (4,3), (3,4)", &rs)
}

fn c5() -> Line {
    let rs = [pyr(&[3, 3]), pyr(&[4, 3])].map(|p| go(Suite::OpeLemma, p));
    let mut l = all_pass("OPE products, q = (3,3), (4,3)", &rs);
    l.text.push_str(&format!(" ((3,3) has {} admissible quadruples)", rs[0].instances.len()));
    l
}

fn c6() -> Line {
    let rs = [pyr(&[3, 3]), pyr(&[4, 3])].map(|p| go(Suite::Hojo, CheckParams { diagnose: true, ..p }));
    let groups = rs.iter().flat_map(|r| &r.instances).filter(|r| r.id.contains("/group")).count();
    let mut l = all_pass("Yangian to W-algebra comparison with diagnose, q = (3,3), (4,3), D=2", &rs);
    l.ok &= groups == 2 * 2 * 8;
    l.text.push_str(&format!(" ({groups} grouping balances)"));
    l
}

fn c7() -> Line {
    let rs = [(vec![3, 3], 1), (vec![3, 3, 3], 1), (vec![3, 3, 3], 2)]
        .map(|(q, w)| go(Suite::MiuraSplit, CheckParams { q, w, ..CheckParams::default() }));
    all_pass("Miura factorization, (3,3) w=1 and (3,3,3) w=1,2, D=2", &rs)
}

fn c8() -> Line {
    let p = CheckParams { m: 3, add: 1, xmax: 2, ..CheckParams::default() };
    let rs = [go(Suite::Extended, p.clone())];
    let lit = go(Suite::Extended, CheckParams { literal: true, ..p });
    let mut l = all_pass("extended relations, (m,add)=(3,1), |x|<=2, D=2", &rs);
    l.text.push_str(&format!(
        " (corrected constants; uncorrected form: {}/{} fail)",
        lit.failures().count(),
        lit.instances.len()
    ));
    l
}

fn c9() -> Line {
    let rs = [go(Suite::ParabolicCompat, CheckParams { q: vec![3, 3], w: 1, ..CheckParams::default() })];
    all_pass("final compatibility, q=(3,3) w=1, D=2", &rs)
}

fn c10() -> Line {
    let m = |p: CheckParams| CheckParams { mutate: true, ..p };
    let cases = [
        go(Suite::YangEv, m(CheckParams { n: 3, ..CheckParams::default() })),
        go(Suite::D0Kernel, m(pyr(&[4, 3]))),
        go(Suite::Hojo, m(pyr(&[3, 3]))),
        go(Suite::MiuraSplit, m(pyr(&[3, 3]))),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &cases {
        let shallow = r.failures().filter(|f| f.witness_depth.is_some_and(|d| d <= 2)).count();
        ok &= shallow > 0;
        parts.push(format!("{} {shallow}", r.suite));
    }
    Line { ok, text: format!("mutations caught at depth <= 2: {}", parts.join(", ")) }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1", c1),
        ("2", c2),
        ("3", c3),
        ("4", c4),
        ("5", c5),
        ("6", c6),
        ("7", c7),
        ("8", c8),
        ("9", c9),
        ("10", c10),
    ];
    let mut out = std::io::stdout().lock();
    let mut bad = Vec::new();
    for (n, f) in criteria {
        let t = Instant::now();
        let l = f();
        let tag = if l.ok { "PASS" } else { "FAIL" };
        writeln!(out, "[{tag}] criterion {n:>2}: {} [{:.1}s]", l.text, t.elapsed().as_secs_f64()).unwrap();
        if !l.ok {
            bad.push(n);
        }
    }
    assert!(bad.is_empty(), "failing criteria: {bad:?}");
}
