//! Named verification suites with validated parameters, as run by the CLI.

use crate::loopalg::Pyramid;
use crate::parabolic::{
    diagnose_hojo, main_eps, verify_extended_relations, verify_hojo, verify_miura_factorization, verify_parabolic_compat,
    CompatOptions, DeltaWOptions, ExtOptions, ParError, PhiOptions, Side, SplitSpec,
};
use crate::report::{InstanceResult, Report};
use crate::scalar::Scalar;
use crate::series::{check_instances, Instance, Operator};
use crate::walgebra::{verify_d0_kernel_shifted, verify_ope_lemma, GammaShift};
use crate::yangian::{
    a_series, a_tilde, delta_with, ev_with, h_tensor_h, loop_context, psi, verify_relations, Coproduct, GlMap, YangError,
};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    YangEv,
    YangPsi,
    YangCoproduct,
    YangDeltal,
    D0Kernel,
    OpeLemma,
    Hojo,
    MiuraSplit,
    Extended,
    ParabolicCompat,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::YangEv,
        Suite::YangPsi,
        Suite::YangCoproduct,
        Suite::YangDeltal,
        Suite::D0Kernel,
        Suite::OpeLemma,
        Suite::Hojo,
        Suite::MiuraSplit,
        Suite::Extended,
        Suite::ParabolicCompat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::YangEv => "yang-ev",
            Suite::YangPsi => "yang-psi",
            Suite::YangCoproduct => "yang-coproduct",
            Suite::YangDeltal => "yang-deltal",
            Suite::D0Kernel => "d0-kernel",
            Suite::OpeLemma => "ope-lemma",
            Suite::Hojo => "hojo",
            Suite::MiuraSplit => "miura-split",
            Suite::Extended => "extended",
            Suite::ParabolicCompat => "parabolic-compat",
        }
    }

    /// Whether `--mutate` has a canonical mutation for this suite.
    pub fn mutable(self) -> bool {
        matches!(self, Suite::YangEv | Suite::D0Kernel | Suite::Hojo | Suite::MiuraSplit | Suite::ParabolicCompat)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, SuiteError> {
        if s == "parabolic" {
            return Ok(Suite::ParabolicCompat);
        }
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| SuiteError::Usage(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("{0}")]
    Usage(String),
}

impl From<ParError> for SuiteError {
    fn from(e: ParError) -> Self {
        SuiteError::Usage(e.to_string())
    }
}

impl From<YangError> for SuiteError {
    fn from(e: YangError) -> Self {
        SuiteError::Usage(e.to_string())
    }
}

/// Parameters of a run. Fields a suite does not use are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckParams {
    pub q: Vec<usize>,
    /// Pivot column; defaults to the first tallest column.
    pub v: Option<usize>,
    pub w: usize,
    pub n: usize,
    pub m: usize,
    pub add: usize,
    pub depth: u32,
    pub i: Option<usize>,
    pub diagnose: bool,
    /// Coproduct sign; both when unset.
    pub sign: Option<char>,
    /// Side of the extended relations; both when unset.
    pub side: Option<char>,
    pub xmax: i32,
    /// Use the uncorrected conventions instead of the measured corrections.
    pub literal: bool,
    /// Apply the suite's canonical single-coefficient mutation.
    pub mutate: bool,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            q: vec![3, 3],
            v: None,
            w: 1,
            n: 3,
            m: 3,
            add: 1,
            depth: 2,
            i: None,
            diagnose: false,
            sign: None,
            side: None,
            xmax: 2,
            literal: false,
            mutate: false,
        }
    }
}

impl CheckParams {
    pub fn pyramid(&self) -> Result<Pyramid, SuiteError> {
        let v = match self.v {
            Some(v) => v,
            None => {
                let top = self.q.iter().copied().max().unwrap_or(0);
                self.q.iter().position(|&h| h == top).map_or(0, |p| p + 1)
            }
        };
        Pyramid::new(&self.q, v).map_err(|e| SuiteError::Usage(e.to_string()))
    }
}

fn min3(what: &str, n: usize) -> Result<(), SuiteError> {
    if n < 3 {
        Err(SuiteError::Usage(format!("{what} = {n}, the affine Yangian needs at least 3")))
    } else {
        Ok(())
    }
}

fn gamma_mutation() -> GammaShift {
    GammaShift { col: 1, delta: Scalar::one() }
}

fn signs(p: &CheckParams) -> Result<Vec<Coproduct>, SuiteError> {
    match p.sign {
        None => Ok(vec![Coproduct::Plus, Coproduct::Minus]),
        Some('+') => Ok(vec![Coproduct::Plus]),
        Some('-') => Ok(vec![Coproduct::Minus]),
        Some(c) => Err(SuiteError::Usage(format!("coproduct sign must be + or -, got {c}"))),
    }
}

fn sides(p: &CheckParams) -> Result<Vec<Side>, SuiteError> {
    match p.side {
        None => Ok(vec![Side::L, Side::R]),
        Some(c) => Ok(vec![c.to_string().parse::<Side>().map_err(|e| SuiteError::Usage(e.to_string()))?]),
    }
}

/// A_i^± = Ã_i^± − Ã_{i+1}^± + ħ h_i⊗h_i on two rank-n loop slots.
fn a_tilde_instances(n: usize, sign: Coproduct) -> Vec<Instance> {
    let (l, r) = (GlMap::slot(n, 0), GlMap::slot(n, 1));
    (1..n)
        .map(|i| {
            let mut t = a_tilde(sign, &l, &r, i);
            t.add_scaled(&a_tilde(sign, &l, &r, i + 1), &Scalar::int(-1));
            t.add_scaled(&h_tensor_h(&l, &r, i), &Scalar::one());
            Instance::new(format!("a-tilde/i{i}"), Operator::series(a_series(sign, &l, &r, i)), Operator::series(t))
        })
        .collect()
}

fn sign_name(s: Coproduct) -> &'static str {
    match s {
        Coproduct::Plus => "+",
        Coproduct::Minus => "-",
    }
}

/// Run `suite`. Parameter errors come back as `SuiteError::Usage`;
/// verification failures are recorded in the report.
pub fn run(suite: Suite, p: &CheckParams) -> Result<Report, SuiteError> {
    if p.mutate && !suite.mutable() {
        return Err(SuiteError::Usage(format!("suite {suite} has no canonical mutation")));
    }
    let start = Instant::now();
    let mut extra = serde_json::Map::new();
    let mut out: Vec<InstanceResult> = Vec::new();
    let d = p.depth;
    match suite {
        Suite::YangEv => {
            min3("n", p.n)?;
            let ctx = loop_context(p.n, 1);
            let img = ev_with(&ctx, 0, &Scalar::k(), if p.mutate { 1 } else { -1 })?;
            extra.insert("eps".into(), img.eps.to_string().into());
            extra.insert("a".into(), "k".into());
            out = verify_relations(&ctx, &img, d);
        }
        Suite::YangPsi => {
            min3("m", p.m)?;
            let ctx = loop_context(p.m + p.add, 1);
            let img = psi(&ev_with(&ctx, 0, &Scalar::k(), -1)?, p.add)?;
            extra.insert("eps".into(), img.eps.to_string().into());
            extra.insert("a".into(), "k".into());
            out = verify_relations(&ctx, &img, d);
        }
        Suite::YangCoproduct => {
            min3("n", p.n)?;
            let ctx = loop_context(p.n, 2);
            let l = ev_with(&ctx, 0, &Scalar::zero(), -1)?;
            let r = ev_with(&ctx, 1, &Scalar::k(), -1)?;
            extra.insert("eps".into(), l.eps.to_string().into());
            extra.insert("a".into(), serde_json::json!(["0", "k"]));
            for sign in signs(p)? {
                let img = delta_with(sign, &l, &r, if p.literal { 1 } else { 0 })?;
                let tag = format!("delta{}", sign_name(sign));
                out.extend(prefixed(&tag, verify_relations(&ctx, &img, d)));
                out.extend(prefixed(&tag, check_instances(&ctx, &a_tilde_instances(p.n, sign), d)));
            }
        }
        Suite::YangDeltal => {
            let pyr = p.pyramid()?;
            let (ctx, img) = crate::parabolic::hojo_lhs(&pyr, &phi_opts(p))?;
            extra.insert("eps".into(), img.eps.to_string().into());
            out = verify_relations(&ctx, &img, d);
        }
        Suite::D0Kernel => {
            let pyr = p.pyramid()?;
            let shift = p.mutate.then(gamma_mutation);
            out = verify_d0_kernel_shifted(&pyr, shift.as_ref());
        }
        Suite::OpeLemma => {
            let pyr = p.pyramid()?;
            out = verify_ope_lemma(&pyr);
        }
        Suite::Hojo => {
            let pyr = p.pyramid()?;
            let opts = phi_opts(p);
            extra.insert("eps".into(), main_eps(&pyr).to_string().into());
            out = verify_hojo(&pyr, d, &opts)?;
            if p.diagnose {
                let is: Vec<usize> = match p.i {
                    Some(i) if (1..pyr.q_min()).contains(&i) => vec![i],
                    Some(i) => return Err(SuiteError::Usage(format!("i = {i} is outside 1..{}", pyr.q_min() - 1))),
                    None => (1..pyr.q_min()).collect(),
                };
                for i in is {
                    out.extend(prefixed("diagnose", diagnose_hojo(&pyr, i, d, &opts)?));
                }
            }
        }
        Suite::MiuraSplit => {
            let split = split(p)?;
            let opts = DeltaWOptions {
                cross_sign: if p.literal { -1 } else { 1 },
                gamma_delta: p.mutate.then(Scalar::one),
            };
            out = verify_miura_factorization(&split, d, &opts)?;
        }
        Suite::Extended => {
            min3("m", p.m)?;
            let opts = if p.literal { ExtOptions::literal() } else { ExtOptions::default() };
            for side in sides(p)? {
                let tag = format!("{side:?}");
                out.extend(prefixed(&tag, verify_extended_relations(side, p.m, p.add, p.xmax, d, &opts)?));
            }
        }
        Suite::ParabolicCompat => {
            let split = split(p)?;
            let mut opts = if p.literal { CompatOptions::literal() } else { CompatOptions::default() };
            opts.phi = phi_opts(p);
            if p.mutate {
                opts.tau_delta = Some(Scalar::hbar());
            }
            extra.insert("eps".into(), main_eps(&split.parent).to_string().into());
            out = verify_parabolic_compat(&split, d, &opts)?;
        }
    }
    let mut params = serde_json::to_value(p).expect("params serialize");
    params.as_object_mut().expect("object").extend(extra);
    let mut report = Report::new(suite.name(), params);
    report.instances = out;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

fn phi_opts(p: &CheckParams) -> PhiOptions {
    let mut o = if p.literal { PhiOptions { ww: 1, param_sign: 1, shift: None } } else { PhiOptions::default() };
    if p.mutate {
        o.shift = Some(gamma_mutation());
    }
    o
}

fn split(p: &CheckParams) -> Result<SplitSpec, SuiteError> {
    let pyr = p.pyramid()?;
    if pyr.q_min() < 3 {
        return Err(ParError::SmallMin(pyr.q_min()).into());
    }
    SplitSpec::new(&pyr, p.w).map_err(SuiteError::from)
}

fn prefixed(tag: &str, rs: Vec<InstanceResult>) -> Vec<InstanceResult> {
    rs.into_iter()
        .map(|mut r| {
            r.id = format!("{tag}/{}", r.id);
            r
        })
        .collect()
}
