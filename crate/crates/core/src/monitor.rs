//! Runtime checks that a module is consistent with the known no-offender
//! and replacement results. A monitor that fires carries a certificate.

use crate::action::{OffenderOptions, SemidirectContext};
use crate::characteristic::compute_baum;
use crate::corpus::fixed_space_by_members;
use crate::error::{Error, Result};
use crate::group::{nilpotence_class, normal_closure, SubgroupHandle};
use crate::linalg::FpMatrix;
use crate::replacement::{normal_w, two_subnormal_offender};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MonitorKind {
    /// Class at most `⌊log₂(p−2)⌋ + 1` and PS(p) forces no offenders.
    ClassBound,
    /// For p ≥ 5, `Baum(G) = G` and PS(k) with `3 ≤ k ≤ p` forces no offenders.
    BaumPs,
    /// For p ≥ 5, an F-module has a quadratic 2-subnormal offender and the
    /// normal-W descent succeeds.
    TwoSubnormal,
}

impl MonitorKind {
    pub fn name(self) -> &'static str {
        match self {
            MonitorKind::ClassBound => "class-bound",
            MonitorKind::BaumPs => "baum-ps",
            MonitorKind::TwoSubnormal => "two-subnormal",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MonitorOptions {
    pub cap: usize,
    #[doc(hidden)]
    pub corrupt_inequality: bool,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self { cap: crate::group::DEFAULT_CAP, corrupt_inequality: false }
    }
}

/// Data needed to re-check a fired monitor from scratch.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub claim: String,
    /// Generators of the offending `E ≤ G`, in module coordinates.
    pub offender: Vec<FpMatrix>,
    pub log_order_e: u32,
    /// Basis of `C_V(E)`.
    pub fixed_basis: Vec<Vec<u8>>,
    pub module_dim: usize,
    /// Outcome of recomputing `|E||C_V(E)| ≥ |V|` over all members of `E`.
    pub recheck: bool,
}

#[derive(Clone, Debug)]
pub struct MonitorOutcome {
    pub kind: MonitorKind,
    pub applicable: bool,
    pub fired: bool,
    pub detail: String,
    pub certificate: Option<Certificate>,
}

impl MonitorOutcome {
    fn skipped(kind: MonitorKind, detail: impl Into<String>) -> Self {
        Self { kind, applicable: false, fired: false, detail: detail.into(), certificate: None }
    }

    fn passed(kind: MonitorKind, detail: impl Into<String>) -> Self {
        Self { kind, applicable: true, fired: false, detail: detail.into(), certificate: None }
    }
}

/// `⌊log₂(p − 2)⌋ + 1`.
pub fn class_bound(p: u32) -> usize {
    (u32::BITS - (p - 2).leading_zeros()) as usize
}

fn certificate(ctx: &SemidirectContext, e: &SubgroupHandle, claim: String) -> Certificate {
    let fixed = fixed_space_by_members(ctx, e);
    let recheck = e.log_order() as usize + fixed.dim() >= ctx.n() && !e.is_trivial();
    Certificate {
        claim,
        offender: e.generator_matrices(),
        log_order_e: e.log_order(),
        fixed_basis: fixed.basis().to_vec(),
        module_dim: ctx.n(),
        recheck,
    }
}

fn offender_verdict(ctx: &SemidirectContext, kind: MonitorKind, opts: &MonitorOptions, premise: String) -> Result<MonitorOutcome> {
    let offenders = ctx.find_offenders(&OffenderOptions {
        cap: opts.cap,
        corrupt_inequality: opts.corrupt_inequality,
        ..Default::default()
    })?;
    Ok(match offenders.first() {
        None => MonitorOutcome::passed(kind, format!("{premise}; no offenders")),
        Some(o) => {
            let claim = format!("{premise}, yet E of order p^{} offends", o.e.log_order());
            let cert = certificate(ctx, &o.e, claim.clone());
            MonitorOutcome { kind, applicable: true, fired: true, detail: claim, certificate: Some(cert) }
        }
    })
}

fn class_bound_monitor(ctx: &SemidirectContext, ps: usize, opts: &MonitorOptions) -> Result<MonitorOutcome> {
    let kind = MonitorKind::ClassBound;
    let p = ctx.field().p();
    if p < 3 {
        return Ok(MonitorOutcome::skipped(kind, "p = 2"));
    }
    let class = nilpotence_class(&ctx.whole_group());
    let bound = class_bound(p);
    if class > bound {
        return Ok(MonitorOutcome::skipped(kind, format!("class {class} exceeds bound {bound}")));
    }
    if ps < p as usize {
        return Ok(MonitorOutcome::skipped(kind, format!("PS degree {ps} below p")));
    }
    offender_verdict(ctx, kind, opts, format!("class {class} <= {bound} and PS({p})"))
}

fn baum_monitor(ctx: &SemidirectContext, ps: usize, opts: &MonitorOptions) -> Result<MonitorOutcome> {
    let kind = MonitorKind::BaumPs;
    let p = ctx.field().p();
    if p < 5 {
        return Ok(MonitorOutcome::skipped(kind, "p < 5"));
    }
    if ps < 3 {
        return Ok(MonitorOutcome::skipped(kind, format!("PS degree {ps} below 3")));
    }
    let whole = ctx.whole_group();
    if !compute_baum(&whole, opts.cap)?.is_whole() {
        return Ok(MonitorOutcome::skipped(kind, "Baum(G) is proper"));
    }
    let k = ps.min(p as usize);
    offender_verdict(ctx, kind, opts, format!("Baum(G) = G and PS({k})"))
}

fn two_subnormal_monitor(ctx: &SemidirectContext, opts: &MonitorOptions) -> Result<MonitorOutcome> {
    let kind = MonitorKind::TwoSubnormal;
    if ctx.field().p() < 5 {
        return Ok(MonitorOutcome::skipped(kind, "p < 5"));
    }
    let offenders = ctx.find_offenders(&OffenderOptions { cap: opts.cap, ..Default::default() })?;
    if offenders.is_empty() {
        return Ok(MonitorOutcome::skipped(kind, "not an F-module"));
    }
    let fire = |detail: String, e: Option<&SubgroupHandle>| {
        let certificate = e.map(|e| certificate(ctx, e, detail.clone()));
        Ok(MonitorOutcome { kind, applicable: true, fired: true, detail, certificate })
    };
    let ts = match two_subnormal_offender(ctx) {
        Ok(ts) => ts,
        Err(Error::Contradiction(msg)) => return fire(msg, offenders.first().map(|o| &o.e)),
        Err(e) => return Err(e),
    };
    // Re-verify the three properties from scratch.
    let e = &ts.offender.e;
    let fixed = fixed_space_by_members(ctx, e);
    let offends = e.log_order() as usize + fixed.dim() >= ctx.n();
    let quadratic = e.member_ids().all(|x| {
        let a = ctx.group().element(x).minus_identity();
        e.member_ids().all(|y| a.mul(&ctx.group().element(y).minus_identity()).is_zero())
    });
    let nc = normal_closure(&ctx.whole_group(), e)?;
    let two_subnormal = e.is_normal_in(&nc.subgroup);
    if !(offends && quadratic && two_subnormal) {
        return fire(
            format!("recheck failed: offends {offends}, quadratic {quadratic}, 2-subnormal {two_subnormal}"),
            Some(e),
        );
    }
    match normal_w(ctx, Some(e)) {
        Ok(w) => Ok(MonitorOutcome::passed(
            kind,
            format!("E of order p^{} rechecked; W of order p^{} at depth {}", e.log_order(), w.w.log_order(), w.j),
        )),
        Err(Error::Contradiction(msg)) => fire(msg, Some(e)),
        Err(err) => Err(err),
    }
}

/// Runs every monitor. Monitors whose premises fail are reported as not
/// applicable.
pub fn run_monitors(ctx: &SemidirectContext, opts: &MonitorOptions) -> Result<Vec<MonitorOutcome>> {
    if ctx.group().order() == 1 {
        return Ok([MonitorKind::ClassBound, MonitorKind::BaumPs, MonitorKind::TwoSubnormal]
            .into_iter()
            .map(|k| MonitorOutcome::skipped(k, "G is trivial"))
            .collect());
    }
    let ps = ctx.ps_degree()?;
    Ok(vec![class_bound_monitor(ctx, ps, opts)?, baum_monitor(ctx, ps, opts)?, two_subnormal_monitor(ctx, opts)?])
}
