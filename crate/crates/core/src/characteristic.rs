//! Characteristic subgroups: `X_k`, `J_e`, `Baum`, and conjecture checks.

use fixedbitset::FixedBitSet;

use crate::action::{Offender, OffenderOptions, SemidirectContext};
use crate::error::{Error, Result};
use crate::linalg::FpMatrix;
use crate::group::{
    center, centralizer, cover, iterated_commutator, max_elementary_abelian_subgroups_seeded, omega1, ElemId,
    SubgroupHandle, DEFAULT_CAP,
};

/// Order in which `compute_xk` scans candidate elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ScanOrder {
    #[default]
    Canonical,
    Reversed,
}

/// `1 = Q_0 < Q_1 < … < Q_n = X_k(S)` with every `Q_i` normal in `S` and
/// `[Ω₁(C_S(Q_{i−1})), Q_i; k−1] = 1`.
#[derive(Clone, Debug)]
pub struct OliverChain {
    pub k: usize,
    pub terms: Vec<SubgroupHandle>,
}

impl OliverChain {
    pub fn top(&self) -> &SubgroupHandle {
        self.terms.last().expect("chains start at the trivial group")
    }
}

fn check_k(s: &SubgroupHandle, k: usize) -> Result<()> {
    let p = s.ambient().field().p();
    if k < 3 || k > p as usize {
        return Err(Error::InvalidK { k, p });
    }
    Ok(())
}

/// `X_k(S)` for `S` given as a whole enumerated group (or any subgroup of
/// one), with its chain as certificate.
pub fn compute_xk(s: &SubgroupHandle, k: usize) -> Result<(SubgroupHandle, OliverChain)> {
    compute_xk_ordered(s, k, ScanOrder::Canonical)
}

/// Greedy extension: from `Q`, adjoin some `g` with `gQ ∈ Ω₁Z(S/Q)`, so that
/// `Q⟨g⟩` is normal of index p over `Q`. Every proper valid extension of `Q`
/// contains one of this shape, and the bracket condition passes to
/// subgroups, so the scan loses nothing.
pub fn compute_xk_ordered(s: &SubgroupHandle, k: usize, order: ScanOrder) -> Result<(SubgroupHandle, OliverChain)> {
    check_k(s, k)?;
    let g = s.ambient();
    let pth = g.pth_powers();
    let mut q = g.trivial();
    let mut terms = vec![q.clone()];
    let mut ids: Vec<ElemId> = s.member_ids().collect();
    if order == ScanOrder::Reversed {
        ids.reverse();
    }
    'grow: loop {
        let c = omega1(&centralizer(s, &q)?);
        let c_gens = c.generators().to_vec();
        let mut done = FixedBitSet::with_capacity(g.order());
        for &x in &ids {
            if q.contains(x) || done.contains(x as usize) {
                continue;
            }
            if !q.contains(pth[x as usize]) || !s.generators().iter().all(|&y| q.contains(g.comm(x, y))) {
                continue;
            }
            let cheap_fail = c_gens.iter().any(|&cg| {
                let mut acc = cg;
                for _ in 0..k - 1 {
                    acc = g.comm(acc, x);
                }
                acc != g.identity()
            });
            let r = cover(&q, x);
            if !cheap_fail && iterated_commutator(&c, &r, k - 1)?.is_trivial() {
                q = r;
                terms.push(q.clone());
                continue 'grow;
            }
            done.union_with(r.members());
        }
        break;
    }
    Ok((q, OliverChain { k, terms }))
}

/// Re-checks a chain at its own `k`. Returns the first failing index.
pub fn verify_chain(s: &SubgroupHandle, chain: &OliverChain) -> Result<(), usize> {
    verify_chain_at(s, chain, chain.k)
}

/// Re-checks the chain conditions with bracket length `k − 1`.
pub fn verify_chain_at(s: &SubgroupHandle, chain: &OliverChain, k: usize) -> Result<(), usize> {
    match chain.terms.first() {
        Some(t) if t.is_trivial() => {}
        _ => return Err(0),
    }
    for i in 1..chain.terms.len() {
        let (prev, cur) = (&chain.terms[i - 1], &chain.terms[i]);
        let ok = prev.is_subgroup_of(cur)
            && prev.order() < cur.order()
            && cur.is_subgroup_of(s)
            && cur.is_normal_in(s)
            && centralizer(s, prev)
                .and_then(|c| iterated_commutator(&omega1(&c), cur, k - 1))
                .is_ok_and(|b| b.is_trivial());
        if !ok {
            return Err(i);
        }
    }
    Ok(())
}

/// `J_e(S)`: the join of the elementary abelian subgroups of maximum order.
pub fn compute_je(s: &SubgroupHandle, cap: usize) -> Result<SubgroupHandle> {
    compute_je_seeded(s, &[], cap)
}

/// `J_e(S)`, with known elementary abelian subgroups bounding the search.
pub fn compute_je_seeded(s: &SubgroupHandle, seeds: &[SubgroupHandle], cap: usize) -> Result<SubgroupHandle> {
    let maxes = max_elementary_abelian_subgroups_seeded(s, seeds, cap)?;
    let mut acc = s.ambient().trivial();
    for m in &maxes {
        acc = acc.join(m)?;
    }
    Ok(acc)
}

/// `Baum(G) = C_G(Ω₁Z(J_e(G)))`.
pub fn compute_baum(g: &SubgroupHandle, cap: usize) -> Result<SubgroupHandle> {
    let je = compute_je(g, cap)?;
    centralizer(g, &omega1(&center(&je)))
}

/// `J_e(V ⋊ G) ≤ V` exactly when there are no offenders.
#[derive(Clone, Debug)]
pub struct JeReduction {
    pub within_v: bool,
    pub offenders: Vec<Offender>,
}

pub fn je_reduction(ctx: &SemidirectContext) -> Result<JeReduction> {
    let offenders = ctx.find_offenders(&OffenderOptions { cap: ctx.cap(), ..Default::default() })?;
    Ok(JeReduction { within_v: offenders.is_empty(), offenders })
}

/// `G = S/X_k(S)` acting by conjugation on `V = Ω₁Z(X_k(S))`.
#[derive(Debug)]
pub struct ModuleReduction {
    pub x: SubgroupHandle,
    pub v: SubgroupHandle,
    /// Elements of `V` forming the module basis.
    pub basis: Vec<ElemId>,
    pub ctx: SemidirectContext,
    /// `C_S(V) = X_k(S)`, i.e. the action of `S/X_k(S)` is faithful.
    pub faithful: bool,
}

pub fn reduce_to_module(s: &SubgroupHandle, k: usize, cap: usize) -> Result<ModuleReduction> {
    let g = s.ambient();
    let f = g.field();
    let (x, _) = compute_xk(s, k)?;
    let v = omega1(&center(&x));
    let mut basis: Vec<ElemId> = Vec::new();
    let mut span = g.trivial();
    for &y in v.generators() {
        if !span.contains(y) {
            basis.push(y);
            span = span.extend(y);
        }
    }
    let d = basis.len();
    let p = f.p() as usize;
    let mut coords: rustc_hash::FxHashMap<ElemId, Vec<u8>> = rustc_hash::FxHashMap::default();
    for idx in 0..p.pow(d as u32) {
        let mut c = vec![0u8; d];
        let mut t = idx;
        let mut elem = g.identity();
        for i in 0..d {
            c[i] = (t % p) as u8;
            t /= p;
            elem = g.mul(elem, g.pow(basis[i], c[i] as u64));
        }
        coords.insert(elem, c);
    }
    let mats: Vec<FpMatrix> = s
        .generators()
        .iter()
        .map(|&h| {
            let mut m = FpMatrix::zero(f, d);
            for (i, &b) in basis.iter().enumerate() {
                for (j, &c) in coords[&g.conj(b, h)].iter().enumerate() {
                    m.set(i, j, c);
                }
            }
            m
        })
        .collect();
    let ctx = SemidirectContext::from_generators(f, d, mats, cap)?;
    let kernel = centralizer(s, &v)?;
    let faithful = kernel == x;
    Ok(ModuleReduction { x, v, basis, ctx, faithful })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Explicit,
    Semidirect,
}

/// How the verdict was reached.
#[derive(Clone, Debug)]
pub enum ConjectureEvidence {
    Explicit { xk: SubgroupHandle, chain: OliverChain, je: SubgroupHandle },
    /// `X_k(V ⋊ G) = V` for a PS-module of degree `≥ k`, so the verdict is
    /// the absence of offenders.
    Reduction { ps_degree: usize, offenders: Vec<Offender> },
}

#[derive(Clone, Debug)]
pub struct ConjectureReport {
    pub p: u32,
    pub k: usize,
    pub mode: CheckMode,
    /// `J_e ≤ X_k`.
    pub holds: bool,
    /// A failure at `k = p`; such reports are re-verified before returning.
    pub counterexample_candidate: bool,
    pub evidence: ConjectureEvidence,
    /// Whether the explicit computation was also run and agreed.
    pub cross_checked: bool,
}

pub enum ConjectureInput<'a> {
    Explicit(&'a SubgroupHandle),
    Semidirect(&'a SemidirectContext),
}

#[derive(Clone, Debug)]
pub struct ConjectureOptions {
    pub cap: usize,
    /// In semidirect mode, also run the explicit check when `|S|` is at most
    /// this.
    pub cross_check_limit: usize,
}

impl Default for ConjectureOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, cross_check_limit: 20_000 }
    }
}

fn explicit_check(
    s: &SubgroupHandle,
    seeds: &[SubgroupHandle],
    k: usize,
    cap: usize,
) -> Result<(bool, ConjectureEvidence)> {
    let (xk, chain) = compute_xk(s, k)?;
    let je = compute_je_seeded(s, seeds, cap)?;
    let holds = je.is_subgroup_of(&xk);
    if !holds && k == s.ambient().field().p() as usize {
        // Re-verify the ingredients before reporting a candidate.
        verify_chain(s, &chain).map_err(|i| Error::Contradiction(format!("chain fails at term {i}")))?;
        let (again, _) = compute_xk_ordered(s, k, ScanOrder::Reversed)?;
        if again != xk {
            return Err(Error::Contradiction("X_k depends on the scan order".into()));
        }
    }
    Ok((holds, ConjectureEvidence::Explicit { xk, chain, je }))
}

pub fn check_conjecture(input: ConjectureInput<'_>, k: usize, opts: &ConjectureOptions) -> Result<ConjectureReport> {
    match input {
        ConjectureInput::Explicit(s) => {
            let p = s.ambient().field().p();
            let (holds, evidence) = explicit_check(s, &[], k, opts.cap)?;
            Ok(ConjectureReport {
                p,
                k,
                mode: CheckMode::Explicit,
                holds,
                counterexample_candidate: !holds && k == p as usize,
                evidence,
                cross_checked: false,
            })
        }
        ConjectureInput::Semidirect(ctx) => {
            let p = ctx.field().p();
            if k < 3 || k > p as usize {
                return Err(Error::InvalidK { k, p });
            }
            let ps_degree = ctx.ps_degree()?;
            let s_order = (p as usize).checked_pow(ctx.log_order_s()).unwrap_or(usize::MAX);
            if ps_degree >= k {
                let red = je_reduction(ctx)?;
                let mut cross_checked = false;
                if s_order <= opts.cross_check_limit.min(opts.cap) {
                    let ex = ctx.explicit()?;
                    let whole = ex.group().whole();
                    let (holds, evidence) = explicit_check(&whole, std::slice::from_ref(ex.v()), k, opts.cap)?;
                    if let ConjectureEvidence::Explicit { xk, .. } = &evidence {
                        if xk != ex.v() {
                            return Err(Error::Contradiction("X_k(V ⋊ G) differs from V for a PS-module".into()));
                        }
                    }
                    if holds != red.within_v {
                        return Err(Error::Contradiction("explicit and reduced verdicts disagree".into()));
                    }
                    cross_checked = true;
                }
                let holds = red.within_v;
                return Ok(ConjectureReport {
                    p,
                    k,
                    mode: CheckMode::Semidirect,
                    holds,
                    counterexample_candidate: !holds && k == p as usize,
                    evidence: ConjectureEvidence::Reduction { ps_degree, offenders: red.offenders },
                    cross_checked,
                });
            }
            if s_order > opts.cap {
                return Err(Error::UnsupportedInstance(format!(
                    "module is PS of degree {ps_degree} < {k} and |S| exceeds the cap"
                )));
            }
            let ex = ctx.explicit()?;
            let whole = ex.group().whole();
            let (holds, evidence) = explicit_check(&whole, std::slice::from_ref(ex.v()), k, opts.cap)?;
            Ok(ConjectureReport {
                p,
                k,
                mode: CheckMode::Explicit,
                holds,
                counterexample_candidate: !holds && k == p as usize,
                evidence,
                cross_checked: false,
            })
        }
    }
}

/// `X_3(G) ≤ C_G(W)`.
pub fn x3_le_centralizer_of_w(g: &SubgroupHandle, w: &SubgroupHandle) -> Result<bool> {
    let (x3, _) = compute_xk(g, 3)?;
    Ok(x3.is_subgroup_of(&centralizer(g, w)?))
}
