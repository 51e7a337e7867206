//! Standard p-group and module instances.

use std::sync::Arc;

use crate::action::{OffenderOptions, SemidirectContext};
use crate::error::{Error, Result};
use crate::group::{ElemId, ExplicitGroup, SubgroupHandle};
use crate::linalg::{FieldSpec, FpMatrix, Subspace};

/// Full upper unitriangular group `UT(n, p)`.
pub fn unitriangular(n: usize, p: u32, cap: usize) -> Result<Arc<ExplicitGroup>> {
    if n < 2 {
        return Err(Error::PreconditionFailed("unitriangular groups need n >= 2".into()));
    }
    let f = FieldSpec::new(p)?;
    let log = (n * (n - 1) / 2) as u32;
    let order = (p as usize).checked_pow(log).unwrap_or(usize::MAX);
    if order > cap {
        return Err(Error::CapExceeded { count: order, cap });
    }
    let gens = (0..n - 1).map(|i| FpMatrix::transvection(f, n, i, i + 1)).collect();
    ExplicitGroup::close(f, n, gens, cap)
}

/// `UT(n, p)` on its natural module.
pub fn unitriangular_context(n: usize, p: u32, cap: usize) -> Result<SemidirectContext> {
    Ok(SemidirectContext::with_cap(unitriangular(n, p, cap)?, cap))
}

/// The extraspecial group of order `p³` and exponent p, as `UT(3, p)`.
pub fn extraspecial_exponent_p(p: u32, cap: usize) -> Result<Arc<ExplicitGroup>> {
    unitriangular(3, p, cap)
}

/// Single Jordan block of size `n`.
pub fn jordan_block(f: FieldSpec, n: usize) -> FpMatrix {
    let mut j = FpMatrix::identity(f, n);
    for i in 0..n.saturating_sub(1) {
        j.set(i, i + 1, 1);
    }
    j
}

/// `⟨J_n⟩` acting on `F_p^n`.
pub fn jordan_block_module(n: usize, p: u32, cap: usize) -> Result<SemidirectContext> {
    let f = FieldSpec::new(p)?;
    SemidirectContext::from_generators(f, n, vec![jordan_block(f, n)], cap)
}

fn block_diagonal(blocks: &[&FpMatrix]) -> FpMatrix {
    let f = blocks[0].field();
    let n: usize = blocks.iter().map(|b| b.dim()).sum();
    let mut m = FpMatrix::zero(f, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                m.set(off + i, off + j, b.get(i, j));
            }
        }
        off += b.dim();
    }
    m
}

/// `V₁ ⊕ V₂` for two modules of the same group, given by matching generator
/// lists; `G` acts diagonally.
pub fn direct_sum_contexts(a: &SemidirectContext, b: &SemidirectContext, cap: usize) -> Result<SemidirectContext> {
    if a.field() != b.field() {
        return Err(Error::ModulusMismatch { left: a.field().p(), right: b.field().p() });
    }
    let (ga, gb) = (a.group().generators(), b.group().generators());
    if ga.len() != gb.len() {
        return Err(Error::PreconditionFailed("generator lists differ in length".into()));
    }
    let gens = ga.iter().zip(gb).map(|(x, y)| block_diagonal(&[x, y])).collect();
    SemidirectContext::from_generators(a.field(), a.n() + b.n(), gens, cap)
}

/// `V ⊕ F_p^t` with trivial action on the second summand.
pub fn add_trivial_summand(ctx: &SemidirectContext, t: usize, cap: usize) -> Result<SemidirectContext> {
    let f = ctx.field();
    let one = FpMatrix::identity(f, t);
    let gens = ctx.group().generators().iter().map(|x| block_diagonal(&[x, &one])).collect();
    SemidirectContext::from_generators(f, ctx.n() + t, gens, cap)
}

/// `C_p ≀ C_p` as permutation matrices on `p²` points, with its base group.
#[derive(Clone, Debug)]
pub struct Wreath {
    pub group: Arc<ExplicitGroup>,
    pub base: SubgroupHandle,
    /// Generators of the base, one per block, followed by the top generator.
    pub base_generators: Vec<ElemId>,
    pub top: ElemId,
}

/// Permutation matrix with `e_x · P = e_{σ(x)}`.
fn permutation_matrix(f: FieldSpec, sigma: &[usize]) -> FpMatrix {
    let mut m = FpMatrix::zero(f, sigma.len());
    for (x, &y) in sigma.iter().enumerate() {
        m.set(x, y, 1);
    }
    m
}

/// Point `(i, j)` is `i·p + j`: block `i`, position `j`.
fn wreath_generators(p: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let base = (0..p)
        .map(|i| {
            (0..p * p)
                .map(|x| if x / p == i { i * p + (x % p + 1) % p } else { x })
                .collect()
        })
        .collect();
    let top = (0..p * p).map(|x| ((x / p + 1) % p) * p + x % p).collect();
    (base, top)
}

pub fn wreath_cp_cp(p: u32, cap: usize) -> Result<Wreath> {
    let f = FieldSpec::new(p)?;
    let pp = p as usize;
    let order = pp.checked_pow(p + 1).unwrap_or(usize::MAX);
    if order > cap {
        return Err(Error::CapExceeded { count: order, cap });
    }
    let (base_perms, top_perm) = wreath_generators(pp);
    let base_mats: Vec<FpMatrix> = base_perms.iter().map(|s| permutation_matrix(f, s)).collect();
    let top_mat = permutation_matrix(f, &top_perm);
    let mut gens = base_mats.clone();
    gens.push(top_mat.clone());
    let group = ExplicitGroup::close(f, pp * pp, gens, cap)?;
    let base_generators: Vec<ElemId> = base_mats.iter().map(|m| group.expect_id(m)).collect();
    let base = group.subgroup(&base_generators);
    let top = group.expect_id(&top_mat);
    Ok(Wreath { group, base, base_generators, top })
}

/// An 8-dimensional module for `C₃ ≀ C₃` with diagnostics.
#[derive(Debug)]
pub struct CandidateModule {
    pub name: &'static str,
    pub ctx: SemidirectContext,
    pub f_module: bool,
    pub base_offends: bool,
    pub offender_count: usize,
    pub ps_degree: usize,
}

/// Matrices of the induced action on the subspace with basis `basis`, or
/// `None` if some image leaves the subspace.
fn restrict(f: FieldSpec, basis: &[Vec<u8>], g: &FpMatrix) -> Option<FpMatrix> {
    let d = basis.len();
    let n = g.dim();
    let mut m = FpMatrix::zero(f, d);
    for (i, b) in basis.iter().enumerate() {
        let img = crate::linalg::vec_mat(f, b, g);
        let coords = solve_coordinates(f, basis, &img, n)?;
        for (j, c) in coords.into_iter().enumerate() {
            m.set(i, j, c);
        }
    }
    Some(m)
}

/// Coordinates of `v` in the basis, by brute elimination.
fn solve_coordinates(f: FieldSpec, basis: &[Vec<u8>], v: &[u8], n: usize) -> Option<Vec<u8>> {
    let d = basis.len();
    // Augmented system: columns are basis vectors, one row per ambient coordinate.
    let mut rows: Vec<Vec<u8>> = (0..n).map(|r| basis.iter().map(|b| b[r]).chain([v[r]]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let Some(pr) = (r..n).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, pr);
        let inv = f.inv(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..n {
            if i != r && rows[i][c] != 0 {
                let k = rows[i][c];
                for j in 0..=d {
                    let t = f.mul(k, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[d] != 0) {
        return None;
    }
    let mut out = vec![0u8; d];
    for (i, &c) in pivots.iter().enumerate() {
        out[c] = rows[i][d];
    }
    Some(out)
}

/// Action on `F^n / span(w)` in the basis `e_i, i ≠ drop`, where `w_drop ≠ 0`.
fn quotient_by_vector(f: FieldSpec, g: &FpMatrix, w: &[u8], drop: usize) -> FpMatrix {
    let n = g.dim();
    let keep: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
    let scale = f.inv(w[drop]);
    let mut m = FpMatrix::zero(f, n - 1);
    for (ri, &i) in keep.iter().enumerate() {
        let row = g.row(i);
        // Reduce away the `drop` coordinate using w.
        let c = f.mul(row[drop], scale);
        for (ci, &j) in keep.iter().enumerate() {
            m.set(ri, ci, f.sub(row[j], f.mul(c, w[j])));
        }
    }
    m
}

fn kron(a: &FpMatrix, b: &FpMatrix) -> FpMatrix {
    let f = a.field();
    let (n, m) = (a.dim(), b.dim());
    let mut out = FpMatrix::zero(f, n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out.set(i * m + k, j * m + l, f.mul(a.get(i, j), b.get(k, l)));
                }
            }
        }
    }
    out
}

/// Faithful 8-dimensional candidates for `C₃ ≀ C₃`: the augmentation
/// submodule and the quotient by fixed points of the degree-9 permutation
/// module, and the tensor-induced module `J₂ ⊗ J₂ ⊗ J₂`.
pub fn candidate_modules_for_wreath3(cap: usize) -> Result<Vec<CandidateModule>> {
    let f = FieldSpec::new(3)?;
    let w = wreath_cp_cp(3, cap)?;
    let order = w.group.order();
    let (base_perms, top_perm) = wreath_generators(3);
    let perms: Vec<FpMatrix> =
        base_perms.iter().chain([&top_perm]).map(|s| permutation_matrix(f, s)).collect();

    let mut raw: Vec<(&'static str, Vec<FpMatrix>)> = Vec::new();
    let augmentation: Vec<Vec<u8>> = (0..8)
        .map(|i| {
            let mut v = vec![0u8; 9];
            v[i] = 1;
            v[8] = 2;
            v
        })
        .collect();
    let aug: Option<Vec<FpMatrix>> = perms.iter().map(|g| restrict(f, &augmentation, g)).collect();
    raw.push(("augmentation", aug.expect("the augmentation submodule is invariant")));
    let ones = vec![1u8; 9];
    raw.push(("quotient-by-fixed-points", perms.iter().map(|g| quotient_by_vector(f, g, &ones, 8)).collect()));
    // Base factor i acts on tensor slot i; the top permutes the slots.
    let j2 = jordan_block(f, 2);
    let id2 = FpMatrix::identity(f, 2);
    let mut tensor: Vec<FpMatrix> = (0..3)
        .map(|i| {
            let slots: Vec<&FpMatrix> = (0..3).map(|s| if s == i { &j2 } else { &id2 }).collect();
            kron(&kron(slots[0], slots[1]), slots[2])
        })
        .collect();
    let cycle: Vec<usize> = (0..8)
        .map(|x| {
            let (a, b, c) = (x >> 2 & 1, x >> 1 & 1, x & 1);
            // (a, b, c) ↦ (c, a, b): slot i moves to slot i + 1.
            (c << 2) | (a << 1) | b
        })
        .collect();
    tensor.push(permutation_matrix(f, &cycle));
    raw.push(("tensor-induced", tensor));

    let mut out = Vec::new();
    for (name, gens) in raw {
        let ctx = SemidirectContext::from_generators(f, 8, gens.clone(), cap)?;
        if ctx.group().order() != order {
            continue;
        }
        let offenders = ctx.find_offenders(&OffenderOptions { cap, ..Default::default() })?;
        // The base is generated by the images of the first three generators.
        let base_ids: Vec<ElemId> = gens[..3].iter().map(|m| ctx.group().expect_id(m)).collect();
        let base = ctx.group().subgroup(&base_ids);
        let base_offends = base.log_order() as usize + ctx.fixed_space(&base).dim() >= 8;
        let ps_degree = ctx.ps_degree()?;
        out.push(CandidateModule {
            name,
            f_module: !offenders.is_empty(),
            base_offends,
            offender_count: offenders.len(),
            ps_degree,
            ctx,
        });
    }
    Ok(out)
}

/// A corpus entry, built on demand.
#[derive(Debug)]
pub enum Instance {
    Group { group: Arc<ExplicitGroup>, base: Option<SubgroupHandle> },
    Module(SemidirectContext),
}

impl Instance {
    pub fn p(&self) -> u32 {
        match self {
            Instance::Group { group, .. } => group.field().p(),
            Instance::Module(ctx) => ctx.field().p(),
        }
    }
}

/// Where an expected fact comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactSource {
    /// Follows from the construction.
    Construction,
    /// Established by an independent computation.
    Computation,
    /// A published statement about the instance.
    Literature,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    /// `log_p` of the order of the group (of `G` for modules).
    LogOrder(u32),
    Class(usize),
    PsDegree(usize),
    FModule(bool),
    /// `J_e = X_3 =` the base subgroup (wreath products only).
    BaseIsJeAndX3,
}

#[derive(Clone, Debug)]
pub struct ExpectedFact {
    pub fact: Fact,
    pub source: FactSource,
}

#[derive(Clone, Debug)]
pub struct InstanceSpec {
    pub name: &'static str,
    pub p: u32,
    pub description: &'static str,
    pub facts: Vec<ExpectedFact>,
}

fn fact(fact: Fact, source: FactSource) -> ExpectedFact {
    ExpectedFact { fact, source }
}

/// Every corpus entry with its expected facts.
pub fn catalog() -> Vec<InstanceSpec> {
    use Fact::*;
    use FactSource::*;
    vec![
        InstanceSpec {
            name: "ut2-5",
            p: 5,
            description: "UT(2,5), cyclic of order 5",
            facts: vec![fact(LogOrder(1), Construction), fact(Class(1), Construction)],
        },
        InstanceSpec {
            name: "ut3-5",
            p: 5,
            description: "UT(3,5), extraspecial of exponent 5",
            facts: vec![fact(LogOrder(3), Construction), fact(Class(2), Computation)],
        },
        InstanceSpec {
            name: "ut4-5",
            p: 5,
            description: "UT(4,5)",
            facts: vec![fact(LogOrder(6), Construction), fact(Class(3), Computation)],
        },
        InstanceSpec {
            name: "wreath3",
            p: 3,
            description: "C3 wr C3 as 9x9 permutation matrices",
            facts: vec![
                fact(LogOrder(4), Construction),
                fact(Class(3), Computation),
                fact(BaseIsJeAndX3, Literature),
            ],
        },
        InstanceSpec {
            name: "wreath5",
            p: 5,
            description: "C5 wr C5 as 25x25 permutation matrices",
            facts: vec![fact(LogOrder(6), Construction), fact(Class(5), Computation)],
        },
        InstanceSpec {
            name: "ut3-5-natural",
            p: 5,
            description: "UT(3,5) on F_5^3",
            facts: vec![
                fact(LogOrder(3), Construction),
                fact(PsDegree(2), Computation),
                fact(FModule(true), Computation),
            ],
        },
        InstanceSpec {
            name: "ut4-5-natural",
            p: 5,
            description: "UT(4,5) on F_5^4",
            facts: vec![
                fact(LogOrder(6), Construction),
                fact(PsDegree(2), Computation),
                fact(FModule(true), Computation),
            ],
        },
        InstanceSpec {
            name: "ut3-5-natural-plus-trivial",
            p: 5,
            description: "UT(3,5) on F_5^3 + F_5; the centre offends with defect 0",
            facts: vec![fact(PsDegree(2), Computation), fact(FModule(true), Computation)],
        },
        InstanceSpec {
            name: "transvection-5",
            p: 5,
            description: "<I + E13> on F_5^3",
            facts: vec![fact(LogOrder(1), Construction), fact(FModule(true), Computation)],
        },
        InstanceSpec {
            name: "jordan2-5",
            p: 5,
            description: "<J_2> on F_5^2",
            facts: vec![fact(PsDegree(2), Construction), fact(FModule(true), Computation)],
        },
        InstanceSpec {
            name: "jordan3-5",
            p: 5,
            description: "<J_3> on F_5^3",
            facts: vec![fact(PsDegree(3), Construction), fact(FModule(false), Computation)],
        },
        InstanceSpec {
            name: "jordan5-5",
            p: 5,
            description: "<J_5> on F_5^5",
            facts: vec![fact(PsDegree(5), Construction), fact(FModule(false), Computation)],
        },
        InstanceSpec {
            name: "jordan5-5-squared",
            p: 5,
            description: "<J_5 + J_5> diagonally on F_5^10",
            facts: vec![fact(PsDegree(5), Construction), fact(FModule(false), Computation)],
        },
        InstanceSpec {
            name: "wreath3-tensor",
            p: 3,
            description: "C3 wr C3 on J_2 (x) J_2 (x) J_2",
            facts: vec![fact(LogOrder(4), Construction), fact(PsDegree(3), Computation)],
        },
    ]
}

pub fn entry(name: &str) -> Option<InstanceSpec> {
    catalog().into_iter().find(|s| s.name == name)
}

pub fn build(name: &str, cap: usize) -> Result<Instance> {
    let group = |g: Arc<ExplicitGroup>| Instance::Group { group: g, base: None };
    Ok(match name {
        "ut2-5" => group(unitriangular(2, 5, cap)?),
        "ut3-5" => group(unitriangular(3, 5, cap)?),
        "ut4-5" => group(unitriangular(4, 5, cap)?),
        "wreath3" | "wreath5" => {
            let w = wreath_cp_cp(if name == "wreath3" { 3 } else { 5 }, cap)?;
            Instance::Group { group: w.group, base: Some(w.base) }
        }
        "ut3-5-natural" => Instance::Module(unitriangular_context(3, 5, cap)?),
        "ut4-5-natural" => Instance::Module(unitriangular_context(4, 5, cap)?),
        "ut3-5-natural-plus-trivial" => {
            Instance::Module(add_trivial_summand(&unitriangular_context(3, 5, cap)?, 1, cap)?)
        }
        "transvection-5" => {
            let f = FieldSpec::new(5)?;
            Instance::Module(SemidirectContext::from_generators(f, 3, vec![FpMatrix::transvection(f, 3, 0, 2)], cap)?)
        }
        "jordan2-5" => Instance::Module(jordan_block_module(2, 5, cap)?),
        "jordan3-5" => Instance::Module(jordan_block_module(3, 5, cap)?),
        "jordan5-5" => Instance::Module(jordan_block_module(5, 5, cap)?),
        "jordan5-5-squared" => {
            let j = jordan_block_module(5, 5, cap)?;
            Instance::Module(direct_sum_contexts(&j, &j, cap)?)
        }
        "wreath3-tensor" => {
            let c = candidate_modules_for_wreath3(cap)?
                .into_iter()
                .find(|c| c.name == "tensor-induced")
                .ok_or_else(|| Error::UnsupportedInstance("tensor-induced module is not faithful".into()))?;
            Instance::Module(c.ctx)
        }
        _ => return Err(Error::UnsupportedInstance(format!("unknown corpus instance {name}"))),
    })
}

/// Checks each expected fact; returns the facts with their outcomes.
pub fn verify_facts(entry: &InstanceSpec, instance: &Instance, cap: usize) -> Result<Vec<(Fact, bool)>> {
    let mut out = Vec::new();
    for ef in &entry.facts {
        let ok = match (&ef.fact, instance) {
            (Fact::LogOrder(e), Instance::Group { group, .. }) => group.log_order() == *e,
            (Fact::LogOrder(e), Instance::Module(ctx)) => ctx.group().log_order() == *e,
            (Fact::Class(c), Instance::Group { group, .. }) => crate::group::nilpotence_class(&group.whole()) == *c,
            (Fact::Class(c), Instance::Module(ctx)) => crate::group::nilpotence_class(&ctx.whole_group()) == *c,
            (Fact::PsDegree(d), Instance::Module(ctx)) => ctx.ps_degree()? == *d,
            (Fact::FModule(b), Instance::Module(ctx)) => {
                let offenders = ctx.find_offenders(&OffenderOptions { cap, ..Default::default() })?;
                offenders.is_empty() != *b
            }
            (Fact::BaseIsJeAndX3, Instance::Group { group, base: Some(base) }) => {
                let g = group.whole();
                let je = crate::characteristic::compute_je(&g, cap)?;
                let (x3, _) = crate::characteristic::compute_xk(&g, 3)?;
                je == *base && x3 == *base
            }
            _ => false,
        };
        out.push((ef.fact.clone(), ok));
    }
    Ok(out)
}

/// Basis vectors `e_i` of `F_p^n`, handy for building subspaces.
pub fn unit_vector(n: usize, i: usize) -> Vec<u8> {
    let mut v = vec![0u8; n];
    v[i] = 1;
    v
}

/// `C_V(E)` computed on all members rather than generators; an oracle for
/// fixed-space computations.
pub fn fixed_space_by_members(ctx: &SemidirectContext, e: &SubgroupHandle) -> Subspace {
    let mut acc = ctx.module();
    for x in e.member_ids() {
        let k = crate::linalg::kernel(&ctx.group().element(x).minus_identity());
        acc = acc.intersect(&k).expect("same ambient");
    }
    acc
}


#[cfg(test)]
mod catalog_tests {
    use super::*;
    use crate::group::DEFAULT_CAP;

    #[test]
    fn catalog_facts_hold() {
        for entry in catalog() {
            let inst = build(entry.name, DEFAULT_CAP).unwrap();
            for (fact, ok) in verify_facts(&entry, &inst, DEFAULT_CAP).unwrap() {
                println!("{} {:?} {}", entry.name, fact, ok);
                assert!(ok, "{} {:?}", entry.name, fact);
            }
        }
    }

    #[test]
    fn wreath3_candidates_are_not_f_modules() {
        for c in candidate_modules_for_wreath3(DEFAULT_CAP).unwrap() {
            assert!(!c.f_module && !c.base_offends, "{}", c.name);
            assert_eq!((c.offender_count, c.ps_degree), (0, 3), "{}", c.name);
        }
    }

    #[test]
    fn wreath3_base_dichotomy() {
        use crate::replacement::{dichotomy_failure, elementary_replacement_dichotomy, Dichotomy};
        let w = wreath_cp_cp(3, DEFAULT_CAP).unwrap();
        let g = w.group.whole();
        assert_eq!(dichotomy_failure(&w.group, &w.base), None);
        assert!(matches!(
            elementary_replacement_dichotomy(&g, &w.base, DEFAULT_CAP).unwrap(),
            Dichotomy::AllCentralize
        ));
        assert!(crate::characteristic::x3_le_centralizer_of_w(&g, &w.base).unwrap());
        assert_eq!(crate::group::centralizer(&g, &w.base).unwrap(), w.base);
    }
}
