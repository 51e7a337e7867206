//! Replacement engines: the Thompson step, the 2-subnormal quadratic offender,
//! the `B_A` machinery with a matrix-logarithm Lie engine, and the descent to
//! a normal subgroup generated by quadratic elements.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::action::{
    cmp_series, explicit_profile, ExplicitSemidirect, Offender, ProductSubgroup, SemidirectContext, SeriesOrdering,
};
use crate::error::{Error, Result};
use crate::group::{
    center, centralizer, closure_under_conjugation, commutator_subgroup, conjugacy_orbit, enumerate_subgroups,
    iterated_commutator, max_elementary_abelian_subgroups, nilpotence_class, normal_closure, omega1, CentralSeries,
    ElemId, ExplicitGroup, SubgroupFilter, SubgroupHandle,
};
use crate::linalg::{matrix_exp, matrix_log, null_space, unipotent_index, FieldSpec, FpMatrix, Subspace};

/// `x ≠ 1` with `(x − 1)² = 0`.
pub fn is_quadratic(x: &FpMatrix) -> bool {
    !x.is_identity() && x.minus_identity().pow(2).is_zero()
}

/// Result of [`thompson_step`].
#[derive(Clone, Debug)]
pub struct ThompsonStep {
    /// `N = [v, A]`.
    pub n: SubgroupHandle,
    /// `A* = N C_A(N)`.
    pub a_star: SubgroupHandle,
}

/// `A* = N C_A(N)` with `N = [v, A]`, asserting the replacement inequalities
/// against every term of `series`, and `A* = A` when they are all equalities.
pub fn thompson_step(
    s: &SubgroupHandle,
    a: &SubgroupHandle,
    v: ElemId,
    series: &CentralSeries,
) -> Result<ThompsonStep> {
    if !a.is_abelian() {
        return Err(Error::PreconditionFailed("A is not abelian".into()));
    }
    let g = s.ambient();
    let brackets: Vec<ElemId> = a.member_ids().map(|x| g.comm(v, x)).collect();
    let n = g.subgroup(&brackets);
    if !n.is_abelian() {
        return Err(Error::NonAbelianBracket);
    }
    let a_star = n.join(&centralizer(a, &n)?)?;
    if !a_star.is_abelian() || a_star.order() < a.order() {
        return Err(Error::Contradiction("Thompson replacement lost abelianness or order".into()));
    }
    let mut all_equal = true;
    for m in &series.terms {
        let lhs = a.intersect(m)?.order();
        let rhs = a_star.intersect(m)?.order();
        if lhs > rhs {
            return Err(Error::Contradiction("|A ∩ M| > |A* ∩ M| for a normal subgroup M".into()));
        }
        all_equal &= lhs == rhs;
    }
    if all_equal && series.verify(s) && a_star != *a {
        return Err(Error::Contradiction("equal profiles but A* != A".into()));
    }
    Ok(ThompsonStep { n, a_star })
}

/// A quadratic offender normal in its normal closure, with the product
/// subgroup it was read off from.
#[derive(Clone, Debug)]
pub struct TwoSubnormal {
    pub offender: Offender,
    pub a: ProductSubgroup,
    /// False for p = 3, where 2-subnormality is not guaranteed and is only
    /// reported.
    pub guaranteed: bool,
}

/// `E = A ∩ G` for a `≤_𝒮`-maximal `A ∈ A_×(S)`, with the three properties
/// asserted.
pub fn two_subnormal_offender(ctx: &SemidirectContext) -> Result<TwoSubnormal> {
    let guaranteed = ctx.field().p() >= 5;
    let series = ctx.central_series_through_v();
    let a = ctx.select_max(&series)?;
    let e = a.e.clone();
    let fixed = ctx.fixed_space(&e);
    let defect = e.log_order() as i64 + fixed.dim() as i64 - ctx.n() as i64;
    if defect < 0 {
        return Err(Error::Contradiction("A ∩ G does not offend".into()));
    }
    if !ctx.module_bracket(&e, 2).is_zero() {
        return Err(Error::Contradiction("A ∩ G is not quadratic".into()));
    }
    let two_subnormal = normal_closure(&ctx.whole_group(), &e)?.two_subnormal;
    if guaranteed && !two_subnormal {
        return Err(Error::Contradiction("A ∩ G is not normal in its normal closure".into()));
    }
    let offender = Offender { e, fixed, defect, quadratic: true, two_subnormal };
    Ok(TwoSubnormal { offender, a, guaranteed })
}

/// Membership of `B` in `B_A`: `B = B_×`, `A ⊴ ⟨A^B⟩` and `[A, u; 3] = 1`
/// for all `u ∈ B`. Both are subgroups of the explicit `S`.
pub fn in_ba(ex: &ExplicitSemidirect, b: &SubgroupHandle, a: &SubgroupHandle) -> Result<bool> {
    if !ex.is_product(b) {
        return Ok(false);
    }
    let s = ex.group();
    let closure = closure_under_conjugation(s, a.generators(), b.generators());
    if !a.is_normal_in(&closure) {
        return Ok(false);
    }
    for u in b.member_ids() {
        // Cheap necessary condition on generators first.
        let quick = a.generators().iter().all(|&x| {
            let mut c = x;
            for _ in 0..3 {
                c = s.comm(c, u);
            }
            c == s.identity()
        });
        if !quick || !iterated_commutator(a, &s.subgroup(&[u]), 3)?.is_trivial() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlaubcorScope {
    /// G-conjugates of members of `A_×(S)`.
    Conjugates,
    /// Every product subgroup of the explicit `S`.
    AllSmallS,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GlaubcorReport {
    pub candidates: usize,
    pub in_ba: usize,
    pub conjugates_checked: usize,
}

/// Checks that every member of `B_A` in the chosen scope normalizes `A`,
/// and that `A` and each of its `S`-conjugates normalize each other.
pub fn verify_glaubcor(ctx: &SemidirectContext, a: &ProductSubgroup, scope: GlaubcorScope) -> Result<GlaubcorReport> {
    let ex = ctx.explicit()?;
    let a_real = ex.realize(a);
    let candidates: Vec<ProductSubgroup> = match scope {
        GlaubcorScope::Conjugates => {
            let mut seen = FxHashSet::default();
            let mut out = Vec::new();
            for x in ctx.enumerate_a_times()?.members {
                let mut queue = vec![x];
                while let Some(y) = queue.pop() {
                    if !seen.insert(y.key()) {
                        continue;
                    }
                    for &g in ctx.group().generator_ids() {
                        queue.push(ctx.conjugate_product(&y, g));
                    }
                    out.push(y);
                }
            }
            out
        }
        GlaubcorScope::AllSmallS => all_product_subgroups(ctx, &ex)?,
    };
    let mut report = GlaubcorReport { candidates: candidates.len(), ..Default::default() };
    for b in &candidates {
        let b_real = ex.realize(b);
        if in_ba(&ex, &b_real, &a_real)? {
            report.in_ba += 1;
            if !a_real.is_normalized_by(&b_real) {
                return Err(Error::Contradiction("a member of B_A does not normalize A".into()));
            }
        }
    }
    for c in conjugacy_orbit(&a_real, &ex.group().whole()) {
        if !a_real.is_normalized_by(&c) || !c.is_normalized_by(&a_real) {
            return Err(Error::Contradiction("A and a conjugate do not normalize each other".into()));
        }
        report.conjugates_checked += 1;
    }
    Ok(report)
}

/// Every `D ⋊ E` with `E ≤ G` and `D` an `E`-invariant subspace.
fn all_product_subgroups(ctx: &SemidirectContext, ex: &ExplicitSemidirect) -> Result<Vec<ProductSubgroup>> {
    let subspaces: Vec<Subspace> = enumerate_subgroups(ex.v(), SubgroupFilter::All, &mut |_| false, ctx.cap())?
        .iter()
        .map(|h| Subspace::span(ctx.field(), ctx.n(), h.member_ids().map(|x| ex.vector_of(x)).collect::<Vec<_>>()))
        .collect();
    let groups = enumerate_subgroups(&ctx.whole_group(), SubgroupFilter::All, &mut |_| false, ctx.cap())?;
    let mut out = Vec::new();
    for e in groups {
        let gens = e.generator_matrices();
        for d in &subspaces {
            if gens.iter().all(|m| d.image(m).is_subspace_of(d)) {
                out.push(ProductSubgroup { d: d.clone(), e: e.clone() });
            }
        }
    }
    Ok(out)
}

fn flat(m: &FpMatrix) -> Vec<u8> {
    m.key().to_vec()
}

fn unflat(field: FieldSpec, dim: usize, v: &[u8]) -> FpMatrix {
    FpMatrix::from_entries(field, dim, v.to_vec()).expect("entries are reduced")
}

/// A unipotent group of class at most 3 viewed as a Lie ring through the
/// matrix logarithm. Lie elements are matrices; subrings are subspaces of the
/// flattened matrix space.
pub struct LieRing {
    carrier: SubgroupHandle,
    logs: FxHashMap<ElemId, FpMatrix>,
    space: Subspace,
    basis: Vec<FpMatrix>,
    center: Subspace,
}

impl std::fmt::Debug for LieRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LieRing").field("order", &self.carrier.order()).field("dim", &self.space.dim()).finish()
    }
}

/// Pairs checked for the BCH identity when not all pairs are checked.
const BCH_SAMPLE: usize = 200_000;

/// Builds the Lie ring of `carrier`, verifying additive and bracket closure
/// of the log image, `exp ∘ log = 1`, and the class-3 BCH formula.
pub fn build_lie_ring(carrier: &SubgroupHandle) -> Result<LieRing> {
    let g = carrier.ambient();
    let f = g.field();
    if f.p() < 5 {
        return Err(Error::PreconditionFailed("the Lie engine needs p >= 5".into()));
    }
    let class = nilpotence_class(carrier);
    if class > 3 {
        return Err(Error::ClassTooHigh { class });
    }
    let ids: Vec<ElemId> = carrier.member_ids().collect();
    let logs: Vec<FpMatrix> = ids.par_iter().map(|&x| matrix_log(g.element(x))).collect::<Result<_>>()?;
    let width = g.dim() * g.dim();
    let space = Subspace::span(f, width, logs.iter().map(flat).collect::<Vec<_>>());
    if (f.p() as u128).pow(space.dim() as u32) != carrier.order() as u128 {
        return Err(Error::ClosureFailure(format!(
            "log image of {} elements spans dimension {}",
            carrier.order(),
            space.dim()
        )));
    }
    for (x, lx) in ids.iter().zip(&logs) {
        if matrix_exp(lx)? != *g.element(*x) {
            return Err(Error::ClosureFailure(format!("exp(log(x)) != x for element {x}")));
        }
    }
    let basis: Vec<FpMatrix> = space.basis().iter().map(|v| unflat(f, g.dim(), v)).collect();
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate().skip(i + 1) {
            if !space.contains(&flat(&x.bracket(y))) {
                return Err(Error::ClosureFailure(format!("bracket of basis elements {i} and {j} leaves the log image")));
            }
        }
    }
    let center = lie_center(f, width, &basis);
    let by_id: FxHashMap<ElemId, FpMatrix> = ids.iter().copied().zip(logs).collect();
    let ring = LieRing { carrier: carrier.clone(), logs: by_id, space, basis, center };
    ring.check_bch(&ids)?;
    Ok(ring)
}

fn lie_center(f: FieldSpec, width: usize, basis: &[FpMatrix]) -> Subspace {
    let d = basis.len();
    let mut rows = Vec::new();
    for bi in basis {
        let cols: Vec<Vec<u8>> = basis.iter().map(|bk| flat(&bk.bracket(bi))).collect();
        for e in 0..width {
            rows.push(cols.iter().map(|c| c[e]).collect::<Vec<u8>>());
        }
    }
    let coeffs = null_space(f, d, rows);
    let vectors: Vec<Vec<u8>> = coeffs
        .iter()
        .map(|c| {
            let mut acc = FpMatrix::zero(f, basis.first().map_or(0, |b| b.dim()));
            for (ck, bk) in c.iter().zip(basis) {
                acc = acc.add(&bk.scale(*ck));
            }
            flat(&acc)
        })
        .collect();
    Subspace::span(f, width, vectors)
}

impl LieRing {
    pub fn carrier(&self) -> &SubgroupHandle {
        &self.carrier
    }

    pub fn field(&self) -> FieldSpec {
        self.carrier.ambient().field()
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn basis(&self) -> &[FpMatrix] {
        &self.basis
    }

    /// `Z(L)`.
    pub fn center(&self) -> &Subspace {
        &self.center
    }

    pub fn log(&self, x: ElemId) -> Option<&FpMatrix> {
        self.logs.get(&x)
    }

    pub fn contains(&self, x: &FpMatrix) -> bool {
        self.space.contains(&flat(x))
    }

    /// The subring `log(H)` of a subgroup `H` of the carrier.
    pub fn subring(&self, h: &SubgroupHandle) -> Result<Subspace> {
        if !h.is_subgroup_of(&self.carrier) {
            return Err(Error::NotAMember);
        }
        let width = self.space.ambient_dim();
        let s = Subspace::span(self.field(), width, h.member_ids().map(|x| flat(&self.logs[&x])).collect::<Vec<_>>());
        if (self.field().p() as u128).pow(s.dim() as u32) != h.order() as u128 {
            return Err(Error::ClosureFailure("log image of a subgroup is not a subspace".into()));
        }
        Ok(s)
    }

    /// `exp(U)` as a subgroup of the ambient group.
    pub fn group_of(&self, u: &Subspace) -> Result<SubgroupHandle> {
        let g = self.carrier.ambient();
        let dim = g.dim();
        let mut bits = fixedbitset::FixedBitSet::with_capacity(g.order());
        for v in u.vectors() {
            let x = matrix_exp(&unflat(self.field(), dim, &v))?;
            let id = g.id_of(&x).ok_or_else(|| Error::ClosureFailure("exp leaves the ambient group".into()))?;
            bits.insert(id as usize);
        }
        g.subgroup_from_members(bits)
            .map_err(|_| Error::ClosureFailure("exp of a subspace is not a subgroup".into()))
    }

    fn check_bch(&self, ids: &[ElemId]) -> Result<()> {
        let g = self.carrier.ambient();
        let f = self.field();
        let half = f.inv(2);
        let twelfth = f.inv(12 % f.p() as u8);
        let n = ids.len();
        let total = n * n;
        let step = total.div_ceil(BCH_SAMPLE).max(1);
        // A stride coprime to most orders spreads the sample over all pairs.
        let stride = if step == 1 { 1 } else { step | 1 };
        let bad = (0..total.min(BCH_SAMPLE)).into_par_iter().find_first(|&t| {
            let idx = (t * stride) % total;
            let (x, y) = (ids[idx / n], ids[idx % n]);
            let (lx, ly) = (&self.logs[&x], &self.logs[&y]);
            let xy = g.mul(x, y);
            let c = lx.bracket(ly);
            let rhs = lx
                .add(ly)
                .add(&c.scale(half))
                .add(&lx.bracket(&c).scale(twelfth))
                .sub(&ly.bracket(&c).scale(twelfth));
            self.logs[&xy] != rhs
        });
        match bad {
            Some(t) => {
                let idx = (t * stride) % total;
                Err(Error::ClosureFailure(format!("BCH fails for elements {} and {}", ids[idx / n], ids[idx % n])))
            }
            None => Ok(()),
        }
    }
}

/// Conjugation by `b` on a Lie ring and `δ = (α − 1) − ½(α − 1)²`.
#[derive(Clone, Debug)]
pub struct DerivationData {
    b: FpMatrix,
    b_inv: FpMatrix,
    half: u8,
}

impl DerivationData {
    pub fn new(b: &FpMatrix) -> Self {
        let b_inv = b.inverse().expect("group elements are invertible");
        Self { b: b.clone(), b_inv, half: b.field().inv(2) }
    }

    /// `α(X) = b⁻¹ X b`.
    pub fn alpha(&self, x: &FpMatrix) -> FpMatrix {
        x.conjugate_by(&self.b, &self.b_inv)
    }

    fn alpha_minus_one(&self, x: &FpMatrix) -> FpMatrix {
        self.alpha(x).sub(x)
    }

    pub fn delta(&self, x: &FpMatrix) -> FpMatrix {
        let d1 = self.alpha_minus_one(x);
        let d2 = self.alpha_minus_one(&d1);
        d1.sub(&d2.scale(self.half))
    }

    /// Checks on a basis of `L`: `α(L) = L`, `(α − 1)³ = 0`, `δ³ = 0`, and the
    /// derivation law.
    pub fn verify(&self, l: &LieRing) -> Result<()> {
        for x in l.basis() {
            if !l.contains(&self.alpha(x)) {
                return Err(Error::PreconditionFailed("b does not normalize the carrier".into()));
            }
            let am = self.alpha_minus_one(&self.alpha_minus_one(&self.alpha_minus_one(x)));
            if !am.is_zero() {
                return Err(Error::PreconditionFailed("(alpha - 1)^3 != 0".into()));
            }
            if !self.delta(&self.delta(&self.delta(x))).is_zero() {
                return Err(Error::Contradiction("delta^3 != 0".into()));
            }
        }
        for x in l.basis() {
            for y in l.basis() {
                let lhs = self.delta(&x.bracket(y));
                let rhs = self.delta(x).bracket(y).add(&x.bracket(&self.delta(y)));
                if lhs != rhs {
                    return Err(Error::Contradiction("delta is not a derivation".into()));
                }
                if self.delta(&x.add(y)) != self.delta(x).add(&self.delta(y)) {
                    return Err(Error::Contradiction("delta is not additive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Output of [`glauberman_replace`].
#[derive(Clone, Debug)]
pub struct GlaubermanResult {
    pub a_star: SubgroupHandle,
    /// `|A₁|`, as a count of Lie elements.
    pub a1_size: usize,
    /// True when `b` normalizes `A`, in which case `A* = A`.
    pub vacuous: bool,
    pub derivation: DerivationData,
}

/// `A* = A₁ + δ²(A)` with
/// `A₁ = { a₁ − 2δ(a₂) : a₁, a₂ ∈ A, δ(a₁) − δ²(a₂) ∈ Z(Â) }`.
///
/// `series` are central series of the ambient group; against each, `A* `
/// must be strictly above `A`. `complement`, when given, must meet `A*`.
pub fn glauberman_replace(
    l: &LieRing,
    a: &SubgroupHandle,
    b: ElemId,
    series: &[CentralSeries],
    complement: Option<&SubgroupHandle>,
) -> Result<GlaubermanResult> {
    let g = l.carrier().ambient();
    let f = l.field();
    let b2 = g.mul(b, b);
    let hat = a.join(&a.conjugate(b))?.join(&a.conjugate(b2))?;
    if hat != *l.carrier() {
        return Err(Error::PreconditionFailed("<A, A^b, A^b^2> is not the carrier".into()));
    }
    let der = DerivationData::new(g.element(b));
    der.verify(l)?;
    let la = l.subring(a)?;
    if !l.center().is_subspace_of(&la) {
        return Err(Error::PreconditionFailed("Z(A-hat) is not contained in A".into()));
    }
    let width = la.ambient_dim();
    let dim = g.dim();
    let vecs = la.vectors();
    let mats: Vec<FpMatrix> = vecs.iter().map(|v| unflat(f, dim, v)).collect();
    let d1: Vec<FpMatrix> = mats.iter().map(|x| der.delta(x)).collect();
    let d2: Vec<FpMatrix> = d1.iter().map(|x| der.delta(x)).collect();
    let span_of = |ms: &[FpMatrix]| Subspace::span(f, width, ms.iter().map(flat).collect::<Vec<_>>());
    let sum = la.sum(&span_of(&d1))?.sum(&span_of(&d2))?;
    if sum != *l.space() {
        return Err(Error::PreconditionFailed("A + delta(A) + delta^2(A) is not the carrier".into()));
    }
    let two = f.reduce(2);
    let a1: FxHashSet<Vec<u8>> = (0..mats.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (a1m, d1m) = (&mats[i], &d1[i]);
            let out: Vec<Vec<u8>> = (0..mats.len())
                .filter(|&j| l.center().contains(&flat(&d1m.sub(&d2[j]))))
                .map(|j| flat(&a1m.sub(&d1[j].scale(two))))
                .collect();
            out
        })
        .collect();
    let a1_size = a1.len();
    let a1_space = Subspace::span(f, width, a1.into_iter().collect::<Vec<_>>());
    if a1_space.order() != a1_size as u128 {
        return Err(Error::Contradiction("A_1 is not a subspace".into()));
    }
    let a_star_space = a1_space.sum(&span_of(&d2))?;
    let a_star = l.group_of(&a_star_space)?;
    let vacuous = a.is_normalized_by(&g.subgroup(&[b]));
    if !a_star.is_abelian() || a_star.order() != a.order() {
        return Err(Error::Contradiction("A* is not abelian of order |A|".into()));
    }
    if vacuous {
        if a_star != *a {
            return Err(Error::Contradiction("b normalizes A but A* != A".into()));
        }
    } else {
        for s in series {
            if cmp_series(&explicit_profile(a, s), &explicit_profile(&a_star, s)) != SeriesOrdering::Less {
                return Err(Error::Contradiction("A* is not strictly above A".into()));
            }
        }
        if let Some(c) = complement {
            if a_star.intersect(c)?.is_trivial() {
                return Err(Error::Contradiction("A* meets the complement trivially".into()));
            }
        }
    }
    Ok(GlaubermanResult { a_star, a1_size, vacuous, derivation: der })
}

/// An `(A, b)` pair on which [`glauberman_replace`] runs with `b` not
/// normalizing `A`.
#[derive(Clone, Debug)]
pub struct ReplacementTrigger {
    /// `A` realized in the explicit `S`.
    pub a: SubgroupHandle,
    pub b: ElemId,
    pub carrier: SubgroupHandle,
}

/// Searches members of `A_×(S)` and elements `b` of the complement for a pair
/// where `b` does not normalize `A`, `Â = ⟨A^⟨A,b⟩⟩` has class at most 3,
/// and every precondition of the replacement holds.
pub fn find_replacement_trigger(ctx: &SemidirectContext) -> Result<Option<ReplacementTrigger>> {
    if ctx.field().p() < 5 {
        return Ok(None);
    }
    let ex = ctx.explicit()?;
    let s = ex.group();
    let complement: Vec<ElemId> = ex.complement().member_ids().collect();
    let series = [crate::group::upper_central_series(&s.whole())];
    for member in ctx.enumerate_a_times()?.members {
        let a = ex.realize(&member);
        for &b in &complement {
            if a.is_normalized_by(&s.subgroup(&[b])) {
                continue;
            }
            let mut conj = a.generators().to_vec();
            conj.push(b);
            let hat = closure_under_conjugation(s, a.generators(), &conj);
            if nilpotence_class(&hat) > 3 {
                continue;
            }
            let Ok(l) = build_lie_ring(&hat) else { continue };
            match glauberman_replace(&l, &a, b, &series, Some(ex.complement())) {
                Ok(_) => return Ok(Some(ReplacementTrigger { a, b, carrier: hat })),
                Err(Error::PreconditionFailed(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(None)
}

/// `c = [a, x]` when it is nontrivial and centralizes `a` and `x`; the
/// result is asserted quadratic.
pub fn descent_step(g: &Arc<ExplicitGroup>, a: ElemId, x: ElemId) -> Result<Option<ElemId>> {
    if !is_quadratic(g.element(a)) {
        return Err(Error::HypothesisFailed("a is not quadratic".into()));
    }
    let c = g.comm(a, x);
    if c == g.identity() {
        return Ok(None);
    }
    let mut broken = Vec::new();
    if !g.commute(c, a) {
        broken.push("[a, x] does not commute with a");
    }
    if !g.commute(c, x) {
        broken.push("[a, x] does not commute with x");
    }
    if !broken.is_empty() {
        return Err(Error::HypothesisFailed(broken.join("; ")));
    }
    if !is_quadratic(g.element(c)) {
        return Err(Error::Contradiction("[a, x] is not quadratic".into()));
    }
    Ok(Some(c))
}

/// Descent of quadratic elements down `Ω₁Z(N)`.
#[derive(Clone, Debug)]
pub struct DescentWitness {
    pub e: SubgroupHandle,
    /// `N = ⟨E^G⟩`.
    pub n: SubgroupHandle,
    /// `W_i = [Ω₁Z(N), G; i]`, ending at the trivial group.
    pub chain: Vec<SubgroupHandle>,
    /// Greatest index with a quadratic element in `W_j`.
    pub j: usize,
    pub a: ElemId,
    /// `W = ⟨a^G⟩`.
    pub w: SubgroupHandle,
}

/// Builds `W` from a 2-subnormal quadratic offender (computed when `offender`
/// is `None`) and asserts that every `x ∈ G` has `[W, x] = 1` or
/// `[W, x, x] ≠ 1`.
pub fn normal_w(ctx: &SemidirectContext, offender: Option<&SubgroupHandle>) -> Result<DescentWitness> {
    let e = match offender {
        Some(e) => e.clone(),
        None => two_subnormal_offender(ctx)?.offender.e,
    };
    let whole = ctx.whole_group();
    let g = ctx.group();
    let nc = normal_closure(&whole, &e)?;
    let n = nc.subgroup;
    let base = omega1(&center(&n));
    let mut chain = vec![base.clone()];
    while !chain.last().unwrap().is_trivial() {
        let next = commutator_subgroup(chain.last().unwrap(), &whole)?;
        if next == *chain.last().unwrap() {
            break;
        }
        chain.push(next);
    }
    let quadratic_in = |h: &SubgroupHandle| h.member_ids().find(|&x| is_quadratic(g.element(x)));
    let j = match (0..chain.len()).rev().find(|&i| quadratic_in(&chain[i]).is_some()) {
        Some(j) => j,
        None if nc.two_subnormal => {
            return Err(Error::Contradiction("no quadratic element in Omega_1 Z(N) although E is normal in N".into()))
        }
        None => return Err(Error::NoQuadraticInOmega1ZN),
    };
    // Member ids follow the canonical order, so the first hit is the least.
    let a = quadratic_in(&chain[j]).expect("found above");
    let w = closure_under_conjugation(g, &[a], whole.generators());
    if !w.is_elementary_abelian() {
        return Err(Error::Contradiction("W is not elementary abelian".into()));
    }
    if let Some(x) = dichotomy_failure(g, &w) {
        return Err(Error::Contradiction(format!("element {x} has [W, x] != 1 and [W, x, x] = 1")));
    }
    Ok(DescentWitness { e, n, chain, j, a, w })
}

/// First `x ∈ G` with `[W, x] ≠ 1 = [W, x, x]`, for abelian normal `W`.
pub fn dichotomy_failure(g: &Arc<ExplicitGroup>, w: &SubgroupHandle) -> Option<ElemId> {
    let gens = w.generators();
    (0..g.order() as ElemId).into_par_iter().find_first(|&x| {
        let moved = gens.iter().any(|&y| g.comm(y, x) != g.identity());
        moved && gens.iter().all(|&y| g.comm(g.comm(y, x), x) == g.identity())
    })
}

#[derive(Clone, Debug)]
pub enum Dichotomy {
    /// A member of `A_e(G)` acting quadratically and nontrivially on `W`.
    QuadraticWitness(SubgroupHandle),
    /// Every member of `A_e(G)` centralizes `W`.
    AllCentralize,
}

/// Searches `A_e(G)` for a member acting quadratically on `W`, or certifies
/// that every member centralizes `W`.
pub fn elementary_replacement_dichotomy(g: &SubgroupHandle, w: &SubgroupHandle, cap: usize) -> Result<Dichotomy> {
    if !w.is_elementary_abelian() || !w.is_normal_in(g) {
        return Err(Error::PreconditionFailed("W must be elementary abelian and normal".into()));
    }
    let members = max_elementary_abelian_subgroups(g, cap)?;
    let mut all_centralize = true;
    for a in &members {
        let wa = commutator_subgroup(w, a)?;
        if wa.is_trivial() {
            continue;
        }
        all_centralize = false;
        if commutator_subgroup(&wa, a)?.is_trivial() {
            return Ok(Dichotomy::QuadraticWitness(a.clone()));
        }
    }
    if all_centralize {
        Ok(Dichotomy::AllCentralize)
    } else {
        Err(Error::Contradiction("no member of A_e(G) is quadratic on W, yet one acts nontrivially".into()))
    }
}

/// Outcome of [`expansion_identity`].
#[derive(Clone, Debug)]
pub struct ExpansionCheck {
    pub z: ElemId,
    pub factors: usize,
    /// `(unipotent index of z, 2^k + 1)` when `b` is quadratic.
    pub index_bound: Option<(usize, usize)>,
}

/// Checks `[b, x₁, …, x_k] = Π_j Π_{i₁<…<i_j} (b^{(−1)^{k−j}})^{x_{i₁}⋯x_{i_j}}`.
pub fn expansion_identity(g: &Arc<ExplicitGroup>, b: ElemId, xs: &[ElemId]) -> Result<ExpansionCheck> {
    let k = xs.len();
    let mut z = b;
    for &x in xs {
        z = g.comm(z, x);
    }
    let b_inv = g.inv(b);
    let mut factors = Vec::with_capacity(1 << k);
    for mask in 0u32..(1 << k) {
        let j = mask.count_ones() as usize;
        let mut f = if (k - j).is_multiple_of(2) { b } else { b_inv };
        for (i, &x) in xs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                f = g.conj(f, x);
            }
        }
        factors.push(f);
    }
    for (i, &x) in factors.iter().enumerate() {
        if factors[i + 1..].iter().any(|&y| !g.commute(x, y)) {
            return Err(Error::NonCommutingConjugates);
        }
    }
    let product = factors.iter().fold(g.identity(), |acc, &f| g.mul(acc, f));
    if product != z {
        return Err(Error::Contradiction("the expansion does not reproduce the commutator".into()));
    }
    if factors.len() != 1 << k {
        return Err(Error::Contradiction("factor count is not 2^k".into()));
    }
    let index_bound = if unipotent_index(g.element(b))? <= 2 {
        let idx = unipotent_index(g.element(z))?;
        let bound = (1usize << k) + 1;
        if idx > bound {
            return Err(Error::Contradiction(format!("unipotent index {idx} exceeds 2^k + 1 = {bound}")));
        }
        Some((idx, bound))
    } else {
        None
    };
    Ok(ExpansionCheck { z, factors: factors.len(), index_bound })
}
