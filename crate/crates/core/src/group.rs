//! Fully enumerated finite matrix p-groups and their subgroups.
//!
//! An [`ExplicitGroup`] stores every element, sorted by canonical byte key, so
//! elements are addressed by index ([`ElemId`]) and subgroups are bitsets over
//! those indices. Every subgroup operation is an exact filter or closure over
//! the member list; nothing is sampled.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{unipotent_index, FieldSpec, FpMatrix};

/// Default bound on the number of elements of any enumerated group.
pub const DEFAULT_CAP: usize = 2_000_000;

/// Index of an element inside its ambient [`ExplicitGroup`].
pub type ElemId = u32;

/// Canonical subgroup key: SHA-256 of the sorted member keys.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupKey(pub [u8; 32]);

impl fmt::Display for SubgroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for SubgroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubgroupKey({})", &hex::encode(self.0)[..16])
    }
}

pub struct ExplicitGroup {
    field: FieldSpec,
    dim: usize,
    generators: Vec<FpMatrix>,
    gen_ids: Vec<ElemId>,
    elements: Vec<FpMatrix>,
    lookup: FxHashMap<Vec<u8>, ElemId>,
    identity: ElemId,
    inverses: Vec<ElemId>,
    pth_powers: OnceLock<Vec<ElemId>>,
}

impl fmt::Debug for ExplicitGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitGroup")
            .field("p", &self.field.p())
            .field("dim", &self.dim)
            .field("order", &self.order())
            .field("generators", &self.generators.len())
            .finish()
    }
}

fn is_power_of(mut n: usize, p: usize) -> bool {
    while n > 1 {
        if !n.is_multiple_of(p) {
            return false;
        }
        n /= p;
    }
    n == 1
}

impl ExplicitGroup {
    /// Breadth-first closure of `generators`.
    pub fn close(field: FieldSpec, dim: usize, generators: Vec<FpMatrix>, cap: usize) -> Result<Arc<Self>> {
        for (index, g) in generators.iter().enumerate() {
            if g.field() != field {
                return Err(Error::ModulusMismatch { left: field.p(), right: g.field().p() });
            }
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: g.dim() });
            }
            if g.inverse().is_none() {
                return Err(Error::NotInvertible { index });
            }
            unipotent_index(g)?;
        }
        let identity = FpMatrix::identity(field, dim);
        let mut seen: FxHashSet<Vec<u8>> = FxHashSet::default();
        seen.insert(identity.key().to_vec());
        let mut elements = vec![identity];
        let mut head = 0;
        while head < elements.len() {
            let x = elements[head].clone();
            head += 1;
            for g in &generators {
                let y = x.mul(g);
                if seen.insert(y.key().to_vec()) {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded { count: elements.len() + 1, cap });
                    }
                    elements.push(y);
                }
            }
        }
        Self::from_closed_set(field, dim, generators, elements)
    }

    /// Builds a group from an element list already known to be closed.
    ///
    /// Verifies the order is a power of p and that each generator is present.
    pub fn from_closed_set(
        field: FieldSpec,
        dim: usize,
        generators: Vec<FpMatrix>,
        mut elements: Vec<FpMatrix>,
    ) -> Result<Arc<Self>> {
        if !is_power_of(elements.len(), field.p() as usize) {
            return Err(Error::NotPGroup { order: elements.len(), p: field.p() });
        }
        elements.sort_unstable();
        elements.dedup();
        let lookup: FxHashMap<Vec<u8>, ElemId> =
            elements.iter().enumerate().map(|(i, m)| (m.key().to_vec(), i as ElemId)).collect();
        let identity = *lookup.get(FpMatrix::identity(field, dim).key()).ok_or(Error::NotAMember)?;
        let inverses = elements
            .par_iter()
            .map(|m| {
                let inv = m.inverse().expect("group elements are invertible");
                lookup.get(inv.key()).copied().ok_or(Error::NotAMember)
            })
            .collect::<Result<Vec<_>>>()?;
        let gen_ids =
            generators.iter().map(|g| lookup.get(g.key()).copied().ok_or(Error::NotAMember)).collect::<Result<_>>()?;
        Ok(Arc::new(Self {
            field,
            dim,
            generators,
            gen_ids,
            elements,
            lookup,
            identity,
            inverses,
            pth_powers: OnceLock::new(),
        }))
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// `log_p |G|`.
    pub fn log_order(&self) -> u32 {
        let p = self.field.p() as usize;
        let mut n = self.order();
        let mut e = 0;
        while n > 1 {
            n /= p;
            e += 1;
        }
        e
    }

    pub fn generators(&self) -> &[FpMatrix] {
        &self.generators
    }

    pub fn generator_ids(&self) -> &[ElemId] {
        &self.gen_ids
    }

    pub fn elements(&self) -> &[FpMatrix] {
        &self.elements
    }

    #[inline]
    pub fn element(&self, id: ElemId) -> &FpMatrix {
        &self.elements[id as usize]
    }

    #[inline]
    pub fn identity(&self) -> ElemId {
        self.identity
    }

    pub fn id_of(&self, m: &FpMatrix) -> Option<ElemId> {
        self.lookup.get(m.key()).copied()
    }

    /// Index of a matrix known to be a member. Panics otherwise.
    #[inline]
    pub fn expect_id(&self, m: &FpMatrix) -> ElemId {
        match self.lookup.get(m.key()) {
            Some(&id) => id,
            None => panic!("matrix {m:?} is not an element of the group"),
        }
    }

    #[inline]
    pub fn mul(&self, a: ElemId, b: ElemId) -> ElemId {
        self.expect_id(&self.element(a).mul(self.element(b)))
    }

    #[inline]
    pub fn inv(&self, a: ElemId) -> ElemId {
        self.inverses[a as usize]
    }

    /// `a^b = b⁻¹ a b`.
    #[inline]
    pub fn conj(&self, a: ElemId, b: ElemId) -> ElemId {
        let m = self.element(self.inv(b)).mul(self.element(a)).mul(self.element(b));
        self.expect_id(&m)
    }

    /// `[a, b] = a⁻¹ b⁻¹ a b`.
    #[inline]
    pub fn comm(&self, a: ElemId, b: ElemId) -> ElemId {
        let m = self
            .element(self.inv(a))
            .mul(self.element(self.inv(b)))
            .mul(self.element(a))
            .mul(self.element(b));
        self.expect_id(&m)
    }

    #[inline]
    pub fn commute(&self, a: ElemId, b: ElemId) -> bool {
        self.element(a).commutes_with(self.element(b))
    }

    pub fn pow(&self, a: ElemId, e: u64) -> ElemId {
        self.expect_id(&self.element(a).pow(e))
    }

    /// Table of p-th powers, computed on first use.
    pub fn pth_powers(&self) -> &[ElemId] {
        self.pth_powers.get_or_init(|| {
            let p = self.field.p() as u64;
            self.elements.par_iter().map(|m| self.expect_id(&m.pow(p))).collect()
        })
    }

    /// True when `a` has order exactly p.
    pub fn has_order_p(&self, a: ElemId) -> bool {
        a != self.identity && self.pth_powers()[a as usize] == self.identity
    }

    /// Order of `a` as an exponent of p.
    pub fn order_exponent(&self, a: ElemId) -> u32 {
        let table = self.pth_powers();
        let mut x = a;
        let mut e = 0;
        while x != self.identity {
            x = table[x as usize];
            e += 1;
        }
        e
    }

    pub fn whole(self: &Arc<Self>) -> SubgroupHandle {
        let mut members = FixedBitSet::with_capacity(self.order());
        members.insert_range(..);
        SubgroupHandle::raw(self.clone(), members, self.gen_ids.clone())
    }

    pub fn trivial(self: &Arc<Self>) -> SubgroupHandle {
        let mut members = FixedBitSet::with_capacity(self.order());
        members.insert(self.identity as usize);
        SubgroupHandle::raw(self.clone(), members, Vec::new())
    }

    /// Subgroup generated by `gens`.
    pub fn subgroup(self: &Arc<Self>, gens: &[ElemId]) -> SubgroupHandle {
        let gens: Vec<ElemId> = gens.iter().copied().filter(|&g| g != self.identity).collect();
        let members = self.close_bits(&gens);
        SubgroupHandle::raw(self.clone(), members, gens)
    }

    /// Subgroup generated by matrices; each must be a member.
    pub fn subgroup_of_matrices(self: &Arc<Self>, gens: &[FpMatrix]) -> Result<SubgroupHandle> {
        let ids = gens.iter().map(|m| self.id_of(m).ok_or(Error::NotAMember)).collect::<Result<Vec<_>>>()?;
        Ok(self.subgroup(&ids))
    }

    /// Subgroup with the given member set; closure is verified by rebuilding
    /// the set from a greedy generating sequence.
    pub fn subgroup_from_members(self: &Arc<Self>, members: FixedBitSet) -> Result<SubgroupHandle> {
        let mut gens = Vec::new();
        let mut span = FixedBitSet::with_capacity(self.order());
        span.insert(self.identity as usize);
        for id in members.ones() {
            if span.contains(id) {
                continue;
            }
            gens.push(id as ElemId);
            span = self.close_bits(&gens);
            if !span.is_subset(&members) {
                return Err(Error::PreconditionFailed("member set is not closed under multiplication".into()));
            }
        }
        if span != members {
            return Err(Error::PreconditionFailed("member set is not closed under multiplication".into()));
        }
        Ok(SubgroupHandle::raw(self.clone(), members, gens))
    }

    fn close_bits(&self, gens: &[ElemId]) -> FixedBitSet {
        let mut members = FixedBitSet::with_capacity(self.order());
        members.insert(self.identity as usize);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !members.put(y as usize) {
                    queue.push_back(y);
                }
            }
        }
        members
    }

    /// Members of `within` satisfying `pred`, evaluated in parallel.
    pub(crate) fn filter(&self, within: &FixedBitSet, pred: impl Fn(ElemId) -> bool + Sync) -> FixedBitSet {
        let ids: Vec<usize> = within.ones().collect();
        let kept: Vec<usize> = ids.into_par_iter().filter(|&i| pred(i as ElemId)).collect();
        let mut out = FixedBitSet::with_capacity(self.order());
        for i in kept {
            out.insert(i);
        }
        out
    }
}

/// A subgroup of an [`ExplicitGroup`], stored as a member bitset.
#[derive(Clone)]
pub struct SubgroupHandle {
    ambient: Arc<ExplicitGroup>,
    members: FixedBitSet,
    gens: Vec<ElemId>,
    order: usize,
    key: OnceLock<SubgroupKey>,
}

impl PartialEq for SubgroupHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient) && self.members == other.members
    }
}

impl Eq for SubgroupHandle {}

impl fmt::Debug for SubgroupHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubgroupHandle").field("order", &self.order).field("gens", &self.gens.len()).finish()
    }
}

impl SubgroupHandle {
    fn raw(ambient: Arc<ExplicitGroup>, members: FixedBitSet, gens: Vec<ElemId>) -> Self {
        let order = members.count_ones(..);
        Self { ambient, members, gens, order, key: OnceLock::new() }
    }

    pub fn ambient(&self) -> &Arc<ExplicitGroup> {
        &self.ambient
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn log_order(&self) -> u32 {
        let p = self.ambient.field().p() as usize;
        let mut n = self.order;
        let mut e = 0;
        while n > 1 {
            n /= p;
            e += 1;
        }
        e
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn member_ids(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.members.ones().map(|i| i as ElemId)
    }

    pub fn generators(&self) -> &[ElemId] {
        &self.gens
    }

    pub fn generator_matrices(&self) -> Vec<FpMatrix> {
        self.gens.iter().map(|&g| self.ambient.element(g).clone()).collect()
    }

    #[inline]
    pub fn contains(&self, id: ElemId) -> bool {
        self.members.contains(id as usize)
    }

    pub fn contains_matrix(&self, m: &FpMatrix) -> bool {
        self.ambient.id_of(m).is_some_and(|id| self.contains(id))
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_whole(&self) -> bool {
        self.order == self.ambient.order()
    }

    pub fn key(&self) -> SubgroupKey {
        *self.key.get_or_init(|| {
            let mut h = Sha256::new();
            for id in self.members.ones() {
                h.update(self.ambient.element(id as ElemId).key());
            }
            SubgroupKey(h.finalize().into())
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.ambient, &other.ambient) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    pub fn is_subgroup_of(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ambient, &other.ambient) && self.members.is_subset(&other.members)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut m = self.members.clone();
        m.intersect_with(&other.members);
        self.ambient.subgroup_from_members(m)
    }

    /// Subgroup generated by both arguments.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut gens = self.gens.clone();
        for &g in &other.gens {
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
        Ok(self.ambient.subgroup(&gens))
    }

    /// `⟨self, g⟩`.
    pub fn extend(&self, g: ElemId) -> Self {
        if self.contains(g) {
            return self.clone();
        }
        let mut gens = self.gens.clone();
        gens.push(g);
        self.ambient.subgroup(&gens)
    }

    pub fn is_abelian(&self) -> bool {
        let gens = &self.gens;
        gens.iter().enumerate().all(|(i, &a)| gens[i + 1..].iter().all(|&b| self.ambient.commute(a, b)))
    }

    pub fn is_elementary_abelian(&self) -> bool {
        self.is_abelian() && self.gens.iter().all(|&g| self.ambient.has_order_p(g))
    }

    /// True when every generator of `by` normalizes `self`.
    pub fn is_normalized_by(&self, by: &Self) -> bool {
        let g = &self.ambient;
        by.gens.iter().all(|&b| self.gens.iter().all(|&a| self.contains(g.conj(a, b))))
    }

    pub fn is_normal_in(&self, other: &Self) -> bool {
        self.is_subgroup_of(other) && self.is_normalized_by(other)
    }

    /// Image of the subgroup under conjugation by `g`.
    pub fn conjugate(&self, g: ElemId) -> Self {
        let a = &self.ambient;
        let gens: Vec<ElemId> = self.gens.iter().map(|&x| a.conj(x, g)).collect();
        let mut members = FixedBitSet::with_capacity(a.order());
        for x in self.member_ids() {
            members.insert(a.conj(x, g) as usize);
        }
        Self::raw(a.clone(), members, gens)
    }

    /// Canonical comparison: by order, then sorted member lists.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.order.cmp(&other.order).then_with(|| self.members.ones().cmp(other.members.ones()))
    }
}

/// `C_amb(xs)`.
pub fn centralizer_of_elements(amb: &SubgroupHandle, xs: &[ElemId]) -> SubgroupHandle {
    let g = amb.ambient();
    let members = g.filter(&amb.members, |y| xs.iter().all(|&x| g.commute(x, y)));
    g.subgroup_from_members(members).expect("centralizers are subgroups")
}

/// `C_amb(H)`.
pub fn centralizer(amb: &SubgroupHandle, h: &SubgroupHandle) -> Result<SubgroupHandle> {
    amb.check_same(h)?;
    Ok(centralizer_of_elements(amb, &h.gens))
}

/// `N_amb(H)`.
pub fn normalizer(amb: &SubgroupHandle, h: &SubgroupHandle) -> Result<SubgroupHandle> {
    amb.check_same(h)?;
    let g = amb.ambient();
    let members = g.filter(&amb.members, |y| h.gens.iter().all(|&x| h.contains(g.conj(x, y))));
    Ok(g.subgroup_from_members(members).expect("normalizers are subgroups"))
}

pub fn center(h: &SubgroupHandle) -> SubgroupHandle {
    centralizer_of_elements(h, &h.gens)
}

/// Smallest subgroup containing `seeds` and closed under conjugation by
/// `conjugators`.
pub fn closure_under_conjugation(g: &Arc<ExplicitGroup>, seeds: &[ElemId], conjugators: &[ElemId]) -> SubgroupHandle {
    let mut sub = g.subgroup(seeds);
    loop {
        let mut grew = false;
        let mut i = 0;
        while i < sub.gens.len() {
            let s = sub.gens[i];
            for &k in conjugators {
                let c = g.conj(s, k);
                if !sub.contains(c) {
                    sub = sub.extend(c);
                    grew = true;
                }
            }
            i += 1;
        }
        if !grew {
            return sub;
        }
    }
}

/// Result of [`normal_closure`].
#[derive(Clone, Debug)]
pub struct NormalClosure {
    pub subgroup: SubgroupHandle,
    /// Whether the argument is normal in its normal closure.
    pub two_subnormal: bool,
}

/// `⟨H^G⟩` for `H ≤ G`.
pub fn normal_closure(g: &SubgroupHandle, h: &SubgroupHandle) -> Result<NormalClosure> {
    g.check_same(h)?;
    if !h.is_subgroup_of(g) {
        return Err(Error::NotAMember);
    }
    let subgroup = closure_under_conjugation(g.ambient(), &h.gens, &g.gens);
    let two_subnormal = h.is_normal_in(&subgroup);
    Ok(NormalClosure { subgroup, two_subnormal })
}

/// `[A, B]`: the normal closure in `⟨A, B⟩` of the generator commutators.
pub fn commutator_subgroup(a: &SubgroupHandle, b: &SubgroupHandle) -> Result<SubgroupHandle> {
    a.check_same(b)?;
    let g = a.ambient();
    let mut seeds = Vec::new();
    for &x in &a.gens {
        for &y in &b.gens {
            let c = g.comm(x, y);
            if c != g.identity() && !seeds.contains(&c) {
                seeds.push(c);
            }
        }
    }
    let conjugators: Vec<ElemId> = a.gens.iter().chain(&b.gens).copied().collect();
    Ok(closure_under_conjugation(g, &seeds, &conjugators))
}

/// `[A, B; k] = [[A, B; k−1], B]` with `[A, B; 0] = A`.
pub fn iterated_commutator(a: &SubgroupHandle, b: &SubgroupHandle, k: usize) -> Result<SubgroupHandle> {
    let mut acc = a.clone();
    for _ in 0..k {
        if acc.is_trivial() {
            break;
        }
        acc = commutator_subgroup(&acc, b)?;
    }
    Ok(acc)
}

/// Subgroup generated by the elements of order p.
pub fn omega1(h: &SubgroupHandle) -> SubgroupHandle {
    let g = h.ambient();
    g.pth_powers();
    let members = g.filter(&h.members, |x| g.has_order_p(x));
    let mut gens: Vec<ElemId> = Vec::new();
    let mut span = g.trivial();
    for x in members.ones() {
        let x = x as ElemId;
        if !span.contains(x) {
            gens.push(x);
            span = span.extend(x);
        }
    }
    span
}

/// An ascending series `1 = Z_0 ≤ … ≤ Z_n = G` of subgroups.
#[derive(Clone, Debug)]
pub struct CentralSeries {
    pub terms: Vec<SubgroupHandle>,
    /// Index of the term equal to a distinguished normal subgroup `V`, when
    /// the series passes through one.
    pub v_index: Option<usize>,
}

impl CentralSeries {
    /// Checks `[Z_i, G] ≤ Z_{i−1}` and normality for every term.
    pub fn verify(&self, g: &SubgroupHandle) -> bool {
        if self.terms.first().is_none_or(|t| !t.is_trivial()) || self.terms.last() != Some(g) {
            return false;
        }
        self.terms.windows(2).all(|w| {
            w[1].is_normal_in(g)
                && w[0].is_subgroup_of(&w[1])
                && commutator_subgroup(&w[1], g).is_ok_and(|c| c.is_subgroup_of(&w[0]))
        })
    }
}

pub fn upper_central_series(g: &SubgroupHandle) -> CentralSeries {
    let amb = g.ambient();
    let mut terms = vec![amb.trivial()];
    loop {
        let last = terms.last().unwrap().clone();
        if last == *g {
            break;
        }
        let members = amb.filter(&g.members, |x| g.gens.iter().all(|&y| last.contains(amb.comm(x, y))));
        let next = amb.subgroup_from_members(members).expect("upper central terms are subgroups");
        if next == last {
            // Not nilpotent; cannot happen for p-groups.
            break;
        }
        terms.push(next);
    }
    CentralSeries { terms, v_index: None }
}

/// `G = γ_1 ≥ γ_2 ≥ … ≥ γ_{c+1} = 1`.
pub fn lower_central_series(g: &SubgroupHandle) -> Vec<SubgroupHandle> {
    let mut terms = vec![g.clone()];
    while !terms.last().unwrap().is_trivial() {
        let next = commutator_subgroup(terms.last().unwrap(), g).expect("same ambient");
        if &next == terms.last().unwrap() {
            break;
        }
        terms.push(next);
    }
    terms
}

/// Nilpotence class; the trivial group has class 0.
pub fn nilpotence_class(g: &SubgroupHandle) -> usize {
    lower_central_series(g).len() - 1
}

/// Which subgroups a lattice search visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubgroupFilter {
    All,
    Abelian,
    ElementaryAbelian,
}

/// A node of the subgroup search handed to prune predicates.
pub struct SearchNode<'a> {
    pub subgroup: &'a SubgroupHandle,
    /// Elements outside the subgroup that may still be adjoined. For the
    /// abelian filters this is exactly `C(H) \ H` (restricted to elements of
    /// order p for the elementary abelian filter), so every admissible
    /// overgroup lies inside `H ∪ candidates`.
    pub candidates: &'a FixedBitSet,
}

impl SearchNode<'_> {
    /// Largest power of p not exceeding `|H| + |candidates|`: an upper bound
    /// for the order of any overgroup reachable from this node.
    pub fn order_bound(&self) -> usize {
        let p = self.subgroup.ambient().field().p() as usize;
        let total = self.subgroup.order() + self.candidates.count_ones(..);
        let mut b = 1;
        while b * p <= total {
            b *= p;
        }
        b
    }
}

fn bitset_digest(bits: &FixedBitSet) -> [u8; 16] {
    let mut h = Sha256::new();
    for w in bits.as_slice() {
        h.update(w.to_le_bytes());
    }
    let full: [u8; 32] = h.finalize().into();
    full[..16].try_into().unwrap()
}

/// Enumerates subgroups of `g` matching `filter`, by extending each subgroup
/// through its index-p overgroups. `prune` returns true to discard a node
/// together with everything above it; it must only do so when no wanted
/// subgroup contains the node. Results are deduplicated and returned in
/// canonical order.
pub fn enumerate_subgroups(
    g: &SubgroupHandle,
    filter: SubgroupFilter,
    prune: &mut dyn FnMut(&SearchNode<'_>) -> bool,
    cap: usize,
) -> Result<Vec<SubgroupHandle>> {
    search_lattice(g, &g.ambient().trivial(), filter, prune, cap, false)
}

/// As [`enumerate_subgroups`], but returns one representative per
/// `g`-conjugacy class. `prune` must be invariant under conjugation.
pub fn enumerate_subgroup_classes(
    g: &SubgroupHandle,
    filter: SubgroupFilter,
    prune: &mut dyn FnMut(&SearchNode<'_>) -> bool,
    cap: usize,
) -> Result<Vec<SubgroupHandle>> {
    search_lattice(g, &g.ambient().trivial(), filter, prune, cap, true)
}

/// The `by`-conjugates of `h`, in canonical order.
pub fn conjugacy_orbit(h: &SubgroupHandle, by: &SubgroupHandle) -> Vec<SubgroupHandle> {
    let mut seen: FxHashSet<[u8; 16]> = FxHashSet::default();
    seen.insert(bitset_digest(h.members()));
    let mut orbit = vec![h.clone()];
    let mut i = 0;
    while i < orbit.len() {
        for &y in &by.gens {
            let c = orbit[i].conjugate(y);
            if seen.insert(bitset_digest(c.members())) {
                orbit.push(c);
            }
        }
        i += 1;
    }
    orbit.sort_by(|a, b| a.canonical_cmp(b));
    orbit
}

/// Searches the subgroups of `g` containing `root`, which must be normal in
/// `g` (and central for the abelian filters).
fn search_lattice(
    g: &SubgroupHandle,
    root: &SubgroupHandle,
    filter: SubgroupFilter,
    prune: &mut dyn FnMut(&SearchNode<'_>) -> bool,
    cap: usize,
    classes: bool,
) -> Result<Vec<SubgroupHandle>> {
    let amb = g.ambient();
    let pth = amb.pth_powers();
    let mut root_cand = g.members.clone();
    root_cand.difference_with(&root.members);
    if filter == SubgroupFilter::ElementaryAbelian {
        root_cand = amb.filter(&root_cand, |x| amb.has_order_p(x));
    }
    let root = root.clone();
    let mut results = Vec::new();
    let mut visited: FxHashSet<[u8; 16]> = FxHashSet::default();
    visited.insert(bitset_digest(root.members()));
    if prune(&SearchNode { subgroup: &root, candidates: &root_cand }) {
        return Ok(results);
    }
    results.push(root.clone());
    let mut frontier = vec![(root, root_cand)];
    while !frontier.is_empty() {
        // Children of each frontier node are computed independently and then
        // merged in frontier order, so the outcome is schedule-independent.
        let children: Vec<Vec<(SubgroupHandle, ElemId)>> = frontier
            .par_iter()
            .map(|(h, cand)| {
                let mut out = Vec::new();
                let mut covered = h.members.clone();
                for x in cand.ones() {
                    if covered.contains(x) {
                        continue;
                    }
                    let x = x as ElemId;
                    // Only index-p extensions: x^p ∈ H and x normalizes H.
                    if !h.contains(pth[x as usize]) {
                        continue;
                    }
                    if filter == SubgroupFilter::All && !h.gens.iter().all(|&y| h.contains(amb.conj(y, x))) {
                        continue;
                    }
                    let child = cover(h, x);
                    covered.union_with(&child.members);
                    out.push((child, x));
                }
                out
            })
            .collect();
        let mut fresh: Vec<(SubgroupHandle, usize, ElemId)> = Vec::new();
        for (parent, list) in children.into_iter().enumerate() {
            for (child, x) in list {
                if !visited.insert(bitset_digest(child.members())) {
                    continue;
                }
                if classes {
                    for c in conjugacy_orbit(&child, g) {
                        visited.insert(bitset_digest(c.members()));
                    }
                }
                fresh.push((child, parent, x));
            }
        }
        // Candidates are only computed for subgroups that survive deduplication.
        let with_cand: Vec<(SubgroupHandle, FixedBitSet)> = fresh
            .into_par_iter()
            .map(|(child, parent, x)| {
                let mut c = match filter {
                    SubgroupFilter::All => g.members.clone(),
                    _ => amb.filter(&frontier[parent].1, |y| amb.commute(x, y)),
                };
                c.difference_with(&child.members);
                (child, c)
            })
            .collect();
        let mut next = Vec::new();
        for (child, child_cand) in with_cand {
            if prune(&SearchNode { subgroup: &child, candidates: &child_cand }) {
                continue;
            }
            if results.len() >= cap {
                return Err(Error::CapExceeded { count: results.len() + 1, cap });
            }
            results.push(child.clone());
            next.push((child, child_cand));
        }
        frontier = next;
    }
    results.sort_by(|a, b| a.canonical_cmp(b));
    Ok(results)
}

/// `⟨H, x⟩` when x normalizes H and `x^p ∈ H`: the union of cosets `H x^i`.
pub(crate) fn cover(h: &SubgroupHandle, x: ElemId) -> SubgroupHandle {
    let amb = h.ambient();
    let p = amb.field().p() as usize;
    let mut members = h.members.clone();
    let hs: Vec<ElemId> = h.member_ids().collect();
    let mut xi = x;
    for _ in 1..p {
        let xm = amb.element(xi).clone();
        for &y in &hs {
            members.insert(amb.expect_id(&amb.element(y).mul(&xm)) as usize);
        }
        xi = amb.mul(xi, x);
    }
    let mut gens = h.gens.clone();
    gens.push(x);
    SubgroupHandle::raw(amb.clone(), members, gens)
}

/// Elementary abelian subgroups of maximum order (the generators of `J_e`).
pub fn max_elementary_abelian_subgroups(g: &SubgroupHandle, cap: usize) -> Result<Vec<SubgroupHandle>> {
    max_elementary_abelian_subgroups_seeded(g, &[], cap)
}

/// As [`max_elementary_abelian_subgroups`], with known elementary abelian
/// subgroups of `g` supplying an initial lower bound for the search.
pub fn max_elementary_abelian_subgroups_seeded(
    g: &SubgroupHandle,
    seeds: &[SubgroupHandle],
    cap: usize,
) -> Result<Vec<SubgroupHandle>> {
    let amb = g.ambient();
    let mut best = greedy_elementary_abelian(g).order();
    for s in seeds {
        if s.is_subgroup_of(g) && s.is_elementary_abelian() {
            best = best.max(s.order());
        }
    }
    let mut exact: Vec<SubgroupHandle> = Vec::new();
    // A largest elementary abelian subgroup contains Ω₁Z(g).
    let found = search_lattice(
        g,
        &omega1(&center(g)),
        SubgroupFilter::ElementaryAbelian,
        &mut |node| {
            let h = node.subgroup;
            best = best.max(h.order());
            let total = h.order() + node.candidates.count_ones(..);
            if total < best {
                return true;
            }
            if total == best && h.order() < best {
                // Every elementary abelian overgroup lies in H ∪ candidates,
                // so the only one of order `best` is that set itself.
                let mut m = h.members().clone();
                m.union_with(node.candidates);
                if let Ok(s) = amb.subgroup_from_members(m) {
                    if s.is_elementary_abelian() {
                        exact.push(s);
                    }
                }
                return true;
            }
            false
        },
        cap,
        true,
    )?;
    let max = found.iter().chain(&exact).map(|h| h.order()).max().unwrap_or(1);
    let mut out: Vec<SubgroupHandle> = found
        .into_iter()
        .chain(exact)
        .filter(|h| h.order() == max)
        .flat_map(|h| conjugacy_orbit(&h, g))
        .collect();
    out.sort_by(|a, b| a.canonical_cmp(b));
    out.dedup();
    Ok(out)
}

/// A maximal elementary abelian subgroup containing `Ω₁Z(g)`, grown greedily
/// in both scan directions; the larger result is returned.
fn greedy_elementary_abelian(g: &SubgroupHandle) -> SubgroupHandle {
    let amb = g.ambient();
    amb.pth_powers();
    let base = omega1(&center(g));
    let ids: Vec<ElemId> = amb.filter(&g.members, |x| amb.has_order_p(x)).ones().map(|x| x as ElemId).collect();
    let grow = |order: &mut dyn Iterator<Item = &ElemId>| {
        let mut h = base.clone();
        for &x in order {
            if !h.contains(x) && h.gens.iter().all(|&y| amb.commute(x, y)) {
                h = cover(&h, x);
            }
        }
        h
    };
    let a = grow(&mut ids.iter());
    let b = grow(&mut ids.iter().rev());
    if b.order() > a.order() {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> FieldSpec {
        FieldSpec::new(5).unwrap()
    }

    fn ut3() -> Arc<ExplicitGroup> {
        let f = f5();
        ExplicitGroup::close(f, 3, vec![FpMatrix::transvection(f, 3, 0, 1), FpMatrix::transvection(f, 3, 1, 2)], DEFAULT_CAP)
            .unwrap()
    }

    /// All subsets closed under multiplication, found by brute force over
    /// subsets generated by at most two elements (enough for groups of order
    /// p³ and exponent p, whose subgroups are all 2-generated).
    fn brute_subgroups(g: &Arc<ExplicitGroup>) -> Vec<FixedBitSet> {
        let n = g.order() as ElemId;
        let mut seen = FxHashSet::default();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a..n {
                let mut set = FixedBitSet::with_capacity(n as usize);
                set.insert(g.identity() as usize);
                let mut changed = true;
                set.insert(a as usize);
                set.insert(b as usize);
                while changed {
                    changed = false;
                    let cur: Vec<usize> = set.ones().collect();
                    for &x in &cur {
                        for &y in &[a, b] {
                            let z = g.mul(x as ElemId, y) as usize;
                            if !set.put(z) {
                                changed = true;
                            }
                        }
                    }
                }
                if seen.insert(set.clone()) {
                    out.push(set);
                }
            }
        }
        out
    }

    #[test]
    fn trivial_and_ut3_orders() {
        let f = f5();
        let t = ExplicitGroup::close(f, 3, vec![], DEFAULT_CAP).unwrap();
        assert_eq!(t.order(), 1);
        assert_eq!(ut3().order(), 125);
    }

    #[test]
    fn cap_and_non_p_groups() {
        let f = f5();
        let gens = vec![FpMatrix::transvection(f, 3, 0, 1), FpMatrix::transvection(f, 3, 1, 2)];
        assert!(matches!(ExplicitGroup::close(f, 3, gens, 100), Err(Error::CapExceeded { .. })));
        // Upper and lower transvections generate SL(2,5), order 120.
        let gens = vec![FpMatrix::transvection(f, 2, 0, 1), FpMatrix::transvection(f, 2, 1, 0)];
        assert!(matches!(ExplicitGroup::close(f, 2, gens, DEFAULT_CAP), Err(Error::NotPGroup { order: 120, .. })));
    }

    #[test]
    fn center_of_ut3() {
        let g = ut3();
        let z = center(&g.whole());
        assert_eq!(z.order(), 5);
        let f = f5();
        assert!(z.contains_matrix(&FpMatrix::transvection(f, 3, 0, 2)));
        // Oracle: filter by commuting with every element.
        let brute = (0..125).filter(|&x| (0..125).all(|y| g.commute(x, y))).count();
        assert_eq!(brute, 5);
    }

    #[test]
    fn centralizer_of_trivial_is_everything() {
        let g = ut3();
        assert!(centralizer(&g.whole(), &g.trivial()).unwrap().is_whole());
    }

    #[test]
    fn normalizer_and_normal_closure() {
        let g = ut3();
        let f = f5();
        let w = g.whole();
        let h = g
            .subgroup_of_matrices(&[FpMatrix::transvection(f, 3, 0, 1), FpMatrix::transvection(f, 3, 0, 2)])
            .unwrap();
        assert!(normalizer(&w, &h).unwrap().is_whole());
        let one = g.subgroup_of_matrices(&[FpMatrix::transvection(f, 3, 0, 1)]).unwrap();
        let nc = normal_closure(&w, &one).unwrap();
        assert_eq!(nc.subgroup, h);
        assert!(nc.two_subnormal);
        let z = center(&w);
        let ncz = normal_closure(&w, &z).unwrap();
        assert_eq!(ncz.subgroup, z);
        assert!(normal_closure(&w, &w).unwrap().subgroup.is_whole());
    }

    #[test]
    fn commutators_and_class() {
        let g = ut3();
        let w = g.whole();
        let d = commutator_subgroup(&w, &w).unwrap();
        assert_eq!(d, center(&w));
        assert!(iterated_commutator(&w, &w, 2).unwrap().is_trivial());
        assert_eq!(nilpotence_class(&w), 2);
        let z = center(&w);
        assert!(commutator_subgroup(&z, &z).unwrap().is_trivial());
    }

    #[test]
    fn omega1_of_cyclic_group() {
        let f = f5();
        let mut j = FpMatrix::identity(f, 6);
        for i in 0..5 {
            j.set(i, i + 1, 1);
        }
        let g = ExplicitGroup::close(f, 6, vec![j.clone()], DEFAULT_CAP).unwrap();
        assert_eq!(g.order(), 25);
        let o = omega1(&g.whole());
        assert_eq!(o.order(), 5);
        assert!(o.contains_matrix(&j.pow(5)));
        assert!(omega1(&g.trivial()).is_trivial());
    }

    #[test]
    fn series_agree() {
        let g = ut3();
        let w = g.whole();
        let upper = upper_central_series(&w);
        assert!(upper.verify(&w));
        assert_eq!(upper.terms.len() - 1, nilpotence_class(&w));
    }

    #[test]
    fn subgroup_search_matches_brute_force() {
        let g = ut3();
        let w = g.whole();
        let all = enumerate_subgroups(&w, SubgroupFilter::All, &mut |_| false, DEFAULT_CAP).unwrap();
        let brute = brute_subgroups(&g);
        assert_eq!(all.len(), brute.len());
        let abelian = enumerate_subgroups(&w, SubgroupFilter::Abelian, &mut |_| false, DEFAULT_CAP).unwrap();
        let brute_abelian = brute
            .iter()
            .filter(|s| {
                let ids: Vec<usize> = s.ones().collect();
                ids.iter().all(|&a| ids.iter().all(|&b| g.commute(a as ElemId, b as ElemId)))
            })
            .count();
        assert_eq!(abelian.len(), brute_abelian);
        // Every proper subgroup of UT(3,5) is abelian.
        assert_eq!(abelian.len() + 1, all.len());
    }

    #[test]
    fn max_elementary_abelian_of_ut3() {
        let g = ut3();
        let maxes = max_elementary_abelian_subgroups(&g.whole(), DEFAULT_CAP).unwrap();
        // Each ⟨x, Z⟩ for the p + 1 lines of G/Z.
        assert_eq!(maxes.len(), 6);
        assert!(maxes.iter().all(|h| h.order() == 25));
        let f = f5();
        let a = g
            .subgroup_of_matrices(&[FpMatrix::transvection(f, 3, 0, 1), FpMatrix::transvection(f, 3, 0, 2)])
            .unwrap();
        let b = g
            .subgroup_of_matrices(&[FpMatrix::transvection(f, 3, 1, 2), FpMatrix::transvection(f, 3, 0, 2)])
            .unwrap();
        assert!(maxes.contains(&a) && maxes.contains(&b));
    }

    #[test]
    fn abelian_group_subgroups_are_all_abelian() {
        let f = f5();
        let g = ExplicitGroup::close(
            f,
            3,
            vec![FpMatrix::transvection(f, 3, 0, 2), FpMatrix::transvection(f, 3, 1, 2)],
            DEFAULT_CAP,
        )
        .unwrap();
        let w = g.whole();
        let all = enumerate_subgroups(&w, SubgroupFilter::All, &mut |_| false, DEFAULT_CAP).unwrap();
        let ab = enumerate_subgroups(&w, SubgroupFilter::Abelian, &mut |_| false, DEFAULT_CAP).unwrap();
        assert_eq!(all.len(), ab.len());
        // Subspaces of F_5^2: 1 + 6 + 1.
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn keys_identify_subgroups() {
        let g = ut3();
        let w = g.whole();
        let z = center(&w);
        assert_eq!(z.key(), commutator_subgroup(&w, &w).unwrap().key());
        assert_ne!(z.key(), w.key());
    }

    #[test]
    fn from_members_rejects_non_subgroups() {
        let g = ut3();
        let mut bits = FixedBitSet::with_capacity(125);
        bits.insert(g.identity() as usize);
        bits.insert(g.generator_ids()[0] as usize);
        assert!(g.subgroup_from_members(bits).is_err());
    }
}
