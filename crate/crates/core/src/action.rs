//! The semidirect setting `S = V ⋊ G` with `G ≤ GL(n, p)` and `V = F_p^n`.
//!
//! `V` is never enumerated in the symbolic routines: every `V`-side quantity
//! is a subspace computation and only `G` is enumerated. An explicit mode
//! builds `S` inside `GL(n + 1, p)` through the affine embedding
//! `(v, g) ↦ [[g, 0], [v, 1]]` and is used for cross-checks and for
//! operations on subgroups that are not product subgroups.

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::group::{
    conjugacy_orbit, enumerate_subgroup_classes, normal_closure, upper_central_series, CentralSeries, ElemId, ExplicitGroup,
    SubgroupFilter, SubgroupHandle, SubgroupKey, DEFAULT_CAP,
};
use crate::linalg::{kernel, preimage, row_space, unipotent_index, FieldSpec, FpMatrix, Subspace};

pub struct SemidirectContext {
    field: FieldSpec,
    n: usize,
    g: Arc<ExplicitGroup>,
    cap: usize,
    explicit: OnceLock<Result<Arc<ExplicitSemidirect>>>,
}

impl std::fmt::Debug for SemidirectContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemidirectContext")
            .field("p", &self.field.p())
            .field("n", &self.n)
            .field("order_g", &self.g.order())
            .finish()
    }
}

impl SemidirectContext {
    /// Context for a matrix group acting on its natural module. A group of
    /// matrices acts faithfully by construction.
    pub fn new(g: Arc<ExplicitGroup>) -> Self {
        Self::with_cap(g, DEFAULT_CAP)
    }

    pub fn with_cap(g: Arc<ExplicitGroup>, cap: usize) -> Self {
        Self { field: g.field(), n: g.dim(), g, cap, explicit: OnceLock::new() }
    }

    pub fn from_generators(field: FieldSpec, n: usize, gens: Vec<FpMatrix>, cap: usize) -> Result<Self> {
        Ok(Self::with_cap(ExplicitGroup::close(field, n, gens, cap)?, cap))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// `dim V`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> &Arc<ExplicitGroup> {
        &self.g
    }

    pub fn whole_group(&self) -> SubgroupHandle {
        self.g.whole()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn module(&self) -> Subspace {
        Subspace::full(self.field, self.n)
    }

    /// `log_p |S|`.
    pub fn log_order_s(&self) -> u32 {
        self.n as u32 + self.g.log_order()
    }

    /// Affine matrix of `(v, g)`: `[[g, 0], [v, 1]]`.
    pub fn embed(&self, v: &[u8], g: &FpMatrix) -> FpMatrix {
        let n = self.n;
        let mut m = FpMatrix::zero(self.field, n + 1);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, g.get(i, j));
            }
            m.set(n, i, v[i]);
        }
        m.set(n, n, 1);
        m
    }

    /// Inverse of [`Self::embed`].
    pub fn split(&self, m: &FpMatrix) -> (Vec<u8>, FpMatrix) {
        let n = self.n;
        let v: Vec<u8> = (0..n).map(|j| m.get(n, j)).collect();
        let mut g = FpMatrix::zero(self.field, n);
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, m.get(i, j));
            }
        }
        (v, g)
    }

    /// The explicit affine realization of `S`, built on first use.
    pub fn explicit(&self) -> Result<Arc<ExplicitSemidirect>> {
        self.explicit.get_or_init(|| ExplicitSemidirect::build(self).map(Arc::new)).clone()
    }

    /// `C_V(E)`, from the generators of `E`.
    pub fn fixed_space(&self, e: &SubgroupHandle) -> Subspace {
        let mut acc = self.module();
        for m in e.generator_matrices() {
            acc = acc.intersect(&kernel(&m.minus_identity())).expect("same ambient");
        }
        acc
    }

    /// `[V, g; k] = V(g − 1)^k`.
    pub fn module_bracket_element(&self, g: &FpMatrix, k: usize) -> Subspace {
        row_space(&g.minus_identity().pow(k as u64))
    }

    /// `[V, H; k]`, iterating `U ↦ Σ_h U(h − 1)` over generators of `H`.
    pub fn module_bracket(&self, h: &SubgroupHandle, k: usize) -> Subspace {
        let gens: Vec<FpMatrix> = h.generator_matrices().iter().map(|m| m.minus_identity()).collect();
        bracket_subspace(self.field, self.n, &self.module(), &gens, k)
    }

    /// `min { unipotent index of z : 1 ≠ z ∈ Ω₁Z(G) }`.
    pub fn ps_degree(&self) -> Result<usize> {
        let whole = self.g.whole();
        if whole.is_trivial() {
            return Err(Error::TrivialGroup);
        }
        let z = crate::group::center(&whole);
        let g = &self.g;
        let degree = z
            .member_ids()
            .filter(|&x| g.has_order_p(x))
            .map(|x| unipotent_index(g.element(x)))
            .try_fold(usize::MAX, |acc, d| d.map(|d| acc.min(d)));
        degree
    }

    pub fn is_ps_module(&self, k: usize) -> Result<bool> {
        Ok(self.ps_degree()? >= k)
    }

    /// Elementary abelian offenders, annotated.
    pub fn find_offenders(&self, opts: &OffenderOptions) -> Result<Vec<Offender>> {
        let n = self.n as i64;
        let corrupt = opts.corrupt_inequality;
        let mut prune = |node: &crate::group::SearchNode<'_>| {
            if corrupt {
                return false;
            }
            let fixed = self.fixed_space(node.subgroup).dim() as i64;
            let bound = log_p(node.order_bound(), self.field.p()) as i64;
            bound + fixed < n
        };
        // Offending, the defect, quadraticity and 2-subnormality are all
        // invariant under G-conjugation, so one representative per class is
        // searched and annotated.
        let whole = self.g.whole();
        let reps = enumerate_subgroup_classes(&whole, SubgroupFilter::ElementaryAbelian, &mut prune, opts.cap)?;
        let mut out = Vec::new();
        for e in reps.into_iter().filter(|e| !e.is_trivial()) {
            let defect = e.log_order() as i64 + self.fixed_space(&e).dim() as i64 - n;
            let offends = if corrupt { defect < 0 } else { defect >= 0 };
            if !offends {
                continue;
            }
            let quadratic = self.module_bracket(&e, 2).is_zero() && !self.module_bracket(&e, 1).is_zero();
            let two_subnormal = normal_closure(&whole, &e)?.two_subnormal;
            for c in conjugacy_orbit(&e, &whole) {
                let fixed = self.fixed_space(&c);
                out.push(Offender { e: c, fixed, defect, quadratic, two_subnormal });
            }
        }
        if out.len() > opts.cap {
            return Err(Error::CapExceeded { count: out.len(), cap: opts.cap });
        }
        out.sort_by(|a, b| a.e.canonical_cmp(&b.e));
        if opts.scope == OffenderScope::MaxDefect {
            let best = out.iter().map(|o| o.defect).max();
            out.retain(|o| Some(o.defect) == best);
        }
        Ok(out)
    }

    /// Central series of `S` through `V`: the terms `V ∩ Z_i(S)` up to `V`,
    /// then the preimages of the upper central series of `G`.
    pub fn central_series_through_v(&self) -> SemidirectSeries {
        let gens: Vec<FpMatrix> = self.g.generators().iter().map(|m| m.minus_identity()).collect();
        let mut terms = vec![SeriesTerm::Module(Subspace::zero(self.field, self.n))];
        let mut current = Subspace::zero(self.field, self.n);
        while !current.is_full() {
            let mut next = self.module();
            for m in &gens {
                next = next.intersect(&preimage(m, &current)).expect("same ambient");
            }
            assert!(next.dim() > current.dim(), "a p-group fixes a nonzero vector of every nonzero module");
            terms.push(SeriesTerm::Module(next.clone()));
            current = next;
        }
        let v_index = terms.len() - 1;
        let upper = upper_central_series(&self.g.whole());
        terms.extend(upper.terms.into_iter().skip(1).map(SeriesTerm::Lifted));
        SemidirectSeries { terms, v_index }
    }

    /// Checks the centrality condition `[Z_i, S] ≤ Z_{i−1}` term by term.
    pub fn verify_series(&self, series: &SemidirectSeries) -> bool {
        let gens: Vec<FpMatrix> = self.g.generators().iter().map(|m| m.minus_identity()).collect();
        let whole = self.g.whole();
        let t = &series.terms;
        if !matches!(t.first(), Some(SeriesTerm::Module(u)) if u.is_zero()) {
            return false;
        }
        if !matches!(t.get(series.v_index), Some(SeriesTerm::Module(u)) if u.is_full()) {
            return false;
        }
        if !matches!(t.last(), Some(SeriesTerm::Lifted(h)) if h.is_whole())
            && !(whole.is_trivial() && series.v_index == t.len() - 1)
        {
            return false;
        }
        for i in 1..t.len() {
            let ok = match (&t[i - 1], &t[i]) {
                (SeriesTerm::Module(lo), SeriesTerm::Module(hi)) => {
                    lo.is_subspace_of(hi) && gens.iter().all(|m| hi.image(m).is_subspace_of(lo))
                }
                // [π⁻¹(H), S] ≤ V iff H is central in G.
                (SeriesTerm::Module(lo), SeriesTerm::Lifted(h)) => {
                    lo.is_full() && crate::group::commutator_subgroup(h, &whole).is_ok_and(|c| c.is_trivial())
                }
                (SeriesTerm::Lifted(lo), SeriesTerm::Lifted(hi)) => {
                    lo.is_subgroup_of(hi)
                        && hi.is_normal_in(&whole)
                        && crate::group::commutator_subgroup(hi, &whole).is_ok_and(|c| c.is_subgroup_of(lo))
                }
                (SeriesTerm::Lifted(_), SeriesTerm::Module(_)) => false,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Intersection sizes of `A` with every nontrivial term, as exponents of p.
    pub fn profile(&self, a: &ProductSubgroup, series: &SemidirectSeries) -> SeriesProfile {
        let intersections = series.terms[1..]
            .iter()
            .map(|t| match t {
                SeriesTerm::Module(u) => a.d.intersect(u).expect("same ambient").dim() as u32,
                SeriesTerm::Lifted(h) => {
                    a.d.dim() as u32 + a.e.intersect(h).expect("same ambient").log_order()
                }
            })
            .collect();
        SeriesProfile { log_order: a.log_order(), intersections }
    }

    /// `A_×(S)`: all `C_V(E) × E` with `E ≠ 1` abelian and
    /// `|C_V(E)||E| = m`, where `m` is the maximum order of an abelian
    /// subgroup of `S`.
    pub fn enumerate_a_times(&self) -> Result<ATimes> {
        let p = self.field.p();
        let mut best = self.n as u32;
        let mut prune = |node: &crate::group::SearchNode<'_>| {
            let fixed = self.fixed_space(node.subgroup).dim() as u32;
            let score = fixed + node.subgroup.log_order();
            best = best.max(score);
            log_p(node.order_bound(), p) + fixed < best
        };
        let whole = self.g.whole();
        let reps = enumerate_subgroup_classes(&whole, SubgroupFilter::Abelian, &mut prune, self.cap)?;
        let mut found: Vec<SubgroupHandle> = reps
            .iter()
            .filter(|e| !e.is_trivial() && self.fixed_space(e).dim() as u32 + e.log_order() >= best)
            .flat_map(|e| conjugacy_orbit(e, &whole))
            .collect();
        found.sort_by(|a, b| a.canonical_cmp(b));
        let scored: Vec<(u32, SubgroupHandle, Subspace)> = found
            .into_iter()
            .map(|e| {
                let fixed = self.fixed_space(&e);
                (fixed.dim() as u32 + e.log_order(), e, fixed)
            })
            .collect();
        let m = scored.iter().map(|s| s.0).max().unwrap_or(0).max(self.n as u32);
        let members: Vec<ProductSubgroup> =
            scored.into_iter().filter(|s| s.0 == m).map(|(_, e, d)| ProductSubgroup { d, e }).collect();
        if members.is_empty() {
            return Err(Error::NoProductMaximal);
        }
        Ok(ATimes { m_log: m, members })
    }

    /// A `≤_𝒮`-maximal member of `A_×(S)`; ties go to the lexicographically
    /// greatest profile, then the smallest key. Asserts that `V` normalizes
    /// the result.
    pub fn select_max(&self, series: &SemidirectSeries) -> Result<ProductSubgroup> {
        let at = self.enumerate_a_times()?;
        let profiles: Vec<SeriesProfile> = at.members.iter().map(|a| self.profile(a, series)).collect();
        let maximal: Vec<usize> = (0..profiles.len())
            .filter(|&i| !profiles.iter().any(|q| cmp_series(&profiles[i], q) == SeriesOrdering::Less))
            .collect();
        let chosen = maximal
            .into_iter()
            .max_by(|&i, &j| {
                profiles[i]
                    .intersections
                    .cmp(&profiles[j].intersections)
                    .then_with(|| at.members[j].key().cmp(&at.members[i].key()))
            })
            .expect("a finite nonempty poset has maximal elements");
        let a = at.members[chosen].clone();
        if !self.v_normalizes(&a) {
            return Err(Error::Contradiction(
                "V does not normalize a maximal member of A_x(S)".into(),
            ));
        }
        if !self.module_bracket(&a.e, 2).is_zero() {
            return Err(Error::Contradiction("[V, A, A] != 1 for a maximal member of A_x(S)".into()));
        }
        Ok(a)
    }

    /// `V` normalizes `D ⋊ E` iff `[V, E] ≤ D`.
    pub fn v_normalizes(&self, a: &ProductSubgroup) -> bool {
        a.e.generator_matrices().iter().all(|m| row_space(&m.minus_identity()).is_subspace_of(&a.d))
    }

    /// `A^g = (D g, E^g)` for `g ∈ G`.
    pub fn conjugate_product(&self, a: &ProductSubgroup, g: ElemId) -> ProductSubgroup {
        ProductSubgroup { d: a.d.image(self.g.element(g)), e: a.e.conjugate(g) }
    }

    /// `D ⋊ E`, checking that `D` is `E`-invariant.
    pub fn product(&self, d: Subspace, e: SubgroupHandle) -> Result<ProductSubgroup> {
        if !Arc::ptr_eq(e.ambient(), &self.g) {
            return Err(Error::AmbientMismatch);
        }
        if e.generator_matrices().iter().any(|m| !d.image(m).is_subspace_of(&d)) {
            return Err(Error::PreconditionFailed("D is not invariant under E".into()));
        }
        Ok(ProductSubgroup { d, e })
    }
}

fn bracket_subspace(field: FieldSpec, n: usize, start: &Subspace, gens_minus_one: &[FpMatrix], k: usize) -> Subspace {
    let mut u = start.clone();
    for _ in 0..k {
        let mut next = Subspace::zero(field, n);
        for m in gens_minus_one {
            next = next.sum(&u.image(m)).expect("same ambient");
        }
        u = next;
        if u.is_zero() {
            break;
        }
    }
    u
}

pub(crate) fn log_p(mut x: usize, p: u32) -> u32 {
    let mut e = 0;
    while x >= p as usize {
        x /= p as usize;
        e += 1;
    }
    e
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffenderScope {
    All,
    /// Only offenders whose defect is maximal.
    MaxDefect,
}

#[derive(Clone, Debug)]
pub struct OffenderOptions {
    pub scope: OffenderScope,
    pub cap: usize,
    /// Replaces the offending test by its negation. Used only to exercise the
    /// monitor machinery.
    #[doc(hidden)]
    pub corrupt_inequality: bool,
}

impl Default for OffenderOptions {
    fn default() -> Self {
        Self { scope: OffenderScope::All, cap: DEFAULT_CAP, corrupt_inequality: false }
    }
}

/// A nontrivial elementary abelian `E ≤ G` with `|E||C_V(E)| ≥ |V|`.
#[derive(Clone, Debug)]
pub struct Offender {
    pub e: SubgroupHandle,
    pub fixed: Subspace,
    /// `log_p(|E||C_V(E)|) − log_p |V|`.
    pub defect: i64,
    pub quadratic: bool,
    pub two_subnormal: bool,
}

/// `D ⋊ E` with `D ≤ V` invariant under `E ≤ G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSubgroup {
    pub d: Subspace,
    pub e: SubgroupHandle,
}

impl ProductSubgroup {
    pub fn log_order(&self) -> u32 {
        self.d.dim() as u32 + self.e.log_order()
    }

    /// `[D, E] = 1`.
    pub fn is_direct(&self) -> bool {
        self.e.generator_matrices().iter().all(|m| self.d.image(&m.minus_identity()).is_zero())
    }

    pub fn is_abelian(&self) -> bool {
        self.is_direct() && self.e.is_abelian()
    }

    pub fn key(&self) -> (SubgroupKey, Subspace) {
        (self.e.key(), self.d.clone())
    }
}

/// Intersection sizes of a subgroup with the terms `Z_1, …, Z_n` of a series,
/// stored as exponents of p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesProfile {
    pub log_order: u32,
    pub intersections: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOrdering {
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// The order `≤_𝒮`: equal orders and componentwise comparison.
pub fn cmp_series(a: &SeriesProfile, b: &SeriesProfile) -> SeriesOrdering {
    if a.log_order != b.log_order || a.intersections.len() != b.intersections.len() {
        return SeriesOrdering::Incomparable;
    }
    let mut le = true;
    let mut ge = true;
    for (x, y) in a.intersections.iter().zip(&b.intersections) {
        match x.cmp(y) {
            Ordering::Less => ge = false,
            Ordering::Greater => le = false,
            Ordering::Equal => {}
        }
    }
    match (le, ge) {
        (true, true) => SeriesOrdering::Equal,
        (true, false) => SeriesOrdering::Less,
        (false, true) => SeriesOrdering::Greater,
        (false, false) => SeriesOrdering::Incomparable,
    }
}

#[derive(Clone, Debug)]
pub enum SeriesTerm {
    /// A subspace of `V`.
    Module(Subspace),
    /// `π⁻¹(H) = V ⋊ H` for a normal subgroup `H` of `G`.
    Lifted(SubgroupHandle),
}

/// Ascending central series of `S` with `terms[v_index] = V`.
#[derive(Clone, Debug)]
pub struct SemidirectSeries {
    pub terms: Vec<SeriesTerm>,
    pub v_index: usize,
}

/// The members of `A_×(S)` and the common order `p^m_log`.
#[derive(Clone, Debug)]
pub struct ATimes {
    pub m_log: u32,
    pub members: Vec<ProductSubgroup>,
}

/// `S = V ⋊ G` enumerated inside `GL(n + 1, p)`.
pub struct ExplicitSemidirect {
    field: FieldSpec,
    n: usize,
    g: Arc<ExplicitGroup>,
    s: Arc<ExplicitGroup>,
    projection: Vec<ElemId>,
    v: SubgroupHandle,
    complement: SubgroupHandle,
}

impl ExplicitSemidirect {
    fn build(ctx: &SemidirectContext) -> Result<Self> {
        let (field, n) = (ctx.field, ctx.n);
        let p = field.p() as usize;
        let size = p.checked_pow(n as u32).and_then(|x| x.checked_mul(ctx.g.order()));
        match size {
            Some(s) if s <= ctx.cap => {}
            _ => return Err(Error::CapExceeded { count: size.unwrap_or(usize::MAX), cap: ctx.cap }),
        }
        let vectors = Subspace::full(field, n).vectors();
        let mut elements = Vec::with_capacity(size.unwrap());
        for v in &vectors {
            for g in ctx.g.elements() {
                elements.push(ctx.embed(v, g));
            }
        }
        let identity = FpMatrix::identity(field, n);
        let mut generators: Vec<FpMatrix> = ctx.g.generators().iter().map(|g| ctx.embed(&vec![0; n], g)).collect();
        for i in 0..n {
            let mut e = vec![0u8; n];
            e[i] = 1;
            generators.push(ctx.embed(&e, &identity));
        }
        let s = ExplicitGroup::from_closed_set(field, n + 1, generators, elements)?;
        let projection: Vec<ElemId> = s.elements().iter().map(|m| ctx.g.expect_id(&ctx.split(m).1)).collect();
        let g_identity = ctx.g.identity();
        let mut vbits = FixedBitSet::with_capacity(s.order());
        let mut cbits = FixedBitSet::with_capacity(s.order());
        for (i, m) in s.elements().iter().enumerate() {
            let (v, _) = ctx.split(m);
            if projection[i] == g_identity {
                vbits.insert(i);
            }
            if v.iter().all(|&x| x == 0) {
                cbits.insert(i);
            }
        }
        let v = s.subgroup_from_members(vbits)?;
        let complement = s.subgroup_from_members(cbits)?;
        Ok(Self { field, n, g: ctx.g.clone(), s, projection, v, complement })
    }

    pub fn group(&self) -> &Arc<ExplicitGroup> {
        &self.s
    }

    /// `V` as a subgroup of `S`.
    pub fn v(&self) -> &SubgroupHandle {
        &self.v
    }

    /// The complement `G` as a subgroup of `S`.
    pub fn complement(&self) -> &SubgroupHandle {
        &self.complement
    }

    pub fn project(&self, x: ElemId) -> ElemId {
        self.projection[x as usize]
    }

    pub fn vector_of(&self, x: ElemId) -> Vec<u8> {
        let m = self.s.element(x);
        (0..self.n).map(|j| m.get(self.n, j)).collect()
    }

    fn embed(&self, v: &[u8], g: &FpMatrix) -> FpMatrix {
        let n = self.n;
        let mut m = FpMatrix::zero(self.field, n + 1);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, g.get(i, j));
            }
            m.set(n, i, v[i]);
        }
        m.set(n, n, 1);
        m
    }

    /// `B_× = (B ∩ V) π(B)`.
    pub fn product_closure(&self, b: &SubgroupHandle) -> ProductSubgroup {
        let d = Subspace::span(
            self.field,
            self.n,
            b.member_ids().filter(|&x| self.v.contains(x)).map(|x| self.vector_of(x)).collect::<Vec<_>>(),
        );
        let images: Vec<ElemId> = b.generators().iter().map(|&x| self.project(x)).collect();
        ProductSubgroup { d, e: self.g.subgroup(&images) }
    }

    /// `π(B) ≤ B`.
    pub fn is_product(&self, b: &SubgroupHandle) -> bool {
        b.member_ids().all(|x| {
            let g = self.g.element(self.project(x));
            b.contains(self.s.expect_id(&self.embed(&vec![0; self.n], g)))
        })
    }

    /// The subgroup `D ⋊ E` of the explicit `S`.
    pub fn realize(&self, a: &ProductSubgroup) -> SubgroupHandle {
        let mut bits = FixedBitSet::with_capacity(self.s.order());
        let vectors = a.d.vectors();
        for e in a.e.member_ids() {
            let g = self.g.element(e);
            for v in &vectors {
                bits.insert(self.s.expect_id(&self.embed(v, g)) as usize);
            }
        }
        self.s.subgroup_from_members(bits).expect("product subgroups are subgroups")
    }

    /// `U ≤ V` as a subgroup of `S`.
    pub fn module_subgroup(&self, u: &Subspace) -> SubgroupHandle {
        let identity = FpMatrix::identity(self.field, self.n);
        let ids: Vec<ElemId> = u.basis().iter().map(|v| self.s.expect_id(&self.embed(v, &identity))).collect();
        self.s.subgroup(&ids)
    }

    /// `π⁻¹(H)`.
    pub fn lift(&self, h: &SubgroupHandle) -> SubgroupHandle {
        let mut bits = FixedBitSet::with_capacity(self.s.order());
        for x in 0..self.s.order() {
            if h.contains(self.projection[x]) {
                bits.insert(x);
            }
        }
        self.s.subgroup_from_members(bits).expect("preimages are subgroups")
    }

    /// Realizes a symbolic series as subgroups of the explicit `S`.
    pub fn realize_series(&self, series: &SemidirectSeries) -> CentralSeries {
        let terms = series
            .terms
            .iter()
            .map(|t| match t {
                SeriesTerm::Module(u) => self.module_subgroup(u),
                SeriesTerm::Lifted(h) => self.lift(h),
            })
            .collect();
        CentralSeries { terms, v_index: Some(series.v_index) }
    }
}

/// Intersection sizes of an explicit subgroup with every nontrivial term.
pub fn explicit_profile(a: &SubgroupHandle, series: &CentralSeries) -> SeriesProfile {
    let p = a.ambient().field().p();
    let intersections = series.terms[1..]
        .iter()
        .map(|t| {
            let mut m = a.members().clone();
            m.intersect_with(t.members());
            log_p(m.count_ones(..), p)
        })
        .collect();
    SeriesProfile { log_order: a.log_order(), intersections }
}
