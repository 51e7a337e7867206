//! Command dispatch and the `oliver-report v1` JSON report.

use std::str::FromStr;
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::action::{OffenderOptions, ProductSubgroup, SemidirectContext};
use crate::characteristic::{
    check_conjecture, compute_baum, compute_je, compute_xk, je_reduction, reduce_to_module, verify_chain,
    ConjectureEvidence, ConjectureInput, ConjectureOptions,
};
use crate::corpus::{self, Instance};
use crate::error::{Error, Result};
use crate::group::{
    max_elementary_abelian_subgroups, normal_closure, upper_central_series, CentralSeries, SubgroupHandle,
};
use crate::input::{instance_digest, InputDocument, ModeHint};
use crate::linalg::FpMatrix;
use crate::monitor::{run_monitors, MonitorOptions, MonitorOutcome};
use crate::replacement::{
    find_replacement_trigger, normal_w, thompson_step, two_subnormal_offender, verify_glaubcor, GlaubcorScope,
};

pub const REPORT_FORMAT: &str = "oliver-report v1";

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONTRADICTION: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Xk,
    Je,
    Baum,
    Offenders,
    TwoSubnormal,
    NormalW,
    ReplaceThompson,
    ReplaceGlauberman,
    Monitors,
    Corpus,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Check,
        Command::Xk,
        Command::Je,
        Command::Baum,
        Command::Offenders,
        Command::TwoSubnormal,
        Command::NormalW,
        Command::ReplaceThompson,
        Command::ReplaceGlauberman,
        Command::Monitors,
        Command::Corpus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Xk => "xk",
            Command::Je => "je",
            Command::Baum => "baum",
            Command::Offenders => "offenders",
            Command::TwoSubnormal => "two-subnormal",
            Command::NormalW => "normalw",
            Command::ReplaceThompson => "replace-thompson",
            Command::ReplaceGlauberman => "replace-glauberman",
            Command::Monitors => "monitors",
            Command::Corpus => "corpus",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SeriesChoice {
    /// The series through `V` for modules, the upper central series otherwise.
    #[default]
    Default,
    Upper,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub k: Option<usize>,
    /// `Auto` defers to the document's mode hint.
    pub mode: ModeHint,
    pub cap: usize,
    pub series: SeriesChoice,
    /// Restrict `offenders` output to quadratic offenders.
    pub quadratic: bool,
    /// Restrict `offenders` output to 2-subnormal offenders.
    pub two_subnormal: bool,
    /// Include wall-clock timings in the report.
    pub timings: bool,
    #[doc(hidden)]
    pub corrupt_offender_check: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            k: None,
            mode: ModeHint::Auto,
            cap: crate::group::DEFAULT_CAP,
            series: SeriesChoice::Default,
            quadratic: false,
            two_subnormal: false,
            timings: true,
            corrupt_offender_check: false,
        }
    }
}

/// A finished run: the report and the process exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

/// A theorem-backed statement checked during the run.
struct FactRecord {
    theorem: String,
    asserted: bool,
    passed: bool,
    detail: String,
}

struct Run<'a> {
    opts: &'a RunOptions,
    instance: &'a Instance,
    facts: Vec<FactRecord>,
    certificate: Option<Value>,
}

fn matrix_json(m: &FpMatrix) -> Value {
    json!(m.to_rows())
}

impl<'a> Run<'a> {
    fn ctx(&self) -> Option<&'a SemidirectContext> {
        match self.instance {
            Instance::Module(ctx) => Some(ctx),
            Instance::Group { .. } => None,
        }
    }

    fn p(&self) -> u32 {
        self.instance.p()
    }

    fn k(&self) -> usize {
        self.opts.k.unwrap_or(self.p() as usize)
    }

    fn fact(&mut self, theorem: &str, asserted: bool, passed: bool, detail: impl Into<String>) {
        self.facts.push(FactRecord { theorem: theorem.into(), asserted, passed, detail: detail.into() });
    }

    /// An element in input coordinates: affine elements of `V ⋊ G` split
    /// into a vector and a matrix.
    fn element_json(&self, m: &FpMatrix) -> Value {
        match self.ctx() {
            Some(ctx) if m.dim() == ctx.n() + 1 => {
                let (v, g) = ctx.split(m);
                json!({ "vector": v, "matrix": g.to_rows() })
            }
            _ => matrix_json(m),
        }
    }

    fn subgroup_json(&self, h: &SubgroupHandle) -> Value {
        let gens: Vec<Value> = h.generator_matrices().iter().map(|m| self.element_json(m)).collect();
        json!({ "order": h.order(), "log_order": h.log_order(), "generators": gens })
    }

    fn product_json(&self, a: &ProductSubgroup) -> Value {
        json!({ "log_order": a.log_order(), "d_basis": a.d.basis(), "e": self.subgroup_json(&a.e) })
    }

    /// The group the explicit commands work in: `S` itself, or `V ⋊ G`.
    fn explicit_s(&self) -> Result<SubgroupHandle> {
        match self.instance {
            Instance::Group { group, .. } => Ok(group.whole()),
            Instance::Module(ctx) => Ok(ctx.explicit()?.group().whole()),
        }
    }

    fn series_for(&self, s: &SubgroupHandle) -> Result<CentralSeries> {
        match (self.opts.series, self.ctx()) {
            (SeriesChoice::Default, Some(ctx)) => {
                let ex = ctx.explicit()?;
                Ok(ex.realize_series(&ctx.central_series_through_v()))
            }
            _ => Ok(upper_central_series(s)),
        }
    }

    fn mode(&self, doc: Option<&InputDocument>) -> ModeHint {
        match (self.opts.mode, doc) {
            (ModeHint::Auto, Some(d)) => d.mode,
            (m, _) => m,
        }
    }

    fn require_module(&self, what: &str) -> Result<&'a SemidirectContext> {
        self.ctx().ok_or_else(|| Error::Input(format!("`{what}` needs a module (module-dim)")))
    }

    fn check(&mut self, doc: Option<&InputDocument>) -> Result<Value> {
        let k = self.k();
        let copts = ConjectureOptions { cap: self.opts.cap, ..Default::default() };
        let mode = self.mode(doc);
        let report = match (self.instance, mode) {
            (Instance::Group { .. }, ModeHint::Semidirect) => {
                return Err(Error::Input("semidirect mode needs a module (module-dim)".into()))
            }
            (Instance::Group { group, .. }, _) => check_conjecture(ConjectureInput::Explicit(&group.whole()), k, &copts)?,
            (Instance::Module(ctx), ModeHint::Explicit) => {
                let ex = ctx.explicit()?;
                check_conjecture(ConjectureInput::Explicit(&ex.group().whole()), k, &copts)?
            }
            (Instance::Module(ctx), _) => check_conjecture(ConjectureInput::Semidirect(ctx), k, &copts)?,
        };
        let mut out = json!({
            "k": k,
            "mode": format!("{:?}", report.mode).to_lowercase(),
            "holds": report.holds,
            "counterexample_candidate": report.counterexample_candidate,
            "cross_checked": report.cross_checked,
        });
        let asserted = k == self.p() as usize;
        match &report.evidence {
            ConjectureEvidence::Explicit { xk, chain, je } => {
                out["xk"] = self.subgroup_json(xk);
                out["je"] = self.subgroup_json(je);
                out["je_equals_xk"] = json!(je == xk);
                out["chain_orders"] = json!(chain.terms.iter().map(|t| t.order()).collect::<Vec<_>>());
                if report.counterexample_candidate {
                    self.certificate = Some(json!({
                        "kind": "je-not-in-xk",
                        "je": self.subgroup_json(je),
                        "xk": self.subgroup_json(xk),
                    }));
                }
            }
            ConjectureEvidence::Reduction { ps_degree, offenders } => {
                out["ps_degree"] = json!(ps_degree);
                out["offenders"] = json!(offenders.len());
                if report.cross_checked {
                    self.fact("PS converse: X_k(V x G) = V", true, true, "explicit X_k equals V");
                }
                if report.counterexample_candidate {
                    if let Some(o) = offenders.first() {
                        self.certificate = Some(json!({
                            "kind": "offender-in-ps-module",
                            "offender": self.subgroup_json(&o.e),
                            "fixed_basis": o.fixed.basis(),
                            "defect": o.defect,
                        }));
                    }
                }
            }
        }
        self.fact("J_e(S) <= X_k(S)", asserted, report.holds, format!("k = {k}"));
        Ok(out)
    }

    fn xk(&mut self) -> Result<Value> {
        let k = self.k();
        let s = self.explicit_s()?;
        let (xk, chain) = compute_xk(&s, k)?;
        let verified = verify_chain(&s, &chain);
        self.fact("Oliver chain certificate", true, verified.is_ok(), match verified {
            Ok(()) => "every term re-verified".to_string(),
            Err(i) => format!("term {i} fails"),
        });
        if let Some(ctx) = self.ctx() {
            if ctx.group().order() > 1 && ctx.ps_degree()? >= k {
                let v = ctx.explicit()?.v().clone();
                self.fact("PS converse: X_k(V x G) = V", true, xk == v, format!("PS degree >= {k}"));
            }
        }
        Ok(json!({
            "k": k,
            "xk": self.subgroup_json(&xk),
            "chain_orders": chain.terms.iter().map(|t| t.order()).collect::<Vec<_>>(),
        }))
    }

    fn je(&mut self, doc: Option<&InputDocument>) -> Result<Value> {
        match (self.ctx(), self.mode(doc)) {
            (Some(ctx), ModeHint::Auto | ModeHint::Semidirect) => {
                let red = je_reduction(ctx)?;
                Ok(json!({ "je_within_v": red.within_v, "offenders": red.offenders.len() }))
            }
            _ => {
                let s = self.explicit_s()?;
                let je = compute_je(&s, self.opts.cap)?;
                Ok(json!({ "je": self.subgroup_json(&je) }))
            }
        }
    }

    fn baum(&mut self) -> Result<Value> {
        let g = match self.instance {
            Instance::Group { group, .. } => group.whole(),
            Instance::Module(ctx) => ctx.whole_group(),
        };
        let b = compute_baum(&g, self.opts.cap)?;
        Ok(json!({ "baum": self.subgroup_json(&b), "is_whole": b.is_whole() }))
    }

    fn offenders(&mut self) -> Result<Value> {
        let ctx = self.require_module("offenders")?;
        let all = ctx.find_offenders(&OffenderOptions { cap: self.opts.cap, ..Default::default() })?;
        let n = ctx.n();
        let listed: Vec<Value> = all
            .iter()
            .filter(|o| (!self.opts.quadratic || o.quadratic) && (!self.opts.two_subnormal || o.two_subnormal))
            .map(|o| {
                json!({
                    "e": self.subgroup_json(&o.e),
                    "fixed_dim": o.fixed.dim(),
                    "defect": o.defect,
                    "ratio": format!("|E||C_V(E)|/|V| = p^{}", o.defect),
                    "quadratic": o.quadratic,
                    "two_subnormal": o.two_subnormal,
                })
            })
            .collect();
        Ok(json!({ "module_dim": n, "f_module": !all.is_empty(), "total": all.len(), "offenders": listed }))
    }

    fn two_subnormal(&mut self) -> Result<Value> {
        let ctx = self.require_module("two-subnormal")?;
        let ts = match two_subnormal_offender(ctx) {
            Ok(ts) => ts,
            Err(Error::NoProductMaximal) => return Ok(json!({ "f_module": false })),
            Err(e) => return Err(e),
        };
        let e = &ts.offender.e;
        let fixed = corpus::fixed_space_by_members(ctx, e);
        let offends = e.log_order() as usize + fixed.dim() >= ctx.n();
        let quadratic = ctx.module_bracket(e, 2).is_zero();
        let sub = e.is_normal_in(&normal_closure(&ctx.whole_group(), e)?.subgroup);
        let asserted = ts.guaranteed;
        self.fact("offender: |E||C_V(E)| >= |V|", true, offends, "recomputed over all members");
        self.fact("quadratic: [V, E, E] = 1", true, quadratic, "recomputed");
        self.fact("2-subnormal: E normal in <E^G>", asserted, sub, if asserted { "p >= 5" } else { "reported only" });
        Ok(json!({
            "f_module": true,
            "offender": self.subgroup_json(e),
            "defect": ts.offender.defect,
            "two_subnormal": sub,
            "guaranteed": ts.guaranteed,
            "a": self.product_json(&ts.a),
        }))
    }

    fn normal_w(&mut self) -> Result<Value> {
        let ctx = self.require_module("normalw")?;
        let w = match normal_w(ctx, None) {
            Ok(w) => w,
            Err(Error::NoProductMaximal) => return Ok(json!({ "f_module": false })),
            Err(e) => return Err(e),
        };
        self.fact("dichotomy: [W, x] = 1 or [W, x, x] != 1", true, true, "checked for every x in G");
        Ok(json!({
            "f_module": true,
            "e": self.subgroup_json(&w.e),
            "n": self.subgroup_json(&w.n),
            "chain_orders": w.chain.iter().map(|h| h.order()).collect::<Vec<_>>(),
            "j": w.j,
            "a": matrix_json(ctx.group().element(w.a)),
            "w": self.subgroup_json(&w.w),
        }))
    }

    fn replace_thompson(&mut self) -> Result<Value> {
        const MAX_SUBGROUPS: usize = 16;
        let s = self.explicit_s()?;
        let series = self.series_for(&s)?;
        let candidates: Vec<SubgroupHandle> = match self.ctx() {
            Some(ctx) => {
                let ex = ctx.explicit()?;
                match ctx.enumerate_a_times() {
                    Ok(at) => at.members.iter().map(|a| ex.realize(a)).collect(),
                    Err(Error::NoProductMaximal) => vec![ex.v().clone()],
                    Err(e) => return Err(e),
                }
            }
            None => max_elementary_abelian_subgroups(&s, self.opts.cap)?,
        };
        let (mut invocations, mut replaced, mut skipped) = (0usize, 0usize, 0usize);
        for a in candidates.iter().take(MAX_SUBGROUPS) {
            for &v in s.generators() {
                match thompson_step(&s, a, v, &series) {
                    Ok(step) => {
                        invocations += 1;
                        replaced += usize::from(step.a_star != *a);
                    }
                    Err(Error::NonAbelianBracket) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
        }
        self.fact("Thompson replacement: |A ∩ M| <= |A* ∩ M|", true, true, format!("{invocations} steps"));
        Ok(json!({
            "subgroups": candidates.len().min(MAX_SUBGROUPS),
            "invocations": invocations,
            "replaced": replaced,
            "skipped_nonabelian": skipped,
            "series_terms": series.terms.len(),
        }))
    }

    fn replace_glauberman(&mut self) -> Result<Value> {
        let ctx = self.require_module("replace-glauberman")?;
        let mut out = Map::new();
        match find_replacement_trigger(ctx) {
            Ok(Some(t)) => {
                out.insert("trigger".into(), json!({ "a": self.subgroup_json(&t.a), "carrier_order": t.carrier.order() }));
            }
            Ok(None) => {
                out.insert("trigger".into(), Value::Null);
            }
            Err(Error::NoProductMaximal) => {
                out.insert("f_module".into(), json!(false));
                return Ok(Value::Object(out));
            }
            Err(e) => return Err(e),
        }
        let a = ctx.select_max(&ctx.central_series_through_v())?;
        let r = verify_glaubcor(ctx, &a, GlaubcorScope::Conjugates)?;
        self.fact("members of B_A normalize A", true, true, format!("{} candidates, {} in B_A", r.candidates, r.in_ba));
        out.insert("a".into(), self.product_json(&a));
        out.insert(
            "glaubcor".into(),
            json!({ "candidates": r.candidates, "in_ba": r.in_ba, "conjugates_checked": r.conjugates_checked }),
        );
        Ok(Value::Object(out))
    }

    fn monitors(&mut self) -> Result<Vec<MonitorOutcome>> {
        let mopts = MonitorOptions { cap: self.opts.cap, corrupt_inequality: self.opts.corrupt_offender_check };
        match self.instance {
            Instance::Module(ctx) => run_monitors(ctx, &mopts),
            Instance::Group { group, .. } => {
                let red = reduce_to_module(&group.whole(), self.k(), self.opts.cap)?;
                self.fact(
                    "S/X_k(S) acts faithfully on Omega_1 Z(X_k(S))",
                    false,
                    red.faithful,
                    format!("k = {}", self.k()),
                );
                run_monitors(&red.ctx, &mopts)
            }
        }
    }
}

fn monitor_json(m: &MonitorOutcome) -> Value {
    json!({
        "monitor": m.kind.name(),
        "applicable": m.applicable,
        "fired": m.fired,
        "detail": m.detail,
    })
}

fn certificate_json(m: &MonitorOutcome) -> Value {
    let mut v = json!({ "kind": "monitor", "monitor": m.kind.name(), "detail": m.detail });
    if let Some(c) = &m.certificate {
        v["claim"] = json!(c.claim);
        v["offender"] = json!(c.offender.iter().map(|x| x.to_rows()).collect::<Vec<_>>());
        v["log_order_e"] = json!(c.log_order_e);
        v["fixed_basis"] = json!(c.fixed_basis);
        v["module_dim"] = json!(c.module_dim);
        v["recheck"] = json!(c.recheck);
    }
    v
}

fn base_report(command: Command, digest: Option<String>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("format".into(), json!(REPORT_FORMAT));
    m.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command.name()));
    m.insert("instance_digest".into(), json!(digest));
    m
}

fn error_outcome(mut report: Map<String, Value>, err: &Error) -> Outcome {
    let exit_code = match err {
        Error::Contradiction(msg) => {
            report.insert("certificate".into(), json!({ "kind": "contradiction", "message": msg }));
            EXIT_CONTRADICTION
        }
        _ => EXIT_ERROR,
    };
    report.insert("error".into(), json!(err.to_string()));
    report.insert("exit_code".into(), json!(exit_code));
    Outcome { report: Value::Object(report), exit_code }
}

/// Runs `command` on a parsed document. `corpus` ignores the document.
pub fn run(command: Command, doc: Option<&InputDocument>, opts: &RunOptions) -> Outcome {
    if command == Command::Corpus {
        return run_corpus(opts);
    }
    let started = Instant::now();
    let Some(doc) = doc else {
        return error_outcome(base_report(command, None), &Error::Input(format!("`{}` needs an input document", command.name())));
    };
    let instance = match doc.build(opts.cap) {
        Ok(i) => i,
        Err(e) => return error_outcome(base_report(command, Some(doc.digest())), &e),
    };
    let mut report = base_report(command, Some(instance_digest(&instance)));
    report.insert("instance".into(), instance_summary(&instance));
    let mut run = Run { opts, instance: &instance, facts: Vec::new(), certificate: None };
    let result = match command {
        Command::Check => run.check(Some(doc)),
        Command::Xk => run.xk(),
        Command::Je => run.je(Some(doc)),
        Command::Baum => run.baum(),
        Command::Offenders => run.offenders(),
        Command::TwoSubnormal => run.two_subnormal(),
        Command::NormalW => run.normal_w(),
        Command::ReplaceThompson => run.replace_thompson(),
        Command::ReplaceGlauberman => run.replace_glauberman(),
        Command::Monitors => Ok(Value::Null),
        Command::Corpus => unreachable!(),
    };
    let results = match result {
        Ok(v) => v,
        Err(e) => return error_outcome(report, &e),
    };
    let command_time = started.elapsed();
    let monitors = match run.monitors() {
        Ok(m) => m,
        Err(e) => return error_outcome(report, &e),
    };
    let mut exit_code = EXIT_OK;
    if let Some(fired) = monitors.iter().find(|m| m.fired) {
        exit_code = EXIT_CONTRADICTION;
        run.certificate.get_or_insert_with(|| certificate_json(fired));
    }
    if let Some(f) = run.facts.iter().find(|f| f.asserted && !f.passed) {
        exit_code = EXIT_CONTRADICTION;
        let cert = json!({ "kind": "fact", "theorem": f.theorem, "detail": f.detail });
        run.certificate.get_or_insert(cert);
    }
    if exit_code == EXIT_CONTRADICTION && run.certificate.is_none() {
        run.certificate = Some(json!({ "kind": "unspecified" }));
    }
    report.insert("results".into(), results);
    report.insert(
        "facts".into(),
        Value::Array(
            run.facts
                .iter()
                .map(|f| json!({ "theorem": f.theorem, "asserted": f.asserted, "passed": f.passed, "detail": f.detail }))
                .collect(),
        ),
    );
    report.insert("monitors".into(), Value::Array(monitors.iter().map(monitor_json).collect()));
    report.insert("certificate".into(), run.certificate.take().unwrap_or(Value::Null));
    report.insert("exit_code".into(), json!(exit_code));
    if opts.timings {
        let total = started.elapsed();
        report.insert(
            "timings_ms".into(),
            json!({ "command": command_time.as_millis() as u64, "total": total.as_millis() as u64 }),
        );
    }
    Outcome { report: Value::Object(report), exit_code }
}

fn instance_summary(instance: &Instance) -> Value {
    match instance {
        Instance::Group { group, .. } => json!({
            "kind": "group",
            "p": group.field().p(),
            "dim": group.dim(),
            "order": group.order(),
        }),
        Instance::Module(ctx) => json!({
            "kind": "module",
            "p": ctx.field().p(),
            "module_dim": ctx.n(),
            "group_order": ctx.group().order(),
            "log_order_s": ctx.log_order_s(),
        }),
    }
}

/// Builds every corpus instance, re-verifies its expected facts and runs the
/// monitors.
pub fn run_corpus(opts: &RunOptions) -> Outcome {
    let started = Instant::now();
    let mut report = base_report(Command::Corpus, None);
    let mut entries = Vec::new();
    let mut exit_code = EXIT_OK;
    let mut certificate = Value::Null;
    for entry in corpus::catalog() {
        let instance = match corpus::build(entry.name, opts.cap) {
            Ok(i) => i,
            Err(e) => {
                entries.push(json!({ "name": entry.name, "error": e.to_string() }));
                exit_code = exit_code.max(EXIT_ERROR);
                continue;
            }
        };
        let facts = match corpus::verify_facts(&entry, &instance, opts.cap) {
            Ok(f) => f,
            Err(e) => return error_outcome(report, &e),
        };
        let mut run = Run { opts, instance: &instance, facts: Vec::new(), certificate: None };
        let monitors = match run.monitors() {
            Ok(m) => m,
            Err(e) => return error_outcome(report, &e),
        };
        if let Some(fired) = monitors.iter().find(|m| m.fired) {
            exit_code = EXIT_CONTRADICTION;
            if certificate.is_null() {
                certificate = certificate_json(fired);
                certificate["instance"] = json!(entry.name);
            }
        }
        if let Some((fact, _)) = facts.iter().find(|(_, ok)| !ok) {
            exit_code = EXIT_CONTRADICTION;
            if certificate.is_null() {
                certificate = json!({ "kind": "corpus-fact", "instance": entry.name, "fact": format!("{fact:?}") });
            }
        }
        entries.push(json!({
            "name": entry.name,
            "p": entry.p,
            "description": entry.description,
            "digest": instance_digest(&instance),
            "facts": facts.iter().map(|(f, ok)| json!({ "fact": format!("{f:?}"), "passed": ok })).collect::<Vec<_>>(),
            "monitors": monitors.iter().map(monitor_json).collect::<Vec<_>>(),
        }));
    }
    report.insert("results".into(), json!({ "instances": entries }));
    report.insert("certificate".into(), certificate);
    report.insert("exit_code".into(), json!(exit_code));
    if opts.timings {
        report.insert("timings_ms".into(), json!({ "total": started.elapsed().as_millis() as u64 }));
    }
    Outcome { report: Value::Object(report), exit_code }
}

/// The input document for a corpus instance.
pub fn export_corpus(name: &str, cap: usize) -> Result<InputDocument> {
    Ok(crate::input::export(&corpus::build(name, cap)?))
}

/// Flattens a report into `path: value` lines for terminal output.
pub fn render_text(report: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) if a.iter().all(|x| !x.is_object()) => {
                out.push_str(&format!("{prefix}: {v}\n"));
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
            _ => out.push_str(&format!("{prefix}: {v}\n")),
        }
    }
    let mut out = String::new();
    walk("", report, &mut out);
    out
}

/// Removes timing fields, for determinism comparisons.
pub fn strip_timings(report: &Value) -> Value {
    let mut r = report.clone();
    if let Value::Object(m) = &mut r {
        m.remove("timings_ms");
    }
    r
}
