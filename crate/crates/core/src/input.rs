//! The `oliver-input v1` instance format, in text and JSON.
//!
//! ```text
//! oliver-input v1
//! p 5
//! module-dim 3      # optional; without it the generators define S itself
//! mode auto         # optional: auto | explicit | semidirect
//! gen
//! 1 1 0
//! 0 1 0
//! 0 0 1
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::action::SemidirectContext;
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::group::ExplicitGroup;
use crate::linalg::{FieldSpec, FpMatrix};

pub const INPUT_FORMAT: &str = "oliver-input v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeHint {
    #[default]
    Auto,
    Explicit,
    Semidirect,
}

impl ModeHint {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeHint::Auto => "auto",
            ModeHint::Explicit => "explicit",
            ModeHint::Semidirect => "semidirect",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(ModeHint::Auto),
            "explicit" => Some(ModeHint::Explicit),
            "semidirect" => Some(ModeHint::Semidirect),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDocument {
    pub format: String,
    pub p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module_dim: Option<usize>,
    #[serde(default)]
    pub mode: ModeHint,
    pub generators: Vec<Vec<Vec<i64>>>,
    /// Line of each `gen` keyword, for diagnostics.
    #[serde(skip)]
    pub gen_lines: Vec<usize>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Whitespace-separated tokens of a line with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, t)| (line[..s].chars().count() + 1, t)).collect()
}

/// Parses text or, if the input starts with `{`, the JSON mirror.
pub fn parse_input(text: &str) -> Result<InputDocument> {
    if text.trim_start().starts_with('{') {
        return parse_json(text);
    }
    let mut header = false;
    let mut p: Option<u32> = None;
    let mut module_dim = None;
    let mut mode = ModeHint::Auto;
    let mut generators: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut gen_lines = Vec::new();
    let mut in_gen = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        last_line = ln;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(col, head)) = toks.first() else { continue };
        if !header {
            if line.trim() != INPUT_FORMAT {
                return Err(parse_err(ln, col, format!("expected header `{INPUT_FORMAT}`")));
            }
            header = true;
            continue;
        }
        let arg = |name: &str| -> Result<(usize, &str)> {
            match toks.as_slice() {
                [_, (c, v)] => Ok((*c, *v)),
                [_] => Err(parse_err(ln, col + head.len(), format!("`{name}` needs a value"))),
                [_, _, (c, _), ..] => Err(parse_err(ln, *c, "unexpected token")),
                [] => unreachable!(),
            }
        };
        match head {
            "p" => {
                let (c, v) = arg("p")?;
                let value: u32 = v.parse().map_err(|_| parse_err(ln, c, format!("`{v}` is not a number")))?;
                FieldSpec::new(value).map_err(|e| parse_err(ln, c, e.to_string()))?;
                p = Some(value);
                in_gen = false;
            }
            "module-dim" => {
                let (c, v) = arg("module-dim")?;
                let n: usize = v.parse().map_err(|_| parse_err(ln, c, format!("`{v}` is not a number")))?;
                if n == 0 {
                    return Err(parse_err(ln, c, "module dimension must be positive"));
                }
                module_dim = Some(n);
                in_gen = false;
            }
            "mode" => {
                let (c, v) = arg("mode")?;
                mode = ModeHint::parse(v).ok_or_else(|| parse_err(ln, c, format!("unknown mode `{v}`")))?;
                in_gen = false;
            }
            "gen" => {
                if toks.len() > 1 {
                    return Err(parse_err(ln, toks[1].0, "unexpected token after `gen`"));
                }
                generators.push(Vec::new());
                gen_lines.push(ln);
                in_gen = true;
            }
            _ if in_gen => {
                let row = toks
                    .iter()
                    .map(|&(c, t)| t.parse::<i64>().map_err(|_| parse_err(ln, c, format!("`{t}` is not an integer"))))
                    .collect::<Result<Vec<_>>>()?;
                let m = generators.last_mut().expect("in a gen block");
                if let Some(first) = m.first() {
                    if first.len() != row.len() {
                        return Err(parse_err(
                            ln,
                            col,
                            format!("row has {} entries, expected {}", row.len(), first.len()),
                        ));
                    }
                }
                m.push(row);
            }
            _ => return Err(parse_err(ln, col, format!("unknown keyword `{head}`"))),
        }
    }
    if !header {
        return Err(parse_err(1, 1, format!("expected header `{INPUT_FORMAT}`")));
    }
    let p = p.ok_or_else(|| parse_err(last_line.max(1), 1, "missing `p`"))?;
    let doc = InputDocument { format: INPUT_FORMAT.into(), p, module_dim, mode, generators, gen_lines };
    doc.validate_shape()?;
    Ok(doc)
}

fn parse_json(text: &str) -> Result<InputDocument> {
    let mut doc: InputDocument = serde_json::from_str(text)
        .map_err(|e| parse_err(e.line(), e.column(), format!("invalid JSON input: {e}")))?;
    if doc.format != INPUT_FORMAT {
        return Err(Error::Input(format!("unsupported format `{}`", doc.format)));
    }
    FieldSpec::new(doc.p)?;
    doc.gen_lines.clear();
    doc.validate_shape()?;
    Ok(doc)
}

impl InputDocument {
    fn where_gen(&self, i: usize) -> String {
        match self.gen_lines.get(i) {
            Some(l) => format!("generator {} (line {l})", i + 1),
            None => format!("generator {}", i + 1),
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::Input("no generators given".into()));
        }
        let dim = self.generators[0].len();
        for (i, g) in self.generators.iter().enumerate() {
            if g.is_empty() || g.iter().any(|r| r.len() != g.len()) {
                return Err(Error::Input(format!("{} is not a square matrix", self.where_gen(i))));
            }
            if g.len() != dim {
                return Err(Error::Input(format!(
                    "{} has dimension {}, expected {dim}",
                    self.where_gen(i),
                    g.len()
                )));
            }
            if let Some(n) = self.module_dim {
                if g.len() != n {
                    return Err(Error::Input(format!(
                        "{} has dimension {}, but module-dim is {n}",
                        self.where_gen(i),
                        g.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn field(&self) -> Result<FieldSpec> {
        FieldSpec::new(self.p)
    }

    pub fn matrices(&self) -> Result<Vec<FpMatrix>> {
        let f = self.field()?;
        self.generators
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                let m = FpMatrix::from_rows(f, rows)?;
                if m.inverse().is_none() {
                    return Err(Error::Input(format!("{} is not invertible", self.where_gen(i))));
                }
                Ok(m)
            })
            .collect()
    }

    /// Closes the generators into a module context or a standalone group.
    pub fn build(&self, cap: usize) -> Result<Instance> {
        let f = self.field()?;
        let gens = self.matrices()?;
        let dim = gens[0].dim();
        let wrap = |e: Error, what: &str| match e {
            Error::NotUnipotent => Error::Input(format!("{what} is not unipotent, so the closure is not a p-group")),
            other => other,
        };
        for (i, g) in gens.iter().enumerate() {
            crate::linalg::unipotent_index(g).map_err(|e| wrap(e, &self.where_gen(i)))?;
        }
        Ok(match self.module_dim {
            Some(n) => Instance::Module(SemidirectContext::from_generators(f, n, gens, cap)?),
            None => Instance::Group { group: ExplicitGroup::close(f, dim, gens, cap)?, base: None },
        })
    }

    /// Canonical text form, entries reduced mod p.
    pub fn to_text(&self) -> String {
        let mut out = format!("{INPUT_FORMAT}\np {}\n", self.p);
        if let Some(n) = self.module_dim {
            let _ = writeln!(out, "module-dim {n}");
        }
        if self.mode != ModeHint::Auto {
            let _ = writeln!(out, "mode {}", self.mode.as_str());
        }
        for g in &self.generators {
            out.push_str("gen\n");
            for row in g {
                let cells: Vec<String> = row.iter().map(|x| x.rem_euclid(self.p as i64).to_string()).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// SHA-256 of the canonical text form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

/// Exports a built instance in input form.
pub fn export(instance: &Instance) -> InputDocument {
    let (p, module_dim, gens) = match instance {
        Instance::Group { group, .. } => (group.field().p(), None, group.generators()),
        Instance::Module(ctx) => (ctx.field().p(), Some(ctx.n()), ctx.group().generators()),
    };
    let generators = gens
        .iter()
        .map(|m| m.to_rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect())
        .collect();
    InputDocument { format: INPUT_FORMAT.into(), p, module_dim, mode: ModeHint::Auto, generators, gen_lines: Vec::new() }
}

/// SHA-256 over the field, kind and generator matrices of a built instance.
pub fn instance_digest(instance: &Instance) -> String {
    let mut h = Sha256::new();
    let (tag, p, dim, gens) = match instance {
        Instance::Group { group, .. } => (0u8, group.field().p(), group.dim(), group.generators()),
        Instance::Module(ctx) => (1u8, ctx.field().p(), ctx.n(), ctx.group().generators()),
    };
    h.update([tag]);
    h.update(p.to_le_bytes());
    h.update((dim as u64).to_le_bytes());
    for g in gens {
        h.update(g.key());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_CAP;

    const UT3: &str = "oliver-input v1\np 5\nmodule-dim 3\ngen\n1 1 0\n0 1 0\n0 0 1\ngen\n1 0 0\n0 1 1\n0 0 1\n";

    #[test]
    fn minimal_document() {
        let doc = parse_input(UT3).unwrap();
        assert_eq!((doc.p, doc.module_dim, doc.generators.len()), (5, Some(3), 2));
        match doc.build(DEFAULT_CAP).unwrap() {
            Instance::Module(ctx) => assert_eq!(ctx.group().order(), 125),
            _ => panic!("expected a module"),
        }
    }

    #[test]
    fn comments_and_negative_entries() {
        let text = "# UT(2,5)\noliver-input v1\np 5   # prime\ngen\n1 -4\n0 1\n";
        let doc = parse_input(text).unwrap();
        assert_eq!(doc.to_text(), "oliver-input v1\np 5\ngen\n1 1\n0 1\n");
    }

    #[test]
    fn diagnostics() {
        let err = |t: &str| parse_input(t).unwrap_err();
        assert_eq!(
            err("oliver-input v2\n"),
            Error::Parse { line: 1, column: 1, message: "expected header `oliver-input v1`".into() }
        );
        assert!(matches!(err("oliver-input v1\np 2\ngen\n1\n"), Error::Parse { line: 2, column: 3, .. }));
        assert!(matches!(err("oliver-input v1\np 9\ngen\n1\n"), Error::Parse { line: 2, column: 3, .. }));
        assert!(matches!(err("oliver-input v1\np 5\ngen\n1 0\n0 x\n"), Error::Parse { line: 5, column: 3, .. }));
        assert!(matches!(err("oliver-input v1\np 5\ngen\n1 0\n0\n"), Error::Parse { line: 5, .. }));
        assert!(matches!(err("oliver-input v1\np 5\nfoo 1\n"), Error::Parse { line: 3, column: 1, .. }));
        let e = err("oliver-input v1\np 5\nmodule-dim 3\ngen\n1 0\n0 1\n");
        assert!(e.to_string().contains("module-dim is 3"), "{e}");
    }

    #[test]
    fn non_invertible_generator_is_named() {
        let doc = parse_input("oliver-input v1\np 5\ngen\n1 1\n0 1\ngen\n1 1\n1 1\n").unwrap();
        let e = doc.build(DEFAULT_CAP).unwrap_err();
        assert_eq!(e.to_string(), "generator 2 (line 6) is not invertible");
    }

    #[test]
    fn non_p_group_rejected() {
        let doc = parse_input("oliver-input v1\np 5\ngen\n2 0\n0 1\n").unwrap();
        assert!(doc.build(DEFAULT_CAP).unwrap_err().to_string().contains("not unipotent"));
    }

    #[test]
    fn json_mirror_round_trip() {
        let doc = parse_input(UT3).unwrap();
        let back = parse_input(&doc.to_json()).unwrap();
        assert_eq!(back.digest(), doc.digest());
        assert_eq!(back.generators, doc.generators);
    }

    #[test]
    fn corpus_export_round_trip() {
        for entry in crate::corpus::catalog() {
            if entry.name == "wreath5" {
                continue;
            }
            let inst = crate::corpus::build(entry.name, DEFAULT_CAP).unwrap();
            let doc = export(&inst);
            let parsed = parse_input(&doc.to_text()).unwrap();
            assert_eq!(parsed.digest(), doc.digest(), "{}", entry.name);
            let rebuilt = parsed.build(DEFAULT_CAP).unwrap();
            assert_eq!(instance_digest(&rebuilt), instance_digest(&inst), "{}", entry.name);
        }
    }
}
