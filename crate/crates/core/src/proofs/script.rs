use super::{Assumption, Dir, Judgment, Label, Node, ProofScript, ScriptError, Source};
use crate::syntax::{parse_formula_in, Formula, Modality, Sort, SortContext};

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ScriptError> {
    Err(ScriptError {
        line,
        message: message.into(),
    })
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn name(line: usize, s: &str) -> Result<String, ScriptError> {
    let s = s.trim();
    if is_name(s) {
        Ok(s.to_string())
    } else {
        err(line, format!("`{s}` is not a valid name"))
    }
}

fn label(line: usize, s: &str) -> Result<Label, ScriptError> {
    match s.split_once(',') {
        Some((snap, view)) => Ok(Label::new(name(line, snap)?, name(line, view)?)),
        None => err(line, format!("expected a label `S,V`, found `{}`", s.trim())),
    }
}

fn chop_args(line: usize, dir: Dir, s: &str) -> Result<(String, String, String), ScriptError> {
    let inner = s
        .trim()
        .strip_prefix(dir.keyword())
        .and_then(|r| r.trim_start().strip_prefix('('))
        .and_then(|r| r.trim_end().strip_suffix(')'))
        .ok_or_else(|| ScriptError {
            line,
            message: format!("expected {}(…)", dir.keyword()),
        })?;
    let parts: Vec<&str> = inner.split(',').collect();
    match parts.as_slice() {
        [a, b, c] => Ok((name(line, a)?, name(line, b)?, name(line, c)?)),
        [v] => Ok((String::new(), String::new(), name(line, v)?)),
        _ => err(line, format!("{} takes three views", dir.keyword())),
    }
}

fn modality(line: usize, text: &str, vars: &SortContext) -> Result<Modality, ScriptError> {
    match parse_formula_in(&format!("[{text}] bot"), vars) {
        Ok(Formula::BoxM(m, _)) => Ok(m),
        Ok(_) => err(line, format!("`{text}` is not a modality")),
        Err(e) => err(line, format!("bad modality `{text}`: {e}")),
    }
}

pub(crate) fn judgment(line: usize, text: &str, vars: &SortContext) -> Result<Judgment, ScriptError> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("exists ") {
        for dir in [Dir::H, Dir::V] {
            if rest.trim_start().starts_with(dir.keyword()) {
                let (a, _, view) = chop_args(line, dir, rest)?;
                if !a.is_empty() {
                    return err(line, "decomposability names a single view");
                }
                return Ok(Judgment::Decomposable { dir, view });
            }
        }
        return err(line, "expected `exists hchop(V)` or `exists vchop(V)`");
    }
    for dir in [Dir::H, Dir::V] {
        if t.starts_with(&format!("{}(", dir.keyword())) {
            let (first, second, whole) = chop_args(line, dir, t)?;
            if first.is_empty() {
                return err(line, format!("{} takes three views", dir.keyword()));
            }
            return Ok(Judgment::Chop {
                dir,
                first,
                second,
                whole,
            });
        }
    }
    if let Some((lhs, rest)) = t.split_once("-[") {
        let (m, rhs) = rest.split_once("]->").ok_or_else(|| ScriptError {
            line,
            message: "expected `S,V -[m]-> S',V'`".into(),
        })?;
        let from = label(line, lhs)?;
        let to = label(line, rhs)?;
        let modality = modality(line, m, vars)?;
        if modality != Modality::Tau && from.view != to.view {
            return err(line, "discrete transitions keep the view");
        }
        return Ok(Judgment::Trans { from, modality, to });
    }
    if let Some((lhs, rhs)) = t.split_once("|-") {
        let label = label(line, lhs)?;
        let formula = parse_formula_in(rhs, vars).map_err(|e| ScriptError {
            line,
            message: format!("bad formula: {e}"),
        })?;
        return Ok(Judgment::Holds { label, formula });
    }
    err(line, format!("cannot read judgment `{t}`"))
}

fn bracketed<'a>(line: usize, s: &'a str, open: char, close: char) -> Result<(&'a str, &'a str), ScriptError> {
    let body = s.strip_prefix(open).ok_or_else(|| ScriptError {
        line,
        message: format!("expected `{open}`"),
    })?;
    match body.find(close) {
        Some(i) => Ok((&body[..i], &body[i + 1..])),
        None => err(line, format!("missing `{close}`")),
    }
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn node(line: usize, nm: String, mut rest: &str, vars: &SortContext) -> Result<Node, ScriptError> {
    let mut rule = None;
    let mut premises = vec![];
    let mut discharge = vec![];
    let mut with = None;
    loop {
        rest = rest.trim_start();
        if let Some(j) = rest.strip_prefix("conclude") {
            let Some(rule) = rule else {
                return err(line, "node without rule=");
            };
            return Ok(Node {
                name: nm,
                rule,
                premises,
                discharge,
                with,
                conclusion: judgment(line, j, vars)?,
                line,
            });
        }
        let (key, value) = rest.split_once('=').ok_or_else(|| ScriptError {
            line,
            message: "expected key=value or `conclude`".into(),
        })?;
        let value = value.trim_start();
        match key.trim() {
            "rule" => {
                let end = value.find(char::is_whitespace).unwrap_or(value.len());
                rule = Some(value[..end].to_string());
                rest = &value[end..];
            }
            "premises" => {
                let (inner, after) = bracketed(line, value, '[', ']')?;
                premises = list(inner);
                for p in &premises {
                    name(line, p)?;
                }
                rest = after;
            }
            "discharge" => {
                let (inner, after) = bracketed(line, value, '[', ']')?;
                discharge = list(inner)
                    .iter()
                    .map(|x| {
                        x.parse().map_err(|_| ScriptError {
                            line,
                            message: format!("bad discharge index `{x}`"),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                rest = after;
            }
            "with" => {
                let (inner, after) = bracketed(line, value, '{', '}')?;
                with = Some(inner.trim().to_string());
                rest = after;
            }
            other => return err(line, format!("unknown node attribute `{other}`")),
        }
    }
}

/// Reads a proof script.
pub fn parse_script(text: &str) -> Result<ProofScript, ScriptError> {
    let mut p = ProofScript::default();
    let mut goal = None;
    let mut taken = std::collections::BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        match kw {
            "var" => {
                for decl in rest.split_whitespace() {
                    let (n, s) = decl.split_once(':').ok_or_else(|| ScriptError {
                        line,
                        message: format!("expected name:sort, found `{decl}`"),
                    })?;
                    let sort: Sort = s.parse().map_err(|_| ScriptError {
                        line,
                        message: format!("unknown sort `{s}`"),
                    })?;
                    p.vars.insert(name(line, n)?, sort);
                }
            }
            "label" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [s, v] = parts.as_slice() else {
                    return err(line, "expected `label S V`");
                };
                p.snapshots.insert(name(line, s)?);
                p.views.insert(name(line, v)?);
            }
            "assume" | "assume-rel" | "hyp" => {
                let (head, j) = rest.split_once(':').ok_or_else(|| ScriptError {
                    line,
                    message: "expected `name: judgment`".into(),
                })?;
                let (nm, source) = if kw == "hyp" {
                    let (nm, idx) = head.split_once('[').ok_or_else(|| ScriptError {
                        line,
                        message: "expected `hyp name [index]: judgment`".into(),
                    })?;
                    let idx = idx.trim().strip_suffix(']').and_then(|x| x.trim().parse().ok()).ok_or_else(|| {
                        ScriptError {
                            line,
                            message: "bad hypothesis index".into(),
                        }
                    })?;
                    (name(line, nm)?, Source::Hyp(idx))
                } else {
                    (name(line, head)?, if kw == "assume" { Source::Gamma } else { Source::Delta })
                };
                let judgment = judgment(line, j, &p.vars)?;
                match (&source, &judgment) {
                    (Source::Gamma, Judgment::Holds { .. }) => {}
                    (Source::Gamma, _) => return err(line, "`assume` takes a labelled formula"),
                    (Source::Delta, Judgment::Holds { .. }) => {
                        return err(line, "`assume-rel` takes a relational formula")
                    }
                    _ => {}
                }
                if !taken.insert(nm.clone()) {
                    return err(line, format!("`{nm}` is declared twice"));
                }
                p.assumptions.insert(
                    nm.clone(),
                    Assumption {
                        name: nm,
                        source,
                        judgment,
                        line,
                    },
                );
            }
            "node" => {
                let (nm, body) = rest.split_once(':').ok_or_else(|| ScriptError {
                    line,
                    message: "expected `node name: …`".into(),
                })?;
                let nm = name(line, nm)?;
                if !taken.insert(nm.clone()) {
                    return err(line, format!("`{nm}` is declared twice"));
                }
                let n = node(line, nm.clone(), body, &p.vars)?;
                p.nodes.insert(nm, n);
            }
            "goal" => goal = Some(name(line, rest)?),
            other => return err(line, format!("unknown directive `{other}`")),
        }
    }
    match goal {
        Some(g) => p.goal = g,
        None => return err(text.lines().count().max(1), "missing `goal`"),
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judgments() {
        let mut vars = SortContext::new();
        vars.insert("c".into(), Sort::Car);
        let j = judgment(1, "S,V -[r(c)]-> S',V", &vars).unwrap();
        assert_eq!(j.to_string(), "S,V -[r(c)]-> S',V");
        assert!(judgment(1, "S,V -[r(c)]-> S',W", &vars).is_err());
        let j = judgment(1, "vchop(V1, V2, V)", &vars).unwrap();
        assert_eq!(j.to_string(), "vchop(V1,V2,V)");
        let j = judgment(1, "exists hchop(V)", &vars).unwrap();
        assert_eq!(j, Judgment::Decomposable { dir: Dir::H, view: "V".into() });
        let j = judgment(1, "S',V |- re(c) or cl(c)", &vars).unwrap();
        assert_eq!(j.to_string(), "S',V |- re(c) or cl(c)");
    }

    #[test]
    fn nodes_and_errors() {
        let text = "var c:car\nlabel S V\nhyp h [1]: S,V |- re(c)\n\
                    node n: rule=imp-I premises=[h] discharge=[1] conclude S,V |- re(c) -> re(c)\ngoal n\n";
        let p = parse_script(text).unwrap();
        let n = &p.nodes["n"];
        assert_eq!(n.rule, "imp-I");
        assert_eq!(n.premises, vec!["h"]);
        assert_eq!(n.discharge, vec![1]);
        assert_eq!(p.assumptions["h"].source, Source::Hyp(1));
        let bad = parse_script("label S V\nnode n: premises=[] conclude S,V |- top\ngoal n");
        assert_eq!(bad.unwrap_err().line, 2);
        assert!(parse_script("label S V\n").is_err());
    }
}
