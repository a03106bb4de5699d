//! CPLEX-dialect LP file writer and parser.
//!
//! Section order on write is `Minimize`, `Subject To`, `Bounds`, `Binary`,
//! `General`, `End`. Every variable gets one declaration line in `Bounds`
//! (in id order), which is also how the parser reconstructs variable ids, so
//! `read_lp(write_lp(p))` is structurally identical to `p`. Numbers are
//! written in plain decimal (shortest round-trip form, never exponent
//! notation); the parser additionally accepts exponent forms.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::milp::{MilpProblem, Sense, VarKind};

#[derive(Debug, Error)]
pub enum LpFileError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: invalid model: {message}")]
    Model { line: usize, message: String },
}

fn fmt_num(x: f64) -> String {
    // f64 Display is the shortest decimal that round-trips and never uses
    // exponent notation, which keeps the files solver- and diff-friendly.
    format!("{x}")
}

fn write_expr(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, &(var, coeff)) in terms.iter().enumerate() {
        if i == 0 {
            if coeff < 0.0 {
                let _ = write!(out, " - {} {}", fmt_num(-coeff), names[var]);
            } else {
                let _ = write!(out, " {} {}", fmt_num(coeff), names[var]);
            }
        } else if coeff < 0.0 {
            let _ = write!(out, " - {} {}", fmt_num(-coeff), names[var]);
        } else {
            let _ = write!(out, " + {} {}", fmt_num(coeff), names[var]);
        }
    }
}

/// Block label for the comment line preceding a run of constraints: the
/// constraint-name prefix up to the first digit-bearing suffix separator.
fn block_of(name: &str) -> &str {
    match name.find(|c: char| c == '_') {
        Some(split) => {
            // Walk forward while the next segment is still alphabetic, so
            // "sep_lo_l2_d0" groups as "sep_lo" and "roof_d0" as "roof".
            let mut end = split;
            let bytes = name.as_bytes();
            let mut i = split;
            while i < name.len() && bytes[i] == b'_' {
                let seg_start = i + 1;
                let mut j = seg_start;
                while j < name.len() && bytes[j] != b'_' {
                    j += 1;
                }
                let seg = &name[seg_start..j];
                if seg.is_empty() || seg.bytes().any(|b| b.is_ascii_digit()) {
                    break;
                }
                end = j;
                i = j;
            }
            &name[..end]
        }
        None => name,
    }
}

/// Renders the problem in the LP dialect.
pub fn lp_to_string(problem: &MilpProblem) -> String {
    let names: Vec<String> = problem.variables().iter().map(|v| v.name.clone()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", problem.name);
    out.push_str("Minimize\n obj:");
    write_expr(&mut out, problem.objective(), &names);
    out.push('\n');
    out.push_str("Subject To\n");
    let mut last_block = String::new();
    for c in problem.constraints() {
        let block = block_of(&c.name);
        if block != last_block {
            let _ = writeln!(out, "\\ {block}");
            last_block = block.to_string();
        }
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, &c.terms, &names);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in problem.variables() {
        let line = match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => format!(" {} = {}", v.name, fmt_num(v.lower)),
            (true, true) => format!(
                " {} <= {} <= {}",
                fmt_num(v.lower),
                v.name,
                fmt_num(v.upper)
            ),
            (true, false) => format!(" {} >= {}", v.name, fmt_num(v.lower)),
            (false, true) => format!(" -inf <= {} <= {}", v.name, fmt_num(v.upper)),
            (false, false) => format!(" {} free", v.name),
        };
        let _ = writeln!(out, "{line}");
    }
    let binaries: Vec<&str> = problem
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    let generals: Vec<&str> = problem
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("General\n");
        for name in generals {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

/// Writes the LP rendering of `problem` to `path`.
pub fn write_lp(problem: &MilpProblem, path: impl AsRef<Path>) -> Result<(), LpFileError> {
    let path = path.as_ref();
    std::fs::write(path, lp_to_string(problem)).map_err(|source| LpFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads an LP file back into a [`MilpProblem`].
pub fn read_lp(path: impl AsRef<Path>) -> Result<MilpProblem, LpFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LpFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    lp_from_string(&text)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Le,
    Ge,
    Eq,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name {n:?}"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Eq => "'='".into(),
            Tok::Colon => "':'".into(),
        }
    }
}

struct Tokens {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    problem_name: Option<String>,
}

fn tokenize(text: &str) -> Result<Tokens, LpFileError> {
    let mut toks = Vec::new();
    let mut problem_name = None;
    for (lineno0, raw) in text.lines().enumerate() {
        let line = lineno0 + 1;
        let content = match raw.find('\\') {
            Some(idx) => {
                let comment = raw[idx + 1..].trim();
                if let Some(name) = comment.strip_prefix("Problem:") {
                    problem_name = Some(name.trim().to_string());
                }
                &raw[..idx]
            }
            None => raw,
        };
        let mut chars = content.char_indices().peekable();
        while let Some(&(i, ch)) = chars.peek() {
            if ch.is_whitespace() {
                chars.next();
                continue;
            }
            match ch {
                '+' => {
                    chars.next();
                    toks.push((line, Tok::Plus));
                }
                '-' => {
                    chars.next();
                    toks.push((line, Tok::Minus));
                }
                ':' => {
                    chars.next();
                    toks.push((line, Tok::Colon));
                }
                '<' | '>' | '=' => {
                    chars.next();
                    if let Some(&(_, '=')) = chars.peek() {
                        chars.next();
                    }
                    toks.push((
                        line,
                        match ch {
                            '<' => Tok::Le,
                            '>' => Tok::Ge,
                            _ => Tok::Eq,
                        },
                    ));
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let start = i;
                    let mut end = i;
                    let mut seen_exp = false;
                    while let Some(&(j, cj)) = chars.peek() {
                        if cj.is_ascii_digit() || cj == '.' {
                            end = j + cj.len_utf8();
                            chars.next();
                        } else if (cj == 'e' || cj == 'E') && !seen_exp {
                            // Exponent only if followed by a digit or sign.
                            let rest = &content[j + 1..];
                            let next = rest.chars().next();
                            if matches!(next, Some(c2) if c2.is_ascii_digit() || c2 == '+' || c2 == '-')
                            {
                                seen_exp = true;
                                end = j + 1;
                                chars.next();
                                if matches!(rest.chars().next(), Some('+') | Some('-')) {
                                    end += 1;
                                    chars.next();
                                }
                            } else {
                                break;
                            }
                        } else {
                            break;
                        }
                    }
                    let lit = &content[start..end];
                    let value: f64 = lit.parse().map_err(|_| LpFileError::Parse {
                        line,
                        message: format!("bad number literal {lit:?}"),
                    })?;
                    toks.push((line, Tok::Num(value)));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    let mut end = i;
                    while let Some(&(j, cj)) = chars.peek() {
                        if cj.is_alphanumeric() || cj == '_' || cj == '.' {
                            end = j + cj.len_utf8();
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    toks.push((line, Tok::Name(content[start..end].to_string())));
                }
                other => {
                    return Err(LpFileError::Parse {
                        line,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
    }
    Ok(Tokens {
        toks,
        pos: 0,
        problem_name,
    })
}

impl Tokens {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|(l, _)| *l)
            .unwrap_or(0)
    }

    /// Consumes a section keyword if the upcoming name matches (case-insensitive).
    fn eat_keyword(&mut self, words: &[&str]) -> bool {
        let mut k = self.pos;
        for w in words {
            match self.toks.get(k) {
                Some((_, Tok::Name(n))) if n.eq_ignore_ascii_case(w) => k += 1,
                _ => return false,
            }
        }
        self.pos = k;
        true
    }

    fn at_section_boundary(&self) -> bool {
        if let Some((_, Tok::Name(n))) = self.peek() {
            let n = n.to_ascii_lowercase();
            if matches!(
                n.as_str(),
                "bounds" | "binary" | "binaries" | "general" | "generals" | "end"
            ) {
                return true;
            }
            if n == "subject" || n == "st" || n == "s.t." {
                return true;
            }
        }
        false
    }
}

#[derive(Debug)]
struct RawVar {
    lower: Option<f64>,
    upper: Option<f64>,
    fixed: Option<f64>,
    free: bool,
    kind: VarKind,
}

impl Default for RawVar {
    fn default() -> Self {
        RawVar {
            lower: None,
            upper: None,
            fixed: None,
            free: false,
            kind: VarKind::Continuous,
        }
    }
}

/// Parses the LP dialect from a string.
pub fn lp_from_string(text: &str) -> Result<MilpProblem, LpFileError> {
    let mut toks = tokenize(text)?;
    let perr = |line: usize, message: String| LpFileError::Parse { line, message };

    if !toks.eat_keyword(&["Minimize"]) && !toks.eat_keyword(&["min"]) {
        if toks.eat_keyword(&["Maximize"]) || toks.eat_keyword(&["max"]) {
            return Err(perr(
                toks.line(),
                "maximization objectives are not supported".into(),
            ));
        }
        return Err(perr(toks.line(), "expected 'Minimize'".into()));
    }

    // name registry in first-seen order (overridden by Bounds order below)
    let mut order: Vec<String> = Vec::new();
    let mut register = |order: &mut Vec<String>, name: &str| {
        if !order.contains(&name.to_string()) {
            order.push(name.to_string());
        }
    };

    // expr := [name ':'] term* ; returns (label, terms by name)
    fn parse_expr(
        toks: &mut Tokens,
        order: &mut Vec<String>,
        register: &mut impl FnMut(&mut Vec<String>, &str),
    ) -> Result<(Option<String>, Vec<(String, f64)>), LpFileError> {
        let mut label = None;
        if let (Some((_, Tok::Name(_))), Some((_, Tok::Colon))) =
            (toks.toks.get(toks.pos), toks.toks.get(toks.pos + 1))
        {
            if let Some((_, Tok::Name(n))) = toks.next() {
                label = Some(n);
            }
            toks.next(); // colon
        }
        let mut terms: Vec<(String, f64)> = Vec::new();
        loop {
            if toks.at_section_boundary() {
                break;
            }
            // a sense token ends the expression (constraint context)
            match toks.peek() {
                Some((_, Tok::Le)) | Some((_, Tok::Ge)) | Some((_, Tok::Eq)) | None => break,
                _ => {}
            }
            // next constraint starts: name ':'
            if let (Some((_, Tok::Name(_))), Some((_, Tok::Colon))) =
                (toks.toks.get(toks.pos), toks.toks.get(toks.pos + 1))
            {
                break;
            }
            let mut sign = 1.0;
            loop {
                match toks.peek() {
                    Some((_, Tok::Plus)) => {
                        toks.next();
                    }
                    Some((_, Tok::Minus)) => {
                        sign = -sign;
                        toks.next();
                    }
                    _ => break,
                }
            }
            let mut coeff = sign;
            let mut have_num = false;
            if let Some((_, Tok::Num(x))) = toks.peek() {
                coeff = sign * *x;
                have_num = true;
                toks.next();
            }
            match toks.peek() {
                Some((_, Tok::Name(_))) if !toks.at_section_boundary() => {
                    if let Some((_, Tok::Name(name))) = toks.next() {
                        register(order, &name);
                        terms.push((name, coeff));
                    }
                }
                _ if have_num && coeff == 0.0 => {
                    // bare literal zero used for empty expressions
                }
                Some((line, tok)) => {
                    return Err(LpFileError::Parse {
                        line: *line,
                        message: format!("expected variable name, found {}", tok.describe()),
                    })
                }
                None => {
                    return Err(LpFileError::Parse {
                        line: toks.line(),
                        message: "unexpected end of file in expression".into(),
                    })
                }
            }
        }
        Ok((label, terms))
    }

    let (_, objective_terms) = parse_expr(&mut toks, &mut order, &mut register)?;

    if !(toks.eat_keyword(&["Subject", "To"])
        || toks.eat_keyword(&["such", "that"])
        || toks.eat_keyword(&["st"])
        || toks.eat_keyword(&["s.t."]))
    {
        return Err(perr(toks.line(), "expected 'Subject To'".into()));
    }

    struct RawCon {
        line: usize,
        name: Option<String>,
        terms: Vec<(String, f64)>,
        sense: Sense,
        rhs: f64,
    }
    let mut raw_cons: Vec<RawCon> = Vec::new();
    while !toks.at_section_boundary() && toks.peek().is_some() {
        let line = toks.line();
        let (label, terms) = parse_expr(&mut toks, &mut order, &mut register)?;
        let sense = match toks.next() {
            Some((_, Tok::Le)) => Sense::Le,
            Some((_, Tok::Ge)) => Sense::Ge,
            Some((_, Tok::Eq)) => Sense::Eq,
            Some((l, tok)) => {
                return Err(perr(
                    l,
                    format!("expected constraint sense (<=, >=, =), found {}", tok.describe()),
                ))
            }
            None => return Err(perr(line, "constraint missing sense and right-hand side".into())),
        };
        let mut sign = 1.0;
        while let Some((_, Tok::Minus)) | Some((_, Tok::Plus)) = toks.peek() {
            if let Some((_, Tok::Minus)) = toks.peek() {
                sign = -sign;
            }
            toks.next();
        }
        let rhs = match toks.next() {
            Some((_, Tok::Num(x))) => sign * x,
            Some((l, tok)) => {
                return Err(perr(
                    l,
                    format!("expected right-hand side number, found {}", tok.describe()),
                ))
            }
            None => return Err(perr(line, "constraint missing right-hand side".into())),
        };
        raw_cons.push(RawCon {
            line,
            name: label,
            terms,
            sense,
            rhs,
        });
    }

    use std::collections::HashMap;
    let mut vars: HashMap<String, RawVar> = HashMap::new();
    for name in &order {
        vars.entry(name.clone()).or_default();
    }

    // Bounds section rebuilds the canonical variable order.
    let mut bounds_order: Vec<String> = Vec::new();
    if toks.eat_keyword(&["Bounds"]) {
        loop {
            if toks.at_section_boundary() || toks.peek().is_none() {
                break;
            }
            let line = toks.line();
            // forms: NUM <= NAME [<= NUM] | -inf <= NAME ... | NAME <= NUM |
            //        NAME >= NUM | NAME = NUM | NAME free
            let mut lead_num: Option<f64> = None;
            let mut sign = 1.0;
            while let Some((_, Tok::Minus)) = toks.peek() {
                sign = -sign;
                toks.next();
            }
            if let Some((_, Tok::Num(x))) = toks.peek() {
                lead_num = Some(sign * *x);
                toks.next();
            } else if let Some((_, Tok::Name(n))) = toks.peek() {
                if n.eq_ignore_ascii_case("inf") || n.eq_ignore_ascii_case("infinity") {
                    lead_num = Some(sign * f64::INFINITY);
                    toks.next();
                }
            }
            if let Some(lo) = lead_num {
                match toks.next() {
                    Some((_, Tok::Le)) => {}
                    Some((l, tok)) => {
                        return Err(perr(l, format!("expected '<=' in bound, found {}", tok.describe())))
                    }
                    None => return Err(perr(line, "truncated bound".into())),
                }
                let name = match toks.next() {
                    Some((_, Tok::Name(n))) => n,
                    Some((l, tok)) => {
                        return Err(perr(l, format!("expected variable in bound, found {}", tok.describe())))
                    }
                    None => return Err(perr(line, "truncated bound".into())),
                };
                if !bounds_order.contains(&name) {
                    bounds_order.push(name.clone());
                }
                let entry = vars.entry(name).or_default();
                entry.lower = Some(lo);
                if let Some((_, Tok::Le)) = toks.peek() {
                    toks.next();
                    let mut s2 = 1.0;
                    while let Some((_, Tok::Minus)) = toks.peek() {
                        s2 = -s2;
                        toks.next();
                    }
                    let up = match toks.next() {
                        Some((_, Tok::Num(x))) => s2 * x,
                        Some((_, Tok::Name(n)))
                            if n.eq_ignore_ascii_case("inf")
                                || n.eq_ignore_ascii_case("infinity") =>
                        {
                            s2 * f64::INFINITY
                        }
                        Some((l, tok)) => {
                            return Err(perr(
                                l,
                                format!("expected upper bound, found {}", tok.describe()),
                            ))
                        }
                        None => return Err(perr(line, "truncated bound".into())),
                    };
                    entry.upper = Some(up);
                }
                continue;
            }
            let name = match toks.next() {
                Some((_, Tok::Name(n))) => n,
                Some((l, tok)) => {
                    return Err(perr(l, format!("unexpected {} in Bounds", tok.describe())))
                }
                None => break,
            };
            if !bounds_order.contains(&name) {
                bounds_order.push(name.clone());
            }
            match toks.peek().cloned() {
                Some((_, Tok::Name(kw))) if kw.eq_ignore_ascii_case("free") => {
                    toks.next();
                    vars.entry(name).or_default().free = true;
                }
                Some((_, Tok::Le)) => {
                    toks.next();
                    let mut s2 = 1.0;
                    while let Some((_, Tok::Minus)) = toks.peek() {
                        s2 = -s2;
                        toks.next();
                    }
                    let up = match toks.next() {
                        Some((_, Tok::Num(x))) => s2 * x,
                        Some((_, Tok::Name(n))) if n.eq_ignore_ascii_case("inf") => f64::INFINITY * s2,
                        Some((l, tok)) => {
                            return Err(perr(l, format!("expected bound value, found {}", tok.describe())))
                        }
                        None => return Err(perr(line, "truncated bound".into())),
                    };
                    vars.entry(name).or_default().upper = Some(up);
                }
                Some((_, Tok::Ge)) => {
                    toks.next();
                    let mut s2 = 1.0;
                    while let Some((_, Tok::Minus)) = toks.peek() {
                        s2 = -s2;
                        toks.next();
                    }
                    let lo = match toks.next() {
                        Some((_, Tok::Num(x))) => s2 * x,
                        Some((_, Tok::Name(n))) if n.eq_ignore_ascii_case("inf") => f64::INFINITY * s2,
                        Some((l, tok)) => {
                            return Err(perr(l, format!("expected bound value, found {}", tok.describe())))
                        }
                        None => return Err(perr(line, "truncated bound".into())),
                    };
                    vars.entry(name).or_default().lower = Some(lo);
                }
                Some((_, Tok::Eq)) => {
                    toks.next();
                    let mut s2 = 1.0;
                    while let Some((_, Tok::Minus)) = toks.peek() {
                        s2 = -s2;
                        toks.next();
                    }
                    let v = match toks.next() {
                        Some((_, Tok::Num(x))) => s2 * x,
                        Some((l, tok)) => {
                            return Err(perr(l, format!("expected bound value, found {}", tok.describe())))
                        }
                        None => return Err(perr(line, "truncated bound".into())),
                    };
                    vars.entry(name).or_default().fixed = Some(v);
                }
                Some((l, tok)) => {
                    return Err(perr(
                        l,
                        format!("expected bound relation after variable, found {}", tok.describe()),
                    ))
                }
                None => return Err(perr(line, "truncated bound".into())),
            }
        }
    }

    while let Some((_, Tok::Name(section))) = toks.peek().cloned() {
        let lower_sec = section.to_ascii_lowercase();
        match lower_sec.as_str() {
            "binary" | "binaries" => {
                toks.next();
                while let Some((_, Tok::Name(n))) = toks.peek().cloned() {
                    if toks.at_section_boundary() {
                        break;
                    }
                    toks.next();
                    register(&mut order, &n);
                    vars.entry(n).or_default().kind = VarKind::Binary;
                }
            }
            "general" | "generals" => {
                toks.next();
                while let Some((_, Tok::Name(n))) = toks.peek().cloned() {
                    if toks.at_section_boundary() {
                        break;
                    }
                    toks.next();
                    register(&mut order, &n);
                    vars.entry(n).or_default().kind = VarKind::Integer;
                }
            }
            "end" => {
                toks.next();
                break;
            }
            _ => {
                return Err(perr(
                    toks.line(),
                    format!("unexpected section keyword {section:?}"),
                ))
            }
        }
    }
    if let Some((line, tok)) = toks.peek() {
        return Err(perr(*line, format!("trailing content: {}", tok.describe())));
    }

    // Final variable order: Bounds order first, then any remaining
    // first-use order (covers files without a complete Bounds section).
    let mut final_order = bounds_order;
    for name in order {
        if !final_order.contains(&name) {
            final_order.push(name);
        }
    }

    let mut problem = MilpProblem::new(toks.problem_name.clone().unwrap_or_default());
    let mut id_of = std::collections::HashMap::new();
    for name in &final_order {
        let raw = vars.get(name).expect("registered variable");
        let (lower, upper) = if raw.free {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if let Some(v) = raw.fixed {
            (v, v)
        } else {
            let default_lower = match raw.kind {
                VarKind::Binary => 0.0,
                _ => 0.0,
            };
            let default_upper = match raw.kind {
                VarKind::Binary => 1.0,
                _ => f64::INFINITY,
            };
            (
                raw.lower.unwrap_or(default_lower),
                raw.upper.unwrap_or(default_upper),
            )
        };
        let id = problem
            .add_variable(name.clone(), raw.kind, lower, upper)
            .map_err(|e| LpFileError::Model {
                line: 0,
                message: e.to_string(),
            })?;
        id_of.insert(name.clone(), id);
    }
    let obj: Vec<(usize, f64)> = objective_terms
        .iter()
        .map(|(n, c)| (id_of[n], *c))
        .collect();
    problem.set_objective(obj).map_err(|e| LpFileError::Model {
        line: 0,
        message: e.to_string(),
    })?;
    for (i, rc) in raw_cons.into_iter().enumerate() {
        let name = rc.name.unwrap_or_else(|| format!("c{i}"));
        let terms: Vec<(usize, f64)> = rc.terms.iter().map(|(n, c)| (id_of[n], *c)).collect();
        problem
            .add_constraint(name, terms, rc.sense, rc.rhs)
            .map_err(|e| LpFileError::Model {
                line: rc.line,
                message: e.to_string(),
            })?;
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpProblem;

    fn round_trip(p: &MilpProblem) -> MilpProblem {
        lp_from_string(&lp_to_string(p)).unwrap()
    }

    #[test]
    fn single_constraint_round_trips() {
        let mut p = MilpProblem::new("tiny");
        let x = p
            .add_variable("x", VarKind::Continuous, 0.0, f64::INFINITY)
            .unwrap();
        p.add_constraint("lb", vec![(x, 1.0)], Sense::Ge, 3.0)
            .unwrap();
        let q = round_trip(&p);
        assert_eq!(p, q);
    }

    #[test]
    fn bounds_section_lists_every_variable() {
        let mut p = MilpProblem::new("t");
        for i in 0..15 {
            p.add_variable(format!("x{i}"), VarKind::Continuous, 0.0, i as f64 + 1.0)
                .unwrap();
        }
        let text = lp_to_string(&p);
        let bounds_lines = text
            .split("Bounds\n")
            .nth(1)
            .unwrap()
            .lines()
            .take_while(|l| l.starts_with(' '))
            .count();
        assert_eq!(bounds_lines, 15);
    }

    #[test]
    fn kinds_bounds_and_coefficients_survive() {
        let mut p = MilpProblem::new("mixed");
        let c = p
            .add_variable("c", VarKind::Continuous, 0.0, 612.25)
            .unwrap();
        let v = p.add_variable("V_l0_d0", VarKind::Binary, 0.0, 1.0).unwrap();
        let n = p.add_variable("n_x", VarKind::Integer, 0.0, 7.0).unwrap();
        let f = p
            .add_variable("f", VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        let g = p.add_variable("g", VarKind::Continuous, 2.5, 2.5).unwrap();
        p.add_constraint(
            "roof_d0",
            vec![(c, 1.0), (v, -0.12345678901234567), (n, 3.0)],
            Sense::Ge,
            1e-7,
        )
        .unwrap();
        p.add_constraint("mix_d1", vec![(f, -2.0), (g, 1.0)], Sense::Eq, -4.25)
            .unwrap();
        p.set_objective(vec![(c, 1.0), (n, 0.5)]).unwrap();
        let q = round_trip(&p);
        assert_eq!(p, q);
    }

    #[test]
    fn empty_objective_round_trips() {
        let mut p = MilpProblem::new("noobj");
        let x = p.add_variable("x", VarKind::Continuous, 0.0, 9.0).unwrap();
        p.add_constraint("only", vec![(x, 1.0)], Sense::Ge, 3.0)
            .unwrap();
        let q = round_trip(&p);
        assert_eq!(p, q);
    }

    #[test]
    fn malformed_sense_names_the_line() {
        let text = "Minimize\n obj: 1 x\nSubject To\n r: 1 x ! 3\nBounds\n x >= 0\nEnd\n";
        let err = lp_from_string(text).unwrap_err();
        match err {
            LpFileError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn exponent_form_accepted_on_read() {
        let text =
            "Minimize\n obj: 1e-2 x\nSubject To\n r: 2.5E+1 x >= 1e1\nBounds\n x >= 0\nEnd\n";
        let p = lp_from_string(text).unwrap();
        assert_eq!(p.objective(), &[(0, 0.01)]);
        assert_eq!(p.constraints()[0].terms, vec![(0, 25.0)]);
        assert_eq!(p.constraints()[0].rhs, 10.0);
    }
}
