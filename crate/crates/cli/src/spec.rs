//! Line-oriented specification files.
//!
//! ```text
//! # comment
//! [chart qv]
//! coords = q, v
//!
//! [field gamma]
//! chart = qv
//! components = v, -q
//!
//! [tasks]
//! sode osc
//! ```
//!
//! Expression lists are split on top-level commas.

use std::fmt;
use std::str::FromStr;

use geobundle::symexpr::{parse, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Chart,
    Opaque,
    Expr,
    Field,
    Form,
    Tensor,
    Map,
    Tangent,
    Cotangent,
    Vertical,
    Sode,
    BuildS,
    Legendre,
    Foul,
    Hamiltonian,
    Tasks,
}

impl Kind {
    pub const ALL: [Kind; 16] = [
        Kind::Chart,
        Kind::Opaque,
        Kind::Expr,
        Kind::Field,
        Kind::Form,
        Kind::Tensor,
        Kind::Map,
        Kind::Tangent,
        Kind::Cotangent,
        Kind::Vertical,
        Kind::Sode,
        Kind::BuildS,
        Kind::Legendre,
        Kind::Foul,
        Kind::Hamiltonian,
        Kind::Tasks,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Chart => "chart",
            Kind::Opaque => "opaque",
            Kind::Expr => "expr",
            Kind::Field => "field",
            Kind::Form => "form",
            Kind::Tensor => "tensor",
            Kind::Map => "map",
            Kind::Tangent => "tangent",
            Kind::Cotangent => "cotangent",
            Kind::Vertical => "vertical",
            Kind::Sode => "sode",
            Kind::BuildS => "build-s",
            Kind::Legendre => "legendre",
            Kind::Foul => "foul",
            Kind::Hamiltonian => "hamiltonian",
            Kind::Tasks => "tasks",
        }
    }

    /// Sections that run as tasks.
    pub fn is_task(self) -> bool {
        matches!(
            self,
            Kind::Tangent
                | Kind::Cotangent
                | Kind::Vertical
                | Kind::Sode
                | Kind::BuildS
                | Kind::Legendre
                | Kind::Foul
                | Kind::Hamiltonian
        )
    }

    fn schema(self) -> &'static [(&'static str, Shape, Need)] {
        use Need::*;
        use Shape::*;
        match self {
            Kind::Chart => &[("coords", Words, Required)],
            Kind::Opaque => &[("kind", Word, Required), ("base", Word, Optional)],
            Kind::Expr => &[("value", Exprs, Required)],
            Kind::Field | Kind::Form => &[("chart", Word, Required), ("components", Exprs, Required)],
            Kind::Tensor => &[("chart", Word, Required), ("row", Exprs, Repeated)],
            Kind::Map => &[
                ("source", Word, Required),
                ("target", Word, Required),
                ("forward", Exprs, Required),
                ("inverse", Exprs, Optional),
            ],
            Kind::Tangent => &[
                ("chart", Word, Required),
                ("base", Exprs, Required),
                ("fiber", Exprs, Optional),
                ("delta", Word, Optional),
                ("s", Word, Optional),
                ("sode", Word, Optional),
            ],
            Kind::Cotangent => &[
                ("chart", Word, Required),
                ("theta", Word, Required),
                ("base", Exprs, Required),
                ("fiber", Exprs, Optional),
                ("delta", Word, Optional),
            ],
            Kind::Vertical => &[("chart", Word, Required), ("base", Exprs, Required), ("expect", Words, Optional)],
            Kind::Sode => &[("tangent", Word, Required), ("field", Word, Required)],
            Kind::BuildS => &[
                ("chart", Word, Required),
                ("sode", Word, Required),
                ("base", Exprs, Required),
                ("expect", Word, Optional),
            ],
            Kind::Legendre => &[
                ("tangent", Word, Required),
                ("lagrangian", Exprs, Optional),
                ("metric", Exprs, Repeated),
                ("momenta", Words, Optional),
                ("gauge", Exprs, Optional),
            ],
            Kind::Foul => &[("first", Word, Required), ("second", Word, Required), ("expect_preserves", Word, Optional)],
            Kind::Hamiltonian => &[
                ("theta", Word, Required),
                ("h", Exprs, Required),
                ("map", Word, Optional),
                ("expect", Word, Optional),
            ],
            Kind::Tasks => &[],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown section kind `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Word,
    Words,
    Exprs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Need {
    Required,
    Optional,
    Repeated,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Word(String),
    Words(Vec<String>),
    Exprs(Vec<Expr>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Word(w) => f.write_str(w),
            Value::Words(ws) => f.write_str(&ws.join(", ")),
            Value::Exprs(es) => {
                let parts: Vec<String> = es.iter().map(Expr::to_string).collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub kind: Kind,
    pub name: String,
    pub entries: Vec<(String, Value)>,
    /// `(kind, name)` pairs; only for `[tasks]`.
    pub tasks: Vec<(Kind, String)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Value> + 'a {
        self.entries.iter().filter(move |(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn word(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Word(w)) => Some(w),
            _ => None,
        }
    }

    pub fn words(&self, key: &str) -> Option<&[String]> {
        match self.get(key) {
            Some(Value::Words(w)) => Some(w),
            _ => None,
        }
    }

    pub fn exprs(&self, key: &str) -> Option<&[Expr]> {
        match self.get(key) {
            Some(Value::Exprs(e)) => Some(e),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SpecFile {
    pub sections: Vec<Section>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

fn err(line: usize, message: impl Into<String>) -> SpecError {
    SpecError { line, message: message.into() }
}

fn is_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Splits on commas outside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn parse_value(shape: Shape, raw: &str, line: usize) -> Result<Value, SpecError> {
    match shape {
        Shape::Word => {
            if is_word(raw) {
                Ok(Value::Word(raw.to_string()))
            } else {
                Err(err(line, format!("expected a name, found `{raw}`")))
            }
        }
        Shape::Words => {
            let ws: Vec<String> = split_top(raw).into_iter().map(str::to_string).collect();
            if let Some(bad) = ws.iter().find(|w| !is_word(w)) {
                return Err(err(line, format!("expected a name, found `{bad}`")));
            }
            Ok(Value::Words(ws))
        }
        Shape::Exprs => split_top(raw)
            .into_iter()
            .map(|s| parse(s).map_err(|e| err(line, format!("{e} in `{s}`"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Value::Exprs),
    }
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<SpecFile, SpecError> {
        let mut sections: Vec<Section> = Vec::new();
        let mut header_lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(inner) = t.strip_prefix('[') {
                let inner = inner.strip_suffix(']').ok_or_else(|| err(line, "unterminated section header"))?;
                let mut parts = inner.split_whitespace();
                let kind: Kind = parts.next().unwrap_or("").parse().map_err(|m: String| err(line, m))?;
                let name = parts.next().unwrap_or("").to_string();
                if parts.next().is_some() {
                    return Err(err(line, "section header takes a kind and a name"));
                }
                if kind == Kind::Tasks {
                    if !name.is_empty() {
                        return Err(err(line, "[tasks] takes no name"));
                    }
                } else if !is_word(&name) {
                    return Err(err(line, format!("[{kind}] needs a name")));
                }
                if sections.iter().any(|s| s.kind == kind && s.name == name) {
                    return Err(err(line, format!("duplicate section [{kind} {name}]")));
                }
                sections.push(Section { kind, name, entries: Vec::new(), tasks: Vec::new() });
                header_lines.push(line);
                continue;
            }
            let sec = sections.last_mut().ok_or_else(|| err(line, "content before the first section"))?;
            if sec.kind == Kind::Tasks {
                let mut parts = t.split_whitespace();
                let (Some(k), Some(n), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(err(line, "task lines read `<kind> <name>`"));
                };
                let kind: Kind = k.parse().map_err(|m: String| err(line, m))?;
                if !kind.is_task() {
                    return Err(err(line, format!("`{kind}` is not a task kind")));
                }
                sec.tasks.push((kind, n.to_string()));
                continue;
            }
            let (key, raw_value) = t.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
            let (key, raw_value) = (key.trim(), raw_value.trim());
            let Some(&(_, shape, need)) = sec.kind.schema().iter().find(|(k, _, _)| *k == key) else {
                return Err(err(line, format!("unknown key `{key}` in [{}]", sec.kind)));
            };
            if need != Need::Repeated && sec.get(key).is_some() {
                return Err(err(line, format!("duplicate key `{key}`")));
            }
            let value = parse_value(shape, raw_value, line)?;
            sec.entries.push((key.to_string(), value));
        }
        for (sec, &line) in sections.iter().zip(&header_lines) {
            for &(key, _, need) in sec.kind.schema() {
                if need == Need::Required && sec.get(key).is_none() {
                    return Err(err(line, format!("[{} {}] is missing `{key}`", sec.kind, sec.name)));
                }
            }
        }
        Ok(SpecFile { sections })
    }

    pub fn section(&self, kind: Kind, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.kind == kind && s.name == name)
    }

    /// Task order: the `[tasks]` list when present, else every task section
    /// in file order.
    pub fn tasks(&self) -> Vec<(Kind, String)> {
        match self.sections.iter().find(|s| s.kind == Kind::Tasks) {
            Some(t) => t.tasks.clone(),
            None => self.sections.iter().filter(|s| s.kind.is_task()).map(|s| (s.kind, s.name.clone())).collect(),
        }
    }
}

impl fmt::Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if s.kind == Kind::Tasks {
                writeln!(f, "[tasks]")?;
                for (k, n) in &s.tasks {
                    writeln!(f, "{k} {n}")?;
                }
            } else {
                writeln!(f, "[{} {}]", s.kind, s.name)?;
                for (k, v) in &s.entries {
                    writeln!(f, "{k} = {v}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# oscillator
[chart qv]
coords = q, v

[field gamma]
chart = qv
components = v, -q

[tensor s]
chart = qv
row = 0, 0
row = 1, 0

[tangent b]
chart = qv
base = q
fiber = v
delta = d
s = s

[tasks]
tangent b
";

    #[test]
    fn parses_sections_in_order() {
        let spec = SpecFile::parse(SAMPLE).unwrap();
        assert_eq!(spec.sections.len(), 5);
        assert_eq!(spec.sections[0].words("coords").unwrap(), &["q", "v"]);
        assert_eq!(spec.section(Kind::Tensor, "s").unwrap().all("row").count(), 2);
        assert_eq!(spec.tasks(), vec![(Kind::Tangent, "b".to_string())]);
    }

    #[test]
    fn round_trips() {
        let spec = SpecFile::parse(SAMPLE).unwrap();
        let again = SpecFile::parse(&spec.to_string()).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn splits_on_top_level_commas_only() {
        assert_eq!(split_top("f(x), g(1+x)*y"), vec!["f(x)", "g(1+x)*y"]);
    }

    #[test]
    fn reports_line_numbers() {
        let e = SpecFile::parse("[chart c]\ncoords = a\n[field x]\nchart = c\ncomponents = 1+\n").unwrap_err();
        assert_eq!(e.line, 5);
        let e = SpecFile::parse("[chart c]\n").unwrap_err();
        assert!(e.message.contains("coords"));
        assert!(SpecFile::parse("[widget w]\n").is_err());
        assert!(SpecFile::parse("coords = a\n").is_err());
        assert!(SpecFile::parse("[chart c]\ncoords = a\ncoords = b\n").is_err());
        assert!(SpecFile::parse("[tasks]\nchart c\n").is_err());
    }

    #[test]
    fn default_task_order_is_file_order() {
        let spec = SpecFile::parse("[sode x]\ntangent = t\nfield = f\n[vertical v]\nchart = c\nbase = q\n").unwrap();
        assert_eq!(spec.tasks(), vec![(Kind::Sode, "x".into()), (Kind::Vertical, "v".into())]);
    }
}
