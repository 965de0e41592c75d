//! Name resolution for a parsed [`SpecFile`].

use std::collections::BTreeMap;
use std::sync::Arc;

use geobundle::bundle::{build_s_from_sode, BasicSubalgebra, PartialLinearStructure, TangentStructure};
use geobundle::geom::{apply_tensor, lie_derivative_function};
use geobundle::symexpr::{RadialInverse, TestFamily, UnaryFunction};
use geobundle::{Chart, CoordinateMap, Expr, NumericContext, OneForm, Tensor11, VectorField};

use crate::spec::{Kind, Section, SpecError, SpecFile};

fn fail(sec: &Section, message: impl std::fmt::Display) -> SpecError {
    let label = if sec.kind == Kind::Tasks { "[tasks]".to_string() } else { format!("[{} {}]", sec.kind, sec.name) };
    SpecError { line: 0, message: format!("{label}: {message}") }
}

/// Resolved charts, tensors and maps of one spec file.
pub struct Model {
    pub spec: SpecFile,
    bindings: BTreeMap<String, Expr>,
    charts: BTreeMap<String, Chart>,
    fields: BTreeMap<String, VectorField>,
    forms: BTreeMap<String, OneForm>,
    tensors: BTreeMap<String, Tensor11>,
    maps: BTreeMap<String, CoordinateMap>,
    opaques: Vec<(String, String, Option<String>)>,
}

impl Model {
    pub fn new(spec: SpecFile) -> Result<Model, SpecError> {
        let mut m = Model {
            spec: SpecFile::default(),
            bindings: BTreeMap::new(),
            charts: BTreeMap::new(),
            fields: BTreeMap::new(),
            forms: BTreeMap::new(),
            tensors: BTreeMap::new(),
            maps: BTreeMap::new(),
            opaques: Vec::new(),
        };
        for sec in &spec.sections {
            m.declare(sec)?;
        }
        m.spec = spec;
        for sec in &m.spec.sections {
            m.check_references(sec)?;
        }
        if let Some(t) = m.spec.sections.iter().find(|s| s.kind == Kind::Tasks) {
            for (k, n) in &t.tasks {
                if m.spec.section(*k, n).is_none() {
                    return Err(fail(t, format!("no section [{k} {n}]")));
                }
            }
        }
        Ok(m)
    }

    fn subst(&self, sec: &Section, e: &Expr) -> Result<Expr, SpecError> {
        if self.bindings.is_empty() {
            return Ok(e.clone());
        }
        e.substitute(&self.bindings).map_err(|err| fail(sec, err))
    }

    /// Expressions under `key`, with named expressions substituted.
    pub fn exprs(&self, sec: &Section, key: &str) -> Result<Vec<Expr>, SpecError> {
        sec.exprs(key).unwrap_or(&[]).iter().map(|e| self.subst(sec, e)).collect()
    }

    pub fn single(&self, sec: &Section, key: &str) -> Result<Option<Expr>, SpecError> {
        let es = self.exprs(sec, key)?;
        match es.len() {
            0 if sec.get(key).is_none() => Ok(None),
            1 => Ok(es.into_iter().next()),
            n => Err(fail(sec, format!("`{key}` takes one expression, found {n}"))),
        }
    }

    fn chart_of(&self, sec: &Section, key: &str) -> Result<Chart, SpecError> {
        let name = sec.word(key).unwrap_or("");
        self.charts.get(name).cloned().ok_or_else(|| fail(sec, format!("unknown chart `{name}`")))
    }

    fn declare(&mut self, sec: &Section) -> Result<(), SpecError> {
        let name = sec.name.clone();
        match sec.kind {
            Kind::Chart => {
                let c = Chart::new(&name, sec.words("coords").unwrap_or(&[])).map_err(|e| fail(sec, e))?;
                if let Some(b) = c.coords().iter().find(|x| self.bindings.contains_key(*x)) {
                    return Err(fail(sec, format!("coordinate `{b}` shadows a named expression")));
                }
                self.charts.insert(name, c);
            }
            Kind::Expr => {
                if self.charts.values().any(|c| c.index_of(&name).is_some()) {
                    return Err(fail(sec, "name shadows a chart coordinate"));
                }
                let v = self.single(sec, "value")?.expect("required");
                self.bindings.insert(name, v);
            }
            Kind::Opaque => {
                let kind = sec.word("kind").unwrap_or("");
                if !matches!(kind, "test-family" | "radial-inverse") {
                    return Err(fail(sec, format!("unknown opaque kind `{kind}` (test-family, radial-inverse)")));
                }
                if kind == "test-family" && sec.get("base").is_some() {
                    return Err(fail(sec, "`base` applies to radial-inverse only"));
                }
                self.opaques.push((name, kind.to_string(), sec.word("base").map(str::to_string)));
            }
            Kind::Field => {
                let c = self.chart_of(sec, "chart")?;
                let f = VectorField::new(&c, self.exprs(sec, "components")?).map_err(|e| fail(sec, e))?;
                self.fields.insert(name, f);
            }
            Kind::Form => {
                let c = self.chart_of(sec, "chart")?;
                let f = OneForm::new(&c, self.exprs(sec, "components")?).map_err(|e| fail(sec, e))?;
                self.forms.insert(name, f);
            }
            Kind::Tensor => {
                let c = self.chart_of(sec, "chart")?;
                let rows = sec
                    .all("row")
                    .map(|v| match v {
                        crate::spec::Value::Exprs(es) => es.iter().map(|e| self.subst(sec, e)).collect(),
                        _ => unreachable!("schema"),
                    })
                    .collect::<Result<Vec<Vec<Expr>>, _>>()?;
                let t = Tensor11::new(&c, rows).map_err(|e| fail(sec, e))?;
                self.tensors.insert(name, t);
            }
            Kind::Map => {
                let src = self.chart_of(sec, "source")?;
                let tgt = self.chart_of(sec, "target")?;
                let inverse = sec.get("inverse").map(|_| self.exprs(sec, "inverse")).transpose()?;
                let m = CoordinateMap::new(&name, &src, &tgt, self.exprs(sec, "forward")?, inverse)
                    .map_err(|e| fail(sec, e))?;
                self.maps.insert(name, m);
            }
            _ => {}
        }
        Ok(())
    }

    fn need(&self, sec: &Section, kind: Kind, key: &str) -> Result<(), SpecError> {
        let Some(name) = sec.word(key) else { return Ok(()) };
        let ok = match kind {
            Kind::Field => self.fields.contains_key(name),
            Kind::Form => self.forms.contains_key(name),
            Kind::Tensor => self.tensors.contains_key(name),
            Kind::Map => self.maps.contains_key(name),
            Kind::Chart => self.charts.contains_key(name),
            other => self.spec_has(other, name),
        };
        if ok {
            Ok(())
        } else {
            Err(fail(sec, format!("unknown {kind} `{name}`")))
        }
    }

    fn spec_has(&self, kind: Kind, name: &str) -> bool {
        self.spec.section(kind, name).is_some()
    }

    fn check_references(&self, sec: &Section) -> Result<(), SpecError> {
        match sec.kind {
            Kind::Opaque => {
                if let Some(b) = sec.word("base") {
                    if !self.opaques.iter().any(|(n, k, _)| n == b && k == "test-family") {
                        return Err(fail(sec, format!("base `{b}` must be a declared test-family opaque")));
                    }
                }
            }
            Kind::Tangent => {
                self.need(sec, Kind::Chart, "chart")?;
                self.need(sec, Kind::Field, "delta")?;
                self.need(sec, Kind::Tensor, "s")?;
                self.need(sec, Kind::Field, "sode")?;
                let has_sode = sec.get("sode").is_some();
                let explicit = sec.get("delta").is_some() && sec.get("s").is_some() && sec.get("fiber").is_some();
                if !has_sode && !explicit {
                    return Err(fail(sec, "give either `sode` or all of `delta`, `s` and `fiber`"));
                }
            }
            Kind::Cotangent => {
                self.need(sec, Kind::Chart, "chart")?;
                self.need(sec, Kind::Form, "theta")?;
                self.need(sec, Kind::Field, "delta")?;
            }
            Kind::Vertical => {
                self.need(sec, Kind::Chart, "chart")?;
                for f in sec.words("expect").unwrap_or(&[]) {
                    if !self.fields.contains_key(f) {
                        return Err(fail(sec, format!("unknown field `{f}`")));
                    }
                }
            }
            Kind::Sode => {
                self.need(sec, Kind::Tangent, "tangent")?;
                self.need(sec, Kind::Field, "field")?;
            }
            Kind::BuildS => {
                self.need(sec, Kind::Chart, "chart")?;
                self.need(sec, Kind::Field, "sode")?;
                self.need(sec, Kind::Tensor, "expect")?;
            }
            Kind::Legendre => {
                self.need(sec, Kind::Tangent, "tangent")?;
                let l = sec.get("lagrangian").is_some();
                let g = sec.get("metric").is_some();
                if l == g {
                    return Err(fail(sec, "give exactly one of `lagrangian` and `metric`"));
                }
            }
            Kind::Foul => {
                self.need(sec, Kind::Legendre, "first")?;
                self.need(sec, Kind::Legendre, "second")?;
                if let Some(w) = sec.word("expect_preserves") {
                    if w != "true" && w != "false" {
                        return Err(fail(sec, "`expect_preserves` is true or false"));
                    }
                }
            }
            Kind::Hamiltonian => {
                self.need(sec, Kind::Form, "theta")?;
                self.need(sec, Kind::Map, "map")?;
                self.need(sec, Kind::Field, "expect")?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn field(&self, name: &str) -> &VectorField {
        &self.fields[name]
    }

    pub fn form(&self, name: &str) -> &OneForm {
        &self.forms[name]
    }

    pub fn tensor(&self, name: &str) -> &Tensor11 {
        &self.tensors[name]
    }

    pub fn map(&self, name: &str) -> &CoordinateMap {
        &self.maps[name]
    }

    pub fn chart(&self, name: &str) -> &Chart {
        &self.charts[name]
    }

    pub fn section(&self, kind: Kind, name: &str) -> &Section {
        self.spec.section(kind, name).expect("resolved at load")
    }

    /// `ctx` with the declared opaque realizations.
    pub fn context(&self, ctx: &NumericContext<f64>) -> NumericContext<f64> {
        let mut out = ctx.clone();
        for (name, kind, base) in &self.opaques {
            let f: Arc<dyn UnaryFunction<f64>> = match kind.as_str() {
                "radial-inverse" => {
                    let b: Arc<dyn UnaryFunction<f64>> = match base {
                        Some(b) => out.opaque(b),
                        None => Arc::new(TestFamily),
                    };
                    Arc::new(RadialInverse::new(b))
                }
                _ => Arc::new(TestFamily),
            };
            out = out.with_opaque(name, f);
        }
        out
    }

    /// The tangent structure of a `[tangent]` section.
    pub fn tangent(&self, name: &str, ctx: &NumericContext<f64>) -> geobundle::Result<TangentStructure> {
        let sec = self.section(Kind::Tangent, name);
        let spec_err = |e: SpecError| geobundle::Error::Precondition(e.message);
        let chart = self.chart(sec.word("chart").expect("required")).clone();
        let base = self.exprs(sec, "base").map_err(spec_err)?;
        let fiber = sec.get("fiber").map(|_| self.exprs(sec, "fiber")).transpose().map_err(spec_err)?;
        match sec.word("sode") {
            Some(g) => {
                let gamma = self.field(g);
                let a = BasicSubalgebra::new(&chart, base.clone(), ctx)?;
                let s = match sec.word("s") {
                    Some(s) => self.tensor(s).clone(),
                    None => build_s_from_sode(gamma, &a, ctx)?,
                };
                let delta = match sec.word("delta") {
                    Some(d) => self.field(d).clone(),
                    None => apply_tensor(&s, gamma)?,
                };
                let fiber = fiber.unwrap_or_else(|| base.iter().map(|f| lie_derivative_function(gamma, f)).collect());
                TangentStructure::new(PartialLinearStructure::new(delta, base, fiber), s)
            }
            None => {
                let delta = self.field(sec.word("delta").expect("checked")).clone();
                let s = self.tensor(sec.word("s").expect("checked")).clone();
                TangentStructure::new(PartialLinearStructure::new(delta, base, fiber.expect("checked")), s)
            }
        }
    }
}
