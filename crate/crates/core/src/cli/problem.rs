//! Problem files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! variables  = x                 # optional; canonical x1..xn otherwise
//! objective  = x
//! constraint = 1 - x^2 >= 0      # repeatable; >=, <= or = / ==
//! measure    = uniform_box       # or counting_hypercube
//! box        = -1..1             # optional, inferred from constraints
//! t          = 1..3              # or a single order
//! tol        = 1e-8
//! max_iter   = 200
//! ```

use std::collections::HashMap;
use std::fmt;

use crate::hierarchy::SemialgebraicSet;
use crate::measures::ReferenceMeasure;
use crate::polyring::{collect_identifiers, parse_polynomial, PolyError, Polynomial, VarTable};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `g >= 0`
    NonNegative,
    /// `h = 0`
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub poly: Polynomial,
    pub relation: Relation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    UniformBox,
    CountingHypercube,
}

impl MeasureKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            MeasureKind::UniformBox => "uniform_box",
            MeasureKind::CountingHypercube => "counting_hypercube",
        }
    }
}

/// A validated problem; polynomials are stored over `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    /// Names as declared, or the canonical ones.
    pub variables: Vec<String>,
    pub objective: Polynomial,
    pub constraints: Vec<Constraint>,
    pub measure: Option<MeasureKind>,
    /// Explicit `box` key.
    pub box_bounds: Option<Vec<(f64, f64)>>,
    pub orders: (u32, u32),
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

const KEYS: [&str; 8] = [
    "objective",
    "variables",
    "constraint",
    "measure",
    "box",
    "t",
    "tol",
    "max_iter",
];

struct Entry<'a> {
    line: usize,
    /// 1-based column of the first character of `value`.
    column: usize,
    value: &'a str,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn invalid(line: usize, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        line,
        message: message.into(),
    }
}

fn split_lines(text: &str) -> Result<HashMap<&str, Vec<Entry<'_>>>, CliError> {
    let mut entries: HashMap<&str, Vec<Entry>> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(syntax(line, col, "expected `key = value`"));
        };
        let key = content[..eq].trim();
        let key_col = content.len() - content.trim_start().len() + 1;
        if key.is_empty() {
            return Err(syntax(line, key_col, "missing key before `=`"));
        }
        if !KEYS.contains(&key) {
            return Err(CliError::UnknownKey {
                key: key.to_string(),
                line,
            });
        }
        let rest = &content[eq + 1..];
        let value = rest.trim();
        let column = eq + 2 + (rest.len() - rest.trim_start().len());
        if value.is_empty() {
            return Err(syntax(line, column, format!("empty value for `{key}`")));
        }
        let list = entries.entry(key).or_default();
        if key != "constraint" {
            if let Some(first) = list.first() {
                return Err(CliError::DuplicateKey {
                    key: key.to_string(),
                    line,
                    first: first.line,
                });
            }
        }
        list.push(Entry {
            line,
            column,
            value,
        });
    }
    Ok(entries)
}

fn locate(e: PolyError, line: usize, base: usize) -> CliError {
    match e {
        PolyError::Parse { column, message } => syntax(line, base + column - 1, message),
        PolyError::UnknownVariable { name, column } => CliError::UnknownVariable {
            name,
            line,
            column: base + column - 1,
        },
        other => invalid(line, other.to_string()),
    }
}

fn parse_range(e: &Entry) -> Result<(f64, f64), CliError> {
    let Some((a, b)) = e.value.split_once("..") else {
        return Err(syntax(e.line, e.column, "expected a range `lo..hi`"));
    };
    let lo: f64 = a
        .trim()
        .parse()
        .map_err(|_| syntax(e.line, e.column, format!("invalid number `{}`", a.trim())))?;
    let hi: f64 = b
        .trim()
        .parse()
        .map_err(|_| syntax(e.line, e.column, format!("invalid number `{}`", b.trim())))?;
    Ok((lo, hi))
}

fn parse_orders(e: &Entry) -> Result<(u32, u32), CliError> {
    let parse = |s: &str| -> Result<u32, CliError> {
        s.trim()
            .parse()
            .map_err(|_| syntax(e.line, e.column, format!("invalid order `{}`", s.trim())))
    };
    let (a, b) = match e.value.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let t = parse(e.value)?;
            (t, t)
        }
    };
    if a > b {
        return Err(invalid(e.line, format!("empty order range {a}..{b}")));
    }
    Ok((a, b))
}

fn parse_box(e: &Entry) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in e.value.split(',') {
        let lead = part.len() - part.trim_start().len();
        let sub = Entry {
            line: e.line,
            column: e.column + offset + lead,
            value: part.trim(),
        };
        let (lo, hi) = parse_range(&sub)?;
        if !(lo < hi) {
            return Err(invalid(e.line, format!("empty interval {lo}..{hi}")));
        }
        out.push((lo, hi));
        offset += part.len() + 1;
    }
    Ok(out)
}

/// Splits at the relation operator: `(lhs, rhs, relation, sign, rhs offset)`,
/// where `sign = -1` flips `lhs <= rhs` into `rhs - lhs >= 0`.
fn split_relation(s: &str) -> Option<(&str, &str, Relation, f64, usize)> {
    for (op, rel, sign) in [
        (">=", Relation::NonNegative, 1.0),
        ("<=", Relation::NonNegative, -1.0),
        ("==", Relation::Zero, 1.0),
    ] {
        if let Some(i) = s.find(op) {
            return Some((&s[..i], &s[i + 2..], rel, sign, i + 2));
        }
    }
    s.find('=')
        .map(|i| (&s[..i], &s[i + 1..], Relation::Zero, 1.0, i + 1))
}

fn is_canonical(name: &str) -> Option<usize> {
    let k: usize = name.strip_prefix('x')?.parse().ok()?;
    (k >= 1 && name == format!("x{k}")).then_some(k)
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    let entries = split_lines(text)?;
    let single = |k: &str| entries.get(k).and_then(|v| v.first());

    let declared: Option<Vec<String>> = match single("variables") {
        None => None,
        Some(e) => {
            let mut names = Vec::new();
            let mut offset = 0;
            for part in e.value.split(',') {
                let name = part.trim();
                let col = e.column + offset + (part.len() - part.trim_start().len());
                offset += part.len() + 1;
                let ok = name
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !ok {
                    return Err(syntax(e.line, col, format!("invalid variable name `{name}`")));
                }
                if names.contains(&name.to_string()) {
                    return Err(invalid(e.line, format!("variable `{name}` declared twice")));
                }
                if let Some(k) = is_canonical(name) {
                    if k != names.len() + 1 {
                        return Err(invalid(
                            e.line,
                            format!("`{name}` clashes with the canonical name of variable {}", names.len() + 1),
                        ));
                    }
                }
                names.push(name.to_string());
            }
            Some(names)
        }
    };

    let Some(objective_entry) = single("objective") else {
        return Err(CliError::MissingKey("objective".into()));
    };
    let constraint_entries: &[Entry] = entries.get("constraint").map(Vec::as_slice).unwrap_or(&[]);
    let box_bounds = single("box").map(parse_box).transpose()?;

    let vars = match &declared {
        Some(names) => VarTable::new(names.clone()).with_canonical_fallback(),
        None => {
            let mut n = 0;
            let mut texts = vec![objective_entry];
            texts.extend(constraint_entries.iter());
            for e in texts {
                // relation operators are not polynomial syntax; blank them, keeping columns
                let masked: String = e
                    .value
                    .chars()
                    .map(|c| if matches!(c, '<' | '>' | '=') { ' ' } else { c })
                    .collect();
                let idents = collect_identifiers(&masked).map_err(|err| locate(err, e.line, e.column))?;
                for (name, col) in idents {
                    match is_canonical(&name) {
                        Some(k) => n = n.max(k),
                        None => {
                            return Err(CliError::UnknownVariable {
                                name,
                                line: e.line,
                                column: e.column + col - 1,
                            })
                        }
                    }
                }
            }
            if n == 0 {
                n = box_bounds.as_ref().map_or(0, Vec::len);
            }
            if n == 0 {
                return Err(invalid(
                    objective_entry.line,
                    "cannot infer the dimension; declare `variables`",
                ));
            }
            VarTable::canonical(n)
        }
    };
    let n = vars.n();
    let canonical = VarTable::canonical(n);
    let variables = declared.unwrap_or_else(|| canonical.names().to_vec());

    let objective = parse_polynomial(objective_entry.value, &vars)
        .map_err(|e| locate(e, objective_entry.line, objective_entry.column))?;

    let mut constraints = Vec::new();
    for e in constraint_entries {
        let Some((lhs, rhs, relation, sign, rhs_off)) = split_relation(e.value) else {
            return Err(syntax(
                e.line,
                e.column + e.value.len(),
                "constraint needs a relation `>=`, `<=` or `=`",
            ));
        };
        let l = parse_polynomial(lhs, &vars).map_err(|err| locate(err, e.line, e.column))?;
        let r = parse_polynomial(rhs, &vars).map_err(|err| locate(err, e.line, e.column + rhs_off))?;
        let poly = (&l - &r).scale(sign);
        constraints.push(Constraint { poly, relation });
    }

    let measure = match single("measure") {
        None => None,
        Some(e) => Some(match e.value {
            "uniform_box" => MeasureKind::UniformBox,
            "counting_hypercube" => MeasureKind::CountingHypercube,
            "none" => return Err(invalid(e.line, "omit `measure` instead of `none`")),
            other => return Err(invalid(e.line, format!("unknown measure `{other}`"))),
        }),
    };

    let orders = single("t").map(parse_orders).transpose()?.unwrap_or((1, 1));
    let tol = match single("tol") {
        None => None,
        Some(e) => {
            let v: f64 = e
                .value
                .parse()
                .map_err(|_| syntax(e.line, e.column, format!("invalid tolerance `{}`", e.value)))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(e.line, "tolerance must be positive"));
            }
            Some(v)
        }
    };
    let max_iter = match single("max_iter") {
        None => None,
        Some(e) => Some(
            e.value
                .parse()
                .map_err(|_| syntax(e.line, e.column, format!("invalid iteration count `{}`", e.value)))?,
        ),
    };

    let pf = ProblemFile {
        variables,
        objective,
        constraints,
        measure,
        box_bounds,
        orders,
        tol,
        max_iter,
    };
    let line_of = |k: &str| single(k).map_or(0, |e| e.line);
    if let Some(b) = &pf.box_bounds {
        if b.len() != n {
            return Err(CliError::Dimension(format!(
                "box has {} intervals for {n} variables",
                b.len()
            )));
        }
        if pf.measure != Some(MeasureKind::UniformBox) {
            return Err(invalid(line_of("box"), "`box` requires `measure = uniform_box`"));
        }
    }
    pf.semialgebraic_set().map_err(|e| match e {
        CliError::Invalid { line: 0, message } => invalid(line_of("measure"), message),
        other => other,
    })?;
    Ok(pf)
}

/// Bounds of `B` when every constraint is an interval in one variable.
fn infer_box(n: usize, constraints: &[Constraint]) -> Result<Vec<(f64, f64)>, String> {
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    for c in constraints {
        let vars = c.poly.support_vars();
        if c.relation != Relation::NonNegative || vars.len() != 1 {
            return Err(format!("constraint `{}` is not a bound on one variable", c.poly));
        }
        let i = vars[0];
        let coeff = |k: u32| {
            let mut e = vec![0; n];
            e[i] = k;
            c.poly.coeff(&crate::polyring::MultiIndex::new(e))
        };
        let (a, b, c0) = (coeff(2), coeff(1), coeff(0));
        let interval = match c.poly.degree() {
            1 if b > 0.0 => (-c0 / b, f64::INFINITY),
            1 => (f64::NEG_INFINITY, -c0 / b),
            2 if a < 0.0 && b * b - 4.0 * a * c0 > 0.0 => {
                let r = (b * b - 4.0 * a * c0).sqrt();
                let (r1, r2) = ((-b + r) / (2.0 * a), (-b - r) / (2.0 * a));
                (r1.min(r2), r1.max(r2))
            }
            _ => return Err(format!("constraint `{}` is not an interval bound", c.poly)),
        };
        bounds[i].0 = bounds[i].0.max(interval.0);
        bounds[i].1 = bounds[i].1.min(interval.1);
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("constraints do not bound x{} to a non-empty interval", i + 1));
        }
    }
    Ok(bounds)
}

impl ProblemFile {
    pub fn n(&self) -> usize {
        self.variables.len()
    }

    /// The box of a `uniform_box` problem: the `box` key, or the interval
    /// constraints; both must agree when given.
    fn resolved_box(&self) -> Result<Vec<(f64, f64)>, CliError> {
        let fail = |m: String| CliError::Invalid { line: 0, message: m };
        match (&self.box_bounds, self.constraints.is_empty()) {
            (Some(b), true) => Ok(b.clone()),
            (explicit, false) => {
                let inferred = infer_box(self.n(), &self.constraints)
                    .map_err(|m| fail(format!("uniform_box needs B to be a box: {m}")))?;
                if let Some(b) = explicit {
                    let same = b.iter().zip(&inferred).all(|(p, q)| {
                        (p.0 - q.0).abs() <= 1e-9 * (1.0 + p.0.abs())
                            && (p.1 - q.1).abs() <= 1e-9 * (1.0 + p.1.abs())
                    });
                    if !same {
                        return Err(fail("`box` disagrees with the constraints".into()));
                    }
                }
                Ok(inferred)
            }
            (None, true) => Err(fail("uniform_box needs constraints or a `box` key".into())),
        }
    }

    /// The feasible set `B`.
    pub fn semialgebraic_set(&self) -> Result<SemialgebraicSet, CliError> {
        let n = self.n();
        let mut set = match self.measure {
            Some(MeasureKind::CountingHypercube) => SemialgebraicSet::hypercube(n),
            Some(MeasureKind::UniformBox) if self.constraints.is_empty() => {
                let b = self.resolved_box()?;
                let (lo, hi): (Vec<f64>, Vec<f64>) = b.into_iter().unzip();
                return SemialgebraicSet::box_set(&lo, &hi).map_err(|e| CliError::Invalid {
                    line: 0,
                    message: e.to_string(),
                });
            }
            _ => SemialgebraicSet::new(n),
        };
        for c in &self.constraints {
            let r = match c.relation {
                Relation::NonNegative => set.with_inequality(c.poly.clone()),
                Relation::Zero => set.with_equality(c.poly.clone()),
            };
            set = r.map_err(|e| CliError::Dimension(e.to_string()))?;
        }
        match self.measure {
            Some(MeasureKind::UniformBox) => {
                let (lo, hi) = self.resolved_box()?.into_iter().unzip();
                set = set.with_box_bounds(lo, hi);
            }
            Some(MeasureKind::CountingHypercube) => {
                for mask in 0..(1usize << n) {
                    let v: Vec<f64> = (0..n)
                        .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                        .collect();
                    if !set.contains(&v, 1e-9).map_err(|e| CliError::Dimension(e.to_string()))? {
                        return Err(CliError::Invalid {
                            line: 0,
                            message: format!("vertex {v:?} of the hypercube violates the constraints"),
                        });
                    }
                }
            }
            None => {}
        }
        Ok(set)
    }

    /// The declared reference measure.
    pub fn reference_measure(&self) -> Result<Option<ReferenceMeasure>, CliError> {
        Ok(match self.measure {
            None => None,
            Some(MeasureKind::CountingHypercube) => Some(ReferenceMeasure::counting_hypercube(self.n())?),
            Some(MeasureKind::UniformBox) => {
                let (lo, hi) = self.resolved_box()?.into_iter().unzip();
                Some(ReferenceMeasure::uniform_box(lo, hi)?)
            }
        })
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variables = {}", self.variables.join(", "))?;
        writeln!(f, "objective = {}", self.objective)?;
        for c in &self.constraints {
            let op = match c.relation {
                Relation::NonNegative => ">=",
                Relation::Zero => "=",
            };
            writeln!(f, "constraint = {} {op} 0", c.poly)?;
        }
        if let Some(m) = self.measure {
            writeln!(f, "measure = {}", m.keyword())?;
        }
        if let Some(b) = &self.box_bounds {
            let parts: Vec<String> = b.iter().map(|(lo, hi)| format!("{lo}..{hi}")).collect();
            writeln!(f, "box = {}", parts.join(", "))?;
        }
        writeln!(f, "t = {}..{}", self.orders.0, self.orders.1)?;
        if let Some(tol) = self.tol {
            writeln!(f, "tol = {tol:e}")?;
        }
        if let Some(m) = self.max_iter {
            writeln!(f, "max_iter = {m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "objective = x1\nconstraint = 1 - x1^2 >= 0\nmeasure = uniform_box\nt = 1..3\n";

    #[test]
    fn minimal_file() {
        let pf = parse_problem(MINIMAL).unwrap();
        assert_eq!(pf.n(), 1);
        assert_eq!(pf.orders, (1, 3));
        assert_eq!(pf.constraints.len(), 1);
        let m = pf.reference_measure().unwrap().unwrap();
        assert_eq!(m, ReferenceMeasure::symmetric_box(1).unwrap());
    }

    #[test]
    fn undeclared_variable_named() {
        let text = "variables = x1, x2\nobjective = x1 + x3\n";
        match parse_problem(text) {
            Err(CliError::UnknownVariable { name, line, column }) => {
                assert_eq!((name.as_str(), line, column), ("x3", 2, 18));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_located() {
        let text = "objective = x1\nconstraint = x1 + >= 0\n";
        match parse_problem(text) {
            Err(CliError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 19)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_keys() {
        assert!(matches!(
            parse_problem("objective = x1\nobjective = x1\n"),
            Err(CliError::DuplicateKey { line: 2, first: 1, .. })
        ));
        assert!(matches!(
            parse_problem("objective = x1\norder = 2\n"),
            Err(CliError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(parse_problem("t = 1\n"), Err(CliError::MissingKey(_))));
    }

    #[test]
    fn aliases_and_relations() {
        let text = "variables = x, y\nobjective = x y\nconstraint = x^2 <= 1\nconstraint = y^2 - 1 <= 0\nmeasure = uniform_box\n";
        let pf = parse_problem(text).unwrap();
        assert_eq!(pf.objective.to_string(), "x1*x2");
        assert_eq!(pf.constraints[0].poly.to_string(), "1 - x1^2");
        let m = pf.reference_measure().unwrap().unwrap();
        assert_eq!(m, ReferenceMeasure::symmetric_box(2).unwrap());
        assert!(parse_problem("variables = x2, x1\nobjective = x1\n").is_err());
    }

    #[test]
    fn box_inference() {
        let text = "objective = x1\nconstraint = x1 >= 0\nconstraint = 2 - x1 >= 0\nmeasure = uniform_box\n";
        let m = parse_problem(text).unwrap().reference_measure().unwrap().unwrap();
        assert_eq!(m, ReferenceMeasure::uniform_box(vec![0.0], vec![2.0]).unwrap());
        let text = "objective = x1\nconstraint = 1 - x1^2 - x2^2 >= 0\nmeasure = uniform_box\n";
        assert!(matches!(parse_problem(text), Err(CliError::Invalid { line: 3, .. })));
        let text = "objective = x1 x2\nmeasure = uniform_box\nbox = -1..1, 0..1\n";
        let pf = parse_problem(text).unwrap();
        assert_eq!(pf.semialgebraic_set().unwrap().inequalities().len(), 2);
        let text = "objective = x1\nmeasure = uniform_box\nbox = -1..1, 0..1\n";
        assert!(matches!(parse_problem(text), Err(CliError::Dimension(_))));
    }

    #[test]
    fn hypercube_problem() {
        let pf = parse_problem("objective = x1 x2\nmeasure = counting_hypercube\n").unwrap();
        let set = pf.semialgebraic_set().unwrap();
        assert_eq!(set.equalities().len(), 2);
        assert!(parse_problem("objective = x1 x2\nconstraint = x1 >= 0\nmeasure = counting_hypercube\n").is_err());
    }

    #[test]
    fn display_reparses() {
        let text = "variables = a, b\nobjective = 0.1 a - b^3 # note\nconstraint = a^2 + b^2 <= 1\nconstraint = a = b\nt = 2\ntol = 1e-9\n";
        let pf = parse_problem(text).unwrap();
        let again = parse_problem(&pf.to_string()).unwrap();
        assert_eq!(pf, again);
    }
}
