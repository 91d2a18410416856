//! TOML problem files.
//!
//! Scalar fields are expressions in `x`, `y` with the constants `pi`, `e` and
//! the functions `sin cos tan asin acos atan sinh cosh tanh exp ln log10
//! sqrt abs floor ceil sign` plus the two-argument `atan2 pow min max`.
//! Integer literals are read as floats, so `1/2` is `0.5`.
//!
//! ```toml
//! [problem]
//! kind = "custom"          # exp1 | exp2 | exp3 | custom | monge_ampere
//!
//! [domain]
//! vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
//! refinements = 2
//!
//! [[controls]]
//! a11 = "2"
//! a12 = "0"
//! a22 = "1"
//! f = "6"
//!
//! [boundary]
//! g = "x^2 + y^2"
//!
//! [scheme]
//! degree = 2
//!
//! [refinement]
//! mode = "adaptive"
//! ```
//!
//! Every section is optional; values present in the file override the
//! configuration passed to [`ConfigFile::apply`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value};
use serde::Deserialize;

use crate::adapt::RefineMode;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, ProblemKind, DEFAULT_XI, EXP1_CONTRAST};
use crate::fem::BoundaryProjection;
use crate::mesh::Mesh;
use crate::monge_ampere::MaProblem;
use crate::problem::{Control, ControlProblem, ExactSolution, SchemeParams};
use crate::tensor::{Point, Sym2};

/// Compiled scalar expression in `x` and `y`.
#[derive(Clone)]
pub struct Expression {
    source: String,
    node: Arc<Node<DefaultNumericTypes>>,
}

impl std::fmt::Debug for Expression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expression({:?})", self.source)
    }
}

struct XyContext {
    vars: [Value<DefaultNumericTypes>; 4],
}

impl XyContext {
    fn new(x: Point) -> Self {
        XyContext {
            vars: [
                Value::Float(x[0]),
                Value::Float(x[1]),
                Value::Float(std::f64::consts::PI),
                Value::Float(std::f64::consts::E),
            ],
        }
    }
}

fn unary(name: &str) -> Option<fn(f64) -> f64> {
    Some(match name {
        "sin" => f64::sin,
        "cos" => f64::cos,
        "tan" => f64::tan,
        "asin" => f64::asin,
        "acos" => f64::acos,
        "atan" => f64::atan,
        "sinh" => f64::sinh,
        "cosh" => f64::cosh,
        "tanh" => f64::tanh,
        "exp" => f64::exp,
        "ln" => f64::ln,
        "log10" => f64::log10,
        "sqrt" => f64::sqrt,
        "abs" => f64::abs,
        "floor" => f64::floor,
        "ceil" => f64::ceil,
        "sign" => |t| if t < 0.0 { -1.0 } else { 1.0 },
        _ => return None,
    })
}

fn binary(name: &str) -> Option<fn(f64, f64) -> f64> {
    Some(match name {
        "atan2" => f64::atan2,
        "pow" => f64::powf,
        "min" => f64::min,
        "max" => f64::max,
        _ => return None,
    })
}

impl Context for XyContext {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        match identifier {
            "x" => Some(&self.vars[0]),
            "y" => Some(&self.vars[1]),
            "pi" => Some(&self.vars[2]),
            "e" => Some(&self.vars[3]),
            _ => None,
        }
    }

    fn call_function(&self, identifier: &str, argument: &Value<DefaultNumericTypes>) -> EvalexprResult<Value<DefaultNumericTypes>, DefaultNumericTypes> {
        if let Some(f) = unary(identifier) {
            return Ok(Value::Float(f(argument.as_number()?)));
        }
        if let Some(f) = binary(identifier) {
            let args = argument.as_fixed_len_tuple(2)?;
            return Ok(Value::Float(f(args[0].as_number()?, args[1].as_number()?)));
        }
        Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string()))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        true
    }

    fn set_builtin_functions_disabled(&mut self, disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        if disabled {
            Ok(())
        } else {
            Err(EvalexprError::BuiltinFunctionsCannotBeDisabled)
        }
    }
}

/// Appends `.0` to integer literals so that evaluation stays in floating point.
fn floatify(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let starts_number =
            c.is_ascii_digit() && (i == 0 || !(chars[i - 1].is_alphanumeric() || chars[i - 1] == '_' || chars[i - 1] == '.'));
        if !starts_number {
            out.push(c);
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let mut integral = true;
        if i < chars.len() && chars[i] == '.' {
            integral = false;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
            integral = false;
            i += 1;
            if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
        out.extend(&chars[start..i]);
        if integral {
            out.push_str(".0");
        }
    }
    out
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let node = build_operator_tree::<DefaultNumericTypes>(&floatify(source))
            .map_err(|e| Error::Parse(format!("expression {source:?}: {e}")))?;
        let expr = Expression { source: source.to_string(), node: Arc::new(node) };
        expr.try_eval([0.5, 0.5])?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn try_eval(&self, x: Point) -> Result<f64> {
        self.node
            .eval_number_with_context(&XyContext::new(x))
            .map_err(|e| Error::Parse(format!("expression {:?}: {e}", self.source)))
    }

    /// Value at `x`; NaN if evaluation fails.
    pub fn eval(&self, x: Point) -> f64 {
        self.try_eval(x).unwrap_or(f64::NAN)
    }

    fn scalar(self) -> impl Fn(Point) -> f64 + Send + Sync + 'static {
        move |x| self.eval(x)
    }
}

fn expr(s: &str) -> Result<Expression> {
    Expression::parse(s)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: String,
    pub s: Option<f64>,
    pub n: Option<usize>,
    /// Exp 3 parameter; absent selects the unknown-solution case.
    pub a: Option<f64>,
    pub contrast: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default)]
    pub refinements: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub label: Option<String>,
    pub a11: String,
    #[serde(default = "zero")]
    pub a12: String,
    pub a22: String,
    pub f: String,
}

fn zero() -> String {
    "0".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub g: String,
    pub gxx: Option<String>,
    pub gxy: Option<String>,
    pub gyy: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    pub u: String,
    pub ux: String,
    pub uy: String,
    pub uxx: String,
    pub uxy: String,
    pub uyy: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MongeAmpereSection {
    pub f: Option<String>,
    pub xi: Option<f64>,
    pub grid: Option<[usize; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub degree: Option<usize>,
    pub sigma: Option<f64>,
    pub linear_tol: Option<f64>,
    pub tol: Option<f64>,
    pub itermax: Option<usize>,
    pub strict_cordes: Option<bool>,
    pub boundary_projection: Option<BoundaryProjection>,
    pub sequential: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementSection {
    pub mode: Option<RefineMode>,
    pub theta: Option<f64>,
    pub tol: Option<f64>,
    pub itermax: Option<usize>,
    pub max_dofs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<ProblemSection>,
    pub domain: Option<DomainSection>,
    #[serde(default)]
    pub controls: Vec<ControlSection>,
    pub boundary: Option<BoundarySection>,
    pub exact: Option<ExactSection>,
    pub monge_ampere: Option<MongeAmpereSection>,
    pub scheme: Option<SchemeSection>,
    pub refinement: Option<RefinementSection>,
    pub output: Option<OutputSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn mesh(&self) -> Result<Mesh> {
        let d = self
            .domain
            .as_ref()
            .ok_or_else(|| Error::Config("custom problems need a [domain] section".into()))?;
        let mut mesh = Mesh::convex_polygon(&d.vertices)?;
        for _ in 0..d.refinements {
            mesh = mesh.uniform_refine();
        }
        Ok(mesh)
    }

    fn boundary(&self) -> Result<(Expression, Option<[Expression; 3]>)> {
        let b = self
            .boundary
            .as_ref()
            .ok_or_else(|| Error::Config("custom problems need a [boundary] section".into()))?;
        let hessian = match (&b.gxx, &b.gxy, &b.gyy) {
            (Some(xx), Some(xy), Some(yy)) => Some([expr(xx)?, expr(xy)?, expr(yy)?]),
            (None, None, None) => None,
            _ => return Err(Error::Config("boundary Hessian needs all of gxx, gxy, gyy".into())),
        };
        Ok((expr(&b.g)?, hessian))
    }

    fn exact(&self) -> Result<Option<ExactSolution>> {
        let Some(e) = &self.exact else { return Ok(None) };
        let u = expr(&e.u)?;
        let g = [expr(&e.ux)?, expr(&e.uy)?];
        let h = [expr(&e.uxx)?, expr(&e.uxy)?, expr(&e.uyy)?];
        Ok(Some(ExactSolution::new(
            u.scalar(),
            move |x| [g[0].eval(x), g[1].eval(x)],
            move |x| Sym2::new(h[0].eval(x), h[1].eval(x), h[2].eval(x)),
        )))
    }

    fn custom_problem(&self) -> Result<ControlProblem> {
        if self.controls.is_empty() {
            return Err(Error::Config("custom problems need at least one [[controls]] entry".into()));
        }
        let mut controls = Vec::with_capacity(self.controls.len());
        for (k, c) in self.controls.iter().enumerate() {
            let a = [expr(&c.a11)?, expr(&c.a12)?, expr(&c.a22)?];
            let f = expr(&c.f)?;
            let label = c.label.clone().unwrap_or_else(|| format!("control{k}"));
            controls.push(Control::new(label, move |x| Sym2::new(a[0].eval(x), a[1].eval(x), a[2].eval(x)), f.scalar()));
        }
        let (g, hessian) = self.boundary()?;
        let problem = ControlProblem::new(controls, g.scalar())?;
        Ok(match hessian {
            Some(h) => problem.with_boundary_hessian(move |x| Sym2::new(h[0].eval(x), h[1].eval(x), h[2].eval(x))),
            None => problem,
        })
    }

    fn ma_problem(&self, xi: f64) -> Result<MaProblem> {
        let f = self
            .monge_ampere
            .as_ref()
            .and_then(|m| m.f.as_deref())
            .ok_or_else(|| Error::Config("monge_ampere problems need [monge_ampere] f".into()))?;
        let f = expr(f)?;
        let (g, hessian) = self.boundary()?;
        let ma = MaProblem::new(f.scalar(), g.scalar(), xi);
        Ok(match hessian {
            Some(h) => ma.with_g_hessian(move |x| Sym2::new(h[0].eval(x), h[1].eval(x), h[2].eval(x))),
            None => ma,
        })
    }

    fn problem_kind(&self, section: &ProblemSection, base: &ProblemKind) -> Result<ProblemKind> {
        let (base_s, base_n, base_contrast) = match base {
            ProblemKind::Exp1 { s, n, contrast } => (*s, Some(*n), *contrast),
            ProblemKind::Exp2 { n, contrast } => (0.5, Some(*n), *contrast),
            _ => (0.5, None, EXP1_CONTRAST),
        };
        let contrast = section.contrast.unwrap_or(base_contrast);
        Ok(match section.kind.as_str() {
            "exp1" => ProblemKind::Exp1 { s: section.s.unwrap_or(base_s), n: section.n.or(base_n).unwrap_or(20), contrast },
            "exp2" => ProblemKind::Exp2 { n: section.n.or(base_n).unwrap_or(10), contrast },
            "exp3" => ProblemKind::Exp3 { a: section.a, n: section.n.unwrap_or(2) },
            "custom" => ProblemKind::Custom { problem: self.custom_problem()?, exact: self.exact()?, mesh: self.mesh()? },
            "monge_ampere" => ProblemKind::MongeAmpere {
                problem: self.ma_problem(DEFAULT_XI)?,
                exact: self.exact()?,
                mesh: self.mesh()?,
            },
            other => return Err(Error::Config(format!("unknown problem kind {other:?}"))),
        })
    }

    /// Overrides `base` with every value present in the file.
    pub fn apply(&self, mut base: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(p) = &self.problem {
            base.problem = self.problem_kind(p, &base.problem)?;
        }
        if let Some(s) = &self.scheme {
            if let Some(p) = s.degree {
                if p != base.scheme.degree {
                    let sigma = base.scheme.sigma;
                    let default_sigma = SchemeParams::new(base.scheme.degree).sigma;
                    base.scheme.degree = p;
                    base.scheme.sigma = if sigma == default_sigma { SchemeParams::new(p).sigma } else { sigma };
                }
            }
            let sc = &mut base.scheme;
            sc.sigma = s.sigma.unwrap_or(sc.sigma);
            sc.linear_tol = s.linear_tol.unwrap_or(sc.linear_tol);
            sc.tol = s.tol.unwrap_or(sc.tol);
            sc.itermax = s.itermax.unwrap_or(sc.itermax);
            sc.strict_cordes = s.strict_cordes.unwrap_or(sc.strict_cordes);
            sc.boundary_projection = s.boundary_projection.unwrap_or(sc.boundary_projection);
            sc.sequential = s.sequential.unwrap_or(sc.sequential);
        }
        if let Some(r) = &self.refinement {
            base.refine = r.mode.unwrap_or(base.refine);
            base.adapt.theta = r.theta.unwrap_or(base.adapt.theta);
            base.adapt.tol = r.tol.unwrap_or(base.adapt.tol);
            base.adapt.itermax = r.itermax.unwrap_or(base.adapt.itermax);
            base.adapt.max_dofs = r.max_dofs.unwrap_or(base.adapt.max_dofs);
        }
        if let Some(m) = &self.monge_ampere {
            base.xi = m.xi.or(base.xi);
            if let Some([l, t]) = m.grid {
                base.grid = (l, t);
            }
        }
        if let Some(dir) = self.output.as_ref().and_then(|o| o.dir.clone()) {
            base.out = Some(dir);
        }
        base.scheme.validate()?;
        base.adapt.validate()?;
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_literals_become_floats() {
        assert_eq!(floatify("1/2"), "1.0/2.0");
        assert_eq!(floatify("x2 + 3*x^2"), "x2 + 3.0*x^2.0");
        assert_eq!(floatify("1.5e-3 + 2e3 + 3E+2*x"), "1.5e-3 + 2e3 + 3E+2*x");
        assert_eq!(floatify("atan2(y, 1)"), "atan2(y, 1.0)");
    }

    #[test]
    fn expressions_evaluate() {
        let e = Expression::parse("1/2 + x^2 - sin(pi*y)").unwrap();
        assert!((e.eval([3.0, 0.5]) - 8.5).abs() < 1e-14);
        let e = Expression::parse("atan2(y, x) + max(x, y) + pow(2, 3) + 1e-3").unwrap();
        assert!((e.eval([1.0, 1.0]) - (std::f64::consts::FRAC_PI_4 + 1.0 + 8.0 + 1e-3)).abs() < 1e-14);
        assert!((Expression::parse("sqrt(abs(x)) * exp(0) + ln(e)").unwrap().eval([-4.0, 0.0]) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn bad_expressions_are_parse_errors() {
        assert!(matches!(Expression::parse("z + 1"), Err(Error::Parse(_))));
        assert!(matches!(Expression::parse("foo(x)"), Err(Error::Parse(_))));
        assert!(matches!(Expression::parse("x +"), Err(Error::Parse(_))));
    }

    const CUSTOM: &str = r#"
[problem]
kind = "custom"

[domain]
vertices = [[0, 0], [1, 0], [1, 1], [0, 1]]
refinements = 1

[[controls]]
a11 = "2"
a22 = "1"
f = "6"

[[controls]]
label = "b"
a11 = "1"
a12 = "x/10"
a22 = "1"
f = "4 + 2*x/10"

[boundary]
g = "x^2 + y^2"
gxx = "2"
gxy = "0"
gyy = "2"

[exact]
u = "x^2 + y^2"
ux = "2*x"
uy = "2*y"
uxx = "2"
uxy = "0"
uyy = "2"

[scheme]
degree = 3
tol = 1e-11

[refinement]
mode = "adaptive"
theta = 0.3
max_dofs = 5000

[output]
dir = "out"
"#;

    #[test]
    fn custom_problem_file() {
        let cfg = ConfigFile::parse(CUSTOM).unwrap();
        let base = ExperimentConfig::new(ProblemKind::Exp1 { s: 0.5, n: 20, contrast: EXP1_CONTRAST }, 2);
        let cfg = cfg.apply(base).unwrap();
        assert_eq!(cfg.scheme.degree, 3);
        assert_eq!(cfg.scheme.sigma, 50.0);
        assert_eq!(cfg.scheme.tol, 1e-11);
        assert_eq!(cfg.refine, RefineMode::Adaptive);
        assert_eq!(cfg.adapt.theta, 0.3);
        assert_eq!(cfg.adapt.max_dofs, 5000);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("out")));
        let ProblemKind::Custom { problem, exact, mesh } = &cfg.problem else { panic!("not custom") };
        assert_eq!(problem.num_controls(), 2);
        assert_eq!(problem.controls()[1].label, "b");
        let (a, f) = problem.coefficients([0.5, 0.25], 1);
        assert_eq!(a, Sym2::new(1.0, 0.05, 1.0));
        assert!((f - 4.1).abs() < 1e-14);
        assert!((problem.boundary([0.5, 0.5]) - 0.5).abs() < 1e-14);
        assert!(exact.is_some());
        assert_eq!(mesh.num_triangles(), 4 * Mesh::convex_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap().num_triangles());
    }

    #[test]
    fn builtin_kinds_and_overrides() {
        let base = ExperimentConfig::new(ProblemKind::Exp1 { s: 0.3, n: 8, contrast: EXP1_CONTRAST }, 2);
        let cfg = ConfigFile::parse("[problem]\nkind = \"exp1\"\nn = 4\n").unwrap().apply(base.clone()).unwrap();
        assert!(matches!(cfg.problem, ProblemKind::Exp1 { s, n: 4, .. } if s == 0.3));
        let cfg = ConfigFile::parse("[problem]\nkind = \"exp3\"\na = 0.4\n[monge_ampere]\nxi = 0.1\ngrid = [8, 4]\n")
            .unwrap()
            .apply(base.clone())
            .unwrap();
        assert!(matches!(cfg.problem, ProblemKind::Exp3 { a: Some(a), n: 2 } if a == 0.4));
        assert_eq!(cfg.xi, Some(0.1));
        assert_eq!(cfg.grid, (8, 4));
        let cfg = ConfigFile::parse("").unwrap().apply(base.clone()).unwrap();
        assert!(matches!(cfg.problem, ProblemKind::Exp1 { n: 8, .. }));
    }

    #[test]
    fn invalid_files_are_rejected() {
        let base = ExperimentConfig::new(ProblemKind::Exp2 { n: 10, contrast: EXP1_CONTRAST }, 2);
        assert!(matches!(ConfigFile::parse("[problem]\nkind = 3\n"), Err(Error::Parse(_))));
        assert!(matches!(ConfigFile::parse("[bogus]\n"), Err(Error::Parse(_))));
        let f = ConfigFile::parse("[problem]\nkind = \"nope\"\n").unwrap();
        assert!(matches!(f.apply(base.clone()), Err(Error::Config(_))));
        let f = ConfigFile::parse("[problem]\nkind = \"custom\"\n").unwrap();
        assert!(matches!(f.apply(base.clone()), Err(Error::Config(_))));
        let f = ConfigFile::parse("[refinement]\ntheta = 1.5\n").unwrap();
        assert!(matches!(f.apply(base), Err(Error::Config(_))));
    }
}
