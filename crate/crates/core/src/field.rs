//! Scalar fields over (x, y, z) points: expression-backed, native (the
//! two-dimensional counterexample Lagrangian), or dynamically constructed
//! (control reduction). Evaluation is total on the declared working box and
//! side-effect free.

use crate::expr::{self, Arity, EvalError, Expr, ParseError, Program};
use std::sync::Arc;
use thiserror::Error;

pub type DynField = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum FieldKind {
    Const(f64),
    Expr { src: String, program: Program },
    /// Lagrangian of the built-in two-dimensional gap example.
    CounterexampleL,
    /// Constructed at runtime (control reduction); carries a description for
    /// diagnostics but cannot be serialized.
    Dynamic { describe: String, f: DynField },
}

#[derive(Clone)]
pub struct ScalarField {
    kind: FieldKind,
    arity: Arity,
    /// Whether the field consumes the gradient block at all; boundary fields
    /// never do.
    uses_z: bool,
    pub convex_in_z: bool,
}

#[derive(Debug, Clone, Error)]
pub enum FieldError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("boundary field must not reference z variables")]
    BoundaryUsesZ,
    #[error("field `{0}` cannot be serialized; reference the builtin problem instead")]
    NotSerializable(String),
}

fn references_z(e: &Expr) -> bool {
    match e {
        Expr::Var(crate::expr::VarRef::Z(_, _)) => true,
        Expr::Var(_) | Expr::Const(_) => false,
        Expr::Neg(a) | Expr::Abs(a) | Expr::Pow(a, _) => references_z(a),
        Expr::Bin(_, a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
            references_z(a) || references_z(b)
        }
    }
}

impl ScalarField {
    pub fn constant(value: f64, arity: Arity) -> Self {
        ScalarField {
            kind: FieldKind::Const(value),
            arity,
            uses_z: false,
            convex_in_z: true,
        }
    }

    pub fn zero(arity: Arity) -> Self {
        Self::constant(0.0, arity)
    }

    pub fn from_expr(src: &str, arity: Arity) -> Result<Self, FieldError> {
        let ast = expr::parse(src, arity)?;
        let uses_z = references_z(&ast);
        let program = Program::compile(&ast, arity);
        Ok(ScalarField {
            kind: FieldKind::Expr {
                src: src.to_string(),
                program,
            },
            arity,
            uses_z,
            convex_in_z: false,
        })
    }

    /// Boundary variant: same grammar, but z references are rejected.
    pub fn from_boundary_expr(src: &str, arity: Arity) -> Result<Self, FieldError> {
        let field = Self::from_expr(src, arity)?;
        if field.uses_z {
            return Err(FieldError::BoundaryUsesZ);
        }
        Ok(field)
    }

    pub fn counterexample_lagrangian() -> Self {
        ScalarField {
            kind: FieldKind::CounterexampleL,
            arity: Arity::new(2, 2),
            uses_z: true,
            convex_in_z: true,
        }
    }

    pub fn dynamic(
        describe: impl Into<String>,
        arity: Arity,
        uses_z: bool,
        convex_in_z: bool,
        f: DynField,
    ) -> Self {
        ScalarField {
            kind: FieldKind::Dynamic {
                describe: describe.into(),
                f,
            },
            arity,
            uses_z,
            convex_in_z,
        }
    }

    pub fn with_convexity(mut self, convex_in_z: bool) -> Self {
        self.convex_in_z = convex_in_z;
        self
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn uses_z(&self) -> bool {
        self.uses_z
    }

    /// Source string when the field is expression-backed.
    pub fn expr_source(&self) -> Option<&str> {
        match &self.kind {
            FieldKind::Expr { src, .. } => Some(src),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            FieldKind::Const(c) => format!("{c}"),
            FieldKind::Expr { src, .. } => src.clone(),
            FieldKind::CounterexampleL => "counterexample-2d Lagrangian".to_string(),
            FieldKind::Dynamic { describe, .. } => describe.clone(),
        }
    }

    pub fn is_const_zero(&self) -> bool {
        matches!(self.kind, FieldKind::Const(c) if c == 0.0)
    }

    pub fn eval(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64, FieldError> {
        match &self.kind {
            FieldKind::Const(c) => Ok(*c),
            FieldKind::Expr { program, .. } => Ok(program.eval(x, y, z)?),
            FieldKind::CounterexampleL => Ok(crate::gapx::fields::lagrangian(x, y, z)),
            FieldKind::Dynamic { f, .. } => Ok(f(x, y, z)),
        }
    }

    /// Evaluate a boundary field at (x, y); the gradient block is absent.
    pub fn eval_boundary(&self, x: &[f64], y: &[f64]) -> Result<f64, FieldError> {
        debug_assert!(!self.uses_z);
        self.eval(x, y, &[])
    }
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarField({})", self.describe())
    }
}
