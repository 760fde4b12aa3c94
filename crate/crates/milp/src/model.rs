//! Model building blocks: variables, linear expressions, tagged constraints.
//!
//! A [`Model`] is always a maximization. Every constraint carries a tag so
//! that a constraint family can be counted and inspected after the build.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::ModelError;

/// Handle to a variable registered in a [`Model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

/// `sum(coef * var) + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(VarId, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_constant(constant: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant,
        }
    }

    pub fn term(var: VarId, coef: f64) -> Self {
        Self {
            terms: vec![(var, coef)],
            constant: 0.0,
        }
    }

    /// Builder-style [`LinExpr::add_term`].
    pub fn with(mut self, var: VarId, coef: f64) -> Self {
        self.add_term(var, coef);
        self
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) {
        self.terms.push((var, coef));
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) {
        self.terms
            .extend(other.terms.iter().map(|&(v, c)| (v, c * scale)));
        self.constant += other.constant * scale;
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges duplicate variables, drops zero coefficients and sorts by variable.
    pub fn normalized(&self) -> LinExpr {
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        LinExpr {
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }
}

impl FromIterator<(VarId, f64)> for LinExpr {
    fn from_iter<I: IntoIterator<Item = (VarId, f64)>>(iter: I) -> Self {
        LinExpr {
            terms: iter.into_iter().collect(),
            constant: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// `expr sense rhs`, with the expression constant already folded into `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: String,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.expr.eval(values)
    }

    /// Amount by which `values` violates the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A constraint, bound or integrality requirement broken by an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Infeasibility {
    pub what: String,
    pub amount: f64,
}

/// A maximization MILP.
#[derive(Debug, Clone, Default)]
pub struct Model {
    vars: Vec<Var>,
    by_name: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    objective: LinExpr,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lb: f64,
        ub: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(ModelError::DuplicateVar(name));
        }
        let (lb, ub) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lb, ub),
        };
        if lb.is_nan() || ub.is_nan() || lb > ub {
            return Err(ModelError::InvalidBounds { name, lb, ub });
        }
        let id = VarId(self.vars.len());
        self.by_name.insert(name.clone(), id);
        self.vars.push(Var { name, kind, lb, ub });
        Ok(id)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn integer(
        &mut self,
        name: impl Into<String>,
        lb: f64,
        ub: f64,
    ) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Integer, lb, ub)
    }

    pub fn continuous(
        &mut self,
        name: impl Into<String>,
        lb: f64,
        ub: f64,
    ) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Continuous, lb, ub)
    }

    fn check_expr(&self, expr: &LinExpr) -> Result<(), ModelError> {
        for &(v, c) in expr.terms() {
            if v.0 >= self.vars.len() {
                return Err(ModelError::UnregisteredVar(v.0));
            }
            if !c.is_finite() {
                return Err(ModelError::NonFinite(self.vars[v.0].name.clone()));
            }
        }
        if !expr.constant().is_finite() {
            return Err(ModelError::NonFinite("constant".into()));
        }
        Ok(())
    }

    /// Adds `expr sense rhs` under `tag`; returns the constraint index.
    pub fn add_constraint(
        &mut self,
        expr: LinExpr,
        sense: Sense,
        rhs: f64,
        tag: impl Into<String>,
    ) -> Result<usize, ModelError> {
        let tag = tag.into();
        if tag.is_empty() {
            return Err(ModelError::EmptyTag);
        }
        self.check_expr(&expr)?;
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(format!("rhs of {tag}")));
        }
        let mut expr = expr.normalized();
        let rhs = rhs - expr.constant();
        expr.constant = 0.0;
        self.constraints.push(Constraint {
            expr,
            sense,
            rhs,
            tag,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, expr: LinExpr) -> Result<(), ModelError> {
        self.check_expr(&expr)?;
        self.objective = expr.normalized();
        Ok(())
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Var {
        &self.vars[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_integer_vars(&self) -> usize {
        self.vars.iter().filter(|v| v.kind.is_integral()).count()
    }

    pub fn constraints_tagged<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a Constraint> {
        self.constraints.iter().filter(move |c| c.tag == tag)
    }

    /// Number of constraints per tag.
    pub fn tag_census(&self) -> BTreeMap<String, usize> {
        let mut census = BTreeMap::new();
        for c in &self.constraints {
            *census.entry(c.tag.clone()).or_insert(0) += 1;
        }
        census
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values)
    }

    /// Every bound, integrality and constraint violation larger than `tol`.
    pub fn check(&self, values: &[f64], tol: f64) -> Vec<Infeasibility> {
        let mut out = Vec::new();
        for (v, &x) in self.vars.iter().zip(values) {
            if x < v.lb - tol || x > v.ub + tol {
                out.push(Infeasibility {
                    what: format!("bounds of {}", v.name),
                    amount: (v.lb - x).max(x - v.ub),
                });
            }
            if v.kind.is_integral() && (x - x.round()).abs() > tol {
                out.push(Infeasibility {
                    what: format!("integrality of {}", v.name),
                    amount: (x - x.round()).abs(),
                });
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let amount = c.violation(values);
            if amount > tol {
                out.push(Infeasibility {
                    what: format!("{}#{}", c.tag, i),
                    amount,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_with_fractional_bound() {
        let mut m = Model::new();
        let b = m.binary("b_k").unwrap();
        m.add_constraint(LinExpr::term(b, 1.0), Sense::Le, 1.0 / 3.0, "eq1")
            .unwrap();
        assert_eq!(m.num_vars(), 1);
        assert_eq!(m.constraints().len(), 1);
    }

    #[test]
    fn unregistered_variable_is_rejected() {
        let mut other = Model::new();
        for i in 0..3 {
            other.binary(format!("x{i}")).unwrap();
        }
        let foreign = other.var_id("x2").unwrap();
        let mut m = Model::new();
        m.binary("y").unwrap();
        let err = m
            .add_constraint(LinExpr::term(foreign, 1.0), Sense::Le, 1.0, "t")
            .unwrap_err();
        assert!(err.to_string().contains("unregistered variable"));
        assert!(m.set_objective(LinExpr::term(foreign, 1.0)).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut m = Model::new();
        m.binary("x").unwrap();
        assert!(matches!(m.binary("x"), Err(ModelError::DuplicateVar(_))));
    }

    #[test]
    fn tags_are_retrievable_and_partition() {
        let mut m = Model::new();
        let x = m.continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 4.0, "eq1")
            .unwrap();
        m.add_constraint(LinExpr::term(x, 2.0), Sense::Ge, 1.0, "eq1")
            .unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Eq, 3.0, "eq2")
            .unwrap();
        assert_eq!(m.constraints_tagged("eq1").count(), 2);
        let census = m.tag_census();
        assert_eq!(census["eq1"], 2);
        assert_eq!(census.values().sum::<usize>(), m.constraints().len());
    }

    #[test]
    fn normalization_merges_duplicates_and_folds_constant() {
        let mut m = Model::new();
        let x = m.continuous("x", 0.0, 10.0).unwrap();
        let y = m.continuous("y", 0.0, 10.0).unwrap();
        let mut e = LinExpr::from_constant(2.0)
            .with(x, 1.0)
            .with(y, 3.0)
            .with(x, 2.0);
        e.add_term(y, -3.0);
        m.add_constraint(e, Sense::Le, 5.0, "t").unwrap();
        let c = &m.constraints()[0];
        assert_eq!(c.expr.terms(), &[(x, 3.0)]);
        assert_eq!(c.rhs, 3.0);
    }

    #[test]
    fn check_reports_violations() {
        let mut m = Model::new();
        let x = m.integer("x", 0.0, 5.0).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 3.0, "cap")
            .unwrap();
        assert!(m.check(&[3.0], 1e-6).is_empty());
        let bad = m.check(&[3.5], 1e-6);
        assert_eq!(bad.len(), 2);
    }
}
