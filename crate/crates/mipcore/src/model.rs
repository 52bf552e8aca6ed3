//! Solver-agnostic minimization MIP over binary and nonnegative continuous
//! variables.

use std::collections::HashSet;

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// 0/1 variable.
    Binary,
    /// Continuous variable with bounds `[0, +inf)`.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub obj: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// `(variable id, coefficient)` sorted by id, no duplicates, no zeros.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    /// Rows added together (e.g. a restriction) share a group label so they
    /// can be removed as a unit.
    pub group: Option<String>,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization model. Variables and constraints are addressed by their
/// insertion index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MipModel {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
}

impl MipModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, obj: f64) -> usize {
        self.variables.push(Variable { name: name.into(), kind, obj });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.push_row(name.into(), coeffs, sense, rhs, None)
    }

    /// Adds a row that belongs to `group`; see [`MipModel::remove_group`].
    pub fn add_grouped_constraint(
        &mut self,
        group: &str,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.push_row(name.into(), coeffs, sense, rhs, Some(group.to_string()))
    }

    fn push_row(
        &mut self,
        name: String,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
        group: Option<String>,
    ) -> usize {
        let mut coeffs: Vec<(usize, f64)> = coeffs.into_iter().collect();
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, a) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint { name, coeffs: merged, sense, rhs, group });
        self.constraints.len() - 1
    }

    /// Drops every row tagged with `group`, keeping the others in order.
    /// Returns the number of rows removed.
    pub fn remove_group(&mut self, group: &str) -> usize {
        let before = self.constraints.len();
        self.constraints.retain(|c| c.group.as_deref() != Some(group));
        before - self.constraints.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, &xj)| v.obj * xj).sum()
    }

    /// Largest row violation of `x` (bounds excluded).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max)
    }

    /// Row and bound feasibility plus integrality of binaries.
    pub fn is_feasible(&self, x: &[f64], feas_tol: f64, int_tol: f64) -> bool {
        if x.len() != self.variables.len() {
            return false;
        }
        let bounds_ok = self.variables.iter().zip(x).all(|(v, &xj)| match v.kind {
            VarKind::Binary => xj.abs() <= int_tol || (xj - 1.0).abs() <= int_tol,
            VarKind::Continuous => xj >= -feas_tol,
        });
        bounds_ok && self.max_violation(x) <= feas_tol
    }

    /// Checks references, coefficient finiteness and name uniqueness.
    pub fn check(&self) -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        for (j, v) in self.variables.iter().enumerate() {
            if v.name.is_empty() {
                return Err(ModelError::UnnamedVariable(j));
            }
            if !v.obj.is_finite() {
                return Err(ModelError::NonFinite(v.name.clone()));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
        }
        let mut seen_rows = HashSet::new();
        for (i, c) in self.constraints.iter().enumerate() {
            if c.name.is_empty() {
                return Err(ModelError::UnnamedConstraint(i));
            }
            if !seen_rows.insert(c.name.as_str()) {
                return Err(ModelError::DuplicateName(c.name.clone()));
            }
            if !c.rhs.is_finite() {
                return Err(ModelError::NonFinite(c.name.clone()));
            }
            for &(j, a) in &c.coeffs {
                if j >= self.variables.len() {
                    return Err(ModelError::UnknownVariable { row: c.name.clone(), var: j });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(c.name.clone()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_are_sorted_and_merged() {
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Continuous, 1.0);
        let y = m.add_var("y", VarKind::Binary, 0.0);
        m.add_constraint("r", [(y, 2.0), (x, 1.0), (y, -2.0), (x, 3.0)], Sense::Le, 4.0);
        assert_eq!(m.constraints()[0].coeffs, vec![(x, 4.0)]);
    }

    #[test]
    fn remove_group_restores_original_rows() {
        let mut m = MipModel::new("t");
        let x = m.add_var("x", VarKind::Binary, 1.0);
        m.add_constraint("a", [(x, 1.0)], Sense::Le, 1.0);
        let original = m.clone();
        m.add_grouped_constraint("RF", "RF_x", [(x, 1.0)], Sense::Eq, 0.0);
        assert_eq!(m.num_constraints(), 2);
        assert_eq!(m.remove_group("RF"), 1);
        assert_eq!(m, original);
    }

    #[test]
    fn check_rejects_bad_references_and_names() {
        let mut m = MipModel::new("t");
        m.add_var("x", VarKind::Binary, 1.0);
        m.add_constraint("r", [(3, 1.0)], Sense::Le, 1.0);
        assert!(matches!(m.check(), Err(ModelError::UnknownVariable { .. })));

        let mut m = MipModel::new("t");
        m.add_var("", VarKind::Binary, 1.0);
        assert_eq!(m.check(), Err(ModelError::UnnamedVariable(0)));

        let mut m = MipModel::new("t");
        m.add_var("x", VarKind::Binary, 1.0);
        m.add_var("x", VarKind::Binary, 1.0);
        assert_eq!(m.check(), Err(ModelError::DuplicateName("x".into())));
    }

    #[test]
    fn violation_by_sense() {
        let c = Constraint {
            name: "c".into(),
            coeffs: vec![(0, 1.0), (1, 1.0)],
            sense: Sense::Eq,
            rhs: 1.0,
            group: None,
        };
        assert_eq!(c.violation(&[1.0, 1.0]), 1.0);
        assert_eq!(c.violation(&[0.5, 0.5]), 0.0);
    }
}
