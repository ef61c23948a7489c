use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const A_SLIT: &str = "a-slit";
pub const B_SLIT: &str = "b-slit";
pub const ENV: &str = "env";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor factors; the last factor is the fastest-varying index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertLayout {
    factors: Vec<Factor>,
}

impl HilbertLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Factor> = Vec::new();
        for (label, dim) in factors {
            let label = label.into();
            if dim == 0 {
                return Err(Error::Layout(format!("factor '{label}' has zero dimension")));
            }
            if out.iter().any(|f| f.label == label) {
                return Err(Error::LayoutConflict(format!("duplicate label '{label}'")));
            }
            out.push(Factor { label, dim });
        }
        if out.is_empty() {
            return Err(Error::Layout("layout needs at least one factor".into()));
        }
        Ok(Self { factors: out })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// `[a-slit:2, b-slit:2]`
    pub fn two_particle() -> Self {
        Self::new([(A_SLIT, 2), (B_SLIT, 2)]).expect("static layout")
    }

    /// `[a-slit:2, b-slit:2, env:3]`
    pub fn with_environment() -> Self {
        Self::new([(A_SLIT, 2), (B_SLIT, 2), (ENV, 3)]).expect("static layout")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if let Some(dup) = other.labels().find(|l| self.contains(l)) {
            return Err(Error::LayoutConflict(format!("label '{dup}' present in both operands")));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// Splits a composite index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        out
    }

    /// Inverse of [`digits`](Self::digits).
    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.factors.len());
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&d, f)| acc * f.dim + d)
    }

    /// Sub-layout of the given labels, kept in original order.
    pub fn restrict(&self, keep: &[&str]) -> Result<Self> {
        for label in keep {
            if !self.contains(label) {
                return Err(Error::Layout(format!("unknown label '{label}'")));
            }
        }
        if keep.is_empty() {
            return Err(Error::Layout("keep set must be nonempty".into()));
        }
        let factors = self
            .factors
            .iter()
            .filter(|f| keep.contains(&f.label.as_str()))
            .cloned()
            .collect();
        Ok(Self { factors })
    }
}
