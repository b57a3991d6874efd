use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneKind {
    Int { low: i64, high: i64 },
    Float { low: f64, high: f64 },
    Choice(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSpec {
    pub name: String,
    pub kind: GeneKind,
}

impl GeneSpec {
    pub fn int(name: &str, low: i64, high: i64) -> Self {
        Self {
            name: name.into(),
            kind: GeneKind::Int { low, high },
        }
    }

    pub fn float(name: &str, low: f64, high: f64) -> Self {
        Self {
            name: name.into(),
            kind: GeneKind::Float { low, high },
        }
    }

    pub fn choice(name: &str, choices: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: GeneKind::Choice(choices.iter().map(|c| c.to_string()).collect()),
        }
    }

    pub fn contains(&self, value: &GeneValue) -> bool {
        match (&self.kind, value) {
            (GeneKind::Int { low, high }, GeneValue::Int(v)) => low <= v && v <= high,
            (GeneKind::Float { low, high }, GeneValue::Float(v)) => *low <= *v && *v <= *high,
            (GeneKind::Choice(c), GeneValue::Choice(v)) => c.contains(v),
            _ => false,
        }
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> GeneValue {
        match &self.kind {
            GeneKind::Int { low, high } => GeneValue::Int(rng.random_range(*low..=*high)),
            GeneKind::Float { low, high } => GeneValue::Float(rng.random_range(*low..=*high)),
            GeneKind::Choice(c) => GeneValue::Choice(c[rng.random_range(0..c.len())].clone()),
        }
    }

    /// Scales a numeric value by `u` in `[0.5, 1.2]` and clamps; categorical
    /// genes are redrawn uniformly.
    pub(crate) fn perturb<R: Rng>(&self, value: &GeneValue, rng: &mut R) -> GeneValue {
        match (&self.kind, value) {
            (GeneKind::Int { low, high }, GeneValue::Int(v)) => {
                let u: f64 = rng.random_range(0.5..=1.2);
                let scaled = (*v as f64 * u).round() as i64;
                GeneValue::Int(scaled.clamp(*low, *high))
            }
            (GeneKind::Float { low, high }, GeneValue::Float(v)) => {
                let u: f64 = rng.random_range(0.5..=1.2);
                GeneValue::Float((v * u).clamp(*low, *high))
            }
            _ => self.sample(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneValue {
    Int(i64),
    Float(f64),
    Choice(String),
}

impl GeneValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            GeneValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            GeneValue::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_choice(&self) -> Option<&str> {
        match self {
            GeneValue::Choice(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for GeneValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneValue::Int(v) => write!(f, "{v}"),
            // shortest representation that round-trips
            GeneValue::Float(v) => write!(f, "{v:?}"),
            GeneValue::Choice(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeSchema {
    pub genes: Vec<GeneSpec>,
}

impl GenomeSchema {
    pub fn new(genes: Vec<GeneSpec>) -> Result<Self> {
        let schema = Self { genes };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.genes.is_empty() {
            return Err(Error::invalid("genome schema has no genes"));
        }
        let mut names = HashSet::new();
        for g in &self.genes {
            if !names.insert(&g.name) {
                return Err(Error::invalid(format!("duplicate gene `{}`", g.name)));
            }
            match &g.kind {
                GeneKind::Int { low, high } if low >= high => {
                    return Err(Error::invalid(format!("gene `{}`: empty range", g.name)))
                }
                GeneKind::Float { low, high } if !(low < high) || !low.is_finite() || !high.is_finite() => {
                    return Err(Error::invalid(format!("gene `{}`: empty range", g.name)))
                }
                GeneKind::Choice(c) => {
                    let unique: HashSet<_> = c.iter().collect();
                    if c.is_empty() || unique.len() != c.len() {
                        return Err(Error::invalid(format!(
                            "gene `{}`: choices must be non-empty and unique",
                            g.name
                        )));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.genes.iter().position(|g| g.name == name)
    }

    /// Whether `genes` has one in-range value per schema gene.
    pub fn admits(&self, genes: &[GeneValue]) -> bool {
        genes.len() == self.genes.len() && self.genes.iter().zip(genes).all(|(s, v)| s.contains(v))
    }

    /// Canonical text of a genome, used as the fitness-cache key.
    pub fn key(&self, genes: &[GeneValue]) -> String {
        self.genes
            .iter()
            .zip(genes)
            .map(|(s, v)| format!("{}={v}", s.name))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: Vec<GeneValue>,
    /// Holdout MSE, lower is fitter; `None` until evaluated.
    #[serde(with = "super::fitness_serde")]
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genes: Vec<GeneValue>) -> Self {
        Self { genes, fitness: None }
    }

    pub fn gene(&self, schema: &GenomeSchema, name: &str) -> Option<&GeneValue> {
        schema.index_of(name).map(|i| &self.genes[i])
    }
}
