use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    Observer,
    Comparator,
    Fictitious,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mass {
    Finite(f64),
    Static,
}

/// A field species: spin-1/2 systems carry labels {1,2}, observers and the
/// comparator carry awareness labels {0,1}, fictitious fields a single level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSpec {
    pub id: String,
    pub role: Role,
    pub labels: Vec<u8>,
    pub mass: Mass,
}

impl SpeciesSpec {
    pub fn system(id: impl Into<String>, mass: f64) -> Self {
        Self { id: id.into(), role: Role::System, labels: vec![1, 2], mass: Mass::Finite(mass) }
    }

    pub fn observer(id: impl Into<String>, mass: f64) -> Self {
        Self { id: id.into(), role: Role::Observer, labels: vec![0, 1], mass: Mass::Finite(mass) }
    }

    pub fn comparator(id: impl Into<String>, mass: f64) -> Self {
        Self { id: id.into(), role: Role::Comparator, labels: vec![0, 1], mass: Mass::Finite(mass) }
    }

    pub fn fictitious(id: impl Into<String>) -> Self {
        Self { id: id.into(), role: Role::Fictitious, labels: vec![0], mass: Mass::Static }
    }

    pub fn internal_dim(&self) -> usize {
        self.labels.len()
    }

    pub fn is_fictitious(&self) -> bool {
        self.role == Role::Fictitious
    }

    pub fn mass(&self) -> Option<f64> {
        match self.mass {
            Mass::Finite(m) => Some(m),
            Mass::Static => None,
        }
    }

    pub fn label_position(&self, label: u8) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn validate(&self) -> Result<()> {
        let expect: &[u8] = match self.role {
            Role::System => &[1, 2],
            Role::Observer | Role::Comparator => &[0, 1],
            Role::Fictitious => &[0],
        };
        if self.labels != expect {
            return Err(Error::Species(format!(
                "{}: labels {:?} do not match role {:?}",
                self.id, self.labels, self.role
            )));
        }
        match (self.role, self.mass) {
            (Role::Fictitious, Mass::Finite(_)) => {
                Err(Error::Species(format!("{}: fictitious fields are static", self.id)))
            }
            (Role::Fictitious, Mass::Static) => Ok(()),
            (_, Mass::Finite(m)) if m > 0.0 && m.is_finite() => Ok(()),
            (_, Mass::Finite(m)) => Err(Error::Species(format!("{}: mass {m} must be positive", self.id))),
            // static physical species are allowed (comparator parked in place)
            (_, Mass::Static) => Ok(()),
        }
    }
}
