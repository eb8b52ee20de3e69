//! Discrete measures: weighted atoms and count-valued atoms.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atom location: a point of the unit interval (simulation) or an opaque
/// label (inference, where atoms are identified by index).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Location {
    Point(f64),
    Label(u64),
}

impl PartialEq for Location {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Location::Point(a), Location::Point(b)) => a.to_bits() == b.to_bits(),
            (Location::Label(a), Location::Label(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Location {}

impl Hash for Location {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Location::Point(x) => {
                0u8.hash(state);
                x.to_bits().hash(state);
            }
            Location::Label(id) => {
                1u8.hash(state);
                id.hash(state);
            }
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Point(x) => write!(f, "{x}"),
            Location::Label(id) => write!(f, "id:{id}"),
        }
    }
}

impl FromStr for Location {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(id) = s.strip_prefix("id:") {
            return id
                .parse()
                .map(Location::Label)
                .map_err(|_| Error::data(format!("bad location label {s:?}")));
        }
        s.parse::<f64>()
            .map(Location::Point)
            .map_err(|_| Error::data(format!("bad location {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Location,
    pub weight: f64,
}

/// Finite list of atoms with positive weights at distinct locations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a measure, checking positivity, finiteness and distinct locations.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(atoms.len());
        for atom in &atoms {
            if !(atom.weight.is_finite() && atom.weight > 0.0) {
                return Err(Error::domain(format!(
                    "atom at {} has non-positive or non-finite weight {}",
                    atom.location, atom.weight
                )));
            }
            if !seen.insert(atom.location) {
                return Err(Error::domain(format!(
                    "duplicate atom location {}",
                    atom.location
                )));
            }
        }
        Ok(Self { atoms })
    }

    /// Trusted constructor for samplers that generate valid atoms by
    /// construction. Zero weights (underflow) are dropped.
    pub(crate) fn from_sampled(atoms: Vec<Atom>) -> Self {
        Self {
            atoms: atoms.into_iter().filter(|a| a.weight > 0.0).collect(),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    /// Concatenates two measures with disjoint supports.
    pub fn union(mut self, other: AtomicMeasure) -> Result<Self> {
        self.atoms.extend(other.atoms);
        Self::new(self.atoms)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "location,weight")?;
        for atom in &self.atoms {
            writeln!(out, "{},{}", atom.location, atom.weight)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut atoms = Vec::new();
        for (lineno, fields) in csv_rows(input, "location,weight")? {
            let weight: f64 = fields[1]
                .parse()
                .map_err(|_| Error::data(format!("line {lineno}: bad weight {:?}", fields[1])))?;
            atoms.push(Atom {
                location: fields[0].parse()?,
                weight,
            });
        }
        Self::new(atoms)
    }
}

/// Finite list of atoms carrying positive integer counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMeasure {
    atoms: Vec<(Location, u64)>,
}

impl CountMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a count measure; zero counts are dropped, duplicate locations
    /// are rejected.
    pub fn new(atoms: Vec<(Location, u64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(atoms.len());
        for (loc, _) in &atoms {
            if !seen.insert(*loc) {
                return Err(Error::domain(format!("duplicate count location {loc}")));
            }
        }
        Ok(Self {
            atoms: atoms.into_iter().filter(|(_, c)| *c > 0).collect(),
        })
    }

    pub(crate) fn from_sampled(atoms: Vec<(Location, u64)>) -> Self {
        Self {
            atoms: atoms.into_iter().filter(|(_, c)| *c > 0).collect(),
        }
    }

    pub fn atoms(&self) -> &[(Location, u64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.atoms.iter().map(|(_, c)| c).sum()
    }

    pub fn get(&self, location: &Location) -> u64 {
        self.atoms
            .iter()
            .find(|(l, _)| l == location)
            .map_or(0, |(_, c)| *c)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "location,count")?;
        for (loc, count) in &self.atoms {
            writeln!(out, "{loc},{count}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut atoms = Vec::new();
        for (lineno, fields) in csv_rows(input, "location,count")? {
            let count: u64 = fields[1]
                .parse()
                .map_err(|_| Error::data(format!("line {lineno}: bad count {:?}", fields[1])))?;
            atoms.push((fields[0].parse()?, count));
        }
        Self::new(atoms)
    }
}

fn csv_rows<R: BufRead>(input: R, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if i == 0 {
            if line != header {
                return Err(Error::data(format!(
                    "expected header {header:?}, found {line:?}"
                )));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        if fields.len() != 2 {
            return Err(Error::data(format!(
                "line {}: expected 2 fields, got {}",
                i + 1,
                fields.len()
            )));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}
