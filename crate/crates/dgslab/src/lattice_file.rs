//! JSON lattice files. Each entry of `basis` is one basis vector, written as
//! `"p/q"` strings; `shift` is optional and defaults to zero.

use std::fs;
use std::path::Path;

use dgslab_core::lattice::{format_rational, parse_rational, Basis, RationalVector, ShiftedLattice};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub name: String,
    pub dimension: usize,
    pub basis: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<String>>,
}

/// A parsed lattice file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedLattice {
    pub name: String,
    pub lattice: ShiftedLattice,
    /// Whether the file carried an explicit shift.
    pub shifted: bool,
}

impl NamedLattice {
    pub fn basis(&self) -> &Basis {
        &self.lattice.basis
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }
}

fn parse_vector(entries: &[String], n: usize, what: &str) -> CliResult<RationalVector> {
    if entries.len() != n {
        return Err(CliError::Config(format!("{what} has {} entries, expected {n}", entries.len())));
    }
    let coords = entries.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(RationalVector::new(coords))
}

impl LatticeFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad lattice file: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn to_lattice(&self) -> CliResult<NamedLattice> {
        let n = self.dimension;
        if n == 0 {
            return Err(CliError::Config("dimension must be at least 1".into()));
        }
        if self.basis.len() != n {
            return Err(CliError::Config(format!("basis has {} vectors, expected {n}", self.basis.len())));
        }
        let columns = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, c)| parse_vector(c, n, &format!("basis vector {i}")))
            .collect::<CliResult<Vec<_>>>()?;
        let basis = Basis::from_columns(columns)?;
        let (shift, shifted) = match &self.shift {
            Some(t) => (parse_vector(t, n, "shift")?, true),
            None => (RationalVector::zeros(n), false),
        };
        Ok(NamedLattice { name: self.name.clone(), lattice: ShiftedLattice::new(basis, shift)?, shifted })
    }

    pub fn from_lattice(name: &str, lat: &ShiftedLattice) -> Self {
        let fmt = |v: &RationalVector| v.coords().iter().map(format_rational).collect::<Vec<_>>();
        Self {
            name: name.into(),
            dimension: lat.dim(),
            basis: lat.basis.columns().iter().map(fmt).collect(),
            shift: if lat.shift.is_zero() { None } else { Some(fmt(&lat.shift)) },
        }
    }
}

pub fn load_lattice(path: &Path) -> CliResult<NamedLattice> {
    LatticeFile::load(path)?.to_lattice()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dgslab_core::lattice::rat;

    #[test]
    fn round_trips_through_json() {
        let text = r#"{"name":"t","dimension":2,"basis":[["3","0"],["0","1/2"]],"shift":["3/2","1/4"]}"#;
        let lat = LatticeFile::parse(text).unwrap().to_lattice().unwrap();
        assert_eq!(lat.lattice.shift, RationalVector::new(vec![rat(3, 2), rat(1, 4)]));
        let back = LatticeFile::from_lattice("t", &lat.lattice);
        assert_eq!(back.basis, vec![vec!["3/1", "0/1"], vec!["0/1", "1/2"]]);
        assert_eq!(back.to_lattice().unwrap(), lat);
    }

    #[test]
    fn rejects_malformed_files() {
        for text in [
            r#"{"name":"t","dimension":2,"basis":[["1","0"]]}"#,
            r#"{"name":"t","dimension":2,"basis":[["1","0"],["2","0"]]}"#,
            r#"{"name":"t","dimension":1,"basis":[["x"]]}"#,
            r#"{"name":"t","dimension":1,"basis":[["1"]],"shift":["1","2"]}"#,
            r#"{"name":"t","dimension":1,"basis":[["1"]],"extra":1}"#,
        ] {
            assert!(LatticeFile::parse(text).and_then(|f| f.to_lattice()).is_err(), "{text}");
        }
    }
}
