//! The lattices shipped with the crate.

use crate::error::{CliError, CliResult};
use crate::lattice_file::{LatticeFile, NamedLattice};

const FILES: &[(&str, &str)] = &[
    ("z1", include_str!("../corpus/z1.json")),
    ("z2", include_str!("../corpus/z2.json")),
    ("z3", include_str!("../corpus/z3.json")),
    ("fig1", include_str!("../corpus/fig1.json")),
    ("skew2", include_str!("../corpus/skew2.json")),
    ("random3", include_str!("../corpus/random3.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

pub fn raw(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn get(name: &str) -> CliResult<NamedLattice> {
    let text = raw(name).ok_or_else(|| CliError::Config(format!("no corpus lattice named {name}")))?;
    LatticeFile::parse(text)?.to_lattice()
}

pub fn all() -> CliResult<Vec<NamedLattice>> {
    names().map(get).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dgslab_core::oracles::{distance_sq, solve_svp};
    use dgslab_core::lattice::rat;

    #[test]
    fn every_entry_parses_under_its_own_name() {
        for lat in all().unwrap() {
            assert!(raw(&lat.name).is_some());
        }
    }

    #[test]
    fn fig1_shift_is_a_deep_hole() {
        let fig1 = get("fig1").unwrap();
        assert_eq!(solve_svp(fig1.basis()).unwrap().lambda1_sq, rat(1, 4));
        // (3/2)² + (1/4)², the largest distance any point has to diag(3, 1/2)
        assert_eq!(distance_sq(&fig1.lattice).unwrap(), rat(37, 16));
    }
}
