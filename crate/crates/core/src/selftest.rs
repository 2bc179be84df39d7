//! Exact identity checks run by `harmap selftest`.

use serde::{Deserialize, Serialize};

use crate::eellswood::{certify, classify_component, gauss_transform};
use crate::holomap::{dependency_identity_check, ramification_data, HoloMap};
use crate::poly::Poly;
use crate::strata::{component_table, sample_stratum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

fn fixed_maps() -> Vec<HoloMap> {
    let m = |a: &[i64], b: &[i64], c: &[i64]| {
        HoloMap::new(Poly::from_ints(a), Poly::from_ints(b), Poly::from_ints(c)).expect("coprime")
    };
    vec![m(&[1], &[0, 1], &[0, 0, 1]), m(&[1], &[0, 1], &[0, 0, 0, 1]), m(&[1], &[0, 0, 1], &[0, 0, 0, 0, 1])]
}

pub fn run() -> SelftestReport {
    let mut maps = fixed_maps();
    for (i, (k, r)) in [(3, 0), (3, 1), (4, 1), (4, 2), (5, 3)].into_iter().enumerate() {
        match sample_stratum(k, r, 1000 + i as u64) {
            Ok(pt) => maps.push(pt.f),
            Err(e) => {
                return SelftestReport {
                    checks: vec![check("sampler", false, format!("({k},{r}): {e}"))],
                    passed: false,
                }
            }
        }
    }

    let mut checks = Vec::new();
    let dep = maps.iter().filter(|f| !dependency_identity_check(f.components())).count();
    checks.push(check("dependency identity", dep == 0, format!("{} maps, {dep} failures", maps.len())));

    let mut bad = Vec::new();
    for f in &maps {
        match gauss_transform(f) {
            Ok(rep) if certify(&rep) => {}
            Ok(_) => bad.push(format!("{f}: identity fails")),
            Err(e) => bad.push(format!("{f}: {e}")),
        }
    }
    checks.push(check("orthogonality and containment", bad.is_empty(), bad.join("; ")));

    let mut bad = Vec::new();
    for f in &maps {
        let rep = gauss_transform(f).ok();
        let ram = ramification_data(f).ok();
        if let (Some(rep), Some(ram)) = (rep, ram) {
            let d = classify_component(rep.predicted_degree, ram.index);
            if d.energy != rep.predicted_energy || d.source_hol_degree != f.degree() as i64 {
                bad.push(format!("{f}"));
            }
        }
    }
    for k in 2..=20i64 {
        for r in 0..=(k - 2) {
            let d = classify_component(k - 2 - r, r as usize);
            if d.source_hol_degree != k || d.energy != 3 * k - 2 - r {
                bad.push(format!("(k,r) = ({k},{r})"));
            }
        }
    }
    checks.push(check("formula consistency", bad.is_empty(), bad.join("; ")));

    let rows = component_table(3, 3);
    let bad = rows
        .iter()
        .filter(|d| {
            let (a, r) = (d.harmonic_degree.abs(), d.r as i64);
            d.energy != 3 * a + 2 * r + 4 || d.complex_dim != 3 * a + r + 8
        })
        .count();
    checks.push(check("component table", bad == 0, format!("{} rows", rows.len())));

    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { checks, passed }
}
