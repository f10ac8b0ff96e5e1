//! Fast invariant suite run by `opstat selftest`.

use serde::Serialize;

use crate::channel::{von_neumann_entropy, DensityMatrix};
use crate::linalg::ComplexMatrix;
use crate::poisson::{poisson_semigroup_of, poisson_series};
use crate::random;
use crate::spectral::{cayley_transform, eig_unitary, idempotence_defect, resolution_of_identity_of, BorelArc};
use crate::tol::Tolerances;

const SEED: u64 = 0x5e1f_7e57;
const CASES: usize = 20;
const DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub name: &'static str,
    pub passed: bool,
    pub max_defect: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub version: &'static str,
    pub passed: bool,
    pub groups: Vec<GroupReport>,
}

impl SelftestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

fn group(name: &'static str, defects: impl IntoIterator<Item = f64>, tolerance: f64) -> GroupReport {
    let mut max_defect = 0.0f64;
    let mut finite = true;
    for d in defects {
        finite &= d.is_finite();
        max_defect = max_defect.max(d);
    }
    GroupReport {
        name,
        passed: finite && max_defect <= tolerance,
        max_defect,
        tolerance,
    }
}

/// Projector axioms on random 4-dim operators, Cayley unitarity, the
/// Poisson semigroup law, and entropy bounds, each against `tol`.
pub fn selftest(tol: &Tolerances) -> SelftestReport {
    let mut idem = Vec::new();
    let mut adjoint = Vec::new();
    let mut complete = Vec::new();
    let mut unitary = Vec::new();
    let mut semigroup = Vec::new();
    let mut entropy = Vec::new();
    let mut failures = 0usize;

    for case in 0..CASES {
        let mut rng = random::stream(SEED, case as u64);
        let h = random::hermitian(DIM, 3.0, &mut rng);
        let Ok(u) = cayley_transform(&h) else {
            failures += 1;
            continue;
        };
        unitary.push(crate::spectral::unitarity_defect(u.matrix()));
        let Ok(dec) = eig_unitary(&u) else {
            failures += 1;
            continue;
        };
        let arcs = BorelArc::equal_partition(2 + case % 7);
        if let Ok(projectors) = resolution_of_identity_of(&dec, &arcs) {
            let mut sum = ComplexMatrix::zeros(DIM);
            for p in &projectors {
                idem.push(idempotence_defect(p.matrix()));
                adjoint.push(p.matrix().hermitian_defect());
                sum = &sum + p.matrix();
            }
            complete.push(sum.max_abs_diff(&ComplexMatrix::identity(DIM)));
        } else {
            failures += 1;
        }

        let rate = 0.5 + case as f64 / CASES as f64;
        if let (Ok(a), Ok(b), Ok(ab)) = (
            poisson_semigroup_of(&dec, rate, 0.3),
            poisson_semigroup_of(&dec, rate, 0.7),
            poisson_semigroup_of(&dec, rate, 1.0),
        ) {
            semigroup.push((&a * &b).max_abs_diff(&ab));
            semigroup.push(poisson_series(&u, rate, 1.0, 40).max_abs_diff(&ab));
        } else {
            failures += 1;
        }

        let rho = DensityMatrix::random(DIM, &mut rng);
        let s = von_neumann_entropy(&rho);
        let max = (DIM as f64).log2();
        entropy.push((-s).max(s - max).max(0.0));
        let psi = random::unit_vector(DIM, &mut rng);
        if let Ok(pure) = DensityMatrix::pure(&psi) {
            entropy.push(von_neumann_entropy(&pure).abs());
        }
    }
    entropy.push((von_neumann_entropy(&DensityMatrix::maximally_mixed(DIM)) - 2.0).abs());

    let mut groups = vec![
        group("projector_idempotence", idem, tol.idempotent),
        group("projector_self_adjoint", adjoint, tol.hermitian),
        group("projector_completeness", complete, tol.completeness),
        group("cayley_unitarity", unitary, tol.unitary),
        group("poisson_semigroup", semigroup, tol.semigroup),
        group("entropy_bounds", entropy, tol.entropy),
    ];
    if failures > 0 {
        groups.push(GroupReport {
            name: "numerical_failures",
            passed: false,
            max_defect: failures as f64,
            tolerance: 0.0,
        });
    }
    SelftestReport {
        version: env!("CARGO_PKG_VERSION"),
        passed: groups.iter().all(|g| g.passed),
        groups,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_tolerances_pass() {
        let r = selftest(&Tolerances::default());
        assert!(r.passed, "{}", r.to_json());
        assert_eq!(r.groups.len(), 6);
    }

    #[test]
    fn corrupted_tolerance_fails() {
        let tol = Tolerances {
            idempotent: 1e-30,
            ..Tolerances::default()
        };
        let r = selftest(&tol);
        assert!(!r.passed);
        let g = r.groups.iter().find(|g| g.name == "projector_idempotence").unwrap();
        assert!(!g.passed);
    }

    #[test]
    fn output_is_stable() {
        assert_eq!(selftest(&Tolerances::default()).to_json(), selftest(&Tolerances::default()).to_json());
    }
}
