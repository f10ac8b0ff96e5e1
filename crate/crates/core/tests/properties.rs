//! Randomized invariants over operators, channels and tessellations.

use proptest::prelude::*;

use opstat::channel::{apply_channel, random_channel, von_neumann_entropy, DensityMatrix};
use opstat::codec::{encode, fidelity, tessellate, GeometricObject};
use opstat::linalg::ComplexMatrix;
use opstat::poisson::{poisson_semigroup, poisson_series};
use opstat::random::{self, stream};
use opstat::sde::{euler_maruyama, SDEConfig};
use opstat::spectral::{
    cayley_transform, idempotence_defect, inverse_cayley, resolution_of_identity, unitarity_defect, BorelArc,
};

fn sorted_cuts(raw: Vec<f64>) -> Vec<f64> {
    let mut cuts: Vec<f64> = raw.into_iter().map(|c| c * std::f64::consts::TAU).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    cuts.retain(|&c| c > 1e-6 && c < std::f64::consts::TAU - 1e-6);
    cuts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cayley_is_unitary_and_invertible(dim in 1usize..7, norm in 0.01f64..10.0, seed in any::<u64>()) {
        let h = random::hermitian(dim, norm, &mut stream(seed, 0));
        let u = cayley_transform(&h).unwrap();
        prop_assert!(unitarity_defect(u.matrix()) < 1e-12);
        let back = inverse_cayley(&u).unwrap();
        let scale = 1.0 + h.matrix().spectral_norm();
        prop_assert!(back.matrix().max_abs_diff(h.matrix()) < 1e-12 * scale * scale);
    }

    #[test]
    fn projectors_form_a_resolution_of_identity(
        dim in 1usize..7,
        seed in any::<u64>(),
        raw in prop::collection::vec(0.0f64..1.0, 0..10),
    ) {
        let u = random::haar_unitary(dim, &mut stream(seed, 0));
        let arcs = BorelArc::partition_from_cuts(&sorted_cuts(raw)).unwrap();
        let projectors = resolution_of_identity(&u, &arcs).unwrap();
        let mut sum = ComplexMatrix::zeros(dim);
        let mut rank = 0;
        for (i, p) in projectors.iter().enumerate() {
            prop_assert!(idempotence_defect(p.matrix()) < 1e-10);
            prop_assert!(p.matrix().hermitian_defect() < 1e-12);
            for q in &projectors[i + 1..] {
                prop_assert!((p.matrix() * q.matrix()).max_abs() < 1e-10);
            }
            sum = &sum + p.matrix();
            rank += p.rank();
        }
        prop_assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-9);
        prop_assert_eq!(rank, dim);
    }

    #[test]
    fn poisson_semigroup_contracts_and_composes(
        dim in 1usize..6,
        rate in 0.0f64..4.0,
        s in 0.0f64..2.0,
        t in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let u = random::haar_unitary(dim, &mut stream(seed, 0));
        let ps = poisson_semigroup(&u, rate, s).unwrap();
        let pt = poisson_semigroup(&u, rate, t).unwrap();
        let pst = poisson_semigroup(&u, rate, s + t).unwrap();
        prop_assert!(pst.spectral_norm() <= 1.0 + 1e-12);
        prop_assert!((&ps * &pt).max_abs_diff(&pst) < 1e-12);
        prop_assert!(poisson_series(&u, rate, s, 60).max_abs_diff(&ps) < 1e-10);
    }

    #[test]
    fn output_entropy_is_bounded(
        dim in 1usize..5,
        kraus in 1usize..5,
        seed in any::<u64>(),
    ) {
        let ch = random_channel(dim, kraus, seed).unwrap();
        let rho = DensityMatrix::random(dim, &mut stream(seed, 1));
        let out = apply_channel(&ch, &rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        let s = von_neumann_entropy(&out);
        prop_assert!(s >= -1e-12);
        prop_assert!(s <= (dim as f64).log2() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tessellation_partitions_the_square(intensity in 1.0f64..400.0, seed in any::<u64>()) {
        let hits = encode(&GeometricObject::square(), intensity, seed).unwrap();
        prop_assume!(!hits.is_empty());
        let tess = tessellate(&hits).unwrap();
        prop_assert!((tess.total_area() - 1.0).abs() < 1e-9);
        for (k, cell) in tess.cells.iter().enumerate() {
            prop_assert!(cell.area() > 0.0);
            prop_assert!(cell.contains(cell.site, 1e-12));
            prop_assert_eq!(tess.locate(cell.site), k);
        }
        for (i, nbrs) in tess.neighbors().iter().enumerate() {
            for &j in nbrs {
                prop_assert!(tess.neighbors()[j].contains(&i));
            }
        }
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(
        a in (0.2f64..0.8, 0.2f64..0.8, 0.01f64..0.2),
        b in (0.2f64..0.8, 0.2f64..0.8, 0.01f64..0.2),
    ) {
        let da = GeometricObject::disk(a.0, a.1, a.2).unwrap();
        let db = GeometricObject::disk(b.0, b.1, b.2).unwrap();
        let ab = fidelity(&da, &db, 200).unwrap();
        let ba = fidelity(&db, &da, 200).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(fidelity(&da, &da, 200).unwrap(), 1.0);
    }

    #[test]
    fn same_seed_same_path(seed in any::<u64>(), steps in 1usize..200) {
        let cfg = SDEConfig { x0: 1.0, drift_coeff: 1.5, omega: 0.5, t_end: 1.0, n_steps: steps, seed };
        let a = euler_maruyama(&cfg).unwrap();
        let b = euler_maruyama(&cfg).unwrap();
        prop_assert_eq!(a.values, b.values);
    }
}
