use nalgebra::DMatrix;
use opaug::linalg::factorize;
use opaug::noise::{MatrixFamily, NoiseModel};
use opaug::problems::{parse_edge_list, random_geometric, select_boundary, IncidenceStructure, ProblemInstance};
use opaug::rng::{seeded, substream, Purpose};
use proptest::prelude::*;
use rand::Rng as _;

/// `(E diag(w) Eᵀ)` restricted to the interior, plus `γI`, built entry by entry.
fn brute_force(structure: &IncidenceStructure, weights: &[f64], gamma: f64) -> DMatrix<f64> {
    let v = structure.vertex_count();
    let mut incidence = DMatrix::zeros(v, structure.edge_count());
    for (e, &(a, b)) in structure.edges().iter().enumerate() {
        incidence[(a, e)] = 1.0;
        incidence[(b, e)] = -1.0;
    }
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(weights));
    let full = &incidence * w * incidence.transpose();
    let interior = structure.interior();
    DMatrix::from_fn(interior.len(), interior.len(), |i, j| {
        full[(interior[i], interior[j])] + if i == j { gamma } else { 0.0 }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assembly_matches_incidence_product(v in 2usize..=50, density in 0.05f64..0.5, bcount in 0usize..4, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mut edges = Vec::new();
        for i in 0..v {
            for j in i + 1..v {
                if rng.random::<f64>() < density {
                    edges.push((i, j));
                }
            }
        }
        prop_assume!(!edges.is_empty());
        let structure = IncidenceStructure::new(v, edges).unwrap();
        let weights: Vec<f64> = (0..structure.edge_count()).map(|_| 0.1 + rng.random::<f64>()).collect();
        let bcount = bcount.min(v - 1);
        let boundary: Vec<usize> = (0..bcount).collect();
        let structure = structure.with_boundary(boundary).unwrap();
        let gamma = 0.5;
        let instance = ProblemInstance::shifted(structure.clone(), weights.clone(), gamma).unwrap();
        let dense = instance.truth().unwrap().to_dense();
        let expected = brute_force(instance.structure(), &weights, gamma);
        prop_assert!((dense - expected).amax() <= 1e-14);

        if bcount > 0 {
            let assembly = opaug::problems::Assembly::new(&structure, 0.0);
            let op = assembly.assemble(&weights).unwrap().to_dense();
            prop_assert!((op - brute_force(&structure, &weights, 0.0)).amax() <= 1e-14);
        }
    }
}

#[test]
fn grid_examples() {
    let one = ProblemInstance::grid_1d(1).unwrap().truth().unwrap().to_dense();
    assert_eq!(one, DMatrix::from_element(1, 1, 2.0));
    let three = ProblemInstance::grid_1d(3).unwrap();
    let tri = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
    assert_eq!(three.truth().unwrap().to_dense(), tri);
    assert_eq!(three.operator(&[2.0; 4]).unwrap().to_dense(), tri * 2.0);
    assert_eq!(ProblemInstance::grid_2d(1, 1).unwrap().truth().unwrap().to_dense(), DMatrix::from_element(1, 1, 4.0));
    let two = ProblemInstance::grid_2d(2, 2).unwrap().truth().unwrap().to_dense();
    assert!((0..4).all(|i| two[(i, i)] == 4.0));
    assert_eq!(two.iter().filter(|v| **v == -1.0).count(), 8);
}

#[test]
fn shifted_examples() {
    let edge = IncidenceStructure::new(2, vec![(0, 1)]).unwrap();
    let a = ProblemInstance::shifted(edge, vec![1.0], 1.0).unwrap().truth().unwrap().to_dense();
    assert_eq!(a, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
    let path = IncidenceStructure::path(3);
    let a = ProblemInstance::shifted(path.clone(), vec![1.0, 1.0], 0.5).unwrap().truth().unwrap().to_dense();
    assert_eq!(a, brute_force(&path, &[1.0, 1.0], 0.5));
    assert!(ProblemInstance::shifted(path, vec![1.0, 1.0], 0.0).is_err());
}

#[test]
fn edge_list_round_trips() {
    let plain = parse_edge_list("0 1\n1 2\n").unwrap();
    let one_based = parse_edge_list("1 2 0.5\n2 3 0.5\n").unwrap();
    assert_eq!(plain.0, one_based.0);
    assert_eq!(one_based.1, vec![0.5, 0.5]);
    let commented = parse_edge_list("% header\n# more\n0\t1\n1 ,2\n").unwrap();
    assert_eq!(commented, plain);
}

#[test]
fn bernoulli_shifted_samples_factorize() {
    let structure = random_geometric(40, 0.25, 3).unwrap();
    let instance = ProblemInstance::shifted(structure.clone(), vec![1.0; structure.edge_count()], 1.0).unwrap();
    let family = MatrixFamily::new(NoiseModel::BernoulliKeep { p: 0.75 }, &instance).unwrap();
    for i in 0..10_000u64 {
        let (_, op) = family.sample(instance.weights(), &mut substream(9, i, Purpose::Observation)).unwrap();
        assert!(factorize(&op).is_ok(), "draw {i}");
    }
}

#[test]
fn dirichlet_samples_factorize() {
    let structure = random_geometric(40, 0.25, 4).unwrap();
    let structure = select_boundary(&structure, 6, 1).unwrap();
    let instance = ProblemInstance::dirichlet(structure.clone(), vec![1.0; structure.edge_count()]).unwrap();
    let poisson = ProblemInstance::grid_2d(5, 4).unwrap();
    for inst in [&instance, &poisson] {
        for noise in ["two-point:0.5,1.5", "gamma:1,0.45"] {
            let family = MatrixFamily::new(noise.parse().unwrap(), inst).unwrap();
            for i in 0..10_000u64 {
                let (_, op) = family.sample(inst.weights(), &mut substream(5, i, Purpose::Observation)).unwrap();
                assert!(factorize(&op).is_ok());
            }
        }
    }
}

#[test]
fn boundary_selection_is_seeded() {
    let structure = random_geometric(60, 0.2, 8).unwrap();
    let a = select_boundary(&structure, 6, 42).unwrap();
    let b = select_boundary(&structure, 6, 42).unwrap();
    assert_eq!(a.boundary(), b.boundary());
    assert_eq!(a.boundary().len(), 6);
}
