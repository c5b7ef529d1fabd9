use invsurr_core::coeffs::{extract, reconstruct_stress};
use invsurr_core::gpr::fit;
use invsurr_core::surrogate::{train_surrogate, training_set_from_law, Provenance, SurrogateConfig};
use invsurr_core::tensors::{finite_difference_gradient, generator_basis, invariants, principal_invariants, pseudo_invariants};
use invsurr_core::*;
use proptest::prelude::*;

fn rotation() -> impl Strategy<Value = Mat3> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("nonzero quaternion", |q| q.iter().map(|v| v * v).sum::<f64>() > 1e-2)
        .prop_map(Mat3::from_quaternion)
}

/// `FᵀF` with `F` within 0.2 of the identity componentwise.
fn strain() -> impl Strategy<Value = SymMat3> {
    prop::array::uniform9(-0.2f64..0.2).prop_map(|d| {
        let mut f = Mat3::from_row_major(d);
        for i in 0..3 {
            f.0[i][i] += 1.0;
        }
        f.transpose().matmul(&f).sym_part()
    })
}

fn mooney() -> Law {
    Law::MooneyRivlin(MooneyRivlinParams::default())
}

fn bonet() -> Law {
    Law::Bonet(BonetParams::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn principal_invariants_ignore_rotation(c in strain(), r in rotation()) {
        let a = principal_invariants(&c).principal();
        let b = principal_invariants(&c.rotate_t(&r)).principal();
        for k in 0..3 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-12 * a[k].abs().max(1.0));
        }
    }

    #[test]
    fn pseudo_invariants_follow_the_fiber(c in strain(), r in rotation()) {
        let a0 = UnitVec3::normalized([1.0, 2.0, 1.0]).unwrap();
        let (i4, i5) = pseudo_invariants(&c, &a0);
        let (j4, j5) = pseudo_invariants(&c.rotate_t(&r), &a0.rotate_t(&r));
        prop_assert!((i4 - j4).abs() < 1e-12 && (i5 - j5).abs() < 1e-12);
    }

    #[test]
    fn law_stress_is_twice_the_energy_gradient(c in strain()) {
        for law in [mooney(), bonet()] {
            let s = law.stress(&c).unwrap();
            let g = finite_difference_gradient(&c, 1e-6, |x| law.energy(x).unwrap());
            let tol = 1e-6 * s.norm().max(1.0);
            prop_assert!(s.max_abs_diff(&(g * 2.0)) < tol, "{} {:?} vs {:?}", law.id(), s, g);
        }
    }

    #[test]
    fn extracted_coefficients_rebuild_the_stress(c in strain()) {
        for law in [mooney(), bonet()] {
            let a = law.direction().map(|d| d.structural_tensor());
            let s = law.stress(&c).unwrap();
            let (coeffs, _) = extract(law.kind(), &c, &s, a.as_ref(), None).unwrap();
            let basis = generator_basis(law.kind(), &c, a.as_ref()).unwrap();
            let back = reconstruct_stress(&coeffs, &basis).unwrap();
            prop_assert!(back.max_abs_diff(&s) < 1e-9 * s.norm().max(1.0));
        }
    }

    #[test]
    fn generators_rotate_with_the_frame(c in strain(), r in rotation()) {
        let a0 = UnitVec3::normalized([1.0, 2.0, 1.0]).unwrap();
        let a = a0.structural_tensor();
        let ar = a0.rotate_t(&r).structural_tensor();
        let g = generator_basis(InvariantKind::TransIso, &c, Some(&a)).unwrap();
        let h = generator_basis(InvariantKind::TransIso, &c.rotate_t(&r), Some(&ar)).unwrap();
        for (x, y) in g.generators.iter().zip(&h.generators) {
            prop_assert!(x.rotate_t(&r).max_abs_diff(y) < 1e-12 * x.norm().max(1.0));
        }
    }
}

fn toy_data(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = sampling::rng_from_seed(9);
    use rand::Rng;
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y = x.iter().map(|p| vec![(2.0 * p[0]).sin() + p[1] * p[1], 3.0 - p[0] * p[1]]).collect();
    (x, y)
}

#[test]
fn gpr_ignores_row_order() {
    let (x, y) = toy_data(30);
    let a = fit(&x, &y, &Default::default()).unwrap();
    let (xr, yr): (Vec<_>, Vec<_>) = x.iter().cloned().zip(y.iter().cloned()).rev().unzip();
    let b = fit(&xr, &yr, &Default::default()).unwrap();
    for q in [vec![0.1, -0.3], vec![0.7, 0.2]] {
        let (p, r) = (a.predict(&q).unwrap(), b.predict(&q).unwrap());
        for (u, v) in p.iter().zip(&r) {
            assert!((u - v).abs() < 1e-6, "{u} vs {v}");
        }
    }
}

#[test]
fn gpr_is_transparent_to_affine_output_rescaling() {
    let (x, y) = toy_data(30);
    let scaled: Vec<Vec<f64>> = y.iter().map(|r| r.iter().map(|v| 1e5 * v - 7.0).collect()).collect();
    let a = fit(&x, &y, &Default::default()).unwrap();
    let b = fit(&x, &scaled, &Default::default()).unwrap();
    let q = [0.25, -0.5];
    for (u, v) in a.predict(&q).unwrap().iter().zip(b.predict(&q).unwrap()) {
        assert!((1e5 * u - 7.0 - v).abs() < 1e-6 * v.abs().max(1.0), "{u} vs {v}");
    }
}

#[test]
fn gpr_interpolates_and_round_trips() {
    let (x, y) = toy_data(40);
    let m = fit(&x, &y, &Default::default()).unwrap();
    for (p, t) in x.iter().zip(&y) {
        for (u, v) in m.predict(p).unwrap().iter().zip(t) {
            assert!((u - v).abs() < 1e-6);
        }
    }
    let back = GprModel::from_json(&m.to_json().unwrap()).unwrap();
    let q = [0.3, 0.3];
    assert_eq!(m.predict(&q).unwrap(), back.predict(&q).unwrap());
}

#[test]
fn surrogate_round_trip_and_symmetric_stress() {
    let bounds = DomainBounds::new(0.15).unwrap();
    let mut cs = vec![SymMat3::IDENTITY];
    cs.extend(
        sampling::lhs_sample(&bounds, 60, 3)
            .iter()
            .map(|f| tensors::right_cauchy_green(f).unwrap()),
    );
    let law = bonet();
    let (set, _) = training_set_from_law(MappingKind::TransIso5to6, &law, &cs).unwrap();
    let m = train_surrogate(&set, law.direction(), &SurrogateConfig::default(), Provenance::default()).unwrap();
    let back = SurrogateModel::from_json(&m.to_json().unwrap()).unwrap();
    let c = SymMat3::diag(1.1, 0.95, 1.02) + SymMat3::new(0.0, 0.03, -0.02, 0.0, 0.01, 0.0);
    assert_eq!(m.predict_stress(&c).unwrap(), back.predict_stress(&c).unwrap());
    // Training inputs are reproduced through the whole invariant pipeline.
    let p = m.features(&cs[5]).unwrap();
    let i = invariants(InvariantKind::TransIso, &cs[5], law.direction().as_ref()).unwrap().to_vec();
    assert_eq!(p, i);
    let s = law.stress(&cs[5]).unwrap();
    assert!(m.predict_stress(&cs[5]).unwrap().max_abs_diff(&s) < 1e-4 * s.norm());
    assert!(m.predict_tangent(&c).unwrap().minor_symmetry_defect() < 1e-10);
}
