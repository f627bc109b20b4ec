use proptest::prelude::*;

use nitsche_mortar::coupling::{assemble_system, segment_coefficients, CouplingParams, Method};
use nitsche_mortar::driver::{solve_discrete, Problem, SourceSpec, Tolerances};
use nitsche_mortar::estimator::mark;
use nitsche_mortar::fem::{integrate_segment, integrate_triangle, DofMap};
use nitsche_mortar::mesh::{
    build_lshape, build_two_rectangles, intersect_interface, refine_rgb, Point2, RefinementMarks,
    SubdomainMesh,
};

fn pick_marks(mesh: &SubdomainMesh, picks: &[usize]) -> RefinementMarks {
    let mut marks = RefinementMarks::new();
    for &p in picks {
        marks.insert(mesh.id(), p % mesh.num_triangles());
    }
    marks
}

fn refine_randomly(mut mesh: SubdomainMesh, rounds: &[Vec<usize>]) -> SubdomainMesh {
    for picks in rounds {
        mesh = refine_rgb(&mesh, &pick_marks(&mesh, picks)).unwrap();
    }
    mesh
}

fn constant_problem(k1: f64, k2: f64, method: Method) -> Problem {
    Problem {
        params: CouplingParams::new(k1, k2, 1e-2, method).unwrap(),
        source: SourceSpec::Constant(1.0),
        exact: None,
        tolerances: Tolerances::default(),
    }
}

fn mesh_counts() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..7, 1usize..7, 1usize..7, 1usize..7)
}

fn rounds() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0usize..10_000, 1..6), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_conserves_area_and_conformity(counts in mesh_counts(), rounds in rounds()) {
        let (m1, m2) = build_two_rectangles(counts.0, counts.1, counts.2, counts.3).unwrap();
        for mesh in [m1, m2] {
            let area = mesh.total_area();
            let refined = refine_randomly(mesh, &rounds);
            prop_assert!((refined.total_area() - area).abs() <= 1e-12 * area);
            prop_assert_eq!(refined.conformity_violation(), None);
        }
    }

    #[test]
    fn interface_segments_partition_gamma(counts in mesh_counts(), r1 in rounds(), r2 in rounds()) {
        let (m1, m2) = build_two_rectangles(counts.0, counts.1, counts.2, counts.3).unwrap();
        let (m1, m2) = (refine_randomly(m1, &r1), refine_randomly(m2, &r2));
        let interface = intersect_interface(&m1, &m2).unwrap();
        let total: f64 = interface.segments().iter().map(|s| s.length()).sum();
        prop_assert!((total - interface.gamma_length()).abs() <= 1e-12 * interface.gamma_length());
    }

    #[test]
    fn flux_weights_are_convex(h1 in 1e-4f64..1.0, h2 in 1e-4f64..1.0, k1 in 1e-3f64..1e4, k2 in 1e-3f64..1e4) {
        let params = CouplingParams::new(k1, k2, 1e-2, Method::NitscheI).unwrap();
        let c = segment_coefficients(h1, h2, &params).unwrap();
        prop_assert!(c.w1 > 0.0 && c.w2 > 0.0);
        prop_assert!((c.w1 + c.w2 - 1.0).abs() <= 1e-15);
        prop_assert!(c.beta > 0.0 && c.gamma > 0.0);
    }

    #[test]
    fn marking_follows_threshold(counts in mesh_counts(), theta in 0.01f64..=1.0, seed in prop::collection::vec(0.0f64..1.0, 1..200)) {
        let (m1, m2) = build_two_rectangles(counts.0, counts.1, counts.2, counts.3).unwrap();
        let values = [&m1, &m2].map(|m| (0..m.num_triangles()).map(|t| seed[t % seed.len()] * (1 + t % 3) as f64).collect::<Vec<_>>());
        let marks = mark([&m1, &m2], &values, theta);
        let max = values.iter().flatten().copied().fold(0.0, f64::max);
        for (side, mesh) in [&m1, &m2].into_iter().enumerate() {
            for (t, &e) in values[side].iter().enumerate() {
                prop_assert_eq!(marks.contains(mesh.id(), t), e > theta * max);
            }
        }
    }

    #[test]
    fn quadrature_is_exact_on_random_triangles(
        pts in prop::collection::vec(-2.0f64..2.0, 6),
        c in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let p = [Point2::new(pts[0], pts[1]), Point2::new(pts[2], pts[3]), Point2::new(pts[4], pts[5])];
        let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
        prop_assume!(area > 1e-2);
        // degree-4 polynomial in barycentric coordinates with known moments:
        // ∫ λ₀^a λ₁^b λ₂^c = 2|K| a! b! c! / (a+b+c+2)!
        let exact = 2.0 * area * (c[0] * 24.0 / 720.0 + c[1] * 4.0 / 720.0 + c[2] / 120.0 + c[3] / 6.0 + c[4] / 2.0);
        let got = integrate_triangle(p, |_, l| {
            c[0] * l[0].powi(4) + c[1] * l[1].powi(2) * l[2].powi(2) + c[2] * l[0] * l[1] * l[2] + c[3] * l[2] + c[4]
        });
        prop_assert!((got - exact).abs() <= 1e-13 * exact.abs().max(area));
        // degree 5 on a segment: ∫₀¹ t⁵ = 1/6, scaled by the length
        let len = p[0].distance(p[1]);
        let seg = integrate_segment(p[0], p[1], |_, t| c[0] * t.powi(5) + c[1] * t * t + c[2]);
        let exact_seg = len * (c[0] / 6.0 + c[1] / 3.0 + c[2]);
        prop_assert!((seg - exact_seg).abs() <= 1e-13 * len.max(exact_seg.abs()));
    }

    #[test]
    fn estimator_is_root_sum_of_local_squares(counts in mesh_counts(), k1 in 0.1f64..10.0, method in prop::sample::select(Method::ALL.to_vec())) {
        let (m1, m2) = build_two_rectangles(counts.0, counts.1, counts.2, counts.3).unwrap();
        // keep the master side stiffer for the master-slave variant
        let k2 = if method.variant() == nitsche_mortar::coupling::Variant::II { k1 * 0.5 } else { 1.0 };
        let discrete = solve_discrete([&m1, &m2], &constant_problem(k1, k2, method)).unwrap();
        let ind = &discrete.indicators;
        let sum = ind.local_sum_of_squares();
        prop_assert!((ind.eta * ind.eta - sum).abs() <= 1e-12 * sum);
    }
}

#[test]
fn interface_weights_move_towards_softer_side() {
    let mut previous = 0.0;
    for k1 in [1.0, 10.0, 1e2, 1e3, 1e4] {
        let params = CouplingParams::new(k1, 1.0, 1e-2, Method::NitscheI).unwrap();
        let c = segment_coefficients(0.1, 0.1, &params).unwrap();
        assert_eq!(c.w1 + c.w2, 1.0);
        assert!(c.w2 > previous);
        previous = c.w2;
    }
}

#[test]
fn minimum_angle_stays_bounded_under_adaptivity() {
    use nitsche_mortar::driver::{run_adaptive, Geometry, ProblemConfig};
    let config = ProblemConfig {
        geometry: Geometry::LShape { n: 2 },
        max_steps: 11,
        max_dofs: usize::MAX,
        ..Default::default()
    };
    let mut angles = Vec::new();
    let mut observer = |view: &nitsche_mortar::driver::StepView<'_>| {
        angles.push(view.meshes[0].min_angle().min(view.meshes[1].min_angle()));
        Ok(())
    };
    run_adaptive(&config, Some(&mut observer)).unwrap();
    assert_eq!(angles.len(), 11);
    // bound recorded after the first refinement
    let bound = angles[1];
    assert!(bound > 0.3, "{bound}");
    for (i, a) in angles.iter().enumerate() {
        assert!(*a >= bound - 1e-12, "step {i}: {a} < {bound}");
    }
}

#[test]
fn consistent_on_interpolated_linear_solution() {
    // u₁ = x, u₂ = 1 + (k₁/k₂)(x - 1) has continuous value and flux, zero load
    let (k1, k2) = (4.0, 0.5);
    let (m1, m2) = build_two_rectangles(3, 4, 5, 3).unwrap();
    let interface = intersect_interface(&m1, &m2).unwrap();
    for method in Method::NITSCHE {
        let params = CouplingParams::new(k1, k2, 1e-2, method).unwrap();
        let a = assemble_system([&m1, &m2], &interface, &params).unwrap();
        let dofmap = DofMap::new([&m1, &m2], None);
        let mut u = vec![0.0; dofmap.len()];
        for (v, p) in m1.vertices().iter().enumerate() {
            u[dofmap.vertex_dof(0, v)] = p.x;
        }
        for (v, p) in m2.vertices().iter().enumerate() {
            u[dofmap.vertex_dof(1, v)] = 1.0 + k1 / k2 * (p.x - 1.0);
        }
        let r = a.matvec(&u);
        let worst = dofmap
            .free_dofs()
            .iter()
            .map(|&d| r[d].abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{method}: {worst:e}");
    }
}

#[test]
fn assembly_is_bitwise_deterministic() {
    let (m1, m2) = build_lshape(5).unwrap();
    let m1 = refine_rgb(&m1, &pick_marks(&m1, &[3, 17, 40])).unwrap();
    let interface = intersect_interface(&m1, &m2).unwrap();
    for method in Method::ALL {
        let params = CouplingParams::new(2.0, 1.0, 1e-2, method).unwrap();
        let a = assemble_system([&m1, &m2], &interface, &params).unwrap();
        let b = assemble_system([&m1, &m2], &interface, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.symmetry_defect(), 0.0);
    }
}
