use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spectragraph::analysis::trials::{random_delta_problem, random_problem};
use spectragraph::fem::{eigenvalues_fem, mesh_counts, assemble_with_counts, eigenvalues_fem_of};
use spectragraph::linalg::max_principal_angle;
use spectragraph::secular::count_below;
use spectragraph::shrinkage::{check_hypothesis, ShrinkPlan};
use spectragraph::surgery::{random_custom_condition, Generator};
use spectragraph::{
    condition_from_subspace, eigenfunctions_of, eigenvalues, first_eigenvalues, from_family, fundamental_system, Edge,
    Family, MetricGraph, Potential, SchrodingerProblem, SpectrumRequest, VertexCondition, VertexSpec,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw<T>(seed: u64, mut f: impl FnMut(&mut Generator) -> Option<T>) -> T {
    let mut r = rng(seed);
    loop {
        if let Some(x) = f(&mut Generator::new(&mut r)) {
            return x;
        }
    }
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Family::Delta),
        Just(Family::kirchhoff()),
        prop_oneof![-3.0..-0.05f64, 0.05..3.0f64].prop_map(Family::DeltaPrime),
        Just(Family::AntiKirchhoff),
        Just(Family::Dirichlet),
        Just(Family::Neumann),
    ]
}

fn projection_defects(c: &VertexCondition) -> f64 {
    let d = c.degree;
    let id = spectragraph::linalg::Mat::identity(d, d);
    let mut worst = (&c.pd + &c.pn + &c.pr - &id).amax();
    for p in [&c.pd, &c.pn, &c.pr] {
        worst = worst.max((p * p - p).amax()).max((p - p.transpose()).amax());
    }
    for (a, b) in [(&c.pd, &c.pn), (&c.pd, &c.pr), (&c.pn, &c.pr)] {
        worst = worst.max((a * b).amax());
    }
    worst
}

fn edge_with(len: f64, values: Vec<f64>) -> Edge {
    let breaks: Vec<f64> = (1..values.len()).map(|i| len * i as f64 / values.len() as f64).collect();
    Edge { id: "e".into(), origin: 0, terminus: 1, length: len, potential: Potential::piecewise(breaks, values) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    // κL ≤ 5 along the edge, so the entries of the transfer matrix stay
    // below e⁵ and c s′ − s c′ is formed without cancellation
    #[test]
    fn wronskian_is_one(
        len in 0.05..3.0f64,
        u in 0.0..1.0f64,
        values in prop::collection::vec(-10.0..10.0f64, 1..4),
    ) {
        let qmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = (qmax - 25.0 / (len * len)).max(-100.0);
        let lambda = lo + u * (1000.0 - lo);
        let det = fundamental_system(&edge_with(len, values), lambda).det();
        prop_assert!((det - 1.0).abs() < 1e-10, "det = {det}");
    }

    // deeper in the hyperbolic regime the determinant is a difference of
    // numbers of size ‖T‖², so only relative accuracy is meaningful
    #[test]
    fn wronskian_deep_hyperbolic(
        len in 0.05..3.0f64,
        lambda in -100.0..0.0f64,
        values in prop::collection::vec(-10.0..10.0f64, 1..4),
    ) {
        let t = fundamental_system(&edge_with(len, values), lambda);
        let det = t.det();
        let scale = t.scaled.norm_squared() * (2.0 * t.log_scale).exp();
        prop_assert!((det - 1.0).abs() < 1e-14 * scale.max(1.0), "det = {det}, |T|^2 = {scale:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn named_conditions_round_trip(f in family(), d in 1usize..=4) {
        let c = from_family(f, d).unwrap();
        prop_assert!(projection_defects(&c) < 1e-12);
        let back = condition_from_subspace(&c.admissible_subspace()).unwrap();
        let angle = max_principal_angle(&c.admissible_subspace(), &back.admissible_subspace(), 1e-10);
        prop_assert!(angle < 1e-9, "{f:?} at degree {d}: angle {angle}");
    }

    #[test]
    fn custom_conditions_are_projections(seed in any::<u64>(), d in 1usize..=4, robin in 0usize..=1) {
        let c = random_custom_condition(&mut rng(seed), d, robin.min(d));
        prop_assert!(projection_defects(&c) < 1e-12);
        let back = condition_from_subspace(&c.admissible_subspace()).unwrap();
        prop_assert!(max_principal_angle(&c.admissible_subspace(), &back.admissible_subspace(), 1e-10) < 1e-9);
    }

    #[test]
    fn rebuilding_is_bit_identical(seed in any::<u64>()) {
        let p = draw(seed, random_delta_problem);
        let q = SchrodingerProblem::from_parts(&p.vertex_specs(), &p.edge_specs()).unwrap();
        prop_assert_eq!(&p, &q);
        let ids = p.graph().vertex_ids().to_vec();
        let g = MetricGraph::build(&ids, &p.edge_specs()).unwrap();
        prop_assert_eq!(p.graph(), &g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn all_delta_hypothesis_holds(seed in any::<u64>(), mask in any::<u32>()) {
        let p = draw(seed, random_delta_problem);
        let flags: Vec<bool> = (0..p.graph().edge_count()).map(|e| mask >> e & 1 == 1).collect();
        let plan = ShrinkPlan::from_flags(&flags);
        prop_assert!(check_hypothesis(&p, &plan).holds);
    }

    #[test]
    fn nonnegative_couplings_give_nonnegative_spectrum(seed in any::<u64>()) {
        let p = draw(seed, |g| random_problem(g, (0.0, 2.0), &mut |g, _, _| VertexSpec::Family(Family::Delta(g.rng_range(0.0, 2.0)))));
        let l = first_eigenvalues(&p, 1).unwrap()[0];
        prop_assert!(l >= -1e-10, "lambda1 = {l}");
    }

    #[test]
    fn secular_and_fem_counts_agree(seed in any::<u64>()) {
        let p = draw(seed, |g| random_problem(g, (-1.0, 2.0), &mut |g, _, d| g.any_condition(d)));
        let s = eigenvalues(&p, SpectrumRequest::window(f64::NEG_INFINITY, 40.0)).unwrap().flat();
        // count at the middle of the widest gap, away from every eigenvalue
        let mut cut = (s.last().copied().unwrap_or(0.0) + 40.0) / 2.0;
        let mut width = 40.0 - s.last().copied().unwrap_or(0.0);
        for w in s.windows(2) {
            if w[1] - w[0] > width {
                width = w[1] - w[0];
                cut = (w[0] + w[1]) / 2.0;
            }
        }
        let exact = count_below(&p, cut);
        let f = eigenvalues_fem(&p, exact + 1, 1.0 / 64.0).unwrap().flat();
        let fem = f.iter().filter(|&&x| x < cut).count();
        prop_assert_eq!(exact, fem, "cut {} secular {:?} fem {:?}", cut, s, f);
    }

    #[test]
    fn fem_is_monotone_under_refinement(seed in any::<u64>()) {
        let p = draw(seed, |g| random_problem(g, (-1.0, 2.0), &mut |g, _, d| g.any_condition(d)));
        let base = mesh_counts(&p, 1.0 / 32.0).unwrap();
        let mut last: Option<Vec<f64>> = None;
        for level in 0..3 {
            let counts: Vec<usize> = base.iter().map(|n| n << level).collect();
            // roundoff of the Cholesky-reduced dense solve: √n·ε·‖K‖‖M⁻¹‖ with ‖K‖‖M⁻¹‖ ≲ 24/h²
            let h = p.graph().edges().iter().zip(&counts).map(|(e, &n)| e.length / n as f64).fold(f64::INFINITY, f64::min);
            let d = assemble_with_counts(&p, &counts).unwrap();
            let floor = (d.reduced_dim() as f64).sqrt() * 24.0 * f64::EPSILON / (h * h);
            let v = eigenvalues_fem_of(&d, 6).unwrap().first(6);
            if let Some(prev) = &last {
                for (a, b) in prev.iter().zip(&v) {
                    prop_assert!(*b <= a + 1e-12 * (1.0 + a.abs()) + floor, "{a} -> {b}");
                }
            }
            last = Some(v);
        }
        let exact = first_eigenvalues(&p, 6).unwrap();
        for (f, s) in last.unwrap().iter().zip(&exact) {
            prop_assert!(*f >= s - 1e-9 * (1.0 + s.abs()), "fem {f} below secular {s}");
        }
    }

    #[test]
    fn eigenfunctions_satisfy_vertex_conditions(seed in any::<u64>()) {
        let p = draw(seed, |g| random_problem(g, (-1.0, 2.0), &mut |g, _, d| g.any_condition(d)));
        let s = eigenvalues(&p, SpectrumRequest::first(4)).unwrap();
        for v in &s.values {
            for f in eigenfunctions_of(&p, v).unwrap() {
                let worst = f.vertex_residuals(&p).iter().flatten().fold(0.0f64, |m, r| m.max(*r));
                prop_assert!(worst < 1e-8, "lambda {} residual {worst}", v.value);
            }
        }
    }
}
