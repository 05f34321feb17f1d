use proptest::prelude::*;
use tspkern::oracle::{equivalent, solve, Engine, OracleCaps};
use tspkern::pipeline::{kernelize, KernelConfig, Pipeline};
use tspkern::preprocess::{compress_weights, encoding_bits, Verdict};
use tspkern::{parse_instance, Instance};

/// Small Subset TSP or waypoint routing instance, at most 10 edges.
fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=7).prop_flat_map(|n| {
        let edge = (0..n, 0..n, 0u64..12, 1u64..=2);
        (
            Just(n),
            prop::collection::vec(edge, 1..=10),
            prop::collection::vec(any::<bool>(), n),
            0i64..40,
            any::<bool>(),
        )
            .prop_filter_map("needs an edge without self-loops", |(n, edges, wps, budget, wrp)| {
                let edges: Vec<_> = edges.into_iter().filter(|&(u, v, _, _)| u != v).collect();
                if edges.is_empty() {
                    return None;
                }
                let wps: Vec<usize> = (0..n).filter(|&v| wps[v]).collect();
                if wrp {
                    Instance::wrp(n, &edges, &wps, budget).ok()
                } else {
                    let plain: Vec<_> = edges.iter().map(|&(u, v, w, _)| (u, v, w)).collect();
                    Instance::subtsp(n, &plain, &wps, budget).ok()
                }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parse_round_trip(inst in instance()) {
        prop_assert_eq!(parse_instance(&inst.render()).unwrap(), inst);
    }

    #[test]
    fn fes_kernel_is_equivalent_and_a_fixpoint(inst in instance()) {
        let caps = OracleCaps::default();
        let config = KernelConfig::new(Pipeline::Fes);
        let res = kernelize(&inst, &config).unwrap();
        prop_assert!(res.report.bounds_hold());
        let yes = solve(&inst, &caps, Engine::Auto).unwrap().feasible;
        match res.instance() {
            None => prop_assert_eq!(res.report.decided, Some(yes)),
            Some(kernel) => {
                prop_assert!(equivalent(&inst, kernel, &caps).unwrap());
                let again = kernelize(kernel, &config).unwrap();
                prop_assert!(again.instance().is_some_and(|k| k.n == kernel.n && k.m() == kernel.m()));
            }
        }
    }

    #[test]
    fn compression_never_grows_and_keeps_the_answer(inst in instance()) {
        let out = compress_weights(&inst);
        if let Verdict::Reduced(small) = &out.verdict {
            let bits = |i: &Instance| encoding_bits(&i.edges.iter().map(|e| e.weight).collect::<Vec<_>>(), i.budget);
            prop_assert!(bits(small) < bits(&inst));
            prop_assert!(equivalent(&inst, small, &OracleCaps::default()).unwrap());
        }
    }
}
