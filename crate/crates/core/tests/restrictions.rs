use mipcore::{solve_mip, BnbStatus, SolveConfig};
use proptest::prelude::*;
use vaxnet::formulation::{FREQUENCY_GROUP, LOCATION_GROUP};
use vaxnet::{build_program1, generate_instance, oracle_enumerate, restrict_frequencies, restrict_locations, Density, GeneratorConfig};

fn small_instance(seed: u64, hubs: usize, clinics: usize, density: usize) -> vaxnet::Instance {
    let cfg = GeneratorConfig { seed, n_hubs: hubs, n_clinics: clinics, density: Density::ALL[density], ..GeneratorConfig::default() };
    generate_instance(&cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn restriction_rows_come_off_as_a_unit(
        seed in any::<u64>(),
        hubs in 1usize..4,
        clinics in 1usize..6,
        density in 0usize..3,
        f in proptest::collection::vec(0u8..=2, 3),
        l in proptest::collection::vec(0u8..=1, 3),
    ) {
        let inst = small_instance(seed, hubs, clinics, density);
        let (model, idx) = build_program1(&inst).unwrap();
        let mut by_f = restrict_frequencies(&model, &idx, &f[..hubs]).unwrap();
        prop_assert_eq!(by_f.num_constraints(), model.num_constraints() + hubs);
        let again = restrict_frequencies(&model, &idx, &f[..hubs]).unwrap();
        prop_assert_eq!(&by_f, &again);
        prop_assert_eq!(by_f.remove_group(FREQUENCY_GROUP), hubs);
        prop_assert_eq!(&by_f, &model);

        let mut by_l = restrict_locations(&model, &idx, &l[..hubs]).unwrap();
        prop_assert_eq!(by_l.remove_group(LOCATION_GROUP), hubs);
        prop_assert_eq!(&by_l, &model);
    }

    #[test]
    fn restricted_optimum_never_beats_the_full_one(
        seed in any::<u64>(),
        hubs in 1usize..3,
        clinics in 1usize..4,
        density in 0usize..3,
        f in proptest::collection::vec(0u8..=2, 2),
    ) {
        let inst = small_instance(seed, hubs, clinics, density);
        let best = oracle_enumerate(&inst).unwrap();
        let (model, idx) = build_program1(&inst).unwrap();
        let cfg = SolveConfig::default();

        // Closing hubs keeps direct service available, so this is feasible.
        let restricted = solve_mip(&restrict_frequencies(&model, &idx, &f[..hubs]).unwrap(), &cfg);
        prop_assert_eq!(restricted.status, BnbStatus::Optimal);
        prop_assert!(restricted.objective >= best.objective - 1e-6);

        // Restricting to the optimum's own hub pattern keeps the optimum.
        let x = vaxnet::formulation::encode_design(&idx, &best.configuration.design, &best.configuration.flows);
        let (l_opt, f_opt) = idx.hub_status(&x);
        let own_f = solve_mip(&restrict_frequencies(&model, &idx, &f_opt).unwrap(), &cfg);
        let own_l = solve_mip(&restrict_locations(&model, &idx, &l_opt).unwrap(), &cfg);
        prop_assert!((own_f.objective - best.objective).abs() <= 1e-6);
        prop_assert!((own_l.objective - best.objective).abs() <= 1e-6);
    }
}
