use std::collections::BTreeMap;
use std::io::BufReader;

use ipdsaw_core::beads::{bead_survey, decompose, i_max};
use ipdsaw_core::exact::{
    enumerate_all, exact_polynomial, excursion_table, stretch_dp, TableBudget, Trajectory, Variant, ENUMERATE_MAX,
};
use ipdsaw_core::io::{read_excursion_csv, read_series_csv, write_excursion_csv, write_series_csv, Sidecar};
use ipdsaw_core::sampling::sample_polymer;
use ipdsaw_core::ModelParams;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn polynomial_mode_matches_enumeration_up_to_the_limit() {
    for l in 13..=ENUMERATE_MAX {
        let brute: BTreeMap<u64, BigUint> = enumerate_all(l)
            .unwrap()
            .into_iter()
            .map(|(m, c)| (m, BigUint::from(c)))
            .collect();
        assert_eq!(exact_polynomial(l).unwrap(), brute, "L = {l}");
    }
}

#[test]
fn decomposition_round_trips_on_random_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100_000 {
        let len = rng.random_range(0..40);
        let stretches: Vec<i64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0
                } else {
                    rng.random_range(-9..=9)
                }
            })
            .collect();
        let t = Trajectory::new(stretches);
        let d = decompose(&t);
        let mut joined: Vec<i64> = (0..d.bead_count()).flat_map(|j| d.segment(&t, j).to_vec()).collect();
        joined.extend(std::iter::repeat_n(0, d.trailing_zeros as usize));
        assert_eq!(joined, t.stretches);
        assert!(i_max(&t) <= t.length());
    }
}

#[test]
fn sampled_walks_feed_the_survey() {
    let p = ModelParams::new(2.0).unwrap();
    let batch = sample_polymer(&p, 120, 400, 5, &TableBudget::default()).unwrap();
    assert!(batch.trajectories.iter().all(|t| t.length() == 120));
    let ks: Vec<usize> = (0..=120).step_by(10).collect();
    let survey = bead_survey(&batch, &ks).unwrap();
    assert!(survey.is_monotone());
    assert_eq!(*survey.counts.last().unwrap(), 400);

    let mut csv = Vec::new();
    survey.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), ks.len() + 1);
}

#[test]
fn tables_survive_a_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("ipdsaw-core-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = ModelParams::new(2.5).unwrap();
    let budget = TableBudget::default();

    let series = stretch_dp(&p, 80, Variant::HatCirc, &budget).unwrap();
    let csv = dir.join("series.csv");
    write_series_csv(&series, std::fs::File::create(&csv).unwrap()).unwrap();
    std::fs::write(dir.join("series.json"), Sidecar::for_series(&series).to_json()).unwrap();
    let side = Sidecar::from_json(&std::fs::read_to_string(dir.join("series.json")).unwrap()).unwrap();
    let back = read_series_csv(&side, BufReader::new(std::fs::File::open(&csv).unwrap())).unwrap();
    assert_eq!(back, series);

    let table = excursion_table(&p, 12, 200, None, &budget).unwrap();
    let csv = dir.join("excursion.csv");
    write_excursion_csv(&table, std::fs::File::create(&csv).unwrap()).unwrap();
    let side = Sidecar::from_json(&Sidecar::for_excursion(&table).to_json()).unwrap();
    let back = read_excursion_csv(&side, BufReader::new(std::fs::File::open(&csv).unwrap())).unwrap();
    assert_eq!(back, table);

    std::fs::remove_dir_all(&dir).unwrap();
}
