//! Detector trace against the path-enumeration reference on a checked-in
//! fixed stream.

use wdcusum::detector::{DetectorParams, DetectorState};
use wdcusum::distributions::DensityPair;
use wdcusum::model::NetworkConfig;
use wdcusum::oracle::batch_statistic;

fn load_fixture() -> Vec<Vec<f64>> {
    let raw = include_str!("data/stream_m1n2L2.csv");
    raw.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut cols = l.split(',');
            let _k = cols.next().unwrap();
            cols.map(|c| c.parse::<f64>().unwrap()).collect()
        })
        .collect()
}

#[test]
fn golden_stream_matches_path_enumeration() {
    let pair = DensityPair::standard_gaussian_shift();
    let config = NetworkConfig::new(2, 1, 2).unwrap();
    let params = DetectorParams::new(vec![0.1], 5.0, &config).unwrap();
    let observations = load_fixture();
    assert_eq!(observations.len(), 5);

    let mut state = DetectorState::new(&config);
    for k in 1..=observations.len() {
        let table = wdcusum::mixture::phase_llrs(&pair, &config, &observations[k - 1]).unwrap();
        state.update(&params, &table).unwrap();
        let reference = batch_statistic(&observations[..k], &params, &pair, &config).unwrap();
        assert!(
            (state.statistic() - reference).abs() <= 1e-9,
            "k={k}: recursion {} vs enumeration {reference}",
            state.statistic()
        );
    }
}

#[test]
fn golden_stream_frozen_statistics() {
    // frozen from the enumeration reference; guards against regressions
    // in either path
    let pair = DensityPair::standard_gaussian_shift();
    let config = NetworkConfig::new(2, 1, 2).unwrap();
    let params = DetectorParams::new(vec![0.1], 5.0, &config).unwrap();
    let observations = load_fixture();

    let expected: [f64; 5] = [
        0.0,
        0.552000875146104,
        0.629500381358545,
        0.9,
        2.28,
    ];
    let mut state = DetectorState::new(&config);
    for (k, want) in (1..=observations.len()).zip(expected) {
        let table = wdcusum::mixture::phase_llrs(&pair, &config, &observations[k - 1]).unwrap();
        state.update(&params, &table).unwrap();
        assert!(
            (state.statistic() - want).abs() < 1e-9,
            "k={k}: {} vs frozen {want}",
            state.statistic()
        );
    }
}
