use std::path::Path;

use stablebranch::config::ExperimentConfig;
use stablebranch::sim::Ensemble;
use stablebranch::spectral::{LambdaSign, SpectralData};
use stablebranch::verify::{LimitConstants, LimitLawReport};

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

#[test]
fn shipped_configs_round_trip() {
    for name in ["example1.toml", "acceptance.toml", "ball.toml"] {
        let cfg = load(name);
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg.hash(), again.hash(), "{name}");
    }
}

#[test]
fn point_config_spectrum_matches_simulator() {
    let cfg = load("example1.toml");
    let data = SpectralData::compute(&cfg.spec().unwrap()).unwrap();
    assert_eq!(data.sign, LambdaSign::Negative);
    assert!((data.lambda.unwrap() + 1.8247119618832608).abs() < 1e-10);
    let sim = cfg.simulator().unwrap();
    let constants = LimitConstants::from_simulator(&sim).unwrap();
    assert!(constants.lambda < 0.0 && constants.lambda > data.lambda.unwrap());
    assert!(constants.h_x0 > 0.0 && constants.c_star > 0.0);
}

#[test]
fn ball_config_has_no_limit_constants() {
    let cfg = load("ball.toml");
    let sim = cfg.simulator().unwrap();
    assert!(LimitConstants::from_simulator(&sim).is_none());
}

#[test]
fn ensemble_csv_round_trip_and_report() {
    let mut cfg = load("example1.toml");
    cfg.sim.horizon = 1.0;
    cfg.sim.checkpoints = vec![0.5, 1.0];
    let sim = cfg.simulator().unwrap();
    let a = sim.ensemble(300, 1).unwrap();
    let b = sim.ensemble(300, 2).unwrap();

    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    let back = Ensemble::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    let mut again = Vec::new();
    back.write_csv(&mut again).unwrap();
    assert_eq!(buf, again);

    let constants = LimitConstants::from_simulator(&sim).unwrap();
    let report = LimitLawReport::build(&a, &b, constants, &[1.0, 2.0], &[0.5, 1.0], 2.0).unwrap();
    let flags = report.flags();
    assert!(flags.iter().any(|f| f.name == "weak_within_3sigma"));
    assert!(flags.iter().all(|f| !f.detail.is_empty()));
}
