use ddm_core::ddm::DdmConfig;
use ddm_core::extract::{build_population, DistKind, ExtractConfig};
use ddm_core::fixtures;
use ddm_core::synth::{synthesize_signals, SynthConfig};
use ddm_core::{Appliance, AppliancePopulation, Evaluator, Partition, TransitionModel};

fn two_modes() -> AppliancePopulation {
    AppliancePopulation::new(vec![
        Appliance::new("fridge", vec![TransitionModel::gaussian(100.0, 3.0, 0.6).unwrap()]),
        Appliance::new("kettle", vec![TransitionModel::gaussian(2000.0, 15.0, 0.4).unwrap()]),
    ])
}

#[test]
fn recovers_two_known_modes() {
    let signals = synthesize_signals(&two_modes(), &SynthConfig { pulses: 400, ..Default::default() }).unwrap();
    let build = build_population(&signals, &ExtractConfig::default()).unwrap();
    let means: Vec<f64> = build.population.transitions().map(|(_, t)| t.distribution.mean()).collect();
    assert_eq!(means.len(), 2);
    assert!((means[0] - 100.0).abs() < 2.0, "{means:?}");
    assert!((means[1] - 2000.0).abs() < 2.0, "{means:?}");
}

#[test]
fn smoothed_histograms_track_gaussian_fits() {
    let truth = fixtures::three_appliances().renormalize().unwrap();
    let signals = synthesize_signals(&truth, &SynthConfig::default()).unwrap();
    let gauss = build_population(&signals, &ExtractConfig::default()).unwrap().population;
    let wma_config = ExtractConfig { dist: DistKind::wma_default(), ..Default::default() };
    let wma = build_population(&signals, &wma_config).unwrap().population;
    let p = Partition::single_block(3);
    let a = Evaluator::new(&gauss, DdmConfig::default()).unwrap().ddm_value(&p).unwrap();
    let b = Evaluator::new(&wma, DdmConfig::default()).unwrap().ddm_value(&p).unwrap();
    assert!((a - b).abs() < 0.05, "gaussian {a}, wma {b}");
}

#[test]
fn extraction_is_reproducible() {
    let signals = synthesize_signals(&fixtures::three_appliances(), &SynthConfig { pulses: 300, ..Default::default() }).unwrap();
    let a = build_population(&signals, &ExtractConfig::default()).unwrap();
    let b = build_population(&signals, &ExtractConfig::default()).unwrap();
    assert_eq!(a, b);
}
