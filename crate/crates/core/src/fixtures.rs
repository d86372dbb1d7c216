//! Reference populations used by tests, examples and the CLI.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Appliance, AppliancePopulation, TransitionModel};

fn appliance(id: &str, rows: &[(f64, f64, f64)]) -> Appliance {
    Appliance::new(
        id,
        rows.iter()
            .map(|&(mean, std, pi)| TransitionModel::gaussian(mean, std, pi).expect("fixture"))
            .collect(),
    )
}

/// Three appliances, five transitions. Appliance 2's low mode overlaps
/// appliance 1 and its high mode overlaps appliance 3. Participation is
/// rounded and sums to 0.998.
pub fn three_appliances() -> AppliancePopulation {
    AppliancePopulation::new(vec![
        appliance("1", &[(210.0, 10.0, 0.193), (400.0, 20.0, 0.096)]),
        appliance("2", &[(220.0, 12.0, 0.322), (1080.0, 30.0, 0.258)]),
        appliance("3", &[(1100.0, 40.0, 0.129)]),
    ])
}

/// Seven household appliances (dishwasher, refrigerator, washer/drier,
/// microwave, kitchen outlets, oven, bathroom GFI), ten transitions.
pub fn redd_seven() -> AppliancePopulation {
    AppliancePopulation::new(vec![
        appliance(
            "DW",
            &[(200.0, 10.0, 0.1460), (400.0, 20.0, 0.0243), (1000.0, 50.0, 0.0609)],
        ),
        appliance("RFG", &[(200.0, 20.0, 0.2705), (400.0, 40.0, 0.0845)]),
        appliance("WD", &[(2800.0, 37.0, 0.0372)]),
        appliance("MW", &[(1500.0, 10.0, 0.2272)]),
        appliance("KO", &[(1070.0, 32.0, 0.0811)]),
        appliance("OV", &[(4142.0, 27.0, 0.0426)]),
        appliance("BGFI", &[(1600.0, 12.0, 0.0257)]),
    ])
}

/// Event counts per transition that reproduce [`three_appliances`]'s participation.
pub fn three_appliance_counts() -> Vec<Vec<u64>> {
    vec![vec![193, 96], vec![322, 258], vec![129]]
}
