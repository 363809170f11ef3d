//! Fixtures shared by the benchmarks.

use halbach_core::{HarmonicTruncation, MotorDesign};

/// Reference machines benchmarked: (label, design).
pub fn designs() -> Vec<(&'static str, MotorDesign)> {
    [(2, 3, false), (4, 3, true), (5, 5, false)]
        .into_iter()
        .map(|(nm, phases, bi)| {
            let label = match (nm, bi) {
                (2, _) => "nm2-open",
                (4, _) => "nm4-iron",
                _ => "nm5-open",
            };
            (label, MotorDesign::reference(nm, phases, bi).expect("reference design"))
        })
        .collect()
}

pub fn truncations() -> [HarmonicTruncation; 3] {
    [19, 99, 199].map(|n| HarmonicTruncation::new(n).expect("odd truncation"))
}
