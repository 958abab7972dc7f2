use circadia_core::pattern::*;
use circadia_core::synth::{gen_user, CorpusSpec};
use circadia_core::timeseries::window_slice;
use std::collections::BTreeMap;

fn main() {
    let cfg = SleepClassifierConfig::default();
    for (pi, pattern) in [PatternLabel::Valley, PatternLabel::Downward, PatternLabel::Peak].into_iter().enumerate() {
        let spec = CorpusSpec::new(1, 400, 0.02, 1000 + pi as u64);
        let days = gen_user(pattern, &spec, pi).unwrap();
        let mut outcomes: BTreeMap<PatternLabel, usize> = BTreeMap::new();
        for day in &days {
            let w = window_slice(day, 0, 8).unwrap();
            *outcomes.entry(classify_sleep_pattern(&w, &cfg).unwrap()).or_insert(0) += 1;
        }
        println!("{:10} -> {:?}", pattern.as_str(), outcomes);
    }
}
