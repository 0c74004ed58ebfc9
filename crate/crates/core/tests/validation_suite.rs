use hamens::montecarlo::SamplerConfig;
use hamens::validation::{builtin_pairs, pair_label, run_all};

#[test]
fn builtin_pairs_pass_every_suite() {
    let pairs = builtin_pairs();
    assert_eq!(pairs.len(), 15);
    let labels: std::collections::HashSet<_> = pairs.iter().map(pair_label).collect();
    assert_eq!(labels.len(), 15);
    let checks = run_all(&pairs, &SamplerConfig::new(2024, 20_000)).unwrap();
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}
