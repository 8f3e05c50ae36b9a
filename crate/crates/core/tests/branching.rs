use unimap::gw::{normalized_means, simulate_gw, OffspringSpec};
use unimap::stats::stream_rng;

#[test]
fn normalized_levels_are_martingales() {
    let specs = [
        OffspringSpec::geometric_half(),
        OffspringSpec::two_point(0.1).unwrap(),
        OffspringSpec::parse("0:0.2,1:0.3,2:0.3,3:0.2").unwrap(),
    ];
    for (s, spec) in specs.iter().enumerate() {
        let means = normalized_means(spec, 20, 20_000, 100 + s as u64).unwrap();
        assert_eq!(means.len(), 21);
        for (r, &(mean, se)) in means.iter().enumerate() {
            if r == 0 {
                assert_eq!(mean, 1.0);
                continue;
            }
            assert!((mean - 1.0).abs() <= 3.0 * se, "spec {s}, r = {r}: {mean} ± {se}");
        }
    }
}

#[test]
fn two_point_law_never_dies() {
    let spec = OffspringSpec::two_point(0.1).unwrap();
    for i in 0..2000 {
        let levels = simulate_gw(&spec, 60, &mut stream_rng(21, 0, i)).unwrap();
        assert!(levels.iter().all(|&z| z >= 1));
        assert!(levels.windows(2).all(|w| w[1] >= w[0]));
    }
}
