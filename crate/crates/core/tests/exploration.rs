use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unimap::explore::{
    bad_pair_threshold, coupling_tree_levels, explore_one, explore_one_from, explore_two, find_bad_pairs,
    web_constraint_holds, ProcessTwoConfig, Thresholds,
};
use unimap::quotient::{bfs_distances, glue};
use unimap::sample::sample_marked_tree;
use unimap::stats::stream_rng;

#[test]
fn rounds_match_quotient_spheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.random_range(1..=60);
        let g = rng.random_range(0..=n / 2);
        let (mt, _) = sample_marked_tree(n, g, &mut rng).unwrap();
        let start = rng.random_range(0..mt.mark_count());
        let trace = explore_one_from(&mt, start, None, &mut rng);
        let gq = glue(&mt);
        let dist = bfs_distances(&gq, start).unwrap();
        let reached = dist.iter().filter(|&&d| d != u32::MAX).count();
        let mut seen = 0;
        for (r, layer) in trace.rounds.iter().enumerate() {
            let mut classes: Vec<u32> = layer.iter().map(|&v| mt.marks()[v as usize]).collect();
            classes.sort_unstable();
            classes.dedup();
            let sphere: Vec<u32> = (0..gq.vertex_count() as u32).filter(|&c| dist[c as usize] as usize == r).collect();
            assert_eq!(classes, sphere, "n = {n}, g = {g}, round {r}");
            seen += classes.len();
        }
        assert_eq!(seen, reached);
    }
}

#[test]
fn separated_seeds_keep_the_web_constraint() {
    let n = 100_000;
    let mut clean = 0;
    for i in 0..200 {
        let mut rng = stream_rng(12, n as u64, i);
        // low genus: mostly singleton classes, so few seeds
        let (mt, _) = sample_marked_tree(n, n / 100, &mut rng).unwrap();
        let trace = explore_one(&mt, Some(Thresholds::process_one(n)), &mut rng);
        let index = mt.tree().index();
        if !find_bad_pairs(&index, &trace.seeds, bad_pair_threshold(n)).is_empty() {
            continue;
        }
        clean += 1;
        assert!(web_constraint_holds(&index, &trace.revealed, &trace.seeds), "trial {i}");
    }
    assert!(clean >= 100, "only {clean} traces without bad pairs");
}

#[test]
fn process_two_worms_and_stages_are_disjoint() {
    for i in 0..200 {
        let mut rng = stream_rng(13, 0, i);
        let n = rng.random_range(50..3000);
        let (mt, _) = sample_marked_tree(n, n / 4, &mut rng).unwrap();
        let config = ProcessTwoConfig::for_n(n).with_death_radius(rng.random_range(0.0..6.0));
        let run = explore_two(&mt, config, &mut rng).unwrap();
        for worms in [&run.worms1, &run.worms2] {
            let mut used = HashSet::new();
            for w in worms.iter() {
                assert_eq!(w.body.first(), Some(&w.seed));
                assert_eq!(w.body.last(), Some(&w.head));
                for &v in &w.body {
                    assert!(used.insert(v), "trial {i}: vertex {v} in two worms");
                }
            }
        }
        // the second stage stops at its first contact, so apart from the
        // colliding step it never touches first-stage territory
        let first: HashSet<u32> = run.stage1.revealed.iter().chain(&run.stage1.dead).copied().collect();
        let overlap = run.stage2.revealed.iter().filter(|v| first.contains(v)).count();
        if !run.collided() {
            assert_eq!(overlap, 0, "trial {i}");
        }
        let levels = coupling_tree_levels(&run.stage1);
        assert_eq!(levels[0], 1);
        assert!(levels.iter().sum::<usize>() <= run.stage1.revealed.len() + run.stage1.dead.len());
    }
}

#[test]
fn coupling_levels_dominate_two_point_means() {
    let k0 = 0.1;
    let rounds = 4;
    let n = 4096;
    let mut sums = vec![0.0; rounds + 1];
    let mut counts = vec![0usize; rounds + 1];
    for i in 0..300 {
        let mut rng = stream_rng(14, n as u64, i);
        let (mt, _) = sample_marked_tree(n, n / 4, &mut rng).unwrap();
        let run = explore_two(&mt, ProcessTwoConfig::for_n(n).with_death_radius(2.0), &mut rng).unwrap();
        if run.disaster() {
            continue;
        }
        for (r, &z) in coupling_tree_levels(&run.stage1).iter().enumerate().take(rounds + 1) {
            sums[r] += z as f64;
            counts[r] += 1;
        }
    }
    for r in 1..=rounds {
        assert!(counts[r] >= 100, "round {r}: {} runs", counts[r]);
        let mean = sums[r] / counts[r] as f64;
        let bound = (1.0 + k0 / 2.0f64).powi(r as i32);
        assert!(mean >= bound, "round {r}: mean {mean} below {bound}");
    }
}
