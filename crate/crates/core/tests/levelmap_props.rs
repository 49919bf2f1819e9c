use adiabatic_core::spectra::level_map;
use adiabatic_core::{group_index, Group, IndicatorSequence, IndicatorSource, SpectralSnapshot};
use proptest::prelude::*;

/// Level numbers after sorting the union of two energy lists, computed
/// without the indicator machinery: `(group, in-group index) -> level`.
fn sorted_positions(g1: &[f64], g2: &[f64]) -> Vec<(Group, usize, u64)> {
    let mut all: Vec<(f64, Group, usize)> = g1
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, Group::I, i + 1))
        .chain(g2.iter().enumerate().map(|(i, &e)| (e, Group::II, i + 1)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.into_iter()
        .enumerate()
        .map(|(k, (_, g, i))| (g, i, k as u64 + 1))
        .collect()
}

/// Brute-force map: find the level's group and index at the first moment
/// and look up the same pair at the second.
fn oracle_map(a1: &[f64], a2: &[f64], b1: &[f64], b2: &[f64]) -> Vec<u64> {
    let before = sorted_positions(a1, a2);
    let after = sorted_positions(b1, b2);
    before
        .iter()
        .map(|&(g, i, _)| after.iter().find(|&&(h, j, _)| h == g && j == i).unwrap().2)
        .collect()
}

/// Increasing list whose entries share the residue `offset` mod 2, so lists
/// with different offsets never coincide.
fn ladder(steps: Vec<u32>, offset: u32) -> Vec<f64> {
    let mut acc = 0u64;
    steps
        .into_iter()
        .map(|s| {
            acc += 2 * u64::from(s);
            (acc + u64::from(offset)) as f64
        })
        .collect()
}

fn spectra_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (0usize..=100, 0usize..=100)
        .prop_filter("need at least one level", |(n1, n2)| n1 + n2 > 0)
        .prop_flat_map(|(n1, n2)| {
            let steps = |n| prop::collection::vec(1u32..40, n);
            (steps(n1), steps(n2), steps(n1), steps(n2))
        })
        .prop_map(|(a1, a2, b1, b2)| (ladder(a1, 0), ladder(a2, 1), ladder(b1, 1), ladder(b2, 0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn forward_map_matches_sort_and_match((a1, a2, b1, b2) in spectra_pair()) {
        let s1 = SpectralSnapshot::new("first", a1.clone(), a2.clone()).unwrap();
        let s2 = SpectralSnapshot::new("second", b1.clone(), b2.clone()).unwrap();
        let mut map = level_map(&s1, &s2);
        let expected = oracle_map(&a1, &a2, &b1, &b2);
        for (k, &kbar) in expected.iter().enumerate() {
            prop_assert_eq!(map.map_forward(k as u64 + 1).unwrap(), kbar);
        }
    }

    #[test]
    fn map_is_a_group_preserving_monotone_bijection((a1, a2, b1, b2) in spectra_pair()) {
        let s1 = SpectralSnapshot::new("first", a1, a2).unwrap();
        let s2 = SpectralSnapshot::new("second", b1, b2).unwrap();
        let mut map = level_map(&s1, &s2);
        let n = s1.level_count() as u64;
        let images: Vec<u64> = (1..=n).map(|k| map.map_forward(k).unwrap()).collect();

        let mut sorted = images.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=n).collect::<Vec<_>>());

        let mut last = [0u64; 2];
        for (k, &kbar) in (1..=n).zip(&images) {
            let (g, i) = group_index(k, &mut map.sigma1).unwrap();
            let (h, j) = group_index(kbar, &mut map.sigma2).unwrap();
            prop_assert_eq!(g, h);
            prop_assert_eq!(i, j);
            prop_assert_eq!(map.sigma2.group(kbar).unwrap(), map.sigma1.group(k).unwrap());
            prop_assert_eq!(map.map_backward(kbar).unwrap(), k);
            let slot = usize::from(g == Group::II);
            prop_assert!(kbar > last[slot]);
            last[slot] = kbar;
        }
    }

    #[test]
    fn prefix_sums_are_walks(signs in prop::collection::vec(prop::bool::ANY, 0..300)) {
        let groups: Vec<Group> = signs.iter().map(|&b| if b { Group::I } else { Group::II }).collect();
        let mut seq = IndicatorSequence::from_groups(groups.clone());
        prop_assert!(seq.check_prefix_consistency());
        let prefix = seq.prefix_sums().to_vec();
        prop_assert_eq!(prefix[0], 0);
        for (k, g) in groups.iter().enumerate() {
            prop_assert_eq!(prefix[k + 1] - prefix[k], g.sign());
            prop_assert_eq!(seq.prefix_sum(k as u64 + 1).unwrap(), prefix[k + 1]);
            let (h, i) = group_index(k as u64 + 1, &mut seq).unwrap();
            prop_assert_eq!(h, *g);
            prop_assert_eq!(seq.position_of(h, i).unwrap(), k as u64 + 1);
        }
    }
}
