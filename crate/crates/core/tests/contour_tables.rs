use std::collections::BTreeMap;

use proptest::prelude::*;
use stavskaya_core::contours::{
    compare_tables, s_table_recurrence, uncorrected_recurrence, AlphaPolynomial, DualBondType, Enumerator, PathFamily,
};

/// Walk counts per bond count built from a plain transfer over
/// `(last two bonds, endpoint)`, without any path objects.
fn oracle_counts(n_max: usize) -> Vec<BTreeMap<(u8, i64, i64, u32), u64>> {
    let shift = |b: u8| match b {
        1 => (-1, -1),
        2 => (2, 0),
        _ => (-1, 1),
    };
    let banned = |a: u8, b: u8, c: u8| matches!((b, c), (1, 3) | (3, 1)) || matches!((a, b, c), (1, 2, 3) | (3, 2, 1));
    // state: (before, last, i, t, horizontal) -> count
    let mut level: BTreeMap<(u8, u8, i64, i64, u32), u64> = BTreeMap::new();
    level.insert((0, 1, -1, -1, 0), 1);
    let mut out = Vec::new();
    for _ in 0..n_max {
        let mut summary = BTreeMap::new();
        for (&(_, last, i, t, h), &c) in &level {
            *summary.entry((last, i, t, h)).or_insert(0) += c;
        }
        out.push(summary);
        let mut next = BTreeMap::new();
        for (&(before, last, i, t, h), &c) in &level {
            for b in 1..=3u8 {
                if banned(before, last, b) {
                    continue;
                }
                let (di, dt) = shift(b);
                *next.entry((last, b, i + di, t + dt, h + u32::from(b == 2))).or_insert(0) += c;
            }
        }
        level = next;
    }
    out
}

#[test]
fn recurrence_matches_enumeration_through_twelve_bonds() {
    let enumerated = Enumerator::default().tables(12).unwrap();
    let recurrence = s_table_recurrence(12).unwrap();
    assert!(compare_tables(&enumerated, &recurrence).is_empty());
}

#[test]
fn enumeration_matches_independent_transfer_count() {
    let tables = Enumerator::default().tables(12).unwrap();
    let oracle = oracle_counts(12);
    for (table, expected) in tables.iter().zip(&oracle) {
        let mut seen = 0;
        for (&(r, i, t, h), &count) in expected {
            let poly = table.get(DualBondType::from_kind(r).unwrap(), i, t).unwrap();
            assert_eq!(poly.coefficient(h as usize), count, "n {} ({r},{i},{t}) alpha^{h}", table.bonds());
            seen += count;
        }
        assert_eq!(seen, table.total_paths());
    }
}

#[test]
fn path_totals() {
    let walks = [1, 2, 4, 9, 20, 44, 97, 214, 472, 1041, 2296, 5064];
    let avoiding = [1, 2, 4, 9, 20, 43, 94, 206, 447, 975, 2128, 4627];
    let free = Enumerator::default().tables(12).unwrap();
    let strict = Enumerator::with_family(PathFamily::SelfAvoiding).tables(12).unwrap();
    for n in 0..12 {
        assert_eq!(free[n].total_paths(), walks[n], "walks n={}", n + 1);
        assert_eq!(strict[n].total_paths(), avoiding[n], "self-avoiding n={}", n + 1);
    }
}

#[test]
fn self_avoiding_dominated_by_factor_free() {
    let free = Enumerator::default().tables(12).unwrap();
    let strict = Enumerator::with_family(PathFamily::SelfAvoiding).tables(12).unwrap();
    for (f, s) in free.iter().zip(&strict) {
        for (&(r, i, t), poly) in s.entries() {
            assert!(poly.is_dominated_by(f.get(r, i, t).unwrap()));
        }
    }
}

#[test]
fn uncorrected_system_departs_at_three_bonds() {
    let uncorrected = uncorrected_recurrence(12).unwrap();
    let recurrence = s_table_recurrence(12).unwrap();
    let diffs = compare_tables(&recurrence, &uncorrected);
    assert_eq!(diffs.iter().map(|d| d.n).min(), Some(3));
    assert!(compare_tables(&recurrence[..2], &uncorrected[..2]).is_empty());
}

#[test]
fn support_bound_and_self_avoidance() {
    Enumerator::with_family(PathFamily::SelfAvoiding)
        .for_each_path(12, |path| {
            let n = path.len() as i64;
            let (i, t) = path.endpoint();
            assert!(i.abs() <= 2 * n && t.abs() <= n);
            let v = path.vertices();
            let mut sorted = v.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), v.len(), "{:?}", path.bonds());
        })
        .unwrap();
    Enumerator::default()
        .for_each_path(12, |path| {
            let n = path.len() as i64;
            let (i, t) = path.endpoint();
            assert!(i.abs() <= 2 * n && t.abs() <= n);
        })
        .unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grading_counts_horizontal_bonds(n in 1usize..=10, k in 0u32..=5) {
        let upto = |cap: Option<u32>| Enumerator { max_horizontal: cap, ..Enumerator::default() }.tables(n).unwrap();
        let full = upto(None);
        let at_most = upto(Some(k));
        let below = if k == 0 { None } else { Some(upto(Some(k - 1))) };
        let table = &full[n - 1];
        for (&(r, i, t), poly) in table.entries() {
            let hi = at_most[n - 1].get(r, i, t).map_or(0, |p| p.total());
            let lo = below.as_ref().and_then(|b| b[n - 1].get(r, i, t)).map_or(0, AlphaPolynomial::total);
            prop_assert_eq!(poly.coefficient(k as usize), hi - lo);
        }
    }

    #[test]
    fn windowed_table_is_a_restriction(n in 1usize..=9, extra in 0i64..6) {
        let bound = n as i64 + extra;
        let windowed = Enumerator::default().table(n, bound).unwrap();
        let full = &Enumerator::default().tables(n).unwrap()[n - 1];
        for (&(r, i, t), poly) in full.entries() {
            let inside = i.abs() <= bound && t.abs() <= bound;
            prop_assert_eq!(windowed.get(r, i, t).is_some(), inside);
            if inside {
                prop_assert_eq!(windowed.get(r, i, t).unwrap(), poly);
            }
        }
    }
}
