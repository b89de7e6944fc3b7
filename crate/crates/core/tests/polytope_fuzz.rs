mod common;

use common::{brute_force_vertices, random_system, rng, same_point_sets};
use lpoa_core::polytope::{Halfspace, Polytope};
use lpoa_core::Error;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn oracle_on_unit_cube() {
    let mut hs = Vec::new();
    for i in 0..3 {
        let mut n = vec![0.0; 3];
        n[i] = 1.0;
        hs.push(Halfspace::new(n.clone(), 1.0).unwrap());
        n[i] = -1.0;
        hs.push(Halfspace::new(n, 0.0).unwrap());
    }
    assert_eq!(brute_force_vertices(&hs, 3).len(), 8);
}

#[test]
fn random_systems_match_brute_force() {
    let mut r = rng(2024);
    let mut checked = 0;
    while checked < 300 {
        let dim = if checked % 2 == 0 { 2 } else { 3 };
        let m = r.random_range(dim + 1..=10);
        let hs = random_system(&mut r, dim, m);
        match Polytope::from_halfspaces(hs.clone()) {
            Ok(p) => {
                let oracle = brute_force_vertices(&hs, dim);
                assert!(same_point_sets(p.vertices(), &oracle, 1e-7), "{hs:?}");
                checked += 1;
            }
            Err(Error::Unbounded { .. }) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

#[test]
fn incremental_cuts_match_brute_force() {
    let mut r = rng(7);
    let mut checked = 0;
    while checked < 100 {
        let dim = 2 + checked % 2;
        let hs = random_system(&mut r, dim, 2 * dim + 2);
        let Ok(mut p) = Polytope::from_halfspaces(hs.clone()) else { continue };
        let mut all = hs;
        for _ in 0..6 {
            let extra = random_system(&mut r, dim, 1).remove(0);
            let h = Halfspace::new(extra.normal, extra.offset * 0.6).unwrap();
            all.push(h.clone());
            p = p.cut(&h).unwrap().polytope;
            let oracle = brute_force_vertices(&all, dim);
            assert!(same_point_sets(p.vertices(), &oracle, 1e-7));
        }
        checked += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vertices_satisfy_every_halfspace(seed in any::<u64>(), dim in 2usize..=3, m in 4usize..=9) {
        let hs = random_system(&mut rng(seed), dim, m);
        if let Ok(p) = Polytope::from_halfspaces(hs.clone()) {
            for v in p.vertices() {
                for h in &hs {
                    prop_assert!(h.contains(v, 1e-9));
                }
            }
            prop_assert!(same_point_sets(p.vertices(), &brute_force_vertices(&hs, dim), 1e-7));
        }
    }

    #[test]
    fn cuts_only_shrink(seed in any::<u64>(), off in 0.05f64..1.5) {
        let mut r = rng(seed);
        let hs = random_system(&mut r, 2, 6);
        if let Ok(p) = Polytope::from_halfspaces(hs) {
            let n = random_system(&mut r, 2, 1).remove(0).normal;
            if let Ok(out) = p.cut(&Halfspace::new(n, off).unwrap()) {
                let (a, b) = (p.volume().unwrap(), out.polytope.volume().unwrap());
                prop_assert!(b <= a + 1e-12);
                for v in out.polytope.vertices() {
                    prop_assert!(p.contains(v, 1e-9));
                }
            }
        }
    }
}
