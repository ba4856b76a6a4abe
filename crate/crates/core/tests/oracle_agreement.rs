mod common;

use arcsep::arcset::{screen_trivial, Verdict};
use arcsep::knapsack::is_valid;
use arcsep::oracle::{membership_in, PointCatalogue};
use arcsep::separator::{separate, SeparatorOptions};
use rand::Rng;

#[test]
fn verdicts_match_membership() {
    let mut rng = common::rng(7);
    let mut disagreements = Vec::new();
    let (mut inside, mut outside) = (0, 0);
    for _ in 0..300 {
        let inst = common::instance(&mut rng, 5, 2, 60);
        let cat = PointCatalogue::build(&inst).unwrap();
        for _ in 0..4 {
            let p = if rng.gen_bool(0.4) { common::inner_point(&mut rng, &inst, &cat) } else { common::relaxation_point(&mut rng, &inst) };
            if screen_trivial(&inst, &p).is_some() {
                continue;
            }
            let member = membership_in(&cat, &p).unwrap();
            let rep = separate(&inst, &p, &SeparatorOptions::default()).unwrap();
            if member { inside += 1 } else { outside += 1 }
            if let Some(cut) = &rep.cut {
                assert!(is_valid(&inst, &cut.to_int().unwrap()), "{inst:?} {p:?} {cut:?}");
            }
            let said_member = rep.verdict == Verdict::Member && rep.dropped.is_none();
            if said_member != member && !(rep.dropped.is_some() && !member) {
                disagreements.push(format!("{inst:?} {p:?} oracle {member} report {rep:?}"));
            }
        }
    }
    assert!(inside > 100 && outside > 100, "{inside} {outside}");
    assert!(disagreements.is_empty(), "{}\n{}", disagreements.len(), disagreements.iter().take(3).cloned().collect::<Vec<_>>().join("\n"));
}
