use stirval::cases::classify_with_actual;
use stirval::stirling::row_valuations;
use stirval::{Prime, StirlingKind};

#[test]
fn criteria_match_oracle() {
    let mut bad = Vec::new();
    let mut holds = [0usize; 4];
    for kind in [StirlingKind::First, StirlingKind::Second] {
        for q in [2, 3, 5] {
            let p = Prime::new(q).unwrap();
            let req: Vec<(u64, u64)> = (1..=200).map(|n| (n, n)).collect();
            let rows = row_valuations(kind, p, &req).unwrap();
            for n in 1..=200u64 {
                for k in 1..=n {
                    let rep = classify_with_actual(n, k, p, kind, rows[&n][k as usize]).unwrap();
                    let c = rep.criteria;
                    for (i, x) in [c.mzc, c.smzc, c.amzc, c.samzc].iter().enumerate() {
                        holds[i] += x.holds() as usize;
                    }
                    if !rep.agree {
                        bad.push(format!(
                            "{kind} p={q} n={n} k={k} {:?} {:?}",
                            rep.flags, rep.criteria
                        ));
                    }
                }
            }
        }
    }
    for b in bad.iter().take(30) {
        eprintln!("{b}");
    }
    assert!(holds.iter().all(|&h| h > 100), "{holds:?}");
    assert!(bad.is_empty(), "{} disagreements", bad.len());
}
